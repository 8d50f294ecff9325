//! Root data for `𝔰𝔬(9,ℂ)` and `𝔰𝔩(2,ℂ)`, weight spaces, highest weight
//! censuses, and the explicit HP^n and OP² invariant spinors.
//!
//! `𝔰𝔭𝔦𝔫(9)` is handled abstractly through its basis `e_a·e_b` (labels
//! `0..9`). Coordinates `1..9` of `ℝ⁹` are identified with the labels by
//! `c ↔ e_{c−1}`, so that `E^{(9)}_{c,d} ↦ ½ e_{c−1}·e_{d−1}`. Weights are
//! written in the orthonormal coordinates `(μ₁, μ₂, μ₃, μ₄)` dual to
//! `h_j = −i E^{(9)}_{2j−1,2j}`.

use crate::clifford::{twisted_apply, twisted_operator, SpinAlgebraElement, TwistShape, TwistedSpinor};
use crate::numlin::{canonical_basis, joint_kernel, kernel_within, rank, SparseOperator, SparseVector, Tolerance};
use crate::spaces::{build_model, op2_aux_position, op2_pairs, op2_sigma, AuxParam, MetricParams, ReductiveModel, SpaceId};
use crate::spinorcalc::{hpn_omega, omega_power, verify_invariant};
use crate::{Error, Result, C64};
use nalgebra::{DMatrix, SymmetricEigen};
use std::collections::{BTreeMap, HashMap};
use std::path::Path;

const I: C64 = C64::new(0.0, 1.0);

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Complex combination of the generators `e_a·e_b` of `𝔰𝔭𝔦𝔫(9)`.
#[derive(Clone, Debug, PartialEq)]
pub struct So9Element(pub Vec<((usize, usize), C64)>);

impl So9Element {
    /// From `c·E^{(9)}_{p,q}` terms in ℝ⁹ coordinates.
    pub fn from_coordinates(terms: &[(usize, usize, C64)]) -> Self {
        So9Element(terms.iter().map(|&(p, q, c)| ((p - 1, q - 1), c * 0.5)).collect())
    }

    pub fn conj(&self) -> Self {
        So9Element(self.0.iter().map(|&(ab, c)| (ab, c.conj())).collect())
    }
}

/// `h_j = −i E^{(9)}_{2j−1,2j}`, `j = 1..4`.
pub fn cartan_element(j: usize) -> So9Element {
    So9Element::from_coordinates(&[(2 * j - 1, 2 * j, -I)])
}

/// Simple root vectors `X_1..X_4`.
pub fn raising_element(i: usize) -> So9Element {
    let o = re(1.0);
    match i {
        1 => So9Element::from_coordinates(&[(1, 3, o), (2, 4, o), (2, 3, -I), (1, 4, I)]),
        2 => So9Element::from_coordinates(&[(3, 5, o), (4, 6, o), (4, 5, -I), (3, 6, I)]),
        3 => So9Element::from_coordinates(&[(5, 7, o), (6, 8, o), (6, 7, -I), (5, 8, I)]),
        4 => So9Element::from_coordinates(&[(7, 9, o), (8, 9, -I)]),
        _ => panic!("B4 has four simple roots"),
    }
}

/// `Y_i = X̄_i`.
pub fn lowering_element(i: usize) -> So9Element {
    raising_element(i).conj()
}

/// Simple roots in `μ` coordinates.
pub fn simple_root(i: usize) -> [f64; 4] {
    match i {
        1 => [1.0, -1.0, 0.0, 0.0],
        2 => [0.0, 1.0, -1.0, 0.0],
        3 => [0.0, 0.0, 1.0, -1.0],
        4 => [0.0, 0.0, 0.0, 1.0],
        _ => panic!("B4 has four simple roots"),
    }
}

/// Fundamental weights `ω₁..ω₄` in `μ` coordinates.
pub fn fundamental_weight(i: usize) -> [f64; 4] {
    match i {
        1 => [1.0, 0.0, 0.0, 0.0],
        2 => [1.0, 1.0, 0.0, 0.0],
        3 => [1.0, 1.0, 1.0, 0.0],
        4 => [0.5, 0.5, 0.5, 0.5],
        _ => panic!("B4 has four fundamental weights"),
    }
}

/// Dynkin labels `(μ₁−μ₂, μ₂−μ₃, μ₃−μ₄, 2μ₄)`.
pub fn dynkin_labels(mu: &[f64]) -> [i64; 4] {
    [
        (mu[0] - mu[1]).round() as i64,
        (mu[1] - mu[2]).round() as i64,
        (mu[2] - mu[3]).round() as i64,
        (2.0 * mu[3]).round() as i64,
    ]
}

/// `μ` coordinates of `Σ_i d_i ω_i`.
pub fn weight_from_dynkin(d: [i64; 4]) -> [f64; 4] {
    let mut mu = [0.0; 4];
    for (i, &c) in d.iter().enumerate() {
        let w = fundamental_weight(i + 1);
        for k in 0..4 {
            mu[k] += c as f64 * w[k];
        }
    }
    mu
}

/// Representations of `𝔰𝔭𝔦𝔫(9)` used in the OP² computations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum So9Rep {
    /// The displayed real matrices `σ(e_a·e_b)` on `𝔪^ℂ = ℂ¹⁶`.
    Sigma9Matrix,
    /// `λ₉` followed by the spin lift on the exterior-forms `Σ₉`.
    Sigma9,
    /// `Σ₉^{⊗m}` with the derived action.
    Sigma9Tensor(usize),
    /// The spin lift `σ̃` on `Σ₁₆`.
    Sigma16,
    /// `Σ₁₆ ⊗ Σ₉^{⊗m}`; explicit operators only for `m = 1`.
    Twisted(usize),
}

fn sigma_lift(a: usize, b: usize) -> Result<SpinAlgebraElement> {
    SpinAlgebraElement::from_skew_matrix(&op2_sigma(a, b)?, 0.0)
}

fn lambda9(a: usize, b: usize) -> Result<SpinAlgebraElement> {
    SpinAlgebraElement::from_terms(9, [(op2_aux_position(a), op2_aux_position(b), 2.0)])
}

/// The 36 generator actions in `op2_pairs` order.
pub fn generator_operators(rep: So9Rep) -> Result<Vec<SparseOperator>> {
    op2_pairs()
        .into_iter()
        .map(|(a, b)| match rep {
            So9Rep::Sigma9Matrix => Ok(SparseOperator::from_real(&op2_sigma(a, b)?)),
            So9Rep::Sigma9 => Ok(lambda9(a, b)?.lift_operator()),
            So9Rep::Sigma9Tensor(m) => twisted_operator(TwistShape::new(1, 9, m)?, &SpinAlgebraElement::zero(1), &lambda9(a, b)?),
            So9Rep::Sigma16 => Ok(sigma_lift(a, b)?.lift_operator()),
            So9Rep::Twisted(1) => twisted_operator(TwistShape::new(16, 9, 1)?, &sigma_lift(a, b)?, &lambda9(a, b)?),
            So9Rep::Twisted(m) => Err(Error::Unsupported(format!("explicit operators on Σ₁₆ ⊗ Σ₉^⊗{m} are too large"))),
        })
        .collect()
}

fn combine(gens: &[SparseOperator], el: &So9Element) -> Result<SparseOperator> {
    let pairs = op2_pairs();
    let dim = gens[0].rows();
    let mut out = SparseOperator::zero(dim, gens[0].cols());
    for &((a, b), c) in &el.0 {
        let (idx, sign) = match pairs.iter().position(|&p| p == (a, b)) {
            Some(k) => (k, 1.0),
            None => (pairs.iter().position(|&p| p == (b, a)).expect("valid pair"), -1.0),
        };
        out = out.axpy(c * sign, &gens[idx])?;
    }
    Ok(out)
}

/// Cartan, raising and lowering operators of `B₄` in one representation.
#[derive(Clone, Debug)]
pub struct RootDatum {
    pub rank: usize,
    pub generators: Vec<SparseOperator>,
    pub cartan_ops: Vec<SparseOperator>,
    pub raising_ops: Vec<SparseOperator>,
    pub lowering_ops: Vec<SparseOperator>,
    pub fundamental_weights: Vec<[f64; 4]>,
}

impl RootDatum {
    pub fn dim(&self) -> usize {
        self.generators[0].cols()
    }
}

pub fn so9_root_datum(rep: So9Rep) -> Result<RootDatum> {
    let generators = generator_operators(rep)?;
    let cartan_ops = (1..=4).map(|j| combine(&generators, &cartan_element(j))).collect::<Result<_>>()?;
    let raising_ops = (1..=4).map(|i| combine(&generators, &raising_element(i))).collect::<Result<_>>()?;
    let lowering_ops = (1..=4).map(|i| combine(&generators, &lowering_element(i))).collect::<Result<_>>()?;
    Ok(RootDatum {
        rank: 4,
        generators,
        cartan_ops,
        raising_ops,
        lowering_ops,
        fundamental_weights: (1..=4).map(fundamental_weight).collect(),
    })
}

/// Joint eigenspace of the Cartan operators.
#[derive(Clone, Debug)]
pub struct WeightSpace {
    pub weight: Vec<f64>,
    pub basis: Vec<SparseVector>,
}

fn snap_half(x: f64) -> Result<f64> {
    let s = (2.0 * x).round() / 2.0;
    if (x - s).abs() > 1e-7 {
        return Err(Error::Verification(format!("eigenvalue {x} is not a half-integer")));
    }
    Ok(if s == 0.0 { 0.0 } else { s })
}

fn weight_key(w: &[f64]) -> Vec<i64> {
    w.iter().map(|x| (2.0 * x).round() as i64).collect()
}

/// Splits the module into joint eigenspaces of commuting Hermitian
/// operators with half-integral spectra, sorted by weight.
pub fn weight_decomposition(cartan: &[SparseOperator], tol: &Tolerance) -> Result<Vec<WeightSpace>> {
    let dim = cartan.first().map(|c| c.cols()).ok_or_else(|| Error::InvalidInput("no Cartan operators".into()))?;
    let mut groups: BTreeMap<Vec<i64>, (Vec<f64>, DMatrix<C64>)> = BTreeMap::new();
    if cartan.iter().all(|h| h.is_diagonal()) {
        let mut cols: BTreeMap<Vec<i64>, (Vec<f64>, Vec<usize>)> = BTreeMap::new();
        for i in 0..dim {
            let w: Vec<f64> = cartan.iter().map(|h| snap_half(h.diagonal_entry(i).re)).collect::<Result<_>>()?;
            cols.entry(weight_key(&w)).or_insert_with(|| (w, Vec::new())).1.push(i);
        }
        let mut out = Vec::with_capacity(cols.len());
        for (_, (w, idx)) in cols {
            out.push(WeightSpace { weight: w, basis: idx.into_iter().map(|i| SparseVector::unit(dim, i)).collect() });
        }
        return Ok(out);
    }
    let mut current: Vec<(Vec<f64>, DMatrix<C64>)> = vec![(Vec::new(), DMatrix::identity(dim, dim))];
    for h in cartan {
        let hd = h.to_dense();
        let mut next = Vec::new();
        for (w, q) in current {
            let restricted = q.adjoint() * &hd * &q;
            if (&restricted - restricted.adjoint()).camax() > 1e-9 {
                return Err(Error::Verification("Cartan operator is not Hermitian on the module".into()));
            }
            let eig = SymmetricEigen::new(restricted);
            let mut by_value: BTreeMap<i64, (f64, Vec<usize>)> = BTreeMap::new();
            for (k, &ev) in eig.eigenvalues.iter().enumerate() {
                let s = snap_half(ev)?;
                by_value.entry((2.0 * s).round() as i64).or_insert_with(|| (s, Vec::new())).1.push(k);
            }
            for (_, (s, ks)) in by_value {
                let v = DMatrix::from_fn(eig.eigenvectors.nrows(), ks.len(), |i, j| eig.eigenvectors[(i, ks[j])]);
                let mut w2 = w.clone();
                w2.push(s);
                next.push((w2, &q * v));
            }
        }
        current = next;
    }
    for (w, q) in current {
        groups.insert(weight_key(&w), (w, canonical_basis(&q)));
    }
    let mut out = Vec::with_capacity(groups.len());
    for (_, (w, q)) in groups {
        let basis = (0..q.ncols())
            .map(|j| SparseVector::from_pairs(dim, (0..dim).map(|i| (i, q[(i, j)])), tol.drop_tol))
            .collect::<Result<_>>()?;
        out.push(WeightSpace { weight: w, basis });
    }
    Ok(out)
}

/// The weight space of `μ`; empty when `μ` is not a weight.
pub fn weight_space(spaces: &[WeightSpace], mu: &[f64]) -> Vec<SparseVector> {
    if mu.iter().any(|x| (2.0 * x - (2.0 * x).round()).abs() > 1e-9) {
        return Vec::new();
    }
    let key = weight_key(mu);
    spaces.iter().find(|s| weight_key(&s.weight) == key).map(|s| s.basis.clone()).unwrap_or_default()
}

fn is_dominant_b4(mu: &[f64]) -> bool {
    mu[0] >= mu[1] - 1e-9 && mu[1] >= mu[2] - 1e-9 && mu[2] >= mu[3] - 1e-9 && mu[3] >= -1e-9
}

/// Highest weight multiplicities as `(Dynkin labels, count)`, sorted by labels.
pub fn hwv_census(datum: &RootDatum, spaces: &[WeightSpace], tol: &Tolerance) -> Result<Vec<([i64; 4], usize)>> {
    let mut out = Vec::new();
    for s in spaces.iter().filter(|s| is_dominant_b4(&s.weight)) {
        let k = kernel_within(&datum.raising_ops, &s.basis, tol)?.len();
        if k > 0 {
            out.push((dynkin_labels(&s.weight), k));
        }
    }
    out.sort();
    Ok(out)
}

/// `Y_𝓘·v = Y_{i₁}(Y_{i₂}(…Y_{i_k}(v)))`.
pub fn apply_word(lowering: &[SparseOperator], word: &[usize], v: &SparseVector) -> Result<SparseVector> {
    let mut out = v.clone();
    for &i in word.iter().rev() {
        let op = lowering.get(i.wrapping_sub(1)).ok_or_else(|| Error::IndexOutOfRange(format!("lowering operator {i}")))?;
        out = op.apply(&out)?;
    }
    Ok(out)
}

/// Table of lowering words `𝓘_{k,ℓ}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoweringTable {
    words: BTreeMap<(usize, usize), Vec<usize>>,
}

impl LoweringTable {
    /// Parses `k,ℓ:i₁ i₂ …` records, one per line, sorted by `(k, ℓ)`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut words = BTreeMap::new();
        let mut last: Option<(usize, usize)> = None;
        for (lineno, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let bad = |why: &str| Error::InvalidInput(format!("table line {}: {why}: '{line}'", lineno + 1));
            let (key, rest) = line.split_once(':').ok_or_else(|| bad("missing ':'"))?;
            let (k, l) = key.split_once(',').ok_or_else(|| bad("missing ','"))?;
            let k: usize = k.parse().map_err(|_| bad("bad k"))?;
            let l: usize = l.parse().map_err(|_| bad("bad ℓ"))?;
            let word: Vec<usize> = if rest.is_empty() {
                Vec::new()
            } else {
                rest.split(' ').map(|t| t.parse::<usize>().map_err(|_| bad("bad index"))).collect::<Result<_>>()?
            };
            if word.len() != k {
                return Err(bad("word length differs from k"));
            }
            if word.iter().any(|&i| !(1..=4).contains(&i)) {
                return Err(bad("index outside 1..4"));
            }
            if l == 0 || last.is_some_and(|p| p >= (k, l)) {
                return Err(bad("records out of order"));
            }
            last = Some((k, l));
            words.insert((k, l), word);
        }
        Ok(LoweringTable { words })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// The shipped table generating `V(ω₁+ω₄)`.
    pub fn embedded() -> Self {
        Self::parse(include_str!("../data/table3.txt")).expect("shipped table parses")
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> impl Iterator<Item = (&(usize, usize), &Vec<usize>)> {
        self.words.iter()
    }

    /// `μ_k` for `k = 0..=max k`.
    pub fn counts(&self) -> Vec<usize> {
        let kmax = self.words.keys().map(|k| k.0).max().unwrap_or(0);
        let mut c = vec![0; kmax + 1];
        for &(k, _) in self.words.keys() {
            c[k] += 1;
        }
        c
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (&(k, l), w) in &self.words {
            let idx: Vec<String> = w.iter().map(|i| i.to_string()).collect();
            s.push_str(&format!("{k},{l}:{}\n", idx.join(" ")));
        }
        s
    }
}

/// Invariant bilinear form `β(v, w) = vᵀ M w` on the span of `basis`.
#[derive(Clone, Debug)]
pub struct BilinearFormMatrix {
    pub matrix: DMatrix<C64>,
    pub symmetric: bool,
    pub invariance_residual: f64,
}

/// Unique (up to scale) bilinear form with `β(g·v, w) + β(v, g·w) = 0` for
/// every operator `g`. With weights supplied, only entries pairing `μ` with
/// `−μ` are unknowns. The result is scaled so that its first nonzero entry
/// in row-major order is 1.
pub fn invariant_bilinear_form(
    generators: &[SparseOperator],
    basis: &[SparseVector],
    weights: Option<&[Vec<f64>]>,
    tol: &Tolerance,
) -> Result<BilinearFormMatrix> {
    let n = basis.len();
    if n == 0 {
        return Err(Error::InvalidInput("empty module basis".into()));
    }
    let dim = basis[0].dim();
    let mut b = DMatrix::<C64>::zeros(dim, n);
    for (j, v) in basis.iter().enumerate() {
        for &(i, z) in v.entries() {
            b[(i, j)] = z;
        }
    }
    let bh = b.adjoint();
    let gram_inv = (&bh * &b)
        .try_inverse()
        .ok_or_else(|| Error::Verification("module basis is linearly dependent".into()))?;
    // Matrices of the generators on the module: g·b_J = Σ_K G[K][J] b_K.
    let mut gmats = Vec::with_capacity(generators.len());
    for g in generators {
        let mut gb = DMatrix::<C64>::zeros(dim, n);
        for (j, v) in basis.iter().enumerate() {
            for &(i, z) in g.apply(v)?.entries() {
                gb[(i, j)] = z;
            }
        }
        let gm = &gram_inv * (&bh * &gb);
        if (&gb - &b * &gm).camax() > 1e-8 * (1.0 + gb.camax()) {
            return Err(Error::Verification("module is not invariant under the generators".into()));
        }
        gmats.push(gm);
    }
    let unknowns: Vec<(usize, usize)> = match weights {
        Some(w) => {
            let keys: Vec<Vec<i64>> = w.iter().map(|x| weight_key(x)).collect();
            (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .filter(|&(i, j)| keys[i].iter().zip(&keys[j]).all(|(a, b)| a + b == 0))
                .collect()
        }
        None => (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect(),
    };
    let nu = unknowns.len();
    let mut normal = DMatrix::<C64>::zeros(nu, nu);
    for gm in &gmats {
        // (GᵀM + MG)[I][J] = Σ_K G[K][I] M[K][J] + Σ_K M[I][K] G[K][J].
        let mut rows: HashMap<(usize, usize), Vec<(usize, C64)>> = HashMap::new();
        for (u, &(k, j)) in unknowns.iter().enumerate() {
            for i in 0..n {
                let gki = gm[(k, i)];
                if gki.norm() > tol.drop_tol {
                    rows.entry((i, j)).or_default().push((u, gki));
                }
            }
        }
        for (u, &(i, k)) in unknowns.iter().enumerate() {
            for j in 0..n {
                let gkj = gm[(k, j)];
                if gkj.norm() > tol.drop_tol {
                    rows.entry((i, j)).or_default().push((u, gkj));
                }
            }
        }
        for (_, row) in rows {
            for &(u1, c1) in &row {
                for &(u2, c2) in &row {
                    normal[(u1, u2)] += c1.conj() * c2;
                }
            }
        }
    }
    let eig = SymmetricEigen::new(normal);
    let scale = eig.eigenvalues.iter().cloned().fold(1.0, f64::max);
    let null: Vec<usize> = (0..nu).filter(|&k| eig.eigenvalues[k] <= tol.rank_tol * scale).collect();
    if null.len() != 1 {
        return Err(Error::Verification(format!("invariant form space has dimension {}, expected 1", null.len())));
    }
    let v = eig.eigenvectors.column(null[0]);
    let mut m = DMatrix::<C64>::zeros(n, n);
    for (u, &(i, j)) in unknowns.iter().enumerate() {
        m[(i, j)] = v[u];
    }
    let first = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .find(|&(i, j)| m[(i, j)].norm() > 1e-6)
        .ok_or_else(|| Error::Verification("invariant form vanishes".into()))?;
    let m = m.map(|z| z / m[first]);
    let sym = (&m - m.transpose()).camax() <= 1e-8;
    let anti = (&m + m.transpose()).camax() <= 1e-8;
    if !(sym || anti) {
        return Err(Error::Verification("invariant form has mixed symmetry".into()));
    }
    let svd_min = m.clone().svd(false, false).singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
    if svd_min <= tol.rank_tol {
        return Err(Error::Verification("invariant form is degenerate".into()));
    }
    let mut residual: f64 = 0.0;
    for gm in &gmats {
        residual = residual.max((gm.transpose() * &m + &m * gm).camax());
    }
    Ok(BilinearFormMatrix { matrix: m, symmetric: sym, invariance_residual: residual })
}

/// `H, X, Y` of an `𝔰𝔩(2,ℂ)` representation.
#[derive(Clone, Debug)]
pub struct Sl2Rep {
    pub h: SparseOperator,
    pub x: SparseOperator,
    pub y: SparseOperator,
}

impl Sl2Rep {
    /// `H = −iξ₁`, `X = ½(ξ₂ − iξ₃)`, `Y = −½(ξ₂ + iξ₃)`.
    pub fn from_xi(xi: [&SparseOperator; 3]) -> Result<Self> {
        let h = xi[0].scale(-I);
        let x = xi[1].scale(re(0.5)).axpy(-I * 0.5, xi[2])?;
        let y = xi[1].scale(re(-0.5)).axpy(-I * 0.5, xi[2])?;
        Ok(Sl2Rep { h, x, y })
    }

    /// Largest residual of `[H,X] = 2X`, `[H,Y] = −2Y`, `[X,Y] = H`.
    pub fn relation_residual(&self) -> Result<f64> {
        let a = self.h.commutator(&self.x)?.axpy(re(-2.0), &self.x)?.max_abs();
        let b = self.h.commutator(&self.y)?.axpy(re(2.0), &self.y)?.max_abs();
        let c = self.x.commutator(&self.y)?.axpy(re(-1.0), &self.h)?.max_abs();
        Ok(a.max(b).max(c))
    }
}

fn hpn_reference(n: usize) -> Result<ReductiveModel> {
    build_model(SpaceId::Hpn, n.max(2), MetricParams::default(), AuxParam::Nontrivial)
}

/// `𝔰𝔭(1)` acting on `Σ₃^{⊗m}` through the displayed `ρ(ξ_i)`.
pub fn sl2_aux_rep(m: usize) -> Result<Sl2Rep> {
    let model = hpn_reference(2)?;
    let shape = TwistShape::new(1, 3, m)?;
    let zero = SpinAlgebraElement::zero(1);
    let ops: Vec<SparseOperator> =
        (0..3).map(|k| twisted_operator(shape, &zero, &model.aux_basis()[k])).collect::<Result<_>>()?;
    Sl2Rep::from_xi([&ops[0], &ops[1], &ops[2]])
}

/// `𝔰𝔭(1) ⊂ 𝔥` acting on `Σ_{4n}` through the isotropy spin lift.
pub fn sl2_tangent_rep(n: usize) -> Result<Sl2Rep> {
    let model = hpn_reference(n)?;
    let ops: Vec<SparseOperator> = (0..3).map(|k| model.isotropy_basis()[k].lift_operator()).collect();
    Sl2Rep::from_xi([&ops[0], &ops[1], &ops[2]])
}

/// Highest weights `t` of an `𝔰𝔩(2)` module and their multiplicities.
pub fn sl2_census(rep: &Sl2Rep, tol: &Tolerance) -> Result<Vec<(i64, usize)>> {
    let spaces = weight_decomposition(std::slice::from_ref(&rep.h), tol)?;
    let mut out = Vec::new();
    for s in spaces.iter().filter(|s| s.weight[0] >= 0.0) {
        let k = kernel_within(std::slice::from_ref(&rep.x), &s.basis, tol)?.len();
        if k > 0 {
            out.push((s.weight[0].round() as i64, k));
        }
    }
    out.sort_unstable_by(|a, b| b.cmp(a));
    Ok(out)
}

/// `ψ = Σ_j (−1)^j ω^j ⊗ (ρ(Y)^{n−j}·𝟙)` in `Σ_{4n} ⊗ Σ₃^{⊗n}`.
pub fn build_hpn_spinor(n: usize) -> Result<TwistedSpinor> {
    if n < 2 || n % 2 == 0 {
        return Err(Error::InvalidInput(format!("the HP^n spinor needs odd n > 1, got {n}")));
    }
    let shape = TwistShape::new(4 * n, 3, n)?;
    let y = sl2_aux_rep(n)?.y;
    let omega = hpn_omega(n)?;
    let aux_dim = 1usize << n;
    let mut pows = vec![SparseVector::unit(aux_dim, 0)];
    for k in 1..=n {
        let next = y.apply(&pows[k - 1])?;
        pows.push(next);
    }
    let tbits = shape.tangent_bits();
    let mut raw = Vec::new();
    for j in 0..=n {
        let w = omega_power(&omega, j)?;
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        for (&t, &z) in w.coeffs() {
            for &(a, c) in pows[n - j].entries() {
                raw.push((t as usize | (a << tbits), z * c * sign));
            }
        }
    }
    TwistedSpinor::from_vector(shape, SparseVector::from_pairs(shape.dim(), raw, 0.0)?)
}

/// Everything produced on the way to the OP² spinors.
#[derive(Clone, Debug)]
pub struct Op2Construction {
    pub w0: SparseVector,
    pub target_hwvs: Vec<SparseVector>,
    pub word_vectors: Vec<SparseVector>,
    pub word_rank: usize,
    pub form: BilinearFormMatrix,
    pub spinors: Vec<TwistedSpinor>,
    pub residuals: Vec<f64>,
}

fn weight_of_word(top: &[f64; 4], word: &[usize]) -> Vec<f64> {
    let mut w = top.to_vec();
    for &i in word {
        let a = simple_root(i);
        for k in 0..4 {
            w[k] -= a[k];
        }
    }
    w
}

fn weight_residual(cartan: &[SparseOperator], v: &SparseVector, mu: &[f64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (h, &m) in cartan.iter().zip(mu) {
        worst = worst.max(h.apply(v)?.axpy(re(-m), v, 0.0)?.norm());
    }
    Ok(worst / v.norm().max(f64::MIN_POSITIVE))
}

/// Relative invariance residual of a twisted spinor on `Σ₁₆ ⊗ Σ₉^{⊗m}`
/// under all 36 generators.
pub fn op2_invariance_residual(psi: &TwistedSpinor) -> Result<f64> {
    let nrm = psi.norm();
    let mut worst: f64 = 0.0;
    for (a, b) in op2_pairs() {
        worst = worst.max(twisted_apply(&sigma_lift(a, b)?, &lambda9(a, b)?, psi)?.norm() / nrm);
    }
    Ok(worst)
}

/// Builds `ψ_p = Σ_𝓘 (Y_𝓘·w₀)^♯ ⊗ (Y_𝓘·w_p)` for the four highest weight
/// vectors `w_p` of weight `ω₁+ω₄` in `Σ₉^{⊗3}`.
pub fn build_op2_spinors(table: &LoweringTable, tol: &Tolerance) -> Result<Op2Construction> {
    construct_op2(table, tol, true)
}

fn construct_op2(table: &LoweringTable, tol: &Tolerance, verify: bool) -> Result<Op2Construction> {
    let top = weight_from_dynkin([1, 0, 0, 1]);
    let d16 = so9_root_datum(So9Rep::Sigma16)?;
    let s16 = weight_decomposition(&d16.cartan_ops, tol)?;
    let hw16 = kernel_within(&d16.raising_ops, &weight_space(&s16, &top), tol)?;
    if hw16.len() != 1 {
        return Err(Error::Verification(format!("Σ₁₆ has {} highest weight vectors of weight ω₁+ω₄", hw16.len())));
    }
    let w0 = hw16[0].clone();
    let d93 = so9_root_datum(So9Rep::Sigma9Tensor(3))?;
    let s93 = weight_decomposition(&d93.cartan_ops, tol)?;
    let target_hwvs = kernel_within(&d93.raising_ops, &weight_space(&s93, &top), tol)?;
    if target_hwvs.len() != 4 {
        return Err(Error::Verification(format!("Σ₉^⊗3 has {} highest weight vectors of weight ω₁+ω₄", target_hwvs.len())));
    }

    let words: Vec<Vec<usize>> = table.words().map(|(_, w)| w.clone()).collect();
    let mut word_vectors = Vec::with_capacity(words.len());
    let mut weights = Vec::with_capacity(words.len());
    for w in &words {
        let v = apply_word(&d16.lowering_ops, w, &w0)?;
        let mu = weight_of_word(&top, w);
        if v.norm() < tol.rank_tol || weight_residual(&d16.cartan_ops, &v, &mu)? > 1e-9 {
            return Err(Error::Verification(format!("word {w:?} does not give a weight vector of weight {mu:?}")));
        }
        word_vectors.push(v);
        weights.push(mu);
    }
    let word_rank = rank(&word_vectors, tol.rank_tol);
    if word_rank != words.len() {
        return Err(Error::Verification(format!("lowering words span rank {word_rank}, expected {}", words.len())));
    }
    let mut gens = d16.raising_ops.clone();
    gens.extend(d16.lowering_ops.iter().cloned());
    let form = invariant_bilinear_form(&gens, &word_vectors, Some(&weights), tol)?;
    let minv = form
        .matrix
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Verification("invariant form is singular".into()))?;

    // u_K = Σ_I (M⁻¹)_{KI} b_I, dense over Σ₁₆.
    let n = words.len();
    let mut u: Vec<Vec<C64>> = vec![vec![C64::new(0.0, 0.0); 256]; n];
    for k in 0..n {
        for i in 0..n {
            let c = minv[(k, i)];
            if c.norm() > tol.drop_tol {
                for &(idx, z) in word_vectors[i].entries() {
                    u[k][idx] += c * z;
                }
            }
        }
    }
    let shape = TwistShape::new(16, 9, 3)?;
    let mut spinors = Vec::with_capacity(4);
    let mut residuals = Vec::with_capacity(4);
    for wp in &target_hwvs {
        let mut raw = Vec::new();
        for (k, w) in words.iter().enumerate() {
            let c = apply_word(&d93.lowering_ops, w, wp)?;
            for (t, &zu) in u[k].iter().enumerate() {
                if zu.norm() <= tol.drop_tol {
                    continue;
                }
                for &(a, zc) in c.entries() {
                    raw.push((t | (a << 8), zu * zc));
                }
            }
        }
        let psi = TwistedSpinor::from_vector(shape, SparseVector::from_pairs(shape.dim(), raw, tol.drop_tol)?)?;
        let res = if verify { op2_invariance_residual(&psi)? } else { f64::NAN };
        if res > 1e-8 {
            return Err(Error::Verification(format!("OP² spinor has invariance residual {res:.3e}")));
        }
        residuals.push(res);
        spinors.push(psi);
    }
    Ok(Op2Construction { w0, target_hwvs, word_vectors, word_rank, form, spinors, residuals })
}

/// Orthonormalises twisted spinors by Gram–Schmidt in the given order.
pub fn orthonormalize(vs: &[TwistedSpinor], tol: &Tolerance) -> Result<Vec<TwistedSpinor>> {
    let mut out: Vec<TwistedSpinor> = Vec::with_capacity(vs.len());
    for v in vs {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &out {
                let c = w.herm(b)?;
                w = w.axpy(-c, b)?;
            }
        }
        let nrm = w.norm();
        if nrm <= tol.rank_tol * v.norm().max(1.0) {
            return Err(Error::Verification("linearly dependent spinors".into()));
        }
        out.push(w.scale(re(1.0 / nrm)));
    }
    Ok(out)
}

/// Invariant space of OP² with `λ₉`-twisting: the representation-theoretic
/// construction at `m = 3`, and a kernel on the zero weight space at `m = 1`.
pub fn op2_invariant_space(model: &ReductiveModel, tol: &Tolerance) -> Result<Vec<TwistedSpinor>> {
    op2_invariant_space_with(model, &LoweringTable::embedded(), tol)
}

pub fn op2_invariant_space_with(model: &ReductiveModel, table: &LoweringTable, tol: &Tolerance) -> Result<Vec<TwistedSpinor>> {
    if model.space() != SpaceId::Op2 || model.aux_param() != AuxParam::Nontrivial || model.r() != 9 {
        return Err(Error::Unsupported("only the λ₉ twisting with r = 9 is modelled for OP²".into()));
    }
    let out = match model.m_twists() {
        // The orthonormalised basis is verified below; skip the per-spinor pass.
        3 => orthonormalize(&construct_op2(table, tol, false)?.spinors, tol)?,
        1 => {
            let zero = op2_zero_weight_space(1, tol)?;
            let shape = model.shape()?;
            kernel_within(&generator_operators(So9Rep::Twisted(1))?, &zero, tol)?
                .into_iter()
                .map(|v| TwistedSpinor::from_vector(shape, v))
                .collect::<Result<_>>()?
        }
        m => return Err(Error::Unsupported(format!("OP² invariant spaces at m = {m} are not modelled"))),
    };
    verify_invariant(model, &out, tol)?;
    Ok(out)
}

/// Orthonormal basis of the zero weight space of `Σ₁₆ ⊗ Σ₉^{⊗m}`.
pub fn op2_zero_weight_space(m: usize, tol: &Tolerance) -> Result<Vec<SparseVector>> {
    let shape = TwistShape::new(16, 9, m)?;
    let s16 = weight_decomposition(&so9_root_datum(So9Rep::Sigma16)?.cartan_ops, tol)?;
    let s9 = weight_decomposition(&so9_root_datum(So9Rep::Sigma9Tensor(m))?.cartan_ops, tol)?;
    let mut out = Vec::new();
    for a in &s16 {
        let neg: Vec<f64> = a.weight.iter().map(|x| -x).collect();
        for c in weight_space(&s9, &neg) {
            for u in &a.basis {
                let (ci, _) = c.pivot().expect("unit vector");
                let raw = u.entries().iter().map(|&(t, z)| (t | (ci << 8), z));
                out.push(SparseVector::from_pairs(shape.dim(), raw, 0.0)?);
            }
        }
    }
    Ok(out)
}

/// Invariant count at `m = 1` computed without the weight reduction.
pub fn op2_direct_kernel_m1(tol: &Tolerance) -> Result<usize> {
    Ok(joint_kernel(&generator_operators(So9Rep::Twisted(1))?, tol)?.len())
}
