//! Nomizu maps, auxiliary curvature and Ricci tensors.
//!
//! All endomorphisms of `𝔪` are matrices in the orthonormal `𝔪` basis acting
//! on columns: `T(f_j) = Σ_i T[i][j] f_i`.

use crate::clifford::{SpinAlgebraElement, TwistedSpinor};
use crate::numlin::Tolerance;
use crate::spaces::{ReductiveModel, SpaceId};
use crate::spinorcalc::eta_forms;
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Nomizu map restricted to `𝔪`: one `𝔰𝔬(𝔪)` and one `𝔰𝔬(r)` element per
/// basis vector.
#[derive(Clone, Debug, PartialEq)]
pub struct NomizuMap {
    pub tangent: Vec<SpinAlgebraElement>,
    pub aux: Vec<SpinAlgebraElement>,
}

impl NomizuMap {
    /// `Λ|_𝔪 = 0` on both factors.
    pub fn zero(model: &ReductiveModel) -> Self {
        let d = model.dim_m();
        NomizuMap { tangent: vec![SpinAlgebraElement::zero(d); d], aux: vec![SpinAlgebraElement::zero(model.r()); d] }
    }

    pub fn new(model: &ReductiveModel, tangent: Vec<SpinAlgebraElement>, aux: Vec<SpinAlgebraElement>) -> Result<Self> {
        let d = model.dim_m();
        if tangent.len() != d || aux.len() != d {
            return Err(Error::DimensionMismatch(format!("Nomizu map needs {d} images per factor")));
        }
        if tangent.iter().any(|x| x.n() != d) || aux.iter().any(|x| x.n() != model.r()) {
            return Err(Error::DimensionMismatch("Nomizu images in the wrong orthogonal algebra".into()));
        }
        Ok(NomizuMap { tangent, aux })
    }

    pub fn with_aux(&self, aux: Vec<SpinAlgebraElement>) -> Self {
        NomizuMap { tangent: self.tangent.clone(), aux }
    }

    pub fn is_zero(&self) -> bool {
        self.tangent.iter().chain(&self.aux).all(|x| x.is_zero())
    }

    /// Largest coefficient difference from another map.
    pub fn distance(&self, other: &NomizuMap) -> f64 {
        let diff = |a: &[SpinAlgebraElement], b: &[SpinAlgebraElement]| {
            a.iter()
                .zip(b)
                .map(|(x, y)| (x.to_skew_matrix() - y.to_skew_matrix()).amax())
                .fold(0.0, f64::max)
        };
        diff(&self.tangent, &other.tangent).max(diff(&self.aux, &other.aux))
    }
}

fn brackets_or_unsupported(model: &ReductiveModel, what: &str) -> Result<()> {
    if model.has_brackets() {
        Ok(())
    } else {
        Err(Error::Unsupported(format!("{what} needs [𝔪,𝔪], which is not modelled for {}", model.space())))
    }
}

/// `Λ(X)Y = ½[X,Y]_𝔪 + U(X,Y)` for the Levi-Civita connection.
///
/// OP² is a symmetric space in its canonical presentation, so its map is
/// zero without needing `𝔣₄` brackets.
pub fn levi_civita_nomizu(model: &ReductiveModel) -> Result<NomizuMap> {
    if model.space() == SpaceId::Op2 {
        return Ok(NomizuMap::zero(model));
    }
    brackets_or_unsupported(model, "the Levi-Civita Nomizu map")?;
    let d = model.dim_m();
    // c[i][j][k]: f_k coefficient of [f_i, f_j]_𝔪.
    let c = |i: usize, j: usize, k: usize| model.m_bracket(i, j).expect("brackets present").0[k];
    let mut tangent = Vec::with_capacity(d);
    for i in 0..d {
        let mut mat = DMatrix::zeros(d, d);
        for j in 0..d {
            for k in 0..d {
                let u = 0.5 * (c(k, i, j) + c(k, j, i));
                mat[(k, j)] = 0.5 * c(i, j, k) + u;
            }
        }
        tangent.push(SpinAlgebraElement::from_skew_matrix(&mat, 1e-14)?);
    }
    Ok(NomizuMap { tangent, aux: vec![SpinAlgebraElement::zero(model.r()); d] })
}

/// Tangent Nomizu map of the symplectic CP^{2n+1} metric `g_{a,t}` from the
/// closed formulas, in the model's `(ξ₂, ξ₃, e₄, …)` ordering.
pub fn symplectic_nomizu_closed_form(n: usize, a: f64, t: f64) -> Result<Vec<SpinAlgebraElement>> {
    if n == 0 || !(a > 0.0 && t > 0.0) {
        return Err(Error::InvalidInput(format!("need n ≥ 1 and a, t > 0, got n = {n}, a = {a}, t = {t}")));
    }
    let d = 4 * n + 2;
    let (x2, x3) = (0usize, 1usize);
    let e = |p: usize, eps: usize| 2 + 4 * (p - 1) + eps;
    let v = (1.0 - t) / (2.0 * (2.0 * a * t).sqrt());
    let h = 0.5 * (t / (2.0 * a)).sqrt();
    // Spin coefficients c on e_i·e_j become so(d) coefficients 2c on e_i∧e_j.
    let mut out = vec![SpinAlgebraElement::zero(d); d];
    for p in 1..=n {
        let (e0, e1, e2, e3) = (e(p, 0), e(p, 1), e(p, 2), e(p, 3));
        out[x2].add_term(e0, e2, 2.0 * v)?;
        out[x2].add_term(e1, e3, -2.0 * v)?;
        out[x3].add_term(e0, e3, 2.0 * v)?;
        out[x3].add_term(e1, e2, 2.0 * v)?;
        out[e0] = SpinAlgebraElement::from_terms(d, [(x2, e2, -2.0 * h), (x3, e3, -2.0 * h)])?;
        out[e1] = SpinAlgebraElement::from_terms(d, [(x2, e3, 2.0 * h), (x3, e2, -2.0 * h)])?;
        out[e2] = SpinAlgebraElement::from_terms(d, [(x2, e0, 2.0 * h), (x3, e1, 2.0 * h)])?;
        out[e3] = SpinAlgebraElement::from_terms(d, [(x2, e1, -2.0 * h), (x3, e0, 2.0 * h)])?;
    }
    Ok(out)
}

/// Basis of the linear maps `Λ: 𝔪 → 𝔰𝔬(r)` with
/// `Λ([v, Y]) = [aux(v), Λ(Y)]` for all `v ∈ 𝔥`.
pub fn invariant_aux_nomizu_space(model: &ReductiveModel, tol: &Tolerance) -> Result<Vec<Vec<SpinAlgebraElement>>> {
    let d = model.dim_m();
    let r = model.r();
    let pairs: Vec<(usize, usize)> = (0..r).flat_map(|k| ((k + 1)..r).map(move |l| (k, l))).collect();
    let np = pairs.len();
    let unknowns = d * np;
    if unknowns == 0 {
        return Ok(Vec::new());
    }
    let pair_index = |k: usize, l: usize| pairs.iter().position(|&p| p == (k, l)).expect("pair");
    // Normal equations AᵀA accumulated block by block.
    let mut ata = DMatrix::<f64>::zeros(unknowns, unknowns);
    for (iso, aux) in model.isotropy_basis().iter().zip(model.aux_basis()) {
        let im = iso.to_skew_matrix();
        let am = aux.to_skew_matrix();
        // Rows indexed by (j, pair); unknown (i, q) is Λ(f_i)'s coefficient on pair q.
        let mut block = DMatrix::<f64>::zeros(d * np, unknowns);
        for j in 0..d {
            for i in 0..d {
                if im[(i, j)] != 0.0 {
                    for q in 0..np {
                        block[(j * np + q, i * np + q)] += im[(i, j)];
                    }
                }
            }
            for (q, &(k, l)) in pairs.iter().enumerate() {
                // [aux, E_q] for the unit generator E_q = e_k∧e_l.
                let mut eq = DMatrix::zeros(r, r);
                eq[(l, k)] = 1.0;
                eq[(k, l)] = -1.0;
                let br = &am * &eq - &eq * &am;
                for k2 in 0..r {
                    for l2 in (k2 + 1)..r {
                        let v = br[(l2, k2)];
                        if v != 0.0 {
                            block[(j * np + pair_index(k2, l2), j * np + q)] -= v;
                        }
                    }
                }
            }
        }
        ata += block.transpose() * &block;
    }
    let eig = SymmetricEigen::new(ata);
    let scale = eig.eigenvalues.iter().cloned().fold(1.0, f64::max);
    let mut out = Vec::new();
    for (idx, &ev) in eig.eigenvalues.iter().enumerate() {
        if ev <= tol.rank_tol * tol.rank_tol * scale {
            let v: DVector<f64> = eig.eigenvectors.column(idx).into_owned();
            let mut map = Vec::with_capacity(d);
            for i in 0..d {
                map.push(SpinAlgebraElement::from_terms(
                    r,
                    pairs.iter().enumerate().filter(|(q, _)| v[i * np + q].abs() > tol.drop_tol).map(|(q, &(k, l))| (k, l, v[i * np + q])),
                )?);
            }
            out.push(map);
        }
    }
    Ok(out)
}

/// Curvature `Ω(f_i, f_j)` of an invariant connection on the auxiliary bundle.
#[derive(Clone, Debug)]
pub struct AuxCurvature {
    values: Vec<Vec<SpinAlgebraElement>>,
}

impl AuxCurvature {
    pub fn get(&self, i: usize, j: usize) -> &SpinAlgebraElement {
        &self.values[i][j]
    }

    pub fn dim_m(&self) -> usize {
        self.values.len()
    }

    /// `Θ_{kl}(f_a, f_b) = ⟨Ω(f_a, f_b)ê_k, ê_l⟩` as a 2-form matrix.
    pub fn theta(&self, k: usize, l: usize) -> DMatrix<f64> {
        let d = self.dim_m();
        DMatrix::from_fn(d, d, |a, b| self.values[a][b].coeff(k, l))
    }
}

/// `Ω(X,Y) = [Λ(X),Λ(Y)] − aux([X,Y]_𝔥) − Λ([X,Y]_𝔪)`.
pub fn aux_curvature(model: &ReductiveModel, lambda_aux: &[SpinAlgebraElement]) -> Result<AuxCurvature> {
    brackets_or_unsupported(model, "auxiliary curvature")?;
    let d = model.dim_m();
    if lambda_aux.len() != d || lambda_aux.iter().any(|x| x.n() != model.r()) {
        return Err(Error::DimensionMismatch("auxiliary Nomizu map has the wrong shape".into()));
    }
    let mut values = vec![vec![SpinAlgebraElement::zero(model.r()); d]; d];
    for i in 0..d {
        for j in (i + 1)..d {
            let (mc, hc) = model.m_bracket(i, j).expect("brackets present");
            let mut w = lambda_aux[i].bracket(&lambda_aux[j])?;
            w = w.add(&model.aux_action(hc.as_slice())?.scale(-1.0))?;
            for (k, lk) in lambda_aux.iter().enumerate() {
                if mc[k] != 0.0 {
                    w = w.add(&lk.scale(-mc[k]))?;
                }
            }
            values[j][i] = w.scale(-1.0);
            values[i][j] = w;
        }
    }
    Ok(AuxCurvature { values })
}

/// Ricci endomorphism from the Levi-Civita curvature
/// `R(X,Y) = [Λ(X),Λ(Y)] − Λ([X,Y]_𝔪) − ad([X,Y]_𝔥)`, contracted as
/// `Ric(Z) = Σ_i R(Z,e_i)e_i`.
pub fn ricci_direct(model: &ReductiveModel) -> Result<DMatrix<f64>> {
    brackets_or_unsupported(model, "ricci_direct")?;
    let d = model.dim_m();
    let lc = levi_civita_nomizu(model)?;
    let lam: Vec<DMatrix<f64>> = lc.tangent.iter().map(|x| x.to_skew_matrix()).collect();
    let mut ric = DMatrix::zeros(d, d);
    for z in 0..d {
        for i in 0..d {
            let (mc, hc) = model.m_bracket(z, i).expect("brackets present");
            let mut rm = &lam[z] * &lam[i] - &lam[i] * &lam[z];
            for k in 0..d {
                if mc[k] != 0.0 {
                    rm -= &lam[k] * mc[k];
                }
            }
            rm -= model.isotropy_so(hc.as_slice())?.to_skew_matrix();
            // R(f_z, f_i) f_i is column i.
            for row in 0..d {
                ric[(row, z)] += rm[(row, i)];
            }
        }
    }
    if (&ric - ric.transpose()).amax() > 1e-9 {
        return Err(Error::Verification("Ricci endomorphism is not symmetric".into()));
    }
    Ok(ric)
}

/// `Ric = (1/‖ψ‖²) Σ_{k<l} Θ̂_{kl} ∘ η̂_{kl}`.
pub fn ricci_from_spinor(model: &ReductiveModel, psi: &TwistedSpinor, omega: &AuxCurvature) -> Result<DMatrix<f64>> {
    let norm_sq = psi.norm().powi(2);
    if norm_sq == 0.0 {
        return Err(Error::InvalidInput("zero spinor".into()));
    }
    let eta = eta_forms(model, psi)?;
    let d = model.dim_m();
    let mut ric = DMatrix::zeros(d, d);
    for (&(k, l), form) in eta.pairs().iter().zip(eta.forms()) {
        let theta_hat = omega.theta(k, l).transpose();
        let eta_hat = form.transpose();
        ric += theta_hat * eta_hat;
    }
    Ok(ric / norm_sq)
}

/// Einstein constant when `Ric` is a multiple of the identity.
pub fn einstein_constant(ric: &DMatrix<f64>) -> Option<f64> {
    let d = ric.nrows();
    if d == 0 {
        return None;
    }
    let c = ric.trace() / d as f64;
    let dev = (ric - DMatrix::identity(d, d) * c).amax();
    if dev <= 1e-8 * c.abs().max(f64::MIN_POSITIVE) {
        Some(c)
    } else {
        None
    }
}
