//! Reductive models `G/H` for the four projective spaces.
//!
//! Each model stores bases of `𝔥` and `𝔪`, the metric weights that make the
//! `𝔪` basis orthonormal, the isotropy and auxiliary actions of every `𝔥`
//! basis element, and the bracket tables needed by the connection code.
//!
//! Matrix models (both CP^n presentations and HP^n) live inside quaternionic
//! `(n+1)×(n+1)` matrices. OP² has no matrix model of `𝔣₄`; its `𝔥 = 𝔰𝔭𝔦𝔫(9)`
//! acts on `𝔪 = ℝ¹⁶` through the fixed matrices `σ(e₀·e_i)`.

use crate::clifford::{twisted_operator, SpinAlgebraElement, TwistShape};
use crate::numlin::{b0, joint_kernel, qe, ElemKind, QuatMatrix, SparseOperator, Tolerance, Unit};
use crate::{Error, Result, C64};
use nalgebra::{DMatrix, DVector};
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SpaceId {
    CpnHermitian,
    CpnSymplectic,
    Hpn,
    Op2,
}

impl SpaceId {
    pub fn as_str(self) -> &'static str {
        match self {
            SpaceId::CpnHermitian => "cpn-hermitian",
            SpaceId::CpnSymplectic => "cpn-symplectic",
            SpaceId::Hpn => "hpn",
            SpaceId::Op2 => "op2",
        }
    }
}

impl fmt::Display for SpaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SpaceId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cpn-hermitian" => Ok(SpaceId::CpnHermitian),
            "cpn-symplectic" => Ok(SpaceId::CpnSymplectic),
            "hpn" => Ok(SpaceId::Hpn),
            "op2" => Ok(SpaceId::Op2),
            other => Err(Error::InvalidInput(format!("unknown space '{other}'"))),
        }
    }
}

/// Metric parameters: `g = a·B₀` (with the extra factor `t` on the vertical
/// part of the symplectic model).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricParams {
    pub a: f64,
    pub t: f64,
}

impl Default for MetricParams {
    fn default() -> Self {
        MetricParams { a: 0.5, t: 1.0 }
    }
}

impl MetricParams {
    pub fn new(a: f64, t: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite() && t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidInput(format!("metric parameters must be positive, got a = {a}, t = {t}")));
        }
        Ok(MetricParams { a, t })
    }
}

/// Choice of auxiliary homomorphism `H → SO(r)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AuxParam {
    /// `φ_s` on the `U(1)` factor (CP cases).
    Charge(i64),
    /// Trivial homomorphism.
    Trivial,
    /// `φ₁` (HP^n) or `λ₉` (OP²).
    Nontrivial,
}

/// The eight matrices `σ(e₀·e_i)`, `i = 1..8`, as lists of `c·E^{(16)}_{p,q}`.
const OP2_GENERATORS: [[(f64, usize, usize); 8]; 8] = [
    [(-1.0, 1, 5), (1.0, 2, 6), (1.0, 3, 7), (-1.0, 4, 8), (1.0, 9, 13), (-1.0, 10, 14), (-1.0, 11, 15), (1.0, 12, 16)],
    [(-1.0, 1, 13), (1.0, 2, 14), (1.0, 3, 15), (-1.0, 4, 16), (1.0, 5, 9), (-1.0, 6, 10), (-1.0, 7, 11), (1.0, 8, 12)],
    [(-1.0, 1, 7), (-1.0, 2, 8), (-1.0, 3, 5), (-1.0, 4, 6), (-1.0, 9, 15), (-1.0, 10, 16), (-1.0, 11, 13), (-1.0, 12, 14)],
    [(1.0, 1, 6), (1.0, 2, 5), (-1.0, 3, 8), (-1.0, 4, 7), (1.0, 9, 14), (1.0, 10, 13), (-1.0, 11, 16), (-1.0, 12, 15)],
    [(-1.0, 1, 4), (1.0, 2, 3), (1.0, 5, 8), (-1.0, 6, 7), (-1.0, 9, 12), (1.0, 10, 11), (1.0, 13, 16), (-1.0, 14, 15)],
    [(-1.0, 1, 8), (1.0, 2, 7), (-1.0, 3, 6), (1.0, 4, 5), (-1.0, 9, 16), (1.0, 10, 15), (-1.0, 11, 14), (1.0, 12, 13)],
    [(-1.0, 1, 2), (1.0, 3, 4), (-1.0, 5, 6), (1.0, 7, 8), (-1.0, 9, 10), (1.0, 11, 12), (-1.0, 13, 14), (1.0, 15, 16)],
    [(-1.0, 1, 3), (-1.0, 2, 4), (-1.0, 5, 7), (-1.0, 6, 8), (-1.0, 9, 11), (-1.0, 10, 12), (-1.0, 13, 15), (-1.0, 14, 16)],
];

/// `σ(e₀·e_i)` as a real 16×16 matrix.
pub fn op2_generator(i: usize) -> Result<DMatrix<f64>> {
    if !(1..=8).contains(&i) {
        return Err(Error::IndexOutOfRange(format!("σ(e₀·e_{i})")));
    }
    let mut m = DMatrix::zeros(16, 16);
    for &(c, p, q) in &OP2_GENERATORS[i - 1] {
        m[(p - 1, q - 1)] -= c;
        m[(q - 1, p - 1)] += c;
    }
    Ok(m)
}

/// `σ(e_a·e_b)` for Clifford labels `0 ≤ a, b ≤ 8`, via
/// `σ(e_a·e_b) = σ(e₀·e_a)·σ(e₀·e_b)` when both are nonzero.
pub fn op2_sigma(a: usize, b: usize) -> Result<DMatrix<f64>> {
    if a > 8 || b > 8 {
        return Err(Error::IndexOutOfRange(format!("σ(e_{a}·e_{b})")));
    }
    Ok(match (a, b) {
        _ if a == b => -DMatrix::identity(16, 16),
        (0, b) => op2_generator(b)?,
        (a, 0) => -op2_generator(a)?,
        (a, b) => op2_generator(a)? * op2_generator(b)?,
    })
}

/// Pairs `(a, b)`, `a < b`, labelling the `𝔰𝔭𝔦𝔫(9)` basis `e_a·e_b`.
pub fn op2_pairs() -> Vec<(usize, usize)> {
    (0..9).flat_map(|a| ((a + 1)..9).map(move |b| (a, b))).collect()
}

/// Auxiliary position of the abstract label `a` under `λ₉`: the spinor
/// pairs `(e₀,e₁),…,(e₆,e₇)` go to the `y`-pairs `(ê₁,ê₂),…,(ê₇,ê₈)` of
/// `Σ₉` and `e₈` goes to `ê₀`.
pub fn op2_aux_position(a: usize) -> usize {
    if a <= 7 {
        a + 1
    } else {
        0
    }
}

#[derive(Clone, Debug)]
struct MatrixData {
    h_basis: Vec<QuatMatrix>,
    m_basis: Vec<QuatMatrix>,
    h_gram_inv: DMatrix<f64>,
    /// Loop generator of `π₁(H)` (CP cases).
    loop_generator: Option<QuatMatrix>,
}

/// Homogeneous model with its isotropy and auxiliary data.
#[derive(Clone, Debug)]
pub struct ReductiveModel {
    space: SpaceId,
    n: usize,
    params: MetricParams,
    aux_param: AuxParam,
    r: usize,
    m_twists: usize,
    h_labels: Vec<String>,
    m_labels: Vec<String>,
    m_weights: Vec<f64>,
    iso: Vec<SpinAlgebraElement>,
    aux: Vec<SpinAlgebraElement>,
    h_struct: Vec<Vec<DVector<f64>>>,
    mm: Option<Vec<Vec<(DVector<f64>, DVector<f64>)>>>,
    matrices: Option<MatrixData>,
}

/// Natural rank of the auxiliary group for a space and homomorphism.
fn natural_r(space: SpaceId, aux: AuxParam) -> usize {
    match (space, aux) {
        (_, AuxParam::Trivial) => 1,
        (SpaceId::CpnHermitian | SpaceId::CpnSymplectic, _) => 2,
        (SpaceId::Hpn, _) => 3,
        (SpaceId::Op2, _) => 9,
    }
}

fn default_m(space: SpaceId, n: usize, aux: AuxParam) -> usize {
    match (space, aux) {
        (SpaceId::Hpn, AuxParam::Nontrivial) if n % 2 == 1 => n,
        (SpaceId::Op2, AuxParam::Nontrivial) => 3,
        _ => 1,
    }
}

/// Builds a model with its natural `r` and twisting number.
///
/// Charged CP models are rejected when the charge fails the lifting parity.
pub fn build_model(space: SpaceId, n: usize, params: MetricParams, aux_param: AuxParam) -> Result<ReductiveModel> {
    let model = build_unchecked(space, n, params, aux_param)?;
    if matches!(space, SpaceId::CpnHermitian | SpaceId::CpnSymplectic) {
        let s = match aux_param {
            AuxParam::Charge(s) => s,
            AuxParam::Trivial => 0,
            AuxParam::Nontrivial => {
                return Err(Error::InvalidInput("CP models take a charge s, not 'nontrivial'".into()));
            }
        };
        if !model.lifts()? {
            return Err(Error::InvalidInput(format!("s = {s} fails the lifting parity for {space} with n = {n}")));
        }
    }
    Ok(model)
}

fn build_unchecked(space: SpaceId, n: usize, params: MetricParams, aux_param: AuxParam) -> Result<ReductiveModel> {
    MetricParams::new(params.a, params.t)?;
    match space {
        SpaceId::CpnHermitian | SpaceId::CpnSymplectic | SpaceId::Hpn => {
            if n == 0 || (space == SpaceId::Hpn && n < 2) {
                return Err(Error::InvalidInput(format!("n = {n} is not admissible for {space}")));
            }
            if matches!(space, SpaceId::CpnHermitian | SpaceId::CpnSymplectic) && aux_param == AuxParam::Nontrivial {
                return Err(Error::InvalidInput("CP models take a charge s or 'trivial'".into()));
            }
            if space == SpaceId::Hpn && matches!(aux_param, AuxParam::Charge(_)) {
                return Err(Error::InvalidInput("HP^n takes 'trivial' or 'nontrivial'".into()));
            }
            build_matrix_model(space, n, params, aux_param)
        }
        SpaceId::Op2 => {
            if matches!(aux_param, AuxParam::Charge(_)) {
                return Err(Error::InvalidInput("OP² takes 'trivial' or 'nontrivial'".into()));
            }
            build_op2(params, aux_param)
        }
    }
}

fn sp_block(size: usize, from: usize, out: &mut Vec<(QuatMatrix, String)>) {
    for p in from..=size {
        for (u, name) in [(Unit::I, "i"), (Unit::J, "j"), (Unit::K, "k")] {
            out.push((qe(u, ElemKind::F, size, p, p), format!("{name}F{p}{p}")));
        }
    }
    for r in from..=size {
        for s in (r + 1)..=size {
            for (u, name) in [(Unit::I, "i"), (Unit::J, "j"), (Unit::K, "k")] {
                out.push((qe(u, ElemKind::F, size, r, s), format!("{name}F{r}{s}")));
            }
            out.push((qe(Unit::One, ElemKind::E, size, r, s), format!("E{r}{s}")));
        }
    }
}

fn build_matrix_model(space: SpaceId, n: usize, params: MetricParams, aux_param: AuxParam) -> Result<ReductiveModel> {
    let size = n + 1;
    let a = params.a;
    let f = |u, kind, i, j| qe(u, kind, size, i, j);
    let mut h: Vec<(QuatMatrix, String)> = Vec::new();
    let mut m: Vec<(QuatMatrix, String, f64)> = Vec::new();
    let mut loop_generator = None;
    match space {
        SpaceId::CpnHermitian => {
            let mut xi = f(Unit::I, ElemKind::F, 1, 1).scale(-(n as f64));
            for l in 2..=size {
                xi = xi.add(&f(Unit::I, ElemKind::F, l, l))?;
            }
            h.push((xi, "ξ".into()));
            for p in 2..=size {
                for q in (p + 1)..=size {
                    h.push((f(Unit::I, ElemKind::F, p, q), format!("iF{p}{q}")));
                    h.push((f(Unit::One, ElemKind::E, p, q), format!("E{p}{q}")));
                }
            }
            for r in 2..size {
                let d = f(Unit::I, ElemKind::F, r, r).sub(&f(Unit::I, ElemKind::F, r + 1, r + 1))?;
                h.push((d, format!("i(F{r}{r}−F{0}{0})", r + 1)));
            }
            let c = 1.0 / (2.0 * a).sqrt();
            for p in 1..=n {
                m.push((f(Unit::I, ElemKind::F, 1, p + 1).scale(c), format!("e{}", 2 * p - 1), a));
                m.push((f(Unit::One, ElemKind::E, 1, p + 1).scale(c), format!("e{}", 2 * p), a));
            }
            loop_generator = Some(f(Unit::I, ElemKind::F, 1, 1).scale(-1.0).add(&f(Unit::I, ElemKind::F, size, size))?);
        }
        SpaceId::CpnSymplectic | SpaceId::Hpn => {
            h.push((f(Unit::I, ElemKind::F, 1, 1), "ξ1".into()));
            if space == SpaceId::Hpn {
                h.push((f(Unit::K, ElemKind::F, 1, 1).scale(-1.0), "ξ2".into()));
                h.push((f(Unit::J, ElemKind::F, 1, 1), "ξ3".into()));
            }
            sp_block(size, 2, &mut h);
            let t = params.t;
            if space == SpaceId::CpnSymplectic {
                let cv = 1.0 / (2.0 * t * a).sqrt();
                m.push((f(Unit::K, ElemKind::F, 1, 1).scale(-cv), "ξ2".into(), 2.0 * a * t));
                m.push((f(Unit::J, ElemKind::F, 1, 1).scale(cv), "ξ3".into(), 2.0 * a * t));
                loop_generator = Some(f(Unit::I, ElemKind::F, 1, 1));
            }
            let c = 1.0 / (2.0 * a).sqrt();
            for p in 1..=n {
                let parts = [
                    f(Unit::J, ElemKind::F, 1, p + 1),
                    f(Unit::K, ElemKind::F, 1, p + 1),
                    f(Unit::I, ElemKind::F, 1, p + 1),
                    f(Unit::One, ElemKind::E, 1, p + 1),
                ];
                for (eps, q) in parts.into_iter().enumerate() {
                    m.push((q.scale(c), format!("e{}", 4 * p + eps), a));
                }
            }
        }
        SpaceId::Op2 => unreachable!("OP² has no matrix model"),
    }

    let dh = h.len();
    let mut gram = DMatrix::zeros(dh, dh);
    for i in 0..dh {
        for j in 0..dh {
            gram[(i, j)] = b0(&h[i].0, &h[j].0)?;
        }
    }
    let h_gram_inv = gram
        .try_inverse()
        .ok_or_else(|| Error::Verification("𝔥 basis is degenerate for B₀".into()))?;
    let data = MatrixData {
        h_basis: h.iter().map(|x| x.0.clone()).collect(),
        m_basis: m.iter().map(|x| x.0.clone()).collect(),
        h_gram_inv,
        loop_generator,
    };
    let m_weights: Vec<f64> = m.iter().map(|x| x.2).collect();
    let mut model = ReductiveModel {
        space,
        n,
        params,
        aux_param,
        r: natural_r(space, aux_param),
        m_twists: default_m(space, n, aux_param),
        h_labels: h.into_iter().map(|x| x.1).collect(),
        m_labels: m.into_iter().map(|x| x.1).collect(),
        m_weights,
        iso: Vec::new(),
        aux: Vec::new(),
        h_struct: Vec::new(),
        mm: None,
        matrices: Some(data),
    };
    model.fill_matrix_tables()?;
    model.aux = model.natural_aux()?;
    Ok(model)
}

fn build_op2(params: MetricParams, aux_param: AuxParam) -> Result<ReductiveModel> {
    let pairs = op2_pairs();
    let mut iso = Vec::with_capacity(pairs.len());
    for &(a, b) in &pairs {
        iso.push(SpinAlgebraElement::from_skew_matrix(&op2_sigma(a, b)?, 0.0)?);
    }
    // Abstract structure constants from so(9): e_a·e_b ↔ 2 e_a∧e_b.
    let abstract_el: Vec<SpinAlgebraElement> = pairs
        .iter()
        .map(|&(a, b)| SpinAlgebraElement::from_terms(9, [(a, b, 2.0)]))
        .collect::<Result<_>>()?;
    let mut h_struct = Vec::with_capacity(pairs.len());
    for x in &abstract_el {
        let mut row = Vec::with_capacity(pairs.len());
        for y in &abstract_el {
            let z = x.bracket(y)?;
            row.push(DVector::from_iterator(pairs.len(), pairs.iter().map(|&(a, b)| z.coeff(a, b) / 2.0)));
        }
        h_struct.push(row);
    }
    let mut model = ReductiveModel {
        space: SpaceId::Op2,
        n: 2,
        params,
        aux_param,
        r: natural_r(SpaceId::Op2, aux_param),
        m_twists: default_m(SpaceId::Op2, 2, aux_param),
        h_labels: pairs.iter().map(|&(a, b)| format!("e{a}e{b}")).collect(),
        m_labels: (1..=16).map(|i| format!("x{i}")).collect(),
        m_weights: vec![1.0; 16],
        iso,
        aux: Vec::new(),
        h_struct,
        mm: None,
        matrices: None,
    };
    model.aux = model.natural_aux()?;
    Ok(model)
}

impl ReductiveModel {
    pub fn space(&self) -> SpaceId {
        self.space
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn params(&self) -> MetricParams {
        self.params
    }

    pub fn aux_param(&self) -> AuxParam {
        self.aux_param
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn m_twists(&self) -> usize {
        self.m_twists
    }

    pub fn dim_m(&self) -> usize {
        self.m_weights.len()
    }

    pub fn dim_h(&self) -> usize {
        self.iso.len()
    }

    pub fn h_labels(&self) -> &[String] {
        &self.h_labels
    }

    pub fn m_labels(&self) -> &[String] {
        &self.m_labels
    }

    /// `w_i` with `g(f_i, f_j) = w_i·B₀(f_i, f_j)`.
    pub fn m_weights(&self) -> &[f64] {
        &self.m_weights
    }

    /// Quaternionic `𝔥` basis; empty for OP².
    pub fn h_basis(&self) -> &[QuatMatrix] {
        self.matrices.as_ref().map(|d| d.h_basis.as_slice()).unwrap_or(&[])
    }

    /// Orthonormal quaternionic `𝔪` basis; empty for OP².
    pub fn m_basis(&self) -> &[QuatMatrix] {
        self.matrices.as_ref().map(|d| d.m_basis.as_slice()).unwrap_or(&[])
    }

    /// `ad(h_k)|_𝔪` for every `𝔥` basis element.
    pub fn isotropy_basis(&self) -> &[SpinAlgebraElement] {
        &self.iso
    }

    /// Auxiliary images of the `𝔥` basis in `𝔰𝔬(r)`.
    pub fn aux_basis(&self) -> &[SpinAlgebraElement] {
        &self.aux
    }

    /// `[h_k, h_l]` in `𝔥` coordinates.
    pub fn h_bracket(&self, k: usize, l: usize) -> &DVector<f64> {
        &self.h_struct[k][l]
    }

    /// `[f_i, f_j]` as (`𝔪` coordinates, `𝔥` coordinates); `None` for OP².
    pub fn m_bracket(&self, i: usize, j: usize) -> Option<(&DVector<f64>, &DVector<f64>)> {
        self.mm.as_ref().map(|t| (&t[i][j].0, &t[i][j].1))
    }

    pub fn has_brackets(&self) -> bool {
        self.mm.is_some()
    }

    pub fn shape(&self) -> Result<TwistShape> {
        TwistShape::new(self.dim_m(), self.r, self.m_twists)
    }

    /// Same space and metric with a different twist. The natural auxiliary
    /// action is embedded in the lower right-hand block of `𝔰𝔬(r)`.
    pub fn with_twist(&self, r: usize, m: usize) -> Result<ReductiveModel> {
        let r0 = natural_r(self.space, self.aux_param);
        if r < r0 {
            return Err(Error::InvalidInput(format!("r = {r} is below the natural rank {r0} of this homomorphism")));
        }
        TwistShape::new(self.dim_m(), r, m)?;
        let mut out = self.clone();
        out.r = r;
        out.m_twists = m;
        out.aux = out.natural_aux()?;
        Ok(out)
    }

    fn natural_aux(&self) -> Result<Vec<SpinAlgebraElement>> {
        let r0 = natural_r(self.space, self.aux_param);
        let mut out = vec![SpinAlgebraElement::zero(r0); self.dim_h()];
        match (self.space, self.aux_param) {
            (_, AuxParam::Trivial) => {}
            (SpaceId::CpnHermitian, AuxParam::Charge(s)) => {
                out[0] = SpinAlgebraElement::from_terms(2, [(0, 1, (s * self.n as i64) as f64)])?;
            }
            (SpaceId::CpnSymplectic, AuxParam::Charge(s)) => {
                out[0] = SpinAlgebraElement::from_terms(2, [(0, 1, s as f64)])?;
            }
            (SpaceId::Hpn, AuxParam::Nontrivial) => {
                out[0] = SpinAlgebraElement::from_terms(3, [(1, 2, 2.0)])?;
                out[1] = SpinAlgebraElement::from_terms(3, [(0, 1, -2.0)])?;
                out[2] = SpinAlgebraElement::from_terms(3, [(0, 2, -2.0)])?;
            }
            (SpaceId::Op2, AuxParam::Nontrivial) => {
                for (k, (a, b)) in op2_pairs().into_iter().enumerate() {
                    out[k] = SpinAlgebraElement::from_terms(9, [(op2_aux_position(a), op2_aux_position(b), 2.0)])?;
                }
            }
            (space, aux) => {
                return Err(Error::InvalidInput(format!("auxiliary parameter {aux:?} is not defined for {space}")));
            }
        }
        out.into_iter().map(|x| x.embed_lower_right(self.r)).collect()
    }

    /// Splits a matrix into `𝔥` and `𝔪` coordinates; errors when the
    /// remainder is not negligible.
    pub fn decompose(&self, z: &QuatMatrix) -> Result<(DVector<f64>, DVector<f64>)> {
        let d = self.matrices.as_ref().ok_or_else(|| Error::Unsupported("OP² has no matrix model".into()))?;
        let rhs = DVector::from_iterator(d.h_basis.len(), d.h_basis.iter().map(|h| b0(z, h).unwrap_or(f64::NAN)));
        let hc = &d.h_gram_inv * rhs;
        let mut mc = DVector::zeros(d.m_basis.len());
        for (i, f) in d.m_basis.iter().enumerate() {
            mc[i] = self.m_weights[i] * b0(z, f)?;
        }
        let mut rest = z.clone();
        for (c, h) in hc.iter().zip(&d.h_basis) {
            rest = rest.sub(&h.scale(*c))?;
        }
        for (c, f) in mc.iter().zip(&d.m_basis) {
            rest = rest.sub(&f.scale(*c))?;
        }
        if rest.norm() > 1e-10 * (1.0 + z.norm()) {
            return Err(Error::InvalidInput(format!("matrix is not in 𝔤 (remainder {:.2e})", rest.norm())));
        }
        Ok((hc, mc))
    }

    /// `𝔥` coordinates of a matrix known to lie in `𝔥`.
    pub fn h_coords(&self, x: &QuatMatrix) -> Result<DVector<f64>> {
        let (hc, mc) = self.decompose(x)?;
        if mc.norm() > 1e-10 * (1.0 + hc.norm()) {
            return Err(Error::InvalidInput("element is not in 𝔥".into()));
        }
        Ok(hc)
    }

    fn fill_matrix_tables(&mut self) -> Result<()> {
        let d = self.matrices.clone().expect("matrix model");
        let dm = d.m_basis.len();
        let mut iso = Vec::with_capacity(d.h_basis.len());
        for x in &d.h_basis {
            let mut mat = DMatrix::zeros(dm, dm);
            for (j, f) in d.m_basis.iter().enumerate() {
                let (hc, mc) = self.decompose(&x.bracket(f)?)?;
                if hc.norm() > 1e-10 {
                    return Err(Error::Verification("[𝔥, 𝔪] leaves 𝔪".into()));
                }
                for i in 0..dm {
                    mat[(i, j)] = mc[i];
                }
            }
            iso.push(SpinAlgebraElement::from_skew_matrix(&mat, 1e-13)?);
        }
        self.iso = iso;
        let mut hs = Vec::with_capacity(d.h_basis.len());
        for x in &d.h_basis {
            let mut row = Vec::with_capacity(d.h_basis.len());
            for y in &d.h_basis {
                row.push(self.h_coords(&x.bracket(y)?)?);
            }
            hs.push(row);
        }
        self.h_struct = hs;
        let mut mm = Vec::with_capacity(dm);
        for x in &d.m_basis {
            let mut row = Vec::with_capacity(dm);
            for y in &d.m_basis {
                let (hc, mc) = self.decompose(&x.bracket(y)?)?;
                row.push((mc, hc));
            }
            mm.push(row);
        }
        self.mm = Some(mm);
        Ok(())
    }

    fn combine(els: &[SpinAlgebraElement], coeffs: &[f64], n: usize) -> Result<SpinAlgebraElement> {
        if coeffs.len() != els.len() {
            return Err(Error::DimensionMismatch(format!("{} coordinates for a {}-dimensional 𝔥", coeffs.len(), els.len())));
        }
        let mut out = SpinAlgebraElement::zero(n);
        for (c, e) in coeffs.iter().zip(els) {
            if *c != 0.0 {
                out = out.add(&e.scale(*c))?;
            }
        }
        Ok(out)
    }

    /// `ad(X)|_𝔪` in the orthonormal `𝔪` basis, for `X` given in `𝔥` coordinates.
    pub fn isotropy_so(&self, coeffs: &[f64]) -> Result<SpinAlgebraElement> {
        Self::combine(&self.iso, coeffs, self.dim_m())
    }

    /// Derivative of the auxiliary homomorphism, for `X` in `𝔥` coordinates.
    pub fn aux_action(&self, coeffs: &[f64]) -> Result<SpinAlgebraElement> {
        Self::combine(&self.aux, coeffs, self.r)
    }

    pub fn isotropy_of_matrix(&self, x: &QuatMatrix) -> Result<SpinAlgebraElement> {
        self.isotropy_so(self.h_coords(x)?.as_slice())
    }

    pub fn aux_action_of_matrix(&self, x: &QuatMatrix) -> Result<SpinAlgebraElement> {
        self.aux_action(self.h_coords(x)?.as_slice())
    }

    /// Twisted actions of every `𝔥` basis element on `Σ_n ⊗ Σ_r^{⊗m}`.
    pub fn twisted_operators(&self) -> Result<Vec<SparseOperator>> {
        let shape = self.shape()?;
        self.iso.iter().zip(&self.aux).map(|(t, a)| twisted_operator(shape, t, a)).collect()
    }

    /// Whether the isotropy and auxiliary loops have matching parity.
    fn lifts(&self) -> Result<bool> {
        let (tangent, aux) = self.loop_windings()?;
        Ok((tangent - aux).rem_euclid(2) == 0)
    }

    /// Winding numbers of the isotropy and auxiliary images of the `π₁(H)`
    /// generator loop, read off from integer rotation speeds.
    pub fn loop_windings(&self) -> Result<(i64, i64)> {
        let z = self
            .matrices
            .as_ref()
            .and_then(|d| d.loop_generator.clone())
            .ok_or_else(|| Error::Unsupported(format!("lifting parity is not modelled for {}", self.space)))?;
        if self.space == SpaceId::CpnHermitian && self.n == 1 {
            return Err(Error::Unsupported("the case r = dim M = 2 (CP¹) is not modelled".into()));
        }
        let c = self.h_coords(&z)?;
        let tangent = total_speed(&self.isotropy_so(c.as_slice())?.to_skew_matrix())?;
        let aux = total_speed(&self.aux_action(c.as_slice())?.to_skew_matrix())?;
        Ok((tangent, aux))
    }

    /// Real dimension of the commutant of the isotropy representation.
    pub fn isotropy_commutant_dim(&self, tol: &Tolerance) -> Result<usize> {
        self.restricted_commutant_dim(0.., tol)
    }

    /// Commutant dimension for the `𝔥` basis elements in `range` only.
    pub fn restricted_commutant_dim<R>(&self, range: R, tol: &Tolerance) -> Result<usize>
    where
        R: std::slice::SliceIndex<[SpinAlgebraElement], Output = [SpinAlgebraElement]>,
    {
        let d = self.dim_m();
        let gens = self.iso.get(range).ok_or_else(|| Error::IndexOutOfRange("𝔥 basis range".into()))?;
        if gens.is_empty() {
            return Ok(d * d);
        }
        let mut ops = Vec::with_capacity(gens.len());
        for x in gens {
            let m = x.to_skew_matrix();
            let op = SparseOperator::from_columns(d * d, d * d, |col| {
                let (a, b) = (col % d, col / d);
                let mut out = Vec::new();
                for j in 0..d {
                    if m[(b, j)] != 0.0 {
                        out.push((a + d * j, C64::new(m[(b, j)], 0.0)));
                    }
                }
                for i in 0..d {
                    if m[(i, a)] != 0.0 {
                        out.push((i + d * b, C64::new(-m[(i, a)], 0.0)));
                    }
                }
                out
            })?;
            ops.push(op);
        }
        Ok(joint_kernel(&ops, tol)?.len())
    }
}

/// Sum of the rotation speeds of a skew matrix, which must all be integers.
fn total_speed(m: &DMatrix<f64>) -> Result<i64> {
    if m.nrows() < 2 {
        return Ok(0);
    }
    let sq = m.transpose() * m;
    let eig = nalgebra::SymmetricEigen::new(sq).eigenvalues;
    let mut speeds: Vec<f64> = eig.iter().map(|&l| l.max(0.0).sqrt()).collect();
    speeds.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    let mut total = 0i64;
    for pair in speeds.chunks(2) {
        let s = pair[0];
        if (s - s.round()).abs() > 1e-8 {
            return Err(Error::Verification(format!("non-integer rotation speed {s}")));
        }
        if pair.len() == 2 {
            total += s.round() as i64;
        }
    }
    Ok(total)
}

/// Lifting parity for the CP cases: true iff `φ_s` admits a spin^C lift.
pub fn lift_parity(space: SpaceId, n: usize, s: i64) -> Result<bool> {
    match space {
        SpaceId::CpnHermitian | SpaceId::CpnSymplectic => {
            build_unchecked(space, n, MetricParams::default(), AuxParam::Charge(s))?.lifts()
        }
        _ => Err(Error::Unsupported(format!("lifting parity is only modelled for CP spaces, not {space}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn op2_generators_are_clifford() {
        for i in 1..=8 {
            let g = op2_generator(i).unwrap();
            assert!((&g * &g + DMatrix::<f64>::identity(16, 16)).norm() < 1e-12);
            for j in (i + 1)..=8 {
                let h = op2_generator(j).unwrap();
                assert!((&g * &h + &h * &g).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn hermitian_xi_isotropy() {
        let model = build_model(SpaceId::CpnHermitian, 2, MetricParams::default(), AuxParam::Charge(3)).unwrap();
        let xi = &model.isotropy_basis()[0];
        for p in 0..2 {
            assert!((xi.coeff(2 * p + 1, 2 * p) - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn parity_rejects_wrong_charge() {
        assert!(build_model(SpaceId::CpnHermitian, 3, MetricParams::default(), AuxParam::Charge(3)).is_err());
        assert!(lift_parity(SpaceId::CpnHermitian, 1, 2).is_err());
    }
}
