//! Exterior-forms model of the complex spin representation.
//!
//! For `n = 2k` or `n = 2k+1`, `Σ_n` is spanned by the forms
//! `y_{j1}∧⋯∧y_{jl}`, encoded as bit masks (bit `j−1` ↔ `y_j`). Generators act by
//!
//! ```text
//! e_{2j−1}·η = i(x_j⌟η + y_j∧η),   e_{2j}·η = y_j∧η − x_j⌟η,
//! e_0·η = i·η_even − i·η_odd       (odd n only)
//! ```
//!
//! so each generator sends a basis form to a single basis form times one of
//! `±1, ±i`. Generators carry *labels*: `1..=n` for even `n`, `0..n` for odd
//! `n`. Algebra elements of `so(n)` are indexed by *positions* `0..n` in the
//! orthonormal basis; position `p` is label `p + 1` when `n` is even and label
//! `p` when `n` is odd.
//!
//! Hermitian products are conjugate-linear in the second argument throughout.

use crate::numlin::{SparseOperator, SparseVector};
use crate::{Error, Result, C64};
use nalgebra::DMatrix;
use std::collections::BTreeMap;

const I: C64 = C64::new(0.0, 1.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Bit mask of a basis form `y_{j1}∧⋯∧y_{jl}`.
pub type SpinorIndex = u32;

/// Number of `y` variables, `⌊n/2⌋`.
pub fn half(n: usize) -> usize {
    n / 2
}

/// Clifford label of the basis vector at position `p`.
pub fn label_of(n: usize, p: usize) -> usize {
    p + 1 - n % 2
}

/// Position of the generator with Clifford label `label`.
pub fn position_of(n: usize, label: usize) -> usize {
    label + n % 2 - 1
}

fn check_label(n: usize, label: usize) -> Result<()> {
    let ok = if n % 2 == 0 { (1..=n).contains(&label) } else { label < n };
    if ok {
        Ok(())
    } else if n % 2 == 0 && label == 0 {
        Err(Error::InvalidInput(format!("e_0 does not exist for even n = {n}")))
    } else {
        Err(Error::IndexOutOfRange(format!("generator e_{label} for n = {n}")))
    }
}

/// `(−1)^{#set bits below bit j−1}`.
fn koszul(mask: SpinorIndex, j: usize) -> f64 {
    if (mask & ((1u32 << (j - 1)) - 1)).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Action of the generator with the given label on one basis form.
#[inline]
pub fn gen_on_mask(label: usize, mask: SpinorIndex) -> (SpinorIndex, C64) {
    if label == 0 {
        let s = if mask.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        return (mask, I * s);
    }
    let j = label.div_ceil(2);
    let bit = 1u32 << (j - 1);
    let sign = koszul(mask, j);
    let present = mask & bit != 0;
    let out = mask ^ bit;
    if label % 2 == 1 {
        (out, I * sign)
    } else if present {
        (out, C64::new(-sign, 0.0))
    } else {
        (out, C64::new(sign, 0.0))
    }
}

/// Sign of `y_A ∧ y_B` relative to `y_{A∪B}`; zero when the masks overlap.
pub fn wedge_sign(a: SpinorIndex, b: SpinorIndex) -> f64 {
    if a & b != 0 {
        return 0.0;
    }
    // Count pairs (x ∈ A, y ∈ B) with x > y.
    let mut inversions = 0u32;
    let mut bb = b;
    while bb != 0 {
        let low = bb.trailing_zeros();
        inversions += (a >> (low + 1)).count_ones();
        bb &= bb - 1;
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Element `Σ_{i<j} a_ij e_i∧e_j` of `so(n)`, indices are positions.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinAlgebraElement {
    n: usize,
    terms: BTreeMap<(usize, usize), f64>,
}

impl SpinAlgebraElement {
    pub fn zero(n: usize) -> Self {
        SpinAlgebraElement { n, terms: BTreeMap::new() }
    }

    /// Accumulates `c·e_i∧e_j`; reversed pairs pick up a sign.
    pub fn from_terms<T>(n: usize, terms: T) -> Result<Self>
    where
        T: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut out = SpinAlgebraElement::zero(n);
        for (i, j, c) in terms {
            out.add_term(i, j, c)?;
        }
        Ok(out)
    }

    pub fn add_term(&mut self, i: usize, j: usize, c: f64) -> Result<()> {
        if i >= self.n || j >= self.n {
            return Err(Error::IndexOutOfRange(format!("e_{i}∧e_{j} in so({})", self.n)));
        }
        if i == j {
            return Err(Error::InvalidInput(format!("e_{i}∧e_{i} is zero")));
        }
        let (key, c) = if i < j { ((i, j), c) } else { ((j, i), -c) };
        let e = self.terms.entry(key).or_insert(0.0);
        *e += c;
        if *e == 0.0 {
            self.terms.remove(&key);
        }
        Ok(())
    }

    /// Reads a skew matrix `M` acting by `f_i ↦ Σ_j M[j][i] f_j`, so that
    /// `a_ij = M[j][i]` for `i < j`. Entries below `drop` are ignored.
    pub fn from_skew_matrix(m: &DMatrix<f64>, drop: f64) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n {
            return Err(Error::DimensionMismatch("skew matrix must be square".into()));
        }
        let mut out = SpinAlgebraElement::zero(n);
        for i in 0..n {
            for j in (i + 1)..n {
                if (m[(j, i)] + m[(i, j)]).abs() > 1e-9 * (1.0 + m[(j, i)].abs()) {
                    return Err(Error::InvalidInput(format!("matrix not skew at ({i},{j})")));
                }
                if m[(j, i)].abs() > drop {
                    out.terms.insert((i, j), m[(j, i)]);
                }
            }
        }
        Ok(out)
    }

    pub fn to_skew_matrix(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for (&(i, j), &a) in &self.terms {
            m[(j, i)] += a;
            m[(i, j)] -= a;
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.terms.iter().map(|(&(i, j), &a)| (i, j, a))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        if i < j {
            self.terms.get(&(i, j)).copied().unwrap_or(0.0)
        } else if i > j {
            -self.terms.get(&(j, i)).copied().unwrap_or(0.0)
        } else {
            0.0
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        if s == 0.0 {
            return SpinAlgebraElement::zero(self.n);
        }
        SpinAlgebraElement { n: self.n, terms: self.terms.iter().map(|(&k, &a)| (k, a * s)).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(format!("so({}) + so({})", self.n, other.n)));
        }
        let mut out = self.clone();
        for (i, j, a) in other.terms() {
            out.add_term(i, j, a)?;
        }
        Ok(out)
    }

    /// Matrix commutator.
    pub fn bracket(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(format!("[so({}), so({})]", self.n, other.n)));
        }
        let (a, b) = (self.to_skew_matrix(), other.to_skew_matrix());
        SpinAlgebraElement::from_skew_matrix(&(&a * &b - &b * &a), 1e-14)
    }

    /// Embeds into `so(r)` as the lower right-hand block.
    pub fn embed_lower_right(&self, r: usize) -> Result<Self> {
        if r < self.n {
            return Err(Error::InvalidInput(format!("cannot embed so({}) into so({r})", self.n)));
        }
        let off = r - self.n;
        SpinAlgebraElement::from_terms(r, self.terms().map(|(i, j, a)| (i + off, j + off, a)))
    }

    /// Spin lift as a list of `(label_i, label_j, a_ij/2)`.
    fn lift_terms(&self) -> Vec<(usize, usize, f64)> {
        self.terms().map(|(i, j, a)| (label_of(self.n, i), label_of(self.n, j), 0.5 * a)).collect()
    }

    /// Matrix of the spin lift on `Σ_n` in the form basis.
    pub fn lift_operator(&self) -> SparseOperator {
        let dim = 1usize << half(self.n);
        let terms = self.lift_terms();
        SparseOperator::from_columns(dim, dim, |c| lift_on_mask(&terms, c as SpinorIndex))
            .expect("lift stays inside Σ_n")
    }
}

fn lift_on_mask(terms: &[(usize, usize, f64)], mask: SpinorIndex) -> Vec<(usize, C64)> {
    terms
        .iter()
        .map(|&(li, lj, c)| {
            let (m1, z1) = gen_on_mask(lj, mask);
            let (m2, z2) = gen_on_mask(li, m1);
            (m2 as usize, z1 * z2 * c)
        })
        .collect()
}

/// Spinor in `Σ_n`, stored by form mask.
#[derive(Clone, Debug, PartialEq)]
pub struct Spinor {
    n: usize,
    coeffs: BTreeMap<SpinorIndex, C64>,
}

impl Spinor {
    pub fn zero(n: usize) -> Self {
        Spinor { n, coeffs: BTreeMap::new() }
    }

    /// The basis form with the given mask.
    pub fn basis(n: usize, mask: SpinorIndex) -> Result<Self> {
        if half(n) < 32 && (mask >> half(n)) != 0 {
            return Err(Error::IndexOutOfRange(format!("mask {mask:#b} for n = {n}")));
        }
        let mut s = Spinor::zero(n);
        s.coeffs.insert(mask, ONE);
        Ok(s)
    }

    /// `y_{j1}∧⋯∧y_{jl}` for 1-based indices in the given order.
    pub fn y(n: usize, js: &[usize]) -> Result<Self> {
        let mut out = Spinor::basis(n, 0)?;
        for &j in js {
            if j == 0 || j > half(n) {
                return Err(Error::IndexOutOfRange(format!("y_{j} for n = {n}")));
            }
            out = out.wedge(&Spinor::basis(n, 1 << (j - 1))?)?;
        }
        Ok(out)
    }

    pub fn from_map(n: usize, coeffs: BTreeMap<SpinorIndex, C64>) -> Self {
        let mut s = Spinor { n, coeffs };
        s.coeffs.retain(|_, z| z.norm() > 0.0);
        s
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &BTreeMap<SpinorIndex, C64> {
        &self.coeffs
    }

    pub fn get(&self, mask: SpinorIndex) -> C64 {
        self.coeffs.get(&mask).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn push(&mut self, mask: SpinorIndex, z: C64) {
        let e = self.coeffs.entry(mask).or_insert(C64::new(0.0, 0.0));
        *e += z;
        if e.norm() == 0.0 {
            self.coeffs.remove(&mask);
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        Spinor::from_map(self.n, self.coeffs.iter().map(|(&k, &z)| (k, z * c)).collect())
    }

    pub fn add(&self, other: &Spinor) -> Result<Spinor> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(format!("Σ_{} + Σ_{}", self.n, other.n)));
        }
        let mut out = self.clone();
        for (&k, &z) in &other.coeffs {
            out.push(k, z);
        }
        Ok(out)
    }

    /// Exterior product of forms.
    pub fn wedge(&self, other: &Spinor) -> Result<Spinor> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(format!("Σ_{} ∧ Σ_{}", self.n, other.n)));
        }
        let mut out = Spinor::zero(self.n);
        for (&a, &za) in &self.coeffs {
            for (&b, &zb) in &other.coeffs {
                let s = wedge_sign(a, b);
                if s != 0.0 {
                    out.push(a | b, za * zb * s);
                }
            }
        }
        Ok(out)
    }

    pub fn norm_sq(&self) -> f64 {
        self.coeffs.values().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }
}

/// Clifford multiplication by the generator `e_label`.
pub fn clifford_apply(label: usize, psi: &Spinor) -> Result<Spinor> {
    check_label(psi.n, label)?;
    let mut out = Spinor::zero(psi.n);
    for (&mask, &z) in &psi.coeffs {
        let (m, c) = gen_on_mask(label, mask);
        out.push(m, c * z);
    }
    Ok(out)
}

/// Applies `Σ_{i<j} (a_ij/2)·e_i·e_j`.
pub fn spin_lift_apply(a: &SpinAlgebraElement, psi: &Spinor) -> Result<Spinor> {
    if a.n != psi.n {
        return Err(Error::DimensionMismatch(format!("so({}) acting on Σ_{}", a.n, psi.n)));
    }
    let terms = a.lift_terms();
    let mut out = Spinor::zero(psi.n);
    for (&mask, &z) in &psi.coeffs {
        for (m, c) in lift_on_mask(&terms, mask) {
            out.push(m as SpinorIndex, c * z);
        }
    }
    Ok(out)
}

/// Hermitian product, conjugate-linear in the second argument.
pub fn herm(phi: &Spinor, psi: &Spinor) -> Result<C64> {
    if phi.n != psi.n {
        return Err(Error::DimensionMismatch(format!("⟨Σ_{}, Σ_{}⟩", phi.n, psi.n)));
    }
    Ok(phi.coeffs.iter().map(|(k, &z)| z * psi.get(*k).conj()).sum())
}

/// Shape of a twisted module `Σ_n ⊗ Σ_r^{⊗m}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TwistShape {
    pub n: usize,
    pub r: usize,
    pub m: usize,
}

impl TwistShape {
    pub fn new(n: usize, r: usize, m: usize) -> Result<Self> {
        if m % 2 == 0 {
            return Err(Error::InvalidInput(format!("twisting number m = {m} must be odd")));
        }
        if n == 0 || r == 0 {
            return Err(Error::InvalidInput("n and r must be positive".into()));
        }
        let bits = half(n) + m * half(r);
        if bits > 40 {
            return Err(Error::InvalidInput(format!("module of dimension 2^{bits} is too large")));
        }
        Ok(TwistShape { n, r, m })
    }

    pub fn tangent_bits(&self) -> usize {
        half(self.n)
    }

    pub fn aux_bits(&self) -> usize {
        half(self.r)
    }

    pub fn dim(&self) -> usize {
        1usize << (self.tangent_bits() + self.m * self.aux_bits())
    }

    pub fn pack(&self, tangent: SpinorIndex, aux: &[SpinorIndex]) -> usize {
        let mut idx = tangent as usize;
        for (j, &a) in aux.iter().enumerate() {
            idx |= (a as usize) << (self.tangent_bits() + j * self.aux_bits());
        }
        idx
    }

    pub fn tangent_mask(&self, idx: usize) -> SpinorIndex {
        (idx & ((1usize << self.tangent_bits()) - 1)) as SpinorIndex
    }

    pub fn aux_mask(&self, idx: usize, j: usize) -> SpinorIndex {
        let kr = self.aux_bits();
        ((idx >> (self.tangent_bits() + j * kr)) & ((1usize << kr) - 1)) as SpinorIndex
    }

    pub fn unpack(&self, idx: usize) -> (SpinorIndex, Vec<SpinorIndex>) {
        (self.tangent_mask(idx), (0..self.m).map(|j| self.aux_mask(idx, j)).collect())
    }

    fn with_tangent(&self, idx: usize, mask: SpinorIndex) -> usize {
        (idx & !((1usize << self.tangent_bits()) - 1)) | mask as usize
    }

    fn with_aux(&self, idx: usize, j: usize, mask: SpinorIndex) -> usize {
        let kr = self.aux_bits();
        let shift = self.tangent_bits() + j * kr;
        (idx & !(((1usize << kr) - 1) << shift)) | ((mask as usize) << shift)
    }
}

/// Element of `Σ_n ⊗ Σ_r^{⊗m}` in the product form basis.
#[derive(Clone, Debug, PartialEq)]
pub struct TwistedSpinor {
    shape: TwistShape,
    vec: SparseVector,
}

impl TwistedSpinor {
    pub fn zero(shape: TwistShape) -> Self {
        TwistedSpinor { shape, vec: SparseVector::zero(shape.dim()) }
    }

    pub fn from_vector(shape: TwistShape, vec: SparseVector) -> Result<Self> {
        if vec.dim() != shape.dim() {
            return Err(Error::DimensionMismatch(format!("vector dim {} for module dim {}", vec.dim(), shape.dim())));
        }
        Ok(TwistedSpinor { shape, vec })
    }

    /// `φ ⊗ χ_1 ⊗ ⋯ ⊗ χ_m`.
    pub fn tensor(shape: TwistShape, tangent: &Spinor, aux: &[Spinor]) -> Result<Self> {
        if tangent.n() != shape.n || aux.len() != shape.m || aux.iter().any(|a| a.n() != shape.r) {
            return Err(Error::DimensionMismatch("tensor factors do not match the module shape".into()));
        }
        let mut acc: Vec<(usize, C64)> = tangent.coeffs().iter().map(|(&k, &z)| (k as usize, z)).collect();
        for (j, a) in aux.iter().enumerate() {
            let mut next = Vec::with_capacity(acc.len() * a.coeffs().len());
            for &(idx, z) in &acc {
                for (&k, &w) in a.coeffs() {
                    next.push((shape.with_aux(idx, j, k), z * w));
                }
            }
            acc = next;
        }
        Ok(TwistedSpinor { shape, vec: SparseVector::from_pairs(shape.dim(), acc, 0.0)? })
    }

    pub fn shape(&self) -> TwistShape {
        self.shape
    }

    pub fn vector(&self) -> &SparseVector {
        &self.vec
    }

    pub fn norm(&self) -> f64 {
        self.vec.norm()
    }

    pub fn herm(&self, other: &TwistedSpinor) -> Result<C64> {
        if self.shape != other.shape {
            return Err(Error::DimensionMismatch("twisted spinors of different shapes".into()));
        }
        Ok(self.vec.herm(&other.vec))
    }

    pub fn scale(&self, c: C64) -> Self {
        TwistedSpinor { shape: self.shape, vec: self.vec.scale(c) }
    }

    pub fn axpy(&self, c: C64, other: &TwistedSpinor) -> Result<Self> {
        if self.shape != other.shape {
            return Err(Error::DimensionMismatch("twisted spinors of different shapes".into()));
        }
        Ok(TwistedSpinor { shape: self.shape, vec: self.vec.axpy(c, &other.vec, 0.0)? })
    }

    /// Terms as `(tangent mask, aux masks, coefficient)`.
    pub fn terms(&self) -> impl Iterator<Item = (SpinorIndex, Vec<SpinorIndex>, C64)> + '_ {
        self.vec.entries().iter().map(move |&(idx, z)| {
            let (t, a) = self.shape.unpack(idx);
            (t, a, z)
        })
    }

    fn map_entries<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, C64, &mut Vec<(usize, C64)>),
    {
        let mut raw = Vec::with_capacity(self.vec.nnz() * 4);
        for &(idx, z) in self.vec.entries() {
            f(idx, z, &mut raw);
        }
        let dim = self.shape.dim();
        // Dense accumulation beats sorting once the output is not very sparse.
        if raw.len() >= dim / 8 {
            let mut acc = vec![C64::new(0.0, 0.0); dim];
            for (i, z) in raw {
                acc[i] += z;
            }
            return Ok(TwistedSpinor { shape: self.shape, vec: SparseVector::from_dense(&acc, 0.0) });
        }
        Ok(TwistedSpinor { shape: self.shape, vec: SparseVector::from_pairs(dim, raw, 0.0)? })
    }

    /// Clifford multiplication by a tangent generator on the first factor.
    pub fn tangent_clifford(&self, label: usize) -> Result<Self> {
        check_label(self.shape.n, label)?;
        let sh = self.shape;
        self.map_entries(|idx, z, out| {
            let (m, c) = gen_on_mask(label, sh.tangent_mask(idx));
            out.push((sh.with_tangent(idx, m), c * z));
        })
    }

    /// Clifford multiplication by `Σ_a v_a e_a` (positions) on the first factor.
    pub fn tangent_vector_clifford(&self, v: &[f64]) -> Result<Self> {
        if v.len() != self.shape.n {
            return Err(Error::DimensionMismatch("tangent vector length".into()));
        }
        let sh = self.shape;
        self.map_entries(|idx, z, out| {
            for (p, &a) in v.iter().enumerate() {
                if a != 0.0 {
                    let (m, c) = gen_on_mask(label_of(sh.n, p), sh.tangent_mask(idx));
                    out.push((sh.with_tangent(idx, m), c * z * a));
                }
            }
        })
    }

    /// Clifford multiplication by an auxiliary generator on factor `j`.
    pub fn aux_clifford(&self, j: usize, label: usize) -> Result<Self> {
        check_label(self.shape.r, label)?;
        if j >= self.shape.m {
            return Err(Error::IndexOutOfRange(format!("aux factor {j} of {}", self.shape.m)));
        }
        let sh = self.shape;
        self.map_entries(|idx, z, out| {
            let (m, c) = gen_on_mask(label, sh.aux_mask(idx, j));
            out.push((sh.with_aux(idx, j, m), c * z));
        })
    }
}

/// Derived action `(A ⊗ 1 + Σ_j 1 ⊗ ⋯ ⊗ B_(j) ⊗ ⋯ ⊗ 1)·Ψ` of the spin lifts
/// of a tangent element `A ∈ so(n)` and an auxiliary element `B ∈ so(r)`.
pub fn twisted_apply(tangent: &SpinAlgebraElement, aux: &SpinAlgebraElement, psi: &TwistedSpinor) -> Result<TwistedSpinor> {
    let sh = psi.shape;
    if tangent.n != sh.n || aux.n != sh.r {
        return Err(Error::DimensionMismatch(format!(
            "so({}) ⊕ so({}) acting on Σ_{} ⊗ Σ_{}",
            tangent.n, aux.n, sh.n, sh.r
        )));
    }
    let tt = tangent.lift_terms();
    let at = aux.lift_terms();
    psi.map_entries(|idx, z, out| {
        for (m, c) in lift_on_mask(&tt, sh.tangent_mask(idx)) {
            out.push((sh.with_tangent(idx, m as SpinorIndex), c * z));
        }
        for j in 0..sh.m {
            for (m, c) in lift_on_mask(&at, sh.aux_mask(idx, j)) {
                out.push((sh.with_aux(idx, j, m as SpinorIndex), c * z));
            }
        }
    })
}

/// The twisted action as an explicit operator on the whole module.
pub fn twisted_operator(shape: TwistShape, tangent: &SpinAlgebraElement, aux: &SpinAlgebraElement) -> Result<SparseOperator> {
    if tangent.n != shape.n || aux.n != shape.r {
        return Err(Error::DimensionMismatch("twisted operator factors".into()));
    }
    let tt = tangent.lift_terms();
    let at = aux.lift_terms();
    let dim = shape.dim();
    SparseOperator::from_columns(dim, dim, |idx| {
        let mut out = Vec::new();
        for (m, c) in lift_on_mask(&tt, shape.tangent_mask(idx)) {
            out.push((shape.with_tangent(idx, m as SpinorIndex), c));
        }
        for j in 0..shape.m {
            for (m, c) in lift_on_mask(&at, shape.aux_mask(idx, j)) {
                out.push((shape.with_aux(idx, j, m as SpinorIndex), c));
            }
        }
        out
    })
}

/// Operator of an auxiliary-only Clifford product `ê_k·ê_l` acting through
/// the derived action on `Σ_r^{⊗m}` (positions `k < l`).
pub fn aux_pair_operator(shape: TwistShape, k: usize, l: usize) -> Result<SparseOperator> {
    let aux = SpinAlgebraElement::from_terms(shape.r, [(k, l, 2.0)])?;
    twisted_operator(shape, &SpinAlgebraElement::zero(shape.n), &aux)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn e1_on_vacuum_is_i_y1() {
        let one = Spinor::basis(4, 0).unwrap();
        let out = clifford_apply(1, &one).unwrap();
        assert_eq!(out, Spinor::y(4, &[1]).unwrap().scale(I));
    }

    #[test]
    fn e0_on_y1_is_minus_i_y1() {
        let y1 = Spinor::y(5, &[1]).unwrap();
        assert_eq!(clifford_apply(0, &y1).unwrap(), y1.scale(-I));
        assert!(clifford_apply(0, &Spinor::y(4, &[1]).unwrap()).is_err());
    }

    #[test]
    fn herm_orthonormal() {
        let y1 = Spinor::y(4, &[1]).unwrap();
        let y2 = Spinor::y(4, &[2]).unwrap();
        assert_eq!(herm(&y1, &y1).unwrap(), ONE);
        assert_eq!(herm(&y1, &y2).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn wedge_anticommutes() {
        let a = Spinor::y(6, &[1, 3]).unwrap();
        let b = Spinor::y(6, &[3, 1]).unwrap();
        assert_eq!(a, b.scale(-ONE));
        assert!(Spinor::y(6, &[2, 2]).unwrap().is_zero());
    }

    #[test]
    fn skew_matrix_round_trip() {
        let a = SpinAlgebraElement::from_terms(5, [(0, 3, 1.5), (4, 1, 2.0)]).unwrap();
        let b = SpinAlgebraElement::from_skew_matrix(&a.to_skew_matrix(), 0.0).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.coeff(1, 4), -2.0);
    }

    #[test]
    fn twisted_packing_round_trip() {
        let sh = TwistShape::new(6, 3, 3).unwrap();
        let idx = sh.pack(0b101, &[1, 0, 1]);
        assert_eq!(sh.unpack(idx), (0b101, vec![1, 0, 1]));
        assert!(TwistShape::new(6, 3, 2).is_err());
    }
}
