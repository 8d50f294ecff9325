//! Sparse complex and quaternionic linear algebra.
//!
//! Vectors and operators are stored sparsely because the twisted spinor
//! modules reach dimension 2^20 while the interesting vectors and all of the
//! Lie algebra actions are very sparse. Dense `nalgebra` matrices are used
//! only once a problem has been cut down to a small subspace.

use crate::{Error, Result, C64};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Maximum number of stacked rows handled by a single SVD in [`joint_kernel`].
pub const SVD_ROW_LIMIT: usize = 20_000;

/// Maximum number of dense entries of a stacked matrix before falling back to
/// iterative deflation, whatever the row count.
const DENSE_ENTRY_LIMIT: usize = 6_000_000;

/// Numerical tolerances used throughout the crate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub rank_tol: f64,
    pub residual_tol: f64,
    pub drop_tol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rank_tol: 1e-9, residual_tol: 1e-8, drop_tol: 1e-12 }
    }
}

impl Tolerance {
    pub fn new(rank_tol: f64, residual_tol: f64, drop_tol: f64) -> Result<Self> {
        let t = Tolerance { rank_tol, residual_tol, drop_tol };
        t.validate()?;
        Ok(t)
    }

    /// Default tolerance with `residual_tol` replaced; `drop_tol` is clamped
    /// so the ordering invariant keeps holding.
    pub fn with_residual(residual_tol: f64) -> Result<Self> {
        let d = Tolerance::default();
        Tolerance::new(d.rank_tol, residual_tol, d.drop_tol.min(residual_tol))
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.drop_tol > 0.0
            && self.drop_tol <= self.residual_tol
            && self.rank_tol > 0.0
            && self.rank_tol.is_finite()
            && self.residual_tol.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("inconsistent tolerance {self:?}")))
        }
    }
}

fn check_finite(z: C64) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput("non-finite scalar".into()))
    }
}

/// Sparse complex vector with sorted, duplicate-free indices.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseVector {
    dim: usize,
    entries: Vec<(usize, C64)>,
}

impl SparseVector {
    pub fn zero(dim: usize) -> Self {
        SparseVector { dim, entries: Vec::new() }
    }

    pub fn unit(dim: usize, i: usize) -> Self {
        assert!(i < dim, "unit index {i} out of range for dimension {dim}");
        SparseVector { dim, entries: vec![(i, C64::new(1.0, 0.0))] }
    }

    /// Accumulates possibly repeated `(index, value)` pairs; entries whose
    /// modulus ends up at or below `drop_tol` are discarded.
    pub fn from_pairs<I>(dim: usize, pairs: I, drop_tol: f64) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, C64)>,
    {
        let mut raw: Vec<(usize, C64)> = pairs.into_iter().collect();
        for &(i, z) in &raw {
            if i >= dim {
                return Err(Error::IndexOutOfRange(format!("index {i} >= dim {dim}")));
            }
            check_finite(z)?;
        }
        Ok(SparseVector { dim, entries: merge_sorted(&mut raw, drop_tol) })
    }

    pub fn from_dense(v: &[C64], drop_tol: f64) -> Self {
        let entries = v
            .iter()
            .enumerate()
            .filter(|(_, z)| z.norm() > drop_tol)
            .map(|(i, z)| (i, *z))
            .collect();
        SparseVector { dim: v.len(), entries }
    }

    pub fn to_dense(&self) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.dim];
        for &(i, z) in &self.entries {
            out[i] = z;
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, C64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, i: usize) -> C64 {
        match self.entries.binary_search_by_key(&i, |e| e.0) {
            Ok(p) => self.entries[p].1,
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn norm_sq(&self) -> f64 {
        self.entries.iter().map(|e| e.1.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Hermitian product, conjugate-linear in the second argument.
    pub fn herm(&self, other: &SparseVector) -> C64 {
        let (mut i, mut j) = (0, 0);
        let mut acc = C64::new(0.0, 0.0);
        while i < self.entries.len() && j < other.entries.len() {
            let (a, b) = (self.entries[i], other.entries[j]);
            match a.0.cmp(&b.0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += a.1 * b.1.conj();
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    pub fn scale(&self, c: C64) -> SparseVector {
        if c == C64::new(0.0, 0.0) {
            return SparseVector::zero(self.dim);
        }
        SparseVector { dim: self.dim, entries: self.entries.iter().map(|&(i, z)| (i, z * c)).collect() }
    }

    /// `self + c·other`, dropping cancelled entries at `drop_tol`.
    pub fn axpy(&self, c: C64, other: &SparseVector, drop_tol: f64) -> Result<SparseVector> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(format!("{} vs {}", self.dim, other.dim)));
        }
        let mut raw = Vec::with_capacity(self.entries.len() + other.entries.len());
        raw.extend_from_slice(&self.entries);
        raw.extend(other.entries.iter().map(|&(i, z)| (i, z * c)));
        Ok(SparseVector { dim: self.dim, entries: merge_sorted(&mut raw, drop_tol) })
    }

    pub fn sub(&self, other: &SparseVector) -> Result<SparseVector> {
        self.axpy(C64::new(-1.0, 0.0), other, 0.0)
    }

    /// Largest-modulus entry, lowest index on ties.
    pub fn pivot(&self) -> Option<(usize, C64)> {
        let mut best: Option<(usize, C64)> = None;
        for &(i, z) in &self.entries {
            match best {
                Some((_, b)) if z.norm() <= b.norm() * (1.0 + 1e-12) => {}
                _ => best = Some((i, z)),
            }
        }
        best
    }

    pub fn normalized(&self) -> Option<SparseVector> {
        let n = self.norm();
        (n > 0.0).then(|| self.scale(C64::new(1.0 / n, 0.0)))
    }
}

/// Sorts pairs by index, merges duplicates and drops entries `<= drop_tol`.
pub(crate) fn merge_sorted(raw: &mut Vec<(usize, C64)>, drop_tol: f64) -> Vec<(usize, C64)> {
    raw.sort_unstable_by_key(|e| e.0);
    let mut out: Vec<(usize, C64)> = Vec::with_capacity(raw.len());
    for &(i, z) in raw.iter() {
        match out.last_mut() {
            Some(last) if last.0 == i => last.1 += z,
            _ => out.push((i, z)),
        }
    }
    out.retain(|e| e.1.norm() > drop_tol);
    out
}

/// Sparse complex matrix in compressed-column form.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    rows: usize,
    cols: usize,
    col_start: Vec<usize>,
    row_idx: Vec<usize>,
    vals: Vec<C64>,
}

impl SparseOperator {
    pub fn zero(rows: usize, cols: usize) -> Self {
        SparseOperator { rows, cols, col_start: vec![0; cols + 1], row_idx: vec![], vals: vec![] }
    }

    pub fn identity(n: usize) -> Self {
        SparseOperator::from_triplets(n, n, (0..n).map(|i| (i, i, C64::new(1.0, 0.0))))
            .expect("identity indices are in range")
    }

    /// Builds an operator from `(row, col, value)` triplets; duplicates add up
    /// and exact zeros are dropped.
    pub fn from_triplets<I>(rows: usize, cols: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, C64)>,
    {
        let mut t: Vec<(usize, usize, C64)> = triplets.into_iter().collect();
        for &(r, c, z) in &t {
            if r >= rows || c >= cols {
                return Err(Error::IndexOutOfRange(format!("({r},{c}) in {rows}x{cols}")));
            }
            check_finite(z)?;
        }
        t.sort_unstable_by_key(|e| (e.1, e.0));
        let mut merged: Vec<(usize, usize, C64)> = Vec::with_capacity(t.len());
        for (r, c, z) in t {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += z,
                _ => merged.push((r, c, z)),
            }
        }
        merged.retain(|e| e.2.norm() > 0.0);
        let mut col_start = vec![0usize; cols + 1];
        for &(_, c, _) in &merged {
            col_start[c + 1] += 1;
        }
        for c in 0..cols {
            col_start[c + 1] += col_start[c];
        }
        Ok(SparseOperator {
            rows,
            cols,
            col_start,
            row_idx: merged.iter().map(|e| e.0).collect(),
            vals: merged.iter().map(|e| e.2).collect(),
        })
    }

    /// Builds an operator column by column.
    pub fn from_columns<F>(rows: usize, cols: usize, mut column: F) -> Result<Self>
    where
        F: FnMut(usize) -> Vec<(usize, C64)>,
    {
        let mut trip = Vec::new();
        for c in 0..cols {
            trip.extend(column(c).into_iter().map(|(r, z)| (r, c, z)));
        }
        SparseOperator::from_triplets(rows, cols, trip)
    }

    pub fn from_dense(m: &DMatrix<C64>) -> Self {
        let mut trip = Vec::new();
        for c in 0..m.ncols() {
            for r in 0..m.nrows() {
                if m[(r, c)].norm() > 0.0 {
                    trip.push((r, c, m[(r, c)]));
                }
            }
        }
        SparseOperator::from_triplets(m.nrows(), m.ncols(), trip).expect("dense indices are in range")
    }

    pub fn from_real(m: &DMatrix<f64>) -> Self {
        SparseOperator::from_dense(&m.map(|x| C64::new(x, 0.0)))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn column(&self, c: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let (a, b) = (self.col_start[c], self.col_start[c + 1]);
        self.row_idx[a..b].iter().copied().zip(self.vals[a..b].iter().copied())
    }

    pub fn triplets(&self) -> Vec<(usize, usize, C64)> {
        (0..self.cols).flat_map(|c| self.column(c).map(move |(r, z)| (r, c, z))).collect()
    }

    pub fn apply(&self, v: &SparseVector) -> Result<SparseVector> {
        if v.dim() != self.cols {
            return Err(Error::DimensionMismatch(format!("operator has {} columns, vector dim {}", self.cols, v.dim())));
        }
        let mut raw = Vec::new();
        for &(c, z) in v.entries() {
            raw.extend(self.column(c).map(|(r, a)| (r, a * z)));
        }
        Ok(SparseVector { dim: self.rows, entries: merge_sorted(&mut raw, 0.0) })
    }

    pub fn apply_dense(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols);
        let mut out = vec![C64::new(0.0, 0.0); self.rows];
        for (c, &z) in v.iter().enumerate() {
            if z != C64::new(0.0, 0.0) {
                for (r, a) in self.column(c) {
                    out[r] += a * z;
                }
            }
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for (r, c, z) in self.triplets() {
            m[(r, c)] += z;
        }
        m
    }

    pub fn scale(&self, s: C64) -> SparseOperator {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|z| *z *= s);
        if s == C64::new(0.0, 0.0) {
            return SparseOperator::zero(self.rows, self.cols);
        }
        out
    }

    pub fn add(&self, other: &SparseOperator) -> Result<SparseOperator> {
        self.axpy(C64::new(1.0, 0.0), other)
    }

    /// `self + s·other`.
    pub fn axpy(&self, s: C64, other: &SparseOperator) -> Result<SparseOperator> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch("operator sum".into()));
        }
        let mut t = self.triplets();
        t.extend(other.triplets().into_iter().map(|(r, c, z)| (r, c, z * s)));
        SparseOperator::from_triplets(self.rows, self.cols, t)
    }

    /// Composition `self ∘ other`.
    pub fn compose(&self, other: &SparseOperator) -> Result<SparseOperator> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch("operator composition".into()));
        }
        let mut trip = Vec::new();
        for c in 0..other.cols {
            for (k, b) in other.column(c) {
                trip.extend(self.column(k).map(|(r, a)| (r, c, a * b)));
            }
        }
        SparseOperator::from_triplets(self.rows, other.cols, trip)
    }

    pub fn commutator(&self, other: &SparseOperator) -> Result<SparseOperator> {
        self.compose(other)?.axpy(C64::new(-1.0, 0.0), &other.compose(self)?)
    }

    pub fn adjoint(&self) -> SparseOperator {
        let t = self.triplets().into_iter().map(|(r, c, z)| (c, r, z.conj()));
        SparseOperator::from_triplets(self.cols, self.rows, t).expect("transpose stays in range")
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.cols).all(|c| self.column(c).all(|(r, _)| r == c))
    }

    pub fn diagonal_entry(&self, i: usize) -> C64 {
        self.column(i).find(|e| e.0 == i).map(|e| e.1).unwrap_or_default()
    }
}

/// Basis unit of the quaternions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Unit {
    One,
    I,
    J,
    K,
}

impl Unit {
    fn index(self) -> usize {
        match self {
            Unit::One => 0,
            Unit::I => 1,
            Unit::J => 2,
            Unit::K => 3,
        }
    }
}

/// Product table of quaternion units: `(a, b) -> (sign, a·b)`.
fn unit_product(a: usize, b: usize) -> (f64, usize) {
    const TABLE: [[(f64, usize); 4]; 4] = [
        [(1.0, 0), (1.0, 1), (1.0, 2), (1.0, 3)],
        [(1.0, 1), (-1.0, 0), (1.0, 3), (-1.0, 2)],
        [(1.0, 2), (-1.0, 3), (-1.0, 0), (1.0, 1)],
        [(1.0, 3), (1.0, 2), (-1.0, 1), (-1.0, 0)],
    ];
    TABLE[a][b]
}

/// Quaternionic square matrix `X = X0 + i X1 + j X2 + k X3` with real parts.
#[derive(Clone, Debug, PartialEq)]
pub struct QuatMatrix {
    parts: [DMatrix<f64>; 4],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ElemKind {
    E,
    F,
}

/// Elementary matrices `E^{(n)}_{i,j}` (skew, `-1` at `(i,j)`, `+1` at
/// `(j,i)`) and `F^{(n)}_{i,j}` (symmetric, ones at both places, a single one
/// when `i = j`). Indices are 1-based.
pub fn elementary(kind: ElemKind, n: usize, i: usize, j: usize) -> Result<QuatMatrix> {
    let valid = match kind {
        ElemKind::E => 1 <= i && i < j && j <= n,
        ElemKind::F => 1 <= i && i <= j && j <= n,
    };
    if !valid {
        return Err(Error::IndexOutOfRange(format!("{kind:?}^({n})_{{{i},{j}}}")));
    }
    let mut m = DMatrix::zeros(n, n);
    match kind {
        ElemKind::E => {
            m[(i - 1, j - 1)] = -1.0;
            m[(j - 1, i - 1)] = 1.0;
        }
        ElemKind::F => {
            m[(i - 1, j - 1)] = 1.0;
            m[(j - 1, i - 1)] = 1.0;
        }
    }
    Ok(QuatMatrix::real(m))
}

/// Shorthand for `unit · elementary(kind, n, i, j)`; panics on bad indices.
pub fn qe(unit: Unit, kind: ElemKind, n: usize, i: usize, j: usize) -> QuatMatrix {
    elementary(kind, n, i, j).expect("valid elementary indices").left_unit(unit)
}

impl QuatMatrix {
    pub fn zeros(n: usize) -> Self {
        QuatMatrix { parts: std::array::from_fn(|_| DMatrix::zeros(n, n)) }
    }

    pub fn real(m: DMatrix<f64>) -> Self {
        let n = m.nrows();
        assert_eq!(n, m.ncols(), "quaternionic matrices are square");
        let mut q = QuatMatrix::zeros(n);
        q.parts[0] = m;
        q
    }

    pub fn from_parts(parts: [DMatrix<f64>; 4]) -> Self {
        QuatMatrix { parts }
    }

    pub fn n(&self) -> usize {
        self.parts[0].nrows()
    }

    pub fn part(&self, u: Unit) -> &DMatrix<f64> {
        &self.parts[u.index()]
    }

    fn check(&self, other: &QuatMatrix) -> Result<()> {
        if self.n() == other.n() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!("{}x{} vs {}x{}", self.n(), self.n(), other.n(), other.n())))
        }
    }

    /// Left multiplication by a unit quaternion scalar.
    pub fn left_unit(&self, u: Unit) -> QuatMatrix {
        let mut out = QuatMatrix::zeros(self.n());
        for b in 0..4 {
            let (s, c) = unit_product(u.index(), b);
            out.parts[c] += &self.parts[b] * s;
        }
        out
    }

    pub fn mul(&self, other: &QuatMatrix) -> Result<QuatMatrix> {
        self.check(other)?;
        let mut out = QuatMatrix::zeros(self.n());
        for a in 0..4 {
            for b in 0..4 {
                let (s, c) = unit_product(a, b);
                out.parts[c] += (&self.parts[a] * &other.parts[b]) * s;
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &QuatMatrix) -> Result<QuatMatrix> {
        self.check(other)?;
        Ok(QuatMatrix { parts: std::array::from_fn(|u| &self.parts[u] + &other.parts[u]) })
    }

    pub fn sub(&self, other: &QuatMatrix) -> Result<QuatMatrix> {
        self.check(other)?;
        Ok(QuatMatrix { parts: std::array::from_fn(|u| &self.parts[u] - &other.parts[u]) })
    }

    pub fn scale(&self, s: f64) -> QuatMatrix {
        QuatMatrix { parts: std::array::from_fn(|u| &self.parts[u] * s) }
    }

    /// Commutator `XY − YX`.
    pub fn bracket(&self, other: &QuatMatrix) -> Result<QuatMatrix> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    /// Frobenius norm over all four real parts.
    pub fn norm(&self) -> f64 {
        self.parts.iter().map(|p| p.norm_squared()).sum::<f64>().sqrt()
    }

    /// Real part of the quaternionic trace.
    pub fn re_trace(&self) -> f64 {
        self.parts[0].trace()
    }
}

/// `B0(X, Y) = −Re tr(XY)`.
pub fn b0(x: &QuatMatrix, y: &QuatMatrix) -> Result<f64> {
    x.check(y)?;
    // Only the real part of XY contributes: Σ_u sign(u,u)·tr(X_u Y_u).
    let mut acc = 0.0;
    for u in 0..4 {
        let (s, c) = unit_product(u, u);
        debug_assert_eq!(c, 0);
        acc += s * x.parts[u].component_mul(&y.parts[u].transpose()).sum();
    }
    Ok(-acc)
}

pub fn bracket(x: &QuatMatrix, y: &QuatMatrix) -> Result<QuatMatrix> {
    x.bracket(y)
}

/// Null space of a dense matrix: orthonormal columns spanning the right
/// singular vectors with `σ ≤ rank_tol·max(1, σ_max)`.
pub fn dense_null_space(a: &DMatrix<C64>, rank_tol: f64) -> DMatrix<C64> {
    let c = a.ncols();
    if c == 0 {
        return DMatrix::zeros(0, 0);
    }
    // Pad to at least as many rows as columns so that V is square.
    let padded;
    let m = if a.nrows() < c {
        padded = {
            let mut p = DMatrix::zeros(c, c);
            p.rows_mut(0, a.nrows()).copy_from(a);
            p
        };
        &padded
    } else {
        a
    };
    if m.iter().all(|z| z.norm() == 0.0) {
        return DMatrix::identity(c, c);
    }
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^H");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let thresh = rank_tol * smax.max(1.0);
    let null: Vec<usize> = (0..svd.singular_values.len()).filter(|&j| svd.singular_values[j] <= thresh).collect();
    let mut out = DMatrix::zeros(c, null.len());
    for (k, &j) in null.iter().enumerate() {
        for i in 0..c {
            out[(i, k)] = v_t[(j, i)].conj();
        }
    }
    out
}

/// Deterministic orthonormal basis of the column span of `w` (assumed to
/// have orthonormal columns): greedy pivoting on the projector diagonal, each
/// vector phased so that its pivot coordinate is real and positive.
pub fn canonical_basis(w: &DMatrix<C64>) -> DMatrix<C64> {
    let (c, d) = (w.nrows(), w.ncols());
    let mut w = w.clone();
    let mut out = DMatrix::zeros(c, d);
    for t in 0..d {
        let mut best = (0usize, -1.0f64);
        for i in 0..c {
            let rn: f64 = w.row(i).iter().map(|z| z.norm_sqr()).sum();
            if rn > best.1 * (1.0 + 1e-9) + 1e-14 {
                best = (i, rn);
            }
        }
        let i = best.0;
        // v = P e_i where P = W W^H.
        let coeff: Vec<C64> = w.row(i).iter().map(|z| z.conj()).collect();
        let mut v = vec![C64::new(0.0, 0.0); c];
        for (k, &ck) in coeff.iter().enumerate() {
            for r in 0..c {
                v[r] += w[(r, k)] * ck;
            }
        }
        let nv = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let phase = if v[i].norm() > 0.0 { v[i].conj() / v[i].norm() } else { C64::new(1.0, 0.0) };
        for z in v.iter_mut() {
            *z = *z * phase / nv;
        }
        // W ← W − v (v^H W).
        let mut proj = vec![C64::new(0.0, 0.0); d];
        for k in 0..d {
            for r in 0..c {
                proj[k] += v[r].conj() * w[(r, k)];
            }
        }
        for k in 0..d {
            for r in 0..c {
                w[(r, k)] -= v[r] * proj[k];
            }
        }
        for r in 0..c {
            out[(r, t)] = v[r];
        }
    }
    out
}

/// Stacked restriction of operators to a set of columns, keeping nonzero rows.
fn stacked_restriction(ops: &[&SparseOperator], cols: &[usize]) -> DMatrix<C64> {
    let mut rows: Vec<Vec<(usize, C64)>> = Vec::new();
    for op in ops {
        let mut row_id = std::collections::HashMap::new();
        for (local, &c) in cols.iter().enumerate() {
            for (r, z) in op.column(c) {
                let id = *row_id.entry(r).or_insert_with(|| {
                    rows.push(Vec::new());
                    rows.len() - 1
                });
                rows[id].push((local, z));
            }
        }
    }
    let mut m = DMatrix::zeros(rows.len(), cols.len());
    for (i, row) in rows.iter().enumerate() {
        for &(j, z) in row {
            m[(i, j)] += z;
        }
    }
    m
}

/// Orthonormal basis of `⋂ ker A` for the given operators.
///
/// Operators that are diagonal in the standard basis are used first to cut
/// the problem down to their common zero set (exact, since a diagonal
/// operator's kernel is a coordinate subspace). The remaining operators are
/// stacked and handled by one SVD when the stacked matrix is small enough,
/// otherwise by iterative deflation. Every returned vector is re-verified.
pub fn joint_kernel(ops: &[SparseOperator], tol: &Tolerance) -> Result<Vec<SparseVector>> {
    let first = ops.first().ok_or_else(|| Error::InvalidInput("joint_kernel needs at least one operator".into()))?;
    let dim = first.cols();
    if let Some(bad) = ops.iter().find(|o| o.cols() != dim) {
        return Err(Error::DimensionMismatch(format!("operators with {} and {} columns", dim, bad.cols())));
    }
    let mut active = vec![true; dim];
    let mut general: Vec<&SparseOperator> = Vec::new();
    for op in ops {
        if op.rows() == op.cols() && op.is_diagonal() {
            for (i, a) in active.iter_mut().enumerate() {
                if op.diagonal_entry(i).norm() > tol.rank_tol {
                    *a = false;
                }
            }
        } else {
            general.push(op);
        }
    }
    let support: Vec<usize> = (0..dim).filter(|&i| active[i]).collect();
    let basis = if support.is_empty() {
        DMatrix::zeros(0, 0)
    } else if general.is_empty() {
        DMatrix::identity(support.len(), support.len())
    } else {
        restricted_kernel(&general, &support, tol)
    };
    let basis = canonical_basis(&basis);
    let mut out = Vec::with_capacity(basis.ncols());
    for k in 0..basis.ncols() {
        let pairs = support.iter().enumerate().map(|(local, &g)| (g, basis[(local, k)]));
        out.push(SparseVector::from_pairs(dim, pairs, tol.drop_tol)?);
    }
    verify_kernel(ops, &out, tol)?;
    Ok(out)
}

fn restricted_kernel(ops: &[&SparseOperator], support: &[usize], tol: &Tolerance) -> DMatrix<C64> {
    let c = support.len();
    let total_rows: usize = ops.iter().map(|o| o.rows()).sum();
    if total_rows <= SVD_ROW_LIMIT && total_rows.max(c) * c <= DENSE_ENTRY_LIMIT {
        return dense_null_space(&stacked_restriction(ops, support), tol.rank_tol);
    }
    // Iterative deflation: K spans the kernel of the operators seen so far.
    let mut k: DMatrix<C64> = DMatrix::identity(c, c);
    for op in ops {
        if k.ncols() == 0 {
            break;
        }
        let a = stacked_restriction(&[*op], support);
        let ak = &a * &k;
        let n = dense_null_space(&ak, tol.rank_tol);
        k = &k * n;
    }
    k
}

/// Checks `‖A v‖ ≤ residual_tol·‖v‖` for all operators and orthonormality.
pub fn verify_kernel(ops: &[SparseOperator], basis: &[SparseVector], tol: &Tolerance) -> Result<()> {
    for (i, v) in basis.iter().enumerate() {
        let nv = v.norm();
        for op in ops {
            let r = op.apply(v)?.norm();
            if r > tol.residual_tol * nv {
                return Err(Error::Verification(format!("kernel vector {i} has residual {r:.3e}")));
            }
        }
        for (j, w) in basis.iter().enumerate() {
            let g = v.herm(w);
            let want = if i == j { 1.0 } else { 0.0 };
            if (g - C64::new(want, 0.0)).norm() > tol.rank_tol.max(1e-10) * 10.0 {
                return Err(Error::Verification(format!("Gram entry ({i},{j}) = {g}")));
            }
        }
    }
    Ok(())
}

/// Joint kernel of `ops` inside the span of an orthonormal family `within`.
pub fn kernel_within(ops: &[SparseOperator], within: &[SparseVector], tol: &Tolerance) -> Result<Vec<SparseVector>> {
    if within.is_empty() {
        return Ok(Vec::new());
    }
    let dim = within[0].dim();
    // Images A b_j, stacked over operators, as a dense matrix over touched rows.
    let mut row_of = std::collections::HashMap::new();
    let mut cols: Vec<Vec<(usize, C64)>> = vec![Vec::new(); within.len()];
    for (oi, op) in ops.iter().enumerate() {
        for (j, b) in within.iter().enumerate() {
            for &(r, z) in op.apply(b)?.entries() {
                let n = row_of.len();
                let id = *row_of.entry((oi, r)).or_insert(n);
                cols[j].push((id, z));
            }
        }
    }
    let mut m = DMatrix::zeros(row_of.len(), within.len());
    for (j, col) in cols.iter().enumerate() {
        for &(i, z) in col {
            m[(i, j)] += z;
        }
    }
    let coeffs = canonical_basis(&dense_null_space(&m, tol.rank_tol));
    let mut out = Vec::new();
    for k in 0..coeffs.ncols() {
        let mut v = SparseVector::zero(dim);
        for (j, b) in within.iter().enumerate() {
            v = v.axpy(coeffs[(j, k)], b, 0.0)?;
        }
        let v = SparseVector::from_pairs(dim, v.entries().iter().copied(), tol.drop_tol)?;
        out.push(v);
    }
    verify_kernel(ops, &out, tol)?;
    Ok(out)
}

/// Numerical rank of a family of vectors.
pub fn rank(vectors: &[SparseVector], rank_tol: f64) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let dim = vectors[0].dim();
    let mut m = DMatrix::zeros(dim, vectors.len());
    for (j, v) in vectors.iter().enumerate() {
        for &(i, z) in v.entries() {
            m[(i, j)] = z;
        }
    }
    let sv = m.svd(false, false).singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > rank_tol * smax.max(1.0)).count()
}

/// Real least-squares solve `min ‖A x − b‖` via SVD; returns `(x, residual)`.
pub fn real_lstsq(a: &DMatrix<f64>, b: &nalgebra::DVector<f64>, rank_tol: f64) -> (nalgebra::DVector<f64>, f64) {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let eps = rank_tol * smax.max(1.0);
    let x = svd.solve(b, eps).expect("U and V^T were computed");
    let res = (a * &x - b).norm();
    (x, res)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn elementary_displays() {
        let e = elementary(ElemKind::E, 2, 1, 2).unwrap();
        assert_eq!(e.part(Unit::One)[(0, 1)], -1.0);
        assert_eq!(e.part(Unit::One)[(1, 0)], 1.0);
        let f = elementary(ElemKind::F, 2, 1, 1).unwrap();
        assert_eq!(f.part(Unit::One)[(0, 0)], 1.0);
        assert_eq!(f.part(Unit::One).sum(), 1.0);
        assert!(elementary(ElemKind::E, 2, 2, 2).is_err());
        assert!(elementary(ElemKind::F, 2, 0, 1).is_err());
    }

    #[test]
    fn b0_values() {
        let i_f11 = qe(Unit::I, ElemKind::F, 2, 1, 1);
        assert!((b0(&i_f11, &i_f11).unwrap() - 1.0).abs() < 1e-15);
        let e12 = qe(Unit::One, ElemKind::E, 2, 1, 2);
        assert!((b0(&e12, &e12).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(b0(&e12, &QuatMatrix::zeros(2)).unwrap(), 0.0);
    }

    #[test]
    fn bracket_e_f() {
        let e12 = qe(Unit::One, ElemKind::E, 2, 1, 2);
        let f11 = qe(Unit::One, ElemKind::F, 2, 1, 1);
        let f12 = qe(Unit::One, ElemKind::F, 2, 1, 2);
        assert!(e12.bracket(&f11).unwrap().sub(&f12).unwrap().norm() < 1e-15);
        assert!(e12.bracket(&e12).unwrap().norm() == 0.0);
    }

    #[test]
    fn quaternion_units_multiply() {
        let one = QuatMatrix::real(DMatrix::identity(1, 1));
        let i = one.left_unit(Unit::I);
        let j = one.left_unit(Unit::J);
        let k = one.left_unit(Unit::K);
        assert_eq!(i.mul(&j).unwrap(), k);
        assert_eq!(j.mul(&k).unwrap(), i);
        assert_eq!(k.mul(&i).unwrap(), j);
        assert_eq!(i.mul(&i).unwrap(), one.scale(-1.0));
    }

    #[test]
    fn kernel_trivial_cases() {
        let tol = Tolerance::default();
        let z = SparseOperator::zero(3, 3);
        assert_eq!(joint_kernel(&[z], &tol).unwrap().len(), 3);
        let id = SparseOperator::identity(3);
        assert!(joint_kernel(&[id], &tol).unwrap().is_empty());
        let a = SparseOperator::zero(2, 3);
        let b = SparseOperator::zero(2, 4);
        assert!(matches!(joint_kernel(&[a, b], &tol), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn kernel_of_rank_one() {
        let tol = Tolerance::default();
        let op = SparseOperator::from_triplets(1, 3, vec![(0, 0, c(1.0)), (0, 1, c(1.0))]).unwrap();
        let k = joint_kernel(&[op.clone()], &tol).unwrap();
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!(op.apply(v).unwrap().norm() < 1e-12);
        }
    }

    #[test]
    fn sparse_vector_merges() {
        let v = SparseVector::from_pairs(4, vec![(2, c(1.0)), (0, c(2.0)), (2, c(-1.0))], 1e-12).unwrap();
        assert_eq!(v.entries(), &[(0, c(2.0))]);
        assert!(SparseVector::from_pairs(2, vec![(5, c(1.0))], 0.0).is_err());
    }

    #[test]
    fn tolerance_validation() {
        assert!(Tolerance::new(1e-9, 1e-8, 1e-7).is_err());
        assert!(Tolerance::new(0.0, 1e-8, 1e-12).is_err());
        assert!(Tolerance::default().validate().is_ok());
    }
}
