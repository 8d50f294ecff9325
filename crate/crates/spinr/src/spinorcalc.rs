//! Invariant twisted spinors and their special properties.

use crate::clifford::{aux_pair_operator, label_of, twisted_apply, Spinor, TwistedSpinor};
use crate::connections::NomizuMap;
use crate::numlin::{joint_kernel, real_lstsq, SparseVector, Tolerance};
use crate::spaces::{ReductiveModel, SpaceId};
use crate::{weights, Error, Result, C64};
use nalgebra::{DMatrix, DVector};

/// Basis of the `𝔥`-invariant vectors of `Σ_n ⊗ Σ_r^{⊗m}`.
///
/// OP² is routed through the representation-theoretic construction in
/// [`weights`]; every other model uses a joint kernel of the twisted actions.
/// Either way the result is verified against all `𝔥` basis actions.
pub fn invariant_space(model: &ReductiveModel, tol: &Tolerance) -> Result<Vec<TwistedSpinor>> {
    if model.space() == SpaceId::Op2 && model.r() > 1 {
        return weights::op2_invariant_space(model, tol);
    }
    let shape = model.shape()?;
    let basis = joint_kernel(&model.twisted_operators()?, tol)?;
    let out: Vec<TwistedSpinor> =
        basis.into_iter().map(|v| TwistedSpinor::from_vector(shape, v)).collect::<Result<_>>()?;
    verify_invariant(model, &out, tol)?;
    Ok(out)
}

/// Largest relative residual of the `𝔥` actions on `ψ`.
pub fn invariance_residual(model: &ReductiveModel, psi: &TwistedSpinor) -> Result<f64> {
    let nrm = psi.norm();
    if nrm == 0.0 {
        return Err(Error::InvalidInput("zero spinor".into()));
    }
    let mut worst: f64 = 0.0;
    for (t, a) in model.isotropy_basis().iter().zip(model.aux_basis()) {
        worst = worst.max(twisted_apply(t, a, psi)?.norm() / nrm);
    }
    Ok(worst)
}

/// Post-hoc check that every vector is annihilated by `𝔥`.
pub fn verify_invariant(model: &ReductiveModel, basis: &[TwistedSpinor], tol: &Tolerance) -> Result<()> {
    for (i, psi) in basis.iter().enumerate() {
        let res = invariance_residual(model, psi)?;
        if res > tol.residual_tol {
            return Err(Error::Verification(format!("invariant vector {i} has residual {res:.3e}")));
        }
    }
    Ok(())
}

/// `η_{kl}` 2-forms of a spinor, one matrix `F[a][b] = η_{kl}(f_a, f_b)` per pair.
#[derive(Clone, Debug)]
pub struct EtaData {
    pairs: Vec<(usize, usize)>,
    forms: Vec<DMatrix<f64>>,
}

impl EtaData {
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn forms(&self) -> &[DMatrix<f64>] {
        &self.forms
    }

    pub fn form(&self, k: usize, l: usize) -> Option<&DMatrix<f64>> {
        self.pairs.iter().position(|&p| p == (k, l)).map(|i| &self.forms[i])
    }

    /// `η̂_{kl}` with `g(η̂(X), Y) = η(X, Y)`.
    pub fn endo(&self, k: usize, l: usize) -> Option<DMatrix<f64>> {
        self.form(k, l).map(|f| f.transpose())
    }
}

fn tangent_units(model: &ReductiveModel, psi: &TwistedSpinor) -> Result<Vec<TwistedSpinor>> {
    let n = model.dim_m();
    (0..n).map(|p| psi.tangent_clifford(label_of(n, p))).collect()
}

/// `η_{kl}(X, Y) = Re⟨(X∧Y)·(ê_k·ê_l)·ψ, ψ⟩` on the orthonormal `𝔪` basis.
pub fn eta_forms(model: &ReductiveModel, psi: &TwistedSpinor) -> Result<EtaData> {
    if psi.norm() == 0.0 {
        return Err(Error::InvalidInput("zero spinor".into()));
    }
    let shape = psi.shape();
    let d = model.dim_m();
    let r = model.r();
    // ⟨f_a·f_b·φ, ψ⟩ = −⟨f_b·φ, f_a·ψ⟩ since each f_a is skew-adjoint.
    let u = tangent_units(model, psi)?;
    let mut pairs = Vec::new();
    let mut forms = Vec::new();
    for k in 0..r {
        for l in (k + 1)..r {
            let op = aux_pair_operator(shape, k, l)?;
            let phi = TwistedSpinor::from_vector(shape, op.apply(psi.vector())?)?;
            let v = tangent_units(model, &phi)?;
            let mut f = DMatrix::zeros(d, d);
            for a in 0..d {
                for b in 0..d {
                    if a != b {
                        f[(a, b)] = -v[b].herm(&u[a])?.re;
                    }
                }
            }
            pairs.push((k, l));
            forms.push(f);
        }
    }
    Ok(EtaData { pairs, forms })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PurityReport {
    pub pure_up_to_scale: bool,
    /// `c` with `cψ` pure, when one exists.
    pub scale: Option<f64>,
    /// `λ_{kl}` with `(η̂_{kl})² = λ_{kl}·Id`, where that holds.
    pub lambdas: Vec<Option<f64>>,
    /// Residual of the `r ≥ 3` compatibility condition at the scaled spinor.
    pub compatibility_residual: Option<f64>,
}

/// Checks whether some positive multiple `cψ` is pure.
pub fn purity_check(model: &ReductiveModel, psi: &TwistedSpinor, tol: &Tolerance) -> Result<PurityReport> {
    let eta = eta_forms(model, psi)?;
    let d = model.dim_m();
    let id = DMatrix::<f64>::identity(d, d);
    let mut lambdas = Vec::with_capacity(eta.pairs.len());
    for f in &eta.forms {
        let e = f.transpose();
        let sq = &e * &e;
        let lam = sq.trace() / d as f64;
        let dev = (&sq - &id * lam).amax();
        lambdas.push((dev <= 1e-8 * lam.abs().max(1e-300) && lam < 0.0).then_some(lam));
    }
    let mut report = PurityReport { pure_up_to_scale: false, scale: None, lambdas: lambdas.clone(), compatibility_residual: None };
    if lambdas.is_empty() || lambdas.iter().any(|l| l.is_none()) {
        return Ok(report);
    }
    let l0 = lambdas[0].expect("checked");
    if lambdas.iter().any(|l| (l.expect("checked") - l0).abs() > 1e-8 * l0.abs()) {
        return Ok(report);
    }
    let c = l0.abs().powf(-0.25);
    report.scale = Some(c);
    if model.r() >= 3 {
        let res = compatibility_residual(model, psi, &eta, c)?;
        report.compatibility_residual = Some(res);
        report.pure_up_to_scale = res <= tol.residual_tol;
    } else {
        report.pure_up_to_scale = true;
    }
    Ok(report)
}

/// `max_{kl} ‖(η^{cψ}_{kl} + 2ê_k·ê_l)·(cψ)‖ / ‖cψ‖`, where the 2-form acts
/// by `Σ_{a<b} η(f_a, f_b) f_a·f_b`.
fn compatibility_residual(model: &ReductiveModel, psi: &TwistedSpinor, eta: &EtaData, c: f64) -> Result<f64> {
    let shape = psi.shape();
    let d = model.dim_m();
    let cpsi = psi.scale(C64::new(c, 0.0));
    let u = tangent_units(model, &cpsi)?;
    let mut worst: f64 = 0.0;
    for (&(k, l), f) in eta.pairs.iter().zip(&eta.forms) {
        let op = aux_pair_operator(shape, k, l)?;
        let mut acc = TwistedSpinor::from_vector(shape, op.apply(cpsi.vector())?.scale(C64::new(2.0, 0.0)))?;
        for a in 0..d {
            for b in (a + 1)..d {
                let w = c * c * f[(a, b)];
                if w != 0.0 {
                    let term = u[b].tangent_clifford(label_of(d, a))?;
                    acc = acc.axpy(C64::new(w, 0.0), &term)?;
                }
            }
        }
        worst = worst.max(acc.norm() / cpsi.norm());
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParallelReport {
    pub parallel: bool,
    pub max_residual: f64,
}

/// Evaluates `(Λ̃ ⊗ Λ̃′^{⊗m})(X)·ψ` for every `X` in the `𝔪` basis.
pub fn parallel_check(psi: &TwistedSpinor, lambda: &NomizuMap, tol: &Tolerance) -> Result<ParallelReport> {
    let nrm = psi.norm();
    if nrm == 0.0 {
        return Err(Error::InvalidInput("zero spinor".into()));
    }
    let mut worst: f64 = 0.0;
    for (t, a) in lambda.tangent.iter().zip(&lambda.aux) {
        worst = worst.max(twisted_apply(t, a, psi)?.norm());
    }
    Ok(ParallelReport { parallel: worst <= tol.residual_tol * nrm, max_residual: worst / nrm })
}

#[derive(Clone, Debug, PartialEq)]
pub struct KillingSolution {
    pub a: DMatrix<f64>,
    /// `‖Λ̃(X)ψ − A(X)·ψ‖` summed over the basis, relative to `‖ψ‖`.
    pub residual: f64,
}

/// Least-squares fit of a symmetric `A` with `Λ̃(X)·ψ = A(X)·ψ`.
pub fn generalized_killing_fit(model: &ReductiveModel, psi: &TwistedSpinor, lambda: &NomizuMap, tol: &Tolerance) -> Result<KillingSolution> {
    let nrm = psi.norm();
    if nrm == 0.0 {
        return Err(Error::InvalidInput("zero spinor".into()));
    }
    let d = model.dim_m();
    let u = tangent_units(model, psi)?;
    let lhs: Vec<SparseVector> = lambda
        .tangent
        .iter()
        .zip(&lambda.aux)
        .map(|(t, a)| twisted_apply(t, a, psi).map(|x| x.vector().clone()))
        .collect::<Result<_>>()?;
    // Rows: (equation i, support index, re/im).
    let mut support: Vec<usize> = u
        .iter()
        .flat_map(|x| x.vector().entries().iter().map(|e| e.0))
        .chain(lhs.iter().flat_map(|x| x.entries().iter().map(|e| e.0)))
        .collect();
    support.sort_unstable();
    support.dedup();
    let s = support.len();
    let pos = |idx: usize| support.binary_search(&idx).expect("in support");
    let unknowns: Vec<(usize, usize)> = (0..d).flat_map(|i| (i..d).map(move |j| (i, j))).collect();
    let rows = d * s * 2;
    let mut a = DMatrix::<f64>::zeros(rows, unknowns.len());
    let mut b = DVector::<f64>::zeros(rows);
    let put = |eq: usize, col: usize, v: &SparseVector, a: &mut DMatrix<f64>| {
        for &(idx, z) in v.entries() {
            let row = (eq * s + pos(idx)) * 2;
            a[(row, col)] += z.re;
            a[(row + 1, col)] += z.im;
        }
    };
    for (col, &(i, j)) in unknowns.iter().enumerate() {
        // A[i][j] = A[j][i] enters A(f_j) via f_i and A(f_i) via f_j.
        put(j, col, u[i].vector(), &mut a);
        if i != j {
            put(i, col, u[j].vector(), &mut a);
        }
    }
    for (eq, v) in lhs.iter().enumerate() {
        for &(idx, z) in v.entries() {
            let row = (eq * s + pos(idx)) * 2;
            b[row] += z.re;
            b[row + 1] += z.im;
        }
    }
    let (x, res) = real_lstsq(&a, &b, tol.rank_tol);
    let mut am = DMatrix::zeros(d, d);
    for (col, &(i, j)) in unknowns.iter().enumerate() {
        am[(i, j)] = x[col];
        am[(j, i)] = x[col];
    }
    Ok(KillingSolution { a: am, residual: res / nrm })
}

/// The fit, when its residual is within `residual_tol`.
pub fn generalized_killing_solve(model: &ReductiveModel, psi: &TwistedSpinor, lambda: &NomizuMap, tol: &Tolerance) -> Result<Option<KillingSolution>> {
    let fit = generalized_killing_fit(model, psi, lambda, tol)?;
    Ok((fit.residual <= tol.residual_tol).then_some(fit))
}

/// Deterministic sample of `(α:β)` on the projective line: 32 points plus
/// `(1:i)` and `(1:−i)`.
pub fn projective_sample() -> Vec<(C64, C64)> {
    let mut out = Vec::with_capacity(34);
    for a in 0..4 {
        let theta = std::f64::consts::FRAC_PI_2 * (a as f64 + 0.5) / 4.0;
        for b in 0..8 {
            let phi = std::f64::consts::TAU * b as f64 / 8.0;
            out.push((C64::new(theta.cos(), 0.0), C64::from_polar(theta.sin(), phi)));
        }
    }
    out.push((C64::new(1.0, 0.0), C64::new(0.0, 1.0)));
    out.push((C64::new(1.0, 0.0), C64::new(0.0, -1.0)));
    out
}

/// Killing fits over `αψ₊ + βψ₋` for the sampled `(α:β)`.
pub fn killing_family_scan(
    model: &ReductiveModel,
    plus: &TwistedSpinor,
    minus: &TwistedSpinor,
    lambda: &NomizuMap,
    tol: &Tolerance,
) -> Result<Vec<((C64, C64), KillingSolution)>> {
    projective_sample()
        .into_iter()
        .map(|(al, be)| {
            let psi = plus.scale(al).axpy(be, minus)?;
            Ok(((al, be), generalized_killing_fit(model, &psi, lambda, tol)?))
        })
        .collect()
}

/// `Σ_p y_{2p} ∧ y_{2p+1}` on `Σ_{4n+2}` (symplectic CP^{2n+1}).
pub fn symplectic_omega(n: usize) -> Result<Spinor> {
    let dim = 4 * n + 2;
    let mut w = Spinor::zero(dim);
    for p in 1..=n {
        w = w.add(&Spinor::y(dim, &[2 * p, 2 * p + 1])?)?;
    }
    Ok(w)
}

/// `Σ_p y_{2p−1} ∧ y_{2p}` on `Σ_{4n}` (HP^n with basis `e₄, …, e_{4n+3}`).
pub fn hpn_omega(n: usize) -> Result<Spinor> {
    let dim = 4 * n;
    let mut w = Spinor::zero(dim);
    for p in 1..=n {
        w = w.add(&Spinor::y(dim, &[2 * p - 1, 2 * p])?)?;
    }
    Ok(w)
}

/// `ω^k` by repeated wedge products; `ω⁰ = 1`.
pub fn omega_power(omega: &Spinor, k: usize) -> Result<Spinor> {
    let mut out = Spinor::basis(omega.n(), 0)?;
    for _ in 0..k {
        out = out.wedge(omega)?;
    }
    Ok(out)
}

/// `y₁ ∧ ⋯ ∧ y_n` on `Σ_{2n}`.
pub fn top_form(n: usize) -> Result<Spinor> {
    Spinor::basis(2 * n, ((1u64 << n) - 1) as u32)
}

/// Orthogonal projection residual of `v` onto the span of an orthonormal basis.
pub fn projection_residual(v: &TwistedSpinor, basis: &[TwistedSpinor]) -> Result<f64> {
    let mut rest = v.clone();
    for b in basis {
        let c = v.herm(b)?;
        rest = rest.axpy(-c, b)?;
    }
    Ok(rest.norm() / v.norm())
}
