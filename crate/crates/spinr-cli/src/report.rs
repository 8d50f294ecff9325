use serde::Serialize;
use spinr::clifford::{Spinor, TwistedSpinor};
use spinr::connections::{einstein_constant, levi_civita_nomizu, ricci_direct};
use spinr::numlin::Tolerance;
use spinr::spaces::{build_model, AuxParam, MetricParams, ReductiveModel, SpaceId};
use spinr::spinorcalc::{
    generalized_killing_solve, invariant_space, killing_family_scan, omega_power, parallel_check, purity_check, symplectic_omega,
};
use spinr::weights::{op2_invariant_space_with, LoweringTable};
use spinr::{Error, Result};
use std::time::Instant;

/// Flags of the `space` subcommand.
#[derive(Clone, Debug)]
pub struct SpaceRequest {
    pub space: SpaceId,
    pub n: usize,
    pub a: f64,
    pub t: f64,
    pub s: Option<i64>,
    pub r: Option<usize>,
    pub m: Option<usize>,
    pub table3: Option<LoweringTable>,
    pub with_basis: bool,
}

impl SpaceRequest {
    pub fn new(space: SpaceId, n: usize) -> Self {
        SpaceRequest { space, n, a: 0.5, t: 1.0, s: None, r: None, m: None, table3: None, with_basis: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Checks {
    pub pure: Option<bool>,
    pub parallel: Option<bool>,
    pub einstein_constant: Option<f64>,
    pub gen_killing: Option<bool>,
}

/// One elementary tensor of a dumped basis vector.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BasisTerm {
    pub tangent_mask: Vec<usize>,
    pub aux_masks: Vec<Vec<usize>>,
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportRecord {
    pub space: String,
    pub group: String,
    pub n: usize,
    pub r: usize,
    pub m: usize,
    pub dim_invariant: usize,
    pub checks: Checks,
    pub tolerance: Tolerance,
    pub runtime_ms: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<Vec<BasisTerm>>>,
}

pub fn group_name(space: SpaceId, n: usize) -> String {
    match space {
        SpaceId::CpnHermitian => format!("SU({})", n + 1),
        SpaceId::CpnSymplectic | SpaceId::Hpn => format!("Sp({})", n + 1),
        SpaceId::Op2 => "F4".to_string(),
    }
}

fn aux_param(req: &SpaceRequest) -> Result<AuxParam> {
    match (req.space, req.s) {
        (SpaceId::CpnHermitian, Some(s)) | (SpaceId::CpnSymplectic, Some(s)) => Ok(AuxParam::Charge(s)),
        (SpaceId::CpnHermitian, None) => Ok(AuxParam::Charge(req.n as i64 + 1)),
        (SpaceId::CpnSymplectic, None) => Ok(AuxParam::Trivial),
        (_, Some(_)) => Err(Error::InvalidInput("--s only applies to the CP spaces".into())),
        (_, None) if req.r == Some(1) => Ok(AuxParam::Trivial),
        (_, None) => Ok(AuxParam::Nontrivial),
    }
}

/// Builds the model described by the flags, applying `--r`/`--m` as a lineage.
pub fn build_requested(req: &SpaceRequest) -> Result<ReductiveModel> {
    let model = build_model(req.space, req.n, MetricParams::new(req.a, req.t)?, aux_param(req)?)?;
    match (req.r, req.m) {
        (None, None) => Ok(model),
        (r, m) => model.with_twist(r.unwrap_or(model.r()), m.unwrap_or(model.m_twists())),
    }
}

fn invariant_basis(model: &ReductiveModel, req: &SpaceRequest, tol: &Tolerance) -> Result<Vec<TwistedSpinor>> {
    match (&req.table3, model.space()) {
        (Some(table), SpaceId::Op2) if model.r() > 1 => op2_invariant_space_with(model, table, tol),
        _ => invariant_space(model, tol),
    }
}

fn all<I: IntoIterator<Item = Result<bool>>>(it: I) -> Result<bool> {
    for x in it {
        if !x? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Purity, parallelism, Einstein constant and generalised Killing verdicts.
/// Checks that are not modelled for a configuration are reported as `None`.
pub fn run_checks(model: &ReductiveModel, basis: &[TwistedSpinor], tol: &Tolerance) -> Result<Checks> {
    let mut checks = Checks { pure: None, parallel: None, einstein_constant: None, gen_killing: None };
    if model.has_brackets() {
        checks.einstein_constant = einstein_constant(&ricci_direct(model)?);
    }
    if basis.is_empty() {
        return Ok(checks);
    }
    let lc = levi_civita_nomizu(model)?;
    checks.parallel = Some(all(basis.iter().map(|psi| parallel_check(psi, &lc, tol).map(|r| r.parallel)))?);
    if model.space() == SpaceId::Op2 {
        // η-forms on Σ₁₆ ⊗ Σ₉^{⊗3} need 36 operators on a 2²⁰-dimensional module.
        return Ok(checks);
    }
    if model.r() >= 2 {
        checks.pure = Some(all(basis.iter().map(|psi| purity_check(model, psi, tol).map(|r| r.pure_up_to_scale)))?);
    }
    checks.gen_killing = Some(if model.space() == SpaceId::CpnSymplectic && model.r() == 1 && model.m_twists() == 1 {
        let (plus, minus) = symplectic_pair(model)?;
        let scan = killing_family_scan(model, &plus, &minus, &lc, tol)?;
        scan.iter().any(|(_, sol)| sol.residual <= tol.residual_tol)
    } else {
        all(basis.iter().map(|psi| generalized_killing_solve(model, psi, &lc, tol).map(|s| s.is_some())))?
    });
    Ok(checks)
}

/// `ψ₊ = ω^{(n+1)/2}` and `ψ₋ = y₁ ∧ ω^{(n−1)/2}` on the untwisted symplectic
/// CP^{2n+1}, n odd.
pub fn symplectic_pair(model: &ReductiveModel) -> Result<(TwistedSpinor, TwistedSpinor)> {
    let n = model.n();
    if n % 2 == 0 {
        return Err(Error::InvalidInput(format!("the spin spinor pair needs odd n, got {n}")));
    }
    let shape = model.shape()?;
    let w = symplectic_omega(n)?;
    let vac = [Spinor::basis(1, 0)?];
    let plus = TwistedSpinor::tensor(shape, &omega_power(&w, (n + 1) / 2)?, &vac)?;
    let y1 = Spinor::y(4 * n + 2, &[1])?;
    let minus = TwistedSpinor::tensor(shape, &y1.wedge(&omega_power(&w, (n - 1) / 2)?)?, &vac)?;
    Ok((plus, minus))
}

pub fn dump_basis(basis: &[TwistedSpinor]) -> Vec<Vec<BasisTerm>> {
    let bits = |mask: u32| (0..32).filter(|j| mask >> j & 1 == 1).map(|j| j + 1).collect::<Vec<usize>>();
    basis
        .iter()
        .map(|psi| {
            let mut terms: Vec<BasisTerm> = psi
                .terms()
                .map(|(t, a, z)| BasisTerm { tangent_mask: bits(t), aux_masks: a.into_iter().map(bits).collect(), re: z.re, im: z.im })
                .collect();
            terms.sort_by(|x, y| (&x.tangent_mask, &x.aux_masks).cmp(&(&y.tangent_mask, &y.aux_masks)));
            terms
        })
        .collect()
}

pub fn cmd_space(req: &SpaceRequest, tol: &Tolerance) -> Result<ReportRecord> {
    let start = Instant::now();
    let model = build_requested(req)?;
    let basis = invariant_basis(&model, req, tol)?;
    let checks = run_checks(&model, &basis, tol)?;
    Ok(ReportRecord {
        space: req.space.to_string(),
        group: group_name(req.space, req.n),
        n: req.n,
        r: model.r(),
        m: model.m_twists(),
        dim_invariant: basis.len(),
        checks,
        tolerance: *tol,
        runtime_ms: start.elapsed().as_millis() as u64,
        basis: req.with_basis.then(|| dump_basis(&basis)),
    })
}

fn opt<T: std::fmt::Display>(x: &Option<T>) -> String {
    x.as_ref().map_or("n/a".to_string(), |v| v.to_string())
}

pub fn markdown(rec: &ReportRecord) -> String {
    let mut s = String::new();
    s.push_str("| space | group | n | r | m | dim | pure | parallel | Einstein | gen. Killing | ms |\n");
    s.push_str("|---|---|---|---|---|---|---|---|---|---|---|\n");
    s.push_str(&format!(
        "| {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} |\n",
        rec.space,
        rec.group,
        rec.n,
        rec.r,
        rec.m,
        rec.dim_invariant,
        opt(&rec.checks.pure),
        opt(&rec.checks.parallel),
        opt(&rec.checks.einstein_constant),
        opt(&rec.checks.gen_killing),
        rec.runtime_ms
    ));
    s
}
