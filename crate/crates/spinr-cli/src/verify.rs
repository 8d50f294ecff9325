use crate::report::symplectic_pair;
use crate::table1::cmd_table1;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spinr::clifford::{clifford_apply, half, label_of, SpinAlgebraElement, Spinor, TwistedSpinor};
use spinr::connections::{
    aux_curvature, einstein_constant, levi_civita_nomizu, ricci_direct, ricci_from_spinor, symplectic_nomizu_closed_form,
    NomizuMap,
};
use spinr::numlin::{rank, SparseVector, Tolerance};
use spinr::spaces::{build_model, AuxParam, MetricParams, ReductiveModel, SpaceId};
use spinr::spinorcalc::*;
use spinr::weights::{
    build_hpn_spinor, build_op2_spinors, hwv_census, so9_root_datum, weight_decomposition, LoweringTable, So9Rep,
};
use spinr::{Result, C64};
use std::str::FromStr;
use std::time::Instant;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Clifford,
    Spaces,
    Connections,
    Spinors,
    Weights,
    All,
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "clifford" => Ok(Suite::Clifford),
            "spaces" => Ok(Suite::Spaces),
            "connections" => Ok(Suite::Connections),
            "spinors" => Ok(Suite::Spinors),
            "weights" => Ok(Suite::Weights),
            "all" => Ok(Suite::All),
            other => Err(format!("unknown suite '{other}'")),
        }
    }
}

/// One line of the verification ledger.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub id: usize,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub runtime_ms: u64,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {} ({} ms): {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.runtime_ms,
            self.detail
        )
    }
}

type Check = fn(&Tolerance) -> Result<(bool, String)>;

const CRITERIA: [(usize, &str, &[Suite], Check); 10] = [
    (1, "Table 1 reproduction", &[Suite::Spaces], table1),
    (2, "hermitian spin^C spinors", &[Suite::Spaces, Suite::Spinors], hermitian_spinors),
    (3, "hermitian purity and parallelism", &[Suite::Spinors], hermitian_pure_parallel),
    (4, "Ricci constants", &[Suite::Connections], ricci_constants),
    (5, "symplectic special spinors", &[Suite::Spinors], symplectic_special),
    (6, "generalised Killing", &[Suite::Spinors], generalized_killing),
    (7, "Nomizu cross-check", &[Suite::Connections], nomizu_grid),
    (8, "HP^n construction", &[Suite::Weights, Suite::Spinors], hpn_construction),
    (9, "OP^2 representation theory", &[Suite::Weights], op2_representation),
    (10, "property suites", &[Suite::Clifford, Suite::Spaces], property_suites),
];

/// Runs the criteria tagged with `suite`, in order. Errors count as failures.
pub fn run_suite(suite: Suite, tol: &Tolerance, mut on_outcome: impl FnMut(&Outcome)) -> Vec<Outcome> {
    let mut out = Vec::new();
    for (id, name, suites, check) in CRITERIA {
        if suite != Suite::All && !suites.contains(&suite) {
            continue;
        }
        let start = Instant::now();
        let (pass, detail) = check(tol).unwrap_or_else(|e| (false, format!("error: {e}")));
        let o = Outcome { id, name, pass, detail, runtime_ms: start.elapsed().as_millis() as u64 };
        on_outcome(&o);
        out.push(o);
    }
    out
}

/// Runs a single criterion by id.
pub fn run_criterion(id: usize, tol: &Tolerance) -> Option<Outcome> {
    let (id, name, _, check) = CRITERIA.into_iter().find(|c| c.0 == id)?;
    let start = Instant::now();
    let (pass, detail) = check(tol).unwrap_or_else(|e| (false, format!("error: {e}")));
    Some(Outcome { id, name, pass, detail, runtime_ms: start.elapsed().as_millis() as u64 })
}

fn model(space: SpaceId, n: usize, a: f64, t: f64, aux: AuxParam) -> Result<ReductiveModel> {
    build_model(space, n, MetricParams::new(a, t)?, aux)
}

fn vacuum(r: usize) -> Result<Spinor> {
    Spinor::basis(r, 0)
}

fn table1(tol: &Tolerance) -> Result<(bool, String)> {
    let start = Instant::now();
    let rows = cmd_table1(tol)?;
    let total = start.elapsed().as_secs_f64();
    let op2 = rows.iter().find(|r| r.space == "op2").map_or(f64::INFINITY, |r| r.runtime_ms as f64 / 1e3);
    let bad: Vec<&str> = rows.iter().filter(|r| !r.matches()).map(|r| r.label.as_str()).collect();
    let pass = bad.is_empty() && total <= 600.0 && op2 <= 300.0;
    Ok((pass, format!("{} rows, mismatches {bad:?}, total {total:.1} s, OP^2 {op2:.1} s", rows.len())))
}

fn hermitian_spinors(tol: &Tolerance) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    let mut pass = true;
    for n in [2usize, 3] {
        let s = n as i64 + 1;
        let m = model(SpaceId::CpnHermitian, n, 0.5, 1.0, AuxParam::Charge(s))?;
        let basis = invariant_space(&m, tol)?;
        let shape = m.shape()?;
        let one = TwistedSpinor::tensor(shape, &vacuum(2 * n)?, &[vacuum(2)?])?;
        let top = TwistedSpinor::tensor(shape, &top_form(n)?, &[Spinor::basis(2, 1)?])?;
        worst = worst.max(projection_residual(&one, &basis)?).max(projection_residual(&top, &basis)?);
        pass &= basis.len() == 2;
        for off in [s + 2, -(s + 2)] {
            let m = model(SpaceId::CpnHermitian, n, 0.5, 1.0, AuxParam::Charge(off))?;
            pass &= invariant_space(&m, tol)?.is_empty();
        }
    }
    pass &= worst <= 1e-8;
    Ok((pass, format!("span residual {:.2e}, s = ±(n+3) empty", worst + 0.0)))
}

fn hermitian_pure_parallel(tol: &Tolerance) -> Result<(bool, String)> {
    let mut count = 0;
    let mut pass = true;
    for n in [2usize, 3] {
        for s in [n as i64 + 1, -(n as i64 + 1)] {
            let m = model(SpaceId::CpnHermitian, n, 0.5, 1.0, AuxParam::Charge(s))?;
            let zero = NomizuMap::zero(&m);
            for psi in invariant_space(&m, tol)? {
                pass &= purity_check(&m, &psi, tol)?.pure_up_to_scale;
                pass &= parallel_check(&psi, &zero, tol)?.parallel;
                count += 1;
            }
        }
    }
    Ok((pass && count == 8, format!("{count} spinors over s = ±(n+1), n = 2, 3")))
}

fn rel_dev(ric: &DMatrix<f64>, c: f64) -> f64 {
    let d = ric.nrows();
    (ric - DMatrix::<f64>::identity(d, d) * c).amax() / c.abs()
}

fn ricci_constants(_tol: &Tolerance) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    let mut pass = true;
    for n in [2usize, 3] {
        for a in [0.5, 0.8] {
            let s = -(n as i64 + 1);
            let m = model(SpaceId::CpnHermitian, n, a, 1.0, AuxParam::Charge(s))?;
            let psi = TwistedSpinor::tensor(m.shape()?, &top_form(n)?, &[vacuum(2)?])?;
            let want = (n + 1) as f64 / a;
            worst = worst.max(spinor_vs_direct(&m, &psi, want)?);
            if a == 0.5 {
                let c = einstein_constant(&ricci_direct(&m)?).unwrap_or(f64::NAN);
                pass &= (c - 2.0 * (n + 1) as f64).abs() <= 1e-8 * c.abs();
            }
        }
    }
    for n in [1usize, 2] {
        let s = -2 * (n as i64 + 1);
        let m = model(SpaceId::CpnSymplectic, n, 0.7, 1.0, AuxParam::Charge(s))?;
        let psi = TwistedSpinor::tensor(m.shape()?, &vacuum(4 * n + 2)?, &[vacuum(2)?])?;
        worst = worst.max(spinor_vs_direct(&m, &psi, 2.0 * (n + 1) as f64 / 0.7)?);
    }
    pass &= worst <= 1e-8;
    Ok((pass, format!("max relative deviation {worst:.2e}")))
}

/// Largest relative deviation among the spinorial Ricci, the direct Ricci and `c·Id`.
fn spinor_vs_direct(m: &ReductiveModel, psi: &TwistedSpinor, c: f64) -> Result<f64> {
    let om = aux_curvature(m, &NomizuMap::zero(m).aux)?;
    let ric = ricci_from_spinor(m, psi, &om)?;
    let direct = ricci_direct(m)?;
    Ok(rel_dev(&ric, c).max(rel_dev(&direct, c)))
}

fn symplectic_power(m: &ReductiveModel, k: usize) -> Result<TwistedSpinor> {
    let w = omega_power(&symplectic_omega(m.n())?, k)?;
    TwistedSpinor::tensor(m.shape()?, &w, &[vacuum(2)?])
}

fn symplectic_special(tol: &Tolerance) -> Result<(bool, String)> {
    let mut pass = true;
    let mut pattern = Vec::new();
    for n in [2usize, 3] {
        let m = model(SpaceId::CpnSymplectic, n, 0.5, 1.0, AuxParam::Charge(-2 * (n as i64 + 1)))?;
        for k in 0..=n {
            let pure = purity_check(&m, &symplectic_power(&m, k)?, tol)?.pure_up_to_scale;
            pass &= pure == (k == 0 || k == n);
            if pure {
                pattern.push(format!("n={n}:k={k}"));
            }
        }
    }
    let s = -4;
    let flat = model(SpaceId::CpnSymplectic, 1, 0.5, 1.0, AuxParam::Charge(s))?;
    let psi = symplectic_power(&flat, 0)?;
    let at_one = parallel_check(&psi, &levi_civita_nomizu(&flat)?, tol)?;
    let squashed = model(SpaceId::CpnSymplectic, 1, 0.5, 2.0, AuxParam::Charge(s))?;
    let at_two = parallel_check(&psi, &levi_civita_nomizu(&squashed)?, tol)?;
    pass &= at_one.parallel && !at_two.parallel && at_two.max_residual >= 1e-3;
    Ok((
        pass,
        format!("pure at {pattern:?}; t=1 residual {:.1e}, t=2 residual {:.3}", at_one.max_residual + 0.0, at_two.max_residual),
    ))
}

fn generalized_killing(tol: &Tolerance) -> Result<(bool, String)> {
    let cp3 = model(SpaceId::CpnSymplectic, 1, 0.5, 1.0, AuxParam::Trivial)?;
    let (plus, minus) = symplectic_pair(&cp3)?;
    let psi = plus.axpy(C64::new(0.0, 1.0), &minus)?;
    let sol = generalized_killing_solve(&cp3, &psi, &levi_civita_nomizu(&cp3)?, tol)?;
    let found = sol.as_ref().map_or(f64::INFINITY, |s| s.residual);
    let cp7 = model(SpaceId::CpnSymplectic, 3, 0.5, 1.0, AuxParam::Trivial)?;
    let (plus, minus) = symplectic_pair(&cp7)?;
    let scan = killing_family_scan(&cp7, &plus, &minus, &levi_civita_nomizu(&cp7)?, tol)?;
    let min = scan.iter().map(|(_, s)| s.residual).fold(f64::INFINITY, f64::min);
    let pass = found <= 1e-8 && scan.len() == 34 && min >= 1e-4;
    Ok((pass, format!("CP^3 residual {found:.1e}; CP^7 min over {} points {min:.3}", scan.len())))
}

fn nomizu_grid(_tol: &Tolerance) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for n in [1usize, 2] {
        for a in [0.5, 1.0] {
            for t in [0.5, 1.0, 2.0] {
                let m = model(SpaceId::CpnSymplectic, n, a, t, AuxParam::Charge(2))?;
                let lc = levi_civita_nomizu(&m)?;
                let cf = symplectic_nomizu_closed_form(n, a, t)?;
                for (x, y) in lc.tangent.iter().zip(&cf) {
                    worst = worst.max((x.to_skew_matrix() - y.to_skew_matrix()).amax());
                }
                count += 1;
            }
        }
    }
    Ok((count == 12 && worst <= 1e-9, format!("{count} grid points, max deviation {worst:.2e}")))
}

fn hpn_construction(tol: &Tolerance) -> Result<(bool, String)> {
    let m = model(SpaceId::Hpn, 3, 0.5, 1.0, AuxParam::Nontrivial)?;
    let psi = build_hpn_spinor(3)?;
    let inv = invariance_residual(&m, &psi)?;
    let basis = invariant_space(&m, tol)?;
    let span = projection_residual(&psi, &basis)?;
    let pure = purity_check(&m, &psi, tol)?.pure_up_to_scale;
    let parallel = parallel_check(&psi, &NomizuMap::zero(&m), tol)?.parallel;
    let pass = inv <= 1e-9 && basis.len() == 1 && span <= 1e-8 && pure && parallel;
    Ok((pass, format!("invariance {:.1e}, dim {}, span residual {span:.1e}, pure {pure}, parallel {parallel}", inv + 0.0, basis.len())))
}

fn census(rep: So9Rep, tol: &Tolerance) -> Result<Vec<([i64; 4], usize)>> {
    let d = so9_root_datum(rep)?;
    let spaces = weight_decomposition(&d.cartan_ops, tol)?;
    let mut c = hwv_census(&d, &spaces, tol)?;
    c.sort();
    Ok(c)
}

fn sorted(mut v: Vec<([i64; 4], usize)>) -> Vec<([i64; 4], usize)> {
    v.sort();
    v
}

fn op2_representation(tol: &Tolerance) -> Result<(bool, String)> {
    let s16 = census(So9Rep::Sigma16, tol)? == sorted(vec![([1, 0, 0, 1], 1), ([0, 0, 1, 0], 1), ([2, 0, 0, 0], 1)]);
    let s9 = census(So9Rep::Sigma9Tensor(3), tol)?
        == sorted(vec![([0, 0, 0, 1], 5), ([0, 0, 0, 3], 1), ([0, 0, 1, 1], 2), ([0, 1, 0, 1], 3), ([1, 0, 0, 1], 4)]);
    let c = build_op2_spinors(&LoweringTable::embedded(), tol)?;
    let model = build_model(SpaceId::Op2, 2, MetricParams::default(), AuxParam::Nontrivial)?;
    let zero = NomizuMap::zero(&model);
    let worst = c.residuals.iter().cloned().fold(0.0, f64::max);
    let mut parallel = true;
    for psi in &c.spinors {
        parallel &= parallel_check(psi, &zero, tol)?.parallel;
    }
    let vecs: Vec<SparseVector> = c.spinors.iter().map(|s| s.vector().clone()).collect();
    let independent = rank(&vecs, tol.rank_tol) == c.spinors.len();
    let pass = s16 && s9 && c.word_rank == 128 && c.spinors.len() == 4 && independent && worst <= 1e-8 && parallel;
    Ok((
        pass,
        format!(
            "Σ16 census {s16}, Σ9^3 census {s9}, word rank {}, {} spinors, invariance {worst:.1e}, parallel {parallel}",
            c.word_rank,
            c.spinors.len()
        ),
    ))
}

fn random_skew(rng: &mut ChaCha8Rng, n: usize) -> Result<SpinAlgebraElement> {
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let x: f64 = rng.gen_range(-1.0..1.0);
            m[(i, j)] = x;
            m[(j, i)] = -x;
        }
    }
    SpinAlgebraElement::from_skew_matrix(&m, 0.0)
}

/// Exact Clifford relations `e_i e_j + e_j e_i = −2δ_ij` on every basis spinor.
fn clifford_exact(n: usize) -> Result<bool> {
    let labels: Vec<usize> = (0..n).map(|p| label_of(n, p)).collect();
    for mask in 0..(1u32 << half(n)) {
        let psi = Spinor::basis(n, mask)?;
        for &i in &labels {
            for &j in &labels {
                let ij = clifford_apply(i, &clifford_apply(j, &psi)?)?;
                let ji = clifford_apply(j, &clifford_apply(i, &psi)?)?;
                let sum = ij.add(&ji)?;
                let want = if i == j { psi.scale(C64::new(-2.0, 0.0)) } else { Spinor::zero(n) };
                let support = sum.coeffs().values().filter(|z| z.norm() != 0.0).count();
                if support != want.coeffs().len() || want.coeffs().iter().any(|(m, z)| sum.get(*m) != *z) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

fn dim(m: &ReductiveModel, tol: &Tolerance) -> Result<usize> {
    Ok(invariant_space(m, tol)?.len())
}

fn property_suites(tol: &Tolerance) -> Result<(bool, String)> {
    let mut exact = true;
    for n in 1..=11 {
        exact &= clifford_exact(n)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut hom: f64 = 0.0;
    for n in [4usize, 6, 9, 12, 16] {
        for _ in 0..100 {
            let a = random_skew(&mut rng, n)?;
            let b = random_skew(&mut rng, n)?;
            let lhs = a.bracket(&b)?.lift_operator();
            let rhs = a.lift_operator().commutator(&b.lift_operator())?;
            hom = hom.max(lhs.axpy(C64::new(-1.0, 0.0), &rhs)?.max_abs());
        }
    }
    let cp2 = model(SpaceId::CpnHermitian, 2, 0.5, 1.0, AuxParam::Charge(3))?;
    let cp3 = model(SpaceId::CpnSymplectic, 1, 0.5, 1.0, AuxParam::Trivial)?;
    let (b2, b3) = (dim(&cp2, tol)?, dim(&cp3, tol)?);
    let lineage = [cp2.with_twist(3, 1)?, cp2.with_twist(2, 3)?]
        .iter()
        .map(|m| dim(m, tol).map(|d| d >= b2))
        .chain([cp3.with_twist(2, 1)?, cp3.with_twist(1, 3)?].iter().map(|m| dim(m, tol).map(|d| d >= b3)))
        .collect::<Result<Vec<bool>>>()?
        .into_iter()
        .all(|x| x);
    // invariant_space re-verifies every kernel vector and errors otherwise;
    // repeat the check explicitly on a twisted model.
    let hp3 = model(SpaceId::Hpn, 3, 0.5, 1.0, AuxParam::Nontrivial)?;
    let reverified = verify_invariant(&hp3, &invariant_space(&hp3, tol)?, tol).is_ok();
    let pass = exact && hom <= 1e-9 && lineage && reverified;
    Ok((pass, format!("Clifford exact {exact}, homomorphism {hom:.1e}, lineage {lineage}, re-verified {reverified}")))
}
