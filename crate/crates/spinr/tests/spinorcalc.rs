use nalgebra::DMatrix;
use spinr::clifford::{Spinor, TwistedSpinor};
use spinr::connections::{levi_civita_nomizu, NomizuMap};
use spinr::numlin::Tolerance;
use spinr::spaces::{build_model, AuxParam, MetricParams, ReductiveModel, SpaceId};
use spinr::spinorcalc::*;
use spinr::weights::build_hpn_spinor;
use spinr::C64;

fn model(space: SpaceId, n: usize, a: f64, t: f64, aux: AuxParam) -> ReductiveModel {
    build_model(space, n, MetricParams::new(a, t).unwrap(), aux).unwrap()
}

fn dim(m: &ReductiveModel) -> usize {
    invariant_space(m, &Tolerance::default()).unwrap().len()
}

fn vacuum(r: usize) -> Spinor {
    Spinor::basis(r, 0).unwrap()
}

fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Endomorphism `Z ↦ g(X,Z)Y − g(Y,Z)X` of `f_x ∧ f_y`.
fn wedge(d: usize, x: usize, y: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(d, d);
    m[(y, x)] = 1.0;
    m[(x, y)] = -1.0;
    m
}

fn symplectic_power(m: &ReductiveModel, k: usize) -> TwistedSpinor {
    let n = m.n();
    let w = omega_power(&symplectic_omega(n).unwrap(), k).unwrap();
    TwistedSpinor::tensor(m.shape().unwrap(), &w, &[vacuum(2)]).unwrap()
}

#[test]
fn hermitian_dimensions() {
    for n in [2usize, 3] {
        let s = n as i64 + 1;
        assert_eq!(dim(&model(SpaceId::CpnHermitian, n, 0.5, 1.0, AuxParam::Charge(s))), 2);
        assert_eq!(dim(&model(SpaceId::CpnHermitian, n, 0.5, 1.0, AuxParam::Charge(-s))), 2);
        for off in [s + 2, -(s + 2), s - 2, -(s - 2)] {
            assert_eq!(dim(&model(SpaceId::CpnHermitian, n, 0.5, 1.0, AuxParam::Charge(off))), 0, "n={n} s={off}");
        }
    }
    assert_eq!(dim(&model(SpaceId::CpnHermitian, 3, 0.5, 1.0, AuxParam::Trivial)), 0);
}

#[test]
fn hermitian_basis_is_the_expected_pair() {
    for n in [2usize, 3] {
        let m = model(SpaceId::CpnHermitian, n, 0.5, 1.0, AuxParam::Charge(n as i64 + 1));
        let basis = invariant_space(&m, &Tolerance::default()).unwrap();
        let shape = m.shape().unwrap();
        let one = TwistedSpinor::tensor(shape, &vacuum(2 * n), &[vacuum(2)]).unwrap();
        let top = TwistedSpinor::tensor(shape, &top_form(n).unwrap(), &[Spinor::basis(2, 1).unwrap()]).unwrap();
        assert!(projection_residual(&one, &basis).unwrap() <= 1e-8);
        assert!(projection_residual(&top, &basis).unwrap() <= 1e-8);
    }
}

#[test]
fn symplectic_dimensions() {
    let tol = Tolerance::default();
    let cp3 = model(SpaceId::CpnSymplectic, 1, 0.5, 1.0, AuxParam::Trivial);
    let basis = invariant_space(&cp3, &tol).unwrap();
    assert_eq!(basis.len(), 2);
    let shape = cp3.shape().unwrap();
    let plus = TwistedSpinor::tensor(shape, &symplectic_omega(1).unwrap(), &[vacuum(1)]).unwrap();
    let minus = TwistedSpinor::tensor(shape, &Spinor::y(6, &[1]).unwrap(), &[vacuum(1)]).unwrap();
    assert!(projection_residual(&plus, &basis).unwrap() <= 1e-8);
    assert!(projection_residual(&minus, &basis).unwrap() <= 1e-8);
    assert_eq!(dim(&model(SpaceId::CpnSymplectic, 2, 0.5, 1.0, AuxParam::Charge(-6))), 2);
    assert_eq!(dim(&model(SpaceId::CpnSymplectic, 3, 0.5, 1.0, AuxParam::Trivial)), 2);
}

#[test]
fn quaternionic_dimensions() {
    let hp3 = model(SpaceId::Hpn, 3, 0.5, 1.0, AuxParam::Nontrivial);
    let basis = invariant_space(&hp3, &Tolerance::default()).unwrap();
    assert_eq!(basis.len(), 1);
    let psi = build_hpn_spinor(3).unwrap();
    assert!(projection_residual(&psi, &basis).unwrap() <= 1e-8);
    let hp2 = model(SpaceId::Hpn, 2, 0.5, 1.0, AuxParam::Nontrivial);
    for m in [1, 3, 5] {
        assert_eq!(dim(&hp2.with_twist(3, m).unwrap()), 0, "m={m}");
    }
    assert_eq!(dim(&model(SpaceId::Hpn, 3, 0.5, 1.0, AuxParam::Trivial)), 0);
}

#[test]
fn lineage_is_monotone() {
    let cp2 = model(SpaceId::CpnHermitian, 2, 0.5, 1.0, AuxParam::Charge(3));
    let base = dim(&cp2);
    assert!(base <= dim(&cp2.with_twist(3, 1).unwrap()));
    assert!(base <= dim(&cp2.with_twist(2, 3).unwrap()));
    let cp3 = model(SpaceId::CpnSymplectic, 1, 0.5, 1.0, AuxParam::Trivial);
    let base = dim(&cp3);
    assert!(base <= dim(&cp3.with_twist(2, 1).unwrap()));
    assert!(base <= dim(&cp3.with_twist(1, 3).unwrap()));
}

#[test]
fn hermitian_eta_is_the_complex_structure() {
    for n in [2usize, 3] {
        let m = model(SpaceId::CpnHermitian, n, 0.5, 1.0, AuxParam::Charge(-(n as i64 + 1)));
        let psi = TwistedSpinor::tensor(m.shape().unwrap(), &top_form(n).unwrap(), &[vacuum(2)]).unwrap();
        let e = eta_forms(&m, &psi).unwrap().endo(0, 1).unwrap();
        let mut want = DMatrix::zeros(2 * n, 2 * n);
        for p in 0..n {
            want += wedge(2 * n, 2 * p, 2 * p + 1);
        }
        assert!((e - want).amax() < 1e-12);
    }
}

#[test]
fn symplectic_eta_matches_display() {
    for n in [2usize, 3] {
        let m = model(SpaceId::CpnSymplectic, n, 0.7, 1.3, AuxParam::Charge(2));
        let d = m.dim_m();
        for k in 0..=n {
            let e = eta_forms(&m, &symplectic_power(&m, k)).unwrap().endo(0, 1).unwrap();
            let mut sigma = DMatrix::zeros(d, d);
            for p in 0..n {
                let o = 2 + 4 * p;
                sigma += wedge(d, o, o + 1) + wedge(d, o + 2, o + 3);
            }
            let c = binom(n, k);
            let k1 = if k == 0 { 0.0 } else { binom(n - 1, k - 1) };
            let want = (wedge(d, 0, 1) * c + sigma * (c - 2.0 * k1)) * -(factorial(k).powi(2));
            assert!((e - want).amax() < 1e-10, "n={n} k={k}");
        }
    }
}

#[test]
fn eta_forms_are_antisymmetric_and_invariant() {
    let m = model(SpaceId::Hpn, 3, 0.5, 1.0, AuxParam::Nontrivial);
    let psi = build_hpn_spinor(3).unwrap();
    let eta = eta_forms(&m, &psi).unwrap();
    let r = m.r();
    for f in eta.forms() {
        assert!((f + f.transpose()).amax() <= 1e-10);
    }
    // ad(X)ᵀη + η ad(X) equals the rotation of the (k,l) indices by aux(X).
    let mut worst: f64 = 0.0;
    for v in 0..m.dim_h() {
        let ad = m.isotropy_basis()[v].to_skew_matrix();
        let aux = m.aux_basis()[v].to_skew_matrix();
        let get = |k: usize, l: usize| -> DMatrix<f64> {
            if k == l {
                DMatrix::zeros(m.dim_m(), m.dim_m())
            } else if k < l {
                eta.form(k, l).unwrap().clone()
            } else {
                -eta.form(l, k).unwrap()
            }
        };
        for k in 0..r {
            for l in (k + 1)..r {
                let f = get(k, l);
                let mut lhs = ad.transpose() * &f + &f * &ad;
                for j in 0..r {
                    lhs += get(j, l) * aux[(j, k)] + get(k, j) * aux[(j, l)];
                }
                worst = worst.max(lhs.amax());
            }
        }
    }
    assert!(worst <= 1e-9, "{worst:e}");
}

#[test]
fn hermitian_spinors_are_pure_and_parallel() {
    let tol = Tolerance::default();
    for n in [2usize, 3] {
        for s in [n as i64 + 1, -(n as i64 + 1)] {
            let m = model(SpaceId::CpnHermitian, n, 0.5, 1.0, AuxParam::Charge(s));
            let lc = levi_civita_nomizu(&m).unwrap();
            for psi in invariant_space(&m, &tol).unwrap() {
                assert!(purity_check(&m, &psi, &tol).unwrap().pure_up_to_scale);
                assert!(parallel_check(&psi, &lc, &tol).unwrap().parallel);
            }
        }
    }
}

#[test]
fn symplectic_purity_only_at_extremes() {
    let tol = Tolerance::default();
    for n in [2usize, 3] {
        let m = model(SpaceId::CpnSymplectic, n, 0.5, 1.0, AuxParam::Charge(-2 * (n as i64 + 1)));
        for k in 0..=n {
            let pure = purity_check(&m, &symplectic_power(&m, k), &tol).unwrap().pure_up_to_scale;
            assert_eq!(pure, k == 0 || k == n, "n={n} k={k}");
        }
    }
}

#[test]
fn symplectic_parallel_only_at_t_one() {
    let tol = Tolerance::default();
    for n in [1usize, 2] {
        let s = -2 * (n as i64 + 1);
        let flat = model(SpaceId::CpnSymplectic, n, 0.5, 1.0, AuxParam::Charge(s));
        let psi = symplectic_power(&flat, 0);
        assert!(invariance_residual(&flat, &psi).unwrap() <= 1e-12);
        assert!(parallel_check(&psi, &levi_civita_nomizu(&flat).unwrap(), &tol).unwrap().parallel);
        let squashed = model(SpaceId::CpnSymplectic, n, 0.5, 2.0, AuxParam::Charge(s));
        let rep = parallel_check(&psi, &levi_civita_nomizu(&squashed).unwrap(), &tol).unwrap();
        assert!(!rep.parallel && rep.max_residual >= 1e-3);
    }
}

#[test]
fn quaternionic_spinor_is_pure_and_parallel() {
    let tol = Tolerance::default();
    let m = model(SpaceId::Hpn, 3, 0.5, 1.0, AuxParam::Nontrivial);
    let psi = build_hpn_spinor(3).unwrap();
    let rep = purity_check(&m, &psi, &tol).unwrap();
    assert!(rep.pure_up_to_scale, "{rep:?}");
    assert!(parallel_check(&psi, &NomizuMap::zero(&m), &tol).unwrap().parallel);
}

fn cp_family(n: usize) -> (ReductiveModel, TwistedSpinor, TwistedSpinor) {
    let m = model(SpaceId::CpnSymplectic, n, 0.5, 1.0, AuxParam::Trivial);
    let shape = m.shape().unwrap();
    let w = symplectic_omega(n).unwrap();
    let plus = TwistedSpinor::tensor(shape, &omega_power(&w, (n + 1) / 2).unwrap(), &[vacuum(1)]).unwrap();
    let y1 = Spinor::y(4 * n + 2, &[1]).unwrap();
    let minus = TwistedSpinor::tensor(shape, &y1.wedge(&omega_power(&w, (n - 1) / 2).unwrap()).unwrap(), &[vacuum(1)]).unwrap();
    (m, plus, minus)
}

#[test]
fn generalized_killing_exists_only_on_cp3() {
    let tol = Tolerance::default();
    let (m, plus, minus) = cp_family(1);
    let lc = levi_civita_nomizu(&m).unwrap();
    for sign in [1.0, -1.0] {
        let psi = plus.axpy(C64::new(0.0, sign), &minus).unwrap();
        let sol = generalized_killing_solve(&m, &psi, &lc, &tol).unwrap().expect("solution");
        assert!(sol.residual <= 1e-8);
        assert!((&sol.a - sol.a.transpose()).amax() <= 1e-10);
    }
    let (m, plus, minus) = cp_family(3);
    let lc = levi_civita_nomizu(&m).unwrap();
    let scan = killing_family_scan(&m, &plus, &minus, &lc, &tol).unwrap();
    assert_eq!(scan.len(), 34);
    for (_, sol) in scan {
        assert!(sol.residual >= 1e-4);
    }
}

#[test]
fn parallel_spinor_gives_zero_endomorphism() {
    let tol = Tolerance::default();
    let m = model(SpaceId::CpnHermitian, 2, 0.5, 1.0, AuxParam::Charge(3));
    let psi = invariant_space(&m, &tol).unwrap().remove(0);
    let sol = generalized_killing_solve(&m, &psi, &NomizuMap::zero(&m), &tol).unwrap().unwrap();
    assert!(sol.a.amax() <= 1e-12);
}

#[test]
fn zero_spinor_is_rejected() {
    let m = model(SpaceId::CpnHermitian, 2, 0.5, 1.0, AuxParam::Charge(3));
    let zero = TwistedSpinor::zero(m.shape().unwrap());
    assert!(eta_forms(&m, &zero).is_err());
    assert!(purity_check(&m, &zero, &Tolerance::default()).is_err());
}
