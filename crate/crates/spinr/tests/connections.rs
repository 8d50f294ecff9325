use nalgebra::DMatrix;
use spinr::clifford::{Spinor, SpinAlgebraElement, TwistedSpinor};
use spinr::connections::*;
use spinr::numlin::Tolerance;
use spinr::spaces::{build_model, AuxParam, MetricParams, ReductiveModel, SpaceId};
use spinr::spinorcalc::top_form;
use spinr::C64;

fn model(space: SpaceId, n: usize, a: f64, t: f64, aux: AuxParam) -> ReductiveModel {
    build_model(space, n, MetricParams::new(a, t).unwrap(), aux).unwrap()
}

#[test]
fn symmetric_models_have_zero_nomizu_map() {
    let cases = [
        model(SpaceId::CpnHermitian, 2, 0.5, 1.0, AuxParam::Charge(3)),
        model(SpaceId::CpnHermitian, 3, 0.9, 1.0, AuxParam::Charge(4)),
        model(SpaceId::Hpn, 3, 0.5, 1.0, AuxParam::Nontrivial),
        model(SpaceId::Op2, 2, 0.5, 1.0, AuxParam::Nontrivial),
    ];
    for m in &cases {
        let lc = levi_civita_nomizu(m).unwrap();
        assert!(lc.is_zero(), "{}", m.space());
        for x in &lc.tangent {
            assert!(x.to_skew_matrix().amax() <= 1e-12);
        }
    }
}

#[test]
fn closed_form_agrees_with_solver_on_grid() {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for n in [1usize, 2] {
        for a in [0.5, 1.0] {
            for t in [0.5, 1.0, 2.0] {
                let m = model(SpaceId::CpnSymplectic, n, a, t, AuxParam::Charge(2));
                let lc = levi_civita_nomizu(&m).unwrap();
                let cf = symplectic_nomizu_closed_form(n, a, t).unwrap();
                assert_eq!(cf.len(), lc.tangent.len());
                for (x, y) in lc.tangent.iter().zip(&cf) {
                    worst = worst.max((x.to_skew_matrix() - y.to_skew_matrix()).amax());
                }
                count += 1;
            }
        }
    }
    assert_eq!(count, 12);
    assert!(worst <= 1e-9, "{worst:e}");
}

#[test]
fn closed_form_values() {
    let flat = symplectic_nomizu_closed_form(2, 0.7, 1.0).unwrap();
    assert!(flat[0].is_zero() && flat[1].is_zero());
    // Spin coefficient of e4·e6 in Λ̃(ξ2) at (n, a, t) = (1, ½, 2).
    let cf = symplectic_nomizu_closed_form(1, 0.5, 2.0).unwrap();
    let spin_coeff = cf[0].coeff(2, 4) / 2.0;
    assert!((spin_coeff + 1.0 / (2.0 * 2f64.sqrt())).abs() < 1e-14);
}

#[test]
fn nomizu_maps_are_skew() {
    let m = model(SpaceId::CpnSymplectic, 2, 0.6, 1.7, AuxParam::Charge(2));
    for x in &levi_civita_nomizu(&m).unwrap().tangent {
        let s = x.to_skew_matrix();
        assert!((&s + s.transpose()).amax() <= 1e-10);
    }
}

#[test]
fn invariant_aux_nomizu_maps_vanish() {
    let tol = Tolerance::default();
    let cases = [
        model(SpaceId::CpnSymplectic, 1, 0.5, 1.0, AuxParam::Charge(-4)),
        model(SpaceId::CpnSymplectic, 2, 0.5, 2.0, AuxParam::Charge(2)),
        model(SpaceId::CpnHermitian, 2, 0.5, 1.0, AuxParam::Charge(3)),
        model(SpaceId::CpnHermitian, 3, 0.5, 1.0, AuxParam::Charge(4)),
        model(SpaceId::Hpn, 3, 0.5, 1.0, AuxParam::Nontrivial),
    ];
    for m in &cases {
        assert!(invariant_aux_nomizu_space(m, &tol).unwrap().is_empty(), "{} n={}", m.space(), m.n());
    }
}

#[test]
fn hermitian_aux_curvature() {
    for (n, s, a) in [(2usize, 3i64, 0.5), (3, -4, 0.8)] {
        let m = model(SpaceId::CpnHermitian, n, a, 1.0, AuxParam::Charge(s));
        let om = aux_curvature(&m, &NomizuMap::zero(&m).aux).unwrap();
        for p in 1..=n {
            for q in 1..=n {
                let v = om.get(2 * p - 2, 2 * q - 1).coeff(0, 1);
                let want = if p == q { s as f64 / a } else { 0.0 };
                assert!((v - want).abs() < 1e-12, "n={n} p={p} q={q}: {v}");
            }
        }
    }
}

#[test]
fn symplectic_aux_curvature_at_t_one() {
    for n in [1usize, 2] {
        let a = 0.7;
        let s = -2 * (n as i64 + 1);
        let m = model(SpaceId::CpnSymplectic, n, a, 1.0, AuxParam::Charge(s));
        let om = aux_curvature(&m, &NomizuMap::zero(&m).aux).unwrap();
        let v = om.get(0, 1).coeff(0, 1);
        assert!((v - 2.0 * (n + 1) as f64 / a).abs() < 1e-12, "{v}");
    }
}

/// Coordinates of `[h_v, f_x]` in the `𝔪` basis.
fn bracket_hm(m: &ReductiveModel, v: usize, x: usize) -> Vec<f64> {
    let h = m.isotropy_basis()[v].to_skew_matrix();
    (0..m.dim_m()).map(|i| h[(i, x)]).collect()
}

fn omega_at(om: &AuxCurvature, x: &[f64], y: &[f64]) -> DMatrix<f64> {
    let d = om.dim_m();
    let r = om.get(0, 0).n();
    let mut out = DMatrix::zeros(r, r);
    for i in 0..d {
        for j in 0..d {
            let c = x[i] * y[j];
            if c != 0.0 {
                out += om.get(i, j).to_skew_matrix() * c;
            }
        }
    }
    out
}

#[test]
fn aux_curvature_is_antisymmetric_and_equivariant() {
    let cases = [
        model(SpaceId::CpnHermitian, 2, 0.5, 1.0, AuxParam::Charge(3)),
        model(SpaceId::CpnSymplectic, 1, 0.6, 1.4, AuxParam::Charge(2)),
        model(SpaceId::Hpn, 2, 0.5, 1.0, AuxParam::Nontrivial),
    ];
    for m in &cases {
        let om = aux_curvature(m, &NomizuMap::zero(m).aux).unwrap();
        let d = m.dim_m();
        let unit = |i: usize| (0..d).map(|k| if k == i { 1.0 } else { 0.0 }).collect::<Vec<f64>>();
        let mut worst: f64 = 0.0;
        for v in 0..m.dim_h() {
            let av = m.aux_basis()[v].to_skew_matrix();
            for x in 0..d {
                for y in 0..d {
                    let anti = om.get(x, y).add(om.get(y, x)).unwrap();
                    assert!(anti.is_zero());
                    let lhs = omega_at(&om, &bracket_hm(m, v, x), &unit(y)) + omega_at(&om, &unit(x), &bracket_hm(m, v, y));
                    let oxy = om.get(x, y).to_skew_matrix();
                    let rhs = &av * &oxy - &oxy * &av;
                    worst = worst.max((lhs - rhs).amax());
                }
            }
        }
        assert!(worst <= 1e-9, "{}: {worst:e}", m.space());
    }
}

#[test]
fn ricci_direct_values() {
    for n in [2usize, 3] {
        let m = model(SpaceId::CpnHermitian, n, 0.5, 1.0, AuxParam::Charge(n as i64 + 1));
        let c = einstein_constant(&ricci_direct(&m).unwrap()).unwrap();
        assert!((c - 2.0 * (n + 1) as f64).abs() < 1e-9, "{c}");
    }
    let m = model(SpaceId::CpnHermitian, 2, 1.0, 1.0, AuxParam::Charge(3));
    assert!((einstein_constant(&ricci_direct(&m).unwrap()).unwrap() - 3.0).abs() < 1e-9);
    for n in [1usize, 2] {
        let m = model(SpaceId::CpnSymplectic, n, 0.7, 1.0, AuxParam::Charge(2));
        let c = einstein_constant(&ricci_direct(&m).unwrap()).unwrap();
        assert!((c - 2.0 * (n + 1) as f64 / 0.7).abs() < 1e-9, "{c}");
        let squashed = model(SpaceId::CpnSymplectic, n, 0.7, 2.0, AuxParam::Charge(2));
        assert!(einstein_constant(&ricci_direct(&squashed).unwrap()).is_none());
    }
}

#[test]
fn ricci_commutes_with_isotropy() {
    let cases = [
        model(SpaceId::CpnHermitian, 3, 0.5, 1.0, AuxParam::Charge(4)),
        model(SpaceId::CpnSymplectic, 2, 0.8, 1.6, AuxParam::Charge(2)),
        model(SpaceId::Hpn, 2, 0.5, 1.0, AuxParam::Nontrivial),
    ];
    for m in &cases {
        let ric = ricci_direct(m).unwrap();
        for x in m.isotropy_basis() {
            let s = x.to_skew_matrix();
            assert!((&ric * &s - &s * &ric).amax() <= 1e-9, "{}", m.space());
        }
    }
}

#[test]
fn ricci_from_spinor_matches_direct_and_ignores_scale() {
    for n in [2usize, 3] {
        let a = 0.5;
        let m = model(SpaceId::CpnHermitian, n, a, 1.0, AuxParam::Charge(-(n as i64 + 1)));
        let shape = m.shape().unwrap();
        let psi = TwistedSpinor::tensor(shape, &top_form(n).unwrap(), &[Spinor::basis(2, 0).unwrap()]).unwrap();
        let om = aux_curvature(&m, &NomizuMap::zero(&m).aux).unwrap();
        let ric = ricci_from_spinor(&m, &psi, &om).unwrap();
        let direct = ricci_direct(&m).unwrap();
        assert!((&ric - &direct).amax() <= 1e-8 * direct.amax());
        assert!((einstein_constant(&ric).unwrap() - (n + 1) as f64 / a).abs() < 1e-8);
        let twice = ricci_from_spinor(&m, &psi.scale(C64::new(2.0, 0.0)), &om).unwrap();
        assert!((&twice - &ric).amax() <= 1e-12);
    }
}

#[test]
fn nomizu_map_shape_is_checked() {
    let m = model(SpaceId::CpnHermitian, 2, 0.5, 1.0, AuxParam::Charge(3));
    let bad = vec![SpinAlgebraElement::zero(3); m.dim_m()];
    assert!(aux_curvature(&m, &bad).is_err());
    let op2 = model(SpaceId::Op2, 2, 0.5, 1.0, AuxParam::Nontrivial);
    assert!(ricci_direct(&op2).is_err());
}
