use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use spinr::numlin::*;
use spinr::C64;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

prop_compose! {
    fn dense_vec(dim: usize)(v in prop::collection::vec((-3i32..4, -3i32..4), dim)) -> Vec<C64> {
        v.into_iter().map(|(a, b)| c(a as f64, b as f64)).collect()
    }
}

proptest! {
    #[test]
    fn axpy_matches_dense(x in dense_vec(12), y in dense_vec(12), re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let s = c(re, im);
        let sx = SparseVector::from_dense(&x, 0.0);
        let sy = SparseVector::from_dense(&y, 0.0);
        let got = sx.axpy(s, &sy, 0.0).unwrap().to_dense();
        for i in 0..12 {
            prop_assert!((got[i] - (x[i] + s * y[i])).norm() < 1e-12);
        }
    }

    #[test]
    fn herm_is_conjugate_linear_in_second_slot(x in dense_vec(8), y in dense_vec(8)) {
        let sx = SparseVector::from_dense(&x, 0.0);
        let sy = SparseVector::from_dense(&y, 0.0);
        let i = c(0.0, 1.0);
        prop_assert!((sx.herm(&sy.scale(i)) + i * sx.herm(&sy)).norm() < 1e-12);
        prop_assert!((sx.herm(&sy) - sy.herm(&sx).conj()).norm() < 1e-12);
    }

    #[test]
    fn joint_kernel_is_verified(entries in prop::collection::vec(-2i32..3, 36)) {
        // Rank-deficient by construction: the last two columns repeat the first two.
        let mut m = DMatrix::<C64>::zeros(6, 8);
        for i in 0..6 {
            for j in 0..6 {
                m[(i, j)] = c(entries[6 * i + j] as f64, 0.0);
            }
            m[(i, 6)] = m[(i, 0)];
            m[(i, 7)] = m[(i, 1)];
        }
        let op = SparseOperator::from_dense(&m);
        let tol = Tolerance::default();
        let k = joint_kernel(std::slice::from_ref(&op), &tol).unwrap();
        prop_assert!(k.len() >= 2);
        prop_assert!(verify_kernel(std::slice::from_ref(&op), &k, &tol).is_ok());
    }
}

#[test]
fn sparse_operator_algebra() {
    let a = SparseOperator::from_dense(&DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]));
    let b = a.adjoint();
    let h = a.commutator(&b).unwrap().to_dense();
    assert_eq!(h, DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]));
    assert!(!a.is_diagonal());
    assert!(SparseOperator::identity(3).is_diagonal());
}

#[test]
fn kernel_within_restricts_to_subspace() {
    let tol = Tolerance::default();
    let d = SparseOperator::from_real(&DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 1.0, 0.0, 2.0])));
    let within = vec![SparseVector::unit(4, 1), SparseVector::unit(4, 2)];
    let k = kernel_within(std::slice::from_ref(&d), &within, &tol).unwrap();
    assert_eq!(k.len(), 1);
    assert!((k[0].get(2).norm() - 1.0).abs() < 1e-12);
}

#[test]
fn least_squares_recovers_consistent_systems() {
    let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
    let b = DVector::from_vec(vec![2.0, -1.0, 1.0]);
    let (x, res) = real_lstsq(&a, &b, 1e-12);
    assert!((x[0] - 2.0).abs() < 1e-12 && (x[1] + 1.0).abs() < 1e-12);
    assert!(res < 1e-12);
}

#[test]
fn quaternion_units_anticommute() {
    let n = 2;
    let i = qe(Unit::I, ElemKind::F, n, 1, 1);
    let j = qe(Unit::J, ElemKind::F, n, 1, 1);
    let k = qe(Unit::K, ElemKind::F, n, 1, 1);
    let ij = i.mul(&j).unwrap();
    assert!(ij.sub(&k).unwrap().norm() < 1e-12);
    let ji = j.mul(&i).unwrap();
    assert!(ji.add(&k).unwrap().norm() < 1e-12);
}

#[test]
fn tolerance_rejects_nonsense() {
    assert!(Tolerance::new(-1.0, 1e-8, 1e-12).is_err());
    assert!(Tolerance::with_residual(1e-6).is_ok());
}
