use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spinr::clifford::*;
use spinr::C64;
use std::collections::BTreeMap;

fn labels(n: usize) -> Vec<usize> {
    (0..n).map(|p| label_of(n, p)).collect()
}

fn random_spinor(rng: &mut ChaCha8Rng, n: usize) -> Spinor {
    let dim = 1u32 << half(n);
    let coeffs: BTreeMap<u32, C64> =
        (0..dim).map(|m| (m, C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))).collect();
    Spinor::from_map(n, coeffs)
}

fn random_skew(rng: &mut ChaCha8Rng, n: usize) -> SpinAlgebraElement {
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let x: f64 = rng.gen_range(-1.0..1.0);
            m[(i, j)] = x;
            m[(j, i)] = -x;
        }
    }
    SpinAlgebraElement::from_skew_matrix(&m, 0.0).unwrap()
}

#[test]
fn clifford_relations_hold_exactly() {
    for n in 1..=11usize {
        for mask in 0..(1u32 << half(n)) {
            let psi = Spinor::basis(n, mask).unwrap();
            for &i in &labels(n) {
                for &j in &labels(n) {
                    let ij = clifford_apply(i, &clifford_apply(j, &psi).unwrap()).unwrap();
                    let ji = clifford_apply(j, &clifford_apply(i, &psi).unwrap()).unwrap();
                    let sum = ij.add(&ji).unwrap();
                    let want = if i == j { psi.scale(C64::new(-2.0, 0.0)) } else { Spinor::zero(n) };
                    assert_eq!(sum.coeffs().iter().filter(|(_, z)| z.norm() != 0.0).count(), want.coeffs().len(), "n={n} e{i}e{j}");
                    for (m, z) in want.coeffs() {
                        assert_eq!(sum.get(*m), *z, "n={n} e{i}e{j} on {mask}");
                    }
                }
            }
        }
    }
}

#[test]
fn spin_lift_is_a_homomorphism() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in [4usize, 6, 9, 12, 16] {
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let a = random_skew(&mut rng, n);
            let b = random_skew(&mut rng, n);
            let lhs = a.bracket(&b).unwrap().lift_operator();
            let rhs = a.lift_operator().commutator(&b.lift_operator()).unwrap();
            worst = worst.max(lhs.axpy(C64::new(-1.0, 0.0), &rhs).unwrap().max_abs());
        }
        assert!(worst <= 1e-9, "n={n}: {worst:e}");
    }
}

#[test]
fn skew_matrix_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in 2..8 {
        let a = random_skew(&mut rng, n);
        let back = SpinAlgebraElement::from_skew_matrix(&a.to_skew_matrix(), 0.0).unwrap();
        assert_eq!(a, back);
    }
}

#[test]
fn twisted_operator_matches_apply() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let shape = TwistShape::new(5, 3, 3).unwrap();
    let t = random_skew(&mut rng, 5);
    let a = random_skew(&mut rng, 3);
    let op = twisted_operator(shape, &t, &a).unwrap();
    let v: Vec<C64> = (0..shape.dim()).map(|_| C64::new(rng.gen_range(-1.0..1.0), 0.5)).collect();
    let psi = TwistedSpinor::from_vector(shape, spinr::numlin::SparseVector::from_dense(&v, 0.0)).unwrap();
    let direct = twisted_apply(&t, &a, &psi).unwrap();
    let via_op = op.apply(psi.vector()).unwrap();
    assert!(direct.vector().sub(&via_op).unwrap().norm() < 1e-12);
}

#[test]
fn tensor_of_basis_spinors_packs_masks() {
    let shape = TwistShape::new(6, 3, 3).unwrap();
    let t = Spinor::basis(6, 0b101).unwrap();
    let aux = [Spinor::basis(3, 1).unwrap(), Spinor::basis(3, 0).unwrap(), Spinor::basis(3, 1).unwrap()];
    let psi = TwistedSpinor::tensor(shape, &t, &aux).unwrap();
    let terms: Vec<_> = psi.terms().collect();
    assert_eq!(terms, vec![(0b101, vec![1, 0, 1], C64::new(1.0, 0.0))]);
}

#[test]
fn even_twist_counts_are_rejected() {
    assert!(TwistShape::new(4, 3, 2).is_err());
    assert!(TwistShape::new(4, 3, 5).is_ok());
}

proptest! {
    #[test]
    fn generators_are_skew_hermitian(n in 1usize..10, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phi = random_spinor(&mut rng, n);
        let psi = random_spinor(&mut rng, n);
        for l in labels(n) {
            let lhs = herm(&clifford_apply(l, &phi).unwrap(), &psi).unwrap();
            let rhs = herm(&phi, &clifford_apply(l, &psi).unwrap()).unwrap();
            prop_assert!((lhs + rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn spin_lift_is_skew_hermitian(n in 2usize..10, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_skew(&mut rng, n);
        let op = a.lift_operator();
        let sum = op.add(&op.adjoint()).unwrap();
        prop_assert!(sum.max_abs() < 1e-12);
    }

    #[test]
    fn pack_unpack_round_trip(t in 0u32..8, a0 in 0u32..2, a1 in 0u32..2, a2 in 0u32..2) {
        let shape = TwistShape::new(7, 3, 3).unwrap();
        let idx = shape.pack(t, &[a0, a1, a2]);
        prop_assert_eq!(shape.unpack(idx), (t, vec![a0, a1, a2]));
    }

    #[test]
    fn wedge_is_graded_commutative(a in 0u32..64, b in 0u32..64) {
        let b = b & !a;
        let sign = (a.count_ones() * b.count_ones()) % 2;
        let ab = wedge_sign(a, b);
        let ba = wedge_sign(b, a);
        prop_assert_eq!(ab * ba, if sign == 0 { 1.0 } else { -1.0 });
    }
}
