//! Property tests for the kernel algebra, linear algebra, and cone membership.

use num_complex::Complex64;
use optdiscrim_core::discrimination::{random_measurement, success_probability, StatePreparation};
use optdiscrim_core::kernel::{compose_par, compose_seq, swap, ExtendedProcess, System};
use optdiscrim_core::linalg::{self, HermitianMatrix, RealMatrix};
use optdiscrim_core::models;
use optdiscrim_core::scenarios;
use optdiscrim_core::symmetry::symmetrize;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn hermitian(dim: usize) -> impl Strategy<Value = HermitianMatrix> {
    prop::collection::vec(-1.0f64..1.0, dim * dim * 2).prop_map(move |raw| {
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                entries[i * dim + j] =
                    Complex64::new(raw[2 * (i * dim + j)], raw[2 * (i * dim + j) + 1]);
            }
        }
        HermitianMatrix::hermitian_part(dim, &entries)
    })
}

fn real_matrix(rows: usize, cols: usize) -> impl Strategy<Value = RealMatrix> {
    prop::collection::vec(-1.0f64..1.0, rows * cols)
        .prop_map(move |v| RealMatrix::from_vec(rows, cols, v))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigh_reconstructs_and_sorts(h in hermitian(4)) {
        let (vals, vecs) = linalg::eigh(&h).unwrap();
        for w in vals.windows(2) {
            prop_assert!(w[0] <= w[1] + 1e-12);
        }
        let mut rebuilt = HermitianMatrix::zeros(4);
        for (lam, v) in vals.iter().zip(&vecs) {
            rebuilt = rebuilt.add(&HermitianMatrix::outer(v).scale(*lam));
        }
        prop_assert!(rebuilt.max_abs_diff(&h) < 1e-10);
    }

    #[test]
    fn kron_mixed_product(a in real_matrix(2, 3), b in real_matrix(3, 2),
                          c in real_matrix(3, 2), d in real_matrix(2, 3)) {
        let lhs = a.kron(&b).matmul(&c.kron(&d));
        let rhs = a.matmul(&c).kron(&b.matmul(&d));
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn partial_transpose_involutive(h in hermitian(6)) {
        let pt = h.partial_transpose(2, 3).unwrap();
        prop_assert!((pt.trace() - h.trace()).abs() < 1e-12);
        let back = pt.partial_transpose(2, 3).unwrap();
        prop_assert!(back.max_abs_diff(&h) < 1e-14);
    }

    #[test]
    fn vectorization_roundtrip_preserves_inner(h in hermitian(3), k in hermitian(3)) {
        let basis = models::hermitian_basis(3);
        let vh = models::vectorize(&basis, &h);
        let vk = models::vectorize(&basis, &k);
        let back = models::devectorize(&basis, &vh);
        prop_assert!(back.max_abs_diff(&h) < 1e-12);
        let dot: f64 = vh.iter().zip(&vk).map(|(x, y)| x * y).sum();
        prop_assert!((dot - h.hs_inner(&k)).abs() < 1e-10);
    }

    #[test]
    fn composition_is_bilinear(f in real_matrix(3, 2), g in real_matrix(3, 2),
                               h in real_matrix(2, 3), s in -2.0f64..2.0) {
        let sa = System::classical("A", 2);
        let sb = System::classical("B", 3);
        let pf = ExtendedProcess::new(sa.clone(), sb.clone(), f).unwrap();
        let pg = ExtendedProcess::new(sa.clone(), sb.clone(), g).unwrap();
        let ph = ExtendedProcess::new(sb, sa, h).unwrap();
        let lhs = compose_seq(&pf.scale(s).add(&pg).unwrap(), &ph).unwrap();
        let rhs = compose_seq(&pf, &ph).unwrap().scale(s)
            .add(&compose_seq(&pg, &ph).unwrap()).unwrap();
        prop_assert!(lhs.matrix().max_abs_diff(rhs.matrix()) < 1e-12);
    }

    #[test]
    fn swap_is_its_own_inverse(f in real_matrix(2, 2), g in real_matrix(3, 3)) {
        let sa = System::classical("A", 2);
        let sb = System::classical("B", 3);
        let pf = ExtendedProcess::new(sa.clone(), sa.clone(), f).unwrap();
        let pg = ExtendedProcess::new(sb.clone(), sb.clone(), g).unwrap();
        let fg = compose_par(&pf, &pg).unwrap();
        let there = compose_seq(&fg, &swap(&sa, &sb).unwrap()).unwrap();
        let back = compose_seq(&swap(&sb, &sa).unwrap(), &there).unwrap();
        // σ_{BA} ∘ σ_{AB} = id, so conjugating twice returns f⊗g
        let roundtrip = compose_seq(
            &swap(&sa, &sb).unwrap(),
            &compose_seq(&compose_par(&pg, &pf).unwrap(), &swap(&sb, &sa).unwrap()).unwrap(),
        ).unwrap();
        prop_assert!(roundtrip.matrix().max_abs_diff(fg.matrix()) < 1e-12);
        let _ = back;
    }

    #[test]
    fn state_cone_is_convex(seed in 0u64..10_000, t in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let basis = models::hermitian_basis(2);
        let sys = System::quantum("A", 2);
        let s1 = models::vectorize(&basis, &models::random_pure_state(2, &mut rng));
        let s2 = models::vectorize(&basis, &models::random_pure_state(2, &mut rng));
        let mix: Vec<f64> = s1.iter().zip(&s2).map(|(a, b)| t * a + (1.0 - t) * b).collect();
        prop_assert!(models::contains_state(&sys, &mix).unwrap());
    }

    #[test]
    fn success_probability_is_a_probability(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = scenarios::classical_random(3, 3, seed);
        let e = random_measurement(rho.system(), 3, &mut rng).unwrap();
        let p = success_probability(&e, &rho).unwrap();
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&p));
    }

    #[test]
    fn symmetrized_random_measurements_stay_measurements(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (rho, setup) = scenarios::gbit_square();
        let e = random_measurement(rho.system(), 4, &mut rng).unwrap();
        let se = symmetrize(&e, &setup).unwrap();
        prop_assert!(se.is_valid());
    }

    #[test]
    fn preparation_rejects_unnormalized(scale in 0.1f64..0.89) {
        let sys = System::classical("A", 2);
        let states = vec![vec![0.5 * scale, 0.0], vec![0.0, 0.5 * scale]];
        prop_assert!(StatePreparation::new(sys, states).is_err());
    }
}
