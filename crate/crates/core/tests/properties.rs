//! Property-based invariants across modules.

mod common;

use bcs_core::attack::{loss, make_instance, rel_error_mod_phase, AttackInstance, ProjectiveVector};
use bcs_core::certs::{build_e_set, noninjectivity_certificate, validate_certificate};
use bcs_core::complexcore::{circ_conv, dft, Rng, C64};
use bcs_core::deconv::{hierarchical_threshold, lifted_adjoint, lifted_apply, BisparsePattern};
use bcs_core::harness::{summarize, TrialRecord};
use bcs_core::scheme::{keygen, sample_plaintext, SparseVector};
use common::*;
use proptest::prelude::*;

fn unit(theta: f64) -> C64 {
    C64::from_polar(1.0, theta)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dft_preserves_norm(seed in any::<u64>(), m in 1usize..80) {
        let v = random_vec(&mut Rng::new(seed), m);
        prop_assert!((dft(&v).norm() - v.norm()).abs() <= 1e-12 * v.norm());
    }

    #[test]
    fn convolution_theorem(seed in any::<u64>(), m in 1usize..70) {
        let mut rng = Rng::new(seed);
        let (h, v) = (random_vec(&mut rng, m), random_vec(&mut rng, m));
        let lhs = dft(&circ_conv(&h, &v).unwrap());
        let (fh, fv) = (dft(&h), dft(&v));
        let rhs: Vec<C64> = fh.iter().zip(fv.iter()).map(|(a, b)| a * b * (m as f64).sqrt()).collect();
        prop_assert!(max_abs_diff(lhs.as_slice(), &rhs) < 1e-10);
    }

    #[test]
    fn adjoint_identity(seed in any::<u64>(), m in 1usize..24, n in 1usize..12) {
        let mut rng = Rng::new(seed);
        let q = random_mat(&mut rng, m, n);
        let x = random_mat(&mut rng, m, n);
        let z = random_vec(&mut rng, m);
        let lhs = dot(lifted_apply(&q, &x).unwrap().as_slice(), z.as_slice());
        let rhs = dot(x.as_slice(), lifted_adjoint(&q, &z).unwrap().as_slice());
        prop_assert!((lhs - rhs).norm() < 1e-10 * lhs.norm().max(1.0));
    }

    #[test]
    fn threshold_is_bisparse_and_idempotent(
        seed in any::<u64>(), m in 1usize..12, n in 1usize..12, sigma in 1usize..12, s in 1usize..12,
    ) {
        prop_assume!(sigma <= m && s <= n);
        let x = random_mat(&mut Rng::new(seed), m, n);
        let p = BisparsePattern::new(sigma, s).unwrap();
        let (support, t) = hierarchical_threshold(&x, p);
        prop_assert_eq!(support.len(), sigma * s);
        let mut rows: Vec<usize> = support.iter().map(|e| e.0).collect();
        rows.dedup();
        prop_assert_eq!(rows.len(), sigma);
        let nonzero = t.as_slice().iter().filter(|z| **z != C64::new(0.0, 0.0)).count();
        prop_assert_eq!(nonzero, sigma * s);
        for &(i, l) in &support {
            prop_assert_eq!(t[(i, l)], x[(i, l)]);
        }
        let (support2, t2) = hierarchical_threshold(&t, p);
        prop_assert_eq!(support2, support);
        prop_assert_eq!(t2, t);
    }

    #[test]
    fn loss_ignores_observation_and_global_phases(
        seed in any::<u64>(), phases in proptest::collection::vec(0.0f64..6.3, 6), global in 0.0f64..6.3,
    ) {
        let mut rng = Rng::new(seed);
        let key = keygen(3, 7, &mut rng).unwrap();
        let xs: Vec<SparseVector> = (0..6).map(|_| sample_plaintext(7, 3, &mut rng).unwrap()).collect();
        let inst = make_instance(&key, xs.clone(), &mut rng).unwrap();
        let rotated: Vec<ProjectiveVector> = inst
            .observations()
            .iter()
            .zip(&phases)
            .map(|(b, &p)| ProjectiveVector::new(b.representative().scale(unit(p))))
            .collect();
        let other = AttackInstance::new(7, 3, xs, rotated).unwrap();
        let q = random_mat(&mut rng, 3, 7);
        let (a, b) = (loss(&q, &inst).unwrap(), loss(&q, &other).unwrap());
        prop_assert!((a - b).abs() <= 1e-14 * a.max(1.0) * 10.0);
        let c = loss(&q.scale(unit(global)), &inst).unwrap();
        prop_assert!((a - c).abs() <= 1e-12 * a.max(1.0));
        prop_assert!(loss(&key.matrix().scale(unit(global)), &inst).unwrap() < 1e-20);
    }

    #[test]
    fn rel_error_is_a_phase_pseudometric(seed in any::<u64>(), theta in 0.0f64..6.3) {
        let mut rng = Rng::new(seed);
        let q = random_mat(&mut rng, 3, 5);
        let p = random_mat(&mut rng, 3, 5);
        prop_assert!(rel_error_mod_phase(&q, &q.scale(unit(theta))).unwrap() < 1e-14);
        // min_θ ‖Q − θP‖ is symmetric once the normalization is undone
        let d1 = rel_error_mod_phase(&q, &p).unwrap() * q.frobenius();
        let d2 = rel_error_mod_phase(&p, &q).unwrap() * p.frobenius();
        prop_assert!((d1 - d2).abs() < 1e-12 * d1.max(1.0));
    }

    #[test]
    fn e_set_symmetric_and_certificates_validate(
        seed in any::<u64>(), n in 2usize..30, s in 1usize..6, count in 1usize..40,
    ) {
        prop_assume!(s <= n);
        let mut rng = Rng::new(seed);
        let xs: Vec<SparseVector> = (0..count).map(|_| sample_plaintext(n, s, &mut rng).unwrap()).collect();
        let e = build_e_set(n, &xs).unwrap();
        prop_assert!(e.is_symmetric());
        if let Some(cert) = noninjectivity_certificate(n, &xs).unwrap() {
            prop_assert!(validate_certificate(&cert, &xs));
        }
        if s >= 2 && count * s * (s - 1) < n * (n - 1) {
            prop_assert!(!e.is_empty());
        }
    }

    #[test]
    fn summary_rate_is_exact_fraction(flags in proptest::collection::vec(any::<bool>(), 1..60)) {
        let records: Vec<TrialRecord> = flags
            .iter()
            .enumerate()
            .map(|(t, &ok)| TrialRecord {
                n: 4, m: 2, big_m: 3, s: 2, trial: t, seed: t as u64, final_loss: 0.0,
                rel_error: if ok { 0.0 } else { 1.0 }, success: ok, iters: 0, wall_s: 0.0,
            })
            .collect();
        let s = summarize(&records).unwrap();
        let hits = flags.iter().filter(|&&f| f).count();
        prop_assert_eq!(s.cells[0].successes, hits);
        prop_assert_eq!(s.cells[0].success_rate, hits as f64 / flags.len() as f64);
    }

    #[test]
    fn sparse_vector_round_trips_through_dense(seed in any::<u64>(), n in 1usize..40, s in 1usize..40) {
        prop_assume!(s <= n);
        let x = sample_plaintext(n, s, &mut Rng::new(seed)).unwrap();
        prop_assert_eq!(x.nnz(), s);
        prop_assert!(x.support().windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(SparseVector::from_dense(&x.to_dense()).unwrap(), x);
    }
}

#[test]
fn projective_equivalence_modulo_unit_scalar() {
    let v = random_vec(&mut Rng::new(1), 4);
    let a = ProjectiveVector::new(v.clone());
    assert!(a.equivalent(&ProjectiveVector::new(v.scale(unit(2.0))), 1e-12));
    assert!(!a.equivalent(&ProjectiveVector::new(v.scale(C64::new(2.0, 0.0))), 1e-3));
}
