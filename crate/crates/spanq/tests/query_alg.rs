//! Query algorithms and their span-program conversion. Expected values come
//! from explicit full-matrix simulation, closed forms in the acceptance
//! probability, and the optimal witnesses found by the generic solver.

use proptest::prelude::*;
use spanq::domain::{all_inputs, DomainFunction};
use spanq::error::Error;
use spanq::fixtures;
use spanq::numerics::*;
use spanq::query_alg::*;
use spanq::random;
use spanq::span_core::{apply_functional, check_monotone, evaluate, negative_witness};

fn tol() -> TolerancePolicy {
    TolerancePolicy::default()
}

/// Final state by multiplying out `U_{2T+1} O_x ⋯ O_x U_1` as dense matrices.
fn dense_final_state(alg: &QueryAlgorithm, x: &[u8]) -> CVec {
    let d = alg.dim();
    let mut oracle = identity(d);
    for r in 0..d {
        let (j, _, _) = alg.unreg(r);
        if j >= 1 && x[j - 1] == 1 {
            oracle[(r, r)] = c(-1.0);
        }
    }
    let mut total = alg.unitaries[0].clone();
    for u in &alg.unitaries[1..] {
        total = u * &oracle * total;
    }
    total.column(alg.reg(0, 0, 0)).into_owned()
}

fn dense_p0(alg: &QueryAlgorithm, x: &[u8]) -> f64 {
    dense_final_state(alg, x)
        .iter()
        .enumerate()
        .filter(|(r, _)| r % 2 == 0)
        .map(|(_, z)| z.norm_sqr())
        .sum()
}

fn random_algorithm(rng: &mut random::Rng64, n: usize, z: usize, t: usize) -> QueryAlgorithm {
    let d = (n + 1) * z * 2;
    let us = (0..=t).map(|_| random::unitary(rng, d)).collect();
    QueryAlgorithm::new(n, z, t, us).unwrap()
}

#[test]
fn fixtures_have_their_advertised_acceptance_probabilities() {
    let alg = fixtures::deutsch_algorithm();
    for x in all_inputs(2) {
        let want = if x[0] == x[1] { 1.0 } else { 0.0 };
        assert!((run(&alg, &x).unwrap().p0 - want).abs() < 1e-12);
    }
    let alg = fixtures::two_sided_algorithm();
    for (x, want) in [([0u8], 5.0 / 6.0), ([1], 1.0 / 6.0)] {
        let r = run(&alg, &x).unwrap();
        assert!((r.p0 - want).abs() < 1e-12);
        assert_eq!(r.output_bit, x[0]);
    }
}

#[test]
fn run_matches_dense_simulation_on_random_algorithms() {
    let mut rng = random::rng(31);
    for (n, z, t) in [(1, 1, 1), (2, 2, 2), (3, 1, 3), (2, 3, 1)] {
        let alg = random_algorithm(&mut rng, n, z, t);
        for x in all_inputs(n) {
            let r = run(&alg, &x).unwrap();
            assert_eq!(r.states.len(), 2 * t + 2);
            let want = dense_final_state(&alg, &x);
            assert!((r.states.last().unwrap() - &want).norm() < 1e-10);
            assert!((r.p0 - dense_p0(&alg, &x)).abs() < 1e-12);
        }
    }
}

#[test]
fn conversion_has_the_closed_form_shape() {
    let mut rng = random::rng(32);
    for (n, z, t) in [(1, 1, 1), (2, 2, 2), (2, 1, 3)] {
        let alg = random_algorithm(&mut rng, n, z, t);
        let p = alg_to_span(&alg, DEFAULT_C).unwrap();
        let rows = (2 * t + 2) * (n + 1) * z * 2;
        assert_eq!(p.a.shape(), (rows, 2 * rows));
        assert_eq!(p.size(), 2 * rows);
        assert!(!check_monotone(&p), "P_A queries both bit values");
    }
}

#[test]
fn positive_witness_error_is_p0_over_ct() {
    let mut rng = random::rng(33);
    let algs = [
        fixtures::deutsch_algorithm(),
        fixtures::two_sided_algorithm(),
        random_algorithm(&mut rng, 2, 2, 2),
    ];
    for alg in &algs {
        for cc in [1.0, 5.0, 20.0] {
            let p = alg_to_span(alg, cc).unwrap();
            for x in all_inputs(alg.n) {
                let pos = build_pos_witness(alg, &x, cc).unwrap();
                let p0 = dense_p0(alg, &x);
                let want = p0 / (cc * alg.t as f64);
                assert!((pos.error - want).abs() < 1e-12, "c={cc}, x={x:?}");
                let residual = (&p.a * &pos.w - &p.tau).norm();
                assert!(residual < 1e-10);
                let err = norm_sq(&p.unavailable_part(&x, &pos.w));
                assert!((err - pos.error).abs() < 1e-12);
                assert!((norm_sq(&pos.w) - pos.size).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn negative_witness_value_is_four_plus_c_t_over_p0() {
    let t = tol();
    let mut rng = random::rng(34);
    let algs = [
        fixtures::two_sided_algorithm(),
        random_algorithm(&mut rng, 1, 1, 1),
        random_algorithm(&mut rng, 2, 1, 2),
    ];
    for alg in &algs {
        for cc in [1.0, 5.0, 20.0] {
            let p = alg_to_span(alg, cc).unwrap();
            for x in all_inputs(alg.n) {
                let p0 = dense_p0(alg, &x);
                let neg = build_neg_witness(alg, &x, cc).unwrap();
                let want = (4.0 + cc) * alg.t as f64 / p0;
                assert!(
                    (neg.size - want).abs() <= 1e-9 * want,
                    "c={cc}, x={x:?}: {} vs {want}",
                    neg.size
                );
                assert!((apply_functional(&neg.omega, &p.tau) - c(1.0)).norm() < 1e-10);
                assert!((p.restricted(&x).adjoint() * &neg.omega).norm() < 1e-9);
                // the built witness is feasible, so the optimum is no larger
                let opt = negative_witness(&p, &x, &t).unwrap();
                assert!(opt.size <= neg.size * (1.0 + 1e-8));
                assert!(!evaluate(&p, &x, &t).unwrap());
            }
        }
    }
}

#[test]
fn zero_rejection_and_degenerate_inputs_are_errors() {
    let alg = fixtures::deutsch_algorithm();
    assert!(matches!(
        build_neg_witness(&alg, &[0, 1], DEFAULT_C),
        Err(Error::ZeroRejection)
    ));
    let p = alg_to_span(&alg, DEFAULT_C).unwrap();
    assert!(evaluate(&p, &[0, 1], &tol()).unwrap());

    let no_query = QueryAlgorithm::new(1, 1, 0, vec![identity(4)]).unwrap();
    assert!(matches!(
        alg_to_span(&no_query, DEFAULT_C),
        Err(Error::InvalidInput(_))
    ));
    assert!(alg_to_span(&alg, 0.0).is_err());
    assert!(QueryAlgorithm::new(1, 1, 1, vec![identity(4)]).is_err());
    let mut bad = identity(4);
    bad[(0, 0)] = c(2.0);
    assert!(QueryAlgorithm::new(1, 1, 0, vec![bad]).is_err());
    assert!(run(&alg, &[0, 2]).is_err());
    assert!(run(&alg, &[0]).is_err());
}

#[test]
fn conversion_report_for_exact_and_two_sided_algorithms() {
    let t = tol();
    let r = verify_conversion(
        &fixtures::deutsch_algorithm(),
        &fixtures::deutsch_function(),
        &t,
    )
    .unwrap();
    assert!(r.holds(), "{:?}", r.violations);
    assert!(r.one_sided);
    assert_eq!(r.exact, Some(true));
    assert!(r.w_minus <= 27.0 / 2.0 + 1e-9);
    assert!(r.w_plus_hat.unwrap() <= 4.0 + 1e-9);
    for inp in &r.inputs {
        if let (Some(b), Some(s)) = (inp.built_neg_value, inp.solver_w_minus) {
            assert!(s <= b * (1.0 + 1e-6));
            assert!((b - 9.0 / inp.p0).abs() < 1e-9);
        }
    }

    let r = verify_conversion(
        &fixtures::two_sided_algorithm(),
        &fixtures::two_sided_function(),
        &t,
    )
    .unwrap();
    assert!(r.holds(), "{:?}", r.violations);
    assert!(!r.one_sided);
    assert_eq!(r.exact, None);
    assert!(r.approximates);
    assert_eq!(r.size, 2 * 4 * 4);
}

#[test]
fn grover_query_algorithm_converts() {
    let t = tol();
    for n in 2..=3 {
        let alg = fixtures::grover_query_algorithm(n, 1);
        let f = fixtures::grover_query_function(n);
        for (x, fx) in &f.entries {
            assert_eq!(run(&alg, x).unwrap().output_bit, *fx);
        }
        let r = verify_conversion(&alg, &f, &t).unwrap();
        assert!(r.holds(), "n={n}: {:?}", r.violations);
    }
}

#[test]
fn unbounded_error_claims_are_rejected() {
    let f = DomainFunction::total(1, |x| 1 - x[0]);
    assert!(matches!(
        verify_conversion(&fixtures::two_sided_algorithm(), &f, &tol()),
        Err(Error::NotBoundedError(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn built_witnesses_are_feasible_on_random_algorithms(seed in any::<u64>(), n in 1usize..3, t in 1usize..3) {
        let mut rng = random::rng(seed);
        let alg = random_algorithm(&mut rng, n, 1, t);
        let p = alg_to_span(&alg, DEFAULT_C).unwrap();
        for x in all_inputs(n) {
            let pos = build_pos_witness(&alg, &x, DEFAULT_C).unwrap();
            prop_assert!((&p.a * &pos.w - &p.tau).norm() < 1e-9);
            let neg = build_neg_witness(&alg, &x, DEFAULT_C).unwrap();
            // ⟨ω, A w⟩ = ⟨ω, τ⟩ = 1, and only unavailable columns contribute
            let unavail = p.unavailable_part(&x, &pos.w);
            let pairing = apply_functional(&neg.omega, &(&p.a * unavail));
            prop_assert!((pairing - c(1.0)).norm() < 1e-8);
        }
    }
}
