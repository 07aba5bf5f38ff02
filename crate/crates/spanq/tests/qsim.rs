//! Oracle checks for the spectral phase- and amplitude-estimation simulator
//! and the compiled decider. The reference laws are rebuilt here from matrix
//! powers and an explicit DFT, never from the simulator's eigendecomposition.

use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::Rng;
use spanq::domain::*;
use spanq::fixtures;
use spanq::numerics::*;
use spanq::qsim::*;
use spanq::query_alg::alg_to_span;
use spanq::span_core::*;
use spanq::{random, Error};
use std::f64::consts::PI;

fn tol() -> TolerancePolicy {
    TolerancePolicy::default()
}

/// `T⁻¹ Σ_t |t⟩ U^t ψ`, Fourier transform on `t`, outcome marginals.
fn dft_law(u: &CMat, psi: &CVec, t: usize) -> Vec<f64> {
    let mut powers = Vec::with_capacity(t);
    let mut v = psi.clone();
    for _ in 0..t {
        powers.push(v.clone());
        v = u * v;
    }
    (0..t)
        .map(|m| {
            let mut acc = CVec::zeros(psi.len());
            for (s, vs) in powers.iter().enumerate() {
                acc += vs * C64::from_polar(1.0 / t as f64, -2.0 * PI * (m * s) as f64 / t as f64);
            }
            acc.norm_squared()
        })
        .collect()
}

fn rotation(theta: f64) -> CMat {
    let (s, co) = theta.sin_cos();
    CMat::from_row_slice(2, 2, &[c(co), c(-s), c(s), c(co)])
}

#[test]
fn pe_law_matches_dft_oracle() {
    let mut rng = random::rng(31);
    for _ in 0..40 {
        let d = rng.random_range(1..=8);
        let t = rng.random_range(1..=16);
        let u = random::unitary(&mut rng, d);
        let psi = random::state(&mut rng, d);
        let got = pe_distribution(&u, &psi, t, &tol()).unwrap();
        let want = dft_law(&u, &psi, t);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-9);
        }
        assert!((got.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn pe_spec_examples() {
    let t = tol();
    let z = CMat::from_diagonal(&CVec::from_vec(vec![c(1.0), c(-1.0)]));
    let d = pe_distribution(&z, &CVec::from_vec(vec![c(0.0), c(1.0)]), 2, &t).unwrap();
    assert!(d[0].abs() < 1e-12 && (d[1] - 1.0).abs() < 1e-12);
    let h = c(0.5f64.sqrt());
    let d = pe_distribution(&z, &CVec::from_vec(vec![h, h]), 4, &t).unwrap();
    for (g, w) in d.iter().zip([0.5, 0.0, 0.5, 0.0]) {
        assert!((g - w).abs() < 1e-12);
    }
    let d = pe_distribution(&identity(3), &random::state(&mut random::rng(1), 3), 5, &t).unwrap();
    assert!((d[0] - 1.0).abs() < 1e-12);
}

#[test]
fn pe_zero_bound_on_pure_phases() {
    let t = tol();
    for (theta, steps) in [(PI / 2.0, 8), (PI, 3), (PI, 7), (1.0, 10)] {
        let u = CMat::from_diagonal(&CVec::from_vec(vec![C64::from_polar(1.0, theta), c(1.0)]));
        let psi = CVec::from_vec(vec![c(1.0), c(0.0)]);
        let chk = pe_zero_bound_check(&u, &psi, steps, theta, &t).unwrap();
        assert!(
            chk.holds,
            "θ={theta}, T={steps}: {} > {}",
            chk.pr_zero, chk.bound
        );
        assert!((chk.pr_zero - fejer(steps, theta)).abs() < 1e-12);
    }
    let u = CMat::from_diagonal(&CVec::from_vec(vec![c(1.0), c(-1.0)]));
    let psi = CVec::from_vec(vec![c(1.0), c(0.0)]);
    assert!(matches!(
        pe_zero_bound_check(&u, &psi, 4, PI, &t),
        Err(Error::SupportViolation { .. })
    ));
}

#[test]
fn ae_law_matches_rotation_oracle() {
    // a state with squared amplitude p = sin²θ sees a rotation by 2θ, whose
    // eigenphases are ±2θ with equal weight on |good⟩
    for m_steps in [1usize, 2, 3, 5, 8, 13] {
        for k in 0..=20 {
            let p = k as f64 / 20.0;
            let theta = p.sqrt().asin();
            let u = rotation(2.0 * theta);
            let start = CVec::from_vec(vec![c(1.0), c(0.0)]);
            let want = dft_law(&u, &start, m_steps);
            let got = ae_distribution(p, m_steps).unwrap();
            for (o, w) in got.iter().zip(&want) {
                assert!((o.prob - w).abs() < 1e-10, "p={p}, M={m_steps}");
                let s = (PI * o.m as f64 / m_steps as f64).sin();
                assert!((o.estimate - s * s).abs() < 1e-15);
            }
        }
    }
}

#[test]
fn ae_examples_and_accuracy_guarantee() {
    let d = ae_distribution(0.0, 7).unwrap();
    assert!((d[0].prob - 1.0).abs() < 1e-12);
    let d = ae_distribution(1.0, 6).unwrap();
    assert!((d[3].prob - 1.0).abs() < 1e-12 && (d[3].estimate - 1.0).abs() < 1e-12);
    for m_steps in 2..=24usize {
        let on_grid = (PI / m_steps as f64).sin().powi(2);
        let hit: f64 = ae_distribution(on_grid, m_steps)
            .unwrap()
            .iter()
            .filter(|o| (o.estimate - on_grid).abs() < 1e-12)
            .map(|o| o.prob)
            .sum();
        assert!(hit >= 4.0 / (PI * PI) - 1e-12);
        for k in 0..=40 {
            let p = k as f64 / 40.0;
            let close: f64 = ae_distribution(p, m_steps)
                .unwrap()
                .iter()
                .filter(|o| (o.estimate - p).abs() <= ae_delta(m_steps))
                .map(|o| o.prob)
                .sum();
            assert!(close >= 0.5, "M={m_steps}, p={p}: {close}");
        }
    }
    assert!(ae_distribution(1.5, 3).is_err());
    assert!(ae_distribution(0.5, 0).is_err());
}

#[test]
fn span_unitary_examples() {
    let t = tol();
    let u = span_unitary(&or_program(2), &[0, 0], &t).unwrap();
    let e = unitary_eig(&u, &t).unwrap();
    assert!((e.phases[0].abs() - 0.0).abs() < 1e-12 || (e.phases[0] - PI).abs() < 1e-12);
    let fixed = CVec::from_vec(vec![c(0.5f64.sqrt()), c(-(0.5f64.sqrt()))]);
    // ker(A) of the all-ones row is spanned by (1,−1)/√2; with H(00) = {0}
    // the reflection on H is −I, so U fixes ker(A)⊥ = (1,1)/√2
    let plus = CVec::from_vec(vec![c(0.5f64.sqrt()), c(0.5f64.sqrt())]);
    assert!((&u * &plus - &plus).norm() < 1e-12);
    assert!((&u * &fixed + &fixed).norm() < 1e-12);
    // full column rank: the kernel reflection is −I
    let a = CMat::from_row_slice(2, 2, &[c(1.0), c(2.0), c(0.0), c(1.0)]);
    let p = SpanProgram::new(
        1,
        vec![Tag::Input { j: 1, b: 1 }, Tag::True],
        a,
        CVec::from_vec(vec![c(1.0), c(0.0)]),
        Field::Real,
    )
    .unwrap();
    for x in all_inputs(1) {
        let u = span_unitary(&p, &x, &t).unwrap();
        let mut refl = identity(2);
        if x[0] == 0 {
            refl[(0, 0)] = c(-1.0);
        }
        assert!((u + refl).norm() < 1e-12);
    }
}

#[test]
fn compile_or2_parameters() {
    let t = tol();
    let f = DomainFunction::or(2);
    let d = compile(&or_program(2), &f, 0.0, &CompileOptions::default(), &t).unwrap();
    let wm = d.report.w_minus;
    let wp = d.report.w_plus_hat.unwrap();
    assert!((d.theta * d.theta - 1.0 / (2.0 * wp * wm)).abs() < 1e-12);
    assert!((d.q0 - 1.0 / wm).abs() < 1e-12 && d.q0 >= 0.5 - 1e-9);
    assert!((d.q1 - 1.0 / (2.0 * wm)).abs() < 1e-12);
    assert!(d.delta > 0.0 && d.theta > 0.0 && d.theta < PI);
    for x in all_inputs(2) {
        let dec = decide(&d, &x, &t).unwrap();
        assert_eq!(dec.output, f.value(&x).unwrap());
        if f.value(&x) == Some(0) {
            assert!(dec.zero_mass >= 1.0 / wm - 1e-8);
        } else {
            assert!(dec.theta_mass <= d.theta * d.theta * wp + 1e-8);
        }
    }
}

#[test]
fn kappa_boundary_requires_reduction() {
    let t = tol();
    let a = CMat::from_row_slice(2, 3, &[c(1.0), c(1.0), c(0.0), c(0.3), c(0.0), c(1.0)]);
    let p = SpanProgram::new(
        2,
        vec![
            Tag::Input { j: 1, b: 1 },
            Tag::Input { j: 2, b: 1 },
            Tag::False,
        ],
        a,
        CVec::from_vec(vec![c(1.0), c(0.0)]),
        Field::Real,
    )
    .unwrap();
    let f = DomainFunction::or(2);
    assert!(matches!(
        compile(&p, &f, 0.3, &CompileOptions::default(), &t),
        Err(Error::KappaTooLarge { .. })
    ));
    let opts = CompileOptions {
        allow_reduce: true,
        ..Default::default()
    };
    let d = compile(&p, &f, 0.3, &opts, &t).unwrap();
    assert!(d.transform.starts_with("reduce"));
    assert!(d.kappa < 0.25);
    for x in all_inputs(2) {
        assert_eq!(decide(&d, &x, &t).unwrap().output, f.value(&x).unwrap());
    }
}

#[test]
fn compiled_deciders_reproduce_benchmarks() {
    let t = tol();
    for n in 1..=4 {
        let f = DomainFunction::or(n);
        let d = compile(&or_program(n), &f, 0.0, &CompileOptions::default(), &t).unwrap();
        for x in all_inputs(n) {
            let dec = decide(&d, &x, &t).unwrap();
            assert_eq!(dec.output, f.value(&x).unwrap(), "OR_{n} on {x:?}");
            assert!(dec.prob_output_one >= 0.0 && dec.prob_output_one <= 1.0);
        }
        assert_eq!(d.reported_queries, d.repetitions * d.pe_steps * d.ae_steps);
    }
    let f = fixtures::deutsch_function();
    let pa = alg_to_span(&fixtures::deutsch_algorithm(), 5.0).unwrap();
    let d = compile(&pa, &f, 0.0, &CompileOptions::default(), &t).unwrap();
    for x in all_inputs(2) {
        assert_eq!(decide(&d, &x, &t).unwrap().output, f.value(&x).unwrap());
    }
}

#[test]
fn effective_spectral_gap_on_structured_instances() {
    let t = tol();
    let mut rng = random::rng(32);
    // Π_A = 0
    for _ in 0..10 {
        let d = rng.random_range(2..=8);
        let rpb = rng.random_range(0..=d);
        let pb = random::projector(&mut rng, d, rpb);
        let u = random::state(&mut rng, d);
        let chk = esg_check(&CMat::zeros(d, d), &pb, &u, 0.3, &t).unwrap();
        assert!(chk.holds);
    }
    // commuting diagonal projectors: U is diagonal with phases in {0, π}
    for _ in 0..10 {
        let d = 6;
        let da: Vec<bool> = (0..d).map(|_| rng.random_bool(0.5)).collect();
        let db: Vec<bool> = (0..d).map(|_| rng.random_bool(0.5)).collect();
        let diag = |m: &[bool]| {
            CMat::from_diagonal(&CVec::from_iterator(
                d,
                m.iter().map(|&b| c(b as u8 as f64)),
            ))
        };
        let (pa, pb) = (diag(&da), diag(&db));
        let u = CVec::from_iterator(d, da.iter().map(|&b| if b { c(0.0) } else { c(1.0) }));
        if u.norm() == 0.0 {
            continue;
        }
        let u = &u / c(u.norm());
        for theta in [0.1, 0.5, 1.0, 2.0] {
            assert!(esg_check(&pa, &pb, &u, theta, &t).unwrap().holds);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn effective_spectral_gap_random(seed in any::<u64>(), d in 2usize..=16, ti in 0usize..4) {
        let t = tol();
        let theta = [0.1, 0.5, 1.0, 2.0][ti];
        let mut rng = random::rng(seed);
        let rpa = rng.random_range(0..d);
        let pa = random::projector(&mut rng, d, rpa);
        let rpb = rng.random_range(0..=d);
        let pb = random::projector(&mut rng, d, rpb);
        let raw = random::complex_matrix(&mut rng, d, 1).column(0).into_owned();
        let u = (identity(d) - &pa) * raw;
        prop_assume!(u.norm() > 1e-6);
        let chk = esg_check(&pa, &pb, &u, theta, &t).unwrap();
        prop_assert!(chk.holds, "{} > {}", chk.lhs, chk.rhs);
    }
}
