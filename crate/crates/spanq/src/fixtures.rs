//! Small hand-built algorithms used by the tests, the CLI and `verify all`.

use num_complex::Complex64 as C64;

use crate::domain::{weight, DomainFunction};
use crate::monotone::PhaseEstimationAlgorithm;
use crate::numerics::{basis_vector, c, identity, unitary_from_map, CMat, CVec};
use crate::query_alg::QueryAlgorithm;

fn sum(vs: &[(f64, CVec)]) -> CVec {
    let mut out = CVec::zeros(vs[0].1.len());
    for (s, v) in vs {
        out += v * c(*s);
    }
    out
}

/// One query, `n = 2`: exact parity. Answer 0 iff `x_1 = x_2`.
pub fn deutsch_algorithm() -> QueryAlgorithm {
    let shell = QueryAlgorithm {
        n: 2,
        z_count: 1,
        t: 1,
        unitaries: vec![],
    };
    let d = shell.dim();
    let e = |j, a| basis_vector(d, shell.reg(j, 0, a));
    let h = 0.5f64.sqrt();
    let plus = sum(&[(h, e(1, 0)), (h, e(2, 0))]);
    let minus = sum(&[(h, e(1, 0)), (-h, e(2, 0))]);
    let u1 = unitary_from_map(&[e(0, 0)], &[plus.clone()]);
    let u3 = unitary_from_map(&[plus, minus], &[e(0, 0), e(0, 1)]);
    QueryAlgorithm::new(2, 1, 1, vec![u1, u3]).expect("valid fixture")
}

pub fn deutsch_function() -> DomainFunction {
    DomainFunction::total(2, |x| x[0] ^ x[1])
}

/// `T` rounds of Grover search over `j ∈ 1..n`, then answer 0 iff the state
/// is the uniform superposition.
pub fn grover_query_algorithm(n: usize, iterations: usize) -> QueryAlgorithm {
    let shell = QueryAlgorithm {
        n,
        z_count: 1,
        t: iterations,
        unitaries: vec![],
    };
    let d = shell.dim();
    let e = |j, a| basis_vector(d, shell.reg(j, 0, a));
    let amp = 1.0 / (n as f64).sqrt();
    let s = (1..=n).fold(CVec::zeros(d), |acc, j| acc + e(j, 0) * c(amp));
    let mut diffusion = identity(d);
    for j in 1..=n {
        let r = shell.reg(j, 0, 0);
        diffusion[(r, r)] = c(-1.0);
    }
    diffusion += (&s * s.adjoint()).scale(2.0);
    let prep = unitary_from_map(&[e(0, 0)], &[s.clone()]);
    // basis of the query block orthogonal to s, routed to answer 1
    let mut inputs = vec![s.clone()];
    let mut outputs = vec![e(0, 0)];
    for k in 1..n {
        let mut v = CVec::zeros(d);
        // Helmert-style orthonormal vectors orthogonal to s
        let norm = ((k * (k + 1)) as f64).sqrt();
        for j in 1..=k {
            v[shell.reg(j, 0, 0)] = c(1.0 / norm);
        }
        v[shell.reg(k + 1, 0, 0)] = c(-(k as f64) / norm);
        inputs.push(v);
        outputs.push(e(k, 1));
    }
    let route = unitary_from_map(&inputs, &outputs);
    let mut us = vec![prep];
    for _ in 1..iterations {
        us.push(diffusion.clone());
    }
    us.push(route * diffusion);
    QueryAlgorithm::new(n, 1, iterations, us).expect("valid fixture")
}

/// OR on inputs of Hamming weight at most one.
pub fn grover_query_function(n: usize) -> DomainFunction {
    DomainFunction::restricted(n, |x| weight(x) <= 1, |x| (weight(x) > 0) as u8)
}

/// One query, `n = 1`: outputs `x_1` with probability 5/6.
pub fn two_sided_algorithm() -> QueryAlgorithm {
    let shell = QueryAlgorithm {
        n: 1,
        z_count: 1,
        t: 1,
        unitaries: vec![],
    };
    let d = shell.dim();
    let e = |j, a| basis_vector(d, shell.reg(j, 0, a));
    let h = 0.5f64.sqrt();
    let plus = sum(&[(h, e(0, 0)), (h, e(1, 0))]);
    let minus = sum(&[(h, e(0, 0)), (-h, e(1, 0))]);
    let (hi, lo) = ((5.0f64 / 6.0).sqrt(), (1.0f64 / 6.0).sqrt());
    let u1 = unitary_from_map(&[e(0, 0)], &[plus.clone()]);
    let u3 = unitary_from_map(
        &[plus, minus],
        &[
            sum(&[(hi, e(0, 0)), (lo, e(0, 1))]),
            sum(&[(lo, e(1, 0)), (hi, e(1, 1))]),
        ],
    );
    QueryAlgorithm::new(1, 1, 1, vec![u1, u3]).expect("valid fixture")
}

pub fn two_sided_function() -> DomainFunction {
    DomainFunction::total(1, |x| x[0])
}

/// `n = 1` with a second workspace state: `U = diag(1, e^{iφ})` and
/// `ψ₀ = (√0.3, √0.7)`, so the 0-input has phase-zero mass 0.3.
pub fn partial_mass_pea(m_steps: usize) -> PhaseEstimationAlgorithm {
    let mut u = identity(2);
    u[(1, 1)] = C64::from_polar(1.0, 2.0);
    let psi = CVec::from_vec(vec![c(0.3f64.sqrt()), c(0.7f64.sqrt())]);
    PhaseEstimationAlgorithm::with_blocks(1, 2, u, psi, 0.0, 4, m_steps).expect("valid fixture")
}

/// `U = X`, `ψ₀ = (|1⟩ − |2⟩)/√2`: on `x = 11` the phase-zero part of `ψ₀`
/// is flipped by the oracle.
pub fn non_monotone_pea() -> PhaseEstimationAlgorithm {
    let x = CMat::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
    let h = 0.5f64.sqrt();
    let psi = CVec::from_vec(vec![c(h), c(-h)]);
    PhaseEstimationAlgorithm::with_blocks(2, 1, x, psi, 0.0, 4, 3).expect("valid fixture")
}
