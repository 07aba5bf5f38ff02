//! Exact simulation of the phase-estimation decision procedure for span
//! programs: the span program unitary, phase and amplitude estimation
//! outcome laws, and the compiled decider with its resource accounting.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::domain::DomainFunction;
use crate::error::{Error, Result};
use crate::numerics::{
    c, check_unitary, fejer, identity, norm_sq, projectors, unitary_eig, CMat, CVec,
    TolerancePolicy,
};
use crate::span_core::{
    complexity_report, normalize, reduce_kappa, scale_target, ComplexityReport, SpanProgram,
};

/// `U(P, x) = (2Π_{ker A} − I)(2Π_{H(x)} − I)`.
pub fn span_unitary(p: &SpanProgram, x: &[u8], tol: &TolerancePolicy) -> Result<CMat> {
    p.check_input(x)?;
    let s = p.size();
    let mut u = projectors(&p.a, tol).ker.scale(2.0) - identity(s);
    // right-multiplying by the diagonal reflection negates unavailable columns
    for (k, ok) in p.available(x).into_iter().enumerate() {
        if !ok {
            let mut col = u.column_mut(k);
            col *= c(-1.0);
        }
    }
    Ok(u)
}

fn check_state(psi: &CVec, dim: usize) -> Result<()> {
    if psi.len() != dim {
        return Err(Error::InvalidInput(format!(
            "state of length {} for a {dim}-dimensional unitary",
            psi.len()
        )));
    }
    let ns = norm_sq(psi);
    if (ns - 1.0).abs() > 1e-9 {
        return Err(Error::StateNotNormalized { norm_sq: ns });
    }
    Ok(())
}

/// Outcome law of `T`-step phase estimation on `ψ`:
/// `Pr[m] = Σ_j |⟨λ_j|ψ⟩|² |T⁻¹ Σ_t e^{it(θ_j − 2πm/T)}|²`.
pub fn pe_distribution(u: &CMat, psi: &CVec, t: usize, tol: &TolerancePolicy) -> Result<Vec<f64>> {
    let eig = unitary_eig(u, tol)?;
    check_state(psi, u.nrows())?;
    if t == 0 {
        return Err(Error::InvalidInput("phase estimation needs T ≥ 1".into()));
    }
    let w = eig.weights(psi);
    Ok((0..t)
        .map(|m| {
            let shift = 2.0 * PI * m as f64 / t as f64;
            w.iter()
                .zip(&eig.phases)
                .map(|(wj, th)| wj * fejer(t, th - shift))
                .sum()
        })
        .collect())
}

/// The same law from the circuit: prepare `T^{-1/2} Σ_t |t⟩ U^t ψ`, apply the
/// discrete Fourier transform to the first register, and read it out.
pub fn pe_distribution_circuit(u: &CMat, psi: &CVec, t: usize) -> Result<Vec<f64>> {
    check_unitary(u)?;
    check_state(psi, u.nrows())?;
    let mut powers = Vec::with_capacity(t);
    let mut cur = psi.clone();
    for _ in 0..t {
        powers.push(cur.clone());
        cur = u * cur;
    }
    let tf = t as f64;
    Ok((0..t)
        .map(|m| {
            let mut amp = CVec::zeros(psi.len());
            for (s, v) in powers.iter().enumerate() {
                let ph = C64::from_polar(1.0 / tf, -2.0 * PI * (s * m) as f64 / tf);
                amp += v * ph;
            }
            norm_sq(&amp)
        })
        .collect())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ZeroBoundCheck {
    pub pr_zero: f64,
    pub bound: f64,
    pub holds: bool,
}

/// `Pr[0] ≤ π/(T θ_min)` for states with no weight on `|θ| ≤ π/T`.
pub fn pe_zero_bound_check(
    u: &CMat,
    psi: &CVec,
    t: usize,
    theta_min: f64,
    tol: &TolerancePolicy,
) -> Result<ZeroBoundCheck> {
    let eig = unitary_eig(u, tol)?;
    check_state(psi, u.nrows())?;
    let limit = PI / t as f64;
    let bad = eig.mass_within(psi, limit, 0.0);
    if bad > 1e-12 {
        return Err(Error::SupportViolation { weight: bad, limit });
    }
    let pr_zero = pe_distribution(u, psi, t, tol)?[0];
    let bound = PI / (t as f64 * theta_min);
    Ok(ZeroBoundCheck {
        pr_zero,
        bound,
        holds: pr_zero <= bound + 1e-12,
    })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AeOutcome {
    pub m: usize,
    pub estimate: f64,
    pub prob: f64,
}

/// Amplitude estimation with `M` steps: phase estimation of the phases
/// `±2θ_p` (`θ_p = asin √p`, weight ½ each); outcome `m` reports
/// `sin²(πm/M)`.
pub fn ae_distribution(p: f64, m_steps: usize) -> Result<Vec<AeOutcome>> {
    if !(0.0..=1.0).contains(&p) || m_steps == 0 {
        return Err(Error::InvalidInput(format!(
            "amplitude estimation needs p ∈ [0,1] and M ≥ 1 (p = {p}, M = {m_steps})"
        )));
    }
    let theta = p.sqrt().asin();
    let mf = m_steps as f64;
    Ok((0..m_steps)
        .map(|m| {
            let shift = 2.0 * PI * m as f64 / mf;
            let prob = 0.5 * fejer(m_steps, 2.0 * theta - shift)
                + 0.5 * fejer(m_steps, -2.0 * theta - shift);
            let s = (PI * m as f64 / mf).sin();
            AeOutcome {
                m,
                estimate: s * s,
                prob,
            }
        })
        .collect())
}

/// Additive accuracy `π/M + π²/M²` achieved with probability ≥ 1/2.
pub fn ae_delta(m_steps: usize) -> f64 {
    let mf = m_steps as f64;
    PI / mf + PI * PI / (mf * mf)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CompileOptions {
    /// Allow tensor-power reduction of κ when it is not below 1/4.
    pub allow_reduce: bool,
    /// Majority-vote repetitions of the single-shot test.
    pub repetitions: usize,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions {
            allow_reduce: false,
            repetitions: 15,
        }
    }
}

/// Target κ used when reduction is requested.
pub const REDUCTION_TARGET: f64 = 0.125;

#[derive(Debug, Clone)]
pub struct CompiledDecider {
    /// Program actually simulated; `‖A⁺τ‖ = 1`.
    pub program: SpanProgram,
    pub report: ComplexityReport,
    pub transform: String,
    pub kappa: f64,
    pub theta: f64,
    pub q0: f64,
    pub q1: f64,
    pub delta: f64,
    pub threshold: f64,
    pub pe_steps: usize,
    pub ae_steps: usize,
    pub repetitions: usize,
    pub reported_space: usize,
    pub reported_queries: usize,
}

fn effective(p: &SpanProgram, f: &DomainFunction, tol: &TolerancePolicy) -> Result<f64> {
    let k = complexity_report(p, f, 0.0, tol)?.effective_kappa;
    Ok(if k < 1e-12 { 0.0 } else { k })
}

fn unit_target(p: &SpanProgram, tol: &TolerancePolicy) -> Result<SpanProgram> {
    let nn = norm_sq(&p.min_norm_solution(tol));
    scale_target(p, 1.0 / nn.sqrt())
}

fn ceil_log2(v: f64) -> usize {
    if v <= 1.0 {
        0
    } else {
        v.log2().ceil() as usize
    }
}

/// Build the phase-estimation decider for a program that κ-approximates `f`.
pub fn compile(
    p: &SpanProgram,
    f: &DomainFunction,
    kappa: f64,
    opts: &CompileOptions,
    tol: &TolerancePolicy,
) -> Result<CompiledDecider> {
    let base = complexity_report(p, f, kappa, tol)?;
    if !base.approximates {
        return Err(Error::NotApproximating(base.failures.join("; ")));
    }
    if kappa >= 0.25 && !opts.allow_reduce {
        return Err(Error::KappaTooLarge { kappa });
    }
    let (program, transform) = if kappa >= 0.25 {
        let (q, d) = reduce_kappa(p, f, kappa, REDUCTION_TARGET, tol)?;
        (unit_target(&q, tol)?, format!("reduce(d={d})"))
    } else {
        let q = normalize(p, f, tol)?;
        if effective(&q, f, tol)? < 0.25 {
            (q, "normalize".to_string())
        } else {
            (unit_target(p, tol)?, "rescale-target".to_string())
        }
    };
    let k_eff = effective(&program, f, tol)?;
    if k_eff >= 0.25 {
        return Err(Error::KappaTooLarge { kappa: k_eff });
    }
    let k_use = if k_eff == 0.0 {
        0.0
    } else {
        k_eff * (1.0 + 1e-9)
    };
    let report = complexity_report(&program, f, k_use, tol)?;
    if !report.approximates {
        return Err(Error::NotApproximating(report.failures.join("; ")));
    }
    let wm = report.w_minus;
    let wp = report.w_plus_hat.unwrap_or(1.0).max(1e-300);
    let theta = ((1.0 - 4.0 * k_use) / (2.0 * wp * wm)).sqrt();
    let q0 = 1.0 / wm;
    let q1 = (1.0 + 4.0 * k_use) / (2.0 * wm);
    let delta = (q0 - q1) / 2.0;
    let threshold = (q0 + q1) / 2.0;
    // tail of the phase-0 probability outside Π_Θ is at most π²/(T²Θ²) ≤ Δ/2
    let pe_steps = (PI / (theta * (delta / 2.0).sqrt())).ceil() as usize;
    let mut ae_steps = 1;
    while ae_delta(ae_steps) >= delta / 2.0 {
        ae_steps += 1;
    }
    let k = opts.repetitions.max(1);
    let reported_space = ceil_log2(program.size() as f64)
        + k * (ceil_log2(pe_steps as f64) + ceil_log2(ae_steps as f64))
        + 2;
    Ok(CompiledDecider {
        program,
        report,
        transform,
        kappa: k_use,
        theta,
        q0,
        q1,
        delta,
        threshold,
        pe_steps,
        ae_steps,
        repetitions: k,
        reported_space,
        reported_queries: k * ae_steps * pe_steps,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Decision {
    pub output: u8,
    pub prob_output_one: f64,
    /// `‖Π_0 w₀‖²`.
    pub zero_mass: f64,
    /// `‖Π_Θ w₀‖²`.
    pub theta_mass: f64,
    /// Probability that phase estimation reads 0.
    pub pe_zero_prob: f64,
    /// Probability that one amplitude-estimation shot lands above threshold.
    pub single_shot_zero: f64,
}

fn majority_above(k: usize, s: f64) -> f64 {
    // Pr[Binomial(k, s) > k/2]
    let mut total = 0.0;
    for i in 0..=k {
        if 2 * i > k {
            let mut coef = 1.0;
            for r in 0..i {
                coef *= (k - r) as f64 / (r + 1) as f64;
            }
            total += coef * s.powi(i as i32) * (1.0 - s).powi((k - i) as i32);
        }
    }
    total
}

/// Exact outcome law of the decider on `x`; outputs the majority answer.
pub fn decide(d: &CompiledDecider, x: &[u8], tol: &TolerancePolicy) -> Result<Decision> {
    let u = span_unitary(&d.program, x, tol)?;
    let eig = unitary_eig(&u, tol)?;
    let w0 = d.program.min_norm_solution(tol);
    let w0 = &w0 / c(w0.norm());
    let weights = eig.weights(&w0);
    let zero_mass = eig.mass_within(&w0, 0.0, tol.phase_group_tol);
    let theta_mass = eig.mass_within(&w0, d.theta, 1e-12);
    let pe_zero_prob: f64 = weights
        .iter()
        .zip(&eig.phases)
        .map(|(w, th)| w * fejer(d.pe_steps, *th))
        .sum::<f64>()
        .clamp(0.0, 1.0);
    let single_shot_zero: f64 = ae_distribution(pe_zero_prob, d.ae_steps)?
        .iter()
        .filter(|o| o.estimate > d.threshold)
        .map(|o| o.prob)
        .sum();
    let prob_zero = majority_above(d.repetitions, single_shot_zero.clamp(0.0, 1.0));
    Ok(Decision {
        output: if prob_zero > 0.5 { 0 } else { 1 },
        prob_output_one: 1.0 - prob_zero,
        zero_mass,
        theta_mass,
        pe_zero_prob,
        single_shot_zero,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EsgCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `‖Π_Θ Π_B u‖ ≤ (Θ/2)‖u‖` for `U = (2Π_A − I)(2Π_B − I)` and `Π_A u = 0`.
pub fn esg_check(
    pa: &CMat,
    pb: &CMat,
    u: &CVec,
    theta: f64,
    tol: &TolerancePolicy,
) -> Result<EsgCheck> {
    let n = pa.nrows();
    for (name, p) in [("Π_A", pa), ("Π_B", pb)] {
        if p.shape() != (n, n) || (p * p - p).norm() > 1e-8 || (p - p.adjoint()).norm() > 1e-8 {
            return Err(Error::PreconditionViolated(format!(
                "{name} is not an orthogonal projector"
            )));
        }
    }
    if u.len() != n {
        return Err(Error::InvalidInput("vector length mismatch".into()));
    }
    if (pa * u).norm() > 1e-8 * u.norm().max(1.0) {
        return Err(Error::PreconditionViolated("Π_A u ≠ 0".into()));
    }
    let un = pa.scale(2.0) - identity(n);
    let vn = pb.scale(2.0) - identity(n);
    let eig = unitary_eig(&(un * vn), tol)?;
    let proj = eig.projector_within(theta, 1e-12);
    let lhs = (proj * (pb * u)).norm();
    let rhs = theta / 2.0 * u.norm();
    Ok(EsgCheck {
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-8,
    })
}
