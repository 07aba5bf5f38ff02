//! Quantum query algorithms and their conversion into approximate span
//! programs, with explicitly constructed positive and negative witnesses.
//!
//! Register basis `|j, z, a⟩` with `j ∈ {0..n}`, `z ∈ Z` and answer bit `a`
//! is laid out as `(j·|Z| + z)·2 + a`.

use serde::{Deserialize, Serialize};

use crate::domain::{bits_to_string, DomainFunction};
use crate::error::{Error, Result};
use crate::numerics::{basis_vector, c, check_unitary, norm_sq, CMat, CVec, TolerancePolicy, ZERO};
use crate::span_core::{
    complexity_report, negative_witness, ApproxWitness, Field, NegativeWitness, SpanProgram, Tag,
};

/// Scaling constant of the final-step false columns.
pub const DEFAULT_C: f64 = 5.0;

#[derive(Debug, Clone, PartialEq)]
pub struct QueryAlgorithm {
    pub n: usize,
    pub z_count: usize,
    /// Number of queries `T`.
    pub t: usize,
    /// `U_1, U_3, …, U_{2T+1}`.
    pub unitaries: Vec<CMat>,
}

impl QueryAlgorithm {
    pub fn new(n: usize, z_count: usize, t: usize, unitaries: Vec<CMat>) -> Result<Self> {
        let alg = QueryAlgorithm {
            n,
            z_count,
            t,
            unitaries,
        };
        if z_count == 0 {
            return Err(Error::InvalidInput(
                "workspace must contain at least one symbol".into(),
            ));
        }
        if alg.unitaries.len() != t + 1 {
            return Err(Error::InvalidInput(format!(
                "{} unitaries for T = {t} (need T+1)",
                alg.unitaries.len()
            )));
        }
        let d = alg.dim();
        for u in &alg.unitaries {
            if u.shape() != (d, d) {
                return Err(Error::InvalidInput(format!(
                    "unitary of shape {:?}, register dimension {d}",
                    u.shape()
                )));
            }
            check_unitary(u)?;
        }
        Ok(alg)
    }

    /// `(n+1)·|Z|·2`.
    pub fn dim(&self) -> usize {
        (self.n + 1) * self.z_count * 2
    }

    pub fn reg(&self, j: usize, z: usize, a: usize) -> usize {
        (j * self.z_count + z) * 2 + a
    }

    /// `(j, z, a)` of a register index.
    pub fn unreg(&self, r: usize) -> (usize, usize, usize) {
        (r / 2 / self.z_count, (r / 2) % self.z_count, r % 2)
    }

    /// Diagonal of `O_x`: `(−1)^{x_j}` on `j ≥ 1`, `+1` on `j = 0`.
    pub fn oracle_signs(&self, x: &[u8]) -> Vec<f64> {
        (0..self.dim())
            .map(|r| {
                let (j, _, _) = self.unreg(r);
                if j >= 1 && x[j - 1] == 1 {
                    -1.0
                } else {
                    1.0
                }
            })
            .collect()
    }

    fn check_input(&self, x: &[u8]) -> Result<()> {
        if x.len() != self.n || x.iter().any(|&b| b > 1) {
            return Err(Error::InvalidInput(format!(
                "input {} is not an {}-bit string",
                bits_to_string(x),
                self.n
            )));
        }
        Ok(())
    }

    /// `t ≥ 1` step as a matrix acting on the register.
    fn apply_step(&self, t: usize, signs: &[f64], v: &CVec) -> CVec {
        if t % 2 == 1 {
            &self.unitaries[(t - 1) / 2] * v
        } else {
            CVec::from_iterator(v.len(), v.iter().zip(signs).map(|(z, s)| z * s))
        }
    }

    fn apply_step_adjoint(&self, t: usize, signs: &[f64], v: &CVec) -> CVec {
        if t % 2 == 1 {
            self.unitaries[(t - 1) / 2].adjoint() * v
        } else {
            CVec::from_iterator(v.len(), v.iter().zip(signs).map(|(z, s)| z * s))
        }
    }

    fn answer_part(&self, v: &CVec, a: usize) -> CVec {
        CVec::from_iterator(
            v.len(),
            v.iter()
                .enumerate()
                .map(|(r, z)| if r % 2 == a { *z } else { ZERO }),
        )
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    /// `Ψ_0, …, Ψ_{2T+1}`.
    pub states: Vec<CVec>,
    /// Probability of answer 0.
    pub p0: f64,
    /// The more likely answer (ties give 1).
    pub output_bit: u8,
}

pub fn run(alg: &QueryAlgorithm, x: &[u8]) -> Result<RunResult> {
    alg.check_input(x)?;
    let signs = alg.oracle_signs(x);
    let mut states = vec![basis_vector(alg.dim(), alg.reg(0, 0, 0))];
    for t in 1..=2 * alg.t + 1 {
        let next = alg.apply_step(t, &signs, &states[t - 1]);
        states.push(next);
    }
    let last = states.last().expect("at least one state");
    let p0 = norm_sq(&alg.answer_part(last, 0));
    Ok(RunResult {
        states,
        p0,
        output_bit: if p0 > 0.5 { 0 } else { 1 },
    })
}

/// Column index of `|t, b, j, z, a⟩`.
pub fn h_index(alg: &QueryAlgorithm, t: usize, b: usize, r: usize) -> usize {
    (t * 2 + b) * alg.dim() + r
}

/// Row index of `|t, j, z, a⟩`.
pub fn v_index(alg: &QueryAlgorithm, t: usize, r: usize) -> usize {
    t * alg.dim() + r
}

/// The span program `P_A`: `τ = |0,0,0,0⟩`, and column `|t,b,j,z,a⟩` maps to
/// `|t⟩|jza⟩ − |t+1⟩U_{t+1}|jza⟩` (even `t`), `|t⟩|jza⟩ − (−1)^b|t+1⟩|jza⟩`
/// (odd `t`), or a final-step column scaled by `√(cT)` when `a = 0`.
///
/// The odd-step columns with `j = 0, b = 1` are tagged false: `j = 0` acts
/// as a query bit fixed to 0, which the negative witness relies on.
pub fn alg_to_span(alg: &QueryAlgorithm, c_const: f64) -> Result<SpanProgram> {
    if alg.t == 0 {
        return Err(Error::InvalidInput("conversion needs T ≥ 1".into()));
    }
    if c_const <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "c = {c_const} must be positive"
        )));
    }
    let d = alg.dim();
    let last = 2 * alg.t + 1;
    let steps = last + 1;
    let mut a = CMat::zeros(steps * d, steps * 2 * d);
    let mut tags = Vec::with_capacity(steps * 2 * d);
    let final_scale = (c_const * alg.t as f64).sqrt();
    for t in 0..steps {
        for b in 0..2 {
            for r in 0..d {
                let col = h_index(alg, t, b, r);
                let (j, _, ans) = alg.unreg(r);
                let tag = if t == last {
                    if ans == 1 {
                        a[(v_index(alg, t, r), col)] = c(1.0);
                        Tag::True
                    } else {
                        a[(v_index(alg, t, r), col)] = c(final_scale);
                        Tag::False
                    }
                } else if t % 2 == 0 {
                    a[(v_index(alg, t, r), col)] += c(1.0);
                    let image = &alg.unitaries[t / 2].column(r);
                    for (k, z) in image.iter().enumerate() {
                        a[(v_index(alg, t + 1, k), col)] -= z;
                    }
                    Tag::True
                } else {
                    a[(v_index(alg, t, r), col)] += c(1.0);
                    let sign = if b == 1 { -1.0 } else { 1.0 };
                    a[(v_index(alg, t + 1, r), col)] -= c(sign);
                    if j >= 1 {
                        Tag::Input { j, b: b as u8 }
                    } else if b == 0 {
                        Tag::True
                    } else {
                        Tag::False
                    }
                };
                if t == last && b == 1 {
                    a.column_mut(col).fill(ZERO);
                }
                tags.push(tag);
            }
        }
    }
    let tau = basis_vector(steps * d, v_index(alg, 0, alg.reg(0, 0, 0)));
    let field = if a.iter().all(|z| z.im == 0.0) {
        Field::Real
    } else {
        Field::Complex
    };
    SpanProgram::new(alg.n, tags, a, tau, field)
}

/// `Σ_{t≤2T} |t⟩Q_xΨ_t + |2T+1⟩|0⟩Π_1Ψ + (cT)^{-1/2}|2T+1⟩|0⟩Π_0Ψ` with
/// `Q_x|jza⟩ = |x_j⟩|jza⟩`; its error is `p0/(cT)`.
pub fn build_pos_witness(alg: &QueryAlgorithm, x: &[u8], c_const: f64) -> Result<ApproxWitness> {
    let res = run(alg, x)?;
    let d = alg.dim();
    let last = 2 * alg.t + 1;
    let mut w = CVec::zeros((last + 1) * 2 * d);
    for t in 0..last {
        for r in 0..d {
            let (j, _, _) = alg.unreg(r);
            let b = if j == 0 { 0 } else { x[j - 1] as usize };
            w[h_index(alg, t, b, r)] = res.states[t][r];
        }
    }
    let inv = 1.0 / (c_const * alg.t as f64).sqrt();
    let mut error = 0.0;
    for r in 0..d {
        let z = res.states[last][r];
        if r % 2 == 1 {
            w[h_index(alg, last, 0, r)] = z;
        } else {
            w[h_index(alg, last, 0, r)] = z * inv;
            error += (z * inv).norm_sqr();
        }
    }
    let size = norm_sq(&w);
    Ok(ApproxWitness { w, error, size })
}

/// `ω = p0⁻¹ Σ_t ⟨t|⟨Ψ⁰_t|` where `Ψ⁰_{2T+1} = Π_0Ψ_{2T+1}` is run backwards
/// through the algorithm; its value is `(4+c)T/p0`.
pub fn build_neg_witness(alg: &QueryAlgorithm, x: &[u8], c_const: f64) -> Result<NegativeWitness> {
    let res = run(alg, x)?;
    if res.p0 <= 1e-12 {
        return Err(Error::ZeroRejection);
    }
    let d = alg.dim();
    let last = 2 * alg.t + 1;
    let signs = alg.oracle_signs(x);
    let mut back = vec![CVec::zeros(d); last + 1];
    back[last] = alg.answer_part(&res.states[last], 0);
    for t in (1..=last).rev() {
        back[t - 1] = alg.apply_step_adjoint(t, &signs, &back[t]);
    }
    let mut omega = CVec::zeros((last + 1) * d);
    for (t, v) in back.iter().enumerate() {
        for r in 0..d {
            omega[v_index(alg, t, r)] = v[r] / res.p0;
        }
    }
    let p = alg_to_span(alg, c_const)?;
    let size = norm_sq(&(p.a.adjoint() * &omega));
    Ok(NegativeWitness { omega, size })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InputConversion {
    pub input: String,
    pub f: u8,
    pub p0: f64,
    pub built_pos_error: f64,
    pub built_pos_size: f64,
    pub built_neg_value: Option<f64>,
    pub solver_w_minus: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConversionReport {
    pub t: usize,
    pub c: f64,
    pub size: usize,
    pub w_minus: f64,
    pub w_plus_hat: Option<f64>,
    pub approximates: bool,
    pub w_minus_bound: f64,
    pub w_plus_hat_bound: f64,
    pub one_sided: bool,
    /// For one-sided algorithms: whether the program decides `f` exactly.
    pub exact: Option<bool>,
    pub inputs: Vec<InputConversion>,
    pub violations: Vec<String>,
}

impl ConversionReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Convert a bounded-error algorithm with `c = 5` and check the resulting
/// program: `W₋ ≤ 27T/2`, `Ŵ₊ ≤ 2T+2`, 9/10-approximation, and exactness
/// for one-sided algorithms.
pub fn verify_conversion(
    alg: &QueryAlgorithm,
    f: &DomainFunction,
    tol: &TolerancePolicy,
) -> Result<ConversionReport> {
    let c_const = DEFAULT_C;
    let mut inputs = vec![];
    let mut one_sided = true;
    for (x, fx) in &f.entries {
        let p0 = run(alg, x)?.p0;
        if (*fx == 0 && p0 < 2.0 / 3.0 - 1e-12) || (*fx == 1 && p0 > 1.0 / 3.0 + 1e-12) {
            return Err(Error::NotBoundedError(format!(
                "p0({}) = {p0} with f = {fx}",
                bits_to_string(x)
            )));
        }
        if *fx == 1 && p0 > 1e-12 {
            one_sided = false;
        }
    }
    let p = alg_to_span(alg, c_const)?;
    let report = complexity_report(&p, f, 0.9, tol)?;
    let mut violations = vec![];
    let tf = alg.t as f64;
    for (x, fx) in &f.entries {
        let p0 = run(alg, x)?.p0;
        let pos = build_pos_witness(alg, x, c_const)?;
        let (neg, solver) = if p0 > 1e-12 {
            let nw = build_neg_witness(alg, x, c_const)?;
            let sw = negative_witness(&p, x, tol).ok().map(|w| w.size);
            if let Some(s) = sw {
                if s > nw.size * (1.0 + 1e-6) {
                    violations.push(format!(
                        "solver w₋({}) = {s} exceeds built value {}",
                        bits_to_string(x),
                        nw.size
                    ));
                }
            }
            (Some(nw.size), sw)
        } else {
            (None, None)
        };
        inputs.push(InputConversion {
            input: bits_to_string(x),
            f: *fx,
            p0,
            built_pos_error: pos.error,
            built_pos_size: pos.size,
            built_neg_value: neg,
            solver_w_minus: solver,
        });
    }
    let w_minus_bound = 27.0 * tf / 2.0;
    let w_plus_hat_bound = 2.0 * tf + 2.0;
    if report.w_minus > w_minus_bound * (1.0 + 1e-9) {
        violations.push(format!("W₋ = {} > 27T/2", report.w_minus));
    }
    if let Some(wp) = report.w_plus_hat {
        if wp > w_plus_hat_bound * (1.0 + 1e-9) {
            violations.push(format!("Ŵ₊ = {wp} > 2T+2"));
        }
    }
    if !report.approximates {
        violations.push(format!(
            "not a 9/10-approximation: {}",
            report.failures.join("; ")
        ));
    }
    let exact = if one_sided {
        let r = complexity_report(&p, f, 0.0, tol)?;
        if !r.approximates {
            violations.push("one-sided algorithm does not give an exact program".into());
        }
        Some(r.approximates)
    } else {
        None
    };
    Ok(ConversionReport {
        t: alg.t,
        c: c_const,
        size: p.size(),
        w_minus: report.w_minus,
        w_plus_hat: report.w_plus_hat,
        approximates: report.approximates,
        w_minus_bound,
        w_plus_hat_bound,
        one_sided,
        exact,
        inputs,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::span_core::{apply_functional, evaluate};

    fn tol() -> TolerancePolicy {
        TolerancePolicy::default()
    }

    #[test]
    fn deutsch_runs() {
        let alg = fixtures::deutsch_algorithm();
        for (x, p0) in [([0u8, 0], 1.0), ([1, 1], 1.0), ([0, 1], 0.0), ([1, 0], 0.0)] {
            assert!((run(&alg, &x).unwrap().p0 - p0).abs() < 1e-12);
        }
    }

    #[test]
    fn built_witnesses_are_feasible() {
        let tol = tol();
        for (alg, f) in [
            (fixtures::deutsch_algorithm(), fixtures::deutsch_function()),
            (
                fixtures::two_sided_algorithm(),
                fixtures::two_sided_function(),
            ),
        ] {
            let p = alg_to_span(&alg, DEFAULT_C).unwrap();
            for (x, _) in &f.entries {
                let pos = build_pos_witness(&alg, x, DEFAULT_C).unwrap();
                assert!((&p.a * &pos.w - &p.tau).norm() < 1e-10);
                let err = norm_sq(&p.unavailable_part(x, &pos.w));
                assert!((err - pos.error).abs() < 1e-12);
                let r = run(&alg, x).unwrap();
                if r.p0 > 1e-12 {
                    let neg = build_neg_witness(&alg, x, DEFAULT_C).unwrap();
                    let one = apply_functional(&neg.omega, &p.tau);
                    assert!((one - c(1.0)).norm() < 1e-10);
                    let ax = p.restricted(x);
                    assert!((ax.adjoint() * &neg.omega).norm() < 1e-10);
                    assert!(!evaluate(&p, x, &tol).unwrap());
                } else {
                    assert!(matches!(
                        build_neg_witness(&alg, x, DEFAULT_C),
                        Err(Error::ZeroRejection)
                    ));
                }
            }
        }
    }

    #[test]
    fn conversion_needs_a_query() {
        let alg = QueryAlgorithm::new(1, 1, 0, vec![crate::numerics::identity(4)]).unwrap();
        assert!(alg_to_span(&alg, DEFAULT_C).is_err());
    }

    #[test]
    fn unbounded_error_is_rejected() {
        let alg = fixtures::two_sided_algorithm();
        // claim the opposite function
        let f = DomainFunction::total(1, |x| 1 - x[0]);
        assert!(matches!(
            verify_conversion(&alg, &f, &tol()),
            Err(Error::NotBoundedError(_))
        ));
    }
}
