//! Monotone phase-estimation algorithms and their two-way correspondence
//! with monotone span programs.
//!
//! Register basis states carry a query label: `j ∈ 1..n` means the oracle
//! applies `(−1)^{x_j}`, and label 0 marks states the oracle never touches.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::domain::{all_inputs, bits_to_string, DomainFunction};
use crate::error::{Error, Result};
use crate::numerics::{
    c, check_unitary, fejer, identity, norm_sq, projectors, thin_svd, unitary_eig, CMat, CVec,
    TolerancePolicy, UnitaryEig, ZERO,
};
use crate::qsim::{ae_delta, ae_distribution};
use crate::span_core::{
    check_monotone, complexity_report, ApproxWitness, Field, NegativeWitness, SpanProgram, Tag,
};

/// `c₀ = 1/(3(1+π))` in the 0-input bound `‖Π₀ψ₀‖² ≥ δ(1+c₀)`.
pub const C0: f64 = 1.0 / (3.0 * (1.0 + PI));
/// Phase window `Θ = dπ/T` of the 1-input bounds.
pub const D_WINDOW: f64 = 0.5;
/// Largest `n` for exhaustive checks over `{0,1}^n`.
pub const MAX_EXHAUSTIVE_N: usize = 20;

/// `(U, ψ₀, δ, T, M)`: output 0 iff amplitude estimation (M steps) of the
/// phase-0 probability of phase estimation (T steps) on `UO_x` exceeds δ.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseEstimationAlgorithm {
    pub n: usize,
    pub labels: Vec<usize>,
    pub u: CMat,
    pub psi0: CVec,
    pub delta: f64,
    pub t: usize,
    pub m: usize,
}

impl PhaseEstimationAlgorithm {
    pub fn new(
        n: usize,
        labels: Vec<usize>,
        u: CMat,
        psi0: CVec,
        delta: f64,
        t: usize,
        m: usize,
    ) -> Result<Self> {
        let dim = labels.len();
        if u.shape() != (dim, dim) || psi0.len() != dim {
            return Err(Error::InvalidInput(format!(
                "U is {:?} and ψ₀ has length {} for {dim} register states",
                u.shape(),
                psi0.len()
            )));
        }
        if let Some(&l) = labels.iter().find(|&&l| l > n) {
            return Err(Error::InvalidInput(format!(
                "query label {l} exceeds n = {n}"
            )));
        }
        check_unitary(&u)?;
        let ns = norm_sq(&psi0);
        if (ns - 1.0).abs() > 1e-9 {
            return Err(Error::StateNotNormalized { norm_sq: ns });
        }
        if !(0.0..0.5).contains(&delta) {
            return Err(Error::InvalidInput(format!("δ = {delta} not in [0, 1/2)")));
        }
        if t == 0 || m == 0 {
            return Err(Error::InvalidInput("T and M must be positive".into()));
        }
        if delta > 0.0 && m as f64 * delta.sqrt() > 1.0 + 1e-9 {
            return Err(Error::InvalidInput(format!(
                "M√δ = {} > 1",
                m as f64 * delta.sqrt()
            )));
        }
        Ok(PhaseEstimationAlgorithm {
            n,
            labels,
            u,
            psi0,
            delta,
            t,
            m,
        })
    }

    /// Standard layout `|j, z⟩`, `j ∈ 1..n`, `z < z_count`, index `(j−1)|Z| + z`.
    pub fn with_blocks(
        n: usize,
        z_count: usize,
        u: CMat,
        psi0: CVec,
        delta: f64,
        t: usize,
        m: usize,
    ) -> Result<Self> {
        let labels = (1..=n)
            .flat_map(|j| std::iter::repeat_n(j, z_count))
            .collect();
        Self::new(n, labels, u, psi0, delta, t, m)
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn oracle_signs(&self, x: &[u8]) -> Vec<f64> {
        self.labels
            .iter()
            .map(|&l| if l >= 1 && x[l - 1] == 1 { -1.0 } else { 1.0 })
            .collect()
    }

    /// `U O_x`.
    pub fn walk(&self, x: &[u8]) -> Result<CMat> {
        if x.len() != self.n || x.iter().any(|&b| b > 1) {
            return Err(Error::InvalidInput(format!(
                "input {} is not an {}-bit string",
                bits_to_string(x),
                self.n
            )));
        }
        let mut m = self.u.clone();
        for (k, s) in self.oracle_signs(x).into_iter().enumerate() {
            if s < 0.0 {
                m.column_mut(k).neg_mut();
            }
        }
        Ok(m)
    }

    pub fn walk_eig(&self, x: &[u8], tol: &TolerancePolicy) -> Result<UnitaryEig> {
        unitary_eig(&self.walk(x)?, tol)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PeaRun {
    /// `‖Π₀(x)ψ₀‖²`.
    pub zero_mass: f64,
    /// Probability that phase estimation reads 0.
    pub p_x: f64,
    pub prob_output_zero: f64,
    pub output: u8,
}

/// Exact output law with `T' ≥ T` phase-estimation and `M' ≥ M`
/// amplitude-estimation steps.
pub fn run_pea(
    pea: &PhaseEstimationAlgorithm,
    x: &[u8],
    t_steps: usize,
    m_steps: usize,
    tol: &TolerancePolicy,
) -> Result<PeaRun> {
    let eig = pea.walk_eig(x, tol)?;
    let weights = eig.weights(&pea.psi0);
    let zero_mass = eig.mass_within(&pea.psi0, 0.0, tol.phase_group_tol);
    let p_x: f64 = weights
        .iter()
        .zip(&eig.phases)
        .map(|(w, th)| w * fejer(t_steps, *th))
        .sum::<f64>()
        .clamp(0.0, 1.0);
    let prob_output_zero = ae_distribution(p_x, m_steps)?
        .iter()
        .filter(|o| o.estimate > pea.delta)
        .map(|o| o.prob)
        .sum::<f64>();
    Ok(PeaRun {
        zero_mass,
        p_x,
        prob_output_zero,
        output: if prob_output_zero > 0.5 { 0 } else { 1 },
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonotoneCheck {
    pub monotone: bool,
    /// Largest `‖O_xΠ₀(x)ψ₀ − Π₀(x)ψ₀‖` over all inputs.
    pub max_defect: f64,
    pub worst_input: Option<String>,
}

/// `O_xΠ₀(x)ψ₀ = Π₀(x)ψ₀` for every `x ∈ {0,1}^n`.
pub fn is_monotone(pea: &PhaseEstimationAlgorithm, tol: &TolerancePolicy) -> Result<MonotoneCheck> {
    if pea.n > MAX_EXHAUSTIVE_N {
        return Err(Error::TooLarge(format!(
            "n = {} > {MAX_EXHAUSTIVE_N}",
            pea.n
        )));
    }
    let mut max_defect: f64 = 0.0;
    let mut worst = None;
    for x in all_inputs(pea.n) {
        let eig = pea.walk_eig(&x, tol)?;
        let v = eig.projector_within(0.0, tol.phase_group_tol) * &pea.psi0;
        let signs = pea.oracle_signs(&x);
        let defect = v
            .iter()
            .zip(&signs)
            .map(|(z, s)| (z * (s - 1.0)).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if defect > max_defect {
            max_defect = defect;
            worst = Some(bits_to_string(&x));
        }
    }
    Ok(MonotoneCheck {
        monotone: max_defect <= 1e-7,
        max_defect,
        worst_input: worst,
    })
}

/// Phase-estimation steps used by [`grover`].
pub fn grover_steps(n: usize) -> usize {
    (2.0 * PI * (n as f64).sqrt()).ceil() as usize
}

/// Grover search as a phase-estimation algorithm: `ψ₀` uniform,
/// `U = 2|ψ₀⟩⟨ψ₀| − I`, `δ = 0`, `M = 3`.
pub fn grover(n: usize) -> PhaseEstimationAlgorithm {
    grover_with_delta(n, 0.0)
}

pub fn grover_with_delta(n: usize, delta: f64) -> PhaseEstimationAlgorithm {
    let amp = c(1.0 / (n as f64).sqrt());
    let psi = CVec::from_element(n, amp);
    let u = (&psi * psi.adjoint()).scale(2.0) - identity(n);
    PhaseEstimationAlgorithm::with_blocks(n, 1, u, psi, delta, grover_steps(n), 3)
        .expect("valid Grover instance")
}

/// Size-`2·dim` span program: true columns `|j,z⟩ ↦ (I − U†)|j,z⟩` and
/// columns `|j,z,1⟩ ↦ |j,z⟩` tagged `(j, 1)` (false for label 0).
pub fn pea_to_span(pea: &PhaseEstimationAlgorithm) -> Result<SpanProgram> {
    let d = pea.dim();
    let mut a = CMat::zeros(d, 2 * d);
    a.view_mut((0, 0), (d, d))
        .copy_from(&(identity(d) - pea.u.adjoint()));
    a.view_mut((0, d), (d, d)).copy_from(&identity(d));
    let mut tags = vec![Tag::True; d];
    tags.extend(pea.labels.iter().map(|&l| {
        if l == 0 {
            Tag::False
        } else {
            Tag::Input { j: l, b: 1 }
        }
    }));
    let field = if a.iter().chain(pea.psi0.iter()).all(|z| z.im == 0.0) {
        Field::Real
    } else {
        Field::Complex
    };
    SpanProgram::new(pea.n, tags, a, pea.psi0.clone(), field)
}

/// `ω = Π₀(x)ψ₀ / ‖Π₀(x)ψ₀‖²`, of size `1/‖Π₀(x)ψ₀‖²` for monotone algorithms.
pub fn mono_neg_witness(
    pea: &PhaseEstimationAlgorithm,
    x: &[u8],
    tol: &TolerancePolicy,
) -> Result<NegativeWitness> {
    let eig = pea.walk_eig(x, tol)?;
    let v = eig.projector_within(0.0, tol.phase_group_tol) * &pea.psi0;
    let mass = norm_sq(&v);
    if mass <= 1e-12 {
        return Err(Error::NoZeroEigenmass);
    }
    let omega = v / c(mass);
    let p = pea_to_span(pea)?;
    let size = norm_sq(&(p.a.adjoint() * &omega));
    Ok(NegativeWitness { omega, size })
}

/// `w = (ψ₀ − (I−U†)v)|1⟩ + v` with `v = (I − (UO_x)†)⁺(I − Π_Θ)ψ₀`.
pub fn mono_pos_witness(
    pea: &PhaseEstimationAlgorithm,
    x: &[u8],
    theta: f64,
    tol: &TolerancePolicy,
) -> Result<ApproxWitness> {
    let eig = pea.walk_eig(x, tol)?;
    let d = pea.dim();
    let mut v = CVec::zeros(d);
    for (j, &ph) in eig.phases.iter().enumerate() {
        if ph.abs() > theta + 1e-12 {
            let lam = eig.vectors.column(j);
            let coeff =
                lam.dotc(&pea.psi0) / (c(1.0) - num_complex::Complex64::from_polar(1.0, -ph));
            v += lam * coeff;
        }
    }
    let top = &pea.psi0 - (identity(d) - pea.u.adjoint()) * &v;
    let mut w = CVec::zeros(2 * d);
    w.rows_mut(0, d).copy_from(&v);
    w.rows_mut(d, d).copy_from(&top);
    let p = pea_to_span(pea)?;
    let error = norm_sq(&p.unavailable_part(x, &w));
    let size = norm_sq(&w);
    Ok(ApproxWitness { w, error, size })
}

/// Parameters of the algorithm produced by [`span_to_pea`].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PeaSchedule {
    pub delta: f64,
    pub t: usize,
    pub m: usize,
    /// Amplitude-estimation steps that resolve the threshold gap.
    pub m_resolve: usize,
}

/// Threshold and step counts for a normalized program that decides `f`:
/// δ halfway between `1/W₋` and `1/(2W₋)`, `T` resolving `Θ`, and the
/// largest `M` allowed by `M√δ ≤ 1`.
pub fn pea_schedule(
    p: &SpanProgram,
    f: &DomainFunction,
    tol: &TolerancePolicy,
) -> Result<PeaSchedule> {
    let r = complexity_report(p, f, 0.0, tol)?;
    if !r.approximates {
        return Err(Error::NotApproximating(r.failures.join("; ")));
    }
    let wm = r.w_minus;
    let wp = r.w_plus.unwrap_or(1.0);
    let theta = (1.0 / (2.0 * wp * wm)).sqrt();
    let (q0, q1) = (1.0 / wm, 1.0 / (2.0 * wm));
    let gap = (q0 - q1) / 2.0;
    let delta = ((q0 + q1) / 2.0).min(0.499);
    let t = (PI / (theta * (gap / 2.0).sqrt())).ceil() as usize;
    let m = ((1.0 / delta.sqrt()).floor() as usize).max(1);
    let mut m_resolve = 1;
    while ae_delta(m_resolve) >= gap / 2.0 {
        m_resolve += 1;
    }
    Ok(PeaSchedule {
        delta,
        t,
        m,
        m_resolve,
    })
}

/// `U = (2Π_row(A) − I)·D`, `ψ₀ = A⁺τ`, where `D = −1` on true columns;
/// columns tagged `(j,1)` get label `j`, true/false columns label 0.
pub fn span_to_pea(
    p: &SpanProgram,
    schedule: &PeaSchedule,
    tol: &TolerancePolicy,
) -> Result<PhaseEstimationAlgorithm> {
    if !check_monotone(p) {
        return Err(Error::NotMonotone("program has (j,0) columns".into()));
    }
    let w0 = p.min_norm_solution(tol);
    let ns = norm_sq(&w0);
    if (ns - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized { norm_sq: ns });
    }
    let s = p.size();
    let mut u = projectors(&p.a, tol).row.scale(2.0) - identity(s);
    let mut labels = Vec::with_capacity(s);
    for (k, t) in p.tags.iter().enumerate() {
        match t {
            Tag::Input { j, .. } => labels.push(*j),
            Tag::True => {
                u.column_mut(k).neg_mut();
                labels.push(0);
            }
            Tag::False => labels.push(0),
        }
    }
    // renormalise against roundoff
    let psi0 = &w0 / c(ns.sqrt());
    // the projector is exact only up to roundoff; re-unitarise through its polar factor
    let (su, _, sv) = thin_svd(&u);
    let u = su * sv.adjoint();
    let delta = schedule.delta;
    let m = if delta > 0.0 {
        schedule
            .m
            .min(((1.0 / delta.sqrt()).floor() as usize).max(1))
    } else {
        schedule.m
    };
    PhaseEstimationAlgorithm::new(p.n, labels, u, psi0, delta, schedule.t, m)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PeBoundsReport {
    /// Which of the four bounds were exercised by some input.
    pub zero_mass_vs_m: bool,
    pub zero_mass_vs_delta: bool,
    pub window_empty: bool,
    pub window_vs_delta: bool,
    /// Smallest `P[output = f(x)]` over inputs and the `(T', M')` grid.
    pub min_success: f64,
}

/// Check the spectral consequences of a bounded-error phase-estimation
/// algorithm on `f`, then its bounded error on `T' ∈ {T, 2T}`, `M' ∈ {M, 2M}`.
pub fn verify_pe_bounds(
    pea: &PhaseEstimationAlgorithm,
    f: &DomainFunction,
    tol: &TolerancePolicy,
) -> Result<PeBoundsReport> {
    if f.n != pea.n {
        return Err(Error::InvalidInput(
            "function and algorithm disagree on n".into(),
        ));
    }
    let mut rep = PeBoundsReport {
        zero_mass_vs_m: false,
        zero_mass_vs_delta: false,
        window_empty: false,
        window_vs_delta: false,
        min_success: 1.0,
    };
    let window = D_WINDOW * PI / pea.t as f64;
    let m2 = (pea.m * pea.m) as f64;
    for (x, fx) in &f.entries {
        let eig = pea.walk_eig(x, tol)?;
        let violated = |q: String| Error::BoundViolated {
            input: bits_to_string(x),
            quantity: q,
        };
        if *fx == 0 {
            let mass = eig.mass_within(&pea.psi0, 0.0, tol.phase_group_tol);
            rep.zero_mass_vs_m = true;
            if mass < 1.0 / m2 - 1e-8 {
                return Err(violated(format!("‖Π₀ψ₀‖² = {mass} < 1/M² = {}", 1.0 / m2)));
            }
            if pea.delta > 0.0 {
                rep.zero_mass_vs_delta = true;
                let need = pea.delta * (1.0 + C0);
                if mass < need - 1e-8 {
                    return Err(violated(format!("‖Π₀ψ₀‖² = {mass} < δ(1+c₀) = {need}")));
                }
            }
        } else {
            let mass = eig.mass_within(&pea.psi0, window, 1e-12);
            if pea.delta == 0.0 {
                rep.window_empty = true;
                if mass > 1e-8 {
                    return Err(violated(format!("‖Π_(π/2T)ψ₀‖² = {mass} ≠ 0")));
                }
            } else {
                rep.window_vs_delta = true;
                let cap = pea.delta / (1.0 - D_WINDOW * D_WINDOW * PI * PI / 8.0);
                if mass > cap + 1e-8 {
                    return Err(violated(format!("‖Π_(π/2T)ψ₀‖² = {mass} > {cap}")));
                }
            }
        }
    }
    for (x, fx) in &f.entries {
        for &ts in &[pea.t, 2 * pea.t] {
            for &ms in &[pea.m, 2 * pea.m] {
                let r = run_pea(pea, x, ts, ms, tol)?;
                let ok = if *fx == 0 {
                    r.prob_output_zero
                } else {
                    1.0 - r.prob_output_zero
                };
                rep.min_success = rep.min_success.min(ok);
                if ok < 2.0 / 3.0 - 1e-9 {
                    return Err(Error::NotBoundedError(format!(
                        "input {} succeeds with probability {ok} at T' = {ts}, M' = {ms}",
                        bits_to_string(x)
                    )));
                }
            }
        }
    }
    Ok(rep)
}

/// The zero vector of the register, used when no eigenmass is present.
pub fn zero_state(pea: &PhaseEstimationAlgorithm) -> CVec {
    CVec::from_element(pea.dim(), ZERO)
}
