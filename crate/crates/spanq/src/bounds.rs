//! Fourier analysis of ±1 functions, (approximate) degree, pattern matrices,
//! rank measures over rectangle covers, and the certificate and assignment
//! lower bounds built from them.
//!
//! Subsets `S ⊆ [m]` are bit masks in the same order as inputs: variable `i`
//! (1-indexed) is bit `m − i`, so `χ_S(z) = (−1)^{popcount(S & z)}`.

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use serde::{Deserialize, Serialize};

use crate::domain::{
    all_inputs, bits_to_index, bits_to_string, index_to_bits, DomainFunction, Input, TruthTable,
};
use crate::error::{Error, Result};
use crate::numerics::{
    numerical_rank, numerical_rank_real, thin_svd_real, CMat, RMat, TolerancePolicy,
};
use crate::span_core::{
    budget_witness, complexity_report, negative_witness, positive_witness, SpanProgram, Tag,
};

/// Largest arity accepted by the approximate-degree LP.
pub const MAX_LP_ARITY: usize = 14;
/// Largest `m·λ` for which pattern matrices are materialised.
pub const MAX_PATTERN_BITS: usize = 16;
/// Fourier coefficients below this are treated as zero.
pub const COEFF_TOL: f64 = 1e-9;
/// Slack on `‖p − q‖_∞ ≤ ε` when reading LP optima.
pub const LP_TOL: f64 = 1e-7;

fn chi(s: usize, z: usize) -> f64 {
    if (s & z).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// In-place Walsh–Hadamard transform (unnormalised).
fn fwht(v: &mut [f64]) {
    let mut h = 1;
    while h < v.len() {
        for i in (0..v.len()).step_by(2 * h) {
            for j in i..i + h {
                let (a, b) = (v[j], v[j + h]);
                v[j] = a + b;
                v[j + h] = a - b;
            }
        }
        h *= 2;
    }
}

pub fn subset_label(s: usize, m: usize) -> String {
    let vars: Vec<String> = (1..=m)
        .filter(|i| s >> (m - i) & 1 == 1)
        .map(|i| i.to_string())
        .collect();
    if vars.is_empty() {
        "∅".into()
    } else {
        format!("{{{}}}", vars.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierSpectrum {
    pub m: usize,
    /// `p̂(S)` indexed by subset mask.
    pub coeffs: Vec<f64>,
}

impl FourierSpectrum {
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.coeffs.len()).filter(|&s| self.coeffs[s].abs() > COEFF_TOL)
    }

    pub fn degree(&self) -> usize {
        self.support()
            .map(|s| s.count_ones() as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn inverse(&self) -> Vec<f64> {
        let mut v = self.coeffs.clone();
        fwht(&mut v);
        v
    }
}

pub fn fourier(p: &TruthTable) -> FourierSpectrum {
    let mut v = p.values.clone();
    fwht(&mut v);
    let scale = 1.0 / v.len() as f64;
    FourierSpectrum {
        m: p.m,
        coeffs: v.into_iter().map(|c| c * scale).collect(),
    }
}

pub fn degree(p: &TruthTable) -> usize {
    fourier(p).degree()
}

/// `φ` with `Σ|φ(z)| = 1`, orthogonal to every `χ_S` with `|S| ≤ degree`;
/// its correlation with `p` lower-bounds the error of any degree-`degree`
/// approximation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DualCertificate {
    pub degree: usize,
    pub phi: Vec<f64>,
    pub correlation: f64,
}

impl DualCertificate {
    /// Independent check via the Walsh–Hadamard transform of `φ`.
    pub fn verify(&self, p: &TruthTable, eps: f64) -> bool {
        let l1: f64 = self.phi.iter().map(|v| v.abs()).sum();
        let mut spec = self.phi.clone();
        fwht(&mut spec);
        let orth = spec
            .iter()
            .enumerate()
            .filter(|(s, _)| s.count_ones() as usize <= self.degree)
            .all(|(_, c)| c.abs() <= 1e-9);
        let corr: f64 = self.phi.iter().zip(&p.values).map(|(a, b)| a * b).sum();
        (l1 - 1.0).abs() <= 1e-9 && orth && corr > eps + LP_TOL
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ApproxDegree {
    pub eps: f64,
    pub degree: usize,
    /// Best uniform error at `degree`.
    pub error: f64,
    /// Certificate that degree `degree − 1` does not reach `eps`.
    pub certificate: Option<DualCertificate>,
}

fn lp_arity_guard(m: usize) -> Result<()> {
    if m > MAX_LP_ARITY {
        return Err(Error::TooLarge(format!(
            "m = {m} > {MAX_LP_ARITY} for the degree LP"
        )));
    }
    Ok(())
}

fn low_sets(m: usize, d: usize) -> Vec<usize> {
    (0..1usize << m)
        .filter(|s| s.count_ones() as usize <= d)
        .collect()
}

fn lp_err(e: impl std::fmt::Display) -> Error {
    Error::Numerical(format!("LP solver: {e}"))
}

/// `min_q max_z |p(z) − q(z)|` over `q` of degree at most `d`.
pub fn best_uniform_error(p: &TruthTable, d: usize) -> Result<f64> {
    lp_arity_guard(p.m)?;
    let sets = low_sets(p.m, d);
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let t = lp.add_var(1.0, (0.0, 2.0));
    // |q̂(S)| ≤ max|q| ≤ 2 for any q within 1 of a ±1 function
    let cs: Vec<_> = sets.iter().map(|_| lp.add_var(0.0, (-2.0, 2.0))).collect();
    for (z, &pz) in p.values.iter().enumerate() {
        let mut q: Vec<_> = sets
            .iter()
            .zip(&cs)
            .map(|(&s, &v)| (v, chi(s, z)))
            .collect();
        q.push((t, -1.0));
        lp.add_constraint(q.clone(), ComparisonOp::Le, pz);
        let mut q2: Vec<_> = sets
            .iter()
            .zip(&cs)
            .map(|(&s, &v)| (v, chi(s, z)))
            .collect();
        q2.push((t, 1.0));
        lp.add_constraint(q2, ComparisonOp::Ge, pz);
    }
    let sol = lp
        .solve()
        .map_err(lp_err)?
        .into_solution()
        .map_err(|_| lp_err("interrupted"))?;
    Ok(sol.objective().max(0.0))
}

/// Dual of [`best_uniform_error`]: maximise `Σφp` over `‖φ‖₁ = 1`, `φ ⊥ χ_S`
/// for `|S| ≤ d`.
pub fn dual_certificate(p: &TruthTable, d: usize) -> Result<DualCertificate> {
    lp_arity_guard(p.m)?;
    let size = p.values.len();
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let pos: Vec<_> = p
        .values
        .iter()
        .map(|&v| lp.add_var(v, (0.0, 1.0)))
        .collect();
    let neg: Vec<_> = p
        .values
        .iter()
        .map(|&v| lp.add_var(-v, (0.0, 1.0)))
        .collect();
    let all: Vec<_> = pos.iter().chain(&neg).map(|&v| (v, 1.0)).collect();
    lp.add_constraint(all, ComparisonOp::Eq, 1.0);
    for s in low_sets(p.m, d) {
        let row: Vec<_> = (0..size)
            .flat_map(|z| [(pos[z], chi(s, z)), (neg[z], -chi(s, z))])
            .collect();
        lp.add_constraint(row, ComparisonOp::Eq, 0.0);
    }
    let sol = lp
        .solve()
        .map_err(lp_err)?
        .into_solution()
        .map_err(|_| lp_err("interrupted"))?;
    let mut phi: Vec<f64> = (0..size)
        .map(|z| sol.var_value(pos[z]) - sol.var_value(neg[z]))
        .collect();
    let l1: f64 = phi.iter().map(|v| v.abs()).sum();
    if l1 > 0.0 {
        phi.iter_mut().for_each(|v| *v /= l1);
    }
    let correlation = phi.iter().zip(&p.values).map(|(a, b)| a * b).sum();
    Ok(DualCertificate {
        degree: d,
        phi,
        correlation,
    })
}

/// Least `d` whose best degree-`d` approximation is within `ε + 1e-7`,
/// with a dual certificate at `d − 1`.
pub fn approx_degree(p: &TruthTable, eps: f64) -> Result<ApproxDegree> {
    lp_arity_guard(p.m)?;
    if !(eps >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "ε = {eps} must be nonnegative"
        )));
    }
    let mut d = 0;
    let error = loop {
        let e = if d == p.m {
            0.0
        } else {
            best_uniform_error(p, d)?
        };
        if e <= eps + LP_TOL {
            break e;
        }
        d += 1;
    };
    let certificate = if d > 0 {
        Some(dual_certificate(p, d - 1)?)
    } else {
        None
    };
    Ok(ApproxDegree {
        eps,
        degree: d,
        error,
        certificate,
    })
}

fn pattern_guard(m: usize, lambda: usize) -> Result<()> {
    if lambda == 0 {
        return Err(Error::InvalidInput("λ must be positive".into()));
    }
    if m * lambda > MAX_PATTERN_BITS {
        return Err(Error::TooLarge(format!(
            "m·λ = {} > {MAX_PATTERN_BITS}",
            m * lambda
        )));
    }
    Ok(())
}

/// Column of `(x, w)`: `x ∈ [λ]^m` (1-indexed entries) major, `w` minor.
pub fn pattern_column(x: &[usize], w: &[u8], lambda: usize) -> usize {
    let xi = x.iter().fold(0, |acc, &k| acc * lambda + (k - 1));
    (xi << w.len()) + bits_to_index(w)
}

pub fn pattern_column_parts(col: usize, m: usize, lambda: usize) -> (Vec<usize>, Input) {
    let w = index_to_bits(col & ((1 << m) - 1), m);
    let mut xi = col >> m;
    let mut x = vec![0; m];
    for i in (0..m).rev() {
        x[i] = xi % lambda + 1;
        xi /= lambda;
    }
    (x, w)
}

/// `y|_x ⊕ w`, where bit `(i, k)` of `y` sits at position `(i−1)λ + (k−1)`.
pub fn pattern_argument(y: &[u8], x: &[usize], w: &[u8], lambda: usize) -> Input {
    x.iter()
        .enumerate()
        .map(|(i, &k)| y[i * lambda + k - 1] ^ w[i])
        .collect()
}

/// `F[y, (x, w)] = p(y|_x ⊕ w)`.
pub fn pattern_matrix(p: &TruthTable, lambda: usize) -> Result<RMat> {
    pattern_guard(p.m, lambda)?;
    let m = p.m;
    let rows = 1usize << (m * lambda);
    let cols = lambda.pow(m as u32) << m;
    let parts: Vec<_> = (0..cols)
        .map(|c| pattern_column_parts(c, m, lambda))
        .collect();
    let mut f = RMat::zeros(rows, cols);
    for r in 0..rows {
        let y = index_to_bits(r, m * lambda);
        for (c, (x, w)) in parts.iter().enumerate() {
            f[(r, c)] = p.at(&pattern_argument(&y, x, w, lambda));
        }
    }
    Ok(f)
}

/// `Σ_{S : p̂(S) ≠ 0} λ^{|S|}`.
pub fn sherstov_rank(p: &TruthTable, lambda: usize) -> u64 {
    fourier(p)
        .support()
        .map(|s| (lambda as u64).pow(s.count_ones()))
        .sum()
}

/// `λ^{deg_ε(p)} (ε − δ)² / (1 + δ)²`.
pub fn sherstov_eps_rank_lb(p: &TruthTable, lambda: usize, eps: f64, delta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&eps) || !(0.0..=eps).contains(&delta) {
        return Err(Error::InvalidInput(format!(
            "need 0 ≤ δ ≤ ε ≤ 1, got δ = {delta}, ε = {eps}"
        )));
    }
    let d = approx_degree(p, eps)?.degree;
    Ok((lambda as f64).powi(d as i32) * (eps - delta).powi(2) / (1.0 + delta).powi(2))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpsRankInterval {
    pub eps: f64,
    /// Certified lower bound.
    pub lower: usize,
    pub lower_source: String,
    /// Rank of `approximant`, found heuristically.
    pub upper: usize,
    #[serde(skip)]
    pub approximant: RMat,
}

fn max_abs_real(m: &RMat) -> f64 {
    m.iter().fold(0.0, |a, v| a.max(v.abs()))
}

fn truncate_rank(x: &RMat, r: usize) -> RMat {
    if r == 0 {
        return RMat::zeros(x.nrows(), x.ncols());
    }
    let (u, sv, v) = thin_svd_real(x);
    let mut out = RMat::zeros(x.nrows(), x.ncols());
    for k in 0..r.min(sv.len()) {
        out += u.column(k) * v.column(k).transpose() * sv[k];
    }
    out
}

/// Alternate between rank-`r` truncation and clipping into the ε-box.
fn rank_r_approximant(m: &RMat, eps: f64, r: usize, iters: usize) -> Option<RMat> {
    let within = |b: &RMat| max_abs_real(&(m - b)) <= eps + 1e-12;
    let mut x = m.clone();
    for _ in 0..iters {
        let b = truncate_rank(&x, r);
        if within(&b) {
            return Some(b);
        }
        x = b.zip_map(m, |bv, mv| bv.clamp(mv - eps, mv + eps));
    }
    None
}

/// Interval for `ε-rank(M)`. `pattern` names the `(p, λ)` when `M` is their
/// pattern matrix, enabling the Fourier lower bound.
pub fn eps_rank_interval(
    m: &RMat,
    eps: f64,
    pattern: Option<(&TruthTable, usize)>,
    tol: &TolerancePolicy,
) -> Result<EpsRankInterval> {
    if max_abs_real(m) > 1.0 + 1e-9 {
        return Err(Error::InvalidInput("‖M‖_∞ > 1".into()));
    }
    if !(eps >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "ε = {eps} must be nonnegative"
        )));
    }
    let rank = numerical_rank_real(m, tol);
    if eps == 0.0 {
        return Ok(EpsRankInterval {
            eps,
            lower: rank,
            lower_source: "exact rank".into(),
            upper: rank,
            approximant: m.clone(),
        });
    }
    let (mut upper, mut approximant) = (rank, m.clone());
    for r in (0..rank).rev() {
        match rank_r_approximant(m, eps, r, 500) {
            Some(b) => {
                upper = r;
                approximant = b;
            }
            None => break,
        }
    }
    let (mut lower, mut lower_source) = if eps < max_abs_real(m) {
        (1, "entry exceeding ε".to_string())
    } else {
        (0, "none".to_string())
    };
    if let Some((p, lambda)) = pattern {
        if eps <= 1.0 {
            for k in 0..=20 {
                let e = eps + (1.0 - eps) * k as f64 / 20.0;
                let b = sherstov_eps_rank_lb(p, lambda, e, eps)?;
                let cert = (b - 1e-9).ceil().max(0.0) as usize;
                if cert > lower {
                    lower = cert;
                    lower_source = format!("pattern-matrix bound at ε' = {e}");
                }
            }
        }
    }
    Ok(EpsRankInterval {
        eps,
        lower,
        lower_source,
        upper,
        approximant,
    })
}

/// `X_j × Y_j` with `X_j` a set of columns and `Y_j` a set of rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rectangle {
    pub cols: Vec<usize>,
    pub rows: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RectangleCover {
    pub n_rows: usize,
    pub n_cols: usize,
    pub rects: Vec<Rectangle>,
}

impl RectangleCover {
    pub fn validate(&self) -> Result<()> {
        if self.rects.is_empty() {
            return Err(Error::CoverInvalid("no rectangles".into()));
        }
        let mut covered = vec![false; self.n_rows * self.n_cols];
        for (j, r) in self.rects.iter().enumerate() {
            if r.rows.iter().any(|&y| y >= self.n_rows) || r.cols.iter().any(|&x| x >= self.n_cols)
            {
                return Err(Error::CoverInvalid(format!(
                    "rectangle {j} leaves the matrix"
                )));
            }
            for &y in &r.rows {
                for &x in &r.cols {
                    covered[y * self.n_cols + x] = true;
                }
            }
        }
        if let Some(k) = covered.iter().position(|c| !c) {
            return Err(Error::CoverInvalid(format!(
                "entry ({}, {}) is not covered",
                k / self.n_cols,
                k % self.n_cols
            )));
        }
        Ok(())
    }

    /// `Δ_j[y, x] = 1` iff `(y, x) ∈ Y_j × X_j`.
    pub fn mask(&self, j: usize) -> RMat {
        let mut d = RMat::zeros(self.n_rows, self.n_cols);
        for &y in &self.rects[j].rows {
            for &x in &self.rects[j].cols {
                d[(y, x)] = 1.0;
            }
        }
        d
    }

    /// Singletons `{(y, x)}` for every entry.
    pub fn singletons(n_rows: usize, n_cols: usize) -> Self {
        let rects = (0..n_rows)
            .flat_map(|y| {
                (0..n_cols).map(move |x| Rectangle {
                    cols: vec![x],
                    rows: vec![y],
                })
            })
            .collect();
        RectangleCover {
            n_rows,
            n_cols,
            rects,
        }
    }

    pub fn whole(n_rows: usize, n_cols: usize) -> Self {
        RectangleCover {
            n_rows,
            n_cols,
            rects: vec![Rectangle {
                cols: (0..n_cols).collect(),
                rows: (0..n_rows).collect(),
            }],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasureReport {
    pub kappa: f64,
    /// Certified lower bound on `√κ-rank(M)` (the rank when κ = 0).
    pub numerator_lower: usize,
    /// Heuristic upper bound on `√κ-rank(M)`.
    pub numerator_upper: usize,
    pub rect_ranks: Vec<usize>,
    pub max_rect_rank: usize,
    pub argmax: usize,
    /// Certified value `numerator_lower / max_rect_rank`.
    pub value: f64,
    pub heuristic_upper: f64,
}

fn check_matrix_and_cover(m: &RMat, cover: &RectangleCover) -> Result<()> {
    if (m.nrows(), m.ncols()) != (cover.n_rows, cover.n_cols) {
        return Err(Error::CoverInvalid(format!(
            "cover is {}×{}, matrix is {}×{}",
            cover.n_rows,
            cover.n_cols,
            m.nrows(),
            m.ncols()
        )));
    }
    if max_abs_real(m) > 1.0 + 1e-9 {
        return Err(Error::InvalidInput("‖M‖_∞ > 1".into()));
    }
    cover.validate()
}

/// `rank(M) / max_j rank(M ∘ Δ_j)`.
pub fn rank_measure(
    m: &RMat,
    cover: &RectangleCover,
    tol: &TolerancePolicy,
) -> Result<MeasureReport> {
    approx_rank_measure(m, cover, 0.0, None, tol)
}

/// `√κ-rank(M) / max_j rank(M ∘ Δ_j)`, as a certified/heuristic pair.
pub fn approx_rank_measure(
    m: &RMat,
    cover: &RectangleCover,
    kappa: f64,
    pattern: Option<(&TruthTable, usize)>,
    tol: &TolerancePolicy,
) -> Result<MeasureReport> {
    check_matrix_and_cover(m, cover)?;
    if !(0.0..1.0).contains(&kappa) {
        return Err(Error::InvalidInput(format!("κ = {kappa} not in [0,1)")));
    }
    let iv = eps_rank_interval(m, kappa.sqrt(), pattern, tol)?;
    let rect_ranks: Vec<usize> = (0..cover.rects.len())
        .map(|j| numerical_rank_real(&m.component_mul(&cover.mask(j)), tol))
        .collect();
    let (argmax, &max_rect_rank) = rect_ranks
        .iter()
        .enumerate()
        .max_by_key(|(_, r)| **r)
        .expect("nonempty cover");
    let ratio = |num: usize| {
        if max_rect_rank == 0 {
            0.0
        } else {
            num as f64 / max_rect_rank as f64
        }
    };
    Ok(MeasureReport {
        kappa,
        numerator_lower: iv.lower,
        numerator_upper: iv.upper,
        value: ratio(iv.lower),
        heuristic_upper: ratio(iv.upper),
        rect_ranks,
        max_rect_rank,
        argmax,
    })
}

/// The monotone function of a cover: `s^x_j = [x ∈ X_j]` are 1-inputs and
/// `t^y_j = [y ∉ Y_j]` are 0-inputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverFunction {
    pub n: usize,
    pub s: Vec<Input>,
    pub t: Vec<Input>,
    /// Pairs with `s^x ≤ t^y`; zero for a valid cover.
    pub violations: usize,
    pub measure: MeasureReport,
}

impl CoverFunction {
    pub fn function(&self) -> Result<DomainFunction> {
        let mut entries: Vec<(Input, u8)> = vec![];
        for s in &self.s {
            entries.push((s.clone(), 1));
        }
        for t in &self.t {
            entries.push((t.clone(), 0));
        }
        entries.sort();
        entries.dedup();
        DomainFunction::new(self.n, entries)
    }
}

pub fn cover_to_function(
    m: &RMat,
    cover: &RectangleCover,
    tol: &TolerancePolicy,
) -> Result<CoverFunction> {
    check_matrix_and_cover(m, cover)?;
    let n = cover.rects.len();
    let s: Vec<Input> = (0..cover.n_cols)
        .map(|x| {
            cover
                .rects
                .iter()
                .map(|r| r.cols.contains(&x) as u8)
                .collect()
        })
        .collect();
    let t: Vec<Input> = (0..cover.n_rows)
        .map(|y| {
            cover
                .rects
                .iter()
                .map(|r| (!r.rows.contains(&y)) as u8)
                .collect()
        })
        .collect();
    let violations = s
        .iter()
        .flat_map(|sx| {
            t.iter()
                .map(move |ty| sx.iter().zip(ty).all(|(a, b)| a <= b))
        })
        .filter(|&le| le)
        .count();
    if violations > 0 {
        return Err(Error::CoverInvalid(format!(
            "{violations} pairs with s^x ≤ t^y"
        )));
    }
    let measure = rank_measure(m, cover, tol)?;
    Ok(CoverFunction {
        n,
        s,
        t,
        violations,
        measure,
    })
}

/// `Λ_j[y, x] = ⟨ω_y|A Π_{j,ȳ_j} Π_{j,x_j}|w_x⟩` over `y ∈ f⁻¹(0)`, `x ∈ f⁻¹(1)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LambdaExtract {
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    #[serde(skip)]
    pub lambdas: Vec<CMat>,
    pub ranks: Vec<usize>,
    pub rank_sum: usize,
    /// `‖Σ_j Λ_j ∘ Δ_j − J‖_∞`.
    pub residual: f64,
}

pub fn lambda_extract(
    p: &SpanProgram,
    f: &DomainFunction,
    kappa: f64,
    tol: &TolerancePolicy,
) -> Result<LambdaExtract> {
    let rep = complexity_report(p, f, kappa, tol)?;
    if !rep.approximates {
        return Err(Error::NotApproximating(rep.failures.join("; ")));
    }
    let zeros: Vec<&Input> = f.zeros().collect();
    let ones: Vec<&Input> = f.ones().collect();
    let omegas = zeros
        .iter()
        .map(|y| negative_witness(p, y, tol).map(|w| w.omega))
        .collect::<Result<Vec<_>>>()?;
    let budget = kappa / rep.w_minus;
    let ws = ones
        .iter()
        .map(|x| {
            if kappa == 0.0 {
                positive_witness(p, x, tol).map(|w| w.w)
            } else {
                budget_witness(p, x, budget, tol).map(|w| w.w)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut lambdas = vec![CMat::zeros(zeros.len(), ones.len()); p.n];
    for (yi, y) in zeros.iter().enumerate() {
        let row = p.a.adjoint() * &omegas[yi];
        for (xi, x) in ones.iter().enumerate() {
            for (k, tag) in p.tags.iter().enumerate() {
                if let Tag::Input { j, b } = *tag {
                    if x[j - 1] == b && y[j - 1] != b {
                        lambdas[j - 1][(yi, xi)] += row[k].conj() * ws[xi][k];
                    }
                }
            }
        }
    }
    let mut residual: f64 = 0.0;
    for yi in 0..zeros.len() {
        for xi in 0..ones.len() {
            let s: num_complex::Complex64 = lambdas.iter().map(|l| l[(yi, xi)]).sum();
            residual = residual.max((s - 1.0).norm());
        }
    }
    let ranks: Vec<usize> = lambdas.iter().map(|l| numerical_rank(l, tol)).collect();
    Ok(LambdaExtract {
        rows: zeros.iter().map(|y| bits_to_string(y)).collect(),
        cols: ones.iter().map(|x| bits_to_string(x)).collect(),
        rank_sum: ranks.iter().sum(),
        ranks,
        lambdas,
        residual,
    })
}

/// Partial assignment on `[m]`; `None` leaves a variable free.
pub type Assignment = Vec<Option<u8>>;

/// `"1*0"` ↦ `[Some(1), None, Some(0)]`.
pub fn parse_assignment(s: &str) -> Result<Assignment> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(Some(0)),
            '1' => Ok(Some(1)),
            '*' => Ok(None),
            _ => Err(Error::Parse(format!(
                "assignment {s:?}: expected 0, 1 or *"
            ))),
        })
        .collect()
}

pub fn assignment_string(a: &Assignment) -> String {
    a.iter()
        .map(|v| match v {
            Some(0) => '0',
            Some(_) => '1',
            None => '*',
        })
        .collect()
}

pub fn satisfies(z: &[u8], a: &Assignment) -> bool {
    z.iter().zip(a).all(|(zi, ai)| ai.is_none_or(|v| v == *zi))
}

fn fixed(a: &Assignment) -> Vec<usize> {
    (0..a.len()).filter(|&i| a[i].is_some()).collect()
}

/// The common value of `p` on inputs satisfying `a`, if there is one.
pub fn certificate_value(p: &TruthTable, a: &Assignment) -> Option<f64> {
    let mut vals = all_inputs(p.m)
        .into_iter()
        .filter(|z| satisfies(z, a))
        .map(|z| p.at(&z));
    let v = vals.next()?;
    vals.all(|w| w == v).then_some(v)
}

/// `p` restricted to inputs satisfying `a`, as a function of the free variables.
pub fn restrict(p: &TruthTable, a: &Assignment) -> TruthTable {
    let free: Vec<usize> = (0..p.m).filter(|&i| a[i].is_none()).collect();
    let values = all_inputs(free.len())
        .iter()
        .map(|u| {
            let mut z: Input = a.iter().map(|v| v.unwrap_or(0)).collect();
            for (k, &i) in free.iter().enumerate() {
                z[i] = u[k];
            }
            p.at(&z)
        })
        .collect();
    TruthTable {
        m: free.len(),
        values,
    }
}

fn check_assignments(p: &TruthTable, assigns: &[Assignment]) -> Result<()> {
    if assigns.is_empty() {
        return Err(Error::NotCovering("no assignments".into()));
    }
    if let Some(a) = assigns.iter().find(|a| a.len() != p.m) {
        return Err(Error::InvalidInput(format!(
            "assignment {} has length {}, expected {}",
            assignment_string(a),
            a.len(),
            p.m
        )));
    }
    if let Some(z) = all_inputs(p.m)
        .into_iter()
        .find(|z| !assigns.iter().any(|a| satisfies(z, a)))
    {
        return Err(Error::NotCovering(format!(
            "input {} satisfies no assignment",
            bits_to_string(&z)
        )));
    }
    Ok(())
}

/// Label `(i, k, b)` of a pattern-matrix rectangle: assignment `i`, block
/// choices `k_j` and shifts `b_j` on its fixed set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternRectangle {
    pub i: usize,
    pub k: Vec<usize>,
    pub b: Vec<u8>,
}

/// `X_{i,k,b} = {(x,w) : x_j = k_j, w_j = b_j on S_i}`,
/// `Y_{i,k,b} = {y : y^{(j)}_{k_j} = b_j ⊕ α_i(j) on S_i}`.
pub fn pattern_cover(
    m: usize,
    lambda: usize,
    assigns: &[Assignment],
) -> Result<(Vec<PatternRectangle>, RectangleCover)> {
    pattern_guard(m, lambda)?;
    let rows = 1usize << (m * lambda);
    let cols = lambda.pow(m as u32) << m;
    let col_parts: Vec<_> = (0..cols)
        .map(|c| pattern_column_parts(c, m, lambda))
        .collect();
    let row_bits: Vec<Input> = (0..rows).map(|r| index_to_bits(r, m * lambda)).collect();
    let mut labels = vec![];
    let mut rects = vec![];
    for (i, a) in assigns.iter().enumerate() {
        let s = fixed(a);
        let combos = (2 * lambda).pow(s.len() as u32);
        for mut code in 0..combos {
            let mut k = vec![0; s.len()];
            let mut b = vec![0u8; s.len()];
            for t in (0..s.len()).rev() {
                b[t] = (code % 2) as u8;
                code /= 2;
                k[t] = code % lambda + 1;
                code /= lambda;
            }
            let cols_in = (0..cols)
                .filter(|&c| {
                    let (x, w) = &col_parts[c];
                    s.iter()
                        .enumerate()
                        .all(|(t, &j)| x[j] == k[t] && w[j] == b[t])
                })
                .collect();
            let rows_in = (0..rows)
                .filter(|&r| {
                    let y = &row_bits[r];
                    s.iter()
                        .enumerate()
                        .all(|(t, &j)| y[j * lambda + k[t] - 1] == b[t] ^ a[j].expect("fixed"))
                })
                .collect();
            labels.push(PatternRectangle { i, k, b });
            rects.push(Rectangle {
                cols: cols_in,
                rows: rows_in,
            });
        }
    }
    Ok((
        labels,
        RectangleCover {
            n_rows: rows,
            n_cols: cols,
            rects,
        },
    ))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateReport {
    pub n: u64,
    pub ell: usize,
    pub max_size: usize,
    pub approx_degree: usize,
    /// `(ε−√κ)²/(1+√κ)² · λ^{deg_ε(p)}`.
    pub bound: f64,
    /// Whether the cover and rank-1 checks ran (they need `m·λ ≤ 16`).
    pub structure_checked: bool,
    pub rectangles_checked: usize,
}

fn check_kappa_eps(kappa: f64, eps: f64) -> Result<()> {
    if !(0.0..1.0).contains(&kappa) || eps < kappa.sqrt() - 1e-12 || eps > 1.0 {
        return Err(Error::InvalidInput(format!(
            "need κ ∈ [0,1), ε ∈ [√κ, 1]; got κ = {kappa}, ε = {eps}"
        )));
    }
    Ok(())
}

/// Rank-1 cover of the pattern matrix from a certificate cover of `p`, and the
/// resulting lower bound.
pub fn certificate_bound(
    p: &TruthTable,
    certs: &[Assignment],
    lambda: usize,
    kappa: f64,
    eps: f64,
    tol: &TolerancePolicy,
) -> Result<CertificateReport> {
    check_kappa_eps(kappa, eps)?;
    if let Some(a) = certs.iter().find(|a| a.len() != p.m) {
        return Err(Error::InvalidInput(format!(
            "assignment {} has wrong length",
            assignment_string(a)
        )));
    }
    let values = certs
        .iter()
        .enumerate()
        .map(|(i, a)| certificate_value(p, a).ok_or(Error::NotACertificate(i)))
        .collect::<Result<Vec<_>>>()?;
    check_assignments(p, certs)?;
    let n = certs
        .iter()
        .map(|a| (2 * lambda as u64).pow(fixed(a).len() as u32))
        .sum();
    let adeg = approx_degree(p, eps)?.degree;
    let sk = kappa.sqrt();
    let bound = (eps - sk).powi(2) / (1.0 + sk).powi(2) * (lambda as f64).powi(adeg as i32);
    let mut rectangles_checked = 0;
    let structure_checked = p.m * lambda <= MAX_PATTERN_BITS;
    if structure_checked {
        let f = pattern_matrix(p, lambda)?;
        let (labels, cover) = pattern_cover(p.m, lambda, certs)?;
        cover.validate()?;
        for (lab, r) in labels.iter().zip(&cover.rects) {
            let v = values[lab.i];
            let constant = r
                .rows
                .iter()
                .all(|&y| r.cols.iter().all(|&x| f[(y, x)] == v));
            let sub = f.component_mul(&cover.mask(rectangles_checked));
            if !constant || numerical_rank_real(&sub, tol) != 1 {
                return Err(Error::Numerical(format!(
                    "rectangle {lab:?} is not rank one"
                )));
            }
            rectangles_checked += 1;
        }
    }
    Ok(CertificateReport {
        n,
        ell: certs.len(),
        max_size: certs.iter().map(|a| fixed(a).len()).max().unwrap_or(0),
        approx_degree: adeg,
        bound,
        structure_checked,
        rectangles_checked,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AssignmentReport {
    pub n: u64,
    pub approx_degree: usize,
    /// `Σ_{S : p̂_i(S) ≠ 0} λ^{|S|}` per assignment.
    pub denominators: Vec<u64>,
    pub max_denominator: u64,
    /// `(ε−√κ)² λ^{deg_ε(p)} / max_i denominator_i`.
    pub bound: f64,
    /// The same with the pattern-matrix factor `1/(1+√κ)²` kept.
    pub proof_bound: f64,
    pub structure_checked: bool,
    pub rectangles_checked: usize,
}

/// Bound from a cover of `{0,1}^m` by partial assignments whose restrictions
/// have sparse spectra.
pub fn assignment_bound(
    p: &TruthTable,
    assigns: &[Assignment],
    lambda: usize,
    kappa: f64,
    eps: f64,
    tol: &TolerancePolicy,
) -> Result<AssignmentReport> {
    check_kappa_eps(kappa, eps)?;
    check_assignments(p, assigns)?;
    let restricted: Vec<TruthTable> = assigns.iter().map(|a| restrict(p, a)).collect();
    let denominators: Vec<u64> = restricted
        .iter()
        .map(|pi| sherstov_rank(pi, lambda))
        .collect();
    let max_denominator = *denominators.iter().max().expect("nonempty");
    let adeg = approx_degree(p, eps)?.degree;
    let sk = kappa.sqrt();
    let num = (eps - sk).powi(2) * (lambda as f64).powi(adeg as i32);
    let mut rectangles_checked = 0;
    let structure_checked = p.m * lambda <= MAX_PATTERN_BITS;
    if structure_checked {
        let f = pattern_matrix(p, lambda)?;
        let (labels, cover) = pattern_cover(p.m, lambda, assigns)?;
        cover.validate()?;
        for (lab, r) in labels.iter().zip(&cover.rects) {
            let a = &assigns[lab.i];
            let free: Vec<usize> = (0..p.m).filter(|&j| a[j].is_none()).collect();
            let pi = &restricted[lab.i];
            for &row in &r.rows {
                let y = index_to_bits(row, p.m * lambda);
                for &col in &r.cols {
                    let (x, w) = pattern_column_parts(col, p.m, lambda);
                    let y2: Input = free
                        .iter()
                        .flat_map(|&j| y[j * lambda..(j + 1) * lambda].to_vec())
                        .collect();
                    let x2: Vec<usize> = free.iter().map(|&j| x[j]).collect();
                    let w2: Input = free.iter().map(|&j| w[j]).collect();
                    if f[(row, col)] != pi.at(&pattern_argument(&y2, &x2, &w2, lambda)) {
                        return Err(Error::Numerical(format!(
                            "rectangle {lab:?} is not a copy of F_i"
                        )));
                    }
                }
            }
            let sub = f.component_mul(&cover.mask(rectangles_checked));
            if numerical_rank_real(&sub, tol) as u64 != denominators[lab.i] {
                return Err(Error::Numerical(format!(
                    "rank of rectangle {lab:?} differs from rank(F_i)"
                )));
            }
            rectangles_checked += 1;
        }
    }
    Ok(AssignmentReport {
        n: assigns
            .iter()
            .map(|a| (2 * lambda as u64).pow(fixed(a).len() as u32))
            .sum(),
        approx_degree: adeg,
        max_denominator,
        bound: num / max_denominator as f64,
        proof_bound: num / (1.0 + sk).powi(2) / max_denominator as f64,
        denominators,
        structure_checked,
        rectangles_checked,
    })
}
