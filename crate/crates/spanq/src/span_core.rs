//! Span programs: evaluation, exact and approximate witnesses, complexity
//! reports, and the structural transforms (scaling, tensor squaring,
//! realification).

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::domain::{bits_to_string, DomainFunction};
use crate::error::{Error, Result};
use crate::numerics::{
    c, cokernel_basis, is_finite, kernel_basis, kron, kron_vec, norm_sq, pseudoinverse,
    truncated_svd, CMat, CVec, TolerancePolicy, ONE, ZERO,
};

/// Residual tolerance (relative to ‖τ‖) for `τ ∈ col(·)` tests.
pub const MEMBERSHIP_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Tag {
    /// Available iff `x_j = b`; `j` is 1-indexed.
    Input {
        j: usize,
        b: u8,
    },
    True,
    False,
}

impl Tag {
    pub fn available(&self, x: &[u8]) -> bool {
        match *self {
            Tag::Input { j, b } => x[j - 1] == b,
            Tag::True => true,
            Tag::False => false,
        }
    }
}

impl std::fmt::Display for Tag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Tag::Input { j, b } => write!(f, "{j},{b}"),
            Tag::True => write!(f, "true"),
            Tag::False => write!(f, "false"),
        }
    }
}

impl std::str::FromStr for Tag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Tag> {
        match s.trim() {
            "true" => Ok(Tag::True),
            "false" => Ok(Tag::False),
            other => {
                let bad = || Error::Parse(format!("bad column tag {other:?}"));
                let (j, b) = other.split_once(',').ok_or_else(bad)?;
                let j: usize = j.trim().parse().map_err(|_| bad())?;
                let b: u8 = b.trim().parse().map_err(|_| bad())?;
                if b > 1 {
                    return Err(bad());
                }
                Ok(Tag::Input { j, b })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

/// `P = (H, V, τ, A)` with `H` split into input, true and false columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SpanProgram {
    pub n: usize,
    pub tags: Vec<Tag>,
    pub a: CMat,
    pub tau: CVec,
    pub field: Field,
}

impl SpanProgram {
    pub fn new(n: usize, tags: Vec<Tag>, a: CMat, tau: CVec, field: Field) -> Result<Self> {
        let p = SpanProgram {
            n,
            tags,
            a,
            tau,
            field,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::MalformedProgram(m));
        if self.tags.len() != self.a.ncols() {
            return bad(format!(
                "{} column tags for {} columns",
                self.tags.len(),
                self.a.ncols()
            ));
        }
        if self.tau.len() != self.a.nrows() {
            return bad(format!(
                "τ has length {} but A has {} rows",
                self.tau.len(),
                self.a.nrows()
            ));
        }
        if self.tau.iter().all(|z| *z == ZERO) {
            return bad("τ is zero".into());
        }
        for t in &self.tags {
            if let Tag::Input { j, .. } = t {
                if *j == 0 || *j > self.n {
                    return bad(format!("tag ({t}) out of range for n = {}", self.n));
                }
            }
        }
        if !is_finite(&self.a)
            || !self
                .tau
                .iter()
                .all(|z| z.re.is_finite() && z.im.is_finite())
        {
            return bad("non-finite entry".into());
        }
        if self.field == Field::Real
            && (self.a.iter().any(|z| z.im != 0.0) || self.tau.iter().any(|z| z.im != 0.0))
        {
            return bad("real program with complex entries".into());
        }
        Ok(())
    }

    /// `s(P) = dim H`.
    pub fn size(&self) -> usize {
        self.a.ncols()
    }

    pub fn dim_v(&self) -> usize {
        self.a.nrows()
    }

    pub fn check_input(&self, x: &[u8]) -> Result<()> {
        if x.len() != self.n || x.iter().any(|&b| b > 1) {
            return Err(Error::InvalidInput(format!(
                "input {} does not have {} bits",
                bits_to_string(x),
                self.n
            )));
        }
        Ok(())
    }

    /// Membership of each column in `H(x)`.
    pub fn available(&self, x: &[u8]) -> Vec<bool> {
        self.tags.iter().map(|t| t.available(x)).collect()
    }

    /// `A Π_{H(x)}`: columns outside `H(x)` zeroed.
    pub fn restricted(&self, x: &[u8]) -> CMat {
        let mut m = self.a.clone();
        for (k, ok) in self.available(x).into_iter().enumerate() {
            if !ok {
                m.column_mut(k).fill(ZERO);
            }
        }
        m
    }

    /// `Π_{H(x)⊥} w`.
    pub fn unavailable_part(&self, x: &[u8], w: &CVec) -> CVec {
        let avail = self.available(x);
        CVec::from_iterator(
            w.len(),
            w.iter()
                .zip(avail)
                .map(|(z, ok)| if ok { ZERO } else { *z }),
        )
    }

    /// `w₀ = A⁺τ`.
    pub fn min_norm_solution(&self, tol: &TolerancePolicy) -> CVec {
        pseudoinverse(&self.a, tol) * &self.tau
    }
}

fn in_column_space(m: &CMat, v: &CVec, tol: &TolerancePolicy) -> bool {
    let q = truncated_svd(m, tol).u;
    let resid = v - &q * (q.adjoint() * v);
    resid.norm() <= MEMBERSHIP_TOL * v.norm().max(1e-300)
}

/// Backward-error test for a computed solution of `Aw = τ`, scaled by
/// `‖A‖_F‖w‖ + ‖τ‖` so ill-conditioned but consistent systems still pass.
fn solves(a: &CMat, w: &CVec, tau: &CVec) -> bool {
    (a * w - tau).norm() <= MEMBERSHIP_TOL * (a.norm() * w.norm() + tau.norm())
}

/// `P` accepts `x` iff `τ ∈ col(A Π_{H(x)})`.
pub fn evaluate(p: &SpanProgram, x: &[u8], tol: &TolerancePolicy) -> Result<bool> {
    p.check_input(x)?;
    Ok(in_column_space(&p.restricted(x), &p.tau, tol))
}

#[derive(Debug, Clone)]
pub struct PositiveWitness {
    pub w: CVec,
    pub size: f64,
}

/// Functional `v ↦ ⟨omega, v⟩` together with its size `‖ωA‖²`.
#[derive(Debug, Clone)]
pub struct NegativeWitness {
    pub omega: CVec,
    pub size: f64,
}

#[derive(Debug, Clone)]
pub struct ApproxWitness {
    pub w: CVec,
    pub error: f64,
    pub size: f64,
}

/// Minimal-norm `w ∈ H(x)` with `Aw = τ`.
pub fn positive_witness(
    p: &SpanProgram,
    x: &[u8],
    tol: &TolerancePolicy,
) -> Result<PositiveWitness> {
    p.check_input(x)?;
    let ax = p.restricted(x);
    let mut w = pseudoinverse(&ax, tol) * &p.tau;
    // zero the roundoff left on columns outside H(x)
    for (k, ok) in p.available(x).into_iter().enumerate() {
        if !ok {
            w[k] = ZERO;
        }
    }
    if !solves(&p.a, &w, &p.tau) {
        return Err(Error::NotAccepted);
    }
    let size = norm_sq(&w);
    Ok(PositiveWitness { w, size })
}

/// Minimal `‖ωA‖²` over functionals with `ωτ = 1` and `ωAΠ_{H(x)} = 0`.
pub fn negative_witness(
    p: &SpanProgram,
    x: &[u8],
    tol: &TolerancePolicy,
) -> Result<NegativeWitness> {
    if evaluate(p, x, tol)? {
        return Err(Error::NotRejected);
    }
    if !in_column_space(&p.a, &p.tau, tol) {
        return Err(Error::DegenerateTarget);
    }
    let ax = p.restricted(x);
    let nb = cokernel_basis(&ax, tol);
    let g = nb.adjoint() * &p.tau;
    // G = N†AA†N; apply G⁺ through the SVD of A†N to avoid squaring its condition
    let svd = truncated_svd(&(p.a.adjoint() * &nb), tol);
    let mut vg = svd.v.adjoint() * &g;
    for (k, s) in svd.sigma.iter().enumerate() {
        vg[k] /= s * s;
    }
    let gp = &svd.v * vg;
    let denom = g.dotc(&gp).re;
    if denom <= 0.0 || !denom.is_finite() {
        return Err(Error::DegenerateTarget);
    }
    let coeff = gp / c(denom);
    let omega = &nb * coeff;
    let size = norm_sq(&(p.a.adjoint() * &omega));
    Ok(NegativeWitness { omega, size })
}

/// Apply a functional stored as a vector: `⟨omega, v⟩`.
pub fn apply_functional(omega: &CVec, v: &CVec) -> C64 {
    omega.dotc(v)
}

/// Decomposition of the solution set `{ŵ : Aŵ = τ}` as `w₀ + K z`, with the
/// SVD of `Π_{H(x)⊥} K` used by the error-budget problems.
struct ErrorGeometry {
    w0: CVec,
    k: CMat,
    b0: CVec,
    sigma: Vec<f64>,
    q: CMat,
    beta: CVec,
    min_error: f64,
}

fn error_geometry(p: &SpanProgram, x: &[u8], tol: &TolerancePolicy) -> Result<ErrorGeometry> {
    p.check_input(x)?;
    let w0 = p.min_norm_solution(tol);
    if !solves(&p.a, &w0, &p.tau) {
        return Err(Error::TargetUnreachable);
    }
    let k = kernel_basis(&p.a, tol);
    let avail = p.available(x);
    let b0 = p.unavailable_part(x, &w0);
    let mut bk = k.clone();
    for (r, ok) in avail.iter().enumerate() {
        if *ok {
            bk.row_mut(r).fill(ZERO);
        }
    }
    let svd = truncated_svd(&bk, tol);
    let beta = svd.u.adjoint() * &b0;
    let min_error = norm_sq(&(&b0 - &svd.u * &beta));
    Ok(ErrorGeometry {
        w0,
        k,
        b0,
        sigma: svd.sigma,
        q: svd.v,
        beta,
        min_error,
    })
}

impl ErrorGeometry {
    fn error_at(&self, mu: f64) -> f64 {
        self.min_error
            + self
                .sigma
                .iter()
                .zip(self.beta.iter())
                .map(|(s, b)| b.norm_sqr() / (1.0 + mu * s * s).powi(2))
                .sum::<f64>()
    }

    /// Minimiser of `‖z‖² + μ‖b₀ + Bz‖²`; `None` means the `μ → ∞` limit.
    fn z_at(&self, mu: Option<f64>) -> CVec {
        let coeffs: Vec<C64> = self
            .sigma
            .iter()
            .zip(self.beta.iter())
            .map(|(&s, &b)| {
                let f = match mu {
                    Some(m) => m * s / (1.0 + m * s * s),
                    None => 1.0 / s,
                };
                -b * f
            })
            .collect();
        &self.q * DVector::from_vec(coeffs)
    }

    fn witness(&self, pr: &SpanProgram, x: &[u8], mu: Option<f64>) -> ApproxWitness {
        let w = &self.w0 + &self.k * self.z_at(mu);
        let error = norm_sq(&pr.unavailable_part(x, &w));
        let size = norm_sq(&w);
        ApproxWitness { w, error, size }
    }
}

/// `ŵ` with `Aŵ = τ` minimising `‖Π_{H(x)⊥} ŵ‖²` (least norm among those).
pub fn min_error_witness(
    p: &SpanProgram,
    x: &[u8],
    tol: &TolerancePolicy,
) -> Result<ApproxWitness> {
    let g = error_geometry(p, x, tol)?;
    Ok(g.witness(p, x, None))
}

/// Minimal `‖ŵ‖²` subject to `Aŵ = τ` and `‖Π_{H(x)⊥} ŵ‖² ≤ budget`, found by
/// bisection on the Lagrange multiplier of the error constraint.
pub fn budget_witness(
    p: &SpanProgram,
    x: &[u8],
    budget: f64,
    tol: &TolerancePolicy,
) -> Result<ApproxWitness> {
    let g = error_geometry(p, x, tol)?;
    if budget < g.min_error - 1e-8 * g.min_error.max(1.0) {
        return Err(Error::InfeasibleBudget {
            budget,
            min_error: g.min_error,
        });
    }
    if norm_sq(&g.b0) <= budget {
        return Ok(g.witness(p, x, Some(0.0)));
    }
    if budget <= g.min_error * (1.0 + 1e-12) + 1e-300 {
        return Ok(g.witness(p, x, None));
    }
    let mut hi = 1.0;
    while g.error_at(hi) > budget {
        hi *= 2.0;
        if hi > 1e300 {
            return Ok(g.witness(p, x, None));
        }
    }
    let mut lo = hi / 2.0;
    if g.error_at(lo) <= budget {
        lo = 0.0;
    }
    for _ in 0..60 {
        let mid = if lo > 0.0 { (lo * hi).sqrt() } else { hi / 2.0 };
        if g.error_at(mid) <= budget {
            hi = mid;
        } else {
            lo = mid;
        }
        if lo > 0.0 && hi / lo - 1.0 < 1e-15 {
            break;
        }
    }
    Ok(g.witness(p, x, Some(hi)))
}

/// Witness complexities of a program on a domain, and whether it
/// κ-approximates the function there.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub kappa: f64,
    /// `max w₊(x)` over accepted inputs of the domain.
    pub w_plus: Option<f64>,
    /// `max w₋(x)` over `f⁻¹(0)`; 1 when `f⁻¹(0)` is empty.
    pub w_minus: f64,
    /// `max ŵ₊(x, κ/W₋)` over `f⁻¹(1)`.
    pub w_plus_hat: Option<f64>,
    pub complexity: Option<f64>,
    pub approx_complexity: Option<f64>,
    pub approximates: bool,
    pub vacuous: bool,
    /// `W₋ · max min_error(x)` over `f⁻¹(1)`: the least κ the program achieves.
    pub effective_kappa: f64,
    pub failures: Vec<String>,
}

pub fn complexity_report(
    p: &SpanProgram,
    f: &DomainFunction,
    kappa: f64,
    tol: &TolerancePolicy,
) -> Result<ComplexityReport> {
    if f.n != p.n {
        return Err(Error::InvalidInput(format!(
            "function on {} bits, program on {}",
            f.n, p.n
        )));
    }
    if !(0.0..1.0).contains(&kappa) {
        return Err(Error::InvalidInput(format!("κ = {kappa} not in [0,1)")));
    }
    let mut failures = vec![];
    let mut w_minus: Option<f64> = None;
    let mut w_plus: Option<f64> = None;
    let upd = |acc: &mut Option<f64>, v: f64| *acc = Some(acc.map_or(v, |a: f64| a.max(v)));
    for (x, _) in &f.entries {
        if evaluate(p, x, tol)? {
            upd(&mut w_plus, positive_witness(p, x, tol)?.size);
        }
    }
    for x in f.zeros() {
        match negative_witness(p, x, tol) {
            Ok(nw) => upd(&mut w_minus, nw.size),
            Err(Error::NotRejected) => {
                failures.push(format!("0-input {} accepted", bits_to_string(x)))
            }
            Err(e) => return Err(e),
        }
    }
    let vacuous = f.zeros().next().is_none();
    let wm = if vacuous { 1.0 } else { w_minus.unwrap_or(1.0) };
    let budget = kappa / wm;
    let mut w_plus_hat: Option<f64> = None;
    let mut worst_error: f64 = 0.0;
    for x in f.ones() {
        let me = min_error_witness(p, x, tol)?;
        worst_error = worst_error.max(me.error);
        if kappa == 0.0 {
            match positive_witness(p, x, tol) {
                Ok(pw) => upd(&mut w_plus_hat, pw.size),
                Err(Error::NotAccepted) => {
                    failures.push(format!("1-input {} rejected", bits_to_string(x)))
                }
                Err(e) => return Err(e),
            }
        } else {
            match budget_witness(p, x, budget, tol) {
                Ok(bw) => upd(&mut w_plus_hat, bw.size),
                Err(Error::InfeasibleBudget { min_error, .. }) => failures.push(format!(
                    "1-input {} has min error {min_error:e} > κ/W₋ = {budget:e}",
                    bits_to_string(x)
                )),
                Err(e) => return Err(e),
            }
        }
    }
    let approximates = failures.is_empty();
    Ok(ComplexityReport {
        kappa,
        w_plus,
        w_minus: wm,
        w_plus_hat,
        complexity: w_plus.map(|wp| (wp * wm).sqrt()),
        approx_complexity: w_plus_hat.map(|wp| (wp * wm).sqrt()),
        approximates,
        vacuous,
        effective_kappa: wm * worst_error,
        failures,
    })
}

/// `P^β`: adds a false column holding `τ`, and a true column and row that
/// carry the extra target coordinate. Negative witnesses map to `β²w₋+1`.
pub fn scale(p: &SpanProgram, beta: f64, tol: &TolerancePolicy) -> Result<SpanProgram> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidInput(format!("β = {beta} must be positive")));
    }
    let nn = norm_sq(&p.min_norm_solution(tol));
    let (rows, cols) = p.a.shape();
    let mut a = CMat::zeros(rows + 1, cols + 2);
    a.view_mut((0, 0), (rows, cols)).copy_from(&p.a.scale(beta));
    a.view_mut((0, cols), (rows, 1)).copy_from(&p.tau);
    a[(rows, cols + 1)] = c((beta * beta + nn).sqrt() / beta);
    let mut tau = CVec::zeros(rows + 1);
    tau.rows_mut(0, rows).copy_from(&p.tau);
    tau[rows] = ONE;
    let mut tags = p.tags.clone();
    tags.push(Tag::False);
    tags.push(Tag::True);
    SpanProgram::new(p.n, tags, a, tau, p.field)
}

/// `P^β` with `β = 1/√W₋`, so that `W₋ ≤ 2` and `‖A⁺τ‖ = 1`.
pub fn normalize(
    p: &SpanProgram,
    f: &DomainFunction,
    tol: &TolerancePolicy,
) -> Result<SpanProgram> {
    let mut wm: f64 = 0.0;
    let mut any = false;
    for x in f.zeros() {
        wm = wm.max(negative_witness(p, x, tol)?.size);
        any = true;
    }
    if !any {
        wm = 1.0;
    }
    scale(p, 1.0 / wm.sqrt(), tol)
}

/// Multiply the target by `factor`: positive witnesses scale by `factor²`,
/// negative witnesses by `factor⁻²`, and κ is unchanged.
pub fn scale_target(p: &SpanProgram, factor: f64) -> Result<SpanProgram> {
    SpanProgram::new(
        p.n,
        p.tags.clone(),
        p.a.clone(),
        p.tau.scale(factor),
        p.field,
    )
}

/// Symmetrised tensor square: `A' = (A⊗A)(I+S)/2`, `τ' = τ⊗τ`, and column
/// `u⊗v` carries the tag of `u`.
pub fn tensor_square(p: &SpanProgram, tol: &TolerancePolicy) -> Result<SpanProgram> {
    let nn = norm_sq(&p.min_norm_solution(tol));
    if nn > 1.0 + 1e-9 {
        return Err(Error::NotNormalized { norm_sq: nn });
    }
    let s = p.size();
    let aa = kron(&p.a, &p.a);
    let mut a = CMat::zeros(aa.nrows(), s * s);
    for u in 0..s {
        for v in 0..s {
            let col = (aa.column(u * s + v) + aa.column(v * s + u)) * c(0.5);
            a.set_column(u * s + v, &col);
        }
    }
    let tags = (0..s * s).map(|k| p.tags[k / s]).collect();
    SpanProgram::new(p.n, tags, a, kron_vec(&p.tau, &p.tau), p.field)
}

/// Squarings needed to go from κ to κ': `⌈log₂(log(1/κ')/log(1/κ))⌉ + 1`.
pub fn squaring_depth(kappa: f64, kappa_target: f64) -> usize {
    let r = (1.0 / kappa_target).ln() / (1.0 / kappa).ln();
    (r.log2() - 1e-12).ceil().max(0.0) as usize + 1
}

/// Largest column count `reduce_kappa` will build.
pub const MAX_REDUCED_SIZE: usize = 1 << 12;

/// Normalize, then tensor-square `d` times to push κ down to at most κ'.
pub fn reduce_kappa(
    p: &SpanProgram,
    f: &DomainFunction,
    kappa: f64,
    kappa_target: f64,
    tol: &TolerancePolicy,
) -> Result<(SpanProgram, usize)> {
    if !(kappa > 0.0 && kappa < 1.0 && kappa_target > 0.0 && kappa_target <= kappa) {
        return Err(Error::InvalidInput(format!(
            "need 0 < κ' ≤ κ < 1, got κ = {kappa}, κ' = {kappa_target}"
        )));
    }
    let d = squaring_depth(kappa, kappa_target);
    let s = (p.size() + 2) as f64;
    let predicted = s.powf(2f64.powi(d as i32));
    if predicted > MAX_REDUCED_SIZE as f64 {
        return Err(Error::TooLarge(format!(
            "reduced program would have {predicted} columns"
        )));
    }
    let mut q = normalize(p, f, tol)?;
    for _ in 0..d {
        q = tensor_square(&q, tol)?;
    }
    Ok((q, d))
}

/// Real program computing the same function: column `k` becomes the pair
/// `(Re A_k; Im A_k)`, `(−Im A_k; Re A_k)` and `V` is stacked `(re; im)`.
pub fn realify(p: &SpanProgram) -> Result<SpanProgram> {
    if p.field == Field::Real {
        return Err(Error::AlreadyReal);
    }
    let (rows, cols) = p.a.shape();
    let mut a = CMat::zeros(2 * rows, 2 * cols);
    for k in 0..cols {
        for r in 0..rows {
            let z = p.a[(r, k)];
            a[(r, 2 * k)] = c(z.re);
            a[(rows + r, 2 * k)] = c(z.im);
            a[(r, 2 * k + 1)] = c(-z.im);
            a[(rows + r, 2 * k + 1)] = c(z.re);
        }
    }
    let mut tau = CVec::zeros(2 * rows);
    for r in 0..rows {
        tau[r] = c(p.tau[r].re);
        tau[rows + r] = c(p.tau[r].im);
    }
    let tags = p.tags.iter().flat_map(|t| [*t, *t]).collect();
    SpanProgram::new(p.n, tags, a, tau, Field::Real)
}

/// Monotone iff no column is tagged `(j, 0)`.
pub fn check_monotone(p: &SpanProgram) -> bool {
    !p.tags.iter().any(|t| matches!(t, Tag::Input { b: 0, .. }))
}

/// `A = (1 … 1)`, columns `(j, 1)`, `τ = 1`.
pub fn or_program(n: usize) -> SpanProgram {
    SpanProgram {
        n,
        tags: (1..=n).map(|j| Tag::Input { j, b: 1 }).collect(),
        a: CMat::from_element(1, n, ONE),
        tau: CVec::from_element(1, ONE),
        field: Field::Real,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::all_inputs;
    use crate::numerics::to_complex;
    use nalgebra::DMatrix;

    fn tol() -> TolerancePolicy {
        TolerancePolicy::default()
    }

    #[test]
    fn validation_rejects_malformed_programs() {
        let a = CMat::from_element(1, 1, ONE);
        let t = CVec::from_element(1, ONE);
        assert!(
            SpanProgram::new(1, vec![Tag::True], a.clone(), CVec::zeros(1), Field::Real).is_err()
        );
        assert!(SpanProgram::new(
            1,
            vec![Tag::Input { j: 2, b: 1 }],
            a.clone(),
            t.clone(),
            Field::Real
        )
        .is_err());
        assert!(
            SpanProgram::new(1, vec![Tag::True], a.clone(), CVec::zeros(2), Field::Real).is_err()
        );
        let mut nan = a.clone();
        nan[(0, 0)] = c(f64::NAN);
        assert!(SpanProgram::new(1, vec![Tag::True], nan, t.clone(), Field::Real).is_err());
        let ci = CMat::from_element(1, 1, C64::new(0.0, 1.0));
        assert!(SpanProgram::new(1, vec![Tag::True], ci, t, Field::Real).is_err());
    }

    #[test]
    fn or2_witness_sizes() {
        let p = or_program(2);
        let tol = tol();
        assert!(!evaluate(&p, &[0, 0], &tol).unwrap());
        for x in [[0u8, 1], [1, 0], [1, 1]] {
            assert!(evaluate(&p, &x, &tol).unwrap());
        }
        let w = positive_witness(&p, &[1, 1], &tol).unwrap();
        assert!((w.size - 0.5).abs() < 1e-12);
        let w = positive_witness(&p, &[1, 0], &tol).unwrap();
        assert!((w.size - 1.0).abs() < 1e-12);
        let nw = negative_witness(&p, &[0, 0], &tol).unwrap();
        assert!((nw.size - 2.0).abs() < 1e-12);
        assert!(matches!(
            negative_witness(&p, &[1, 0], &tol),
            Err(Error::NotRejected)
        ));
        assert!(matches!(
            positive_witness(&p, &[0, 0], &tol),
            Err(Error::NotAccepted)
        ));
        let me = min_error_witness(&p, &[0, 0], &tol).unwrap();
        assert!((me.error - 0.5).abs() < 1e-12);
    }

    #[test]
    fn degenerate_target_is_reported() {
        let a = to_complex(&DMatrix::from_row_slice(2, 1, &[1.0, 0.0]));
        let tau = CVec::from_vec(vec![ONE, ONE]);
        let p = SpanProgram::new(1, vec![Tag::Input { j: 1, b: 1 }], a, tau, Field::Real).unwrap();
        assert!(matches!(
            negative_witness(&p, &[0], &tol()),
            Err(Error::DegenerateTarget)
        ));
        assert!(matches!(
            min_error_witness(&p, &[0], &tol()),
            Err(Error::TargetUnreachable)
        ));
    }

    #[test]
    fn budget_interpolates_between_extremes() {
        let p = or_program(2);
        let tol = tol();
        let me = min_error_witness(&p, &[0, 0], &tol).unwrap();
        let at_min = budget_witness(&p, &[0, 0], me.error, &tol).unwrap();
        assert!((at_min.size - me.size).abs() < 1e-6 * me.size);
        assert!(matches!(
            budget_witness(&p, &[0, 0], 0.1, &tol),
            Err(Error::InfeasibleBudget { .. })
        ));
        // for accepted inputs a zero budget recovers the positive witness
        let pw = positive_witness(&p, &[1, 1], &tol).unwrap();
        let bw = budget_witness(&p, &[1, 1], 0.0, &tol).unwrap();
        assert!((pw.size - bw.size).abs() < 1e-10);
    }

    #[test]
    fn or_programs_are_exact() {
        let tol = tol();
        for n in 1..5 {
            let r = complexity_report(&or_program(n), &DomainFunction::or(n), 0.0, &tol).unwrap();
            assert!(r.approximates);
            assert!((r.w_minus - n as f64).abs() < 1e-9);
            assert!((r.w_plus.unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn scale_of_or2_matches_direct_computation() {
        let tol = tol();
        let p = or_program(2);
        let q = scale(&p, 1.0, &tol).unwrap();
        // N = ‖A⁺τ‖² = 1/2; the extra true column contributes β²/(β²+N) = 2/3
        let w = positive_witness(&q, &[1, 1], &tol).unwrap();
        assert!((w.size - (0.5 + 2.0 / 3.0)).abs() < 1e-10);
        let nw = negative_witness(&q, &[0, 0], &tol).unwrap();
        assert!((nw.size - 3.0).abs() < 1e-10);
        assert!((norm_sq(&q.min_norm_solution(&tol)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn normalize_or2() {
        let tol = tol();
        let q = normalize(&or_program(2), &DomainFunction::or(2), &tol).unwrap();
        assert_eq!(q.size(), 4);
        let nw = negative_witness(&q, &[0, 0], &tol).unwrap();
        assert!((nw.size - 2.0).abs() < 1e-10);
    }

    #[test]
    fn tensor_square_requires_normalization() {
        let tol = tol();
        let a = CMat::from_element(1, 1, c(0.5));
        let p = SpanProgram::new(
            1,
            vec![Tag::Input { j: 1, b: 1 }],
            a,
            CVec::from_element(1, ONE),
            Field::Real,
        )
        .unwrap();
        assert!(matches!(
            tensor_square(&p, &tol),
            Err(Error::NotNormalized { .. })
        ));
        let sq = tensor_square(&or_program(2), &tol).unwrap();
        assert_eq!(sq.size(), 4);
        assert_eq!(sq.tags[1], Tag::Input { j: 1, b: 1 });
        assert_eq!(sq.tags[2], Tag::Input { j: 2, b: 1 });
    }

    #[test]
    fn squaring_depths() {
        assert_eq!(squaring_depth(0.5, 0.25), 2);
        assert_eq!(squaring_depth(0.5, 0.5), 1);
    }

    #[test]
    fn realify_keeps_witness_sizes() {
        let tol = tol();
        let a = CMat::from_element(1, 1, C64::new(0.0, 1.0));
        let p = SpanProgram::new(
            1,
            vec![Tag::Input { j: 1, b: 1 }],
            a,
            CVec::from_element(1, ONE),
            Field::Complex,
        )
        .unwrap();
        let r = realify(&p).unwrap();
        assert_eq!(r.size(), 2);
        let w = positive_witness(&r, &[1], &tol).unwrap();
        assert!((w.size - 1.0).abs() < 1e-12);
        assert!(matches!(realify(&r), Err(Error::AlreadyReal)));
        assert!(check_monotone(&r));
        for x in all_inputs(1) {
            assert_eq!(
                evaluate(&p, &x, &tol).unwrap(),
                evaluate(&r, &x, &tol).unwrap()
            );
        }
    }

    #[test]
    fn tag_parsing_round_trips() {
        for t in [Tag::True, Tag::False, Tag::Input { j: 3, b: 0 }] {
            assert_eq!(t.to_string().parse::<Tag>().unwrap(), t);
        }
        assert!("3,2".parse::<Tag>().is_err());
        assert!("x".parse::<Tag>().is_err());
    }
}
