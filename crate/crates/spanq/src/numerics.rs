//! Dense real/complex linear algebra used by every other module: SVD-based
//! pseudoinverses and projectors, numerical rank, and eigendecomposition of
//! unitaries into sorted eigenphases.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;
pub type RMat = DMatrix<f64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Largest tolerated deviation of `U†U` from the identity (Frobenius norm).
pub const UNITARY_TOL: f64 = 1e-8;

/// Numerical tolerances shared across the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TolerancePolicy {
    /// A singular value counts iff `σ > factor · max(rows, cols) · σ_max`.
    pub rank_cutoff_factor: f64,
    /// Eigenphases closer than this are treated as one eigenspace.
    pub phase_group_tol: f64,
    /// Relative tolerance for comparing witness sizes and identities.
    pub witness_equality_tol: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        TolerancePolicy {
            rank_cutoff_factor: 1e-10,
            phase_group_tol: 1e-9,
            witness_equality_tol: 1e-6,
        }
    }
}

impl TolerancePolicy {
    pub fn cutoff(&self, rows: usize, cols: usize, sigma_max: f64) -> f64 {
        self.rank_cutoff_factor * rows.max(cols) as f64 * sigma_max
    }
}

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn to_complex(m: &RMat) -> CMat {
    m.map(c)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn basis_vector(n: usize, i: usize) -> CVec {
    let mut v = CVec::zeros(n);
    v[i] = ONE;
    v
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMat::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let s = a[(i, j)];
            if s == ZERO {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = s * b[(k, l)];
                }
            }
        }
    }
    out
}

pub fn kron_vec(a: &CVec, b: &CVec) -> CVec {
    let mut out = CVec::zeros(a.len() * b.len());
    for i in 0..a.len() {
        for k in 0..b.len() {
            out[i * b.len() + k] = a[i] * b[k];
        }
    }
    out
}

pub fn norm_sq(v: &CVec) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn is_finite(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Thin SVD restricted to the numerically nonzero singular values.
pub struct TruncatedSvd {
    pub u: CMat,
    pub sigma: Vec<f64>,
    pub v: CMat,
}

/// Thin SVD `m = U diag(σ) V†` with `σ` descending. Backed by faer, whose
/// SVD stays accurate on clustered singular values where nalgebra's does not.
pub fn thin_svd(m: &CMat) -> (CMat, Vec<f64>, CMat) {
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    if k == 0 {
        return (CMat::zeros(rows, 0), vec![], CMat::zeros(cols, 0));
    }
    let fm = faer::Mat::<faer::c64>::from_fn(rows, cols, |i, j| m[(i, j)]);
    let svd = fm.as_ref().thin_svd().expect("SVD did not converge");
    let s = svd.S().column_vector();
    let u = CMat::from_fn(rows, k, |i, j| svd.U()[(i, j)]);
    let v = CMat::from_fn(cols, k, |i, j| svd.V()[(i, j)]);
    (u, (0..k).map(|i| s[i].re).collect(), v)
}

/// Dense product `a·b` through faer's blocked kernel; nalgebra's generic
/// complex product is an order of magnitude slower at a few hundred rows.
pub fn matmul(a: &CMat, b: &CMat) -> CMat {
    assert_eq!(a.ncols(), b.nrows(), "matmul shape mismatch");
    let fa = faer::Mat::<faer::c64>::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)]);
    let fb = faer::Mat::<faer::c64>::from_fn(b.nrows(), b.ncols(), |i, j| b[(i, j)]);
    let p = &fa * &fb;
    CMat::from_fn(a.nrows(), b.ncols(), |i, j| p[(i, j)])
}

/// Eigendecomposition of a Hermitian matrix: ascending eigenvalues and
/// orthonormal eigenvectors as columns. Backed by faer.
pub fn herm_eig(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (vec![], CMat::zeros(0, 0));
    }
    let h = hermitize(m);
    let fm = faer::Mat::<faer::c64>::from_fn(n, n, |i, j| h[(i, j)]);
    let e = fm
        .as_ref()
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("Hermitian eigensolver did not converge");
    let s = e.S().column_vector();
    let vecs = CMat::from_fn(n, n, |i, j| e.U()[(i, j)]);
    ((0..n).map(|i| s[i].re).collect(), vecs)
}

/// Real counterpart of [`thin_svd`]: `m = U diag(σ) Vᵀ`.
pub fn thin_svd_real(m: &RMat) -> (RMat, Vec<f64>, RMat) {
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    if k == 0 {
        return (RMat::zeros(rows, 0), vec![], RMat::zeros(cols, 0));
    }
    let fm = faer::Mat::<f64>::from_fn(rows, cols, |i, j| m[(i, j)]);
    let svd = fm.as_ref().thin_svd().expect("SVD did not converge");
    let s = svd.S().column_vector();
    let u = RMat::from_fn(rows, k, |i, j| svd.U()[(i, j)]);
    let v = RMat::from_fn(cols, k, |i, j| svd.V()[(i, j)]);
    (u, (0..k).map(|i| s[i]).collect(), v)
}

pub fn truncated_svd(m: &CMat, tol: &TolerancePolicy) -> TruncatedSvd {
    let (rows, cols) = m.shape();
    let (u, sv, v) = thin_svd(m);
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let cut = tol.cutoff(rows, cols, smax);
    let keep: Vec<usize> = (0..sv.len())
        .filter(|&i| sv[i] > cut && sv[i] > 0.0)
        .collect();
    let mut tu = CMat::zeros(rows, keep.len());
    let mut tv = CMat::zeros(cols, keep.len());
    for (k, &i) in keep.iter().enumerate() {
        tu.set_column(k, &u.column(i));
        tv.set_column(k, &v.column(i));
    }
    TruncatedSvd {
        u: tu,
        sigma: keep.iter().map(|&i| sv[i]).collect(),
        v: tv,
    }
}

pub fn numerical_rank(m: &CMat, tol: &TolerancePolicy) -> usize {
    truncated_svd(m, tol).sigma.len()
}

pub fn numerical_rank_real(m: &RMat, tol: &TolerancePolicy) -> usize {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return 0;
    }
    let (_, sv, _) = thin_svd_real(m);
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let cut = tol.cutoff(rows, cols, smax);
    sv.iter().filter(|&&s| s > cut && s > 0.0).count()
}

/// Moore–Penrose pseudoinverse via SVD with the policy's rank cutoff.
pub fn pseudoinverse(m: &CMat, tol: &TolerancePolicy) -> CMat {
    let t = truncated_svd(m, tol);
    let mut vs = t.v.clone();
    for (k, s) in t.sigma.iter().enumerate() {
        vs.column_mut(k).scale_mut(1.0 / s);
    }
    vs * t.u.adjoint()
}

/// Orthogonal projectors onto the column space, row space and kernel.
pub struct Projectors {
    pub col: CMat,
    pub row: CMat,
    pub ker: CMat,
}

pub fn projectors(m: &CMat, tol: &TolerancePolicy) -> Projectors {
    let t = truncated_svd(m, tol);
    let col = matmul(&t.u, &t.u.adjoint());
    let row = matmul(&t.v, &t.v.adjoint());
    let ker = identity(m.ncols()) - &row;
    Projectors { col, row, ker }
}

/// Orthonormal basis of the range of a Hermitian projector.
pub fn projector_basis(p: &CMat) -> CMat {
    let n = p.nrows();
    if n == 0 {
        return CMat::zeros(0, 0);
    }
    let (vals, vecs) = herm_eig(p);
    let keep: Vec<usize> = (0..n).filter(|&i| vals[i] > 0.5).collect();
    let mut out = CMat::zeros(n, keep.len());
    for (k, &i) in keep.iter().enumerate() {
        out.set_column(k, &vecs.column(i));
    }
    out
}

/// Orthonormal basis of `ker(m)`.
pub fn kernel_basis(m: &CMat, tol: &TolerancePolicy) -> CMat {
    projector_basis(&projectors(m, tol).ker)
}

/// Orthonormal basis of `col(m)`.
pub fn range_basis(m: &CMat, tol: &TolerancePolicy) -> CMat {
    truncated_svd(m, tol).u
}

/// Orthonormal basis of the orthogonal complement of `col(m)`.
pub fn cokernel_basis(m: &CMat, tol: &TolerancePolicy) -> CMat {
    let q = range_basis(m, tol);
    projector_basis(&(identity(m.nrows()) - &q * q.adjoint()))
}

pub fn unitarity_defect(u: &CMat) -> f64 {
    (matmul(&u.adjoint(), u) - identity(u.ncols())).norm()
}

pub fn check_unitary(u: &CMat) -> Result<()> {
    if !u.is_square() {
        return Err(Error::NotUnitary {
            deviation: f64::INFINITY,
        });
    }
    let d = unitarity_defect(u);
    if d > UNITARY_TOL || !d.is_finite() {
        return Err(Error::NotUnitary { deviation: d });
    }
    Ok(())
}

/// Eigendecomposition `U = Σ_j e^{iθ_j} |v_j⟩⟨v_j|` of a unitary.
#[derive(Debug, Clone)]
pub struct UnitaryEig {
    /// Eigenphases in (−π, π], ascending.
    pub phases: Vec<f64>,
    /// Orthonormal eigenvectors, column `j` belongs to `phases[j]`.
    pub vectors: CMat,
    /// Index ranges of phases that coincide within `phase_group_tol`.
    pub groups: Vec<std::ops::Range<usize>>,
}

impl UnitaryEig {
    pub fn dim(&self) -> usize {
        self.phases.len()
    }

    /// Projector onto eigenvectors with `|θ| ≤ theta` (inclusive, up to `slack`).
    pub fn projector_within(&self, theta: f64, slack: f64) -> CMat {
        let n = self.dim();
        let mut p = CMat::zeros(n, n);
        for (j, &ph) in self.phases.iter().enumerate() {
            if ph.abs() <= theta + slack {
                let v = self.vectors.column(j);
                p += &v * v.adjoint();
            }
        }
        p
    }

    /// Squared overlaps `|⟨v_j|ψ⟩|²` for every eigenvector.
    pub fn weights(&self, psi: &CVec) -> Vec<f64> {
        (0..self.dim())
            .map(|j| self.vectors.column(j).dotc(psi).norm_sqr())
            .collect()
    }

    /// `‖Π_θ ψ‖²` where `Π_θ` projects on phases with `|θ_j| ≤ theta + slack`.
    pub fn mass_within(&self, psi: &CVec, theta: f64, slack: f64) -> f64 {
        self.weights(psi)
            .iter()
            .zip(&self.phases)
            .filter(|(_, ph)| ph.abs() <= theta + slack)
            .map(|(w, _)| w)
            .sum()
    }

    pub fn reconstruct(&self) -> CMat {
        let mut vd = self.vectors.clone();
        for (j, &ph) in self.phases.iter().enumerate() {
            let mut col = vd.column_mut(j);
            col *= C64::from_polar(1.0, ph);
        }
        matmul(&vd, &self.vectors.adjoint())
    }
}

/// Diagonalise a unitary through its commuting Hermitian parts
/// `(U+U†)/2` and `(U−U†)/2i`: the first splits by cos θ, the second
/// resolves each cos-cluster by sin θ.
pub fn unitary_eig(u: &CMat, tol: &TolerancePolicy) -> Result<UnitaryEig> {
    check_unitary(u)?;
    let n = u.nrows();
    if n == 0 {
        return Ok(UnitaryEig {
            phases: vec![],
            vectors: CMat::zeros(0, 0),
            groups: vec![],
        });
    }
    let ud = u.adjoint();
    let herm_cos = (u + &ud).scale(0.5);
    let herm_sin = (u - &ud) * C64::new(0.0, -0.5);
    let (vals1, vecs1) = herm_eig(&herm_cos);

    const CLUSTER_TOL: f64 = 1e-7;
    let mut vectors = CMat::zeros(n, n);
    let mut filled = 0;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && vals1[end] - vals1[end - 1] <= CLUSTER_TOL {
            end += 1;
        }
        let k = end - start;
        let q = vecs1.columns(start, k).into_owned();
        let (_, vecs2) = herm_eig(&matmul(&matmul(&q.adjoint(), &herm_sin), &q));
        let rotated = matmul(&q, &vecs2);
        for c in 0..k {
            vectors.set_column(filled + c, &rotated.column(c));
        }
        filled += k;
        start = end;
    }

    let uv = matmul(u, &vectors);
    let mut raw: Vec<(f64, usize)> = (0..n)
        .map(|j| {
            let z = vectors.column(j).dotc(&uv.column(j));
            let mut ph = z.arg();
            if ph <= -PI + tol.phase_group_tol {
                ph += 2.0 * PI;
            }
            (ph.min(PI), j)
        })
        .collect();
    raw.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut sorted = CMat::zeros(n, n);
    for (k, &(_, j)) in raw.iter().enumerate() {
        sorted.set_column(k, &vectors.column(j));
    }
    let phases: Vec<f64> = raw.iter().map(|p| p.0).collect();
    let mut groups = vec![];
    let mut s = 0;
    for j in 1..=n {
        if j == n || phases[j] - phases[j - 1] > tol.phase_group_tol {
            groups.push(s..j);
            s = j;
        }
    }
    let eig = UnitaryEig {
        phases,
        vectors: sorted,
        groups,
    };
    let err = (eig.reconstruct() - u).norm();
    if err > 1e-8 {
        return Err(Error::Numerical(format!(
            "unitary eigendecomposition reconstruction error {err:.3e}"
        )));
    }
    Ok(eig)
}

fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// Extend orthonormal columns `q` (n×k) to a full orthonormal basis (n×n).
pub fn complete_basis(q: &CMat) -> CMat {
    let n = q.nrows();
    let mut cols: Vec<CVec> = (0..q.ncols()).map(|j| q.column(j).into_owned()).collect();
    for i in 0..n {
        if cols.len() == n {
            break;
        }
        let mut v = basis_vector(n, i);
        for _ in 0..2 {
            for b in &cols {
                let proj = b.dotc(&v);
                v -= b * proj;
            }
        }
        let nv = v.norm();
        if nv > 1e-6 {
            cols.push(v / c(nv));
        }
    }
    CMat::from_columns(&cols)
}

/// A unitary sending each orthonormal input `inputs[k]` to `outputs[k]`;
/// the orthogonal complements are matched in a fixed canonical way.
pub fn unitary_from_map(inputs: &[CVec], outputs: &[CVec]) -> CMat {
    assert_eq!(inputs.len(), outputs.len());
    let n = inputs.first().map(|v| v.len()).unwrap_or(0);
    let a = complete_basis(&CMat::from_columns(inputs));
    let b = complete_basis(&CMat::from_columns(outputs));
    debug_assert_eq!(a.ncols(), n);
    b * a.adjoint()
}

/// Probability that phase estimation with `t` steps reads outcome 0 on an
/// eigenvector of phase `phi`: `|t⁻¹ Σ_s e^{isφ}|²`.
pub fn fejer(t: usize, phi: f64) -> f64 {
    let tf = t as f64;
    let half = phi / 2.0;
    let s = half.sin();
    if s.abs() < 1e-12 {
        // φ ∈ 2πℤ
        return 1.0;
    }
    let num = (tf * half).sin();
    (num * num) / (tf * tf * s * s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, r: usize, cc: usize) -> CMat {
        CMat::from_fn(r, cc, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> CMat {
        random_matrix(rng, n, n).qr().q()
    }

    #[test]
    fn pseudoinverse_satisfies_penrose_identities() {
        let tol = TolerancePolicy::default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..30 {
            let r = rng.random_range(1..6);
            let k = rng.random_range(1..4);
            let cc = rng.random_range(1..7);
            // rank ≤ k by construction
            let m = random_matrix(&mut rng, r, k) * random_matrix(&mut rng, k, cc);
            let p = pseudoinverse(&m, &tol);
            assert!((&m * &p * &m - &m).norm() < 1e-8);
            assert!((&p * &m * &p - &p).norm() < 1e-8);
            let mp = &m * &p;
            let pm = &p * &m;
            assert!((&mp - mp.adjoint()).norm() < 1e-8);
            assert!((&pm - pm.adjoint()).norm() < 1e-8);
        }
    }

    #[test]
    fn rank_of_diag_with_tiny_entry() {
        let tol = TolerancePolicy::default();
        let m = to_complex(&RMat::from_diagonal(&DVector::from_vec(vec![1.0, 1e-14])));
        assert_eq!(numerical_rank(&m, &tol), 1);
        let z = CMat::zeros(3, 2);
        assert_eq!(numerical_rank(&z, &tol), 0);
        assert_eq!(pseudoinverse(&z, &tol).shape(), (2, 3));
    }

    #[test]
    fn projectors_of_all_ones_row() {
        let tol = TolerancePolicy::default();
        let m = CMat::from_element(1, 2, ONE);
        let p = projectors(&m, &tol);
        let half = CMat::from_element(2, 2, c(0.5));
        assert!((&p.row - &half).norm() < 1e-12);
        assert!((&p.row + &p.ker - identity(2)).norm() < 1e-12);
        assert!((&p.col - identity(1)).norm() < 1e-12);
    }

    #[test]
    fn eig_of_swap_and_phase_gates() {
        let tol = TolerancePolicy::default();
        let x = CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        let e = unitary_eig(&x, &tol).unwrap();
        assert!((e.phases[0]).abs() < 1e-12);
        assert!((e.phases[1] - PI).abs() < 1e-12);
        let v0 = e.vectors.column(0);
        assert!((v0[0].norm() - 0.5f64.sqrt()).abs() < 1e-12);

        let neg = identity(3).scale(-1.0);
        let e = unitary_eig(&neg, &tol).unwrap();
        assert!(e.phases.iter().all(|p| (p - PI).abs() < 1e-12));
        assert_eq!(e.groups.len(), 1);
    }

    #[test]
    fn eig_reconstructs_random_and_degenerate_unitaries() {
        let tol = TolerancePolicy::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..9 {
            let u = random_unitary(&mut rng, n);
            let e = unitary_eig(&u, &tol).unwrap();
            assert!((e.reconstruct() - &u).norm() < 1e-8);
            assert!((e.vectors.adjoint() * &e.vectors - identity(n)).norm() < 1e-8);
            assert!(e.phases.windows(2).all(|w| w[0] <= w[1]));

            // reflection with a large degenerate eigenspace
            let q = random_unitary(&mut rng, n);
            let k = n / 2;
            let mut d = identity(n);
            for i in 0..k {
                d[(i, i)] = c(-1.0);
            }
            let refl = &q * d * q.adjoint();
            let e = unitary_eig(&refl, &tol).unwrap();
            assert!((e.reconstruct() - &refl).norm() < 1e-8);
            assert_eq!(
                e.phases.iter().filter(|p| (*p - PI).abs() < 1e-9).count(),
                k
            );
        }
    }

    #[test]
    fn eig_rejects_non_unitary() {
        let tol = TolerancePolicy::default();
        let m = identity(2).scale(1.1);
        assert!(matches!(
            unitary_eig(&m, &tol),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn fejer_kernel_values() {
        assert!((fejer(4, 0.0) - 1.0).abs() < 1e-15);
        assert!(fejer(4, 2.0 * PI / 4.0).abs() < 1e-15);
        assert!((fejer(5, PI) - 1.0 / 25.0).abs() < 1e-15);
        // direct sum oracle
        for &(t, phi) in &[(3usize, 0.4f64), (7, -2.1), (16, 3.1)] {
            let s: C64 = (0..t).map(|k| C64::from_polar(1.0, k as f64 * phi)).sum();
            assert!((fejer(t, phi) - (s / t as f64).norm_sqr()).abs() < 1e-12);
        }
    }

    #[test]
    fn unitary_from_map_sends_inputs_to_outputs() {
        let s = 0.5f64.sqrt();
        let inp = vec![CVec::from_vec(vec![c(s), c(s), ZERO])];
        let out = vec![basis_vector(3, 2)];
        let u = unitary_from_map(&inp, &out);
        assert!(unitarity_defect(&u) < 1e-12);
        assert!((&u * &inp[0] - &out[0]).norm() < 1e-12);
    }
}
