//! Seeded random instances for property sweeps.

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::domain::all_inputs;
use crate::numerics::{c, norm_sq, CMat, CVec, TolerancePolicy};
use crate::span_core::{evaluate, Field, SpanProgram, Tag};

pub type Rng64 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng64 {
    rand::SeedableRng::seed_from_u64(seed)
}

fn normal(rng: &mut Rng64) -> f64 {
    rng.sample(StandardNormal)
}

pub fn real_matrix(rng: &mut Rng64, r: usize, k: usize) -> CMat {
    CMat::from_fn(r, k, |_, _| c(normal(rng)))
}

pub fn complex_matrix(rng: &mut Rng64, r: usize, k: usize) -> CMat {
    CMat::from_fn(r, k, |_, _| C64::new(normal(rng), normal(rng)))
}

/// Haar-ish unitary from the QR factor of a complex Gaussian matrix.
pub fn unitary(rng: &mut Rng64, d: usize) -> CMat {
    complex_matrix(rng, d, d).qr().q()
}

pub fn state(rng: &mut Rng64, d: usize) -> CVec {
    let v = complex_matrix(rng, d, 1).column(0).into_owned();
    let n = norm_sq(&v).sqrt();
    v / c(n)
}

/// Orthogonal projector onto a random subspace of dimension `rank`.
pub fn projector(rng: &mut Rng64, d: usize, rank: usize) -> CMat {
    let q = unitary(rng, d);
    let b = q.columns(0, rank);
    &b * b.adjoint()
}

pub fn tag(rng: &mut Rng64, n: usize) -> Tag {
    match rng.random_range(0..2 * n + 2) {
        k if k < 2 * n => Tag::Input {
            j: k / 2 + 1,
            b: (k % 2) as u8,
        },
        k if k == 2 * n => Tag::True,
        _ => Tag::False,
    }
}

/// Real program with Gaussian `A` and `τ ∈ col(A)`, redrawn until it both
/// accepts and rejects some input.
pub fn program(
    rng: &mut Rng64,
    n: usize,
    dim_v: usize,
    size: usize,
    tol: &TolerancePolicy,
) -> SpanProgram {
    loop {
        let a = real_matrix(rng, dim_v, size);
        let tau = &a * real_matrix(rng, size, 1).column(0);
        let tags = (0..size).map(|_| tag(rng, n)).collect();
        let p = match SpanProgram::new(n, tags, a, tau, Field::Real) {
            Ok(p) => p,
            Err(_) => continue,
        };
        let verdicts: Vec<bool> = all_inputs(n)
            .iter()
            .map(|x| evaluate(&p, x, tol).unwrap_or(false))
            .collect();
        if verdicts.iter().any(|v| *v) && verdicts.iter().any(|v| !*v) {
            return p;
        }
    }
}
