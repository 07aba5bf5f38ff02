//! Bit strings, explicit function domains and ±1 truth tables.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An input `x ∈ {0,1}^n`; `x[j-1]` is the bit `x_j`.
pub type Input = Vec<u8>;

/// All `2^n` inputs in lexicographic order (`x_1` most significant).
pub fn all_inputs(n: usize) -> Vec<Input> {
    (0..1usize << n).map(|i| index_to_bits(i, n)).collect()
}

pub fn index_to_bits(i: usize, n: usize) -> Input {
    (0..n).map(|k| ((i >> (n - 1 - k)) & 1) as u8).collect()
}

pub fn bits_to_index(x: &[u8]) -> usize {
    x.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
}

pub fn bits_to_string(x: &[u8]) -> String {
    x.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect()
}

pub fn parse_bits(s: &str) -> Result<Input> {
    s.chars()
        .map(|ch| match ch {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(Error::Parse(format!("bad bit string {s:?}"))),
        })
        .collect()
}

pub fn weight(x: &[u8]) -> usize {
    x.iter().filter(|&&b| b == 1).count()
}

/// A Boolean function given on an explicit domain `D ⊆ {0,1}^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainFunction {
    pub n: usize,
    pub entries: Vec<(Input, u8)>,
}

impl DomainFunction {
    pub fn new(n: usize, entries: Vec<(Input, u8)>) -> Result<Self> {
        for (x, f) in &entries {
            if x.len() != n || x.iter().any(|&b| b > 1) || *f > 1 {
                return Err(Error::InvalidInput(format!(
                    "domain entry {} -> {f} does not fit n = {n}",
                    bits_to_string(x)
                )));
            }
        }
        Ok(DomainFunction { n, entries })
    }

    pub fn total(n: usize, f: impl Fn(&[u8]) -> u8) -> Self {
        let entries = all_inputs(n).into_iter().map(|x| {
            let v = f(&x);
            (x, v)
        });
        DomainFunction {
            n,
            entries: entries.collect(),
        }
    }

    pub fn restricted(n: usize, keep: impl Fn(&[u8]) -> bool, f: impl Fn(&[u8]) -> u8) -> Self {
        let entries = all_inputs(n).into_iter().filter(|x| keep(x)).map(|x| {
            let v = f(&x);
            (x, v)
        });
        DomainFunction {
            n,
            entries: entries.collect(),
        }
    }

    pub fn or(n: usize) -> Self {
        Self::total(n, |x| (weight(x) > 0) as u8)
    }

    pub fn zeros(&self) -> impl Iterator<Item = &Input> {
        self.entries.iter().filter(|e| e.1 == 0).map(|e| &e.0)
    }

    pub fn ones(&self) -> impl Iterator<Item = &Input> {
        self.entries.iter().filter(|e| e.1 == 1).map(|e| &e.0)
    }

    pub fn value(&self, x: &[u8]) -> Option<u8> {
        self.entries.iter().find(|e| e.0 == x).map(|e| e.1)
    }
}

/// A ±1-valued function on `{0,1}^m`, indexed lexicographically with `z_1`
/// as the most significant bit (`p(z) = (−1)^{f(z)}`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthTable {
    pub m: usize,
    pub values: Vec<f64>,
}

impl TruthTable {
    pub fn new(m: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != 1 << m {
            return Err(Error::InvalidInput(format!(
                "truth table for m = {m} needs {} values, got {}",
                1usize << m,
                values.len()
            )));
        }
        if values.iter().any(|v| *v != 1.0 && *v != -1.0) {
            return Err(Error::InvalidInput("truth table values must be ±1".into()));
        }
        Ok(TruthTable { m, values })
    }

    pub fn from_fn(m: usize, f: impl Fn(&[u8]) -> u8) -> Self {
        let values = all_inputs(m)
            .iter()
            .map(|z| if f(z) == 1 { -1.0 } else { 1.0 })
            .collect();
        TruthTable { m, values }
    }

    pub fn parity(m: usize) -> Self {
        Self::from_fn(m, |z| (weight(z) % 2) as u8)
    }

    pub fn at(&self, z: &[u8]) -> f64 {
        self.values[bits_to_index(z)]
    }

    /// Boolean view: `f(z) = 1` iff `p(z) = −1`.
    pub fn to_domain_function(&self) -> DomainFunction {
        DomainFunction::total(self.m, |z| (self.at(z) < 0.0) as u8)
    }
}
