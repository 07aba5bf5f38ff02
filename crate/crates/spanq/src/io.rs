//! JSON file formats for programs, algorithms, functions, matrices and covers.
//!
//! Complex scalars are written as `[re, im]`; readers also accept a bare
//! number for a real scalar. Matrices are nested row-major arrays.

use num_complex::Complex64 as C64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::bounds::{parse_assignment, Assignment, RectangleCover};
use crate::domain::{bits_to_string, parse_bits, DomainFunction, TruthTable};
use crate::error::{Error, Result};
use crate::monotone::PhaseEstimationAlgorithm;
use crate::numerics::{CMat, CVec, RMat};
use crate::query_alg::QueryAlgorithm;
use crate::span_core::{Field, SpanProgram, Tag};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Real(f64),
    Complex([f64; 2]),
}

impl Scalar {
    pub fn value(self) -> C64 {
        match self {
            Scalar::Real(r) => C64::new(r, 0.0),
            Scalar::Complex([re, im]) => C64::new(re, im),
        }
    }

    fn write(z: C64, real: bool) -> Self {
        if real {
            Scalar::Real(z.re)
        } else {
            Scalar::Complex([z.re, z.im])
        }
    }
}

fn matrix_from_rows(rows: &[Vec<Scalar>], what: &str) -> Result<CMat> {
    let r = rows.len();
    let c = rows.first().map_or(0, |row| row.len());
    if rows.iter().any(|row| row.len() != c) {
        return Err(Error::Parse(format!("{what}: rows have different lengths")));
    }
    Ok(CMat::from_fn(r, c, |i, j| rows[i][j].value()))
}

fn matrix_to_rows(m: &CMat, real: bool) -> Vec<Vec<Scalar>> {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| Scalar::write(m[(i, j)], real))
                .collect()
        })
        .collect()
}

fn vector_from(v: &[Scalar]) -> CVec {
    CVec::from_iterator(v.len(), v.iter().map(|s| s.value()))
}

fn vector_to(v: &CVec, real: bool) -> Vec<Scalar> {
    v.iter().map(|z| Scalar::write(*z, real)).collect()
}

fn is_real(m: &CMat) -> bool {
    m.iter().all(|z| z.im == 0.0)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub tag: String,
}

/// `A` is either nested rows or a flat row-major list with `rows` given.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixPayload {
    Nested(Vec<Vec<Scalar>>),
    Flat(Vec<Scalar>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProgramFile {
    pub n: usize,
    pub columns: Vec<ColumnSpec>,
    #[serde(rename = "A")]
    pub a: MatrixPayload,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<usize>,
    pub tau: Vec<Scalar>,
    pub field: Field,
}

impl ProgramFile {
    pub fn from_program(p: &SpanProgram) -> Self {
        let real = p.field == Field::Real;
        ProgramFile {
            n: p.n,
            columns: p
                .tags
                .iter()
                .map(|t| ColumnSpec { tag: t.to_string() })
                .collect(),
            a: MatrixPayload::Nested(matrix_to_rows(&p.a, real)),
            rows: None,
            tau: vector_to(&p.tau, real),
            field: p.field,
        }
    }

    pub fn to_program(&self) -> Result<SpanProgram> {
        let tags = self
            .columns
            .iter()
            .map(|c| c.tag.parse::<Tag>())
            .collect::<Result<Vec<_>>>()?;
        let s = tags.len();
        let a = match &self.a {
            MatrixPayload::Nested(rows) => {
                let m = matrix_from_rows(rows, "A")?;
                if rows.is_empty() {
                    CMat::zeros(0, s)
                } else {
                    m
                }
            }
            MatrixPayload::Flat(flat) => {
                let r = self.rows.unwrap_or(self.tau.len());
                if r * s != flat.len() {
                    return Err(Error::MalformedProgram(format!(
                        "A has {} entries, expected {r}×{s}",
                        flat.len()
                    )));
                }
                CMat::from_fn(r, s, |i, j| flat[i * s + j].value())
            }
        };
        SpanProgram::new(self.n, tags, a, vector_from(&self.tau), self.field)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlgorithmFile {
    pub n: usize,
    pub workspace_symbols: usize,
    #[serde(rename = "T")]
    pub t: usize,
    pub unitaries: Vec<Vec<Vec<Scalar>>>,
}

impl AlgorithmFile {
    pub fn from_algorithm(alg: &QueryAlgorithm) -> Self {
        AlgorithmFile {
            n: alg.n,
            workspace_symbols: alg.z_count,
            t: alg.t,
            unitaries: alg
                .unitaries
                .iter()
                .map(|u| matrix_to_rows(u, false))
                .collect(),
        }
    }

    pub fn to_algorithm(&self) -> Result<QueryAlgorithm> {
        let us = self
            .unitaries
            .iter()
            .map(|u| matrix_from_rows(u, "unitary"))
            .collect::<Result<Vec<_>>>()?;
        QueryAlgorithm::new(self.n, self.workspace_symbols, self.t, us)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PeaFile {
    pub n: usize,
    pub workspace_symbols: usize,
    /// Query label per basis state; defaults to blocks `|j, z⟩`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<usize>>,
    #[serde(rename = "U")]
    pub u: Vec<Vec<Scalar>>,
    pub psi0: Vec<Scalar>,
    pub delta: f64,
    #[serde(rename = "T")]
    pub t: usize,
    #[serde(rename = "M")]
    pub m: usize,
}

impl PeaFile {
    pub fn from_pea(pea: &PhaseEstimationAlgorithm) -> Self {
        let z = if pea.n > 0 { pea.dim() / pea.n } else { 0 };
        let blocks: Vec<usize> = (1..=pea.n)
            .flat_map(|j| std::iter::repeat_n(j, z))
            .collect();
        let real = is_real(&pea.u) && pea.psi0.iter().all(|c| c.im == 0.0);
        PeaFile {
            n: pea.n,
            workspace_symbols: z,
            labels: (blocks != pea.labels).then(|| pea.labels.clone()),
            u: matrix_to_rows(&pea.u, real),
            psi0: vector_to(&pea.psi0, real),
            delta: pea.delta,
            t: pea.t,
            m: pea.m,
        }
    }

    pub fn to_pea(&self) -> Result<PhaseEstimationAlgorithm> {
        let u = matrix_from_rows(&self.u, "U")?;
        let psi = vector_from(&self.psi0);
        match &self.labels {
            Some(l) => {
                PhaseEstimationAlgorithm::new(self.n, l.clone(), u, psi, self.delta, self.t, self.m)
            }
            None => PhaseEstimationAlgorithm::with_blocks(
                self.n,
                self.workspace_symbols,
                u,
                psi,
                self.delta,
                self.t,
                self.m,
            ),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TruthTableFile {
    pub m: usize,
    pub values: Vec<f64>,
}

/// Either explicit `entries` over a domain or a total ±1 truth table.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FunctionFile {
    Entries {
        n: usize,
        entries: Vec<(String, u8)>,
    },
    Table(TruthTableFile),
}

impl FunctionFile {
    pub fn from_function(f: &DomainFunction) -> Self {
        FunctionFile::Entries {
            n: f.n,
            entries: f
                .entries
                .iter()
                .map(|(x, v)| (bits_to_string(x), *v))
                .collect(),
        }
    }

    pub fn to_function(&self) -> Result<DomainFunction> {
        match self {
            FunctionFile::Entries { n, entries } => {
                let es = entries
                    .iter()
                    .map(|(s, v)| parse_bits(s).map(|x| (x, *v)))
                    .collect::<Result<Vec<_>>>()?;
                DomainFunction::new(*n, es)
            }
            FunctionFile::Table(t) => {
                Ok(TruthTable::new(t.m, t.values.clone())?.to_domain_function())
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl MatrixFile {
    pub fn from_matrix(m: &RMat) -> Self {
        MatrixFile {
            rows: m.nrows(),
            cols: m.ncols(),
            data: (0..m.nrows())
                .flat_map(|i| (0..m.ncols()).map(move |j| m[(i, j)]))
                .collect(),
        }
    }

    pub fn to_matrix(&self) -> Result<RMat> {
        if self.data.len() != self.rows * self.cols {
            return Err(Error::Parse(format!(
                "matrix has {} entries, expected {}×{}",
                self.data.len(),
                self.rows,
                self.cols
            )));
        }
        if self.data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parse("matrix has non-finite entries".into()));
        }
        Ok(RMat::from_row_slice(self.rows, self.cols, &self.data))
    }
}

pub fn parse_json<T: DeserializeOwned>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("{what}: {e}")))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_json(&text, &path.display().to_string())
}

pub fn to_json_string<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v).map_err(|e| Error::Parse(e.to_string()))
}

pub fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<()> {
    std::fs::write(path, to_json_string(v)? + "\n")
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn read_program(path: &Path) -> Result<SpanProgram> {
    read_json::<ProgramFile>(path)?.to_program()
}

pub fn read_algorithm(path: &Path) -> Result<QueryAlgorithm> {
    read_json::<AlgorithmFile>(path)?.to_algorithm()
}

pub fn read_pea(path: &Path) -> Result<PhaseEstimationAlgorithm> {
    read_json::<PeaFile>(path)?.to_pea()
}

pub fn read_truth_table(path: &Path) -> Result<TruthTable> {
    let t: TruthTableFile = read_json(path)?;
    TruthTable::new(t.m, t.values)
}

pub fn read_function(path: &Path) -> Result<DomainFunction> {
    read_json::<FunctionFile>(path)?.to_function()
}

pub fn read_matrix(path: &Path) -> Result<RMat> {
    read_json::<MatrixFile>(path)?.to_matrix()
}

pub fn read_cover(path: &Path) -> Result<RectangleCover> {
    read_json(path)
}

/// A JSON list of strings over `0`, `1`, `*`.
pub fn read_assignments(path: &Path) -> Result<Vec<Assignment>> {
    let v: Vec<String> = read_json(path)?;
    v.iter().map(|s| parse_assignment(s)).collect()
}
