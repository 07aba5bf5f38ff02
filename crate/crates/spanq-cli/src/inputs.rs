//! Loading command arguments: files, `-` for stdin, or builtin fixture names.

use std::io::Read;
use std::path::Path;

use spanq::bounds::{parse_assignment, Assignment, RectangleCover};
use spanq::domain::{parse_bits, DomainFunction, Input, TruthTable};
use spanq::error::{Error, Result};
use spanq::fixtures;
use spanq::io::{
    parse_json, AlgorithmFile, FunctionFile, MatrixFile, PeaFile, ProgramFile, TruthTableFile,
};
use spanq::monotone::{grover, PhaseEstimationAlgorithm};
use spanq::numerics::RMat;
use spanq::query_alg::QueryAlgorithm;
use spanq::span_core::{or_program, SpanProgram};

/// Contents of `arg`, read from stdin when it is `-`. `None` when `arg` is
/// neither `-` nor an existing file, so the caller may try a builtin name.
fn read_source(arg: &str) -> Result<Option<(String, String)>> {
    if arg == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Error::Io(format!("stdin: {e}")))?;
        return Ok(Some((s, "stdin".into())));
    }
    let path = Path::new(arg);
    if path.exists() {
        let s = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{arg}: {e}")))?;
        return Ok(Some((s, arg.to_string())));
    }
    Ok(None)
}

fn unknown(kind: &str, arg: &str, builtins: &str) -> Error {
    Error::Io(format!(
        "{arg}: no such file, and not a builtin {kind} ({builtins})"
    ))
}

/// `name<k>` ↦ `k`.
fn suffix_number(arg: &str, name: &str) -> Option<usize> {
    arg.strip_prefix(name)?.parse().ok()
}

pub fn number(s: &str) -> std::result::Result<f64, String> {
    let parsed = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| format!("bad number {s:?}"))?;
            let b: f64 = b.trim().parse().map_err(|_| format!("bad number {s:?}"))?;
            a / b
        }
        None => s.trim().parse().map_err(|_| format!("bad number {s:?}"))?,
    };
    if parsed.is_finite() {
        Ok(parsed)
    } else {
        Err(format!("{s:?} is not finite"))
    }
}

/// `0101` or `x=0101`. A malformed argument is a usage error, not a file error.
pub fn input_bits(s: &str) -> Result<Input> {
    parse_bits(s.strip_prefix("x=").unwrap_or(s))
        .map_err(|_| Error::InvalidInput(format!("bad input bit string {s:?}")))
}

const PROGRAM_BUILTINS: &str = "or<n>";

pub fn program(arg: &str) -> Result<SpanProgram> {
    if let Some((text, label)) = read_source(arg)? {
        return parse_json::<ProgramFile>(&text, &label)?.to_program();
    }
    match suffix_number(arg, "or") {
        Some(n) if n >= 1 => Ok(or_program(n)),
        _ => Err(unknown("program", arg, PROGRAM_BUILTINS)),
    }
}

const ALGORITHM_BUILTINS: &str = "deutsch, two-sided, grover-query<n>";

pub fn algorithm(arg: &str) -> Result<QueryAlgorithm> {
    if let Some((text, label)) = read_source(arg)? {
        return parse_json::<AlgorithmFile>(&text, &label)?.to_algorithm();
    }
    match arg {
        "deutsch" => Ok(fixtures::deutsch_algorithm()),
        "two-sided" => Ok(fixtures::two_sided_algorithm()),
        _ => match suffix_number(arg, "grover-query") {
            Some(n) if n >= 1 => Ok(fixtures::grover_query_algorithm(n, 1)),
            _ => Err(unknown("algorithm", arg, ALGORITHM_BUILTINS)),
        },
    }
}

const PEA_BUILTINS: &str = "grover<n>, non-monotone, partial-mass<M>";

pub fn pea(arg: &str) -> Result<PhaseEstimationAlgorithm> {
    if let Some((text, label)) = read_source(arg)? {
        return parse_json::<PeaFile>(&text, &label)?.to_pea();
    }
    if arg == "non-monotone" {
        return Ok(fixtures::non_monotone_pea());
    }
    if let Some(m) = suffix_number(arg, "partial-mass") {
        return Ok(fixtures::partial_mass_pea(m));
    }
    match suffix_number(arg, "grover") {
        Some(n) if n >= 1 => Ok(grover(n)),
        _ => Err(unknown("phase-estimation algorithm", arg, PEA_BUILTINS)),
    }
}

const TABLE_BUILTINS: &str = "parity<m>, and<m>, or<m>, maj<m> with m ≤ 20";

const MAX_BUILTIN_ARITY: usize = 20;

fn builtin_table(arg: &str) -> Option<TruthTable> {
    let ones = |z: &[u8]| z.iter().filter(|&&b| b == 1).count();
    let arity = |name| suffix_number(arg, name).filter(|&m| m <= MAX_BUILTIN_ARITY);
    if let Some(m) = arity("parity") {
        return Some(TruthTable::from_fn(m, |z| (ones(z) % 2) as u8));
    }
    if let Some(m) = arity("and") {
        return Some(TruthTable::from_fn(m, |z| (ones(z) == m) as u8));
    }
    if let Some(m) = arity("or") {
        return Some(TruthTable::from_fn(m, |z| (ones(z) > 0) as u8));
    }
    if let Some(m) = arity("maj") {
        return Some(TruthTable::from_fn(m, |z| (2 * ones(z) > m) as u8));
    }
    None
}

/// A total ±1 truth table, from a file or a builtin name.
pub fn table(arg: &str) -> Result<TruthTable> {
    if let Some((text, label)) = read_source(arg)? {
        let t: TruthTableFile = parse_json(&text, &label)?;
        return TruthTable::new(t.m, t.values);
    }
    builtin_table(arg).ok_or_else(|| unknown("truth table", arg, TABLE_BUILTINS))
}

/// A (possibly partial) Boolean function: a function file, a truth-table
/// file, a builtin table name, or a builtin algorithm's promise function.
pub fn function(arg: &str) -> Result<DomainFunction> {
    if let Some((text, label)) = read_source(arg)? {
        return parse_json::<FunctionFile>(&text, &label)?.to_function();
    }
    match arg {
        "deutsch" => return Ok(fixtures::deutsch_function()),
        "two-sided" => return Ok(fixtures::two_sided_function()),
        _ => {}
    }
    if let Some(n) = suffix_number(arg, "grover-query") {
        return Ok(fixtures::grover_query_function(n));
    }
    builtin_table(arg)
        .map(|t| t.to_domain_function())
        .ok_or_else(|| {
            unknown(
                "function",
                arg,
                &format!("{TABLE_BUILTINS}, deutsch, two-sided, grover-query<n>"),
            )
        })
}

pub fn matrix(arg: &str) -> Result<RMat> {
    match read_source(arg)? {
        Some((text, label)) => parse_json::<MatrixFile>(&text, &label)?.to_matrix(),
        None => Err(unknown("matrix", arg, "none")),
    }
}

/// A cover file, or `whole` / `singletons` sized to the matrix.
pub fn cover(arg: &str, rows: usize, cols: usize) -> Result<RectangleCover> {
    if let Some((text, label)) = read_source(arg)? {
        return parse_json(&text, &label);
    }
    match arg {
        "whole" => Ok(RectangleCover::whole(rows, cols)),
        "singletons" => Ok(RectangleCover::singletons(rows, cols)),
        _ => Err(unknown("cover", arg, "whole, singletons")),
    }
}

/// A JSON list of assignment strings, or an inline comma-separated list.
pub fn assignments(arg: &str) -> Result<Vec<Assignment>> {
    let items: Vec<String> = match read_source(arg)? {
        Some((text, label)) => parse_json(&text, &label)?,
        None => arg.split(',').map(|s| s.trim().to_string()).collect(),
    };
    items.iter().map(|s| parse_assignment(s)).collect()
}
