//! Command-line front end for the `spanq` toolkit.
//!
//! Every command returns an [`output::Outcome`]; `main` renders it as JSON
//! or CSV with the tool version, seed and tolerance policy attached.

pub mod inputs;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use spanq::bounds::{
    approx_degree, approx_rank_measure, assignment_bound, certificate_bound, fourier,
    lambda_extract, pattern_matrix, sherstov_rank, subset_label,
};
use spanq::domain::{all_inputs, bits_to_string, DomainFunction, Input};
use spanq::error::{Error, Result};
use spanq::io::{write_json, MatrixFile, PeaFile, ProgramFile};
use spanq::monotone::{
    grover_with_delta, is_monotone, pea_schedule, pea_to_span, span_to_pea, verify_pe_bounds,
};
use spanq::numerics::{numerical_rank_real, TolerancePolicy};
use spanq::qsim::{compile, decide, CompileOptions, REDUCTION_TARGET};
use spanq::query_alg::{alg_to_span, run, verify_conversion, ConversionReport, DEFAULT_C};
use spanq::span_core::{
    complexity_report, evaluate, min_error_witness, negative_witness, normalize, positive_witness,
    realify, reduce_kappa, scale, tensor_square, SpanProgram, Tag,
};
use spanq::verify::{run_criterion, VerifyConfig, CRITERIA};

use inputs::number;
use output::{to_value, Format, Outcome};

/// Largest `n` for which commands enumerate all of `{0,1}^n` by default.
pub const MAX_ENUMERATED_N: usize = 16;

#[derive(Debug, Parser)]
#[command(
    name = "spanq",
    version,
    about = "Span programs, quantum query algorithms and their lower bounds"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Singular values below factor·max(rows, cols)·σ_max count as zero.
    #[arg(long, global = true, value_parser = number)]
    pub tol_rank: Option<f64>,
    /// Relative tolerance for witness-size identities.
    #[arg(long, global = true, value_parser = number)]
    pub tol_witness: Option<f64>,
    /// Seed for randomized checks.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

impl GlobalOpts {
    pub fn tolerance(&self) -> TolerancePolicy {
        let mut t = TolerancePolicy::default();
        if let Some(v) = self.tol_rank {
            t.rank_cutoff_factor = v;
        }
        if let Some(v) = self.tol_witness {
            t.witness_equality_tol = v;
        }
        t
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(VerifyConfig::default().seed)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Span programs.
    #[command(subcommand)]
    Sp(SpCommand),
    /// Quantum query algorithms.
    #[command(subcommand)]
    Alg(AlgCommand),
    /// Monotone phase-estimation algorithms.
    #[command(subcommand)]
    Mono(MonoCommand),
    /// Lower-bound tools.
    #[command(subcommand)]
    Lb(LbCommand),
    /// Verification suite.
    #[command(subcommand)]
    Verify(VerifyCommand),
}

#[derive(Debug, Subcommand)]
pub enum SpCommand {
    /// Verdicts and witness sizes per input, plus a complexity report with --table.
    Eval {
        program: String,
        /// Inputs as bit strings (`0101` or `x=0101`); default: the table's domain or all inputs.
        inputs: Vec<String>,
        #[arg(long)]
        table: Option<String>,
        #[arg(long, default_value = "0", value_parser = number)]
        kappa: f64,
    },
    /// Compile to a phase-estimation decider and run it on the table's domain.
    Compile {
        program: String,
        #[arg(long)]
        table: String,
        #[arg(long, default_value = "0", value_parser = number)]
        kappa: f64,
        /// Allow tensor-power reduction when κ ≥ 1/4.
        #[arg(long)]
        reduce: bool,
        #[arg(long, default_value_t = CompileOptions::default().repetitions)]
        repetitions: usize,
    },
    /// Rescale so that witness sizes trade off by β².
    Scale {
        program: String,
        #[arg(long, value_parser = number)]
        beta: f64,
    },
    /// Rescale to ‖A⁺τ‖ = 1 with W₋ ≤ 2 on the table's domain.
    Normalize {
        program: String,
        #[arg(long)]
        table: String,
    },
    /// Tensor square.
    Square { program: String },
    /// Normalize and tensor-square until κ drops to the target.
    Reduce {
        program: String,
        #[arg(long)]
        table: String,
        #[arg(long, value_parser = number)]
        kappa: f64,
        #[arg(long, default_value_t = REDUCTION_TARGET, value_parser = number)]
        target: f64,
    },
    /// Equivalent real program.
    Realify { program: String },
    /// Replace true/false columns by an extra input bit fixed to 1.
    Encode { program: String },
}

#[derive(Debug, Subcommand)]
pub enum AlgCommand {
    /// Acceptance probabilities per input.
    Run {
        algorithm: String,
        inputs: Vec<String>,
    },
    /// Convert to a span program.
    ToSp {
        algorithm: String,
        #[arg(long, default_value_t = DEFAULT_C, value_parser = number)]
        c: f64,
        /// Also check the c = 5 conversion bounds on this function's domain.
        #[arg(long)]
        table: Option<String>,
    },
    /// Convert with c = 5 and check the witness bounds on the table's domain.
    Verify {
        algorithm: String,
        #[arg(long)]
        table: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum MonoCommand {
    /// Check monotonicity on every input.
    Check { pea: String },
    /// The span program of a phase-estimation algorithm.
    ToSpan { pea: String },
    /// The phase-estimation algorithm of a normalized monotone program.
    ToPea {
        program: String,
        #[arg(long)]
        table: String,
    },
    /// Grover search as a phase-estimation algorithm.
    Grover {
        n: usize,
        #[arg(long, default_value = "0", value_parser = number)]
        delta: f64,
    },
    /// Spectral and bounded-error checks on the table's domain.
    VerifyBounds {
        pea: String,
        #[arg(long)]
        table: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum LbCommand {
    /// Fourier spectrum of a ±1 truth table.
    Fourier { table: String },
    /// ε-approximate degree with a dual certificate.
    Adeg {
        table: String,
        #[arg(value_parser = number)]
        eps: f64,
    },
    /// Pattern matrix rank against the Fourier count.
    Pattern {
        table: String,
        lambda: usize,
        /// Also write the matrix to this file.
        #[arg(long)]
        save_matrix: Option<PathBuf>,
    },
    /// Rank measure of a matrix over a rectangle cover.
    Measure {
        matrix: String,
        cover: String,
        #[arg(long, default_value = "0", value_parser = number)]
        kappa: f64,
        /// Truth table whose pattern matrix `matrix` is, for a certified lower bound.
        #[arg(long, requires = "lambda")]
        pattern: Option<String>,
        #[arg(long)]
        lambda: Option<usize>,
    },
    /// Bound from a certificate cover.
    Certificate(CoverBoundArgs),
    /// Bound from a cover by partial assignments.
    Assignment(CoverBoundArgs),
    /// Feasible solution of the rank program extracted from a span program.
    Extract {
        program: String,
        #[arg(long)]
        table: String,
        #[arg(long, default_value = "0", value_parser = number)]
        kappa: f64,
    },
}

#[derive(Debug, Args)]
pub struct CoverBoundArgs {
    pub table: String,
    /// JSON list file, or inline comma-separated assignments such as `0*,10,11`.
    pub assignments: String,
    #[arg(long)]
    pub lambda: usize,
    #[arg(long, default_value = "0", value_parser = number)]
    pub kappa: f64,
    #[arg(long, value_parser = number)]
    pub eps: f64,
}

#[derive(Debug, Subcommand)]
pub enum VerifyCommand {
    /// Run every acceptance criterion.
    All {
        /// List the criteria without running them.
        #[arg(long)]
        list: bool,
        /// Force this criterion to fail, to exercise the harness.
        #[arg(long)]
        inject_fault: Option<usize>,
    },
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    let tol = cli.global.tolerance();
    match &cli.command {
        Command::Sp(c) => sp(c, &tol),
        Command::Alg(c) => alg(c, &tol),
        Command::Mono(c) => mono(c, &tol),
        Command::Lb(c) => lb(c, &tol),
        Command::Verify(VerifyCommand::All { list, inject_fault }) => {
            verify_all(*list, *inject_fault, cli.global.seed(), tol)
        }
    }
}

fn parse_inputs(args: &[String]) -> Result<Vec<Input>> {
    let mut xs = args
        .iter()
        .map(|s| inputs::input_bits(s))
        .collect::<Result<Vec<_>>>()?;
    xs.sort();
    xs.dedup();
    Ok(xs)
}

/// The function's domain in canonical (lexicographic) order.
fn sorted_domain(f: &DomainFunction) -> Vec<Input> {
    let mut xs: Vec<Input> = f.entries.iter().map(|(x, _)| x.clone()).collect();
    xs.sort();
    xs
}

/// Rows in canonical order of their `input` field.
fn sort_rows(rows: &mut [Value]) {
    rows.sort_by(|a, b| a["input"].as_str().cmp(&b["input"].as_str()));
}

fn every_input(n: usize) -> Result<Vec<Input>> {
    if n > MAX_ENUMERATED_N {
        return Err(Error::TooLarge(format!(
            "n = {n} > {MAX_ENUMERATED_N}; list the inputs explicitly"
        )));
    }
    Ok(all_inputs(n))
}

fn program_summary(p: &SpanProgram) -> Value {
    json!({ "n": p.n, "size": p.size(), "rows": p.a.nrows(), "field": p.field })
}

fn program_artifact(command: &str, p: &SpanProgram, mut summary: Value) -> Result<Outcome> {
    if let (Value::Object(m), Value::Object(extra)) = (&mut summary, program_summary(p)) {
        m.extend(extra);
    }
    Outcome::artifact(command, ProgramFile::from_program(p), summary)
}

fn sp(c: &SpCommand, tol: &TolerancePolicy) -> Result<Outcome> {
    match c {
        SpCommand::Eval {
            program,
            inputs: xs,
            table,
            kappa,
        } => {
            let p = inputs::program(program)?;
            let f = table.as_deref().map(inputs::function).transpose()?;
            let xs = if !xs.is_empty() {
                parse_inputs(xs)?
            } else if let Some(f) = &f {
                sorted_domain(f)
            } else {
                every_input(p.n)?
            };
            let mut rows = vec![];
            for x in &xs {
                let accepted = evaluate(&p, x, tol)?;
                let mut row = json!({ "input": bits_to_string(x), "accepted": accepted });
                if let Some(fx) = f.as_ref().and_then(|f| f.value(x)) {
                    row["f"] = json!(fx);
                }
                if accepted {
                    row["w_plus"] = json!(positive_witness(&p, x, tol)?.size);
                    row["min_error"] = json!(0.0);
                } else {
                    row["w_minus"] = json!(negative_witness(&p, x, tol)?.size);
                    row["min_error"] = json!(min_error_witness(&p, x, tol)?.error);
                }
                rows.push(row);
            }
            let mut result = program_summary(&p);
            if let Some(f) = &f {
                result["complexity"] = to_value(&complexity_report(&p, f, *kappa, tol)?)?;
            }
            Ok(Outcome::report("sp eval", result, rows))
        }
        SpCommand::Compile {
            program,
            table,
            kappa,
            reduce,
            repetitions,
        } => {
            let p = inputs::program(program)?;
            let f = inputs::function(table)?;
            let opts = CompileOptions {
                allow_reduce: *reduce,
                repetitions: *repetitions,
            };
            let d = compile(&p, &f, *kappa, &opts, tol)?;
            let mut rows = vec![];
            let mut wrong = 0;
            let mut entries = f.entries.clone();
            entries.sort();
            for (x, fx) in &entries {
                let dec = decide(&d, x, tol)?;
                wrong += (dec.output != *fx) as usize;
                let mut row = to_value(&dec)?;
                row["input"] = json!(bits_to_string(x));
                row["f"] = json!(fx);
                row["correct"] = json!(dec.output == *fx);
                rows.push(row);
            }
            let result = json!({
                "transform": d.transform,
                "input_size": p.size(),
                "simulated_size": d.program.size(),
                "kappa": d.kappa,
                "theta": d.theta,
                "q0": d.q0,
                "q1": d.q1,
                "delta": d.delta,
                "threshold": d.threshold,
                "pe_steps": d.pe_steps,
                "ae_steps": d.ae_steps,
                "repetitions": d.repetitions,
                "reported_space": d.reported_space,
                "reported_queries": d.reported_queries,
                "complexity": to_value(&d.report)?,
                "all_correct": wrong == 0,
            });
            Ok(Outcome::report("sp compile", result, rows).failing_if(wrong > 0))
        }
        SpCommand::Scale { program, beta } => {
            let q = scale(&inputs::program(program)?, *beta, tol)?;
            program_artifact("sp scale", &q, json!({ "beta": beta }))
        }
        SpCommand::Normalize { program, table } => {
            let q = normalize(&inputs::program(program)?, &inputs::function(table)?, tol)?;
            program_artifact("sp normalize", &q, json!({}))
        }
        SpCommand::Square { program } => {
            let p = inputs::program(program)?;
            let q = tensor_square(&p, tol)?;
            program_artifact("sp square", &q, json!({ "input_size": p.size() }))
        }
        SpCommand::Reduce {
            program,
            table,
            kappa,
            target,
        } => {
            let p = inputs::program(program)?;
            let (q, depth) = reduce_kappa(&p, &inputs::function(table)?, *kappa, *target, tol)?;
            program_artifact(
                "sp reduce",
                &q,
                json!({ "kappa": kappa, "target": target, "squarings": depth, "input_size": p.size() }),
            )
        }
        SpCommand::Realify { program } => {
            let q = realify(&inputs::program(program)?)?;
            program_artifact("sp realify", &q, json!({}))
        }
        SpCommand::Encode { program } => {
            let q = encode_constant_columns(&inputs::program(program)?)?;
            program_artifact("sp encode", &q, json!({ "constant_bit": q.n }))
        }
    }
}

/// The program on `n + 1` bits whose true columns read `x_{n+1} = 1` and
/// false columns `x_{n+1} = 0`; it agrees with `p` whenever `x_{n+1} = 1`.
pub fn encode_constant_columns(p: &SpanProgram) -> Result<SpanProgram> {
    let extra = p.n + 1;
    let tags = p
        .tags
        .iter()
        .map(|t| match t {
            Tag::True => Tag::Input { j: extra, b: 1 },
            Tag::False => Tag::Input { j: extra, b: 0 },
            other => *other,
        })
        .collect();
    SpanProgram::new(extra, tags, p.a.clone(), p.tau.clone(), p.field)
}

fn conversion_summary(r: &ConversionReport) -> Result<Value> {
    let mut v = to_value(r)?;
    if let Value::Object(m) = &mut v {
        m.remove("inputs");
        m.insert("holds".into(), json!(r.holds()));
    }
    Ok(v)
}

fn alg(c: &AlgCommand, tol: &TolerancePolicy) -> Result<Outcome> {
    match c {
        AlgCommand::Run {
            algorithm,
            inputs: xs,
        } => {
            let a = inputs::algorithm(algorithm)?;
            let xs = if xs.is_empty() {
                every_input(a.n)?
            } else {
                parse_inputs(xs)?
            };
            let rows = xs
                .iter()
                .map(|x| {
                    let r = run(&a, x)?;
                    Ok(json!({ "input": bits_to_string(x), "p0": r.p0, "output": r.output_bit }))
                })
                .collect::<Result<Vec<_>>>()?;
            let result =
                json!({ "n": a.n, "T": a.t, "workspace_symbols": a.z_count, "dim": a.dim() });
            Ok(Outcome::report("alg run", result, rows))
        }
        AlgCommand::ToSp {
            algorithm,
            c,
            table,
        } => {
            let a = inputs::algorithm(algorithm)?;
            let p = alg_to_span(&a, *c)?;
            let mut summary = json!({ "c": c, "T": a.t });
            let mut holds = true;
            if let Some(table) = table {
                let r = verify_conversion(&a, &inputs::function(table)?, tol)?;
                holds = r.holds();
                summary["verification"] = conversion_summary(&r)?;
            }
            Ok(program_artifact("alg to-sp", &p, summary)?.failing_if(!holds))
        }
        AlgCommand::Verify { algorithm, table } => {
            let a = inputs::algorithm(algorithm)?;
            let r = verify_conversion(&a, &inputs::function(table)?, tol)?;
            let mut rows = r.inputs.iter().map(to_value).collect::<Result<Vec<_>>>()?;
            sort_rows(&mut rows);
            Ok(Outcome::report("alg verify", conversion_summary(&r)?, rows).failing_if(!r.holds()))
        }
    }
}

fn mono(c: &MonoCommand, tol: &TolerancePolicy) -> Result<Outcome> {
    match c {
        MonoCommand::Check { pea } => {
            let r = is_monotone(&inputs::pea(pea)?, tol)?;
            Ok(Outcome::report("mono check", to_value(&r)?, vec![]))
        }
        MonoCommand::ToSpan { pea } => {
            let p = pea_to_span(&inputs::pea(pea)?)?;
            program_artifact("mono to-span", &p, json!({}))
        }
        MonoCommand::ToPea { program, table } => {
            let p = inputs::program(program)?;
            let sched = pea_schedule(&p, &inputs::function(table)?, tol)?;
            let pea = span_to_pea(&p, &sched, tol)?;
            let summary = json!({ "schedule": to_value(&sched)?, "dim": pea.dim(), "M": pea.m });
            Outcome::artifact("mono to-pea", PeaFile::from_pea(&pea), summary)
        }
        MonoCommand::Grover { n, delta } => {
            if *n == 0 {
                return Err(Error::InvalidInput("Grover search needs n ≥ 1".into()));
            }
            let g = grover_with_delta(*n, *delta);
            Outcome::artifact(
                "mono grover",
                PeaFile::from_pea(&g),
                json!({ "n": n, "T": g.t, "M": g.m }),
            )
        }
        MonoCommand::VerifyBounds { pea, table } => {
            let r = verify_pe_bounds(&inputs::pea(pea)?, &inputs::function(table)?, tol)?;
            Ok(Outcome::report("mono verify-bounds", to_value(&r)?, vec![]))
        }
    }
}

fn cover_bound_inputs(
    a: &CoverBoundArgs,
) -> Result<(spanq::domain::TruthTable, Vec<spanq::bounds::Assignment>)> {
    Ok((
        inputs::table(&a.table)?,
        inputs::assignments(&a.assignments)?,
    ))
}

fn lb(c: &LbCommand, tol: &TolerancePolicy) -> Result<Outcome> {
    match c {
        LbCommand::Fourier { table } => {
            let t = inputs::table(table)?;
            let spec = fourier(&t);
            let rows = spec
                .support()
                .map(|s| json!({ "subset": subset_label(s, t.m), "size": s.count_ones(), "coefficient": spec.coeffs[s] }))
                .collect();
            let parseval: f64 = spec.coeffs.iter().map(|c| c * c).sum();
            let result = json!({ "m": t.m, "degree": spec.degree(), "sparsity": spec.support().count(), "parseval": parseval });
            Ok(Outcome::report("lb fourier", result, rows))
        }
        LbCommand::Adeg { table, eps } => {
            let t = inputs::table(table)?;
            let ad = approx_degree(&t, *eps)?;
            let verified = ad.certificate.as_ref().map(|c| c.verify(&t, *eps));
            let mut result = to_value(&ad)?;
            result["certificate_verified"] = json!(verified);
            Ok(Outcome::report("lb adeg", result, vec![]).failing_if(verified == Some(false)))
        }
        LbCommand::Pattern {
            table,
            lambda,
            save_matrix,
        } => {
            let t = inputs::table(table)?;
            let f = pattern_matrix(&t, *lambda)?;
            if let Some(path) = save_matrix {
                write_json(path, &MatrixFile::from_matrix(&f))?;
            }
            let rank = numerical_rank_real(&f, tol);
            let predicted = sherstov_rank(&t, *lambda);
            let result = json!({
                "m": t.m,
                "lambda": lambda,
                "rows": f.nrows(),
                "cols": f.ncols(),
                "rank": rank,
                "fourier_count": predicted,
                "matches": rank as u64 == predicted,
            });
            Ok(Outcome::report("lb pattern", result, vec![]).failing_if(rank as u64 != predicted))
        }
        LbCommand::Measure {
            matrix,
            cover,
            kappa,
            pattern,
            lambda,
        } => {
            let m = inputs::matrix(matrix)?;
            let cv = inputs::cover(cover, m.nrows(), m.ncols())?;
            let pt = pattern.as_deref().map(inputs::table).transpose()?;
            let pat = pt.as_ref().zip(*lambda);
            let r = approx_rank_measure(&m, &cv, *kappa, pat, tol)?;
            Ok(Outcome::report("lb measure", to_value(&r)?, vec![]))
        }
        LbCommand::Certificate(a) => {
            let (t, certs) = cover_bound_inputs(a)?;
            let r = certificate_bound(&t, &certs, a.lambda, a.kappa, a.eps, tol)?;
            Ok(Outcome::report("lb certificate", to_value(&r)?, vec![]))
        }
        LbCommand::Assignment(a) => {
            let (t, assigns) = cover_bound_inputs(a)?;
            let r = assignment_bound(&t, &assigns, a.lambda, a.kappa, a.eps, tol)?;
            Ok(Outcome::report("lb assignment", to_value(&r)?, vec![]))
        }
        LbCommand::Extract {
            program,
            table,
            kappa,
        } => {
            let p = inputs::program(program)?;
            let f: DomainFunction = inputs::function(table)?;
            let ex = lambda_extract(&p, &f, *kappa, tol)?;
            let rows = ex
                .ranks
                .iter()
                .enumerate()
                .map(|(j, r)| json!({ "j": j + 1, "rank": r }))
                .collect();
            let mut result = to_value(&ex)?;
            result["program_size"] = json!(p.size());
            Ok(Outcome::report("lb extract", result, rows))
        }
    }
}

fn verify_all(
    list: bool,
    inject_fault: Option<usize>,
    seed: u64,
    tol: TolerancePolicy,
) -> Result<Outcome> {
    if let Some(id) = inject_fault {
        if !CRITERIA.iter().any(|c| c.id == id) {
            return Err(Error::InvalidInput(format!("no criterion {id}")));
        }
    }
    if list {
        let rows = CRITERIA
            .iter()
            .map(|c| json!({ "id": c.id, "name": c.name, "budget_seconds": c.budget_seconds }))
            .collect();
        return Ok(Outcome::report(
            "verify all --list",
            json!({ "criteria": CRITERIA.len() }),
            rows,
        ));
    }
    let cfg = VerifyConfig {
        seed,
        inject_fault,
        tol,
    };
    let mut rows = vec![];
    let mut failed = vec![];
    for c in &CRITERIA {
        let o = run_criterion(c, &cfg);
        eprintln!("{o}");
        if !o.passed {
            failed.push(format!("{}. {}", o.id, o.name));
        }
        rows.push(to_value(&o)?);
    }
    let result = json!({
        "criteria": CRITERIA.len(),
        "passed": CRITERIA.len() - failed.len(),
        "failed": failed,
    });
    let any_failed = !failed.is_empty();
    Ok(Outcome::report("verify all", result, rows).failing_if(any_failed))
}

/// Parse, execute and render; returns the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    let info = output::RunInfo::new(cli.global.seed(), cli.global.tolerance());
    let outcome = match execute(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let text = match cli.global.format {
        Format::Json => output::render_json(&info, &outcome),
        Format::Csv => match output::render_csv(&info, &outcome) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: {e}");
                return e.exit_code();
            }
        },
    };
    match &cli.global.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("error: {}: {e}", path.display());
                return 4;
            }
        }
        None => print!("{text}"),
    }
    outcome.exit_code
}
