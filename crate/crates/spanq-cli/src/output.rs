//! Report envelopes and their JSON / CSV rendering.

use serde::Serialize;
use serde_json::{json, Map, Value};

use spanq::error::{Error, Result};
use spanq::numerics::TolerancePolicy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// What a command produced.
#[derive(Debug, Clone)]
pub enum Body {
    /// A report: summary fields plus an optional table of per-item rows.
    Report { result: Value, rows: Vec<Value> },
    /// A file artifact (program, algorithm) with a summary report attached.
    Artifact { artifact: Value, summary: Value },
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub command: String,
    pub body: Body,
    /// 0 on success; 3 when the command's own checks failed.
    pub exit_code: i32,
}

impl Outcome {
    pub fn report(command: &str, result: Value, rows: Vec<Value>) -> Self {
        Outcome {
            command: command.into(),
            body: Body::Report { result, rows },
            exit_code: 0,
        }
    }

    pub fn artifact(command: &str, artifact: impl Serialize, summary: Value) -> Result<Self> {
        Ok(Outcome {
            command: command.into(),
            body: Body::Artifact {
                artifact: to_value(&artifact)?,
                summary,
            },
            exit_code: 0,
        })
    }

    pub fn failing_if(mut self, failed: bool) -> Self {
        if failed {
            self.exit_code = 3;
        }
        self
    }
}

pub fn to_value(v: &impl Serialize) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::Parse(format!("serialising report: {e}")))
}

/// Run metadata embedded in every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunInfo {
    pub tool: &'static str,
    pub version: &'static str,
    pub seed: u64,
    pub tolerance: TolerancePolicy,
}

impl RunInfo {
    pub fn new(seed: u64, tolerance: TolerancePolicy) -> Self {
        RunInfo {
            tool: "spanq",
            version: env!("CARGO_PKG_VERSION"),
            seed,
            tolerance,
        }
    }
}

fn envelope(info: &RunInfo, command: &str, result: Value) -> Value {
    json!({
        "tool": info.tool,
        "version": info.version,
        "command": command,
        "seed": info.seed,
        "tolerance": info.tolerance,
        "result": result,
    })
}

/// JSON text of an outcome. Artifacts are the artifact object with the
/// envelope under `report`, so they stay readable as input files.
pub fn render_json(info: &RunInfo, out: &Outcome) -> String {
    let v = match &out.body {
        Body::Report { result, rows } => {
            let mut result = result.clone();
            if !rows.is_empty() {
                if let Value::Object(m) = &mut result {
                    m.insert("rows".into(), Value::Array(rows.clone()));
                }
            }
            envelope(info, &out.command, result)
        }
        Body::Artifact { artifact, summary } => {
            let mut a = artifact.clone();
            if let Value::Object(m) = &mut a {
                m.insert(
                    "report".into(),
                    envelope(info, &out.command, summary.clone()),
                );
            }
            a
        }
    };
    serde_json::to_string_pretty(&v).expect("JSON values always serialise") + "\n"
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// CSV text: a `#` metadata line, then the rows (or the summary as a single
/// row). Artifacts are not tabular and render as JSON.
pub fn render_csv(info: &RunInfo, out: &Outcome) -> Result<String> {
    let (result, rows) = match &out.body {
        Body::Report { result, rows } => (result, rows),
        Body::Artifact { .. } => return Ok(render_json(info, out)),
    };
    let mut table: Vec<Map<String, Value>> =
        rows.iter().filter_map(|r| r.as_object().cloned()).collect();
    if table.is_empty() {
        let scalars = result
            .as_object()
            .map(|m| m.iter().filter(|(_, v)| !v.is_array() && !v.is_object()))
            .into_iter()
            .flatten()
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        table.push(scalars);
    }
    let mut header: Vec<String> = vec![];
    for row in &table {
        for k in row.keys() {
            if !header.contains(k) {
                header.push(k.clone());
            }
        }
    }
    let t = &info.tolerance;
    let mut text = format!(
        "# {} {} command={} seed={} rank_cutoff_factor={:e} phase_group_tol={:e} witness_equality_tol={:e}\n",
        info.tool, info.version, out.command, info.seed, t.rank_cutoff_factor, t.phase_group_tol, t.witness_equality_tol
    );
    let mut w = csv::Writer::from_writer(vec![]);
    let io_err = |e: csv::Error| Error::Io(format!("csv: {e}"));
    w.write_record(&header).map_err(io_err)?;
    for row in &table {
        w.write_record(
            header
                .iter()
                .map(|k| row.get(k).map(cell).unwrap_or_default()),
        )
        .map_err(io_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(format!("csv: {e}")))?;
    text.push_str(&String::from_utf8(bytes).expect("csv output is UTF-8"));
    Ok(text)
}
