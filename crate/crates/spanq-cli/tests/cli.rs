use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use clap::Parser;
use serde_json::Value;

use spanq::io::{parse_json, ProgramFile};
use spanq::numerics::TolerancePolicy;
use spanq::span_core::{evaluate, or_program, positive_witness, scale, tensor_square, Tag};
use spanq_cli::{encode_constant_columns, execute, Cli};

fn spanq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spanq"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn spanq_stdin(args: &[&str], input: &[u8]) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_spanq"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child.stdin.take().unwrap().write_all(input).unwrap();
    child.wait_with_output().unwrap()
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}); stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("spanq-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn row<'a>(v: &'a Value, input: &str) -> &'a Value {
    v["result"]["rows"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["input"] == input)
        .unwrap_or_else(|| panic!("no row for {input}"))
}

#[test]
fn eval_or2_reports_witness_sizes() {
    let out = spanq(&["sp", "eval", "or2", "x=11", "x=00"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["tool"], "spanq");
    assert_eq!(v["command"], "sp eval");
    assert_eq!(v["seed"], 20_180_101);
    let acc = row(&v, "11");
    assert_eq!(acc["accepted"], true);
    assert!((acc["w_plus"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    let rej = row(&v, "00");
    assert_eq!(rej["accepted"], false);
    assert!((rej["w_minus"].as_f64().unwrap() - 2.0).abs() < 1e-9);
}

#[test]
fn eval_with_table_adds_complexity() {
    let v = json_of(&spanq(&["sp", "eval", "or2", "--table", "or2"]));
    let c = &v["result"]["complexity"];
    assert!((c["complexity"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-9);
    assert_eq!(v["result"]["rows"].as_array().unwrap().len(), 4);
    for r in v["result"]["rows"].as_array().unwrap() {
        assert_eq!(r["accepted"].as_bool().unwrap(), r["f"] == 1);
    }
}

#[test]
fn malformed_file_exits_with_io_code() {
    let path = scratch("bad.json");
    std::fs::write(&path, "{ not json").unwrap();
    let out = spanq(&["sp", "eval", path.to_str().unwrap(), "00"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("parse"));
    let missing = spanq(&["sp", "eval", "/nonexistent/program.json", "00"]);
    assert_eq!(missing.status.code(), Some(4));
}

#[test]
fn validation_errors_exit_2() {
    assert_eq!(spanq(&["sp", "eval", "or2", "012"]).status.code(), Some(2));
    assert_eq!(
        spanq(&["sp", "scale", "or2", "--beta", "0"]).status.code(),
        Some(2)
    );
    assert_eq!(spanq(&["sp", "frobnicate"]).status.code(), Some(2));
    assert_eq!(
        spanq(&["alg", "to-sp", "deutsch", "--c", "0"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn compile_or2_is_correct_everywhere() {
    let out = spanq(&["sp", "compile", "or2", "--table", "or2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["result"]["all_correct"], true);
    assert_eq!(v["result"]["rows"].as_array().unwrap().len(), 4);
    let q0 = v["result"]["q0"].as_f64().unwrap();
    let q1 = v["result"]["q1"].as_f64().unwrap();
    assert!(q0 - q1 >= 0.25 - 1e-9);
}

#[test]
fn large_kappa_needs_reduction() {
    let out = spanq(&["sp", "compile", "or2", "--table", "or2", "--kappa", "0.3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("too large"));
    let reduced = spanq(&[
        "sp", "compile", "or2", "--table", "or2", "--kappa", "0.3", "--reduce",
    ]);
    assert_eq!(reduced.status.code(), Some(0));
    let v = json_of(&reduced);
    assert_eq!(v["result"]["all_correct"], true);
    assert!(v["result"]["simulated_size"].as_u64().unwrap() > 2);
}

#[test]
fn reduce_squares_until_target() {
    let v = json_of(&spanq(&[
        "sp", "reduce", "or2", "--table", "or2", "--kappa", "0.3",
    ]));
    let rep = &v["report"]["result"];
    assert!(rep["squarings"].as_u64().unwrap() >= 1);
    let p = parse_json::<ProgramFile>(&v.to_string(), "reduced")
        .unwrap()
        .to_program()
        .unwrap();
    assert_eq!(p.size() as u64, rep["size"].as_u64().unwrap());
}

#[test]
fn artifact_round_trip_is_bit_exact() {
    let out = spanq(&["sp", "square", "or2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let parsed = parse_json::<ProgramFile>(&text, "square")
        .unwrap()
        .to_program()
        .unwrap();
    let direct = tensor_square(&or_program(2), &TolerancePolicy::default()).unwrap();
    assert_eq!(parsed.a, direct.a);
    assert_eq!(parsed.tau, direct.tau);
    assert_eq!(parsed.tags, direct.tags);

    let path = scratch("square.json");
    std::fs::write(&path, &text).unwrap();
    let again = spanq(&["sp", "scale", path.to_str().unwrap(), "--beta", "1/3"]);
    let reparsed = parse_json::<ProgramFile>(std::str::from_utf8(&again.stdout).unwrap(), "scaled")
        .unwrap()
        .to_program()
        .unwrap();
    let scaled = scale(&direct, 1.0 / 3.0, &TolerancePolicy::default()).unwrap();
    assert_eq!(reparsed.a, scaled.a);
    assert_eq!(reparsed.tau, scaled.tau);
}

#[test]
fn out_flag_writes_file() {
    let path = scratch("eval.csv");
    let out = spanq(&[
        "sp",
        "eval",
        "or2",
        "00",
        "--format",
        "csv",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("# spanq "));
}

#[test]
fn csv_has_metadata_and_header() {
    let out = spanq(&["sp", "eval", "or2", "00", "11", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let meta = lines.next().unwrap();
    assert!(meta.starts_with("# spanq "));
    assert!(meta.contains("command=sp eval"));
    assert!(meta.contains("seed=20180101"));
    assert!(meta.contains("rank_cutoff_factor=1e-10"));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header[0], "input");
    assert!(header.contains(&"w_plus") && header.contains(&"w_minus"));
    assert_eq!(lines.count(), 2);
}

#[test]
fn csv_of_scalar_report_is_one_row() {
    let out = spanq(&["lb", "pattern", "and2", "2", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    let header: Vec<&str> = lines[1].split(',').collect();
    let values: Vec<&str> = lines[2].split(',').collect();
    let rank = header.iter().position(|h| *h == "rank").unwrap();
    assert_eq!(values[rank], "9");
}

#[test]
fn tolerance_flags_reach_the_report() {
    let v = json_of(&spanq(&[
        "sp",
        "eval",
        "or2",
        "00",
        "--tol-rank",
        "1e-8",
        "--tol-witness",
        "1/1000",
        "--seed",
        "7",
    ]));
    assert_eq!(v["tolerance"]["rank_cutoff_factor"].as_f64(), Some(1e-8));
    assert_eq!(v["tolerance"]["witness_equality_tol"].as_f64(), Some(1e-3));
    assert_eq!(v["seed"], 7);
}

#[test]
fn deutsch_conversion() {
    let path = scratch("deutsch_sp.json");
    let out = spanq(&["alg", "to-sp", "deutsch", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&spanq(&[
        "sp",
        "eval",
        path.to_str().unwrap(),
        "--table",
        "deutsch",
    ]));
    for r in v["result"]["rows"].as_array().unwrap() {
        assert_eq!(r["accepted"].as_bool().unwrap(), r["f"] == 1);
    }
    let checked = spanq(&["alg", "to-sp", "deutsch", "--table", "deutsch"]);
    assert_eq!(checked.status.code(), Some(0));
    let ver = &json_of(&checked)["report"]["result"]["verification"];
    assert_eq!(ver["exact"], true);
    assert_eq!(ver["holds"], true);
    let verify = spanq(&["alg", "verify", "deutsch", "--table", "deutsch"]);
    assert_eq!(verify.status.code(), Some(0));
    assert_eq!(json_of(&verify)["result"]["holds"], true);
}

#[test]
fn two_sided_conversion_approximates() {
    let out = spanq(&["alg", "verify", "two-sided", "--table", "two-sided"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["result"]["approximates"], true);
    assert_eq!(v["result"]["one_sided"], false);
    assert_eq!(v["result"]["size"], 32);
    let w_minus = v["result"]["w_minus"].as_f64().unwrap();
    assert!(w_minus <= 13.5 + 1e-9);
    let inputs: Vec<&str> = v["result"]["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["input"].as_str().unwrap())
        .collect();
    let mut sorted = inputs.clone();
    sorted.sort();
    assert_eq!(inputs, sorted);
}

#[test]
fn alg_run_reports_probabilities() {
    let v = json_of(&spanq(&["alg", "run", "deutsch"]));
    assert_eq!(v["result"]["rows"].as_array().unwrap().len(), 4);
    assert!((row(&v, "00")["p0"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(row(&v, "01")["p0"].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn zero_query_algorithm_is_rejected() {
    let path = scratch("t0.json");
    let identity: Vec<Vec<f64>> = (0..4)
        .map(|i| (0..4).map(|j| (i == j) as u8 as f64).collect())
        .collect();
    let alg =
        serde_json::json!({ "n": 1, "workspace_symbols": 1, "T": 0, "unitaries": [identity] });
    std::fs::write(&path, alg.to_string()).unwrap();
    let out = spanq(&["alg", "to-sp", path.to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn grover_pipeline() {
    let g = spanq(&["mono", "grover", "4"]);
    assert_eq!(g.status.code(), Some(0));
    let check = spanq_stdin(&["mono", "check", "-"], &g.stdout);
    assert_eq!(json_of(&check)["result"]["monotone"], true);
    let span = spanq_stdin(&["mono", "to-span", "-"], &g.stdout);
    assert_eq!(span.status.code(), Some(0));
    let eval = spanq_stdin(&["sp", "eval", "-", "0000"], &span.stdout);
    let v = json_of(&eval);
    let r = row(&v, "0000");
    assert_eq!(r["accepted"], false);
    assert!((r["w_minus"].as_f64().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn non_monotone_is_detected() {
    let v = json_of(&spanq(&["mono", "check", "non-monotone"]));
    assert_eq!(v["result"]["monotone"], false);
}

#[test]
fn partial_mass_violates_bounds() {
    let out = spanq(&["mono", "verify-bounds", "partial-mass1", "--table", "or1"]);
    assert_eq!(out.status.code(), Some(3));
    let ok = spanq(&["mono", "verify-bounds", "grover3", "--table", "or3"]);
    assert_eq!(ok.status.code(), Some(0));
}

#[test]
fn to_pea_round_trip() {
    let raw = spanq(&["mono", "to-pea", "or2", "--table", "or2"]);
    assert_eq!(raw.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&raw.stderr).contains("not normalized"));
    let normalized = spanq(&["sp", "normalize", "or2", "--table", "or2"]);
    let out = spanq_stdin(
        &["mono", "to-pea", "-", "--table", "or2"],
        &normalized.stdout,
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let check = spanq_stdin(&["mono", "check", "-"], &out.stdout);
    assert_eq!(json_of(&check)["result"]["monotone"], true);
}

#[test]
fn lower_bound_commands() {
    let adeg = json_of(&spanq(&["lb", "adeg", "parity3", "1/3"]));
    assert_eq!(adeg["result"]["degree"], 3);
    assert_eq!(adeg["result"]["certificate_verified"], true);

    let pattern = json_of(&spanq(&["lb", "pattern", "and2", "2"]));
    assert_eq!(pattern["result"]["rank"], 9);
    assert_eq!(pattern["result"]["matches"], true);

    let cert = json_of(&spanq(&[
        "lb",
        "certificate",
        "parity2",
        "00,01,10,11",
        "--lambda",
        "2",
        "--eps",
        "0.5",
    ]));
    assert_eq!(cert["result"]["n"], 64);

    let fourier = json_of(&spanq(&["lb", "fourier", "parity2"]));
    assert_eq!(fourier["result"]["degree"], 2);
    assert_eq!(fourier["result"]["rows"][0]["subset"], "{1,2}");

    let extract = json_of(&spanq(&["lb", "extract", "or2", "--table", "or2"]));
    assert!(extract["result"]["rows"].as_array().unwrap().len() == 2);
}

#[test]
fn measure_on_saved_pattern_matrix() {
    let path = scratch("pattern.json");
    let out = spanq(&[
        "lb",
        "pattern",
        "parity2",
        "1",
        "--save-matrix",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let m = spanq(&["lb", "measure", path.to_str().unwrap(), "whole"]);
    assert_eq!(
        m.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&m.stderr)
    );
    let bad = spanq(&["lb", "measure", path.to_str().unwrap(), "diagonal"]);
    assert_eq!(bad.status.code(), Some(4));
}

#[test]
fn verify_list_and_fault_injection() {
    let v = json_of(&spanq(&["verify", "all", "--list"]));
    let rows = v["result"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 12);
    assert_eq!(rows[0]["id"], 1);
    assert_eq!(
        spanq(&["verify", "all", "--inject-fault", "99"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn library_execute_matches_binary() {
    let cli = Cli::try_parse_from(["spanq", "sp", "eval", "or3", "010"]).unwrap();
    let outcome = execute(&cli).unwrap();
    assert_eq!(outcome.exit_code, 0);
    assert_eq!(outcome.command, "sp eval");
}

#[test]
fn encode_moves_constants_to_an_extra_bit() {
    let tol = TolerancePolicy::default();
    let p = or_program(2);
    let mut tags = p.tags.clone();
    tags.push(Tag::True);
    let zero = p.a[(0, 0)] * 0.0;
    let mut a = p.a.clone().insert_column(p.size(), zero);
    a[(0, p.size())] = zero + 0.5;
    let with_true = spanq::span_core::SpanProgram::new(2, tags, a, p.tau.clone(), p.field).unwrap();
    let enc = encode_constant_columns(&with_true).unwrap();
    assert_eq!(enc.n, 3);
    for x in [vec![0u8, 0], vec![0, 1], vec![1, 1]] {
        let mut x1 = x.clone();
        x1.push(1);
        assert_eq!(
            evaluate(&with_true, &x, &tol).unwrap(),
            evaluate(&enc, &x1, &tol).unwrap()
        );
        if evaluate(&enc, &x1, &tol).unwrap() {
            let w = positive_witness(&with_true, &x, &tol).unwrap().size;
            let we = positive_witness(&enc, &x1, &tol).unwrap().size;
            assert!((w - we).abs() < 1e-9);
        }
    }
    let x0 = vec![0u8, 0, 0];
    assert!(!evaluate(&enc, &x0, &tol).unwrap());
}
