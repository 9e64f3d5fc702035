use std::path::Path;
use std::process::{Command, Output};

use compdefl::problems::LcpData;
use compdefl::Matrix;
use clap::Parser;
use compdefl_cli::args::{parse_vector, parse_vector_list, Cli, Command as CliCommand};
use compdefl_cli::Job;
use compdefl_cli::report::Report;
use compdefl_cli::{lcp_from_file, read_lcp, write_lcp};
use proptest::prelude::*;

fn compdefl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_compdefl"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json_report(args: &[&str]) -> (Report, String) {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let o = compdefl(&all);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    (serde_json::from_str(&text).expect("valid JSON report"), text)
}

fn write_text(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn kojima_table_lists_two_solutions() {
    let o = compdefl(&["solve", "--problem", "kojima"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("2 solution(s)"), "{text}");
    assert!(text.contains("z = [1.0000000000, 0.0000000000, 3.0000000000, 0.0000000000]"));
}

#[test]
fn gould_json_has_three_records() {
    let (report, _) = json_report(&["solve", "--problem", "gould"]);
    assert_eq!(report.problem, "gould");
    assert_eq!(report.solutions.len(), 3);
    assert_eq!((report.params.p, report.params.alpha), (2.0, 1.0));
    for (i, s) in report.solutions.iter().enumerate() {
        assert_eq!(s.index, i + 1);
        assert!(s.residual_norm <= 1e-10);
        assert_eq!(s.z.len(), 4);
        assert_eq!(s.f.len(), 4);
    }
}

#[test]
fn json_schema_field_names() {
    let (_, text) = json_report(&["solve", "--problem", "kojima"]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    for key in ["problem", "params", "solutions", "status"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    for key in ["p", "alpha", "delta", "tol"] {
        assert!(v["params"].get(key).is_some(), "missing params.{key}");
    }
    let sol = &v["solutions"][0];
    for key in ["index", "z", "F", "residual_norm", "iterations"] {
        assert!(sol.get(key).is_some(), "missing solutions[0].{key}");
    }
}

#[test]
fn json_round_trips_bit_exactly() {
    let args = ["solve", "--problem", "mathiesen", "--max-solutions", "8"];
    let (report, text) = json_report(&args);
    let cli = Cli::try_parse_from(std::iter::once("compdefl").chain(args)).unwrap();
    let CliCommand::Solve(solve) = cli.command else {
        panic!("expected solve");
    };
    let direct = Job::from_args(&solve).unwrap().run().unwrap();
    assert_eq!(report.solutions.len(), direct.solutions.len());
    for (a, b) in report.solutions.iter().zip(&direct.solutions) {
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a.z), bits(&b.z));
        assert_eq!(bits(&a.f), bits(&b.f));
        assert_eq!(a.residual_norm.to_bits(), b.residual_norm.to_bits());
    }
    let again = serde_json::to_string_pretty(&report).unwrap();
    assert_eq!(again.trim_end(), text.trim_end());
}

#[test]
fn konno_kuno_reported_in_original_coordinates() {
    let (report, _) = json_report(&["solve", "--problem", "konno-kuno", "--max-solutions", "1"]);
    assert_eq!(report.solutions[0].z, vec![0.0; 9]);
}

#[test]
fn repeated_runs_are_identical() {
    for args in [
        &["solve", "--problem", "kojima", "--format", "json"][..],
        &["solve", "--problem", "mathiesen", "--max-solutions", "20", "--format", "csv"][..],
    ] {
        let a = compdefl(args);
        let b = compdefl(args);
        assert_eq!(a.stdout, b.stdout);
        assert_eq!(a.status.code(), b.status.code());
    }
}

#[test]
fn csv_has_one_row_per_solution() {
    let o = compdefl(&["solve", "--problem", "gould", "--format", "csv"]);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "index,iterations,residual_norm,z1,z2,z3,z4,F1,F2,F3,F4");
    assert_eq!(lines.len(), 4);
    let cols: Vec<f64> = lines[3].split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(cols.len(), 11);
    assert!((cols[3] - 11.0 / 32.0).abs() < 1e-12);
}

#[test]
fn no_solution_exits_two() {
    // Deflating the first root up front leaves nothing reachable from z0.
    let o = compdefl(&[
        "solve", "--problem", "kojima", "--pre-deflate", "1,0,3,0", "--max-iter", "30",
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
    assert!(stdout(&o).contains("0 solution(s)"));
}

#[test]
fn usage_errors_exit_one() {
    let cases: &[&[&str]] = &[
        &["solve", "--problem", "nope"],
        &["solve"],
        &["solve", "--problem", "kojima", "--x0", "1,2"],
        &["solve", "--problem", "kojima", "--x0", "abc"],
        &["solve", "--problem", "kojima", "--x0", "-1"],
        &["solve", "--problem", "kojima", "--p", "0.5"],
        &["solve", "--problem", "kojima", "--alpha", "x"],
        &["solve", "--problem", "kojima", "--linesearch", "wolfe"],
        &["solve", "--problem", "kojima", "--gamma", "2"],
        &["solve", "--problem", "kojima", "--max-solutions", "0"],
        &["solve", "--problem", "tinloi"],
        &["solve", "--lcp-file", "/nonexistent/lcp.txt"],
        &["frobnicate"],
    ];
    for args in cases {
        let o = compdefl(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", stdout(&o));
        assert!(!stderr(&o).is_empty(), "{args:?} prints a message");
    }
}

#[test]
fn help_exits_zero() {
    assert_eq!(compdefl(&["--help"]).status.code(), Some(0));
    assert_eq!(compdefl(&["solve", "--help"]).status.code(), Some(0));
}

#[test]
fn overrides_reach_the_report() {
    let (report, _) = json_report(&[
        "solve", "--problem", "kojima", "--p", "2", "--alpha", "1", "--delta", "1e-5", "--tol",
        "1e-9",
    ]);
    assert_eq!(report.params.p, 2.0);
    assert_eq!(report.params.alpha, 1.0);
    assert_eq!(report.params.delta, 1e-5);
    assert_eq!(report.params.tol, 1e-9);
}

#[test]
fn lcp_file_identity_solves_to_ones() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_text(dir.path(), "lcp.txt", "2\n1 0\n0 1\n-1 -1\n");
    let p = path.to_str().unwrap();
    let (report, _) = json_report(&["solve", "--lcp-file", p, "--p", "1", "--alpha", "1", "--x0", "0.4"]);
    assert_eq!(report.problem, "lcp");
    assert_eq!(report.solutions.len(), 1);
    for v in &report.solutions[0].z {
        assert!((v - 1.0).abs() < 1e-10);
    }
}

#[test]
fn tinloi_template_accepts_a_data_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_text(dir.path(), "t.txt", "1\n2\n-1\n");
    let (report, _) = json_report(&["solve", "--problem", "tinloi", "--lcp-file", path.to_str().unwrap()]);
    assert_eq!(report.problem, "tinloi");
    assert!((report.solutions[0].z[0] - 0.5).abs() < 1e-10);
}

#[test]
fn malformed_lcp_file_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_text(dir.path(), "bad.txt", "2\n1 0\n0 x\n-1 -1\n");
    let o = compdefl(&["solve", "--lcp-file", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let msg = stderr(&o);
    assert!(msg.contains("line 3, column 3"), "{msg}");

    let short = write_text(dir.path(), "short.txt", "2\n1 0\n0 1\n-1\n");
    let err = read_lcp(&short).unwrap_err().to_string();
    assert!(err.contains("expected 6 numbers"), "{err}");
}

#[test]
fn scalar_lcp_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_text(dir.path(), "s.txt", "1\n2\n-1\n");
    let problem = lcp_from_file(&path).unwrap();
    assert_eq!(problem.eval(&[3.0]).unwrap(), vec![5.0]);
    assert!(problem.has_jacobian());
}

#[test]
fn vector_flags() {
    assert_eq!(parse_vector("0.4", 3).unwrap(), vec![0.4; 3]);
    assert_eq!(parse_vector("1, 2,3", 3).unwrap(), vec![1.0, 2.0, 3.0]);
    assert!(parse_vector("1,2", 3).is_err());
    assert!(parse_vector("nan", 1).is_err());
    assert_eq!(
        parse_vector_list("0;1,2", 2).unwrap(),
        vec![vec![0.0, 0.0], vec![1.0, 2.0]]
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lcp_file_round_trip(n in 1usize..6, seed in proptest::collection::vec(-1e6f64..1e6, 42)) {
        let vals: Vec<f64> = (0..n * n + n)
            .map(|k| seed[k % seed.len()] * (1.0 + k as f64).powi(if k % 2 == 0 { -7 } else { 3 }))
            .collect();
        let data = LcpData {
            a: Matrix::from_row_major(n, n, vals[..n * n].to_vec()),
            b: vals[n * n..].to_vec(),
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lcp.txt");
        write_lcp(&path, &data).unwrap();
        let back = read_lcp(&path).unwrap();
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(back.a.as_slice()), bits(data.a.as_slice()));
        prop_assert_eq!(bits(&back.b), bits(&data.b));
    }
}
