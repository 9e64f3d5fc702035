use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub problem: String,
    pub params: ParamsReport,
    pub solutions: Vec<SolutionRecord>,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsReport {
    pub p: f64,
    pub alpha: f64,
    pub delta: f64,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    /// 1-based, in discovery order.
    pub index: usize,
    pub z: Vec<f64>,
    #[serde(rename = "F")]
    pub f: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
}

// Floats go out in shortest round-trip form, so parsing the report back
// recovers every value bit for bit.

pub fn write_json(out: &mut dyn Write, report: &Report) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, report).map_err(std::io::Error::from)?;
    writeln!(out)?;
    Ok(())
}

/// One row per solution; `n` sizes the header when there are no rows.
pub fn write_csv(out: &mut dyn Write, report: &Report, n: usize) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["index".to_string(), "iterations".into(), "residual_norm".into()];
    header.extend((1..=n).map(|i| format!("z{i}")));
    header.extend((1..=n).map(|i| format!("F{i}")));
    w.write_record(&header)?;
    for s in &report.solutions {
        let mut row = vec![
            s.index.to_string(),
            s.iterations.to_string(),
            fmt_float(s.residual_norm),
        ];
        row.extend(s.z.iter().copied().map(fmt_float));
        row.extend(s.f.iter().copied().map(fmt_float));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

// `Debug` is the shortest round-trip form and switches to exponent notation
// for very small or large magnitudes.
fn fmt_float(x: f64) -> String {
    format!("{x:?}")
}

pub fn write_table(out: &mut dyn Write, report: &Report) -> Result<(), CliError> {
    let p = &report.params;
    writeln!(
        out,
        "problem {}  p = {}  alpha = {}  delta = {:e}  tol = {:e}",
        report.problem, p.p, p.alpha, p.delta, p.tol
    )?;
    writeln!(out, "{:>4}  {:>5}  {:>10}  z / F(z)", "#", "iters", "residual")?;
    for s in &report.solutions {
        writeln!(
            out,
            "{:>4}  {:>5}  {:>10.3e}  z = {}",
            s.index,
            s.iterations,
            s.residual_norm,
            fmt_vec(&s.z)
        )?;
        writeln!(out, "{:>25}F = {}", "", fmt_vec(&s.f))?;
    }
    writeln!(
        out,
        "{} solution(s), stopped: {}",
        report.solutions.len(),
        report.status
    )?;
    Ok(())
}

// Fixed ten decimals; anything that would print as `-0.0000000000` prints as zero.
fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v
        .iter()
        .map(|&x| if x.abs() < 5e-11 { 0.0 } else { x })
        .map(|x| format!("{x:.10}"))
        .collect();
    format!("[{}]", parts.join(", "))
}
