//! Text formats for scores, run reports, bench tables and sweep reports.

use std::io::{self, Write};

use super::{BenchRow, RunReport, ScoredEdge, SweepRow, PARAM_KEYS};

pub const SCORE_HEADER: &str = "u,v,t,a_hat,s_hat,raw,posterior,z,tau,flag";

/// Formats `x` with 9 significant digits, like C's `%.9g`.
pub fn fmt_sig9(x: f64) -> String {
    const P: i32 = 9;
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    // Round to P significant digits first; the exponent of the rounded
    // value decides between fixed and scientific notation.
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent in {:e} output");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..P).contains(&exp) {
        let m = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (P - 1 - exp) as usize;
        trim_fraction(&format!("{:.*}", decimals, x)).to_owned()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn write_scores(mut out: impl Write, scored: &[ScoredEdge]) -> io::Result<()> {
    writeln!(out, "{SCORE_HEADER}")?;
    for s in scored {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            s.u,
            s.v,
            s.t,
            fmt_sig9(s.a_hat),
            fmt_sig9(s.s_hat),
            fmt_sig9(s.raw),
            fmt_sig9(s.posterior),
            fmt_sig9(s.z),
            fmt_sig9(s.tau),
            u8::from(s.flag)
        )?;
    }
    out.flush()
}

/// `key=value` lines, each prefixed with `prefix` (e.g. `"# "`).
pub fn write_report(mut out: impl Write, report: &RunReport, prefix: &str) -> io::Result<()> {
    let opt = |v: Option<f64>| v.map_or_else(|| "NA".to_owned(), fmt_sig9);
    writeln!(out, "{prefix}n_edges={}", report.n_edges)?;
    writeln!(out, "{prefix}exec_seconds={}", fmt_sig9(report.exec_seconds))?;
    writeln!(out, "{prefix}avg_time_per_edge={}", opt(report.avg_time_per_edge))?;
    if let Some(load) = report.load_seconds {
        writeln!(out, "{prefix}load_seconds={}", fmt_sig9(load))?;
    }
    writeln!(out, "{prefix}flagged={}", report.flagged)?;
    writeln!(out, "{prefix}auc={}", opt(report.auc))?;
    for (k, v) in report.params.echo() {
        writeln!(out, "{prefix}{k}={v}")?;
    }
    Ok(())
}

pub fn write_bench(mut out: impl Write, rows: &[BenchRow]) -> io::Result<()> {
    writeln!(out, "n_edges,exec_seconds,avg_time_per_edge_s")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{}",
            r.n_edges,
            fmt_sig9(r.exec_seconds),
            fmt_sig9(r.avg_time_per_edge)
        )?;
    }
    out.flush()
}

/// One row per cell: every parameter, then the aggregate columns. Cells
/// that failed carry `NA` aggregates.
pub fn write_sweep_report(mut out: impl Write, rows: &[SweepRow]) -> io::Result<()> {
    writeln!(
        out,
        "{},auc_mean,auc_std,runtime_mean_s,avg_time_per_edge_s",
        PARAM_KEYS.join(",")
    )?;
    let opt = |v: Option<f64>| v.map_or_else(|| "NA".to_owned(), fmt_sig9);
    for r in rows {
        let params: Vec<String> = r.params.echo().into_iter().map(|(_, v)| v).collect();
        writeln!(
            out,
            "{},{},{},{},{}",
            params.join(","),
            opt(r.auc_mean),
            opt(r.auc_std),
            opt(r.runtime_mean_s),
            opt(r.avg_time_per_edge_s)
        )?;
    }
    out.flush()
}
