//! CSV and gnuplot emitters.
//!
//! Column order is part of the output schema and changes only together with
//! [`SCHEMA_VERSION`]. Floats are written in shortest round-trip form.

use std::io::Write;

use crate::alloc::AllocDump;
use crate::bench::{BenchMedian, BenchRecord};
use crate::bounds::BoundRow;
use crate::error::Result;
use crate::summary::SummaryRow;
use crate::sweep::TrialRecord;

pub const SCHEMA_VERSION: u32 = 1;

pub const RECORDS_HEADER: [&str; 10] =
    ["algorithm", "N", "N_hat", "r", "trial", "seed", "chosen_degree", "sup_error", "samples_used", "error"];
pub const SUMMARY_HEADER: [&str; 9] = [
    "algorithm",
    "N",
    "N_hat",
    "trials",
    "failures",
    "mean_sup_error",
    "q025_sup_error",
    "q975_sup_error",
    "mean_degree",
];
pub const TIMING_HEADER: [&str; 4] = ["algorithm", "N", "trial", "wall_time_s"];
pub const ALLOC_HEADER: [&str; 6] = ["i", "x", "sigma", "s2", "k_hetero", "k_known"];
pub const BOUNDS_HEADER: [&str; 4] = ["t", "threshold", "probability_raw", "probability_clamped"];
pub const BENCH_HEADER: [&str; 4] = ["algorithm", "N", "trial", "wall_time_s"];
pub const BENCH_MEDIAN_HEADER: [&str; 3] = ["algorithm", "N", "median_wall_time_s"];

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

pub fn write_records<W: Write>(w: W, records: &[TrialRecord]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(RECORDS_HEADER)?;
    for r in records {
        out.write_record([
            r.algorithm.tag().to_string(),
            r.big_n.to_string(),
            r.n_hat.to_string(),
            r.r.map(fmt_f64).unwrap_or_default(),
            r.trial.to_string(),
            r.seed.to_string(),
            opt(r.chosen_degree),
            r.sup_error.map(fmt_f64).unwrap_or_default(),
            r.samples_used.to_string(),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_summary<W: Write>(w: W, rows: &[SummaryRow]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(SUMMARY_HEADER)?;
    for r in rows {
        out.write_record([
            r.group.algorithm.map(|a| a.tag().to_string()).unwrap_or_default(),
            opt(r.group.big_n),
            opt(r.group.n_hat),
            r.count.to_string(),
            r.failures.to_string(),
            fmt_f64(r.mean_error),
            fmt_f64(r.q025_error),
            fmt_f64(r.q975_error),
            fmt_f64(r.mean_degree),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_timing<W: Write>(w: W, records: &[TrialRecord]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(TIMING_HEADER)?;
    for r in records {
        out.write_record([
            r.algorithm.tag().to_string(),
            r.big_n.to_string(),
            r.trial.to_string(),
            fmt_f64(r.wall_time_s),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_alloc<W: Write>(w: W, dump: &AllocDump) -> Result<()> {
    let mut out = writer(w);
    out.write_record(ALLOC_HEADER)?;
    for (i, r) in dump.rows.iter().enumerate() {
        out.write_record([
            i.to_string(),
            fmt_f64(r.x),
            fmt_f64(r.sigma),
            fmt_f64(r.s2),
            r.k_hetero.to_string(),
            r.k_known.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_bounds<W: Write>(w: W, rows: &[BoundRow]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(BOUNDS_HEADER)?;
    for r in rows {
        out.write_record([
            fmt_f64(r.t),
            fmt_f64(r.threshold),
            fmt_f64(r.probability_raw),
            fmt_f64(r.probability_clamped),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_bench<W: Write>(w: W, records: &[BenchRecord]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(BENCH_HEADER)?;
    for r in records {
        out.write_record([r.algorithm.tag().to_string(), r.big_n.to_string(), r.trial.to_string(), fmt_f64(r.seconds)])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_bench_medians<W: Write>(w: W, rows: &[BenchMedian]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(BENCH_MEDIAN_HEADER)?;
    for r in rows {
        out.write_record([r.algorithm.tag().to_string(), r.big_n.to_string(), fmt_f64(r.median_s)])?;
    }
    out.flush()?;
    Ok(())
}

/// gnuplot script drawing mean sup error against `N` on log-log axes, one
/// line per algorithm with its 2.5%-97.5% band, read from `summary.csv`.
pub fn gnuplot_script(summary_file: &str, algorithms: &[&str], title: &str) -> String {
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set logscale xy\nset key top right\nset grid\n");
    s.push_str("set xlabel 'N'\nset ylabel 'uniform error'\n");
    s.push_str(&format!("set title '{}'\n", title.replace('\'', "")));
    s.push_str("set terminal pngcairo size 900,600\nset output 'sweep.png'\n");
    let plots: Vec<String> = algorithms
        .iter()
        .enumerate()
        .flat_map(|(i, alg)| {
            let sel = format!("(strcol(1) eq '{alg}' ? $2 : 1/0)");
            [
                format!(
                    "'{summary_file}' every ::1 using {sel}:7:8 with filledcurves fs transparent solid 0.2 lc {} notitle",
                    i + 1
                ),
                format!("'{summary_file}' every ::1 using {sel}:6 with lines lw 2 lc {} title '{alg}'", i + 1),
            ]
        })
        .collect();
    s.push_str("plot ");
    s.push_str(&plots.join(", \\\n     "));
    s.push('\n');
    s
}
