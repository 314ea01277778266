//! CSV and JSON emission.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use otfs_core::{BlockSystem, CMatrix};
use serde::{Deserialize, Serialize};

use crate::convergence::ConvergenceReport;
use crate::error::{SimError, SimResult};
use crate::experiment::BerCurve;
use crate::mfb::MfbRow;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

pub fn ber_csv(curves: &[BerCurve]) -> String {
    let mut s = String::from("detector,snr_db,frames,bits,bit_errors,ber,avg_iters\n");
    for c in curves {
        for p in &c.points {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{:e},{}",
                c.detector.as_str(),
                p.snr_db,
                p.frames,
                p.bits,
                p.bit_errors,
                p.ber,
                p.avg_iters
            );
        }
    }
    s
}

pub fn mfb_csv(rows: &[MfbRow]) -> String {
    let mut s = String::from("snr_db,ber,stderr\n");
    for r in rows {
        let _ = writeln!(s, "{},{:e},{:e}", r.snr_db, r.ber, r.stderr);
    }
    s
}

/// Per-edge MSE samples (`paths,budget,snr_db,mse`).
pub fn mse_csv(report: &ConvergenceReport) -> String {
    let mut s = String::from("paths,budget,snr_db,mse\n");
    for m in &report.mse {
        for v in &m.samples {
            let _ = writeln!(s, "{},{},{},{:e}", report.paths, m.budget, m.snr_db, v);
        }
    }
    s
}

/// Mean iterations to termination (`paths,snr_db,frames,mean_iters,max_iters`).
pub fn iterations_csv(report: &ConvergenceReport) -> String {
    let mut s = String::from("paths,snr_db,frames,mean_iters,max_iters\n");
    for p in &report.iterations {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            report.paths, p.snr_db, p.frames, p.mean_iters, p.max_iters
        );
    }
    s
}

/// Nonzero entries as `row,col,re,im`; magnitudes below `threshold` are skipped.
pub fn matrix_csv(h: &CMatrix, threshold: f64) -> String {
    let mut s = String::from("row,col,re,im\n");
    for c in 0..h.cols() {
        for r in 0..h.rows() {
            let v = h[(r, c)];
            if v.norm() >= threshold {
                let _ = writeln!(s, "{r},{c},{:e},{:e}", v.re, v.im);
            }
        }
    }
    s
}

/// Active blocks as `d,c` pairs.
pub fn mask_csv(system: &BlockSystem) -> String {
    let mut s = String::from("d,c\n");
    for (d, c) in system.edges() {
        let _ = writeln!(s, "{d},{c}");
    }
    s
}

pub fn to_json<T: Serialize>(value: &T) -> SimResult<String> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| SimError::Config(format!("json: {e}")))
}

/// Write to `path`, or stdout when `None`.
pub fn write_output(path: Option<&Path>, content: &str) -> SimResult<()> {
    match path {
        Some(p) => std::fs::write(p, content).map_err(|source| SimError::Io {
            path: p.display().to_string(),
            source,
        }),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// `runs/conv.csv` -> `runs/conv-iterations.csv`.
pub fn sibling_path(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}-{suffix}.{}", ext.to_string_lossy()),
        None => format!("{stem}-{suffix}"),
    };
    path.with_file_name(name)
}

pub fn emit_ber(curves: &[BerCurve], path: Option<&Path>, format: Format) -> SimResult<()> {
    let text = match format {
        Format::Csv => ber_csv(curves),
        Format::Json => to_json(&curves)?,
    };
    write_output(path, &text)
}

pub fn emit_convergence(report: &ConvergenceReport, path: Option<&Path>, format: Format) -> SimResult<()> {
    match format {
        Format::Json => write_output(path, &to_json(report)?),
        Format::Csv => match path {
            Some(p) => {
                write_output(Some(p), &mse_csv(report))?;
                write_output(Some(&sibling_path(p, "iterations")), &iterations_csv(report))
            }
            None => write_output(None, &format!("{}\n{}", mse_csv(report), iterations_csv(report))),
        },
    }
}

pub fn emit_mfb(rows: &[MfbRow], path: Option<&Path>, format: Format) -> SimResult<()> {
    let text = match format {
        Format::Csv => mfb_csv(rows),
        Format::Json => to_json(&rows)?,
    };
    write_output(path, &text)
}
