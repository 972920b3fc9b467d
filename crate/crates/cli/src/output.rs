//! Files and terminal summaries for each kind of run.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;
use serde_json::Value;
use svs_core::ensemble::{AatScale, Calibration, EnsembleStats};
use svs_core::report::{write_histogram_csv, write_sweep_csv, RunDocument, RunOutput, RunRequest};
use svs_core::stats::{RatioFamily, ReferenceConstants};

use crate::Format;

/// Contents of the constants file written by `calibrate` and read by `--refs`.
#[derive(Serialize)]
struct ConstantsFile<'a> {
    n: usize,
    realizations: usize,
    seed: u64,
    scale: AatScale,
    constants: &'a ReferenceConstants,
    std_errors: &'a ReferenceConstants,
    small_n_warning: bool,
}

fn create(dir: &Path, file: &str, write: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let path = dir.join(file);
    let handle = File::create(&path).with_context(|| format!("cannot write {}", path.display()))?;
    let mut out = BufWriter::new(handle);
    write(&mut out).with_context(|| format!("cannot write {}", path.display()))?;
    out.flush().with_context(|| format!("cannot write {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

/// Writes the files of `doc` under `dir` and prints a summary.
pub fn emit(doc: &RunDocument, dir: &Path, stem: &str, format: Format) -> Result<()> {
    match &doc.output {
        RunOutput::Sweep(result) => {
            print_sweep(&result.points);
            if format.csv() {
                create(dir, &format!("{stem}.csv"), |w| Ok(write_sweep_csv(w, &result.points)?))?;
            }
        }
        RunOutput::Calibrate(cal) => {
            print_calibration(cal);
            let file = ConstantsFile {
                n: cal.n,
                realizations: cal.realizations,
                seed: cal.seed,
                scale: cal.scale,
                constants: &cal.constants,
                std_errors: &cal.std_errors,
                small_n_warning: cal.small_n_warning,
            };
            create(dir, &format!("{stem}.json"), |w| {
                serde_json::to_writer_pretty(&mut *w, &file)?;
                Ok(writeln!(w)?)
            })?;
        }
        RunOutput::Hist(result) => {
            if let Some(found) = &result.located {
                println!(
                    "located {} = {:.6} (normalized rR_AAT {:.4} +/- {:.4})",
                    control_label(&doc.request),
                    found.param,
                    found.estimate,
                    found.std_err
                );
            }
            let stats = match &doc.request {
                RunRequest::Hist(job) => job.stats.clone(),
                _ => Vec::new(),
            };
            let histograms = result
                .stats
                .histograms
                .as_ref()
                .ok_or_else(|| anyhow!("histogram run produced no histograms"))?;
            for stat in stats {
                let density = stat
                    .density(histograms)
                    .ok_or_else(|| anyhow!("no {stat} histogram in the results"))?;
                println!(
                    "{stat}: {} samples in range, {} outside",
                    density.in_range, density.out_of_range
                );
                if format.csv() {
                    create(dir, &format!("{stem}-{stat}.csv"), |w| Ok(write_histogram_csv(w, stat, density)?))?;
                }
            }
        }
        RunOutput::Locate(result) => {
            println!(
                "{} = {:.6} after {} iterations (estimate {:.4} +/- {:.4}, target {} +/- {})",
                control_label(&doc.request),
                result.param,
                result.iterations,
                result.estimate,
                result.std_err,
                result.target,
                result.tolerance
            );
            if format.csv() {
                create(dir, &format!("{stem}.csv"), |w| {
                    let mut out = csv::Writer::from_writer(w);
                    out.write_record(["param", "estimate", "std_err", "realizations"])?;
                    for s in &result.steps {
                        out.write_record([
                            s.param.to_string(),
                            s.estimate.to_string(),
                            s.std_err.to_string(),
                            s.realizations.to_string(),
                        ])?;
                    }
                    Ok(out.flush()?)
                })?;
            }
        }
    }
    if format.json() {
        create(dir, &format!("{stem}.run.json"), |w| {
            doc.write_json(&mut *w)?;
            Ok(writeln!(w)?)
        })?;
    }
    Ok(())
}

fn control_label(request: &RunRequest) -> &'static str {
    let model = match request {
        RunRequest::Hist(job) => job.model,
        RunRequest::Locate(l) => l.model,
        _ => return "param",
    };
    model.control_name().unwrap_or("param")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".into())
}

fn print_sweep(points: &[EnsembleStats]) {
    println!(
        "{:>6} {:>12} {:>9} {:>9} {:>9} {:>9} {:>10} {:>9}",
        "n", "param", "<k>", "rR_norm", "rC_norm", "rCA_norm", "lmin", "ratio2"
    );
    for p in points {
        let norm = |f: RatioFamily| fmt_opt(p.ratio(f).map(|r| r.normalized));
        println!(
            "{:>6} {:>12} {:>9.3} {:>9} {:>9} {:>9} {:>10} {:>9}",
            p.n(),
            p.param().map(|x| format!("{x:.6}")).unwrap_or_else(|| "-".into()),
            p.k_mean,
            norm(RatioFamily::RrAat),
            norm(RatioFamily::RcAat),
            norm(RatioFamily::RcA),
            p.min_singular.map(|s| format!("{:.3e}", s.mean)).unwrap_or_else(|| "-".into()),
            fmt_opt(p.min_singular.map(|s| s.moment_ratio)),
        );
    }
}

fn print_calibration(cal: &Calibration) {
    let c = &cal.constants;
    let e = &cal.std_errors;
    println!("n = {}, {} realizations, seed {}, scale {:?}", cal.n, cal.realizations, cal.seed, cal.scale);
    for (family, (pe, rge), (pe_se, rge_se)) in [
        (RatioFamily::RrAat, c.endpoints(RatioFamily::RrAat), e.endpoints(RatioFamily::RrAat)),
        (RatioFamily::RcAat, c.endpoints(RatioFamily::RcAat), e.endpoints(RatioFamily::RcAat)),
        (RatioFamily::RcA, c.endpoints(RatioFamily::RcA), e.endpoints(RatioFamily::RcA)),
    ] {
        println!("{:>7}: PE {pe:.5} +/- {pe_se:.5}   RGE {rge:.5} +/- {rge_se:.5}", family.label());
    }
    if cal.small_n_warning {
        eprintln!(
            "warning: n = {} is small; finite-size corrections make these constants differ from the large-n values",
            cal.n
        );
    }
}

/// Fails if the sweep recorded per-point errors; the files are already
/// written by then.
pub fn point_errors(doc: &RunDocument) -> Result<()> {
    if let RunOutput::Sweep(result) = &doc.output {
        for e in &result.errors {
            eprintln!("point {} (seed {}) failed: {}", e.params, e.seed, e.message);
        }
        if !result.errors.is_empty() {
            bail!("{} of {} points failed", result.errors.len(), result.errors.len() + result.points.len());
        }
    }
    Ok(())
}

/// Compares two outputs field by field; numbers may differ by `tol`
/// relative to their magnitude (absolute below 1).
pub fn compare_outputs(stored: &RunOutput, fresh: &RunOutput, tol: f64) -> Result<()> {
    let a = serde_json::to_value(stored)?;
    let b = serde_json::to_value(fresh)?;
    compare_values(&a, &b, tol, "output")
}

fn compare_values(a: &Value, b: &Value, tol: f64, path: &str) -> Result<()> {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64().unwrap_or(f64::NAN), y.as_f64().unwrap_or(f64::NAN));
            if (x - y).abs() > tol * x.abs().max(y.abs()).max(1.0) {
                bail!("replay differs at {path}: stored {x}, recomputed {y}");
            }
            Ok(())
        }
        (Value::Array(xs), Value::Array(ys)) => {
            if xs.len() != ys.len() {
                bail!("replay differs at {path}: {} vs {} entries", xs.len(), ys.len());
            }
            for (i, (x, y)) in xs.iter().zip(ys).enumerate() {
                compare_values(x, y, tol, &format!("{path}[{i}]"))?;
            }
            Ok(())
        }
        (Value::Object(xs), Value::Object(ys)) => {
            if xs.len() != ys.len() {
                bail!("replay differs at {path}: different fields");
            }
            for (key, x) in xs {
                let y = ys.get(key).ok_or_else(|| anyhow!("replay differs at {path}: missing {key}"))?;
                compare_values(x, y, tol, &format!("{path}.{key}"))?;
            }
            Ok(())
        }
        _ if a == b => Ok(()),
        _ => bail!("replay differs at {path}: stored {a}, recomputed {b}"),
    }
}
