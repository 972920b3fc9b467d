//! Result files: the sweep CSV, histogram CSVs with analytic overlays, and a
//! JSON run document that embeds the full request so a run can be replayed.

use std::io::Write;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::ensemble::{
    calibrate_references, locate_parameter, run_hist, run_sweep, AatScale, Calibration, EnsembleStats,
    HistJob, HistResult, HistStat, LocateOptions, LocateResult, SweepResult, SweepSpec,
};
use crate::error::{Error, Result};
use crate::models::GraphModel;
use crate::stats::{pdf_goe_ratio, pdf_pe_min_singular, pdf_pe_ratio, DensityHistogram, RatioFamily, ReferenceConstants};

pub const SWEEP_CSV_HEADER: [&str; 14] = [
    "model",
    "n",
    "param",
    "k_mean",
    "rR_AAT",
    "rC_AAT",
    "rC_A",
    "rR_AAT_norm",
    "rC_AAT_norm",
    "rC_A_norm",
    "lmin_mean",
    "lmin_meansq",
    "lmin_moment_ratio",
    "samples",
];

fn cell(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// One row per point. Statistics that were not computed are left empty;
/// `samples` is the number of matrices that entered the point.
pub fn write_sweep_csv<W: Write>(writer: W, points: &[EnsembleStats]) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(SWEEP_CSV_HEADER)?;
    for p in points {
        let raw = |f: RatioFamily| cell(p.ratio(f).map(|r| r.mean));
        let norm = |f: RatioFamily| cell(p.ratio(f).map(|r| r.normalized));
        let lmin = p.min_singular;
        out.write_record([
            p.model().to_string(),
            p.n().to_string(),
            cell(p.param()),
            p.k_mean.to_string(),
            raw(RatioFamily::RrAat),
            raw(RatioFamily::RcAat),
            raw(RatioFamily::RcA),
            norm(RatioFamily::RrAat),
            norm(RatioFamily::RcAat),
            norm(RatioFamily::RcA),
            cell(lmin.map(|s| s.mean)),
            cell(lmin.map(|s| s.mean_sq)),
            cell(lmin.map(|s| s.moment_ratio)),
            p.used().to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// A named analytic density.
pub type Overlay = (&'static str, fn(f64) -> f64);

/// Analytic curves plotted against a histogram of `stat`.
pub fn overlays(stat: HistStat) -> Vec<Overlay> {
    fn pe(r: f64) -> f64 {
        pdf_pe_ratio(r).unwrap_or(f64::NAN)
    }
    fn goe(r: f64) -> f64 {
        pdf_goe_ratio(r).unwrap_or(f64::NAN)
    }
    fn exponential(x: f64) -> f64 {
        pdf_pe_min_singular(x).unwrap_or(f64::NAN)
    }
    match stat {
        HistStat::RrAat => vec![("pdf_pe", pe), ("pdf_goe", goe)],
        HistStat::Lmin => vec![("pdf_pe_exp", exponential)],
        HistStat::RcAat | HistStat::RcA => Vec::new(),
    }
}

/// Histogram CSV with the overlay columns of `stat`.
pub fn write_histogram_csv<W: Write>(writer: W, stat: HistStat, density: &DensityHistogram) -> Result<()> {
    let curves = overlays(stat);
    let dyn_curves: Vec<(&str, &dyn Fn(f64) -> f64)> =
        curves.iter().map(|(name, f)| (*name, f as &dyn Fn(f64) -> f64)).collect();
    density.write_csv_with_overlays(writer, &dyn_curves)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrateRequest {
    pub n: usize,
    pub realizations: usize,
    pub seed: u64,
    pub scale: AatScale,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocateRequest {
    pub model: GraphModel,
    pub n: usize,
    pub target: f64,
    pub tolerance: f64,
    pub seed: u64,
    pub options: LocateOptions,
}

/// Everything needed to recompute a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum RunRequest {
    Sweep(SweepSpec),
    Calibrate(CalibrateRequest),
    Hist(HistJob),
    Locate(LocateRequest),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
#[allow(clippy::large_enum_variant)]
pub enum RunOutput {
    Sweep(SweepResult),
    Calibrate(Calibration),
    Hist(HistResult),
    Locate(LocateResult),
}

impl RunRequest {
    pub fn execute(&self) -> Result<RunOutput> {
        Ok(match self {
            RunRequest::Sweep(spec) => RunOutput::Sweep(run_sweep(spec)?),
            RunRequest::Calibrate(c) => {
                RunOutput::Calibrate(calibrate_references(c.n, c.realizations, c.seed, c.scale)?)
            }
            RunRequest::Hist(job) => RunOutput::Hist(run_hist(job)?),
            RunRequest::Locate(l) => {
                RunOutput::Locate(locate_parameter(l.model, l.n, l.target, l.tolerance, l.seed, &l.options)?)
            }
        })
    }

    /// Reference constants used for normalization.
    pub fn constants(&self) -> ReferenceConstants {
        match self {
            RunRequest::Sweep(spec) => spec.config.refs,
            RunRequest::Calibrate(_) => ReferenceConstants::PUBLISHED,
            RunRequest::Hist(job) => job.refs,
            RunRequest::Locate(l) => l.options.refs,
        }
    }
}

/// JSON record of a run: request, provenance and results.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunDocument {
    pub tool: String,
    pub version: String,
    pub request: RunRequest,
    pub constants: ReferenceConstants,
    /// Informational; results do not depend on it.
    pub workers: usize,
    pub started_unix: u64,
    pub elapsed_seconds: f64,
    pub output: RunOutput,
}

impl RunDocument {
    /// Executes `request` and records provenance around it.
    pub fn run(request: RunRequest, workers: usize) -> Result<Self> {
        let started_unix = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or_default();
        let clock = Instant::now();
        let output = request.execute()?;
        Ok(Self {
            tool: "svslab".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            constants: request.constants(),
            request,
            workers,
            started_unix,
            elapsed_seconds: clock.elapsed().as_secs_f64(),
            output,
        })
    }

    /// Re-executes the embedded request.
    pub fn replay(&self) -> Result<RunOutput> {
        self.request.execute()
    }

    pub fn write_json<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer_pretty(writer, self)?;
        Ok(())
    }

    pub fn read_json<R: std::io::Read>(reader: R) -> Result<Self> {
        serde_json::from_reader(reader).map_err(|e| Error::Input(format!("not a run document: {e}")))
    }
}
