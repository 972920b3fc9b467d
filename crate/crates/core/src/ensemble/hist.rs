use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::locate::{locate_parameter, LocateOptions, LocateResult};
use super::point::{run_point, AatScale, EnsembleStats, HistogramSpec, PointConfig, PointHistograms, StatFlags};
use super::sweep::Budget;
use crate::error::{Error, Result};
use crate::models::{derive_seed, GraphModel};
use crate::stats::{DensityHistogram, RatioFamily, ReferenceConstants};

/// A statistic with a histogram.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HistStat {
    #[serde(rename = "rR_AAT")]
    RrAat,
    #[serde(rename = "rC_AAT")]
    RcAat,
    #[serde(rename = "rC_A")]
    RcA,
    /// `lambda_min / <lambda_min>`.
    #[serde(rename = "lmin")]
    Lmin,
}

impl HistStat {
    pub fn label(self) -> &'static str {
        match self {
            HistStat::RrAat => "rR_AAT",
            HistStat::RcAat => "rC_AAT",
            HistStat::RcA => "rC_A",
            HistStat::Lmin => "lmin",
        }
    }

    pub fn family(self) -> Option<RatioFamily> {
        match self {
            HistStat::RrAat => Some(RatioFamily::RrAat),
            HistStat::RcAat => Some(RatioFamily::RcAat),
            HistStat::RcA => Some(RatioFamily::RcA),
            HistStat::Lmin => None,
        }
    }

    pub fn density(self, histograms: &PointHistograms) -> Option<&DensityHistogram> {
        match self.family() {
            Some(family) => histograms.ratio(family),
            None => histograms.lmin.as_ref(),
        }
    }
}

impl fmt::Display for HistStat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for HistStat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("lmin") {
            return Ok(HistStat::Lmin);
        }
        let family: RatioFamily = s
            .parse()
            .map_err(|_| Error::Parameter(format!("unknown statistic '{s}' (expected rR_AAT, rC_AAT, rC_A or lmin)")))?;
        Ok(match family {
            RatioFamily::RrAat => HistStat::RrAat,
            RatioFamily::RcAat => HistStat::RcAat,
            RatioFamily::RcA => HistStat::RcA,
        })
    }
}

/// How the control parameter of a histogram job is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Control {
    /// Explicit `p` or `rho`.
    Value(f64),
    /// Located so that the normalized `rR_AAT` mean matches.
    TargetRbar(f64),
    /// PE and RGE.
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistJob {
    pub model: GraphModel,
    pub n: usize,
    pub control: Control,
    pub budget: Budget,
    pub seed: u64,
    pub stats: Vec<HistStat>,
    pub bins: HistogramSpec,
    pub scale: AatScale,
    pub refs: ReferenceConstants,
    /// Tolerance of the parameter search for [`Control::TargetRbar`].
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistResult {
    pub located: Option<LocateResult>,
    pub stats: EnsembleStats,
}

/// Collects the requested histograms at one point. A target `rbar` is first
/// located with seed `derive_seed(job.seed, 1)`; the histogram ensemble
/// always uses `job.seed`.
pub fn run_hist(job: &HistJob) -> Result<HistResult> {
    if job.stats.is_empty() {
        return Err(Error::Parameter("no statistic selected for histograms".into()));
    }
    let (control, located) = match job.control {
        Control::Value(x) => (Some(x), None),
        Control::None => (None, None),
        Control::TargetRbar(target) => {
            let options = LocateOptions {
                scale: job.scale,
                refs: job.refs,
                ..LocateOptions::default()
            };
            let found = locate_parameter(job.model, job.n, target, job.tolerance, derive_seed(job.seed, 1), &options)?;
            (Some(found.param), Some(found))
        }
    };
    let params = job.model.params(job.n, control)?;
    let mut flags = StatFlags::NONE;
    for stat in &job.stats {
        match stat.family() {
            Some(family) => flags.set(family, true),
            None => flags.min_singular = true,
        }
    }
    let config = PointConfig {
        flags,
        scale: job.scale,
        refs: job.refs,
        histograms: Some(job.bins),
    };
    let stats = run_point(&params, job.budget.realizations(job.n), job.seed, &config)?;
    Ok(HistResult { located, stats })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn job(control: Control, stats: Vec<HistStat>) -> HistJob {
        HistJob {
            model: GraphModel::Derg,
            n: 20,
            control,
            budget: Budget::Realizations(10),
            seed: 3,
            stats,
            bins: HistogramSpec::default(),
            scale: AatScale::Singular,
            refs: ReferenceConstants::PUBLISHED,
            tolerance: 0.02,
        }
    }

    #[test]
    fn stat_names_round_trip() {
        for stat in [HistStat::RrAat, HistStat::RcAat, HistStat::RcA, HistStat::Lmin] {
            assert_eq!(stat.label().parse::<HistStat>().unwrap(), stat);
            let json = serde_json::to_string(&stat).unwrap();
            assert_eq!(json, format!("\"{}\"", stat.label()));
        }
        assert!("rX".parse::<HistStat>().is_err());
    }

    #[test]
    fn only_requested_histograms_are_built() {
        let result = run_hist(&job(Control::Value(0.2), vec![HistStat::RcA, HistStat::Lmin])).unwrap();
        let h = result.stats.histograms.unwrap();
        assert!(h.rc_a.is_some() && h.lmin.is_some());
        assert!(h.rr_aat.is_none() && h.rc_aat.is_none());
        assert!(result.located.is_none());
        assert_eq!(h.lmin.unwrap().densities.len(), 50);
    }

    #[test]
    fn requires_a_statistic_and_a_valid_control() {
        assert!(run_hist(&job(Control::Value(0.2), vec![])).is_err());
        assert!(run_hist(&job(Control::None, vec![HistStat::RrAat])).is_err());
        assert!(run_hist(&job(Control::Value(3.0), vec![HistStat::RrAat])).is_err());
    }
}
