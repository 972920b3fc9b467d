use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{measure_degree, GraphModel, GraphModelParams, GraphSeed};
use crate::spectra::{complex_eigenvalues, min_singular_value, singular_values};
use crate::stats::{
    complex_spacing_ratios, normalize_ratio, real_line_complex_ratios, real_spacing_ratios,
    CompensatedSum, DensityHistogram, Histogram, MinSingularStats, RatioFamily, RatioSample,
    ReferenceConstants, SpectrumSource,
};

/// Which statistics a point computes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatFlags {
    #[serde(rename = "rR_AAT")]
    pub rr_aat: bool,
    #[serde(rename = "rC_AAT")]
    pub rc_aat: bool,
    #[serde(rename = "rC_A")]
    pub rc_a: bool,
    pub min_singular: bool,
}

impl StatFlags {
    pub const ALL: StatFlags = StatFlags {
        rr_aat: true,
        rc_aat: true,
        rc_a: true,
        min_singular: true,
    };
    pub const NONE: StatFlags = StatFlags {
        rr_aat: false,
        rc_aat: false,
        rc_a: false,
        min_singular: false,
    };

    /// Flags with exactly one ratio family enabled.
    pub fn only(family: RatioFamily) -> Self {
        let mut flags = Self::NONE;
        flags.set(family, true);
        flags
    }

    pub fn get(&self, family: RatioFamily) -> bool {
        match family {
            RatioFamily::RrAat => self.rr_aat,
            RatioFamily::RcAat => self.rc_aat,
            RatioFamily::RcA => self.rc_a,
        }
    }

    pub fn set(&mut self, family: RatioFamily, on: bool) {
        match family {
            RatioFamily::RrAat => self.rr_aat = on,
            RatioFamily::RcAat => self.rc_aat = on,
            RatioFamily::RcA => self.rc_a = on,
        }
    }

    pub fn any(&self) -> bool {
        self.rr_aat || self.rc_aat || self.rc_a || self.min_singular
    }

    fn any_ratio(&self) -> bool {
        self.rr_aat || self.rc_aat || self.rc_a
    }
}

impl Default for StatFlags {
    fn default() -> Self {
        Self::ALL
    }
}

/// Scale of the `A A^T` spectrum fed to the real-spectrum ratios: singular
/// values `sigma` or their squares.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AatScale {
    #[default]
    Singular,
    Squared,
}

impl std::str::FromStr for AatScale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "singular" | "sigma" => Ok(AatScale::Singular),
            "squared" | "sigma2" => Ok(AatScale::Squared),
            _ => Err(Error::Parameter(format!(
                "unknown spectrum scale '{s}' (expected singular or squared)"
            ))),
        }
    }
}

/// Histogram binning. Ratios use `[0, 1]`; `lambda_min / <lambda_min>` uses
/// `[0, lmin_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramSpec {
    pub ratio_bins: usize,
    pub lmin_bins: usize,
    pub lmin_max: f64,
}

impl Default for HistogramSpec {
    fn default() -> Self {
        Self {
            ratio_bins: 50,
            lmin_bins: 50,
            lmin_max: 8.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointConfig {
    pub flags: StatFlags,
    pub scale: AatScale,
    pub refs: ReferenceConstants,
    /// Collect histograms when set.
    pub histograms: Option<HistogramSpec>,
}

impl Default for PointConfig {
    fn default() -> Self {
        Self {
            flags: StatFlags::ALL,
            scale: AatScale::Singular,
            refs: ReferenceConstants::PUBLISHED,
            histograms: None,
        }
    }
}

/// Pooled mean of one ratio family over all matrices of a point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioEstimate {
    pub mean: f64,
    /// Standard error from the spread of per-matrix means; absent with fewer
    /// than two matrices.
    pub std_err: Option<f64>,
    pub normalized: f64,
    pub normalized_std_err: Option<f64>,
    /// Number of ratios pooled.
    pub samples: u64,
    /// Ratios skipped because of exact ties.
    pub degenerate: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PointHistograms {
    #[serde(rename = "rR_AAT")]
    pub rr_aat: Option<DensityHistogram>,
    #[serde(rename = "rC_AAT")]
    pub rc_aat: Option<DensityHistogram>,
    #[serde(rename = "rC_A")]
    pub rc_a: Option<DensityHistogram>,
    /// Density of `lambda_min / <lambda_min>`.
    pub lmin: Option<DensityHistogram>,
}

impl PointHistograms {
    pub fn ratio(&self, family: RatioFamily) -> Option<&DensityHistogram> {
        match family {
            RatioFamily::RrAat => self.rr_aat.as_ref(),
            RatioFamily::RcAat => self.rc_aat.as_ref(),
            RatioFamily::RcA => self.rc_a.as_ref(),
        }
    }
}

/// Aggregated statistics of one `(model, n, parameter)` point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub params: GraphModelParams,
    pub seed: u64,
    pub scale: AatScale,
    /// Requested realizations.
    pub realizations: usize,
    /// Realizations excluded after a generation or solver failure.
    pub failed: usize,
    /// Mean out-degree, self-loops excluded.
    pub k_mean: f64,
    pub k_std_err: Option<f64>,
    #[serde(rename = "rR_AAT")]
    pub rr_aat: Option<RatioEstimate>,
    #[serde(rename = "rC_AAT")]
    pub rc_aat: Option<RatioEstimate>,
    #[serde(rename = "rC_A")]
    pub rc_a: Option<RatioEstimate>,
    pub min_singular: Option<MinSingularStats>,
    pub histograms: Option<PointHistograms>,
}

impl EnsembleStats {
    pub fn model(&self) -> GraphModel {
        self.params.model()
    }

    pub fn n(&self) -> usize {
        self.params.n()
    }

    pub fn param(&self) -> Option<f64> {
        self.params.control()
    }

    /// Realizations that entered the statistics.
    pub fn used(&self) -> usize {
        self.realizations - self.failed
    }

    pub fn ratio(&self, family: RatioFamily) -> Option<&RatioEstimate> {
        match family {
            RatioFamily::RrAat => self.rr_aat.as_ref(),
            RatioFamily::RcAat => self.rc_aat.as_ref(),
            RatioFamily::RcA => self.rc_a.as_ref(),
        }
    }
}

/// Ratios of one matrix, reduced to what the aggregation needs.
struct RatioPart {
    sum: CompensatedSum,
    count: u64,
    degenerate: u64,
    values: Option<Vec<f64>>,
}

impl RatioPart {
    fn new(sample: RatioSample, keep_values: bool) -> Self {
        Self {
            sum: sample.values.iter().copied().collect(),
            count: sample.values.len() as u64,
            degenerate: sample.degenerate as u64,
            values: keep_values.then_some(sample.values),
        }
    }
}

struct Draw {
    k: f64,
    ratios: [Option<RatioPart>; 3],
    lmin: Option<f64>,
}

fn family_index(family: RatioFamily) -> usize {
    match family {
        RatioFamily::RrAat => 0,
        RatioFamily::RcAat => 1,
        RatioFamily::RcA => 2,
    }
}

fn realize(params: &GraphModelParams, seed: GraphSeed, config: &PointConfig) -> Result<Draw> {
    let graph = params.generate(seed)?;
    let a = &graph.adjacency;
    let flags = config.flags;
    let keep = config.histograms.is_some();
    let mut ratios = [None, None, None];
    let mut lmin = None;

    if flags.rr_aat || flags.rc_aat {
        let spectrum = singular_values(a, config.scale == AatScale::Squared)?;
        if flags.rr_aat {
            let sample = real_spacing_ratios(&spectrum.values, SpectrumSource::SpectrumOfAat)?;
            ratios[0] = Some(RatioPart::new(sample, keep));
        }
        if flags.rc_aat {
            let sample = real_line_complex_ratios(&spectrum.values, SpectrumSource::SpectrumOfAat)?;
            ratios[1] = Some(RatioPart::new(sample, keep));
        }
        lmin = spectrum.min_singular();
    }
    if flags.rc_a {
        let eigenvalues = complex_eigenvalues(a)?;
        let sample = complex_spacing_ratios(&eigenvalues.values, SpectrumSource::SpectrumOfA)?;
        ratios[2] = Some(RatioPart::new(sample, keep));
    }
    let lmin = if flags.min_singular {
        Some(match lmin {
            Some(x) => x,
            None => min_singular_value(a)?,
        })
    } else {
        None
    };
    Ok(Draw {
        k: measure_degree(&graph),
        ratios,
        lmin,
    })
}

struct RatioAccumulator {
    sum: CompensatedSum,
    count: u64,
    degenerate: u64,
    matrix_means: CompensatedSum,
    matrix_means_sq: CompensatedSum,
    matrices: u64,
    histogram: Option<Histogram>,
}

impl RatioAccumulator {
    fn new(bins: Option<usize>) -> Result<Self> {
        Ok(Self {
            sum: CompensatedSum::new(),
            count: 0,
            degenerate: 0,
            matrix_means: CompensatedSum::new(),
            matrix_means_sq: CompensatedSum::new(),
            matrices: 0,
            histogram: bins.map(|b| Histogram::new(0.0, 1.0, b)).transpose()?,
        })
    }

    fn add(&mut self, part: RatioPart) {
        self.degenerate += part.degenerate;
        if part.count == 0 {
            return;
        }
        self.sum.merge(&part.sum);
        self.count += part.count;
        let m = part.sum.value() / part.count as f64;
        self.matrix_means.add(m);
        self.matrix_means_sq.add(m * m);
        self.matrices += 1;
        if let (Some(h), Some(values)) = (self.histogram.as_mut(), part.values) {
            h.fill_all(values);
        }
    }

    fn finish(self, family: RatioFamily, refs: &ReferenceConstants) -> Result<(RatioEstimate, Option<DensityHistogram>)> {
        if self.count == 0 {
            return Err(Error::Numerical(format!(
                "no valid {} ratios ({} degenerate)",
                family.label(),
                self.degenerate
            )));
        }
        let mean = self.sum.value() / self.count as f64;
        let std_err = std_error(&self.matrix_means, &self.matrix_means_sq, self.matrices);
        let (pe, rge) = refs.endpoints(family);
        let estimate = RatioEstimate {
            mean,
            std_err,
            normalized: normalize_ratio(mean, family, refs)?,
            normalized_std_err: std_err.map(|s| s / (rge - pe).abs()),
            samples: self.count,
            degenerate: self.degenerate,
        };
        let density = self.histogram.map(|h| h.to_density()).transpose()?;
        Ok((estimate, density))
    }
}

/// Standard error of the mean from running sums of `x` and `x^2`.
fn std_error(sum: &CompensatedSum, sum_sq: &CompensatedSum, count: u64) -> Option<f64> {
    if count < 2 {
        return None;
    }
    let c = count as f64;
    let mean = sum.value() / c;
    let var = ((sum_sq.value() - c * mean * mean) / (c - 1.0)).max(0.0);
    Some((var / c).sqrt())
}

/// Realizations computed in parallel before each ordered merge.
const BLOCK: usize = 512;

/// Generates `realizations` graphs from `params`, realization `i` on stream
/// `i` of `seed`, and aggregates the statistics selected in `config`.
///
/// Failed realizations are excluded and counted; the point aborts when more
/// than 0.1% of them fail.
pub fn run_point(
    params: &GraphModelParams,
    realizations: usize,
    seed: u64,
    config: &PointConfig,
) -> Result<EnsembleStats> {
    params.validate()?;
    config.refs.validate()?;
    if realizations == 0 {
        return Err(Error::Parameter("realizations must be at least 1".into()));
    }
    if !config.flags.any() {
        return Err(Error::Parameter("no statistics selected".into()));
    }
    if config.flags.any_ratio() && params.n() < 3 {
        return Err(Error::Parameter(format!(
            "spacing ratios need n >= 3, got n = {}",
            params.n()
        )));
    }
    let spec = config.histograms;
    if let Some(h) = spec {
        if h.ratio_bins == 0 || h.lmin_bins == 0 || !(h.lmin_max.is_finite() && h.lmin_max > 0.0) {
            return Err(Error::Parameter(format!("invalid histogram binning {h:?}")));
        }
    }

    let ratio_bins = spec.map(|h| h.ratio_bins);
    let mut accumulators = [
        RatioAccumulator::new(ratio_bins)?,
        RatioAccumulator::new(ratio_bins)?,
        RatioAccumulator::new(ratio_bins)?,
    ];
    let mut k_sum = CompensatedSum::new();
    let mut k_sum_sq = CompensatedSum::new();
    let mut minima = Vec::new();
    let mut failed = 0usize;
    let mut first_failure: Option<Error> = None;

    let mut start = 0;
    while start < realizations {
        let end = (start + BLOCK).min(realizations);
        let draws: Vec<Result<Draw>> = (start..end)
            .into_par_iter()
            .map(|i| {
                realize(params, GraphSeed::new(seed, i as u64), config).map_err(|e| Error::Realization {
                    seed,
                    index: i as u64,
                    params: params.to_string(),
                    source: Box::new(e),
                })
            })
            .collect();
        for draw in draws {
            let draw = match draw {
                Ok(d) => d,
                Err(e) => {
                    failed += 1;
                    first_failure.get_or_insert(e);
                    continue;
                }
            };
            k_sum.add(draw.k);
            k_sum_sq.add(draw.k * draw.k);
            for (acc, part) in accumulators.iter_mut().zip(draw.ratios) {
                if let Some(part) = part {
                    acc.add(part);
                }
            }
            if let Some(x) = draw.lmin {
                minima.push(x);
            }
        }
        start = end;
    }

    if let Some(first) = first_failure {
        if failed * 1000 > realizations {
            return Err(Error::TooManyFailures {
                failed,
                total: realizations,
                first: Box::new(first),
            });
        }
    }

    let used = (realizations - failed) as u64;
    let mut estimates = [None, None, None];
    let mut densities = [None, None, None];
    for (family, acc) in RatioFamily::ALL.into_iter().zip(accumulators) {
        if config.flags.get(family) {
            let (estimate, density) = acc.finish(family, &config.refs)?;
            estimates[family_index(family)] = Some(estimate);
            densities[family_index(family)] = density;
        }
    }
    let min_singular = if config.flags.min_singular {
        Some(MinSingularStats::from_samples(&minima)?)
    } else {
        None
    };
    let histograms = match spec {
        Some(h) => {
            let lmin = match min_singular {
                Some(stats) => {
                    let mut hist = Histogram::new(0.0, h.lmin_max, h.lmin_bins)?;
                    hist.fill_all(minima.iter().map(|x| x / stats.mean));
                    Some(hist.to_density()?)
                }
                None => None,
            };
            let [rr_aat, rc_aat, rc_a] = densities;
            Some(PointHistograms {
                rr_aat,
                rc_aat,
                rc_a,
                lmin,
            })
        }
        None => None,
    };
    let [rr_aat, rc_aat, rc_a] = estimates;
    Ok(EnsembleStats {
        params: *params,
        seed,
        scale: config.scale,
        realizations,
        failed,
        k_mean: k_sum.value() / used as f64,
        k_std_err: std_error(&k_sum, &k_sum_sq, used),
        rr_aat,
        rc_aat,
        rc_a,
        min_singular,
        histograms,
    })
}
