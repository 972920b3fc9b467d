use super::point::EnsembleStats;
use crate::error::{Error, Result};
use crate::stats::RatioFamily;

pub const DEFAULT_ONSET_THRESHOLD: f64 = 0.1;

/// `(k_mean, normalized mean)` pairs of the points that computed `family`,
/// sorted by mean degree.
pub fn onset_curve(points: &[EnsembleStats], family: RatioFamily) -> Vec<(f64, f64)> {
    let mut curve: Vec<(f64, f64)> = points
        .iter()
        .filter_map(|p| p.ratio(family).map(|r| (p.k_mean, r.normalized)))
        .collect();
    curve.sort_by(|a, b| a.0.total_cmp(&b.0));
    curve
}

/// Mean degree at which the normalized ratio first exceeds `threshold`,
/// linearly interpolated between the bracketing samples of `curve`
/// (`(k, rbar)` pairs in increasing `k`).
pub fn transition_onset(curve: &[(f64, f64)], threshold: f64) -> Result<f64> {
    let i = curve
        .iter()
        .position(|&(_, r)| r > threshold)
        .ok_or(Error::OnsetNotFound { threshold })?;
    if i == 0 {
        return Ok(curve[0].0);
    }
    let (k0, r0) = curve[i - 1];
    let (k1, r1) = curve[i];
    Ok(k0 + (threshold - r0) * (k1 - k0) / (r1 - r0))
}
