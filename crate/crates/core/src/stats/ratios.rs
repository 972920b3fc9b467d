//! Spacing ratios of real and complex spectra.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum RatioKind {
    /// Ratio of adjacent gaps in an ordered real spectrum.
    RealRatio,
    /// Nearest over next-nearest neighbor distance in the complex plane.
    ComplexRatio,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumSource {
    SpectrumOfA,
    SpectrumOfAat,
}

/// Spacing ratios computed from one spectrum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioSample {
    pub kind: RatioKind,
    pub source: SpectrumSource,
    /// Ratios, each in `[0, 1]`.
    pub values: Vec<f64>,
    /// Ratios skipped because both distances were exactly zero.
    pub degenerate: usize,
}

impl RatioSample {
    pub fn mean(&self) -> Option<f64> {
        (!self.values.is_empty()).then(|| self.values.iter().sum::<f64>() / self.values.len() as f64)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(["r"])?;
        for r in &self.values {
            out.serialize([r])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// `r_k = min(s_k, s_{k-1}) / max(s_k, s_{k-1})` over the adjacent gaps of the
/// spectrum sorted descending. Yields `n - 2` ratios; a ratio whose two gaps
/// are both zero is skipped and tallied.
pub fn real_spacing_ratios(spectrum: &[f64], source: SpectrumSource) -> Result<RatioSample> {
    if spectrum.len() < 3 {
        return Err(Error::Input(format!(
            "need at least 3 values for spacing ratios, got {}",
            spectrum.len()
        )));
    }
    if let Some(bad) = spectrum.iter().find(|x| !x.is_finite()) {
        return Err(Error::Input(format!("non-finite spectrum value {bad}")));
    }
    let sorted_desc = spectrum.windows(2).all(|w| w[0] >= w[1]);
    let owned;
    let levels = if sorted_desc {
        spectrum
    } else {
        let mut v = spectrum.to_vec();
        v.sort_unstable_by(|x, y| y.total_cmp(x));
        owned = v;
        &owned
    };
    let mut values = Vec::with_capacity(levels.len() - 2);
    let mut degenerate = 0;
    for w in levels.windows(3) {
        let upper = w[0] - w[1];
        let lower = w[1] - w[2];
        let (small, large) = if upper < lower { (upper, lower) } else { (lower, upper) };
        if large == 0.0 {
            degenerate += 1;
        } else {
            values.push(small / large);
        }
    }
    Ok(RatioSample {
        kind: RatioKind::RealRatio,
        source,
        values,
        degenerate,
    })
}

fn ratio_from_two_nearest(nearest: f64, next: f64, values: &mut Vec<f64>, degenerate: &mut usize) {
    if next == 0.0 {
        *degenerate += 1;
    } else {
        values.push(nearest / next);
    }
}

/// `r_k = |z_NN - z_k| / |z_NNN - z_k|` for every point of the spectrum, by
/// exhaustive search over all other points. Points whose next-nearest
/// neighbor coincides with them are skipped and tallied.
pub fn complex_spacing_ratios(spectrum: &[Complex64], source: SpectrumSource) -> Result<RatioSample> {
    if spectrum.len() < 3 {
        return Err(Error::Input(format!(
            "need at least 3 points for complex spacing ratios, got {}",
            spectrum.len()
        )));
    }
    if spectrum.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Input("non-finite eigenvalue".into()));
    }
    let mut values = Vec::with_capacity(spectrum.len());
    let mut degenerate = 0;
    for (k, &z) in spectrum.iter().enumerate() {
        let mut nearest = f64::INFINITY;
        let mut next = f64::INFINITY;
        for (j, &w) in spectrum.iter().enumerate() {
            if j == k {
                continue;
            }
            let d = (w - z).norm();
            if d < nearest {
                next = nearest;
                nearest = d;
            } else if d < next {
                next = d;
            }
        }
        ratio_from_two_nearest(nearest, next, &mut values, &mut degenerate);
    }
    Ok(RatioSample {
        kind: RatioKind::ComplexRatio,
        source,
        values,
        degenerate,
    })
}

/// Complex spacing ratios of points on the real line.
///
/// Gives the same ratios as [`complex_spacing_ratios`] on the embedded points
/// (in sorted order rather than input order) in `O(n log n)`: after sorting,
/// the two nearest neighbors of a point are among its two left and two
/// right neighbors.
pub fn real_line_complex_ratios(spectrum: &[f64], source: SpectrumSource) -> Result<RatioSample> {
    if spectrum.len() < 3 {
        return Err(Error::Input(format!(
            "need at least 3 points for complex spacing ratios, got {}",
            spectrum.len()
        )));
    }
    if let Some(bad) = spectrum.iter().find(|x| !x.is_finite()) {
        return Err(Error::Input(format!("non-finite spectrum value {bad}")));
    }
    let mut x = spectrum.to_vec();
    x.sort_unstable_by(f64::total_cmp);
    let n = x.len();
    let mut values = Vec::with_capacity(n);
    let mut degenerate = 0;
    for k in 0..n {
        let mut candidates = [f64::INFINITY; 4];
        let mut m = 0;
        for j in k.saturating_sub(2)..(k + 3).min(n) {
            if j != k {
                // Same expression as the complex path: |(x_j + 0i) - (x_k + 0i)|.
                candidates[m] = (Complex64::new(x[j], 0.0) - Complex64::new(x[k], 0.0)).norm();
                m += 1;
            }
        }
        let mut nearest = f64::INFINITY;
        let mut next = f64::INFINITY;
        for &d in &candidates[..m] {
            if d < nearest {
                next = nearest;
                nearest = d;
            } else if d < next {
                next = d;
            }
        }
        ratio_from_two_nearest(nearest, next, &mut values, &mut degenerate);
    }
    Ok(RatioSample {
        kind: RatioKind::ComplexRatio,
        source,
        values,
        degenerate,
    })
}
