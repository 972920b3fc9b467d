//! Fixed-range histograms normalized to probability densities.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Raw counts over `bins` equal-width bins covering the closed range
/// `[lo, hi]`. Values outside the range (and NaN) are tallied separately.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    lo: f64,
    hi: f64,
    counts: Vec<u64>,
    out_of_range: u64,
}

impl Histogram {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::Parameter("histogram needs at least one bin".into()));
        }
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::Parameter(format!("histogram range [{lo}, {hi}] is empty")));
        }
        Ok(Self {
            lo,
            hi,
            counts: vec![0; bins],
            out_of_range: 0,
        })
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn range(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn bin_width(&self) -> f64 {
        (self.hi - self.lo) / self.bins() as f64
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn in_range(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn out_of_range(&self) -> u64 {
        self.out_of_range
    }

    pub fn fill(&mut self, x: f64) {
        if !(x >= self.lo && x <= self.hi) {
            self.out_of_range += 1;
            return;
        }
        let idx = ((x - self.lo) / self.bin_width()) as usize;
        let last = self.counts.len() - 1;
        self.counts[idx.min(last)] += 1;
    }

    pub fn fill_all<I: IntoIterator<Item = f64>>(&mut self, values: I) {
        for x in values {
            self.fill(x);
        }
    }

    /// Adds the counts of a histogram with identical binning.
    pub fn merge(&mut self, other: &Histogram) -> Result<()> {
        if self.lo != other.lo || self.hi != other.hi || self.bins() != other.bins() {
            return Err(Error::Input("cannot merge histograms with different binning".into()));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.out_of_range += other.out_of_range;
        Ok(())
    }

    pub fn to_density(&self) -> Result<DensityHistogram> {
        let in_range = self.in_range();
        if in_range == 0 {
            return Err(Error::Input(format!(
                "no values inside [{}, {}] to build a density",
                self.lo, self.hi
            )));
        }
        let width = self.bin_width();
        let norm = in_range as f64 * width;
        Ok(DensityHistogram {
            lo: self.lo,
            hi: self.hi,
            bin_width: width,
            centers: (0..self.bins())
                .map(|i| self.lo + (i as f64 + 0.5) * width)
                .collect(),
            densities: self.counts.iter().map(|&c| c as f64 / norm).collect(),
            in_range,
            out_of_range: self.out_of_range,
        })
    }
}

/// Histogram normalized so that `sum(density * bin_width) = 1` over the
/// in-range values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityHistogram {
    pub lo: f64,
    pub hi: f64,
    pub bin_width: f64,
    pub centers: Vec<f64>,
    pub densities: Vec<f64>,
    pub in_range: u64,
    pub out_of_range: u64,
}

const BIN_QUADRATURE_INTERVALS: usize = 32;

impl DensityHistogram {
    /// Largest `|density - mean of pdf over the bin|` across bins. Bin means
    /// use composite Simpson quadrature.
    pub fn max_abs_deviation<F: Fn(f64) -> f64>(&self, pdf: F) -> f64 {
        let m = BIN_QUADRATURE_INTERVALS;
        self.centers
            .iter()
            .zip(&self.densities)
            .map(|(&c, &d)| {
                let a = c - 0.5 * self.bin_width;
                let h = self.bin_width / m as f64;
                let mut acc = pdf(a) + pdf(a + self.bin_width);
                for k in 1..m {
                    acc += if k % 2 == 1 { 4.0 } else { 2.0 } * pdf(a + k as f64 * h);
                }
                let mean = acc * h / 3.0 / self.bin_width;
                (d - mean).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Largest pairwise density difference against a histogram with the same
    /// binning.
    pub fn max_abs_difference(&self, other: &DensityHistogram) -> Result<f64> {
        if self.centers.len() != other.centers.len() || self.lo != other.lo || self.hi != other.hi {
            return Err(Error::Input("histograms have different binning".into()));
        }
        Ok(self
            .densities
            .iter()
            .zip(&other.densities)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// `bin_center,density` rows.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        self.write_csv_with_overlays(writer, &[])
    }

    /// `bin_center,density,<overlay...>` rows, each overlay evaluated at the
    /// bin centers.
    pub fn write_csv_with_overlays<W: Write>(
        &self,
        writer: W,
        overlays: &[(&str, &dyn Fn(f64) -> f64)],
    ) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        let mut header = vec!["bin_center", "density"];
        header.extend(overlays.iter().map(|(name, _)| *name));
        out.write_record(&header)?;
        for (&c, &d) in self.centers.iter().zip(&self.densities) {
            let mut row = vec![c.to_string(), d.to_string()];
            row.extend(overlays.iter().map(|(_, f)| f(c).to_string()));
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Density histogram of `values` on `[lo, hi]` with `bins` bins.
pub fn histogram(values: &[f64], lo: f64, hi: f64, bins: usize) -> Result<DensityHistogram> {
    let mut h = Histogram::new(lo, hi, bins)?;
    h.fill_all(values.iter().copied());
    h.to_density()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::densities::pdf_pe_ratio;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn uniform_grid_is_flat() {
        let values: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        let h = histogram(&values, 0.0, 1.0, 10).unwrap();
        assert!(h.densities.iter().all(|&d| d == 1.0), "{:?}", h.densities);
        assert_eq!(h.out_of_range, 0);
    }

    #[test]
    fn repeated_value_fills_one_bin() {
        let h = histogram(&[0.33; 17], 0.0, 1.0, 10).unwrap();
        assert!((h.densities[3] - 1.0 / 0.1).abs() < 1e-12);
        assert_eq!(h.densities.iter().filter(|&&d| d > 0.0).count(), 1);
    }

    #[test]
    fn upper_edge_is_inclusive_and_outliers_are_tallied() {
        let h = histogram(&[1.0, 0.0, -0.5, 2.0, f64::NAN], 0.0, 1.0, 4).unwrap();
        assert_eq!(h.in_range, 2);
        assert_eq!(h.out_of_range, 3);
        assert!(h.densities[3] > 0.0 && h.densities[0] > 0.0);
    }

    #[test]
    fn errors() {
        assert!(histogram(&[5.0], 0.0, 1.0, 10).is_err());
        assert!(histogram(&[], 0.0, 1.0, 10).is_err());
        assert!(Histogram::new(0.0, 1.0, 0).is_err());
        assert!(Histogram::new(1.0, 1.0, 3).is_err());
        let mut a = Histogram::new(0.0, 1.0, 3).unwrap();
        let b = Histogram::new(0.0, 2.0, 3).unwrap();
        assert!(a.merge(&b).is_err());
    }

    #[test]
    fn inverse_cdf_samples_match_pe_density() {
        // CDF 2r / (1 + r) inverts to r = F / (2 - F).
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let values: Vec<f64> = (0..1_000_000)
            .map(|_| {
                let f: f64 = rng.random();
                f / (2.0 - f)
            })
            .collect();
        // 20 bins keep the per-bin standard error near r = 0 at about 0.006.
        let h = histogram(&values, 0.0, 1.0, 20).unwrap();
        let dev = h.max_abs_deviation(|r| pdf_pe_ratio(r).unwrap());
        assert!(dev < 0.03, "max deviation {dev}");
        let at_centers = h
            .centers
            .iter()
            .zip(&h.densities)
            .map(|(&c, &d)| (d - pdf_pe_ratio(c).unwrap()).abs())
            .fold(0.0, f64::max);
        assert!(at_centers < 0.03, "center deviation {at_centers}");
    }

    #[test]
    fn csv_layout() {
        let h = histogram(&[0.25, 0.75], 0.0, 1.0, 2).unwrap();
        let mut buf = Vec::new();
        h.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "bin_center,density\n0.25,1\n0.75,1\n");
        let mut buf = Vec::new();
        h.write_csv_with_overlays(&mut buf, &[("twice", &|x| 2.0 * x)]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "bin_center,density,twice\n0.25,1,0.5\n0.75,1,1.5\n"
        );
    }

    proptest! {
        #[test]
        fn densities_integrate_to_one(
            xs in prop::collection::vec(-0.5f64..1.5, 1..500),
            bins in 1usize..80,
        ) {
            prop_assume!(xs.iter().any(|x| (0.0..=1.0).contains(x)));
            let h = histogram(&xs, 0.0, 1.0, bins).unwrap();
            let total: f64 = h.densities.iter().map(|d| d * h.bin_width).sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
            prop_assert_eq!(h.in_range + h.out_of_range, xs.len() as u64);
        }

        #[test]
        fn merge_equals_joint_fill(
            xs in prop::collection::vec(0f64..1.0, 0..100),
            ys in prop::collection::vec(0f64..1.0, 0..100),
        ) {
            let mut a = Histogram::new(0.0, 1.0, 7).unwrap();
            a.fill_all(xs.iter().copied());
            let mut b = Histogram::new(0.0, 1.0, 7).unwrap();
            b.fill_all(ys.iter().copied());
            a.merge(&b).unwrap();
            let mut joint = Histogram::new(0.0, 1.0, 7).unwrap();
            joint.fill_all(xs.iter().chain(&ys).copied());
            prop_assert_eq!(a, joint);
        }
    }
}
