use serde::{Deserialize, Serialize};

use super::summation::CompensatedSum;
use crate::error::{Error, Result};

/// First two moments of a sample of minimum singular values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinSingularStats {
    /// `<lambda_min>`
    pub mean: f64,
    /// `<lambda_min^2>`
    pub mean_sq: f64,
    /// `<lambda_min^2> / <lambda_min>^2`; at least 1 by Cauchy-Schwarz.
    pub moment_ratio: f64,
    pub count: usize,
}

impl MinSingularStats {
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Input("no minimum singular values".into()));
        }
        if let Some(bad) = samples.iter().find(|x| !(**x >= 0.0 && x.is_finite())) {
            return Err(Error::Input(format!("invalid minimum singular value {bad}")));
        }
        let sum: CompensatedSum = samples.iter().copied().collect();
        let sum_sq: CompensatedSum = samples.iter().map(|x| x * x).collect();
        let count = samples.len();
        let mean = sum.value() / count as f64;
        let mean_sq = sum_sq.value() / count as f64;
        if mean == 0.0 {
            return Err(Error::DegenerateRatio);
        }
        Ok(Self {
            mean,
            mean_sq,
            moment_ratio: mean_sq / (mean * mean),
            count,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::Exp1;

    #[test]
    fn arithmetic_examples() {
        let s = MinSingularStats::from_samples(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(s.moment_ratio, 1.0);
        let s = MinSingularStats::from_samples(&[1.0, 3.0]).unwrap();
        assert_eq!((s.mean, s.mean_sq, s.moment_ratio, s.count), (2.0, 5.0, 1.25, 2));
    }

    #[test]
    fn errors() {
        assert!(matches!(MinSingularStats::from_samples(&[]), Err(Error::Input(_))));
        assert!(matches!(MinSingularStats::from_samples(&[0.0, 0.0]), Err(Error::DegenerateRatio)));
        assert!(MinSingularStats::from_samples(&[-1.0]).is_err());
    }

    #[test]
    fn exponential_sample_has_moment_ratio_two() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let xs: Vec<f64> = (0..1_000_000).map(|_| rng.sample(Exp1)).collect();
        let s = MinSingularStats::from_samples(&xs).unwrap();
        assert!((s.moment_ratio - 2.0).abs() < 0.01, "{}", s.moment_ratio);
    }

    proptest! {
        #[test]
        fn moment_ratio_at_least_one(xs in prop::collection::vec(1e-6f64..1e6, 1..200)) {
            let s = MinSingularStats::from_samples(&xs).unwrap();
            prop_assert!(s.moment_ratio >= 1.0 - 1e-12);
        }
    }
}
