use serde::{Deserialize, Serialize};

use super::point::{run_point, AatScale, EnsembleStats, PointConfig, StatFlags};
use crate::error::{Error, Result};
use crate::models::{derive_seed, GraphModelParams};
use crate::stats::{RatioFamily, ReferenceConstants};

/// Below this size the ratio endpoints carry visible finite-size bias.
pub const SMALL_N_THRESHOLD: usize = 50;

/// Reference constants measured on fresh PE and RGE ensembles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub n: usize,
    pub realizations: usize,
    pub seed: u64,
    pub scale: AatScale,
    pub constants: ReferenceConstants,
    /// Standard errors, keyed like `constants`.
    pub std_errors: ReferenceConstants,
    pub small_n_warning: bool,
    pub pe: EnsembleStats,
    pub rge: EnsembleStats,
}

/// Measures all six reference means from `realizations` PE and RGE matrices
/// of size `n`. The PE ensemble uses seed `derive_seed(seed, 0)` and the RGE
/// ensemble `derive_seed(seed, 1)`.
pub fn calibrate_references(n: usize, realizations: usize, seed: u64, scale: AatScale) -> Result<Calibration> {
    if realizations < 2 {
        return Err(Error::Parameter(
            "calibration needs at least 2 realizations for standard errors".into(),
        ));
    }
    let config = PointConfig {
        flags: StatFlags {
            min_singular: false,
            ..StatFlags::ALL
        },
        scale,
        ..PointConfig::default()
    };
    let pe = run_point(&GraphModelParams::Pe { n }, realizations, derive_seed(seed, 0), &config)?;
    let rge = run_point(&GraphModelParams::Rge { n }, realizations, derive_seed(seed, 1), &config)?;
    let pick = |stats: &EnsembleStats, family: RatioFamily| -> Result<(f64, f64)> {
        let est = stats
            .ratio(family)
            .ok_or_else(|| Error::Numerical(format!("{} missing from calibration run", family.label())))?;
        Ok((est.mean, est.std_err.unwrap_or_default()))
    };
    let (rr_pe, rr_pe_se) = pick(&pe, RatioFamily::RrAat)?;
    let (rr_rge, rr_rge_se) = pick(&rge, RatioFamily::RrAat)?;
    let (rc_pe_aat, rc_pe_aat_se) = pick(&pe, RatioFamily::RcAat)?;
    let (rc_rge_aat, rc_rge_aat_se) = pick(&rge, RatioFamily::RcAat)?;
    let (rc_pe, rc_pe_se) = pick(&pe, RatioFamily::RcA)?;
    let (rc_rge, rc_rge_se) = pick(&rge, RatioFamily::RcA)?;
    Ok(Calibration {
        n,
        realizations,
        seed,
        scale,
        constants: ReferenceConstants {
            rr_pe_pet: rr_pe,
            rr_rge_rget: rr_rge,
            rc_pe,
            rc_pe_pet: rc_pe_aat,
            rc_rge,
            rc_rge_rget: rc_rge_aat,
        },
        std_errors: ReferenceConstants {
            rr_pe_pet: rr_pe_se,
            rr_rge_rget: rr_rge_se,
            rc_pe: rc_pe_se,
            rc_pe_pet: rc_pe_aat_se,
            rc_rge: rc_rge_se,
            rc_rge_rget: rc_rge_aat_se,
        },
        small_n_warning: n < SMALL_N_THRESHOLD,
        pe,
        rge,
    })
}
