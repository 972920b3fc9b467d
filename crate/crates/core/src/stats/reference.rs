//! Poisson-ensemble and real-Ginibre reference means used to normalize ratios.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which averaged ratio is being normalized, and against which pair of
/// reference ensembles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RatioFamily {
    /// `r_R` of the singular spectrum; endpoints (PE)(PE)^T and (RGE)(RGE)^T.
    #[serde(rename = "rR_AAT")]
    RrAat,
    /// `r_C` of the singular spectrum; endpoints (PE)(PE)^T and (RGE)(RGE)^T.
    #[serde(rename = "rC_AAT")]
    RcAat,
    /// `r_C` of the eigenvalues of `A`; endpoints PE and RGE.
    #[serde(rename = "rC_A")]
    RcA,
}

impl RatioFamily {
    pub const ALL: [RatioFamily; 3] = [RatioFamily::RrAat, RatioFamily::RcAat, RatioFamily::RcA];

    pub fn label(self) -> &'static str {
        match self {
            RatioFamily::RrAat => "rR_AAT",
            RatioFamily::RcAat => "rC_AAT",
            RatioFamily::RcA => "rC_A",
        }
    }
}

impl std::str::FromStr for RatioFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RatioFamily::ALL
            .into_iter()
            .find(|f| f.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::Parameter(format!("unknown ratio family '{s}' (expected rR_AAT, rC_AAT or rC_A)"))
            })
    }
}

/// Reference ensemble averages of the spacing ratios.
///
/// The defaults are the published values obtained from 1000 matrices of size
/// 1000; [`crate::ensemble::calibrate_references`] recomputes them.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ReferenceConstants {
    #[serde(rename = "rR_PEPET")]
    pub rr_pe_pet: f64,
    #[serde(rename = "rR_RGERGET")]
    pub rr_rge_rget: f64,
    #[serde(rename = "rC_PE")]
    pub rc_pe: f64,
    #[serde(rename = "rC_PEPET")]
    pub rc_pe_pet: f64,
    #[serde(rename = "rC_RGE")]
    pub rc_rge: f64,
    #[serde(rename = "rC_RGERGET")]
    pub rc_rge_rget: f64,
}

impl Default for ReferenceConstants {
    fn default() -> Self {
        Self::PUBLISHED
    }
}

impl ReferenceConstants {
    pub const PUBLISHED: ReferenceConstants = ReferenceConstants {
        rr_pe_pet: 0.386,
        rr_rge_rget: 0.531,
        rc_pe: 0.500,
        rc_pe_pet: 0.500,
        rc_rge: 0.737,
        rc_rge_rget: 0.569,
    };

    /// `(PE-side, RGE-side)` reference means for a ratio family.
    pub fn endpoints(&self, family: RatioFamily) -> (f64, f64) {
        match family {
            RatioFamily::RrAat => (self.rr_pe_pet, self.rr_rge_rget),
            RatioFamily::RcAat => (self.rc_pe_pet, self.rc_rge_rget),
            RatioFamily::RcA => (self.rc_pe, self.rc_rge),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.rr_pe_pet,
            self.rr_rge_rget,
            self.rc_pe,
            self.rc_pe_pet,
            self.rc_rge,
            self.rc_rge_rget,
        ];
        if let Some(bad) = all.iter().find(|v| !(v.is_finite() && **v > 0.0 && **v < 1.0)) {
            return Err(Error::Parameter(format!("reference constant {bad} is outside (0, 1)")));
        }
        for family in RatioFamily::ALL {
            let (pe, rge) = self.endpoints(family);
            if rge <= pe {
                return Err(Error::Parameter(format!(
                    "{} reference: RGE value {rge} must exceed PE value {pe}",
                    family.label()
                )));
            }
        }
        Ok(())
    }
}

/// Maps a raw mean ratio onto the PE -> RGE scale: `(raw - pe) / (rge - pe)`.
/// Not clamped.
pub fn normalize_ratio(raw_mean: f64, family: RatioFamily, refs: &ReferenceConstants) -> Result<f64> {
    let (pe, rge) = refs.endpoints(family);
    let span = rge - pe;
    if span == 0.0 {
        return Err(Error::DegenerateNormalization { pe, rge });
    }
    Ok((raw_mean - pe) / span)
}
