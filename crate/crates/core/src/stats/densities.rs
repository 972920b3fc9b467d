//! Closed-form reference densities.

use crate::error::{Error, Result};

/// Mean of the Poisson spacing-ratio density, `2 ln 2 - 1`.
pub const PE_RATIO_MEAN: f64 = 2.0 * std::f64::consts::LN_2 - 1.0;

/// Mean of the GOE surmise for the spacing ratio, `4 - 2 sqrt(3)`.
pub const GOE_RATIO_MEAN: f64 = 0.535_898_384_862_245_4;

fn check_unit(r: f64) -> Result<()> {
    if (0.0..=1.0).contains(&r) {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "r",
            value: r,
            domain: "[0, 1]",
        })
    }
}

/// Spacing-ratio density for uncorrelated levels, `2 / (1 + r)^2`.
pub fn pdf_pe_ratio(r: f64) -> Result<f64> {
    check_unit(r)?;
    Ok(2.0 / ((1.0 + r) * (1.0 + r)))
}

/// GOE surmise for the spacing ratio, `(27/4) (r + r^2) / (1 + r + r^2)^(5/2)`.
pub fn pdf_goe_ratio(r: f64) -> Result<f64> {
    check_unit(r)?;
    let q = 1.0 + r + r * r;
    Ok(6.75 * (r + r * r) / (q * q * q.sqrt()))
}

/// Density of `lambda_min / <lambda_min>` for the Poisson ensemble, `exp(-x)`.
pub fn pdf_pe_min_singular(x: f64) -> Result<f64> {
    if x >= 0.0 {
        Ok((-x).exp())
    } else {
        Err(Error::Domain {
            what: "x",
            value: x,
            domain: "[0, inf)",
        })
    }
}
