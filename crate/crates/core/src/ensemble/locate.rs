use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use super::point::{run_point, AatScale, PointConfig, StatFlags};
use crate::error::{Error, Result};
use crate::models::GraphModel;
use crate::stats::{RatioFamily, ReferenceConstants};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocateOptions {
    /// Ratio family whose normalized mean is matched.
    pub family: RatioFamily,
    pub max_iterations: usize,
    /// Search interval; [`default_bracket`] when absent.
    pub bracket: Option<(f64, f64)>,
    /// Fixed realizations per evaluation. When absent the count grows until
    /// the standard error is below half the tolerance.
    pub realizations: Option<usize>,
    pub max_realizations: usize,
    pub scale: AatScale,
    pub refs: ReferenceConstants,
}

impl Default for LocateOptions {
    fn default() -> Self {
        Self {
            family: RatioFamily::RrAat,
            max_iterations: 40,
            bracket: None,
            realizations: None,
            max_realizations: 1_000_000,
            scale: AatScale::Singular,
            refs: ReferenceConstants::PUBLISHED,
        }
    }
}

/// One evaluation of the bisection.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocateStep {
    pub param: f64,
    pub estimate: f64,
    pub std_err: f64,
    pub realizations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocateResult {
    pub model: GraphModel,
    pub n: usize,
    pub target: f64,
    pub tolerance: f64,
    pub param: f64,
    pub estimate: f64,
    pub std_err: f64,
    /// Bisection steps after the two bracket evaluations.
    pub iterations: usize,
    pub steps: Vec<LocateStep>,
}

/// Search interval for the control parameter: `[1e-4, 1]` for `p` and
/// `[1e-3, sqrt(2)]` for `rho`.
pub fn default_bracket(model: GraphModel) -> Result<(f64, f64)> {
    match model {
        GraphModel::Derg => Ok((1e-4, 1.0)),
        GraphModel::Drrg => Ok((1e-3, SQRT_2)),
        GraphModel::Pe | GraphModel::Rge => {
            Err(Error::Parameter(format!("{model} has no control parameter to locate")))
        }
    }
}

const PILOT_REALIZATIONS: usize = 64;

/// Finds `p` or `rho` at which the normalized mean ratio is within
/// `tolerance` of `target`, by bisection in log space.
///
/// Every evaluation reuses `seed`, so neighboring parameters are compared on
/// common random numbers. A bracket endpoint already within tolerance is
/// returned as is.
pub fn locate_parameter(
    model: GraphModel,
    n: usize,
    target: f64,
    tolerance: f64,
    seed: u64,
    options: &LocateOptions,
) -> Result<LocateResult> {
    if !(0.0..=1.0).contains(&target) {
        return Err(Error::Parameter(format!("target {target} is outside [0, 1]")));
    }
    if !(tolerance > 0.0 && tolerance.is_finite()) {
        return Err(Error::Parameter(format!("tolerance {tolerance} must be positive")));
    }
    let (mut lo, mut hi) = match options.bracket {
        Some(b) => b,
        None => default_bracket(model)?,
    };
    model.params(n, Some(lo))?.validate()?;
    model.params(n, Some(hi))?.validate()?;
    if lo >= hi {
        return Err(Error::Parameter(format!("bracket [{lo}, {hi}] is empty")));
    }

    let config = PointConfig {
        flags: StatFlags::only(options.family),
        scale: options.scale,
        refs: options.refs,
        histograms: None,
    };
    let mut realizations = options.realizations.unwrap_or(PILOT_REALIZATIONS).max(2);
    let mut steps = Vec::new();
    let mut evaluate = |x: f64, steps: &mut Vec<LocateStep>| -> Result<LocateStep> {
        loop {
            let stats = run_point(&model.params(n, Some(x))?, realizations, seed, &config)?;
            let est = stats.ratio(options.family).expect("family was requested");
            let se = est.normalized_std_err.unwrap_or(f64::INFINITY);
            let enough = se < tolerance / 2.0 || realizations >= options.max_realizations;
            if options.realizations.is_some() || enough {
                let step = LocateStep {
                    param: x,
                    estimate: est.normalized,
                    std_err: se,
                    realizations,
                };
                steps.push(step);
                return Ok(step);
            }
            let scale = (se / (tolerance / 2.0)).powi(2) * 1.25;
            let grown = (realizations as f64 * scale).ceil() as usize;
            realizations = grown.clamp(realizations + 1, options.max_realizations);
        }
    };
    let done = |step: &LocateStep, iterations: usize, steps: Vec<LocateStep>| LocateResult {
        model,
        n,
        target,
        tolerance,
        param: step.param,
        estimate: step.estimate,
        std_err: step.std_err,
        iterations,
        steps,
    };

    let at_lo = evaluate(lo, &mut steps)?;
    if (at_lo.estimate - target).abs() <= tolerance {
        return Ok(done(&at_lo, 0, steps));
    }
    let at_hi = evaluate(hi, &mut steps)?;
    if (at_hi.estimate - target).abs() <= tolerance {
        return Ok(done(&at_hi, 0, steps));
    }
    if !(at_lo.estimate < target && target < at_hi.estimate) {
        return Err(Error::Bracket {
            lo,
            hi,
            value_lo: at_lo.estimate,
            value_hi: at_hi.estimate,
            target,
        });
    }
    let mut last = at_hi;
    for iteration in 1..=options.max_iterations {
        let mid = if lo > 0.0 { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
        let step = evaluate(mid, &mut steps)?;
        if (step.estimate - target).abs() <= tolerance {
            return Ok(done(&step, iteration, steps));
        }
        if step.estimate < target {
            lo = mid;
        } else {
            hi = mid;
        }
        last = step;
    }
    Err(Error::Convergence {
        target,
        tolerance,
        iterations: options.max_iterations,
        param: last.param,
        last: last.estimate,
    })
}
