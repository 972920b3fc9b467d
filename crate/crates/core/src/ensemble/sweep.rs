use serde::{Deserialize, Serialize};

use super::point::{run_point, EnsembleStats, PointConfig};
use crate::error::{Error, Result};
use crate::models::{derive_seed, GraphModel, GraphModelParams};

/// Realizations per grid point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Budget {
    /// A fixed number of matrices at every point.
    Realizations(usize),
    /// About this many samples per point: `ceil(total / n)` matrices, so a
    /// budget of `10^6` gives roughly `10^6` ratios or `10^6 / n` minima.
    Ratios(u64),
}

impl Budget {
    pub fn realizations(&self, n: usize) -> usize {
        match *self {
            Budget::Realizations(r) => r,
            Budget::Ratios(total) => (total.div_ceil(n.max(1) as u64) as usize).max(1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub model: GraphModel,
    pub n_list: Vec<usize>,
    /// Values of `p` or `rho`; must be empty for the parameterless PE and RGE.
    pub param_grid: Vec<f64>,
    pub budget: Budget,
    pub master_seed: u64,
    pub config: PointConfig,
}

impl SweepSpec {
    /// The grid points in output order, `(n, param)` ascending, each with its
    /// realization count and derived seed.
    pub fn points(&self) -> Result<Vec<(GraphModelParams, usize, u64)>> {
        if self.n_list.is_empty() {
            return Err(Error::Parameter("sweep needs at least one graph size".into()));
        }
        if self.budget.realizations(1) == 0 {
            return Err(Error::Parameter("realizations must be at least 1".into()));
        }
        let has_control = self.model.control_name().is_some();
        if has_control && self.param_grid.is_empty() {
            return Err(Error::Parameter(format!(
                "{} sweep needs a {} grid",
                self.model,
                self.model.control_name().unwrap_or_default()
            )));
        }
        if !has_control && !self.param_grid.is_empty() {
            return Err(Error::Parameter(format!("{} takes no control parameter", self.model)));
        }
        let mut sizes = self.n_list.clone();
        sizes.sort_unstable();
        let mut grid = self.param_grid.clone();
        grid.sort_by(f64::total_cmp);
        let controls: Vec<Option<f64>> = if has_control {
            grid.into_iter().map(Some).collect()
        } else {
            vec![None]
        };
        let mut points = Vec::with_capacity(sizes.len() * controls.len());
        for &n in &sizes {
            for &control in &controls {
                let params = self.model.params(n, control)?;
                params.validate()?;
                let index = points.len() as u64;
                points.push((params, self.budget.realizations(n), derive_seed(self.master_seed, index)));
            }
        }
        Ok(points)
    }
}

/// A grid point that could not be computed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointFailure {
    pub params: GraphModelParams,
    pub seed: u64,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub points: Vec<EnsembleStats>,
    pub errors: Vec<PointFailure>,
}

/// Runs every grid point of `spec`. Point `i` (in `(n, param)` order) uses
/// master seed `derive_seed(spec.master_seed, i)`. A failing point is
/// recorded and the sweep continues.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    let points = spec.points()?;
    let mut result = SweepResult {
        points: Vec::with_capacity(points.len()),
        errors: Vec::new(),
    };
    for (params, realizations, seed) in points {
        match run_point(&params, realizations, seed, &spec.config) {
            Ok(stats) => result.points.push(stats),
            Err(e) => result.errors.push(PointFailure {
                params,
                seed,
                message: e.to_string(),
            }),
        }
    }
    Ok(result)
}
