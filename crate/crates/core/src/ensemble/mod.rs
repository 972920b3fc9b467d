//! Monte Carlo orchestration: single ensemble points, parameter sweeps,
//! reference calibration, parameter location by bisection and transition
//! onsets.
//!
//! Realization `i` of a point with master seed `s` is always generated from
//! ChaCha stream `i` of `s`, and per-realization results are merged in index
//! order. Results are therefore bit-identical for any worker count.

mod calibrate;
mod grid;
mod hist;
mod locate;
mod onset;
mod point;
mod presets;
mod sweep;

pub use calibrate::{calibrate_references, Calibration, SMALL_N_THRESHOLD};
pub use grid::parse_grid;
pub use hist::{run_hist, Control, HistJob, HistResult, HistStat};
pub use locate::{default_bracket, locate_parameter, LocateOptions, LocateResult, LocateStep};
pub use onset::{onset_curve, transition_onset, DEFAULT_ONSET_THRESHOLD};
pub use point::{
    run_point, AatScale, EnsembleStats, HistogramSpec, PointConfig, PointHistograms, RatioEstimate,
    StatFlags,
};
pub use presets::{preset, Preset, PRESETS};
pub use sweep::{run_sweep, Budget, PointFailure, SweepResult, SweepSpec};

use crate::error::{Error, Result};

/// Runs `f` on a dedicated pool of `workers` threads.
pub fn with_workers<T, F>(workers: usize, f: F) -> Result<T>
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    if workers == 0 {
        return Err(Error::Parameter("worker count must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Parameter(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(f))
}
