use super::hist::HistStat;
use super::point::StatFlags;
use super::sweep::Budget;
use crate::error::{Error, Result};
use crate::models::GraphModel;

/// Named bundle of sizes, grids and budgets.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub n_list: &'static [usize],
    pub derg_grid: &'static str,
    pub drrg_grid: &'static str,
    pub budget: Budget,
    /// Statistics of a sweep.
    pub flags: StatFlags,
    /// Statistics of a histogram job.
    pub hist_stats: &'static [HistStat],
    /// Normalized ratios at which histograms are taken.
    pub targets: &'static [f64],
}

impl Preset {
    pub fn grid(&self, model: GraphModel) -> Option<&'static str> {
        match model {
            GraphModel::Derg => Some(self.derg_grid),
            GraphModel::Drrg => Some(self.drrg_grid),
            GraphModel::Pe | GraphModel::Rge => None,
        }
    }
}

const PAPER_SIZES: &[usize] = &[100, 200, 400, 800, 1600];
const HIST_SIZES: &[usize] = &[100, 200, 400];
const TARGETS: &[f64] = &[0.0, 0.25, 0.5, 0.75, 1.0];
const RATIOS: StatFlags = StatFlags {
    min_singular: false,
    ..StatFlags::ALL
};
const MINIMA: StatFlags = StatFlags {
    min_singular: true,
    ..StatFlags::NONE
};
const RATIO_HISTS: &[HistStat] = &[HistStat::RrAat, HistStat::RcAat, HistStat::RcA];
const LMIN_HIST: &[HistStat] = &[HistStat::Lmin];

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "paper-fig1",
        description: "mean ratios vs p or rho, n = 100..1600, 10^6 ratios per point",
        n_list: PAPER_SIZES,
        derg_grid: "log:1e-4:1:41",
        drrg_grid: "log:1e-3:1.4142135623730951:41",
        budget: Budget::Ratios(1_000_000),
        flags: RATIOS,
        hist_stats: RATIO_HISTS,
        targets: TARGETS,
    },
    Preset {
        name: "paper-fig3",
        description: "ratio histograms at fixed rbar, 10^6 graphs per histogram",
        n_list: HIST_SIZES,
        derg_grid: "log:1e-4:1:41",
        drrg_grid: "log:1e-3:1.4142135623730951:41",
        budget: Budget::Realizations(1_000_000),
        flags: RATIOS,
        hist_stats: RATIO_HISTS,
        targets: TARGETS,
    },
    Preset {
        name: "paper-fig3-ratios",
        description: "ratio histograms at fixed rbar, 10^6 ratios per histogram",
        n_list: HIST_SIZES,
        derg_grid: "log:1e-4:1:41",
        drrg_grid: "log:1e-3:1.4142135623730951:41",
        budget: Budget::Ratios(1_000_000),
        flags: RATIOS,
        hist_stats: RATIO_HISTS,
        targets: TARGETS,
    },
    Preset {
        name: "paper-fig4",
        description: "lambda_min moment ratio vs p or rho, 10^6/n minima per point",
        n_list: PAPER_SIZES,
        derg_grid: "log:1e-4:1:41",
        drrg_grid: "log:1e-3:1.4142135623730951:41",
        budget: Budget::Ratios(1_000_000),
        flags: MINIMA,
        hist_stats: LMIN_HIST,
        targets: TARGETS,
    },
    Preset {
        name: "paper-fig5",
        description: "lambda_min histograms at fixed rbar, 10^5 graphs per histogram",
        n_list: HIST_SIZES,
        derg_grid: "log:1e-4:1:41",
        drrg_grid: "log:1e-3:1.4142135623730951:41",
        budget: Budget::Realizations(100_000),
        flags: MINIMA,
        hist_stats: LMIN_HIST,
        targets: TARGETS,
    },
    Preset {
        name: "desk-fig1",
        description: "paper-fig1 at n = 100 with 10^5 ratios per point",
        n_list: &[100],
        derg_grid: "log:1e-4:1:20",
        drrg_grid: "log:1e-3:1.4142135623730951:20",
        budget: Budget::Ratios(100_000),
        flags: RATIOS,
        hist_stats: RATIO_HISTS,
        targets: TARGETS,
    },
    Preset {
        name: "desk-fig3",
        description: "paper-fig3 with 10^4 graphs per histogram",
        n_list: HIST_SIZES,
        derg_grid: "log:1e-4:1:20",
        drrg_grid: "log:1e-3:1.4142135623730951:20",
        budget: Budget::Realizations(10_000),
        flags: RATIOS,
        hist_stats: RATIO_HISTS,
        targets: TARGETS,
    },
    Preset {
        name: "desk-fig4",
        description: "paper-fig4 at n = 100, 200 with 10^5/n minima per point",
        n_list: &[100, 200],
        derg_grid: "log:1e-4:1:20",
        drrg_grid: "log:1e-3:1.4142135623730951:20",
        budget: Budget::Ratios(100_000),
        flags: MINIMA,
        hist_stats: LMIN_HIST,
        targets: TARGETS,
    },
    Preset {
        name: "desk-fig5",
        description: "paper-fig5 with 10^4 graphs per histogram",
        n_list: HIST_SIZES,
        derg_grid: "log:1e-4:1:20",
        drrg_grid: "log:1e-3:1.4142135623730951:20",
        budget: Budget::Realizations(10_000),
        flags: MINIMA,
        hist_stats: LMIN_HIST,
        targets: TARGETS,
    },
];

pub fn preset(name: &str) -> Result<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name).ok_or_else(|| {
        let names: Vec<&str> = PRESETS.iter().map(|p| p.name).collect();
        Error::Parameter(format!("unknown preset '{name}' (known: {})", names.join(", ")))
    })
}
