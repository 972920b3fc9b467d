//! Spacing-ratio, minimum-singular-value and density statistics.

pub mod densities;
pub mod histogram;
pub mod min_singular;
pub mod ratios;
pub mod reference;
pub mod summation;

pub use densities::{pdf_goe_ratio, pdf_pe_min_singular, pdf_pe_ratio};
pub use histogram::{histogram, DensityHistogram, Histogram};
pub use min_singular::MinSingularStats;
pub use ratios::{
    complex_spacing_ratios, real_line_complex_ratios, real_spacing_ratios, RatioKind, RatioSample,
    SpectrumSource,
};
pub use reference::{normalize_ratio, RatioFamily, ReferenceConstants};
pub use summation::CompensatedSum;
