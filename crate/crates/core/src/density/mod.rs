//! The effective measure of states and its resonance structure.

pub mod coefficients;
pub mod kernel;
pub mod series;

pub use coefficients::{binomial_row, coefficient_table, CoefficientTable};
pub use kernel::{g_complex, g_real, g_sup_bound};
pub use series::{
    convolve, phi_of_omega, rho_density, rho_density_eta, truncation_bound, DensityOptions,
    FrequencyDensity, StateMeasure,
};

pub mod lorentz;
pub use lorentz::{
    lorentz_lines, lorentz_profile, lorentz_sum, thermal_peak_shift, LorentzLine, PeakShift,
    PeakSource,
};

pub mod complex;
pub use complex::{
    default_radii, density_complex, density_complex_terms, jump_g2, jump_g2_numeric, residue_probe,
    residue_probe_fn, ExtrapolationBasis, ResidueEstimate,
};
