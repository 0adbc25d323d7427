//! Finite-mode lattice model and its continuum limit.

pub mod linalg;
pub mod modes;
pub mod ratio;

pub use linalg::{det_block, ln_trace_quadratic, ln_trace_quadratic_product, trace_quadratic, BlockMatrix, QuadraticOscillatorSystem};
pub use modes::{build_mode_set, polarization, DiscreteModeSet, Mode, ModeBuildOptions};
pub use ratio::{
    coupled_block, renormalization_continuum, renormalization_discrete, s_l_continuum, s_l_discrete, z_n, z_n_eigen,
};
