//! Simulation and analysis of a nonlocal growth model with congestion: the
//! finite-γ pressure model, its saturated (obstacle) limit, traveling waves
//! and the minimal spreading speed.

// `!(x > 0.0)` guards are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod dynamics;
pub mod grid;
pub mod initial;
pub mod io;
pub mod growth;
pub mod kernel;
pub mod quad;
pub mod stencil;
pub mod waves;

pub use grid::{Grid, GridError, GridField};
pub use kernel::{
    build_kernel, build_kernel_with, check_cap_inequality, front_profile, CapReport, FrontKernelProfile, Kernel,
    KernelError, KernelKind, RadialProfile, StencilQuadrature,
};
pub use stencil::{convolve, convolve_mask, ConvolutionStencil};
pub use dynamics::{
    obstacle_residual, rhs_gamma, rhs_singular, run, saturation_time_map, stability_cap, step, DynamicsError, Frame,
    InvariantReport, Model, ModelParams, Observer, ObserverError, RunError, RunOptions, RunSummary, Simulation,
    SnapshotRecorder,
};
pub use growth::{GrowthError, GrowthLaw, RateFn, Tabulated};
pub use waves::{
    export_radial_wave, export_wave, find_c_star, find_c_star_with_step, monotone_in_c_check, shoot_profile,
    MinimalSpeedResult, MonotoneCheck, WaveError, WaveGeometry, WaveProfile, WaveSampler,
};
pub use initial::{InitialData, InitialError};
