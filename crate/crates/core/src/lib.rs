//! Painlevé III(0,0,4,−4): monodromy data, small-x asymptotics, pole-transparent
//! integration on the positive ray, the direct monodromy problem, and the
//! classification of real solutions by their zero/pole sequences.
//!
//! The equation is `f'' = f'^2/f − f'/x + 4f^3 − 4/f`. In the Euler variable
//! `θ = x d/dx` it is the first-order system `θf = 2fg`, `θg = 2x^2 (f^2 − f^-2)`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod classification;
pub mod direct_monodromy;
pub mod error;
pub mod flow;
pub mod monodromy_space;
pub mod ode;
pub mod special;

pub use nalgebra::Matrix2;
pub use num_complex::Complex64 as C64;

pub use asymptotics::{
    asymptotic_case, formal_frame_coefficients, kappa_constants, leading_term, predict_small_x_events, seed_state,
    AsymptoticCase, Expansion, FrameTable, PredictedEvent, SeedOptions,
};
pub use classification::{
    gordon_inverse, gordon_translate, predicted_sequence, real_point_from_phase, sheet_trace, stratum, terp_status,
    verify_trajectory, GordonFamily, GordonPoint, NearInfinity, NearZero, Pattern, RealStratum, SheetOptions, SheetRow,
    Side, Split, Splitting, TerpStatus, VerifyOptions, VerifyReport,
};
pub use direct_monodromy::{
    linear_system, round_trip, stokes_data, LinearSystem, RoundTripReport, StokesOptions, StokesOutput,
};
pub use error::{Error, Result};
pub use flow::{
    chart_convert, chart_rhs, decaying_branch, event_series, flow, local_fit, sample_solution, solve_on_ray,
    ChartState, EventKind, FlowEvent, FlowOptions, LocalFit, RayOptions, Sample, SampleValue, Sampling, Trajectory,
};
pub use monodromy_space::{
    apply_symmetry, eigen_data, make_point, memberships, quotient_invariants, reality_class, spectral, sqrt_branch,
    structure_matrices, EigenData, MonodromyPoint, QuotientInvariants, RealityClass, SpectralData, Symmetry,
};

/// Tolerance used when deciding whether a complex number lies on a real or
/// imaginary axis, or whether `s` sits exactly at `±2`.
pub const AXIS_TOL: f64 = 1e-12;
