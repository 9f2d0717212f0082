//! Numerical toolkit for averaged controllability of fractional evolution
//! equations with random fractional-in-time dynamics.

// Quadrature tables keep their published digits; `!(x > 0)` also rejects NaN.
#![allow(
    clippy::excessive_precision,
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop
)]

pub mod control;
pub mod dynamics;
pub mod error;
pub mod fraccalc;
pub mod mlf;
pub mod quad;
pub mod randvar;
pub mod special;
pub mod spectral;
pub mod verify;

pub use control::{
    build_gramian, exactness_failure_scan, hum_null_control, simultaneous_zero_scan, ControlOptions, ControlReport,
    GramianSystem, ZeroCandidate,
};
pub use dynamics::{
    adjoint_at, adjoint_modes, averaged_cell_weights, averaged_controlled, averaged_free, biharmonic_free,
    duality_residual, forward_cell_weights, forward_modes, forward_terminal, AdjointTrajectory, ControlSignal,
    DualityCheck, Trajectory,
};
pub use error::{Error, Result};
pub use fraccalc::{
    caputo_left, frac_integral_left, frac_integral_right, ibp_residual, rl_derivative_right, TimeGrid, TimeSeries,
};
pub use mlf::{
    ml_asymptotic, ml_eval, ml_eval_with, ml_imag_parts, ml_series, ComplexValue, FracParams, MLEvalReport, MlConfig,
    Regime,
};
pub use randvar::{
    class_c_alpha_check, class_check_grids, fcf, fcf_decay_scan, fcf_rademacher_closed, ClassCAlphaReport, Law,
    RandomDiffusivity,
};
pub use spectral::{
    build_basis, eigenfunction_eval, l1_sensor_norm, sensor_gram, spectral_constant_estimate, spectral_constant_fit,
    ConstantSearch, Domain, DomainKind, Mode, SensorBox, SensorSet, Span, SpectralConstant, SpectralField, SpectralFit,
};
pub use verify::{run_suite, Check, VerifyOptions};
