//! Wavelet-frame image deblurring.
//!
//! The crate restores images degraded as `f = A u + noise`, where `A` is a
//! periodic convolution, by regularizing the undecimated linear B-spline
//! framelet coefficients `W u`. Four solvers are provided:
//!
//! * [`solvers::solve_split_bregman_l1`]: anisotropic l1 analysis model.
//! * [`solvers::solve_mdal_l0`]: weighted l0 model with running-mean output.
//! * [`solvers::solve_nonlocal_mdal`]: l0 plus a quadratic pull toward a
//!   nonlocal (patch-similarity) estimate of the coefficients.
//! * [`solvers::solve_truncated_isd`]: the multi-stage variant that detects
//!   the support of large coefficients by thresholding and exempts it from
//!   the l0 penalty in later stages.
//!
//! The [`bench`] module wraps degradation, solver sweeps and metric tables
//! for reproducible experiments.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod bench;
pub mod degrade;
mod error;
mod fft;
pub mod framelet;
pub mod imaging;
pub mod nonlocal;
pub mod solvers;

pub use degrade::{BlurOperator, Kernel};
pub use error::{Error, Result};
pub use framelet::{Boundary, FrameCoeffs, FrameWeights, Framelet};
pub use imaging::Image;
pub use nonlocal::NeighborTable;
pub use solvers::{SolverParams, SolverReport, SupportMask};
