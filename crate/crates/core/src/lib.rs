//! Delay-dependent exact model matching for the heading channel of a
//! remotely controlled differential-drive robot.
//!
//! The crate covers the whole design chain of the third control layer:
//!
//! * [`qp`]: quasi-polynomials in `(s, z = e^{-sτ})` and rational transfer
//!   functions over them,
//! * [`synthesis`]: gains, characteristic quasi-polynomial, delay bound and
//!   the model-matching precompensator,
//! * [`stability`]: imaginary-axis crossing analysis used as an independent
//!   check of the delay bound,
//! * [`sim`]: fixed-step delay-differential simulation of the networked loop,
//! * [`config`], [`report`]: scenario files, CSV trajectories and run reports
//!   behind the `delaymatch` binary.
//!
//! The math is generic over the scalar type; the aliases below fix it to `f64`
//! (and to exact rationals for the algebra).

// negated comparisons reject NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod config;
pub mod error;
pub mod poly;
pub mod qp;
pub mod report;
pub mod scalar;
pub mod sim;
pub mod stability;
pub mod synthesis;

pub use error::{Error, Result};
pub use qp::{Properness, QuasiPoly, RationalTf};
pub use scalar::{Coefficient, Scalar};
pub use stability::{crossing_point, stability_verdict, CrossingPoint, StabilityVerdict};
pub use synthesis::{
    assemble_pa, build_inner_tf, build_precompensator, closed_loop_response, compute_tau_max,
    derive_gains, validate_chi, ChiParams, ConstraintReport, DelayBound, GainSet, ModelSpec,
};

pub type QuasiPolyF64 = QuasiPoly<f64>;
pub type RationalTfF64 = RationalTf<f64>;
pub type ExactQuasiPoly = QuasiPoly<num_rational::BigRational>;
pub type ExactRationalTf = RationalTf<num_rational::BigRational>;
pub type Chi = ChiParams<f64>;
pub type Gains = GainSet<f64>;
pub type Model = ModelSpec<f64>;
pub type Scenario = sim::SimScenario<f64>;
pub type Traj = sim::Trajectory<f64>;
