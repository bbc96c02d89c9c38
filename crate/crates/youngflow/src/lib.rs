//! Nonautonomous Young differential equations driven by paths of finite
//! p-variation, `1 < p < 2`.
//!
//! The crate covers the whole pipeline: exact discrete p-variation of sampled
//! paths, Riemann–Stieltjes approximations of Young integrals with
//! Young–Loève certificates, greedy time partitions of a driver, coefficient
//! fields with their hypothesis constants, a Picard-iteration solver that works
//! interval by interval along greedy times, and checks of the two-parameter
//! flow generated by the solution map.
//!
//! ```
//! use youngflow::paths::{p_variation, Interval, SampledPath};
//!
//! let path = SampledPath::from_scalar(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 3.0]).unwrap();
//! let v = p_variation(&path, 2.0, Interval::new(0.0, 2.0).unwrap()).unwrap();
//! assert!((v - 3.0).abs() < 1e-12);
//! ```

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certificate;
pub mod cli;
pub mod coefficients;
pub mod drivers;
pub mod error;
pub mod flow;
pub mod greedy;
pub mod paths;
pub mod solver;
pub mod young_integral;

pub use error::{Error, Result};
