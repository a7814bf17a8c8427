//! Coverage probability and spectral-efficiency engine for D2D-relay-assisted
//! millimeter-wave cellular networks.
//!
//! Analytic results are evaluated by adaptive quadrature ([`analytic`],
//! [`spectral`]) and cross-checked against a seeded Monte-Carlo
//! stochastic-geometry simulator ([`simulator`]). Both sides are driven by the
//! same [`scenario::Scenario`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod error;
pub mod geometry;
pub mod quadrature;
pub mod radio;
pub mod scenario;
pub mod simulator;
pub mod spectral;
pub mod units;

pub use error::{Error, Result};
