//! Numerical bounded-distortion toolkit for nonstationary compositions.
//!
//! Given a sequence of distinct smooth maps `f_1, ..., f_n` and either an
//! interval (dimension one) or a regular curve in `R^d`, the crate measures how
//! much the composition `F_n = f_n ∘ ... ∘ f_1` distorts derivatives and arc
//! lengths, computes the explicit distortion constants `K = e^{CL}` and
//! `K = e^{C²(α+L)}`, and checks the per-step inequalities that telescope into
//! the global bound.
//!
//! Module map:
//! - [`jets`]: values, directional first and bilinear second derivatives.
//! - [`maps`]: the [`SmoothMap`] abstraction, builtin families, seminorm estimation.
//! - [`curves`]: regular curves, length, maximal angle, arc-length reparameterization.
//! - [`distortion`]: the theorem engines and per-step lemma checks.
//! - [`scenarios`]: reproducible map sequences, Sturmian words, trace maps.
//! - [`experiment`]: declarative config, batch runner, JSON/CSV reports.

pub mod curves;
pub mod distortion;
mod error;
pub mod experiment;
pub mod jets;
pub mod maps;
pub mod scenarios;

pub use error::{Error, Result};
pub use maps::{MapSequence, Region, SmoothMap};

/// Column vector used for points and directions.
pub type Vector = nalgebra::DVector<f64>;
/// Square matrix used for Jacobians.
pub type Matrix = nalgebra::DMatrix<f64>;

/// Build a [`Vector`] from a slice.
pub fn vector(xs: &[f64]) -> Vector {
    Vector::from_column_slice(xs)
}
