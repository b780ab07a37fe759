//! Entropy and typical-set experiments for measures carried by points,
//! curves, and surfaces.
//!
//! A probability measure that lives on a union of carriers of different
//! dimensions (an atom plus a segment, a circle plus a patch) has no
//! density in the usual sense, yet it still has a finite entropy once
//! each piece is referred to the volume measure of its own dimension.
//! This crate computes that entropy, decomposes it into a label term
//! and per-dimension conditional terms, and probes what it predicts:
//! how much product mass the typical set captures, how fast its volume
//! grows, and how tightly word dimensions concentrate.
//!
//! The layers, bottom up:
//!
//! * [`gmt`] - parametrized charts, area and coarea factors, and
//!   measured volumes by adaptive quadrature.
//! * [`measures`] - densities on charts, stratified mixtures, exact and
//!   sampled entropy.
//! * [`disintegration`] - product, slice, and mixture chain rules with
//!   machine-checkable residuals.
//! * [`typicality`] - weak/strong typicality tests, margin schedules,
//!   and per-stratum volume estimators.
//! * [`experiments`] - seeded, reproducible experiment drivers with
//!   reports in three formats.
//! * [`config`] - TOML descriptions of measures and experiment
//!   parameters, shared by the CLI and the examples.
//!
//! # Example
//!
//! An even mixture of an atom and a uniform segment of length two has
//! entropy `ln 2 + (1/2) ln 2` nats: one bit to pick the component,
//! plus the segment's own differential entropy half the time.
//!
//! ```
//! use strata::gmt::{point, segment};
//! use strata::measures::{DensityFamily, RectifiableComponent, StratifiedMeasure};
//! use strata::quad::QuadratureScheme;
//!
//! let scheme = QuadratureScheme::default();
//! let parts = vec![
//!     (
//!         RectifiableComponent::new(point(&[-1.0])?, DensityFamily::Uniform, &scheme)?,
//!         0.5,
//!     ),
//!     (
//!         RectifiableComponent::new(segment(&[0.0], &[2.0])?, DensityFamily::Uniform, &scheme)?,
//!         0.5,
//!     ),
//! ];
//! let measure = StratifiedMeasure::from_parts(parts, &scheme)?;
//! let entropy = measure.entropy();
//! assert!((entropy.total - 1.5 * std::f64::consts::LN_2).abs() < 1e-12);
//! assert!((measure.expected_dimension() - 0.5).abs() < 1e-12);
//! # Ok::<(), strata::Error>(())
//! ```
//!
//! The `examples/` directory walks each layer in turn; `strata` (the
//! thin CLI binary) drives the same machinery from TOML configs and
//! writes deterministic reports.

pub mod config;
pub mod disintegration;
pub mod error;
pub mod experiments;
pub mod gmt;
pub mod measures;
pub mod quad;
pub mod typicality;

pub use error::{Error, Result};
