//! Planetary 3D city models: an extension registry for off-world features,
//! a CityJSON document model, body-fixed projections, geometry, DEM handling,
//! feature builders and a validator.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod builders;
pub mod cli;
pub mod crs;
pub mod dem;
pub mod error;
pub mod geometry;
pub mod inputs;
pub mod issue;
pub mod model;
pub mod recipe;
pub mod registry;
pub mod validator;

pub use error::{Error, Result};
pub use issue::{Issue, Severity};
