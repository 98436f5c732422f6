//! Exact combinatorics and chart verification for the real and complex
//! moduli spaces of stable marked rational curves and their blowup
//! descriptions.

pub mod charts;
pub mod curves;
pub mod error;
pub mod exactfield;
pub mod exec;
pub mod localmodels;
pub mod marks;
pub mod quotient;
pub mod strata;
pub mod trees;
pub mod verify;

pub use error::{Error, Result};
pub use exactfield::{cross_ratio, GaussRat, Mobius, ProjPoint, Rat};
