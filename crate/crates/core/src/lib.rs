//! Quasi-parabolic one-resonant germs of `C^{n+1}`: invariants, reduction to
//! good form, parabolic basins and their numerical verification.

// Range checks are written as `!(x < bound)` so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basin;
pub mod error;
pub mod germ;
pub mod germfile;
pub mod normal_form;
pub mod orbit;
pub mod presets;
pub mod report;
pub mod resonance;
pub mod series;

pub use error::{Error, Result};
pub use germ::GermMap;
pub use series::{MultiIndex, Series, C64};
