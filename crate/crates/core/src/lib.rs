//! Crowdsourced last-mile delivery with probabilistic acceptance of
//! compensated offers.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod error;

pub mod acceptance;
pub mod assignment;
pub mod cli;
pub mod experiments;
pub mod gen;
pub mod json;
pub mod model;
pub mod nonsep;
pub mod optim;
pub mod schemes;

pub use error::{Error, Result};
