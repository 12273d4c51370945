//! Cost-supply curves for energy resources with lower, mode and upper
//! envelopes, built from regional resource tables.
//!
//! Curves are sums of two distribution families ([`distcore`]) calibrated from
//! cost anchors ([`calibrate`]) or fitted to cumulative points ([`fitter`]).
//! [`ingest`] turns the data tables into a [`ingest::Database`] of envelopes;
//! [`curveset`] tabulates, inverts and samples them; [`atlas`] moves curves
//! between region definitions; [`ledger`] tracks cumulative use.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod atlas;
pub mod calibrate;
pub mod cli;
pub mod curveset;
pub mod distcore;
pub mod error;
pub mod fitter;
pub mod ingest;
pub mod ledger;

pub use error::{Error, Result};
