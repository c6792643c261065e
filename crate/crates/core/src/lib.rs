//! Metric geometry of m-adic boundaries, Heintze groups `R^n x_phi R` and
//! the millefeuille spaces built from them.
//!
//! - [`madic`]: points of `Q_m`, the oriented tree `T_{m+1}` and its
//!   ultrametrics.
//! - [`heintze`]: level metrics, the tent distance, unit heights and the
//!   visual boundary metric of `G_phi`.
//! - [`mille`]: the coarse millefeuille space, its boundary `R^n x Q_m`,
//!   hyperplanes and the doubled-horoball distortion.
//! - [`qiclass`]: the quasi-isometry decision procedure.
//! - [`maps`]: boundary maps and empirical estimators.
//! - [`cli`]: the command line front end.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod heintze;
pub mod maps;
pub mod madic;
pub mod mille;
pub mod optimize;
pub mod qiclass;

pub use error::{GeomError, Result};
