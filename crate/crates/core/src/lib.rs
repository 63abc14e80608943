//! Single-object tracking that fuses appearance scores with an
//! optical-flow-propagated foreground mask whose per-pixel uncertainty comes
//! from a Laplace flow model.
//!
//! The pieces, bottom up:
//!
//! - [`geometry`], [`grid`]: boxes, polygon overlap, minimum bounding
//!   rectangles, masks.
//! - [`flow`]: the FlowMask, a mask carried from frame `t-1` to frame `t`
//!   through a truncated Laplace correspondence kernel.
//! - [`scoring`]: size and position penalties, flow score, fused proposal score.
//! - [`tracker`]: the per-frame loop and its ablation variants.
//! - [`synth`], [`dataset`], [`ufg`]: synthetic scenes with distractors, camera
//!   motion and calibrated flow noise, and their on-disk form.
//! - [`eval`]: the reset protocol, accuracy, robustness, EAO, ablations and the
//!   hyperparameter search.
//! - [`config`], [`cli`]: the `uft` command line.
//!
//! ```
//! use uft::{propagate_mask, FlowField, KernelConfig, ProbMask};
//!
//! let prev = ProbMask::filled(16, 16, 0.25);
//! let flow = FlowField::uniform(16, 16, -2.0, 1.0, 0.8);
//! let next = propagate_mask(&prev, &flow, &KernelConfig::default()).unwrap();
//! assert!((next.get(8, 8) - 0.25).abs() < 1e-9);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod flow;
pub mod geometry;
pub mod grid;
mod io_util;
pub mod keyvalue;
pub mod scoring;
pub mod synth;
pub mod tracker;
pub mod ufg;

pub use error::{Error, Result};
pub use flow::{propagate_mask, FlowField, KernelConfig};
pub use geometry::{mbr_of_mask, polygon_overlap, AABox, Point, RotBox};
pub use grid::{BinaryMask, ProbMask, ScalarGrid};
pub use scoring::{Proposal, ScoreConfig};
pub use tracker::{MaskSource, Tracker, Variant, VariantConfig};
