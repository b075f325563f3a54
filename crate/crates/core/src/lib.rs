//! Hardware-free telekinesis interaction engine.
//!
//! A tracked hand steers a remote block while gaze, blink-interval
//! concentration and EMG strain gate the interaction, heaters provide a
//! warmth cue, and a block-stacking task scores the result. The
//! [`analysis`] module runs aligned-rank-transform ANOVA over the 2x2x2
//! factor design.

pub mod analysis;
pub mod biosignal;
#[cfg(feature = "serve")]
pub mod bridge;
pub mod cli;
pub mod engine;
pub mod error;
pub mod manipulation;
pub mod model;
pub mod rng;
pub mod thermal;

pub use error::{Error, Result};
