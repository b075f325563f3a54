//! Aligned-rank-transform ANOVA for the three binary factors.
//!
//! The model is the 8-cell fixed-effects factorial; participant is carried in
//! the table but not modeled, so the error term has `N - 8` degrees of freedom.

mod anova;
mod art;
mod fdist;
mod table;

pub use anova::{anova3, AnovaResult, Effect, EffectRow};
pub use art::{align, align_rank, art_anova, average_ranks, ArtAnovaResult};
pub use fdist::f_upper_tail;
pub use table::{Observation, ObservationTable};
