//! Domain types, configuration and trace files shared by every module.

pub mod canonical;
mod condition;
mod config;
mod frame;
mod object;
pub mod trace;
mod vec3;

pub use condition::FactorCondition;
pub use config::EngineConfig;
pub use frame::{SensorFrame, Site, SkinTemps};
pub use object::ObjectState;
pub use trace::{load_trace, read_trace, save_trace, write_trace};
pub use vec3::Vec3;
