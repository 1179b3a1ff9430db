//! Parse, execute and score structural-modeling programs; evaluate candidate
//! sets with pass@k metrics; align a template policy against the reward.

pub mod align;
pub mod bench;
pub mod building;
pub mod config;
pub mod kernel;
pub mod minidsl;
pub mod reward;
pub mod sandbox;
pub mod templates;
