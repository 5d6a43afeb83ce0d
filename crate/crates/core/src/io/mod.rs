//! File formats: ICDAR annotation text, corpus directories and the JSON
//! configuration.

pub mod config;
pub mod corpus;
pub mod icdar;

pub use config::{load_config, parse_config, AugmentMode, ConfigFile};
pub use icdar::{parse_detections, parse_icdar, write_detections, write_icdar};
