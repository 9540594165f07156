#![cfg_attr(not(test), no_std)]
extern crate alloc;

pub mod baseline;
pub mod belief;
pub mod dynamics;
pub mod environment;
pub mod error;
pub mod experiment;
pub mod flight;
pub mod mission;
pub mod planner;
pub mod thermal;

pub use error::{Error, Result};

/// 2-D vector in metres, `(east, north)`.
pub type Vec2 = nalgebra::Vector2<f64>;
