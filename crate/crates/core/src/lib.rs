//! Valuation, aggregation and planning for several Markovian objectives that
//! disagree about how to discount the future.

pub mod aggregation;
pub mod augmentation;
pub mod boltzmann;
pub mod cli;
pub mod error;
pub mod fixtures;
pub mod intertemporal;
pub mod model;
pub mod planning;
pub mod policy;
pub mod trajectory;
pub mod valuation;

pub use error::{Error, Result};
