pub mod bounds;
pub mod cli;
pub mod engine;
pub mod error;
pub mod intervals;
pub mod model;
pub mod occupancy;
pub mod oracle;
pub mod rat;
pub mod schedulability;
pub mod worstcase;

pub use error::{Error, Result};
pub use model::{PriorityAssignment, TaskSet, TaskSpec};
pub use rat::Rat;
