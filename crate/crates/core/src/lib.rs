//! Makespan-optimal scheduling of DAG jobs on racks joined by a shared wired
//! channel and a set of wireless subchannels.

pub mod baselines;
pub mod bounds;
pub mod encoder;
pub mod error;
pub mod experiment;
pub mod generator;
pub mod io;
pub mod model;
pub mod oracle;
pub mod solver;
pub mod time;
pub mod validate;

pub use error::{Error, Result};
pub use model::{
    Channel, DataEdge, EdgeKey, EdgeSlot, JobGraph, NetworkConfig, ProblemInstance, Schedule, Task,
    TaskId, TaskSlot,
};
pub use time::TimeUnits;
