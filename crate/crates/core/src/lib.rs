//! Tick-based simulation of agents whose behaviour is driven by a hierarchy
//! of needs competing for a small short-term memory.

pub mod calibration;
pub mod error;
pub mod geom;
pub mod links;
pub mod ltm;
pub mod needs;
pub mod scenario;
pub mod stm;
pub mod trace;
pub mod world;
