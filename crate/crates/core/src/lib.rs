//! Heterogeneous wireless sensor network clustering with adaptive
//! cluster-head election.
//!
//! Nodes are deployed on a square field with a central sink ([`net`]), pay
//! first-order radio costs ([`energy`]), and are grouped every round either
//! by LEACH/SEP threshold election or by kappa_max-bounded k-means++ seeding
//! weighted with energy and distance quality probabilities ([`prob`],
//! [`clustering`]). [`engine`] runs the round loop and [`harness`] replicates
//! experiments across seeds and protocols.

pub mod clustering;
pub mod energy;
pub mod engine;
pub mod error;
pub mod harness;
pub mod net;
pub mod prob;
pub mod rng;

pub use clustering::{Cluster, WeightMode};
pub use energy::RadioParams;
pub use engine::{run_simulation, Election, ProtocolSpec, QualityGate, RoundMetrics, Simulation, SimulationResult};
pub use error::{Error, Result};
pub use net::{NetworkConfig, NodeKind, Position, SensorNode};
