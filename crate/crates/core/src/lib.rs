//! Core library for the two-user Gaussian network-coded cognitive
//! interference channel: exact Gaussian-integer / `F_{p^2}` algebra,
//! nested lattice codebooks with natural labeling, achievable-rate and
//! converse-bound evaluation with integer-coefficient search, and a
//! Monte-Carlo simulation of the full precoded compute-and-forward +
//! dirty-paper-coding transceiver chain.

pub mod algebra;
pub mod lattice;
pub mod rate;
pub mod sim;

pub use algebra::{FieldElement, GaussianInteger, MessageVector};
pub use lattice::{LatticeLayer, LatticePoint, NestedLatticeCode};
pub use rate::{ChannelInstance, RateResult, SchemeChoice, SearchConfig};
pub use sim::{TrialConfig, TrialOutcome};
