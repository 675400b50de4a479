//! Deterministic multi-agent simulator for decentralized optimization with
//! compressed gossip communication.
//!
//! The crate implements the AdaGossip and AdaG-SGD algorithms together with
//! the baselines they are measured against (DSGD, DeepSqueeze, CHOCO-SGD and
//! CHOCO-Gossip), over undirected graph topologies with uniform doubly
//! stochastic mixing matrices. An experiment harness drives training runs,
//! keeps an exact transmitted-bytes ledger, and emits per-epoch CSV metrics.
//!
//! All simulation state is `f64`; every run is bit-reproducible from its seed
//! list.

pub mod compression;
pub mod consensus;
pub mod data;
pub mod error;
pub mod harness;
pub mod learning;
pub mod models;
pub mod topology;

pub use error::{Error, Result};
