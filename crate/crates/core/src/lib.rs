//! Two interacting active-inference agents on a circular one-dimensional
//! world, and the ensemble harness that scores a population of such dyads by
//! system-level free energy.
//!
//! The crate is layered bottom-up:
//!
//! * [`beliefmath`] – probability algebra on circular length-`N` arrays.
//! * [`environment`] and [`rng`] – the world, its beacon sensor and the
//!   counter-based random streams that make every run replayable.
//! * [`agent`] – desires, generative densities, the agent free-energy
//!   functional, action selection and belief optimisation.
//! * [`dyad`] – the lockstep two-agent loop.
//! * [`ensemble`] – empirical position distributions and system free energy.
//! * [`experiments`] – the four model presets, per-run metrics and the
//!   bootstrap comparison between models.
//! * [`config`] and [`output`] – experiment configuration files and the
//!   on-disk result bundle.

pub mod agent;
pub mod beliefmath;
pub mod config;
pub mod dyad;
pub mod ensemble;
pub mod environment;
mod error;
pub mod experiments;
pub mod output;
pub mod rng;
pub mod stats;
pub mod validate;

pub use error::{Error, Result};
