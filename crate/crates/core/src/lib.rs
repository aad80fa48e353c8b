//! Frequency-domain acoustic scattered wavefields represented by small
//! sine-activated coordinate networks, grown across frequencies by exact
//! neuron splitting, and verified against a finite-difference Helmholtz
//! solver.
//!
//! The crate is organized around the pipeline:
//!
//! * [`model`] — gridded velocity models and squared-slowness fields
//! * [`physics`] — analytic background wavefield and the PDE residual
//! * [`sampler`] — randomized collocation batches with precomputed medium data
//! * [`network`] — the coordinate network, exact Laplacians, loss gradients, Adam
//! * [`splitting`] — function-preserving neuron splitting
//! * [`trainer`] — frequency-ladder orchestration and checkpointing
//! * [`refsolver`] — finite-difference reference solutions (banded LU + PML)

pub mod io;
pub mod metrics;
pub mod model;
pub mod network;
pub mod physics;
pub mod refsolver;
pub mod sampler;
pub mod splitting;
pub mod trainer;

pub use model::VelocityModel;
pub use network::{AdamState, CoordScale, EvalJet, NetworkParams, PEConfig};
pub use physics::MediumPoint;
pub use refsolver::{ComplexGrid, PMLConfig};
pub use sampler::SampleBatch;
pub use splitting::SplitConfig;
pub use trainer::{Checkpoint, LadderStage};

/// Side length of the standard square domain, km.
pub const DEFAULT_DOMAIN_KM: f64 = 2.5;

/// Default background velocity, km/s.
pub const DEFAULT_BACKGROUND_VELOCITY: f64 = 1.5;

/// Default source depth below the surface, km.
pub const DEFAULT_SOURCE_DEPTH_KM: f64 = 0.025;
