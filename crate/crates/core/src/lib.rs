//! Link-level simulator and algorithm library for robust two-tier
//! interference-alignment transceiver design in downlink multi-user
//! multi-cell MIMO networks with imperfect channel knowledge.
//!
//! The building blocks:
//!
//! - [`matrix`], [`eig`], [`bessel`] — self-contained complex linear algebra
//!   (Jacobi eigensolver, one-sided Jacobi SVD, Gram–Schmidt) plus the J0
//!   Bessel evaluation used by the Doppler model. These double as the
//!   brute-force reference the adaptive algorithms are tested against.
//! - [`config`], [`channel`] — scenario configuration and the Gauss–Markov
//!   time-varying channel with a norm-bounded estimation-error split.
//! - [`inner`] — per-cell SLNR-constrained inner beamforming directions and
//!   powers via Lagrange multiplier iteration.
//! - [`power`] — energy-efficient power allocation by Dinkelbach fractional
//!   programming over the rate / consumed-power ratio.
//! - [`outer`] — per-cell outer beamformer by conjugate-gradient descent on
//!   the Grassmann manifold, gated by a set-membership update rule.
//! - [`tracker`] — receive-filter minor-subspace tracking with the fast data
//!   projection method (FDPM), plain DPM kept as a baseline.
//! - [`sim`], [`sweep`], [`export`] — the per-slot pipeline, Monte Carlo
//!   sweep harness and deterministic CSV/JSON result export.

pub mod bessel;
pub mod channel;
pub mod config;
pub mod eig;
pub mod error;
pub mod export;
pub mod inner;
pub mod matrix;
pub mod outer;
pub mod power;
pub mod sim;
pub mod sweep;
pub mod tracker;

pub use bessel::bessel_j0;
pub use channel::{doppler_alpha, ChannelSet};
pub use config::NetworkConfig;
pub use eig::{compact_svd, hermitian_eig, minor_subspace, orthonormalize, subspace_distance};
pub use error::{ConfigError, ExportError, InnerError, LinalgError};
pub use matrix::{CMat, CVec};
pub use sim::{run_instant, run_scenario, Baseline, MetricsRecord, WorldState};
pub use sweep::{sweep, SweepAxis, SweepSpec};
