//! # qchaos
//!
//! A toolkit for the time scales of chaotic dynamics under deformed
//! (nonextensive) statistics:
//!
//! - [`qmath`] — q-logarithm/q-exponential inverse pair, the q-deformed
//!   arithmetic, and the Tsallis entropy.
//! - [`partitions`] — measure-preserving maps of the interval and the
//!   square, Monte-Carlo itinerary refinement, and finite-step estimates
//!   of the (deformed) Kolmogorov-Sinai entropy.
//! - [`timescales`] — the generalised time scale `tau_q = ln_q(eta)/h_q`,
//!   graininess bookkeeping, and the deformed-uncorrelation measure model.
//! - [`echo`] — Loschmidt-echo simulation for the closed kicked rotator,
//!   q-exponential decay fitting, and the m-point correlation models.
//! - [`openrotor`] — the kicked rotator with absorbing boundary
//!   conditions: survival decay, relaxation times, the square-root window
//!   scaling, and complex-spectrum diagnostics.
//! - [`cli`] — the `qchaos` command-line front end with reproducible CSV
//!   output and run manifests.
//!
//! ## Examples
//!
//! Each major capability has a runnable example:
//!
//! ```bash
//! cargo run --release --example q_algebra
//! cargo run --release --example ks_entropy
//! cargo run --release --example timescale_curves
//! cargo run --release --example uncorrelation_table
//! cargo run --release --example echo_regimes
//! cargo run --release --example rotor_relaxation
//! cargo run --release --example rotor_scaling_scan
//! cargo run --release --example spectrum_ring
//! ```

pub mod cli;
pub mod echo;
mod kicked;
mod linalg;
mod numeric;
pub mod openrotor;
pub mod partitions;
pub mod qmath;
pub mod timescales;

pub use echo::{EchoSeries, KickedRotor, Perturbation, WaveState};
pub use openrotor::{RotorParams, SurvivalSeries};
pub use partitions::{GridPartition, KsEstimate, MapSpec, RefinementAtoms};
pub use qmath::{EntropicIndex, ProbabilityVector};
pub use timescales::{Graininess, TimescaleRow};
