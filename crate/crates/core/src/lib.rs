//! Simulated-bifurcation detectors for massive MIMO signal detection.
//!
//! The crate covers the whole pipeline:
//!
//! * [`channel`] — Rayleigh-fading channels in the real-valued embedding,
//!   QPSK sources, and noisy transmission at a target SNR.
//! * [`qubo`] — the ML / LMMSE-guided / LM objectives and their coupling
//!   matrix + field representations, with the single-flip local-minimum
//!   test and the coupling scale c0.
//! * [`sb`] — the discrete ballistic simulated-bifurcation solver.
//! * [`du`] — the differentiable unfolded solver with exact hand-rolled
//!   reverse-mode gradients for the trainable step sizes, coupling strength,
//!   and regularizer.
//! * [`trainer`] — mini-batch supervised training (Adam) of those
//!   parameters plus JSON persistence.
//! * [`detect`] — hard-decision detectors over all of the above.
//! * [`bench`] — a reproducible Monte Carlo BER sweep harness and the
//!   built-in objective-value table.
//!
//! Numeric kernels are generic over [`scalar::Real`] (`f32` or `f64`);
//! the `*64` aliases at the crate root pick the default precision used by
//! the command-line tools.

pub mod bench;
pub mod channel;
pub mod detect;
pub mod du;
pub mod error;
pub mod linalg;
pub mod qubo;
pub mod sb;
pub mod scalar;
pub mod seeds;
pub mod trainer;

pub use channel::{noise_variance_from_snr, realize_channel, sample_qpsk, transmit, ComplexDims};
pub use detect::{ber, hard_decision, DetectorKind};
pub use du::{du_backward, du_forward, grad_check, phi_s, psi_s};
pub use error::{Error, Result};
pub use qubo::{build_g, build_lm, build_ml, compute_c0, lmmse_solution, objective, Objective};
pub use sb::{init_state, sb_run, sb_step};
pub use scalar::Real;
pub use trainer::{adam_step, load_params, make_batch, mse_loss, save_params, train};

pub type RealChannel64 = channel::RealChannel<f64>;
pub type MimoSample64 = channel::MimoSample<f64>;
pub type QuboInstance64 = qubo::QuboInstance<f64>;
pub type LmConfig64 = qubo::LmConfig<f64>;
pub type GConfig64 = qubo::GConfig<f64>;
pub type SbConfig64 = sb::SbConfig<f64>;
pub type SbState64 = sb::SbState<f64>;
pub type DuParams64 = du::DuParams<f64>;
pub type DuFixed64 = du::DuFixed<f64>;
pub type DuGrads64 = du::DuGrads<f64>;
pub type LmSystem64 = du::LmSystem<f64>;
pub type TrainConfig64 = trainer::TrainConfig<f64>;
pub type DetectorSpec64 = detect::DetectorSpec<f64>;
pub type Detector64 = detect::Detector<f64>;
