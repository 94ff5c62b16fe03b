//! Supervised training of the unfolded solver parameters.
//!
//! Each update draws a fresh channel, a mini-batch of transmissions over it
//! at a random SNR, runs the batched unroll, and applies one Adam step on
//! the MSE between the continuous outputs and the transmitted symbols.
//! Randomness is derived per update from the master seed, and gradients are
//! reduced over fixed-size batch chunks in index order, so training is
//! bit-reproducible for a given seed regardless of the thread count.

use std::fs;
use std::path::Path;

use ndarray::{Array2, ArrayView1, ArrayView2};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{noise_variance_from_snr, realize_channel, ComplexDims, RealChannel};
use crate::du::{du_backward_batch, du_forward_batch, DuFixed, DuGrads, DuParams, LmSystem};
use crate::error::{check_len, Error, Result};
use crate::scalar::Real;
use crate::seeds::rng_from;

const TRAIN_STREAM: u64 = 0x7261;
/// Samples per reduction chunk; fixed so the gradient summation order never
/// depends on the worker count.
const CHUNK: usize = 512;

/// Training recipe.
#[derive(Debug, Clone)]
pub struct TrainConfig<S> {
    /// Unfolded depth T.
    pub t: usize,
    pub batch_size: usize,
    pub num_updates: usize,
    pub learning_rate: S,
    pub dims: ComplexDims,
    /// Per-batch SNR is drawn uniformly from this range (dB).
    pub snr_range_db: (S, S),
    pub seed: u64,
    pub fixed: DuFixed<S>,
}

impl<S: Real> TrainConfig<S> {
    /// Reference recipe: T = 10, 1000 updates of batch 2000 at learning
    /// rate 2e-4, SNR drawn from [0, 30] dB.
    pub fn standard(dims: ComplexDims, seed: u64) -> Self {
        Self {
            t: 10,
            batch_size: 2000,
            num_updates: 1000,
            learning_rate: S::of(2e-4),
            dims,
            snr_range_db: (S::zero(), S::of(30.0)),
            seed,
            fixed: DuFixed::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.t == 0 || self.batch_size == 0 {
            return Err(Error::InvalidConfig(
                "depth and batch size must be positive".into(),
            ));
        }
        if self.learning_rate <= S::zero() {
            return Err(Error::InvalidConfig("learning rate must be > 0".into()));
        }
        if self.snr_range_db.0 > self.snr_range_db.1 {
            return Err(Error::InvalidConfig("SNR range is inverted".into()));
        }
        Ok(())
    }
}

/// One mini-batch: a single channel, per-sample transmissions, and
/// per-sample start momenta.
#[derive(Debug, Clone)]
pub struct TrainBatch<S> {
    pub channel: RealChannel<S>,
    pub snr_db: S,
    pub sigma_w2: S,
    /// Transmitted symbols, one row per sample.
    pub x_true: Array2<S>,
    /// Received vectors, one row per sample.
    pub received: Array2<S>,
    /// Start momenta y(0), one row per sample (x(0) = 0).
    pub y0: Array2<S>,
}

impl<S: Real> TrainBatch<S> {
    pub fn len(&self) -> usize {
        self.x_true.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.x_true.nrows() == 0
    }
}

/// Draws one mini-batch: fresh channel, batch SNR uniform from the
/// configured range, independent symbols/noise/start momenta per sample.
pub fn make_batch<S: Real, R: Rng + ?Sized>(cfg: &TrainConfig<S>, rng: &mut R) -> TrainBatch<S> {
    let channel: RealChannel<S> = realize_channel(cfg.dims, rng);
    let (n, m) = (channel.n(), channel.m());
    let b = cfg.batch_size;
    let snr_db = if cfg.snr_range_db.0 == cfg.snr_range_db.1 {
        cfg.snr_range_db.0
    } else {
        S::uniform(rng, cfg.snr_range_db.0, cfg.snr_range_db.1)
    };
    let sigma_w2 = noise_variance_from_snr(snr_db, n);
    let sd = (sigma_w2 / S::of(2.0)).sqrt();

    let x_true = Array2::from_shape_fn((b, n), |_| {
        if rng.random::<bool>() {
            S::one()
        } else {
            -S::one()
        }
    });
    let mut received = x_true.dot(&channel.h().t());
    for v in received.iter_mut() {
        *v += S::std_normal(rng) * sd;
    }
    debug_assert_eq!(received.ncols(), m);
    let amp = S::of(0.1);
    let y0 = Array2::from_shape_fn((b, n), |_| S::uniform(rng, -amp, amp));
    TrainBatch {
        channel,
        snr_db,
        sigma_w2,
        x_true,
        received,
        y0,
    }
}

/// Mean of squared differences over all components.
pub fn mse_loss<S: Real>(x_out: &ArrayView1<S>, x_true: &ArrayView1<S>) -> Result<S> {
    check_len("loss argument", x_true.len(), x_out.len())?;
    let mut acc = S::zero();
    for (&a, &b) in x_out.iter().zip(x_true.iter()) {
        let d = a - b;
        acc += d * d;
    }
    Ok(acc / S::of(x_out.len() as f64))
}

fn mse_loss_2d<S: Real>(x_out: &ArrayView2<S>, x_true: &ArrayView2<S>) -> S {
    let mut acc = S::zero();
    for (&a, &b) in x_out.iter().zip(x_true.iter()) {
        let d = a - b;
        acc += d * d;
    }
    acc / S::of(x_out.len() as f64)
}

/// Adam accumulators over the flat parameter layout
/// [Delta_0 .. Delta_{T-1}, eta, lambda].
#[derive(Debug, Clone)]
pub struct AdamState<S> {
    m: Vec<S>,
    v: Vec<S>,
    step: usize,
}

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

impl<S: Real> AdamState<S> {
    pub fn new(t: usize) -> Self {
        Self {
            m: vec![S::zero(); t + 2],
            v: vec![S::zero(); t + 2],
            step: 0,
        }
    }

    pub fn step_count(&self) -> usize {
        self.step
    }
}

/// One bias-corrected Adam update followed by projection of the step sizes
/// and lambda onto their lower bounds.
pub fn adam_step<S: Real>(
    state: &mut AdamState<S>,
    params: &DuParams<S>,
    grads: &DuGrads<S>,
    learning_rate: S,
) -> Result<DuParams<S>> {
    let p = params.to_vec();
    let g = grads.to_vec();
    check_len("gradient vector", p.len(), g.len())?;
    check_len("adam accumulators", p.len(), state.m.len())?;

    state.step += 1;
    let b1 = S::of(ADAM_BETA1);
    let b2 = S::of(ADAM_BETA2);
    let eps = S::of(ADAM_EPS);
    let t = S::of(state.step as f64);
    let corr1 = S::one() - b1.powf(t);
    let corr2 = S::one() - b2.powf(t);

    let mut out = Vec::with_capacity(p.len());
    for i in 0..p.len() {
        state.m[i] = b1 * state.m[i] + (S::one() - b1) * g[i];
        state.v[i] = b2 * state.v[i] + (S::one() - b2) * g[i] * g[i];
        let m_hat = state.m[i] / corr1;
        let v_hat = state.v[i] / corr2;
        out.push(p[i] - learning_rate * m_hat / (v_hat.sqrt() + eps));
    }
    DuParams::from_vec_projected(&out)
}

/// Forward + backward over one batch; returns the batch loss and the
/// parameter gradients of the batch-mean MSE.
///
/// The batch is processed in fixed chunks of [`CHUNK`] samples; chunks may
/// run in parallel but are reduced in index order.
pub fn batch_loss_and_grads<S: Real>(
    sys: &LmSystem<S>,
    batch: &TrainBatch<S>,
    params: &DuParams<S>,
    fixed: &DuFixed<S>,
) -> Result<(S, DuGrads<S>)> {
    let b = batch.len();
    let n = batch.channel.n();
    let total = S::of((b * n) as f64);

    let ranges: Vec<(usize, usize)> = (0..b)
        .step_by(CHUNK)
        .map(|s| (s, (s + CHUNK).min(b)))
        .collect();
    let partials: Vec<Result<(S, DuGrads<S>)>> = ranges
        .par_iter()
        .map(|&(lo, hi)| {
            let rows = lo..hi;
            let received = batch.received.slice(ndarray::s![rows.clone(), ..]);
            let x_true = batch.x_true.slice(ndarray::s![rows.clone(), ..]);
            let y0 = batch.y0.slice(ndarray::s![rows.clone(), ..]);
            let x0 = Array2::<S>::zeros((hi - lo, n));
            let (out, trace) = du_forward_batch(sys, &received, params, fixed, &x0.view(), &y0)?;
            let mut sq = S::zero();
            let mut gout = Array2::<S>::zeros((hi - lo, n));
            ndarray::Zip::from(&mut gout)
                .and(&out)
                .and(&x_true)
                .for_each(|g, &o, &t| {
                    let d = o - t;
                    sq += d * d;
                    *g = S::of(2.0) * d / total;
                });
            let grads = du_backward_batch(&trace, &gout.view())?;
            Ok((sq, grads))
        })
        .collect();

    let mut loss_sq = S::zero();
    let mut grads = DuGrads::<S>::zeros(params.t());
    for part in partials {
        let (sq, g) = part?;
        loss_sq += sq;
        for i in 0..params.t() {
            grads.deltas[i] += g.deltas[i];
        }
        grads.eta += g.eta;
        grads.lambda += g.lambda;
    }
    Ok((loss_sq / total, grads))
}

/// Evaluates the batch-mean MSE of the unrolled output for fixed parameters
/// (no gradients); used for held-out monitoring.
pub fn batch_loss<S: Real>(
    batch: &TrainBatch<S>,
    params: &DuParams<S>,
    fixed: &DuFixed<S>,
) -> Result<S> {
    let sys = LmSystem::new(&batch.channel, params.lambda)?;
    let n = batch.channel.n();
    let x0 = Array2::<S>::zeros((batch.len(), n));
    let (out, _trace) = du_forward_batch(
        &sys,
        &batch.received.view(),
        params,
        fixed,
        &x0.view(),
        &batch.y0.view(),
    )?;
    Ok(mse_loss_2d(&out.view(), &batch.x_true.view()))
}

/// Runs the whole training loop; returns the final parameters and the
/// per-update loss history.
pub fn train<S: Real>(cfg: &TrainConfig<S>) -> Result<(DuParams<S>, Vec<S>)> {
    cfg.validate()?;
    let mut params = DuParams::<S>::init(cfg.t);
    let mut adam = AdamState::<S>::new(cfg.t);
    let mut history = Vec::with_capacity(cfg.num_updates);

    for update in 0..cfg.num_updates {
        let mut rng = rng_from(cfg.seed, &[TRAIN_STREAM, update as u64]);
        let batch = make_batch(cfg, &mut rng);
        let sys = LmSystem::new(&batch.channel, params.lambda)?;
        let (loss, grads) = batch_loss_and_grads(&sys, &batch, &params, &cfg.fixed)?;
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss {
                update,
                loss: loss.as_f64(),
            });
        }
        params = adam_step(&mut adam, &params, &grads, cfg.learning_rate)?;
        history.push(loss);
    }
    Ok((params, history))
}

/// Serialized form of a trained parameter set (schema version 1).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamsFile {
    pub format_version: u32,
    #[serde(rename = "T")]
    pub t: usize,
    pub deltas: Vec<f64>,
    pub eta: f64,
    pub lambda: f64,
    pub fixed: FixedSection,
    pub training: TrainingSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FixedSection {
    #[serde(rename = "Lambda")]
    pub clip_sharpness: f64,
    #[serde(rename = "A")]
    pub well_sharpness: f64,
    #[serde(rename = "B")]
    pub well_threshold: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainingSection {
    pub seed: u64,
    pub dims: DimsSection,
    pub snr_range_db: [f64; 2],
    pub num_updates: usize,
    pub batch_size: usize,
    pub final_loss: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DimsSection {
    pub n_t: usize,
    pub n_r: usize,
}

impl ParamsFile {
    pub fn from_training(cfg: &TrainConfig<f64>, params: &DuParams<f64>, final_loss: f64) -> Self {
        Self {
            format_version: 1,
            t: params.t(),
            deltas: params.deltas.clone(),
            eta: params.eta,
            lambda: params.lambda,
            fixed: FixedSection {
                clip_sharpness: cfg.fixed.clip_sharpness,
                well_sharpness: cfg.fixed.well_sharpness,
                well_threshold: cfg.fixed.well_threshold,
            },
            training: TrainingSection {
                seed: cfg.seed,
                dims: DimsSection {
                    n_t: cfg.dims.n_t(),
                    n_r: cfg.dims.n_r(),
                },
                snr_range_db: [cfg.snr_range_db.0, cfg.snr_range_db.1],
                num_updates: cfg.num_updates,
                batch_size: cfg.batch_size,
                final_loss,
            },
        }
    }

    pub fn params(&self) -> Result<DuParams<f64>> {
        if self.deltas.len() != self.t {
            return Err(Error::ParamsFile(format!(
                "deltas length {} does not match T = {}",
                self.deltas.len(),
                self.t
            )));
        }
        DuParams::new(self.deltas.clone(), self.eta, self.lambda)
    }

    pub fn fixed(&self) -> Result<DuFixed<f64>> {
        DuFixed::new(
            self.fixed.clip_sharpness,
            self.fixed.well_sharpness,
            self.fixed.well_threshold,
        )
    }
}

/// Writes a trained parameter set as JSON (full f64 round-trip precision).
pub fn save_params(file: &ParamsFile, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(file)?;
    fs::write(path, text)?;
    Ok(())
}

/// Reads and validates a trained parameter set.
pub fn load_params(path: &Path) -> Result<ParamsFile> {
    let text = fs::read_to_string(path)?;
    let file: ParamsFile = serde_json::from_str(&text)?;
    if file.format_version != 1 {
        return Err(Error::ParamsFile(format!(
            "unsupported format version {}",
            file.format_version
        )));
    }
    file.params()?;
    file.fixed()?;
    Ok(file)
}
