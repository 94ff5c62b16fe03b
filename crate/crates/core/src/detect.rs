//! Uniform detector interface producing hard +-1 decisions.

use std::path::PathBuf;

use ndarray::{Array1, Array2, ArrayView1};
use rand::Rng;

use crate::channel::MimoSample;
use crate::du::{du_forward_batch, DuFixed, DuParams, LmSystem};
use crate::error::{check_len, Error, Result};
use crate::qubo::{build_g, build_lm, build_ml, lmmse_solution, GConfig, LmConfig, QuboInstance};
use crate::sb::{sb_run, SbConfig};
use crate::scalar::{sign_pm1, Real};
use crate::trainer::load_params;

/// Detector families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectorKind {
    Mmse,
    MlSb,
    GSb,
    LmSb,
    DuLmSb,
}

/// Declarative detector description (what the CLI and sweep configs carry).
#[derive(Debug, Clone)]
pub struct DetectorSpec<S> {
    pub kind: DetectorKind,
    /// Iteration count for the SB kinds.
    pub iters: usize,
    /// LM regularizer (LM-SB).
    pub lambda: S,
    /// Guide penalty (G-SB).
    pub lambda_g: S,
    /// Trained parameter file (DU-LM-SB only).
    pub params_path: Option<PathBuf>,
    /// Optional override of the MMSE regularizer; defaults to the sample's
    /// true noise variance.
    pub mmse_reg: Option<S>,
}

impl<S: Real> DetectorSpec<S> {
    pub fn mmse() -> Self {
        Self {
            kind: DetectorKind::Mmse,
            iters: 1,
            lambda: S::one(),
            lambda_g: S::of(0.5),
            params_path: None,
            mmse_reg: None,
        }
    }

    pub fn ml_sb(iters: usize) -> Self {
        Self {
            kind: DetectorKind::MlSb,
            ..Self::mmse()
        }
        .with_iters(iters)
    }

    pub fn g_sb(iters: usize, lambda_g: S) -> Self {
        let mut s = Self::mmse();
        s.kind = DetectorKind::GSb;
        s.iters = iters;
        s.lambda_g = lambda_g;
        s
    }

    pub fn lm_sb(iters: usize, lambda: S) -> Self {
        let mut s = Self::mmse();
        s.kind = DetectorKind::LmSb;
        s.iters = iters;
        s.lambda = lambda;
        s
    }

    pub fn du_lm_sb(params_path: PathBuf) -> Self {
        let mut s = Self::mmse();
        s.kind = DetectorKind::DuLmSb;
        s.params_path = Some(params_path);
        s
    }

    fn with_iters(mut self, iters: usize) -> Self {
        self.iters = iters;
        self
    }
}

/// Runnable detector; DU parameters are loaded once at construction.
#[derive(Debug, Clone)]
pub struct Detector<S> {
    spec: DetectorSpec<S>,
    du: Option<(DuParams<S>, DuFixed<S>)>,
    label: String,
}

fn fmt_scalar(v: f64) -> String {
    format!("{v}")
}

impl<S: Real> Detector<S> {
    pub fn from_spec(spec: DetectorSpec<S>) -> Result<Self> {
        let du = match spec.kind {
            DetectorKind::DuLmSb => {
                let path = spec.params_path.as_ref().ok_or_else(|| {
                    Error::InvalidConfig("du-lm-sb requires a trained parameter file".into())
                })?;
                let file = load_params(path)?;
                let params = file.params()?.cast::<S>();
                let fixed = file.fixed()?;
                let fixed = DuFixed::new(
                    S::of(fixed.clip_sharpness),
                    S::of(fixed.well_sharpness),
                    S::of(fixed.well_threshold),
                )?;
                Some((params, fixed))
            }
            _ => None,
        };
        Ok(Self::assemble(spec, du))
    }

    /// Builds the DU detector from in-memory parameters (no file).
    pub fn du_from_params(params: DuParams<S>, fixed: DuFixed<S>) -> Self {
        let mut spec = DetectorSpec::mmse();
        spec.kind = DetectorKind::DuLmSb;
        spec.iters = params.t();
        Self::assemble(spec, Some((params, fixed)))
    }

    fn assemble(spec: DetectorSpec<S>, du: Option<(DuParams<S>, DuFixed<S>)>) -> Self {
        let label = match spec.kind {
            DetectorKind::Mmse => "mmse".to_string(),
            DetectorKind::MlSb => format!("ml-sb-t{}", spec.iters),
            DetectorKind::GSb => format!(
                "g-sb-t{}-lg{}",
                spec.iters,
                fmt_scalar(spec.lambda_g.as_f64())
            ),
            DetectorKind::LmSb => format!(
                "lm-sb-t{}-l{}",
                spec.iters,
                fmt_scalar(spec.lambda.as_f64())
            ),
            DetectorKind::DuLmSb => {
                let t = du.as_ref().map(|(p, _)| p.t()).unwrap_or(spec.iters);
                format!("du-lm-sb-t{t}")
            }
        };
        Self { spec, du, label }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn kind(&self) -> DetectorKind {
        self.spec.kind
    }

    /// Hard +-1 decision for one received sample.
    pub fn detect<R: Rng + ?Sized>(
        &self,
        sample: &MimoSample<S>,
        rng: &mut R,
    ) -> Result<Array1<S>> {
        let channel = &sample.channel;
        check_len("received vector", channel.m(), sample.y.len())?;
        match self.spec.kind {
            DetectorKind::Mmse => {
                let reg = self.spec.mmse_reg.unwrap_or(sample.sigma_w2);
                let est = lmmse_solution(channel, &sample.y.view(), reg)?;
                Ok(hard_decision(&est.view()))
            }
            DetectorKind::MlSb => {
                let q = build_ml(channel, &sample.y.view())?;
                self.run_sb(&q, rng)
            }
            DetectorKind::GSb => {
                let cfg = GConfig::new(self.spec.lambda_g, sample.sigma_w2)?;
                let q = build_g(channel, &sample.y.view(), &cfg)?;
                self.run_sb(&q, rng)
            }
            DetectorKind::LmSb => {
                let cfg = LmConfig::new(self.spec.lambda)?;
                let q = build_lm(channel, &sample.y.view(), &cfg)?;
                self.run_sb(&q, rng)
            }
            DetectorKind::DuLmSb => {
                let (params, fixed) = self
                    .du
                    .as_ref()
                    .ok_or_else(|| Error::InvalidConfig("du-lm-sb parameters missing".into()))?;
                match LmSystem::new(channel, params.lambda) {
                    Ok(sys) => {
                        let n = channel.n();
                        let received = sample
                            .y
                            .clone()
                            .into_shape_with_order((1, channel.m()))
                            .expect("row reshape");
                        let x0 = Array2::<S>::zeros((1, n));
                        let amp = S::of(0.1);
                        let y0 = Array2::from_shape_fn((1, n), |_| S::uniform(rng, -amp, amp));
                        let (out, _trace) = du_forward_batch(
                            &sys,
                            &received.view(),
                            params,
                            fixed,
                            &x0.view(),
                            &y0.view(),
                        )?;
                        Ok(hard_decision(&out.row(0)))
                    }
                    // Zero couplings make the instance separable; the
                    // dynamics then just follow the field -2 U y.
                    Err(Error::DegenerateInstance) => {
                        let est = lmmse_solution(channel, &sample.y.view(), params.lambda)?;
                        Ok(hard_decision(&est.view()))
                    }
                    Err(e) => Err(e),
                }
            }
        }
    }

    fn run_sb<R: Rng + ?Sized>(&self, q: &QuboInstance<S>, rng: &mut R) -> Result<Array1<S>> {
        match SbConfig::for_instance(q, self.spec.iters) {
            Ok(cfg) => sb_run(q, &cfg, rng),
            // Separable instance: minimize h^T s directly.
            Err(Error::DegenerateInstance) => Ok(q.h().mapv(|h| sign_pm1(-h))),
            Err(e) => Err(e),
        }
    }
}

/// Elementwise sign with sign(0) = +1.
pub fn hard_decision<S: Real>(x: &ArrayView1<S>) -> Array1<S> {
    x.mapv(sign_pm1)
}

/// Fraction of differing components.
pub fn ber<S: Real>(decisions: &ArrayView1<S>, truth: &ArrayView1<S>) -> Result<S> {
    check_len("decision vector", truth.len(), decisions.len())?;
    if truth.is_empty() {
        return Err(Error::InvalidConfig("empty vectors".into()));
    }
    let errors = decisions
        .iter()
        .zip(truth.iter())
        .filter(|(a, b)| a != b)
        .count();
    Ok(S::of(errors as f64) / S::of(truth.len() as f64))
}
