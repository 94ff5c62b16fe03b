//! Discrete ballistic simulated-bifurcation solver.
//!
//! State (x, y) evolves under a symplectic (momentum-first) Euler step with
//! inelastic walls at |x_i| = 1:
//!
//! ```text
//!   y <- y - Delta [ (1 - a(k)) x + (c0/4) (2 J x + h) ]
//!   x <- x + Delta y
//!   if |x_i| > 1:  x_i <- sign(x_i), y_i <- 0
//! ```
//!
//! with a(k) = k/T ramping the confinement away. The coupling kick is
//! proportional to the energy gradient 2Jx + h; the c0/4 scale keeps the
//! linear phase at the edge of stability for the default c0 so that
//! converged runs sit in single-flip local minima of the energy.

use ndarray::Array1;
use rand::Rng;

use crate::error::{Error, Result};
use crate::qubo::QuboInstance;
use crate::scalar::{sign_pm1, Real};

/// Solver schedule and scales.
#[derive(Debug, Clone, Copy)]
pub struct SbConfig<S> {
    /// Iteration count T.
    pub iters: usize,
    /// Time step Delta.
    pub delta: S,
    /// Coupling scale; default from [`QuboInstance::c0`].
    pub c0: S,
    /// Evaluate both updates at the pre-step state (the non-symplectic
    /// variant); off by default.
    pub synchronous: bool,
}

impl<S: Real> SbConfig<S> {
    /// Default configuration for an instance: Delta = 1, c0 from the
    /// instance couplings.
    pub fn for_instance(q: &QuboInstance<S>, iters: usize) -> Result<Self> {
        if iters == 0 {
            return Err(Error::InvalidConfig("iteration count must be >= 1".into()));
        }
        Ok(Self {
            iters,
            delta: S::one(),
            c0: q.c0()?,
            synchronous: false,
        })
    }
}

/// Position/momentum pair with the iteration index.
#[derive(Debug, Clone)]
pub struct SbState<S> {
    pub x: Array1<S>,
    pub y: Array1<S>,
    pub k: usize,
}

/// Random start: x = 0, y_i uniform on [-0.1, 0.1].
pub fn init_state<S: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> SbState<S> {
    let amp = S::of(0.1);
    SbState {
        x: Array1::zeros(n),
        y: Array1::from_shape_fn(n, |_| S::uniform(rng, -amp, amp)),
        k: 0,
    }
}

fn step_in_place<S: Real>(
    q: &QuboInstance<S>,
    x: &mut Array1<S>,
    y: &mut Array1<S>,
    k: usize,
    cfg: &SbConfig<S>,
) {
    let a = S::of(k as f64) / S::of(cfg.iters as f64);
    let confine = S::one() - a;
    let quarter_c0 = cfg.c0 / S::of(4.0);
    let two = S::of(2.0);
    let jx = q.j().dot(&*x);

    if cfg.synchronous {
        let x_next = &*x + &y.mapv(|v| v * cfg.delta);
        for i in 0..x.len() {
            let kick = confine * x[i] + quarter_c0 * (two * jx[i] + q.h()[i]);
            y[i] -= cfg.delta * kick;
        }
        x.assign(&x_next);
    } else {
        for i in 0..x.len() {
            let kick = confine * x[i] + quarter_c0 * (two * jx[i] + q.h()[i]);
            y[i] -= cfg.delta * kick;
            x[i] += cfg.delta * y[i];
        }
    }
    for i in 0..x.len() {
        if x[i].abs() > S::one() {
            x[i] = sign_pm1(x[i]);
            y[i] = S::zero();
        }
    }
}

/// One solver step; requires `s.k < cfg.iters`.
pub fn sb_step<S: Real>(
    q: &QuboInstance<S>,
    s: &SbState<S>,
    cfg: &SbConfig<S>,
) -> Result<SbState<S>> {
    if s.k >= cfg.iters {
        return Err(Error::InvalidConfig(format!(
            "step index {} out of range for T = {}",
            s.k, cfg.iters
        )));
    }
    if s.x.len() != q.n() {
        return Err(Error::DimMismatch {
            what: "solver state",
            expected: q.n(),
            got: s.x.len(),
        });
    }
    let mut x = s.x.clone();
    let mut y = s.y.clone();
    step_in_place(q, &mut x, &mut y, s.k, cfg);
    Ok(SbState { x, y, k: s.k + 1 })
}

/// Runs T steps from a random start and reads out sign(x(T)) with
/// sign(0) = +1.
pub fn sb_run<S: Real, R: Rng + ?Sized>(
    q: &QuboInstance<S>,
    cfg: &SbConfig<S>,
    rng: &mut R,
) -> Result<Array1<S>> {
    let st = init_state::<S, _>(q.n(), rng);
    let mut x = st.x;
    let mut y = st.y;
    for k in 0..cfg.iters {
        step_in_place(q, &mut x, &mut y, k, cfg);
    }
    Ok(x.mapv(sign_pm1))
}
