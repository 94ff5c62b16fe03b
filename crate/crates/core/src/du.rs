//! Differentiable unfolded solver with exact reverse-mode gradients.
//!
//! The hard clip and momentum reset of the plain solver are replaced by the
//! smooth surrogates
//!
//! ```text
//!   phi_s(x; L)   = (sw(L(x+1)) - sw(L(x-1)))/L - 1      (soft clip)
//!   psi_s(x; A,B) = sigmoid(A(|x| - B))                  (soft square well)
//! ```
//!
//! so the whole T-step unroll is differentiable in the step sizes
//! {Delta_k}, the coupling strength eta, and the regularizer lambda of the
//! underlying LM instance. Gradients are accumulated by hand in reverse,
//! including the paths through the normalized schedule a(k), through J and h,
//! and through c0 (which depends on lambda via J).

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Zip};

use crate::channel::{
    noise_variance_from_snr, realize_channel, sample_qpsk, transmit, ComplexDims, RealChannel,
};
use crate::error::{check_len, Error, Result};
use crate::linalg::{chol_solve_mat, cholesky};
use crate::qubo::QuboInstance;
use crate::sb::SbState;
use crate::scalar::Real;
use crate::seeds::rng_from;

/// Lower bound kept by projection for every Delta_k and for lambda.
pub const DELTA_MIN: f64 = 1e-3;
pub const LAMBDA_MIN: f64 = 1e-3;

fn sigmoid<S: Real>(u: S) -> S {
    if u >= S::zero() {
        S::one() / (S::one() + (-u).exp())
    } else {
        let e = u.exp();
        e / (S::one() + e)
    }
}

// The swish difference is evaluated through the even function
// g(u) = u tanh(u/2) = 2 sw(u) - u, which makes the odd symmetry and the
// zero fixed point of phi_s hold bit-exactly (libm tanh is odd).
fn swish_even_part<S: Real>(u: S) -> S {
    u * (u / S::of(2.0)).tanh()
}

fn swish_even_part_deriv<S: Real>(u: S) -> S {
    let th = (u / S::of(2.0)).tanh();
    th + u / S::of(2.0) * (S::one() - th * th)
}

/// Smooth clip (sw(L(x+1)) - sw(L(x-1)))/L - 1 with sw the Swish function.
/// Odd, strictly increasing, within 2 ln2 / sharpness of the hard clip
/// everywhere.
pub fn phi_s<S: Real>(x: S, sharpness: S) -> S {
    let u1 = sharpness * (x + S::one());
    let u2 = sharpness * (x - S::one());
    (swish_even_part(u1) - swish_even_part(u2)) / (S::of(2.0) * sharpness)
}

/// d phi_s / dx.
pub fn phi_s_deriv<S: Real>(x: S, sharpness: S) -> S {
    let u1 = sharpness * (x + S::one());
    let u2 = sharpness * (x - S::one());
    (swish_even_part_deriv(u1) - swish_even_part_deriv(u2)) / S::of(2.0)
}

/// Smooth square well: ~0 inside |x| < threshold, ~1 outside.
pub fn psi_s<S: Real>(x: S, sharpness: S, threshold: S) -> S {
    sigmoid(sharpness * (x.abs() - threshold))
}

/// d psi_s / dx.
pub fn psi_s_deriv<S: Real>(x: S, sharpness: S, threshold: S) -> S {
    let s = sigmoid(sharpness * (x.abs() - threshold));
    s * (S::one() - s) * sharpness * x.signum()
}

/// Trainable parameters: per-step sizes plus the two scalars.
#[derive(Debug, Clone, PartialEq)]
pub struct DuParams<S> {
    pub deltas: Vec<S>,
    pub eta: S,
    pub lambda: S,
}

impl<S: Real> DuParams<S> {
    /// Initial values Delta_k = 1, eta = lambda = 1.
    pub fn init(t: usize) -> Self {
        Self {
            deltas: vec![S::one(); t],
            eta: S::one(),
            lambda: S::one(),
        }
    }

    pub fn new(deltas: Vec<S>, eta: S, lambda: S) -> Result<Self> {
        if deltas.is_empty() {
            return Err(Error::InvalidConfig("need at least one step size".into()));
        }
        if deltas.iter().any(|&d| d < S::of(DELTA_MIN)) {
            return Err(Error::InvalidConfig(format!(
                "step sizes must be >= {DELTA_MIN}"
            )));
        }
        if lambda < S::of(LAMBDA_MIN) {
            return Err(Error::InvalidConfig(format!(
                "lambda must be >= {LAMBDA_MIN}"
            )));
        }
        Ok(Self {
            deltas,
            eta,
            lambda,
        })
    }

    pub fn t(&self) -> usize {
        self.deltas.len()
    }

    /// Flat layout [Delta_0 .. Delta_{T-1}, eta, lambda] used by the
    /// optimizer.
    pub fn to_vec(&self) -> Vec<S> {
        let mut v = self.deltas.clone();
        v.push(self.eta);
        v.push(self.lambda);
        v
    }

    /// Inverse of [`to_vec`], with the projection onto the feasible set.
    pub fn from_vec_projected(v: &[S]) -> Result<Self> {
        if v.len() < 3 {
            return Err(Error::InvalidConfig("parameter vector too short".into()));
        }
        let t = v.len() - 2;
        let deltas = v[..t]
            .iter()
            .map(|&d| d.max(S::of(DELTA_MIN)))
            .collect::<Vec<_>>();
        Self::new(deltas, v[t], v[t + 1].max(S::of(LAMBDA_MIN)))
    }

    /// Precision-changing cast (used to run a trained f64 file at f32).
    pub fn cast<T: Real>(&self) -> DuParams<T> {
        DuParams {
            deltas: self.deltas.iter().map(|d| T::of(d.as_f64())).collect(),
            eta: T::of(self.eta.as_f64()),
            lambda: T::of(self.lambda.as_f64()),
        }
    }
}

/// Fixed smoothness constants of the surrogates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DuFixed<S> {
    /// Clip sharpness (Lambda).
    pub clip_sharpness: S,
    /// Well sharpness (A).
    pub well_sharpness: S,
    /// Well threshold (B).
    pub well_threshold: S,
}

impl<S: Real> Default for DuFixed<S> {
    fn default() -> Self {
        Self {
            clip_sharpness: S::of(10.0),
            well_sharpness: S::of(100.0),
            well_threshold: S::of(1.01),
        }
    }
}

impl<S: Real> DuFixed<S> {
    pub fn new(clip_sharpness: S, well_sharpness: S, well_threshold: S) -> Result<Self> {
        if clip_sharpness <= S::zero() || well_sharpness <= S::zero() {
            return Err(Error::InvalidConfig(
                "sharpness constants must be > 0".into(),
            ));
        }
        if well_threshold < S::one() {
            return Err(Error::InvalidConfig("well threshold must be >= 1".into()));
        }
        Ok(Self {
            clip_sharpness,
            well_sharpness,
            well_threshold,
        })
    }
}

/// Per-(channel, lambda) data shared by every sample of a batch: the LM
/// instance, its coupling scale, and the lambda-derivatives needed in the
/// backward pass.
#[derive(Debug, Clone)]
pub struct LmSystem<S> {
    pub q: QuboInstance<S>,
    pub c0: S,
    lambda: S,
    frob2: S,
    /// U = H^T K^-1, maps a received vector to -h/2.
    u: Array2<S>,
    /// H^T K^-2, maps a received vector to dh/dlambda / 2.
    u2: Array2<S>,
    /// d(J)/d(lambda) = -(K^-1 H)^T (K^-1 H) with the diagonal removed.
    dj_dlambda: Array2<S>,
}

impl<S: Real> LmSystem<S> {
    pub fn new(channel: &RealChannel<S>, lambda: S) -> Result<Self> {
        if lambda <= S::zero() {
            return Err(Error::InvalidConfig("lambda must be > 0".into()));
        }
        let h = channel.h();
        let (m, n) = (channel.m(), channel.n());
        let mut k = h.dot(&h.t());
        for i in 0..m {
            k[[i, i]] += lambda;
        }
        let l = cholesky(&k.view())?;
        let w = chol_solve_mat(&l, &h.view()); // K^-1 H
        let w2 = chol_solve_mat(&l, &w.view()); // K^-2 H

        let prod = w.t().dot(h);
        let half = S::of(0.5);
        let mut j = Array2::<S>::zeros((n, n));
        for i in 0..n {
            for c in 0..i {
                let v = half * (prod[[i, c]] + prod[[c, i]]);
                j[[i, c]] = v;
                j[[c, i]] = v;
            }
        }
        let frob2 = j.iter().map(|&v| v * v).fold(S::zero(), |a, b| a + b);
        if frob2 == S::zero() {
            return Err(Error::DegenerateInstance);
        }
        let c0 = S::of(2.0) * (S::of((n - 1) as f64) / frob2).sqrt();

        let mut dj = w.t().dot(&w).mapv(|v| -v);
        let djt = dj.t().to_owned();
        dj = (&dj + &djt).mapv(|v| v * half);
        for i in 0..n {
            dj[[i, i]] = S::zero();
        }

        let q = QuboInstance::new(j, Array1::zeros(n))?;
        Ok(Self {
            q,
            c0,
            lambda,
            frob2,
            u: w.t().to_owned(),
            u2: w2.t().to_owned(),
            dj_dlambda: dj,
        })
    }

    pub fn lambda(&self) -> S {
        self.lambda
    }

    /// Field vector h = -2 U y for one received vector.
    pub fn field_for(&self, y: &ArrayView1<S>) -> Result<Array1<S>> {
        check_len("received vector", self.u.ncols(), y.len())?;
        Ok(self.u.dot(y).mapv(|v| v * -S::of(2.0)))
    }

    /// The LM instance (couplings plus field) for one received vector.
    pub fn instance_for(&self, y: &ArrayView1<S>) -> Result<QuboInstance<S>> {
        QuboInstance::new(self.q.j().clone(), self.field_for(y)?)
    }
}

/// Everything the backward pass needs, captured during a forward unroll.
///
/// Rows index batch samples; a single-sample forward is a batch of one.
#[derive(Debug, Clone)]
pub struct DuTrace<S> {
    // positions x(k), k = 0..=T (x(T) is the output before thresholding)
    xs: Vec<Array2<S>>,
    // momenta y(k), k = 0..=T
    ys: Vec<Array2<S>>,
    // pre-smoothing positions and momenta, k = 0..T-1
    xts: Vec<Array2<S>>,
    yts: Vec<Array2<S>>,
    a: Vec<S>,
    s_total: S,
    params: DuParams<S>,
    fixed: DuFixed<S>,
    j: Array2<S>,
    fields: Array2<S>,
    c0: S,
    frob2: S,
    dj_dlambda: Array2<S>,
    dfields_dlambda: Array2<S>,
}

impl<S: Real> DuTrace<S> {
    pub fn t(&self) -> usize {
        self.params.t()
    }

    pub fn batch(&self) -> usize {
        self.xs[0].nrows()
    }

    pub fn n(&self) -> usize {
        self.xs[0].ncols()
    }

    /// The unrolled output x(T).
    pub fn output(&self) -> &Array2<S> {
        self.xs.last().expect("trace holds T+1 positions")
    }

    /// Positions x(0), x(1), ..., x(T) (rows index batch samples).
    pub fn positions(&self) -> &[Array2<S>] {
        &self.xs
    }

    /// Re-executes the recursion from the stored start; bit-identical to the
    /// recorded output.
    pub fn replay(&self) -> Array2<S> {
        let mut x = self.xs[0].clone();
        let mut y = self.ys[0].clone();
        unroll(
            &self.j,
            &self.fields,
            self.c0,
            &self.params,
            &self.fixed,
            &self.a,
            &mut x,
            &mut y,
            None,
        );
        x
    }
}

/// Gradients with respect to the trainable parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct DuGrads<S> {
    pub deltas: Vec<S>,
    pub eta: S,
    pub lambda: S,
}

impl<S: Real> DuGrads<S> {
    pub fn zeros(t: usize) -> Self {
        Self {
            deltas: vec![S::zero(); t],
            eta: S::zero(),
            lambda: S::zero(),
        }
    }

    pub fn to_vec(&self) -> Vec<S> {
        let mut v = self.deltas.clone();
        v.push(self.eta);
        v.push(self.lambda);
        v
    }
}

fn schedule<S: Real>(deltas: &[S]) -> (Vec<S>, S) {
    let s_total = deltas.iter().fold(S::zero(), |a, &b| a + b);
    let mut acc = S::zero();
    let a = deltas
        .iter()
        .map(|&d| {
            acc += d;
            acc / s_total
        })
        .collect();
    (a, s_total)
}

/// Recorder target: (x, y, x-tilde, y-tilde) step logs.
type Recorder<'a, S> = (
    &'a mut Vec<Array2<S>>,
    &'a mut Vec<Array2<S>>,
    &'a mut Vec<Array2<S>>,
    &'a mut Vec<Array2<S>>,
);

/// The core recursion; optionally records every intermediate into `record`.
#[allow(clippy::too_many_arguments)]
fn unroll<S: Real>(
    j: &Array2<S>,
    fields: &Array2<S>,
    c0: S,
    params: &DuParams<S>,
    fixed: &DuFixed<S>,
    a: &[S],
    x: &mut Array2<S>,
    y: &mut Array2<S>,
    mut record: Option<Recorder<'_, S>>,
) {
    let kappa = params.eta * c0 / S::of(4.0);
    let two = S::of(2.0);
    for (k, &dk) in params.deltas.iter().enumerate() {
        let confine = S::one() - a[k];
        // g = 2 J x + h, row-wise
        let mut g = x.dot(&j.t());
        g.mapv_inplace(|v| v * two);
        g += fields;

        let mut yt = y.clone();
        Zip::from(&mut yt)
            .and(&*x)
            .and(&g)
            .for_each(|yv, &xv, &gv| {
                *yv -= dk * (confine * xv + kappa * gv);
            });
        let mut xt = x.clone();
        Zip::from(&mut xt).and(&yt).for_each(|xv, &yv| {
            *xv += dk * yv;
        });

        let xn = xt.mapv(|v| phi_s(v, fixed.clip_sharpness));
        let mut yn = yt.clone();
        Zip::from(&mut yn).and(&xt).for_each(|yv, &xv| {
            *yv *= S::one() - psi_s(xv, fixed.well_sharpness, fixed.well_threshold);
        });

        if let Some((xs, ys, xts, yts)) = record.as_mut() {
            xts.push(xt);
            yts.push(yt);
            xs.push(xn.clone());
            ys.push(yn.clone());
        }
        *x = xn;
        *y = yn;
    }
}

/// Batched unroll of the smooth dynamics for samples sharing one channel.
///
/// `received` holds one received vector per row; `x0`/`y0` the per-sample
/// start state. Returns the outputs x(T) (rows) plus the trace for the
/// backward pass.
pub fn du_forward_batch<S: Real>(
    sys: &LmSystem<S>,
    received: &ArrayView2<S>,
    params: &DuParams<S>,
    fixed: &DuFixed<S>,
    x0: &ArrayView2<S>,
    y0: &ArrayView2<S>,
) -> Result<(Array2<S>, DuTrace<S>)> {
    if params.lambda != sys.lambda {
        return Err(Error::InvalidConfig(
            "system was built for a different lambda".into(),
        ));
    }
    let n = sys.q.n();
    let b = received.nrows();
    check_len("received width", sys.u.ncols(), received.ncols())?;
    if x0.nrows() != b || y0.nrows() != b {
        return Err(Error::DimMismatch {
            what: "start-state rows",
            expected: b,
            got: x0.nrows(),
        });
    }
    check_len("start-state width", n, x0.ncols())?;
    check_len("start-state width", n, y0.ncols())?;

    let fields = received.dot(&sys.u.t()).mapv(|v| v * -S::of(2.0));
    let dfields_dlambda = received.dot(&sys.u2.t()).mapv(|v| v * S::of(2.0));
    let (a, s_total) = schedule(&params.deltas);

    let mut x = x0.to_owned();
    let mut y = y0.to_owned();
    let mut xs = vec![x.clone()];
    let mut ys = vec![y.clone()];
    let mut xts = Vec::with_capacity(params.t());
    let mut yts = Vec::with_capacity(params.t());
    unroll(
        sys.q.j(),
        &fields,
        sys.c0,
        params,
        fixed,
        &a,
        &mut x,
        &mut y,
        Some((&mut xs, &mut ys, &mut xts, &mut yts)),
    );

    let trace = DuTrace {
        xs,
        ys,
        xts,
        yts,
        a,
        s_total,
        params: params.clone(),
        fixed: *fixed,
        j: sys.q.j().clone(),
        fields,
        c0: sys.c0,
        frob2: sys.frob2,
        dj_dlambda: sys.dj_dlambda.clone(),
        dfields_dlambda,
    };
    Ok((x, trace))
}

/// Single-sample unroll: builds the LM system for `params.lambda` and runs a
/// batch of one from the given start state.
pub fn du_forward<S: Real>(
    channel: &RealChannel<S>,
    y: &ArrayView1<S>,
    params: &DuParams<S>,
    fixed: &DuFixed<S>,
    init: &SbState<S>,
) -> Result<(Array1<S>, DuTrace<S>)> {
    let sys = LmSystem::new(channel, params.lambda)?;
    let received = y
        .to_owned()
        .into_shape_with_order((1, y.len()))
        .expect("row reshape");
    let x0 = init
        .x
        .clone()
        .into_shape_with_order((1, init.x.len()))
        .expect("row reshape");
    let y0 = init
        .y
        .clone()
        .into_shape_with_order((1, init.y.len()))
        .expect("row reshape");
    let (out, trace) = du_forward_batch(
        &sys,
        &received.view(),
        params,
        fixed,
        &x0.view(),
        &y0.view(),
    )?;
    Ok((out.row(0).to_owned(), trace))
}

/// Reverse-mode accumulation through a recorded unroll.
///
/// `loss_grad` is dLoss/dx(T), one row per batch sample (any batch-mean
/// normalization belongs to the caller). Returns exact gradients for every
/// Delta_k, eta, and lambda, including the schedule coupling of the
/// Delta_l, and the lambda paths through J, h and c0.
pub fn du_backward_batch<S: Real>(
    trace: &DuTrace<S>,
    loss_grad: &ArrayView2<S>,
) -> Result<DuGrads<S>> {
    let t = trace.t();
    let b = trace.batch();
    let n = trace.n();
    if loss_grad.nrows() != b || loss_grad.ncols() != n {
        return Err(Error::DimMismatch {
            what: "loss gradient",
            expected: b * n,
            got: loss_grad.len(),
        });
    }
    let params = &trace.params;
    let fixed = &trace.fixed;
    let two = S::of(2.0);
    let quarter = S::of(0.25);
    let kappa = params.eta * trace.c0 * quarter;

    let mut gx = loss_grad.to_owned();
    let mut gy = Array2::<S>::zeros((b, n));
    let mut d_deltas = vec![S::zero(); t];
    let mut g_a = vec![S::zero(); t];
    let mut d_eta = S::zero();
    let mut g_c0 = S::zero();
    let mut g_j = Array2::<S>::zeros((n, n));
    let mut g_fields = Array2::<S>::zeros((b, n));

    for k in (0..t).rev() {
        let dk = params.deltas[k];
        let confine = S::one() - trace.a[k];
        let xt = &trace.xts[k];
        let yt = &trace.yts[k];
        let xk = &trace.xs[k];

        // y(k+1) = yt * (1 - psi(xt));  x(k+1) = phi(xt)
        let mut gyt = Array2::<S>::zeros((b, n));
        let mut gxt = Array2::<S>::zeros((b, n));
        Zip::from(&mut gyt)
            .and(&mut gxt)
            .and(&gy)
            .and(&gx)
            .and(xt)
            .and(yt)
            .for_each(|gyt_v, gxt_v, &gy_v, &gx_v, &xt_v, &yt_v| {
                let ps = psi_s(xt_v, fixed.well_sharpness, fixed.well_threshold);
                let dps = psi_s_deriv(xt_v, fixed.well_sharpness, fixed.well_threshold);
                *gyt_v = gy_v * (S::one() - ps);
                *gxt_v = gx_v * phi_s_deriv(xt_v, fixed.clip_sharpness) - gy_v * yt_v * dps;
            });

        // xt = x(k) + dk * yt
        let mut d_dk = Zip::from(&gxt)
            .and(yt)
            .fold(S::zero(), |acc, &g, &v| acc + g * v);
        let gx_next = gxt.clone();
        Zip::from(&mut gyt).and(&gxt).for_each(|gyt_v, &gxt_v| {
            *gyt_v += dk * gxt_v;
        });

        // yt = y(k) - dk * (confine * x(k) + kappa * (2 J x(k) + h))
        let mut g = xk.dot(&trace.j.t());
        g.mapv_inplace(|v| v * two);
        g += &trace.fields;

        d_dk -= Zip::from(&gyt)
            .and(xk)
            .and(&g)
            .fold(S::zero(), |acc, &gv, &xv, &gg| {
                acc + gv * (confine * xv + kappa * gg)
            });
        g_a[k] += dk
            * Zip::from(&gyt)
                .and(xk)
                .fold(S::zero(), |acc, &gv, &xv| acc + gv * xv);
        let dot_gyt_g = Zip::from(&gyt)
            .and(&g)
            .fold(S::zero(), |acc, &gv, &gg| acc + gv * gg);
        d_eta -= dk * (trace.c0 * quarter) * dot_gyt_g;
        g_c0 -= dk * (params.eta * quarter) * dot_gyt_g;

        // contribution to gx(k): -dk (confine gyt + 2 kappa J gyt)  [J symmetric]
        let jgyt = gyt.dot(&trace.j.t());
        let mut gx_new = gx_next;
        Zip::from(&mut gx_new)
            .and(&gyt)
            .and(&jgyt)
            .for_each(|out, &gv, &jg| {
                *out -= dk * (confine * gv + two * kappa * jg);
            });
        // dJ contribution: -2 dk kappa * gyt^T x(k)
        let outer = gyt.t().dot(xk);
        let scale = -two * dk * kappa;
        Zip::from(&mut g_j).and(&outer).for_each(|gj, &o| {
            *gj += scale * o;
        });
        // dh contribution
        Zip::from(&mut g_fields).and(&gyt).for_each(|gf, &gv| {
            *gf -= dk * kappa * gv;
        });

        d_deltas[k] += d_dk;
        gx = gx_new;
        gy = gyt;
    }

    // Schedule coupling: a_k = (sum_{l<=k} Delta_l) / S,
    // d a_k / d Delta_m = (1{m<=k} - a_k) / S.
    let weighted: S = g_a
        .iter()
        .zip(trace.a.iter())
        .fold(S::zero(), |acc, (&g, &a)| acc + g * a);
    let mut suffix = S::zero();
    for k in (0..t).rev() {
        suffix += g_a[k];
        d_deltas[k] += (suffix - weighted) / trace.s_total;
    }

    // c0 path folds into the coupling adjoint: d c0 / d J = -(c0 / F) J.
    let c0_scale = -g_c0 * trace.c0 / trace.frob2;
    Zip::from(&mut g_j).and(&trace.j).for_each(|gj, &jv| {
        *gj += c0_scale * jv;
    });

    // lambda path through J and through every per-sample field.
    let mut d_lambda = Zip::from(&g_j)
        .and(&trace.dj_dlambda)
        .fold(S::zero(), |acc, &gj, &dj| acc + gj * dj);
    d_lambda += Zip::from(&g_fields)
        .and(&trace.dfields_dlambda)
        .fold(S::zero(), |acc, &gf, &df| acc + gf * df);

    Ok(DuGrads {
        deltas: d_deltas,
        eta: d_eta,
        lambda: d_lambda,
    })
}

/// Single-sample wrapper around [`du_backward_batch`].
pub fn du_backward<S: Real>(trace: &DuTrace<S>, loss_grad: &ArrayView1<S>) -> Result<DuGrads<S>> {
    check_len("loss gradient", trace.n(), loss_grad.len())?;
    if trace.batch() != 1 {
        return Err(Error::DimMismatch {
            what: "trace batch",
            expected: 1,
            got: trace.batch(),
        });
    }
    let g = loss_grad
        .to_owned()
        .into_shape_with_order((1, loss_grad.len()))
        .expect("row reshape");
    du_backward_batch(trace, &g.view())
}

/// Result of one analytic-vs-finite-difference comparison.
#[derive(Debug, Clone, Copy)]
pub struct GradCheckReport {
    pub max_rel_deltas: f64,
    pub max_rel_eta: f64,
    pub max_rel_lambda: f64,
}

impl GradCheckReport {
    pub fn max_overall(&self) -> f64 {
        self.max_rel_deltas
            .max(self.max_rel_eta)
            .max(self.max_rel_lambda)
    }
}

fn rel_err(a: f64, f: f64) -> f64 {
    (a - f).abs() / a.abs().max(f.abs()).max(1e-3)
}

/// Compares the reverse-mode gradients against central finite differences
/// (step 1e-5) on one random instance, reporting the worst relative error
/// per parameter group.
pub fn grad_check(seed: u64, dims: ComplexDims, t: usize) -> Result<GradCheckReport> {
    let mut rng = rng_from(seed, &[0x6e; 1]);
    let ch: RealChannel<f64> = realize_channel(dims, &mut rng);
    let n = ch.n();
    let x_true = sample_qpsk::<f64, _>(n, &mut rng);
    let sw2 = noise_variance_from_snr(10.0, n);
    let y = transmit(&ch, &x_true.view(), sw2, &mut rng)?.y;

    let deltas: Vec<f64> = (0..t)
        .map(|_| (1.0 + 0.2 * f64::std_normal(&mut rng)).abs().max(0.1))
        .collect();
    let params = DuParams::new(
        deltas,
        0.9 + f64::uniform(&mut rng, 0.0, 0.2),
        0.8 + f64::uniform(&mut rng, 0.0, 0.4),
    )?;
    let fixed = DuFixed::default();
    let init = SbState {
        x: Array1::zeros(n),
        y: Array1::from_shape_fn(n, |_| f64::uniform(&mut rng, -0.1, 0.1)),
        k: 0,
    };

    let loss_of = |p: &DuParams<f64>| -> Result<f64> {
        let (out, _) = du_forward(&ch, &y.view(), p, &fixed, &init)?;
        let d = &out - &x_true;
        Ok(d.dot(&d) / n as f64)
    };

    let (out, trace) = du_forward(&ch, &y.view(), &params, &fixed, &init)?;
    let gout = (&out - &x_true).mapv(|v| 2.0 * v / n as f64);
    let grads = du_backward(&trace, &gout.view())?;

    let eps = 1e-5;
    let mut report = GradCheckReport {
        max_rel_deltas: 0.0,
        max_rel_eta: 0.0,
        max_rel_lambda: 0.0,
    };
    for i in 0..t {
        let mut hi = params.clone();
        let mut lo = params.clone();
        hi.deltas[i] += eps;
        lo.deltas[i] -= eps;
        let fd = (loss_of(&hi)? - loss_of(&lo)?) / (2.0 * eps);
        report.max_rel_deltas = report.max_rel_deltas.max(rel_err(grads.deltas[i], fd));
    }
    {
        let mut hi = params.clone();
        let mut lo = params.clone();
        hi.eta += eps;
        lo.eta -= eps;
        let fd = (loss_of(&hi)? - loss_of(&lo)?) / (2.0 * eps);
        report.max_rel_eta = rel_err(grads.eta, fd);
    }
    {
        let mut hi = params.clone();
        let mut lo = params.clone();
        hi.lambda += eps;
        lo.lambda -= eps;
        let fd = (loss_of(&hi)? - loss_of(&lo)?) / (2.0 * eps);
        report.max_rel_lambda = rel_err(grads.lambda, fd);
    }
    Ok(report)
}
