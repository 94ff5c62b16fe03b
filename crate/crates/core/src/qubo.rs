//! QUBO instances for the detection objectives.
//!
//! The energy of a spin vector is E(s) = s^T J s + h^T s with J symmetric and
//! zero on the diagonal. The three builders map a received vector onto that
//! form so that minimizing E over {+-1}^N minimizes the corresponding
//! objective:
//!
//! * ML:  f(x) = 1/2 ||y - Hx||^2            -> J = H^T H - diag, h = -2 H^T y
//! * G:   f(x) = f_ML + lg/2 ||x - x_mmse||^2 -> same J, h = -2(H^T y + lg x_mmse)
//! * LM:  f(x) = 1/2 x^T U H x - (U y)^T x    -> J = U H - diag, h = -2 U y
//!
//! with U = H^T (H H^T + lambda I)^-1.

use ndarray::{Array1, Array2, ArrayView1};

use crate::channel::RealChannel;
use crate::error::{check_len, Error, Result};
use crate::linalg::{chol_solve_mat, chol_solve_vec, cholesky};
use crate::scalar::Real;

/// Symmetric zero-diagonal coupling matrix plus field vector.
#[derive(Debug, Clone)]
pub struct QuboInstance<S> {
    j: Array2<S>,
    h: Array1<S>,
}

impl<S: Real> QuboInstance<S> {
    /// Validates symmetry (exact) and a zero diagonal (exact).
    pub fn new(j: Array2<S>, h: Array1<S>) -> Result<Self> {
        let n = j.nrows();
        if j.ncols() != n {
            return Err(Error::DimMismatch {
                what: "coupling matrix columns",
                expected: n,
                got: j.ncols(),
            });
        }
        check_len("field vector", n, h.len())?;
        for i in 0..n {
            if j[[i, i]] != S::zero() {
                return Err(Error::InvalidConfig(
                    "coupling diagonal must be zero".into(),
                ));
            }
            for k in 0..i {
                if j[[i, k]] != j[[k, i]] {
                    return Err(Error::InvalidConfig(
                        "coupling matrix must be symmetric".into(),
                    ));
                }
            }
        }
        Ok(Self { j, h })
    }

    pub fn n(&self) -> usize {
        self.h.len()
    }

    pub fn j(&self) -> &Array2<S> {
        &self.j
    }

    pub fn h(&self) -> &Array1<S> {
        &self.h
    }

    /// E(s) = s^T J s + h^T s. Accepts continuous relaxations.
    pub fn energy(&self, sigma: &ArrayView1<S>) -> Result<S> {
        check_len("energy argument", self.n(), sigma.len())?;
        let js = self.j.dot(sigma);
        Ok(sigma.dot(&js) + self.h.dot(sigma))
    }

    /// True iff no single spin flip strictly decreases the energy.
    ///
    /// The flip increase is E(flip_i s) - E(s) = -2 [2 s_i (J s)_i + h_i s_i],
    /// so the condition is 2 s_i (J s)_i + h_i s_i <= 0 for every i.
    pub fn is_local_min(&self, x: &ArrayView1<S>) -> Result<bool> {
        check_len("local-min argument", self.n(), x.len())?;
        if x.iter().any(|&v| v != S::one() && v != -S::one()) {
            return Err(Error::NonBinarySpin);
        }
        let jx = self.j.dot(x);
        let two = S::of(2.0);
        Ok(x.iter()
            .zip(jx.iter())
            .zip(self.h.iter())
            .all(|((&xi, &jxi), &hi)| two * xi * jxi + hi * xi <= S::zero()))
    }

    /// Coupling scale c0 = 2 sqrt((n-1) / sum_ij J_ij^2).
    pub fn c0(&self) -> Result<S> {
        compute_c0(self)
    }
}

/// c0 = 2 sqrt((n-1) / sum_ij J_ij^2); errors on an all-zero coupling matrix.
pub fn compute_c0<S: Real>(q: &QuboInstance<S>) -> Result<S> {
    let frob2 = q.j.iter().map(|&v| v * v).fold(S::zero(), |a, b| a + b);
    if frob2 == S::zero() {
        return Err(Error::DegenerateInstance);
    }
    let n = q.n();
    Ok(S::of(2.0) * (S::of((n - 1) as f64) / frob2).sqrt())
}

/// LM regularizer lambda > 0.
#[derive(Debug, Clone, Copy)]
pub struct LmConfig<S> {
    pub lambda: S,
}

impl<S: Real> LmConfig<S> {
    pub fn new(lambda: S) -> Result<Self> {
        if lambda <= S::zero() {
            return Err(Error::InvalidConfig("lambda must be > 0".into()));
        }
        Ok(Self { lambda })
    }
}

/// Penalty weight and LMMSE regularizer for the guided objective.
#[derive(Debug, Clone, Copy)]
pub struct GConfig<S> {
    pub lambda_g: S,
    pub sigma_w2: S,
}

impl<S: Real> GConfig<S> {
    pub fn new(lambda_g: S, sigma_w2: S) -> Result<Self> {
        if lambda_g < S::zero() {
            return Err(Error::InvalidConfig("lambda_g must be >= 0".into()));
        }
        Ok(Self { lambda_g, sigma_w2 })
    }
}

/// Which objective function to evaluate.
#[derive(Debug, Clone, Copy)]
pub enum Objective<S> {
    Ml,
    Guided(GConfig<S>),
    Lm(LmConfig<S>),
}

/// x_mmse = H^T (H H^T + reg I)^-1 y.
pub fn lmmse_solution<S: Real>(
    channel: &RealChannel<S>,
    y: &ArrayView1<S>,
    reg: S,
) -> Result<Array1<S>> {
    check_len("received vector", channel.m(), y.len())?;
    if reg < S::zero() {
        return Err(Error::InvalidConfig("regularizer must be >= 0".into()));
    }
    let h = channel.h();
    let mut k = h.dot(&h.t());
    for i in 0..channel.m() {
        k[[i, i]] += reg;
    }
    let l = cholesky(&k.view())?;
    let t = chol_solve_vec(&l, y);
    Ok(h.t().dot(&t))
}

/// Evaluates the selected objective at a (possibly continuous) point x.
pub fn objective<S: Real>(
    kind: &Objective<S>,
    channel: &RealChannel<S>,
    y: &ArrayView1<S>,
    x: &ArrayView1<S>,
) -> Result<S> {
    check_len("objective argument", channel.n(), x.len())?;
    check_len("received vector", channel.m(), y.len())?;
    let half = S::of(0.5);
    match kind {
        Objective::Ml => {
            let r = y - &channel.h().dot(x);
            Ok(half * r.dot(&r))
        }
        Objective::Guided(cfg) => {
            let f_ml = objective(&Objective::Ml, channel, y, x)?;
            let xl = lmmse_solution(channel, y, cfg.sigma_w2)?;
            let d = x - &xl;
            Ok(f_ml + half * cfg.lambda_g * d.dot(&d))
        }
        Objective::Lm(cfg) => {
            // f = 1/2 (Hx)^T K^-1 (Hx) - y^T K^-1 (Hx), K = H H^T + lambda I
            let h = channel.h();
            let mut k = h.dot(&h.t());
            for i in 0..channel.m() {
                k[[i, i]] += cfg.lambda;
            }
            let l = cholesky(&k.view())?;
            let z = h.dot(x);
            let t = chol_solve_vec(&l, &z.view());
            Ok(half * z.dot(&t) - y.dot(&t))
        }
    }
}

fn strip_diagonal_symmetric<S: Real>(mut g: Array2<S>) -> Array2<S> {
    let n = g.nrows();
    for i in 0..n {
        g[[i, i]] = S::zero();
        for k in 0..i {
            let v = g[[k, i]];
            g[[i, k]] = v;
        }
    }
    g
}

/// Maximum-likelihood instance: J = H^T H - diag(H^T H), h = -2 H^T y.
pub fn build_ml<S: Real>(channel: &RealChannel<S>, y: &ArrayView1<S>) -> Result<QuboInstance<S>> {
    check_len("received vector", channel.m(), y.len())?;
    let h = channel.h();
    let j = strip_diagonal_symmetric(h.t().dot(h));
    let field = h.t().dot(y).mapv(|v| v * -S::of(2.0));
    QuboInstance::new(j, field)
}

/// LMMSE-guided instance: same couplings as ML, field shifted toward the
/// LMMSE solution.
pub fn build_g<S: Real>(
    channel: &RealChannel<S>,
    y: &ArrayView1<S>,
    cfg: &GConfig<S>,
) -> Result<QuboInstance<S>> {
    check_len("received vector", channel.m(), y.len())?;
    let h = channel.h();
    let j = strip_diagonal_symmetric(h.t().dot(h));
    let xl = lmmse_solution(channel, y, cfg.sigma_w2)?;
    let field = (h.t().dot(y) + xl.mapv(|v| v * cfg.lambda_g)).mapv(|v| v * -S::of(2.0));
    QuboInstance::new(j, field)
}

/// Levenberg-Marquardt instance: J = U H - diag(U H), h = -2 U y with
/// U = H^T (H H^T + lambda I)^-1. The product is symmetrized to kill
/// rounding asymmetry before the diagonal is removed.
pub fn build_lm<S: Real>(
    channel: &RealChannel<S>,
    y: &ArrayView1<S>,
    cfg: &LmConfig<S>,
) -> Result<QuboInstance<S>> {
    check_len("received vector", channel.m(), y.len())?;
    if cfg.lambda <= S::zero() {
        return Err(Error::InvalidConfig("lambda must be > 0".into()));
    }
    let h = channel.h();
    let mut k = h.dot(&h.t());
    for i in 0..channel.m() {
        k[[i, i]] += cfg.lambda;
    }
    let l = cholesky(&k.view())?;
    let w = chol_solve_mat(&l, &h.view()); // K^-1 H, so U = w^T
    let m = w.t().dot(h);
    let half = S::of(0.5);
    let mut j = Array2::<S>::zeros(m.raw_dim());
    for i in 0..channel.n() {
        for kcol in 0..i {
            let v = half * (m[[i, kcol]] + m[[kcol, i]]);
            j[[i, kcol]] = v;
            j[[kcol, i]] = v;
        }
    }
    let field = w.t().dot(y).mapv(|v| v * -S::of(2.0));
    QuboInstance::new(j, field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{toy_channel, TOY_LM_LAMBDA};
    use crate::channel::{realize_channel, sample_qpsk, transmit, ComplexDims, RealChannel};
    use crate::scalar::Real;
    use crate::seeds::rng_from;
    use crate::testutil::sign_vectors;
    use ndarray::{array, Array1, Array2};

    #[test]
    fn two_spin_energy() {
        let q = QuboInstance::new(array![[0.0, -1.0], [-1.0, 0.0]], array![0.0, 0.0]).unwrap();
        assert_eq!(q.energy(&array![1.0, 1.0].view()).unwrap(), -2.0);
    }

    #[test]
    fn zero_instance_energy_is_zero() {
        let q = QuboInstance::new(Array2::<f64>::zeros((3, 3)), Array1::zeros(3)).unwrap();
        assert_eq!(q.energy(&array![1.0, -1.0, 1.0].view()).unwrap(), 0.0);
    }

    /// On the hypercube, E(x) + ||y||^2 + trace(H^T H) = 2 f_ML(x), checked
    /// against direct residual evaluation.
    #[test]
    fn ml_energy_matches_residual_objective() {
        let mut rng = rng_from(21, &[]);
        for _ in 0..20 {
            let dims = ComplexDims::new(3, 4).unwrap();
            let ch = realize_channel::<f64, _>(dims, &mut rng);
            let x = sample_qpsk::<f64, _>(ch.n(), &mut rng);
            let y = transmit(&ch, &x.view(), 0.5, &mut rng).unwrap().y;
            let q = build_ml(&ch, &y.view()).unwrap();
            let x_eval = sample_qpsk::<f64, _>(ch.n(), &mut rng);

            let g = ch.h().t().dot(ch.h());
            let trace: f64 = (0..ch.n()).map(|i| g[[i, i]]).sum();
            let e = q.energy(&x_eval.view()).unwrap();
            let f = objective(&Objective::Ml, &ch, &y.view(), &x_eval.view()).unwrap();
            assert!(
                (e + y.dot(&y) + trace - 2.0 * f).abs() < 1e-9,
                "identity violated"
            );
        }
    }

    #[test]
    fn toy_f_ml_column() {
        let (ch, y) = toy_channel::<f64>();
        // Frozen against direct residual evaluation of the printed instance.
        let expected = [
            ([1.0, 1.0, 1.0], 0.645),
            ([-1.0, 1.0, 1.0], 4.525),
            ([1.0, -1.0, 1.0], 5.545),
            ([1.0, 1.0, -1.0], 4.005),
            ([-1.0, -1.0, 1.0], 5.105),
            ([1.0, -1.0, -1.0], 4.945),
            ([-1.0, 1.0, -1.0], 4.285),
            ([-1.0, -1.0, -1.0], 0.905),
        ];
        for (x, want) in expected {
            let x: Array1<f64> = Array1::from_vec(x.to_vec());
            let f = objective(&Objective::Ml, &ch, &y.view(), &x.view()).unwrap();
            assert!((f - want).abs() < 1e-12, "f_ML({x:?}) = {f}, want {want}");
        }
    }

    #[test]
    fn toy_ml_field_vector() {
        let (ch, y) = toy_channel::<f64>();
        let q = build_ml(&ch, &y.view()).unwrap();
        let want = array![0.08, -0.76, 0.42];
        for i in 0..3 {
            assert!((q.h()[i] - want[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn toy_ml_argmin_is_all_ones() {
        let (ch, y) = toy_channel::<f64>();
        let q = build_ml(&ch, &y.view()).unwrap();
        let best = sign_vectors(3)
            .into_iter()
            .min_by(|a, b| {
                let ea = q.energy(&a.view()).unwrap();
                let eb = q.energy(&b.view()).unwrap();
                ea.partial_cmp(&eb).unwrap()
            })
            .unwrap();
        assert_eq!(best, array![1.0, 1.0, 1.0]);
    }

    #[test]
    fn orthogonal_columns_give_zero_couplings() {
        let ch = RealChannel::from_real(Array2::<f64>::eye(4) * 2.0);
        let y = array![1.0, -1.0, 0.5, 0.0];
        let q = build_ml(&ch, &y.view()).unwrap();
        assert!(q.j().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn lmmse_identity_channel() {
        let ch = RealChannel::from_real(Array2::<f64>::eye(4));
        let y = array![1.0, -2.0, 0.5, 3.0];
        let x0 = lmmse_solution(&ch, &y.view(), 0.0).unwrap();
        for i in 0..4 {
            assert!((x0[i] - y[i]).abs() < 1e-14);
        }
        let x1 = lmmse_solution(&ch, &y.view(), 1.0).unwrap();
        for i in 0..4 {
            assert!((x1[i] - y[i] / 2.0).abs() < 1e-14);
        }
    }

    /// Push-through identity: H^T (HH^T + r I)^-1 y = (H^T H + r I)^-1 H^T y,
    /// with the right-hand side computed through its own factorization.
    #[test]
    fn lmmse_push_through() {
        let mut rng = rng_from(31, &[]);
        for trial in 0..10 {
            let dims = ComplexDims::new(3, 2 + (trial % 3)).unwrap();
            let ch = realize_channel::<f64, _>(dims, &mut rng);
            let y = Array1::from_shape_fn(ch.m(), |_| f64::std_normal(&mut rng));
            let reg = 0.7;
            let left = lmmse_solution(&ch, &y.view(), reg).unwrap();

            let h = ch.h();
            let mut a = h.t().dot(h);
            for i in 0..ch.n() {
                a[[i, i]] += reg;
            }
            let l = crate::linalg::cholesky(&a.view()).unwrap();
            let rhs = h.t().dot(&y);
            let right = crate::linalg::chol_solve_vec(&l, &rhs.view());
            for i in 0..ch.n() {
                assert!((left[i] - right[i]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn lmmse_singular_without_regularization() {
        let ch = RealChannel::from_real(array![[1.0, 0.0], [1.0, 0.0]]);
        let y = array![1.0, 1.0];
        assert!(lmmse_solution(&ch, &y.view(), 0.0).is_err());
        assert!(lmmse_solution(&ch, &y.view(), 0.1).is_ok());
    }

    #[test]
    fn guided_reduces_to_ml_at_zero_penalty() {
        let (ch, y) = toy_channel::<f64>();
        let cfg = GConfig::new(0.0, 0.3).unwrap();
        let q_g = build_g(&ch, &y.view(), &cfg).unwrap();
        let q_ml = build_ml(&ch, &y.view()).unwrap();
        assert_eq!(q_g.j(), q_ml.j());
        assert_eq!(q_g.h(), q_ml.h());
        for x in sign_vectors(3) {
            let fg = objective(&Objective::Guided(cfg), &ch, &y.view(), &x.view()).unwrap();
            let fm = objective(&Objective::Ml, &ch, &y.view(), &x.view()).unwrap();
            assert!((fg - fm).abs() < 1e-14);
        }
    }

    #[test]
    fn guided_couplings_independent_of_penalty() {
        let (ch, y) = toy_channel::<f64>();
        let a = build_g(&ch, &y.view(), &GConfig::new(0.25, 0.3).unwrap()).unwrap();
        let b = build_g(&ch, &y.view(), &GConfig::new(4.0, 0.3).unwrap()).unwrap();
        assert_eq!(a.j(), b.j());
    }

    #[test]
    fn toy_guided_argmin_is_all_ones() {
        let (ch, y) = toy_channel::<f64>();
        let cfg = GConfig::new(1.0, 0.3).unwrap();
        let best = sign_vectors(3)
            .into_iter()
            .min_by(|a, b| {
                let fa = objective(&Objective::Guided(cfg), &ch, &y.view(), &a.view()).unwrap();
                let fb = objective(&Objective::Guided(cfg), &ch, &y.view(), &b.view()).unwrap();
                fa.partial_cmp(&fb).unwrap()
            })
            .unwrap();
        assert_eq!(best, array![1.0, 1.0, 1.0]);
    }

    #[test]
    fn lm_identity_channel() {
        let ch = RealChannel::from_real(Array2::<f64>::eye(4));
        let y = array![1.0, -2.0, 0.5, 3.0];
        let lam = 1.5;
        let q = build_lm(&ch, &y.view(), &LmConfig::new(lam).unwrap()).unwrap();
        assert!(q.j().iter().all(|&v| v.abs() < 1e-15));
        for i in 0..4 {
            assert!((q.h()[i] + 2.0 * y[i] / (1.0 + lam)).abs() < 1e-14);
        }
    }

    #[test]
    fn lm_approaches_ml_at_large_lambda() {
        let mut rng = rng_from(41, &[]);
        let dims = ComplexDims::new(4, 4).unwrap();
        let ch = realize_channel::<f64, _>(dims, &mut rng);
        let y = Array1::from_shape_fn(ch.m(), |_| f64::std_normal(&mut rng));
        let lam = 1e6;
        let q_lm = build_lm(&ch, &y.view(), &LmConfig::new(lam).unwrap()).unwrap();
        let q_ml = build_ml(&ch, &y.view()).unwrap();
        for (a, b) in q_lm.j().iter().zip(q_ml.j().iter()) {
            if b.abs() > 1e-12 {
                assert!(
                    (lam * a - b).abs() / b.abs() < 1e-4,
                    "lambda J_lm = {} vs J_ml = {}",
                    lam * a,
                    b
                );
            }
        }
    }

    /// U_lambda H is PSD; verified by factorizing U H + eps I.
    #[test]
    fn lm_product_is_positive_semidefinite() {
        let mut rng = rng_from(43, &[]);
        for _ in 0..10 {
            let dims = ComplexDims::new(4, 3).unwrap();
            let ch = realize_channel::<f64, _>(dims, &mut rng);
            let h = ch.h();
            let mut k = h.dot(&h.t());
            for i in 0..ch.m() {
                k[[i, i]] += 0.8;
            }
            let l = cholesky(&k.view()).unwrap();
            let w = chol_solve_mat(&l, &h.view());
            let mut uh = w.t().dot(h);
            uh = (&uh + &uh.t()) / 2.0;
            for i in 0..ch.n() {
                uh[[i, i]] += 1e-9;
            }
            assert!(cholesky(&uh.view()).is_ok(), "U H has eigenvalue < -1e-9");
        }
    }

    #[test]
    fn toy_local_minimum_structure() {
        let (ch, y) = toy_channel::<f64>();
        let q_ml = build_ml(&ch, &y.view()).unwrap();
        let all_minus = array![-1.0, -1.0, -1.0];
        assert!(q_ml.is_local_min(&all_minus.view()).unwrap());

        let q_lm = build_lm(&ch, &y.view(), &LmConfig::new(TOY_LM_LAMBDA).unwrap()).unwrap();
        assert!(!q_lm.is_local_min(&all_minus.view()).unwrap());
    }

    #[test]
    fn zero_instance_everything_is_local_min() {
        let q = QuboInstance::new(Array2::<f64>::zeros((4, 4)), Array1::zeros(4)).unwrap();
        let mut rng = rng_from(2, &[]);
        let x = sample_qpsk::<f64, _>(4, &mut rng);
        assert!(q.is_local_min(&x.view()).unwrap());
    }

    #[test]
    fn local_min_rejects_non_binary() {
        let q = QuboInstance::new(Array2::<f64>::zeros((2, 2)), Array1::zeros(2)).unwrap();
        assert!(matches!(
            q.is_local_min(&array![0.5, 1.0].view()),
            Err(Error::NonBinarySpin)
        ));
    }

    /// is_local_min is false exactly when some single flip strictly lowers
    /// the energy, cross-checked with direct energy differences.
    #[test]
    fn local_min_matches_flip_energies() {
        let mut rng = rng_from(51, &[]);
        for _ in 0..50 {
            let dims = ComplexDims::new(3, 3).unwrap();
            let ch = realize_channel::<f64, _>(dims, &mut rng);
            let x = sample_qpsk::<f64, _>(ch.n(), &mut rng);
            let y = transmit(&ch, &x.view(), 1.0, &mut rng).unwrap().y;
            let q = build_ml(&ch, &y.view()).unwrap();
            let probe = sample_qpsk::<f64, _>(ch.n(), &mut rng);
            let e0 = q.energy(&probe.view()).unwrap();
            let mut any_strict_decrease = false;
            for i in 0..ch.n() {
                let mut flipped = probe.clone();
                flipped[i] = -flipped[i];
                if q.energy(&flipped.view()).unwrap() < e0 - 1e-12 {
                    any_strict_decrease = true;
                }
            }
            assert_eq!(q.is_local_min(&probe.view()).unwrap(), !any_strict_decrease);
        }
    }

    /// Brute-force argmin of the instance energy agrees with argmin of the
    /// objective for the guided and LM forms.
    #[test]
    fn instance_argmin_matches_objective_argmin() {
        let mut rng = rng_from(61, &[]);
        for trial in 0..6 {
            let dims = ComplexDims::new(4, 4).unwrap();
            let ch = realize_channel::<f64, _>(dims, &mut rng);
            let x = sample_qpsk::<f64, _>(ch.n(), &mut rng);
            let y = transmit(&ch, &x.view(), 0.8, &mut rng).unwrap().y;

            let (q, obj): (QuboInstance<f64>, Objective<f64>) = if trial % 2 == 0 {
                let cfg = GConfig::new(0.5, 0.8).unwrap();
                (
                    build_g(&ch, &y.view(), &cfg).unwrap(),
                    Objective::Guided(cfg),
                )
            } else {
                let cfg = LmConfig::new(1.0).unwrap();
                (build_lm(&ch, &y.view(), &cfg).unwrap(), Objective::Lm(cfg))
            };

            let by_energy = sign_vectors(ch.n())
                .into_iter()
                .min_by(|a, b| {
                    q.energy(&a.view())
                        .unwrap()
                        .partial_cmp(&q.energy(&b.view()).unwrap())
                        .unwrap()
                })
                .unwrap();
            let by_objective = sign_vectors(ch.n())
                .into_iter()
                .min_by(|a, b| {
                    objective(&obj, &ch, &y.view(), &a.view())
                        .unwrap()
                        .partial_cmp(&objective(&obj, &ch, &y.view(), &b.view()).unwrap())
                        .unwrap()
                })
                .unwrap();
            assert_eq!(by_energy, by_objective);
        }
    }

    #[test]
    fn c0_examples() {
        let q = QuboInstance::new(array![[0.0, 1.0], [1.0, 0.0]], Array1::zeros(2)).unwrap();
        assert!((q.c0().unwrap() - 2.0f64.sqrt()).abs() < 1e-15);

        let j3 = array![[0.0, 1.0, -1.0], [1.0, 0.0, 1.0], [-1.0, 1.0, 0.0]];
        let q3 = QuboInstance::new(j3, Array1::zeros(3)).unwrap();
        assert!((q3.c0().unwrap() - 2.0 * (2.0f64 / 6.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn c0_scales_inversely_with_couplings() {
        let mut rng = rng_from(71, &[]);
        let dims = ComplexDims::new(3, 3).unwrap();
        let ch = realize_channel::<f64, _>(dims, &mut rng);
        let y = Array1::from_shape_fn(ch.m(), |_| f64::std_normal(&mut rng));
        let q = build_ml(&ch, &y.view()).unwrap();
        let s = 3.7;
        let scaled = QuboInstance::new(q.j().mapv(|v| v * s), q.h().clone()).unwrap();
        assert!((scaled.c0().unwrap() - q.c0().unwrap() / s).abs() < 1e-12);
    }

    #[test]
    fn c0_errors_on_zero_couplings() {
        let q = QuboInstance::new(Array2::<f64>::zeros((3, 3)), Array1::zeros(3)).unwrap();
        assert!(matches!(q.c0(), Err(Error::DegenerateInstance)));
    }

    #[test]
    fn builders_produce_valid_instances() {
        let mut rng = rng_from(81, &[]);
        let dims = ComplexDims::new(5, 5).unwrap();
        let ch = realize_channel::<f64, _>(dims, &mut rng);
        let y = Array1::from_shape_fn(ch.m(), |_| f64::std_normal(&mut rng));
        // QuboInstance::new re-validates symmetry and the zero diagonal, so
        // construction succeeding is the check.
        build_ml(&ch, &y.view()).unwrap();
        build_g(&ch, &y.view(), &GConfig::new(0.5, 0.7).unwrap()).unwrap();
        build_lm(&ch, &y.view(), &LmConfig::new(1.0).unwrap()).unwrap();
    }
}
