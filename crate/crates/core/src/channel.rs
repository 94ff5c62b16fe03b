//! Rayleigh-fading MIMO channel in its real-valued form.
//!
//! A complex n_r x n_t channel H~ with i.i.d. circularly-symmetric unit
//! variance entries is embedded as the real M x N matrix
//!
//! ```text
//!     H = [ Re(H~)  -Im(H~) ]         N = 2 n_t,  M = 2 n_r
//!         [ Im(H~)   Re(H~) ]
//! ```
//!
//! and QPSK symbols become independent +-1 entries of the stacked real
//! vector.

use ndarray::{s, Array1, Array2, ArrayView1};
use rand::Rng;

use crate::error::{check_len, Error, Result};
use crate::scalar::Real;

/// Antenna counts of the complex-valued system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComplexDims {
    n_t: usize,
    n_r: usize,
}

impl ComplexDims {
    pub fn new(n_t: usize, n_r: usize) -> Result<Self> {
        if n_t == 0 || n_r == 0 {
            return Err(Error::InvalidConfig(
                "antenna counts must be positive".into(),
            ));
        }
        Ok(Self { n_t, n_r })
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    /// Real input dimension N = 2 n_t.
    pub fn n(&self) -> usize {
        2 * self.n_t
    }

    /// Real output dimension M = 2 n_r.
    pub fn m(&self) -> usize {
        2 * self.n_r
    }
}

/// Real-valued channel matrix, usually the block embedding of a complex one.
#[derive(Debug, Clone)]
pub struct RealChannel<S> {
    h: Array2<S>,
}

impl<S: Real> RealChannel<S> {
    /// Assembles the block embedding from the real and imaginary parts of
    /// the complex channel. Block identities hold bit-exactly by
    /// construction.
    pub fn from_complex_parts(re: Array2<S>, im: Array2<S>) -> Result<Self> {
        if re.raw_dim() != im.raw_dim() {
            return Err(Error::DimMismatch {
                what: "channel imaginary part rows",
                expected: re.nrows(),
                got: im.nrows(),
            });
        }
        let dims = ComplexDims::new(re.ncols(), re.nrows())?;
        let (n_r, n_t) = (dims.n_r, dims.n_t);
        let mut h = Array2::<S>::zeros((dims.m(), dims.n()));
        h.slice_mut(s![..n_r, ..n_t]).assign(&re);
        h.slice_mut(s![..n_r, n_t..]).assign(&im.mapv(|v| -v));
        h.slice_mut(s![n_r.., ..n_t]).assign(&im);
        h.slice_mut(s![n_r.., n_t..]).assign(&re);
        Ok(Self { h })
    }

    /// Wraps an explicit real matrix (fixed examples, direct real models).
    pub fn from_real(h: Array2<S>) -> Self {
        Self { h }
    }

    pub fn h(&self) -> &Array2<S> {
        &self.h
    }

    /// Real input dimension N.
    pub fn n(&self) -> usize {
        self.h.ncols()
    }

    /// Real output dimension M.
    pub fn m(&self) -> usize {
        self.h.nrows()
    }
}

/// Draws a flat Rayleigh-fading channel: complex entries i.i.d.
/// circularly-symmetric Gaussian with unit variance (each real/imaginary
/// part has variance 1/2).
pub fn realize_channel<S: Real, R: Rng + ?Sized>(dims: ComplexDims, rng: &mut R) -> RealChannel<S> {
    let sd = S::of(std::f64::consts::FRAC_1_SQRT_2);
    let re = Array2::from_shape_fn((dims.n_r, dims.n_t), |_| S::std_normal(rng) * sd);
    let im = Array2::from_shape_fn((dims.n_r, dims.n_t), |_| S::std_normal(rng) * sd);
    RealChannel::from_complex_parts(re, im).expect("shapes are consistent by construction")
}

/// Length-n vector of independent equiprobable +-1 symbols.
pub fn sample_qpsk<S: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Array1<S> {
    Array1::from_shape_fn(n, |_| {
        if rng.random::<bool>() {
            S::one()
        } else {
            -S::one()
        }
    })
}

/// Complex-noise variance for a target SNR: sigma_w^2 = n_scale 10^(-snr/10).
pub fn noise_variance_from_snr<S: Real>(snr_db: S, n_scale: usize) -> S {
    S::of(n_scale as f64) * S::of(10.0).powf(-snr_db / S::of(10.0))
}

/// One transmission: channel input, noisy output, and the noise variance
/// that produced it.
#[derive(Debug, Clone)]
pub struct MimoSample<S> {
    pub x_true: Array1<S>,
    pub y: Array1<S>,
    pub channel: RealChannel<S>,
    pub sigma_w2: S,
}

/// Sends `x` through the channel: y = Hx + w, where the real noise
/// components are i.i.d. N(0, sigma_w^2 / 2) (the real embedding of complex
/// noise with covariance sigma_w^2 I).
pub fn transmit<S: Real, R: Rng + ?Sized>(
    channel: &RealChannel<S>,
    x: &ArrayView1<S>,
    sigma_w2: S,
    rng: &mut R,
) -> Result<MimoSample<S>> {
    check_len("transmit input", channel.n(), x.len())?;
    if sigma_w2 < S::zero() {
        return Err(Error::InvalidConfig("noise variance must be >= 0".into()));
    }
    let mut y = channel.h.dot(x);
    if sigma_w2 > S::zero() {
        let sd = (sigma_w2 / S::of(2.0)).sqrt();
        for v in y.iter_mut() {
            *v += S::std_normal(rng) * sd;
        }
    }
    Ok(MimoSample {
        x_true: x.to_owned(),
        y,
        channel: channel.clone(),
        sigma_w2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeds::rng_from;
    use ndarray::array;

    #[test]
    fn one_by_one_embedding() {
        let (a, b) = (0.37, -1.25);
        let ch = RealChannel::from_complex_parts(array![[a]], array![[b]]).unwrap();
        assert_eq!(ch.h(), &array![[a, -b], [b, a]]);
    }

    #[test]
    fn block_structure_holds_exactly() {
        let mut rng = rng_from(11, &[]);
        let dims = ComplexDims::new(16, 16).unwrap();
        let ch: RealChannel<f64> = realize_channel(dims, &mut rng);
        let h = ch.h();
        assert_eq!(h.nrows(), 32);
        assert_eq!(h.ncols(), 32);
        for i in 0..16 {
            for j in 0..16 {
                assert_eq!(h[[i, j]], h[[16 + i, 16 + j]]);
                assert_eq!(h[[i, 16 + j]], -h[[16 + i, j]]);
            }
        }
    }

    #[test]
    fn entry_variance_is_one_half() {
        let mut rng = rng_from(5, &[]);
        let dims = ComplexDims::new(10, 10).unwrap();
        let mut sum_sq = 0.0;
        let mut count = 0usize;
        for _ in 0..250 {
            let ch: RealChannel<f64> = realize_channel(dims, &mut rng);
            sum_sq += ch.h().iter().map(|v| v * v).sum::<f64>();
            count += ch.h().len();
        }
        let mean_sq = sum_sq / count as f64;
        assert!(
            (mean_sq - 0.5).abs() < 0.01,
            "mean squared entry {mean_sq} not within 0.5 +- 0.01"
        );
    }

    /// The real product Hx must equal the real embedding of the complex
    /// product H~x~.
    #[test]
    fn real_product_matches_complex_product() {
        let mut rng = rng_from(17, &[]);
        for _ in 0..20 {
            let n_t = 3;
            let n_r = 4;
            let re = Array2::from_shape_fn((n_r, n_t), |_| f64::std_normal(&mut rng));
            let im = Array2::from_shape_fn((n_r, n_t), |_| f64::std_normal(&mut rng));
            let xr = Array1::from_shape_fn(n_t, |_| f64::std_normal(&mut rng));
            let xi = Array1::from_shape_fn(n_t, |_| f64::std_normal(&mut rng));

            let ch = RealChannel::from_complex_parts(re.clone(), im.clone()).unwrap();
            let x = ndarray::concatenate![ndarray::Axis(0), xr, xi];
            let y = ch.h().dot(&x);

            let y_re = re.dot(&xr) - im.dot(&xi);
            let y_im = im.dot(&xr) + re.dot(&xi);
            for i in 0..n_r {
                assert!((y[i] - y_re[i]).abs() < 1e-12);
                assert!((y[n_r + i] - y_im[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn qpsk_entries_and_mean() {
        let mut rng = rng_from(2, &[]);
        let v: Array1<f64> = sample_qpsk(1_000_000, &mut rng);
        assert!(v.iter().all(|&s| s == 1.0 || s == -1.0));
        let mean = v.sum() / v.len() as f64;
        assert!(mean.abs() < 0.005, "mean {mean}");
    }

    #[test]
    fn qpsk_fixed_seed_reproducible() {
        let a: Array1<f64> = sample_qpsk(64, &mut rng_from(9, &[1]));
        let b: Array1<f64> = sample_qpsk(64, &mut rng_from(9, &[1]));
        assert_eq!(a, b);
    }

    #[test]
    fn noise_variance_formula() {
        assert!((noise_variance_from_snr(10.0f64, 32) - 3.2).abs() < 1e-12);
        assert!((noise_variance_from_snr(0.0f64, 1) - 1.0).abs() < 1e-15);
        assert!((noise_variance_from_snr(20.0f64, 32) - 0.32).abs() < 1e-12);
    }

    #[test]
    fn noiseless_transmit_is_exact() {
        let mut rng = rng_from(4, &[]);
        let dims = ComplexDims::new(4, 4).unwrap();
        let ch: RealChannel<f64> = realize_channel(dims, &mut rng);
        let x = sample_qpsk(8, &mut rng);
        let s = transmit(&ch, &x.view(), 0.0, &mut rng).unwrap();
        assert_eq!(s.y, ch.h().dot(&x));
    }

    #[test]
    fn identity_channel_passthrough() {
        let ch = RealChannel::from_real(Array2::<f64>::eye(8));
        let mut rng = rng_from(8, &[]);
        let x = sample_qpsk(8, &mut rng);
        let s = transmit(&ch, &x.view(), 0.0, &mut rng).unwrap();
        assert_eq!(s.y, x);
    }

    #[test]
    fn noise_component_variance_is_half_sigma() {
        let mut rng = rng_from(6, &[]);
        let ch = RealChannel::from_real(Array2::<f64>::zeros((2, 2)));
        let x = array![0.0, 0.0];
        let mut sum_sq = 0.0;
        let mut count = 0usize;
        for _ in 0..50_000 {
            let s = transmit(&ch, &x.view(), 2.0, &mut rng).unwrap();
            sum_sq += s.y.iter().map(|v| v * v).sum::<f64>();
            count += 2;
        }
        let var = sum_sq / count as f64;
        assert!((var - 1.0).abs() < 0.02, "noise variance {var}");
    }

    #[test]
    fn transmit_rejects_wrong_length() {
        let ch = RealChannel::from_real(Array2::<f64>::eye(4));
        let x = array![1.0, -1.0];
        let mut rng = rng_from(1, &[]);
        assert!(transmit(&ch, &x.view(), 0.1, &mut rng).is_err());
    }
}
