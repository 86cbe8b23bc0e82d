//! Special functions and random sampling primitives.
//!
//! Every variance crossing this module's interface is a total complex
//! variance: `E|z|^2`, split equally between real and imaginary parts.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Handle to one reproducible random stream.
///
/// The pair `(master_seed, stream_index)` fully determines the sequence.
/// Trial `i` of a sweep always runs on stream `i`, so results do not depend
/// on how trials are scheduled across workers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self { master_seed, stream_index }
    }

    /// Fresh generator positioned at the start of the stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_index);
        rng
    }
}

/// Circular complex Gaussian scalar with the given total variance.
#[inline]
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R, total_variance: f64) -> Complex64 {
    let s = (0.5 * total_variance).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// Matrix of i.i.d. circular complex Gaussian entries.
pub fn sample_complex_gaussian<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    total_variance: f64,
    rng: &mut R,
) -> Result<DMatrix<Complex64>> {
    if !(total_variance > 0.0) || !total_variance.is_finite() {
        return Err(Error::Domain(format!(
            "complex Gaussian needs a positive finite variance, got {total_variance}"
        )));
    }
    Ok(DMatrix::from_fn(rows, cols, |_, _| complex_normal(rng, total_variance)))
}

/// Like [`sample_complex_gaussian`] but a zero variance yields a zero matrix.
pub fn sample_complex_gaussian_or_zero<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    total_variance: f64,
    rng: &mut R,
) -> Result<DMatrix<Complex64>> {
    if total_variance == 0.0 {
        Ok(DMatrix::zeros(rows, cols))
    } else {
        sample_complex_gaussian(rows, cols, total_variance, rng)
    }
}

/// First-order Marcum Q-function `Q1(a, b)`.
///
/// Evaluated as a Poisson mixture: with `x = a^2/2`, `y = b^2/2`,
/// `Q1 = sum_k Pois(k; x) * P[Pois(y) <= k]`. Terms are generated in log
/// space so large arguments do not underflow, and the outer sum stops once
/// the remaining Poisson(x) mass is below `1e-17` by a Chernoff bound.
pub fn marcum_q1(a: f64, b: f64) -> Result<f64> {
    if !a.is_finite() || !b.is_finite() || a < 0.0 || b < 0.0 {
        return Err(Error::Domain(format!("marcum_q1 needs finite nonnegative inputs, got ({a}, {b})")));
    }
    let x = 0.5 * a * a;
    let y = 0.5 * b * b;
    if y == 0.0 {
        return Ok(1.0);
    }
    if x == 0.0 {
        return Ok((-y).exp());
    }
    let ln_x = x.ln();
    let ln_y = y.ln();
    let k_max = chernoff_cutoff(x);
    let mut ln_fact = 0.0;
    let mut cdf_y = 0.0;
    let mut total = 0.0;
    for k in 0..=k_max {
        if k > 0 {
            ln_fact += (k as f64).ln();
        }
        let kf = k as f64;
        cdf_y += (-y + kf * ln_y - ln_fact).exp();
        let p_x = (-x + kf * ln_x - ln_fact).exp();
        total += p_x * cdf_y.min(1.0);
    }
    Ok(total.clamp(0.0, 1.0))
}

/// Smallest index beyond which the Poisson(x) upper tail is below 1e-17.
fn chernoff_cutoff(x: f64) -> usize {
    // P[N >= k] <= exp(-x) (e x / k)^k for k > x.
    let target = (1e-17f64).ln();
    let mut k = (x.ceil() as usize).max(1);
    loop {
        let kf = k as f64;
        if kf > x && -x + kf * (1.0 + x.ln() - kf.ln()) < target {
            return k;
        }
        k += 1 + k / 64;
    }
}

/// Complementary CDF of the noncentral chi-squared law.
///
/// Only two degrees of freedom are supported; then
/// `P[X > x] = Q1(sqrt(lambda), sqrt(x))`.
pub fn noncentral_chi2_ccdf(x: f64, dof: u32, lambda: f64) -> Result<f64> {
    if dof != 2 {
        return Err(Error::Unsupported(format!("noncentral chi-squared with {dof} degrees of freedom")));
    }
    if x < 0.0 || lambda < 0.0 {
        return Err(Error::Domain(format!("noncentral_chi2_ccdf needs x, lambda >= 0, got ({x}, {lambda})")));
    }
    marcum_q1(lambda.sqrt(), x.sqrt())
}

/// Gaussian tail probability `Q(x) = P[N(0,1) > x]`.
pub fn gaussian_q(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Complementary error function, relative accuracy about 1e-15.
pub fn erfc(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x < 1.5 {
        // Maclaurin series of erf.
        let mut term = x;
        let mut sum = x;
        let x2 = x * x;
        let mut n = 0.0;
        while term.abs() > 1e-17 * sum.abs() {
            n += 1.0;
            term *= -x2 / n;
            sum += term / (2.0 * n + 1.0);
        }
        return 1.0 - sum * 2.0 / std::f64::consts::PI.sqrt();
    }
    // Continued fraction, evaluated with the modified Lentz method.
    let tiny = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for n in 1..500 {
        let an = n as f64 * 0.5;
        d = x + an * d;
        d = if d.abs() < tiny { tiny } else { d };
        c = x + an / c;
        c = if c.abs() < tiny { tiny } else { c };
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x * x).exp() / (f * std::f64::consts::PI.sqrt())
}

/// Dart-throwing Poisson-disk sampler on `[0,width] x [0,height]`.
///
/// Returns exactly `count` points with pairwise distance at least
/// `min_separation_m`. Gives up after 10,000 rejected candidates.
pub fn poisson_disk_sample<R: Rng + ?Sized>(
    width_m: f64,
    height_m: f64,
    min_separation_m: f64,
    count: usize,
    rng: &mut R,
) -> Result<Vec<[f64; 2]>> {
    poisson_disk_sample_with_budget(width_m, height_m, min_separation_m, count, 10_000, rng)
}

pub fn poisson_disk_sample_with_budget<R: Rng + ?Sized>(
    width_m: f64,
    height_m: f64,
    min_separation_m: f64,
    count: usize,
    rejection_budget: usize,
    rng: &mut R,
) -> Result<Vec<[f64; 2]>> {
    let capacity = || Error::Capacity {
        count,
        width_m,
        height_m,
        min_separation_m,
    };
    if !(width_m > 0.0 && height_m > 0.0 && min_separation_m >= 0.0) {
        return Err(Error::Domain(format!(
            "region {width_m} x {height_m} with separation {min_separation_m} is not valid"
        )));
    }
    // Disks of radius s/2 centred in the region fit inside the region grown by
    // s/2 on every side; hexagonal packing density bounds how many fit.
    let s = min_separation_m;
    let disk = std::f64::consts::PI * 0.25 * s * s;
    let packing = std::f64::consts::PI / 12f64.sqrt();
    if count > 1 && count as f64 * disk > packing * (width_m + s) * (height_m + s) {
        return Err(capacity());
    }
    let s2 = s * s;
    let mut points: Vec<[f64; 2]> = Vec::with_capacity(count);
    let mut rejections = 0;
    while points.len() < count {
        let p = [rng.gen::<f64>() * width_m, rng.gen::<f64>() * height_m];
        let clear = points.iter().all(|q| {
            let dx = p[0] - q[0];
            let dy = p[1] - q[1];
            dx * dx + dy * dy >= s2
        });
        if clear {
            points.push(p);
        } else {
            rejections += 1;
            if rejections >= rejection_budget {
                return Err(capacity());
            }
        }
    }
    Ok(points)
}
