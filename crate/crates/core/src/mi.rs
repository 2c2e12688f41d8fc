//! Finite-size ground truth: exact-density Monte-Carlo estimation of the
//! per-user mutual information of `Y = A(X + Z)/√m + N` for small systems.
//!
//! Given the signature matrix, the channel conditioned on X is Gaussian with
//! covariance `(ρ²/m) A Aᵀ + σ² I`, so `h(Y|X)` is closed form and `h(Y)` is
//! estimated by sampling the channel and averaging `−log2 p(Y)` with the
//! exact mixture density over all 2ⁿ inputs (log-sum-exp over the mixture
//! components). Uniform inputs are used throughout, which lower-bounds the
//! maximization over product input distributions.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::SignatureMatrix;

/// Exact enumeration cap: 2^20 mixture components per density evaluation.
pub const MAX_EXACT_USERS: usize = 20;

/// Samples per deterministic batch; the batch layout is fixed so the merged
/// estimate is independent of how batches are scheduled across threads.
const MC_BATCH: usize = 4096;

/// Effective noise covariance `(ρ²/m) A Aᵀ + σ² I` with its Cholesky factor
/// and log-determinant.
#[derive(Debug, Clone)]
pub struct EffectiveCovariance {
    matrix: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
    log_det: f64,
}

impl EffectiveCovariance {
    /// Build the covariance for a signature matrix and noise levels.
    pub fn new(a: &SignatureMatrix, sigma: f64, rho: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Domain(format!("sigma must be > 0, got {sigma}")));
        }
        if !(rho >= 0.0 && rho.is_finite()) {
            return Err(Error::Domain(format!("rho must be >= 0, got {rho}")));
        }
        let m = a.rows();
        let dense = a.to_dense();
        let mut matrix = &dense * dense.transpose() * (rho * rho / m as f64);
        for i in 0..m {
            matrix[(i, i)] += sigma * sigma;
        }
        let chol = Cholesky::new(matrix.clone())
            .ok_or_else(|| Error::NonFinite("covariance is not positive definite".into()))?;
        let log_det = 2.0 * (0..m).map(|i| chol.l_dirty()[(i, i)].ln()).sum::<f64>();
        Ok(Self { matrix, chol, log_det })
    }

    /// Dimension m of the covariance.
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Natural log of the determinant, from the triangular factor.
    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    /// Σ⁻¹ y via the factorization.
    fn solve(&self, y: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(y)
    }
}

/// Conditional output entropy `h(Y|X)` in bits:
/// `(m/2) log2(2πe) + (1/2) log2 det(cov)`.
pub fn conditional_entropy(cov: &EffectiveCovariance) -> f64 {
    let m = cov.dim() as f64;
    0.5 * m * (2.0 * std::f64::consts::PI * std::f64::consts::E).log2()
        + 0.5 * cov.log_det() * std::f64::consts::LOG2_E
}

/// A Monte-Carlo mutual-information estimate in bits per user.
#[derive(Debug, Clone, Serialize)]
pub struct MiEstimate {
    pub bits_per_user: f64,
    pub std_error: f64,
    pub samples: usize,
    pub seed: u64,
}

struct MixtureDensity {
    /// Σ⁻¹ μ_k for every input pattern k.
    solved_means: Vec<DVector<f64>>,
    /// −½ μ_kᵀ Σ⁻¹ μ_k.
    half_quad: Vec<f64>,
    /// −n ln 2 − ½ (m ln 2π + ln det Σ), the input and normalization masses.
    log_norm: f64,
}

impl MixtureDensity {
    fn new(a: &SignatureMatrix, cov: &EffectiveCovariance) -> Self {
        let m = a.rows();
        let n = a.cols();
        let scale = 1.0 / (m as f64).sqrt();
        let count = 1usize << n;
        let mut solved_means = Vec::with_capacity(count);
        let mut half_quad = Vec::with_capacity(count);
        for k in 0..count {
            let mut mu = DVector::<f64>::zeros(m);
            for i in 0..m {
                let mut acc = 0.0;
                for j in 0..n {
                    let x = if k >> j & 1 == 1 { 1.0 } else { -1.0 };
                    acc += f64::from(a.entry(i, j)) * x;
                }
                mu[i] = acc * scale;
            }
            let solved = cov.solve(&mu);
            half_quad.push(-0.5 * mu.dot(&solved));
            solved_means.push(solved);
        }
        let log_norm = -(n as f64) * std::f64::consts::LN_2
            - 0.5 * (m as f64 * (2.0 * std::f64::consts::PI).ln() + cov.log_det());
        Self { solved_means, half_quad, log_norm }
    }

    /// Natural log of the exact output density at y.
    fn log_density(&self, y: &DVector<f64>, cov: &EffectiveCovariance) -> f64 {
        let base = -0.5 * y.dot(&cov.solve(y));
        let mut max = f64::NEG_INFINITY;
        let mut exponents = Vec::with_capacity(self.solved_means.len());
        for (solved, hq) in self.solved_means.iter().zip(&self.half_quad) {
            let e = base + y.dot(solved) + hq;
            exponents.push(e);
            if e > max {
                max = e;
            }
        }
        let sum: f64 = exponents.iter().map(|e| (e - max).exp()).sum();
        self.log_norm + max + sum.ln()
    }
}

fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Monte-Carlo estimate of the output entropy `h(Y)` in bits, with its
/// standard error.
///
/// Batches of fixed size derive their random streams from
/// `(seed, batch index)`, so the estimate is bit-identical regardless of the
/// number of worker threads.
pub fn output_entropy_mc(
    a: &SignatureMatrix,
    sigma: f64,
    rho: f64,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if a.cols() > MAX_EXACT_USERS {
        return Err(Error::TooManyUsers { n: a.cols(), max: MAX_EXACT_USERS });
    }
    if samples < 1000 {
        return Err(Error::Domain(format!(
            "need at least 1000 samples for a usable standard error, got {samples}"
        )));
    }
    let cov = EffectiveCovariance::new(a, sigma, rho)?;
    let density = MixtureDensity::new(a, &cov);
    let m = a.rows();
    let n = a.cols();
    let scale = 1.0 / (m as f64).sqrt();

    let batches = samples.div_ceil(MC_BATCH);
    let partials: Vec<Result<(f64, f64)>> = (0..batches)
        .into_par_iter()
        .map(|batch| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(batch as u64 + 1);
            let count = MC_BATCH.min(samples - batch * MC_BATCH);
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            let mut y = DVector::<f64>::zeros(m);
            for _ in 0..count {
                y.fill(0.0);
                for j in 0..n {
                    let x: f64 = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                    let amp = x + rho * standard_normal(&mut rng);
                    for i in 0..m {
                        y[i] += f64::from(a.entry(i, j)) * amp;
                    }
                }
                for i in 0..m {
                    y[i] = y[i] * scale + sigma * standard_normal(&mut rng);
                }
                let log_p = density.log_density(&y, &cov);
                if !log_p.is_finite() {
                    return Err(Error::NonFinite(format!("log density = {log_p}")));
                }
                let bits = -log_p * std::f64::consts::LOG2_E;
                sum += bits;
                sum_sq += bits * bits;
            }
            Ok((sum, sum_sq))
        })
        .collect();

    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for partial in partials {
        let (s, s2) = partial?;
        sum += s;
        sum_sq += s2;
    }
    let count = samples as f64;
    let mean = sum / count;
    let variance = ((sum_sq - count * mean * mean) / (count - 1.0)).max(0.0);
    Ok((mean, (variance / count).sqrt()))
}

/// Per-user mutual information `(h(Y) − h(Y|X)) / n` at uniform inputs, with
/// the Monte-Carlo standard error propagated (the conditional entropy is
/// exact).
pub fn sum_capacity_estimate(
    a: &SignatureMatrix,
    sigma: f64,
    rho: f64,
    samples: usize,
    seed: u64,
) -> Result<MiEstimate> {
    let (h_y, se) = output_entropy_mc(a, sigma, rho, samples, seed)?;
    let cov = EffectiveCovariance::new(a, sigma, rho)?;
    let n = a.cols() as f64;
    Ok(MiEstimate {
        bits_per_user: (h_y - conditional_entropy(&cov)) / n,
        std_error: se / n,
        samples,
        seed,
    })
}
