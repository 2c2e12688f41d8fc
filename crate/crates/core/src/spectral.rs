//! Random ±1 signature matrices, their Gram spectra, and the
//! Marchenko–Pastur law used to calibrate the effective noise variances.
//!
//! The object under study is the scaled Gram matrix `(1/m) A Aᵀ` of an
//! `m × n` ±1 signature matrix `A` with load `β = n/m`. Its bulk spectrum
//! follows the Marchenko–Pastur law with edges `(1 ∓ √β)²`; the extreme
//! eigenvalues drive the `θ²`/`ω²` substitutions in the capacity bounds.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// An m × n matrix over {+1, −1} together with the seed that generated it.
///
/// The 1/√m scaling of the channel model is applied by the operations that
/// consume the matrix, not stored in it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignatureMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<i8>,
    seed: u64,
}

impl SignatureMatrix {
    /// Draw an m × n matrix with i.i.d. uniform ±1 entries. The same seed
    /// reproduces the same matrix bit for bit; entries are filled row-major
    /// from a counter-based stream cipher generator.
    pub fn sample(rows: usize, cols: usize, seed: u64) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Domain(format!(
                "signature matrix needs m, n >= 1, got {rows} x {cols}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let entries = (0..rows * cols)
            .map(|_| if rng.gen::<bool>() { 1i8 } else { -1i8 })
            .collect();
        Ok(Self { rows, cols, entries, seed })
    }

    /// Build a matrix from explicit ±1 entries in row-major order.
    pub fn from_entries(rows: usize, cols: usize, entries: Vec<i8>, seed: u64) -> Result<Self> {
        if rows == 0 || cols == 0 || entries.len() != rows * cols {
            return Err(Error::Domain(format!(
                "entry buffer of length {} does not fill {rows} x {cols}",
                entries.len()
            )));
        }
        if entries.iter().any(|&e| e != 1 && e != -1) {
            return Err(Error::Domain("signature entries must be +1 or -1".into()));
        }
        Ok(Self { rows, cols, entries, seed })
    }

    /// Sylvester (Hadamard) construction: a 2^k × 2^k ±1 matrix with
    /// mutually orthogonal rows.
    pub fn sylvester(k: u32) -> Result<Self> {
        if k > 12 {
            return Err(Error::Domain(format!("sylvester order 2^{k} is unreasonably large")));
        }
        let n = 1usize << k;
        let mut entries = vec![1i8; n * n];
        let mut size = 1;
        while size < n {
            for i in 0..size {
                for j in 0..size {
                    let v = entries[i * n + j];
                    entries[i * n + (j + size)] = v;
                    entries[(i + size) * n + j] = v;
                    entries[(i + size) * n + (j + size)] = -v;
                }
            }
            size *= 2;
        }
        Ok(Self { rows: n, cols: n, entries, seed: 0 })
    }

    /// Chip count m.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// User count n.
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Load ratio β = n / m.
    pub fn beta(&self) -> f64 {
        self.cols as f64 / self.rows as f64
    }

    pub fn entry(&self, row: usize, col: usize) -> i8 {
        self.entries[row * self.cols + col]
    }

    /// The unscaled matrix as dense f64.
    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| f64::from(self.entry(i, j)))
    }
}

/// Support edges `a = (1 − √β)²`, `b = (1 + √β)²` of the Marchenko–Pastur
/// law.
pub fn mp_edges(beta: f64) -> Result<(f64, f64)> {
    if beta <= 0.0 || !beta.is_finite() {
        return Err(Error::Domain(format!("mp_edges needs beta > 0, got {beta}")));
    }
    let r = beta.sqrt();
    Ok(((1.0 - r) * (1.0 - r), (1.0 + r) * (1.0 + r)))
}

/// Point mass at zero of the Marchenko–Pastur law, `(1 − 1/β)⁺`.
pub fn mp_point_mass(beta: f64) -> Result<f64> {
    if beta <= 0.0 || !beta.is_finite() {
        return Err(Error::Domain(format!("mp_point_mass needs beta > 0, got {beta}")));
    }
    Ok((1.0 - 1.0 / beta).max(0.0))
}

/// Absolutely continuous part of the Marchenko–Pastur density,
/// `√((x−a)⁺ (b−x)⁺) / (2π β x)`. Zero outside the support; the point mass
/// at zero is reported separately by [`mp_point_mass`].
pub fn mp_density(x: f64, beta: f64) -> Result<f64> {
    let (a, b) = mp_edges(beta)?;
    if x <= a || x >= b {
        return Ok(0.0);
    }
    Ok(((x - a) * (b - x)).sqrt() / (2.0 * std::f64::consts::PI * beta * x))
}

/// Spectrum of a sampled signature matrix against the Marchenko–Pastur
/// prediction for `(1/m) A Aᵀ`.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralReport {
    /// Load ratio n / m.
    pub beta: f64,
    /// Eigenvalues of (1/m) A Aᵀ, ascending.
    pub eigenvalues: Vec<f64>,
    pub mp_lower_edge: f64,
    pub mp_upper_edge: f64,
    pub min_eig: f64,
    pub max_eig: f64,
    /// Kolmogorov–Smirnov distance between the empirical spectral CDF and
    /// the limiting CDF.
    pub ks_distance: f64,
}

/// Eigenvalues of `(1/m) A Aᵀ` in ascending order.
///
/// The Gram matrix is formed explicitly and handed to a dense symmetric
/// eigensolver; every eigenpair is verified to satisfy
/// `‖Gv − λv‖ ≤ 1e−8 ‖G‖`.
pub fn gram_eigenvalues(a: &SignatureMatrix) -> Result<Vec<f64>> {
    let m = a.rows;
    let dense = a.to_dense();
    let gram = &dense * dense.transpose() / m as f64;
    let eig = SymmetricEigen::try_new(gram.clone(), f64::EPSILON, 200 * m.max(8))
        .ok_or(Error::EigenFailure { size: m })?;

    let norm = eig.eigenvalues.iter().fold(0.0f64, |acc, &l| acc.max(l.abs()));
    let gv = &gram * &eig.eigenvectors;
    for i in 0..m {
        let lambda = eig.eigenvalues[i];
        let residual = (gv.column(i) - eig.eigenvectors.column(i) * lambda).norm();
        if residual > 1e-8 * norm {
            return Err(Error::EigenFailure { size: m });
        }
    }

    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// Limiting CDF of the spectrum of `(1/m) A Aᵀ` at load β.
///
/// Relative to the textbook law for `(1/m) Aᵀ A` this rescales the
/// continuous density by β and carries a zero-eigenvalue mass of `(1 − β)⁺`:
/// the m × m Gram matrix is rank-deficient only when n < m. The continuous
/// part is tabulated on 10⁴ panels of the substitution `x = a + (b−a) sin²θ`
/// (which removes the square-root edge singularities) and interpolated
/// monotonically in θ.
#[derive(Debug, Clone)]
pub struct GramSpectrumCdf {
    a: f64,
    b: f64,
    zero_mass: f64,
    cumulative: Vec<f64>,
}

const CDF_PANELS: usize = 10_000;

impl GramSpectrumCdf {
    pub fn new(beta: f64) -> Result<Self> {
        let (a, b) = mp_edges(beta)?;
        let zero_mass = (1.0 - beta).max(0.0);
        let width = b - a;
        // beta * mp_density after substitution: (width² / π) sin²θ cos²θ / x(θ),
        // finite at both endpoints (at θ = 0 with a = 0 it tends to cos²θ·width/π... ).
        let integrand = |theta: f64| {
            let s = theta.sin();
            let c = theta.cos();
            let x = a + width * s * s;
            if x == 0.0 {
                // only reachable at theta = 0 with a = 0, where the limit is width/pi
                width / std::f64::consts::PI
            } else {
                width * width / std::f64::consts::PI * s * s * c * c / x
            }
        };
        let h = std::f64::consts::FRAC_PI_2 / CDF_PANELS as f64;
        let mut cumulative = Vec::with_capacity(CDF_PANELS + 1);
        cumulative.push(0.0);
        let mut acc = 0.0;
        let mut f_lo = integrand(0.0);
        for i in 0..CDF_PANELS {
            let lo = i as f64 * h;
            let f_mid = integrand(lo + 0.5 * h);
            let f_hi = integrand(lo + h);
            acc += h / 6.0 * (f_lo + 4.0 * f_mid + f_hi);
            cumulative.push(acc);
            f_lo = f_hi;
        }
        // Pin the total mass exactly: zero_mass + continuous = 1.
        let target = 1.0 - zero_mass;
        let total = *cumulative.last().expect("nonempty");
        if total > 0.0 {
            let scale = target / total;
            for c in &mut cumulative {
                *c *= scale;
            }
        }
        Ok(Self { a, b, zero_mass, cumulative })
    }

    /// CDF value at x.
    pub fn eval(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        if x <= self.a {
            return self.zero_mass;
        }
        if x >= self.b {
            return 1.0;
        }
        let theta = ((x - self.a) / (self.b - self.a)).sqrt().asin();
        let pos = theta / std::f64::consts::FRAC_PI_2 * CDF_PANELS as f64;
        let i = (pos.floor() as usize).min(CDF_PANELS - 1);
        let frac = pos - i as f64;
        let c = self.cumulative[i] + frac * (self.cumulative[i + 1] - self.cumulative[i]);
        self.zero_mass + c
    }
}

/// Kolmogorov–Smirnov distance between the empirical CDF of `sorted` and a
/// reference CDF, evaluated at the jump points.
pub fn ks_distance<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F) -> f64 {
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max(((i + 1) as f64 / n - f).abs());
    }
    d
}

/// Full spectral comparison of one sampled matrix against the
/// Marchenko–Pastur prediction.
pub fn spectrum_report(a: &SignatureMatrix) -> Result<SpectralReport> {
    let beta = a.beta();
    let eigenvalues = gram_eigenvalues(a)?;
    let (lo, hi) = mp_edges(beta)?;
    let cdf = GramSpectrumCdf::new(beta)?;
    let ks = ks_distance(&eigenvalues, |x| cdf.eval(x));
    Ok(SpectralReport {
        beta,
        min_eig: eigenvalues[0],
        max_eig: *eigenvalues.last().expect("m >= 1"),
        mp_lower_edge: lo,
        mp_upper_edge: hi,
        ks_distance: ks,
        eigenvalues,
    })
}
