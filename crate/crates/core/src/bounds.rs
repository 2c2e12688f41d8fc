//! The headline capacity bounds and the parameter conversions used to drive
//! them.
//!
//! For load β ≤ 1 orthogonal signatures are optimal and the per-user
//! capacity is the exact BPSK value at variance σ² + ρ². For β > 1 the
//! near-far effect enters through two effective noise variances derived from
//! the extreme eigenvalues of the near-far covariance:
//! `θ² = (√β + 1)² ρ² + σ²` (worst case, lower bound) and
//! `ω² = (√β − 1)² ρ² + σ²` (best case, upper bounds).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{binary_entropy, bpsk_capacity, gaussian_entropy, shifted_mixture_entropy};
use crate::tanaka;

/// System parameters: load ratio β = n/m, per-chip noise standard deviation
/// σ, and near-far standard deviation ρ (the Gaussian spread of the received
/// amplitude around its unit mean).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SystemParams {
    beta: f64,
    sigma: f64,
    rho: f64,
}

impl SystemParams {
    pub fn new(beta: f64, sigma: f64, rho: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::Domain(format!("beta must be > 0, got {beta}")));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Domain(format!("sigma must be > 0, got {sigma}")));
        }
        if !(rho >= 0.0 && rho.is_finite()) {
            return Err(Error::Domain(format!("rho must be >= 0, got {rho}")));
        }
        Ok(Self { beta, sigma, rho })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Power control factor in dB: `10 log10(mean² / variance)` of the
    /// received amplitude, which has mean 1 and variance ρ². Infinite under
    /// perfect power control (ρ = 0).
    pub fn pcf_db(&self) -> f64 {
        if self.rho == 0.0 {
            f64::INFINITY
        } else {
            -20.0 * self.rho.log10()
        }
    }

    /// E_b/N_0 in dB under the unit-signature-energy convention
    /// E_b = 1, N_0 = 2σ².
    pub fn ebn0_db(&self) -> f64 {
        -10.0 * (2.0 * self.sigma * self.sigma).log10()
    }
}

/// Worst-case effective noise variance `θ² = (√β + 1)² ρ² + σ²`.
pub fn theta_squared(p: &SystemParams) -> f64 {
    let edge = p.beta.sqrt() + 1.0;
    edge * edge * p.rho * p.rho + p.sigma * p.sigma
}

/// Best-case effective noise variance `ω² = (√β − 1)² ρ² + σ²`.
pub fn omega_squared(p: &SystemParams) -> f64 {
    let edge = p.beta.sqrt() - 1.0;
    edge * edge * p.rho * p.rho + p.sigma * p.sigma
}

/// Near-far spread from a power control factor in dB, with the received
/// amplitude mean fixed at 1: `ρ = 10^(−PCF/20)`.
pub fn pcf_db_to_rho(pcf_db: f64) -> f64 {
    10f64.powf(-pcf_db / 20.0)
}

/// Noise standard deviation from E_b/N_0 in dB under the convention
/// E_b = 1, N_0 = 2σ²: `σ = sqrt(10^(−x/10) / 2)`.
pub fn ebn0_db_to_sigma(ebn0_db: f64) -> f64 {
    (10f64.powf(-ebn0_db / 10.0) / 2.0).sqrt()
}

/// Grid sizes, tolerances and iteration caps of the inf–sup optimizer.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    /// γ search domain, scanned log-spaced.
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub gamma_grid: usize,
    /// Uniform grid over t ∈ [0, 1] for the inner supremum.
    pub t_grid: usize,
    /// Absolute tolerance of both the inner sup and the outer inf.
    pub tolerance: f64,
    /// Iteration cap of each golden-section refinement.
    pub max_refine_iters: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            gamma_min: 1e-6,
            gamma_max: 1e6,
            gamma_grid: 200,
            t_grid: 1025,
            tolerance: 1e-8,
            max_refine_iters: 200,
        }
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section maximum of `f` on [lo, hi]; returns the best value.
/// Errors if the bracket has not shrunk to `width_tol` within `max_iters`.
fn golden_max<F: Fn(f64) -> f64>(
    f: &F,
    mut lo: f64,
    mut hi: f64,
    width_tol: f64,
    max_iters: usize,
) -> Result<f64> {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iters = 0;
    while hi - lo > width_tol {
        if iters >= max_iters {
            return Err(Error::OptimizerBudget(format!(
                "golden section stuck at bracket width {}",
                hi - lo
            )));
        }
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
        iters += 1;
    }
    Ok(f1.max(f2))
}

/// The bracketed objective of the lower bound:
/// `H(t) + (γ log2 e − log2(1 + γ(1 + 4tβ/v))) / (2β)`.
fn lower_bracket(gamma: f64, t: f64, beta: f64, noise_variance: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    let h = binary_entropy(t).expect("t clamped to [0,1]");
    let slope = 1.0 + 4.0 * t * beta / noise_variance;
    h + (gamma * std::f64::consts::LOG2_E - (1.0 + gamma * slope).log2()) / (2.0 * beta)
}

/// Candidate t grid of the inner supremum: a uniform grid over [0, 1]
/// augmented with log-spaced points down to 1e-12.
///
/// The bracket has a boundary-layer maximum at `t* ≈ 2^(−2γ/(v(1+γ) ln 2))`
/// driven by the infinite slope of H at 0; a purely uniform grid cannot see
/// it when it beats the interior maximum near the saddle. Below ~1e-12 the
/// layer's value is indistinguishable from t = 0, which the grid contains.
fn inner_t_grid(t_grid: usize) -> Vec<f64> {
    let tg = t_grid.max(3);
    let mut ts = Vec::with_capacity(tg + tg / 2);
    for i in 0..tg {
        ts.push(i as f64 / (tg - 1) as f64);
    }
    let lg = (tg / 2).max(8);
    let (ln_lo, ln_hi) = ((1e-12f64).ln(), 0.5f64.ln());
    for j in 0..lg {
        ts.push((ln_lo + (ln_hi - ln_lo) * j as f64 / (lg - 1) as f64).exp());
    }
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    ts
}

/// Base lower bound at an explicit effective noise variance:
/// `1 − inf_{γ>0} sup_{t∈[0,1]} [bracket]`, in bits per user.
///
/// The inner landscape can carry two competing maxima (a boundary layer near
/// t = 0 and an interior peak) that tie at the saddle, so the inner sup
/// golden-refines every local maximum of the candidate grid. The outer inf
/// scans log-spaced γ and golden-refines around the best point; the outer
/// envelope is V-shaped where the two inner peaks cross, which golden
/// section handles.
pub fn lower_bound_base(beta: f64, noise_variance: f64, opt: &OptimizerConfig) -> Result<f64> {
    if beta <= 1.0 {
        return Err(Error::Domain(format!(
            "the bound applies to the overloaded regime beta > 1, got {beta}"
        )));
    }
    if noise_variance <= 0.0 || !noise_variance.is_finite() {
        return Err(Error::Domain(format!(
            "noise variance must be > 0, got {noise_variance}"
        )));
    }

    let ts = inner_t_grid(opt.t_grid);
    let values = std::cell::RefCell::new(vec![0.0f64; ts.len()]);
    let inner_sup = |gamma: f64| -> Result<f64> {
        let mut values = values.borrow_mut();
        for (v, &t) in values.iter_mut().zip(&ts) {
            *v = lower_bracket(gamma, t, beta, noise_variance);
        }
        let last = ts.len() - 1;
        let mut best = values.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let mut peaks: Vec<usize> = (0..=last)
            .filter(|&i| {
                (i == 0 || values[i] >= values[i - 1])
                    && (i == last || values[i] >= values[i + 1])
            })
            .collect();
        peaks.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
        for &i in peaks.iter().take(8) {
            let lo = ts[i.saturating_sub(1)];
            let hi = ts[(i + 1).min(last)];
            if hi > lo {
                let refined = golden_max(
                    &|t| lower_bracket(gamma, t, beta, noise_variance),
                    lo,
                    hi,
                    opt.tolerance,
                    opt.max_refine_iters,
                )?;
                best = best.max(refined);
            }
        }
        Ok(best)
    };

    let gg = opt.gamma_grid.max(3);
    let ln_min = opt.gamma_min.ln();
    let ln_max = opt.gamma_max.ln();
    let mut best_i = 0;
    let mut best = f64::INFINITY;
    for i in 0..gg {
        let u = ln_min + (ln_max - ln_min) * i as f64 / (gg - 1) as f64;
        let v = inner_sup(u.exp())?;
        if v < best {
            best = v;
            best_i = i;
        }
    }

    // Golden-section minimization of the outer envelope in log-gamma around
    // the best grid point, propagating inner failures.
    let step = (ln_max - ln_min) / (gg - 1) as f64;
    let mut lo = ln_min + step * (best_i as f64 - 1.0).max(0.0);
    let mut hi = (ln_min + step * (best_i + 1) as f64).min(ln_max);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = inner_sup(x1.exp())?;
    let mut f2 = inner_sup(x2.exp())?;
    let mut iters = 0;
    while hi - lo > opt.tolerance {
        if iters >= opt.max_refine_iters {
            return Err(Error::OptimizerBudget(format!(
                "outer refinement stuck at log-gamma bracket width {}",
                hi - lo
            )));
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = inner_sup(x1.exp())?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = inner_sup(x2.exp())?;
        }
        iters += 1;
    }
    Ok(1.0 - f1.min(f2).min(best))
}

/// Near-far lower bound: the base bound at the worst-case variance θ².
pub fn lower_bound(p: &SystemParams, opt: &OptimizerConfig) -> Result<f64> {
    lower_bound_base(p.beta, theta_squared(p), opt)
}

/// Conjectured upper bound
/// `min{ h(ĝ) − h(g), log2(1 + β/ω²) / (2β) }` for β > 1. The
/// data-processing term is the shifted-mixture entropy gap at variance ρ²,
/// which tends to one bit as ρ → 0 and is defined there by continuity.
pub fn conjectured_upper_bound(p: &SystemParams) -> Result<f64> {
    if p.beta <= 1.0 {
        return Err(Error::Domain(format!(
            "the bound applies to the overloaded regime beta > 1, got {}",
            p.beta
        )));
    }
    let dp_term = if p.rho == 0.0 {
        1.0
    } else {
        let v = p.rho * p.rho;
        shifted_mixture_entropy(v)? - gaussian_entropy(v)?
    };
    let info_term = (1.0 + p.beta / omega_squared(p)).log2() / (2.0 * p.beta);
    Ok(dp_term.min(info_term))
}

/// Exact capacity in the underloaded regime β ≤ 1: the BPSK value at total
/// variance σ² + ρ².
pub fn underloaded_capacity(p: &SystemParams) -> Result<f64> {
    if p.beta > 1.0 {
        return Err(Error::Domain(format!(
            "exact capacity requires beta <= 1, got {}",
            p.beta
        )));
    }
    bpsk_capacity(p.sigma * p.sigma + p.rho * p.rho)
}

/// All bounds at one parameter point, in bits per user.
///
/// Values are stored raw (the lower bound can go negative at very low SNR);
/// `*_clamped` accessors clip to [0, 1].
#[derive(Debug, Clone, Serialize)]
pub struct BoundSet {
    pub lower: f64,
    pub upper_conjectured: f64,
    pub upper_tanaka: f64,
    /// Exact capacity; present iff β ≤ 1.
    pub exact: Option<f64>,
    pub theta2: f64,
    pub omega2: f64,
}

impl BoundSet {
    pub fn lower_clamped(&self) -> f64 {
        self.lower.clamp(0.0, 1.0)
    }

    pub fn upper_conjectured_clamped(&self) -> f64 {
        self.upper_conjectured.clamp(0.0, 1.0)
    }

    pub fn upper_tanaka_clamped(&self) -> f64 {
        self.upper_tanaka.clamp(0.0, 1.0)
    }

    pub fn exact_clamped(&self) -> Option<f64> {
        self.exact.map(|c| c.clamp(0.0, 1.0))
    }
}

/// Evaluate every bound at the given parameters: the exact value doubles as
/// all three bounds for β ≤ 1; for β > 1 the lower bound, the conjectured
/// upper bound and the ω²-substituted Tanaka bound are computed.
pub fn capacity_bounds(p: &SystemParams, opt: &OptimizerConfig) -> Result<BoundSet> {
    let theta2 = theta_squared(p);
    let omega2 = omega_squared(p);
    if p.beta <= 1.0 {
        let exact = underloaded_capacity(p)?;
        Ok(BoundSet {
            lower: exact,
            upper_conjectured: exact,
            upper_tanaka: exact,
            exact: Some(exact),
            theta2,
            omega2,
        })
    } else {
        Ok(BoundSet {
            lower: lower_bound(p, opt)?,
            upper_conjectured: conjectured_upper_bound(p)?,
            upper_tanaka: tanaka::tanaka_bound_nearfar(p)?.bound_bits(),
            exact: None,
            theta2,
            omega2,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn effective_variances_direct_substitution() {
        let p = SystemParams::new(4.0, 0.5, 0.1).unwrap();
        assert!((theta_squared(&p) - 0.34).abs() < 1e-15);
        assert!((omega_squared(&p) - 0.26).abs() < 1e-15);

        let p = SystemParams::new(7.3, 0.4, 0.0).unwrap();
        assert!((theta_squared(&p) - 0.16).abs() < 1e-15);
        assert!((omega_squared(&p) - 0.16).abs() < 1e-15);

        // sigma = 0 is outside SystemParams, approach the (beta=1, rho=1)
        // corner from sigma -> 0: theta^2 -> 4, omega^2 -> sigma^2.
        let p = SystemParams::new(1.0, 1e-9, 1.0).unwrap();
        assert!((theta_squared(&p) - 4.0).abs() < 1e-12);
        assert!(omega_squared(&p) < 1e-17);

        let p = SystemParams::new(1.0, 0.3, 5.0).unwrap();
        assert!((omega_squared(&p) - 0.09).abs() < 1e-15);
    }

    #[test]
    fn params_validation_and_views() {
        assert!(SystemParams::new(0.0, 1.0, 0.0).is_err());
        assert!(SystemParams::new(2.0, 0.0, 0.0).is_err());
        assert!(SystemParams::new(2.0, 1.0, -0.1).is_err());
        let p = SystemParams::new(2.0, ebn0_db_to_sigma(20.0), pcf_db_to_rho(20.0)).unwrap();
        assert!((p.pcf_db() - 20.0).abs() < 1e-12);
        assert!((p.ebn0_db() - 20.0).abs() < 1e-12);
        assert!(SystemParams::new(2.0, 1.0, 0.0).unwrap().pcf_db().is_infinite());
    }

    #[test]
    fn pcf_conversion_values() {
        assert!((pcf_db_to_rho(20.0) - 0.1).abs() < 1e-15);
        assert!((pcf_db_to_rho(0.0) - 1.0).abs() < 1e-15);
        assert!((pcf_db_to_rho(35.0) - 0.017_782_794_100_389_23).abs() < 1e-15);
    }

    #[test]
    fn ebn0_conversion_values() {
        assert!((ebn0_db_to_sigma(0.0) - 0.707_106_781_186_547_5).abs() < 1e-15);
        assert!((ebn0_db_to_sigma(20.0) - 0.070_710_678_118_654_75).abs() < 1e-15);
        assert!((ebn0_db_to_sigma(-3.010_299_956_639_812) - 1.0).abs() < 1e-4);
    }

    #[test]
    fn lower_bound_vanishes_in_heavy_noise() {
        let opt = OptimizerConfig::default();
        let b = lower_bound_base(2.0, 1e6, &opt).unwrap();
        assert!(b <= 0.01, "bound = {b}");
    }

    #[test]
    fn lower_bound_saturates_at_high_snr() {
        let opt = OptimizerConfig::default();
        let b = lower_bound_base(2.0, 0.005, &opt).unwrap();
        assert!(b > 0.9, "bound = {b}");
        assert!(b <= 1.0);
    }

    #[test]
    fn lower_bound_monotone_in_variance() {
        let opt = OptimizerConfig::default();
        let mut prev = f64::INFINITY;
        for i in 0..12 {
            let v = 10f64.powf(-2.5 + 5.0 * i as f64 / 11.0);
            let b = lower_bound_base(2.0, v, &opt).unwrap();
            assert!(b <= prev + 1e-10, "not monotone at v = {v}");
            prev = b;
        }
    }

    #[test]
    fn lower_bound_rejects_underloaded_and_bad_variance() {
        let opt = OptimizerConfig::default();
        assert!(lower_bound_base(1.0, 1.0, &opt).is_err());
        assert!(lower_bound_base(2.0, 0.0, &opt).is_err());
    }

    /// Small brute-force scan of the inf-sup as an independent check; the
    /// full-size oracle runs in the acceptance suite. The t scan mixes a
    /// uniform grid with a log-spaced one so the boundary-layer maximum near
    /// t = 0 is resolved, and the gamma window zooms around the incumbent.
    fn brute_infsup(beta: f64, v: f64) -> f64 {
        let mut t_scan: Vec<f64> = (0..4000).map(|j| j as f64 / 3999.0).collect();
        t_scan.extend((0..2000).map(|j| {
            let (lo, hi) = ((1e-12f64).ln(), 0.25f64.ln());
            (lo + (hi - lo) * j as f64 / 1999.0).exp()
        }));
        let sup_t = |g: f64| {
            t_scan
                .iter()
                .map(|&t| lower_bracket(g, t, beta, v))
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let mut ln_lo = (1e-6f64).ln();
        let mut ln_hi = (1e6f64).ln();
        let mut best = (f64::INFINITY, 0.0);
        for _ in 0..4 {
            best = (f64::INFINITY, 0.0);
            for i in 0..800 {
                let u = ln_lo + (ln_hi - ln_lo) * i as f64 / 799.0;
                let sup = sup_t(u.exp());
                if sup < best.0 {
                    best = (sup, u);
                }
            }
            let step = (ln_hi - ln_lo) / 799.0;
            ln_lo = best.1 - 4.0 * step;
            ln_hi = best.1 + 4.0 * step;
        }
        1.0 - best.0
    }

    #[test]
    fn optimizer_matches_small_brute_force() {
        let opt = OptimizerConfig::default();
        for v in [0.05, 0.5, 5.0] {
            let fast = lower_bound_base(2.0, v, &opt).unwrap();
            let brute = brute_infsup(2.0, v);
            assert!((fast - brute).abs() < 1e-4, "v = {v}: {fast} vs {brute}");
        }
    }

    #[test]
    fn reference_operating_point_is_pinned() {
        // beta = 2, E_b/N_0 = 20 dB, PCF = 20 dB; value frozen from this
        // implementation after cross-validation against the dense
        // brute-force scan in the acceptance suite.
        let opt = OptimizerConfig::default();
        let p = SystemParams::new(2.0, ebn0_db_to_sigma(20.0), pcf_db_to_rho(20.0)).unwrap();
        let b = lower_bound(&p, &opt).unwrap();
        assert!((b - 0.978_229_384_5).abs() < 1e-6, "bound = {b}");
    }

    #[test]
    fn nearfar_lower_bound_reduces_and_degrades() {
        let opt = OptimizerConfig::default();
        let p0 = SystemParams::new(2.0, 0.3, 0.0).unwrap();
        let base = lower_bound_base(2.0, 0.09, &opt).unwrap();
        assert_eq!(lower_bound(&p0, &opt).unwrap(), base);

        let p1 = SystemParams::new(2.0, 0.3, 0.05).unwrap();
        let p2 = SystemParams::new(2.0, 0.3, 0.2).unwrap();
        let b1 = lower_bound(&p1, &opt).unwrap();
        let b2 = lower_bound(&p2, &opt).unwrap();
        assert!(lower_bound(&p0, &opt).unwrap() >= b1 - 1e-10);
        assert!(b1 >= b2 - 1e-10);
    }

    #[test]
    fn tight_power_control_approaches_the_perfect_limit() {
        // PCF = 60 dB (rho = 1e-3): every bound within 1e-3 of its rho = 0
        // value, and near-far never helps.
        let opt = OptimizerConfig::default();
        let sigma = 0.3;
        let p0 = SystemParams::new(2.0, sigma, 0.0).unwrap();
        let p60 = SystemParams::new(2.0, sigma, pcf_db_to_rho(60.0)).unwrap();
        let set0 = capacity_bounds(&p0, &opt).unwrap();
        let set60 = capacity_bounds(&p60, &opt).unwrap();
        assert!((set0.lower - set60.lower).abs() < 1e-3);
        assert!((set0.upper_conjectured - set60.upper_conjectured).abs() < 1e-3);
        assert!((set0.upper_tanaka - set60.upper_tanaka).abs() < 1e-3);
        assert!(set60.lower <= set0.lower + 1e-9);
        assert!(set60.upper_conjectured <= set0.upper_conjectured + 1e-9);
    }

    #[test]
    fn conjectured_upper_bound_reference_points() {
        // rho = 0 recovers min{1, log2(1 + beta/sigma^2)/(2 beta)}.
        let p = SystemParams::new(4.0, 1.0, 0.0).unwrap();
        let b = conjectured_upper_bound(&p).unwrap();
        assert!((b - 0.290_241_011_860_920_3).abs() < 1e-12);

        // strong near-far kills the bound
        let p = SystemParams::new(2.0, 1.0, 1e3).unwrap();
        assert!(conjectured_upper_bound(&p).unwrap() < 1e-3);

        // min can be the data-processing term
        let p = SystemParams::new(2.0, 0.01, 0.5).unwrap();
        let b = conjectured_upper_bound(&p).unwrap();
        let dp = shifted_mixture_entropy(0.25).unwrap() - gaussian_entropy(0.25).unwrap();
        assert!((b - dp).abs() < 1e-12);

        assert!(conjectured_upper_bound(&SystemParams::new(0.5, 1.0, 0.0).unwrap()).is_err());
    }

    #[test]
    fn underloaded_capacity_matches_bpsk() {
        let p = SystemParams::new(1.0, 1e-3, 0.0).unwrap();
        assert!((underloaded_capacity(&p).unwrap() - 1.0).abs() < 1e-6);
        let p = SystemParams::new(0.5, 1e3, 0.0).unwrap();
        assert!(underloaded_capacity(&p).unwrap() < 1e-3);
        let p = SystemParams::new(1.0, 0.5, 0.1).unwrap();
        assert_eq!(
            underloaded_capacity(&p).unwrap(),
            bpsk_capacity(0.26).unwrap()
        );
        assert!(underloaded_capacity(&SystemParams::new(1.5, 1.0, 0.0).unwrap()).is_err());
    }

    #[test]
    fn capacity_bounds_exact_regime_collapses() {
        let opt = OptimizerConfig::default();
        let p = SystemParams::new(1.0, 0.7, 0.2).unwrap();
        let set = capacity_bounds(&p, &opt).unwrap();
        let exact = set.exact.unwrap();
        assert_eq!(set.lower, exact);
        assert_eq!(set.upper_conjectured, exact);
        assert_eq!(set.upper_tanaka, exact);
        assert!(set.theta2 >= set.omega2 && set.omega2 >= p.sigma() * p.sigma());
    }

    #[test]
    fn capacity_bounds_ordering_overloaded() {
        let opt = OptimizerConfig::default();
        let p = SystemParams::new(2.0, ebn0_db_to_sigma(8.0), 0.1).unwrap();
        let set = capacity_bounds(&p, &opt).unwrap();
        assert!(set.exact.is_none());
        assert!(set.lower <= set.upper_conjectured + 1e-6);
        assert!(set.lower <= set.upper_tanaka + 1e-6);
        assert!(set.theta2 > set.omega2);
    }

    #[test]
    fn boundset_clamping() {
        let set = BoundSet {
            lower: -0.2,
            upper_conjectured: 0.5,
            upper_tanaka: 1.3,
            exact: None,
            theta2: 1.0,
            omega2: 0.5,
        };
        assert_eq!(set.lower_clamped(), 0.0);
        assert_eq!(set.upper_conjectured_clamped(), 0.5);
        assert_eq!(set.upper_tanaka_clamped(), 1.0);
        assert_eq!(set.exact_clamped(), None);
    }

    #[test]
    fn optimizer_config_roundtrips_as_json() {
        let opt = OptimizerConfig::default();
        let text = serde_json::to_string(&opt).unwrap();
        let back: OptimizerConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back.gamma_grid, opt.gamma_grid);
        assert_eq!(back.t_grid, opt.t_grid);
        // partial configs fall back to defaults
        let partial: OptimizerConfig = serde_json::from_str("{\"t_grid\": 513}").unwrap();
        assert_eq!(partial.t_grid, 513);
        assert_eq!(partial.gamma_grid, opt.gamma_grid);
    }
}
