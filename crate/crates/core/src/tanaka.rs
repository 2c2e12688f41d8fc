//! Replica fixed point for the large-system capacity of binary CDMA and the
//! capacity formula built on it.
//!
//! The fixed-point system couples `λ = 1/(v + β(1−m))` with
//! `m = E_Z[tanh(√λ Z + λ)]`; the capacity at a solution is
//! `log2(1 + β(1−m)/v)/(2β) + g(λ, m) log2 e` with
//! `g(λ, m) = λ(1+m)/2 − E_Z[ln cosh(√λ Z + λ)]`.
//!
//! # Numerics
//!
//! Raw Gauss–Hermite quadrature in z is a poor fit for these integrands:
//! `tanh(√λ z + λ)` has complex poles a distance `π/(2√λ)` from the real
//! axis, which caps a 64-node rule near 1e-6 absolute error around λ ≈ 8.
//! Both means are therefore evaluated from an exact sign-split,
//!
//! ```text
//! E[tanh(X)]    = erf(√(λ/2)) − E[sign(X) (1 − tanh|X|)]
//! E[ln cosh(X)] = E|X| − ln 2 + E[ln(1 + e^{−2|X|})]
//! ```
//!
//! with `X ~ N(λ, λ)`: the leading terms are closed forms and the remainders
//! decay like `e^{−2|x|}`, so they are integrated in x-space, where the pole
//! distance is the constant π/2, by composite Gauss–Legendre panels. The
//! `order` knob scales the panel resolution; 64 and 128 agree to well below
//! 1e-12 everywhere.

use std::sync::OnceLock;

use serde::Serialize;

use crate::bounds::{omega_squared, SystemParams};
use crate::error::{Error, Result};
use crate::scalar::gauss_legendre;

/// Default resolution of the fixed-point quadratures.
pub const DEFAULT_QUAD_ORDER: u32 = 64;

/// Default scan grid for the fixed-point search.
pub const DEFAULT_GRID: usize = 4096;

/// Guard below m = 1; the scan interval is [0, 1 − MAG_GUARD].
const MAG_GUARD: f64 = 1e-9;

/// One solution of the replica fixed-point system.
#[derive(Debug, Clone, Serialize)]
pub struct TanakaSolution {
    /// λ = 1/(v + β(1 − m)).
    pub lambda: f64,
    /// Magnetization order parameter, in [0, 1).
    pub m_mag: f64,
    /// Capacity value at this solution, bits per user.
    pub capacity_bits: f64,
    /// |m − E[tanh(√λ Z + λ)]| recomputed at the solution.
    pub residual: f64,
}

/// Fixed-point solutions at one (β, noise variance) point, with the
/// conservative minimum-capacity solution selected as the reported bound.
#[derive(Debug, Clone, Serialize)]
pub struct TanakaBound {
    /// Effective noise variance the system was solved at.
    pub noise_variance: f64,
    pub solutions: Vec<TanakaSolution>,
    /// Index into `solutions` of the minimum-capacity solution.
    pub selected: usize,
}

impl TanakaBound {
    /// Capacity of the selected solution, bits per user.
    pub fn bound_bits(&self) -> f64 {
        self.solutions[self.selected].capacity_bits
    }
}

fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(16).expect("order 16 is valid"))
}

/// Localized remainder integrals of the sign-split evaluation:
/// `I₁ = E[sign(X)(1 − tanh|X|)]` and `I₂ = E[ln(1 + e^{−2|X|})]` for
/// `X ~ N(λ, λ)`. Both integrands decay like `e^{−2|x|}`, so the domain is
/// clipped to |x| ≤ 27 intersected with the ±13σ Gaussian window; panel
/// boundaries are snapped to x = 0 where the integrands are not smooth.
fn sign_split_remainders(lam: f64, order: u32) -> (f64, f64) {
    let sl = lam.sqrt();
    let lo = (lam - 13.0 * sl).max(-27.0);
    let hi = (lam + 13.0 * sl).min(27.0);
    if lo >= hi {
        return (0.0, 0.0);
    }
    let h = 0.8f64.min(0.5 * sl) * 64.0 / order as f64;
    let norm = 1.0 / (sl * (2.0 * std::f64::consts::PI).sqrt());
    let (nodes, weights) = gl16();

    let mut i1 = 0.0;
    let mut i2 = 0.0;
    let mut segment = |a: f64, b: f64| {
        if a >= b {
            return;
        }
        let panels = ((b - a) / h).ceil() as usize;
        let step = (b - a) / panels as f64;
        for p in 0..panels {
            let c = a + (p as f64 + 0.5) * step;
            let r = 0.5 * step;
            for (&u, &w) in nodes.iter().zip(weights) {
                let x = c + r * u;
                let ax = x.abs();
                let e2 = (-2.0 * ax).exp();
                let d = (x - lam) / sl;
                let dens = norm * (-0.5 * d * d).exp();
                let scale = w * r * dens;
                i1 += scale * x.signum() * 2.0 * e2 / (1.0 + e2);
                i2 += scale * e2.ln_1p();
            }
        }
    };
    if lo < 0.0 && hi > 0.0 {
        segment(lo, 0.0);
        segment(0.0, hi);
    } else {
        segment(lo, hi);
    }
    (i1, i2)
}

/// `E[tanh(√λ Z + λ)]` for standard normal Z, at the given resolution.
pub(crate) fn gaussian_tanh_mean(lam: f64, order: u32) -> f64 {
    let (i1, _) = sign_split_remainders(lam, order);
    libm::erf((0.5 * lam).sqrt()) - i1
}

/// `E[ln cosh(√λ Z + λ)]` for standard normal Z, at the given resolution.
pub(crate) fn gaussian_lncosh_mean(lam: f64, order: u32) -> f64 {
    let (_, i2) = sign_split_remainders(lam, order);
    let e_abs = lam * libm::erf((0.5 * lam).sqrt())
        + (2.0 * lam / std::f64::consts::PI).sqrt() * (-0.5 * lam).exp();
    e_abs - std::f64::consts::LN_2 + i2
}

fn check_system(beta: f64, noise_variance: f64) -> Result<()> {
    if beta <= 0.0 || !beta.is_finite() {
        return Err(Error::Domain(format!("beta must be > 0, got {beta}")));
    }
    if noise_variance <= 0.0 || !noise_variance.is_finite() {
        return Err(Error::Domain(format!(
            "noise variance must be > 0, got {noise_variance}"
        )));
    }
    Ok(())
}

fn effective_lambda(m_mag: f64, beta: f64, noise_variance: f64) -> f64 {
    1.0 / (noise_variance + beta * (1.0 - m_mag))
}

/// One application of the magnetization map at a given resolution:
/// `m ↦ E[tanh(√λ Z + λ)]` with `λ = 1/(v + β(1−m))`.
pub fn magnetization_map_at(
    order: u32,
    m_mag: f64,
    beta: f64,
    noise_variance: f64,
) -> Result<f64> {
    check_system(beta, noise_variance)?;
    if !(0.0..1.0).contains(&m_mag) {
        return Err(Error::Domain(format!("m must lie in [0, 1), got {m_mag}")));
    }
    Ok(gaussian_tanh_mean(effective_lambda(m_mag, beta, noise_variance), order))
}

/// [`magnetization_map_at`] at the default resolution.
pub fn magnetization_map(m_mag: f64, beta: f64, noise_variance: f64) -> Result<f64> {
    magnetization_map_at(DEFAULT_QUAD_ORDER, m_mag, beta, noise_variance)
}

/// Capacity in bits per user at a (λ, m) pair solving the fixed point for
/// (β, v), evaluated at the given quadrature resolution.
pub fn tanaka_capacity_at(order: u32, m_mag: f64, beta: f64, noise_variance: f64) -> Result<f64> {
    check_system(beta, noise_variance)?;
    let lam = effective_lambda(m_mag, beta, noise_variance);
    let g = 0.5 * lam * (1.0 + m_mag) - gaussian_lncosh_mean(lam, order);
    Ok((1.0 + beta * (1.0 - m_mag) / noise_variance).log2() / (2.0 * beta)
        + g * std::f64::consts::LOG2_E)
}

/// Capacity of a solved fixed point at the default resolution.
pub fn tanaka_capacity(sol: &TanakaSolution, beta: f64, noise_variance: f64) -> Result<f64> {
    tanaka_capacity_at(DEFAULT_QUAD_ORDER, sol.m_mag, beta, noise_variance)
}

/// All fixed points of the magnetization map on [0, 1).
///
/// ψ(m) = map(m) − m is scanned on a uniform grid over [0, 1 − 1e-9]; every
/// sign change is refined by bisection to |ψ| ≤ 1e-12 and roots closer than
/// 1e-8 are merged. ψ(0) > 0 always; when ψ is still positive at the top of
/// the scan interval the remaining fixed point lies in the saturated strip
/// (1 − 1e-9, 1), where the map is flat, and is found by direct iteration
/// (clamped to 1 − 1e-12 so m < 1 holds). The returned count is odd for
/// transversal root structures.
pub fn find_fixed_points_at(
    order: u32,
    beta: f64,
    noise_variance: f64,
    grid: usize,
) -> Result<Vec<TanakaSolution>> {
    check_system(beta, noise_variance)?;
    if grid < 64 {
        return Err(Error::Domain(format!("scan grid must be >= 64, got {grid}")));
    }
    let top = 1.0 - MAG_GUARD;
    let psi = |m: f64| gaussian_tanh_mean(effective_lambda(m, beta, noise_variance), order) - m;

    let step = top / (grid - 1) as f64;
    let mut roots: Vec<f64> = Vec::new();
    let mut prev_m = 0.0;
    let mut prev_psi = psi(0.0);
    if prev_psi == 0.0 {
        roots.push(0.0);
    }
    for i in 1..grid {
        let m = if i == grid - 1 { top } else { i as f64 * step };
        let value = psi(m);
        if value == 0.0 {
            roots.push(m);
        } else if prev_psi * value < 0.0 {
            roots.push(bisect(&psi, prev_m, m, prev_psi));
        }
        prev_m = m;
        prev_psi = value;
    }

    if prev_psi > 0.0 {
        // Saturated branch: the map is flat above the scan interval, so plain
        // iteration lands on the fixed point immediately.
        let mut m = top;
        for _ in 0..500 {
            let next = gaussian_tanh_mean(effective_lambda(m, beta, noise_variance), order)
                .min(1.0 - 1e-12);
            if (next - m).abs() <= 1e-15 {
                m = next;
                break;
            }
            m = next;
        }
        roots.push(m);
    }

    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-8);
    if roots.is_empty() {
        return Err(Error::BracketFailure { grid });
    }

    roots
        .into_iter()
        .map(|m| {
            let lambda = effective_lambda(m, beta, noise_variance);
            Ok(TanakaSolution {
                lambda,
                m_mag: m,
                capacity_bits: tanaka_capacity_at(order, m, beta, noise_variance)?,
                residual: (gaussian_tanh_mean(lambda, order) - m).abs(),
            })
        })
        .collect()
}

/// [`find_fixed_points_at`] at the default resolution.
pub fn find_fixed_points(beta: f64, noise_variance: f64, grid: usize) -> Result<Vec<TanakaSolution>> {
    find_fixed_points_at(DEFAULT_QUAD_ORDER, beta, noise_variance, grid)
}

fn bisect<F: Fn(f64) -> f64>(psi: &F, mut a: f64, mut b: f64, mut psi_a: f64) -> f64 {
    let mut mid = 0.5 * (a + b);
    for _ in 0..200 {
        mid = 0.5 * (a + b);
        let value = psi(mid);
        if value.abs() <= 1e-12 || (b - a) <= f64::EPSILON * mid.abs().max(1e-3) {
            return mid;
        }
        if psi_a * value < 0.0 {
            b = mid;
        } else {
            a = mid;
            psi_a = value;
        }
    }
    mid
}

/// Solve the fixed point at an explicit (β, noise variance) and select the
/// minimum-capacity solution as the reported bound.
pub fn bound_at_variance(beta: f64, noise_variance: f64) -> Result<TanakaBound> {
    let solutions = find_fixed_points(beta, noise_variance, DEFAULT_GRID)?;
    let selected = solutions
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| a.capacity_bits.total_cmp(&b.capacity_bits))
        .map(|(i, _)| i)
        .expect("solution list is nonempty");
    Ok(TanakaBound { noise_variance, solutions, selected })
}

/// Near-far Tanaka bound: solve at the best-case effective noise variance
/// ω² = (√β − 1)² ρ² + σ². Requires the overloaded regime β > 1.
pub fn tanaka_bound_nearfar(params: &SystemParams) -> Result<TanakaBound> {
    if params.beta() <= 1.0 {
        return Err(Error::Domain(format!(
            "near-far Tanaka bound needs beta > 1, got {}",
            params.beta()
        )));
    }
    bound_at_variance(params.beta(), omega_squared(params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{adaptive_simpson, std_normal_pdf};

    /// z-space oracle for E[f(sqrt(lam) Z + lam)] by adaptive Simpson.
    fn gauss_mean_oracle<F: Fn(f64) -> f64>(f: F, lam: f64, tol: f64) -> f64 {
        let sl = lam.sqrt();
        let g = move |z: f64| f(sl * z + lam) * std_normal_pdf(z);
        adaptive_simpson(&g, -13.0, 13.0, tol).unwrap()
    }

    fn lncosh(x: f64) -> f64 {
        let ax = x.abs();
        ax + (-2.0 * ax).exp().ln_1p() - std::f64::consts::LN_2
    }

    #[test]
    fn sign_split_means_match_adaptive_oracle() {
        for lam in [0.01, 0.1, 0.5, 1.0, 2.0, 4.0, 6.0, 8.0, 12.0, 16.0] {
            let t = gaussian_tanh_mean(lam, 64);
            let c = gaussian_lncosh_mean(lam, 64);
            let t_oracle = gauss_mean_oracle(f64::tanh, lam, 1e-12);
            let c_oracle = gauss_mean_oracle(lncosh, lam, 1e-12);
            assert!((t - t_oracle).abs() < 1e-10, "lam {lam}: tanh {t} vs {t_oracle}");
            assert!((c - c_oracle).abs() < 1e-10, "lam {lam}: lncosh {c} vs {c_oracle}");
        }
    }

    #[test]
    fn sign_split_means_frozen_values() {
        assert!((gaussian_tanh_mean(0.5, 64) - 0.350_113_404_675_130_8).abs() < 1e-13);
        assert!((gaussian_lncosh_mean(0.5, 64) - 0.298_654_528_415_194_86).abs() < 1e-13);
        assert!((gaussian_tanh_mean(6.0, 64) - 0.978_190_431_416_857_7).abs() < 1e-13);
        assert!((gaussian_lncosh_mean(6.0, 64) - 5.326_600_725_921_32).abs() < 1e-12);
    }

    #[test]
    fn resolution_knob_is_converged() {
        for lam in [0.03, 0.7, 3.0, 9.0, 30.0, 300.0] {
            let d_t = (gaussian_tanh_mean(lam, 64) - gaussian_tanh_mean(lam, 128)).abs();
            let d_c = (gaussian_lncosh_mean(lam, 64) - gaussian_lncosh_mean(lam, 128)).abs();
            assert!(d_t < 1e-12 && d_c < 1e-12, "lam {lam}: {d_t} {d_c}");
        }
    }

    #[test]
    fn map_limits() {
        // Heavy noise: lambda -> 0, the map collapses to ~lambda.
        assert!(magnetization_map(0.0, 2.0, 1e9).unwrap() < 1e-6);
        // Vanishing noise near saturation: the map sticks to 1.
        assert!(magnetization_map(1.0 - 1e-9, 2.0, 1e-6).unwrap() > 1.0 - 1e-9);
        assert!(magnetization_map(1.0, 2.0, 1.0).is_err());
        assert!(magnetization_map(0.5, 2.0, 0.0).is_err());
        assert!(magnetization_map(0.5, -1.0, 1.0).is_err());
    }

    #[test]
    fn map_matches_oracle_at_interior_point() {
        let got = magnetization_map(0.5, 2.0, 0.1).unwrap();
        let lam = 1.0 / (0.1 + 2.0 * 0.5);
        let want = gauss_mean_oracle(f64::tanh, lam, 1e-12);
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");
    }

    /// Oracle scan: count sign changes of psi on a dense grid, plus the
    /// saturated branch when psi stays positive at the top.
    fn oracle_root_count(beta: f64, v: f64) -> usize {
        let points = 100_000;
        let top = 1.0 - 1e-9;
        let psi = |m: f64| gaussian_tanh_mean(1.0 / (v + beta * (1.0 - m)), 64) - m;
        let mut count = 0;
        let mut prev = psi(0.0);
        for i in 1..points {
            let m = top * i as f64 / (points - 1) as f64;
            let cur = psi(m);
            if prev * cur < 0.0 {
                count += 1;
            }
            prev = cur;
        }
        if prev > 0.0 {
            count += 1;
        }
        count
    }

    #[test]
    fn fixed_point_unique_at_moderate_noise() {
        let sols = find_fixed_points(2.0, 1.0, DEFAULT_GRID).unwrap();
        assert_eq!(sols.len(), 1);
        assert_eq!(oracle_root_count(2.0, 1.0), 1);
        let s = &sols[0];
        assert!((s.m_mag - 0.307_430_653_557_883_37).abs() < 1e-10);
        assert!((s.lambda - 0.419_262_830_703_881_7).abs() < 1e-10);
        assert!((s.capacity_bits - 0.355_467_860_769_603_8).abs() < 1e-9);
        assert!(s.residual <= 1e-10);
        // lambda consistency identity
        let lam = 1.0 / (1.0 + 2.0 * (1.0 - s.m_mag));
        assert!((s.lambda - lam).abs() < 1e-12);
    }

    #[test]
    fn fixed_points_triple_in_coexistence_regime() {
        let sols = find_fixed_points(4.0, 0.01, DEFAULT_GRID).unwrap();
        assert_eq!(sols.len(), 3);
        assert_eq!(oracle_root_count(4.0, 0.01), 3);
        for s in &sols {
            assert!(s.residual <= 1e-10);
            assert!((0.0..1.0).contains(&s.m_mag));
        }
        // the saturated solution is the conservative (minimum-capacity) one here
        let bound = bound_at_variance(4.0, 0.01).unwrap();
        assert!((bound.bound_bits() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn capacity_limits() {
        let heavy = bound_at_variance(2.0, 1e6).unwrap();
        assert!(heavy.bound_bits() <= 0.01);
        let clean = bound_at_variance(2.0, 1e-6).unwrap();
        assert!((clean.bound_bits() - 1.0).abs() < 0.01);
    }

    #[test]
    fn capacity_matches_adaptive_reimplementation() {
        let sols = find_fixed_points(2.0, 1.0, DEFAULT_GRID).unwrap();
        let s = &sols[0];
        let g = 0.5 * s.lambda * (1.0 + s.m_mag) - gauss_mean_oracle(lncosh, s.lambda, 1e-13);
        let independent = (1.0 + 2.0 * (1.0 - s.m_mag)).log2() / 4.0
            + g * std::f64::consts::LOG2_E;
        let reported = tanaka_capacity(s, 2.0, 1.0).unwrap();
        assert!((reported - independent).abs() < 1e-8, "{reported} vs {independent}");
    }

    #[test]
    fn nearfar_bound_reduces_at_zero_rho() {
        let p0 = SystemParams::new(2.0, 1.0, 0.0).unwrap();
        let with_rho = tanaka_bound_nearfar(&p0).unwrap();
        let plain = bound_at_variance(2.0, 1.0).unwrap();
        assert_eq!(with_rho.bound_bits(), plain.bound_bits());
        assert_eq!(with_rho.noise_variance, 1.0);
    }

    #[test]
    fn nearfar_reference_operating_point_is_pinned() {
        // beta = 2, E_b/N_0 = 20 dB, PCF = 20 dB: omega^2 ~ 0.0067 puts the
        // selected solution on the saturated branch, one bit per user.
        let sigma = (10f64.powf(-2.0) / 2.0).sqrt();
        let p = SystemParams::new(2.0, sigma, 0.1).unwrap();
        let b = tanaka_bound_nearfar(&p).unwrap();
        assert!((b.bound_bits() - 1.0).abs() < 1e-6, "bound = {}", b.bound_bits());
        assert_eq!(b.solutions.len() % 2, 1);
    }

    #[test]
    fn nearfar_bound_near_unit_beta_ignores_rho() {
        let p = SystemParams::new(1.0001, 0.5, 10.0).unwrap();
        let b = tanaka_bound_nearfar(&p).unwrap();
        // (sqrt(beta)-1)^2 ~ 2.5e-9 shrinks even rho = 10 to nothing
        assert!((b.noise_variance - 0.25).abs() < 1e-5);
        let p_low = SystemParams::new(0.9, 0.5, 0.1).unwrap();
        assert!(tanaka_bound_nearfar(&p_low).is_err());
    }

    #[test]
    fn selected_bound_monotone_in_noise() {
        // 50 log-spaced variances per beta; the minimum-capacity selection
        // must respond monotonically to SNR even across the coexistence
        // region where branches appear and die.
        use rayon::prelude::*;
        for beta in [2.0, 4.0] {
            let bounds: Vec<f64> = (0..50)
                .into_par_iter()
                .map(|i| {
                    let v = 10f64.powf(-2.0 + 4.0 * i as f64 / 49.0);
                    bound_at_variance(beta, v).unwrap().bound_bits()
                })
                .collect();
            for (i, pair) in bounds.windows(2).enumerate() {
                assert!(
                    pair[1] <= pair[0] + 1e-9,
                    "beta {beta}: bound rose between grid points {i} and {}",
                    i + 1
                );
            }
        }
    }

    #[test]
    fn solver_rejects_bad_inputs() {
        assert!(find_fixed_points(2.0, 1.0, 32).is_err());
        assert!(find_fixed_points(0.0, 1.0, 256).is_err());
        assert!(find_fixed_points(2.0, -1.0, 256).is_err());
    }
}
