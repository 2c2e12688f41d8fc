//! JSON and CSV report assembly. Every report is a single object with keys
//! in declaration order; floats serialize at full round-trip precision.

use serde::Serialize;

use nearfar_core::bounds::{BoundSet, SystemParams};
use nearfar_core::mi::{sum_capacity_estimate, MiEstimate};
use nearfar_core::spectral::{
    gram_eigenvalues, ks_distance, mp_edges, GramSpectrumCdf, SignatureMatrix,
};
use nearfar_core::tanaka::TanakaSolution;

use crate::Failure;

/// Finite-size slack of the sandwich verdict, bits/user.
pub const SANDWICH_SLACK: f64 = 0.15;

fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    text
}

#[derive(Serialize)]
struct ParamsReport {
    beta: f64,
    sigma: f64,
    rho: f64,
    /// Null when rho = 0 (infinite power control factor).
    pcf_db: Option<f64>,
    ebn0_db: f64,
}

impl ParamsReport {
    fn new(p: &SystemParams) -> Self {
        Self {
            beta: p.beta(),
            sigma: p.sigma(),
            rho: p.rho(),
            pcf_db: p.pcf_db().is_finite().then(|| p.pcf_db()),
            ebn0_db: p.ebn0_db(),
        }
    }
}

#[derive(Serialize)]
struct BoundValues {
    lower: f64,
    upper_conjectured: f64,
    upper_tanaka: f64,
    exact: Option<f64>,
}

#[derive(Serialize)]
struct BoundsReport {
    params: ParamsReport,
    theta2: f64,
    omega2: f64,
    raw: BoundValues,
    clamped: BoundValues,
}

pub fn bounds_json(p: &SystemParams, set: &BoundSet) -> String {
    to_json(&BoundsReport {
        params: ParamsReport::new(p),
        theta2: set.theta2,
        omega2: set.omega2,
        raw: BoundValues {
            lower: set.lower,
            upper_conjectured: set.upper_conjectured,
            upper_tanaka: set.upper_tanaka,
            exact: set.exact,
        },
        clamped: BoundValues {
            lower: set.lower_clamped(),
            upper_conjectured: set.upper_conjectured_clamped(),
            upper_tanaka: set.upper_tanaka_clamped(),
            exact: set.exact_clamped(),
        },
    })
}

fn csv_cell(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

pub fn bounds_csv(p: &SystemParams, set: &BoundSet) -> String {
    let mut out = String::from("beta,sigma,rho,lower_raw,lower,upper_conj,upper_tanaka,exact,theta2,omega2\n");
    out.push_str(&format!(
        "{},{},{},{},{},{},{},{},{},{}\n",
        p.beta(),
        p.sigma(),
        p.rho(),
        set.lower,
        set.lower_clamped(),
        set.upper_conjectured_clamped(),
        set.upper_tanaka_clamped(),
        csv_cell(set.exact_clamped()),
        set.theta2,
        set.omega2,
    ));
    out
}

#[derive(Serialize)]
struct TanakaReport<'a> {
    beta: f64,
    sigma: f64,
    /// Null when the command ran without a near-far level.
    rho: Option<f64>,
    /// Variance the fixed point was solved at (ω² when rho is given).
    noise_variance: f64,
    grid: usize,
    count: usize,
    odd_count: bool,
    selected: usize,
    bound_bits: f64,
    solutions: &'a [TanakaSolution],
}

pub fn tanaka_json(
    beta: f64,
    sigma: f64,
    rho: Option<f64>,
    noise_variance: f64,
    grid: usize,
    solutions: &[TanakaSolution],
) -> String {
    let selected = solutions
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| a.capacity_bits.total_cmp(&b.capacity_bits))
        .map(|(i, _)| i)
        .unwrap_or(0);
    to_json(&TanakaReport {
        beta,
        sigma,
        rho,
        noise_variance,
        grid,
        count: solutions.len(),
        odd_count: solutions.len() % 2 == 1,
        selected,
        bound_bits: solutions[selected].capacity_bits,
        solutions,
    })
}

#[derive(Serialize)]
struct SpectrumTrial {
    seed: u64,
    min_eig: f64,
    max_eig: f64,
    ks_distance: f64,
    trace: f64,
}

#[derive(Serialize)]
struct SpectrumReportJson {
    m: usize,
    n: usize,
    beta: f64,
    trials: usize,
    base_seed: u64,
    mp_lower_edge: f64,
    mp_upper_edge: f64,
    pooled_ks: f64,
    mean_min_eig: f64,
    mean_max_eig: f64,
    per_trial: Vec<SpectrumTrial>,
}

pub fn spectrum_json(m: usize, n: usize, base_seed: u64, trials: usize) -> Result<String, Failure> {
    let beta = n as f64 / m as f64;
    let (lo, hi) = mp_edges(beta)?;
    let cdf = GramSpectrumCdf::new(beta)?;
    let mut pooled: Vec<f64> = Vec::with_capacity(m * trials);
    let mut per_trial = Vec::with_capacity(trials);
    let mut sum_min = 0.0;
    let mut sum_max = 0.0;
    for t in 0..trials {
        let seed = base_seed + t as u64;
        let a = SignatureMatrix::sample(m, n, seed)?;
        let eig = gram_eigenvalues(&a)?;
        let ks = ks_distance(&eig, |x| cdf.eval(x));
        let (min_eig, max_eig) = (eig[0], *eig.last().expect("m >= 2"));
        sum_min += min_eig;
        sum_max += max_eig;
        per_trial.push(SpectrumTrial {
            seed,
            min_eig,
            max_eig,
            ks_distance: ks,
            trace: eig.iter().sum(),
        });
        pooled.extend_from_slice(&eig);
    }
    pooled.sort_by(f64::total_cmp);
    Ok(to_json(&SpectrumReportJson {
        m,
        n,
        beta,
        trials,
        base_seed,
        mp_lower_edge: lo,
        mp_upper_edge: hi,
        pooled_ks: ks_distance(&pooled, |x| cdf.eval(x)),
        mean_min_eig: sum_min / trials as f64,
        mean_max_eig: sum_max / trials as f64,
        per_trial,
    }))
}

#[derive(Serialize)]
struct OracleReport {
    m: usize,
    n: usize,
    orthogonal: bool,
    params: ParamsReport,
    estimate: MiEstimate,
    bounds: BoundValues,
    theta2: f64,
    omega2: f64,
    slack: f64,
    /// "inside": within [lower − 3se, upper + 3se];
    /// "inside-with-slack": within [−3se, upper + 3se + slack];
    /// "outside": neither.
    verdict: &'static str,
}

pub fn oracle_json(
    matrix: &SignatureMatrix,
    sigma: f64,
    rho: f64,
    samples: usize,
    seed: u64,
    orthogonal: bool,
) -> Result<String, Failure> {
    let params = SystemParams::new(matrix.beta(), sigma, rho)?;
    let set = nearfar_core::bounds::capacity_bounds(
        &params,
        &nearfar_core::bounds::OptimizerConfig::default(),
    )?;
    let estimate = sum_capacity_estimate(matrix, sigma, rho, samples, seed)?;
    let verdict = sandwich_verdict(&estimate, &set);
    Ok(to_json(&OracleReport {
        m: matrix.rows(),
        n: matrix.cols(),
        orthogonal,
        params: ParamsReport::new(&params),
        bounds: BoundValues {
            lower: set.lower,
            upper_conjectured: set.upper_conjectured,
            upper_tanaka: set.upper_tanaka,
            exact: set.exact,
        },
        theta2: set.theta2,
        omega2: set.omega2,
        slack: SANDWICH_SLACK,
        verdict,
        estimate,
    }))
}

pub fn sandwich_verdict(estimate: &MiEstimate, set: &BoundSet) -> &'static str {
    let est = estimate.bits_per_user;
    let tol = 3.0 * estimate.std_error;
    let upper = set.upper_conjectured;
    if est >= set.lower - tol && est <= upper + tol {
        "inside"
    } else if est >= -tol && est <= upper + tol + SANDWICH_SLACK {
        "inside-with-slack"
    } else {
        "outside"
    }
}
