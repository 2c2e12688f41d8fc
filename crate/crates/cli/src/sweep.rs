//! Axis sweeps with CSV output, and the preset bundles behind the five
//! figures.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use nearfar_core::bounds::{ebn0_db_to_sigma, pcf_db_to_rho, OptimizerConfig, SystemParams};

use crate::{Failure, NearFarArg, NoiseArg, Outcome};

pub const CSV_HEADER: &str = "axis,lower_raw,lower,upper_conj,upper_tanaka,exact,theta2,omega2";

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    /// E_b/N_0 in dB.
    #[value(name = "ebn0-db")]
    Ebn0Db,
    /// Power control factor in dB.
    #[value(name = "pcf-db")]
    PcfDb,
    /// Load ratio n/m.
    Beta,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputKind {
    Lower,
    #[value(name = "upper-conj")]
    UpperConj,
    #[value(name = "upper-tanaka")]
    UpperTanaka,
    Exact,
}

#[derive(Args)]
pub struct SweepArgs {
    /// Swept axis; its value flag must not also be given as fixed.
    #[arg(long, value_enum)]
    axis: Axis,
    #[arg(long, allow_negative_numbers = true)]
    start: f64,
    #[arg(long, allow_negative_numbers = true)]
    stop: f64,
    #[arg(long)]
    points: usize,
    /// Fixed load ratio (required unless the axis is beta).
    #[arg(long)]
    beta: Option<f64>,
    #[command(flatten)]
    noise: NoiseArg,
    #[command(flatten)]
    nearfar: NearFarArg,
    /// Subset of curves to evaluate.
    #[arg(long, value_enum, value_delimiter = ',',
          default_values_t = vec![OutputKind::Lower, OutputKind::UpperConj, OutputKind::UpperTanaka, OutputKind::Exact])]
    outputs: Vec<OutputKind>,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

/// One CSV row; empty cells are None.
struct Row {
    axis: f64,
    lower_raw: Option<f64>,
    lower: Option<f64>,
    upper_conj: Option<f64>,
    upper_tanaka: Option<f64>,
    exact: Option<f64>,
    theta2: Option<f64>,
    omega2: Option<f64>,
}

impl Row {
    fn empty(axis: f64) -> Self {
        Self {
            axis,
            lower_raw: None,
            lower: None,
            upper_conj: None,
            upper_tanaka: None,
            exact: None,
            theta2: None,
            omega2: None,
        }
    }

    fn to_csv(&self) -> String {
        let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{}\n",
            self.axis,
            cell(self.lower_raw),
            cell(self.lower),
            cell(self.upper_conj),
            cell(self.upper_tanaka),
            cell(self.exact),
            cell(self.theta2),
            cell(self.omega2),
        )
    }
}

struct ResolvedSweep {
    values: Vec<f64>,
    beta: Option<f64>,
    sigma: Option<f64>,
    rho: Option<f64>,
    outputs: Vec<OutputKind>,
}

fn resolve_spec(args: &SweepArgs) -> Result<ResolvedSweep, Failure> {
    if args.start.partial_cmp(&args.stop) != Some(std::cmp::Ordering::Less) {
        return Err(Failure::Usage(format!(
            "--start must be below --stop, got {} .. {}",
            args.start, args.stop
        )));
    }
    if args.points < 2 {
        return Err(Failure::Usage("--points must be at least 2".into()));
    }
    match args.axis {
        Axis::Ebn0Db if args.noise.is_given() => {
            return Err(Failure::Usage(
                "the noise level is the swept axis; drop --sigma/--ebn0-db".into(),
            ));
        }
        Axis::PcfDb if args.nearfar.is_given() => {
            return Err(Failure::Usage(
                "the near-far level is the swept axis; drop --rho/--pcf-db".into(),
            ));
        }
        Axis::Beta if args.beta.is_some() => {
            return Err(Failure::Usage("the load is the swept axis; drop --beta".into()));
        }
        _ => {}
    }
    let beta = match args.axis {
        Axis::Beta => None,
        _ => Some(args.beta.ok_or_else(|| Failure::Usage("--beta is required".into()))?),
    };
    let sigma = match args.axis {
        Axis::Ebn0Db => None,
        _ => Some(args.noise.resolve().map_err(Failure::Usage)?),
    };
    let rho = match args.axis {
        Axis::PcfDb => None,
        _ => Some(args.nearfar.resolve().map_err(Failure::Usage)?),
    };
    let mut outputs = args.outputs.clone();
    outputs.dedup_by(|a, b| a == b);
    let values = (0..args.points)
        .map(|i| args.start + (args.stop - args.start) * i as f64 / (args.points - 1) as f64)
        .collect();
    Ok(ResolvedSweep { values, beta, sigma, rho, outputs })
}

fn point_params(spec: &ResolvedSweep, value: f64) -> Result<SystemParams, nearfar_core::Error> {
    let beta = spec.beta.unwrap_or(value);
    let sigma = spec.sigma.unwrap_or_else(|| ebn0_db_to_sigma(value));
    let rho = spec.rho.unwrap_or_else(|| pcf_db_to_rho(value));
    SystemParams::new(beta, sigma, rho)
}

fn compute_row(spec: &ResolvedSweep, value: f64, opt: &OptimizerConfig) -> Result<Row, String> {
    let params = point_params(spec, value).map_err(|e| e.to_string())?;
    let mut row = Row::empty(value);
    row.theta2 = Some(nearfar_core::bounds::theta_squared(&params));
    row.omega2 = Some(nearfar_core::bounds::omega_squared(&params));

    let underloaded = params.beta() <= 1.0;
    let exact = if underloaded {
        Some(nearfar_core::bounds::underloaded_capacity(&params).map_err(|e| e.to_string())?)
    } else {
        None
    };
    for kind in &spec.outputs {
        match kind {
            OutputKind::Lower => {
                let raw = match exact {
                    Some(c) => c,
                    None => nearfar_core::bounds::lower_bound(&params, opt)
                        .map_err(|e| e.to_string())?,
                };
                row.lower_raw = Some(raw);
                row.lower = Some(raw.clamp(0.0, 1.0));
            }
            OutputKind::UpperConj => {
                let v = match exact {
                    Some(c) => c,
                    None => nearfar_core::bounds::conjectured_upper_bound(&params)
                        .map_err(|e| e.to_string())?,
                };
                row.upper_conj = Some(v.clamp(0.0, 1.0));
            }
            OutputKind::UpperTanaka => {
                let v = match exact {
                    Some(c) => c,
                    None => nearfar_core::tanaka::tanaka_bound_nearfar(&params)
                        .map_err(|e| e.to_string())?
                        .bound_bits(),
                };
                row.upper_tanaka = Some(v.clamp(0.0, 1.0));
            }
            OutputKind::Exact => {
                row.exact = exact.map(|c| c.clamp(0.0, 1.0));
            }
        }
    }
    Ok(row)
}

/// Run the sweep and write the CSV. Rows are ordered by axis value; points
/// are evaluated in parallel but the output is independent of scheduling.
fn run_sweep(spec: &ResolvedSweep, out: &Path) -> Result<Outcome, Failure> {
    let opt = OptimizerConfig::default();
    let results: Vec<Result<Row, String>> = spec
        .values
        .par_iter()
        .map(|&v| compute_row(spec, v, &opt))
        .collect();

    let mut text = String::from(CSV_HEADER);
    text.push('\n');
    let mut partial = false;
    for (value, result) in spec.values.iter().zip(results) {
        match result {
            Ok(row) => text.push_str(&row.to_csv()),
            Err(msg) => {
                eprintln!("warning: point {value} failed: {msg}");
                partial = true;
                text.push_str(&Row::empty(*value).to_csv());
            }
        }
    }
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(out, text)?;
    Ok(if partial { Outcome::Partial } else { Outcome::Full })
}

pub fn cmd_sweep(args: SweepArgs) -> Result<Outcome, Failure> {
    let spec = resolve_spec(&args)?;
    run_sweep(&spec, &args.out)
}

#[derive(Args)]
pub struct FiguresArgs {
    /// Figure number.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=5))]
    fig: u8,
    /// Output directory for the CSV bundle and its manifest.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Serialize)]
struct ManifestCurve {
    file: String,
    axis: &'static str,
    start: f64,
    stop: f64,
    points: usize,
    beta: f64,
    pcf_db: Option<f64>,
    ebn0_db: Option<f64>,
    outputs: Vec<String>,
}

#[derive(Serialize)]
struct Manifest {
    fig: u8,
    curves: Vec<ManifestCurve>,
}

const FIG_POINTS: usize = 41;
const FIG_PCF_SET: [f64; 4] = [15.0, 20.0, 25.0, 35.0];

fn output_name(kind: OutputKind) -> &'static str {
    match kind {
        OutputKind::Lower => "lower",
        OutputKind::UpperConj => "upper_conj",
        OutputKind::UpperTanaka => "upper_tanaka",
        OutputKind::Exact => "exact",
    }
}

struct Curve {
    file: String,
    axis: Axis,
    start: f64,
    stop: f64,
    beta: f64,
    pcf_db: Option<f64>,
    ebn0_db: Option<f64>,
    outputs: Vec<OutputKind>,
}

fn figure_curves(fig: u8) -> Vec<Curve> {
    let ebn0_curve = |file: String, beta: f64, pcf: f64, outputs: Vec<OutputKind>| Curve {
        file,
        axis: Axis::Ebn0Db,
        start: 0.0,
        stop: 20.0,
        beta,
        pcf_db: Some(pcf),
        ebn0_db: None,
        outputs,
    };
    match fig {
        1 => FIG_PCF_SET
            .iter()
            .map(|&pcf| {
                ebn0_curve(format!("fig1_lower_pcf{pcf:.0}.csv"), 2.0, pcf, vec![OutputKind::Lower])
            })
            .collect(),
        2 => FIG_PCF_SET
            .iter()
            .map(|&pcf| {
                ebn0_curve(
                    format!("fig2_upper_conj_pcf{pcf:.0}.csv"),
                    4.0,
                    pcf,
                    vec![OutputKind::UpperConj],
                )
            })
            .collect(),
        3 | 4 => {
            let beta = if fig == 3 { 2.0 } else { 4.0 };
            [OutputKind::Lower, OutputKind::UpperConj, OutputKind::UpperTanaka]
                .into_iter()
                .map(|kind| {
                    ebn0_curve(
                        format!("fig{fig}_{}_pcf20.csv", output_name(kind)),
                        beta,
                        20.0,
                        vec![kind],
                    )
                })
                .collect()
        }
        5 => [OutputKind::Lower, OutputKind::UpperConj, OutputKind::UpperTanaka]
            .into_iter()
            .map(|kind| Curve {
                file: format!("fig5_{}_ebn020.csv", output_name(kind)),
                axis: Axis::PcfDb,
                start: 5.0,
                stop: 45.0,
                beta: 2.0,
                pcf_db: None,
                ebn0_db: Some(20.0),
                outputs: vec![kind],
            })
            .collect(),
        _ => unreachable!("clap range-checks --fig"),
    }
}

pub fn cmd_figures(args: FiguresArgs) -> Result<Outcome, Failure> {
    fs::create_dir_all(&args.out)?;
    let curves = figure_curves(args.fig);
    let mut manifest = Manifest { fig: args.fig, curves: Vec::new() };
    let mut partial = false;
    for curve in &curves {
        let values: Vec<f64> = (0..FIG_POINTS)
            .map(|i| curve.start + (curve.stop - curve.start) * i as f64 / (FIG_POINTS - 1) as f64)
            .collect();
        let spec = ResolvedSweep {
            values,
            beta: Some(curve.beta),
            sigma: curve.ebn0_db.map(ebn0_db_to_sigma),
            rho: curve.pcf_db.map(pcf_db_to_rho),
            outputs: curve.outputs.clone(),
        };
        if matches!(run_sweep(&spec, &args.out.join(&curve.file))?, Outcome::Partial) {
            partial = true;
        }
        manifest.curves.push(ManifestCurve {
            file: curve.file.clone(),
            axis: match curve.axis {
                Axis::Ebn0Db => "ebn0_db",
                Axis::PcfDb => "pcf_db",
                Axis::Beta => "beta",
            },
            start: curve.start,
            stop: curve.stop,
            points: FIG_POINTS,
            beta: curve.beta,
            pcf_db: curve.pcf_db,
            ebn0_db: curve.ebn0_db,
            outputs: curve.outputs.iter().map(|&k| output_name(k).to_string()).collect(),
        });
    }
    let mut manifest_text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    manifest_text.push('\n');
    fs::write(args.out.join("manifest.json"), manifest_text)?;
    Ok(if partial { Outcome::Partial } else { Outcome::Full })
}
