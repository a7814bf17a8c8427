//! `mmrelay` command-line driver: analytic curves, Monte-Carlo curves,
//! analytic-versus-simulation comparison and LOS model validation, all
//! written as CSV with a run manifest.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod grid;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mmrelay::analytic::{coverage_at, coverage_sweep, CoverageKind};
use mmrelay::geometry::{read_footprints, LosModel, ObstacleLaw, UniformRange};
use mmrelay::scenario::{LayoutKind, RelayBand, Scenario, ScenarioConfig};
use mmrelay::simulator::{
    empirical_los_curve, estimate_coverage, Blockage, FieldSource, Layout, SimCurve, SimOptions, Z99,
};
use mmrelay::spectral::{spectral_sweep, SpectralOptions};
use mmrelay::units::{db_to_linear, intensity_to_isd, isd_to_intensity};

use grid::Grid;
use output::{compare, AnalyticRow, CliError, Manifest, Output, SimRow};

#[derive(Parser, Debug)]
#[command(name = "mmrelay", version, about = "Coverage and spectral efficiency of D2D-relay-assisted mmWave networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate an analytic curve.
    Analytic(AnalyticArgs),
    /// Estimate a coverage curve by Monte-Carlo simulation.
    Sim(SimArgs),
    /// Join an analytic and a simulated CSV and report gaps and bound violations.
    Compare(CompareArgs),
    /// Empirical LOS probability versus distance against the exponential model.
    ValidateLos(LosArgs),
    /// Print the resolved configuration and its digest.
    ShowConfig(ScenarioArgs),
}

#[derive(Args, Debug, Clone)]
struct ScenarioArgs {
    /// Built-in scenario (`uma` or `ind`).
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// Scenario TOML file.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Sweep values: `start:stop:step`, a comma list or one number.
    #[arg(long, default_value = "-10:40:1")]
    grid: Grid,
    /// Quantity swept by the grid.
    #[arg(long, value_enum, default_value_t = Sweep::Tau)]
    sweep: Sweep,
    /// Threshold used when the grid sweeps something else.
    #[arg(long, default_value_t = 10.0)]
    tau_db: f64,
    /// D2D band for relay curves; defaults to the scenario's.
    #[arg(long, value_enum)]
    band: Option<BandArg>,
    /// Output CSV; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AnalyticArgs {
    #[arg(long, value_enum)]
    curve: AnalyticCurve,
    #[command(flatten)]
    sweep: SweepArgs,
}

#[derive(Args, Debug)]
struct SimArgs {
    #[arg(long, value_enum)]
    curve: SimCurveArg,
    #[command(flatten)]
    sweep: SweepArgs,
    #[arg(long, default_value_t = 10_000)]
    drops: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Overrides the scenario layout.
    #[arg(long, value_enum)]
    layout: Option<LayoutArg>,
    #[arg(long, value_enum, default_value_t = BlockageArg::Bernoulli)]
    blockage: BlockageArg,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[arg(long)]
    analytic: PathBuf,
    #[arg(long)]
    sim: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct LosArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Link distances in meters.
    #[arg(long, default_value = "25:500:25")]
    grid: Grid,
    /// Node pairs per distance.
    #[arg(long, default_value_t = 100_000)]
    pairs: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = ShapeArg::Cylinder)]
    shape: ShapeArg,
    /// Polygon footprint file used instead of a random obstacle law.
    #[arg(long)]
    footprints: Option<PathBuf>,
    /// Transmitter height; the UE height when absent.
    #[arg(long)]
    h_tx: Option<f64>,
    #[arg(long)]
    h_rx: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Sweep {
    /// SINR threshold in dB.
    Tau,
    /// Inter-site distance in meters.
    Isd,
    /// Obstacle coverage ratio.
    Xi,
    /// BS intensity per m².
    BsIntensity,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum AnalyticCurve {
    Cell,
    D2dMm,
    D2dUw,
    NoiseLimited,
    Overall,
    Se,
    UplinkResource,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum SimCurveArg {
    Cell,
    D2dMm,
    D2dUw,
    Overall,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum BandArg {
    Mmwave,
    Microwave,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum LayoutArg {
    Ppp,
    Hex,
    IndGrid,
    Footprints,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum BlockageArg {
    Bernoulli,
    Geometric,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum ShapeArg {
    Cylinder,
    /// Squares with the cylinders' mean footprint area.
    Square,
}

fn load(args: &ScenarioArgs) -> Result<(ScenarioConfig, Vec<String>), CliError> {
    match (&args.preset, &args.config) {
        (_, Some(path)) => {
            let loaded = ScenarioConfig::load(path)?;
            Ok((loaded.config, loaded.warnings))
        }
        (Some(name), None) => Ok((ScenarioConfig::preset(name)?, Vec::new())),
        (None, None) => Ok((ScenarioConfig::uma(), Vec::new())),
    }
}

fn band_of(arg: Option<BandArg>, config: &ScenarioConfig) -> RelayBand {
    match arg {
        Some(BandArg::Mmwave) => RelayBand::Mmwave,
        Some(BandArg::Microwave) => RelayBand::Microwave,
        None => config.analysis.relay_band,
    }
}

/// Scenario for one non-threshold sweep value.
fn swept_config(base: &ScenarioConfig, sweep: Sweep, x: f64) -> ScenarioConfig {
    match sweep {
        Sweep::Tau => base.clone(),
        Sweep::Isd => base.with_bs_intensity(isd_to_intensity(x)),
        Sweep::Xi => base.with_coverage_ratio(x),
        Sweep::BsIntensity => base.with_bs_intensity(x),
    }
}

fn check_sweep(args: &SweepArgs) -> Result<(), CliError> {
    let bad = match args.sweep {
        Sweep::Tau => None,
        Sweep::Isd | Sweep::BsIntensity => args.grid.values.iter().find(|v| !(**v > 0.0)),
        Sweep::Xi => args.grid.values.iter().find(|v| !(0.0..1.0).contains(*v)),
    };
    match bad {
        Some(v) => Err(CliError::Usage(format!("grid value {v} is out of range for this sweep"))),
        None => Ok(()),
    }
}

fn run_analytic(args: &AnalyticArgs, manifest: &mut Manifest) -> Result<Vec<AnalyticRow>, CliError> {
    let sw = &args.sweep;
    check_sweep(sw)?;
    let (config, warnings) = load(&sw.scenario)?;
    manifest.warnings = warnings;
    let band = band_of(sw.band, &config);
    let base = Scenario::from_config(config.clone())?;
    manifest.config_digest = base.digest.clone();
    let kind = match args.curve {
        AnalyticCurve::Cell => Some(CoverageKind::Cellular),
        AnalyticCurve::D2dMm => Some(CoverageKind::MmwaveD2d),
        AnalyticCurve::D2dUw => Some(CoverageKind::MicrowaveD2d),
        AnalyticCurve::NoiseLimited => Some(CoverageKind::NoiseLimited),
        AnalyticCurve::Overall => Some(CoverageKind::Overall(band.into())),
        AnalyticCurve::Se | AnalyticCurve::UplinkResource => None,
    };
    let method = format!("analytic-{}", args.curve.to_possible_value().expect("named").get_name());
    let xs = &sw.grid.values;

    let Some(kind) = kind else {
        if sw.sweep != Sweep::Tau {
            return Err(CliError::Usage("spectral curves sweep the threshold only".into()));
        }
        return spectral_rows(&base, band, args.curve, xs);
    };

    let values = if sw.sweep == Sweep::Tau {
        let taus: Vec<f64> = xs.iter().map(|&x| db_to_linear(x)).collect();
        coverage_sweep(&base.inputs, kind, &taus)?
    } else {
        xs.iter()
            .map(|&x| {
                let s = Scenario::from_config(swept_config(&config, sw.sweep, x))?;
                Ok(coverage_at(&s.inputs, kind, db_to_linear(sw.tau_db))?)
            })
            .collect::<Result<Vec<_>, CliError>>()?
    };
    Ok(xs
        .iter()
        .zip(values)
        .map(|(&x, value)| AnalyticRow {
            x,
            value,
            method: method.clone(),
            config_digest: base.digest.clone(),
        })
        .collect())
}

fn spectral_rows(s: &Scenario, band: RelayBand, curve: AnalyticCurve, xs: &[f64]) -> Result<Vec<AnalyticRow>, CliError> {
    let taus: Vec<f64> = xs.iter().map(|&x| db_to_linear(x)).collect();
    let opts = SpectralOptions {
        tau_max: s.tau_max,
        ..SpectralOptions::default()
    };
    let w_dl = s.config.bands.mmwave_bandwidth_hz;
    let (w_ul, d2d_kind) = match band {
        RelayBand::Mmwave => (s.config.bands.mmwave_bandwidth_hz, CoverageKind::MmwaveD2d),
        RelayBand::Microwave => (s.config.bands.microwave_bandwidth_hz, CoverageKind::MicrowaveD2d),
    };
    let result = spectral_sweep(
        |t| coverage_at(&s.inputs, CoverageKind::Cellular, t),
        |t| coverage_at(&s.inputs, d2d_kind, t),
        &taus,
        w_dl,
        w_ul,
        &opts,
    )?;
    let row = |x: f64, value: f64, method: &str| AnalyticRow {
        x,
        value,
        method: method.to_string(),
        config_digest: s.digest.clone(),
    };
    let mut rows = Vec::new();
    for (&x, p) in xs.iter().zip(&result.points) {
        match curve {
            AnalyticCurve::Se => {
                rows.push(row(x, result.gamma, "analytic-se-cellular"));
                rows.push(row(x, p.gamma_relay, "analytic-se-relay"));
                rows.push(row(x, p.uplink_fraction, "analytic-uplink-fraction"));
            }
            _ => rows.push(row(x, p.uplink_fraction * w_ul, "analytic-uplink-resource-hz")),
        }
    }
    Ok(rows)
}

fn sim_layout(arg: Option<LayoutArg>, s: &Scenario) -> Result<Layout, CliError> {
    let mut config = s.config.clone();
    match arg {
        None => {}
        Some(LayoutArg::Ppp) => config.layout.kind = LayoutKind::Ppp,
        Some(LayoutArg::Hex) => config.layout.kind = LayoutKind::Hex,
        Some(LayoutArg::IndGrid) => config.layout.kind = LayoutKind::IndGrid,
        Some(LayoutArg::Footprints) => config.layout.kind = LayoutKind::Footprints,
    }
    if config.layout.kind == LayoutKind::Hex && config.layout.isd_m.is_none() {
        config.layout.isd_m = Some(intensity_to_isd(s.bs_intensity));
    }
    Ok(Layout::from_scenario(&Scenario::from_config(config)?)?)
}

fn run_sim(args: &SimArgs, manifest: &mut Manifest) -> Result<Vec<SimRow>, CliError> {
    let sw = &args.sweep;
    check_sweep(sw)?;
    if args.drops == 0 {
        return Err(CliError::Usage("--drops must be at least 1".into()));
    }
    let (config, warnings) = load(&sw.scenario)?;
    manifest.warnings = warnings;
    manifest.seed = Some(args.seed);
    let band = band_of(sw.band, &config);
    let base = Scenario::from_config(config.clone())?;
    manifest.config_digest = base.digest.clone();
    let curve = match args.curve {
        SimCurveArg::Cell => SimCurve::Cellular,
        SimCurveArg::D2dMm => SimCurve::D2d(RelayBand::Mmwave),
        SimCurveArg::D2dUw => SimCurve::D2d(RelayBand::Microwave),
        SimCurveArg::Overall => SimCurve::Overall(band),
    };
    let opts = SimOptions::new(args.drops, args.seed).with_blockage(match args.blockage {
        BlockageArg::Bernoulli => Blockage::Bernoulli,
        BlockageArg::Geometric => Blockage::Geometric,
    });
    let method = format!("sim-{}", args.curve.to_possible_value().expect("named").get_name());
    let xs = &sw.grid.values;
    let mut rows = Vec::with_capacity(xs.len());
    let mut push = |x: f64, estimate: f64, half: f64| {
        rows.push(SimRow {
            x,
            value: estimate,
            method: method.clone(),
            config_digest: base.digest.clone(),
            ci_halfwidth: half,
            n_drops: args.drops,
            seed: args.seed,
        })
    };
    if sw.sweep == Sweep::Tau {
        let layout = sim_layout(args.layout, &base)?;
        let taus: Vec<f64> = xs.iter().map(|&x| db_to_linear(x)).collect();
        let c = estimate_coverage(&base, &layout, curve, &taus, &opts)?;
        for (k, &x) in xs.iter().enumerate() {
            push(x, c.estimate[k], c.ci_halfwidth[k]);
        }
    } else {
        for &x in xs {
            let s = Scenario::from_config(swept_config(&config, sw.sweep, x))?;
            let layout = sim_layout(args.layout, &s)?;
            let c = estimate_coverage(&s, &layout, curve, &[db_to_linear(sw.tau_db)], &opts)?;
            push(x, c.estimate[0], c.ci_halfwidth[0]);
        }
    }
    Ok(rows)
}

fn run_los(args: &LosArgs, manifest: &mut Manifest) -> Result<Vec<SimRow>, CliError> {
    if args.pairs == 0 {
        return Err(CliError::Usage("--pairs must be at least 1".into()));
    }
    if args.grid.values.iter().any(|d| !(*d >= 0.0)) {
        return Err(CliError::Usage("distances must be >= 0".into()));
    }
    let (config, warnings) = load(&args.scenario)?;
    manifest.warnings = warnings;
    manifest.seed = Some(args.seed);
    let s = Scenario::from_config(config)?;
    manifest.config_digest = s.digest.clone();
    let h_ue = s.config.heights.ue_antenna_height_m;
    let (h_tx, h_rx) = (args.h_tx.unwrap_or(h_ue), args.h_rx.unwrap_or(h_ue));
    let law = s.obstacles;
    let (source, label) = match (&args.footprints, args.shape) {
        (Some(path), _) => (FieldSource::Field(Arc::new(read_footprints(path)?)), "footprints"),
        (None, ShapeArg::Cylinder) => (FieldSource::Law(law), "cylinder"),
        (None, ShapeArg::Square) => {
            let side = law.mean_area().sqrt();
            let squares = ObstacleLaw::rectangles(
                law.intensity,
                UniformRange::new(side, side),
                UniformRange::new(side, side),
                law.height,
            )?;
            (FieldSource::Law(squares), "square")
        }
    };
    let distances = &args.grid.values;
    let curve = empirical_los_curve(&source, distances, h_tx, h_rx, args.pairs, args.seed)?;
    let model = LosModel::from_obstacles(&law, h_tx, h_rx)?;
    let mut rows = Vec::new();
    for (k, &d) in distances.iter().enumerate() {
        rows.push(SimRow {
            x: d,
            value: curve.estimate[k],
            method: format!("empirical-{label}"),
            config_digest: s.digest.clone(),
            ci_halfwidth: Z99 * curve.standard_error[k],
            n_drops: args.pairs,
            seed: args.seed,
        });
        rows.push(SimRow {
            x: d,
            value: mmrelay::geometry::los_probability(d, &model),
            method: "model".into(),
            config_digest: s.digest.clone(),
            ci_halfwidth: 0.0,
            n_drops: 0,
            seed: args.seed,
        });
    }
    Ok(rows)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let argv: Vec<String> = std::env::args().collect();
    let mut manifest = Manifest::new(argv.join(" "));
    match &cli.command {
        Command::Analytic(a) => {
            manifest.grid = a.sweep.grid.spec.clone();
            let rows = run_analytic(a, &mut manifest)?;
            Output::new(a.sweep.out.clone()).write(&rows, &mut manifest)
        }
        Command::Sim(a) => {
            manifest.grid = a.sweep.grid.spec.clone();
            let rows = run_sim(a, &mut manifest)?;
            Output::new(a.sweep.out.clone()).write(&rows, &mut manifest)
        }
        Command::ValidateLos(a) => {
            manifest.grid = a.grid.spec.clone();
            let rows = run_los(a, &mut manifest)?;
            Output::new(a.out.clone()).write(&rows, &mut manifest)
        }
        Command::Compare(a) => {
            let (rows, summary) = compare(&a.analytic, &a.sim)?;
            eprintln!("{summary}");
            manifest.config_digest = rows.first().map(|r| r.config_digest.clone()).unwrap_or_default();
            Output::new(a.out.clone()).write(&rows, &mut manifest)
        }
        Command::ShowConfig(a) => {
            let (config, warnings) = load(a)?;
            for w in &warnings {
                eprintln!("warning: {w}");
            }
            let s = Scenario::from_config(config)?;
            print!("# digest: {}\n{}", s.digest, s.config.dump());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
