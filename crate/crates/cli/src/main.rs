mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use ledstat::figures::{write_figure, Figure};
use ledstat::g2::{g2_bruteforce, g2_closed, CumulantMode, CumulantSpec};
use ledstat::grid::{sample_model_spectrum, FrequencyGrid, SpectrumKind};
use ledstat::model::{validity_ratio, LedModel, ModelParams, VALIDITY_WARNING};
use ledstat::montecarlo::{run_ensemble, MonteCarloConfig};
use ledstat::photon::{default_integration, mean_photon_closed, mean_photon_quadrature, product_noise_spectrum, ConvolutionMode};
use ledstat::sweep::{run_sweep, write_csv, write_records, Methods, Scale, SweepSpec, SweepVariable};
use ledstat::validation::{run_validation, ValidationProfile};

use config::{FileConfig, ModelArgs};
use output::{Format, Table};

const DEFAULT_GRID_POINTS: usize = 2049;
const DEFAULT_RECORDS: usize = 500;
const DEFAULT_SEED: u64 = 0;
const CUMULANT_TOLERANCE: f64 = 1e-7;

#[derive(Parser)]
#[command(name = "ledstat", version, about = "Photon statistics of a few-emitter LED")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    #[command(flatten)]
    model: ModelArgs,
    /// Output file; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct RandomArgs {
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo records
    #[arg(long)]
    records: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PhotonChoice {
    Closed,
    Delta,
    Exact,
    All,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum G2Choice {
    Closed,
    CumulantDelta,
    CumulantFull,
    Mc,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate c, δ²N_e, n and S_bNe on a frequency grid
    Spectrum {
        #[command(flatten)]
        common: Common,
        /// Grid half-width in units of γ⊥; 20× the widest rate by default
        #[arg(long)]
        grid_omega_max: Option<f64>,
        /// Odd number of grid points
        #[arg(long)]
        grid_points: Option<usize>,
    },
    /// Mean photon number
    MeanPhoton {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        method: Option<PhotonChoice>,
    },
    /// Second-order correlation g₂(0)
    G2 {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        method: Option<G2Choice>,
        #[command(flatten)]
        random: RandomArgs,
    },
    /// One-dimensional parameter sweep
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long = "var")]
        variable: SweepVariable,
        #[arg(long)]
        start: f64,
        #[arg(long)]
        stop: f64,
        #[arg(long, default_value_t = 50)]
        steps: usize,
        #[arg(long, default_value = "linear")]
        scale: Scale,
        /// Extra columns: any of quadrature, cumulant, montecarlo
        #[arg(long, value_delimiter = ',')]
        methods: Vec<String>,
        #[command(flatten)]
        random: RandomArgs,
    },
    /// Monte Carlo estimate of n and g₂ beside the closed form
    Mc {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        random: RandomArgs,
    },
    /// Δₙ versus 2κ/γ⊥ curves
    ReproduceFig3(FigureArgs),
    /// g₂ versus 2κ/γ⊥ curves
    ReproduceFig4(FigureArgs),
    /// g₂ versus pump curves
    ReproduceFig5(FigureArgs),
    /// Run the acceptance checks; exits nonzero if any fails
    Validate {
        #[arg(long)]
        skip_montecarlo: bool,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        verbose: bool,
    },
}

#[derive(Args)]
struct FigureArgs {
    #[arg(long, required = true)]
    n_emitters: f64,
    /// Output directory
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn build_model(args: &ModelArgs, file: &FileConfig) -> Result<LedModel, String> {
    let params: ModelParams = args.resolve(file);
    let model = LedModel::new(params).map_err(|e| e.to_string())?;
    let v = validity_ratio(&params);
    if v > VALIDITY_WARNING {
        eprintln!("warning: γ∥/√(κγ⊥) = {v:.3} exceeds {VALIDITY_WARNING}; the closed forms lose accuracy");
    }
    Ok(model)
}

fn parse_method<T: ValueEnum>(flag: Option<T>, file: &FileConfig, default: T) -> Result<T, String> {
    match (flag, &file.method) {
        (Some(m), _) => Ok(m),
        (None, Some(s)) => T::from_str(s, true).map_err(|_| format!("unknown method '{s}' in config")),
        (None, None) => Ok(default),
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    let err = |e: ledstat::Error| e.to_string();
    match cli.command {
        Command::Spectrum { common, grid_omega_max, grid_points } => {
            let file = common.model.file()?;
            let model = build_model(&common.model, &file)?;
            let points = grid_points.or(file.grid_points).unwrap_or(DEFAULT_GRID_POINTS);
            let grid = match grid_omega_max.or(file.grid_omega_max) {
                Some(w) => FrequencyGrid::new(w, points),
                None => FrequencyGrid::for_model(&model, points),
            }
            .map_err(err)?;
            let c = sample_model_spectrum(&model, grid, SpectrumKind::Commutator);
            let pop = sample_model_spectrum(&model, grid, SpectrumKind::Population);
            let n = sample_model_spectrum(&model, grid, SpectrumKind::PhotonNumber);
            let prod = product_noise_spectrum(&model, grid).map_err(err)?;
            let mut table = Table::new(&["omega", "commutator", "population", "photon_number", "product_noise"]);
            for (i, w) in grid.omegas().enumerate() {
                table.push(vec![json!(w), json!(c.values[i]), json!(pop.values[i]), json!(n.values[i]), json!(prod.values[i])]);
            }
            table.emit(common.format, common.out.as_deref())?;
        }
        Command::MeanPhoton { common, method } => {
            let file = common.model.file()?;
            let model = build_model(&common.model, &file)?;
            let method = parse_method(method, &file, PhotonChoice::Closed)?;
            let spec = default_integration(&model);
            let mut results = Vec::new();
            if matches!(method, PhotonChoice::Closed | PhotonChoice::All) {
                results.push(("closed", mean_photon_closed(&model)));
            }
            if matches!(method, PhotonChoice::Delta | PhotonChoice::All) {
                results.push(("delta", mean_photon_quadrature(&model, ConvolutionMode::DeltaApprox, &spec).map_err(err)?));
            }
            if matches!(method, PhotonChoice::Exact | PhotonChoice::All) {
                results.push(("exact", mean_photon_quadrature(&model, ConvolutionMode::ExactConvolution, &spec).map_err(err)?));
            }
            let mut table = Table::new(&["method", "n0", "delta_n", "n", "error", "tail_truncated"]);
            for (name, r) in results {
                table.push(vec![json!(name), json!(r.n0), json!(r.delta_n), json!(r.n_total), json!(r.error), json!(r.tail_truncated)]);
            }
            table.emit(common.format, common.out.as_deref())?;
        }
        Command::G2 { common, method, random } => {
            let file = common.model.file()?;
            let model = build_model(&common.model, &file)?;
            let method = parse_method(method, &file, G2Choice::Closed)?;
            let all = method == G2Choice::All;
            let spec = CumulantSpec::for_model(&model, CUMULANT_TOLERANCE);
            let mut table = Table::new(&["method", "g2", "n", "error"]);
            if all || method == G2Choice::Closed {
                let r = g2_closed(&model);
                table.push(vec![json!("closed"), json!(r.g2), json!(r.n_total), json!(r.error)]);
            }
            for (choice, mode, name) in [
                (G2Choice::CumulantDelta, CumulantMode::Delta, "cumulant-delta"),
                (G2Choice::CumulantFull, CumulantMode::Full, "cumulant-full"),
            ] {
                if all || method == choice {
                    let r = g2_bruteforce(&model, mode, &spec).map_err(err)?;
                    table.push(vec![json!(name), json!(r.g2), json!(r.n_total), json!(r.error)]);
                }
            }
            if all || method == G2Choice::Mc {
                let est = run_ensemble(&model, &mc_config(&model, &random, &file)).map_err(err)?;
                table.push(vec![json!("mc"), json!(est.g2), json!(est.n), json!(est.g2_se)]);
            }
            table.emit(common.format, common.out.as_deref())?;
        }
        Command::Sweep { common, variable, start, stop, steps, scale, methods, random } => {
            let file = common.model.file()?;
            let base = common.model.resolve(&file);
            let mut spec = SweepSpec::new(base, variable, start, stop, steps, scale);
            spec.methods = parse_methods(&methods)?;
            spec.mc_records = random.records.or(file.records).unwrap_or(DEFAULT_RECORDS);
            spec.seed = random.seed.or(file.seed).unwrap_or(DEFAULT_SEED);
            let rows = run_sweep(&spec).map_err(err)?;
            let mut buf = Vec::new();
            match common.format {
                Format::Csv => write_csv(&mut buf, &rows, &spec.methods),
                Format::Records => write_records(&mut buf, &rows),
            }
            .map_err(err)?;
            output::write_bytes(&buf, common.out.as_deref())?;
        }
        Command::Mc { common, random } => {
            let file = common.model.file()?;
            let model = build_model(&common.model, &file)?;
            let config = mc_config(&model, &random, &file);
            let est = run_ensemble(&model, &config).map_err(err)?;
            let closed = g2_closed(&model);
            let mut table = Table::new(&["records", "samples", "n_mc", "n_se", "g2_mc", "g2_se", "n_closed", "g2_closed"]);
            table.push(vec![
                json!(est.records),
                json!(config.samples),
                json!(est.n),
                json!(est.n_se),
                json!(est.g2),
                json!(est.g2_se),
                json!(closed.n_total),
                json!(closed.g2),
            ]);
            table.emit(common.format, common.out.as_deref())?;
        }
        Command::ReproduceFig3(a) => figure(Figure::Fig3, &a)?,
        Command::ReproduceFig4(a) => figure(Figure::Fig4, &a)?,
        Command::ReproduceFig5(a) => figure(Figure::Fig5, &a)?,
        Command::Validate { skip_montecarlo, seed, verbose } => {
            let mut profile = ValidationProfile { skip_montecarlo, ..Default::default() };
            if let Some(s) = seed {
                profile.seed = s;
            }
            let reports = run_validation(&profile);
            let failed = reports.iter().filter(|r| !r.passed && !r.skipped).count();
            for r in &reports {
                println!("{r}");
                if verbose || (!r.passed && !r.skipped) {
                    for d in &r.details {
                        println!("    {d}");
                    }
                }
            }
            println!("{} passed, {failed} failed", reports.iter().filter(|r| r.passed).count());
            if failed > 0 {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn mc_config(model: &LedModel, random: &RandomArgs, file: &FileConfig) -> MonteCarloConfig {
    MonteCarloConfig::for_model(
        model,
        random.records.or(file.records).unwrap_or(DEFAULT_RECORDS),
        random.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
    )
}

fn parse_methods(names: &[String]) -> Result<Methods, String> {
    let mut m = Methods::default();
    for name in names {
        match name.as_str() {
            "quadrature" => m.quadrature = true,
            "cumulant" => m.cumulant = true,
            "montecarlo" | "mc" => m.montecarlo = true,
            "closed" => {}
            other => return Err(format!("unknown method '{other}'")),
        }
    }
    Ok(m)
}

fn figure(which: Figure, args: &FigureArgs) -> Result<(), String> {
    let paths = write_figure(which, args.n_emitters, &args.out).map_err(|e| e.to_string())?;
    for p in paths {
        println!("{}", p.display());
    }
    Ok(())
}

