use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use expdg::config::{preset_names, preset_source, ScenarioConfig};
use expdg::convergence::{run_convergence, Sweep, SweepAxis};
use expdg::dg_core::FluxKind;
use expdg::diagnostics::{write_order_table, EnergyCorrection};
use expdg::lawson::ButcherTableau;
use expdg::simulation::run_scenario;
use expdg::{Error, Result};

/// Lawson exponential integrators with DG discretisations for kinetic plasma models.
#[derive(Parser, Debug)]
#[command(name = "expdg", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a scenario from a preset or a TOML file.
    Run(RunArgs),
    /// Run a convergence sweep for the periodic transport problem.
    Converge(ConvergeArgs),
    /// List the built-in presets, or print one.
    Presets {
        /// Print the TOML of this preset.
        name: Option<String>,
    },
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Preset name (see `expdg presets`).
    #[arg(conflicts_with = "config", required_unless_present = "config")]
    preset: Option<String>,
    /// Scenario TOML file.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Directory for CSV series, snapshots and the JSON report.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Override the Runge-Kutta tableau (euler, rk33, kutta3, rk44).
    #[arg(long)]
    tableau: Option<String>,
    /// Override the final time.
    #[arg(long)]
    t_final: Option<f64>,
    /// Enable the energy-correction post-step.
    #[arg(long)]
    energy_correction: bool,
    /// Correction strategy when enabled.
    #[arg(long, value_parser = parse_correction)]
    correction_method: Option<EnergyCorrection>,
}

#[derive(Args, Debug)]
struct ConvergeArgs {
    /// Sweep axis: space, velocity or time.
    #[arg(long, default_value = "space")]
    axis: SweepAxis,
    /// Polynomial degree (space sweep).
    #[arg(long, default_value_t = 2)]
    degree: usize,
    /// Interface flux (space sweep).
    #[arg(long, default_value = "central", value_parser = parse_flux)]
    flux: FluxKind,
    /// Runge-Kutta tableau.
    #[arg(long, default_value = "rk33")]
    tableau: String,
    /// Write the table to this CSV file instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn parse_flux(s: &str) -> std::result::Result<FluxKind, String> {
    match s {
        "central" => Ok(FluxKind::Central),
        "upwind" => Ok(FluxKind::Upwind),
        _ => Err(format!("unknown flux '{s}' (expected central or upwind)")),
    }
}

fn parse_correction(s: &str) -> std::result::Result<EnergyCorrection, String> {
    match s {
        "mean_profile" => Ok(EnergyCorrection::MeanProfile),
        "global_scale" => Ok(EnergyCorrection::GlobalScale),
        _ => Err(format!(
            "unknown correction '{s}' (expected mean_profile or global_scale)"
        )),
    }
}

fn run(a: RunArgs) -> Result<()> {
    let mut cfg = match (&a.preset, &a.config) {
        (_, Some(path)) => ScenarioConfig::from_toml(&std::fs::read_to_string(path)?)?,
        (Some(name), None) => ScenarioConfig::from_toml(preset_source(name)?)?,
        (None, None) => return Err(Error::Config("give a preset name or --config".into())),
    };
    if let Some(t) = a.tableau {
        cfg.numerics.tableau = t;
    }
    if let Some(t) = a.t_final {
        cfg.numerics.t_final = t;
    }
    if a.energy_correction {
        cfg.numerics.energy_correction = true;
    }
    if let Some(m) = a.correction_method {
        cfg.numerics.correction_method = m;
    }
    cfg.validate()?;
    let (report, _) = run_scenario(&cfg, a.output.as_deref())?;
    let f = &report.final_observables;
    println!("steps            {}", report.steps);
    println!("final time       {}", report.final_time);
    println!("wall time        {:.2} s", report.wall_time_s);
    println!("electric energy  {:.6e}", f.electric_energy);
    println!("magnetic energy  {:.6e}", f.magnetic_energy);
    println!("energy drift     {:.3e}", report.energy_drift);
    println!("mass drift       {:.3e}", report.mass_drift);
    println!("poisson residual {:.3e}", report.max_poisson_residual);
    if cfg.numerics.energy_correction {
        println!("max correction   {:.3e}", report.max_correction);
    }
    if let Some(fit) = report.fit {
        println!(
            "fitted rate      {:.6} on [{}, {}] (r2 {:.5}, {} points)",
            fit.rate, fit.window[0], fit.window[1], fit.r_squared, fit.points
        );
    }
    if let Some(why) = &report.fit_skipped {
        println!("fit skipped      {why}");
    }
    for file in &report.files {
        println!("wrote            {file}");
    }
    Ok(())
}

fn converge(a: ConvergeArgs) -> Result<()> {
    let mut sweep = Sweep::for_axis(a.axis, a.degree, a.flux);
    sweep.tableau = ButcherTableau::by_name(&a.tableau)?;
    let rows = run_convergence(&sweep)?;
    match a.output {
        Some(path) => write_order_table(&rows, BufWriter::new(File::create(path)?))?,
        None => write_order_table(&rows, io::stdout().lock())?,
    }
    Ok(())
}

fn presets(name: Option<String>) -> Result<()> {
    let mut out = io::stdout().lock();
    match name {
        Some(n) => write!(out, "{}", preset_source(&n)?)?,
        None => {
            for n in preset_names() {
                writeln!(out, "{n}")?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Run(a) => run(a),
        Command::Converge(a) => converge(a),
        Command::Presets { name } => presets(name),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
