use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use tripod_vortex::response::Parity;
use tripod_vortex_cli::config::{
    preset, preset_description, ConfigSource, ScenarioConfig, PRESET_NAMES,
};
use tripod_vortex_cli::output::RunReport;
use tripod_vortex_cli::run;
use tripod_vortex_cli::validate::Suite;

#[derive(Parser)]
#[command(
    name = "tripod-vortex",
    version,
    about = "Slow-light vector vortices in a tripod medium"
)]
struct Cli {
    /// Worker threads for grid computations (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Azimuth/detuning susceptibility map.
    ResponseMap(RunArgs),
    /// Transverse intensity and absorption maps at each depth of z_list.
    Propagate(RunArgs),
    /// Polarization textures at each depth, plus the ellipticity sweep if configured.
    Polarization(RunArgs),
    /// Average ellipticity over (depth, detuning).
    EllipticitySweep(RunArgs),
    /// Run the invariant and oracle suite.
    Validate,
    /// List the named presets.
    Presets {
        /// Print the full JSON of this preset.
        #[arg(long)]
        show: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ParityArg {
    Native,
    Paper,
}

#[derive(Args)]
struct RunArgs {
    /// JSON config file.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Named preset.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override a config key, e.g. `--set beam.l=2` (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    #[arg(long, value_enum)]
    sign_parity: Option<ParityArg>,
}

impl RunArgs {
    fn source(&self) -> ConfigSource {
        ConfigSource {
            preset: self.preset.clone(),
            config: self.config.clone(),
            sets: self.sets.clone(),
            sign_parity: self.sign_parity.map(|p| match p {
                ParityArg::Native => Parity::Native,
                ParityArg::Paper => Parity::Paper,
            }),
            out: self.out.clone(),
        }
    }
}

fn summarize(report: &RunReport) {
    for f in &report.files {
        println!("{}  {} rows", report.dir.join(&f.file).display(), f.rows);
    }
    println!("{}", report.sidecar.display());
}

fn emit(args: &RunArgs, runner: fn(&ScenarioConfig) -> Result<RunReport>) -> Result<ExitCode> {
    let cfg = args.source().resolve()?;
    summarize(&runner(&cfg)?);
    Ok(ExitCode::SUCCESS)
}

fn execute(command: Command) -> Result<ExitCode> {
    match command {
        Command::ResponseMap(args) => emit(&args, run::run_response_map),
        Command::Propagate(args) => emit(&args, run::run_propagation),
        Command::Polarization(args) => emit(&args, run::run_polarization),
        Command::EllipticitySweep(args) => emit(&args, run::run_ellipticity_sweep),
        Command::Validate => {
            let report = Suite::default().run();
            println!("{report}");
            Ok(if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Presets { show: Some(name) } => {
            println!("{}", serde_json::to_string_pretty(&preset(&name)?)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Presets { show: None } => {
            for name in PRESET_NAMES {
                println!("{name:<6} {}", preset_description(name).unwrap_or_default());
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("building thread pool")
            .and_then(|pool| pool.install(|| execute(cli.command))),
        None => execute(cli.command),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
