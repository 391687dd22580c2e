use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vofl_app::config::{parse_config, ConfigError, SimulationConfig};
use vofl_app::presets::{preset, with_mesh_prefix};
use vofl_app::simulation::{RunOptions, Simulation};
use vofl_app::threshold::threshold_for;
use vofl_app::AppError;

/// Environment variable naming the default output directory.
const OUT_ENV: &str = "VOFL_OUT_DIR";

#[derive(Parser)]
#[command(name = "vofl", version, about = "Variable-order fractional monodomain and Fisher simulations")]
struct Cli {
    /// Worker threads for the per-pole work (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Output directory; overrides the configuration and $VOFL_OUT_DIR.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Snapshot cadence in ms.
    #[arg(long = "snapshot-every", global = true, value_name = "MS")]
    snapshot_every: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the simulation described by a TOML file.
    Simulate { config: PathBuf },
    /// Run a built-in experiment: fisher-1d, br-cable-1d, br-heart-3d, br-slab-3d.
    Preset {
        name: String,
        /// Replace a setting, e.g. `orders.alpha1=1.5`. Repeatable.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Mesh file prefix for br-heart-3d (`PREFIX.node`, `PREFIX.ele`).
        #[arg(long, value_name = "PREFIX")]
        mesh: Option<String>,
        /// Print the resolved configuration instead of running.
        #[arg(long)]
        print_config: bool,
    },
    /// Bisect for the smallest stimulus amplitude that propagates.
    Threshold { config: PathBuf },
}

fn load(path: &Path) -> Result<SimulationConfig, AppError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Invalid {
        field: "config".into(),
        reason: format!("{}: {e}", path.display()),
    })?;
    Ok(parse_config(&text)?)
}

fn out_dir(cli_out: Option<PathBuf>, cfg: &SimulationConfig) -> PathBuf {
    cli_out
        .or_else(|| cfg.output.dir.clone())
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("vofl-out"))
}

fn simulate(cfg: SimulationConfig, dir: PathBuf) -> Result<(), AppError> {
    let sim = Simulation::new(cfg)?;
    std::fs::create_dir_all(&dir).map_err(|source| AppError::Io {
        path: dir.clone(),
        source,
    })?;
    let cfg_path = dir.join("config.toml");
    std::fs::write(&cfg_path, sim.config().to_toml()).map_err(|source| AppError::Io { path: cfg_path, source })?;
    let run = sim.run(&RunOptions {
        out_dir: Some(dir.clone()),
        ..RunOptions::default()
    })?;
    let activated = run.activation.iter().filter(|a| a.is_some()).count();
    println!("nodes            {}", sim.domain().len());
    println!("steps            {} (t = {} ms)", run.steps, run.time);
    println!("picard           {:.2} mean, {} max", run.picard.average(), run.picard.max_iterations);
    println!("krylov           {}", run.krylov_iterations);
    println!("range            [{:.6e}, {:.6e}]", run.min, run.max);
    println!("activated nodes  {activated}");
    println!("files            {} in {}", run.snapshots.len(), dir.display());
    Ok(())
}

fn run(cli: Cli) -> Result<(), AppError> {
    if let Some(n) = cli.threads {
        // a second initialisation only fails if a pool already exists, which is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let mut cfg = match &cli.command {
        Command::Simulate { config } | Command::Threshold { config } => load(config)?,
        Command::Preset {
            name, overrides, mesh, ..
        } => {
            let mut cfg = preset(name)?;
            if let Some(prefix) = mesh {
                cfg = with_mesh_prefix(cfg, prefix);
            }
            for o in overrides {
                cfg = cfg.apply_override(o)?;
            }
            cfg.validate()?;
            cfg
        }
    };
    if let Some(every) = cli.snapshot_every {
        cfg.output.snapshot_every = Some(every);
        cfg.validate()?;
    }
    let dir = out_dir(cli.out, &cfg);
    match cli.command {
        Command::Preset { print_config: true, .. } => {
            print!("{}", cfg.to_toml());
            Ok(())
        }
        Command::Simulate { .. } | Command::Preset { .. } => simulate(cfg, dir),
        Command::Threshold { .. } => {
            let sim = Simulation::new(cfg)?;
            let r = threshold_for(&sim)?;
            for (amp, ok) in &r.trials {
                println!("amplitude {amp:.6e}: {}", if *ok { "propagates" } else { "fails" });
            }
            println!("threshold {:.6e} (bracket [{:.6e}, {:.6e}], probe node {})", r.threshold, r.lower, r.threshold, r.probe);
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
