//! `rydnm`: run scenarios and parameter sweeps from the command line.
//!
//! Exit codes: 0 on success, 1 for configuration (or I/O) problems, 2 when the
//! integrator aborts on an invalid state.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rydnm::scenario::config::{resolve, IntegratorDoc};
use rydnm::scenario::{
    parse_document, parse_sweep, preset, run_scenario, run_sweep, write_abort_summary, ConfigDocument, PresetId,
    ScenarioConfig, SweepPlan,
};

#[derive(Parser, Debug)]
#[command(name = "rydnm", version, about = "Rydberg dimer + EIT detector: trajectories and non-Markovianity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Propagate both initial states and write the trajectory CSV and summary JSON.
    Run {
        /// Scenario config (JSON).
        #[arg(required_unless_present = "preset", conflicts_with = "preset")]
        config: Option<PathBuf>,
        /// Run a built-in preset instead of a config file.
        #[arg(long)]
        preset: Option<PresetId>,
        #[command(flatten)]
        overrides: Overrides,
        /// Output directory (overrides `output.out_dir`).
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Evaluate a one- or two-parameter grid in parallel and write one CSV row per cell.
    Sweep {
        /// Sweep spec (JSON).
        spec: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
        /// Output directory (overrides the base config's `output.out_dir`).
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Worker threads; defaults to all available cores.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Check a config and print it with every default filled in.
    Validate { config: PathBuf },
    /// List the built-in presets with their resolved parameters.
    Presets {
        /// Print the full resolved configs as JSON.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args, Debug, Default)]
struct Overrides {
    /// Integrator step, μs.
    #[arg(long)]
    dt_us: Option<f64>,
    /// Simulated window, μs.
    #[arg(long)]
    t_max_us: Option<f64>,
    /// Keep every N-th integrator step.
    #[arg(long)]
    stride: Option<usize>,
}

impl Overrides {
    fn apply(&self, doc: &mut ConfigDocument) {
        if self.dt_us.is_none() && self.t_max_us.is_none() && self.stride.is_none() {
            return;
        }
        let integ = doc.integrator.get_or_insert_with(IntegratorDoc::default);
        if let Some(dt) = self.dt_us {
            integ.dt_us = Some(dt);
        }
        if let Some(t) = self.t_max_us {
            integ.t_max_us = Some(t);
        }
        if let Some(s) = self.stride {
            integ.output_stride = Some(s);
        }
    }
}

/// What went wrong, and which exit code it maps to.
enum Failure {
    Config(String),
    Abort(String),
}

impl Failure {
    fn report(self) -> ExitCode {
        match self {
            Failure::Config(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(1)
            }
            Failure::Abort(msg) => {
                eprintln!("integrator abort: {msg}");
                ExitCode::from(2)
            }
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn load_document(path: &Path) -> Result<ConfigDocument, Failure> {
    parse_document(&read(path)?).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn cmd_run(
    config: Option<PathBuf>,
    preset_id: Option<PresetId>,
    overrides: &Overrides,
    out_dir: Option<PathBuf>,
) -> Result<(), Failure> {
    let mut doc = match (config, preset_id) {
        (Some(path), _) => load_document(&path)?,
        (None, Some(id)) => ConfigDocument { preset: Some(id), ..Default::default() },
        (None, None) => unreachable!("clap requires a config or a preset"),
    };
    overrides.apply(&mut doc);
    let cfg = resolve(&doc).map_err(|e| Failure::Config(e.to_string()))?;
    let dir = out_dir.unwrap_or_else(|| cfg.output.out_dir.clone());
    match run_scenario(&cfg) {
        Ok(out) => {
            let written = out.write(&dir).map_err(|e| Failure::Config(format!("{}: {e}", dir.display())))?;
            println!(
                "{}: N = {:.6}, revivals at {:?} us",
                cfg.name,
                out.nm.n,
                out.revivals.iter().map(|r| r.time).collect::<Vec<_>>()
            );
            for p in written {
                println!("wrote {}", p.display());
            }
            Ok(())
        }
        Err(err) => {
            if let Ok(p) = write_abort_summary(&cfg, &err, &dir) {
                eprintln!("wrote {}", p.display());
            }
            if err.is_integrator_abort() {
                Err(Failure::Abort(err.to_string()))
            } else {
                Err(Failure::Config(err.to_string()))
            }
        }
    }
}

fn cmd_sweep(
    spec_path: &Path,
    overrides: &Overrides,
    out_dir: Option<PathBuf>,
    threads: Option<usize>,
) -> Result<(), Failure> {
    let mut spec =
        parse_sweep(&read(spec_path)?).map_err(|e| Failure::Config(format!("{}: {e}", spec_path.display())))?;
    overrides.apply(&mut spec.base);
    let plan = SweepPlan::new(&spec).map_err(|e| Failure::Config(e.to_string()))?;
    if threads == Some(0) {
        return Err(Failure::Config("--threads must be at least 1".into()));
    }
    let table = run_sweep(&plan, threads).map_err(|e| Failure::Config(e.to_string()))?;
    let dir = out_dir.unwrap_or_else(|| plan.base.output.out_dir.clone());
    let path = table.write(&dir).map_err(|e| Failure::Config(format!("{}: {e}", dir.display())))?;
    let failed = table.rows.iter().filter(|r| r.outcome.is_err()).count();
    println!("{}: {} cells, {failed} failed", table.name, table.rows.len());
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_validate(path: &Path) -> Result<(), Failure> {
    let cfg = resolve(&load_document(path)?).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    println!("{}", cfg.to_json());
    Ok(())
}

fn describe(cfg: &ScenarioConfig) -> String {
    let l = &cfg.physics.lasers;
    let couplings = match cfg.physics.couplings.resolve() {
        Ok(c) => {
            let [j, u1, u2] = c.to_mhz();
            format!("J={j:.3} U1={u1:.3} U2={u2:.3}")
        }
        Err(e) => e.to_string(),
    };
    format!(
        "{couplings} | omega_p={} omega_c={} delta_p={} delta_c={} gamma_p={} (MHz/2pi) | t_max={} us",
        l.omega_p, l.omega_c, l.delta_p, l.delta_c, l.gamma_p, cfg.integrator.t_max
    )
}

fn cmd_presets(json: bool) {
    if json {
        let docs: Vec<ConfigDocument> = PresetId::ALL.into_iter().map(|id| preset(id).to_document()).collect();
        println!("{}", serde_json::to_string_pretty(&docs).expect("config documents serialize"));
        return;
    }
    for id in PresetId::ALL {
        println!("{id:6} {}", id.description());
        println!("       {}", describe(&preset(id)));
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // clap's own usage-error code (2) would collide with the abort code.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Run { config, preset, overrides, out_dir } => cmd_run(config, preset, &overrides, out_dir),
        Command::Sweep { spec, overrides, out_dir, threads } => cmd_sweep(&spec, &overrides, out_dir, threads),
        Command::Validate { config } => cmd_validate(&config),
        Command::Presets { json } => {
            cmd_presets(json);
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.report(),
    }
}
