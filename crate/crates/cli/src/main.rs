use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lowmach::analysis::HydrostaticParams;
use lowmach::flux::FluxScheme;
use solver::analyze::{self, ConditionArgs};
use solver::runner::output_dir;
use solver::{parse_config, run};

#[derive(Parser)]
#[command(name = "solver", version, about = "All-Mach compressible Euler solver and analysis tools")]
struct Cli {
    /// Worker threads for the residual; 1 is the reproducible reference.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configured case and write series.csv, field_<step>.csv and run.json.
    Run { config: PathBuf },
    /// Analysis tables as CSV.
    Analyze {
        /// Write the table here instead of stdout.
        #[arg(long, global = true)]
        out: Option<PathBuf>,
        #[command(subcommand)]
        which: Analysis,
    },
}

#[derive(Subcommand)]
enum Analysis {
    /// Largest stable Δt/Δx of forward Euler per scheme and Mach number.
    Stability {
        #[arg(long, value_delimiter = ',', default_value = "roe,roe_turkel,roe_miczek")]
        schemes: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "1e-1,1e-2,1e-3")]
        mach: Vec<f64>,
        #[arg(long)]
        m_cut: Option<f64>,
        #[arg(long, default_value_t = 1.4)]
        gamma: f64,
    },
    /// Jacobian condition numbers on a perturbed Gresho snapshot.
    Condition {
        #[arg(long, value_delimiter = ',', default_value = "roe_turkel,roe_miczek,roe,central")]
        schemes: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "1e-2,1e-3")]
        mach: Vec<f64>,
        #[arg(long, default_value_t = 16)]
        n: usize,
        #[arg(long, default_value_t = 0.05)]
        amp: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 0.8)]
        cfl: f64,
        /// Use the Hager estimator instead of exact dense inversion.
        #[arg(long)]
        estimate: bool,
    },
    /// Upwind diffusion in a resting isothermal column versus M_cut.
    Hydrostatic {
        #[arg(long, value_delimiter = ',', default_value = "roe_turkel,roe_miczek")]
        schemes: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "1e-10,1e-8,1e-6,1e-4")]
        m_cut: Vec<f64>,
        #[arg(long, default_value_t = 64)]
        n: usize,
    },
    /// Run a config at each Mach number and report final diagnostics.
    Mscan {
        config: PathBuf,
        #[arg(long, value_delimiter = ',')]
        mach: Vec<f64>,
    },
}

fn schemes(names: &[String]) -> Result<Vec<FluxScheme>, String> {
    names.iter().map(|n| FluxScheme::parse(n.trim()).ok_or_else(|| format!("unknown scheme `{n}`"))).collect()
}

fn read_config(path: &PathBuf) -> Result<solver::RunConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_config(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn execute(cli: Cli) -> Result<(), String> {
    let parallel = cli.threads > 1;
    if parallel {
        rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global().map_err(|e| e.to_string())?;
    }
    match cli.command {
        Command::Run { config } => {
            let cfg = read_config(&config)?;
            let dir = output_dir(&cfg);
            let s = run(&cfg, &dir, parallel).map_err(|e| e.to_string())?;
            eprintln!("{} steps to t = {}, E_kin ratio {:.6}, output in {}", s.steps, s.t, s.kinetic_energy_ratio(), dir.display());
            Ok(())
        }
        Command::Analyze { out, which } => {
            let mut sink: Box<dyn Write> = match &out {
                Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| format!("{}: {e}", p.display()))?)),
                None => Box::new(io::stdout().lock()),
            };
            let r = match which {
                Analysis::Stability { schemes: s, mach, m_cut, gamma } => {
                    analyze::stability(&mut sink, &schemes(&s)?, &mach, m_cut, gamma)
                }
                Analysis::Condition { schemes: s, mach, n, amp, seed, cfl, estimate } => {
                    let a = ConditionArgs { n, amp, seed, cfl, exact: !estimate };
                    analyze::condition(&mut sink, &schemes(&s)?, &mach, &a)
                }
                Analysis::Hydrostatic { schemes: s, m_cut, n } => {
                    let p = HydrostaticParams { n_cells: n, ..HydrostaticParams::default() };
                    analyze::hydrostatic(&mut sink, &schemes(&s)?, &m_cut, &p)
                }
                Analysis::Mscan { config, mach } => {
                    let cfg = read_config(&config)?;
                    let m = if mach.is_empty() { vec![cfg.case_params.mach] } else { mach };
                    analyze::mscan(&mut sink, &cfg, &m, parallel).map(|_| ())
                }
            };
            r.map_err(|e| e.to_string())?;
            sink.flush().map_err(|e| e.to_string())
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
