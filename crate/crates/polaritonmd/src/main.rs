#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use polaritonmd::commands;
use polaritonmd::config::{self, LoadedConfig};

#[derive(Debug, Parser)]
#[command(
    name = "polaritonmd",
    version,
    about = "Classical nuclei coupled to cavity photon modes"
)]
struct Cli {
    /// Output directory. Defaults to `output_dir` from the config, else
    /// `<root>/<run label>` where the root comes from POLARITONMD_OUT.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Root for default output directories.
    #[arg(
        long,
        global = true,
        env = "POLARITONMD_OUT",
        default_value = "polaritonmd-out",
        hide_env_values = true
    )]
    out_root: PathBuf,
    /// Replace the seed from the config.
    #[arg(long, global = true)]
    seed_override: Option<u64>,
    /// Worker threads for parallel runs and post-processing (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate one trajectory and write trajectory, spectrum, peaks and summary.
    Run {
        /// Config file or bundled recipe name.
        #[arg(long)]
        config: String,
    },
    /// Repeat a run for several coupling strengths and compare splittings.
    ScanLambda {
        #[arg(long)]
        config: String,
        /// Coupling strengths in atomic units.
        #[arg(long, value_delimiter = ',', default_value = "0.02,0.05,0.1")]
        lambdas: Vec<f64>,
    },
    /// Normal modes and, with a cavity, linearized polariton modes.
    Modes {
        #[arg(long)]
        config: String,
    },
    /// Re-analyse an existing trajectory file.
    Spectrum {
        /// Trajectory file written by `run`.
        trajectory: PathBuf,
        /// Analysis settings; defaults apply when omitted.
        #[arg(long)]
        config: Option<String>,
    },
    /// List the bundled recipes.
    Recipes,
}

fn out_dir(cli: &Cli, loaded: Option<&LoadedConfig>, fallback: &str) -> PathBuf {
    if let Some(o) = &cli.out {
        return o.clone();
    }
    match loaded {
        Some(l) => l
            .config
            .output_dir
            .clone()
            .unwrap_or_else(|| cli.out_root.join(&l.label)),
        None => cli.out_root.join(fallback),
    }
}

fn list(files: &[PathBuf]) {
    for f in files {
        println!("wrote {}", f.display());
    }
}

fn execute(cli: &Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Run { config } => {
            let loaded = config::load(config)?;
            let dir = out_dir(cli, Some(&loaded), "run");
            let report = commands::cmd_run(&loaded, &dir, cli.seed_override)?;
            list(&report.files);
            let d = report.summary.drift;
            println!(
                "energy drift: max |dE| = {:.3e} Ha, relative secular = {:.3e}",
                d.max_abs_deviation, d.relative_secular_drift
            );
            println!(
                "peaks: {}",
                report
                    .analysis
                    .peaks
                    .iter()
                    .map(|p| format!("{:.1}", p.wavenumber))
                    .collect::<Vec<_>>()
                    .join(" ")
            );
            match &report.summary.splitting {
                Ok(w) => println!("rabi splitting: {w:.2} cm^-1"),
                Err(msg) => println!("rabi splitting: none ({msg})"),
            }
            if let Some(w) = report.summary.oracle_splitting {
                println!("oracle splitting: {w:.2} cm^-1");
            }
            for n in &report.summary.notices {
                eprintln!("notice: {n}");
            }
        }
        Command::ScanLambda { config, lambdas } => {
            let loaded = config::load(config)?;
            let dir = out_dir(cli, Some(&loaded), "scan");
            let rows = commands::cmd_scan_lambda(&loaded, lambdas, &dir, cli.seed_override)?;
            println!(
                "{:>8} {:>12} {:>12} {:>10}  flag",
                "lambda", "dynamics", "oracle", "rel.dev"
            );
            let fmt = |x: Option<f64>| x.map(|v| format!("{v:.3}")).unwrap_or_else(|| "-".into());
            for r in &rows {
                println!(
                    "{:>8} {:>12} {:>12} {:>10}  {}",
                    r.lambda,
                    fmt(r.dynamics.as_ref().ok().copied()),
                    fmt(r.oracle),
                    r.relative_deviation()
                        .map(|v| format!("{:.2}%", 100.0 * v))
                        .unwrap_or_else(|| "-".into()),
                    r.flag()
                );
            }
            println!("wrote {}", dir.join(format!("{}.scan.dat", loaded.label)).display());
        }
        Command::Modes { config } => {
            let loaded = config::load(config)?;
            let dir = out_dir(cli, Some(&loaded), "modes");
            let report = commands::cmd_modes(&loaded, &dir)?;
            list(&report.files);
            let freqs: Vec<String> = report
                .modes
                .vibrational_frequencies(5.0)
                .iter()
                .map(|f| format!("{f:.1}"))
                .collect();
            println!("vibrational frequencies (cm^-1): {}", freqs.join(" "));
            if let Some(pm) = &report.polaritons {
                if let Some(c) = loaded.config.rabi_center() {
                    if let Some((lo, hi)) = pm.polariton_pair(c, 1e-3) {
                        println!("polariton pair: {lo:.2} / {hi:.2} cm^-1 (splitting {:.2})", hi - lo);
                    }
                }
            }
        }
        Command::Spectrum { trajectory, config } => {
            let loaded = config.as_deref().map(config::load).transpose()?;
            let stem = trajectory_stem(trajectory);
            let dir = match &cli.out {
                Some(o) => o.clone(),
                None => trajectory
                    .parent()
                    .map(Path::to_path_buf)
                    .unwrap_or_else(|| cli.out_root.join(&stem)),
            };
            let result = commands::cmd_spectrum(trajectory, loaded.as_ref(), &dir)?;
            println!(
                "peaks: {}",
                result
                    .peaks
                    .iter()
                    .map(|p| format!("{:.1}", p.wavenumber))
                    .collect::<Vec<_>>()
                    .join(" ")
            );
            println!("wrote spectrum and peaks to {}", dir.display());
        }
        Command::Recipes => {
            for (name, _) in config::BUNDLED {
                println!("{name}");
            }
        }
    }
    Ok(())
}

fn trajectory_stem(p: &Path) -> String {
    p.file_name()
        .map(|s| s.to_string_lossy().trim_end_matches(".traj.dat").to_string())
        .unwrap_or_else(|| "trajectory".into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
