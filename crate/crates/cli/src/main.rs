use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use chiral_gap::pipeline::{band_structure, Pipeline};
use chiral_gap::run::{bands_csv, gaps_csv, write_all};
use chiral_gap::{
    parse_config, render_svg, run_experiment, scaling_suite, suite_csv, verify_run, Axis,
    ExperimentConfig,
};

#[derive(Parser)]
#[command(
    name = "chiral-gap",
    version,
    about = "Truncated chiral Dirac gap spectra and zero-alignment diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Band structure only: bands.csv and gaps.csv.
    Bands {
        /// JSON config; defaults apply when omitted
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory, overriding config `output_dir`
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full experiment with every artifact and consistency check.
    Run {
        /// JSON config; defaults apply when omitted
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory, overriding config `output_dir`
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scaling suite over one axis; prints the table unless --out is given.
    Suite {
        /// JSON config; defaults apply when omitted
        #[arg(long)]
        config: Option<PathBuf>,
        /// N_P, N_H or seed
        #[arg(long)]
        axis: Axis,
        /// Comma-separated axis values
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<u64>,
        /// Write suite_<axis>.csv here instead of printing
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Staircase plot only.
    Plot {
        /// JSON config; defaults apply when omitted
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory, overriding config `output_dir`
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recheck a run directory against its manifest.
    Verify {
        /// Run directory to check
        #[arg(long)]
        out: PathBuf,
    },
}

fn load(config: Option<&Path>) -> Result<ExperimentConfig> {
    let text = match config {
        Some(path) => {
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?
        }
        None => String::new(),
    };
    Ok(parse_config(&text)?)
}

fn out_dir(flag: Option<PathBuf>, cfg: &ExperimentConfig) -> Result<PathBuf> {
    match flag.or_else(|| cfg.output_dir.clone()) {
        Some(dir) => Ok(dir),
        None => bail!("no output directory: pass --out or set output_dir"),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(command: Command) -> Result<bool> {
    match command {
        Command::Bands { config, out } => {
            let cfg = load(config.as_deref())?;
            let dir = out_dir(out, &cfg)?;
            let (_, bands) = band_structure(&cfg)?;
            let files = BTreeMap::from([
                ("bands.csv".to_string(), bands_csv(&bands).into_bytes()),
                ("gaps.csv".to_string(), gaps_csv(&bands).into_bytes()),
            ]);
            write_all(&dir, &files)?;
            for g in bands.gaps() {
                println!(
                    "gap {}: ({:.10}, {:.10}) width {:.6e}",
                    g.index,
                    g.lower,
                    g.upper,
                    g.width()
                );
            }
            Ok(true)
        }
        Command::Run { config, out } => {
            let cfg = load(config.as_deref())?;
            let dir = out_dir(out, &cfg)?;
            let outcome = run_experiment(&cfg, &dir)?;
            for (name, ok) in &outcome.checks {
                println!("{:<22} {}", name, if *ok { "pass" } else { "FAIL" });
            }
            println!("artifacts written to {}", dir.display());
            Ok(outcome.all_passed())
        }
        Command::Suite {
            config,
            axis,
            values,
            out,
        } => {
            let cfg = load(config.as_deref())?;
            let rows = scaling_suite(axis, &values, &cfg)?;
            let table = suite_csv(&rows);
            match out {
                Some(dir) => {
                    let name = format!("suite_{}.csv", axis.name());
                    write_all(&dir, &BTreeMap::from([(name, table.into_bytes())]))?;
                }
                None => print!("{table}"),
            }
            Ok(true)
        }
        Command::Plot { config, out } => {
            let cfg = load(config.as_deref())?;
            let dir = out_dir(out, &cfg)?;
            let p = Pipeline::run(&cfg)?;
            let map = p
                .alignment
                .as_ref()
                .map_or(chiral_gap_core::zeta::AffineMap::IDENTITY, |a| a.fit.map);
            let svg = render_svg(&p.staircase, p.zeros.ordinates(), &map, cfg.window);
            write_all(
                &dir,
                &BTreeMap::from([("staircase.svg".to_string(), svg.into_bytes())]),
            )?;
            Ok(true)
        }
        Command::Verify { out } => {
            let report = verify_run(&out)?;
            if !report.config_hash_ok {
                println!("config hash mismatch");
            }
            for name in &report.mismatched {
                println!("artifact mismatch: {name}");
            }
            if report.ok() {
                println!("all artifacts match the manifest");
            }
            Ok(report.ok())
        }
    }
}
