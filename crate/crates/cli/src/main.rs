use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nlpg_core::experiments::{
    preset_table1, preset_table3, preset_table7, sharp_demo, write_csv, write_series_csv,
    DEFAULT_OVERSHOOT_SAMPLES,
};
use nlpg_core::{run, RunConfig, TestNorm};

#[derive(Parser)]
#[command(name = "nlpg", about = "Nonlocal Petrov-Galerkin convergence studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one study from a flat `key = value` config.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides as `--key value` pairs, e.g. `--norm eng --steps 4`.
        #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
        overrides: Vec<String>,
    },
    /// Uniform h-refinement for all horizons.
    Table1 {
        #[arg(long, default_value = "app")]
        norm: TestNorm,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Uniform p-refinement for all horizons.
    Table3 {
        #[arg(long, default_value = "app")]
        norm: TestNorm,
        #[arg(long, default_value_t = 2)]
        dp: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Local-limit couplings between horizon and mesh width.
    Table7 {
        #[arg(long, default_value = "app")]
        norm: TestNorm,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Overshoot of the coarse sharp-layer solution for both test norms.
    SharpDemo {
        #[arg(long, default_value_t = 1e-5)]
        delta: f64,
        #[arg(long, default_value_t = DEFAULT_OVERSHOOT_SAMPLES)]
        samples: usize,
    },
}

fn sink(path: Option<&PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn apply_overrides(cfg: &mut RunConfig, args: &[String]) -> Result<(), String> {
    let mut it = args.iter();
    while let Some(flag) = it.next() {
        let key = flag
            .strip_prefix("--")
            .ok_or_else(|| format!("expected `--key value`, got `{flag}`"))?;
        let (key, value) = match key.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => {
                let v = it.next().ok_or_else(|| format!("missing value for --{key}"))?;
                (key.to_string(), v.clone())
            }
        };
        cfg.set(&key.replace('-', "_"), &value).map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<(), String> {
    let err = |e: nlpg_core::Error| e.to_string();
    let io_err = |e: io::Error| e.to_string();
    match cli.command {
        Command::Run { config, overrides } => {
            let mut cfg = match config {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| format!("{}: {e}", path.display()))?;
                    RunConfig::parse(&text).map_err(err)?
                }
                None => RunConfig::default(),
            };
            apply_overrides(&mut cfg, &overrides)?;
            let records = run(&cfg).map_err(err)?;
            write_csv(&records, sink(cfg.output.as_ref()).map_err(io_err)?).map_err(io_err)
        }
        Command::Table1 { norm, output } => {
            let series = preset_table1(norm).map_err(err)?;
            write_series_csv(&series, sink(output.as_ref()).map_err(io_err)?).map_err(io_err)
        }
        Command::Table3 { norm, dp, output } => {
            let series = preset_table3(norm, dp).map_err(err)?;
            write_series_csv(&series, sink(output.as_ref()).map_err(io_err)?).map_err(io_err)
        }
        Command::Table7 { norm, output } => {
            let series = preset_table7(norm).map_err(err)?;
            write_series_csv(&series, sink(output.as_ref()).map_err(io_err)?).map_err(io_err)
        }
        Command::SharpDemo { delta, samples } => {
            let c = sharp_demo(delta, samples).map_err(err)?;
            println!("delta,overshoot_app,overshoot_eng,deviation_app,deviation_eng");
            println!(
                "{},{:.6e},{:.6e},{:.6e},{:.6e}",
                c.delta, c.app, c.eng, c.app_deviation, c.eng_deviation
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("nlpg: error: {msg}");
            ExitCode::FAILURE
        }
    }
}
