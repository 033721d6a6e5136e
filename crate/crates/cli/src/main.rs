//! `ars`: runs the reflector link experiments and writes CSV and gnuplot
//! data.
//!
//! Exit status: 0 on success, 2 for configuration errors, 3 for data
//! errors, 4 for numerical failures.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use ars_core::experiment::{correct_rows, emit_report, emit_rows, gnuplot_blocks, peak_angles, Experiment};
use ars_core::io::{self, RunConfig};
use ars_core::raytracer::Summation;
use ars_core::{Error, ErrorClass, Result};
use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "ars", version, about = "Anomalous-reflector link experiments")]
struct Cli {
    /// Run configuration (TOML). Paths inside it are relative to its directory.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Panel size in unit cells per side.
    #[arg(long, global = true, value_parser = ["48", "96"])]
    panel: Option<String>,
    /// Reflection order of the ray-traced column.
    #[arg(long, global = true, value_parser = ["0", "3"])]
    max_order: Option<String>,
    /// Output directory.
    #[arg(long, global = true, default_value = "results")]
    out: PathBuf,
    /// Sum multipath amplitudes coherently.
    #[arg(long, global = true)]
    coherent: bool,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand, Debug)]
enum Verb {
    /// Received power over the Rx angles at each configured frequency.
    SweepAngle,
    /// Received power over the continuous-wave sweep at its fixed angles.
    SweepFrequency,
    /// LoS Friis reference and `P_diff` tables from the measurements.
    LosRef,
    /// Applies the correction table to a results CSV.
    Correct { results: PathBuf },
    /// Gnuplot data and per-frequency peak angles for a results CSV.
    Report { results: PathBuf },
}

fn load_config(cli: &Cli) -> Result<(RunConfig, PathBuf)> {
    let (mut cfg, base) = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
            (RunConfig::from_toml_str(&text)?, base)
        }
        None => (io::shipped::config()?, PathBuf::from(".")),
    };
    if let Some(p) = &cli.panel {
        cfg = cfg.with_panel(p.parse().expect("restricted by clap"));
    }
    if let Some(m) = &cli.max_order {
        cfg.max_order = m.parse().expect("restricted by clap");
    }
    if cli.coherent {
        cfg.summation = Summation::Coherent;
    }
    cfg.validate()?;
    Ok((cfg, base))
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "results".into())
}

fn report_written(files: &[PathBuf]) {
    for f in files {
        println!("wrote {}", f.display());
    }
}

fn run(cli: &Cli) -> Result<()> {
    let (cfg, base) = load_config(cli)?;
    match &cli.verb {
        Verb::SweepAngle => {
            let r = Experiment::from_config(cfg, &base)?.run_angular_sweep()?;
            report_written(&emit_report(&r, &cli.out)?);
        }
        Verb::SweepFrequency => {
            let r = Experiment::from_config(cfg, &base)?.run_frequency_sweep()?;
            report_written(&emit_report(&r, &cli.out)?);
        }
        Verb::LosRef => {
            let e = Experiment::from_config(cfg, &base)?;
            let mut waveforms: Vec<_> = e.measurements.iter().map(|m| m.waveform).collect();
            waveforms.sort();
            waveforms.dedup();
            if waveforms.is_empty() {
                return Err(Error::Lookup("no measurements".into()));
            }
            for w in waveforms {
                let mut reference = e.run_los_reference(w)?;
                reference.result.name = format!("los_reference_{}", w.tag());
                let mut files = emit_report(&reference.result, &cli.out)?;
                let table = cli.out.join(format!("pdiff_{}.csv", w.tag()));
                std::fs::write(&table, io::write_corrections(&reference.table))?;
                files.push(table);
                report_written(&files);
            }
        }
        Verb::Correct { results } => {
            let rows = io::read_results(&std::fs::read_to_string(results)?)?;
            let table = match &cfg.paths.corrections {
                Some(p) => io::read_corrections(&std::fs::read_to_string(base.join(p))?)?,
                None => io::shipped::corrections()?,
            };
            let corrected = correct_rows(&rows, &table)?;
            report_written(&emit_rows(&format!("{}_corrected", stem(results)), &corrected, &cli.out)?);
        }
        Verb::Report { results } => {
            let rows = io::read_results(&std::fs::read_to_string(results)?)?;
            if rows.is_empty() {
                return Err(Error::Lookup(format!("{}: empty result set", results.display())));
            }
            std::fs::create_dir_all(&cli.out)?;
            let dat = cli.out.join(format!("{}.dat", stem(results)));
            std::fs::write(&dat, gnuplot_blocks(&rows))?;
            println!("method,freq_ghz,peak_angle_deg,p_dbm");
            for (method, f, a, p) in peak_angles(&rows) {
                println!("{method},{f},{a},{p:.4}");
            }
            report_written(&[dat]);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ars: {e}");
            ExitCode::from(match e.class() {
                ErrorClass::Config => 2,
                ErrorClass::Data => 3,
                ErrorClass::Numerical => 4,
            })
        }
    }
}
