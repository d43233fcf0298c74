//! `cytowave`: experiment runner for the microwave flow-cytometry models.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical/domain error,
//! 4 I/O error.

mod config;
mod experiments;
mod manifest;
mod output;
mod settings;

use clap::{Parser, Subcommand};
use config::RawConfig;
use experiments::RunError;
use settings::{MaterialsSource, Settings};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Parser)]
#[command(
    name = "cytowave",
    about = "Microwave flow-cytometry simulation experiments",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Execute an experiment config and write artifacts plus a manifest
    Run {
        config: PathBuf,
        /// Override the config seed
        #[arg(long)]
        seed: Option<u64>,
        /// Override the output directory
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; affects speed only, never results
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Check a config against the schema and physics ranges without running
    Validate { config: PathBuf },
    /// Inspect the dielectric material table
    Materials {
        #[command(subcommand)]
        which: MaterialsCmd,
    },
}

#[derive(Subcommand)]
enum MaterialsCmd {
    /// Names with diameter and frequency coverage
    List {
        /// Load this table file instead of the built-in one
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Tabulated permittivity rows for one material
    Show {
        name: String,
        #[arg(long)]
        table: Option<PathBuf>,
    },
}

fn fail(code: u8, message: &str) -> ExitCode {
    eprintln!("cytowave: {message}");
    ExitCode::from(code)
}

fn run_error_code(e: &RunError) -> u8 {
    match e {
        RunError::Config(_) => EXIT_CONFIG,
        RunError::Numeric(_) => EXIT_NUMERIC,
        RunError::Io(_) => EXIT_IO,
    }
}

/// Paths inside a config resolve relative to the config file itself.
fn rebase(path: &str, config_path: &Path) -> String {
    let p = Path::new(path);
    if p.is_absolute() {
        return path.to_string();
    }
    match config_path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => dir.join(p).to_string_lossy().into_owned(),
        _ => path.to_string(),
    }
}

fn load_settings(
    config_path: &Path,
    seed: Option<u64>,
) -> Result<Settings, (u8, String)> {
    let text = std::fs::read_to_string(config_path)
        .map_err(|e| (EXIT_IO, format!("{}: {e}", config_path.display())))?;
    let raw = RawConfig::parse(&text).map_err(|e| (EXIT_CONFIG, e.to_string()))?;
    let mut resolved =
        Settings::resolve(&raw, seed).map_err(|e| (EXIT_CONFIG, e.to_string()))?;
    if let Some(p) = resolved.trace_csv.take() {
        resolved.trace_csv = Some(rebase(&p, config_path));
    }
    if let MaterialsSource::Path(p) = &resolved.materials {
        resolved.materials = MaterialsSource::Path(rebase(p, config_path));
    }
    Ok(resolved)
}

fn cmd_run(
    config_path: &Path,
    seed: Option<u64>,
    out: Option<PathBuf>,
) -> ExitCode {
    let mut resolved = match load_settings(config_path, seed) {
        Ok(s) => s,
        Err((code, msg)) => return fail(code, &msg),
    };
    if let Some(dir) = out {
        resolved.out_dir = dir.to_string_lossy().into_owned();
    }
    let diags = resolved.diagnostics();
    if !diags.is_empty() {
        for d in &diags {
            eprintln!("cytowave: {d}");
        }
        return ExitCode::from(EXIT_CONFIG);
    }
    let output = match experiments::run(&resolved) {
        Ok(o) => o,
        Err(e) => return fail(run_error_code(&e), &e.to_string()),
    };
    let out_dir = PathBuf::from(&resolved.out_dir);
    let mut hashes = Vec::new();
    for artifact in &output.artifacts {
        match output::write_atomic(&out_dir, &artifact.name, &artifact.bytes) {
            Ok(path) => {
                hashes.push((artifact.name.clone(), manifest::sha256_hex(&artifact.bytes)));
                println!("wrote {}", path.display());
            }
            Err(e) => return fail(EXIT_IO, &format!("{}: {e}", artifact.name)),
        }
    }
    let manifest_text = manifest::render(&resolved.manifest_lines(), &hashes);
    match output::write_atomic(&out_dir, "manifest.txt", manifest_text.as_bytes()) {
        Ok(path) => println!("wrote {}", path.display()),
        Err(e) => return fail(EXIT_IO, &format!("manifest.txt: {e}")),
    }
    for note in &output.notes {
        println!("{note}");
    }
    ExitCode::SUCCESS
}

fn cmd_validate(config_path: &Path) -> ExitCode {
    let resolved = match load_settings(config_path, None) {
        Ok(s) => s,
        Err((code, msg)) => return fail(code, &msg),
    };
    let diags = resolved.diagnostics();
    if diags.is_empty() {
        println!("ok: {} experiment, no diagnostics", resolved.experiment.name());
        ExitCode::SUCCESS
    } else {
        for d in &diags {
            println!("{d}");
        }
        ExitCode::from(EXIT_CONFIG)
    }
}

fn materials_source(table: Option<PathBuf>) -> MaterialsSource {
    if let Some(p) = table {
        return MaterialsSource::Path(p.to_string_lossy().into_owned());
    }
    match std::env::var("CYTOWAVE_MATERIALS") {
        Ok(p) if !p.is_empty() => MaterialsSource::Path(p),
        _ => MaterialsSource::Builtin,
    }
}

fn load_table(
    source: &MaterialsSource,
) -> Result<cytowave_core::dielectrics::MaterialTable, (u8, String)> {
    match source {
        MaterialsSource::Builtin => Ok(cytowave_core::dielectrics::MaterialTable::builtin()),
        MaterialsSource::Path(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| (EXIT_IO, format!("{p}: {e}")))?;
            cytowave_core::dielectrics::MaterialTable::parse(&text)
                .map_err(|e| (EXIT_CONFIG, e.to_string()))
        }
    }
}

fn cmd_materials(which: MaterialsCmd) -> ExitCode {
    let (source, name) = match which {
        MaterialsCmd::List { table } => (materials_source(table), None),
        MaterialsCmd::Show { name, table } => (materials_source(table), Some(name)),
    };
    let table = match load_table(&source) {
        Ok(t) => t,
        Err((code, msg)) => return fail(code, &msg),
    };
    match name {
        None => {
            let mut names = table.names();
            names.sort_unstable();
            for n in names {
                let (d_lo, d_hi) = table.diameter_range_m(n).expect("listed name");
                let (f_lo, f_hi) = table.frequency_range_hz(n).expect("listed name");
                println!("{n}: diameter {d_lo:.2e}-{d_hi:.2e} m, {f_lo:.2e}-{f_hi:.2e} Hz");
            }
            ExitCode::SUCCESS
        }
        Some(n) => match table.rows(&n) {
            Ok(rows) => {
                println!("f_hz,eps_real,eps_imag");
                for (f, eps) in rows {
                    println!("{f},{},{}", eps.eps_real, eps.eps_imag);
                }
                ExitCode::SUCCESS
            }
            Err(e) => fail(EXIT_CONFIG, &e.to_string()),
        },
    }
}

fn main() -> ExitCode {
    match Cli::parse().cmd {
        Cmd::Run {
            config,
            seed,
            out,
            threads: _,
        } => cmd_run(&config, seed, out),
        Cmd::Validate { config } => cmd_validate(&config),
        Cmd::Materials { which } => cmd_materials(which),
    }
}
