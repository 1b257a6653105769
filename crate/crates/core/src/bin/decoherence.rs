use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use decoherence::experiments::{
    apply_setting, emit_csv, emit_method_csv, parse_config, preset, preset_names, run_scenario,
    scenario_settings, write_atomic, Scenario,
};
use decoherence::{Error, Result};

/// Output directory used when `--out` is not given.
const OUT_ENV: &str = "DECOHERENCE_OUT";

#[derive(Parser)]
#[command(version, about = "Entropy generation of an oscillator coupled to a bath of oscillators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its CSV files.
    Run {
        #[command(flatten)]
        source: Source,
        /// Extra `key=value` settings applied after the preset or config.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[command(flatten)]
        out: Out,
    },
    /// List preset names with a one-line summary.
    ListPresets,
    /// Run a scenario once per value of one setting.
    Sweep {
        #[command(flatten)]
        source: Source,
        /// Setting to vary, e.g. `lambda` or `seed`.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        /// Extra `key=value` settings applied before sweeping.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[command(flatten)]
        out: Out,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Named preset (see `list-presets`).
    #[arg(long)]
    preset: Option<String>,
    /// Scenario file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct Out {
    /// Output directory (default: $DECOHERENCE_OUT, else `out`).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Out {
    fn dir(&self) -> PathBuf {
        self.out
            .clone()
            .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"))
    }
}

fn load(source: &Source) -> Result<Scenario> {
    match (&source.preset, &source.config) {
        (Some(name), _) => preset(name),
        (None, Some(path)) => {
            let text = fs::read_to_string(path).map_err(|e| Error::Io {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
            parse_config(&text)
        }
        (None, None) => Err(Error::InvalidScenario("give --preset or --config".into())),
    }
}

fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect()
}

fn run_and_write(s: &Scenario, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.display().to_string(),
        message: e.to_string(),
    })?;
    let tr = run_scenario(s)?;
    let stem = sanitize(&s.name);
    let mut files = vec![format!("{stem}.csv")];
    emit_csv(&tr, &dir.join(&files[0]))?;
    for ser in &tr.series {
        let f = format!("{stem}_{}.csv", ser.method.as_str());
        emit_method_csv(&tr, ser.method, &dir.join(&f))?;
        files.push(f);
    }
    let mut manifest = String::new();
    for (k, v) in &tr.metadata {
        let _ = writeln!(manifest, "{k}={v}");
    }
    let _ = writeln!(manifest, "wall_time_secs={:.3}", tr.wall_time_secs);
    for f in &files {
        let _ = writeln!(manifest, "file={f}");
    }
    write_atomic(&dir.join(format!("{stem}_manifest.txt")), manifest.as_bytes())?;
    for ser in &tr.series {
        let status = match (&ser.error, ser.breakdown) {
            (Some(e), _) => format!("failed: {e}"),
            (None, Some(t)) => format!("breakdown at t = {t}"),
            (None, None) => "ok".into(),
        };
        println!("{}: {} {}", s.name, ser.method.as_str(), status);
    }
    println!("{}: wrote {} files to {}", s.name, files.len() + 1, dir.display());
    Ok(())
}

fn split_setting(kv: &str) -> Result<(&str, &str)> {
    kv.split_once('=')
        .ok_or_else(|| Error::InvalidScenario(format!("expected KEY=VALUE, got '{kv}'")))
}

fn load_with(source: &Source, set: &[String]) -> Result<Scenario> {
    let mut s = load(source)?;
    for kv in set {
        let (k, v) = split_setting(kv)?;
        apply_setting(&mut s, k.trim(), v)?;
    }
    Ok(s)
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { source, set, out } => run_and_write(&load_with(&source, &set)?, &out.dir()),
        Command::ListPresets => {
            for name in preset_names() {
                let s = preset(name)?;
                let summary: Vec<String> = scenario_settings(&s)
                    .into_iter()
                    .filter(|(k, _)| !matches!(k.as_str(), "name" | "omega0" | "rel_tol" | "abs_tol" | "methods"))
                    .map(|(k, v)| format!("{k}={v}"))
                    .collect();
                println!("{name}\t{}", summary.join(" "));
            }
            Ok(())
        }
        Command::Sweep { source, param, values, set, out } => {
            let base = load_with(&source, &set)?;
            for v in &values {
                let mut s = base.clone();
                apply_setting(&mut s, &param, v)?;
                s.name = format!("{}_{}_{}", base.name, param, v.trim());
                run_and_write(&s, &out.dir())?;
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error kind={} message={:?}", e.kind(), e.to_string());
            ExitCode::FAILURE
        }
    }
}
