use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use qdarwin::experiment::{self, ExperimentConfig, RunError, RunManifest, RunOutput};

/// Directory used for outputs when neither `--out` nor `output_path` is given.
const OUT_DIR_VAR: &str = "QDARWIN_OUT_DIR";

const EXIT_IO: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_GUARD: u8 = 3;

/// Seeded decoherence and redundancy experiments emitting CSV or JSON.
///
/// Experiments: pip, haar-pip, redundancy, ridge, sieve, envariance, qbm.
/// `qdarwin replay <manifest>` re-runs a previous run from its manifest.
#[derive(Debug, Parser)]
#[command(name = "qdarwin", version)]
struct Cli {
    /// Experiment name, or `replay`.
    experiment: String,

    /// Manifest to replay (only with `replay`).
    manifest: Option<PathBuf>,

    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,

    #[arg(long)]
    seed: Option<String>,

    #[arg(long = "n-env")]
    n_env: Option<String>,

    #[arg(long)]
    action: Option<String>,

    #[arg(long)]
    delta: Option<String>,

    /// Output file; the manifest goes next to it as `<out>.manifest.json`.
    #[arg(long)]
    out: Option<PathBuf>,

    /// `csv` or `json`.
    #[arg(long)]
    format: Option<String>,

    /// Extra `key=value` overrides, applied after the named flags.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Debug)]
enum Failure {
    Config(Vec<String>),
    Guard(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => EXIT_CONFIG,
            Failure::Guard(_) => EXIT_GUARD,
            Failure::Io(_) => EXIT_IO,
        }
    }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        match e {
            RunError::Config(diags) => Failure::Config(diags.iter().map(ToString::to_string).collect()),
            RunError::Compute(e) if e.is_guard() => Failure::Guard(e.to_string()),
            RunError::Compute(e) => Failure::Config(vec![e.to_string()]),
        }
    }
}

fn io_err(what: &str, path: &Path, e: std::io::Error) -> Failure {
    Failure::Io(format!("{what} {}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = if cli.experiment == "replay" { replay(&cli) } else { run(&cli) };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Config(lines) => {
                    eprintln!("error: invalid configuration");
                    for l in lines {
                        eprintln!("  {l}");
                    }
                }
                Failure::Guard(msg) => eprintln!("error: numerical guard: {msg}"),
                Failure::Io(msg) => eprintln!("error: {msg}"),
            }
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    if cli.manifest.is_some() {
        return Err(Failure::Config(vec!["a manifest argument is only accepted by `replay`".into()]));
    }
    let mut pairs = Vec::new();
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path).map_err(|e| io_err("cannot read config", path, e))?;
        pairs = experiment::parse_pairs(&text)
            .map_err(|d| Failure::Config(d.iter().map(|d| format!("{}: {d}", path.display())).collect()))?;
    }
    pairs.push(("experiment".into(), cli.experiment.clone()));
    for (key, value) in [
        ("seed", &cli.seed),
        ("n_env", &cli.n_env),
        ("action", &cli.action),
        ("delta", &cli.delta),
        ("output_format", &cli.format),
    ] {
        if let Some(v) = value {
            pairs.push((key.into(), v.clone()));
        }
    }
    for kv in &cli.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Failure::Config(vec![format!("--set expects KEY=VALUE, got `{kv}`")]))?;
        pairs.push((k.trim().into(), v.trim().into()));
    }
    let mut config = ExperimentConfig::from_pairs(pairs).map_err(|d| RunError::Config(d))?;
    let diags = config.validate();
    if !diags.is_empty() {
        return Err(RunError::Config(diags).into());
    }
    let path = resolve_output(cli.out.as_deref(), &config);
    config.output_path = Some(path.display().to_string());
    let output = experiment::run(&config)?;
    emit(&path, &output)
}

fn replay(cli: &Cli) -> Result<(), Failure> {
    let Some(manifest_path) = &cli.manifest else {
        return Err(Failure::Config(vec!["usage: qdarwin replay <manifest> [--out PATH]".into()]));
    };
    let text = fs::read_to_string(manifest_path).map_err(|e| io_err("cannot read manifest", manifest_path, e))?;
    let mut manifest: RunManifest = serde_json::from_str(&text)
        .map_err(|e| Failure::Config(vec![format!("{}: not a run manifest: {e}", manifest_path.display())]))?;
    if let Some(out) = &cli.out {
        manifest.config.insert("output_path".into(), out.display().to_string());
    }
    let config = ExperimentConfig::from_pairs(&manifest.config).map_err(RunError::Config)?;
    let path = resolve_output(None, &config);
    let output = experiment::run(&config)?;
    emit(&path, &output)
}

/// `--out`, then the config's `output_path`, then `$QDARWIN_OUT_DIR/<experiment>.<ext>`,
/// then the working directory.
fn resolve_output(out: Option<&Path>, config: &ExperimentConfig) -> PathBuf {
    if let Some(p) = out {
        return p.to_path_buf();
    }
    if let Some(p) = &config.output_path {
        return PathBuf::from(p);
    }
    let name = format!("{}.{}", config.experiment, config.output_format.extension());
    match std::env::var_os(OUT_DIR_VAR) {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir).join(name),
        _ => PathBuf::from(name),
    }
}

fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    output.with_file_name(name)
}

/// Write through a sibling temp file and rename, so a failed run leaves
/// neither a partial output nor a stale manifest.
fn emit(path: &Path, output: &RunOutput) -> Result<(), Failure> {
    let manifest = manifest_path(path);
    let mut json = serde_json::to_vec_pretty(&output.manifest).map_err(|e| Failure::Io(e.to_string()))?;
    json.push(b'\n');
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_err("cannot create", dir, e))?;
    }
    write_atomic(path, &output.bytes)?;
    if let Err(e) = write_atomic(&manifest, &json) {
        let _ = fs::remove_file(path);
        return Err(e);
    }
    eprintln!(
        "wrote {} ({} rows) and {} in {:.2}s",
        path.display(),
        output.table.rows.len(),
        manifest.display(),
        output.manifest.wall_clock_seconds
    );
    Ok(())
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let mut tmp_name = path.file_name().unwrap_or_default().to_os_string();
    tmp_name.push(format!(".partial-{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    result.map_err(|e| {
        let _ = fs::remove_file(&tmp);
        io_err("cannot write", path, e)
    })
}
