//! The `astrocity` command line.
//!
//! Exit codes: 0 success, 1 validation errors (or a refused upgrade), 2 usage
//! or I/O failure.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::crs::builtin_crs;
use crate::error::Error;
use crate::issue::{error_count, Issue};
use crate::model::{read_document, read_document_unchecked, upgrade_document, write_document};
use crate::recipe::{load_recipe, run_recipe};
use crate::registry::{builtin_registry, emit_extension_schema, registry_from_schema, ExtensionRegistry};
use crate::validator::validate;

pub const SEED_ENV: &str = "ASTROCITY_SEED";

#[derive(Parser)]
#[command(name = "astrocity", version, about = "3D city models for planetary surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extension schema operations.
    Extension {
        #[command(subcommand)]
        action: ExtensionAction,
    },
    /// Project planetocentric coordinates (or invert with --inverse).
    Project {
        #[arg(long)]
        crs: String,
        #[arg(long, allow_hyphen_values = true, required_unless_present = "inverse")]
        lat: Option<f64>,
        #[arg(long, allow_hyphen_values = true, required_unless_present = "inverse")]
        lon: Option<f64>,
        #[arg(long, requires_all = ["x", "y"])]
        inverse: bool,
        #[arg(long, allow_hyphen_values = true)]
        x: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        y: Option<f64>,
    },
    /// Build a dataset from a recipe, write it and validate it.
    Build {
        recipe: PathBuf,
        /// Seed for generated ids; falls back to ASTROCITY_SEED, then the recipe.
        #[arg(long)]
        seed: Option<u64>,
        /// Output path, overriding the recipe.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Validate a CityJSON file.
    Validate {
        file: PathBuf,
        /// Extension schema to validate against instead of the built-in one.
        #[arg(long)]
        extension: Option<PathBuf>,
        /// Treat undeclared attributes as errors.
        #[arg(long)]
        strict: bool,
        #[arg(long, value_enum, default_value_t = Report::Text)]
        report: Report,
    },
    /// Upgrade a CityJSON 1.0 file to 2.0.
    Upgrade {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Summarize a CityJSON file.
    Info { file: PathBuf },
}

#[derive(Subcommand)]
enum ExtensionAction {
    /// Write the extension schema file.
    Emit {
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Report {
    Text,
    Json,
}

/// Failure with the exit code to report.
struct Fail(i32, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(2, e.to_string())
    }
}

type Outcome = Result<i32, Fail>;

pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout(), &mut std::io::stderr())
}

pub fn run_with<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(Fail(code, msg)) => {
            let _ = writeln!(err, "astrocity: {msg}");
            code
        }
    }
}

fn read(path: &Path) -> Result<String, Fail> {
    fs::read_to_string(path).map_err(|e| Fail(2, format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), Fail> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Fail(2, format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| Fail(2, format!("{}: {e}", path.display())))
}

fn io_fail(e: std::io::Error) -> Fail {
    Fail(2, e.to_string())
}

fn env_seed() -> Result<Option<u64>, Fail> {
    match std::env::var(SEED_ENV) {
        Err(_) => Ok(None),
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Fail(2, format!("{SEED_ENV} must be an unsigned integer, got `{s}`"))),
    }
}

fn report(issues: &[Issue], kind: Report, out: &mut dyn Write) -> Result<(), Fail> {
    match kind {
        Report::Json => {
            let text = serde_json::to_string_pretty(issues).map_err(|e| Fail(2, e.to_string()))?;
            writeln!(out, "{text}").map_err(io_fail)
        }
        Report::Text => {
            for i in issues {
                writeln!(out, "{i}").map_err(io_fail)?;
            }
            let errors = error_count(issues);
            writeln!(out, "{errors} error(s), {} warning(s)", issues.len() - errors).map_err(io_fail)
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Outcome {
    match command {
        Command::Extension {
            action: ExtensionAction::Emit { output },
        } => {
            let text = emit_extension_schema(&builtin_registry())?;
            match output {
                Some(p) => write_file(&p, &text)?,
                None => write!(out, "{text}").map_err(io_fail)?,
            }
            Ok(0)
        }
        Command::Project { crs, lat, lon, inverse, x, y } => {
            let spec = builtin_crs(&crs)?;
            if inverse {
                let (lat, lon) = spec.inverse(x.unwrap_or_default(), y.unwrap_or_default())?;
                writeln!(out, "lat={lat:.8} lon={lon:.8}").map_err(io_fail)?;
            } else {
                let (x, y) = spec.forward(lat.unwrap_or_default(), lon.unwrap_or_default())?;
                writeln!(out, "x={x:.4} y={y:.4}").map_err(io_fail)?;
            }
            Ok(0)
        }
        Command::Build { recipe, seed, output } => {
            let seed = match seed {
                Some(s) => Some(s),
                None => env_seed()?,
            };
            let (file, base) = load_recipe(&recipe)?;
            let registry = builtin_registry();
            let doc = run_recipe(&file, &base, &registry, seed)?;
            let target = output.unwrap_or_else(|| base.join(&file.output));
            write_file(&target, &write_document(&doc)?)?;
            let issues = validate(&doc, Some(&registry), false);
            let errors = error_count(&issues);
            writeln!(out, "wrote {} ({} objects)", target.display(), doc.objects.len()).map_err(io_fail)?;
            if errors > 0 {
                report(&issues, Report::Text, out)?;
                return Ok(1);
            }
            Ok(0)
        }
        Command::Validate { file, extension, strict, report: kind } => {
            let doc = read_document_unchecked(&read(&file)?)?;
            let registry: ExtensionRegistry = match extension {
                Some(p) => registry_from_schema(&read(&p)?)?,
                None => builtin_registry(),
            };
            let issues = validate(&doc, Some(&registry), strict);
            report(&issues, kind, out)?;
            Ok(if error_count(&issues) > 0 { 1 } else { 0 })
        }
        Command::Upgrade { input, output } => {
            let doc = read_document(&read(&input)?)?;
            let upgraded = match upgrade_document(doc) {
                Ok(d) => d,
                Err(e @ Error::AlreadyCurrent(_)) => return Err(Fail(1, e.to_string())),
                Err(e) => return Err(e.into()),
            };
            let text = write_document(&upgraded)?;
            match output {
                Some(p) => write_file(&p, &text)?,
                None => write!(out, "{text}").map_err(io_fail)?,
            }
            Ok(0)
        }
        Command::Info { file } => {
            let doc = read_document(&read(&file)?)?;
            let mut lines = vec![
                format!("version: {}", doc.version),
                format!("referenceSystem: {}", doc.reference_system),
            ];
            for (name, e) in &doc.extensions {
                lines.push(format!("extension: {name} {} ({})", e.version, e.url));
            }
            lines.push(format!("vertices: {}", doc.vertices.len()));
            lines.push(format!("objects: {}", doc.objects.len()));
            for (ty, n) in doc.type_counts() {
                lines.push(format!("  {ty}: {n}"));
            }
            writeln!(out, "{}", lines.join("\n")).map_err(io_fail)?;
            Ok(0)
        }
    }
}
