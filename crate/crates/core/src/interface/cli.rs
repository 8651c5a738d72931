use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::compiler::{compile, export_bn};
use crate::error::Error;
use crate::inference::{DEFAULT_SAMPLES, LOW_ESS};
use crate::kgmodel::{parse_kb, Diagnostic};
use crate::observations::{export_observations, parse_observations};
use crate::service::{self, InferOptions};

use super::http::{self, ServiceConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "signalkg", version, about = "Infer the causes of sensor observations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a knowledge base and print its diagnostics.
    Validate { kb: PathBuf },
    /// Compile a knowledge base to network JSON.
    Compile {
        kb: PathBuf,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Posterior of every node given an evidence file.
    Infer {
        kb: PathBuf,
        /// Evidence JSON or observation JSON-LD.
        #[arg(long)]
        evidence: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Enumerate the joint instead of sampling.
        #[arg(long)]
        exact: bool,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Sample a scenario and write the resulting observations as JSON-LD.
    Simulate {
        kb: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Clamp a node, e.g. `entity(attacker)=true`. Repeatable.
        #[arg(long = "force", value_name = "NODE=BOOL")]
        force: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, env = "SIGNALKG_KB")]
        kb: PathBuf,
        #[arg(long, default_value_t = 8080, value_parser = clap::value_parser!(u16).range(1..))]
        port: u16,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        /// Allow cross-origin requests.
        #[arg(long)]
        cors: bool,
    },
}

/// A failure with the exit code it maps to.
struct Failure {
    exit: i32,
    code: String,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let exit = match e {
            Error::Syntax { .. } | Error::InvalidKb(_) => EXIT_INVALID,
            _ => EXIT_RUNTIME,
        };
        Failure {
            exit,
            code: e.code().to_string(),
            message: e.to_string(),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        exit: EXIT_RUNTIME,
        code: "io".into(),
        message: format!("{}: {e}", path.display()),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| io_failure(path, e))
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| io_failure(path, e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| io_failure(Path::new("<stdout>"), e)),
    }
}

fn print_diagnostics(diagnostics: &[Diagnostic]) {
    for d in diagnostics {
        eprintln!("{d}");
    }
}

/// Loads a knowledge base, reporting diagnostics on stderr.
fn load(path: &Path) -> Result<crate::kgmodel::KnowledgeBase, Failure> {
    let text = read(path)?;
    let parsed = parse_kb(&text)?;
    print_diagnostics(&parsed.diagnostics);
    Ok(parsed.into_valid()?)
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Validate { kb } => {
            load(&kb)?;
        }
        Command::Compile { kb, out } => {
            let bn = compile(&load(&kb)?)?;
            write_output(out.as_deref(), &export_bn(&bn))?;
        }
        Command::Infer {
            kb,
            evidence,
            samples,
            seed,
            exact,
            workers,
            json,
        } => {
            let kb = load(&kb)?;
            let records = parse_observations(&read(&evidence)?)?;
            let options = InferOptions {
                samples: Some(samples),
                seed: Some(seed),
                exact,
                workers: Some(workers),
            };
            let posterior = service::infer(&kb, &records, &options)?;
            if posterior.low_ess() {
                eprintln!(
                    "WARNING low-ess: effective sample size {:.1} is below {LOW_ESS}",
                    posterior.effective_sample_size
                );
            }
            let text = if json {
                let mut s = serde_json::to_string_pretty(&service::posterior_json(&posterior))
                    .unwrap_or_default();
                s.push('\n');
                s
            } else {
                service::posterior_table(&posterior)
            };
            write_output(None, &text)?;
        }
        Command::Simulate { kb, seed, force, out } => {
            let bn = compile(&load(&kb)?)?;
            let forced = service::parse_forced(&force)?;
            let (_, records) = service::run_simulation(&bn, &forced, seed)?;
            let mut text = export_observations(&records);
            text.push('\n');
            write_output(out.as_deref(), &text)?;
        }
        Command::Serve { kb, port, samples, cors } => {
            let config = ServiceConfig {
                port,
                kb_path: kb,
                default_samples: samples,
                cors_allowed: cors,
            };
            let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure {
                exit: EXIT_RUNTIME,
                code: "io".into(),
                message: e.to_string(),
            })?;
            runtime.block_on(http::serve(config))?;
        }
    }
    Ok(())
}

/// Runs the command line and returns the process exit code.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(cli.command) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("ERROR {}: {}", f.code, f.message);
            f.exit
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(cli_main(["signalkg"]), EXIT_USAGE);
        assert_eq!(cli_main(["signalkg", "frobnicate"]), EXIT_USAGE);
        assert_eq!(cli_main(["signalkg", "serve", "--kb", "x.ttl", "--port", "0"]), EXIT_USAGE);
        assert_eq!(cli_main(["signalkg", "--help"]), EXIT_OK);
    }

    #[test]
    fn missing_file_is_a_runtime_failure() {
        assert_eq!(cli_main(["signalkg", "validate", "/nonexistent/kb.ttl"]), EXIT_RUNTIME);
    }
}
