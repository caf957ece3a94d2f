//! `ppac`: run workloads, the differential harness, and the performance
//! model. Every command talks to the service; without `--server` an
//! in-process instance is started on a loopback port.
//!
//! Errors print one line, `error[CODE]: message`, and exit with status 2 for
//! usage errors and 1 otherwise.

mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use ppac_client::{Client, ClientError};
use ppac_core::difftest::DifftestConfig;
use ppac_core::perf::PerfParams;
use ppac_core::workload::PerfRequest;
use ppac_core::{ArrayGeometry, Fault};

use config::WorkloadConfig;

#[derive(Debug)]
pub struct CliError {
    code: String,
    message: String,
}

impl CliError {
    pub fn new(code: impl Into<String>, message: impl Into<String>) -> Self {
        CliError {
            code: code.into(),
            message: message.into(),
        }
    }
}

impl From<ClientError> for CliError {
    fn from(e: ClientError) -> Self {
        CliError::new(e.code(), e.to_string())
    }
}

impl From<ppac_core::Error> for CliError {
    fn from(e: ppac_core::Error) -> Self {
        CliError::new(e.code(), e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "ppac",
    version,
    about = "Associative-array MVP accelerator simulator"
)]
struct Cli {
    /// Service base URL; an embedded server is used when absent.
    #[arg(long, global = true)]
    server: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a workload and write its JSON report.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Include raw row outputs and bank counts.
        #[arg(long, short)]
        verbose: bool,
        /// Report file; stdout when absent.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Compare simulated MVPs with the integer oracle on random instances.
    Difftest {
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        /// Defaults to the config seed, else 0.
        #[arg(long)]
        seed: Option<u64>,
        /// Take the seed and array bounds from a workload config.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 64)]
        max_words: usize,
        #[arg(long, default_value_t = 256)]
        max_bits: usize,
        #[arg(long, default_value_t = 4)]
        max_width: u32,
        /// Inject a defect to check that the harness catches it.
        #[arg(long, value_parser = parse_fault)]
        fault: Option<Fault>,
        /// Print the full summary as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Throughput and energy figures for an array size.
    Perf {
        #[command(flatten)]
        geometry: GeometryArgs,
        /// Parameter file; bundled defaults when absent.
        #[arg(long)]
        params: Option<PathBuf>,
    },
}

#[derive(Args)]
struct GeometryArgs {
    #[arg(long, default_value_t = 256)]
    words: usize,
    #[arg(long, default_value_t = 256)]
    bits: usize,
    #[arg(long, default_value_t = 16)]
    banks: usize,
    #[arg(long, default_value_t = 16)]
    subrows: usize,
}

fn parse_fault(s: &str) -> Result<Fault, String> {
    match s {
        "threshold-off-by-one" => Ok(Fault::ThresholdOffByOne),
        "drop-msb-negation" => Ok(Fault::DropMsbNegation),
        _ => Err("expected threshold-off-by-one or drop-msb-negation".into()),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn emit(text: &str, output: Option<&PathBuf>) -> Result<(), CliError> {
    match output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::new("E_IO", format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

async fn connect(server: Option<String>) -> Result<Client, CliError> {
    if let Some(url) = server {
        return Ok(Client::new(url));
    }
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0")
        .await
        .map_err(|e| CliError::new("E_IO", format!("cannot start embedded server: {e}")))?;
    let addr = listener
        .local_addr()
        .map_err(|e| CliError::new("E_IO", e.to_string()))?;
    tokio::spawn(ppac_server::serve(listener));
    Ok(Client::new(format!("http://{addr}")))
}

async fn execute(cli: Cli) -> Result<(), CliError> {
    let client = connect(cli.server).await?;
    match cli.command {
        Command::Run {
            config,
            verbose,
            output,
        } => {
            let request = WorkloadConfig::load(&config)?.to_request(verbose)?;
            let report = client.run(&request).await?;
            emit(&to_json(&report), output.as_ref())
        }
        Command::Difftest {
            trials,
            seed,
            config,
            max_words,
            max_bits,
            max_width,
            fault,
            json,
        } => {
            let mut dt = DifftestConfig {
                trials,
                seed: seed.unwrap_or(0),
                max_words,
                max_bits,
                max_width,
                fault,
            };
            if let Some(path) = config {
                let c = WorkloadConfig::load(&path)?;
                dt.seed = seed.unwrap_or(c.seed);
                dt.max_words = c.geometry.words;
                dt.max_bits = c.geometry.bits;
            }
            dt.validate()?;
            let summary = client.difftest(&dt).await?;
            if json {
                print!("{}", to_json(&summary));
            } else {
                println!("{}", summary.headline());
                if let Some(cx) = &summary.counterexample {
                    println!("counterexample (minimized):");
                    print!("{}", to_json(cx));
                }
            }
            if summary.all_passed() {
                Ok(())
            } else {
                Err(CliError::new(
                    "E_MISMATCH",
                    format!(
                        "{} of {} trials disagree with the oracle",
                        summary.trials - summary.passed,
                        summary.trials
                    ),
                ))
            }
        }
        Command::Perf { geometry, params } => {
            let geometry = ArrayGeometry::new(
                geometry.words,
                geometry.bits,
                geometry.banks,
                geometry.subrows,
            )?;
            let params = params
                .map(|p| {
                    PerfParams::load(&p)
                        .map_err(|e| CliError::new(e.code(), format!("{}: {e}", p.display())))
                })
                .transpose()?;
            let report = client
                .perf(&PerfRequest {
                    geometry,
                    modes: None,
                    params,
                })
                .await?;
            emit(&to_json(&report), None)
        }
    }
}

fn fail(code: &str, message: &str, status: u8) -> ExitCode {
    let line = message.lines().next().unwrap_or("").trim();
    eprintln!("error[{code}]: {line}");
    ExitCode::from(status)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let message = text.trim_start_matches("error: ");
            return fail("E_USAGE", message, 2);
        }
    };
    let runtime = match tokio::runtime::Runtime::new() {
        Ok(r) => r,
        Err(e) => return fail("E_IO", &e.to_string(), 1),
    };
    match runtime.block_on(execute(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let status = if e.code == "E_USAGE" { 2 } else { 1 };
            fail(&e.code, &e.message, status)
        }
    }
}
