use std::io::IsTerminal;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use familiar_cli::commands::load_config;
use familiar_cli::{run_script, serve, serve_stdio, validate_file, CliError, ServeOptions};
use familiar_core::config::DEFAULT_CONFIG;
use familiar_core::SessionOptions;
use tracing_subscriber::EnvFilter;

#[derive(Parser)]
#[command(name = "familiar", version, about = "Behavior-guidance session server and tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Toggle {
    On,
    Off,
}

impl From<Toggle> for bool {
    fn from(t: Toggle) -> bool {
        matches!(t, Toggle::On)
    }
}

#[derive(clap::Args)]
struct Conditions {
    /// Stream sensor, precondition and behavior status events to clients.
    #[arg(long, value_enum, default_value = "on")]
    dynamic_viz: Toggle,
    /// Accept define_behavior messages.
    #[arg(long, value_enum, default_value = "on")]
    visual_programming: Toggle,
}

impl Conditions {
    fn options(&self) -> SessionOptions {
        SessionOptions { dynamic_viz: self.dynamic_viz.into(), visual_programming: self.visual_programming.into() }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Serve sessions over WebSocket at /ws, or one session over stdio.
    Serve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, required_unless_present = "stdio")]
        port: Option<u16>,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        max_sessions: u32,
        /// Speak NDJSON on stdin/stdout instead of opening a socket.
        #[arg(long, conflicts_with = "port")]
        stdio: bool,
        /// Directory (socket mode) or file (stdio mode) for session logs.
        #[arg(long)]
        log: Option<PathBuf>,
        #[command(flatten)]
        conditions: Conditions,
    },
    /// Replay a timed NDJSON script headlessly and write the metrics.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        script: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also export the session log as NDJSON.
        #[arg(long)]
        log: Option<PathBuf>,
        #[command(flatten)]
        conditions: Conditions,
    },
    /// Check a config document. Errors go to stderr as a JSON array.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print the built-in apartment scenario config.
    DefaultConfig,
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(std::io::stderr)
        .with_ansi(std::io::stderr().is_terminal())
        .init();
    match execute(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::FAILURE
        }
    }
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Serve { config, port, host, max_sessions, stdio, log, conditions } => {
            let config = load_config(&config)?;
            let runtime = tokio::runtime::Runtime::new().map_err(CliError::Server)?;
            if stdio {
                return runtime.block_on(serve_stdio(config, conditions.options(), log)).map_err(CliError::Server);
            }
            if let Some(dir) = &log {
                std::fs::create_dir_all(dir).map_err(|source| CliError::Write { path: dir.clone(), source })?;
            }
            let options =
                ServeOptions { config, options: conditions.options(), max_sessions: max_sessions as usize, log_dir: log };
            let port = port.expect("clap requires --port without --stdio");
            runtime
                .block_on(async {
                    let listener = tokio::net::TcpListener::bind((host.as_str(), port)).await?;
                    tracing::info!("listening on ws://{}/ws", listener.local_addr()?);
                    tokio::select! {
                        r = serve(listener, options) => r,
                        _ = tokio::signal::ctrl_c() => Ok(()),
                    }
                })
                .map_err(CliError::Server)
        }
        Command::Run { config, script, out, log, conditions } => {
            let result = run_script(&config, &script, &out, log.as_deref(), conditions.options())?;
            let m = &result.metrics;
            tracing::info!(
                success = m.success,
                regions_taught = m.regions_taught,
                wrong_commands = m.wrong_commands,
                out_of_sight_events = m.out_of_sight_events,
                duration_s = m.duration_s,
                "replay finished"
            );
            Ok(())
        }
        Command::Validate { config } => {
            validate_file(&config)?;
            println!("{}: valid", config.display());
            Ok(())
        }
        Command::DefaultConfig => {
            print!("{DEFAULT_CONFIG}");
            Ok(())
        }
    }
}
