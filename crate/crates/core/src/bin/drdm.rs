//! Command-line front end: serve the HTTP API, chat in the terminal, filter
//! content packs, validate flows and run scripted conversations.

use std::io::{self, BufRead, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use drdm_core::config::{EngineConfig, ENV_CONFIG, ENV_PORT};
use drdm_core::engine::{parse_script, run_script, Engine};
use drdm_core::flow::{load_flow_dir, FunctionRegistry};
use drdm_core::retrieval::{ingest_file, FilterConfig};
use tracing_subscriber::EnvFilter;

#[derive(Parser)]
#[command(name = "drdm", version, about = "Open-domain dialogue engine")]
struct Cli {
    /// Engine config file (TOML).
    #[arg(long, global = true, env = ENV_CONFIG)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Serve the HTTP API.
    Serve {
        #[arg(long, env = ENV_PORT, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
    /// Chat in the terminal. An empty line or end of input quits.
    Chat {
        #[arg(long)]
        seed: Option<u64>,
        /// Print the ranked pool after every reply.
        #[arg(long)]
        debug: bool,
    },
    /// Run a content pack through the ingestion filters and report
    /// rejections.
    Ingest {
        pack: PathBuf,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Validate every flow file in the given directories (default: the
    /// configured flow directories).
    ValidateFlows { dirs: Vec<PathBuf> },
    /// Run conversation scripts and print their transcripts.
    Simulate {
        scripts: Vec<PathBuf>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Print the per-turn debug output as JSON lines instead.
        #[arg(long)]
        debug: bool,
    },
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("warn")))
        .with_writer(io::stderr)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

fn engine(config: &EngineConfig) -> Result<Engine, String> {
    Engine::from_config(config.clone()).map_err(|e| e.to_string())
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    let config = EngineConfig::from_env(cli.config.as_deref()).map_err(|e| e.to_string())?;
    match cli.command {
        Command::Serve { port, host } => {
            let addr: SocketAddr = format!("{host}:{port}").parse().map_err(|e| format!("bad address: {e}"))?;
            let engine = Arc::new(engine(&config)?);
            let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
            rt.block_on(drdm_core::http::serve(engine, addr)).map_err(|e| e.to_string())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Chat { seed, debug } => chat(&engine(&config)?, seed, debug),
        Command::Ingest { pack, json } => ingest(&config, &pack, json),
        Command::ValidateFlows { dirs } => {
            let dirs = if dirs.is_empty() { config.flow_dirs() } else { dirs };
            validate_flows(&dirs)
        }
        Command::Simulate { scripts, seed, debug } => simulate(&engine(&config)?, &scripts, seed, debug),
    }
}

fn chat(engine: &Engine, seed: Option<u64>, debug: bool) -> Result<ExitCode, String> {
    let session = engine.create_session(seed).map_err(|e| e.to_string())?;
    eprintln!("session {} (seed {})", session.session_id, session.seed);
    let stdin = io::stdin();
    let mut out = io::stdout();
    loop {
        print!("> ");
        out.flush().map_err(|e| e.to_string())?;
        let mut line = String::new();
        if stdin.lock().read_line(&mut line).map_err(|e| e.to_string())? == 0 || line.trim().is_empty() {
            break;
        }
        match engine.say(&session.session_id, line.trim()) {
            Ok(r) => {
                println!("{}", r.reply.display_text);
                if debug {
                    for (i, c) in r.debug.pool.iter().enumerate() {
                        let mark = if i == r.debug.winner { '*' } else { ' ' };
                        println!("  {mark} {:.3} [{}] {}", c.final_confidence, c.source, c.text);
                    }
                }
                if r.ended {
                    break;
                }
            }
            Err(e) => eprintln!("error: {e}"),
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn ingest(config: &EngineConfig, pack: &Path, json: bool) -> Result<ExitCode, String> {
    let filters =
        FilterConfig::load(&config.data_path("nlu"), &config.data_path("ingest")).map_err(|e| e.to_string())?;
    let report = ingest_file(pack, &filters).map_err(|e| e.to_string())?;
    if json {
        let value = serde_json::json!({
            "accepted": report.accepted.iter().map(|i| &i.id).collect::<Vec<_>>(),
            "rejections": report.rejections,
        });
        println!("{}", serde_json::to_string_pretty(&value).map_err(|e| e.to_string())?);
    } else {
        for item in &report.accepted {
            println!("accept {}", item.id);
        }
        for r in &report.rejections {
            println!("reject {} {}", r.id, r.rule.as_str());
        }
        println!("{} accepted, {} rejected", report.accepted.len(), report.rejections.len());
    }
    Ok(ExitCode::SUCCESS)
}

fn validate_flows(dirs: &[PathBuf]) -> Result<ExitCode, String> {
    let registry = FunctionRegistry::standard();
    let (mut ok, mut bad) = (0usize, 0usize);
    for dir in dirs {
        for (path, result) in load_flow_dir(dir, &registry).map_err(|e| e.to_string())? {
            match result {
                Ok(flow) => {
                    ok += 1;
                    println!("ok {} ({})", path.display(), flow.id);
                }
                Err(e) => {
                    bad += 1;
                    let rule = e.rule().map(|r| r.as_str()).unwrap_or("error");
                    println!("FAIL {} [{rule}] {e}", path.display());
                }
            }
        }
    }
    println!("{ok} valid, {bad} invalid");
    Ok(if bad == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn simulate(engine: &Engine, scripts: &[PathBuf], seed: u64, debug: bool) -> Result<ExitCode, String> {
    let mut failed = false;
    for path in scripts {
        let body = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let script = parse_script(&name, &body).map_err(|e| e.to_string())?;
        let transcript = run_script(engine, &script, seed).map_err(|e| e.to_string())?;
        if debug {
            println!("{}", serde_json::to_string(&transcript).map_err(|e| e.to_string())?);
        } else {
            print!("{}", transcript.render());
        }
        for f in &transcript.failures {
            eprintln!("{name}: {f}");
            failed = true;
        }
    }
    Ok(if failed { ExitCode::FAILURE } else { ExitCode::SUCCESS })
}
