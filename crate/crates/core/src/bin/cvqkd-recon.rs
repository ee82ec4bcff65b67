//! Command-line front end. Exit codes: 0 success, 2 bad config or usage,
//! 3 runtime failure (including a session that did not deliver a key).

use std::net::{TcpListener, TcpStream};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cvqkd_recon::campaign::{run_campaign, CampaignKind, ExperimentConfig, RunOptions};
use cvqkd_recon::protocol::session::Outcome;
use cvqkd_recon::protocol::{run_party, Role};
use cvqkd_recon::Error;

#[derive(Parser)]
#[command(name = "cvqkd-recon", version, about = "Two-step CV-QKD reconciliation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment config (TOML). Defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for frame simulation.
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory, overriding `output_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Map a target AFR to a cutoff and BER_AF.
    Calibrate(Common),
    /// BER_AF against AFR, or against block length when the config says so.
    Sweep(Common),
    /// Efficiency ceilings against FER.
    Bounds(Common),
    /// Key rate against distance.
    Skr(Common),
    /// One reconciliation session, in process or over TCP.
    Session {
        #[command(flatten)]
        common: Common,
        /// Play one side over TCP instead of both in process.
        #[arg(long, value_enum, requires = "endpoint")]
        role: Option<CliRole>,
        #[arg(long, group = "endpoint")]
        listen: Option<String>,
        #[arg(long, group = "endpoint")]
        connect: Option<String>,
    },
    /// Check a config without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum CliRole {
    Alice,
    Bob,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Parameter { .. } | Error::Alist { .. } => 2,
        _ => 3,
    }
}

fn load(common: &Common, kind: CampaignKind) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None if kind == CampaignKind::Session => ExperimentConfig::from_toml("kind = \"session\"\n[session]\n")?,
        None => ExperimentConfig::from_toml(&format!("kind = \"{}\"", kind.name()))?,
    };
    let keep = kind == CampaignKind::SweepAfr && cfg.kind == CampaignKind::SweepBlocklength;
    if cfg.kind != kind && !keep {
        log::warn!("config kind {} run as {}", cfg.kind.name(), kind.name());
        cfg.kind = kind;
    }
    Ok(cfg)
}

fn options(common: &Common) -> RunOptions {
    RunOptions {
        seed: common.seed,
        output_dir: common.out.clone(),
        workers: common.workers,
    }
}

fn campaign(common: &Common, kind: CampaignKind) -> Result<u8, Error> {
    let cfg = load(common, kind)?;
    let outcome = run_campaign(&cfg, &options(common))?;
    for line in &outcome.summary {
        println!("{line}");
    }
    for w in &outcome.manifest.warnings {
        eprintln!("warning: {w}");
    }
    for o in &outcome.manifest.outputs {
        println!("wrote {} ({} rows)", outcome.output_dir.join(&o.file).display(), o.rows);
    }
    match outcome.session {
        Some(r) if !matches!(r.outcome, Outcome::Delivered) => Ok(3),
        _ => Ok(0),
    }
}

fn party(common: &Common, role: CliRole, listen: Option<&str>, connect: Option<&str>) -> Result<u8, Error> {
    let mut cfg = load(common, CampaignKind::Session)?;
    let report = cfg.validate();
    if !report.is_ok() {
        return Err(Error::Config(report.errors.join("; ")));
    }
    let mut sess = cfg.session.take().unwrap_or_default();
    if let Some(s) = common.seed {
        sess.seed = s;
    }
    let ctx = sess.prepare()?;
    let mut stream = match (listen, connect) {
        (Some(addr), _) => {
            let listener = TcpListener::bind(addr)?;
            log::info!("listening on {}", listener.local_addr()?);
            listener.accept()?.0
        }
        (_, Some(addr)) => TcpStream::connect(addr)?,
        _ => unreachable!("clap requires an endpoint"),
    };
    let role = match role {
        CliRole::Alice => Role::Alice,
        CliRole::Bob => Role::Bob,
    };
    let report = run_party(&mut stream, &ctx, role)?;
    println!("{}", serde_json::to_string_pretty(&report).map_err(|e| Error::Config(e.to_string()))?);
    Ok(if matches!(report.outcome, Outcome::Delivered) { 0 } else { 3 })
}

fn validate(path: &PathBuf) -> Result<u8, Error> {
    let report = ExperimentConfig::load(path)?.validate();
    for w in &report.warnings {
        println!("warning: {w}");
    }
    for e in &report.errors {
        println!("error: {e}");
    }
    if report.is_ok() {
        println!("ok");
        Ok(0)
    } else {
        Ok(2)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Calibrate(c) => campaign(c, CampaignKind::Calibrate),
        Command::Sweep(c) => campaign(c, CampaignKind::SweepAfr),
        Command::Bounds(c) => campaign(c, CampaignKind::Bounds),
        Command::Skr(c) => campaign(c, CampaignKind::SkrVsDistance),
        Command::Session {
            common,
            role: Some(role),
            listen,
            connect,
        } => party(common, *role, listen.as_deref(), connect.as_deref()),
        Command::Session { common, .. } => campaign(common, CampaignKind::Session),
        Command::Validate { config } => validate(config),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
