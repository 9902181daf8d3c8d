//! Command-line driver: build a KB from CSV files, serve it over HTTP, run
//! the plant simulation, and print OEE reports.
//!
//! Exit codes: 0 success, 1 domain error (bad data, failed run), 2 usage
//! error (bad flags, missing input files).

use std::fs;
use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::builder::{build_abox, parse_csv_bundle, read_bundle_dir};
use crate::kb::KnowledgeBase;
use crate::runtime::{
    compute_oee, expected_performance, get_resource_history, local_id, resolve_plan_instance, ExecStatus, SimTime,
};
use crate::sim::{oee_csv, run_scenario, ScenarioConfig};

#[derive(Debug, Parser)]
#[command(
    name = "ontomas",
    version,
    about = "Manufacturing knowledge base, API and plant simulation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a Turtle knowledge base from a directory of CSV files.
    Build {
        #[arg(long)]
        csv_dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Serve a knowledge base over HTTP.
    Serve {
        #[arg(long)]
        kb: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
    },
    /// Run a plant scenario; writes trace.jsonl, oee.csv and kb-final.ttl.
    Simulate {
        #[arg(long)]
        kb: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Print the OEE and execution history of one resource.
    Report {
        #[arg(long)]
        kb: PathBuf,
        #[arg(long)]
        resource: String,
        /// `start..end`, each either minutes or an ISO-8601 UTC timestamp.
        #[arg(long, value_parser = parse_window)]
        window: (SimTime, SimTime),
        #[arg(long, default_value = "P1")]
        plan: String,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Domain(_) => 1,
            CliError::Usage(_) => 2,
        }
    }
}

fn domain(e: impl std::fmt::Display) -> CliError {
    CliError::Domain(e.to_string())
}

pub fn parse_window(s: &str) -> Result<(SimTime, SimTime), String> {
    let (a, b) = s.split_once("..").ok_or("expected start..end")?;
    Ok((a.parse()?, b.parse()?))
}

fn read_input(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn write_output(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| domain(format!("cannot create {}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| domain(format!("cannot write {}: {e}", path.display())))
}

fn load_kb(path: &Path) -> Result<KnowledgeBase, CliError> {
    KnowledgeBase::load_turtle(&read_input(path)?).map_err(|e| domain(format!("{}: {e}", path.display())))
}

/// Runs one subcommand, writing human-readable output to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Build { csv_dir, out: target } => {
            if !csv_dir.is_dir() {
                return Err(CliError::Usage(format!("{} is not a directory", csv_dir.display())));
            }
            let files = read_bundle_dir(&csv_dir).map_err(domain)?;
            let pd = parse_csv_bundle(&files).map_err(domain)?;
            let mut kb = KnowledgeBase::new();
            let stats = build_abox(&mut kb, &pd).map_err(domain)?;
            write_output(&target, &kb.dump_turtle())?;
            writeln!(
                out,
                "built {}: {} resources, {} triples inserted",
                target.display(),
                pd.resources.len(),
                stats.inserted
            )
            .map_err(domain)
        }
        Command::Serve { kb, port, host } => {
            let kb = load_kb(&kb)?;
            let addr = SocketAddr::new(host, port);
            writeln!(out, "serving on http://{addr}").map_err(domain)?;
            out.flush().map_err(domain)?;
            let rt = tokio::runtime::Runtime::new().map_err(domain)?;
            rt.block_on(crate::api::serve(kb, addr)).map_err(domain)
        }
        Command::Simulate { kb, scenario, out_dir } => {
            let mut kb = load_kb(&kb)?;
            let cfg = ScenarioConfig::from_toml(&read_input(&scenario)?).map_err(domain)?;
            let trace = run_scenario(&mut kb, &cfg).map_err(domain)?;
            write_output(&out_dir.join("trace.jsonl"), &trace.to_jsonl())?;
            write_output(&out_dir.join("oee.csv"), &oee_csv(&trace.oee_series))?;
            write_output(&out_dir.join("kb-final.ttl"), &kb.dump_turtle())?;
            writeln!(
                out,
                "{} parts arrived, {} exited, {} policy ticks, max fleet energy {} kWh",
                trace.arrived,
                trace.exited,
                trace.ticks.len(),
                trace.max_fleet_energy()
            )
            .map_err(domain)?;
            for p in &trace.final_performances {
                writeln!(
                    out,
                    "{} {}: {} min, {} kWh",
                    p.machine,
                    p.plan,
                    p.expected.duration_min(),
                    p.expected.energy_kwh()
                )
                .map_err(domain)?;
            }
            Ok(())
        }
        Command::Report {
            kb,
            resource,
            window: (start, end),
            plan,
        } => {
            let kb = load_kb(&kb)?;
            let r = compute_oee(&kb, &resource, start, end).map_err(domain)?;
            let io = |e: std::io::Error| domain(e);
            writeln!(out, "resource {resource}  window {start} .. {end}").map_err(io)?;
            if let Ok(instance) = resolve_plan_instance(&kb, &resource, &plan) {
                let id = local_id(&instance);
                let e = expected_performance(&kb, &id).map_err(domain)?;
                writeln!(out, "expected {id}: {} min, {} kWh", e.duration_min(), e.energy_kwh()).map_err(io)?;
            }
            writeln!(
                out,
                "executions {}  busy {} min  uptime {}  efficiency {}  quality {}  OEE {}",
                r.executions,
                r.busy_minutes,
                r.uptime.round_dp(4),
                r.perf_efficiency.round_dp(4),
                r.quality_rate.round_dp(4),
                r.oee.round_dp(4)
            )
            .map_err(io)?;
            let rows = get_resource_history(&kb, &resource, ExecStatus::Successful).map_err(domain)?;
            writeln!(
                out,
                "{:<24} {:<21} {:<21} {:>10} {:>9} {:>7}",
                "execution", "realStart", "realEnd", "energyKwh", "emissions", "quality"
            )
            .map_err(io)?;
            for h in rows.iter().filter(|h| h.real_end > start && h.real_start < end) {
                writeln!(
                    out,
                    "{:<24} {:<21} {:<21} {:>10} {:>9} {:>7}",
                    h.execution_id,
                    h.real_start.to_string(),
                    h.real_end.to_string(),
                    h.energy_kwh,
                    h.emissions,
                    h.quality
                )
                .map_err(io)?;
            }
            Ok(())
        }
    }
}

/// Parses process arguments, runs, and maps the outcome to an exit code.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut stdout = std::io::stdout().lock();
    match run(cli, &mut stdout) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
