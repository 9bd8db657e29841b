//! The `chanocc` command line.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::core::tracekit::{self, NetworkMembership, StaircaseParams, DEFAULT_WINDOW_MS};
use crate::preset::{self, Direction, PresetName, Variant};
use crate::report::{self, Table};
use crate::{io, plot, run, Error, Result};

#[derive(Parser)]
#[command(name = "chanocc", version, about = "Channel occupancy traces and trace-driven 802.11a simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Busy-trace tools.
    #[command(subcommand)]
    Trace(TraceCommand),
    /// Simulation runs.
    #[command(subcommand)]
    Sim(SimCommand),
    /// Reports over run outputs.
    #[command(subcommand)]
    Report(ReportCommand),
}

#[derive(Subcommand)]
enum TraceCommand {
    /// Derive a node's busy trace from a survey log.
    Derive {
        #[arg(long)]
        survey: PathBuf,
        #[arg(long)]
        node: u32,
        /// Comma-separated ids of the nodes in the measured network.
        #[arg(long, value_delimiter = ',', required = true)]
        members: Vec<u32>,
        #[arg(long, default_value_t = DEFAULT_WINDOW_MS)]
        window_ms: u32,
        /// Output file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Synthesize a staircase busy trace.
    Synth(SynthArgs),
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 0.0)]
    start: f64,
    #[arg(long, default_value_t = 0.1)]
    step: f64,
    /// Windows per level.
    #[arg(long, default_value_t = 5)]
    plateau: u32,
    #[arg(long, default_value_t = 0.5)]
    max: f64,
    /// Append a zero plateau.
    #[arg(long)]
    reset: bool,
    /// Index of the first window.
    #[arg(long, default_value_t = 0)]
    offset: u64,
    #[arg(long, default_value_t = DEFAULT_WINDOW_MS)]
    window_ms: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum SimCommand {
    /// Run a scenario file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run a canned experiment.
    Preset {
        /// synthetic-staircase or controlled-interference.
        name: String,
        /// receiver-only, sender-only, both, baseline or all.
        #[arg(long, default_value = "all")]
        variant: String,
        /// a-b, b-a or bidir.
        #[arg(long, default_value = "a-b")]
        flow: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Defaults to `out/<name>/<flow>`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ReportCommand {
    /// Mean-throughput and relative-error table.
    ///
    /// Without --from, recomputes the testbed fixture table and flags
    /// cells that disagree with their stated values.
    Table1 {
        #[arg(long)]
        out: PathBuf,
        /// Root holding controlled-interference runs for a-b, b-a and bidir.
        #[arg(long)]
        from: Option<PathBuf>,
        #[arg(long, default_value = "sender-only")]
        candidate: String,
    },
    /// Long-format `variant,interval,mbps` CSV of every run under a directory.
    Plotdata {
        #[arg(long)]
        dir: PathBuf,
        /// Defaults to `<dir>/plotdata.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => io::write_text(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Trace(TraceCommand::Derive { survey, node, members, window_ms, out }) => {
            let samples = io::read_survey_file(&survey, window_ms)?;
            let members = NetworkMembership::new(members)?;
            let trace = tracekit::derive_busy_trace(&samples, node, &members, window_ms)?;
            emit(out.as_deref(), &io::busy_trace_csv(&trace))
        }
        Command::Trace(TraceCommand::Synth(a)) => {
            let trace = tracekit::synth_staircase(&StaircaseParams {
                start: a.start,
                step: a.step,
                plateau: a.plateau,
                max: a.max,
                reset: a.reset,
                offset: a.offset,
                node_id: 0,
                window_ms: a.window_ms,
            })?;
            emit(a.out.as_deref(), &io::busy_trace_csv(&trace))
        }
        Command::Sim(SimCommand::Run { config, seed, out }) => {
            let output = run::run_config_file(&config, seed, &out)?;
            for s in &output.series {
                println!("flow {}: {:.3} Mbit/s", s.flow, s.mean().unwrap_or(0.0));
            }
            Ok(())
        }
        Command::Sim(SimCommand::Preset { name, variant, flow, seed, out }) => {
            let name: PresetName = name.parse()?;
            let direction: Direction = flow.parse()?;
            let variants = if variant == "all" { Variant::ALL.to_vec() } else { vec![variant.parse()?] };
            let out = out.unwrap_or_else(|| Path::new("out").join(name.as_str()).join(direction.as_str()));
            let run = preset::run_variants(name, &variants, direction, seed, &out)?;
            if let Some(reference) = &run.reference {
                println!("reference: {:.3} Mbit/s", report::per_direction_mean(&reference.series)?);
            }
            for v in &run.variants {
                println!("{}: {:.3} Mbit/s", v.variant, report::per_direction_mean(&v.output.series)?);
            }
            if variants.len() > 1 || run.reference.is_some() {
                io::write_text(&out.join("plotdata.csv"), &plot::emit_plotdata(&out)?)?;
            }
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::Report(ReportCommand::Table1 { out, from, candidate }) => {
            let table = match from {
                Some(root) => report::table_from_runs(&root, candidate.parse()?)?,
                None => Table::testbed_fixture(),
            };
            for c in table.checks().iter().filter(|c| c.divergent) {
                eprintln!("divergent: {} computed {:.2}, stated {:.2}", c.cell, c.computed, c.stated);
            }
            io::write_text(&out, &table.to_csv())
        }
        Command::Report(ReportCommand::Plotdata { dir, out }) => {
            let text = plot::emit_plotdata(&dir)?;
            io::write_text(&out.unwrap_or_else(|| dir.join("plotdata.csv")), &text)
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code: 0 on success, 1 for invalid input, 2 when the work
/// itself failed.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            Error::exit_code(&e) as u8
        }
    }
}
