mod config;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::{Arc, Mutex};

use anyhow::{bail, Context as _, Result};
use clap::{Parser, Subcommand};
use gridrv::decomposition::{bd, r, rho, Call};
use gridrv::grid::Node;
use gridrv::labels::transform;
use gridrv::patterns::PatternDescriptor;
use gridrv::simulator::{MeetingReport, RunOptions, Scenario, Simulation, StopReason, TraceRecord};
use gridrv::verify::{run_suite, Suite};
use gridrv::Count;

use config::{Bound, ExperimentConfig, Overrides, ScenarioConfig};

#[derive(Parser, Debug)]
#[command(name = "gridrv", version, about = "Asynchronous rendezvous of two labeled agents on the grid")]
struct Cli {
    /// Output directory. Without it, tables go to standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for independent scenarios.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Run scenarios from a config file, or a single one given by flags.
    Simulate(SimulateArgs),
    /// Run property suites: patterns, decomposition, push, costs (default: all).
    Verify { suites: Vec<String> },
    /// Print sequences and values.
    Inspect {
        #[command(subcommand)]
        what: Inspect,
    },
    /// Basic decomposition of a call, e.g. `bd 'Assumption(2)' 5` or `bd 2 5`.
    Bd { call: String, label: u64 },
    /// Cost and bounding radius of descriptors, e.g. `cost 'Berry(1,1)'`.
    Cost { descriptors: Vec<String> },
}

#[derive(Subcommand, Debug)]
enum Inspect {
    /// Transformed label bits.
    Transform { label: u64 },
    /// The sequences rho(d) and r(d).
    RhoR { d: u64 },
    /// Rows of bd(Assumption(d)) for a label.
    Bd { d: u64, label: u64 },
    /// Cost of one descriptor.
    Cost { descriptor: String },
}

#[derive(clap::Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Labels of agents A and B, e.g. `0,1`.
    #[arg(long, value_parser = pair::<u64>)]
    labels: Option<(u64, u64)>,
    /// B's start relative to A's, e.g. `1,0` or `-2,1`.
    #[arg(long, value_parser = pair::<i64>, allow_hyphen_values = true)]
    offset: Option<(i64, i64)>,
    #[arg(long, default_value = "round_robin")]
    strategy: String,
    /// A power of two, or `auto` for d1.
    #[arg(long)]
    stop_bound: Option<String>,
    #[arg(long)]
    no_fast_forward: bool,
    /// Write one JSON-lines trace per scenario (needs --out).
    #[arg(long)]
    trace: bool,
    #[arg(long)]
    budget: Option<Count>,
    /// Seed for every random strategy.
    #[arg(long)]
    seed: Option<u64>,
}

fn pair<T: std::str::FromStr>(s: &str) -> Result<(T, T), String> {
    let parse = |p: &str| p.trim().parse::<T>().map_err(|_| format!("bad number `{p}`"));
    match s.split_once(',') {
        Some((a, b)) => Ok((parse(a)?, parse(b)?)),
        None => Err(format!("expected two comma-separated numbers, got `{s}`")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    if let Some(j) = cli.jobs {
        set_jobs(j)?;
    }
    let out = cli.out.as_deref();
    match cli.cmd {
        Cmd::Simulate(args) => simulate(args, out),
        Cmd::Verify { suites } => verify(&suites, out),
        Cmd::Inspect { what } => {
            match what {
                Inspect::Transform { label } => println!("{}", transform(label)),
                Inspect::RhoR { d } => println!("rho={} r={}", rho(d)?, r(d)?),
                Inspect::Bd { d, label } => print_bd(Call::Assumption(d), label, out)?,
                Inspect::Cost { descriptor } => print_costs(&[descriptor], out)?,
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Bd { call, label } => {
            let call = match call.parse::<u64>() {
                Ok(d) => Call::Assumption(d),
                Err(_) => call.parse().map_err(anyhow::Error::msg)?,
            };
            print_bd(call, label, out)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Cost { descriptors } => {
            print_costs(&descriptors, out)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

#[cfg(feature = "parallel")]
fn set_jobs(j: usize) -> Result<()> {
    rayon::ThreadPoolBuilder::new().num_threads(j).build_global().context("configuring worker threads")
}

#[cfg(not(feature = "parallel"))]
fn set_jobs(_: usize) -> Result<()> {
    eprintln!("warning: built without the `parallel` feature; --jobs is ignored");
    Ok(())
}

/// Standard output, or `name` inside the output directory.
fn sink(out: Option<&Path>, name: &str) -> Result<Box<dyn Write>> {
    match out {
        None => Ok(Box::new(io::stdout().lock())),
        Some(dir) => {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let path = dir.join(name);
            let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
            Ok(Box::new(BufWriter::new(f)))
        }
    }
}

fn print_bd(call: Call, label: u64, out: Option<&Path>) -> Result<()> {
    let rows = bd(call, &transform(label))?;
    let mut w = csv::Writer::from_writer(sink(out, "bd.csv")?);
    w.write_record(["index", "type", "parameters"])?;
    for (i, p) in rows.iter().enumerate() {
        w.write_record([i.to_string(), p.kind().to_string(), p.params().join(",")])?;
    }
    w.flush()?;
    Ok(())
}

fn print_costs(descriptors: &[String], out: Option<&Path>) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink(out, "cost.csv")?);
    w.write_record(["descriptor", "cost", "bounding_radius"])?;
    for d in descriptors {
        let p: PatternDescriptor = d.parse()?;
        w.write_record([p.to_string(), p.cost().to_string(), p.bounding_radius().to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn verify(names: &[String], out: Option<&Path>) -> Result<ExitCode> {
    let suites = if names.is_empty() {
        Suite::ALL.to_vec()
    } else {
        names.iter().map(|n| n.parse().map_err(anyhow::Error::msg)).collect::<Result<Vec<Suite>>>()?
    };
    let mut w = sink(out, "verify.jsonl")?;
    let mut failed = Vec::new();
    for s in suites {
        for c in run_suite(s) {
            writeln!(w, "{}", serde_json::to_string(&c)?)?;
            if !c.passed {
                failed.push(format!("{}: {}", c.suite, c.property));
            }
        }
    }
    w.flush()?;
    if failed.is_empty() {
        return Ok(ExitCode::SUCCESS);
    }
    for f in &failed {
        eprintln!("FAILED {f}");
    }
    Ok(ExitCode::FAILURE)
}

fn simulate(args: SimulateArgs, cli_out: Option<&Path>) -> Result<ExitCode> {
    let overrides = Overrides { budget: args.budget.clone(), seed: args.seed };
    let config = match (&args.config, &args.labels, &args.offset) {
        (Some(path), None, None) => ExperimentConfig::load(path)?,
        (None, Some(labels), Some(offset)) => ExperimentConfig {
            fast_forward: true,
            trace: false,
            out: None,
            budget: None,
            scenarios: vec![ScenarioConfig {
                labels: [labels.0, labels.1],
                offset: [offset.0, offset.1],
                strategy: args.strategy.clone(),
                stop_bound: args.stop_bound.as_ref().map(|b| match b.parse() {
                    Ok(d) => Bound::Phase(d),
                    Err(_) => Bound::Keyword(b.clone()),
                }),
                budget: None,
            }],
        },
        (Some(_), _, _) => bail!("--labels and --offset cannot be combined with --config"),
        _ => bail!("give either --config or both --labels and --offset"),
    };
    let scenarios = config.scenarios(&overrides)?;
    let opts = RunOptions { fast_forward: config.fast_forward && !args.no_fast_forward };
    let out = cli_out.or(config.out.as_deref());
    let trace = args.trace || config.trace;
    if trace && out.is_none() {
        bail!("--trace needs an output directory (--out)");
    }
    let reports = if trace {
        let dir = out.expect("checked");
        std::fs::create_dir_all(dir)?;
        run_traced(&scenarios, opts, dir)?
    } else {
        gridrv::batch::run_batch(&scenarios, opts).into_iter().collect::<Result<Vec<_>, _>>()?
    };
    let mut w = csv::Writer::from_writer(sink(out, "simulate.csv")?);
    write_table(&mut w, &scenarios, &reports)?;
    w.flush()?;
    let all_met = scenarios
        .iter()
        .zip(&reports)
        .all(|(s, r)| s.stop_bound.is_none() || r.stop_reason == StopReason::Meeting);
    Ok(if all_met { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn run_traced(scenarios: &[Scenario], opts: RunOptions, dir: &Path) -> Result<Vec<MeetingReport>> {
    let one = |(i, s): (usize, &Scenario)| -> Result<MeetingReport> {
        let path = dir.join(format!("trace-{i}.jsonl"));
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        let shared = Arc::new(Mutex::new((BufWriter::new(file), None::<io::Error>)));
        let mut sim = Simulation::new(s, opts)?;
        let w = shared.clone();
        sim.set_trace(Box::new(move |r: &TraceRecord| {
            let mut g = w.lock().expect("trace writer poisoned");
            let (f, err) = &mut *g;
            if err.is_none() {
                let line = serde_json::to_string(r).expect("records serialize");
                if let Err(e) = writeln!(f, "{line}") {
                    *err = Some(e);
                }
            }
        }));
        let report = sim.run();
        let mut g = shared.lock().expect("trace writer poisoned");
        if let Some(e) = g.1.take() {
            return Err(e).with_context(|| format!("writing {}", path.display()));
        }
        g.0.flush().with_context(|| format!("writing {}", path.display()))?;
        Ok(report)
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        scenarios.par_iter().enumerate().map(one).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        scenarios.iter().enumerate().map(one).collect()
    }
}

fn write_table<W: Write>(w: &mut csv::Writer<W>, scenarios: &[Scenario], reports: &[MeetingReport]) -> Result<()> {
    w.write_record([
        "index",
        "label_a",
        "label_b",
        "dx",
        "dy",
        "distance",
        "first_diff",
        "d1",
        "strategy",
        "budget",
        "stop_bound",
        "met",
        "stop_reason",
        "location",
        "traversals_a",
        "traversals_b",
        "traversals",
        "context_a",
        "context_b",
        "decisions",
    ])?;
    for (i, (s, r)) in scenarios.iter().zip(reports).enumerate() {
        let Node { x, y } = s.offset;
        w.write_record([
            i.to_string(),
            s.label_a.to_string(),
            s.label_b.to_string(),
            x.to_string(),
            y.to_string(),
            s.distance().to_string(),
            s.first_diff()?.to_string(),
            s.good_assumption()?.to_string(),
            s.strategy.to_string(),
            s.budget.to_string(),
            s.stop_bound.map(|b| b.to_string()).unwrap_or_default(),
            r.met.to_string(),
            r.stop_reason.to_string(),
            r.location.as_ref().map(ToString::to_string).unwrap_or_default(),
            r.traversals_a.to_string(),
            r.traversals_b.to_string(),
            r.total_traversals().to_string(),
            r.context_a.to_string(),
            r.context_b.to_string(),
            r.decisions.to_string(),
        ])?;
    }
    Ok(())
}
