//! `optolink` command-line front end.
//!
//! Exit codes: 0 success, 1 model or regression failure, 2 usage or
//! scenario-schema error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};

use optolink_core::report::{
    compare, generate_tables, ntt_selftest, render_simulation, render_sweep, timestamp, Artifact,
    OutputFormat, Scenario, TableInputs,
};
use optolink_core::sim::{run_scenario, sweep, SweepAxis};
use optolink_core::PhotonicParams;

#[derive(Parser)]
#[command(
    name = "optolink",
    version,
    about = "Photonic memory-interconnect models for NTT accelerators"
)]
struct Cli {
    /// Directory for report files
    #[arg(
        long,
        global = true,
        env = "OPTOLINK_OUT_DIR",
        default_value = "optolink-out"
    )]
    out: PathBuf,

    /// Report format: csv, json or both
    #[arg(long, global = true, default_value = "both")]
    format: OutputFormat,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Regenerate the bitrate, power and area tables and check them against
    /// the reference figures
    Tables {
        /// Scenario whose photonic/area/electrical overrides apply
        #[arg(short = 'f', long)]
        scenario: Option<PathBuf>,
    },
    /// Check which FHE accelerators N OptoLink channels can feed
    Compare {
        #[arg(long)]
        channels: u64,
    },
    /// Run one simulation from a scenario file
    Simulate {
        #[arg(short = 'f', long)]
        scenario: PathBuf,
    },
    /// Run a parameter sweep; --axis/--values override the scenario's sweep
    Sweep {
        #[arg(short = 'f', long)]
        scenario: PathBuf,
        #[arg(long)]
        axis: Option<SweepAxis>,
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<u64>>,
    },
    /// Check NTT/INTT against the direct oracle for every size up to N
    NttSelftest {
        #[arg(long)]
        max_n: usize,
        /// Corrupt the twiddle cache (negative control; the test must fail)
        #[arg(long)]
        inject_fault: bool,
    },
}

enum Failure {
    Usage(anyhow::Error),
    Model(anyhow::Error),
}

impl Failure {
    fn model(e: impl Into<anyhow::Error>) -> Self {
        Failure::Model(e.into())
    }
}

fn load_scenario(path: &Path) -> Result<Scenario, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::Usage)?;
    Scenario::from_json(&text).map_err(|e| Failure::Usage(anyhow!("{}: {e}", path.display())))
}

fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> Result<(), Failure> {
    fs::create_dir_all(dir)
        .with_context(|| format!("creating {}", dir.display()))
        .map_err(Failure::Usage)?;
    for a in artifacts {
        let path = dir.join(&a.file_name);
        fs::write(&path, &a.contents)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(Failure::Usage)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let stamp = timestamp();
    let format = cli.format;
    match cli.command {
        Command::Tables { scenario } => {
            let mut inputs = TableInputs::default();
            if let Some(path) = scenario {
                let s = load_scenario(&path)?;
                let sim = s.to_sim();
                inputs.params = sim.params;
                inputs.area = sim.area;
                inputs.baseline = sim.options.baseline;
                inputs.delay_ps_per_mm = sim.options.delay_ps_per_mm;
            }
            let report = generate_tables(&inputs);
            write_artifacts(&cli.out, &report.render(format, &stamp))?;
            for c in &report.checks {
                println!(
                    "{} {}: expected {} got {}",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    c.expected,
                    c.actual
                );
            }
            if !report.passed() {
                return Err(Failure::Model(anyhow!(
                    "{} of {} reference checks failed",
                    report.failures().count(),
                    report.checks.len()
                )));
            }
        }
        Command::Compare { channels } => {
            if channels == 0 {
                return Err(Failure::Usage(anyhow!("--channels must be at least 1")));
            }
            let report = compare(channels, &PhotonicParams::default());
            write_artifacts(&cli.out, &report.render(format, &stamp))?;
            println!("{channels} channels -> {} TB/s", report.optolink_tbytes);
            for r in &report.rows {
                println!(
                    "{:<11} {:>8} GB/s  {}  (needs {} channels)",
                    r.name,
                    r.required_gbytes,
                    if r.met { "met" } else { "NOT met" },
                    r.min_channels
                );
            }
        }
        Command::Simulate { scenario } => {
            let s = load_scenario(&scenario)?;
            let run = run_scenario(&s.to_sim()).map_err(Failure::model)?;
            let format = s.output_format.unwrap_or(format);
            write_artifacts(&cli.out, &render_simulation(&run, format, &stamp))?;
            let r = &run.result;
            println!(
                "load {:.6e} s  compute {:.6e} s  store {:.6e} s  transfer {:.6e} s  total {:.6e} s  bottleneck {}",
                r.load_time,
                r.compute_time,
                r.store_time,
                r.transfer_time,
                r.total_time,
                r.bottleneck.as_str()
            );
        }
        Command::Sweep {
            scenario,
            axis,
            values,
        } => {
            let s = load_scenario(&scenario)?;
            let spec = s.sweep.clone();
            let axis = axis.or(spec.as_ref().map(|sw| sw.axis)).ok_or_else(|| {
                Failure::Usage(anyhow!(
                    "no sweep axis: pass --axis or add `sweep` to the scenario"
                ))
            })?;
            let values = values.or(spec.map(|sw| sw.values)).unwrap_or_default();
            let points = sweep(&s.to_sim(), axis, &values)
                .into_iter()
                .zip(&values)
                .map(|(r, v)| r.with_context(|| format!("{} = {v}", axis.as_str())))
                .collect::<Result<Vec<_>, _>>()
                .map_err(Failure::Model)?;
            let format = s.output_format.unwrap_or(format);
            write_artifacts(&cli.out, &render_sweep(&points, format, &stamp))?;
            for p in &points {
                println!(
                    "{}={}  total {:.6e} s  link {} TB/s  power {:.2} W  bottleneck {}",
                    axis.as_str(),
                    p.value,
                    p.run.result.total_time,
                    p.run.perf.link_bandwidth,
                    p.run.perf.power.total,
                    p.run.result.bottleneck.as_str()
                );
            }
        }
        Command::NttSelftest {
            max_n,
            inject_fault,
        } => {
            let report = ntt_selftest(max_n, inject_fault).map_err(|e| Failure::Usage(e.into()))?;
            write_artifacts(&cli.out, &report.render(format, &stamp))?;
            let failed = report.checks.iter().filter(|c| !c.passed).count();
            println!("{} checks, {failed} failed", report.checks.len());
            if failed > 0 {
                return Err(Failure::Model(anyhow!("NTT self-test failed")));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Model(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
