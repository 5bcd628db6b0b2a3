use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use m2m_core::analytic::{self, AnalyticSolution, Timeout};
use m2m_core::harness::{
    compare_report, load_config, read_csv, run_sweep, timeout, to_csv_string, Metric, RunMode,
    SweepRow, SweepSpec,
};
use m2m_core::sim::{run_simulation, run_simulation_traced};

#[derive(Parser)]
#[command(name = "m2m", version, about = "Multi-point stop-wait transport: model and simulator")]
struct Cli {
    /// Flat key = value experiment file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for a single simulation, or the only seed of a sweep.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write CSV here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    metric: Option<MetricArg>,
    #[arg(long, global = true, value_enum)]
    mode: Option<ModeArg>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Good,
    Raw,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Theory,
    Sim,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Baseline,
    Adsl,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the analytic model at one window size.
    Solve {
        #[arg(long)]
        m: Option<u32>,
        /// Timer in seconds, or `inf`.
        #[arg(long)]
        tout: Option<String>,
    },
    /// Run one simulation and print its report.
    Simulate {
        #[arg(long)]
        m: Option<u32>,
        #[arg(long)]
        tout: Option<String>,
        /// Write the protocol event trace to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Evaluate the configured grid and emit CSV.
    Sweep,
    /// Compare theory and simulation rows from one or two CSV files.
    Compare {
        #[arg(required = true, num_args = 1..=2)]
        csv: Vec<PathBuf>,
        /// Exit with status 2 unless every comparable slice is within tolerance.
        #[arg(long)]
        check: bool,
    },
    /// Window sweep of a built-in preset.
    Fig4 {
        #[arg(long, value_enum, default_value = "baseline")]
        preset: Preset,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn base_spec(cli: &Cli, preset: Option<Preset>) -> Result<SweepSpec> {
    let mut spec = match (&cli.config, preset) {
        (Some(path), _) => load_config(path)?,
        (None, Some(Preset::Adsl)) => SweepSpec::adsl(),
        (None, Some(Preset::Baseline)) => SweepSpec::fig4(),
        (None, None) => SweepSpec::default(),
    };
    if let Some(m) = cli.metric {
        spec.metric = match m {
            MetricArg::Good => Metric::GammaGood,
            MetricArg::Raw => Metric::GammaRaw,
        };
    }
    if let Some(mode) = cli.mode {
        spec.modes = match mode {
            ModeArg::Theory => vec![RunMode::Theory],
            ModeArg::Sim => vec![RunMode::Sim],
            ModeArg::Both => vec![RunMode::Theory, RunMode::Sim],
        };
    }
    if let Some(seed) = cli.seed {
        spec.seeds = vec![seed];
        spec.scenario.seed = seed;
    }
    Ok(spec)
}

fn parse_tout(s: &Option<String>) -> Result<Option<Timeout<f64>>> {
    s.as_deref()
        .map(|v| timeout(v).map_err(anyhow::Error::msg))
        .transpose()
}

fn write_rows(rows: &[SweepRow], out: &Option<PathBuf>) -> Result<()> {
    let text = to_csv_string(rows);
    match out {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Solve { m, tout } => {
            let spec = base_spec(&cli, None)?;
            let m = m.unwrap_or(spec.scenario.threads_per_peer);
            let tout = parse_tout(tout)?.unwrap_or(spec.scenario.tout);
            let inputs = spec.model_inputs(m, tout);
            let sol = analytic::solve(&inputs, &spec.solver)?;
            println!("mode        {}", inputs.mode);
            println!("mu          {}", inputs.mu_up);
            println!("m           {m}");
            println!("tout_s      {tout}");
            println!("status      {}", sol.status());
            if let AnalyticSolution::Converged(p) = sol {
                println!("rtt_s       {:.6}", p.rtt);
                println!("x_s         {:.6}", p.x);
                println!("p_timeout   {:.6}", p.p_timeout);
                println!("gamma_raw   {:.6}", p.gamma_raw);
                println!("gamma_good  {:.6}", p.gamma_good);
                println!("residual_s  {:.3e}", p.residual);
            }
        }
        Command::Simulate { m, tout, trace } => {
            let spec = base_spec(&cli, None)?;
            let mut cfg = spec.scenario.clone();
            if let Some(m) = m {
                cfg.threads_per_peer = *m;
                cfg.thread_overrides = None;
            }
            if let Some(t) = parse_tout(tout)? {
                cfg.tout = t;
            }
            let report = match trace {
                Some(path) => {
                    let file = File::create(path)
                        .with_context(|| format!("creating {}", path.display()))?;
                    let mut w = BufWriter::new(file);
                    let r = run_simulation_traced(&cfg, &mut w)?;
                    w.flush()?;
                    r
                }
                None => run_simulation(&cfg)?,
            };
            println!("{report}");
        }
        Command::Sweep => {
            let spec = base_spec(&cli, None)?;
            write_rows(&run_sweep(&spec)?, &cli.out)?;
        }
        Command::Fig4 { preset } => {
            let spec = base_spec(&cli, Some(*preset))?;
            let rows = run_sweep(&spec)?;
            write_rows(&rows, &cli.out)?;
            if cli.out.is_some() {
                println!("{}", compare_report(&rows, spec.metric));
            }
        }
        Command::Compare { csv, check } => {
            let mut rows = Vec::new();
            for path in csv {
                rows.extend(read_csv(path)?);
            }
            if rows.is_empty() {
                bail!("no rows to compare");
            }
            let metric = match cli.metric {
                Some(MetricArg::Raw) => Metric::GammaRaw,
                _ => Metric::GammaGood,
            };
            let report = compare_report(&rows, metric);
            println!("{report}");
            if *check && !report.passed() {
                return Ok(ExitCode::from(2));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
