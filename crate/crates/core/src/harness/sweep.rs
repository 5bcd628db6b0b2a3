use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::analytic::{self, AnalyticSolution, LinkMode, ModelInputs, SolverSettings, Timeout};
use crate::error::{param, Error, Result};
use crate::sim::{run_simulation, ScenarioConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RunMode {
    Theory,
    Sim,
}

impl fmt::Display for RunMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RunMode::Theory => "theory",
            RunMode::Sim => "sim",
        })
    }
}

impl FromStr for RunMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theory" => Ok(RunMode::Theory),
            "sim" => Ok(RunMode::Sim),
            _ => param(format!("unknown mode `{s}` (expected theory or sim)")),
        }
    }
}

/// Throughput metric used to rank window sizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Metric {
    /// Only packets that arrive before their timer.
    #[default]
    GammaGood,
    /// Every data packet, late or not.
    GammaRaw,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::GammaGood => "gamma_good",
            Metric::GammaRaw => "gamma_raw",
        })
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "good" | "gamma_good" => Ok(Metric::GammaGood),
            "raw" | "gamma_raw" => Ok(Metric::GammaRaw),
            _ => param(format!("unknown metric `{s}` (expected good or raw)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowStatus {
    /// Metrics are present. Simulation rows that ran use this status too.
    Converged,
    Saturated,
    /// The point could not be evaluated; metrics are empty.
    Failed,
}

impl fmt::Display for RowStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RowStatus::Converged => "converged",
            RowStatus::Saturated => "saturated",
            RowStatus::Failed => "failed",
        })
    }
}

impl FromStr for RowStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "converged" => Ok(RowStatus::Converged),
            "saturated" => Ok(RowStatus::Saturated),
            "failed" => Ok(RowStatus::Failed),
            _ => param(format!("unknown status `{s}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub mode: RunMode,
    pub m: u32,
    pub tout: Timeout<f64>,
    /// 0 for theory rows.
    pub seed: u64,
    pub rtt_s: Option<f64>,
    pub p_timeout: Option<f64>,
    pub gamma_raw: Option<f64>,
    pub gamma_good: Option<f64>,
    pub status: RowStatus,
}

impl SweepRow {
    pub fn metric(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::GammaGood => self.gamma_good,
            Metric::GammaRaw => self.gamma_raw,
        }
    }

    fn empty(mode: RunMode, m: u32, tout: Timeout<f64>, seed: u64, status: RowStatus) -> Self {
        Self {
            mode,
            m,
            tout,
            seed,
            rtt_s: None,
            p_timeout: None,
            gamma_raw: None,
            gamma_good: None,
            status,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    /// Template; `threads_per_peer`, `tout` and `seed` are set per point.
    pub scenario: ScenarioConfig,
    /// Which analytic variant theory rows use.
    pub link_mode: LinkMode,
    pub m_values: Vec<u32>,
    pub tout_values: Vec<Timeout<f64>>,
    /// Timer values for simulation rows; defaults to `tout_values`.
    pub sim_tout_values: Option<Vec<Timeout<f64>>>,
    pub seeds: Vec<u64>,
    pub modes: Vec<RunMode>,
    pub metric: Metric,
    pub solver: SolverSettings<f64>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            scenario: ScenarioConfig::default(),
            link_mode: LinkMode::Symmetric,
            m_values: (10..=170).step_by(10).collect(),
            tout_values: vec![
                Timeout::Finite(2.0),
                Timeout::Finite(3.0),
                Timeout::Finite(4.0),
                Timeout::Infinite,
            ],
            sim_tout_values: None,
            seeds: vec![1, 2, 3],
            modes: vec![RunMode::Theory, RunMode::Sim],
            metric: Metric::GammaGood,
            solver: SolverSettings::default(),
        }
    }
}

impl SweepSpec {
    /// Window sweep of the 110-peer baseline: theory at 2, 3, 4 s and no timer,
    /// simulation at the three finite timers.
    pub fn fig4() -> Self {
        Self {
            sim_tout_values: Some(vec![
                Timeout::Finite(2.0),
                Timeout::Finite(3.0),
                Timeout::Finite(4.0),
            ]),
            ..Self::default()
        }
    }

    /// ADSL variant: 256 kbps up, 512 kbps down, 4 s timer, uplink-only model.
    pub fn adsl() -> Self {
        Self {
            scenario: ScenarioConfig {
                uplink_bps: 256_000.0,
                downlink_bps: 512_000.0,
                tout: Timeout::Finite(4.0),
                ..ScenarioConfig::default()
            },
            link_mode: LinkMode::Asymmetric,
            m_values: (5..=100).step_by(5).collect(),
            tout_values: vec![Timeout::Finite(4.0)],
            sim_tout_values: None,
            modes: vec![RunMode::Theory],
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.modes.is_empty() {
            return param("no run mode selected");
        }
        if self.m_values.is_empty() {
            return param("m_values must not be empty");
        }
        if self.m_values.windows(2).any(|w| w[0] >= w[1]) {
            return param("m_values must be strictly increasing");
        }
        if self.tout_values.is_empty() {
            return param("tout_values must not be empty");
        }
        if matches!(&self.sim_tout_values, Some(v) if v.is_empty()) {
            return param("sim_tout_values must not be empty");
        }
        if self.modes.contains(&RunMode::Sim) {
            if self.seeds.is_empty() {
                return param("seeds must not be empty");
            }
            self.scenario.validate()?;
        }
        self.solver.validate()
    }

    pub fn sim_touts(&self) -> &[Timeout<f64>] {
        self.sim_tout_values.as_deref().unwrap_or(&self.tout_values)
    }

    /// Analytic inputs for one point.
    pub fn model_inputs(&self, m: u32, tout: Timeout<f64>) -> ModelInputs<f64> {
        let s = &self.scenario;
        match self.link_mode {
            LinkMode::Symmetric => ModelInputs::symmetric(s.mu_up(), s.tp, tout, m),
            LinkMode::Asymmetric => ModelInputs::asymmetric(s.mu_up(), s.mu_down(), s.tp, tout, m),
        }
    }

    /// Number of rows [`run_sweep`] will emit.
    pub fn planned_rows(&self) -> usize {
        self.jobs().len()
    }

    fn jobs(&self) -> Vec<(RunMode, Timeout<f64>, u32, u64)> {
        let mut modes = self.modes.clone();
        modes.sort();
        modes.dedup();
        let mut jobs = Vec::new();
        for mode in modes {
            let (touts, seeds): (&[Timeout<f64>], &[u64]) = match mode {
                RunMode::Theory => (&self.tout_values, &[0]),
                RunMode::Sim => (self.sim_touts(), &self.seeds),
            };
            for &tout in touts {
                for &m in &self.m_values {
                    for &seed in seeds {
                        jobs.push((mode, tout, m, seed));
                    }
                }
            }
        }
        jobs
    }
}

pub fn theory_row(spec: &SweepSpec, m: u32, tout: Timeout<f64>) -> SweepRow {
    match analytic::solve(&spec.model_inputs(m, tout), &spec.solver) {
        Ok(AnalyticSolution::Converged(p)) => SweepRow {
            mode: RunMode::Theory,
            m,
            tout,
            seed: 0,
            rtt_s: Some(p.rtt),
            p_timeout: Some(p.p_timeout),
            gamma_raw: Some(p.gamma_raw),
            gamma_good: Some(p.gamma_good),
            status: RowStatus::Converged,
        },
        Ok(AnalyticSolution::Saturated) => {
            SweepRow::empty(RunMode::Theory, m, tout, 0, RowStatus::Saturated)
        }
        Err(_) => SweepRow::empty(RunMode::Theory, m, tout, 0, RowStatus::Failed),
    }
}

pub fn sim_row(spec: &SweepSpec, m: u32, tout: Timeout<f64>, seed: u64) -> SweepRow {
    let cfg = ScenarioConfig {
        threads_per_peer: m,
        thread_overrides: None,
        tout,
        seed,
        ..spec.scenario.clone()
    };
    match run_simulation(&cfg) {
        Ok(r) => SweepRow {
            mode: RunMode::Sim,
            m,
            tout,
            seed,
            rtt_s: r.rtt_mean.is_finite().then_some(r.rtt_mean),
            p_timeout: Some(r.p_timeout_empirical),
            gamma_raw: Some(r.gamma_raw),
            gamma_good: Some(r.gamma_good),
            status: RowStatus::Converged,
        },
        Err(_) => SweepRow::empty(RunMode::Sim, m, tout, seed, RowStatus::Failed),
    }
}

/// Evaluate every `(mode, tout, m, seed)` point, in that order.
///
/// Points run in parallel; the output order does not depend on scheduling.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    Ok(spec
        .jobs()
        .into_par_iter()
        .map(|(mode, tout, m, seed)| match mode {
            RunMode::Theory => theory_row(spec, m, tout),
            RunMode::Sim => sim_row(spec, m, tout, seed),
        })
        .collect())
}

/// Per-`m` metric over the `(tout, mode)` slice, averaging seeds.
pub fn slice_means(
    rows: &[SweepRow],
    tout: Timeout<f64>,
    mode: RunMode,
    pick: impl Fn(&SweepRow) -> Option<f64>,
) -> BTreeMap<u32, f64> {
    let mut acc: BTreeMap<u32, (f64, u32)> = BTreeMap::new();
    for r in rows
        .iter()
        .filter(|r| r.mode == mode && r.tout == tout && r.status == RowStatus::Converged)
    {
        if let Some(v) = pick(r) {
            let e = acc.entry(r.m).or_insert((0.0, 0));
            e.0 += v;
            e.1 += 1;
        }
    }
    acc.into_iter()
        .map(|(m, (s, n))| (m, s / f64::from(n)))
        .collect()
}

/// Window size maximizing `metric` on the slice; ties go to the smaller `m`.
pub fn find_optimal_m(
    rows: &[SweepRow],
    tout: Timeout<f64>,
    mode: RunMode,
    metric: Metric,
) -> Result<u32> {
    let means = slice_means(rows, tout, mode, |r| r.metric(metric));
    let mut best: Option<(u32, f64)> = None;
    for (m, v) in means {
        if best.map_or(true, |(_, b)| v > b) {
            best = Some((m, v));
        }
    }
    best.map(|(m, _)| m).ok_or_else(|| {
        Error::NotFound(format!("no converged {mode} rows for tout={tout}"))
    })
}
