use std::fmt::{self, Write as _};

use crate::analytic::Timeout;
use crate::harness::sweep::{find_optimal_m, slice_means, Metric, RunMode, SweepRow};

/// Agreement thresholds between theory and simulation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompareTolerances {
    pub gamma_good: f64,
    pub p_timeout: f64,
    /// Allowed distance between the two optimal window sizes.
    pub optimal_m: u32,
}

impl Default for CompareTolerances {
    fn default() -> Self {
        Self {
            gamma_good: 0.08,
            p_timeout: 0.08,
            optimal_m: 20,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SliceComparison {
    pub tout: Timeout<f64>,
    pub has_theory: bool,
    pub has_sim: bool,
    /// Window sizes where both sides converged.
    pub points: usize,
    pub max_gamma_diff: f64,
    pub mean_gamma_diff: f64,
    pub max_p_diff: f64,
    pub mean_p_diff: f64,
    pub optimal_theory: Option<u32>,
    pub optimal_sim: Option<u32>,
    pub passed: Option<bool>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompareReport {
    pub metric: Metric,
    pub tolerances: CompareTolerances,
    pub slices: Vec<SliceComparison>,
}

impl CompareReport {
    /// True when at least one slice was comparable and every comparable slice passed.
    pub fn passed(&self) -> bool {
        let judged: Vec<bool> = self.slices.iter().filter_map(|s| s.passed).collect();
        !judged.is_empty() && judged.iter().all(|&p| p)
    }
}

/// Compare theory and simulation slices per timer value.
///
/// Simulation rows are seed-averaged per window size first. Slices missing
/// one side are listed as gaps and do not count toward pass/fail.
pub fn compare_report(rows: &[SweepRow], metric: Metric) -> CompareReport {
    compare_report_with(rows, metric, CompareTolerances::default())
}

pub fn compare_report_with(
    rows: &[SweepRow],
    metric: Metric,
    tol: CompareTolerances,
) -> CompareReport {
    let mut touts: Vec<Timeout<f64>> = Vec::new();
    for r in rows {
        if !touts.contains(&r.tout) {
            touts.push(r.tout);
        }
    }
    let slices = touts
        .into_iter()
        .map(|tout| {
            let present = |mode| rows.iter().any(|r| r.mode == mode && r.tout == tout);
            let (has_theory, has_sim) = (present(RunMode::Theory), present(RunMode::Sim));
            let tg = slice_means(rows, tout, RunMode::Theory, |r| r.gamma_good);
            let sg = slice_means(rows, tout, RunMode::Sim, |r| r.gamma_good);
            let tp = slice_means(rows, tout, RunMode::Theory, |r| r.p_timeout);
            let sp = slice_means(rows, tout, RunMode::Sim, |r| r.p_timeout);
            let mut gd = Vec::new();
            let mut pd = Vec::new();
            for (m, g) in &tg {
                if let Some(s) = sg.get(m) {
                    gd.push((g - s).abs());
                }
                if let (Some(a), Some(b)) = (tp.get(m), sp.get(m)) {
                    pd.push((a - b).abs());
                }
            }
            let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
            let mean = |v: &[f64]| {
                if v.is_empty() {
                    0.0
                } else {
                    v.iter().sum::<f64>() / v.len() as f64
                }
            };
            let optimal_theory = find_optimal_m(rows, tout, RunMode::Theory, metric).ok();
            let optimal_sim = find_optimal_m(rows, tout, RunMode::Sim, metric).ok();
            let passed = (!gd.is_empty()).then(|| {
                max(&gd) <= tol.gamma_good
                    && max(&pd) <= tol.p_timeout
                    && match (optimal_theory, optimal_sim) {
                        (Some(a), Some(b)) => a.abs_diff(b) <= tol.optimal_m,
                        _ => false,
                    }
            });
            SliceComparison {
                tout,
                has_theory,
                has_sim,
                points: gd.len(),
                max_gamma_diff: max(&gd),
                mean_gamma_diff: mean(&gd),
                max_p_diff: max(&pd),
                mean_p_diff: mean(&pd),
                optimal_theory,
                optimal_sim,
                passed,
            }
        })
        .collect();
    CompareReport {
        metric,
        tolerances: tol,
        slices,
    }
}

fn opt(v: Option<u32>) -> String {
    v.map_or_else(|| "-".into(), |m| m.to_string())
}

impl fmt::Display for CompareReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = &self.tolerances;
        writeln!(f, "metric: {}", self.metric)?;
        writeln!(
            f,
            "tolerances: gamma_good {} p_timeout {} optimal_m {}",
            t.gamma_good, t.p_timeout, t.optimal_m
        )?;
        for s in &self.slices {
            let mut line = format!("tout={}:", s.tout);
            if !s.has_theory {
                line.push_str(" theory slice absent;");
            }
            if !s.has_sim {
                line.push_str(" sim slice absent;");
            }
            let _ = write!(
                line,
                " points {} | gamma_good diff max {:.4} mean {:.4} | p_timeout diff max {:.4} mean {:.4} | optimal M theory {} sim {}",
                s.points,
                s.max_gamma_diff,
                s.mean_gamma_diff,
                s.max_p_diff,
                s.mean_p_diff,
                opt(s.optimal_theory),
                opt(s.optimal_sim)
            );
            let verdict = match s.passed {
                Some(true) => "PASS",
                Some(false) => "FAIL",
                None => "n/a",
            };
            writeln!(f, "{line} | {verdict}")?;
        }
        write!(
            f,
            "overall: {}",
            if self.passed() { "PASS" } else { "FAIL" }
        )
    }
}
