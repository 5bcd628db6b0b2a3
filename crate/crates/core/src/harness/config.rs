//! Flat `key = value` experiment files.
//!
//! Keys are the field names of the scenario and sweep (plus the solver's
//! `step`, `tolerance`, `rtt_max`). `#` starts a comment. Lists are
//! comma-separated; integer lists also accept `start:end:step` (inclusive).
//! Unknown or repeated keys are errors.

use std::collections::HashSet;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::analytic::{LinkMode, Timeout};
use crate::error::{Error, Result};
use crate::harness::sweep::{Metric, RunMode, SweepSpec};
use crate::sim::SizeModel;

pub fn load_config(path: &Path) -> Result<SweepSpec> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_named(&text, &path.display().to_string(), SweepSpec::default())
}

/// Parse on top of [`SweepSpec::default`].
pub fn parse_config(text: &str) -> Result<SweepSpec> {
    parse_config_named(text, "<config>", SweepSpec::default())
}

/// Parse on top of an explicit base spec.
pub fn parse_config_onto(text: &str, base: SweepSpec) -> Result<SweepSpec> {
    parse_config_named(text, "<config>", base)
}

fn parse_config_named(text: &str, origin: &str, mut spec: SweepSpec) -> Result<SweepSpec> {
    let mut seen = HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse {
            origin: origin.to_string(),
            line: i + 1,
            msg,
        };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if !seen.insert(key.to_string()) {
            return Err(err(format!("duplicate key `{key}`")));
        }
        apply(&mut spec, key, value).map_err(|e| err(e))?;
    }
    Ok(spec)
}

fn apply(spec: &mut SweepSpec, key: &str, v: &str) -> std::result::Result<(), String> {
    let sc = &mut spec.scenario;
    match key {
        "n_peers" => sc.n_peers = scalar(v)?,
        "threads_per_peer" => sc.threads_per_peer = scalar(v)?,
        "thread_overrides" => sc.thread_overrides = Some(int_list(v)?),
        "uplink_bps" => sc.uplink_bps = scalar(v)?,
        "downlink_bps" => sc.downlink_bps = scalar(v)?,
        "mean_data_bytes" => sc.mean_data_bytes = scalar(v)?,
        "tp" => sc.tp = scalar(v)?,
        "tout" => sc.tout = timeout(v)?,
        "sim_duration" => sc.sim_duration = scalar(v)?,
        "warmup" => sc.warmup = scalar(v)?,
        "seed" => sc.seed = scalar(v)?,
        "resample_size_per_link" => sc.resample_size_per_link = scalar(v)?,
        "size_model" => {
            sc.size_model = match v {
                "exponential" => SizeModel::Exponential,
                "fixed" => SizeModel::Fixed,
                _ => return Err(format!("unknown size_model `{v}`")),
            }
        }
        "link_mode" => {
            spec.link_mode = match v {
                "symmetric" => LinkMode::Symmetric,
                "asymmetric" => LinkMode::Asymmetric,
                _ => return Err(format!("unknown link_mode `{v}`")),
            }
        }
        "m_values" => spec.m_values = int_list(v)?,
        "tout_values" => spec.tout_values = list(v, timeout)?,
        "sim_tout_values" => spec.sim_tout_values = Some(list(v, timeout)?),
        "seeds" => spec.seeds = int_list(v)?,
        "modes" => spec.modes = list(v, |s| s.parse::<RunMode>().map_err(|e| e.to_string()))?,
        "metric" => spec.metric = v.parse::<Metric>().map_err(|e| e.to_string())?,
        "step" => spec.solver.step = scalar(v)?,
        "tolerance" => spec.solver.tolerance = scalar(v)?,
        "rtt_max" => spec.solver.rtt_max = scalar(v)?,
        _ => return Err(format!("unknown key `{key}`")),
    }
    Ok(())
}

fn scalar<T: FromStr>(v: &str) -> std::result::Result<T, String>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>().map_err(|e| format!("bad value `{v}`: {e}"))
}

pub fn timeout(v: &str) -> std::result::Result<Timeout<f64>, String> {
    match v {
        "inf" | "infinite" => Ok(Timeout::Infinite),
        _ => scalar(v).map(Timeout::Finite),
    }
}

fn list<T>(
    v: &str,
    item: impl Fn(&str) -> std::result::Result<T, String>,
) -> std::result::Result<Vec<T>, String> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(item)
        .collect()
}

/// Comma list of integers or inclusive `start:end:step` ranges.
pub fn int_list<T>(v: &str) -> std::result::Result<Vec<T>, String>
where
    T: TryFrom<u64>,
{
    let mut out = Vec::new();
    for part in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let nums: Vec<u64> = part
            .split(':')
            .map(|s| scalar::<u64>(s.trim()))
            .collect::<std::result::Result<_, _>>()?;
        let range: Vec<u64> = match nums.as_slice() {
            [x] => vec![*x],
            [a, b] => (*a..=*b).collect(),
            [a, b, s] if *s > 0 => (*a..=*b).step_by(*s as usize).collect(),
            _ => return Err(format!("bad range `{part}`")),
        };
        for x in range {
            out.push(T::try_from(x).map_err(|_| format!("`{x}` out of range"))?);
        }
    }
    Ok(out)
}
