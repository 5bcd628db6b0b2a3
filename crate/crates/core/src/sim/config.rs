use crate::analytic::Timeout;
use crate::error::{param, Result};

/// How data packet sizes are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SizeModel {
    /// Exponential with mean `mean_data_bytes`.
    Exponential,
    /// Every packet is exactly `mean_data_bytes`.
    Fixed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub n_peers: usize,
    /// Stop-wait threads per peer (window `M`).
    pub threads_per_peer: u32,
    /// Per-peer thread counts; overrides `threads_per_peer` when present.
    pub thread_overrides: Option<Vec<u32>>,
    pub uplink_bps: f64,
    pub downlink_bps: f64,
    pub mean_data_bytes: f64,
    /// Fixed core round-trip propagation delay, seconds. Each direction gets half.
    pub tp: f64,
    pub tout: Timeout<f64>,
    pub sim_duration: f64,
    /// Statistics before this time are discarded.
    pub warmup: f64,
    pub seed: u64,
    /// Draw a fresh size on every link instead of reusing the responder's draw.
    pub resample_size_per_link: bool,
    pub size_model: SizeModel,
}

impl Default for ScenarioConfig {
    /// 110 peers on 512 kbps links, 1000-byte mean packets, 600 ms core
    /// delay, 2 s timer, 100 s runs.
    fn default() -> Self {
        Self {
            n_peers: 110,
            threads_per_peer: 70,
            thread_overrides: None,
            uplink_bps: 512_000.0,
            downlink_bps: 512_000.0,
            mean_data_bytes: 1000.0,
            tp: 0.6,
            tout: Timeout::Finite(2.0),
            sim_duration: 100.0,
            warmup: 10.0,
            seed: 1,
            resample_size_per_link: false,
            size_model: SizeModel::Exponential,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_peers < 2 {
            return param(format!("n_peers must be at least 2, got {}", self.n_peers));
        }
        for (name, v) in [
            ("uplink_bps", self.uplink_bps),
            ("downlink_bps", self.downlink_bps),
            ("mean_data_bytes", self.mean_data_bytes),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return param(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.tp >= 0.0) || !self.tp.is_finite() {
            return param(format!("tp must be non-negative, got {}", self.tp));
        }
        if !(self.warmup >= 0.0) || !(self.sim_duration > self.warmup) || !self.sim_duration.is_finite() {
            return param(format!(
                "need sim_duration > warmup >= 0, got duration {} warmup {}",
                self.sim_duration, self.warmup
            ));
        }
        if let Timeout::Finite(t) = self.tout {
            if !(t > 0.0) {
                return param(format!("tout must be positive, got {t}"));
            }
        }
        if let Some(o) = &self.thread_overrides {
            if o.len() != self.n_peers {
                return param(format!(
                    "thread_overrides has {} entries for {} peers",
                    o.len(),
                    self.n_peers
                ));
            }
        }
        Ok(())
    }

    pub fn threads_of(&self, peer: usize) -> u32 {
        self.thread_overrides
            .as_ref()
            .map_or(self.threads_per_peer, |o| o[peer])
    }

    pub fn mean_data_bits(&self) -> f64 {
        self.mean_data_bytes * 8.0
    }

    /// Uplink service rate in mean-size packets per second.
    pub fn mu_up(&self) -> f64 {
        self.uplink_bps / self.mean_data_bits()
    }

    pub fn mu_down(&self) -> f64 {
        self.downlink_bps / self.mean_data_bits()
    }
}
