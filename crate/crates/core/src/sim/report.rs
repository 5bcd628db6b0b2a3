use std::fmt;

/// Measurements from one run over `[warmup, sim_duration]`.
///
/// Request outcomes are attributed to the window of the request's emission;
/// throughput and utilization are time averages over the window.
#[derive(Clone, Debug, PartialEq)]
pub struct SimReport {
    pub requests_sent: u64,
    pub data_ontime: u64,
    pub data_late_dropped: u64,
    pub timeouts: u64,
    pub pending_at_end: u64,
    /// Round-trip times of on-time deliveries, in delivery order.
    pub rtt_samples: Vec<f64>,
    pub rtt_mean: f64,
    /// `timeouts / (timeouts + data_ontime)`.
    pub p_timeout_empirical: f64,
    /// On-time data bits per second over downlink capacity, averaged over peers.
    pub gamma_good: f64,
    /// All data bits reaching downlinks per second over downlink capacity.
    pub gamma_raw: f64,
    pub uplink_utilization: f64,
    pub downlink_utilization: f64,
    pub uplink_utilization_max: f64,
    pub downlink_utilization_max: f64,
    /// Events processed, including warm-up.
    pub events: u64,
}

impl SimReport {
    pub fn conservation_holds(&self) -> bool {
        self.requests_sent == self.data_ontime + self.timeouts + self.pending_at_end
    }
}

impl fmt::Display for SimReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "requests_sent        {}", self.requests_sent)?;
        writeln!(f, "data_ontime          {}", self.data_ontime)?;
        writeln!(f, "data_late_dropped    {}", self.data_late_dropped)?;
        writeln!(f, "timeouts             {}", self.timeouts)?;
        writeln!(f, "pending_at_end       {}", self.pending_at_end)?;
        writeln!(f, "rtt_mean_s           {:.6}", self.rtt_mean)?;
        writeln!(f, "p_timeout            {:.6}", self.p_timeout_empirical)?;
        writeln!(f, "gamma_good           {:.6}", self.gamma_good)?;
        writeln!(f, "gamma_raw            {:.6}", self.gamma_raw)?;
        writeln!(f, "uplink_utilization   {:.6}", self.uplink_utilization)?;
        writeln!(f, "downlink_utilization {:.6}", self.downlink_utilization)?;
        write!(f, "events               {}", self.events)
    }
}
