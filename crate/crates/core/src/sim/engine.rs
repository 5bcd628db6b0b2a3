use std::collections::VecDeque;
use std::io::Write;

use crate::error::{Error, Result};
use crate::sim::config::ScenarioConfig;
use crate::sim::event::{EventKind, EventQueue};
use crate::sim::packet::{request_latency, service_time, Packet, PacketKind};
use crate::sim::protocol::{on_data_arrival, ArrivalOutcome, Node, Phase, RequestContext};
use crate::sim::report::SimReport;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Dir {
    Up,
    Down,
}

/// Unbounded FIFO with a single server.
#[derive(Debug, Default)]
struct Link {
    queue: VecDeque<Packet>,
    busy: bool,
    busy_in_window: f64,
}

struct Window {
    start: f64,
    end: f64,
}

impl Window {
    fn contains(&self, t: f64) -> bool {
        t >= self.start
    }

    fn overlap(&self, a: f64, b: f64) -> f64 {
        (b.min(self.end) - a.max(self.start)).max(0.0)
    }

    fn len(&self) -> f64 {
        self.end - self.start
    }
}

#[derive(Default)]
struct Counters {
    requests_sent: u64,
    data_ontime: u64,
    data_late_dropped: u64,
    timeouts: u64,
    rtt_samples: Vec<f64>,
    good_bits: Vec<f64>,
    raw_bits: Vec<f64>,
}

struct Engine<'a> {
    cfg: &'a ScenarioConfig,
    ctx: RequestContext,
    window: Window,
    nodes: Vec<Node>,
    up: Vec<Link>,
    down: Vec<Link>,
    queue: EventQueue,
    stats: Counters,
    trace: Option<&'a mut dyn Write>,
    events: u64,
}

/// Run one simulation. Identical configs give identical reports.
pub fn run_simulation(cfg: &ScenarioConfig) -> Result<SimReport> {
    cfg.validate()?;
    Engine::new(cfg, None).run()
}

/// Like [`run_simulation`], also writing one tab-separated line per protocol
/// step: `time kind peer thread request_id`, with kind one of
/// `request`, `deliver`, `stale`, `timeout`.
pub fn run_simulation_traced(cfg: &ScenarioConfig, trace: &mut dyn Write) -> Result<SimReport> {
    cfg.validate()?;
    Engine::new(cfg, Some(trace)).run()
}

impl<'a> Engine<'a> {
    fn new(cfg: &'a ScenarioConfig, trace: Option<&'a mut dyn Write>) -> Self {
        let n = cfg.n_peers;
        Self {
            cfg,
            ctx: RequestContext {
                n_peers: n,
                tout: cfg.tout,
                size_model: cfg.size_model,
                mean_data_bits: cfg.mean_data_bits(),
            },
            window: Window {
                start: cfg.warmup,
                end: cfg.sim_duration,
            },
            nodes: (0..n)
                .map(|i| Node::new(i, cfg.threads_of(i), cfg.seed))
                .collect(),
            up: (0..n).map(|_| Link::default()).collect(),
            down: (0..n).map(|_| Link::default()).collect(),
            queue: EventQueue::new(),
            stats: Counters {
                good_bits: vec![0.0; n],
                raw_bits: vec![0.0; n],
                ..Default::default()
            },
            trace,
            events: 0,
        }
    }

    fn run(mut self) -> Result<SimReport> {
        for peer in 0..self.nodes.len() {
            for thread in 0..self.nodes[peer].threads.len() {
                self.queue
                    .schedule(0.0, EventKind::ThreadStart { peer, thread });
            }
        }
        while let Some(ev) = self.queue.pop() {
            if ev.time > self.cfg.sim_duration {
                break;
            }
            self.events += 1;
            let now = ev.time;
            match ev.kind {
                EventKind::ThreadStart { peer, thread } => self.send_request(peer, thread, now)?,
                EventKind::UplinkServiceDone {
                    peer,
                    pkt,
                    releases,
                } => {
                    if releases {
                        self.release(peer, Dir::Up, now);
                    }
                    self.queue
                        .schedule(now + self.cfg.tp / 2.0, EventKind::CoreArrival { pkt });
                }
                EventKind::CoreArrival { pkt } => self.enqueue(pkt.dst, Dir::Down, pkt, now),
                EventKind::DownlinkServiceDone {
                    peer,
                    pkt,
                    releases,
                } => {
                    if releases {
                        self.release(peer, Dir::Down, now);
                    }
                    match pkt.kind {
                        PacketKind::Request => self.respond(peer, pkt, now),
                        PacketKind::Data => self.receive_data(peer, pkt, now)?,
                    }
                }
                EventKind::TimerFired {
                    peer,
                    thread,
                    request_id,
                } => self.timer_fired(peer, thread, request_id, now)?,
            }
        }
        self.finish()
    }

    fn record(&mut self, now: f64, kind: &str, peer: usize, thread: usize, id: u64) -> Result<()> {
        if let Some(w) = self.trace.as_deref_mut() {
            writeln!(w, "{now:.9}\t{kind}\t{peer}\t{thread}\t{id}").map_err(|source| Error::Io {
                path: "<trace>".into(),
                source,
            })?;
        }
        Ok(())
    }

    fn send_request(&mut self, peer: usize, thread: usize, now: f64) -> Result<()> {
        let pkt = self.nodes[peer].issue_request(thread, now, &self.ctx)?;
        self.after_issue(peer, thread, pkt, now)
    }

    fn after_issue(&mut self, peer: usize, thread: usize, pkt: Packet, now: f64) -> Result<()> {
        if self.window.contains(now) {
            self.stats.requests_sent += 1;
        }
        self.record(now, "request", peer, thread, pkt.request_id)?;
        if let Some(deadline) = self.nodes[peer].threads[thread].timer_deadline {
            self.queue.schedule(
                deadline,
                EventKind::TimerFired {
                    peer,
                    thread,
                    request_id: pkt.request_id,
                },
            );
        }
        self.enqueue(peer, Dir::Up, pkt, now);
        Ok(())
    }

    fn respond(&mut self, peer: usize, req: Packet, now: f64) {
        let bits = self.nodes[peer].draw_size(self.cfg.size_model, self.cfg.mean_data_bits());
        self.enqueue(peer, Dir::Up, req.reply(bits), now);
    }

    fn receive_data(&mut self, peer: usize, pkt: Packet, now: f64) -> Result<()> {
        let in_window = self.window.contains(now);
        if in_window {
            self.stats.raw_bits[peer] += pkt.size_bits;
        }
        let thread = pkt.thread;
        match on_data_arrival(&self.nodes[peer].threads[thread], &pkt) {
            ArrivalOutcome::Deliver => {
                let sent_at = self.nodes[peer].threads[thread].request_sent_at;
                if in_window {
                    self.stats.good_bits[peer] += pkt.size_bits;
                }
                if self.window.contains(sent_at) {
                    self.stats.data_ontime += 1;
                    self.stats.rtt_samples.push(now - sent_at);
                }
                self.record(now, "deliver", peer, thread, pkt.request_id)?;
                self.nodes[peer].threads[thread].phase = Phase::Idle;
                self.send_request(peer, thread, now)?;
            }
            ArrivalOutcome::DropStale => {
                if self.window.contains(pkt.issued_at) {
                    self.stats.data_late_dropped += 1;
                }
                self.record(now, "stale", peer, thread, pkt.request_id)?;
            }
        }
        Ok(())
    }

    fn timer_fired(&mut self, peer: usize, thread: usize, request_id: u64, now: f64) -> Result<()> {
        let t = &self.nodes[peer].threads[thread];
        if t.phase != Phase::Waiting || t.current_request_id != request_id {
            // request already answered; the timer was implicitly cancelled
            return Ok(());
        }
        if self.window.contains(t.request_sent_at) {
            self.stats.timeouts += 1;
        }
        self.record(now, "timeout", peer, thread, request_id)?;
        let pkt = self.nodes[peer].on_timer_fired(thread, now, &self.ctx)?;
        self.after_issue(peer, thread, pkt, now)
    }

    fn link(&mut self, peer: usize, dir: Dir) -> &mut Link {
        match dir {
            Dir::Up => &mut self.up[peer],
            Dir::Down => &mut self.down[peer],
        }
    }

    fn enqueue(&mut self, peer: usize, dir: Dir, pkt: Packet, now: f64) {
        let link = self.link(peer, dir);
        link.queue.push_back(pkt);
        if !link.busy {
            self.start_service(peer, dir, now);
        }
    }

    fn release(&mut self, peer: usize, dir: Dir, now: f64) {
        self.link(peer, dir).busy = false;
        self.start_service(peer, dir, now);
    }

    /// Serve from the head of an idle link. Requests pass through without
    /// occupying the server, so several may leave before the next data packet.
    fn start_service(&mut self, peer: usize, dir: Dir, now: f64) {
        let bps = match dir {
            Dir::Up => self.cfg.uplink_bps,
            Dir::Down => self.cfg.downlink_bps,
        };
        let resample = self.cfg.resample_size_per_link && dir == Dir::Down;
        while let Some(mut pkt) = self.link(peer, dir).queue.pop_front() {
            if resample {
                let fresh = self.nodes[peer].draw_size(self.cfg.size_model, self.cfg.mean_data_bits());
                match pkt.kind {
                    PacketKind::Data => pkt.size_bits = fresh,
                    PacketKind::Request => pkt.latency_bits = fresh,
                }
            }
            let done = |pkt, releases| match dir {
                Dir::Up => EventKind::UplinkServiceDone {
                    peer,
                    pkt,
                    releases,
                },
                Dir::Down => EventKind::DownlinkServiceDone {
                    peer,
                    pkt,
                    releases,
                },
            };
            match pkt.kind {
                PacketKind::Request => {
                    let at = now + request_latency(&pkt, bps);
                    self.queue.schedule(at, done(pkt, false));
                }
                PacketKind::Data => {
                    let end = now + service_time(&pkt, bps);
                    let busy = self.window.overlap(now, end);
                    let link = self.link(peer, dir);
                    link.busy = true;
                    link.busy_in_window += busy;
                    self.queue.schedule(end, done(pkt, true));
                    break;
                }
            }
        }
    }

    fn finish(self) -> Result<SimReport> {
        let Engine {
            cfg,
            window,
            nodes,
            up,
            down,
            stats,
            events,
            ..
        } = self;
        let pending_at_end = nodes
            .iter()
            .flat_map(|n| n.threads.iter())
            .filter(|t| t.phase == Phase::Waiting && window.contains(t.request_sent_at))
            .count() as u64;
        let n = cfg.n_peers as f64;
        let span = window.len();
        let per_peer = |bits: &[f64]| bits.iter().map(|b| b / span / cfg.downlink_bps).sum::<f64>() / n;
        let util = |links: &[Link]| {
            let fr: Vec<f64> = links.iter().map(|l| l.busy_in_window / span).collect();
            (
                fr.iter().sum::<f64>() / n,
                fr.iter().copied().fold(0.0, f64::max),
            )
        };
        let (up_mean, up_max) = util(&up);
        let (down_mean, down_max) = util(&down);
        let rtt_mean = if stats.rtt_samples.is_empty() {
            f64::NAN
        } else {
            stats.rtt_samples.iter().sum::<f64>() / stats.rtt_samples.len() as f64
        };
        let resolved = stats.timeouts + stats.data_ontime;
        Ok(SimReport {
            requests_sent: stats.requests_sent,
            data_ontime: stats.data_ontime,
            data_late_dropped: stats.data_late_dropped,
            timeouts: stats.timeouts,
            pending_at_end,
            rtt_mean,
            p_timeout_empirical: if resolved == 0 {
                0.0
            } else {
                stats.timeouts as f64 / resolved as f64
            },
            gamma_good: per_peer(&stats.good_bits),
            gamma_raw: per_peer(&stats.raw_bits),
            rtt_samples: stats.rtt_samples,
            uplink_utilization: up_mean,
            downlink_utilization: down_mean,
            uplink_utilization_max: up_max,
            downlink_utilization_max: down_max,
            events,
        })
    }
}
