//! Per-thread stop-wait logic.
//!
//! A thread composes a request with a fresh id, sends it and starts a timer,
//! then waits. A data packet carrying the outstanding id is delivered and
//! frees the thread; any other data packet is dropped and the thread keeps
//! waiting. When the timer fires the thread gives up on the request and
//! issues a brand-new one to a newly drawn peer.

use crate::analytic::Timeout;
use crate::error::{param, Result};
use crate::sim::config::SizeModel;
use crate::sim::packet::{Packet, PacketKind};
use crate::stats::{derive_stream, sample_exponential, RngStream};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Idle,
    Waiting,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThreadState {
    pub owner: usize,
    pub current_request_id: u64,
    pub phase: Phase,
    pub request_sent_at: f64,
    pub timer_deadline: Option<f64>,
}

impl ThreadState {
    pub fn new(owner: usize) -> Self {
        Self {
            owner,
            current_request_id: 0,
            phase: Phase::Idle,
            request_sent_at: 0.0,
            timer_deadline: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArrivalOutcome {
    Deliver,
    DropStale,
}

/// Match an arriving data packet against its thread's outstanding request.
pub fn on_data_arrival(thread: &ThreadState, pkt: &Packet) -> ArrivalOutcome {
    debug_assert_eq!(pkt.kind, PacketKind::Data);
    if thread.phase == Phase::Waiting && pkt.request_id == thread.current_request_id {
        ArrivalOutcome::Deliver
    } else {
        ArrivalOutcome::DropStale
    }
}

/// Uniform draw over the `n - 1` peers other than `me`.
pub fn select_destination(me: usize, n: usize, stream: &mut RngStream) -> Result<usize> {
    if n < 2 {
        return param(format!("need at least 2 peers to pick a destination, got {n}"));
    }
    let r = stream.below(n as u64 - 1) as usize;
    Ok(if r >= me { r + 1 } else { r })
}

/// Shared knobs a node needs to compose requests.
#[derive(Clone, Copy, Debug)]
pub struct RequestContext {
    pub n_peers: usize,
    pub tout: Timeout<f64>,
    pub size_model: SizeModel,
    pub mean_data_bits: f64,
}

/// Requester and responder state of one peer.
#[derive(Clone, Debug)]
pub struct Node {
    pub id: usize,
    /// Largest request id assigned so far; shared by all threads of the node.
    pub local_request_id: u64,
    next_data_id: u64,
    dest_stream: RngStream,
    size_stream: RngStream,
    pub threads: Vec<ThreadState>,
}

impl Node {
    pub fn new(id: usize, threads: u32, seed: u64) -> Self {
        Self {
            id,
            local_request_id: 0,
            next_data_id: 0,
            dest_stream: derive_stream(seed, &format!("peer-{id}/dest")),
            size_stream: derive_stream(seed, &format!("peer-{id}/size")),
            threads: (0..threads).map(|_| ThreadState::new(id)).collect(),
        }
    }

    /// Draw a packet size in bits.
    pub fn draw_size(&mut self, model: SizeModel, mean_bits: f64) -> f64 {
        match model {
            SizeModel::Fixed => mean_bits,
            SizeModel::Exponential => sample_exponential(&mut self.size_stream, mean_bits)
                .expect("mean validated with the scenario"),
        }
    }

    /// Compose and register a new request for `thread`, sent at `now`.
    pub fn issue_request(
        &mut self,
        thread: usize,
        now: f64,
        ctx: &RequestContext,
    ) -> Result<Packet> {
        let dst = select_destination(self.id, ctx.n_peers, &mut self.dest_stream)?;
        self.next_data_id += 1;
        self.local_request_id += 1;
        let latency_bits = self.draw_size(ctx.size_model, ctx.mean_data_bits);
        let request_id = self.local_request_id;
        let t = &mut self.threads[thread];
        t.current_request_id = request_id;
        t.phase = Phase::Waiting;
        t.request_sent_at = now;
        t.timer_deadline = ctx.tout.finite().map(|d| now + d);
        Ok(Packet {
            kind: PacketKind::Request,
            request_id,
            data_id: self.next_data_id,
            src: self.id,
            dst,
            thread,
            size_bits: 0.0,
            latency_bits,
            issued_at: now,
        })
    }

    /// Abandon the outstanding request of `thread` and issue a brand-new one.
    pub fn on_timer_fired(
        &mut self,
        thread: usize,
        now: f64,
        ctx: &RequestContext,
    ) -> Result<Packet> {
        let t = &self.threads[thread];
        if t.phase != Phase::Waiting {
            return param(format!("timer fired on idle thread {thread} of peer {}", self.id));
        }
        self.threads[thread].phase = Phase::Idle;
        self.issue_request(thread, now, ctx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(n: usize, tout: Timeout<f64>) -> RequestContext {
        RequestContext {
            n_peers: n,
            tout,
            size_model: SizeModel::Fixed,
            mean_data_bits: 8000.0,
        }
    }

    fn waiting(id: u64) -> ThreadState {
        ThreadState {
            owner: 0,
            current_request_id: id,
            phase: Phase::Waiting,
            request_sent_at: 0.0,
            timer_deadline: Some(2.0),
        }
    }

    fn data_for(id: u64) -> Packet {
        Packet {
            kind: PacketKind::Data,
            request_id: id,
            data_id: 1,
            src: 1,
            dst: 0,
            thread: 0,
            size_bits: 8000.0,
            latency_bits: 0.0,
            issued_at: 0.0,
        }
    }

    #[test]
    fn matching_id_is_delivered() {
        assert_eq!(on_data_arrival(&waiting(5), &data_for(5)), ArrivalOutcome::Deliver);
    }

    #[test]
    fn older_id_is_dropped() {
        assert_eq!(on_data_arrival(&waiting(5), &data_for(4)), ArrivalOutcome::DropStale);
    }

    #[test]
    fn data_for_abandoned_request_is_dropped() {
        let mut node = Node::new(0, 1, 3);
        let c = ctx(4, Timeout::Finite(2.0));
        for _ in 0..5 {
            node.issue_request(0, 0.0, &c).unwrap();
            node.threads[0].phase = Phase::Idle;
        }
        node.issue_request(0, 0.0, &c).unwrap();
        assert_eq!(node.threads[0].current_request_id, 6);
        assert_eq!(
            on_data_arrival(&node.threads[0], &data_for(5)),
            ArrivalOutcome::DropStale
        );
    }

    #[test]
    fn idle_thread_drops_everything() {
        let mut t = waiting(5);
        t.phase = Phase::Idle;
        assert_eq!(on_data_arrival(&t, &data_for(5)), ArrivalOutcome::DropStale);
    }

    #[test]
    fn timer_issues_fresh_request() {
        let c = ctx(50, Timeout::Finite(2.0));
        let mut node = Node::new(0, 1, 11);
        node.local_request_id = 6;
        let first = node.issue_request(0, 1.0, &c).unwrap();
        assert_eq!(first.request_id, 7);
        let mut redrawn = false;
        let mut prev = first;
        for k in 0..20 {
            let now = 3.0 + 2.0 * k as f64;
            let next = node.on_timer_fired(0, now, &c).unwrap();
            assert_eq!(next.request_id, prev.request_id + 1);
            assert!(next.data_id > prev.data_id);
            assert_eq!(node.threads[0].timer_deadline, Some(now + 2.0));
            assert_eq!(node.threads[0].request_sent_at, now);
            redrawn |= next.dst != prev.dst;
            assert_eq!(
                on_data_arrival(&node.threads[0], &data_for(prev.request_id)),
                ArrivalOutcome::DropStale
            );
            prev = next;
        }
        assert!(redrawn);
    }

    #[test]
    fn timer_on_idle_thread_is_an_error() {
        let mut node = Node::new(0, 1, 1);
        assert!(node.on_timer_fired(0, 0.0, &ctx(3, Timeout::Finite(1.0))).is_err());
    }

    #[test]
    fn no_deadline_without_timer() {
        let mut node = Node::new(0, 1, 1);
        node.issue_request(0, 0.0, &ctx(3, Timeout::Infinite)).unwrap();
        assert_eq!(node.threads[0].timer_deadline, None);
    }

    #[test]
    fn two_peers_always_pick_the_other() {
        let mut s = derive_stream(1, "d");
        for _ in 0..1000 {
            assert_eq!(select_destination(0, 2, &mut s).unwrap(), 1);
            assert_eq!(select_destination(1, 2, &mut s).unwrap(), 0);
        }
    }

    #[test]
    fn destination_needs_two_peers() {
        let mut s = derive_stream(1, "d");
        assert!(select_destination(0, 1, &mut s).is_err());
    }

    #[test]
    fn destination_is_deterministic() {
        let mut a = derive_stream(5, "peer-3/dest");
        let mut b = a.clone();
        for _ in 0..100 {
            assert_eq!(
                select_destination(3, 10, &mut a).unwrap(),
                select_destination(3, 10, &mut b).unwrap()
            );
        }
    }

    #[test]
    fn destination_uniformity_chi_square() {
        let mut s = derive_stream(2024, "uniformity");
        let me = 4;
        let draws = 100_000;
        let mut counts = [0u64; 10];
        for _ in 0..draws {
            counts[select_destination(me, 10, &mut s).unwrap()] += 1;
        }
        assert_eq!(counts[me], 0);
        let expected = draws as f64 / 9.0;
        let chi2: f64 = counts
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != me)
            .map(|(_, &c)| (c as f64 - expected).powi(2) / expected)
            .sum();
        // chi-square critical value, 8 dof, alpha = 0.01
        assert!(chi2 < 20.090, "chi2 = {chi2}");
    }
}
