//! Discrete-event simulator of the multi-thread stop-wait transport.
//!
//! Path of one fetch: requester uplink queue, half the core delay, responder
//! downlink queue; the reply goes responder uplink, half the core delay,
//! requester downlink. All four queues are unbounded FIFOs.

mod config;
mod engine;
mod event;
mod packet;
mod protocol;
mod report;

pub use config::{ScenarioConfig, SizeModel};
pub use engine::{run_simulation, run_simulation_traced};
pub use event::{Event, EventKind, EventQueue};
pub use packet::{service_time, Packet, PacketKind};
pub use protocol::{
    on_data_arrival, select_destination, ArrivalOutcome, Node, Phase, RequestContext, ThreadState,
};
pub use report::SimReport;
