#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PacketKind {
    Request,
    Data,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Packet {
    pub kind: PacketKind,
    /// Copied from the request into its data reply.
    pub request_id: u64,
    pub data_id: u64,
    pub src: usize,
    pub dst: usize,
    /// Issuing thread at the requester; the reply is routed back to it.
    pub thread: usize,
    /// Link load in bits. Always 0 for requests.
    pub size_bits: f64,
    /// Requests carry no load but are still serialized: a request leaves a
    /// link this many bit-times after reaching the head of the queue, without
    /// holding the link. Always 0 for data.
    pub latency_bits: f64,
    /// Emission time of the originating request.
    pub issued_at: f64,
}

impl Packet {
    /// The reply for this request, sent by `self.dst` back to `self.src`.
    pub fn reply(&self, size_bits: f64) -> Packet {
        debug_assert_eq!(self.kind, PacketKind::Request);
        Packet {
            kind: PacketKind::Data,
            request_id: self.request_id,
            data_id: self.data_id,
            src: self.dst,
            dst: self.src,
            thread: self.thread,
            size_bits,
            latency_bits: 0.0,
            issued_at: self.issued_at,
        }
    }
}

/// Time the packet holds a link of the given rate. Requests add no load.
pub fn service_time(pkt: &Packet, link_bps: f64) -> f64 {
    match pkt.kind {
        PacketKind::Data => pkt.size_bits / link_bps,
        PacketKind::Request => 0.0,
    }
}

/// Non-blocking serialization delay of a request on a link of the given rate.
pub(crate) fn request_latency(pkt: &Packet, link_bps: f64) -> f64 {
    match pkt.kind {
        PacketKind::Request => pkt.latency_bits / link_bps,
        PacketKind::Data => 0.0,
    }
}
