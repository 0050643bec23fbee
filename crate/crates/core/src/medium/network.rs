use super::{LinkModel, Medium, NodeId, Topology};
use crate::controller::{RadioConfig, RadioController, RegError};
use crate::mas::{Handle, Tick};
use crate::phy::PhyConfig;

/// Silence kept around each burst of arrivals so the receiver's preamble
/// search sees clean edges.
pub const SEGMENT_MARGIN_TICKS: Tick = 8;

/// A frame put on air by some node.
#[derive(Debug, Clone, PartialEq)]
pub struct EmissionRecord {
    pub src: NodeId,
    pub handle: Handle,
    pub seq: u8,
    pub is_ack: bool,
    pub start_tick: Tick,
    pub end_tick: Tick,
    pub psdu: Vec<u8>,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    start: Tick,
    end: Tick,
    /// Receiver configuration when the first arrival was put on air.
    phy: PhyConfig,
}

/// Radio nodes attached to one medium and advanced together.
///
/// Each receiver gets its input in busy periods: the span from just before
/// the first arrival to just after the last overlapping arrival ends. The
/// span is rendered and demodulated once it is complete.
#[derive(Debug, Clone)]
pub struct Network {
    medium: Medium,
    nodes: Vec<RadioController>,
    names: Vec<String>,
    open: Vec<Option<Segment>>,
    emissions: Vec<EmissionRecord>,
    now: Tick,
}

impl Network {
    pub fn new(seed: u64) -> Self {
        Network {
            medium: Medium::new(seed),
            nodes: Vec::new(),
            names: Vec::new(),
            open: Vec::new(),
            emissions: Vec::new(),
            now: 0,
        }
    }

    /// Builds every node of `topo` from `base` plus its register section.
    /// `seed` applies when the file does not set one.
    pub fn from_topology(topo: &Topology, base: RadioConfig, seed: u64) -> Result<Self, RegError> {
        let mut net = Network::new(topo.seed.unwrap_or(seed));
        for spec in &topo.nodes {
            let id = net.add_node(&spec.name, base)?;
            let mut regs = spec.registers.clone();
            regs.entries.retain(|e| !e.key.is_empty());
            net.nodes[id].restore_section(&regs)?;
        }
        for l in &topo.links {
            let (s, d) = (topo.node_index(&l.src).unwrap(), topo.node_index(&l.dst).unwrap());
            net.set_link(s, d, l.model);
        }
        Ok(net)
    }

    pub fn add_node(&mut self, name: &str, cfg: RadioConfig) -> Result<NodeId, RegError> {
        let ctrl = RadioController::new(cfg)?;
        let id = self.medium.attach_node(&[]);
        self.nodes.push(ctrl);
        self.names.push(name.to_string());
        self.open.push(None);
        Ok(id)
    }

    pub fn set_link(&mut self, src: NodeId, dst: NodeId, model: LinkModel) {
        self.medium.set_link(src, dst, model);
    }

    pub fn node(&self, id: NodeId) -> &RadioController {
        &self.nodes[id]
    }

    pub fn node_mut(&mut self, id: NodeId) -> &mut RadioController {
        &mut self.nodes[id]
    }

    pub fn node_id(&self, name: &str) -> Option<NodeId> {
        self.names.iter().position(|n| n == name)
    }

    pub fn name(&self, id: NodeId) -> &str {
        &self.names[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn medium(&self) -> &Medium {
        &self.medium
    }

    pub fn now(&self) -> Tick {
        self.now
    }

    /// Frames emitted since the last call, in emission order.
    pub fn take_emissions(&mut self) -> Vec<EmissionRecord> {
        std::mem::take(&mut self.emissions)
    }

    pub fn next_tick(&self) -> Option<Tick> {
        let nodes = self.nodes.iter().filter_map(|n| n.next_event_tick());
        let segs = self.open.iter().flatten().map(|s| s.end);
        nodes.chain(segs).min()
    }

    /// Processes every event up to and including tick `to`.
    pub fn run_until(&mut self, to: Tick) {
        while let Some(t) = self.next_tick() {
            if t > to {
                break;
            }
            self.step_at(t);
        }
        for n in &mut self.nodes {
            n.advance(to);
        }
        self.now = self.now.max(to);
    }

    fn step_at(&mut self, t: Tick) {
        self.now = t;
        for id in 0..self.nodes.len() {
            if let Some(seg) = self.open[id].filter(|s| s.end <= t) {
                self.open[id] = None;
                self.medium.set_rx_phy(id, seg.phy);
                let iq = self.medium.render(id, seg.start, seg.end);
                self.nodes[id].deliver_segment_with(iq, seg.end, seg.phy);
            }
        }
        // Advance every node before registering anything, so that frames
        // starting on the same tick do not see each other's carrier.
        let mut emitted = Vec::new();
        for (id, node) in self.nodes.iter_mut().enumerate() {
            emitted.extend(node.advance(t).into_iter().map(|e| (id, e)));
        }
        for (src, e) in emitted {
            let (t0, t1) = (e.start_tick(), e.end_tick());
            self.emissions.push(EmissionRecord {
                src,
                handle: e.handle,
                seq: e.seq,
                is_ack: e.is_ack,
                start_tick: t0,
                end_tick: t1,
                psdu: e.psdu,
            });
            self.medium.transmit(src, e.iq);
            for dst in 0..self.nodes.len() {
                let Some(link) = self.medium.link(src, dst) else { continue };
                let (a, b) = (t0 + link.delay_ticks, t1 + link.delay_ticks);
                self.nodes[dst].note_carrier(a, b);
                let (start, end) = (a.saturating_sub(SEGMENT_MARGIN_TICKS), b + SEGMENT_MARGIN_TICKS);
                let phy = *self.nodes[dst].mas().phy_config();
                self.open[dst] = Some(match self.open[dst] {
                    Some(s) => Segment { start: s.start.min(start), end: s.end.max(end), phy: s.phy },
                    None => Segment { start, end, phy },
                });
            }
        }
        let keep = self.open.iter().flatten().map(|s| s.start).min().unwrap_or(t).min(t);
        self.medium.prune(keep.saturating_sub(SEGMENT_MARGIN_TICKS));
    }
}
