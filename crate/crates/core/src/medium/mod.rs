//! Deterministic baseband medium: per-link delay, gain and AWGN, linear
//! superposition of overlapping transmissions, and a network event loop
//! driving radio nodes on a shared tick clock.

mod network;
mod noise;
mod topology;

pub use network::{EmissionRecord, Network, SEGMENT_MARGIN_TICKS};
pub use noise::NoiseStream;
pub use topology::{parse_topology, LinkSpec, NodeSpec, Topology};

use crate::mas::Tick;
use crate::phy::{IqBuffer, PhyConfig, SAMPLES_PER_TICK};
use num_complex::Complex64;
use std::collections::BTreeMap;

pub type NodeId = usize;

/// One direction of a radio link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkModel {
    pub delay_ticks: Tick,
    /// Signal-to-noise ratio per chip; `f64::INFINITY` disables noise.
    pub chip_snr_db: f64,
    pub gain: f64,
}

impl Default for LinkModel {
    fn default() -> Self {
        LinkModel { delay_ticks: 0, chip_snr_db: f64::INFINITY, gain: 1.0 }
    }
}

impl LinkModel {
    pub fn ideal() -> Self {
        Self::default()
    }

    pub fn with_snr(chip_snr_db: f64) -> Self {
        LinkModel { chip_snr_db, ..Self::default() }
    }

    /// Noise standard deviation per real dimension at the receiver, chosen
    /// so that the matched-filter chip decision sees `chip_snr_db`:
    /// `sigma = gain * amplitude * sqrt(spc / (2 * snr))`.
    pub fn noise_sigma(&self, phy: &PhyConfig) -> f64 {
        if self.chip_snr_db == f64::INFINITY {
            return 0.0;
        }
        let snr = 10f64.powf(self.chip_snr_db / 10.0);
        let spc = phy.samples_per_chip() as f64;
        self.gain * phy.amplitude * (spc / (2.0 * snr)).sqrt()
    }
}

/// A peer and the link models in both directions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeerLink {
    pub peer: NodeId,
    pub to_peer: LinkModel,
    pub from_peer: LinkModel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transmission {
    pub src: NodeId,
    /// `iq.start_tick` is the transmitter's start tick.
    pub iq: IqBuffer,
}

impl Transmission {
    pub fn end_tick(&self) -> Tick {
        self.iq.start_tick + self.iq.duration_ticks()
    }
}

#[derive(Debug, Clone)]
struct Link {
    model: LinkModel,
    noise: NoiseStream,
}

/// Sum of delayed, scaled transmissions plus per-link noise, as seen by each
/// receiver. Rendering is random access: any sample span can be produced at
/// any time and always yields the same values.
#[derive(Debug, Clone)]
pub struct Medium {
    seed: u64,
    nodes: usize,
    links: BTreeMap<(NodeId, NodeId), Link>,
    /// Configuration each node receives with (sets the noise scale).
    rx_phy: Vec<PhyConfig>,
    txs: Vec<Transmission>,
    cursors: Vec<u64>,
}

impl Medium {
    pub fn new(seed: u64) -> Self {
        Medium { seed, nodes: 0, links: BTreeMap::new(), rx_phy: Vec::new(), txs: Vec::new(), cursors: Vec::new() }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    pub fn attach_node(&mut self, links: &[PeerLink]) -> NodeId {
        let id = self.nodes;
        self.nodes += 1;
        self.rx_phy.push(PhyConfig::default());
        self.cursors.push(0);
        for l in links {
            self.set_link(id, l.peer, l.to_peer);
            self.set_link(l.peer, id, l.from_peer);
        }
        id
    }

    /// Noise on a link is drawn from a stream keyed by `(src, dst)`, so
    /// adding or changing other links leaves it untouched.
    pub fn set_link(&mut self, src: NodeId, dst: NodeId, model: LinkModel) {
        assert!(src < self.nodes && dst < self.nodes && src != dst, "bad link {src}->{dst}");
        let stream = ((src as u64) << 32) | dst as u64;
        self.links.insert((src, dst), Link { model, noise: NoiseStream::new(self.seed, stream) });
    }

    pub fn link(&self, src: NodeId, dst: NodeId) -> Option<&LinkModel> {
        self.links.get(&(src, dst)).map(|l| &l.model)
    }

    pub fn set_rx_phy(&mut self, node: NodeId, phy: PhyConfig) {
        self.rx_phy[node] = phy;
    }

    pub fn transmit(&mut self, src: NodeId, iq: IqBuffer) {
        self.txs.push(Transmission { src, iq });
    }

    pub fn transmissions(&self) -> &[Transmission] {
        &self.txs
    }

    /// Arrival span `[start, end)` of a transmission at `dst`, if linked.
    pub fn arrival(&self, tx: &Transmission, dst: NodeId) -> Option<(Tick, Tick)> {
        let link = self.links.get(&(tx.src, dst))?;
        let d = link.model.delay_ticks;
        Some((tx.iq.start_tick + d, tx.end_tick() + d))
    }

    /// Received samples at `dst` for ticks `[from, to)`. While `dst` is
    /// transmitting its receiver is off and yields zeros.
    pub fn render(&self, dst: NodeId, from: Tick, to: Tick) -> IqBuffer {
        let first = from * SAMPLES_PER_TICK;
        let len = (to.saturating_sub(from) * SAMPLES_PER_TICK) as usize;
        let mut out = vec![Complex64::new(0.0, 0.0); len];
        let last = first + len as u64;
        for tx in &self.txs {
            let Some(link) = self.links.get(&(tx.src, dst)) else { continue };
            let at = (tx.iq.start_tick + link.model.delay_ticks) * SAMPLES_PER_TICK;
            let lo = at.max(first);
            let hi = (at + tx.iq.len() as u64).min(last);
            let g = link.model.gain;
            for n in lo..hi {
                out[(n - first) as usize] += g * tx.iq.samples[(n - at) as usize];
            }
        }
        let phy = &self.rx_phy[dst];
        for (_, link) in self.links.iter().filter(|((_, d), _)| *d == dst) {
            link.noise.add_to(first, link.model.noise_sigma(phy), &mut out);
        }
        for tx in self.txs.iter().filter(|t| t.src == dst) {
            let at = tx.iq.start_sample();
            let lo = at.max(first);
            let hi = (at + tx.iq.len() as u64).min(last);
            for n in lo..hi {
                out[(n - first) as usize] = Complex64::new(0.0, 0.0);
            }
        }
        IqBuffer::new(out, from)
    }

    /// Streams every node's received signal up to tick `to`, continuing
    /// from the previous call.
    pub fn deliver(&mut self, to: Tick) -> Vec<IqBuffer> {
        (0..self.nodes)
            .map(|n| {
                let from = self.cursors[n].min(to);
                self.cursors[n] = to.max(self.cursors[n]);
                self.render(n, from, to)
            })
            .collect()
    }

    /// Forgets transmissions that ended (at every receiver) before `tick`.
    pub fn prune(&mut self, tick: Tick) {
        let max_delay = self.links.values().map(|l| l.model.delay_ticks).max().unwrap_or(0);
        self.txs.retain(|t| t.end_tick() + max_delay >= tick);
    }
}
