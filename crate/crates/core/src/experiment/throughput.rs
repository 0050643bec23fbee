use super::{csv_header, ExperimentError};
use crate::controller::{RadioConfig, Register};
use crate::frame::{data_fcf, Mpdu};
use crate::mas::{MasEvent, Tick};
use crate::medium::{EmissionRecord, LinkModel, Network, Topology};
use crate::phy::{PhyConfig, SAMPLES_PER_TICK};

/// FCF, sequence number, PAN id, short destination and source addresses,
/// and FCS of the data frames sent by the demos.
pub const MAC_OVERHEAD_OCTETS: usize = 11;

/// Data MPDU with short addressing and a patterned payload filling
/// `psdu_len` octets.
pub fn data_mpdu(seq: u8, psdu_len: usize) -> Result<Vec<u8>, ExperimentError> {
    if psdu_len < MAC_OVERHEAD_OCTETS {
        return Err(ExperimentError::Param(format!("PSDU must be at least {MAC_OVERHEAD_OCTETS} octets")));
    }
    let mut body = vec![0xCD, 0xAB, 0x02, 0x00, 0x01, 0x00];
    body.extend((0..psdu_len - MAC_OVERHEAD_OCTETS).map(|i| (i as u8).wrapping_mul(31).wrapping_add(seq)));
    Ok(Mpdu::new(data_fcf(true), seq, &body).to_bytes())
}

pub fn mac_payload_bits(psdu_len: usize) -> u64 {
    8 * psdu_len.saturating_sub(MAC_OVERHEAD_OCTETS) as u64
}

/// Closed-form ticks from one data frame start to the next in a lossless
/// back-to-back exchange on zero-delay links: data airtime, responder
/// turnaround, ACK airtime, then the sender's inter-frame gap.
pub fn cycle_ticks(phy: &PhyConfig, psdu_len: usize, turnaround: Tick, ifs: Tick) -> Tick {
    let ticks = |psdu: usize| (phy.frame_samples(psdu) as u64).div_ceil(SAMPLES_PER_TICK);
    ticks(psdu_len) + turnaround + ticks(crate::frame::MIN_MPDU_LEN) + ifs
}

/// Register write applied to every node at the first frame boundary at or
/// after `tick`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Switch {
    pub tick: Tick,
    pub register: Register,
    pub value: u32,
}

impl std::str::FromStr for Switch {
    type Err = String;

    /// `TICK:REGISTER=VALUE`, the register given by name or address.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (tick, rest) = s.split_once(':').ok_or("expected TICK:REG=VALUE")?;
        let (reg, value) = rest.split_once('=').ok_or("expected TICK:REG=VALUE")?;
        let tick = crate::kv::parse_uint(tick).ok_or_else(|| format!("bad tick {tick:?}"))?;
        let register = Register::lookup(reg).ok_or_else(|| format!("unknown register {reg:?}"))?;
        let value = crate::kv::parse_uint(value)
            .and_then(|v| u32::try_from(v).ok())
            .ok_or_else(|| format!("bad value {value:?}"))?;
        Ok(Switch { tick, register, value })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThroughputParams {
    pub duration_ticks: Tick,
    pub window_ticks: Tick,
    pub psdu_len: usize,
    /// Gap between receiving an ACK and sending the next frame.
    pub ifs_ticks: Tick,
    pub switches: Vec<Switch>,
    pub config: RadioConfig,
    pub topology: Topology,
    pub seed: u64,
}

impl Default for ThroughputParams {
    fn default() -> Self {
        ThroughputParams {
            duration_ticks: 6_000_000,
            window_ticks: 1_000_000,
            psdu_len: 127,
            ifs_ticks: crate::mas::DEFAULT_TURNAROUND_TICKS,
            switches: Vec::new(),
            config: RadioConfig::default(),
            topology: Topology::pair(LinkModel::ideal()),
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowRow {
    pub window_start_tick: Tick,
    /// Configuration label, or `old->new` when it changed in the window.
    pub config_label: String,
    pub goodput_bps: f64,
    pub acked_frames: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThroughputReport {
    pub windows: Vec<WindowRow>,
    pub frames_sent: u64,
    pub frames_acked: u64,
    pub crc_errors: u64,
    pub emissions: Vec<EmissionRecord>,
}

/// The first node streams ACK-requested frames to the second, sending the
/// next one `ifs_ticks` after each ACK ends (or after a timeout when the
/// ACK is lost). Goodput per window counts MAC payload bits whose ACK
/// ended inside the window.
pub fn run_demo_throughput(p: &ThroughputParams) -> Result<ThroughputReport, ExperimentError> {
    if p.topology.nodes.len() < 2 {
        return Err(ExperimentError::Param("the throughput demo needs two nodes".into()));
    }
    if p.window_ticks == 0 || p.duration_ticks < p.window_ticks {
        return Err(ExperimentError::Param("duration must cover at least one window".into()));
    }
    data_mpdu(0, p.psdu_len)?;
    let mut net = Network::from_topology(&p.topology, p.config, p.seed)?;
    let (a, b) = (0, 1);
    let mut switches = p.switches.clone();
    switches.sort_by_key(|s| s.tick);
    let mut pending = switches.into_iter().peekable();

    // (tick, label) at each configuration change, and ACK completion ticks.
    let mut labels = vec![(0, net.node(a).mas().phy_config().label())];
    let mut acks: Vec<Tick> = Vec::new();
    let mut emissions = Vec::new();
    let (mut sent, mut seq) = (0u64, 0u8);
    let mut t: Tick = 1_000;
    while t < p.duration_ticks {
        net.run_until(t - 1);
        let mut switched = false;
        while let Some(sw) = pending.next_if(|s| s.tick <= t) {
            for id in 0..net.len() {
                net.node_mut(id).write(sw.register, sw.value)?;
            }
            switched = true;
        }
        if switched {
            labels.push((t, net.node(a).mas().phy_config().label()));
        }
        let psdu = data_mpdu(seq, p.psdu_len)?;
        let h = net.node_mut(a).load_packet(&psdu, true, seq)?;
        net.node_mut(a).set_transmission_time(h, t)?;
        sent += 1;

        let phy = *net.node(a).mas().phy_config();
        let mas = net.node(b).config().mas;
        let delay: Tick = p.topology.links.iter().map(|l| l.model.delay_ticks).max().unwrap_or(0);
        let deadline = t
            + cycle_ticks(&phy, p.psdu_len, mas.turnaround_ticks + mas.processing_latency_ticks, 0)
            + 2 * delay
            + 64;
        let mut ack_end = None;
        while let Some(next) = net.next_tick().filter(|&n| n <= deadline) {
            net.run_until(next);
            while let Some(rec) = net.node_mut(a).get_packet() {
                if rec.psdu.len() == crate::frame::MIN_MPDU_LEN && rec.psdu[2] == seq && rec.report.crc_ok {
                    ack_end = Some(rec.rx_end_tick);
                }
            }
            if ack_end.is_some() {
                break;
            }
        }
        while net.node_mut(b).get_packet().is_some() {}
        match ack_end {
            Some(end) => {
                acks.push(end);
                t = end + p.ifs_ticks;
            }
            None => t = deadline.max(net.now()) + 1,
        }
        seq = seq.wrapping_add(1);
        emissions.extend(net.take_emissions());
    }
    net.run_until(p.duration_ticks);
    emissions.extend(net.take_emissions());
    let mut crc_errors = 0;
    for id in 0..net.len() {
        crc_errors += net.node_mut(id).drain_log().iter().filter(|e| matches!(e, MasEvent::CrcError { .. })).count() as u64;
    }

    let bits = mac_payload_bits(p.psdu_len);
    let n_windows = p.duration_ticks / p.window_ticks;
    let windows = (0..n_windows)
        .map(|k| {
            let (lo, hi) = (k * p.window_ticks, (k + 1) * p.window_ticks);
            let acked = acks.iter().filter(|&&e| e >= lo && e < hi).count() as u64;
            let label_at = |t: Tick| labels.iter().rev().find(|(s, _)| *s <= t).unwrap().1.clone();
            let mut label = label_at(lo);
            for (s, l) in labels.iter().filter(|(s, _)| *s > lo && *s < hi) {
                let _ = s;
                if *l != label {
                    label = format!("{label}->{l}");
                }
            }
            WindowRow {
                window_start_tick: lo,
                config_label: label,
                goodput_bps: (acked * bits) as f64 * 1e6 / p.window_ticks as f64,
                acked_frames: acked,
            }
        })
        .collect();
    Ok(ThroughputReport { windows, frames_sent: sent, frames_acked: acks.len() as u64, crc_errors, emissions })
}

impl ThroughputParams {
    pub fn csv(&self, report: &ThroughputReport) -> String {
        let switches: Vec<String> =
            self.switches.iter().map(|s| format!("{}:{}={}", s.tick, s.register.name(), s.value)).collect();
        let extra = [
            ("duration_ticks", self.duration_ticks.to_string()),
            ("window_ticks", self.window_ticks.to_string()),
            ("psdu_len", self.psdu_len.to_string()),
            ("ifs_ticks", self.ifs_ticks.to_string()),
            ("switch_at", if switches.is_empty() { "none".into() } else { switches.join(";") }),
        ];
        let mut s = csv_header("demo-throughput", self.seed, &self.config, &extra);
        s.push_str("window_start_tick,config_label,goodput_bps\n");
        for w in &report.windows {
            s.push_str(&format!("{},{},{:.1}\n", w.window_start_tick, w.config_label, w.goodput_bps));
        }
        s
    }
}
