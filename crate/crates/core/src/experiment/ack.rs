use super::{csv_header, ExperimentError};
use crate::controller::RadioConfig;
use crate::mas::{MasEvent, Tick};
use crate::medium::{EmissionRecord, LinkModel, Network, Topology};

#[derive(Debug, Clone, PartialEq)]
pub struct AckParams {
    pub frames: usize,
    /// Data frames start on multiples of this period.
    pub period_ticks: Tick,
    /// Overrides the responder's processing latency when set.
    pub proc_latency: Option<Tick>,
    /// Including the FCS.
    pub psdu_len: usize,
    pub config: RadioConfig,
    pub topology: Topology,
    pub seed: u64,
}

impl Default for AckParams {
    fn default() -> Self {
        AckParams {
            frames: 100,
            period_ticks: 10_000,
            proc_latency: None,
            psdu_len: 20,
            config: RadioConfig::default(),
            topology: Topology::pair(LinkModel::ideal()),
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AckRow {
    pub seq: u8,
    pub tx_tick: Tick,
    /// End of the data frame at the responder; `None` if it was lost.
    pub rx_end_tick: Option<Tick>,
    pub ack_tick: Option<Tick>,
}

impl AckRow {
    pub fn turnaround_observed(&self) -> Option<i64> {
        Some(self.ack_tick? as i64 - self.rx_end_tick? as i64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AckReport {
    pub rows: Vec<AckRow>,
    /// Turnaround plus processing latency configured at the responder.
    pub expected_turnaround: Tick,
    pub emissions: Vec<EmissionRecord>,
}

impl AckReport {
    /// Largest |observed - expected| over acknowledged frames.
    pub fn max_error(&self) -> Option<u64> {
        self.rows
            .iter()
            .filter_map(|r| r.turnaround_observed())
            .map(|t| t.abs_diff(self.expected_turnaround as i64))
            .max()
    }

    pub fn missing_acks(&self) -> usize {
        self.rows.iter().filter(|r| r.ack_tick.is_none()).count()
    }

    /// Largest distance of a data start from the scheduling grid.
    pub fn max_grid_deviation(&self, period: Tick) -> Tick {
        self.rows.iter().map(|r| (r.tx_tick % period).min(period - r.tx_tick % period)).max().unwrap_or(0)
    }
}

/// The first topology node sends ACK-requested frames on a fixed grid to
/// the second, which acknowledges automatically. Each frame exchange is
/// finished before the next grid slot.
pub fn run_demo_ack(p: &AckParams) -> Result<AckReport, ExperimentError> {
    if p.topology.nodes.len() < 2 {
        return Err(ExperimentError::Param("the ACK demo needs two nodes".into()));
    }
    if p.period_ticks == 0 || p.frames == 0 {
        return Err(ExperimentError::Param("frames and period must be positive".into()));
    }
    let mut net = Network::from_topology(&p.topology, p.config, p.seed)?;
    let (a, b) = (0, 1);
    if let Some(lat) = p.proc_latency {
        let mut cfg = *net.node(b).config();
        cfg.mas.processing_latency_ticks = lat;
        net.node_mut(b).apply_config(&cfg)?;
    }
    let expected = {
        let m = &net.node(b).config().mas;
        m.turnaround_ticks + m.processing_latency_ticks
    };
    let mut rows = Vec::with_capacity(p.frames);
    let mut emissions = Vec::new();
    for k in 0..p.frames {
        let seq = k as u8;
        let slot = (k as Tick + 1) * p.period_ticks;
        let psdu = super::data_mpdu(seq, p.psdu_len)?;
        let h = net.node_mut(a).load_packet(&psdu, true, seq)?;
        net.node_mut(a).set_transmission_time(h, slot)?;
        net.run_until(slot + p.period_ticks - 1);
        while net.node_mut(a).get_packet().is_some() {}
        while net.node_mut(b).get_packet().is_some() {}

        let em = net.take_emissions();
        let tx_tick = em.iter().find(|e| e.src == a && !e.is_ack).map_or(slot, |e| e.start_tick);
        let ack_tick = em.iter().find(|e| e.src == b && e.is_ack && e.seq == seq).map(|e| e.start_tick);
        let rx_end_tick = net.node_mut(b).drain_log().into_iter().find_map(|e| match e {
            MasEvent::RxEnd { tick, seq: Some(s), crc_ok: true, .. } if s == seq => Some(tick),
            _ => None,
        });
        net.node_mut(a).drain_log();
        emissions.extend(em);
        rows.push(AckRow { seq, tx_tick, rx_end_tick, ack_tick });
    }
    Ok(AckReport { rows, expected_turnaround: expected, emissions })
}

impl AckParams {
    pub fn csv(&self, report: &AckReport) -> String {
        let extra = [
            ("frames", self.frames.to_string()),
            ("period_ticks", self.period_ticks.to_string()),
            ("expected_turnaround_ticks", report.expected_turnaround.to_string()),
        ];
        let mut s = csv_header("demo-ack", self.seed, &self.config, &extra);
        s.push_str("seq,tx_tick,rx_end_tick,ack_tick,turnaround_observed\n");
        let opt = |v: Option<Tick>| v.map_or(String::new(), |t| t.to_string());
        for r in &report.rows {
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                r.seq,
                r.tx_tick,
                opt(r.rx_end_tick),
                opt(r.ack_tick),
                r.turnaround_observed().map_or(String::new(), |t| t.to_string())
            ));
        }
        s
    }
}
