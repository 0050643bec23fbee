use crate::args::{parse_hex, parse_snr_list, PhyArgs};
use anyhow::{bail, Context, Result};
use clap::Args;
use lrwpan_core::experiment::{
    run_ber, run_demo_ack, run_demo_throughput, write_pcap, AckParams, BerParams, Switch, ThroughputParams,
};
use lrwpan_core::frame::pcap::PcapWriter;
use lrwpan_core::medium::parse_topology;
use lrwpan_core::phy::iqfile::{decode_iq, encode_iq, parse_sidecar, sidecar_text};
use lrwpan_core::phy::{rx_frames, tx_frame};
use lrwpan_core::{IqBuffer, LinkModel, PhyConfig, RadioConfig, Tick, Topology};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Args)]
pub struct EncodeArgs {
    /// PSDU as hex (FCS included if wanted).
    #[arg(long, conflicts_with = "psdu_file")]
    psdu: Option<String>,
    /// Read the PSDU bytes from a file.
    #[arg(long)]
    psdu_file: Option<PathBuf>,
    /// IQ output path; the sidecar goes to `<out>.meta`.
    #[arg(short, long, default_value = "frame.iq")]
    out: PathBuf,
    /// Start tick recorded in the sidecar.
    #[arg(long, default_value_t = 0)]
    start_tick: Tick,
    #[command(flatten)]
    phy: PhyArgs,
}

pub fn meta_path(iq: &Path) -> PathBuf {
    let mut s = iq.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

pub fn encode(a: &EncodeArgs) -> Result<()> {
    let psdu = match (&a.psdu, &a.psdu_file) {
        (Some(h), _) => parse_hex(h)?,
        (None, Some(p)) => fs::read(p).with_context(|| format!("reading {}", p.display()))?,
        (None, None) => bail!("give --psdu or --psdu-file"),
    };
    let cfg = a.phy.apply(PhyConfig::default())?;
    let mut iq = tx_frame(&psdu, &cfg)?;
    iq.start_tick = a.start_tick;
    fs::write(&a.out, encode_iq(&iq.samples)).with_context(|| format!("writing {}", a.out.display()))?;
    let meta = meta_path(&a.out);
    fs::write(&meta, sidecar_text(&iq, &cfg)).with_context(|| format!("writing {}", meta.display()))?;
    let ppdu = cfg.frame.ppdu_len(psdu.len());
    println!(
        "ppdu_octets={ppdu} chips={} samples={} airtime_us={} standard_compliant={}",
        cfg.chips_for_octets(ppdu),
        iq.len(),
        cfg.airtime_us(ppdu),
        cfg.is_standard_compliant()
    );
    Ok(())
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    /// Interleaved float32 little-endian IQ file.
    input: PathBuf,
    /// Write decoded frames to a pcap capture.
    #[arg(long)]
    pcap: Option<PathBuf>,
    #[command(flatten)]
    phy: PhyArgs,
}

pub fn decode(a: &DecodeArgs) -> Result<()> {
    let bytes = fs::read(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let samples = decode_iq(&bytes)?;
    let meta = meta_path(&a.input);
    let (start_tick, base) = if meta.exists() {
        parse_sidecar(&fs::read_to_string(&meta)?).with_context(|| format!("parsing {}", meta.display()))?
    } else {
        (0, PhyConfig::default())
    };
    let cfg = a.phy.apply(base)?;
    let iq = IqBuffer::new(samples, start_tick);
    let mut pcap = match &a.pcap {
        Some(p) => Some(PcapWriter::new(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?)?),
        None => None,
    };
    let mut count = 0;
    for f in rx_frames(&iq, &cfg).into_iter().filter(|f| f.report.sfd_found) {
        let r = &f.report;
        println!(
            "frame offset={} lqi={} rssi_db={:.2} crc={} len={} psdu={}",
            r.sync_sample_offset,
            r.lqi,
            r.rssi_db,
            if r.crc_ok { "OK" } else { "BAD" },
            f.psdu.len(),
            hex::encode(&f.psdu)
        );
        if let (Some(w), false) = (pcap.as_mut(), f.psdu.is_empty()) {
            w.write_frame(start_tick + r.sync_sample_offset as u64 / 8, &f.psdu)?;
        }
        count += 1;
    }
    println!("frames={count}");
    Ok(())
}

fn emit(csv_path: &Option<PathBuf>, csv: &str) -> Result<()> {
    match csv_path {
        Some(p) => fs::write(p, csv).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(csv.as_bytes())?;
            Ok(())
        }
    }
}

/// Prints a summary line to stdout when the CSV went to a file and to
/// stderr when it went to stdout.
fn summary(csv_path: &Option<PathBuf>, line: &str) {
    if csv_path.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
}

#[derive(Debug, Args)]
pub struct BerArgs {
    /// Comma-separated chip SNRs in dB (`inf` allowed).
    #[arg(long, default_value = "0,2,4.32,6,inf")]
    snr: String,
    /// Frames per SNR point.
    #[arg(long, default_value_t = 120)]
    frames: usize,
    /// PSDU length including the FCS.
    #[arg(long, default_value_t = 127)]
    psdu_len: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    phy: PhyArgs,
}

pub fn ber(a: &BerArgs) -> Result<()> {
    let params = BerParams {
        snr_db: parse_snr_list(&a.snr)?,
        frames: a.frames,
        psdu_len: a.psdu_len,
        phy: a.phy.apply(PhyConfig::default())?,
        seed: a.seed,
    };
    let points = run_ber(&params)?;
    emit(&a.csv, &params.csv(&points))
}

fn load_topology(path: &Option<PathBuf>) -> Result<Topology> {
    match path {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            parse_topology(&text).with_context(|| format!("parsing {}", p.display()))
        }
        None => Ok(Topology::pair(LinkModel::ideal())),
    }
}

fn radio_config(phy: &PhyArgs, proc_latency: Option<Tick>) -> Result<RadioConfig> {
    let mut cfg = RadioConfig::default();
    cfg.phy = phy.apply(cfg.phy)?;
    if let Some(l) = proc_latency {
        cfg.mas.processing_latency_ticks = l;
    }
    Ok(cfg)
}

fn write_capture(path: &Option<PathBuf>, emissions: &[lrwpan_core::medium::EmissionRecord]) -> Result<()> {
    if let Some(p) = path {
        let f = fs::File::create(p).with_context(|| format!("creating {}", p.display()))?;
        write_pcap(std::io::BufWriter::new(f), emissions)?.flush()?;
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct AckArgs {
    #[arg(long, default_value_t = 100)]
    frames: usize,
    /// Scheduling grid in ticks.
    #[arg(long, default_value_t = 10_000)]
    period: Tick,
    /// Responder processing latency added to the turnaround, in ticks.
    #[arg(long)]
    proc_latency: Option<Tick>,
    /// PSDU length including the FCS.
    #[arg(long, default_value_t = 20)]
    psdu_len: usize,
    /// Topology file; the first node sends, the second acknowledges.
    #[arg(long)]
    topology: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    pcap: Option<PathBuf>,
    #[command(flatten)]
    phy: PhyArgs,
}

pub fn demo_ack(a: &AckArgs) -> Result<()> {
    let params = AckParams {
        frames: a.frames,
        period_ticks: a.period,
        proc_latency: a.proc_latency,
        psdu_len: a.psdu_len,
        config: radio_config(&a.phy, a.proc_latency)?,
        topology: load_topology(&a.topology)?,
        seed: a.seed,
    };
    let report = run_demo_ack(&params)?;
    emit(&a.csv, &params.csv(&report))?;
    write_capture(&a.pcap, &report.emissions)?;
    let max = report.max_error().map_or("n/a".to_string(), |m| m.to_string());
    summary(
        &a.csv,
        &format!(
            "frames={} acked={} expected_turnaround_ticks={} max_error_ticks={} max_grid_deviation_ticks={}",
            report.rows.len(),
            report.rows.len() - report.missing_acks(),
            report.expected_turnaround,
            max,
            report.max_grid_deviation(a.period)
        ),
    );
    Ok(())
}

#[derive(Debug, Args)]
pub struct ThroughputArgs {
    #[arg(long, default_value_t = 6_000_000)]
    duration: Tick,
    #[arg(long, default_value_t = 1_000_000)]
    window: Tick,
    /// PSDU length including the FCS.
    #[arg(long, default_value_t = 127)]
    psdu_len: usize,
    /// Gap after each ACK before the next frame, in ticks.
    #[arg(long, default_value_t = 192)]
    ifs: Tick,
    /// Register change applied to every node: TICK:REG=VALUE (repeatable).
    #[arg(long = "switch-at")]
    switch_at: Vec<Switch>,
    #[arg(long)]
    proc_latency: Option<Tick>,
    #[arg(long)]
    topology: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    pcap: Option<PathBuf>,
    #[command(flatten)]
    phy: PhyArgs,
}

pub fn demo_throughput(a: &ThroughputArgs) -> Result<()> {
    let params = ThroughputParams {
        duration_ticks: a.duration,
        window_ticks: a.window,
        psdu_len: a.psdu_len,
        ifs_ticks: a.ifs,
        switches: a.switch_at.clone(),
        config: radio_config(&a.phy, a.proc_latency)?,
        topology: load_topology(&a.topology)?,
        seed: a.seed,
    };
    let report = run_demo_throughput(&params)?;
    emit(&a.csv, &params.csv(&report))?;
    write_capture(&a.pcap, &report.emissions)?;
    summary(
        &a.csv,
        &format!(
            "frames_sent={} frames_acked={} crc_errors={}",
            report.frames_sent, report.frames_acked, report.crc_errors
        ),
    );
    Ok(())
}
