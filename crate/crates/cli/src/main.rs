//! `lrwpan`: encode and decode IQ captures, run BER sweeps and the timing
//! and throughput demos, and access radio registers.

mod args;
mod commands;
mod reg;

use clap::{Parser, Subcommand};
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(name = "lrwpan", version, about = "IEEE 802.15.4 software radio toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Modulate a PSDU into an IQ file with a `.meta` sidecar.
    Encode(commands::EncodeArgs),
    /// Demodulate an IQ file and list the frames found.
    Decode(commands::DecodeArgs),
    /// Chip and packet error rate over a list of chip SNRs.
    Ber(commands::BerArgs),
    /// ACK turnaround timing between two nodes.
    DemoAck(commands::AckArgs),
    /// Goodput per window while streaming frames, with optional
    /// mid-run register changes.
    DemoThroughput(commands::ThroughputArgs),
    /// Read or write radio registers in a saved node session.
    Reg(reg::RegArgs),
}

/// Input or configuration problem.
const EXIT_INPUT: u8 = 2;
const EXIT_REGISTER: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Encode(a) => commands::encode(&a),
        Command::Decode(a) => commands::decode(&a),
        Command::Ber(a) => commands::ber(&a),
        Command::DemoAck(a) => commands::demo_ack(&a),
        Command::DemoThroughput(a) => commands::demo_throughput(&a),
        Command::Reg(a) => reg::run(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if is_register_error(&e) {
                ExitCode::from(EXIT_REGISTER)
            } else {
                ExitCode::from(EXIT_INPUT)
            }
        }
    }
}

fn is_register_error(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        c.downcast_ref::<lrwpan_core::RegError>().is_some()
            || matches!(
                c.downcast_ref::<lrwpan_core::experiment::ExperimentError>(),
                Some(lrwpan_core::experiment::ExperimentError::Register(_))
            )
    })
}
