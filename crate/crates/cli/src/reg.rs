//! Register access against a node session saved as a text file.

use anyhow::{Context, Result};
use clap::{Args, Subcommand};
use lrwpan_core::controller::Register;
use lrwpan_core::kv;
use lrwpan_core::{RadioConfig, RadioController, RegError};
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug, Args)]
pub struct RegArgs {
    /// Session file holding one `[node NAME]` section per node. Created on
    /// the first `set`.
    #[arg(long, global = true, env = "LRWPAN_STATE", default_value = "lrwpan.state")]
    state: PathBuf,
    #[arg(long, global = true, default_value = "A")]
    node: String,
    #[command(subcommand)]
    op: RegOp,
}

#[derive(Debug, Subcommand)]
enum RegOp {
    /// Print a register, by name or address.
    Get { register: String },
    /// Write a register and save the session.
    Set { register: String, value: String },
    /// Print every register of the node.
    Dump,
}

fn lookup(name: &str) -> Result<Register, RegError> {
    Register::lookup(name).ok_or_else(|| RegError::UnknownName(name.to_string()))
}

/// Nodes of a saved session, in file order.
fn load(path: &Path) -> Result<Vec<(String, RadioController)>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let doc = kv::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
    let mut nodes = Vec::new();
    for sec in &doc[1..] {
        let name = sec.name.strip_prefix("node ").map(str::trim).unwrap_or(&sec.name).to_string();
        let mut rc = RadioController::new(RadioConfig::default())?;
        rc.restore_section(sec).with_context(|| format!("restoring node {name}"))?;
        nodes.push((name, rc));
    }
    Ok(nodes)
}

fn save(path: &Path, nodes: &[(String, RadioController)]) -> Result<()> {
    let mut s = String::from("# lrwpan register session\n");
    for (name, rc) in nodes {
        s.push_str(&format!("[node {name}]\n{}", rc.dump()));
    }
    fs::write(path, s).with_context(|| format!("writing {}", path.display()))
}

pub fn run(a: &RegArgs) -> Result<()> {
    let mut nodes = load(&a.state)?;
    let idx = match nodes.iter().position(|(n, _)| *n == a.node) {
        Some(i) => i,
        None => {
            nodes.push((a.node.clone(), RadioController::new(RadioConfig::default())?));
            nodes.len() - 1
        }
    };
    let rc = &mut nodes[idx].1;
    match &a.op {
        RegOp::Get { register } => println!("0x{:X}", rc.read(lookup(register)?)),
        RegOp::Dump => print!("{}", rc.dump()),
        RegOp::Set { register, value } => {
            let reg = lookup(register)?;
            let v = kv::parse_uint(value)
                .and_then(|v| u32::try_from(v).ok())
                .with_context(|| format!("bad register value {value:?}"))?;
            rc.write(reg, v)?;
            println!("0x{:X}", rc.read(reg));
            save(&a.state, &nodes)?;
        }
    }
    Ok(())
}

