//! Topology files: a global `seed=`, `[node NAME]` sections holding
//! initial register values, and `[link A->B]` (or `[link A<->B]`) sections
//! with `delay_ticks`, `chip_snr_db` and `gain`.

use super::LinkModel;
use crate::kv::{self, KvError, KvSection};

#[derive(Debug, Clone, PartialEq)]
pub struct NodeSpec {
    pub name: String,
    /// Register assignments applied when the node is created.
    pub registers: KvSection,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkSpec {
    pub src: String,
    pub dst: String,
    pub model: LinkModel,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Topology {
    pub seed: Option<u64>,
    pub nodes: Vec<NodeSpec>,
    pub links: Vec<LinkSpec>,
}

impl Topology {
    /// Two nodes `A` and `B` joined in both directions by `link`.
    pub fn pair(link: LinkModel) -> Self {
        let node = |name: &str| NodeSpec {
            name: name.into(),
            registers: KvSection { name: format!("node {name}"), ..Default::default() },
        };
        Topology {
            seed: None,
            nodes: vec![node("A"), node("B")],
            links: vec![
                LinkSpec { src: "A".into(), dst: "B".into(), model: link },
                LinkSpec { src: "B".into(), dst: "A".into(), model: link },
            ],
        }
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.name == name)
    }
}

pub fn parse_topology(text: &str) -> Result<Topology, KvError> {
    let doc = kv::parse(text)?;
    let mut topo = Topology::default();
    for e in &doc[0].entries {
        match e.key.as_str() {
            "seed" => {
                topo.seed = Some(kv::parse_uint(&e.value).ok_or_else(|| KvError::new(e.line, "bad seed"))?)
            }
            other => return Err(KvError::new(e.line, format!("unknown key {other:?}"))),
        }
    }
    for sec in &doc[1..] {
        let (kind, rest) = sec.name.split_once(char::is_whitespace).unwrap_or((sec.name.as_str(), ""));
        let rest = rest.trim();
        match kind {
            "node" => {
                if rest.is_empty() || topo.node_index(rest).is_some() {
                    return Err(KvError::new(sec.line, format!("missing or duplicate node name {rest:?}")));
                }
                topo.nodes.push(NodeSpec { name: rest.to_string(), registers: sec.clone() });
            }
            "link" => {
                let model = link_model(sec)?;
                let (pair, both) = match rest.split_once("<->") {
                    Some(p) => (p, true),
                    None => (rest.split_once("->").ok_or_else(|| KvError::new(sec.line, "link needs SRC->DST"))?, false),
                };
                let (a, b) = (pair.0.trim().to_string(), pair.1.trim().to_string());
                for n in [&a, &b] {
                    if topo.node_index(n).is_none() {
                        return Err(KvError::new(sec.line, format!("unknown node {n:?}")));
                    }
                }
                if a == b {
                    return Err(KvError::new(sec.line, "a link needs two distinct nodes"));
                }
                if both {
                    topo.links.push(LinkSpec { src: b.clone(), dst: a.clone(), model });
                }
                topo.links.push(LinkSpec { src: a, dst: b, model });
            }
            _ => return Err(KvError::new(sec.line, format!("unknown section [{}]", sec.name))),
        }
    }
    Ok(topo)
}

fn link_model(sec: &KvSection) -> Result<LinkModel, KvError> {
    let mut m = LinkModel::default();
    for e in &sec.entries {
        let bad = || KvError::new(e.line, format!("bad value {:?} for {}", e.value, e.key));
        match e.key.as_str() {
            "delay_ticks" => m.delay_ticks = kv::parse_uint(&e.value).ok_or_else(bad)?,
            "chip_snr_db" => {
                m.chip_snr_db = kv::parse_f64(&e.value).filter(|v| !v.is_nan() && *v != f64::NEG_INFINITY).ok_or_else(bad)?
            }
            "gain" => m.gain = kv::parse_f64(&e.value).filter(|v| v.is_finite() && *v >= 0.0).ok_or_else(bad)?,
            other => return Err(KvError::new(e.line, format!("unknown link key {other:?}"))),
        }
    }
    Ok(m)
}
