use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::format::ChunkedFile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeStatus {
    Live,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEvent {
    pub op: String,
    pub nodes: Vec<usize>,
    pub chunks: usize,
    pub symbols: u64,
}

/// Symbols moved between nodes, per operation kind.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ledger {
    pub download_symbols: u64,
    pub repair_symbols: u64,
    pub repair2_symbols: u64,
    pub events: Vec<LedgerEvent>,
}

impl Ledger {
    pub fn record(&mut self, op: &str, nodes: Vec<usize>, chunks: usize, symbols: u64) {
        match op {
            "get" => self.download_symbols += symbols,
            "repair" => self.repair_symbols += symbols,
            "repair2" => self.repair2_symbols += symbols,
            _ => {}
        }
        self.events.push(LedgerEvent { op: op.into(), nodes, chunks, symbols });
    }

    pub fn total_repair(&self) -> u64 {
        self.repair_symbols + self.repair2_symbols
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectEntry {
    pub id: usize,
    pub layout: ChunkedFile,
    /// Chunk count of each segment, in order.
    pub segments: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub params_hash: String,
    pub node_status: Vec<NodeStatus>,
    pub ledger: Ledger,
    pub next_object: usize,
    pub objects: BTreeMap<String, ObjectEntry>,
    /// sha256 of every blob ever written, keyed by path relative to the store.
    pub blobs: BTreeMap<String, String>,
}
