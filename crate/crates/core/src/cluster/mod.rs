//! A single-process storage cluster kept in a directory: one subdirectory
//! per node, a manifest with node status, bandwidth ledger and blob digests.

mod manifest;

use std::fs::{self, OpenOptions};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use thiserror::Error;

pub use manifest::{Ledger, LedgerEvent, Manifest, NodeStatus, ObjectEntry};

use crate::code::{CodeError, Flavor, MsrCode, RegeneratingCode};
use crate::field::Symbol;
use crate::format::{
    decode_blob, decode_help_frame, encode_blob, encode_help_frame, pack_bytes, unpack_bytes, write_atomic, CodeSpec, FormatError,
};
use crate::linalg::Matrix;
use crate::transforms::{plan_central_repair, ShortenedCode, Strategy};

pub const MANIFEST: &str = "manifest.json";
pub const SPEC_FILE: &str = "code.spec";
pub const LOCK_FILE: &str = "lock";
pub const MANIFEST_FORMAT: &str = "atrahasis-cluster/1";
/// Chunks per blob file.
pub const SEGMENT_CHUNKS: usize = 4096;

#[derive(Debug, Error)]
pub enum ClusterError {
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error("store {0} is locked by another command")]
    Locked(String),
    #[error("store {0} has no cluster; run put with --spec first")]
    NoCluster(String),
    #[error("store {0} already holds a cluster")]
    Exists(String),
    #[error("bad manifest: {0}")]
    Manifest(String),
    #[error("no object named {0:?}")]
    NoSuchObject(String),
    #[error("object {0:?} already stored")]
    DuplicateObject(String),
    #[error("{0}")]
    NodeState(String),
    #[error("blob {path} does not match its recorded digest")]
    Corrupt { path: String },
}

impl ClusterError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        ClusterError::Io { path: path.display().to_string(), source }
    }

    /// Process exit code: 2 usage, 3 infeasible, 4 axiom, 5 too few nodes, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            ClusterError::Code(e) | ClusterError::Format(FormatError::Code(e)) => code_exit(e),
            ClusterError::NoCluster(_) | ClusterError::Exists(_) | ClusterError::NoSuchObject(_) | ClusterError::DuplicateObject(_) => 2,
            ClusterError::NodeState(_) => 2,
            _ => 1,
        }
    }
}

pub fn code_exit(e: &CodeError) -> i32 {
    match e {
        CodeError::InvalidParams(_) | CodeError::NonIntegralT { .. } | CodeError::FieldTooSmall { .. } => 3,
        CodeError::Axiom(_) => 4,
        CodeError::InsufficientNodes { .. } => 5,
        CodeError::Usage(_) | CodeError::NodeIndex { .. } | CodeError::Length { .. } => 2,
        _ => 1,
    }
}

/// Removes the lock file when dropped.
#[derive(Debug)]
struct LockGuard(PathBuf);

impl Drop for LockGuard {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}

fn lock(root: &Path) -> Result<LockGuard, ClusterError> {
    let path = root.join(LOCK_FILE);
    match OpenOptions::new().write(true).create_new(true).open(&path) {
        Ok(_) => Ok(LockGuard(path)),
        Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(ClusterError::Locked(root.display().to_string())),
        Err(e) => Err(ClusterError::io(&path, e)),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct OpReport {
    pub op: String,
    pub nodes: Vec<usize>,
    pub chunks: usize,
    /// Symbols moved between nodes by this operation.
    pub symbols: u64,
    /// Symbols per chunk.
    pub per_chunk: u64,
}

#[derive(Debug)]
pub struct Cluster {
    root: PathBuf,
    spec: CodeSpec,
    code: ShortenedCode,
    params_hash: u64,
    manifest: Manifest,
    _lock: LockGuard,
}

impl Cluster {
    pub fn create(root: &Path, spec: CodeSpec) -> Result<Self, ClusterError> {
        fs::create_dir_all(root).map_err(|e| ClusterError::io(root, e))?;
        let guard = lock(root)?;
        if root.join(MANIFEST).exists() {
            return Err(ClusterError::Exists(root.display().to_string()));
        }
        let code = spec.shortened()?;
        let params_hash = spec.params_hash();
        let manifest = Manifest {
            format: MANIFEST_FORMAT.into(),
            params_hash: format!("{params_hash:#018x}"),
            node_status: vec![NodeStatus::Live; code.n()],
            ledger: Ledger::default(),
            next_object: 0,
            objects: Default::default(),
            blobs: Default::default(),
        };
        for h in 0..code.n() {
            let dir = root.join(format!("node_{h}"));
            fs::create_dir_all(&dir).map_err(|e| ClusterError::io(&dir, e))?;
        }
        spec.write(&root.join(SPEC_FILE))?;
        let c = Cluster { root: root.to_path_buf(), spec, code, params_hash, manifest, _lock: guard };
        c.save()?;
        Ok(c)
    }

    pub fn open(root: &Path) -> Result<Self, ClusterError> {
        if !root.join(MANIFEST).exists() {
            return Err(ClusterError::NoCluster(root.display().to_string()));
        }
        let guard = lock(root)?;
        let loaded = CodeSpec::read(&root.join(SPEC_FILE))?;
        if !loaded.hash_matches {
            return Err(ClusterError::Manifest("stored code spec fails its content hash".into()));
        }
        let spec = loaded.spec;
        let path = root.join(MANIFEST);
        let text = fs::read_to_string(&path).map_err(|e| ClusterError::io(&path, e))?;
        let manifest: Manifest = serde_json::from_str(&text).map_err(|e| ClusterError::Manifest(e.to_string()))?;
        let params_hash = spec.params_hash();
        if manifest.params_hash != format!("{params_hash:#018x}") {
            return Err(ClusterError::Manifest(format!("params hash {} does not match the stored spec", manifest.params_hash)));
        }
        let code = spec.shortened()?;
        if manifest.node_status.len() != code.n() {
            return Err(ClusterError::Manifest(format!("{} node entries for n = {}", manifest.node_status.len(), code.n())));
        }
        Ok(Cluster { root: root.to_path_buf(), spec, code, params_hash, manifest, _lock: guard })
    }

    /// Opens the cluster, creating it from `spec` if the store is empty. A
    /// given spec must match an existing cluster.
    pub fn open_or_create(root: &Path, spec: Option<CodeSpec>) -> Result<Self, ClusterError> {
        if root.join(MANIFEST).exists() {
            let c = Self::open(root)?;
            if let Some(s) = spec {
                if s.params_hash() != c.params_hash {
                    return Err(ClusterError::Manifest("store was created with a different code spec".into()));
                }
            }
            Ok(c)
        } else {
            let spec = spec.ok_or_else(|| ClusterError::NoCluster(root.display().to_string()))?;
            Self::create(root, spec)
        }
    }

    fn save(&self) -> Result<(), ClusterError> {
        let text = serde_json::to_string_pretty(&self.manifest).map_err(|e| ClusterError::Manifest(e.to_string()))?;
        Ok(write_atomic(&self.root.join(MANIFEST), text.as_bytes())?)
    }

    pub fn spec(&self) -> &CodeSpec {
        &self.spec
    }

    pub fn code(&self) -> &ShortenedCode {
        &self.code
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    pub fn ledger(&self) -> &Ledger {
        &self.manifest.ledger
    }

    pub fn live_nodes(&self) -> Vec<usize> {
        (0..self.code.n()).filter(|&h| self.manifest.node_status[h] == NodeStatus::Live).collect()
    }

    fn blob_rel(id: usize, h: usize, seg: usize) -> String {
        format!("node_{h}/o{id}_seg_{seg}.blob")
    }

    fn write_blob(&mut self, id: usize, h: usize, seg: usize, values: &[Symbol]) -> Result<String, ClusterError> {
        let rel = Self::blob_rel(id, h, seg);
        let bytes = encode_blob(self.code.field(), h, self.params_hash, values);
        write_atomic(&self.root.join(&rel), &bytes)?;
        Ok(hex::encode(Sha256::digest(&bytes)))
    }

    fn read_blob(&self, id: usize, h: usize, seg: usize, chunks: usize) -> Result<Vec<Symbol>, ClusterError> {
        let rel = Self::blob_rel(id, h, seg);
        let path = self.root.join(&rel);
        let bytes = fs::read(&path).map_err(|e| ClusterError::io(&path, e))?;
        if self.manifest.blobs.get(&rel).map(String::as_str) != Some(hex::encode(Sha256::digest(&bytes)).as_str()) {
            return Err(ClusterError::Corrupt { path: rel });
        }
        let (header, values) = decode_blob(self.code.field(), &bytes, self.params_hash)?;
        if header.node as usize != h || values.len() != chunks * self.code.alpha() {
            return Err(ClusterError::Corrupt { path: rel });
        }
        Ok(values)
    }

    fn check_node(&self, h: usize) -> Result<(), ClusterError> {
        if h >= self.code.n() {
            return Err(CodeError::NodeIndex { index: h, n: self.code.n() }.into());
        }
        Ok(())
    }

    /// Chunks `data`, encodes every chunk and writes one blob per node and segment.
    pub fn put(&mut self, name: &str, data: &[u8]) -> Result<OpReport, ClusterError> {
        if self.manifest.objects.contains_key(name) {
            return Err(ClusterError::DuplicateObject(name.into()));
        }
        let live = self.live_nodes();
        if live.len() < self.code.n() {
            return Err(ClusterError::NodeState(format!("put needs every node live; repair {:?} first", self.failed_nodes())));
        }
        let fsize = self.code.file_size();
        let alpha = self.code.alpha();
        let (layout, symbols) = pack_bytes(self.code.field(), data, fsize);
        let enc: Vec<Matrix> = (0..self.code.n()).map(|h| self.code.encoding_matrix(h)).collect::<Result<_, _>>()?;
        let id = self.manifest.next_object;
        let mut segments = Vec::new();
        for (seg, block) in symbols.chunks(SEGMENT_CHUNKS * fsize).enumerate() {
            let chunks = block.len() / fsize;
            segments.push(chunks);
            for (h, e) in enc.iter().enumerate() {
                let mut values = vec![0; chunks * alpha];
                for (raw, out) in block.chunks_exact(fsize).zip(values.chunks_exact_mut(alpha)) {
                    e.mul_vec_into(raw, out);
                }
                let digest = self.write_blob(id, h, seg, &values)?;
                self.manifest.blobs.insert(Self::blob_rel(id, h, seg), digest);
            }
        }
        self.manifest.next_object += 1;
        self.manifest.objects.insert(name.into(), ObjectEntry { id, layout, segments });
        self.save()?;
        Ok(OpReport { op: "put".into(), nodes: (0..self.code.n()).collect(), chunks: layout.chunk_count, symbols: 0, per_chunk: 0 })
    }

    fn object(&self, name: Option<&str>) -> Result<(String, ObjectEntry), ClusterError> {
        match name {
            Some(n) => self.manifest.objects.get(n).map(|o| (n.to_string(), o.clone())).ok_or_else(|| ClusterError::NoSuchObject(n.into())),
            None => {
                let mut it = self.manifest.objects.iter();
                match (it.next(), it.next()) {
                    (Some((n, o)), None) => Ok((n.clone(), o.clone())),
                    (None, _) => Err(ClusterError::NoSuchObject("<any>".into())),
                    _ => Err(CodeError::Usage("several objects stored; name one".into()).into()),
                }
            }
        }
    }

    pub fn object_names(&self) -> Vec<String> {
        self.manifest.objects.keys().cloned().collect()
    }

    /// Reads exactly `k` live nodes (the given ones, or the lowest-indexed)
    /// and restores the original bytes.
    pub fn get(&mut self, name: Option<&str>, nodes: Option<Vec<usize>>) -> Result<(Vec<u8>, OpReport), ClusterError> {
        let (_, obj) = self.object(name)?;
        let k = self.code.k();
        let live = self.live_nodes();
        let chosen = match nodes {
            Some(v) => {
                for &h in &v {
                    self.check_node(h)?;
                    if !live.contains(&h) {
                        return Err(ClusterError::NodeState(format!("node {h} is not live")));
                    }
                }
                v
            }
            None => live.clone(),
        };
        if chosen.len() < k {
            return Err(CodeError::InsufficientNodes { have: chosen.len(), need: k }.into());
        }
        let chosen = chosen[..k].to_vec();
        let plan = self.code.download_plan(&chosen)?;
        let (fsize, alpha) = (self.code.file_size(), self.code.alpha());
        let mut symbols = Vec::with_capacity(obj.layout.chunk_count * fsize);
        for (seg, &chunks) in obj.segments.iter().enumerate() {
            let blobs: Vec<Vec<Symbol>> = chosen.iter().map(|&h| self.read_blob(obj.id, h, seg, chunks)).collect::<Result<_, _>>()?;
            let mut joined = vec![0; k * alpha];
            let mut out = vec![0; fsize];
            for c in 0..chunks {
                for (i, b) in blobs.iter().enumerate() {
                    joined[i * alpha..(i + 1) * alpha].copy_from_slice(&b[c * alpha..(c + 1) * alpha]);
                }
                plan.decode.mul_vec_into(&joined, &mut out);
                symbols.extend_from_slice(&out);
            }
        }
        let data = unpack_bytes(self.code.field(), &symbols)?;
        let per_chunk = (k * alpha) as u64;
        let report = self.account("get", chosen, obj.layout.chunk_count, per_chunk);
        self.save()?;
        Ok((data, report))
    }

    fn account(&mut self, op: &str, nodes: Vec<usize>, chunks: usize, per_chunk: u64) -> OpReport {
        let symbols = per_chunk * chunks as u64;
        self.manifest.ledger.record(op, nodes.clone(), chunks, symbols);
        OpReport { op: op.into(), nodes, chunks, symbols, per_chunk }
    }

    pub fn failed_nodes(&self) -> Vec<usize> {
        (0..self.code.n()).filter(|&h| self.manifest.node_status[h] == NodeStatus::Failed).collect()
    }

    /// Marks `h` failed and deletes its blobs.
    pub fn fail(&mut self, h: usize) -> Result<(), ClusterError> {
        self.check_node(h)?;
        if self.manifest.node_status[h] == NodeStatus::Failed {
            return Err(ClusterError::NodeState(format!("node {h} has already failed")));
        }
        let dir = self.root.join(format!("node_{h}"));
        if dir.exists() {
            fs::remove_dir_all(&dir).map_err(|e| ClusterError::io(&dir, e))?;
        }
        fs::create_dir_all(&dir).map_err(|e| ClusterError::io(&dir, e))?;
        self.manifest.node_status[h] = NodeStatus::Failed;
        self.save()
    }

    fn pick_helpers(&self, failed: &[usize], helpers: Option<Vec<usize>>, need: usize) -> Result<Vec<usize>, ClusterError> {
        for &f in failed {
            self.check_node(f)?;
            if self.manifest.node_status[f] != NodeStatus::Failed {
                return Err(ClusterError::NodeState(format!("node {f} is live; only failed nodes are repaired")));
            }
        }
        let live = self.live_nodes();
        let helpers = match helpers {
            Some(v) => {
                for &h in &v {
                    self.check_node(h)?;
                    if !live.contains(&h) {
                        return Err(ClusterError::NodeState(format!("helper {h} is not live")));
                    }
                }
                v
            }
            None => live.into_iter().take(need).collect(),
        };
        if helpers.len() < need {
            return Err(CodeError::InsufficientNodes { have: helpers.len(), need }.into());
        }
        if helpers.len() > need {
            return Err(CodeError::Usage(format!("{} helpers given, repair uses exactly d = {need}", helpers.len())).into());
        }
        Ok(helpers)
    }

    fn check_rebuilt(&mut self, id: usize, h: usize, seg: usize, values: &[Symbol]) -> Result<(), ClusterError> {
        let rel = Self::blob_rel(id, h, seg);
        let digest = self.write_blob(id, h, seg, values)?;
        if self.manifest.blobs.get(&rel) != Some(&digest) {
            return Err(ClusterError::Corrupt { path: rel });
        }
        Ok(())
    }

    /// Rebuilds failed node `f` from `d` helpers (`None` picks the `d`
    /// lowest-indexed live nodes). Each helper sends `β` symbols per chunk.
    pub fn repair(&mut self, f: usize, helpers: Option<Vec<usize>>) -> Result<OpReport, ClusterError> {
        let helpers = self.pick_helpers(&[f], helpers, self.code.d())?;
        let plan = self.code.repair_plan(f, &helpers)?;
        let (alpha, beta) = (self.code.alpha(), self.code.beta());
        let field = self.code.field().clone();
        let objects: Vec<ObjectEntry> = self.manifest.objects.values().cloned().collect();
        let mut chunks_total = 0;
        for obj in &objects {
            for (seg, &chunks) in obj.segments.iter().enumerate() {
                chunks_total += chunks;
                let mut received = Vec::with_capacity(helpers.len());
                for (i, &h) in helpers.iter().enumerate() {
                    let content = self.read_blob(obj.id, h, seg, chunks)?;
                    let mut msg = vec![0; chunks * beta];
                    for (c, out) in content.chunks_exact(alpha).zip(msg.chunks_exact_mut(beta)) {
                        plan.help[i].mul_vec_into(c, out);
                    }
                    let frame = encode_help_frame(&field, h, f, self.params_hash, &msg);
                    let (from, to, values) = decode_help_frame(&field, &frame, self.params_hash)?;
                    debug_assert_eq!((from, to), (h, f));
                    received.push(values);
                }
                let mut rebuilt = vec![0; chunks * alpha];
                let mut joined = vec![0; helpers.len() * beta];
                for c in 0..chunks {
                    for (i, m) in received.iter().enumerate() {
                        joined[i * beta..(i + 1) * beta].copy_from_slice(&m[c * beta..(c + 1) * beta]);
                    }
                    plan.combine.mul_vec_into(&joined, &mut rebuilt[c * alpha..(c + 1) * alpha]);
                }
                self.check_rebuilt(obj.id, f, seg, &rebuilt)?;
            }
        }
        self.manifest.node_status[f] = NodeStatus::Live;
        let report = self.account("repair", helpers, chunks_total, (self.code.d() * beta) as u64);
        self.save()?;
        Ok(report)
    }

    /// Central repair of two failed nodes on an unshortened symmetric `t = 3` code.
    pub fn repair2(&mut self, f: usize, g: usize, strategy: Strategy, helpers: Option<Vec<usize>>) -> Result<OpReport, ClusterError> {
        let p = *self.spec.stars.params();
        if !self.spec.pinned.is_empty() || p.flavor != Flavor::Symmetric || p.t != 3 {
            return Err(CodeError::Usage("repair2 needs an unshortened symmetric code with t = 3".into()).into());
        }
        if f == g {
            return Err(CodeError::Usage(format!("failed nodes must differ (got {f} twice)")).into());
        }
        let helpers = self.pick_helpers(&[f, g], helpers, p.d)?;
        let code: &MsrCode = self.code.base();
        let plan = plan_central_repair(code, f, g, &helpers, strategy)?;
        let alpha = p.alpha;
        let objects: Vec<ObjectEntry> = self.manifest.objects.values().cloned().collect();
        let mut chunks_total = 0;
        for obj in &objects {
            for (seg, &chunks) in obj.segments.iter().enumerate() {
                chunks_total += chunks;
                let contents: Vec<Vec<Symbol>> = helpers.iter().map(|&h| self.read_blob(obj.id, h, seg, chunks)).collect::<Result<_, _>>()?;
                let mut vf = Vec::with_capacity(chunks * alpha);
                let mut vg = Vec::with_capacity(chunks * alpha);
                for c in 0..chunks {
                    let views: Vec<&[Symbol]> = contents.iter().map(|v| &v[c * alpha..(c + 1) * alpha]).collect();
                    let (a, b) = plan.rebuild(&plan.messages(&views));
                    vf.extend(a);
                    vg.extend(b);
                }
                self.check_rebuilt(obj.id, f, seg, &vf)?;
                self.check_rebuilt(obj.id, g, seg, &vg)?;
            }
        }
        self.manifest.node_status[f] = NodeStatus::Live;
        self.manifest.node_status[g] = NodeStatus::Live;
        let report = self.account("repair2", helpers, chunks_total, plan.bandwidth() as u64);
        self.save()?;
        Ok(report)
    }
}

/// Runs the axiom check on a spec's base family.
pub fn verify_spec(spec: &CodeSpec) -> crate::code::AxiomReport {
    crate::code::verify_axioms(&spec.stars)
}
