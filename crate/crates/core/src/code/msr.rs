use super::{verify_axioms, Axiom, AxiomReport, AxiomViolation, CodeError, CodeParams, Flavor, StarFamily};
use crate::field::{FieldSpec, Symbol};
use crate::linalg::{express_rows, IncrementalBasis, Matrix};
use crate::tensor::{expand_node_basis_ext, expand_node_basis_sym, sym_mul, wedge, x_tensor, ExtBasis, SymBasis};

/// The file as its `M` coordinates on the canonical basis of the ambient
/// space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileTensor {
    pub params: CodeParams,
    pub coords: Vec<Symbol>,
}

impl FileTensor {
    pub fn new(params: CodeParams, coords: Vec<Symbol>) -> Result<Self, CodeError> {
        if coords.len() != params.file_size {
            return Err(CodeError::Length { what: "file tensor", got: coords.len(), expected: params.file_size });
        }
        Ok(FileTensor { params, coords })
    }

    pub fn zero(params: CodeParams) -> Self {
        FileTensor { params, coords: vec![0; params.file_size] }
    }
}

/// The `α` symbols held by one node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeContent {
    pub node: usize,
    pub values: Vec<Symbol>,
}

/// The `β` symbols a helper sends towards a failed node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HelpMessage {
    pub helper: usize,
    pub failed: usize,
    pub values: Vec<Symbol>,
}

/// Precomputed decoder for a fixed set of nodes.
#[derive(Debug, Clone)]
pub struct DownloadPlan {
    pub nodes: Vec<usize>,
    /// `file_size × (nodes.len() · α)`; applied to the concatenated contents.
    pub decode: Matrix,
}

impl DownloadPlan {
    pub fn apply(&self, contents: &[&[Symbol]]) -> Vec<Symbol> {
        let joined: Vec<Symbol> = contents.iter().flat_map(|c| c.iter().copied()).collect();
        let mut out = vec![0; self.decode.rows()];
        self.decode.mul_vec_into(&joined, &mut out);
        out
    }
}

/// Precomputed repair for a fixed failed node and helper set.
#[derive(Debug, Clone)]
pub struct RepairPlan {
    pub failed: usize,
    pub helpers: Vec<usize>,
    /// One `β × α` matrix per helper mapping its content to its message.
    pub help: Vec<Matrix>,
    /// `α × (helpers.len() · β)`; rebuilds the failed content.
    pub combine: Matrix,
}

impl RepairPlan {
    pub fn message(&self, i: usize, content: &[Symbol]) -> Vec<Symbol> {
        let mut out = vec![0; self.help[i].rows()];
        self.help[i].mul_vec_into(content, &mut out);
        out
    }

    pub fn rebuild(&self, messages: &[&[Symbol]]) -> Vec<Symbol> {
        let joined: Vec<Symbol> = messages.iter().flat_map(|c| c.iter().copied()).collect();
        let mut out = vec![0; self.combine.rows()];
        self.combine.mul_vec_into(&joined, &mut out);
        out
    }

    /// Symbols sent across all helpers.
    pub fn bandwidth(&self) -> usize {
        self.help.iter().map(|m| m.rows()).sum()
    }
}

/// Behaviour shared by full and shortened codes: user symbols in, node
/// contents out, plus download and repair plans.
pub trait RegeneratingCode {
    fn field(&self) -> &FieldSpec;
    fn n(&self) -> usize;
    fn k(&self) -> usize;
    fn d(&self) -> usize;
    fn alpha(&self) -> usize;
    fn beta(&self) -> usize;
    /// User symbols per file.
    fn file_size(&self) -> usize;
    /// `α × file_size` matrix taking user symbols to node `h`'s content.
    fn encoding_matrix(&self, h: usize) -> Result<Matrix, CodeError>;
    fn download_plan(&self, nodes: &[usize]) -> Result<DownloadPlan, CodeError>;
    fn repair_plan(&self, failed: usize, helpers: &[usize]) -> Result<RepairPlan, CodeError>;

    fn encode_nodes(&self, raw: &[Symbol]) -> Result<Vec<Vec<Symbol>>, CodeError> {
        if raw.len() != self.file_size() {
            return Err(CodeError::Length { what: "raw file", got: raw.len(), expected: self.file_size() });
        }
        (0..self.n()).map(|h| Ok(self.encoding_matrix(h)?.mul_vec(raw)?)).collect()
    }
}

/// An MSR code instance: a star family plus the node subspaces it induces.
#[derive(Debug, Clone)]
pub struct MsrCode {
    stars: StarFamily,
    node_rows: Vec<Matrix>,
}

impl MsrCode {
    /// Builds the code without checking the axioms.
    pub fn new(stars: StarFamily) -> Result<Self, CodeError> {
        let p = *stars.params();
        let field = stars.field().clone();
        let mut node_rows = Vec::with_capacity(p.n);
        for h in 0..p.n {
            let rows = match p.flavor {
                Flavor::Symmetric => expand_node_basis_sym(&field, stars.x(h), stars.second(h), &SymBasis::new(p.dim_y(), p.t - 1)),
                Flavor::Exterior => expand_node_basis_ext(&field, stars.x(h), stars.second(h), &ExtBasis::new(p.k, p.t - 1))?,
            };
            if rows.len() != p.alpha {
                return Err(CodeError::Internal(format!("node {h} has {} basis tensors, expected {}", rows.len(), p.alpha)));
            }
            node_rows.push(Matrix::from_rows(&field, &rows)?);
        }
        Ok(MsrCode { stars, node_rows })
    }

    /// Builds the code after an exhaustive axiom check.
    pub fn verified(stars: StarFamily) -> Result<Self, CodeError> {
        match verify_axioms(&stars) {
            AxiomReport::Pass => Self::new(stars),
            AxiomReport::Violation(v) => Err(CodeError::Axiom(v)),
        }
    }

    pub fn stars(&self) -> &StarFamily {
        &self.stars
    }

    pub fn params(&self) -> &CodeParams {
        self.stars.params()
    }

    fn check_node(&self, h: usize) -> Result<(), CodeError> {
        let n = self.params().n;
        if h >= n {
            return Err(CodeError::NodeIndex { index: h, n });
        }
        Ok(())
    }

    /// Node `h`'s canonical basis tensors, one per row (`α × M`).
    pub fn node_rows(&self, h: usize) -> Result<&Matrix, CodeError> {
        self.check_node(h)?;
        Ok(&self.node_rows[h])
    }

    /// Basis tensors of the message helper `h` sends towards `f` (`β × M`).
    pub fn help_rows(&self, h: usize, f: usize) -> Result<Matrix, CodeError> {
        self.check_node(h)?;
        self.check_node(f)?;
        if h == f {
            return Err(CodeError::Usage(format!("node {h} cannot help itself")));
        }
        let p = self.params();
        let field = self.stars.field();
        let rows: Vec<Vec<Symbol>> = match p.flavor {
            Flavor::Symmetric => {
                let m = p.dim_y();
                let deg1 = SymBasis::new(m, 1);
                let deg2 = SymBasis::new(m, 2);
                let yy = sym_mul(field, self.stars.second(h), &deg1, self.stars.second(f), &deg1, &deg2);
                let sub = SymBasis::new(m, p.t - 2);
                let out = SymBasis::new(m, p.t);
                (0..sub.dim())
                    .map(|j| x_tensor(field, self.stars.x(h), &sym_mul(field, &sub.unit(j), &sub, &yy, &deg2, &out)))
                    .collect()
            }
            Flavor::Exterior => {
                let k = p.k;
                let deg1 = ExtBasis::new(k, 1);
                let sub = ExtBasis::new(k, p.t - 2);
                let mid = ExtBasis::new(k, p.t - 1);
                let out = ExtBasis::new(k, p.t);
                let mut acc = IncrementalBasis::new(field, out.dim());
                let mut rows = Vec::new();
                for j in 0..sub.dim() {
                    let left = wedge(field, self.stars.second(h), &deg1, &sub.unit(j), &sub, &mid);
                    let ext = wedge(field, &left, &mid, self.stars.second(f), &deg1, &out);
                    if acc.insert(&ext) {
                        rows.push(x_tensor(field, self.stars.x(h), &ext));
                    }
                }
                if rows.len() != p.beta {
                    return Err(CodeError::Axiom(AxiomViolation { axiom: Axiom::MdsW, failed: Some(f), set: vec![h, f] }));
                }
                rows
            }
        };
        Ok(Matrix::from_rows(field, &rows)?)
    }

    /// Rows that vanish identically on the failed node's side of a repair:
    /// `e_i ⊗ w_f ∧ ω' ∧ w_f`. Empty for the symmetric flavor.
    pub fn known_zero_rows(&self, f: usize) -> Result<Vec<Vec<Symbol>>, CodeError> {
        self.check_node(f)?;
        let p = self.params();
        if p.flavor == Flavor::Symmetric {
            return Ok(Vec::new());
        }
        let field = self.stars.field();
        let k = p.k;
        let deg1 = ExtBasis::new(k, 1);
        let sub = ExtBasis::new(k, p.t - 2);
        let mid = ExtBasis::new(k, p.t - 1);
        let out = ExtBasis::new(k, p.t);
        let w = self.stars.second(f);
        let mut rows = Vec::new();
        for i in 0..p.t {
            let mut e = vec![0; p.t];
            e[i] = 1;
            for j in 0..sub.dim() {
                let left = wedge(field, w, &deg1, &sub.unit(j), &sub, &mid);
                rows.push(x_tensor(field, &e, &wedge(field, &left, &mid, w, &deg1, &out)));
            }
        }
        Ok(rows)
    }

    /// `β × α` matrix turning helper `h`'s stored symbols into its message to `f`.
    pub fn help_matrix(&self, h: usize, f: usize) -> Result<Matrix, CodeError> {
        let targets = self.help_rows(h, f)?;
        express_rows(&self.node_rows[h], &targets)
            .map_err(|j| CodeError::Internal(format!("message tensor {j} from node {h} to {f} is outside the node subspace")))
    }

    /// Places `M` user symbols into the file coordinates unchanged.
    pub fn encode(&self, raw: &[Symbol]) -> Result<FileTensor, CodeError> {
        FileTensor::new(*self.params(), raw.to_vec())
    }

    pub fn node_content(&self, file: &FileTensor, h: usize) -> Result<NodeContent, CodeError> {
        self.check_file(file)?;
        let values = self.node_rows(h)?.mul_vec(&file.coords)?;
        Ok(NodeContent { node: h, values })
    }

    fn check_file(&self, file: &FileTensor) -> Result<(), CodeError> {
        if file.coords.len() != self.params().file_size {
            return Err(CodeError::Length { what: "file tensor", got: file.coords.len(), expected: self.params().file_size });
        }
        Ok(())
    }

    /// Reconstructs the file from the contents of `k` distinct nodes.
    pub fn download(&self, contents: &[NodeContent]) -> Result<FileTensor, CodeError> {
        let p = *self.params();
        let nodes: Vec<usize> = contents.iter().map(|c| c.node).collect();
        for c in contents {
            self.check_content(c)?;
        }
        let plan = self.download_plan(&nodes)?;
        let used: Vec<&[Symbol]> = plan
            .nodes
            .iter()
            .map(|h| contents.iter().find(|c| c.node == *h).expect("plan nodes come from contents").values.as_slice())
            .collect();
        FileTensor::new(p, plan.apply(&used))
    }

    fn check_content(&self, c: &NodeContent) -> Result<(), CodeError> {
        self.check_node(c.node)?;
        if c.values.len() != self.params().alpha {
            return Err(CodeError::Length { what: "node content", got: c.values.len(), expected: self.params().alpha });
        }
        Ok(())
    }

    /// The message node `content.node` sends to repair `f`.
    pub fn help(&self, content: &NodeContent, f: usize) -> Result<HelpMessage, CodeError> {
        self.check_content(content)?;
        let values = self.help_matrix(content.node, f)?.mul_vec(&content.values)?;
        Ok(HelpMessage { helper: content.node, failed: f, values })
    }

    /// Rebuilds node `f` from help messages addressed to it.
    pub fn repair(&self, messages: &[HelpMessage], f: usize) -> Result<NodeContent, CodeError> {
        self.check_node(f)?;
        let p = self.params();
        for m in messages {
            if m.failed != f {
                return Err(CodeError::Usage(format!("message from {} is addressed to {}, not {f}", m.helper, m.failed)));
            }
            if m.values.len() != p.beta {
                return Err(CodeError::Length { what: "help message", got: m.values.len(), expected: p.beta });
            }
        }
        let helpers: Vec<usize> = messages.iter().map(|m| m.helper).collect();
        let plan = self.combine_plan(f, &helpers)?;
        let received: Vec<&[Symbol]> = messages.iter().map(|m| m.values.as_slice()).collect();
        let joined: Vec<Symbol> = received.iter().flat_map(|v| v.iter().copied()).collect();
        Ok(NodeContent { node: f, values: plan.mul_vec(&joined)? })
    }

    /// `α × (|helpers| · β)` coefficients expressing `f`'s basis tensors in
    /// the helpers' message tensors.
    fn combine_plan(&self, f: usize, helpers: &[usize]) -> Result<Matrix, CodeError> {
        self.check_distinct(helpers, Some(f))?;
        let field = self.stars.field();
        let p = self.params();
        let mut gens = Matrix::zeros(field, 0, p.file_size);
        for &h in helpers {
            for row in self.help_rows(h, f)?.row_iter() {
                gens.push_row(row)?;
            }
        }
        let zero_rows = self.known_zero_rows(f)?;
        for row in &zero_rows {
            gens.push_row(row)?;
        }
        let coeffs = express_rows(&gens, &self.node_rows[f]).map_err(|_| {
            let mut set = helpers.to_vec();
            set.sort_unstable();
            CodeError::Axiom(AxiomViolation { axiom: Axiom::Repair, failed: Some(f), set })
        })?;
        let used = helpers.len() * p.beta;
        let mut out = Matrix::zeros(field, p.alpha, used);
        for r in 0..p.alpha {
            out.row_mut(r).copy_from_slice(&coeffs.row(r)[..used]);
        }
        Ok(out)
    }

    fn check_distinct(&self, nodes: &[usize], exclude: Option<usize>) -> Result<(), CodeError> {
        let mut seen = vec![false; self.params().n];
        for &h in nodes {
            self.check_node(h)?;
            if seen[h] {
                return Err(CodeError::Usage(format!("node {h} listed twice")));
            }
            if Some(h) == exclude {
                return Err(CodeError::Usage(format!("node {h} cannot help repair itself")));
            }
            seen[h] = true;
        }
        Ok(())
    }
}

impl RegeneratingCode for MsrCode {
    fn field(&self) -> &FieldSpec {
        self.stars.field()
    }

    fn n(&self) -> usize {
        self.params().n
    }

    fn k(&self) -> usize {
        self.params().k
    }

    fn d(&self) -> usize {
        self.params().d
    }

    fn alpha(&self) -> usize {
        self.params().alpha
    }

    fn beta(&self) -> usize {
        self.params().beta
    }

    fn file_size(&self) -> usize {
        self.params().file_size
    }

    fn encoding_matrix(&self, h: usize) -> Result<Matrix, CodeError> {
        Ok(self.node_rows(h)?.clone())
    }

    /// Uses the first `k` of `nodes`.
    fn download_plan(&self, nodes: &[usize]) -> Result<DownloadPlan, CodeError> {
        let k = self.params().k;
        self.check_distinct(nodes, None)?;
        if nodes.len() < k {
            return Err(CodeError::InsufficientNodes { have: nodes.len(), need: k });
        }
        let chosen = nodes[..k].to_vec();
        let blocks: Vec<&Matrix> = chosen.iter().map(|&h| &self.node_rows[h]).collect();
        let stacked = Matrix::stack(self.stars.field(), &blocks)?;
        let decode = stacked.inverse().map_err(|_| {
            let mut set = chosen.clone();
            set.sort_unstable();
            CodeError::Axiom(AxiomViolation { axiom: Axiom::Download, failed: None, set })
        })?;
        Ok(DownloadPlan { nodes: chosen, decode })
    }

    fn repair_plan(&self, failed: usize, helpers: &[usize]) -> Result<RepairPlan, CodeError> {
        let combine = self.combine_plan(failed, helpers)?;
        let help = helpers.iter().map(|&h| self.help_matrix(h, failed)).collect::<Result<_, _>>()?;
        Ok(RepairPlan { failed, helpers: helpers.to_vec(), help, combine })
    }
}
