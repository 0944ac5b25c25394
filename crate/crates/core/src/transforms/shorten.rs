use crate::code::{Axiom, AxiomViolation, CodeError, DownloadPlan, MsrCode, RegeneratingCode, RepairPlan};
use crate::field::FieldSpec;
use crate::linalg::Matrix;

/// A code derived from an `(n, k, d, α)` code by pinning `δ` nodes to
/// all-zero content, giving an `(n-δ, k-δ, d-δ, α)` code.
///
/// Shortening a shortened code pins more nodes of the same base, so the
/// result is always one level deep.
#[derive(Debug, Clone)]
pub struct ShortenedCode {
    base: MsrCode,
    /// Base indices of the pinned nodes, increasing.
    pinned: Vec<usize>,
    /// Base index of each node of the shortened code.
    live: Vec<usize>,
    /// `M × (k-δ)α`; file tensor = `basis · user symbols`.
    basis: Matrix,
    /// Coordinates of the file tensor that equal the user symbols.
    free_columns: Vec<usize>,
}

/// Pins the last `delta` nodes of `base`.
pub fn shorten(base: &MsrCode, delta: usize) -> Result<ShortenedCode, CodeError> {
    let n = base.params().n;
    if delta >= base.params().k {
        return Err(CodeError::InvalidParams(format!("shortening depth {delta} must be below k = {}", base.params().k)));
    }
    ShortenedCode::with_pinned(base, (n - delta..n).collect())
}

impl ShortenedCode {
    pub fn with_pinned(base: &MsrCode, mut pinned: Vec<usize>) -> Result<Self, CodeError> {
        let p = *base.params();
        pinned.sort_unstable();
        pinned.dedup();
        if pinned.len() >= p.k {
            return Err(CodeError::InvalidParams(format!("shortening depth {} must be below k = {}", pinned.len(), p.k)));
        }
        if let Some(&bad) = pinned.iter().find(|&&h| h >= p.n) {
            return Err(CodeError::NodeIndex { index: bad, n: p.n });
        }
        let field = base.stars().field().clone();
        let blocks: Vec<&Matrix> = pinned.iter().map(|&h| base.node_rows(h)).collect::<Result<_, _>>()?;
        let constraint = if blocks.is_empty() { Matrix::zeros(&field, 0, p.file_size) } else { Matrix::stack(&field, &blocks)? };
        let ns = constraint.nullspace();
        let expected = (p.k - pinned.len()) * p.alpha;
        if ns.basis.len() != expected {
            return Err(CodeError::Axiom(AxiomViolation { axiom: Axiom::Download, failed: None, set: pinned }));
        }
        let mut basis = Matrix::zeros(&field, p.file_size, expected);
        for (c, v) in ns.basis.iter().enumerate() {
            for (r, &x) in v.iter().enumerate() {
                basis.set(r, c, x);
            }
        }
        let live = (0..p.n).filter(|h| !pinned.contains(h)).collect();
        Ok(ShortenedCode { base: base.clone(), pinned, live, basis, free_columns: ns.free_columns })
    }

    /// Pins the last `delta` live nodes as well.
    pub fn shorten(&self, delta: usize) -> Result<ShortenedCode, CodeError> {
        if delta > self.live.len() {
            return Err(CodeError::InvalidParams(format!("cannot pin {delta} of {} live nodes", self.live.len())));
        }
        let mut pinned = self.pinned.clone();
        pinned.extend_from_slice(&self.live[self.live.len() - delta..]);
        Self::with_pinned(&self.base, pinned)
    }

    pub fn base(&self) -> &MsrCode {
        &self.base
    }

    pub fn pinned(&self) -> &[usize] {
        &self.pinned
    }

    pub fn depth(&self) -> usize {
        self.pinned.len()
    }

    /// Base index of shortened node `h`.
    pub fn base_index(&self, h: usize) -> Result<usize, CodeError> {
        self.live.get(h).copied().ok_or(CodeError::NodeIndex { index: h, n: self.live.len() })
    }

    /// The base file tensor carrying `raw`.
    pub fn file_tensor(&self, raw: &[crate::field::Symbol]) -> Result<Vec<crate::field::Symbol>, CodeError> {
        if raw.len() != self.file_size() {
            return Err(CodeError::Length { what: "raw file", got: raw.len(), expected: self.file_size() });
        }
        Ok(self.basis.mul_vec(raw)?)
    }

    fn base_indices(&self, nodes: &[usize]) -> Result<Vec<usize>, CodeError> {
        nodes.iter().map(|&h| self.base_index(h)).collect()
    }
}

impl RegeneratingCode for ShortenedCode {
    fn field(&self) -> &FieldSpec {
        self.base.stars().field()
    }

    fn n(&self) -> usize {
        self.live.len()
    }

    fn k(&self) -> usize {
        self.base.params().k - self.depth()
    }

    fn d(&self) -> usize {
        self.base.params().d - self.depth()
    }

    fn alpha(&self) -> usize {
        self.base.params().alpha
    }

    fn beta(&self) -> usize {
        self.base.params().beta
    }

    fn file_size(&self) -> usize {
        self.k() * self.alpha()
    }

    fn encoding_matrix(&self, h: usize) -> Result<Matrix, CodeError> {
        Ok(self.base.node_rows(self.base_index(h)?)?.mul(&self.basis)?)
    }

    /// Uses the first `k - δ` of `nodes` plus the pinned zeros.
    fn download_plan(&self, nodes: &[usize]) -> Result<DownloadPlan, CodeError> {
        if nodes.len() < self.k() {
            return Err(CodeError::InsufficientNodes { have: nodes.len(), need: self.k() });
        }
        let chosen = nodes[..self.k()].to_vec();
        let mut all = self.base_indices(&chosen)?;
        all.extend_from_slice(&self.pinned);
        let base_plan = self.base.download_plan(&all)?;
        // user symbols are the free coordinates; pinned contents are zero
        let used = chosen.len() * self.alpha();
        let mut decode = Matrix::zeros(self.field(), self.file_size(), used);
        for (r, &fc) in self.free_columns.iter().enumerate() {
            decode.row_mut(r).copy_from_slice(&base_plan.decode.row(fc)[..used]);
        }
        Ok(DownloadPlan { nodes: chosen, decode })
    }

    /// Pinned nodes take part as helpers whose messages are known to be zero.
    fn repair_plan(&self, failed: usize, helpers: &[usize]) -> Result<RepairPlan, CodeError> {
        let mut all = self.base_indices(helpers)?;
        all.extend_from_slice(&self.pinned);
        let base_plan = self.base.repair_plan(self.base_index(failed)?, &all)?;
        let used = helpers.len() * self.beta();
        let mut combine = Matrix::zeros(self.field(), self.alpha(), used);
        for r in 0..self.alpha() {
            combine.row_mut(r).copy_from_slice(&base_plan.combine.row(r)[..used]);
        }
        let help = base_plan.help[..helpers.len()].to_vec();
        Ok(RepairPlan { failed, helpers: helpers.to_vec(), help, combine })
    }
}
