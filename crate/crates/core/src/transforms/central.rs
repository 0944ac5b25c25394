use std::fmt;
use std::str::FromStr;

use crate::code::{Axiom, AxiomViolation, CodeError, Flavor, MsrCode, NodeContent};
use crate::field::Symbol;
use crate::linalg::{express_rows, IncrementalBasis, Matrix};
use crate::tensor::{sym_mul, x_tensor, SymBasis};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Every helper sends its restriction to `x_h ⊗ y_h ⊙ S^{t-2}Y ⊙ ⟨y_f, y_g⟩`.
    Naive,
    /// As naive, except the last helper only serves `f`; `g` is then
    /// repaired with the rebuilt `f` among its helpers.
    Cascade,
    /// Helpers are asked in order for symbols that still enlarge the
    /// received span, until it covers `X ⊗ S^{t-1}Y ⊙ ⟨y_f, y_g⟩`.
    Subspace,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Naive, Strategy::Cascade, Strategy::Subspace];
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Naive => "naive",
            Strategy::Cascade => "cascade",
            Strategy::Subspace => "subspace",
        })
    }
}

impl FromStr for Strategy {
    type Err = CodeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "naive" => Ok(Strategy::Naive),
            "cascade" => Ok(Strategy::Cascade),
            "subspace" => Ok(Strategy::Subspace),
            _ => Err(CodeError::Usage(format!("unknown strategy {s:?} (naive, cascade, subspace)"))),
        }
    }
}

/// Linear recipe for rebuilding two failed nodes at a central agent.
#[derive(Debug, Clone)]
pub struct CentralRepairPlan {
    pub failed: (usize, usize),
    pub helpers: Vec<usize>,
    pub strategy: Strategy,
    /// Per helper, `r_h × α` mapping its content to what it sends.
    pub requests: Vec<Matrix>,
    /// `α × bandwidth` maps from all received symbols to each failed node.
    pub rebuild_f: Matrix,
    pub rebuild_g: Matrix,
}

impl CentralRepairPlan {
    pub fn bandwidth(&self) -> usize {
        self.requests.iter().map(|m| m.rows()).sum()
    }

    pub fn messages(&self, contents: &[&[Symbol]]) -> Vec<Vec<Symbol>> {
        self.requests
            .iter()
            .zip(contents)
            .map(|(q, c)| {
                let mut out = vec![0; q.rows()];
                q.mul_vec_into(c, &mut out);
                out
            })
            .collect()
    }

    pub fn rebuild(&self, messages: &[Vec<Symbol>]) -> (Vec<Symbol>, Vec<Symbol>) {
        let joined: Vec<Symbol> = messages.iter().flatten().copied().collect();
        let mut f = vec![0; self.rebuild_f.rows()];
        let mut g = vec![0; self.rebuild_g.rows()];
        self.rebuild_f.mul_vec_into(&joined, &mut f);
        self.rebuild_g.mul_vec_into(&joined, &mut g);
        (f, g)
    }
}

/// `x_h ⊗ y_h ⊙ η ⊙ y_f` and `x_h ⊗ y_h ⊙ η ⊙ y_g` over monomials `η` of
/// degree `t-2`, reduced to an independent set. The `f` rows come first.
fn pair_rows(code: &MsrCode, h: usize, f: usize, g: usize, with_g: bool) -> Vec<Vec<Symbol>> {
    let p = code.params();
    let field = code.stars().field();
    let m = p.dim_y();
    let deg1 = SymBasis::new(m, 1);
    let deg2 = SymBasis::new(m, 2);
    let sub = SymBasis::new(m, p.t - 2);
    let out = SymBasis::new(m, p.t);
    let yh = code.stars().second(h);
    let mut rows = Vec::new();
    let mut acc = IncrementalBasis::new(field, p.file_size);
    let targets: &[usize] = if with_g { &[f, g] } else { &[f] };
    for &e in targets {
        let yy = sym_mul(field, yh, &deg1, code.stars().second(e), &deg1, &deg2);
        for j in 0..sub.dim() {
            let row = x_tensor(field, code.stars().x(h), &sym_mul(field, &sub.unit(j), &sub, &yy, &deg2, &out));
            if acc.insert(&row) {
                rows.push(row);
            }
        }
    }
    rows
}

/// Dimension of `X ⊗ S^{t-1}Y ⊙ ⟨y_f, y_g⟩`.
fn pair_space_dim(code: &MsrCode, f: usize, g: usize) -> usize {
    let p = code.params();
    let field = code.stars().field();
    let m = p.dim_y();
    let deg1 = SymBasis::new(m, 1);
    let mid = SymBasis::new(m, p.t - 1);
    let out = SymBasis::new(m, p.t);
    let mut acc = IncrementalBasis::new(field, p.file_size);
    for i in 0..p.t {
        let mut e = vec![0; p.t];
        e[i] = 1;
        for &v in &[f, g] {
            for j in 0..mid.dim() {
                acc.insert(&x_tensor(field, &e, &sym_mul(field, &mid.unit(j), &mid, code.stars().second(v), &deg1, &out)));
            }
        }
    }
    acc.rank()
}

pub fn plan_central_repair(code: &MsrCode, f: usize, g: usize, helpers: &[usize], strategy: Strategy) -> Result<CentralRepairPlan, CodeError> {
    let p = *code.params();
    if p.flavor != Flavor::Symmetric {
        return Err(CodeError::Usage("two-node repair is implemented for the symmetric flavor".into()));
    }
    if f == g {
        return Err(CodeError::Usage(format!("failed nodes must differ (got {f} twice)")));
    }
    let mut seen = vec![false; p.n];
    for &h in [f, g].iter().chain(helpers) {
        if h >= p.n {
            return Err(CodeError::NodeIndex { index: h, n: p.n });
        }
        if seen[h] {
            return Err(CodeError::Usage(format!("node {h} listed twice or both failed and helping")));
        }
        seen[h] = true;
    }
    if helpers.len() != p.d {
        return Err(CodeError::InsufficientNodes { have: helpers.len(), need: p.d });
    }
    let field = code.stars().field();

    let requested: Vec<Vec<Vec<Symbol>>> = match strategy {
        Strategy::Naive => helpers.iter().map(|&h| pair_rows(code, h, f, g, true)).collect(),
        Strategy::Cascade => helpers
            .iter()
            .enumerate()
            .map(|(i, &h)| pair_rows(code, h, f, g, i + 1 < helpers.len()))
            .collect(),
        Strategy::Subspace => {
            let target = pair_space_dim(code, f, g);
            let mut acc = IncrementalBasis::new(field, p.file_size);
            let mut out = Vec::with_capacity(helpers.len());
            for &h in helpers {
                let mut mine = Vec::new();
                if acc.rank() < target {
                    for row in pair_rows(code, h, f, g, true) {
                        if acc.insert(&row) {
                            mine.push(row);
                            if acc.rank() == target {
                                break;
                            }
                        }
                    }
                }
                out.push(mine);
            }
            out
        }
    };

    let mut requests = Vec::with_capacity(helpers.len());
    let mut pool = Matrix::zeros(field, 0, p.file_size);
    for (&h, rows) in helpers.iter().zip(&requested) {
        let node = code.node_rows(h)?;
        let q = if rows.is_empty() {
            Matrix::zeros(field, 0, p.alpha)
        } else {
            let m = Matrix::from_rows(field, rows)?;
            express_rows(node, &m).map_err(|j| CodeError::Internal(format!("request {j} to node {h} is outside its subspace")))?
        };
        for row in rows {
            pool.push_row(row)?;
        }
        requests.push(q);
    }
    let violation = |node: usize| {
        let mut set = helpers.to_vec();
        set.sort_unstable();
        CodeError::Axiom(AxiomViolation { axiom: Axiom::Repair, failed: Some(node), set })
    };
    let rebuild_f = express_rows(&pool, code.node_rows(f)?).map_err(|_| violation(f))?;
    let rebuild_g = express_rows(&pool, code.node_rows(g)?).map_err(|_| violation(g))?;
    Ok(CentralRepairPlan { failed: (f, g), helpers: helpers.to_vec(), strategy, requests, rebuild_f, rebuild_g })
}

/// Rebuilds `f` and `g` from the helpers' full contents; returns both
/// nodes and the number of symbols sent.
pub fn central_repair_two(
    code: &MsrCode,
    contents: &[NodeContent],
    f: usize,
    g: usize,
    strategy: Strategy,
) -> Result<(NodeContent, NodeContent, usize), CodeError> {
    let helpers: Vec<usize> = contents.iter().map(|c| c.node).collect();
    let plan = plan_central_repair(code, f, g, &helpers, strategy)?;
    for c in contents {
        if c.values.len() != code.params().alpha {
            return Err(CodeError::Length { what: "node content", got: c.values.len(), expected: code.params().alpha });
        }
    }
    let views: Vec<&[Symbol]> = contents.iter().map(|c| c.values.as_slice()).collect();
    let (vf, vg) = plan.rebuild(&plan.messages(&views));
    Ok((NodeContent { node: f, values: vf }, NodeContent { node: g, values: vg }, plan.bandwidth()))
}

/// `d(2k-5)` for `t = 3`.
pub fn naive_bandwidth(k: usize, d: usize) -> usize {
    d * (2 * k - 5)
}

/// `(d-1)(2k-5) + (k-2)` for `t = 3`.
pub fn cascade_bandwidth(k: usize, d: usize) -> usize {
    (d - 1) * (2 * k - 5) + (k - 2)
}

/// `3(k-2)^2` for `t = 3`.
pub fn subspace_bandwidth(k: usize) -> usize {
    3 * (k - 2) * (k - 2)
}

/// Cut-set bound `2dα / (d - k + 2)` for two simultaneous failures, as a
/// reduced fraction.
pub fn cut_set_bandwidth_two(k: usize, d: usize, alpha: usize) -> (u128, u128) {
    reduce((2 * d * alpha) as u128, (d + 2 - k) as u128)
}

/// `subspace_bandwidth(k) - cut_set_bandwidth_two` at `t = 3`, reduced.
pub fn subspace_gap(k: usize) -> (i128, u128) {
    let d = 3 * (k - 1) / 2;
    let alpha = (k - 1) * (k - 2) / 2;
    let (num, den) = cut_set_bandwidth_two(k, d, alpha);
    let diff = subspace_bandwidth(k) as i128 * den as i128 - num as i128;
    let g = gcd(diff.unsigned_abs(), den);
    (diff / g as i128, den / g)
}

fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a.max(1)
    } else {
        gcd(b, a % b)
    }
}

fn reduce(num: u128, den: u128) -> (u128, u128) {
    let g = gcd(num, den);
    (num / g, den / g)
}
