//! Finding and certifying star families.
//!
//! [`grow_pool`] scans field elements in order and keeps each point whose
//! pattern vectors keep every axiom intact. [`nullstellensatz_witness`]
//! evaluates the `MDSdt` determinant at random points of a small prime field:
//! one nonzero value shows the determinant polynomial is not identically
//! zero, so suitable stars exist over every large enough field.

use std::fmt;
use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::code::{check_axioms, derive_params, AxiomReport, CodeError, CodeParams, Flavor, StarFamily};
use crate::field::{FieldSpec, Symbol};
use crate::linalg::Matrix;
use crate::tensor::{binomial, expand_node_basis_sym, wedge, x_tensor, ExtBasis, SymBasis};

#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub field: FieldSpec,
    pub params: CodeParams,
    /// `x_h = [a^{e} for e in x_pattern]`.
    pub x_pattern: Vec<u32>,
    /// Exponents for `y_h` (symmetric) or `w_h` (exterior).
    pub y_pattern: Vec<u32>,
    /// Stop once the pool has this many points.
    pub max_nodes: Option<usize>,
}

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("pattern has length {got}, expected {expected}")]
    Pattern { got: usize, expected: usize },
    #[error("search failed: pool of {} points, a code needs at least {needed}", pool.len())]
    PoolTooSmall { pool: Vec<Symbol>, needed: usize },
    #[error(transparent)]
    Code(#[from] CodeError),
}

/// Greedy pool growth. The returned family has `n` equal to the pool size.
pub fn grow_pool(cfg: &SearchConfig) -> Result<StarFamily, SearchError> {
    let p = cfg.params;
    if cfg.x_pattern.len() != p.t {
        return Err(SearchError::Pattern { got: cfg.x_pattern.len(), expected: p.t });
    }
    if cfg.y_pattern.len() != p.second_len() {
        return Err(SearchError::Pattern { got: cfg.y_pattern.len(), expected: p.second_len() });
    }
    let field = &cfg.field;
    let eval = |a: Symbol, exps: &[u32]| -> Vec<Symbol> { exps.iter().map(|&e| field.pow(a, e as i64).expect("non-negative exponent")).collect() };
    let mut pool = Vec::new();
    let mut xs: Vec<Vec<Symbol>> = Vec::new();
    let mut ys: Vec<Vec<Symbol>> = Vec::new();
    for a in 0..field.order() {
        if cfg.max_nodes.is_some_and(|m| pool.len() >= m) {
            break;
        }
        xs.push(eval(a, &cfg.x_pattern));
        ys.push(eval(a, &cfg.y_pattern));
        if check_axioms(field, &p, &xs, &ys, Some(xs.len() - 1)) == AxiomReport::Pass {
            pool.push(a);
        } else {
            xs.pop();
            ys.pop();
        }
    }
    let needed = p.d + 1;
    if pool.len() < needed {
        return Err(SearchError::PoolTooSmall { pool, needed });
    }
    let params = derive_params(pool.len(), p.k, p.d, p.flavor)?;
    Ok(StarFamily::from_pattern(field, params, &pool, &cfg.x_pattern, &cfg.y_pattern)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    NonzeroWitnessed,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::NonzeroWitnessed => "nonzero-witnessed",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone)]
pub struct WitnessReport {
    pub params: CodeParams,
    pub field_order: u32,
    pub seed: u64,
    /// Draws discarded before the witness (or all draws if inconclusive).
    pub redraws: usize,
    pub verdict: Verdict,
    /// The `d` pairs `(x_i, y_i)` (or `(x_i, w_i)`) of the witnessing draw.
    pub point: Option<(Vec<Vec<Symbol>>, Vec<Vec<Symbol>>)>,
}

/// The `dβ × dβ` matrix whose rows are `x_i ⊗ y_i ⊙ η` over the monomials
/// `η` of degree `t-2`.
pub fn mdsd_matrix(field: &FieldSpec, params: &CodeParams, x: &[Vec<Symbol>], y: &[Vec<Symbol>]) -> Matrix {
    let sub = SymBasis::new(params.dim_y(), params.t - 2);
    let rows: Vec<Vec<Symbol>> = x.iter().zip(y).flat_map(|(xi, yi)| expand_node_basis_sym(field, xi, yi, &sub)).collect();
    Matrix::from_rows(field, &rows).expect("rows share a length")
}

/// Rows `x_i ⊗ w_i ∧ ω'` together with `e_j ⊗ w_f ∧ ω'` for a further
/// random `w_f`; full column rank is the exterior analogue of a nonzero
/// determinant.
fn mdsq_matrix(field: &FieldSpec, params: &CodeParams, x: &[Vec<Symbol>], w: &[Vec<Symbol>], wf: &[Symbol]) -> Matrix {
    let k = params.k;
    let sub = ExtBasis::new(k, params.t - 2);
    let deg1 = ExtBasis::new(k, 1);
    let out = ExtBasis::new(k, params.t - 1);
    let block = |xv: &[Symbol], wv: &[Symbol]| -> Vec<Vec<Symbol>> {
        (0..sub.dim()).map(|j| x_tensor(field, xv, &wedge(field, wv, &deg1, &sub.unit(j), &sub, &out))).collect()
    };
    let mut rows: Vec<Vec<Symbol>> = x.iter().zip(w).flat_map(|(xi, wi)| block(xi, wi)).collect();
    for j in 0..params.t {
        let mut e = vec![0; params.t];
        e[j] = 1;
        rows.extend(block(&e, wf));
    }
    Matrix::from_rows(field, &rows).expect("rows share a length")
}

/// Evaluates the witness condition at a given point: the determinant
/// (symmetric) or a rank test (exterior, where the last `w` is `w_f`).
pub fn witness_holds(field: &FieldSpec, params: &CodeParams, x: &[Vec<Symbol>], second: &[Vec<Symbol>]) -> bool {
    match params.flavor {
        Flavor::Symmetric => mdsd_matrix(field, params, x, second).determinant().map(|d| d != 0).unwrap_or(false),
        Flavor::Exterior => {
            let (wf, ws) = second.split_last().expect("d + 1 vectors");
            let target = params.t * binomial(params.k, params.t - 1);
            mdsq_matrix(field, params, x, ws, wf).rank() == target
        }
    }
}

fn draw(rng: &mut ChaCha8Rng, field: &FieldSpec, count: usize, len: usize) -> Vec<Vec<Symbol>> {
    (0..count).map(|_| (0..len).map(|_| rng.random_range(0..field.order())).collect()).collect()
}

pub fn nullstellensatz_witness(params: &CodeParams, witness_field: &FieldSpec, seed: u64, max_redraws: usize) -> WitnessReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(case_stream(params));
    // the exterior test needs one extra vector for the failed node
    let extra = usize::from(params.flavor == Flavor::Exterior);
    for attempt in 0..=max_redraws {
        let x = draw(&mut rng, witness_field, params.d, params.t);
        let second = draw(&mut rng, witness_field, params.d + extra, params.second_len());
        if witness_holds(witness_field, params, &x, &second) {
            return WitnessReport {
                params: *params,
                field_order: witness_field.order(),
                seed,
                redraws: attempt,
                verdict: Verdict::NonzeroWitnessed,
                point: Some((x, second)),
            };
        }
    }
    WitnessReport {
        params: *params,
        field_order: witness_field.order(),
        seed,
        redraws: max_redraws + 1,
        verdict: Verdict::Inconclusive,
        point: None,
    }
}

fn case_stream(p: &CodeParams) -> u64 {
    ((p.k as u64) << 40) | ((p.d as u64) << 20) | p.t as u64
}

/// Every `(k, d, t)` with integral `t ≥ 2` and `α ≤ alpha_cap`, ordered by
/// `k` then `t`. `k` is capped at `alpha_cap + 1`, which only cuts off the
/// `t = k` family (`α = 1` for every `k`); all other cases have `α ≥ k - 1`.
pub fn small_cases(alpha_cap: usize, flavor: Flavor) -> Vec<CodeParams> {
    let mut out = Vec::new();
    for k in 2..=alpha_cap + 1 {
        for t in 2..=k {
            if (t * (k - 1)) % (t - 1) != 0 {
                continue;
            }
            let d = t * (k - 1) / (t - 1);
            if binomial(k - 1, t - 1) > alpha_cap {
                continue;
            }
            out.push(derive_params(d + 1, k, d, flavor).expect("integral t by construction"));
        }
    }
    out
}

pub fn sweep_small_cases(alpha_cap: usize, witness_field: &FieldSpec, seed: u64, max_redraws: usize) -> Vec<WitnessReport> {
    small_cases(alpha_cap, Flavor::Symmetric)
        .iter()
        .map(|p| nullstellensatz_witness(p, witness_field, seed, max_redraws))
        .collect()
}

/// Tab-separated report: `k d t alpha field redraws verdict`.
pub fn write_tsv<W: Write>(reports: &[WitnessReport], mut out: W) -> io::Result<()> {
    writeln!(out, "k\td\tt\talpha\tfield\tredraws\tverdict")?;
    for r in reports {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\tGF({})\t{}\t{}",
            r.params.k, r.params.d, r.params.t, r.params.alpha, r.field_order, r.redraws, r.verdict
        )?;
    }
    Ok(())
}
