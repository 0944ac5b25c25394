use std::fmt;

use super::{CodeParams, Flavor, StarFamily};
use crate::field::{FieldSpec, Symbol};
use crate::linalg::Matrix;
use crate::tensor::{combinations, expand_node_basis_sym, x_tensor, ExtBasis, SymBasis};

/// The spanning conditions a star family must meet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axiom {
    /// Any `t` of the `x_h` span `X`.
    MdsX,
    /// Any `k-t+1` of the `y_h` span `Y`.
    MdsY,
    /// Any `d` of the spaces `x_h ⊗ y_h ⊙ S^{t-2}Y` span `X ⊗ S^{t-1}Y`.
    MdsD,
    /// Any `k` of the `w_h` span `W`.
    MdsW,
    /// For each `f`, any `d` of the spaces `x_h ⊗ w_h ∧ Λ^{t-2}W` span
    /// `X ⊗ Λ^{t-1}W` modulo `X ⊗ w_f ∧ Λ^{t-2}W`.
    MdsQ,
    /// An exterior star `w_h` is zero.
    ZeroStar,
    /// A download from the named nodes was singular.
    Download,
    /// A node could not be rebuilt from the named helpers.
    Repair,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axiom::MdsX => "MDSxt",
            Axiom::MdsY => "MDSyt",
            Axiom::MdsD => "MDSdt",
            Axiom::MdsW => "MDSwt",
            Axiom::MdsQ => "MDSqt",
            Axiom::ZeroStar => "zero-star",
            Axiom::Download => "download",
            Axiom::Repair => "repair",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomViolation {
    pub axiom: Axiom,
    /// The failing node for `MDSqt` and repair failures.
    pub failed: Option<usize>,
    /// The offending node subset, in increasing order.
    pub set: Vec<usize>,
}

impl fmt::Display for AxiomViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} fails on nodes {:?}", self.axiom, self.set)?;
        if let Some(g) = self.failed {
            write!(f, " for failed node {g}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AxiomReport {
    Pass,
    Violation(AxiomViolation),
}

impl AxiomReport {
    pub fn is_pass(&self) -> bool {
        matches!(self, AxiomReport::Pass)
    }
}

/// Exhaustive check of every axiom for the family's flavor.
pub fn verify_axioms(stars: &StarFamily) -> AxiomReport {
    check_axioms(stars.field(), stars.params(), stars.x_stars(), stars.second_stars(), None)
}

/// Checks the axioms on the nodes given (which may be fewer than
/// `params.n`). With `touching = Some(j)` only subsets containing node `j`
/// are examined; for `MDSqt` that also covers `f = j`.
pub fn check_axioms(
    field: &FieldSpec,
    params: &CodeParams,
    x: &[Vec<Symbol>],
    second: &[Vec<Symbol>],
    touching: Option<usize>,
) -> AxiomReport {
    let n = x.len().min(second.len());
    let keep = |set: &[usize]| touching.is_none_or(|j| set.contains(&j));

    if params.flavor == Flavor::Exterior {
        for (h, w) in second.iter().enumerate().take(n) {
            if keep(&[h]) && w.iter().all(|&c| c == 0) {
                return violation(Axiom::ZeroStar, None, vec![h]);
            }
        }
    }

    for set in combinations(n, params.t) {
        if keep(&set) && !full_rank(field, set.iter().map(|&h| x[h].clone()).collect(), params.t) {
            return violation(Axiom::MdsX, None, set);
        }
    }

    let (axiom, len) = match params.flavor {
        Flavor::Symmetric => (Axiom::MdsY, params.dim_y()),
        Flavor::Exterior => (Axiom::MdsW, params.k),
    };
    for set in combinations(n, len) {
        if keep(&set) && !full_rank(field, set.iter().map(|&h| second[h].clone()).collect(), len) {
            return violation(axiom, None, set);
        }
    }

    match params.flavor {
        Flavor::Symmetric => {
            let sub = SymBasis::new(params.dim_y(), params.t - 2);
            let rows: Vec<Vec<Vec<Symbol>>> = (0..n).map(|h| expand_node_basis_sym(field, &x[h], &second[h], &sub)).collect();
            let target = params.t * SymBasis::new(params.dim_y(), params.t - 1).dim();
            for set in combinations(n, params.d) {
                if keep(&set) {
                    let stacked: Vec<Vec<Symbol>> = set.iter().flat_map(|&h| rows[h].iter().cloned()).collect();
                    if !full_rank(field, stacked, target) {
                        return violation(Axiom::MdsD, None, set);
                    }
                }
            }
        }
        Flavor::Exterior => {
            let rows: Vec<Vec<Vec<Symbol>>> = (0..n).map(|h| wedge_rows(field, params, &x[h], &second[h])).collect();
            let augment: Vec<Vec<Vec<Symbol>>> = (0..n)
                .map(|f| (0..params.t).flat_map(|i| wedge_rows(field, params, &unit(params.t, i), &second[f])).collect())
                .collect();
            let target = params.t * ExtBasis::new(params.k, params.t - 1).dim();
            for f in 0..n {
                let others: Vec<usize> = (0..n).filter(|&h| h != f).collect();
                for pick in combinations(others.len(), params.d) {
                    let set: Vec<usize> = pick.iter().map(|&i| others[i]).collect();
                    if touching.is_some_and(|j| j != f && !set.contains(&j)) {
                        continue;
                    }
                    let mut stacked: Vec<Vec<Symbol>> = set.iter().flat_map(|&h| rows[h].iter().cloned()).collect();
                    stacked.extend(augment[f].iter().cloned());
                    if !full_rank(field, stacked, target) {
                        return violation(Axiom::MdsQ, Some(f), set);
                    }
                }
            }
        }
    }
    AxiomReport::Pass
}

/// `x ⊗ (w ∧ ω')` for every basis wedge `ω'` of degree `t-2`.
fn wedge_rows(field: &FieldSpec, params: &CodeParams, x: &[Symbol], w: &[Symbol]) -> Vec<Vec<Symbol>> {
    let sub = ExtBasis::new(params.k, params.t - 2);
    let deg1 = ExtBasis::new(params.k, 1);
    let out = ExtBasis::new(params.k, params.t - 1);
    (0..sub.dim())
        .map(|j| x_tensor(field, x, &crate::tensor::wedge(field, w, &deg1, &sub.unit(j), &sub, &out)))
        .collect()
}

fn unit(len: usize, i: usize) -> Vec<Symbol> {
    let mut v = vec![0; len];
    v[i] = 1;
    v
}

fn full_rank(field: &FieldSpec, rows: Vec<Vec<Symbol>>, target: usize) -> bool {
    if rows.is_empty() {
        return target == 0;
    }
    Matrix::from_rows(field, &rows).map(|m| m.rank() == target).unwrap_or(false)
}

fn violation(axiom: Axiom, failed: Option<usize>, set: Vec<usize>) -> AxiomReport {
    AxiomReport::Violation(AxiomViolation { axiom, failed, set })
}
