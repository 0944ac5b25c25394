//! Classical product-matrix MSR codes for `d = 2(k-1)`, written directly in
//! matrix form. Used as an independent check of the `t = 2` codes.
//!
//! Symmetric variant: the file is two symmetric `(k-1)×(k-1)` matrices
//! `S1, S2`; node `h` stores `y_h S1 + ξ_h y_h S2`.
//! Skew variant: the file is two alternating `k×k` matrices `A1, A2`; node
//! `h` stores `w_h A1 + ξ_h w_h A2`, a vector orthogonal to `w_h`, so only
//! `k-1` of its coordinates are kept.
//!
//! Packing: `M = k(k-1)` raw symbols fill the upper triangle (strict upper
//! triangle for the skew variant) of the first matrix row by row, then the
//! second. This is the same order as the coordinates of `X ⊗ S^2 Y`
//! (resp. `X ⊗ Λ^2 W`), so a packed file and a file tensor share one vector.

use thiserror::Error;

use crate::field::{FieldSpec, Symbol};
use crate::linalg::{dot, LinalgError, Matrix};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PmError {
    #[error("decoupling is singular: nodes {0} and {1} share the same ξ")]
    DecouplingSingular(usize, usize),
    #[error("rank-deficient system: {0}")]
    RankDeficient(&'static str),
    #[error("expected {expected} values, got {got}")]
    Length { expected: usize, got: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Node data needed by the oracle: `ξ_h` and `y_h` (or `w_h`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PmStar {
    pub xi: Symbol,
    pub v: Vec<Symbol>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetricFile {
    pub s1: Matrix,
    pub s2: Matrix,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkewFile {
    pub a1: Matrix,
    pub a2: Matrix,
}

fn row_times(v: &[Symbol], m: &Matrix) -> Vec<Symbol> {
    m.transpose().mul_vec(v).expect("dimensions agree")
}

fn combine(field: &FieldSpec, a: &[Symbol], xi: Symbol, b: &[Symbol]) -> Vec<Symbol> {
    a.iter().zip(b).map(|(&x, &y)| field.mul_add(x, xi, y)).collect()
}

impl SymmetricFile {
    pub fn pack(field: &FieldSpec, k: usize, raw: &[Symbol]) -> Result<Self, PmError> {
        let s = k - 1;
        let half = s * (s + 1) / 2;
        if raw.len() != 2 * half {
            return Err(PmError::Length { expected: 2 * half, got: raw.len() });
        }
        let fill = |part: &[Symbol]| {
            let mut m = Matrix::zeros(field, s, s);
            let mut it = part.iter();
            for i in 0..s {
                for j in i..s {
                    let v = *it.next().expect("sized");
                    m.set(i, j, v);
                    m.set(j, i, v);
                }
            }
            m
        };
        Ok(SymmetricFile { s1: fill(&raw[..half]), s2: fill(&raw[half..]) })
    }

    pub fn unpack(&self) -> Vec<Symbol> {
        let s = self.s1.rows();
        let mut out = Vec::with_capacity(s * (s + 1));
        for m in [&self.s1, &self.s2] {
            for i in 0..s {
                for j in i..s {
                    out.push(m.get(i, j));
                }
            }
        }
        out
    }
}

impl SkewFile {
    pub fn pack(field: &FieldSpec, k: usize, raw: &[Symbol]) -> Result<Self, PmError> {
        let half = k * (k - 1) / 2;
        if raw.len() != 2 * half {
            return Err(PmError::Length { expected: 2 * half, got: raw.len() });
        }
        let fill = |part: &[Symbol]| {
            let mut m = Matrix::zeros(field, k, k);
            let mut it = part.iter();
            for i in 0..k {
                for j in i + 1..k {
                    let v = *it.next().expect("sized");
                    m.set(i, j, v);
                    m.set(j, i, field.neg(v));
                }
            }
            m
        };
        Ok(SkewFile { a1: fill(&raw[..half]), a2: fill(&raw[half..]) })
    }

    pub fn unpack(&self) -> Vec<Symbol> {
        let k = self.a1.rows();
        let mut out = Vec::with_capacity(k * (k - 1));
        for m in [&self.a1, &self.a2] {
            for i in 0..k {
                for j in i + 1..k {
                    out.push(m.get(i, j));
                }
            }
        }
        out
    }
}

/// `y_h S1 + ξ_h y_h S2`.
pub fn pm_node(file: &SymmetricFile, star: &PmStar) -> Vec<Symbol> {
    let f = file.s1.field();
    combine(f, &row_times(&star.v, &file.s1), star.xi, &row_times(&star.v, &file.s2))
}

fn check_distinct_xi(stars: &[&PmStar]) -> Result<(), PmError> {
    for i in 0..stars.len() {
        for j in i + 1..stars.len() {
            if stars[i].xi == stars[j].xi {
                return Err(PmError::DecouplingSingular(i, j));
            }
        }
    }
    Ok(())
}

/// Solves `[[1, a], [1, b]] (p, q) = (u, v)` (or the skew analogue with the
/// second row negated).
fn decouple(field: &FieldSpec, a: Symbol, b: Symbol, u: Symbol, v: Symbol, skew: bool) -> Result<(Symbol, Symbol), LinalgError> {
    let rows = if skew {
        vec![vec![1, a], vec![field.neg(1), field.neg(b)]]
    } else {
        vec![vec![1, a], vec![1, b]]
    };
    let sol = Matrix::from_rows(field, &rows)?.solve(&[u, v])?;
    if !sol.unique {
        return Err(LinalgError::Singular);
    }
    Ok((sol.x[0], sol.x[1]))
}

/// Recovers `S1, S2` from `k` node vectors.
pub fn pm_download(field: &FieldSpec, stars: &[PmStar], nodes: &[Vec<Symbol>]) -> Result<SymmetricFile, PmError> {
    let k = stars.len();
    if nodes.len() != k {
        return Err(PmError::Length { expected: k, got: nodes.len() });
    }
    check_distinct_xi(&stars.iter().collect::<Vec<_>>())?;
    // P = C Ψ^T with C the stacked node vectors and Ψ the stacked y's:
    // P[i][j] = P1[i][j] + ξ_i P2[i][j] where P_a = Ψ S_a Ψ^T is symmetric.
    let p: Vec<Vec<Symbol>> = nodes.iter().map(|c| stars.iter().map(|s| dot(field, c, &s.v)).collect()).collect();
    let mut p1 = vec![vec![0; k]; k];
    let mut p2 = vec![vec![0; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            let (a, b) = decouple(field, stars[i].xi, stars[j].xi, p[i][j], p[j][i], false)
                .map_err(|_| PmError::DecouplingSingular(i, j))?;
            p1[i][j] = a;
            p1[j][i] = a;
            p2[i][j] = b;
            p2[j][i] = b;
        }
    }
    let s1 = complete_span(field, stars, &p1)?;
    let s2 = complete_span(field, stars, &p2)?;
    Ok(SymmetricFile { s1, s2 })
}

/// From the off-diagonal entries of `Ψ S Ψ^T`, recover `S`: row `i` gives
/// `y_i S` against the other `k-1` stars, and any `k-1` such rows give `S`.
fn complete_span(field: &FieldSpec, stars: &[PmStar], p: &[Vec<Symbol>]) -> Result<Matrix, PmError> {
    let k = stars.len();
    let mut ys_s = Vec::with_capacity(k - 1);
    for i in 0..k - 1 {
        let others: Vec<&[Symbol]> = (0..k).filter(|&j| j != i).map(|j| stars[j].v.as_slice()).collect();
        let rhs: Vec<Symbol> = (0..k).filter(|&j| j != i).map(|j| p[i][j]).collect();
        let sol = Matrix::from_rows(field, &others)?.solve(&rhs)?;
        if !sol.unique {
            return Err(PmError::RankDeficient("k-1 stars do not span"));
        }
        ys_s.push(sol.x);
    }
    let basis: Vec<&[Symbol]> = stars[..k - 1].iter().map(|s| s.v.as_slice()).collect();
    let ymat = Matrix::from_rows(field, &basis)?;
    let rhs = Matrix::from_rows(field, &ys_s)?;
    let sol = ymat.solve_matrix(&rhs)?;
    if !sol.unique {
        return Err(PmError::RankDeficient("first k-1 stars do not span"));
    }
    Ok(sol.x)
}

/// `(y_h S1 + ξ_h y_h S2) y_f^T`.
pub fn pm_help(file: &SymmetricFile, helper: &PmStar, failed: &PmStar) -> Symbol {
    dot(file.s1.field(), &pm_node(file, helper), &failed.v)
}

/// Rebuilds `y_f S1 + ξ_f y_f S2` from `d` scalars.
pub fn pm_repair(field: &FieldSpec, helpers: &[PmStar], scalars: &[Symbol], failed: &PmStar) -> Result<Vec<Symbol>, PmError> {
    if scalars.len() != helpers.len() {
        return Err(PmError::Length { expected: helpers.len(), got: scalars.len() });
    }
    let rows: Vec<Vec<Symbol>> = helpers
        .iter()
        .map(|h| h.v.iter().copied().chain(h.v.iter().map(|&c| field.mul(h.xi, c))).collect())
        .collect();
    let sol = Matrix::from_rows(field, &rows)?.solve(scalars)?;
    if !sol.unique {
        return Err(PmError::RankDeficient("helper rows [y_h, ξ_h y_h] do not span"));
    }
    let s = failed.v.len();
    Ok(combine(field, &sol.x[..s], failed.xi, &sol.x[s..]))
}

/// `w_h A1 + ξ_h w_h A2`, all `k` coordinates.
pub fn skew_node(file: &SkewFile, star: &PmStar) -> Vec<Symbol> {
    let f = file.a1.field();
    combine(f, &row_times(&star.v, &file.a1), star.xi, &row_times(&star.v, &file.a2))
}

/// Index dropped from storage: the last coordinate where `w` is nonzero.
pub fn skew_omitted(w: &[Symbol]) -> Option<usize> {
    w.iter().rposition(|&c| c != 0)
}

/// The `k-1` stored coordinates of [`skew_node`].
pub fn skew_node_stored(file: &SkewFile, star: &PmStar) -> Vec<Symbol> {
    let full = skew_node(file, star);
    let p = skew_omitted(&star.v).expect("w is nonzero");
    full.iter().enumerate().filter(|&(i, _)| i != p).map(|(_, &v)| v).collect()
}

/// Restores the omitted coordinate from `v · w = 0`.
pub fn skew_expand(field: &FieldSpec, stored: &[Symbol], w: &[Symbol]) -> Vec<Symbol> {
    let p = skew_omitted(w).expect("w is nonzero");
    let mut full: Vec<Symbol> = Vec::with_capacity(w.len());
    full.extend_from_slice(&stored[..p]);
    full.push(0);
    full.extend_from_slice(&stored[p..]);
    let rest = dot(field, &full, w);
    full[p] = field.div(field.neg(rest), w[p]).expect("w[p] is nonzero");
    full
}

/// Recovers `A1, A2` from `k` stored node vectors.
pub fn skew_download(field: &FieldSpec, stars: &[PmStar], stored: &[Vec<Symbol>]) -> Result<SkewFile, PmError> {
    let k = stars.len();
    if stored.len() != k {
        return Err(PmError::Length { expected: k, got: stored.len() });
    }
    check_distinct_xi(&stars.iter().collect::<Vec<_>>())?;
    let nodes: Vec<Vec<Symbol>> = stored.iter().zip(stars).map(|(s, st)| skew_expand(field, s, &st.v)).collect();
    // P[i][j] = Q1[i][j] + ξ_i Q2[i][j] with Q_a = W A_a W^T alternating.
    let p: Vec<Vec<Symbol>> = nodes.iter().map(|c| stars.iter().map(|s| dot(field, c, &s.v)).collect()).collect();
    let mut q1 = Matrix::zeros(field, k, k);
    let mut q2 = Matrix::zeros(field, k, k);
    for i in 0..k {
        for j in i + 1..k {
            let (a, b) = decouple(field, stars[i].xi, stars[j].xi, p[i][j], p[j][i], true)
                .map_err(|_| PmError::DecouplingSingular(i, j))?;
            q1.set(i, j, a);
            q1.set(j, i, field.neg(a));
            q2.set(i, j, b);
            q2.set(j, i, field.neg(b));
        }
    }
    let wmat = Matrix::from_rows(field, &stars.iter().map(|s| s.v.clone()).collect::<Vec<_>>())?;
    let winv = wmat.inverse().map_err(|_| PmError::RankDeficient("w stars do not span"))?;
    let winv_t = winv.transpose();
    let a1 = winv.mul(&q1)?.mul(&winv_t)?;
    let a2 = winv.mul(&q2)?.mul(&winv_t)?;
    Ok(SkewFile { a1, a2 })
}

/// `(w_h A1 + ξ_h w_h A2) w_f^T`.
pub fn skew_help(file: &SkewFile, helper: &PmStar, failed: &PmStar) -> Symbol {
    dot(file.a1.field(), &skew_node(file, helper), &failed.v)
}

/// Rebuilds the failed node's full vector from `2(k-1)` scalars plus the
/// two known-zero equations `w_f A_a w_f^T = 0`.
pub fn skew_repair(field: &FieldSpec, helpers: &[PmStar], scalars: &[Symbol], failed: &PmStar) -> Result<Vec<Symbol>, PmError> {
    if scalars.len() != helpers.len() {
        return Err(PmError::Length { expected: helpers.len(), got: scalars.len() });
    }
    let k = failed.v.len();
    let mut rows: Vec<Vec<Symbol>> = helpers
        .iter()
        .map(|h| h.v.iter().copied().chain(h.v.iter().map(|&c| field.mul(h.xi, c))).collect())
        .collect();
    rows.push(failed.v.iter().copied().chain(std::iter::repeat_n(0, k)).collect());
    rows.push(std::iter::repeat_n(0, k).chain(failed.v.iter().copied()).collect());
    let mut rhs = scalars.to_vec();
    rhs.extend([0, 0]);
    let sol = Matrix::from_rows(field, &rows)?.solve(&rhs)?;
    if !sol.unique {
        return Err(PmError::RankDeficient("bordered helper matrix is singular"));
    }
    // u_a = A_a w_f^T, and w_f A_a = -u_a^T
    let v = combine(field, &sol.x[..k], failed.xi, &sol.x[k..]);
    Ok(v.iter().map(|&c| field.neg(c)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pack_roundtrip() {
        let f = FieldSpec::prime(7).unwrap();
        let raw: Vec<Symbol> = (0..6).collect();
        let s = SymmetricFile::pack(&f, 3, &raw).unwrap();
        assert_eq!(s.s1, s.s1.transpose());
        assert_eq!(s.unpack(), raw);
        let a = SkewFile::pack(&f, 3, &raw).unwrap();
        assert_eq!(a.unpack(), raw);
        for i in 0..3 {
            assert_eq!(a.a1.get(i, i), 0);
        }
    }

    #[test]
    fn decoupling_matrix_invertible_iff_distinct() {
        let f = FieldSpec::gf16();
        assert!(decouple(&f, 3, 5, 1, 1, false).is_ok());
        assert!(decouple(&f, 3, 3, 1, 1, false).is_err());
    }

    #[test]
    fn s2_zero_makes_node_independent_of_xi() {
        let f = FieldSpec::prime(7).unwrap();
        let file = SymmetricFile::pack(&f, 3, &[1, 2, 3, 0, 0, 0]).unwrap();
        let a = pm_node(&file, &PmStar { xi: 2, v: vec![1, 4] });
        let b = pm_node(&file, &PmStar { xi: 5, v: vec![1, 4] });
        assert_eq!(a, b);
    }
}
