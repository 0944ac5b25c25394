//! Coordinates for symmetric powers `S^q Y` and exterior powers `Λ^q W`.
//!
//! `S^q Y` is realized as the degree-`q` homogeneous polynomials in `m`
//! variables: the basis is the monomials, indexed by non-decreasing
//! `q`-tuples in lexicographic order, and `⊙` is polynomial multiplication.
//! The coefficient of a monomial in `y_1 ⊙ ... ⊙ y_q` is the sum over the
//! distinct arrangements of its index multiset, with no division by
//! multiplicities, so the same formulas work in characteristic 2.
//!
//! `Λ^q W` uses strictly increasing `q`-tuples; the coordinate of
//! `w_1 ∧ ... ∧ w_q` on a tuple is the corresponding maximal minor.
//!
//! Elements of `X ⊗ V` are laid out X-major: block `i` holds the
//! coefficient of `e_i ⊗ (·)`.

use std::collections::HashMap;

use thiserror::Error;

use crate::field::{FieldSpec, Symbol};
use crate::linalg::IncrementalBasis;

/// Coordinates against one of the canonical bases below.
pub type TensorCoords = Vec<Symbol>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TensorError {
    #[error("vector {index} has length {got}, expected {expected}")]
    LengthMismatch { index: usize, got: usize, expected: usize },
    #[error("the wedge factor must be a nonzero vector")]
    ZeroVector,
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

fn nondecreasing(m: usize, q: usize) -> Vec<Vec<usize>> {
    fn rec(m: usize, q: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == q {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            cur.push(i);
            rec(m, q, i, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if m > 0 || q == 0 {
        rec(m, q, 0, &mut Vec::with_capacity(q), &mut out);
    }
    out
}

/// Strictly increasing `q`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, q: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, q: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == q {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < q - cur.len() {
                break;
            }
            cur.push(i);
            rec(n, q, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if q <= n {
        rec(n, q, 0, &mut Vec::with_capacity(q), &mut out);
    }
    out
}

/// Monomial basis of `S^q F^m`.
#[derive(Debug, Clone)]
pub struct SymBasis {
    m: usize,
    q: usize,
    tuples: Vec<Vec<usize>>,
    rank: HashMap<Vec<usize>, usize>,
}

impl SymBasis {
    pub fn new(m: usize, q: usize) -> Self {
        let tuples = nondecreasing(m, q);
        let rank = tuples.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        SymBasis { m, q, tuples, rank }
    }

    pub fn dim_y(&self) -> usize {
        self.m
    }

    pub fn degree(&self) -> usize {
        self.q
    }

    pub fn dim(&self) -> usize {
        self.tuples.len()
    }

    pub fn tuples(&self) -> &[Vec<usize>] {
        &self.tuples
    }

    pub fn tuple(&self, i: usize) -> &[usize] {
        &self.tuples[i]
    }

    /// Position of a non-decreasing tuple.
    pub fn index_of(&self, tuple: &[usize]) -> Option<usize> {
        self.rank.get(tuple).copied()
    }

    /// Coordinates of the basis monomial `i`.
    pub fn unit(&self, i: usize) -> TensorCoords {
        let mut v = vec![0; self.dim()];
        v[i] = 1;
        v
    }
}

/// Basis of `Λ^q F^k` by strictly increasing tuples.
#[derive(Debug, Clone)]
pub struct ExtBasis {
    k: usize,
    q: usize,
    tuples: Vec<Vec<usize>>,
    rank: HashMap<Vec<usize>, usize>,
}

impl ExtBasis {
    pub fn new(k: usize, q: usize) -> Self {
        let tuples = combinations(k, q);
        let rank = tuples.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        ExtBasis { k, q, tuples, rank }
    }

    pub fn dim_w(&self) -> usize {
        self.k
    }

    pub fn degree(&self) -> usize {
        self.q
    }

    pub fn dim(&self) -> usize {
        self.tuples.len()
    }

    pub fn tuples(&self) -> &[Vec<usize>] {
        &self.tuples
    }

    pub fn tuple(&self, i: usize) -> &[usize] {
        &self.tuples[i]
    }

    pub fn index_of(&self, tuple: &[usize]) -> Option<usize> {
        self.rank.get(tuple).copied()
    }

    pub fn unit(&self, i: usize) -> TensorCoords {
        let mut v = vec![0; self.dim()];
        v[i] = 1;
        v
    }
}

fn merge_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i] <= b[j]) {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out
}

/// Product `a ⊙ b` of two symmetric tensors.
pub fn sym_mul(field: &FieldSpec, a: &[Symbol], ba: &SymBasis, b: &[Symbol], bb: &SymBasis, out: &SymBasis) -> TensorCoords {
    debug_assert_eq!(ba.degree() + bb.degree(), out.degree());
    let mut res = vec![0; out.dim()];
    for (i, &ca) in a.iter().enumerate() {
        if ca == 0 {
            continue;
        }
        for (j, &cb) in b.iter().enumerate() {
            if cb == 0 {
                continue;
            }
            let idx = out.index_of(&merge_sorted(ba.tuple(i), bb.tuple(j))).expect("merged tuple is a monomial");
            res[idx] = field.mul_add(res[idx], ca, cb);
        }
    }
    res
}

/// `y ⊙ (monomial i of sub)` for a degree-one `y`.
fn sym_linear_times_monomial(field: &FieldSpec, y: &[Symbol], sub: &SymBasis, i: usize, out: &SymBasis) -> TensorCoords {
    let mut res = vec![0; out.dim()];
    let mono = sub.tuple(i);
    for (v, &c) in y.iter().enumerate() {
        if c != 0 {
            let idx = out.index_of(&merge_sorted(mono, &[v])).expect("monomial");
            res[idx] = field.add(res[idx], c);
        }
    }
    res
}

fn check_lengths(vectors: &[&[Symbol]], expected: usize) -> Result<(), TensorError> {
    for (index, v) in vectors.iter().enumerate() {
        if v.len() != expected {
            return Err(TensorError::LengthMismatch { index, got: v.len(), expected });
        }
    }
    Ok(())
}

/// Coordinates of `v_1 ⊙ ... ⊙ v_q` in `SymBasis(m, q)`.
pub fn expand_sym(field: &FieldSpec, m: usize, vectors: &[&[Symbol]]) -> Result<TensorCoords, TensorError> {
    check_lengths(vectors, m)?;
    let mut basis = SymBasis::new(m, 0);
    let mut acc = vec![1];
    let deg1 = SymBasis::new(m, 1);
    for v in vectors {
        let next = SymBasis::new(m, basis.degree() + 1);
        acc = sym_mul(field, &acc, &basis, v, &deg1, &next);
        basis = next;
    }
    Ok(acc)
}

/// Sign and merged tuple of `e_a ∧ e_b`, or `None` if they share an index.
fn wedge_tuples(a: &[usize], b: &[usize]) -> Option<(bool, Vec<usize>)> {
    let mut inversions = 0usize;
    for &x in a {
        for &y in b {
            if x == y {
                return None;
            }
            if x > y {
                inversions += 1;
            }
        }
    }
    Some((inversions % 2 == 1, merge_sorted(a, b)))
}

/// Product `a ∧ b` of two exterior tensors.
pub fn wedge(field: &FieldSpec, a: &[Symbol], ba: &ExtBasis, b: &[Symbol], bb: &ExtBasis, out: &ExtBasis) -> TensorCoords {
    debug_assert_eq!(ba.degree() + bb.degree(), out.degree());
    let mut res = vec![0; out.dim()];
    for (i, &ca) in a.iter().enumerate() {
        if ca == 0 {
            continue;
        }
        for (j, &cb) in b.iter().enumerate() {
            if cb == 0 {
                continue;
            }
            if let Some((negative, t)) = wedge_tuples(ba.tuple(i), bb.tuple(j)) {
                let idx = out.index_of(&t).expect("merged tuple is a basis wedge");
                let p = field.mul(ca, cb);
                res[idx] = if negative { field.sub(res[idx], p) } else { field.add(res[idx], p) };
            }
        }
    }
    res
}

/// Coordinates of `v_1 ∧ ... ∧ v_q` in `ExtBasis(k, q)`.
pub fn expand_ext(field: &FieldSpec, k: usize, vectors: &[&[Symbol]]) -> Result<TensorCoords, TensorError> {
    check_lengths(vectors, k)?;
    let mut basis = ExtBasis::new(k, 0);
    let mut acc = vec![1];
    let deg1 = ExtBasis::new(k, 1);
    for v in vectors {
        let next = ExtBasis::new(k, basis.degree() + 1);
        acc = wedge(field, &acc, &basis, v, &deg1, &next);
        basis = next;
    }
    Ok(acc)
}

/// `x ⊗ s` in X-major layout.
pub fn x_tensor(field: &FieldSpec, x: &[Symbol], s: &[Symbol]) -> TensorCoords {
    let mut out = Vec::with_capacity(x.len() * s.len());
    for &xi in x {
        out.extend(s.iter().map(|&c| field.mul(xi, c)));
    }
    out
}

/// `x ⊗ (y ⊙ η_j)` for every monomial `η_j` of `sub`, as vectors in
/// `X ⊗ S^{q+1} Y` with `q = sub.degree()`.
pub fn expand_node_basis_sym(field: &FieldSpec, x: &[Symbol], y: &[Symbol], sub: &SymBasis) -> Vec<TensorCoords> {
    let out = SymBasis::new(sub.dim_y(), sub.degree() + 1);
    (0..sub.dim())
        .map(|j| x_tensor(field, x, &sym_linear_times_monomial(field, y, sub, j, &out)))
        .collect()
}

/// `x ⊗ (w ∧ ω_j)` for every basis wedge `ω_j` of `sub`, greedily reduced to a
/// maximal independent subset (size `C(k-1, q)` for `q = sub.degree()`).
pub fn expand_node_basis_ext(field: &FieldSpec, x: &[Symbol], w: &[Symbol], sub: &ExtBasis) -> Result<Vec<TensorCoords>, TensorError> {
    Ok(expand_node_basis_ext_indexed(field, x, w, sub)?.into_iter().map(|(_, v)| v).collect())
}

/// Like [`expand_node_basis_ext`] but keeps the index of each surviving `ω_j`.
pub fn expand_node_basis_ext_indexed(
    field: &FieldSpec,
    x: &[Symbol],
    w: &[Symbol],
    sub: &ExtBasis,
) -> Result<Vec<(usize, TensorCoords)>, TensorError> {
    if w.iter().all(|&c| c == 0) {
        return Err(TensorError::ZeroVector);
    }
    check_lengths(&[w], sub.dim_w())?;
    let deg1 = ExtBasis::new(sub.dim_w(), 1);
    let out = ExtBasis::new(sub.dim_w(), sub.degree() + 1);
    // Filtering happens on the Λ factor so that the surviving indices depend
    // on w alone.
    let mut acc = IncrementalBasis::new(field, out.dim());
    let mut kept = Vec::new();
    for j in 0..sub.dim() {
        let ext = wedge(field, w, &deg1, &sub.unit(j), sub, &out);
        if acc.insert(&ext) {
            kept.push((j, x_tensor(field, x, &ext)));
        }
    }
    Ok(kept)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use proptest::prelude::*;

    /// Θ applied to the full tensor-product expansion, summing every one of
    /// the m^q index words onto its sorted monomial.
    fn brute_sym(field: &FieldSpec, m: usize, vectors: &[Vec<Symbol>]) -> Vec<Symbol> {
        let q = vectors.len();
        let basis = SymBasis::new(m, q);
        let mut out = vec![0; basis.dim()];
        for word in 0..m.pow(q as u32) {
            let mut idx = Vec::with_capacity(q);
            let mut rest = word;
            for _ in 0..q {
                idx.push(rest % m);
                rest /= m;
            }
            let mut coef = 1;
            for (v, &i) in vectors.iter().zip(&idx) {
                coef = field.mul(coef, v[i]);
            }
            idx.sort();
            let pos = basis.index_of(&idx).unwrap();
            out[pos] = field.add(out[pos], coef);
        }
        out
    }

    /// Δ via the Leibniz sum over all words with distinct letters.
    fn brute_ext(field: &FieldSpec, k: usize, vectors: &[Vec<Symbol>]) -> Vec<Symbol> {
        let q = vectors.len();
        let basis = ExtBasis::new(k, q);
        let mut out = vec![0; basis.dim()];
        for word in 0..k.pow(q as u32) {
            let mut idx = Vec::with_capacity(q);
            let mut rest = word;
            for _ in 0..q {
                idx.push(rest % k);
                rest /= k;
            }
            let mut sorted = idx.clone();
            sorted.sort();
            sorted.dedup();
            if sorted.len() < q {
                continue;
            }
            let mut coef = 1;
            for (v, &i) in vectors.iter().zip(&idx) {
                coef = field.mul(coef, v[i]);
            }
            let inversions = (0..q).flat_map(|a| (a + 1..q).map(move |b| (a, b))).filter(|&(a, b)| idx[a] > idx[b]).count();
            if inversions % 2 == 1 {
                coef = field.neg(coef);
            }
            let pos = basis.index_of(&sorted).unwrap();
            out[pos] = field.add(out[pos], coef);
        }
        out
    }

    fn refs(v: &[Vec<Symbol>]) -> Vec<&[Symbol]> {
        v.iter().map(|x| x.as_slice()).collect()
    }

    #[test]
    fn basis_dimensions() {
        for m in 1..6 {
            for q in 0..5 {
                let b = SymBasis::new(m, q);
                assert_eq!(b.dim(), binomial(m + q - 1, q));
                for w in b.tuples().windows(2) {
                    assert!(w[0] < w[1]);
                }
                assert!(b.tuples().iter().all(|t| t.windows(2).all(|p| p[0] <= p[1])));
            }
        }
        for k in 0..7 {
            for q in 0..9 {
                let b = ExtBasis::new(k, q);
                assert_eq!(b.dim(), binomial(k, q));
                assert!(b.tuples().iter().all(|t| t.windows(2).all(|p| p[0] < p[1])));
            }
        }
        assert_eq!(ExtBasis::new(3, 4).dim(), 0);
    }

    #[test]
    fn sym_examples() {
        let f = FieldSpec::gf16();
        let c = expand_sym(&f, 2, &[&[1, 0], &[0, 1]]).unwrap();
        let b = SymBasis::new(2, 2);
        assert_eq!(c, b.unit(b.index_of(&[0, 1]).unwrap()));
        let y = [3, 7];
        let y2 = [9, 14];
        assert_eq!(expand_sym(&f, 2, &[&y, &y2]).unwrap(), expand_sym(&f, 2, &[&y2, &y]).unwrap());
    }

    #[test]
    fn ext_examples() {
        let f = FieldSpec::prime(7).unwrap();
        let e1 = [1, 0, 0];
        let e2 = [0, 1, 0];
        let b = ExtBasis::new(3, 2);
        assert_eq!(expand_ext(&f, 3, &[&e1, &e2]).unwrap(), b.unit(b.index_of(&[0, 1]).unwrap()));
        let v = [2, 5, 3];
        assert!(expand_ext(&f, 3, &[&v, &e2, &v]).unwrap().iter().all(|&c| c == 0));
        let a = expand_ext(&f, 3, &[&v, &e2]).unwrap();
        let s = expand_ext(&f, 3, &[&e2, &v]).unwrap();
        assert_eq!(a.iter().map(|&c| f.neg(c)).collect::<Vec<_>>(), s);
    }

    #[test]
    fn ext_coordinates_are_minors() {
        let f = FieldSpec::prime(11).unwrap();
        let rows = vec![vec![1, 4, 2, 9], vec![3, 0, 7, 5], vec![6, 6, 1, 2]];
        let c = expand_ext(&f, 4, &refs(&rows)).unwrap();
        let basis = ExtBasis::new(4, 3);
        for (i, cols) in basis.tuples().iter().enumerate() {
            let minor: Vec<Vec<Symbol>> = rows.iter().map(|r| cols.iter().map(|&j| r[j]).collect()).collect();
            assert_eq!(c[i], Matrix::from_rows(&f, &minor).unwrap().determinant().unwrap());
        }
    }

    #[test]
    fn brute_force_agreement_gf4() {
        let f = FieldSpec::binary(2).unwrap();
        let elems: Vec<Symbol> = (0..4).collect();
        let mut seed = 0usize;
        let mut next = || {
            seed = (seed * 7 + 3) % 97;
            elems[seed % 4]
        };
        for dim in 1..=4 {
            for q in 1..=3 {
                for _ in 0..4 {
                    let vs: Vec<Vec<Symbol>> = (0..q).map(|_| (0..dim).map(|_| next()).collect()).collect();
                    assert_eq!(expand_sym(&f, dim, &refs(&vs)).unwrap(), brute_sym(&f, dim, &vs));
                    assert_eq!(expand_ext(&f, dim, &refs(&vs)).unwrap(), brute_ext(&f, dim, &vs));
                }
            }
        }
    }

    #[test]
    fn brute_force_agreement_odd_characteristic() {
        let f = FieldSpec::prime(5).unwrap();
        let vs = vec![vec![1, 2, 3], vec![4, 0, 2], vec![3, 3, 1]];
        assert_eq!(expand_sym(&f, 3, &refs(&vs)).unwrap(), brute_sym(&f, 3, &vs));
        assert_eq!(expand_ext(&f, 3, &refs(&vs)).unwrap(), brute_ext(&f, 3, &vs));
    }

    #[test]
    fn sym_q3_m3_random_gf16() {
        let f = FieldSpec::gf16();
        let vs = vec![vec![5, 11, 2], vec![13, 0, 7], vec![1, 9, 15]];
        assert_eq!(expand_sym(&f, 3, &refs(&vs)).unwrap(), brute_sym(&f, 3, &vs));
    }

    #[test]
    fn node_basis_sym_shapes() {
        let f = FieldSpec::gf16();
        let sub = SymBasis::new(2, 1);
        let rows = expand_node_basis_sym(&f, &[1, 0], &[3, 4], &sub);
        let s2 = SymBasis::new(2, 2);
        for (j, r) in rows.iter().enumerate() {
            let expected = expand_sym(&f, 2, &[&[3, 4], &sub.unit(j)]).unwrap();
            assert_eq!(&r[..s2.dim()], expected.as_slice());
            assert!(r[s2.dim()..].iter().all(|&c| c == 0));
        }

        let sub = SymBasis::new(3, 2);
        let rows = expand_node_basis_sym(&f, &[1, 4, 8], &[1, 2, 8], &sub);
        assert_eq!(rows.len(), 6);
        assert!(rows.iter().all(|r| r.len() == 30));
        assert_eq!(Matrix::from_rows(&f, &rows).unwrap().rank(), 6);
    }

    #[test]
    fn node_basis_ext_shapes() {
        let f = FieldSpec::gf16();
        let rows = expand_node_basis_ext(&f, &[1, 1], &[1, 0, 0], &ExtBasis::new(3, 1)).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(expand_node_basis_ext(&f, &[1], &[0, 0, 0], &ExtBasis::new(3, 1)), Err(TensorError::ZeroVector));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn ext_node_basis_has_quotient_dimension(
            k in 2usize..=6,
            q in 0usize..4,
            w in proptest::collection::vec(0u32..16, 6),
            x in proptest::collection::vec(1u32..16, 3),
        ) {
            prop_assume!(q < k);
            let f = FieldSpec::gf16();
            let w = &w[..k];
            prop_assume!(w.iter().any(|&c| c != 0));
            let sub = ExtBasis::new(k, q);
            let rows = expand_node_basis_ext(&f, &x, w, &sub).unwrap();
            prop_assert_eq!(rows.len(), binomial(k - 1, q));
            prop_assert_eq!(Matrix::from_rows(&f, &rows).map(|m| m.rank()).unwrap_or(0), rows.len());
            // w ∧ (w ∧ ω) = 0 on each Λ block
            let out = ExtBasis::new(k, q + 1);
            let up = ExtBasis::new(k, q + 2);
            let deg1 = ExtBasis::new(k, 1);
            for r in &rows {
                let block = &r[..out.dim()];
                prop_assert!(wedge(&f, w, &deg1, block, &out, &up).iter().all(|&c| c == 0));
            }
        }

        #[test]
        fn multilinear(
            a in proptest::collection::vec(0u32..16, 4),
            b in proptest::collection::vec(0u32..16, 4),
            other in proptest::collection::vec(0u32..16, 8),
            c in 0u32..16,
            slot in 0usize..3,
        ) {
            let f = FieldSpec::gf16();
            let mut vs: Vec<Vec<Symbol>> = vec![other[..4].to_vec(), other[4..].to_vec(), vec![0; 4]];
            let combo: Vec<Symbol> = a.iter().zip(&b).map(|(&x, &y)| f.add(x, f.mul(c, y))).collect();
            let at = |v: &Vec<Symbol>, vs: &mut Vec<Vec<Symbol>>| { vs.insert(slot, v.clone()); let r = vs.clone(); vs.remove(slot); r };
            vs.pop();
            for expand in [expand_sym as fn(&FieldSpec, usize, &[&[Symbol]]) -> Result<TensorCoords, TensorError>, expand_ext] {
                let lhs = expand(&f, 4, &refs(&at(&combo, &mut vs))).unwrap();
                let ea = expand(&f, 4, &refs(&at(&a, &mut vs))).unwrap();
                let eb = expand(&f, 4, &refs(&at(&b, &mut vs))).unwrap();
                let rhs: Vec<Symbol> = ea.iter().zip(&eb).map(|(&x, &y)| f.add(x, f.mul(c, y))).collect();
                prop_assert_eq!(lhs, rhs);
            }
        }
    }
}
