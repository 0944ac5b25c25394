//! Exact arithmetic in GF(2^m) and GF(p).
//!
//! Elements are stored as canonical integer representatives ([`Symbol`]):
//! bit-packed polynomial coefficients in z for binary extension fields, the
//! residue for prime fields. Bulk code paths (linear algebra, encoding) work
//! on raw symbols against a shared [`FieldSpec`]; [`FieldElement`] is the
//! checked wrapper used where values from different fields could meet.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Canonical representative of a field element.
pub type Symbol = u32;

/// Largest supported extension degree for binary fields.
pub const MAX_BINARY_DEGREE: u32 = 16;

/// Reduction polynomials used when the caller does not supply one, indexed by
/// `m - 1`. All are primitive; `m = 4` is z^4 + z + 1.
const DEFAULT_POLYS: [u32; 16] = [
    0x3, 0x7, 0xB, 0x13, 0x25, 0x43, 0x83, 0x11D, 0x211, 0x409, 0x805, 0x1053, 0x201B, 0x4443,
    0x8003, 0x1100B,
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("operands belong to different fields ({0} vs {1})")]
    MismatchedField(String, String),
    #[error("zero has no multiplicative inverse")]
    DivisionByZero,
    #[error("extension degree {0} is outside 1..=16")]
    UnsupportedDegree(u32),
    #[error("reduction polynomial {poly:#x} is not an irreducible polynomial of degree {m}")]
    NotIrreducible { m: u32, poly: u32 },
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("value {value} is not a canonical element of {field}")]
    OutOfRange { value: u64, field: String },
    #[error("cannot parse field name {0:?}")]
    BadName(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Binary,
    Prime,
}

struct Inner {
    kind: FieldKind,
    m: u32,
    reduction_poly: u32,
    p: u32,
    order: u32,
    // Binary fields only: exp has length 2*(order-1) so log sums need no reduction.
    exp: Vec<u32>,
    log: Vec<u32>,
}

/// A finite field together with its defining data. Cheap to clone.
#[derive(Clone)]
pub struct FieldSpec {
    inner: Arc<Inner>,
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.kind == other.inner.kind
                && self.inner.m == other.inner.m
                && self.inner.reduction_poly == other.inner.reduction_poly
                && self.inner.p == other.inner.p)
    }
}

impl Eq for FieldSpec {}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.inner.kind {
            FieldKind::Binary => write!(f, "GF(2^{})[{:#x}]", self.inner.m, self.inner.reduction_poly),
            FieldKind::Prime => write!(f, "GF({})", self.inner.p),
        }
    }
}

fn poly_degree(p: u64) -> i32 {
    63 - p.leading_zeros() as i32
}

fn poly_mod(mut a: u64, b: u64) -> u64 {
    let db = poly_degree(b);
    while a != 0 && poly_degree(a) >= db {
        a ^= b << (poly_degree(a) - db);
    }
    a
}

/// Irreducibility over GF(2) by trial division with every polynomial of
/// degree 1..=m/2.
pub fn is_irreducible_gf2(poly: u32, m: u32) -> bool {
    if m == 0 || poly_degree(poly as u64) != m as i32 {
        return false;
    }
    for cand in 2u64..(1u64 << (m / 2 + 1)) {
        let dc = poly_degree(cand);
        if dc < 1 || dc as u32 > m / 2 {
            continue;
        }
        if poly_mod(poly as u64, cand) == 0 {
            return false;
        }
    }
    true
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut i = 2u64;
    while i * i <= p {
        if p % i == 0 {
            return false;
        }
        i += 1;
    }
    true
}

fn clmul_reduce(a: u32, b: u32, poly: u32) -> u32 {
    let mut acc = 0u64;
    let mut a = a as u64;
    let mut b = b;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        a <<= 1;
        b >>= 1;
    }
    poly_mod(acc, poly as u64) as u32
}

impl FieldSpec {
    /// GF(2^m) with the built-in reduction polynomial for `m`.
    pub fn binary(m: u32) -> Result<Self, FieldError> {
        if m == 0 || m > MAX_BINARY_DEGREE {
            return Err(FieldError::UnsupportedDegree(m));
        }
        Self::binary_with_poly(m, DEFAULT_POLYS[(m - 1) as usize])
    }

    /// GF(2^m) realized as GF(2)[z]/(poly). `poly` is a bitmask with bit `m` set.
    pub fn binary_with_poly(m: u32, poly: u32) -> Result<Self, FieldError> {
        if m == 0 || m > MAX_BINARY_DEGREE {
            return Err(FieldError::UnsupportedDegree(m));
        }
        if !is_irreducible_gf2(poly, m) {
            return Err(FieldError::NotIrreducible { m, poly });
        }
        let order = 1u32 << m;
        let group = order - 1;
        // The reduction polynomial need not be primitive, so look for a generator.
        let generator = (1..order)
            .find(|&g| {
                let mut x = 1u32;
                for i in 1..=group {
                    x = clmul_reduce(x, g, poly);
                    if x == 1 {
                        return i == group;
                    }
                }
                false
            })
            .expect("the multiplicative group of a finite field is cyclic");
        let mut exp = vec![0u32; 2 * group as usize];
        let mut log = vec![0u32; order as usize];
        let mut x = 1u32;
        for i in 0..group {
            exp[i as usize] = x;
            exp[(i + group) as usize] = x;
            log[x as usize] = i;
            x = clmul_reduce(x, generator, poly);
        }
        Ok(FieldSpec {
            inner: Arc::new(Inner { kind: FieldKind::Binary, m, reduction_poly: poly, p: 2, order, exp, log }),
        })
    }

    pub fn prime(p: u32) -> Result<Self, FieldError> {
        if !is_prime(p as u64) || p > (1 << 31) {
            return Err(FieldError::NotPrime(p as u64));
        }
        Ok(FieldSpec {
            inner: Arc::new(Inner {
                kind: FieldKind::Prime,
                m: 1,
                reduction_poly: 0,
                p,
                order: p,
                exp: Vec::new(),
                log: Vec::new(),
            }),
        })
    }

    /// GF(16) as GF(2)[z]/(z^4 + z + 1).
    pub fn gf16() -> Self {
        Self::binary_with_poly(4, 0x13).expect("z^4+z+1 is irreducible")
    }

    /// Parses names like `gf16`, `GF(256)`, `gf127`. Powers of two select a
    /// binary field with the built-in polynomial, anything else must be prime.
    pub fn parse(name: &str) -> Result<Self, FieldError> {
        let lower = name.trim().to_ascii_lowercase();
        let digits = lower
            .strip_prefix("gf")
            .map(|s| s.trim_start_matches('(').trim_end_matches(')'))
            .ok_or_else(|| FieldError::BadName(name.to_string()))?;
        let q: u64 = digits.parse().map_err(|_| FieldError::BadName(name.to_string()))?;
        if q >= 2 && q.is_power_of_two() {
            Self::binary(q.trailing_zeros())
        } else if q <= u32::MAX as u64 {
            Self::prime(q as u32)
        } else {
            Err(FieldError::NotPrime(q))
        }
    }

    pub fn kind(&self) -> FieldKind {
        self.inner.kind
    }

    /// Extension degree (1 for prime fields).
    pub fn degree(&self) -> u32 {
        self.inner.m
    }

    pub fn reduction_poly(&self) -> u32 {
        self.inner.reduction_poly
    }

    pub fn characteristic(&self) -> u32 {
        self.inner.p
    }

    pub fn order(&self) -> u32 {
        self.inner.order
    }

    /// Payload bits a single symbol can carry without loss.
    pub fn bits_per_symbol(&self) -> u32 {
        match self.inner.kind {
            FieldKind::Binary => self.inner.m,
            FieldKind::Prime => 31 - self.inner.p.leading_zeros(),
        }
    }

    /// Width in bytes of one serialized element.
    pub fn element_bytes(&self) -> usize {
        match self.inner.kind {
            FieldKind::Binary => self.inner.m.div_ceil(8) as usize,
            FieldKind::Prime => {
                let bits = 32 - (self.inner.p - 1).leading_zeros();
                (bits.max(1)).div_ceil(8) as usize
            }
        }
    }

    pub fn contains(&self, v: Symbol) -> bool {
        v < self.inner.order
    }

    pub fn element(&self, value: u64) -> Result<FieldElement, FieldError> {
        if value >= self.inner.order as u64 {
            return Err(FieldError::OutOfRange { value, field: self.to_string() });
        }
        Ok(FieldElement { spec: self.clone(), value: value as Symbol })
    }

    pub fn zero_element(&self) -> FieldElement {
        FieldElement { spec: self.clone(), value: 0 }
    }

    pub fn one_element(&self) -> FieldElement {
        FieldElement { spec: self.clone(), value: 1 }
    }

    /// The element z (binary) or 2 (prime); for GF(2) this is 1.
    pub fn z(&self) -> Symbol {
        match self.inner.kind {
            FieldKind::Binary if self.inner.m == 1 => 1,
            FieldKind::Binary => 2,
            FieldKind::Prime => 2 % self.inner.p,
        }
    }

    /// All elements: zero first, then nonzero ones in increasing canonical order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.inner.order).map(move |v| FieldElement { spec: self.clone(), value: v })
    }

    #[inline]
    pub fn add(&self, a: Symbol, b: Symbol) -> Symbol {
        match self.inner.kind {
            FieldKind::Binary => a ^ b,
            FieldKind::Prime => ((a as u64 + b as u64) % self.inner.p as u64) as Symbol,
        }
    }

    #[inline]
    pub fn neg(&self, a: Symbol) -> Symbol {
        match self.inner.kind {
            FieldKind::Binary => a,
            FieldKind::Prime => {
                if a == 0 {
                    0
                } else {
                    self.inner.p - a
                }
            }
        }
    }

    #[inline]
    pub fn sub(&self, a: Symbol, b: Symbol) -> Symbol {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Symbol, b: Symbol) -> Symbol {
        if a == 0 || b == 0 {
            return 0;
        }
        match self.inner.kind {
            FieldKind::Binary => {
                let inner = &*self.inner;
                inner.exp[(inner.log[a as usize] + inner.log[b as usize]) as usize]
            }
            FieldKind::Prime => ((a as u64 * b as u64) % self.inner.p as u64) as Symbol,
        }
    }

    /// `acc + a*b`.
    #[inline]
    pub fn mul_add(&self, acc: Symbol, a: Symbol, b: Symbol) -> Symbol {
        self.add(acc, self.mul(a, b))
    }

    pub fn inv(&self, a: Symbol) -> Result<Symbol, FieldError> {
        if a == 0 {
            return Err(FieldError::DivisionByZero);
        }
        Ok(match self.inner.kind {
            FieldKind::Binary => {
                let inner = &*self.inner;
                let group = inner.order - 1;
                inner.exp[((group - inner.log[a as usize]) % group) as usize]
            }
            FieldKind::Prime => self.pow_u(a, (self.inner.p - 2) as u64),
        })
    }

    pub fn div(&self, a: Symbol, b: Symbol) -> Result<Symbol, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    fn pow_u(&self, a: Symbol, mut e: u64) -> Symbol {
        let mut base = a;
        let mut acc = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// `a^e`, with `pow(a, 0) = 1` for every `a` (including zero). Negative
    /// exponents invert first.
    pub fn pow(&self, a: Symbol, e: i64) -> Result<Symbol, FieldError> {
        if e >= 0 {
            Ok(self.pow_u(a, e as u64))
        } else {
            Ok(self.pow_u(self.inv(a)?, e.unsigned_abs()))
        }
    }

    /// Renders a symbol as a polynomial in z (binary) or a residue (prime).
    pub fn format_symbol(&self, v: Symbol) -> String {
        match self.inner.kind {
            FieldKind::Prime => v.to_string(),
            FieldKind::Binary => {
                if v == 0 {
                    return "0".into();
                }
                let mut terms = Vec::new();
                for bit in (0..self.inner.m).rev() {
                    if v >> bit & 1 == 1 {
                        terms.push(match bit {
                            0 => "1".to_string(),
                            1 => "z".to_string(),
                            _ => format!("z^{bit}"),
                        });
                    }
                }
                terms.join(" + ")
            }
        }
    }
}

/// A field element that remembers which field it lives in.
#[derive(Clone, PartialEq, Eq)]
pub struct FieldElement {
    spec: FieldSpec,
    value: Symbol,
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.spec.format_symbol(self.value))
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.spec.format_symbol(self.value))
    }
}

impl FieldElement {
    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn value(&self) -> Symbol {
        self.value
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    fn same_field(&self, other: &FieldElement) -> Result<(), FieldError> {
        if self.spec == other.spec {
            Ok(())
        } else {
            Err(FieldError::MismatchedField(self.spec.to_string(), other.spec.to_string()))
        }
    }

    fn wrap(&self, value: Symbol) -> FieldElement {
        FieldElement { spec: self.spec.clone(), value }
    }

    pub fn add(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        self.same_field(other)?;
        Ok(self.wrap(self.spec.add(self.value, other.value)))
    }

    pub fn sub(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        self.same_field(other)?;
        Ok(self.wrap(self.spec.sub(self.value, other.value)))
    }

    pub fn mul(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        self.same_field(other)?;
        Ok(self.wrap(self.spec.mul(self.value, other.value)))
    }

    pub fn inv(&self) -> Result<FieldElement, FieldError> {
        Ok(self.wrap(self.spec.inv(self.value)?))
    }

    pub fn pow(&self, e: i64) -> Result<FieldElement, FieldError> {
        Ok(self.wrap(self.spec.pow(self.value, e)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf16() -> FieldSpec {
        FieldSpec::gf16()
    }

    #[test]
    fn add_examples() {
        let f = gf16();
        for a in 0..16 {
            assert_eq!(f.add(a, a), 0);
        }
        assert_eq!(f.add(2, 0), 2);
        let p = FieldSpec::prime(127).unwrap();
        assert_eq!(p.add(100, 50), 23);
    }

    #[test]
    fn mul_examples() {
        let f = gf16();
        // z^3 * z = z^4 = z + 1
        assert_eq!(f.mul(0b1000, 0b10), 0b11);
        for a in 0..16 {
            assert_eq!(f.mul(a, 1), a);
        }
        for a in 1..16 {
            assert_eq!(f.pow(a, 15).unwrap(), 1);
        }
    }

    #[test]
    fn inv_examples() {
        let f = gf16();
        assert_eq!(f.inv(1).unwrap(), 1);
        // brute-force z*b = 1
        let brute = (1..16).find(|&b| f.mul(2, b) == 1).unwrap();
        assert_eq!(brute, 0b1001);
        assert_eq!(f.inv(2).unwrap(), 0b1001);
        assert_eq!(f.inv(0), Err(FieldError::DivisionByZero));
        let p = FieldSpec::prime(127).unwrap();
        assert_eq!(p.inv(2).unwrap(), 64);
    }

    #[test]
    fn pow_examples() {
        let f = gf16();
        for a in 0..16 {
            assert_eq!(f.pow(a, 0).unwrap(), 1);
        }
        assert_eq!(f.pow(2, 4).unwrap(), 0b11);
        assert_eq!(f.pow(2, -3).unwrap(), f.pow(2, 12).unwrap());
        assert_eq!(f.pow(0, -1), Err(FieldError::DivisionByZero));
    }

    #[test]
    fn enumerate_examples() {
        let f4 = FieldSpec::binary(2).unwrap();
        let v: Vec<_> = f4.elements().map(|e| e.value()).collect();
        assert_eq!(v, vec![0, 1, 2, 3]);
        assert_eq!(f4.format_symbol(3), "z + 1");
        let f2 = FieldSpec::binary(1).unwrap();
        assert_eq!(f2.elements().count(), 2);
        let all: std::collections::HashSet<_> = gf16().elements().map(|e| e.value()).collect();
        assert_eq!(all.len(), 16);
    }

    #[test]
    fn field_axioms_exhaustive_small() {
        for spec in [FieldSpec::binary(1).unwrap(), FieldSpec::binary(2).unwrap(), FieldSpec::binary(3).unwrap(), gf16(), FieldSpec::prime(7).unwrap(), FieldSpec::prime(13).unwrap()] {
            let q = spec.order();
            for a in 0..q {
                for b in 0..q {
                    assert_eq!(spec.add(a, b), spec.add(b, a));
                    assert_eq!(spec.mul(a, b), spec.mul(b, a));
                    for c in 0..q {
                        assert_eq!(spec.add(spec.add(a, b), c), spec.add(a, spec.add(b, c)));
                        assert_eq!(spec.mul(spec.mul(a, b), c), spec.mul(a, spec.mul(b, c)));
                        assert_eq!(spec.mul(a, spec.add(b, c)), spec.add(spec.mul(a, b), spec.mul(a, c)));
                    }
                }
                assert_eq!(spec.add(a, spec.neg(a)), 0);
            }
        }
    }

    #[test]
    fn inverse_roundtrip_up_to_256() {
        for m in 1..=8 {
            let f = FieldSpec::binary(m).unwrap();
            for a in 1..f.order() {
                assert_eq!(f.mul(a, f.inv(a).unwrap()), 1, "m={m} a={a}");
            }
        }
        let p = FieldSpec::prime(251).unwrap();
        for a in 1..251 {
            assert_eq!(p.mul(a, p.inv(a).unwrap()), 1);
        }
    }

    #[test]
    fn frobenius_gf16() {
        let f = gf16();
        for a in 0..16 {
            for b in 0..16 {
                let s = f.add(a, b);
                assert_eq!(f.mul(s, s), f.add(f.mul(a, a), f.mul(b, b)));
            }
        }
    }

    #[test]
    fn builtin_polys_irreducible_and_tables_consistent() {
        for m in 1..=16 {
            let f = FieldSpec::binary(m).unwrap();
            // table mul agrees with schoolbook mul on a sample
            for a in [1u32, 2, 3, (1 << m) - 1] {
                for b in [1u32, 2, 5 % (1 << m), (1 << m) - 1] {
                    if a < f.order() && b < f.order() {
                        assert_eq!(f.mul(a, b), clmul_reduce(a, b, f.reduction_poly()));
                    }
                }
            }
        }
    }

    #[test]
    fn non_primitive_irreducible_poly_works() {
        // z^4+z^3+z^2+z+1 is irreducible but z has order 5
        let f = FieldSpec::binary_with_poly(4, 0b11111).unwrap();
        assert_eq!(f.pow(2, 5).unwrap(), 1);
        for a in 1..16 {
            assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
        }
    }

    #[test]
    fn rejects_bad_config() {
        assert!(matches!(FieldSpec::binary_with_poly(4, 0b10101), Err(FieldError::NotIrreducible { .. })));
        assert!(matches!(FieldSpec::binary_with_poly(4, 0b111), Err(FieldError::NotIrreducible { .. })));
        assert!(matches!(FieldSpec::prime(15), Err(FieldError::NotPrime(15))));
        assert!(matches!(FieldSpec::binary(17), Err(FieldError::UnsupportedDegree(17))));
    }

    #[test]
    fn checked_elements_reject_mixing() {
        let a = gf16().element(3).unwrap();
        let b = FieldSpec::prime(17).unwrap().element(3).unwrap();
        assert!(matches!(a.add(&b), Err(FieldError::MismatchedField(..))));
        assert!(gf16().element(16).is_err());
        let c = gf16().element(2).unwrap();
        assert_eq!(c.mul(&c).unwrap().value(), 4);
        assert_eq!(c.inv().unwrap().to_string(), "z^3 + 1");
    }

    #[test]
    fn parse_names() {
        assert_eq!(FieldSpec::parse("gf16").unwrap(), gf16());
        assert_eq!(FieldSpec::parse("GF(127)").unwrap().order(), 127);
        assert_eq!(FieldSpec::parse("gf256").unwrap().degree(), 8);
        assert!(FieldSpec::parse("gf12").is_err());
        assert!(FieldSpec::parse("foo").is_err());
    }

    #[test]
    fn element_widths() {
        assert_eq!(gf16().element_bytes(), 1);
        assert_eq!(FieldSpec::binary(9).unwrap().element_bytes(), 2);
        assert_eq!(FieldSpec::prime(127).unwrap().element_bytes(), 1);
        assert_eq!(FieldSpec::prime(257).unwrap().element_bytes(), 2);
        assert_eq!(FieldSpec::prime(127).unwrap().bits_per_symbol(), 6);
    }
}
