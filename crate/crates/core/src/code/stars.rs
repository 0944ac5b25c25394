use std::collections::HashSet;

use super::{derive_params, Axiom, AxiomViolation, CodeError, CodeParams, Flavor};
use crate::field::{FieldSpec, Symbol};

/// Per-node star vectors: `x_h ∈ F^t` and either `y_h ∈ F^{k-t+1}`
/// (symmetric) or `w_h ∈ F^k` (exterior).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StarFamily {
    field: FieldSpec,
    params: CodeParams,
    x: Vec<Vec<Symbol>>,
    second: Vec<Vec<Symbol>>,
    /// Evaluation points when the family came from a monomial pattern.
    points: Option<Vec<Symbol>>,
}

/// `a_h` for the (9,5,6,6) code over GF(16): `0` followed by powers of `z`.
pub const FIXTURE_956_EXPONENTS: [Option<i64>; 9] =
    [None, Some(3), Some(6), Some(-3), Some(-6), Some(-1), Some(-2), Some(-4), Some(-8)];
pub const FIXTURE_956_X_PATTERN: [u32; 3] = [0, 2, 6];
pub const FIXTURE_956_Y_PATTERN: [u32; 3] = [0, 1, 3];

impl StarFamily {
    pub fn new(field: &FieldSpec, params: CodeParams, x: Vec<Vec<Symbol>>, second: Vec<Vec<Symbol>>) -> Result<Self, CodeError> {
        if x.len() != params.n || second.len() != params.n {
            return Err(CodeError::Length { what: "star family", got: x.len().min(second.len()), expected: params.n });
        }
        for v in &x {
            if v.len() != params.t {
                return Err(CodeError::Length { what: "x star", got: v.len(), expected: params.t });
            }
        }
        for v in &second {
            if v.len() != params.second_len() {
                return Err(CodeError::Length { what: "second star", got: v.len(), expected: params.second_len() });
            }
        }
        for &c in x.iter().chain(&second).flatten() {
            if !field.contains(c) {
                return Err(CodeError::Field(crate::field::FieldError::OutOfRange { value: c as u64, field: field.to_string() }));
            }
        }
        if params.flavor == Flavor::Exterior {
            if let Some(h) = second.iter().position(|w| w.iter().all(|&c| c == 0)) {
                return Err(CodeError::Axiom(AxiomViolation { axiom: Axiom::ZeroStar, failed: None, set: vec![h] }));
            }
        }
        Ok(StarFamily { field: field.clone(), params, x, second, points: None })
    }

    /// `x_h = [a_h^{e}]_{e ∈ x_exps}` and likewise for the second vector.
    pub fn from_pattern(
        field: &FieldSpec,
        params: CodeParams,
        points: &[Symbol],
        x_exps: &[u32],
        second_exps: &[u32],
    ) -> Result<Self, CodeError> {
        let eval = |a: Symbol, exps: &[u32]| -> Result<Vec<Symbol>, CodeError> {
            exps.iter().map(|&e| field.pow(a, e as i64).map_err(CodeError::from)).collect()
        };
        let x = points.iter().map(|&a| eval(a, x_exps)).collect::<Result<_, _>>()?;
        let second = points.iter().map(|&a| eval(a, second_exps)).collect::<Result<_, _>>()?;
        let mut fam = StarFamily::new(field, params, x, second)?;
        fam.points = Some(points.to_vec());
        Ok(fam)
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    pub fn x(&self, h: usize) -> &[Symbol] {
        &self.x[h]
    }

    /// `y_h` (symmetric) or `w_h` (exterior).
    pub fn second(&self, h: usize) -> &[Symbol] {
        &self.second[h]
    }

    pub fn x_stars(&self) -> &[Vec<Symbol>] {
        &self.x
    }

    pub fn second_stars(&self) -> &[Vec<Symbol>] {
        &self.second
    }

    pub fn points(&self) -> Option<&[Symbol]> {
        self.points.as_deref()
    }

    pub fn with_points(mut self, points: Option<Vec<Symbol>>) -> Self {
        self.points = points;
        self
    }
}

/// Reed-Solomon style stars for `t = 2`: `x_h = [1, a_h^{k-1}]` and
/// `y_h = [1, a_h, ..., a_h^{k-2}]` or `w_h = [1, a_h, ..., a_h^{k-1}]`.
/// Points are taken greedily in field order, skipping any whose `(k-1)`-th
/// power repeats.
pub fn rs_stars_t2(field: &FieldSpec, n: usize, k: usize, flavor: Flavor) -> Result<StarFamily, CodeError> {
    if k < 2 {
        return Err(CodeError::InvalidParams(format!("k = {k} must be at least 2")));
    }
    let params = derive_params(n, k, 2 * (k - 1), flavor)?;
    let mut seen = HashSet::new();
    let mut points = Vec::with_capacity(n);
    for a in 0..field.order() {
        let xi = field.pow(a, (k - 1) as i64)?;
        if seen.insert(xi) {
            points.push(a);
            if points.len() == n {
                break;
            }
        }
    }
    if points.len() < n {
        return Err(CodeError::FieldTooSmall { needed: n, available: points.len() });
    }
    let x_exps = [0, (k - 1) as u32];
    let second_exps: Vec<u32> = (0..params.second_len() as u32).collect();
    StarFamily::from_pattern(field, params, &points, &x_exps, &second_exps)
}

/// The (9,5,6,6) symmetric code over GF(16) with `z^4 + z + 1`.
pub fn fixture_956() -> StarFamily {
    let field = FieldSpec::gf16();
    let z = field.z();
    let points: Vec<Symbol> = FIXTURE_956_EXPONENTS
        .iter()
        .map(|e| e.map_or(0, |e| field.pow(z, e).expect("z is nonzero")))
        .collect();
    let params = derive_params(9, 5, 6, Flavor::Symmetric).expect("valid parameters");
    StarFamily::from_pattern(&field, params, &points, &FIXTURE_956_X_PATTERN, &FIXTURE_956_Y_PATTERN).expect("fixture is well formed")
}
