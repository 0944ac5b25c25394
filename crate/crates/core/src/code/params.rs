use std::fmt;

use serde::{Deserialize, Serialize};

use super::CodeError;
use crate::tensor::binomial;

/// Which multilinear space carries the file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    /// `X ⊗ S^t Y` with `Y = F^{k-t+1}`.
    Symmetric,
    /// `X ⊗ Λ^t W` with `W = F^k`.
    Exterior,
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Flavor::Symmetric => "symmetric",
            Flavor::Exterior => "exterior",
        })
    }
}

impl std::str::FromStr for Flavor {
    type Err = CodeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "symmetric" | "sym" => Ok(Flavor::Symmetric),
            "exterior" | "ext" | "skew" => Ok(Flavor::Exterior),
            other => Err(CodeError::Usage(format!("unknown flavor {other:?}"))),
        }
    }
}

/// `(n, k, d, t, α, β, M)` of an MSR code with integral `t = d / (d-k+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CodeParams {
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub t: usize,
    pub alpha: usize,
    pub beta: usize,
    /// File size in symbols.
    pub file_size: usize,
    pub flavor: Flavor,
}

impl fmt::Display for CodeParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {}, {}) {} t={} beta={} M={}",
            self.n, self.k, self.d, self.alpha, self.flavor, self.t, self.beta, self.file_size
        )
    }
}

/// Smallest `δ ≥ 0` such that `(n+δ, k+δ, d+δ)` has integral `t`.
pub fn shortening_depth_for(k: usize, d: usize) -> usize {
    let r = d + 1 - k;
    (r - d % r) % r
}

pub fn derive_params(n: usize, k: usize, d: usize, flavor: Flavor) -> Result<CodeParams, CodeError> {
    if k < 2 {
        return Err(CodeError::InvalidParams(format!("k = {k} must be at least 2")));
    }
    if d < k {
        return Err(CodeError::InvalidParams(format!("d = {d} must be at least k = {k}")));
    }
    if n < d + 1 {
        return Err(CodeError::InvalidParams(format!("n = {n} must exceed d = {d}")));
    }
    let r = d - k + 1;
    if d % r != 0 {
        let delta = shortening_depth_for(k, d);
        return Err(CodeError::NonIntegralT { n, k, d, shorten_from: (n + delta, k + delta, d + delta) });
    }
    let t = d / r;
    let alpha = binomial(k - 1, t - 1);
    let beta = binomial(k - 2, t - 2);
    let p = CodeParams { n, k, d, t, alpha, beta, file_size: k * alpha, flavor };
    debug_assert!(p.rank_one_holds());
    Ok(p)
}

impl CodeParams {
    /// `dim Y` for the symmetric flavor.
    pub fn dim_y(&self) -> usize {
        self.k - self.t + 1
    }

    /// Length of the second star vector (`y` or `w`).
    pub fn second_len(&self) -> usize {
        match self.flavor {
            Flavor::Symmetric => self.dim_y(),
            Flavor::Exterior => self.k,
        }
    }

    /// Rows `(d-k+1, k-1, d, α)`, `(1, t-1, t, β)`, `(*, *, kd, M)`; every
    /// 2×2 minor among the specified entries must vanish.
    pub fn rank_one_matrix(&self) -> [[Option<u128>; 4]; 3] {
        let c = |x: usize| Some(x as u128);
        [
            [c(self.d - self.k + 1), c(self.k - 1), c(self.d), c(self.alpha)],
            [c(1), c(self.t - 1), c(self.t), c(self.beta)],
            [None, None, c(self.k * self.d), c(self.file_size)],
        ]
    }

    pub fn rank_one_holds(&self) -> bool {
        let m = self.rank_one_matrix();
        for r1 in 0..3 {
            for r2 in r1 + 1..3 {
                for c1 in 0..4 {
                    for c2 in c1 + 1..4 {
                        if let (Some(a), Some(b), Some(c), Some(d)) = (m[r1][c1], m[r1][c2], m[r2][c1], m[r2][c2]) {
                            if a * d != b * c {
                                return false;
                            }
                        }
                    }
                }
            }
        }
        true
    }

    /// `α ≤ min(2^{k-1}, (k-1)^{t-1})`.
    pub fn subpacketization_bound_holds(&self) -> bool {
        let pow2 = 1u128.checked_shl((self.k - 1) as u32).unwrap_or(u128::MAX);
        let powk = ((self.k - 1) as u128).checked_pow((self.t - 1) as u32).unwrap_or(u128::MAX);
        (self.alpha as u128) <= pow2.min(powk)
    }

    /// Ambient dimension of the file space; equals `file_size`.
    pub fn ambient_dim(&self) -> usize {
        self.t * binomial(self.k, self.t)
    }
}
