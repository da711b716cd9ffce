//! Increment distributions, difference sets and the support basis.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::{det_int, minimal_poly, rank, IntMatrix};
use crate::error::{Error, Result};

const SUM_TOL: f64 = 1e-12;

/// Finite-support probability law on `Z^k`.
///
/// JSON form: `{"k": 2, "support": [[0, 0], [1, 0]], "probs": [0.5, 0.5]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawIncrements")]
pub struct IncrementDistribution {
    k: usize,
    support: Vec<Vec<i64>>,
    probs: Vec<f64>,
}

#[derive(Deserialize)]
struct RawIncrements {
    k: usize,
    support: Vec<Vec<i64>>,
    probs: Vec<f64>,
}

impl TryFrom<RawIncrements> for IncrementDistribution {
    type Error = Error;
    fn try_from(r: RawIncrements) -> Result<Self> {
        Self::new(r.k, r.support, r.probs)
    }
}

impl IncrementDistribution {
    pub fn new(k: usize, support: Vec<Vec<i64>>, probs: Vec<f64>) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidDistribution(m));
        if k == 0 {
            return bad("dimension must be at least 1".into());
        }
        if support.is_empty() {
            return bad("support is empty".into());
        }
        if support.len() != probs.len() {
            return bad(format!("{} support points but {} probabilities", support.len(), probs.len()));
        }
        if let Some(v) = support.iter().find(|v| v.len() != k) {
            return bad(format!("support vector {v:?} does not have dimension {k}"));
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
            return bad(format!("probability {p} is not strictly positive"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return bad(format!("probabilities sum to {total}"));
        }
        let distinct: BTreeSet<&Vec<i64>> = support.iter().collect();
        if distinct.len() != support.len() {
            return bad("support vectors are not distinct".into());
        }
        Ok(Self { k, support, probs })
    }

    /// Equal weights on the given points.
    pub fn uniform(k: usize, support: Vec<Vec<i64>>) -> Result<Self> {
        let n = support.len().max(1);
        Self::new(k, support, vec![1.0 / n as f64; n])
    }

    pub fn point_mass(b: Vec<i64>) -> Self {
        Self {
            k: b.len(),
            support: vec![b],
            probs: vec![1.0],
        }
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn support(&self) -> &[Vec<i64>] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[i64], f64)> {
        self.support.iter().map(Vec::as_slice).zip(self.probs.iter().copied())
    }

    /// `sum_{h,i} mu(h) mu(i) ||h - i||_inf^2`
    pub fn pair_spread(&self) -> f64 {
        let mut s = 0.0;
        for (h, ph) in self.iter() {
            for (i, pi) in self.iter() {
                let d = h.iter().zip(i).map(|(a, b)| (a - b).unsigned_abs()).max().unwrap_or(0) as f64;
                s += ph * pi * d * d;
            }
        }
        s
    }
}

/// All pairwise differences `u - v` of support points, sorted and deduplicated.
pub fn difference_set(mu: &IncrementDistribution) -> Vec<Vec<i64>> {
    let mut out = BTreeSet::new();
    for u in mu.support() {
        for v in mu.support() {
            out.insert(u.iter().zip(v).map(|(a, b)| a - b).collect::<Vec<_>>());
        }
    }
    out.into_iter().collect()
}

/// `{A^m x : x in V, 0 <= m < d}`, sorted and deduplicated.
pub fn extended_difference_set(v: &[Vec<i64>], a: &IntMatrix, d: usize) -> Vec<Vec<BigInt>> {
    let mut out = BTreeSet::new();
    for x in v {
        let mut y: Vec<BigInt> = x.iter().map(|&c| BigInt::from(c)).collect();
        for m in 0..d.max(1) {
            if m > 0 {
                y = a.mul_vec(&y);
            }
            out.insert(y.clone());
        }
    }
    out.into_iter().collect()
}

/// One column `y = A^z (u - v)` of the support basis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BasisColumn {
    pub u: Vec<i64>,
    pub v: Vec<i64>,
    pub z: usize,
    #[serde(serialize_with = "ser_big_vec")]
    pub y: Vec<BigInt>,
}

/// Basis `y_1..y_k` of `Q^k` drawn from the extended difference set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SupportBasis {
    pub b: IntMatrix,
    pub columns: Vec<BasisColumn>,
    /// Largest power used.
    pub z: usize,
    #[serde(serialize_with = "ser_big")]
    pub det_b: BigInt,
}

fn ser_big<S: serde::Serializer>(v: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    v.to_string().serialize(s)
}

fn ser_big_vec<S: serde::Serializer>(v: &[BigInt], s: S) -> std::result::Result<S::Ok, S::Error> {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().serialize(s)
}

/// Greedy basis from `V^{d-1}`: powers ascending, then differences in
/// lexicographic order. Only differences whose first nonzero entry is
/// positive are scanned, since `x` and `-x` span the same line.
pub fn support_basis(mu: &IncrementDistribution, a: &IntMatrix) -> Result<SupportBasis> {
    let k = a.dim();
    if mu.dim() != k {
        return Err(Error::DimensionMismatch(format!(
            "increments have dimension {}, matrix {k}",
            mu.dim()
        )));
    }
    if det_int(a).is_zero() {
        return Err(Error::SingularMatrix);
    }
    let d = minimal_poly(a).degree();
    let diffs: Vec<Vec<i64>> = difference_set(mu)
        .into_iter()
        .filter(|x| x.iter().find(|c| **c != 0).is_some_and(|c| *c > 0))
        .collect();

    let mut chosen: Vec<Vec<BigInt>> = Vec::with_capacity(k);
    let mut columns = Vec::with_capacity(k);
    let mut powers = vec![IntMatrix::identity(k)];
    for z in 0..d {
        if z > 0 {
            let next = powers[z - 1].mul(a);
            powers.push(next);
        }
        for x in &diffs {
            if chosen.len() == k {
                break;
            }
            let y = powers[z].mul_vec(&x.iter().map(|&c| BigInt::from(c)).collect::<Vec<_>>());
            chosen.push(y.clone());
            if rank(&chosen) == chosen.len() {
                let (u, v) = first_pair(mu, x);
                columns.push(BasisColumn { u, v, z, y });
            } else {
                chosen.pop();
            }
        }
    }
    if chosen.len() < k {
        return Err(Error::InvariantSubspace { rank: chosen.len(), k });
    }
    let b = IntMatrix::from_columns(&chosen)?;
    let det_b = det_int(&b);
    let z = columns.iter().map(|c| c.z).max().unwrap_or(0);
    Ok(SupportBasis { b, columns, z, det_b })
}

/// Lexicographically first `(u, v)` in the support with `u - v = x`.
fn first_pair(mu: &IncrementDistribution, x: &[i64]) -> (Vec<i64>, Vec<i64>) {
    let mut pts: Vec<&Vec<i64>> = mu.support().iter().collect();
    pts.sort();
    for u in &pts {
        for v in &pts {
            if u.iter().zip(v.iter()).map(|(a, b)| a - b).eq(x.iter().copied()) {
                return ((*u).clone(), (*v).clone());
            }
        }
    }
    unreachable!("x was drawn from the difference set")
}

/// Which coprimality conditions hold for a modulus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Admissibility {
    pub p: u64,
    pub gcd_det_a: u64,
    pub gcd_det_b: u64,
}

impl Admissibility {
    pub fn ok(&self) -> bool {
        self.gcd_det_a == 1 && self.gcd_det_b == 1
    }

    /// Human-readable reason for rejection, empty when admissible.
    pub fn reason(&self) -> String {
        let mut parts = Vec::new();
        if self.gcd_det_a != 1 {
            parts.push(format!("gcd(det A, p) = {}", self.gcd_det_a));
        }
        if self.gcd_det_b != 1 {
            parts.push(format!("gcd(det B, p) = {}", self.gcd_det_b));
        }
        parts.join("; ")
    }
}

pub fn admissibility(a: &IntMatrix, basis: &SupportBasis, p: u64) -> Admissibility {
    let pb = BigInt::from(p);
    let g = |x: &BigInt| x.gcd(&pb).abs().to_u64().unwrap_or(0);
    Admissibility {
        p,
        gcd_det_a: g(&det_int(a)),
        gcd_det_b: g(&basis.det_b),
    }
}

/// `gcd(det A, p) = gcd(det B, p) = 1`
pub fn admissible_modulus(a: &IntMatrix, basis: &SupportBasis, p: u64) -> bool {
    admissibility(a, basis, p).ok()
}

/// First nonzero `alpha` in `Z_p^k` (mixed-radix order) orthogonal mod `p` to
/// every basis column, or `None` if every frequency is detected.
pub fn undetected_frequency(basis: &SupportBasis, p: u64) -> Option<Vec<u64>> {
    let k = basis.b.dim();
    let cols: Vec<Vec<u64>> = basis
        .columns
        .iter()
        .map(|c| {
            let pb = BigInt::from(p);
            c.y.iter().map(|x| x.mod_floor(&pb).to_u64().unwrap_or(0)).collect()
        })
        .collect();
    let total = (p as u128).pow(k as u32);
    let mut alpha = vec![0u64; k];
    for _ in 1..total {
        increment_mixed_radix(&mut alpha, p);
        let detected = cols.iter().any(|y| {
            y.iter()
                .zip(&alpha)
                .fold(0u128, |acc, (a, b)| (acc + *a as u128 * *b as u128) % p as u128)
                != 0
        });
        if !detected {
            return Some(alpha);
        }
    }
    None
}

pub(crate) fn increment_mixed_radix(v: &mut [u64], p: u64) {
    for c in v.iter_mut() {
        *c += 1;
        if *c < p {
            return;
        }
        *c = 0;
    }
}
