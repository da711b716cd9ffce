use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Square matrix with arbitrary-precision integer entries, row-major.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<i64>>", into = "Vec<Vec<i64>>")]
pub struct IntMatrix {
    k: usize,
    entries: Vec<BigInt>,
}

impl IntMatrix {
    pub fn new(rows: Vec<Vec<BigInt>>) -> Result<Self> {
        let k = rows.len();
        if k == 0 {
            return Err(Error::DimensionMismatch("matrix must have dimension >= 1".into()));
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != k) {
            return Err(Error::DimensionMismatch(format!(
                "row of length {} in a {k}x{k} matrix",
                bad.len()
            )));
        }
        Ok(Self {
            k,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_rows<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self> {
        Self::new(
            rows.iter()
                .map(|r| r.as_ref().iter().map(|&v| BigInt::from(v)).collect())
                .collect(),
        )
    }

    pub fn identity(k: usize) -> Self {
        Self::scalar(k, BigInt::one())
    }

    pub fn zero(k: usize) -> Self {
        Self::scalar(k, BigInt::zero())
    }

    pub fn scalar(k: usize, c: BigInt) -> Self {
        let mut m = Self {
            k,
            entries: vec![BigInt::zero(); k * k],
        };
        for i in 0..k {
            m.entries[i * k + i] = c.clone();
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i * self.k + j]
    }

    fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.entries[i * self.k + j] = v;
    }

    pub fn rows(&self) -> Vec<Vec<BigInt>> {
        self.entries.chunks(self.k).map(|r| r.to_vec()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.k).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn from_columns(cols: &[Vec<BigInt>]) -> Result<Self> {
        let k = cols.len();
        let rows = (0..k)
            .map(|i| {
                cols.iter()
                    .map(|c| c.get(i).cloned().ok_or_else(|| Error::DimensionMismatch("short column".into())))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(rows)
    }

    pub fn transpose(&self) -> Self {
        let mut t = self.clone();
        for i in 0..self.k {
            for j in 0..self.k {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.k, other.k, "dimension mismatch in matrix product");
        let k = self.k;
        let mut out = Self::zero(k);
        for i in 0..k {
            for l in 0..k {
                let a = self.get(i, l);
                if a.is_zero() {
                    continue;
                }
                for j in 0..k {
                    out.entries[i * k + j] += a * other.get(l, j);
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.k, other.k, "dimension mismatch in matrix sum");
        Self {
            k: self.k,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.k, other.k, "dimension mismatch in matrix difference");
        Self {
            k: self.k,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        Self {
            k: self.k,
            entries: self.entries.iter().map(|a| a * c).collect(),
        }
    }

    pub fn trace(&self) -> BigInt {
        (0..self.k).map(|i| self.get(i, i).clone()).sum()
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(v.len(), self.k, "dimension mismatch in matrix-vector product");
        (0..self.k)
            .map(|i| (0..self.k).map(|j| self.get(i, j) * &v[j]).sum())
            .collect()
    }

    pub fn pow(&self, e: u64) -> Self {
        let mut result = Self::identity(self.k);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Induced max-norm of the transpose: max absolute column sum of `self`.
    pub fn transpose_inf_norm(&self) -> BigInt {
        (0..self.k)
            .map(|j| (0..self.k).map(|i| self.get(i, j).abs()).sum::<BigInt>())
            .max()
            .unwrap_or_default()
    }

    /// Entries reduced into `[0, p)` as machine integers, row-major.
    pub fn reduce_mod(&self, p: u64) -> Vec<u64> {
        let pb = BigInt::from(p);
        self.entries
            .iter()
            .map(|a| a.mod_floor(&pb).to_u64().expect("residue fits in u64"))
            .collect()
    }

    /// Entries as `i64` when they all fit.
    pub fn to_i64_rows(&self) -> Option<Vec<Vec<i64>>> {
        self.entries
            .chunks(self.k)
            .map(|r| r.iter().map(ToPrimitive::to_i64).collect())
            .collect()
    }

    pub fn to_f64_entries(&self) -> Vec<f64> {
        self.entries.iter().map(|a| a.to_f64().unwrap_or(f64::NAN)).collect()
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries(self.entries.chunks(self.k).map(|r| r.iter().map(|a| a.to_string()).collect::<Vec<_>>()))
            .finish()
    }
}

impl TryFrom<Vec<Vec<i64>>> for IntMatrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<i64>>) -> Result<Self> {
        Self::from_rows(&rows)
    }
}

impl From<IntMatrix> for Vec<Vec<i64>> {
    fn from(m: IntMatrix) -> Self {
        m.to_i64_rows().expect("matrix entries exceed i64 range")
    }
}

/// Exact determinant by Bareiss fraction-free elimination.
pub fn det_int(a: &IntMatrix) -> BigInt {
    let k = a.dim();
    let mut m = a.rows();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for col in 0..k {
        let Some(pivot) = (col..k).find(|&r| !m[r][col].is_zero()) else {
            return BigInt::zero();
        };
        if pivot != col {
            m.swap(pivot, col);
            sign = -sign;
        }
        for r in col + 1..k {
            for c in col + 1..k {
                let v = &m[r][c] * &m[col][col] - &m[r][col] * &m[col][c];
                m[r][c] = v / &prev;
            }
            m[r][col] = BigInt::zero();
        }
        prev = m[col][col].clone();
    }
    sign * &m[k - 1][k - 1]
}

/// `A^e mod p` by repeated squaring; entries in `[0, p)`.
pub fn mat_pow_mod(a: &IntMatrix, e: u64, p: u64) -> IntMatrix {
    assert!(p >= 2, "modulus must be at least 2");
    let k = a.dim();
    let m = ModMatrix::new(k, a.reduce_mod(p), p);
    let r = m.pow(e);
    IntMatrix {
        k,
        entries: r.entries.into_iter().map(BigInt::from).collect(),
    }
}

/// Rank over the rationals of a set of integer vectors (fraction-free).
pub fn rank(vectors: &[Vec<BigInt>]) -> usize {
    let Some(cols) = vectors.first().map(Vec::len) else {
        return 0;
    };
    let mut m: Vec<Vec<BigInt>> = vectors.to_vec();
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(pivot, rank);
        for r in rank + 1..m.len() {
            if m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].clone();
            let pv = m[rank][col].clone();
            for c in col..cols {
                let v = &m[r][c] * &pv - &m[rank][c] * &f;
                m[r][c] = v;
            }
            let g = m[r].iter().fold(BigInt::zero(), |g, x| g.gcd(x));
            if !g.is_zero() && !g.is_one() {
                for x in m[r].iter_mut() {
                    *x /= &g;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Basis of the rational null space of `m`, each vector scaled to a primitive
/// integer vector whose first nonzero entry is positive.
pub fn integer_kernel(m: &IntMatrix) -> Vec<Vec<BigInt>> {
    let k = m.dim();
    let mut a: Vec<Vec<BigRational>> = m
        .rows()
        .into_iter()
        .map(|r| r.into_iter().map(BigRational::from_integer).collect())
        .collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..k {
        let Some(p) = (row..k).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(p, row);
        let inv = a[row][col].recip();
        for c in 0..k {
            a[row][c] = &a[row][c] * &inv;
        }
        for r in 0..k {
            if r != row && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in 0..k {
                    let v = &a[r][c] - &f * &a[row][c];
                    a[r][c] = v;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    let free: Vec<usize> = (0..k).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![BigRational::zero(); k];
            v[f] = BigRational::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -a[r][f].clone();
            }
            primitive_integer_vector(&v)
        })
        .collect()
}

pub(crate) fn primitive_integer_vector(v: &[BigRational]) -> Vec<BigInt> {
    let lcm = v.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
    let mut ints: Vec<BigInt> = v.iter().map(|x| (x * &lcm).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if !g.is_zero() {
        for x in ints.iter_mut() {
            *x /= &g;
        }
    }
    if ints.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative()) {
        for x in ints.iter_mut() {
            *x = -&*x;
        }
    }
    ints
}

/// Dense `k x k` matrix over `Z_p` with machine-word entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModMatrix {
    k: usize,
    p: u64,
    entries: Vec<u64>,
}

impl ModMatrix {
    pub fn new(k: usize, entries: Vec<u64>, p: u64) -> Self {
        assert_eq!(entries.len(), k * k);
        Self { k, p, entries }
    }

    pub fn from_int(a: &IntMatrix, p: u64) -> Self {
        Self::new(a.dim(), a.reduce_mod(p), p)
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    pub fn identity(k: usize, p: u64) -> Self {
        let mut e = vec![0; k * k];
        for i in 0..k {
            e[i * k + i] = 1 % p;
        }
        Self::new(k, e, p)
    }

    pub fn transpose(&self) -> Self {
        let k = self.k;
        let mut e = vec![0; k * k];
        for i in 0..k {
            for j in 0..k {
                e[j * k + i] = self.entries[i * k + j];
            }
        }
        Self::new(k, e, self.p)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let k = self.k;
        let p = self.p as u128;
        let mut e = vec![0u64; k * k];
        for i in 0..k {
            for j in 0..k {
                let mut acc: u128 = 0;
                for l in 0..k {
                    acc = (acc + self.entries[i * k + l] as u128 * other.entries[l * k + j] as u128) % p;
                }
                e[i * k + j] = acc as u64;
            }
        }
        Self::new(k, e, self.p)
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut result = Self::identity(self.k, self.p);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// `self * v mod p` into `out`.
    pub fn apply(&self, v: &[u64], out: &mut [u64]) {
        let k = self.k;
        let p = self.p as u128;
        for i in 0..k {
            let mut acc: u128 = 0;
            for j in 0..k {
                acc = (acc + self.entries[i * k + j] as u128 * v[j] as u128) % p;
            }
            out[i] = acc as u64;
        }
    }
}
