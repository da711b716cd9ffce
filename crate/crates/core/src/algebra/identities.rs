//! Numerical and exact checks of the telescoping and power-expansion
//! identities for `tA` written in terms of the minimal-polynomial roots.
//!
//! With `T = tA` and roots `l_1..l_d` of the minimal polynomial (repeated by
//! their multiplicity there):
//!
//! ```text
//! (1) T^e = prod_{i<=e}(T - l_i) + sum_{s<e} l_{s+1} T^{e-s-1} prod_{i<=s}(T - l_i)
//! (2) T^j prod_{i<=e}(T - l_i)
//!       = sum_{h=e+1}^{d} h_{j-d+h}(l_h..l_d) prod_{n=h+1}^{d}(T - l_n) prod_{i<=e}(T - l_i)
//! ```
//!
//! where `h_s` is the complete homogeneous symmetric polynomial of degree `s`
//! (zero for negative `s`).

use std::ops::{Add, Mul, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::matrix::IntMatrix;
use super::poly::{char_poly, factor_monic, minimal_poly};
use super::roots::eigenvalues;
use crate::error::{Error, Result};

const REL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub telescoping_ok: bool,
    pub telescoping_residual: f64,
    pub expansion_ok: bool,
    pub expansion_residual: f64,
    /// Both sides were evaluated in exact integer arithmetic.
    pub exact: bool,
}

impl IdentityCheck {
    pub fn holds(&self) -> bool {
        self.telescoping_ok && self.expansion_ok
    }

    pub fn max_residual(&self) -> f64 {
        self.telescoping_residual.max(self.expansion_residual)
    }
}

/// Verifies both identities for `tA`, exponent `e` (`0 <= e <= d`) and power `j`.
///
/// `order` is a permutation of `0..k` applied to the eigenvalue list of the
/// characteristic polynomial; the roots of the minimal polynomial are taken
/// in the order of their first appearances in the permuted list.
pub fn lemma25_verify(a: &IntMatrix, order: &[usize], e: usize, j: usize) -> Result<IdentityCheck> {
    let k = a.dim();
    if order.len() != k {
        return Err(Error::OrderMismatch { expected: k, got: order.len() });
    }
    let mut seen = vec![false; k];
    for &i in order {
        if i >= k || std::mem::replace(&mut seen[i], true) {
            return Err(Error::InvalidArgument(format!("{order:?} is not a permutation of 0..{k}")));
        }
    }
    let mp = minimal_poly(a);
    let d = mp.degree();
    if e > d {
        return Err(Error::InvalidArgument(format!("e = {e} exceeds d = {d}")));
    }
    let eig = eigenvalues(&char_poly(a))?;
    let permuted: Vec<Complex64> = order.iter().map(|&i| eig[i]).collect();
    let mut pool = eigenvalues(&mp)?;
    let mut lambdas = Vec::with_capacity(d);
    for z in permuted {
        if let Some(pos) = pool.iter().position(|w| (w - z).norm() <= 1e-6 * (1.0 + z.norm())) {
            pool.swap_remove(pos);
            lambdas.push(z);
        }
    }
    debug_assert_eq!(lambdas.len(), d);

    let t = a.transpose();
    let integral = factor_monic(&mp).is_some_and(|fs| fs.iter().all(|f| f.poly.degree() == 1));
    if integral {
        let lam: Vec<BigInt> = lambdas
            .iter()
            .map(|z| BigInt::from(z.re.round() as i64))
            .collect();
        let tm = Dense::from_fn(k, |r, c| t.get(r, c).clone());
        let (l1, r1) = telescoping(&tm, &lam, e);
        let (l2, r2) = expansion(&tm, &lam, e, j);
        let res1 = l1.max_abs_diff(&r1, |x| x.abs().to_f64().unwrap_or(f64::INFINITY));
        let res2 = l2.max_abs_diff(&r2, |x| x.abs().to_f64().unwrap_or(f64::INFINITY));
        return Ok(IdentityCheck {
            telescoping_ok: l1 == r1,
            telescoping_residual: res1,
            expansion_ok: l2 == r2,
            expansion_residual: res2,
            exact: true,
        });
    }

    let tf = t.to_f64_entries();
    let tm = Dense::from_fn(k, |r, c| Complex64::new(tf[r * k + c], 0.0));
    let (l1, r1) = telescoping(&tm, &lambdas, e);
    let (l2, r2) = expansion(&tm, &lambdas, e, j);
    let res1 = l1.max_abs_diff(&r1, |z| z.norm());
    let res2 = l2.max_abs_diff(&r2, |z| z.norm());
    let scale1 = l1.max_abs(|z| z.norm()).max(1.0);
    let scale2 = l2.max_abs(|z| z.norm()).max(1.0);
    Ok(IdentityCheck {
        telescoping_ok: res1 <= REL_TOL * scale1,
        telescoping_residual: res1,
        expansion_ok: res2 <= REL_TOL * scale2,
        expansion_residual: res2,
        exact: false,
    })
}

trait Ring: Clone + PartialEq + Zero + One + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> {}
impl<T> Ring for T where T: Clone + PartialEq + Zero + One + Add<Output = T> + Sub<Output = T> + Mul<Output = T> {}

#[derive(Clone, PartialEq)]
struct Dense<T> {
    k: usize,
    v: Vec<T>,
}

impl<T: Ring> Dense<T> {
    fn from_fn(k: usize, f: impl Fn(usize, usize) -> T) -> Self {
        Self {
            k,
            v: (0..k * k).map(|i| f(i / k, i % k)).collect(),
        }
    }

    fn scalar(k: usize, c: T) -> Self {
        Self::from_fn(k, |r, s| if r == s { c.clone() } else { T::zero() })
    }

    fn mul(&self, o: &Self) -> Self {
        let k = self.k;
        Self::from_fn(k, |r, c| {
            (0..k).fold(T::zero(), |acc, l| acc + self.v[r * k + l].clone() * o.v[l * k + c].clone())
        })
    }

    fn add(&self, o: &Self) -> Self {
        Self {
            k: self.k,
            v: self.v.iter().zip(&o.v).map(|(a, b)| a.clone() + b.clone()).collect(),
        }
    }

    fn sub(&self, o: &Self) -> Self {
        Self {
            k: self.k,
            v: self.v.iter().zip(&o.v).map(|(a, b)| a.clone() - b.clone()).collect(),
        }
    }

    fn scale(&self, c: &T) -> Self {
        Self {
            k: self.k,
            v: self.v.iter().map(|a| a.clone() * c.clone()).collect(),
        }
    }

    fn pow(&self, e: usize) -> Self {
        (0..e).fold(Self::scalar(self.k, T::one()), |acc, _| acc.mul(self))
    }

    fn max_abs_diff(&self, o: &Self, abs: impl Fn(T) -> f64) -> f64 {
        self.v
            .iter()
            .zip(&o.v)
            .map(|(a, b)| abs(a.clone() - b.clone()))
            .fold(0.0, f64::max)
    }

    fn max_abs(&self, abs: impl Fn(T) -> f64) -> f64 {
        self.v.iter().map(|a| abs(a.clone())).fold(0.0, f64::max)
    }
}

/// `prod_{i in range} (T - l_i)` with 1-based root indices.
fn shifted_product<T: Ring>(t: &Dense<T>, lam: &[T], from: usize, to: usize) -> Dense<T> {
    (from..=to).fold(Dense::scalar(t.k, T::one()), |acc, i| {
        acc.mul(&t.sub(&Dense::scalar(t.k, lam[i - 1].clone())))
    })
}

fn telescoping<T: Ring>(t: &Dense<T>, lam: &[T], e: usize) -> (Dense<T>, Dense<T>) {
    let lhs = t.pow(e);
    let mut rhs = shifted_product(t, lam, 1, e);
    for s in 0..e {
        let term = t.pow(e - s - 1).mul(&shifted_product(t, lam, 1, s)).scale(&lam[s]);
        rhs = rhs.add(&term);
    }
    (lhs, rhs)
}

fn expansion<T: Ring>(t: &Dense<T>, lam: &[T], e: usize, j: usize) -> (Dense<T>, Dense<T>) {
    let d = lam.len();
    let head = shifted_product(t, lam, 1, e);
    let lhs = t.pow(j).mul(&head);
    let mut rhs = Dense::scalar(t.k, T::zero());
    for h in e + 1..=d {
        let degree = j as i64 - d as i64 + h as i64;
        if degree < 0 {
            continue;
        }
        let coeff = complete_homogeneous(&lam[h - 1..d], degree as usize);
        let term = shifted_product(t, lam, h + 1, d).mul(&head).scale(&coeff);
        rhs = rhs.add(&term);
    }
    (lhs, rhs)
}

/// Complete homogeneous symmetric polynomial `h_s(vars)`.
fn complete_homogeneous<T: Ring>(vars: &[T], s: usize) -> T {
    let mut h = vec![T::zero(); s + 1];
    h[0] = T::one();
    for x in vars {
        for deg in 1..=s {
            h[deg] = h[deg].clone() + x.clone() * h[deg - 1].clone();
        }
    }
    h[s].clone()
}
