use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use super::matrix::{primitive_integer_vector, IntMatrix};

/// Polynomial with integer coefficients, lowest degree first.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntPolynomial {
    coeffs: Vec<BigInt>,
}

impl IntPolynomial {
    pub fn new(coeffs: Vec<BigInt>) -> Self {
        let mut p = Self { coeffs };
        p.trim();
        p
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    /// `x - r`
    pub fn linear(r: &BigInt) -> Self {
        Self::new(vec![-r.clone(), BigInt::one()])
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(Zero::is_zero) {
            self.coeffs.pop();
        }
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> BigInt {
        self.coeffs.last().cloned().unwrap_or_default()
    }

    pub fn coeff(&self, i: usize) -> BigInt {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn is_monic(&self) -> bool {
        self.leading().is_one()
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::new(vec![]);
        }
        let mut c = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Self::new(c)
    }

    pub fn neg(&self) -> Self {
        Self::new(self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn content(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    /// Divides out the content and makes the leading coefficient positive.
    pub fn primitive(&self) -> Self {
        let g = self.content();
        if g.is_zero() {
            return self.clone();
        }
        let sign = if self.leading().is_negative() { -BigInt::one() } else { BigInt::one() };
        Self::new(self.coeffs.iter().map(|c| c / &g * &sign).collect())
    }

    /// Quotient and remainder by a monic divisor, exact over the integers.
    pub fn div_rem_monic(&self, divisor: &Self) -> (Self, Self) {
        assert!(divisor.is_monic(), "divisor must be monic");
        let dd = divisor.degree();
        if self.is_zero() || self.degree() < dd {
            return (Self::new(vec![]), self.clone());
        }
        let mut rem = self.coeffs.clone();
        let mut quot = vec![BigInt::zero(); self.degree() - dd + 1];
        for i in (0..quot.len()).rev() {
            let q = rem[i + dd].clone();
            if q.is_zero() {
                continue;
            }
            for (j, d) in divisor.coeffs.iter().enumerate() {
                rem[i + j] -= &q * d;
            }
            quot[i] = q;
        }
        (Self::new(quot), Self::new(rem))
    }

    /// Horner evaluation at an integer matrix, exact.
    pub fn eval_matrix(&self, a: &IntMatrix) -> IntMatrix {
        let k = a.dim();
        let mut acc = IntMatrix::zero(k);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(a).add(&IntMatrix::scalar(k, c.clone()));
        }
        acc
    }

    pub fn eval_int(&self, x: &BigInt) -> BigInt {
        self.coeffs.iter().rev().fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigInt::from(i))
                .collect(),
        )
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect()
    }
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            first = false;
            let show_coeff = !mag.is_one() || i == 0;
            if show_coeff {
                write!(f, "{mag}")?;
            }
            match i {
                0 => {}
                1 => write!(f, "x")?,
                _ => write!(f, "x^{i}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntPolynomial({self})")
    }
}

impl Serialize for IntPolynomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let coeffs: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        coeffs.serialize(s)
    }
}

/// Characteristic polynomial `det(xI - A)` by the Faddeev-LeVerrier
/// recurrence; every division in it is exact.
pub fn char_poly(a: &IntMatrix) -> IntPolynomial {
    let k = a.dim();
    let mut coeffs = vec![BigInt::zero(); k + 1];
    coeffs[k] = BigInt::one();
    let mut m = IntMatrix::zero(k);
    for step in 1..=k {
        m = a.mul(&m).add(&IntMatrix::scalar(k, coeffs[k - step + 1].clone()));
        let t = a.mul(&m).trace();
        coeffs[k - step] = -(t / BigInt::from(step));
    }
    IntPolynomial::new(coeffs)
}

/// Least-degree monic polynomial annihilating `a`, found from the first
/// linear dependency among `I, A, A^2, ...` over the rationals.
pub fn minimal_poly(a: &IntMatrix) -> IntPolynomial {
    let k = a.dim();
    let flat = |m: &IntMatrix| -> Vec<BigRational> {
        m.rows().into_iter().flatten().map(BigRational::from_integer).collect()
    };
    let mut powers = vec![flat(&IntMatrix::identity(k))];
    let mut current = IntMatrix::identity(k);
    for _ in 1..=k {
        current = current.mul(a);
        let target = flat(&current);
        if let Some(c) = solve_in_span(&powers, &target) {
            // x^d - sum c_i x^i
            let mut coeffs: Vec<BigRational> = c.into_iter().map(|x| -x).collect();
            coeffs.push(BigRational::one());
            let ints = primitive_integer_vector(&coeffs);
            let poly = IntPolynomial::new(ints).primitive();
            debug_assert!(poly.eval_matrix(a).is_zero());
            return poly;
        }
        powers.push(target);
    }
    unreachable!("Cayley-Hamilton guarantees a dependency by degree k")
}

/// Coefficients `c` with `sum c_i basis_i = target`, if the target is in the span.
/// The basis vectors are assumed linearly independent.
fn solve_in_span(basis: &[Vec<BigRational>], target: &[BigRational]) -> Option<Vec<BigRational>> {
    let n = basis.len();
    let rows = target.len();
    // augmented system: rows x (n + 1)
    let mut m: Vec<Vec<BigRational>> = (0..rows)
        .map(|r| {
            let mut row: Vec<BigRational> = basis.iter().map(|b| b[r].clone()).collect();
            row.push(target[r].clone());
            row
        })
        .collect();
    let mut pivot_row = 0;
    let mut pivot_cols = Vec::with_capacity(n);
    for col in 0..n {
        let p = (pivot_row..rows).find(|&r| !m[r][col].is_zero())?;
        m.swap(p, pivot_row);
        let inv = m[pivot_row][col].recip();
        for c in col..=n {
            m[pivot_row][c] = &m[pivot_row][c] * &inv;
        }
        for r in 0..rows {
            if r != pivot_row && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in col..=n {
                    let v = &m[r][c] - &f * &m[pivot_row][c];
                    m[r][c] = v;
                }
            }
        }
        pivot_cols.push(col);
        pivot_row += 1;
    }
    if m[pivot_row..].iter().any(|r| !r[n].is_zero()) {
        return None;
    }
    Some((0..n).map(|i| m[i][n].clone()).collect())
}

/// An irreducible factor with its multiplicity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Factor {
    pub poly: IntPolynomial,
    pub multiplicity: usize,
}

/// Factors a monic integer polynomial into monic irreducibles using integer
/// roots and a quartic-into-quadratics split. Returns `None` when a factor of
/// degree five or more remains.
pub fn factor_monic(f: &IntPolynomial) -> Option<Vec<Factor>> {
    assert!(f.is_monic(), "factor_monic expects a monic polynomial");
    let mut out: Vec<Factor> = Vec::new();
    let mut push = |p: IntPolynomial| {
        if let Some(existing) = out.iter_mut().find(|x| x.poly == p) {
            existing.multiplicity += 1;
        } else {
            out.push(Factor { poly: p, multiplicity: 1 });
        }
    };
    let mut rest = f.clone();
    while rest.coeff(0).is_zero() && rest.degree() > 0 {
        push(IntPolynomial::linear(&BigInt::zero()));
        rest = rest.div_rem_monic(&IntPolynomial::linear(&BigInt::zero())).0;
    }
    'roots: while rest.degree() > 0 {
        for r in divisors_signed(&rest.coeff(0)) {
            if rest.eval_int(&r).is_zero() {
                let lin = IntPolynomial::linear(&r);
                rest = rest.div_rem_monic(&lin).0;
                push(lin);
                continue 'roots;
            }
        }
        break;
    }
    match rest.degree() {
        0 => {}
        1..=3 => push(rest),
        4 => match split_quartic(&rest) {
            Some((a, b)) => {
                push(a);
                push(b);
            }
            None => push(rest),
        },
        _ => return None,
    }
    out.sort_by(|a, b| {
        a.poly
            .degree()
            .cmp(&b.poly.degree())
            .then_with(|| a.poly.coeffs().cmp(b.poly.coeffs()))
    });
    Some(out)
}

fn divisors_signed(n: &BigInt) -> Vec<BigInt> {
    let n = n.abs();
    if n.is_zero() {
        return vec![BigInt::zero()];
    }
    let mut ds = Vec::new();
    let root = n.sqrt();
    let mut i = BigInt::one();
    while i <= root {
        if (&n % &i).is_zero() {
            ds.push(i.clone());
            let q = &n / &i;
            if q != i {
                ds.push(q);
            }
        }
        i += 1;
    }
    ds.sort();
    ds.into_iter().flat_map(|d| [d.clone(), -d]).collect()
}

/// Monic quartic as a product of two monic integer quadratics, if possible.
fn split_quartic(f: &IntPolynomial) -> Option<(IntPolynomial, IntPolynomial)> {
    let (c0, c2, c3) = (f.coeff(0), f.coeff(2), f.coeff(3));
    let c1 = f.coeff(1);
    for b in divisors_signed(&c0) {
        let e = &c0 / &b;
        // (x^2 + a x + b)(x^2 + c x + e)
        let candidates: Vec<BigInt> = if e != b {
            let num = &c1 - &b * &c3;
            let den = &e - &b;
            if (&num % &den).is_zero() {
                vec![num / den]
            } else {
                vec![]
            }
        } else {
            let disc = &c3 * &c3 - BigInt::from(4) * (&c2 - BigInt::from(2) * &b);
            if disc.is_negative() {
                vec![]
            } else {
                let s = disc.sqrt();
                if &s * &s != disc {
                    vec![]
                } else {
                    [&c3 + &s, &c3 - &s]
                        .into_iter()
                        .filter(|x| x.is_even())
                        .map(|x| x / 2)
                        .collect()
                }
            }
        };
        for a in candidates {
            let c = &c3 - &a;
            let q1 = IntPolynomial::new(vec![b.clone(), a, BigInt::one()]);
            let q2 = IntPolynomial::new(vec![e.clone(), c, BigInt::one()]);
            if q1.mul(&q2) == *f {
                return Some((q1, q2));
            }
        }
    }
    None
}

/// Smallest `l <= l_max` with `x^l mod f` equal to a constant `m >= 1`; then
/// every root of `f` satisfies `lambda^l = m`.
///
/// The remainder sequence is built by multiplying by `x` and reducing, all in
/// exact integer arithmetic. A polynomial whose leading coefficient is not a
/// unit cannot divide `x^l - m`, so it yields `None`.
pub fn root_of_integer_order(f: &IntPolynomial, l_max: u32) -> Option<(u32, BigInt)> {
    let f = match f.leading() {
        l if l.is_one() => f.clone(),
        l if (-&l).is_one() => f.neg(),
        _ => return None,
    };
    let deg = f.degree();
    if deg == 0 {
        return None;
    }
    // remainder r(x) = x^l mod f, as a coefficient vector of length deg
    let mut r = vec![BigInt::zero(); deg];
    if deg == 1 {
        r[0] = -f.coeff(0);
    } else {
        r[1] = BigInt::one();
    }
    for l in 1..=l_max {
        if l > 1 {
            let top = r[deg - 1].clone();
            for i in (1..deg).rev() {
                r[i] = r[i - 1].clone();
            }
            r[0] = BigInt::zero();
            if !top.is_zero() {
                for (i, ri) in r.iter_mut().enumerate() {
                    *ri -= &top * f.coeff(i);
                }
            }
        }
        if r[1..].iter().all(Zero::is_zero) && r[0] >= BigInt::one() {
            return Some((l, r[0].clone()));
        }
    }
    None
}

/// Rational-coefficient helpers used for square-free decomposition.
pub(crate) mod rational {
    use super::*;

    pub type QPoly = Vec<BigRational>;

    pub fn from_int(p: &IntPolynomial) -> QPoly {
        p.coeffs().iter().cloned().map(BigRational::from_integer).collect()
    }

    pub fn trim(mut p: QPoly) -> QPoly {
        while p.last().is_some_and(Zero::is_zero) {
            p.pop();
        }
        p
    }

    pub fn div_rem(a: &QPoly, b: &QPoly) -> (QPoly, QPoly) {
        let b = trim(b.clone());
        let mut r = trim(a.clone());
        assert!(!b.is_empty(), "division by zero polynomial");
        if r.len() < b.len() {
            return (vec![], r);
        }
        let mut q = vec![BigRational::zero(); r.len() - b.len() + 1];
        let lead = b.last().unwrap().clone();
        for i in (0..q.len()).rev() {
            let c = &r[i + b.len() - 1] / &lead;
            if c.is_zero() {
                continue;
            }
            for (j, bj) in b.iter().enumerate() {
                let v = &r[i + j] - &c * bj;
                r[i + j] = v;
            }
            q[i] = c;
        }
        (trim(q), trim(r))
    }

    pub fn gcd(a: &QPoly, b: &QPoly) -> QPoly {
        let mut a = trim(a.clone());
        let mut b = trim(b.clone());
        while !b.is_empty() {
            let (_, r) = div_rem(&a, &b);
            a = b;
            b = r;
        }
        monic(&a)
    }

    pub fn monic(a: &QPoly) -> QPoly {
        match a.last() {
            Some(l) if !l.is_zero() => {
                let l = l.clone();
                a.iter().map(|c| c / &l).collect()
            }
            _ => a.clone(),
        }
    }

    pub fn derivative(a: &QPoly) -> QPoly {
        trim(
            a.iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
                .collect(),
        )
    }

    pub fn sub(a: &QPoly, b: &QPoly) -> QPoly {
        let n = a.len().max(b.len());
        trim(
            (0..n)
                .map(|i| {
                    a.get(i).cloned().unwrap_or_else(BigRational::zero)
                        - b.get(i).cloned().unwrap_or_else(BigRational::zero)
                })
                .collect(),
        )
    }

    /// Yun's square-free decomposition: `(part, multiplicity)` with every
    /// part square-free and monic.
    pub fn square_free(f: &QPoly) -> Vec<(QPoly, usize)> {
        let f = monic(&trim(f.clone()));
        if f.len() <= 1 {
            return vec![];
        }
        let df = derivative(&f);
        let mut a = gcd(&f, &df);
        let mut b = div_rem(&f, &a).0;
        let mut c = div_rem(&df, &a).0;
        let mut d = sub(&c, &derivative(&b));
        let mut out = Vec::new();
        let mut i = 1;
        while b.len() > 1 {
            a = gcd(&b, &d);
            if a.len() > 1 {
                out.push((a.clone(), i));
            }
            b = div_rem(&b, &a).0;
            c = div_rem(&d, &a).0;
            d = sub(&c, &derivative(&b));
            i += 1;
        }
        out
    }

    pub fn to_integer_primitive(a: &QPoly) -> IntPolynomial {
        IntPolynomial::new(primitive_integer_vector(a)).primitive()
    }
}
