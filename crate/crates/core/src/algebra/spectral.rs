use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use super::matrix::{det_int, IntMatrix};
use super::poly::{char_poly, factor_monic, minimal_poly, root_of_integer_order, IntPolynomial};
use super::roots::eigenvalues;
use crate::error::{Error, Result};

/// Tolerance for the numeric `|lambda| != 1` test.
pub const TOL_UNIT: f64 = 1e-9;

/// Default cap on `l` when searching for `lambda^l = m`.
pub const DEFAULT_L_MAX: u32 = 24;

/// Mixing-rate class of the matrix `A`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Regime {
    /// No eigenvalue on the unit circle.
    NonUnitModulus,
    /// Every eigenvalue satisfies `lambda^l = m` with integer `m >= 2`.
    RootsOfIntegerExpanding,
    /// Roots of unity alongside roots of integers `m >= 2`.
    UnitRootMixed,
    /// Some eigenvalue is a root of unity.
    UnitRootTorsion,
    Unknown,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::NonUnitModulus => "NonUnitModulus",
            Regime::RootsOfIntegerExpanding => "RootsOfIntegerExpanding",
            Regime::UnitRootMixed => "UnitRootMixed",
            Regime::UnitRootTorsion => "UnitRootTorsion",
            Regime::Unknown => "Unknown",
        }
    }
}

/// An irreducible factor of the characteristic polynomial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorOrder {
    pub poly: IntPolynomial,
    pub multiplicity: usize,
    /// `(l, m)` with `lambda^l = m` for every root of the factor.
    #[serde(serialize_with = "ser_order")]
    pub root_order: Option<(u32, BigInt)>,
}

fn ser_order<S: Serializer>(o: &Option<(u32, BigInt)>, s: S) -> std::result::Result<S::Ok, S::Error> {
    o.as_ref().map(|(l, m)| (*l, m.to_string())).serialize(s)
}

fn ser_complex<S: Serializer>(v: &[Complex64], s: S) -> std::result::Result<S::Ok, S::Error> {
    v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>().serialize(s)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralProfile {
    pub char_poly: IntPolynomial,
    pub min_poly: IntPolynomial,
    /// Degree of the minimal polynomial.
    pub d: usize,
    #[serde(serialize_with = "ser_complex")]
    pub eigenvalues: Vec<Complex64>,
    /// `None` when the characteristic polynomial could not be fully factored.
    pub factors: Option<Vec<FactorOrder>>,
    pub regime: Regime,
}

impl SpectralProfile {
    /// `(l, m)` per irreducible factor, in factor order.
    pub fn root_orders(&self) -> Vec<Option<(u32, BigInt)>> {
        self.factors
            .iter()
            .flatten()
            .map(|f| f.root_order.clone())
            .collect()
    }

    /// `lcm` of the `l` values, when every factor has one.
    pub fn common_power(&self) -> Option<u32> {
        let orders = self.root_orders();
        if orders.is_empty() || orders.iter().any(Option::is_none) {
            return None;
        }
        Some(orders.iter().flatten().fold(1u32, |acc, (l, _)| num_integer::lcm(acc, *l)))
    }
}

/// Classifies `A` by the arithmetic of its eigenvalues.
///
/// Precedence: all factors are roots of integers `m >= 2`; roots of unity
/// mixed with roots of integers `m >= 2`; any root of unity; numerically no
/// eigenvalue within [`TOL_UNIT`] of the unit circle; otherwise unknown.
pub fn classify_regime(a: &IntMatrix, l_max: u32) -> Result<SpectralProfile> {
    if det_int(a).is_zero() {
        return Err(Error::SingularMatrix);
    }
    let cp = char_poly(a);
    let mp = minimal_poly(a);
    let eig = eigenvalues(&cp)?;

    let factors = factor_monic(&cp).map(|fs| {
        fs.into_iter()
            .map(|f| FactorOrder {
                root_order: root_of_integer_order(&f.poly, l_max),
                poly: f.poly,
                multiplicity: f.multiplicity,
            })
            .collect::<Vec<_>>()
    });

    let regime = match &factors {
        None => Regime::Unknown,
        Some(fs) => regime_from_factors(fs, &eig),
    };

    Ok(SpectralProfile {
        d: mp.degree(),
        char_poly: cp,
        min_poly: mp,
        eigenvalues: eig,
        factors,
        regime,
    })
}

fn regime_from_factors(fs: &[FactorOrder], eig: &[Complex64]) -> Regime {
    let all_ordered = fs.iter().all(|f| f.root_order.is_some());
    let is_unit = |f: &FactorOrder| f.root_order.as_ref().is_some_and(|(_, m)| m.is_one());
    let any_unit = fs.iter().any(is_unit);
    let any_expanding = fs
        .iter()
        .any(|f| f.root_order.as_ref().is_some_and(|(_, m)| *m >= BigInt::from(2)));

    if all_ordered && !any_unit {
        Regime::RootsOfIntegerExpanding
    } else if all_ordered && any_unit && any_expanding {
        Regime::UnitRootMixed
    } else if any_unit {
        Regime::UnitRootTorsion
    } else if eig.iter().all(|z| (z.norm() - 1.0).abs() > TOL_UNIT) {
        Regime::NonUnitModulus
    } else {
        Regime::Unknown
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::from_rows(rows).unwrap()
    }

    fn regime(rows: &[&[i64]]) -> Regime {
        classify_regime(&m(rows), DEFAULT_L_MAX).unwrap().regime
    }

    #[test]
    fn named_regimes() {
        let prof = classify_regime(&m(&[&[0, 1], &[2, 0]]), DEFAULT_L_MAX).unwrap();
        assert_eq!(prof.regime, Regime::RootsOfIntegerExpanding);
        assert_eq!(prof.root_orders(), vec![Some((2, BigInt::from(2)))]);
        assert_eq!(prof.d, 2);
        assert_eq!(regime(&[&[1, 0], &[0, 2]]), Regime::UnitRootMixed);
        assert_eq!(regime(&[&[2, 1], &[1, 1]]), Regime::NonUnitModulus);
        assert_eq!(regime(&[&[0, -1], &[1, 0]]), Regime::UnitRootTorsion);
        assert_eq!(regime(&[&[1]]), Regime::UnitRootTorsion);
        assert_eq!(regime(&[&[2]]), Regime::RootsOfIntegerExpanding);
        assert_eq!(regime(&[&[-1]]), Regime::UnitRootTorsion);
        // golden ratio eigenvalues next to a root of unity
        assert_eq!(
            regime(&[&[2, 1, 0], &[1, 1, 0], &[0, 0, 1]]),
            Regime::UnitRootTorsion
        );
    }

    #[test]
    fn unit_modulus_without_torsion_is_unknown() {
        // companion of the Salem quartic x^4 - 2x^3 + x^2 - 2x + 1: two roots
        // on |z| = 1 that are not roots of unity
        let c = m(&[&[0, 0, 0, -1], &[1, 0, 0, 2], &[0, 1, 0, -1], &[0, 0, 1, 2]]);
        let prof = classify_regime(&c, DEFAULT_L_MAX).unwrap();
        assert_eq!(prof.char_poly, IntPolynomial::from_i64(&[1, -2, 1, -2, 1]));
        assert_eq!(prof.regime, Regime::Unknown);
    }

    #[test]
    fn large_dimension_without_factorization_is_unknown() {
        // companion of x^5 - 3: irreducible quintic
        let c = m(&[
            &[0, 0, 0, 0, 3],
            &[1, 0, 0, 0, 0],
            &[0, 1, 0, 0, 0],
            &[0, 0, 1, 0, 0],
            &[0, 0, 0, 1, 0],
        ]);
        let prof = classify_regime(&c, DEFAULT_L_MAX).unwrap();
        assert!(prof.factors.is_none());
        assert_eq!(prof.regime, Regime::Unknown);
    }

    #[test]
    fn singular_rejected() {
        assert_eq!(classify_regime(&m(&[&[1, 2], &[2, 4]]), 24), Err(Error::SingularMatrix));
    }

    #[test]
    fn cayley_hamilton_and_min_poly_divides() {
        for rows in [
            vec![vec![0, 1], vec![2, 0]],
            vec![vec![2, 1], vec![1, 1]],
            vec![vec![2, 1, 0], vec![0, 2, 0], vec![0, 0, 2]],
            vec![vec![3, -1, 4], vec![1, 5, -9], vec![2, 6, 5]],
        ] {
            let a = IntMatrix::from_rows(&rows).unwrap();
            let prof = classify_regime(&a, 24).unwrap();
            assert!(prof.char_poly.eval_matrix(&a).is_zero());
            assert!(prof.min_poly.eval_matrix(&a).is_zero());
            let (_, r) = prof.char_poly.div_rem_monic(&prof.min_poly);
            assert!(r.is_zero());
            assert_eq!(prof.eigenvalues.len(), a.dim());
        }
    }

    fn unimodular() -> impl Strategy<Value = IntMatrix> {
        // products of elementary shears are unimodular
        prop::collection::vec((0usize..3, 0usize..3, -2i64..=2), 1..6).prop_map(|ops| {
            let mut u = IntMatrix::identity(3);
            for (i, j, c) in ops {
                if i == j {
                    continue;
                }
                let mut e = vec![vec![0i64; 3]; 3];
                for (t, row) in e.iter_mut().enumerate() {
                    row[t] = 1;
                }
                e[i][j] = c;
                u = u.mul(&IntMatrix::from_rows(&e).unwrap());
            }
            u
        })
    }

    fn inverse_unimodular(u: &IntMatrix) -> IntMatrix {
        // adjugate / det with det = +-1
        let k = u.dim();
        let det = det_int(u);
        let mut rows = vec![vec![BigInt::zero(); k]; k];
        for (i, row) in rows.iter_mut().enumerate() {
            for (j, slot) in row.iter_mut().enumerate() {
                let minor: Vec<Vec<BigInt>> = (0..k)
                    .filter(|&r| r != j)
                    .map(|r| (0..k).filter(|&c| c != i).map(|c| u.get(r, c).clone()).collect())
                    .collect();
                let cof = det_int(&IntMatrix::new(minor).unwrap());
                let sign = if (i + j) % 2 == 0 { BigInt::one() } else { -BigInt::one() };
                *slot = sign * cof * &det;
            }
        }
        IntMatrix::new(rows).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn similarity_invariant(u in unimodular(), which in 0usize..4) {
            let suite = [
                m(&[&[2, 0, 0], &[0, 1, 0], &[0, 0, 3]]),
                m(&[&[0, -1, 0], &[1, 0, 0], &[0, 0, 1]]),
                m(&[&[2, 1, 0], &[1, 1, 0], &[0, 0, 3]]),
                m(&[&[0, 1, 0], &[0, 0, 1], &[2, 0, 0]]),
            ];
            let a = &suite[which];
            let uinv = inverse_unimodular(&u);
            prop_assert!(u.mul(&uinv) == IntMatrix::identity(3));
            let conj = u.mul(a).mul(&uinv);
            let p1 = classify_regime(a, 24).unwrap();
            let p2 = classify_regime(&conj, 24).unwrap();
            prop_assert_eq!(p1.regime, p2.regime);
            prop_assert_eq!(p1.char_poly, p2.char_poly);
        }

        #[test]
        fn eigen_product_matches_constant_term(e in prop::collection::vec(-5i64..=5, 9)) {
            let a = IntMatrix::from_rows(&e.chunks(3).map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap();
            prop_assume!(!det_int(&a).is_zero());
            let cp = char_poly(&a);
            let eig = eigenvalues(&cp).unwrap();
            let prod: Complex64 = eig.iter().product();
            let c0 = -num_traits::ToPrimitive::to_f64(&cp.coeff(0)).unwrap();
            prop_assert!((prod.re - c0).abs() <= 1e-6 * c0.abs().max(1.0));
            prop_assert!(prod.im.abs() <= 1e-6 * c0.abs().max(1.0));
        }
    }
}
