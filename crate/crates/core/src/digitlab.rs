//! Base-sigma expansions of `a/p` and generalized alternations.
//!
//! A generalized alternation between consecutive digits `x, y` is either
//! `x != y`, or `x == y` with the digit outside `{0, sigma - 1}`.

use std::collections::{BTreeMap, HashSet};
use std::io::{self, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::par::{self, Exec};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct DigitBlock {
    pub sigma: u64,
    pub digits: Vec<u64>,
    pub a: u64,
    pub p: u64,
    /// Position of the first digit in the expansion (0-based).
    pub offset: usize,
}

/// First `t` digits of `a/p` in base `sigma`, by long division.
pub fn base_digits(a: i64, p: u64, sigma: u64, t: usize) -> Result<DigitBlock> {
    if a <= 0 || a as u64 >= p {
        return Err(Error::OutOfRange { value: a, p });
    }
    if sigma < 2 {
        return Err(Error::InvalidArgument(format!("base {sigma} is below 2")));
    }
    Ok(DigitBlock {
        sigma,
        digits: expand(a as u64, p, sigma, t),
        a: a as u64,
        p,
        offset: 0,
    })
}

fn expand(mut rem: u64, p: u64, sigma: u64, t: usize) -> Vec<u64> {
    let (p, s) = (p as u128, sigma as u128);
    (0..t)
        .map(|_| {
            let scaled = rem as u128 * s;
            rem = (scaled % p) as u64;
            (scaled / p) as u64
        })
        .collect()
}

pub fn generalized_alternations(block: &DigitBlock) -> usize {
    count_alternations(&block.digits, block.sigma)
}

fn count_alternations(digits: &[u64], sigma: u64) -> usize {
    digits
        .windows(2)
        .filter(|w| w[0] != w[1] || (w[0] != 0 && w[0] != sigma - 1))
        .count()
}

/// Smallest `t` with `sigma^t >= p`.
pub fn block_length(p: u64, sigma: u64) -> usize {
    let mut t = 0;
    let mut pow: u128 = 1;
    while pow < p as u128 {
        pow *= sigma as u128;
        t += 1;
    }
    t
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CensusRow {
    pub a: u64,
    pub block_index: usize,
    pub digits: Vec<u64>,
    pub alternations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CensusReport {
    pub p: u64,
    pub sigma: u64,
    pub t: usize,
    pub r: usize,
    /// For each block index, whether the blocks of all `a` are pairwise distinct.
    pub distinct: Vec<bool>,
    pub min_alternations: usize,
    /// Alternation count -> number of blocks.
    pub histogram: BTreeMap<usize, usize>,
    #[serde(skip)]
    pub rows: Vec<CensusRow>,
}

impl CensusReport {
    pub fn all_distinct(&self) -> bool {
        self.distinct.iter().all(|d| *d)
    }
}

/// Splits the first `r * t` digits of every `a/p`, `0 < a < p`, into `r`
/// blocks of `t` digits and tabulates them.
pub fn block_census(p: u64, sigma: u64, t: usize, r: usize, exec: Exec) -> Result<CensusReport> {
    if p < 2 || sigma < 2 || t == 0 || r == 0 {
        return Err(Error::InvalidArgument(format!(
            "census needs p >= 2, sigma >= 2, t >= 1, r >= 1 (got {p}, {sigma}, {t}, {r})"
        )));
    }
    let numerators: Vec<u64> = (1..p).collect();
    let per_a = par::map_slice(exec, &numerators, |&a| {
        let digits = expand(a, p, sigma, r * t);
        digits
            .chunks(t)
            .enumerate()
            .map(|(i, block)| CensusRow {
                a,
                block_index: i,
                alternations: count_alternations(block, sigma),
                digits: block.to_vec(),
            })
            .collect::<Vec<_>>()
    });
    let rows: Vec<CensusRow> = per_a.into_iter().flatten().collect();

    let distinct = (0..r)
        .map(|i| {
            let mut seen = HashSet::new();
            rows.iter()
                .filter(|row| row.block_index == i)
                .all(|row| seen.insert(&row.digits))
        })
        .collect();
    let mut histogram = BTreeMap::new();
    for row in &rows {
        *histogram.entry(row.alternations).or_insert(0) += 1;
    }
    Ok(CensusReport {
        p,
        sigma,
        t,
        r,
        distinct,
        min_alternations: rows.iter().map(|r| r.alternations).min().unwrap_or(0),
        histogram,
        rows,
    })
}

/// CSV with header `a,block_index,digits,alternations`; digits are
/// `;`-separated.
pub fn write_census_csv<W: Write>(report: &CensusReport, mut w: W) -> io::Result<()> {
    writeln!(w, "a,block_index,digits,alternations")?;
    for row in &report.rows {
        let digits: Vec<String> = row.digits.iter().map(|d| d.to_string()).collect();
        writeln!(w, "{},{},{},{}", row.a, row.block_index, digits.join(";"), row.alternations)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn block(sigma: u64, digits: &[u64]) -> DigitBlock {
        DigitBlock {
            sigma,
            digits: digits.to_vec(),
            a: 1,
            p: 2,
            offset: 0,
        }
    }

    /// Oracle: schoolbook long division carried out with exact rationals
    /// written as (numerator, denominator) pairs.
    fn oracle_digits(a: u64, p: u64, sigma: u64, t: usize) -> Vec<u64> {
        let mut num = a;
        let mut out = Vec::new();
        for _ in 0..t {
            let mut d = 0;
            num *= sigma;
            while num >= p {
                num -= p;
                d += 1;
            }
            out.push(d);
        }
        out
    }

    #[test]
    fn digits_examples() {
        assert_eq!(base_digits(1, 2, 2, 4).unwrap().digits, vec![1, 0, 0, 0]);
        assert_eq!(base_digits(1, 3, 2, 4).unwrap().digits, vec![0, 1, 0, 1]);
        assert_eq!(base_digits(2, 5, 3, 4).unwrap().digits, vec![1, 0, 1, 2]);
        assert_eq!(oracle_digits(2, 5, 3, 4), vec![1, 0, 1, 2]);
        assert_eq!(oracle_digits(1, 3, 2, 4), vec![0, 1, 0, 1]);
        assert_eq!(base_digits(0, 5, 2, 3), Err(Error::OutOfRange { value: 0, p: 5 }));
        assert_eq!(base_digits(5, 5, 2, 3), Err(Error::OutOfRange { value: 5, p: 5 }));
    }

    #[test]
    fn alternation_examples() {
        assert_eq!(generalized_alternations(&block(2, &[0, 1, 0])), 2);
        assert_eq!(generalized_alternations(&block(3, &[1, 1])), 1);
        assert_eq!(generalized_alternations(&block(3, &[0, 0, 2, 2])), 1);
        assert_eq!(generalized_alternations(&block(2, &[1])), 0);
    }

    #[test]
    fn census_examples() {
        let rep = block_census(5, 2, 3, 1, Exec::Sequential).unwrap();
        let blocks: Vec<Vec<u64>> = rep.rows.iter().map(|r| r.digits.clone()).collect();
        let oracle: Vec<Vec<u64>> = (1..5).map(|a| oracle_digits(a, 5, 2, 3)).collect();
        assert_eq!(blocks, oracle);
        assert_eq!(blocks, vec![vec![0, 0, 1], vec![0, 1, 1], vec![1, 0, 0], vec![1, 1, 0]]);
        assert!(rep.all_distinct());
        assert!(rep.min_alternations >= 1);

        let rep = block_census(2, 2, 1, 1, Exec::Sequential).unwrap();
        assert_eq!(rep.rows.len(), 1);
        assert_eq!(rep.rows[0].digits, vec![1]);
        assert!(rep.all_distinct());

        let rep = block_census(7, 7, 1, 1, Exec::Parallel).unwrap();
        let digits: Vec<u64> = rep.rows.iter().map(|r| r.digits[0]).collect();
        assert_eq!(digits, vec![1, 2, 3, 4, 5, 6]);
        assert!(rep.all_distinct());
    }

    #[test]
    fn multi_block_census_and_csv() {
        let rep = block_census(11, 2, block_length(11, 2), 3, Exec::Parallel).unwrap();
        assert_eq!(rep.t, 4);
        assert_eq!(rep.rows.len(), 30);
        assert_eq!(rep.histogram.values().sum::<usize>(), 30);
        let mut buf = Vec::new();
        write_census_csv(&rep, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        // 1/11 = 0.000101110100... in binary
        assert!(text.starts_with("a,block_index,digits,alternations\n1,0,0;0;0;1,1\n1,1,0;1;1;1,1\n"), "{text}");
    }

    #[test]
    fn block_lengths() {
        assert_eq!(block_length(2, 2), 1);
        assert_eq!(block_length(5, 2), 3);
        assert_eq!(block_length(7, 7), 1);
        assert_eq!(block_length(1000, 2), 10);
    }

    proptest! {
        #[test]
        fn digits_reconstruct_fraction(p in 2u64..5000, sigma in 2u64..17, t in 1usize..12, seed in any::<u64>()) {
            let a = 1 + seed % (p - 1);
            let digits = base_digits(a as i64, p, sigma, t).unwrap().digits;
            prop_assert_eq!(&digits, &oracle_digits(a, p, sigma, t));
            // sum d_i sigma^{t-i} = floor(a sigma^t / p), so the truncation error is below sigma^-t
            let value = digits.iter().fold(0u128, |acc, d| acc * sigma as u128 + *d as u128);
            let scaled = a as u128 * (sigma as u128).pow(t as u32);
            prop_assert!(value * p as u128 <= scaled);
            prop_assert!(scaled < (value + 1) * p as u128);
        }

        #[test]
        fn alternations_symmetric(sigma in 2u64..10, raw in prop::collection::vec(any::<u64>(), 0..30)) {
            let digits: Vec<u64> = raw.iter().map(|d| d % sigma).collect();
            let flipped: Vec<u64> = digits.iter().map(|d| sigma - 1 - d).collect();
            prop_assert_eq!(count_alternations(&digits, sigma), count_alternations(&flipped, sigma));
        }
    }
}
