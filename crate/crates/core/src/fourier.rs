//! Fourier transforms on `Z_p^k` and the bounds built from them.
//!
//! Transform convention: `f^(alpha) = sum_h exp(2 pi i <h, alpha> / p) f(h)`.
//! For a chain started at 0, `|P_n^(alpha)|^2` is the product of
//! `|mu^(tA^j alpha)|^2` over `j < n`, with `tA^j alpha` reduced mod `p`.

use std::f64::consts::PI;
use std::io::{self, Write};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};
use serde::Serialize;

use crate::algebra::{integer_kernel, IntMatrix, ModMatrix};
use crate::error::{Error, Result};
use crate::evolution::{decode, state_count, state_cap, tv_distance, ChainSpec, Evolver};
use crate::increments::IncrementDistribution;
use crate::par::{self, Exec};

/// Running products below this are treated as zero by [`upper_bound`].
pub const NEGLIGIBLE: f64 = 1e-30;

/// Frequencies per work unit in the parallel scans. Fixed so that floating
/// sums do not depend on the thread count.
const CHUNK: usize = 256;

/// A frequency `alpha` in `Z_p^k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct FrequencyVector {
    components: Vec<u64>,
    p: u64,
}

impl FrequencyVector {
    /// Components must lie in `[0, p)`.
    pub fn new(components: Vec<u64>, p: u64) -> Result<Self> {
        if let Some(c) = components.iter().find(|c| **c >= p) {
            return Err(Error::InvalidArgument(format!("component {c} is not below p = {p}")));
        }
        Ok(Self { components, p })
    }

    /// Reduces an integer vector mod `p`.
    pub fn from_integers(v: &[BigInt], p: u64) -> Self {
        let pb = BigInt::from(p);
        Self {
            components: v.iter().map(|x| x.mod_floor(&pb).to_u64().unwrap_or(0)).collect(),
            p,
        }
    }

    pub fn components(&self) -> &[u64] {
        &self.components
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| *c == 0)
    }

    pub fn inf_norm(&self) -> u64 {
        self.components.iter().copied().max().unwrap_or(0)
    }
}

/// `mu^(alpha)` over the finite support.
pub fn mu_hat(mu: &IncrementDistribution, alpha: &FrequencyVector) -> Complex64 {
    let p = alpha.p as i128;
    mu.iter()
        .map(|(h, w)| {
            let r = h
                .iter()
                .zip(&alpha.components)
                .fold(0i128, |acc, (a, b)| (acc + *a as i128 * *b as i128).rem_euclid(p));
            Complex64::from_polar(w, 2.0 * PI * r as f64 / p as f64)
        })
        .sum()
}

/// Precomputed data for evaluating `|P_n^(alpha)|^2`.
struct Kernel {
    p: u64,
    k: usize,
    transpose: ModMatrix,
    /// Reduced residues with mass.
    residues: Vec<(Vec<u64>, f64)>,
}

impl Kernel {
    fn new(chain: &ChainSpec) -> Self {
        let p = chain.modulus();
        let k = chain.dim();
        let mut merged: Vec<(Vec<u64>, f64)> = Vec::new();
        for (h, w) in chain.increments().iter() {
            let r: Vec<u64> = h.iter().map(|c| c.rem_euclid(p as i64) as u64).collect();
            match merged.iter_mut().find(|(x, _)| *x == r) {
                Some(slot) => slot.1 += w,
                None => merged.push((r, w)),
            }
        }
        Self {
            p,
            k,
            transpose: chain.matrix_mod().transpose(),
            residues: merged,
        }
    }

    fn mu_hat_sq(&self, beta: &[u64]) -> f64 {
        let p = self.p as u128;
        let z: Complex64 = self
            .residues
            .iter()
            .map(|(r, w)| {
                let dot = r
                    .iter()
                    .zip(beta)
                    .fold(0u128, |acc, (a, b)| (acc + *a as u128 * *b as u128) % p);
                Complex64::from_polar(*w, 2.0 * PI * dot as f64 / self.p as f64)
            })
            .sum();
        z.norm_sqr()
    }

    /// Running products `|P_m^(alpha)|^2` for `m = 0..=n`, stopping early once
    /// the product drops below `floor` (remaining entries are left at 0).
    fn products(&self, alpha: &[u64], n: usize, floor: f64, out: &mut [f64]) {
        let mut beta = alpha.to_vec();
        let mut next = vec![0u64; self.k];
        let mut prod = 1.0;
        out[0] = 1.0;
        for slot in out.iter_mut().take(n + 1).skip(1) {
            prod *= self.mu_hat_sq(&beta);
            *slot = prod;
            if prod < floor {
                return;
            }
            self.transpose.apply(&beta, &mut next);
            std::mem::swap(&mut beta, &mut next);
        }
    }

    fn pn_hat_sq(&self, alpha: &[u64], n: usize) -> f64 {
        let mut out = vec![0.0; n + 1];
        self.products(alpha, n, 0.0, &mut out);
        out[n]
    }
}

/// `|P_n^(alpha)|^2` for the chain normalized to start at 0.
pub fn pn_hat_sq(chain: &ChainSpec, alpha: &FrequencyVector, n: u64) -> Result<f64> {
    check_alpha(chain, alpha)?;
    Ok(Kernel::new(chain).pn_hat_sq(&alpha.components, n as usize))
}

fn check_alpha(chain: &ChainSpec, alpha: &FrequencyVector) -> Result<()> {
    if alpha.p != chain.modulus() || alpha.components.len() != chain.dim() {
        return Err(Error::DimensionMismatch(format!(
            "frequency in Z_{}^{} used with a chain on Z_{}^{}",
            alpha.p,
            alpha.components.len(),
            chain.modulus(),
            chain.dim()
        )));
    }
    Ok(())
}

/// `|P_n^(alpha)|^2` for every `alpha`, in state-index order.
pub fn spectrum(chain: &ChainSpec, n: u64, cap: usize, exec: Exec) -> Result<Vec<f64>> {
    let states = state_count(chain.modulus(), chain.dim(), cap)?;
    let kernel = Kernel::new(chain);
    let chunks = states.div_ceil(CHUNK);
    let parts = par::map_range(exec, chunks, |c| {
        let mut alpha = vec![0u64; kernel.k];
        let mut buf = vec![0.0; n as usize + 1];
        (c * CHUNK..((c + 1) * CHUNK).min(states))
            .map(|idx| {
                decode(idx, kernel.p, &mut alpha);
                kernel.products(&alpha, n as usize, 0.0, &mut buf);
                buf[n as usize]
            })
            .collect::<Vec<_>>()
    });
    Ok(parts.concat())
}

/// `1/4 sum_{alpha != 0} |P_n^(alpha)|^2`, an upper bound on `tv^2`.
pub fn upper_bound(chain: &ChainSpec, n: u64) -> Result<f64> {
    upper_bound_with(chain, n, state_cap(), Exec::default())
}

pub fn upper_bound_with(chain: &ChainSpec, n: u64, cap: usize, exec: Exec) -> Result<f64> {
    let states = state_count(chain.modulus(), chain.dim(), cap)?;
    let kernel = Kernel::new(chain);
    let chunks = states.div_ceil(CHUNK);
    let partial = par::map_range(exec, chunks, |c| {
        let mut alpha = vec![0u64; kernel.k];
        let mut buf = vec![0.0; n as usize + 1];
        let mut sum = 0.0;
        for idx in (c * CHUNK).max(1)..((c + 1) * CHUNK).min(states) {
            decode(idx, kernel.p, &mut alpha);
            buf.fill(0.0);
            kernel.products(&alpha, n as usize, NEGLIGIBLE, &mut buf);
            sum += buf[n as usize];
        }
        sum
    });
    Ok(0.25 * partial.into_iter().sum::<f64>())
}

/// `1/2 |P_n^(alpha)|`, a lower bound on `tv` for `alpha != 0`.
pub fn lower_bound_at(chain: &ChainSpec, alpha: &FrequencyVector, n: u64) -> Result<f64> {
    if alpha.is_zero() {
        return Err(Error::ZeroFrequency);
    }
    Ok(0.5 * pn_hat_sq(chain, alpha, n)?.sqrt())
}

/// Best single-frequency lower bound and its witness, the lexicographically
/// first maximizer.
pub fn best_lower_bound(chain: &ChainSpec, n: u64, cap: usize, exec: Exec) -> Result<(f64, FrequencyVector)> {
    let spec = spectrum(chain, n, cap, exec)?;
    let p = chain.modulus();
    let k = chain.dim();
    let mut best: Option<(f64, Vec<u64>)> = None;
    let mut alpha = vec![0u64; k];
    for (idx, &v) in spec.iter().enumerate().skip(1) {
        decode(idx, p, &mut alpha);
        let better = match &best {
            None => true,
            Some((b, w)) => v > *b || (v == *b && alpha < *w),
        };
        if better {
            best = Some((v, alpha.clone()));
        }
    }
    let (v, w) = best.ok_or(Error::ZeroFrequency)?;
    Ok((0.5 * v.sqrt(), FrequencyVector { components: w, p }))
}

/// Closed-form lower bound from `cos x >= 1 - x^2 / 2` along the orbit of
/// `alpha` under `tA`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RhoCertificate {
    pub rho: f64,
    pub transpose_norm: f64,
    pub bound: f64,
}

/// `rho = 2 pi^2 k^2 ||alpha||^2 sum mu(h) mu(i) ||h - i||^2` and
/// `bound = 1/2 prod_{j<n} (1 - rho ||tA||^{2j} / p^2)^{1/2}`.
pub fn certificate_rho(chain: &ChainSpec, alpha: &FrequencyVector, n: u64) -> Result<RhoCertificate> {
    if alpha.is_zero() {
        return Err(Error::ZeroFrequency);
    }
    check_alpha(chain, alpha)?;
    let k = chain.dim() as f64;
    let a_norm = alpha.inf_norm() as f64;
    let rho = 2.0 * PI * PI * k * k * a_norm * a_norm * chain.increments().pair_spread();
    let norm = chain.matrix().transpose_inf_norm().to_f64().unwrap_or(f64::INFINITY);
    let p_sq = (chain.modulus() as f64).powi(2);
    let mut bound = 0.5;
    let mut growth = 1.0;
    for j in 0..n as usize {
        let factor = 1.0 - rho * growth / p_sq;
        if factor <= 0.0 {
            return Err(Error::FactorNonpositive { j, value: factor });
        }
        bound *= factor.sqrt();
        growth *= norm * norm;
    }
    Ok(RhoCertificate {
        rho,
        transpose_norm: norm,
        bound,
    })
}

/// Lower bound from a vector fixed by a power of `tA`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaCertificate {
    /// Smallest `l` with `tA^l alpha = alpha` for a nonzero integer `alpha`.
    pub l: u32,
    #[serde(serialize_with = "ser_big_vec")]
    pub alpha: Vec<BigInt>,
    pub gamma: f64,
    pub bound: f64,
}

fn ser_big_vec<S: serde::Serializer>(v: &[BigInt], s: S) -> std::result::Result<S::Ok, S::Error> {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().serialize(s)
}

impl GammaCertificate {
    /// `1/2 (1 - gamma / p^2)^{n/2}`
    pub fn bound_at(&self, p: u64, n: u64) -> f64 {
        0.5 * (1.0 - self.gamma / (p as f64).powi(2)).powf(n as f64 / 2.0)
    }

    pub fn frequency(&self, p: u64) -> FrequencyVector {
        FrequencyVector::from_integers(&self.alpha, p)
    }
}

/// Finds the smallest `l <= l_max` where `tA^l - I` has a rational kernel,
/// takes its first primitive kernel vector `alpha`, and evaluates
/// `gamma = 2 pi^2 k^2 ||alpha||^2 max_{i<l} ||tA||^{2i} sum mu(h) mu(i) ||h - i||^2`.
pub fn certificate_gamma(chain: &ChainSpec, l_max: u32, n: u64) -> Result<GammaCertificate> {
    let (l, alpha) = fixed_vector(chain.matrix(), l_max).ok_or(Error::NoTorsion { l_max })?;
    let a_norm = alpha.iter().map(|x| x.abs()).max().unwrap_or_default();
    let p = chain.modulus();
    if a_norm >= BigInt::from(p) {
        return Err(Error::InvalidArgument(format!(
            "p = {p} must exceed the fixed vector's max norm {a_norm}"
        )));
    }
    let a_norm = a_norm.to_f64().unwrap_or(f64::INFINITY);
    let k = chain.dim() as f64;
    let norm = chain.matrix().transpose_inf_norm().to_f64().unwrap_or(f64::INFINITY);
    let max_growth = (0..l).map(|i| norm.powi(2 * i as i32)).fold(0.0, f64::max);
    let gamma = 2.0 * PI * PI * k * k * a_norm * a_norm * max_growth * chain.increments().pair_spread();
    let p_sq = (p as f64).powi(2);
    if gamma >= p_sq {
        return Err(Error::GammaTooLarge { gamma, p_sq });
    }
    let cert = GammaCertificate {
        l,
        alpha,
        gamma,
        bound: 0.0,
    };
    let bound = cert.bound_at(p, n);
    Ok(GammaCertificate { bound, ..cert })
}

fn fixed_vector(a: &IntMatrix, l_max: u32) -> Option<(u32, Vec<BigInt>)> {
    let t = a.transpose();
    let k = a.dim();
    let mut power = IntMatrix::identity(k);
    for l in 1..=l_max {
        power = power.mul(&t);
        let kernel = integer_kernel(&power.sub(&IntMatrix::identity(k)));
        if let Some(v) = kernel.into_iter().next() {
            return Some((l, v));
        }
    }
    None
}

/// Fractional parts of `tA^j alpha / p`, from the exact integer vector.
pub fn xi_fractional(a: &IntMatrix, alpha: &FrequencyVector, j: u64) -> Vec<f64> {
    let v: Vec<BigInt> = alpha.components.iter().map(|&c| BigInt::from(c)).collect();
    let w = a.transpose().pow(j).mul_vec(&v);
    let pb = BigInt::from(alpha.p);
    w.iter()
        .map(|x| x.mod_floor(&pb).to_f64().unwrap_or(0.0) / alpha.p as f64)
        .collect()
}

/// First `j <= j_max` at which some component of `xi_fractional` lies in
/// `[delta, 1 - delta]`.
pub fn xi_escape(a: &IntMatrix, alpha: &FrequencyVector, delta: f64, j_max: u64) -> Option<u64> {
    let t = ModMatrix::from_int(&a.transpose(), alpha.p);
    let mut beta = alpha.components.clone();
    let mut next = vec![0u64; beta.len()];
    for j in 0..=j_max {
        let hit = beta.iter().any(|&c| {
            let x = c as f64 / alpha.p as f64;
            x >= delta && x <= 1.0 - delta
        });
        if hit {
            return Some(j);
        }
        t.apply(&beta, &mut next);
        std::mem::swap(&mut beta, &mut next);
    }
    None
}

/// Which closed-form certificate a bounds report carries.
#[derive(Debug, Clone, PartialEq)]
pub enum Certificate {
    None,
    Rho(FrequencyVector),
    Gamma(u32),
}

/// One row of the bounds table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub n: u64,
    pub tv: f64,
    /// Right side of the upper bound lemma, before the square root.
    pub upper: f64,
    pub lower_best: f64,
    pub alpha_witness: Vec<u64>,
    pub certificate: Option<f64>,
}

/// Bounds for `n = 0..=n_max`, with the exact `tv` from evolution.
pub fn bounds_series(
    chain: &ChainSpec,
    n_max: u64,
    certificate: &Certificate,
    cap: usize,
    exec: Exec,
) -> Result<Vec<BoundsReport>> {
    let states = state_count(chain.modulus(), chain.dim(), cap)?;
    let ev = Evolver::new(chain, cap, exec)?;
    let mut tvs = Vec::with_capacity(n_max as usize + 1);
    ev.run(chain, n_max, |_, d| tvs.push(tv_distance(d)));

    let kernel = Kernel::new(chain);
    let len = n_max as usize + 1;
    let p = chain.modulus();
    let k = chain.dim();
    // per chunk: (sums[n], best value and witness[n])
    let chunks = states.div_ceil(CHUNK);
    let parts = par::map_range(exec, chunks, |c| {
        let mut alpha = vec![0u64; k];
        let mut buf = vec![0.0; len];
        let mut sums = vec![0.0; len];
        let mut best: Vec<(f64, Vec<u64>)> = vec![(-1.0, Vec::new()); len];
        for idx in (c * CHUNK).max(1)..((c + 1) * CHUNK).min(states) {
            decode(idx, p, &mut alpha);
            buf.fill(0.0);
            kernel.products(&alpha, n_max as usize, 0.0, &mut buf);
            for (m, v) in buf.iter().enumerate() {
                sums[m] += v;
                if *v > best[m].0 || (*v == best[m].0 && alpha < best[m].1) {
                    best[m] = (*v, alpha.clone());
                }
            }
        }
        (sums, best)
    });

    let mut sums = vec![0.0; len];
    let mut best: Vec<(f64, Vec<u64>)> = vec![(-1.0, Vec::new()); len];
    for (s, b) in parts {
        for (m, (v, alpha)) in b.into_iter().enumerate() {
            sums[m] += s[m];
            if v < 0.0 {
                continue;
            }
            if v > best[m].0 || (v == best[m].0 && alpha < best[m].1) {
                best[m] = (v, alpha);
            }
        }
    }

    let gamma = match certificate {
        Certificate::Gamma(l_max) => Some(certificate_gamma(chain, *l_max, 0)?),
        _ => None,
    };
    (0..len)
        .map(|m| {
            let cert = match certificate {
                Certificate::None => None,
                Certificate::Rho(alpha) => certificate_rho(chain, alpha, m as u64).ok().map(|c| c.bound),
                Certificate::Gamma(_) => gamma.as_ref().map(|g| g.bound_at(p, m as u64)),
            };
            Ok(BoundsReport {
                n: m as u64,
                tv: tvs[m],
                upper: 0.25 * sums[m],
                lower_best: 0.5 * best[m].0.max(0.0).sqrt(),
                alpha_witness: best[m].1.clone(),
                certificate: cert,
            })
        })
        .collect()
}

/// CSV with header `n,tv,upper,lower_best,alpha_witness,certificate`.
/// The witness is written as `;`-separated components; a missing
/// certificate is an empty field.
pub fn write_bounds_csv<W: Write>(rows: &[BoundsReport], mut w: W) -> io::Result<()> {
    writeln!(w, "n,tv,upper,lower_best,alpha_witness,certificate")?;
    for r in rows {
        let witness: Vec<String> = r.alpha_witness.iter().map(|c| c.to_string()).collect();
        let cert = r.certificate.map(|c| c.to_string()).unwrap_or_default();
        writeln!(w, "{},{},{},{},{},{}", r.n, r.tv, r.upper, r.lower_best, witness.join(";"), cert)?;
    }
    Ok(())
}
