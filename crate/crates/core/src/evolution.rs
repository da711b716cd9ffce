//! Exact evolution of the law of `X_n` on `Z_p^k`.
//!
//! States are indexed little-endian: `x -> sum_i x_i p^i`.

use std::io::{self, Write};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::{det_int, IntMatrix, ModMatrix};
use crate::error::{Error, Result};
use crate::increments::IncrementDistribution;
use crate::par::{self, Exec};

/// Default limit on `p^k`.
pub const DEFAULT_STATE_CAP: usize = 4_000_000;

/// Environment variable overriding [`DEFAULT_STATE_CAP`].
pub const STATE_CAP_ENV: &str = "AFFINE_MIXER_STATE_CAP";

/// The state cap in effect: the environment override if it parses, else the default.
pub fn state_cap() -> usize {
    std::env::var(STATE_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_STATE_CAP)
}

/// `p^k`, or `StateSpaceTooLarge` when it exceeds `cap`.
pub fn state_count(p: u64, k: usize, cap: usize) -> Result<usize> {
    let states = (p as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if states > cap as u128 {
        return Err(Error::StateSpaceTooLarge { states, cap });
    }
    Ok(states as usize)
}

/// One instance of the recursion `X_{n+1} = A X_n + B_n (mod p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSpec {
    a: IntMatrix,
    mu: IncrementDistribution,
    p: u64,
    x0: Vec<u64>,
    a_mod: ModMatrix,
}

impl ChainSpec {
    /// Starts from `0`.
    pub fn new(a: IntMatrix, mu: IncrementDistribution, p: u64) -> Result<Self> {
        let k = a.dim();
        Self::with_start(a, mu, p, vec![0; k])
    }

    /// `x0` is reduced mod `p`.
    pub fn with_start(a: IntMatrix, mu: IncrementDistribution, p: u64, x0: Vec<u64>) -> Result<Self> {
        if p < 2 {
            return Err(Error::InvalidArgument(format!("modulus {p} is below 2")));
        }
        let k = a.dim();
        if mu.dim() != k || x0.len() != k {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {k}x{k}, increments have dimension {}, start has {}",
                mu.dim(),
                x0.len()
            )));
        }
        let g = det_int(&a).gcd(&BigInt::from(p)).to_u64().unwrap_or(0);
        if g != 1 {
            return Err(Error::ModulusNotCoprime { p, gcd: g });
        }
        let a_mod = ModMatrix::from_int(&a, p);
        let x0 = x0.into_iter().map(|c| c % p).collect();
        Ok(Self { a, mu, p, x0, a_mod })
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.a
    }

    pub fn increments(&self) -> &IncrementDistribution {
        &self.mu
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn start(&self) -> &[u64] {
        &self.x0
    }

    pub fn matrix_mod(&self) -> &ModMatrix {
        &self.a_mod
    }
}

/// Dense probability vector over `Z_p^k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateDistribution {
    p: u64,
    k: usize,
    values: Vec<f64>,
}

impl StateDistribution {
    /// Builds from raw values; entries above `-1e-15` but negative are
    /// clamped to 0.
    pub fn from_values(p: u64, k: usize, mut values: Vec<f64>) -> Result<Self> {
        let n = state_count(p, k, usize::MAX)?;
        if values.len() != n {
            return Err(Error::DimensionMismatch(format!("{} values for {n} states", values.len())));
        }
        for v in values.iter_mut() {
            if *v < -1e-15 || !v.is_finite() {
                return Err(Error::InvalidArgument(format!("negative probability {v}")));
            }
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let total: f64 = values.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!("probabilities sum to {total}")));
        }
        Ok(Self { p, k, values })
    }

    pub fn delta(p: u64, x: &[u64]) -> Self {
        let k = x.len();
        let n = (p as usize).pow(k as u32);
        let mut values = vec![0.0; n];
        values[encode(x, p)] = 1.0;
        Self { p, k, values }
    }

    pub fn uniform(p: u64, k: usize) -> Self {
        let n = (p as usize).pow(k as u32);
        Self {
            p,
            k,
            values: vec![1.0 / n as f64; n],
        }
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, x: &[u64]) -> f64 {
        self.values[encode(x, self.p)]
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// CSV with header `index,probability`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "index,probability")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(w, "{i},{v}")?;
        }
        Ok(())
    }
}

/// Little-endian mixed-radix index of `x`.
pub fn encode(x: &[u64], p: u64) -> usize {
    x.iter().rev().fold(0usize, |acc, &c| acc * p as usize + c as usize)
}

/// Inverse of [`encode`].
pub fn decode(mut idx: usize, p: u64, out: &mut [u64]) {
    for c in out.iter_mut() {
        *c = (idx % p as usize) as u64;
        idx /= p as usize;
    }
}

/// `mu_p(r) = sum_{b = r mod p} mu(b)`
pub fn reduce_increments(mu: &IncrementDistribution, p: u64) -> StateDistribution {
    let k = mu.dim();
    let n = (p as usize).pow(k as u32);
    let mut values = vec![0.0; n];
    let mut r = vec![0u64; k];
    for (b, w) in mu.iter() {
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri = bi.rem_euclid(p as i64) as u64;
        }
        values[encode(&r, p)] += w;
    }
    StateDistribution { p, k, values }
}

/// Precomputed tables for repeated exact steps of one chain.
#[derive(Debug, Clone)]
pub struct Evolver {
    p: u64,
    k: usize,
    states: usize,
    /// `inverse[x]` is the index of `A^{-1} x`.
    inverse: Vec<u32>,
    /// Reduced increments: residue coordinates and mass.
    residues: Vec<(Vec<u64>, f64)>,
    exec: Exec,
}

impl Evolver {
    pub fn new(chain: &ChainSpec, cap: usize, exec: Exec) -> Result<Self> {
        let p = chain.modulus();
        let k = chain.dim();
        let states = state_count(p, k, cap.min(u32::MAX as usize))?;
        let a = chain.matrix_mod();
        let mut inverse = vec![0u32; states];
        let mut x = vec![0u64; k];
        let mut y = vec![0u64; k];
        for idx in 0..states {
            decode(idx, p, &mut x);
            a.apply(&x, &mut y);
            inverse[encode(&y, p)] = idx as u32;
        }
        let reduced = reduce_increments(chain.increments(), p);
        let residues = reduced
            .values
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > 0.0)
            .map(|(i, w)| {
                let mut r = vec![0u64; k];
                decode(i, p, &mut r);
                (r, *w)
            })
            .collect();
        Ok(Self {
            p,
            k,
            states,
            inverse,
            residues,
            exec,
        })
    }

    pub fn start(&self, chain: &ChainSpec) -> StateDistribution {
        StateDistribution::delta(self.p, chain.start())
    }

    /// `P'(x) = sum_r mu_p(r) P(A^{-1}(x - r))`
    pub fn step(&self, dist: &StateDistribution) -> StateDistribution {
        assert_eq!(dist.values.len(), self.states, "distribution does not match the chain");
        let p = self.p;
        let k = self.k;
        let src = &dist.values;
        let mut out = vec![0.0; self.states];
        par::fill(self.exec, &mut out, |x_idx| {
            let mut acc = 0.0;
            for (r, w) in &self.residues {
                let mut idx = 0usize;
                let mut rest = x_idx;
                let mut stride = 1usize;
                for &ri in r.iter().take(k) {
                    let xi = (rest % p as usize) as u64;
                    rest /= p as usize;
                    let di = if xi >= ri { xi - ri } else { xi + p - ri };
                    idx += di as usize * stride;
                    stride *= p as usize;
                }
                acc += w * src[self.inverse[idx] as usize];
            }
            acc
        });
        StateDistribution {
            p,
            k,
            values: out,
        }
    }

    /// Distributions `P_0..=P_n`, passed to `visit` in order.
    pub fn run(&self, chain: &ChainSpec, n: u64, mut visit: impl FnMut(u64, &StateDistribution)) -> StateDistribution {
        let mut cur = self.start(chain);
        visit(0, &cur);
        for step in 1..=n {
            cur = self.step(&cur);
            visit(step, &cur);
        }
        cur
    }
}

/// One exact step of the chain from `dist`.
pub fn step_exact(dist: &StateDistribution, chain: &ChainSpec) -> Result<StateDistribution> {
    Ok(Evolver::new(chain, usize::MAX, Exec::default())?.step(dist))
}

/// Law of `X_n` started from the chain's `x0`.
pub fn evolve(chain: &ChainSpec, n: u64) -> Result<StateDistribution> {
    evolve_with(chain, n, state_cap(), Exec::default())
}

pub fn evolve_with(chain: &ChainSpec, n: u64, cap: usize, exec: Exec) -> Result<StateDistribution> {
    let ev = Evolver::new(chain, cap, exec)?;
    Ok(ev.run(chain, n, |_, _| {}))
}

/// `1/2 sum_x |P(x) - p^{-k}|`
pub fn tv_distance(dist: &StateDistribution) -> f64 {
    let u = 1.0 / dist.values.len() as f64;
    0.5 * dist.values.iter().map(|v| (v - u).abs()).sum::<f64>()
}

/// Total variation between two laws on the same space.
pub fn tv_between(a: &StateDistribution, b: &StateDistribution) -> f64 {
    assert_eq!(a.values.len(), b.values.len(), "distributions live on different spaces");
    0.5 * a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Empirical law of `X_n` over `trials` independent trajectories.
///
/// Trajectory `t` draws from ChaCha8 seeded with `seed` on stream `t`, one
/// `f64` in `[0, 1)` per step, inverted through the cumulative table of the
/// increment support (in the order given). The result depends only on
/// `(chain, n, trials, seed)`, not on thread count.
pub fn simulate(chain: &ChainSpec, n: u64, trials: u64, seed: u64) -> Result<StateDistribution> {
    simulate_with(chain, n, trials, seed, state_cap(), Exec::default())
}

pub fn simulate_with(
    chain: &ChainSpec,
    n: u64,
    trials: u64,
    seed: u64,
    cap: usize,
    exec: Exec,
) -> Result<StateDistribution> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let p = chain.modulus();
    let k = chain.dim();
    let states = state_count(p, k, cap)?;
    let mu = chain.increments();
    let mut cumulative = Vec::with_capacity(mu.probs().len());
    let mut acc = 0.0;
    for w in mu.probs() {
        acc += w;
        cumulative.push(acc);
    }
    let increments: Vec<Vec<u64>> = mu
        .support()
        .iter()
        .map(|b| b.iter().map(|c| c.rem_euclid(p as i64) as u64).collect())
        .collect();
    let a = chain.matrix_mod();

    let finals = par::map_range(exec, trials as usize, |t| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(t as u64);
        let mut x = chain.start().to_vec();
        let mut y = vec![0u64; k];
        for _ in 0..n {
            let u: f64 = rng.gen();
            let pick = cumulative.partition_point(|c| *c <= u).min(increments.len() - 1);
            a.apply(&x, &mut y);
            for ((xi, yi), bi) in x.iter_mut().zip(&y).zip(&increments[pick]) {
                *xi = (yi + bi) % p;
            }
        }
        encode(&x, p)
    });
    let mut counts = vec![0u64; states];
    for i in finals {
        counts[i] += 1;
    }
    let values = counts.into_iter().map(|c| c as f64 / trials as f64).collect();
    Ok(StateDistribution { p, k, values })
}

/// First crossing of a total-variation threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum MixingTime {
    Mixed(u64),
    /// The cap was reached; `tv` is the distance at `n_cap`.
    Unmixed { n_cap: u64, tv: f64 },
}

impl MixingTime {
    pub fn steps(self) -> Option<u64> {
        match self {
            MixingTime::Mixed(n) => Some(n),
            MixingTime::Unmixed { .. } => None,
        }
    }
}

/// Smallest `n <= n_cap` with `tv(P_n) <= eps`.
pub fn mixing_time(chain: &ChainSpec, eps: f64, n_cap: u64) -> Result<MixingTime> {
    mixing_time_with(chain, eps, n_cap, state_cap(), Exec::default())
}

pub fn mixing_time_with(chain: &ChainSpec, eps: f64, n_cap: u64, cap: usize, exec: Exec) -> Result<MixingTime> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("eps = {eps} is not in (0, 1)")));
    }
    let ev = Evolver::new(chain, cap, exec)?;
    let mut cur = ev.start(chain);
    let mut tv = tv_distance(&cur);
    if tv <= eps {
        return Ok(MixingTime::Mixed(0));
    }
    for n in 1..=n_cap {
        cur = ev.step(&cur);
        tv = tv_distance(&cur);
        if tv <= eps {
            return Ok(MixingTime::Mixed(n));
        }
    }
    Ok(MixingTime::Unmixed { n_cap, tv })
}

/// `tv(P_0), ..., tv(P_n)`.
pub fn tv_trajectory(chain: &ChainSpec, n: u64, cap: usize, exec: Exec) -> Result<Vec<f64>> {
    let ev = Evolver::new(chain, cap, exec)?;
    let mut out = Vec::with_capacity(n as usize + 1);
    ev.run(chain, n, |_, d| out.push(tv_distance(d)));
    Ok(out)
}
