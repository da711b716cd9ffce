//! Task dispatch and report writing.

use std::fmt;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use affine_mixer::algebra::{classify_regime, lemma25_verify, minimal_poly, IdentityCheck};
use affine_mixer::digitlab::{block_census, block_length, write_census_csv, CensusReport};
use affine_mixer::evolution::{
    simulate_with, state_cap, tv_between, tv_distance, ChainSpec, Evolver, StateDistribution,
};
use affine_mixer::fourier::{bounds_series, write_bounds_csv, Certificate, FrequencyVector};
use affine_mixer::increments::{admissibility, support_basis};
use affine_mixer::par::Exec;
use affine_mixer::sweep::{fit_exponent, mixing_sweep, write_sweep_csv, SweepSettings};
use affine_mixer::Error;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{CertificateConfig, ExperimentConfig, Task};

const DEFAULT_J_MAX: usize = 10;

#[derive(Debug)]
pub enum RunError {
    Core(Error),
    Io { path: PathBuf, source: io::Error },
    /// The identity check ran but at least one case failed.
    IdentityViolation(String),
}

impl RunError {
    pub fn kind(&self) -> &'static str {
        match self {
            RunError::Core(e) => e.kind(),
            RunError::Io { .. } => "Io",
            RunError::IdentityViolation(_) => "IdentityViolation",
        }
    }

    /// The record printed on failure.
    pub fn record(&self) -> Value {
        json!({ "error": self.kind(), "message": self.to_string() })
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Core(e) => e.fmt(f),
            RunError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            RunError::IdentityViolation(m) => f.write_str(m),
        }
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Core(e)
    }
}

/// Adds the modulus to an error raised while working on it.
fn at_p(p: u64) -> impl Fn(Error) -> RunError {
    move |e| {
        let ctx = format!("p = {p}: {e}");
        RunError::Core(match e {
            Error::InvalidArgument(_) => Error::InvalidArgument(ctx),
            Error::DimensionMismatch(_) => Error::DimensionMismatch(ctx),
            Error::InvalidDistribution(_) => Error::InvalidDistribution(ctx),
            other => other,
        })
    }
}

/// Output directory; each file appears there fully written or not at all.
pub struct Reports {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Reports {
    pub fn new(dir: PathBuf) -> Result<Self, RunError> {
        fs::create_dir_all(&dir).map_err(|source| RunError::Io { path: dir.clone(), source })?;
        Ok(Self { dir, written: Vec::new() })
    }

    fn write(&mut self, name: &str, body: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), RunError> {
        let path = self.dir.join(name);
        let io_err = |source| RunError::Io { path: path.clone(), source };
        let tmp = tempfile::NamedTempFile::new_in(&self.dir).map_err(io_err)?;
        let mut w = BufWriter::new(tmp);
        body(&mut w).map_err(io_err)?;
        let tmp = w.into_inner().map_err(|e| io_err(e.into_error()))?;
        tmp.persist(&path).map_err(|e| io_err(e.error))?;
        self.written.push(path);
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), RunError> {
        self.write(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            writeln!(w)
        })
    }
}

/// Runs `task` and writes its reports under the configured output directory.
pub fn run(task: Task, cfg: &ExperimentConfig) -> Result<Vec<PathBuf>, RunError> {
    cfg.validate(task)?;
    let mut out = Reports::new(cfg.output_dir())?;
    match task {
        Task::Classify => classify(cfg, &mut out)?,
        Task::Evolve => evolve(cfg, &mut out)?,
        Task::Bounds => bounds(cfg, &mut out)?,
        Task::MixingSweep => sweep(cfg, &mut out)?,
        Task::DigitCensus => census(cfg, &mut out)?,
        Task::VerifyIdentities => identities(cfg, &mut out)?,
    }
    Ok(out.written)
}

fn chain(cfg: &ExperimentConfig, p: u64) -> Result<ChainSpec, RunError> {
    let a = cfg.matrix()?.clone();
    let k = a.dim();
    ChainSpec::with_start(a, cfg.increments()?.clone(), p, cfg.start(p, k)).map_err(at_p(p))
}

fn classify(cfg: &ExperimentConfig, out: &mut Reports) -> Result<(), RunError> {
    let a = cfg.matrix()?;
    let profile = classify_regime(a, cfg.l_max())?;
    let mut report = json!({
        "matrix": a,
        "regime": profile.regime.label(),
        "common_power": profile.common_power(),
        "profile": profile,
    });
    if let (Some(mu), Some(ps)) = (&cfg.increments, &cfg.p) {
        let basis = support_basis(mu, a)?;
        let rows: Vec<Value> = ps
            .iter()
            .map(|&p| {
                let adm = admissibility(a, &basis, p);
                json!({ "p": p, "admissible": adm.ok(), "reason": adm.reason() })
            })
            .collect();
        report["admissibility"] = Value::Array(rows);
    }
    out.json("classify.json", &report)
}

fn write_tv_csv(w: &mut dyn Write, tv: &[f64]) -> io::Result<()> {
    writeln!(w, "n,tv")?;
    for (n, t) in tv.iter().enumerate() {
        writeln!(w, "{n},{t}")?;
    }
    Ok(())
}

fn evolve(cfg: &ExperimentConfig, out: &mut Reports) -> Result<(), RunError> {
    let n = cfg.steps()?;
    let cap = state_cap();
    let mut summary = Vec::new();
    for &p in cfg.moduli()? {
        let chain = chain(cfg, p)?;
        let ev = Evolver::new(&chain, cap, Exec::Parallel).map_err(at_p(p))?;
        let mut tv = Vec::with_capacity(n as usize + 1);
        let dist = ev.run(&chain, n, |_, d| tv.push(tv_distance(d)));
        out.write(&format!("distribution_p{p}.csv"), |w| dist.write_csv(w))?;
        out.write(&format!("tv_p{p}.csv"), |w| write_tv_csv(w, &tv))?;
        let mut row = json!({ "p": p, "n": n, "tv": tv[n as usize], "total": dist.total() });
        if let Some(trials) = cfg.trials {
            let seed = cfg.seed();
            let emp: StateDistribution = simulate_with(&chain, n, trials, seed, cap, Exec::Parallel).map_err(at_p(p))?;
            out.write(&format!("empirical_p{p}.csv"), |w| emp.write_csv(w))?;
            row["simulation"] = json!({
                "trials": trials,
                "seed": seed,
                "tv": tv_distance(&emp),
                "tv_to_exact": tv_between(&emp, &dist),
            });
        }
        summary.push(row);
    }
    out.json("evolve.json", &summary)
}

fn bounds(cfg: &ExperimentConfig, out: &mut Reports) -> Result<(), RunError> {
    let n = cfg.steps()?;
    for &p in cfg.moduli()? {
        let chain = chain(cfg, p)?;
        let cert = match &cfg.certificate {
            CertificateConfig::None => Certificate::None,
            CertificateConfig::Rho { alpha } => {
                if alpha.len() != chain.dim() {
                    return Err(Error::ConfigInvalid(format!(
                        "certificate alpha has {} entries, expected {}",
                        alpha.len(),
                        chain.dim()
                    ))
                    .into());
                }
                let comps = alpha.iter().map(|c| c.rem_euclid(p as i64) as u64).collect();
                Certificate::Rho(FrequencyVector::new(comps, p).map_err(at_p(p))?)
            }
            CertificateConfig::Gamma => Certificate::Gamma(cfg.l_max()),
        };
        let rows = bounds_series(&chain, n, &cert, state_cap(), Exec::Parallel).map_err(at_p(p))?;
        out.write(&format!("bounds_p{p}.csv"), |w| write_bounds_csv(&rows, w))?;
    }
    Ok(())
}

fn sweep(cfg: &ExperimentConfig, out: &mut Reports) -> Result<(), RunError> {
    let settings = SweepSettings {
        eps: cfg.eps(),
        n_cap: cfg.n_cap(),
        l_max: cfg.l_max(),
        state_cap: state_cap(),
        exec: Exec::Parallel,
    };
    let rows = mixing_sweep(cfg.matrix()?, cfg.increments()?, cfg.moduli()?, &settings)?;
    out.write("sweep.csv", |w| write_sweep_csv(&rows, w))?;
    let fits: Vec<Value> = cfg
        .models()
        .into_iter()
        .map(|m| match fit_exponent(&rows, m) {
            Ok(fit) => json!(fit),
            Err(e) => json!({ "model": m, "error": e.kind(), "message": e.to_string() }),
        })
        .collect();
    out.json("fits.json", &json!({ "eps": settings.eps, "fits": fits }))
}

fn census(cfg: &ExperimentConfig, out: &mut Reports) -> Result<(), RunError> {
    let sigma = cfg.sigma();
    let r = cfg.r.unwrap_or(1);
    let mut reports: Vec<CensusReport> = Vec::new();
    for &p in cfg.moduli()? {
        let t = cfg.t.unwrap_or_else(|| block_length(p, sigma));
        let rep = block_census(p, sigma, t, r, Exec::Parallel).map_err(at_p(p))?;
        out.write(&format!("census_p{p}.csv"), |w| write_census_csv(&rep, w))?;
        reports.push(rep);
    }
    out.json("census.json", &reports)
}

#[derive(Serialize)]
struct IdentityCase {
    order: Vec<usize>,
    e: usize,
    j: usize,
    #[serde(flatten)]
    check: IdentityCheck,
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for item in 0..k {
        out = out
            .into_iter()
            .flat_map(|perm: Vec<usize>| {
                (0..=perm.len()).map(move |pos| {
                    let mut v = perm.clone();
                    v.insert(pos, item);
                    v
                })
            })
            .collect();
    }
    out.sort();
    out
}

fn identities(cfg: &ExperimentConfig, out: &mut Reports) -> Result<(), RunError> {
    let a = cfg.matrix()?;
    let d = minimal_poly(a).degree();
    let j_max = cfg.j_max.unwrap_or(DEFAULT_J_MAX);
    let mut cases = Vec::new();
    for order in permutations(a.dim()) {
        for e in 0..=d {
            for j in 0..=j_max {
                let check = lemma25_verify(a, &order, e, j)?;
                cases.push(IdentityCase { order: order.clone(), e, j, check });
            }
        }
    }
    let failures = cases.iter().filter(|c| !c.check.holds()).count();
    out.json(
        "identities.json",
        &json!({ "matrix": a, "d": d, "all_hold": failures == 0, "cases": cases }),
    )?;
    if failures > 0 {
        return Err(RunError::IdentityViolation(format!(
            "{failures} of {} cases failed; see identities.json",
            cases.len()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutations_are_complete() {
        assert_eq!(permutations(1), vec![vec![0]]);
        assert_eq!(permutations(2), vec![vec![0, 1], vec![1, 0]]);
        let p3 = permutations(3);
        assert_eq!(p3.len(), 6);
        assert!(p3.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn errors_carry_modulus() {
        let e = at_p(7)(Error::InvalidArgument("bad".into()));
        assert_eq!(e.kind(), "InvalidArgument");
        assert!(e.to_string().contains("p = 7"));
        assert_eq!(at_p(7)(Error::SingularMatrix).kind(), "SingularMatrix");
    }

    #[test]
    fn record_shape() {
        let r = RunError::Core(Error::SingularMatrix).record();
        assert_eq!(r["error"], "SingularMatrix");
        assert!(r["message"].is_string());
    }
}
