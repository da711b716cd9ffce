//! Mixing-time sweeps over moduli and least-squares rate fits.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::algebra::{classify_regime, IntMatrix};
use crate::error::{Error, Result};
use crate::evolution::{mixing_time_with, ChainSpec, MixingTime};
use crate::increments::{admissibility, support_basis, IncrementDistribution};
use crate::par::{self, Exec};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub p: u64,
    pub regime: String,
    pub n_mix: Option<u64>,
    pub ln_p: f64,
    pub ln_p_lnln_p: f64,
    pub p_sq: f64,
    pub admissible: bool,
    /// Why the row has no mixing time: failed gcd conditions, an error, or
    /// the step cap.
    pub reason: String,
}

/// Settings shared by every modulus in a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSettings {
    pub eps: f64,
    pub n_cap: u64,
    pub l_max: u32,
    pub state_cap: usize,
    pub exec: Exec,
}

/// Mixing time at every admissible modulus in `moduli`.
///
/// Inadmissible moduli get a row with the failed gcd condition; errors at a
/// single modulus are recorded in its row and the sweep continues.
pub fn mixing_sweep(
    a: &IntMatrix,
    mu: &IncrementDistribution,
    moduli: &[u64],
    settings: &SweepSettings,
) -> Result<Vec<SweepRow>> {
    let profile = classify_regime(a, settings.l_max)?;
    let basis = support_basis(mu, a)?;
    let admissible: Vec<bool> = moduli
        .iter()
        .map(|&p| p >= 2 && admissibility(a, &basis, p).ok())
        .collect();
    if !admissible.iter().any(|x| *x) {
        return Err(Error::ConfigInvalid(format!("no admissible modulus in {moduli:?}")));
    }
    let regime = profile.regime.label().to_string();
    let rows = par::map_slice(settings.exec, moduli, |&p| {
        let lp = (p as f64).ln();
        let mut row = SweepRow {
            p,
            regime: regime.clone(),
            n_mix: None,
            ln_p: lp,
            ln_p_lnln_p: lp * lp.ln(),
            p_sq: (p as f64).powi(2),
            admissible: false,
            reason: String::new(),
        };
        if p < 2 {
            row.reason = "modulus below 2".into();
            return row;
        }
        let adm = admissibility(a, &basis, p);
        if !adm.ok() {
            row.reason = adm.reason();
            return row;
        }
        row.admissible = true;
        let outcome = ChainSpec::new(a.clone(), mu.clone(), p)
            .and_then(|c| mixing_time_with(&c, settings.eps, settings.n_cap, settings.state_cap, settings.exec));
        match outcome {
            Ok(MixingTime::Mixed(n)) => row.n_mix = Some(n),
            Ok(MixingTime::Unmixed { n_cap, tv }) => row.reason = format!("unmixed after {n_cap} steps (tv {tv})"),
            Err(e) => row.reason = format!("{}: {e}", e.kind()),
        }
        row
    });
    Ok(rows)
}

/// CSV with header `p,regime,n_mix,ln_p,ln_p_lnln_p,p_sq,admissible,reason`.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut w: W) -> io::Result<()> {
    writeln!(w, "p,regime,n_mix,ln_p,ln_p_lnln_p,p_sq,admissible,reason")?;
    for r in rows {
        let n = r.n_mix.map(|n| n.to_string()).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.p,
            r.regime,
            n,
            r.ln_p,
            r.ln_p_lnln_p,
            r.p_sq,
            r.admissible,
            r.reason.replace(',', ";")
        )?;
    }
    Ok(())
}

/// Growth model for `n_mix` as a function of `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateModel {
    /// `ln n = slope * ln p + intercept`
    PowP,
    /// `n = c * ln p`
    Log,
    /// `n = c * (ln p)^2`
    LogSquared,
    /// `n = c * ln p * ln ln p`
    Loglog,
}

impl RateModel {
    pub const ALL: [RateModel; 4] = [RateModel::PowP, RateModel::Log, RateModel::LogSquared, RateModel::Loglog];

    fn regressor(self, p: f64) -> f64 {
        let l = p.ln();
        match self {
            RateModel::PowP => l,
            RateModel::Log => l,
            RateModel::LogSquared => l * l,
            RateModel::Loglog => l * l.ln(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fit {
    pub model: RateModel,
    /// Slope for `PowP`; proportionality constant otherwise.
    pub coefficient: f64,
    /// Zero except for `PowP`.
    pub intercept: f64,
    /// Root-mean-square residual, in log space for `PowP`.
    pub rms_residual: f64,
    pub points: usize,
}

/// Least-squares fit over the rows that have a mixing time.
pub fn fit_exponent(rows: &[SweepRow], model: RateModel) -> Result<Fit> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.n_mix.map(|n| (r.p as f64, n as f64)))
        .collect();
    fit_series(&pts, model)
}

/// Fit over raw `(p, n)` pairs; points with `n <= 0` or a nonpositive
/// regressor are skipped.
pub fn fit_series(points: &[(f64, f64)], model: RateModel) -> Result<Fit> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|(p, n)| *n > 0.0 && model.regressor(*p) > 0.0)
        .map(|(p, n)| match model {
            RateModel::PowP => (p.ln(), n.ln()),
            _ => (model.regressor(p), n),
        })
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientData { needed: 3, got: pts.len() });
    }
    let count = pts.len() as f64;
    let (coefficient, intercept) = match model {
        RateModel::PowP => {
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / count;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / count;
            let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
            let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
            if sxx == 0.0 {
                return Err(Error::InsufficientData { needed: 2, got: 1 });
            }
            let slope = sxy / sxx;
            (slope, my - slope * mx)
        }
        _ => {
            let sxy: f64 = pts.iter().map(|(x, y)| x * y).sum();
            let sxx: f64 = pts.iter().map(|(x, _)| x * x).sum();
            (sxy / sxx, 0.0)
        }
    };
    let sse: f64 = pts
        .iter()
        .map(|(x, y)| (y - coefficient * x - intercept).powi(2))
        .sum();
    Ok(Fit {
        model,
        coefficient,
        intercept,
        rms_residual: (sse / count).sqrt(),
        points: pts.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::DEFAULT_STATE_CAP;

    fn synthetic(ps: &[u64], f: impl Fn(f64) -> f64) -> Vec<SweepRow> {
        ps.iter()
            .map(|&p| SweepRow {
                p,
                regime: "x".into(),
                n_mix: Some(f(p as f64).round() as u64),
                ln_p: 0.0,
                ln_p_lnln_p: 0.0,
                p_sq: 0.0,
                admissible: true,
                reason: String::new(),
            })
            .collect()
    }

    fn settings(eps: f64) -> SweepSettings {
        SweepSettings {
            eps,
            n_cap: 100_000,
            l_max: 24,
            state_cap: DEFAULT_STATE_CAP,
            exec: Exec::Parallel,
        }
    }

    #[test]
    fn fit_exact_power() {
        let rows = synthetic(&[3, 5, 7, 11, 13, 101], |p| p * p);
        let fit = fit_exponent(&rows, RateModel::PowP).unwrap();
        assert!((fit.coefficient - 2.0).abs() < 1e-9);
        assert!(fit.rms_residual < 1e-9);
    }

    #[test]
    fn fit_exact_log() {
        let pts: Vec<(f64, f64)> = [3.0f64, 5.0, 7.0, 11.0, 101.0].iter().map(|&p| (p, 7.0 * p.ln())).collect();
        let fit = fit_series(&pts, RateModel::Log).unwrap();
        assert!((fit.coefficient - 7.0).abs() < 1e-9);
        assert!(fit.rms_residual < 1e-9);
        let pts: Vec<(f64, f64)> = [5.0f64, 50.0, 500.0].iter().map(|&p| (p, 0.5 * p.ln() * p.ln().ln())).collect();
        assert!((fit_series(&pts, RateModel::Loglog).unwrap().coefficient - 0.5).abs() < 1e-9);
    }

    #[test]
    fn fit_needs_three_points() {
        let rows = synthetic(&[3, 5], |p| p);
        assert_eq!(
            fit_exponent(&rows, RateModel::PowP).unwrap_err(),
            Error::InsufficientData { needed: 3, got: 2 }
        );
    }

    #[test]
    fn lazy_walk_sweep_increases() {
        let a = IntMatrix::from_rows(&[[1]]).unwrap();
        let mu = IncrementDistribution::uniform(1, vec![vec![0], vec![1]]).unwrap();
        let rows = mixing_sweep(&a, &mu, &[5, 7, 9], &settings(0.25)).unwrap();
        let n: Vec<u64> = rows.iter().map(|r| r.n_mix.unwrap()).collect();
        assert!(n.windows(2).all(|w| w[0] < w[1]), "{n:?}");
        assert!(rows.iter().all(|r| r.regime == "UnitRootTorsion"));
    }

    #[test]
    fn inadmissible_rows_carry_reason() {
        let a = IntMatrix::from_rows(&[[0, 1], [2, 0]]).unwrap();
        let mu = IncrementDistribution::uniform(2, vec![vec![0, 0], vec![1, 0]]).unwrap();
        let rows = mixing_sweep(&a, &mu, &[2, 3, 5], &settings(0.25)).unwrap();
        assert!(!rows[0].admissible);
        assert_eq!(rows[0].n_mix, None);
        assert_eq!(rows[0].reason, "gcd(det A, p) = 2; gcd(det B, p) = 2");
        assert!(rows[1].admissible && rows[1].n_mix.is_some());

        assert!(matches!(mixing_sweep(&a, &mu, &[2, 4], &settings(0.25)), Err(Error::ConfigInvalid(_))));
        assert!(matches!(mixing_sweep(&a, &mu, &[], &settings(0.25)), Err(Error::ConfigInvalid(_))));
    }

    #[test]
    fn per_modulus_errors_recorded() {
        let a = IntMatrix::from_rows(&[[1]]).unwrap();
        let mu = IncrementDistribution::uniform(1, vec![vec![0], vec![1]]).unwrap();
        let mut s = settings(0.25);
        s.state_cap = 10;
        s.n_cap = 3;
        let rows = mixing_sweep(&a, &mu, &[5, 11], &s).unwrap();
        assert!(rows[0].reason.starts_with("unmixed after 3 steps"));
        assert!(rows[1].reason.starts_with("StateSpaceTooLarge"));
    }
}
