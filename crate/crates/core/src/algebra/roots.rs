//! Complex roots of integer polynomials.
//!
//! The polynomial is first split into square-free parts (exactly, over the
//! rationals). Degrees one and two use closed forms; higher-degree parts use
//! Aberth-Ehrlich simultaneous iteration followed by Newton polishing.

use num_complex::Complex64;

use super::poly::{rational, IntPolynomial};
use crate::error::{Error, Result};

const RESIDUAL_TOL: f64 = 1e-9;
const MAX_ITER: usize = 2000;

/// All complex roots with multiplicity, sorted by descending real part and
/// then descending imaginary part.
pub fn eigenvalues(poly: &IntPolynomial) -> Result<Vec<Complex64>> {
    if poly.is_zero() {
        return Err(Error::InvalidArgument("zero polynomial has no finite root set".into()));
    }
    let parts = rational::square_free(&rational::from_int(poly));
    let mut roots = Vec::with_capacity(poly.degree());
    for (part, mult) in parts {
        let part = rational::to_integer_primitive(&part);
        let r = square_free_roots(&part.to_f64())?;
        for z in r {
            roots.extend(std::iter::repeat_n(z, mult));
        }
    }
    sort_roots(&mut roots);

    let coeffs = poly.to_f64();
    for z in &roots {
        let (value, scale) = eval_with_scale(&coeffs, *z);
        if value.norm() > RESIDUAL_TOL * scale {
            return Err(Error::NonConvergence(format!(
                "root {z} of {poly} has residual {:.3e} (scale {scale:.3e})",
                value.norm()
            )));
        }
    }
    Ok(roots)
}

pub(crate) fn sort_roots(roots: &mut [Complex64]) {
    roots.sort_by(|a, b| {
        b.re.partial_cmp(&a.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(b.im.partial_cmp(&a.im).unwrap_or(std::cmp::Ordering::Equal))
    });
}

/// `(p(z), sum |c_i| |z|^i)`
fn eval_with_scale(coeffs: &[f64], z: Complex64) -> (Complex64, f64) {
    let r = z.norm();
    let mut v = Complex64::new(0.0, 0.0);
    let mut s = 0.0;
    for &c in coeffs.iter().rev() {
        v = v * z + c;
        s = s * r + c.abs();
    }
    (v, s)
}

fn eval_with_derivative(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut v = Complex64::new(0.0, 0.0);
    let mut d = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        d = d * z + v;
        v = v * z + c;
    }
    (v, d)
}

fn square_free_roots(coeffs: &[f64]) -> Result<Vec<Complex64>> {
    let n = coeffs.len() - 1;
    match n {
        0 => Ok(vec![]),
        1 => Ok(vec![Complex64::new(-coeffs[0] / coeffs[1], 0.0)]),
        2 => Ok(quadratic_roots(coeffs[2], coeffs[1], coeffs[0]).to_vec()),
        _ => aberth(coeffs),
    }
}

/// Roots of `a x^2 + b x + c` using the cancellation-free form.
fn quadratic_roots(a: f64, b: f64, c: f64) -> [Complex64; 2] {
    let disc = b * b - 4.0 * a * c;
    if disc >= 0.0 {
        let s = disc.sqrt();
        let q = -0.5 * (b + b.signum() * s);
        if q == 0.0 {
            return [Complex64::new(0.0, 0.0); 2];
        }
        [Complex64::new(q / a, 0.0), Complex64::new(c / q, 0.0)]
    } else {
        let re = -b / (2.0 * a);
        let im = (-disc).sqrt() / (2.0 * a.abs());
        [Complex64::new(re, im), Complex64::new(re, -im)]
    }
}

fn aberth(coeffs: &[f64]) -> Result<Vec<Complex64>> {
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    let monic: Vec<f64> = coeffs.iter().map(|c| c / lead).collect();
    // Fujiwara-style radius for the starting circle
    let radius = (0..n)
        .map(|i| monic[i].abs().powf(1.0 / (n - i) as f64))
        .fold(0.0f64, f64::max)
        .max(1e-3);
    let mut z: Vec<Complex64> = (0..n)
        .map(|i| {
            let theta = 2.0 * std::f64::consts::PI * i as f64 / n as f64 + 0.4;
            Complex64::from_polar(radius, theta)
        })
        .collect();

    let mut converged = false;
    for _ in 0..MAX_ITER {
        let mut max_step = 0.0f64;
        for i in 0..n {
            let (v, d) = eval_with_derivative(&monic, z[i]);
            if v.norm() == 0.0 {
                continue;
            }
            let ratio = v / d;
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| (z[i] - z[j]).inv())
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if step.is_finite() {
                z[i] -= step;
                max_step = max_step.max(step.norm() / z[i].norm().max(1.0));
            }
        }
        if max_step < 1e-15 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence(format!("Aberth iteration on a degree-{n} polynomial")));
    }
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let (v, d) = eval_with_derivative(&monic, *zi);
            let step = v / d;
            if step.is_finite() {
                *zi -= step;
            }
        }
    }
    pair_conjugates(&mut z);
    Ok(z)
}

/// Real coefficients: snap near-real roots onto the axis and make complex
/// roots exact conjugate pairs.
fn pair_conjugates(z: &mut [Complex64]) {
    let n = z.len();
    let mut used = vec![false; n];
    for i in 0..n {
        if used[i] {
            continue;
        }
        if z[i].im.abs() <= 1e-12 * z[i].norm().max(1.0) {
            z[i].im = 0.0;
            used[i] = true;
            continue;
        }
        let partner = (0..n)
            .filter(|&j| j != i && !used[j])
            .min_by(|&a, &b| {
                let da = (z[a] - z[i].conj()).norm();
                let db = (z[b] - z[i].conj()).norm();
                da.partial_cmp(&db).unwrap_or(std::cmp::Ordering::Equal)
            });
        if let Some(j) = partner {
            let re = 0.5 * (z[i].re + z[j].re);
            let im = 0.5 * (z[i].im.abs() + z[j].im.abs());
            let sign = z[i].im.signum();
            z[i] = Complex64::new(re, sign * im);
            z[j] = Complex64::new(re, -sign * im);
            used[j] = true;
        }
        used[i] = true;
    }
}
