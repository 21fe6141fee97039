use serde::{Deserialize, Serialize};

use super::rules::tanh_sinh;
use crate::conjugate::DirichletParams;
use crate::error::{Error, Result};

/// Default lattice step `1/200`.
pub const DEFAULT_LATTICE_STEPS: usize = 200;

/// Discretised posterior density over the simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexGrid {
    /// Full probability vectors at the lattice cell centroids.
    pub points: Vec<Vec<f64>>,
    /// Normalised density at each point, with respect to Lebesgue measure on
    /// the first `k − 1` coordinates.
    pub density: Vec<f64>,
}

/// Lattice cell centroids: `(i + ½)/n` for k = 2; the centroids of the `n²`
/// congruent sub-triangles for k = 3.
fn lattice(k: usize, n: usize) -> Vec<Vec<f64>> {
    let nf = n as f64;
    match k {
        1 => vec![vec![1.0]],
        2 => (0..n)
            .map(|i| {
                let t = (i as f64 + 0.5) / nf;
                vec![t, (nf - i as f64 - 0.5) / nf]
            })
            .collect(),
        _ => {
            let mut pts = Vec::with_capacity(n * n);
            for i in 0..n {
                for j in 0..n - i {
                    let (fi, fj) = (i as f64, j as f64);
                    pts.push(vec![(fi + 1.0 / 3.0) / nf, (fj + 1.0 / 3.0) / nf, (nf - fi - fj - 2.0 / 3.0) / nf]);
                    if i + j + 2 <= n {
                        pts.push(vec![(fi + 2.0 / 3.0) / nf, (fj + 2.0 / 3.0) / nf, (nf - fi - fj - 4.0 / 3.0) / nf]);
                    }
                }
            }
            pts
        }
    }
}

fn log_kernel(exponents: &[f64], theta: &[f64]) -> f64 {
    exponents
        .iter()
        .zip(theta)
        .map(|(e, t)| if *e == 0.0 { 0.0 } else { e * t.ln() })
        .sum()
}

/// `∫ exp(Σ eᵢ ln θᵢ − shift)` over the simplex by nested tanh-sinh.
fn simplex_integral(exponents: &[f64], shift: f64, level: u32) -> f64 {
    let term = |e: f64, t: f64| if e == 0.0 { 0.0 } else { e * t.ln() };
    match exponents.len() {
        1 => (-shift).exp(),
        2 => tanh_sinh(0.0, 1.0, level, |_, t1, t2| {
            (term(exponents[0], t1) + term(exponents[1], t2) - shift).exp()
        }),
        _ => tanh_sinh(0.0, 1.0, level, |_, t1, rest| {
            let outer = term(exponents[0], t1);
            tanh_sinh(0.0, rest, level, |_, t2, t3| {
                (outer + term(exponents[1], t2) + term(exponents[2], t3) - shift).exp()
            })
        }),
    }
}

/// Prior × likelihood evaluated pointwise on the simplex lattice and
/// renormalised.
///
/// The normaliser is the integral of the same unnormalised kernel computed
/// by nested tanh-sinh quadrature, refined until two levels agree to 1e-12.
/// A plain lattice sum cannot serve as normaliser to 1e-3 when an exponent
/// lies in (−1, 1) because of the algebraic boundary behaviour.
pub fn grid_posterior_dirichlet(alpha: &DirichletParams, counts: &[u64], steps: usize) -> Result<SimplexGrid> {
    let k = alpha.k();
    if k > 3 {
        return Err(Error::Unsupported(format!("simplex lattice for k = {k} (max 3)")));
    }
    if counts.len() != k {
        return Err(Error::domain(format!("{} counts for {k} classes", counts.len())));
    }
    if alpha.alpha().iter().any(|&a| a <= 0.0) {
        return Err(Error::domain("lattice posterior needs every concentration > 0"));
    }
    if steps == 0 {
        return Err(Error::domain("lattice needs at least one step"));
    }
    let exponents: Vec<f64> = alpha.alpha().iter().zip(counts).map(|(a, c)| a - 1.0 + *c as f64).collect();
    let points = lattice(k, steps);
    let logs: Vec<f64> = points.iter().map(|p| log_kernel(&exponents, p)).collect();
    let shift = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let mut level = 4;
    let mut z = simplex_integral(&exponents, shift, level);
    loop {
        level += 1;
        let finer = simplex_integral(&exponents, shift, level);
        let converged = ((finer - z) / finer).abs() < 1e-12;
        z = finer;
        if converged {
            break;
        }
        if level >= 9 {
            return Err(Error::Precision(format!("simplex normaliser did not settle (last {z})")));
        }
    }
    let density = logs.iter().map(|l| (l - shift).exp() / z).collect();
    Ok(SimplexGrid { points, density })
}
