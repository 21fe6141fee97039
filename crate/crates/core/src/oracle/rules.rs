//! One-dimensional quadrature rules used by the oracles.

use serde::{Deserialize, Serialize};

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on
/// the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadRule {
    #[default]
    GaussLegendre,
    Trapezoid,
}

/// Nodes and weights for one rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct Panel {
    x: Vec<f64>,
    w: Vec<f64>,
}

impl Panel {
    pub fn new(rule: QuadRule, n: usize) -> Self {
        match rule {
            QuadRule::GaussLegendre => {
                let (x, w) = gauss_legendre(n);
                Self { x, w }
            }
            QuadRule::Trapezoid => {
                let h = 2.0 / (n - 1) as f64;
                let x = (0..n).map(|i| -1.0 + i as f64 * h).collect();
                let w = (0..n)
                    .map(|i| if i == 0 || i == n - 1 { h / 2.0 } else { h })
                    .collect();
                Self { x, w }
            }
        }
    }

    /// `(node, weight)` pairs of the composite rule with `panels` equal
    /// panels on `[a, b]`.
    pub fn composite(&self, a: f64, b: f64, panels: usize) -> impl Iterator<Item = (f64, f64)> + '_ {
        let width = (b - a) / panels as f64;
        (0..panels).flat_map(move |p| {
            let lo = a + p as f64 * width;
            let half = width / 2.0;
            self.x.iter().zip(&self.w).map(move |(x, w)| (lo + half * (x + 1.0), half * w))
        })
    }
}

/// Double-exponential (tanh-sinh) rule on `[a, b]`.
///
/// The integrand receives `(x, x − a, b − x)` with both distances computed
/// without cancellation, so integrable endpoint singularities are handled.
pub fn tanh_sinh(a: f64, b: f64, level: u32, mut f: impl FnMut(f64, f64, f64) -> f64) -> f64 {
    let h = 1.0 / f64::from(1u32 << level);
    let half = (b - a) / 2.0;
    let mut sum = 0.0;
    let mut t = 0.0f64;
    let mut first = true;
    loop {
        let u = std::f64::consts::FRAC_PI_2 * t.sinh();
        let cosh_u = u.cosh();
        let weight = std::f64::consts::FRAC_PI_2 * t.cosh() / (cosh_u * cosh_u);
        // 1 − tanh u = 2 / (1 + e^{2u})
        let near = half * 2.0 / (1.0 + (2.0 * u).exp());
        if near <= 0.0 || weight * half < 1e-300 {
            break;
        }
        let far = 2.0 * half - near;
        let mut term = f(b - near, far, near);
        if !first {
            term += f(a + near, near, far);
        }
        sum += weight * term;
        first = false;
        t += h;
    }
    sum * half * h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(16);
        for deg in 0..32 {
            let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg)).sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg + 1) as f64 };
            assert!((got - exact).abs() < 1e-14, "degree {deg}: {got}");
        }
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn composite_panels() {
        let p = Panel::new(QuadRule::GaussLegendre, 16);
        let got: f64 = p.composite(0.0, std::f64::consts::PI, 4).map(|(x, w)| w * x.sin()).sum();
        assert!((got - 2.0).abs() < 1e-14);
        let t = Panel::new(QuadRule::Trapezoid, 17);
        let got: f64 = t.composite(0.0, 1.0, 8).map(|(x, w)| w * x * x).sum();
        // trapezoid error for x² is exactly h²/6
        let h = 1.0 / 128.0;
        assert!((got - (1.0 / 3.0 + h * h / 6.0)).abs() < 1e-14);
    }

    #[test]
    fn tanh_sinh_handles_endpoint_singularities() {
        // ∫₀¹ x^{-1/2} dx = 2
        let got = tanh_sinh(0.0, 1.0, 6, |_, da, _| da.powf(-0.5));
        assert!((got - 2.0).abs() < 1e-12, "{got}");
        // ∫₀¹ x^{0.1} (1−x)^{0.3} dx = B(1.1, 1.3)
        let got = tanh_sinh(0.0, 1.0, 6, |_, da, db| da.powf(0.1) * db.powf(0.3));
        let exact = (statrs::function::gamma::ln_gamma(1.1) + statrs::function::gamma::ln_gamma(1.3)
            - statrs::function::gamma::ln_gamma(2.4))
        .exp();
        assert!((got - exact).abs() < 1e-12);
    }
}
