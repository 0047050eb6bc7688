//! Independent oracles shared by the integration tests and the acceptance
//! suite. Nothing here calls into the solver code it is used to check.

#![allow(dead_code)]

use hbgt::objectives::Objective;
use ndarray::Array2;
use num_complex::Complex64;

/// Characteristic-polynomial coefficients (lowest degree first, monic) by
/// the Faddeev–LeVerrier recursion.
pub fn char_poly(a: &Array2<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut coeffs = vec![0.0; n + 1];
    coeffs[n] = 1.0;
    let mut m = Array2::<f64>::zeros((n, n));
    for k in 1..=n {
        let mut next = a.dot(&m);
        for i in 0..n {
            next[[i, i]] += coeffs[n - k + 1];
        }
        m = next;
        let am = a.dot(&m);
        coeffs[n - k] = -am.diag().sum() / k as f64;
    }
    coeffs
}

fn horner(coeffs: &[f64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

fn horner_derivative(coeffs: &[f64], z: Complex64) -> Complex64 {
    let n = coeffs.len() - 1;
    (1..=n).rev().fold(Complex64::new(0.0, 0.0), |acc, k| {
        acc * z + coeffs[k] * k as f64
    })
}

/// Roots of a monic polynomial by Durand–Kerner with Newton polishing.
pub fn poly_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let radius = 1.0 + coeffs[..n].iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| seed.powu(k as u32 + 1) * radius / seed.norm())
        .collect();
    for _ in 0..2000 {
        let mut delta = 0.0f64;
        for i in 0..n {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    denom *= z[i] - z[j];
                }
            }
            let step = horner(coeffs, z[i]) / denom;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 * radius {
            break;
        }
    }
    for root in &mut z {
        for _ in 0..5 {
            let d = horner_derivative(coeffs, *root);
            if d.norm() == 0.0 {
                break;
            }
            let step = horner(coeffs, *root) / d;
            if !step.is_finite() {
                break;
            }
            *root -= step;
        }
    }
    z
}

pub fn oracle_eigenvalues(a: &Array2<f64>) -> Vec<Complex64> {
    poly_roots(&char_poly(a))
}

/// Smallest achievable max distance over pairings of two equal-size
/// spectra (brute force; intended for dimensions up to 7).
pub fn spectral_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    fn search(
        a: &[Complex64],
        b: &[Complex64],
        used: &mut Vec<bool>,
        k: usize,
        worst: f64,
        best: &mut f64,
    ) {
        if worst >= *best {
            return;
        }
        if k == a.len() {
            *best = worst;
            return;
        }
        for j in 0..b.len() {
            if !used[j] {
                used[j] = true;
                search(a, b, used, k + 1, worst.max((a[k] - b[j]).norm()), best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    search(a, b, &mut vec![false; b.len()], 0, 0.0, &mut best);
    best
}

/// Hop diameter by Floyd–Warshall on the link pattern; `None` when some
/// pair is unreachable.
pub fn floyd_warshall_diameter(w: &Array2<f64>) -> Option<usize> {
    let n = w.nrows();
    let inf = usize::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for i in 0..n {
        d[i][i] = 0;
        for j in 0..n {
            // w[[i, j]] is the link j -> i
            if i != j && w[[i, j]] > 0.0 {
                d[j][i] = 1;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    let worst = d.iter().flatten().copied().max().unwrap_or(0);
    (worst < inf).then_some(worst)
}

/// Scalar quadratics `f_i(x) = ½ h_i (x − c_i)²`.
#[derive(Debug, Clone)]
pub struct Quadratics {
    pub curvature: Vec<f64>,
    pub centers: Vec<f64>,
}

impl Quadratics {
    pub fn minimizer(&self) -> f64 {
        let num: f64 = self
            .curvature
            .iter()
            .zip(&self.centers)
            .map(|(h, c)| h * c)
            .sum();
        num / self.curvature.iter().sum::<f64>()
    }
}

impl Objective for Quadratics {
    fn family(&self) -> &'static str {
        "quadratic"
    }
    fn nodes(&self) -> usize {
        self.curvature.len()
    }
    fn dim(&self) -> usize {
        1
    }
    fn value(&self, i: usize, x: &[f64]) -> f64 {
        0.5 * self.curvature[i] * (x[0] - self.centers[i]).powi(2)
    }
    fn gradient(&self, i: usize, x: &[f64], out: &mut [f64]) {
        out[0] = self.curvature[i] * (x[0] - self.centers[i]);
    }
    fn hessian_apply(&self, i: usize, _: &[f64], v: &[f64], out: &mut [f64]) {
        out[0] = self.curvature[i] * v[0];
    }
    fn zeta(&self) -> f64 {
        self.curvature
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
    fn known_minimizer(&self) -> Option<Vec<f64>> {
        Some(vec![self.minimizer()])
    }
}

/// Pooled least squares for points `(χ, y)` under the model `βχ − ν = y`,
/// solved by Cramer's rule on the 2×2 normal equations.
pub fn ols_line(points: &[(f64, f64)]) -> [f64; 2] {
    let (mut sxx, mut sx, mut n, mut sxy, mut sy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        sxx += x * x;
        sx += x;
        n += 1.0;
        sxy += x * y;
        sy += y;
    }
    // minimise Σ(βχ − ν − y)²: [sxx, −sx; −sx, n] [β; ν] = [sxy; −sy]
    let det = sxx * n - sx * sx;
    let beta = (sxy * n - sx * sy) / det;
    let nu = (sxx * -sy + sx * sxy) / det;
    [beta, nu]
}
