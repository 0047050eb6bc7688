//! Scalar benchmark with locally non-convex terms
//! `f_ij(x) = 2x² + cos²x + a_ij sin x + b_ij x` and `f_i = mean_j f_ij`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Objective, ObjectiveError, Result};

/// Curvature bound used for this family.
pub const NONCONVEX_ZETA: f64 = 11.0;
/// Coefficients are drawn from `[−COEFF_RANGE, COEFF_RANGE]`.
const COEFF_RANGE: f64 = 5.0;
const MIN_ABS_COEFF: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct NonconvexBench {
    a: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
    a_mean: Vec<f64>,
    b_mean: Vec<f64>,
}

/// Benchmark with `n` nodes of `terms` summands each. Both coefficient
/// tables sum to zero, lie in `[−5, 5]` and avoid zero, so with equal term
/// counts the global cost is `2x² + cos²x` with minimiser `0` and minimum 1.
pub fn nonconvex_bench(n: usize, terms: usize, seed: u64) -> Result<NonconvexBench> {
    if n < 2 {
        return Err(ObjectiveError::InvalidParameter {
            name: "node count",
            requirement: "at least 2",
            value: n as f64,
        });
    }
    if terms == 0 {
        return Err(ObjectiveError::InvalidParameter {
            name: "terms per node",
            requirement: "at least 1",
            value: 0.0,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = zero_sum_table(&mut rng, n, terms);
    let b = zero_sum_table(&mut rng, n, terms);
    NonconvexBench::from_coefficients(a, b)
}

// Uniform draws, centred to sum to zero and shrunk back into range; the
// whole table is redrawn if any entry is too close to zero, since
// replacing a single entry would break the zero sum.
fn zero_sum_table(rng: &mut ChaCha8Rng, n: usize, terms: usize) -> Vec<Vec<f64>> {
    let count = n * terms;
    loop {
        let mut flat: Vec<f64> = (0..count)
            .map(|_| rng.random_range(-COEFF_RANGE..=COEFF_RANGE))
            .collect();
        let mean = flat.iter().sum::<f64>() / count as f64;
        flat.iter_mut().for_each(|v| *v -= mean);
        let peak = flat.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if peak > COEFF_RANGE {
            let shrink = COEFF_RANGE / peak;
            flat.iter_mut().for_each(|v| *v *= shrink);
        }
        if flat.iter().all(|v| v.abs() >= MIN_ABS_COEFF) {
            return flat.chunks(terms).map(<[f64]>::to_vec).collect();
        }
    }
}

impl NonconvexBench {
    pub fn from_coefficients(a: Vec<Vec<f64>>, b: Vec<Vec<f64>>) -> Result<Self> {
        if a.is_empty() || a.len() != b.len() {
            return Err(ObjectiveError::InvalidDataset(
                "coefficient tables must be non-empty and have one row per node".into(),
            ));
        }
        for (ra, rb) in a.iter().zip(&b) {
            if ra.is_empty() || ra.len() != rb.len() {
                return Err(ObjectiveError::InvalidDataset(
                    "each node needs the same positive number of a and b terms".into(),
                ));
            }
        }
        let mean = |row: &Vec<f64>| row.iter().sum::<f64>() / row.len() as f64;
        Ok(NonconvexBench {
            a_mean: a.iter().map(mean).collect(),
            b_mean: b.iter().map(mean).collect(),
            a,
            b,
        })
    }

    pub fn a(&self) -> &[Vec<f64>] {
        &self.a
    }

    pub fn b(&self) -> &[Vec<f64>] {
        &self.b
    }

    /// `f_ij(x)`.
    pub fn term_value(&self, node: usize, term: usize, x: f64) -> f64 {
        let c = x.cos();
        2.0 * x * x + c * c + self.a[node][term] * x.sin() + self.b[node][term] * x
    }

    /// `f_ij''(x) = 4 − 2 cos 2x − a_ij sin x`.
    pub fn term_curvature(&self, node: usize, term: usize, x: f64) -> f64 {
        term_curvature(self.a[node][term], x)
    }

    fn equal_terms(&self) -> bool {
        self.a.iter().all(|r| r.len() == self.a[0].len())
    }
}

/// Second derivative of a single term with sine coefficient `a`.
pub fn term_curvature(a: f64, x: f64) -> f64 {
    4.0 - 2.0 * (2.0 * x).cos() - a * x.sin()
}

impl Objective for NonconvexBench {
    fn family(&self) -> &'static str {
        "nonconvex"
    }

    fn nodes(&self) -> usize {
        self.a.len()
    }

    fn dim(&self) -> usize {
        1
    }

    fn value(&self, node: usize, x: &[f64]) -> f64 {
        let x = x[0];
        let c = x.cos();
        2.0 * x * x + c * c + self.a_mean[node] * x.sin() + self.b_mean[node] * x
    }

    fn gradient(&self, node: usize, x: &[f64], out: &mut [f64]) {
        let x = x[0];
        out[0] = 4.0 * x - (2.0 * x).sin() + self.a_mean[node] * x.cos() + self.b_mean[node];
    }

    fn hessian_apply(&self, node: usize, x: &[f64], v: &[f64], out: &mut [f64]) {
        out[0] = term_curvature(self.a_mean[node], x[0]) * v[0];
    }

    fn zeta(&self) -> f64 {
        NONCONVEX_ZETA
    }

    fn known_minimizer(&self) -> Option<Vec<f64>> {
        self.equal_terms().then(|| vec![0.0])
    }
}
