//! Local cost families, synthetic datasets and curvature validators.
//!
//! Every objective is a sum over nodes of local costs `f_i: ℝ^m → ℝ`.
//! Global quantities use the node average `F(x) = (1/n) Σ_i f_i(x)`.

mod datasets;
mod linreg;
mod logreg;
mod nonconvex;
mod svm;
mod validate;

pub use datasets::{Dataset, Generator, PartitionedDataset};
pub use linreg::{linreg_objective, LinRegObjective};
pub use logreg::{logreg_objective, LogRegObjective};
pub use nonconvex::{nonconvex_bench, term_curvature, NonconvexBench, NONCONVEX_ZETA};
pub use svm::{kernel_lift, svm_objective, SvmObjective, SVM_DEFAULT_C, SVM_DEFAULT_MU};
pub use validate::{
    check_curvature_assumptions, gradient_check, CurvatureAssumptionReport, GradCheckReport,
    FD_RTOL, FD_STEP,
};

use ndarray::Array2;

#[derive(Debug, thiserror::Error)]
pub enum ObjectiveError {
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("label {label} at row {row} is not +1 or -1")]
    InvalidLabel { row: usize, label: f64 },
    #[error("{name} must be {requirement}, got {value}")]
    InvalidParameter {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, ObjectiveError>;

/// A separable cost `Σ_i f_i` over `n` nodes with states in `ℝ^m`.
pub trait Objective: Send + Sync {
    fn family(&self) -> &'static str;
    fn nodes(&self) -> usize;
    fn dim(&self) -> usize;
    fn value(&self, node: usize, x: &[f64]) -> f64;
    fn gradient(&self, node: usize, x: &[f64], out: &mut [f64]);
    /// `out = ∇²f_node(x) · v`.
    fn hessian_apply(&self, node: usize, x: &[f64], v: &[f64], out: &mut [f64]);
    /// Certified bound with `∇²f_i(x) ⪯ ζ I` for all nodes and states.
    fn zeta(&self) -> f64;

    /// Global minimiser when it is available in closed form.
    fn known_minimizer(&self) -> Option<Vec<f64>> {
        None
    }

    fn hessian(&self, node: usize, x: &[f64]) -> Array2<f64> {
        let m = self.dim();
        let mut h = Array2::zeros((m, m));
        let mut e = vec![0.0; m];
        let mut col = vec![0.0; m];
        for j in 0..m {
            e[j] = 1.0;
            self.hessian_apply(node, x, &e, &mut col);
            for i in 0..m {
                h[[i, j]] = col[i];
            }
            e[j] = 0.0;
        }
        h
    }

    /// `F(x) = (1/n) Σ_i f_i(x)`.
    fn global_cost(&self, x: &[f64]) -> f64 {
        let n = self.nodes();
        (0..n).map(|i| self.value(i, x)).sum::<f64>() / n as f64
    }

    /// `∇F(x)`.
    fn global_gradient(&self, x: &[f64], out: &mut [f64]) {
        let n = self.nodes();
        let mut g = vec![0.0; self.dim()];
        out.fill(0.0);
        for i in 0..n {
            self.gradient(i, x, &mut g);
            for (o, gi) in out.iter_mut().zip(&g) {
                *o += gi / n as f64;
            }
        }
    }

    /// `∇²F(x) · v`.
    fn global_hessian_apply(&self, x: &[f64], v: &[f64], out: &mut [f64]) {
        let n = self.nodes();
        let mut hv = vec![0.0; self.dim()];
        out.fill(0.0);
        for i in 0..n {
            self.hessian_apply(i, x, v, &mut hv);
            for (o, h) in out.iter_mut().zip(&hv) {
                *o += h / n as f64;
            }
        }
    }
}

pub(crate) fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

pub(crate) fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// High-accuracy centralised minimiser of `F`, used as the reference
/// optimum when no closed form exists: truncated Newton (conjugate
/// gradients on Hessian-vector products) with Armijo backtracking, falling
/// back to the gradient direction on negative curvature.
pub fn reference_minimizer(obj: &dyn Objective, start: &[f64], grad_tol: f64) -> Vec<f64> {
    let m = obj.dim();
    let mut x = start.to_vec();
    let mut g = vec![0.0; m];
    let mut trial = vec![0.0; m];
    for _ in 0..200 {
        obj.global_gradient(&x, &mut g);
        let gnorm = norm(&g);
        if gnorm <= grad_tol {
            break;
        }
        let mut dir = newton_cg_direction(obj, &x, &g);
        if dot(&dir, &g) >= 0.0 {
            dir = g.iter().map(|v| -v).collect();
        }
        let f0 = obj.global_cost(&x);
        let slope = dot(&dir, &g);
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            for k in 0..m {
                trial[k] = x[k] + step * dir[k];
            }
            let f1 = obj.global_cost(&trial);
            if f1 <= f0 + 1e-4 * step * slope || (f1 - f0).abs() <= 1e-15 * f0.abs().max(1.0) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        x.copy_from_slice(&trial);
    }
    x
}

fn newton_cg_direction(obj: &dyn Objective, x: &[f64], g: &[f64]) -> Vec<f64> {
    let m = g.len();
    let mut p = vec![0.0; m];
    let mut r: Vec<f64> = g.iter().map(|v| -v).collect();
    let mut d = r.clone();
    let mut hd = vec![0.0; m];
    let r0 = norm(&r);
    let mut rr = dot(&r, &r);
    for _ in 0..(2 * m).max(10) {
        obj.global_hessian_apply(x, &d, &mut hd);
        let curv = dot(&d, &hd);
        if curv <= 1e-14 * dot(&d, &d) {
            if p.iter().all(|v| *v == 0.0) {
                return r;
            }
            break;
        }
        let a = rr / curv;
        for k in 0..m {
            p[k] += a * d[k];
            r[k] -= a * hd[k];
        }
        let rr_new = dot(&r, &r);
        if rr_new.sqrt() <= 1e-12 * r0.max(1e-300) {
            break;
        }
        let b = rr_new / rr;
        rr = rr_new;
        for k in 0..m {
            d[k] = r[k] + b * d[k];
        }
    }
    p
}
