//! Heavy-ball gradient-tracking flow over a switching network and its
//! explicit Euler discretisation.
//!
//! Continuous form, for node `i` with link map `g`:
//!
//! ```text
//! (1 − β) ẋ_i = Σ_j w_ij (g(x_j) − g(x_i)) − α z_i
//!         ż_i = Σ_j w_ij (g(z_j) − g(z_i)) + d/dt ∇f_i(x_i)
//! ```
//!
//! The gradient-derivative term is integrated exactly over each step as
//! `∇f_i(x_i⁺) − ∇f_i(x_i)`, so on a weight-balanced network
//! `Σ_i z_i = Σ_i ∇f_i(x_i)` holds at every step up to round-off.
//! The cached gradient starts at zero: with `z(0) = 0` the first step
//! injects the full initial gradient into the trackers.

use std::io::Write;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{Network, SwitchingSchedule};
use crate::nonlinearity::SectorMap;
use crate::objectives::Objective;
use crate::spectrum;

/// States whose Frobenius norm exceeds this are treated as divergent.
pub const DIVERGENCE_NORM: f64 = 1e9;
/// Divergence within this many steps at admissible parameters triggers one
/// automatic halving of the step size.
pub const EARLY_STEPS: u64 = 100;

#[derive(Debug, thiserror::Error)]
pub enum DynamicsError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid {field}: {reason}")]
    InvalidParameter { field: &'static str, reason: String },
    #[error("diverged at step {} (t = {}): {}", .0.step, .0.t, .0.reason)]
    Diverged(Box<Divergence>),
}

pub type Result<T> = std::result::Result<T, DynamicsError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DivergenceKind {
    NonFinite,
    NormExceeded,
}

#[derive(Debug, Clone)]
pub struct Divergence {
    pub step: u64,
    pub t: f64,
    pub kind: DivergenceKind,
    pub reason: String,
    /// History up to the failure; `final_state` is the last finite state.
    pub trajectory: Trajectory,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HbgtParams {
    pub alpha: f64,
    pub beta: f64,
    /// Euler step `h` in seconds.
    pub step: f64,
    pub t_end: f64,
    pub x_map: SectorMap,
    pub z_map: SectorMap,
}

impl HbgtParams {
    /// Parameters with the same link map on both channels.
    pub fn new(alpha: f64, beta: f64, step: f64, t_end: f64, map: SectorMap) -> Result<Self> {
        let p = HbgtParams {
            alpha,
            beta,
            step,
            t_end,
            x_map: map,
            z_map: map,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_z_map(mut self, map: SectorMap) -> Self {
        self.z_map = map;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field, reason: &str| {
            Err(DynamicsError::InvalidParameter {
                field,
                reason: reason.to_string(),
            })
        };
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return bad("alpha", "must be finite and non-negative");
        }
        if !(0.0..1.0).contains(&self.beta) {
            return bad("beta", "must lie in [0, 1)");
        }
        if !(self.step.is_finite() && self.step > 0.0) {
            return bad("step", "must be positive");
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return bad("t_end", "must be positive");
        }
        for (field, map) in [("x_map", self.x_map), ("z_map", self.z_map)] {
            if let Err(e) = map.validate() {
                return bad(field, &e.to_string());
            }
        }
        Ok(())
    }

    /// Number of Euler steps covering `[0, t_end]`.
    pub fn step_count(&self) -> u64 {
        ((self.t_end / self.step).round() as u64).max(1)
    }
}

/// Stacked agent states `x`, trackers `z` and the cached local gradients.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimState {
    pub x: Array2<f64>,
    pub z: Array2<f64>,
    pub grad_prev: Array2<f64>,
    pub t: f64,
    pub step: u64,
}

impl SimState {
    /// Initial state at `t = 0` with `z = 0`.
    pub fn new(x0: Array2<f64>) -> Self {
        let x = x0.as_standard_layout().into_owned();
        let dim = x.dim();
        SimState {
            x,
            z: Array2::zeros(dim),
            grad_prev: Array2::zeros(dim),
            t: 0.0,
            step: 0,
        }
    }

    /// Initial states drawn uniformly from `[−range, range]^m` per node.
    pub fn random(n: usize, m: usize, range: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::new(Array2::from_shape_fn((n, m), |_| {
            rng.random_range(-range..=range)
        }))
    }

    pub fn nodes(&self) -> usize {
        self.x.nrows()
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    pub fn mean(&self) -> Vec<f64> {
        let n = self.nodes() as f64;
        self.x.columns().into_iter().map(|c| c.sum() / n).collect()
    }

    /// `max_i ‖x_i − x̄‖`.
    pub fn consensus_residual(&self) -> f64 {
        let mean = self.mean();
        self.x
            .outer_iter()
            .map(|row| {
                row.iter()
                    .zip(&mean)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }
}

/// Known optimum used for gaps and the Lyapunov function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub x_star: Vec<f64>,
    pub f_star: f64,
}

impl Reference {
    pub fn from_minimizer(obj: &dyn Objective, x_star: Vec<f64>) -> Self {
        let f_star = obj.global_cost(&x_star);
        Reference { x_star, f_star }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepMetrics {
    pub step: u64,
    pub t: f64,
    /// `F(x̄)`.
    pub cost: f64,
    pub consensus_residual: f64,
    /// `‖Σ_i z_i − Σ_i ∇f_i(x_i)‖`.
    pub gt_residual: f64,
    /// `‖Σ_i ∇f_i(x_i)‖`.
    pub grad_sum_norm: f64,
    /// `½ (Σ_i ‖x_i − x*‖² + ‖z‖²)`.
    pub lyapunov: Option<f64>,
    /// `F(x̄) − F*`.
    pub optimality_gap: Option<f64>,
}

/// What `run` keeps besides the final state.
#[derive(Debug, Clone)]
pub struct Recorder {
    /// Metrics are stored every `interval` steps and at the final step.
    pub interval: u64,
    pub reference: Option<Reference>,
    /// Record the step from which the optimality gap stays below this
    /// value (needs `reference`).
    pub threshold: Option<f64>,
    /// Store full states every this many steps.
    pub snapshot_interval: Option<u64>,
}

impl Default for Recorder {
    fn default() -> Self {
        Recorder {
            interval: 10,
            reference: None,
            threshold: None,
            snapshot_interval: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Admissibility {
    pub abs_re_lambda2: f64,
    pub alpha_bound: f64,
    pub admissible: bool,
}

/// Step-size admissibility of `alpha` for the network, momentum and ζ.
pub fn admissibility(net: &Network, zeta: f64, alpha: f64, beta: f64) -> Option<Admissibility> {
    let l2 = spectrum::lambda2(&net.laplacian()).ok()?;
    let bound = spectrum::alpha_bound(beta, l2.re.abs(), zeta).ok()?;
    Some(Admissibility {
        abs_re_lambda2: l2.re.abs(),
        alpha_bound: bound,
        admissible: alpha <= bound,
    })
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub metrics: Vec<StepMetrics>,
    pub snapshots: Vec<SimState>,
    pub final_state: SimState,
    /// Step size actually used (after any automatic halving).
    pub step_size: f64,
    pub step_halved: bool,
    /// First step after which the optimality gap stays below the recorder
    /// threshold until the end of the run.
    pub steps_to_threshold: Option<u64>,
    /// Largest `‖Σz − Σ∇f‖ / (1 + ‖Σ∇f‖)` over every step.
    pub max_gt_error: f64,
    pub admissibility: Option<Admissibility>,
}

impl Trajectory {
    /// CSV with header `t,cost,consensus_residual,gt_residual,lyapunov,optimality_gap`;
    /// unknown values are left empty.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "t,cost,consensus_residual,gt_residual,lyapunov,optimality_gap"
        )?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for m in &self.metrics {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                m.t,
                m.cost,
                m.consensus_residual,
                m.gt_residual,
                opt(m.lyapunov),
                opt(m.optimality_gap)
            )?;
        }
        Ok(())
    }

    pub fn last_metrics(&self) -> Option<&StepMetrics> {
        self.metrics.last()
    }
}

// Scratch buffers reused across steps.
struct Stepper {
    n: usize,
    m: usize,
    gx: Vec<f64>,
    gz: Vec<f64>,
    dx: Vec<f64>,
    dz: Vec<f64>,
    x_new: Vec<f64>,
    z_new: Vec<f64>,
    grad: Vec<f64>,
}

impl Stepper {
    fn new(n: usize, m: usize) -> Self {
        let buf = || vec![0.0; n * m];
        Stepper {
            n,
            m,
            gx: buf(),
            gz: buf(),
            dx: buf(),
            dz: buf(),
            x_new: buf(),
            z_new: buf(),
            grad: buf(),
        }
    }

    // dx and dz (consensus part only) into the scratch buffers.
    fn rhs(&mut self, x: &[f64], z: &[f64], net: &Network, p: &HbgtParams) {
        let (n, m) = (self.n, self.m);
        p.x_map.apply_slice(x, &mut self.gx);
        p.z_map.apply_slice(z, &mut self.gz);
        let inv = 1.0 - p.beta;
        for i in 0..n {
            for a in 0..m {
                let k = i * m + a;
                let mut cx = 0.0;
                let mut cz = 0.0;
                for &(j, w) in net.in_links(i) {
                    cx += w * (self.gx[j * m + a] - self.gx[k]);
                    cz += w * (self.gz[j * m + a] - self.gz[k]);
                }
                self.dx[k] = (cx - p.alpha * z[k]) / inv;
                self.dz[k] = cz;
            }
        }
    }

    // One Euler step; the state is only updated if the result is finite and
    // within the divergence norm.
    fn advance(
        &mut self,
        state: &mut SimState,
        net: &Network,
        obj: &dyn Objective,
        p: &HbgtParams,
        h: f64,
    ) -> std::result::Result<(), DivergenceKind> {
        let (n, m) = (self.n, self.m);
        let x = state.x.as_slice().expect("standard layout");
        let z = state.z.as_slice().expect("standard layout");
        self.rhs(x, z, net, p);
        for k in 0..n * m {
            self.x_new[k] = x[k] + h * self.dx[k];
        }
        for i in 0..n {
            let span = i * m..(i + 1) * m;
            obj.gradient(i, &self.x_new[span.clone()], &mut self.grad[span]);
        }
        let prev = state.grad_prev.as_slice().expect("standard layout");
        for k in 0..n * m {
            self.z_new[k] = z[k] + h * self.dz[k] + (self.grad[k] - prev[k]);
        }
        let finite = self
            .x_new
            .iter()
            .chain(&self.z_new)
            .chain(&self.grad)
            .all(|v| v.is_finite());
        if !finite {
            return Err(DivergenceKind::NonFinite);
        }
        if self.x_new.iter().map(|v| v * v).sum::<f64>().sqrt() > DIVERGENCE_NORM {
            return Err(DivergenceKind::NormExceeded);
        }
        state
            .x
            .as_slice_mut()
            .expect("standard layout")
            .copy_from_slice(&self.x_new);
        state
            .z
            .as_slice_mut()
            .expect("standard layout")
            .copy_from_slice(&self.z_new);
        state
            .grad_prev
            .as_slice_mut()
            .expect("standard layout")
            .copy_from_slice(&self.grad);
        state.step += 1;
        state.t = state.step as f64 * h;
        Ok(())
    }
}

fn check_shapes(state: &SimState, net: &Network, obj: &dyn Objective) -> Result<()> {
    let (n, m) = state.x.dim();
    if net.n() != n || obj.nodes() != n || obj.dim() != m || state.z.dim() != (n, m) {
        return Err(DynamicsError::Shape(format!(
            "state is {n}x{m}, network has {} nodes, objective has {} nodes of dimension {}",
            net.n(),
            obj.nodes(),
            obj.dim()
        )));
    }
    Ok(())
}

/// Right-hand side: `(ẋ, consensus part of ż)`.
pub fn rhs(
    state: &SimState,
    net: &Network,
    obj: &dyn Objective,
    p: &HbgtParams,
) -> Result<(Array2<f64>, Array2<f64>)> {
    check_shapes(state, net, obj)?;
    let (n, m) = state.x.dim();
    let mut st = Stepper::new(n, m);
    let x = state.x.as_standard_layout();
    let z = state.z.as_standard_layout();
    st.rhs(
        x.as_slice().expect("standard layout"),
        z.as_slice().expect("standard layout"),
        net,
        p,
    );
    let dx = Array2::from_shape_vec((n, m), st.dx).expect("shape");
    let dz = Array2::from_shape_vec((n, m), st.dz).expect("shape");
    Ok((dx, dz))
}

/// One Euler step of size `p.step`.
pub fn euler_step(
    state: &SimState,
    net: &Network,
    obj: &dyn Objective,
    p: &HbgtParams,
) -> Result<SimState> {
    check_shapes(state, net, obj)?;
    p.validate()?;
    let mut next = SimState {
        x: state.x.as_standard_layout().into_owned(),
        z: state.z.as_standard_layout().into_owned(),
        grad_prev: state.grad_prev.as_standard_layout().into_owned(),
        t: state.t,
        step: state.step,
    };
    let mut st = Stepper::new(state.nodes(), state.dim());
    match st.advance(&mut next, net, obj, p, p.step) {
        Ok(()) => Ok(next),
        Err(kind) => Err(DynamicsError::Diverged(Box::new(Divergence {
            step: state.step + 1,
            t: state.t + p.step,
            kind,
            reason: describe(kind),
            trajectory: Trajectory {
                metrics: Vec::new(),
                snapshots: Vec::new(),
                final_state: state.clone(),
                step_size: p.step,
                step_halved: false,
                steps_to_threshold: None,
                max_gt_error: 0.0,
                admissibility: None,
            },
        }))),
    }
}

fn describe(kind: DivergenceKind) -> String {
    match kind {
        DivergenceKind::NonFinite => "non-finite state".into(),
        DivergenceKind::NormExceeded => format!("state norm exceeded {DIVERGENCE_NORM:e}"),
    }
}

struct Sums {
    grad_sum_norm: f64,
    gt_residual: f64,
}

fn tracking_sums(state: &SimState) -> Sums {
    let m = state.dim();
    let mut gt = 0.0;
    let mut gs = 0.0;
    for a in 0..m {
        let sz = state.z.column(a).sum();
        let sg = state.grad_prev.column(a).sum();
        gt += (sz - sg) * (sz - sg);
        gs += sg * sg;
    }
    Sums {
        grad_sum_norm: gs.sqrt(),
        gt_residual: gt.sqrt(),
    }
}

/// `½ (Σ_i ‖x_i − x*‖² + ‖z‖²)`.
pub fn lyapunov_value(state: &SimState, x_star: &[f64]) -> f64 {
    let mut v = 0.0;
    for row in state.x.outer_iter() {
        for (a, b) in row.iter().zip(x_star) {
            v += (a - b) * (a - b);
        }
    }
    v += state.z.iter().map(|z| z * z).sum::<f64>();
    0.5 * v
}

fn metrics_for(
    state: &SimState,
    obj: &dyn Objective,
    reference: Option<&Reference>,
) -> StepMetrics {
    let mean = state.mean();
    let cost = obj.global_cost(&mean);
    let sums = tracking_sums(state);
    StepMetrics {
        step: state.step,
        t: state.t,
        cost,
        consensus_residual: state.consensus_residual(),
        gt_residual: sums.gt_residual,
        grad_sum_norm: sums.grad_sum_norm,
        lyapunov: reference.map(|r| lyapunov_value(state, &r.x_star)),
        optimality_gap: reference.map(|r| cost - r.f_star),
    }
}

/// Integrates from `x0` (with `z = 0`) to `p.t_end`, switching networks
/// according to the schedule.
///
/// Divergence is reported as [`DynamicsError::Diverged`] carrying the
/// history so far. If non-finite values appear within the first
/// [`EARLY_STEPS`] steps while `α` is admissible, the run is restarted
/// once with half the step size.
pub fn run(
    schedule: &SwitchingSchedule,
    obj: &dyn Objective,
    p: &HbgtParams,
    x0: &Array2<f64>,
    recorder: &Recorder,
) -> Result<Trajectory> {
    p.validate()?;
    if recorder.interval == 0 {
        return Err(DynamicsError::InvalidParameter {
            field: "record interval",
            reason: "must be at least 1".into(),
        });
    }
    let first = schedule.at(0.0);
    check_shapes(&SimState::new(x0.clone()), &first, obj)?;
    let adm = admissibility(&first, obj.zeta(), p.alpha, p.beta);
    if let Some(a) = adm.filter(|a| !a.admissible) {
        log::warn!(
            "alpha = {} exceeds the admissible bound {:.6e} for beta = {} (|Re lambda2| = {:.6e}, zeta = {})",
            p.alpha,
            a.alpha_bound,
            p.beta,
            a.abs_re_lambda2,
            obj.zeta()
        );
    }
    drop(first);
    match integrate(schedule, obj, p, p.step, x0, recorder, adm, false) {
        Err(DynamicsError::Diverged(d))
            if d.kind == DivergenceKind::NonFinite
                && d.step <= EARLY_STEPS
                && adm.is_some_and(|a| a.admissible) =>
        {
            log::warn!(
                "non-finite state at step {} with admissible parameters; retrying with step {}",
                d.step,
                p.step / 2.0
            );
            integrate(schedule, obj, p, p.step / 2.0, x0, recorder, adm, true)
        }
        other => other,
    }
}

#[allow(clippy::too_many_arguments)]
fn integrate(
    schedule: &SwitchingSchedule,
    obj: &dyn Objective,
    p: &HbgtParams,
    h: f64,
    x0: &Array2<f64>,
    rec: &Recorder,
    adm: Option<Admissibility>,
    halved: bool,
) -> Result<Trajectory> {
    let mut state = SimState::new(x0.clone());
    let (n, m) = state.x.dim();
    let total = ((p.t_end / h).round() as u64).max(1);
    let reference = rec.reference.as_ref();
    let mut traj = Trajectory {
        metrics: vec![metrics_for(&state, obj, reference)],
        snapshots: Vec::new(),
        final_state: state.clone(),
        step_size: h,
        step_halved: halved,
        steps_to_threshold: None,
        max_gt_error: 0.0,
        admissibility: adm,
    };
    if rec.snapshot_interval.is_some() {
        traj.snapshots.push(state.clone());
    }
    let threshold = rec.threshold.zip(reference);
    let above = |s: &SimState, (level, r): (f64, &Reference)| {
        !(obj.global_cost(&s.mean()) - r.f_star < level)
    };
    // last step whose gap was at or above the threshold
    let mut last_above = threshold.filter(|&t| above(&state, t)).map(|_| 0u64);
    let mut stepper = Stepper::new(n, m);
    let mut window = schedule.window(0.0);
    let mut net = schedule.network_for_window(window);
    for _ in 0..total {
        let w = schedule.window(state.t);
        if w != window {
            window = w;
            net = schedule.network_for_window(window);
        }
        if let Err(kind) = stepper.advance(&mut state, &net, obj, p, h) {
            let step = state.step + 1;
            let t = step as f64 * h;
            traj.metrics.push(metrics_for(&state, obj, reference));
            traj.final_state = state;
            return Err(DynamicsError::Diverged(Box::new(Divergence {
                step,
                t,
                kind,
                reason: describe(kind),
                trajectory: traj,
            })));
        }
        let sums = tracking_sums(&state);
        traj.max_gt_error = traj
            .max_gt_error
            .max(sums.gt_residual / (1.0 + sums.grad_sum_norm));
        if threshold.is_some_and(|t| above(&state, t)) {
            last_above = Some(state.step);
        }
        if state.step.is_multiple_of(rec.interval) || state.step == total {
            traj.metrics.push(metrics_for(&state, obj, reference));
        }
        if let Some(every) = rec.snapshot_interval {
            if every > 0 && (state.step.is_multiple_of(every) || state.step == total) {
                traj.snapshots.push(state.clone());
            }
        }
    }
    if threshold.is_some() {
        traj.steps_to_threshold = match last_above {
            Some(s) if s == state.step => None,
            Some(s) => Some(s + 1),
            None => Some(0),
        };
    }
    traj.final_state = state;
    Ok(traj)
}

#[derive(Debug, Clone, Serialize)]
pub struct EquilibriumReport {
    pub grad_sum_norm: f64,
    pub consensus_residual: f64,
    pub z_norm: f64,
    pub tol: f64,
    pub at_equilibrium: bool,
}

/// Checks `Σ_i ∇f_i(x_i) ≈ 0`, consensus and `z ≈ 0`.
pub fn equilibrium_check(state: &SimState, obj: &dyn Objective, tol: f64) -> EquilibriumReport {
    let m = state.dim();
    let mut sum = vec![0.0; m];
    let mut g = vec![0.0; m];
    for (i, row) in state.x.outer_iter().enumerate() {
        obj.gradient(i, &row.to_vec(), &mut g);
        for (s, v) in sum.iter_mut().zip(&g) {
            *s += v;
        }
    }
    let grad_sum_norm = sum.iter().map(|v| v * v).sum::<f64>().sqrt();
    let consensus_residual = state.consensus_residual();
    let z_norm = state.z.iter().map(|v| v * v).sum::<f64>().sqrt();
    EquilibriumReport {
        grad_sum_norm,
        consensus_residual,
        z_norm,
        tol,
        at_equilibrium: grad_sum_norm <= tol && consensus_residual <= tol && z_norm <= tol,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LyapunovSeries {
    /// `(t, V(t))` per stored snapshot.
    pub values: Vec<(f64, f64)>,
    /// Time after which monotonicity is assessed.
    pub transient: f64,
    /// Largest increase `V(t_{k+1}) − V(t_k)` after the transient.
    pub max_increase: f64,
    pub non_increasing_after_transient: bool,
}

/// Lyapunov values over the trajectory's snapshots.
pub fn lyapunov_series(traj: &Trajectory, x_star: &[f64], transient: f64) -> LyapunovSeries {
    let values: Vec<(f64, f64)> = traj
        .snapshots
        .iter()
        .map(|s| (s.t, lyapunov_value(s, x_star)))
        .collect();
    let mut max_increase = f64::NEG_INFINITY;
    for pair in values.windows(2) {
        if pair[0].0 >= transient {
            max_increase = max_increase.max(pair[1].1 - pair[0].1);
        }
    }
    // allow round-off relative to the level reached at the transient
    let level = values
        .iter()
        .find(|(t, _)| *t >= transient)
        .map_or(0.0, |(_, v)| *v);
    LyapunovSeries {
        non_increasing_after_transient: max_increase <= 1e-12 * level.max(f64::MIN_POSITIVE),
        values,
        transient,
        max_increase,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_cycle;
    use crate::objectives::{nonconvex_bench, Dataset, PartitionedDataset};
    use ndarray::array;

    struct Quadratic {
        centers: Vec<f64>,
        curv: Vec<f64>,
    }

    impl Objective for Quadratic {
        fn family(&self) -> &'static str {
            "quadratic"
        }
        fn nodes(&self) -> usize {
            self.centers.len()
        }
        fn dim(&self) -> usize {
            1
        }
        fn value(&self, i: usize, x: &[f64]) -> f64 {
            0.5 * self.curv[i] * (x[0] - self.centers[i]).powi(2)
        }
        fn gradient(&self, i: usize, x: &[f64], out: &mut [f64]) {
            out[0] = self.curv[i] * (x[0] - self.centers[i]);
        }
        fn hessian_apply(&self, i: usize, _: &[f64], v: &[f64], out: &mut [f64]) {
            out[0] = self.curv[i] * v[0];
        }
        fn zeta(&self) -> f64 {
            self.curv.iter().cloned().fold(0.0, f64::max)
        }
    }

    fn params(alpha: f64, beta: f64) -> HbgtParams {
        HbgtParams::new(alpha, beta, 1e-3, 1.0, SectorMap::Identity).unwrap()
    }

    #[test]
    fn isolated_node_with_zero_tracker_does_not_move() {
        let obj = Quadratic {
            centers: vec![3.0],
            curv: vec![1.0],
        };
        let net = Network::from_weights(Array2::zeros((1, 1)), false, "single").unwrap();
        let state = SimState::new(array![[1.5]]);
        let (dx, dz) = rhs(&state, &net, &obj, &params(0.7, 0.2)).unwrap();
        assert_eq!(dx[[0, 0]], 0.0);
        assert_eq!(dz[[0, 0]], 0.0);
    }

    #[test]
    fn consensus_is_flow_free() {
        let obj = nonconvex_bench(4, 2, 0).unwrap();
        let net = build_cycle(4, 1.0, false).unwrap();
        let state = SimState::new(Array2::from_elem((4, 1), 2.5));
        let (dx, _) = rhs(&state, &net, &obj, &params(1.0, 0.0)).unwrap();
        assert!(dx.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn half_momentum_doubles_velocity() {
        let obj = nonconvex_bench(4, 2, 0).unwrap();
        let net = build_cycle(4, 1.0, true).unwrap();
        let mut state = SimState::random(4, 1, 5.0, 3);
        state.z = array![[0.3], [-1.0], [2.0], [0.1]];
        let (d0, _) = rhs(&state, &net, &obj, &params(0.8, 0.0)).unwrap();
        let (d5, _) = rhs(&state, &net, &obj, &params(0.8, 0.5)).unwrap();
        assert_eq!(d5, &d0 * 2.0);
    }

    #[test]
    fn first_step_makes_trackers_sum_to_gradients() {
        let obj = nonconvex_bench(5, 3, 1).unwrap();
        let net = build_cycle(5, 1.0, false).unwrap();
        let s0 = SimState::random(5, 1, 5.0, 2);
        let s1 = euler_step(&s0, &net, &obj, &params(1.0, 0.6)).unwrap();
        let mut gsum = 0.0;
        let mut g = [0.0];
        for i in 0..5 {
            obj.gradient(i, &[s1.x[[i, 0]]], &mut g);
            gsum += g[0];
        }
        assert!((s1.z.sum() - gsum).abs() <= 1e-12 * (1.0 + gsum.abs()));
        assert_eq!(s1.step, 1);
        assert_eq!(s1.t, 1e-3);
    }

    #[test]
    fn no_gain_no_links_means_no_motion() {
        let obj = Quadratic {
            centers: vec![-2.0],
            curv: vec![3.0],
        };
        let net = Network::from_weights(Array2::zeros((1, 1)), false, "single").unwrap();
        let mut s = SimState::new(array![[4.0]]);
        for _ in 0..50 {
            s = euler_step(&s, &net, &obj, &params(0.0, 0.0)).unwrap();
            assert_eq!(s.x[[0, 0]], 4.0);
        }
    }

    #[test]
    fn consensus_at_common_optimum_is_an_equilibrium() {
        let obj = Quadratic {
            centers: vec![1.0; 4],
            curv: vec![1.0, 2.0, 0.5, 3.0],
        };
        let sched = SwitchingSchedule::fixed(build_cycle(4, 1.0, true).unwrap());
        let x0 = Array2::from_elem((4, 1), 1.0);
        let traj = run(&sched, &obj, &params(0.5, 0.3), &x0, &Recorder::default()).unwrap();
        assert_eq!(traj.final_state.x, x0);
        assert!(traj.final_state.z.iter().all(|v| *v == 0.0));
        assert!(equilibrium_check(&traj.final_state, &obj, 1e-12).at_equilibrium);
    }

    #[test]
    fn random_state_is_not_an_equilibrium() {
        let obj = nonconvex_bench(6, 2, 0).unwrap();
        let s = SimState::random(6, 1, 5.0, 9);
        assert!(!equilibrium_check(&s, &obj, 1e-3).at_equilibrium);
    }

    #[test]
    fn divergence_keeps_history() {
        let obj = Quadratic {
            centers: vec![0.0, 1.0, 2.0, 3.0],
            curv: vec![5.0, -3.0, 5.0, -3.0],
        };
        let sched = SwitchingSchedule::fixed(build_cycle(4, 0.1, true).unwrap());
        let p = HbgtParams::new(50.0, 0.0, 1e-2, 100.0, SectorMap::Identity).unwrap();
        let x0 = SimState::random(4, 1, 1.0, 1).x;
        let err = run(&sched, &obj, &p, &x0, &Recorder::default()).unwrap_err();
        let DynamicsError::Diverged(d) = err else {
            panic!("expected divergence");
        };
        assert!(!d.trajectory.metrics.is_empty());
        assert!(d.trajectory.final_state.x.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn parameter_validation() {
        assert!(HbgtParams::new(1.0, 1.0, 1e-3, 1.0, SectorMap::Identity).is_err());
        assert!(HbgtParams::new(1.0, 0.5, 0.0, 1.0, SectorMap::Identity).is_err());
        assert!(HbgtParams::new(-1.0, 0.5, 1e-3, 1.0, SectorMap::Identity).is_err());
        assert!(HbgtParams::new(1.0, 0.5, 1e-3, 1.0, SectorMap::Clip { rho: 0.0 }).is_err());
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let obj = nonconvex_bench(3, 2, 0).unwrap();
        let net = build_cycle(4, 1.0, true).unwrap();
        let s = SimState::random(4, 1, 1.0, 0);
        assert!(matches!(
            rhs(&s, &net, &obj, &params(1.0, 0.0)),
            Err(DynamicsError::Shape(_))
        ));
    }

    #[test]
    fn trajectory_csv_layout() {
        let data = Dataset::new(vec![vec![0.0], vec![1.0]], vec![1.0, 3.0]).unwrap();
        let obj = crate::objectives::linreg_objective(&PartitionedDataset {
            nodes: vec![data.clone(), data],
        })
        .unwrap();
        let sched = SwitchingSchedule::fixed(build_cycle(2, 1.0, false).unwrap());
        let rec = Recorder {
            interval: 100,
            reference: Some(Reference::from_minimizer(
                &obj,
                obj.known_minimizer().unwrap(),
            )),
            ..Recorder::default()
        };
        let p = HbgtParams::new(0.05, 0.3, 1e-3, 0.5, SectorMap::Identity).unwrap();
        let traj = run(&sched, &obj, &p, &Array2::zeros((2, 2)), &rec).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t,cost,consensus_residual,gt_residual,lyapunov,optimality_gap"
        );
        assert_eq!(lines.count(), 6);
    }
}
