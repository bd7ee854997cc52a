//! Problem data for impulsive delay integro-differential equations.
//!
//! An [`ImpulsiveProblem`] carries the generator matrix, the nonlinearities
//! `V`, `U`, `G`, the jump maps `I_k`, the impulse schedule, the delay, the
//! history and the horizon. The constants feeding the bound evaluators live
//! separately in [`LipschitzData`], since they are supplied alongside a
//! problem rather than derived from it.

pub mod catalog;

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::linalg::Matrix;
use crate::trajectory::{History, ZeroHistory};

/// `V(t, w_t, z)`
pub type DriftFn = Arc<dyn Fn(f64, &dyn History, &[f64]) -> Vec<f64> + Send + Sync>;
/// `U(t, s, w_s)`
pub type KernelFn = Arc<dyn Fn(f64, f64, &dyn History) -> Vec<f64> + Send + Sync>;
/// `G(s, w_s)`
pub type WindowFn = Arc<dyn Fn(f64, &dyn History) -> Vec<f64> + Send + Sync>;
/// `I_k(x)`
pub type JumpFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
/// History `ς(t)` on `[-r, 0]`.
pub type CurveFn = Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>;
/// Scalar function of time (Lipschitz moduli).
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Impulse instants `t_1 < … < t_m` and the integration windows
/// `[t_k - τ_k, t_k - θ_k]` of the jump conditions.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ImpulseSchedule {
    pub times: Vec<f64>,
    pub theta: Vec<f64>,
    pub tau: Vec<f64>,
}

impl ImpulseSchedule {
    pub fn new(times: Vec<f64>, theta: Vec<f64>, tau: Vec<f64>) -> Self {
        Self { times, theta, tau }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `t_k` for 1-based `k`; `t_0 = 0`.
    pub fn time(&self, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.times[k - 1]
        }
    }

    /// Window `[t_k - τ_k, t_k - θ_k]` for 1-based `k`.
    pub fn window(&self, k: usize) -> (f64, f64) {
        let t = self.times[k - 1];
        (t - self.tau[k - 1], t - self.theta[k - 1])
    }

    /// Impulse times and window endpoints, the nodes every aligned grid needs.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts = Vec::with_capacity(3 * self.len());
        for k in 1..=self.len() {
            let (a, b) = self.window(k);
            pts.extend([self.time(k), a, b]);
        }
        pts
    }

    /// Number of impulse times strictly before `t`.
    pub fn count_before(&self, t: f64) -> usize {
        self.times.partition_point(|&tk| tk < t)
    }

    /// Checks ordering within `(0, horizon)` and `0 ≤ θ_k ≤ τ_k ≤ t_k − t_{k−1}`.
    pub fn violations(&self, horizon: f64) -> Vec<Violation> {
        let mut out = Vec::new();
        let m = self.len();
        for (what, len) in [("theta", self.theta.len()), ("tau", self.tau.len())] {
            if len != m {
                out.push(Violation::ScheduleLength { what, len, expected: m });
            }
        }
        for k in 1..=m {
            let t = self.time(k);
            if !(t > 0.0 && t < horizon) {
                out.push(Violation::ImpulseOutOfRange { k, t, horizon });
            }
            if k > 1 && t <= self.time(k - 1) {
                out.push(Violation::ImpulseOrder {
                    k,
                    previous: self.time(k - 1),
                    t,
                });
            }
            if k <= self.theta.len() && k <= self.tau.len() {
                let (theta, tau) = (self.theta[k - 1], self.tau[k - 1]);
                let gap = t - self.time(k - 1);
                if !(0.0 <= theta && theta <= tau && tau <= gap) {
                    out.push(Violation::Window { k, theta, tau, gap });
                }
            }
        }
        out
    }
}

/// A full problem instance.
#[derive(Clone)]
pub struct ImpulsiveProblem {
    pub dimension: usize,
    /// Generator `A` of the semigroup `T(t) = e^{At}`.
    pub generator: Matrix,
    pub drift: DriftFn,
    pub kernel: KernelFn,
    pub window_map: WindowFn,
    pub jumps: Vec<JumpFn>,
    pub schedule: ImpulseSchedule,
    pub delay: f64,
    pub history: CurveFn,
    pub horizon: f64,
}

impl fmt::Debug for ImpulsiveProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ImpulsiveProblem")
            .field("dimension", &self.dimension)
            .field("generator", &self.generator)
            .field("schedule", &self.schedule)
            .field("delay", &self.delay)
            .field("horizon", &self.horizon)
            .finish_non_exhaustive()
    }
}

impl ImpulsiveProblem {
    pub fn impulse_count(&self) -> usize {
        self.schedule.len()
    }

    /// Sup norm of the history, sampled on `samples + 1` uniform points.
    pub fn history_sup_norm(&self, samples: usize) -> f64 {
        let samples = samples.max(1);
        (0..=samples)
            .map(|i| -self.delay + self.delay * i as f64 / samples as f64)
            .map(|t| crate::linalg::inf_norm(&(self.history)(t)))
            .fold(0.0, f64::max)
    }
}

/// A breached standing assumption. Violations are data: [`validate`]
/// collects all of them instead of stopping at the first.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Violation {
    #[error("state dimension must be positive")]
    ZeroDimension,
    #[error("generator is {rows}x{cols}, expected {n}x{n}")]
    GeneratorShape { rows: usize, cols: usize, n: usize },
    #[error("{what} must be positive, got {value}")]
    NonPositive { what: &'static str, value: f64 },
    #[error("{what} has {len} entries, expected {expected}")]
    ScheduleLength {
        what: &'static str,
        len: usize,
        expected: usize,
    },
    #[error("impulse time t_{k} = {t} is not inside (0, {horizon})")]
    ImpulseOutOfRange { k: usize, t: f64, horizon: f64 },
    #[error("impulse times not increasing at k = {k}: t_{{k-1}} = {previous}, t_k = {t}")]
    ImpulseOrder { k: usize, previous: f64, t: f64 },
    #[error("window at k = {k} violates 0 <= theta ({theta}) <= tau ({tau}) <= t_k - t_(k-1) ({gap})")]
    Window { k: usize, theta: f64, tau: f64, gap: f64 },
    #[error("history appears discontinuous near t = {at} (sampled jump {jump})")]
    HistoryDiscontinuity { at: f64, jump: f64 },
    #[error("{what} returned a vector of length {len}, expected {expected}")]
    OutputLength { what: String, len: usize, expected: usize },
    #[error("{what} must be nonnegative, got {value}")]
    Negative { what: String, value: f64 },
    #[error("{what} decreases near t = {at}")]
    Decreasing { what: &'static str, at: f64 },
}

/// Reports every violated invariant of `problem` (empty means valid).
pub fn validate(problem: &ImpulsiveProblem) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = problem.dimension;
    if n == 0 {
        out.push(Violation::ZeroDimension);
    }
    let g = &problem.generator;
    if g.rows() != n || g.cols() != n {
        out.push(Violation::GeneratorShape {
            rows: g.rows(),
            cols: g.cols(),
            n,
        });
    }
    for (what, value) in [("delay", problem.delay), ("horizon", problem.horizon)] {
        if !(value > 0.0 && value.is_finite()) {
            out.push(Violation::NonPositive { what, value });
        }
    }
    out.extend(problem.schedule.violations(problem.horizon));
    if problem.jumps.len() != problem.schedule.len() {
        out.push(Violation::ScheduleLength {
            what: "jump maps",
            len: problem.jumps.len(),
            expected: problem.schedule.len(),
        });
    }
    if !out.is_empty() {
        // the remaining checks call into the problem functions
        return out;
    }

    let r = problem.delay;
    if let Some(v) = history_discontinuity(&*problem.history, r) {
        out.push(v);
    }

    let zero = ZeroHistory::new(n, r);
    let z = vec![0.0; n];
    let mut check = |what: String, len: usize| {
        if len != n {
            out.push(Violation::OutputLength { what, len, expected: n });
        }
    };
    check("history".into(), (problem.history)(-r).len());
    check("V".into(), (problem.drift)(0.0, &zero, &z).len());
    check("U".into(), (problem.kernel)(0.0, 0.0, &zero).len());
    check("G".into(), (problem.window_map)(0.0, &zero).len());
    for (k, jump) in problem.jumps.iter().enumerate() {
        check(format!("I_{}", k + 1), jump(&z).len());
    }
    out
}

/// Sampled continuity test: on a Lipschitz function the largest increment
/// shrinks with the grid; across a jump it does not.
fn history_discontinuity(history: &(dyn Fn(f64) -> Vec<f64> + Send + Sync), r: f64) -> Option<Violation> {
    let max_increment = |samples: usize| -> (f64, f64) {
        let mut prev = history(-r);
        let mut worst = (0.0, -r);
        for i in 1..=samples {
            let t = -r + r * i as f64 / samples as f64;
            let cur = history(t);
            let d = crate::linalg::inf_dist(&cur, &prev);
            if d > worst.0 {
                worst = (d, t);
            }
            prev = cur;
        }
        worst
    };
    let (coarse, _) = max_increment(256);
    let (fine, at) = max_increment(4096);
    if fine > 1e-8 && fine > 0.5 * coarse {
        Some(Violation::HistoryDiscontinuity { at, jump: fine })
    } else {
        None
    }
}

/// Constants and moduli feeding the existence, a-priori and dependence
/// bounds. The parameter factors of the perturbed-data hypotheses are
/// already folded into `n_v_tilde` and `l_g_tilde`.
#[derive(Clone)]
pub struct LipschitzData {
    /// Lipschitz modulus of `V` in `(w_t, z)`.
    pub n_v: ScalarFn,
    /// Lipschitz modulus of `U` in `w_s`.
    pub n_u: ScalarFn,
    /// Lipschitz constant of `G` in `w_s`.
    pub l_g: f64,
    /// Lipschitz constants `D_k` of the jump maps.
    pub d: Vec<f64>,
    /// Sensitivity of `V` to the parameter `ρ`.
    pub omega_1: f64,
    /// Sensitivity of `G` to the parameter `μ`.
    pub omega_2: f64,
    /// Lipschitz modulus of `V(·, ρ, ·, ·)` uniform in `ρ`.
    pub n_v_tilde: ScalarFn,
    /// Lipschitz constant of `G(·, μ, ·)` uniform in `μ`.
    pub l_g_tilde: f64,
    /// `sup ‖V − V̂‖`.
    pub p: f64,
    /// `sup ‖ς − ς̂‖`.
    pub j: f64,
    /// `sup ‖I_k − Î_k‖` per impulse.
    pub n_k: Vec<f64>,
}

impl fmt::Debug for LipschitzData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LipschitzData")
            .field("n_v(0)", &(self.n_v)(0.0))
            .field("n_u(0)", &(self.n_u)(0.0))
            .field("l_g", &self.l_g)
            .field("d", &self.d)
            .field("omega_1", &self.omega_1)
            .field("omega_2", &self.omega_2)
            .field("l_g_tilde", &self.l_g_tilde)
            .field("p", &self.p)
            .field("j", &self.j)
            .field("n_k", &self.n_k)
            .finish_non_exhaustive()
    }
}

pub fn constant(value: f64) -> ScalarFn {
    Arc::new(move |_| value)
}

impl LipschitzData {
    /// Constant moduli, no parameter or function perturbation.
    pub fn constant(n_v: f64, n_u: f64, l_g: f64, d: Vec<f64>) -> Self {
        let m = d.len();
        Self {
            n_v: constant(n_v),
            n_u: constant(n_u),
            l_g,
            d,
            omega_1: 0.0,
            omega_2: 0.0,
            n_v_tilde: constant(n_v),
            l_g_tilde: l_g,
            p: 0.0,
            j: 0.0,
            n_k: vec![0.0; m],
        }
    }

    pub fn impulse_count(&self) -> usize {
        self.d.len()
    }

    /// Pointwise maximum of two data sets: valid for both underlying problems.
    pub fn envelope(&self, other: &Self) -> Self {
        let max_fn = |a: &ScalarFn, b: &ScalarFn| -> ScalarFn {
            let (a, b) = (a.clone(), b.clone());
            Arc::new(move |t| a(t).max(b(t)))
        };
        let max_vec = |a: &[f64], b: &[f64]| -> Vec<f64> {
            (0..a.len().max(b.len()))
                .map(|i| a.get(i).copied().unwrap_or(0.0).max(b.get(i).copied().unwrap_or(0.0)))
                .collect()
        };
        Self {
            n_v: max_fn(&self.n_v, &other.n_v),
            n_u: max_fn(&self.n_u, &other.n_u),
            l_g: self.l_g.max(other.l_g),
            d: max_vec(&self.d, &other.d),
            omega_1: self.omega_1.max(other.omega_1),
            omega_2: self.omega_2.max(other.omega_2),
            n_v_tilde: max_fn(&self.n_v_tilde, &other.n_v_tilde),
            l_g_tilde: self.l_g_tilde.max(other.l_g_tilde),
            p: self.p.max(other.p),
            j: self.j.max(other.j),
            n_k: max_vec(&self.n_k, &other.n_k),
        }
    }

    /// Nonnegativity of every constant, and of the moduli sampled on `[0, horizon]`.
    pub fn violations(&self, horizon: f64, impulses: usize) -> Vec<Violation> {
        let mut out = Vec::new();
        for (what, len) in [("D_k", self.d.len()), ("N_k", self.n_k.len())] {
            if len != impulses {
                out.push(Violation::ScheduleLength {
                    what,
                    len,
                    expected: impulses,
                });
            }
        }
        let mut nonneg = |what: String, value: f64| {
            if !(value >= 0.0) {
                out.push(Violation::Negative { what, value });
            }
        };
        for (what, value) in [
            ("L_G", self.l_g),
            ("Omega_1", self.omega_1),
            ("Omega_2", self.omega_2),
            ("L_G~", self.l_g_tilde),
            ("P", self.p),
            ("J", self.j),
        ] {
            nonneg(what.into(), value);
        }
        for (k, &v) in self.d.iter().enumerate() {
            nonneg(format!("D_{}", k + 1), v);
        }
        for (k, &v) in self.n_k.iter().enumerate() {
            nonneg(format!("N_{}", k + 1), v);
        }
        const SAMPLES: usize = 256;
        for (what, f) in [("N_V", &self.n_v), ("N_U", &self.n_u), ("N_V~", &self.n_v_tilde)] {
            let worst = (0..=SAMPLES)
                .map(|i| f(horizon * i as f64 / SAMPLES as f64))
                .fold(f64::INFINITY, f64::min);
            nonneg(what.into(), worst);
        }
        out
    }
}
