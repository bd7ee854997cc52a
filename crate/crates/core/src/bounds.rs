//! The impulsive Pachpatte inequality and the bounds built on it.
//!
//! For `u ≤ n + ∫f u + ∫f ∫g u + Σ β_k ∫_{window k} u` the bound is
//! `n(t) Π_{t_k<t} C_k exp(Φ(t) − Φ(t_α))` with `Φ(t) = ∫_0^t f(s)[1 + ∫_0^s g]`
//! and `α` the last impulse strictly before `t` (`t_0 = 0`). Taking `α` by
//! the strict inequality keeps the bound valid at `t = t_k`, where the
//! trajectory is left-continuous.
//!
//! All integrals in this module use composite eight-point Gauss–Legendre
//! panels on a grid aligned with the impulse times and window endpoints.
//! [`maximal_solution`] solves the hypothesis with equality by the trapezoid
//! rule instead, so it is an independent check on [`pachpatte_bound`].

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::linalg::{axpy, inf_norm};
use crate::model::{ImpulseSchedule, ImpulsiveProblem, LipschitzData, ScalarFn, Violation};
use crate::quadrature::{aligned_grid, gauss_legendre, trapezoid, CumulativeIntegral};
use crate::semigroup::SemigroupBound;
use crate::solver::{solve_mild, Discretization, PicardControl};
use crate::trajectory::ZeroHistory;
use crate::{Error, Result};

/// Gauss–Legendre panels on `[0, T]` used by [`pachpatte_bound`].
pub const DEFAULT_PANELS: usize = 2048;

/// Data of the impulsive Pachpatte inequality on `[0, T]`.
#[derive(Clone)]
pub struct PachpatteInstance {
    /// Positive and nondecreasing.
    pub n: ScalarFn,
    pub f: ScalarFn,
    pub g: ScalarFn,
    pub impulse_times: Vec<f64>,
    pub beta: Vec<f64>,
    pub theta: Vec<f64>,
    pub tau: Vec<f64>,
    pub horizon: f64,
}

impl fmt::Debug for PachpatteInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PachpatteInstance")
            .field("impulse_times", &self.impulse_times)
            .field("beta", &self.beta)
            .field("theta", &self.theta)
            .field("tau", &self.tau)
            .field("horizon", &self.horizon)
            .finish_non_exhaustive()
    }
}

const SAMPLE_CHECKS: usize = 1024;

impl PachpatteInstance {
    pub fn without_impulses(n: ScalarFn, f: ScalarFn, g: ScalarFn, horizon: f64) -> Self {
        Self {
            n,
            f,
            g,
            impulse_times: Vec::new(),
            beta: Vec::new(),
            theta: Vec::new(),
            tau: Vec::new(),
            horizon,
        }
    }

    pub fn schedule(&self) -> ImpulseSchedule {
        ImpulseSchedule::new(self.impulse_times.clone(), self.theta.clone(), self.tau.clone())
    }

    pub fn impulse_count(&self) -> usize {
        self.impulse_times.len()
    }

    /// Grid on `[0, T]` with every impulse time and window endpoint as a node.
    pub fn grid(&self, step: f64) -> Vec<f64> {
        aligned_grid(0.0, self.horizon, &self.schedule().breakpoints(), step)
    }

    /// Window constraints plus sampled sign and monotonicity checks.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            out.push(Violation::NonPositive {
                what: "horizon",
                value: self.horizon,
            });
            return out;
        }
        out.extend(self.schedule().violations(self.horizon));
        if self.beta.len() != self.impulse_count() {
            out.push(Violation::ScheduleLength {
                what: "beta",
                len: self.beta.len(),
                expected: self.impulse_count(),
            });
        }
        for (k, &b) in self.beta.iter().enumerate() {
            if !(b >= 0.0) {
                out.push(Violation::Negative {
                    what: format!("beta_{}", k + 1),
                    value: b,
                });
            }
        }
        let mut prev_n = f64::NEG_INFINITY;
        let (mut n_bad, mut dec_bad, mut f_bad, mut g_bad) = (false, false, false, false);
        for i in 0..=SAMPLE_CHECKS {
            let t = self.horizon * i as f64 / SAMPLE_CHECKS as f64;
            let (n, f, g) = ((self.n)(t), (self.f)(t), (self.g)(t));
            if !(n > 0.0) && !n_bad {
                n_bad = true;
                out.push(Violation::NonPositive { what: "n", value: n });
            }
            if n < prev_n - 1e-12 * prev_n.abs() && !dec_bad {
                dec_bad = true;
                out.push(Violation::Decreasing { what: "n", at: t });
            }
            prev_n = n;
            for (bad, what, value) in [(&mut f_bad, "f", f), (&mut g_bad, "g", g)] {
                if !(value >= 0.0) && !*bad {
                    *bad = true;
                    out.push(Violation::Negative {
                        what: what.into(),
                        value,
                    });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub ck: Vec<f64>,
    /// Number of impulse times strictly before the query time.
    pub alpha_index: usize,
    pub value: f64,
}

/// `Φ` and the `C_k` of an instance, tabulated once so that the bound is
/// cheap to evaluate at many times.
pub struct PreparedBound<'a> {
    inst: &'a PachpatteInstance,
    g_int: CumulativeIntegral,
    phi: CumulativeIntegral,
    ck: Vec<f64>,
}

impl<'a> PreparedBound<'a> {
    pub fn new(inst: &'a PachpatteInstance, panels: usize) -> Result<Self> {
        let violations = inst.violations();
        if !violations.is_empty() {
            return Err(Error::InvalidProblem(violations));
        }
        if panels == 0 {
            return Err(Error::Setting {
                name: "panels",
                reason: "need at least one panel".into(),
            });
        }
        let nodes = inst.grid(inst.horizon / panels as f64);
        let g = &*inst.g;
        let g_int = CumulativeIntegral::new(nodes.clone(), g);
        let integrand = |s: f64| (inst.f)(s) * (1.0 + g_int.value(s, g));
        let phi = CumulativeIntegral::new(nodes, &integrand);
        let mut prepared = Self {
            inst,
            g_int,
            phi,
            ck: Vec::new(),
        };
        prepared.ck = (1..=inst.impulse_count()).map(|k| prepared.evaluate_ck(k)).collect();
        Ok(prepared)
    }

    fn integrand(&self, s: f64) -> f64 {
        (self.inst.f)(s) * (1.0 + self.g_int.value(s, &*self.inst.g))
    }

    /// `Φ(s) = ∫_0^s f(σ)[1 + ∫_0^σ g]`.
    pub fn phi(&self, s: f64) -> f64 {
        self.phi.value(s, &|x| self.integrand(x))
    }

    fn evaluate_ck(&self, k: usize) -> f64 {
        let times = &self.inst.impulse_times;
        let prev = if k == 1 { 0.0 } else { times[k - 2] };
        let tk = times[k - 1];
        let p0 = self.phi(prev);
        let direct = libm::exp(self.phi(tk) - p0);
        let (lo, hi) = (tk - self.inst.tau[k - 1], tk - self.inst.theta[k - 1]);
        if !(lo < hi) {
            return direct;
        }
        let mut nodes = vec![lo];
        nodes.extend(self.phi.nodes().iter().copied().filter(|&s| s > lo && s < hi));
        nodes.push(hi);
        let window: f64 = nodes
            .windows(2)
            .map(|w| gauss_legendre(&|s| libm::exp(self.phi(s) - p0), w[0], w[1]))
            .sum();
        direct + self.inst.beta[k - 1] * window
    }

    pub fn ck(&self) -> &[f64] {
        &self.ck
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(t >= 0.0 && t <= self.inst.horizon) {
            return Err(Error::Domain {
                t,
                lo: 0.0,
                hi: self.inst.horizon,
            });
        }
        Ok(())
    }

    fn growth_with(&self, t: f64, impulses: usize) -> f64 {
        let t_alpha = if impulses == 0 {
            0.0
        } else {
            self.inst.impulse_times[impulses - 1]
        };
        let product: f64 = self.ck[..impulses].iter().product();
        product * libm::exp(self.phi(t) - self.phi(t_alpha))
    }

    /// `Π_{t_k<t} C_k exp(Φ(t) − Φ(t_α))`.
    pub fn growth(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        let alpha = self.inst.impulse_times.partition_point(|&tk| tk < t);
        Ok(self.growth_with(t, alpha))
    }

    /// The growth factor at the horizon, which dominates it on all of `[0, T]`.
    pub fn uniform_growth(&self) -> f64 {
        self.growth(self.inst.horizon).expect("horizon is in range")
    }

    pub fn report(&self, t: f64) -> Result<BoundReport> {
        self.check_time(t)?;
        let alpha = self.inst.impulse_times.partition_point(|&tk| tk < t);
        Ok(BoundReport {
            ck: self.ck.clone(),
            alpha_index: alpha,
            value: (self.inst.n)(t) * self.growth_with(t, alpha),
        })
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        Ok(self.report(t)?.value)
    }

    /// Limit of the bound from the right; differs from [`value`](Self::value)
    /// only at impulse times.
    pub fn value_right(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        let alpha = self.inst.impulse_times.partition_point(|&tk| tk <= t);
        Ok((self.inst.n)(t) * self.growth_with(t, alpha))
    }
}

/// `C_k` for 1-based `k`.
pub fn compute_ck(inst: &PachpatteInstance, k: usize) -> Result<f64> {
    let m = inst.impulse_count();
    if k == 0 || k > m {
        return Err(Error::Index { index: k, count: m });
    }
    Ok(PreparedBound::new(inst, DEFAULT_PANELS)?.ck[k - 1])
}

pub fn pachpatte_bound(inst: &PachpatteInstance, t: f64) -> Result<BoundReport> {
    PreparedBound::new(inst, DEFAULT_PANELS)?.report(t)
}

/// Discrete solution of the inequality hypothesis taken with equality.
#[derive(Debug, Clone, PartialEq)]
pub struct MaximalSolution {
    pub nodes: Vec<f64>,
    /// Left-continuous values.
    pub left: Vec<f64>,
    /// Right limits (equal to `left` away from impulse times).
    pub right: Vec<f64>,
    /// Corrective sweeps after the forward pass.
    pub sweeps: usize,
}

const SWEEP_TOLERANCE: f64 = 1e-12;
const MAX_SWEEPS: usize = 1_000_000;

struct OracleData {
    n: Vec<f64>,
    f: Vec<f64>,
    g: Vec<f64>,
    /// Impulse index (0-based) at each node.
    impulse_at: Vec<Option<usize>>,
    /// Node indices of the window endpoints.
    windows: Vec<(usize, usize)>,
}

fn node_index(grid: &[f64], t: f64) -> Result<usize> {
    grid.binary_search_by(|x| x.total_cmp(&t))
        .map_err(|_| Error::Structure(format!("grid lacks the node {t}")))
}

/// `∫_{window} u` by the trapezoid rule, with right limits at the left end of
/// each step.
fn window_sum(nodes: &[f64], left: &[f64], right: &[f64], (a, b): (usize, usize)) -> f64 {
    (a..b)
        .map(|i| 0.5 * (nodes[i + 1] - nodes[i]) * (right[i] + left[i + 1]))
        .sum()
}

/// Solves `u(t) = n(t) + ∫f u + ∫f ∫g u + Σ_{t_k<t} β_k ∫_{window k} u` on
/// `grid` with the trapezoid rule.
///
/// The discrete relation is lower triangular, so a forward pass solves it
/// exactly (each node needs one scalar division for its own trapezoid
/// weight). Jacobi sweeps of the full discrete operator are then repeated
/// until they change nothing beyond round-off, which confirms the fixed point.
pub fn maximal_solution(inst: &PachpatteInstance, grid: &[f64]) -> Result<MaximalSolution> {
    let violations = inst.violations();
    if !violations.is_empty() {
        return Err(Error::InvalidProblem(violations));
    }
    if grid.len() < 2 || grid[0] != 0.0 || *grid.last().unwrap() != inst.horizon {
        return Err(Error::Structure("grid must run from 0 to the horizon".into()));
    }
    if !grid.windows(2).all(|w| w[1] > w[0]) {
        return Err(Error::Structure("grid is not strictly increasing".into()));
    }
    let schedule = inst.schedule();
    let mut impulse_at = vec![None; grid.len()];
    let mut windows = Vec::with_capacity(inst.impulse_count());
    for k in 1..=inst.impulse_count() {
        impulse_at[node_index(grid, schedule.time(k))?] = Some(k - 1);
        let (lo, hi) = schedule.window(k);
        windows.push((node_index(grid, lo)?, node_index(grid, hi)?));
    }
    let data = OracleData {
        n: grid.iter().map(|&t| (inst.n)(t)).collect(),
        f: grid.iter().map(|&t| (inst.f)(t)).collect(),
        g: grid.iter().map(|&t| (inst.g)(t)).collect(),
        impulse_at,
        windows,
    };

    let (mut left, mut right) = forward_pass(inst, grid, &data)?;
    let mut sweeps = 0;
    loop {
        let (l2, r2) = sweep(inst, grid, &data, &left, &right);
        sweeps += 1;
        let scale = left.iter().chain(&right).fold(1.0f64, |m, v| m.max(v.abs()));
        let change = left
            .iter()
            .zip(&l2)
            .chain(right.iter().zip(&r2))
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        left = l2;
        right = r2;
        if !change.is_finite() || !scale.is_finite() {
            return Err(Error::Divergence { sweeps });
        }
        if change <= SWEEP_TOLERANCE * scale {
            break;
        }
        if sweeps >= MAX_SWEEPS {
            return Err(Error::Divergence { sweeps });
        }
    }
    Ok(MaximalSolution {
        nodes: grid.to_vec(),
        left,
        right,
        sweeps,
    })
}

fn forward_pass(inst: &PachpatteInstance, x: &[f64], d: &OracleData) -> Result<(Vec<f64>, Vec<f64>)> {
    let len = x.len();
    let (mut u, mut v) = (vec![0.0; len], vec![0.0; len]);
    u[0] = d.n[0];
    v[0] = u[0];
    // running ∫f u, ∫g u, ∫f(∫g u), and the impulse sum
    let (mut a, mut b, mut c, mut s) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..len - 1 {
        let hh = 0.5 * (x[i + 1] - x[i]);
        let (fi, fj, gi, gj) = (d.f[i], d.f[i + 1], d.g[i], d.g[i + 1]);
        let known = d.n[i + 1] + a + hh * fi * v[i] + c + hh * fi * b + hh * fj * (b + hh * gi * v[i]) + s;
        let weight = 1.0 - hh * fj - hh * hh * fj * gj;
        if !(weight > 0.0) {
            return Err(Error::Divergence { sweeps: 0 });
        }
        u[i + 1] = known / weight;
        a += hh * (fi * v[i] + fj * u[i + 1]);
        let b_next = b + hh * (gi * v[i] + gj * u[i + 1]);
        c += hh * (fi * b + fj * b_next);
        b = b_next;
        v[i + 1] = u[i + 1];
        if let Some(k) = d.impulse_at[i + 1] {
            let jump = inst.beta[k] * window_sum(x, &u, &v, d.windows[k]);
            v[i + 1] += jump;
            s += jump;
        }
        if !u[i + 1].is_finite() || !v[i + 1].is_finite() {
            return Err(Error::Divergence { sweeps: 0 });
        }
    }
    Ok((u, v))
}

/// One Jacobi application of the discrete operator.
fn sweep(inst: &PachpatteInstance, x: &[f64], d: &OracleData, u: &[f64], v: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let len = x.len();
    let jumps: Vec<f64> = (0..inst.impulse_count())
        .map(|k| inst.beta[k] * window_sum(x, u, v, d.windows[k]))
        .collect();
    let (mut nu, mut nv) = (vec![0.0; len], vec![0.0; len]);
    let (mut a, mut b, mut c, mut s) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..len {
        if i > 0 {
            let hh = 0.5 * (x[i] - x[i - 1]);
            a += hh * (d.f[i - 1] * v[i - 1] + d.f[i] * u[i]);
            let b_next = b + hh * (d.g[i - 1] * v[i - 1] + d.g[i] * u[i]);
            c += hh * (d.f[i - 1] * b + d.f[i] * b_next);
            b = b_next;
        }
        nu[i] = d.n[i] + a + c + s;
        nv[i] = nu[i];
        if let Some(k) = d.impulse_at[i] {
            nv[i] += jumps[k];
            s += jumps[k];
        }
    }
    (nu, nv)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateReport {
    /// `Σ_k 2 b M L_G D_k`.
    pub lhs: f64,
    /// `lhs < 1`.
    pub pass: bool,
}

pub fn existence_certificate(
    problem: &ImpulsiveProblem,
    lip: &LipschitzData,
    sg: &SemigroupBound,
) -> Result<CertificateReport> {
    if lip.d.len() != problem.impulse_count() {
        return Err(Error::Structure(format!(
            "{} jump Lipschitz constants for {} impulses",
            lip.d.len(),
            problem.impulse_count()
        )));
    }
    let b = problem.horizon;
    let lhs: f64 = lip.d.iter().map(|&d| 2.0 * b * sg.m * lip.l_g * d).sum();
    Ok(CertificateReport { lhs, pass: lhs < 1.0 })
}

/// Pachpatte data of the solution estimate: `f = M N_V`, `g = N_U`,
/// `β_k = M L_G D_k` (or the tilde moduli for parameter dependence).
fn growth_instance(
    problem: &ImpulsiveProblem,
    lip: &LipschitzData,
    sg: &SemigroupBound,
    tilde: bool,
) -> Result<PachpatteInstance> {
    if lip.d.len() != problem.impulse_count() {
        return Err(Error::Structure(format!(
            "{} jump Lipschitz constants for {} impulses",
            lip.d.len(),
            problem.impulse_count()
        )));
    }
    let m = sg.m;
    let (n_v, l_g) = if tilde {
        (lip.n_v_tilde.clone(), lip.l_g_tilde)
    } else {
        (lip.n_v.clone(), lip.l_g)
    };
    Ok(PachpatteInstance {
        n: crate::model::constant(1.0),
        f: alloc::sync::Arc::new(move |t| m * n_v(t)),
        g: lip.n_u.clone(),
        impulse_times: problem.schedule.times.clone(),
        beta: lip.d.iter().map(|&d| m * l_g * d).collect(),
        theta: problem.schedule.theta.clone(),
        tau: problem.schedule.tau.clone(),
        horizon: problem.horizon,
    })
}

/// Growth factor `Π C_k exp(∫ M N_V [1 + ∫ N_U])` at `t`, or horizon-uniform
/// when `t` is `None`.
pub fn growth_factor(
    problem: &ImpulsiveProblem,
    lip: &LipschitzData,
    sg: &SemigroupBound,
    tilde: bool,
    t: Option<f64>,
) -> Result<(f64, Vec<f64>)> {
    let inst = growth_instance(problem, lip, sg, tilde)?;
    let prepared = PreparedBound::new(&inst, DEFAULT_PANELS)?;
    let growth = match t {
        Some(t) => prepared.growth(t)?,
        None => prepared.uniform_growth(),
    };
    Ok((growth, prepared.ck().to_vec()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AprioriBound {
    /// `𝒦`.
    pub value: f64,
    pub history_norm: f64,
    /// `∫_0^b M ‖V(s, 0, ∫_0^s U(s, σ, 0) dσ)‖ ds`.
    pub drift_term: f64,
    /// `Σ_k M ‖I_k(∫_{window k} G(s, 0) ds)‖`.
    pub jump_term: f64,
    pub ck: Vec<f64>,
    pub growth: f64,
}

/// `𝒦 = (M‖ς‖ + 𝓗 + 𝒬) Π C_k exp(∫ M N_V [1 + ∫ N_U])`, horizon-uniform.
/// The drift term uses the trapezoid rule on the solver grid of `disc`.
pub fn apriori_bound(
    problem: &ImpulsiveProblem,
    lip: &LipschitzData,
    sg: &SemigroupBound,
    disc: &Discretization,
) -> Result<AprioriBound> {
    disc.check()?;
    let n = problem.dimension;
    let m = sg.m;
    let zero = ZeroHistory::new(n, problem.delay);

    let history_grid = aligned_grid(-problem.delay, 0.0, &[], disc.step);
    let history_norm = history_grid
        .iter()
        .map(|&t| inf_norm(&(problem.history)(t)))
        .fold(problem.history_sup_norm(4096), f64::max);

    let grid = aligned_grid(0.0, problem.horizon, &problem.schedule.breakpoints(), disc.step);
    let drift: Vec<f64> = grid
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let mut z = vec![0.0; n];
            let row: Vec<Vec<f64>> = grid[..=i].iter().map(|&sig| (problem.kernel)(s, sig, &zero)).collect();
            for j in 0..i {
                let half = 0.5 * (grid[j + 1] - grid[j]);
                axpy(half, &row[j], &mut z);
                axpy(half, &row[j + 1], &mut z);
            }
            m * inf_norm(&(problem.drift)(s, &zero, &z))
        })
        .collect();
    let drift_term = trapezoid(&grid, &drift);

    let mut jump_term = 0.0;
    for k in 1..=problem.impulse_count() {
        let (lo, hi) = problem.schedule.window(k);
        let mut integral = vec![0.0; n];
        if lo < hi {
            let nodes: Vec<f64> = core::iter::once(lo)
                .chain(grid.iter().copied().filter(|&s| s > lo && s < hi))
                .chain(core::iter::once(hi))
                .collect();
            for (j, slot) in integral.iter_mut().enumerate() {
                *slot = nodes
                    .windows(2)
                    .map(|w| gauss_legendre(&|s| (problem.window_map)(s, &zero)[j], w[0], w[1]))
                    .sum();
            }
        }
        jump_term += m * inf_norm(&(problem.jumps[k - 1])(&integral));
    }

    let (growth, ck) = growth_factor(problem, lip, sg, false, None)?;
    Ok(AprioriBound {
        value: (m * history_norm + drift_term + jump_term) * growth,
        history_norm,
        drift_term,
        jump_term,
        ck,
        growth,
    })
}

fn nonnegative(name: &str, value: f64) -> Result<()> {
    if value >= 0.0 {
        Ok(())
    } else {
        Err(Error::Parameter {
            name: name.into(),
            reason: format!("must be nonnegative, got {value}"),
        })
    }
}

/// `M ‖ς_1 − ς_2‖ · growth`, for solutions that differ only in the history.
pub fn dependence_initial_bound(
    problem: &ImpulsiveProblem,
    lip: &LipschitzData,
    sg: &SemigroupBound,
    history_gap: f64,
    t: Option<f64>,
) -> Result<f64> {
    nonnegative("history_gap", history_gap)?;
    let (growth, _) = growth_factor(problem, lip, sg, false, t)?;
    Ok(sg.m * history_gap * growth)
}

/// `(b M Ω_1 |ρ_1 − ρ_2| + Σ_k 2 b M Ω_2 D_k |μ_1 − μ_2|) · growth` with the
/// parameter-uniform moduli `Ñ_V`, `L̃_G`.
pub fn dependence_parameter_bound(
    problem: &ImpulsiveProblem,
    lip: &LipschitzData,
    sg: &SemigroupBound,
    rho_gap: f64,
    mu_gap: f64,
    t: Option<f64>,
) -> Result<f64> {
    nonnegative("rho_gap", rho_gap)?;
    nonnegative("mu_gap", mu_gap)?;
    let (growth, _) = growth_factor(problem, lip, sg, true, t)?;
    let b = problem.horizon;
    let m = sg.m;
    let jumps: f64 = lip.d.iter().map(|&d| 2.0 * b * m * lip.omega_2 * d * mu_gap).sum();
    Ok((b * m * lip.omega_1 * rho_gap + jumps) * growth)
}

/// `(M 𝒥 + b M 𝒫 + Σ_k M 𝒩_k) · growth`, reading `𝒥`, `𝒫`, `𝒩_k` from `lip`.
pub fn dependence_function_bound(
    problem: &ImpulsiveProblem,
    lip: &LipschitzData,
    sg: &SemigroupBound,
    t: Option<f64>,
) -> Result<f64> {
    for (name, v) in [("J", lip.j), ("P", lip.p)] {
        nonnegative(name, v)?;
    }
    for &v in &lip.n_k {
        nonnegative("N_k", v)?;
    }
    let (growth, _) = growth_factor(problem, lip, sg, false, t)?;
    let m = sg.m;
    let jumps: f64 = lip.n_k.iter().map(|&nk| m * nk).sum();
    Ok((m * lip.j + problem.horizon * m * lip.p + jumps) * growth)
}

/// Which data the two problems of [`check_dependence`] may differ in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DependenceGap {
    Initial {
        history_gap: f64,
    },
    Parameter {
        rho_gap: f64,
        mu_gap: f64,
    },
    /// Uses `P`, `J` and `N_k` from the Lipschitz data.
    Function,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DependenceReport {
    pub empirical: f64,
    pub theoretical: f64,
    pub residual_a: f64,
    pub residual_b: f64,
    /// `empirical ≤ theoretical + 2 (residual_a + residual_b)`.
    pub dominated: bool,
}

/// Solves both problems and compares their Σ-distance with the matching
/// horizon-uniform bound. `lip` must be valid for both problems.
pub fn check_dependence(
    gap: DependenceGap,
    problem_a: &ImpulsiveProblem,
    problem_b: &ImpulsiveProblem,
    lip: &LipschitzData,
    sg: &SemigroupBound,
    disc: &Discretization,
    control: &PicardControl,
) -> Result<DependenceReport> {
    let theoretical = match gap {
        DependenceGap::Initial { history_gap } => dependence_initial_bound(problem_a, lip, sg, history_gap, None)?,
        DependenceGap::Parameter { rho_gap, mu_gap } => {
            dependence_parameter_bound(problem_a, lip, sg, rho_gap, mu_gap, None)?
        }
        DependenceGap::Function => dependence_function_bound(problem_a, lip, sg, None)?,
    };
    let (wa, ra) = solve_mild(problem_a, disc, control)?;
    let (wb, rb) = solve_mild(problem_b, disc, control)?;
    let empirical = wa.sigma_diff(&wb)?;
    let budget = 2.0 * (ra.final_residual + rb.final_residual);
    Ok(DependenceReport {
        empirical,
        theoretical,
        residual_a: ra.final_residual,
        residual_b: rb.final_residual,
        dominated: empirical <= theoretical + budget,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::catalog::entry;
    use crate::model::constant;
    use crate::semigroup::{operator_norm_bound, DEFAULT_NORM_SAMPLES};
    use alloc::sync::Arc;

    fn one_impulse(f: f64, beta: f64) -> PachpatteInstance {
        PachpatteInstance {
            n: constant(1.0),
            f: constant(f),
            g: constant(0.0),
            impulse_times: vec![1.0],
            beta: vec![beta],
            theta: vec![0.25],
            tau: vec![0.75],
            horizon: 2.0,
        }
    }

    #[test]
    fn ck_examples() {
        assert!((compute_ck(&one_impulse(0.0, 2.0), 1).unwrap() - 2.0).abs() < 1e-14);
        let e = compute_ck(&one_impulse(1.0, 0.0), 1).unwrap();
        assert!((e - core::f64::consts::E).abs() < 1e-14);
        assert!(matches!(
            compute_ck(&one_impulse(1.0, 0.0), 2),
            Err(Error::Index { .. })
        ));
    }

    #[test]
    fn ck_window_term_matches_closed_form() {
        // f = 1, g = 0: window term is ∫_{0.25}^{0.75} e^s ds
        let c = compute_ck(&one_impulse(1.0, 1.5), 1).unwrap();
        let want = libm::exp(1.0) + 1.5 * (libm::exp(0.75) - libm::exp(0.25));
        assert!((c - want).abs() < 1e-13 * want);
    }

    #[test]
    fn bound_examples() {
        let flat = PachpatteInstance::without_impulses(constant(5.0), constant(0.0), constant(0.0), 2.0);
        assert_eq!(pachpatte_bound(&flat, 1.3).unwrap().value, 5.0);
        let gronwall = PachpatteInstance::without_impulses(constant(1.0), constant(1.0), constant(0.0), 2.0);
        let r = pachpatte_bound(&gronwall, 1.0).unwrap();
        assert!((r.value - core::f64::consts::E).abs() < 1e-14);
        assert_eq!(r.alpha_index, 0);
        let mut jump = one_impulse(0.0, 2.0);
        jump.theta = vec![0.0];
        jump.tau = vec![0.5];
        let r = pachpatte_bound(&jump, 1.5).unwrap();
        assert!((r.value - 2.0).abs() < 1e-14);
        assert_eq!(r.alpha_index, 1);
        assert!(pachpatte_bound(&jump, 2.5).is_err());
    }

    #[test]
    fn alpha_is_strict_at_impulse_times() {
        let inst = one_impulse(1.0, 0.0);
        let p = PreparedBound::new(&inst, 256).unwrap();
        let at = p.report(1.0).unwrap();
        assert_eq!(at.alpha_index, 0);
        assert!((at.value - core::f64::consts::E).abs() < 1e-13);
        assert!((p.value_right(1.0).unwrap() - core::f64::consts::E).abs() < 1e-13);
    }

    #[test]
    fn invalid_instances_are_rejected() {
        let mut inst = one_impulse(1.0, 1.0);
        inst.n = Arc::new(|t| 2.0 - t);
        assert!(matches!(
            PreparedBound::new(&inst, 16),
            Err(Error::InvalidProblem(v)) if v.iter().any(|x| matches!(x, Violation::Decreasing { .. }))
        ));
        let mut inst = one_impulse(1.0, 1.0);
        inst.tau = vec![1.5];
        assert!(PreparedBound::new(&inst, 16).is_err());
        let mut inst = one_impulse(1.0, -1.0);
        inst.g = constant(-0.1);
        assert_eq!(inst.violations().len(), 2);
    }

    #[test]
    fn maximal_solution_examples() {
        let flat = PachpatteInstance::without_impulses(Arc::new(|t| 1.0 + t), constant(0.0), constant(0.0), 1.0);
        let grid = flat.grid(0.01);
        let u = maximal_solution(&flat, &grid).unwrap();
        for (i, &t) in grid.iter().enumerate() {
            assert_eq!(u.left[i], 1.0 + t);
        }
        let exp = PachpatteInstance::without_impulses(constant(1.0), constant(1.0), constant(0.0), 1.0);
        let grid = exp.grid(1e-3);
        let u = maximal_solution(&exp, &grid).unwrap();
        for (i, &t) in grid.iter().enumerate() {
            assert!((u.left[i] - libm::exp(t)).abs() <= 1e-4);
        }
        assert_eq!(u.sweeps, 1);
    }

    #[test]
    fn maximal_solution_tracks_one_impulse_exactly() {
        // g = 0 and one impulse: the bound is attained, so the discrete
        // oracle must agree with it to trapezoid accuracy
        let inst = one_impulse(0.8, 1.5);
        let h = 1e-3;
        let grid = inst.grid(h);
        let u = maximal_solution(&inst, &grid).unwrap();
        let p = PreparedBound::new(&inst, DEFAULT_PANELS).unwrap();
        for (i, &t) in grid.iter().enumerate() {
            let gap = (u.left[i] - p.value(t).unwrap()).abs();
            assert!(gap <= 20.0 * h * h, "t = {t}: {gap}");
            let gap = (u.right[i] - p.value_right(t).unwrap()).abs();
            assert!(gap <= 20.0 * h * h, "t = {t}+: {gap}");
        }
    }

    #[test]
    fn maximal_solution_needs_aligned_grid() {
        let inst = one_impulse(1.0, 1.0);
        let grid = aligned_grid(0.0, 2.0, &[], 0.3);
        assert!(matches!(maximal_solution(&inst, &grid), Err(Error::Structure(_))));
    }

    #[test]
    fn maximal_solution_reports_divergence() {
        let inst = PachpatteInstance::without_impulses(constant(1.0), constant(3000.0), constant(0.0), 1.0);
        assert!(matches!(
            maximal_solution(&inst, &inst.grid(1e-3)),
            Err(Error::Divergence { .. })
        ));
    }

    fn paper(lg: f64) -> (ImpulsiveProblem, LipschitzData, SemigroupBound) {
        let e = entry("paper_example").unwrap().with("lg", lg).unwrap();
        let sg = operator_norm_bound(&e.problem.generator, e.problem.horizon, DEFAULT_NORM_SAMPLES).unwrap();
        (e.problem, e.lipschitz, sg)
    }

    #[test]
    fn certificate_examples() {
        let (p, lip, sg) = paper(0.01);
        let c = existence_certificate(&p, &lip, &sg).unwrap();
        assert!(c.pass && (c.lhs - 0.295_56).abs() < 1e-4, "{c:?}");
        let (p, lip, sg) = paper(1.0);
        let c = existence_certificate(&p, &lip, &sg).unwrap();
        assert!(!c.pass && (c.lhs - 29.556).abs() < 1e-2);
        let (p, lip, sg) = paper(0.0);
        assert_eq!(
            existence_certificate(&p, &lip, &sg).unwrap(),
            CertificateReport { lhs: 0.0, pass: true }
        );
    }

    #[test]
    fn apriori_vanishes_for_zero_data() {
        let mut p = entry("pure_semigroup").unwrap().problem;
        p.history = Arc::new(|_| vec![0.0]);
        let lip = LipschitzData::constant(0.0, 0.0, 0.0, vec![]);
        let sg = SemigroupBound::given(1.0, 2.0);
        let k = apriori_bound(&p, &lip, &sg, &Discretization::new(0.01).unwrap()).unwrap();
        assert_eq!(k.value, 0.0);
    }

    #[test]
    fn apriori_collapses_without_growth() {
        let (p, mut lip, sg) = paper(0.0);
        lip.n_v = constant(0.0);
        let k = apriori_bound(&p, &lip, &sg, &Discretization::new(0.01).unwrap()).unwrap();
        assert!(k.ck.iter().all(|&c| c == 1.0));
        assert_eq!(k.growth, 1.0);
        let sum = sg.m * k.history_norm + k.drift_term + k.jump_term;
        assert_eq!(k.value, sum);
        assert_eq!(k.history_norm, 1.0);
    }

    #[test]
    fn dependence_bounds_vanish_with_gaps() {
        let (p, lip, sg) = paper(0.01);
        assert_eq!(dependence_initial_bound(&p, &lip, &sg, 0.0, None).unwrap(), 0.0);
        assert_eq!(dependence_parameter_bound(&p, &lip, &sg, 0.0, 0.0, None).unwrap(), 0.0);
        assert_eq!(dependence_function_bound(&p, &lip, &sg, None).unwrap(), 0.0);
        let one = dependence_initial_bound(&p, &lip, &sg, 0.1, None).unwrap();
        let two = dependence_initial_bound(&p, &lip, &sg, 0.2, None).unwrap();
        assert_eq!(two / one, 2.0);
        assert!(dependence_initial_bound(&p, &lip, &sg, -1.0, None).is_err());
    }

    #[test]
    fn parameter_bound_single_term() {
        let (p, mut lip, sg) = paper(0.01);
        lip.omega_2 = 0.0;
        let bound = dependence_parameter_bound(&p, &lip, &sg, 1.0, 0.7, None).unwrap();
        let (growth, _) = growth_factor(&p, &lip, &sg, true, None).unwrap();
        assert_eq!(bound, 2.0 * sg.m * lip.omega_1 * growth);
    }

    #[test]
    fn function_bound_reduces_to_m() {
        let p = entry("pure_semigroup").unwrap().problem;
        let mut lip = LipschitzData::constant(0.0, 0.0, 0.0, vec![]);
        lip.j = 1.0;
        let sg = operator_norm_bound(&p.generator, p.horizon, 64).unwrap();
        assert_eq!(dependence_function_bound(&p, &lip, &sg, None).unwrap(), sg.m);
    }

    #[test]
    fn per_t_growth_never_exceeds_uniform() {
        let (p, lip, sg) = paper(0.01);
        let (uniform, _) = growth_factor(&p, &lip, &sg, false, None).unwrap();
        for t in [0.0, 0.5, 1.0, 1.5, 2.0] {
            let (g, _) = growth_factor(&p, &lip, &sg, false, Some(t)).unwrap();
            assert!(g <= uniform * (1.0 + 1e-14));
        }
    }

    #[test]
    fn identical_problems_are_dominated() {
        let (p, lip, sg) = paper(0.01);
        let r = check_dependence(
            DependenceGap::Initial { history_gap: 0.0 },
            &p,
            &p,
            &lip,
            &sg,
            &Discretization::new(0.05).unwrap(),
            &PicardControl::default(),
        )
        .unwrap();
        assert_eq!(r.empirical, 0.0);
        assert!(r.dominated);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn instance(f0: f64, g0: f64, betas: Vec<f64>, n0: f64) -> PachpatteInstance {
            let m = betas.len();
            let times: Vec<f64> = (1..=m).map(|k| k as f64 / (m + 1) as f64).collect();
            let spacing = 1.0 / (m + 1) as f64;
            PachpatteInstance {
                n: Arc::new(move |t| n0 + 0.1 * t),
                f: Arc::new(move |t| f0 * (1.0 + 0.5 * libm::sin(3.0 * t))),
                g: constant(g0),
                impulse_times: times,
                beta: betas,
                theta: vec![0.1 * spacing; m],
                tau: vec![0.8 * spacing; m],
                horizon: 1.0,
            }
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]

            #[test]
            fn ck_at_least_one(f0 in 0.0f64..1.0, g0 in 0.0f64..1.0,
                               betas in proptest::collection::vec(0.0f64..2.0, 1..4)) {
                let inst = instance(f0, g0, betas, 1.0);
                let p = PreparedBound::new(&inst, 256).unwrap();
                for &c in p.ck() {
                    prop_assert!(c >= 1.0);
                }
            }

            #[test]
            fn reduces_to_gronwall(c in 0.0f64..2.0, t in 0.0f64..1.0, n0 in 0.1f64..3.0) {
                let inst = PachpatteInstance::without_impulses(constant(n0), constant(c), constant(0.0), 1.0);
                let v = PreparedBound::new(&inst, 64).unwrap().value(t).unwrap();
                let want = n0 * libm::exp(c * t);
                prop_assert!((v - want).abs() <= 1e-13 * want);
            }

            #[test]
            fn monotone_in_data(f0 in 0.0f64..1.0, g0 in 0.0f64..1.0, df in 0.0f64..0.5,
                                betas in proptest::collection::vec(0.0f64..2.0, 0..3),
                                db in 0.0f64..1.0, t in 0.0f64..1.0) {
                let lo = instance(f0, g0, betas.clone(), 1.0);
                let hi = instance(f0 + df, g0 + df, betas.iter().map(|b| b + db).collect(), 1.5);
                let a = PreparedBound::new(&lo, 256).unwrap().value(t).unwrap();
                let b = PreparedBound::new(&hi, 256).unwrap().value(t).unwrap();
                prop_assert!(a <= b * (1.0 + 1e-14));
            }

            #[test]
            fn maximal_solution_below_bound(f0 in 0.0f64..1.0, g0 in 0.0f64..1.0,
                                            betas in proptest::collection::vec(0.0f64..2.0, 0..3)) {
                let inst = instance(f0, g0, betas, 1.0);
                let h = 1.0 / 512.0;
                let u = maximal_solution(&inst, &inst.grid(h)).unwrap();
                let p = PreparedBound::new(&inst, 512).unwrap();
                for (i, &t) in u.nodes.iter().enumerate() {
                    let tol = 1e-8 + 10.0 * h * h;
                    prop_assert!(u.left[i] <= p.value(t).unwrap() + tol);
                    prop_assert!(u.right[i] <= p.value_right(t).unwrap() + tol);
                }
            }
        }
    }
}
