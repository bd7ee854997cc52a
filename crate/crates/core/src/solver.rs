//! Mild solutions by segment-wise Picard iteration.
//!
//! On each segment `[t_k, t_{k+1}]` the solver iterates
//!
//! ```text
//! w(t) ↦ T(t − t_k) w(t_k⁺) + ∫_{t_k}^t T(t − s) V(s, w_s, ∫_0^s U(s, σ, w_σ) dσ) ds
//! ```
//!
//! on a grid aligned with the impulse times and jump windows, then applies the
//! integral jump at `t_{k+1}` and moves on. Both integrals use the composite
//! trapezoid rule; the convolution is propagated step by step as
//! `Y_{i+1} = E_i (Y_i + Δ_i/2 F_i) + Δ_i/2 F_{i+1}` with `E_i = e^{AΔ_i}`.
//!
//! [`mild_residual`] re-evaluates the global mild formula for a finished
//! trajectory on a twice finer grid.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{axpy, inf_dist, Matrix};
use crate::model::{validate, ImpulsiveProblem};
use crate::quadrature::aligned_grid;
use crate::semigroup::propagator;
use crate::trajectory::{Block, History, PiecewiseTrajectory, TrajectoryView};
use crate::{Error, Result};

/// Composite quadrature rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Quadrature {
    #[default]
    Trapezoid,
}

impl Quadrature {
    pub fn name(self) -> &'static str {
        match self {
            Quadrature::Trapezoid => "trapezoid",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "trapezoid" => Some(Quadrature::Trapezoid),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discretization {
    /// Nominal node spacing `h`.
    pub step: f64,
    pub quadrature: Quadrature,
}

impl Discretization {
    pub fn new(step: f64) -> Result<Self> {
        let disc = Self {
            step,
            quadrature: Quadrature::Trapezoid,
        };
        disc.check()?;
        Ok(disc)
    }

    pub fn check(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::Setting {
                name: "step",
                reason: format!("must be positive and finite, got {}", self.step),
            });
        }
        Ok(())
    }

    /// Node grid of segment `k` (`[t_k, t_{k+1}]`, `t_0 = 0`, `t_{m+1} = b`).
    pub fn segment_grid(&self, problem: &ImpulsiveProblem, k: usize) -> Vec<f64> {
        let (a, e) = segment_span(problem, k);
        aligned_grid(a, e, &breakpoints(problem), self.step)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardControl {
    /// Stop once successive iterates differ by at most this much (sup over nodes).
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for PicardControl {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 200,
        }
    }
}

impl PicardControl {
    pub fn check(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::Setting {
                name: "tolerance",
                reason: format!("must be positive, got {}", self.tolerance),
            });
        }
        if self.max_iterations == 0 {
            return Err(Error::Setting {
                name: "max_iterations",
                reason: "must be at least 1".into(),
            });
        }
        Ok(())
    }
}

/// First Picard iterate on a segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitialIterate {
    /// `w(t) ≡ w(t_k⁺)`.
    #[default]
    Constant,
    /// `w(t) = w(t_k⁺) + (t − t_k)` in every component.
    Ramp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub iterations_per_segment: Vec<usize>,
    pub final_residual: f64,
    /// Applied jumps `Δw(t_k)`, in impulse order.
    pub jumps: Vec<Vec<f64>>,
}

fn segment_span(problem: &ImpulsiveProblem, k: usize) -> (f64, f64) {
    let m = problem.impulse_count();
    let a = problem.schedule.time(k);
    let e = if k == m {
        problem.horizon
    } else {
        problem.schedule.time(k + 1)
    };
    (a, e)
}

/// `lo`, the grid nodes strictly inside `(lo, hi)`, and `hi`.
fn clip_nodes(grid: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(grid.len() + 2);
    out.push(lo);
    out.extend(grid.iter().copied().filter(|&s| s > lo && s < hi));
    out.push(hi);
    out
}

/// Times where `s ↦ w_s` can jump when the problem reads point delays `0`
/// and `−r`: the impulse times and their delayed copies `t_k + r`.
fn split_points(problem: &ImpulsiveProblem) -> Vec<f64> {
    let times = &problem.schedule.times;
    let delayed = times
        .iter()
        .map(|&t| t + problem.delay)
        .filter(|&t| t < problem.horizon);
    times.iter().copied().chain(delayed).collect()
}

/// Grid breakpoints: the schedule's plus the delayed impulse times.
fn breakpoints(problem: &ImpulsiveProblem) -> Vec<f64> {
    let mut pts = problem.schedule.breakpoints();
    pts.extend(split_points(problem).into_iter().skip(problem.impulse_count()));
    pts
}

/// Trapezoid of node values over `nodes`, accumulated into `acc`.
/// `value(i, right)` is the integrand at node `i` with `w_s` read as `w_{s⁺}`
/// (opening an interval) or `w_{s⁻}` (closing one). Both sides are requested
/// only at the first node and where `split(i)` holds.
fn trapezoid_split<V, S>(nodes: &[f64], split: S, mut value: V, acc: &mut [f64])
where
    V: FnMut(usize, bool) -> Vec<f64>,
    S: Fn(usize) -> bool,
{
    if nodes.len() < 2 {
        return;
    }
    let mut open = value(0, true);
    for i in 1..nodes.len() {
        let half = 0.5 * (nodes[i] - nodes[i - 1]);
        let close = value(i, false);
        axpy(half, &open, acc);
        axpy(half, &close, acc);
        if i + 1 < nodes.len() {
            open = if split(i) { value(i, true) } else { close };
        }
    }
}

/// Trapezoid of `f(s, w_s)` over `nodes`.
fn trapezoid_views<F>(traj: &PiecewiseTrajectory, nodes: &[f64], splits: &[f64], f: &mut F, acc: &mut [f64])
where
    F: FnMut(f64, &dyn History) -> Vec<f64>,
{
    trapezoid_split(
        nodes,
        |i| splits.contains(&nodes[i]),
        |i, right| f(nodes[i], &traj.view(nodes[i], right)),
        acc,
    );
}

fn check_covers(traj: &PiecewiseTrajectory, t: f64) -> Result<()> {
    if !(t >= 0.0 && t <= traj.covered_until()) {
        return Err(Error::Domain {
            t,
            lo: 0.0,
            hi: traj.covered_until(),
        });
    }
    Ok(())
}

/// `∫_0^t U(t, s, w_s) ds` by the trapezoid rule on the trajectory's nodes.
pub fn volterra_term(problem: &ImpulsiveProblem, traj: &PiecewiseTrajectory, t: f64) -> Result<Vec<f64>> {
    check_covers(traj, t)?;
    let mut acc = vec![0.0; problem.dimension];
    let splits = split_points(problem);
    let mut f = |s: f64, w: &dyn History| (problem.kernel)(t, s, w);
    for block in &traj.blocks()[1..] {
        let start = block.times[0];
        if start >= t {
            break;
        }
        let end = (*block.times.last().unwrap()).min(t);
        trapezoid_views(traj, &clip_nodes(&block.times, start, end), &splits, &mut f, &mut acc);
    }
    Ok(acc)
}

fn check_impulse(problem: &ImpulsiveProblem, traj: &PiecewiseTrajectory, k: usize) -> Result<()> {
    let m = problem.impulse_count();
    if k == 0 || k > m {
        return Err(Error::Index { index: k, count: m });
    }
    check_covers(traj, problem.schedule.time(k))
}

/// `∫_{t_k−τ_k}^{t_k−θ_k} G(s, w_s) ds` for 1-based `k`; exactly zero for an
/// empty window.
pub fn window_integral(problem: &ImpulsiveProblem, traj: &PiecewiseTrajectory, k: usize) -> Result<Vec<f64>> {
    check_impulse(problem, traj, k)?;
    let (lo, hi) = problem.schedule.window(k);
    let mut acc = vec![0.0; problem.dimension];
    if lo == hi {
        return Ok(acc);
    }
    // the window lies in segment k − 1, which is block k
    let block = &traj.blocks()[k];
    let mut f = |s: f64, w: &dyn History| (problem.window_map)(s, w);
    trapezoid_views(
        traj,
        &clip_nodes(&block.times, lo, hi),
        &split_points(problem),
        &mut f,
        &mut acc,
    );
    Ok(acc)
}

/// `Δw(t_k) = I_k(∫ G)`.
pub fn jump_value(problem: &ImpulsiveProblem, traj: &PiecewiseTrajectory, k: usize) -> Result<Vec<f64>> {
    let integral = window_integral(problem, traj, k)?;
    Ok((problem.jumps[k - 1])(&integral))
}

/// Per-segment data that stays fixed across Picard iterations.
struct SegmentFrame {
    nodes: Vec<f64>,
    /// `e^{AΔ_i}` for each step.
    steps: Vec<Matrix>,
    /// `∫_0^{t_k} U(s_i, σ, w_σ) dσ` over the finished prefix.
    prefix: Vec<Vec<f64>>,
    /// Nodes where one-sided integrand values may differ.
    split: Vec<bool>,
}

impl SegmentFrame {
    fn new(problem: &ImpulsiveProblem, prefix: &PiecewiseTrajectory, nodes: Vec<f64>) -> Result<Self> {
        let steps = nodes
            .windows(2)
            .map(|w| propagator(&problem.generator, w[1] - w[0]))
            .collect::<Result<Vec<_>>>()?;
        let splits = split_points(problem);
        let prefix_integrals = nodes
            .iter()
            .map(|&t| {
                let mut acc = vec![0.0; problem.dimension];
                let mut f = |s: f64, w: &dyn History| (problem.kernel)(t, s, w);
                for block in &prefix.blocks()[1..] {
                    trapezoid_views(prefix, &block.times, &splits, &mut f, &mut acc);
                }
                acc
            })
            .collect();
        let split = nodes.iter().map(|s| splits.contains(s)).collect();
        Ok(Self {
            nodes,
            steps,
            prefix: prefix_integrals,
            split,
        })
    }
}

/// Drift at every node of one block, as `(opening, closing)` values: the
/// first reads `w_{s⁺}` and starts a step, the second reads `w_{s⁻}` and ends
/// one. `prefix[i]` is the Volterra integral before the block.
fn drift_values(
    problem: &ImpulsiveProblem,
    traj: &PiecewiseTrajectory,
    nodes: &[f64],
    split: &[bool],
    prefix: &[Vec<f64>],
) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let left: Vec<TrajectoryView<'_>> = nodes.iter().map(|&s| traj.view(s, false)).collect();
    let right: Vec<TrajectoryView<'_>> = nodes.iter().map(|&s| traj.view(s, true)).collect();
    let mut open = Vec::with_capacity(nodes.len());
    let mut close = Vec::with_capacity(nodes.len());
    for (i, &t) in nodes.iter().enumerate() {
        let mut z = prefix[i].clone();
        trapezoid_split(
            &nodes[..=i],
            |j| split[j],
            |j, r| (problem.kernel)(t, nodes[j], if r { &right[j] } else { &left[j] }),
            &mut z,
        );
        if i == 0 {
            let o = (problem.drift)(t, &right[0], &z);
            close.push(o.clone());
            open.push(o);
            continue;
        }
        let c = (problem.drift)(t, &left[i], &z);
        open.push(if split[i] {
            (problem.drift)(t, &right[i], &z)
        } else {
            c.clone()
        });
        close.push(c);
    }
    (open, close)
}

/// One application of the segment map. `traj` must end with the current
/// iterate as its last block.
fn mild_map(problem: &ImpulsiveProblem, traj: &PiecewiseTrajectory, frame: &SegmentFrame, x0: &[f64]) -> Vec<f64> {
    let n = problem.dimension;
    let nodes = &frame.nodes;
    let (open, close) = drift_values(problem, traj, nodes, &frame.split, &frame.prefix);

    let mut out = Vec::with_capacity(nodes.len() * n);
    out.extend_from_slice(x0);
    let mut y = x0.to_vec();
    for i in 0..nodes.len() - 1 {
        let half = 0.5 * (nodes[i + 1] - nodes[i]);
        axpy(half, &open[i], &mut y);
        y = frame.steps[i].mul_vec(&y);
        axpy(half, &close[i + 1], &mut y);
        out.extend_from_slice(&y);
    }
    out
}

fn initial_values(nodes: &[f64], x0: &[f64], init: InitialIterate) -> Vec<f64> {
    let a = nodes[0];
    nodes
        .iter()
        .flat_map(|&t| {
            let slope = match init {
                InitialIterate::Constant => 0.0,
                InitialIterate::Ramp => t - a,
            };
            x0.iter().map(move |&x| x + slope)
        })
        .collect()
}

/// Picard iteration on segment `k` from the right limit `x0`.
fn iterate_segment(
    problem: &ImpulsiveProblem,
    traj: &mut PiecewiseTrajectory,
    k: usize,
    x0: &[f64],
    disc: &Discretization,
    control: &PicardControl,
    init: InitialIterate,
) -> Result<(Block, usize)> {
    let frame = SegmentFrame::new(problem, traj, disc.segment_grid(problem, k))?;
    let mut block = Block::new(frame.nodes.clone(), initial_values(&frame.nodes, x0, init));
    let mut gap = f64::INFINITY;
    for iteration in 1..=control.max_iterations {
        traj.push_block(block)?;
        let next = mild_map(problem, traj, &frame, x0);
        block = traj.pop_block().expect("segment block was just pushed");
        gap = inf_dist(&next, &block.values);
        block.values = next;
        if !gap.is_finite() {
            break;
        }
        if gap <= control.tolerance {
            return Ok((block, iteration));
        }
    }
    Err(Error::NonConvergence {
        segment: k,
        iterations: control.max_iterations,
        gap,
    })
}

fn start_value(
    problem: &ImpulsiveProblem,
    prefix: &PiecewiseTrajectory,
    k: usize,
) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
    if prefix.blocks().len() != k + 1 {
        return Err(Error::Structure(format!(
            "segment {k} needs a prefix of {} blocks, got {}",
            k + 1,
            prefix.blocks().len()
        )));
    }
    if k > problem.impulse_count() {
        return Err(Error::Index {
            index: k,
            count: problem.impulse_count(),
        });
    }
    if k == 0 {
        let hist = &prefix.blocks()[0];
        return Ok((hist.value(hist.len() - 1, problem.dimension).to_vec(), None));
    }
    let jump = jump_value(problem, prefix, k)?;
    let mut x0 = prefix.eval(problem.schedule.time(k))?;
    axpy(1.0, &jump, &mut x0);
    Ok((x0, Some(jump)))
}

/// Solves segment `k` given the prefix on `[-r, t_k]`, starting from the
/// constant iterate. Returns the segment block and the iteration count.
pub fn solve_segment(
    problem: &ImpulsiveProblem,
    prefix: &PiecewiseTrajectory,
    k: usize,
    disc: &Discretization,
    control: &PicardControl,
) -> Result<(Block, usize)> {
    solve_segment_with(problem, prefix, k, disc, control, InitialIterate::Constant)
}

pub fn solve_segment_with(
    problem: &ImpulsiveProblem,
    prefix: &PiecewiseTrajectory,
    k: usize,
    disc: &Discretization,
    control: &PicardControl,
    init: InitialIterate,
) -> Result<(Block, usize)> {
    disc.check()?;
    control.check()?;
    let (x0, _) = start_value(problem, prefix, k)?;
    let mut work = prefix.clone();
    iterate_segment(problem, &mut work, k, &x0, disc, control, init)
}

/// History block sampled from `ς` on the aligned grid of `[-r, 0]`.
pub fn history_block(problem: &ImpulsiveProblem, disc: &Discretization) -> Block {
    let times = aligned_grid(-problem.delay, 0.0, &[], disc.step);
    let values = times.iter().flat_map(|&t| (problem.history)(t)).collect();
    Block::new(times, values)
}

/// Solves the whole problem from the constant initial iterate.
pub fn solve_mild(
    problem: &ImpulsiveProblem,
    disc: &Discretization,
    control: &PicardControl,
) -> Result<(PiecewiseTrajectory, SolveReport)> {
    solve_mild_with(problem, disc, control, InitialIterate::Constant)
}

pub fn solve_mild_with(
    problem: &ImpulsiveProblem,
    disc: &Discretization,
    control: &PicardControl,
    init: InitialIterate,
) -> Result<(PiecewiseTrajectory, SolveReport)> {
    let violations = validate(problem);
    if !violations.is_empty() {
        return Err(Error::InvalidProblem(violations));
    }
    disc.check()?;
    control.check()?;
    let mut traj = PiecewiseTrajectory::new(
        problem.dimension,
        problem.delay,
        problem.horizon,
        problem.schedule.times.clone(),
        history_block(problem, disc),
    )?;
    let m = problem.impulse_count();
    let mut iterations = Vec::with_capacity(m + 1);
    let mut jumps = Vec::with_capacity(m);
    for k in 0..=m {
        let (x0, jump) = start_value(problem, &traj, k)?;
        jumps.extend(jump);
        let (block, count) = iterate_segment(problem, &mut traj, k, &x0, disc, control, init)?;
        traj.push_block(block)?;
        iterations.push(count);
    }
    let final_residual = mild_residual(problem, &traj, disc)?;
    Ok((
        traj,
        SolveReport {
            iterations_per_segment: iterations,
            final_residual,
            jumps,
        },
    ))
}

/// Verification grid of one block: its nodes, with every gap split into at
/// least two pieces no longer than `step / 2`. Also returns where the
/// original nodes landed.
fn refine(times: &[f64], step: f64) -> (Vec<f64>, Vec<usize>) {
    let mut grid = vec![times[0]];
    let mut marks = vec![0];
    for w in times.windows(2) {
        let pieces = libm::ceil((w[1] - w[0]) / (0.5 * step)).max(2.0) as usize;
        let h = (w[1] - w[0]) / pieces as f64;
        grid.extend((1..pieces).map(|i| w[0] + i as f64 * h));
        grid.push(w[1]);
        marks.push(grid.len() - 1);
    }
    (grid, marks)
}

/// Sup-norm defect of the mild formula on `traj`, including `w = ς` on the
/// history block. All integrals are recomputed on a verification grid that
/// halves every trajectory step (and is no coarser than `disc.step / 2`).
pub fn mild_residual(problem: &ImpulsiveProblem, traj: &PiecewiseTrajectory, disc: &Discretization) -> Result<f64> {
    disc.check()?;
    if !traj.is_complete() || traj.dimension() != problem.dimension || traj.impulse_times() != problem.schedule.times {
        return Err(Error::Structure(
            "trajectory does not match the problem or does not cover the horizon".into(),
        ));
    }
    let n = problem.dimension;
    let blocks = traj.blocks();
    let mut defect: f64 = 0.0;

    let hist = &blocks[0];
    for (i, &t) in hist.times.iter().enumerate() {
        defect = defect.max(inf_dist(hist.value(i, n), &(problem.history)(t)));
    }

    let refined: Vec<(Vec<f64>, Vec<usize>)> = blocks[1..].iter().map(|b| refine(&b.times, disc.step)).collect();

    let splits = split_points(problem);
    let mut y = (problem.history)(0.0);
    for (j, (grid, marks)) in refined.iter().enumerate() {
        let prefix: Vec<Vec<f64>> = grid
            .iter()
            .map(|&t| {
                let mut z = vec![0.0; n];
                let mut f = |s: f64, w: &dyn History| (problem.kernel)(t, s, w);
                for (earlier, _) in &refined[..j] {
                    trapezoid_views(traj, earlier, &splits, &mut f, &mut z);
                }
                z
            })
            .collect();
        let split: Vec<bool> = grid.iter().map(|s| splits.contains(s)).collect();
        let (open, close) = drift_values(problem, traj, grid, &split, &prefix);

        if j > 0 {
            let (lo, hi) = problem.schedule.window(j);
            let mut integral = vec![0.0; n];
            if lo < hi {
                let mut f = |s: f64, w: &dyn History| (problem.window_map)(s, w);
                let (prev, _) = &refined[j - 1];
                trapezoid_views(traj, &clip_nodes(prev, lo, hi), &splits, &mut f, &mut integral);
            }
            axpy(1.0, &(problem.jumps[j - 1])(&integral), &mut y);
        }

        let block = &blocks[j + 1];
        let mut next_mark = 0;
        for i in 0..grid.len() {
            if i > 0 {
                let half = 0.5 * (grid[i] - grid[i - 1]);
                axpy(half, &open[i - 1], &mut y);
                y = propagator(&problem.generator, grid[i] - grid[i - 1])?.mul_vec(&y);
                axpy(half, &close[i], &mut y);
            }
            if marks.get(next_mark) == Some(&i) {
                defect = defect.max(inf_dist(block.value(next_mark, n), &y));
                next_mark += 1;
            }
        }
    }
    Ok(defect)
}
