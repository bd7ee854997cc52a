//! Left-continuous piecewise trajectories on `[-r, b]` and history segments.
//!
//! A [`PiecewiseTrajectory`] stores one history block on `[-r, 0]` followed by
//! one block per inter-impulse segment `[t_k, t_{k+1}]`. Consecutive segment
//! blocks share the impulse time as an endpoint: the last node of block `k`
//! holds `w(t_k⁻) = w(t_k)` and the first node of block `k + 1` holds the
//! right limit `w(t_k⁺)`. Between nodes values are linearly interpolated.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{inf_dist, inf_norm};
use crate::{Error, Result};

/// A function on `[-r, 0]`: the delayed state `w_t(θ) = w(t + θ)`.
pub trait History {
    fn delay(&self) -> f64;
    fn dimension(&self) -> usize;
    /// Value at `θ`; arguments outside `[-r, 0]` are clamped.
    fn at(&self, theta: f64) -> Vec<f64>;
    fn sup_norm(&self) -> f64;
}

/// The identically zero history.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroHistory {
    dimension: usize,
    delay: f64,
}

impl ZeroHistory {
    pub fn new(dimension: usize, delay: f64) -> Self {
        Self { dimension, delay }
    }
}

impl History for ZeroHistory {
    fn delay(&self) -> f64 {
        self.delay
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn at(&self, _theta: f64) -> Vec<f64> {
        vec![0.0; self.dimension]
    }

    fn sup_norm(&self) -> f64 {
        0.0
    }
}

/// Sampled history segment with linear interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct HistorySegment {
    dimension: usize,
    theta_grid: Vec<f64>,
    values: Vec<f64>,
}

impl HistorySegment {
    /// `theta_grid` must increase strictly from `-r < 0` to exactly `0`.
    pub fn new(theta_grid: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if theta_grid.len() < 2 || theta_grid.len() != values.len() {
            return Err(Error::Structure(format!(
                "history segment needs at least 2 samples and one value per sample (got {} points, {} values)",
                theta_grid.len(),
                values.len()
            )));
        }
        if !(theta_grid[0] < 0.0) || *theta_grid.last().unwrap() != 0.0 {
            return Err(Error::Structure("theta grid must run from -r < 0 to 0".into()));
        }
        if !theta_grid.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::Structure("theta grid is not strictly increasing".into()));
        }
        let dimension = values[0].len();
        if dimension == 0 || values.iter().any(|v| v.len() != dimension) {
            return Err(Error::Structure("history values have inconsistent length".into()));
        }
        Ok(Self {
            dimension,
            theta_grid,
            values: values.concat(),
        })
    }

    pub fn theta_grid(&self) -> &[f64] {
        &self.theta_grid
    }

    /// Sample `i`.
    pub fn value(&self, i: usize) -> &[f64] {
        &self.values[i * self.dimension..(i + 1) * self.dimension]
    }

    pub fn len(&self) -> usize {
        self.theta_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta_grid.is_empty()
    }
}

impl History for HistorySegment {
    fn delay(&self) -> f64 {
        -self.theta_grid[0]
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn at(&self, theta: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dimension];
        interpolate(&self.theta_grid, &self.values, self.dimension, theta, &mut out);
        out
    }

    fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Linear interpolation on a strictly increasing grid, clamped at the ends.
fn interpolate(times: &[f64], values: &[f64], n: usize, t: f64, out: &mut [f64]) {
    let last = times.len() - 1;
    let i = times.partition_point(|&x| x < t);
    if i == 0 {
        out.copy_from_slice(&values[..n]);
    } else if i > last {
        out.copy_from_slice(&values[last * n..]);
    } else if times[i] == t {
        out.copy_from_slice(&values[i * n..(i + 1) * n]);
    } else {
        let (t0, t1) = (times[i - 1], times[i]);
        let lambda = (t - t0) / (t1 - t0);
        let (a, b) = (&values[(i - 1) * n..i * n], &values[i * n..(i + 1) * n]);
        for j in 0..n {
            out[j] = a[j] + lambda * (b[j] - a[j]);
        }
    }
}

/// Nodes and flattened node values of one block.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub times: Vec<f64>,
    /// Row-major: node `i` occupies `values[i * n..(i + 1) * n]`.
    pub values: Vec<f64>,
}

impl Block {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Self {
        Self { times, values }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn value(&self, i: usize, n: usize) -> &[f64] {
        &self.values[i * n..(i + 1) * n]
    }
}

/// Left-continuous piecewise trajectory. Blocks are appended in order, so a
/// partially built trajectory (history plus the first few segments) is valid
/// and can be queried up to [`covered_until`](Self::covered_until).
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseTrajectory {
    dimension: usize,
    delay: f64,
    horizon: f64,
    impulse_times: Vec<f64>,
    blocks: Vec<Block>,
    right_limits: Vec<Vec<f64>>,
}

impl PiecewiseTrajectory {
    /// Starts a trajectory from its history block on `[-r, 0]`.
    pub fn new(dimension: usize, delay: f64, horizon: f64, impulse_times: Vec<f64>, history: Block) -> Result<Self> {
        if dimension == 0 || !(delay > 0.0) || !(horizon > 0.0) {
            return Err(Error::Structure(format!(
                "invalid trajectory frame: n = {dimension}, r = {delay}, b = {horizon}"
            )));
        }
        let mut traj = Self {
            dimension,
            delay,
            horizon,
            impulse_times,
            blocks: Vec::new(),
            right_limits: Vec::new(),
        };
        traj.push_block(history)?;
        Ok(traj)
    }

    /// Builds a complete trajectory, validating every block.
    pub fn from_blocks(
        dimension: usize,
        delay: f64,
        horizon: f64,
        impulse_times: Vec<f64>,
        blocks: Vec<Block>,
    ) -> Result<Self> {
        let mut it = blocks.into_iter();
        let history = it.next().ok_or_else(|| Error::Structure("no history block".into()))?;
        let mut traj = Self::new(dimension, delay, horizon, impulse_times, history)?;
        for block in it {
            traj.push_block(block)?;
        }
        if !traj.is_complete() {
            return Err(Error::Structure(format!(
                "expected {} blocks, got {}",
                traj.impulse_times.len() + 2,
                traj.blocks.len()
            )));
        }
        Ok(traj)
    }

    /// Start and end of block `j` (0 is the history block).
    fn block_span(&self, j: usize) -> (f64, f64) {
        let m = self.impulse_times.len();
        if j == 0 {
            return (-self.delay, 0.0);
        }
        let k = j - 1;
        let start = if k == 0 { 0.0 } else { self.impulse_times[k - 1] };
        let end = if k == m { self.horizon } else { self.impulse_times[k] };
        (start, end)
    }

    /// Appends the next block. Its span must be the next segment exactly;
    /// the first segment block must start from the history value at 0
    /// bit-exactly, and later blocks record their first value as the right
    /// limit at their impulse time.
    pub fn push_block(&mut self, block: Block) -> Result<()> {
        let j = self.blocks.len();
        let n = self.dimension;
        if j > self.impulse_times.len() + 1 {
            return Err(Error::Structure("trajectory already complete".into()));
        }
        let (start, end) = self.block_span(j);
        if block.len() < 2 || block.values.len() != n * block.len() {
            return Err(Error::Structure(format!(
                "block {j} needs at least 2 nodes with {n} values each"
            )));
        }
        if block.times[0] != start || *block.times.last().unwrap() != end {
            return Err(Error::Structure(format!(
                "block {j} spans [{}, {}], expected [{start}, {end}]",
                block.times[0],
                block.times.last().unwrap()
            )));
        }
        if !block.times.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::Structure(format!("block {j} times are not strictly increasing")));
        }
        if j == 1 {
            let hist = &self.blocks[0];
            if hist.value(hist.len() - 1, n) != block.value(0, n) {
                return Err(Error::Structure(
                    "first segment does not start from the history value at 0".into(),
                ));
            }
        }
        if j >= 2 {
            self.right_limits.push(block.value(0, n).to_vec());
        }
        self.blocks.push(block);
        Ok(())
    }

    /// Removes the most recent segment block (never the history block).
    pub fn pop_block(&mut self) -> Option<Block> {
        if self.blocks.len() <= 1 {
            return None;
        }
        if self.blocks.len() >= 3 {
            self.right_limits.pop();
        }
        self.blocks.pop()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn delay(&self) -> f64 {
        self.delay
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn impulse_times(&self) -> &[f64] {
        &self.impulse_times
    }

    /// History block followed by the segment blocks built so far.
    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// `w(t_k⁺)` for every impulse whose following block exists.
    pub fn right_limits(&self) -> &[Vec<f64>] {
        &self.right_limits
    }

    pub fn is_complete(&self) -> bool {
        self.blocks.len() == self.impulse_times.len() + 2
    }

    /// Right end of the last block present.
    pub fn covered_until(&self) -> f64 {
        self.block_span(self.blocks.len() - 1).1
    }

    /// `Δw(t_k) = w(t_k⁺) − w(t_k)` for 1-based `k`.
    pub fn jump(&self, k: usize) -> Result<Vec<f64>> {
        let count = self.right_limits.len();
        if k == 0 || k > count {
            return Err(Error::Index { index: k, count });
        }
        let left = self.eval(self.impulse_times[k - 1])?;
        Ok(self.right_limits[k - 1].iter().zip(&left).map(|(r, l)| r - l).collect())
    }

    fn check_domain(&self, t: f64, open_right: bool) -> Result<()> {
        let hi = self.covered_until();
        let inside = t >= -self.delay
            && if open_right && hi == self.horizon {
                t < hi
            } else {
                t <= hi
            };
        if inside {
            Ok(())
        } else {
            Err(Error::Domain { t, lo: -self.delay, hi })
        }
    }

    /// Left-continuous value into `out` (no domain check).
    pub(crate) fn eval_into(&self, t: f64, out: &mut [f64]) {
        let j = if t <= 0.0 {
            0
        } else {
            1 + self.impulse_times.partition_point(|&tk| tk < t)
        };
        let block = &self.blocks[j.min(self.blocks.len() - 1)];
        interpolate(&block.times, &block.values, self.dimension, t, out);
    }

    /// Right-limit-aware value into `out` (no domain check).
    pub(crate) fn eval_right_into(&self, t: f64, out: &mut [f64]) {
        if let Ok(k) = self.impulse_times.binary_search_by(|x| x.total_cmp(&t)) {
            if let Some(rl) = self.right_limits.get(k) {
                out.copy_from_slice(rl);
                return;
            }
        }
        self.eval_into(t, out);
    }

    /// Left-continuous value `w(t)`; at `t = t_k` this is `w(t_k⁻)`.
    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        self.check_domain(t, false)?;
        let mut out = vec![0.0; self.dimension];
        self.eval_into(t, &mut out);
        Ok(out)
    }

    /// Agrees with [`eval`](Self::eval) except at impulse times, where it
    /// returns the right limit.
    pub fn eval_right(&self, t: f64) -> Result<Vec<f64>> {
        self.check_domain(t, true)?;
        let mut out = vec![0.0; self.dimension];
        self.eval_right_into(t, &mut out);
        Ok(out)
    }

    /// Lazy `w_t`. With `right` set it is `w_{t⁺}`: every lag that lands on
    /// an impulse time reads the right limit there.
    pub fn view(&self, t: f64, right: bool) -> TrajectoryView<'_> {
        TrajectoryView { traj: self, t, right }
    }

    /// `w_t` sampled on the native nodes inside `[t − r, t]` plus both ends.
    pub fn history_segment(&self, t: f64) -> Result<HistorySegment> {
        if !(t >= 0.0 && t <= self.horizon) {
            return Err(Error::Domain {
                t,
                lo: 0.0,
                hi: self.horizon,
            });
        }
        self.check_domain(t, false)?;
        let lo = t - self.delay;
        let mut times: Vec<f64> = vec![lo];
        for block in &self.blocks {
            times.extend(block.times.iter().copied().filter(|&s| s > lo && s < t));
        }
        times.push(t);
        times.sort_by(f64::total_cmp);
        times.dedup();

        let n = self.dimension;
        let last = times.len() - 1;
        let mut theta = Vec::with_capacity(times.len());
        let mut values = Vec::with_capacity(times.len());
        let mut buf = vec![0.0; n];
        for (i, &s) in times.iter().enumerate() {
            // pin the ends; interior nodes that rebase onto them are dropped
            let th = match i {
                0 => -self.delay,
                i if i == last => 0.0,
                _ => s - t,
            };
            if i != last && (th >= 0.0 || theta.last().is_some_and(|&p| th <= p)) {
                continue;
            }
            self.eval_into(s, &mut buf);
            theta.push(th);
            values.push(buf.clone());
        }
        HistorySegment::new(theta, values)
    }

    /// Σ-norm: the largest node value over the segment blocks, right limits
    /// included; the history block is excluded.
    pub fn sigma_norm(&self) -> f64 {
        self.blocks[1..]
            .iter()
            .flat_map(|b| b.values.iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Sup gap per segment `[t_k, t_{k+1}]` on the union of both node grids.
    pub fn segment_gaps(&self, other: &Self) -> Result<Vec<f64>> {
        if self.dimension != other.dimension
            || self.horizon != other.horizon
            || self.impulse_times != other.impulse_times
        {
            return Err(Error::Structure(
                "trajectories differ in dimension, horizon or impulse times".into(),
            ));
        }
        if !self.is_complete() || !other.is_complete() {
            return Err(Error::Structure("trajectory does not cover the horizon".into()));
        }
        let n = self.dimension;
        let (mut a, mut b) = (vec![0.0; n], vec![0.0; n]);
        let mut gaps = Vec::with_capacity(self.blocks.len() - 1);
        for j in 1..self.blocks.len() {
            let mut times: Vec<f64> = self.blocks[j].times.clone();
            times.extend_from_slice(&other.blocks[j].times);
            times.sort_by(f64::total_cmp);
            times.dedup();
            let start = times[0];
            let mut gap: f64 = 0.0;
            for &s in &times {
                if s == start {
                    self.eval_right_into(s, &mut a);
                    other.eval_right_into(s, &mut b);
                } else {
                    self.eval_into(s, &mut a);
                    other.eval_into(s, &mut b);
                }
                gap = gap.max(inf_dist(&a, &b));
            }
            gaps.push(gap);
        }
        Ok(gaps)
    }

    /// Σ-norm of the difference of two trajectories with the same frame.
    pub fn sigma_diff(&self, other: &Self) -> Result<f64> {
        Ok(self.segment_gaps(other)?.into_iter().fold(0.0, f64::max))
    }
}

/// `w_t` read lazily from a trajectory.
#[derive(Debug, Clone, Copy)]
pub struct TrajectoryView<'a> {
    traj: &'a PiecewiseTrajectory,
    t: f64,
    right: bool,
}

impl History for TrajectoryView<'_> {
    fn delay(&self) -> f64 {
        self.traj.delay
    }

    fn dimension(&self) -> usize {
        self.traj.dimension
    }

    fn at(&self, theta: f64) -> Vec<f64> {
        let theta = theta.clamp(-self.traj.delay, 0.0);
        let mut out = vec![0.0; self.traj.dimension];
        if self.right {
            self.traj.eval_right_into(self.t + theta, &mut out);
        } else {
            self.traj.eval_into(self.t + theta, &mut out);
        }
        out
    }

    fn sup_norm(&self) -> f64 {
        let traj = self.traj;
        let mut sup = traj.history_segment(self.t).map(|s| s.sup_norm()).unwrap_or(0.0);
        let lo = self.t - traj.delay;
        for (&tk, rl) in traj.impulse_times.iter().zip(&traj.right_limits) {
            let inside = (tk > lo && tk < self.t) || (self.right && (tk == lo || tk == self.t));
            if inside {
                sup = sup.max(inf_norm(rl));
            }
        }
        sup
    }
}
