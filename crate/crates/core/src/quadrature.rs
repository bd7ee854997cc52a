//! Quadrature helpers shared by the solver and the bound evaluators.
//!
//! Grids are always *aligned*: every breakpoint handed to [`aligned_grid`]
//! is an exact node, and each piece between consecutive breakpoints is split
//! uniformly.

use alloc::vec::Vec;

/// Builds a strictly increasing grid on `[start, end]` containing `start`,
/// `end` and every breakpoint inside the interval as exact nodes. Each piece
/// between consecutive breakpoints gets `ceil(len / step)` (at least one)
/// uniform sub-intervals.
pub fn aligned_grid(start: f64, end: f64, breakpoints: &[f64], step: f64) -> Vec<f64> {
    debug_assert!(end > start && step > 0.0);
    let mut marks: Vec<f64> = Vec::with_capacity(breakpoints.len() + 2);
    marks.push(start);
    marks.extend(breakpoints.iter().copied().filter(|&p| p > start && p < end));
    marks.push(end);
    marks.sort_by(f64::total_cmp);
    marks.dedup();

    let mut grid = Vec::new();
    grid.push(start);
    for pair in marks.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let pieces = libm::ceil((b - a) / step).max(1.0) as usize;
        let h = (b - a) / pieces as f64;
        for i in 1..pieces {
            grid.push(a + i as f64 * h);
        }
        grid.push(b);
    }
    grid
}

/// Composite trapezoid rule for samples `values` taken at `nodes`.
pub fn trapezoid(nodes: &[f64], values: &[f64]) -> f64 {
    debug_assert_eq!(nodes.len(), values.len());
    nodes
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}

const GL_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Eight-point Gauss–Legendre rule on `[a, b]`.
pub fn gauss_legendre<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
        acc += w * (f(mid - half * x) + f(mid + half * x));
    }
    acc * half
}

/// Running integral `∫_{nodes[0]}^{s} φ` tabulated at panel nodes, with
/// Gauss–Legendre panels. Queries between nodes integrate the partial panel
/// with the same integrand that built the table.
#[derive(Debug, Clone)]
pub struct CumulativeIntegral {
    nodes: Vec<f64>,
    values: Vec<f64>,
}

impl CumulativeIntegral {
    pub fn new<F: Fn(f64) -> f64 + ?Sized>(nodes: Vec<f64>, integrand: &F) -> Self {
        let mut values = Vec::with_capacity(nodes.len());
        let mut acc = 0.0;
        values.push(0.0);
        for pair in nodes.windows(2) {
            acc += gauss_legendre(integrand, pair[0], pair[1]);
            values.push(acc);
        }
        Self { nodes, values }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Tabulated value at node `i`.
    pub fn at_node(&self, i: usize) -> f64 {
        self.values[i]
    }

    /// `∫_{nodes[0]}^{s} φ` for any `s` in the tabulated range (clamped).
    pub fn value<F: Fn(f64) -> f64 + ?Sized>(&self, s: f64, integrand: &F) -> f64 {
        let last = self.nodes.len() - 1;
        if s <= self.nodes[0] {
            return 0.0;
        }
        if s >= self.nodes[last] {
            return self.values[last];
        }
        // index of the last node <= s
        let j = self.nodes.partition_point(|&x| x <= s) - 1;
        if self.nodes[j] == s {
            return self.values[j];
        }
        self.values[j] + gauss_legendre(integrand, self.nodes[j], s)
    }
}
