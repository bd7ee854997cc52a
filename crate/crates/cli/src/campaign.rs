//! Randomized Pachpatte campaigns.
//!
//! Instance `i` of a campaign draws from `ChaCha8Rng` seeded with the
//! campaign seed on stream `i`, so instances are independent of each other
//! and of the order in which they run.

use std::f64::consts::TAU;
use std::sync::Arc;

use impulsive_core::bounds::{maximal_solution, PachpatteInstance, PreparedBound, DEFAULT_PANELS};
use impulsive_core::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const GENERATOR: &str = "ChaCha8Rng";

/// Pointwise slack allowed between the discrete maximal solution and the bound.
pub fn tolerance(step: f64) -> f64 {
    1e-8 + 10.0 * step * step
}

pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `c0 + c1 sin(ω t + φ)` with `|c1| ≤ c0`, hence nonnegative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SineProfile {
    pub c0: f64,
    pub c1: f64,
    pub omega: f64,
    pub phase: f64,
}

impl SineProfile {
    pub fn random<R: Rng>(rng: &mut R, scale: f64) -> Self {
        let c0 = scale * rng.random::<f64>();
        Self {
            c0,
            c1: rng.random_range(-1.0..=1.0) * c0,
            omega: rng.random_range(0.5..10.0),
            phase: rng.random_range(0.0..TAU),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.c0 + self.c1 * (self.omega * t + self.phase).sin()
    }

    /// `∫_0^t`, in closed form.
    pub fn integral(&self, t: f64) -> f64 {
        self.c0 * t + self.c1 / self.omega * (self.phase.cos() - (self.omega * t + self.phase).cos())
    }

    pub fn function(self) -> impulsive_core::model::ScalarFn {
        Arc::new(move |t| self.eval(t))
    }
}

/// `n0 + n1 t + n2 (1 − e^{−κ t})`: positive and nondecreasing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RampProfile {
    pub n0: f64,
    pub n1: f64,
    pub n2: f64,
    pub kappa: f64,
}

impl RampProfile {
    pub fn random<R: Rng>(rng: &mut R) -> Self {
        Self {
            n0: rng.random_range(0.5..2.0),
            n1: rng.random(),
            n2: rng.random(),
            kappa: rng.random_range(1.0..5.0),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.n0 + self.n1 * t + self.n2 * (1.0 - (-self.kappa * t).exp())
    }
}

pub const MAX_IMPULSES: usize = 3;
pub const MAX_BETA: f64 = 2.0;

/// A random instance on `[0, 1]` with up to three impulses.
pub fn random_instance<R: Rng>(rng: &mut R) -> PachpatteInstance {
    let m = rng.random_range(0..=MAX_IMPULSES);
    let weights: Vec<f64> = (0..=m).map(|_| rng.random_range(0.5..1.5)).collect();
    let total: f64 = weights.iter().sum();
    let mut times = Vec::with_capacity(m);
    let mut acc = 0.0;
    for w in &weights[..m] {
        acc += w / total;
        times.push(acc);
    }
    let (mut theta, mut tau, mut beta) = (Vec::new(), Vec::new(), Vec::new());
    let mut prev = 0.0;
    for &t in &times {
        let len = t - prev;
        let a: f64 = rng.random_range(0.0..0.5);
        let b = a + rng.random_range(0.0..=1.0) * (1.0 - a);
        theta.push(a * len);
        tau.push(b * len);
        beta.push(rng.random_range(0.0..=MAX_BETA));
        prev = t;
    }
    let n = RampProfile::random(rng);
    PachpatteInstance {
        n: Arc::new(move |t| n.eval(t)),
        f: SineProfile::random(rng, 1.0).function(),
        g: SineProfile::random(rng, 1.0).function(),
        impulse_times: times,
        beta,
        theta,
        tau,
        horizon: 1.0,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignRow {
    pub instance_id: u64,
    /// Node of the largest `oracle − bound`.
    pub t_max_violation: f64,
    /// Largest `oracle − bound` over nodes and both one-sided limits;
    /// negative when the bound holds with room to spare.
    pub max_violation: f64,
    pub num_impulses: usize,
    pub bound_at_horizon: f64,
    pub ck: Vec<f64>,
}

/// Compares the maximal solution on a grid of spacing `step` with the bound.
pub fn check_instance(instance_id: u64, inst: &PachpatteInstance, step: f64) -> Result<CampaignRow> {
    let bound = PreparedBound::new(inst, DEFAULT_PANELS)?;
    let oracle = maximal_solution(inst, &inst.grid(step))?;
    let (mut worst, mut at) = (f64::NEG_INFINITY, 0.0);
    for (i, &t) in oracle.nodes.iter().enumerate() {
        let gap = (oracle.left[i] - bound.value(t)?).max(oracle.right[i] - bound.value_right(t)?);
        if gap > worst {
            worst = gap;
            at = t;
        }
    }
    Ok(CampaignRow {
        instance_id,
        t_max_violation: at,
        max_violation: worst,
        num_impulses: inst.impulse_count(),
        bound_at_horizon: bound.value(inst.horizon)?,
        ck: bound.ck().to_vec(),
    })
}

pub fn run_campaign(seed: u64, samples: u64, step: f64) -> Result<Vec<CampaignRow>> {
    (0..samples)
        .map(|id| check_instance(id, &random_instance(&mut rng(seed, id)), step))
        .collect()
}
