//! The semigroup `T(t) = e^{At}` on ℝⁿ and its finite-horizon norm bound.
//!
//! The exponential uses scaling and squaring with the degree-13 diagonal
//! Padé approximant.

use alloc::format;

use crate::linalg::Matrix;
use crate::{Error, Result};

/// Default number of grid points for [`operator_norm_bound`].
pub const DEFAULT_NORM_SAMPLES: usize = 1024;

/// Relative inflation applied to the sampled supremum.
pub const SAFETY_FACTOR: f64 = 1.0 + 1e-6;

/// `M ≥ sup_{0≤t≤b} ‖T(t)‖` (sampled), with `ω = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemigroupBound {
    pub m: f64,
    pub omega: f64,
    pub horizon: f64,
    pub sample_count: usize,
}

impl SemigroupBound {
    /// A bound supplied by the caller rather than sampled.
    pub fn given(m: f64, horizon: f64) -> Self {
        Self {
            m,
            omega: 0.0,
            horizon,
            sample_count: 0,
        }
    }
}

// largest 1-norm for which the unscaled degree-13 approximant is accurate
const THETA_13: f64 = 5.371_920_351_148_152;

fn pade13_coefficients() -> [f64; 14] {
    let mut c = [1.0; 14];
    for k in 1..14 {
        let kf = k as f64;
        c[k] = c[k - 1] * (14.0 - kf) / ((27.0 - kf) * kf);
    }
    c
}

/// `e^A` for a square matrix.
pub fn expm(a: &Matrix) -> Result<Matrix> {
    if !a.is_square() {
        return Err(Error::Structure(format!(
            "generator is {}x{}, expected square",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    let ident = Matrix::identity(n);
    let norm = a.one_norm();
    if norm == 0.0 {
        return Ok(ident);
    }
    if !norm.is_finite() {
        return Err(Error::Structure("generator has non-finite entries".into()));
    }
    let s = if norm > THETA_13 {
        libm::ceil(libm::log2(norm / THETA_13)) as i32
    } else {
        0
    };
    let a = a.scaled(libm::exp2(-s as f64));
    let b = pade13_coefficients();

    let a2 = a.matmul(&a);
    let a4 = a2.matmul(&a2);
    let a6 = a4.matmul(&a2);

    let u_inner = a6
        .scaled(b[13])
        .add_scaled(b[11], &a4)
        .add_scaled(b[9], &a2)
        .matmul(&a6)
        .add_scaled(b[7], &a6)
        .add_scaled(b[5], &a4)
        .add_scaled(b[3], &a2)
        .add_scaled(b[1], &ident);
    let u = a.matmul(&u_inner);
    let v = a6
        .scaled(b[12])
        .add_scaled(b[10], &a4)
        .add_scaled(b[8], &a2)
        .matmul(&a6)
        .add_scaled(b[6], &a6)
        .add_scaled(b[4], &a4)
        .add_scaled(b[2], &a2)
        .add_scaled(b[0], &ident);

    let p = v.add_scaled(1.0, &u);
    let q = v.add_scaled(-1.0, &u);
    let mut r = q
        .solve(&p)
        .ok_or_else(|| Error::Structure("Padé denominator is singular".into()))?;
    for _ in 0..s {
        r = r.matmul(&r);
    }
    Ok(r)
}

/// `e^{At}` as a matrix, `t ≥ 0`.
pub fn propagator(a: &Matrix, t: f64) -> Result<Matrix> {
    if !(t >= 0.0) {
        return Err(Error::Domain {
            t,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    if t == 0.0 {
        if !a.is_square() {
            return expm(a);
        }
        return Ok(Matrix::identity(a.rows()));
    }
    expm(&a.scaled(t))
}

/// `T(t)x = e^{At}x`. Returns `x` unchanged when `t = 0`.
pub fn evolve(a: &Matrix, t: f64, x: &[f64]) -> Result<alloc::vec::Vec<f64>> {
    if !a.is_square() || a.cols() != x.len() {
        return Err(Error::Structure(format!(
            "cannot apply a {}x{} generator to a vector of length {}",
            a.rows(),
            a.cols(),
            x.len()
        )));
    }
    if t == 0.0 {
        return Ok(x.to_vec());
    }
    Ok(propagator(a, t)?.mul_vec(x))
}

/// Sampled `M = max(1, max_i ‖e^{A t_i}‖_∞) · (1 + 1e-6)` on the uniform grid
/// `t_i = b·i/(samples − 1)`.
pub fn operator_norm_bound(a: &Matrix, horizon: f64, samples: usize) -> Result<SemigroupBound> {
    if !(horizon > 0.0) {
        return Err(Error::Setting {
            name: "horizon",
            reason: format!("must be positive, got {horizon}"),
        });
    }
    if samples < 2 {
        return Err(Error::Setting {
            name: "samples",
            reason: format!("need at least 2, got {samples}"),
        });
    }
    let mut sup: f64 = 1.0;
    for i in 0..samples {
        let t = horizon * i as f64 / (samples - 1) as f64;
        sup = sup.max(propagator(a, t)?.inf_norm());
    }
    Ok(SemigroupBound {
        m: sup * SAFETY_FACTOR,
        omega: 0.0,
        horizon,
        sample_count: samples,
    })
}
