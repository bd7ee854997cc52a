//! Perturbed problem pairs for the dependence bounds, built from the shared
//! catalog parameters.

use impulsive_core::bounds::DependenceGap;
use impulsive_core::model::catalog::CatalogEntry;
use impulsive_core::model::LipschitzData;
use impulsive_core::Result;

/// Data gaps between the base problem and its perturbation. All nonnegative.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Gaps {
    /// Shift of the history, `‖ς_1 − ς_2‖`.
    pub history: f64,
    pub rho: f64,
    pub mu: f64,
    /// Additive shift of `V`, the sup gap `P`.
    pub drift: f64,
    /// Additive shift of every jump map, the sup gap `N_k`.
    pub jump: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Initial,
    Parameter,
    Function,
}

/// The perturbed entry, the gap descriptor and Lipschitz data valid for both
/// problems of the pair.
pub fn perturbed(base: &CatalogEntry, kind: Kind, gaps: &Gaps) -> Result<(CatalogEntry, DependenceGap, LipschitzData)> {
    let get = |name: &str| base.parameter(name).unwrap_or(0.0);
    match kind {
        Kind::Initial => {
            let other = base.with("history_shift", get("history_shift") + gaps.history)?;
            let gap = DependenceGap::Initial {
                history_gap: gaps.history,
            };
            Ok((other, gap, base.lipschitz.clone()))
        }
        Kind::Parameter => {
            let other = base
                .with("rho", get("rho") + gaps.rho)?
                .with("mu", get("mu") + gaps.mu)?;
            let mut lip = base.lipschitz.envelope(&other.lipschitz);
            lip.n_v_tilde = lip.n_v.clone();
            lip.l_g_tilde = lip.l_g;
            let gap = DependenceGap::Parameter {
                rho_gap: gaps.rho,
                mu_gap: gaps.mu,
            };
            Ok((other, gap, lip))
        }
        Kind::Function => {
            let other = base
                .with("history_shift", get("history_shift") + gaps.history)?
                .with("v_shift", get("v_shift") + gaps.drift)?
                .with("jump_shift", get("jump_shift") + gaps.jump)?;
            let mut lip = base.lipschitz.clone();
            lip.j = gaps.history;
            lip.p = gaps.drift;
            lip.n_k = vec![gaps.jump; base.problem.impulse_count()];
            Ok((other, DependenceGap::Function, lip))
        }
    }
}
