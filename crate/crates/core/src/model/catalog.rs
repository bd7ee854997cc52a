//! Built-in problem catalog.
//!
//! Problem functions are closures and cannot be serialized, so front ends
//! pick an entry by name and override its scalar parameters. Every entry
//! accepts the shared perturbation parameters (`rho`, `mu`, `history_shift`,
//! `v_shift`, `jump_shift`) used by the dependence experiments; with their
//! defaults they leave the problem untouched.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use super::{constant, ImpulseSchedule, ImpulsiveProblem, LipschitzData};
use crate::linalg::Matrix;
use crate::trajectory::History;
use crate::{Error, Result};

pub type Parameters = BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSpec {
    pub name: &'static str,
    pub default: f64,
    pub min: f64,
    pub max: f64,
    /// Restricts the value to a finite set when present.
    pub choices: Option<&'static [f64]>,
    pub description: &'static str,
}

impl ParameterSpec {
    const fn range(name: &'static str, default: f64, min: f64, max: f64, description: &'static str) -> Self {
        Self {
            name,
            default,
            min,
            max,
            choices: None,
            description,
        }
    }

    fn check(&self, value: f64) -> Result<()> {
        let fail = |reason: String| {
            Err(Error::Parameter {
                name: self.name.to_string(),
                reason,
            })
        };
        if let Some(choices) = self.choices {
            if !choices.contains(&value) {
                return fail(format!("{value} is not one of {choices:?}"));
            }
        } else if !(value >= self.min && value <= self.max) {
            return fail(format!("{value} outside [{}, {}]", self.min, self.max));
        }
        Ok(())
    }
}

const SHARED: [ParameterSpec; 5] = [
    ParameterSpec::range("rho", 1.0, -10.0, 10.0, "parameter rho of V"),
    ParameterSpec::range("mu", 0.0, -10.0, 10.0, "parameter mu of G (additive)"),
    ParameterSpec::range("history_shift", 0.0, -10.0, 10.0, "constant added to the history"),
    ParameterSpec::range("v_shift", 0.0, -10.0, 10.0, "constant added to V"),
    ParameterSpec::range("jump_shift", 0.0, -10.0, 10.0, "constant added to every I_k"),
];

type Builder = fn(&Resolved) -> (ImpulsiveProblem, LipschitzData);

/// A named problem with its Lipschitz data at concrete parameter values.
#[derive(Clone)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub summary: &'static str,
    pub free_parameters: Vec<ParameterSpec>,
    pub values: Parameters,
    pub problem: ImpulsiveProblem,
    pub lipschitz: LipschitzData,
    builder: Builder,
}

impl core::fmt::Debug for CatalogEntry {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("CatalogEntry")
            .field("name", &self.name)
            .field("values", &self.values)
            .field("problem", &self.problem)
            .field("lipschitz", &self.lipschitz)
            .finish()
    }
}

impl CatalogEntry {
    fn new(name: &'static str, summary: &'static str, own: &[ParameterSpec], builder: Builder) -> Self {
        let free_parameters: Vec<ParameterSpec> = own.iter().chain(SHARED.iter()).cloned().collect();
        let values: Parameters = free_parameters
            .iter()
            .map(|p| (p.name.to_string(), p.default))
            .collect();
        let (problem, lipschitz) = builder(&Resolved(&values));
        Self {
            name,
            summary,
            free_parameters,
            values,
            problem,
            lipschitz,
            builder,
        }
    }

    pub fn parameter(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }

    /// Re-instantiates the entry with `overrides` applied on top of the
    /// current values. Unknown names and out-of-range values are errors.
    pub fn with_parameters(&self, overrides: &Parameters) -> Result<Self> {
        let mut values = self.values.clone();
        for (name, &value) in overrides {
            let spec = self
                .free_parameters
                .iter()
                .find(|p| p.name == name)
                .ok_or_else(|| Error::Parameter {
                    name: name.clone(),
                    reason: format!("unknown parameter for catalog entry `{}`", self.name),
                })?;
            spec.check(value)?;
            values.insert(name.clone(), value);
        }
        let (problem, lipschitz) = (self.builder)(&Resolved(&values));
        Ok(Self {
            values,
            problem,
            lipschitz,
            ..self.clone()
        })
    }

    /// Convenience for a single override.
    pub fn with(&self, name: &str, value: f64) -> Result<Self> {
        let mut o = Parameters::new();
        o.insert(name.to_string(), value);
        self.with_parameters(&o)
    }
}

struct Resolved<'a>(&'a Parameters);

impl Resolved<'_> {
    fn get(&self, name: &str) -> f64 {
        self.0[name]
    }
}

/// All built-in entries at their default parameter values.
pub fn build_catalog() -> Vec<CatalogEntry> {
    vec![
        CatalogEntry::new(
            "paper_example",
            "scalar delay integro-differential equation with T(t)x = e^t x, one impulse at t = 1 on a zero-length window",
            &PAPER_EXAMPLE_PARAMS,
            paper_example,
        ),
        CatalogEntry::new(
            "pure_semigroup",
            "V = U = 0, no impulses: the solution is T(t) applied to the history at 0",
            &PURE_SEMIGROUP_PARAMS,
            pure_semigroup,
        ),
        CatalogEntry::new(
            "method_of_steps",
            "w'(t) = w(t - r) with constant history 1",
            &METHOD_OF_STEPS_PARAMS,
            method_of_steps,
        ),
        CatalogEntry::new(
            "coupled_impulsive",
            "two-component damped rotation with delayed coupling, Volterra memory and two integral impulses",
            &COUPLED_PARAMS,
            coupled_impulsive,
        ),
    ]
}

pub fn entry(name: &str) -> Option<CatalogEntry> {
    build_catalog().into_iter().find(|e| e.name == name)
}

pub fn names() -> Vec<&'static str> {
    build_catalog().iter().map(|e| e.name).collect()
}

fn shifted(mut v: Vec<f64>, shift: f64) -> Vec<f64> {
    if shift != 0.0 {
        v.iter_mut().for_each(|x| *x += shift);
    }
    v
}

const PAPER_EXAMPLE_PARAMS: [ParameterSpec; 3] = [
    ParameterSpec::range("lg", 0.01, 0.0, 10.0, "Lipschitz constant L_G of G"),
    ParameterSpec::range("r_eff", 1.0, 1e-3, 10.0, "effective delay read by V and U"),
    ParameterSpec {
        name: "u_sign",
        default: -1.0,
        min: -1.0,
        max: 1.0,
        choices: Some(&[-1.0, 1.0]),
        description: "constant term of U, either -1 or +1",
    },
];

fn paper_example(p: &Resolved) -> (ImpulsiveProblem, LipschitzData) {
    let (lg, r, u_sign) = (p.get("lg"), p.get("r_eff"), p.get("u_sign"));
    let (rho, mu) = (p.get("rho"), p.get("mu"));
    let (h_shift, v_shift, j_shift) = (p.get("history_shift"), p.get("v_shift"), p.get("jump_shift"));
    let base = 1.0 - libm::sin(5.0);

    let problem = ImpulsiveProblem {
        dimension: 1,
        generator: Matrix::identity(1),
        drift: Arc::new(move |_t, w: &dyn History, z: &[f64]| {
            vec![rho * base - libm::sin(w.at(-r)[0]) + z[0] + v_shift]
        }),
        kernel: Arc::new(move |_t, _s, w: &dyn History| vec![u_sign + libm::cos(w.at(-r)[0])]),
        window_map: Arc::new(move |_s, w: &dyn History| vec![lg * libm::sin(w.at(0.0)[0]) + mu]),
        jumps: vec![Arc::new(move |x: &[f64]| vec![libm::sin(x[0]) + j_shift])],
        schedule: ImpulseSchedule::new(vec![1.0], vec![0.5], vec![0.5]),
        delay: r,
        history: Arc::new(move |t| vec![t + h_shift]),
        horizon: 2.0,
    };
    let mut lip = LipschitzData::constant(1.0, 1.0, lg, vec![1.0]);
    lip.omega_1 = base.abs();
    lip.omega_2 = 1.0;
    (problem, lip)
}

const PURE_SEMIGROUP_PARAMS: [ParameterSpec; 1] = [ParameterSpec::range("a", 1.0, -10.0, 10.0, "scalar generator")];

fn pure_semigroup(p: &Resolved) -> (ImpulsiveProblem, LipschitzData) {
    let a = p.get("a");
    let (h_shift, v_shift) = (p.get("history_shift"), p.get("v_shift"));
    let problem = ImpulsiveProblem {
        dimension: 1,
        generator: Matrix::from_diagonal(&[a]),
        drift: Arc::new(move |_, _, _| vec![v_shift]),
        kernel: Arc::new(|_, _, _| vec![0.0]),
        window_map: Arc::new(|_, _| vec![0.0]),
        jumps: vec![],
        schedule: ImpulseSchedule::empty(),
        delay: 1.0,
        history: Arc::new(move |_| vec![1.0 + h_shift]),
        horizon: 2.0,
    };
    (problem, LipschitzData::constant(0.0, 0.0, 0.0, vec![]))
}

const METHOD_OF_STEPS_PARAMS: [ParameterSpec; 2] = [
    ParameterSpec::range("r", 1.0, 1e-2, 10.0, "delay"),
    ParameterSpec::range("b", 2.0, 1e-2, 20.0, "horizon"),
];

fn method_of_steps(p: &Resolved) -> (ImpulsiveProblem, LipschitzData) {
    let (r, b) = (p.get("r"), p.get("b"));
    let (h_shift, v_shift) = (p.get("history_shift"), p.get("v_shift"));
    let problem = ImpulsiveProblem {
        dimension: 1,
        generator: Matrix::zeros(1, 1),
        drift: Arc::new(move |_, w: &dyn History, _| shifted(w.at(-r), v_shift)),
        kernel: Arc::new(|_, _, _| vec![0.0]),
        window_map: Arc::new(|_, _| vec![0.0]),
        jumps: vec![],
        schedule: ImpulseSchedule::empty(),
        delay: r,
        history: Arc::new(move |_| vec![1.0 + h_shift]),
        horizon: b,
    };
    (problem, LipschitzData::constant(1.0, 0.0, 0.0, vec![]))
}

const COUPLED_PARAMS: [ParameterSpec; 1] = [ParameterSpec::range(
    "lg",
    0.05,
    0.0,
    10.0,
    "Lipschitz constant L_G of G",
)];

fn coupled_impulsive(p: &Resolved) -> (ImpulsiveProblem, LipschitzData) {
    const R: f64 = 0.5;
    const DAMPING: f64 = 0.3;
    const MEMORY: f64 = 0.5;
    const JUMP_GAIN: f64 = 0.5;
    let lg = p.get("lg");
    let (rho, mu) = (p.get("rho"), p.get("mu"));
    let (h_shift, v_shift, j_shift) = (p.get("history_shift"), p.get("v_shift"), p.get("jump_shift"));

    let jump: super::JumpFn =
        Arc::new(move |x: &[f64]| x.iter().map(|&v| JUMP_GAIN * libm::sin(v) + j_shift).collect());
    let problem = ImpulsiveProblem {
        dimension: 2,
        generator: Matrix::from_rows(&[[-0.5, 1.0], [-1.0, -0.5]]).expect("2x2 literal"),
        drift: Arc::new(move |_t, w: &dyn History, z: &[f64]| {
            let (lag, now) = (w.at(-R), w.at(0.0));
            vec![
                rho * libm::sin(lag[1]) - DAMPING * now[0] + MEMORY * libm::sin(z[0]) + v_shift,
                rho * libm::cos(lag[0]) - DAMPING * now[1] + MEMORY * libm::sin(z[1]) + v_shift,
            ]
        }),
        kernel: Arc::new(|t, s, w: &dyn History| {
            let lag = w.at(-R);
            let decay = libm::exp(-(t - s));
            vec![decay * libm::cos(lag[0]), decay * libm::sin(lag[1])]
        }),
        window_map: Arc::new(move |_s, w: &dyn History| w.at(0.0).iter().map(|&v| lg * libm::tanh(v) + mu).collect()),
        jumps: vec![jump.clone(), jump],
        schedule: ImpulseSchedule::new(vec![1.0, 2.0], vec![0.2, 0.2], vec![0.6, 0.6]),
        delay: R,
        history: Arc::new(move |t| vec![libm::cos(t) + h_shift, libm::sin(t) + h_shift]),
        horizon: 3.0,
    };
    let n_v = (rho.abs() + DAMPING).max(MEMORY);
    let mut lip = LipschitzData::constant(n_v, 1.0, lg, vec![JUMP_GAIN; 2]);
    lip.omega_1 = 1.0;
    lip.omega_2 = 1.0;
    lip.n_v_tilde = constant(n_v);
    (problem, lip)
}
