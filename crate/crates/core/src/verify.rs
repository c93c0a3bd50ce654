//! Seeded property sweeps over the gap functionals.
//!
//! Trials are grouped into batches of [`BATCH`]; batch `b` draws from
//! `stream(seed, principle, b)`, so the report does not depend on how the
//! batches are scheduled across threads.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hfun::HomogeneousForm;
use crate::principles::{
    counterexample, derivative_at_zero, discrete_hidden_gap, discrete_picone_gap, elementary_gap,
    fisher_information, grad_sigma, hidden_convexity_gap, kinetic_convexity_gap, picone_gap,
    CounterexampleKind, CounterexampleParams, DiscreteDensity, DiscretePair, KineticPoint,
    PointSample,
};
use crate::rng::{stream, BATCH};

/// Default tolerance on the signed gaps.
pub const GAP_TOLERANCE: f64 = 1e-12;
/// Counterexample violations must exceed this.
pub const VIOLATION_THRESHOLD: f64 = 1e-8;
/// Largest accepted relative error of the finite-difference derivative check.
pub const DERIVATIVE_REL_TOL: f64 = 1e-4;
/// Largest accepted relative disagreement of the two Fisher-information forms.
pub const FISHER_REL_TOL: f64 = 1e-10;

const VALUE_RANGE: (f64, f64) = (1e-3, 10.0);
const GRAD_RANGE: f64 = 10.0;
const FISHER_NODES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Principle {
    Kinetic,
    Hidden,
    Picone,
    WeakPicone,
    DiscretePicone,
    DiscreteHidden,
    Elementary,
    Derivative,
    Fisher,
    CounterexampleBeta,
    CounterexampleQ,
}

impl Principle {
    pub const ALL: [Principle; 11] = [
        Principle::Kinetic,
        Principle::Hidden,
        Principle::Picone,
        Principle::WeakPicone,
        Principle::DiscretePicone,
        Principle::DiscreteHidden,
        Principle::Elementary,
        Principle::Derivative,
        Principle::Fisher,
        Principle::CounterexampleBeta,
        Principle::CounterexampleQ,
    ];

    /// The nonnegativity sweeps run by `all`.
    pub const SWEEPS: [Principle; 7] = [
        Principle::Kinetic,
        Principle::Hidden,
        Principle::Picone,
        Principle::WeakPicone,
        Principle::DiscretePicone,
        Principle::DiscreteHidden,
        Principle::Elementary,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Principle::Kinetic => "kinetic",
            Principle::Hidden => "hidden",
            Principle::Picone => "picone",
            Principle::WeakPicone => "weak-picone",
            Principle::DiscretePicone => "discrete-picone",
            Principle::DiscreteHidden => "discrete-hidden",
            Principle::Elementary => "elementary",
            Principle::Derivative => "derivative",
            Principle::Fisher => "fisher",
            Principle::CounterexampleBeta => "counterexample-beta",
            Principle::CounterexampleQ => "counterexample-q",
        }
    }

    pub fn is_counterexample(self) -> bool {
        matches!(
            self,
            Principle::CounterexampleBeta | Principle::CounterexampleQ
        )
    }

    /// Names of the sampled coordinates, in the order of `argmin_inputs`.
    pub fn input_layout(self, dim: usize) -> Vec<String> {
        let vec = |name: &'static str| (0..dim).map(move |i| format!("{name}[{i}]"));
        let mut out: Vec<String> = Vec::new();
        match self {
            Principle::Kinetic => {
                out.push("beta".into());
                out.push("m0".into());
                out.extend(vec("phi0"));
                out.push("m1".into());
                out.extend(vec("phi1"));
                out.push("t".into());
            }
            Principle::Hidden => {
                out.push("u0".into());
                out.extend(vec("grad_u0"));
                out.push("u1".into());
                out.extend(vec("grad_u1"));
                out.push("t".into());
            }
            Principle::Picone | Principle::WeakPicone | Principle::Derivative => {
                out.push("u".into());
                out.extend(vec("grad_u"));
                out.push("v".into());
                out.extend(vec("grad_v"));
            }
            Principle::DiscretePicone => out.extend(["ux", "uy", "vx", "vy"].map(String::from)),
            Principle::DiscreteHidden => {
                out.extend(["u0x", "u0y", "u1x", "u1y", "t"].map(String::from))
            }
            Principle::Elementary => out.extend(["A", "t"].map(String::from)),
            Principle::Fisher => {
                out.push("beta".into());
                for k in 0..2 {
                    out.extend((0..FISHER_NODES).map(|i| format!("rho{k}[{i}]")));
                    for i in 0..FISHER_NODES {
                        out.extend((0..dim).map(|j| format!("grad_rho{k}[{i}][{j}]")));
                    }
                }
                out.push("t".into());
            }
            Principle::CounterexampleBeta | Principle::CounterexampleQ => {
                out.extend(["c", "t"].map(String::from))
            }
        }
        out
    }
}

impl fmt::Display for Principle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Principle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        Principle::ALL
            .into_iter()
            .find(|p| p.name() == key)
            .ok_or_else(|| invalid(format!("unknown principle '{s}'")))
    }
}

/// Parameters of one sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub principle: Principle,
    pub p: f64,
    pub q: f64,
    /// Kinetic/Fisher exponent; sampled uniformly in `(0, p−1]` when absent.
    /// Required by `counterexample-beta`.
    pub beta: Option<f64>,
    pub dim: usize,
    pub trials: u64,
    pub seed: u64,
    /// Scaling factor of the counterexamples.
    pub c: f64,
    pub tolerance: f64,
}

impl SweepConfig {
    pub fn new(principle: Principle, p: f64, q: f64) -> Self {
        Self {
            principle,
            p,
            q,
            beta: None,
            dim: 2,
            trials: 100_000,
            seed: 0,
            c: 2.0,
            tolerance: GAP_TOLERANCE,
        }
    }

    pub fn with_trials(mut self, trials: u64) -> Self {
        self.trials = trials;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = Some(beta);
        self
    }

    pub fn with_dim(mut self, dim: usize) -> Self {
        self.dim = dim;
        self
    }

    pub fn with_c(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let (p, q) = (self.p, self.q);
        if !(p.is_finite() && p > 1.0) {
            return Err(invalid(format!("need p > 1, got {p}")));
        }
        if !(q.is_finite() && q > 1.0) {
            return Err(invalid(format!("need q > 1, got {q}")));
        }
        if self.dim == 0 {
            return Err(invalid("dimension must be positive"));
        }
        if !self.principle.is_counterexample() && self.trials == 0 {
            return Err(invalid("need at least one trial"));
        }
        match self.principle {
            Principle::Hidden if q > p => {
                return Err(invalid(format!(
                    "q = {q} > p = {p}: hidden convexity does not hold here; \
                     use the counterexample-q principle"
                )))
            }
            Principle::Picone
            | Principle::WeakPicone
            | Principle::DiscretePicone
            | Principle::DiscreteHidden
            | Principle::Derivative
                if q > p =>
            {
                return Err(invalid(format!("need q ≤ p, got q = {q}, p = {p}")))
            }
            Principle::Kinetic | Principle::Fisher => {
                if let Some(b) = self.beta {
                    if !(b > 0.0 && b <= p - 1.0) {
                        return Err(invalid(format!(
                            "need 0 < β ≤ p − 1 = {}, got {b}; use counterexample-beta above it",
                            p - 1.0
                        )));
                    }
                }
            }
            Principle::CounterexampleBeta => {
                let b = self
                    .beta
                    .ok_or_else(|| invalid("counterexample-beta needs β"))?;
                if !(b > p - 1.0 && b < p) {
                    return Err(invalid(format!("need p − 1 < β < p, got β = {b}, p = {p}")));
                }
            }
            Principle::CounterexampleQ if q <= p => {
                return Err(invalid(format!("need q > p, got q = {q}, p = {p}")))
            }
            _ => {}
        }
        if self.principle.is_counterexample() && !(self.c > 1.0) {
            return Err(invalid(format!("need c > 1, got {}", self.c)));
        }
        Ok(())
    }
}

/// The parameters echoed in a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepParams {
    pub p: f64,
    pub q: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    pub dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    pub tolerance: f64,
}

/// Outcome of one sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub principle: Principle,
    pub params: SweepParams,
    pub trials: u64,
    /// Smallest gap seen; for counterexamples, minus the violation.
    pub min_gap: f64,
    pub argmin_inputs: Vec<f64>,
    pub input_layout: Vec<String>,
    pub seed: u64,
    /// Largest secondary error: the finite-difference mismatch for
    /// `derivative`, the disagreement of the two forms for `fisher`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_rel_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation: Option<f64>,
    pub pass: bool,
}

struct Trial {
    gap: f64,
    secondary: f64,
    inputs: Vec<f64>,
}

#[derive(Clone)]
struct Acc {
    min_gap: f64,
    argmin: Vec<f64>,
    max_secondary: f64,
}

impl Acc {
    fn empty() -> Self {
        Self {
            min_gap: f64::INFINITY,
            argmin: Vec::new(),
            max_secondary: 0.0,
        }
    }

    fn push(&mut self, t: Trial) {
        // NaN gaps count as failures
        if (t.gap.is_nan() || t.gap < self.min_gap) && !self.min_gap.is_nan() {
            self.min_gap = t.gap;
            self.argmin = t.inputs;
        }
        if t.secondary.is_nan() || t.secondary > self.max_secondary {
            self.max_secondary = t.secondary;
        }
    }

    /// Merges a later batch; ties keep the earlier trial.
    fn merge(mut self, other: Acc) -> Acc {
        if !self.min_gap.is_nan() && (other.min_gap.is_nan() || other.min_gap < self.min_gap) {
            self.min_gap = other.min_gap;
            self.argmin = other.argmin;
        }
        if !self.max_secondary.is_nan()
            && (other.max_secondary.is_nan() || other.max_secondary > self.max_secondary)
        {
            self.max_secondary = other.max_secondary;
        }
        self
    }
}

fn value(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(VALUE_RANGE.0..VALUE_RANGE.1)
}

fn grad(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim)
        .map(|_| rng.random_range(-GRAD_RANGE..=GRAD_RANGE))
        .collect()
}

fn sample(rng: &mut ChaCha8Rng, dim: usize) -> PointSample {
    PointSample::new(value(rng), grad(rng, dim))
}

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(0.0..=1.0)
}

fn flatten(samples: &[&PointSample]) -> Vec<f64> {
    let mut out = Vec::new();
    for s in samples {
        out.push(s.u);
        out.extend_from_slice(&s.grad);
    }
    out
}

/// `d/dt H(∇σ_t)` at `t = 0` by a second-order one-sided difference.
///
/// The step follows the scale on which `σ_t` moves: `(u/v)^q` for the values
/// and the ratio of `|∇u|u^{q−1}` to `|∇v|v^{q−1}` for the gradients.
fn one_sided_derivative(
    form: &HomogeneousForm,
    su: &PointSample,
    sv: &PointSample,
    q: f64,
) -> Result<f64> {
    let norm = |g: &[f64]| g.iter().map(|x| x * x).sum::<f64>().sqrt();
    let gu = norm(&su.grad) * su.u.powf(q - 1.0);
    let gv = norm(&sv.grad) * sv.u.powf(q - 1.0);
    let mut scale = (su.u / sv.u).powf(q).min(1.0);
    if gv > 0.0 {
        scale = scale.min(gu / gv);
    }
    let h = 1e-4 * scale.max(f64::MIN_POSITIVE);
    let f = |t: f64| grad_sigma(su, sv, q, t).map(|g| form.value(&g));
    let (f0, f1, f2) = (f(0.0)?, f(h)?, f(2.0 * h)?);
    Ok((-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h))
}

/// A unit-mass density and its nodal gradients, both divided by the raw mass.
fn density_gradients(
    rng: &mut ChaCha8Rng,
    dim: usize,
    weights: &[f64],
) -> (Vec<f64>, Vec<Vec<f64>>) {
    let values: Vec<f64> = (0..FISHER_NODES).map(|_| value(rng)).collect();
    let grads: Vec<Vec<f64>> = (0..FISHER_NODES).map(|_| grad(rng, dim)).collect();
    let mass: f64 = values.iter().zip(weights).map(|(r, w)| r * w).sum();
    let values = values.iter().map(|r| r / mass).collect();
    let grads = grads
        .iter()
        .map(|g| g.iter().map(|x| x / mass).collect())
        .collect();
    (values, grads)
}

struct Runner<'a> {
    cfg: &'a SweepConfig,
    form: HomogeneousForm,
}

impl Runner<'_> {
    fn beta(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self.cfg.beta {
            Some(b) => b,
            None => {
                let top = self.cfg.p - 1.0;
                top * (1.0 - rng.random::<f64>())
            }
        }
    }

    fn trial(&self, rng: &mut ChaCha8Rng) -> Result<Trial> {
        let cfg = self.cfg;
        let (p, q, dim) = (cfg.p, cfg.q, cfg.dim);
        let form = &self.form;
        let trial = match cfg.principle {
            Principle::Kinetic => {
                let beta = self.beta(rng);
                let pt0 = KineticPoint {
                    m: value(rng),
                    phi: grad(rng, dim),
                    beta,
                };
                let pt1 = KineticPoint {
                    m: value(rng),
                    phi: grad(rng, dim),
                    beta,
                };
                let t = unit(rng);
                let gap = kinetic_convexity_gap(form, &pt0, &pt1, t)?;
                let mut inputs = vec![beta, pt0.m];
                inputs.extend_from_slice(&pt0.phi);
                inputs.push(pt1.m);
                inputs.extend_from_slice(&pt1.phi);
                inputs.push(t);
                Trial {
                    gap,
                    secondary: 0.0,
                    inputs,
                }
            }
            Principle::Hidden => {
                let (s0, s1, t) = (sample(rng, dim), sample(rng, dim), unit(rng));
                let gap = hidden_convexity_gap(form, &s0, &s1, q, t)?;
                let mut inputs = flatten(&[&s0, &s1]);
                inputs.push(t);
                Trial {
                    gap,
                    secondary: 0.0,
                    inputs,
                }
            }
            Principle::Picone | Principle::WeakPicone => {
                let (su, sv) = (sample(rng, dim), sample(rng, dim));
                let r = picone_gap(form, &su, &sv, q)?;
                let gap = if cfg.principle == Principle::Picone {
                    r.gap
                } else {
                    r.weak_gap
                };
                Trial {
                    gap,
                    secondary: 0.0,
                    inputs: flatten(&[&su, &sv]),
                }
            }
            Principle::Derivative => {
                let (su, sv) = (sample(rng, dim), sample(rng, dim));
                let d = derivative_at_zero(form, &su, &sv, q)?;
                let fd = one_sided_derivative(form, &su, &sv, q)?;
                let (hu, hv) = (form.value(&su.grad), form.value(&sv.grad));
                let gap = hv - hu - d;
                // relative to the size of the terms of the closed form, since
                // `d` itself can vanish by cancellation
                let ratio = sv.u / su.u;
                let cross: f64 = form
                    .gradient(&su.grad)
                    .iter()
                    .zip(&sv.grad)
                    .map(|(a, b)| a * b)
                    .sum();
                let terms = cross.abs() * ratio.powf(q - 1.0)
                    + p * (q - 1.0) / q * hu * ratio.powf(q)
                    + p / q * hu;
                let secondary = (fd - d).abs() / terms.max(f64::MIN_POSITIVE);
                Trial {
                    gap,
                    secondary,
                    inputs: flatten(&[&su, &sv]),
                }
            }
            Principle::DiscretePicone => {
                let d = DiscretePair {
                    ux: value(rng),
                    uy: value(rng),
                    vx: value(rng),
                    vy: value(rng),
                };
                let gap = discrete_picone_gap(&d, p, q)?;
                Trial {
                    gap,
                    secondary: 0.0,
                    inputs: vec![d.ux, d.uy, d.vx, d.vy],
                }
            }
            Principle::DiscreteHidden => {
                let u = [value(rng), value(rng), value(rng), value(rng)];
                let t = unit(rng);
                let gap = discrete_hidden_gap(u[0], u[1], u[2], u[3], p, q, t)?;
                Trial {
                    gap,
                    secondary: 0.0,
                    inputs: vec![u[0], u[1], u[2], u[3], t],
                }
            }
            Principle::Elementary => {
                let a = rng.random_range(0.0..=5.0);
                let t = unit(rng);
                Trial {
                    gap: elementary_gap(a, t, q)?,
                    secondary: 0.0,
                    inputs: vec![a, t],
                }
            }
            Principle::Fisher => {
                let beta = self.beta(rng);
                let weights = vec![1.0 / FISHER_NODES as f64; FISHER_NODES];
                let (r0, g0) = density_gradients(rng, dim, &weights);
                let (r1, g1) = density_gradients(rng, dim, &weights);
                let t = unit(rng);
                let rt: Vec<f64> = r0
                    .iter()
                    .zip(&r1)
                    .map(|(a, b)| (1.0 - t) * a + t * b)
                    .collect();
                let gt: Vec<Vec<f64>> = g0
                    .iter()
                    .zip(&g1)
                    .map(|(a, b)| {
                        a.iter()
                            .zip(b)
                            .map(|(x, y)| (1.0 - t) * x + t * y)
                            .collect()
                    })
                    .collect();
                let j = |r: &[f64], g: &[Vec<f64>]| {
                    let rho = DiscreteDensity::new(r.to_vec(), weights.clone())?;
                    fisher_information(form, beta, &rho, g)
                };
                let (j0, j1, jt) = (j(&r0, &g0)?, j(&r1, &g1)?, j(&rt, &gt)?);
                let chord = (1.0 - t) * j0.log_form + t * j1.log_form;
                let secondary = [j0, j1, jt]
                    .iter()
                    .map(|f| {
                        (f.log_form - f.root_form).abs() / f.log_form.abs().max(f64::MIN_POSITIVE)
                    })
                    .fold(0.0, f64::max);
                let mut inputs = vec![beta];
                for (r, g) in [(&r0, &g0), (&r1, &g1)] {
                    inputs.extend_from_slice(r);
                    for v in g.iter() {
                        inputs.extend_from_slice(v);
                    }
                }
                inputs.push(t);
                // relative to the chord, which can reach 1e10 here
                Trial {
                    gap: (chord - jt.log_form) / chord.max(1.0),
                    secondary,
                    inputs,
                }
            }
            Principle::CounterexampleBeta | Principle::CounterexampleQ => {
                unreachable!("counterexamples are not sampled")
            }
        };
        Ok(trial)
    }
}

/// Runs one sweep (or, for the counterexample principles, one evaluation).
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepReport> {
    cfg.validate()?;
    let form = HomogeneousForm::power_euclid(cfg.p, cfg.dim)?;
    let layout = cfg.principle.input_layout(cfg.dim);
    let params = SweepParams {
        p: cfg.p,
        q: cfg.q,
        beta: cfg.beta,
        dim: cfg.dim,
        c: cfg.principle.is_counterexample().then_some(cfg.c),
        tolerance: cfg.tolerance,
    };
    if cfg.principle.is_counterexample() {
        let (kind, exponent) = match cfg.principle {
            Principle::CounterexampleBeta => {
                (CounterexampleKind::BetaAbove, cfg.beta.expect("validated"))
            }
            _ => (CounterexampleKind::QAbove, cfg.q),
        };
        let cp = CounterexampleParams::new(exponent, cfg.c, cfg.dim);
        let violation = counterexample(kind, &form, &cp)?;
        return Ok(SweepReport {
            principle: cfg.principle,
            params,
            trials: 1,
            min_gap: -violation,
            argmin_inputs: vec![cp.c, cp.t],
            input_layout: layout,
            seed: cfg.seed,
            max_rel_error: None,
            violation: Some(violation),
            pass: violation > VIOLATION_THRESHOLD,
        });
    }
    let runner = Runner { cfg, form };
    let batches = cfg.trials.div_ceil(BATCH as u64);
    let accs: Vec<Acc> = (0..batches)
        .into_par_iter()
        .map(|b| -> Result<Acc> {
            let mut rng = stream(cfg.seed, cfg.principle.name(), b);
            let count = (cfg.trials - b * BATCH as u64).min(BATCH as u64);
            let mut acc = Acc::empty();
            for _ in 0..count {
                acc.push(runner.trial(&mut rng)?);
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let acc = accs.into_iter().fold(Acc::empty(), Acc::merge);
    let secondary = match cfg.principle {
        Principle::Derivative => Some((acc.max_secondary, DERIVATIVE_REL_TOL)),
        Principle::Fisher => Some((acc.max_secondary, FISHER_REL_TOL)),
        _ => None,
    };
    let gap_ok = acc.min_gap >= -cfg.tolerance;
    let secondary_ok = secondary.is_none_or(|(e, tol)| e <= tol);
    Ok(SweepReport {
        principle: cfg.principle,
        params,
        trials: cfg.trials,
        min_gap: acc.min_gap,
        argmin_inputs: acc.argmin,
        input_layout: layout,
        seed: cfg.seed,
        max_rel_error: secondary.map(|(e, _)| e),
        violation: None,
        pass: gap_ok && secondary_ok,
    })
}

/// Runs every nonnegativity sweep for one `(p, q)`; kinetic uses `β ≤ p − 1`.
pub fn run_all(p: f64, q: f64, trials: u64, seed: u64) -> Result<Vec<SweepReport>> {
    Principle::SWEEPS
        .into_iter()
        .map(|pr| {
            run_sweep(
                &SweepConfig::new(pr, p, q)
                    .with_trials(trials)
                    .with_seed(seed),
            )
        })
        .collect()
}
