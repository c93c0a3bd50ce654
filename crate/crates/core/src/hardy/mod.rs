//! Sharp Hardy constants: local weighted inequalities with a general norm and
//! the fractional inequality with its one-dimensional quadrature formula.

mod fractional;
mod local;
mod montecarlo;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::quadrature::QuadratureConfig;

pub use fractional::{
    beta_sweep, c_of_beta, fractional_hardy_check, g_function, phi_extended, phi_kernel,
    sharp_fractional_constant, sphere_area, Estimate, FractionalParams, SweepPoint,
};
pub use local::{
    argmax_beta, beta_polynomial, local_hardy_check, local_sharp_constant, radial_hardy_ratio,
    trapezoid_profile, HardyBox, LocalParams,
};
pub use montecarlo::{montecarlo_at, montecarlo_oracle, McEstimate};

/// Quadrature against Monte-Carlo at one `β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleComparison {
    pub beta: f64,
    pub quadrature: f64,
    pub montecarlo: McEstimate,
    /// `|quadrature − MC| / SE`.
    pub z_score: f64,
}

/// β-sweep of `C(β)` with the sharp constant and optional oracle check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardyReport {
    pub params: FractionalParams,
    pub sweep: Vec<SweepPoint>,
    /// Grid step of the sweep.
    pub beta_step: f64,
    pub argmax_beta: f64,
    /// `(N − sp)/p`.
    pub expected_argmax: f64,
    pub sharp_constant: f64,
    pub sharp_error: f64,
    /// Largest `C(β) − C((N−sp)/p)` over the sweep; nonpositive up to quadrature error.
    pub max_excess: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleComparison>,
}

impl HardyReport {
    /// Sweep argmax within one grid step of `(N − sp)/p` and no sampled
    /// `C(β)` above the sharp value beyond the error estimates.
    pub fn consistent(&self) -> bool {
        let slack = self.sharp_error
            + self
                .sweep
                .iter()
                .map(|s| s.error_estimate)
                .fold(0.0, f64::max);
        (self.argmax_beta - self.expected_argmax).abs() <= self.beta_step * (1.0 + 1e-12)
            && self.max_excess <= slack.max(1e-12 * self.sharp_constant)
            && self.sweep.iter().all(|s| s.c_beta > 0.0)
    }
}

/// Builds a [`HardyReport`] from a sweep of `points` values of `β`.
pub fn fractional_report(
    fp: &FractionalParams,
    points: usize,
    qc: &QuadratureConfig,
    montecarlo: Option<(f64, u64, u64)>,
) -> Result<HardyReport> {
    let sweep = beta_sweep(fp, points, qc)?;
    let sharp = sharp_fractional_constant(fp, qc)?;
    let best = sweep
        .iter()
        .copied()
        .max_by(|a, b| a.c_beta.total_cmp(&b.c_beta))
        .expect("nonempty sweep");
    let max_excess = sweep
        .iter()
        .map(|s| s.c_beta - sharp.value)
        .fold(f64::NEG_INFINITY, f64::max);
    let oracle = match montecarlo {
        None => None,
        Some((beta, samples, seed)) => {
            let quad = c_of_beta(beta, fp, qc)?;
            let mc = montecarlo_oracle(beta, fp, samples, seed)?;
            Some(OracleComparison {
                beta,
                quadrature: quad.value,
                montecarlo: mc,
                z_score: (quad.value - mc.estimate).abs() / mc.standard_error,
            })
        }
    };
    Ok(HardyReport {
        params: *fp,
        beta_step: fp.beta_limit() / (points + 1) as f64,
        argmax_beta: best.beta,
        expected_argmax: fp.optimal_beta(),
        sharp_constant: sharp.value,
        sharp_error: sharp.error,
        max_excess,
        sweep,
        oracle,
    })
}
