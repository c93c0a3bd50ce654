use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::eigen::{DiscreteEnergy, GagliardoEnergy, Grid, GridFunction};
use crate::error::{invalid, Error, Result};
use crate::quadrature::{integrate_with_breaks, QuadratureConfig};

/// Parameters `(N, s, p)` of the fractional Hardy inequality, `N ≥ 2`, `sp < N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FractionalParams {
    #[serde(rename = "N")]
    pub n: usize,
    pub s: f64,
    pub p: f64,
}

impl FractionalParams {
    pub fn new(n: usize, s: f64, p: f64) -> Result<Self> {
        let fp = Self { n, s, p };
        fp.validate()?;
        Ok(fp)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(invalid(format!(
                "fractional constants need N ≥ 2, got N = {}",
                self.n
            )));
        }
        if !(self.s > 0.0 && self.s < 1.0) {
            return Err(invalid(format!("need 0 < s < 1, got {}", self.s)));
        }
        if !(self.p > 1.0 && self.p.is_finite()) {
            return Err(invalid(format!("need p > 1, got {}", self.p)));
        }
        if !(self.s * self.p < self.n as f64) {
            return Err(invalid(format!(
                "need sp < N, got sp = {}",
                self.s * self.p
            )));
        }
        Ok(())
    }

    fn sp(&self) -> f64 {
        self.s * self.p
    }

    /// `(N − sp)/p`, where `C(β)` peaks.
    pub fn optimal_beta(&self) -> f64 {
        (self.n as f64 - self.sp()) / self.p
    }

    /// `(N − sp)/(p − 1)`, the end of the positivity range of `C(β)`.
    pub fn beta_limit(&self) -> f64 {
        (self.n as f64 - self.sp()) / (self.p - 1.0)
    }
}

/// `Γ(k/2)` for a positive integer `k`.
fn gamma_half(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        (1..k / 2).map(|j| j as f64).product()
    } else {
        // Γ(m + 1/2) = √π · (2m)! / (4^m m!)
        let m = k / 2;
        let mut g = PI.sqrt();
        for j in 0..m {
            g *= j as f64 + 0.5;
        }
        g
    }
}

/// Surface measure of the unit sphere `S^k ⊂ ℝ^{k+1}`; `|S^0| = 2`.
pub fn sphere_area(k: usize) -> f64 {
    2.0 * PI.powf((k + 1) as f64 / 2.0) / gamma_half(k + 1)
}

/// `δ^{1+sp} Φ(ρ)` with `δ = |1 − ρ|`, for any `ρ ≥ 0`, `ρ ≠ 1`.
///
/// The substitution `t = cos θ` removes the endpoint singularity, and writing
/// `(1−ρ)² + 4ρ sin²(θ/2)` for `1 − 2ρ cos θ + ρ²` keeps full precision near
/// `ρ = 1`, where the integrand concentrates in `θ ≲ δ`.
fn phi_scaled(
    rho: f64,
    delta: f64,
    fp: &FractionalParams,
    qc: &QuadratureConfig,
) -> Result<(f64, f64)> {
    let n = fp.n;
    let expo = -(n as f64 + fp.sp()) / 2.0;
    let surf = sphere_area(n - 2);
    let f = |theta: f64| {
        let half = (0.5 * theta).sin();
        let ratio = 1.0 + 4.0 * rho * half * half / (delta * delta);
        let ang = if n == 2 {
            1.0
        } else {
            (theta.sin() / delta).powi(n as i32 - 2)
        };
        ang * ratio.powf(expo) / delta
    };
    let mut breaks = Vec::new();
    let mut b = delta;
    while b < PI {
        breaks.push(b);
        b *= 2.0;
    }
    let q = integrate_with_breaks(f, 0.0, PI, &breaks, qc)?;
    Ok((surf * q.value, surf * q.error))
}

/// `Φ(ρ) = |S^{N−2}| ∫_0^π sin^{N−2}θ (1 − 2ρcosθ + ρ²)^{−(N+sp)/2} dθ` on `[0, 1)`.
pub fn phi_kernel(rho: f64, fp: &FractionalParams, qc: &QuadratureConfig) -> Result<f64> {
    fp.validate()?;
    if !(0.0..1.0).contains(&rho) {
        return Err(invalid(format!("Φ is evaluated on [0, 1), got ρ = {rho}")));
    }
    phi_extended(rho, fp, qc)
}

/// Same integral for any `ρ ≥ 0` other than 1.
pub fn phi_extended(rho: f64, fp: &FractionalParams, qc: &QuadratureConfig) -> Result<f64> {
    fp.validate()?;
    if !(rho >= 0.0 && rho.is_finite()) || rho == 1.0 {
        return Err(invalid(format!("Φ needs ρ ≥ 0, ρ ≠ 1, got {rho}")));
    }
    let delta = (1.0 - rho).abs();
    let (v, _) = phi_scaled(rho, delta, fp, qc)?;
    Ok(v / delta.powf(1.0 + fp.sp()))
}

/// `G(β) = [1 − ρ^{N−sp−β(p−1)}][1 − ρ^β]^{p−1}` at a fixed `ρ ∈ (0,1)`.
pub fn g_function(beta: f64, rho: f64, fp: &FractionalParams) -> Result<f64> {
    fp.validate()?;
    if !(rho > 0.0 && rho < 1.0) || !(beta > 0.0) {
        return Err(invalid("need 0 < ρ < 1 and β > 0"));
    }
    let c = fp.n as f64 - fp.sp() - beta * (fp.p - 1.0);
    Ok((1.0 - rho.powf(c)) * (1.0 - rho.powf(beta)).powf(fp.p - 1.0))
}

/// A quadrature value with its accumulated error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// `C(β) = 2∫_0^1 ρ^{sp−1}[1 − ρ^{N−sp−β(p−1)}]|1 − ρ^β|^{p−1}Φ(ρ) dρ`.
///
/// The range is split at `ρ = 1/2`. On the left `w = ρ^a` with
/// `a = min(sp, N − β(p−1))` absorbs the power singularity at 0; on the right
/// `z = δ^{p(1−s)}` with `δ = 1 − ρ` absorbs the `δ^{p(1−s)−1}` behaviour at 1.
pub fn c_of_beta(beta: f64, fp: &FractionalParams, qc: &QuadratureConfig) -> Result<Estimate> {
    fp.validate()?;
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(invalid(format!("need β > 0, got {beta}")));
    }
    let (n, p, sp) = (fp.n as f64, fp.p, fp.sp());
    let c = n - sp - beta * (p - 1.0);
    let a = sp.min(n - beta * (p - 1.0));
    if !(a > 0.0) {
        return Err(invalid(format!(
            "C(β) diverges at the origin for β ≥ N/(p−1), got β = {beta}"
        )));
    }
    let b = p * (1.0 - sp / p);
    let mut inner_error = 0.0f64;
    let mut failure: Option<Error> = None;

    let w_max = 0.5f64.powf(a);
    let left = integrate_with_breaks(
        |w| {
            let rho = w.powf(1.0 / a);
            match phi_scaled(rho, 1.0 - rho, fp, qc) {
                Ok((v, e)) => {
                    let scale = 1.0 / (1.0 - rho).powf(1.0 + sp);
                    inner_error = inner_error.max(e * scale);
                    let bracket = rho.powf(sp - a) - rho.powf(sp - a + c);
                    bracket * (1.0 - rho.powf(beta)).powf(p - 1.0) * v * scale / a
                }
                Err(err) => {
                    failure.get_or_insert(err);
                    0.0
                }
            }
        },
        0.0,
        w_max,
        &[],
        qc,
    )?;

    let z_max = 0.5f64.powf(b);
    let right = integrate_with_breaks(
        |z| {
            let delta = z.powf(1.0 / b);
            let rho = 1.0 - delta;
            let log_rho = (-delta).ln_1p();
            let one_minus = |x: f64| -(x * log_rho).exp_m1();
            match phi_scaled(rho, delta, fp, qc) {
                Ok((v, e)) => {
                    inner_error = inner_error.max(e);
                    let bracket = one_minus(c) / delta;
                    let diff = (one_minus(beta) / delta).abs().powf(p - 1.0);
                    rho.powf(sp - 1.0) * bracket * diff * v / b
                }
                Err(err) => {
                    failure.get_or_insert(err);
                    0.0
                }
            }
        },
        0.0,
        z_max,
        &[],
        qc,
    )?;
    if let Some(err) = failure {
        return Err(err);
    }
    let value = 2.0 * (left.value + right.value);
    let error = 2.0 * (left.error + right.error + inner_error * (w_max + z_max));
    Ok(Estimate { value, error })
}

/// `C((N − sp)/p)`, the sharp fractional Hardy constant.
pub fn sharp_fractional_constant(fp: &FractionalParams, qc: &QuadratureConfig) -> Result<Estimate> {
    c_of_beta(fp.optimal_beta(), fp, qc)
}

/// One row of a β-sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub beta: f64,
    pub c_beta: f64,
    pub error_estimate: f64,
}

/// `C(β)` at `β_k = k·B/(points+1)`, `k = 1..=points`, with `B = (N−sp)/(p−1)`.
pub fn beta_sweep(
    fp: &FractionalParams,
    points: usize,
    qc: &QuadratureConfig,
) -> Result<Vec<SweepPoint>> {
    fp.validate()?;
    if points == 0 {
        return Err(invalid("the sweep needs at least one point"));
    }
    let step = fp.beta_limit() / (points + 1) as f64;
    (1..=points)
        .map(|k| {
            let beta = k as f64 * step;
            let e = c_of_beta(beta, fp, qc)?;
            Ok(SweepPoint {
                beta,
                c_beta: e.value,
                error_estimate: e.error,
            })
        })
        .collect()
}

/// `gagliardo(v) / Σ|v_i|^p |x_i|^{−sp} h^N` on a grid of dimension `N`.
pub fn fractional_hardy_check(fp: &FractionalParams, grid: &Grid, v: &GridFunction) -> Result<f64> {
    fp.validate()?;
    if grid.dim() != fp.n {
        return Err(Error::DimensionMismatch {
            expected: fp.n,
            got: grid.dim(),
        });
    }
    if v.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            got: v.len(),
        });
    }
    let mut denom = 0.0;
    for (i, vi) in v.values.iter().enumerate() {
        if *vi == 0.0 {
            continue;
        }
        let r = grid.coords(i).iter().map(|x| x * x).sum::<f64>().sqrt();
        if r == 0.0 {
            return Err(invalid("v must vanish at the origin"));
        }
        denom += vi.abs().powf(fp.p) * r.powf(-fp.sp());
    }
    if denom == 0.0 {
        return Err(Error::Degenerate("v vanishes identically".into()));
    }
    denom *= grid.cell_volume();
    let e = GagliardoEnergy::new(grid, fp.s, fp.p)?;
    Ok(e.value(&v.values) / denom)
}
