use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fractional::{sphere_area, FractionalParams};
use crate::error::{invalid, Result};
use crate::rng::{stream, BATCH};

/// Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub standard_error: f64,
    pub samples: u64,
}

const NEAR_WEIGHT: f64 = 0.7;

/// Importance sampler for `h = y − x` around a fixed point `x`.
///
/// `|h|` is drawn from a mixture of `r^{a−1}` on `(0, R0]` with
/// `a = p(1−s)`, matching the symmetrized integrand near `h = 0`, and a
/// Pareto tail of index `sp` from `R1`, matching its decay; the direction is
/// uniform. Each draw is used as the antithetic pair `x ± h`, which turns the
/// principal value at `y = x` into an absolutely convergent integral.
struct Sampler {
    n: usize,
    a: f64,
    alpha: f64,
    r0: f64,
    r1: f64,
    surface: f64,
}

impl Sampler {
    fn new(fp: &FractionalParams, scale: f64) -> Self {
        Self {
            n: fp.n,
            a: fp.p - fp.s * fp.p,
            alpha: fp.s * fp.p,
            r0: 2.0 * scale,
            r1: scale,
            surface: sphere_area(fp.n - 1),
        }
    }

    fn radial_density(&self, r: f64) -> f64 {
        let near = if r <= self.r0 {
            self.a * r.powf(self.a - 1.0) / self.r0.powf(self.a)
        } else {
            0.0
        };
        let tail = if r >= self.r1 {
            self.alpha * self.r1.powf(self.alpha) * r.powf(-self.alpha - 1.0)
        } else {
            0.0
        };
        NEAR_WEIGHT * near + (1.0 - NEAR_WEIGHT) * tail
    }

    fn draw_radius(&self, rng: &mut ChaCha8Rng) -> f64 {
        let u: f64 = 1.0 - rng.random::<f64>();
        if rng.random::<f64>() < NEAR_WEIGHT {
            self.r0 * u.powf(1.0 / self.a)
        } else {
            self.r1 * u.powf(-1.0 / self.alpha)
        }
    }

    fn draw_direction(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        loop {
            let mut norm2 = 0.0;
            for o in out.iter_mut() {
                // Box–Muller
                let u1: f64 = 1.0 - rng.random::<f64>();
                let u2: f64 = rng.random();
                *o = (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
                norm2 += *o * *o;
            }
            if norm2 > 1e-20 {
                let inv = 1.0 / norm2.sqrt();
                for o in out.iter_mut() {
                    *o *= inv;
                }
                return;
            }
        }
    }

    /// Density of `h` in `ℝ^N`.
    fn density(&self, r: f64) -> f64 {
        self.radial_density(r) / (self.surface * r.powi(self.n as i32 - 1))
    }
}

fn psi(t: f64, p: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t.signum() * t.abs().powf(p - 1.0)
    }
}

/// `ψ(|x|^{−β} − |x+h|^{−β}) |h|^{−N−sp}` for `h = r·ω`, given `x·ω`.
///
/// The difference is formed from `δ = (|x+h|² − |x|²)/|x|²` with
/// `expm1`/`ln_1p`; subtracting the two powers directly loses every digit
/// once `r` is below the square root of the machine epsilon, and the
/// sampler draws such radii routinely when `p(1−s)` is small.
fn kernel(ux: f64, nx2: f64, x_dot_dir: f64, r: f64, beta: f64, fp: &FractionalParams) -> f64 {
    let delta = (2.0 * x_dot_dir * r + r * r) / nx2;
    if delta <= -1.0 {
        return 0.0;
    }
    let diff = -ux * (-0.5 * beta * delta.ln_1p()).exp_m1();
    psi(diff, fp.p) * r.powf(-(fp.n as f64) - fp.s * fp.p)
}

/// Estimates `2∫ψ(|x|^{−β} − |y|^{−β})|x−y|^{−N−sp} dy` at the point `x`.
pub fn montecarlo_at(
    beta: f64,
    fp: &FractionalParams,
    x: &[f64],
    samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    fp.validate()?;
    if x.len() != fp.n {
        return Err(crate::error::Error::DimensionMismatch {
            expected: fp.n,
            got: x.len(),
        });
    }
    if samples < 10_000 {
        return Err(invalid(format!(
            "need at least 10^4 samples, got {samples}"
        )));
    }
    if !(beta > 0.0 && beta * (fp.p - 1.0) < fp.n as f64) {
        return Err(invalid(format!("need 0 < β < N/(p−1), got {beta}")));
    }
    let nx2 = x.iter().map(|v| v * v).sum::<f64>();
    let nx = nx2.sqrt();
    if nx == 0.0 {
        return Err(invalid("x must be nonzero"));
    }
    let sampler = Sampler::new(fp, nx);
    let ux = nx.powf(-beta);
    let batches = samples.div_ceil(BATCH as u64);
    let partial: Vec<(f64, f64)> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream(seed, "montecarlo", b);
            let count = (samples - b * BATCH as u64).min(BATCH as u64);
            let mut dir = vec![0.0; fp.n];
            let (mut sum, mut sum2) = (0.0, 0.0);
            for _ in 0..count {
                let r = sampler.draw_radius(&mut rng);
                sampler.draw_direction(&mut rng, &mut dir);
                let xd: f64 = x.iter().zip(&dir).map(|(a, b)| a * b).sum();
                let g = kernel(ux, nx2, xd, r, beta, fp) + kernel(ux, nx2, -xd, r, beta, fp);
                let w = g / sampler.density(r);
                sum += w;
                sum2 += w * w;
            }
            (sum, sum2)
        })
        .collect();
    let (sum, sum2) = partial
        .iter()
        .fold((0.0, 0.0), |(a, b), (c, d)| (a + c, b + d));
    let m = samples as f64;
    let mean = sum / m;
    let var = (sum2 / m - mean * mean).max(0.0) * m / (m - 1.0);
    Ok(McEstimate {
        estimate: mean,
        standard_error: (var / m).sqrt(),
        samples,
    })
}

/// Estimate of `C(β)` at `x = e₁`.
pub fn montecarlo_oracle(
    beta: f64,
    fp: &FractionalParams,
    samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    let mut x = vec![0.0; fp.n];
    x[0] = 1.0;
    montecarlo_at(beta, fp, &x, samples, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible_and_validated() {
        let fp = FractionalParams::new(2, 0.5, 2.0).unwrap();
        let a = montecarlo_oracle(0.5, &fp, 20_000, 3).unwrap();
        let b = montecarlo_oracle(0.5, &fp, 20_000, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.standard_error > 0.0 && a.standard_error < a.estimate.abs());
        assert!(montecarlo_oracle(0.5, &fp, 100, 3).is_err());
        assert!(montecarlo_oracle(5.0, &fp, 20_000, 3).is_err());
    }

    #[test]
    fn sampler_density_integrates_to_one() {
        let fp = FractionalParams::new(3, 0.5, 2.0).unwrap();
        let s = Sampler::new(&fp, 1.0);
        // ∫ radial density dr in log r, split at the mixture breakpoints
        let mut total = 0.0;
        let knots = [-30.0f64, s.r1.ln(), s.r0.ln(), 40.0];
        for w in knots.windows(2) {
            let steps = 100_000;
            let dt = (w[1] - w[0]) / steps as f64;
            for k in 0..steps {
                let r = (w[0] + (k as f64 + 0.5) * dt).exp();
                total += s.radial_density(r) * r * dt;
            }
        }
        assert!((total - 1.0).abs() < 1e-6, "{total}");
    }
}
