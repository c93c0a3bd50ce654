use serde::{Deserialize, Serialize};

use crate::eigen::GridFunction;
use crate::error::{invalid, Error, Result};
use crate::hfun::NormPair;
use crate::quadrature::{integrate_with_breaks, QuadratureConfig};

/// Parameters of the weighted Hardy inequality with a general norm `F`:
/// `((N+γ−p)/p)^p ∫|v|^p F*(x)^{γ−p} ≤ ∫F(∇v)^p F*(x)^γ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalParams {
    #[serde(rename = "N")]
    pub n: usize,
    pub p: f64,
    pub gamma: f64,
    pub norm: NormPair,
}

impl LocalParams {
    pub fn new(n: usize, p: f64, gamma: f64, norm: NormPair) -> Result<Self> {
        let lp = Self { n, p, gamma, norm };
        lp.validate()?;
        Ok(lp)
    }

    /// Euclidean norm in dimension `n`.
    pub fn euclid(n: usize, p: f64, gamma: f64) -> Result<Self> {
        Self::new(n, p, gamma, NormPair::euclid(n)?)
    }

    pub fn validate(&self) -> Result<()> {
        let nf = self.n as f64;
        if self.n < 1 {
            return Err(invalid("N must be at least 1"));
        }
        if !(self.p > 1.0 && self.p < nf) {
            return Err(invalid(format!(
                "need 1 < p < N, got p = {}, N = {}",
                self.p, self.n
            )));
        }
        if !(self.gamma > self.p - nf) || !self.gamma.is_finite() {
            return Err(invalid(format!(
                "need γ > p − N = {}, got {}",
                self.p - nf,
                self.gamma
            )));
        }
        if self.norm.dim() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: self.norm.dim(),
            });
        }
        if !self.norm.is_smooth() {
            return Err(Error::Unsupported(
                "the Hardy inequality needs a smooth norm".into(),
            ));
        }
        Ok(())
    }

    /// `N + γ − p`.
    fn excess(&self) -> f64 {
        self.n as f64 + self.gamma - self.p
    }
}

/// `((N+γ−p)/p)^p`.
pub fn local_sharp_constant(lp: &LocalParams) -> Result<f64> {
    lp.validate()?;
    Ok((lp.excess() / lp.p).powf(lp.p))
}

/// `β^{p−1}(N − βp + β − p + γ)`.
pub fn beta_polynomial(beta: f64, lp: &LocalParams) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(invalid(format!("need β > 0, got {beta}")));
    }
    Ok(beta_poly(beta, lp.n as f64, lp.p, lp.gamma))
}

fn beta_poly(beta: f64, n: f64, p: f64, gamma: f64) -> f64 {
    beta.powf(p - 1.0) * (n - beta * p + beta - p + gamma)
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximizer of the β-polynomial over `(0, (N+γ−p)/(p−1))`.
///
/// Golden-section search narrows the bracket; the sign of a central
/// difference quotient then bisects it down to rounding level, since values
/// alone cannot resolve a quadratic maximum beyond `√ε`.
pub fn argmax_beta(lp: &LocalParams) -> Result<f64> {
    lp.validate()?;
    let (n, p, g) = (lp.n as f64, lp.p, lp.gamma);
    let f = |b: f64| beta_poly(b, n, p, g);
    let (mut a, mut b) = (0.0, lp.excess() / (p - 1.0));
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-5 * (1.0 + b) {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let slope = |x: f64| {
        let h = 1e-5 * (1.0 + x);
        f(x + h) - f(x - h)
    };
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if slope(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Centred box `[−L, L]^N` with `nodes` interior nodes per axis and zero
/// boundary values; any `N ≥ 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardyBox {
    pub dim: usize,
    pub nodes: usize,
    pub half_width: f64,
}

impl HardyBox {
    pub fn new(dim: usize, nodes: usize, half_width: f64) -> Result<Self> {
        if dim == 0 || nodes < 3 || !(half_width > 0.0) {
            return Err(invalid(
                "box needs dim ≥ 1, at least 3 nodes and a positive half width",
            ));
        }
        Ok(Self {
            dim,
            nodes,
            half_width,
        })
    }

    pub fn h(&self) -> f64 {
        2.0 * self.half_width / (self.nodes + 1) as f64
    }

    pub fn len(&self) -> usize {
        self.nodes.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn coord(&self, k: usize) -> f64 {
        -self.half_width + (k + 1) as f64 * self.h()
    }

    /// Coordinates of interior node `i` (axis 0 fastest).
    pub fn coords(&self, mut i: usize) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.dim);
        for _ in 0..self.dim {
            x.push(self.coord(i % self.nodes));
            i /= self.nodes;
        }
        x
    }

    pub fn sample(&self, f: impl Fn(&[f64]) -> f64) -> GridFunction {
        GridFunction::new((0..self.len()).map(|i| f(&self.coords(i))).collect())
    }

    /// `sin²(π(F*(x) − a)/(b − a))` on the annulus `a < F*(x) < b`, zero elsewhere.
    pub fn annular_bump(&self, norm: &NormPair, inner: f64, outer: f64) -> Result<GridFunction> {
        if norm.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: norm.dim(),
            });
        }
        if !(inner > 0.0 && outer > inner) {
            return Err(invalid(format!(
                "need 0 < inner < outer, got {inner}, {outer}"
            )));
        }
        Ok(self.sample(|x| {
            let r = norm.dual_unchecked(x);
            if r > inner && r < outer {
                (std::f64::consts::PI * (r - inner) / (outer - inner))
                    .sin()
                    .powi(2)
            } else {
                0.0
            }
        }))
    }
}

/// Discrete Hardy quotient
/// `Σ_cells F(D_h v)^p F*(x_c)^γ h^N / Σ_nodes |v|^p F*(x)^{γ−p} h^N`
/// with forward differences and cell-centre weights.
pub fn local_hardy_check(lp: &LocalParams, bx: &HardyBox, v: &GridFunction) -> Result<f64> {
    lp.validate()?;
    if bx.dim != lp.n {
        return Err(Error::DimensionMismatch {
            expected: lp.n,
            got: bx.dim,
        });
    }
    if v.len() != bx.len() {
        return Err(Error::DimensionMismatch {
            expected: bx.len(),
            got: v.len(),
        });
    }
    let n = bx.nodes;
    let d = bx.dim;
    let h = bx.h();
    let p = lp.p;

    let mut denom = 0.0;
    for (i, vi) in v.values.iter().enumerate() {
        if *vi == 0.0 {
            continue;
        }
        let r = lp.norm.dual_unchecked(&bx.coords(i));
        if r == 0.0 {
            return Err(invalid("v must vanish at the origin"));
        }
        denom += vi.abs().powf(p) * r.powf(lp.gamma - p);
    }
    if denom == 0.0 {
        return Err(Error::Degenerate("v vanishes identically".into()));
    }

    // Cells anchored at full indices 0..=n on every axis.
    let at = |full: &[usize]| -> f64 {
        let mut idx = 0;
        let mut stride = 1;
        for &k in full {
            if k == 0 || k > n {
                return 0.0;
            }
            idx += (k - 1) * stride;
            stride *= n;
        }
        v.values[idx]
    };
    let cells = (n + 1).pow(d as u32);
    let mut full = vec![0usize; d];
    let mut grad = vec![0.0; d];
    let mut centre = vec![0.0; d];
    let mut numer = 0.0;
    for c in 0..cells {
        let mut rem = c;
        for k in full.iter_mut() {
            *k = rem % (n + 1);
            rem /= n + 1;
        }
        let base = at(&full);
        let mut any = false;
        for a in 0..d {
            full[a] += 1;
            grad[a] = (at(&full) - base) / h;
            full[a] -= 1;
            any |= grad[a] != 0.0;
        }
        if !any {
            continue;
        }
        for a in 0..d {
            centre[a] = -bx.half_width + (full[a] as f64 + 0.5) * h;
        }
        let f = lp.norm.primal_unchecked(&grad);
        numer += f.powf(p) * lp.norm.dual_unchecked(&centre).powf(lp.gamma);
    }
    Ok(numer / denom)
}

/// Hardy quotient of the `F*`-radial function `v(x) = φ(ln F*(x))·F*(x)^{−(N+γ−p)/p}`.
///
/// For such profiles `F(∇v) = |∂_r v|`, and the level sets of `F*` scale the
/// same way on both sides, so the quotient reduces to
/// `∫|φ' − ((N+γ−p)/p)φ|^p dt / ∫|φ|^p dt` for any norm. A slowly varying `φ`
/// approaches the sharp constant.
pub fn radial_hardy_ratio(
    lp: &LocalParams,
    phi: impl Fn(f64) -> (f64, f64),
    support: (f64, f64),
    breaks: &[f64],
    qc: &QuadratureConfig,
) -> Result<f64> {
    lp.validate()?;
    let k = lp.excess() / lp.p;
    let p = lp.p;
    let (a, b) = support;
    let num = integrate_with_breaks(
        |t| {
            let (v, dv) = phi(t);
            (dv - k * v).abs().powf(p)
        },
        a,
        b,
        breaks,
        qc,
    )?;
    let den = integrate_with_breaks(|t| phi(t).0.abs().powf(p), a, b, breaks, qc)?;
    if den.value == 0.0 {
        return Err(Error::Degenerate("profile vanishes".into()));
    }
    Ok(num.value / den.value)
}

/// Trapezoid in log-radius: rises linearly over `ramp`, stays at 1 for
/// `plateau`, falls over `ramp`. Returns `(φ, φ')`.
pub fn trapezoid_profile(ramp: f64, plateau: f64) -> impl Fn(f64) -> (f64, f64) {
    move |t: f64| {
        if t <= 0.0 || t >= 2.0 * ramp + plateau {
            (0.0, 0.0)
        } else if t < ramp {
            (t / ramp, 1.0 / ramp)
        } else if t <= ramp + plateau {
            (1.0, 0.0)
        } else {
            ((2.0 * ramp + plateau - t) / ramp, -1.0 / ramp)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sharp_constant_examples() {
        assert_eq!(
            local_sharp_constant(&LocalParams::euclid(3, 2.0, 0.0).unwrap()).unwrap(),
            0.25
        );
        assert_eq!(
            local_sharp_constant(&LocalParams::euclid(4, 2.0, 2.0).unwrap()).unwrap(),
            4.0
        );
        let near = LocalParams::euclid(3, 2.0, -1.0 + 1e-6).unwrap();
        assert!(local_sharp_constant(&near).unwrap() < 1e-11);
        assert!(LocalParams::euclid(3, 2.0, -1.0).is_err());
        assert!(LocalParams::euclid(2, 2.0, 0.0).is_err());
        assert!(LocalParams::new(3, 2.0, 0.0, NormPair::lp(1.0, 3).unwrap()).is_err());
    }

    #[test]
    fn beta_polynomial_examples() {
        let lp = LocalParams::euclid(3, 2.0, 0.0).unwrap();
        assert_relative_eq!(beta_polynomial(0.5, &lp).unwrap(), 0.25);
        // N − βp + β − p + γ = 0 at β = (N+γ−p)/(p−1)
        assert_eq!(beta_polynomial(1.0, &lp).unwrap(), 0.0);
        assert!(beta_polynomial(0.0, &lp).is_err());
        let b = argmax_beta(&lp).unwrap();
        assert!((b - 0.5).abs() <= 1e-8, "{b}");
    }

    #[test]
    fn argmax_on_several_parameter_sets() {
        for (n, p, g) in [(3, 1.5, 0.0), (5, 3.7, -1.2), (2, 1.1, 4.0), (7, 6.9, 0.3)] {
            let lp = LocalParams::euclid(n, p, g).unwrap();
            let want = (n as f64 + g - p) / p;
            let got = argmax_beta(&lp).unwrap();
            assert!((got - want).abs() <= 1e-8, "{n} {p} {g}: {got} vs {want}");
        }
    }

    #[test]
    fn radial_ratio_of_trapezoid() {
        let lp = LocalParams::euclid(3, 2.0, 0.0).unwrap();
        let qc = QuadratureConfig::default();
        let r = radial_hardy_ratio(
            &lp,
            trapezoid_profile(8.0, 40.0),
            (0.0, 56.0),
            &[8.0, 48.0],
            &qc,
        )
        .unwrap();
        // p = 2: the cross term integrates to zero, leaving k² + ∫φ'²/∫φ²
        let expected = 0.25 + (2.0 / 8.0) / (40.0 + 2.0 * 8.0 / 3.0);
        assert_relative_eq!(r, expected, max_relative = 1e-10);
    }

    #[test]
    fn grid_ratio_scale_invariance() {
        let lp = LocalParams::euclid(2, 1.5, 0.5).unwrap();
        let bx = HardyBox::new(2, 31, 1.0).unwrap();
        let v = bx.sample(|x| {
            let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
            if r > 0.2 && r < 0.8 {
                (std::f64::consts::PI * (r - 0.2) / 0.6).sin().powi(2)
            } else {
                0.0
            }
        });
        let a = local_hardy_check(&lp, &bx, &v).unwrap();
        let b = local_hardy_check(&lp, &bx, &v.scaled(3.7)).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-12);
        assert!(a >= local_sharp_constant(&lp).unwrap());
        assert!(local_hardy_check(&lp, &bx, &GridFunction::new(vec![0.0; bx.len()])).is_err());
    }
}
