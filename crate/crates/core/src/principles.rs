//! The three convexity principles as signed gap functionals.
//!
//! Every `*_gap` function returns `right-hand side − left-hand side` of the
//! corresponding inequality, so a valid inequality shows up as a nonnegative
//! number (up to rounding).

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hfun::{dot, HomogeneousForm};

/// Value and gradient of a function at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSample {
    pub u: f64,
    pub grad: Vec<f64>,
}

impl PointSample {
    pub fn new(u: f64, grad: Vec<f64>) -> Self {
        Self { u, grad }
    }

    /// The sample of `c·u`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            u: c * self.u,
            grad: self.grad.iter().map(|g| c * g).collect(),
        }
    }
}

/// Values of `u` and `v` at two points `x` and `y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscretePair {
    pub ux: f64,
    pub uy: f64,
    pub vx: f64,
    pub vy: f64,
}

/// Mass, momentum and exponent of the generalized kinetic energy `H(φ)/m^β`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KineticPoint {
    pub m: f64,
    pub phi: Vec<f64>,
    pub beta: f64,
}

/// A probability density `ρ` with respect to nodal reference weights `ν`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteDensity {
    values: Vec<f64>,
    weights: Vec<f64>,
}

impl DiscreteDensity {
    pub fn new(values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if values.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: weights.len(),
                got: values.len(),
            });
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(invalid("reference weights must be positive"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(invalid(format!(
                "reference weights must sum to 1, got {total}"
            )));
        }
        if values.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(invalid("density values must be finite and nonnegative"));
        }
        let mass: f64 = values.iter().zip(&weights).map(|(r, w)| r * w).sum();
        if (mass - 1.0).abs() > 1e-10 {
            return Err(invalid(format!("density must have unit mass, got {mass}")));
        }
        Ok(Self { values, weights })
    }

    /// Rescales arbitrary nonnegative values to unit mass.
    pub fn normalized(values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let mass: f64 = values.iter().zip(&weights).map(|(r, w)| r * w).sum();
        if !(mass > 0.0) {
            return Err(Error::Degenerate("density has zero mass".into()));
        }
        Self::new(values.iter().map(|r| r / mass).collect(), weights)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

fn check_t(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(invalid(format!(
            "interpolation parameter must lie in [0, 1], got {t}"
        )))
    }
}

fn check_dim(form: &HomogeneousForm, v: &[f64]) -> Result<()> {
    if v.len() != form.dim() {
        return Err(Error::DimensionMismatch {
            expected: form.dim(),
            got: v.len(),
        });
    }
    Ok(())
}

/// `sign(x)·|x|^e`, with `0` at `x = 0` for any exponent.
fn signed_pow(x: f64, e: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum() * x.abs().powf(e)
    }
}

/// `H(φ)/m^β`.
pub fn kinetic_energy(form: &HomogeneousForm, pt: &KineticPoint) -> Result<f64> {
    check_dim(form, &pt.phi)?;
    if !(pt.m > 0.0) {
        return Err(invalid(format!("mass must be positive, got {}", pt.m)));
    }
    Ok(form.value(&pt.phi) / pt.m.powf(pt.beta))
}

/// `(1−t)E(pt0) + tE(pt1) − E((1−t)pt0 + t·pt1)` for `E = H(φ)/m^β`.
pub fn kinetic_convexity_gap(
    form: &HomogeneousForm,
    pt0: &KineticPoint,
    pt1: &KineticPoint,
    t: f64,
) -> Result<f64> {
    check_t(t)?;
    if pt0.beta != pt1.beta {
        return Err(invalid("both kinetic points must share β"));
    }
    let e0 = kinetic_energy(form, pt0)?;
    let e1 = kinetic_energy(form, pt1)?;
    let mid = KineticPoint {
        m: (1.0 - t) * pt0.m + t * pt1.m,
        phi: pt0
            .phi
            .iter()
            .zip(&pt1.phi)
            .map(|(a, b)| (1.0 - t) * a + t * b)
            .collect(),
        beta: pt0.beta,
    };
    Ok((1.0 - t) * e0 + t * e1 - kinetic_energy(form, &mid)?)
}

/// `σ_t = ((1−t)u0^q + t·u1^q)^{1/q}`.
pub fn sigma_interpolate(u0: f64, u1: f64, q: f64, t: f64) -> Result<f64> {
    check_t(t)?;
    if !(q >= 1.0) {
        return Err(invalid(format!("q must be at least 1, got {q}")));
    }
    if u0 < 0.0 || u1 < 0.0 {
        return Err(invalid("interpolated values must be nonnegative"));
    }
    Ok(sigma_unchecked(u0, u1, q, t))
}

fn sigma_unchecked(u0: f64, u1: f64, q: f64, t: f64) -> f64 {
    if t == 0.0 {
        u0
    } else if t == 1.0 {
        u1
    } else {
        ((1.0 - t) * u0.powf(q) + t * u1.powf(q)).powf(1.0 / q)
    }
}

/// Pointwise gradient of the interpolating curve,
/// `∇σ_t = σ_t^{1−q}[(1−t)u0^{q−1}∇u0 + t·u1^{q−1}∇u1]`.
pub fn grad_sigma(s0: &PointSample, s1: &PointSample, q: f64, t: f64) -> Result<Vec<f64>> {
    if s0.grad.len() != s1.grad.len() {
        return Err(Error::DimensionMismatch {
            expected: s0.grad.len(),
            got: s1.grad.len(),
        });
    }
    let sigma = sigma_interpolate(s0.u, s1.u, q, t)?;
    if t == 0.0 {
        return Ok(s0.grad.clone());
    }
    if t == 1.0 {
        return Ok(s1.grad.clone());
    }
    if sigma == 0.0 {
        return Err(Error::Degenerate(
            "σ_t vanishes; its gradient is undefined".into(),
        ));
    }
    let a = (1.0 - t) * s0.u.powf(q - 1.0);
    let b = t * s1.u.powf(q - 1.0);
    let scale = sigma.powf(1.0 - q);
    Ok(s0
        .grad
        .iter()
        .zip(&s1.grad)
        .map(|(g0, g1)| scale * (a * g0 + b * g1))
        .collect())
}

/// `(1−t)H(∇u0) + tH(∇u1) − H(∇σ_t)`; nonnegative whenever `1 ≤ q ≤ p`.
pub fn hidden_convexity_gap(
    form: &HomogeneousForm,
    s0: &PointSample,
    s1: &PointSample,
    q: f64,
    t: f64,
) -> Result<f64> {
    check_dim(form, &s0.grad)?;
    check_dim(form, &s1.grad)?;
    let h0 = form.value(&s0.grad);
    let h1 = form.value(&s1.grad);
    let gs = match grad_sigma(s0, s1, q, t) {
        Ok(g) => g,
        Err(Error::Degenerate(_)) if h0 == 0.0 && h1 == 0.0 => return Ok(0.0),
        Err(e) => return Err(e),
    };
    Ok((1.0 - t) * h0 + t * h1 - form.value(&gs))
}

/// Both sides of the general Picone inequality at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PiconeGap {
    /// `(1/p)⟨∇H(∇u), ∇(v^q/u^{q−1})⟩`.
    pub lhs: f64,
    /// `H(∇v)^{q/p} H(∇u)^{(p−q)/p}`.
    pub rhs: f64,
    pub gap: f64,
    /// `(q/p)H(∇v) + ((p−q)/p)H(∇u)`, the Young-relaxed right-hand side.
    pub weak_rhs: f64,
    pub weak_gap: f64,
}

fn homogeneous_degree(form: &HomogeneousForm) -> Result<f64> {
    if !form.is_homogeneous() {
        return Err(Error::Unsupported(
            "this identity needs a positively homogeneous form; use the anisotropic variant".into(),
        ));
    }
    Ok(form.degree())
}

fn check_q(q: f64, p: f64) -> Result<()> {
    if q > 1.0 && q <= p {
        Ok(())
    } else {
        Err(invalid(format!("need 1 < q ≤ p, got q = {q}, p = {p}")))
    }
}

/// `∇(v^q/u^{q−1}) = q(v/u)^{q−1}∇v − (q−1)(v/u)^q∇u`.
fn picone_test_gradient(su: &PointSample, sv: &PointSample, q: f64) -> Vec<f64> {
    let ratio = sv.u / su.u;
    let a = q * ratio.powf(q - 1.0);
    let b = (q - 1.0) * ratio.powf(q);
    sv.grad
        .iter()
        .zip(&su.grad)
        .map(|(gv, gu)| a * gv - b * gu)
        .collect()
}

/// The general Picone inequality in strong and weak (Young) form.
pub fn picone_gap(
    form: &HomogeneousForm,
    su: &PointSample,
    sv: &PointSample,
    q: f64,
) -> Result<PiconeGap> {
    let p = homogeneous_degree(form)?;
    check_q(q, p)?;
    check_dim(form, &su.grad)?;
    check_dim(form, &sv.grad)?;
    if !(su.u > 0.0) {
        return Err(Error::Degenerate(format!(
            "u must be positive, got {}",
            su.u
        )));
    }
    if sv.u < 0.0 {
        return Err(invalid(format!("v must be nonnegative, got {}", sv.u)));
    }
    let hu = form.value(&su.grad);
    let hv = form.value(&sv.grad);
    let test = picone_test_gradient(su, sv, q);
    let lhs = dot(&form.gradient(&su.grad), &test) / p;
    let rhs = hv.powf(q / p) * hu.powf((p - q) / p);
    let weak_rhs = (q / p) * hv + ((p - q) / p) * hu;
    Ok(PiconeGap {
        lhs,
        rhs,
        gap: rhs - lhs,
        weak_rhs,
        weak_gap: weak_rhs - lhs,
    })
}

/// Coordinatewise Picone inequality for `H(z) = Σ|z_i|^{p_i}` with
/// exponents `1 < q_i ≤ p_i`:
/// `Σ|u_{x_i}|^{p_i−2}u_{x_i}(v^{q_i}/u^{q_i−1})_{x_i} ≤ Σ|v_{x_i}|^{q_i}|u_{x_i}|^{p_i−q_i}`.
/// Returns `rhs − lhs`.
pub fn anisotropic_picone_gap(
    exponents: &[f64],
    qs: &[f64],
    su: &PointSample,
    sv: &PointSample,
) -> Result<f64> {
    let n = exponents.len();
    for len in [qs.len(), su.grad.len(), sv.grad.len()] {
        if len != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: len,
            });
        }
    }
    if !(su.u > 0.0) {
        return Err(Error::Degenerate(format!(
            "u must be positive, got {}",
            su.u
        )));
    }
    if sv.u < 0.0 {
        return Err(invalid("v must be nonnegative"));
    }
    let ratio = sv.u / su.u;
    let mut gap = 0.0;
    for i in 0..n {
        let (p, q) = (exponents[i], qs[i]);
        check_q(q, p)?;
        let (gu, gv) = (su.grad[i], sv.grad[i]);
        let test = q * ratio.powf(q - 1.0) * gv - (q - 1.0) * ratio.powf(q) * gu;
        let lhs = signed_pow(gu, p - 1.0) * test;
        let rhs = gv.abs().powf(q) * gu.abs().powf(p - q);
        gap += rhs - lhs;
    }
    Ok(gap)
}

/// `|Δv|^q|Δu|^{p−q} − |Δu|^{p−2}Δu·[v(x)^q/u(x)^{q−1} − v(y)^q/u(y)^{q−1}]`.
pub fn discrete_picone_gap(d: &DiscretePair, p: f64, q: f64) -> Result<f64> {
    check_q(q, p)?;
    if !(d.ux > 0.0 && d.uy > 0.0) {
        return Err(Error::Degenerate("u values must be positive".into()));
    }
    if d.vx < 0.0 || d.vy < 0.0 {
        return Err(invalid("v values must be nonnegative"));
    }
    let du = d.ux - d.uy;
    let dv = d.vx - d.vy;
    let quot = |v: f64, u: f64| {
        if v == 0.0 {
            0.0
        } else {
            v.powf(q) / u.powf(q - 1.0)
        }
    };
    let lhs = signed_pow(du, p - 1.0) * (quot(d.vx, d.ux) - quot(d.vy, d.uy));
    let rhs = dv.abs().powf(q) * du.abs().powf(p - q);
    Ok(rhs - lhs)
}

/// `(1−t)|Δu0|^p + t|Δu1|^p − |Δσ_t|^p` for two points `x, y`.
#[allow(clippy::too_many_arguments)]
pub fn discrete_hidden_gap(
    u0x: f64,
    u0y: f64,
    u1x: f64,
    u1y: f64,
    p: f64,
    q: f64,
    t: f64,
) -> Result<f64> {
    check_q(q, p)?;
    check_t(t)?;
    if [u0x, u0y, u1x, u1y].iter().any(|u| *u < 0.0) {
        return Err(invalid("values must be nonnegative"));
    }
    let sx = sigma_unchecked(u0x, u1x, q, t);
    let sy = sigma_unchecked(u0y, u1y, q, t);
    Ok(
        (1.0 - t) * (u0x - u0y).abs().powf(p) + t * (u1x - u1y).abs().powf(p)
            - (sx - sy).abs().powf(p),
    )
}

/// `|A−t|^q − (1−t)^{q−1}(A^q − t)` for `A ≥ 0`, `t ∈ [0,1]`, `q > 1`.
pub fn elementary_gap(a: f64, t: f64, q: f64) -> Result<f64> {
    check_t(t)?;
    if a < 0.0 {
        return Err(invalid("A must be nonnegative"));
    }
    if !(q > 1.0) {
        return Err(invalid("q must exceed 1"));
    }
    Ok((a - t).abs().powf(q) - (1.0 - t).powf(q - 1.0) * (a.powf(q) - t))
}

/// Closed-form `d/dt H(∇σ_t)` at `t = 0`:
/// `⟨∇H(∇u),∇v⟩(v/u)^{q−1} − (p(q−1)/q)H(∇u)(v/u)^q − (p/q)H(∇u)`.
pub fn derivative_at_zero(
    form: &HomogeneousForm,
    su: &PointSample,
    sv: &PointSample,
    q: f64,
) -> Result<f64> {
    let p = homogeneous_degree(form)?;
    check_dim(form, &su.grad)?;
    check_dim(form, &sv.grad)?;
    if !(su.u > 0.0) {
        return Err(Error::Degenerate(format!(
            "u must be positive, got {}",
            su.u
        )));
    }
    if !(q >= 1.0) {
        return Err(invalid("q must be at least 1"));
    }
    let ratio = sv.u / su.u;
    let hu = form.value(&su.grad);
    let cross = dot(&form.gradient(&su.grad), &sv.grad);
    Ok(cross * ratio.powf(q - 1.0) - p * (q - 1.0) / q * hu * ratio.powf(q) - p / q * hu)
}

/// Both algebraic forms of the discrete information functional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FisherInformation {
    /// `Σ H(∇ρ/ρ) ρ^{p−β} ν`.
    pub log_form: f64,
    /// `(p/(p−β))^p Σ H(∇ρ^{(p−β)/p}) ν`.
    pub root_form: f64,
}

/// `J_{H,β}(ρ) = Σ_i H(∇ρ_i/ρ_i) ρ_i^{p−β} ν_i`, computed two ways.
pub fn fisher_information(
    form: &HomogeneousForm,
    beta: f64,
    rho: &DiscreteDensity,
    grad_rho: &[Vec<f64>],
) -> Result<FisherInformation> {
    let p = homogeneous_degree(form)?;
    if !(beta >= 0.0 && beta <= p - 1.0) {
        return Err(invalid(format!(
            "need 0 ≤ β ≤ p − 1, got β = {beta}, p = {p}"
        )));
    }
    if grad_rho.len() != rho.values.len() {
        return Err(Error::DimensionMismatch {
            expected: rho.values.len(),
            got: grad_rho.len(),
        });
    }
    let a = (p - beta) / p;
    let mut log_form = 0.0;
    let mut root_form = 0.0;
    let mut scratch = vec![0.0; form.dim()];
    for ((r, w), g) in rho.values.iter().zip(&rho.weights).zip(grad_rho) {
        check_dim(form, g)?;
        if *r == 0.0 {
            if g.iter().any(|x| *x != 0.0) {
                return Err(Error::Degenerate("ρ vanishes where ∇ρ does not".into()));
            }
            continue;
        }
        for (s, x) in scratch.iter_mut().zip(g) {
            *s = x / r;
        }
        log_form += form.value(&scratch) * r.powf(p - beta) * w;
        let chain = a * r.powf(a - 1.0);
        for (s, x) in scratch.iter_mut().zip(g) {
            *s = chain * x;
        }
        root_form += form.value(&scratch) * w;
    }
    root_form *= (1.0 / a).powf(p);
    Ok(FisherInformation {
        log_form,
        root_form,
    })
}

/// Which sharpness counterexample to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CounterexampleKind {
    /// Kinetic energy with `p − 1 < β < p`.
    BetaAbove,
    /// Hidden convexity with `q > p`.
    QAbove,
}

/// Inputs for [`counterexample`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleParams {
    /// `β` for [`CounterexampleKind::BetaAbove`], `q` for [`CounterexampleKind::QAbove`].
    pub exponent: f64,
    /// Scaling factor `c > 1` of the second endpoint.
    pub c: f64,
    /// Base mass (kinetic) or base value `u0` (hidden convexity).
    pub base_value: f64,
    /// Base momentum `φ0` (kinetic) or base gradient `∇u0` (hidden convexity).
    pub base_vector: Vec<f64>,
    pub t: f64,
}

impl CounterexampleParams {
    pub fn new(exponent: f64, c: f64, dim: usize) -> Self {
        let mut base_vector = vec![0.0; dim];
        base_vector[0] = 1.0;
        Self {
            exponent,
            c,
            base_value: 1.0,
            base_vector,
            t: 0.5,
        }
    }
}

/// Builds the endpoint-scaling counterexample (second endpoint `c` times the
/// first) and returns the convexity violation, which is strictly positive
/// outside the valid regime.
pub fn counterexample(
    kind: CounterexampleKind,
    form: &HomogeneousForm,
    params: &CounterexampleParams,
) -> Result<f64> {
    let p = homogeneous_degree(form)?;
    let CounterexampleParams {
        exponent,
        c,
        base_value,
        ref base_vector,
        t,
    } = *params;
    if !(c > 1.0) {
        return Err(invalid(format!("scaling factor must exceed 1, got {c}")));
    }
    if !(t > 0.0 && t < 1.0) {
        return Err(invalid("t must lie strictly inside (0, 1)"));
    }
    if !(base_value > 0.0) {
        return Err(invalid("base value must be positive"));
    }
    check_dim(form, base_vector)?;
    if form.value(base_vector) == 0.0 {
        return Err(Error::Degenerate(
            "base vector has H = 0; nothing can be violated".into(),
        ));
    }
    let violation = match kind {
        CounterexampleKind::BetaAbove => {
            if exponent <= p - 1.0 {
                return Err(Error::NoViolation(format!(
                    "β = {exponent} ≤ p − 1 = {}: the kinetic energy is convex",
                    p - 1.0
                )));
            }
            if exponent >= p {
                return Err(invalid(format!("need β < p = {p}, got {exponent}")));
            }
            let pt0 = KineticPoint {
                m: base_value,
                phi: base_vector.clone(),
                beta: exponent,
            };
            let pt1 = KineticPoint {
                m: c * base_value,
                phi: base_vector.iter().map(|x| c * x).collect(),
                beta: exponent,
            };
            -kinetic_convexity_gap(form, &pt0, &pt1, t)?
        }
        CounterexampleKind::QAbove => {
            if exponent <= p {
                return Err(Error::NoViolation(format!(
                    "q = {exponent} ≤ p = {p}: hidden convexity holds"
                )));
            }
            let s0 = PointSample::new(base_value, base_vector.clone());
            let s1 = s0.scaled(c);
            -hidden_convexity_gap(form, &s0, &s1, exponent, t)?
        }
    };
    Ok(violation)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn h(p: f64, dim: usize) -> HomogeneousForm {
        HomogeneousForm::power_euclid(p, dim).unwrap()
    }

    #[test]
    fn kinetic_energy_examples() {
        let pt = KineticPoint {
            m: 2.0,
            phi: vec![2.0, 0.0],
            beta: 1.0,
        };
        assert_eq!(kinetic_energy(&h(2.0, 2), &pt).unwrap(), 2.0);
        let zero = KineticPoint {
            m: 2.0,
            phi: vec![0.0, 0.0],
            beta: 1.0,
        };
        assert_eq!(kinetic_energy(&h(2.0, 2), &zero).unwrap(), 0.0);
        let pt3 = KineticPoint {
            m: 1.0,
            phi: vec![1.0; 3],
            beta: 2.0,
        };
        assert_relative_eq!(
            kinetic_energy(&h(3.0, 3), &pt3).unwrap(),
            3f64.powf(1.5),
            max_relative = 1e-15
        );
        let bad = KineticPoint {
            m: 0.0,
            phi: vec![1.0, 0.0],
            beta: 1.0,
        };
        assert!(kinetic_energy(&h(2.0, 2), &bad).is_err());
    }

    #[test]
    fn kinetic_gap_examples() {
        let form = h(2.0, 2);
        let pt0 = KineticPoint {
            m: 1.0,
            phi: vec![1.0, 0.0],
            beta: 1.0,
        };
        let pt1 = KineticPoint {
            m: 2.0,
            phi: vec![0.0, 2.0],
            beta: 1.0,
        };
        assert_eq!(kinetic_convexity_gap(&form, &pt0, &pt0, 0.3).unwrap(), 0.0);
        assert_eq!(kinetic_convexity_gap(&form, &pt0, &pt1, 0.0).unwrap(), 0.0);
        // E0 = 1, E1 = 4/2 = 2, midpoint (m = 1.5, φ = (0.5, 1)) has E = 1.25/1.5.
        let expected = 0.5 * 1.0 + 0.5 * 2.0 - 1.25 / 1.5;
        let gap = kinetic_convexity_gap(&form, &pt0, &pt1, 0.5).unwrap();
        assert_relative_eq!(gap, expected, max_relative = 1e-14);
        assert!(gap >= 0.0);
        assert!(kinetic_convexity_gap(&form, &pt0, &pt1, 1.5).is_err());
        let other_beta = KineticPoint { beta: 0.5, ..pt1 };
        assert!(kinetic_convexity_gap(&form, &pt0, &other_beta, 0.5).is_err());
    }

    #[test]
    fn beta_zero_is_plain_convexity() {
        let form = h(3.0, 2);
        let pt0 = KineticPoint {
            m: 1.0,
            phi: vec![1.0, -2.0],
            beta: 0.0,
        };
        let pt1 = KineticPoint {
            m: 5.0,
            phi: vec![3.0, 0.5],
            beta: 0.0,
        };
        for t in [0.1, 0.5, 0.9] {
            assert!(kinetic_convexity_gap(&form, &pt0, &pt1, t).unwrap() >= 0.0);
        }
    }

    #[test]
    fn sigma_examples() {
        for t in [0.0, 0.3, 1.0] {
            assert_relative_eq!(
                sigma_interpolate(1.0, 1.0, 2.5, t).unwrap(),
                1.0,
                max_relative = 1e-15
            );
        }
        assert_eq!(sigma_interpolate(0.7, 3.0, 2.0, 0.0).unwrap(), 0.7);
        assert_relative_eq!(
            sigma_interpolate(0.0, 1.0, 2.0, 0.5).unwrap(),
            0.5f64.sqrt()
        );
        assert!(sigma_interpolate(-1.0, 1.0, 2.0, 0.5).is_err());
        assert!(sigma_interpolate(1.0, 1.0, 0.5, 0.5).is_err());
    }

    #[test]
    fn grad_sigma_examples() {
        let s0 = PointSample::new(1.0, vec![1.0, 0.0]);
        let s1 = PointSample::new(1.0, vec![0.0, 1.0]);
        let g = grad_sigma(&s0, &s1, 2.0, 0.5).unwrap();
        assert_relative_eq!(g[0], 0.5);
        assert_relative_eq!(g[1], 0.5);
        assert_eq!(grad_sigma(&s0, &s1, 2.0, 0.0).unwrap(), s0.grad);
        let s = PointSample::new(2.5, vec![-1.0, 4.0]);
        for t in [0.2, 0.7] {
            let g = grad_sigma(&s, &s, 3.0, t).unwrap();
            for (a, b) in g.iter().zip(&s.grad) {
                assert_relative_eq!(a, b, max_relative = 1e-14);
            }
        }
        let z = PointSample::new(0.0, vec![1.0, 0.0]);
        assert!(matches!(
            grad_sigma(&z, &z, 2.0, 0.5),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn hidden_gap_examples() {
        let form = h(3.0, 2);
        let s0 = PointSample::new(0.8, vec![1.0, -2.0]);
        let s1 = s0.scaled(2.5);
        let gap = hidden_convexity_gap(&form, &s0, &s1, 3.0, 0.4).unwrap();
        let scale = form.value(&s1.grad);
        assert!(gap.abs() <= 1e-12 * scale, "{gap}");
        let other = PointSample::new(3.0, vec![0.5, 0.5]);
        assert_eq!(
            hidden_convexity_gap(&form, &s0, &other, 2.0, 0.0).unwrap(),
            0.0
        );
        assert_eq!(
            hidden_convexity_gap(&form, &s0, &other, 2.0, 1.0).unwrap(),
            0.0
        );
        let z = PointSample::new(0.0, vec![1.0, 0.0]);
        assert!(hidden_convexity_gap(&form, &z, &z, 2.0, 0.5).is_err());
        let flat = PointSample::new(0.0, vec![0.0, 0.0]);
        assert_eq!(
            hidden_convexity_gap(&form, &flat, &flat, 2.0, 0.5).unwrap(),
            0.0
        );
    }

    #[test]
    fn picone_examples() {
        let form = h(2.0, 2);
        let su = PointSample::new(1.0, vec![1.0, 0.0]);
        let sv = PointSample::new(1.0, vec![0.0, 1.0]);
        let r = picone_gap(&form, &su, &sv, 2.0).unwrap();
        assert_relative_eq!(r.lhs, -1.0);
        assert_relative_eq!(r.rhs, 1.0);
        assert_relative_eq!(r.gap, 2.0);

        let same = picone_gap(&form, &su, &su, 2.0).unwrap();
        assert_relative_eq!(same.lhs, 1.0, max_relative = 1e-15);
        assert_relative_eq!(same.rhs, 1.0, max_relative = 1e-15);

        let h3 = h(3.0, 2);
        let zero = PointSample::new(0.0, vec![0.0, 0.0]);
        let r = picone_gap(&h3, &su, &zero, 2.0).unwrap();
        assert!(r.lhs <= 0.0);
        assert_eq!(r.rhs, 0.0);
        assert!(r.gap >= 0.0);

        // H(∇u) = 0 with q < p: rhs uses 0^{(p−q)/p} = 0 and lhs vanishes.
        let flat_u = PointSample::new(1.0, vec![0.0, 0.0]);
        let r = picone_gap(&h3, &flat_u, &sv, 2.0).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert_eq!(r.rhs, 0.0);

        assert!(picone_gap(&form, &zero, &sv, 2.0).is_err());
        assert!(picone_gap(&form, &su, &sv, 3.0).is_err());
        let an = HomogeneousForm::anisotropic(vec![2.0, 3.0]).unwrap();
        assert!(matches!(
            picone_gap(&an, &su, &sv, 2.0),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn anisotropic_picone_reduces_to_coordinatewise_sum() {
        let su = PointSample::new(1.3, vec![0.4, -1.1]);
        let sv = PointSample::new(0.6, vec![2.0, 0.3]);
        let gap = anisotropic_picone_gap(&[2.0, 3.0], &[2.0, 2.5], &su, &sv).unwrap();
        assert!(gap >= 0.0);
        // equal quadratic exponents: matches the weak isotropic form
        let g = anisotropic_picone_gap(&[2.0, 2.0], &[2.0, 2.0], &su, &sv).unwrap();
        let form = HomogeneousForm::anisotropic(vec![2.0, 2.0]).unwrap();
        let r = picone_gap(&form, &su, &sv, 2.0).unwrap();
        assert_relative_eq!(g, r.weak_gap, max_relative = 1e-12);
    }

    #[test]
    fn discrete_picone_examples() {
        let d = DiscretePair {
            ux: 2.0,
            uy: 2.0,
            vx: 0.5,
            vy: 3.0,
        };
        assert_eq!(discrete_picone_gap(&d, 3.0, 2.0).unwrap(), 0.0);
        assert!(discrete_picone_gap(&d, 2.0, 2.0).unwrap() >= 0.0);
        let d = DiscretePair {
            ux: 1.5,
            uy: 4.0,
            vx: 1.5,
            vy: 4.0,
        };
        for (p, q) in [(2.0, 2.0), (3.0, 2.0), (1.5, 1.5)] {
            let g = discrete_picone_gap(&d, p, q).unwrap();
            assert!(g.abs() <= 1e-12 * 2.5f64.powf(p), "{g}");
        }
        let with_zero = DiscretePair {
            ux: 1.0,
            uy: 2.0,
            vx: 0.0,
            vy: 1.0,
        };
        assert!(discrete_picone_gap(&with_zero, 2.0, 2.0).unwrap() >= 0.0);
        let bad = DiscretePair {
            ux: 0.0,
            uy: 2.0,
            vx: 1.0,
            vy: 1.0,
        };
        assert!(discrete_picone_gap(&bad, 2.0, 2.0).is_err());
        let neg = DiscretePair {
            ux: 1.0,
            uy: 2.0,
            vx: -1.0,
            vy: 1.0,
        };
        assert!(discrete_picone_gap(&neg, 2.0, 2.0).is_err());
    }

    #[test]
    fn discrete_hidden_examples() {
        assert_eq!(
            discrete_hidden_gap(1.0, 3.0, 1.0, 3.0, 3.0, 2.0, 0.0).unwrap(),
            0.0
        );
        let g = discrete_hidden_gap(1.0, 3.0, 1.0, 3.0, 3.0, 2.0, 0.4).unwrap();
        assert!(g.abs() <= 1e-13);
        assert_eq!(
            discrete_hidden_gap(1.0, 3.0, 5.0, 0.2, 2.0, 2.0, 0.0).unwrap(),
            0.0
        );
        assert!(discrete_hidden_gap(1.0, 3.0, 5.0, 0.2, 2.0, 2.0, 0.5).unwrap() >= 0.0);
        assert!(discrete_hidden_gap(-1.0, 3.0, 5.0, 0.2, 2.0, 2.0, 0.5).is_err());
    }

    #[test]
    fn elementary_examples() {
        for a in [0.0, 0.5, 1.0, 4.0] {
            assert_eq!(
                elementary_gap(a, 1.0, 2.5).unwrap(),
                (a - 1.0f64).abs().powf(2.5)
            );
        }
        assert_eq!(elementary_gap(1.0, 0.0, 3.0).unwrap(), 0.0);
        assert!(elementary_gap(-1.0, 0.5, 2.0).is_err());
        assert!(elementary_gap(1.0, 1.5, 2.0).is_err());
    }

    #[test]
    fn elementary_grid_sweep() {
        for q in [1.1, 2.0, 5.0] {
            let mut min = f64::INFINITY;
            for i in 0..100 {
                for j in 0..100 {
                    let a = 5.0 * i as f64 / 99.0;
                    let t = j as f64 / 99.0;
                    min = min.min(elementary_gap(a, t, q).unwrap());
                }
            }
            assert!(min >= -1e-12, "q = {q}: {min}");
        }
    }

    #[test]
    fn derivative_examples() {
        let form = h(3.0, 2);
        let su = PointSample::new(1.7, vec![0.3, -2.0]);
        for q in [1.5, 2.0, 3.0] {
            let d = derivative_at_zero(&form, &su, &su, q).unwrap();
            assert!(d.abs() <= 1e-12 * form.value(&su.grad), "{d}");
        }
        let zero = PointSample::new(0.0, vec![0.0, 0.0]);
        assert!(derivative_at_zero(&form, &zero, &su, 2.0).is_err());
    }

    #[test]
    fn fisher_examples() {
        let form = h(2.0, 1);
        let n = 5;
        let w = vec![1.0 / n as f64; n];
        let rho = DiscreteDensity::new(vec![1.0; n], w.clone()).unwrap();
        let f = fisher_information(&form, 1.0, &rho, &vec![vec![0.0]; n]).unwrap();
        assert_eq!(f.log_form, 0.0);
        assert_eq!(f.root_form, 0.0);

        let rho = DiscreteDensity::normalized(vec![0.5, 1.0, 2.0, 1.0, 0.5], w.clone()).unwrap();
        let g: Vec<Vec<f64>> = vec![vec![1.0], vec![2.0], vec![0.0], vec![-2.0], vec![-1.0]];
        let f = fisher_information(&form, 1.0, &rho, &g).unwrap();
        assert_relative_eq!(f.log_form, f.root_form, max_relative = 1e-12);

        let bad = DiscreteDensity::normalized(vec![0.0, 1.0, 2.0, 1.0, 0.5], w.clone()).unwrap();
        assert!(fisher_information(&form, 1.0, &bad, &g).is_err());
        assert!(fisher_information(&form, 1.5, &rho, &g).is_err());
        assert!(DiscreteDensity::new(vec![1.0; 5], vec![0.5; 5]).is_err());
    }

    #[test]
    fn counterexample_examples() {
        let form = h(2.0, 2);
        let v = counterexample(
            CounterexampleKind::BetaAbove,
            &form,
            &CounterexampleParams::new(1.5, 2.0, 2),
        )
        .unwrap();
        let expected = 1.5f64.powf(0.5) - (0.5 + 0.5 * 2f64.powf(0.5));
        assert_relative_eq!(v, expected, max_relative = 1e-12);
        assert!(v > 0.0);

        let v = counterexample(
            CounterexampleKind::QAbove,
            &form,
            &CounterexampleParams::new(3.0, 2.0, 2),
        )
        .unwrap();
        let expected = 4.5f64.powf(2.0 / 3.0) - 2.5;
        assert_relative_eq!(v, expected, max_relative = 1e-12);

        let err = counterexample(
            CounterexampleKind::BetaAbove,
            &form,
            &CounterexampleParams::new(1.0, 2.0, 2),
        );
        assert!(matches!(err, Err(Error::NoViolation(_))));
        let err = counterexample(
            CounterexampleKind::QAbove,
            &form,
            &CounterexampleParams::new(2.0, 2.0, 2),
        );
        assert!(matches!(err, Err(Error::NoViolation(_))));
        assert!(counterexample(
            CounterexampleKind::QAbove,
            &form,
            &CounterexampleParams::new(3.0, 1.0, 2)
        )
        .is_err());
    }
}
