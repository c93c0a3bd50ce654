//! Positively homogeneous convex integrands and norm/dual-norm pairs.
//!
//! Every evaluator here is closed form; there is no finite-difference
//! fallback. Forms whose gradient is not available in closed form are
//! rejected at construction.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Built-in norm families with closed-form duals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormKind {
    Euclid,
    /// `ℓ^r` with `1 ≤ r ≤ ∞`. Only `1 < r < ∞` is differentiable.
    Lp {
        r: f64,
    },
    /// `sqrt(Σ w_i z_i²)` with positive weights.
    WeightedEuclid {
        weights: Vec<f64>,
    },
}

/// A norm `F` together with its dual `F*(z) = sup_{x≠0} ⟨x/F(x), z⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormPair {
    kind: NormKind,
    dim: usize,
}

fn lp_value(z: &[f64], r: f64) -> f64 {
    let m = z.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
    if m == 0.0 {
        return 0.0;
    }
    if r.is_infinite() {
        return m;
    }
    if r == 1.0 {
        return z.iter().map(|x| x.abs()).sum();
    }
    let s: f64 = z.iter().map(|x| (x.abs() / m).powf(r)).sum();
    m * s.powf(1.0 / r)
}

fn lp_grad(z: &[f64], r: f64) -> Vec<f64> {
    let f = lp_value(z, r);
    if f == 0.0 {
        return vec![0.0; z.len()];
    }
    if r == 2.0 {
        return z.iter().map(|x| x / f).collect();
    }
    z.iter()
        .map(|x| x.signum() * (x.abs() / f).powf(r - 1.0))
        .map(|g| if g.is_nan() { 0.0 } else { g })
        .collect()
}

fn conjugate_exponent(r: f64) -> f64 {
    if r == 1.0 {
        f64::INFINITY
    } else if r.is_infinite() {
        1.0
    } else {
        r / (r - 1.0)
    }
}

impl NormPair {
    pub fn euclid(dim: usize) -> Result<Self> {
        Self::new(NormKind::Euclid, dim)
    }

    pub fn lp(r: f64, dim: usize) -> Result<Self> {
        Self::new(NormKind::Lp { r }, dim)
    }

    pub fn weighted(weights: Vec<f64>) -> Result<Self> {
        let dim = weights.len();
        Self::new(NormKind::WeightedEuclid { weights }, dim)
    }

    pub fn new(kind: NormKind, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("norm dimension must be at least 1"));
        }
        match &kind {
            NormKind::Euclid => {}
            NormKind::Lp { r } => {
                if r.is_nan() || *r < 1.0 {
                    return Err(invalid(format!("ℓ^r exponent must satisfy r ≥ 1, got {r}")));
                }
            }
            NormKind::WeightedEuclid { weights } => {
                if weights.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: weights.len(),
                    });
                }
                if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
                    return Err(invalid("weights must be finite and positive"));
                }
            }
        }
        Ok(Self { kind, dim })
    }

    pub fn kind(&self) -> &NormKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// True when both `F` and `F*` are `C¹` away from the origin.
    pub fn is_smooth(&self) -> bool {
        match &self.kind {
            NormKind::Lp { r } => *r > 1.0 && r.is_finite(),
            _ => true,
        }
    }

    /// The pair with the roles of `F` and `F*` exchanged.
    pub fn dual_pair(&self) -> NormPair {
        let kind = match &self.kind {
            NormKind::Euclid => NormKind::Euclid,
            NormKind::Lp { r } => NormKind::Lp {
                r: conjugate_exponent(*r),
            },
            NormKind::WeightedEuclid { weights } => NormKind::WeightedEuclid {
                weights: weights.iter().map(|w| 1.0 / w).collect(),
            },
        };
        NormPair {
            kind,
            dim: self.dim,
        }
    }

    fn check(&self, z: &[f64]) -> Result<()> {
        if z.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: z.len(),
            });
        }
        Ok(())
    }

    pub(crate) fn primal_unchecked(&self, z: &[f64]) -> f64 {
        match &self.kind {
            NormKind::Euclid => lp_value(z, 2.0),
            NormKind::Lp { r } => lp_value(z, *r),
            NormKind::WeightedEuclid { weights } => z
                .iter()
                .zip(weights)
                .map(|(x, w)| w * x * x)
                .sum::<f64>()
                .sqrt(),
        }
    }

    pub(crate) fn dual_unchecked(&self, z: &[f64]) -> f64 {
        match &self.kind {
            NormKind::Euclid => lp_value(z, 2.0),
            NormKind::Lp { r } => lp_value(z, conjugate_exponent(*r)),
            NormKind::WeightedEuclid { weights } => z
                .iter()
                .zip(weights)
                .map(|(x, w)| x * x / w)
                .sum::<f64>()
                .sqrt(),
        }
    }

    pub(crate) fn grad_primal_unchecked(&self, z: &[f64]) -> Vec<f64> {
        match &self.kind {
            NormKind::Euclid => lp_grad(z, 2.0),
            NormKind::Lp { r } => lp_grad(z, *r),
            NormKind::WeightedEuclid { weights } => {
                let f = self.primal_unchecked(z);
                if f == 0.0 {
                    return vec![0.0; z.len()];
                }
                z.iter().zip(weights).map(|(x, w)| w * x / f).collect()
            }
        }
    }

    pub(crate) fn grad_dual_unchecked(&self, z: &[f64]) -> Vec<f64> {
        self.dual_pair().grad_primal_unchecked(z)
    }

    /// `F(z)`.
    pub fn primal(&self, z: &[f64]) -> Result<f64> {
        self.check(z)?;
        Ok(self.primal_unchecked(z))
    }

    /// `F*(z)`.
    pub fn dual(&self, z: &[f64]) -> Result<f64> {
        self.check(z)?;
        Ok(self.dual_unchecked(z))
    }

    /// `∇F(z)`; zero at the origin.
    pub fn grad_primal(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.check(z)?;
        if !self.is_smooth() {
            return Err(Error::Unsupported(format!("{self} is not differentiable")));
        }
        Ok(self.grad_primal_unchecked(z))
    }

    /// `∇F*(z)`; zero at the origin.
    pub fn grad_dual(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.check(z)?;
        if !self.is_smooth() {
            return Err(Error::Unsupported(format!(
                "dual of {self} is not differentiable"
            )));
        }
        Ok(self.grad_dual_unchecked(z))
    }
}

impl fmt::Display for NormPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            NormKind::Euclid => write!(f, "euclid"),
            NormKind::Lp { r } => write!(f, "l{r}"),
            NormKind::WeightedEuclid { weights } => write!(f, "weighted{weights:?}"),
        }
    }
}

/// Closed-form dual norm `F*(z)`.
pub fn dual_norm(pair: &NormPair, z: &[f64]) -> Result<f64> {
    pair.dual(z)
}

/// Shape of a [`HomogeneousForm`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FormKind {
    /// `|z|^p`.
    PowerEuclid { p: f64 },
    /// `F(z)^p` for a differentiable norm.
    PowerNorm { p: f64, norm: NormPair },
    /// `Σ_i |z_i|^{p_i}` with nondecreasing exponents. Not homogeneous overall.
    Anisotropic { exponents: Vec<f64> },
}

/// A convex integrand `H: ℝ^N → [0, ∞)`, positively homogeneous of degree `p`
/// (or coordinatewise homogeneous in the anisotropic case).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomogeneousForm {
    kind: FormKind,
    dim: usize,
}

impl HomogeneousForm {
    pub fn power_euclid(p: f64, dim: usize) -> Result<Self> {
        Self::new(FormKind::PowerEuclid { p }, dim)
    }

    pub fn power_norm(p: f64, norm: NormPair) -> Result<Self> {
        let dim = norm.dim();
        Self::new(FormKind::PowerNorm { p, norm }, dim)
    }

    pub fn anisotropic(exponents: Vec<f64>) -> Result<Self> {
        let dim = exponents.len();
        Self::new(FormKind::Anisotropic { exponents }, dim)
    }

    pub fn new(kind: FormKind, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("form dimension must be at least 1"));
        }
        let check_p = |p: f64| {
            if p.is_finite() && p > 1.0 {
                Ok(())
            } else {
                Err(invalid(format!("degree must satisfy p > 1, got {p}")))
            }
        };
        match &kind {
            FormKind::PowerEuclid { p } => check_p(*p)?,
            FormKind::PowerNorm { p, norm } => {
                check_p(*p)?;
                if norm.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: norm.dim(),
                    });
                }
                if !norm.is_smooth() {
                    return Err(Error::Unsupported(format!(
                        "{norm} has no closed-form gradient; only 1 < r < ∞ is accepted as a primal norm"
                    )));
                }
            }
            FormKind::Anisotropic { exponents } => {
                if exponents.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: exponents.len(),
                    });
                }
                for p in exponents {
                    check_p(*p)?;
                }
                if exponents.windows(2).any(|w| w[0] > w[1]) {
                    return Err(invalid("anisotropic exponents must be nondecreasing"));
                }
            }
        }
        Ok(Self { kind, dim })
    }

    pub fn kind(&self) -> &FormKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Homogeneity degree; for anisotropic forms the smallest exponent,
    /// which bounds the admissible interpolation exponent `q`.
    pub fn degree(&self) -> f64 {
        match &self.kind {
            FormKind::PowerEuclid { p } | FormKind::PowerNorm { p, .. } => *p,
            FormKind::Anisotropic { exponents } => exponents[0],
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        match &self.kind {
            FormKind::Anisotropic { exponents } => exponents.iter().all(|p| *p == exponents[0]),
            _ => true,
        }
    }

    /// True when `H` is a quadratic form (degree 2 and linear gradient).
    pub fn is_quadratic(&self) -> bool {
        match &self.kind {
            FormKind::PowerEuclid { p } => *p == 2.0,
            FormKind::PowerNorm { p, norm } => {
                *p == 2.0
                    && match norm.kind() {
                        NormKind::Lp { r } => *r == 2.0,
                        _ => true,
                    }
            }
            FormKind::Anisotropic { exponents } => exponents.iter().all(|p| *p == 2.0),
        }
    }

    fn check(&self, z: &[f64]) -> Result<()> {
        if z.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: z.len(),
            });
        }
        Ok(())
    }

    /// `H(z)` without the dimension check. Hot loops use this.
    pub fn value(&self, z: &[f64]) -> f64 {
        debug_assert_eq!(z.len(), self.dim);
        match &self.kind {
            FormKind::PowerEuclid { p } => {
                let sq: f64 = z.iter().map(|x| x * x).sum();
                if *p == 2.0 {
                    sq
                } else {
                    sq.powf(0.5 * p)
                }
            }
            FormKind::PowerNorm { p, norm } => norm.primal_unchecked(z).powf(*p),
            FormKind::Anisotropic { exponents } => {
                z.iter().zip(exponents).map(|(x, p)| x.abs().powf(*p)).sum()
            }
        }
    }

    /// Writes `∇H(z)` into `out`. Zero wherever `H` vanishes.
    pub fn gradient_into(&self, z: &[f64], out: &mut [f64]) {
        debug_assert_eq!(z.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim);
        match &self.kind {
            FormKind::PowerEuclid { p } => {
                let sq: f64 = z.iter().map(|x| x * x).sum();
                let scale = if *p == 2.0 {
                    2.0
                } else if sq == 0.0 {
                    0.0
                } else {
                    p * sq.powf(0.5 * p - 1.0)
                };
                for (o, x) in out.iter_mut().zip(z) {
                    *o = scale * x;
                }
            }
            FormKind::PowerNorm { p, norm } => {
                let f = norm.primal_unchecked(z);
                if f == 0.0 {
                    out.fill(0.0);
                    return;
                }
                let scale = p * f.powf(p - 1.0);
                for (o, g) in out.iter_mut().zip(norm.grad_primal_unchecked(z)) {
                    *o = scale * g;
                }
            }
            FormKind::Anisotropic { exponents } => {
                for ((o, x), p) in out.iter_mut().zip(z).zip(exponents) {
                    *o = if *x == 0.0 {
                        0.0
                    } else {
                        p * x.abs().powf(p - 1.0) * x.signum()
                    };
                }
            }
        }
    }

    pub fn gradient(&self, z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.gradient_into(z, &mut out);
        out
    }

    pub fn eval(&self, z: &[f64]) -> Result<f64> {
        self.check(z)?;
        Ok(self.value(z))
    }

    pub fn grad(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.check(z)?;
        Ok(self.gradient(z))
    }

    /// Returns `H^{q/p}` as a `q`-homogeneous form.
    ///
    /// `H^{1/p}` is 1-homogeneous and level-convex, hence convex; raising it to
    /// `q ≥ 1` keeps convexity. All built-in homogeneous kinds are closed under
    /// this operation.
    pub fn root_power(&self, q: f64) -> Result<Self> {
        let p = self.degree();
        if !(q > 1.0 && q <= p) {
            return Err(invalid(format!(
                "root_power needs 1 < q ≤ p = {p}, got q = {q}"
            )));
        }
        let kind = match &self.kind {
            FormKind::PowerEuclid { .. } => FormKind::PowerEuclid { p: q },
            FormKind::PowerNorm { norm, .. } => FormKind::PowerNorm {
                p: q,
                norm: norm.clone(),
            },
            FormKind::Anisotropic { exponents } => {
                if !self.is_homogeneous() {
                    return Err(Error::Unsupported(
                        "root_power needs a positively homogeneous form".into(),
                    ));
                }
                FormKind::Anisotropic {
                    exponents: vec![q; exponents.len()],
                }
            }
        };
        Self::new(kind, self.dim)
    }

    /// Returns the same form in another dimension (used when a descriptor
    /// omits `dim` and the context supplies it).
    pub fn with_dim(&self, dim: usize) -> Result<Self> {
        match &self.kind {
            FormKind::PowerEuclid { p } => Self::power_euclid(*p, dim),
            FormKind::PowerNorm { p, norm } => {
                let norm = match norm.kind() {
                    NormKind::WeightedEuclid { .. } => norm.clone(),
                    k => NormPair::new(k.clone(), dim)?,
                };
                Self::power_norm(*p, norm)
            }
            FormKind::Anisotropic { .. } => {
                if dim == self.dim {
                    Ok(self.clone())
                } else {
                    Err(Error::DimensionMismatch {
                        expected: dim,
                        got: self.dim,
                    })
                }
            }
        }
    }

    /// Parses a form descriptor.
    ///
    /// Accepted shapes are `name(k=v, ...)` and `name:k=v,...`, with names
    /// `power_euclid(p, dim)`, `power_lp(p, r, dim)`,
    /// `power_weighted(p, weights=w1;w2;...)` and
    /// `anisotropic(exponents=p1;p2;...)`. A missing `dim` falls back to
    /// `default_dim`.
    pub fn parse(desc: &str, default_dim: usize) -> Result<Self> {
        let desc = desc.trim();
        let (name, args) = if let Some(open) = desc.find('(') {
            let close = desc
                .rfind(')')
                .ok_or_else(|| invalid(format!("unbalanced parentheses in `{desc}`")))?;
            (&desc[..open], &desc[open + 1..close])
        } else if let Some((n, a)) = desc.split_once(':') {
            (n, a)
        } else {
            (desc, "")
        };
        let mut p = None;
        let mut r = None;
        let mut dim = None;
        let mut list = None;
        for kv in args.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| invalid(format!("expected key=value, got `{kv}`")))?;
            let num = |v: &str| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| invalid(format!("`{v}` is not a number")))
            };
            match k.trim() {
                "p" => p = Some(num(v)?),
                "r" => r = Some(num(v)?),
                "dim" => {
                    dim = Some(
                        v.trim()
                            .parse::<usize>()
                            .map_err(|_| invalid(format!("`{v}` is not a dimension")))?,
                    )
                }
                "weights" | "exponents" => {
                    list = Some(
                        v.split(';')
                            .map(str::trim)
                            .filter(|s| !s.is_empty())
                            .map(num)
                            .collect::<Result<Vec<_>>>()?,
                    )
                }
                other => return Err(invalid(format!("unknown key `{other}` in `{desc}`"))),
            }
        }
        let dim = dim.unwrap_or(default_dim);
        let need_p = || p.ok_or_else(|| invalid(format!("`{desc}` needs p")));
        match name.trim() {
            "power_euclid" => Self::power_euclid(need_p()?, dim),
            "power_lp" => {
                let r = r.ok_or_else(|| invalid("power_lp needs r"))?;
                Self::power_norm(need_p()?, NormPair::lp(r, dim)?)
            }
            "power_weighted" => {
                let w = list.ok_or_else(|| invalid("power_weighted needs weights"))?;
                Self::power_norm(need_p()?, NormPair::weighted(w)?)
            }
            "anisotropic" => {
                Self::anisotropic(list.ok_or_else(|| invalid("anisotropic needs exponents"))?)
            }
            other => Err(invalid(format!("unknown form `{other}`"))),
        }
    }
}

impl fmt::Display for HomogeneousForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            FormKind::PowerEuclid { p } => write!(f, "power_euclid(p={p}, dim={})", self.dim),
            FormKind::PowerNorm { p, norm } => match norm.kind() {
                NormKind::Euclid => write!(f, "power_lp(p={p}, r=2, dim={})", self.dim),
                NormKind::Lp { r } => write!(f, "power_lp(p={p}, r={r}, dim={})", self.dim),
                NormKind::WeightedEuclid { weights } => {
                    let w: Vec<String> = weights.iter().map(|w| w.to_string()).collect();
                    write!(f, "power_weighted(p={p}, weights={})", w.join(";"))
                }
            },
            FormKind::Anisotropic { exponents } => {
                let e: Vec<String> = exponents.iter().map(|w| w.to_string()).collect();
                write!(f, "anisotropic(exponents={})", e.join(";"))
            }
        }
    }
}

/// `H(z)` with dimension check.
pub fn eval_h(form: &HomogeneousForm, z: &[f64]) -> Result<f64> {
    form.eval(z)
}

/// `∇H(z)` with dimension check.
pub fn grad_h(form: &HomogeneousForm, z: &[f64]) -> Result<Vec<f64>> {
    form.grad(z)
}

/// `H^{q/p}`.
pub fn root_power(form: &HomogeneousForm, q: f64) -> Result<HomogeneousForm> {
    form.root_power(q)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sample_forms(dim: usize) -> Vec<HomogeneousForm> {
        let mut forms = vec![
            HomogeneousForm::power_euclid(2.0, dim).unwrap(),
            HomogeneousForm::power_euclid(3.0, dim).unwrap(),
            HomogeneousForm::power_euclid(1.5, dim).unwrap(),
            HomogeneousForm::power_norm(2.5, NormPair::lp(3.0, dim).unwrap()).unwrap(),
            HomogeneousForm::power_norm(1.7, NormPair::lp(1.5, dim).unwrap()).unwrap(),
            HomogeneousForm::power_norm(
                2.0,
                NormPair::weighted((1..=dim).map(|i| i as f64).collect()).unwrap(),
            )
            .unwrap(),
        ];
        let exps: Vec<f64> = (0..dim).map(|i| 1.5 + 0.5 * i as f64).collect();
        forms.push(HomogeneousForm::anisotropic(exps).unwrap());
        forms
    }

    fn random_vec(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
        (0..dim).map(|_| rng.random_range(-10.0..10.0)).collect()
    }

    #[test]
    fn eval_examples() {
        let h2 = HomogeneousForm::power_euclid(2.0, 2).unwrap();
        assert_eq!(eval_h(&h2, &[3.0, 4.0]).unwrap(), 25.0);
        for form in sample_forms(2) {
            assert_eq!(form.eval(&[0.0, 0.0]).unwrap(), 0.0);
        }
        let an = HomogeneousForm::anisotropic(vec![2.0, 3.0]).unwrap();
        assert_eq!(an.eval(&[1.0, 2.0]).unwrap(), 9.0);
        assert!(matches!(
            h2.eval(&[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn grad_examples() {
        let h2 = HomogeneousForm::power_euclid(2.0, 2).unwrap();
        assert_eq!(grad_h(&h2, &[1.0, 2.0]).unwrap(), vec![2.0, 4.0]);
        for p in [1.2, 2.0, 3.0, 7.5] {
            let h = HomogeneousForm::power_euclid(p, 3).unwrap();
            assert_eq!(h.grad(&[0.0; 3]).unwrap(), vec![0.0; 3]);
        }
        let h3 = HomogeneousForm::power_euclid(3.0, 2).unwrap();
        assert_eq!(h3.grad(&[1.0, 0.0]).unwrap(), vec![3.0, 0.0]);
        assert!(h3.grad(&[1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn dual_norm_examples() {
        let l1 = NormPair::lp(1.0, 2).unwrap();
        assert_eq!(dual_norm(&l1, &[2.0, -3.0]).unwrap(), 3.0);
        let l2 = NormPair::euclid(2).unwrap();
        assert_eq!(dual_norm(&l2, &[3.0, 4.0]).unwrap(), 5.0);
        let l3 = NormPair::lp(3.0, 2).unwrap();
        assert_relative_eq!(
            dual_norm(&l3, &[1.0, 1.0]).unwrap(),
            2f64.powf(2.0 / 3.0),
            max_relative = 1e-15
        );
        let linf = NormPair::lp(f64::INFINITY, 2).unwrap();
        assert_eq!(linf.dual(&[2.0, -3.0]).unwrap(), 5.0);
        let w = NormPair::weighted(vec![4.0, 1.0]).unwrap();
        assert_relative_eq!(w.dual(&[2.0, 0.0]).unwrap(), 1.0);
    }

    #[test]
    fn nonsmooth_norms_rejected_as_primal() {
        let l1 = NormPair::lp(1.0, 2).unwrap();
        assert!(matches!(
            HomogeneousForm::power_norm(2.0, l1.clone()),
            Err(Error::Unsupported(_))
        ));
        assert!(l1.grad_primal(&[1.0, 1.0]).is_err());
        assert!(NormPair::lp(0.5, 2).is_err());
        assert!(NormPair::weighted(vec![1.0, -1.0]).is_err());
    }

    #[test]
    fn root_power_examples() {
        let h4 = HomogeneousForm::power_euclid(4.0, 2).unwrap();
        let f = root_power(&h4, 2.0).unwrap();
        assert_eq!(f, HomogeneousForm::power_euclid(2.0, 2).unwrap());
        for form in sample_forms(3).into_iter().filter(|f| f.is_homogeneous()) {
            assert_eq!(form.root_power(form.degree()).unwrap(), form);
        }
        assert!(h4.root_power(5.0).is_err());
        assert!(h4.root_power(1.0).is_err());
        let an = HomogeneousForm::anisotropic(vec![2.0, 3.0]).unwrap();
        assert!(matches!(an.root_power(1.5), Err(Error::Unsupported(_))));
    }

    #[test]
    fn root_power_midpoint_convexity() {
        let h3 = HomogeneousForm::power_euclid(3.0, 2).unwrap();
        let mut forms = vec![h3.root_power(2.0).unwrap()];
        forms.push(
            HomogeneousForm::power_norm(3.0, NormPair::lp(4.0, 2).unwrap())
                .unwrap()
                .root_power(1.3)
                .unwrap(),
        );
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for f in forms {
            for _ in 0..10_000 {
                let z = random_vec(&mut rng, 2);
                let w = random_vec(&mut rng, 2);
                let mid: Vec<f64> = z.iter().zip(&w).map(|(a, b)| 0.5 * (a + b)).collect();
                let lhs = f.value(&mid);
                let rhs = 0.5 * (f.value(&z) + f.value(&w));
                assert!(lhs <= rhs + 1e-12 * (1.0 + rhs), "{f}: {lhs} > {rhs}");
            }
        }
    }

    #[test]
    fn homogeneity_euler_and_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for dim in [1, 2, 3] {
            for form in sample_forms(dim) {
                let p = form.degree();
                for _ in 0..2_000 {
                    let z = random_vec(&mut rng, dim);
                    let lambda: f64 = rng.random_range(0.0..10.0);
                    let hz = form.value(&z);
                    if form.is_homogeneous() {
                        let zl: Vec<f64> = z.iter().map(|x| lambda * x).collect();
                        let hl = form.value(&zl);
                        assert!((hl - lambda.powf(p) * hz).abs() <= 1e-10 * (1.0 + hl.abs()));
                        let euler = dot(&form.gradient(&z), &z);
                        assert!((euler - p * hz).abs() <= 1e-9 * (1.0 + hz));
                    } else if let FormKind::Anisotropic { exponents } = form.kind() {
                        // coordinatewise homogeneity
                        for (i, pi) in exponents.iter().enumerate() {
                            let mut zl = z.clone();
                            zl[i] *= lambda;
                            let expected =
                                hz - z[i].abs().powf(*pi) + (lambda * z[i].abs()).powf(*pi);
                            let got = form.value(&zl);
                            assert!((got - expected).abs() <= 1e-10 * (1.0 + got.abs()));
                        }
                    }
                    if hz > 1e-3 {
                        let g = form.gradient(&z);
                        let norm = z.iter().map(|x| x * x).sum::<f64>().sqrt();
                        let step = 1e-6 * (1.0 + norm);
                        for i in 0..dim {
                            let mut zp = z.clone();
                            let mut zm = z.clone();
                            zp[i] += step;
                            zm[i] -= step;
                            let fd = (form.value(&zp) - form.value(&zm)) / (2.0 * step);
                            let gnorm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
                            assert!(
                                (fd - g[i]).abs() <= 1e-5 * gnorm.max(1.0),
                                "{form} at {z:?}: fd {fd} vs {}",
                                g[i]
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn dual_norm_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let pairs = [
            NormPair::euclid(3).unwrap(),
            NormPair::lp(3.0, 3).unwrap(),
            NormPair::lp(1.25, 3).unwrap(),
            NormPair::weighted(vec![0.5, 2.0, 7.0]).unwrap(),
        ];
        for pair in &pairs {
            for _ in 0..20_000 {
                let x = random_vec(&mut rng, 3);
                let gd = pair.grad_dual(&x).unwrap();
                let fstar = pair.dual(&x).unwrap();
                assert!((pair.primal(&gd).unwrap() - 1.0).abs() <= 1e-10);
                assert!((dot(&gd, &x) - fstar).abs() <= 1e-10 * (1.0 + fstar));
                let gp = pair.grad_primal(&gd).unwrap();
                for (a, b) in gp.iter().zip(&x) {
                    assert!((a - b / fstar).abs() <= 1e-10 * (1.0 + (b / fstar).abs()));
                }
            }
            // duality by brute-force sup over sampled directions
            let z = random_vec(&mut rng, 3);
            let mut best = 0.0_f64;
            for _ in 0..20_000 {
                let x = random_vec(&mut rng, 3);
                best = best.max(dot(&x, &z) / pair.primal(&x).unwrap());
            }
            let fstar = pair.dual(&z).unwrap();
            assert!(best <= fstar * (1.0 + 1e-12));
            assert!(best >= 0.9 * fstar);
        }
    }

    #[test]
    fn descriptor_parsing() {
        let h = HomogeneousForm::parse("power_euclid(p=2, dim=2)", 1).unwrap();
        assert_eq!(h, HomogeneousForm::power_euclid(2.0, 2).unwrap());
        let h = HomogeneousForm::parse("power_euclid:p=2", 1).unwrap();
        assert_eq!(h, HomogeneousForm::power_euclid(2.0, 1).unwrap());
        let h = HomogeneousForm::parse("power_lp(p=3, r=1.5)", 2).unwrap();
        assert_eq!(h.degree(), 3.0);
        let h = HomogeneousForm::parse("anisotropic(exponents=2;3)", 7).unwrap();
        assert_eq!(h.dim(), 2);
        let h = HomogeneousForm::parse("power_weighted:p=2,weights=1;4", 2).unwrap();
        assert_eq!(HomogeneousForm::parse(&h.to_string(), 2).unwrap(), h);
        assert!(HomogeneousForm::parse("power_lp(p=2, r=1)", 2).is_err());
        assert!(HomogeneousForm::parse("cubic(p=2)", 2).is_err());
        assert!(HomogeneousForm::parse("power_euclid(q=2)", 2).is_err());
    }
}
