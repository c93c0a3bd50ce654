use crate::error::{invalid, Error, Result};
use crate::hfun::HomogeneousForm;

use super::grid::{Grid, GridFunction};

/// A discrete energy on the interior nodes of a grid with an exact gradient.
pub trait DiscreteEnergy: Sync {
    /// Homogeneity degree `p`: `E(cu) = c^p E(u)` for `c ≥ 0`.
    fn degree(&self) -> f64;

    /// Number of interior nodes.
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn value(&self, u: &[f64]) -> f64;

    /// Returns `E(u)` and writes `∂E/∂u_i` into `grad`.
    fn value_grad(&self, u: &[f64], grad: &mut [f64]) -> f64;

    /// True when `E` is a quadratic form, so that `∇E` is linear.
    fn is_quadratic(&self) -> bool {
        self.degree() == 2.0
    }
}

fn signed_pow(x: f64, e: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum() * x.abs().powf(e)
    }
}

/// `Σ_cells H(D_h u)·h^d` with forward-difference cell gradients.
///
/// Cells are anchored at every node of the closed grid except the last layer,
/// so each interior node appears in the stencil of `d + 1` cells.
#[derive(Debug, Clone)]
pub struct LocalEnergy {
    form: HomogeneousForm,
    n0: usize,
    n1: usize,
    dim: usize,
    h: f64,
    vol: f64,
}

impl LocalEnergy {
    pub fn new(grid: &Grid, form: HomogeneousForm) -> Result<Self> {
        if form.dim() != grid.dim() {
            return Err(Error::DimensionMismatch {
                expected: grid.dim(),
                got: form.dim(),
            });
        }
        let n = grid.nodes();
        Ok(Self {
            form,
            n0: n[0],
            n1: if n.len() > 1 { n[1] } else { 1 },
            dim: grid.dim(),
            h: grid.h(),
            vol: grid.cell_volume(),
        })
    }

    pub fn form(&self) -> &HomogeneousForm {
        &self.form
    }

    /// Value at full (boundary-inclusive) indices; zero on the boundary.
    #[inline]
    fn at(&self, u: &[f64], k0: usize, k1: usize) -> f64 {
        if k0 == 0 || k0 > self.n0 {
            return 0.0;
        }
        if self.dim == 1 {
            return u[k0 - 1];
        }
        if k1 == 0 || k1 > self.n1 {
            return 0.0;
        }
        u[(k0 - 1) + self.n0 * (k1 - 1)]
    }

    #[inline]
    fn slot(&self, k0: usize, k1: usize) -> Option<usize> {
        if k0 == 0 || k0 > self.n0 {
            return None;
        }
        if self.dim == 1 {
            return Some(k0 - 1);
        }
        if k1 == 0 || k1 > self.n1 {
            return None;
        }
        Some((k0 - 1) + self.n0 * (k1 - 1))
    }

    fn run(&self, u: &[f64], mut grad: Option<&mut [f64]>) -> f64 {
        if let Some(g) = grad.as_deref_mut() {
            g.fill(0.0);
        }
        let inv_h = 1.0 / self.h;
        let mut total = 0.0;
        let mut z = [0.0; 2];
        let mut gz = [0.0; 2];
        let k1_range = if self.dim == 1 { 0..=0 } else { 0..=self.n1 };
        for k1 in k1_range {
            for k0 in 0..=self.n0 {
                let a = self.at(u, k0, k1);
                z[0] = (self.at(u, k0 + 1, k1) - a) * inv_h;
                if self.dim == 2 {
                    z[1] = (self.at(u, k0, k1 + 1) - a) * inv_h;
                }
                let zs = &z[..self.dim];
                let v = self.form.value(zs);
                if v == 0.0 && zs.iter().all(|x| *x == 0.0) {
                    continue;
                }
                total += v;
                if let Some(g) = grad.as_deref_mut() {
                    self.form.gradient_into(zs, &mut gz[..self.dim]);
                    let c = inv_h * self.vol;
                    let mut sum = 0.0;
                    for (axis, gza) in gz[..self.dim].iter().enumerate() {
                        sum += gza;
                        let nb = if axis == 0 {
                            self.slot(k0 + 1, k1)
                        } else {
                            self.slot(k0, k1 + 1)
                        };
                        if let Some(j) = nb {
                            g[j] += c * gza;
                        }
                    }
                    if let Some(j) = self.slot(k0, k1) {
                        g[j] -= c * sum;
                    }
                }
            }
        }
        total * self.vol
    }
}

impl DiscreteEnergy for LocalEnergy {
    fn degree(&self) -> f64 {
        self.form.degree()
    }

    fn len(&self) -> usize {
        self.n0 * if self.dim == 1 { 1 } else { self.n1 }
    }

    fn value(&self, u: &[f64]) -> f64 {
        self.run(u, None)
    }

    fn value_grad(&self, u: &[f64], grad: &mut [f64]) -> f64 {
        self.run(u, Some(grad))
    }

    fn is_quadratic(&self) -> bool {
        self.form.is_quadratic()
    }
}

/// Discrete Gagliardo energy `Σ_{i≠j} |u_i − u_j|^p |x_i − x_j|^{−d−sp} h^{2d}`
/// over all lattice nodes in the box reaching one domain extent beyond the
/// grid on every side, with `u = 0` off the interior.
///
/// Pairs with one exterior node collapse to `2κ_i|u_i|^p h^{2d}` where `κ_i`
/// sums the kernel over the exterior nodes of the box.
#[derive(Debug, Clone)]
pub struct GagliardoEnergy {
    s: f64,
    p: f64,
    n0: usize,
    n1: usize,
    dim: usize,
    /// Kernel at interior offsets `(|Δ0|, |Δ1|)`, zero at the origin.
    w: Vec<f64>,
    kappa: Vec<f64>,
    scale: f64,
}

impl GagliardoEnergy {
    pub fn new(grid: &Grid, s: f64, p: f64) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return Err(invalid(format!("need 0 < s < 1, got {s}")));
        }
        if !(p > 1.0 && p.is_finite()) {
            return Err(invalid(format!("need p > 1, got {p}")));
        }
        let dim = grid.dim();
        let n = grid.nodes();
        let (n0, n1) = (n[0], if dim > 1 { n[1] } else { 1 });
        let h = grid.h();
        let expo = -(dim as f64 + s * p);
        let kernel = |d0: i64, d1: i64| -> f64 {
            if d0 == 0 && d1 == 0 {
                0.0
            } else {
                (((d0 * d0 + d1 * d1) as f64).sqrt() * h).powf(expo)
            }
        };

        let mut w = vec![0.0; n0 * n1];
        for k1 in 0..n1 {
            for k0 in 0..n0 {
                w[k0 + n0 * k1] = kernel(k0 as i64, k1 as i64);
            }
        }

        // Prefix sums of the kernel over every offset that can occur inside the box.
        let reach = |nn: usize| 2 * nn as i64 + 1;
        let (r0, r1) = (reach(n0), if dim > 1 { reach(n1) } else { 0 });
        let (w0, w1) = ((2 * r0 + 1) as usize, (2 * r1 + 1) as usize);
        let mut pre = vec![0.0; (w0 + 1) * (w1 + 1)];
        for b in 0..w1 {
            let mut row = 0.0;
            for a in 0..w0 {
                row += kernel(a as i64 - r0, b as i64 - r1);
                pre[(a + 1) + (w0 + 1) * (b + 1)] = pre[(a + 1) + (w0 + 1) * b] + row;
            }
        }
        let rect = |lo0: i64, hi0: i64, lo1: i64, hi1: i64| -> f64 {
            let (a0, a1) = ((lo0 + r0) as usize, (hi0 + r0 + 1) as usize);
            let (b0, b1) = ((lo1 + r1) as usize, (hi1 + r1 + 1) as usize);
            let at = |a: usize, b: usize| pre[a + (w0 + 1) * b];
            at(a1, b1) - at(a0, b1) - at(a1, b0) + at(a0, b0)
        };

        let mut kappa = vec![0.0; n0 * n1];
        let (m0, m1) = (n0 as i64 + 1, n1 as i64 + 1);
        for k1 in 0..n1 {
            for k0 in 0..n0 {
                // Full indices of this node; box runs over full indices [−m, 2m].
                let (f0, f1) = (k0 as i64 + 1, k1 as i64 + 1);
                let (bl1, bh1, il1, ih1) = if dim > 1 {
                    (-m1 - f1, 2 * m1 - f1, 1 - f1, n1 as i64 - f1)
                } else {
                    (0, 0, 0, 0)
                };
                let all = rect(-m0 - f0, 2 * m0 - f0, bl1, bh1);
                let inner = rect(1 - f0, n0 as i64 - f0, il1, ih1);
                kappa[k0 + n0 * k1] = all - inner;
            }
        }
        Ok(Self {
            s,
            p,
            n0,
            n1,
            dim,
            w,
            kappa,
            scale: grid.cell_volume().powi(2),
        })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// Exterior kernel mass `κ_i` seen by each interior node.
    pub fn kappa(&self) -> &[f64] {
        &self.kappa
    }

    #[inline]
    fn weight(&self, i: usize, j: usize) -> f64 {
        if self.dim == 1 {
            self.w[i.abs_diff(j)]
        } else {
            let (i0, i1) = (i % self.n0, i / self.n0);
            let (j0, j1) = (j % self.n0, j / self.n0);
            self.w[i0.abs_diff(j0) + self.n0 * i1.abs_diff(j1)]
        }
    }

    fn run(&self, u: &[f64], mut grad: Option<&mut [f64]>) -> f64 {
        let m = u.len();
        let p = self.p;
        let quad = p == 2.0;
        if let Some(g) = grad.as_deref_mut() {
            g.fill(0.0);
        }
        let mut total = 0.0;
        for i in 0..m {
            let ui = u[i];
            let mut row = 0.0;
            let mut grow = 0.0;
            for j in (i + 1)..m {
                let d = ui - u[j];
                if d == 0.0 {
                    continue;
                }
                let w = self.weight(i, j);
                let (val, slope) = if quad {
                    (d * d, d)
                } else {
                    (d.abs().powf(p), signed_pow(d, p - 1.0))
                };
                row += w * val;
                if let Some(g) = grad.as_deref_mut() {
                    let t = w * slope;
                    grow += t;
                    g[j] -= t;
                }
            }
            let k = self.kappa[i];
            let (val, slope) = if quad {
                (ui * ui, ui)
            } else {
                (ui.abs().powf(p), signed_pow(ui, p - 1.0))
            };
            total += 2.0 * row + 2.0 * k * val;
            if let Some(g) = grad.as_deref_mut() {
                g[i] += grow + k * slope;
            }
        }
        if let Some(g) = grad {
            let c = 2.0 * p * self.scale;
            for gi in g.iter_mut() {
                *gi *= c;
            }
        }
        total * self.scale
    }
}

impl DiscreteEnergy for GagliardoEnergy {
    fn degree(&self) -> f64 {
        self.p
    }

    fn len(&self) -> usize {
        self.n0 * self.n1
    }

    fn value(&self, u: &[f64]) -> f64 {
        self.run(u, None)
    }

    fn value_grad(&self, u: &[f64], grad: &mut [f64]) -> f64 {
        self.run(u, Some(grad))
    }
}

/// Local energy value and exact gradient.
pub fn local_energy(
    grid: &Grid,
    form: &HomogeneousForm,
    u: &GridFunction,
) -> Result<(f64, GridFunction)> {
    u.check(grid)?;
    let e = LocalEnergy::new(grid, form.clone())?;
    let mut g = vec![0.0; u.len()];
    let v = e.value_grad(&u.values, &mut g);
    Ok((v, GridFunction::new(g)))
}

/// Gagliardo energy value and exact gradient.
pub fn gagliardo_energy(
    grid: &Grid,
    s: f64,
    p: f64,
    u: &GridFunction,
) -> Result<(f64, GridFunction)> {
    u.check(grid)?;
    let e = GagliardoEnergy::new(grid, s, p)?;
    let mut g = vec![0.0; u.len()];
    let v = e.value_grad(&u.values, &mut g);
    Ok((v, GridFunction::new(g)))
}
