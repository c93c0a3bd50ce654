use serde::{Deserialize, Serialize};

use super::energy::DiscreteEnergy;

/// Eigensolver selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    /// Accelerated projected descent in `ρ = u^q` over the weighted simplex.
    #[default]
    ConvexDescent,
    /// Inverse iteration; quadratic energies with `q = 2` only.
    PowerIteration,
}

impl std::str::FromStr for Solver {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "convex_descent" | "cd" => Ok(Self::ConvexDescent),
            "power_iteration" | "pi" => Ok(Self::PowerIteration),
            other => Err(format!("unknown solver `{other}`")),
        }
    }
}

pub(crate) struct Run {
    pub u: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub energy_trace: Vec<f64>,
    pub residual_trace: Vec<(usize, f64)>,
}

/// Stopping window: relative energy change is measured over this many iterations.
pub(crate) const WINDOW: usize = 50;

/// `max_i |∂_iE − pλu_i^{q−1}h^d| / (pλh^d‖u‖_∞^{q−1})` with `λ = E(u)/Σu^q h^d`.
pub(crate) fn residual(
    e: &dyn DiscreteEnergy,
    u: &[f64],
    q: f64,
    vol: f64,
    grad: &mut [f64],
) -> f64 {
    let p = e.degree();
    let energy = e.value_grad(u, grad);
    let mass: f64 = u.iter().map(|v| v.abs().powf(q)).sum::<f64>() * vol;
    let lambda = energy / mass;
    let umax = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = p * lambda * vol * umax.powf(q - 1.0);
    let mut worst = 0.0f64;
    for (g, v) in grad.iter().zip(u) {
        let r = g - p * lambda * vol * v.signum() * v.abs().powf(q - 1.0);
        worst = worst.max(r.abs());
    }
    worst / scale
}

/// Minimizes `Σ ((x_i − y_i)^2 / d_i)` over `{x_i ≥ floor, Σx_i·vol = 1}`.
///
/// The solution is `x_i = max(floor, y_i − τd_i)`; `τ` comes from sorting the
/// breakpoints `(y_i − floor)/d_i` and shifting until the mass balances.
pub(crate) fn project_simplex(
    y: &[f64],
    d: &[f64],
    vol: f64,
    floor: f64,
    out: &mut [f64],
    order: &mut Vec<usize>,
) {
    let n = y.len();
    let target = 1.0 / vol - floor * n as f64;
    order.clear();
    order.extend(0..n);
    let key = |i: usize| (y[i] - floor) / d[i];
    order.sort_unstable_by(|a, b| key(*b).total_cmp(&key(*a)));
    let mut sum_y = 0.0;
    let mut sum_d = 0.0;
    let mut tau = f64::NEG_INFINITY;
    for (k, &i) in order.iter().enumerate() {
        sum_y += y[i] - floor;
        sum_d += d[i];
        let t = (sum_y - target) / sum_d;
        let next = order
            .get(k + 1)
            .map(|&j| key(j))
            .unwrap_or(f64::NEG_INFINITY);
        if t >= next {
            tau = t;
            break;
        }
    }
    for i in 0..n {
        out[i] = floor + (y[i] - floor - tau * d[i]).max(0.0);
    }
}

struct Objective<'a> {
    e: &'a dyn DiscreteEnergy,
    q: f64,
    u: Vec<f64>,
    gu: Vec<f64>,
}

impl Objective<'_> {
    /// `F(ρ) = E(ρ^{1/q})`.
    fn value(&mut self, rho: &[f64]) -> f64 {
        for (u, r) in self.u.iter_mut().zip(rho) {
            *u = r.powf(1.0 / self.q);
        }
        self.e.value(&self.u)
    }

    /// `F(ρ)` and `∂F/∂ρ_i = ∂E/∂u_i · ρ_i^{1/q−1}/q`.
    fn value_grad(&mut self, rho: &[f64], grad: &mut [f64]) -> f64 {
        for (u, r) in self.u.iter_mut().zip(rho) {
            *u = r.powf(1.0 / self.q);
        }
        let f = self.e.value_grad(&self.u, &mut self.gu);
        for i in 0..rho.len() {
            grad[i] = self.gu[i] * self.u[i] / (self.q * rho[i]);
        }
        f
    }
}

struct Workspace {
    gy: Vec<f64>,
    d: Vec<f64>,
    trial: Vec<f64>,
    order: Vec<usize>,
}

/// One backtracked projected step from `y` in the metric `diag(y)^{-1}`.
/// Writes the new point into `out` and returns its objective value.
fn prox_step(
    obj: &mut Objective<'_>,
    ws: &mut Workspace,
    y: &[f64],
    lip: &mut f64,
    vol: f64,
    floor: f64,
    out: &mut [f64],
) -> f64 {
    let n = y.len();
    let fy = obj.value_grad(y, &mut ws.gy);
    ws.d.copy_from_slice(y);
    loop {
        for (((t, yi), di), gi) in ws.trial.iter_mut().zip(y).zip(&ws.d).zip(&ws.gy) {
            *t = yi - di * gi / *lip;
        }
        project_simplex(&ws.trial, &ws.d, vol, floor, out, &mut ws.order);
        let f = obj.value(out);
        let mut lin = 0.0;
        let mut quad = 0.0;
        for i in 0..n {
            let s = out[i] - y[i];
            lin += ws.gy[i] * s;
            quad += s * s / ws.d[i];
        }
        if f <= fy + lin + 0.5 * *lip * quad + 1e-15 * fy.abs() || *lip > 1e300 {
            return f;
        }
        *lip *= 2.0;
    }
}

/// Accelerated projected gradient on the hidden-convex reformulation.
///
/// The metric is `diag(ρ)` at the extrapolated point, the step comes from
/// backtracking on a local Lipschitz estimate, and momentum is reset whenever
/// a step would raise the energy, which keeps the iterates monotone.
pub(crate) fn convex_descent(
    e: &dyn DiscreteEnergy,
    q: f64,
    vol: f64,
    init: &[f64],
    tol: f64,
    max_iter: usize,
) -> Run {
    let n = e.len();
    let mean = 1.0 / (n as f64 * vol);
    let floor = 1e-14 * mean;
    let mut obj = Objective {
        e,
        q,
        u: vec![0.0; n],
        gu: vec![0.0; n],
    };
    let mut ws = Workspace {
        gy: vec![0.0; n],
        d: vec![0.0; n],
        trial: vec![0.0; n],
        order: Vec::with_capacity(n),
    };

    // Feasible start: ρ ∝ |init|^q.
    let start: Vec<f64> = init.iter().map(|v| v.abs().powf(q).max(floor)).collect();
    let mass: f64 = start.iter().sum::<f64>() * vol;
    let scaled: Vec<f64> = start.iter().map(|r| r / mass).collect();
    let mut x = vec![0.0; n];
    project_simplex(&scaled, &vec![1.0; n], vol, floor, &mut x, &mut ws.order);

    let mut fx = obj.value(&x);
    let mut x_prev = x.clone();
    let mut y = x.clone();
    let mut x_new = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    let mut t_mom = 1.0f64;
    let mut lip = 1.0f64;

    let mut energy_trace = vec![fx];
    let mut residual_trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < max_iter {
        iterations += 1;
        let mut f_new = prox_step(&mut obj, &mut ws, &y, &mut lip, vol, floor, &mut x_new);
        if !(f_new <= fx) {
            // Momentum overshot: restart from the current iterate.
            t_mom = 1.0;
            f_new = prox_step(&mut obj, &mut ws, &x, &mut lip, vol, floor, &mut x_new);
            if !(f_new <= fx) {
                x_new.copy_from_slice(&x);
                f_new = fx;
            }
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t_mom * t_mom).sqrt());
        let beta = (t_mom - 1.0) / t_next;
        t_mom = t_next;
        x_prev.copy_from_slice(&x);
        x.copy_from_slice(&x_new);
        fx = f_new;
        for i in 0..n {
            y[i] = (x[i] + beta * (x[i] - x_prev[i])).max(floor);
        }
        lip *= 0.9;
        energy_trace.push(fx);

        if iterations % WINDOW == 0 {
            let u: Vec<f64> = x.iter().map(|r| r.powf(1.0 / q)).collect();
            residual_trace.push((iterations, residual(e, &u, q, vol, &mut scratch)));
            let old = energy_trace[energy_trace.len() - 1 - WINDOW];
            if (old - fx).abs() <= tol * fx.abs() {
                converged = true;
                break;
            }
        }
    }

    let u: Vec<f64> = x.iter().map(|r| r.powf(1.0 / q)).collect();
    Run {
        u,
        iterations,
        converged,
        energy_trace,
        residual_trace,
    }
}

/// Conjugate gradients for `Av = b` with `Av = ½∇E(v)`.
fn cg(e: &dyn DiscreteEnergy, b: &[f64], x: &mut [f64], rel_tol: f64, max_iter: usize) {
    let n = b.len();
    let mut ax = vec![0.0; n];
    e.value_grad(x, &mut ax);
    let mut r: Vec<f64> = (0..n).map(|i| b[i] - 0.5 * ax[i]).collect();
    let mut p = r.clone();
    let mut rr: f64 = r.iter().map(|v| v * v).sum();
    let bnorm2: f64 = b.iter().map(|v| v * v).sum();
    let mut ap = vec![0.0; n];
    for _ in 0..max_iter {
        if rr <= rel_tol * rel_tol * bnorm2 {
            break;
        }
        e.value_grad(&p, &mut ap);
        for v in ap.iter_mut() {
            *v *= 0.5;
        }
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if !(pap > 0.0) {
            break;
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new: f64 = r.iter().map(|v| v * v).sum();
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
}

/// Inverse iteration for `Au = λh^d u` with `E(u) = uᵀAu`.
pub(crate) fn power_iteration(
    e: &dyn DiscreteEnergy,
    vol: f64,
    init: &[f64],
    tol: f64,
    max_iter: usize,
) -> Run {
    let n = e.len();
    let normalize = |v: &mut [f64]| {
        let s: f64 = v.iter().map(|x| x * x).sum::<f64>() * vol;
        let sign = if v.iter().sum::<f64>() < 0.0 {
            -1.0
        } else {
            1.0
        };
        let c = sign / s.sqrt();
        for x in v.iter_mut() {
            *x *= c;
        }
    };
    let mut u: Vec<f64> = init.iter().map(|v| v.abs()).collect();
    normalize(&mut u);
    let mut w = u.clone();
    let mut scratch = vec![0.0; n];
    let mut energy_trace = vec![e.value(&u)];
    let mut residual_trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        cg(e, &u, &mut w, 1e-15, 20 * n + 100);
        normalize(&mut w);
        let change = w
            .iter()
            .zip(&u)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let umax = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        u.copy_from_slice(&w);
        energy_trace.push(e.value(&u));
        let res = residual(e, &u, 2.0, vol, &mut scratch);
        residual_trace.push((iterations, res));
        if change <= tol.min(1e-13) * umax {
            converged = true;
            break;
        }
    }
    Run {
        u,
        iterations,
        converged,
        energy_trace,
        residual_trace,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn projection_is_feasible_and_optimal() {
        let y = [0.9, -0.3, 2.0, 0.1, 0.5];
        let d = [1.0, 2.0, 0.5, 1.0, 3.0];
        let vol = 0.25;
        let mut out = [0.0; 5];
        let mut order = Vec::new();
        project_simplex(&y, &d, vol, 0.0, &mut out, &mut order);
        let mass: f64 = out.iter().sum::<f64>() * vol;
        assert_relative_eq!(mass, 1.0, max_relative = 1e-14);
        assert!(out.iter().all(|v| *v >= 0.0));
        // KKT: positive entries share the same multiplier (y_i − x_i)/d_i.
        let taus: Vec<f64> = (0..5)
            .filter(|i| out[*i] > 0.0)
            .map(|i| (y[i] - out[i]) / d[i])
            .collect();
        for t in &taus {
            assert_relative_eq!(*t, taus[0], max_relative = 1e-12, epsilon = 1e-14);
        }
        for i in 0..5 {
            if out[i] == 0.0 {
                assert!(y[i] / d[i] <= taus[0] + 1e-14);
            }
        }
    }

    #[test]
    fn projection_fixes_feasible_points() {
        let y = [1.0, 2.0, 1.0];
        let mut out = [0.0; 3];
        project_simplex(&y, &[0.3, 1.0, 2.0], 0.25, 1e-12, &mut out, &mut Vec::new());
        for (a, b) in out.iter().zip(&y) {
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn parse_solver() {
        assert_eq!(
            "convex-descent".parse::<Solver>().unwrap(),
            Solver::ConvexDescent
        );
        assert_eq!(
            "power_iteration".parse::<Solver>().unwrap(),
            Solver::PowerIteration
        );
        assert!("newton".parse::<Solver>().is_err());
    }
}
