//! First eigenvalues of local and fractional homogeneous energies on grids.
//!
//! The constrained problem `min E(u)` over `{u ≥ 0, ‖u‖_q = 1}` becomes convex
//! in `ρ = u^q` on the simplex `Σρ h^d = 1`, which is what
//! [`Solver::ConvexDescent`] exploits.

mod energy;
mod grid;
mod solver;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hfun::HomogeneousForm;

pub use energy::{gagliardo_energy, local_energy, DiscreteEnergy, GagliardoEnergy, LocalEnergy};
pub use grid::{lq_norm, Grid, GridFunction};
pub use solver::Solver;

/// The energy being minimized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Energy {
    /// `Σ_cells H(D_h u) h^d`.
    Local { form: HomogeneousForm },
    /// The truncated Gagliardo double sum.
    Nonlocal { s: f64, p: f64 },
}

impl Energy {
    pub fn degree(&self) -> f64 {
        match self {
            Energy::Local { form } => form.degree(),
            Energy::Nonlocal { p, .. } => *p,
        }
    }

    /// Builds the discrete energy on `grid`.
    pub fn discretize(&self, grid: &Grid) -> Result<Box<dyn DiscreteEnergy>> {
        Ok(match self {
            Energy::Local { form } => Box::new(LocalEnergy::new(grid, form.clone())?),
            Energy::Nonlocal { s, p } => Box::new(GagliardoEnergy::new(grid, *s, *p)?),
        })
    }
}

/// A first-eigenvalue problem `λ = min{E(u) : u ≥ 0, ‖u‖_q = 1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenProblem {
    pub grid: Grid,
    pub energy: Energy,
    pub q: f64,
    pub solver: Solver,
    /// Relative energy change over the stopping window.
    pub tol: f64,
    pub max_iter: usize,
    /// Starting guess; a constant function if absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub init: Option<GridFunction>,
}

impl EigenProblem {
    pub fn new(grid: Grid, energy: Energy, q: f64) -> Result<Self> {
        let problem = Self {
            grid,
            energy,
            q,
            solver: Solver::ConvexDescent,
            tol: 1e-9,
            max_iter: 100_000,
            init: None,
        };
        problem.validate()?;
        Ok(problem)
    }

    pub fn with_solver(mut self, solver: Solver) -> Result<Self> {
        self.solver = solver;
        self.validate()?;
        Ok(self)
    }

    pub fn with_tolerance(mut self, tol: f64, max_iter: usize) -> Result<Self> {
        self.tol = tol;
        self.max_iter = max_iter;
        self.validate()?;
        Ok(self)
    }

    pub fn with_init(mut self, init: GridFunction) -> Result<Self> {
        init.check(&self.grid)?;
        self.init = Some(init);
        Ok(self)
    }

    pub fn p(&self) -> f64 {
        self.energy.degree()
    }

    /// True when the problem is a generalized symmetric matrix eigenproblem.
    pub fn is_quadratic(&self) -> bool {
        let quadratic_energy = match &self.energy {
            Energy::Local { form } => form.is_quadratic(),
            Energy::Nonlocal { p, .. } => *p == 2.0,
        };
        quadratic_energy && self.q == 2.0
    }

    /// Whether `sp < d`; recorded only, the eigenvalue exists either way.
    pub fn subcritical(&self) -> Option<bool> {
        match self.energy {
            Energy::Nonlocal { s, p } => Some(s * p < self.grid.dim() as f64),
            Energy::Local { .. } => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Energy::Local { form } = &self.energy {
            if !form.is_homogeneous() {
                return Err(Error::Unsupported(
                    "eigenproblems need a homogeneous form".into(),
                ));
            }
            if form.dim() != self.grid.dim() {
                return Err(Error::DimensionMismatch {
                    expected: self.grid.dim(),
                    got: form.dim(),
                });
            }
        }
        if let Energy::Nonlocal { s, p } = self.energy {
            if !(s > 0.0 && s < 1.0 && p > 1.0) {
                return Err(invalid(format!(
                    "need 0 < s < 1 and p > 1, got s = {s}, p = {p}"
                )));
            }
        }
        let p = self.p();
        if !(self.q > 1.0 && self.q <= p) {
            return Err(invalid(format!(
                "need 1 < q ≤ p, got q = {}, p = {p}",
                self.q
            )));
        }
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return Err(invalid("tolerance and iteration budget must be positive"));
        }
        if self.solver == Solver::PowerIteration && !self.is_quadratic() {
            return Err(Error::Unsupported(
                "power iteration needs a quadratic energy and q = 2".into(),
            ));
        }
        Ok(())
    }
}

/// Eigenvalue, normalized nonnegative eigenfunction and solver diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenResult {
    pub lambda: f64,
    pub eigenfunction: GridFunction,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub energy_trace: Vec<f64>,
    /// `(iteration, residual)` checkpoints.
    pub residual_trace: Vec<(usize, f64)>,
}

/// Solves the discrete eigenproblem.
///
/// Running out of iterations is not an error: the best iterate is returned
/// with `converged = false`.
pub fn solve_eigen(problem: &EigenProblem) -> Result<EigenResult> {
    problem.validate()?;
    let grid = &problem.grid;
    let e = problem.energy.discretize(grid)?;
    let vol = grid.cell_volume();
    let init = match &problem.init {
        Some(f) => f.values.clone(),
        None => vec![1.0; grid.len()],
    };
    if init.iter().all(|v| *v == 0.0) {
        return Err(Error::Degenerate("initial guess vanishes".into()));
    }
    let run = match problem.solver {
        Solver::ConvexDescent => {
            solver::convex_descent(&*e, problem.q, vol, &init, problem.tol, problem.max_iter)
        }
        Solver::PowerIteration => {
            solver::power_iteration(&*e, vol, &init, problem.tol, problem.max_iter)
        }
    };
    let mut u = GridFunction::new(run.u);
    let norm = lq_norm(grid, &u, problem.q);
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::Degenerate(
            "solver produced a vanishing iterate".into(),
        ));
    }
    for v in u.values.iter_mut() {
        *v = (*v / norm).max(0.0);
    }
    let lambda = e.value(&u.values);
    let mut scratch = vec![0.0; u.len()];
    let residual = solver::residual(&*e, &u.values, problem.q, vol, &mut scratch);
    Ok(EigenResult {
        lambda,
        eigenfunction: u,
        residual,
        iterations: run.iterations,
        converged: run.converged,
        energy_trace: run.energy_trace,
        residual_trace: run.residual_trace,
    })
}

/// Normalized Euler–Lagrange residual
/// `max_i |∂_iE(u) − pλu_i^{q−1}h^d| / (pλh^d‖u‖_∞^{q−1})`.
pub fn residual_euler_lagrange(problem: &EigenProblem, u: &GridFunction) -> Result<f64> {
    u.check(&problem.grid)?;
    if u.values.iter().all(|v| *v == 0.0) {
        return Err(Error::Degenerate("residual of the zero function".into()));
    }
    let e = problem.energy.discretize(&problem.grid)?;
    let mut scratch = vec![0.0; u.len()];
    Ok(solver::residual(
        &*e,
        &u.values,
        problem.q,
        problem.grid.cell_volume(),
        &mut scratch,
    ))
}

/// Multiplier `μ` of the discrete equation `∇E(u) = pμ u^{q−1}h^d`, tested
/// against `u` itself: `μ = ⟨∇E(u), u⟩ / (p Σu^q h^d)`.
pub fn equation_multiplier(problem: &EigenProblem, u: &GridFunction) -> Result<f64> {
    u.check(&problem.grid)?;
    let e = problem.energy.discretize(&problem.grid)?;
    let mut g = vec![0.0; u.len()];
    e.value_grad(&u.values, &mut g);
    let pairing: f64 = g.iter().zip(&u.values).map(|(a, b)| a * b).sum();
    let mass: f64 = u
        .values
        .iter()
        .map(|v| v.abs().powf(problem.q))
        .sum::<f64>()
        * problem.grid.cell_volume();
    if mass == 0.0 {
        return Err(Error::Degenerate("trivial function".into()));
    }
    Ok(pairing / (problem.p() * mass))
}

/// `|λ(Σ|u|^q h^d)^{(q−p)/q} − λ_{p,q}| / λ_{p,q}` for an eigenpair `(λ, u)`
/// of arbitrary normalization.
pub fn scaling_identity_check(
    lambda: f64,
    u: &GridFunction,
    p: f64,
    q: f64,
    grid: &Grid,
    lambda_pq: f64,
) -> Result<f64> {
    u.check(grid)?;
    if u.values.iter().any(|v| *v < 0.0) {
        return Err(invalid("the eigenfunction must be nonnegative"));
    }
    let mass: f64 = u.values.iter().map(|v| v.powf(q)).sum::<f64>() * grid.cell_volume();
    if mass == 0.0 {
        return Err(Error::Degenerate("trivial function".into()));
    }
    if !(lambda_pq > 0.0) {
        return Err(invalid("reference eigenvalue must be positive"));
    }
    Ok((lambda * mass.powf((q - p) / q) - lambda_pq).abs() / lambda_pq)
}

/// Seeded starting guess with nodal values uniform in `[0.5, 1.5)`.
pub fn random_positive_init(grid: &Grid, seed: u64) -> GridFunction {
    use rand::Rng;
    let mut rng = crate::rng::stream(seed, "eigen-init", 0);
    GridFunction::new(
        (0..grid.len())
            .map(|_| rng.random_range(0.5..1.5))
            .collect(),
    )
}

/// Minimum interior value and whether it is strictly positive.
pub fn positivity_check(result: &EigenResult) -> (f64, bool) {
    let m = result.eigenfunction.min();
    (m, m > 0.0)
}
