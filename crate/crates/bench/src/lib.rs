//! Fixtures shared by the criterion targets.

use hidcvx_core::eigen::{Grid, GridFunction};
use hidcvx_core::{EigenProblem, Energy, HomogeneousForm, Result};

/// A smooth positive profile vanishing on the boundary of the unit cube.
pub fn sine_profile(grid: &Grid) -> GridFunction {
    GridFunction::from_fn(grid, |x| {
        x.iter().map(|t| (std::f64::consts::PI * t).sin()).product()
    })
}

/// Local `p`-energy eigenproblem on the unit cube with `nodes` interior nodes per axis.
pub fn local_problem(dim: usize, nodes: usize, p: f64) -> Result<EigenProblem> {
    let grid = Grid::unit(dim, nodes)?;
    let form = HomogeneousForm::power_euclid(p, dim)?;
    EigenProblem::new(grid, Energy::Local { form }, p)
}

/// Gagliardo eigenproblem on the unit interval.
pub fn nonlocal_problem(nodes: usize, s: f64, p: f64) -> Result<EigenProblem> {
    EigenProblem::new(Grid::unit(1, nodes)?, Energy::Nonlocal { s, p }, p)
}
