use anyhow::{bail, Result};
use clap::Args;
use serde::Serialize;

use hidcvx_core::eigen::{
    equation_multiplier, positivity_check, random_positive_init, scaling_identity_check,
    solve_eigen, EigenProblem, EigenResult, Energy, Grid, GridFunction, Solver,
};
use hidcvx_core::HomogeneousForm;

use crate::config::ConfigFile;
use crate::report::{csv, Check, Outcome, Report};

/// Relative tolerance of the rescaled-eigenpair identity.
const SCALING_TOL: f64 = 1e-6;
const RESCALE: f64 = 3.0;

#[derive(Args, Debug, Default)]
pub struct EigenArgs {
    /// `local` (Σ H(D_h u) h^d) or `nonlocal` (Gagliardo double sum) [default: local]
    #[arg(long)]
    pub energy: Option<String>,
    /// Integrand of the local energy, e.g. `power_euclid:p=2` or `power_lp(p=3,r=4)`
    /// [default: power_euclid:p=<p>]
    #[arg(long = "H", value_name = "FORM")]
    pub h: Option<String>,
    /// Energy degree; must match the degree of --H when both are given [default: 2]
    #[arg(long)]
    pub p: Option<f64>,
    /// Fractional order of the nonlocal energy [default: 0.5]
    #[arg(long)]
    pub s: Option<f64>,
    /// Constraint exponent, 1 < q ≤ p [default: p]
    #[arg(long)]
    pub q: Option<f64>,
    /// Dimension, 1 or 2 [default: 1]
    #[arg(long)]
    pub dim: Option<usize>,
    /// Interior nodes per axis [default: 100]
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Side length of the cube [0, extent]^dim [default: 1]
    #[arg(long)]
    pub extent: Option<f64>,
    /// convex-descent or power-iteration [default: convex-descent]
    #[arg(long)]
    pub solver: Option<String>,
    /// Relative energy change that stops the solver [default: 1e-9]
    #[arg(long)]
    pub tol: Option<f64>,
    /// Iteration budget [default: 100000]
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Largest accepted Euler–Lagrange residual [default: 1e-3]
    #[arg(long)]
    pub residual_tol: Option<f64>,
    /// Re-solve from a seeded random start and test the rescaled-eigenpair identity [default: true]
    #[arg(long, value_name = "BOOL")]
    pub scaling_check: Option<bool>,
    /// Also write the eigenfunction as CSV (columns x0[,x1],u)
    #[arg(long, value_name = "PATH")]
    pub csv: Option<std::path::PathBuf>,
}

#[derive(Debug, Serialize)]
struct EigenConfig {
    energy: Energy,
    q: f64,
    dim: usize,
    nodes: usize,
    extent: f64,
    solver: Solver,
    tol: f64,
    max_iter: usize,
    residual_tol: f64,
    scaling_check: bool,
    seed: u64,
}

#[derive(Debug, Serialize)]
struct ScalingResult {
    /// Eigenvalue from the seeded random start.
    lambda_random_start: f64,
    rescale: f64,
    /// `⟨∇E(cu), cu⟩ / (p Σ(cu)^q h^d)` for the rescaled second solution.
    multiplier: f64,
    relative_error: f64,
}

#[derive(Debug, Serialize)]
struct EigenOutput {
    min_interior: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    subcritical: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    scaling: Option<ScalingResult>,
    solution: EigenResult,
}

pub fn run(args: EigenArgs, file: &ConfigFile, seed: u64) -> Result<Outcome> {
    let kind = file.get("energy", args.energy, "local".to_string())?;
    let form_desc = file.opt::<String>("h", args.h)?;
    let p_flag = file.opt("p", args.p)?;
    let s_flag = file.opt::<f64>("s", args.s)?;
    let dim = file.get("dim", args.dim, 1)?;
    let energy = match kind.trim().to_ascii_lowercase().as_str() {
        "local" => {
            if s_flag.is_some() {
                bail!("--s applies to the nonlocal energy only");
            }
            let desc =
                form_desc.unwrap_or_else(|| format!("power_euclid:p={}", p_flag.unwrap_or(2.0)));
            let form = HomogeneousForm::parse(&desc, dim)?;
            if let Some(p) = p_flag {
                if p != form.degree() {
                    bail!(
                        "--p {p} disagrees with the degree {} of --H {desc}",
                        form.degree()
                    );
                }
            }
            Energy::Local { form }
        }
        "nonlocal" | "fractional" => {
            if form_desc.is_some() {
                bail!("--H applies to the local energy only");
            }
            Energy::Nonlocal {
                s: s_flag.unwrap_or(0.5),
                p: p_flag.unwrap_or(2.0),
            }
        }
        other => bail!("unknown energy '{other}', expected local or nonlocal"),
    };
    let q = file.get("q", args.q, energy.degree())?;
    let nodes = file.get("nodes", args.nodes, 100)?;
    let extent = file.get("extent", args.extent, 1.0)?;
    let solver: Solver = file
        .get("solver", args.solver, "convex-descent".to_string())?
        .parse()
        .map_err(anyhow::Error::msg)?;
    let tol = file.get("tol", args.tol, 1e-9)?;
    let max_iter = file.get("max_iter", args.max_iter, 100_000)?;
    let residual_tol = file.get("residual_tol", args.residual_tol, 1e-3)?;
    let scaling_check = file.get("scaling_check", args.scaling_check, true)?;
    let csv_path = file.opt("csv", args.csv.map(|p| p.display().to_string()))?;
    file.finish()?;

    if !(1..=2).contains(&dim) {
        bail!("dimension must be 1 or 2, got {dim}");
    }
    let grid = Grid::cube(dim, extent, nodes)?;
    let problem = EigenProblem::new(grid.clone(), energy.clone(), q)?
        .with_solver(solver)?
        .with_tolerance(tol, max_iter)?;
    let result = solve_eigen(&problem)?;
    let (min_interior, positive) = positivity_check(&result);

    let mut checks = vec![
        Check::above("positivity.min_interior", min_interior, 0.0),
        Check::at_most("residual", result.residual, residual_tol),
    ];
    let scaling = if scaling_check {
        let second = solve_eigen(
            &problem
                .clone()
                .with_init(random_positive_init(&grid, seed))?,
        )?;
        let scaled = second.eigenfunction.scaled(RESCALE);
        let multiplier = equation_multiplier(&problem, &scaled)?;
        let relative_error =
            scaling_identity_check(multiplier, &scaled, problem.p(), q, &grid, result.lambda)?;
        checks.push(Check::at_most(
            "scaling.relative_error",
            relative_error,
            SCALING_TOL,
        ));
        Some(ScalingResult {
            lambda_random_start: second.lambda,
            rescale: RESCALE,
            multiplier,
            relative_error,
        })
    } else {
        None
    };
    debug_assert_eq!(positive, checks[0].pass);

    let table = eigenfunction_csv(&grid, &result.eigenfunction);
    if let Some(path) = &csv_path {
        std::fs::write(path, &table)?;
    }
    let config = EigenConfig {
        energy,
        q,
        dim,
        nodes,
        extent,
        solver,
        tol,
        max_iter,
        residual_tol,
        scaling_check,
        seed,
    };
    let output = EigenOutput {
        min_interior,
        subcritical: problem.subcritical(),
        scaling,
        solution: result,
    };
    Outcome::new(&Report::new("eigen", config, checks, output), Some(table))
}

fn eigenfunction_csv(grid: &Grid, u: &GridFunction) -> String {
    let mut header: Vec<String> = (0..grid.dim()).map(|a| format!("x{a}")).collect();
    header.push("u".into());
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    csv(
        &header,
        u.values.iter().enumerate().map(|(i, v)| {
            let mut row: Vec<String> = grid.coords(i).iter().map(f64::to_string).collect();
            row.push(v.to_string());
            row
        }),
    )
}
