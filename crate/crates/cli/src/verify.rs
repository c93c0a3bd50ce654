use anyhow::Result;
use clap::Args;
use serde::Serialize;

use hidcvx_core::verify::{
    run_sweep, Principle, SweepConfig, SweepReport, DERIVATIVE_REL_TOL, FISHER_REL_TOL,
    GAP_TOLERANCE, VIOLATION_THRESHOLD,
};

use crate::config::ConfigFile;
use crate::report::{csv, Check, Outcome, Report};

#[derive(Args, Debug, Default)]
pub struct VerifyArgs {
    /// kinetic, hidden, picone, weak-picone, discrete-picone, discrete-hidden,
    /// elementary, derivative, fisher, counterexample-beta, counterexample-q,
    /// or `all` for the seven nonnegativity sweeps [default: all]
    #[arg(long)]
    pub principle: Option<String>,
    /// Homogeneity exponent [default: 2]
    #[arg(long)]
    pub p: Option<f64>,
    /// Interpolation exponent [default: p]
    #[arg(long)]
    pub q: Option<f64>,
    /// Kinetic/Fisher exponent; sampled in (0, p−1] when absent. Required by counterexample-beta
    #[arg(long)]
    pub beta: Option<f64>,
    /// Dimension of the sampled gradients [default: 2]
    #[arg(long)]
    pub dim: Option<usize>,
    /// Random trials per sweep [default: 100000]
    #[arg(long)]
    pub trials: Option<u64>,
    /// Scaling factor of the counterexamples [default: 2]
    #[arg(long)]
    pub c: Option<f64>,
    /// Accepted negative gap [default: 1e-12]
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Serialize)]
struct VerifyConfig {
    principle: String,
    p: f64,
    q: f64,
    beta: Option<f64>,
    dim: usize,
    trials: u64,
    c: f64,
    tolerance: f64,
    seed: u64,
}

fn checks_for(r: &SweepReport) -> Vec<Check> {
    let name = r.principle.name();
    let mut out = Vec::new();
    match r.violation {
        Some(v) => out.push(Check::above(
            format!("{name}.violation"),
            v,
            VIOLATION_THRESHOLD,
        )),
        None => out.push(Check::at_least(
            format!("{name}.min_gap"),
            r.min_gap,
            -r.params.tolerance,
        )),
    }
    if let Some(e) = r.max_rel_error {
        let tol = if r.principle == Principle::Fisher {
            FISHER_REL_TOL
        } else {
            DERIVATIVE_REL_TOL
        };
        out.push(Check::at_most(format!("{name}.max_rel_error"), e, tol));
    }
    out
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn run(args: VerifyArgs, file: &ConfigFile, seed: u64) -> Result<Outcome> {
    let principle = file.get("principle", args.principle, "all".to_string())?;
    let p = file.get("p", args.p, 2.0)?;
    let q = file.get("q", args.q, p)?;
    let beta = file.opt("beta", args.beta)?;
    let dim = file.get("dim", args.dim, 2)?;
    let trials = file.get("trials", args.trials, 100_000)?;
    let c = file.get("c", args.c, 2.0)?;
    let tolerance = file.get("tolerance", args.tolerance, GAP_TOLERANCE)?;
    file.finish()?;

    let selected: Vec<Principle> = if principle.trim().eq_ignore_ascii_case("all") {
        Principle::SWEEPS.to_vec()
    } else {
        vec![principle.parse()?]
    };
    let reports = selected
        .into_iter()
        .map(|pr| {
            let mut cfg = SweepConfig::new(pr, p, q)
                .with_dim(dim)
                .with_trials(trials)
                .with_seed(seed)
                .with_c(c);
            cfg.beta = beta;
            cfg.tolerance = tolerance;
            run_sweep(&cfg)
        })
        .collect::<hidcvx_core::Result<Vec<_>>>()?;

    let checks = reports.iter().flat_map(checks_for).collect();
    let table = csv(
        &[
            "principle",
            "p",
            "q",
            "trials",
            "min_gap",
            "max_rel_error",
            "violation",
            "pass",
        ],
        reports.iter().map(|r| {
            vec![
                r.principle.name().to_string(),
                r.params.p.to_string(),
                r.params.q.to_string(),
                r.trials.to_string(),
                r.min_gap.to_string(),
                opt(r.max_rel_error),
                opt(r.violation),
                r.pass.to_string(),
            ]
        }),
    );
    let config = VerifyConfig {
        principle,
        p,
        q,
        beta,
        dim,
        trials,
        c,
        tolerance,
        seed,
    };
    Outcome::new(&Report::new("verify", config, checks, reports), Some(table))
}
