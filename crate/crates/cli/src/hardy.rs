use anyhow::{bail, Result};
use clap::Args;
use serde::Serialize;

use hidcvx_core::hardy::{
    argmax_beta, beta_polynomial, fractional_report, local_hardy_check, local_sharp_constant,
    FractionalParams, HardyBox, LocalParams,
};
use hidcvx_core::{NormPair, QuadratureConfig};

use crate::config::ConfigFile;
use crate::report::{csv, Check, Outcome, Report};

const ARGMAX_TOL: f64 = 1e-8;
/// The discrete quotient of the annular bump must reach this share of the constant.
const DISCRETE_SHARE: f64 = 0.95;
const MC_SIGMAS: f64 = 3.0;

#[derive(Args, Debug, Default)]
pub struct HardyArgs {
    /// `local` (weighted, general norm) or `fractional` [default: local]
    #[arg(long)]
    pub mode: Option<String>,
    /// Space dimension [default: 3 for local, 2 for fractional]
    #[arg(long = "N", value_name = "N")]
    pub n: Option<usize>,
    /// Integrability exponent [default: 2]
    #[arg(long)]
    pub p: Option<f64>,
    /// Weight exponent of the local inequality, γ > p − N [default: 0]
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Local norm F: `euclid` or `lp:<r>` with 1 < r < ∞ [default: euclid]
    #[arg(long)]
    pub norm: Option<String>,
    /// Local: interior nodes per axis of the annular-bump check on [−1,1]^N; 0 skips it [default: 0]
    #[arg(long)]
    pub check_nodes: Option<usize>,
    /// Fractional order, 0 < s < 1 with sp < N [default: 0.5]
    #[arg(long)]
    pub s: Option<f64>,
    /// Number of β values in the sweep of (0, (N−sp)/(p−1)) [default: 50]
    #[arg(long)]
    pub sweep: Option<usize>,
    /// Monte-Carlo samples for the oracle cross-check; 0 skips it [default: 0]
    #[arg(long)]
    pub mc_samples: Option<u64>,
    /// β of the Monte-Carlo cross-check [default: (N−sp)/p]
    #[arg(long)]
    pub mc_beta: Option<f64>,
    /// Also write the β-sweep as CSV (columns beta,C_beta,error_estimate)
    #[arg(long, value_name = "PATH")]
    pub csv: Option<std::path::PathBuf>,
}

#[derive(Debug, Serialize)]
struct LocalConfig {
    mode: &'static str,
    #[serde(rename = "N")]
    n: usize,
    p: f64,
    gamma: f64,
    norm: String,
    check_nodes: usize,
}

#[derive(Debug, Serialize)]
struct LocalOutput {
    params: LocalParams,
    sharp_constant: f64,
    argmax_beta: f64,
    expected_argmax: f64,
    polynomial_max: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    discrete_ratio: Option<f64>,
}

#[derive(Debug, Serialize)]
struct FractionalConfig {
    mode: &'static str,
    #[serde(rename = "N")]
    n: usize,
    s: f64,
    p: f64,
    sweep: usize,
    mc_samples: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    mc_beta: Option<f64>,
    seed: u64,
}

fn parse_norm(desc: &str, n: usize) -> Result<NormPair> {
    let d = desc.trim().to_ascii_lowercase();
    if d == "euclid" {
        return Ok(NormPair::euclid(n)?);
    }
    if let Some(r) = d.strip_prefix("lp:") {
        return Ok(NormPair::lp(r.trim().parse()?, n)?);
    }
    bail!("unknown norm '{desc}', expected euclid or lp:<r>")
}

pub fn run(args: HardyArgs, file: &ConfigFile, seed: u64) -> Result<Outcome> {
    let mode = file.get("mode", args.mode.clone(), "local".to_string())?;
    match mode.trim().to_ascii_lowercase().as_str() {
        "local" => run_local(args, file),
        "fractional" => run_fractional(args, file, seed),
        other => bail!("unknown mode '{other}', expected local or fractional"),
    }
}

fn run_local(args: HardyArgs, file: &ConfigFile) -> Result<Outcome> {
    let n = file.get("n", args.n, 3)?;
    let p = file.get("p", args.p, 2.0)?;
    let gamma = file.get("gamma", args.gamma, 0.0)?;
    let norm = file.get("norm", args.norm, "euclid".to_string())?;
    let check_nodes = file.get("check_nodes", args.check_nodes, 0)?;
    for key in ["s", "sweep", "mc_samples", "mc_beta", "csv"] {
        if file.opt::<String>(key, None)?.is_some() {
            bail!("config key '{key}' applies to fractional mode only");
        }
    }
    if args.s.is_some()
        || args.sweep.is_some()
        || args.mc_samples.is_some()
        || args.mc_beta.is_some()
        || args.csv.is_some()
    {
        bail!("--s, --sweep, --mc-samples, --mc-beta and --csv apply to fractional mode only");
    }
    file.finish()?;

    let lp = LocalParams::new(n, p, gamma, parse_norm(&norm, n)?)?;
    let sharp = local_sharp_constant(&lp)?;
    let arg = argmax_beta(&lp)?;
    let expected = (n as f64 + gamma - p) / p;
    let poly = beta_polynomial(arg, &lp)?;
    let mut checks = vec![
        Check::at_most("argmax_beta.abs_error", (arg - expected).abs(), ARGMAX_TOL),
        Check::at_most(
            "polynomial_max.rel_error",
            (poly - sharp).abs() / sharp,
            1e-10,
        ),
    ];
    let discrete_ratio = if check_nodes > 0 {
        let bx = HardyBox::new(n, check_nodes, 1.0)?;
        let v = bx.annular_bump(&lp.norm, 0.25, 0.75)?;
        let ratio = local_hardy_check(&lp, &bx, &v)?;
        checks.push(Check::at_least(
            "discrete_ratio",
            ratio,
            DISCRETE_SHARE * sharp,
        ));
        Some(ratio)
    } else {
        None
    };
    let config = LocalConfig {
        mode: "local",
        n,
        p,
        gamma,
        norm,
        check_nodes,
    };
    let output = LocalOutput {
        params: lp,
        sharp_constant: sharp,
        argmax_beta: arg,
        expected_argmax: expected,
        polynomial_max: poly,
        discrete_ratio,
    };
    Outcome::new(&Report::new("hardy", config, checks, output), None)
}

fn run_fractional(args: HardyArgs, file: &ConfigFile, seed: u64) -> Result<Outcome> {
    let n = file.get("n", args.n, 2)?;
    let s = file.get("s", args.s, 0.5)?;
    let p = file.get("p", args.p, 2.0)?;
    let sweep = file.get("sweep", args.sweep, 50)?;
    let mc_samples = file.get("mc_samples", args.mc_samples, 0)?;
    let mc_beta = file.opt("mc_beta", args.mc_beta)?;
    let csv_path = file.opt("csv", args.csv.map(|p| p.display().to_string()))?;
    for key in ["gamma", "norm", "check_nodes"] {
        if file.opt::<String>(key, None)?.is_some() {
            bail!("config key '{key}' applies to local mode only");
        }
    }
    if args.gamma.is_some() || args.norm.is_some() || args.check_nodes.is_some() {
        bail!("--gamma, --norm and --check-nodes apply to local mode only");
    }
    file.finish()?;
    if sweep == 0 {
        bail!("the sweep needs at least one point");
    }

    let fp = FractionalParams::new(n, s, p)?;
    let mc = (mc_samples > 0).then(|| (mc_beta.unwrap_or(fp.optimal_beta()), mc_samples, seed));
    let report = fractional_report(&fp, sweep, &QuadratureConfig::default(), mc)?;
    let mut checks = vec![
        Check::at_most(
            "argmax_beta.abs_error",
            (report.argmax_beta - report.expected_argmax).abs(),
            report.beta_step,
        ),
        Check::at_most(
            "max_excess",
            report.max_excess,
            report.sharp_error
                + report
                    .sweep
                    .iter()
                    .map(|s| s.error_estimate)
                    .fold(0.0, f64::max),
        ),
    ];
    if let Some(o) = &report.oracle {
        checks.push(Check::at_most("montecarlo.z_score", o.z_score, MC_SIGMAS));
    }
    let table = csv(
        &["beta", "C_beta", "error_estimate"],
        report.sweep.iter().map(|s| {
            vec![
                s.beta.to_string(),
                s.c_beta.to_string(),
                s.error_estimate.to_string(),
            ]
        }),
    );
    if let Some(path) = &csv_path {
        std::fs::write(path, &table)?;
    }
    let config = FractionalConfig {
        mode: "fractional",
        n,
        s,
        p,
        sweep,
        mc_samples,
        mc_beta: mc.map(|m| m.0),
        seed,
    };
    Outcome::new(&Report::new("hardy", config, checks, report), Some(table))
}
