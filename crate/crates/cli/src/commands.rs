use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use confdop_core::conformal::{
    gamma, hill_transform, invariant_ratio, transform_finite, Event, GroupParameter,
};
use confdop_core::estimator::{
    bootstrap_alpha, decide_metric, fit_alpha, FitResult, DEFAULT_Z_THRESHOLD,
};
use confdop_core::tracking::{
    read_csv, sign_comparison_report, simulate, write_csv, SimConfig, RNG_ALGORITHM,
};
use confdop_core::wave::hubble_alpha_correction;
use confdop_core::{HUBBLE_RATE, PIONEER_ANOMALY_RATE, SPEED_OF_LIGHT};
use serde::{Deserialize, Serialize};

use crate::manifest::{default_manifest_path, verify_manifest, RunManifest};
use crate::suites::{self, Suite};
use crate::UsageError;

/// Environment variable that overrides the seed in a simulation config.
pub const SEED_ENV: &str = "CONFDOP_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "confdop",
    version,
    about = "Conformal group transforms, Doppler tracking simulation and alpha fits"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Apply the finite conformal map to one event
    Transform(TransformArgs),
    /// Run a randomized property suite
    Check(CheckArgs),
    /// Simulate a tracking pass and write CSV plus a manifest
    Simulate(SimulateArgs),
    /// Fit alpha to a tracking CSV
    Fit(FitArgs),
    /// Compare a fitted alpha with the Hubble rate and an anomalous drift
    Report(ReportArgs),
    /// Recompute the digests recorded in a manifest
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("param").required(true).args(["beta4", "alpha"])))]
#[command(group(clap::ArgGroup::new("when").required(true).args(["x4", "t"])))]
pub struct TransformArgs {
    /// Group parameter in 1/m
    #[arg(long, allow_hyphen_values = true)]
    pub beta4: Option<f64>,
    /// Group rate in 1/s (alpha = 2 c beta4)
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    /// Radius in m
    #[arg(long, allow_hyphen_values = true)]
    pub r: f64,
    /// Time coordinate x4 = c t in m
    #[arg(long, allow_hyphen_values = true)]
    pub x4: Option<f64>,
    /// Time in s
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<f64>,
    /// Speed of light in m/s
    #[arg(long, default_value_t = SPEED_OF_LIGHT)]
    pub c: f64,
    /// Also print the first-order (small alpha) result
    #[arg(long)]
    pub hill: bool,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SuiteName {
    Group,
    Oracle,
    Hill,
    Metric,
    Invariant,
}

impl From<SuiteName> for Suite {
    fn from(s: SuiteName) -> Self {
        match s {
            SuiteName::Group => Suite::Group,
            SuiteName::Oracle => Suite::Oracle,
            SuiteName::Hill => Suite::Hill,
            SuiteName::Metric => Suite::Metric,
            SuiteName::Invariant => Suite::Invariant,
        }
    }
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long, value_enum)]
    pub suite: SuiteName,
    /// Relative tolerance; for `hill`, the minimum convergence order
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of random cases (ignored by `hill`)
    #[arg(long)]
    pub cases: Option<usize>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Simulation config (JSON)
    #[arg(long)]
    pub config: PathBuf,
    /// Output CSV
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides CONFDOP_SEED and the config seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Manifest path [default: <out>.manifest.json]
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Tracking CSV
    #[arg(long)]
    pub input: PathBuf,
    /// Result JSON [default: stdout]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Number of bootstrap resamples for an extra stderr estimate
    #[arg(long)]
    pub bootstrap: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_Z_THRESHOLD)]
    pub z_threshold: f64,
    /// Bootstrap seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = SPEED_OF_LIGHT)]
    pub c: f64,
    /// Also write a manifest (requires --out)
    #[arg(long, requires = "out")]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Fit result JSON
    #[arg(long)]
    pub fit: Option<PathBuf>,
    /// Hubble rate in 1/s
    #[arg(long, default_value_t = HUBBLE_RATE, allow_hyphen_values = true)]
    pub hubble: f64,
    /// Anomalous drift rate in 1/s
    #[arg(long, default_value_t = PIONEER_ANOMALY_RATE, allow_hyphen_values = true)]
    pub anomaly: f64,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub manifest: PathBuf,
}

pub fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Transform(a) => cmd_transform(&a),
        Command::Check(a) => cmd_check(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Fit(a) => cmd_fit(&a),
        Command::Report(a) => cmd_report(&a),
        Command::Verify(a) => {
            let m = verify_manifest(&a.manifest)?;
            println!(
                "ok: {} output(s) match {}",
                m.outputs.len(),
                a.manifest.display()
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

#[derive(Debug, Serialize)]
struct HillOutput {
    r: f64,
    t: f64,
}

#[derive(Debug, Serialize)]
struct TransformOutput {
    beta4: f64,
    alpha: f64,
    r: f64,
    x4: f64,
    t: f64,
    gamma: f64,
    s2: f64,
    /// `None` at `r = 0`.
    s2_over_r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    hill: Option<HillOutput>,
}

fn cmd_transform(a: &TransformArgs) -> Result<ExitCode> {
    let p = match (a.beta4, a.alpha) {
        (Some(b), None) => GroupParameter::from_beta4(b, a.c)?,
        (None, Some(al)) => GroupParameter::from_alpha(al, a.c)?,
        _ => unreachable!("clap enforces exactly one"),
    };
    let e = match (a.x4, a.t) {
        (Some(x4), None) => Event::new(a.r, x4)?,
        (None, Some(t)) => Event::from_time(a.r, t, a.c)?,
        _ => unreachable!("clap enforces exactly one"),
    };
    let g = gamma(&p, &e)?.value();
    let m = transform_finite(&p, &e)?;
    let out = TransformOutput {
        beta4: p.beta4(),
        alpha: p.alpha(),
        r: m.r(),
        x4: m.x4(),
        t: m.time(a.c),
        gamma: g,
        s2: m.interval_squared(),
        s2_over_r: invariant_ratio(&m).ok(),
        hill: a.hill.then(|| {
            let (r, t) = hill_transform(&p, e.r(), e.time(a.c));
            HillOutput { r, t }
        }),
    };
    if a.json {
        println!("{}", serde_json::to_string_pretty(&out)?);
        return Ok(ExitCode::SUCCESS);
    }
    println!("beta4  = {:.17e} 1/m", out.beta4);
    println!("alpha  = {:.17e} 1/s", out.alpha);
    println!("r'     = {:.17e} m", out.r);
    println!("x4'    = {:.17e} m", out.x4);
    println!("t'     = {:.17e} s", out.t);
    println!("gamma  = {:.17e}", out.gamma);
    println!("s2'    = {:.17e} m^2", out.s2);
    match out.s2_over_r {
        Some(v) => println!("s2'/r' = {v:.17e} m"),
        None => println!("s2'/r' = undefined (r' = 0)"),
    }
    if let Some(h) = &out.hill {
        println!("first order: r' = {:.17e} m, t' = {:.17e} s", h.r, h.t);
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_check(a: &CheckArgs) -> Result<ExitCode> {
    let suite = Suite::from(a.suite);
    let threshold = a.tol.unwrap_or(suite.default_threshold());
    let cases = a.cases.unwrap_or(suite.default_cases());
    if cases == 0 && suite != Suite::Hill {
        return Err(UsageError("--cases must be at least 1".into()).into());
    }
    let report = suites::run(suite, cases, a.seed, threshold);
    if a.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        println!("{report}");
    }
    Ok(if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

/// Seed precedence: flag, then environment, then config.
pub fn resolve_seed(flag: Option<u64>, env: Option<&str>, config: u64) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match env {
        Some(text) => text.trim().parse().map_err(|_| {
            UsageError(format!(
                "{SEED_ENV} must be an unsigned integer, got `{text}`"
            ))
            .into()
        }),
        None => Ok(config),
    }
}

fn cmd_simulate(a: &SimulateArgs) -> Result<ExitCode> {
    let text = fs::read_to_string(&a.config)
        .with_context(|| format!("reading config {}", a.config.display()))?;
    let mut cfg: SimConfig = serde_json::from_str(&text)
        .with_context(|| format!("invalid config {}", a.config.display()))?;
    let env = std::env::var(SEED_ENV).ok();
    cfg.seed = resolve_seed(a.seed, env.as_deref(), cfg.seed)?;
    let records = simulate(&cfg)?;

    let mut buf = Vec::new();
    write_csv(&mut buf, &records)?;
    fs::write(&a.out, &buf).with_context(|| format!("writing {}", a.out.display()))?;

    let manifest_path = a
        .manifest
        .clone()
        .unwrap_or_else(|| default_manifest_path(&a.out));
    RunManifest::new(
        "simulate",
        serde_json::to_value(&cfg)?,
        Some(cfg.seed),
        RNG_ALGORITHM,
    )
    .write(&manifest_path, &[&a.out])?;
    eprintln!(
        "wrote {} records to {} (seed {}), manifest {}",
        records.len(),
        a.out.display(),
        cfg.seed,
        manifest_path.display()
    );
    Ok(ExitCode::SUCCESS)
}

/// Fit result as written by `fit`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitDocument {
    #[serde(flatten)]
    pub fit: FitResult,
    pub decision: String,
}

#[derive(Debug, Serialize)]
struct FitConfig<'a> {
    input: &'a str,
    input_sha256: String,
    c: f64,
    z_threshold: f64,
    bootstrap: Option<usize>,
}

fn cmd_fit(a: &FitArgs) -> Result<ExitCode> {
    let bytes = fs::read(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let records =
        read_csv(bytes.as_slice()).with_context(|| format!("in {}", a.input.display()))?;
    let fit = fit_alpha(&records, a.c)?;
    let decision = decide_metric(&fit, a.z_threshold);
    let doc = FitDocument {
        fit,
        decision: decision.as_str().into(),
    };
    let mut json = serde_json::to_string_pretty(&doc)?;
    json.push('\n');
    match &a.out {
        Some(out) => {
            fs::write(out, &json).with_context(|| format!("writing {}", out.display()))?;
            println!(
                "alpha_hat = {:.6e} +/- {:.3e} 1/s, z = {:.3}, {}",
                fit.alpha_hat, fit.alpha_stderr, fit.z_score_alpha_zero, decision
            );
        }
        None => print!("{json}"),
    }
    if let Some(n) = a.bootstrap {
        let sd = bootstrap_alpha(&records, a.c, n, a.seed)?;
        println!(
            "bootstrap_stderr = {sd:.6e} 1/s ({n} resamples, seed {})",
            a.seed
        );
    }
    if let (Some(manifest), Some(out)) = (&a.manifest, &a.out) {
        let cfg = FitConfig {
            input: &a.input.to_string_lossy(),
            input_sha256: crate::manifest::sha256_hex(&bytes),
            c: a.c,
            z_threshold: a.z_threshold,
            bootstrap: a.bootstrap,
        };
        let seed = a.bootstrap.map(|_| a.seed);
        RunManifest::new("fit", serde_json::to_value(&cfg)?, seed, RNG_ALGORITHM)
            .write(manifest, &[out.as_path()])?;
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub alpha_hat: Option<f64>,
    pub hubble_rate: f64,
    pub anomaly_rate: f64,
    /// `H₀ - α̂`; absent without a fit.
    pub corrected_hubble_rate: Option<f64>,
    pub opposite_sign: bool,
    pub magnitude_ratio: f64,
    pub decision: Option<String>,
    pub caveat: String,
}

pub fn build_report(fit: Option<&FitDocument>, hubble: f64, anomaly: f64) -> Report {
    let cmp = sign_comparison_report(anomaly, hubble);
    let alpha_hat = fit.map(|f| f.fit.alpha_hat);
    Report {
        alpha_hat,
        hubble_rate: hubble,
        anomaly_rate: anomaly,
        corrected_hubble_rate: alpha_hat.map(|a| hubble_alpha_correction(hubble, a)),
        opposite_sign: cmp.opposite_sign,
        magnitude_ratio: cmp.magnitude_ratio,
        decision: fit.map(|f| f.decision.clone()),
        caveat: cmp.caveat,
    }
}

fn read_fit(path: &Path) -> Result<FitDocument> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading fit {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing fit {}", path.display()))
}

fn cmd_report(a: &ReportArgs) -> Result<ExitCode> {
    let fit = a.fit.as_deref().map(read_fit).transpose()?;
    let rep = build_report(fit.as_ref(), a.hubble, a.anomaly);
    if a.json {
        println!("{}", serde_json::to_string_pretty(&rep)?);
        return Ok(ExitCode::SUCCESS);
    }
    let opt = |v: Option<f64>| v.map_or("n/a (no --fit)".to_string(), |x| format!("{x:.6e} 1/s"));
    println!("fitted alpha          {}", opt(rep.alpha_hat));
    println!("Hubble rate H0        {:.6e} 1/s", rep.hubble_rate);
    println!("anomalous drift rate  {:.6e} 1/s", rep.anomaly_rate);
    println!("corrected H0 - alpha  {}", opt(rep.corrected_hubble_rate));
    println!(
        "sign comparison       {} sign, |anomaly|/|H0| = {:.4}",
        if rep.opposite_sign {
            "opposite"
        } else {
            "same"
        },
        rep.magnitude_ratio
    );
    println!(
        "decision              {}",
        rep.decision.as_deref().unwrap_or("n/a (no --fit)")
    );
    println!("caveat: {}", rep.caveat);
    Ok(ExitCode::SUCCESS)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_precedence() {
        assert_eq!(resolve_seed(Some(1), Some("2"), 3).unwrap(), 1);
        assert_eq!(resolve_seed(None, Some("2"), 3).unwrap(), 2);
        assert_eq!(resolve_seed(None, None, 3).unwrap(), 3);
        let err = resolve_seed(None, Some("x"), 3).unwrap_err();
        assert!(err.is::<UsageError>());
    }

    fn doc(alpha_hat: f64) -> FitDocument {
        FitDocument {
            fit: FitResult {
                alpha_hat,
                alpha_stderr: 1e-19,
                chi2: 0.0,
                dof: 1,
                z_score_alpha_zero: alpha_hat / 1e-19,
                n_used: 2,
            },
            decision: "ConformalDetected".into(),
        }
    }

    #[test]
    fn report_corrections() {
        let r = build_report(Some(&doc(HUBBLE_RATE)), HUBBLE_RATE, PIONEER_ANOMALY_RATE);
        assert_eq!(r.corrected_hubble_rate, Some(0.0));
        assert!(r.opposite_sign);
        let r = build_report(Some(&doc(0.0)), HUBBLE_RATE, PIONEER_ANOMALY_RATE);
        assert_eq!(r.corrected_hubble_rate, Some(HUBBLE_RATE));
        let r = build_report(None, HUBBLE_RATE, PIONEER_ANOMALY_RATE);
        assert_eq!(
            (r.alpha_hat, r.corrected_hubble_rate, r.decision),
            (None, None, None)
        );
    }

    #[test]
    fn fit_document_keys_are_exact() {
        let v = serde_json::to_value(doc(1e-18)).unwrap();
        let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        keys.sort_unstable();
        assert_eq!(
            keys,
            [
                "alpha_hat",
                "alpha_stderr",
                "chi2",
                "decision",
                "dof",
                "n_used",
                "z_score_alpha_zero"
            ]
        );
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
