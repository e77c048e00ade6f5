//! The five subcommands. Each returns an exit code or a [`CliError`].

use std::path::Path;

use ladderlab::dist::{
    long_tailed_profile, prop2_inequality_check, sstar_ratio, ChainOptions, ChainSummary, ConstructionChain,
    LongTailProfile, Prop2Check, SstarProfile, TailSpec,
};
use ladderlab::estimate::{
    dominance_suite, estimate as estimate_one, finiteness_diagnostic, prop3_report, stability_curve, wald_check, DominanceReport,
    Estimand, FinitenessReport, Functional, MomentEstimate, Prop3Report, Prop3Tally, Verdict, WaldReport,
};
use ladderlab::growth::{certify, log_grid, ConditionReport};
use ladderlab::walk::{fold_shifted, replay_path, simulate as run_walks, LadderSample, WalkConfig};
use serde::Serialize;

use crate::config::{ExperimentConfig, Format, Law};
use crate::io::{self, Manifest};
use crate::{exit, CliError, Context};

fn verification(e: impl std::fmt::Display) -> CliError {
    CliError::Verification(e.to_string())
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

/// A report section that may have been skipped.
#[derive(Serialize)]
#[serde(untagged)]
enum Section<T> {
    Done(T),
    Skipped { skipped: String },
}

impl<T> Section<T> {
    fn from_result<E: std::fmt::Display>(r: Result<T, E>) -> Self {
        match r {
            Ok(v) => Section::Done(v),
            Err(e) => Section::Skipped { skipped: e.to_string() },
        }
    }
}

fn certified(cfg: &ExperimentConfig) -> Result<ConditionReport, CliError> {
    let g = cfg.growth()?;
    let report = certify(&g).map_err(config_err)?;
    if !report.all_ok() {
        return Err(verification(format!(
            "growth conditions fail for {}: {:?}",
            report.growth,
            report.witnesses.first()
        )));
    }
    Ok(report)
}

fn build_chain(cfg: &ExperimentConfig) -> Result<ConstructionChain, CliError> {
    let report = certified(cfg)?;
    let opts = ChainOptions { delta: cfg.delta, trunc_margin: cfg.trunc_margin };
    ConstructionChain::build(cfg.base()?, cfg.growth()?, &report, opts).map_err(verification)
}

fn law(cfg: &ExperimentConfig, chain: Option<&ConstructionChain>) -> Result<TailSpec, CliError> {
    let chain = match (cfg.law, chain) {
        (Law::Base, _) => return cfg.base(),
        (_, Some(c)) => c.clone(),
        (_, None) => build_chain(cfg)?,
    };
    Ok(match cfg.law {
        Law::Tilde => chain.tilde().clone(),
        _ => chain.trunc.trunc.clone(),
    })
}

#[derive(Serialize)]
struct CheckBody {
    passed: bool,
    report: ConditionReport,
}

pub fn check(ctx: &Context) -> Result<i32, CliError> {
    let g = ctx.cfg.growth()?;
    let report = certify(&g).map_err(config_err)?;
    let passed = report.all_ok();
    let manifest = Manifest::new(&ctx.cfg, 0);
    io::write_json(&ctx.out.join("conditions.json"), &manifest, &CheckBody { passed, report: report.clone() })?;
    if passed {
        Ok(exit::OK)
    } else {
        for w in report.witnesses.iter().take(5) {
            eprintln!("witness: {w:?}");
        }
        Ok(exit::VERIFICATION)
    }
}

#[derive(Serialize)]
struct Diagnostics {
    long_tailed: Section<LongTailProfile>,
    sstar: Section<SstarProfile>,
    prop2: Section<Prop2Check>,
}

#[derive(Serialize)]
struct ConstructBody {
    conditions: ConditionReport,
    chain: ChainSummary,
    hat_diagnostics: Diagnostics,
}

#[derive(Serialize)]
struct TailRow {
    x: f64,
    base: f64,
    tilde: f64,
    truncated: f64,
    hat: f64,
}

fn tail_table(chain: &ConstructionChain) -> Vec<TailRow> {
    let mut xs: Vec<f64> = log_grid(1e-2, 1e3, 51).into_iter().rev().map(|x| -x).collect();
    xs.push(0.0);
    xs.extend(log_grid(1e-2, 1e8, 201));
    xs.into_iter()
        .map(|x| TailRow {
            x,
            base: chain.base.tail(x),
            tilde: chain.tilde().tail(x),
            truncated: chain.trunc.trunc.tail(x),
            hat: chain.hat.tail(x),
        })
        .collect()
}

pub fn construct(ctx: &Context) -> Result<i32, CliError> {
    ctx.cfg.validate()?;
    let chain = build_chain(&ctx.cfg)?;
    let hat = &chain.hat;
    let x1 = hat.support().0.max(1.0);
    let diagnostics = Diagnostics {
        long_tailed: Section::from_result(long_tailed_profile(hat, 1.0, &log_grid(x1, 1e12, 45), 1e-2)),
        sstar: Section::from_result(sstar_ratio(hat, &log_grid(1.0, 1e12, 45), 0.1)),
        prop2: Section::from_result(prop2_inequality_check(
            hat,
            chain.report.gamma,
            &log_grid(1e-2, 1e12, 300),
            &log_grid(1e-7, 0.5, 100),
        )),
    };
    let manifest = Manifest::new(&ctx.cfg, 0);
    let body = ConstructBody { conditions: chain.report.clone(), chain: chain.summary(), hat_diagnostics: diagnostics };
    io::write_json(&ctx.out.join("chain.json"), &manifest, &body)?;
    let rows = tail_table(&chain);
    match ctx.format {
        Format::Csv => io::write_csv(&ctx.out.join("tails.csv"), &manifest, &rows)?,
        Format::Json => io::write_json(&ctx.out.join("tails.json"), &manifest, &Rows { rows: &rows })?,
    }
    Ok(exit::OK)
}

#[derive(Serialize)]
struct Rows<'a, T> {
    rows: &'a [T],
}

#[derive(Serialize)]
struct SimulateBody {
    law: Law,
    law_label: String,
    law_mean: f64,
    n_samples: u64,
    step_cap: u64,
    censored_n: u64,
    samples_file: String,
}

pub fn simulate(ctx: &Context, replay: Option<u64>) -> Result<i32, CliError> {
    let cfg = &ctx.cfg;
    cfg.validate()?;
    let law = law(cfg, None)?;
    if let Some(id) = replay {
        let wc = WalkConfig::new(law, cfg.seed, id, cfg.step_cap).map_err(config_err)?;
        let path = replay_path(&wc);
        let manifest = Manifest { stream_first: id, ..Manifest::new(cfg, 1) };
        match ctx.format {
            Format::Csv => io::write_csv(&ctx.out.join(format!("replay_{id}.csv")), &manifest, &path)?,
            Format::Json => io::write_json(&ctx.out.join(format!("replay_{id}.json")), &manifest, &Rows { rows: &path })?,
        }
        return Ok(exit::OK);
    }
    let samples = run_walks(&law, cfg.seed, cfg.n_samples, cfg.step_cap, cfg.streams).map_err(config_err)?;
    let manifest = Manifest::new(cfg, cfg.n_samples);
    let path = io::samples_path(&ctx.out, ctx.format);
    io::write_samples(&path, &manifest, &samples, ctx.format)?;
    let body = SimulateBody {
        law: cfg.law,
        law_label: law.label().to_string(),
        law_mean: law.mean(),
        n_samples: cfg.n_samples,
        step_cap: cfg.step_cap,
        censored_n: samples.iter().filter(|s| s.censored).count() as u64,
        samples_file: path.file_name().unwrap_or_default().to_string_lossy().into_owned(),
    };
    io::write_json(&ctx.out.join("manifest.json"), &manifest, &body)?;
    Ok(exit::OK)
}

fn load_samples(ctx: &Context, samples: Option<&Path>) -> Result<(Manifest, Vec<LadderSample>), CliError> {
    let path = match samples {
        Some(p) => p.to_path_buf(),
        None => io::find_samples(&ctx.out, ctx.format)?,
    };
    io::read_samples(&path, &ctx.cfg)
}

fn functionals(cfg: &ExperimentConfig, a: f64) -> Result<Vec<Functional>, CliError> {
    let mut out = vec![Functional::g_moment(&cfg.growth()?, cfg.eps, cfg.delta, a).map_err(config_err)?];
    if let Some(alpha) = cfg.alpha {
        out.push(Functional::power(alpha).map_err(config_err)?);
    }
    if let Some(c) = cfg.c {
        out.push(Functional::exp(c).map_err(config_err)?);
    }
    Ok(out)
}

fn estimand_label(e: &Estimand) -> String {
    match e {
        Estimand::GMoment { growth, eps, delta, a } => format!("g_moment[{growth}; eps={eps}; delta={delta}; a={a}]"),
        Estimand::Power { alpha } => format!("power[alpha={alpha}]"),
        Estimand::Exp { c } => format!("exp[c={c}]"),
    }
}

#[derive(Serialize)]
struct CurveRow {
    estimand: String,
    n: u64,
    point: Option<f64>,
    std_error: Option<f64>,
    top1_share: f64,
    censored_n: u64,
    verdict: Verdict,
}

impl CurveRow {
    fn new(e: &MomentEstimate) -> Self {
        Self {
            estimand: estimand_label(&e.estimand),
            n: e.n,
            point: e.point,
            std_error: e.std_error,
            top1_share: e.top1_share,
            censored_n: e.censored_n,
            verdict: e.verdict,
        }
    }
}

#[derive(Serialize)]
struct EstimateBody {
    a: f64,
    estimates: Vec<MomentEstimate>,
    stability: Vec<Vec<MomentEstimate>>,
}

pub fn estimate(ctx: &Context, samples: Option<&Path>) -> Result<i32, CliError> {
    let cfg = &ctx.cfg;
    let a = cfg.validate()?;
    let (manifest, samples) = load_samples(ctx, samples)?;
    let prefixes = cfg.prefixes();
    let mut estimates = Vec::new();
    let mut stability = Vec::new();
    for f in functionals(cfg, a)? {
        estimates.push(estimate_one(&samples, &f).map_err(config_err)?);
        stability.push(stability_curve(&samples, &f, &prefixes).map_err(config_err)?);
    }
    let body = EstimateBody { a, estimates, stability };
    io::write_json(&ctx.out.join("estimates.json"), &manifest, &body)?;
    if ctx.format == Format::Csv {
        let rows: Vec<CurveRow> = body.stability.iter().flatten().map(CurveRow::new).collect();
        io::write_csv(&ctx.out.join("stability.csv"), &manifest, &rows)?;
    }
    let censored = body.estimates.iter().any(|e| e.verdict == Verdict::CensoredDominated);
    if censored {
        eprintln!("ladderlab: an estimate is dominated by censored excursions");
        return Ok(exit::CENSORED);
    }
    Ok(exit::OK)
}

#[derive(Serialize)]
struct VerifyBody {
    passed: bool,
    dominance: DominanceReport,
    wald: WaldReport,
    prop3: Section<Prop3Report>,
    finiteness: Section<FinitenessReport>,
}

fn prop3(ctx: &Context, chain: &ConstructionChain) -> Result<Prop3Report, String> {
    let cfg = &ctx.cfg;
    let v = &cfg.verify;
    let [lo, hi, pts] = v.prop3_grid;
    let grid = log_grid(lo, hi, pts as usize);
    let shift = chain.a - chain.delta;
    let n = v.prop3_n.unwrap_or(cfg.n_samples);
    let tally = fold_shifted(
        chain.tilde(),
        shift,
        cfg.seed,
        n,
        cfg.step_cap,
        cfg.streams,
        || Prop3Tally::new(&grid),
        |mut t, s| {
            t.add(&s);
            t
        },
        Prop3Tally::merge,
    )
    .map_err(|e| e.to_string())?;
    Ok(prop3_report(&tally, &chain.psi, v.delta_tol))
}

pub fn verify(ctx: &Context, samples: Option<&Path>) -> Result<i32, CliError> {
    let cfg = &ctx.cfg;
    let a = cfg.validate()?;
    let (manifest, samples) = load_samples(ctx, samples)?;
    let chain = build_chain(cfg)?;
    let law = law(cfg, Some(&chain))?;

    let dominance = dominance_suite(&chain, cfg.verify.dominance_n, cfg.seed);
    let wald = wald_check(&samples, law.mean()).map_err(config_err)?;
    let prop3 = Section::from_result(prop3(ctx, &chain));
    let g = Functional::g_moment(&chain.growth, cfg.eps, cfg.delta, a).map_err(config_err)?;
    let finiteness = Section::from_result(
        stability_curve(&samples, &g, &cfg.prefixes())
            .and_then(|c| finiteness_diagnostic(&c))
            .map_err(|e| e.to_string()),
    );
    let passed = dominance.passed && wald.passed;
    let body = VerifyBody { passed, dominance, wald, prop3, finiteness };
    io::write_json(&ctx.out.join("verify.json"), &manifest, &body)?;
    if ctx.format == Format::Csv {
        if let Section::Done(p) = &body.prop3 {
            io::write_csv(&ctx.out.join("prop3.csv"), &manifest, &p.rows)?;
        }
    }
    if passed {
        return Ok(exit::OK);
    }
    if let Some(w) = body.dominance.first {
        eprintln!("dominance violations: {} (first {w:?})", body.dominance.violations);
    }
    if !body.wald.passed {
        eprintln!("wald: diff {} with standard error {}", body.wald.diff, body.wald.std_error);
    }
    Ok(exit::VERIFICATION)
}
