//! Acceptance criteria, one PASS/FAIL line each. Oracles here are written
//! independently of the library code they check.

#![allow(clippy::needless_range_loop)]

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use ladderlab::dist::{sstar_ratio, ChainOptions, ConstructionChain, TailSpec};
use ladderlab::estimate::{dominance_suite, prop3_report, Prop3Tally};
use ladderlab::growth::{certify, log_grid, Growth, GrowthFunction};
use ladderlab::walk::{fold_shifted, ladder_epoch, lindley_busy_cycle, simulate, WalkConfig};
use ladderlab_cli::run_args;
use serde_json::Value;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond { Ok(()) } else { Err(msg()) }
}

fn threads() -> usize {
    std::thread::available_parallelism().map_or(4, |n| n.get())
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn cli(cmd: &str, cfg: &Path, out: &Path, extra: &[&str]) -> i32 {
    let mut args = vec!["ladderlab", cmd, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    run_args(args)
}

fn growth_toml(family: &str, param: f64) -> String {
    format!(
        "eps = 0.5\ndelta = 0.5\nn_samples = 1\nseed = 1\n[growth]\nfamily = \"{family}\"\nparam = {param}\n\
         [increments]\nfamily = \"constant\"\nvalue = -1.0\n"
    )
}

/// Chains for the three builtin families with delta = a/2; every base has mean -1.
fn chains() -> Vec<ConstructionChain> {
    let bases = [
        (GrowthFunction::builtin("g1", 2.0).unwrap(), TailSpec::lognormal_with_mean(0.0, 0.25, -1.0).unwrap()),
        (GrowthFunction::builtin("g2", 0.5).unwrap(), TailSpec::weibull_with_mean(1.0, 0.7, -1.0).unwrap()),
        (GrowthFunction::builtin("g3", 0.5).unwrap(), TailSpec::weibull_with_mean(1.0, 0.8, -1.0).unwrap()),
    ];
    bases
        .into_iter()
        .map(|(g, b)| {
            let r = certify(&g).unwrap();
            let a = -b.mean();
            ConstructionChain::build(b, g, &r, ChainOptions { delta: a / 2.0, trunc_margin: None }).unwrap()
        })
        .collect()
}

/// Closed-form growth functions, kept separate from the library's.
fn g_closed(tag: usize, x: f64) -> f64 {
    match tag {
        0 => {
            if x > 1.0 { x.ln().powi(2) } else { 0.0 }
        }
        1 => x.max(0.0).sqrt(),
        _ => {
            if x > 1.0 { x.sqrt() * x.ln() } else { 0.0 }
        }
    }
}

fn c1_certification() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut notes = Vec::new();
    for (fam, p) in [("g1", 2.0), ("g2", 0.5), ("g3", 0.5)] {
        let cfg = dir.path().join(format!("{fam}.toml"));
        fs::write(&cfg, growth_toml(fam, p)).unwrap();
        let out = dir.path().join(fam);
        let t = Instant::now();
        let code = cli("check", &cfg, &out, &[]);
        let el = t.elapsed();
        ensure(code == 0, || format!("{fam}: exit {code}"))?;
        ensure(el < Duration::from_secs(30), || format!("{fam}: {el:?}"))?;
        let r = &json(&out.join("conditions.json"))["report"];
        let (g, a, xm) = (r["gamma"].as_f64().unwrap(), r["A"].as_f64().unwrap(), r["x_max"].as_f64().unwrap());
        ensure(g > 0.0 && g < 1.0 && a.is_finite() && xm == 1e8, || format!("{fam}: gamma {g} A {a} x_max {xm}"))?;
        notes.push(format!("{fam} gamma={g} A={a:.3} ({:.1}s)", el.as_secs_f64()));
    }
    let cfg = dir.path().join("lin.toml");
    fs::write(&cfg, growth_toml("linear", 0.1)).unwrap();
    let out = dir.path().join("lin");
    let code = cli("check", &cfg, &out, &[]);
    ensure(code == 2, || format!("linear: exit {code}"))?;
    let r = &json(&out.join("conditions.json"))["report"];
    let w = r["witnesses"].as_array().unwrap();
    ensure(r["c2_ok"] == false && w.iter().any(|w| w["kind"] == "derivative_decay"), || "no C2 witness".into())?;
    notes.push("linear 0.1x exit 2 with C2 witness".into());
    Ok(notes.join("; "))
}

fn c2_majorant(chains: &[ConstructionChain]) -> Outcome {
    let grid = log_grid(1e-3, 1e8, 10_000);
    let mut worst = 0.0f64;
    for (i, c) in chains.iter().enumerate() {
        let k = c.k_fit.k;
        for &x in &grid {
            let exact = (k * (-g_closed(i, x)).exp()).min(1.0);
            let got = c.hat.tail(x);
            let rel = if exact == 0.0 { if got == 0.0 { 0.0 } else { f64::INFINITY } } else { (got - exact).abs() / exact };
            worst = worst.max(rel);
            ensure(rel <= 1e-12, || format!("chain {i}: x={x} got {got} exact {exact}"))?;
        }
    }
    Ok(format!("3 chains x 10^4 points, worst relative error {worst:.2e}"))
}

/// `E eta = int_0^inf tail - int_-inf^0 cdf` by composite Simpson on a log scale.
fn simpson_mean(f: &TailSpec, lo: f64) -> f64 {
    let simpson = |h: &dyn Fn(f64) -> f64, a: f64, b: f64, n: usize| {
        let step = (b - a) / n as f64;
        let mut s = h(a) + h(b);
        for j in 1..n {
            s += h(a + j as f64 * step) * if j % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * step / 3.0
    };
    let pos = simpson(&|u: f64| f.tail(u.exp()) * u.exp(), (1e-9f64).ln(), (1e12f64).ln(), 400_000);
    let neg = simpson(&|x: f64| 1.0 - f.tail(x), lo, 0.0, 200_000);
    pos - neg
}

fn c3_splice_mean(chains: &[ConstructionChain]) -> Outcome {
    let mut notes = Vec::new();
    let grid: Vec<f64> = log_grid(1e-3, 1e3, 200)
        .into_iter()
        .rev()
        .map(|x| -x)
        .chain(log_grid(1e-3, 1e9, 2000))
        .collect();
    for c in chains {
        let s = &c.splice;
        let target = -c.a + c.delta;
        ensure(s.mean_tilde < target && s.margin > 0.0, || format!("{}: mean {} target {target}", c.growth.tag(), s.mean_tilde))?;
        let quad = simpson_mean(c.tilde(), c.base.support().0);
        ensure((quad - s.mean_tilde).abs() < 1e-5, || format!("{}: simpson {quad} vs {}", c.growth.tag(), s.mean_tilde))?;
        let mut prev = f64::INFINITY;
        for &x in &grid {
            let t = c.tilde().tail(x);
            ensure(t <= prev, || format!("{}: tail increases at {x}", c.growth.tag()))?;
            ensure(t >= c.base.tail(x), || format!("{}: tilde below base at {x}", c.growth.tag()))?;
            prev = t;
        }
        notes.push(format!("{} mean {:.4} < {target:.4} (margin {:.3})", c.growth.tag(), s.mean_tilde, s.margin));
    }
    Ok(notes.join("; "))
}

fn c4_sstar() -> Outcome {
    let t = Instant::now();
    let pareto = TailSpec::pareto(2.0, 1.0, 0.0).unwrap();
    let p = sstar_ratio(&pareto, &log_grid(1.0, 1e12, 45), 0.1).map_err(|e| e.to_string())?;
    let last = *p.points.last().unwrap();
    ensure(p.in_band && p.decreasing, || format!("pareto: last {last:?} decreasing {}", p.decreasing))?;
    let exp = TailSpec::exponential(1.0, 0.0).unwrap();
    let m = exp.pos_mean();
    let e = sstar_ratio(&exp, &[40.0 * m], 0.1).map_err(|e| e.to_string())?;
    let r = e.points[0].ratio;
    ensure(r > 10.0 && (r - 20.0).abs() < 1e-6, || format!("exponential ratio {r}"))?;
    let el = t.elapsed();
    ensure(el < Duration::from_secs(120), || format!("{el:?}"))?;
    Ok(format!(
        "pareto ratio {:.4} at x={:.0e}; exponential ratio {r:.3} at 40m ({:.1}s)",
        last.ratio,
        last.x,
        el.as_secs_f64()
    ))
}

fn c5_dominance(chains: &[ConstructionChain]) -> Outcome {
    let mut notes = Vec::new();
    for (i, c) in chains.iter().enumerate() {
        let r = dominance_suite(c, 1_000_000, 1000 + i as u64);
        ensure(r.passed && r.violations == 0, || format!("{}: {r:?}", c.growth.tag()))?;
        notes.push(format!("{} 0/{}", c.growth.tag(), r.n));
    }
    Ok(notes.join("; "))
}

/// `P{tau = n}` for `n <= depth` by enumerating every +-1 path of length `depth`.
fn enumerate_tau(p: f64, depth: usize) -> Vec<f64> {
    let mut law = vec![0.0; depth + 1];
    for bits in 0u32..(1 << depth) {
        let mut s = 0i32;
        let mut prob = 1.0;
        for n in 1..=depth {
            let up = bits >> (n - 1) & 1 == 1;
            s += if up { 1 } else { -1 };
            prob *= if up { p } else { 1.0 - p };
            if s <= 0 {
                // later steps marginalize out, so stop at the epoch
                law[n] += prob;
                break;
            }
        }
    }
    // each path was counted once per completion of its tail bits
    for (n, v) in law.iter_mut().enumerate().skip(1) {
        *v /= (1u64 << (depth - n)) as f64;
    }
    law
}

fn c6_bernoulli() -> Outcome {
    let t = Instant::now();
    let p = 0.25;
    let law = enumerate_tau(p, 20);
    let f = TailSpec::bernoulli_pm1(p).unwrap();
    let n = 1_000_000u64;
    let s = simulate(&f, 6, n, 1_000_000, threads()).map_err(|e| e.to_string())?;
    let nf = n as f64;
    let taus: Vec<f64> = s.iter().map(|x| x.tau as f64).collect();
    let mean = taus.iter().sum::<f64>() / nf;
    let var = taus.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    let se = (var / nf).sqrt();
    // Wald: only the first step can overshoot, so E S_tau = -(1 - p)
    let wald = -(1.0 - p) / (2.0 * p - 1.0);
    ensure((mean - wald).abs() <= 4.0 * se, || format!("mean {mean} vs {wald}, se {se}"))?;
    let mut worst = 0.0f64;
    for k in 1..=20 {
        let hit = s.iter().filter(|x| x.tau == k as u64).count() as f64 / nf;
        let se_k = (law[k] * (1.0 - law[k]) / nf).sqrt().max(1.0 / nf);
        let z = (hit - law[k]).abs() / se_k;
        worst = worst.max(z);
        ensure(z <= 4.0, || format!("P(tau={k}): {hit} vs {} ({z:.2} se)", law[k]))?;
    }
    let el = t.elapsed();
    ensure(el < Duration::from_secs(60), || format!("{el:?}"))?;
    Ok(format!(
        "mean tau {mean:.4} +- {se:.4} vs 1.5; worst P(tau=n) deviation {worst:.2} se ({:.1}s)",
        el.as_secs_f64()
    ))
}

fn c7_lindley() -> Outcome {
    let sigma = TailSpec::exponential(1.0, 0.0).unwrap();
    let t = TailSpec::constant(2.0).unwrap();
    let pair = TailSpec::queue_pair(sigma.clone(), t.clone()).unwrap();
    let mut total = 0u64;
    for i in 0..100_000u64 {
        let c = lindley_busy_cycle(&sigma, &t, 7, i, 1_000_000).map_err(|e| e.to_string())?;
        let l = ladder_epoch(&WalkConfig::new(pair.clone(), 7, i, 1_000_000).unwrap());
        ensure(c.customers == l.tau && !c.censored && !l.censored, || format!("stream {i}: {} vs {}", c.customers, l.tau))?;
        total += l.tau;
    }
    Ok(format!("10^5 cycles identical, mean cycle length {:.4}", total as f64 / 1e5))
}

fn c8_prop3() -> Outcome {
    let t = Instant::now();
    let xi = TailSpec::pareto(2.0, 1.0, -3.0).unwrap();
    let a = -xi.mean();
    let delta = 0.5;
    let shift = a - delta;
    let psi = TailSpec::shifted(xi.clone(), shift);
    let grid = log_grid(1.0, 1e4, 41);
    let tally = fold_shifted(
        &xi,
        shift,
        8,
        10_000_000,
        1_000_000,
        threads(),
        || Prop3Tally::new(&grid),
        |mut acc, s| {
            acc.add(&s);
            acc
        },
        Prop3Tally::merge,
    )
    .map_err(|e| e.to_string())?;
    let r = prop3_report(&tally, &psi, 0.25);
    let el = t.elapsed();
    ensure(el < Duration::from_secs(600), || format!("{el:?}"))?;
    let x = r.resolvable_x.ok_or("no resolvable x")?;
    let row = r.rows.iter().find(|row| row.x == x).unwrap();
    ensure(r.contains_mean_tau, || {
        format!("x={x}: ratio {} CI [{}, {}] vs mean tau {}", row.ratio, row.ci_lo, row.ci_hi, r.mean_tau)
    })?;
    Ok(format!(
        "x={x:.0} ({} exceedances): ratio {:.3} CI [{:.3}, {:.3}] contains mean tau {:.4} ({:.0}s)",
        row.exceedances,
        row.ratio,
        row.ci_lo,
        row.ci_hi,
        r.mean_tau,
        el.as_secs_f64()
    ))
}

const G2_WEIBULL: &str = r#"
eps = 0.5
delta = 0.5
n_samples = 640000
step_cap = 1000000
seed = 9
[growth]
family = "g2"
param = 0.5
[increments]
family = "weibull_shifted"
beta = 0.7
mean = -1.0
[verify]
dominance_n = 1000000
prop3_n = 100000
prefixes = [10000, 40000, 160000, 640000]
"#;

fn c9_stability() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("g2.toml");
    fs::write(&cfg, G2_WEIBULL).unwrap();
    let out = dir.path().join("o");
    let streams = threads().to_string();
    for c in ["simulate", "verify"] {
        let code = cli(c, &cfg, &out, &["--streams", &streams]);
        ensure(code == 0, || format!("{c}: exit {code}"))?;
    }
    let m = json(&out.join("manifest.json"));
    let rate = m["censored_n"].as_f64().unwrap() / m["n_samples"].as_f64().unwrap();
    let v = json(&out.join("verify.json"));
    let f = &v["finiteness"];
    let verdict = f["verdict"].as_str().unwrap_or("missing").to_string();
    let top1 = f["top1_share_last"].as_f64().unwrap_or(f64::NAN);
    ensure(verdict == "stable" && top1 < 0.5 && rate < 1e-4, || {
        format!("verdict {verdict}, top1 {top1}, censoring {rate}")
    })?;
    let pts: Vec<String> = f["points"].as_array().unwrap().iter().map(|p| format!("{:.5}", p.as_f64().unwrap())).collect();
    Ok(format!("stable over n=1e4..6.4e5 [{}], top1 {top1:.2e}, censoring {rate}", pts.join(", ")))
}

fn c10_reproducibility() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("g2.toml");
    fs::write(
        &cfg,
        G2_WEIBULL
            .replace("n_samples = 640000", "n_samples = 20000")
            .replace("dominance_n = 1000000", "dominance_n = 100000")
            .replace("prop3_n = 100000", "prop3_n = 20000")
            .replace("prefixes = [10000, 40000, 160000, 640000]", "prefixes = [2500, 5000, 10000, 20000]"),
    )
    .unwrap();
    let runs = [("a", "1", "csv"), ("b", "8", "csv"), ("c", "3", "json"), ("d", "5", "json")];
    for (name, streams, fmt) in runs {
        let out = dir.path().join(name);
        for c in ["check", "construct", "simulate", "estimate", "verify"] {
            let code = cli(c, &cfg, &out, &["--streams", streams, "--format", fmt]);
            ensure(code == 0, || format!("{c} in run {name}: exit {code}"))?;
        }
    }
    let mut compared = 0;
    for (x, y) in [("a", "b"), ("c", "d")] {
        let mut names: Vec<_> = fs::read_dir(dir.path().join(x)).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        for n in names {
            let (p, q) = (fs::read(dir.path().join(x).join(&n)).unwrap(), fs::read(dir.path().join(y).join(&n)));
            ensure(q.as_ref().is_ok_and(|q| *q == p), || format!("{n:?} differs between runs {x} and {y}"))?;
            compared += 1;
        }
    }
    Ok(format!("{compared} files byte-identical across worker counts and reruns"))
}

fn main() {
    let chains = chains();
    let criteria: Vec<Criterion> = vec![
        ("condition certification", Box::new(c1_certification)),
        ("majorant closed form", Box::new(|| c2_majorant(&chains))),
        ("splice mean control", Box::new(|| c3_splice_mean(&chains))),
        ("strong subexponential diagnostic", Box::new(c4_sstar)),
        ("dominance coupling", Box::new(|| c5_dominance(&chains))),
        ("ladder epoch oracle", Box::new(c6_bernoulli)),
        ("lindley equivalence", Box::new(c7_lindley)),
        ("maximum tail ratio", Box::new(c8_prop3)),
        ("functional stability", Box::new(c9_stability)),
        ("reproducibility", Box::new(c10_reproducibility)),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or(e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match res {
            Ok(note) => println!("PASS [{}] {name}: {note}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL [{}] {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
