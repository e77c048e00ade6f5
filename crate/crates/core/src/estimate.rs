//! Monte Carlo moment estimates and the consistency suites.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dist::{ConstructionChain, TailSpec};
use crate::growth::{Growth, GrowthFunction};
use crate::rng::UniformStream;
use crate::walk::{CompensatedSum, LadderSample, ShiftedSample};

/// Capacity of the largest-values sketch kept by [`MomentSummary`].
pub const TOP_CAPACITY: usize = 65_536;
const Z95: f64 = 1.96;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimateError {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("no samples")]
    Empty,
    #[error("need at least {need} estimates, got {got}")]
    TooFewPoints { need: usize, got: usize },
}

fn invalid(msg: String) -> EstimateError {
    EstimateError::InvalidParam(msg)
}

/// Which functional of `tau` is estimated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "estimand", content = "params", rename_all = "snake_case")]
pub enum Estimand {
    /// `exp((1 - eps) g((a - delta) tau))`.
    GMoment { growth: String, eps: f64, delta: f64, a: f64 },
    /// `tau^alpha`.
    Power { alpha: f64 },
    /// `exp(c tau)`.
    Exp { c: f64 },
}

#[derive(Clone, Debug)]
pub struct Functional {
    pub estimand: Estimand,
    g: Option<GrowthFunction>,
}

impl Functional {
    pub fn g_moment(g: &GrowthFunction, eps: f64, delta: f64, a: f64) -> Result<Self, EstimateError> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(invalid(format!("eps = {eps} must lie in (0, 1)")));
        }
        if !(delta > 0.0 && delta < a) {
            return Err(invalid(format!("delta = {delta} must lie in (0, a = {a})")));
        }
        Ok(Self::g_moment_unchecked(g, eps, delta, a))
    }

    /// Same functional without the parameter ranges, for probes outside the
    /// theorem (for example `eps < 0`).
    pub fn g_moment_probe(g: &GrowthFunction, eps: f64, delta: f64, a: f64) -> Result<Self, EstimateError> {
        if !(eps < 1.0 && delta >= 0.0 && delta < a) {
            return Err(invalid(format!("probe needs eps < 1 and 0 <= delta < a (eps = {eps}, delta = {delta})")));
        }
        Ok(Self::g_moment_unchecked(g, eps, delta, a))
    }

    fn g_moment_unchecked(g: &GrowthFunction, eps: f64, delta: f64, a: f64) -> Self {
        Self {
            estimand: Estimand::GMoment { growth: g.tag(), eps, delta, a },
            g: Some(g.clone()),
        }
    }

    pub fn power(alpha: f64) -> Result<Self, EstimateError> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(invalid(format!("alpha = {alpha} must be positive")));
        }
        Ok(Self { estimand: Estimand::Power { alpha }, g: None })
    }

    pub fn exp(c: f64) -> Result<Self, EstimateError> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(invalid(format!("c = {c} must be positive")));
        }
        Ok(Self { estimand: Estimand::Exp { c }, g: None })
    }

    #[inline]
    pub fn eval(&self, tau: u64) -> f64 {
        let t = tau as f64;
        match &self.estimand {
            Estimand::GMoment { eps, delta, a, .. } => {
                let g = self.g.as_ref().expect("g-moment carries its growth function");
                ((1.0 - eps) * g.eval((a - delta) * t)).exp()
            }
            Estimand::Power { alpha } => {
                if *alpha == 1.0 { t } else { t.powf(*alpha) }
            }
            Estimand::Exp { c } => (c * t).exp(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Stable,
    Heavy,
    CensoredDominated,
}

/// Mergeable running summary of functional values.
#[derive(Clone, Debug, Default)]
pub struct MomentSummary {
    n: u64,
    mean: f64,
    m2: f64,
    total: CompensatedSum,
    censored_n: u64,
    censored_total: CompensatedSum,
    top: Vec<f64>,
}

impl MomentSummary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, value: f64, censored: bool) {
        self.n += 1;
        let d = value - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (value - self.mean);
        self.total.add(value);
        if censored {
            self.censored_n += 1;
            self.censored_total.add(value);
        }
        self.top.push(value);
        if self.top.len() >= 2 * TOP_CAPACITY {
            self.prune();
        }
    }

    fn prune(&mut self) {
        if self.top.len() > TOP_CAPACITY {
            self.top.select_nth_unstable_by(TOP_CAPACITY - 1, |a, b| b.total_cmp(a));
            self.top.truncate(TOP_CAPACITY);
        }
    }

    /// Combines summaries of disjoint sample sets.
    pub fn merge(mut self, other: Self) -> Self {
        if other.n == 0 {
            return self;
        }
        if self.n == 0 {
            return other;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        let mean = self.mean + d * (other.n as f64 / n as f64);
        let m2 = self.m2 + other.m2 + d * d * (self.n as f64 * other.n as f64 / n as f64);
        self.n = n;
        self.mean = mean;
        self.m2 = m2;
        self.total.add(other.total.value());
        self.censored_n += other.censored_n;
        self.censored_total.add(other.censored_total.value());
        self.top.extend(other.top);
        self.prune();
        self
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Fraction of the total carried by the largest `ceil(n/100)` values.
    pub fn top1_share(&self) -> f64 {
        let total = self.total.value();
        if self.n == 0 || !(total > 0.0) {
            return 0.0;
        }
        let k = (self.n as usize).div_ceil(100);
        let mut top = self.top.clone();
        top.sort_by(|a, b| b.total_cmp(a));
        let s: f64 = top.iter().take(k).sum();
        (s / total).clamp(0.0, 1.0)
    }

    pub fn finish(&self, estimand: Estimand) -> MomentEstimate {
        let n = self.n;
        let top1_share = self.top1_share();
        let censored_contribution = if n > 0 { self.censored_total.value() / n as f64 } else { 0.0 };
        if n == 0 || self.censored_n == n {
            return MomentEstimate {
                estimand,
                n,
                point: None,
                std_error: None,
                ci95: None,
                top1_share,
                censored_n: self.censored_n,
                censored_contribution,
                verdict: Verdict::CensoredDominated,
            };
        }
        let point = self.mean;
        let var = if n > 1 { self.m2 / (n - 1) as f64 } else { 0.0 };
        let se = (var.max(0.0) / n as f64).sqrt();
        let verdict = if censored_contribution > 0.01 * point.abs() {
            Verdict::CensoredDominated
        } else if top1_share > 0.5 {
            Verdict::Heavy
        } else {
            Verdict::Stable
        };
        MomentEstimate {
            estimand,
            n,
            point: Some(point),
            std_error: Some(se),
            ci95: Some([point - Z95 * se, point + Z95 * se]),
            top1_share,
            censored_n: self.censored_n,
            censored_contribution,
            verdict,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    #[serde(flatten)]
    pub estimand: Estimand,
    pub n: u64,
    pub point: Option<f64>,
    pub std_error: Option<f64>,
    pub ci95: Option<[f64; 2]>,
    pub top1_share: f64,
    pub censored_n: u64,
    /// Mean contribution of censored samples, each valued at the cap; a
    /// lower bound for what they would contribute uncensored.
    pub censored_contribution: f64,
    pub verdict: Verdict,
}

pub fn summarize(samples: &[LadderSample], f: &Functional) -> MomentSummary {
    let mut s = MomentSummary::new();
    for x in samples {
        s.push(f.eval(x.tau), x.censored);
    }
    s
}

pub fn estimate(samples: &[LadderSample], f: &Functional) -> Result<MomentEstimate, EstimateError> {
    if samples.is_empty() {
        return Err(EstimateError::Empty);
    }
    Ok(summarize(samples, f).finish(f.estimand.clone()))
}

pub fn estimate_g_moment(
    samples: &[LadderSample],
    g: &GrowthFunction,
    eps: f64,
    delta: f64,
    a: f64,
) -> Result<MomentEstimate, EstimateError> {
    estimate(samples, &Functional::g_moment(g, eps, delta, a)?)
}

pub fn estimate_power_moment(samples: &[LadderSample], alpha: f64) -> Result<MomentEstimate, EstimateError> {
    estimate(samples, &Functional::power(alpha)?)
}

pub fn estimate_exp_moment(samples: &[LadderSample], c: f64) -> Result<MomentEstimate, EstimateError> {
    estimate(samples, &Functional::exp(c)?)
}

/// Estimates on the prefixes `samples[..n]` for each `n` in `ns`.
pub fn stability_curve(
    samples: &[LadderSample],
    f: &Functional,
    ns: &[usize],
) -> Result<Vec<MomentEstimate>, EstimateError> {
    ns.iter()
        .map(|&n| {
            if n > samples.len() {
                Err(invalid(format!("prefix {n} exceeds {} samples", samples.len())))
            } else {
                estimate(&samples[..n], f)
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinitenessReport {
    /// Always true: stability of a Monte Carlo sequence neither proves nor
    /// disproves finiteness.
    pub heuristic: bool,
    pub verdict: Verdict,
    pub ns: Vec<u64>,
    pub points: Vec<Option<f64>>,
    /// Largest jump between consecutive points of the last two doublings,
    /// in combined standard errors.
    pub max_jump_se: f64,
    pub top1_share_last: f64,
}

pub fn finiteness_diagnostic(estimates: &[MomentEstimate]) -> Result<FinitenessReport, EstimateError> {
    if estimates.len() < 4 {
        return Err(EstimateError::TooFewPoints { need: 4, got: estimates.len() });
    }
    let k = estimates.len();
    let mut max_jump = 0.0f64;
    let mut stable = true;
    for w in estimates[k - 3..].windows(2) {
        match (w[0].point, w[1].point, w[0].std_error, w[1].std_error) {
            (Some(p0), Some(p1), Some(s0), Some(s1)) => {
                let se = (s0 * s0 + s1 * s1).sqrt();
                let jump = (p1 - p0).abs();
                if se > 0.0 {
                    max_jump = max_jump.max(jump / se);
                    stable &= jump < 3.0 * se;
                } else {
                    let same = jump <= 1e-12 * p0.abs().max(p1.abs());
                    stable &= same;
                    if !same {
                        max_jump = f64::INFINITY;
                    }
                }
            }
            _ => {
                stable = false;
                max_jump = f64::INFINITY;
            }
        }
    }
    let last = &estimates[k - 1];
    stable &= last.top1_share < 0.5 && last.verdict != Verdict::CensoredDominated;
    Ok(FinitenessReport {
        heuristic: true,
        verdict: if stable { Verdict::Stable } else { Verdict::Heavy },
        ns: estimates.iter().map(|e| e.n).collect(),
        points: estimates.iter().map(|e| e.point).collect(),
        max_jump_se: max_jump,
        top1_share_last: last.top1_share,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominanceWitness {
    pub u: f64,
    pub xi: f64,
    pub xi_tilde: f64,
    pub xi_hat: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominanceReport {
    pub n: u64,
    pub seed: u64,
    pub violations: u64,
    pub first: Option<DominanceWitness>,
    pub passed: bool,
}

/// Checks `q_xi(u) <= q_tilde(u) <= q_hat(u)` on `n` shared uniforms.
pub fn dominance_suite(chain: &ConstructionChain, n: u64, seed: u64) -> DominanceReport {
    const CHUNK: u64 = 1 << 16;
    let chunks = n.div_ceil(CHUNK);
    let (base, tilde, hat) = (&chain.base, chain.tilde(), &chain.hat);
    let found: Vec<(u64, Option<DominanceWitness>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let end = (start + CHUNK).min(n);
            let mut src = UniformStream::at(seed, 0, start);
            let mut count = 0;
            let mut first = None;
            for _ in start..end {
                let q = src.next_open01();
                let w = DominanceWitness {
                    u: 1.0 - q,
                    xi: base.quantile_upper(q),
                    xi_tilde: tilde.quantile_upper(q),
                    xi_hat: hat.quantile_upper(q),
                };
                if !(w.xi <= w.xi_tilde && w.xi_tilde <= w.xi_hat) {
                    count += 1;
                    first.get_or_insert(w);
                }
            }
            (count, first)
        })
        .collect();
    let violations = found.iter().map(|f| f.0).sum();
    let first = found.iter().find_map(|f| f.1);
    DominanceReport { n, seed, violations, first, passed: violations == 0 }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaldReport {
    pub n: u64,
    pub censored_excluded: u64,
    pub mean_s_tau: f64,
    pub mean_tau: f64,
    pub mean_increment: f64,
    /// `mean(S_tau) - E xi mean(tau)`.
    pub diff: f64,
    pub std_error: f64,
    pub passed: bool,
}

/// Wald's identity `E S_tau = E xi E tau`, tested on the paired differences
/// `S_tau - E xi tau` of uncensored samples.
pub fn wald_check(samples: &[LadderSample], mean_increment: f64) -> Result<WaldReport, EstimateError> {
    let mut d = MomentSummary::new();
    let mut s = CompensatedSum::default();
    let mut t = CompensatedSum::default();
    let mut excluded = 0;
    for x in samples {
        if x.censored {
            excluded += 1;
            continue;
        }
        d.push(x.s_tau - mean_increment * x.tau as f64, false);
        s.add(x.s_tau);
        t.add(x.tau as f64);
    }
    let n = d.n();
    if n == 0 {
        return Err(EstimateError::Empty);
    }
    let var = if n > 1 { d.m2 / (n - 1) as f64 } else { 0.0 };
    let se = (var / n as f64).sqrt();
    let diff = d.mean;
    let passed = if se > 0.0 { diff.abs() <= 4.0 * se } else { diff.abs() <= 1e-12 };
    Ok(WaldReport {
        n,
        censored_excluded: excluded,
        mean_s_tau: s.value() / n as f64,
        mean_tau: t.value() / n as f64,
        mean_increment,
        diff,
        std_error: se,
        passed,
    })
}

/// Streaming exceedance counts of `M_tau` over a grid.
#[derive(Clone, Debug, Default)]
pub struct Prop3Tally {
    grid: Vec<f64>,
    exceed: Vec<u64>,
    tau: MomentSummary,
}

impl Prop3Tally {
    pub fn new(grid: &[f64]) -> Self {
        let mut grid = grid.to_vec();
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        let exceed = vec![0; grid.len()];
        Self { grid, exceed, tau: MomentSummary::new() }
    }

    pub fn add(&mut self, s: &ShiftedSample) {
        self.tau.push(s.sample.tau as f64, s.sample.censored);
        let k = self.grid.partition_point(|&x| x < s.psi_max);
        for e in &mut self.exceed[..k] {
            *e += 1;
        }
    }

    pub fn merge(mut self, other: Self) -> Self {
        if other.tau.n() == 0 {
            return self;
        }
        if self.tau.n() == 0 {
            return other;
        }
        for (a, b) in self.exceed.iter_mut().zip(&other.exceed) {
            *a += b;
        }
        self.tau = self.tau.merge(other.tau);
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prop3Row {
    pub x: f64,
    pub exceedances: u64,
    pub p_hat: f64,
    pub tail_psi: f64,
    pub ratio: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub resolvable: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prop3Report {
    pub n: u64,
    pub censored_n: u64,
    pub mean_tau: f64,
    pub mean_tau_se: f64,
    pub delta_tol: f64,
    pub rows: Vec<Prop3Row>,
    /// Largest grid point with at least 30 exceedances.
    pub resolvable_x: Option<f64>,
    /// Mean `tau` inside the ratio CI at `resolvable_x`.
    pub contains_mean_tau: bool,
    /// `|ratio / mean_tau - 1| <= delta_tol` at `resolvable_x`.
    pub within_delta_tol: bool,
    pub passed: bool,
}

fn wilson(k: u64, n: u64) -> (f64, f64) {
    let (k, n) = (k as f64, n as f64);
    let p = k / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

pub fn prop3_report(tally: &Prop3Tally, f_psi: &TailSpec, delta_tol: f64) -> Prop3Report {
    let n = tally.tau.n();
    let est = tally.tau.finish(Estimand::Power { alpha: 1.0 });
    let mean_tau = est.point.unwrap_or(f64::NAN);
    let rows: Vec<Prop3Row> = tally
        .grid
        .iter()
        .zip(&tally.exceed)
        .map(|(&x, &k)| {
            let tail_psi = f_psi.tail(x);
            let (lo, hi) = if n > 0 { wilson(k, n) } else { (0.0, 1.0) };
            let p_hat = if n > 0 { k as f64 / n as f64 } else { f64::NAN };
            Prop3Row {
                x,
                exceedances: k,
                p_hat,
                tail_psi,
                ratio: p_hat / tail_psi,
                ci_lo: lo / tail_psi,
                ci_hi: hi / tail_psi,
                resolvable: k >= 30 && tail_psi > 0.0,
            }
        })
        .collect();
    let last = rows.iter().rev().find(|r| r.resolvable).copied();
    let contains = last.is_some_and(|r| r.ci_lo <= mean_tau && mean_tau <= r.ci_hi);
    let within = last.is_some_and(|r| (r.ratio / mean_tau - 1.0).abs() <= delta_tol);
    Prop3Report {
        n,
        censored_n: est.censored_n,
        mean_tau,
        mean_tau_se: est.std_error.unwrap_or(f64::NAN),
        delta_tol,
        rows,
        resolvable_x: last.map(|r| r.x),
        contains_mean_tau: contains,
        within_delta_tol: within,
        passed: contains,
    }
}

pub fn prop3_ratio_check(
    samples: &[ShiftedSample],
    f_psi: &TailSpec,
    x_grid: &[f64],
    delta_tol: f64,
) -> Prop3Report {
    let mut t = Prop3Tally::new(x_grid);
    for s in samples {
        t.add(s);
    }
    prop3_report(&t, f_psi, delta_tol)
}
