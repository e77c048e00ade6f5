//! Growth functions `g` and numeric certification of the growth conditions.
//!
//! A growth function qualifies when it is positive, increasing and
//! differentiable (C1), its derivative decays to zero (C2), and for some
//! `gamma` in (0, 1) both `exp(-(1-gamma) g)` is integrable on `[1, inf)` and
//! `g(x) - g(x-y) <= gamma g(y) + A` for `x0 < y <= x/2` (C3).
//!
//! All verdicts are finite-range: they certify the conditions on explicit
//! grids up to [`X_MAX`] and say nothing beyond.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quad::{integrate_to_infinity, Convergence, TailOptions};

/// Upper end of every certification grid.
pub const X_MAX: f64 = 1e8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GrowthError {
    #[error("{family}: parameter {param} outside {range}")]
    ParamOutOfRange {
        family: String,
        param: f64,
        range: &'static str,
    },
    #[error("unknown growth family `{0}`")]
    UnknownFamily(String),
    #[error("invalid table: {0}")]
    BadTable(String),
    #[error("growth function is not finite at x = {x}")]
    NonFinite { x: f64 },
    #[error("gamma = {0} must lie in (0, 1)")]
    BadGamma(f64),
    #[error("grid must be strictly increasing with at least two points")]
    BadGrid,
}

/// A candidate growth function.
pub trait Growth: Send + Sync {
    fn eval(&self, x: f64) -> f64;

    fn deriv(&self, x: f64) -> f64 {
        central_difference(self, x)
    }

    /// Generalised inverse `inf { x : g(x) > t }`.
    fn inverse(&self, t: f64) -> f64 {
        bisect_inverse(self, t)
    }

    fn tag(&self) -> String;
}

/// Step used for finite differences at `x`.
pub fn fd_step(x: f64) -> f64 {
    1e-5 * x.abs().max(1e-3)
}

pub fn central_difference<G: Growth + ?Sized>(g: &G, x: f64) -> f64 {
    let h = fd_step(x);
    let (xp, xm) = (x + h, x - h);
    (g.eval(xp) - g.eval(xm)) / (xp - xm)
}

/// Bisection for `inf { x : g(x) > t }` on a non-decreasing `g`, with the
/// bracket grown geometrically in both directions.
pub fn bisect_inverse<G: Growth + ?Sized>(g: &G, t: f64) -> f64 {
    let mut hi = 1.0;
    while g.eval(hi) <= t {
        hi *= 2.0;
        if hi > 1e300 {
            return f64::INFINITY;
        }
    }
    let mut lo = if hi > 1.0 { hi / 2.0 } else { 0.0 };
    if g.eval(lo) > t {
        let mut step = 1.0;
        loop {
            hi = lo;
            lo -= step;
            step *= 2.0;
            if g.eval(lo) <= t {
                break;
            }
            if lo < -1e300 {
                return f64::NEG_INFINITY;
            }
        }
    }
    bisect_between(|x| g.eval(x) > t, lo, hi)
}

/// Shrinks `[lo, hi]` (with `pred(lo)` false and `pred(hi)` true) until its
/// width is 1e-12 or floating point stalls; returns the upper end.
pub(crate) fn bisect_between<P: Fn(f64) -> bool>(pred: P, mut lo: f64, mut hi: f64) -> f64 {
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Builtin growth families plus tabulated functions.
///
/// `g1(x) = (ln max(x,1))^alpha`, `g2(x) = (x^+)^beta`,
/// `g3(x) = (x^+)^beta ln max(x,1)`. `linear` is `lambda x^+` and exists only
/// as a negative control: it violates the derivative-decay condition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum GrowthFunction {
    G1 { param: f64 },
    G2 { param: f64 },
    G3 { param: f64 },
    Linear { param: f64 },
    Table { points: Vec<[f64; 2]> },
}

impl GrowthFunction {
    pub fn builtin(family: &str, param: f64) -> Result<Self, GrowthError> {
        let g = match family {
            "g1" => GrowthFunction::G1 { param },
            "g2" => GrowthFunction::G2 { param },
            "g3" => GrowthFunction::G3 { param },
            "linear" => GrowthFunction::Linear { param },
            other => return Err(GrowthError::UnknownFamily(other.to_string())),
        };
        g.validated()
    }

    pub fn table(points: Vec<[f64; 2]>) -> Result<Self, GrowthError> {
        GrowthFunction::Table { points }.validated()
    }

    /// Checks parameter ranges; deserialized values must pass through here.
    pub fn validated(self) -> Result<Self, GrowthError> {
        let range_err = |family: &str, param: f64, range| GrowthError::ParamOutOfRange {
            family: family.to_string(),
            param,
            range,
        };
        match &self {
            GrowthFunction::G1 { param } => {
                if !(param.is_finite() && *param > 1.0) {
                    return Err(range_err("g1", *param, "(1, inf)"));
                }
            }
            GrowthFunction::G2 { param } | GrowthFunction::G3 { param } => {
                if !(*param > 0.0 && *param < 1.0) {
                    let fam = if matches!(self, GrowthFunction::G2 { .. }) { "g2" } else { "g3" };
                    return Err(range_err(fam, *param, "(0, 1)"));
                }
            }
            GrowthFunction::Linear { param } => {
                if !(param.is_finite() && *param > 0.0) {
                    return Err(range_err("linear", *param, "(0, inf)"));
                }
            }
            GrowthFunction::Table { points } => {
                if points.len() < 2 {
                    return Err(GrowthError::BadTable("need at least two points".into()));
                }
                if points.iter().flatten().any(|v| !v.is_finite()) {
                    return Err(GrowthError::BadTable("non-finite entry".into()));
                }
                if points.windows(2).any(|w| w[1][0] <= w[0][0]) {
                    return Err(GrowthError::BadTable(
                        "x values must be strictly increasing".into(),
                    ));
                }
            }
        }
        Ok(self)
    }

    pub fn params(&self) -> Vec<f64> {
        match self {
            GrowthFunction::G1 { param }
            | GrowthFunction::G2 { param }
            | GrowthFunction::G3 { param }
            | GrowthFunction::Linear { param } => vec![*param],
            GrowthFunction::Table { points } => points.iter().flatten().copied().collect(),
        }
    }

    fn table_eval(points: &[[f64; 2]], x: f64) -> f64 {
        let first = points[0];
        if x <= first[0] {
            return first[1];
        }
        let idx = points.partition_point(|p| p[0] <= x);
        let (p, q) = if idx >= points.len() {
            (points[points.len() - 2], points[points.len() - 1])
        } else {
            (points[idx - 1], points[idx])
        };
        let slope = (q[1] - p[1]) / (q[0] - p[0]);
        p[1] + slope * (x - p[0])
    }
}

impl Growth for GrowthFunction {
    fn eval(&self, x: f64) -> f64 {
        match self {
            GrowthFunction::G1 { param } => {
                if x > 1.0 {
                    x.ln().powf(*param)
                } else {
                    0.0
                }
            }
            GrowthFunction::G2 { param } => {
                if x > 0.0 {
                    x.powf(*param)
                } else {
                    0.0
                }
            }
            GrowthFunction::G3 { param } => {
                if x > 1.0 {
                    x.powf(*param) * x.ln()
                } else {
                    0.0
                }
            }
            GrowthFunction::Linear { param } => param * x.max(0.0),
            GrowthFunction::Table { points } => Self::table_eval(points, x),
        }
    }

    fn deriv(&self, x: f64) -> f64 {
        match self {
            GrowthFunction::G1 { param } => {
                if x > 1.0 {
                    param * x.ln().powf(param - 1.0) / x
                } else {
                    0.0
                }
            }
            GrowthFunction::G2 { param } => {
                if x > 0.0 {
                    param * x.powf(param - 1.0)
                } else {
                    0.0
                }
            }
            GrowthFunction::G3 { param } => {
                if x > 1.0 {
                    x.powf(param - 1.0) * (param * x.ln() + 1.0)
                } else {
                    0.0
                }
            }
            GrowthFunction::Linear { param } => {
                if x > 0.0 {
                    *param
                } else {
                    0.0
                }
            }
            // tabulated functions only have numeric derivatives
            GrowthFunction::Table { .. } => central_difference(self, x),
        }
    }

    fn inverse(&self, t: f64) -> f64 {
        match self {
            GrowthFunction::G1 { param } => {
                if t < 0.0 {
                    f64::NEG_INFINITY
                } else {
                    t.powf(1.0 / param).exp()
                }
            }
            GrowthFunction::G2 { param } => {
                if t < 0.0 {
                    f64::NEG_INFINITY
                } else {
                    t.powf(1.0 / param)
                }
            }
            GrowthFunction::G3 { .. } => {
                if t < 0.0 {
                    f64::NEG_INFINITY
                } else if t == 0.0 {
                    1.0
                } else {
                    let mut hi = 2.0;
                    while self.eval(hi) <= t {
                        hi *= 2.0;
                    }
                    bisect_between(|x| self.eval(x) > t, hi / 2.0, hi)
                }
            }
            GrowthFunction::Linear { param } => {
                if t < 0.0 {
                    f64::NEG_INFINITY
                } else {
                    t / param
                }
            }
            GrowthFunction::Table { .. } => bisect_inverse(self, t),
        }
    }

    fn tag(&self) -> String {
        match self {
            GrowthFunction::G1 { param } => format!("g1(alpha={param})"),
            GrowthFunction::G2 { param } => format!("g2(beta={param})"),
            GrowthFunction::G3 { param } => format!("g3(beta={param})"),
            GrowthFunction::Linear { param } => format!("linear(lambda={param})"),
            GrowthFunction::Table { points } => format!("table({} points)", points.len()),
        }
    }
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// Default verification grid: 2001 log-spaced points over `[1e-3, 1e6]`.
pub fn default_grid() -> Vec<f64> {
    log_grid(1e-3, 1e6, 2001)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    Positivity,
    Monotonicity,
    Derivative,
    DerivativeDecay,
    Integral,
    Increment,
}

/// A point (or point pair) where a condition fails, with the size of the failure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub kind: WitnessKind,
    pub x: f64,
    pub y: f64,
    pub residual: f64,
}

const MAX_WITNESSES: usize = 16;

fn check_grid(grid: &[f64]) -> Result<(), GrowthError> {
    if grid.len() < 2 || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(GrowthError::BadGrid);
    }
    Ok(())
}

fn eval_finite<G: Growth + ?Sized>(g: &G, x: f64) -> Result<f64, GrowthError> {
    let v = g.eval(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(GrowthError::NonFinite { x })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub ok: bool,
    pub witnesses: Vec<Witness>,
}

/// Positivity, monotonicity and derivative consistency on `grid`.
///
/// A flat-zero prefix (as for `g1`, `g3` below 1) is accepted; once `g`
/// becomes positive it must stay positive and increase strictly.
pub fn check_c1<G: Growth + ?Sized>(g: &G, grid: &[f64]) -> Result<Verdict, GrowthError> {
    check_grid(grid)?;
    let values = grid
        .iter()
        .map(|&x| eval_finite(g, x))
        .collect::<Result<Vec<_>, _>>()?;
    let mut witnesses = Vec::new();
    let mut push = |w: Witness| {
        if witnesses.len() < MAX_WITNESSES {
            witnesses.push(w);
        }
    };
    let mut ok = true;

    let mut positive_seen = false;
    for (&x, &v) in grid.iter().zip(&values) {
        if v < 0.0 || (positive_seen && v <= 0.0) {
            ok = false;
            push(Witness { kind: WitnessKind::Positivity, x, y: x, residual: v });
        }
        positive_seen |= v > 0.0;
    }
    if !(values[values.len() - 1] > 0.0) {
        ok = false;
        let x = grid[grid.len() - 1];
        push(Witness { kind: WitnessKind::Positivity, x, y: x, residual: values[values.len() - 1] });
    }

    for i in 0..grid.len() - 1 {
        let step = values[i + 1] - values[i];
        let strict = values[i] > 0.0;
        if step < 0.0 || (strict && step <= 0.0) {
            ok = false;
            push(Witness { kind: WitnessKind::Monotonicity, x: grid[i], y: grid[i + 1], residual: step });
        }
    }

    for &x in grid {
        let d = g.deriv(x);
        let fd = central_difference(g, x);
        if !d.is_finite() {
            return Err(GrowthError::NonFinite { x });
        }
        if (d - fd).abs() > 1e-5 * d.abs().max(fd.abs()) + 1e-12 {
            ok = false;
            push(Witness { kind: WitnessKind::Derivative, x, y: fd, residual: d - fd });
        }
    }

    Ok(Verdict { ok, witnesses })
}

/// Maximum of `g'` over one decade of the grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecadeMax {
    pub lo: f64,
    pub hi: f64,
    pub max_deriv: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct C2Verdict {
    pub ok: bool,
    pub x0: f64,
    pub b: f64,
    pub decades: Vec<DecadeMax>,
    pub witnesses: Vec<Witness>,
}

/// Derivative decay.
///
/// Passes when the per-decade maxima of `g'` end in a strictly decreasing run
/// spanning at least three decades that at least halves. `x0` is the first
/// grid point `>= 1` where `g'` attains its maximum over `[1, grid end]`, and
/// `b` is twice that maximum.
pub fn check_c2<G: Growth + ?Sized>(g: &G, grid: &[f64]) -> Result<C2Verdict, GrowthError> {
    check_grid(grid)?;
    let derivs = grid
        .iter()
        .map(|&x| {
            let d = g.deriv(x);
            if d.is_finite() {
                Ok(d)
            } else {
                Err(GrowthError::NonFinite { x })
            }
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut decades: Vec<DecadeMax> = Vec::new();
    let mut current: Option<(i64, DecadeMax)> = None;
    for (&x, &d) in grid.iter().zip(&derivs) {
        let k = (x.log10() + 1e-12).floor() as i64;
        match current.as_mut() {
            Some((kk, dm)) if *kk == k => {
                dm.hi = x;
                dm.max_deriv = dm.max_deriv.max(d);
            }
            _ => {
                if let Some((_, dm)) = current.take() {
                    decades.push(dm);
                }
                current = Some((k, DecadeMax { lo: x, hi: x, max_deriv: d }));
            }
        }
    }
    if let Some((_, dm)) = current {
        decades.push(dm);
    }

    let n = decades.len();
    let mut start = n - 1;
    while start > 0 && decades[start - 1].max_deriv > decades[start].max_deriv {
        start -= 1;
    }
    let run_len = n - start;
    let last = decades[n - 1].max_deriv;
    let ok = run_len >= 3 && last >= 0.0 && 2.0 * last <= decades[start].max_deriv;

    let mut x0 = grid[grid.len() - 1];
    let mut best = f64::NEG_INFINITY;
    for (&x, &d) in grid.iter().zip(&derivs) {
        if x >= 1.0 && d > best {
            best = d;
            x0 = x;
        }
    }
    let b = 2.0 * best.max(0.0);

    let witnesses = if ok {
        Vec::new()
    } else {
        decades
            .iter()
            .rev()
            .take(3)
            .map(|dm| Witness {
                kind: WitnessKind::DerivativeDecay,
                x: dm.lo,
                y: dm.hi,
                residual: dm.max_deriv,
            })
            .collect()
    };
    Ok(C2Verdict { ok: ok && b > 0.0, x0, b, decades, witnesses })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct C3Integral {
    pub ok: bool,
    pub status: Convergence,
    pub value: f64,
    pub upper: f64,
}

/// Integrability of `exp(-(1-gamma) g(x))` over `[1, inf)`.
pub fn check_c3_integral<G: Growth + ?Sized>(g: &G, gamma: f64) -> Result<C3Integral, GrowthError> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(GrowthError::BadGamma(gamma));
    }
    let r = integrate_to_infinity(
        |x| (-(1.0 - gamma) * g.eval(x)).exp(),
        1.0,
        &[],
        &TailOptions {
            rel_tol: 1e-10,
            x_limit: 1e12,
            ..Default::default()
        },
    );
    Ok(C3Integral {
        ok: r.status == Convergence::Converged,
        status: r.status,
        value: r.value,
        upper: r.upper,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct C3Increment {
    pub ok: bool,
    /// `max(A*, 0)`.
    pub a: f64,
    /// Supremum of `g(x) - g(x-y) - gamma g(y)` found on the grid and by local refinement.
    pub a_star: f64,
    /// Growth of the running maximum over the last decade of `x`.
    pub last_decade_increase: f64,
    pub x_max: f64,
    pub witnesses: Vec<Witness>,
}

const INC_NX: usize = 241;
const INC_NY: usize = 121;

/// Sublinear-increment inequality `g(x) - g(x-y) <= gamma g(y) + A` for
/// `x0 <= y <= x/2`, `x` in `[2 x0, X_MAX]`.
pub fn check_c3_increment<G: Growth + ?Sized>(
    g: &G,
    gamma: f64,
    x0: f64,
) -> Result<C3Increment, GrowthError> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(GrowthError::BadGamma(gamma));
    }
    let residual = |x: f64, y: f64| g.eval(x) - g.eval(x - y) - gamma * g.eval(y);
    // y = x0 (x / 2x0)^s sweeps [x0, x/2] as s goes 0 -> 1
    let u_lo = (2.0 * x0).ln();
    let u_hi = X_MAX.ln();
    let point = |u: f64, s: f64| {
        let x = u.exp();
        let y = if s >= 1.0 { 0.5 * x } else { x0 * (x / (2.0 * x0)).powf(s) };
        (x, y)
    };

    let xs = log_grid(2.0 * x0, X_MAX, INC_NX);
    let mut cells: Vec<(f64, f64, f64)> = Vec::with_capacity(INC_NX * INC_NY);
    let mut running = Vec::with_capacity(INC_NX);
    let mut best = f64::NEG_INFINITY;
    for &x in &xs {
        let u = x.ln();
        for j in 0..INC_NY {
            let s = j as f64 / (INC_NY - 1) as f64;
            let (xx, y) = point(u, s);
            let r = residual(xx, y);
            if !r.is_finite() {
                return Err(GrowthError::NonFinite { x: xx });
            }
            best = best.max(r);
            cells.push((u, s, r));
        }
        running.push(best);
    }

    let cut = xs.partition_point(|&x| x <= X_MAX / 10.0);
    let before = if cut == 0 { f64::NEG_INFINITY } else { running[cut - 1] };
    let increase = best - before;
    let ok = increase < 1e-6 * best.abs().max(1.0);

    cells.sort_by(|a, b| b.2.total_cmp(&a.2));
    let du = (u_hi - u_lo) / (INC_NX - 1) as f64;
    let ds = 1.0 / (INC_NY - 1) as f64;
    let objective = |u: f64, s: f64| {
        let (x, y) = point(u, s);
        residual(x, y)
    };
    let mut a_star = best;
    for &(u, s, r) in cells.iter().take(8) {
        let refined = compass_max(&objective, (u, s, r), (du, ds), (u_lo, u_hi));
        a_star = a_star.max(refined);
    }

    let witnesses = if ok {
        Vec::new()
    } else {
        cells
            .iter()
            .take(5)
            .map(|&(u, s, r)| {
                let (x, y) = point(u, s);
                Witness { kind: WitnessKind::Increment, x, y, residual: r }
            })
            .collect()
    };
    Ok(C3Increment {
        ok,
        a: a_star.max(0.0),
        a_star,
        last_decade_increase: increase,
        x_max: X_MAX,
        witnesses,
    })
}

/// Compass search for a local maximum on `[u_lo, u_hi] x [0, 1]`.
fn compass_max<F: Fn(f64, f64) -> f64>(
    f: &F,
    start: (f64, f64, f64),
    steps: (f64, f64),
    u_range: (f64, f64),
) -> f64 {
    let (mut u, mut s, mut best) = start;
    let (mut du, mut ds) = steps;
    for _ in 0..400 {
        if du < 1e-12 && ds < 1e-12 {
            break;
        }
        let mut moved = false;
        for (cu, cs) in [(u + du, s), (u - du, s), (u, s + ds), (u, s - ds)] {
            let cu = cu.clamp(u_range.0, u_range.1);
            let cs = cs.clamp(0.0, 1.0);
            let v = f(cu, cs);
            if v > best {
                best = v;
                u = cu;
                s = cs;
                moved = true;
                break;
            }
        }
        if !moved {
            du *= 0.5;
            ds *= 0.5;
        }
    }
    best
}

/// Outcome of certifying the growth conditions, with the fitted constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub growth: String,
    pub c1_ok: bool,
    pub c2_ok: bool,
    pub c3_integral_ok: bool,
    pub c3_increment_ok: bool,
    pub x0: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub gamma: f64,
    #[serde(rename = "A")]
    pub a: f64,
    pub integral_value: f64,
    pub integral_status: Convergence,
    /// Conditions are numerically verified up to this point only.
    pub x_max: f64,
    pub grid_lo: f64,
    pub grid_hi: f64,
    pub grid_points: usize,
    pub decade_derivative_maxima: Vec<DecadeMax>,
    pub witnesses: Vec<Witness>,
}

impl ConditionReport {
    pub fn all_ok(&self) -> bool {
        self.c1_ok && self.c2_ok && self.c3_integral_ok && self.c3_increment_ok
    }
}

/// The gamma candidates tried by [`certify`], smallest first.
pub fn gamma_candidates() -> impl Iterator<Item = f64> {
    (1..=19).map(|k| (k as f64 * 0.05 * 100.0).round() / 100.0)
}

/// Runs every check and fits `gamma` as the smallest candidate passing both
/// parts of (C3).
pub fn certify<G: Growth + ?Sized>(g: &G) -> Result<ConditionReport, GrowthError> {
    let grid = default_grid();
    let c1 = check_c1(g, &grid)?;
    let c2 = check_c2(g, &grid)?;

    let mut chosen = None;
    let mut fallback = None;
    for gamma in gamma_candidates() {
        let integral = check_c3_integral(g, gamma)?;
        let increment = check_c3_increment(g, gamma, c2.x0)?;
        if integral.ok && increment.ok {
            chosen = Some((gamma, integral, increment));
            break;
        }
        fallback = Some((gamma, integral, increment));
    }
    let (gamma, integral, increment) = chosen.or(fallback).expect("at least one gamma candidate");

    let mut witnesses = c1.witnesses.clone();
    witnesses.extend(c2.witnesses.iter().copied());
    if !integral.ok {
        witnesses.push(Witness {
            kind: WitnessKind::Integral,
            x: 1.0,
            y: integral.upper,
            residual: integral.value,
        });
    }
    witnesses.extend(increment.witnesses.iter().copied());

    Ok(ConditionReport {
        growth: g.tag(),
        c1_ok: c1.ok,
        c2_ok: c2.ok,
        c3_integral_ok: integral.ok,
        c3_increment_ok: increment.ok,
        x0: c2.x0,
        b: c2.b,
        gamma,
        a: increment.a,
        integral_value: integral.value,
        integral_status: integral.status,
        x_max: X_MAX,
        grid_lo: grid[0],
        grid_hi: grid[grid.len() - 1],
        grid_points: grid.len(),
        decade_derivative_maxima: c2.decades,
        witnesses,
    })
}
