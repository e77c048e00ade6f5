//! Ladder-epoch simulation and the Lindley recursion.
//!
//! Excursion `i` of a run reads uniforms from stream `(seed, i)`; one
//! uniform per increment (two for queue pairs). Partial sums use Neumaier
//! compensated summation so the stopping test `S_n <= 0` is not decided by
//! accumulated rounding on long excursions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dist::{DistError, TailSpec};
use crate::rng::UniformStream;

pub const DEFAULT_STEP_CAP: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WalkError {
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error("step cap must be at least 1")]
    BadCap,
    #[error("shifted increments have mean {0} >= 0")]
    NonNegativePsi(f64),
    #[error("uniform {0} outside (0, 1)")]
    BadUniform(f64),
    #[error("service mean {service} must be below interarrival mean {interarrival}")]
    Unstable { service: f64, interarrival: f64 },
    #[error("thread pool: {0}")]
    Pool(String),
}

/// Neumaier compensated sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Clone, Debug)]
pub struct WalkConfig {
    pub increments: TailSpec,
    pub seed: u64,
    pub stream_id: u64,
    pub step_cap: u64,
}

impl WalkConfig {
    pub fn new(increments: TailSpec, seed: u64, stream_id: u64, step_cap: u64) -> Result<Self, WalkError> {
        if step_cap < 1 {
            return Err(WalkError::BadCap);
        }
        increments.require_negative_mean()?;
        Ok(Self { increments, seed, stream_id, step_cap })
    }

    fn stream(&self) -> UniformStream {
        UniformStream::new(self.seed, self.stream_id)
    }
}

/// One excursion until the first non-positive partial sum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderSample {
    pub stream_id: u64,
    pub tau: u64,
    pub s_tau: f64,
    pub m_tau: f64,
    pub censored: bool,
    pub seed: u64,
}

/// A ladder excursion of `xi` together with the walk of `psi = xi + shift`
/// along the same increments.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftedSample {
    pub sample: LadderSample,
    pub shift: f64,
    /// `psi_1 + ... + psi_tau`.
    pub psi_sum: f64,
    /// `max_{0 <= j <= tau} psi_1 + ... + psi_j`.
    pub psi_max: f64,
}

/// `quantile(F, u)`.
pub fn sample_increment(f: &TailSpec, u: f64) -> Result<f64, WalkError> {
    f.quantile(u).map_err(|_| WalkError::BadUniform(u))
}

#[inline]
fn run(cfg: &WalkConfig, shift: f64) -> ShiftedSample {
    let mut src = cfg.stream();
    let mut s = CompensatedSum::default();
    let mut p = CompensatedSum::default();
    let mut m = 0.0f64;
    let mut pm = 0.0f64;
    let mut n = 0;
    while n < cfg.step_cap {
        n += 1;
        let xi = cfg.increments.sample(&mut src);
        s.add(xi);
        p.add(xi + shift);
        let sn = s.value();
        m = m.max(sn);
        pm = pm.max(p.value());
        if sn <= 0.0 {
            return ShiftedSample {
                sample: LadderSample {
                    stream_id: cfg.stream_id,
                    tau: n,
                    s_tau: sn,
                    m_tau: m,
                    censored: false,
                    seed: cfg.seed,
                },
                shift,
                psi_sum: p.value(),
                psi_max: pm,
            };
        }
    }
    ShiftedSample {
        sample: LadderSample {
            stream_id: cfg.stream_id,
            tau: n,
            s_tau: s.value(),
            m_tau: m,
            censored: true,
            seed: cfg.seed,
        },
        shift,
        psi_sum: p.value(),
        psi_max: pm,
    }
}

/// Simulates `tau = min{n >= 1 : S_n <= 0}`, censored at `step_cap`.
pub fn ladder_epoch(cfg: &WalkConfig) -> LadderSample {
    let mut src = cfg.stream();
    let mut s = CompensatedSum::default();
    let mut m = 0.0f64;
    let mut n = 0;
    while n < cfg.step_cap {
        n += 1;
        s.add(cfg.increments.sample(&mut src));
        let sn = s.value();
        m = m.max(sn);
        if sn <= 0.0 {
            return LadderSample {
                stream_id: cfg.stream_id,
                tau: n,
                s_tau: sn,
                m_tau: m,
                censored: false,
                seed: cfg.seed,
            };
        }
    }
    LadderSample {
        stream_id: cfg.stream_id,
        tau: n,
        s_tau: s.value(),
        m_tau: m,
        censored: true,
        seed: cfg.seed,
    }
}

/// Ladder excursion of the configured increments, also tracking the walk
/// of `psi = xi + shift`. Rejects shifts giving `E psi >= 0`.
pub fn ladder_epoch_shifted(cfg: &WalkConfig, shift: f64) -> Result<ShiftedSample, WalkError> {
    let mean_psi = cfg.increments.mean() + shift;
    if !(mean_psi < 0.0) {
        return Err(WalkError::NonNegativePsi(mean_psi));
    }
    Ok(run(cfg, shift))
}

/// One step of an audited path.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathStep {
    pub n: u64,
    pub xi: f64,
    pub s_n: f64,
}

/// Re-emits the full path of one excursion.
pub fn replay_path(cfg: &WalkConfig) -> Vec<PathStep> {
    let mut src = cfg.stream();
    let mut s = CompensatedSum::default();
    let mut out = Vec::new();
    for n in 1..=cfg.step_cap {
        let xi = cfg.increments.sample(&mut src);
        s.add(xi);
        out.push(PathStep { n, xi, s_n: s.value() });
        if s.value() <= 0.0 {
            break;
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BusyCycle {
    pub stream_id: u64,
    pub customers: u64,
    pub censored: bool,
}

/// Number of customers served in the first busy cycle of a single-server
/// queue: `W_1 = 0`, `W_{n+1} = max(0, W_n + sigma_n - t_n)`, stopped at the
/// first `n` with `W_{n+1} = 0`.
pub fn lindley_busy_cycle(
    sigma: &TailSpec,
    t: &TailSpec,
    seed: u64,
    stream_id: u64,
    cap: u64,
) -> Result<BusyCycle, WalkError> {
    let (ms, mt) = (sigma.mean(), t.mean());
    if !(ms < mt) {
        return Err(WalkError::Unstable { service: ms, interarrival: mt });
    }
    if cap < 1 {
        return Err(WalkError::BadCap);
    }
    let mut src = UniformStream::new(seed, stream_id);
    // the waiting time stays positive inside the cycle, so W_{n+1} is the
    // running sum of sigma_k - t_k
    let mut w = CompensatedSum::default();
    for n in 1..=cap {
        let s = sigma.sample(&mut src);
        let a = t.sample(&mut src);
        w.add(s - a);
        if w.value() <= 0.0 {
            return Ok(BusyCycle { stream_id, customers: n, censored: false });
        }
    }
    Ok(BusyCycle { stream_id, customers: cap, censored: true })
}

/// Runs `f` on a pool of `threads` workers, capped by `LADDERLAB_THREADS`.
pub fn with_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T, WalkError> {
    let cap = std::env::var("LADDERLAB_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&v| v > 0);
    let n = match cap {
        Some(c) => threads.max(1).min(c),
        None => threads.max(1),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| WalkError::Pool(e.to_string()))?;
    Ok(pool.install(f))
}

/// Ladder samples for stream ids `0..n`, in stream order regardless of
/// the number of workers.
pub fn simulate(
    increments: &TailSpec,
    seed: u64,
    n: u64,
    step_cap: u64,
    threads: usize,
) -> Result<Vec<LadderSample>, WalkError> {
    let base = WalkConfig::new(increments.clone(), seed, 0, step_cap)?;
    with_pool(threads, || {
        (0..n)
            .into_par_iter()
            .map(|i| ladder_epoch(&WalkConfig { stream_id: i, ..base.clone() }))
            .collect()
    })
}

/// Shifted ladder samples for stream ids `0..n`.
pub fn simulate_shifted(
    increments: &TailSpec,
    shift: f64,
    seed: u64,
    n: u64,
    step_cap: u64,
    threads: usize,
) -> Result<Vec<ShiftedSample>, WalkError> {
    let base = WalkConfig::new(increments.clone(), seed, 0, step_cap)?;
    ladder_epoch_shifted(&base, shift)?;
    with_pool(threads, || {
        (0..n)
            .into_par_iter()
            .map(|i| run(&WalkConfig { stream_id: i, ..base.clone() }, shift))
            .collect()
    })
}

/// Folds shifted excursions `0..n` without keeping the samples.
///
/// Streams are folded in fixed blocks of `FOLD_BLOCK` and the block results
/// reduced left to right, so the result does not depend on the worker count.
#[allow(clippy::too_many_arguments)]
pub fn fold_shifted<A, I, F, R>(
    increments: &TailSpec,
    shift: f64,
    seed: u64,
    n: u64,
    step_cap: u64,
    threads: usize,
    init: I,
    fold: F,
    reduce: R,
) -> Result<A, WalkError>
where
    A: Send,
    I: Fn() -> A + Send + Sync,
    F: Fn(A, ShiftedSample) -> A + Send + Sync,
    R: Fn(A, A) -> A + Send + Sync,
{
    let base = WalkConfig::new(increments.clone(), seed, 0, step_cap)?;
    ladder_epoch_shifted(&base, shift)?;
    let blocks: Vec<A> = with_pool(threads, || {
        (0..n.div_ceil(FOLD_BLOCK))
            .into_par_iter()
            .map(|b| {
                let end = ((b + 1) * FOLD_BLOCK).min(n);
                (b * FOLD_BLOCK..end).fold(init(), |acc, i| {
                    fold(acc, run(&WalkConfig { stream_id: i, ..base.clone() }, shift))
                })
            })
            .collect()
    })?;
    Ok(blocks.into_iter().fold(init(), reduce))
}

pub const FOLD_BLOCK: u64 = 4096;
