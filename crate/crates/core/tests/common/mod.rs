#![allow(dead_code)]

use ladderlab::dist::{ChainOptions, ConstructionChain, TailSpec};
use ladderlab::growth::{certify, GrowthFunction};
use ladderlab::rng::UniformStream;

/// Base laws with `E exp(g(xi)) < inf` for each builtin family, mean -1.
pub fn example_bases() -> Vec<(GrowthFunction, TailSpec)> {
    vec![
        (
            GrowthFunction::builtin("g1", 2.0).unwrap(),
            TailSpec::lognormal_with_mean(0.0, 0.25, -1.0).unwrap(),
        ),
        (
            GrowthFunction::builtin("g2", 0.5).unwrap(),
            TailSpec::weibull_with_mean(1.0, 0.7, -1.0).unwrap(),
        ),
        (
            GrowthFunction::builtin("g3", 0.5).unwrap(),
            TailSpec::weibull_with_mean(1.0, 0.8, -1.0).unwrap(),
        ),
    ]
}

pub fn chain(g: GrowthFunction, base: TailSpec, delta: f64) -> ConstructionChain {
    let report = certify(&g).unwrap();
    ConstructionChain::build(base, g, &report, ChainOptions { delta, trunc_margin: None }).unwrap()
}

pub fn example_chains() -> Vec<ConstructionChain> {
    example_bases().into_iter().map(|(g, b)| chain(g, b, 0.5)).collect()
}

/// `n` points spread over `[-lo, hi]`, half uniform and half log-uniform.
pub fn random_points(seed: u64, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut s = UniformStream::new(seed, 0);
    (0..n)
        .map(|i| {
            let u = s.next_open01();
            if i % 2 == 0 {
                -lo + u * (hi + lo)
            } else {
                (1e-3f64.ln() + u * (hi.ln() - 1e-3f64.ln())).exp()
            }
        })
        .collect()
}
