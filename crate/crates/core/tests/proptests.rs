use ladderlab::dist::TailSpec;
use ladderlab::estimate::{estimate, Functional, MomentSummary, Estimand};
use ladderlab::growth::GrowthFunction;
use ladderlab::walk::{sample_increment, LadderSample};
use proptest::prelude::*;

fn family() -> impl Strategy<Value = TailSpec> {
    prop_oneof![
        (1.0..5.0f64, 0.2..1.5f64, -5.0..1.0f64).prop_map(|(c, b, s)| TailSpec::weibull_shifted(c, b, s).unwrap()),
        (-1.0..1.0f64, 0.05..2.0f64, -5.0..1.0f64).prop_map(|(m, v, s)| TailSpec::lognormal_shifted(m, v, s).unwrap()),
        (0.5..4.0f64, 0.1..3.0f64, -5.0..1.0f64).prop_map(|(a, k, s)| TailSpec::pareto(a, k, s).unwrap()),
        (-3.0..3.0f64, 0.1..3.0f64).prop_map(|(l, b)| TailSpec::laplace(l, b).unwrap()),
        (0.0..1.0f64).prop_map(|p| TailSpec::bernoulli_pm1(p).unwrap()),
    ]
}

fn samples() -> impl Strategy<Value = Vec<LadderSample>> {
    prop::collection::vec((1u64..5000, any::<bool>()), 1..300).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(i, (tau, c))| LadderSample {
                stream_id: i as u64,
                tau,
                s_tau: -0.5,
                m_tau: 1.0,
                censored: c && tau > 4000,
                seed: 0,
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn quantile_is_monotone_generalized_inverse(f in family(), u in 1e-6..(1.0 - 1e-6f64), v in 1e-6..(1.0 - 1e-6f64)) {
        let (lo, hi) = if u <= v { (u, v) } else { (v, u) };
        let (a, b) = (f.quantile(lo).unwrap(), f.quantile(hi).unwrap());
        prop_assert!(a <= b);
        prop_assert!(f.tail(a) <= (1.0 - lo) * (1.0 + 1e-10) + 1e-15);
        prop_assert!(f.tail_left(a) >= (1.0 - lo) * (1.0 - 1e-10) - 1e-15);
    }

    #[test]
    fn tail_ordering_gives_ordered_samples(f in family(), shift in 0.0..3.0f64, floor in -10.0..0.0f64, u in 1e-9..(1.0 - 1e-9f64)) {
        let up = TailSpec::shifted(f.clone(), shift);
        let cut = TailSpec::truncated(f.clone(), floor);
        let x = sample_increment(&f, u).unwrap();
        prop_assert!(x <= sample_increment(&up, u).unwrap());
        prop_assert!(x <= sample_increment(&cut, u).unwrap());
    }

    #[test]
    fn merge_equals_union(s in samples(), split in 0usize..300) {
        let f = Functional::power(1.5).unwrap();
        let k = split.min(s.len());
        let mut a = MomentSummary::new();
        let mut b = MomentSummary::new();
        let mut all = MomentSummary::new();
        for (i, x) in s.iter().enumerate() {
            let v = f.eval(x.tau);
            if i < k { a.push(v, x.censored) } else { b.push(v, x.censored) }
            all.push(v, x.censored);
        }
        let est = Estimand::Power { alpha: 1.5 };
        let m = a.merge(b).finish(est.clone());
        let w = all.finish(est);
        prop_assert_eq!(m.n, w.n);
        prop_assert_eq!(m.censored_n, w.censored_n);
        prop_assert_eq!(m.verdict, w.verdict);
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-9 * x.abs().max(y.abs()).max(1e-300);
        prop_assert!(close(m.top1_share, w.top1_share));
        match (m.point, w.point) {
            (Some(p), Some(q)) => {
                prop_assert!(close(p, q));
                prop_assert!(close(m.std_error.unwrap(), w.std_error.unwrap()) || w.std_error.unwrap() < 1e-9 * q);
            }
            (None, None) => {}
            _ => prop_assert!(false),
        }
    }

    #[test]
    fn g_moment_monotone_in_eps_and_delta(s in samples(), e1 in 0.01..0.99f64, e2 in 0.01..0.99f64, d1 in 0.01..0.99f64, d2 in 0.01..0.99f64) {
        let g = GrowthFunction::builtin("g2", 0.5).unwrap();
        let a = 1.0;
        let (el, eh) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let (dl, dh) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        let base = Functional::g_moment(&g, el, dl, a).unwrap();
        let more_eps = Functional::g_moment(&g, eh, dl, a).unwrap();
        let more_delta = Functional::g_moment(&g, el, dh, a).unwrap();
        for x in &s {
            prop_assert!(more_eps.eval(x.tau) <= base.eval(x.tau));
            prop_assert!(more_delta.eval(x.tau) <= base.eval(x.tau));
        }
        let p = estimate(&s, &base).unwrap().point;
        let q = estimate(&s, &more_eps).unwrap().point;
        if let (Some(p), Some(q)) = (p, q) {
            prop_assert!(q <= p * (1.0 + 1e-12));
        }
    }
}
