use proptest::prelude::*;
use ptex_core::risk::discretize_by_rounding;
use ptex_core::quadrature::integrate;
use ptex_core::{
    compound_density_exp, compound_pmf_discrete, fit_mle, loglik, score, CountDataset,
    DiscreteSeverity, PteParams, RngStream,
};

fn params() -> impl Strategy<Value = PteParams> {
    (-1.0f64..=1.0, -3.0f64..2.5).prop_map(|(a, lt)| PteParams::new(a, 10f64.powf(lt)).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn normalization(p in params(), n in 0u64..400) {
        let total: f64 = (0..=n).map(|x| p.pmf(x)).sum::<f64>() + p.survival(n + 1);
        prop_assert!((total - 1.0).abs() < 1e-12, "{}", total);
    }

    #[test]
    fn non_negative_and_mixture_identity(p in params(), x in 0u64..300) {
        let (a, t) = (p.alpha(), p.theta());
        let k = x as f64 + 1.0;
        let direct = (1.0 - a) * t / (1.0 + t).powf(k) + a * 2.0 * t / (1.0 + 2.0 * t).powf(k);
        let v = p.pmf(x);
        prop_assert!(v >= 0.0);
        prop_assert!((v - direct).abs() <= 1e-12 * direct.abs() + 1e-300);
    }

    #[test]
    fn recursion_matches_pmf(p in params()) {
        for (x, r) in p.pmf_recursive(500).iter().enumerate() {
            let v = p.pmf(x as u64);
            prop_assert!((r - v).abs() <= 1e-12 * v + 1e-300, "x={} {} vs {}", x, r, v);
        }
    }

    #[test]
    fn log_curvature_sign_law(p in params(), x in 1u64..60) {
        let (a, t) = (p.alpha(), p.theta());
        let d = p.pmf(x).powi(2) - p.pmf(x + 1) * p.pmf(x - 1);
        let k = x as f64 + 2.0;
        let want = -2.0 * a * (1.0 - a) * t.powi(4) / ((1.0 + t).powf(k) * (1.0 + 2.0 * t).powf(k));
        let scale = p.pmf(x).powi(2);
        prop_assert!((d - want).abs() <= 1e-9 * scale + 1e-300, "{} vs {}", d, want);
        if want.abs() > 1e-6 * scale {
            prop_assert_eq!(d.signum(), want.signum());
        }
    }

    #[test]
    fn log_convex_regime_consequences(a in 0.0f64..1.0, lt in -1.5f64..1.5) {
        let p = PteParams::new(a, 10f64.powf(lt)).unwrap();
        let p0 = p.pmf(0);
        for k in 0..=20u64 {
            // p0 itself is unrestricted (geometric p0 = 1/2 at theta = 1)
            if k >= 1 {
                prop_assert!(p.pmf(k) <= (-1f64).exp());
            }
            for m in 0..=20u64 {
                let binom = (1..=m).fold(1.0, |c, j| c * (k + j) as f64 / j as f64);
                let lhs = binom * p.pmf(k + m) * p0;
                prop_assert!(lhs >= p.pmf(k) * p.pmf(m) * (1.0 - 1e-12));
            }
        }
    }

    #[test]
    fn pgf_series(p in params(), t in -1.0f64..1.0) {
        let n = 4000u64;
        let series: f64 = (0..n).map(|x| p.pmf(x) * t.powi(x as i32)).sum();
        // tail bounded by survival(n)
        prop_assert!((p.pgf(t).unwrap() - series).abs() <= p.survival(n) + 1e-12);
    }

    #[test]
    fn over_dispersion(p in params()) {
        prop_assert!(p.variance() > p.mean());
    }

    #[test]
    fn loglik_row_order(p in params(), rows in prop::collection::vec((0u64..30, 1u64..20), 1..12)) {
        let a = CountDataset::from_pairs(rows.clone()).unwrap();
        let b = CountDataset::from_pairs(rows.into_iter().rev()).unwrap();
        prop_assert_eq!(loglik(&p, &a), loglik(&p, &b));
    }

    #[test]
    fn discrete_recursion_matches_convolution(
        p in params(),
        raw in prop::collection::vec(0.0f64..1.0, 1..=5),
        s_max in 0usize..=30,
    ) {
        let total: f64 = raw.iter().sum();
        prop_assume!(total > 0.0);
        let h = DiscreteSeverity::new(raw.iter().map(|v| v / total).collect()).unwrap();
        let f = compound_pmf_discrete(&p, &h, s_max).unwrap();
        // x-fold convolutions; claims are >= 1, so x <= s_max suffices
        let mut want = vec![0.0; s_max + 1];
        let mut conv = vec![0.0; s_max + 1];
        conv[0] = 1.0;
        want[0] = p.pmf(0);
        for x in 1..=s_max {
            let mut next = vec![0.0; s_max + 1];
            for s in 1..=s_max {
                for y in 1..=s {
                    next[s] += h.pmf(y as u64) * conv[s - y];
                }
            }
            conv = next;
            for s in 0..=s_max {
                want[s] += p.pmf(x as u64) * conv[s];
            }
        }
        for s in 0..=s_max {
            prop_assert!((f[s] - want[s]).abs() < 1e-10, "s={} {} vs {}", s, f[s], want[s]);
        }
    }
}

#[test]
fn unimodal_over_grid() {
    for i in 0..10 {
        for j in 0..10 {
            let a = -1.0 + 2.0 * i as f64 / 9.0;
            let t = 0.05 * 200f64.powf(j as f64 / 9.0);
            let p = PteParams::new(a, t).unwrap();
            let v = p.pmf_recursive(10_000);
            let up = v.windows(2).take_while(|w| w[1] >= w[0]).count();
            assert!(
                v[up..].windows(2).all(|w| w[1] <= w[0]),
                "not unimodal at ({a}, {t})"
            );
            assert!(p.mode().contains(up as u64), "mode mismatch at ({a}, {t})");
        }
    }
}

#[test]
fn sampling_reproducible() {
    let p = PteParams::new(-0.3, 0.4).unwrap();
    let a = p.sample(1000, &mut RngStream::new(99));
    let b = p.sample(1000, &mut RngStream::new(99));
    assert_eq!(a, b);
}

#[test]
fn mle_stationarity() {
    for (seed, &(a, t)) in [(0.5, 0.7), (-0.6, 1.5), (0.0, 0.3)].iter().enumerate() {
        let p = PteParams::new(a, t).unwrap();
        let data = CountDataset::from_counts(p.sample(3000, &mut RngStream::new(seed as u64))).unwrap();
        let fit = fit_mle(&data, None);
        if fit.converged && !fit.at_boundary {
            let g = score(&fit.params, &data);
            let n = data.n() as f64;
            assert!(g[0].abs() / n < 1e-6 && g[1].abs() / n < 1e-6, "{g:?}");
        }
    }
}

#[test]
fn discretized_exponential_matches_closed_form() {
    let (p, rate, w, s_max) = (PteParams::new(0.4, 0.8).unwrap(), 2.0, 0.01, 700);
    let cdf = |x: f64| -(-rate * x).exp_m1();
    let (zero, h) = discretize_by_rounding(cdf, w, s_max).unwrap();
    // a claim rounded to zero is a claim that never happened
    let f = compound_pmf_discrete(&p.thinned(1.0 - zero).unwrap(), &h, s_max).unwrap();
    assert!((f[0] - p.pmf(0)).abs() < 0.01 * p.pmf(0) + 1e-3);
    let mut checked = 0;
    for (s, &m) in f.iter().enumerate().skip(1) {
        let lo = (s as f64 - 0.5) * w;
        let want = integrate(|y| compound_density_exp(&p, rate, y), lo, lo + w, 1e-14);
        if want > 1e-4 {
            assert!((m - want).abs() < 1e-2 * want, "cell {s}: {m} vs {want}");
            checked += 1;
        }
    }
    assert!(checked > 100);
}
