//! Property tests for the invariants of every module.

use proptest::prelude::*;

use levy_variation::levy_model::{abs_normal_moment, phi_r};
use levy_variation::mc_harness::{clt_experiment, lln_experiment, run_experiment, Check, ExperimentConfig};
use levy_variation::numerics::stats::{ks_statistic, min_eigenvalue, normal_cdf};
use levy_variation::path_simulator::{IncrementPath, PathSampler, Refinement, SimulationOptions};
use levy_variation::regime_oracle::{
    applicable_lln, centering_slope_limit, classify, classify_clt, classify_rescaled, clt_verdicts, exact_center,
    predicted_clt_covariance, CenterFunction, JointRole, Limit, RegimeVerdict,
};
use levy_variation::variation_stats::{pi_n_trunc, v_bar_n, v_n, v_prime_n};
use levy_variation::{FunctionForm, HorizonMode, JumpLaw, JumpMeasure, LevyTriple, SamplingGrid, SeriesKind, TestFunction, Theorem};

fn jump_measure() -> impl Strategy<Value = JumpMeasure> {
    prop_oneof![
        Just(JumpMeasure::NoJumps),
        (0.1f64..5.0, 0.1f64..3.0).prop_map(|(l, s)| JumpMeasure::compound_poisson(l, JumpLaw::symmetric_pair(s).unwrap()).unwrap()),
        (0.1f64..5.0, -1.0f64..1.0, 0.1f64..2.0)
            .prop_map(|(l, m, sd)| JumpMeasure::compound_poisson(l, JumpLaw::Gaussian { mean: m, sd }).unwrap()),
        (0.1f64..5.0, 0.2f64..2.0).prop_map(|(l, w)| JumpMeasure::compound_poisson(l, JumpLaw::Uniform { lo: -w, hi: 2.0 * w }).unwrap()),
        (0.05f64..1.95, 0.1f64..3.0, 0.2f64..3.0, any::<bool>())
            .prop_map(|(a, s, cut, sym)| JumpMeasure::power_law(a, s, cut, sym).unwrap()),
    ]
}

fn triple() -> impl Strategy<Value = LevyTriple> {
    (-2.0f64..2.0, prop_oneof![Just(0.0), 0.1f64..3.0], jump_measure()).prop_map(|(b, c, jm)| LevyTriple::new(b, c, jm).unwrap())
}

fn test_function() -> impl Strategy<Value = TestFunction> {
    prop_oneof![
        (0.1f64..5.0).prop_map(|r| TestFunction::power_abs(r).unwrap()),
        (0.1f64..5.0, 0.2f64..3.0).prop_map(|(r, a)| TestFunction::truncated_power(r, a).unwrap()),
        (0.0f64..4.0).prop_map(|r| TestFunction::phi(r).unwrap()),
        (0.1f64..5.0, 0.1f64..2.0).prop_map(|(r, e)| TestFunction::smooth_truncated_power(r, e).unwrap()),
        (0.2f64..3.0).prop_map(|k| TestFunction::square_near_zero(k).unwrap()),
        (3.05f64..6.0).prop_map(|p| TestFunction::cubic_plus(p).unwrap()),
    ]
}

fn path(t: &LevyTriple, n: usize, delta: f64, seed: u64) -> Option<IncrementPath> {
    let sampler = PathSampler::new(t, SimulationOptions::default()).ok()?;
    let grid = SamplingGrid::new(delta, n, HorizonMode::FixedHorizon).unwrap();
    Some(sampler.sample(&grid, seed, 0))
}

fn rel(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn index_set_is_an_interval(jm in jump_measure(), r in 0.0f64..4.0, d in 0.0f64..4.0) {
        if jm.in_index_set(r) {
            prop_assert!(jm.in_index_set(r + d));
        }
    }

    #[test]
    fn mu_is_log_convex(r in 0.0f64..3.0) {
        prop_assert!(abs_normal_moment(2.0 * r) >= abs_normal_moment(r).powi(2) * (1.0 - 1e-14));
    }

    #[test]
    fn phi_is_even_monotone_bounded(r in 0.0f64..5.0, x in -10.0f64..10.0, y in -10.0f64..10.0) {
        let (px, py) = (phi_r(x, r).unwrap(), phi_r(y, r).unwrap());
        prop_assert_eq!(px, phi_r(-x, r).unwrap());
        prop_assert!((0.0..=1.0).contains(&px));
        if x.abs() <= y.abs() {
            prop_assert!(px <= py);
        }
    }

    #[test]
    fn phi_integral_finite_iff_in_index_set(jm in jump_measure(), r in 0.0f64..3.0) {
        let v = jm.integrate(|x| phi_r(x, r).unwrap(), Some(r), &[-1.0, 1.0]).unwrap();
        prop_assert_eq!(v.is_finite(), jm.in_index_set(r), "F(phi_{}) = {}", r, v);
    }

    #[test]
    fn derivative_matches_finite_differences(f in test_function(), xs in prop::collection::vec(-3.0f64..3.0, 100)) {
        prop_assume!(f.class().c1_everywhere);
        let mut kinks = f.breakpoints();
        kinks.push(0.0);
        let h = 1e-3;
        for x in xs {
            if kinks.iter().any(|k| (x - k).abs() < 0.05) {
                continue;
            }
            let fd = (f.eval(x - 2.0 * h) - 8.0 * f.eval(x - h) + 8.0 * f.eval(x + h) - f.eval(x + 2.0 * h)) / (12.0 * h);
            let d = f.eval_deriv(x).unwrap();
            prop_assert!((fd - d).abs() < 1e-6, "{} at {}: {} vs {}", f, x, d, fd);
        }
    }

    #[test]
    fn truncation_is_power_times_indicator(r in 0.1f64..5.0, a in 0.1f64..3.0, x in -5.0f64..5.0) {
        let t = TestFunction::truncated_power(r, a).unwrap().eval(x);
        let p = TestFunction::power_abs(r).unwrap().eval(x);
        prop_assert_eq!(t, if x.abs() <= a { p } else { 0.0 });
    }

    #[test]
    fn evenness_metadata_holds(f in test_function(), x in -6.0f64..6.0) {
        if f.is_even() {
            prop_assert_eq!(f.eval(x), f.eval(-x));
        }
    }

    #[test]
    fn total_verdicts(t in triple(), f in test_function()) {
        for mode in [HorizonMode::FixedHorizon, HorizonMode::GrowingHorizon] {
            let v = classify(&t, &f, mode).unwrap();
            v.check().unwrap();
            classify_rescaled(&t, &f, mode).unwrap().check().unwrap();
            if mode == HorizonMode::FixedHorizon {
                prop_assert!(v.is_covered(), "{:?}", v.reason);
            }
        }
        for kind in [SeriesKind::Vn, SeriesKind::VnPrime, SeriesKind::VnBar, SeriesKind::VnBarPrime] {
            let v = classify_clt(&t, &f, kind).unwrap();
            v.check().unwrap();
            if !v.is_covered() {
                let reason = v.reason.clone().unwrap();
                let documented = reason.starts_with("c = 0") || reason.starts_with("f in E_r for 2 < r <= 3");
                // outside the documented gaps the statement is simply absent
                // (jumps with r >= 1, unbounded f on a growing horizon, ...)
                prop_assert!(documented || reason.starts_with("no CLT statement"), "{}", reason);
                if t.gauss_var_c == 0.0 && !t.jump_measure.is_zero() && kind == SeriesKind::Vn {
                    let r = f.class_r().unwrap();
                    if !(r < 1.0 && !t.jump_measure.in_index_set(2.0 * r)) {
                        prop_assert!(documented);
                    }
                }
            }
        }
    }

    #[test]
    fn clt_variances_nonnegative(t in triple(), f in test_function()) {
        for kind in [SeriesKind::Vn, SeriesKind::VnPrime, SeriesKind::VnBar, SeriesKind::VnBarPrime] {
            for v in clt_verdicts(&t, &f, kind).unwrap() {
                v.check().unwrap();
                if let Limit::CltVariance { v } = v.limit {
                    prop_assert!(v >= 0.0);
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn joint_covariance_is_psd(c in 0.1f64..3.0, rs in prop::collection::vec(0.05f64..0.95, 1..4), bs in prop::collection::vec(0.1f64..4.0, 1..4)) {
        let t = LevyTriple::brownian(c).unwrap();
        let mut fs = Vec::new();
        let mut vs: Vec<RegimeVerdict> = Vec::new();
        for r in rs {
            let f = TestFunction::phi(r).unwrap();
            vs.push(clt_verdicts(&t, &f, SeriesKind::Vn).unwrap().into_iter().find(|v| matches!(v.joint_role, Some(JointRole::JPrime { .. }))).unwrap());
            fs.push(f);
        }
        for b in bs {
            let f = TestFunction::phi(b).unwrap();
            vs.push(clt_verdicts(&t, &f, SeriesKind::VnPrime).unwrap().into_iter().find(|v| v.joint_role == Some(JointRole::JDoublePrime)).unwrap());
            fs.push(f);
        }
        let m = predicted_clt_covariance(&vs, &t, &fs).unwrap();
        let d = m.len();
        prop_assert!(min_eigenvalue(&nalgebra::DMatrix::from_fn(d, d, |i, j| m[i][j])) >= -1e-10);
    }

    #[test]
    fn centering_slope_agrees_with_exact_law(l in 0.2f64..3.0, s in 0.3f64..2.5, f in test_function()) {
        // b = 0: a drift adds |b|^r Δ^{r-1}, which decays too slowly to
        // test for r near 1 (r = 1 is covered below)
        let t = LevyTriple::new(0.0, 0.0, JumpMeasure::compound_poisson(l, JumpLaw::symmetric_pair(s).unwrap()).unwrap()).unwrap();
        let list = applicable_lln(&t, &f, HorizonMode::FixedHorizon).unwrap();
        let has = |th: Theorem| list.iter().any(|v| v.theorem == th);
        prop_assume!(has(Theorem::T2_3) && list.iter().any(|v| matches!(v.theorem, Theorem::T2_1a | Theorem::T2_1b | Theorem::T2_1c)));
        let v = list.iter().find(|v| v.theorem == Theorem::T2_3).unwrap();
        let levy_variation::regime_oracle::Centering::HCenter { function, .. } = &v.centering else { panic!() };
        let delta = 1e-7;
        let h = exact_center(&t, function, false, delta).unwrap().unwrap() / delta;
        let slope = centering_slope_limit(&t, &f).unwrap();
        prop_assert!((h - slope).abs() < 1e-3 * (1.0 + slope.abs()), "{} vs {}", h, slope);
    }

    #[test]
    fn identity_suite(t in triple(), r in 0.2f64..4.0, a in 0.3f64..3.0, a2 in 0.0f64..2.0, n in 50usize..600, seed in 0u64..1000) {
        let delta = 1.0 / n as f64;
        let Some(p) = path(&t, n, delta, seed) else { return Ok(()) };
        let pi = pi_n_trunc(&p, r, a * delta.sqrt()).unwrap();
        let vp = v_prime_n(&p, &TestFunction::truncated_power(r, a).unwrap());
        for (x, y) in pi.values.iter().zip(&vp.values) {
            prop_assert!(rel(*x, delta.powf(r / 2.0) * y) <= 1e-12);
        }
        let wider = pi_n_trunc(&p, r, (a + a2) * delta.sqrt()).unwrap();
        for (x, y) in pi.values.iter().zip(&wider.values) {
            prop_assert!(x <= y);
        }
        let f = TestFunction::phi(r).unwrap();
        let s = v_n(&p, &f);
        let mut prev = 0.0;
        for (v, inc) in s.values.iter().zip(&p.increments) {
            prop_assert!((v - prev - f.eval(*inc)).abs() <= 1e-12 * (1.0 + v.abs()));
            prev = *v;
        }
        let gp = {
            let g = SamplingGrid::growing_horizon(n, 0.5).unwrap();
            let Ok(sampler) = PathSampler::new(&t, SimulationOptions::default()) else { return Ok(()) };
            sampler.sample(&g, seed, 1)
        };
        prop_assert_eq!(v_bar_n(&gp, &f).value_at(1.0), v_n(&gp, &f).value_at(gp.grid.horizon()));
    }

    #[test]
    fn variation_is_permutation_invariant(t in triple(), f in test_function(), seed in 0u64..1000, rot in 1usize..100) {
        let Some(p) = path(&t, 200, 0.005, seed) else { return Ok(()) };
        let mut q = p.clone();
        q.increments.reverse();
        q.increments.rotate_left(rot);
        prop_assert!(rel(v_n(&p, &f).terminal(), v_n(&q, &f).terminal()) <= 1e-12);
    }

    #[test]
    fn power_variation_scales(t in triple(), r in 0.1f64..4.0, lambda in -5.0f64..5.0, seed in 0u64..1000) {
        prop_assume!(lambda != 0.0);
        let Some(p) = path(&t, 200, 0.005, seed) else { return Ok(()) };
        let mut q = p.clone();
        q.increments.iter_mut().for_each(|x| *x *= lambda);
        let f = TestFunction::power_abs(r).unwrap();
        prop_assert!(rel(v_n(&q, &f).terminal(), lambda.abs().powf(r) * v_n(&p, &f).terminal()) <= 1e-12);
    }

    #[test]
    fn paths_are_deterministic(t in triple(), seed in 0u64..1000, threads in 1usize..4) {
        let Some(a) = path(&t, 300, 1.0 / 300.0, seed) else { return Ok(()) };
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let b = pool.install(|| path(&t, 300, 1.0 / 300.0, seed)).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn coupled_refinement_sums_pairwise(c in 0.1f64..3.0, b in -1.0f64..1.0, seed in 0u64..1000, k in 4u32..10) {
        let t = LevyTriple::new(b, c, JumpMeasure::compound_poisson(2.0, JumpLaw::symmetric_pair(0.7).unwrap()).unwrap()).unwrap();
        let opts = SimulationOptions { refinement: Refinement::Coupled, ..SimulationOptions::default() };
        let s = PathSampler::new(&t, opts).unwrap();
        let n = 1usize << k;
        let coarse = s.sample(&SamplingGrid::fixed_horizon(1.0, n).unwrap(), seed, 3);
        let fine = s.sample(&SamplingGrid::fixed_horizon(1.0, 2 * n).unwrap(), seed, 3);
        for (i, x) in coarse.increments.iter().enumerate() {
            let y = fine.increments[2 * i] + fine.increments[2 * i + 1];
            prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn ledger_reconstructs_jump_part(l in 0.1f64..5.0, sd in 0.1f64..2.0, seed in 0u64..1000) {
        let t = LevyTriple::new(0.0, 1.0, JumpMeasure::compound_poisson(l, JumpLaw::Gaussian { mean: 0.0, sd }).unwrap()).unwrap();
        let Some(p) = path(&t, 20_000, 1.0 / 20_000.0, seed) else { return Ok(()) };
        let steps: std::collections::BTreeSet<usize> = p.big_jumps.iter().map(|j| (j.time / p.grid.delta).ceil() as usize).collect();
        prop_assume!(steps.len() == p.big_jumps.len());
        let sq = TestFunction::power_abs(2.0).unwrap();
        let ledger = p.jump_functional(&sq, 1.0).unwrap().value;
        let recon: f64 = p.big_jump_part.iter().map(|x| x * x).sum();
        prop_assert!((ledger - recon).abs() <= 1e-10 * (1.0 + ledger));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn gaussian_increments_are_self_similar(c in 0.2f64..3.0, seed in 0u64..1000) {
        let p = path(&LevyTriple::brownian(c).unwrap(), 10_000, 1e-3, seed).unwrap();
        let xs: Vec<f64> = p.increments.iter().map(|x| x / 1e-3f64.sqrt()).collect();
        prop_assert!(ks_statistic(&xs, |x| normal_cdf(x, 0.0, c.sqrt())) < 0.02);
    }

    #[test]
    fn reports_are_deterministic(seed in 0u64..1000, l in 0.5f64..3.0) {
        let t = LevyTriple::new(0.0, 1.0, JumpMeasure::compound_poisson(l, JumpLaw::symmetric_pair(1.0).unwrap()).unwrap()).unwrap();
        let mut cfg = ExperimentConfig::new("det", t, vec![TestFunction::phi(0.5).unwrap().into()], vec![Check::Lln, Check::Clt]);
        cfg.deltas = vec![0.01, 0.005];
        cfg.replicas = 20;
        cfg.seed = seed;
        let mut a = run_experiment(&cfg).unwrap();
        let mut b = run_experiment(&cfg).unwrap();
        a.wall_clock_seconds = 0.0;
        b.wall_clock_seconds = 0.0;
        prop_assert_eq!(a, b);
    }

    #[test]
    fn standard_errors_are_honest(seed in 0u64..1000, c in 0.5f64..2.0) {
        let batches = 40;
        let mut means = Vec::new();
        let mut ses = Vec::new();
        for k in 0..batches {
            let mut cfg = ExperimentConfig::new("se", LevyTriple::brownian(c).unwrap(), vec![TestFunction::phi(0.5).unwrap().into()], vec![Check::Lln]);
            cfg.deltas = vec![0.002];
            cfg.replicas = 30;
            cfg.seed = seed * 1000 + k;
            let r = lln_experiment(&cfg).unwrap();
            means.push(r.lln[0].estimate.mean);
            ses.push(r.lln[0].estimate.std_error);
        }
        let m = means.iter().sum::<f64>() / batches as f64;
        let scatter = (means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (batches - 1) as f64).sqrt();
        let se = ses.iter().sum::<f64>() / batches as f64;
        prop_assert!(scatter / se > 0.5 && scatter / se < 2.0, "scatter {} vs se {}", scatter, se);
    }
}

#[test]
fn centering_slope_adds_drift_at_r_one() {
    let t = LevyTriple::new(0.5, 0.0, JumpMeasure::compound_poisson(1.5, JumpLaw::symmetric_pair(0.8).unwrap()).unwrap()).unwrap();
    let f = TestFunction::phi(1.0).unwrap();
    let slope = centering_slope_limit(&t, &f).unwrap();
    assert!((slope - (1.5 * 0.8 + 0.5)).abs() < 1e-9, "{slope}");
    let g = CenterFunction::plain(f);
    let delta = 1e-7;
    let h = exact_center(&t, &g, false, delta).unwrap().unwrap() / delta;
    assert!((h - slope).abs() < 1e-4, "{h} vs {slope}");
}

#[test]
fn default_centering_draws_meet_the_budget() {
    // power-law jumps have no exact law, so the centering is Monte Carlo
    let t = LevyTriple::new(0.0, 1.0, JumpMeasure::power_law(0.5, 0.5, 1.0, true).unwrap()).unwrap();
    let mut cfg = ExperimentConfig::new("budget", t, vec![TestFunction::phi(0.5).unwrap().into()], vec![Check::Clt]);
    cfg.deltas = vec![0.01];
    cfg.replicas = 20;
    let r = clt_experiment(&cfg).unwrap();
    let budget: Vec<_> = r.checks.iter().filter(|c| c.tolerance == "centering_budget").collect();
    assert!(!budget.is_empty());
    assert!(budget.iter().all(|c| c.passed && c.observed < c.threshold), "{budget:?}");
}

#[test]
fn monotone_error_is_soft() {
    let mut cfg = ExperimentConfig::new("mono", LevyTriple::brownian(1.0).unwrap(), vec![TestFunction::phi(0.5).unwrap().into()], vec![Check::Lln]);
    cfg.deltas = vec![1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0];
    cfg.replicas = 10;
    cfg.simulation.refinement = Refinement::Coupled;
    let r = lln_experiment(&cfg).unwrap();
    let soft: Vec<_> = r.checks.iter().filter(|c| c.name.contains("nonincreasing")).collect();
    assert_eq!(soft.len(), 1);
    assert!(!soft[0].hard);
}

#[test]
fn every_form_is_generated() {
    // guards the strategies above against silently dropping a form
    let forms = [
        FunctionForm::PowerAbs { r: 1.0 },
        FunctionForm::TruncatedPower { r: 1.0, a: 1.0 },
        FunctionForm::PhiR { r: 1.0 },
        FunctionForm::SmoothTruncatedPower { r: 1.0, eta: 1.0 },
        FunctionForm::SquareNearZero { k: 1.0 },
        FunctionForm::CubicPlus { p: 4.0 },
    ];
    for f in forms {
        let t = TestFunction::new(f).unwrap();
        let _ = CenterFunction::plain(t);
    }
}
