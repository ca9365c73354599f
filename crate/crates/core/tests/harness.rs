use approx::assert_abs_diff_eq;

use kbandit::env::{BanditEnvironment, DecisionSet, RewardTape};
use kbandit::harness::{
    run_coverage_experiment, run_info_gain_sweep, run_regret_experiment, BoundFamily, EnvironmentConfig, Execution,
    ExperimentConfig, ExperimentKind, Instance, PolicyConfig, Preset,
};
use kbandit::{KernelSpec, Point};

fn two_arm_env() -> EnvironmentConfig {
    serde_json::from_str(r#"{"kernel": {"family": "delta"}, "points": [[0.0], [1.0]], "weights": [0.3, 0.7], "B": 1.0}"#)
        .unwrap()
}

fn regret_config(env: EnvironmentConfig, policies: Vec<PolicyConfig>, horizon: u64, seeds: Vec<u64>) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(ExperimentKind::Regret, env, horizon, seeds);
    c.policies = policies;
    c
}

fn all_policies() -> Vec<PolicyConfig> {
    vec![
        PolicyConfig::IgpUcb {
            b: None,
            lambda: None,
            nu2: None,
            delta: None,
        },
        PolicyConfig::KlUcb {
            c1: None,
            c2: None,
            delta: None,
        },
        PolicyConfig::KernelBetaUcb {
            alpha0: None,
            beta0: None,
            vanishing_prior: false,
            c1: None,
            c2: None,
            delta: None,
        },
        PolicyConfig::UniformRandom {},
        PolicyConfig::Oracle {},
        PolicyConfig::Fixed { arm: 3 },
    ]
}

#[test]
fn oracle_has_zero_regret() {
    let cfg = regret_config(EnvironmentConfig::preset(Preset::Sqexp25), vec![PolicyConfig::Oracle {}], 500, vec![1, 2]);
    let recs = run_regret_experiment(&cfg, &cfg.seeds, Execution::Serial).unwrap();
    assert_eq!(recs.len(), 1000);
    assert!(recs.iter().all(|r| r.cumulative_regret == 0.0 && r.instant_regret == 0.0));
}

#[test]
fn uniform_regret_matches_expectation() {
    // Regret is gap * (pulls of the worse arm), with pulls ~ Bin(T, 1/2).
    let (t, seeds, gap) = (2000u64, 50u64, 0.4);
    let cfg = regret_config(two_arm_env(), vec![PolicyConfig::UniformRandom {}], t, (0..seeds).collect());
    let recs = run_regret_experiment(&cfg, &cfg.seeds, Execution::Parallel).unwrap();
    let total: f64 = recs.iter().filter(|r| r.t == t).map(|r| r.cumulative_regret).sum();
    let expected = seeds as f64 * t as f64 * gap / 2.0;
    let sigma = gap * (seeds as f64 * t as f64 * 0.25).sqrt();
    assert!((total - expected).abs() <= 5.0 * sigma, "{total} vs {expected} +- {sigma}");
}

#[test]
fn regret_column_replays_from_arms() {
    let inst = Instance::from_preset(Preset::Delta10).unwrap();
    let cfg = regret_config(EnvironmentConfig::preset(Preset::Delta10), all_policies(), 400, vec![11, 12]);
    let recs = run_regret_experiment(&cfg, &cfg.seeds, Execution::Serial).unwrap();
    assert_eq!(recs.len(), 6 * 2 * 400);
    let env = BanditEnvironment::new(inst.f.clone(), inst.set.clone(), 0).unwrap();
    for run in recs.chunks(400) {
        let arms: Vec<usize> = run.iter().map(|r| r.arm).collect();
        for (i, r) in run.iter().enumerate() {
            assert_eq!(r.t, i as u64 + 1);
            assert!(i == 0 || r.cumulative_regret >= run[i - 1].cumulative_regret);
            let direct = (i + 1) as f64 * env.best_value() - arms[..=i].iter().map(|&a| env.means()[a]).sum::<f64>();
            assert_abs_diff_eq!(r.cumulative_regret, direct, epsilon = 1e-9);
            assert_abs_diff_eq!(r.instant_regret, env.gap(r.arm).unwrap(), epsilon = 0.0);
        }
    }
    let fixed: Vec<_> = recs.iter().filter(|r| r.policy == "fixed").collect();
    assert!(fixed.iter().all(|r| r.arm == 3));
}

#[test]
fn thinning_keeps_every_kth_and_last() {
    let mut cfg = regret_config(two_arm_env(), vec![PolicyConfig::UniformRandom {}], 95, vec![1]);
    cfg.record_every = 10;
    let recs = run_regret_experiment(&cfg, &cfg.seeds, Execution::Serial).unwrap();
    let ts: Vec<u64> = recs.iter().map(|r| r.t).collect();
    assert_eq!(ts, vec![10, 20, 30, 40, 50, 60, 70, 80, 90, 95]);

    cfg.record_every = 1;
    let full = run_regret_experiment(&cfg, &cfg.seeds, Execution::Serial).unwrap();
    for r in &recs {
        assert_eq!(r, &full[r.t as usize - 1]);
    }
}

#[test]
fn serial_equals_parallel() {
    let cfg = regret_config(EnvironmentConfig::preset(Preset::Sqexp25), all_policies(), 300, vec![5, 3, 9, 1]);
    let a = run_regret_experiment(&cfg, &cfg.seeds, Execution::Serial).unwrap();
    let b = run_regret_experiment(&cfg, &cfg.seeds, Execution::Parallel).unwrap();
    assert_eq!(a, b);

    let mut cov = ExperimentConfig::new(ExperimentKind::Coverage, EnvironmentConfig::preset(Preset::Delta10), 200, vec![4, 2]);
    cov.record_every = 3;
    let a = run_coverage_experiment(&cov, &cov.seeds, Execution::Serial).unwrap();
    let b = run_coverage_experiment(&cov, &cov.seeds, Execution::Parallel).unwrap();
    assert_eq!(a.records, b.records);
    assert_eq!(a.summaries, b.summaries);
}

#[test]
fn runs_depend_only_on_their_seed() {
    let cfg = regret_config(two_arm_env(), vec![PolicyConfig::UniformRandom {}], 100, vec![8]);
    let alone = run_regret_experiment(&cfg, &[8], Execution::Serial).unwrap();
    let with_others = run_regret_experiment(&cfg, &[1, 8, 3], Execution::Parallel).unwrap();
    assert_eq!(alone[..], with_others[100..200]);
}

#[test]
fn wrong_kind_is_rejected() {
    let cfg = ExperimentConfig::new(ExperimentKind::Coverage, EnvironmentConfig::preset(Preset::Delta10), 10, vec![1]);
    assert!(run_regret_experiment(&cfg, &cfg.seeds, Execution::Serial).is_err());
    assert!(run_info_gain_sweep(&cfg, &cfg.seeds, Execution::Serial).is_err());
}

#[test]
fn coverage_bookkeeping() {
    let inst = Instance::from_preset(Preset::Delta10).unwrap();
    let cfg = ExperimentConfig::new(ExperimentKind::Coverage, EnvironmentConfig::preset(Preset::Delta10), 300, vec![1, 2, 3]);
    let out = run_coverage_experiment(&cfg, &cfg.seeds, Execution::Serial).unwrap();
    assert_eq!(out.records.len(), 3 * 300 * 10 * 4);
    let means: Vec<f64> = inst.set.points().iter().map(|x| inst.f.eval(x).unwrap()).collect();
    for r in &out.records {
        assert!(r.lower <= r.upper);
        assert_eq!(r.contains_f, r.lower <= means[r.arm] && means[r.arm] <= r.upper);
        assert_abs_diff_eq!(r.width, r.upper - r.lower, epsilon = 0.0);
        if r.family == BoundFamily::Kl && r.pulls == 0 {
            assert_eq!((r.lower, r.upper), (0.0, 1.0));
        }
        if r.family == BoundFamily::SubgaussianClipped {
            assert!(r.lower >= 0.0 && r.upper <= 1.0);
        }
    }
    // Summary rows agree with the per-round records.
    for s in out.summaries.iter().filter(|s| BoundFamily::RECORDED.contains(&s.family)) {
        let hits: Vec<_> = out
            .records
            .iter()
            .filter(|r| r.family == s.family && r.seed == s.seed && s.arm.is_none_or(|a| a == r.arm))
            .collect();
        let mut rounds: Vec<u64> = hits.iter().filter(|r| !r.contains_f).map(|r| r.t).collect();
        rounds.dedup();
        assert_eq!(s.violation_rounds, rounds.len() as u64);
        assert_eq!(s.any_violation, !rounds.is_empty());
        assert_eq!(s.any_upper_violation, hits.iter().any(|r| means[r.arm] > r.upper));
    }
}

#[test]
fn kl_is_tighter_than_clipped_subgaussian_on_delta() {
    let cfg = ExperimentConfig::new(ExperimentKind::Coverage, EnvironmentConfig::preset(Preset::Delta10), 1000, (1..=5).collect());
    let out = run_coverage_experiment(&cfg, &cfg.seeds, Execution::Parallel).unwrap();
    let key = |r: &kbandit::harness::CoverageRecord| (r.seed, r.t, r.arm);
    let sub: std::collections::HashMap<_, _> = out
        .records
        .iter()
        .filter(|r| r.family == BoundFamily::SubgaussianClipped)
        .map(|r| (key(r), r.width))
        .collect();
    let pairs: Vec<(f64, f64)> = out
        .records
        .iter()
        .filter(|r| r.family == BoundFamily::Kl && r.pulls >= 10)
        .map(|r| (r.width, sub[&key(r)]))
        .collect();
    assert!(pairs.len() > 10_000);
    let tighter = pairs.iter().filter(|(kl, sg)| kl <= sg).count();
    assert!(tighter as f64 >= 0.95 * pairs.len() as f64, "{tighter}/{}", pairs.len());
}

#[test]
fn info_gain_sweep_on_delta() {
    let env: EnvironmentConfig = serde_json::from_str(
        r#"{"kernel": {"family": "delta"}, "points": [[0],[1],[2],[3],[4],[5]], "weights": [0.1,0.2,0.3,0.4,0.5,0.6], "B": 2.0}"#,
    )
    .unwrap();
    let mut cfg = ExperimentConfig::new(ExperimentKind::Infogain, env, 40, vec![1, 2]);
    cfg.estimation.nu2 = 1.0;
    let rows = run_info_gain_sweep(&cfg, &cfg.seeds, Execution::Serial).unwrap();
    assert_eq!(rows.len(), 2 * 41);
    for r in &rows {
        if r.t == 0 {
            assert_eq!((r.greedy_gamma, r.observed_gain), (0.0, 0.0));
        }
        if r.t <= 6 {
            assert_abs_diff_eq!(r.greedy_gamma, r.t as f64 / 2.0 * 2f64.ln(), epsilon = 1e-12);
        }
        assert!(!r.inverted && r.observed_gain <= r.greedy_gamma + 1e-9);
    }
}

#[test]
fn info_gain_rows_are_monotone() {
    let cfg = ExperimentConfig::new(ExperimentKind::Infogain, EnvironmentConfig::preset(Preset::Sqexp25), 200, vec![3]);
    let rows = run_info_gain_sweep(&cfg, &cfg.seeds, Execution::Serial).unwrap();
    for w in rows.windows(2) {
        assert!(w[1].greedy_gamma >= w[0].greedy_gamma && w[1].observed_gain >= w[0].observed_gain);
        assert_eq!(w[1].inverted, w[1].observed_gain > w[1].greedy_gamma + 1e-9);
    }
}

#[test]
fn reward_tape_is_order_independent() {
    let means = [0.3, 0.6, 0.9];
    let mut a = RewardTape::new(&means, 42);
    let mut b = RewardTape::new(&means, 42);
    let first: Vec<u8> = (0..50).map(|_| a.pull(1).unwrap()).collect();
    for _ in 0..20 {
        b.pull(0).unwrap();
        b.pull(2).unwrap();
    }
    let second: Vec<u8> = (0..50).map(|_| b.pull(1).unwrap()).collect();
    assert_eq!(first, second);
    assert!(a.pull(3).is_err());
}

#[test]
fn explicit_environment_runs() {
    let set = DecisionSet::grid_1d(0.0, 1.0, 11).unwrap();
    let env = EnvironmentConfig {
        kernel: Some(KernelSpec::matern(2.5, 0.2).unwrap()),
        points: Some(set.points().to_vec()),
        centers: Some(vec![Point::scalar(0.2).unwrap(), Point::scalar(0.7).unwrap()]),
        weights: Some(vec![0.4, 0.8]),
        b: Some(1.0),
        preset: None,
    };
    let cfg = regret_config(env, all_policies(), 200, vec![1]);
    let recs = run_regret_experiment(&cfg, &cfg.seeds, Execution::Serial).unwrap();
    assert_eq!(recs.len(), 6 * 200);
}
