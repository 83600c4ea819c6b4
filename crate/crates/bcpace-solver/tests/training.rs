mod common;

use bcpace_solver::{
    cover_report, estimator_lipschitz_check, greedy_packing, run, traced_tuples, BcpaceError,
    QEstimate, SolverConfig, TrainingLog,
};
use common::Toggle;
use core_bamdp::{checks::random_belief, Belief, Exec, LatentMdpFamily, LatentVar};
use environments::{ChainEnv, ChainParams, TigerEnv, TigerParams, TigerState};
use latent_qsolver::{solve_latent_q, LatentQTable, LatentSolveSettings};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn table<M: LatentMdpFamily>(model: &M) -> LatentQTable {
    solve_latent_q(model, LatentSolveSettings::default(), Exec::Sequential).unwrap()
}

fn tiger() -> TigerEnv {
    TigerEnv::new(TigerParams::default()).unwrap()
}

fn tiger_config() -> SolverConfig {
    SolverConfig {
        k: 5,
        n_batch: 10,
        horizon: 30,
        epsilon_d: Some(1.0),
        ..Default::default()
    }
}

#[test]
fn known_latent_terminates_without_samples() {
    let model = ChainEnv::new(ChainParams {
        prior: Some(vec![0.0, 1.0, 0.0]),
        ..Default::default()
    })
    .unwrap();
    let config = SolverConfig {
        patience: 1,
        horizon: 50,
        ..Default::default()
    };
    let outcome = run(&model, config, Some(table(&model)), Exec::Sequential).unwrap();
    assert!(outcome.terminated);
    assert_eq!(outcome.episodes(), 1);
    assert_eq!(outcome.estimate.len(), 0);
    assert!(outcome.check_budget().is_ok());
}

#[test]
fn exhausted_budget_is_flagged() {
    let model = tiger();
    let config = SolverConfig {
        max_episodes: 2,
        ..tiger_config()
    };
    let outcome = run(&model, config, Some(table(&model)), Exec::Sequential).unwrap();
    assert!(!outcome.terminated);
    assert!(matches!(
        outcome.check_budget(),
        Err(BcpaceError::BudgetExhausted { episodes: 2 })
    ));
}

#[test]
fn sample_counts_never_decrease() {
    let model = tiger();
    for n_batch in [1, 10] {
        let config = SolverConfig {
            n_batch,
            ..tiger_config()
        };
        let outcome = run(&model, config, Some(table(&model)), Exec::Sequential).unwrap();
        assert!(outcome.terminated);
        let counts: Vec<usize> = outcome.log.rows.iter().map(|r| r.samples).collect();
        assert!(counts.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(outcome.log.final_samples(), outcome.estimate.len());
        assert_eq!(outcome.log.contraction_violations, 0);
    }
}

#[test]
fn known_set_only_grows() {
    let model = tiger();
    let q = table(&model);
    let config = tiger_config();
    let trained = run(&model, config.clone(), Some(q.clone()), Exec::Sequential)
        .unwrap()
        .estimate;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let probes: Vec<(TigerState, Belief, usize)> = trained
        .samples()
        .samples()
        .iter()
        .map(|s| (s.state, s.belief.clone(), s.action))
        .chain((0..200).map(|_| {
            let s = TigerState::ALL[rng.random_range(0..3)];
            (s, random_belief(2, &mut rng), rng.random_range(0..3))
        }))
        .collect();
    let mut growing = QEstimate::new(&model, config, Some(q)).unwrap();
    let mut known = vec![false; probes.len()];
    for sample in trained.samples().samples() {
        growing.add_sample(&model, sample.clone());
        for (flag, (s, b, a)) in known.iter_mut().zip(&probes) {
            let now = growing.is_known(&model, s, b, *a);
            assert!(now || !*flag, "probe became unknown");
            *flag = now;
        }
    }
}

#[test]
fn identical_seeds_give_identical_logs() {
    let model = tiger();
    let q = table(&model);
    for n_batch in [1, 10] {
        let config = SolverConfig {
            n_batch,
            seed: 5,
            ..tiger_config()
        };
        let a = run(&model, config.clone(), Some(q.clone()), Exec::Sequential).unwrap();
        let b = run(&model, config.clone(), Some(q.clone()), Exec::Sequential).unwrap();
        let c = run(&model, config, Some(q.clone()), Exec::Parallel).unwrap();
        assert_eq!(a.log, b.log);
        assert_eq!(a.log, c.log);
        assert_eq!(
            a.log.to_csv_string().unwrap(),
            c.log.to_csv_string().unwrap()
        );
        assert_eq!(
            a.estimate.samples().samples(),
            c.estimate.samples().samples()
        );
    }
}

#[test]
fn training_log_csv_round_trips() {
    let model = tiger();
    let outcome = run(
        &model,
        tiger_config(),
        Some(table(&model)),
        Exec::Sequential,
    )
    .unwrap();
    let text = outcome.log.to_csv_string().unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "episode,return_raw,return_shifted,samples,vi_iters,escaped"
    );
    let rows = TrainingLog::read_csv(text.as_bytes()).unwrap();
    assert_eq!(rows, outcome.log.rows);
}

#[test]
fn sample_count_respects_the_packing_bound() {
    let model = tiger();
    let config = tiger_config();
    let qe = run(
        &model,
        config.clone(),
        Some(table(&model)),
        Exec::Sequential,
    )
    .unwrap()
    .estimate;
    let points = traced_tuples(&model, &qe, 50, 1).unwrap();
    let report = cover_report(&model, &qe, &points, qe.known_radius());
    assert!(report.reduced <= report.full);
    assert!(
        qe.len() <= config.k * report.full,
        "{} samples vs cover {}",
        qe.len(),
        report.full
    );
}

#[test]
fn packing_basics() {
    let model = tiger();
    let b = model.prior().clone();
    let single = vec![(TigerState::Start, b.clone(), 0)];
    assert_eq!(greedy_packing(&model, 1.0, &single, 0.1), 1);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let points: Vec<_> = (0..300)
        .map(|_| {
            (
                TigerState::ALL[rng.random_range(0..3)],
                random_belief(2, &mut rng),
                rng.random_range(0..3),
            )
        })
        .collect();
    let mut last = usize::MAX;
    for radius in [0.01, 0.02, 0.04, 0.08, 0.16] {
        let n = greedy_packing(&model, 1.0, &points, radius);
        assert!(n <= last);
        last = n;
    }
}

#[test]
fn trained_estimates_are_lipschitz() {
    let model = tiger();
    let q = table(&model);
    let qe = run(&model, tiger_config(), Some(q.clone()), Exec::Sequential)
        .unwrap()
        .estimate;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let report = estimator_lipschitz_check(&model, &qe, &TigerState::ALL, 10_000, &mut rng);
    assert_eq!(report.trials, 10_000);
    assert_eq!(report.violations, 0, "worst excess {}", report.worst);

    let toggle = Toggle::new();
    let config = SolverConfig {
        use_latent_init: false,
        use_best_case_bound: false,
        k: 2,
        ..Default::default()
    };
    let qe = run(&toggle, config, None, Exec::Sequential)
        .unwrap()
        .estimate;
    let report = estimator_lipschitz_check(&toggle, &qe, &[0, 1, 2], 10_000, &mut rng);
    assert_eq!(report.violations, 0, "worst excess {}", report.worst);
}

#[test]
fn seeded_queries_match_latent_values_after_training() {
    let model = tiger();
    let q = table(&model);
    let qe = run(&model, tiger_config(), Some(q.clone()), Exec::Sequential)
        .unwrap()
        .estimate;
    for s in [
        TigerState::Start,
        TigerState::HeardLeft,
        TigerState::HeardRight,
    ] {
        for l in 0..2 {
            let b = Belief::one_hot(2, LatentVar(l));
            for a in 0..3 {
                assert_eq!(
                    qe.estimate(&model, &s, &b, a),
                    q.value(&model, &s, LatentVar(l), a)
                );
            }
        }
    }
}
