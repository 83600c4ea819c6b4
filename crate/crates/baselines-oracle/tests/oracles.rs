use baselines_oracle::{
    oracle_optimal_return, qmdp_policy, BeliefGridOracle, OracleError, OracleSettings, QmdpPolicy,
    SimplexLattice, TwoPhaseOracle,
};
use core_bamdp::{
    belief_update, evaluate_policy, mean_and_stderr, simulate, Belief, EvalSettings, Exec,
    HyperState, LatentMdpFamily, LatentVar, Policy,
};
use environments::chain::{ADVANCE, RESET};
use environments::lightdark::LEFT;
use environments::tiger::{LISTEN, OPEN_LEFT, OPEN_RIGHT, TIGER_LEFT};
use environments::{
    make_env, ChainEnv, ChainParams, EnvParams, LdState, LightDarkEnv, LightDarkParams, TigerEnv,
    TigerParams, TigerState,
};
use latent_qsolver::{qmdp_action_values, solve_latent_q, LatentQTable, LatentSolveSettings};
use proptest::prelude::*;

fn table<M: LatentMdpFamily>(model: &M) -> LatentQTable {
    solve_latent_q(model, LatentSolveSettings::default(), Exec::Sequential).unwrap()
}

fn settings(pitch: f64) -> OracleSettings {
    OracleSettings {
        pitch,
        ..Default::default()
    }
}

fn tiger() -> TigerEnv {
    TigerEnv::new(TigerParams::default()).unwrap()
}

fn chain() -> ChainEnv {
    ChainEnv::new(ChainParams::default()).unwrap()
}

#[test]
fn vertices_reproduce_latent_values() {
    let model = chain();
    let q = table(&model);
    let oracle = BeliefGridOracle::solve(&model, settings(0.04)).unwrap();
    for s in 0..5 {
        for l in 0..3 {
            let latent = LatentVar(l);
            let diff = (oracle.vertex_value(&s, latent) - q.state_value(&model, &s, latent)).abs();
            assert!(diff <= 1e-4, "state {s} latent {l}: {diff}");
        }
    }
    let model = tiger();
    let q = table(&model);
    let oracle = BeliefGridOracle::solve(&model, settings(0.01)).unwrap();
    for s in TigerState::ALL {
        for l in 0..2 {
            let latent = LatentVar(l);
            assert!(
                (oracle.vertex_value(&s, latent) - q.state_value(&model, &s, latent)).abs() <= 1e-4
            );
        }
    }
}

#[test]
fn oracle_residual_and_range() {
    let model = tiger();
    let oracle = BeliefGridOracle::solve(&model, settings(0.01)).unwrap();
    assert!(oracle.residual() <= 1e-6);
    let q_max = model.r_max() / (1.0 - 0.95);
    for s in TigerState::ALL {
        for p in 0..oracle.lattice().len() {
            let v = oracle.value_at(&s, p);
            assert!((0.0..=q_max + 1e-6).contains(&v));
        }
    }
}

#[test]
fn tiger_value_is_symmetric_under_reflection() {
    let model = tiger();
    let oracle = BeliefGridOracle::solve(&model, settings(0.01)).unwrap();
    let start = model.initial_state();
    let v = oracle.value(&start, model.prior());
    assert!(v.is_finite());
    for i in 0..=20 {
        let p = i as f64 / 20.0;
        let b = Belief::new(vec![p, 1.0 - p]).unwrap();
        let r = Belief::new(vec![1.0 - p, p]).unwrap();
        assert!(
            (oracle.value(&start, &b) - oracle.value(&start, &r)).abs() <= 1e-6,
            "p={p}"
        );
    }
}

#[test]
fn chain_refinement_deltas_shrink() {
    let env = make_env(&EnvParams::named("chain").unwrap()).unwrap();
    let values: Vec<f64> = [0.04, 0.02, 0.01]
        .iter()
        .map(|&p| oracle_optimal_return(&env, settings(p), 0.05, 0).unwrap())
        .collect();
    let (d1, d2) = ((values[1] - values[0]).abs(), (values[2] - values[1]).abs());
    assert!(d2 < d1, "{values:?}");
}

#[test]
fn renewal_tiger_return_is_settled_at_the_default_pitch() {
    let env = make_env(&EnvParams::Tiger(TigerParams {
        renewal: true,
        ..Default::default()
    }))
    .unwrap();
    let default = oracle_optimal_return(&env, settings(0.01), 0.05, 0).unwrap();
    let fine = oracle_optimal_return(&env, settings(0.005), 0.05, 0).unwrap();
    assert!((fine - default).abs() <= 1e-6, "{default} vs {fine}");
}

#[test]
fn known_chain_latent_reduces_to_latent_mdp() {
    for l in 0..3 {
        let mut prior = vec![0.0; 3];
        prior[l] = 1.0;
        let params = ChainParams {
            prior: Some(prior),
            ..Default::default()
        };
        let model = ChainEnv::new(params.clone()).unwrap();
        let expected =
            table(&model).state_value(&model, &0, LatentVar(l)) - model.reward_shift() / 0.05;
        let got = oracle_optimal_return(
            &make_env(&EnvParams::Chain(params)).unwrap(),
            settings(0.01),
            0.05,
            0,
        )
        .unwrap();
        assert!(
            (got - expected).abs() <= 1e-4,
            "latent {l}: {got} vs {expected}"
        );
    }
}

#[test]
fn oracle_dominates_qmdp() {
    for params in [
        EnvParams::named("chain").unwrap(),
        EnvParams::named("tiger").unwrap(),
    ] {
        let env = make_env(&params).unwrap();
        let oracle = oracle_optimal_return(&env, settings(0.01), 0.05, 0).unwrap();
        let (mean, se) = environments::with_env!(&env, model => {
            let q = table(model);
            let eval = EvalSettings { episodes: 1000, horizon: 200, gamma: 0.95, seed: 7 };
            let returns = evaluate_policy(model, &QmdpPolicy::new(&q), eval, Exec::Sequential).unwrap();
            mean_and_stderr(&returns.iter().map(|r| r.raw_discounted).collect::<Vec<_>>())
        });
        assert!(
            oracle >= mean - 3.0 * se,
            "{}: oracle {oracle} qmdp {mean} ± {se}",
            params.name()
        );
    }
}

#[test]
fn qmdp_weighs_listening_against_the_safer_door() {
    let model = tiger();
    let q = table(&model);
    let b = belief_update(
        &model,
        model.prior(),
        &TigerState::Start,
        LISTEN,
        &TigerState::HeardLeft,
    )
    .unwrap();
    assert!((b.get(TIGER_LEFT) - 0.85).abs() < 1e-12);
    let values = qmdp_action_values(&q, &model, &TigerState::HeardLeft, &b);
    // Known tiger: listen costs one step before the correct door; opening pays 10 then terminal.
    let open_correct = 110.0 + 0.95 * 2000.0;
    let listen = 99.0 + 0.95 * open_correct;
    let expected = [
        listen,
        0.85 * 1900.0 + 0.15 * open_correct,
        0.85 * open_correct + 0.15 * 1900.0,
    ];
    for (got, want) in values.iter().zip(expected) {
        assert!((got - want).abs() < 1e-3, "{values:?}");
    }
    assert_eq!(qmdp_policy(&q, &model, &TigerState::HeardLeft, &b), LISTEN);
    let sure = Belief::new(vec![0.995, 0.005]).unwrap();
    assert_eq!(
        qmdp_policy(&q, &model, &TigerState::HeardLeft, &sure),
        OPEN_RIGHT
    );
    let sure = Belief::new(vec![0.005, 0.995]).unwrap();
    assert_eq!(
        qmdp_policy(&q, &model, &TigerState::HeardRight, &sure),
        OPEN_LEFT
    );
}

#[test]
fn qmdp_at_vertices_is_latent_greedy() {
    let model = chain();
    let q = table(&model);
    for l in 0..3 {
        let b = Belief::one_hot(3, LatentVar(l));
        for s in 0..5 {
            let best = latent_qsolver::argmax(&q.action_values(&model, &s, LatentVar(l)));
            assert_eq!(QmdpPolicy::new(&q).act(&model, &s, &b), best);
        }
    }
    assert!([ADVANCE, RESET].contains(&qmdp_policy(&q, &model, &0, model.prior())));
}

fn lightdark(sigma: f64) -> LightDarkEnv {
    LightDarkEnv::new(LightDarkParams {
        sigma,
        ..Default::default()
    })
    .unwrap()
}

#[test]
fn qmdp_never_seeks_the_wall() {
    let model = lightdark(0.0);
    let q = table(&model);
    let policy = QmdpPolicy::new(&q);
    for l in 0..2 {
        let start = HyperState {
            state: model.initial_state(),
            latent: LatentVar(l),
        };
        let run = simulate(
            &model,
            &policy,
            start,
            40,
            0.95,
            &mut core_bamdp::episode_rng(0, l as u64),
        )
        .unwrap();
        assert!(run.steps.iter().all(|(_, _, a)| *a != LEFT));
        assert_eq!(run.returns.raw, 0.0);
    }
    for i in 1..=6 {
        for j in 0..=4 {
            let s = LdState::at(i as f64 * 0.5, j as f64 * 0.5);
            assert_ne!(policy.act(&model, &s, model.prior()), LEFT, "{s:?}");
        }
    }
}

#[test]
fn deterministic_lightdark_return_is_left_then_goal() {
    let env = make_env(&EnvParams::named("lightdark").unwrap()).unwrap();
    let value = oracle_optimal_return(&env, settings(0.01), 0.05, 40).unwrap();
    // Three steps to the wall, four across and one up or down; the goal pays 10 on the eighth step.
    assert_eq!(value, 10.0 * 0.95f64.powi(7));
}

#[test]
fn two_phase_value_matches_rollouts_without_noise() {
    let model = lightdark(0.0);
    let oracle = TwoPhaseOracle::solve(&model, table(&model), settings(0.01)).unwrap();
    let start = oracle.start_value(&model).unwrap() - model.reward_shift() / 0.05;
    assert!((start - 10.0 * 0.95f64.powi(7)).abs() < 1e-4, "{start}");
    for l in 0..2 {
        let hs = HyperState {
            state: model.initial_state(),
            latent: LatentVar(l),
        };
        let run = simulate(
            &model,
            &oracle,
            hs,
            40,
            0.95,
            &mut core_bamdp::episode_rng(0, 0),
        )
        .unwrap();
        let actions: Vec<_> = run.steps.iter().map(|(_, _, a)| *a).collect();
        assert_eq!(&actions[..3], &[LEFT; 3]);
        assert!(actions[3..].iter().all(|a| *a != LEFT));
    }
}

#[test]
fn noisy_lightdark_value_is_close_to_noiseless() {
    let env = make_env(&EnvParams::Lightdark(LightDarkParams {
        sigma: 0.01,
        ..Default::default()
    }))
    .unwrap();
    let value = oracle_optimal_return(&env, settings(0.01), 0.05, 40).unwrap();
    assert!((value - 10.0 * 0.95f64.powi(7)).abs() < 0.1, "{value}");
}

#[test]
fn infeasible_instances_are_rejected() {
    let model = lightdark(0.0);
    assert!(matches!(
        BeliefGridOracle::solve(&model, settings(0.01)),
        Err(OracleError::OracleInfeasible(_))
    ));
    let four = ChainEnv::new(ChainParams {
        slips: vec![0.1, 0.3, 0.5, 0.7],
        ..Default::default()
    })
    .unwrap();
    assert!(matches!(
        BeliefGridOracle::solve(&four, settings(0.01)),
        Err(OracleError::OracleInfeasible(_))
    ));
    let tight = OracleSettings {
        cell_budget: 100,
        ..settings(0.01)
    };
    assert!(matches!(
        BeliefGridOracle::solve(&chain(), tight),
        Err(OracleError::OracleInfeasible(_))
    ));
    assert!(matches!(
        BeliefGridOracle::solve(&chain(), settings(1e-4)),
        Err(OracleError::InvalidSettings(_))
    ));
}

proptest! {
    #[test]
    fn snapping_moves_beliefs_by_at_most_the_pitch(
        raw in prop::collection::vec(0.0f64..1.0, 2..=3),
        pitch in prop::sample::select(vec![0.04, 0.02, 0.01, 0.005]),
    ) {
        prop_assume!(raw.iter().sum::<f64>() > 1e-6);
        let b = Belief::new(raw.clone()).unwrap();
        let lattice = SimplexLattice::for_pitch(raw.len(), pitch);
        let snapped = lattice.belief(lattice.snap(&b));
        prop_assert!(snapped.l1_distance(&b) <= pitch + 1e-12);
        prop_assert!(lattice.snap_bound() <= pitch + 1e-12);
    }
}
