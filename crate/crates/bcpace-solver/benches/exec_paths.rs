//! Parallel against sequential execution of the hot paths.
//!
//! Without the `parallel` feature both variants run sequentially.

use bcpace_solver::{run, QEstimate, SolverConfig};
use core_bamdp::{evaluate_policy, EvalSettings, Exec};
use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use environments::{ChainEnv, ChainParams};
use latent_qsolver::{solve_latent_q, LatentSolveSettings};

fn chain_config() -> SolverConfig {
    SolverConfig {
        k: 10,
        n_batch: 20,
        horizon: 50,
        epsilon_d: Some(1.0),
        lipschitz_q: Some(5.0),
        alpha: Some(1.0),
        ..Default::default()
    }
}

fn trained_chain() -> (ChainEnv, QEstimate<usize>) {
    let model = ChainEnv::new(ChainParams::default()).unwrap();
    let table = solve_latent_q(&model, LatentSolveSettings::default(), Exec::Sequential).unwrap();
    let qe = run(&model, chain_config(), Some(table), Exec::Parallel)
        .unwrap()
        .estimate;
    (model, qe)
}

fn exec_paths(c: &mut Criterion) {
    let (model, qe) = trained_chain();
    let mut group = c.benchmark_group("fixed_point");
    group.sample_size(10);
    for (name, exec) in [
        ("parallel", Exec::Parallel),
        ("sequential", Exec::Sequential),
    ] {
        group.bench_function(name, |b| {
            b.iter_batched(
                || qe.clone(),
                |mut qe| qe.fixed_point(&model, exec),
                BatchSize::LargeInput,
            )
        });
    }
    group.finish();

    let settings = EvalSettings {
        episodes: 200,
        horizon: 150,
        gamma: 0.95,
        seed: 1,
    };
    let mut group = c.benchmark_group("evaluate");
    group.sample_size(10);
    for (name, exec) in [
        ("parallel", Exec::Parallel),
        ("sequential", Exec::Sequential),
    ] {
        group.bench_function(name, |b| {
            b.iter(|| evaluate_policy(&model, &qe, settings, exec).unwrap())
        });
    }
    group.finish();

    let config = chain_config();
    let table = qe.latent_q().cloned();
    let mut group = c.benchmark_group("train");
    group.sample_size(10);
    for (name, exec) in [
        ("parallel", Exec::Parallel),
        ("sequential", Exec::Sequential),
    ] {
        group.bench_function(name, |b| {
            b.iter(|| run(&model, config.clone(), table.clone(), exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, exec_paths);
criterion_main!(benches);
