use criterion::{criterion_group, criterion_main, Criterion};
use reprel::dfoci::parse_file;
use reprel::env::{ProblemInstance, TaxiEnv};
use reprel::exec::Execution;
use reprel::planner::parse_operators;
use reprel::rl::{train, Domain, TrainConfig, Variant};
use reprel::verifier::{value_iteration_with, VI_TOL};

fn env(text: &str) -> TaxiEnv {
    TaxiEnv::new(ProblemInstance::parse(text).unwrap(), 0.99).unwrap()
}

fn value_iteration(c: &mut Criterion) {
    let mdp = env(include_str!("../../../data/task1.inst")).enumerate(1_000_000).unwrap();
    let mut g = c.benchmark_group("value_iteration_task1");
    for (name, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
        g.bench_function(name, |b| b.iter(|| value_iteration_with(&mdp, VI_TOL, exec)));
    }
    g.finish();
}

// seeds are independent runs, so this is the fan-out the CLI uses
fn seed_fan_out(c: &mut Criterion) {
    let domain = Domain::new(
        parse_file(include_str!("../../../data/taxi.dfoci")).unwrap(),
        parse_operators(include_str!("../../../data/taxi.ops")).unwrap(),
        None,
    )
    .unwrap();
    let env = env(include_str!("../../../data/task1.inst"));
    let cfg = TrainConfig {
        alpha: 0.5,
        seeds: (0..4).collect(),
        total_env_steps: 5_000,
        epsilon_decay_steps: 2_500,
        ..TrainConfig::default()
    };
    let mut g = c.benchmark_group("train_seeds_task1");
    g.sample_size(10);
    for (name, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
        g.bench_function(name, |b| {
            b.iter(|| train(Variant::Reprel, &domain, &env, &cfg, Vec::new(), exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, value_iteration, seed_fan_out);
criterion_main!(benches);
