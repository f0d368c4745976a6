use std::path::{Path, PathBuf};

use reprel::env::{ProblemInstance, TaxiEnv};
use reprel::exec::Execution;
use reprel::rl::{evaluate, train, Agents, Domain, TrainConfig, Variant};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

#[test]
fn saved_tables_reload_to_the_same_policy() {
    let domain = Domain::load(&data("taxi.dfoci"), &data("taxi.ops"), None).unwrap();
    let env = TaxiEnv::new(ProblemInstance::load(&data("task1.inst")).unwrap(), 0.99).unwrap();
    let cfg = TrainConfig {
        alpha: 0.5,
        seeds: vec![3],
        total_env_steps: 20_000,
        epsilon_decay_steps: 10_000,
        eval_every: 5_000,
        ..TrainConfig::default()
    };
    for variant in Variant::ALL {
        let out = train(variant, &domain, &env, &cfg, Vec::new(), Execution::Sequential).unwrap();
        let trained = &out.runs[0].agents;
        let dir = tempfile::tempdir().unwrap();
        trained.save(dir.path()).unwrap();
        let mut reloaded = Agents::new(variant, &domain, env.available_actions(), cfg.option_budget);
        reloaded.load(dir.path()).unwrap();
        for ((na, qa), (nb, qb)) in trained.tables().iter().zip(reloaded.tables()) {
            assert_eq!(*na, nb);
            assert_eq!(qa.to_text(), qb.to_text());
        }
        assert_eq!(
            evaluate(trained, &env, &domain, 20).unwrap(),
            evaluate(&reloaded, &env, &domain, 20).unwrap()
        );
    }
}

#[test]
fn continuing_from_loaded_tables_starts_where_training_stopped() {
    let domain = Domain::load(&data("taxi.dfoci"), &data("taxi.ops"), None).unwrap();
    let env = TaxiEnv::new(ProblemInstance::load(&data("task1.inst")).unwrap(), 0.99).unwrap();
    let cfg = TrainConfig {
        alpha: 0.5,
        seeds: vec![0],
        total_env_steps: 20_000,
        epsilon_decay_steps: 10_000,
        eval_every: 5_000,
        ..TrainConfig::default()
    };
    let first = train(Variant::Reprel, &domain, &env, &cfg, Vec::new(), Execution::Sequential).unwrap();
    let last = first.curve.points.last().unwrap().mean_reward;
    let init = vec![Some(first.runs[0].agents.clone())];
    let second = train(Variant::Reprel, &domain, &env, &cfg, init, Execution::Sequential).unwrap();
    assert_eq!(second.curve.points[0].mean_reward, last);
}
