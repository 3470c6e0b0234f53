use agripath::agents::{ActorCriticConfig, DqnVariant};
use agripath::env::{ContinuousFarm, GridAction, GridWorld};
use agripath::nn::{Activation, Matrix, Mlp};
use agripath_bench::{actor_critic_agent, dqn_agent, field_batch, grid_batch, rng};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn mlp_forward_backward(c: &mut Criterion) {
    let mut group = c.benchmark_group("mlp_batch64");
    for width in [64, 128, 256] {
        let net = Mlp::dense(&[100, width, width, 4], Activation::Relu, Activation::Linear, &mut rng(1)).unwrap();
        let input = Matrix::from_vec(64, 100, (0..6400).map(|i| (i % 7) as f64 / 7.0).collect()).unwrap();
        let grad = Matrix::from_vec(64, 4, vec![0.01; 256]).unwrap();
        group.bench_with_input(BenchmarkId::new("forward", width), &width, |b, _| {
            b.iter(|| net.forward_batch(black_box(&input)).unwrap())
        });
        let trace = net.forward_batch(&input).unwrap();
        group.bench_with_input(BenchmarkId::new("backward", width), &width, |b, _| {
            b.iter(|| net.backward(black_box(&trace), black_box(&grad)).unwrap())
        });
    }
    group.finish();
}

fn dqn_train_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("dqn_train_step");
    let batch = grid_batch(64, 64, 2);
    let refs: Vec<_> = batch.iter().collect();
    for variant in [DqnVariant::Dqn, DqnVariant::Double, DqnVariant::Dueling] {
        let mut agent = dqn_agent(variant, 64, 128);
        group.bench_function(variant.as_str(), |b| b.iter(|| agent.train_step(black_box(&refs)).unwrap()));
    }
    group.finish();
}

fn actor_critic_update(c: &mut Criterion) {
    let mut group = c.benchmark_group("actor_critic_update");
    let batch = field_batch(64, 3);
    let refs: Vec<_> = batch.iter().collect();
    for hidden in [64, 256] {
        let mut r = rng(4);
        let mut ddpg = actor_critic_agent(ActorCriticConfig::ddpg(), hidden);
        group.bench_with_input(BenchmarkId::new("ddpg", hidden), &hidden, |b, _| {
            b.iter(|| ddpg.ddpg_update(black_box(&refs)).unwrap())
        });
        let mut td3 = actor_critic_agent(ActorCriticConfig::td3(), hidden);
        group.bench_with_input(BenchmarkId::new("td3", hidden), &hidden, |b, _| {
            b.iter(|| td3.td3_update(black_box(&refs), &mut r).unwrap())
        });
    }
    group.finish();
}

fn environment_steps(c: &mut Criterion) {
    let mut group = c.benchmark_group("env_step");
    let mut grid = GridWorld::canonical_8x8(true);
    let mut r = rng(5);
    group.bench_function("grid_slippery", |b| {
        b.iter(|| {
            if grid.step(GridAction::Right, &mut r).map(|s| s.done()).unwrap_or(true) {
                grid.reset();
            }
        })
    });
    let mut field = ContinuousFarm::builtin(3).unwrap();
    group.bench_function("field_scenario3", |b| {
        b.iter(|| {
            if field.step(black_box([0.3, 0.4])).map(|s| s.done()).unwrap_or(true) {
                field.reset();
            }
        })
    });
    group.finish();
}

criterion_group!(benches, mlp_forward_backward, dqn_train_step, actor_critic_update, environment_steps);
criterion_main!(benches);
