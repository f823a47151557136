use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use keepaway::game::{Game, GameConfig};
use keepaway::geometry::Point;
use keepaway::par::Execution;
use keepaway::playbook::{candidate_configs, Playbook, PlaybookParams};
use keepaway::sim::{run_batch, EvaderSpec, PursuerSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn playbook(c: &mut Criterion) {
    let mut group = c.benchmark_group("playbook");
    group.sample_size(10);
    for (n, m, k) in [(5, 2, 0.32), (6, 3, 0.45)] {
        let game = Game::new(GameConfig::regular(n, m, k)).unwrap();
        let configs = candidate_configs(&game, &PlaybookParams::default());
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, format!("{n}-{m}")), &configs, |b, cfgs| {
                b.iter(|| Playbook::from_configs(&game, cfgs.clone(), exec))
            });
        }
    }
    group.finish();
}

fn batch(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_batch");
    group.sample_size(10);
    let game = Arc::new(Game::new(GameConfig::regular(5, 2, 0.32)).unwrap());
    let horizon = 100.0 * game.max_lane_time();
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new(name, "lion-64"), |b| {
            b.iter(|| run_batch(&game, &PursuerSpec::Lion, &EvaderSpec::Greedy, 0..64, horizon, None, exec).unwrap())
        });
    }
    group.finish();
}

fn blocks_monte_carlo(c: &mut Criterion) {
    let mut group = c.benchmark_group("blocks_monte_carlo");
    let game = Game::new(GameConfig::regular(7, 3, 0.4)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let pts: Vec<Point> = (0..20_000).map(|_| Point::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5))).collect();
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new(name, pts.len()), |b| {
            b.iter(|| {
                exec.map(&pts, |&p| game.lanes().iter().filter(|l| game.blocks(p, l.from, l.to)).count())
                    .into_iter()
                    .sum::<usize>()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, playbook, batch, blocks_monte_carlo);
criterion_main!(benches);
