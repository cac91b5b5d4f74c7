use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use familiar_core::nlu::{default_catalogue, parse_utterance};
use familiar_core::sim::{OccupancyGrid, Point, RegionLearner};
use familiar_core::Config;

fn learner(samples: usize) -> RegionLearner {
    let mut l = RegionLearner::new(3.0);
    for i in 0..samples {
        let t = i as f64 * 0.618;
        l.add((t * 7.3) % 10.0, (t * 3.1) % 8.0, ["kitchen", "hall", "entrance"][i % 3]);
    }
    l
}

fn classify(c: &mut Criterion) {
    let mut group = c.benchmark_group("classify");
    for n in [3, 30, 300] {
        let l = learner(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &l, |b, l| {
            b.iter(|| black_box(l.classify(black_box(Point::new(4.2, 3.7)))))
        });
    }
    group.finish();
}

fn floor_grid(c: &mut Criterion) {
    let config = Config::default_scenario();
    let l = learner(6);
    c.bench_function("floor_grid_0.25m", |b| b.iter(|| black_box(l.floor_grid(&config.apartment.apartment, 0.25))));
}

fn path_planning(c: &mut Criterion) {
    let config = Config::default_scenario();
    let grid = OccupancyGrid::build(&config.apartment.apartment, 0.1, 0.15);
    let (from, to) = (config.apartment.robot_start, Point::new(2.0, 5.5));
    c.bench_function("plan_across_apartment", |b| b.iter(|| black_box(grid.plan(from, to))));
}

fn nlu(c: &mut Criterion) {
    let catalogue = default_catalogue();
    let mut group = c.benchmark_group("parse_utterance");
    for text in ["learn the region kitchen", "  We ARRIVED!! ", "make me a sandwich"] {
        group.bench_with_input(BenchmarkId::from_parameter(text.trim()), text, |b, text| {
            b.iter(|| black_box(parse_utterance(text, &catalogue)))
        });
    }
    group.finish();
}

criterion_group!(benches, classify, floor_grid, path_planning, nlu);
criterion_main!(benches);
