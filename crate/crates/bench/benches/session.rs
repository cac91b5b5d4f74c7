use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use familiar_core::config::{parse_config, serialize, DEFAULT_CONFIG};
use familiar_core::session::{export_ndjson, parse_script, replay};
use familiar_core::{Config, SessionOptions};

const GOLDEN: &str = include_str!("../../core/data/golden_script.ndjson");

fn golden_replay(c: &mut Criterion) {
    let config = Config::default_scenario();
    let script = parse_script(GOLDEN).unwrap();
    c.bench_function("golden_replay", |b| {
        b.iter(|| black_box(replay(&script, &config, SessionOptions::default()).metrics))
    });
    let log = replay(&script, &config, SessionOptions::default()).log;
    c.bench_function("export_golden_log", |b| b.iter(|| black_box(export_ndjson(&log))));
}

fn config_round_trip(c: &mut Criterion) {
    c.bench_function("parse_default_config", |b| b.iter(|| black_box(parse_config(DEFAULT_CONFIG).unwrap())));
    let config = Config::default_scenario();
    c.bench_function("serialize_default_config", |b| b.iter(|| black_box(serialize(&config))));
}

criterion_group!(benches, golden_replay, config_round_trip);
criterion_main!(benches);
