use std::collections::BTreeMap;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use dqopt::engine::{solve, QaoaSubSolver, SolverConfig};
use dqopt::optics::{decode_structure, default_grid, transmission_spectrum, Material, MaterialDb, MaterialTable};
use dqopt::oracle::brute_force;
use dqopt::par::{available_cpus, WorkerPool};
use dqopt::QuboMatrix;

fn dqaoa(c: &mut Criterion) {
    let mut g = c.benchmark_group("dqaoa");
    g.sample_size(10);
    let workers = available_cpus().max(2);
    for n in [30usize, 60] {
        let q = QuboMatrix::gaussian(n, 1).unwrap();
        let mut cfg = SolverConfig::dqaoa(n).with_seed(1);
        cfg.iterations = 3;
        let solver = QaoaSubSolver::new(cfg.qaoa.clone());
        let seq = WorkerPool::sequential();
        let par = WorkerPool::new(workers).unwrap();
        g.bench_with_input(BenchmarkId::new("sequential", n), &n, |b, _| {
            b.iter(|| solve(&q, &cfg, &solver, &seq).unwrap())
        });
        g.bench_with_input(BenchmarkId::new(format!("workers-{workers}"), n), &n, |b, _| {
            b.iter(|| solve(&q, &cfg, &solver, &par).unwrap())
        });
    }
    g.finish();
}

fn oracle(c: &mut Criterion) {
    let mut g = c.benchmark_group("brute_force");
    g.sample_size(10);
    for n in [16usize, 20] {
        let q = QuboMatrix::gaussian(n, 2).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| b.iter(|| brute_force(&q).unwrap()));
    }
    g.finish();
}

fn spectrum(c: &mut Criterion) {
    let mut t = BTreeMap::new();
    for (m, n) in Material::ALL.into_iter().zip([1.46, 2.0, 1.77, 2.6]) {
        t.insert(m, MaterialTable::constant(n, 0.0));
    }
    let db = MaterialDb::new(t);
    let grid = default_grid();
    let bits: Vec<u8> = "000110111001".bytes().map(|b| b - b'0').collect();
    let stack = decode_structure(&bits).unwrap();
    c.bench_function("transmission_spectrum", |b| {
        b.iter(|| transmission_spectrum(&stack, &db, &grid).unwrap())
    });
}

criterion_group!(benches, dqaoa, oracle, spectrum);
criterion_main!(benches);
