use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use ipiag::problems::{make_lasso, make_toy, LassoSpec, ToySpec};
use ipiag::schedule::{schedule_uniform_single, BlockPartition};
use ipiag::solver::{ipiag_step, run, RunOptions, SolverParams};
use ipiag::{full_gradient, IterateState};

fn step(c: &mut Criterion) {
    let problem = make_toy(&ToySpec::paper()).unwrap();
    let x = vec![0.5; 100];
    let g = full_gradient(&problem, &x).unwrap();
    let state = IterateState::new(&x);
    let params = SolverParams::new(1e-4, 0.1, 0.1, 1).unwrap();
    c.bench_function("ipiag_step/toy100", |b| {
        b.iter(|| ipiag_step(black_box(&state), &params, black_box(&g), problem.regularizer()).unwrap())
    });
}

fn toy_runs(c: &mut Criterion) {
    let problem = make_toy(&ToySpec::paper()).unwrap();
    let partition = BlockPartition::contiguous(100, 4).unwrap();
    let schedule = schedule_uniform_single(4, 4, 1000, 1).unwrap();
    let mut group = c.benchmark_group("toy_run_1000");
    for (label, options) in [
        ("with_objective", RunOptions::default()),
        ("without_objective", RunOptions::default().without_objective()),
    ] {
        let params = SolverParams::new(1.2e-4, 3e-5, 1e-5, 1000).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(label), &options, |b, options| {
            b.iter(|| run(&problem, &params, &partition, &schedule, &[0.0; 100], options).unwrap())
        });
    }
    group.finish();
}

fn lasso_blocks(c: &mut Criterion) {
    let problem = make_lasso(&LassoSpec::desk(1)).unwrap();
    let x = vec![0.1; 200];
    c.bench_function("lasso_block_gradient/20x200", |b| {
        b.iter(|| {
            let mut out = vec![0.0; 200];
            problem.smooth().add_block_gradient(0..20, black_box(&x), &mut out);
            out
        })
    });
}

fn schedules(c: &mut Criterion) {
    c.bench_function("schedule_uniform_single/4x10000", |b| {
        b.iter(|| schedule_uniform_single(4, 4, 10_000, black_box(7)).unwrap())
    });
}

criterion_group!(benches, step, toy_runs, lasso_blocks, schedules);
criterion_main!(benches);
