use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use verinet::compilers::{sat3_to_reach, Cnf3};
use verinet::exec::Exec;
use verinet::exists::Solver;
use verinet::logic::parser::parse_formula;
use verinet::lra::Decider;
use verinet::transformer::build_argmax_transformer;
use verinet::Rational;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn argmax(c: &mut Criterion) {
    let t = build_argmax_transformer();
    let xs: Vec<Vec<Rational>> = (0..64).map(|i| vec![Rational::new((i * 37) % 101, 7)]).collect();
    let mut g = c.benchmark_group("argmax_transformer");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| t.s2s_with(&xs, exec).unwrap()));
    }
    g.finish();
}

fn decider(c: &mut Criterion) {
    let phi = parse_formula("forall x. forall y. (x < y => exists z. (x < z && z < y))").unwrap();
    let mut g = c.benchmark_group("lra_decider");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| Decider::new(exec).decide(&phi).unwrap()));
    }
    g.finish();
}

fn reach(c: &mut Criterion) {
    // Satisfiable only by x1 = x2 = x3 = 1 after the last clause, so the search runs deep.
    let cnf = Cnf3::new(
        6,
        vec![[1, 2, 3], [-1, 4, 5], [-2, -4, 6], [3, -5, -6], [1, -3, 4], [-4, 5, 6], [2, 3, -6], [1, 1, 1], [2, 2, 2], [3, 3, 3]],
    )
    .unwrap();
    let inst = sat3_to_reach(&cnf);
    let mut g = c.benchmark_group("sat_reachability");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| Solver::new(exec).solve_reach(&inst).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, argmax, decider, reach);
criterion_main!(benches);
