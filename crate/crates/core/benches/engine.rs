use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fracquant::construction::build_alpha_f;
use fracquant::distortion::{distortion, DistortionOptions, Target};
use fracquant::oracle::{verify_many, OracleOptions};
use fracquant::{Execution, Variant};

const MODES: [(&str, Execution); 2] = [
    ("parallel", Execution::Parallel),
    ("sequential", Execution::Sequential),
];

fn distortion_bench(c: &mut Criterion) {
    let mut group = c.benchmark_group("distortion_alpha_f");
    group.sample_size(10);
    for (variant, n) in [(Variant::Nu1, 7), (Variant::Nu2, 8)] {
        let sys = variant.system();
        let alpha = build_alpha_f(variant, n).unwrap();
        for (name, exec) in MODES {
            let opts = DistortionOptions::default().with_execution(exec);
            group.bench_with_input(
                BenchmarkId::new(name, format!("{variant}-n{n}")),
                &alpha,
                |b, alpha| b.iter(|| distortion(alpha, Target::P, &sys, &opts).unwrap()),
            );
        }
    }
    group.finish();
}

fn oracle_bench(c: &mut Criterion) {
    let mut group = c.benchmark_group("oracle_m1_to_8");
    group.sample_size(10);
    let cases: Vec<(Variant, u64)> = (1..=8).map(|m| (Variant::Nu3, m)).collect();
    let opts = OracleOptions {
        depth_p: 7,
        depth_nu: 7,
        ..OracleOptions::default()
    };
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| verify_many(&cases, &opts, exec).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, distortion_bench, oracle_bench);
criterion_main!(benches);
