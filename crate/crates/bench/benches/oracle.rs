use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use polynet::dimension::jacobian_ff_stacked;
use polynet::network::forward;
use polynet::search::{find_minimal_filling, SearchSpec};
use polynet::{dimension, DimensionConfig, ExactMatrix, MonomialBasis, PrimeField};
use polynet_bench::{arch, instance, PRIME};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rank(c: &mut Criterion) {
    let field = PrimeField::new(PRIME).unwrap();
    let mut group = c.benchmark_group("rank_fp");
    for n in [32usize, 96, 256] {
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        let m = ExactMatrix::from_fn(field, n, n, |_, _| rng.gen_range(0..PRIME));
        group.bench_with_input(BenchmarkId::from_parameter(n), &m, |b, m| b.iter(|| m.rank()));
    }
    group.finish();
}

fn forward_pass(c: &mut Criterion) {
    let a = arch("2,3,4,5,6,4,2,1", 2);
    let (theta, _) = instance(&a, 0, 1);
    c.bench_function("forward_depth7", |b| b.iter(|| forward(&a, &theta).unwrap()));
}

fn stacked_jacobian(c: &mut Criterion) {
    let mut group = c.benchmark_group("jacobian_stacked");
    for (w, r) in [("2,3,2,3,4", 3u32), ("2,3,4,5,6,4,2,1", 2), ("2,3,4,5,7,7,6,2,1", 2)] {
        let a = arch(w, r);
        let n = MonomialBasis::shared(a.input_dim(), a.output_degree().unwrap()).unwrap().len();
        let (theta, points) = instance(&a, n + 5, 2);
        group.bench_function(w, |b| b.iter(|| jacobian_ff_stacked(&a, &theta, &points).unwrap()));
    }
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("dimension");
    group.sample_size(10);
    for (w, r) in [("3,2,1", 6u32), ("2,3,2,3,4", 6), ("2,3,4,8,8,8,8,8,4,1", 2)] {
        let a = arch(w, r);
        group.bench_function(format!("{w};r={r}"), |b| b.iter(|| dimension(&a, &DimensionConfig::default()).unwrap()));
    }
    group.finish();
}

fn search(c: &mut Criterion) {
    let mut group = c.benchmark_group("search");
    group.sample_size(10);
    for h in [5usize, 6] {
        group.bench_function(format!("depth{h}"), |b| b.iter(|| find_minimal_filling(&SearchSpec::new(h, 2, 1, 2)).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, rank, forward_pass, stacked_jacobian, oracle, search);
criterion_main!(benches);
