use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use riesz_bench::gaussian_pair;
use riesz_core::multiplier::{apply_bilinear_with, BilinearOptions, BilinearPath, BilinearSymbol};
use riesz_core::Grid;

fn paths(c: &mut Criterion) {
    let mut group = c.benchmark_group("bilinear_full_symbol");
    group.sample_size(10);
    for samples in [256usize, 1024] {
        let grid = Grid::new(1, 32.0, samples).unwrap();
        let (f, g) = gaussian_pair(grid).unwrap();
        let symbol = BilinearSymbol::Full {
            alpha: 1.0,
            r: 0.9 * grid.nyquist(),
        };
        for (name, path) in [
            ("tensor", BilinearPath::Tensor),
            ("loop", BilinearPath::Loop),
        ] {
            let opts = BilinearOptions {
                path,
                memory_budget: u64::MAX,
            };
            group.bench_with_input(BenchmarkId::new(name, samples), &samples, |b, _| {
                b.iter(|| apply_bilinear_with(&symbol, &f, &g, &opts).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, paths);
criterion_main!(benches);
