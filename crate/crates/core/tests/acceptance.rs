//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use riesz_core::bump::{partition_residual, partition_tail};
use riesz_core::exponents::{alpha_star, critical_index, threshold_dim1};
use riesz_core::grid::{make_test_bank, Generator, TestBank};
use riesz_core::kernels::{closed_form_kernel, kernel_vs_transform, windowed_l1_mass};
use riesz_core::multiplier::{
    apply_bilinear_with, bench_paths, c_alpha, reconstruct_bilinear, saturation_index,
    steinweiss_check, BilinearOptions, BilinearPath, BilinearSymbol, DecompositionSplit,
};
use riesz_core::operators::{
    breakpoint_tgrid, decomposition_identity_check, g_tgrid, k_j_kernel, square_function_g,
    telescoping_check, RGrid,
};
use riesz_core::probe::{convergence_probe, dyadic_decay_fit};
use riesz_core::quad::{integrate, AdaptiveOptions};
use riesz_core::{Exponent, ExponentTriple, Grid, SampledField, Space};

type Outcome = Result<(bool, String), Box<dyn std::error::Error>>;
type Criterion = (&'static str, fn() -> Outcome);

fn opts(path: BilinearPath) -> BilinearOptions {
    BilinearOptions {
        path,
        ..Default::default()
    }
}

fn gaussian(grid: Grid, center: f64, width: f64) -> SampledField {
    SampledField::from_fn(grid, |x| {
        Complex64::new((-PI * ((x[0] - center) / width).powi(2)).exp(), 0.0)
    })
}

fn partition() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let t: f64 = rng.gen_range(0.0..1.0);
        let big_j = rng.gen_range(2..=20);
        worst = worst.max((partition_residual(t, big_j)? - partition_tail(t, big_j)).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((
        worst <= 1e-14 && secs < 1.0,
        format!("max |residual - tail| {worst:.2e}, {secs:.3} s"),
    ))
}

fn steinweiss() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let split = DecompositionSplit::new(rng.gen_range(0.55..3.0), rng.gen_range(-0.45..2.0))?;
        let r = rng.gen_range(0.5..4.0);
        let phi: f64 = rng.gen_range(0.05..=1.0);
        let eta = rng.gen_range(0.0..0.999) * r * phi.sqrt();
        worst = worst.max(steinweiss_check(&split, r, phi, eta)?.rel_err);
    }
    // 2/B(β, δ+1) with B(1,1) = 1 and B(1,2) = 1/2
    let beta_integral = |delta: f64| {
        integrate(
            |t| (1.0 - t).powf(delta),
            0.0,
            1.0,
            AdaptiveOptions::default(),
        )
        .value
    };
    let c10 = c_alpha(1.0, 0.0)?;
    let c11 = c_alpha(1.0, 1.0)?;
    let oracle_ok = (2.0 / beta_integral(0.0) - 2.0).abs() < 1e-14
        && (2.0 / beta_integral(1.0) - 4.0).abs() < 1e-14;
    let secs = start.elapsed().as_secs_f64();
    Ok((
        worst <= 1e-8 && c10 == 2.0 && c11 == 4.0 && oracle_ok && secs < 10.0,
        format!("max rel_err {worst:.2e}, c(1,0)={c10}, c(1,1)={c11}, {secs:.2} s"),
    ))
}

fn decomposition() -> Outcome {
    let start = Instant::now();
    let grid = Grid::new(1, 64.0, 512)?;
    let r = 0.5 * grid.nyquist();
    let mut f = SampledField::zeros(grid, Space::Physical);
    for j in 2..=6 {
        let k = (grid.box_length * r * (1.0 - 2f64.powi(-j)).sqrt()).round() as i64;
        f.add_assign(&SampledField::tone(
            grid,
            [k, 0],
            Complex64::new(1.0 / j as f64, 0.3),
        ))?;
    }
    let mut g = SampledField::tone(grid, [3, 0], Complex64::new(0.7, 0.0));
    g.add_assign(&SampledField::tone(
        grid,
        [-10, 0],
        Complex64::new(0.0, 0.4),
    ))?;
    g.add_assign(&SampledField::tone(grid, [0, 0], Complex64::new(0.2, 0.0)))?;
    let mut worst: f64 = 0.0;
    for (beta, delta) in [(1.0, 0.0), (1.5, 0.5)] {
        let split = DecompositionSplit::new(beta, delta)?;
        for j in 2..=6 {
            let tg = breakpoint_tgrid(&f, &g, j, &split, r, 400)?;
            let rep =
                decomposition_identity_check(&f, &g, j, &split, r, &tg, &opts(BilinearPath::Auto))?;
            worst = worst.max(rep.rel_err);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((
        worst <= 1e-6 && secs < 120.0,
        format!("max rel_err {worst:.2e} over j=2..6 and two splits, {secs:.2} s"),
    ))
}

fn reconstruction() -> Outcome {
    let start = Instant::now();
    let grid = Grid::new(1, 32.0, 256)?;
    let bank = TestBank::default_bank(grid)?;
    let (alpha, r) = (0.5, 0.5 * grid.nyquist());
    let big_j = saturation_index(&grid, r);
    let mut worst: f64 = 0.0;
    let mut bound: f64 = 0.0;
    for e in &bank.entries {
        let rec = reconstruct_bilinear(alpha, r, big_j, &e.f, &e.g, &opts(BilinearPath::Auto))?;
        let full = apply_bilinear_with(
            &BilinearSymbol::Full { alpha, r },
            &e.f,
            &e.g,
            &opts(BilinearPath::Auto),
        )?;
        worst = worst.max(rec.field.max_abs_diff(&full)? / full.max_abs().max(1.0));
        bound = bound.max(rec.residual_bound);
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((
        worst <= 1e-10 && bound == 0.0 && secs < 60.0,
        format!(
            "J={big_j}, max diff {worst:.2e} over {} entries, {secs:.2} s",
            bank.len()
        ),
    ))
}

fn plancherel() -> Outcome {
    let grid = Grid::new(1, 32.0, 512)?;
    let bank = TestBank::default_bank(grid)?;
    // sqrt((α+1)/(2α+1))
    let oracle = [
        (0.0, 1.0),
        (0.5, 0.8660254037844386),
        (1.0, 0.816496580927726),
    ];
    let mut worst: f64 = 0.0;
    let mut line = Vec::new();
    for (alpha, want) in oracle {
        let mut dev: f64 = 0.0;
        for e in &bank.entries {
            let mean = e.f.values().iter().sum::<Complex64>() / grid.len() as f64;
            let f = e.f.map(|v| v - mean);
            let g = square_function_g(&f, alpha, &g_tgrid(&f, alpha, 6, 3.0)?)?;
            dev = dev.max((g.field.lp_norm(2.0)? / f.lp_norm(2.0)? - want).abs());
        }
        line.push(format!("alpha={alpha}: {dev:.1e}"));
        worst = worst.max(dev);
    }
    Ok((
        worst <= 1e-3,
        format!("max |ratio - oracle| {}", line.join(", ")),
    ))
}

fn kernel() -> Outcome {
    let cmp = kernel_vs_transform(1.0, 1.0, 1, 256.0, 512, 10.0)?;
    let origin = closed_form_kernel(&[0.0], &[0.0], 0.0, 1.0, 1)?;
    let windows = [5.0, 10.0, 20.0, 40.0, 80.0];
    let above = windowed_l1_mass(2.0, 1.0, 1, &windows)?;
    let below = windowed_l1_mass(0.0, 1.0, 1, &windows)?;
    Ok((
        cmp.rel_err <= 1e-4
            && (origin - PI).abs() <= 1e-8
            && above.converging()
            && below.diverging(),
        format!(
            "rel_err {:.2e}, origin-pi {:.1e}, alpha=2 increments {:?}, alpha=0 increments {:?}",
            cmp.rel_err,
            (origin - PI).abs(),
            above
                .increments()
                .iter()
                .map(|v| format!("{v:.2e}"))
                .collect::<Vec<_>>(),
            below
                .increments()
                .iter()
                .map(|v| format!("{v:.2}"))
                .collect::<Vec<_>>(),
        ),
    ))
}

fn shell_kernel() -> Outcome {
    let start = Instant::now();
    let mut cs = Vec::new();
    for j in 8..=16 {
        cs.push(k_j_kernel(j, 16.0, 400, 8, 600)?.c_j);
    }
    let max = cs.iter().cloned().fold(0.0, f64::max);
    let min = cs.iter().cloned().fold(f64::INFINITY, f64::min);
    let secs = start.elapsed().as_secs_f64();
    Ok((
        max / min <= 4.0 && secs < 30.0,
        format!(
            "C_j in [{min:.4}, {max:.4}], max/min {:.4}, {secs:.2} s",
            max / min
        ),
    ))
}

fn decay() -> Outcome {
    let grid = Grid::new(1, 256.0, 4096)?;
    let (f, g) = (gaussian(grid, 128.0, 0.15), gaussian(grid, 128.0, 0.15));
    let triple = ExponentTriple::new(Exponent::int(2), Exponent::int(2))?;
    let rgrid = RGrid::new(vec![6.0, 6.5, 7.0, 7.5, 8.0], 16)?;
    let o = opts(BilinearPath::Loop);
    let a = dyadic_decay_fit(&f, &g, 0.5, &triple, 3..=9, &rgrid, &o)?;
    let b = dyadic_decay_fit(&f, &g, 0.75, &triple, 3..=9, &rgrid, &o)?;
    let shift = b.slope - a.slope;
    Ok((
        a.slope <= -0.4 && (shift + 0.25).abs() <= 0.1,
        format!(
            "slope(0.5) {:.3}, slope(0.75) {:.3}, shift {shift:.3}",
            a.slope, b.slope
        ),
    ))
}

fn convergence() -> Outcome {
    let grid = Grid::new(1, 16.0, 128)?;
    let bank = make_test_bank(42, 1, &[Generator::RandomBandlimited], grid)?;
    let e = &bank.entries[0];
    let ny = grid.nyquist();
    let radii = (0..11)
        .map(|i| ny / 32.0 * 32f64.powf(i as f64 / 10.0))
        .collect();
    let band = convergence_probe(
        &e.f,
        &e.g,
        0.0,
        &RGrid::new(radii, 16)?,
        2.0,
        &opts(BilinearPath::Auto),
    )?;

    let grid = Grid::new(1, 16.0, 1024)?;
    let (f, g) = (gaussian(grid, 8.0, 1.0), gaussian(grid, 8.3, 1.3));
    let h = grid.nyquist() / 2.0;
    let radii = (0..=8)
        .map(|k| h * 2f64.powf((k as f64 - 8.0) / 2.0))
        .collect();
    let smooth = convergence_probe(
        &f,
        &g,
        1.0,
        &RGrid::new(radii, 16)?,
        2.0,
        &opts(BilinearPath::Auto),
    )?;
    Ok((
        band.capture_index.is_some()
            && band.saturated()
            && smooth.final_error() < 1e-3
            && smooth.monotone_tail,
        format!(
            "bandlimited: band {:.3}, captured {:?}, final {:.1e} <= floor {:.1e}; gaussian: final {:.2e} at R={h}, monotone {}",
            band.band_radius,
            band.capture_index,
            band.final_error(),
            band.floor,
            smooth.final_error(),
            smooth.monotone_tail
        ),
    ))
}

fn exponents() -> Outcome {
    let inf = Exponent::Infinite;
    let four = Exponent::int(4);
    let three_halves = Exponent::new(3, 2)?;
    let a = alpha_star(2, inf, inf)?;
    let b = alpha_star(2, four, four)?;
    let c = threshold_dim1(three_halves, three_halves)?;
    let d = critical_index(1);
    Ok((
        a == 1.0 && b == 0.0 && (c - 1.0 / 3.0).abs() < 1e-15 && d == 0.5,
        format!("alpha*(2,inf,inf)={a}, alpha*(2,4,4)={b}, dim1(3/2,3/2)={c}, critical(1)={d}"),
    ))
}

fn paths() -> Outcome {
    let grid = Grid::new(1, 32.0, 512)?;
    let bank = TestBank::default_bank(grid)?;
    let r = 0.5 * grid.nyquist();
    let symbols = [
        BilinearSymbol::Full { alpha: 1.0, r },
        BilinearSymbol::Piece {
            j: 3,
            alpha: 0.5,
            r,
        },
        BilinearSymbol::Tail { alpha: 0.5, r },
    ];
    let mut agree: f64 = 0.0;
    for e in &bank.entries {
        for m in &symbols {
            let a = apply_bilinear_with(m, &e.f, &e.g, &opts(BilinearPath::Tensor))?;
            let b = apply_bilinear_with(m, &e.f, &e.g, &opts(BilinearPath::Loop))?;
            agree = agree.max(a.max_abs_diff(&b)?);
        }
    }
    let bench = bench_paths(Grid::new(1, 32.0, 1024)?, 3)?;
    Ok((
        agree <= 1e-10 && bench.max_diff <= 1e-10 && bench.speedup >= 2.0,
        format!(
            "bank max diff {agree:.2e}; N=1024 tensor {:.4} s, loop {:.4} s, speedup {:.1}",
            bench.tensor_secs, bench.loop_secs, bench.speedup
        ),
    ))
}

fn telescope() -> Outcome {
    let grid = Grid::new(1, 32.0, 512)?;
    let bank = TestBank::default_bank(grid)?;
    let mut worst: f64 = 0.0;
    for e in &bank.entries {
        for delta in [0.0, 0.5, 1.3] {
            for t in [0.5, 2.0, 5.0] {
                for d in 1..=5 {
                    worst = worst.max(telescoping_check(&e.g, delta, t, d)? / e.g.max_abs());
                }
            }
        }
    }
    Ok((
        worst <= 1e-10,
        format!("max nodewise residual {worst:.2e} for d<=5"),
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("partition of unity", partition),
        ("Stein-Weiss identity", steinweiss),
        ("bilinear decomposition", decomposition),
        ("reconstruction", reconstruction),
        ("square-function Plancherel", plancherel),
        ("kernel cross-validation", kernel),
        ("shell kernel constants C_j", shell_kernel),
        ("dyadic decay", decay),
        ("convergence", convergence),
        ("exponent calculus", exponents),
        ("path equivalence and speed", paths),
        ("telescoping identity", telescope),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let (pass, detail) = match run() {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {}: {} {name}: {detail}",
            i + 1,
            if pass { "PASS" } else { "FAIL" }
        );
    }
    println!("acceptance: {} of 12 passed", 12 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
