use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use riesz_core::bump::{partition_residual, partition_tail};
use riesz_core::grid::TestBank;
use riesz_core::kernels::{closed_form_kernel, kernel_vs_transform, windowed_l1_mass};
use riesz_core::multiplier::{c_alpha, steinweiss_check, DecompositionSplit};
use riesz_core::operators::{
    breakpoint_tgrid, decomposition_identity_check, g_plancherel_constant, g_tgrid, k_j_kernel,
    square_function_g, telescoping_check,
};
use riesz_core::quad::{integrate, AdaptiveOptions};
use riesz_core::{Grid, SampledField, Space};

use crate::config::{RunConfig, Suite};

#[derive(Debug)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Check {
            name: name.into(),
            value,
            limit,
            pass: value <= limit,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Check {
            name: name.into(),
            value,
            limit,
            pass: value >= limit,
        }
    }

    fn exact(name: impl Into<String>, value: f64, want: f64) -> Self {
        Check {
            name: name.into(),
            value,
            limit: want,
            pass: value == want,
        }
    }
}

pub fn run(suite: Suite, cfg: &mut RunConfig) -> anyhow::Result<Vec<Check>> {
    Ok(match suite {
        Suite::Partition => partition(cfg)?,
        Suite::Steinweiss => steinweiss(cfg)?,
        Suite::Decomposition => decomposition(cfg)?,
        Suite::Plancherel => plancherel(cfg)?,
        Suite::Kernel => kernel(cfg)?,
        Suite::Telescope => telescope(cfg)?,
        Suite::Lemma53 => lemma53(cfg)?,
        Suite::All => {
            let mut all = Vec::new();
            for s in [
                Suite::Partition,
                Suite::Steinweiss,
                Suite::Decomposition,
                Suite::Plancherel,
                Suite::Kernel,
                Suite::Telescope,
                Suite::Lemma53,
            ] {
                let mut sub = cfg.clone();
                sub.suite = Some(s);
                all.extend(run(s, &mut sub)?);
                println!("{}", sub.header());
            }
            all
        }
    })
}

fn rng(cfg: &mut RunConfig) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(*cfg.seed.get_or_insert(42))
}

fn partition(cfg: &mut RunConfig) -> anyhow::Result<Vec<Check>> {
    let tol = *cfg.tol.get_or_insert(1e-14);
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    match cfg.t_values.clone() {
        Some(ts) => {
            let big_j = *cfg.j_max.get_or_insert(20);
            for t in ts {
                worst = worst.max((partition_residual(t, big_j)? - partition_tail(t, big_j)).abs());
            }
        }
        None => {
            let trials = *cfg.trials.get_or_insert(10_000);
            let mut rng = rng(cfg);
            for _ in 0..trials {
                let t: f64 = rng.gen_range(0.0..1.0);
                let big_j = rng.gen_range(2..=20);
                worst = worst.max((partition_residual(t, big_j)? - partition_tail(t, big_j)).abs());
            }
        }
    }
    Ok(vec![
        Check::at_most("partition residual vs tail", worst, tol),
        Check::at_most("partition runtime (s)", start.elapsed().as_secs_f64(), 1.0),
    ])
}

fn steinweiss(cfg: &mut RunConfig) -> anyhow::Result<Vec<Check>> {
    let tol = *cfg.tol.get_or_insert(1e-8);
    let trials = *cfg.trials.get_or_insert(200);
    let mut rng = rng(cfg);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let beta = rng.gen_range(0.55..3.0);
        let delta = rng.gen_range(-0.45..2.0);
        let split = DecompositionSplit::new(beta, delta)?;
        let r = rng.gen_range(0.5..4.0);
        let phi = rng.gen_range(0.05..=1.0);
        let eta = rng.gen_range(0.0..0.999) * r * f64::sqrt(phi);
        worst = worst.max(steinweiss_check(&split, r, phi, eta)?.rel_err);
    }
    Ok(vec![
        Check::at_most("steinweiss max rel_err", worst, tol),
        Check::exact("c_alpha(1,0)", c_alpha(1.0, 0.0)?, 2.0),
        Check::exact("c_alpha(1,1)", c_alpha(1.0, 1.0)?, 4.0),
    ])
}

/// One tone per dyadic shell of the ξ side, low tones on the η side.
pub fn shell_tones(
    grid: Grid,
    r: f64,
    js: std::ops::RangeInclusive<u32>,
) -> anyhow::Result<(SampledField, SampledField)> {
    let l = grid.box_length;
    let mut f = SampledField::zeros(grid, Space::Physical);
    for j in js {
        let k = (l * r * (1.0 - 2f64.powi(-(j as i32))).sqrt()).round() as i64;
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
    Ok((f, g))
}

fn decomposition(cfg: &mut RunConfig) -> anyhow::Result<Vec<Check>> {
    let tol = *cfg.tol.get_or_insert(1e-6);
    let grid = Grid::new(
        1,
        *cfg.box_length.get_or_insert(64.0),
        *cfg.samples.get_or_insert(512),
    )?;
    let r = *cfg.r.get_or_insert(0.5 * grid.nyquist());
    let (lo, hi) = (*cfg.j_min.get_or_insert(2), *cfg.j_max.get_or_insert(6));
    let budget = *cfg.t_nodes.get_or_insert(400);
    let (f, g) = shell_tones(grid, r, lo..=hi)?;
    let opts = cfg.bilinear();
    let mut out = Vec::new();
    for (beta, delta) in [(1.0, 0.0), (1.5, 0.5)] {
        let split = DecompositionSplit::new(beta, delta)?;
        for j in lo..=hi {
            let tg = breakpoint_tgrid(&f, &g, j, &split, r, budget)?;
            let rep = decomposition_identity_check(&f, &g, j, &split, r, &tg, &opts)?;
            out.push(Check::at_most(
                format!("decomposition j={j} split=({beta},{delta})"),
                rep.rel_err,
                tol,
            ));
        }
    }
    Ok(out)
}

fn plancherel(cfg: &mut RunConfig) -> anyhow::Result<Vec<Check>> {
    let tol = *cfg.tol.get_or_insert(1e-3);
    let grid = Grid::new(
        1,
        *cfg.box_length.get_or_insert(32.0),
        *cfg.samples.get_or_insert(512),
    )?;
    let bank = TestBank::default_bank(grid)?;
    let opts = AdaptiveOptions {
        abs_tol: 1e-14,
        rel_tol: 1e-12,
        max_intervals: 2000,
    };
    let mut out = Vec::new();
    for alpha in [0.0, 0.5, 1.0] {
        // ∫₀¹ m(s)² ds/s with m(s) = 2(α+1)s²(1−s²)^α
        let want = integrate(
            |s| {
                let m = 2.0 * (alpha + 1.0) * s * s * (1.0 - s * s).max(0.0).powf(alpha);
                m * m / s
            },
            0.0,
            1.0,
            opts,
        )
        .value
        .sqrt();
        let mut worst: f64 = 0.0;
        for e in &bank.entries {
            let mean = e.f.values().iter().sum::<Complex64>() / grid.len() as f64;
            let f = e.f.map(|v| v - mean);
            let tg = g_tgrid(&f, alpha, 6, 3.0)?;
            let g = square_function_g(&f, alpha, &tg)?;
            worst = worst.max((g.field.lp_norm(2.0)? / f.lp_norm(2.0)? - want).abs());
        }
        out.push(Check::at_most(
            format!("square function ratio alpha={alpha}"),
            worst,
            tol,
        ));
    }
    out.push(Check::at_most(
        "plancherel constant alpha=0",
        (g_plancherel_constant(0.0) - 1.0).abs(),
        0.0,
    ));
    Ok(out)
}

fn kernel(cfg: &mut RunConfig) -> anyhow::Result<Vec<Check>> {
    let tol = *cfg.tol.get_or_insert(1e-4);
    let cmp = kernel_vs_transform(1.0, 1.0, 1, 256.0, 512, 10.0)?;
    let origin = closed_form_kernel(&[0.0], &[0.0], 0.0, 1.0, 1)?;
    let windows = [5.0, 10.0, 20.0, 40.0, 80.0];
    let above = windowed_l1_mass(2.0, 1.0, 1, &windows)?;
    let below = windowed_l1_mass(0.0, 1.0, 1, &windows)?;
    Ok(vec![
        Check::at_most("kernel vs transform rel_err (alpha=1)", cmp.rel_err, tol),
        Check::at_most(
            "kernel origin (n=1, alpha=0) - pi",
            (origin - PI).abs(),
            1e-8,
        ),
        Check::exact(
            "L1 mass converges (alpha=2)",
            above.converging() as u8 as f64,
            1.0,
        ),
        Check::exact(
            "L1 mass grows with window (alpha=0)",
            below.diverging() as u8 as f64,
            1.0,
        ),
    ])
}

fn telescope(cfg: &mut RunConfig) -> anyhow::Result<Vec<Check>> {
    let tol = *cfg.tol.get_or_insert(1e-10);
    let grid = Grid::new(
        1,
        *cfg.box_length.get_or_insert(32.0),
        *cfg.samples.get_or_insert(512),
    )?;
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
    Ok(vec![Check::at_most(
        "telescoping identity d<=5",
        worst,
        tol,
    )])
}

fn lemma53(cfg: &mut RunConfig) -> anyhow::Result<Vec<Check>> {
    let (lo, hi) = (*cfg.j_min.get_or_insert(8), *cfg.j_max.get_or_insert(16));
    let points = *cfg.points.get_or_insert(400);
    let start = Instant::now();
    let mut cs = Vec::new();
    for j in lo..=hi {
        cs.push(k_j_kernel(j, 16.0, points, 8, 600)?.c_j);
    }
    let max = cs.iter().cloned().fold(0.0, f64::max);
    let min = cs.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(vec![
        Check::at_most("C_j max/min", max / min, *cfg.tol.get_or_insert(4.0)),
        Check::at_most("C_j runtime (s)", start.elapsed().as_secs_f64(), 30.0),
    ])
}
