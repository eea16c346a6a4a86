//! `riesz`: verification suites, norm probes, region scans, kernel profiles
//! and path benchmarks for bilinear Bochner–Riesz means.

mod config;
mod suites;

use std::fs;
use std::path::Path;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_complex::Complex64;

use riesz_core::exponents::{Exponent, ExponentTriple};
use riesz_core::grid::{make_test_bank, Generator, TestBank};
use riesz_core::kernels::{kernel_profile_csv, kernel_vs_transform};
use riesz_core::multiplier::bench_paths;
use riesz_core::operators::RGrid;
use riesz_core::probe::{
    attach_empirical, convergence_probe, dyadic_decay_fit, empirical_norm, region_csv, region_scan,
    region_svg, ProbeOp,
};
use riesz_core::{Grid, SampledField};

use config::{grid_header, ConfigError, OpChoice, PairChoice, ProbeKind, RunConfig, Suite};
use suites::Check;

#[derive(Parser)]
#[command(
    name = "riesz",
    version,
    about = "Numerical checks for bilinear Bochner-Riesz means"
)]
struct Cli {
    /// worker threads; falls back to RIESZ_THREADS, then all cores
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run identity and cross-validation suites
    Verify(RunConfig),
    /// Empirical norms, dyadic decay fits and convergence sequences
    Probe(RunConfig),
    /// Boundedness region scan as CSV (and optional SVG)
    Region(RunConfig),
    /// Radial kernel profile and transform comparison
    Kernel(RunConfig),
    /// Tensor vs loop bilinear path timing
    Bench(RunConfig),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads(cli.threads) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let (name, flags) = match cli.command {
        Command::Verify(c) => ("verify", c),
        Command::Probe(c) => ("probe", c),
        Command::Region(c) => ("region", c),
        Command::Kernel(c) => ("kernel", c),
        Command::Bench(c) => ("bench", c),
    };
    let result = RunConfig::resolve(name, flags).and_then(|mut cfg| match name {
        "verify" => verify(&mut cfg),
        "probe" => probe(&mut cfg),
        "region" => region(&mut cfg),
        "kernel" => kernel(&mut cfg),
        _ => bench(&mut cfg),
    });
    match result {
        Ok(checks) => report(&checks),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn init_threads(flag: Option<usize>) -> anyhow::Result<()> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var("RIESZ_THREADS") {
            Ok(v) => Some(
                v.parse()
                    .map_err(|_| ConfigError(format!("RIESZ_THREADS={v} is not a count")))?,
            ),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    Ok(())
}

/// 2 for bad input, 1 for everything that went wrong in the numerics.
fn exit_code(e: &anyhow::Error) -> u8 {
    use riesz_core::Error as E;
    if e.downcast_ref::<ConfigError>().is_some() {
        return 2;
    }
    match e.downcast_ref::<E>() {
        Some(
            E::Domain(_)
            | E::GridMismatch(_)
            | E::WrongSpace { .. }
            | E::MemoryBudget { .. }
            | E::Format(_),
        ) => 2,
        Some(E::Io(_)) => 2,
        _ => 1,
    }
}

fn report(checks: &[Check]) -> ExitCode {
    for c in checks {
        println!(
            "{} {}: {:e} (limit {:e})",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.limit
        );
    }
    match checks.iter().find(|c| !c.pass) {
        Some(c) => {
            eprintln!("failed: {}", c.name);
            ExitCode::from(1)
        }
        None => ExitCode::SUCCESS,
    }
}

/// Writes `body` under the config and grid headers, to `path` or stdout.
fn emit(
    cfg: &RunConfig,
    grid: Option<&Grid>,
    path: Option<&Path>,
    body: &str,
) -> anyhow::Result<()> {
    let mut text = cfg.header();
    text.push('\n');
    if let Some(g) = grid {
        text.push_str(&grid_header(g));
        text.push('\n');
    }
    text.push_str(body);
    match path {
        Some(p) => fs::write(p, text)
            .map_err(|e| ConfigError(format!("cannot write {}: {e}", p.display())).into()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn exponent(s: &str) -> anyhow::Result<Exponent> {
    s.parse()
        .map_err(|e| ConfigError(format!("bad exponent {s}: {e}")).into())
}

fn geometric(lo: f64, hi: f64, count: usize) -> anyhow::Result<RGrid> {
    if count < 2 || !(lo > 0.0 && hi > lo) {
        return Err(ConfigError(format!(
            "need 0 < r_min < r_max and r_count >= 2, got {lo}, {hi}, {count}"
        ))
        .into());
    }
    let ratio = hi / lo;
    let values = (0..count)
        .map(|i| lo * ratio.powf(i as f64 / (count - 1) as f64))
        .collect();
    Ok(RGrid::new(values, 16)?)
}

fn verify(cfg: &mut RunConfig) -> anyhow::Result<Vec<Check>> {
    let suite = *cfg.suite.get_or_insert(Suite::All);
    let checks = suites::run(suite, cfg)?;
    println!("{}", cfg.header());
    Ok(checks)
}

fn gaussian(grid: Grid, center: f64, width: f64) -> SampledField {
    SampledField::from_fn(grid, |x| {
        Complex64::new(
            (-std::f64::consts::PI * ((x[0] - center) / width).powi(2)).exp(),
            0.0,
        )
    })
}

fn probe(cfg: &mut RunConfig) -> anyhow::Result<Vec<Check>> {
    let opts = cfg.bilinear();
    let p1 = exponent(cfg.p1.get_or_insert_with(|| "2".into()))?;
    let p2 = exponent(cfg.p2.get_or_insert_with(|| "2".into()))?;
    let triple = ExponentTriple::new(p1, p2)?;
    match *cfg.kind.get_or_insert(ProbeKind::Norm) {
        ProbeKind::Norm => {
            let dim = *cfg.n.get_or_insert(1) as usize;
            let grid = Grid::new(
                dim,
                *cfg.box_length.get_or_insert(32.0),
                *cfg.samples.get_or_insert(256),
            )?;
            let bank = TestBank::default_bank(grid)?;
            let alpha = *cfg.alpha.get_or_insert(1.0);
            let op = match *cfg.op.get_or_insert(OpChoice::Br) {
                OpChoice::Product => ProbeOp::Product,
                OpChoice::Br => ProbeOp::BochnerRiesz {
                    alpha,
                    r: *cfg.r.get_or_insert(0.5 * grid.nyquist()),
                },
                OpChoice::Maximal => {
                    let lo = *cfg.r_min.get_or_insert(0.125 * grid.nyquist());
                    let hi = *cfg.r_max.get_or_insert(0.5 * grid.nyquist());
                    ProbeOp::Maximal {
                        alpha,
                        rgrid: geometric(lo, hi, *cfg.r_count.get_or_insert(5))?,
                    }
                }
            };
            let rep = empirical_norm(&op, &bank, &triple, &opts)?;
            println!(
                "{} max ratio {:.6e} over {} entries (lower bound for the norm)",
                rep.op,
                rep.max_ratio,
                rep.ratios.len()
            );
            emit(cfg, Some(&grid), cfg.out.as_deref(), &rep.ratios_csv())?;
            Ok(vec![])
        }
        ProbeKind::Decay => {
            let grid = Grid::new(
                1,
                *cfg.box_length.get_or_insert(256.0),
                *cfg.samples.get_or_insert(4096),
            )?;
            let alpha = *cfg.alpha.get_or_insert(0.5);
            let (lo, hi) = (*cfg.j_min.get_or_insert(3), *cfg.j_max.get_or_insert(9));
            let rl = *cfg.r_min.get_or_insert(0.75 * grid.nyquist());
            let rh = *cfg.r_max.get_or_insert(grid.nyquist());
            let rgrid = geometric(rl, rh, *cfg.r_count.get_or_insert(5))?;
            let c = 0.5 * grid.box_length;
            let (f, g) = (gaussian(grid, c, 0.15), gaussian(grid, c, 0.15));
            let fit = dyadic_decay_fit(&f, &g, alpha, &triple, lo..=hi, &rgrid, &opts)?;
            let mut body = String::from("j,log2_norm\n");
            for (j, v) in fit.js.iter().zip(&fit.log2_norms) {
                body.push_str(&format!("{j},{v:.17e}\n"));
            }
            println!(
                "slope {:.6} residual {:.3e} excluded {:?}",
                fit.slope, fit.residual, fit.excluded
            );
            emit(cfg, Some(&grid), cfg.out.as_deref(), &body)?;
            Ok(cfg
                .max_slope
                .map(|m| Check::at_most("decay slope", fit.slope, m))
                .into_iter()
                .collect())
        }
        ProbeKind::Convergence => {
            let pair = *cfg.pair.get_or_insert(PairChoice::Gaussian);
            let grid = Grid::new(
                1,
                *cfg.box_length.get_or_insert(16.0),
                *cfg.samples.get_or_insert(1024),
            )?;
            let (f, g) = match pair {
                PairChoice::Gaussian => {
                    let c = 0.5 * grid.box_length;
                    (gaussian(grid, c, 1.0), gaussian(grid, c + 0.3, 1.3))
                }
                PairChoice::Bandlimited => {
                    let bank = make_test_bank(
                        *cfg.seed.get_or_insert(42),
                        1,
                        &[Generator::RandomBandlimited],
                        grid,
                    )?;
                    let e = bank.entries.into_iter().next().expect("one entry");
                    (e.f, e.g)
                }
            };
            let alpha = *cfg.alpha.get_or_insert(1.0);
            let lo = *cfg.r_min.get_or_insert(grid.nyquist() / 32.0);
            // the bandlimited pair reaches √2 of the quarter band, so run to Nyquist
            let top = match pair {
                PairChoice::Gaussian => grid.nyquist() / 2.0,
                PairChoice::Bandlimited => grid.nyquist(),
            };
            let hi = *cfg.r_max.get_or_insert(top);
            let rgrid = geometric(lo, hi, *cfg.r_count.get_or_insert(11))?;
            let p = exponent(cfg.p1.as_deref().unwrap_or("2"))?;
            let q = exponent(cfg.p2.as_deref().unwrap_or("2"))?;
            let target = ExponentTriple::new(p, q)?.p.to_f64();
            let rep = convergence_probe(&f, &g, alpha, &rgrid, target, &opts)?;
            let mut body = String::from("R,error\n");
            for (r, e) in rep.radii.iter().zip(&rep.errors) {
                body.push_str(&format!("{r:.17e},{e:.17e}\n"));
            }
            println!(
                "final error {:.3e}, band radius {:.4}, floor {:.2e}, halving {:?}",
                rep.final_error(),
                rep.band_radius,
                rep.floor,
                rep.halving_ratios
            );
            emit(cfg, Some(&grid), cfg.out.as_deref(), &body)?;
            let mut checks = vec![Check::at_least(
                "monotone tail",
                rep.monotone_tail as u8 as f64,
                1.0,
            )];
            if alpha == 0.0 && rep.capture_index.is_some() {
                checks.push(Check::at_least(
                    "saturated past band radius",
                    rep.saturated() as u8 as f64,
                    1.0,
                ));
            }
            if let Some(m) = cfg.max_error {
                checks.push(Check::at_most("final error", rep.final_error(), m));
            }
            Ok(checks)
        }
    }
}

fn region(cfg: &mut RunConfig) -> anyhow::Result<Vec<Check>> {
    let n = *cfg.n.get_or_insert(2);
    let steps = *cfg.steps.get_or_insert(16);
    let alphas = cfg
        .alphas
        .get_or_insert_with(|| (0..=12).map(|k| k as f64 * 0.125).collect())
        .clone();
    let mut rows = region_scan(n, steps, &alphas)?;
    let mut grid = None;
    if *cfg.empirical.get_or_insert(false) {
        let g = Grid::new(
            1,
            *cfg.box_length.get_or_insert(32.0),
            *cfg.samples.get_or_insert(256),
        )?;
        let bank = make_test_bank(
            *cfg.seed.get_or_insert(42),
            *cfg.trials.get_or_insert(4),
            &[Generator::Gaussian, Generator::RandomBandlimited],
            g,
        )?;
        attach_empirical(
            &mut rows,
            &bank,
            *cfg.r.get_or_insert(0.5 * g.nyquist()),
            &cfg.bilinear(),
        )?;
        grid = Some(g);
    }
    let body = region_csv(&rows);
    emit(cfg, grid.as_ref(), cfg.out.as_deref(), &body)?;
    if let Some(svg) = &cfg.svg {
        fs::write(svg, region_svg(&body)?)
            .map_err(|e| ConfigError(format!("cannot write {}: {e}", svg.display())))?;
    }
    Ok(vec![])
}

fn kernel(cfg: &mut RunConfig) -> anyhow::Result<Vec<Check>> {
    let alpha = *cfg.alpha.get_or_insert(1.0);
    let r = *cfg.r.get_or_insert(1.0);
    let n = *cfg.n.get_or_insert(1);
    let body = kernel_profile_csv(
        alpha,
        r,
        n,
        *cfg.r_max.get_or_insert(20.0),
        *cfg.points.get_or_insert(401),
    )?;
    let mut checks = Vec::new();
    if *cfg.compare.get_or_insert(false) {
        let cmp = kernel_vs_transform(
            alpha,
            r,
            n,
            *cfg.box_length.get_or_insert(256.0),
            *cfg.samples.get_or_insert(512),
            10.0,
        )?;
        println!(
            "transform comparison: rel_err {:.3e} over {} nodes, truncation estimate {:.3e}{}",
            cmp.rel_err,
            cmp.points,
            cmp.truncation_estimate,
            if cmp.truncation_dominated {
                " (grid truncation dominates)"
            } else {
                ""
            }
        );
        checks.push(Check::at_most(
            "kernel vs transform",
            cmp.rel_err,
            *cfg.tol.get_or_insert(1e-4),
        ));
    }
    emit(cfg, None, cfg.out.as_deref(), &body)?;
    Ok(checks)
}

fn bench(cfg: &mut RunConfig) -> anyhow::Result<Vec<Check>> {
    let dim = *cfg.n.get_or_insert(1) as usize;
    let grid = Grid::new(
        dim,
        *cfg.box_length.get_or_insert(32.0),
        *cfg.samples.get_or_insert(1024),
    )?;
    let rep = bench_paths(grid, *cfg.reps.get_or_insert(3))?;
    println!(
        "tensor {:.4}s loop {:.4}s speedup {:.2}x max diff {:.2e}",
        rep.tensor_secs, rep.loop_secs, rep.speedup, rep.max_diff
    );
    let body = format!(
        "dim,samples_per_axis,reps,tensor_secs,loop_secs,speedup,max_diff\n{},{},{},{},{},{},{:e}\n",
        rep.dim, rep.samples_per_axis, rep.reps, rep.tensor_secs, rep.loop_secs, rep.speedup, rep.max_diff
    );
    emit(cfg, Some(&grid), cfg.out.as_deref(), &body)?;
    let mut checks = vec![Check::at_most("path agreement", rep.max_diff, 1e-10)];
    if let Some(m) = cfg.min_speedup {
        checks.push(Check::at_least("tensor speedup", rep.speedup, m));
    }
    Ok(checks)
}
