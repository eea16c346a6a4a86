use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::symbols::{pos_pow, BilinearSymbol, LinearSymbol};
use crate::bump::theta;
use crate::error::{domain, Error, Result};
use crate::grid::fft::{roots_of_unity, transform};
use crate::grid::{make_test_bank, Generator, Grid, SampledField, Space};

/// 2 GiB.
pub const DEFAULT_MEMORY_BUDGET: u64 = 2 << 30;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BilinearPath {
    /// Tensor if it fits the memory budget, loop otherwise.
    Auto,
    Tensor,
    Loop,
    /// Run both and fail if they differ by more than 1e−10.
    CrossCheck,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BilinearOptions {
    pub path: BilinearPath,
    pub memory_budget: u64,
}

impl Default for BilinearOptions {
    fn default() -> Self {
        BilinearOptions {
            path: BilinearPath::Auto,
            memory_budget: DEFAULT_MEMORY_BUDGET,
        }
    }
}

/// Multiply the spectrum of `f` by a radial symbol and transform back.
pub fn apply_linear(symbol: &LinearSymbol, f: &SampledField) -> Result<SampledField> {
    symbol.validate()?;
    let spec = f.forward()?;
    apply_linear_spectrum(symbol, &spec)
}

/// As [`apply_linear`] for an already transformed field.
pub fn apply_linear_spectrum(symbol: &LinearSymbol, spec: &SampledField) -> Result<SampledField> {
    if spec.space() != Space::Frequency {
        return Err(Error::WrongSpace {
            expected: Space::Frequency,
            found: spec.space(),
        });
    }
    let grid = *spec.grid();
    let mut out = spec.clone();
    for (i, v) in out.values_mut().iter_mut().enumerate() {
        if *v != ZERO {
            *v *= symbol.eval_sq(grid.freq_norm_sq(i));
        }
    }
    out.inverse()
}

/// Grid points grouped by |κ|².
pub(crate) struct RadialIndex {
    pub ids: Vec<u32>,
    pub values: Vec<f64>,
}

pub(crate) fn radial_index(grid: &Grid) -> RadialIndex {
    let norms: Vec<i64> = (0..grid.len()).map(|i| grid.index_norm_sq(i)).collect();
    let mut distinct = norms.clone();
    distinct.sort_unstable();
    distinct.dedup();
    let ids = norms
        .iter()
        .map(|m| distinct.binary_search(m).expect("norm is present") as u32)
        .collect();
    let l2 = grid.box_length * grid.box_length;
    let values = distinct.iter().map(|&m| m as f64 / l2).collect();
    RadialIndex { ids, values }
}

/// Symbol values on all pairs of distinct radii.
pub(crate) struct SymbolTable {
    width: usize,
    values: Vec<f64>,
    row_zero: Vec<bool>,
}

impl SymbolTable {
    pub fn build(symbol: &BilinearSymbol, radii: &[f64]) -> Self {
        let width = radii.len();
        let mut values = vec![0.0; width * width];
        values
            .par_chunks_mut(width)
            .zip(radii)
            .for_each(|(row, &xs)| symbol.fill_row(xs, radii, row));
        let row_zero = values
            .chunks(width)
            .map(|r| r.iter().all(|v| *v == 0.0))
            .collect();
        SymbolTable {
            width,
            values,
            row_zero,
        }
    }

    fn row(&self, a: u32) -> &[f64] {
        let a = a as usize;
        &self.values[a * self.width..(a + 1) * self.width]
    }

    fn is_zero(&self) -> bool {
        self.row_zero.iter().all(|z| *z)
    }
}

pub fn apply_bilinear(
    symbol: &BilinearSymbol,
    f: &SampledField,
    g: &SampledField,
) -> Result<SampledField> {
    apply_bilinear_with(symbol, f, g, &BilinearOptions::default())
}

/// Σ_{ξ,η} m(ξ,η) f̂(ξ) ĝ(η) e^{2πix·(ξ+η)} on the grid.
pub fn apply_bilinear_with(
    symbol: &BilinearSymbol,
    f: &SampledField,
    g: &SampledField,
    opts: &BilinearOptions,
) -> Result<SampledField> {
    symbol.validate()?;
    f.check_compatible(g)?;
    let grid = *f.grid();
    let fh = f.forward()?;
    let gh = g.forward()?;
    let radial = radial_index(&grid);
    let table = SymbolTable::build(symbol, &radial.values);
    if table.is_zero() {
        return Ok(SampledField::zeros(grid, Space::Physical));
    }
    let m = grid.len() as u64;
    // nominal size of the 2n-dimensional spectrum, which the budget is stated against
    let needed = m * m * 16;
    let ctx = Context {
        grid,
        fh: fh.values(),
        gh: gh.values(),
        radial: &radial,
        table: &table,
    };
    match opts.path {
        BilinearPath::Tensor => {
            check_budget(needed, opts.memory_budget)?;
            ctx.tensor()
        }
        BilinearPath::Loop => ctx.looped(),
        BilinearPath::Auto => {
            if needed <= opts.memory_budget {
                ctx.tensor()
            } else {
                ctx.looped()
            }
        }
        BilinearPath::CrossCheck => {
            check_budget(needed, opts.memory_budget)?;
            let a = ctx.tensor()?;
            let b = ctx.looped()?;
            let diff = a.max_abs_diff(&b)?;
            let tol = 1e-10 * a.max_abs().max(1.0);
            if diff > tol {
                return Err(Error::PathMismatch { diff, tol });
            }
            Ok(a)
        }
    }
}

fn check_budget(needed: u64, budget: u64) -> Result<()> {
    if needed > budget {
        Err(Error::MemoryBudget { needed, budget })
    } else {
        Ok(())
    }
}

struct Context<'a> {
    grid: Grid,
    fh: &'a [Complex64],
    gh: &'a [Complex64],
    radial: &'a RadialIndex,
    table: &'a SymbolTable,
}

/// Rows per partial sum; fixed so results do not depend on the thread count.
const CHUNK: usize = 16;

impl Context<'_> {
    fn active_rows(&self) -> Vec<usize> {
        (0..self.grid.len())
            .filter(|&a| self.fh[a] != ZERO && !self.table.row_zero[self.radial.ids[a] as usize])
            .collect()
    }

    fn ordered_sum(&self, partials: Vec<Vec<Complex64>>) -> Vec<Complex64> {
        let mut out = vec![ZERO; self.grid.len()];
        for p in partials {
            for (o, v) in out.iter_mut().zip(&p) {
                *o += v;
            }
        }
        out
    }

    /// Full 2n-dimensional spectrum f̂(ξ)ĝ(η)m(ξ,η), summed along ξ + η as it is
    /// generated (the diagonal restriction) and inverted in n dimensions.
    fn tensor(&self) -> Result<SampledField> {
        let m = self.grid.len();
        let ids = &self.radial.ids;
        let n = self.grid.samples_per_axis;
        let dim = self.grid.dim;
        // rows sharing a radius share g(η)·m(ξ,η)
        let mut active = self.active_rows();
        active.sort_by_key(|&a| (ids[a], a));
        let partials: Vec<Vec<Complex64>> = active
            .par_chunks(CHUNK)
            .map(|rows| {
                let mut out = vec![ZERO; m];
                let mut h = vec![ZERO; m];
                let mut cached = u32::MAX;
                for &a in rows {
                    if ids[a] != cached {
                        cached = ids[a];
                        let srow = self.table.row(cached);
                        for ((hv, gb), id) in h.iter_mut().zip(self.gh).zip(ids) {
                            *hv = gb * srow[*id as usize];
                        }
                    }
                    let fa = self.fh[a];
                    if dim == 1 {
                        shifted_axpy(&mut out, fa, &h, a);
                    } else {
                        let (a0, a1) = (a / n, a % n);
                        for b0 in 0..n {
                            let k0 = (a0 + b0) % n;
                            shifted_axpy(
                                &mut out[k0 * n..(k0 + 1) * n],
                                fa,
                                &h[b0 * n..(b0 + 1) * n],
                                a1,
                            );
                        }
                    }
                }
                out
            })
            .collect();
        let scale = self.grid.freq_spacing().powi(dim as i32);
        let mut spec = self.ordered_sum(partials);
        spec.iter_mut().for_each(|v| *v *= scale);
        SampledField::from_values(self.grid, Space::Frequency, spec)?.inverse()
    }

    /// One n-dimensional inverse transform per active ξ.
    fn looped(&self) -> Result<SampledField> {
        let m = self.grid.len();
        let n = self.grid.samples_per_axis;
        let dim = self.grid.dim;
        let mask = n - 1;
        let ids = &self.radial.ids;
        let roots = roots_of_unity(n, 1.0);
        let active = self.active_rows();
        let partials: Vec<Vec<Complex64>> = active
            .par_chunks(CHUNK)
            .map(|rows| {
                let mut out = vec![ZERO; m];
                let mut h = vec![ZERO; m];
                for &a in rows {
                    let srow = self.table.row(ids[a]);
                    for ((hv, gb), id) in h.iter_mut().zip(self.gh).zip(ids) {
                        *hv = gb * srow[*id as usize];
                    }
                    transform(&mut h, dim, n, true);
                    let fa = self.fh[a];
                    if dim == 1 {
                        for (k, (o, hv)) in out.iter_mut().zip(&h).enumerate() {
                            *o += fa * roots[(a * k) & mask] * hv;
                        }
                    } else {
                        let (a0, a1) = (a / n, a % n);
                        for k0 in 0..n {
                            let p0 = fa * roots[(a0 * k0) & mask];
                            let base = k0 * n;
                            for k1 in 0..n {
                                out[base + k1] += p0 * roots[(a1 * k1) & mask] * h[base + k1];
                            }
                        }
                    }
                }
                out
            })
            .collect();
        let scale = self.grid.freq_spacing().powi(2 * dim as i32);
        let mut values = self.ordered_sum(partials);
        values.iter_mut().for_each(|v| *v *= scale);
        SampledField::from_values(self.grid, Space::Physical, values)
    }
}

/// out[(shift + b) mod n] += fa·h[b].
fn shifted_axpy(out: &mut [Complex64], fa: Complex64, h: &[Complex64], shift: usize) {
    let (lo, hi) = h.split_at(h.len() - shift);
    for (o, v) in out[shift..].iter_mut().zip(lo) {
        *o += fa * v;
    }
    for (o, v) in out[..shift].iter_mut().zip(hi) {
        *o += fa * v;
    }
}

/// Smallest J ≥ 2 with 2^{J+1}·u_min ≥ 2, where u_min is the smallest positive
/// 1 − |ξ|²/R² on the grid: beyond it the dyadic tail vanishes at every node.
pub fn saturation_index(grid: &Grid, r: f64) -> u32 {
    let radial = radial_index(grid);
    let r2 = r * r;
    let u_min = radial
        .values
        .iter()
        .map(|xs| 1.0 - xs / r2)
        .filter(|u| *u > 0.0)
        .fold(f64::INFINITY, f64::min);
    if !u_min.is_finite() {
        return 2;
    }
    let mut j = 2;
    while 2f64.powi(j as i32 + 1) * u_min < 2.0 {
        j += 1;
    }
    j
}

#[derive(Clone, Debug)]
pub struct Reconstruction {
    pub field: SampledField,
    /// sup over grid frequencies of θ(2^{J+1}(1 − |ξ|²/R²))·m^α_R.
    pub residual_bound: f64,
}

fn tail_bound(radii: &[f64], alpha: f64, r: f64, big_j: u32) -> f64 {
    let scale = 2f64.powi(big_j as i32 + 1);
    radii
        .iter()
        .map(|xs| {
            let u = 1.0 - xs / (r * r);
            theta(scale * u) * pos_pow(u, alpha)
        })
        .fold(0.0, f64::max)
}

/// Σ_{j=2..J} T_j + tail piece, each applied separately.
pub fn reconstruct_bilinear(
    alpha: f64,
    r: f64,
    big_j: u32,
    f: &SampledField,
    g: &SampledField,
    opts: &BilinearOptions,
) -> Result<Reconstruction> {
    if big_j < 2 {
        return Err(domain(format!("J must be at least 2, got {big_j}")));
    }
    let mut field = apply_bilinear_with(&BilinearSymbol::Tail { alpha, r }, f, g, opts)?;
    for j in 2..=big_j {
        let piece = apply_bilinear_with(&BilinearSymbol::Piece { j, alpha, r }, f, g, opts)?;
        field.add_assign(&piece)?;
    }
    let radial = radial_index(f.grid());
    let residual_bound = tail_bound(&radial.values, alpha, r, big_j);
    Ok(Reconstruction {
        field,
        residual_bound,
    })
}

/// (measured sup over grid pairs of |m − Σ pieces − tail|, predicted tail bound).
pub fn reconstruction_symbol_gap(
    alpha: f64,
    r: f64,
    big_j: u32,
    grid: &Grid,
) -> Result<(f64, f64)> {
    if big_j < 2 {
        return Err(domain(format!("J must be at least 2, got {big_j}")));
    }
    let radii = radial_index(grid).values;
    let full = BilinearSymbol::Full { alpha, r };
    let tail = BilinearSymbol::Tail { alpha, r };
    let mut gap: f64 = 0.0;
    for &xs in &radii {
        for &es in &radii {
            let mut rest = full.eval_sq(xs, es) - tail.eval_sq(xs, es);
            for j in 2..=big_j {
                rest -= BilinearSymbol::Piece { j, alpha, r }.eval_sq(xs, es);
            }
            gap = gap.max(rest.abs());
        }
    }
    Ok((gap, tail_bound(&radii, alpha, r, big_j)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchReport {
    pub dim: usize,
    pub samples_per_axis: usize,
    pub reps: usize,
    pub tensor_secs: f64,
    pub loop_secs: f64,
    pub speedup: f64,
    pub max_diff: f64,
}

/// Best-of-`reps` wall times of both bilinear paths on a Gaussian pair with
/// the full symbol (α = 1, R = 0.9·Nyquist).
pub fn bench_paths(grid: Grid, reps: usize) -> Result<BenchReport> {
    let bank = make_test_bank(42, 1, &[Generator::Gaussian], grid)?;
    let e = &bank.entries[0];
    let symbol = BilinearSymbol::Full {
        alpha: 1.0,
        r: 0.9 * grid.nyquist(),
    };
    let run = |path| {
        let opts = BilinearOptions {
            path,
            memory_budget: u64::MAX,
        };
        let mut best = f64::INFINITY;
        let mut out = None;
        for _ in 0..reps.max(1) {
            let start = Instant::now();
            let v = apply_bilinear_with(&symbol, &e.f, &e.g, &opts)?;
            best = best.min(start.elapsed().as_secs_f64());
            out = Some(v);
        }
        Ok::<_, Error>((best, out.expect("at least one repetition")))
    };
    let (tensor_secs, a) = run(BilinearPath::Tensor)?;
    let (loop_secs, b) = run(BilinearPath::Loop)?;
    Ok(BenchReport {
        dim: grid.dim,
        samples_per_axis: grid.samples_per_axis,
        reps: reps.max(1),
        tensor_secs,
        loop_secs,
        speedup: loop_secs / tensor_secs,
        max_diff: a.max_abs_diff(&b)?,
    })
}
