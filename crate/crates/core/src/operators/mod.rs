//! Linear and bilinear Bochner–Riesz type operators on sampled fields.

mod kernel_j;
mod maximal;
mod square;

pub use kernel_j::{k_j_kernel, KernelJ, KJ_MIN_SPAN};
pub use maximal::{domination_constant, dyadic_radii, hl_maximal, maximal_bilinear};
pub use square::{
    g_plancherel_constant, g_tgrid, local_square, local_tgrid, square_function_g, stein_avg_square,
    stein_avg_square_sup, telescoping_check, LocalVariant,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::grid::{SampledField, Space};
use crate::multiplier::{
    apply_bilinear_with, apply_linear, BilinearOptions, BilinearSymbol, DecompositionSplit,
    LinearSymbol,
};
use crate::quad::{gauss_legendre_on, graded_rule};

pub(crate) use crate::multiplier::apply_linear_spectrum;

/// Radii for maximal functions: strictly increasing and positive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RGrid {
    pub values: Vec<f64>,
    pub j_cap: u32,
}

impl RGrid {
    pub fn new(values: Vec<f64>, j_cap: u32) -> Result<Self> {
        if values.is_empty() {
            return Err(domain("R-grid is empty"));
        }
        if !(values[0] > 0.0) || values.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(domain("R-grid must be positive and strictly increasing"));
        }
        Ok(RGrid { values, j_cap })
    }

    /// `per_decade` points per factor of ten from `lo` to `hi` inclusive.
    pub fn log_spaced(lo: f64, hi: f64, per_decade: usize, j_cap: u32) -> Result<Self> {
        if !(lo > 0.0 && hi >= lo) {
            return Err(domain(format!("bad R range [{lo}, {hi}]")));
        }
        let decades = (hi / lo).log10();
        let n = ((decades * per_decade as f64).ceil() as usize).max(1);
        let values = if hi == lo {
            vec![lo]
        } else {
            (0..=n)
                .map(|i| lo * 10f64.powf(decades * i as f64 / n as f64))
                .collect()
        };
        RGrid::new(values, j_cap)
    }

    pub fn check_nyquist(&self, nyquist: f64) -> Result<()> {
        let top = *self.values.last().expect("nonempty");
        if top > nyquist * (1.0 + 1e-12) {
            return Err(domain(format!(
                "R = {top} exceeds the Nyquist radius {nyquist}"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TRule {
    Uniform,
    GaussLegendre,
    /// Composite graded Gauss–Legendre split at the integrand's breakpoints.
    Breakpoint,
}

/// Quadrature nodes and positive weights for ∫ dt over [lower, upper].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub rule: TRule,
    pub lower: f64,
    pub upper: f64,
}

impl TGrid {
    /// Midpoint rule.
    pub fn uniform(lower: f64, upper: f64, n: usize) -> Result<Self> {
        check_interval(lower, upper, n)?;
        let h = (upper - lower) / n as f64;
        let nodes = (0..n).map(|i| lower + (i as f64 + 0.5) * h).collect();
        Ok(TGrid {
            nodes,
            weights: vec![h; n],
            rule: TRule::Uniform,
            lower,
            upper,
        })
    }

    pub fn gauss_legendre(lower: f64, upper: f64, n: usize) -> Result<Self> {
        check_interval(lower, upper, n)?;
        let (nodes, weights) = gauss_legendre_on(n, lower, upper);
        Ok(TGrid {
            nodes,
            weights,
            rule: TRule::GaussLegendre,
            lower,
            upper,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

fn check_interval(lower: f64, upper: f64, n: usize) -> Result<()> {
    if !(upper > lower && lower >= 0.0) || n == 0 {
        return Err(domain(format!(
            "bad t-interval [{lower}, {upper}] with {n} nodes"
        )));
    }
    Ok(())
}

/// B_t^δ f, the Bochner–Riesz mean of order δ and radius t.
pub fn bochner_riesz_linear(f: &SampledField, delta: f64, t: f64) -> Result<SampledField> {
    if !(t > 0.0) {
        return Err(domain(format!("t must be positive, got {t}")));
    }
    apply_linear(&LinearSymbol::BrDisc { delta, t }, f)
}

/// ℬ^α_R(f, g).
pub fn bilinear_br(
    f: &SampledField,
    g: &SampledField,
    alpha: f64,
    r: f64,
    opts: &BilinearOptions,
) -> Result<SampledField> {
    let nyq = f.grid().nyquist();
    if r > nyq * (1.0 + 1e-12) {
        return Err(domain(format!("R = {r} exceeds the Nyquist radius {nyq}")));
    }
    apply_bilinear_with(&BilinearSymbol::Full { alpha, r }, f, g, opts)
}

/// T^α_{j,R}(f, g).
pub fn t_j(
    f: &SampledField,
    g: &SampledField,
    j: u32,
    alpha: f64,
    r: f64,
    opts: &BilinearOptions,
) -> Result<SampledField> {
    if j < 2 {
        return Err(domain(format!("j must be at least 2, got {j}")));
    }
    apply_bilinear_with(&BilinearSymbol::Piece { j, alpha, r }, f, g, opts)
}

/// S^{R,t}_{j,β} f.
pub fn s_j_beta(f: &SampledField, j: u32, beta: f64, r: f64, t: f64) -> Result<SampledField> {
    let top = 2f64.powi(1 - j as i32).sqrt();
    if !(0.0..=top).contains(&t) {
        return Err(domain(format!("t = {t} outside [0, {top}]")));
    }
    apply_linear(&LinearSymbol::SPiece { j, beta, r, t }, f)
}

/// R_j = R·√(2^{1−j}).
pub fn r_j(r: f64, j: u32) -> f64 {
    r * 2f64.powi(1 - j as i32).sqrt()
}

/// Breakpoints of t ↦ (R²φ(ξ) − t²)₊^{β−1} t^{2δ+1} (1 − |η|²/t²)₊^δ over the
/// significant modes of f and g, with a graded Gauss rule on each cell.
pub fn breakpoint_tgrid(
    f: &SampledField,
    g: &SampledField,
    j: u32,
    split: &DecompositionSplit,
    r: f64,
    budget: usize,
) -> Result<TGrid> {
    const SIGNIFICANT: f64 = 1e-12;
    let top = r_j(r, j);
    let fh = f.forward()?;
    let gh = g.forward()?;
    let grid = *f.grid();
    // (t, starts an η-cell, ends a disc-cell)
    let mut points: Vec<(f64, bool, bool)> = vec![(0.0, false, false), (top, false, false)];
    let gmax = gh.max_abs();
    for (i, v) in gh.values().iter().enumerate() {
        let e = grid.freq_norm_sq(i).sqrt();
        if v.norm() > SIGNIFICANT * gmax && e > 0.0 && e < top {
            points.push((e, true, false));
        }
    }
    let fmax = fh.max_abs();
    let scale = 2f64.powi(j as i32);
    for (i, v) in fh.values().iter().enumerate() {
        let u = 1.0 - grid.freq_norm_sq(i) / (r * r);
        if v.norm() > SIGNIFICANT * fmax && crate::bump::psi(scale * u) != 0.0 {
            let a = r * u.sqrt();
            if a > 0.0 && a < top {
                points.push((a, false, true));
            }
        }
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, bool, bool)> = Vec::new();
    for p in points {
        match merged.last_mut() {
            Some(last) if p.0 - last.0 <= 1e-14 * top => {
                last.1 |= p.1;
                last.2 |= p.2;
            }
            _ => merged.push(p),
        }
    }
    let cells = merged.len() - 1;
    let per_half = (budget / (2 * cells)).max(1);
    let mut nodes = Vec::with_capacity(2 * per_half * cells);
    let mut weights = Vec::with_capacity(2 * per_half * cells);
    for w in merged.windows(2) {
        let (a, b) = (w[0].0, w[1].0);
        let la = if a == 0.0 {
            2.0 * split.delta + 1.0
        } else if w[0].1 {
            split.delta
        } else {
            0.0
        };
        let lb = if w[1].2 { split.beta - 1.0 } else { 0.0 };
        let (x, wt) = graded_rule(a, b, la, lb, per_half);
        nodes.extend(x);
        weights.extend(wt);
    }
    Ok(TGrid {
        nodes,
        weights,
        rule: TRule::Breakpoint,
        lower: 0.0,
        upper: top,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecompositionReport {
    /// sup|T_j − RHS| / sup|T_j|
    pub rel_err: f64,
    pub max_diff: f64,
    pub lhs_sup: f64,
    pub nodes: usize,
}

/// c_α R^{−2α} Σ_i w_i B^{R,t_i}_{j,β}f · B^δ_{t_i}g · t_i^{2δ+1}.
pub fn decomposition_rhs(
    f: &SampledField,
    g: &SampledField,
    j: u32,
    split: &DecompositionSplit,
    r: f64,
    tgrid: &TGrid,
) -> Result<SampledField> {
    let top = r_j(r, j);
    if tgrid
        .nodes
        .iter()
        .any(|t| !(*t > 0.0 && *t <= top * (1.0 + 1e-12)))
    {
        return Err(domain(format!("t-grid must lie in (0, R_j] = (0, {top}]")));
    }
    f.check_compatible(g)?;
    let fh = f.forward()?;
    let gh = g.forward()?;
    let mut acc = SampledField::zeros(*f.grid(), Space::Physical);
    let c = split.c_alpha * r.powf(-2.0 * split.alpha);
    for (&t, &w) in tgrid.nodes.iter().zip(&tgrid.weights) {
        let bf = apply_linear_spectrum(
            &LinearSymbol::BPiece {
                j,
                beta: split.beta,
                r,
                t,
            },
            &fh,
        )?;
        let bg = apply_linear_spectrum(
            &LinearSymbol::BrDisc {
                delta: split.delta,
                t,
            },
            &gh,
        )?;
        let k = c * w * t.powf(2.0 * split.delta + 1.0);
        for ((o, a), b) in acc
            .values_mut()
            .iter_mut()
            .zip(bf.values())
            .zip(bg.values())
        {
            *o += k * a * b;
        }
    }
    Ok(acc)
}

/// Compares T_j with its t-integral representation in sup norm.
pub fn decomposition_identity_check(
    f: &SampledField,
    g: &SampledField,
    j: u32,
    split: &DecompositionSplit,
    r: f64,
    tgrid: &TGrid,
    opts: &BilinearOptions,
) -> Result<DecompositionReport> {
    let lhs = t_j(f, g, j, split.alpha, r, opts)?;
    let rhs = decomposition_rhs(f, g, j, split, r, tgrid)?;
    let max_diff = lhs.max_abs_diff(&rhs)?;
    let lhs_sup = lhs.max_abs();
    let rel_err = if lhs_sup == 0.0 {
        if max_diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        max_diff / lhs_sup
    };
    Ok(DecompositionReport {
        rel_err,
        max_diff,
        lhs_sup,
        nodes: tgrid.len(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CauchySchwarzReport {
    /// max over nodes of |quadrature RHS| − bound (≤ 0 up to rounding).
    pub quadrature_excess: f64,
    /// max over nodes of |T_j| − bound.
    pub exact_excess: f64,
    pub bound_sup: f64,
}

/// |T_j(f,g)| ≤ c_α R^{−2α} (∫|B^{R,t}_{j,β}f t^{2δ+1}|² dt)^{1/2} (∫|B^δ_t g|² dt)^{1/2}, nodewise.
pub fn cauchy_schwarz_check(
    f: &SampledField,
    g: &SampledField,
    j: u32,
    split: &DecompositionSplit,
    r: f64,
    tgrid: &TGrid,
    opts: &BilinearOptions,
) -> Result<CauchySchwarzReport> {
    let fh = f.forward()?;
    let gh = g.forward()?;
    let len = f.grid().len();
    let mut sf = vec![0.0; len];
    let mut sg = vec![0.0; len];
    for (&t, &w) in tgrid.nodes.iter().zip(&tgrid.weights) {
        let bf = apply_linear_spectrum(
            &LinearSymbol::BPiece {
                j,
                beta: split.beta,
                r,
                t,
            },
            &fh,
        )?;
        let bg = apply_linear_spectrum(
            &LinearSymbol::BrDisc {
                delta: split.delta,
                t,
            },
            &gh,
        )?;
        let p = t.powf(2.0 * split.delta + 1.0);
        for i in 0..len {
            sf[i] += w * (bf.values()[i] * p).norm_sqr();
            sg[i] += w * bg.values()[i].norm_sqr();
        }
    }
    let c = split.c_alpha * r.powf(-2.0 * split.alpha);
    let quad = decomposition_rhs(f, g, j, split, r, tgrid)?;
    let exact = t_j(f, g, j, split.alpha, r, opts)?;
    let mut out = CauchySchwarzReport {
        quadrature_excess: f64::NEG_INFINITY,
        exact_excess: f64::NEG_INFINITY,
        bound_sup: 0.0,
    };
    for i in 0..len {
        let bound = c * sf[i].sqrt() * sg[i].sqrt();
        out.bound_sup = out.bound_sup.max(bound);
        out.quadrature_excess = out.quadrature_excess.max(quad.values()[i].norm() - bound);
        out.exact_excess = out.exact_excess.max(exact.values()[i].norm() - bound);
    }
    Ok(out)
}

pub(crate) fn real_field(grid: crate::grid::Grid, values: Vec<f64>) -> Result<SampledField> {
    SampledField::from_values(
        grid,
        Space::Physical,
        values.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
    )
}
