use serde::{Deserialize, Serialize};

use super::{apply_linear_spectrum, real_field, RGrid, TGrid, TRule};
use crate::error::{domain, Result};
use crate::grid::SampledField;
use crate::multiplier::LinearSymbol;
use crate::quad::{gauss_legendre_on, graded_rule};

const SIGNIFICANT: f64 = 1e-12;

/// Distinct nonzero |ξ| carrying significant spectral mass, ascending.
fn spectral_radii(spec: &SampledField) -> Vec<f64> {
    let grid = *spec.grid();
    let peak = spec.max_abs();
    let mut radii: Vec<i64> = spec
        .values()
        .iter()
        .enumerate()
        .filter(|(i, v)| v.norm() > SIGNIFICANT * peak && grid.index_norm_sq(*i) > 0)
        .map(|(i, _)| grid.index_norm_sq(i))
        .collect();
    radii.sort_unstable();
    radii.dedup();
    radii
        .into_iter()
        .map(|m| (m as f64).sqrt() / grid.box_length)
        .collect()
}

/// ∫_{c}^{∞} (1/t)·|m(|ξ|/t)|² dt = ∫₀¹ m(s)² ds/s = (α+1)/(2α+1)
/// for m(s) = 2(α+1)s²(1−s²)₊^α.
pub fn g_plancherel_constant(alpha: f64) -> f64 {
    (alpha + 1.0) / (2.0 * alpha + 1.0)
}

/// t-grid for the square function: graded Gauss cells between consecutive
/// spectral radii, then a log-scale Gauss tail over `decades` decades.
pub fn g_tgrid(f: &SampledField, alpha: f64, per_half: usize, decades: f64) -> Result<TGrid> {
    if !(alpha >= 0.0) {
        return Err(domain(format!("alpha must be nonnegative, got {alpha}")));
    }
    let radii = spectral_radii(&f.forward()?);
    if radii.is_empty() {
        return Ok(TGrid {
            nodes: vec![],
            weights: vec![],
            rule: TRule::Breakpoint,
            lower: 0.0,
            upper: 0.0,
        });
    }
    let mut cuts = radii.clone();
    let last = *radii.last().expect("nonempty");
    cuts.push(2.0 * last);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for w in cuts.windows(2) {
        let (x, wt) = graded_rule(w[0], w[1], 2.0 * alpha, 0.0, per_half);
        nodes.extend(x);
        weights.extend(wt);
    }
    let upper = last * 10f64.powf(decades);
    if upper > 2.0 * last {
        let (s, ws) = gauss_legendre_on(
            (16.0 * decades).ceil() as usize + 8,
            (2.0 * last).ln(),
            upper.ln(),
        );
        for (si, wi) in s.iter().zip(&ws) {
            let t = si.exp();
            nodes.push(t);
            weights.push(wi * t);
        }
    }
    Ok(TGrid {
        nodes,
        weights,
        rule: TRule::Breakpoint,
        lower: radii[0],
        upper: upper.max(2.0 * last),
    })
}

#[derive(Clone, Debug)]
pub struct SquareFunction {
    pub field: SampledField,
    /// log10(t_max / band_max).
    pub margin_decades: f64,
    pub warning: Option<String>,
}

/// Gᵅf = (∫₀^∞ |𝒦ᵅ_t * f|² dt/t)^{1/2} with 𝒦̂ᵅ_t(ξ) = 2(α+1)(|ξ|²/t²)(1−|ξ|²/t²)₊^α.
pub fn square_function_g(f: &SampledField, alpha: f64, tgrid: &TGrid) -> Result<SquareFunction> {
    let spec = f.forward()?;
    let grid = *f.grid();
    let mut acc = vec![0.0; grid.len()];
    for (&t, &w) in tgrid.nodes.iter().zip(&tgrid.weights) {
        let out = apply_linear_spectrum(&LinearSymbol::SquareKernel { alpha, t }, &spec)?;
        for (a, v) in acc.iter_mut().zip(out.values()) {
            *a += w / t * v.norm_sqr();
        }
    }
    let band = spectral_radii(&spec).last().copied().unwrap_or(0.0);
    let margin_decades = if band > 0.0 {
        (tgrid.upper / band).log10()
    } else {
        f64::INFINITY
    };
    let warning = (margin_decades < 2.0)
        .then(|| format!("t-grid reaches only {margin_decades:.2} decades past the band edge"));
    Ok(SquareFunction {
        field: real_field(grid, acc.into_iter().map(f64::sqrt).collect())?,
        margin_decades,
        warning,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LocalVariant {
    /// (∫₀^∞ |ψ(ν^{−1}(1 − |D|²/t²))f|² dt/t)^{1/2}
    Psi,
    /// (∫_{1/2}^{2} |φ((t² − |D|²)/ν)f|² dt)^{1/2}
    Phi,
}

fn check_nu(nu: f64) -> Result<()> {
    if nu > 0.0 && nu < 1.0 / 16.0 {
        Ok(())
    } else {
        Err(domain(format!("nu must lie in (0, 1/16), got {nu}")))
    }
}

/// Lattice t-grid keeping only nodes where some significant mode is active.
/// `density` is the number of nodes across one mode's support.
pub fn local_tgrid(
    f: &SampledField,
    variant: LocalVariant,
    nu: f64,
    density: usize,
) -> Result<TGrid> {
    check_nu(nu)?;
    let radii = spectral_radii(&f.forward()?);
    let density = density.max(4) as f64;
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    match variant {
        LocalVariant::Psi => {
            // supp in t: |ξ|/√(1 − ν/2) ≤ t ≤ |ξ|/√(1 − 2ν)
            let lo_f = -0.5 * (1.0 - 0.5 * nu).ln();
            let hi_f = -0.5 * (1.0 - 2.0 * nu).ln();
            let h = (hi_f - lo_f) / density;
            let mut ks: Vec<i64> = Vec::new();
            for r in &radii {
                let a = ((r.ln() + lo_f) / h).floor() as i64;
                let b = ((r.ln() + hi_f) / h).ceil() as i64;
                ks.extend(a..=b);
            }
            ks.sort_unstable();
            ks.dedup();
            for k in ks {
                let t = (k as f64 * h).exp();
                nodes.push(t);
                weights.push(h * t);
            }
            let (lower, upper) = bounds(&nodes);
            Ok(TGrid {
                nodes,
                weights,
                rule: TRule::Uniform,
                lower,
                upper,
            })
        }
        LocalVariant::Phi => {
            // supp in t: |t² − |ξ|²| ≤ ν, width about ν/t ≥ ν/2 on [1/2, 2]
            let h = 0.5 * nu / density;
            let n = (1.5 / h).ceil() as usize;
            let h = 1.5 / n as f64;
            for i in 0..n {
                let t = 0.5 + (i as f64 + 0.5) * h;
                if radii.iter().any(|r| (t * t - r * r).abs() < nu) {
                    nodes.push(t);
                    weights.push(h);
                }
            }
            Ok(TGrid {
                nodes,
                weights,
                rule: TRule::Uniform,
                lower: 0.5,
                upper: 2.0,
            })
        }
    }
}

fn bounds(nodes: &[f64]) -> (f64, f64) {
    (
        nodes.first().copied().unwrap_or(0.0),
        nodes.last().copied().unwrap_or(0.0),
    )
}

pub fn local_square(
    f: &SampledField,
    variant: LocalVariant,
    nu: f64,
    tgrid: &TGrid,
) -> Result<SampledField> {
    check_nu(nu)?;
    let spec = f.forward()?;
    let grid = *f.grid();
    let mut acc = vec![0.0; grid.len()];
    for (&t, &w) in tgrid.nodes.iter().zip(&tgrid.weights) {
        let (symbol, weight) = match variant {
            LocalVariant::Psi => (LinearSymbol::Localized { nu, radius: t }, w / t),
            LocalVariant::Phi => (LinearSymbol::LocalPhi { nu, t }, w),
        };
        let out = apply_linear_spectrum(&symbol, &spec)?;
        for (a, v) in acc.iter_mut().zip(out.values()) {
            *a += weight * v.norm_sqr();
        }
    }
    real_field(grid, acc.into_iter().map(f64::sqrt).collect())
}

/// (R^{−1}∫₀^R |B_t^δ g|² dt)^{1/2} by the midpoint rule with `nodes` points.
pub fn stein_avg_square(
    g: &SampledField,
    delta: f64,
    r: f64,
    nodes: usize,
) -> Result<SampledField> {
    let tg = TGrid::uniform(0.0, r, nodes)?;
    let spec = g.forward()?;
    let grid = *g.grid();
    let mut acc = vec![0.0; grid.len()];
    for (&t, &w) in tg.nodes.iter().zip(&tg.weights) {
        let out = apply_linear_spectrum(&LinearSymbol::BrDisc { delta, t }, &spec)?;
        for (a, v) in acc.iter_mut().zip(out.values()) {
            *a += w * v.norm_sqr();
        }
    }
    real_field(grid, acc.into_iter().map(|a| (a / r).sqrt()).collect())
}

/// Nodewise max of [`stein_avg_square`] over an R-grid.
pub fn stein_avg_square_sup(
    g: &SampledField,
    delta: f64,
    rgrid: &RGrid,
    nodes: usize,
) -> Result<SampledField> {
    let mut best = vec![0.0f64; g.grid().len()];
    for &r in &rgrid.values {
        let v = stein_avg_square(g, delta, r, nodes)?;
        for (b, x) in best.iter_mut().zip(v.values()) {
            *b = b.max(x.re);
        }
    }
    real_field(*g.grid(), best)
}

/// max nodewise |B_t^δ g − Σ_{k=1..d}(B_t^{δ+k−1} g − B_t^{δ+k} g) − B_t^{δ+d} g|.
pub fn telescoping_check(g: &SampledField, delta: f64, t: f64, d: u32) -> Result<f64> {
    if !(t > 0.0) {
        return Err(domain(format!("t must be positive, got {t}")));
    }
    let spec = g.forward()?;
    let b = |k: u32| {
        apply_linear_spectrum(
            &LinearSymbol::BrDisc {
                delta: delta + k as f64,
                t,
            },
            &spec,
        )
    };
    let direct = b(0)?;
    let mut sum = b(d)?;
    for k in 1..=d {
        sum.add_assign(&b(k - 1)?.sub(&b(k)?)?)?;
    }
    direct.max_abs_diff(&sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bump::psi;
    use crate::grid::{Grid, Space};
    use crate::quad::{integrate, AdaptiveOptions};
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn tone(grid: Grid, k: i64) -> SampledField {
        SampledField::tone(grid, [k, 0], Complex64::new(1.0, 0.0))
    }

    #[test]
    fn g_on_tones_matches_scalar_integral() {
        let grid = Grid::new(1, 16.0, 128).unwrap();
        for alpha in [0.0, 0.5, 1.0] {
            let opts = AdaptiveOptions {
                abs_tol: 1e-14,
                rel_tol: 1e-12,
                max_intervals: 2000,
            };
            let oracle = integrate(
                |s| {
                    let m = 2.0 * (alpha + 1.0) * s * s * (1.0 - s * s).max(0.0).powf(alpha);
                    m * m / s
                },
                0.0,
                1.0,
                opts,
            )
            .value;
            assert!((oracle - g_plancherel_constant(alpha)).abs() < 1e-10);
            for k in [3, 17, 40] {
                let f = tone(grid, k);
                let tg = g_tgrid(&f, alpha, 8, 3.0).unwrap();
                let g = square_function_g(&f, alpha, &tg).unwrap();
                assert!(g.warning.is_none());
                for v in g.field.values() {
                    assert!(
                        (v.re - oracle.sqrt()).abs() < 1e-6,
                        "alpha {alpha} k {k}: {}",
                        v.re
                    );
                }
            }
        }
    }

    #[test]
    fn g_of_zero_is_zero() {
        let grid = Grid::new(1, 16.0, 64).unwrap();
        let f = SampledField::zeros(grid, Space::Physical);
        let tg = g_tgrid(&f, 0.0, 4, 2.0).unwrap();
        assert_eq!(
            square_function_g(&f, 0.0, &tg).unwrap().field.max_abs(),
            0.0
        );
    }

    fn local_oracle(nu: f64) -> f64 {
        let opts = AdaptiveOptions {
            abs_tol: 1e-15,
            rel_tol: 1e-12,
            max_intervals: 2000,
        };
        integrate(|s| psi((1.0 - s * s) / nu).powi(2) / s, 0.0, 1.0, opts)
            .value
            .sqrt()
    }

    #[test]
    fn local_square_on_tones() {
        let grid = Grid::new(1, 16.0, 128).unwrap();
        let nu = 1.0 / 32.0;
        let oracle = local_oracle(nu);
        for k in [5, 20, 50] {
            let f = tone(grid, k);
            let tg = local_tgrid(&f, LocalVariant::Psi, nu, 64).unwrap();
            let v = local_square(&f, LocalVariant::Psi, nu, &tg).unwrap();
            assert!(
                (v.max_abs() - oracle).abs() < 1e-7 * oracle,
                "k={k}: {} vs {oracle}",
                v.max_abs()
            );
        }
        let ratio = local_oracle(nu) / local_oracle(nu / 2.0);
        assert!((ratio - 2f64.sqrt()).abs() < 0.05, "{ratio}");
        assert!(local_tgrid(&tone(grid, 3), LocalVariant::Psi, 0.1, 64).is_err());
    }

    #[test]
    fn local_phi_variant_on_tone() {
        let grid = Grid::new(1, 16.0, 128).unwrap();
        let nu = 0.05;
        let f = tone(grid, 16);
        let tg = local_tgrid(&f, LocalVariant::Phi, nu, 64).unwrap();
        let v = local_square(&f, LocalVariant::Phi, nu, &tg).unwrap();
        let opts = AdaptiveOptions {
            abs_tol: 1e-15,
            rel_tol: 1e-12,
            max_intervals: 2000,
        };
        let want = integrate(
            |t| crate::bump::theta(1.0 + ((t * t - 1.0) / nu).abs()).powi(2),
            (1.0 - nu).sqrt(),
            (1.0 + nu).sqrt(),
            opts,
        )
        .value
        .sqrt();
        assert!(
            (v.max_abs() - want).abs() < 1e-8 * want,
            "{} vs {want}",
            v.max_abs()
        );
    }

    #[test]
    fn stein_average_and_telescoping() {
        let grid = Grid::new(1, 16.0, 256).unwrap();
        let g = SampledField::from_fn(grid, |x| {
            Complex64::new((-PI * (x[0] - 8.0).powi(2)).exp(), 0.0)
        });
        assert_eq!(
            stein_avg_square(&SampledField::zeros(grid, Space::Physical), 0.5, 2.0, 50)
                .unwrap()
                .max_abs(),
            0.0
        );
        for d in 1..=5 {
            assert!(telescoping_check(&g, 0.3, 1.7, d).unwrap() < 1e-12);
        }
        let rg = RGrid::new(vec![1.0, 2.0, 4.0], 4).unwrap();
        let sup = stein_avg_square_sup(&g, 0.5, &rg, 64).unwrap();
        let one = stein_avg_square(&g, 0.5, 2.0, 64).unwrap();
        for (a, b) in sup.values().iter().zip(one.values()) {
            assert!(a.re >= b.re);
        }
    }
}
