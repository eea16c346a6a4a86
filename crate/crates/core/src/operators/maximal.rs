use super::{apply_linear_spectrum, bilinear_br, real_field, RGrid};
use crate::error::{domain, Result};
use crate::grid::{Grid, SampledField};
use crate::multiplier::{BilinearOptions, LinearSymbol};

/// sup over the R-grid of |ℬ^α_R(f, g)|, nodewise.
pub fn maximal_bilinear(
    f: &SampledField,
    g: &SampledField,
    alpha: f64,
    rgrid: &RGrid,
    opts: &BilinearOptions,
) -> Result<SampledField> {
    rgrid.check_nyquist(f.grid().nyquist())?;
    let mut best = vec![0.0f64; f.grid().len()];
    for &r in &rgrid.values {
        let b = bilinear_br(f, g, alpha, r, opts)?;
        for (m, v) in best.iter_mut().zip(b.values()) {
            *m = m.max(v.norm());
        }
    }
    real_field(*f.grid(), best)
}

/// Window radii 0, 1, 2, 4, … (in samples) below N/2, closed by the
/// whole-period window (N−1)/2.
pub fn dyadic_radii(grid: &Grid) -> Vec<usize> {
    let mut out = vec![0];
    let mut r = 1;
    while 2 * r < grid.samples_per_axis {
        out.push(r);
        r *= 2;
    }
    let whole = (grid.samples_per_axis - 1) / 2;
    if *out.last().expect("nonempty") < whole {
        out.push(whole);
    }
    out
}

/// Centered periodic moving average of width 2r+1 along one line.
fn box_line(line: &[f64], r: usize, out: &mut [f64]) {
    let n = line.len();
    let mut prefix = vec![0.0; 3 * n + 1];
    for i in 0..3 * n {
        prefix[i + 1] = prefix[i] + line[i % n];
    }
    let width = (2 * r + 1) as f64;
    for (i, o) in out.iter_mut().enumerate() {
        // window i−r ..= i+r shifted by n to stay nonnegative
        let lo = i + n - r;
        *o = (prefix[lo + 2 * r + 1] - prefix[lo]) / width;
    }
}

fn box_average(abs: &[f64], grid: &Grid, r: usize) -> Vec<f64> {
    let n = grid.samples_per_axis;
    let mut out = vec![0.0; abs.len()];
    if grid.dim == 1 {
        box_line(abs, r, &mut out);
        return out;
    }
    let mut rows = vec![0.0; abs.len()];
    for k in 0..n {
        box_line(&abs[k * n..(k + 1) * n], r, &mut rows[k * n..(k + 1) * n]);
    }
    let mut col = vec![0.0; n];
    let mut col_out = vec![0.0; n];
    for c in 0..n {
        for k in 0..n {
            col[k] = rows[k * n + c];
        }
        box_line(&col, r, &mut col_out);
        for k in 0..n {
            out[k * n + c] = col_out[k];
        }
    }
    out
}

/// Centered Hardy–Littlewood maximal function of |f| over the given window
/// radii (cubes of side 2r+1 samples, periodic).
pub fn hl_maximal(f: &SampledField, radii: &[usize]) -> Result<SampledField> {
    let grid = *f.grid();
    if radii.is_empty() {
        return Err(domain("window set is empty"));
    }
    if let Some(r) = radii.iter().find(|r| 2 * **r + 1 > grid.samples_per_axis) {
        return Err(domain(format!("window radius {r} exceeds the grid")));
    }
    let abs: Vec<f64> = f.values().iter().map(|v| v.norm()).collect();
    let mut best = vec![0.0f64; abs.len()];
    for &r in radii {
        let avg = box_average(&abs, &grid, r);
        for (b, a) in best.iter_mut().zip(&avg) {
            *b = b.max(*a);
        }
    }
    real_field(grid, best)
}

/// max over nodes of sup_t |B_t^δ f| / M_HL f, ignoring nodes where the
/// maximal function is below 1e−8 of its peak.
pub fn domination_constant(
    f: &SampledField,
    delta: f64,
    ts: &[f64],
    radii: &[usize],
) -> Result<f64> {
    let spec = f.forward()?;
    let mut sup = vec![0.0f64; f.grid().len()];
    for &t in ts {
        let b = apply_linear_spectrum(&LinearSymbol::BrDisc { delta, t }, &spec)?;
        for (s, v) in sup.iter_mut().zip(b.values()) {
            *s = s.max(v.norm());
        }
    }
    let hl = hl_maximal(f, radii)?;
    let peak = hl.max_abs();
    let mut c: f64 = 0.0;
    for (s, h) in sup.iter().zip(hl.values()) {
        if h.re > 1e-8 * peak {
            c = c.max(s / h.re);
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Space;
    use crate::multiplier::BilinearPath;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn bump(grid: Grid, x0: f64) -> SampledField {
        let dim = grid.dim;
        SampledField::from_fn(grid, |x| {
            let r2 = (x[0] - x0).powi(2) + if dim == 2 { (x[1] - x0).powi(2) } else { 0.0 };
            Complex64::new((-PI * r2).exp(), 0.0)
        })
    }

    #[test]
    fn constant_and_domination_of_modulus() {
        for grid in [
            Grid::new(1, 16.0, 64).unwrap(),
            Grid::new(2, 8.0, 16).unwrap(),
        ] {
            let c = SampledField::from_values(
                grid,
                Space::Physical,
                vec![Complex64::new(0.0, 2.5); grid.len()],
            )
            .unwrap();
            let m = hl_maximal(&c, &dyadic_radii(&grid)).unwrap();
            assert!(m.values().iter().all(|v| (v.re - 2.5).abs() < 1e-13));
            let f = bump(grid, 3.0);
            let m = hl_maximal(&f, &dyadic_radii(&grid)).unwrap();
            for (a, b) in m.values().iter().zip(f.values()) {
                assert!(a.re >= b.norm() - 1e-15);
            }
        }
    }

    #[test]
    fn maximal_refinement_is_monotone() {
        let grid = Grid::new(1, 16.0, 128).unwrap();
        let f = bump(grid, 8.0);
        let opts = BilinearOptions {
            path: BilinearPath::Tensor,
            ..Default::default()
        };
        let coarse = RGrid::new(vec![1.0, 2.0, 3.0], 4).unwrap();
        let fine = RGrid::new(vec![1.0, 1.5, 2.0, 2.5, 3.0], 4).unwrap();
        let a = maximal_bilinear(&f, &f, 1.0, &coarse, &opts).unwrap();
        let b = maximal_bilinear(&f, &f, 1.0, &fine, &opts).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!(y.re >= x.re);
        }
        let single =
            maximal_bilinear(&f, &f, 1.0, &RGrid::new(vec![2.0], 4).unwrap(), &opts).unwrap();
        let direct = bilinear_br(&f, &f, 1.0, 2.0, &opts).unwrap().abs();
        assert!(single.max_abs_diff(&direct).unwrap() < 1e-15);
    }

    #[test]
    fn domination_constant_is_finite() {
        let grid = Grid::new(1, 16.0, 256).unwrap();
        let f = bump(grid, 8.0);
        let ts: Vec<f64> = (1..=20).map(|k| 0.4 * k as f64).collect();
        let c = domination_constant(&f, 1.0, &ts, &dyadic_radii(&grid)).unwrap();
        assert!(c.is_finite() && c > 0.5 && c < 50.0, "{c}");
    }
}
