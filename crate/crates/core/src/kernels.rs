//! Real-order Bessel functions and the Bochner–Riesz kernel in dimension 2n.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{domain, Result};
use crate::grid::{Grid, SampledField};
use crate::multiplier::pos_pow;
use crate::quad::{integrate, AdaptiveOptions};
use crate::special::{gamma, ln_gamma};

/// Orders above this are refused; the series prefactor is formed in logs but
/// the integral representation loses accuracy for huge orders.
pub const MAX_ORDER: f64 = 200.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BesselMethod {
    PowerSeries,
    IntegralRepresentation,
}

impl BesselMethod {
    /// Series for x ≤ ν + 8, integral representation beyond.
    pub fn for_argument(nu: f64, x: f64) -> Self {
        if x <= nu + 8.0 {
            BesselMethod::PowerSeries
        } else {
            BesselMethod::IntegralRepresentation
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BesselEval {
    pub order: f64,
    pub method: BesselMethod,
    /// absolute quadrature tolerance (ignored by the series)
    pub tol: f64,
}

impl BesselEval {
    pub fn new(order: f64, method: BesselMethod) -> Result<Self> {
        check_order(order)?;
        Ok(BesselEval {
            order,
            method,
            tol: 1e-13,
        })
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0 && x.is_finite()) {
            return Err(domain(format!(
                "Bessel argument must be finite and nonnegative, got {x}"
            )));
        }
        Ok(match self.method {
            BesselMethod::PowerSeries => series(self.order, x),
            BesselMethod::IntegralRepresentation => integral_rep(self.order, x, self.tol),
        })
    }
}

fn check_order(nu: f64) -> Result<()> {
    if !(0.0..=MAX_ORDER).contains(&nu) {
        return Err(domain(format!(
            "Bessel order must lie in [0, {MAX_ORDER}], got {nu}"
        )));
    }
    Ok(())
}

/// J_ν(x) for real ν ≥ 0 and x ≥ 0.
pub fn bessel_j(nu: f64, x: f64) -> Result<f64> {
    check_order(nu)?;
    BesselEval {
        order: nu,
        method: BesselMethod::for_argument(nu, x),
        tol: 1e-13,
    }
    .eval(x)
}

/// Double-double arithmetic, just enough for the series.
#[derive(Clone, Copy, Debug)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    fn two_sum(a: f64, b: f64) -> Self {
        let s = a + b;
        let bb = s - a;
        Dd {
            hi: s,
            lo: (a - (s - bb)) + (b - bb),
        }
    }

    fn renorm(hi: f64, lo: f64) -> Self {
        let s = hi + lo;
        Dd {
            hi: s,
            lo: lo - (s - hi),
        }
    }

    fn add(self, o: Dd) -> Dd {
        let s = Dd::two_sum(self.hi, o.hi);
        Dd::renorm(s.hi, s.lo + self.lo + o.lo)
    }

    fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p);
        Dd::renorm(p, e + self.hi * o.lo + self.lo * o.hi)
    }

    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self.add(o.mul(Dd::from(-q1)));
        let q2 = r.hi / o.hi;
        let r = r.add(o.mul(Dd::from(-q2)));
        let q3 = r.hi / o.hi;
        Dd::renorm(q1, q2).add(Dd::from(q3))
    }

    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

/// Σ_k (−x²/4)^k Γ(ν+1) / (k! Γ(k+ν+1)), i.e. Γ(ν+1) J_ν(x)/(x/2)^ν, summed
/// in double-double so the alternating terms cancel cleanly.
fn series_normalized(nu: f64, x: f64) -> f64 {
    let half = Dd::from(0.5 * x);
    let q = half.mul(half).neg();
    let mut term = Dd::from(1.0);
    let mut sum = term;
    for k in 0..1000 {
        let kk = (k + 1) as f64;
        let denom = Dd::from(kk).mul(Dd::two_sum(nu, kk));
        term = term.mul(q).div(denom);
        sum = sum.add(term);
        if term.hi.abs() < 1e-34 * sum.hi.abs().max(1e-300) && kk > 0.5 * x {
            break;
        }
    }
    sum.hi + sum.lo
}

fn series(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    let log_pref = nu * (0.5 * x).ln() - ln_gamma(nu + 1.0);
    if log_pref < -740.0 {
        return 0.0;
    }
    let pref = if nu + 1.0 <= 60.0 {
        (0.5 * x).powf(nu) / gamma(nu + 1.0)
    } else {
        log_pref.exp()
    };
    pref * series_normalized(nu, x)
}

/// J_ν(x) = (1/π)∫₀^π cos(νθ − x sin θ) dθ − (sin νπ/π)∫₀^∞ e^{−x sinh s − νs} ds.
fn integral_rep(nu: f64, x: f64, tol: f64) -> f64 {
    let opts = AdaptiveOptions {
        abs_tol: tol,
        rel_tol: 0.0,
        max_intervals: 2000,
    };
    let pieces = ((x + nu) / PI).ceil().max(1.0) as usize;
    let h = PI / pieces as f64;
    let mut first = 0.0;
    for i in 0..pieces {
        let a = i as f64 * h;
        first += integrate(|t| (nu * t - x * t.sin()).cos(), a, a + h, opts).value;
    }
    let s = (nu * PI).sin();
    let second = if s.abs() < 1e-300 {
        0.0
    } else {
        // integrand below e^{−50} past this point
        let end = (50.0 / x).asinh().max(1e-3);
        integrate(|t| (-x * t.sinh() - nu * t).exp(), 0.0, end, opts).value
    };
    (first - s * second) / PI
}

/// J_ν(2πρ)/ρ^ν, continuous through ρ = 0.
fn bessel_over_power(nu: f64, rho: f64) -> Result<f64> {
    let x = 2.0 * PI * rho;
    if x <= nu + 8.0 {
        // (x/2)^ν/ρ^ν = π^ν
        return Ok(PI.powf(nu) / gamma(nu + 1.0) * series_normalized(nu, x));
    }
    Ok(bessel_j(nu, x)? / rho.powf(nu))
}

/// Γ(α+1)π^{−α}: the constant in front of the Bessel ratio.
pub fn kernel_constant(alpha: f64) -> f64 {
    gamma(alpha + 1.0) * PI.powf(-alpha)
}

/// K(0) = R^{2n} π^n Γ(α+1)/Γ(α+n+1), the integral of the multiplier.
pub fn kernel_origin(alpha: f64, r: f64, n: u32) -> f64 {
    let n = n as f64;
    r.powf(2.0 * n) * PI.powf(n) * gamma(alpha + 1.0) / gamma(alpha + n + 1.0)
}

fn check_kernel_args(alpha: f64, r: f64, n: u32) -> Result<()> {
    if !(alpha >= 0.0) {
        return Err(domain(format!("alpha must be nonnegative, got {alpha}")));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(domain(format!("R must be positive, got {r}")));
    }
    if n == 0 {
        return Err(domain("dimension n must be at least 1"));
    }
    Ok(())
}

/// Radial profile k(ρ) with K(y, z) = k(|(y, z)|), ρ in unscaled units.
pub fn kernel_radial(rho: f64, alpha: f64, r: f64, n: u32) -> Result<f64> {
    check_kernel_args(alpha, r, n)?;
    let nu = alpha + n as f64;
    Ok(kernel_constant(alpha) * r.powf(2.0 * n as f64) * bessel_over_power(nu, r * rho)?)
}

/// Inverse Fourier transform of (1 − (|ξ|² + |η|²)/R²)₊^α on ℝ^{2n}, evaluated
/// at (y, z) with y, z ∈ ℝ^n.
pub fn closed_form_kernel(y: &[f64], z: &[f64], alpha: f64, r: f64, n: u32) -> Result<f64> {
    if y.len() != n as usize || z.len() != n as usize {
        return Err(domain(format!("points must have {n} coordinates each")));
    }
    let rho = y.iter().chain(z).map(|v| v * v).sum::<f64>().sqrt();
    kernel_radial(rho, alpha, r, n)
}

#[derive(Clone, Debug, Serialize)]
pub struct KernelComparison {
    pub alpha: f64,
    pub r: f64,
    pub box_length: f64,
    pub samples_per_axis: usize,
    pub window: f64,
    pub points: usize,
    pub max_abs_err: f64,
    pub window_max: f64,
    /// max_abs_err / window_max
    pub rel_err: f64,
    /// |k| at half the box length relative to the window max: size of the
    /// periodization error the grid cannot remove
    pub truncation_estimate: f64,
    pub truncation_dominated: bool,
}

/// Compares the closed form against the inverse DFT of the sampled
/// multiplier on a 2-dimensional grid (n = 1), at every grid node within
/// `window` of the origin.
pub fn kernel_vs_transform(
    alpha: f64,
    r: f64,
    n: u32,
    box_length: f64,
    samples_per_axis: usize,
    window: f64,
) -> Result<KernelComparison> {
    check_kernel_args(alpha, r, n)?;
    if n != 1 {
        return Err(domain(format!(
            "transform comparison needs a 2n-dimensional grid; only n = 1 fits, got {n}"
        )));
    }
    let grid = Grid::new(2, box_length, samples_per_axis)?;
    if grid.nyquist() < r {
        return Err(domain(format!(
            "Nyquist {} below R = {r}: multiplier support is cut",
            grid.nyquist()
        )));
    }
    if window >= 0.5 * box_length {
        return Err(domain(format!(
            "window {window} must stay below half the box {box_length}"
        )));
    }
    let r2 = r * r;
    let spec = SampledField::spectrum_from_fn(grid, |k| {
        num_complex::Complex64::new(pos_pow(1.0 - (k[0] * k[0] + k[1] * k[1]) / r2, alpha), 0.0)
    });
    let phys = spec.inverse()?;
    let mut max_abs_err: f64 = 0.0;
    let mut window_max: f64 = 0.0;
    let mut points = 0;
    for idx in 0..grid.len() {
        let ax = grid.axes(idx);
        let y = grid.signed_index(ax[0]) as f64 * grid.spacing();
        let z = grid.signed_index(ax[1]) as f64 * grid.spacing();
        if y.hypot(z) > window {
            continue;
        }
        let exact = closed_form_kernel(&[y], &[z], alpha, r, 1)?;
        max_abs_err = max_abs_err.max((phys.values()[idx].re - exact).abs());
        window_max = window_max.max(exact.abs());
        points += 1;
    }
    let rel_err = max_abs_err / window_max.max(f64::MIN_POSITIVE);
    let truncation_estimate =
        kernel_radial(0.5 * box_length, alpha, r, 1)?.abs() / window_max.max(f64::MIN_POSITIVE);
    Ok(KernelComparison {
        alpha,
        r,
        box_length,
        samples_per_axis,
        window,
        points,
        max_abs_err,
        window_max,
        rel_err,
        truncation_estimate,
        truncation_dominated: truncation_estimate > rel_err,
    })
}

/// Surface area of the unit sphere in ℝ^{2n}: 2π^n/Γ(n).
pub fn sphere_area(n: u32) -> f64 {
    2.0 * PI.powf(n as f64) / gamma(n as f64)
}

#[derive(Clone, Debug, Serialize)]
pub struct WindowedMass {
    pub windows: Vec<f64>,
    pub masses: Vec<f64>,
}

impl WindowedMass {
    /// mass gained between consecutive windows
    pub fn increments(&self) -> Vec<f64> {
        self.masses.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Increments shrink by at least half at every doubling.
    pub fn converging(&self) -> bool {
        let inc = self.increments();
        inc.len() >= 2 && inc.windows(2).all(|w| w[1] <= 0.5 * w[0])
    }

    /// Increments never shrink: the mass keeps growing without a limit in sight.
    pub fn diverging(&self) -> bool {
        let inc = self.increments();
        inc.len() >= 2 && inc.iter().all(|d| *d > 0.0) && inc.windows(2).all(|w| w[1] >= w[0])
    }
}

/// ∫_{|x| ≤ W} |K(x)| dx over ℝ^{2n} for each window W (ascending).
pub fn windowed_l1_mass(alpha: f64, r: f64, n: u32, windows: &[f64]) -> Result<WindowedMass> {
    check_kernel_args(alpha, r, n)?;
    if windows.is_empty() || windows.windows(2).any(|w| w[1] <= w[0]) || windows[0] <= 0.0 {
        return Err(domain("windows must be positive and strictly increasing"));
    }
    let opts = AdaptiveOptions {
        abs_tol: 1e-12,
        rel_tol: 1e-10,
        max_intervals: 200,
    };
    let area = sphere_area(n);
    let pow = 2 * n as i32 - 1;
    // pieces shorter than half an oscillation of J(2πRρ)
    let piece = 0.25 / r;
    let mut acc = 0.0;
    let mut from = 0.0;
    let mut masses = Vec::with_capacity(windows.len());
    for &w in windows {
        let steps = ((w - from) / piece).ceil().max(1.0) as usize;
        let h = (w - from) / steps as f64;
        for i in 0..steps {
            let a = from + i as f64 * h;
            let q = integrate(
                |rho| {
                    kernel_radial(rho, alpha, r, n)
                        .map(|k| k.abs() * rho.powi(pow))
                        .unwrap_or(f64::NAN)
                },
                a,
                a + h,
                opts,
            );
            if !q.value.is_finite() {
                return Err(domain(format!(
                    "kernel evaluation failed on [{a}, {}]",
                    a + h
                )));
            }
            acc += q.value;
        }
        from = w;
        masses.push(area * acc);
    }
    Ok(WindowedMass {
        windows: windows.to_vec(),
        masses,
    })
}

/// `r,kernel` rows for ρ ∈ [0, r_max].
pub fn kernel_profile_csv(alpha: f64, r: f64, n: u32, r_max: f64, points: usize) -> Result<String> {
    let m = points.max(2);
    let mut out = String::from("r,kernel\n");
    for i in 0..m {
        let rho = r_max * i as f64 / (m - 1) as f64;
        out.push_str(&format!(
            "{rho:.9},{:.17e}\n",
            kernel_radial(rho, alpha, r, n)?
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bessel_constants() {
        assert_eq!(bessel_j(0.0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(1.5, 0.0).unwrap(), 0.0);
        // bisection for the first zero of J₀ on the series
        let (mut a, mut b) = (2.0, 3.0);
        for _ in 0..80 {
            let m = 0.5 * (a + b);
            if series(0.0, a) * series(0.0, m) <= 0.0 {
                b = m;
            } else {
                a = m;
            }
        }
        assert!((a - 2.404825557695773).abs() < 1e-14);
        for x in [0.5, 2.0, 9.0, 40.0, 95.0] {
            let want = (2.0 / (PI * x)).sqrt() * x.sin();
            let got = bessel_j(0.5, x).unwrap();
            assert!(
                (got - want).abs() <= 1e-10 * want.abs().max(1e-3),
                "x={x}: {got} vs {want}"
            );
            let want = (2.0 / (PI * x)).sqrt() * (x.sin() / x - x.cos());
            assert!((bessel_j(1.5, x).unwrap() - want).abs() < 1e-11, "x={x}");
        }
    }

    #[test]
    fn methods_agree_on_overlap() {
        let mut worst: f64 = 0.0;
        for i in 0..10 {
            let nu = 6.0 * i as f64 / 9.0;
            for k in 0..10 {
                let x = 30f64.powf(k as f64 / 9.0);
                let a = BesselEval::new(nu, BesselMethod::PowerSeries)
                    .unwrap()
                    .eval(x)
                    .unwrap();
                let b = BesselEval::new(nu, BesselMethod::IntegralRepresentation)
                    .unwrap()
                    .eval(x)
                    .unwrap();
                worst = worst.max((a - b).abs());
            }
        }
        assert!(worst < 1e-9, "{worst}");
    }

    #[test]
    fn order_guard() {
        assert!(bessel_j(-0.5, 1.0).is_err());
        assert!(bessel_j(1e4, 1.0).is_err());
        assert!(bessel_j(1.0, -1.0).is_err());
        assert!(bessel_j(150.0, 1.0).unwrap() < 1e-300);
        assert_eq!(bessel_j(200.0, 0.01).unwrap(), 0.0);
    }

    #[test]
    fn kernel_origin_and_limit() {
        let k = closed_form_kernel(&[0.0], &[0.0], 0.0, 1.0, 1).unwrap();
        assert!((k - PI).abs() < 1e-14);
        for (alpha, n) in [(0.5, 1), (1.0, 2), (2.3, 1)] {
            let o = kernel_origin(alpha, 1.3, n);
            let near = kernel_radial(1e-7, alpha, 1.3, n).unwrap();
            assert!((near / o - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn kernel_scaling_and_symmetry() {
        let (alpha, r) = (0.7, 2.5);
        for (y, z) in [(0.3, -0.1), (1.7, 2.2), (4.0, 0.0)] {
            let a = closed_form_kernel(&[y], &[z], alpha, r, 1).unwrap();
            let b = r * r * closed_form_kernel(&[r * y], &[r * z], alpha, 1.0, 1).unwrap();
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
            let c = closed_form_kernel(&[z], &[-y], alpha, r, 1).unwrap();
            assert_eq!(a, c);
        }
    }

    #[test]
    fn transform_error_shrinks_with_box() {
        let a = kernel_vs_transform(1.0, 1.0, 1, 32.0, 64, 6.0).unwrap();
        let b = kernel_vs_transform(1.0, 1.0, 1, 64.0, 128, 6.0).unwrap();
        assert!(
            b.rel_err <= 0.5 * a.rel_err,
            "{} -> {}",
            a.rel_err,
            b.rel_err
        );
        assert!(kernel_vs_transform(1.0, 1.0, 1, 64.0, 64, 6.0).is_err());
        assert!(kernel_vs_transform(1.0, 1.0, 2, 64.0, 128, 6.0).is_err());
    }

    #[test]
    fn profile_has_header_and_rows() {
        let csv = kernel_profile_csv(1.0, 1.0, 1, 5.0, 11).unwrap();
        assert_eq!(csv.lines().count(), 12);
        assert!(csv.starts_with("r,kernel\n0.000000000,"));
    }
}
