//! Smooth dyadic partition of unity.
//!
//! `theta` is the normalized integral of the mollifier `h(u) = e^{−1/(u(1−u))}`:
//! `theta(s) = 1 − H(s − 1)` with `H(u) = ∫₀ᵘ h / ∫₀¹ h`. `H` is tabulated as
//! piecewise Taylor polynomials (1024 cells, degree 23) whose coefficients are
//! exact power-series jets of `h`, so values are accurate to rounding and
//! derivatives of every order come from the same jets.

use std::sync::OnceLock;

use crate::error::{domain, Error, Result};

const CELLS: usize = 1024;
const DEG: usize = 22;

/// Taylor coefficients of `h(u0 + d)` in `d`, orders `0..=order`.
pub fn mollifier_jet(u0: f64, order: usize) -> Vec<f64> {
    let mut e = vec![0.0; order + 1];
    if !(u0 > 0.0 && u0 < 1.0) {
        return e;
    }
    let a0 = u0 * (1.0 - u0);
    if 1.0 / a0 > 740.0 {
        return e;
    }
    let a1 = 1.0 - 2.0 * u0;
    // coefficients of 1/(u(1−u)) around u0
    let mut r = vec![0.0; order + 1];
    r[0] = 1.0 / a0;
    for k in 1..=order {
        let prev2 = if k >= 2 { r[k - 2] } else { 0.0 };
        r[k] = -(a1 * r[k - 1] - prev2) / a0;
    }
    e[0] = (-r[0]).exp();
    for k in 1..=order {
        let mut s = 0.0;
        for j in 1..=k {
            s += j as f64 * (-r[j]) * e[k - j];
        }
        e[k] = s / k as f64;
    }
    e
}

struct ThetaTable {
    polys: Vec<[f64; DEG + 2]>,
    norm: f64,
}

fn table() -> &'static ThetaTable {
    static TABLE: OnceLock<ThetaTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let w = 0.5 / CELLS as f64;
        let mut polys = Vec::with_capacity(CELLS);
        let mut base = 0.0;
        for i in 0..CELLS {
            let c = (2 * i + 1) as f64 * w;
            let e = mollifier_jet(c, DEG);
            let mut p = [0.0; DEG + 2];
            let mut left = 0.0;
            let mut full = 0.0;
            for k in 0..=DEG {
                let wk = w.powi(k as i32 + 1) / (k as f64 + 1.0);
                let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
                left += e[k] * sign * wk;
                full += e[k] * (wk - sign * wk);
                p[k + 1] = e[k] / (k as f64 + 1.0);
            }
            p[0] = base - left;
            base += full;
            polys.push(p);
        }
        for p in &mut polys {
            for v in p.iter_mut() {
                *v /= base;
            }
        }
        ThetaTable { polys, norm: base }
    })
}

/// Normalized primitive of the mollifier, H(0) = 0, H(1) = 1.
pub fn mollifier_cdf(u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    let t = table();
    let i = ((u * CELLS as f64) as usize).min(CELLS - 1);
    let d = u - (i as f64 + 0.5) / CELLS as f64;
    let p = &t.polys[i];
    let mut v = p[DEG + 1];
    for k in (0..=DEG).rev() {
        v = v * d + p[k];
    }
    v.clamp(0.0, 1.0)
}

/// ∫₀¹ e^{−1/(u(1−u))} du.
pub fn mollifier_mass() -> f64 {
    table().norm
}

/// Smooth non-increasing step: 1 on s ≤ 1, 0 on s ≥ 2.
pub fn theta(s: f64) -> f64 {
    if s <= 1.0 {
        1.0
    } else if s >= 2.0 {
        0.0
    } else {
        1.0 - mollifier_cdf(s - 1.0)
    }
}

/// ψ(s) = θ(s) − θ(2s), supported in [1/2, 2].
pub fn psi(s: f64) -> f64 {
    theta(s) - theta(2.0 * s)
}

/// ψ₀(t) = 1 − θ(4(1 − t)).
pub fn psi0(t: f64) -> f64 {
    1.0 - theta(4.0 * (1.0 - t))
}

/// Seam used to split ψ₀: 1 on t ≤ 3/32, 0 on t ≥ 3/16.
fn seam(t: f64) -> f64 {
    theta(t * 32.0 / 3.0)
}

/// ψ₀¹ = ψ₀·θ(32t/3), supported in [0, 3/16] for t ≥ 0.
pub fn psi0_1(t: f64) -> f64 {
    psi0(t) * seam(t)
}

/// ψ₀² = ψ₀ − ψ₀¹, supported in [3/32, 3/4].
pub fn psi0_2(t: f64) -> f64 {
    psi0(t) - psi0_1(t)
}

/// Taylor coefficients of θ at `s`.
pub fn theta_jet(s: f64, order: usize) -> Vec<f64> {
    let mut c = vec![0.0; order + 1];
    c[0] = theta(s);
    if s > 1.0 && s < 2.0 {
        let e = mollifier_jet(s - 1.0, order.saturating_sub(1));
        let z = mollifier_mass();
        for k in 1..=order {
            c[k] = -e[k - 1] / (k as f64 * z);
        }
    }
    c
}

/// Jet of `x ↦ g(a·x + b)` from the jet of `g` at `a·x + b`.
fn affine(jet: &mut [f64], a: f64) {
    let mut p = 1.0;
    for c in jet.iter_mut() {
        *c *= p;
        p *= a;
    }
}

pub fn jet_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().min(b.len());
    (0..n)
        .map(|k| (0..=k).map(|i| a[i] * b[k - i]).sum())
        .collect()
}

/// Derivatives d^k f from Taylor coefficients.
pub fn jet_to_derivatives(jet: &[f64]) -> Vec<f64> {
    let mut fact = 1.0;
    jet.iter()
        .enumerate()
        .map(|(k, c)| {
            if k > 0 {
                fact *= k as f64;
            }
            c * fact
        })
        .collect()
}

/// A compactly supported smooth function with exact Taylor jets.
pub trait SmoothFn: Sync {
    fn value(&self, x: f64) -> f64;
    fn taylor(&self, x: f64, order: usize) -> Result<Vec<f64>>;
    fn support(&self) -> (f64, f64);
    /// Highest derivative order that can be produced reliably.
    fn max_order(&self) -> usize {
        64
    }
}

pub struct Psi;
pub struct Psi0;
pub struct Psi0Part1;
pub struct Psi0Part2;
pub struct Zero;

impl SmoothFn for Psi {
    fn value(&self, x: f64) -> f64 {
        psi(x)
    }
    fn taylor(&self, x: f64, order: usize) -> Result<Vec<f64>> {
        let a = theta_jet(x, order);
        let mut b = theta_jet(2.0 * x, order);
        affine(&mut b, 2.0);
        Ok(a.iter().zip(&b).map(|(u, v)| u - v).collect())
    }
    fn support(&self) -> (f64, f64) {
        (0.5, 2.0)
    }
}

fn psi0_jet(t: f64, order: usize) -> Vec<f64> {
    let mut j = theta_jet(4.0 * (1.0 - t), order);
    affine(&mut j, -4.0);
    j.iter_mut().for_each(|c| *c = -*c);
    j[0] = psi0(t);
    j
}

impl SmoothFn for Psi0 {
    fn value(&self, x: f64) -> f64 {
        psi0(x)
    }
    fn taylor(&self, x: f64, order: usize) -> Result<Vec<f64>> {
        Ok(psi0_jet(x, order))
    }
    fn support(&self) -> (f64, f64) {
        (0.0, 0.75)
    }
}

fn seam_jet(t: f64, order: usize) -> Vec<f64> {
    let mut j = theta_jet(t * 32.0 / 3.0, order);
    affine(&mut j, 32.0 / 3.0);
    j
}

impl SmoothFn for Psi0Part1 {
    fn value(&self, x: f64) -> f64 {
        psi0_1(x)
    }
    fn taylor(&self, x: f64, order: usize) -> Result<Vec<f64>> {
        let mut j = jet_mul(&psi0_jet(x, order), &seam_jet(x, order));
        j[0] = psi0_1(x);
        Ok(j)
    }
    fn support(&self) -> (f64, f64) {
        (0.0, 3.0 / 16.0)
    }
}

impl SmoothFn for Psi0Part2 {
    fn value(&self, x: f64) -> f64 {
        psi0_2(x)
    }
    fn taylor(&self, x: f64, order: usize) -> Result<Vec<f64>> {
        let a = psi0_jet(x, order);
        let b = Psi0Part1.taylor(x, order)?;
        let mut j: Vec<f64> = a.iter().zip(&b).map(|(u, v)| u - v).collect();
        j[0] = psi0_2(x);
        Ok(j)
    }
    fn support(&self) -> (f64, f64) {
        (3.0 / 32.0, 0.75)
    }
}

impl SmoothFn for Zero {
    fn value(&self, _x: f64) -> f64 {
        0.0
    }
    fn taylor(&self, _x: f64, order: usize) -> Result<Vec<f64>> {
        Ok(vec![0.0; order + 1])
    }
    fn support(&self) -> (f64, f64) {
        (0.0, 0.0)
    }
}

/// `x ↦ f(x)/divisor`.
pub struct Scaled<'a> {
    pub inner: &'a dyn SmoothFn,
    pub divisor: f64,
}

impl SmoothFn for Scaled<'_> {
    fn value(&self, x: f64) -> f64 {
        self.inner.value(x) / self.divisor
    }
    fn taylor(&self, x: f64, order: usize) -> Result<Vec<f64>> {
        Ok(self
            .inner
            .taylor(x, order)?
            .into_iter()
            .map(|c| c / self.divisor)
            .collect())
    }
    fn support(&self) -> (f64, f64) {
        self.inner.support()
    }
    fn max_order(&self) -> usize {
        self.inner.max_order()
    }
}

/// ψ^k(x) = x^{−k−ρ} ψ(x).
#[derive(Clone, Copy, Debug)]
pub struct ScaledPsi {
    pub k: u32,
    pub rho: f64,
}

/// Build ψ^k(x) = x^{−k−ρ}ψ(x) for k ≥ 0, ρ > 0.
pub fn scaled_family(k: u32, rho: f64) -> Result<ScaledPsi> {
    if !(rho > 0.0) {
        return Err(domain(format!("rho must be positive, got {rho}")));
    }
    Ok(ScaledPsi { k, rho })
}

impl ScaledPsi {
    /// Growth envelope 2^{N+k} k^{N+1} for the first N derivatives.
    pub fn envelope(&self, n: usize) -> f64 {
        2f64.powi((n + self.k as usize) as i32) * (self.k as f64).powi(n as i32 + 1)
    }
}

impl SmoothFn for ScaledPsi {
    fn value(&self, x: f64) -> f64 {
        let p = psi(x);
        if p == 0.0 {
            0.0
        } else {
            x.powf(-(self.k as f64) - self.rho) * p
        }
    }
    fn taylor(&self, x: f64, order: usize) -> Result<Vec<f64>> {
        let a = self.k as f64 + self.rho;
        let mut pw = vec![0.0; order + 1];
        pw[0] = x.powf(-a);
        for m in 1..=order {
            pw[m] = pw[m - 1] * (-a - (m - 1) as f64) / (m as f64 * x);
        }
        Ok(jet_mul(&pw, &Psi.taylor(x, order)?))
    }
    fn support(&self) -> (f64, f64) {
        (0.5, 2.0)
    }
}

/// A plain closure, differentiated by Richardson-extrapolated central differences.
pub struct Sampled<F: Fn(f64) -> f64 + Sync> {
    pub f: F,
    pub support: (f64, f64),
    pub step: f64,
}

/// Highest order for which finite differences are trusted.
pub const FD_MAX_ORDER: usize = 6;

impl<F: Fn(f64) -> f64 + Sync> SmoothFn for Sampled<F> {
    fn value(&self, x: f64) -> f64 {
        (self.f)(x)
    }
    fn taylor(&self, x: f64, order: usize) -> Result<Vec<f64>> {
        if order > FD_MAX_ORDER {
            return Err(Error::UnstableDerivative {
                order,
                limit: FD_MAX_ORDER,
            });
        }
        let mut fact = 1.0;
        let mut out = vec![(self.f)(x)];
        for k in 1..=order {
            fact *= k as f64;
            out.push(richardson_derivative(&self.f, x, k, self.step) / fact);
        }
        Ok(out)
    }
    fn support(&self) -> (f64, f64) {
        self.support
    }
    fn max_order(&self) -> usize {
        FD_MAX_ORDER
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Central k-th difference quotient with step h (error O(h²)).
pub fn central_difference(f: &dyn Fn(f64) -> f64, x: f64, k: usize, h: f64) -> f64 {
    let mut s = 0.0;
    for i in 0..=k {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        s += sign * binomial(k, i) * f(x + (k as f64 / 2.0 - i as f64) * h);
    }
    s / h.powi(k as i32)
}

/// Two Richardson steps on the central difference (error O(h⁶)).
pub fn richardson_derivative(f: &dyn Fn(f64) -> f64, x: f64, k: usize, h: f64) -> f64 {
    let d1 = central_difference(f, x, k, h);
    let d2 = central_difference(f, x, k, h / 2.0);
    let d4 = central_difference(f, x, k, h / 4.0);
    let r1 = (4.0 * d2 - d1) / 3.0;
    let r2 = (4.0 * d4 - d2) / 3.0;
    (16.0 * r2 - r1) / 15.0
}

/// Default sampling density for derivative sups.
pub const SUP_SAMPLES: usize = 6001;

/// sup over a uniform sample of [a, b] of |d^k f| for k = 0..=order.
pub fn deriv_sup(
    f: &dyn SmoothFn,
    order: usize,
    interval: (f64, f64),
    samples: usize,
) -> Result<Vec<f64>> {
    if order > f.max_order() {
        return Err(Error::UnstableDerivative {
            order,
            limit: f.max_order(),
        });
    }
    let (a, b) = interval;
    let mut sup = vec![0.0f64; order + 1];
    let n = samples.max(2);
    for i in 0..n {
        let x = a + (b - a) * i as f64 / (n - 1) as f64;
        let d = jet_to_derivatives(&f.taylor(x, order)?);
        for (s, v) in sup.iter_mut().zip(&d) {
            *s = s.max(v.abs());
        }
    }
    Ok(sup)
}

/// Derivative-bound certificates for the partition functions.
#[derive(Clone, Debug)]
pub struct BumpSystem {
    pub n_der: usize,
    pub psi_sup: Vec<f64>,
    pub psi0_sup: Vec<f64>,
    pub psi0_1_sup: Vec<f64>,
    pub psi0_2_sup: Vec<f64>,
}

/// Orders required for the C^N class in dimension n: 20n + 2.
pub fn required_order(n: usize) -> usize {
    20 * n + 2
}

pub fn build_bumps(n_der: usize) -> Result<BumpSystem> {
    if n_der < 2 {
        return Err(domain(format!("N_der must be at least 2, got {n_der}")));
    }
    Ok(BumpSystem {
        n_der,
        psi_sup: deriv_sup(&Psi, n_der, (0.5, 2.0), SUP_SAMPLES)?,
        psi0_sup: deriv_sup(&Psi0, n_der, (0.0, 1.0), SUP_SAMPLES)?,
        psi0_1_sup: deriv_sup(&Psi0Part1, n_der, (0.0, 1.0), SUP_SAMPLES)?,
        psi0_2_sup: deriv_sup(&Psi0Part2, n_der, (0.0, 1.0), SUP_SAMPLES)?,
    })
}

impl BumpSystem {
    /// D = max over orders ≤ N_der of sup|ψ^{(k)}|.
    pub fn psi_constant(&self) -> f64 {
        self.psi_sup.iter().cloned().fold(0.0, f64::max)
    }
}

/// Result of a C^N(I) membership test.
#[derive(Clone, Debug, PartialEq)]
pub struct CnReport {
    pub bound: f64,
    pub pass: bool,
    pub per_order: Vec<f64>,
}

/// Is `h` in C^N(I), i.e. supported in I with sup|d^k h| ≤ 1 for k ≤ N?
pub fn cn_membership(h: &dyn SmoothFn, interval: (f64, f64), n: usize) -> Result<CnReport> {
    let (a, b) = interval;
    let (sa, sb) = h.support();
    if sa < sb && (sa < a || sb > b) {
        return Err(domain(format!(
            "support [{sa}, {sb}] not inside [{a}, {b}]"
        )));
    }
    let per_order = deriv_sup(h, n, interval, SUP_SAMPLES)?;
    let bound = per_order.iter().cloned().fold(0.0, f64::max);
    Ok(CnReport {
        bound,
        pass: bound <= 1.0,
        per_order,
    })
}

/// 1 − ψ₀(t) − Σ_{j=2..J} ψ(2^j(1−t)) for t ∈ [0,1), J ≥ 2.
pub fn partition_residual(t: f64, big_j: u32) -> Result<f64> {
    if !(0.0..1.0).contains(&t) {
        return Err(domain(format!(
            "partition is defined for t in [0,1), got {t}"
        )));
    }
    if big_j < 2 {
        return Err(domain(format!("J must be at least 2, got {big_j}")));
    }
    let mut r = 1.0 - psi0(t);
    let mut scale = 4.0;
    for _ in 2..=big_j {
        r -= psi(scale * (1.0 - t));
        scale *= 2.0;
    }
    Ok(r)
}

/// The telescoped tail θ(2^{J+1}(1−t)).
pub fn partition_tail(t: f64, big_j: u32) -> f64 {
    theta(2f64.powi(big_j as i32 + 1) * (1.0 - t))
}

/// CSV table (x, ψ, ψ₀, ψ₀¹, ψ₀²) on `points` nodes of [0, 2.25].
pub fn bump_table_csv(points: usize) -> String {
    let mut out = String::from("x,psi,psi0,psi0_1,psi0_2\n");
    let n = points.max(2);
    for i in 0..n {
        let x = 2.25 * i as f64 / (n - 1) as f64;
        out.push_str(&format!(
            "{:.6},{:.17e},{:.17e},{:.17e},{:.17e}\n",
            x,
            psi(x),
            psi0(x),
            psi0_1(x),
            psi0_2(x)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate, AdaptiveOptions};

    #[test]
    fn step_endpoints() {
        assert_eq!(theta(1.0), 1.0);
        assert_eq!(theta(2.0), 0.0);
        assert_eq!(psi(1.0), 1.0);
        assert_eq!(psi0(0.0), 1.0);
        assert!((theta(1.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn cdf_matches_adaptive_quadrature() {
        let opts = AdaptiveOptions {
            abs_tol: 1e-17,
            rel_tol: 1e-14,
            max_intervals: 2000,
        };
        let h = |u: f64| {
            if u <= 0.0 || u >= 1.0 {
                0.0
            } else {
                (-1.0 / (u * (1.0 - u))).exp()
            }
        };
        let z = integrate(h, 0.0, 1.0, opts).value;
        assert!((z / mollifier_mass() - 1.0).abs() < 1e-13);
        for u in [0.05, 0.2, 0.37, 0.5, 0.81, 0.97] {
            let v = integrate(h, 0.0, u, opts).value / z;
            assert!((v - mollifier_cdf(u)).abs() < 1e-14, "u={u}");
        }
    }

    #[test]
    fn cdf_symmetry() {
        for i in 0..=1000 {
            let u = i as f64 / 1000.0;
            assert!((mollifier_cdf(u) + mollifier_cdf(1.0 - u) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn jets_agree_with_richardson() {
        let f = |x: f64| psi(x);
        for x in [0.6, 0.8, 1.3, 1.55, 1.9] {
            let d = jet_to_derivatives(&Psi.taylor(x, 4).unwrap());
            for (k, dk) in d.iter().enumerate().skip(1) {
                let fd = richardson_derivative(&f, x, k, 0.005);
                assert!(
                    (fd - dk).abs() <= 1e-5 * (1.0 + dk.abs()),
                    "x={x} k={k}: {fd} vs {dk}"
                );
            }
        }
    }

    #[test]
    fn partition_examples() {
        assert_eq!(partition_residual(0.5, 4).unwrap(), 0.0);
        assert_eq!(partition_residual(1.0 - 2f64.powi(-10), 4).unwrap(), 1.0);
        assert_eq!(partition_residual(1.0 - 0.125, 10).unwrap(), 0.0);
        assert!(partition_residual(1.0, 4).is_err());
        assert!(partition_residual(0.5, 1).is_err());
        let s: f64 = (2..=30).map(|j| psi(2f64.powi(j) * 0.4)).sum::<f64>() + psi0(0.6);
        assert!((s - 1.0).abs() < 1e-14);
    }

    #[test]
    fn split_supports() {
        for i in 0..=4000 {
            let t = i as f64 / 4000.0;
            assert_eq!(psi0_1(t) + psi0_2(t), psi0(t));
            if t > 3.0 / 16.0 {
                assert_eq!(psi0_1(t), 0.0);
            }
            if !(3.0 / 32.0..=0.75).contains(&t) {
                assert_eq!(psi0_2(t), 0.0);
            }
        }
    }

    #[test]
    fn cn_examples() {
        assert!(cn_membership(&Zero, (0.5, 2.0), 6).unwrap().pass);
        let sys = build_bumps(6).unwrap();
        let d = sys.psi_constant();
        let normalized = Scaled {
            inner: &Psi,
            divisor: d,
        };
        let r = cn_membership(&normalized, (0.5, 2.0), 6).unwrap();
        assert!(r.pass, "bound {}", r.bound);
        let big = Scaled {
            inner: &Psi,
            divisor: 0.1,
        };
        assert!(!cn_membership(&big, (0.5, 2.0), 6).unwrap().pass);
        let fd = Sampled {
            f: psi,
            support: (0.5, 2.0),
            step: 0.01,
        };
        assert!(matches!(
            cn_membership(&fd, (0.5, 2.0), 7),
            Err(Error::UnstableDerivative { .. })
        ));
    }

    #[test]
    fn scaled_family_values() {
        let s = scaled_family(0, 1.0).unwrap();
        assert_eq!(s.value(1.0), 1.0);
        assert!(scaled_family(1, 0.0).is_err());
        assert_eq!(scaled_family(3, 0.5).unwrap().envelope(4), 128.0 * 243.0);
    }
}
