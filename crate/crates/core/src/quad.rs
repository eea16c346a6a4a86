//! Quadrature: Gauss–Legendre rules, adaptive 21-point Gauss–Kronrod, and a
//! graded-substitution driver for integrands with algebraic endpoint
//! singularities.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule mapped to [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let h = 0.5 * (b - a);
    let c = 0.5 * (a + b);
    (
        x.iter().map(|t| c + h * t).collect(),
        w.iter().map(|v| v * h).collect(),
    )
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_22,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_725,
    0.054_755_896_574_351_995,
    0.075_039_674_810_919_96,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_84,
    0.134_709_217_311_473_34,
    0.142_775_938_577_060_09,
    0.147_739_104_901_338_49,
    0.149_445_554_002_916_9,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

/// One Gauss–Kronrod 21 panel: (integral, error estimate).
pub fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut resk = WGK[10] * fc;
    let mut resg = 0.0;
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * resk;
    let mut resasc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let result = resk * h;
    let resabs = resabs * h.abs();
    let resasc = resasc * h.abs();
    let mut err = ((resk - resg) * h).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (result, err)
}

#[derive(Clone, Copy, Debug)]
pub struct AdaptiveOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        AdaptiveOptions {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_intervals: 4000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    pub intervals: usize,
    pub converged: bool,
}

impl QuadResult {
    pub fn checked(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::Quadrature {
                value: self.value,
                error: self.error,
            })
        }
    }
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive bisection with GK21 panels, worst panel first.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: AdaptiveOptions) -> QuadResult {
    if a == b {
        return QuadResult {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
            intervals: 0,
            converged: true,
        };
    }
    let (v, e) = gk21(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel {
        a,
        b,
        value: v,
        error: e,
    });
    let mut value = v;
    let mut error = e;
    let mut evaluations = 21;
    loop {
        let tol = opts.abs_tol.max(opts.rel_tol * value.abs());
        if error <= tol {
            break;
        }
        if heap.len() >= opts.max_intervals {
            return QuadResult {
                value,
                error,
                evaluations,
                intervals: heap.len(),
                converged: false,
            };
        }
        let worst = heap.pop().expect("nonempty heap");
        let m = 0.5 * (worst.a + worst.b);
        if m <= worst.a || m >= worst.b {
            heap.push(worst);
            return QuadResult {
                value,
                error,
                evaluations,
                intervals: heap.len(),
                converged: false,
            };
        }
        let (v1, e1) = gk21(&f, worst.a, m);
        let (v2, e2) = gk21(&f, m, worst.b);
        evaluations += 42;
        value += v1 + v2 - worst.value;
        error += e1 + e2 - worst.error;
        heap.push(Panel {
            a: worst.a,
            b: m,
            value: v1,
            error: e1,
        });
        heap.push(Panel {
            a: m,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
    // re-sum to shed accumulated update drift
    let panels = heap.into_vec();
    let value = panels.iter().map(|p| p.value).sum();
    let error = panels.iter().map(|p| p.error).sum();
    QuadResult {
        value,
        error,
        evaluations,
        intervals: panels.len(),
        converged: true,
    }
}

/// Power `m` for the substitution `s = w^m` near an endpoint where the
/// integrand behaves like `s^λ`; the transformed integrand behaves like
/// `w^{m(1+λ)−1}`, and `m` is chosen to make that a smooth power.
pub fn grading_power(lambda: f64) -> u32 {
    assert!(lambda > -1.0, "endpoint exponent must exceed -1");
    if lambda >= 0.0 && (lambda - lambda.round()).abs() < 1e-12 {
        return 1;
    }
    for m in 2..=16u32 {
        let e = m as f64 * (1.0 + lambda) - 1.0;
        if e >= 1.0 && (e - e.round()).abs() < 1e-9 {
            return m;
        }
    }
    ((3.0 / (1.0 + lambda)).ceil() as u32).max(2)
}

/// A point of [a, b] together with its exact distances to both ends.
#[derive(Clone, Copy, Debug)]
pub struct Located {
    pub t: f64,
    pub from_left: f64,
    pub from_right: f64,
}

/// ∫_a^b f over an interval whose integrand behaves like (t−a)^λa near `a`
/// and (b−t)^λb near `b`. The interval is halved and each half is mapped by
/// a graded power substitution; the integrand receives distances to the
/// endpoints computed without cancellation.
pub fn integrate_graded<F: Fn(Located) -> f64>(
    f: F,
    a: f64,
    b: f64,
    lambda_a: f64,
    lambda_b: f64,
    opts: AdaptiveOptions,
) -> QuadResult {
    let len = b - a;
    if len <= 0.0 {
        return QuadResult {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
            intervals: 0,
            converged: true,
        };
    }
    let half = 0.5 * len;
    let ma = grading_power(lambda_a) as i32;
    let mb = grading_power(lambda_b) as i32;
    let left = integrate(
        |w: f64| {
            let s = half * w.powi(ma);
            let jac = half * ma as f64 * w.powi(ma - 1);
            f(Located {
                t: a + s,
                from_left: s,
                from_right: len - s,
            }) * jac
        },
        0.0,
        1.0,
        AdaptiveOptions {
            abs_tol: 0.5 * opts.abs_tol,
            ..opts
        },
    );
    let right = integrate(
        |w: f64| {
            let s = half * w.powi(mb);
            let jac = half * mb as f64 * w.powi(mb - 1);
            f(Located {
                t: b - s,
                from_left: len - s,
                from_right: s,
            }) * jac
        },
        0.0,
        1.0,
        AdaptiveOptions {
            abs_tol: 0.5 * opts.abs_tol,
            ..opts
        },
    );
    QuadResult {
        value: left.value + right.value,
        error: left.error + right.error,
        evaluations: left.evaluations + right.evaluations,
        intervals: left.intervals + right.intervals,
        converged: left.converged && right.converged,
    }
}

/// Nodes and weights of a composite rule on [a, b] with graded clustering at
/// both ends: each half uses `per_half` Gauss–Legendre nodes in the variable
/// `w` with `t − a = (half)·w^ma` (left) and `b − t = (half)·w^mb` (right).
pub fn graded_rule(
    a: f64,
    b: f64,
    lambda_a: f64,
    lambda_b: f64,
    per_half: usize,
) -> (Vec<f64>, Vec<f64>) {
    let half = 0.5 * (b - a);
    let (x, w) = gauss_legendre_on(per_half, 0.0, 1.0);
    let ma = grading_power(lambda_a) as i32;
    let mb = grading_power(lambda_b) as i32;
    let mut nodes = Vec::with_capacity(2 * per_half);
    let mut weights = Vec::with_capacity(2 * per_half);
    for (xi, wi) in x.iter().zip(&w) {
        nodes.push(a + half * xi.powi(ma));
        weights.push(wi * half * ma as f64 * xi.powi(ma - 1));
    }
    for (xi, wi) in x.iter().zip(&w).rev() {
        nodes.push(b - half * xi.powi(mb));
        weights.push(wi * half * mb as f64 * xi.powi(mb - 1));
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_nodes_match_kronrod_embedding() {
        let (x, w) = gauss_legendre(10);
        for j in 0..5 {
            let k = 2 * j + 1;
            assert!((x[9 - j] - XGK[k]).abs() < 1e-15, "node {j}");
            assert!((w[9 - j] - WG[j]).abs() < 1e-15, "weight {j}");
        }
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn kronrod_is_exact_on_polynomials() {
        for deg in 0..=31 {
            let (v, _) = gk21(&|x: f64| x.powi(deg), 0.0, 1.0);
            assert!((v - 1.0 / (deg as f64 + 1.0)).abs() < 1e-14, "degree {deg}");
        }
    }

    #[test]
    fn gauss_legendre_exactness() {
        let (x, w) = gauss_legendre_on(40, 0.0, 2.0);
        for deg in 0..80 {
            let v: f64 = x.iter().zip(&w).map(|(t, wi)| wi * t.powi(deg)).sum();
            let want = 2f64.powi(deg + 1) / (deg as f64 + 1.0);
            assert!((v / want - 1.0).abs() < 1e-13, "degree {deg}");
        }
    }

    #[test]
    fn adaptive_handles_singular_endpoints() {
        let opts = AdaptiveOptions {
            abs_tol: 0.0,
            rel_tol: 1e-12,
            max_intervals: 2000,
        };
        let r = integrate(|x: f64| x.sqrt().recip(), 0.0, 1.0, opts);
        assert!(r.converged);
        assert!((r.value - 2.0).abs() < 1e-10);
        let g = integrate_graded(
            |p: Located| p.from_left.powf(-0.45) * p.from_right.powf(-0.3),
            0.0,
            1.0,
            -0.45,
            -0.3,
            opts,
        );
        let want = statrs::function::beta::beta(0.55, 0.7);
        assert!(
            (g.value / want - 1.0).abs() < 1e-11,
            "{} vs {}",
            g.value,
            want
        );
    }

    #[test]
    fn graded_rule_integrates_sqrt_edges() {
        let (t, w) = graded_rule(0.0, 1.0, 0.5, 0.5, 12);
        let v: f64 = t
            .iter()
            .zip(&w)
            .map(|(x, wi)| wi * (x * (1.0 - x)).sqrt())
            .sum();
        assert!((v - PI / 8.0).abs() < 1e-12);
        let total: f64 = w.iter().sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn grading_powers() {
        assert_eq!(grading_power(0.0), 1);
        assert_eq!(grading_power(2.0), 1);
        assert_eq!(grading_power(0.5), 2);
        assert_eq!(grading_power(-0.2), 5);
        assert_eq!(grading_power(0.7), 10);
    }
}
