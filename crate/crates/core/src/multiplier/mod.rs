//! Radial linear and bilinear Fourier multipliers.
//!
//! Every symbol here depends on frequencies only through `|ξ|²` (and `|η|²`),
//! so evaluation takes squared norms in physical frequency units.

mod apply;
mod symbols;

pub use apply::{
    apply_bilinear, apply_bilinear_with, apply_linear, apply_linear_spectrum, bench_paths,
    reconstruct_bilinear, reconstruction_symbol_gap, saturation_index, BenchReport,
    BilinearOptions, BilinearPath, Reconstruction, DEFAULT_MEMORY_BUDGET,
};
pub use symbols::{
    eval_symbol, pos_pow, symbol_dump_csv, BilinearSymbol, LinearSymbol, SymbolSpec, TailPart,
};

use crate::bump::{psi, psi0, theta};
use crate::error::{domain, Error, Result};
use crate::quad::{integrate_graded, AdaptiveOptions, Located};
use crate::special::gamma;

/// c_α = 2Γ(β+δ+1)/(Γ(β)Γ(δ+1)).
pub fn c_alpha(beta: f64, delta: f64) -> Result<f64> {
    if !(beta > 0.5) || !(delta > -0.5) {
        return Err(domain(format!(
            "need beta > 1/2 and delta > -1/2, got ({beta}, {delta})"
        )));
    }
    Ok(2.0 * gamma(beta + delta + 1.0) / (gamma(beta) * gamma(delta + 1.0)))
}

/// α = β + δ with its normalizing constant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecompositionSplit {
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    pub c_alpha: f64,
}

impl DecompositionSplit {
    pub fn new(beta: f64, delta: f64) -> Result<Self> {
        let c = c_alpha(beta, delta)?;
        let alpha = beta + delta;
        if alpha < 0.0 {
            return Err(domain(format!(
                "alpha = beta + delta must be nonnegative, got {alpha}"
            )));
        }
        Ok(DecompositionSplit {
            alpha,
            beta,
            delta,
            c_alpha: c,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SteinWeiss {
    pub lhs: f64,
    pub rhs: f64,
    pub rel_err: f64,
    pub quad_error: f64,
}

/// Both sides of
/// (1 − |η|²/(R²φ))₊^α = c_α R^{−2α} φ^{−α} ∫₀^R (R²φ − t²)₊^{β−1} t^{2δ+1} (1 − |η|²/t²)₊^δ dt.
pub fn steinweiss_check(
    split: &DecompositionSplit,
    r: f64,
    phi: f64,
    eta_norm: f64,
) -> Result<SteinWeiss> {
    if !(r > 0.0) {
        return Err(domain(format!("R must be positive, got {r}")));
    }
    if !(phi > 0.0 && phi <= 1.0) {
        return Err(domain(format!("phi must lie in (0, 1], got {phi}")));
    }
    if !(eta_norm >= 0.0) {
        return Err(domain(format!("|eta| must be nonnegative, got {eta_norm}")));
    }
    let top = r * phi.sqrt();
    let a = top * top;
    if eta_norm >= top {
        return Ok(SteinWeiss {
            lhs: 0.0,
            rhs: 0.0,
            rel_err: 0.0,
            quad_error: 0.0,
        });
    }
    let (beta, delta, alpha) = (split.beta, split.delta, split.alpha);
    let e = eta_norm;
    let lhs = pos_pow((top - e) * (top + e) / a, alpha);
    let left_exp = if e == 0.0 { 2.0 * delta + 1.0 } else { delta };
    let integrand = |p: Located| {
        // t² − |η|² = s(s + 2|η|),  A − t² = r(2√A − r)
        let s = p.from_left;
        let rr = p.from_right;
        let lower = s * (s + 2.0 * e);
        let upper = rr * (2.0 * top - rr);
        if lower <= 0.0 || upper <= 0.0 {
            return 0.0;
        }
        upper.powf(beta - 1.0) * lower.powf(delta) * p.t
    };
    let opts = AdaptiveOptions {
        abs_tol: 0.0,
        rel_tol: 1e-12,
        max_intervals: 4000,
    };
    let q = integrate_graded(integrand, e, top, left_exp, beta - 1.0, opts);
    let q = if q.converged || q.error <= 1e-10 * q.value.abs() {
        q
    } else {
        q.checked()?
    };
    let rhs = split.c_alpha * r.powf(-2.0 * alpha) * phi.powf(-alpha) * q.value;
    let rel_err = (lhs - rhs).abs() / lhs.abs().max(1e-300);
    Ok(SteinWeiss {
        lhs,
        rhs,
        rel_err,
        quad_error: q.error,
    })
}

/// (1−u)₊^γ minus its dyadic reconstruction Σ_{k=2..K} (1−u)^γ ψ(2^k(1−u)) + (1−u)^γ ψ₀(u),
/// compared with the telescoped tail (1−u)^γ θ(2^{K+1}(1−u)).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DyadicCheck {
    pub sup_residual: f64,
    pub sup_tail: f64,
    pub max_mismatch: f64,
}

pub fn second_dyadic_check(gamma_exp: f64, s: f64, k: u32, samples: usize) -> Result<DyadicCheck> {
    if !(gamma_exp > -1.0) {
        return Err(domain(format!("gamma must exceed -1, got {gamma_exp}")));
    }
    if k < 2 {
        return Err(domain(format!("K must be at least 2, got {k}")));
    }
    if !(s > 0.0) {
        return Err(domain(format!("s must be positive, got {s}")));
    }
    let n = samples.max(2);
    let mut out = DyadicCheck {
        sup_residual: 0.0,
        sup_tail: 0.0,
        max_mismatch: 0.0,
    };
    for i in 0..n {
        let xi = s * i as f64 / n as f64;
        let u = xi * xi / (s * s);
        let w = 1.0 - u;
        let m = pos_pow(w, gamma_exp);
        let mut sum = m * psi0(u);
        let mut scale = 4.0;
        for _ in 2..=k {
            let x = scale * w;
            // 2^{−kγ} ψ̃(2^k w) with ψ̃(x) = x^γ ψ(x)
            let p = psi(x);
            if p != 0.0 {
                sum += scale.powf(-gamma_exp) * x.powf(gamma_exp) * p;
            }
            scale *= 2.0;
        }
        let residual = m - sum;
        let tail = m * theta(scale * w);
        out.sup_residual = out.sup_residual.max(residual.abs());
        out.sup_tail = out.sup_tail.max(tail.abs());
        out.max_mismatch = out
            .max_mismatch
            .max((residual - tail).abs() / tail.abs().max(1.0));
    }
    Ok(out)
}

/// Relative error of the truncated binomial series
/// u^{−ρ}(1 − t²/u)^{−ρ} = 2^{jρ}(2^j u)^{−ρ} Σ_k Γ(ρ+k)/(Γ(ρ)k!) (2^j t²/(2^j u))^k.
pub fn taylor_expansion_check(rho: f64, j: u32, t: f64, u: f64, terms: usize) -> Result<f64> {
    let scale = 2f64.powi(j as i32);
    if scale * t * t >= 1.0 {
        return Err(domain(format!(
            "series diverges: 2^j t^2 = {} >= 1",
            scale * t * t
        )));
    }
    if !(u >= 0.5 / scale && u <= 2.0 / scale) {
        return Err(domain(format!("u = {u} outside [2^(-j-1), 2^(-j+1)]")));
    }
    let ratio = (scale * t * t) / (scale * u);
    if ratio >= 1.0 {
        return Err(domain(format!("series diverges: t^2/u = {ratio} >= 1")));
    }
    let exact = u.powf(-rho) * (1.0 - t * t / u).powf(-rho);
    let mut coef = 1.0;
    let mut pw = 1.0;
    let mut sum = 0.0;
    for k in 0..terms.max(1) {
        sum += coef * pw;
        coef *= (rho + k as f64) / (k as f64 + 1.0);
        pw *= ratio;
    }
    let approx = scale.powf(rho) * (scale * u).powf(-rho) * sum;
    Ok((approx - exact).abs() / exact.abs())
}

/// Γ(ρ+k)/(Γ(ρ)k!) by the product recurrence.
pub fn binomial_series_coef(rho: f64, k: usize) -> f64 {
    (0..k).fold(1.0, |c, i| c * (rho + i as f64) / (i as f64 + 1.0))
}

pub(crate) fn require_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate_graded, AdaptiveOptions};
    use std::f64::consts::PI;

    fn beta_oracle(a: f64, b: f64) -> f64 {
        let opts = AdaptiveOptions {
            abs_tol: 0.0,
            rel_tol: 1e-14,
            max_intervals: 2000,
        };
        integrate_graded(
            |p| p.from_left.powf(a - 1.0) * p.from_right.powf(b - 1.0),
            0.0,
            1.0,
            a - 1.0,
            b - 1.0,
            opts,
        )
        .value
    }

    #[test]
    fn c_alpha_values() {
        assert_eq!(c_alpha(1.0, 0.0).unwrap(), 2.0);
        assert_eq!(c_alpha(1.0, 1.0).unwrap(), 4.0);
        assert!((c_alpha(1.5, 0.5).unwrap() - 16.0 / PI).abs() < 1e-14);
        assert!(c_alpha(0.5, 0.0).is_err());
        assert!(c_alpha(1.0, -0.5).is_err());
        for (b, d) in [(0.7, -0.3), (1.3, 0.4), (2.2, 1.7)] {
            let c = c_alpha(b, d).unwrap();
            assert!(
                (c * beta_oracle(b, d + 1.0) / 2.0 - 1.0).abs() < 1e-12,
                "({b}, {d})"
            );
        }
    }

    #[test]
    fn steinweiss_examples() {
        let s = DecompositionSplit::new(1.0, 0.0).unwrap();
        let r = steinweiss_check(&s, 1.0, 0.5, 0.2f64.sqrt()).unwrap();
        assert!((r.lhs - 0.6).abs() < 1e-15);
        assert!((r.rhs - 0.6).abs() < 1e-12);
        let b = steinweiss_check(&s, 1.0, 0.5, 0.5f64.sqrt()).unwrap();
        assert_eq!((b.lhs, b.rhs), (0.0, 0.0));
        let s = DecompositionSplit::new(0.9, 0.4).unwrap();
        for (phi, eta) in [(0.3, 0.1), (0.9, 0.0), (0.05, 0.2), (1.0, 0.999)] {
            let r = steinweiss_check(&s, 1.7, phi, eta).unwrap();
            assert!(r.rel_err < 1e-8, "{phi} {eta}: {r:?}");
        }
    }

    #[test]
    fn dyadic_examples() {
        let c = second_dyadic_check(0.7, 1.0, 8, 2000).unwrap();
        assert!(c.max_mismatch < 1e-12);
        let z = second_dyadic_check(0.0, 1.0, 12, 500).unwrap();
        assert!(z.max_mismatch < 1e-12);
        assert!(second_dyadic_check(-1.0, 1.0, 4, 10).is_err());
    }

    #[test]
    fn taylor_examples() {
        assert_eq!(
            taylor_expansion_check(0.5, 6, 0.0, 2f64.powi(-6), 1).unwrap(),
            0.0
        );
        let t = 2f64.powi(-4);
        for u in [2f64.powi(-6), 1.5 * 2f64.powi(-6), 2f64.powi(-5)] {
            assert!(taylor_expansion_check(0.5, 6, t, u, 20).unwrap() < 1e-10);
        }
        assert!(taylor_expansion_check(0.5, 6, 0.2, 2f64.powi(-6), 20).is_err());
        for k in 0..10 {
            assert!((binomial_series_coef(1.0, k) - 1.0).abs() < 1e-15);
        }
    }
}
