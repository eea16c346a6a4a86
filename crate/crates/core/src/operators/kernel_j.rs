use std::f64::consts::PI;

use serde::Serialize;

use crate::bump::psi;
use crate::error::{domain, Result};

/// Required extent of y = 2^{−j}x.
pub const KJ_MIN_SPAN: f64 = 16.0;

/// K_j(x) = ∫ ψ(2^j(1 − ξ²)) e^{2πixξ} dξ sampled along x ≥ 0.
#[derive(Clone, Debug, Serialize)]
pub struct KernelJ {
    pub j: u32,
    pub x: Vec<f64>,
    pub values: Vec<f64>,
    pub origin: f64,
    /// sup_x |K_j(x)| 2^j (1 + 2^{−j}|x|)²
    pub c_j: f64,
}

/// Trapezoid rule in v = 2^j(1 − ξ²) ∈ [1/2, 2]:
/// K_j(x) = 2^{−j} ∫ ψ(v) cos(2πxξ(v)) / ξ(v) dv, ξ(v) = √(1 − 2^{−j}v).
struct Rule {
    xi: Vec<f64>,
    w: Vec<f64>,
    scale: f64,
}

impl Rule {
    fn new(j: u32, nodes: usize) -> Self {
        let scale = 2f64.powi(-(j as i32));
        let h = 1.5 / nodes as f64;
        let mut xi = Vec::with_capacity(nodes);
        let mut w = Vec::with_capacity(nodes);
        for k in 1..nodes {
            let v = 0.5 + k as f64 * h;
            let x = (1.0 - scale * v).sqrt();
            xi.push(x);
            w.push(h * psi(v) / x);
        }
        Rule { xi, w, scale }
    }

    fn eval(&self, x: f64) -> f64 {
        let s: f64 = self
            .xi
            .iter()
            .zip(&self.w)
            .map(|(xi, w)| w * (2.0 * PI * x * xi).cos())
            .sum();
        self.scale * s
    }
}

/// Samples `per_period` points across one unit period around each of
/// `y_points` centers 2^j·y, y ∈ [0, y_max]; `quad_nodes` trapezoid nodes.
pub fn k_j_kernel(
    j: u32,
    y_max: f64,
    y_points: usize,
    per_period: usize,
    quad_nodes: usize,
) -> Result<KernelJ> {
    if j < 2 {
        return Err(domain(format!("j must be at least 2, got {j}")));
    }
    if y_max < KJ_MIN_SPAN {
        return Err(domain(format!(
            "x-grid must reach |x| >= 2^(j+4); y_max = {y_max} < {KJ_MIN_SPAN}"
        )));
    }
    let rule = Rule::new(j, quad_nodes.max(16));
    let big = 2f64.powi(j as i32);
    let ny = y_points.max(2);
    let np = per_period.max(1);
    let mut x = Vec::with_capacity(ny * np);
    let mut values = Vec::with_capacity(ny * np);
    let mut c_j: f64 = 0.0;
    for i in 0..ny {
        let center = big * y_max * i as f64 / (ny - 1) as f64;
        for p in 0..np {
            let xv = center + p as f64 / np as f64;
            let k = rule.eval(xv);
            c_j = c_j.max(k.abs() * big * (1.0 + xv / big).powi(2));
            x.push(xv);
            values.push(k);
        }
    }
    Ok(KernelJ {
        j,
        x,
        values,
        origin: rule.eval(0.0),
        c_j,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_value_tracks_bump_mass() {
        for j in [8u32, 12] {
            let k = k_j_kernel(j, 16.0, 50, 4, 600).unwrap();
            let want = 0.75 * 2f64.powi(-(j as i32));
            assert!(
                (k.origin / want - 1.0).abs() < 2f64.powi(2 - j as i32),
                "j={j}"
            );
        }
    }

    #[test]
    fn quadrature_converged() {
        let a = Rule::new(10, 400);
        let b = Rule::new(10, 800);
        for x in [0.0, 3.3, 500.0, 16000.0] {
            assert!((a.eval(x) - b.eval(x)).abs() < 1e-14, "x={x}");
        }
    }

    #[test]
    fn extent_guard() {
        assert!(k_j_kernel(8, 8.0, 10, 4, 100).is_err());
        assert!(k_j_kernel(1, 16.0, 10, 4, 100).is_err());
    }
}
