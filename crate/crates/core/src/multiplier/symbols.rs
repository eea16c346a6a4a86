use serde::{Deserialize, Serialize};

use crate::bump::{psi, psi0, psi0_1, psi0_2, theta};
use crate::error::{domain, Result};
use crate::grid::Grid;

/// x₊^a with the convention 0 for x ≤ 0 (including a = 0).
pub fn pos_pow(x: f64, a: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if a == 0.0 {
        1.0
    } else if a <= 16.0 && (a as i32) as f64 == a {
        x.powi(a as i32)
    } else {
        x.powf(a)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TailPart {
    Whole,
    First,
    Second,
}

impl TailPart {
    fn eval(self, t: f64) -> f64 {
        match self {
            TailPart::Whole => psi0(t),
            TailPart::First => psi0_1(t),
            TailPart::Second => psi0_2(t),
        }
    }
}

/// Radial linear symbols m(|ξ|²).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LinearSymbol {
    Identity,
    /// (1 − |ξ|²/t²)₊^δ
    BrDisc {
        delta: f64,
        t: f64,
    },
    /// ψ(ν^{−1}(1 − |ξ|²/R²))
    Localized {
        nu: f64,
        radius: f64,
    },
    /// φ((t² − |ξ|²)/ν) with φ(x) = θ(1 + |x|)
    LocalPhi {
        nu: f64,
        t: f64,
    },
    /// ψ(2^j(1 − |ξ|²/R²)) (R²(1 − |ξ|²/R²) − t²)₊^{β−1}
    BPiece {
        j: u32,
        beta: f64,
        r: f64,
        t: f64,
    },
    /// ψ(2^j(1 − |ξ|²/R²)) (1 − |ξ|²/R² − t²)₊^{β−1}
    SPiece {
        j: u32,
        beta: f64,
        r: f64,
        t: f64,
    },
    /// ψ₀ or one of its halves at |ξ|²/R²
    Tail {
        radius: f64,
        part: TailPart,
    },
    /// 2(α+1)(|ξ|²/t²)(1 − |ξ|²/t²)₊^α
    SquareKernel {
        alpha: f64,
        t: f64,
    },
}

impl LinearSymbol {
    pub fn eval_sq(&self, xs: f64) -> f64 {
        match *self {
            LinearSymbol::Identity => 1.0,
            LinearSymbol::BrDisc { delta, t } => pos_pow(1.0 - xs / (t * t), delta),
            LinearSymbol::Localized { nu, radius } => psi((1.0 - xs / (radius * radius)) / nu),
            LinearSymbol::LocalPhi { nu, t } => {
                let x = (t * t - xs) / nu;
                theta(1.0 + x.abs())
            }
            LinearSymbol::BPiece { j, beta, r, t } => {
                let u = 1.0 - xs / (r * r);
                let p = psi(2f64.powi(j as i32) * u);
                if p == 0.0 {
                    0.0
                } else {
                    p * pos_pow(r * r * u - t * t, beta - 1.0)
                }
            }
            LinearSymbol::SPiece { j, beta, r, t } => {
                let u = 1.0 - xs / (r * r);
                let p = psi(2f64.powi(j as i32) * u);
                if p == 0.0 {
                    0.0
                } else {
                    p * pos_pow(u - t * t, beta - 1.0)
                }
            }
            LinearSymbol::Tail { radius, part } => part.eval(xs / (radius * radius)),
            LinearSymbol::SquareKernel { alpha, t } => {
                let s = xs / (t * t);
                2.0 * (alpha + 1.0) * s * pos_pow(1.0 - s, alpha)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |name: &str, v: f64| super::require_positive(name, v);
        match *self {
            LinearSymbol::Identity => Ok(()),
            LinearSymbol::BrDisc { delta, t } => {
                pos("t", t)?;
                if delta.is_finite() {
                    Ok(())
                } else {
                    Err(domain("delta must be finite"))
                }
            }
            LinearSymbol::Localized { nu, radius } => {
                pos("nu", nu)?;
                pos("radius", radius)
            }
            LinearSymbol::LocalPhi { nu, t } => {
                pos("nu", nu)?;
                pos("t", t)
            }
            LinearSymbol::BPiece { r, t, .. } | LinearSymbol::SPiece { r, t, .. } => {
                pos("R", r)?;
                if t >= 0.0 {
                    Ok(())
                } else {
                    Err(domain(format!("t must be nonnegative, got {t}")))
                }
            }
            LinearSymbol::Tail { radius, .. } => pos("radius", radius),
            LinearSymbol::SquareKernel { t, .. } => pos("t", t),
        }
    }
}

/// Radial bilinear symbols m(|ξ|², |η|²).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BilinearSymbol {
    Identity,
    /// (1 − (|ξ|² + |η|²)/R²)₊^α
    Full {
        alpha: f64,
        r: f64,
    },
    /// ψ(2^j(1 − |ξ|²/R²)) (1 − |ξ|²/R²)₊^α (1 − |η|²/(R²(1 − |ξ|²/R²)))₊^α
    Piece {
        j: u32,
        alpha: f64,
        r: f64,
    },
    /// ψ₀(|ξ|²/R²) (1 − (|ξ|² + |η|²)/R²)₊^α
    Tail {
        alpha: f64,
        r: f64,
    },
    /// ψ₀(|ξ|²/R²) ψ₀ᵖ(|η|²/R²) (1 − (|ξ|² + |η|²)/R²)₊^α
    TailSplit {
        alpha: f64,
        r: f64,
        part: TailPart,
    },
    /// ψ₀(|ξ|²/R²) ψ(2^j(1 − |η|²/R²)) (1 − |η|²/R²)₊^α (1 − |ξ|²/(R²(1 − |η|²/R²)))₊^α
    FlippedPiece {
        j: u32,
        alpha: f64,
        r: f64,
    },
    Separable {
        left: LinearSymbol,
        right: LinearSymbol,
    },
}

/// 1 − (|ξ|² + |η|²)/R², shared by every piece so that pieces and the full
/// symbol agree to the last bit.
fn joint(xs: f64, es: f64, r2: f64) -> f64 {
    1.0 - (xs + es) / r2
}

impl BilinearSymbol {
    /// row[b] = m(xs, radii[b]).
    pub fn fill_row(&self, xs: f64, radii: &[f64], row: &mut [f64]) {
        match *self {
            BilinearSymbol::Full { alpha, r } => {
                let r2 = r * r;
                for (v, &es) in row.iter_mut().zip(radii) {
                    *v = pos_pow(joint(xs, es, r2), alpha);
                }
            }
            _ => {
                for (v, &es) in row.iter_mut().zip(radii) {
                    *v = self.eval_sq(xs, es);
                }
            }
        }
    }

    pub fn eval_sq(&self, xs: f64, es: f64) -> f64 {
        match *self {
            BilinearSymbol::Identity => 1.0,
            BilinearSymbol::Full { alpha, r } => pos_pow(joint(xs, es, r * r), alpha),
            BilinearSymbol::Piece { j, alpha, r } => {
                let p = psi(2f64.powi(j as i32) * (1.0 - xs / (r * r)));
                if p == 0.0 {
                    0.0
                } else {
                    p * pos_pow(joint(xs, es, r * r), alpha)
                }
            }
            BilinearSymbol::Tail { alpha, r } => {
                let p = psi0(xs / (r * r));
                if p == 0.0 {
                    0.0
                } else {
                    p * pos_pow(joint(xs, es, r * r), alpha)
                }
            }
            BilinearSymbol::TailSplit { alpha, r, part } => {
                let p = psi0(xs / (r * r)) * part.eval(es / (r * r));
                if p == 0.0 {
                    0.0
                } else {
                    p * pos_pow(joint(xs, es, r * r), alpha)
                }
            }
            BilinearSymbol::FlippedPiece { j, alpha, r } => {
                let p = psi0(xs / (r * r)) * psi(2f64.powi(j as i32) * (1.0 - es / (r * r)));
                if p == 0.0 {
                    0.0
                } else {
                    p * pos_pow(joint(es, xs, r * r), alpha)
                }
            }
            BilinearSymbol::Separable { left, right } => left.eval_sq(xs) * right.eval_sq(es),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |alpha: f64, r: f64| {
            super::require_positive("R", r)?;
            if alpha >= 0.0 {
                Ok(())
            } else {
                Err(domain(format!("alpha must be nonnegative, got {alpha}")))
            }
        };
        match *self {
            BilinearSymbol::Identity => Ok(()),
            BilinearSymbol::Full { alpha, r }
            | BilinearSymbol::Piece { alpha, r, .. }
            | BilinearSymbol::Tail { alpha, r }
            | BilinearSymbol::TailSplit { alpha, r, .. }
            | BilinearSymbol::FlippedPiece { alpha, r, .. } => check(alpha, r),
            BilinearSymbol::Separable { left, right } => {
                left.validate()?;
                right.validate()
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "arity", rename_all = "lowercase")]
pub enum SymbolSpec {
    Linear(LinearSymbol),
    Bilinear(BilinearSymbol),
}

fn norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Pointwise value; bilinear kinds need `eta`.
pub fn eval_symbol(spec: &SymbolSpec, xi: &[f64], eta: Option<&[f64]>) -> Result<f64> {
    match spec {
        SymbolSpec::Linear(s) => Ok(s.eval_sq(norm_sq(xi))),
        SymbolSpec::Bilinear(s) => {
            let eta = eta.ok_or_else(|| domain("bilinear symbol needs both xi and eta"))?;
            Ok(s.eval_sq(norm_sq(xi), norm_sq(eta)))
        }
    }
}

/// CSV of symbol values along the first frequency axis, every `stride`-th
/// frequency, in increasing order.
pub fn symbol_dump_csv(spec: &SymbolSpec, grid: &Grid, stride: usize) -> String {
    let n = grid.samples_per_axis as i64;
    let step = stride.max(1) as i64;
    let dxi = grid.freq_spacing();
    let freqs: Vec<f64> = (-n / 2..n / 2)
        .step_by(step as usize)
        .map(|k| k as f64 * dxi)
        .collect();
    let mut out = String::new();
    match spec {
        SymbolSpec::Linear(s) => {
            out.push_str("xi,value\n");
            for x in &freqs {
                out.push_str(&format!("{x},{:.17e}\n", s.eval_sq(x * x)));
            }
        }
        SymbolSpec::Bilinear(s) => {
            out.push_str("xi,eta,value\n");
            for x in &freqs {
                for y in &freqs {
                    out.push_str(&format!("{x},{y},{:.17e}\n", s.eval_sq(x * x, y * y)));
                }
            }
        }
    }
    out
}
