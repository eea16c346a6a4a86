//! Gamma function front end: exact products at integers and half-integers,
//! Lanczos (statrs) elsewhere.

use std::f64::consts::PI;

pub fn gamma(x: f64) -> f64 {
    if x > 0.0 && x <= 60.0 {
        let twice = 2.0 * x;
        if twice == twice.round() {
            return if x == x.round() {
                factorial_product(x as u32 - 1)
            } else {
                half_integer(x)
            };
        }
    }
    statrs::function::gamma::gamma(x)
}

pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

fn factorial_product(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Γ(k + 1/2) = √π · (2k−1)!! / 2^k.
fn half_integer(x: f64) -> f64 {
    let k = (x - 0.5).round() as u32;
    let mut v = PI.sqrt();
    for i in 0..k {
        v *= i as f64 + 0.5;
    }
    v
}

/// Γ(a)/Γ(b) through logarithms when either argument is large.
pub fn gamma_ratio(a: f64, b: f64) -> f64 {
    if a < 60.0 && b < 60.0 {
        gamma(a) / gamma(b)
    } else {
        (ln_gamma(a) - ln_gamma(b)).exp()
    }
}
