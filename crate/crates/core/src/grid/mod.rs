//! Sampled periodic fields on a one- or two-dimensional torus and their
//! discrete Fourier analysis.
//!
//! Physical samples sit at `x = L·k/N`. Frequency samples are stored in FFT
//! order; index `k` carries the frequency `κ(k)/L` with `κ(k) = k` for
//! `k < N/2` and `k − N` otherwise, so the represented set is
//! `(1/L)·{−N/2, …, N/2 − 1}`. The forward transform is scaled by the cell
//! volume `(L/N)^n` and the inverse by `(1/L)^n`, which reproduces the
//! continuous convention `f̂(ξ) = ∫ f(x) e^{−2πix·ξ} dx` at grid frequencies
//! and makes the pair unitary between the two Riemann-sum measures.

mod bank;
pub(crate) mod fft;
mod io;

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

pub use bank::{make_test_bank, BankEntry, BankSpec, Generator, TestBank};
pub use io::{read_field, write_field, FieldHeader};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    Physical,
    Frequency,
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Space::Physical => "physical",
            Space::Frequency => "frequency",
        })
    }
}

/// Geometry of a periodic grid: dimension, period and samples per axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub dim: usize,
    pub box_length: f64,
    pub samples_per_axis: usize,
}

impl Grid {
    pub fn new(dim: usize, box_length: f64, samples_per_axis: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(domain(format!("grid dimension must be 1 or 2, got {dim}")));
        }
        if !(box_length.is_finite() && box_length > 0.0) {
            return Err(domain(format!(
                "box length must be positive, got {box_length}"
            )));
        }
        if samples_per_axis < 2 || !samples_per_axis.is_power_of_two() {
            return Err(domain(format!(
                "samples per axis must be a power of two >= 2, got {samples_per_axis}"
            )));
        }
        Ok(Grid {
            dim,
            box_length,
            samples_per_axis,
        })
    }

    /// L = 32 with N = 1024 in one dimension and N = 128 in two.
    pub fn default_for(dim: usize) -> Result<Self> {
        let n = if dim == 2 { 128 } else { 1024 };
        Grid::new(dim, 32.0, n)
    }

    pub fn len(&self) -> usize {
        self.samples_per_axis.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.box_length / self.samples_per_axis as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn freq_spacing(&self) -> f64 {
        1.0 / self.box_length
    }

    /// Largest representable frequency per axis, N/(2L).
    pub fn nyquist(&self) -> f64 {
        self.samples_per_axis as f64 / (2.0 * self.box_length)
    }

    /// Signed frequency index of storage position `k` along one axis.
    pub fn signed_index(&self, k: usize) -> i64 {
        let n = self.samples_per_axis;
        if k < n / 2 {
            k as i64
        } else {
            k as i64 - n as i64
        }
    }

    pub fn frequency(&self, k: usize) -> f64 {
        self.signed_index(k) as f64 / self.box_length
    }

    pub fn position(&self, k: usize) -> f64 {
        self.box_length * k as f64 / self.samples_per_axis as f64
    }

    /// Per-axis indices of a flat index (row-major, first axis slowest).
    pub fn axes(&self, idx: usize) -> [usize; 2] {
        let n = self.samples_per_axis;
        if self.dim == 1 {
            [idx, 0]
        } else {
            [idx / n, idx % n]
        }
    }

    /// Physical coordinates of a flat index.
    pub fn point(&self, idx: usize) -> [f64; 2] {
        let [a, b] = self.axes(idx);
        if self.dim == 1 {
            [self.position(a), 0.0]
        } else {
            [self.position(a), self.position(b)]
        }
    }

    /// Frequency vector of a flat index.
    pub fn freq(&self, idx: usize) -> [f64; 2] {
        let [a, b] = self.axes(idx);
        if self.dim == 1 {
            [self.frequency(a), 0.0]
        } else {
            [self.frequency(a), self.frequency(b)]
        }
    }

    /// Squared integer frequency radius |κ|² of a flat index.
    pub fn index_norm_sq(&self, idx: usize) -> i64 {
        let [a, b] = self.axes(idx);
        let ka = self.signed_index(a);
        if self.dim == 1 {
            ka * ka
        } else {
            let kb = self.signed_index(b);
            ka * ka + kb * kb
        }
    }

    /// |ξ|² of a flat index.
    pub fn freq_norm_sq(&self, idx: usize) -> f64 {
        self.index_norm_sq(idx) as f64 / (self.box_length * self.box_length)
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self.dim == other.dim
            && self.samples_per_axis == other.samples_per_axis
            && self.box_length == other.box_length
    }

    pub fn check_same(&self, other: &Grid) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }
}

/// Complex samples of a function on a [`Grid`], in physical or frequency space.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledField {
    grid: Grid,
    space: Space,
    values: Vec<Complex64>,
}

impl SampledField {
    pub fn from_values(grid: Grid, space: Space, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(SampledField {
            grid,
            space,
            values,
        })
    }

    pub fn zeros(grid: Grid, space: Space) -> Self {
        SampledField {
            grid,
            space,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    /// Sample `f` at the physical nodes.
    pub fn from_fn(grid: Grid, f: impl Fn([f64; 2]) -> Complex64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        SampledField {
            grid,
            space: Space::Physical,
            values,
        }
    }

    /// Sample a spectrum at the frequency nodes.
    pub fn spectrum_from_fn(grid: Grid, f: impl Fn([f64; 2]) -> Complex64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.freq(i))).collect();
        SampledField {
            grid,
            space: Space::Frequency,
            values,
        }
    }

    /// Pure tone e^{2πi x·m/L} with integer frequency indices `m`.
    pub fn tone(grid: Grid, m: [i64; 2], amplitude: Complex64) -> Self {
        let n = grid.samples_per_axis as i64;
        let roots = fft::roots_of_unity(grid.samples_per_axis, 1.0);
        let values = (0..grid.len())
            .map(|i| {
                let [a, b] = grid.axes(i);
                let mut k = (a as i64 * m[0]).rem_euclid(n);
                if grid.dim == 2 {
                    k = (k + b as i64 * m[1]).rem_euclid(n);
                }
                amplitude * roots[k as usize]
            })
            .collect();
        SampledField {
            grid,
            space: Space::Physical,
            values,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    fn expect_space(&self, expected: Space) -> Result<()> {
        if self.space == expected {
            Ok(())
        } else {
            Err(Error::WrongSpace {
                expected,
                found: self.space,
            })
        }
    }

    /// Continuous-convention forward transform.
    pub fn forward(&self) -> Result<SampledField> {
        self.expect_space(Space::Physical)?;
        let mut values = self.values.clone();
        fft::transform(
            &mut values,
            self.grid.dim,
            self.grid.samples_per_axis,
            false,
        );
        let scale = self.grid.cell_volume();
        values.iter_mut().for_each(|v| *v *= scale);
        Ok(SampledField {
            grid: self.grid,
            space: Space::Frequency,
            values,
        })
    }

    /// Exact inverse of [`SampledField::forward`].
    pub fn inverse(&self) -> Result<SampledField> {
        self.expect_space(Space::Frequency)?;
        let mut values = self.values.clone();
        fft::transform(&mut values, self.grid.dim, self.grid.samples_per_axis, true);
        let scale = self.grid.freq_spacing().powi(self.grid.dim as i32);
        values.iter_mut().for_each(|v| *v *= scale);
        Ok(SampledField {
            grid: self.grid,
            space: Space::Physical,
            values,
        })
    }

    /// Riemann-sum L^p norm; `p = f64::INFINITY` gives the max modulus.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        self.expect_space(Space::Physical)?;
        weighted_lp(&self.values, p, self.grid.cell_volume())
    }

    /// ℓ² norm on the frequency side with weight (1/L)^n.
    pub fn spectral_l2_norm(&self) -> Result<f64> {
        self.expect_space(Space::Frequency)?;
        weighted_lp(
            &self.values,
            2.0,
            self.grid.freq_spacing().powi(self.grid.dim as i32),
        )
    }

    pub fn pointwise_product(&self, other: &SampledField) -> Result<SampledField> {
        self.check_compatible(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .collect();
        Ok(SampledField {
            grid: self.grid,
            space: self.space,
            values,
        })
    }

    pub fn check_compatible(&self, other: &SampledField) -> Result<()> {
        self.grid.check_same(&other.grid)?;
        if self.space != other.space {
            return Err(Error::WrongSpace {
                expected: self.space,
                found: other.space,
            });
        }
        Ok(())
    }

    pub fn scaled(&self, c: Complex64) -> SampledField {
        let values = self.values.iter().map(|v| v * c).collect();
        SampledField {
            grid: self.grid,
            space: self.space,
            values,
        }
    }

    pub fn add(&self, other: &SampledField) -> Result<SampledField> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &SampledField) -> Result<SampledField> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add_assign(&mut self, other: &SampledField) -> Result<()> {
        self.check_compatible(other)?;
        self.values
            .iter_mut()
            .zip(&other.values)
            .for_each(|(a, b)| *a += b);
        Ok(())
    }

    pub fn zip_with(
        &self,
        other: &SampledField,
        op: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<SampledField> {
        self.check_compatible(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| op(*a, *b))
            .collect();
        Ok(SampledField {
            grid: self.grid,
            space: self.space,
            values,
        })
    }

    pub fn map(&self, op: impl Fn(Complex64) -> Complex64) -> SampledField {
        SampledField {
            grid: self.grid,
            space: self.space,
            values: self.values.iter().map(|v| op(*v)).collect(),
        }
    }

    /// Nodewise modulus as a real-valued field.
    pub fn abs(&self) -> SampledField {
        self.map(|v| Complex64::new(v.norm(), 0.0))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn max_abs_diff(&self, other: &SampledField) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm())))
    }

    /// Circular shift by whole grid cells: g(x) = f(x − shift·h).
    pub fn shifted(&self, shift: [i64; 2]) -> SampledField {
        let n = self.grid.samples_per_axis as i64;
        let values = (0..self.grid.len())
            .map(|i| {
                let [a, b] = self.grid.axes(i);
                let sa = (a as i64 - shift[0]).rem_euclid(n) as usize;
                if self.grid.dim == 1 {
                    self.values[sa]
                } else {
                    let sb = (b as i64 - shift[1]).rem_euclid(n) as usize;
                    self.values[sa * n as usize + sb]
                }
            })
            .collect();
        SampledField {
            grid: self.grid,
            space: self.space,
            values,
        }
    }

    /// Largest |ξ| whose coefficient exceeds `rel_tol` times the spectral maximum.
    pub fn band_radius(&self, rel_tol: f64) -> Result<f64> {
        self.expect_space(Space::Frequency)?;
        let peak = self.max_abs();
        if peak == 0.0 {
            return Ok(0.0);
        }
        let mut r2: f64 = 0.0;
        for (i, v) in self.values.iter().enumerate() {
            if v.norm() > rel_tol * peak {
                r2 = r2.max(self.grid.freq_norm_sq(i));
            }
        }
        Ok(r2.sqrt())
    }
}

fn weighted_lp(values: &[Complex64], p: f64, weight: f64) -> Result<f64> {
    if p.is_nan() || p <= 0.0 {
        return Err(domain(format!("L^p norm needs p > 0, got {p}")));
    }
    if p.is_infinite() {
        return Ok(values.iter().fold(0.0, |m, v| m.max(v.norm())));
    }
    let sum: f64 = if p == 2.0 {
        values.iter().map(|v| v.norm_sqr()).sum()
    } else {
        values.iter().map(|v| v.norm().powf(p)).sum()
    };
    Ok((sum * weight).powf(1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn constant_field_norm_and_transform() {
        let g = Grid::new(1, 2.0, 64).unwrap();
        let f = SampledField::from_fn(g, |_| c(1.0));
        assert!((f.lp_norm(2.0).unwrap() - 2f64.sqrt()).abs() < 1e-14);
        let h = f.forward().unwrap();
        assert!((h.values()[0] - c(2.0)).norm() < 1e-13);
        assert!(h.values()[1..].iter().all(|v| v.norm() < 1e-13));
        let back = h.inverse().unwrap();
        assert!(back.max_abs_diff(&f).unwrap() < 1e-14);
    }

    #[test]
    fn tone_is_a_delta() {
        let g = Grid::new(1, 4.0, 32).unwrap();
        let f = SampledField::tone(g, [3, 0], c(1.0));
        let h = f.forward().unwrap();
        for (k, v) in h.values().iter().enumerate() {
            let expect = if k == 3 { 4.0 } else { 0.0 };
            assert!((v - c(expect)).norm() < 1e-12, "k={k} v={v}");
        }
        let g2 = Grid::new(2, 4.0, 16).unwrap();
        let f2 = SampledField::tone(g2, [-2, 5], c(1.0));
        let h2 = f2.forward().unwrap();
        let peak = (16 - 2) * 16 + 5;
        assert!((h2.values()[peak] - c(16.0)).norm() < 1e-11);
    }

    #[test]
    fn gaussian_transform_matches_closed_form() {
        for dim in [1usize, 2] {
            let g = Grid::default_for(dim).unwrap();
            let half = g.box_length / 2.0;
            let f = SampledField::from_fn(g, |x| {
                let r2 = (x[0] - half).powi(2) + if dim == 2 { (x[1] - half).powi(2) } else { 0.0 };
                c((-PI * r2 / 4.0).exp())
            });
            let h = f.forward().unwrap();
            let mut worst: f64 = 0.0;
            for i in 0..g.len() {
                let xi = g.freq(i);
                let phase = -2.0 * PI * half * (xi[0] + xi[1]);
                let amp = 2f64.powi(dim as i32) * (-4.0 * PI * g.freq_norm_sq(i)).exp();
                let want = Complex64::from_polar(amp, phase);
                worst = worst.max((h.values()[i] - want).norm());
            }
            assert!(worst < 1e-8, "dim {dim}: {worst}");
        }
    }

    #[test]
    fn gaussian_l2_norm() {
        let g = Grid::default_for(1).unwrap();
        let f = SampledField::from_fn(g, |x| c((-PI * (x[0] - 16.0).powi(2)).exp()));
        let want = 2f64.powf(-0.25);
        assert!((f.lp_norm(2.0).unwrap() / want - 1.0).abs() < 1e-6);
        assert_eq!(f.lp_norm(f64::INFINITY).unwrap(), f.max_abs());
        assert!(f.lp_norm(0.0).is_err());
    }

    #[test]
    fn space_is_checked() {
        let g = Grid::new(1, 1.0, 8).unwrap();
        let f = SampledField::zeros(g, Space::Physical);
        assert!(f.inverse().is_err());
        let h = f.forward().unwrap();
        assert!(h.forward().is_err());
        assert!(h.lp_norm(2.0).is_err());
    }

    #[test]
    fn product_checks_grid() {
        let a = SampledField::zeros(Grid::new(1, 1.0, 8).unwrap(), Space::Physical);
        let b = SampledField::zeros(Grid::new(1, 2.0, 8).unwrap(), Space::Physical);
        assert!(a.pointwise_product(&b).is_err());
        let g = Grid::new(1, 3.0, 16).unwrap();
        let t = SampledField::tone(g, [2, 0], c(1.0))
            .pointwise_product(&SampledField::tone(g, [5, 0], c(1.0)))
            .unwrap();
        assert!(
            t.max_abs_diff(&SampledField::tone(g, [7, 0], c(1.0)))
                .unwrap()
                < 1e-13
        );
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::new(3, 1.0, 8).is_err());
        assert!(Grid::new(1, 1.0, 12).is_err());
        assert!(Grid::new(1, -1.0, 8).is_err());
        let g = Grid::new(1, 32.0, 1024).unwrap();
        assert_eq!(g.nyquist(), 16.0);
        assert_eq!(g.frequency(512), -16.0);
        assert_eq!(g.frequency(511), 511.0 / 32.0);
    }
}
