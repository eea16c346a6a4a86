use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Grid, SampledField, Space};
use crate::error::{domain, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Generator {
    Gaussian,
    ModulatedGaussian,
    RandomBandlimited,
}

impl Generator {
    pub fn label(self) -> &'static str {
        match self {
            Generator::Gaussian => "gaussian",
            Generator::ModulatedGaussian => "modulated-gaussian",
            Generator::RandomBandlimited => "random-bandlimited",
        }
    }
}

#[derive(Clone, Debug)]
pub struct BankEntry {
    pub id: usize,
    pub generator: Generator,
    pub f: SampledField,
    pub g: SampledField,
}

#[derive(Clone, Debug)]
pub struct TestBank {
    pub seed: u64,
    pub grid: Grid,
    pub entries: Vec<BankEntry>,
}

/// Per-generator entry counts for a bank.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BankSpec {
    pub seed: u64,
    pub counts: Vec<(Generator, usize)>,
}

impl Default for BankSpec {
    fn default() -> Self {
        BankSpec {
            seed: 42,
            counts: vec![
                (Generator::Gaussian, 8),
                (Generator::ModulatedGaussian, 8),
                (Generator::RandomBandlimited, 16),
            ],
        }
    }
}

impl BankSpec {
    pub fn build(&self, grid: Grid) -> Result<TestBank> {
        if self.counts.iter().all(|(_, c)| *c == 0) {
            return Err(domain(
                "test bank needs at least one generator with a positive count",
            ));
        }
        let mut entries = Vec::new();
        for &(generator, count) in &self.counts {
            for _ in 0..count {
                let id = entries.len();
                let mut rng = ChaCha8Rng::seed_from_u64(entry_seed(self.seed, id));
                let f = generate(generator, grid, &mut rng);
                let g = generate(generator, grid, &mut rng);
                entries.push(BankEntry {
                    id,
                    generator,
                    f,
                    g,
                });
            }
        }
        Ok(TestBank {
            seed: self.seed,
            grid,
            entries,
        })
    }
}

impl TestBank {
    /// 8 Gaussians, 8 modulated Gaussians and 16 random bandlimited pairs, seed 42.
    pub fn default_bank(grid: Grid) -> Result<Self> {
        BankSpec::default().build(grid)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// `count` entries drawn round-robin from `generators`.
pub fn make_test_bank(
    seed: u64,
    count: usize,
    generators: &[Generator],
    grid: Grid,
) -> Result<TestBank> {
    if generators.is_empty() {
        return Err(domain("generator set is empty"));
    }
    if count == 0 {
        return Err(domain("bank count must be at least 1"));
    }
    let mut entries = Vec::with_capacity(count);
    for id in 0..count {
        let generator = generators[id % generators.len()];
        let mut rng = ChaCha8Rng::seed_from_u64(entry_seed(seed, id));
        let f = generate(generator, grid, &mut rng);
        let g = generate(generator, grid, &mut rng);
        entries.push(BankEntry {
            id,
            generator,
            f,
            g,
        });
    }
    Ok(TestBank {
        seed,
        grid,
        entries,
    })
}

fn entry_seed(seed: u64, id: usize) -> u64 {
    seed ^ (id as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn generate(generator: Generator, grid: Grid, rng: &mut ChaCha8Rng) -> SampledField {
    match generator {
        Generator::Gaussian => gaussian(grid, rng, [0.0, 0.0]),
        Generator::ModulatedGaussian => {
            let band = grid.nyquist() / 4.0;
            let r = rng.gen_range(0.25..0.75) * band;
            let theta = rng.gen_range(0.0..2.0 * PI);
            let omega = if grid.dim == 1 {
                [if rng.gen_bool(0.5) { r } else { -r }, 0.0]
            } else {
                [r * theta.cos(), r * theta.sin()]
            };
            gaussian(grid, rng, omega)
        }
        Generator::RandomBandlimited => bandlimited(grid, rng),
    }
}

fn gaussian(grid: Grid, rng: &mut ChaCha8Rng, omega: [f64; 2]) -> SampledField {
    let l = grid.box_length;
    let scale = (l / 32.0).min(1.0);
    let width = rng.gen_range(0.6..1.6) * scale;
    let center = [
        l / 2.0 + rng.gen_range(-0.1..0.1) * l,
        l / 2.0 + rng.gen_range(-0.1..0.1) * l,
    ];
    let amp = rng.gen_range(0.5..2.0);
    let dim = grid.dim;
    SampledField::from_fn(grid, |x| {
        let mut r2 = (x[0] - center[0]).powi(2);
        let mut phase = omega[0] * (x[0] - center[0]);
        if dim == 2 {
            r2 += (x[1] - center[1]).powi(2);
            phase += omega[1] * (x[1] - center[1]);
        }
        Complex64::from_polar(amp * (-PI * r2 / (width * width)).exp(), 2.0 * PI * phase)
    })
}

fn bandlimited(grid: Grid, rng: &mut ChaCha8Rng) -> SampledField {
    let band = grid.samples_per_axis as f64 / (4.0 * grid.box_length);
    let band_sq = band * band;
    let mut spec = SampledField::zeros(grid, Space::Frequency);
    let n_in = (0..grid.len())
        .filter(|&i| grid.freq_norm_sq(i) <= band_sq)
        .count()
        .max(1);
    let amp = grid.box_length.powi(grid.dim as i32) / (n_in as f64).sqrt();
    for (i, v) in spec.values_mut().iter_mut().enumerate() {
        if grid.freq_norm_sq(i) <= band_sq {
            *v = Complex64::new(normal(rng), normal(rng)) * amp;
        }
    }
    spec.inverse().expect("frequency-space spectrum")
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let v: f64 = rng.gen();
    (-2.0 * u.ln()).sqrt() * (2.0 * PI * v).cos()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        let g = Grid::new(1, 32.0, 256).unwrap();
        let gens = [Generator::Gaussian, Generator::RandomBandlimited];
        let a = make_test_bank(1, 3, &gens, g).unwrap();
        let b = make_test_bank(1, 3, &gens, g).unwrap();
        for (x, y) in a.entries.iter().zip(&b.entries) {
            assert_eq!(x.f, y.f);
            assert_eq!(x.g, y.g);
        }
        assert!(make_test_bank(1, 3, &[], g).is_err());
    }

    #[test]
    fn bandlimited_support() {
        let g = Grid::new(1, 32.0, 256).unwrap();
        let bank = make_test_bank(7, 2, &[Generator::RandomBandlimited], g).unwrap();
        let band = 256.0 / (4.0 * 32.0);
        for e in &bank.entries {
            let h = e.f.forward().unwrap();
            for (i, v) in h.values().iter().enumerate() {
                if g.freq_norm_sq(i).sqrt() > band + 1e-12 {
                    assert!(v.norm() < 1e-11);
                }
            }
        }
    }

    #[test]
    fn default_bank_counts() {
        let bank = TestBank::default_bank(Grid::new(1, 32.0, 256).unwrap()).unwrap();
        assert_eq!(bank.len(), 32);
        for e in &bank.entries {
            for p in [1.0, 2.0, f64::INFINITY] {
                let v = e.f.lp_norm(p).unwrap();
                assert!(v.is_finite() && v > 0.0);
            }
        }
    }
}
