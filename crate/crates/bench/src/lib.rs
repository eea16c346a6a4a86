//! Fixtures shared by the benchmarks.

use riesz_core::grid::{make_test_bank, Generator};
use riesz_core::{Grid, Result, SampledField};

/// A seeded Gaussian pair on `grid`.
pub fn gaussian_pair(grid: Grid) -> Result<(SampledField, SampledField)> {
    let mut bank = make_test_bank(42, 1, &[Generator::Gaussian], grid)?;
    let e = bank.entries.remove(0);
    Ok((e.f, e.g))
}
