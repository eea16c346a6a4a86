//! Empirical operator-norm probes. Every ratio here is a lower bound for
//! the true operator norm: a finite bank cannot certify a supremum.

use std::time::Instant;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::exponents::{classify_region, Exponent, ExponentTriple};
use crate::grid::{Grid, SampledField, TestBank};
use crate::multiplier::{apply_bilinear_with, BilinearOptions, BilinearSymbol};
use crate::operators::{bilinear_br, maximal_bilinear, t_j, RGrid};

/// Bilinear operators the probes know how to run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum ProbeOp {
    /// f·g computed pointwise
    Product,
    /// identity symbol through the multiplier engine
    Identity,
    BochnerRiesz {
        alpha: f64,
        r: f64,
    },
    Maximal {
        alpha: f64,
        rgrid: RGrid,
    },
    /// sup over the R-grid of |T^α_{j,R}(f, g)|
    PieceMaximal {
        j: u32,
        alpha: f64,
        rgrid: RGrid,
    },
}

impl ProbeOp {
    pub fn tag(&self) -> String {
        match self {
            ProbeOp::Product => "product".into(),
            ProbeOp::Identity => "identity".into(),
            ProbeOp::BochnerRiesz { alpha, r } => format!("bochner-riesz(alpha={alpha},R={r})"),
            ProbeOp::Maximal { alpha, .. } => format!("maximal(alpha={alpha})"),
            ProbeOp::PieceMaximal { j, alpha, .. } => format!("piece-maximal(j={j},alpha={alpha})"),
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        match self {
            ProbeOp::Product | ProbeOp::Identity => None,
            ProbeOp::BochnerRiesz { alpha, .. }
            | ProbeOp::Maximal { alpha, .. }
            | ProbeOp::PieceMaximal { alpha, .. } => Some(*alpha),
        }
    }

    /// R for single-radius operators, j for dyadic pieces.
    pub fn r_or_j(&self) -> Option<f64> {
        match self {
            ProbeOp::BochnerRiesz { r, .. } => Some(*r),
            ProbeOp::PieceMaximal { j, .. } => Some(*j as f64),
            _ => None,
        }
    }

    pub fn apply(
        &self,
        f: &SampledField,
        g: &SampledField,
        opts: &BilinearOptions,
    ) -> Result<SampledField> {
        match self {
            ProbeOp::Product => f.pointwise_product(g),
            ProbeOp::Identity => apply_bilinear_with(&BilinearSymbol::Identity, f, g, opts),
            ProbeOp::BochnerRiesz { alpha, r } => bilinear_br(f, g, *alpha, *r, opts),
            ProbeOp::Maximal { alpha, rgrid } => maximal_bilinear(f, g, *alpha, rgrid, opts),
            ProbeOp::PieceMaximal { j, alpha, rgrid } => {
                piece_maximal(f, g, *j, *alpha, rgrid, opts)
            }
        }
    }
}

/// sup over the R-grid of |T^α_{j,R}(f, g)|, nodewise.
pub fn piece_maximal(
    f: &SampledField,
    g: &SampledField,
    j: u32,
    alpha: f64,
    rgrid: &RGrid,
    opts: &BilinearOptions,
) -> Result<SampledField> {
    rgrid.check_nyquist(f.grid().nyquist())?;
    let mut best = vec![0.0f64; f.grid().len()];
    for &r in &rgrid.values {
        let t = t_j(f, g, j, alpha, r, opts)?;
        for (b, v) in best.iter_mut().zip(t.values()) {
            *b = b.max(v.norm());
        }
    }
    let values = best
        .into_iter()
        .map(|v| num_complex::Complex64::new(v, 0.0))
        .collect();
    SampledField::from_values(*f.grid(), crate::grid::Space::Physical, values)
}

/// ‖op(f, g)‖_p / (‖f‖_{p1} ‖g‖_{p2}).
pub fn empirical_ratio(
    op: &ProbeOp,
    f: &SampledField,
    g: &SampledField,
    triple: &ExponentTriple,
    opts: &BilinearOptions,
) -> Result<f64> {
    let nf = f.lp_norm(triple.p1.to_f64())?;
    let ng = g.lp_norm(triple.p2.to_f64())?;
    if nf == 0.0 || ng == 0.0 {
        return Err(domain("input with zero norm"));
    }
    let out = op.apply(f, g, opts)?;
    Ok(out.lp_norm(triple.p.to_f64())? / (nf * ng))
}

#[derive(Clone, Debug, Serialize)]
pub struct GridMeta {
    pub dim: usize,
    pub box_length: f64,
    pub samples_per_axis: usize,
}

impl From<&Grid> for GridMeta {
    fn from(g: &Grid) -> Self {
        GridMeta {
            dim: g.dim,
            box_length: g.box_length,
            samples_per_axis: g.samples_per_axis,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeReport {
    pub op: String,
    pub n: usize,
    pub p1: Exponent,
    pub p2: Exponent,
    pub p: Exponent,
    pub alpha: Option<f64>,
    pub r_or_j: Option<f64>,
    /// (entry id, ratio)
    pub ratios: Vec<(usize, f64)>,
    /// lower bound for the operator norm
    pub max_ratio: f64,
    pub grid: GridMeta,
    pub timings: Vec<(String, f64)>,
}

impl ProbeReport {
    /// `entry_id,ratio,p1,p2,p,alpha,R_or_j` rows; empty fields for absent values.
    pub fn ratios_csv(&self) -> String {
        let mut out = String::from("entry_id,ratio,p1,p2,p,alpha,R_or_j\n");
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for (id, ratio) in &self.ratios {
            out.push_str(&format!(
                "{id},{ratio:.17e},{},{},{},{},{}\n",
                self.p1,
                self.p2,
                self.p,
                opt(self.alpha),
                opt(self.r_or_j)
            ));
        }
        out
    }
}

/// Max of the empirical ratio over a bank; entries run in parallel and the
/// reduction keeps bank order.
pub fn empirical_norm(
    op: &ProbeOp,
    bank: &TestBank,
    triple: &ExponentTriple,
    opts: &BilinearOptions,
) -> Result<ProbeReport> {
    if bank.is_empty() {
        return Err(domain("bank is empty"));
    }
    let start = Instant::now();
    let ratios = bank
        .entries
        .par_iter()
        .map(|e| empirical_ratio(op, &e.f, &e.g, triple, opts).map(|r| (e.id, r)))
        .collect::<Result<Vec<_>>>()?;
    let max_ratio = ratios.iter().fold(0.0f64, |m, (_, r)| m.max(*r));
    Ok(ProbeReport {
        op: op.tag(),
        n: bank.grid.dim,
        p1: triple.p1,
        p2: triple.p2,
        p: triple.p,
        alpha: op.alpha(),
        r_or_j: op.r_or_j(),
        ratios,
        max_ratio,
        grid: GridMeta::from(&bank.grid),
        timings: vec![("ratios".into(), start.elapsed().as_secs_f64())],
    })
}

/// Minimum span of j values for a slope fit.
pub const MIN_FIT_SPAN: u32 = 6;

#[derive(Clone, Debug, Serialize)]
pub struct DecayFit {
    pub alpha: f64,
    pub js: Vec<u32>,
    pub log2_norms: Vec<f64>,
    /// shells whose piece vanished to rounding
    pub excluded: Vec<u32>,
    pub slope: f64,
    pub intercept: f64,
    /// root-mean-square deviation from the fitted line
    pub residual: f64,
}

/// Least-squares slope of log₂ ‖sup_R |T^α_{j,R}(f, g)|‖_p against j.
pub fn dyadic_decay_fit(
    f: &SampledField,
    g: &SampledField,
    alpha: f64,
    triple: &ExponentTriple,
    j_range: std::ops::RangeInclusive<u32>,
    rgrid: &RGrid,
    opts: &BilinearOptions,
) -> Result<DecayFit> {
    let (lo, hi) = (*j_range.start(), *j_range.end());
    if lo < 2 || hi < lo {
        return Err(domain(format!("bad j range {lo}..={hi}")));
    }
    if hi - lo < MIN_FIT_SPAN {
        return Err(domain(format!(
            "j span {} below the minimum {MIN_FIT_SPAN}",
            hi - lo
        )));
    }
    let scale = f.lp_norm(triple.p1.to_f64())? * g.lp_norm(triple.p2.to_f64())?;
    if scale == 0.0 {
        return Err(domain("input with zero norm"));
    }
    let norms = (lo..=hi)
        .into_par_iter()
        .map(|j| {
            let m = piece_maximal(f, g, j, alpha, rgrid, opts)?;
            Ok((j, m.lp_norm(triple.p.to_f64())?))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut js = Vec::new();
    let mut log2_norms = Vec::new();
    let mut excluded = Vec::new();
    for (j, v) in norms {
        if v <= 1e-12 * scale {
            excluded.push(j);
        } else {
            js.push(j);
            log2_norms.push(v.log2());
        }
    }
    let span = match (js.first(), js.last()) {
        (Some(a), Some(b)) => b - a,
        _ => 0,
    };
    if span < MIN_FIT_SPAN {
        return Err(Error::Degenerate(format!(
            "only {} nonvanishing shells (span {span}); excluded {excluded:?}",
            js.len()
        )));
    }
    let (slope, intercept, residual) = least_squares(
        &js.iter().map(|j| *j as f64).collect::<Vec<_>>(),
        &log2_norms,
    );
    Ok(DecayFit {
        alpha,
        js,
        log2_norms,
        excluded,
        slope,
        intercept,
        residual,
    })
}

fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    (slope, intercept, (rss / n).sqrt())
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub alpha: f64,
    pub p: f64,
    pub radii: Vec<f64>,
    /// ‖ℬ^α_R(f, g) − fg‖_p / ‖fg‖_p
    pub errors: Vec<f64>,
    /// √(band(f)² + band(g)²) at relative level 1e−12
    pub band_radius: f64,
    /// first index with R above the band radius
    pub capture_index: Option<usize>,
    /// transform round-trip error of the identity symbol, relative
    pub floor: f64,
    pub monotone_tail: bool,
    /// e(2R)/e(R) for radii pairs present in the grid
    pub halving_ratios: Vec<(f64, f64)>,
}

impl ConvergenceReport {
    pub fn final_error(&self) -> f64 {
        *self.errors.last().expect("nonempty")
    }

    /// Every error at or past the capture point sits on the floor.
    pub fn saturated(&self) -> bool {
        match self.capture_index {
            Some(i) => self.errors[i..].iter().all(|e| *e <= self.floor),
            None => false,
        }
    }
}

/// Error of ℬ^α_R(f, g) against fg along an increasing R-grid.
pub fn convergence_probe(
    f: &SampledField,
    g: &SampledField,
    alpha: f64,
    rgrid: &RGrid,
    p: f64,
    opts: &BilinearOptions,
) -> Result<ConvergenceReport> {
    if !(alpha >= 0.0) {
        return Err(domain(format!("alpha must be nonnegative, got {alpha}")));
    }
    rgrid.check_nyquist(f.grid().nyquist())?;
    let fg = f.pointwise_product(g)?;
    let norm = fg.lp_norm(p)?;
    if norm == 0.0 {
        return Err(domain("f·g vanishes"));
    }
    let ident = apply_bilinear_with(&BilinearSymbol::Identity, f, g, opts)?;
    let floor = (4.0 * ident.sub(&fg)?.lp_norm(p)? / norm).max(16.0 * f64::EPSILON);
    let bf = f.forward()?.band_radius(1e-12)?;
    let bg = g.forward()?.band_radius(1e-12)?;
    let band_radius = bf.hypot(bg);
    let errors = rgrid
        .values
        .par_iter()
        .map(|&r| Ok(bilinear_br(f, g, alpha, r, opts)?.sub(&fg)?.lp_norm(p)? / norm))
        .collect::<Result<Vec<f64>>>()?;
    let capture_index = rgrid.values.iter().position(|r| *r > band_radius);
    let start = capture_index.unwrap_or(0);
    let monotone_tail = errors[start..].windows(2).all(|w| w[1] <= w[0] + floor);
    let mut halving_ratios = Vec::new();
    for (i, r) in rgrid.values.iter().enumerate() {
        if let Some(k) = rgrid
            .values
            .iter()
            .position(|s| (s - 2.0 * r).abs() <= 1e-12 * r)
        {
            if errors[i] > 0.0 {
                halving_ratios.push((*r, errors[k] / errors[i]));
            }
        }
    }
    Ok(ConvergenceReport {
        alpha,
        p,
        radii: rgrid.values.clone(),
        errors,
        band_radius,
        capture_index,
        floor,
        monotone_tail,
        halving_ratios,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegionRow {
    pub inv_p: f64,
    pub alpha: f64,
    pub verdict: String,
    pub threshold: f64,
    /// true for rows placed on the threshold line itself
    pub boundary: bool,
    pub empirical_ratio: Option<f64>,
}

/// Diagonal scan p1 = p2 = p over 1/p = k/steps, k = 0..=steps, crossed with
/// the α-grid, plus one boundary row per 1/p where a threshold is known.
pub fn region_scan(n: u32, steps: u32, alphas: &[f64]) -> Result<Vec<RegionRow>> {
    if !(1..=2).contains(&n) {
        return Err(domain(format!(
            "region scans support n in {{1, 2}}, got {n}"
        )));
    }
    if steps == 0 {
        return Err(domain("need at least one 1/p step"));
    }
    let mut rows = Vec::new();
    for k in 0..=steps {
        let inv = Ratio::new(k as i64, steps as i64);
        let p = match Exponent::from_recip(inv) {
            Ok(p) => p,
            Err(_) => continue,
        };
        if ExponentTriple::new(p, p).is_err() {
            continue;
        }
        let inv_p = p.recip_f64();
        for &alpha in alphas {
            let v = classify_region(n, p, p, alpha)?;
            rows.push(RegionRow {
                inv_p,
                alpha,
                verdict: v.regime.label().into(),
                threshold: v.threshold,
                boundary: false,
                empirical_ratio: None,
            });
        }
        let probe = classify_region(n, p, p, 0.0)?;
        if probe.basis != crate::exponents::Basis::CriticalIndex {
            let v = classify_region(n, p, p, probe.threshold)?;
            rows.push(RegionRow {
                inv_p,
                alpha: probe.threshold,
                verdict: v.regime.label().into(),
                threshold: probe.threshold,
                boundary: true,
                empirical_ratio: None,
            });
        }
    }
    Ok(rows)
}

/// Fills `empirical_ratio` with the bank maximum of ‖ℬ^α_R(f, g)‖_{p/2} /
/// (‖f‖_p ‖g‖_p). One-dimensional banks only.
pub fn attach_empirical(
    rows: &mut [RegionRow],
    bank: &TestBank,
    r: f64,
    opts: &BilinearOptions,
) -> Result<()> {
    if bank.grid.dim != 1 {
        return Err(domain(
            "empirical region samples need a one-dimensional bank",
        ));
    }
    for row in rows.iter_mut() {
        let p = Exponent::from_recip(
            Ratio::approximate_float(row.inv_p).ok_or_else(|| domain("bad 1/p"))?,
        )?;
        let triple = ExponentTriple::new(p, p)?;
        let op = ProbeOp::BochnerRiesz {
            alpha: row.alpha,
            r,
        };
        row.empirical_ratio = Some(empirical_norm(&op, bank, &triple, opts)?.max_ratio);
    }
    Ok(())
}

pub fn region_csv(rows: &[RegionRow]) -> String {
    let mut out = String::from("inv_p,alpha,verdict,threshold,boundary,empirical_ratio\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.inv_p,
            r.alpha,
            r.verdict,
            r.threshold,
            r.boundary,
            r.empirical_ratio
                .map(|v| format!("{v:.17e}"))
                .unwrap_or_default()
        ));
    }
    out
}

/// Rectangle plot of a region CSV: one cell per (1/p, α) row coloured by
/// verdict, boundary rows joined into a polyline. Reads only the CSV;
/// `#` header lines are skipped.
pub fn region_svg(csv_text: &str) -> Result<String> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(csv_text.as_bytes());
    let mut cells = Vec::new();
    let mut line = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Format(e.to_string()))?;
        let num = |i: usize| -> Result<f64> {
            rec.get(i)
                .ok_or_else(|| Error::Format(format!("missing column {i}")))?
                .parse::<f64>()
                .map_err(|e| Error::Format(e.to_string()))
        };
        let (x, a) = (num(0)?, num(1)?);
        let verdict = rec.get(2).unwrap_or("").to_string();
        if rec.get(4) == Some("true") {
            line.push((x, a));
        } else {
            cells.push((x, a, verdict));
        }
    }
    if cells.is_empty() {
        return Err(Error::Format("region CSV has no grid rows".into()));
    }
    let mut xs: Vec<f64> = cells.iter().map(|c| c.0).collect();
    let mut ys: Vec<f64> = cells.iter().map(|c| c.1).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    ys.sort_by(f64::total_cmp);
    ys.dedup();
    let step = |v: &[f64]| if v.len() > 1 { v[1] - v[0] } else { 1.0 };
    let (dx, dy) = (step(&xs), step(&ys));
    let (x0, x1) = (xs[0] - dx / 2.0, xs[xs.len() - 1] + dx / 2.0);
    let (y0, y1) = (ys[0] - dy / 2.0, ys[ys.len() - 1] + dy / 2.0);
    let (w, h, pad) = (480.0, 360.0, 40.0);
    let px = |x: f64| pad + (x - x0) / (x1 - x0) * w;
    let py = |y: f64| pad + h - (y - y0) / (y1 - y0) * h;
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\">\n",
        w + 2.0 * pad,
        h + 2.0 * pad
    );
    for (x, a, verdict) in &cells {
        let fill = match verdict.as_str() {
            "covered-n>=2" | "covered-n=1" => "#555555",
            "above-critical-trivial" => "#bbbbbb",
            _ => "#ffffff",
        };
        svg.push_str(&format!(
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{fill}\" stroke=\"#dddddd\"/>\n",
            px(x - dx / 2.0),
            py(a + dy / 2.0),
            px(x + dx / 2.0) - px(x - dx / 2.0),
            py(a - dy / 2.0) - py(a + dy / 2.0)
        ));
    }
    if line.len() > 1 {
        line.sort_by(|a, b| a.0.total_cmp(&b.0));
        let pts: Vec<String> = line
            .iter()
            .map(|(x, a)| format!("{:.2},{:.2}", px(*x), py(*a)))
            .collect();
        svg.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"#c00000\" stroke-width=\"2\"/>\n",
            pts.join(" ")
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{:.0}\" y=\"{:.0}\" font-size=\"12\">1/p</text>\n<text x=\"4\" y=\"{:.0}\" font-size=\"12\">alpha</text>\n</svg>\n",
        pad + w / 2.0,
        h + 2.0 * pad - 8.0,
        pad - 10.0
    ));
    Ok(svg)
}
