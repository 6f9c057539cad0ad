//! Sample and grid metrics: histograms, total-variation distance, valley
//! mass, and the named-metric report.

use crate::analytic::{DensityGrid, GridSpec};
use crate::error::{Result, SgError};
use crate::matrix::Matrix;
use std::collections::BTreeMap;
use std::io::Write;

/// Normalized histogram plus the out-of-box tally; escaped samples are
/// reported, never silently dropped.
#[derive(Debug, Clone)]
pub struct Histogram {
    pub grid: DensityGrid,
    pub escaped: usize,
    pub total: usize,
}

impl Histogram {
    pub fn escaped_fraction(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.escaped as f64 / self.total as f64
        }
    }
}

/// Bin samples onto a grid and normalize over the in-box mass.
pub fn histogram_density(samples: &Matrix, spec: &GridSpec) -> Result<Histogram> {
    let n = samples.rows();
    if n == 0 {
        return Err(SgError::Config("histogram needs at least one sample".into()));
    }
    if samples.cols() != spec.dim() {
        return Err(SgError::DimensionMismatch { expected: spec.dim(), got: samples.cols() });
    }
    let mut counts = vec![0u64; spec.num_cells()];
    let mut escaped = 0usize;
    for i in 0..n {
        match spec.cell_index_of(samples.row(i)) {
            Some(idx) => counts[idx] += 1,
            None => escaped += 1,
        }
    }
    let inside = n - escaped;
    if inside == 0 {
        return Err(SgError::Domain("every sample fell outside the histogram box".into()));
    }
    let cell = spec.cell_volume();
    let values: Vec<f64> =
        counts.iter().map(|&c| c as f64 / (inside as f64 * cell)).collect();
    Ok(Histogram { grid: DensityGrid::from_values(spec.clone(), values)?, escaped, total: n })
}

/// Total-variation distance between two densities on the same grid.
pub fn tv_distance(a: &DensityGrid, b: &DensityGrid) -> Result<f64> {
    if !a.same_shape(b) {
        return Err(SgError::GridMismatch(
            "tv_distance needs identical boxes and resolutions".into(),
        ));
    }
    let sum: f64 = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).abs())
        .sum();
    Ok(0.5 * sum * a.cell_volume())
}

/// Probability mass of a normalized 1D grid inside [lo, hi).
pub fn valley_mass_grid(grid: &DensityGrid, lo: f64, hi: f64) -> Result<f64> {
    grid.mass_in_interval(lo, hi)
}

/// Fraction of 1D samples inside [lo, hi).
pub fn valley_mass_samples(samples: &Matrix, lo: f64, hi: f64) -> Result<f64> {
    if samples.cols() != 1 {
        return Err(SgError::Domain("valley mass requires 1D samples".into()));
    }
    if lo >= hi {
        return Err(SgError::Domain(format!("empty interval [{lo}, {hi})")));
    }
    let n = samples.rows();
    if n == 0 {
        return Err(SgError::Config("no samples".into()));
    }
    let hits = samples.iter_rows().filter(|r| r[0] >= lo && r[0] < hi).count();
    Ok(hits as f64 / n as f64)
}

/// Standard error of an empirical fraction (the large-resample limit of the
/// bootstrap for a mean of indicators).
pub fn fraction_standard_error(p: f64, n: usize) -> f64 {
    if n == 0 {
        return f64::INFINITY;
    }
    (p.max(0.0).min(1.0) * (1.0 - p.max(0.0).min(1.0)) / n as f64).sqrt()
}

/// Named scalar metrics with provenance; serializes to long-format CSV.
#[derive(Debug, Clone, Default)]
pub struct MetricReport {
    metrics: BTreeMap<String, f64>,
    pub config_echo: String,
    pub seed: u64,
}

impl MetricReport {
    pub fn new(config_echo: impl Into<String>, seed: u64) -> Self {
        MetricReport { metrics: BTreeMap::new(), config_echo: config_echo.into(), seed }
    }

    pub fn insert(&mut self, name: &str, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(SgError::NonFinite(format!("metric {name} = {value}")));
        }
        self.metrics.insert(name.to_string(), value);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.metrics.get(name).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &f64)> {
        self.metrics.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.metrics.is_empty()
    }

    /// Long format: one `metric,value` row per entry, keys sorted.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "metric,value")?;
        for (k, v) in &self.metrics {
            writeln!(w, "{k},{v}")?;
        }
        Ok(())
    }
}
