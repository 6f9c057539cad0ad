//! Discretized probability densities over a box: the common currency of the
//! analytic oracles, the Fokker-Planck solver, and the sample metrics.

use crate::error::{Result, SgError};
use std::io::Write;

/// Box plus per-axis resolution; values are attached to cell centers.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    lower: Vec<f64>,
    upper: Vec<f64>,
    resolution: Vec<usize>,
}

impl GridSpec {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, resolution: Vec<usize>) -> Result<Self> {
        if lower.len() != upper.len() || lower.len() != resolution.len() {
            return Err(SgError::Config("grid spec axes must agree".into()));
        }
        if lower.is_empty() || lower.len() > 2 {
            return Err(SgError::Config(format!(
                "grids support 1 or 2 axes, got {}",
                lower.len()
            )));
        }
        for k in 0..lower.len() {
            if !(upper[k] > lower[k]) {
                return Err(SgError::Config(format!(
                    "axis {k}: upper {} must exceed lower {}",
                    upper[k], lower[k]
                )));
            }
            if resolution[k] == 0 {
                return Err(SgError::Config(format!("axis {k}: zero resolution")));
            }
        }
        Ok(GridSpec { lower, upper, resolution })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn resolution(&self) -> &[usize] {
        &self.resolution
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn cell_width(&self, axis: usize) -> f64 {
        (self.upper[axis] - self.lower[axis]) / self.resolution[axis] as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|k| self.cell_width(k)).product()
    }

    pub fn num_cells(&self) -> usize {
        self.resolution.iter().product()
    }

    pub fn axis_centers(&self, axis: usize) -> Vec<f64> {
        let w = self.cell_width(axis);
        (0..self.resolution[axis])
            .map(|i| self.lower[axis] + (i as f64 + 0.5) * w)
            .collect()
    }

    /// Center of the cell with the given row-major index.
    pub fn center_of(&self, index: usize) -> Vec<f64> {
        match self.dim() {
            1 => vec![self.lower[0] + (index as f64 + 0.5) * self.cell_width(0)],
            2 => {
                let cols = self.resolution[1];
                let i = index / cols;
                let j = index % cols;
                vec![
                    self.lower[0] + (i as f64 + 0.5) * self.cell_width(0),
                    self.lower[1] + (j as f64 + 0.5) * self.cell_width(1),
                ]
            }
            _ => unreachable!(),
        }
    }

    /// Row-major cell index of a point, or None if it lies outside the box.
    pub fn cell_index_of(&self, x: &[f64]) -> Option<usize> {
        if x.len() != self.dim() {
            return None;
        }
        let mut index = 0usize;
        for k in 0..self.dim() {
            if x[k] < self.lower[k] || x[k] >= self.upper[k] {
                return None;
            }
            let i = ((x[k] - self.lower[k]) / self.cell_width(k)) as usize;
            let i = i.min(self.resolution[k] - 1);
            index = index * self.resolution[k] + i;
        }
        Some(index)
    }
}

/// A nonnegative density sampled on a grid; normalized grids integrate to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    spec: GridSpec,
    values: Vec<f64>,
}

impl DensityGrid {
    pub fn from_values(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.num_cells() {
            return Err(SgError::GridMismatch(format!(
                "expected {} cells, got {}",
                spec.num_cells(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(SgError::NonFinite("grid values must be finite and >= 0".into()));
        }
        Ok(DensityGrid { spec, values })
    }

    /// Evaluate a density at every cell center and normalize.
    pub fn from_density(spec: &GridSpec, mut f: impl FnMut(&[f64]) -> f64) -> Result<Self> {
        let values: Vec<f64> = (0..spec.num_cells()).map(|i| f(&spec.center_of(i))).collect();
        let mut grid = DensityGrid::from_values(spec.clone(), values)?;
        grid.normalize()?;
        Ok(grid)
    }

    /// Evaluate an unnormalized log density, exponentiate stably, normalize.
    pub fn from_log_density(spec: &GridSpec, mut f: impl FnMut(&[f64]) -> f64) -> Result<Self> {
        let logs: Vec<f64> = (0..spec.num_cells()).map(|i| f(&spec.center_of(i))).collect();
        let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !m.is_finite() {
            return Err(SgError::NonFinite("log density is -inf everywhere on the grid".into()));
        }
        let values: Vec<f64> = logs.iter().map(|l| (l - m).exp()).collect();
        let mut grid = DensityGrid::from_values(spec.clone(), values)?;
        grid.normalize()?;
        Ok(grid)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn cell_volume(&self) -> f64 {
        self.spec.cell_volume()
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.spec.cell_volume()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let total = self.integral();
        if !(total > 0.0) || !total.is_finite() {
            return Err(SgError::NonFinite(format!("cannot normalize grid with mass {total}")));
        }
        for v in &mut self.values {
            *v /= total;
        }
        Ok(())
    }

    pub fn same_shape(&self, other: &DensityGrid) -> bool {
        self.spec == other.spec
    }

    /// Probability mass of a 1D grid inside [lo, hi], counting fractional
    /// overlap of boundary cells.
    pub fn mass_in_interval(&self, lo: f64, hi: f64) -> Result<f64> {
        if self.spec.dim() != 1 {
            return Err(SgError::Domain("mass_in_interval requires a 1D grid".into()));
        }
        if lo >= hi {
            return Err(SgError::Domain(format!("empty interval [{lo}, {hi})")));
        }
        let w = self.spec.cell_width(0);
        let mut mass = 0.0;
        for (i, &v) in self.values.iter().enumerate() {
            let cell_lo = self.spec.lower()[0] + i as f64 * w;
            let cell_hi = cell_lo + w;
            let overlap = (hi.min(cell_hi) - lo.max(cell_lo)).max(0.0);
            mass += v * overlap;
        }
        Ok(mass)
    }

    /// CSV layout: one row of cell centers per axis, then the values in
    /// row-major order (2D grids emit one row per axis-0 index).
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for axis in 0..self.spec.dim() {
            let centers = self.spec.axis_centers(axis);
            let line: Vec<String> = centers.iter().map(|c| c.to_string()).collect();
            writeln!(w, "axis{axis},{}", line.join(","))?;
        }
        match self.spec.dim() {
            1 => {
                let line: Vec<String> = self.values.iter().map(|v| v.to_string()).collect();
                writeln!(w, "values,{}", line.join(","))?;
            }
            _ => {
                let cols = self.spec.resolution()[1];
                for (i, row) in self.values.chunks(cols).enumerate() {
                    let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                    writeln!(w, "row{i},{}", line.join(","))?;
                }
            }
        }
        Ok(())
    }
}
