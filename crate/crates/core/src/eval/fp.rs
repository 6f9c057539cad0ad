//! Explicit conservative finite-volume evolution of the sampler's density:
//! an independent oracle for particle runs. The guided drift is frozen per
//! sampler interval (exactly what particles experience) while the solver
//! substeps inside each interval to stay CFL-stable.

use crate::analytic::DensityGrid;
use crate::error::{Result, SgError};
use crate::field::ScoreField;
use crate::guidance::{stack_apply, GuidanceStack, StepCache};
use crate::schedule::NoiseSchedule;

#[derive(Debug, Clone, Copy)]
pub struct FpOptions {
    /// Fraction of the stability limit used for substeps.
    pub cfl_safety: f64,
    /// Allowed |mass - 1| per unit evolved time.
    pub mass_tol_per_unit_time: f64,
    /// Refuse runs whose CFL substep count explodes past this.
    pub max_total_substeps: usize,
}

impl Default for FpOptions {
    fn default() -> Self {
        FpOptions {
            cfl_safety: 0.4,
            mass_tol_per_unit_time: 1e-6,
            max_total_substeps: 50_000_000,
        }
    }
}

fn divergence_update_1d(p: &mut [f64], w: &[f64], diff: f64, ds: f64, dx: f64) {
    let n = p.len();
    // interface fluxes, zero at the boundary
    let mut flux = vec![0.0; n + 1];
    for i in 0..n - 1 {
        let w_face = 0.5 * (w[i] + w[i + 1]);
        let adv = if w_face > 0.0 { w_face * p[i] } else { w_face * p[i + 1] };
        flux[i + 1] = adv - diff * (p[i + 1] - p[i]) / dx;
    }
    for i in 0..n {
        p[i] -= ds / dx * (flux[i + 1] - flux[i]);
    }
}

fn divergence_update_2d(
    p: &mut [f64],
    w0: &[f64],
    w1: &[f64],
    diff: f64,
    ds: f64,
    shape: (usize, usize),
    dx: (f64, f64),
) {
    let (n0, n1) = shape;
    let mut delta = vec![0.0; p.len()];
    // axis 0 (rows)
    for j in 0..n1 {
        for i in 0..n0 - 1 {
            let a = i * n1 + j;
            let b = (i + 1) * n1 + j;
            let w_face = 0.5 * (w0[a] + w0[b]);
            let adv = if w_face > 0.0 { w_face * p[a] } else { w_face * p[b] };
            let f = adv - diff * (p[b] - p[a]) / dx.0;
            delta[a] -= f / dx.0;
            delta[b] += f / dx.0;
        }
    }
    // axis 1 (cols)
    for i in 0..n0 {
        for j in 0..n1 - 1 {
            let a = i * n1 + j;
            let b = i * n1 + j + 1;
            let w_face = 0.5 * (w1[a] + w1[b]);
            let adv = if w_face > 0.0 { w_face * p[a] } else { w_face * p[b] };
            let f = adv - diff * (p[b] - p[a]) / dx.1;
            delta[a] -= f / dx.1;
            delta[b] += f / dx.1;
        }
    }
    for (pi, d) in p.iter_mut().zip(&delta) {
        *pi += ds * d;
    }
}

/// Evolve `initial` along the sampler's decreasing time grid under the given
/// drift (sampler frame: dx = v dt with dt < 0) and squared noise scale
/// tau^2 G^2(t). Mass is conserved by the zero-flux form and checked; cells
/// must stay above -1e-12 before the final clamp.
pub fn fokker_planck_evolve(
    initial: &DensityGrid,
    mut drift: impl FnMut(&[f64], f64) -> Vec<f64>,
    mut diffusion2: impl FnMut(f64) -> f64,
    time_grid: &[f64],
    options: &FpOptions,
) -> Result<DensityGrid> {
    if time_grid.len() < 2 {
        return Err(SgError::Config("time grid needs at least two points".into()));
    }
    if time_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(SgError::Config("time grid must be strictly decreasing".into()));
    }
    let spec = initial.spec().clone();
    let dim = spec.dim();
    let mut p = initial.values().to_vec();
    let start_mass = initial.integral();
    let cell = spec.cell_volume();
    let mut substeps_used = 0usize;
    let mut elapsed = 0.0;

    for win in time_grid.windows(2) {
        let (t, t_next) = (win[0], win[1]);
        let interval = t - t_next;
        // forward-clock velocity is the negated sampler drift
        let num_cells = spec.num_cells();
        let mut w_axes = vec![vec![0.0; num_cells]; dim];
        for idx in 0..num_cells {
            let x = spec.center_of(idx);
            let v = drift(&x, t);
            if v.len() != dim {
                return Err(SgError::DimensionMismatch { expected: dim, got: v.len() });
            }
            for (a, w) in w_axes.iter_mut().enumerate() {
                w[idx] = -v[a];
            }
        }
        let diff = 0.5 * diffusion2(t);
        if diff < 0.0 {
            return Err(SgError::Domain("negative diffusion coefficient".into()));
        }
        // combined advection + diffusion stability rate
        let mut rate = 0.0;
        for a in 0..dim {
            let dx = spec.cell_width(a);
            let wmax = w_axes[a].iter().fold(0.0f64, |m, w| m.max(w.abs()));
            rate += 2.0 * diff / (dx * dx) + wmax / dx;
        }
        let ds_max = if rate > 0.0 { options.cfl_safety / rate } else { interval };
        let m = (interval / ds_max).ceil().max(1.0) as usize;
        substeps_used += m;
        if substeps_used > options.max_total_substeps {
            return Err(SgError::Domain(format!(
                "CFL-stable substep budget exceeded: {substeps_used} > {} (interval at t={t} needs {m})",
                options.max_total_substeps
            )));
        }
        let ds = interval / m as f64;
        for _ in 0..m {
            match dim {
                1 => divergence_update_1d(&mut p, &w_axes[0], diff, ds, spec.cell_width(0)),
                2 => divergence_update_2d(
                    &mut p,
                    &w_axes[0],
                    &w_axes[1],
                    diff,
                    ds,
                    (spec.resolution()[0], spec.resolution()[1]),
                    (spec.cell_width(0), spec.cell_width(1)),
                ),
                _ => unreachable!("grids are 1D or 2D"),
            }
        }
        elapsed += interval;
        let mass: f64 = p.iter().sum::<f64>() * cell;
        if (mass - start_mass).abs() > options.mass_tol_per_unit_time * elapsed.max(1.0) {
            return Err(SgError::NonFinite(format!(
                "mass drifted to {mass} after {elapsed:.3} time units"
            )));
        }
        let min = p.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -1e-12 {
            return Err(SgError::NonFinite(format!("cell density fell to {min}")));
        }
    }
    for v in &mut p {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    DensityGrid::from_values(spec, p)
}

/// Drift the particles experience under the guided reverse SDE:
/// v = F - (1 + tau^2)/2 G^2 s*(x, t). Only cache-free guidance (constant or
/// dynamic shifts) can be mirrored on a grid.
pub fn guided_sde_drift<'a>(
    field: &'a dyn ScoreField,
    stack: &'a GuidanceStack,
    schedule: &'a NoiseSchedule,
    tau: f64,
) -> impl FnMut(&[f64], f64) -> Vec<f64> + 'a {
    let empty = StepCache::empty();
    move |x: &[f64], t: f64| {
        let (guided, _, _) =
            stack_apply(field, stack, x, t, &empty, schedule).expect("field evaluable on grid");
        let (drift, g) = schedule.vp_drift_diffusion(x, t).expect("VP coefficients");
        let factor = 0.5 * (1.0 + tau * tau) * g * g;
        drift
            .iter()
            .zip(&guided)
            .map(|(f, s)| f - factor * s)
            .collect()
    }
}
