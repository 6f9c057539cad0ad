//! Closed-form self-guided densities: p_t raised against the ratio
//! p_t / p_{t+delta}, the density the SG score combiner samples from.

use super::grid::{DensityGrid, GridSpec};
use super::mixture::{MixtureDensity, LOG_FLOOR};
use crate::error::{Result, SgError};
use crate::schedule::NoiseSchedule;

fn check_sg_args(t: f64, delta: f64, omega: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(SgError::Domain(format!("t={t} outside [0, 1]")));
    }
    if delta < 0.0 {
        return Err(SgError::Domain(format!("delta={delta} must be >= 0")));
    }
    if t + delta > 1.0 + 1e-12 {
        return Err(SgError::Domain(format!(
            "t + delta = {} exceeds the time horizon 1",
            t + delta
        )));
    }
    if omega < 0.0 {
        return Err(SgError::Domain(format!("omega={omega} must be >= 0")));
    }
    Ok(())
}

/// Unnormalized log of p_t(x)^(1+omega) / p_{t+delta}(x)^omega with log
/// densities floored so the ratio never underflows.
pub fn sg_log_density(
    data: &MixtureDensity,
    schedule: &NoiseSchedule,
    t: f64,
    delta: f64,
    omega: f64,
    x: &[f64],
) -> Result<f64> {
    check_sg_args(t, delta, omega)?;
    let p_t = data.diffused(schedule, t)?;
    let p_shift = data.diffused(schedule, (t + delta).min(1.0))?;
    let log_t = p_t.log_density_at(x)?.max(LOG_FLOOR);
    let log_shift = p_shift.log_density_at(x)?.max(LOG_FLOOR);
    Ok((1.0 + omega) * log_t - omega * log_shift)
}

/// The normalized self-guided density on a grid. omega = 0 or delta = 0
/// reduce to the plain diffused density.
pub fn sg_density_grid(
    data: &MixtureDensity,
    schedule: &NoiseSchedule,
    t: f64,
    delta: f64,
    omega: f64,
    spec: &GridSpec,
) -> Result<DensityGrid> {
    check_sg_args(t, delta, omega)?;
    let p_t = data.diffused(schedule, t)?;
    let p_shift = data.diffused(schedule, (t + delta).min(1.0))?;
    DensityGrid::from_log_density(spec, |x| {
        let log_t = p_t.log_density_at(x).unwrap().max(LOG_FLOOR);
        let log_shift = p_shift.log_density_at(x).unwrap().max(LOG_FLOOR);
        (1.0 + omega) * log_t - omega * log_shift
    })
}

/// The SG score identity: (1+omega) s_t(x) - omega s_{t+delta}(x), evaluated
/// with exact mixture scores.
pub fn sg_analytic_score(
    data: &MixtureDensity,
    schedule: &NoiseSchedule,
    t: f64,
    delta: f64,
    omega: f64,
    x: &[f64],
) -> Result<Vec<f64>> {
    check_sg_args(t, delta, omega)?;
    let s_t = data.diffused(schedule, t)?.score_at(x)?;
    let s_shift = data.diffused(schedule, (t + delta).min(1.0))?.score_at(x)?;
    Ok(s_t
        .iter()
        .zip(&s_shift)
        .map(|(a, b)| (1.0 + omega) * a - omega * b)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_mode_setup() -> (MixtureDensity, NoiseSchedule, GridSpec) {
        (
            MixtureDensity::two_mode(1.0, 0.05),
            NoiseSchedule::vp_default(),
            GridSpec::new(vec![-3.0], vec![3.0], vec![600]).unwrap(),
        )
    }

    #[test]
    fn omega_zero_is_plain_density() {
        let (data, sched, spec) = two_mode_setup();
        let sg = sg_density_grid(&data, &sched, 0.38, 0.2, 0.0, &spec).unwrap();
        let diffused = data.diffused(&sched, 0.38).unwrap();
        let plain = DensityGrid::from_density(&spec, |x| diffused.density_at(x).unwrap()).unwrap();
        for (a, b) in sg.values().iter().zip(plain.values()) {
            assert!((a - b).abs() < 1e-9 * b.max(1e-9));
        }
    }

    #[test]
    fn delta_zero_is_plain_density() {
        let (data, sched, spec) = two_mode_setup();
        let sg = sg_density_grid(&data, &sched, 0.38, 0.0, 2.0, &spec).unwrap();
        let diffused = data.diffused(&sched, 0.38).unwrap();
        let plain = DensityGrid::from_density(&spec, |x| diffused.density_at(x).unwrap()).unwrap();
        for (a, b) in sg.values().iter().zip(plain.values()) {
            assert!((a - b).abs() < 1e-9 * b.max(1e-9));
        }
    }

    #[test]
    fn horizon_violation_rejected() {
        let (data, sched, spec) = two_mode_setup();
        assert!(sg_density_grid(&data, &sched, 0.9, 0.2, 1.0, &spec).is_err());
    }

    #[test]
    fn valley_suppressed_below_plain_density() {
        // the red-below-blue ordering at the origin
        let (data, sched, spec) = two_mode_setup();
        let sg = sg_density_grid(&data, &sched, 0.38, 0.2, 1.0, &spec).unwrap();
        let diffused = data.diffused(&sched, 0.38).unwrap();
        let plain = DensityGrid::from_density(&spec, |x| diffused.density_at(x).unwrap()).unwrap();
        let mid = spec.cell_index_of(&[0.0]).unwrap();
        assert!(
            sg.values()[mid] < plain.values()[mid],
            "SG valley value {} should fall below plain {}",
            sg.values()[mid],
            plain.values()[mid]
        );
    }

    #[test]
    fn score_identity_matches_log_gradient() {
        let (data, sched, _) = two_mode_setup();
        let h = 1e-5;
        for &omega in &[1.0, 3.0] {
            for &x in &[-1.7, -0.6, 0.31, 1.2] {
                let s = sg_analytic_score(&data, &sched, 0.38, 0.2, omega, &[x]).unwrap()[0];
                let lp = sg_log_density(&data, &sched, 0.38, 0.2, omega, &[x + h]).unwrap();
                let lm = sg_log_density(&data, &sched, 0.38, 0.2, omega, &[x - h]).unwrap();
                let fd = (lp - lm) / (2.0 * h);
                let rel = (s - fd).abs() / s.abs().max(1e-8);
                assert!(rel < 1e-4, "omega={omega} x={x}: score {s} vs fd {fd}");
            }
        }
    }

    #[test]
    fn valley_mass_monotone_in_omega() {
        let (data, sched, spec) = two_mode_setup();
        let mut masses = Vec::new();
        for omega in [0.0, 1.0, 2.0, 3.0] {
            let g = sg_density_grid(&data, &sched, 0.38, 0.2, omega, &spec).unwrap();
            masses.push(g.mass_in_interval(-0.25, 0.25).unwrap());
        }
        for w in masses.windows(2) {
            assert!(w[1] < w[0], "valley mass must strictly decrease: {masses:?}");
        }
    }
}
