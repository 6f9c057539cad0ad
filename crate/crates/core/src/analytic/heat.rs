//! Heat-equation diagnostics on the Gaussian-smoothing family.
//!
//! Convolving a density with N(0, u) and growing u satisfies the heat
//! equation d/du p = Laplacian(p)/2 exactly. For the VP marginal we freeze
//! the signal scale alpha_t and expand only the noise variance u(t) =
//! sigma_t^2, so the residual d/dt p - g(t)^2 Laplacian(p) / 2 with
//! g(t)^2 = du/dt is testable to finite-difference accuracy.

use super::mixture::MixtureDensity;
use crate::error::Result;
use crate::schedule::NoiseSchedule;

/// Density of the data mixture scaled by `alpha` and convolved with N(0, u).
pub fn smoothed_density(data: &MixtureDensity, alpha: f64, u: f64, x: &[f64]) -> Result<f64> {
    let mut total = 0.0;
    let d = data.dim() as f64;
    for c in data.components() {
        let v = alpha * alpha * c.std * c.std + u;
        let mut q = 0.0;
        for (xi, mi) in x.iter().zip(&c.mean) {
            let diff = xi - alpha * mi;
            q += diff * diff;
        }
        total += c.weight * (-0.5 * q / v).exp()
            / (2.0 * std::f64::consts::PI * v).powf(0.5 * d);
    }
    Ok(total)
}

/// Closed-form Laplacian of the smoothed density.
pub fn smoothed_laplacian(data: &MixtureDensity, alpha: f64, u: f64, x: &[f64]) -> Result<f64> {
    let d = data.dim() as f64;
    let mut total = 0.0;
    for c in data.components() {
        let v = alpha * alpha * c.std * c.std + u;
        let mut q = 0.0;
        for (xi, mi) in x.iter().zip(&c.mean) {
            let diff = xi - alpha * mi;
            q += diff * diff;
        }
        let density =
            c.weight * (-0.5 * q / v).exp() / (2.0 * std::f64::consts::PI * v).powf(0.5 * d);
        total += density * (q / (v * v) - d / v);
    }
    Ok(total)
}

/// Residual of the heat identity for the VP variance-expansion family:
/// the time derivative (central difference, alpha frozen at alpha_t) minus
/// g(t)^2/2 times the closed-form Laplacian, with g(t)^2 = d(sigma_t^2)/dt.
pub fn heat_residual(
    data: &MixtureDensity,
    schedule: &NoiseSchedule,
    t: f64,
    x: &[f64],
    h: f64,
) -> Result<f64> {
    let (alpha, _) = schedule.vp_alpha_sigma(t)?;
    let u_plus = schedule.vp_alpha_sigma(t + h)?.1.powi(2);
    let u_minus = schedule.vp_alpha_sigma(t - h)?.1.powi(2);
    let u_now = schedule.vp_alpha_sigma(t)?.1.powi(2);
    let dp_dt = (smoothed_density(data, alpha, u_plus, x)?
        - smoothed_density(data, alpha, u_minus, x)?)
        / (2.0 * h);
    let g2 = schedule.vp_variance_rate(t)?;
    Ok(dp_dt - 0.5 * g2 * smoothed_laplacian(data, alpha, u_now, x)?)
}

/// Residual for the pure Brownian smoothing family p_t = q * N(0, t),
/// where g = 1 identically.
pub fn heat_residual_brownian(data: &MixtureDensity, t: f64, x: &[f64], h: f64) -> Result<f64> {
    let dp_dt =
        (smoothed_density(data, 1.0, t + h, x)? - smoothed_density(data, 1.0, t - h, x)?) / (2.0 * h);
    Ok(dp_dt - 0.5 * smoothed_laplacian(data, 1.0, t, x)?)
}

/// True when the VP-diffused two-sided mixture still has a local minimum at
/// the origin (the bimodality test m^2 > component variance for symmetric
/// two-mode data).
pub fn is_bimodal_at_origin(data: &MixtureDensity, schedule: &NoiseSchedule, t: f64) -> Result<bool> {
    let diffused = data.diffused(schedule, t)?;
    // second derivative of the log density at the origin
    let h = 1e-4;
    let f = |x: f64| diffused.log_density_at(&[x]).unwrap();
    let second = (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h);
    Ok(second > 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brownian_residual_vanishes() {
        let data = MixtureDensity::two_mode(1.0, 0.05);
        let h = 1e-5;
        for &t in &[0.1, 0.3, 0.7] {
            for &x in &[0.0, 0.5, 1.3] {
                let r = heat_residual_brownian(&data, t, &[x], h).unwrap();
                let p = smoothed_density(&data, 1.0, t, &[x]).unwrap();
                assert!(
                    r.abs() < 1e-4 * p.max(1e-6),
                    "brownian residual {r} at t={t}, x={x}"
                );
            }
        }
    }

    #[test]
    fn residual_both_sides_agree() {
        // evaluate dp/du and the Laplacian independently on a single frozen
        // Gaussian; the identity dp/du = lap/2 is exact
        let data = MixtureDensity::standard_normal(1);
        let u = 0.4;
        let h = 1e-6;
        for &x in &[0.0, 0.9] {
            let dp_du = (smoothed_density(&data, 1.0, u + h, &[x]).unwrap()
                - smoothed_density(&data, 1.0, u - h, &[x]).unwrap())
                / (2.0 * h);
            let lap = smoothed_laplacian(&data, 1.0, u, &[x]).unwrap();
            assert!((dp_du - 0.5 * lap).abs() < 1e-9, "at x={x}: {dp_du} vs {}", 0.5 * lap);
        }
    }

    #[test]
    fn vp_residual_small_on_grid() {
        let data = MixtureDensity::two_mode(1.0, 0.05);
        let sched = NoiseSchedule::vp_default();
        let h = 1e-5;
        for &t in &[0.2, 0.38, 0.6] {
            let mut max_resid = 0.0f64;
            let mut max_p = 0.0f64;
            for k in 0..200 {
                let x = -3.0 + 6.0 * (k as f64 + 0.5) / 200.0;
                let r = heat_residual(&data, &sched, t, &[x], h).unwrap().abs();
                let (alpha, sigma) = sched.vp_alpha_sigma(t).unwrap();
                let p = smoothed_density(&data, alpha, sigma * sigma, &[x]).unwrap();
                max_resid = max_resid.max(r);
                max_p = max_p.max(p);
            }
            assert!(
                max_resid <= 1e-4 * max_p,
                "t={t}: residual {max_resid} vs 1e-4 * {max_p}"
            );
        }
    }

    #[test]
    fn valley_fill_before_merge() {
        let data = MixtureDensity::two_mode(1.0, 0.05);
        let sched = NoiseSchedule::vp_default();
        let delta = 0.01;
        let mut checked = 0;
        for k in 1..=9 {
            let t = k as f64 / 10.0;
            if !is_bimodal_at_origin(&data, &sched, t).unwrap() {
                continue;
            }
            let p_t = data.diffused(&sched, t).unwrap().density_at(&[0.0]).unwrap();
            let p_shift = data
                .diffused(&sched, t + delta)
                .unwrap()
                .density_at(&[0.0])
                .unwrap();
            assert!(p_shift > p_t, "valley fill fails at t={t}: {p_shift} <= {p_t}");
            checked += 1;
        }
        assert!(checked >= 2, "expected at least two bimodal probe times");
    }
}
