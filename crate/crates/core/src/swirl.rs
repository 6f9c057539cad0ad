//! Double-swirl toy dataset: two interleaved Archimedean spirals with
//! Gaussian jitter, plus the dense arc-length discretization used for
//! distance-to-manifold metrics.

use crate::analytic::{MixtureComponent, MixtureDensity};
use crate::error::{Result, SgError};
use crate::matrix::Matrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

#[derive(Debug, Clone)]
pub struct SwirlSpec {
    pub theta_min: f64,
    pub theta_max: f64,
    /// Radius per radian; r = scale * theta.
    pub scale: f64,
    pub jitter_std: f64,
    /// Points per spiral in the arc-length discretization.
    pub arc_points: usize,
}

impl Default for SwirlSpec {
    fn default() -> Self {
        let theta_max = 2.5 * std::f64::consts::PI;
        SwirlSpec {
            theta_min: 0.5 * std::f64::consts::PI,
            theta_max,
            scale: 2.5 / theta_max,
            jitter_std: 0.05,
            arc_points: 10_000,
        }
    }
}

impl SwirlSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta_max > self.theta_min) || !(self.scale > 0.0) {
            return Err(SgError::Config("swirl needs theta_max > theta_min and scale > 0".into()));
        }
        if self.jitter_std < 0.0 || self.arc_points < 2 {
            return Err(SgError::Config("swirl needs jitter_std >= 0 and arc_points >= 2".into()));
        }
        Ok(())
    }

    fn point_at(&self, theta: f64, spiral: usize) -> [f64; 2] {
        let phi = theta + spiral as f64 * std::f64::consts::PI;
        let r = self.scale * theta;
        [r * phi.cos(), r * phi.sin()]
    }

    /// Spiral parameters resampled to uniform arc length.
    pub fn arc_thetas(&self) -> Vec<f64> {
        let fine = 20_000usize;
        let mut thetas = Vec::with_capacity(fine);
        let mut arcs = Vec::with_capacity(fine);
        let mut prev = self.point_at(self.theta_min, 0);
        let mut acc = 0.0;
        for i in 0..fine {
            let th = self.theta_min
                + (self.theta_max - self.theta_min) * i as f64 / (fine - 1) as f64;
            let p = self.point_at(th, 0);
            acc += ((p[0] - prev[0]).powi(2) + (p[1] - prev[1]).powi(2)).sqrt();
            thetas.push(th);
            arcs.push(acc);
            prev = p;
        }
        let total = acc;
        let mut out = Vec::with_capacity(self.arc_points);
        let mut j = 0usize;
        for k in 0..self.arc_points {
            let s = total * k as f64 / (self.arc_points - 1) as f64;
            while j + 1 < fine && arcs[j + 1] < s {
                j += 1;
            }
            let (s0, s1) = (arcs[j], arcs[(j + 1).min(fine - 1)]);
            let (t0, t1) = (thetas[j], thetas[(j + 1).min(fine - 1)]);
            let frac = if s1 > s0 { (s - s0) / (s1 - s0) } else { 0.0 };
            out.push(t0 + frac * (t1 - t0));
        }
        out
    }

    /// Dense discretization of both spirals: 2 * arc_points rows, spiral 0
    /// first. Row index / arc_points is the spiral, index % arc_points the
    /// arc-length position.
    pub fn manifold(&self) -> Matrix {
        let thetas = self.arc_thetas();
        let mut out = Matrix::zeros(2 * self.arc_points, 2);
        for spiral in 0..2 {
            for (i, &th) in thetas.iter().enumerate() {
                let p = self.point_at(th, spiral);
                out.row_mut(spiral * self.arc_points + i).copy_from_slice(&p);
            }
        }
        out
    }

    /// Draw jittered samples uniform in arc length; the label is the spiral.
    pub fn sample<R: Rng>(&self, rng: &mut R, n: usize) -> (Matrix, Vec<usize>) {
        let thetas = self.arc_thetas();
        let mut out = Matrix::zeros(n, 2);
        let mut labels = Vec::with_capacity(n);
        for i in 0..n {
            let u: f64 = rng.gen();
            let pos = u * (thetas.len() - 1) as f64;
            let j = (pos as usize).min(thetas.len() - 2);
            let frac = pos - j as f64;
            let th = thetas[j] + frac * (thetas[j + 1] - thetas[j]);
            let spiral = (rng.gen::<f64>() < 0.5) as usize;
            let p = self.point_at(th, spiral);
            let row = out.row_mut(i);
            let j0: f64 = StandardNormal.sample(rng);
            let j1: f64 = StandardNormal.sample(rng);
            row[0] = p[0] + self.jitter_std * j0;
            row[1] = p[1] + self.jitter_std * j1;
            labels.push(spiral);
        }
        (out, labels)
    }

    /// Mixture approximation used for metric baselines: equal-weight
    /// isotropic components centered at uniform arc-length positions.
    pub fn fitted_mixture(&self, per_spiral: usize) -> Result<MixtureDensity> {
        let coarse = SwirlSpec { arc_points: per_spiral, ..self.clone() };
        let thetas = coarse.arc_thetas();
        let total = 2 * per_spiral;
        let mut comps = Vec::with_capacity(total);
        for spiral in 0..2 {
            for &th in &thetas {
                let p = self.point_at(th, spiral);
                comps.push(MixtureComponent {
                    weight: 1.0 / total as f64,
                    mean: vec![p[0], p[1]],
                    std: self.jitter_std.max(1e-3),
                });
            }
        }
        MixtureDensity::new(comps)
    }
}
