//! The abstract model-output evaluator shared by the analytic oracles and
//! the trained network. Depending on the experiment, the output is a score
//! (VP diffusion) or a flow velocity (RF); the guidance combiners treat both
//! the same way.

use crate::analytic::MixtureDensity;
use crate::error::{Result, SgError};
use crate::matrix::Matrix;
use crate::schedule::NoiseSchedule;

/// Conditioning input: a class label or the empty label used for
/// unconditional prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    Empty,
    Class(usize),
}

impl Condition {
    pub fn as_str(&self) -> String {
        match self {
            Condition::Empty => "none".to_string(),
            Condition::Class(c) => c.to_string(),
        }
    }
}

/// Evaluator of the model output s(x, t | c) at arbitrary positions.
pub trait ScoreField {
    fn dim(&self) -> usize;

    fn eval(&self, x: &[f64], t: f64, cond: Condition) -> Result<Vec<f64>>;

    /// Evaluate every row of a batch at a shared time. Implementations must
    /// return exactly the same values as row-by-row `eval` calls.
    fn eval_batch(&self, xs: &Matrix, t: f64, cond: Condition) -> Result<Matrix> {
        let mut out = Matrix::zeros(xs.rows(), self.dim());
        for i in 0..xs.rows() {
            let v = self.eval(xs.row(i), t, cond)?;
            out.row_mut(i).copy_from_slice(&v);
        }
        Ok(out)
    }
}

/// Exact score of the diffused mixture; class labels condition on a single
/// mixture component, the empty label uses the full mixture.
pub struct AnalyticScoreField {
    data: MixtureDensity,
    schedule: NoiseSchedule,
}

impl AnalyticScoreField {
    pub fn new(data: MixtureDensity, schedule: NoiseSchedule) -> Self {
        AnalyticScoreField { data, schedule }
    }

    fn select(&self, cond: Condition) -> Result<MixtureDensity> {
        match cond {
            Condition::Empty => Ok(self.data.clone()),
            Condition::Class(c) => self.data.conditional(c),
        }
    }
}

impl ScoreField for AnalyticScoreField {
    fn dim(&self) -> usize {
        self.data.dim()
    }

    fn eval(&self, x: &[f64], t: f64, cond: Condition) -> Result<Vec<f64>> {
        self.select(cond)?.diffused(&self.schedule, t)?.score_at(x)
    }

    fn eval_batch(&self, xs: &Matrix, t: f64, cond: Condition) -> Result<Matrix> {
        // diffuse once per call instead of once per row
        let diffused = self.select(cond)?.diffused(&self.schedule, t)?;
        let mut out = Matrix::zeros(xs.rows(), self.dim());
        for i in 0..xs.rows() {
            let v = diffused.score_at(xs.row(i))?;
            out.row_mut(i).copy_from_slice(&v);
        }
        Ok(out)
    }
}

/// Exact marginal velocity of the rectified-flow interpolant on a mixture.
pub struct AnalyticVelocityField {
    data: MixtureDensity,
    schedule: NoiseSchedule,
}

impl AnalyticVelocityField {
    pub fn new(data: MixtureDensity, schedule: NoiseSchedule) -> Self {
        AnalyticVelocityField { data, schedule }
    }
}

impl ScoreField for AnalyticVelocityField {
    fn dim(&self) -> usize {
        self.data.dim()
    }

    fn eval(&self, x: &[f64], t: f64, cond: Condition) -> Result<Vec<f64>> {
        let data = match cond {
            Condition::Empty => self.data.clone(),
            Condition::Class(c) => self.data.conditional(c)?,
        };
        data.velocity_at(&self.schedule, t, x)
    }
}

/// A fixed vector field given as a closure; handy for tests and the
/// Fokker-Planck oracle.
pub struct FnField<F: Fn(&[f64], f64) -> Vec<f64>> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64], f64) -> Vec<f64>> FnField<F> {
    pub fn new(dim: usize, f: F) -> Self {
        FnField { dim, f }
    }
}

impl<F: Fn(&[f64], f64) -> Vec<f64>> ScoreField for FnField<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64], t: f64, _cond: Condition) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(SgError::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        Ok((self.f)(x, t))
    }
}
