//! The training loop: deterministic given the seed, with a loss trace
//! emitted at step 1 and every 100 steps.

use super::adam::{adam_update, AdamConfig, AdamState};
use super::loss::{dsm_loss, flow_loss, FlowKind, Weighting};
use super::net::ScoreNet;
use crate::analytic::MixtureDensity;
use crate::error::{Result, SgError};
use crate::matrix::Matrix;
use crate::schedule::NoiseSchedule;
use crate::swirl::SwirlSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    Dsm,
    Cfm,
    Rf,
}

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub loss: LossKind,
    pub weighting: Weighting,
    pub batch_size: usize,
    pub steps: u64,
    pub adam: AdamConfig,
    pub drop_prob: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            loss: LossKind::Dsm,
            weighting: Weighting::SigmaSquared,
            batch_size: 256,
            steps: 20_000,
            adam: AdamConfig::default(),
            drop_prob: 0.1,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.drop_prob) {
            return Err(SgError::Config(format!(
                "train.drop_prob={} outside [0, 1]",
                self.drop_prob
            )));
        }
        if !(self.adam.learning_rate > 0.0) {
            return Err(SgError::Config("train.lr must be positive".into()));
        }
        if self.batch_size == 0 {
            return Err(SgError::Config("train.batch must be at least 1".into()));
        }
        Ok(())
    }
}

/// Training data source; mixtures and swirls draw fresh batches from the
/// generator, sample sets draw minibatches with replacement.
pub enum TrainData {
    Mixture(MixtureDensity),
    Swirl(SwirlSpec),
    Samples { x: Matrix, labels: Vec<usize> },
}

impl TrainData {
    pub fn dim(&self) -> usize {
        match self {
            TrainData::Mixture(m) => m.dim(),
            TrainData::Swirl(_) => 2,
            TrainData::Samples { x, .. } => x.cols(),
        }
    }

    pub fn num_classes(&self) -> usize {
        match self {
            TrainData::Mixture(m) => m.components().len(),
            TrainData::Swirl(_) => 2,
            TrainData::Samples { labels, .. } => {
                labels.iter().copied().max().map_or(1, |m| m + 1)
            }
        }
    }

    fn draw_batch<R: Rng>(&self, rng: &mut R, n: usize) -> (Matrix, Vec<usize>) {
        match self {
            TrainData::Mixture(m) => m.sample_with_labels(rng, n),
            TrainData::Swirl(s) => s.sample(rng, n),
            TrainData::Samples { x, labels } => {
                let mut out = Matrix::zeros(n, x.cols());
                let mut lab = Vec::with_capacity(n);
                for i in 0..n {
                    let j = rng.gen_range(0..x.rows());
                    out.row_mut(i).copy_from_slice(x.row(j));
                    lab.push(labels.get(j).copied().unwrap_or(0));
                }
                (out, lab)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub step: u64,
    pub loss: f64,
}

/// Train the network; returns the final parameters and the loss trace.
pub fn train(
    net: ScoreNet,
    config: &TrainConfig,
    data: &TrainData,
    schedule: &NoiseSchedule,
) -> Result<(ScoreNet, Vec<TracePoint>)> {
    config.validate()?;
    if data.dim() != net.dim() {
        return Err(SgError::DimensionMismatch { expected: net.dim(), got: data.dim() });
    }
    let mut net = net;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut state = AdamState::new(net.params());
    let mut trace = Vec::new();
    for step in 1..=config.steps {
        let (x0, labels) = data.draw_batch(&mut rng, config.batch_size);
        let lg = match config.loss {
            LossKind::Dsm => dsm_loss(
                &net,
                &x0,
                &labels,
                schedule,
                config.weighting,
                config.drop_prob,
                &mut rng,
            ),
            LossKind::Cfm => flow_loss(
                &net,
                &x0,
                &labels,
                schedule,
                FlowKind::Cfm,
                config.drop_prob,
                &mut rng,
            ),
            LossKind::Rf => flow_loss(
                &net,
                &x0,
                &labels,
                schedule,
                FlowKind::Rf,
                config.drop_prob,
                &mut rng,
            ),
        }?;
        let loss = lg.loss;
        if !loss.is_finite() {
            return Err(SgError::NonFinite(format!("loss became {loss} at step {step}")));
        }
        if step == 1 || step % 100 == 0 || step == config.steps {
            trace.push(TracePoint { step, loss });
        }
        let grads = lg.backward().map_err(|e| {
            SgError::NonFinite(format!("gradient failure at step {step}: {e}"))
        })?;
        adam_update(net.params_mut(), &grads, &mut state, &config.adam)?;
    }
    // drop duplicate final entry if steps is a multiple of 100
    trace.dedup_by_key(|p| p.step);
    Ok((net, trace))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_steps_leaves_parameters() {
        let net = ScoreNet::default_arch(1, 2, 1);
        let before: Vec<Vec<f64>> = net.params().iter().map(|p| p.data.clone()).collect();
        let config = TrainConfig { steps: 0, ..TrainConfig::default() };
        let data = TrainData::Mixture(MixtureDensity::two_mode(1.0, 0.05));
        let sched = NoiseSchedule::vp_default();
        let (after, trace) = train(net, &config, &data, &sched).unwrap();
        assert!(trace.is_empty());
        for (p, b) in after.params().iter().zip(&before) {
            assert_eq!(&p.data, b);
        }
    }

    #[test]
    fn identical_seed_identical_trace() {
        let config = TrainConfig { steps: 300, ..TrainConfig::default() };
        let data = TrainData::Mixture(MixtureDensity::two_mode(1.0, 0.05));
        let sched = NoiseSchedule::vp_default();
        let (_, t1) = train(ScoreNet::default_arch(1, 2, 7), &config, &data, &sched).unwrap();
        let (_, t2) = train(ScoreNet::default_arch(1, 2, 7), &config, &data, &sched).unwrap();
        assert_eq!(t1, t2, "loss traces must be bit-identical for equal seeds");
        assert_eq!(t1.first().map(|p| p.step), Some(1));
        assert!(t1.iter().any(|p| p.step == 300));
    }

    #[test]
    fn short_training_reduces_loss() {
        let config = TrainConfig { steps: 1500, ..TrainConfig::default() };
        let data = TrainData::Mixture(MixtureDensity::two_mode(1.0, 0.05));
        let sched = NoiseSchedule::vp_default();
        let (_, trace) = train(ScoreNet::default_arch(1, 2, 3), &config, &data, &sched).unwrap();
        let first = trace.first().unwrap().loss;
        let last = trace.last().unwrap().loss;
        assert!(last < 0.5 * first, "loss {first} -> {last}");
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let net = ScoreNet::default_arch(2, 2, 0);
        let config = TrainConfig { steps: 1, ..TrainConfig::default() };
        let data = TrainData::Mixture(MixtureDensity::two_mode(1.0, 0.05));
        let sched = NoiseSchedule::vp_default();
        assert!(train(net, &config, &data, &sched).is_err());
    }
}
