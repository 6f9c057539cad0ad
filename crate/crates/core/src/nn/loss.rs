//! Training objectives: denoising score matching for VP diffusion and the
//! flow-matching / rectified-flow velocity losses.

use super::graph::ValueGraph;
use super::net::ScoreNet;
use crate::error::{Result, SgError};
use crate::field::Condition;
use crate::matrix::Matrix;
use crate::schedule::{NoiseSchedule, ScheduleKind, T_EPS};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Time weighting lambda(t) of the score-matching objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weighting {
    /// lambda(t) = sigma_t^2, the default.
    SigmaSquared,
    /// lambda(t) = 1.
    Unit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowKind {
    Cfm,
    Rf,
}

/// A drawn training batch: noised inputs, per-row times, regression targets,
/// conditions after dropout, and loss weights.
#[derive(Debug, Clone)]
pub struct DrawnBatch {
    pub x_t: Matrix,
    pub t: Vec<f64>,
    pub target: Matrix,
    pub cond: Vec<Condition>,
    pub lambda: Vec<f64>,
}

/// A recorded loss evaluation; `backward` yields per-parameter gradients.
pub struct LossGraph {
    pub loss: f64,
    graph: ValueGraph,
    param_nodes: Vec<usize>,
    loss_node: usize,
}

impl LossGraph {
    pub fn backward(mut self) -> Result<Vec<Vec<f64>>> {
        self.graph.backward(self.loss_node)?;
        Ok(self
            .param_nodes
            .iter()
            .map(|&id| self.graph.adjoint(id).to_vec())
            .collect())
    }
}

fn apply_dropout<R: Rng>(labels: &[usize], drop_prob: f64, rng: &mut R) -> Vec<Condition> {
    labels
        .iter()
        .map(|&l| {
            if rng.gen::<f64>() < drop_prob {
                Condition::Empty
            } else {
                Condition::Class(l)
            }
        })
        .collect()
}

/// Draw the DSM batch: t ~ U[t_eps, 1], x_t = alpha x0 + sigma eps, target
/// equal to the conditional score -(x_t - alpha x0)/sigma^2 = -eps/sigma.
pub fn draw_dsm_batch<R: Rng>(
    x0: &Matrix,
    labels: &[usize],
    schedule: &NoiseSchedule,
    weighting: Weighting,
    drop_prob: f64,
    rng: &mut R,
) -> Result<DrawnBatch> {
    if schedule.kind != ScheduleKind::Vp {
        return Err(SgError::Domain("DSM requires a VP schedule".into()));
    }
    let n = x0.rows();
    if n == 0 {
        return Err(SgError::Config("empty batch".into()));
    }
    let d = x0.cols();
    let mut x_t = Matrix::zeros(n, d);
    let mut target = Matrix::zeros(n, d);
    let mut ts = Vec::with_capacity(n);
    let mut lambda = Vec::with_capacity(n);
    for i in 0..n {
        let t = rng.gen_range(T_EPS..=1.0);
        let (alpha, sigma) = schedule.vp_alpha_sigma(t)?;
        for k in 0..d {
            let eps: f64 = StandardNormal.sample(rng);
            x_t.row_mut(i)[k] = alpha * x0.row(i)[k] + sigma * eps;
            target.row_mut(i)[k] = -eps / sigma;
        }
        lambda.push(match weighting {
            Weighting::SigmaSquared => sigma * sigma,
            Weighting::Unit => 1.0,
        });
        ts.push(t);
    }
    let cond = apply_dropout(labels, drop_prob, rng);
    Ok(DrawnBatch { x_t, t: ts, target, cond, lambda })
}

/// Draw the flow batch: t ~ U[t_eps, 1 - t_eps], z = a x0 + b eps. The RF
/// target is eps - x0; the CFM target (a'/a) z - (b/2) lambda' eps coincides
/// with it for the rectified-flow coefficients.
pub fn draw_flow_batch<R: Rng>(
    x0: &Matrix,
    labels: &[usize],
    schedule: &NoiseSchedule,
    kind: FlowKind,
    drop_prob: f64,
    rng: &mut R,
) -> Result<DrawnBatch> {
    if kind == FlowKind::Rf && schedule.kind != ScheduleKind::Rf {
        return Err(SgError::Domain("the RF loss requires an RF schedule".into()));
    }
    let n = x0.rows();
    if n == 0 {
        return Err(SgError::Config("empty batch".into()));
    }
    let d = x0.cols();
    let mut z = Matrix::zeros(n, d);
    let mut target = Matrix::zeros(n, d);
    let mut ts = Vec::with_capacity(n);
    for i in 0..n {
        let t = rng.gen_range(T_EPS..=(1.0 - T_EPS));
        let (a, b) = schedule.marginal_coeffs(t)?;
        match kind {
            FlowKind::Rf => {
                for k in 0..d {
                    let eps: f64 = StandardNormal.sample(rng);
                    z.row_mut(i)[k] = a * x0.row(i)[k] + b * eps;
                    target.row_mut(i)[k] = eps - x0.row(i)[k];
                }
            }
            FlowKind::Cfm => {
                let (_, lambda_prime) = schedule.snr_lambda(t)?;
                // a'/a for the supported schedules
                let a_rate = match schedule.kind {
                    ScheduleKind::Rf => -1.0 / a,
                    ScheduleKind::Vp => -0.5 * schedule.beta(t),
                };
                for k in 0..d {
                    let eps: f64 = StandardNormal.sample(rng);
                    let zt = a * x0.row(i)[k] + b * eps;
                    z.row_mut(i)[k] = zt;
                    target.row_mut(i)[k] = a_rate * zt - 0.5 * b * lambda_prime * eps;
                }
            }
        }
        ts.push(t);
    }
    let cond = apply_dropout(labels, drop_prob, rng);
    Ok(DrawnBatch {
        x_t: z,
        t: ts,
        target,
        cond,
        lambda: vec![1.0; n],
    })
}

/// Record the weighted squared-error loss of the network on a drawn batch.
pub fn loss_from_batch(net: &ScoreNet, batch: &DrawnBatch) -> Result<LossGraph> {
    let mut graph = ValueGraph::new();
    let mut param_nodes = Vec::new();
    let pred = net.forward_graph(&mut graph, &batch.x_t, &batch.t, &batch.cond, &mut param_nodes)?;
    let tgt = graph.leaf(batch.target.rows(), batch.target.cols(), batch.target.data().to_vec(), false);
    let diff = graph.sub(pred, tgt);
    let loss_node = graph.weighted_square_mean(diff, batch.lambda.clone());
    let loss = graph.value(loss_node)[0];
    if !loss.is_finite() {
        return Err(SgError::NonFinite(format!("loss evaluated to {loss}")));
    }
    Ok(LossGraph { loss, graph, param_nodes, loss_node })
}

/// Denoising score matching loss with condition dropout.
pub fn dsm_loss<R: Rng>(
    net: &ScoreNet,
    x0: &Matrix,
    labels: &[usize],
    schedule: &NoiseSchedule,
    weighting: Weighting,
    drop_prob: f64,
    rng: &mut R,
) -> Result<LossGraph> {
    let batch = draw_dsm_batch(x0, labels, schedule, weighting, drop_prob, rng)?;
    loss_from_batch(net, &batch)
}

/// Flow-matching / rectified-flow velocity loss.
pub fn flow_loss<R: Rng>(
    net: &ScoreNet,
    x0: &Matrix,
    labels: &[usize],
    schedule: &NoiseSchedule,
    kind: FlowKind,
    drop_prob: f64,
    rng: &mut R,
) -> Result<LossGraph> {
    let batch = draw_flow_batch(x0, labels, schedule, kind, drop_prob, rng)?;
    loss_from_batch(net, &batch)
}

/// Plain (graph-free) weighted squared-error, used by oracle tests.
pub fn weighted_mse(pred: &Matrix, target: &Matrix, lambda: &[f64]) -> f64 {
    let n = pred.rows();
    let mut acc = 0.0;
    for i in 0..n {
        let mut s = 0.0;
        for (p, t) in pred.row(i).iter().zip(target.row(i)) {
            let d = p - t;
            s += d * d;
        }
        acc += lambda[i] * s;
    }
    acc / n as f64
}
