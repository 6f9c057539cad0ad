//! Trainable score/velocity model: a reverse-mode gradient tape, the MLP,
//! the DSM and flow losses, Adam, the training loop, and checkpoints.

pub mod adam;
pub mod checkpoint;
pub mod graph;
pub mod loss;
pub mod net;
pub mod train;

pub use adam::{adam_update, AdamConfig, AdamState};
pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use graph::ValueGraph;
pub use loss::{
    draw_dsm_batch, draw_flow_batch, dsm_loss, flow_loss, loss_from_batch, weighted_mse,
    DrawnBatch, FlowKind, LossGraph, Weighting,
};
pub use net::{Param, ScoreNet};
pub use train::{train, LossKind, TracePoint, TrainConfig, TrainData};
