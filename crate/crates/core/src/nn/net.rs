//! The trainable score/velocity network: an MLP over [x, time embedding]
//! with SiLU activations and a learned class-embedding row added to the
//! first hidden pre-activation. The empty label owns the last embedding row.

use super::graph::ValueGraph;
use crate::error::{Result, SgError};
use crate::field::{Condition, ScoreField};
use crate::matrix::Matrix;
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};

#[derive(Debug, Clone)]
pub struct Param {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Param {
    fn new(name: &str, rows: usize, cols: usize) -> Self {
        Param { name: name.to_string(), rows, cols, data: vec![0.0; rows * cols] }
    }
}

#[derive(Debug, Clone)]
pub struct ScoreNet {
    dim: usize,
    time_embed: usize,
    hidden: Vec<usize>,
    /// Number of real class labels; the embedding table has one extra row
    /// for the empty label.
    vocab: usize,
    params: Vec<Param>,
}

impl ScoreNet {
    /// Zero-initialized network (outputs zero everywhere).
    pub fn zeros(dim: usize, time_embed: usize, hidden: Vec<usize>, vocab: usize) -> Result<Self> {
        if dim == 0 || hidden.is_empty() || time_embed < 2 || time_embed % 2 != 0 {
            return Err(SgError::Config(
                "net needs dim >= 1, at least one hidden layer, and an even time embedding >= 2"
                    .into(),
            ));
        }
        let mut params = Vec::new();
        let mut fan_in = dim + time_embed;
        for (i, &h) in hidden.iter().enumerate() {
            params.push(Param::new(&format!("w{}", i + 1), h, fan_in));
            params.push(Param::new(&format!("b{}", i + 1), 1, h));
            if i == 0 {
                params.push(Param::new("class_embed", vocab + 1, h));
            }
            fan_in = h;
        }
        params.push(Param::new("w_out", dim, fan_in));
        params.push(Param::new("b_out", 1, dim));
        Ok(ScoreNet { dim, time_embed, hidden, vocab, params })
    }

    /// Random initialization: weight std 1/sqrt(fan_in), class-embedding
    /// std 0.01, biases zero.
    pub fn init(dim: usize, time_embed: usize, hidden: Vec<usize>, vocab: usize, seed: u64) -> Result<Self> {
        let mut net = ScoreNet::zeros(dim, time_embed, hidden, vocab)?;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for p in &mut net.params {
            if p.name.starts_with('b') {
                continue;
            }
            let std = if p.name == "class_embed" { 0.01 } else { (1.0 / p.cols as f64).sqrt() };
            let dist = Normal::new(0.0, std).expect("valid normal");
            for v in &mut p.data {
                *v = dist.sample(&mut rng);
            }
        }
        Ok(net)
    }

    /// Default toy architecture: hidden [128, 128] with a 16-dim embedding.
    pub fn default_arch(dim: usize, vocab: usize, seed: u64) -> Self {
        ScoreNet::init(dim, 16, vec![128, 128], vocab, seed).expect("default arch is valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vocab(&self) -> usize {
        self.vocab
    }

    pub fn time_embed(&self) -> usize {
        self.time_embed
    }

    pub fn hidden(&self) -> &[usize] {
        &self.hidden
    }

    pub fn params(&self) -> &[Param] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [Param] {
        &mut self.params
    }

    pub fn num_parameters(&self) -> usize {
        self.params.iter().map(|p| p.data.len()).sum()
    }

    fn cond_index(&self, cond: Condition) -> Result<usize> {
        match cond {
            Condition::Empty => Ok(self.vocab),
            Condition::Class(c) if c < self.vocab => Ok(c),
            Condition::Class(c) => Err(SgError::Config(format!(
                "unknown condition id {c}; vocabulary size is {}",
                self.vocab
            ))),
        }
    }

    /// Sinusoidal time features with frequencies geometric from 1 to 1000.
    pub fn time_features(&self, t: f64) -> Vec<f64> {
        let half = self.time_embed / 2;
        let mut out = Vec::with_capacity(self.time_embed);
        for i in 0..half {
            let freq = if half > 1 {
                1000f64.powf(i as f64 / (half - 1) as f64)
            } else {
                1.0
            };
            out.push((freq * t).sin());
        }
        for i in 0..half {
            let freq = if half > 1 {
                1000f64.powf(i as f64 / (half - 1) as f64)
            } else {
                1.0
            };
            out.push((freq * t).cos());
        }
        out
    }

    /// Record the forward pass on a graph. `param_nodes` receives one node id
    /// per parameter tensor (in `params()` order); returns the output node.
    pub fn forward_graph(
        &self,
        graph: &mut ValueGraph,
        xs: &Matrix,
        ts: &[f64],
        conds: &[Condition],
        param_nodes: &mut Vec<usize>,
    ) -> Result<usize> {
        let n = xs.rows();
        if xs.cols() != self.dim {
            return Err(SgError::DimensionMismatch { expected: self.dim, got: xs.cols() });
        }
        if ts.len() != n || conds.len() != n {
            return Err(SgError::Config("batch rows, times, and conditions must agree".into()));
        }
        let mut indices = Vec::with_capacity(n);
        for &c in conds {
            indices.push(self.cond_index(c)?);
        }

        param_nodes.clear();
        for p in &self.params {
            param_nodes.push(graph.leaf(p.rows, p.cols, p.data.clone(), true));
        }

        // constant input [x, time features]
        let in_cols = self.dim + self.time_embed;
        let mut input = Vec::with_capacity(n * in_cols);
        for i in 0..n {
            input.extend_from_slice(xs.row(i));
            input.extend_from_slice(&self.time_features(ts[i]));
        }
        let mut h = graph.leaf(n, in_cols, input, false);

        let mut pi = 0;
        for layer in 0..self.hidden.len() {
            let w = param_nodes[pi];
            let b = param_nodes[pi + 1];
            pi += 2;
            let mut z = graph.matmul_t(h, w);
            z = graph.add_row(z, b);
            if layer == 0 {
                let table = param_nodes[pi];
                pi += 1;
                let emb = graph.gather(table, indices.clone());
                z = graph.add(z, emb);
            }
            h = graph.silu(z);
        }
        let w = param_nodes[pi];
        let b = param_nodes[pi + 1];
        let out = graph.matmul_t(h, w);
        Ok(graph.add_row(out, b))
    }

    /// Batched inference at a shared or per-row time.
    pub fn forward_batch(&self, xs: &Matrix, ts: &[f64], conds: &[Condition]) -> Result<Matrix> {
        let mut graph = ValueGraph::new();
        let mut param_nodes = Vec::new();
        let out = self.forward_graph(&mut graph, xs, ts, conds, &mut param_nodes)?;
        Ok(Matrix::from_vec(xs.rows(), self.dim, graph.value(out).to_vec()))
    }

    pub fn forward(&self, x: &[f64], t: f64, cond: Condition) -> Result<Vec<f64>> {
        let xs = Matrix::from_vec(1, x.len(), x.to_vec());
        let out = self.forward_batch(&xs, &[t], &[cond])?;
        Ok(out.row(0).to_vec())
    }
}

impl ScoreField for ScoreNet {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64], t: f64, cond: Condition) -> Result<Vec<f64>> {
        self.forward(x, t, cond)
    }

    fn eval_batch(&self, xs: &Matrix, t: f64, cond: Condition) -> Result<Matrix> {
        self.forward_batch(xs, &vec![t; xs.rows()], &vec![cond; xs.rows()])
    }
}
