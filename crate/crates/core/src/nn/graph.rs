//! Reverse-mode gradient tape over batched real arrays.
//!
//! Nodes are appended in evaluation order, so the node list is always
//! topologically sorted and the backward pass visits it in exact reverse
//! order. Values are computed eagerly when an op is recorded; adjoints are
//! allocated only when backward runs.

use crate::error::{Result, SgError};

#[derive(Debug, Clone)]
pub enum OpKind {
    /// Constant or trainable input array.
    Leaf { trainable: bool },
    /// y = x w^T for x (n x k), w (m x k).
    MatMulT,
    /// Elementwise sum of two same-shape arrays.
    Add,
    /// Broadcast-add a (1 x m) row to every row of an (n x m) array.
    AddRow,
    /// Select rows of a table: y_i = table[indices[i]].
    Gather { indices: Vec<usize> },
    /// Elementwise x * sigmoid(x).
    Silu,
    /// Elementwise difference a - b.
    Sub,
    /// Multiply by a constant.
    Scale { factor: f64 },
    /// Scalar (1/n) sum_i weights[i] * sum_j x_ij^2.
    WeightedSquareMean { weights: Vec<f64> },
}

#[derive(Debug)]
struct Node {
    op: OpKind,
    inputs: Vec<usize>,
    rows: usize,
    cols: usize,
    value: Vec<f64>,
    adjoint: Vec<f64>,
}

#[derive(Debug, Default)]
pub struct ValueGraph {
    nodes: Vec<Node>,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl ValueGraph {
    pub fn new() -> Self {
        ValueGraph { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn shape(&self, id: usize) -> (usize, usize) {
        (self.nodes[id].rows, self.nodes[id].cols)
    }

    pub fn value(&self, id: usize) -> &[f64] {
        &self.nodes[id].value
    }

    pub fn adjoint(&self, id: usize) -> &[f64] {
        &self.nodes[id].adjoint
    }

    fn push(&mut self, op: OpKind, inputs: Vec<usize>, rows: usize, cols: usize, value: Vec<f64>) -> usize {
        debug_assert_eq!(value.len(), rows * cols);
        self.nodes.push(Node { op, inputs, rows, cols, value, adjoint: Vec::new() });
        self.nodes.len() - 1
    }

    pub fn leaf(&mut self, rows: usize, cols: usize, data: Vec<f64>, trainable: bool) -> usize {
        assert_eq!(data.len(), rows * cols, "leaf data length mismatch");
        self.push(OpKind::Leaf { trainable }, vec![], rows, cols, data)
    }

    pub fn matmul_t(&mut self, x: usize, w: usize) -> usize {
        let (n, k) = self.shape(x);
        let (m, k2) = self.shape(w);
        assert_eq!(k, k2, "matmul_t inner dimensions");
        let mut out = vec![0.0; n * m];
        {
            let xv = &self.nodes[x].value;
            let wv = &self.nodes[w].value;
            for i in 0..n {
                let xrow = &xv[i * k..(i + 1) * k];
                let orow = &mut out[i * m..(i + 1) * m];
                for (j, o) in orow.iter_mut().enumerate() {
                    let wrow = &wv[j * k..(j + 1) * k];
                    let mut acc = 0.0;
                    for (a, b) in xrow.iter().zip(wrow) {
                        acc += a * b;
                    }
                    *o = acc;
                }
            }
        }
        self.push(OpKind::MatMulT, vec![x, w], n, m, out)
    }

    pub fn add(&mut self, a: usize, b: usize) -> usize {
        let (n, m) = self.shape(a);
        assert_eq!(self.shape(b), (n, m), "add shapes");
        let value = self.nodes[a]
            .value
            .iter()
            .zip(&self.nodes[b].value)
            .map(|(x, y)| x + y)
            .collect();
        self.push(OpKind::Add, vec![a, b], n, m, value)
    }

    pub fn add_row(&mut self, x: usize, row: usize) -> usize {
        let (n, m) = self.shape(x);
        assert_eq!(self.shape(row), (1, m), "add_row bias shape");
        let mut value = self.nodes[x].value.clone();
        let rv = &self.nodes[row].value;
        for chunk in value.chunks_exact_mut(m) {
            for (v, b) in chunk.iter_mut().zip(rv) {
                *v += b;
            }
        }
        self.push(OpKind::AddRow, vec![x, row], n, m, value)
    }

    pub fn gather(&mut self, table: usize, indices: Vec<usize>) -> usize {
        let (rows, m) = self.shape(table);
        let n = indices.len();
        let mut value = Vec::with_capacity(n * m);
        for &idx in &indices {
            assert!(idx < rows, "gather index {idx} out of {rows}");
            value.extend_from_slice(&self.nodes[table].value[idx * m..(idx + 1) * m]);
        }
        self.push(OpKind::Gather { indices }, vec![table], n, m, value)
    }

    pub fn silu(&mut self, x: usize) -> usize {
        let (n, m) = self.shape(x);
        let value = self.nodes[x].value.iter().map(|&v| v * sigmoid(v)).collect();
        self.push(OpKind::Silu, vec![x], n, m, value)
    }

    pub fn sub(&mut self, a: usize, b: usize) -> usize {
        let (n, m) = self.shape(a);
        assert_eq!(self.shape(b), (n, m), "sub shapes");
        let value = self.nodes[a]
            .value
            .iter()
            .zip(&self.nodes[b].value)
            .map(|(x, y)| x - y)
            .collect();
        self.push(OpKind::Sub, vec![a, b], n, m, value)
    }

    pub fn scale(&mut self, x: usize, factor: f64) -> usize {
        let (n, m) = self.shape(x);
        let value = self.nodes[x].value.iter().map(|v| v * factor).collect();
        self.push(OpKind::Scale { factor }, vec![x], n, m, value)
    }

    pub fn weighted_square_mean(&mut self, x: usize, weights: Vec<f64>) -> usize {
        let (n, _m) = self.shape(x);
        assert_eq!(weights.len(), n, "one weight per row");
        let mut acc = 0.0;
        for (i, row) in self.nodes[x].value.chunks_exact(self.nodes[x].cols.max(1)).enumerate() {
            let mut s = 0.0;
            for v in row {
                s += v * v;
            }
            acc += weights[i] * s;
        }
        let value = vec![acc / n as f64];
        self.push(OpKind::WeightedSquareMean { weights }, vec![x], 1, 1, value)
    }

    /// Propagate adjoints from a scalar loss node back to every leaf.
    pub fn backward(&mut self, loss: usize) -> Result<()> {
        if self.shape(loss) != (1, 1) {
            return Err(SgError::Domain(format!(
                "backward requires a scalar loss node, got shape {:?}",
                self.shape(loss)
            )));
        }
        for node in &mut self.nodes {
            node.adjoint = vec![0.0; node.value.len()];
        }
        self.nodes[loss].adjoint[0] = 1.0;
        for id in (0..self.nodes.len()).rev() {
            // split off the node being processed so inputs can be written
            let (before, rest) = self.nodes.split_at_mut(id);
            let node = &rest[0];
            if node.adjoint.iter().all(|&a| a == 0.0) {
                continue;
            }
            match &node.op {
                OpKind::Leaf { .. } => {}
                OpKind::MatMulT => {
                    let x = node.inputs[0];
                    let w = node.inputs[1];
                    assert_ne!(x, w, "matmul_t with a shared input is unsupported");
                    let (n, m) = (node.rows, node.cols);
                    let k = before[x].cols;
                    let (xn, wn) = if x < w {
                        let (lo, hi) = before.split_at_mut(w);
                        (&mut lo[x], &mut hi[0])
                    } else {
                        let (lo, hi) = before.split_at_mut(x);
                        (&mut hi[0], &mut lo[w])
                    };
                    // dX += dY W
                    for i in 0..n {
                        let drow = &node.adjoint[i * m..(i + 1) * m];
                        let xgrad = &mut xn.adjoint[i * k..(i + 1) * k];
                        for (j, &d) in drow.iter().enumerate() {
                            if d != 0.0 {
                                for (g, wv) in xgrad.iter_mut().zip(&wn.value[j * k..(j + 1) * k]) {
                                    *g += d * wv;
                                }
                            }
                        }
                    }
                    // dW += dY^T X
                    for i in 0..n {
                        let drow = &node.adjoint[i * m..(i + 1) * m];
                        let xrow = &xn.value[i * k..(i + 1) * k];
                        for (j, &d) in drow.iter().enumerate() {
                            if d != 0.0 {
                                for (g, xv) in
                                    wn.adjoint[j * k..(j + 1) * k].iter_mut().zip(xrow)
                                {
                                    *g += d * xv;
                                }
                            }
                        }
                    }
                }
                OpKind::Add => {
                    let (a, b) = (node.inputs[0], node.inputs[1]);
                    if a == b {
                        for (g, d) in before[a].adjoint.iter_mut().zip(&node.adjoint) {
                            *g += 2.0 * d;
                        }
                    } else {
                        let (first, second) = if a < b {
                            let (la, lb) = before.split_at_mut(b);
                            (&mut la[a], &mut lb[0])
                        } else {
                            let (lb, la) = before.split_at_mut(a);
                            (&mut la[0], &mut lb[b])
                        };
                        for (g, d) in first.adjoint.iter_mut().zip(&node.adjoint) {
                            *g += d;
                        }
                        for (g, d) in second.adjoint.iter_mut().zip(&node.adjoint) {
                            *g += d;
                        }
                    }
                }
                OpKind::AddRow => {
                    let (x, row) = (node.inputs[0], node.inputs[1]);
                    let m = node.cols;
                    for chunk in node.adjoint.chunks_exact(m) {
                        for (g, d) in before[row].adjoint.iter_mut().zip(chunk) {
                            *g += d;
                        }
                    }
                    for (g, d) in before[x].adjoint.iter_mut().zip(&node.adjoint) {
                        *g += d;
                    }
                }
                OpKind::Gather { indices } => {
                    let table = node.inputs[0];
                    let m = node.cols;
                    let dt = &mut before[table].adjoint;
                    for (i, &idx) in indices.iter().enumerate() {
                        let drow = &node.adjoint[i * m..(i + 1) * m];
                        for (g, d) in dt[idx * m..(idx + 1) * m].iter_mut().zip(drow) {
                            *g += d;
                        }
                    }
                }
                OpKind::Silu => {
                    let x = node.inputs[0];
                    let Node { value, adjoint, .. } = &mut before[x];
                    for ((g, d), &v) in adjoint.iter_mut().zip(&node.adjoint).zip(value.iter()) {
                        let s = sigmoid(v);
                        *g += d * s * (1.0 + v * (1.0 - s));
                    }
                }
                OpKind::Sub => {
                    let (a, b) = (node.inputs[0], node.inputs[1]);
                    if a == b {
                        // derivative cancels
                    } else {
                        let (first, second, a_first) = if a < b {
                            let (la, lb) = before.split_at_mut(b);
                            (&mut la[a], &mut lb[0], true)
                        } else {
                            let (lb, la) = before.split_at_mut(a);
                            (&mut la[0], &mut lb[b], false)
                        };
                        let (da, db) = if a_first { (first, second) } else { (second, first) };
                        for (g, d) in da.adjoint.iter_mut().zip(&node.adjoint) {
                            *g += d;
                        }
                        for (g, d) in db.adjoint.iter_mut().zip(&node.adjoint) {
                            *g -= d;
                        }
                    }
                }
                OpKind::Scale { factor } => {
                    let x = node.inputs[0];
                    let f = *factor;
                    for (g, d) in before[x].adjoint.iter_mut().zip(&node.adjoint) {
                        *g += f * d;
                    }
                }
                OpKind::WeightedSquareMean { weights } => {
                    let x = node.inputs[0];
                    let d = node.adjoint[0];
                    let Node { value, adjoint, rows, cols, .. } = &mut before[x];
                    let n = *rows as f64;
                    let m = *cols;
                    for (i, w) in weights.iter().enumerate() {
                        let scale = d * 2.0 * w / n;
                        for (g, v) in adjoint[i * m..(i + 1) * m]
                            .iter_mut()
                            .zip(&value[i * m..(i + 1) * m])
                        {
                            *g += scale * v;
                        }
                    }
                }
            }
        }
        for (id, node) in self.nodes.iter().enumerate() {
            if matches!(node.op, OpKind::Leaf { trainable: true })
                && node.adjoint.iter().any(|a| !a.is_finite())
            {
                return Err(SgError::NonFinite(format!(
                    "non-finite adjoint on parameter node {id}"
                )));
            }
        }
        Ok(())
    }
}
