//! Tape-based reverse-mode differentiation over small dense matrices.
//!
//! A [`Graph`] records every operation eagerly (values are computed as nodes
//! are created) and [`Graph::backward`] walks the tape in reverse. Parameters
//! live in a shared, read-only [`ParamStore`]; a graph only borrows it, so
//! several graphs can run on different threads against the same parameters
//! and their [`Gradients`] are summed afterwards.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major dense matrix. Vectors are `1 x n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(rows * cols, data.len(), "tensor data does not match shape");
        Tensor { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Tensor::new(rows, cols, vec![0.0; rows * cols])
    }

    pub fn row(data: Vec<f64>) -> Self {
        Tensor::new(1, data.len(), data)
    }

    pub fn scalar(value: f64) -> Self {
        Tensor::new(1, 1, vec![value])
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn item(&self) -> f64 {
        assert_eq!(self.data.len(), 1, "item() on a non-scalar tensor");
        self.data[0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamId(pub usize);

/// Named parameter tensors.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParamStore {
    names: Vec<String>,
    tensors: Vec<Tensor>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: impl Into<String>, tensor: Tensor) -> ParamId {
        let name = name.into();
        assert!(self.id_of(&name).is_none(), "duplicate parameter {name}");
        self.names.push(name);
        self.tensors.push(tensor);
        ParamId(self.tensors.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn id_of(&self, name: &str) -> Option<ParamId> {
        self.names.iter().position(|n| n == name).map(ParamId)
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.names[id.0]
    }

    pub fn get(&self, id: ParamId) -> &Tensor {
        &self.tensors[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Tensor {
        &mut self.tensors[id.0]
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> {
        (0..self.tensors.len()).map(ParamId)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.names.iter().map(String::as_str).zip(&self.tensors)
    }

    pub fn num_scalars(&self) -> usize {
        self.tensors.iter().map(Tensor::len).sum()
    }

    pub fn all_finite(&self) -> bool {
        self.tensors
            .iter()
            .all(|t| t.data.iter().all(|v| v.is_finite()))
    }
}

/// Dense gradients, one tensor per parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    tensors: Vec<Tensor>,
}

impl Gradients {
    pub fn zeros_like(params: &ParamStore) -> Self {
        Gradients {
            tensors: params
                .tensors
                .iter()
                .map(|t| Tensor::zeros(t.rows, t.cols))
                .collect(),
        }
    }

    pub fn get(&self, id: ParamId) -> &Tensor {
        &self.tensors[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Tensor {
        &mut self.tensors[id.0]
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    pub fn all_finite(&self) -> bool {
        self.tensors.iter().all(|t| t.data.iter().all(|x| x.is_finite()))
    }

    pub fn add_assign(&mut self, other: &Gradients) {
        for (a, b) in self.tensors.iter_mut().zip(&other.tensors) {
            for (x, y) in a.data.iter_mut().zip(&b.data) {
                *x += y;
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for t in &mut self.tensors {
            for x in &mut t.data {
                *x *= factor;
            }
        }
    }

    pub fn l2_norm(&self) -> f64 {
        self.tensors
            .iter()
            .flat_map(|t| &t.data)
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeId(usize);

#[derive(Debug)]
enum Op {
    Input,
    Param(ParamId),
    Embedding { param: ParamId, rows: Vec<usize> },
    MatMul(NodeId, NodeId),
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    Mul(NodeId, NodeId),
    MulScalar(NodeId, NodeId),
    Affine(NodeId, f64),
    Tanh(NodeId),
    Sigmoid(NodeId),
    Softmax(NodeId),
    Log { x: NodeId, floor: f64 },
    Concat(Vec<NodeId>),
    Stack(Vec<NodeId>),
    Transpose(NodeId),
    SliceCols { x: NodeId, start: usize },
    Gather { x: NodeId, indices: Vec<usize> },
    ScatterAdd { x: NodeId, indices: Vec<usize> },
    Sum(NodeId),
}

#[derive(Debug)]
struct Node {
    op: Op,
    // `None` for parameter nodes, whose value lives in the store.
    value: Option<Tensor>,
    needs_grad: bool,
}

/// A recorded computation over a borrowed parameter store.
pub struct Graph<'p> {
    params: &'p ParamStore,
    nodes: Vec<Node>,
    param_nodes: Vec<Option<NodeId>>,
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn softmax_rows(x: &Tensor) -> Tensor {
    let mut out = x.data.clone();
    for row in out.chunks_mut(x.cols) {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    Tensor::new(x.rows, x.cols, out)
}

fn accumulate(grads: &mut [Option<Vec<f64>>], id: NodeId, len: usize) -> &mut Vec<f64> {
    grads[id.0].get_or_insert_with(|| vec![0.0; len])
}

impl<'p> Graph<'p> {
    pub fn new(params: &'p ParamStore) -> Self {
        Graph {
            params,
            nodes: Vec::with_capacity(256),
            param_nodes: vec![None; params.len()],
        }
    }

    pub fn params(&self) -> &'p ParamStore {
        self.params
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, id: NodeId) -> &Tensor {
        let node = &self.nodes[id.0];
        match (&node.value, &node.op) {
            (Some(v), _) => v,
            (None, Op::Param(p)) => self.params.get(*p),
            _ => unreachable!("node without a value"),
        }
    }

    fn needs(&self, id: NodeId) -> bool {
        self.nodes[id.0].needs_grad
    }

    fn push(&mut self, op: Op, value: Tensor, needs_grad: bool) -> NodeId {
        self.nodes.push(Node {
            op,
            value: Some(value),
            needs_grad,
        });
        NodeId(self.nodes.len() - 1)
    }

    /// A constant input (no gradient flows into it).
    pub fn input(&mut self, value: Tensor) -> NodeId {
        self.push(Op::Input, value, false)
    }

    pub fn param(&mut self, id: ParamId) -> NodeId {
        if let Some(node) = self.param_nodes[id.0] {
            return node;
        }
        self.nodes.push(Node {
            op: Op::Param(id),
            value: None,
            needs_grad: true,
        });
        let node = NodeId(self.nodes.len() - 1);
        self.param_nodes[id.0] = Some(node);
        node
    }

    /// Rows of a parameter matrix, stacked in the given order.
    pub fn embedding(&mut self, param: ParamId, rows: &[usize]) -> NodeId {
        let table = self.params.get(param);
        let dim = table.cols;
        let mut data = Vec::with_capacity(rows.len() * dim);
        for &r in rows {
            assert!(r < table.rows, "embedding row {r} out of range");
            data.extend_from_slice(&table.data[r * dim..(r + 1) * dim]);
        }
        let value = Tensor::new(rows.len(), dim, data);
        self.push(
            Op::Embedding {
                param,
                rows: rows.to_vec(),
            },
            value,
            true,
        )
    }

    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let (x, y) = (self.value(a), self.value(b));
        assert_eq!(x.cols, y.rows, "matmul shape mismatch {:?} x {:?}", x.shape(), y.shape());
        let (m, k, n) = (x.rows, x.cols, y.cols);
        let mut out = vec![0.0; m * n];
        for i in 0..m {
            let out_row = &mut out[i * n..(i + 1) * n];
            for l in 0..k {
                let xv = x.data[i * k + l];
                if xv == 0.0 {
                    continue;
                }
                let y_row = &y.data[l * n..(l + 1) * n];
                for (o, w) in out_row.iter_mut().zip(y_row) {
                    *o += xv * w;
                }
            }
        }
        let needs = self.needs(a) || self.needs(b);
        self.push(Op::MatMul(a, b), Tensor::new(m, n, out), needs)
    }

    fn zip_with(&mut self, a: NodeId, b: NodeId, op: Op, f: impl Fn(f64, f64) -> f64) -> NodeId {
        let (x, y) = (self.value(a), self.value(b));
        assert_eq!(x.shape(), y.shape(), "elementwise shape mismatch");
        let data = x.data.iter().zip(&y.data).map(|(p, q)| f(*p, *q)).collect();
        let value = Tensor::new(x.rows, x.cols, data);
        let needs = self.needs(a) || self.needs(b);
        self.push(op, value, needs)
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.zip_with(a, b, Op::Add(a, b), |p, q| p + q)
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.zip_with(a, b, Op::Sub(a, b), |p, q| p - q)
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.zip_with(a, b, Op::Mul(a, b), |p, q| p * q)
    }

    /// `a * s` where `s` is a 1x1 node.
    pub fn mul_scalar(&mut self, a: NodeId, s: NodeId) -> NodeId {
        let factor = self.value(s).item();
        let x = self.value(a);
        let value = Tensor::new(x.rows, x.cols, x.data.iter().map(|v| v * factor).collect());
        let needs = self.needs(a) || self.needs(s);
        self.push(Op::MulScalar(a, s), value, needs)
    }

    /// `scale * a + shift`, elementwise.
    pub fn affine(&mut self, a: NodeId, scale: f64, shift: f64) -> NodeId {
        let x = self.value(a);
        let value = Tensor::new(x.rows, x.cols, x.data.iter().map(|v| scale * v + shift).collect());
        let needs = self.needs(a);
        self.push(Op::Affine(a, scale), value, needs)
    }

    pub fn scale(&mut self, a: NodeId, factor: f64) -> NodeId {
        self.affine(a, factor, 0.0)
    }

    fn map(&mut self, a: NodeId, op: Op, f: impl Fn(f64) -> f64) -> NodeId {
        let x = self.value(a);
        let value = Tensor::new(x.rows, x.cols, x.data.iter().map(|v| f(*v)).collect());
        let needs = self.needs(a);
        self.push(op, value, needs)
    }

    pub fn tanh(&mut self, a: NodeId) -> NodeId {
        self.map(a, Op::Tanh(a), f64::tanh)
    }

    pub fn sigmoid(&mut self, a: NodeId) -> NodeId {
        self.map(a, Op::Sigmoid(a), sigmoid)
    }

    /// Natural log with inputs clamped below at `floor`; the clamped region
    /// has zero gradient.
    pub fn log(&mut self, a: NodeId, floor: f64) -> NodeId {
        self.map(a, Op::Log { x: a, floor }, move |v| v.max(floor).ln())
    }

    /// Row-wise softmax.
    pub fn softmax(&mut self, a: NodeId) -> NodeId {
        let value = softmax_rows(self.value(a));
        let needs = self.needs(a);
        self.push(Op::Softmax(a), value, needs)
    }

    /// Concatenation along columns.
    pub fn concat(&mut self, parts: &[NodeId]) -> NodeId {
        let rows = self.value(parts[0]).rows;
        let cols: usize = parts.iter().map(|&p| self.value(p).cols).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for &p in parts {
                let t = self.value(p);
                assert_eq!(t.rows, rows, "concat row mismatch");
                data.extend_from_slice(&t.data[r * t.cols..(r + 1) * t.cols]);
            }
        }
        let needs = parts.iter().any(|&p| self.needs(p));
        self.push(Op::Concat(parts.to_vec()), Tensor::new(rows, cols, data), needs)
    }

    /// Concatenation along rows.
    pub fn stack(&mut self, parts: &[NodeId]) -> NodeId {
        let cols = self.value(parts[0]).cols;
        let mut data = Vec::new();
        let mut rows = 0;
        for &p in parts {
            let t = self.value(p);
            assert_eq!(t.cols, cols, "stack column mismatch");
            data.extend_from_slice(&t.data);
            rows += t.rows;
        }
        let needs = parts.iter().any(|&p| self.needs(p));
        self.push(Op::Stack(parts.to_vec()), Tensor::new(rows, cols, data), needs)
    }

    pub fn transpose(&mut self, a: NodeId) -> NodeId {
        let x = self.value(a);
        let mut data = vec![0.0; x.len()];
        for i in 0..x.rows {
            for j in 0..x.cols {
                data[j * x.rows + i] = x.data[i * x.cols + j];
            }
        }
        let value = Tensor::new(x.cols, x.rows, data);
        let needs = self.needs(a);
        self.push(Op::Transpose(a), value, needs)
    }

    /// Columns `start..start + len`.
    pub fn slice_cols(&mut self, a: NodeId, start: usize, len: usize) -> NodeId {
        let x = self.value(a);
        assert!(start + len <= x.cols, "column slice out of range");
        let mut data = Vec::with_capacity(x.rows * len);
        for r in 0..x.rows {
            data.extend_from_slice(&x.data[r * x.cols + start..r * x.cols + start + len]);
        }
        let value = Tensor::new(x.rows, len, data);
        let needs = self.needs(a);
        self.push(Op::SliceCols { x: a, start }, value, needs)
    }

    /// Picks flat elements into a `1 x k` row.
    pub fn gather(&mut self, a: NodeId, indices: &[usize]) -> NodeId {
        let x = self.value(a);
        let value = Tensor::row(indices.iter().map(|&i| x.data[i]).collect());
        let needs = self.needs(a);
        self.push(
            Op::Gather {
                x: a,
                indices: indices.to_vec(),
            },
            value,
            needs,
        )
    }

    /// Adds element `k` of `a` into slot `indices[k]` of a zero `1 x size`
    /// row; repeated indices accumulate.
    pub fn scatter_add(&mut self, a: NodeId, indices: &[usize], size: usize) -> NodeId {
        let x = self.value(a);
        assert_eq!(x.len(), indices.len(), "scatter index count mismatch");
        let mut data = vec![0.0; size];
        for (v, &i) in x.data.iter().zip(indices) {
            data[i] += v;
        }
        let needs = self.needs(a);
        self.push(
            Op::ScatterAdd {
                x: a,
                indices: indices.to_vec(),
            },
            Tensor::row(data),
            needs,
        )
    }

    pub fn sum(&mut self, a: NodeId) -> NodeId {
        let total = self.value(a).data.iter().sum();
        let needs = self.needs(a);
        self.push(Op::Sum(a), Tensor::scalar(total), needs)
    }

    /// Gradients of the scalar `loss` with respect to every parameter.
    pub fn backward(&self, loss: NodeId) -> Result<Gradients> {
        let shape = self.value(loss).shape();
        if shape != (1, 1) {
            return Err(Error::NonScalarLoss {
                rows: shape.0,
                cols: shape.1,
            });
        }
        let mut param_grads = Gradients::zeros_like(self.params);
        let mut grads: Vec<Option<Vec<f64>>> = vec![None; loss.0 + 1];
        grads[loss.0] = Some(vec![1.0]);

        for i in (0..=loss.0).rev() {
            let Some(g) = grads[i].take() else { continue };
            let node = &self.nodes[i];
            if !node.needs_grad {
                continue;
            }
            let out = self.value(NodeId(i));
            match &node.op {
                Op::Input => {}
                Op::Param(p) => {
                    for (acc, v) in param_grads.tensors[p.0].data.iter_mut().zip(&g) {
                        *acc += v;
                    }
                }
                Op::Embedding { param, rows } => {
                    let target = &mut param_grads.tensors[param.0];
                    let dim = target.cols;
                    for (k, &r) in rows.iter().enumerate() {
                        let dst = &mut target.data[r * dim..(r + 1) * dim];
                        for (acc, v) in dst.iter_mut().zip(&g[k * dim..(k + 1) * dim]) {
                            *acc += v;
                        }
                    }
                }
                Op::MatMul(a, b) => {
                    let (x, y) = (self.value(*a), self.value(*b));
                    let (m, k, n) = (x.rows, x.cols, y.cols);
                    if self.needs(*a) {
                        let da = accumulate(&mut grads, *a, m * k);
                        for r in 0..m {
                            let g_row = &g[r * n..(r + 1) * n];
                            for l in 0..k {
                                let y_row = &y.data[l * n..(l + 1) * n];
                                da[r * k + l] += g_row.iter().zip(y_row).map(|(p, q)| p * q).sum::<f64>();
                            }
                        }
                    }
                    if self.needs(*b) {
                        let db = accumulate(&mut grads, *b, k * n);
                        for r in 0..m {
                            let g_row = &g[r * n..(r + 1) * n];
                            for l in 0..k {
                                let xv = x.data[r * k + l];
                                if xv == 0.0 {
                                    continue;
                                }
                                for (acc, gv) in db[l * n..(l + 1) * n].iter_mut().zip(g_row) {
                                    *acc += xv * gv;
                                }
                            }
                        }
                    }
                }
                Op::Add(a, b) | Op::Sub(a, b) => {
                    let sign = if matches!(node.op, Op::Sub(..)) { -1.0 } else { 1.0 };
                    if self.needs(*a) {
                        for (acc, v) in accumulate(&mut grads, *a, g.len()).iter_mut().zip(&g) {
                            *acc += v;
                        }
                    }
                    if self.needs(*b) {
                        for (acc, v) in accumulate(&mut grads, *b, g.len()).iter_mut().zip(&g) {
                            *acc += sign * v;
                        }
                    }
                }
                Op::Mul(a, b) => {
                    let (x, y) = (self.value(*a), self.value(*b));
                    if self.needs(*a) {
                        let da = accumulate(&mut grads, *a, g.len());
                        for ((acc, v), w) in da.iter_mut().zip(&g).zip(&y.data) {
                            *acc += v * w;
                        }
                    }
                    if self.needs(*b) {
                        let db = accumulate(&mut grads, *b, g.len());
                        for ((acc, v), w) in db.iter_mut().zip(&g).zip(&x.data) {
                            *acc += v * w;
                        }
                    }
                }
                Op::MulScalar(a, s) => {
                    let factor = self.value(*s).item();
                    let x = self.value(*a);
                    if self.needs(*a) {
                        for (acc, v) in accumulate(&mut grads, *a, g.len()).iter_mut().zip(&g) {
                            *acc += v * factor;
                        }
                    }
                    if self.needs(*s) {
                        let ds: f64 = g.iter().zip(&x.data).map(|(v, w)| v * w).sum();
                        accumulate(&mut grads, *s, 1)[0] += ds;
                    }
                }
                Op::Affine(a, scale) => {
                    for (acc, v) in accumulate(&mut grads, *a, g.len()).iter_mut().zip(&g) {
                        *acc += scale * v;
                    }
                }
                Op::Tanh(a) => {
                    let da = accumulate(&mut grads, *a, g.len());
                    for ((acc, v), y) in da.iter_mut().zip(&g).zip(&out.data) {
                        *acc += v * (1.0 - y * y);
                    }
                }
                Op::Sigmoid(a) => {
                    let da = accumulate(&mut grads, *a, g.len());
                    for ((acc, v), y) in da.iter_mut().zip(&g).zip(&out.data) {
                        *acc += v * y * (1.0 - y);
                    }
                }
                Op::Softmax(a) => {
                    let cols = out.cols;
                    let da = accumulate(&mut grads, *a, g.len());
                    for r in 0..out.rows {
                        let span = r * cols..(r + 1) * cols;
                        let y = &out.data[span.clone()];
                        let gr = &g[span.clone()];
                        let dot: f64 = gr.iter().zip(y).map(|(p, q)| p * q).sum();
                        for ((acc, gv), yv) in da[span].iter_mut().zip(gr).zip(y) {
                            *acc += yv * (gv - dot);
                        }
                    }
                }
                Op::Log { x, floor } => {
                    let xv = self.value(*x);
                    let da = accumulate(&mut grads, *x, g.len());
                    for ((acc, v), input) in da.iter_mut().zip(&g).zip(&xv.data) {
                        if *input > *floor {
                            *acc += v / input;
                        }
                    }
                }
                Op::Concat(parts) => {
                    let rows = out.rows;
                    let total = out.cols;
                    let mut offset = 0;
                    for &p in parts {
                        let cols = self.value(p).cols;
                        if self.needs(p) {
                            let dp = accumulate(&mut grads, p, rows * cols);
                            for r in 0..rows {
                                let src = &g[r * total + offset..r * total + offset + cols];
                                for (acc, v) in dp[r * cols..(r + 1) * cols].iter_mut().zip(src) {
                                    *acc += v;
                                }
                            }
                        }
                        offset += cols;
                    }
                }
                Op::Stack(parts) => {
                    let mut offset = 0;
                    for &p in parts {
                        let len = self.value(p).len();
                        if self.needs(p) {
                            let dp = accumulate(&mut grads, p, len);
                            for (acc, v) in dp.iter_mut().zip(&g[offset..offset + len]) {
                                *acc += v;
                            }
                        }
                        offset += len;
                    }
                }
                Op::Transpose(a) => {
                    // out is (c x r); input is (r x c)
                    let (r, c) = (out.cols, out.rows);
                    let da = accumulate(&mut grads, *a, g.len());
                    for i in 0..r {
                        for j in 0..c {
                            da[i * c + j] += g[j * r + i];
                        }
                    }
                }
                Op::SliceCols { x, start } => {
                    let src_cols = self.value(*x).cols;
                    let len = out.cols;
                    let da = accumulate(&mut grads, *x, out.rows * src_cols);
                    for r in 0..out.rows {
                        let dst = &mut da[r * src_cols + start..r * src_cols + start + len];
                        for (acc, v) in dst.iter_mut().zip(&g[r * len..(r + 1) * len]) {
                            *acc += v;
                        }
                    }
                }
                Op::Gather { x, indices } => {
                    let len = self.value(*x).len();
                    let da = accumulate(&mut grads, *x, len);
                    for (v, &i) in g.iter().zip(indices) {
                        da[i] += v;
                    }
                }
                Op::ScatterAdd { x, indices } => {
                    let da = accumulate(&mut grads, *x, indices.len());
                    for (acc, &i) in da.iter_mut().zip(indices) {
                        *acc += g[i];
                    }
                }
                Op::Sum(a) => {
                    let len = self.value(*a).len();
                    for acc in accumulate(&mut grads, *a, len).iter_mut() {
                        *acc += g[0];
                    }
                }
            }
        }
        Ok(param_grads)
    }
}
