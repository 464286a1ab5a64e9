//! Reverse-mode automatic differentiation over `f64` vectors.
//!
//! A [`Tape`] records a forward computation as a flat list of nodes; calling
//! [`Tape::backward`] propagates adjoints in reverse and accumulates parameter
//! gradients into a flat buffer aligned with [`ParamSet::data`]. Scalars are
//! represented as length-1 vectors. Every training and generation path in this
//! crate goes through the tape, so there is a single forward definition to test.

use crate::distributions::{bessel_ratio, vmf_kl_scalar};
use serde::{Deserialize, Serialize};

/// Index of a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeId(usize);

/// Index of a parameter slot in a [`ParamSet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamId(pub(crate) usize);

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SlotMeta {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub offset: usize,
}

/// A named collection of parameter matrices stored in one flat buffer.
///
/// Matrices are row-major with shape (rows, cols); vectors use cols = 1.
#[derive(Debug, Clone)]
pub struct ParamSet {
    slots: Vec<SlotMeta>,
    data: Vec<f64>,
}

impl ParamSet {
    pub fn new() -> Self {
        ParamSet { slots: Vec::new(), data: Vec::new() }
    }

    pub fn add_slot(&mut self, name: &str, rows: usize, cols: usize) -> ParamId {
        let offset = self.data.len();
        self.slots.push(SlotMeta { name: name.to_string(), rows, cols, offset });
        self.data.resize(offset + rows * cols, 0.0);
        ParamId(self.slots.len() - 1)
    }

    pub fn slot_meta(&self, id: ParamId) -> &SlotMeta {
        &self.slots[id.0]
    }

    pub fn slots(&self) -> &[SlotMeta] {
        &self.slots
    }

    pub fn slot(&self, id: ParamId) -> &[f64] {
        let m = &self.slots[id.0];
        &self.data[m.offset..m.offset + m.rows * m.cols]
    }

    pub fn slot_mut(&mut self, id: ParamId) -> &mut [f64] {
        let m = self.slots[id.0].clone();
        &mut self.data[m.offset..m.offset + m.rows * m.cols]
    }

    pub fn row(&self, id: ParamId, r: usize) -> &[f64] {
        let m = &self.slots[id.0];
        debug_assert!(r < m.rows);
        let start = m.offset + r * m.cols;
        &self.data[start..start + m.cols]
    }

    pub fn row_mut(&mut self, id: ParamId, r: usize) -> &mut [f64] {
        let m = self.slots[id.0].clone();
        debug_assert!(r < m.rows);
        let start = m.offset + r * m.cols;
        &mut self.data[start..start + m.cols]
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn find(&self, name: &str) -> Option<ParamId> {
        self.slots.iter().position(|s| s.name == name).map(ParamId)
    }
}

impl Default for ParamSet {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    Row { table: ParamId, row: usize },
    /// y = W x (+ b), W row-major (rows x cols), len(x) = cols.
    Linear { w: ParamId, b: Option<ParamId>, x: NodeId },
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    Mul(NodeId, NodeId),
    Div(NodeId, NodeId),
    Scale { x: NodeId, c: f64 },
    Offset(NodeId),
    Concat(Vec<NodeId>),
    Slice { x: NodeId, start: usize },
    SumVecs(Vec<NodeId>),
    Tanh(NodeId),
    Sigmoid(NodeId),
    Softplus(NodeId),
    Exp(NodeId),
    Sqrt(NodeId),
    Clamp { x: NodeId, lo: f64, hi: f64 },
    Sum(NodeId),
    Dot(NodeId, NodeId),
    /// Broadcast multiply: y = x * s, s a length-1 node.
    MulScalar { x: NodeId, s: NodeId },
    /// y = x / ||x||_2.
    Normalize(NodeId),
    Softmax(NodeId),
    /// Scalar: -log softmax(x)[target].
    LogSoftmaxNll { x: NodeId, target: usize },
    /// Scalar: KL(vMF(., kappa) || uniform on S^{dim-1}).
    VmfKl { kappa: NodeId, dim: usize },
}

struct Node {
    value: Vec<f64>,
    op: Op,
}

pub struct Tape<'p> {
    params: &'p ParamSet,
    nodes: Vec<Node>,
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    m + xs.iter().map(|&x| (x - m).exp()).sum::<f64>().ln()
}

impl<'p> Tape<'p> {
    pub fn new(params: &'p ParamSet) -> Self {
        Tape { params, nodes: Vec::new() }
    }

    fn push(&mut self, value: Vec<f64>, op: Op) -> NodeId {
        self.nodes.push(Node { value, op });
        NodeId(self.nodes.len() - 1)
    }

    pub fn value(&self, id: NodeId) -> &[f64] {
        &self.nodes[id.0].value
    }

    pub fn scalar(&self, id: NodeId) -> f64 {
        debug_assert_eq!(self.nodes[id.0].value.len(), 1);
        self.nodes[id.0].value[0]
    }

    pub fn len(&self, id: NodeId) -> usize {
        self.nodes[id.0].value.len()
    }

    pub fn constant(&mut self, v: Vec<f64>) -> NodeId {
        self.push(v, Op::Leaf)
    }

    pub fn constant_scalar(&mut self, v: f64) -> NodeId {
        self.push(vec![v], Op::Leaf)
    }

    pub fn row(&mut self, table: ParamId, row: usize) -> NodeId {
        let v = self.params.row(table, row).to_vec();
        self.push(v, Op::Row { table, row })
    }

    pub fn linear(&mut self, w: ParamId, b: Option<ParamId>, x: NodeId) -> NodeId {
        let meta = self.params.slot_meta(w);
        let (rows, cols) = (meta.rows, meta.cols);
        debug_assert_eq!(self.len(x), cols, "linear: input dim mismatch for {}", meta.name);
        let wm = self.params.slot(w);
        let xv = &self.nodes[x.0].value;
        let mut out = match b {
            Some(bid) => self.params.slot(bid).to_vec(),
            None => vec![0.0; rows],
        };
        for r in 0..rows {
            let wrow = &wm[r * cols..(r + 1) * cols];
            let mut acc = 0.0;
            for (wv, xv) in wrow.iter().zip(xv.iter()) {
                acc += wv * xv;
            }
            out[r] += acc;
        }
        self.push(out, Op::Linear { w, b, x })
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        debug_assert_eq!(self.len(a), self.len(b));
        let v = self.nodes[a.0]
            .value
            .iter()
            .zip(self.nodes[b.0].value.iter())
            .map(|(x, y)| x + y)
            .collect();
        self.push(v, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> NodeId {
        debug_assert_eq!(self.len(a), self.len(b));
        let v = self.nodes[a.0]
            .value
            .iter()
            .zip(self.nodes[b.0].value.iter())
            .map(|(x, y)| x - y)
            .collect();
        self.push(v, Op::Sub(a, b))
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        debug_assert_eq!(self.len(a), self.len(b));
        let v = self.nodes[a.0]
            .value
            .iter()
            .zip(self.nodes[b.0].value.iter())
            .map(|(x, y)| x * y)
            .collect();
        self.push(v, Op::Mul(a, b))
    }

    pub fn div(&mut self, a: NodeId, b: NodeId) -> NodeId {
        debug_assert_eq!(self.len(a), self.len(b));
        let v = self.nodes[a.0]
            .value
            .iter()
            .zip(self.nodes[b.0].value.iter())
            .map(|(x, y)| x / y)
            .collect();
        self.push(v, Op::Div(a, b))
    }

    pub fn scale(&mut self, x: NodeId, c: f64) -> NodeId {
        let v = self.nodes[x.0].value.iter().map(|a| a * c).collect();
        self.push(v, Op::Scale { x, c })
    }

    pub fn offset(&mut self, x: NodeId, c: f64) -> NodeId {
        let v = self.nodes[x.0].value.iter().map(|a| a + c).collect();
        self.push(v, Op::Offset(x))
    }

    pub fn concat(&mut self, parts: &[NodeId]) -> NodeId {
        let mut v = Vec::new();
        for p in parts {
            v.extend_from_slice(&self.nodes[p.0].value);
        }
        self.push(v, Op::Concat(parts.to_vec()))
    }

    pub fn slice(&mut self, x: NodeId, start: usize, len: usize) -> NodeId {
        let v = self.nodes[x.0].value[start..start + len].to_vec();
        self.push(v, Op::Slice { x, start })
    }

    pub fn sum_vecs(&mut self, parts: &[NodeId]) -> NodeId {
        debug_assert!(!parts.is_empty());
        let n = self.len(parts[0]);
        let mut v = vec![0.0; n];
        for p in parts {
            debug_assert_eq!(self.len(*p), n);
            for (acc, x) in v.iter_mut().zip(self.nodes[p.0].value.iter()) {
                *acc += x;
            }
        }
        self.push(v, Op::SumVecs(parts.to_vec()))
    }

    pub fn tanh(&mut self, x: NodeId) -> NodeId {
        let v = self.nodes[x.0].value.iter().map(|a| a.tanh()).collect();
        self.push(v, Op::Tanh(x))
    }

    pub fn sigmoid(&mut self, x: NodeId) -> NodeId {
        let v = self.nodes[x.0].value.iter().map(|a| sigmoid(*a)).collect();
        self.push(v, Op::Sigmoid(x))
    }

    pub fn softplus(&mut self, x: NodeId) -> NodeId {
        let v = self.nodes[x.0].value.iter().map(|a| softplus(*a)).collect();
        self.push(v, Op::Softplus(x))
    }

    pub fn exp(&mut self, x: NodeId) -> NodeId {
        let v = self.nodes[x.0].value.iter().map(|a| a.exp()).collect();
        self.push(v, Op::Exp(x))
    }

    pub fn sqrt(&mut self, x: NodeId) -> NodeId {
        let v = self.nodes[x.0].value.iter().map(|a| a.sqrt()).collect();
        self.push(v, Op::Sqrt(x))
    }

    pub fn clamp(&mut self, x: NodeId, lo: f64, hi: f64) -> NodeId {
        let v = self.nodes[x.0].value.iter().map(|a| a.clamp(lo, hi)).collect();
        self.push(v, Op::Clamp { x, lo, hi })
    }

    pub fn sum(&mut self, x: NodeId) -> NodeId {
        let s = self.nodes[x.0].value.iter().sum();
        self.push(vec![s], Op::Sum(x))
    }

    pub fn dot(&mut self, a: NodeId, b: NodeId) -> NodeId {
        debug_assert_eq!(self.len(a), self.len(b));
        let s = self.nodes[a.0]
            .value
            .iter()
            .zip(self.nodes[b.0].value.iter())
            .map(|(x, y)| x * y)
            .sum();
        self.push(vec![s], Op::Dot(a, b))
    }

    pub fn mul_scalar(&mut self, x: NodeId, s: NodeId) -> NodeId {
        debug_assert_eq!(self.len(s), 1);
        let sv = self.nodes[s.0].value[0];
        let v = self.nodes[x.0].value.iter().map(|a| a * sv).collect();
        self.push(v, Op::MulScalar { x, s })
    }

    pub fn normalize(&mut self, x: NodeId) -> NodeId {
        let n = self.nodes[x.0].value.iter().map(|a| a * a).sum::<f64>().sqrt();
        let v = self.nodes[x.0].value.iter().map(|a| a / n).collect();
        self.push(v, Op::Normalize(x))
    }

    pub fn softmax(&mut self, x: NodeId) -> NodeId {
        let xs = &self.nodes[x.0].value;
        let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = xs.iter().map(|a| (a - m).exp()).collect();
        let z: f64 = exps.iter().sum();
        let v = exps.into_iter().map(|e| e / z).collect();
        self.push(v, Op::Softmax(x))
    }

    /// Negative log-probability of `target` under softmax(x). Length-1 output.
    pub fn log_softmax_nll(&mut self, x: NodeId, target: usize) -> NodeId {
        let xs = &self.nodes[x.0].value;
        debug_assert!(target < xs.len());
        let lse = log_sum_exp(xs);
        let v = vec![lse - xs[target]];
        self.push(v, Op::LogSoftmaxNll { x, target })
    }

    /// KL(vMF(mu, kappa) || uniform) on the (dim-1)-sphere; independent of mu.
    pub fn vmf_kl(&mut self, kappa: NodeId, dim: usize) -> NodeId {
        debug_assert_eq!(self.len(kappa), 1);
        let k = self.nodes[kappa.0].value[0];
        let v = vec![vmf_kl_scalar(dim, k)];
        self.push(v, Op::VmfKl { kappa, dim })
    }

    /// Reverse pass from a scalar root. Returns the gradient of the root with
    /// respect to every entry of the parameter set, as a flat buffer aligned
    /// with [`ParamSet::data`].
    pub fn backward(&self, root: NodeId) -> Vec<f64> {
        assert_eq!(self.nodes[root.0].value.len(), 1, "backward root must be scalar");
        let mut grads: Vec<Option<Vec<f64>>> = vec![None; self.nodes.len()];
        let mut pgrad = vec![0.0; self.params.len()];
        grads[root.0] = Some(vec![1.0]);

        for i in (0..=root.0).rev() {
            let g = match grads[i].take() {
                Some(g) => g,
                None => continue,
            };
            let node = &self.nodes[i];
            match &node.op {
                Op::Leaf => {}
                Op::Row { table, row } => {
                    let m = self.params.slot_meta(*table);
                    let start = m.offset + row * m.cols;
                    for (j, gv) in g.iter().enumerate() {
                        pgrad[start + j] += gv;
                    }
                }
                Op::Linear { w, b, x } => {
                    let meta = self.params.slot_meta(*w);
                    let (rows, cols, off) = (meta.rows, meta.cols, meta.offset);
                    let xv = &self.nodes[x.0].value;
                    for r in 0..rows {
                        let gr = g[r];
                        if gr == 0.0 {
                            continue;
                        }
                        let wrow = off + r * cols;
                        for c in 0..cols {
                            pgrad[wrow + c] += gr * xv[c];
                        }
                    }
                    if let Some(bid) = b {
                        let boff = self.params.slot_meta(*bid).offset;
                        for (r, gr) in g.iter().enumerate() {
                            pgrad[boff + r] += gr;
                        }
                    }
                    let wm = self.params.slot(*w);
                    let gx = grads[x.0].get_or_insert_with(|| vec![0.0; cols]);
                    for r in 0..rows {
                        let gr = g[r];
                        if gr == 0.0 {
                            continue;
                        }
                        let wrow = &wm[r * cols..(r + 1) * cols];
                        for (gxc, wv) in gx.iter_mut().zip(wrow.iter()) {
                            *gxc += gr * wv;
                        }
                    }
                }
                Op::Add(a, b) => {
                    accumulate(&mut grads, *a, &g, |gv, _| gv);
                    accumulate(&mut grads, *b, &g, |gv, _| gv);
                }
                Op::Sub(a, b) => {
                    accumulate(&mut grads, *a, &g, |gv, _| gv);
                    accumulate(&mut grads, *b, &g, |gv, _| -gv);
                }
                Op::Mul(a, b) => {
                    let av: Vec<f64> = self.nodes[a.0].value.clone();
                    let bv: Vec<f64> = self.nodes[b.0].value.clone();
                    accumulate(&mut grads, *a, &g, |gv, j| gv * bv[j]);
                    accumulate(&mut grads, *b, &g, |gv, j| gv * av[j]);
                }
                Op::Div(a, b) => {
                    let bv: Vec<f64> = self.nodes[b.0].value.clone();
                    let yv: Vec<f64> = node.value.clone();
                    accumulate(&mut grads, *a, &g, |gv, j| gv / bv[j]);
                    accumulate(&mut grads, *b, &g, |gv, j| -gv * yv[j] / bv[j]);
                }
                Op::Scale { x, c } => {
                    let c = *c;
                    accumulate(&mut grads, *x, &g, |gv, _| gv * c);
                }
                Op::Offset(x) => {
                    accumulate(&mut grads, *x, &g, |gv, _| gv);
                }
                Op::Concat(parts) => {
                    let mut pos = 0;
                    for p in parts {
                        let n = self.nodes[p.0].value.len();
                        let gp = grads[p.0].get_or_insert_with(|| vec![0.0; n]);
                        for j in 0..n {
                            gp[j] += g[pos + j];
                        }
                        pos += n;
                    }
                }
                Op::Slice { x, start } => {
                    let n = self.nodes[x.0].value.len();
                    let gx = grads[x.0].get_or_insert_with(|| vec![0.0; n]);
                    for (j, gv) in g.iter().enumerate() {
                        gx[start + j] += gv;
                    }
                }
                Op::SumVecs(parts) => {
                    for p in parts {
                        accumulate(&mut grads, *p, &g, |gv, _| gv);
                    }
                }
                Op::Tanh(x) => {
                    let yv = node.value.clone();
                    accumulate(&mut grads, *x, &g, |gv, j| gv * (1.0 - yv[j] * yv[j]));
                }
                Op::Sigmoid(x) => {
                    let yv = node.value.clone();
                    accumulate(&mut grads, *x, &g, |gv, j| gv * yv[j] * (1.0 - yv[j]));
                }
                Op::Softplus(x) => {
                    let xv = self.nodes[x.0].value.clone();
                    accumulate(&mut grads, *x, &g, |gv, j| gv * sigmoid(xv[j]));
                }
                Op::Exp(x) => {
                    let yv = node.value.clone();
                    accumulate(&mut grads, *x, &g, |gv, j| gv * yv[j]);
                }
                Op::Sqrt(x) => {
                    let yv = node.value.clone();
                    accumulate(&mut grads, *x, &g, |gv, j| gv / (2.0 * yv[j]));
                }
                Op::Clamp { x, lo, hi } => {
                    let xv = self.nodes[x.0].value.clone();
                    let (lo, hi) = (*lo, *hi);
                    accumulate(&mut grads, *x, &g, |gv, j| {
                        if xv[j] >= lo && xv[j] <= hi {
                            gv
                        } else {
                            0.0
                        }
                    });
                }
                Op::Sum(x) => {
                    let gs = g[0];
                    let n = self.nodes[x.0].value.len();
                    let gx = grads[x.0].get_or_insert_with(|| vec![0.0; n]);
                    for v in gx.iter_mut() {
                        *v += gs;
                    }
                }
                Op::Dot(a, b) => {
                    let gs = g[0];
                    let av = self.nodes[a.0].value.clone();
                    let bv = self.nodes[b.0].value.clone();
                    accumulate_full(&mut grads, *a, av.len(), |j| gs * bv[j]);
                    accumulate_full(&mut grads, *b, bv.len(), |j| gs * av[j]);
                }
                Op::MulScalar { x, s } => {
                    let sv = self.nodes[s.0].value[0];
                    let xv = self.nodes[x.0].value.clone();
                    accumulate(&mut grads, *x, &g, |gv, _| gv * sv);
                    let ds: f64 = g.iter().zip(xv.iter()).map(|(gv, x)| gv * x).sum();
                    let gsn = grads[s.0].get_or_insert_with(|| vec![0.0; 1]);
                    gsn[0] += ds;
                }
                Op::Normalize(x) => {
                    let xv = &self.nodes[x.0].value;
                    let n = xv.iter().map(|a| a * a).sum::<f64>().sqrt();
                    let yv = &node.value;
                    let gy_dot_y: f64 = g.iter().zip(yv.iter()).map(|(a, b)| a * b).sum();
                    let gx = grads[x.0].get_or_insert_with(|| vec![0.0; xv.len()]);
                    for j in 0..xv.len() {
                        gx[j] += (g[j] - yv[j] * gy_dot_y) / n;
                    }
                }
                Op::Softmax(x) => {
                    let yv = &node.value;
                    let gy_dot_y: f64 = g.iter().zip(yv.iter()).map(|(a, b)| a * b).sum();
                    let gx = grads[x.0].get_or_insert_with(|| vec![0.0; yv.len()]);
                    for j in 0..yv.len() {
                        gx[j] += yv[j] * (g[j] - gy_dot_y);
                    }
                }
                Op::LogSoftmaxNll { x, target } => {
                    let gs = g[0];
                    let xs = &self.nodes[x.0].value;
                    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    let exps: Vec<f64> = xs.iter().map(|a| (a - m).exp()).collect();
                    let z: f64 = exps.iter().sum();
                    let gx = grads[x.0].get_or_insert_with(|| vec![0.0; xs.len()]);
                    for j in 0..xs.len() {
                        let p = exps[j] / z;
                        let ind = if j == *target { 1.0 } else { 0.0 };
                        gx[j] += gs * (p - ind);
                    }
                }
                Op::VmfKl { kappa, dim } => {
                    let gs = g[0];
                    let k = self.nodes[kappa.0].value[0];
                    // dKL/dk = k * A'(k), A' = 1 - A^2 - (m-1) A / k.
                    let dk = if k <= 0.0 {
                        0.0
                    } else {
                        let a = bessel_ratio(*dim, k);
                        k * (1.0 - a * a - (*dim as f64 - 1.0) * a / k)
                    };
                    let gk = grads[kappa.0].get_or_insert_with(|| vec![0.0; 1]);
                    gk[0] += gs * dk;
                }
            }
        }
        pgrad
    }
}

fn accumulate<F: Fn(f64, usize) -> f64>(
    grads: &mut [Option<Vec<f64>>],
    target: NodeId,
    g: &[f64],
    f: F,
) {
    let gx = grads[target.0].get_or_insert_with(|| vec![0.0; g.len()]);
    for (j, gv) in g.iter().enumerate() {
        gx[j] += f(*gv, j);
    }
}

fn accumulate_full<F: Fn(usize) -> f64>(
    grads: &mut [Option<Vec<f64>>],
    target: NodeId,
    len: usize,
    f: F,
) {
    let gx = grads[target.0].get_or_insert_with(|| vec![0.0; len]);
    for (j, v) in gx.iter_mut().enumerate() {
        *v += f(j);
    }
}
