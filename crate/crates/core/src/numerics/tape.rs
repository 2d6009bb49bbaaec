//! Wengert-list reverse-mode differentiation.
//!
//! Every primitive pushes a node holding its forward value and the ids of its
//! inputs. Ids are handed out in push order, so node order is already a
//! topological order and `backward` is a single reverse sweep.

use super::tensor::{matmul_into, sigmoid, softmax_slice, Tensor};
use super::{NumericsError, PROB_FLOOR};

/// Handle to a node on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Unary {
    Sigmoid,
    Tanh,
    Relu,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Binary {
    Add,
    Mul,
}

#[derive(Clone, Debug)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    Binary(Binary, Var, Var),
    Unary(Unary, Var),
    Softmax(Var),
    CrossEntropy { dist: Var, label: usize },
    LogProb { dist: Var, label: usize },
    ConcatRows(Vec<Var>),
    ConcatCols(Vec<Var>),
    Column { matrix: Var, index: usize },
    Transpose(Var),
    Reshape(Var),
    Sum(Var),
    AddAll(Vec<Var>),
}

struct Node {
    value: Tensor,
    op: Op,
    param: bool,
}

#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

/// Gradients of one scalar with respect to every node on the tape.
pub struct Gradients {
    grads: Vec<Option<Vec<f64>>>,
    shapes: Vec<Vec<usize>>,
}

impl Gradients {
    /// Gradient for `var`; zeros when the loss does not depend on it.
    pub fn get(&self, var: Var) -> Tensor {
        let shape = &self.shapes[var.0];
        match &self.grads[var.0] {
            Some(g) => Tensor::new(shape.clone(), g.clone()).expect("gradient shape"),
            None => Tensor::zeros(shape),
        }
    }

    pub fn has(&self, var: Var) -> bool {
        self.grads[var.0].is_some()
    }
}

fn shape_err(op: &'static str, a: &Tensor, b: &Tensor) -> NumericsError {
    NumericsError::ShapeMismatch {
        op,
        left: a.shape().to_vec(),
        right: b.shape().to_vec(),
    }
}

impl Tape {
    pub fn new() -> Self {
        Tape::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Tensor, op: Op) -> Var {
        self.nodes.push(Node {
            value,
            op,
            param: false,
        });
        Var(self.nodes.len() - 1)
    }

    fn check(&self, v: Var) -> Result<(), NumericsError> {
        if v.0 < self.nodes.len() {
            Ok(())
        } else {
            Err(NumericsError::UnknownVar(v.0))
        }
    }

    /// Constant input.
    pub fn constant(&mut self, value: Tensor) -> Var {
        self.push(value, Op::Leaf)
    }

    /// Learnable input; gradients are always reported for these after `backward`.
    pub fn param(&mut self, value: Tensor) -> Var {
        let v = self.push(value, Op::Leaf);
        self.nodes[v.0].param = true;
        v
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn params(&self) -> impl Iterator<Item = Var> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.param)
            .map(|(i, _)| Var(i))
    }

    /// Sign pattern of every relu input on the tape. Two evaluations with the
    /// same pattern lie on the same smooth piece.
    pub fn relu_pattern(&self) -> Vec<bool> {
        let mut out = Vec::new();
        for n in &self.nodes {
            if let Op::Unary(Unary::Relu, x) = n.op {
                out.extend(self.nodes[x.0].value.data().iter().map(|&v| v > 0.0));
            }
        }
        out
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var, NumericsError> {
        self.check(a)?;
        self.check(b)?;
        let out = self.value(a).matmul(self.value(b))?;
        Ok(self.push(out, Op::MatMul(a, b)))
    }

    fn binary(&mut self, kind: Binary, a: Var, b: Var) -> Result<Var, NumericsError> {
        self.check(a)?;
        self.check(b)?;
        let (x, y) = (self.value(a), self.value(b));
        if x.shape() != y.shape() {
            let name = match kind {
                Binary::Add => "add",
                Binary::Mul => "mul",
            };
            return Err(shape_err(name, x, y));
        }
        let data = x
            .data()
            .iter()
            .zip(y.data())
            .map(|(&p, &q)| match kind {
                Binary::Add => p + q,
                Binary::Mul => p * q,
            })
            .collect();
        let out = Tensor::new(x.shape().to_vec(), data)?;
        Ok(self.push(out, Op::Binary(kind, a, b)))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var, NumericsError> {
        self.binary(Binary::Add, a, b)
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var, NumericsError> {
        self.binary(Binary::Mul, a, b)
    }

    /// Sum of several same-shaped tensors.
    pub fn add_all(&mut self, xs: &[Var]) -> Result<Var, NumericsError> {
        let first = *xs.first().ok_or(NumericsError::Empty("add_all"))?;
        self.check(first)?;
        let mut acc = self.value(first).clone();
        for &x in &xs[1..] {
            self.check(x)?;
            let v = self.value(x);
            if v.shape() != acc.shape() {
                return Err(shape_err("add_all", &acc, v));
            }
            for (a, b) in acc.data_mut().iter_mut().zip(v.data()) {
                *a += b;
            }
        }
        Ok(self.push(acc, Op::AddAll(xs.to_vec())))
    }

    fn unary(&mut self, kind: Unary, x: Var) -> Result<Var, NumericsError> {
        self.check(x)?;
        let v = self.value(x);
        let f: fn(f64) -> f64 = match kind {
            Unary::Sigmoid => sigmoid,
            Unary::Tanh => f64::tanh,
            Unary::Relu => |z| z.max(0.0),
        };
        let out = Tensor::new(v.shape().to_vec(), v.data().iter().map(|&z| f(z)).collect())?;
        Ok(self.push(out, Op::Unary(kind, x)))
    }

    pub fn sigmoid(&mut self, x: Var) -> Result<Var, NumericsError> {
        self.unary(Unary::Sigmoid, x)
    }

    pub fn tanh(&mut self, x: Var) -> Result<Var, NumericsError> {
        self.unary(Unary::Tanh, x)
    }

    pub fn relu(&mut self, x: Var) -> Result<Var, NumericsError> {
        self.unary(Unary::Relu, x)
    }

    pub fn elementwise(&mut self, op: Unary, x: Var) -> Result<Var, NumericsError> {
        self.unary(op, x)
    }

    /// Softmax over all elements, shape preserved.
    pub fn softmax(&mut self, x: Var) -> Result<Var, NumericsError> {
        self.check(x)?;
        let v = self.value(x);
        if v.is_empty() {
            return Err(NumericsError::Empty("softmax"));
        }
        let out = Tensor::new(v.shape().to_vec(), softmax_slice(v.data()))?;
        Ok(self.push(out, Op::Softmax(x)))
    }

    /// `-ln(max(dist[label], PROB_FLOOR))` as a `1 x 1` tensor.
    pub fn cross_entropy(&mut self, dist: Var, label: usize) -> Result<Var, NumericsError> {
        let p = self.label_prob(dist, label)?;
        Ok(self.push(
            Tensor::scalar(-p.max(PROB_FLOOR).ln()),
            Op::CrossEntropy { dist, label },
        ))
    }

    /// `ln(max(dist[label], PROB_FLOOR))`.
    pub fn log_prob(&mut self, dist: Var, label: usize) -> Result<Var, NumericsError> {
        let p = self.label_prob(dist, label)?;
        Ok(self.push(
            Tensor::scalar(p.max(PROB_FLOOR).ln()),
            Op::LogProb { dist, label },
        ))
    }

    fn label_prob(&self, dist: Var, label: usize) -> Result<f64, NumericsError> {
        self.check(dist)?;
        let d = self.value(dist);
        if label >= d.len() {
            return Err(NumericsError::LabelOutOfRange {
                label,
                len: d.len(),
            });
        }
        Ok(d.data()[label])
    }

    /// Vertical stack `[a; b; ...]`; all parts share a column count.
    pub fn concat_rows(&mut self, parts: &[Var]) -> Result<Var, NumericsError> {
        let first = *parts.first().ok_or(NumericsError::Empty("concat_rows"))?;
        self.check(first)?;
        let cols = self.value(first).cols();
        let mut rows = 0;
        let mut data = Vec::new();
        for &p in parts {
            self.check(p)?;
            let v = self.value(p);
            if v.shape().len() != 2 || v.cols() != cols {
                return Err(shape_err("concat_rows", self.value(first), v));
            }
            rows += v.rows();
            data.extend_from_slice(v.data());
        }
        let out = Tensor::matrix(rows, cols, data)?;
        Ok(self.push(out, Op::ConcatRows(parts.to_vec())))
    }

    /// Horizontal stack `[a b ...]`; all parts share a row count.
    pub fn concat_cols(&mut self, parts: &[Var]) -> Result<Var, NumericsError> {
        let first = *parts.first().ok_or(NumericsError::Empty("concat_cols"))?;
        self.check(first)?;
        let rows = self.value(first).rows();
        let mut widths = Vec::with_capacity(parts.len());
        for &p in parts {
            self.check(p)?;
            let v = self.value(p);
            if v.shape().len() != 2 || v.rows() != rows {
                return Err(shape_err("concat_cols", self.value(first), v));
            }
            widths.push(v.cols());
        }
        let total: usize = widths.iter().sum();
        let mut data = vec![0.0; rows * total];
        let mut offset = 0;
        for (&p, &w) in parts.iter().zip(&widths) {
            let v = self.value(p).data();
            for r in 0..rows {
                data[r * total + offset..r * total + offset + w]
                    .copy_from_slice(&v[r * w..(r + 1) * w]);
            }
            offset += w;
        }
        let out = Tensor::matrix(rows, total, data)?;
        Ok(self.push(out, Op::ConcatCols(parts.to_vec())))
    }

    /// Column `index` of a matrix as an `n x 1` vector (embedding lookup).
    pub fn column(&mut self, matrix: Var, index: usize) -> Result<Var, NumericsError> {
        self.check(matrix)?;
        let m = self.value(matrix);
        if m.shape().len() != 2 {
            return Err(NumericsError::InvalidShape(m.shape().to_vec()));
        }
        if index >= m.cols() {
            return Err(NumericsError::LabelOutOfRange {
                label: index,
                len: m.cols(),
            });
        }
        let data = (0..m.rows()).map(|r| m.get(r, index)).collect();
        let out = Tensor::matrix(m.rows(), 1, data)?;
        Ok(self.push(out, Op::Column { matrix, index }))
    }

    pub fn transpose(&mut self, x: Var) -> Result<Var, NumericsError> {
        self.check(x)?;
        let out = self.value(x).transpose()?;
        Ok(self.push(out, Op::Transpose(x)))
    }

    pub fn reshape(&mut self, x: Var, shape: &[usize]) -> Result<Var, NumericsError> {
        self.check(x)?;
        let v = self.value(x);
        let out = v.reshaped(shape).map_err(|_| NumericsError::ShapeMismatch {
            op: "reshape",
            left: v.shape().to_vec(),
            right: shape.to_vec(),
        })?;
        Ok(self.push(out, Op::Reshape(x)))
    }

    /// Sum of all elements as `1 x 1`.
    pub fn sum(&mut self, x: Var) -> Result<Var, NumericsError> {
        self.check(x)?;
        let s = self.value(x).data().iter().sum();
        Ok(self.push(Tensor::scalar(s), Op::Sum(x)))
    }

    /// Reverse sweep from a scalar `loss`.
    pub fn backward(&self, loss: Var) -> Result<Gradients, NumericsError> {
        self.check(loss)?;
        let lv = self.value(loss);
        if lv.len() != 1 {
            return Err(NumericsError::NotScalar(lv.shape().to_vec()));
        }
        let n = loss.0 + 1;
        let mut grads: Vec<Option<Vec<f64>>> = vec![None; self.nodes.len()];
        grads[loss.0] = Some(vec![1.0]);

        for i in (0..n).rev() {
            let Some(g) = grads[i].clone() else { continue };
            let node = &self.nodes[i];
            match &node.op {
                Op::Leaf => {}
                Op::MatMul(a, b) => {
                    let av = self.value(*a);
                    let bv = self.value(*b);
                    let (m, k, nn) = (av.rows(), av.cols(), bv.cols());
                    // dA = G B^T
                    let bt = bv.transpose()?;
                    let mut da = vec![0.0; m * k];
                    matmul_into(&g, bt.data(), &mut da, m, nn, k);
                    accumulate(&mut grads, *a, da);
                    // dB = A^T G
                    let at = av.transpose()?;
                    let mut db = vec![0.0; k * nn];
                    matmul_into(at.data(), &g, &mut db, k, m, nn);
                    accumulate(&mut grads, *b, db);
                }
                Op::Binary(Binary::Add, a, b) => {
                    accumulate(&mut grads, *a, g.clone());
                    accumulate(&mut grads, *b, g);
                }
                Op::Binary(Binary::Mul, a, b) => {
                    let av = self.value(*a).data();
                    let bv = self.value(*b).data();
                    let da = g.iter().zip(bv).map(|(g, y)| g * y).collect();
                    let db = g.iter().zip(av).map(|(g, x)| g * x).collect();
                    accumulate(&mut grads, *a, da);
                    accumulate(&mut grads, *b, db);
                }
                Op::AddAll(xs) => {
                    for &x in xs {
                        accumulate(&mut grads, x, g.clone());
                    }
                }
                Op::Unary(kind, x) => {
                    let y = node.value.data();
                    let xv = self.value(*x).data();
                    let dx = match kind {
                        Unary::Sigmoid => g.iter().zip(y).map(|(g, y)| g * y * (1.0 - y)).collect(),
                        Unary::Tanh => g.iter().zip(y).map(|(g, y)| g * (1.0 - y * y)).collect(),
                        Unary::Relu => g
                            .iter()
                            .zip(xv)
                            .map(|(g, x)| if *x > 0.0 { *g } else { 0.0 })
                            .collect(),
                    };
                    accumulate(&mut grads, *x, dx);
                }
                Op::Softmax(x) => {
                    let y = node.value.data();
                    let dot: f64 = g.iter().zip(y).map(|(g, y)| g * y).sum();
                    let dx = g.iter().zip(y).map(|(g, y)| y * (g - dot)).collect();
                    accumulate(&mut grads, *x, dx);
                }
                Op::CrossEntropy { dist, label } | Op::LogProb { dist, label } => {
                    let d = self.value(*dist);
                    let p = d.data()[*label];
                    let mut dx = vec![0.0; d.len()];
                    if p > PROB_FLOOR {
                        let sign = if matches!(node.op, Op::CrossEntropy { .. }) {
                            -1.0
                        } else {
                            1.0
                        };
                        dx[*label] = sign * g[0] / p;
                    }
                    accumulate(&mut grads, *dist, dx);
                }
                Op::ConcatRows(parts) => {
                    let mut offset = 0;
                    for &p in parts {
                        let len = self.value(p).len();
                        accumulate(&mut grads, p, g[offset..offset + len].to_vec());
                        offset += len;
                    }
                }
                Op::ConcatCols(parts) => {
                    let rows = node.value.rows();
                    let total = node.value.cols();
                    let mut offset = 0;
                    for &p in parts {
                        let w = self.value(p).cols();
                        let mut dp = Vec::with_capacity(rows * w);
                        for r in 0..rows {
                            dp.extend_from_slice(&g[r * total + offset..r * total + offset + w]);
                        }
                        accumulate(&mut grads, p, dp);
                        offset += w;
                    }
                }
                Op::Column { matrix, index } => {
                    let m = self.value(*matrix);
                    let cols = m.cols();
                    let mut dm = vec![0.0; m.len()];
                    for (r, gv) in g.iter().enumerate() {
                        dm[r * cols + index] = *gv;
                    }
                    accumulate(&mut grads, *matrix, dm);
                }
                Op::Transpose(x) => {
                    let gt = Tensor::new(node.value.shape().to_vec(), g)?.transpose()?;
                    accumulate(&mut grads, *x, gt.into_data());
                }
                Op::Reshape(x) => accumulate(&mut grads, *x, g),
                Op::Sum(x) => {
                    let len = self.value(*x).len();
                    accumulate(&mut grads, *x, vec![g[0]; len]);
                }
            }
        }

        Ok(Gradients {
            grads,
            shapes: self.nodes.iter().map(|n| n.value.shape().to_vec()).collect(),
        })
    }
}

fn accumulate(grads: &mut [Option<Vec<f64>>], v: Var, delta: Vec<f64>) {
    match &mut grads[v.0] {
        Some(existing) => {
            for (e, d) in existing.iter_mut().zip(delta) {
                *e += d;
            }
        }
        slot @ None => *slot = Some(delta),
    }
}
