use std::cell::RefCell;

const LAYER_NORM_EPS: f64 = 1e-8;
const GELU_C: f64 = 0.797_884_560_802_865_4; // sqrt(2/pi)
const GELU_A: f64 = 0.044715;

enum Op {
    Leaf,
    MatMul(usize, usize),
    Transpose(usize),
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    Scale(usize, f64),
    Abs(usize),
    SoftmaxRows(usize),
    Gelu(usize),
    LayerNorm(usize),
    AddRow(usize, usize),
    MulRow(usize, usize),
    MeanRows(usize),
    Gather(usize, Vec<usize>),
    CrossEntropy(usize, Vec<usize>),
    Sum(usize),
}

struct Node {
    rows: usize,
    cols: usize,
    value: Vec<f64>,
    op: Op,
    needs_grad: bool,
}

/// Records every operation applied to its tensors, in topological order.
pub struct Tape {
    nodes: RefCell<Vec<Node>>,
}

/// Handle to one tensor on a tape.
#[derive(Clone, Copy)]
pub struct Var<'t> {
    tape: &'t Tape,
    idx: usize,
}

/// Gradients produced by one backward pass, indexed by tape position.
pub struct Grads {
    grads: Vec<Option<Vec<f64>>>,
}

impl Grads {
    /// Gradient of the loss with respect to `v`. Zero if `v` was not reached.
    pub fn wrt(&self, v: Var<'_>) -> Vec<f64> {
        match &self.grads[v.idx] {
            Some(g) => g.clone(),
            None => vec![0.0; v.rows() * v.cols()],
        }
    }
}

impl Default for Tape {
    fn default() -> Self {
        Self::new()
    }
}

impl Tape {
    pub fn new() -> Self {
        Self {
            nodes: RefCell::new(Vec::new()),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.borrow().is_empty()
    }

    /// New leaf tensor. Panics on non-finite data or a shape/len mismatch.
    pub fn leaf(&self, rows: usize, cols: usize, data: &[f64], requires_grad: bool) -> Var<'_> {
        assert_eq!(data.len(), rows * cols, "leaf data length mismatch");
        assert!(
            data.iter().all(|x| x.is_finite()),
            "non-finite input in leaf tensor"
        );
        self.push(rows, cols, data.to_vec(), Op::Leaf, requires_grad)
    }

    pub fn constant(&self, rows: usize, cols: usize, data: &[f64]) -> Var<'_> {
        self.leaf(rows, cols, data, false)
    }

    pub fn scalar(&self, x: f64) -> Var<'_> {
        self.leaf(1, 1, &[x], false)
    }

    fn push(&self, rows: usize, cols: usize, value: Vec<f64>, op: Op, needs_grad: bool) -> Var<'_> {
        let mut nodes = self.nodes.borrow_mut();
        nodes.push(Node {
            rows,
            cols,
            value,
            op,
            needs_grad,
        });
        Var {
            tape: self,
            idx: nodes.len() - 1,
        }
    }

    /// Reverse pass from a scalar loss. Panics on a non-scalar loss.
    pub fn backward(&self, loss: Var<'_>) -> Grads {
        assert!(std::ptr::eq(loss.tape, self), "loss from a different tape");
        let nodes = self.nodes.borrow();
        assert!(
            nodes[loss.idx].rows == 1 && nodes[loss.idx].cols == 1,
            "backward requires a scalar loss"
        );
        let mut grads: Vec<Option<Vec<f64>>> = vec![None; nodes.len()];
        grads[loss.idx] = Some(vec![1.0]);

        for idx in (0..=loss.idx).rev() {
            let Some(g) = grads[idx].take() else { continue };
            let node = &nodes[idx];
            if !node.needs_grad {
                grads[idx] = Some(g);
                continue;
            }
            let accum = |nodes: &[Node], grads: &mut Vec<Option<Vec<f64>>>, p: usize, delta: Vec<f64>| {
                if !nodes[p].needs_grad {
                    return;
                }
                let slot = grads[p]
                    .get_or_insert_with(|| vec![0.0; nodes[p].rows * nodes[p].cols]);
                for (s, d) in slot.iter_mut().zip(&delta) {
                    *s += d;
                }
            };
            match &node.op {
                Op::Leaf => {}
                Op::MatMul(a, b) => {
                    let (na, nb) = (&nodes[*a], &nodes[*b]);
                    // dA = G B^T
                    let mut da = vec![0.0; na.rows * na.cols];
                    for i in 0..na.rows {
                        for j in 0..nb.cols {
                            let gij = g[i * nb.cols + j];
                            if gij != 0.0 {
                                for k in 0..na.cols {
                                    da[i * na.cols + k] += gij * nb.value[k * nb.cols + j];
                                }
                            }
                        }
                    }
                    accum(&nodes, &mut grads, *a, da);
                    // dB = A^T G
                    let mut db = vec![0.0; nb.rows * nb.cols];
                    for k in 0..nb.rows {
                        for i in 0..na.rows {
                            let aik = na.value[i * na.cols + k];
                            if aik != 0.0 {
                                for j in 0..nb.cols {
                                    db[k * nb.cols + j] += aik * g[i * nb.cols + j];
                                }
                            }
                        }
                    }
                    accum(&nodes, &mut grads, *b, db);
                }
                Op::Transpose(a) => {
                    let na = &nodes[*a];
                    let mut da = vec![0.0; na.rows * na.cols];
                    for i in 0..na.rows {
                        for j in 0..na.cols {
                            da[i * na.cols + j] = g[j * na.rows + i];
                        }
                    }
                    accum(&nodes, &mut grads, *a, da);
                }
                Op::Add(a, b) => {
                    accum(&nodes, &mut grads, *a, g.clone());
                    accum(&nodes, &mut grads, *b, g.clone());
                }
                Op::Sub(a, b) => {
                    accum(&nodes, &mut grads, *a, g.clone());
                    accum(&nodes, &mut grads, *b, g.iter().map(|x| -x).collect());
                }
                Op::Mul(a, b) => {
                    let da = g
                        .iter()
                        .zip(&nodes[*b].value)
                        .map(|(x, y)| x * y)
                        .collect();
                    let db = g
                        .iter()
                        .zip(&nodes[*a].value)
                        .map(|(x, y)| x * y)
                        .collect();
                    accum(&nodes, &mut grads, *a, da);
                    accum(&nodes, &mut grads, *b, db);
                }
                Op::Scale(a, c) => {
                    accum(&nodes, &mut grads, *a, g.iter().map(|x| x * c).collect());
                }
                Op::Abs(a) => {
                    let da = g
                        .iter()
                        .zip(&nodes[*a].value)
                        .map(|(x, v)| {
                            if *v > 0.0 {
                                *x
                            } else if *v < 0.0 {
                                -*x
                            } else {
                                0.0
                            }
                        })
                        .collect();
                    accum(&nodes, &mut grads, *a, da);
                }
                Op::SoftmaxRows(a) => {
                    let (r, c) = (node.rows, node.cols);
                    let y = &node.value;
                    let mut da = vec![0.0; r * c];
                    for i in 0..r {
                        let row = i * c;
                        let dot: f64 = (0..c).map(|j| g[row + j] * y[row + j]).sum();
                        for j in 0..c {
                            da[row + j] = y[row + j] * (g[row + j] - dot);
                        }
                    }
                    accum(&nodes, &mut grads, *a, da);
                }
                Op::Gelu(a) => {
                    let da = g
                        .iter()
                        .zip(&nodes[*a].value)
                        .map(|(x, &v)| x * gelu_prime(v))
                        .collect();
                    accum(&nodes, &mut grads, *a, da);
                }
                Op::LayerNorm(a) => {
                    let (r, c) = (node.rows, node.cols);
                    let na = &nodes[*a];
                    let mut da = vec![0.0; r * c];
                    for i in 0..r {
                        let row = i * c;
                        let xs = &na.value[row..row + c];
                        let mean = xs.iter().sum::<f64>() / c as f64;
                        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / c as f64;
                        let sigma = (var + LAYER_NORM_EPS).sqrt();
                        let ys = &node.value[row..row + c];
                        let gmean: f64 = g[row..row + c].iter().sum::<f64>() / c as f64;
                        let gydot: f64 = (0..c).map(|j| g[row + j] * ys[j]).sum::<f64>() / c as f64;
                        for j in 0..c {
                            da[row + j] = (g[row + j] - gmean - ys[j] * gydot) / sigma;
                        }
                    }
                    accum(&nodes, &mut grads, *a, da);
                }
                Op::AddRow(a, b) => {
                    accum(&nodes, &mut grads, *a, g.clone());
                    let c = node.cols;
                    let mut db = vec![0.0; c];
                    for i in 0..node.rows {
                        for j in 0..c {
                            db[j] += g[i * c + j];
                        }
                    }
                    accum(&nodes, &mut grads, *b, db);
                }
                Op::MulRow(a, b) => {
                    let c = node.cols;
                    let na = &nodes[*a];
                    let nb = &nodes[*b];
                    let mut da = vec![0.0; node.rows * c];
                    let mut db = vec![0.0; c];
                    for i in 0..node.rows {
                        for j in 0..c {
                            da[i * c + j] = g[i * c + j] * nb.value[j];
                            db[j] += g[i * c + j] * na.value[i * c + j];
                        }
                    }
                    accum(&nodes, &mut grads, *a, da);
                    accum(&nodes, &mut grads, *b, db);
                }
                Op::MeanRows(a) => {
                    let na = &nodes[*a];
                    let inv = 1.0 / na.rows as f64;
                    let mut da = vec![0.0; na.rows * na.cols];
                    for i in 0..na.rows {
                        for j in 0..na.cols {
                            da[i * na.cols + j] = g[j] * inv;
                        }
                    }
                    accum(&nodes, &mut grads, *a, da);
                }
                Op::Gather(t, idx_list) => {
                    let nt = &nodes[*t];
                    let c = nt.cols;
                    let mut dt = vec![0.0; nt.rows * c];
                    for (r, &src) in idx_list.iter().enumerate() {
                        for j in 0..c {
                            dt[src * c + j] += g[r * c + j];
                        }
                    }
                    accum(&nodes, &mut grads, *t, dt);
                }
                Op::CrossEntropy(a, labels) => {
                    let na = &nodes[*a];
                    let (n, c) = (na.rows, na.cols);
                    let gs = g[0] / n as f64;
                    let mut da = vec![0.0; n * c];
                    for i in 0..n {
                        let row = i * c;
                        let p = softmax_row(&na.value[row..row + c]);
                        for j in 0..c {
                            let onehot = if labels[i] == j { 1.0 } else { 0.0 };
                            da[row + j] = gs * (p[j] - onehot);
                        }
                    }
                    accum(&nodes, &mut grads, *a, da);
                }
                Op::Sum(a) => {
                    let na = &nodes[*a];
                    accum(&nodes, &mut grads, *a, vec![g[0]; na.rows * na.cols]);
                }
            }
            grads[idx] = Some(g);
        }
        Grads { grads }
    }
}

fn gelu(x: f64) -> f64 {
    0.5 * x * (1.0 + (GELU_C * (x + GELU_A * x * x * x)).tanh())
}

fn gelu_prime(x: f64) -> f64 {
    let inner = GELU_C * (x + GELU_A * x * x * x);
    let t = inner.tanh();
    0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * GELU_C * (1.0 + 3.0 * GELU_A * x * x)
}

fn softmax_row(xs: &[f64]) -> Vec<f64> {
    let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = xs.iter().map(|x| (x - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

impl<'t> Var<'t> {
    pub fn rows(&self) -> usize {
        self.tape.nodes.borrow()[self.idx].rows
    }

    pub fn cols(&self) -> usize {
        self.tape.nodes.borrow()[self.idx].cols
    }

    pub fn value(&self) -> Vec<f64> {
        self.tape.nodes.borrow()[self.idx].value.clone()
    }

    pub fn item(&self) -> f64 {
        let nodes = self.tape.nodes.borrow();
        let n = &nodes[self.idx];
        assert!(n.rows == 1 && n.cols == 1, "item() requires a scalar");
        n.value[0]
    }

    fn unary<F>(self, f: F, op: impl FnOnce(usize) -> Op) -> Var<'t>
    where
        F: FnOnce(&Node) -> (usize, usize, Vec<f64>),
    {
        let (rows, cols, value, needs) = {
            let nodes = self.tape.nodes.borrow();
            let n = &nodes[self.idx];
            let (r, c, v) = f(n);
            (r, c, v, n.needs_grad)
        };
        self.tape.push(rows, cols, value, op(self.idx), needs)
    }

    pub fn matmul(self, other: Var<'t>) -> Var<'t> {
        let (rows, cols, value, needs) = {
            let nodes = self.tape.nodes.borrow();
            let (a, b) = (&nodes[self.idx], &nodes[other.idx]);
            assert_eq!(
                a.cols, b.rows,
                "matmul shape mismatch: {}x{} * {}x{}",
                a.rows, a.cols, b.rows, b.cols
            );
            let (m, k, n) = (a.rows, a.cols, b.cols);
            let mut out = vec![0.0; m * n];
            for i in 0..m {
                for p in 0..k {
                    let aip = a.value[i * k + p];
                    if aip != 0.0 {
                        for j in 0..n {
                            out[i * n + j] += aip * b.value[p * n + j];
                        }
                    }
                }
            }
            (m, n, out, a.needs_grad || b.needs_grad)
        };
        self.tape
            .push(rows, cols, value, Op::MatMul(self.idx, other.idx), needs)
    }

    pub fn t(self) -> Var<'t> {
        self.unary(
            |n| {
                let mut out = vec![0.0; n.rows * n.cols];
                for i in 0..n.rows {
                    for j in 0..n.cols {
                        out[j * n.rows + i] = n.value[i * n.cols + j];
                    }
                }
                (n.cols, n.rows, out)
            },
            Op::Transpose,
        )
    }

    fn binary_same_shape(
        self,
        other: Var<'t>,
        name: &str,
        f: impl Fn(f64, f64) -> f64,
        op: impl FnOnce(usize, usize) -> Op,
    ) -> Var<'t> {
        let (rows, cols, value, needs) = {
            let nodes = self.tape.nodes.borrow();
            let (a, b) = (&nodes[self.idx], &nodes[other.idx]);
            assert!(
                a.rows == b.rows && a.cols == b.cols,
                "{name} shape mismatch: {}x{} vs {}x{}",
                a.rows,
                a.cols,
                b.rows,
                b.cols
            );
            let value = a.value.iter().zip(&b.value).map(|(x, y)| f(*x, *y)).collect();
            (a.rows, a.cols, value, a.needs_grad || b.needs_grad)
        };
        self.tape
            .push(rows, cols, value, op(self.idx, other.idx), needs)
    }

    pub fn add(self, other: Var<'t>) -> Var<'t> {
        self.binary_same_shape(other, "add", |x, y| x + y, Op::Add)
    }

    pub fn sub(self, other: Var<'t>) -> Var<'t> {
        self.binary_same_shape(other, "sub", |x, y| x - y, Op::Sub)
    }

    pub fn mul(self, other: Var<'t>) -> Var<'t> {
        self.binary_same_shape(other, "mul", |x, y| x * y, Op::Mul)
    }

    /// Elementwise product with a fixed binary mask; the mask carries no
    /// gradient, so masked-out weight entries receive zero gradient.
    pub fn apply_mask(self, mask: Var<'t>) -> Var<'t> {
        self.mul(mask)
    }

    pub fn scale(self, c: f64) -> Var<'t> {
        self.unary(
            |n| (n.rows, n.cols, n.value.iter().map(|x| x * c).collect()),
            |i| Op::Scale(i, c),
        )
    }

    pub fn abs(self) -> Var<'t> {
        self.unary(
            |n| (n.rows, n.cols, n.value.iter().map(|x| x.abs()).collect()),
            Op::Abs,
        )
    }

    pub fn softmax_rows(self) -> Var<'t> {
        self.unary(
            |n| {
                let mut out = Vec::with_capacity(n.rows * n.cols);
                for i in 0..n.rows {
                    out.extend(softmax_row(&n.value[i * n.cols..(i + 1) * n.cols]));
                }
                (n.rows, n.cols, out)
            },
            Op::SoftmaxRows,
        )
    }

    pub fn gelu(self) -> Var<'t> {
        self.unary(
            |n| (n.rows, n.cols, n.value.iter().map(|x| gelu(*x)).collect()),
            Op::Gelu,
        )
    }

    /// Per-row normalization over the last axis, without affine parameters.
    pub fn layer_norm(self) -> Var<'t> {
        self.unary(
            |n| {
                let mut out = vec![0.0; n.rows * n.cols];
                for i in 0..n.rows {
                    let row = i * n.cols;
                    let xs = &n.value[row..row + n.cols];
                    let mean = xs.iter().sum::<f64>() / n.cols as f64;
                    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n.cols as f64;
                    let sigma = (var + LAYER_NORM_EPS).sqrt();
                    for j in 0..n.cols {
                        out[row + j] = (xs[j] - mean) / sigma;
                    }
                }
                (n.rows, n.cols, out)
            },
            Op::LayerNorm,
        )
    }

    /// Adds a 1×d row vector to every row.
    pub fn add_row(self, bias: Var<'t>) -> Var<'t> {
        let (rows, cols, value, needs) = {
            let nodes = self.tape.nodes.borrow();
            let (a, b) = (&nodes[self.idx], &nodes[bias.idx]);
            assert!(
                b.rows == 1 && b.cols == a.cols,
                "add_row shape mismatch: {}x{} + {}x{}",
                a.rows,
                a.cols,
                b.rows,
                b.cols
            );
            let mut out = vec![0.0; a.rows * a.cols];
            for i in 0..a.rows {
                for j in 0..a.cols {
                    out[i * a.cols + j] = a.value[i * a.cols + j] + b.value[j];
                }
            }
            (a.rows, a.cols, out, a.needs_grad || b.needs_grad)
        };
        self.tape
            .push(rows, cols, value, Op::AddRow(self.idx, bias.idx), needs)
    }

    /// Multiplies every row elementwise by a 1×d row vector.
    pub fn mul_row(self, gamma: Var<'t>) -> Var<'t> {
        let (rows, cols, value, needs) = {
            let nodes = self.tape.nodes.borrow();
            let (a, b) = (&nodes[self.idx], &nodes[gamma.idx]);
            assert!(
                b.rows == 1 && b.cols == a.cols,
                "mul_row shape mismatch: {}x{} * {}x{}",
                a.rows,
                a.cols,
                b.rows,
                b.cols
            );
            let mut out = vec![0.0; a.rows * a.cols];
            for i in 0..a.rows {
                for j in 0..a.cols {
                    out[i * a.cols + j] = a.value[i * a.cols + j] * b.value[j];
                }
            }
            (a.rows, a.cols, out, a.needs_grad || b.needs_grad)
        };
        self.tape
            .push(rows, cols, value, Op::MulRow(self.idx, gamma.idx), needs)
    }

    /// Mean over rows, producing a 1×d vector.
    pub fn mean_rows(self) -> Var<'t> {
        self.unary(
            |n| {
                assert!(n.rows > 0, "mean_rows on an empty tensor");
                let mut out = vec![0.0; n.cols];
                for i in 0..n.rows {
                    for j in 0..n.cols {
                        out[j] += n.value[i * n.cols + j];
                    }
                }
                for v in &mut out {
                    *v /= n.rows as f64;
                }
                (1, n.cols, out)
            },
            Op::MeanRows,
        )
    }

    /// Row lookup into an embedding table; `self` is the table.
    pub fn gather(self, indices: &[usize]) -> Var<'t> {
        let (rows, cols, value, needs) = {
            let nodes = self.tape.nodes.borrow();
            let t = &nodes[self.idx];
            let mut out = Vec::with_capacity(indices.len() * t.cols);
            for &i in indices {
                assert!(i < t.rows, "gather index {i} out of range ({})", t.rows);
                out.extend_from_slice(&t.value[i * t.cols..(i + 1) * t.cols]);
            }
            (indices.len(), t.cols, out, t.needs_grad)
        };
        self.tape.push(
            rows,
            cols,
            value,
            Op::Gather(self.idx, indices.to_vec()),
            needs,
        )
    }

    /// Mean cross-entropy of row logits against integer labels.
    pub fn cross_entropy(self, labels: &[usize]) -> Var<'t> {
        let (value, needs) = {
            let nodes = self.tape.nodes.borrow();
            let a = &nodes[self.idx];
            assert_eq!(a.rows, labels.len(), "cross_entropy label count mismatch");
            let mut total = 0.0;
            for (i, &y) in labels.iter().enumerate() {
                assert!(y < a.cols, "label {y} out of range");
                let row = &a.value[i * a.cols..(i + 1) * a.cols];
                let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let lse = max + row.iter().map(|x| (x - max).exp()).sum::<f64>().ln();
                total += lse - row[y];
            }
            (total / labels.len() as f64, a.needs_grad)
        };
        self.tape.push(
            1,
            1,
            vec![value],
            Op::CrossEntropy(self.idx, labels.to_vec()),
            needs,
        )
    }

    pub fn sum(self) -> Var<'t> {
        self.unary(|n| (1, 1, vec![n.value.iter().sum()]), Op::Sum)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softmax_uniform_logits() {
        let tape = Tape::new();
        let x = tape.leaf(1, 3, &[0.0, 0.0, 0.0], false);
        let y = x.softmax_rows();
        for v in y.value() {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn softmax_rows_sum_to_one() {
        let tape = Tape::new();
        let x = tape.leaf(3, 4, &[1.0, -2.0, 0.5, 3.0, 100.0, 99.0, 98.0, 97.0, 0.0, 0.0, 0.0, 0.0], false);
        let y = x.softmax_rows().value();
        for i in 0..3 {
            let s: f64 = y[i * 4..(i + 1) * 4].iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
            assert!(y[i * 4..(i + 1) * 4].iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn matmul_identity() {
        let tape = Tape::new();
        let eye = tape.constant(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        let a_data = [1.5, -2.0, 3.0, 0.25, 7.0, -1.0, 4.0, 5.0, 6.0];
        let a = tape.constant(3, 3, &a_data);
        assert_eq!(eye.matmul(a).value(), a_data.to_vec());
    }

    #[test]
    fn cross_entropy_uniform_binary() {
        let tape = Tape::new();
        let logits = tape.leaf(1, 2, &[0.0, 0.0], false);
        let loss = logits.cross_entropy(&[1]);
        assert!((loss.item() - 2.0f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn backward_sum_is_ones() {
        let tape = Tape::new();
        let x = tape.leaf(1, 3, &[2.0, -1.0, 0.5], true);
        let loss = x.sum();
        let grads = tape.backward(loss);
        assert_eq!(grads.wrt(x), vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn backward_square() {
        let tape = Tape::new();
        let x = tape.leaf(1, 2, &[1.0, 2.0], true);
        let loss = x.mul(x).sum();
        let grads = tape.backward(loss);
        assert_eq!(grads.wrt(x), vec![2.0, 4.0]);
    }

    #[test]
    fn unreached_leaf_gets_zero_grad() {
        let tape = Tape::new();
        let x = tape.leaf(1, 2, &[1.0, 2.0], true);
        let y = tape.leaf(1, 2, &[3.0, 4.0], true);
        let loss = x.sum();
        let grads = tape.backward(loss);
        assert_eq!(grads.wrt(y), vec![0.0, 0.0]);
    }

    #[test]
    fn layer_norm_statistics() {
        let tape = Tape::new();
        let x = tape.leaf(2, 5, &[1.0, 2.0, 3.0, 4.0, 5.0, -3.0, 0.5, 2.0, 9.0, -1.5], false);
        let y = x.layer_norm().value();
        for i in 0..2 {
            let row = &y[i * 5..(i + 1) * 5];
            let mean = row.iter().sum::<f64>() / 5.0;
            let var = row.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 5.0;
            assert!(mean.abs() < 1e-10);
            assert!((var - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn backward_deterministic() {
        let run = || {
            let tape = Tape::new();
            let x = tape.leaf(2, 2, &[0.3, -0.7, 1.1, 0.9], true);
            let w = tape.leaf(2, 2, &[0.5, 0.25, -0.4, 0.8], true);
            let loss = x.matmul(w).softmax_rows().mul(x).sum();
            let grads = tape.backward(loss);
            (grads.wrt(x), grads.wrt(w))
        };
        let (gx1, gw1) = run();
        let (gx2, gw2) = run();
        assert_eq!(gx1, gx2);
        assert_eq!(gw1, gw2);
    }

    #[test]
    #[should_panic(expected = "matmul shape mismatch")]
    fn matmul_shape_mismatch_panics() {
        let tape = Tape::new();
        let a = tape.constant(2, 3, &[0.0; 6]);
        let b = tape.constant(2, 3, &[0.0; 6]);
        a.matmul(b);
    }

    #[test]
    #[should_panic(expected = "non-finite input")]
    fn non_finite_leaf_panics() {
        let tape = Tape::new();
        tape.leaf(1, 2, &[1.0, f64::NAN], false);
    }

    #[test]
    #[should_panic(expected = "scalar loss")]
    fn non_scalar_loss_panics() {
        let tape = Tape::new();
        let x = tape.leaf(1, 2, &[1.0, 2.0], true);
        tape.backward(x);
    }

    #[test]
    fn masked_apply_blocks_gradient() {
        let tape = Tape::new();
        let w = tape.leaf(2, 2, &[1.0, 2.0, 3.0, 4.0], true);
        let mask = tape.constant(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let loss = w.apply_mask(mask).sum();
        let grads = tape.backward(loss);
        assert_eq!(grads.wrt(w), vec![1.0, 0.0, 0.0, 1.0]);
    }
}
