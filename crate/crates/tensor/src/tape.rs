//! Tape-based reverse-mode automatic differentiation over dense tensors.
//!
//! A [`Tape`] records every operation of a forward pass. [`Tape::backward`]
//! replays the record in reverse, visiting each operation exactly once, and
//! returns gradients for every bound parameter. Binding the same parameter
//! name more than once (weight sharing) accumulates its gradients.

use crate::error::{Error, Result};
use crate::tensor::{cast, Real, Tensor};

/// Handle to a value recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NodeId(usize);

enum Op {
    Leaf,
    Param(String),
    MatMul(usize, usize),
    Add(usize, usize),
    Sub(usize, usize),
    MulElem(usize, usize),
    /// Row-broadcast add: `a` is N x D, `b` has D values.
    AddRow(usize, usize),
    /// Row-broadcast multiply: `a` is N x D, `b` has D values.
    MulRow(usize, usize),
    Scale(usize, f64),
    Relu(usize),
    Gelu(usize),
    Sigmoid(usize),
    Tanh(usize),
    Transpose(usize),
    /// Row softmax; columns where `key_mask` is false get weight exactly 0.
    SoftmaxRows {
        x: usize,
        key_mask: Option<Vec<bool>>,
    },
    LayerNorm {
        x: usize,
        gamma: usize,
        beta: usize,
        eps: f64,
    },
    Embed {
        table: usize,
        indices: Vec<usize>,
    },
    ConcatCols(Vec<usize>),
    ConcatRows(Vec<usize>),
    SliceCols {
        x: usize,
        start: usize,
        len: usize,
    },
    /// Valid 1-D convolution: x is C_in x L, w is [C_out, C_in, K], b is C_out.
    Conv1d {
        x: usize,
        w: usize,
        b: usize,
    },
    MeanRows(usize),
    Row {
        x: usize,
        index: usize,
    },
    SumAll(usize),
    /// Columns where `keep` is false are written as literal zero.
    ColMask {
        x: usize,
        keep: Vec<bool>,
    },
    Dropout {
        x: usize,
        keep: Vec<bool>,
        scale: f64,
    },
    Reshape(usize),
}

struct Node<T> {
    value: Tensor<T>,
    op: Op,
}

/// Records a forward computation for reverse-mode differentiation.
pub struct Tape<T: Real> {
    nodes: Vec<Node<T>>,
    consumed: bool,
}

/// Per-parameter gradients keyed by name, as produced by [`Tape::backward`].
#[derive(Debug, Clone)]
pub struct Gradients<T> {
    map: std::collections::BTreeMap<String, Tensor<T>>,
}

impl<T: Real> Gradients<T> {
    pub fn get(&self, name: &str) -> Result<&Tensor<T>> {
        self.map
            .get(name)
            .ok_or_else(|| Error::UnknownParam(name.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Tensor<T>)> {
        self.map.iter()
    }

    pub fn names(&self) -> impl Iterator<Item = &String> {
        self.map.keys()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Elementwise `self += other`, used to accumulate per-sample gradients.
    pub fn add_assign(&mut self, other: &Gradients<T>) -> Result<()> {
        for (name, g) in other.iter() {
            match self.map.get_mut(name) {
                Some(acc) => {
                    if acc.shape() != g.shape() {
                        return Err(Error::ShapeMismatch {
                            op: "gradient accumulate",
                            detail: format!("{name}: {:?} vs {:?}", acc.shape(), g.shape()),
                        });
                    }
                    for (a, b) in acc.data_mut().iter_mut().zip(g.data()) {
                        *a = *a + *b;
                    }
                }
                None => {
                    self.map.insert(name.clone(), g.clone());
                }
            }
        }
        Ok(())
    }

    pub fn scale(&mut self, factor: f64) {
        for g in self.map.values_mut() {
            for v in g.data_mut() {
                *v = *v * cast::<T>(factor);
            }
        }
    }

    pub fn empty() -> Self {
        Self {
            map: std::collections::BTreeMap::new(),
        }
    }
}

impl<T: Real> Default for Tape<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> Tape<T> {
    pub fn new() -> Self {
        Self {
            nodes: Vec::new(),
            consumed: false,
        }
    }

    pub fn value(&self, id: NodeId) -> &Tensor<T> {
        &self.nodes[id.0].value
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Tensor<T>, op: Op, name: &'static str) -> Result<NodeId> {
        if !value.all_finite() {
            return Err(Error::NonFinite { op: name });
        }
        self.nodes.push(Node { value, op });
        Ok(NodeId(self.nodes.len() - 1))
    }

    /// Record a constant input. No gradient is reported for it.
    pub fn constant(&mut self, value: Tensor<T>) -> Result<NodeId> {
        self.push(value, Op::Leaf, "constant")
    }

    /// Bind a parameter by name. Gradients for all bindings of the same
    /// name are summed by [`Tape::backward`].
    pub fn param(&mut self, name: &str, value: &Tensor<T>) -> Result<NodeId> {
        self.push(value.clone(), Op::Param(name.to_string()), "param")
    }

    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (m, k) = self.value(a).dims2()?;
        let (k2, n) = self.value(b).dims2()?;
        if k != k2 {
            return Err(Error::ShapeMismatch {
                op: "matmul",
                detail: format!("{m}x{k} times {k2}x{n}"),
            });
        }
        let out = matmul_raw(self.value(a), self.value(b), m, k, n);
        self.push(out, Op::MatMul(a.0, b.0), "matmul")
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.zip_same_shape(a, b, "add", |x, y| x + y, Op::Add(a.0, b.0))
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.zip_same_shape(a, b, "sub", |x, y| x - y, Op::Sub(a.0, b.0))
    }

    pub fn mul_elem(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.zip_same_shape(a, b, "mul_elem", |x, y| x * y, Op::MulElem(a.0, b.0))
    }

    fn zip_same_shape(
        &mut self,
        a: NodeId,
        b: NodeId,
        name: &'static str,
        f: impl Fn(T, T) -> T,
        op: Op,
    ) -> Result<NodeId> {
        let (ta, tb) = (self.value(a), self.value(b));
        if ta.shape() != tb.shape() {
            return Err(Error::ShapeMismatch {
                op: name,
                detail: format!("{:?} vs {:?}", ta.shape(), tb.shape()),
            });
        }
        let data = ta.data().iter().zip(tb.data()).map(|(&x, &y)| f(x, y)).collect();
        let out = Tensor::from_vec(ta.shape(), data).expect("same shape");
        self.push(out, op, name)
    }

    pub fn add_row(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.rowwise(a, b, "add_row", |x, y| x + y, Op::AddRow(a.0, b.0))
    }

    pub fn mul_row(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.rowwise(a, b, "mul_row", |x, y| x * y, Op::MulRow(a.0, b.0))
    }

    fn rowwise(
        &mut self,
        a: NodeId,
        b: NodeId,
        name: &'static str,
        f: impl Fn(T, T) -> T,
        op: Op,
    ) -> Result<NodeId> {
        let (rows, cols) = self.value(a).dims2()?;
        if self.value(b).len() != cols {
            return Err(Error::ShapeMismatch {
                op: name,
                detail: format!("{cols} columns vs {} broadcast values", self.value(b).len()),
            });
        }
        let mut data = Vec::with_capacity(rows * cols);
        let (ta, tb) = (self.value(a), self.value(b));
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(ta.data()[i * cols + j], tb.data()[j]));
            }
        }
        let out = Tensor::from_vec(ta.shape(), data).expect("same shape");
        self.push(out, op, name)
    }

    pub fn scale(&mut self, a: NodeId, factor: f64) -> Result<NodeId> {
        let c = cast::<T>(factor);
        let out = self.value(a).map(|v| v * c);
        self.push(out, Op::Scale(a.0, factor), "scale")
    }

    pub fn relu(&mut self, a: NodeId) -> Result<NodeId> {
        let out = self.value(a).map(|v| if v > T::zero() { v } else { T::zero() });
        self.push(out, Op::Relu(a.0), "relu")
    }

    pub fn gelu(&mut self, a: NodeId) -> Result<NodeId> {
        let out = self.value(a).map(gelu_val);
        self.push(out, Op::Gelu(a.0), "gelu")
    }

    pub fn sigmoid(&mut self, a: NodeId) -> Result<NodeId> {
        let one = T::one();
        let out = self.value(a).map(|v| one / (one + (-v).exp()));
        self.push(out, Op::Sigmoid(a.0), "sigmoid")
    }

    pub fn tanh(&mut self, a: NodeId) -> Result<NodeId> {
        let out = self.value(a).map(|v| v.tanh());
        self.push(out, Op::Tanh(a.0), "tanh")
    }

    pub fn transpose(&mut self, a: NodeId) -> Result<NodeId> {
        let (rows, cols) = self.value(a).dims2()?;
        let ta = self.value(a);
        let mut data = vec![T::zero(); rows * cols];
        for i in 0..rows {
            for j in 0..cols {
                data[j * rows + i] = ta.data()[i * cols + j];
            }
        }
        let out = Tensor::from_vec(&[cols, rows], data).expect("transposed shape");
        self.push(out, Op::Transpose(a.0), "transpose")
    }

    /// Row-wise softmax. When `key_mask` is given, masked columns are
    /// excluded from the max/sum and their output weight is exactly 0.
    pub fn softmax_rows(&mut self, x: NodeId, key_mask: Option<&[bool]>) -> Result<NodeId> {
        let (rows, cols) = self.value(x).dims2()?;
        if let Some(mask) = key_mask {
            if mask.len() != cols {
                return Err(Error::ShapeMismatch {
                    op: "softmax_rows",
                    detail: format!("{cols} columns vs {} mask entries", mask.len()),
                });
            }
            if !mask.iter().any(|&m| m) {
                return Err(Error::InvalidArg("softmax key mask is all false".into()));
            }
        }
        let tx = self.value(x);
        let mut data = vec![T::zero(); rows * cols];
        for i in 0..rows {
            let row = &tx.data()[i * cols..(i + 1) * cols];
            let mut max = T::neg_infinity();
            for (j, &v) in row.iter().enumerate() {
                if key_mask.map_or(true, |m| m[j]) && v > max {
                    max = v;
                }
            }
            let mut sum = T::zero();
            for (j, &v) in row.iter().enumerate() {
                if key_mask.map_or(true, |m| m[j]) {
                    let e = (v - max).exp();
                    data[i * cols + j] = e;
                    sum = sum + e;
                }
            }
            for j in 0..cols {
                if key_mask.map_or(true, |m| m[j]) {
                    data[i * cols + j] = data[i * cols + j] / sum;
                }
            }
        }
        let out = Tensor::from_vec(tx.shape(), data).expect("same shape");
        self.push(
            out,
            Op::SoftmaxRows {
                x: x.0,
                key_mask: key_mask.map(|m| m.to_vec()),
            },
            "softmax_rows",
        )
    }

    /// Row-wise layer normalization with affine transform.
    pub fn layer_norm(&mut self, x: NodeId, gamma: NodeId, beta: NodeId, eps: f64) -> Result<NodeId> {
        let (rows, cols) = self.value(x).dims2()?;
        if self.value(gamma).len() != cols || self.value(beta).len() != cols {
            return Err(Error::ShapeMismatch {
                op: "layer_norm",
                detail: format!(
                    "{cols} columns vs gamma {} / beta {}",
                    self.value(gamma).len(),
                    self.value(beta).len()
                ),
            });
        }
        let (tx, tg, tb) = (self.value(x), self.value(gamma), self.value(beta));
        let mut data = vec![T::zero(); rows * cols];
        for i in 0..rows {
            let row = &tx.data()[i * cols..(i + 1) * cols];
            let (mean, var) = mean_var(row);
            let denom = (var + cast::<T>(eps)).sqrt();
            for j in 0..cols {
                let norm = (row[j] - mean) / denom;
                data[i * cols + j] = norm * tg.data()[j] + tb.data()[j];
            }
        }
        let out = Tensor::from_vec(tx.shape(), data).expect("same shape");
        self.push(
            out,
            Op::LayerNorm {
                x: x.0,
                gamma: gamma.0,
                beta: beta.0,
                eps,
            },
            "layer_norm",
        )
    }

    /// Look up rows of `table` by index. Gradients flow only to the
    /// selected rows.
    pub fn embed(&mut self, table: NodeId, indices: &[usize]) -> Result<NodeId> {
        let (rows, cols) = self.value(table).dims2()?;
        if let Some(&bad) = indices.iter().find(|&&i| i >= rows) {
            return Err(Error::InvalidArg(format!(
                "embedding index {bad} out of range for {rows} rows"
            )));
        }
        let tt = self.value(table);
        let mut data = Vec::with_capacity(indices.len() * cols);
        for &i in indices {
            data.extend_from_slice(&tt.data()[i * cols..(i + 1) * cols]);
        }
        let out = Tensor::from_vec(&[indices.len(), cols], data).expect("lookup shape");
        self.push(
            out,
            Op::Embed {
                table: table.0,
                indices: indices.to_vec(),
            },
            "embed",
        )
    }

    pub fn concat_cols(&mut self, parts: &[NodeId]) -> Result<NodeId> {
        if parts.is_empty() {
            return Err(Error::InvalidArg("concat_cols of zero tensors".into()));
        }
        let (rows, _) = self.value(parts[0]).dims2()?;
        let mut widths = Vec::with_capacity(parts.len());
        for &p in parts {
            let (r, c) = self.value(p).dims2()?;
            if r != rows {
                return Err(Error::ShapeMismatch {
                    op: "concat_cols",
                    detail: format!("{rows} rows vs {r} rows"),
                });
            }
            widths.push(c);
        }
        let total: usize = widths.iter().sum();
        let mut data = Vec::with_capacity(rows * total);
        for i in 0..rows {
            for (&p, &w) in parts.iter().zip(&widths) {
                let t = self.value(p);
                data.extend_from_slice(&t.data()[i * w..(i + 1) * w]);
            }
        }
        let out = Tensor::from_vec(&[rows, total], data).expect("concat shape");
        self.push(out, Op::ConcatCols(parts.iter().map(|p| p.0).collect()), "concat_cols")
    }

    pub fn concat_rows(&mut self, parts: &[NodeId]) -> Result<NodeId> {
        if parts.is_empty() {
            return Err(Error::InvalidArg("concat_rows of zero tensors".into()));
        }
        let (_, cols) = self.value(parts[0]).dims2()?;
        let mut total = 0usize;
        for &p in parts {
            let (r, c) = self.value(p).dims2()?;
            if c != cols {
                return Err(Error::ShapeMismatch {
                    op: "concat_rows",
                    detail: format!("{cols} cols vs {c} cols"),
                });
            }
            total += r;
        }
        let mut data = Vec::with_capacity(total * cols);
        for &p in parts {
            data.extend_from_slice(self.value(p).data());
        }
        let out = Tensor::from_vec(&[total, cols], data).expect("concat shape");
        self.push(out, Op::ConcatRows(parts.iter().map(|p| p.0).collect()), "concat_rows")
    }

    pub fn slice_cols(&mut self, x: NodeId, start: usize, len: usize) -> Result<NodeId> {
        let (rows, cols) = self.value(x).dims2()?;
        if start + len > cols {
            return Err(Error::ShapeMismatch {
                op: "slice_cols",
                detail: format!("slice {start}..{} of {cols} columns", start + len),
            });
        }
        let tx = self.value(x);
        let mut data = Vec::with_capacity(rows * len);
        for i in 0..rows {
            data.extend_from_slice(&tx.data()[i * cols + start..i * cols + start + len]);
        }
        let out = Tensor::from_vec(&[rows, len], data).expect("slice shape");
        self.push(out, Op::SliceCols { x: x.0, start, len }, "slice_cols")
    }

    pub fn conv1d(&mut self, x: NodeId, w: NodeId, b: NodeId) -> Result<NodeId> {
        let xs = self.value(x).shape().to_vec();
        let ws = self.value(w).shape().to_vec();
        if xs.len() != 2 || ws.len() != 3 {
            return Err(Error::ShapeMismatch {
                op: "conv1d",
                detail: format!("x {:?}, w {:?}", xs, ws),
            });
        }
        let (c_in, l) = (xs[0], xs[1]);
        let (c_out, wc_in, k) = (ws[0], ws[1], ws[2]);
        if wc_in != c_in || k > l || self.value(b).len() != c_out {
            return Err(Error::ShapeMismatch {
                op: "conv1d",
                detail: format!("x {:?}, w {:?}, b {:?}", xs, ws, self.value(b).shape()),
            });
        }
        let l_out = l - k + 1;
        let (tx, tw, tb) = (self.value(x), self.value(w), self.value(b));
        let mut data = vec![T::zero(); c_out * l_out];
        for o in 0..c_out {
            for t in 0..l_out {
                let mut acc = tb.data()[o];
                for c in 0..c_in {
                    for kk in 0..k {
                        acc = acc + tw.data()[o * c_in * k + c * k + kk] * tx.data()[c * l + t + kk];
                    }
                }
                data[o * l_out + t] = acc;
            }
        }
        let out = Tensor::from_vec(&[c_out, l_out], data).expect("conv shape");
        self.push(
            out,
            Op::Conv1d {
                x: x.0,
                w: w.0,
                b: b.0,
            },
            "conv1d",
        )
    }

    /// Mean over rows: N x D -> 1 x D.
    pub fn mean_rows(&mut self, x: NodeId) -> Result<NodeId> {
        let (rows, cols) = self.value(x).dims2()?;
        let tx = self.value(x);
        let inv = cast::<T>(1.0 / rows as f64);
        let mut data = vec![T::zero(); cols];
        for i in 0..rows {
            for j in 0..cols {
                data[j] = data[j] + tx.data()[i * cols + j];
            }
        }
        for v in &mut data {
            *v = *v * inv;
        }
        let out = Tensor::from_vec(&[1, cols], data).expect("mean shape");
        self.push(out, Op::MeanRows(x.0), "mean_rows")
    }

    pub fn row(&mut self, x: NodeId, index: usize) -> Result<NodeId> {
        let (rows, cols) = self.value(x).dims2()?;
        if index >= rows {
            return Err(Error::InvalidArg(format!("row {index} of {rows}")));
        }
        let tx = self.value(x);
        let data = tx.data()[index * cols..(index + 1) * cols].to_vec();
        let out = Tensor::from_vec(&[1, cols], data).expect("row shape");
        self.push(out, Op::Row { x: x.0, index }, "row")
    }

    pub fn sum_all(&mut self, x: NodeId) -> Result<NodeId> {
        let s: T = self.value(x).data().iter().copied().sum();
        self.push(Tensor::scalar(s), Op::SumAll(x.0), "sum_all")
    }

    /// Zero out columns where `keep` is false. The zero is written
    /// literally, so masked columns are bit-identical regardless of input.
    pub fn col_mask(&mut self, x: NodeId, keep: &[bool]) -> Result<NodeId> {
        let (rows, cols) = self.value(x).dims2()?;
        if keep.len() != cols {
            return Err(Error::ShapeMismatch {
                op: "col_mask",
                detail: format!("{cols} columns vs {} mask entries", keep.len()),
            });
        }
        let tx = self.value(x);
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(if keep[j] { tx.data()[i * cols + j] } else { T::zero() });
            }
        }
        let out = Tensor::from_vec(tx.shape(), data).expect("same shape");
        self.push(
            out,
            Op::ColMask {
                x: x.0,
                keep: keep.to_vec(),
            },
            "col_mask",
        )
    }

    /// Inverted dropout with a caller-supplied keep mask.
    pub fn dropout(&mut self, x: NodeId, keep: &[bool], rate: f64) -> Result<NodeId> {
        if keep.len() != self.value(x).len() {
            return Err(Error::ShapeMismatch {
                op: "dropout",
                detail: format!("{} values vs {} mask entries", self.value(x).len(), keep.len()),
            });
        }
        if !(0.0..1.0).contains(&rate) {
            return Err(Error::InvalidArg(format!("dropout rate {rate}")));
        }
        let scale = 1.0 / (1.0 - rate);
        let sc = cast::<T>(scale);
        let tx = self.value(x);
        let data = tx
            .data()
            .iter()
            .zip(keep)
            .map(|(&v, &k)| if k { v * sc } else { T::zero() })
            .collect();
        let out = Tensor::from_vec(tx.shape(), data).expect("same shape");
        self.push(
            out,
            Op::Dropout {
                x: x.0,
                keep: keep.to_vec(),
                scale,
            },
            "dropout",
        )
    }

    pub fn reshape(&mut self, x: NodeId, shape: &[usize]) -> Result<NodeId> {
        let n: usize = shape.iter().product();
        if n != self.value(x).len() {
            return Err(Error::ShapeMismatch {
                op: "reshape",
                detail: format!("{:?} to {:?}", self.value(x).shape(), shape),
            });
        }
        let out = Tensor::from_vec(shape, self.value(x).data().to_vec()).expect("same numel");
        self.push(out, Op::Reshape(x.0), "reshape")
    }

    /// Reverse pass from a scalar loss. Returns per-parameter gradients
    /// keyed by name; every other intermediate is dropped.
    pub fn backward(&mut self, loss: NodeId) -> Result<Gradients<T>> {
        if self.consumed {
            return Err(Error::TapeConsumed);
        }
        if !self.value(loss).is_scalar() {
            return Err(Error::LossNotScalar(self.value(loss).shape().to_vec()));
        }
        self.consumed = true;

        let mut grads: Vec<Option<Tensor<T>>> = vec![None; self.nodes.len()];
        grads[loss.0] = Some(Tensor::scalar(T::one()));

        for idx in (0..self.nodes.len()).rev() {
            let g = match grads[idx].take() {
                Some(g) => g,
                None => continue,
            };
            // Keep parameter grads; intermediates are freed as we go.
            if matches!(self.nodes[idx].op, Op::Param(_)) {
                grads[idx] = Some(g);
                continue;
            }
            self.backprop_one(idx, &g, &mut grads)?;
        }

        let mut map: std::collections::BTreeMap<String, Tensor<T>> = std::collections::BTreeMap::new();
        for (idx, node) in self.nodes.iter().enumerate() {
            if let Op::Param(name) = &node.op {
                let g = grads[idx]
                    .take()
                    .unwrap_or_else(|| Tensor::zeros(node.value.shape()));
                if !g.all_finite() {
                    return Err(Error::NonFinite { op: "backward" });
                }
                match map.entry(name.clone()) {
                    std::collections::btree_map::Entry::Vacant(e) => {
                        e.insert(g);
                    }
                    std::collections::btree_map::Entry::Occupied(mut e) => {
                        for (a, b) in e.get_mut().data_mut().iter_mut().zip(g.data()) {
                            *a = *a + *b;
                        }
                    }
                }
            }
        }
        Ok(Gradients { map })
    }

    fn accum(grads: &mut [Option<Tensor<T>>], idx: usize, shape: &[usize], add: impl FnOnce(&mut Tensor<T>)) {
        let slot = grads[idx].get_or_insert_with(|| Tensor::zeros(shape));
        add(slot);
    }

    fn backprop_one(&self, idx: usize, g: &Tensor<T>, grads: &mut [Option<Tensor<T>>]) -> Result<()> {
        let node = &self.nodes[idx];
        match &node.op {
            Op::Leaf | Op::Param(_) => {}
            Op::MatMul(a, b) => {
                let (m, k) = self.nodes[*a].value.dims2()?;
                let (_, n) = self.nodes[*b].value.dims2()?;
                let ta = &self.nodes[*a].value;
                let tb = &self.nodes[*b].value;
                // dA = g . B^T
                let da = matmul_raw_tb(g, tb, m, n, k);
                // dB = A^T . g
                let db = matmul_raw_ta(ta, g, k, m, n);
                Self::accum(grads, *a, ta.shape(), |s| add_into(s, &da));
                Self::accum(grads, *b, tb.shape(), |s| add_into(s, &db));
            }
            Op::Add(a, b) => {
                let sa = self.nodes[*a].value.shape().to_vec();
                let sb = self.nodes[*b].value.shape().to_vec();
                Self::accum(grads, *a, &sa, |s| add_into(s, g));
                Self::accum(grads, *b, &sb, |s| add_into(s, g));
            }
            Op::Sub(a, b) => {
                let sa = self.nodes[*a].value.shape().to_vec();
                let sb = self.nodes[*b].value.shape().to_vec();
                Self::accum(grads, *a, &sa, |s| add_into(s, g));
                Self::accum(grads, *b, &sb, |s| sub_into(s, g));
            }
            Op::MulElem(a, b) => {
                let ta = self.nodes[*a].value.clone();
                let tb = self.nodes[*b].value.clone();
                Self::accum(grads, *a, ta.shape(), |s| {
                    for ((sv, &gv), &bv) in s.data_mut().iter_mut().zip(g.data()).zip(tb.data()) {
                        *sv = *sv + gv * bv;
                    }
                });
                Self::accum(grads, *b, tb.shape(), |s| {
                    for ((sv, &gv), &av) in s.data_mut().iter_mut().zip(g.data()).zip(ta.data()) {
                        *sv = *sv + gv * av;
                    }
                });
            }
            Op::AddRow(a, b) => {
                let (rows, cols) = self.nodes[*a].value.dims2()?;
                let sa = self.nodes[*a].value.shape().to_vec();
                let sb = self.nodes[*b].value.shape().to_vec();
                Self::accum(grads, *a, &sa, |s| add_into(s, g));
                Self::accum(grads, *b, &sb, |s| {
                    for i in 0..rows {
                        for j in 0..cols {
                            s.data_mut()[j] = s.data_mut()[j] + g.data()[i * cols + j];
                        }
                    }
                });
            }
            Op::MulRow(a, b) => {
                let (rows, cols) = self.nodes[*a].value.dims2()?;
                let ta = self.nodes[*a].value.clone();
                let tb = self.nodes[*b].value.clone();
                Self::accum(grads, *a, ta.shape(), |s| {
                    for i in 0..rows {
                        for j in 0..cols {
                            let p = i * cols + j;
                            s.data_mut()[p] = s.data_mut()[p] + g.data()[p] * tb.data()[j];
                        }
                    }
                });
                Self::accum(grads, *b, tb.shape(), |s| {
                    for i in 0..rows {
                        for j in 0..cols {
                            let p = i * cols + j;
                            s.data_mut()[j] = s.data_mut()[j] + g.data()[p] * ta.data()[p];
                        }
                    }
                });
            }
            Op::Scale(a, factor) => {
                let c = cast::<T>(*factor);
                let sa = self.nodes[*a].value.shape().to_vec();
                Self::accum(grads, *a, &sa, |s| {
                    for (sv, &gv) in s.data_mut().iter_mut().zip(g.data()) {
                        *sv = *sv + gv * c;
                    }
                });
            }
            Op::Relu(a) => {
                let ta = self.nodes[*a].value.clone();
                Self::accum(grads, *a, ta.shape(), |s| {
                    for ((sv, &gv), &xv) in s.data_mut().iter_mut().zip(g.data()).zip(ta.data()) {
                        if xv > T::zero() {
                            *sv = *sv + gv;
                        }
                    }
                });
            }
            Op::Gelu(a) => {
                let ta = self.nodes[*a].value.clone();
                Self::accum(grads, *a, ta.shape(), |s| {
                    for ((sv, &gv), &xv) in s.data_mut().iter_mut().zip(g.data()).zip(ta.data()) {
                        *sv = *sv + gv * gelu_grad(xv);
                    }
                });
            }
            Op::Sigmoid(a) => {
                let ty = node.value.clone();
                let sa = self.nodes[*a].value.shape().to_vec();
                Self::accum(grads, *a, &sa, |s| {
                    for ((sv, &gv), &yv) in s.data_mut().iter_mut().zip(g.data()).zip(ty.data()) {
                        *sv = *sv + gv * yv * (T::one() - yv);
                    }
                });
            }
            Op::Tanh(a) => {
                let ty = node.value.clone();
                let sa = self.nodes[*a].value.shape().to_vec();
                Self::accum(grads, *a, &sa, |s| {
                    for ((sv, &gv), &yv) in s.data_mut().iter_mut().zip(g.data()).zip(ty.data()) {
                        *sv = *sv + gv * (T::one() - yv * yv);
                    }
                });
            }
            Op::Transpose(a) => {
                let (rows, cols) = self.nodes[*a].value.dims2()?;
                let sa = self.nodes[*a].value.shape().to_vec();
                Self::accum(grads, *a, &sa, |s| {
                    for i in 0..rows {
                        for j in 0..cols {
                            let p = i * cols + j;
                            s.data_mut()[p] = s.data_mut()[p] + g.data()[j * rows + i];
                        }
                    }
                });
            }
            Op::SoftmaxRows { x, key_mask } => {
                let (rows, cols) = node.value.dims2()?;
                let ty = node.value.clone();
                let sa = self.nodes[*x].value.shape().to_vec();
                Self::accum(grads, *x, &sa, |s| {
                    for i in 0..rows {
                        let y = &ty.data()[i * cols..(i + 1) * cols];
                        let gr = &g.data()[i * cols..(i + 1) * cols];
                        let mut dot = T::zero();
                        for j in 0..cols {
                            if key_mask.as_ref().map_or(true, |m| m[j]) {
                                dot = dot + gr[j] * y[j];
                            }
                        }
                        for j in 0..cols {
                            if key_mask.as_ref().map_or(true, |m| m[j]) {
                                let p = i * cols + j;
                                s.data_mut()[p] = s.data_mut()[p] + y[j] * (gr[j] - dot);
                            }
                        }
                    }
                });
            }
            Op::LayerNorm { x, gamma, beta, eps } => {
                let (rows, cols) = self.nodes[*x].value.dims2()?;
                let tx = self.nodes[*x].value.clone();
                let tg = self.nodes[*gamma].value.clone();
                let inv_d = cast::<T>(1.0 / cols as f64);
                let sx = tx.shape().to_vec();
                let sg = tg.shape().to_vec();
                let sb = self.nodes[*beta].value.shape().to_vec();

                // Precompute per-row normalized values and inverse stddev.
                let mut xhat = vec![T::zero(); rows * cols];
                let mut inv_std = vec![T::zero(); rows];
                for i in 0..rows {
                    let row = &tx.data()[i * cols..(i + 1) * cols];
                    let (mean, var) = mean_var(row);
                    let istd = T::one() / (var + cast::<T>(*eps)).sqrt();
                    inv_std[i] = istd;
                    for j in 0..cols {
                        xhat[i * cols + j] = (row[j] - mean) * istd;
                    }
                }

                Self::accum(grads, *gamma, &sg, |s| {
                    for i in 0..rows {
                        for j in 0..cols {
                            let p = i * cols + j;
                            s.data_mut()[j] = s.data_mut()[j] + g.data()[p] * xhat[p];
                        }
                    }
                });
                Self::accum(grads, *beta, &sb, |s| {
                    for i in 0..rows {
                        for j in 0..cols {
                            s.data_mut()[j] = s.data_mut()[j] + g.data()[i * cols + j];
                        }
                    }
                });
                Self::accum(grads, *x, &sx, |s| {
                    for i in 0..rows {
                        // h = gamma * g (upstream through the affine part)
                        let mut mean_h = T::zero();
                        let mut mean_hx = T::zero();
                        for j in 0..cols {
                            let h = tg.data()[j] * g.data()[i * cols + j];
                            mean_h = mean_h + h;
                            mean_hx = mean_hx + h * xhat[i * cols + j];
                        }
                        mean_h = mean_h * inv_d;
                        mean_hx = mean_hx * inv_d;
                        for j in 0..cols {
                            let p = i * cols + j;
                            let h = tg.data()[j] * g.data()[p];
                            s.data_mut()[p] =
                                s.data_mut()[p] + (h - mean_h - xhat[p] * mean_hx) * inv_std[i];
                        }
                    }
                });
            }
            Op::Embed { table, indices } => {
                let (_, cols) = self.nodes[*table].value.dims2()?;
                let st = self.nodes[*table].value.shape().to_vec();
                Self::accum(grads, *table, &st, |s| {
                    for (row_out, &row_in) in indices.iter().enumerate() {
                        for j in 0..cols {
                            let p = row_in * cols + j;
                            s.data_mut()[p] = s.data_mut()[p] + g.data()[row_out * cols + j];
                        }
                    }
                });
            }
            Op::ConcatCols(parts) => {
                let (rows, _) = node.value.dims2()?;
                let mut start = 0usize;
                let total = node.value.shape()[node.value.rank() - 1];
                for &p in parts {
                    let (_, w) = self.nodes[p].value.dims2()?;
                    let sp = self.nodes[p].value.shape().to_vec();
                    Self::accum(grads, p, &sp, |s| {
                        for i in 0..rows {
                            for j in 0..w {
                                let q = i * w + j;
                                s.data_mut()[q] = s.data_mut()[q] + g.data()[i * total + start + j];
                            }
                        }
                    });
                    start += w;
                }
            }
            Op::ConcatRows(parts) => {
                let mut start = 0usize;
                for &p in parts {
                    let (r, c) = self.nodes[p].value.dims2()?;
                    let sp = self.nodes[p].value.shape().to_vec();
                    Self::accum(grads, p, &sp, |s| {
                        for q in 0..r * c {
                            s.data_mut()[q] = s.data_mut()[q] + g.data()[start * c + q];
                        }
                    });
                    start += r;
                }
            }
            Op::SliceCols { x, start, len } => {
                let (rows, cols) = self.nodes[*x].value.dims2()?;
                let sx = self.nodes[*x].value.shape().to_vec();
                Self::accum(grads, *x, &sx, |s| {
                    for i in 0..rows {
                        for j in 0..*len {
                            let p = i * cols + start + j;
                            s.data_mut()[p] = s.data_mut()[p] + g.data()[i * len + j];
                        }
                    }
                });
            }
            Op::Conv1d { x, w, b } => {
                let xs = self.nodes[*x].value.shape().to_vec();
                let ws = self.nodes[*w].value.shape().to_vec();
                let (c_in, l) = (xs[0], xs[1]);
                let (c_out, k) = (ws[0], ws[2]);
                let l_out = l - k + 1;
                let tx = self.nodes[*x].value.clone();
                let tw = self.nodes[*w].value.clone();
                let sb = self.nodes[*b].value.shape().to_vec();
                Self::accum(grads, *x, &xs, |s| {
                    for o in 0..c_out {
                        for t in 0..l_out {
                            let gv = g.data()[o * l_out + t];
                            for c in 0..c_in {
                                for kk in 0..k {
                                    let p = c * l + t + kk;
                                    s.data_mut()[p] =
                                        s.data_mut()[p] + gv * tw.data()[o * c_in * k + c * k + kk];
                                }
                            }
                        }
                    }
                });
                Self::accum(grads, *w, &ws, |s| {
                    for o in 0..c_out {
                        for t in 0..l_out {
                            let gv = g.data()[o * l_out + t];
                            for c in 0..c_in {
                                for kk in 0..k {
                                    let p = o * c_in * k + c * k + kk;
                                    s.data_mut()[p] = s.data_mut()[p] + gv * tx.data()[c * l + t + kk];
                                }
                            }
                        }
                    }
                });
                Self::accum(grads, *b, &sb, |s| {
                    for o in 0..c_out {
                        for t in 0..l_out {
                            s.data_mut()[o] = s.data_mut()[o] + g.data()[o * l_out + t];
                        }
                    }
                });
            }
            Op::MeanRows(a) => {
                let (rows, cols) = self.nodes[*a].value.dims2()?;
                let inv = cast::<T>(1.0 / rows as f64);
                let sa = self.nodes[*a].value.shape().to_vec();
                Self::accum(grads, *a, &sa, |s| {
                    for i in 0..rows {
                        for j in 0..cols {
                            let p = i * cols + j;
                            s.data_mut()[p] = s.data_mut()[p] + g.data()[j] * inv;
                        }
                    }
                });
            }
            Op::Row { x, index } => {
                let (_, cols) = self.nodes[*x].value.dims2()?;
                let sx = self.nodes[*x].value.shape().to_vec();
                Self::accum(grads, *x, &sx, |s| {
                    for j in 0..cols {
                        let p = index * cols + j;
                        s.data_mut()[p] = s.data_mut()[p] + g.data()[j];
                    }
                });
            }
            Op::SumAll(a) => {
                let gv = g.data()[0];
                let sa = self.nodes[*a].value.shape().to_vec();
                Self::accum(grads, *a, &sa, |s| {
                    for sv in s.data_mut() {
                        *sv = *sv + gv;
                    }
                });
            }
            Op::ColMask { x, keep } => {
                let (rows, cols) = self.nodes[*x].value.dims2()?;
                let sx = self.nodes[*x].value.shape().to_vec();
                Self::accum(grads, *x, &sx, |s| {
                    for i in 0..rows {
                        for j in 0..cols {
                            if keep[j] {
                                let p = i * cols + j;
                                s.data_mut()[p] = s.data_mut()[p] + g.data()[p];
                            }
                        }
                    }
                });
            }
            Op::Dropout { x, keep, scale } => {
                let sc = cast::<T>(*scale);
                let sx = self.nodes[*x].value.shape().to_vec();
                Self::accum(grads, *x, &sx, |s| {
                    for ((sv, &gv), &kv) in s.data_mut().iter_mut().zip(g.data()).zip(keep) {
                        if kv {
                            *sv = *sv + gv * sc;
                        }
                    }
                });
            }
            Op::Reshape(a) => {
                let sa = self.nodes[*a].value.shape().to_vec();
                Self::accum(grads, *a, &sa, |s| {
                    for (sv, &gv) in s.data_mut().iter_mut().zip(g.data()) {
                        *sv = *sv + gv;
                    }
                });
            }
        }
        Ok(())
    }
}

fn mean_var<T: Real>(row: &[T]) -> (T, T) {
    let n = cast::<T>(row.len() as f64);
    let mut mean = T::zero();
    for &v in row {
        mean = mean + v;
    }
    mean = mean / n;
    let mut var = T::zero();
    for &v in row {
        let d = v - mean;
        var = var + d * d;
    }
    (mean, var / n)
}

fn add_into<T: Real>(acc: &mut Tensor<T>, g: &Tensor<T>) {
    for (a, &b) in acc.data_mut().iter_mut().zip(g.data()) {
        *a = *a + b;
    }
}

fn sub_into<T: Real>(acc: &mut Tensor<T>, g: &Tensor<T>) {
    for (a, &b) in acc.data_mut().iter_mut().zip(g.data()) {
        *a = *a - b;
    }
}

fn matmul_raw<T: Real>(a: &Tensor<T>, b: &Tensor<T>, m: usize, k: usize, n: usize) -> Tensor<T> {
    let mut out = vec![T::zero(); m * n];
    let ad = a.data();
    let bd = b.data();
    for i in 0..m {
        for p in 0..k {
            let av = ad[i * k + p];
            if av == T::zero() {
                continue;
            }
            let brow = &bd[p * n..(p + 1) * n];
            let orow = &mut out[i * n..(i + 1) * n];
            for (o, &bv) in orow.iter_mut().zip(brow) {
                *o = *o + av * bv;
            }
        }
    }
    Tensor::from_vec(&[m, n], out).expect("matmul shape")
}

/// g (m x n) times B^T (n x k) without materializing the transpose.
fn matmul_raw_tb<T: Real>(g: &Tensor<T>, b: &Tensor<T>, m: usize, n: usize, k: usize) -> Tensor<T> {
    let mut out = vec![T::zero(); m * k];
    let gd = g.data();
    let bd = b.data();
    for i in 0..m {
        for j in 0..k {
            let brow = &bd[j * n..(j + 1) * n];
            let grow = &gd[i * n..(i + 1) * n];
            let mut acc = T::zero();
            for (&gv, &bv) in grow.iter().zip(brow) {
                acc = acc + gv * bv;
            }
            out[i * k + j] = acc;
        }
    }
    Tensor::from_vec(&[m, k], out).expect("matmul shape")
}

/// A^T (k x m) times g (m x n) without materializing the transpose.
fn matmul_raw_ta<T: Real>(a: &Tensor<T>, g: &Tensor<T>, k: usize, m: usize, n: usize) -> Tensor<T> {
    let mut out = vec![T::zero(); k * n];
    let ad = a.data();
    let gd = g.data();
    for i in 0..m {
        for p in 0..k {
            let av = ad[i * k + p];
            if av == T::zero() {
                continue;
            }
            let grow = &gd[i * n..(i + 1) * n];
            let orow = &mut out[p * n..(p + 1) * n];
            for (o, &gv) in orow.iter_mut().zip(grow) {
                *o = *o + av * gv;
            }
        }
    }
    Tensor::from_vec(&[k, n], out).expect("matmul shape")
}

fn gelu_val<T: Real>(x: T) -> T {
    // tanh approximation of GELU
    let c = cast::<T>(0.7978845608028654); // sqrt(2/pi)
    let a = cast::<T>(0.044715);
    let half = cast::<T>(0.5);
    let u = c * (x + a * x * x * x);
    half * x * (T::one() + u.tanh())
}

fn gelu_grad<T: Real>(x: T) -> T {
    let c = cast::<T>(0.7978845608028654);
    let a = cast::<T>(0.044715);
    let half = cast::<T>(0.5);
    let three = cast::<T>(3.0);
    let u = c * (x + a * x * x * x);
    let t = u.tanh();
    let sech2 = T::one() - t * t;
    half * (T::one() + t) + half * x * sech2 * c * (T::one() + three * a * x * x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t64(shape: &[usize], data: &[f64]) -> Tensor<f64> {
        Tensor::from_vec(shape, data.to_vec()).unwrap()
    }

    #[test]
    fn matmul_shape_rule() {
        let mut tape = Tape::<f64>::new();
        let a = tape.constant(Tensor::ones(&[2, 3])).unwrap();
        let b = tape.constant(Tensor::ones(&[3, 4])).unwrap();
        let c = tape.matmul(a, b).unwrap();
        assert_eq!(tape.value(c).shape(), &[2, 4]);
        assert!(tape.value(c).data().iter().all(|&v| v == 3.0));
    }

    #[test]
    fn matmul_rejects_mismatch() {
        let mut tape = Tape::<f64>::new();
        let a = tape.constant(Tensor::ones(&[2, 3])).unwrap();
        let b = tape.constant(Tensor::ones(&[4, 2])).unwrap();
        assert!(tape.matmul(a, b).is_err());
    }

    #[test]
    fn softmax_of_zeros_is_uniform() {
        let mut tape = Tape::<f64>::new();
        let x = tape.constant(t64(&[1, 3], &[0.0, 0.0, 0.0])).unwrap();
        let y = tape.softmax_rows(x, None).unwrap();
        for &v in tape.value(y).data() {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn softmax_rows_sum_to_one() {
        let mut tape = Tape::<f64>::new();
        let x = tape
            .constant(t64(&[2, 4], &[1.0, -2.0, 0.5, 3.0, 10.0, 10.0, -10.0, 0.0]))
            .unwrap();
        let y = tape.softmax_rows(x, None).unwrap();
        for i in 0..2 {
            let s: f64 = tape.value(y).data()[i * 4..(i + 1) * 4].iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn masked_softmax_zeroes_masked_columns_exactly() {
        let mut tape = Tape::<f64>::new();
        let x = tape.constant(t64(&[1, 4], &[5.0, 1.0, 9.0, 2.0])).unwrap();
        let y = tape.softmax_rows(x, Some(&[true, false, true, false])).unwrap();
        let d = tape.value(y).data();
        assert_eq!(d[1].to_bits(), 0.0f64.to_bits());
        assert_eq!(d[3].to_bits(), 0.0f64.to_bits());
        assert!((d[0] + d[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn layer_norm_of_constant_row_is_zero_before_affine() {
        let mut tape = Tape::<f64>::new();
        let x = tape.constant(t64(&[1, 4], &[3.0, 3.0, 3.0, 3.0])).unwrap();
        let gamma = tape.constant(Tensor::ones(&[4])).unwrap();
        let beta = tape.constant(Tensor::zeros(&[4])).unwrap();
        let y = tape.layer_norm(x, gamma, beta, 1e-5).unwrap();
        for &v in tape.value(y).data() {
            assert!(v.abs() < 1e-9);
        }
    }

    #[test]
    fn layer_norm_rows_have_zero_mean() {
        let mut tape = Tape::<f64>::new();
        let x = tape
            .constant(t64(&[2, 3], &[1.0, 2.0, 4.0, -1.0, 0.0, 7.0]))
            .unwrap();
        let gamma = tape.constant(Tensor::ones(&[3])).unwrap();
        let beta = tape.constant(Tensor::zeros(&[3])).unwrap();
        let y = tape.layer_norm(x, gamma, beta, 1e-5).unwrap();
        for i in 0..2 {
            let mu: f64 = tape.value(y).data()[i * 3..(i + 1) * 3].iter().sum::<f64>() / 3.0;
            assert!(mu.abs() < 1e-9);
        }
    }

    #[test]
    fn backward_of_linear_loss_returns_fixed_input() {
        // loss = sum(w * x) with x fixed => grad(w) = x
        let mut tape = Tape::<f64>::new();
        let w = tape
            .param("w", &t64(&[1, 3], &[2.0, -1.0, 0.5]))
            .unwrap();
        let x = tape.constant(t64(&[1, 3], &[4.0, 5.0, 6.0])).unwrap();
        let prod = tape.mul_elem(w, x).unwrap();
        let loss = tape.sum_all(prod).unwrap();
        let grads = tape.backward(loss).unwrap();
        assert_eq!(grads.get("w").unwrap().data(), &[4.0, 5.0, 6.0]);
    }

    #[test]
    fn backward_of_mse_matches_hand_derivative() {
        // loss = mean((w - 0)^2) for w=[2] => grad = 2*w = 4
        let mut tape = Tape::<f64>::new();
        let w = tape.param("w", &Tensor::scalar(2.0)).unwrap();
        let sq = tape.mul_elem(w, w).unwrap();
        let loss = tape.sum_all(sq).unwrap();
        let grads = tape.backward(loss).unwrap();
        assert_eq!(grads.get("w").unwrap().data(), &[4.0]);
    }

    #[test]
    fn backward_requires_scalar_loss() {
        let mut tape = Tape::<f64>::new();
        let w = tape.param("w", &Tensor::ones(&[2, 2])).unwrap();
        assert!(matches!(tape.backward(w), Err(Error::LossNotScalar(_))));
    }

    #[test]
    fn backward_consumes_tape() {
        let mut tape = Tape::<f64>::new();
        let w = tape.param("w", &Tensor::scalar(1.0)).unwrap();
        let loss = tape.sum_all(w).unwrap();
        tape.backward(loss).unwrap();
        assert!(matches!(tape.backward(loss), Err(Error::TapeConsumed)));
    }

    #[test]
    fn shared_param_bindings_accumulate() {
        // loss = sum(w) + sum(w) => grad = 2 everywhere
        let mut tape = Tape::<f64>::new();
        let t = Tensor::ones(&[3]);
        let w1 = tape.param("w", &t).unwrap();
        let w2 = tape.param("w", &t).unwrap();
        let s1 = tape.sum_all(w1).unwrap();
        let s2 = tape.sum_all(w2).unwrap();
        let loss = tape.add(s1, s2).unwrap();
        let grads = tape.backward(loss).unwrap();
        assert_eq!(grads.get("w").unwrap().data(), &[2.0, 2.0, 2.0]);
    }

    #[test]
    fn nonfinite_forward_is_rejected() {
        let mut tape = Tape::<f64>::new();
        let big = tape.constant(Tensor::filled(&[1], f64::MAX)).unwrap();
        let prod = tape.mul_elem(big, big);
        assert!(matches!(prod, Err(Error::NonFinite { .. })));
    }

    #[test]
    fn embed_gradient_hits_only_looked_up_rows() {
        let mut tape = Tape::<f64>::new();
        let table = tape
            .param("table", &t64(&[3, 2], &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]))
            .unwrap();
        let picked = tape.embed(table, &[1, 1]).unwrap();
        let loss = tape.sum_all(picked).unwrap();
        let grads = tape.backward(loss).unwrap();
        assert_eq!(grads.get("table").unwrap().data(), &[0.0, 0.0, 2.0, 2.0, 0.0, 0.0]);
    }

    #[test]
    fn col_mask_writes_literal_zero() {
        let mut tape = Tape::<f64>::new();
        let x = tape.constant(t64(&[1, 3], &[-5.0, 7.0, -0.0])).unwrap();
        let y = tape.col_mask(x, &[false, true, false]).unwrap();
        let d = tape.value(y).data();
        assert_eq!(d[0].to_bits(), 0.0f64.to_bits());
        assert_eq!(d[2].to_bits(), 0.0f64.to_bits());
        assert_eq!(d[1], 7.0);
    }
}
