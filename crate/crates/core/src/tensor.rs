//! Dense labeled tensors and the primitives the engine is built from:
//! permutation, pairwise contraction and slicing.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    #[error("tensor `{id}`: {len} values do not fill dims {dims:?}")]
    Shape { id: String, dims: Vec<usize>, len: usize },
    #[error("tensor `{id}`: {labels} labels but {dims} dims")]
    LabelCount { id: String, labels: usize, dims: usize },
    #[error("tensor `{id}`: label `{label}` appears twice")]
    DuplicateLabel { id: String, label: String },
    #[error("tensor `{id}`: dimension of `{label}` must be positive")]
    ZeroDim { id: String, label: String },
    #[error("label `{label}` has dim {left} in `{a}` but {right} in `{b}`")]
    DimMismatch { label: String, a: String, b: String, left: usize, right: usize },
    #[error("tensor `{id}` has no label `{label}`")]
    MissingLabel { id: String, label: String },
    #[error("slice value {value} out of range for `{label}` (dim {dim})")]
    SliceOutOfRange { label: String, value: usize, dim: usize },
}

/// Row-major dense tensor; the last label varies fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub id: String,
    labels: Vec<String>,
    dims: Vec<usize>,
    data: Vec<Complex64>,
}

impl Tensor {
    pub fn new(
        id: impl Into<String>,
        labels: Vec<String>,
        dims: Vec<usize>,
        data: Vec<Complex64>,
    ) -> Result<Tensor, TensorError> {
        let id = id.into();
        if labels.len() != dims.len() {
            return Err(TensorError::LabelCount { id, labels: labels.len(), dims: dims.len() });
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(TensorError::DuplicateLabel { id, label: l.clone() });
            }
            if dims[i] == 0 {
                return Err(TensorError::ZeroDim { id, label: l.clone() });
            }
        }
        if dims.iter().product::<usize>() != data.len() {
            return Err(TensorError::Shape { id, dims, len: data.len() });
        }
        Ok(Tensor { id, labels, dims, data })
    }

    /// Convenience constructor taking `&str` labels.
    pub fn from_parts(
        id: &str,
        labels: &[&str],
        dims: &[usize],
        data: Vec<Complex64>,
    ) -> Result<Tensor, TensorError> {
        Tensor::new(id, labels.iter().map(|s| s.to_string()).collect(), dims.to_vec(), data)
    }

    pub fn scalar(id: impl Into<String>, value: Complex64) -> Tensor {
        Tensor { id: id.into(), labels: Vec::new(), dims: Vec::new(), data: vec![value] }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn rank(&self) -> usize {
        self.labels.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn dim_of(&self, label: &str) -> Option<usize> {
        self.position(label).map(|i| self.dims[i])
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Tensor {
        self.id = id.into();
        self
    }

    /// Value at a multi-index given in label order.
    pub fn get(&self, index: &[usize]) -> Complex64 {
        self.data[flat_index(&self.dims, index)]
    }

    /// Reorders axes so that the labels come out as `order`.
    pub fn permuted(&self, order: &[usize]) -> Tensor {
        let labels = order.iter().map(|&i| self.labels[i].clone()).collect();
        let dims: Vec<usize> = order.iter().map(|&i| self.dims[i]).collect();
        Tensor { id: self.id.clone(), labels, dims, data: permute_data(&self.data, &self.dims, order) }
    }
}

pub(crate) fn flat_index(dims: &[usize], index: &[usize]) -> usize {
    dims.iter().zip(index).fold(0, |acc, (&d, &i)| acc * d + i)
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

/// Transposes row-major `data` of shape `dims` so that output axis `k` is
/// input axis `order[k]`.
fn permute_data(data: &[Complex64], dims: &[usize], order: &[usize]) -> Vec<Complex64> {
    if order.iter().enumerate().all(|(k, &i)| k == i) {
        return data.to_vec();
    }
    let in_strides = strides(dims);
    let out_dims: Vec<usize> = order.iter().map(|&i| dims[i]).collect();
    let step: Vec<usize> = order.iter().map(|&i| in_strides[i]).collect();
    let rank = order.len();
    let mut out = Vec::with_capacity(data.len());
    let mut counter = vec![0usize; rank];
    let mut offset = 0usize;
    for _ in 0..data.len() {
        out.push(data[offset]);
        // odometer over the output index, last axis fastest
        for ax in (0..rank).rev() {
            counter[ax] += 1;
            offset += step[ax];
            if counter[ax] < out_dims[ax] {
                break;
            }
            offset -= step[ax] * out_dims[ax];
            counter[ax] = 0;
        }
    }
    out
}

/// Contracts `a` and `b` over every label they share.
///
/// The result carries `a`'s free labels followed by `b`'s, each in their
/// original order. Internally both operands are permuted so the shared axes
/// line up, viewed as matrices and multiplied.
pub fn contract_pair(a: &Tensor, b: &Tensor) -> Result<Tensor, TensorError> {
    let mut shared_a = Vec::new();
    let mut shared_b = Vec::new();
    for (i, label) in a.labels.iter().enumerate() {
        if let Some(j) = b.position(label) {
            if a.dims[i] != b.dims[j] {
                return Err(TensorError::DimMismatch {
                    label: label.clone(),
                    a: a.id.clone(),
                    b: b.id.clone(),
                    left: a.dims[i],
                    right: b.dims[j],
                });
            }
            shared_a.push(i);
            shared_b.push(j);
        }
    }
    let free_a: Vec<usize> = (0..a.rank()).filter(|i| !shared_a.contains(i)).collect();
    let free_b: Vec<usize> = (0..b.rank()).filter(|j| !shared_b.contains(j)).collect();

    let order_a: Vec<usize> = free_a.iter().chain(&shared_a).copied().collect();
    let order_b: Vec<usize> = shared_b.iter().chain(&free_b).copied().collect();
    let lhs = permute_data(&a.data, &a.dims, &order_a);
    let rhs = permute_data(&b.data, &b.dims, &order_b);

    let m: usize = free_a.iter().map(|&i| a.dims[i]).product();
    let k: usize = shared_a.iter().map(|&i| a.dims[i]).product();
    let n: usize = free_b.iter().map(|&j| b.dims[j]).product();
    let data = matmul(&lhs, &rhs, m, k, n);

    let labels = free_a
        .iter()
        .map(|&i| a.labels[i].clone())
        .chain(free_b.iter().map(|&j| b.labels[j].clone()))
        .collect();
    let dims = free_a.iter().map(|&i| a.dims[i]).chain(free_b.iter().map(|&j| b.dims[j])).collect();
    Ok(Tensor { id: format!("{}*{}", a.id, b.id), labels, dims, data })
}

/// `(m x k) * (k x n)`, both row-major.
fn matmul(lhs: &[Complex64], rhs: &[Complex64], m: usize, k: usize, n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); m * n];
    for i in 0..m {
        let row = &mut out[i * n..(i + 1) * n];
        for p in 0..k {
            let x = lhs[i * k + p];
            if x.re == 0.0 && x.im == 0.0 {
                continue;
            }
            let r = &rhs[p * n..(p + 1) * n];
            for (o, &y) in row.iter_mut().zip(r) {
                *o += x * y;
            }
        }
    }
    out
}

/// Fixes `label` to `value`, dropping that axis.
pub fn slice_tensor(t: &Tensor, label: &str, value: usize) -> Result<Tensor, TensorError> {
    let axis = t.position(label).ok_or_else(|| TensorError::MissingLabel {
        id: t.id.clone(),
        label: label.to_string(),
    })?;
    let dim = t.dims[axis];
    if value >= dim {
        return Err(TensorError::SliceOutOfRange { label: label.to_string(), value, dim });
    }
    let inner: usize = t.dims[axis + 1..].iter().product();
    let outer: usize = t.dims[..axis].iter().product();
    let mut data = Vec::with_capacity(outer * inner);
    for o in 0..outer {
        let start = (o * dim + value) * inner;
        data.extend_from_slice(&t.data[start..start + inner]);
    }
    let mut labels = t.labels.clone();
    let mut dims = t.dims.clone();
    labels.remove(axis);
    dims.remove(axis);
    Ok(Tensor { id: t.id.clone(), labels, dims, data })
}
