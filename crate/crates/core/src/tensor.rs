//! Dense tensors over an `n`-dimensional frame, with jet or float entries.
//!
//! Every slot ranges over `0..n`. Vector-valued π-tensors keep the value
//! index first, followed by their arguments in order, so `T[i][j][k]` is the
//! `i`-th component of `T(e_j, e_k)` and a curvature `R[i][z][x][y]` is the
//! `i`-th component of `R(e_x, e_y) e_z`.

use ndarray::{ArrayD, IxDyn};

use crate::jets::Jet;

/// Iterates over all multi-indices of the given rank in row-major order.
pub fn multi_indices(n: usize, rank: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = n.pow(rank as u32);
    (0..total).map(move |mut flat| {
        let mut idx = vec![0; rank];
        for s in (0..rank).rev() {
            idx[s] = flat % n;
            flat /= n;
        }
        idx
    })
}

/// Whether a slot transforms like a vector (value slot) or a covector
/// (argument slot). Covariant differentiation needs this to pick the sign of
/// each connection correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Up,
    Down,
}

#[derive(Debug, Clone)]
pub struct JetTensor {
    n: usize,
    rank: usize,
    data: Vec<Jet>,
}

impl JetTensor {
    pub fn from_fn(n: usize, rank: usize, mut f: impl FnMut(&[usize]) -> Jet) -> Self {
        let data = multi_indices(n, rank).map(|idx| f(&idx)).collect();
        Self { n, rank, data }
    }

    pub fn scalar(j: Jet, n: usize) -> Self {
        Self { n, rank: 0, data: vec![j] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    fn flat(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank);
        idx.iter().fold(0, |acc, &i| acc * self.n + i)
    }

    pub fn at(&self, idx: &[usize]) -> &Jet {
        &self.data[self.flat(idx)]
    }

    pub fn data(&self) -> &[Jet] {
        &self.data
    }

    /// Minimum truncation order over all entries.
    pub fn order(&self) -> usize {
        self.data.iter().map(Jet::order).min().unwrap_or(0)
    }

    pub fn map(&self, f: impl Fn(&Jet) -> Jet) -> Self {
        Self { n: self.n, rank: self.rank, data: self.data.iter().map(f).collect() }
    }

    pub fn zip(&self, other: &Self, f: impl Fn(&Jet, &Jet) -> Jet) -> Self {
        assert_eq!(self.rank, other.rank);
        Self {
            n: self.n,
            rank: self.rank,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn values(&self) -> ArrayD<f64> {
        ArrayD::from_shape_vec(IxDyn(&vec![self.n; self.rank]), self.data.iter().map(Jet::value).collect())
            .expect("shape matches data")
    }
}

/// Sum of jets; `None` for an empty iterator.
pub fn jet_sum(iter: impl IntoIterator<Item = Jet>) -> Option<Jet> {
    let mut it = iter.into_iter();
    let first = it.next()?;
    Some(it.fold(first, |acc, j| acc + j))
}

/// Max absolute entry.
pub fn max_abs(a: &ArrayD<f64>) -> f64 {
    a.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// The repository-wide residual `|a - b| / (1 + |a| + |b|)`, maximized over
/// entries.
pub fn rel_residual(a: &ArrayD<f64>, b: &ArrayD<f64>) -> f64 {
    assert_eq!(a.shape(), b.shape(), "residual between tensors of different shape");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| rel_diff(*x, *y))
        .fold(0.0, f64::max)
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).abs() / (1.0 + a.abs() + b.abs());
    if d.is_nan() {
        f64::INFINITY
    } else {
        d
    }
}

/// Builds a float tensor with every slot of size `n`.
pub fn array_from_fn(n: usize, rank: usize, mut f: impl FnMut(&[usize]) -> f64) -> ArrayD<f64> {
    let data: Vec<f64> = multi_indices(n, rank).map(|idx| f(&idx)).collect();
    ArrayD::from_shape_vec(IxDyn(&vec![n; rank]), data).expect("shape matches data")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_major_indices() {
        let all: Vec<Vec<usize>> = multi_indices(2, 2).collect();
        assert_eq!(all, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert_eq!(multi_indices(3, 0).count(), 1);
    }

    #[test]
    fn residual_is_relative_and_nan_safe() {
        let a = array_from_fn(2, 1, |i| i[0] as f64);
        let b = array_from_fn(2, 1, |i| i[0] as f64 * 2.0);
        assert!((rel_residual(&a, &b) - 1.0 / 4.0).abs() < 1e-15);
        assert_eq!(rel_diff(f64::NAN, 0.0), f64::INFINITY);
    }
}
