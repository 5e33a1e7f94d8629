use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::numcore::{gemm, Scalar, Tensor};

/// FIFO memory bank of unit-norm embeddings.
#[derive(Clone, Debug)]
pub struct SupportQueue<T: Scalar = f32> {
    capacity: usize,
    dim: usize,
    rows: VecDeque<Vec<T>>,
}

impl<T: Scalar> SupportQueue<T> {
    pub fn new(capacity: usize, dim: usize) -> Result<Self> {
        if capacity == 0 || dim == 0 {
            return Err(Error::invalid("support queue needs positive capacity and dimension"));
        }
        Ok(SupportQueue { capacity, dim, rows: VecDeque::with_capacity(capacity) })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Stored rows, oldest first.
    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.rows.iter().map(Vec::as_slice)
    }

    /// Normalizes and appends each row of `z`, evicting the oldest entries
    /// beyond capacity.
    pub fn push(&mut self, z: &Tensor<T>) -> Result<()> {
        if z.ndim() != 2 || z.shape()[1] != self.dim {
            return Err(Error::shape("SupportQueue::push", &[0, self.dim], z.shape()));
        }
        let data = z.data();
        for row in data.chunks(self.dim) {
            let norm = row.iter().map(|v| *v * *v).sum::<T>().sqrt();
            let norm = if norm > T::zero() { norm } else { T::one() };
            if self.rows.len() == self.capacity {
                self.rows.pop_front();
            }
            self.rows.push_back(row.iter().map(|v| *v / norm).collect());
        }
        Ok(())
    }

    /// Queue position of the cosine-nearest stored row for every row of
    /// `queries`; ties go to the oldest entry.
    pub fn nearest(&self, queries: &Tensor<T>) -> Result<Vec<usize>> {
        if self.rows.is_empty() {
            return Err(Error::invalid("nearest-neighbour lookup on an empty support queue"));
        }
        if queries.ndim() != 2 || queries.shape()[1] != self.dim {
            return Err(Error::shape("SupportQueue::nearest", &[0, self.dim], queries.shape()));
        }
        let b = queries.shape()[0];
        let m = self.rows.len();
        let bank: Vec<T> = self.rows.iter().flatten().copied().collect();
        // query norms are positive constants per row, so they do not change the arg-max
        let mut sims = vec![T::zero(); b * m];
        gemm(b, self.dim, m, &queries.data(), false, &bank, true, T::zero(), &mut sims);
        Ok(sims
            .chunks(m)
            .map(|row| {
                let mut best = 0;
                for (j, v) in row.iter().enumerate() {
                    if *v > row[best] {
                        best = j;
                    }
                }
                best
            })
            .collect())
    }

    /// Nearest stored rows as a constant `[B, dim]` tensor.
    pub fn lookup(&self, queries: &Tensor<T>) -> Result<Tensor<T>> {
        let idx = self.nearest(queries)?;
        let data = idx.iter().flat_map(|&i| self.rows[i].iter().copied()).collect();
        Tensor::new(data, &[idx.len(), self.dim])
    }
}
