//! Multivariate Gaussian kernel and the Nadaraya–Watson estimate.

use crate::error::{invalid, Error, Result};
use crate::extmath::exact_sum;
use crate::scalar::Scalar;

/// Observations `(x_i, y_i)` with `x_i` stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset<T> {
    dim: usize,
    inputs: Vec<T>,
    outputs: Vec<T>,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(inputs: &[Vec<T>], outputs: Vec<T>) -> Result<Self> {
        let dim = inputs.first().map_or(0, Vec::len);
        if let Some(bad) = inputs.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: bad.len(),
            });
        }
        Self::from_flat(dim, inputs.concat(), outputs)
    }

    pub fn from_flat(dim: usize, inputs: Vec<T>, outputs: Vec<T>) -> Result<Self> {
        if dim == 0 || outputs.is_empty() {
            return Err(invalid("dataset", "need at least one observation of dimension >= 1"));
        }
        if inputs.len() != dim * outputs.len() {
            return Err(Error::DimensionMismatch {
                expected: dim * outputs.len(),
                got: inputs.len(),
            });
        }
        if inputs.iter().chain(&outputs).any(|v| !v.is_finite()) {
            return Err(invalid("dataset", "observations must be finite"));
        }
        Ok(Self { dim, inputs, outputs })
    }

    /// One-dimensional inputs.
    pub fn univariate(inputs: Vec<T>, outputs: Vec<T>) -> Result<Self> {
        Self::from_flat(1, inputs, outputs)
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn input(&self, i: usize) -> &[T] {
        &self.inputs[i * self.dim..(i + 1) * self.dim]
    }

    pub fn outputs(&self) -> &[T] {
        &self.outputs
    }
}

/// Per-dimension kernel bandwidths, all strictly positive.
#[derive(Clone, Debug, PartialEq)]
pub struct Bandwidth<T>(Vec<T>);

impl<T: Scalar> Bandwidth<T> {
    pub fn new(h: Vec<T>) -> Result<Self> {
        if h.is_empty() {
            return Err(invalid("bandwidth", "need at least one dimension"));
        }
        if h.iter().any(|v| !(*v > T::zero() && v.is_finite())) {
            return Err(invalid("bandwidth", "every component must be finite and > 0"));
        }
        Ok(Self(h))
    }

    pub fn uniform(dim: usize, h: T) -> Result<Self> {
        Self::new(vec![h; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }
}

/// Product Gaussian kernel `prod_i exp(-o_i^2 / (2 h_i^2)) / sqrt(2 pi h_i^2)`,
/// evaluated in log space.
pub fn gaussian_kernel<T: Scalar>(offset: &[T], h: &Bandwidth<T>) -> Result<T> {
    check_dim(h.dim(), offset.len())?;
    let half_log_tau = T::lit(0.5) * (T::lit(2.0) * T::PI()).ln();
    let log_k = offset
        .iter()
        .zip(h.as_slice())
        .map(|(&o, &hi)| {
            let z = o / hi;
            -T::lit(0.5) * z * z - hi.ln() - half_log_tau
        })
        .fold(T::zero(), |a, b| a + b);
    Ok(log_k.exp())
}

/// Unnormalized log kernel weight; the normalizing constant cancels in the ratio.
fn log_weight<T: Scalar>(x: &[T], xi: &[T], h: &[T]) -> T {
    let mut acc = T::zero();
    for k in 0..x.len() {
        let z = (x[k] - xi[k]) / h[k];
        acc -= T::lit(0.5) * z * z;
    }
    acc
}

/// Reusable evaluator; keeps a scratch buffer across queries.
pub struct NadarayaWatson<'a, T> {
    data: &'a Dataset<T>,
    h: &'a Bandwidth<T>,
    y_min: T,
    y_max: T,
    scratch: Vec<T>,
}

impl<'a, T: Scalar> NadarayaWatson<'a, T> {
    pub fn new(data: &'a Dataset<T>, h: &'a Bandwidth<T>) -> Result<Self> {
        check_dim(data.dim(), h.dim())?;
        let y = data.outputs();
        let y_min = y.iter().copied().fold(T::infinity(), T::min);
        let y_max = y.iter().copied().fold(T::neg_infinity(), T::max);
        Ok(Self {
            data,
            h,
            y_min,
            y_max,
            scratch: Vec::with_capacity(data.len()),
        })
    }

    /// `sum_i K(x - x_i) y_i / sum_j K(x - x_j)`.
    ///
    /// The weights are exponentiated after subtracting the largest log weight
    /// and summed exactly, so the result does not depend on the order of the
    /// observations. It always lies in `[min y, max y]`.
    pub fn estimate(&mut self, x: &[T]) -> Result<T> {
        check_dim(self.data.dim(), x.len())?;
        let h = self.h.as_slice();
        self.scratch.clear();
        let mut max_lw = T::neg_infinity();
        for i in 0..self.data.len() {
            let lw = log_weight(x, self.data.input(i), h);
            if lw > max_lw {
                max_lw = lw;
            }
            self.scratch.push(lw);
        }
        if !max_lw.is_finite() {
            return Err(Error::EmptyNeighborhood);
        }
        for lw in self.scratch.iter_mut() {
            *lw = (*lw - max_lw).exp();
        }
        let w = &self.scratch;
        let y = self.data.outputs();
        let den = exact_sum(w.iter().copied());
        let num = exact_sum(w.iter().zip(y).map(|(&wi, &yi)| wi * yi));
        let est = num / den;
        if !est.is_finite() {
            return Err(Error::EmptyNeighborhood);
        }
        Ok(est.max(self.y_min).min(self.y_max))
    }
}

pub fn nw_estimate<T: Scalar>(data: &Dataset<T>, x: &[T], h: &Bandwidth<T>) -> Result<T> {
    NadarayaWatson::new(data, h)?.estimate(x)
}

/// Evaluates many query points against one dataset.
pub fn nw_estimate_batch<T: Scalar>(data: &Dataset<T>, queries: &[Vec<T>], h: &Bandwidth<T>) -> Result<Vec<Result<T>>> {
    let mut nw = NadarayaWatson::new(data, h)?;
    Ok(queries.iter().map(|q| nw.estimate(q)).collect())
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
