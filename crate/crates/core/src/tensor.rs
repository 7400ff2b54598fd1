//! Dense multi-index arrays with per-index variance, plus thin typed views
//! for the tensors the rest of the crate passes around.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Variance {
    Covariant,
    Contravariant,
}

/// Row-major dense tensor. The first index varies slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorValue {
    shape: Vec<usize>,
    variance: Vec<Variance>,
    data: Vec<f64>,
}

impl TensorValue {
    pub fn zeros(shape: &[usize], variance: &[Variance]) -> Self {
        assert_eq!(shape.len(), variance.len(), "shape/variance rank mismatch");
        let len = shape.iter().product();
        Self {
            shape: shape.to_vec(),
            variance: variance.to_vec(),
            data: vec![0.0; len],
        }
    }

    pub fn from_fn(
        shape: &[usize],
        variance: &[Variance],
        mut f: impl FnMut(&[usize]) -> f64,
    ) -> Self {
        let mut t = Self::zeros(shape, variance);
        let mut idx = vec![0usize; shape.len()];
        for k in 0..t.data.len() {
            t.data[k] = f(&idx);
            for d in (0..idx.len()).rev() {
                idx[d] += 1;
                if idx[d] < shape[d] {
                    break;
                }
                idx[d] = 0;
            }
        }
        t
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn variance(&self) -> &[Variance] {
        &self.variance
    }

    pub fn components(&self) -> &[f64] {
        &self.data
    }

    fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.shape.len());
        idx.iter()
            .zip(&self.shape)
            .fold(0, |acc, (&i, &n)| {
                debug_assert!(i < n);
                acc * n + i
            })
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: f64) {
        let o = self.offset(idx);
        self.data[o] = value;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }
}

/// Christoffel symbols Γ^k_{ij}, stored with index order (k, i, j).
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel(pub TensorValue);

impl Christoffel {
    pub fn zeros(n: usize) -> Self {
        use Variance::*;
        Self(TensorValue::zeros(&[n, n, n], &[Contravariant, Covariant, Covariant]))
    }

    pub fn dim(&self) -> usize {
        self.0.shape()[0]
    }

    /// Γ(X, Y)^k = Γ^k_{ij} X^i Y^j.
    pub fn apply(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let n = self.dim();
        DVector::from_fn(n, |k, _| {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    s += self.0.get(&[k, i, j]) * x[i] * y[j];
                }
            }
            s
        })
    }

    /// The matrix (Γ y)^k_i = Γ^k_{ij} y^j.
    pub fn contract_last(&self, y: &DVector<f64>) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |k, i| (0..n).map(|j| self.0.get(&[k, i, j]) * y[j]).sum())
    }
}

/// Riemann tensor R^l_{ijk}, stored with index order (l, i, j, k), so that
/// R(∂_i, ∂_j)∂_k = R^l_{ijk} ∂_l.
#[derive(Debug, Clone, PartialEq)]
pub struct Riemann(pub TensorValue);

impl Riemann {
    pub fn zeros(n: usize) -> Self {
        use Variance::*;
        Self(TensorValue::zeros(
            &[n, n, n, n],
            &[Contravariant, Covariant, Covariant, Covariant],
        ))
    }

    pub fn dim(&self) -> usize {
        self.0.shape()[0]
    }

    /// R(X, Y)Z.
    pub fn apply(&self, x: &DVector<f64>, y: &DVector<f64>, z: &DVector<f64>) -> DVector<f64> {
        let n = self.dim();
        let t = &self.0;
        DVector::from_fn(n, |l, _| {
            let mut s = 0.0;
            for i in 0..n {
                if x[i] == 0.0 {
                    continue;
                }
                for j in 0..n {
                    if y[j] == 0.0 {
                        continue;
                    }
                    for k in 0..n {
                        s += t.get(&[l, i, j, k]) * x[i] * y[j] * z[k];
                    }
                }
            }
            s
        })
    }

    /// Lowered components R_{lijk} = g_{lp} R^p_{ijk}.
    pub fn lowered(&self, g: &DMatrix<f64>) -> TensorValue {
        let n = self.dim();
        TensorValue::from_fn(&[n, n, n, n], &[Variance::Covariant; 4], |ix| {
            (0..n)
                .map(|p| g[(ix[0], p)] * self.0.get(&[p, ix[1], ix[2], ix[3]]))
                .sum()
        })
    }
}

/// Covariant derivative of curvature, (∇_e R)^l_{ijk} stored as (e, l, i, j, k).
#[derive(Debug, Clone, PartialEq)]
pub struct NablaRiemann(pub TensorValue);

impl NablaRiemann {
    pub fn zeros(n: usize) -> Self {
        use Variance::*;
        Self(TensorValue::zeros(
            &[n, n, n, n, n],
            &[Covariant, Contravariant, Covariant, Covariant, Covariant],
        ))
    }

    pub fn dim(&self) -> usize {
        self.0.shape()[0]
    }

    /// (∇_E R)(X, Y)Z.
    pub fn apply(
        &self,
        e: &DVector<f64>,
        x: &DVector<f64>,
        y: &DVector<f64>,
        z: &DVector<f64>,
    ) -> DVector<f64> {
        let n = self.dim();
        let mut out = DVector::zeros(n);
        if self.0.is_zero() {
            return out;
        }
        for a in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let w = e[a] * x[i] * y[j];
                    if w == 0.0 {
                        continue;
                    }
                    for k in 0..n {
                        for l in 0..n {
                            out[l] += self.0.get(&[a, l, i, j, k]) * w * z[k];
                        }
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_fn_is_row_major() {
        let t = TensorValue::from_fn(&[2, 3], &[Variance::Covariant; 2], |ix| {
            (10 * ix[0] + ix[1]) as f64
        });
        assert_eq!(t.components(), &[0.0, 1.0, 2.0, 10.0, 11.0, 12.0]);
        assert_eq!(t.get(&[1, 2]), 12.0);
        assert_eq!(t.rank(), 2);
    }

    #[test]
    fn christoffel_apply_contracts_lower_indices() {
        let mut g = Christoffel::zeros(2);
        g.0.set(&[0, 0, 1], 2.0);
        g.0.set(&[0, 1, 0], 2.0);
        let x = DVector::from_vec(vec![1.0, 0.0]);
        let y = DVector::from_vec(vec![0.0, 3.0]);
        assert_eq!(g.apply(&x, &y)[0], 6.0);
        assert_eq!(g.contract_last(&y)[(0, 0)], 6.0);
    }
}
