//! Fourth-order central finite differences shared by the base-manifold
//! numerics and the bundle oracle.

use serde::Serialize;

use crate::error::Result;

const FIRST: [(f64, f64); 4] = [(-2.0, 1.0 / 12.0), (-1.0, -8.0 / 12.0), (1.0, 8.0 / 12.0), (2.0, -1.0 / 12.0)];
const SECOND: [(f64, f64); 5] = [
    (-2.0, -1.0 / 12.0),
    (-1.0, 16.0 / 12.0),
    (0.0, -30.0 / 12.0),
    (1.0, 16.0 / 12.0),
    (2.0, -1.0 / 12.0),
];

/// Step sizes per derivative order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FdSteps {
    pub first: f64,
    pub second: f64,
    /// Used only for ∇R of user-supplied metrics (a derivative of a
    /// numerically differentiated curvature).
    pub third: f64,
}

impl Default for FdSteps {
    fn default() -> Self {
        Self { first: 1e-4, second: 1e-3, third: 1e-2 }
    }
}

impl FdSteps {
    /// Steps derived from a single first-derivative step `h`.
    pub fn from_first(h: f64) -> Self {
        Self { first: h, second: 10.0 * h, third: 100.0 * h }
    }

    pub fn halved(self) -> Self {
        Self { first: self.first / 2.0, second: self.second / 2.0, third: self.third / 2.0 }
    }

    /// Largest excursion of any stencil node from the centre.
    pub fn reach(&self) -> f64 {
        2.0 * self.first.max(self.second).max(self.third)
    }
}

fn shifted(z: &[f64], moves: &[(usize, f64)]) -> Vec<f64> {
    let mut p = z.to_vec();
    for &(i, d) in moves {
        p[i] += d;
    }
    p
}

fn axpy(acc: &mut [f64], w: f64, v: &[f64]) {
    for (a, b) in acc.iter_mut().zip(v) {
        *a += w * b;
    }
}

/// `out[i] = ∂_i f(z)` for a vector-valued `f`.
pub fn gradient<F>(f: F, z: &[f64], h: f64) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    (0..z.len())
        .map(|i| {
            let mut acc: Vec<f64> = Vec::new();
            for &(o, w) in &FIRST {
                let v = f(&shifted(z, &[(i, o * h)]))?;
                if acc.is_empty() {
                    acc = vec![0.0; v.len()];
                }
                axpy(&mut acc, w / h, &v);
            }
            Ok(acc)
        })
        .collect()
}

/// Derivative of `f` along the direction `dir` (not normalised).
pub fn directional<F>(f: F, z: &[f64], dir: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let mut acc: Vec<f64> = Vec::new();
    for &(o, w) in &FIRST {
        let p: Vec<f64> = z.iter().zip(dir).map(|(a, d)| a + o * h * d).collect();
        let v = f(&p)?;
        if acc.is_empty() {
            acc = vec![0.0; v.len()];
        }
        axpy(&mut acc, w / h, &v);
    }
    Ok(acc)
}

/// `out[i][j] = ∂_i ∂_j f(z)`; symmetric by construction.
pub fn hessian<F>(f: F, z: &[f64], h: f64) -> Result<Vec<Vec<Vec<f64>>>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = z.len();
    let centre = f(z)?;
    let len = centre.len();
    let mut out = vec![vec![vec![0.0; len]; n]; n];
    for i in 0..n {
        let mut acc = vec![0.0; len];
        for &(o, w) in &SECOND {
            if o == 0.0 {
                axpy(&mut acc, w / (h * h), &centre);
            } else {
                axpy(&mut acc, w / (h * h), &f(&shifted(z, &[(i, o * h)]))?);
            }
        }
        out[i][i] = acc;
        for j in (i + 1)..n {
            let mut acc = vec![0.0; len];
            for &(oi, wi) in &FIRST {
                for &(oj, wj) in &FIRST {
                    let v = f(&shifted(z, &[(i, oi * h), (j, oj * h)]))?;
                    axpy(&mut acc, wi * wj / (h * h), &v);
                }
            }
            out[j][i] = acc.clone();
            out[i][j] = acc;
        }
    }
    Ok(out)
}

/// Scalar derivative of a real function of one variable.
pub fn derivative<F>(f: F, t: f64, h: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    FIRST.iter().map(|&(o, w)| w * f(t + o * h)).sum::<f64>() / h
}

pub fn second_derivative<F>(f: F, t: f64, h: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    SECOND.iter().map(|&(o, w)| w * f(t + o * h)).sum::<f64>() / (h * h)
}
