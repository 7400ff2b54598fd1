//! Riemannian base manifolds given on a single chart.
//!
//! Space forms use the conformal chart g_ij = δ_ij / (1 + c|x|²/4)² and carry
//! closed-form Christoffel symbols and curvature; user metrics go through
//! the finite-difference kernel. Curvature follows
//! R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_[X,Y] Z, so that K = g(R(X,Y)Y,X)/Q
//! equals c on the sphere preset.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fd::{self, FdSteps};
use crate::tensor::{Christoffel, NablaRiemann, Riemann, TensorValue, Variance};

pub type MetricFn = Arc<dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurvatureModel {
    Generic,
    SpaceForm { c: f64 },
}

#[derive(Clone)]
enum MetricSource {
    Conformal { c: f64 },
    Custom(MetricFn),
}

#[derive(Clone)]
pub struct ChartedManifold {
    dim: usize,
    source: MetricSource,
    model: CurvatureModel,
    chart_radius: f64,
    steps: FdSteps,
}

impl fmt::Debug for ChartedManifold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChartedManifold")
            .field("dim", &self.dim)
            .field("model", &self.model)
            .field("chart_radius", &self.chart_radius)
            .finish()
    }
}

impl ChartedManifold {
    /// Space form of constant curvature `c` in the conformal chart.
    pub fn space_form(dim: usize, c: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Usage("dimension must be positive".into()));
        }
        if !c.is_finite() {
            return Err(Error::Usage(format!("curvature must be finite, got {c}")));
        }
        let chart_radius = if c >= 0.0 { 1.0 } else { 1.0f64.min(1.0 / (-c).sqrt()) };
        Ok(Self {
            dim,
            source: MetricSource::Conformal { c },
            model: CurvatureModel::SpaceForm { c },
            chart_radius,
            steps: FdSteps::default(),
        })
    }

    pub fn euclidean(dim: usize) -> Result<Self> {
        Self::space_form(dim, 0.0)
    }

    pub fn sphere(dim: usize, c: f64) -> Result<Self> {
        if c <= 0.0 {
            return Err(Error::Usage(format!("sphere requires c > 0, got {c}")));
        }
        Self::space_form(dim, c)
    }

    pub fn hyperbolic(dim: usize, c: f64) -> Result<Self> {
        if c >= 0.0 {
            return Err(Error::Usage(format!("hyperbolic space requires c < 0, got {c}")));
        }
        Self::space_form(dim, c)
    }

    /// A user metric on the ball of the given radius; curvature is numeric.
    pub fn custom(dim: usize, metric: MetricFn, chart_radius: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Usage("dimension must be positive".into()));
        }
        if !(chart_radius > 0.0) {
            return Err(Error::Usage(format!("chart radius must be positive, got {chart_radius}")));
        }
        Ok(Self {
            dim,
            source: MetricSource::Custom(metric),
            model: CurvatureModel::Generic,
            chart_radius,
            steps: FdSteps::default(),
        })
    }

    pub fn with_steps(mut self, steps: FdSteps) -> Self {
        self.steps = steps;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn model(&self) -> CurvatureModel {
        self.model
    }

    pub fn chart_radius(&self) -> f64 {
        self.chart_radius
    }

    pub fn steps(&self) -> FdSteps {
        self.steps
    }

    pub fn has_closed_forms(&self) -> bool {
        matches!(self.source, MetricSource::Conformal { .. })
    }

    fn check_point(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::Usage(format!(
                "chart point has {} components, manifold dimension is {}",
                x.len(),
                self.dim
            )));
        }
        let n = x.norm();
        if !(n < self.chart_radius) {
            return Err(Error::Domain(format!(
                "point with |x| = {n} lies outside the chart ball of radius {}",
                self.chart_radius
            )));
        }
        Ok(())
    }

    pub fn metric_at(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.check_point(x)?;
        match &self.source {
            MetricSource::Conformal { c } => {
                let f = 1.0 / (1.0 + c * x.norm_squared() / 4.0).powi(2);
                Ok(DMatrix::identity(self.dim, self.dim) * f)
            }
            MetricSource::Custom(metric) => {
                let g = metric(x);
                validate_metric(&g, self.dim)?;
                Ok(g)
            }
        }
    }

    pub fn christoffel_at(&self, x: &DVector<f64>) -> Result<Christoffel> {
        match self.source {
            MetricSource::Conformal { c } => {
                self.check_point(x)?;
                let n = self.dim;
                let denom = 1.0 + c * x.norm_squared() / 4.0;
                // ∂_i ln φ for φ = 1/(1 + c|x|²/4)
                let dpsi: Vec<f64> = (0..n).map(|i| -c * x[i] / (2.0 * denom)).collect();
                let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
                Ok(Christoffel(TensorValue::from_fn(
                    &[n, n, n],
                    &[Variance::Contravariant, Variance::Covariant, Variance::Covariant],
                    |ix| {
                        let (k, i, j) = (ix[0], ix[1], ix[2]);
                        delta(i, k) * dpsi[j] + delta(j, k) * dpsi[i] - delta(i, j) * dpsi[k]
                    },
                )))
            }
            MetricSource::Custom(_) => self.christoffel_numeric(x),
        }
    }

    /// Christoffel symbols by differentiating the metric numerically,
    /// regardless of whether a closed form exists.
    pub fn christoffel_numeric(&self, x: &DVector<f64>) -> Result<Christoffel> {
        self.check_point(x)?;
        christoffel_from_field(|p| self.metric_flat(p), x.as_slice(), self.dim, self.steps.first)
            .map(|(_, gamma)| gamma)
    }

    pub fn riemann_at(&self, x: &DVector<f64>) -> Result<Riemann> {
        match self.source {
            MetricSource::Conformal { c } => {
                let g = self.metric_at(x)?;
                Ok(space_form_riemann(&g, c))
            }
            MetricSource::Custom(_) => self.riemann_numeric(x),
        }
    }

    pub fn riemann_numeric(&self, x: &DVector<f64>) -> Result<Riemann> {
        self.check_point(x)?;
        let lc = levi_civita_numeric(|p| self.metric_flat(p), x.as_slice(), self.dim, self.steps)?;
        Ok(lc.riemann)
    }

    pub fn nabla_riemann_at(&self, x: &DVector<f64>) -> Result<NablaRiemann> {
        match self.source {
            MetricSource::Conformal { .. } => {
                self.check_point(x)?;
                Ok(NablaRiemann::zeros(self.dim))
            }
            MetricSource::Custom(_) => self.nabla_riemann_numeric(x),
        }
    }

    /// ∇R from finite differences of the numeric curvature plus
    /// Christoffel corrections.
    pub fn nabla_riemann_numeric(&self, x: &DVector<f64>) -> Result<NablaRiemann> {
        self.check_point(x)?;
        let n = self.dim;
        let gamma = self.christoffel_at(x)?;
        let riem = self.riemann_numeric(x)?;
        let d_riem = fd::gradient(
            |p| {
                let p = DVector::from_column_slice(p);
                self.riemann_numeric(&p).map(|r| r.0.components().to_vec())
            },
            x.as_slice(),
            self.steps.third,
        )?;
        let r = |l: usize, i: usize, j: usize, k: usize| riem.0.get(&[l, i, j, k]);
        let gm = |k: usize, i: usize, j: usize| gamma.0.get(&[k, i, j]);
        let mut out = NablaRiemann::zeros(n);
        for e in 0..n {
            for l in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            let flat = ((l * n + i) * n + j) * n + k;
                            let mut v = d_riem[e][flat];
                            for p in 0..n {
                                v += gm(l, e, p) * r(p, i, j, k)
                                    - gm(p, e, i) * r(l, p, j, k)
                                    - gm(p, e, j) * r(l, i, p, k)
                                    - gm(p, e, k) * r(l, i, j, p);
                            }
                            out.0.set(&[e, l, i, j, k], v);
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn sectional_at(&self, x: &DVector<f64>, u: &DVector<f64>, v: &DVector<f64>) -> Result<f64> {
        let g = self.metric_at(x)?;
        let riem = self.riemann_at(x)?;
        sectional_from(&g, &riem, u, v)
    }

    /// Scalar curvature g^{jk} R^i_{ijk}.
    pub fn scalar_at(&self, x: &DVector<f64>) -> Result<f64> {
        let g = self.metric_at(x)?;
        let riem = self.riemann_at(x)?;
        Ok(scalar_from(&g, &riem))
    }

    fn metric_flat(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        self.metric_at(&DVector::from_column_slice(p))
    }
}

fn validate_metric(g: &DMatrix<f64>, dim: usize) -> Result<()> {
    if g.nrows() != dim || g.ncols() != dim {
        return Err(Error::Model(format!(
            "metric is {}x{}, expected {dim}x{dim}",
            g.nrows(),
            g.ncols()
        )));
    }
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::Model("metric has non-finite entries".into()));
    }
    let scale = g.amax().max(1.0);
    if (g - g.transpose()).amax() > 1e-12 * scale {
        return Err(Error::Model("metric is not symmetric".into()));
    }
    if g.clone().cholesky().is_none() {
        return Err(Error::Model("metric is not positive definite".into()));
    }
    Ok(())
}

/// R(X,Y)Z = c (g(Y,Z) X − g(X,Z) Y).
pub fn space_form_riemann(g: &DMatrix<f64>, c: f64) -> Riemann {
    let n = g.nrows();
    let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    Riemann(TensorValue::from_fn(
        &[n, n, n, n],
        &[Variance::Contravariant, Variance::Covariant, Variance::Covariant, Variance::Covariant],
        |ix| {
            let (l, i, j, k) = (ix[0], ix[1], ix[2], ix[3]);
            c * (g[(j, k)] * delta(l, i) - g[(i, k)] * delta(l, j))
        },
    ))
}

pub fn sectional_from(
    g: &DMatrix<f64>,
    riem: &Riemann,
    u: &DVector<f64>,
    v: &DVector<f64>,
) -> Result<f64> {
    let guu = u.dot(&(g * u));
    let gvv = v.dot(&(g * v));
    let guv = u.dot(&(g * v));
    let q = guu * gvv - guv * guv;
    if !(q > 1e-12 * guu * gvv) {
        return Err(Error::Degenerate("vectors span a degenerate plane".into()));
    }
    let ruvv = riem.apply(u, v, v);
    Ok(u.dot(&(g * ruvv)) / q)
}

pub fn scalar_from(g: &DMatrix<f64>, riem: &Riemann) -> f64 {
    let n = g.nrows();
    let ginv = g.clone().try_inverse().expect("metric is invertible");
    let mut s = 0.0;
    for j in 0..n {
        for k in 0..n {
            let ric: f64 = (0..n).map(|i| riem.0.get(&[i, i, j, k])).sum();
            s += ginv[(j, k)] * ric;
        }
    }
    s
}

/// Metric and curvature of a numerically
/// differentiated metric field at one point.
pub(crate) struct LeviCivita {
    pub metric: DMatrix<f64>,
    pub riemann: Riemann,
}

fn flatten(m: &DMatrix<f64>) -> Vec<f64> {
    // column-major, fine since the matrix is symmetric
    m.as_slice().to_vec()
}

pub(crate) fn christoffel_from_field<F>(
    field: F,
    z: &[f64],
    n: usize,
    h: f64,
) -> Result<(DMatrix<f64>, Christoffel)>
where
    F: Fn(&[f64]) -> Result<DMatrix<f64>>,
{
    let g = field(z)?;
    let ginv = g
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Model("metric is singular".into()))?;
    let d1 = fd::gradient(|p| field(p).map(|m| flatten(&m)), z, h)?;
    let dg = |e: usize, a: usize, b: usize| d1[e][a + b * n];
    let first_kind = |i: usize, j: usize, l: usize| 0.5 * (dg(i, j, l) + dg(j, i, l) - dg(l, i, j));
    let mut gamma = Christoffel::zeros(n);
    for k in 0..n {
        for i in 0..n {
            for j in i..n {
                let v: f64 = (0..n).map(|l| ginv[(k, l)] * first_kind(i, j, l)).sum();
                gamma.0.set(&[k, i, j], v);
                gamma.0.set(&[k, j, i], v);
            }
        }
    }
    Ok((g, gamma))
}

pub(crate) fn levi_civita_numeric<F>(field: F, z: &[f64], n: usize, steps: FdSteps) -> Result<LeviCivita>
where
    F: Fn(&[f64]) -> Result<DMatrix<f64>>,
{
    let g = field(z)?;
    let ginv = g
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Model("metric is singular".into()))?;
    let d1 = fd::gradient(|p| field(p).map(|m| flatten(&m)), z, steps.first)?;
    let d2 = fd::hessian(|p| field(p).map(|m| flatten(&m)), z, steps.second)?;
    let dg = |e: usize, a: usize, b: usize| d1[e][a + b * n];
    let ddg = |e: usize, f: usize, a: usize, b: usize| d2[e][f][a + b * n];

    // Γ_{ij,l} and its derivatives
    let c1 = |i: usize, j: usize, l: usize| 0.5 * (dg(i, j, l) + dg(j, i, l) - dg(l, i, j));
    let dc1 = |e: usize, i: usize, j: usize, l: usize| {
        0.5 * (ddg(e, i, j, l) + ddg(e, j, i, l) - ddg(e, l, i, j))
    };
    let dginv: Vec<DMatrix<f64>> = (0..n)
        .map(|e| {
            let de = DMatrix::from_fn(n, n, |a, b| dg(e, a, b));
            -(&ginv * de * &ginv)
        })
        .collect();

    let mut gamma = Christoffel::zeros(n);
    // dgamma[e][(k, i, j)]
    let mut dgamma = vec![vec![0.0; n * n * n]; n];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut v = 0.0;
                for l in 0..n {
                    v += ginv[(k, l)] * c1(i, j, l);
                }
                gamma.0.set(&[k, i, j], v);
                for e in 0..n {
                    let mut dv = 0.0;
                    for l in 0..n {
                        dv += dginv[e][(k, l)] * c1(i, j, l) + ginv[(k, l)] * dc1(e, i, j, l);
                    }
                    dgamma[e][(k * n + i) * n + j] = dv;
                }
            }
        }
    }
    let gm = |k: usize, i: usize, j: usize| gamma.0.get(&[k, i, j]);
    let dgm = |e: usize, k: usize, i: usize, j: usize| dgamma[e][(k * n + i) * n + j];
    let mut riemann = Riemann::zeros(n);
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut v = dgm(i, l, j, k) - dgm(j, l, i, k);
                    for p in 0..n {
                        v += gm(l, i, p) * gm(p, j, k) - gm(l, j, p) * gm(p, i, k);
                    }
                    riemann.0.set(&[l, i, j, k], v);
                }
            }
        }
    }
    Ok(LeviCivita { metric: g, riemann })
}
