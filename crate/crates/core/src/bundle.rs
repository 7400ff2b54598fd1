//! Points and tangent vectors of T(M), the metric g_a, the almost complex
//! structure J_a, the Kähler form Ω_a and the Lee form ω.
//!
//! A tangent vector at (x, y) is stored either in the adapted frame
//! {δ_i, ∂_{y^i}} with δ_i = ∂_{x^i} − Γ^k_{ij} y^j ∂_{y^k} (horizontal part h,
//! vertical part v), or in the coordinate frame {∂_{x^i}, ∂_{y^i}}. The two are
//! related by dx = h, dy = v − (Γy)h.

use nalgebra::{DMatrix, DVector};

use crate::base::ChartedManifold;
use crate::error::{Error, Result};
use crate::tensor::Christoffel;
use crate::weights::{LeeCoefficient, WeightFunction, WeightValues};

/// A point (p, u) of T(M) with base data cached.
#[derive(Debug, Clone)]
pub struct BundlePoint {
    x: DVector<f64>,
    y: DVector<f64>,
    g: DMatrix<f64>,
    gamma: Christoffel,
    gamma_y: DMatrix<f64>,
    t: f64,
    r: f64,
}

impl BundlePoint {
    pub fn new(man: &ChartedManifold, x: DVector<f64>, y: DVector<f64>) -> Result<Self> {
        if y.len() != man.dim() {
            return Err(Error::Usage(format!(
                "fiber vector has {} components, manifold dimension is {}",
                y.len(),
                man.dim()
            )));
        }
        let g = man.metric_at(&x)?;
        let gamma = man.christoffel_at(&x)?;
        let gamma_y = gamma.contract_last(&y);
        let t = 0.5 * y.dot(&(&g * &y));
        let r = (1.0 + 2.0 * t).sqrt();
        Ok(Self { x, y, g, gamma, gamma_y, t, r })
    }

    /// Point from stacked chart coordinates z = (x, y).
    pub fn from_coords(man: &ChartedManifold, z: &[f64]) -> Result<Self> {
        let m = man.dim();
        if z.len() != 2 * m {
            return Err(Error::Usage(format!("expected {} bundle coordinates, got {}", 2 * m, z.len())));
        }
        Self::new(man, DVector::from_column_slice(&z[..m]), DVector::from_column_slice(&z[m..]))
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }
    pub fn x(&self) -> &DVector<f64> {
        &self.x
    }
    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }
    pub fn metric(&self) -> &DMatrix<f64> {
        &self.g
    }
    pub fn christoffel(&self) -> &Christoffel {
        &self.gamma
    }
    pub fn t(&self) -> f64 {
        self.t
    }
    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn coords(&self) -> Vec<f64> {
        self.x.iter().chain(self.y.iter()).copied().collect()
    }

    /// g(X, Y) at the base point.
    pub fn inner(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        a.dot(&(&self.g * b))
    }

    /// g(X, u).
    pub fn with_u(&self, a: &DVector<f64>) -> f64 {
        self.inner(a, &self.y)
    }

    pub fn u_norm(&self) -> f64 {
        (2.0 * self.t).sqrt()
    }

    pub fn horizontal(&self, x: DVector<f64>) -> TMVector {
        let n = x.len();
        self.adapted(x, DVector::zeros(n))
    }

    pub fn vertical(&self, x: DVector<f64>) -> TMVector {
        let n = x.len();
        self.adapted(DVector::zeros(n), x)
    }

    pub fn adapted(&self, h: DVector<f64>, v: DVector<f64>) -> TMVector {
        TMVector { anchor: self.coords(), repr: Repr::Adapted { h, v } }
    }

    pub fn coordinate(&self, dx: DVector<f64>, dy: DVector<f64>) -> TMVector {
        TMVector { anchor: self.coords(), repr: Repr::Coordinate { dx, dy } }
    }

    /// Coordinate → adapted change of components, P = [[I, 0], [Γy, I]].
    pub fn to_adapted_matrix(&self) -> DMatrix<f64> {
        let m = self.dim();
        let mut p = DMatrix::identity(2 * m, 2 * m);
        p.view_mut((m, 0), (m, m)).copy_from(&self.gamma_y);
        p
    }

    /// Adapted → coordinate, P⁻¹ = [[I, 0], [−Γy, I]].
    pub fn to_coordinate_matrix(&self) -> DMatrix<f64> {
        let m = self.dim();
        let mut p = DMatrix::identity(2 * m, 2 * m);
        p.view_mut((m, 0), (m, m)).copy_from(&(-&self.gamma_y));
        p
    }

    fn check_anchor(&self, v: &TMVector) -> Result<()> {
        if v.anchor.as_slice() != self.coords().as_slice() {
            return Err(Error::Usage("tangent vector is anchored at a different point".into()));
        }
        if v.dim() != self.dim() {
            return Err(Error::Usage("tangent vector has the wrong dimension".into()));
        }
        Ok(())
    }

    /// Adapted components (h, v) of a tangent vector anchored here.
    pub fn split(&self, v: &TMVector) -> Result<(DVector<f64>, DVector<f64>)> {
        self.check_anchor(v)?;
        Ok(match &v.repr {
            Repr::Adapted { h, v } => (h.clone(), v.clone()),
            Repr::Coordinate { dx, dy } => (dx.clone(), dy + &self.gamma_y * dx),
        })
    }

    /// Coordinate components (dx, dy) of a tangent vector anchored here.
    pub fn coordinates_of(&self, v: &TMVector) -> Result<(DVector<f64>, DVector<f64>)> {
        self.check_anchor(v)?;
        Ok(match &v.repr {
            Repr::Adapted { h, v } => (h.clone(), v - &self.gamma_y * h),
            Repr::Coordinate { dx, dy } => (dx.clone(), dy.clone()),
        })
    }

    pub fn to_adapted(&self, v: &TMVector) -> Result<TMVector> {
        let (h, vv) = self.split(v)?;
        Ok(self.adapted(h, vv))
    }

    pub fn to_coordinate(&self, v: &TMVector) -> Result<TMVector> {
        let (dx, dy) = self.coordinates_of(v)?;
        Ok(self.coordinate(dx, dy))
    }

    /// Stacked coordinate components (dx, dy) as one 2m-vector.
    pub fn coordinate_stack(&self, v: &TMVector) -> Result<DVector<f64>> {
        let (dx, dy) = self.coordinates_of(v)?;
        Ok(stack(&dx, &dy))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Adapted { h: DVector<f64>, v: DVector<f64> },
    Coordinate { dx: DVector<f64>, dy: DVector<f64> },
}

/// Tangent vector to T(M) anchored at a bundle point.
#[derive(Debug, Clone, PartialEq)]
pub struct TMVector {
    anchor: Vec<f64>,
    repr: Repr,
}

impl TMVector {
    pub fn dim(&self) -> usize {
        match &self.repr {
            Repr::Adapted { h, .. } => h.len(),
            Repr::Coordinate { dx, .. } => dx.len(),
        }
    }

    pub fn is_adapted(&self) -> bool {
        matches!(self.repr, Repr::Adapted { .. })
    }

    /// The raw stored pair: (h, v) if adapted, (dx, dy) if coordinate.
    pub fn parts(&self) -> (&DVector<f64>, &DVector<f64>) {
        match &self.repr {
            Repr::Adapted { h, v } => (h, v),
            Repr::Coordinate { dx, dy } => (dx, dy),
        }
    }

    pub fn scaled(&self, s: f64) -> TMVector {
        let repr = match &self.repr {
            Repr::Adapted { h, v } => Repr::Adapted { h: h * s, v: v * s },
            Repr::Coordinate { dx, dy } => Repr::Coordinate { dx: dx * s, dy: dy * s },
        };
        TMVector { anchor: self.anchor.clone(), repr }
    }
}

pub(crate) fn stack(a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(a.len() + b.len(), a.iter().chain(b.iter()).copied())
}

/// The bundle (T(M), g_a, J_a) over a charted base.
#[derive(Debug, Clone)]
pub struct TangentBundle {
    man: ChartedManifold,
    weight: WeightFunction,
}

impl TangentBundle {
    pub fn new(man: ChartedManifold, weight: WeightFunction) -> Self {
        Self { man, weight }
    }

    pub fn base(&self) -> &ChartedManifold {
        &self.man
    }

    pub fn weight(&self) -> &WeightFunction {
        &self.weight
    }

    pub fn dim(&self) -> usize {
        self.man.dim()
    }

    pub fn point(&self, x: &[f64], y: &[f64]) -> Result<BundlePoint> {
        BundlePoint::new(&self.man, DVector::from_column_slice(x), DVector::from_column_slice(y))
    }

    pub fn point_at(&self, z: &[f64]) -> Result<BundlePoint> {
        BundlePoint::from_coords(&self.man, z)
    }

    pub fn weight_at(&self, p: &BundlePoint) -> Result<WeightValues> {
        self.weight.eval(p.t)
    }

    /// g_a on adapted components.
    pub fn g_a_adapted(
        &self,
        p: &BundlePoint,
        (h1, v1): (&DVector<f64>, &DVector<f64>),
        (h2, v2): (&DVector<f64>, &DVector<f64>),
    ) -> Result<f64> {
        let a = self.weight_at(p)?.a;
        Ok(p.inner(h1, h2) + a * (p.inner(v1, v2) + p.with_u(v1) * p.with_u(v2)))
    }

    pub fn g_a(&self, p: &BundlePoint, u: &TMVector, v: &TMVector) -> Result<f64> {
        let (h1, v1) = p.split(u)?;
        let (h2, v2) = p.split(v)?;
        self.g_a_adapted(p, (&h1, &v1), (&h2, &v2))
    }

    /// g_a as a 2m×2m matrix on adapted components.
    pub fn adapted_metric(&self, p: &BundlePoint) -> Result<DMatrix<f64>> {
        let m = p.dim();
        let a = self.weight_at(p)?.a;
        let gy = &p.g * &p.y;
        let mut out = DMatrix::zeros(2 * m, 2 * m);
        out.view_mut((0, 0), (m, m)).copy_from(&p.g);
        out.view_mut((m, m), (m, m)).copy_from(&((&p.g + &gy * gy.transpose()) * a));
        Ok(out)
    }

    /// g_a in the coordinate frame {∂_x, ∂_y}.
    pub fn induced_coordinate_metric(&self, p: &BundlePoint) -> Result<DMatrix<f64>> {
        let pm = p.to_adapted_matrix();
        let g = pm.transpose() * self.adapted_metric(p)? * &pm;
        // exact symmetry despite rounding in the triple product
        Ok((&g + g.transpose()) * 0.5)
    }

    /// J_a on adapted components.
    pub fn j_adapted(
        &self,
        p: &BundlePoint,
        h: &DVector<f64>,
        v: &DVector<f64>,
    ) -> Result<(DVector<f64>, DVector<f64>)> {
        let sa = self.weight_at(p)?.a.sqrt();
        let r = p.r;
        let u = &p.y;
        let jh = -(v + u * (p.with_u(v) / (1.0 + r))) * sa;
        let jv = (h - u * (p.with_u(h) / (r * (1.0 + r)))) / sa;
        Ok((jh, jv))
    }

    /// J_a U, returned in adapted form.
    pub fn apply_j(&self, p: &BundlePoint, u: &TMVector) -> Result<TMVector> {
        let (h, v) = p.split(u)?;
        let (jh, jv) = self.j_adapted(p, &h, &v)?;
        Ok(p.adapted(jh, jv))
    }

    /// J_a as a 2m×2m matrix acting on adapted components.
    pub fn j_adapted_matrix(&self, p: &BundlePoint) -> Result<DMatrix<f64>> {
        let m = p.dim();
        let mut out = DMatrix::zeros(2 * m, 2 * m);
        for col in 0..2 * m {
            let mut e = DVector::zeros(2 * m);
            e[col] = 1.0;
            let h = e.rows(0, m).into_owned();
            let v = e.rows(m, m).into_owned();
            let (jh, jv) = self.j_adapted(p, &h, &v)?;
            out.column_mut(col).copy_from(&stack(&jh, &jv));
        }
        Ok(out)
    }

    /// J_a as a (1,1)-tensor in the coordinate frame.
    pub fn j_coordinate_matrix(&self, p: &BundlePoint) -> Result<DMatrix<f64>> {
        Ok(p.to_coordinate_matrix() * self.j_adapted_matrix(p)? * p.to_adapted_matrix())
    }

    /// Ω_a(U, V) = g_a(U, J_a V).
    pub fn kaehler_form(&self, p: &BundlePoint, u: &TMVector, v: &TMVector) -> Result<f64> {
        let jv = self.apply_j(p, v)?;
        self.g_a(p, u, &jv)
    }

    /// Ω_a components Ω(∂_A, ∂_B) in the coordinate frame.
    pub fn kaehler_coordinate_matrix(&self, p: &BundlePoint) -> Result<DMatrix<f64>> {
        let om = self.induced_coordinate_metric(p)? * self.j_coordinate_matrix(p)?;
        Ok((&om - om.transpose()) * 0.5)
    }

    /// ω(U) with ω(X^H) = 0 and ω(X^V) = λ(t) g(X, u).
    pub fn lee_form(&self, p: &BundlePoint, u: &TMVector, coefficient: LeeCoefficient) -> Result<f64> {
        let (_, v) = p.split(u)?;
        Ok(self.weight.lee_coefficient(coefficient, p.t)? * p.with_u(&v))
    }

    /// ω(∂_A) in the coordinate frame.
    pub fn lee_coordinate_covector(&self, p: &BundlePoint, coefficient: LeeCoefficient) -> Result<DVector<f64>> {
        let m = p.dim();
        let lambda = self.weight.lee_coefficient(coefficient, p.t)?;
        let adapted = stack(&DVector::zeros(m), &(&p.g * &p.y * lambda));
        Ok(p.to_adapted_matrix().transpose() * adapted)
    }

    /// The g-orthonormal base frame e_1 = u/|u|, completed by pivoted
    /// Gram–Schmidt over the coordinate basis.
    pub fn base_frame(&self, p: &BundlePoint) -> Result<Vec<DVector<f64>>> {
        let n = p.u_norm();
        if !(n > 1e-12) {
            return Err(Error::Degenerate("the adapted frame needs a nonzero fiber vector".into()));
        }
        Ok(gram_schmidt(&p.g, Some(&p.y / n)))
    }

    /// A g-orthonormal base frame valid also at u = 0 (u-seeded when possible).
    pub fn any_base_frame(&self, p: &BundlePoint) -> Vec<DVector<f64>> {
        let n = p.u_norm();
        gram_schmidt(&p.g, (n > 1e-12).then(|| &p.y / n))
    }

    /// E_i = e_i^H, E_{m+1} = e_1^V/(r√a), E_{m+k} = e_k^V/√a.
    pub fn adapted_frame(&self, p: &BundlePoint) -> Result<Vec<TMVector>> {
        let e = self.base_frame(p)?;
        let sa = self.weight_at(p)?.a.sqrt();
        let mut out: Vec<TMVector> = e.iter().map(|ei| p.horizontal(ei.clone())).collect();
        for (k, ek) in e.iter().enumerate() {
            let s = if k == 0 { 1.0 / (p.r * sa) } else { 1.0 / sa };
            out.push(p.vertical(ek * s));
        }
        Ok(out)
    }
}

/// Orthonormalize with respect to g: optional unit seed first, then the
/// coordinate vector with the largest residual at each step (ties to the
/// lowest index), which skips the candidates most parallel to the span.
fn gram_schmidt(g: &DMatrix<f64>, seed: Option<DVector<f64>>) -> Vec<DVector<f64>> {
    let n = g.nrows();
    let ip = |a: &DVector<f64>, b: &DVector<f64>| a.dot(&(g * b));
    let mut frame: Vec<DVector<f64>> = Vec::with_capacity(n);
    if let Some(s) = seed {
        let norm = ip(&s, &s).sqrt();
        frame.push(s / norm);
    }
    let mut used = vec![false; n];
    while frame.len() < n {
        let mut best: Option<(usize, DVector<f64>, f64)> = None;
        for (i, taken) in used.iter().enumerate() {
            if *taken {
                continue;
            }
            let mut v = DVector::zeros(n);
            v[i] = 1.0;
            for _ in 0..2 {
                for f in &frame {
                    let c = ip(&v, f);
                    v -= f * c;
                }
            }
            let norm = ip(&v, &v).sqrt();
            if best.as_ref().is_none_or(|b| norm > b.2) {
                best = Some((i, v, norm));
            }
        }
        let (i, v, norm) = best.expect("a candidate remains while the frame is incomplete");
        used[i] = true;
        frame.push(v / norm);
    }
    frame
}
