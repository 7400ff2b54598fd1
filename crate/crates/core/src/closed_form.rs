//! Closed-form Levi-Civita connection, curvature, sectional and scalar
//! curvature and Nijenhuis components of (T(M), g_a, J_a), expressed through
//! base curvature and the weight scalars L, F1, F2, F3.
//!
//! Vector arguments X, Y, Z are base vectors at the point; results are
//! returned as adapted-frame tangent vectors. In the connection formulas the
//! lifted fields are extensions of chart-constant base fields, so ∇_X Y
//! reduces to Γ(X, Y).

use nalgebra::DVector;
use serde::Serialize;

use crate::bundle::{BundlePoint, TMVector, TangentBundle};
use crate::error::{Error, Result};
use crate::tensor::{NablaRiemann, Riemann};
use crate::weights::{FCoeffs, WeightValues};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Lift {
    H,
    V,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LiftPair {
    HH,
    HV,
    VH,
    VV,
}

impl LiftPair {
    pub const ALL: [LiftPair; 4] = [LiftPair::HH, LiftPair::HV, LiftPair::VH, LiftPair::VV];

    pub fn lifts(self) -> (Lift, Lift) {
        match self {
            LiftPair::HH => (Lift::H, Lift::H),
            LiftPair::HV => (Lift::H, Lift::V),
            LiftPair::VH => (Lift::V, Lift::H),
            LiftPair::VV => (Lift::V, Lift::V),
        }
    }
}

/// Lift kinds of (X, Y, Z) in R̃(X, Y)Z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[allow(clippy::upper_case_acronyms)]
pub enum CurvatureCase {
    HHH,
    HHV,
    HVH,
    HVV,
    VVH,
    VVV,
}

impl CurvatureCase {
    pub const ALL: [CurvatureCase; 6] = [
        CurvatureCase::HHH,
        CurvatureCase::HHV,
        CurvatureCase::HVH,
        CurvatureCase::HVV,
        CurvatureCase::VVH,
        CurvatureCase::VVV,
    ];

    pub fn lifts(self) -> (Lift, Lift, Lift) {
        use Lift::*;
        match self {
            CurvatureCase::HHH => (H, H, H),
            CurvatureCase::HHV => (H, H, V),
            CurvatureCase::HVH => (H, V, H),
            CurvatureCase::HVV => (H, V, V),
            CurvatureCase::VVH => (V, V, H),
            CurvatureCase::VVV => (V, V, V),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PairClass {
    #[serde(rename = "HH")]
    HH,
    #[serde(rename = "H-V1")]
    HV1,
    #[serde(rename = "H-Vk")]
    HVk,
    #[serde(rename = "V1-Vk")]
    V1Vk,
    #[serde(rename = "Vk-Vl")]
    VkVl,
}

impl PairClass {
    pub fn label(self) -> &'static str {
        match self {
            PairClass::HH => "HH",
            PairClass::HV1 => "H-V1",
            PairClass::HVk => "H-Vk",
            PairClass::V1Vk => "V1-Vk",
            PairClass::VkVl => "Vk-Vl",
        }
    }

    /// Class of the frame pair (A, B), A < B, 0-based over 2m vectors.
    pub fn of(m: usize, a: usize, b: usize) -> PairClass {
        match (a < m, b < m) {
            (true, true) => PairClass::HH,
            (true, false) if b == m => PairClass::HV1,
            (true, false) => PairClass::HVk,
            (false, false) if a == m => PairClass::V1Vk,
            _ => PairClass::VkVl,
        }
    }
}

/// Which printed coefficient to use where the derivation and the numerics
/// disagree. `Consistent` is what the curvature tensor itself implies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulaVariant {
    /// K̃(E_i, E_{m+k}) = (a/4)|R_{u e_k} e_i|², scalar mixed term −a/2.
    Consistent,
    /// K̃(E_i, E_{m+k}) = ¼|R_{u e_k} e_i|², scalar mixed term (2 − 3a)/2.
    AsPrinted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SectionalEntry {
    pub class: PairClass,
    /// 1-based frame indices.
    pub a: usize,
    pub b: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectionalTable {
    pub m: usize,
    pub entries: Vec<SectionalEntry>,
}

impl SectionalTable {
    pub fn get(&self, a: usize, b: usize) -> Option<f64> {
        self.entries.iter().find(|e| e.a == a && e.b == b).map(|e| e.value)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |acc, e| acc.max(e.value.abs()))
    }
}

/// Everything the closed forms need at one bundle point, evaluated once.
pub struct ClosedForm<'a> {
    bundle: &'a TangentBundle,
    p: &'a BundlePoint,
    w: WeightValues,
    l: f64,
    f: FCoeffs,
    riem: Riemann,
    nabla: NablaRiemann,
}

impl<'a> ClosedForm<'a> {
    pub fn new(bundle: &'a TangentBundle, p: &'a BundlePoint) -> Result<Self> {
        let weight = bundle.weight();
        let w = weight.eval(p.t())?;
        let riem = bundle.base().riemann_at(p.x())?;
        let nabla = bundle.base().nabla_riemann_at(p.x())?;
        Ok(Self { bundle, p, w, l: weight.L_of(p.t())?, f: weight.f_coeffs(p.t())?, riem, nabla })
    }

    pub fn point(&self) -> &BundlePoint {
        self.p
    }

    pub fn riemann(&self) -> &Riemann {
        &self.riem
    }

    fn u(&self) -> &DVector<f64> {
        self.p.y()
    }

    fn g(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        self.p.inner(a, b)
    }

    fn gu(&self, a: &DVector<f64>) -> f64 {
        self.p.with_u(a)
    }

    fn r(&self, x: &DVector<f64>, y: &DVector<f64>, z: &DVector<f64>) -> DVector<f64> {
        self.riem.apply(x, y, z)
    }

    fn dr(&self, e: &DVector<f64>, x: &DVector<f64>, y: &DVector<f64>, z: &DVector<f64>) -> DVector<f64> {
        self.nabla.apply(e, x, y, z)
    }

    fn zero(&self) -> DVector<f64> {
        DVector::zeros(self.p.dim())
    }

    fn out(&self, h: DVector<f64>, v: DVector<f64>) -> TMVector {
        self.p.adapted(h, v)
    }

    /// ∇̃_{X^?} Y^? for chart-constant X, Y.
    pub fn nabla(&self, pair: LiftPair, x: &DVector<f64>, y: &DVector<f64>) -> TMVector {
        let a = self.w.a;
        let u = self.u();
        let r2 = self.p.r() * self.p.r();
        let l = self.l;
        let gamma = self.p.christoffel().apply(x, y);
        match pair {
            LiftPair::HH => self.out(gamma, -self.r(x, y, u) * 0.5),
            LiftPair::HV => self.out(self.r(u, y, x) * (a / 2.0), gamma),
            LiftPair::VH => self.out(self.r(u, x, y) * (a / 2.0), self.zero()),
            LiftPair::VV => {
                let (gx, gy) = (self.gu(x), self.gu(y));
                let v = (y * gx + x * gy) * l
                    + u * ((1.0 - l) / r2 * self.g(x, y) - l / r2 * gx * gy);
                self.out(self.zero(), v)
            }
        }
    }

    /// R̃(X^?, Y^?)Z^? for one of the six displayed lift patterns.
    pub fn curvature(&self, case: CurvatureCase, x: &DVector<f64>, y: &DVector<f64>, z: &DVector<f64>) -> TMVector {
        let (a, da) = (self.w.a, self.w.da);
        let u = self.u();
        let r2 = self.p.r() * self.p.r();
        let l = self.l;
        match case {
            CurvatureCase::HHH => {
                let h = self.r(x, y, z)
                    + (self.r(u, &self.r(x, z, u), y) - self.r(u, &self.r(y, z, u), x)
                        + self.r(u, &self.r(x, y, u), z) * 2.0)
                        * (a / 4.0);
                let v = self.dr(z, x, y, u) * 0.5;
                self.out(h, v)
            }
            CurvatureCase::HHV => {
                let rxyu = self.r(x, y, u);
                let v = self.r(x, y, z)
                    + (self.r(y, &self.r(u, z, x), u) - self.r(x, &self.r(u, z, y), u)) * (a / 4.0)
                    + &rxyu * (l * self.gu(z))
                    + u * ((1.0 - l) / r2 * self.g(&rxyu, z));
                let h = (self.dr(x, u, z, y) - self.dr(y, u, z, x)) * (a / 2.0);
                self.out(h, v)
            }
            CurvatureCase::HVH => {
                let h = self.dr(x, u, y, z) * (a / 2.0);
                let rxzu = self.r(x, z, u);
                let v = (self.r(x, z, y) - self.r(x, &self.r(u, y, z), u) * (a / 2.0)
                    + &rxzu * (l * self.gu(y))
                    + u * ((1.0 - l) / r2 * self.g(&rxzu, y)))
                    * 0.5;
                self.out(h, v)
            }
            CurvatureCase::HVV => {
                let h = -self.r(y, z, x) * (a / 2.0)
                    - self.r(u, y, &self.r(u, z, x)) * (a * a / 4.0)
                    + (self.r(u, y, x) * self.gu(z) - self.r(u, z, x) * self.gu(y)) * (da / 4.0);
                self.out(h, self.zero())
            }
            CurvatureCase::VVH => {
                let h = self.r(x, y, z) * a
                    + (self.r(u, y, z) * self.gu(x) - self.r(u, x, z) * self.gu(y)) * (da / 2.0)
                    + (self.r(u, x, &self.r(u, y, z)) - self.r(u, y, &self.r(u, x, z))) * (a * a / 4.0);
                self.out(h, self.zero())
            }
            CurvatureCase::VVV => {
                let FCoeffs { f1, f2, f3 } = self.f;
                let (gx, gy, gz) = (self.gu(x), self.gu(y), self.gu(z));
                let v = (y * gx - x * gy) * (f1 * gz)
                    + (y * self.g(x, z) - x * self.g(y, z)) * f2
                    + u * (f3 * (self.g(x, z) * gy - self.g(y, z) * gx));
                self.out(self.zero(), v)
            }
        }
    }

    /// R̃(U, V)W for arbitrary tangent vectors, by expanding into lifts.
    pub fn curvature_full(&self, u: &TMVector, v: &TMVector, w: &TMVector) -> Result<TMVector> {
        let split = |t: &TMVector| self.p.split(t);
        let (uh, uv) = split(u)?;
        let (vh, vv) = split(v)?;
        let (wh, wv) = split(w)?;
        let m = self.p.dim();
        let mut h = DVector::zeros(m);
        let mut vert = DVector::zeros(m);
        let mut acc = |t: TMVector, s: f64| {
            let (a, b) = t.parts();
            h += a * s;
            vert += b * s;
        };
        use CurvatureCase::*;
        for (z, lz) in [(&wh, Lift::H), (&wv, Lift::V)] {
            let (hh, hv, vv_) = match lz {
                Lift::H => (HHH, HVH, VVH),
                Lift::V => (HHV, HVV, VVV),
            };
            acc(self.curvature(hh, &uh, &vh, z), 1.0);
            acc(self.curvature(hv, &uh, &vv, z), 1.0);
            // R̃(X^V, Y^H) = −R̃(Y^H, X^V)
            acc(self.curvature(hv, &vh, &uv, z), -1.0);
            acc(self.curvature(vv_, &uv, &vv, z), 1.0);
        }
        Ok(self.out(h, vert))
    }

    /// Q̃(U, V) = g_a(U,U) g_a(V,V) − g_a(U,V)².
    pub fn area_sq(&self, u: &TMVector, v: &TMVector) -> Result<f64> {
        area_sq(self.bundle, self.p, u, v)
    }

    /// g_a(R̃(U,V)V, U) / Q̃(U,V) from the full tensor.
    pub fn sectional_from_tensor(&self, u: &TMVector, v: &TMVector) -> Result<f64> {
        let q = self.area_sq(u, v)?;
        let gu = self.bundle.g_a(self.p, u, u)?;
        let gv = self.bundle.g_a(self.p, v, v)?;
        if !(q > 1e-12 * gu * gv) {
            return Err(Error::Degenerate("tangent vectors span a degenerate plane".into()));
        }
        let rvv = self.curvature_full(u, v, v)?;
        Ok(self.bundle.g_a(self.p, &rvv, u)? / q)
    }

    pub fn sectional_table(&self, variant: FormulaVariant) -> Result<SectionalTable> {
        let e = self.bundle.base_frame(self.p)?;
        let m = self.p.dim();
        let a = self.w.a;
        let t = self.p.t();
        let FCoeffs { f2, f3, .. } = self.f;
        let u = self.u();
        let norm_sq = |v: &DVector<f64>| self.g(v, v);
        let mut entries = Vec::with_capacity(m * (2 * m - 1));
        for ia in 0..2 * m {
            for ib in ia + 1..2 * m {
                let class = PairClass::of(m, ia, ib);
                let value = match class {
                    PairClass::HH => {
                        let (ei, ej) = (&e[ia], &e[ib]);
                        let k = self.g(&self.r(ei, ej, ej), ei);
                        k - 0.75 * a * norm_sq(&self.r(ei, ej, u))
                    }
                    PairClass::HV1 => 0.0,
                    PairClass::HVk => {
                        let s = norm_sq(&self.r(u, &e[ib - m], &e[ia]));
                        match variant {
                            FormulaVariant::Consistent => 0.25 * a * s,
                            FormulaVariant::AsPrinted => 0.25 * s,
                        }
                    }
                    PairClass::V1Vk => -(f2 + 2.0 * t * f3) / a,
                    PairClass::VkVl => -f2 / a,
                };
                entries.push(SectionalEntry { class, a: ia + 1, b: ib + 1, value });
            }
        }
        Ok(SectionalTable { m, entries })
    }

    /// The adapted frame matching `sectional_table`'s indexing.
    pub fn frame(&self) -> Result<Vec<TMVector>> {
        self.bundle.adapted_frame(self.p)
    }

    /// Displayed Nijenhuis components for the HH and VV lift pairs.
    pub fn nijenhuis(&self, pair: LiftPair, x: &DVector<f64>, y: &DVector<f64>) -> Result<TMVector> {
        let (a, da) = (self.w.a, self.w.da);
        let r = self.p.r();
        let u = self.u();
        let (gx, gy) = (self.gu(x), self.gu(y));
        match pair {
            LiftPair::HH => {
                let k = (2.0 * a - (1.0 + r) * da) / (2.0 * a * a * r * (1.0 + r));
                let v = (y * gx - x * gy) * k + self.r(x, y, u);
                Ok(self.out(self.zero(), v))
            }
            LiftPair::VV => {
                let lam = da / (2.0 * a) - 1.0 / (1.0 + r);
                let v = -self.r(x, y, u) * a - self.r(x, u, u) * (a / (1.0 + r) * gy)
                    + self.r(y, u, u) * (a / (1.0 + r) * gx)
                    - (x * gy - y * gx) * lam;
                Ok(self.out(self.zero(), v))
            }
            LiftPair::HV | LiftPair::VH => Err(Error::Unsupported(
                "no closed form for the mixed Nijenhuis component; use the numeric oracle".into(),
            )),
        }
    }

    /// Scalar curvature of g_a from base data, using the given orthonormal
    /// base frame (any frame works; the sum is frame independent).
    pub fn scalar_with_frame(&self, e: &[DVector<f64>], variant: FormulaVariant) -> f64 {
        let m = self.p.dim();
        let a = self.w.a;
        let t = self.p.t();
        let FCoeffs { f2, f3, .. } = self.f;
        let u = self.u();
        let scal = crate::base::scalar_from(self.p.metric(), &self.riem);
        let mut s = 0.0;
        for i in 0..m {
            for j in i + 1..m {
                let v = self.r(&e[i], &e[j], u);
                s += self.g(&v, &v);
            }
        }
        let mixed = match variant {
            FormulaVariant::Consistent => -a / 2.0,
            FormulaVariant::AsPrinted => (2.0 - 3.0 * a) / 2.0,
        };
        let mf = m as f64;
        scal + mixed * s + (1.0 - mf) / a * (mf * f2 + 4.0 * t * f3)
    }

    pub fn scalar(&self, variant: FormulaVariant) -> f64 {
        let e = self.bundle.any_base_frame(self.p);
        self.scalar_with_frame(&e, variant)
    }
}

pub fn area_sq(bundle: &TangentBundle, p: &BundlePoint, u: &TMVector, v: &TMVector) -> Result<f64> {
    let uu = bundle.g_a(p, u, u)?;
    let vv = bundle.g_a(p, v, v)?;
    let uv = bundle.g_a(p, u, v)?;
    Ok(uu * vv - uv * uv)
}

pub fn nabla_tilde(
    bundle: &TangentBundle,
    p: &BundlePoint,
    pair: LiftPair,
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<TMVector> {
    Ok(ClosedForm::new(bundle, p)?.nabla(pair, x, y))
}

pub fn curvature_tilde(
    bundle: &TangentBundle,
    p: &BundlePoint,
    case: CurvatureCase,
    x: &DVector<f64>,
    y: &DVector<f64>,
    z: &DVector<f64>,
) -> Result<TMVector> {
    Ok(ClosedForm::new(bundle, p)?.curvature(case, x, y, z))
}

pub fn sectional_table(bundle: &TangentBundle, p: &BundlePoint) -> Result<SectionalTable> {
    ClosedForm::new(bundle, p)?.sectional_table(FormulaVariant::Consistent)
}

pub fn nijenhuis_closed(
    bundle: &TangentBundle,
    p: &BundlePoint,
    pair: LiftPair,
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<TMVector> {
    ClosedForm::new(bundle, p)?.nijenhuis(pair, x, y)
}

pub fn scalar_tilde(bundle: &TangentBundle, p: &BundlePoint) -> Result<f64> {
    Ok(ClosedForm::new(bundle, p)?.scalar(FormulaVariant::Consistent))
}
