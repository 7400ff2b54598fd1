//! Brute-force geometry of the induced 2m-dimensional coordinate metric on
//! T(M). Nothing here uses the closed forms: Christoffel symbols and
//! curvature come from finite differences of G(x, y), brackets and dΩ from
//! finite differences of coordinate fields.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::base::{levi_civita_numeric, sectional_from, scalar_from};
use crate::bundle::{BundlePoint, TangentBundle};
use crate::closed_form::{Lift, LiftPair};
use crate::error::{Error, Result};
use crate::fd;
use crate::tensor::{Christoffel, Riemann, TensorValue, Variance};
use crate::weights::LeeCoefficient;

fn induced_field(bundle: &TangentBundle) -> impl Fn(&[f64]) -> Result<DMatrix<f64>> + '_ {
    move |z: &[f64]| {
        let p = bundle.point_at(z)?;
        bundle.induced_coordinate_metric(&p)
    }
}

/// Coordinate components of the lift of a chart-constant base vector, as a
/// field on T(M).
fn lift_field<'a>(bundle: &'a TangentBundle, kind: Lift, x: &'a DVector<f64>) -> impl Fn(&[f64]) -> Result<Vec<f64>> + 'a {
    move |z: &[f64]| {
        let p = bundle.point_at(z)?;
        let v = match kind {
            Lift::H => p.horizontal(x.clone()),
            Lift::V => p.vertical(x.clone()),
        };
        Ok(p.coordinate_stack(&v)?.as_slice().to_vec())
    }
}

/// Christoffel symbols of the induced metric at z = (x, y).
pub fn numeric_christoffel_2m(bundle: &TangentBundle, z: &[f64]) -> Result<Christoffel> {
    let h = bundle.base().steps().first;
    let n = 2 * bundle.dim();
    crate::base::christoffel_from_field(induced_field(bundle), z, n, h).map(|(_, g)| g)
}

/// ∇_{∂_i} ∂_j = Γ̃^k_{ij} ∂_k of the induced metric.
pub fn numeric_connection(bundle: &TangentBundle, z: &[f64], i: usize, j: usize) -> Result<DVector<f64>> {
    let n = 2 * bundle.dim();
    if i >= n || j >= n {
        return Err(Error::Usage(format!("coordinate index out of range 0..{n}")));
    }
    let gamma = numeric_christoffel_2m(bundle, z)?;
    Ok(DVector::from_fn(n, |k, _| gamma.0.get(&[k, i, j])))
}

/// ∇̃_U V for U, V lifts of chart-constant base vectors, in coordinates.
pub fn numeric_nabla(
    bundle: &TangentBundle,
    z: &[f64],
    pair: LiftPair,
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<DVector<f64>> {
    let (lu, lv) = pair.lifts();
    let h = bundle.base().steps().first;
    let u = DVector::from_vec(lift_field(bundle, lu, x)(z)?);
    let vfield = lift_field(bundle, lv, y);
    let v = DVector::from_vec(vfield(z)?);
    let dv = fd::directional(&vfield, z, u.as_slice(), h)?;
    let gamma = numeric_christoffel_2m(bundle, z)?;
    Ok(DVector::from_vec(dv) + gamma.apply(&u, &v))
}

/// Induced metric and its numeric curvature at z.
pub struct NumericCurvature {
    pub metric: DMatrix<f64>,
    pub riemann: Riemann,
}

impl NumericCurvature {
    pub fn sectional(&self, u: &DVector<f64>, v: &DVector<f64>) -> Result<f64> {
        sectional_from(&self.metric, &self.riemann, u, v)
    }

    pub fn scalar(&self) -> f64 {
        scalar_from(&self.metric, &self.riemann)
    }
}

pub fn numeric_riemann_2m(bundle: &TangentBundle, z: &[f64]) -> Result<NumericCurvature> {
    let lc = levi_civita_numeric(induced_field(bundle), z, 2 * bundle.dim(), bundle.base().steps())?;
    Ok(NumericCurvature { metric: lc.metric, riemann: lc.riemann })
}

pub fn numeric_scalar_2m(bundle: &TangentBundle, z: &[f64]) -> Result<f64> {
    Ok(numeric_riemann_2m(bundle, z)?.scalar())
}

fn rank3(n: usize, f: impl Fn(usize, usize, usize) -> f64) -> TensorValue {
    TensorValue::from_fn(&[n, n, n], &[Variance::Covariant; 3], |ix| f(ix[0], ix[1], ix[2]))
}

/// (dΩ)_{ABC} = ∂_A Ω_{BC} + ∂_B Ω_{CA} + ∂_C Ω_{AB}.
pub fn numeric_d_omega(bundle: &TangentBundle, z: &[f64]) -> Result<TensorValue> {
    let n = 2 * bundle.dim();
    let h = bundle.base().steps().first;
    let d = fd::gradient(
        |q| {
            let p = bundle.point_at(q)?;
            let om = bundle.kaehler_coordinate_matrix(&p)?;
            Ok(om.as_slice().to_vec())
        },
        z,
        h,
    )?;
    // column-major flattening: Ω_{BC} at index B + C·n
    let dom = |a: usize, b: usize, c: usize| d[a][b + c * n];
    Ok(rank3(n, |a, b, c| dom(a, b, c) + dom(b, c, a) + dom(c, a, b)))
}

/// (ω∧Ω)_{ABC} = ω_A Ω_{BC} + ω_B Ω_{CA} + ω_C Ω_{AB}, the convention under
/// which dΩ = ω∧Ω is tested against `numeric_d_omega`.
pub fn wedge_omega(bundle: &TangentBundle, z: &[f64], coefficient: LeeCoefficient) -> Result<TensorValue> {
    let p = bundle.point_at(z)?;
    let n = 2 * bundle.dim();
    let om = bundle.kaehler_coordinate_matrix(&p)?;
    let w = bundle.lee_coordinate_covector(&p, coefficient)?;
    Ok(rank3(n, |a, b, c| w[a] * om[(b, c)] + w[b] * om[(c, a)] + w[c] * om[(a, b)]))
}

/// Strictly increasing (A < B < C) components of a rank-3 form.
pub fn form_components(t: &TensorValue) -> Vec<f64> {
    let n = t.shape()[0];
    let mut out = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                out.push(t.get(&[a, b, c]));
            }
        }
    }
    out
}

/// N(U,V) = [JU,JV] − J[JU,V] − J[U,JV] − [U,V] for lifts of chart-constant
/// base vectors, with brackets by central differences; coordinate components.
pub fn numeric_nijenhuis(
    bundle: &TangentBundle,
    z: &[f64],
    kinds: (Lift, Lift),
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<DVector<f64>> {
    let h = bundle.base().steps().first;
    let u = lift_field(bundle, kinds.0, x);
    let v = lift_field(bundle, kinds.1, y);
    let j_of = |f: &dyn Fn(&[f64]) -> Result<Vec<f64>>, q: &[f64]| -> Result<Vec<f64>> {
        let p = bundle.point_at(q)?;
        let jc = bundle.j_coordinate_matrix(&p)?;
        Ok((jc * DVector::from_vec(f(q)?)).as_slice().to_vec())
    };
    let ju = |q: &[f64]| j_of(&u, q);
    let jv = |q: &[f64]| j_of(&v, q);
    // [A,B] = ∂_A B − ∂_B A
    let bracket = |a: &dyn Fn(&[f64]) -> Result<Vec<f64>>, b: &dyn Fn(&[f64]) -> Result<Vec<f64>>| -> Result<DVector<f64>> {
        let av = a(z)?;
        let bv = b(z)?;
        let db = fd::directional(b, z, &av, h)?;
        let da = fd::directional(a, z, &bv, h)?;
        Ok(DVector::from_vec(db) - DVector::from_vec(da))
    };
    let p = bundle.point_at(z)?;
    let jc = bundle.j_coordinate_matrix(&p)?;
    let n1 = bracket(&ju, &jv)?;
    let n2 = &jc * bracket(&ju, &v)?;
    let n3 = &jc * bracket(&u, &jv)?;
    let n4 = bracket(&u, &v)?;
    Ok(n1 - n2 - n3 - n4)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub subject: String,
    pub samples: usize,
    pub max_abs_err: f64,
    pub max_rel_err: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub notes: String,
    /// Whether this comparison decides the overall outcome; informational
    /// comparisons (e.g. rejected candidate formulas) are reported only.
    pub gating: bool,
}

impl ComparisonReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn with_notes(mut self, notes: impl Into<String>) -> Self {
        self.notes = notes.into();
        self
    }

    pub fn informational(mut self) -> Self {
        self.gating = false;
        self
    }

    /// A report for a bound check on a single family of values (e.g.
    /// "max |component| ≤ tol") rather than a pairwise comparison.
    pub fn bound(subject: impl Into<String>, values: &[f64], tolerance: f64) -> Self {
        let worst = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let ok = worst <= tolerance && values.iter().all(|v| v.is_finite());
        ComparisonReport {
            subject: subject.into(),
            samples: values.len(),
            max_abs_err: worst,
            max_rel_err: worst,
            tolerance,
            verdict: if ok { Verdict::Pass } else { Verdict::Fail },
            notes: String::new(),
            gating: true,
        }
    }
}

/// Compare per-sample value lists. The error of a sample is
/// max|closed − oracle| / max(1, max|oracle|); the verdict passes iff the
/// worst sample error is within tolerance.
pub fn compare(
    subject: impl Into<String>,
    closed: &[Vec<f64>],
    oracle: &[Vec<f64>],
    tolerance: f64,
) -> Result<ComparisonReport> {
    let subject = subject.into();
    if closed.len() != oracle.len() {
        return Err(Error::Usage(format!(
            "{subject}: {} closed-form samples vs {} oracle samples",
            closed.len(),
            oracle.len()
        )));
    }
    let mut max_abs = 0.0f64;
    let mut max_rel = 0.0f64;
    let mut finite = true;
    for (c, o) in closed.iter().zip(oracle) {
        if c.len() != o.len() {
            return Err(Error::Usage(format!("{subject}: sample length mismatch {} vs {}", c.len(), o.len())));
        }
        let scale = o.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let err = c.iter().zip(o).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        finite &= err.is_finite();
        max_abs = max_abs.max(err);
        max_rel = max_rel.max(err / scale);
    }
    let ok = finite && max_rel <= tolerance;
    Ok(ComparisonReport {
        subject,
        samples: closed.len(),
        max_abs_err: if finite { max_abs } else { f64::INFINITY },
        max_rel_err: if finite { max_rel } else { f64::INFINITY },
        tolerance,
        verdict: if ok { Verdict::Pass } else { Verdict::Fail },
        notes: String::new(),
        gating: true,
    })
}

/// Least-squares κ with oracle ≈ κ·closed.
pub fn proportionality(closed: &[f64], oracle: &[f64]) -> Option<f64> {
    let cc: f64 = closed.iter().map(|c| c * c).sum();
    if !(cc > 1e-20) {
        return None;
    }
    Some(closed.iter().zip(oracle).map(|(c, o)| c * o).sum::<f64>() / cc)
}

/// Seeded sample of bundle points and base vectors: the base point lies in
/// the ball of half the chart radius, and |u| ∈ (0.1, 2).
pub struct Sample {
    pub point: BundlePoint,
    pub vectors: [DVector<f64>; 3],
}

fn in_ball(rng: &mut ChaCha8Rng, m: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(m, |_, _| rng.gen_range(-1.0..1.0));
        let n = v.norm();
        if n <= 1.0 && n > 1e-3 {
            return v;
        }
    }
}

pub fn sample(bundle: &TangentBundle, seed: u64, index: u64) -> Result<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ index);
    let m = bundle.dim();
    let x = in_ball(&mut rng, m) * (0.5 * bundle.base().chart_radius());
    let dir = in_ball(&mut rng, m);
    let g = bundle.base().metric_at(&x)?;
    let len = rng.gen_range(0.1..2.0);
    let y = &dir * (len / dir.dot(&(&g * &dir)).sqrt());
    let point = BundlePoint::new(bundle.base(), x, y)?;
    let vectors = [in_ball(&mut rng, m), in_ball(&mut rng, m), in_ball(&mut rng, m)];
    Ok(Sample { point, vectors })
}

/// κ = ⟨closed, numeric⟩/⟨closed, closed⟩ for N(X^H, Y^H) on the
/// calibration case (flat plane, unit weight).
pub fn calibrate_nijenhuis_constant() -> Result<f64> {
    use crate::base::ChartedManifold;
    use crate::closed_form::ClosedForm;
    use crate::weights::WeightFunction;
    let b = TangentBundle::new(ChartedManifold::euclidean(2)?, WeightFunction::constant(1.0)?);
    let p = b.point(&[0.1, -0.2], &[0.8, 0.5])?;
    let (x, y) = (DVector::from_vec(vec![1.0, 0.3]), DVector::from_vec(vec![-0.4, 0.9]));
    let closed = p.coordinate_stack(&ClosedForm::new(&b, &p)?.nijenhuis(LiftPair::HH, &x, &y)?)?;
    let numeric = numeric_nijenhuis(&b, &p.coords(), (Lift::H, Lift::H), &x, &y)?;
    proportionality(closed.as_slice(), numeric.as_slice())
        .ok_or_else(|| Error::Degenerate("calibration Nijenhuis value vanished".into()))
}

/// Ratio s with dΩ ≈ s·(ω∧Ω) on the calibration case (flat plane, unit
/// weight), where both sides are nonzero and the Lee coefficient is
/// unambiguous.
pub fn calibrate_wedge_convention() -> Result<f64> {
    use crate::base::ChartedManifold;
    use crate::weights::WeightFunction;
    let b = TangentBundle::new(ChartedManifold::euclidean(2)?, WeightFunction::constant(1.0)?);
    let z = [0.1, -0.2, 0.8, 0.5];
    let d = form_components(&numeric_d_omega(&b, &z)?);
    let w = form_components(&wedge_omega(&b, &z, LeeCoefficient::Resolved)?);
    proportionality(&w, &d).ok_or_else(|| Error::Degenerate("calibration wedge vanished".into()))
}

/// Stack an adapted/coordinate pair into a flat coordinate vector.
pub fn coordinate_vec(p: &BundlePoint, v: &crate::bundle::TMVector) -> Result<Vec<f64>> {
    Ok(p.coordinate_stack(v)?.as_slice().to_vec())
}
