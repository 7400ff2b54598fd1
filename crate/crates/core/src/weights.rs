//! The weight family a(t) > 0 scaling the vertical part of the bundle metric,
//! together with the scalars built from it.
//!
//! Throughout, t is the energy density ½|u|² and r = √(1+2t). Presets given
//! naturally in r are differentiated in r and converted with
//! a′ = a_r / r and a″ = (r·a_rr − a_r) / r³.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::Expr;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightValues {
    pub a: f64,
    pub da: f64,
    pub dda: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FCoeffs {
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
}

/// User weight given as an expression in `t` and/or `r`.
#[derive(Debug, Clone)]
pub struct CustomWeight {
    source: String,
    a: Expr,
    da: Expr,
    dda: Expr,
}

impl CustomWeight {
    pub fn parse(source: &str) -> Result<Self> {
        let a = Expr::parse(source, &["t", "r"])?;
        // along the curve t ↦ (t, √(1+2t)): dt/dt = 1, dr/dt = 1/r
        let rates = [Expr::Num(1.0), Expr::Div(Box::new(Expr::Num(1.0)), Box::new(Expr::Var(1)))];
        let da = a.total_diff(&rates);
        let dda = da.total_diff(&rates);
        Ok(Self { source: source.trim().to_string(), a, da, dda })
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}

#[derive(Debug, Clone)]
pub enum WeightFunction {
    /// a = 1/(1+2t)
    CheegerGromoll,
    /// a = 2e^{r−1}/(1+r)
    AlmostKaehler,
    /// a = 4e^{2(r−1)}/(1+r)²
    Flat,
    /// a = e^{2r} / ((1+r)(c e^{2r}(r−1) + k(1+r)))
    Integrable { c: f64, k: f64 },
    Constant { k: f64 },
    Custom(CustomWeight),
}

impl fmt::Display for WeightFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightFunction::Integrable { c, k } => write!(f, "integrable(c={c}, k={k})"),
            WeightFunction::Constant { k } => write!(f, "constant({k})"),
            WeightFunction::Custom(w) => write!(f, "custom({})", w.source),
            other => f.write_str(other.name()),
        }
    }
}

fn r_of(t: f64) -> f64 {
    (1.0 + 2.0 * t).sqrt()
}

/// (a, a_r, a_rr) → (a, a′, a″) in t.
fn from_r(r: f64, a: f64, a_r: f64, a_rr: f64) -> WeightValues {
    WeightValues { a, da: a_r / r, dda: (r * a_rr - a_r) / (r * r * r) }
}

impl WeightFunction {
    pub fn integrable(c: f64, k: f64) -> Result<Self> {
        if !(c >= 0.0 && c.is_finite()) || !(k > 0.0 && k.is_finite()) {
            return Err(Error::Usage(format!(
                "integrable weight needs c ≥ 0 and k > 0, got c = {c}, k = {k}"
            )));
        }
        Ok(WeightFunction::Integrable { c, k })
    }

    pub fn constant(k: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::Usage(format!("constant weight must be positive, got {k}")));
        }
        Ok(WeightFunction::Constant { k })
    }

    pub fn custom(source: &str) -> Result<Self> {
        CustomWeight::parse(source).map(WeightFunction::Custom)
    }

    pub fn name(&self) -> &'static str {
        match self {
            WeightFunction::CheegerGromoll => "cheeger_gromoll",
            WeightFunction::AlmostKaehler => "almost_kaehler",
            WeightFunction::Flat => "flat",
            WeightFunction::Integrable { .. } => "integrable",
            WeightFunction::Constant { .. } => "constant",
            WeightFunction::Custom(_) => "custom",
        }
    }

    /// (a, a′, a″) at energy density t.
    pub fn eval(&self, t: f64) -> Result<WeightValues> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::Domain(format!("energy density must be finite and ≥ 0, got {t}")));
        }
        let r = r_of(t);
        let v = match self {
            WeightFunction::CheegerGromoll => {
                let s = 1.0 + 2.0 * t;
                WeightValues { a: 1.0 / s, da: -2.0 / (s * s), dda: 8.0 / (s * s * s) }
            }
            WeightFunction::AlmostKaehler => {
                let e = (r - 1.0).exp();
                let a = 2.0 * e / (1.0 + r);
                // a_r = a·r/(1+r), a_rr = a·(r² + 1)/(1+r)²
                let a_r = a * r / (1.0 + r);
                let a_rr = a * (r * r + 1.0) / ((1.0 + r) * (1.0 + r));
                from_r(r, a, a_r, a_rr)
            }
            WeightFunction::Flat => {
                let e = (2.0 * (r - 1.0)).exp();
                let a = 4.0 * e / ((1.0 + r) * (1.0 + r));
                // ln a = 2(r−1) − 2 ln(1+r) + const ⇒ a_r/a = 2r/(1+r)
                let phi = 2.0 * r / (1.0 + r);
                let phi_r = 2.0 / ((1.0 + r) * (1.0 + r));
                from_r(r, a, a * phi, a * (phi * phi + phi_r))
            }
            WeightFunction::Integrable { c, k } => {
                let e = (2.0 * r).exp();
                let d = c * e * (r - 1.0) + k * (1.0 + r);
                let d_r = c * e * (2.0 * r - 1.0) + k;
                let d_rr = 4.0 * c * r * e;
                let a = e / ((1.0 + r) * d);
                let phi = 2.0 - 1.0 / (1.0 + r) - d_r / d;
                let phi_r = 1.0 / ((1.0 + r) * (1.0 + r)) - (d_rr * d - d_r * d_r) / (d * d);
                from_r(r, a, a * phi, a * (phi * phi + phi_r))
            }
            WeightFunction::Constant { k } => WeightValues { a: *k, da: 0.0, dda: 0.0 },
            WeightFunction::Custom(w) => {
                let vals = [t, r];
                WeightValues { a: w.a.eval(&vals), da: w.da.eval(&vals), dda: w.dda.eval(&vals) }
            }
        };
        if !(v.a > 0.0) || !v.a.is_finite() || !v.da.is_finite() || !v.dda.is_finite() {
            return Err(Error::WeightValidity(format!(
                "weight {self} is not positive and finite at t = {t}: a = {}, a′ = {}, a″ = {}",
                v.a, v.da, v.dda
            )));
        }
        Ok(v)
    }

    /// L = a′/(2a).
    #[allow(non_snake_case)]
    pub fn L_of(&self, t: f64) -> Result<f64> {
        if let WeightFunction::Flat = self {
            // the flat weight is defined by L = 1/(1+r)
            self.eval(t)?;
            return Ok(1.0 / (1.0 + r_of(t)));
        }
        let v = self.eval(t)?;
        Ok(v.da / (2.0 * v.a))
    }

    /// dL/dt = (a″a − a′²)/(2a²).
    pub fn l_prime(&self, t: f64) -> Result<f64> {
        if let WeightFunction::Flat = self {
            self.eval(t)?;
            let r = r_of(t);
            return Ok(-1.0 / (r * (1.0 + r) * (1.0 + r)));
        }
        let v = self.eval(t)?;
        Ok((v.dda * v.a - v.da * v.da) / (2.0 * v.a * v.a))
    }

    /// (d, d′) with d = L − 1/(1+r), the deviation from the flatness
    /// solution; exactly zero for the flat preset.
    pub fn flatness_deviation(&self, t: f64) -> Result<(f64, f64)> {
        if let WeightFunction::Flat = self {
            self.eval(t)?;
            return Ok((0.0, 0.0));
        }
        let r = r_of(t);
        let d = self.L_of(t)? - 1.0 / (1.0 + r);
        let dp = self.l_prime(t)? + 1.0 / (r * (1.0 + r) * (1.0 + r));
        Ok((d, dp))
    }

    /// F1 = L′ + L(1−L)/r², F2 = L² − (1−L)²/r², F3 = (L′ − L²)/r² + (1−L)/r⁴,
    /// evaluated in terms of the flatness deviation so that every term
    /// carries a factor d or d′ (no cancellation near the flat weight).
    pub fn f_coeffs(&self, t: f64) -> Result<FCoeffs> {
        let l = self.L_of(t)?;
        let (d, dp) = self.flatness_deviation(t)?;
        let r = r_of(t);
        let r2 = 1.0 + 2.0 * t;
        Ok(FCoeffs {
            f1: dp + d * ((r - 1.0) / (1.0 + r) - d) / r2,
            f2: d * (1.0 + 1.0 / r) * (l + (1.0 - l) / r),
            f3: (r2 * dp - d * (1.0 + 2.0 * r2 / (1.0 + r) + r2 * d)) / (r2 * r2),
        })
    }

    /// a′/a − 1/(1+r); vanishes identically exactly for the weight the
    /// almost-Kähler characterization singles out.
    pub fn almost_kaehler_residual(&self, t: f64) -> Result<f64> {
        let v = self.eval(t)?;
        Ok(v.da / v.a - 1.0 / (1.0 + r_of(t)))
    }

    /// (2a − (1+r)a′) / (2a² r (1+r)); must be the constant c of a space-form
    /// base for J to be integrable.
    pub fn kaehler_obstruction(&self, t: f64) -> Result<f64> {
        let v = self.eval(t)?;
        let r = r_of(t);
        Ok((2.0 * v.a - (1.0 + r) * v.da) / (2.0 * v.a * v.a * r * (1.0 + r)))
    }

    /// Left-hand side of the constant-scalar-curvature criterion over a
    /// space form of curvature c and dimension m, exactly as displayed in
    /// the source derivation.
    pub fn scal_ode_lhs(&self, c: f64, m: usize, t: f64) -> Result<f64> {
        let WeightValues { a, da, dda } = self.eval(t)?;
        let m = m as f64;
        let s = 1.0 + 2.0 * t;
        let cc = (c + 2.0 * c * t).powi(2);
        let inner = -2.0 * (m + 2.0 * (m - 2.0) * t) * a * a - 4.0 * t * cc * a.powi(3)
            + 6.0 * t * cc * a.powi(4)
            + (m - 6.0) * t * s * da * da
            + 2.0 * a * ((m + 2.0 * (m - 1.0) * t) * da + 2.0 * t * s * dda);
        Ok(-inner / (2.0 * s * s * a.powi(3)))
    }

    pub fn lee_coefficient(&self, choice: LeeCoefficient, t: f64) -> Result<f64> {
        let v = self.eval(t)?;
        let r = r_of(t);
        Ok(match choice {
            LeeCoefficient::Resolved => v.da / (2.0 * v.a) - 1.0 / (1.0 + r),
            LeeCoefficient::GeneralPrinted => v.da / v.a - 1.0 / (1.0 + r),
            LeeCoefficient::CheegerGromollPrinted => -(1.0 / (r * r) + 1.0 / (1.0 + r)),
        })
    }
}

/// Which coefficient λ(t) to use in ω(X^V) = λ(t) g(X,u).
///
/// Two printed candidates disagree on the Cheeger–Gromoll weight; the
/// numeric exterior derivative of Ω selects a′/(2a) − 1/(1+r), which
/// agrees with the Cheeger–Gromoll candidate on that weight and with the
/// general candidate on constant weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LeeCoefficient {
    /// a′/(2a) − 1/(1+r)
    Resolved,
    /// a′/a − 1/(1+r)
    GeneralPrinted,
    /// −(1/r² + 1/(1+r)), stated for a = 1/(1+2t) only
    CheegerGromollPrinted,
}

impl LeeCoefficient {
    pub fn formula(self) -> &'static str {
        match self {
            LeeCoefficient::Resolved => "a'/(2a) - 1/(1+r)",
            LeeCoefficient::GeneralPrinted => "a'/a - 1/(1+r)",
            LeeCoefficient::CheegerGromollPrinted => "-(1/r^2 + 1/(1+r))",
        }
    }
}
