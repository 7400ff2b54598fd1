//! Run configuration and the three user-facing computations: the full
//! closed-form-vs-oracle check, the sectional table at a point, and the
//! sweep of weight scalars over t.

use std::fs;
use std::path::PathBuf;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::base::{ChartedManifold, CurvatureModel, MetricFn};
use crate::bundle::{BundlePoint, TangentBundle};
use crate::closed_form::{ClosedForm, CurvatureCase, FormulaVariant, Lift, LiftPair, PairClass};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::fd::FdSteps;
use crate::oracle::{self, compare, ComparisonReport, Verdict};
use crate::weights::{LeeCoefficient, WeightFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum BaseKind {
    Euclidean,
    Sphere,
    Hyperbolic,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum WeightKind {
    CheegerGromoll,
    AlmostKaehler,
    Flat,
    Integrable,
    Constant,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Text,
    Json,
    Csv,
}

pub const CURVATURE_TOL: f64 = 1e-3;
pub const FIRST_ORDER_TOL: f64 = 1e-4;
pub const ALGEBRAIC_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub base: BaseKind,
    pub c: f64,
    pub dim: usize,
    pub weight: WeightKind,
    pub weight_c: f64,
    pub weight_k: f64,
    pub points: usize,
    pub seed: u64,
    pub tol: Option<f64>,
    pub fd_step: Option<f64>,
    pub t_max: f64,
    pub steps: usize,
    pub base_file: Option<PathBuf>,
    pub weight_file: Option<PathBuf>,
    pub x: Option<Vec<f64>>,
    pub y: Option<Vec<f64>>,
    #[serde(skip)]
    pub output: OutputFormat,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub workers: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            base: BaseKind::Euclidean,
            c: 0.0,
            dim: 2,
            weight: WeightKind::CheegerGromoll,
            weight_c: 0.0,
            weight_k: 1.0,
            points: 25,
            seed: 42,
            tol: None,
            fd_step: None,
            t_max: 5.0,
            steps: 100,
            base_file: None,
            weight_file: None,
            x: None,
            y: None,
            output: OutputFormat::Text,
            out: None,
            workers: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let usage = |m: String| Err(Error::Usage(m));
        if self.dim < 2 {
            return usage(format!("--dim must be at least 2, got {}", self.dim));
        }
        if self.points < 1 {
            return usage("--points must be at least 1".into());
        }
        match self.base {
            BaseKind::Sphere if !(self.c > 0.0) => return usage(format!("sphere requires --c > 0, got {}", self.c)),
            BaseKind::Hyperbolic if !(self.c < 0.0) => {
                return usage(format!("hyperbolic requires --c < 0, got {}", self.c))
            }
            BaseKind::Custom if self.base_file.is_none() => return usage("--base custom requires --base-file".into()),
            _ => {}
        }
        if self.weight == WeightKind::Custom && self.weight_file.is_none() {
            return usage("--weight custom requires --weight-file".into());
        }
        if let Some(t) = self.tol {
            if !(t > 0.0) {
                return usage(format!("--tol must be positive, got {t}"));
            }
        }
        if let Some(h) = self.fd_step {
            if !(h > 0.0 && h <= 1e-2) {
                return usage(format!("--fd-step must lie in (0, 1e-2], got {h}"));
            }
        }
        if let Some(w) = self.workers {
            if w == 0 {
                return usage("--workers must be at least 1".into());
            }
        }
        for (flag, v) in [("--x", &self.x), ("--y", &self.y)] {
            if let Some(v) = v {
                if v.len() != self.dim {
                    return usage(format!("{flag} needs {} components, got {}", self.dim, v.len()));
                }
            }
        }
        Ok(())
    }

    pub fn tolerances(&self) -> (f64, f64) {
        match self.tol {
            Some(t) => (t, t),
            None => (CURVATURE_TOL, FIRST_ORDER_TOL),
        }
    }

    pub fn fd_steps(&self) -> FdSteps {
        self.fd_step.map(FdSteps::from_first).unwrap_or_default()
    }

    /// Space-form curvature of the configured base, if it is one.
    pub fn base_curvature(&self) -> Option<f64> {
        match self.base {
            BaseKind::Euclidean => Some(0.0),
            BaseKind::Sphere | BaseKind::Hyperbolic => Some(self.c),
            BaseKind::Custom => None,
        }
    }

    pub fn manifold(&self) -> Result<ChartedManifold> {
        let man = match self.base {
            BaseKind::Euclidean => ChartedManifold::euclidean(self.dim)?,
            BaseKind::Sphere => ChartedManifold::sphere(self.dim, self.c)?,
            BaseKind::Hyperbolic => ChartedManifold::hyperbolic(self.dim, self.c)?,
            BaseKind::Custom => {
                let path = self.base_file.as_ref().expect("validated");
                let src = fs::read_to_string(path)
                    .map_err(|e| Error::Usage(format!("cannot read {}: {e}", path.display())))?;
                parse_base_file(&src, self.dim)?
            }
        };
        Ok(man.with_steps(self.fd_steps()))
    }

    pub fn weight_function(&self) -> Result<WeightFunction> {
        Ok(match self.weight {
            WeightKind::CheegerGromoll => WeightFunction::CheegerGromoll,
            WeightKind::AlmostKaehler => WeightFunction::AlmostKaehler,
            WeightKind::Flat => WeightFunction::Flat,
            WeightKind::Integrable => WeightFunction::integrable(self.weight_c, self.weight_k)?,
            WeightKind::Constant => WeightFunction::constant(self.weight_k)?,
            WeightKind::Custom => {
                let path = self.weight_file.as_ref().expect("validated");
                let src = fs::read_to_string(path)
                    .map_err(|e| Error::Usage(format!("cannot read {}: {e}", path.display())))?;
                parse_weight_file(&src)?
            }
        })
    }

    pub fn bundle(&self) -> Result<TangentBundle> {
        self.validate()?;
        Ok(TangentBundle::new(self.manifold()?, self.weight_function()?))
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(w) = self.workers {
            b = b.num_threads(w);
        }
        b.build().map_err(|e| Error::Usage(format!("cannot start worker pool: {e}")))
    }
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

/// Base metric file: `radius = R` (optional, default 1) and lines
/// `gij = <expr>` in x1..xm with 1 ≤ i ≤ j ≤ m; missing entries are δ_ij.
pub fn parse_base_file(src: &str, dim: usize) -> Result<ChartedManifold> {
    let names: Vec<String> = (1..=dim).map(|i| format!("x{i}")).collect();
    let vars: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut radius = 1.0;
    let mut entries: Vec<Vec<Option<Expr>>> = vec![vec![None; dim]; dim];
    for (no, raw) in src.lines().enumerate() {
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let (key, rhs) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected `key = expression`", no + 1)))?;
        let key = key.trim();
        if key == "radius" {
            radius = rhs
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("line {}: radius must be a number", no + 1)))?;
            continue;
        }
        let idx = key.strip_prefix('g').filter(|s| s.len() == 2 && s.chars().all(|c| c.is_ascii_digit()));
        let idx = idx.ok_or_else(|| Error::Parse(format!("line {}: unknown key `{key}`", no + 1)))?;
        let (i, j) = (idx.as_bytes()[0] - b'0', idx.as_bytes()[1] - b'0');
        let (i, j) = (i as usize, j as usize);
        if i == 0 || j == 0 || i > dim || j > dim {
            return Err(Error::Parse(format!("line {}: `{key}` out of range for dimension {dim}", no + 1)));
        }
        let (i, j) = (i.min(j) - 1, i.max(j) - 1);
        if entries[i][j].is_some() {
            return Err(Error::Parse(format!("line {}: metric entry g{}{} given twice", no + 1, i + 1, j + 1)));
        }
        entries[i][j] = Some(Expr::parse(rhs, &vars)?);
    }
    let metric: MetricFn = Arc::new(move |x: &DVector<f64>| {
        DMatrix::from_fn(dim, dim, |a, b| {
            let (i, j) = (a.min(b), a.max(b));
            match &entries[i][j] {
                Some(e) => e.eval(x.as_slice()),
                None if i == j => 1.0,
                None => 0.0,
            }
        })
    });
    ChartedManifold::custom(dim, metric, radius)
}

/// Weight file: a single expression in `t` and `r`, optionally as `a = ...`.
pub fn parse_weight_file(src: &str) -> Result<WeightFunction> {
    let lines: Vec<&str> = src.lines().map(strip_comment).filter(|l| !l.is_empty()).collect();
    if lines.len() != 1 {
        return Err(Error::Parse(format!("weight file must contain one expression, found {} lines", lines.len())));
    }
    let body = match lines[0].split_once('=') {
        Some((k, v)) if k.trim() == "a" => v,
        Some((k, _)) => return Err(Error::Parse(format!("unknown key `{}` in weight file", k.trim()))),
        None => lines[0],
    };
    WeightFunction::custom(body)
}

#[derive(Debug, Clone, Serialize)]
pub struct Conventions {
    pub omega_coefficient: String,
    pub nijenhuis_constant: f64,
    pub curvature_sign: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckDocument {
    pub config: RunConfig,
    pub conventions: Conventions,
    pub comparisons: Vec<ComparisonReport>,
    pub verdict: Verdict,
}

impl CheckDocument {
    pub fn failing(&self) -> Vec<&str> {
        self.comparisons.iter().filter(|c| c.gating && !c.passed()).map(|c| c.subject.as_str()).collect()
    }
}

pub const CURVATURE_SIGN: &str =
    "R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z; K(X,Y) = g(R(X,Y)Y,X)/Q (sphere: K = c > 0)";

const LEE_CANDIDATES: [LeeCoefficient; 3] =
    [LeeCoefficient::Resolved, LeeCoefficient::GeneralPrinted, LeeCoefficient::CheegerGromollPrinted];

#[derive(Default)]
struct SampleData {
    nabla: (Vec<f64>, Vec<f64>),
    curvature: (Vec<f64>, Vec<f64>),
    numeric_curvature_max: f64,
    sectional: (Vec<f64>, Vec<f64>, Vec<f64>),
    scalar: (f64, f64, f64),
    d_omega: Vec<f64>,
    wedges: Vec<Vec<f64>>,
    nij_hh: (Vec<f64>, Vec<f64>),
    nij_vv: (Vec<f64>, Vec<f64>),
    nij_hv: Vec<f64>,
    algebra: [f64; 6],
}

fn lift(p: &BundlePoint, l: Lift, v: &DVector<f64>) -> crate::bundle::TMVector {
    match l {
        Lift::H => p.horizontal(v.clone()),
        Lift::V => p.vertical(v.clone()),
    }
}

fn max_abs(v: &DVector<f64>) -> f64 {
    v.amax()
}

fn evaluate_sample(bundle: &TangentBundle, seed: u64, index: u64) -> Result<SampleData> {
    let s = oracle::sample(bundle, seed, index)?;
    let p = &s.point;
    let z = p.coords();
    let [x, y, w] = &s.vectors;
    let cf = ClosedForm::new(bundle, p)?;
    let mut d = SampleData::default();

    for pair in LiftPair::ALL {
        d.nabla.0.extend(p.coordinate_stack(&cf.nabla(pair, x, y))?.iter());
        d.nabla.1.extend(oracle::numeric_nabla(bundle, &z, pair, x, y)?.iter());
    }

    let num = oracle::numeric_riemann_2m(bundle, &z)?;
    d.numeric_curvature_max = num.riemann.0.max_abs();
    for case in CurvatureCase::ALL {
        let (l1, l2, l3) = case.lifts();
        d.curvature.0.extend(p.coordinate_stack(&cf.curvature(case, x, y, w))?.iter());
        let (a, b, c) = (
            p.coordinate_stack(&lift(p, l1, x))?,
            p.coordinate_stack(&lift(p, l2, y))?,
            p.coordinate_stack(&lift(p, l3, w))?,
        );
        d.curvature.1.extend(num.riemann.apply(&a, &b, &c).iter());
    }

    let frame = cf.frame()?;
    let coords: Vec<DVector<f64>> = frame.iter().map(|e| p.coordinate_stack(e)).collect::<Result<_>>()?;
    let consistent = cf.sectional_table(FormulaVariant::Consistent)?;
    let printed = cf.sectional_table(FormulaVariant::AsPrinted)?;
    for (e, pe) in consistent.entries.iter().zip(&printed.entries) {
        d.sectional.0.push(e.value);
        d.sectional.1.push(pe.value);
        d.sectional.2.push(num.sectional(&coords[e.a - 1], &coords[e.b - 1])?);
    }
    d.scalar = (cf.scalar(FormulaVariant::Consistent), cf.scalar(FormulaVariant::AsPrinted), num.scalar());

    d.d_omega = oracle::form_components(&oracle::numeric_d_omega(bundle, &z)?);
    for cand in LEE_CANDIDATES {
        d.wedges.push(oracle::form_components(&oracle::wedge_omega(bundle, &z, cand)?));
    }

    let nij = |pair: LiftPair| -> Result<(Vec<f64>, Vec<f64>)> {
        let c = p.coordinate_stack(&cf.nijenhuis(pair, x, y)?)?;
        let n = oracle::numeric_nijenhuis(bundle, &z, pair.lifts(), x, y)?;
        Ok((c.as_slice().to_vec(), n.as_slice().to_vec()))
    };
    d.nij_hh = nij(LiftPair::HH)?;
    d.nij_vv = nij(LiftPair::VV)?;
    d.nij_hv = oracle::numeric_nijenhuis(bundle, &z, (Lift::H, Lift::V), x, y)?.as_slice().to_vec();

    // algebraic identities on U = x^H + y^V, V = y^H + w^V
    let u = p.adapted(x.clone(), y.clone());
    let v = p.adapted(y.clone(), w.clone());
    let ju = bundle.apply_j(p, &u)?;
    let jju = bundle.apply_j(p, &ju)?;
    let jv = bundle.apply_j(p, &v)?;
    let (h1, v1) = p.split(&jju)?;
    let j2 = max_abs(&(h1 + x)).max(max_abs(&(v1 + y)));
    let herm = (bundle.g_a(p, &ju, &jv)? - bundle.g_a(p, &u, &v)?).abs();
    let gram = DMatrix::from_fn(frame.len(), frame.len(), |i, j| bundle.g_a(p, &frame[i], &frame[j]).unwrap_or(f64::NAN));
    let ortho = (gram - DMatrix::identity(frame.len(), frame.len())).amax();
    let anti = (bundle.kaehler_form(p, &u, &v)? + bundle.kaehler_form(p, &v, &u)?).abs();
    let back = p.to_adapted(&p.to_coordinate(&u)?)?;
    let (bh, bv) = p.split(&back)?;
    let round = max_abs(&(bh - x)).max(max_abs(&(bv - y)));
    let gc = bundle.induced_coordinate_metric(p)?;
    let metric = (p.coordinate_stack(&u)?.dot(&(&gc * p.coordinate_stack(&v)?)) - bundle.g_a(p, &u, &v)?).abs();
    d.algebra = [j2, herm, ortho, anti, round, metric];
    Ok(d)
}

fn spread_report(subject: &str, kappas: &[f64], reference: f64, tol: f64) -> ComparisonReport {
    let (lo, hi) = kappas.iter().fold((f64::MAX, f64::MIN), |(l, h), &k| (l.min(k), h.max(k)));
    let spread = if kappas.is_empty() { 0.0 } else { (hi - lo) / reference.abs().max(1e-300) };
    let mut r = ComparisonReport::bound(subject, &[spread], tol);
    r.samples = kappas.len();
    r.notes = if kappas.is_empty() {
        "closed form vanishes at every sample; nothing to calibrate".into()
    } else {
        format!("per-sample constants in [{lo:.12}, {hi:.12}], relative spread {spread:.3e}")
    };
    r
}

fn exceeds(subject: &str, values: &[f64], threshold: f64) -> ComparisonReport {
    let worst = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut r = ComparisonReport::bound(subject, values, f64::INFINITY);
    r.tolerance = threshold;
    r.verdict = if worst > threshold { Verdict::Pass } else { Verdict::Fail };
    r.notes = format!("expects some |component| > {threshold:e}; largest is {worst:.6e}");
    r
}

/// Run the full closed-form-vs-oracle suite for the configured bundle.
pub fn run_check(cfg: &RunConfig) -> Result<CheckDocument> {
    let bundle = cfg.bundle()?;
    let (tol_curv, tol_first) = cfg.tolerances();
    let pool = cfg.pool()?;
    let samples: Vec<Result<SampleData>> = pool.install(|| {
        (0..cfg.points as u64).into_par_iter().map(|i| evaluate_sample(&bundle, cfg.seed, i)).collect()
    });
    let samples: Vec<SampleData> = samples.into_iter().collect::<Result<_>>()?;
    let col = |f: &dyn Fn(&SampleData) -> Vec<f64>| -> Vec<Vec<f64>> { samples.iter().map(f).collect() };

    let mut reports = Vec::new();
    reports.push(compare("connection", &col(&|d| d.nabla.0.clone()), &col(&|d| d.nabla.1.clone()), tol_first)?);
    reports.push(compare("curvature", &col(&|d| d.curvature.0.clone()), &col(&|d| d.curvature.1.clone()), tol_curv)?);
    let sect_oracle = col(&|d| d.sectional.2.clone());
    reports.push(compare("sectional_table", &col(&|d| d.sectional.0.clone()), &sect_oracle, tol_curv)?.with_notes(
        "mixed entries K(E_i,E_m+k) = (a/4)|R(u,e_k)e_i|^2",
    ));
    reports.push(
        compare("sectional_table[printed 1/4 coefficient]", &col(&|d| d.sectional.1.clone()), &sect_oracle, tol_curv)?
            .with_notes("mixed entries with coefficient 1/4 instead of a/4")
            .informational(),
    );
    let scal_oracle = col(&|d| vec![d.scalar.2]);
    reports.push(compare("scalar_curvature", &col(&|d| vec![d.scalar.0]), &scal_oracle, tol_curv)?.with_notes(
        "mixed term -(a/2) sum_{i<j} |R(e_i,e_j)u|^2",
    ));
    reports.push(
        compare("scalar_curvature[printed (2-3a)/2 coefficient]", &col(&|d| vec![d.scalar.1]), &scal_oracle, tol_curv)?
            .informational(),
    );

    let d_omega = col(&|d| d.d_omega.clone());
    let mut omega_coefficient = String::from("none");
    for (k, cand) in LEE_CANDIDATES.iter().enumerate() {
        let r = compare(format!("lee_identity[{}]", cand.formula()), &col(&|d| d.wedges[k].clone()), &d_omega, tol_first)?
            .with_notes("numeric dOmega vs omega^Omega, (a^b)_ABC = a_A b_BC + a_B b_CA + a_C b_AB");
        if r.passed() && omega_coefficient == "none" {
            omega_coefficient = cand.formula().to_string();
        }
        reports.push(if *cand == LeeCoefficient::Resolved { r } else { r.informational() });
    }

    let kappa = oracle::calibrate_nijenhuis_constant()?;
    let mut kappas = Vec::new();
    for (name, get) in [
        ("nijenhuis_hh", (&|d: &SampleData| d.nij_hh.clone()) as &dyn Fn(&SampleData) -> (Vec<f64>, Vec<f64>)),
        ("nijenhuis_vv", &|d: &SampleData| d.nij_vv.clone()),
    ] {
        let closed: Vec<Vec<f64>> = samples.iter().map(|d| get(d).0.iter().map(|v| v * kappa).collect()).collect();
        let numeric: Vec<Vec<f64>> = samples.iter().map(|d| get(d).1).collect();
        reports.push(compare(name, &closed, &numeric, tol_first)?.with_notes(format!("closed form scaled by {kappa:.12}")));
        for d in &samples {
            let (c, n) = get(d);
            if c.iter().fold(0.0f64, |m, v| m.max(v.abs())) > 1e-6 {
                kappas.extend(oracle::proportionality(&c, &n));
            }
        }
    }
    reports.push(spread_report("nijenhuis_constant", &kappas, kappa, tol_curv));
    let mut hv = ComparisonReport::bound(
        "nijenhuis_hv[numeric only]",
        &samples.iter().map(|d| d.nij_hv.iter().fold(0.0f64, |m, v| m.max(v.abs()))).collect::<Vec<_>>(),
        tol_curv,
    )
    .informational();
    hv.notes = "no closed form exists; reports max |N(X^H,Y^V)|".into();
    reports.push(hv);

    let names = ["j_squared", "hermitian", "frame_orthonormal", "kaehler_antisymmetric", "frame_roundtrip", "induced_metric"];
    for (k, name) in names.iter().enumerate() {
        let vals: Vec<f64> = samples.iter().map(|d| d.algebra[k]).collect();
        reports.push(ComparisonReport::bound(*name, &vals, ALGEBRAIC_TOL));
    }

    // theorem-level checks for the configurations they concern
    let base_c = cfg.base_curvature();
    let d_omega_max: Vec<f64> = d_omega.iter().map(|v| v.iter().fold(0.0f64, |m, x| m.max(x.abs()))).collect();
    match bundle.weight() {
        WeightFunction::Flat if base_c == Some(0.0) => {
            let vals: Vec<f64> = samples.iter().map(|d| d.numeric_curvature_max).collect();
            reports.push(ComparisonReport::bound("flatness", &vals, tol_first).with_notes("max |R| of the induced metric"));
        }
        WeightFunction::AlmostKaehler => {
            reports.push(ComparisonReport::bound("almost_kaehler", &d_omega_max, tol_first).with_notes("max |dOmega|"));
        }
        WeightFunction::CheegerGromoll => {
            reports.push(exceeds("not_almost_kaehler", &d_omega_max, 1e-2));
        }
        WeightFunction::Integrable { c, .. } if base_c == Some(*c) => {
            for (name, pick) in [("integrable_hh", 0usize), ("integrable_vv", 1)] {
                let vals: Vec<f64> = samples
                    .iter()
                    .map(|d| {
                        let n = if pick == 0 { &d.nij_hh.1 } else { &d.nij_vv.1 };
                        n.iter().fold(0.0f64, |m, v| m.max(v.abs()))
                    })
                    .collect();
                reports.push(ComparisonReport::bound(name, &vals, tol_curv).with_notes("max |N| from the oracle"));
            }
        }
        _ => {}
    }

    let verdict = if reports.iter().all(|r| !r.gating || r.passed()) { Verdict::Pass } else { Verdict::Fail };
    let mut config = cfg.clone();
    normalize(&mut config);
    Ok(CheckDocument {
        config,
        conventions: Conventions {
            omega_coefficient,
            nijenhuis_constant: kappa,
            curvature_sign: CURVATURE_SIGN.into(),
        },
        comparisons: reports,
        verdict,
    })
}

fn normalize(cfg: &mut RunConfig) {
    if cfg.base == BaseKind::Euclidean {
        cfg.c = 0.0;
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SectionalRow {
    pub pair_class: PairClass,
    #[serde(rename = "A")]
    pub a: usize,
    #[serde(rename = "B")]
    pub b: usize,
    pub closed_form: f64,
    pub oracle: f64,
    pub abs_err: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SectionalDocument {
    pub config: RunConfig,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub t: f64,
    pub rows: Vec<SectionalRow>,
    pub comparison: ComparisonReport,
}

pub fn run_sectional(cfg: &RunConfig) -> Result<SectionalDocument> {
    let bundle = cfg.bundle()?;
    let m = cfg.dim;
    let x = cfg.x.clone().unwrap_or_else(|| vec![0.0; m]);
    let y = cfg.y.clone().unwrap_or_else(|| {
        let mut v = vec![0.0; m];
        v[0] = 1.0;
        v
    });
    let p = bundle.point(&x, &y)?;
    if p.u_norm() == 0.0 {
        return Err(Error::Usage("the sectional table needs a nonzero fiber vector --y".into()));
    }
    let cf = ClosedForm::new(&bundle, &p)?;
    let table = cf.sectional_table(FormulaVariant::Consistent)?;
    let frame: Vec<DVector<f64>> = cf.frame()?.iter().map(|e| p.coordinate_stack(e)).collect::<Result<_>>()?;
    let num = oracle::numeric_riemann_2m(&bundle, &p.coords())?;
    let mut rows = Vec::new();
    for e in &table.entries {
        let o = num.sectional(&frame[e.a - 1], &frame[e.b - 1])?;
        rows.push(SectionalRow {
            pair_class: e.class,
            a: e.a,
            b: e.b,
            closed_form: e.value,
            oracle: o,
            abs_err: (e.value - o).abs(),
        });
    }
    let comparison = compare(
        "sectional_table",
        &rows.iter().map(|r| vec![r.closed_form]).collect::<Vec<_>>(),
        &rows.iter().map(|r| vec![r.oracle]).collect::<Vec<_>>(),
        cfg.tolerances().0,
    )?;
    let mut config = cfg.clone();
    normalize(&mut config);
    Ok(SectionalDocument { config, x, y, t: p.t(), rows, comparison })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub t: f64,
    pub r: f64,
    pub a: f64,
    pub a_prime: f64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "F1")]
    pub f1: f64,
    #[serde(rename = "F2")]
    pub f2: f64,
    #[serde(rename = "F3")]
    pub f3: f64,
    #[serde(rename = "K_v1vk")]
    pub k_v1vk: f64,
    /// Absent when m = 2 (no pair of vertical directions orthogonal to u).
    #[serde(rename = "K_vkvl")]
    pub k_vkvl: Option<f64>,
    pub scal_tilde: f64,
    pub ode_lhs: f64,
}

pub const SWEEP_HEADER: [&str; 12] =
    ["t", "r", "a", "a_prime", "L", "F1", "F2", "F3", "K_v1vk", "K_vkvl", "scal_tilde", "ode_lhs"];

/// Weight scalars on the uniform grid t_i = t_max·i/(steps−1), evaluated at
/// the chart origin with the fiber vector along the diagonal.
pub fn run_sweep(cfg: &RunConfig) -> Result<Vec<SweepRow>> {
    if !(cfg.t_max > 0.0) || !cfg.t_max.is_finite() {
        return Err(Error::Usage(format!("--t-max must be positive, got {}", cfg.t_max)));
    }
    if cfg.steps < 2 {
        return Err(Error::Usage(format!("--steps must be at least 2, got {}", cfg.steps)));
    }
    let bundle = cfg.bundle()?;
    let m = cfg.dim;
    let w = bundle.weight();
    let x = cfg.x.clone().unwrap_or_else(|| vec![0.0; m]);
    let g = bundle.base().metric_at(&DVector::from_column_slice(&x))?;
    let diag = DVector::from_element(m, 1.0);
    let diag = &diag / diag.dot(&(&g * &diag)).sqrt();
    let c = match bundle.base().model() {
        CurvatureModel::SpaceForm { c } => c,
        CurvatureModel::Generic => cfg.c,
    };
    let mut rows = Vec::with_capacity(cfg.steps);
    for i in 0..cfg.steps {
        let t = cfg.t_max * i as f64 / (cfg.steps - 1) as f64;
        let y = &diag * (2.0 * t).sqrt();
        let p = bundle.point(&x, y.as_slice())?;
        let v = w.eval(t)?;
        let f = w.f_coeffs(t)?;
        rows.push(SweepRow {
            t,
            r: p.r(),
            a: v.a,
            a_prime: v.da,
            l: w.L_of(t)?,
            f1: f.f1,
            f2: f.f2,
            f3: f.f3,
            k_v1vk: -(f.f2 + 2.0 * t * f.f3) / v.a,
            k_vkvl: (m > 2).then(|| -f.f2 / v.a),
            scal_tilde: ClosedForm::new(&bundle, &p)?.scalar(FormulaVariant::Consistent),
            ode_lhs: w.scal_ode_lhs(c, m, t)?,
        });
    }
    Ok(rows)
}
