//! One PASS/FAIL line per acceptance criterion. Tolerances are pinned here
//! and deliberately not shared with the library defaults.

use std::process::Command;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use tanbundle::base::ChartedManifold;
use tanbundle::bundle::{BundlePoint, TMVector, TangentBundle};
use tanbundle::closed_form::{ClosedForm, CurvatureCase, FormulaVariant, Lift, LiftPair, PairClass};
use tanbundle::oracle::{
    form_components, numeric_d_omega, numeric_nabla, numeric_nijenhuis, numeric_riemann_2m, proportionality, sample,
    wedge_omega,
};
use tanbundle::weights::{LeeCoefficient, WeightFunction};

const POINTS: u64 = 25;
const SEED: u64 = 42;

const FLAT_NUMERIC_TOL: f64 = 1e-4;
const D_OMEGA_TOL: f64 = 1e-4;
const D_OMEGA_NONZERO: f64 = 1e-2;
const LEE_TOL: f64 = 1e-3;
const ORACLE_REL_TOL: f64 = 1e-3;
const OBSTRUCTION_SPREAD_MIN: f64 = 0.1;
const OBSTRUCTION_CONST_TOL: f64 = 1e-8;
const NIJENHUIS_SPREAD_TOL: f64 = 1e-3;
const NIJENHUIS_ZERO_TOL: f64 = 1e-3;
const SCALAR_TOL: f64 = 1e-3;
const ODE_CONST_TOL: f64 = 1e-8;
const ODE_SPREAD_MIN: f64 = 0.01;
const ALGEBRA_TOL: f64 = 1e-10;

struct Outcome {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn outcome(id: u32, name: &'static str, pass: bool, detail: String) -> Outcome {
    let o = Outcome { id, name, pass, detail };
    println!("{} [{:>2}] {}: {}", if o.pass { "PASS" } else { "FAIL" }, o.id, o.name, o.detail);
    o
}

fn stack(p: &BundlePoint, v: &TMVector) -> DVector<f64> {
    p.coordinate_stack(v).unwrap()
}

fn bundle(base: &ChartedManifold, w: &WeightFunction) -> TangentBundle {
    TangentBundle::new(base.clone(), w.clone())
}

fn spread(v: &[f64]) -> f64 {
    v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min)
}

/// max|closed − oracle| / max(1, max|oracle|)
fn rel_err(closed: &[f64], oracle: &[f64]) -> f64 {
    let scale = oracle.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    closed.iter().zip(oracle).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())) / scale
}

fn grid(n: usize, t_max: f64) -> Vec<f64> {
    (0..n).map(|i| t_max * i as f64 / (n - 1) as f64).collect()
}

fn bases(m: usize) -> Vec<ChartedManifold> {
    vec![
        ChartedManifold::euclidean(m).unwrap(),
        ChartedManifold::sphere(m, 1.0).unwrap(),
        ChartedManifold::hyperbolic(m, -1.0).unwrap(),
    ]
}

fn weights() -> Vec<WeightFunction> {
    vec![
        WeightFunction::CheegerGromoll,
        WeightFunction::AlmostKaehler,
        WeightFunction::Flat,
        WeightFunction::constant(1.0).unwrap(),
    ]
}

fn criterion_1() -> Outcome {
    let b = bundle(&ChartedManifold::euclidean(2).unwrap(), &WeightFunction::Flat);
    let (mut numeric, mut closed, mut table) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..POINTS {
        let s = sample(&b, SEED, i).unwrap();
        let p = &s.point;
        numeric = numeric.max(numeric_riemann_2m(&b, &p.coords()).unwrap().riemann.0.max_abs());
        let cf = ClosedForm::new(&b, p).unwrap();
        let [x, y, z] = &s.vectors;
        for case in CurvatureCase::ALL {
            closed = closed.max(stack(p, &cf.curvature(case, x, y, z)).amax());
        }
        table = table.max(cf.sectional_table(FormulaVariant::Consistent).unwrap().max_abs());
    }
    outcome(
        1,
        "flatness of g_1 over Euclidean base",
        numeric <= FLAT_NUMERIC_TOL && closed == 0.0 && table == 0.0,
        format!("numeric max|R| = {numeric:.3e} (tol {FLAT_NUMERIC_TOL:e}), closed max = {closed:e}, table max = {table:e}"),
    )
}

fn max_d_omega(w: &WeightFunction) -> f64 {
    let mut worst = 0.0f64;
    for m in [2, 3] {
        for base in bases(m) {
            let b = bundle(&base, w);
            for i in 0..POINTS {
                let s = sample(&b, SEED, i).unwrap();
                worst = worst.max(numeric_d_omega(&b, &s.point.coords()).unwrap().max_abs());
            }
        }
    }
    worst
}

fn criterion_2() -> Outcome {
    let ak = max_d_omega(&WeightFunction::AlmostKaehler);
    let cg = max_d_omega(&WeightFunction::CheegerGromoll);
    outcome(
        2,
        "almost-Kaehler iff (printed almost_kaehler weight)",
        ak <= D_OMEGA_TOL && cg > D_OMEGA_NONZERO,
        format!(
            "almost_kaehler max|dΩ| = {ak:.3e} (tol {D_OMEGA_TOL:e}); cheeger_gromoll max|dΩ| = {cg:.3e} (need > {D_OMEGA_NONZERO:e})"
        ),
    )
}

fn criterion_3() -> Outcome {
    let candidates = [LeeCoefficient::GeneralPrinted, LeeCoefficient::CheegerGromollPrinted];
    let mut pass = true;
    let mut detail = Vec::new();
    for w in [WeightFunction::constant(1.0).unwrap(), WeightFunction::CheegerGromoll] {
        let b = bundle(&ChartedManifold::sphere(3, 1.0).unwrap(), &w);
        let errs: Vec<f64> = candidates
            .iter()
            .map(|&c| {
                (0..POINTS)
                    .map(|i| {
                        let z = sample(&b, SEED, i).unwrap().point.coords();
                        let d = form_components(&numeric_d_omega(&b, &z).unwrap());
                        let wv = form_components(&wedge_omega(&b, &z, c).unwrap());
                        wv.iter().zip(&d).fold(0.0f64, |m, (a, o)| m.max((a - o).abs()))
                    })
                    .fold(0.0, f64::max)
            })
            .collect();
        let winners: Vec<_> = candidates.iter().zip(&errs).filter(|(_, e)| **e <= LEE_TOL).map(|(c, _)| *c).collect();
        pass &= winners.len() == 1;
        detail.push(format!(
            "{w}: winner {} (errors {:.2e} / {:.2e})",
            winners.iter().map(|c| c.formula()).collect::<Vec<_>>().join(", "),
            errs[0],
            errs[1]
        ));
    }
    outcome(3, "dΩ = ω∧Ω for exactly one printed ω coefficient", pass, detail.join("; "))
}

fn criterion_4() -> Outcome {
    let combos: Vec<(ChartedManifold, WeightFunction)> =
        bases(3).into_iter().flat_map(|b| weights().into_iter().map(move |w| (b.clone(), w))).collect();
    let errs: Vec<[f64; 4]> = combos
        .par_iter()
        .map(|(base, w)| {
            let b = bundle(base, w);
            let mut e = [0.0f64; 4];
            for i in 0..POINTS {
                let s = sample(&b, SEED, i).unwrap();
                let p = &s.point;
                let z = p.coords();
                let cf = ClosedForm::new(&b, p).unwrap();
                let [x, y, zz] = &s.vectors;
                for pair in LiftPair::ALL {
                    let c = stack(p, &cf.nabla(pair, x, y));
                    let o = numeric_nabla(&b, &z, pair, x, y).unwrap();
                    e[0] = e[0].max(rel_err(c.as_slice(), o.as_slice()));
                }
                let nc = numeric_riemann_2m(&b, &z).unwrap();
                let lift = |k: Lift, v: &DVector<f64>| match k {
                    Lift::H => p.horizontal(v.clone()),
                    Lift::V => p.vertical(v.clone()),
                };
                for case in CurvatureCase::ALL {
                    let (l1, l2, l3) = case.lifts();
                    let c = stack(p, &cf.curvature(case, x, y, zz));
                    let o = nc.riemann.apply(&stack(p, &lift(l1, x)), &stack(p, &lift(l2, y)), &stack(p, &lift(l3, zz)));
                    e[1] = e[1].max(rel_err(c.as_slice(), o.as_slice()));
                }
                let frame = cf.frame().unwrap();
                let table = cf.sectional_table(FormulaVariant::Consistent).unwrap();
                let (tc, to): (Vec<f64>, Vec<f64>) = table
                    .entries
                    .iter()
                    .map(|en| {
                        let k = nc.sectional(&stack(p, &frame[en.a - 1]), &stack(p, &frame[en.b - 1])).unwrap();
                        (en.value, k)
                    })
                    .unzip();
                e[2] = e[2].max(rel_err(&tc, &to));
                e[3] = e[3].max(rel_err(&[cf.scalar(FormulaVariant::Consistent)], &[nc.scalar()]));
            }
            e
        })
        .collect();
    let worst = errs.iter().fold([0.0f64; 4], |m, e| [m[0].max(e[0]), m[1].max(e[1]), m[2].max(e[2]), m[3].max(e[3])]);
    outcome(
        4,
        "closed-form connection/curvature/sectional/scalar vs oracle",
        worst.iter().all(|e| *e <= ORACLE_REL_TOL),
        format!(
            "3 bases × 4 weights × {POINTS} points, m = 3; rel errors ∇̃ {:.2e}, R̃ {:.2e}, K̃ {:.2e}, scal̃ {:.2e} (tol {ORACLE_REL_TOL:e})",
            worst[0], worst[1], worst[2], worst[3]
        ),
    )
}

fn criterion_5() -> Outcome {
    let ts = grid(100, 5.0);
    let ak: Vec<f64> = ts.iter().map(|&t| WeightFunction::AlmostKaehler.kaehler_obstruction(t).unwrap()).collect();
    let mut pass = spread(&ak) > OBSTRUCTION_SPREAD_MIN;
    let mut detail = vec![format!("almost_kaehler spread {:.3e}", spread(&ak))];
    for (c, k) in [(0.0, 1.0), (1.0, 1.0), (1.0, 2.0)] {
        let w = WeightFunction::integrable(c, k).unwrap();
        let v: Vec<f64> = ts.iter().map(|&t| w.kaehler_obstruction(t).unwrap()).collect();
        let dev = v.iter().fold(0.0f64, |m, x| m.max((x - c).abs()));
        pass &= spread(&v) <= OBSTRUCTION_CONST_TOL && dev <= OBSTRUCTION_CONST_TOL;
        detail.push(format!("integrable({c},{k}) spread {:.1e}, |value − c| ≤ {dev:.1e}", spread(&v)));
    }
    outcome(5, "Kaehler obstruction", pass, detail.join("; "))
}

fn criterion_6() -> Outcome {
    let b = bundle(&ChartedManifold::sphere(3, 1.0).unwrap(), &WeightFunction::CheegerGromoll);
    let mut kappas = Vec::new();
    for i in 0..POINTS {
        let s = sample(&b, SEED, i).unwrap();
        let p = &s.point;
        let cf = ClosedForm::new(&b, p).unwrap();
        let [x, y, _] = &s.vectors;
        for (pair, kinds) in [(LiftPair::HH, (Lift::H, Lift::H)), (LiftPair::VV, (Lift::V, Lift::V))] {
            let c = stack(p, &cf.nijenhuis(pair, x, y).unwrap());
            let o = numeric_nijenhuis(&b, &p.coords(), kinds, x, y).unwrap();
            if c.norm() > 1e-3 {
                kappas.push(proportionality(c.as_slice(), o.as_slice()).unwrap());
            }
        }
    }
    let mean = kappas.iter().sum::<f64>() / kappas.len() as f64;
    let rel_spread = spread(&kappas) / mean.abs();
    let i11 = bundle(&ChartedManifold::sphere(3, 1.0).unwrap(), &WeightFunction::integrable(1.0, 1.0).unwrap());
    let mut norm = 0.0f64;
    for i in 0..POINTS {
        let s = sample(&i11, SEED, i).unwrap();
        let [x, y, _] = &s.vectors;
        for kinds in [(Lift::H, Lift::H), (Lift::V, Lift::V)] {
            norm = norm.max(numeric_nijenhuis(&i11, &s.point.coords(), kinds, x, y).unwrap().norm());
        }
    }
    outcome(
        6,
        "Nijenhuis HH/VV proportional with one constant; vanish for integrable(1,1) on sphere(1)",
        rel_spread <= NIJENHUIS_SPREAD_TOL && norm <= NIJENHUIS_ZERO_TOL,
        format!(
            "κ = {mean:.6} over {} components, relative spread {rel_spread:.2e} (tol {NIJENHUIS_SPREAD_TOL:e}); integrable max|N| = {norm:.2e} (tol {NIJENHUIS_ZERO_TOL:e})",
            kappas.len()
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut worst = 0.0f64;
    for m in [2, 3] {
        for base in bases(m) {
            for w in weights() {
                let b = bundle(&base, &w);
                for i in 0..POINTS {
                    let s = sample(&b, SEED, i).unwrap();
                    let c = ClosedForm::new(&b, &s.point).unwrap().scalar(FormulaVariant::Consistent);
                    let o = numeric_riemann_2m(&b, &s.point.coords()).unwrap().scalar();
                    worst = worst.max(rel_err(&[c], &[o]));
                }
            }
        }
    }
    let b = bundle(&ChartedManifold::euclidean(2).unwrap(), &WeightFunction::constant(1.0).unwrap());
    let p = b.point(&[0.0, 0.0], &[0.0, 0.0]).unwrap();
    let hand = ClosedForm::new(&b, &p).unwrap().scalar(FormulaVariant::Consistent);
    let hand_num = numeric_riemann_2m(&b, &p.coords()).unwrap().scalar();
    outcome(
        7,
        "scalar relation vs numeric scalar curvature",
        worst <= SCALAR_TOL && (hand - 2.0).abs() <= SCALAR_TOL && (hand_num - 2.0).abs() <= SCALAR_TOL,
        format!(
            "max rel err {worst:.2e} over 3 bases × 4 weights × m ∈ {{2,3}} (tol {SCALAR_TOL:e}); hand value closed {hand}, numeric {hand_num:.6}"
        ),
    )
}

fn criterion_8() -> Outcome {
    let ts = grid(100, 5.0);
    let flat: Vec<f64> = ts.iter().map(|&t| WeightFunction::Flat.scal_ode_lhs(0.0, 2, t).unwrap()).collect();
    let cg: Vec<f64> = ts.iter().map(|&t| WeightFunction::CheegerGromoll.scal_ode_lhs(1.0, 2, t).unwrap()).collect();
    let b = bundle(&ChartedManifold::euclidean(2).unwrap(), &WeightFunction::Flat);
    let oracle = (0..POINTS)
        .map(|i| numeric_riemann_2m(&b, &sample(&b, SEED, i).unwrap().point.coords()).unwrap().scalar())
        .fold(0.0f64, |m, s| m.max((s - flat[0]).abs()));
    outcome(
        8,
        "constant-scalar-curvature ODE",
        spread(&flat) <= ODE_CONST_TOL && spread(&cg) > ODE_SPREAD_MIN && oracle <= SCALAR_TOL,
        format!(
            "flat spread {:.1e} (tol {ODE_CONST_TOL:e}); cheeger_gromoll spread {:.3e} (need > {ODE_SPREAD_MIN}); flat constant {} vs oracle scal̃ max dev {oracle:.2e} (tol {SCALAR_TOL:e})",
            spread(&flat),
            spread(&cg),
            flat[0]
        ),
    )
}

fn criterion_9() -> Outcome {
    let mut worst = [0.0f64; 5];
    for base in bases(3) {
        for w in weights() {
            let b = bundle(&base, &w);
            for i in 0..100 {
                let s = sample(&b, SEED, i).unwrap();
                let p = &s.point;
                let g = b.induced_coordinate_metric(p).unwrap();
                let j = b.j_coordinate_matrix(p).unwrap();
                let scale = g.amax().max(1.0);
                worst[0] = worst[0].max((&j * &j + DMatrix::identity(6, 6)).amax());
                worst[1] = worst[1].max((j.transpose() * &g * &j - &g).amax() / scale);
                let frame = b.adapted_frame(p).unwrap();
                for (k, e) in frame.iter().enumerate() {
                    for (l, f) in frame.iter().enumerate() {
                        let want = if k == l { 1.0 } else { 0.0 };
                        worst[2] = worst[2].max((b.g_a(p, e, f).unwrap() - want).abs());
                    }
                }
                // e_2, e_3 are g-orthonormal and orthogonal to u
                let e = b.base_frame(p).unwrap();
                let a = b.weight_at(p).unwrap().a;
                let cf = ClosedForm::new(&b, p).unwrap();
                let q = [
                    (cf.area_sq(&p.horizontal(e[1].clone()), &p.horizontal(e[2].clone())).unwrap(), 1.0),
                    (cf.area_sq(&p.horizontal(e[1].clone()), &p.vertical(e[2].clone())).unwrap(), a),
                    (cf.area_sq(&p.vertical(e[1].clone()), &p.vertical(e[2].clone())).unwrap(), a * a),
                ];
                for (v, want) in q {
                    worst[3] = worst[3].max((v - want).abs() / want.max(1.0));
                }
                let table = cf.sectional_table(FormulaVariant::Consistent).unwrap();
                for en in table.entries.iter().filter(|en| en.class == PairClass::HV1) {
                    worst[4] = worst[4].max(en.value.abs());
                }
            }
        }
    }
    outcome(
        9,
        "algebraic invariants",
        worst[..4].iter().all(|e| *e <= ALGEBRA_TOL) && worst[4] == 0.0,
        format!(
            "100 samples × 12 combos; J²+I {:.1e}, Hermitian {:.1e}, frame {:.1e}, Q^a {:.1e} (tol {ALGEBRA_TOL:e}); max|K̃(E_i,E_{{m+1}})| = {}",
            worst[0], worst[1], worst[2], worst[3], worst[4]
        ),
    )
}

fn criterion_10() -> Outcome {
    let run = |workers: &str| {
        Command::new(env!("CARGO_BIN_EXE_tanbundle"))
            .args([
                "check", "--base", "sphere", "--c", "1", "--dim", "3", "--weight", "cheeger_gromoll", "--seed", "42",
                "--output", "json", "--workers", workers,
            ])
            .output()
            .unwrap()
    };
    let (a, b) = (run("1"), run("4"));
    let same = a.stdout == b.stdout && !a.stdout.is_empty();
    outcome(
        10,
        "determinism across worker counts",
        same && a.status.code() == Some(0),
        format!("{} bytes, identical = {same}, exit {:?}", a.stdout.len(), a.status.code()),
    )
}

#[test]
fn acceptance() {
    let results = vec![
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(),
        criterion_10(),
    ];
    let failed: Vec<String> = results.iter().filter(|o| !o.pass).map(|o| format!("[{}] {}", o.id, o.name)).collect();
    println!("{}/{} criteria passed", results.len() - failed.len(), results.len());
    assert!(failed.is_empty(), "failing criteria: {}", failed.join(", "));
}
