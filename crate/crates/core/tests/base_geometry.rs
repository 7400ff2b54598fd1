use std::sync::Arc;

use approx::assert_relative_eq;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use tanbundle::base::{ChartedManifold, CurvatureModel, MetricFn};
use tanbundle::Error;

fn dv(xs: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(xs)
}

fn warped(dim: usize) -> ChartedManifold {
    let f: MetricFn = Arc::new(move |x: &DVector<f64>| {
        let mut g = DMatrix::identity(dim, dim);
        for i in 0..dim {
            g[(i, i)] = 1.0 + 0.3 * x[0] * x[0] + 0.2 * (x[(i + 1) % dim]).sin();
        }
        g[(0, 1)] = 0.1 * x[0] * x[1];
        g[(1, 0)] = g[(0, 1)];
        g
    });
    ChartedManifold::custom(dim, f, 1.0).unwrap()
}

#[test]
fn metric_examples() {
    let e = ChartedManifold::euclidean(2).unwrap();
    assert_eq!(e.metric_at(&dv(&[0.4, -0.3])).unwrap(), DMatrix::identity(2, 2));
    let s = ChartedManifold::sphere(2, 1.0).unwrap();
    assert_eq!(s.metric_at(&dv(&[0.0, 0.0])).unwrap(), DMatrix::identity(2, 2));
    // |x|² = 4 lies outside the preset chart ball; a wider custom chart with
    // the same conformal factor shows the value there
    let conformal: MetricFn =
        Arc::new(|x: &DVector<f64>| DMatrix::identity(2, 2) / (1.0 + x.norm_squared() / 4.0).powi(2));
    let wide = ChartedManifold::custom(2, conformal, 3.0).unwrap();
    assert_eq!(wide.metric_at(&dv(&[2.0, 0.0])).unwrap(), DMatrix::identity(2, 2) * 0.25);
    assert!(matches!(s.metric_at(&dv(&[2.0, 0.0])), Err(Error::Domain(_))));
}

#[test]
fn christoffel_examples() {
    let e = ChartedManifold::euclidean(3).unwrap();
    assert!(e.christoffel_at(&dv(&[0.1, 0.2, 0.3])).unwrap().0.is_zero());
    let s = ChartedManifold::sphere(2, 1.0).unwrap();
    assert!(s.christoffel_numeric(&dv(&[0.0, 0.0])).unwrap().0.max_abs() < 1e-12);
    assert!(s.christoffel_at(&dv(&[0.0, 0.0])).unwrap().0.is_zero());
}

#[test]
fn presets_carry_models() {
    assert_eq!(ChartedManifold::sphere(2, 1.0).unwrap().model(), CurvatureModel::SpaceForm { c: 1.0 });
    assert_eq!(warped(2).model(), CurvatureModel::Generic);
    assert_eq!(ChartedManifold::hyperbolic(3, -0.25).unwrap().chart_radius(), 1.0);
    assert_eq!(ChartedManifold::hyperbolic(3, -9.0).unwrap().chart_radius(), 1.0 / 3.0);
}

#[test]
fn space_form_identity_from_numeric_curvature() {
    // R(X,Y)Z = c (g(Y,Z)X − g(X,Z)Y) against the finite-difference route
    let vecs = [dv(&[1.0, 0.0, 0.5]), dv(&[0.2, -1.0, 0.3]), dv(&[0.7, 0.4, -0.6])];
    for c in [1.0, -1.0, 0.3] {
        let m = ChartedManifold::space_form(3, c).unwrap();
        for x in [dv(&[0.0, 0.0, 0.0]), dv(&[0.2, -0.3, 0.1]), dv(&[-0.4, 0.1, 0.2])] {
            let g = m.metric_at(&x).unwrap();
            let r = m.riemann_numeric(&x).unwrap();
            for a in &vecs {
                for b in &vecs {
                    for z in &vecs {
                        let lhs = r.apply(a, b, z);
                        let rhs = (a * b.dot(&(&g * z)) - b * a.dot(&(&g * z))) * c;
                        assert!((lhs - rhs).amax() < 1e-7);
                    }
                }
            }
        }
    }
}

#[test]
fn generic_metric_has_nonzero_curvature_and_covariant_derivative() {
    let m = warped(3);
    let x = dv(&[0.3, 0.1, -0.2]);
    assert!(m.riemann_at(&x).unwrap().0.max_abs() > 1e-2);
    assert!(m.nabla_riemann_at(&x).unwrap().0.max_abs() > 1e-3);
    assert!(ChartedManifold::sphere(3, 2.0).unwrap().nabla_riemann_at(&x).unwrap().0.is_zero());
}

#[test]
fn second_bianchi_on_generic_metric() {
    let m = warped(2);
    let x = dv(&[0.25, -0.35]);
    let nr = m.nabla_riemann_at(&x).unwrap();
    let n = 2;
    for e in 0..n {
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    for k in 0..n {
                        let s = nr.0.get(&[e, l, i, j, k]) + nr.0.get(&[i, l, j, e, k]) + nr.0.get(&[j, l, e, i, k]);
                        assert!(s.abs() < 1e-6);
                    }
                }
            }
        }
    }
}

#[test]
fn sectional_examples() {
    let e = ChartedManifold::euclidean(3).unwrap();
    assert_eq!(e.sectional_at(&dv(&[0.0, 0.1, 0.0]), &dv(&[1.0, 0.0, 0.0]), &dv(&[0.0, 1.0, 1.0])).unwrap(), 0.0);
    let s = ChartedManifold::sphere(2, 1.0).unwrap();
    assert!(matches!(
        s.sectional_at(&dv(&[0.1, 0.1]), &dv(&[1.0, 1.0]), &dv(&[-2.0, -2.0])),
        Err(Error::Degenerate(_))
    ));
}

#[test]
fn numeric_step_is_configurable() {
    use tanbundle::fd::FdSteps;
    let m = ChartedManifold::sphere(2, 1.0).unwrap().with_steps(FdSteps::from_first(5e-4));
    assert_eq!(m.steps().second, 5e-3);
    let x = dv(&[0.3, 0.2]);
    let r = m.riemann_numeric(&x).unwrap();
    let exact = m.riemann_at(&x).unwrap();
    for (a, b) in r.0.components().iter().zip(exact.0.components()) {
        assert!((a - b).abs() < 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn christoffel_is_symmetric(x0 in -0.4f64..0.4, x1 in -0.4f64..0.4) {
        for m in [warped(2), ChartedManifold::hyperbolic(2, -1.0).unwrap()] {
            let g = m.christoffel_at(&dv(&[x0, x1])).unwrap();
            for k in 0..2 { for i in 0..2 { for j in 0..2 {
                prop_assert_eq!(g.0.get(&[k, i, j]), g.0.get(&[k, j, i]));
            }}}
        }
    }

    #[test]
    fn sphere_sectional_is_c(
        x in prop::array::uniform3(-0.45f64..0.45),
        a in prop::array::uniform3(-1.0f64..1.0),
        b in prop::array::uniform3(-1.0f64..1.0),
        s in 0.1f64..10.0,
    ) {
        let m = ChartedManifold::sphere(3, 1.0).unwrap();
        let (x, a, b) = (dv(&x), dv(&a), dv(&b));
        match m.sectional_at(&x, &a, &b) {
            Ok(k) => {
                prop_assert!((k - 1.0).abs() < 1e-10);
                let k2 = m.sectional_at(&x, &(&a * s), &b).unwrap();
                prop_assert!((k - k2).abs() < 1e-10);
            }
            Err(Error::Degenerate(_)) => {}
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn curvature_antisymmetries_generic(x0 in -0.4f64..0.4, x1 in -0.4f64..0.4) {
        let m = warped(2);
        let x = dv(&[x0, x1]);
        let g = m.metric_at(&x).unwrap();
        let rl = m.riemann_at(&x).unwrap().lowered(&g);
        for l in 0..2 { for i in 0..2 { for j in 0..2 { for k in 0..2 {
            let v = rl.get(&[l, i, j, k]);
            prop_assert!((v + rl.get(&[l, j, i, k])).abs() < 1e-8);
            prop_assert!((v + rl.get(&[k, i, j, l])).abs() < 1e-7);
        }}}}
    }
}

#[test]
fn hyperbolic_sectional_is_minus_one() {
    let m = ChartedManifold::hyperbolic(2, -1.0).unwrap();
    for x in [[0.0, 0.0], [0.3, 0.4], [-0.2, 0.45]] {
        let x = dv(&x);
        let g = m.metric_at(&x).unwrap();
        let r = m.riemann_numeric(&x).unwrap();
        let s = 1.0 / g[(0, 0)].sqrt();
        let (e1, e2) = (dv(&[s, 0.0]), dv(&[0.0, s]));
        assert_relative_eq!(e1.dot(&(&g * r.apply(&e1, &e2, &e2))), -1.0, epsilon = 1e-7);
    }
}
