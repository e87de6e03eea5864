use std::f64::consts::TAU;

use hermite_qi::{
    linspace, qi2d_approx, qi2d_hermite, qi2d_polar, qi3d_approx, qi_nd_approx, ApproxQi, Axis,
    GridSample2D, GridSample3D, QiOperator, SplineCurve, Tensor,
};
use proptest::prelude::*;

fn nodes(a: f64, steps: &[f64]) -> Vec<f64> {
    let mut x = vec![a];
    for s in steps {
        x.push(x.last().unwrap() + s);
    }
    x
}

fn axis_strategy(max_n: usize) -> impl Strategy<Value = Axis> {
    (-1.0..1.0f64, prop::collection::vec(0.2..1.0f64, 6..=max_n))
        .prop_map(|(a, s)| Axis::new(nodes(a, &s)).unwrap())
}

fn values(shape: &[usize], seed: u64) -> Vec<f64> {
    let total: usize = shape.iter().product();
    (0..total)
        .map(|k| (k as f64 * 0.731 + seed as f64).sin() * 1.7 + (k as f64 * 0.05).cos())
        .collect()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn fitting_along_x_commutes_with_differencing_along_y(
        x in axis_strategy(14),
        y in axis_strategy(14),
        d in 1usize..=5,
        l in 1usize..=6,
        seed in 0u64..100,
    ) {
        let shape = vec![x.sample_count(), y.sample_count()];
        let f = Tensor::new(shape.clone(), values(&shape, seed)).unwrap();
        let wx = ApproxQi::new(&x, d, l).unwrap();
        let gy = ApproxQi::new(&y, d, l).unwrap().fd().to_dense();
        let (n1, m2) = (wx.num_coefficients(), y.sample_count());
        // x-fit of the y-differenced samples
        let lhs = f
            .n_mode_product(&gy, m2, 1).unwrap()
            .n_mode_product(&wx.matrix(), n1, 0).unwrap();
        // y-differences of the x-fitted coefficients D
        let rhs = f
            .n_mode_product(&wx.matrix(), n1, 0).unwrap()
            .n_mode_product(&gy, m2, 1).unwrap();
        prop_assert!(max_diff(lhs.data(), rhs.data()) <= 1e-10 * (1.0 + norm(rhs.data())));
    }

    #[test]
    fn axis_order_is_immaterial(
        x in axis_strategy(12),
        y in axis_strategy(12),
        dx in 1usize..=5,
        dy in 1usize..=5,
        seed in 0u64..100,
    ) {
        let shape = vec![x.sample_count(), y.sample_count()];
        let f = values(&shape, seed);
        let g = GridSample2D::new(x.clone(), y.clone(), f.clone()).unwrap();
        let s = qi2d_approx(&g, [dx, dy], [dx + 1, dy + 1]).unwrap();
        let wx = ApproxQi::new(&x, dx, dx + 1).unwrap();
        let wy = ApproxQi::new(&y, dy, dy + 1).unwrap();
        let other = Tensor::new(shape, f).unwrap()
            .n_mode_product(&wy.matrix(), wy.num_coefficients(), 1).unwrap()
            .n_mode_product(&wx.matrix(), wx.num_coefficients(), 0).unwrap();
        prop_assert!(max_diff(s.coefficients(), other.data()) <= 1e-10 * (1.0 + norm(other.data())));
    }

    #[test]
    fn fiber_pipeline_equals_mode_products(
        x in axis_strategy(9),
        y in axis_strategy(9),
        z in axis_strategy(9),
        d in 1usize..=4,
        seed in 0u64..100,
    ) {
        let axes = [x, y, z];
        let shape: Vec<usize> = axes.iter().map(Axis::sample_count).collect();
        let f = Tensor::new(shape.clone(), values(&shape, seed)).unwrap();
        let (_, c) = qi_nd_approx(&axes, f.clone(), &[d; 3], &[d + 1; 3]).unwrap();
        let mut t = f;
        for (mode, ax) in axes.iter().enumerate() {
            let w = ApproxQi::new(ax, d, d + 1).unwrap();
            t = t.n_mode_product(&w.matrix(), w.num_coefficients(), mode).unwrap();
        }
        prop_assert_eq!(c.shape(), t.shape());
        prop_assert!(max_diff(c.data(), t.data()) <= 1e-12 * (1.0 + norm(t.data())));
    }
}

/// Volume values checked against fits of one axis at a time, each evaluated
/// before the next axis is fitted.
#[test]
fn volume_matches_nested_curve_fits() {
    let warp = |t: f64| t + 0.08 * (5.0 * t).sin();
    let ax = |a: f64, b: f64| {
        Axis::new(
            linspace(0.0, 1.0, 12)
                .into_iter()
                .map(|t| a + (b - a) * warp(t) / warp(1.0))
                .collect(),
        )
        .unwrap()
    };
    let axes = [ax(0.0, 1.0), ax(-1.0, 0.5), ax(2.0, 3.0)];
    let f = |x: f64, y: f64, z: f64| (x + 2.0 * y).sin() * (z * z - y).exp();
    let [m1, m2, m3] = [12, 12, 12];
    let mut v = Vec::with_capacity(m1 * m2 * m3);
    for &z in axes[2].samples() {
        for &y in axes[1].samples() {
            for &x in axes[0].samples() {
                v.push(f(x, y, z));
            }
        }
    }
    let (d, l) = ([3, 2, 4], [4, 4, 5]);
    let vol = qi3d_approx(&GridSample3D::new(axes.clone(), v.clone()).unwrap(), d, l).unwrap();
    let curve = |k: usize, vals: &[f64]| -> SplineCurve {
        ApproxQi::new(&axes[k], d[k], l[k])
            .unwrap()
            .fit(vals, 1)
            .unwrap()
    };
    for &(px, py, pz) in &[
        (0.13, -0.8, 2.05),
        (0.5, 0.1, 2.5),
        (1.0, 0.5, 3.0),
        (0.0, -1.0, 2.0),
        (0.77, -0.31, 2.61),
    ] {
        let mut plane = vec![0.0; m2 * m3];
        for (jk, p) in plane.iter_mut().enumerate() {
            *p = curve(0, &v[jk * m1..(jk + 1) * m1]).eval1(px, 0).unwrap();
        }
        let mut line = vec![0.0; m3];
        for (k, p) in line.iter_mut().enumerate() {
            *p = curve(1, &plane[k * m2..(k + 1) * m2]).eval1(py, 0).unwrap();
        }
        let oracle = curve(2, &line).eval1(pz, 0).unwrap();
        let got = vol.eval(px, py, pz, [0, 0, 0]).unwrap();
        assert!(
            (got - oracle).abs() <= 1e-10 * (1.0 + oracle.abs()),
            "{got} vs {oracle}"
        );
    }
}

#[test]
fn hermite_surface_of_a_product_is_the_product_of_curves() {
    let x = Axis::new(vec![0.0, 0.15, 0.4, 0.5, 0.8, 1.0, 1.3]).unwrap();
    let y = Axis::new(vec![-1.0, -0.6, -0.1, 0.3, 0.35, 0.9]).unwrap();
    let (g, dg) = (|x: f64| (2.0 * x).sin(), |x: f64| 2.0 * (2.0 * x).cos());
    let (h, dh) = (|y: f64| y.exp(), |y: f64| y.exp());
    let mut f = Vec::new();
    let mut fx = Vec::new();
    let mut fy = Vec::new();
    let mut fxy = Vec::new();
    for &yj in y.samples() {
        for &xi in x.samples() {
            f.push(g(xi) * h(yj));
            fx.push(dg(xi) * h(yj));
            fy.push(g(xi) * dh(yj));
            fxy.push(dg(xi) * dh(yj));
        }
    }
    let grid = GridSample2D::new(x.clone(), y.clone(), f)
        .unwrap()
        .with_derivatives(fx, fy, fxy)
        .unwrap();
    for (d1, d2) in [(2, 3), (3, 3), (4, 2), (5, 5)] {
        let s = qi2d_hermite(&grid, [d1, d2]).unwrap();
        let on = |ax: &Axis, d, v: fn(f64) -> f64, dv: fn(f64) -> f64| {
            let fs: Vec<f64> = ax.samples().iter().map(|&t| v(t)).collect();
            let ds: Vec<f64> = ax.samples().iter().map(|&t| dv(t)).collect();
            QiOperator::new(ax, d).unwrap().apply(&fs, &ds).unwrap()
        };
        let cx = on(&x, d1, g, dg);
        let cy = on(&y, d2, h, dh);
        let [n1, _] = s.shape();
        for (q, b) in cy.iter().enumerate() {
            for (p, a) in cx.iter().enumerate() {
                let c = s.coefficients()[p + n1 * q];
                assert!((c - a * b).abs() <= 1e-12 * (1.0 + (a * b).abs()));
            }
        }
    }
}

#[test]
fn polar_surface_is_smooth_across_the_seam() {
    let rho = linspace(0.2, 1.0, 9);
    let m = 24;
    let theta: Vec<f64> = (0..m).map(|k| TAU * k as f64 / m as f64).collect();
    let mut f = Vec::new();
    for &t in &theta {
        for &r in &rho {
            f.push(r * t.cos());
        }
    }
    for d in 2..=4 {
        let s = qi2d_polar(&rho, &theta, TAU, f.clone(), [d, d], [d + 1, d + 1]).unwrap();
        for &r in &[0.2, 0.55, 1.0] {
            for k in 0..d {
                let a = s.eval(r, 0.0, 0, k).unwrap();
                let b = s.eval(r, TAU, 0, k).unwrap();
                assert!((a - b).abs() <= 1e-10, "d={d} k={k}: {a} vs {b}");
            }
            // and the fit is close to the true function across it
            let e = (s.eval(r, 0.01, 0, 0).unwrap() - r * 0.01f64.cos()).abs();
            assert!(e < 1e-3, "d={d} err {e}");
        }
    }
}
