use hermite_qi::{linspace, KnotVector, SplineCurve, SplineSurface, SplineVolume};
use proptest::prelude::*;

/// Breakpoints with step ratios bounded by 5.
fn mesh(max_n: usize) -> impl Strategy<Value = Vec<f64>> {
    (-2.0..2.0f64, prop::collection::vec(0.2..1.0f64, 1..=max_n)).prop_map(|(a, steps)| {
        let mut x = vec![a];
        for s in steps {
            x.push(x.last().unwrap() + s);
        }
        x
    })
}

fn curve(d: usize, bps: &[f64], periodic: bool, seed: u64) -> SplineCurve {
    let kv = KnotVector::new(d, bps, periodic).unwrap();
    let n = kv.num_coefficients();
    let coefs = (0..n)
        .map(|i| ((i as f64 + 1.0) * 0.7 + seed as f64 * 0.37).sin() * 2.0)
        .collect();
    SplineCurve::scalar(kv, coefs).unwrap()
}

/// Gauss–Legendre nodes and weights on [-1, 1] with 4 points (exact to degree 7).
const GAUSS4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
    (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
];

fn gauss_integral(s: &SplineCurve, x0: f64, x1: f64) -> f64 {
    // Integrate span by span so each piece is a single polynomial.
    let mut cuts: Vec<f64> = s
        .knots()
        .breakpoints()
        .iter()
        .copied()
        .filter(|&t| t > x0 && t < x1)
        .collect();
    cuts.insert(0, x0);
    cuts.push(x1);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (c, r) = ((w[0] + w[1]) / 2.0, (w[1] - w[0]) / 2.0);
        for (t, g) in GAUSS4 {
            total += g * r * s.eval1(c + r * t, 0).unwrap();
        }
    }
    total
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partition_of_unity(bps in mesh(12), d in 1usize..=5, t in 0.0..1.0f64) {
        prop_assume!(bps.len() > d);
        let kv = KnotVector::new(d, &bps, false).unwrap();
        let (a, b) = kv.domain();
        let bas = kv.basis_eval(a + t * (b - a), 0).unwrap();
        prop_assert_eq!(bas.values.len(), d + 1);
        prop_assert!((bas.values.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn derivative_matches_centered_difference(bps in mesh(10), d in 1usize..=5, t in 0.0..1.0f64, seed in 0u64..100) {
        prop_assume!(bps.len() > d);
        let s = curve(d, &bps, false, seed);
        let (a, b) = s.domain();
        let x = a + t * (b - a);
        let step = 1e-5;
        // stay away from knots where lower-degree pieces join
        prop_assume!(bps.iter().all(|k| (k - x).abs() > 2.0 * step));
        prop_assume!(x - step >= a && x + step <= b);
        let fd = (s.eval1(x + step, 0).unwrap() - s.eval1(x - step, 0).unwrap()) / (2.0 * step);
        let exact = s.eval1(x, 1).unwrap();
        prop_assert!((fd - exact).abs() <= 1e-6 * (1.0 + exact.abs()), "{} vs {}", fd, exact);
    }

    #[test]
    fn integral_matches_gauss_and_is_additive(bps in mesh(10), d in 1usize..=5, u in 0.0..1.0f64, v in 0.0..1.0f64, seed in 0u64..100) {
        prop_assume!(bps.len() > d);
        let s = curve(d, &bps, false, seed);
        let (a, b) = s.domain();
        let (x0, x2) = (a + u.min(v) * (b - a), a + u.max(v) * (b - a));
        let x1 = 0.5 * (x0 + x2);
        let whole = s.integral(x0, x2).unwrap()[0];
        let oracle = gauss_integral(&s, x0, x2);
        let scale = 1.0 + oracle.abs();
        prop_assert!((whole - oracle).abs() <= 1e-12 * scale * (b - a), "{} vs {}", whole, oracle);
        let parts = s.integral(x0, x1).unwrap()[0] + s.integral(x1, x2).unwrap()[0];
        prop_assert!((parts - whole).abs() <= 1e-12 * scale);
    }

    #[test]
    fn periodic_evaluation_wraps(bps in mesh(10), d in 1usize..=5, t in 0.0..1.0f64, seed in 0u64..100) {
        prop_assume!(bps.len() > d + 1);
        let s = curve(d, &bps, true, seed);
        let (a, b) = s.domain();
        let x = a + t * (b - a);
        let y = x + (b - a);
        let (p, q) = (s.eval1(x, 0).unwrap(), s.eval1(y, 0).unwrap());
        prop_assert!((p - q).abs() <= 1e-12 * (1.0 + p.abs()));
    }
}

#[test]
fn identity_integral_on_zero_two() {
    // x on [0, 2] in cubic B-form: coefficients at the Greville abscissae.
    let kv = KnotVector::new(3, &linspace(0.0, 2.0, 6), false).unwrap();
    let coefs = (0..kv.num_coefficients()).map(|i| kv.greville(i)).collect();
    let s = SplineCurve::scalar(kv, coefs).unwrap();
    assert!((s.integral(0.0, 2.0).unwrap()[0] - 2.0).abs() < 1e-14);
    assert!((gauss_integral(&s, 0.0, 2.0) - 2.0).abs() < 1e-14);
    assert_eq!(s.integral(0.7, 0.7).unwrap()[0], 0.0);
}

#[test]
fn surface_of_rank_one_coefficients_separates() {
    let u = curve(3, &[0.0, 0.4, 1.0, 1.5, 2.0], false, 1);
    let v = curve(2, &[-1.0, 0.0, 0.3, 1.0], false, 2);
    let (cu, cv) = (u.coefficients(), v.coefficients());
    let mut c = Vec::new();
    for q in cv {
        for p in cu {
            c.push(p * q);
        }
    }
    let s = SplineSurface::new(u.knots().clone(), v.knots().clone(), c).unwrap();
    for x in linspace(0.0, 2.0, 9) {
        for y in linspace(-1.0, 1.0, 7) {
            for (dx, dy) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                let e = u.eval1(x, dx).unwrap() * v.eval1(y, dy).unwrap();
                assert!((s.eval(x, y, dx, dy).unwrap() - e).abs() < 1e-12 * (1.0 + e.abs()));
            }
        }
    }
    let grid = s.eval_grid(&[0.1, 1.9], &[-0.5, 0.5, 0.9], 0, 0).unwrap();
    assert!((grid[1 + 2 * 2] - s.eval(1.9, 0.9, 0, 0).unwrap()).abs() < 1e-14);
}

#[test]
fn volume_of_rank_one_coefficients_separates() {
    let u = curve(2, &[0.0, 0.5, 1.0], false, 3);
    let v = curve(3, &[0.0, 0.2, 0.7, 1.0], false, 4);
    let w = curve(1, &[0.0, 0.3, 1.0], false, 5);
    let mut c = Vec::new();
    for r in w.coefficients() {
        for q in v.coefficients() {
            for p in u.coefficients() {
                c.push(p * q * r);
            }
        }
    }
    let kv = [u.knots().clone(), v.knots().clone(), w.knots().clone()];
    let s = SplineVolume::new(kv, c).unwrap();
    for x in [0.0, 0.31, 1.0] {
        for y in [0.05, 0.5, 0.93] {
            for z in [0.0, 0.2, 0.77] {
                let e = u.eval1(x, 1).unwrap() * v.eval1(y, 0).unwrap() * w.eval1(z, 0).unwrap();
                assert!((s.eval(x, y, z, [1, 0, 0]).unwrap() - e).abs() < 1e-12 * (1.0 + e.abs()));
            }
        }
    }
    let one = SplineVolume::new(
        [u.knots().clone(), v.knots().clone(), w.knots().clone()],
        vec![2.0; u.coefficients().len() * v.coefficients().len() * w.coefficients().len()],
    )
    .unwrap();
    assert!((one.eval(0.4, 0.4, 0.4, [0, 0, 0]).unwrap() - 2.0).abs() < 1e-14);
    assert!(one.eval(0.4, 0.4, 0.4, [1, 0, 0]).unwrap().abs() < 1e-13);
}
