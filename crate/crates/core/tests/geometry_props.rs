use hypershift::geometry::*;
use hypershift::quad::integrate;
use proptest::prelude::*;

fn chart_from(theta_angle: f64, xi_len: f64) -> GeodesicChart {
    let theta = vec![theta_angle.cos(), theta_angle.sin()];
    let xi = vec![-theta_angle.sin() * xi_len, theta_angle.cos() * xi_len];
    GeodesicChart::new(theta, xi).unwrap()
}

fn ball_point(r: f64, a: f64) -> BallPoint {
    BallPoint::new(vec![r * a.cos(), r * a.sin()]).unwrap()
}

proptest! {
    #[test]
    fn distance_is_a_metric(r1 in 0.0..0.99f64, a1 in 0.0..6.3f64, r2 in 0.0..0.99f64, a2 in 0.0..6.3f64, r3 in 0.0..0.99f64, a3 in 0.0..6.3f64) {
        let (p, q, w) = (ball_point(r1, a1), ball_point(r2, a2), ball_point(r3, a3));
        let dpq = hyperbolic_distance(&p, &q).unwrap();
        prop_assert!((dpq - hyperbolic_distance(&q, &p).unwrap()).abs() <= 1e-12 * (1.0 + dpq));
        prop_assert!(dpq <= hyperbolic_distance(&p, &w).unwrap() + hyperbolic_distance(&w, &q).unwrap() + 1e-10);
    }

    #[test]
    fn distance_to_origin_is_rho(r in 0.0..0.999f64, a in 0.0..6.3f64) {
        let p = ball_point(r, a);
        let d = hyperbolic_distance(&BallPoint::origin(2), &p).unwrap();
        prop_assert!((d - p.rho()).abs() <= 1e-12 * (1.0 + d));
        prop_assert!((d - ((1.0 + r) / (1.0 - r)).ln()).abs() <= 1e-12 * (1.0 + d));
    }

    #[test]
    fn reversed_geodesic_returns_to_start(angle in 0.0..6.3f64, len in 0.01..20.0f64) {
        let chart = chart_from(angle, len);
        let (t2, x2) = scattering_relation(&chart);
        let back = GeodesicChart::new(t2, x2.iter().map(|x| -x).collect()).unwrap();
        let end = geodesic_point(-0.5 - 1e-12, &back).map(|p| p.coords().to_vec()).unwrap_or_else(|_| chart.theta().to_vec());
        for (a, b) in end.iter().zip(chart.theta()) {
            prop_assert!((a - b).abs() < 1e-6);
        }
        // same geodesic, same closest approach
        prop_assert!((back.xi_norm() - chart.xi_norm()).abs() <= 1e-9 * (1.0 + len));
    }
}

#[test]
fn arclength_of_parametrization_equals_distance() {
    let chart = chart_from(0.4, 0.7);
    for (t1, t2) in [(-3.0, -1.0), (-10.0, -0.6), (-2.0, -1.9)] {
        let len = integrate(|t| geodesic_speed(t, &chart).unwrap(), t1, t2, 1e-13, 1e-13).value;
        let d = hyperbolic_distance(&geodesic_point(t1, &chart).unwrap(), &geodesic_point(t2, &chart).unwrap()).unwrap();
        assert!((len - d).abs() < 1e-10, "{len} vs {d}");
    }
}

#[test]
fn closest_approach_is_minimum_of_rho() {
    for len in [0.05, 0.5, 3.0] {
        let chart = chart_from(1.1, len);
        let mut best = f64::INFINITY;
        for i in 1..200_000 {
            let t = -0.5 - i as f64 * 1e-4;
            best = best.min(geodesic_point(t, &chart).unwrap().rho());
        }
        assert!((best - (2.0 * len).asinh()).abs() < 1e-6);
        assert!((chart.rho_min() - (2.0 * len).asinh()).abs() < 1e-14);
    }
}

#[test]
fn boundary_defining_function_is_exp_minus_rho() {
    for r in [0.0, 0.3, 0.9, 0.999] {
        let p = ball_point(r, 0.2);
        assert!((boundary_defining_function(&p) - (-p.rho()).exp()).abs() < 1e-14);
    }
}

#[test]
fn invalid_charts_are_rejected() {
    assert!(GeodesicChart::new(vec![1.0, 0.0], vec![0.0, 0.0]).is_err());
    assert!(GeodesicChart::new(vec![1.1, 0.0], vec![0.0, 1.0]).is_err());
    assert!(GeodesicChart::new(vec![1.0, 0.0], vec![0.5, 1.0]).is_err());
    assert!(GeodesicChart::new(vec![1.0, 0.0, 0.0], vec![0.0, 1.0]).is_err());
}
