use std::f64::consts::PI;

use hypershift::inversion::*;
use hypershift::potentials::RadialPotential;
use hypershift::xray::{xray_radial_profile, ClassicalProfile};
use hypershift::Error;

fn rho_grid(max: f64, h: f64) -> Vec<f64> {
    let m = (max / h).round() as usize;
    (0..=m).map(|i| i as f64 * h).collect()
}

fn max_err(a: &RadialPotential, b: &RadialPotential, to: f64) -> f64 {
    (0..=300).map(|i| i as f64 * to / 300.0).map(|r| (a.eval(r) - b.eval(r)).abs()).fold(0.0, f64::max)
}

#[test]
fn zero_profile_gives_zero_potential() {
    let grid = default_r_grid(5.0, 0.05);
    let p = ClassicalProfile::from_fn(grid, |_| 0.0, 1).unwrap();
    let rec = potential_from_profile(&p, &rho_grid(5.0, 0.1), 0.0).unwrap();
    assert!(rec.coefficients.iter().all(|c| *c == 0.0));
    assert_eq!(rec.potential.eval(0.3), 0.0);
}

#[test]
fn roundtrip_narrow_gaussian_in_two_dimensions() {
    let v = RadialPotential::gaussian_rho(2.0, 0.7).unwrap();
    let prof = xray_radial_profile(&v, &default_r_grid(5.0, 0.025), 2, 1e-12).unwrap();
    let rec = potential_from_profile(&prof, &rho_grid(5.0, 0.1), 1e-10).unwrap();
    assert!(max_err(&rec.potential, &v, 3.0) < 1e-3);
    // forward model of the reconstruction, by independent quadrature
    let again = xray_radial_profile(&rec.potential, &prof.r_grid, 2, 1e-12).unwrap();
    let drift = again.g_values.iter().zip(&prof.g_values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(drift <= 10.0 * rec.max_residual.max(1e-12), "{drift} vs {}", rec.max_residual);
}

#[test]
fn reconstruction_is_linear_in_data() {
    let v1 = RadialPotential::gaussian_rho(1.0, 1.0).unwrap();
    let v2 = RadialPotential::gaussian_rho(0.5, 0.6).unwrap();
    let grid = default_r_grid(6.0, 0.025);
    let rho = rho_grid(6.0, 0.1);
    let p1 = xray_radial_profile(&v1, &grid, 1, 1e-12).unwrap();
    let p2 = xray_radial_profile(&v2, &grid, 1, 1e-12).unwrap();
    let mix: Vec<f64> = p1.g_values.iter().zip(&p2.g_values).map(|(a, b)| 2.0 * a - 0.5 * b).collect();
    let pm = ClassicalProfile::new(grid.clone(), mix, 1, f64::INFINITY, None).unwrap();
    let r1 = potential_from_profile(&p1, &rho, 1e-10).unwrap();
    let r2 = potential_from_profile(&p2, &rho, 1e-10).unwrap();
    let rm = potential_from_profile(&pm, &rho, 1e-10).unwrap();
    for i in 0..rm.coefficients.len() {
        let want = 2.0 * r1.coefficients[i] - 0.5 * r2.coefficients[i];
        assert!((rm.coefficients[i] - want).abs() < 1e-9 * (1.0 + want.abs()));
    }
}

#[test]
fn monotone_input_reconstructs_monotone_potential() {
    let v = RadialPotential::gaussian_rho(1.0, 1.0).unwrap();
    let prof = xray_radial_profile(&v, &default_r_grid(6.0, 0.025), 1, 1e-12).unwrap();
    let rec = potential_from_profile(&prof, &rho_grid(6.0, 0.1), 1e-10).unwrap();
    let mut prev = rec.potential.eval(0.0);
    for i in 1..=500 {
        let r = i as f64 * 0.01;
        let cur = rec.potential.eval(r);
        if cur.abs() > 1e-6 {
            assert!(cur >= prev - 1e-9, "V decreases at rho = {r}");
        }
        prev = cur;
    }
}

#[test]
fn too_few_samples_and_ill_conditioning() {
    let v = RadialPotential::gaussian_rho(1.0, 1.0).unwrap();
    let prof = xray_radial_profile(&v, &default_r_grid(1.0, 0.1), 1, 1e-12).unwrap();
    let e = potential_from_profile(&prof, &rho_grid(6.0, 0.1), 0.0).unwrap_err();
    assert!(matches!(e, Error::InsufficientData(_)));
    // data only from geodesics with ρ_min ≤ 0.5 cannot pin down V far out
    let r: Vec<f64> = (0..400).map(|i| (i as f64 * 0.5 / 400.0).sinh()).collect();
    let prof = xray_radial_profile(&v, &r, 1, 1e-12).unwrap();
    let e = potential_from_profile(&prof, &rho_grid(6.0, 0.1), 0.0).unwrap_err();
    assert!(matches!(e, Error::IllConditioned(_)), "{e}");
    assert!(potential_from_profile(&prof, &rho_grid(6.0, 0.1), 1e-8).is_ok());
}

#[test]
fn l_curve_is_reported() {
    let v = RadialPotential::gaussian_rho(1.0, 1.0).unwrap();
    let prof = xray_radial_profile(&v, &default_r_grid(6.0, 0.05), 1, 1e-12).unwrap();
    let rec = potential_from_profile(&prof, &rho_grid(6.0, 0.1), 1e-10).unwrap();
    assert_eq!(rec.l_curve.len(), L_CURVE_REGS.len());
    // residual grows with regularization
    for w in rec.l_curve.windows(2) {
        assert!(w[1].residual_norm >= w[0].residual_norm * (1.0 - 1e-9));
    }
    assert!(l_curve_corner(&rec.l_curve).is_some());
}

#[test]
fn measure_inversion_is_grid_independent() {
    // G(r) = 1/(1+r²) in n = 2: ν(α,∞) = vol(S²)·π·(1/α − 1)
    let nu = |a: f64, _b: f64| if a < 1.0 { 4.0 * PI * PI * (1.0 / a - 1.0) } else { 0.0 };
    let coarse: Vec<f64> = (1..=40).map(|i| i as f64 / 40.0).collect();
    let fine: Vec<f64> = (1..=160).map(|i| i as f64 / 160.0).collect();
    let a = profile_from_measure(nu, 2, &coarse).unwrap();
    let b = profile_from_measure(nu, 2, &fine).unwrap();
    for (r, g) in a.r_grid.iter().zip(&a.g_values) {
        assert!((g - 1.0 / (1.0 + r * r)).abs() < 1e-12);
        let j = b.g_values.iter().position(|x| (x - g).abs() < 1e-15).unwrap();
        assert!((b.r_grid[j] - r).abs() < 1e-8);
    }
}

#[test]
fn equal_distributions_give_equal_profiles() {
    // the same ν written two ways
    let nu1 = |a: f64, _b: f64| if a < 2.0 { 4.0 * PI * (2.0 - a) } else { 0.0 };
    let nu2 = |a: f64, b: f64| (4.0 * PI * (2.0 - a)).max(0.0) - if b.is_finite() { 0.0 } else { 0.0 };
    let grid: Vec<f64> = (1..100).map(|i| i as f64 * 0.025).collect();
    let a = profile_from_measure(nu1, 1, &grid).unwrap();
    let b = profile_from_measure(nu2, 1, &grid).unwrap();
    assert_eq!(a, b);
    assert!((a.g0 - 2.0).abs() < 1e-12);
}
