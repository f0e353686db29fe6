use std::f64::consts::PI;

use hypershift::specfun::*;
use num_complex::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn close(a: Complex64, b: Complex64, rel: f64) -> bool {
    (a - b).norm() <= rel * b.norm()
}

// reference values computed with mpmath at 30 digits
#[test]
fn gamma_against_reference_values() {
    let cases = [
        (c(0.5, 3.0), c(0.0214456705524306460, 0.00686536483726167791)),
        (c(2.5, -1.5), c(0.309936225840741353, -0.734084273621481339)),
        (c(-2.3, 0.7), c(-0.0622750720136882404, -0.274869820381396888)),
        (c(0.1, 0.2), c(1.53910034338679470, -3.83849190183791103)),
    ];
    for (z, want) in cases {
        let got = complex_gamma(z).unwrap();
        assert!(close(got, want, 1e-13), "Gamma({z}) = {got}, want {want}");
    }
}

#[test]
fn log_gamma_branch_is_continuous_from_positive_axis() {
    let cases = [
        (c(10.0, 100.0), c(-112.397365549672379, 374.989422962229500)),
        (c(-7.5, 0.25), c(-8.68175419980365127, -24.6126780035038904)),
        (c(0.5, 200.0), c(-313.240326825774651, 859.663681643244491)),
    ];
    for (z, want) in cases {
        let got = complex_log_gamma(z).unwrap();
        assert!((got - want).norm() < 1e-12 * want.norm().max(1.0), "logGamma({z}) = {got}, want {want}");
    }
}

#[test]
fn digamma_reference() {
    let got = digamma(c(1.0, 2.0)).unwrap();
    assert!((got - c(0.714591515373977527, 1.32080728264223023)).norm() < 1e-13);
}

#[test]
fn modulus_of_gamma_on_imaginary_axis() {
    // |Γ(iλ)|² = π/(λ sinh πλ)
    for lambda in [0.3, 1.0, 5.0, 20.0, 60.0] {
        let g = complex_gamma(c(0.0, lambda)).unwrap();
        let want = PI / (lambda * (PI * lambda).sinh());
        assert!((g.norm_sqr() - want).abs() <= 1e-12 * want, "lambda = {lambda}");
    }
}

#[test]
fn recurrence_and_reflection() {
    for z in [c(0.3, 0.4), c(-1.7, 2.2), c(3.0, -7.0), c(12.5, 0.1)] {
        let lhs = complex_gamma(z + 1.0).unwrap();
        let rhs = z * complex_gamma(z).unwrap();
        assert!(close(lhs, rhs, 1e-13));
        // Γ(z)Γ(1−z) = π / sin(πz)
        let prod = complex_gamma(z).unwrap() * complex_gamma(1.0 - z).unwrap();
        assert!(close(prod, PI / (z * PI).sin(), 1e-12));
    }
}

#[test]
fn stirling_phase_of_gamma_ratio() {
    // Γ(iλ)/Γ(−iλ) = −i e^{2iλ(log λ − 1)} (1 + O(1/λ))
    for lambda in [100.0f64, 200.0, 1000.0] {
        let ratio = gamma_phase_ratio(lambda).conj();
        let model = Complex64::from_polar(1.0, 2.0 * lambda * (lambda.ln() - 1.0) - 0.5 * PI);
        let off = (ratio / model).arg();
        assert!(off.abs() < 1.0 / lambda, "lambda = {lambda}: offset {off}");
        assert!((ratio.norm() - 1.0).abs() < 1e-14);
    }
}

#[test]
fn c_of_s_growth() {
    // |c(n/2 + iλ)| ~ λ^{n/2−1} / (2π^{n/2})
    for n in [1u32, 2, 3] {
        let lam: f64 = 1e4;
        let s = c(n as f64 / 2.0, lam);
        let v = c_of_s(s, n).unwrap().norm();
        let model = lam.powf(n as f64 / 2.0 - 1.0) / (2.0 * PI.powf(n as f64 / 2.0));
        assert!((v / model - 1.0).abs() < 1e-6, "n = {n}: {}", v / model);
    }
    // n = 2: Γ(s)/Γ(s) = 1 exactly, c = 1/(2π)
    let v = c_of_s(c(1.0, 7.0), 2).unwrap();
    assert!((v - c(1.0 / (2.0 * PI), 0.0)).norm() < 1e-15);
}

#[test]
fn resolvent_series_matches_closed_form_in_three_dimensions() {
    // H³: R_0(s) = e^{−(s−1)d} / (4π sinh d)
    for (s, d) in [(c(1.0, 3.0), 0.8), (c(1.5, 0.5), 2.0), (c(1.0, 10.0), 0.3)] {
        let tau = f64::cosh(d);
        let series = Complex64::new(tau, 0.0).powc(-s) * resolvent_series_g(s, tau, 2, 1e-15).unwrap();
        let exact = (-(s - 1.0) * d).exp() / (4.0 * PI * d.sinh());
        assert!(close(series, exact, 1e-11), "s={s} d={d}: {series} vs {exact}");
    }
    let want = c(-0.0660731135625289138, -0.0605239161864904931);
    let got = Complex64::new(0.8f64.cosh(), 0.0).powc(-c(1.0, 3.0)) * resolvent_series_g(c(1.0, 3.0), 0.8f64.cosh(), 2, 1e-15).unwrap();
    assert!(close(got, want, 1e-12));
}

#[test]
fn free_eigenvalues_have_unit_modulus() {
    for n in 1..=3 {
        for k in [0u64, 1, 7, 300] {
            for lambda in [0.5, 13.0, 250.0] {
                let mu = free_eigenvalue_mu_k(k, lambda, n);
                assert!((mu.value.norm() - 1.0).abs() < 1e-13);
                assert_eq!(mu.multiplicity, harmonic_dimension(k, n));
            }
        }
    }
}

#[test]
fn harmonic_dimension_sums_to_polynomial_count() {
    // Σ_{j ≤ k} d_j on S^n = dim of degree-≤k polynomials restricted to S^n
    //                      = binom(n+k, n) + binom(n+k−1, n)
    for n in 1..=3u32 {
        for k in 1..30u64 {
            let s: u64 = (0..=k).map(|j| harmonic_dimension(j, n)).sum();
            assert_eq!(s, binomial(n as u64 + k, n as u64) + binomial(n as u64 + k - 1, n as u64));
        }
    }
}

#[test]
fn sphere_volumes_by_recursion() {
    // vol(S^{d}) = 2π/(d−1) · vol(S^{d−2})
    for d in 2..8u32 {
        let want = 2.0 * PI / (d as f64 - 1.0) * sphere_volume(d - 2);
        assert!((sphere_volume(d) - want).abs() < 1e-13 * want);
        assert!((ball_volume(d + 1) - sphere_volume(d) / (d as f64 + 1.0)).abs() < 1e-13);
    }
}
