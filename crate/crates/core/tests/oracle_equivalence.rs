use chi2fc::oracle::{max_step, rk4_fundamental_matrix};
use chi2fc::propagator::{compute_theta, Regime, REGIME_REL_TOL};
use chi2fc::{propagator_coeffs, rk4_propagator};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// (omega0, phi_s, kappa_p, kappa_i, tau) with the regime chosen round-robin.
fn tuples(n: usize, seed: u64) -> Vec<(Regime, [f64; 5])> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..n)
        .map(|k| {
            let omega0: f64 = rng.gen_range(0.2..2.0);
            let phi: f64 = rng.gen_range(-3.0..3.0);
            let kappa_s: f64 = rng.gen_range(-0.3..1.0);
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let (regime, kappa_d) = match k % 3 {
                0 => (Regime::Trig, sign * rng.gen_range(0.0..0.9) * omega0),
                1 => (Regime::Degenerate, sign * omega0),
                _ => (Regime::Hyper, sign * rng.gen_range(1.1..2.0) * omega0),
            };
            let tau: f64 = rng.gen_range(0.0..3.0);
            (
                regime,
                [omega0, phi, kappa_s + kappa_d, kappa_s - kappa_d, tau],
            )
        })
        .collect()
}

#[test]
fn closed_form_matches_rk4_in_all_regimes() {
    let mut worst: f64 = 0.0;
    let mut seen = [0usize; 3];
    for (regime, [w, phi, kp, ki, tau]) in tuples(200, 7) {
        let closed = propagator_coeffs(w, phi, kp, ki, tau).unwrap();
        assert_eq!(closed.regime, regime, "regime of {:?}", (w, kp, ki));
        seen[regime as usize] += 1;
        let h = 0.1 * max_step(w, kp, ki, tau.max(1e-3));
        let (f1p, f1i, f2) = rk4_propagator(w, phi, kp, ki, tau, h).unwrap();
        for (a, b) in [(f1p, closed.f1p), (f1i, closed.f1i), (f2, closed.f2)] {
            let d = (a - b).norm();
            worst = worst.max(d);
            assert!(d <= 1e-8, "deviation {d:e} at {:?}", (w, phi, kp, ki, tau));
        }
    }
    assert!(seen.iter().all(|&c| c >= 66));
    println!("max |closed - rk4| = {worst:e}");
}

#[test]
fn rk4_is_fourth_order() {
    let (w, phi, kp, ki, tau) = (1.0, 0.4, 0.3, -0.1, 2.0);
    let closed = propagator_coeffs(w, phi, kp, ki, tau).unwrap();
    let err = |h: f64| {
        let (f1p, f1i, f2) = rk4_propagator(w, phi, kp, ki, tau, h).unwrap();
        (f1p - closed.f1p)
            .norm()
            .max((f1i - closed.f1i).norm())
            .max((f2 - closed.f2).norm())
    };
    let e1 = err(0.01);
    let e2 = err(0.005);
    let ratio = e1 / e2;
    assert!((14.0..18.5).contains(&ratio), "error ratio {ratio}");
}

#[test]
fn closed_form_continuous_across_degenerate_point() {
    for (w, ks, t) in [(1.0, 0.1, 2.0), (0.3, -0.2, 5.0), (2.0, 0.7, 0.8)] {
        let eps = REGIME_REL_TOL * w;
        let degenerate = {
            let kd = w;
            propagator_coeffs(w, 0.2, ks + kd, ks - kd, t).unwrap()
        };
        assert_eq!(degenerate.regime, Regime::Degenerate);
        for sign in [1.0, -1.0] {
            // theta^2 = sign * 2 eps^2
            let kd = (w * w - sign * 2.0 * eps * eps).sqrt();
            let th = compute_theta(w, kd);
            assert_eq!(
                th.regime,
                if sign > 0.0 {
                    Regime::Trig
                } else {
                    Regime::Hyper
                }
            );
            let c = propagator_coeffs(w, 0.2, ks + kd, ks - kd, t).unwrap();
            let rel = |a: Complex64, b: Complex64| (a - b).norm() / b.norm().max(1e-300);
            assert!(rel(c.f1p, degenerate.f1p) <= 1e-6 || (c.f1p - degenerate.f1p).norm() < 1e-9);
            assert!(rel(c.f1i, degenerate.f1i) <= 1e-6);
            assert!(rel(c.f2, degenerate.f2) <= 1e-6);
        }
    }
}

#[test]
fn richardson_estimate_tracks_true_error() {
    let sol = rk4_fundamental_matrix(1.0, 0.0, 0.05, 0.05, 1.5, 0.01).unwrap();
    let closed = propagator_coeffs(1.0, 0.0, 0.05, 0.05, 1.5).unwrap();
    let err = (sol.coefficients().2 - closed.f2).norm();
    assert!(sol.error_estimate > 0.0);
    assert!(err < 10.0 * sol.error_estimate && sol.error_estimate < 10.0 * err.max(1e-16));
}
