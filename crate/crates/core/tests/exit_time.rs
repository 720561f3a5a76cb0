use srchain::diffusion::{build_potential, mean_exit_time, PotentialSpec, DEFAULT_MAX_EXIT_STEPS};

/// Mean first-passage time from `+1` to `0` for `dX = -U'(X) dt + sqrt(eps) dW`:
/// `(2/eps) int_0^1 exp(2U(y)/eps) int_y^L exp(-2U(z)/eps) dz dy`, trapezoid rule.
fn exit_time_quadrature(spec: &PotentialSpec, eps: f64) -> f64 {
    let (upper, n) = (4.0, 400_000);
    let h = upper / n as f64;
    let weight = |z: f64| (-2.0 * spec.static_value(z) / eps).exp();
    let mut tail = vec![0.0; n + 1];
    for i in (0..n).rev() {
        let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
        tail[i] = tail[i + 1] + 0.5 * h * (weight(a) + weight(b));
    }
    let inner_end = n / 4;
    let mut outer = 0.0;
    for i in 0..inner_end {
        let f = |k: usize| tail[k] / weight(k as f64 * h);
        outer += 0.5 * h * (f(i) + f(i + 1));
    }
    2.0 / eps * outer
}

#[test]
fn quadrature_matches_independent_values() {
    let spec = build_potential(1.0, 2.0).unwrap();
    for (eps, want) in [
        (0.5, 9.213_079_226),
        (0.4, 15.410_651_236),
        (0.33, 26.170_323_883),
    ] {
        let got = exit_time_quadrature(&spec, eps);
        assert!((got / want - 1.0).abs() < 1e-6, "{eps}: {got}");
    }
}

#[test]
fn monte_carlo_tracks_quadrature() {
    let spec = build_potential(1.0, 2.0).unwrap();
    for eps in [0.5, 0.4, 0.33] {
        let est = mean_exit_time(&spec, eps, 1e-3, 21, 4000, DEFAULT_MAX_EXIT_STEPS).unwrap();
        let exact = exit_time_quadrature(&spec, eps);
        // Discrete monitoring of the crossing adds an upward bias of a few percent.
        let allowance = 3.0 * est.std_error.unwrap() + 0.04 * exact;
        assert!(
            (est.mean - exact).abs() <= allowance,
            "{eps}: {} vs {exact}",
            est.mean
        );
        assert_eq!(est.timeouts, 0);
    }
}

#[test]
fn scaled_log_exit_time_converges_to_shallow_depth() {
    let spec = build_potential(1.0, 2.0).unwrap();
    let levels = [0.5, 0.4, 0.33, 0.25, 0.2, 0.15, 0.1];
    let scaled: Vec<f64> = levels
        .iter()
        .map(|&e| e * exit_time_quadrature(&spec, e).ln())
        .collect();
    assert!(scaled.iter().all(|&s| s > 1.0));
    assert!(scaled.windows(2).all(|w| w[1] < w[0]), "{scaled:?}");
    assert!(scaled.last().unwrap() - 1.0 < 0.05, "{scaled:?}");
}
