//! Spectral power amplification (SPA) at the forcing frequency `1/(2m)`.
//!
//! The coefficient is available along two routes that share no code beyond
//! the rates: the definition (direct Fourier summation over the stationary
//! law) and the closed form in the noise variable `x`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::chain::{rates, stationary_distribution, StationaryDistribution};
use crate::error::Result;
use crate::params::{ChainParams, NoiseLevel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpaResult {
    pub eta: f64,
    /// Expected output Fourier component `E xi_m(1)` under the stationary law.
    pub output_component: Complex64,
    /// Power `|c_m(1)|^2` of the input signal at the forcing frequency.
    pub input_power: f64,
}

/// `(V - v)^2 / (4 m^2) * csc^2(pi / 2m)`.
pub fn input_signal_power(params: &ChainParams) -> f64 {
    let m = params.half_period() as f64;
    let gap = params.depth_gap();
    let s = (PI / (2.0 * m)).sin();
    gap * gap / (4.0 * m * m * s * s)
}

/// `sin^2(pi / 2m)`.
pub(crate) fn forcing_sin2(half_period: u64) -> f64 {
    let s = (PI / (2.0 * half_period as f64)).sin();
    s * s
}

/// `(1/2m) * sum_l E[X(l)] * exp(2 pi i a l / 2m)` by direct summation.
pub fn output_component_at(dist: &StationaryDistribution, frequency_index: usize) -> Complex64 {
    let period = dist.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for l in 0..period {
        let angle = 2.0 * PI * ((frequency_index * l) % period) as f64 / period as f64;
        acc += dist.mean_state(l) * Complex64::from_polar(1.0, angle);
    }
    acc / period as f64
}

/// Definition route for `E xi_m(1)`.
pub fn expected_output_component(params: &ChainParams, x: NoiseLevel) -> Result<Complex64> {
    let dist = stationary_distribution(params, x)?;
    Ok(output_component_at(&dist, 1))
}

/// Closed form of `E xi_m(1)`:
/// `(2/m) (phi-psi)/(phi+psi) * (1/(1 - w) - 1/(1 - r w))` with
/// `w = exp(i pi / m)` and `r = 1 - phi - psi`.
pub fn expected_output_component_closed(params: &ChainParams, x: NoiseLevel) -> Complex64 {
    let r = rates(params, x);
    if r.phi == r.psi {
        return Complex64::new(0.0, 0.0);
    }
    let m = params.half_period() as f64;
    let w = Complex64::from_polar(1.0, PI / m);
    let one = Complex64::new(1.0, 0.0);
    let amp = 2.0 / m * (r.phi - r.psi) / (r.phi + r.psi);
    amp * (one / (one - w) - one / (one - r.contraction() * w))
}

/// SPA coefficient from its closed form in `x`:
///
/// ```text
/// eta = 4/(V-v)^2 * (phi - psi)^2 / ((phi + psi)^2 + 4 (1 - phi - psi) sin^2(pi/2m))
/// ```
///
/// Zero at `x = 0` and wherever `phi = psi`.
pub fn spa_closed_form(params: &ChainParams, x: NoiseLevel) -> SpaResult {
    let input_power = input_signal_power(params);
    let r = rates(params, x);
    if x.x() == 0.0 || r.phi == r.psi {
        return SpaResult {
            eta: 0.0,
            output_component: Complex64::new(0.0, 0.0),
            input_power,
        };
    }
    let gap = params.depth_gap();
    let diff = r.phi - r.psi;
    let sum = r.phi + r.psi;
    let denom = sum * sum + 4.0 * r.contraction() * forcing_sin2(params.half_period());
    SpaResult {
        eta: 4.0 / (gap * gap) * diff * diff / denom,
        output_component: expected_output_component_closed(params, x),
        input_power,
    }
}

/// SPA coefficient as `|E xi_m(1)|^2 / |c_m(1)|^2` over the stationary law.
pub fn spa_from_distribution(params: &ChainParams, x: NoiseLevel) -> Result<SpaResult> {
    let output_component = expected_output_component(params, x)?;
    let input_power = input_signal_power(params);
    Ok(SpaResult {
        eta: output_component.norm_sqr() / input_power,
        output_component,
        input_power,
    })
}

/// Shorthand for the closed-form coefficient.
pub fn eta(params: &ChainParams, x: f64) -> f64 {
    spa_closed_form(params, NoiseLevel::from_x(x).expect("x in [0, 1]")).eta
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn params(p: f64, q: f64, v: f64, vv: f64, m: u64) -> ChainParams {
        ChainParams::new(p, q, v, vv, m).unwrap()
    }

    fn level(x: f64) -> NoiseLevel {
        NoiseLevel::from_x(x).unwrap()
    }

    #[test]
    fn input_power_examples() {
        assert!((input_signal_power(&params(0.5, 0.5, 2.0, 4.0, 1)) - 1.0).abs() < 1e-15);
        assert!((input_signal_power(&params(0.5, 0.5, 1.0, 3.0, 2)) - 0.5).abs() < 1e-15);
        let big = input_signal_power(&params(0.5, 0.5, 2.0, 4.0, 1_000_000));
        let limit = 4.0 / (PI * PI);
        assert!(((big - limit) / limit).abs() < 1e-6);
    }

    #[test]
    fn hand_example() {
        let prm = params(1.0, 1.0, 1.0, 2.0, 1);
        let out = expected_output_component(&prm, level(0.5)).unwrap();
        assert!((out - Complex64::new(0.2, 0.0)).norm() < 1e-15, "{out}");
        let closed = spa_closed_form(&prm, level(0.5));
        assert!((closed.eta - 0.16).abs() < 1e-15);
        assert!((closed.output_component - out).norm() < 1e-15);
        let def = spa_from_distribution(&prm, level(0.5)).unwrap();
        assert!((def.eta - 0.16).abs() < 1e-14);
        assert!((def.input_power - 0.25).abs() < 1e-15);
    }

    #[test]
    fn vanishes_where_rates_coincide() {
        let prm = params(0.8, 0.2, 1.0, 3.0, 5);
        assert_eq!(spa_closed_form(&prm, level(0.5)).eta, 0.0);
        let def = spa_from_distribution(&prm, level(0.5)).unwrap();
        assert!(def.output_component.norm() < 1e-15);
        assert!(def.eta < 1e-28);
    }

    #[test]
    fn zero_noise_is_zero() {
        let prm = params(0.3, 0.7, 1.0, 2.0, 4);
        assert_eq!(spa_closed_form(&prm, NoiseLevel::ZERO).eta, 0.0);
        assert!(matches!(
            spa_from_distribution(&prm, NoiseLevel::ZERO),
            Err(Error::DegenerateChain { .. })
        ));
    }

    #[test]
    fn infinite_noise_component_matches_closed_form() {
        for &(p, q, m) in &[(0.9, 0.4, 1), (0.9, 0.4, 6), (0.3, 0.8, 4)] {
            let prm = params(p, q, 1.0, 2.0, m);
            let closed = expected_output_component_closed(&prm, NoiseLevel::INFINITE);
            let def = expected_output_component(&prm, NoiseLevel::INFINITE).unwrap();
            assert!((closed - def).norm() < 1e-12, "{closed} vs {def}");
            if m == 1 {
                assert!(def.im.abs() < 1e-15);
                // One-step phase lag: the sign is that of q - p.
                assert_eq!(def.re.signum(), (q - p).signum());
            }
        }
    }

    #[test]
    fn definition_and_closed_form_agree() {
        for &(p, q, m, x) in &[
            (0.5, 0.5, 3, 0.7),
            (1.0, 0.1, 17, 0.3),
            (0.0, 0.6, 5, 0.99),
            (0.7, 0.0, 2, 0.01),
        ] {
            let prm = params(p, q, 0.5, 1.0, m);
            let a = spa_closed_form(&prm, level(x));
            let b = spa_from_distribution(&prm, level(x)).unwrap();
            assert!(
                (a.eta - b.eta).abs() <= 1e-10 * a.eta.max(1e-300),
                "{a:?} {b:?}"
            );
            assert!((a.eta * a.input_power - a.output_component.norm_sqr()).abs() <= 1e-10 * a.eta);
        }
    }

    #[test]
    fn conjugate_symmetry_of_components() {
        let prm = params(0.4, 0.9, 1.0, 3.0, 7);
        let dist = stationary_distribution(&prm, level(0.6)).unwrap();
        let low = output_component_at(&dist, 1);
        let high = output_component_at(&dist, 13);
        assert!((low - high.conj()).norm() < 1e-15);
    }

    #[test]
    fn zero_locus_for_p_above_q() {
        let prm = params(0.9, 0.3, 1.0, 2.5, 10);
        let star = (0.3f64 / 0.9).powf(1.0 / 1.5);
        assert!(eta(&prm, star) < 1e-14);
        let below = params(0.3, 0.9, 1.0, 2.5, 10);
        assert!((1..1000).all(|i| eta(&below, i as f64 / 1000.0) > 0.0));
    }
}
