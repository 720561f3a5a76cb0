//! Optimal noise tuning: shape of `eta_m(x)` on `[0, 1]`, its resonance
//! point, its zero and the large-`m` asymptotics.
//!
//! The `(p, q)` square splits into three regions (for `q > 0`):
//!
//! * `U0`: `eta` is strictly increasing, no resonance;
//! * `U1`: one interior maximum, no zero in `(0, 1]`;
//! * `U2` (`p >= q`): one interior maximum and one zero in `(0, 1]`.
//!
//! `U0` and `U1` are separated by the curve `p = p_minus(q)` on which
//! `d eta / dx` vanishes at `x = 1`.

use std::f64::consts::PI;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{check_depths, check_prefactors, ChainParams, NoiseLevel};
use crate::spectral::{eta, forcing_sin2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Region {
    U0,
    U1,
    U2,
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Region::U0 => "U0",
            Region::U1 => "U1",
            Region::U2 => "U2",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionClass {
    pub region: Region,
    /// `p_minus(q)` when the boundary formula has a real value.
    pub boundary_value: Option<f64>,
}

/// Value of the boundary curve together with the discriminant it came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryPoint {
    pub p_minus: Option<f64>,
    pub discriminant: f64,
}

/// `csc^2(pi / 2m)`.
pub fn am(m: u64) -> f64 {
    1.0 / forcing_sin2(m)
}

/// Boundary curve `p_minus(q; beta, m)` between `U0` and `U1`.
///
/// It is the smaller root of `a p^2 - b p + beta q (2 - q) = 0` with
/// `a = 1 - a_m q (1 - beta)` and `b = 2 - 3 (1 - beta) q + a_m (1 - beta) q^2`,
/// evaluated as `2c / (b + sqrt(disc))` so that `a = 0` needs no special case.
/// Discriminants within rounding of zero are clamped to zero; a genuinely
/// negative one yields `p_minus = None`.
pub fn p_minus(q: f64, beta: f64, m: u64) -> Result<BoundaryPoint> {
    if !(0.0..=1.0).contains(&q) || !(beta > 0.0 && beta < 1.0) || m == 0 {
        return Err(Error::InvalidParameter(format!(
            "p_minus needs q in [0,1], beta in (0,1), m >= 1 (q = {q}, beta = {beta}, m = {m})"
        )));
    }
    let k = 1.0 - beta;
    let a_m = am(m);
    let a = 1.0 - a_m * q * k;
    let b = 2.0 - 3.0 * k * q + a_m * k * q * q;
    let c = beta * q * (2.0 - q);
    let mut discriminant = b * b - 4.0 * a * c;
    if q == 0.0 {
        return Ok(BoundaryPoint {
            p_minus: Some(0.0),
            discriminant,
        });
    }
    if discriminant < 0.0 {
        if discriminant >= -1e-12 * b * b {
            discriminant = 0.0;
        } else {
            return Ok(BoundaryPoint {
                p_minus: None,
                discriminant,
            });
        }
    }
    Ok(BoundaryPoint {
        p_minus: Some(2.0 * c / (b + discriminant.sqrt())),
        discriminant,
    })
}

/// Region of `(p, q)` from the closed-form boundary.
///
/// `q = 0` (no escape from the shallow state) makes `eta` strictly increasing
/// and is reported as `U0`. `p = q` belongs to `U2`, with its zero at `x = 1`.
pub fn classify(params: &ChainParams) -> RegionClass {
    let (p, q) = (params.p(), params.q());
    let boundary = p_minus(q, params.beta(), params.half_period())
        .ok()
        .and_then(|b| b.p_minus);
    let region = if q == 0.0 {
        Region::U0
    } else if p >= q {
        Region::U2
    } else {
        match boundary {
            Some(pm) if p > pm => Region::U1,
            Some(_) => Region::U0,
            // The boundary is where d eta/dx vanishes at x = 1.
            None => {
                if spa_derivative(params, 1.0 - 1e-9) < 0.0 {
                    Region::U1
                } else {
                    Region::U0
                }
            }
        }
    };
    RegionClass {
        region,
        boundary_value: boundary,
    }
}

/// Empirical region from samples of `eta` on a uniform grid of `grid_size`
/// intervals over `[0, 1]`.
///
/// Each sign change of successive differences is refined by bisection on the
/// derivative down to width `1e-9` and only counted if it persists. Interior
/// minima with `eta` at rounding level are zeros; so is `eta(1) = 0`.
pub fn classify_numeric(params: &ChainParams, grid_size: usize) -> Result<RegionClass> {
    if grid_size < 1000 {
        return Err(Error::InvalidParameter(format!(
            "numeric classification needs at least 1000 grid intervals, got {grid_size}"
        )));
    }
    let xs: Vec<f64> = (0..=grid_size)
        .map(|i| i as f64 / grid_size as f64)
        .collect();
    let values: Vec<f64> = xs.iter().map(|&x| eta(params, x)).collect();
    let peak = values.iter().copied().fold(0.0, f64::max);
    let zero_level = 1e-12 * peak;

    // Intervals with a nonzero difference, with the sign of that difference.
    let slopes: Vec<(usize, f64)> = values
        .windows(2)
        .enumerate()
        .filter_map(|(i, w)| {
            let d = w[1] - w[0];
            (d != 0.0).then(|| (i, d.signum()))
        })
        .collect();

    let mut maxima = 0;
    let mut zero_minima = 0;
    let mut other_minima = 0;
    for pair in slopes.windows(2) {
        let ((left, s_left), (right, s_right)) = (pair[0], pair[1]);
        if s_left == s_right {
            continue;
        }
        let (lo, hi) = (xs[left], xs[right + 1]);
        let Some(x_ext) = refine_sign_change(params, lo, hi, s_left, 1e-9) else {
            continue;
        };
        if s_left > 0.0 {
            maxima += 1;
        } else if eta(params, x_ext) <= zero_level {
            zero_minima += 1;
        } else {
            other_minima += 1;
        }
    }
    let zero_at_one = values[grid_size] <= zero_level;

    let region = match (maxima, zero_minima + other_minima, zero_at_one) {
        (0, 0, false) => Region::U0,
        (1, 0, false) => Region::U1,
        (1, 1, false) if other_minima == 0 => Region::U2,
        (1, 0, true) => Region::U2,
        _ => {
            return Err(Error::Ambiguous {
                maxima,
                minima: zero_minima + other_minima,
            })
        }
    };
    Ok(RegionClass {
        region,
        boundary_value: None,
    })
}

/// Bisects on the sign of the derivative inside `[lo, hi]`, expecting it to
/// go from `entry_sign` to its opposite. `None` if that change is not there.
fn refine_sign_change(
    params: &ChainParams,
    mut lo: f64,
    mut hi: f64,
    entry_sign: f64,
    width: f64,
) -> Option<f64> {
    let sign_at = |x: f64| spa_derivative(params, x).signum() * entry_sign;
    let (lo_probe, hi_probe) = (lo.max(f64::MIN_POSITIVE), hi.min(1.0 - 1e-15));
    if sign_at(lo_probe) <= 0.0 || sign_at(hi_probe) >= 0.0 {
        return None;
    }
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        let s = sign_at(mid);
        if s > 0.0 {
            lo = mid;
        } else if s < 0.0 {
            hi = mid;
        } else {
            return Some(mid);
        }
    }
    Some(0.5 * (lo + hi))
}

/// `d eta / dx` of the closed form, for `x` in `(0, 1)`.
pub fn spa_derivative(params: &ChainParams, x: f64) -> f64 {
    let (p, q, v, vv) = (params.p(), params.q(), params.shallow(), params.deep());
    let phi = p * x.powf(vv);
    let psi = q * x.powf(v);
    let dphi = p * vv * x.powf(vv - 1.0);
    let dpsi = q * v * x.powf(v - 1.0);
    let s2 = forcing_sin2(params.half_period());
    let diff = phi - psi;
    let sum = phi + psi;
    let denom = sum * sum + 4.0 * (1.0 - sum) * s2;
    let d_denom = (2.0 * sum - 4.0 * s2) * (dphi + dpsi);
    let gap = params.depth_gap();
    4.0 / (gap * gap) * diff * (2.0 * (dphi - dpsi) * denom - diff * d_denom) / (denom * denom)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Resonance {
    pub x_hat: f64,
    pub eta_max: f64,
}

/// Number of points in the derivative scan used to bracket extrema.
pub const SCAN_POINTS: usize = 20_000;

/// Scan grid on `(0, 1)`, ascending in `x`, log-spaced in `-ln x` from 700
/// down to `1e-10` so that both ends of the interval are resolved.
fn scan_grid() -> impl Iterator<Item = f64> {
    let (u_hi, u_lo) = (700.0f64.ln(), 1e-10f64.ln());
    (0..SCAN_POINTS).map(move |i| {
        let t = i as f64 / (SCAN_POINTS - 1) as f64;
        (-(u_hi + t * (u_lo - u_hi)).exp()).exp()
    })
}

/// First sign change of the derivative from `from` to `-from` on the scan
/// grid at or above `start`, as a bracketing interval.
fn bracket_sign_change(params: &ChainParams, start: f64, from: f64) -> Option<(f64, f64)> {
    let mut last: Option<(f64, f64)> = None;
    for x in scan_grid().filter(|&x| x >= start) {
        let s = spa_derivative(params, x).signum();
        if s == 0.0 || s.is_nan() {
            continue;
        }
        if let Some((x_prev, s_prev)) = last {
            if s_prev == from && s == -from {
                return Some((x_prev, x));
            }
        }
        last = Some((x, s));
    }
    None
}

fn bisect_derivative(params: &ChainParams, mut lo: f64, mut hi: f64, from: f64, tol: f64) -> f64 {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let s = spa_derivative(params, mid).signum();
        if s == from {
            lo = mid;
        } else if s == -from {
            hi = mid;
        } else {
            return mid;
        }
    }
    0.5 * (lo + hi)
}

/// Interior maximum of `eta` for `U1`/`U2`, located by bisection on the
/// derivative to an interval below `1e-12`. `None` in `U0`.
pub fn find_resonance(params: &ChainParams) -> Result<Option<Resonance>> {
    if classify(params).region == Region::U0 {
        return Ok(None);
    }
    let (lo, hi) = bracket_sign_change(params, 0.0, 1.0).ok_or(Error::BracketFailure {
        grid_size: SCAN_POINTS,
    })?;
    let x_hat = bisect_derivative(params, lo, hi, 1.0, 1e-12);
    Ok(Some(Resonance {
        x_hat,
        eta_max: eta(params, x_hat),
    }))
}

/// Zero of `eta` in `(0, 1]` from `phi = psi`: `(q/p)^(1/(V-v))` for `p > q`,
/// `1` for `p = q`, none for `p < q`.
pub fn find_zero(params: &ChainParams) -> Option<f64> {
    let (p, q) = (params.p(), params.q());
    if p > q {
        Some(
            (q / p)
                .powf(1.0 / params.depth_gap())
                .clamp(f64::MIN_POSITIVE, 1.0),
        )
    } else if p == q {
        Some(1.0)
    } else {
        None
    }
}

/// Numeric bracket of the zero of `eta`: the minimum past the resonance,
/// found by bisection on the derivative down to width `1e-12`.
pub fn bracket_zero_numeric(params: &ChainParams) -> Result<Option<(f64, f64)>> {
    if classify(params).region != Region::U2 {
        return Ok(None);
    }
    let Some(res) = find_resonance(params)? else {
        return Ok(None);
    };
    match bracket_sign_change(params, res.x_hat, -1.0) {
        Some((mut lo, mut hi)) => {
            while hi - lo > 1e-12 {
                let mid = 0.5 * (lo + hi);
                let s = spa_derivative(params, mid).signum();
                if s < 0.0 {
                    lo = mid;
                } else if s > 0.0 {
                    hi = mid;
                } else {
                    return Ok(Some((mid, mid)));
                }
            }
            Ok(Some((lo, hi)))
        }
        None if eta(params, 1.0) == 0.0 => Ok(Some((1.0, 1.0))),
        None => Err(Error::BracketFailure {
            grid_size: SCAN_POINTS,
        }),
    }
}

/// Large-`m` location of the resonance,
/// `x_m = (pi^2 / (2 m^2 p q) * v / (V - v))^(1 / (V + v))`.
pub fn asymptotic_resonance(params: &ChainParams) -> Result<f64> {
    let pq = params.p() * params.q();
    if pq == 0.0 {
        return Err(Error::ZeroPrefactor);
    }
    let m = params.half_period() as f64;
    let (v, vv) = (params.shallow(), params.deep());
    Ok((PI * PI / (2.0 * m * m * pq) * v / (vv - v)).powf(1.0 / (vv + v)))
}

/// Half-period that makes noise level `eps` resonant,
/// `pi / sqrt(2 p q) * sqrt(v / (V - v)) * exp((V + v) / (2 eps))`.
///
/// Real-valued; callers round to an integer half-period.
pub fn optimal_half_period(eps: f64, p: f64, q: f64, shallow: f64, deep: f64) -> Result<f64> {
    check_prefactors(p, q)?;
    check_depths(shallow, deep)?;
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "noise intensity must be > 0, got {eps}"
        )));
    }
    if p * q == 0.0 {
        return Err(Error::ZeroPrefactor);
    }
    Ok(PI / (2.0 * p * q).sqrt()
        * (shallow / (deep - shallow)).sqrt()
        * ((deep + shallow) / (2.0 * eps)).exp())
}

/// Limit `4 / (V - v)^2` of the maximal amplification as `eps -> 0` along
/// the optimal tuning curve.
pub fn max_amplification(shallow: f64, deep: f64) -> f64 {
    let gap = deep - shallow;
    4.0 / (gap * gap)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TuningReport {
    pub region: RegionClass,
    pub x_hat: Option<f64>,
    pub eps_hat: Option<f64>,
    pub eta_max: Option<f64>,
    pub x_star: Option<f64>,
    /// Asymptotic resonance location; absent when `p q = 0`.
    pub x_asymptotic: Option<f64>,
    /// Optimal half-period predicted for `eps_hat`.
    pub m_of_eps: Option<f64>,
    pub eta_limit: f64,
}

pub fn tuning_report(params: &ChainParams) -> Result<TuningReport> {
    let region = classify(params);
    let resonance = find_resonance(params)?;
    let eps_hat = resonance
        .map(|r| NoiseLevel::from_x(r.x_hat).map(|l| l.eps()))
        .transpose()?;
    let m_of_eps = match eps_hat {
        Some(eps) if params.p() * params.q() > 0.0 => Some(optimal_half_period(
            eps,
            params.p(),
            params.q(),
            params.shallow(),
            params.deep(),
        )?),
        _ => None,
    };
    Ok(TuningReport {
        region,
        x_hat: resonance.map(|r| r.x_hat),
        eps_hat,
        eta_max: resonance.map(|r| r.eta_max),
        x_star: find_zero(params),
        x_asymptotic: asymptotic_resonance(params).ok(),
        m_of_eps,
        eta_limit: max_amplification(params.shallow(), params.deep()),
    })
}
