//! Overdamped diffusion in a double-well potential whose wells swap depth
//! every half period, integrated with Euler–Maruyama.
//!
//! The static profile is `U(x) = (V/2)(x^4 - 2x^2)` for `x <= 0` and
//! `(v/2)(x^4 - 2x^2)` for `x > 0`: minima at `-1` (depth `V/2`) and `+1`
//! (depth `v/2`), saddle at `0`, gradient continuous across the splice.
//! On `[k, k + 1/2)` of rescaled time the potential is `U(x)`, on
//! `[k + 1/2, k + 1)` it is `U(-x)`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::montecarlo::replica_rng;
use crate::params::check_depths;

/// Paths are declared blown up once `|X|` exceeds this.
pub const BLOW_UP_LIMIT: f64 = 10.0;
/// Horizon used when `eps = 0`, where `exp(lambda / eps)` is infinite.
pub const ZERO_NOISE_HORIZON: f64 = 10.0;
/// Upper bound on integrator steps per path for a deviation experiment.
pub const MAX_STEPS: u64 = 1_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PotentialSpec {
    shallow: f64,
    deep: f64,
}

impl PotentialSpec {
    pub fn shallow(&self) -> f64 {
        self.shallow
    }

    pub fn deep(&self) -> f64 {
        self.deep
    }

    fn scale(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.5 * self.deep
        } else {
            0.5 * self.shallow
        }
    }

    /// Static profile `U(x)`.
    pub fn static_value(&self, x: f64) -> f64 {
        let x2 = x * x;
        self.scale(x) * (x2 * x2 - 2.0 * x2)
    }

    /// `U'(x)` of the static profile.
    pub fn static_gradient(&self, x: f64) -> f64 {
        self.scale(x) * (4.0 * x * x * x - 4.0 * x)
    }

    /// True while the deep well sits at `-1`, i.e. on `[k, k + 1/2)`.
    pub fn first_half(t: f64) -> bool {
        t.rem_euclid(1.0) < 0.5
    }

    /// `U(x, t)` at rescaled time `t`.
    pub fn value(&self, x: f64, t: f64) -> f64 {
        if Self::first_half(t) {
            self.static_value(x)
        } else {
            self.static_value(-x)
        }
    }

    /// `dU/dx (x, t)` at rescaled time `t`.
    pub fn gradient(&self, x: f64, t: f64) -> f64 {
        if Self::first_half(t) {
            self.static_gradient(x)
        } else {
            -self.static_gradient(-x)
        }
    }
}

pub fn build_potential(shallow: f64, deep: f64) -> Result<PotentialSpec> {
    check_depths(shallow, deep)?;
    Ok(PotentialSpec { shallow, deep })
}

/// Reference function the path is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Reference {
    /// Constant `sgn(X0)`.
    SignX0,
    /// `-1` on the first half of each period, `+1` on the second.
    Phase,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeviationExperiment {
    pub lambda: f64,
    pub eps: f64,
    /// Period `T = exp(lambda / eps)` in time units.
    pub horizon: f64,
    pub dt: f64,
    pub delta: f64,
    pub x0: f64,
    pub seed: u64,
    pub reference: Reference,
}

impl DeviationExperiment {
    /// Experiment over one period `T = exp(lambda / eps)`; for `eps = 0` the
    /// period is [`ZERO_NOISE_HORIZON`].
    pub fn new(
        lambda: f64,
        eps: f64,
        dt: f64,
        delta: f64,
        x0: f64,
        seed: u64,
        reference: Reference,
    ) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(invalid(format!("lambda must be positive, got {lambda}")));
        }
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(invalid(format!("eps must be finite and >= 0, got {eps}")));
        }
        let horizon = if eps == 0.0 {
            ZERO_NOISE_HORIZON
        } else {
            (lambda / eps).exp()
        };
        Self {
            lambda,
            eps,
            horizon,
            dt,
            delta,
            x0,
            seed,
            reference,
        }
        .validated()
    }

    /// Replaces the period by an explicit horizon.
    pub fn with_horizon(mut self, horizon: f64) -> Result<Self> {
        self.horizon = horizon;
        self.validated()
    }

    fn validated(self) -> Result<Self> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(invalid(format!(
                "period exp(lambda/eps) = {} is not a usable horizon",
                self.horizon
            )));
        }
        if !(self.dt > 0.0 && self.dt < self.horizon.min(1.0) / 100.0) {
            return Err(invalid(format!(
                "dt = {} must be positive and below min(1, T)/100 = {}",
                self.dt,
                self.horizon.min(1.0) / 100.0
            )));
        }
        if self.steps() > MAX_STEPS {
            return Err(invalid(format!(
                "T/dt = {} steps exceeds the limit of {MAX_STEPS}",
                self.steps()
            )));
        }
        if !(self.delta > 0.0) {
            return Err(invalid(format!(
                "delta must be positive, got {}",
                self.delta
            )));
        }
        if !self.x0.is_finite() || self.x0.abs() > BLOW_UP_LIMIT {
            return Err(invalid(format!("x0 = {} is out of range", self.x0)));
        }
        Ok(self)
    }

    pub fn steps(&self) -> u64 {
        (self.horizon / self.dt).ceil() as u64
    }

    /// Reference value at rescaled time `t` in `[0, 1]`.
    pub fn reference_at(&self, t: f64) -> f64 {
        match self.reference {
            Reference::SignX0 => {
                if self.x0 > 0.0 {
                    1.0
                } else if self.x0 < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            Reference::Phase => {
                if PotentialSpec::first_half(t) {
                    -1.0
                } else {
                    1.0
                }
            }
        }
    }
}

fn invalid(msg: String) -> Error {
    Error::InvalidParameter(msg)
}

/// Path samples at `t_n = n dt` for `n = 0..N`, with the last step shortened
/// so that the final sample sits exactly at the horizon.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SdePath {
    pub dt: f64,
    pub horizon: f64,
    pub values: Vec<f64>,
}

impl SdePath {
    pub fn time(&self, n: usize) -> f64 {
        (n as f64 * self.dt).min(self.horizon)
    }

    pub fn step_length(&self, n: usize) -> f64 {
        self.time(n + 1) - self.time(n)
    }
}

#[inline]
fn em_step<R: Rng>(x: f64, drift: f64, h: f64, eps: f64, rng: &mut R) -> f64 {
    let g: f64 = rng.sample(StandardNormal);
    x + drift * h + (eps * h).sqrt() * g
}

/// Euler–Maruyama path of `dX = -U'(X, t/T) dt + sqrt(eps) dW` over `[0, T]`.
pub fn simulate_sde(spec: &PotentialSpec, exp: &DeviationExperiment) -> Result<SdePath> {
    let steps = exp.steps() as usize;
    let mut rng = replica_rng(exp.seed, 0);
    let mut values = Vec::with_capacity(steps + 1);
    let mut x = exp.x0;
    values.push(x);
    for n in 0..steps {
        let t = n as f64 * exp.dt;
        let h = exp.dt.min(exp.horizon - t);
        x = em_step(x, -spec.gradient(x, t / exp.horizon), h, exp.eps, &mut rng);
        if !(x.abs() <= BLOW_UP_LIMIT) {
            return Err(Error::BlowUp {
                step: n as u64 + 1,
                value: x.abs(),
            });
        }
        values.push(x);
    }
    Ok(SdePath {
        dt: exp.dt,
        horizon: exp.horizon,
        values,
    })
}

/// Fraction of rescaled time in `[0, 1]` during which the path is farther
/// than `delta` from the reference, by left-point `dt`-weighted counting.
pub fn deviation_measure(path: &SdePath, exp: &DeviationExperiment) -> f64 {
    let mut outside = 0.0;
    for n in 0..path.values.len().saturating_sub(1) {
        let t = path.time(n);
        if (path.values[n] - exp.reference_at(t / path.horizon)).abs() > exp.delta {
            outside += path.step_length(n);
        }
    }
    outside / path.horizon
}

/// Summary of a batch of first-passage times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExitTimeEstimate {
    pub mean: f64,
    pub std_error: Option<f64>,
    /// `eps * ln(mean)`, which tends to `v` as `eps -> 0`.
    pub eps_ln_mean: f64,
    pub completed: usize,
    /// Paths that hit the step cap without leaving the well; excluded.
    pub timeouts: usize,
}

pub const DEFAULT_MAX_EXIT_STEPS: u64 = 100_000_000;

fn first_passage<R: Rng>(
    spec: &PotentialSpec,
    eps: f64,
    dt: f64,
    max_steps: u64,
    rng: &mut R,
) -> Result<Option<f64>> {
    let mut x = 1.0;
    for n in 1..=max_steps {
        x = em_step(x, -spec.static_gradient(x), dt, eps, rng);
        if x <= 0.0 {
            return Ok(Some(n as f64 * dt));
        }
        if x > BLOW_UP_LIMIT {
            return Err(Error::BlowUp { step: n, value: x });
        }
    }
    Ok(None)
}

/// Mean first-passage time from `+1` to the saddle `0` in the frozen
/// potential `U(x)`, over `n_paths` independent paths.
pub fn mean_exit_time(
    spec: &PotentialSpec,
    eps: f64,
    dt: f64,
    seed: u64,
    n_paths: usize,
    max_steps: u64,
) -> Result<ExitTimeEstimate> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(invalid(format!("eps must be positive, got {eps}")));
    }
    if !(dt > 0.0 && dt < 0.01) {
        return Err(invalid(format!("dt must lie in (0, 0.01), got {dt}")));
    }
    if n_paths == 0 || max_steps == 0 {
        return Err(invalid("n_paths and max_steps must be >= 1".into()));
    }
    let times: Vec<Option<f64>> = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng: ChaCha8Rng = replica_rng(seed, i);
            first_passage(spec, eps, dt, max_steps, &mut rng)
        })
        .collect::<Result<_>>()?;
    let done: Vec<f64> = times.iter().flatten().copied().collect();
    let timeouts = n_paths - done.len();
    if done.is_empty() {
        return Err(invalid(format!(
            "all {n_paths} paths timed out after {max_steps} steps"
        )));
    }
    let n = done.len() as f64;
    let mean = done.iter().sum::<f64>() / n;
    let std_error = (done.len() >= 2).then(|| {
        let var = done.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    });
    Ok(ExitTimeEstimate {
        mean,
        std_error,
        eps_ln_mean: eps * mean.ln(),
        completed: done.len(),
        timeouts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> PotentialSpec {
        build_potential(1.0, 2.0).unwrap()
    }

    #[test]
    fn depths_and_critical_points() {
        let u = build_potential(1.3, 3.7).unwrap();
        assert_eq!(u.static_value(-1.0), -3.7 / 2.0);
        assert_eq!(u.static_value(1.0), -1.3 / 2.0);
        assert_eq!(u.static_value(0.0), 0.0);
        for x in [-1.0, 0.0, 1.0] {
            assert_eq!(u.static_gradient(x), 0.0);
        }
        assert!(u.static_value(50.0) > 1e6 && u.static_value(-50.0) > 1e6);
        assert!(build_potential(2.0, 1.0).is_err());
    }

    #[test]
    fn gradient_is_continuous_at_the_splice() {
        let u = spec();
        let h = 1e-9;
        assert!((u.static_gradient(h) - u.static_gradient(-h)).abs() < 1e-8);
    }

    #[test]
    fn second_half_is_mirror_of_first() {
        let u = spec();
        for &x in &[-1.7, -0.4, 0.0, 0.3, 1.2] {
            assert_eq!(u.value(x, 0.75), u.value(-x, 0.25));
            assert_eq!(u.gradient(x, 1.6), -u.gradient(-x, 1.2));
        }
    }

    #[test]
    fn gradient_flow_settles_in_nearest_well() {
        let u = spec();
        for &(x0, well) in &[(-0.6, -1.0), (0.4, 1.0)] {
            let exp = DeviationExperiment::new(1.0, 0.0, 1e-3, 0.5, x0, 0, Reference::SignX0)
                .unwrap()
                .with_horizon(5.0)
                .unwrap();
            // Stay inside the first half-period so the wells do not swap.
            let path = simulate_sde(&u, &exp).unwrap();
            let at_quarter = path.values[path.values.len() / 4];
            assert!((at_quarter - well).abs() < 0.05, "{x0}: {at_quarter}");
        }
        let exp =
            DeviationExperiment::new(1.0, 0.0, 1e-3, 0.5, -1.0, 0, Reference::SignX0).unwrap();
        let path = simulate_sde(&u, &exp).unwrap();
        assert!((path.values.last().unwrap() + 1.0).abs() < 0.05);
        assert!(deviation_measure(&path, &exp) < 0.02);
    }

    #[test]
    fn same_seed_same_path() {
        let exp =
            DeviationExperiment::new(1.5, 0.6, 1e-3, 0.5, -1.0, 17, Reference::Phase).unwrap();
        let a = simulate_sde(&spec(), &exp).unwrap();
        let b = simulate_sde(&spec(), &exp).unwrap();
        assert_eq!(a, b);
        let other = DeviationExperiment { seed: 18, ..exp };
        let c = simulate_sde(&spec(), &other).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn distinct_seeds_are_decorrelated() {
        let exp = DeviationExperiment::new(1.0, 1.0, 1e-3, 0.5, -1.0, 1, Reference::Phase).unwrap();
        let other = DeviationExperiment { seed: 2, ..exp };
        let incr = |p: &SdePath| -> Vec<f64> { p.values.windows(2).map(|w| w[1] - w[0]).collect() };
        let a = incr(&simulate_sde(&spec(), &exp).unwrap());
        let b = incr(&simulate_sde(&spec(), &other).unwrap());
        let n = a.len() as f64;
        let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
        let cov: f64 = a
            .iter()
            .zip(&b)
            .map(|(x, y)| (x - ma) * (y - mb))
            .sum::<f64>()
            / n;
        let sa = (a.iter().map(|x| (x - ma).powi(2)).sum::<f64>() / n).sqrt();
        let sb = (b.iter().map(|y| (y - mb).powi(2)).sum::<f64>() / n).sqrt();
        let corr = cov / (sa * sb);
        // 2718 increments: null standard deviation ~0.019.
        assert!(corr.abs() < 0.08, "{corr}");
    }

    #[test]
    fn strong_noise_flips_sign_in_every_half_period() {
        let u = spec();
        let mut both = 0;
        for seed in 0..100 {
            let exp = DeviationExperiment::new(10.0, 5.0, 1e-3, 0.5, -1.0, seed, Reference::Phase)
                .unwrap();
            let path = simulate_sde(&u, &exp).unwrap();
            let half = path.values.len() / 2;
            let flips = |xs: &[f64]| xs.windows(2).any(|w| w[0].signum() != w[1].signum());
            if flips(&path.values[..half]) && flips(&path.values[half..]) {
                both += 1;
            }
        }
        assert!(both > 90, "{both}");
    }

    #[test]
    fn wide_tube_gives_zero_measure() {
        let exp = DeviationExperiment::new(
            1.5,
            0.8,
            1e-3,
            2.0 + BLOW_UP_LIMIT,
            -1.0,
            3,
            Reference::Phase,
        )
        .unwrap();
        let path = simulate_sde(&spec(), &exp).unwrap();
        assert_eq!(deviation_measure(&path, &exp), 0.0);
    }

    #[test]
    fn experiment_validation() {
        assert!(DeviationExperiment::new(1.5, 0.5, 0.5, 0.5, -1.0, 0, Reference::Phase).is_err());
        assert!(DeviationExperiment::new(0.0, 0.5, 1e-3, 0.5, -1.0, 0, Reference::Phase).is_err());
        assert!(DeviationExperiment::new(1.5, -0.5, 1e-3, 0.5, -1.0, 0, Reference::Phase).is_err());
        assert!(DeviationExperiment::new(30.0, 0.5, 1e-3, 0.5, -1.0, 0, Reference::Phase).is_err());
        let exp = DeviationExperiment::new(1.5, 0.5, 1e-3, 0.5, -1.0, 0, Reference::Phase).unwrap();
        assert!((exp.horizon - 3f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn oversized_step_blows_up() {
        let stiff = build_potential(50.0, 100.0).unwrap();
        let exp = DeviationExperiment::new(1.0, 0.5, 9e-3, 0.5, -3.0, 0, Reference::Phase).unwrap();
        assert!(matches!(
            simulate_sde(&stiff, &exp),
            Err(Error::BlowUp { step: 1, .. })
        ));
    }

    #[test]
    fn stationary_variance_of_harmonic_well() {
        // Quadratic approximation of the deep well, U = 2V (x + 1)^2: an
        // Ornstein-Uhlenbeck process with Gibbs variance eps / (8 V).
        let (deep, eps, dt) = (2.0, 0.5, 1e-3);
        let stiffness = 4.0 * deep;
        let mut rng = replica_rng(123, 0);
        let mut x = -1.0;
        let (mut sum, mut sum2, mut n) = (0.0, 0.0, 0.0);
        for k in 0..2_000_000 {
            x = em_step(x, -stiffness * (x + 1.0), dt, eps, &mut rng);
            if k >= 10_000 {
                sum += x;
                sum2 += x * x;
                n += 1.0;
            }
        }
        let var = sum2 / n - (sum / n).powi(2);
        let gibbs = eps / (2.0 * stiffness);
        assert!((var / gibbs - 1.0).abs() < 0.1, "{var} vs {gibbs}");
    }

    #[test]
    fn exit_time_is_order_one_at_large_noise() {
        let est = mean_exit_time(&spec(), 2.0, 1e-3, 5, 400, DEFAULT_MAX_EXIT_STEPS).unwrap();
        assert!(est.mean > 0.3 && est.mean < 3.0, "{est:?}");
        assert_eq!(est.timeouts, 0);
    }

    #[test]
    fn exit_time_standard_error_scales_with_paths() {
        let small = mean_exit_time(&spec(), 1.0, 1e-3, 9, 400, DEFAULT_MAX_EXIT_STEPS).unwrap();
        let large = mean_exit_time(&spec(), 1.0, 1e-3, 9, 800, DEFAULT_MAX_EXIT_STEPS).unwrap();
        let ratio = small.std_error.unwrap() / large.std_error.unwrap();
        assert!((ratio / 2f64.sqrt() - 1.0).abs() < 0.2, "{ratio}");
    }

    #[test]
    fn exit_time_timeouts_are_counted() {
        assert!(mean_exit_time(&spec(), 0.05, 1e-3, 1, 20, 2000).is_err());
        let est = mean_exit_time(&spec(), 0.5, 1e-3, 1, 50, 5000).unwrap();
        assert!(est.timeouts > 0 && est.completed + est.timeouts == 50);
    }
}
