//! Seeded simulation of the periodically driven chain and statistical
//! estimates of its stationary law and SPA coefficient.
//!
//! Every replica draws from its own ChaCha8 stream (stream id = replica
//! index) under the common seed, so results do not depend on how replicas
//! are scheduled across threads.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use crate::chain::{rates, stationary_distribution, StationaryDistribution};
use crate::error::{Error, Result};
use crate::params::{ChainParams, NoiseLevel};
use crate::spectral::input_signal_power;

pub const DEFAULT_BURN_IN: u64 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SimConfig {
    pub seed: u64,
    /// Full periods `2m` retained for statistics.
    pub periods: u64,
    /// Full periods discarded before statistics.
    pub burn_in: u64,
    pub replicas: usize,
}

impl SimConfig {
    pub fn new(seed: u64, periods: u64, burn_in: u64, replicas: usize) -> Result<Self> {
        if periods == 0 || replicas == 0 {
            return Err(Error::InvalidParameter(format!(
                "periods and replicas must be >= 1 (periods = {periods}, replicas = {replicas})"
            )));
        }
        Ok(Self {
            seed,
            periods,
            burn_in,
            replicas,
        })
    }
}

/// Generator for one replica.
pub fn replica_rng(seed: u64, replica: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica as u64);
    rng
}

/// Flip probabilities indexed by `[half][state]`, state 0 being `-1`.
struct Stepper {
    flip: [[f64; 2]; 2],
    half_period: usize,
    start_minus: f64,
}

impl Stepper {
    fn new(params: &ChainParams, x: NoiseLevel) -> Result<Self> {
        let r = rates(params, x);
        let start = stationary_distribution(params, x)?;
        Ok(Self {
            flip: [[r.phi, r.psi], [r.psi, r.phi]],
            half_period: params.half_period() as usize,
            start_minus: start.pi_minus(0),
        })
    }

    fn initial_state<R: Rng>(&self, rng: &mut R) -> usize {
        if rng.gen::<f64>() < self.start_minus {
            0
        } else {
            1
        }
    }

    #[inline]
    fn step<R: Rng>(&self, rng: &mut R, state: usize, phase: usize) -> usize {
        let half = usize::from(phase >= self.half_period);
        if rng.gen::<f64>() < self.flip[half][state] {
            1 - state
        } else {
            state
        }
    }
}

#[inline]
fn state_value(state: usize) -> i8 {
    if state == 0 {
        -1
    } else {
        1
    }
}

/// A materialised path of one replica, states in `{-1, +1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    pub states: Vec<i8>,
    pub burn_in_steps: usize,
}

impl Trajectory {
    /// The part of the path after burn-in.
    pub fn retained(&self) -> &[i8] {
        &self.states[self.burn_in_steps..]
    }
}

/// Path of one replica over `(burn_in + periods) * 2m` steps, started from
/// the exact phase-0 stationary law.
pub fn simulate_replica(
    params: &ChainParams,
    x: NoiseLevel,
    config: &SimConfig,
    replica: usize,
) -> Result<Trajectory> {
    let stepper = Stepper::new(params, x)?;
    let period = params.period();
    let total = (config.burn_in + config.periods) as usize * period;
    let mut rng = replica_rng(config.seed, replica);
    let mut state = stepper.initial_state(&mut rng);
    let mut states = Vec::with_capacity(total);
    for k in 0..total {
        states.push(state_value(state));
        state = stepper.step(&mut rng, state, k % period);
    }
    Ok(Trajectory {
        states,
        burn_in_steps: config.burn_in as usize * period,
    })
}

/// Paths of every replica, in replica order.
pub fn simulate_chain(
    params: &ChainParams,
    x: NoiseLevel,
    config: &SimConfig,
) -> Result<Vec<Trajectory>> {
    (0..config.replicas)
        .into_par_iter()
        .map(|r| simulate_replica(params, x, config, r))
        .collect()
}

/// Per-phase occupation frequencies with batch-means standard errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalDistribution {
    pub distribution: StationaryDistribution,
    /// Standard error of each phase frequency; absent with fewer than two
    /// periods.
    pub std_errors: Option<Vec<f64>>,
    pub periods: usize,
}

const MAX_BATCHES: usize = 20;

/// Occupation frequencies per phase of a trajectory that spans whole periods.
///
/// Standard errors come from batch means over up to 20 contiguous blocks of
/// periods, which absorbs the correlation between successive periods.
pub fn empirical_distribution(states: &[i8], half_period: usize) -> Result<EmpiricalDistribution> {
    let period = 2 * half_period;
    if period == 0 || states.is_empty() || states.len() % period != 0 {
        return Err(Error::LengthMismatch {
            len: states.len(),
            period,
        });
    }
    let periods = states.len() / period;
    let batches = MAX_BATCHES.min(periods);
    let mut batch_counts = vec![vec![0u64; period]; batches];
    let mut batch_sizes = vec![0u64; batches];
    for (w, window) in states.chunks_exact(period).enumerate() {
        let b = w * batches / periods;
        batch_sizes[b] += 1;
        for (l, &s) in window.iter().enumerate() {
            if s < 0 {
                batch_counts[b][l] += 1;
            }
        }
    }

    let mut entries = Vec::with_capacity(period);
    for l in 0..period {
        let minus: u64 = batch_counts.iter().map(|c| c[l]).sum();
        let freq = minus as f64 / periods as f64;
        entries.push([freq, 1.0 - freq]);
    }

    let std_errors = (batches >= 2).then(|| {
        (0..period)
            .map(|l| {
                let means: Vec<f64> = batch_counts
                    .iter()
                    .zip(&batch_sizes)
                    .map(|(c, &n)| c[l] as f64 / n as f64)
                    .collect();
                let avg = means.iter().sum::<f64>() / batches as f64;
                let var =
                    means.iter().map(|m| (m - avg).powi(2)).sum::<f64>() / (batches - 1) as f64;
                (var / batches as f64).sqrt()
            })
            .collect()
    });

    Ok(EmpiricalDistribution {
        distribution: StationaryDistribution::from_entries(entries),
        std_errors,
        periods,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpaEstimate {
    pub eta_hat: f64,
    /// Delta-method standard error from the spread of replica means; absent
    /// for a single replica.
    pub std_error: Option<f64>,
    pub n_windows: u64,
    /// Mean of `|xi|^2` over individual windows, divided by the input power.
    /// Always at least `eta_hat` up to sampling noise.
    pub mean_window_power: f64,
}

struct ReplicaSums {
    mean_component: Complex64,
    mean_power: f64,
}

fn run_replica_statistics(
    stepper: &Stepper,
    weights: &[Complex64],
    config: &SimConfig,
    replica: usize,
) -> ReplicaSums {
    let period = weights.len();
    let mut rng = replica_rng(config.seed, replica);
    let mut state = stepper.initial_state(&mut rng);
    for _ in 0..config.burn_in {
        for l in 0..period {
            state = stepper.step(&mut rng, state, l);
        }
    }
    let mut component_sum = Complex64::new(0.0, 0.0);
    let mut power_sum = 0.0;
    for _ in 0..config.periods {
        let mut window = Complex64::new(0.0, 0.0);
        for (l, w) in weights.iter().enumerate() {
            if state == 0 {
                window -= w;
            } else {
                window += w;
            }
            state = stepper.step(&mut rng, state, l);
        }
        component_sum += window;
        power_sum += window.norm_sqr();
    }
    let n = config.periods as f64;
    ReplicaSums {
        mean_component: component_sum / n,
        mean_power: power_sum / n,
    }
}

/// Monte Carlo estimate of the SPA coefficient.
///
/// Each replica averages the window components
/// `xi = (1/2m) sum_l X(l) exp(2 pi i l / 2m)` over its retained periods.
/// The replica means are pooled and `|mean|^2` is divided by the input power,
/// so the estimate targets `|E xi|^2`, not `E |xi|^2`.
pub fn estimate_spa(
    params: &ChainParams,
    x: NoiseLevel,
    config: &SimConfig,
) -> Result<SpaEstimate> {
    let stepper = Stepper::new(params, x)?;
    let period = params.period();
    let weights: Vec<Complex64> = (0..period)
        .map(|l| Complex64::from_polar(1.0 / period as f64, 2.0 * PI * l as f64 / period as f64))
        .collect();
    let sums: Vec<ReplicaSums> = (0..config.replicas)
        .into_par_iter()
        .map(|r| run_replica_statistics(&stepper, &weights, config, r))
        .collect();

    let power = input_signal_power(params);
    let reps = sums.len() as f64;
    let mean: Complex64 = sums.iter().map(|s| s.mean_component).sum::<Complex64>() / reps;
    let mean_window_power = sums.iter().map(|s| s.mean_power).sum::<f64>() / reps / power;

    let std_error = (sums.len() >= 2).then(|| {
        let (mut srr, mut sii, mut sri) = (0.0, 0.0, 0.0);
        for s in &sums {
            let d = s.mean_component - mean;
            srr += d.re * d.re;
            sii += d.im * d.im;
            sri += d.re * d.im;
        }
        let norm = reps - 1.0;
        let (vrr, vii, vri) = (srr / norm, sii / norm, sri / norm);
        let (gr, gi) = (2.0 * mean.re, 2.0 * mean.im);
        let var = (gr * gr * vrr + gi * gi * vii + 2.0 * gr * gi * vri) / reps;
        var.max(0.0).sqrt() / power
    });

    Ok(SpaEstimate {
        eta_hat: mean.norm_sqr() / power,
        std_error,
        n_windows: config.periods * config.replicas as u64,
        mean_window_power,
    })
}
