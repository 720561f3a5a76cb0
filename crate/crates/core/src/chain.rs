//! Transition structure of the periodically driven chain and its periodic
//! stationary law, by closed form and by an independent linear-algebra route.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{pow_uint, Mat2};
use crate::params::{ChainParams, NoiseLevel};

/// One-step escape probabilities: `phi` out of the currently deep state,
/// `psi` out of the currently shallow one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateParams {
    pub phi: f64,
    pub psi: f64,
}

impl RateParams {
    /// `1 - phi - psi`, the second eigenvalue of both transition matrices.
    pub fn contraction(&self) -> f64 {
        1.0 - self.phi - self.psi
    }

    /// The full-period transfer matrix is the identity exactly when
    /// `phi + psi` is 0 (frozen) or 2 (deterministic flip).
    pub(crate) fn ensure_nondegenerate(&self) -> Result<()> {
        let total = self.phi + self.psi;
        if total == 0.0 || total == 2.0 {
            Err(Error::DegenerateChain {
                phi: self.phi,
                psi: self.psi,
            })
        } else {
            Ok(())
        }
    }
}

/// The two row-stochastic matrices used in the first and second half-period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransitionPair {
    pub first: Mat2,
    pub second: Mat2,
}

impl TransitionPair {
    /// Matrix in force at absolute step `k` for half-period `m`.
    pub fn at_step(&self, k: u64, half_period: u64) -> &Mat2 {
        if k % (2 * half_period) < half_period {
            &self.first
        } else {
            &self.second
        }
    }
}

pub fn rates(params: &ChainParams, x: NoiseLevel) -> RateParams {
    let x = x.x();
    RateParams {
        phi: params.p() * x.powf(params.deep()),
        psi: params.q() * x.powf(params.shallow()),
    }
}

pub fn transition_matrices(r: &RateParams) -> TransitionPair {
    let (phi, psi) = (r.phi, r.psi);
    TransitionPair {
        first: Mat2::new(1.0 - phi, phi, psi, 1.0 - psi),
        second: Mat2::new(1.0 - psi, psi, phi, 1.0 - phi),
    }
}

/// Full-period transfer matrix `(P2^T)^m (P1^T)^m` acting on column laws,
/// from its three-term closed form.
pub fn monodromy(params: &ChainParams, x: NoiseLevel) -> Mat2 {
    let r = rates(params, x);
    let (phi, psi) = (r.phi, r.psi);
    let total = phi + psi;
    if total == 0.0 {
        return Mat2::IDENTITY;
    }
    let m = params.half_period();
    let rm = pow_uint(r.contraction(), m);
    let r2m = pow_uint(r.contraction(), 2 * m);
    let mid = rm * (phi - psi) / total;
    let tail = r2m / total;
    Mat2::new(
        phi / total - mid + tail * phi,
        phi / total - mid - tail * psi,
        psi / total + mid - tail * phi,
        psi / total + mid + tail * psi,
    )
}

/// Periodic stationary law: one `(pi_minus, pi_plus)` pair per phase
/// `l = 0..2m`, each pair a probability vector over `(-1, +1)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationaryDistribution {
    entries: Vec<[f64; 2]>,
}

impl StationaryDistribution {
    pub fn from_entries(entries: Vec<[f64; 2]>) -> Self {
        Self { entries }
    }

    pub fn entries(&self) -> &[[f64; 2]] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn half_period(&self) -> usize {
        self.entries.len() / 2
    }

    pub fn pi_minus(&self, l: usize) -> f64 {
        self.entries[l][0]
    }

    pub fn pi_plus(&self, l: usize) -> f64 {
        self.entries[l][1]
    }

    /// Expected value of the state `X(l)` in `{-1, +1}`.
    pub fn mean_state(&self, l: usize) -> f64 {
        self.entries[l][1] - self.entries[l][0]
    }

    pub fn max_abs_diff(&self, other: &StationaryDistribution) -> f64 {
        assert_eq!(self.len(), other.len(), "distributions of different period");
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a[0] - b[0]).abs().max((a[1] - b[1]).abs()))
            .fold(0.0, f64::max)
    }
}

/// Closed-form periodic stationary law.
///
/// For `0 <= l < m`, with `r = 1 - phi - psi`,
/// `pi_minus(l) = psi/(phi+psi) + (phi-psi)/(phi+psi) * r^l / (1 + r^m)`,
/// and the second half-period is the first with the two states swapped.
pub fn stationary_distribution(
    params: &ChainParams,
    x: NoiseLevel,
) -> Result<StationaryDistribution> {
    let r = rates(params, x);
    r.ensure_nondegenerate()?;
    let m = params.half_period() as usize;
    let mut entries = vec![[0.5, 0.5]; 2 * m];
    if r.phi != r.psi {
        let total = r.phi + r.psi;
        let base_minus = r.psi / total;
        let base_plus = r.phi / total;
        let amp = (r.phi - r.psi) / total;
        let contraction = r.contraction();
        let denom = 1.0 + pow_uint(contraction, m as u64);
        for l in 0..m {
            let transient = amp * pow_uint(contraction, l as u64) / denom;
            entries[l] = [base_minus + transient, base_plus - transient];
            entries[l + m] = [base_plus - transient, base_minus + transient];
        }
    }
    Ok(StationaryDistribution { entries })
}

/// Independent route to the stationary law: fixed point of the full-period
/// transfer matrix (built by repeated multiplication and solved by Gaussian
/// elimination), then forward propagation one step at a time.
pub fn stationary_oracle(params: &ChainParams, x: NoiseLevel) -> Result<StationaryDistribution> {
    let r = rates(params, x);
    r.ensure_nondegenerate()?;
    let pair = transition_matrices(&r);
    let m = params.half_period();

    let forward = pair.first.power_by_multiplication(m) * pair.second.power_by_multiplication(m);
    let transfer = forward.transpose();

    // (T - I) pi = 0 with the second equation replaced by pi_- + pi_+ = 1.
    let system = Mat2::new(transfer.get(0, 0) - 1.0, transfer.get(0, 1), 1.0, 1.0);
    let start = solve2(&system, [0.0, 1.0]).ok_or(Error::DegenerateChain {
        phi: r.phi,
        psi: r.psi,
    })?;

    let period = 2 * m;
    let mut entries = Vec::with_capacity(period as usize);
    let mut law = start;
    for k in 0..period {
        let total = law[0] + law[1];
        entries.push([law[0] / total, law[1] / total]);
        law = pair.at_step(k, m).apply_transpose(law);
    }
    Ok(StationaryDistribution { entries })
}

/// Gaussian elimination with partial pivoting; `None` for a singular system.
fn solve2(a: &Mat2, b: [f64; 2]) -> Option<[f64; 2]> {
    let (mut r0, mut r1) = (
        [a.get(0, 0), a.get(0, 1), b[0]],
        [a.get(1, 0), a.get(1, 1), b[1]],
    );
    if r1[0].abs() > r0[0].abs() {
        std::mem::swap(&mut r0, &mut r1);
    }
    if r0[0] == 0.0 {
        return None;
    }
    let factor = r1[0] / r0[0];
    let pivot2 = r1[1] - factor * r0[1];
    let rhs2 = r1[2] - factor * r0[2];
    if pivot2 == 0.0 {
        return None;
    }
    let y = rhs2 / pivot2;
    let x = (r0[2] - r0[1] * y) / r0[0];
    Some([x, y])
}
