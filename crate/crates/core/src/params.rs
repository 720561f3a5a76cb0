//! Parameter model for the two-state chain family and the noise axis.

use serde::Serialize;

use crate::error::{Error, Result};

/// Parameters of the periodically driven two-state chain.
///
/// `deep` and `shallow` are the doubled well depths (the potential wells have
/// depths `deep/2` and `shallow/2`); `p`, `q` are the pre-factors of the
/// one-step escape probabilities and `half_period` is the number of steps
/// during which one of the two transition matrices is in force.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChainParams {
    p: f64,
    q: f64,
    shallow: f64,
    deep: f64,
    half_period: u64,
}

impl ChainParams {
    pub fn new(p: f64, q: f64, shallow: f64, deep: f64, half_period: u64) -> Result<Self> {
        check_prefactors(p, q)?;
        check_depths(shallow, deep)?;
        if half_period == 0 {
            return Err(Error::InvalidParameter("half-period m must be >= 1".into()));
        }
        Ok(Self {
            p,
            q,
            shallow,
            deep,
            half_period,
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Doubled depth of the shallow well (`v`).
    pub fn shallow(&self) -> f64 {
        self.shallow
    }

    /// Doubled depth of the deep well (`V`).
    pub fn deep(&self) -> f64 {
        self.deep
    }

    pub fn half_period(&self) -> u64 {
        self.half_period
    }

    /// Full forcing period `2m`.
    pub fn period(&self) -> usize {
        2 * self.half_period as usize
    }

    /// Depth ratio `v / V`, always in `(0, 1)`.
    pub fn beta(&self) -> f64 {
        self.shallow / self.deep
    }

    /// Depth gap `V - v`.
    pub fn depth_gap(&self) -> f64 {
        self.deep - self.shallow
    }

    pub fn with_half_period(&self, half_period: u64) -> Result<Self> {
        Self::new(self.p, self.q, self.shallow, self.deep, half_period)
    }

    pub fn with_prefactors(&self, p: f64, q: f64) -> Result<Self> {
        Self::new(p, q, self.shallow, self.deep, self.half_period)
    }
}

pub(crate) fn check_prefactors(p: f64, q: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidParameter(format!(
            "pre-factors must lie in [0, 1] (p = {p}, q = {q})"
        )));
    }
    if p + q <= 0.0 {
        return Err(Error::InvalidParameter(
            "p = q = 0 leaves the chain without dynamics".into(),
        ));
    }
    Ok(())
}

pub(crate) fn check_depths(shallow: f64, deep: f64) -> Result<()> {
    if !(shallow > 0.0 && shallow < deep && deep.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "depths must satisfy 0 < v < V < inf (v = {shallow}, V = {deep})"
        )));
    }
    Ok(())
}

/// Position on the noise axis, stored as `x = exp(-1/eps)` in `[0, 1]`.
///
/// `x = 0` is the zero-noise limit and `x = 1` is `eps = inf`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct NoiseLevel(f64);

impl NoiseLevel {
    pub const ZERO: NoiseLevel = NoiseLevel(0.0);
    pub const INFINITE: NoiseLevel = NoiseLevel(1.0);

    pub fn from_x(x: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&x) {
            Ok(Self(x))
        } else {
            Err(Error::InvalidParameter(format!(
                "noise variable x must lie in [0, 1], got {x}"
            )))
        }
    }

    /// Converts a noise intensity. `eps = 0` maps to `x = 0`, `eps = inf` to `x = 1`.
    pub fn from_eps(eps: f64) -> Result<Self> {
        if eps.is_nan() || eps < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "noise intensity must be >= 0, got {eps}"
            )));
        }
        if eps == 0.0 {
            return Ok(Self::ZERO);
        }
        Ok(Self((-1.0 / eps).exp()))
    }

    pub fn x(&self) -> f64 {
        self.0
    }

    /// Noise intensity `-1 / ln x`; `inf` at `x = 1`, `0` at `x = 0`.
    pub fn eps(&self) -> f64 {
        if self.0 == 0.0 {
            0.0
        } else if self.0 == 1.0 {
            f64::INFINITY
        } else {
            -1.0 / self.0.ln()
        }
    }
}
