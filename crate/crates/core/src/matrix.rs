//! Minimal 2x2 matrix arithmetic.
//!
//! State order is `(-1, +1)` everywhere: index 0 is the state `-1`.

use std::ops::Mul;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[1.0, 0.0], [0.0, 1.0]]);

    pub fn new(a00: f64, a01: f64, a10: f64, a11: f64) -> Self {
        Mat2([[a00, a01], [a10, a11]])
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.0[row][col]
    }

    pub fn transpose(&self) -> Mat2 {
        let [[a, b], [c, d]] = self.0;
        Mat2([[a, c], [b, d]])
    }

    pub fn row_sums(&self) -> [f64; 2] {
        [self.0[0][0] + self.0[0][1], self.0[1][0] + self.0[1][1]]
    }

    pub fn col_sums(&self) -> [f64; 2] {
        [self.0[0][0] + self.0[1][0], self.0[0][1] + self.0[1][1]]
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.0[0][0] * v[0] + self.0[0][1] * v[1],
            self.0[1][0] * v[0] + self.0[1][1] * v[1],
        ]
    }

    /// Action of the transpose on a column vector, i.e. one step of the
    /// law of the chain when `self` is its row-stochastic transition matrix.
    pub fn apply_transpose(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.0[0][0] * v[0] + self.0[1][0] * v[1],
            self.0[0][1] * v[0] + self.0[1][1] * v[1],
        ]
    }

    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((self.0[r][c] - other.0[r][c]).abs());
            }
        }
        worst
    }

    /// `self^n` by `n - 1` successive multiplications.
    pub fn power_by_multiplication(&self, n: u64) -> Mat2 {
        let mut acc = Mat2::IDENTITY;
        for _ in 0..n {
            acc = acc * *self;
        }
        acc
    }
}

impl Mul for Mat2 {
    type Output = Mat2;

    fn mul(self, rhs: Mat2) -> Mat2 {
        let a = self.0;
        let b = rhs.0;
        Mat2([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }
}

/// `base^n` by repeated squaring; keeps the sign of negative bases exact.
pub fn pow_uint(base: f64, mut n: u64) -> f64 {
    let mut result = 1.0;
    let mut b = base;
    while n > 0 {
        if n & 1 == 1 {
            result *= b;
        }
        b *= b;
        n >>= 1;
    }
    result
}

/// Closed-form `n`-th power of a row-stochastic 2x2 matrix.
///
/// With `lambda = M00 + M11 - 1` the second eigenvalue,
///
/// ```text
/// M^n = 1/(2 - M00 - M11) * [[1-M11, 1-M00], [1-M11, 1-M00]]
///     + lambda^n/(2 - M00 - M11) * [[1-M00, -(1-M00)], [-(1-M11), 1-M11]]
/// ```
///
/// Returns [`Error::IdentityMatrix`] when the denominator vanishes.
pub fn matrix_power_2x2(m: &Mat2, n: u64) -> Result<Mat2> {
    let a = m.0[0][0];
    let d = m.0[1][1];
    let denom = 2.0 - a - d;
    if denom == 0.0 {
        return Err(Error::IdentityMatrix);
    }
    let lambda_n = pow_uint(a + d - 1.0, n);
    let (ca, cd) = (1.0 - a, 1.0 - d);
    Ok(Mat2([
        [(cd + lambda_n * ca) / denom, (ca - lambda_n * ca) / denom],
        [(cd - lambda_n * cd) / denom, (ca + lambda_n * cd) / denom],
    ]))
}
