//! Factored symmetric-pattern tridiagonal systems (Thomas algorithm).
//!
//! The factorization is computed once and reused for every right-hand side,
//! which is how both the inverse iteration and the Crank–Nicolson stepper use it.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct TridiagonalLu {
    /// Modified super-diagonal `c'_i`.
    upper: Vec<Complex64>,
    /// Reciprocal pivots `1 / (b_i - a_i c'_{i-1})`.
    inv_pivot: Vec<Complex64>,
    lower: Vec<Complex64>,
}

impl TridiagonalLu {
    /// Factors the matrix with diagonal `diag` and sub/super diagonal `off`
    /// (`off[i]` couples rows `i` and `i + 1`).
    pub fn new(diag: &[Complex64], off: &[Complex64]) -> Result<Self> {
        let n = diag.len();
        assert_eq!(off.len() + 1, n.max(1));
        let mut upper = vec![Complex64::new(0.0, 0.0); n];
        let mut inv_pivot = vec![Complex64::new(0.0, 0.0); n];
        let scale = diag.iter().map(|d| d.norm()).fold(0.0, f64::max).max(1.0);
        for i in 0..n {
            let sub = if i == 0 { Complex64::new(0.0, 0.0) } else { off[i - 1] * upper[i - 1] };
            let pivot = diag[i] - sub;
            if pivot.norm() <= 1e-14 * scale || !pivot.norm().is_finite() {
                return Err(Error::SingularSolve { row: i });
            }
            inv_pivot[i] = pivot.inv();
            if i + 1 < n {
                upper[i] = off[i] * inv_pivot[i];
            }
        }
        Ok(TridiagonalLu {
            upper,
            inv_pivot,
            lower: off.to_vec(),
        })
    }

    pub fn len(&self) -> usize {
        self.inv_pivot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv_pivot.is_empty()
    }

    /// Overwrites `rhs` with the solution.
    pub fn solve_in_place(&self, rhs: &mut [Complex64]) {
        let n = self.len();
        debug_assert_eq!(rhs.len(), n);
        for i in 0..n {
            let carry = if i == 0 { Complex64::new(0.0, 0.0) } else { self.lower[i - 1] * rhs[i - 1] };
            rhs[i] = (rhs[i] - carry) * self.inv_pivot[i];
        }
        for i in (0..n.saturating_sub(1)).rev() {
            let next = rhs[i + 1];
            rhs[i] -= self.upper[i] * next;
        }
    }
}
