//! The Young function `A`, its companion `B`, the logarithmic nonlinearity and
//! its truncations, and the norms of the energy space `W = H¹ ∩ L^A`.
//!
//! The entropy density `F(s) = s² Log s²` is split as `F = B - A` with
//!
//! ```text
//! A(s) = -s² Log s²                 0 <= s <= e^{-3}
//!        3s² + 4e^{-3}s - e^{-6}    s >= e^{-3}
//! ```
//!
//! so that `A` is a convex increasing Young function and `B = F + A` vanishes
//! identically below `e^{-3}`.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::grid::GridFunction;

/// Below this magnitude every entropy term takes its limit value 0.
pub const UNDERFLOW: f64 = 1e-300;

/// Branch point `e^{-3}` of `A`.
pub fn branch_point() -> f64 {
    (-3.0f64).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropySplit {
    pub a: f64,
    pub b: f64,
    pub f: f64,
}

pub fn entropy_split(s: f64) -> EntropySplit {
    debug_assert!(s >= 0.0);
    if s < UNDERFLOW {
        return EntropySplit { a: 0.0, b: 0.0, f: 0.0 };
    }
    let s2 = s * s;
    // 2 s² ln s rather than s² ln s², which is 0·(-∞) once s² underflows.
    let f = 2.0 * s2 * s.ln();
    let c = branch_point();
    let a = if s <= c {
        -f
    } else {
        3.0 * s2 + 4.0 * c * s - c * c
    };
    EntropySplit { a, b: f + a, f }
}

pub fn young_a(s: f64) -> f64 {
    entropy_split(s).a
}

/// `A'(s)`; continuous at the branch point with value `10 e^{-3}`.
pub fn young_a_prime(s: f64) -> f64 {
    let c = branch_point();
    if s < UNDERFLOW {
        0.0
    } else if s <= c {
        -4.0 * s * s.ln() - 2.0 * s
    } else {
        6.0 * s + 4.0 * c
    }
}

/// Truncation level `m` of the regularized nonlinearity. The log is clamped
/// below `|z| = 1/m` and linearized above `|z| = m`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct RegLevel(f64);

impl RegLevel {
    pub const DEFAULT: f64 = 1e8;

    /// `m >= e³` keeps the lower clamp inside the branch where `B ≡ 0`.
    pub fn new(m: f64) -> Result<Self> {
        if !(m.is_finite() && m >= 3f64.exp()) {
            return Err(invalid("m_reg", format!("must be finite and >= e^3, got {m}")));
        }
        Ok(RegLevel(m))
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

impl Default for RegLevel {
    fn default() -> Self {
        RegLevel(Self::DEFAULT)
    }
}

/// Radial profile of `a(z) = z A(|z|)/|z|²`: returns `A(s)/s`.
pub fn a_radial(s: f64) -> f64 {
    if s < UNDERFLOW {
        0.0
    } else {
        young_a(s) / s
    }
}

/// Radial profile of `b(z) = z B(|z|)/|z|²`: returns `B(s)/s`.
pub fn b_radial(s: f64) -> f64 {
    if s < UNDERFLOW {
        0.0
    } else {
        entropy_split(s).b / s
    }
}

/// Radial profile of `a_m`.
pub fn a_reg_radial(s: f64, reg: RegLevel) -> f64 {
    let m = reg.value();
    if s >= 1.0 / m {
        a_radial(s)
    } else {
        m * s * a_radial(1.0 / m)
    }
}

/// Radial profile of `b_m`.
pub fn b_reg_radial(s: f64, reg: RegLevel) -> f64 {
    let m = reg.value();
    if s <= m {
        b_radial(s)
    } else {
        s / m * b_radial(m)
    }
}

/// The real factor `g` with `f(z) = z g(|z|)`: `Log s²` without truncation,
/// and the piecewise form of `(b_m - a_m)/s` with truncation. Inside the band
/// `[1/m, m]` both are the plain logarithm.
pub fn log_factor(s: f64, reg: Option<RegLevel>) -> f64 {
    match reg {
        None => {
            if s < UNDERFLOW {
                0.0
            } else {
                2.0 * s.ln()
            }
        }
        Some(reg) => {
            let m = reg.value();
            if s <= 1.0 / m {
                -2.0 * m.ln()
            } else if s <= m {
                2.0 * s.ln()
            } else {
                let s2 = s * s;
                entropy_split(m).b / (m * m) - young_a(s) / s2
            }
        }
    }
}

/// `z Log|z|²` (0 at the origin), or its truncation `f_m(z) = b_m(z) - a_m(z)`.
pub fn pointwise_nonlinearity(z: Complex64, reg: Option<RegLevel>) -> Complex64 {
    let s = z.norm();
    if s == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    z * log_factor(s, reg)
}

/// `(Φ_m(s), Ψ_m(s))` with `Φ_m(s) = ½∫₀^s a_m` and `Ψ_m(s) = ½∫₀^s b_m`,
/// in closed form branch by branch.
pub fn reg_potentials(s: f64, reg: RegLevel) -> (f64, f64) {
    debug_assert!(s >= 0.0);
    let m = reg.value();
    let t = 1.0 / m;
    let c = branch_point();
    let ln_m = m.ln();

    // Primitives of a on [t, c] and [c, ∞).
    let g1 = |x: f64| 0.5 * x * x - x * x * x.ln();
    let g2 = |x: f64| 1.5 * x * x + 4.0 * c * x - c * c * x.ln();
    let phi = if s <= t {
        s * s * ln_m
    } else if s <= c {
        t * t * ln_m + g1(s) - g1(t)
    } else {
        t * t * ln_m + g1(c) - g1(t) + g2(s) - g2(c)
    };

    // Primitive of b on [c, m]; b vanishes below c.
    let k = |x: f64| x * x * x.ln() + x * x + 4.0 * c * x - c * c * x.ln();
    let psi = if s <= c {
        0.0
    } else if s <= m {
        k(s) - k(c)
    } else {
        let slope = entropy_split(m).b / (m * m);
        k(m) - k(c) + 0.5 * (s * s - m * m) * slope
    };

    (0.5 * phi, 0.5 * psi)
}

/// `∫ A(|u|/k) dx`.
fn modular(u: &GridFunction, k: f64) -> f64 {
    u.integrate_pointwise(|z| young_a(z.norm() / k))
}

/// Luxemburg norm `inf{k > 0 : ∫A(|u|/k) <= 1}` by bisection.
///
/// The bracket starts at `[1e-30, 1]` and the upper end doubles until it is
/// feasible; bisection stops at relative width `1e-10`.
pub fn luxemburg_norm(u: &GridFunction) -> f64 {
    if u.is_zero() {
        return 0.0;
    }
    let mut lo = 1e-30;
    let mut hi = 1.0;
    while modular(u, hi) > 1.0 {
        lo = hi;
        hi *= 2.0;
    }
    if modular(u, lo) <= 1.0 {
        return lo;
    }
    while hi - lo > 1e-10 * hi {
        let mid = 0.5 * (lo + hi);
        if modular(u, mid) <= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// `‖u‖_W = ‖u‖_{H¹} + ‖u‖_{L^A}` with the full `H¹` norm.
pub fn w_norm(u: &GridFunction) -> f64 {
    u.h1_norm() + luxemburg_norm(u)
}

/// `∫ |u|² Log|u|² dx`, evaluated as `∫B - ∫A`.
pub fn entropy_integral(u: &GridFunction) -> f64 {
    let b = u.integrate_pointwise(|z| entropy_split(z.norm()).b);
    let a = u.integrate_pointwise(|z| entropy_split(z.norm()).a);
    b - a
}

/// Right minus left side of the logarithmic Sobolev inequality
/// `∫|f|²Log|f|² <= (α²/π)‖f'‖² + (Log‖f‖² - (1 + Log α))‖f‖²`.
pub fn log_sobolev_gap(f: &GridFunction, alpha: f64) -> Result<f64> {
    if f.is_zero() {
        return Err(Error::ZeroFunction("log-Sobolev gap"));
    }
    if !(alpha > 0.0) {
        return Err(invalid("alpha", "must be positive"));
    }
    let mass = f.l2_norm_sq();
    let rhs = alpha * alpha / std::f64::consts::PI * f.h1_seminorm_sq()
        + (mass.ln() - (1.0 + alpha.ln())) * mass;
    Ok(rhs - entropy_integral(f))
}

/// `γ²‖u‖² + ‖u'‖² - 2γ|u(0)|²`, nonnegative for every `u` and `γ > 0`.
pub fn trace_bound_gap(u: &GridFunction, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(invalid("gamma", "trace bound needs gamma > 0"));
    }
    Ok(gamma * gamma * u.l2_norm_sq() + u.h1_seminorm_sq()
        - 2.0 * gamma * u.at_origin().norm_sqr())
}

/// The quotient `∫|B(|u|) - B(|v|)| / ((1 + ‖u‖²_{H¹} + ‖v‖²_{H¹}) ‖u - v‖)`
/// whose uniform boundedness is the Lipschitz-type estimate for `B`.
pub fn b_lipschitz_ratio(u: &GridFunction, v: &GridFunction) -> Result<f64> {
    u.same_grid(v)?;
    let diff = u - v;
    let dist = diff.l2_norm();
    if dist == 0.0 {
        return Err(Error::ZeroFunction("B Lipschitz ratio (u - v)"));
    }
    let lhs = u.grid().integrate_with(u.len(), |j| {
        (entropy_split(u[j].norm()).b - entropy_split(v[j].norm()).b).abs()
    });
    Ok(lhs / ((1.0 + u.h1_norm_sq() + v.h1_norm_sq()) * dist))
}
