//! Energy, action and Nehari functionals, the discrete gradient of the action,
//! the Nehari rescaling, and the closed-form peak-Gausson.
//!
//! For `u` on a grid and parameters `(γ, ω)`:
//!
//! ```text
//! E(u) = ½‖u'‖² - (γ/2)|u(0)|² - ½∫|u|² Log|u|²
//! S(u) = E(u) + ((ω+1)/2)‖u‖²
//! I(u) = ‖u'‖² + ω‖u‖² - γ|u(0)|² - ∫|u|² Log|u|²  (= 2E + ω‖u‖²)
//! ```
//!
//! With a regularization level `m`, the entropy term is replaced by the
//! potentials of the truncated nonlinearity, see [`energy`].

use num_complex::Complex64;
use libm::erfc;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::operator::DeltaHamiltonian;
use crate::orlicz::{entropy_integral, log_factor, reg_potentials, RegLevel};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PhysParams {
    pub gamma: f64,
    pub omega: f64,
    pub reg: Option<RegLevel>,
}

impl PhysParams {
    pub fn new(gamma: f64, omega: f64) -> Self {
        PhysParams { gamma, omega, reg: None }
    }

    pub fn with_reg(self, reg: RegLevel) -> Self {
        PhysParams { reg: Some(reg), ..self }
    }

    pub fn unregularized(self) -> Self {
        PhysParams { reg: None, ..self }
    }
}

/// `E(u)`, or `E_m(u)` when `p.reg` is set.
///
/// `E_m(u) = ½‖u'‖² - (γ/2)|u(0)|² + 2∫Φ_m(|u|) - 2∫Ψ_m(|u|) - ½‖u‖²`.
/// The factor 2 and the mass shift make `E_m` the Hamiltonian of the
/// truncated flow `i∂ₜu = H_γu - f_m(u)` and make it coincide with `E`
/// whenever `|u|` stays in `[1/m, m]` (up to a constant of order `1/m²`
/// per unit length).
pub fn energy(u: &GridFunction, p: &PhysParams) -> f64 {
    let kinetic = 0.5 * u.h1_seminorm_sq() - 0.5 * p.gamma * u.at_origin().norm_sqr();
    match p.reg {
        None => kinetic - 0.5 * entropy_integral(u),
        Some(reg) => {
            let phi = u.integrate_pointwise(|z| reg_potentials(z.norm(), reg).0);
            let psi = u.integrate_pointwise(|z| reg_potentials(z.norm(), reg).1);
            kinetic + 2.0 * (phi - psi) - 0.5 * u.l2_norm_sq()
        }
    }
}

/// `S(u) = E(u) + ((ω+1)/2)‖u‖²`.
pub fn action(u: &GridFunction, p: &PhysParams) -> f64 {
    energy(u, p) + 0.5 * (p.omega + 1.0) * u.l2_norm_sq()
}

/// `I(u) = <S'(u), u>`.
pub fn nehari(u: &GridFunction, p: &PhysParams) -> f64 {
    let linear = u.h1_seminorm_sq() + p.omega * u.l2_norm_sq() - p.gamma * u.at_origin().norm_sqr();
    match p.reg {
        None => linear - entropy_integral(u),
        Some(reg) => linear - u.integrate_pointwise(|z| z.norm_sqr() * log_factor(z.norm(), Some(reg))),
    }
}

/// `S'(u) = H_γu + ωu - f(u)` as a grid function (Riesz representative for
/// the `L²` pairing). Dirichlet entries are zero.
pub fn gradient_action(u: &GridFunction, p: &PhysParams) -> Result<GridFunction> {
    let ham = DeltaHamiltonian::new(*u.grid(), p.gamma);
    gradient_action_with(&ham, u, p)
}

pub(crate) fn gradient_action_with(ham: &DeltaHamiltonian, u: &GridFunction, p: &PhysParams) -> Result<GridFunction> {
    let mut g = ham.apply(u)?;
    let n = g.len();
    for j in 1..n - 1 {
        let z = u[j];
        g[j] += z * (p.omega - log_factor(z.norm(), p.reg));
    }
    Ok(g)
}

/// Projects `u ≠ 0` onto the Nehari manifold: `λ = exp(I(u)/(2‖u‖²))`,
/// returning `(λ, λu)`. Exact for the unregularized functional, since
/// `I(λu) = λ²(I(u) - ‖u‖² Log λ²)`.
pub fn nehari_rescale(u: &GridFunction, p: &PhysParams) -> Result<(f64, GridFunction)> {
    let mass = u.l2_norm_sq();
    if mass == 0.0 {
        return Err(Error::ZeroFunction("Nehari rescaling"));
    }
    let lambda = (nehari(u, p) / (2.0 * mass)).exp();
    Ok((lambda, u * lambda))
}

/// The peak-Gausson `φ(x) = e^{(ω+1)/2} e^{-(|x| + γ/2)²/2}` with its derived
/// constants: `‖φ‖² = √π e^{ω+1} erfc(γ/2)` and the ground-state level
/// `d = ‖φ‖²/2`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct GaussonReference {
    pub gamma: f64,
    pub omega: f64,
    pub amplitude: f64,
    pub center_value: f64,
    pub mass: f64,
    pub d_value: f64,
}

impl GaussonReference {
    pub fn new(omega: f64, gamma: f64) -> Self {
        let amplitude = (0.5 * (omega + 1.0)).exp();
        let mass = std::f64::consts::PI.sqrt() * (omega + 1.0).exp() * erfc(0.5 * gamma);
        GaussonReference {
            gamma,
            omega,
            amplitude,
            center_value: amplitude * (-gamma * gamma / 8.0).exp(),
            mass,
            d_value: 0.5 * mass,
        }
    }

    pub fn from_params(p: &PhysParams) -> Self {
        Self::new(p.omega, p.gamma)
    }

    pub fn profile(&self, x: f64) -> f64 {
        let r = x.abs() + 0.5 * self.gamma;
        self.amplitude * (-0.5 * r * r).exp()
    }

    /// `φ'(0±) = ∓(γ/2)φ(0)`.
    pub fn one_sided_slopes(&self) -> (f64, f64) {
        let s = 0.5 * self.gamma * self.center_value;
        (-s, s)
    }

    pub fn sample(&self, grid: Grid) -> GridFunction {
        GridFunction::sample_real(grid, |x| self.profile(x))
    }

    /// `‖φ‖²` by composite Gauss–Legendre on `[0, 40]`, independent of any grid.
    pub fn quadrature_mass(&self) -> f64 {
        2.0 * gauss_legendre(|x| self.profile(x).powi(2), 0.0, 40.0, 4000)
    }

    /// Lower bound `√(π/8) e^{ω+1} e^{-γ²/2}` on `d`, valid for `γ > 0`.
    pub fn d_lower_bound(&self) -> f64 {
        (std::f64::consts::PI / 8.0).sqrt() * (self.omega + 1.0).exp() * (-self.gamma * self.gamma / 2.0).exp()
    }

    /// `d` at `γ = 0`: `(√π/2) e^{ω+1}`.
    pub fn d_free(&self) -> f64 {
        0.5 * std::f64::consts::PI.sqrt() * (self.omega + 1.0).exp()
    }
}

/// Composite 5-point Gauss–Legendre.
pub(crate) fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    const X: [f64; 5] = [
        0.0,
        -0.538_469_310_105_683_1,
        0.538_469_310_105_683_1,
        -0.906_179_845_938_664,
        0.906_179_845_938_664,
    ];
    const W: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let width = (b - a) / panels as f64;
    (0..panels)
        .map(|k| {
            let mid = a + (k as f64 + 0.5) * width;
            X.iter().zip(&W).map(|(x, w)| w * f(mid + 0.5 * width * x)).sum::<f64>() * 0.5 * width
        })
        .sum()
}

/// Defects of the stationary problem for a real positive sample `u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryResidual {
    /// `max |-D²u + ωu - u Log u²|` over interior nodes away from the origin.
    pub interior: f64,
    /// `|(u'(0+) - u'(0-)) + γu(0)|` with one-sided first differences.
    pub jump: f64,
}

pub fn pointwise_residual(u: &GridFunction, p: &PhysParams) -> StationaryResidual {
    let g = u.grid();
    let h = g.spacing();
    let o = g.origin_index();
    let v: Vec<f64> = u.values().iter().map(|z| z.re).collect();
    let interior = (1..v.len() - 1)
        .filter(|&j| j + 1 < o || j > o + 1)
        .map(|j| {
            let d2 = (v[j + 1] - 2.0 * v[j] + v[j - 1]) / (h * h);
            let log = if v[j].abs() > 0.0 { 2.0 * v[j].abs().ln() } else { 0.0 };
            (-d2 + p.omega * v[j] - v[j] * log).abs()
        })
        .fold(0.0, f64::max);
    let right = (v[o + 1] - v[o]) / h;
    let left = (v[o] - v[o - 1]) / h;
    StationaryResidual {
        interior,
        jump: (right - left + p.gamma * v[o]).abs(),
    }
}

/// Rotates `u` by a global phase so that `u(0)` is real and nonnegative.
pub fn align_phase(u: &GridFunction) -> GridFunction {
    let c = u.at_origin();
    if c.norm() == 0.0 {
        return u.clone();
    }
    u.scale(Complex64::from_polar(1.0, -c.arg()))
}
