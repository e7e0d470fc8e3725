//! The delta Hamiltonian `H_γ = -d²/dx² - γδ(x)`.
//!
//! The point interaction enters through the quadratic form
//! `t_γ(u, v) = Re∫u'v̄' - γ Re[u(0) v̄(0)]`, discretized with forward
//! differences. In matrix form this is the usual second-difference Laplacian
//! with `-γ/h` added on the origin diagonal; the jump condition
//! `v'(0+) - v'(0-) = -γ v(0)` is then satisfied to `O(h)` by one-sided
//! differences.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{invalid, Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::tridiag::TridiagonalLu;

/// Symmetric tridiagonal matrix of `H_γ` on a [`Grid`].
///
/// Rows `0` and `n-1` are Dirichlet rows: `offdiag[0]` and `offdiag[n-2]` are
/// zero and every operation acts on the interior block only.
#[derive(Debug, Clone)]
pub struct DeltaHamiltonian {
    grid: Grid,
    gamma: f64,
    diag: Vec<f64>,
    offdiag: Vec<f64>,
}

/// `Σ_j h Re[(u_{j+1}-u_j)(v̄_{j+1}-v̄_j)]/h² - γ Re[u(0) v̄(0)]`.
pub fn quadratic_form(u: &GridFunction, v: &GridFunction, gamma: f64) -> Result<f64> {
    u.same_grid(v)?;
    let h = u.grid().spacing();
    let (a, b) = (u.values(), v.values());
    let kinetic: f64 = a
        .windows(2)
        .zip(b.windows(2))
        .map(|(p, q)| ((p[1] - p[0]) * (q[1] - q[0]).conj()).re)
        .sum::<f64>()
        / h;
    Ok(kinetic - gamma * (u.at_origin() * v.at_origin().conj()).re)
}

impl DeltaHamiltonian {
    pub fn new(grid: Grid, gamma: f64) -> Self {
        let n = grid.len();
        let h = grid.spacing();
        let mut diag = vec![2.0 / (h * h); n];
        diag[grid.origin_index()] -= gamma / h;
        let mut offdiag = vec![-1.0 / (h * h); n - 1];
        offdiag[0] = 0.0;
        offdiag[n - 2] = 0.0;
        DeltaHamiltonian {
            grid,
            gamma,
            diag,
            offdiag,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    /// `H u` on the interior; the Dirichlet entries of the result are zero.
    pub fn apply(&self, u: &GridFunction) -> Result<GridFunction> {
        if u.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        let mut out = GridFunction::zeros(self.grid);
        self.apply_into(u.values(), out.values_mut());
        Ok(out)
    }

    pub(crate) fn apply_into(&self, u: &[Complex64], out: &mut [Complex64]) {
        let n = u.len();
        out[0] = Complex64::new(0.0, 0.0);
        out[n - 1] = Complex64::new(0.0, 0.0);
        for j in 1..n - 1 {
            out[j] = u[j] * self.diag[j] + u[j - 1] * self.offdiag[j - 1] + u[j + 1] * self.offdiag[j];
        }
    }

    /// Factors `alpha·I + beta·H` restricted to the interior block.
    pub(crate) fn factor_shifted(&self, alpha: Complex64, beta: Complex64) -> Result<TridiagonalLu> {
        let n = self.grid.len();
        let diag: Vec<Complex64> = (1..n - 1).map(|j| alpha + beta * self.diag[j]).collect();
        let off: Vec<Complex64> = (1..n - 2).map(|j| beta * self.offdiag[j]).collect();
        TridiagonalLu::new(&diag, &off)
    }

    /// Lowest eigenvalue and `L²`-normalized eigenvector by shifted inverse
    /// iteration, started from `e^{-|x|}`.
    ///
    /// The shift sits below the bottom of the spectrum: `-γ²/4 - 0.1` when
    /// `γ > 0`, `-0.1` otherwise.
    pub fn ground_eigenpair(&self) -> Result<(f64, GridFunction)> {
        const MAX_ITER: usize = 50_000;
        const TOL: f64 = 1e-10;
        let shift = if self.gamma > 0.0 {
            -self.gamma * self.gamma / 4.0 - 0.1
        } else {
            -0.1
        };
        let lu = self.factor_shifted(Complex64::new(-shift, 0.0), Complex64::new(1.0, 0.0))?;
        let n = self.grid.len();
        let mut v = GridFunction::sample_real(self.grid, |x| (-x.abs()).exp()).with_dirichlet();
        normalize(&mut v);
        let mut hv = GridFunction::zeros(self.grid);
        let mut residual = f64::INFINITY;
        for _ in 0..MAX_ITER {
            let mut interior = v.values()[1..n - 1].to_vec();
            lu.solve_in_place(&mut interior);
            v.values_mut()[1..n - 1].copy_from_slice(&interior);
            normalize(&mut v);

            self.apply_into(v.values(), hv.values_mut());
            let lambda = hv.inner_re(&v)?;
            let r = &hv - &(&v * lambda);
            residual = r.l2_norm();
            if residual <= TOL {
                // Fix the sign so that the bulk of the mode is positive.
                let total: f64 = v.values().iter().map(|z| z.re).sum();
                if total < 0.0 {
                    v = &v * -1.0;
                }
                return Ok((lambda, v));
            }
        }
        Err(Error::NoConvergence {
            iterations: MAX_ITER,
            residual,
        })
    }
}

fn normalize(v: &mut GridFunction) {
    let norm = v.l2_norm();
    for z in v.values_mut() {
        *z /= norm;
    }
}

/// Explicit `e^{-itH_γ}` for a repulsive point interaction (`γ < 0`), used as
/// an independent check of the time stepper's linear part.
///
/// Odd data do not see the delta and evolve freely. For the even part `e`, the
/// jump condition reads `e'(0+) + (γ/2) e(0) = 0`, so `e' + (γ/2)e` is a free
/// Dirichlet solution on the half line. Extending `e` to `x < 0` by
///
/// ```text
/// ψ(x) = e(|x|) - 2 (e·1_[0,|x|] ∗ ρ_γ)(|x|),   ρ_γ(s) = -(γ/2) e^{γ s/2} 1_{s>=0}
/// ```
///
/// makes `ψ' + (γ/2)ψ` odd, and the free evolution of `ψ` restricted to
/// `x > 0` is the even part of the solution. Free evolution is exact in
/// Fourier space on a padded periodic box; the kernel tail is cut where
/// `e^{γ s/2} < 1e-16`.
pub fn linear_propagator_oracle(u0: &GridFunction, t: f64, gamma: f64) -> Result<GridFunction> {
    if !(gamma < 0.0) {
        return Err(invalid("gamma", "explicit propagator is only available for gamma < 0"));
    }
    let grid = *u0.grid();
    let half = grid.origin_index();
    // The extension has a derivative jump at 0; resolving it on a finer mesh
    // keeps the oracle's own error well below the stepper's.
    let h = grid.spacing() / OVERSAMPLE as f64;
    let fine = spectral_refine(u0.values(), OVERSAMPLE);
    let fine_half = OVERSAMPLE * half;
    let fine_len = fine.len();

    // Even and odd parts on x >= 0 (index k <-> x = k h).
    let even: Vec<Complex64> = (0..=fine_half)
        .map(|k| 0.5 * (fine[fine_half + k] + fine[fine_half - k]))
        .collect();
    let odd_full: Vec<Complex64> = (0..fine_len)
        .map(|j| 0.5 * (fine[j] - fine[fine_len - 1 - j]))
        .collect();

    // Padding: the extension decays like e^{γ|x|/2}.
    const MAX_HALF_NODES: usize = 1 << 21;
    let tail = 2.0 * (1e16f64).ln() / gamma.abs();
    let pad_nodes = ((tail / h).ceil() as usize).min(MAX_HALF_NODES);
    let box_half = (fine_half + pad_nodes).next_power_of_two();
    let size = 2 * box_half;

    // Extension for x < 0: χ(y) = γ ∫_0^y e^{γ(y-r)/2} e(r) dr, y = -x.
    let chi = robin_extension(&even, gamma, h, box_half);

    // Periodic layout: index i <-> x = (i - box_half) h.
    let mut psi = vec![Complex64::new(0.0, 0.0); size];
    let mut odd = vec![Complex64::new(0.0, 0.0); size];
    for k in 0..box_half {
        let e = even.get(k).copied().unwrap_or_default();
        psi[box_half + k] = e;
        if k > 0 {
            psi[box_half - k] = e + chi[k];
        }
    }
    odd[box_half - fine_half..box_half - fine_half + fine_len].copy_from_slice(&odd_full);

    free_evolve(&mut psi, h, t);
    free_evolve(&mut odd, h, t);

    let values = (0..grid.len())
        .map(|j| {
            let k = OVERSAMPLE * j.abs_diff(half);
            psi[box_half + k] + odd[box_half - fine_half + OVERSAMPLE * j]
        })
        .collect();
    GridFunction::new(grid, values)
}

const OVERSAMPLE: usize = 8;

/// Trigonometric interpolation of samples (assumed to vanish near both ends)
/// onto a mesh `factor` times finer on the same interval.
fn spectral_refine(values: &[Complex64], factor: usize) -> Vec<Complex64> {
    let n = values.len();
    let size = (2 * n).next_power_of_two();
    let big = factor * size;
    let mut planner = FftPlanner::new();
    let mut buf = vec![Complex64::new(0.0, 0.0); size];
    buf[..n].copy_from_slice(values);
    planner.plan_fft_forward(size).process(&mut buf);
    let mut spectrum = vec![Complex64::new(0.0, 0.0); big];
    let nyq = size / 2;
    spectrum[..nyq].copy_from_slice(&buf[..nyq]);
    spectrum[big - nyq + 1..].copy_from_slice(&buf[nyq + 1..]);
    spectrum[nyq] = 0.5 * buf[nyq];
    spectrum[big - nyq] = 0.5 * buf[nyq];
    planner.plan_fft_inverse(big).process(&mut spectrum);
    let scale = 1.0 / size as f64;
    spectrum[..factor * (n - 1) + 1].iter().map(|z| z * scale).collect()
}

/// `χ(y_k)` for `k = 0..=len` by exact propagation of the exponential factor
/// and 4-point Gauss–Legendre on cubic interpolants of `e`.
fn robin_extension(even: &[Complex64], gamma: f64, h: f64, len: usize) -> Vec<Complex64> {
    let sample = |k: isize| -> Complex64 {
        let k = k.unsigned_abs();
        even.get(k).copied().unwrap_or_default()
    };
    // Gauss–Legendre nodes/weights on [0, 1].
    let gl_x = [
        0.5 - 0.5 * 0.861_136_311_594_052_6,
        0.5 - 0.5 * 0.339_981_043_584_856_3,
        0.5 + 0.5 * 0.339_981_043_584_856_3,
        0.5 + 0.5 * 0.861_136_311_594_052_6,
    ];
    let gl_w = [
        0.5 * 0.347_854_845_137_453_9,
        0.5 * 0.652_145_154_862_546_1,
        0.5 * 0.652_145_154_862_546_1,
        0.5 * 0.347_854_845_137_453_9,
    ];
    // Cubic Lagrange weights on nodes -1, 0, 1, 2 at local coordinate s.
    let lagrange = |s: f64| {
        [
            -s * (s - 1.0) * (s - 2.0) / 6.0,
            (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
            -(s + 1.0) * s * (s - 2.0) / 2.0,
            (s + 1.0) * s * (s - 1.0) / 6.0,
        ]
    };
    let decay = (0.5 * gamma * h).exp();
    let mut chi = vec![Complex64::new(0.0, 0.0); len + 1];
    for k in 0..len {
        let ki = k as isize;
        let nodes = [sample(ki - 1), sample(ki), sample(ki + 1), sample(ki + 2)];
        let mut incr = Complex64::new(0.0, 0.0);
        if nodes.iter().any(|z| z.norm_sqr() > 0.0) {
            for (&s, &w) in gl_x.iter().zip(&gl_w) {
                let l = lagrange(s);
                let e: Complex64 = (0..4).map(|i| nodes[i] * l[i]).sum();
                incr += e * (w * (0.5 * gamma * h * (1.0 - s)).exp());
            }
        }
        chi[k + 1] = chi[k] * decay + incr * (gamma * h);
    }
    chi
}

/// `e^{it∂²}` on a periodic box by FFT.
fn free_evolve(data: &mut [Complex64], h: f64, t: f64) {
    let size = data.len();
    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(size);
    let inverse = planner.plan_fft_inverse(size);
    forward.process(data);
    let dk = 2.0 * std::f64::consts::PI / (size as f64 * h);
    for (m, z) in data.iter_mut().enumerate() {
        let signed = if m <= size / 2 { m as f64 } else { m as f64 - size as f64 };
        let k = signed * dk;
        *z *= Complex64::from_polar(1.0 / size as f64, -k * k * t);
    }
    inverse.process(data);
}
