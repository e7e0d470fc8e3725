//! Uniform mesh on `[-L, L]` with a node at the origin, trapezoid quadrature
//! and the discrete `L²`/`H¹` norms used everywhere else.
//!
//! End nodes carry homogeneous Dirichlet data. Every function of interest
//! decays at least exponentially, so truncating the line at `L = 12` is
//! invisible at double precision for Gaussian-type profiles.

use num_complex::Complex64;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    half_width: f64,
    n: usize,
    h: f64,
}

impl Grid {
    /// Builds the mesh `x_j = -L + j h`, `h = 2L/(n-1)`. `n` must be odd so
    /// that `x = 0` is a node.
    pub fn new(half_width: f64, n: usize) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "half-width must be positive and finite, got {half_width}"
            )));
        }
        if n < 3 {
            return Err(Error::InvalidGrid(format!("need at least 3 nodes, got {n}")));
        }
        if n % 2 == 0 {
            return Err(Error::InvalidGrid(format!(
                "node count must be odd so that x = 0 is a node, got {n}"
            )));
        }
        Ok(Grid {
            half_width,
            n,
            h: 2.0 * half_width / (n - 1) as f64,
        })
    }

    /// Grid on `[-L, L]` whose spacing is as close as possible to `h` from below.
    pub fn with_spacing(half_width: f64, h: f64) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::InvalidGrid(format!("spacing must be positive, got {h}")));
        }
        let cells = (half_width / h).ceil() as usize;
        Grid::new(half_width, 2 * cells.max(1) + 1)
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn origin_index(&self) -> usize {
        (self.n - 1) / 2
    }

    /// Node coordinate. Measured from the origin so that `x(origin) == 0.0`
    /// exactly and the mesh is exactly symmetric.
    pub fn x(&self, j: usize) -> f64 {
        let o = self.origin_index();
        if j >= o {
            (j - o) as f64 * self.h
        } else {
            -((o - j) as f64) * self.h
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |j| self.x(j))
    }

    /// Same interval, spacing halved: `n -> 2n - 1`. Every old node survives.
    pub fn refined(&self) -> Grid {
        Grid {
            half_width: self.half_width,
            n: 2 * self.n - 1,
            h: self.h / 2.0,
        }
    }

    /// Trapezoid rule `Σ h (g_j + g_{j+1}) / 2`.
    pub fn integrate(&self, g: &[f64]) -> f64 {
        debug_assert_eq!(g.len(), self.n);
        self.integrate_with(g.len(), |j| g[j])
    }

    pub(crate) fn integrate_with(&self, len: usize, g: impl Fn(usize) -> f64) -> f64 {
        let interior: f64 = (1..len - 1).map(&g).sum();
        self.h * (interior + 0.5 * (g(0) + g(len - 1)))
    }
}

/// Complex samples on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(GridFunction { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        GridFunction {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn sample(grid: Grid, f: impl Fn(f64) -> Complex64) -> Self {
        GridFunction {
            values: grid.nodes().map(f).collect(),
            grid,
        }
    }

    pub fn sample_real(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        Self::sample(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn at_origin(&self) -> Complex64 {
        self.values[self.grid.origin_index()]
    }

    pub fn same_grid(&self, other: &GridFunction) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> GridFunction {
        GridFunction {
            grid: self.grid,
            values: self.values.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn scale(&self, c: Complex64) -> GridFunction {
        self.map(|z| c * z)
    }

    /// `∫ f(u(x)) dx` by the trapezoid rule.
    pub fn integrate_pointwise(&self, f: impl Fn(Complex64) -> f64) -> f64 {
        self.grid
            .integrate_with(self.values.len(), |j| f(self.values[j]))
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.integrate_pointwise(|z| z.norm_sqr())
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// `Σ_j h |u_{j+1} - u_j|² / h²`: the forward-difference Dirichlet form.
    pub fn h1_seminorm_sq(&self) -> f64 {
        let h = self.grid.spacing();
        self.values
            .windows(2)
            .map(|w| (w[1] - w[0]).norm_sqr())
            .sum::<f64>()
            / h
    }

    pub fn h1_norm_sq(&self) -> f64 {
        self.l2_norm_sq() + self.h1_seminorm_sq()
    }

    pub fn h1_norm(&self) -> f64 {
        self.h1_norm_sq().sqrt()
    }

    /// Real `L²` pairing `Re ∫ u v̄ dx`.
    pub fn inner_re(&self, other: &GridFunction) -> Result<f64> {
        self.same_grid(other)?;
        Ok(self
            .grid
            .integrate_with(self.len(), |j| (self.values[j] * other.values[j].conj()).re))
    }

    /// Complex `L²` pairing `∫ u v̄ dx`.
    pub fn inner(&self, other: &GridFunction) -> Result<Complex64> {
        self.same_grid(other)?;
        let re = self
            .grid
            .integrate_with(self.len(), |j| (self.values[j] * other.values[j].conj()).re);
        let im = self
            .grid
            .integrate_with(self.len(), |j| (self.values[j] * other.values[j].conj()).im);
        Ok(Complex64::new(re, im))
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    /// Zeroes the two Dirichlet end nodes.
    pub fn with_dirichlet(mut self) -> GridFunction {
        let n = self.values.len();
        self.values[0] = Complex64::new(0.0, 0.0);
        self.values[n - 1] = Complex64::new(0.0, 0.0);
        self
    }

    /// `u(-x)` on the same symmetric mesh.
    pub fn reflected(&self) -> GridFunction {
        let mut values = self.values.clone();
        values.reverse();
        GridFunction {
            grid: self.grid,
            values,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Index<usize> for GridFunction {
    type Output = Complex64;
    fn index(&self, j: usize) -> &Complex64 {
        &self.values[j]
    }
}

impl IndexMut<usize> for GridFunction {
    fn index_mut(&mut self, j: usize) -> &mut Complex64 {
        &mut self.values[j]
    }
}

// Arithmetic panics on mismatched grids; use `same_grid` first where the
// grids come from user input.
impl Add for &GridFunction {
    type Output = GridFunction;
    fn add(self, rhs: &GridFunction) -> GridFunction {
        assert_eq!(self.grid, rhs.grid, "grid mismatch");
        GridFunction {
            grid: self.grid,
            values: self.values.iter().zip(&rhs.values).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &GridFunction {
    type Output = GridFunction;
    fn sub(self, rhs: &GridFunction) -> GridFunction {
        assert_eq!(self.grid, rhs.grid, "grid mismatch");
        GridFunction {
            grid: self.grid,
            values: self.values.iter().zip(&rhs.values).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul<f64> for &GridFunction {
    type Output = GridFunction;
    fn mul(self, c: f64) -> GridFunction {
        self.map(|z| z * c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn smallest_grid() {
        let g = Grid::new(1.0, 3).unwrap();
        let xs: Vec<f64> = g.nodes().collect();
        assert_eq!(xs, vec![-1.0, 0.0, 1.0]);
        assert_eq!(g.spacing(), 1.0);
        assert_eq!(g.origin_index(), 1);
    }

    #[test]
    fn default_spacing() {
        let g = Grid::new(12.0, 1537).unwrap();
        assert_eq!(g.spacing(), 0.015625);
        assert_eq!(g.x(0), -12.0);
        assert_eq!(g.x(1536), 12.0);
        assert_eq!(g.x(g.origin_index()), 0.0);
    }

    #[test]
    fn rejects_even_and_tiny() {
        assert!(matches!(Grid::new(1.0, 4), Err(Error::InvalidGrid(_))));
        assert!(Grid::new(1.0, 1).is_err());
        assert!(Grid::new(-1.0, 3).is_err());
    }

    #[test]
    fn nodes_strictly_increasing() {
        let g = Grid::new(3.0, 61).unwrap();
        let xs: Vec<f64> = g.nodes().collect();
        assert!(xs.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn refinement_keeps_origin() {
        let g = Grid::new(12.0, 1537).unwrap();
        let r = g.refined();
        assert_eq!(r.len(), 3073);
        assert_eq!(r.spacing(), g.spacing() / 2.0);
        assert_eq!(r.x(r.origin_index()), 0.0);
        for j in (0..g.len()).step_by(97) {
            assert_eq!(r.x(2 * j), g.x(j));
        }
    }

    #[test]
    fn integrates_constants_and_zero() {
        let g = Grid::new(2.5, 11).unwrap();
        assert_relative_eq!(g.integrate(&vec![1.0; 11]), 5.0, epsilon = 1e-14);
        assert_eq!(g.integrate(&vec![0.0; 11]), 0.0);
    }

    #[test]
    fn gaussian_integral() {
        let g = Grid::new(12.0, 1537).unwrap();
        let f: Vec<f64> = g.nodes().map(|x| (-x * x).exp()).collect();
        // Trapezoid on a rapidly decaying analytic function is spectrally
        // accurate; the reference is sqrt(pi).
        assert!((g.integrate(&f) - std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn exponential_norms() {
        // e^{-γ|x|/2} with γ = 2: ‖u‖² = 2/γ = 1, ‖u'‖² = γ/2 = 1.
        let g = Grid::new(12.0, 1537).unwrap();
        let u = GridFunction::sample_real(g, |x| (-x.abs()).exp());
        let h = g.spacing();
        assert!((u.l2_norm_sq() - 1.0).abs() < h);
        assert!((u.h1_seminorm_sq() - 1.0).abs() < h);
        let z = GridFunction::zeros(g);
        assert_eq!((z.l2_norm_sq(), z.h1_seminorm_sq()), (0.0, 0.0));
    }

    #[test]
    fn homogeneity() {
        let g = Grid::new(4.0, 81).unwrap();
        let u = GridFunction::sample(g, |x| Complex64::new((-x * x).exp(), x.sin()));
        let c = Complex64::new(0.3, -1.7);
        assert_relative_eq!(
            u.scale(c).l2_norm_sq(),
            c.norm_sqr() * u.l2_norm_sq(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn wrong_length_rejected() {
        let g = Grid::new(1.0, 5).unwrap();
        assert!(GridFunction::new(g, vec![Complex64::new(0.0, 0.0); 4]).is_err());
    }
}
