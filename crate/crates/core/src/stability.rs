//! Orbital-stability harness: the modulated distance
//! `inf_θ ‖u - e^{iθ}φ‖_W` and perturbation experiments around a standing
//! wave.

use std::f64::consts::TAU;
use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{evolve_observed, IntegratorConfig};
use crate::error::{invalid, Result};
use crate::functionals::{GaussonReference, PhysParams};
use crate::grid::{Grid, GridFunction};
use crate::orlicz::w_norm;

const COARSE_PHASES: usize = 64;
const PHASE_WIDTH: f64 = 1e-10;

/// Charge and `E_m` drifts beyond these invalidate a stability report.
pub const CHARGE_DRIFT_LIMIT: f64 = 1e-10;
pub const ENERGY_DRIFT_LIMIT: f64 = 1e-4;

pub const EXPLORATORY_LABEL: &str = "exploratory: stability open on W(ℝ) for γ<0";

/// Returns `(θ*, dist)` with `θ* ∈ [0, 2π)` minimizing `‖u - e^{iθ}φ‖_W`.
///
/// 64 equispaced phases plus the `L²`-optimal one `arg ∫u φ̄` seed a golden
/// section search on the neighbourhood of the best seed.
pub fn modulated_distance(u: &GridFunction, phi: &GridFunction) -> Result<(f64, f64)> {
    u.same_grid(phi)?;
    let objective = |theta: f64| w_norm(&(u - &phi.scale(Complex64::cis(theta))));

    let l2_phase = u.inner(phi)?.arg();
    let mut best = (l2_phase, objective(l2_phase));
    for k in 0..COARSE_PHASES {
        let theta = TAU * k as f64 / COARSE_PHASES as f64;
        let value = objective(theta);
        if value < best.1 {
            best = (theta, value);
        }
    }

    let spacing = TAU / COARSE_PHASES as f64;
    let (mut a, mut b) = (best.0 - spacing, best.0 + spacing);
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (objective(c), objective(d));
    while b - a > PHASE_WIDTH {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = objective(d);
        }
    }
    for candidate in [(c, fc), (d, fd)] {
        if candidate.1 < best.1 {
            best = candidate;
        }
    }
    Ok((best.0.rem_euclid(TAU), best.1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationKind {
    PhaseKick,
    AmplitudeScale,
    Bump,
    RandomH1,
}

impl PerturbationKind {
    pub fn name(self) -> &'static str {
        match self {
            PerturbationKind::PhaseKick => "phase_kick",
            PerturbationKind::AmplitudeScale => "amplitude_scale",
            PerturbationKind::Bump => "bump",
            PerturbationKind::RandomH1 => "random_h1",
        }
    }
}

impl std::str::FromStr for PerturbationKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "phase_kick" => Ok(PerturbationKind::PhaseKick),
            "amplitude_scale" => Ok(PerturbationKind::AmplitudeScale),
            "bump" => Ok(PerturbationKind::Bump),
            "random_h1" => Ok(PerturbationKind::RandomH1),
            other => Err(format!("unknown perturbation '{other}' (expected phase_kick, amplitude_scale, bump or random_h1)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PerturbationSpec {
    pub kind: PerturbationKind,
    pub epsilon: f64,
    pub seed: u64,
    pub bump_center: f64,
    pub bump_width: f64,
}

impl PerturbationSpec {
    pub fn new(kind: PerturbationKind, epsilon: f64) -> Self {
        PerturbationSpec {
            kind,
            epsilon,
            seed: 0,
            bump_center: 1.0,
            bump_width: 0.5,
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        PerturbationSpec { seed, ..self }
    }

    /// `u0` with `‖u0 - φ‖_W = ε`.
    pub fn apply(&self, phi: &GridFunction) -> Result<GridFunction> {
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(invalid("epsilon", format!("must be nonnegative, got {}", self.epsilon)));
        }
        let eps = self.epsilon;
        let size = w_norm(phi);
        let grid = *phi.grid();
        let u0 = match self.kind {
            // |e^{iα} - 1| = 2 sin(α/2), and W is a norm.
            PerturbationKind::PhaseKick => {
                let chord = eps / size;
                if chord > 2.0 {
                    return Err(invalid("epsilon", format!("phase kick cannot move {eps} away from an orbit of size {size}")));
                }
                phi.scale(Complex64::cis(2.0 * (0.5 * chord).asin()))
            }
            PerturbationKind::AmplitudeScale => phi * (1.0 + eps / size),
            PerturbationKind::Bump => {
                if !(self.bump_width > 0.0) {
                    return Err(invalid("bump_width", format!("must be positive, got {}", self.bump_width)));
                }
                let (c, w) = (self.bump_center, self.bump_width);
                let bump = GridFunction::sample_real(grid, |x| (-0.5 * ((x - c) / w).powi(2)).exp()).with_dirichlet();
                add_normalized(phi, &bump, eps)
            }
            PerturbationKind::RandomH1 => add_normalized(phi, &random_h1_direction(grid, self.seed), eps),
        };
        Ok(u0)
    }
}

fn add_normalized(phi: &GridFunction, direction: &GridFunction, eps: f64) -> GridFunction {
    let scale = if eps == 0.0 { 0.0 } else { eps / w_norm(direction) };
    phi + &(direction * scale)
}

/// A smooth complex function: eight Gaussian packets with random centres in
/// `[-4, 4]`, widths in `[0.4, 2]`, wavenumbers in `[-3, 3]` and complex
/// amplitudes in the unit square.
pub fn random_h1_direction(grid: Grid, seed: u64) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let packets: Vec<(f64, f64, f64, Complex64)> = (0..8)
        .map(|_| {
            (
                rng.gen_range(-4.0..4.0),
                rng.gen_range(0.4..2.0),
                rng.gen_range(-3.0..3.0),
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            )
        })
        .collect();
    GridFunction::sample(grid, |x| {
        packets
            .iter()
            .map(|&(c, w, k, a)| a * Complex64::cis(k * x) * (-0.5 * ((x - c) / w).powi(2)).exp())
            .sum()
    })
    .with_dirichlet()
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct DistanceSample {
    pub t: f64,
    pub theta: f64,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct StabilityReport {
    pub params: PhysParams,
    pub kind: PerturbationKind,
    pub epsilon: f64,
    pub seed: u64,
    /// Supremum over the recorded times only.
    pub sup_distance: f64,
    pub ratio: f64,
    pub distance_trace: Vec<DistanceSample>,
    pub charge_drift: f64,
    pub energy_drift: f64,
    /// Drifts exceeded the integrator bounds; the report is not evidence.
    pub invalid: bool,
    /// Unperturbed sup distance at the same resolution, when measured.
    pub noise_floor: Option<f64>,
    pub label: Option<&'static str>,
}

/// Evolves `φ + perturbation` and tracks its distance to the orbit of `φ`.
/// `phi` is usually the sampled peak-Gausson; it is passed in so callers can
/// substitute a discrete profile.
pub fn stability_experiment(phi: &GridFunction, p: &PhysParams, spec: &PerturbationSpec, cfg: &IntegratorConfig) -> Result<StabilityReport> {
    let u0 = spec.apply(phi)?;
    let mut trace = Vec::new();
    let mut first: Option<(f64, f64)> = None;
    let mut charge_drift: f64 = 0.0;
    let mut energy_drift: f64 = 0.0;
    let mut failure = None;
    evolve_observed(&u0, p, cfg, |record, u| {
        let (c0, e0) = *first.get_or_insert((record.charge, record.energy));
        charge_drift = charge_drift.max((record.charge / c0 - 1.0).abs());
        energy_drift = energy_drift.max(((record.energy - e0) / e0).abs());
        match modulated_distance(u, phi) {
            Ok((theta, distance)) => trace.push(DistanceSample { t: record.t, theta, distance }),
            Err(e) => failure = Some(e),
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    let sup_distance = trace.iter().map(|s| s.distance).fold(0.0, f64::max);
    Ok(StabilityReport {
        params: *p,
        kind: spec.kind,
        epsilon: spec.epsilon,
        seed: spec.seed,
        sup_distance,
        ratio: if spec.epsilon > 0.0 { sup_distance / spec.epsilon } else { f64::INFINITY },
        distance_trace: trace,
        charge_drift,
        energy_drift,
        invalid: charge_drift > CHARGE_DRIFT_LIMIT || energy_drift > ENERGY_DRIFT_LIMIT,
        noise_floor: None,
        label: (p.gamma <= 0.0).then_some(EXPLORATORY_LABEL),
    })
}

/// Unperturbed runs of the sampled Gausson at `(h, dt)` and `(h/2, dt/2)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct NoiseFloor {
    /// `sup_t dist` at the working resolution.
    pub base: f64,
    /// The same on the refined pair.
    pub refined: f64,
    /// Discretization bound at the working resolution, `2|base - refined|`.
    /// Valid for any convergence order `p ≥ 1`, since then
    /// `|e(h) - e(h/2)| ≥ e(h)/2`.
    pub bound: f64,
}

pub fn noise_floor(p: &PhysParams, grid: Grid, cfg: &IntegratorConfig) -> Result<NoiseFloor> {
    let reference = GaussonReference::from_params(p);
    let unperturbed = |grid: Grid, cfg: &IntegratorConfig| -> Result<f64> {
        let phi = reference.sample(grid);
        let spec = PerturbationSpec::new(PerturbationKind::AmplitudeScale, 0.0);
        Ok(stability_experiment(&phi, p, &spec, cfg)?.sup_distance)
    };
    let base = unperturbed(grid, cfg)?;
    let fine_cfg = IntegratorConfig {
        dt: 0.5 * cfg.dt,
        record_every: 2 * cfg.record_every,
        ..*cfg
    };
    let refined = unperturbed(grid.refined(), &fine_cfg)?;
    Ok(NoiseFloor {
        base,
        refined,
        bound: 2.0 * (base - refined).abs(),
    })
}

pub fn write_distance_csv(trace: &[DistanceSample], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "t,theta,distance")?;
    for s in trace {
        writeln!(out, "{:.16e},{:.16e},{:.16e}", s.t, s.theta, s.distance)?;
    }
    Ok(())
}
