//! Subcommand drivers. Each returns the list of checks it evaluated and
//! writes its artifacts (all embedding the resolved configuration) into the
//! output directory.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde_json::{json, Value};

use lognls::dynamics::{evolve, write_trace_csv, IntegratorConfig};
use lognls::functionals::{nehari, pointwise_residual, GaussonReference, PhysParams};
use lognls::groundstate::{continuation_sweep, shape_defects, solve_ground_state, write_sweep_csv, SolverSettings};
use lognls::operator::DeltaHamiltonian;
use lognls::orlicz::{branch_point, entropy_split, log_sobolev_gap, luxemburg_norm, trace_bound_gap, young_a_prime};
use lognls::stability::{stability_experiment, write_distance_csv, PerturbationSpec, EXPLORATORY_LABEL};
use lognls::{Grid, GridFunction};

use crate::config::ExperimentConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Verify,
    Groundstate,
    Spectrum,
    Evolve,
    Stability,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Verify => "verify",
            Command::Groundstate => "groundstate",
            Command::Spectrum => "spectrum",
            Command::Evolve => "evolve",
            Command::Stability => "stability",
            Command::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// Human-readable acceptance condition, e.g. `<= 1e-3`.
    pub limit: String,
    pub passed: bool,
}

impl Check {
    fn at_most(name: &str, value: f64, limit: f64) -> Check {
        Check {
            name: name.to_string(),
            value,
            limit: format!("<= {limit:e}"),
            passed: value <= limit,
        }
    }

    fn at_least(name: &str, value: f64, limit: f64) -> Check {
        Check {
            name: name.to_string(),
            value,
            limit: format!(">= {limit:e}"),
            passed: value >= limit,
        }
    }

    fn between(name: &str, value: f64, lo: f64, hi: f64) -> Check {
        Check {
            name: name.to_string(),
            value,
            limit: format!("in ({lo:e}, {hi:e})"),
            passed: lo < value && value < hi,
        }
    }

    fn holds(name: &str, ok: bool) -> Check {
        Check {
            name: name.to_string(),
            value: if ok { 1.0 } else { 0.0 },
            limit: "true".to_string(),
            passed: ok,
        }
    }
}

pub type RunResult = Result<Vec<Check>, Box<dyn std::error::Error>>;

pub fn run(command: Command, config: &ExperimentConfig) -> RunResult {
    fs::create_dir_all(&config.output_dir)?;
    fs::write(config.output_dir.join("config.resolved"), config.resolved())?;
    let grid = Grid::new(config.half_width, config.n)?;
    let params = PhysParams::new(config.gamma, config.omega);
    match command {
        Command::Verify => verify(config, grid, &params),
        Command::Groundstate => groundstate(config, grid, &params),
        Command::Spectrum => spectrum(config, grid),
        Command::Evolve => evolve_cmd(config, grid, &params),
        Command::Stability => stability(config, grid, &params),
        Command::Sweep => sweep(config, grid),
    }
}

/// Resolved config as a JSON object with typed values.
pub fn config_json(config: &ExperimentConfig) -> Value {
    json!({
        "gamma": config.gamma,
        "omega": config.omega,
        "L": config.half_width,
        "n": config.n,
        "dt": config.dt,
        "T": config.t_final,
        "m_reg": config.m_reg,
        "tol": config.tol,
        "seed": config.seed,
        "epsilon": config.epsilon,
        "perturbation": config.perturbation.name(),
        "output_dir": config.output_dir.display().to_string(),
        "record_every": config.record_every,
        "sweep_omegas": config.sweep_omegas,
        "sweep_gammas": config.sweep_gammas,
    })
}

fn write_json(path: &Path, value: &Value) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("plain JSON values");
    text.push('\n');
    fs::write(path, text)
}

/// A CSV file whose leading `#` lines carry the resolved configuration.
fn csv_file(config: &ExperimentConfig, name: &str) -> std::io::Result<BufWriter<File>> {
    let mut out = BufWriter::new(File::create(config.output_dir.join(name))?);
    for line in config.resolved().lines() {
        writeln!(out, "# {line}")?;
    }
    Ok(out)
}

fn report(config: &ExperimentConfig, command: Command, checks: &[Check], extra: Value) -> std::io::Result<()> {
    write_json(
        &config.output_dir.join("report.json"),
        &json!({
            "command": command.name(),
            "config": config_json(config),
            "checks": checks,
            "results": extra,
        }),
    )
}

fn verify(config: &ExperimentConfig, grid: Grid, p: &PhysParams) -> RunResult {
    let reference = GaussonReference::from_params(p);
    let phi = reference.sample(grid);
    let mass = phi.l2_norm_sq();
    let residual = pointwise_residual(&phi, p);
    let mut checks = vec![
        Check::at_most("gausson interior residual", residual.interior, 1e-3),
        Check::at_most("gausson jump defect", residual.jump, 5e-2),
        Check::at_most("|I(phi)| / |phi|^2", nehari(&phi, p).abs() / mass, 1e-2),
        Check::at_most(
            "mass closed form vs quadrature (relative)",
            (reference.mass / reference.quadrature_mass() - 1.0).abs(),
            1e-10,
        ),
        Check::at_most("sampled mass vs closed form (relative)", (mass / reference.mass - 1.0).abs(), 1e-3),
    ];
    if p.gamma > 0.0 {
        checks.push(Check::between("d lower/upper bounds", reference.d_value, reference.d_lower_bound(), reference.d_free()));
        checks.push(Check::at_least("trace bound gap on phi", trace_bound_gap(&phi, p.gamma)?, -1e-6));
    }

    let s = branch_point();
    let left = -s * s * (s * s).ln();
    let right = 3.0 * s * s + 4.0 * (-3f64).exp() * s - (-6f64).exp();
    let six = 6.0 * (-6f64).exp();
    checks.push(Check::at_most("A continuity at e^-3 (relative)", ((left - six) / six).abs().max(((right - six) / six).abs()), 1e-12));
    let ten = 10.0 * (-3f64).exp();
    checks.push(Check::at_most("A' at e^-3 (relative)", ((young_a_prime(s) - ten) / ten).abs(), 1e-12));
    checks.push(Check::at_most("F = B - A at s = 1", entropy_split(1.0).f.abs(), 1e-15));

    let norm = luxemburg_norm(&phi);
    let scaled = luxemburg_norm(&(&phi * 3.5));
    checks.push(Check::at_most("Luxemburg homogeneity (relative)", (scaled / (3.5 * norm) - 1.0).abs(), 1e-8));
    let gap = log_sobolev_gap(&phi, (std::f64::consts::PI / 2.0).sqrt())?;
    checks.push(Check::at_least("log-Sobolev gap / |phi|_H1^2", gap / phi.h1_norm_sq(), -1e-8));

    report(
        config,
        Command::Verify,
        &checks,
        json!({
            "center_value": reference.center_value,
            "mass": reference.mass,
            "d_value": reference.d_value,
            "interior_residual": residual.interior,
            "jump_defect": residual.jump,
        }),
    )?;
    Ok(checks)
}

fn groundstate(config: &ExperimentConfig, grid: Grid, p: &PhysParams) -> RunResult {
    let mut settings = SolverSettings::for_gamma(p.gamma);
    settings.tol = config.tol;
    if p.gamma < 0.0 {
        // No minimizer exists; a bounded exploratory run.
        settings.max_iter = 20_000;
    }
    let result = solve_ground_state(p, grid, &settings)?;
    let reference = GaussonReference::from_params(p);
    let phi = reference.sample(grid);
    let sup_error = (&result.profile - &phi).sup_norm() / phi.sup_norm();
    let shape = shape_defects(&result.profile);

    let mut out = csv_file(config, "groundstate.csv")?;
    writeln!(out, "x,re,im,analytic")?;
    for j in 0..grid.len() {
        let z = result.profile[j];
        writeln!(out, "{:.16e},{:.16e},{:.16e},{:.16e}", grid.x(j), z.re, z.im, phi[j].re)?;
    }
    out.flush()?;

    let checks = if p.gamma >= 0.0 {
        vec![
            Check::holds("converged", result.converged),
            Check::at_most("final residual", result.final_residual, config.tol),
            Check::at_most("sup error vs analytic (relative)", sup_error, 1e-3),
            Check::at_most("d vs closed form (relative)", (result.d_estimate / reference.d_value - 1.0).abs(), 1e-3),
            Check::at_most("positivity defect", shape.imaginary.max(shape.negativity), 1e-6),
            Check::at_most("evenness defect", shape.evenness, 1e-6),
        ]
    } else {
        Vec::new()
    };
    report(
        config,
        Command::Groundstate,
        &checks,
        json!({
            "d_estimate": result.d_estimate,
            "d_closed_form": reference.d_value,
            "iterations": result.iterations,
            "final_residual": result.final_residual,
            "converged": result.converged,
            "sup_error": sup_error,
            "drift_detected": result.drift_detected,
            "label": (p.gamma < 0.0).then_some("exploratory: no minimizer exists for γ<0"),
        }),
    )?;
    Ok(checks)
}

fn spectrum(config: &ExperimentConfig, grid: Grid) -> RunResult {
    let ham = DeltaHamiltonian::new(grid, config.gamma);
    let (lambda, vector) = ham.ground_eigenpair()?;
    let mut out = csv_file(config, "spectrum.csv")?;
    writeln!(out, "x,eigenvector")?;
    for j in 0..grid.len() {
        writeln!(out, "{:.16e},{:.16e}", grid.x(j), vector[j].re)?;
    }
    out.flush()?;

    let (checks, expected) = if config.gamma > 0.0 {
        let expected = -0.25 * config.gamma * config.gamma;
        (vec![Check::at_most("|lambda + gamma^2/4|", (lambda - expected).abs(), 5e-2)], Some(expected))
    } else {
        (vec![Check::at_least("lowest eigenvalue (no bound state)", lambda, -1e-6)], None)
    };
    println!("ground eigenvalue {lambda:.12} (expected {})", expected.map_or("none, γ <= 0".to_string(), |e| format!("{e:.12}")));
    report(
        config,
        Command::Spectrum,
        &checks,
        json!({ "eigenvalue": lambda, "expected": expected, "error": expected.map(|e| (lambda - e).abs()) }),
    )?;
    Ok(checks)
}

fn integrator(config: &ExperimentConfig) -> IntegratorConfig {
    IntegratorConfig::new(config.dt, config.t_final)
        .recording_every(config.record_every)
        .with_reg(config.reg())
}

fn evolve_cmd(config: &ExperimentConfig, grid: Grid, p: &PhysParams) -> RunResult {
    let phi = GaussonReference::from_params(p).sample(grid);
    let (last, trace) = evolve(&phi, p, &integrator(config))?;
    let mut out = csv_file(config, "trace.csv")?;
    write_trace_csv(&trace, &mut out)?;
    out.flush()?;

    let first = trace[0];
    let charge = trace.iter().map(|r| (r.charge / first.charge - 1.0).abs()).fold(0.0, f64::max);
    let energy = trace.iter().map(|r| ((r.energy - first.energy) / first.energy).abs()).fold(0.0, f64::max);
    let checks = vec![
        Check::at_most("charge drift (relative)", charge, 1e-10),
        Check::at_most("E_m drift (relative)", energy, 1e-4),
    ];
    report(
        config,
        Command::Evolve,
        &checks,
        json!({ "records": trace.len(), "final_origin_phase": last.at_origin().arg(), "final_origin_amp": last.at_origin().norm() }),
    )?;
    Ok(checks)
}

fn stability(config: &ExperimentConfig, grid: Grid, p: &PhysParams) -> RunResult {
    let phi: GridFunction = GaussonReference::from_params(p).sample(grid);
    let cfg = integrator(config);
    // The unperturbed run comes first: it is the discretization floor
    // against which the perturbed distance is read.
    let floor_spec = PerturbationSpec::new(config.perturbation, 0.0);
    let floor = stability_experiment(&phi, p, &floor_spec, &cfg)?.sup_distance;
    let spec = PerturbationSpec::new(config.perturbation, config.epsilon).with_seed(config.seed);
    let mut result = stability_experiment(&phi, p, &spec, &cfg)?;
    result.noise_floor = Some(floor);

    let mut out = csv_file(config, "distance.csv")?;
    write_distance_csv(&result.distance_trace, &mut out)?;
    out.flush()?;

    let mut checks = vec![Check::holds("conservation within integrator bounds", !result.invalid)];
    if p.gamma > 0.0 {
        checks.push(Check::at_most("sup distance / max(epsilon, noise floor)", result.sup_distance / config.epsilon.max(floor), 10.0));
    } else {
        println!("{EXPLORATORY_LABEL}");
    }
    report(
        config,
        Command::Stability,
        &checks,
        json!({
            "params": { "gamma": p.gamma, "omega": p.omega },
            "epsilon": result.epsilon,
            "kind": result.kind.name(),
            "seed": result.seed,
            "sup_distance": result.sup_distance,
            "sup_over": "recorded times",
            "ratio": result.ratio,
            "noise_floor": floor,
            "charge_drift": result.charge_drift,
            "energy_drift": result.energy_drift,
            "label": result.label,
        }),
    )?;
    Ok(checks)
}

fn sweep(config: &ExperimentConfig, grid: Grid) -> RunResult {
    let mut settings = SolverSettings::for_gamma(1.0);
    settings.tol = config.tol;
    let rows = continuation_sweep(&config.sweep_omegas, &config.sweep_gammas, grid, &settings)?;
    let mut out = csv_file(config, "sweep.csv")?;
    write_sweep_csv(&rows, &mut out)?;
    out.flush()?;

    let mut checks = Vec::new();
    for row in &rows {
        let reference = GaussonReference::new(row.omega, row.gamma);
        let cell = format!("(omega={}, gamma={})", row.omega, row.gamma);
        checks.push(Check::holds(&format!("converged {cell}"), row.converged));
        checks.push(Check::between(&format!("d bounds {cell}"), row.d_estimate, reference.d_lower_bound(), reference.d_free()));
    }
    report(config, Command::Sweep, &checks, json!({ "rows": rows }))?;
    Ok(checks)
}

/// Prints one aligned line per check.
pub fn print_table(checks: &[Check], mut out: impl Write) -> std::io::Result<()> {
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    for c in checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        writeln!(out, "{status}  {:width$}  {:>12.5e}  {}", c.name, c.value, c.limit)?;
    }
    Ok(())
}

/// `{"failures": [...]}` for the failed checks, or for a run error.
pub fn failure_json(checks: &[Check], error: Option<(&str, &str)>) -> Value {
    let mut failures: Vec<Value> = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| json!({ "check": c.name, "value": c.value, "limit": c.limit }))
        .collect();
    if let Some((kind, message)) = error {
        failures.push(json!({ "check": kind, "message": message }));
    }
    json!({ "failures": failures })
}
