//! Steepest-descent reconstruction loop with Barzilai-Borwein step sizing.
//!
//! Each iteration solves the n forward problems, the n adjoint problems,
//! accumulates the temperature gradient, optionally maps it through the
//! filter/sigmoid chain, and applies one design update x ← x − γ·g. The BB
//! step γ = (dᵀd)/(dᵀy) is non-monotone by nature; cost spikes are expected
//! and only sustained blow-up (beyond 1e6 × initial cost) aborts the run.

use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::fem::{sparse::norm2, LoadCase, ThermalModel};
use crate::field::TemperatureField;
use crate::inverse::cost_and_gradient;
use crate::mesh::Mesh;
use crate::regularize::{
    build_kernel, chain_gradient, latent_to_temperature, Bounds, FilterKernel,
};
use crate::sensors::{build_interpolation, MeasurementSet, SensorSet};

const DIVERGENCE_FACTOR: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepRule {
    BarzilaiBorwein,
    Constant,
}

#[derive(Debug, Clone)]
pub struct OptimizerConfig {
    /// Clamp on the applied step magnitude γ_max.
    pub max_step: f64,
    pub max_iterations: usize,
    /// Stop when cost ≤ convergence_factor × initial cost.
    pub convergence_factor: f64,
    pub step_rule: StepRule,
    /// Step used in `Constant` mode.
    pub constant_step: Option<f64>,
    /// First-iteration step when no (d, y) pair exists yet; defaults to
    /// `max_step`.
    pub initial_step: Option<f64>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_step: 1e-2,
            max_iterations: 5000,
            convergence_factor: 1e-5,
            step_rule: StepRule::BarzilaiBorwein,
            constant_step: None,
            initial_step: None,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.max_step > 0.0) {
            return Err(Error::Validation(format!(
                "max_step must be positive, got {}",
                self.max_step
            )));
        }
        if !(self.convergence_factor > 0.0 && self.convergence_factor < 1.0) {
            return Err(Error::Validation(format!(
                "convergence_factor must lie in (0, 1), got {}",
                self.convergence_factor
            )));
        }
        if self.step_rule == StepRule::Constant {
            match self.constant_step {
                Some(s) if s > 0.0 => {}
                _ => {
                    return Err(Error::Validation(
                        "constant step rule requires a positive constant_step".into(),
                    ))
                }
            }
        }
        if let Some(s) = self.initial_step {
            if !(s > 0.0) {
                return Err(Error::Validation(format!(
                    "initial_step must be positive, got {s}"
                )));
            }
        }
        Ok(())
    }
}

/// Vertex-morphing/sigmoid settings for the design variable. When disabled
/// the optimizer updates raw nodal ΔT without bounds.
#[derive(Debug, Clone)]
pub struct FilterSettings {
    pub enabled: bool,
    pub radius: f64,
    pub bounds: Bounds,
}

/// Raw Barzilai-Borwein ratio (dᵀd)/(dᵀy); may be non-finite or negative
/// for degenerate inputs — see [`clamped_bb_step`] for the applied rule.
pub fn bb_step(d_prev: &[f64], y: &[f64]) -> f64 {
    let dd: f64 = d_prev.iter().map(|v| v * v).sum();
    let dy: f64 = d_prev.iter().zip(y).map(|(a, b)| a * b).sum();
    dd / dy
}

/// BB step clamped to (0, γ_max]; a non-finite or non-positive ratio falls
/// back to γ_max.
pub fn clamped_bb_step(d_prev: &[f64], y: &[f64], gamma_max: f64) -> f64 {
    let gamma = bb_step(d_prev, y);
    if gamma.is_finite() && gamma > 0.0 {
        gamma.min(gamma_max)
    } else {
        gamma_max
    }
}

#[derive(Debug, Clone, Copy)]
pub struct IterationRecord {
    pub iteration: usize,
    pub cost: f64,
    /// Step applied to leave this iterate; zero on the terminal record.
    pub step: f64,
    pub grad_norm: f64,
}

#[derive(Debug)]
pub struct ReconstructionResult {
    pub field: TemperatureField,
    pub history: Vec<IterationRecord>,
    pub iterations: usize,
    pub converged: bool,
    pub wall_time: Duration,
    pub snapshots: Vec<(usize, TemperatureField)>,
}

impl ReconstructionResult {
    pub fn final_cost(&self) -> f64 {
        self.history.last().map(|r| r.cost).unwrap_or(f64::NAN)
    }

    pub fn initial_cost(&self) -> f64 {
        self.history.first().map(|r| r.cost).unwrap_or(f64::NAN)
    }

    pub fn convergence_csv(&self) -> String {
        let mut out = String::from("iteration,cost,step,grad_norm\n");
        for r in &self.history {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.iteration, r.cost, r.step, r.grad_norm
            ));
        }
        out
    }
}

pub struct ReconstructProblem<'a> {
    pub mesh: &'a Mesh,
    pub load_cases: &'a [LoadCase],
    pub measurements: &'a MeasurementSet,
    pub sensors: &'a SensorSet,
}

enum DesignSpace {
    Raw,
    Filtered { kernel: FilterKernel, bounds: Bounds },
}

impl DesignSpace {
    fn to_temperature(&self, x: &[f64]) -> Result<TemperatureField> {
        match self {
            DesignSpace::Raw => Ok(TemperatureField {
                values: x.to_vec(),
            }),
            DesignSpace::Filtered { kernel, bounds } => Ok(TemperatureField {
                values: latent_to_temperature(kernel, bounds, x)?,
            }),
        }
    }

    fn design_gradient(&self, x: &[f64], physical: &[f64]) -> Result<Vec<f64>> {
        match self {
            DesignSpace::Raw => Ok(physical.to_vec()),
            DesignSpace::Filtered { kernel, bounds } => {
                chain_gradient(kernel, bounds, x, physical)
            }
        }
    }
}

/// Runs the full reconstruction cycle starting from ΔT ≡ 0 everywhere.
pub fn reconstruct(
    problem: &ReconstructProblem,
    filter: &FilterSettings,
    optimizer: &OptimizerConfig,
    threads: usize,
    snapshot_every: usize,
) -> Result<ReconstructionResult> {
    optimizer.validate()?;
    let start = Instant::now();
    let model = ThermalModel::new(problem.mesh, problem.load_cases)?;
    let operator = build_interpolation(problem.mesh, problem.sensors)?;
    let n = problem.mesh.node_count();

    let (space, mut x) = if filter.enabled {
        let kernel = build_kernel(problem.mesh, filter.radius)?;
        let latent0 = filter.bounds.latent_for(0.0)?;
        (
            DesignSpace::Filtered {
                kernel,
                bounds: filter.bounds,
            },
            vec![latent0; n],
        )
    } else {
        (DesignSpace::Raw, vec![0.0; n])
    };

    let mut history: Vec<IterationRecord> = Vec::new();
    let mut snapshots = Vec::new();
    let mut initial_cost: Option<f64> = None;
    let mut prev_x: Option<Vec<f64>> = None;
    let mut prev_g: Option<Vec<f64>> = None;
    let mut iteration = 0usize;

    loop {
        let delta_t = space.to_temperature(&x)?;
        let eval = cost_and_gradient(
            &model,
            &operator,
            problem.sensors,
            problem.measurements,
            &delta_t,
            threads,
        )?;
        let cost = eval.cost.total;
        if !cost.is_finite() {
            return Err(Error::Diverged(format!(
                "non-finite cost at iteration {iteration}"
            )));
        }
        let i0 = *initial_cost.get_or_insert(cost);
        let design_grad = space.design_gradient(&x, &eval.gradient)?;
        let grad_norm = norm2(&design_grad);

        if cost <= optimizer.convergence_factor * i0 {
            history.push(IterationRecord {
                iteration,
                cost,
                step: 0.0,
                grad_norm,
            });
            return Ok(ReconstructionResult {
                field: delta_t,
                iterations: iteration,
                converged: true,
                wall_time: start.elapsed(),
                history,
                snapshots,
            });
        }
        if iteration > 0 && cost > DIVERGENCE_FACTOR * i0 {
            return Err(Error::Diverged(format!(
                "cost {cost:.6e} exceeds {DIVERGENCE_FACTOR:.0e} × initial cost {i0:.6e} \
                 at iteration {iteration}"
            )));
        }
        if iteration >= optimizer.max_iterations {
            history.push(IterationRecord {
                iteration,
                cost,
                step: 0.0,
                grad_norm,
            });
            return Ok(ReconstructionResult {
                field: delta_t,
                iterations: iteration,
                converged: false,
                wall_time: start.elapsed(),
                history,
                snapshots,
            });
        }

        let gamma = match optimizer.step_rule {
            StepRule::Constant => optimizer.constant_step.expect("validated"),
            StepRule::BarzilaiBorwein => match (&prev_x, &prev_g) {
                (Some(px), Some(pg)) => {
                    let d: Vec<f64> = x.iter().zip(px).map(|(a, b)| a - b).collect();
                    let y: Vec<f64> = design_grad.iter().zip(pg).map(|(a, b)| a - b).collect();
                    clamped_bb_step(&d, &y, optimizer.max_step)
                }
                _ => optimizer.initial_step.unwrap_or(optimizer.max_step),
            },
        }
        .min(optimizer.max_step);
        debug_assert!(gamma > 0.0 && gamma <= optimizer.max_step);

        if snapshot_every > 0 && iteration.is_multiple_of(snapshot_every) {
            snapshots.push((iteration, delta_t.clone()));
        }
        history.push(IterationRecord {
            iteration,
            cost,
            step: gamma,
            grad_norm,
        });

        let next: Vec<f64> = x
            .iter()
            .zip(&design_grad)
            .map(|(xi, gi)| xi - gamma * gi)
            .collect();
        prev_x = Some(std::mem::replace(&mut x, next));
        prev_g = Some(design_grad);
        iteration += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{DirichletBc, Element, ElementKind, Material, Mesh, Node};
    use crate::sensors::{synthesize_measurements, Sensor, SensorKind};
    use approx::assert_relative_eq;

    #[test]
    fn bb_step_hand_values() {
        assert_relative_eq!(bb_step(&[2.0, 0.0], &[4.0, 0.0]), 0.5);
    }

    #[test]
    fn bb_degenerate_denominator_falls_back() {
        // d·y = 0
        assert_eq!(clamped_bb_step(&[1.0, 0.0], &[0.0, 1.0], 0.25), 0.25);
        // negative curvature
        assert_eq!(clamped_bb_step(&[1.0], &[-2.0], 0.25), 0.25);
        // clamping
        assert_eq!(clamped_bb_step(&[2.0], &[0.1], 0.25), 0.25);
    }

    /// On I = ½·a·x² the BB ratio equals 1/a after the first step and the
    /// next iterate lands exactly at the minimum.
    #[test]
    fn bb_on_quadratic_recovers_curvature() {
        let a = 4.0;
        let grad = |x: f64| a * x;
        let mut x = 3.0;
        let gamma0 = 0.1;
        let mut x_prev = x;
        let mut g_prev = grad(x);
        x -= gamma0 * g_prev;
        let mut iterations = 1;
        for _ in 0..5 {
            let g = grad(x);
            if g.abs() < 1e-14 {
                break;
            }
            let gamma = clamped_bb_step(&[x - x_prev], &[g - g_prev], 1e6);
            assert_relative_eq!(gamma, 1.0 / a, epsilon = 1e-14);
            x_prev = x;
            g_prev = g;
            x -= gamma * g;
            iterations += 1;
        }
        assert!(iterations <= 3, "took {iterations} iterations");
        assert!(x.abs() < 1e-14);
    }

    fn bar_mesh() -> Mesh {
        Mesh {
            dimension: 3,
            nodes: vec![
                Node {
                    id: 0,
                    position: [0.0, 0.0, 0.0],
                },
                Node {
                    id: 1,
                    position: [1.0, 0.0, 0.0],
                },
            ],
            elements: vec![Element {
                id: 0,
                kind: ElementKind::Truss3d,
                connectivity: vec![0, 1],
                material_id: 0,
                section: Some(1.0),
            }],
            materials: vec![Material {
                density: 1.0,
                young: 2.0,
                poisson: 0.3,
                alpha: 0.5,
            }],
            dirichlet_bcs: vec![
                DirichletBc {
                    node_id: 0,
                    components: [true, true, true],
                },
                // transverse truss DOFs carry no stiffness
                DirichletBc {
                    node_id: 1,
                    components: [false, true, true],
                },
            ],
        }
    }

    fn tip_sensor() -> SensorSet {
        SensorSet {
            sensors: vec![Sensor {
                id: 0,
                position: [1.0, 0.0, 0.0],
                kind: SensorKind::Displacement,
                direction: [1.0, 0.0, 0.0],
                weight: 1.0,
            }],
        }
    }

    fn no_filter() -> FilterSettings {
        FilterSettings {
            enabled: false,
            radius: 1.0,
            bounds: Bounds::new(-10.0, 10.0, 1.0).unwrap(),
        }
    }

    #[test]
    fn zero_target_converges_at_iteration_zero() {
        let mesh = bar_mesh();
        let sensors = tip_sensor();
        let cases = vec![LoadCase::empty(0)];
        let measurements = synthesize_measurements(
            &mesh,
            &cases,
            &TemperatureField::zeros(2),
            &sensors,
            None,
            0,
            1,
        )
        .unwrap();
        let problem = ReconstructProblem {
            mesh: &mesh,
            load_cases: &cases,
            measurements: &measurements,
            sensors: &sensors,
        };
        let result = reconstruct(
            &problem,
            &no_filter(),
            &OptimizerConfig::default(),
            1,
            0,
        )
        .unwrap();
        assert!(result.converged);
        assert_eq!(result.iterations, 0);
        assert_eq!(result.final_cost(), 0.0);
    }

    /// Closed-form 1-D inverse problem: the tip reading pins the uniform
    /// bar temperature.
    #[test]
    fn bar_recovers_uniform_temperature() {
        let mesh = bar_mesh();
        let sensors = tip_sensor();
        let cases = vec![LoadCase::empty(0)];
        let target = TemperatureField::constant(2, 4.0);
        let measurements =
            synthesize_measurements(&mesh, &cases, &target, &sensors, None, 0, 1).unwrap();
        let problem = ReconstructProblem {
            mesh: &mesh,
            load_cases: &cases,
            measurements: &measurements,
            sensors: &sensors,
        };
        let config = OptimizerConfig {
            max_step: 50.0,
            max_iterations: 10,
            convergence_factor: 1e-12,
            ..OptimizerConfig::default()
        };
        let result = reconstruct(&problem, &no_filter(), &config, 1, 0).unwrap();
        assert!(result.converged, "history: {:?}", result.history);
        assert!(result.iterations <= 10);
        // the reading only pins the node average; both free nodes move
        // identically from a uniform start
        let avg = 0.5 * (result.field.values[0] + result.field.values[1]);
        assert_relative_eq!(avg, 4.0, epsilon = 1e-6);
    }

    #[test]
    fn constant_step_decreases_cost_monotonically() {
        let mesh = bar_mesh();
        let sensors = tip_sensor();
        let cases = vec![LoadCase::empty(0)];
        let target = TemperatureField::constant(2, 2.0);
        let measurements =
            synthesize_measurements(&mesh, &cases, &target, &sensors, None, 0, 1).unwrap();
        let problem = ReconstructProblem {
            mesh: &mesh,
            load_cases: &cases,
            measurements: &measurements,
            sensors: &sensors,
        };
        let config = OptimizerConfig {
            max_step: 10.0,
            max_iterations: 60,
            convergence_factor: 1e-6,
            step_rule: StepRule::Constant,
            constant_step: Some(4.0),
            initial_step: None,
        };
        let result = reconstruct(&problem, &no_filter(), &config, 1, 0).unwrap();
        for pair in result.history.windows(2) {
            assert!(
                pair[1].cost < pair[0].cost,
                "cost increased: {:?} -> {:?}",
                pair[0],
                pair[1]
            );
        }
    }

    #[test]
    fn applied_steps_respect_clamp() {
        let mesh = bar_mesh();
        let sensors = tip_sensor();
        let cases = vec![LoadCase::empty(0)];
        let target = TemperatureField::constant(2, 5.0);
        let measurements =
            synthesize_measurements(&mesh, &cases, &target, &sensors, None, 0, 1).unwrap();
        let problem = ReconstructProblem {
            mesh: &mesh,
            load_cases: &cases,
            measurements: &measurements,
            sensors: &sensors,
        };
        let config = OptimizerConfig {
            max_step: 3.0,
            max_iterations: 50,
            convergence_factor: 1e-10,
            ..OptimizerConfig::default()
        };
        let result = reconstruct(&problem, &no_filter(), &config, 1, 0).unwrap();
        for r in &result.history {
            assert!(r.step.abs() <= 3.0, "step {} exceeds clamp", r.step);
        }
    }

    #[test]
    fn filtered_reconstruction_stays_in_bounds() {
        let mesh = bar_mesh();
        let sensors = tip_sensor();
        let cases = vec![LoadCase::empty(0)];
        let target = TemperatureField::constant(2, 4.0);
        let measurements =
            synthesize_measurements(&mesh, &cases, &target, &sensors, None, 0, 1).unwrap();
        let problem = ReconstructProblem {
            mesh: &mesh,
            load_cases: &cases,
            measurements: &measurements,
            sensors: &sensors,
        };
        let filter = FilterSettings {
            enabled: true,
            radius: 2.0,
            bounds: Bounds::new(-1.0, 6.0, 1.0).unwrap(),
        };
        let config = OptimizerConfig {
            max_step: 25.0,
            max_iterations: 200,
            convergence_factor: 1e-8,
            ..OptimizerConfig::default()
        };
        let result = reconstruct(&problem, &filter, &config, 1, 0).unwrap();
        assert!(result.converged, "history: {:?}", result.history.last());
        for &v in &result.field.values {
            assert!(v > -1.0 && v < 6.0, "value {v} escaped bounds");
        }
        let avg = 0.5 * (result.field.values[0] + result.field.values[1]);
        assert_relative_eq!(avg, 4.0, epsilon = 1e-3);
    }

    #[test]
    fn runaway_constant_step_aborts_as_diverged() {
        let mesh = bar_mesh();
        let sensors = tip_sensor();
        let cases = vec![LoadCase::empty(0)];
        let target = TemperatureField::constant(2, 5.0);
        let measurements =
            synthesize_measurements(&mesh, &cases, &target, &sensors, None, 0, 1).unwrap();
        let problem = ReconstructProblem {
            mesh: &mesh,
            load_cases: &cases,
            measurements: &measurements,
            sensors: &sensors,
        };
        // stability limit for this fixture is γ < 2/a = 16; far beyond it
        // the iterates blow up geometrically
        let config = OptimizerConfig {
            max_step: 1e6,
            max_iterations: 2000,
            convergence_factor: 1e-6,
            step_rule: StepRule::Constant,
            constant_step: Some(400.0),
            initial_step: None,
        };
        let err = reconstruct(&problem, &no_filter(), &config, 1, 0).unwrap_err();
        assert!(
            matches!(err, crate::error::Error::Diverged(_)),
            "expected divergence, got {err}"
        );
    }

    #[test]
    fn single_thread_runs_are_bit_identical() {
        let mesh = bar_mesh();
        let sensors = tip_sensor();
        let cases = vec![LoadCase::empty(0)];
        let target = TemperatureField::constant(2, 3.0);
        let measurements =
            synthesize_measurements(&mesh, &cases, &target, &sensors, None, 0, 1).unwrap();
        let problem = ReconstructProblem {
            mesh: &mesh,
            load_cases: &cases,
            measurements: &measurements,
            sensors: &sensors,
        };
        let config = OptimizerConfig {
            max_step: 10.0,
            max_iterations: 25,
            convergence_factor: 1e-9,
            ..OptimizerConfig::default()
        };
        let a = reconstruct(&problem, &no_filter(), &config, 1, 0).unwrap();
        let b = reconstruct(&problem, &no_filter(), &config, 1, 0).unwrap();
        assert_eq!(a.convergence_csv(), b.convergence_csv());
        assert_eq!(a.field, b.field);
    }
}
