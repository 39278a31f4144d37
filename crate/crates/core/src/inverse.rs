//! Cost function, adjoint problem and the analytic gradient of the cost
//! with respect to the nodal temperature field.
//!
//! The misfit is I = ½·ΣᵢΣⱼ wᵢⱼ·(mᵢⱼ − (O·uᵢ)ⱼ)² over load cases i and
//! sensor channels j. Since K·u = f_ext + f_ΔT with K independent of ΔT,
//! one adjoint solve K·ũᵢ = ∂I/∂uᵢ per case (same factorization as the
//! forward problem) yields the exact gradient
//! dI/dΔT = Σᵢ ũᵢᵀ·∂f_ΔT/∂ΔT; the cost has no direct ΔT term.

use crate::error::{Error, Result};
use crate::fem::{DisplacementField, ThermalModel};
use crate::sensors::{InterpolationOperator, MeasurementSet, SensorKind, SensorSet};
use crate::util::parallel_for_each_indexed;

/// Cost value with its per-channel residuals (measured − predicted).
#[derive(Debug, Clone)]
pub struct CostBreakdown {
    pub total: f64,
    /// `residuals[case][sensor]`
    pub residuals: Vec<Vec<f64>>,
    pub displacement_sum: f64,
    pub strain_sum: f64,
}

/// Evaluates the weighted least-squares misfit between measurements and
/// predicted readings.
pub fn evaluate_cost(
    measurements: &MeasurementSet,
    predictions: &[Vec<f64>],
    sensors: &SensorSet,
) -> Result<CostBreakdown> {
    if predictions.len() != measurements.values.len() {
        return Err(Error::Shape(format!(
            "{} predicted cases vs {} measured",
            predictions.len(),
            measurements.values.len()
        )));
    }
    if measurements.sensor_ids.len() != sensors.len() {
        return Err(Error::Shape(format!(
            "{} measured channels vs {} sensors",
            measurements.sensor_ids.len(),
            sensors.len()
        )));
    }
    for (mid, sensor) in measurements.sensor_ids.iter().zip(&sensors.sensors) {
        if *mid != sensor.id {
            return Err(Error::Shape(format!(
                "measurement sensor id {mid} does not match sensor {}",
                sensor.id
            )));
        }
    }
    let mut residuals = Vec::with_capacity(predictions.len());
    let mut displacement_sum = 0.0;
    let mut strain_sum = 0.0;
    for (measured, predicted) in measurements.values.iter().zip(predictions) {
        if predicted.len() != measured.len() {
            return Err(Error::Shape(format!(
                "{} predicted readings vs {} measured",
                predicted.len(),
                measured.len()
            )));
        }
        let mut row = Vec::with_capacity(measured.len());
        for ((m, p), sensor) in measured.iter().zip(predicted).zip(&sensors.sensors) {
            let r = m - p;
            let term = 0.5 * sensor.weight * r * r;
            match sensor.kind {
                SensorKind::Displacement => displacement_sum += term,
                SensorKind::Strain => strain_sum += term,
            }
            row.push(r);
        }
        residuals.push(row);
    }
    Ok(CostBreakdown {
        total: displacement_sum + strain_sum,
        residuals,
        displacement_sum,
        strain_sum,
    })
}

/// Adjoint right-hand side for one case: ∂I/∂u = −Σⱼ wⱼ·rⱼ·(row j),
/// restricted to free DOFs.
pub fn adjoint_rhs(
    residuals: &[f64],
    operator: &InterpolationOperator,
    sensors: &SensorSet,
    model: &ThermalModel,
) -> Result<Vec<f64>> {
    if residuals.len() != operator.sensor_count() || residuals.len() != sensors.len() {
        return Err(Error::Shape(format!(
            "{} residuals vs {} operator rows vs {} sensors",
            residuals.len(),
            operator.sensor_count(),
            sensors.len()
        )));
    }
    let mut rhs = vec![0.0; model.dof_map.free_count()];
    for (j, (&r, sensor)) in residuals.iter().zip(&sensors.sensors).enumerate() {
        let scale = -sensor.weight * r;
        if scale == 0.0 {
            continue;
        }
        for &(node, comp, w) in operator.row(j) {
            if let Some(i) = model.dof_map.index_of(node, comp) {
                rhs[i] += scale * w;
            }
        }
    }
    Ok(rhs)
}

/// Solves Kᵀ·ũ = rhs reusing the forward factorization (K symmetric).
pub fn adjoint_solve(model: &ThermalModel, rhs: &[f64]) -> Result<DisplacementField> {
    model.adjoint_solve(rhs)
}

/// Per-node gradient dI/dΔT summed over all cases' adjoint fields. The
/// direct term ∂I/∂ΔT vanishes: the implemented cost never references ΔT.
pub fn gradient(model: &ThermalModel, adjoints: &[DisplacementField]) -> Vec<f64> {
    let mut g = vec![0.0; model.mesh.node_count()];
    for adjoint in adjoints {
        model.accumulate_thermal_gradient(adjoint, &mut g);
    }
    g
}

/// Debug CSV export of a nodal gradient (`node_id,g`).
pub fn gradient_csv(gradient: &[f64]) -> String {
    let mut out = String::from("node_id,g\n");
    for (i, v) in gradient.iter().enumerate() {
        out.push_str(&format!("{i},{v}\n"));
    }
    out
}

/// Forward solves + cost + adjoint solves + gradient for one temperature
/// field; the shared path of FD checks and the optimizer loop.
pub struct CostAndGradient {
    pub cost: CostBreakdown,
    pub gradient: Vec<f64>,
}

pub fn cost_and_gradient(
    model: &ThermalModel,
    operator: &InterpolationOperator,
    sensors: &SensorSet,
    measurements: &MeasurementSet,
    delta_t: &crate::field::TemperatureField,
    threads: usize,
) -> Result<CostAndGradient> {
    let displacements = model.forward_all(delta_t, threads)?;
    let predictions: Vec<Vec<f64>> = displacements.iter().map(|u| operator.apply(u)).collect();
    let cost = evaluate_cost(measurements, &predictions, sensors)?;
    let adjoints = parallel_for_each_indexed(cost.residuals.len(), threads, |case| {
        let rhs = adjoint_rhs(&cost.residuals[case], operator, sensors, model)?;
        adjoint_solve(model, &rhs)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let gradient = gradient(model, &adjoints);
    Ok(CostAndGradient { cost, gradient })
}

/// Evaluates only the cost for a given field (used by finite-difference
/// oracles).
pub fn cost_only(
    model: &ThermalModel,
    operator: &InterpolationOperator,
    sensors: &SensorSet,
    measurements: &MeasurementSet,
    delta_t: &crate::field::TemperatureField,
) -> Result<f64> {
    let displacements = model.forward_all(delta_t, 1)?;
    let predictions: Vec<Vec<f64>> = displacements.iter().map(|u| operator.apply(u)).collect();
    Ok(evaluate_cost(measurements, &predictions, sensors)?.total)
}
