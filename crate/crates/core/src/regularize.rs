//! Design-field regularization: a convolution filter over mesh nodes plus a
//! sigmoid projection onto the temperature bounds.
//!
//! The optimizer works on an unbounded latent field Φ̃. The chain to the
//! physical field is latent → forward filter (s = A·Φ̃, row-stochastic hat
//! kernel) → sigmoid (ΔT = L + (U−L)·σ(β·s)). Gradients travel the reverse
//! path: dI/dΦ̃ = Aᵀ·diag(dΔT/ds)·dI/dΔT. Forward filtering smooths the
//! design, the transpose smooths the raw gradients, and the sigmoid damps
//! updates near the bounds instead of cutting them off.

use crate::error::{Error, Result};
use crate::mesh::{dist, Mesh};

/// Row-stochastic node-to-node filter matrix built from a linear hat kernel
/// of a given radius.
#[derive(Debug, Clone)]
pub struct FilterKernel {
    pub radius: f64,
    rows: Vec<Vec<(usize, f64)>>,
}

impl FilterKernel {
    pub fn size(&self) -> usize {
        self.rows.len()
    }

    /// Identity kernel (no smoothing), useful for disabling filtering while
    /// keeping the latent/sigmoid machinery.
    pub fn identity(n: usize) -> Self {
        Self {
            radius: 0.0,
            rows: (0..n).map(|i| vec![(i, 1.0)]).collect(),
        }
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }
}

/// Hat weights w_pq = max(0, 1 − d_pq/r), row-normalized. Every row keeps at
/// least its unit self-weight, so normalization never divides by zero.
pub fn build_kernel(mesh: &Mesh, radius: f64) -> Result<FilterKernel> {
    if !(radius > 0.0) {
        return Err(Error::Validation(format!(
            "filter radius must be positive, got {radius}"
        )));
    }
    let n = mesh.node_count();
    let mut rows = Vec::with_capacity(n);
    for p in 0..n {
        let xp = mesh.position(p);
        let mut row = Vec::new();
        let mut sum = 0.0;
        for q in 0..n {
            let d = dist(xp, mesh.position(q));
            if d < radius {
                let w = 1.0 - d / radius;
                if w > 0.0 {
                    row.push((q, w));
                    sum += w;
                }
            }
        }
        for (_, w) in row.iter_mut() {
            *w /= sum;
        }
        rows.push(row);
    }
    Ok(FilterKernel { radius, rows })
}

/// Forward filtering s = A·x.
pub fn forward_filter(kernel: &FilterKernel, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != kernel.size() {
        return Err(Error::Shape(format!(
            "filter size {} vs field size {}",
            kernel.size(),
            x.len()
        )));
    }
    Ok(kernel
        .rows
        .iter()
        .map(|row| row.iter().map(|&(q, w)| w * x[q]).sum())
        .collect())
}

/// Backward filtering Aᵀ·g, the exact transpose of [`forward_filter`].
pub fn backward_filter(kernel: &FilterKernel, g: &[f64]) -> Result<Vec<f64>> {
    if g.len() != kernel.size() {
        return Err(Error::Shape(format!(
            "filter size {} vs gradient size {}",
            kernel.size(),
            g.len()
        )));
    }
    let mut out = vec![0.0; g.len()];
    for (p, row) in kernel.rows.iter().enumerate() {
        let gp = g[p];
        if gp != 0.0 {
            for &(q, w) in row {
                out[q] += w * gp;
            }
        }
    }
    Ok(out)
}

/// Temperature bounds with sigmoid sharpness β.
#[derive(Debug, Clone, Copy)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
    pub beta: f64,
}

impl Bounds {
    pub fn new(lower: f64, upper: f64, beta: f64) -> Result<Self> {
        if !(lower < upper) {
            return Err(Error::Validation(format!(
                "bounds require lower < upper, got [{lower}, {upper}]"
            )));
        }
        if !(beta > 0.0) {
            return Err(Error::Validation(format!(
                "sigmoid sharpness must be positive, got {beta}"
            )));
        }
        Ok(Self {
            lower,
            upper,
            beta,
        })
    }

    /// Latent value whose projection equals the given temperature; the
    /// inverse of [`sigmoid_map`]. Used to seed the optimizer at ΔT = 0.
    pub fn latent_for(&self, delta_t: f64) -> Result<f64> {
        let phi = (delta_t - self.lower) / (self.upper - self.lower);
        if !(phi > 0.0 && phi < 1.0) {
            return Err(Error::Validation(format!(
                "temperature {delta_t} not strictly inside bounds [{}, {}]",
                self.lower, self.upper
            )));
        }
        Ok((phi / (1.0 - phi)).ln() / self.beta)
    }
}

/// Bounded projection ΔT = L + (U−L)·σ(β·s) and its derivative dΔT/ds.
/// Saturates smoothly: the derivative vanishes as ΔT approaches a bound.
pub fn sigmoid_map(latent: f64, bounds: &Bounds) -> (f64, f64) {
    let t = (bounds.beta * latent).clamp(-500.0, 500.0);
    let sigma = 1.0 / (1.0 + (-t).exp());
    let span = bounds.upper - bounds.lower;
    (
        bounds.lower + span * sigma,
        span * bounds.beta * sigma * (1.0 - sigma),
    )
}

/// Physical field from a latent field: sigmoid of the filtered latent.
pub fn latent_to_temperature(kernel: &FilterKernel, bounds: &Bounds, latent: &[f64]) -> Result<Vec<f64>> {
    let s = forward_filter(kernel, latent)?;
    Ok(s.iter().map(|&si| sigmoid_map(si, bounds).0).collect())
}

/// Gradient chain dI/dΦ̃ = Aᵀ·diag(dΔT/ds at s = A·Φ̃)·dI/dΔT.
pub fn chain_gradient(
    kernel: &FilterKernel,
    bounds: &Bounds,
    latent: &[f64],
    physical_gradient: &[f64],
) -> Result<Vec<f64>> {
    if latent.len() != physical_gradient.len() {
        return Err(Error::Shape(format!(
            "latent size {} vs gradient size {}",
            latent.len(),
            physical_gradient.len()
        )));
    }
    let s = forward_filter(kernel, latent)?;
    let scaled: Vec<f64> = s
        .iter()
        .zip(physical_gradient)
        .map(|(&si, &gi)| sigmoid_map(si, bounds).1 * gi)
        .collect();
    backward_filter(kernel, &scaled)
}
