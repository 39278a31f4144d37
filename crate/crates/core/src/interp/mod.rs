//! Spatial-interpolation baselines over temperature samples: k-nearest
//! neighbors with optional inverse-distance weighting, plus ordinary and
//! universal kriging (see [`kriging`]).

pub mod kriging;

use crate::error::{Error, Result};
use crate::field::TemperatureField;
use crate::mesh::{dist, Mesh};
use crate::util::parallel_for_each_indexed;
use kriging::{KrigingInterpolator, ModelKind};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub position: [f64; 3],
    pub value: f64,
}

/// Temperature samples at sensor locations. Duplicated positions are merged
/// by averaging their values.
#[derive(Debug, Clone)]
pub struct SampleSet {
    pub samples: Vec<Sample>,
}

impl SampleSet {
    pub fn new(raw: Vec<Sample>) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::Validation("sample set must not be empty".into()));
        }
        let mut merged: Vec<(Sample, usize)> = Vec::new();
        for s in raw {
            if s.position.iter().any(|v| !v.is_finite()) || !s.value.is_finite() {
                return Err(Error::Validation("non-finite sample".into()));
            }
            match merged.iter_mut().find(|(m, _)| m.position == s.position) {
                Some((m, count)) => {
                    m.value += s.value;
                    *count += 1;
                }
                None => merged.push((s, 1)),
            }
        }
        Ok(Self {
            samples: merged
                .into_iter()
                .map(|(mut s, count)| {
                    s.value /= count as f64;
                    s
                })
                .collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn values_all_equal(&self) -> bool {
        self.samples
            .windows(2)
            .all(|w| w[0].value == w[1].value)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,z,value\n");
        for s in &self.samples {
            out.push_str(&format!(
                "{},{},{},{}\n",
                s.position[0], s.position[1], s.position[2], s.value
            ));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty samples CSV".into()))?;
        if header.trim() != "x,y,z,value" {
            return Err(Error::Parse(format!(
                "samples CSV header {header:?}, expected \"x,y,z,value\""
            )));
        }
        let mut raw = Vec::new();
        for (lineno, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| {
                    Error::Parse(format!("samples CSV line {}: malformed", lineno + 2))
                })?;
            if fields.len() != 4 {
                return Err(Error::Parse(format!(
                    "samples CSV line {}: expected 4 fields",
                    lineno + 2
                )));
            }
            raw.push(Sample {
                position: [fields[0], fields[1], fields[2]],
                value: fields[3],
            });
        }
        Self::new(raw)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weighting {
    Uniform,
    InverseDistance,
}

/// Weighted average of the k nearest samples; a query that hits a sample
/// exactly returns that sample's value.
pub fn knn_interpolate(
    samples: &SampleSet,
    query: [f64; 3],
    k: usize,
    weighting: Weighting,
) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Validation("knn over empty samples".into()));
    }
    if k == 0 || k > samples.len() {
        return Err(Error::Validation(format!(
            "k = {k} outside 1..={}",
            samples.len()
        )));
    }
    let mut by_distance: Vec<(f64, usize)> = samples
        .samples
        .iter()
        .enumerate()
        .map(|(i, s)| (dist(s.position, query), i))
        .collect();
    by_distance.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if by_distance[0].0 == 0.0 {
        return Ok(samples.samples[by_distance[0].1].value);
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for &(d, i) in by_distance.iter().take(k) {
        let w = match weighting {
            Weighting::Uniform => 1.0,
            Weighting::InverseDistance => 1.0 / d,
        };
        num += w * samples.samples[i].value;
        den += w;
    }
    Ok(num / den)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InterpMethod {
    Knn { k: usize, weighting: Weighting },
    OrdinaryKriging { model: ModelKind },
    UniversalKriging { model: ModelKind },
}

/// Field evaluation result with any degradation flags raised along the way.
#[derive(Debug, Clone)]
pub struct InterpolationOutcome {
    pub field: TemperatureField,
    pub flags: Vec<String>,
}

/// Evaluates the chosen interpolant at every mesh node.
pub fn interpolate_field(
    mesh: &Mesh,
    samples: &SampleSet,
    method: InterpMethod,
    threads: usize,
) -> Result<InterpolationOutcome> {
    let n = mesh.node_count();
    match method {
        InterpMethod::Knn { k, weighting } => {
            let values = parallel_for_each_indexed(n, threads, |i| {
                knn_interpolate(samples, mesh.position(i), k, weighting)
            })
            .into_iter()
            .collect::<Result<Vec<f64>>>()?;
            Ok(InterpolationOutcome {
                field: TemperatureField { values },
                flags: Vec::new(),
            })
        }
        InterpMethod::OrdinaryKriging { model } | InterpMethod::UniversalKriging { model } => {
            let mut flags = Vec::new();
            // An all-equal sample set cannot support a variogram fit; the
            // kriging prediction degenerates to that constant.
            if samples.values_all_equal() {
                flags.push("degenerate_variogram_constant_field".to_string());
                return Ok(InterpolationOutcome {
                    field: TemperatureField::constant(n, samples.samples[0].value),
                    flags,
                });
            }
            let variogram = kriging::fit_variogram(samples, model)?;
            if variogram.degenerate {
                flags.push("degenerate_variogram_fit".to_string());
            }
            let drift_dims = match method {
                InterpMethod::UniversalKriging { .. } => Some(mesh.dimension as usize),
                _ => None,
            };
            let interpolator = KrigingInterpolator::new(samples, &variogram, drift_dims)?;
            if interpolator.jittered() {
                flags.push("kriging_matrix_jittered".to_string());
            }
            let values = parallel_for_each_indexed(n, threads, |i| {
                interpolator.predict(mesh.position(i)).map(|(v, _)| v)
            })
            .into_iter()
            .collect::<Result<Vec<f64>>>()?;
            Ok(InterpolationOutcome {
                field: TemperatureField { values },
                flags,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn set(points: &[([f64; 3], f64)]) -> SampleSet {
        SampleSet::new(
            points
                .iter()
                .map(|&(position, value)| Sample { position, value })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn query_at_sample_returns_exact_value() {
        let samples = set(&[([0.0; 3], 7.0), ([1.0, 0.0, 0.0], 10.0)]);
        let v = knn_interpolate(&samples, [1.0, 0.0, 0.0], 2, Weighting::InverseDistance).unwrap();
        assert_eq!(v, 10.0);
    }

    /// Hand-evaluated weights 1/0.25 and 1/0.75 give 2.5.
    #[test]
    fn knn_hand_example() {
        let samples = set(&[([0.0; 3], 0.0), ([1.0, 0.0, 0.0], 10.0)]);
        let v =
            knn_interpolate(&samples, [0.25, 0.0, 0.0], 2, Weighting::InverseDistance).unwrap();
        assert_relative_eq!(v, 2.5, epsilon = 1e-14);
    }

    #[test]
    fn constant_samples_interpolate_to_constant() {
        let samples = set(&[
            ([0.0; 3], 4.5),
            ([1.0, 0.0, 0.0], 4.5),
            ([0.0, 2.0, 0.0], 4.5),
        ]);
        for q in [[0.3, 0.3, 0.0], [5.0, -2.0, 1.0]] {
            let v = knn_interpolate(&samples, q, 3, Weighting::InverseDistance).unwrap();
            assert_relative_eq!(v, 4.5, epsilon = 1e-14);
        }
    }

    #[test]
    fn knn_output_within_neighbor_range() {
        let samples = set(&[
            ([0.0; 3], 1.0),
            ([1.0, 0.0, 0.0], 5.0),
            ([0.0, 1.0, 0.0], -2.0),
            ([1.0, 1.0, 0.0], 3.0),
        ]);
        for k in 1..=4 {
            let v = knn_interpolate(&samples, [0.4, 0.6, 0.0], k, Weighting::InverseDistance)
                .unwrap();
            assert!((-2.0..=5.0).contains(&v));
        }
    }

    #[test]
    fn duplicates_merge_by_averaging() {
        let samples = set(&[([1.0, 2.0, 0.0], 4.0), ([1.0, 2.0, 0.0], 8.0)]);
        assert_eq!(samples.len(), 1);
        assert_eq!(samples.samples[0].value, 6.0);
    }

    #[test]
    fn uniform_weighting_is_plain_average() {
        let samples = set(&[([0.0; 3], 0.0), ([1.0, 0.0, 0.0], 10.0)]);
        let v = knn_interpolate(&samples, [0.25, 0.0, 0.0], 2, Weighting::Uniform).unwrap();
        assert_relative_eq!(v, 5.0, epsilon = 1e-14);
    }

    #[test]
    fn k_bounds_enforced() {
        let samples = set(&[([0.0; 3], 1.0)]);
        assert!(knn_interpolate(&samples, [1.0, 0.0, 0.0], 0, Weighting::Uniform).is_err());
        assert!(knn_interpolate(&samples, [1.0, 0.0, 0.0], 2, Weighting::Uniform).is_err());
    }

    #[test]
    fn translation_invariance() {
        let base = [
            ([0.0, 0.0, 0.0], 1.0),
            ([1.0, 0.5, 0.0], 5.0),
            ([0.2, 1.4, 0.3], -2.0),
            ([1.1, 1.0, 0.8], 3.0),
        ];
        let shift = [13.0, -7.0, 101.0];
        let shifted: Vec<([f64; 3], f64)> = base
            .iter()
            .map(|&(p, v)| {
                (
                    [p[0] + shift[0], p[1] + shift[1], p[2] + shift[2]],
                    v,
                )
            })
            .collect();
        let s1 = set(&base);
        let s2 = set(&shifted);
        let q = [0.5, 0.5, 0.25];
        let q2 = [q[0] + shift[0], q[1] + shift[1], q[2] + shift[2]];
        let v1 = knn_interpolate(&s1, q, 3, Weighting::InverseDistance).unwrap();
        let v2 = knn_interpolate(&s2, q2, 3, Weighting::InverseDistance).unwrap();
        assert_relative_eq!(v1, v2, epsilon = 1e-10);
    }

    #[test]
    fn single_sample_nearest_neighbor_fills_field() {
        use crate::mesh::{Element, ElementKind, Material, Mesh, Node};
        let mesh = Mesh {
            dimension: 3,
            nodes: (0..3)
                .map(|id| Node {
                    id,
                    position: [id as f64, 0.0, 0.0],
                })
                .collect(),
            elements: (0..2)
                .map(|id| Element {
                    id,
                    kind: ElementKind::Truss3d,
                    connectivity: vec![id, id + 1],
                    material_id: 0,
                    section: Some(1.0),
                })
                .collect(),
            materials: vec![Material {
                density: 1.0,
                young: 1.0,
                poisson: 0.3,
                alpha: 1e-5,
            }],
            dirichlet_bcs: vec![],
        };
        let samples = set(&[([0.4, 0.0, 0.0], 10.0)]);
        let outcome = interpolate_field(
            &mesh,
            &samples,
            InterpMethod::Knn {
                k: 1,
                weighting: Weighting::InverseDistance,
            },
            1,
        )
        .unwrap();
        assert_eq!(outcome.field.values, vec![10.0; 3]);
    }

    #[test]
    fn samples_csv_round_trip() {
        let s = set(&[([0.5, 1.5, -2.0], 3.25), ([1.0, 0.0, 0.0], -7.5)]);
        let back = SampleSet::from_csv(&s.to_csv()).unwrap();
        assert_eq!(back.samples, s.samples);
    }
}
