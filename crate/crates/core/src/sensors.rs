//! Sensors and the interpolation operators that map a finite-element
//! displacement field to scalar sensor readings.
//!
//! A displacement sensor reads the displacement projected on its axis,
//! interpolated with the element shape functions at the sensor position. A
//! strain sensor reads the normal strain along its axis (dᵀ·ε·d, i.e. a
//! strain gauge) evaluated from the containing element's constant strain.
//! A physical multi-axis sensor is represented by one entry per channel.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::elements::{active_components, strain_displacement};
use crate::fem::{DisplacementField, LoadCase, ThermalModel};
use crate::field::TemperatureField;
use crate::mesh::{dist, triangle_area, ElementKind, Mesh};
use rand::SeedableRng;
use rand_distr::Distribution;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SensorKind {
    Displacement,
    Strain,
}

#[derive(Debug, Clone)]
pub struct Sensor {
    pub id: usize,
    pub position: [f64; 3],
    pub kind: SensorKind,
    /// Unit projection axis (displacement) or gauge axis (strain).
    pub direction: [f64; 3],
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct SensorSet {
    pub sensors: Vec<Sensor>,
}

#[derive(Serialize, Deserialize)]
struct SensorsFile {
    sensors: Vec<SensorFile>,
}

#[derive(Serialize, Deserialize)]
struct SensorFile {
    id: usize,
    pos: [f64; 3],
    kind: String,
    dir: [f64; 3],
    weight: f64,
}

impl SensorSet {
    pub fn parse(text: &str) -> Result<Self> {
        let file: SensorsFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("sensors file: {e}")))?;
        let sensors = file
            .sensors
            .into_iter()
            .map(|s| {
                let kind = match s.kind.as_str() {
                    "displacement" => SensorKind::Displacement,
                    "strain" => SensorKind::Strain,
                    other => {
                        return Err(Error::Parse(format!(
                            "sensor {}: unknown kind {other:?}",
                            s.id
                        )))
                    }
                };
                let norm = (s.dir[0].powi(2) + s.dir[1].powi(2) + s.dir[2].powi(2)).sqrt();
                if (norm - 1.0).abs() > 1e-12 {
                    return Err(Error::Validation(format!(
                        "sensor {}: direction must be unit length, |dir| = {norm}",
                        s.id
                    )));
                }
                if !(s.weight >= 0.0 && s.weight.is_finite()) {
                    return Err(Error::Validation(format!(
                        "sensor {}: weight must be non-negative",
                        s.id
                    )));
                }
                Ok(Sensor {
                    id: s.id,
                    position: s.pos,
                    kind,
                    direction: s.dir,
                    weight: s.weight,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { sensors })
    }

    pub fn serialize(&self) -> String {
        let file = SensorsFile {
            sensors: self
                .sensors
                .iter()
                .map(|s| SensorFile {
                    id: s.id,
                    pos: s.position,
                    kind: match s.kind {
                        SensorKind::Displacement => "displacement".into(),
                        SensorKind::Strain => "strain".into(),
                    },
                    dir: s.direction,
                    weight: s.weight,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("sensor serialization cannot fail")
    }

    pub fn len(&self) -> usize {
        self.sensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sensors.is_empty()
    }
}

/// Element and natural coordinates of a located point: barycentric weights
/// for tri3/tet4, segment weights (1−t, t) for a truss.
#[derive(Debug, Clone, PartialEq)]
pub struct Location {
    pub element: usize,
    pub coords: Vec<f64>,
}

/// Finds the element containing `point` within 1e-9·bbox tolerance. Points
/// on shared faces resolve to the lowest element id.
pub fn locate(mesh: &Mesh, point: [f64; 3]) -> Result<Location> {
    let tol = 1e-9 * mesh.bbox_diagonal().max(f64::MIN_POSITIVE);
    let mut best: Option<(f64, Location)> = None;
    for element in &mesh.elements {
        let coords: Vec<[f64; 3]> = element
            .connectivity
            .iter()
            .map(|&n| mesh.position(n))
            .collect();
        let (outside, natural) = match element.kind {
            ElementKind::Truss3d => segment_coords(&coords, point),
            ElementKind::Tri3 => triangle_coords(&coords, point),
            ElementKind::Tet4 => tet_coords(&coords, point),
        };
        if outside <= tol {
            // ascending scan + strict improvement keeps the lowest element
            // id among equally good candidates
            if best.as_ref().is_none_or(|(d, _)| outside < *d) {
                best = Some((
                    outside,
                    Location {
                        element: element.id,
                        coords: natural,
                    },
                ));
            }
        }
    }
    best.map(|(_, loc)| loc).ok_or_else(|| {
        Error::Location(format!(
            "point [{}, {}, {}] lies outside the mesh",
            point[0], point[1], point[2]
        ))
    })
}

/// Distance outside the segment and the shape weights (1−t, t).
fn segment_coords(coords: &[[f64; 3]], p: [f64; 3]) -> (f64, Vec<f64>) {
    let (a, b) = (coords[0], coords[1]);
    let ab = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1] + ab[2] * ab[2];
    let ap = [p[0] - a[0], p[1] - a[1], p[2] - a[2]];
    let t = ((ap[0] * ab[0] + ap[1] * ab[1] + ap[2] * ab[2]) / len2).clamp(0.0, 1.0);
    let closest = [a[0] + t * ab[0], a[1] + t * ab[1], a[2] + t * ab[2]];
    (dist(p, closest), vec![1.0 - t, t])
}

/// Distance outside the triangle (in-plane and out-of-plane combined) and
/// barycentric coordinates; tri3 elements live in the xy plane.
fn triangle_coords(coords: &[[f64; 3]], p: [f64; 3]) -> (f64, Vec<f64>) {
    let area2 = 2.0 * triangle_area(coords[0], coords[1], coords[2]);
    let signed = |a: [f64; 3], b: [f64; 3], c: [f64; 3]| {
        (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])
    };
    let total = signed(coords[0], coords[1], coords[2]);
    let l0 = signed(p, coords[1], coords[2]) / total;
    let l1 = signed(coords[0], p, coords[2]) / total;
    let l2 = signed(coords[0], coords[1], p) / total;
    let lambdas = [l0, l1, l2];
    let mut outside = p[2].abs(); // out-of-plane offset
    for (i, &l) in lambdas.iter().enumerate() {
        if l < 0.0 {
            // distance beyond the edge opposite vertex i: |λ|·(2A / edge length)
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            let edge = dist(coords[j], coords[k]).max(f64::MIN_POSITIVE);
            outside = outside.max(-l * area2 / edge);
        }
    }
    (outside, lambdas.to_vec())
}

/// Distance outside the tetrahedron and barycentric coordinates.
fn tet_coords(coords: &[[f64; 3]], p: [f64; 3]) -> (f64, Vec<f64>) {
    let v = crate::mesh::tet_volume(coords[0], coords[1], coords[2], coords[3]);
    let sub = |i: usize| {
        let mut c = [coords[0], coords[1], coords[2], coords[3]];
        c[i] = p;
        crate::mesh::tet_volume(c[0], c[1], c[2], c[3])
    };
    let lambdas: Vec<f64> = (0..4).map(|i| sub(i) / v).collect();
    let mut outside = 0.0f64;
    for (i, &l) in lambdas.iter().enumerate() {
        if l < 0.0 {
            // face opposite vertex i
            let face: Vec<[f64; 3]> = (0..4).filter(|&j| j != i).map(|j| coords[j]).collect();
            let area = triangle_area(face[0], face[1], face[2]).max(f64::MIN_POSITIVE);
            outside = outside.max(-l * 3.0 * v.abs() / area);
        }
    }
    (outside, lambdas)
}

/// Sparse rows mapping nodal displacements to per-sensor scalar readings.
#[derive(Debug, Clone)]
pub struct InterpolationOperator {
    rows: Vec<Vec<(usize, usize, f64)>>,
}

impl InterpolationOperator {
    pub fn sensor_count(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, sensor: usize) -> &[(usize, usize, f64)] {
        &self.rows[sensor]
    }

    pub fn apply(&self, u: &DisplacementField) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(n, c, w)| w * u.at(n, c)).sum())
            .collect()
    }
}

/// Builds the interpolation operator; every sensor must be locatable.
pub fn build_interpolation(mesh: &Mesh, sensors: &SensorSet) -> Result<InterpolationOperator> {
    let rows = sensors
        .sensors
        .iter()
        .map(|sensor| {
            let location = locate(mesh, sensor.position).map_err(|e| {
                Error::Location(format!("sensor {}: {e}", sensor.id))
            })?;
            let element = &mesh.elements[location.element];
            let d = sensor.direction;
            match sensor.kind {
                SensorKind::Displacement => {
                    let mut row = Vec::new();
                    for (&node, &shape) in element.connectivity.iter().zip(&location.coords) {
                        for comp in 0..3 {
                            if d[comp] != 0.0 {
                                row.push((node, comp, shape * d[comp]));
                            }
                        }
                    }
                    Ok(row)
                }
                SensorKind::Strain => {
                    let coords: Vec<[f64; 3]> = element
                        .connectivity
                        .iter()
                        .map(|&n| mesh.position(n))
                        .collect();
                    let b = strain_displacement(element.kind, &coords)
                        .map_err(|e| Error::Geometry(format!("sensor {}: {e}", sensor.id)))?;
                    // dᵀ·ε·d as a combination of Voigt strain rows
                    let combo: Vec<f64> = match element.kind {
                        ElementKind::Truss3d => {
                            let coords = &coords;
                            let axis_len = dist(coords[0], coords[1]);
                            let a = [
                                (coords[1][0] - coords[0][0]) / axis_len,
                                (coords[1][1] - coords[0][1]) / axis_len,
                                (coords[1][2] - coords[0][2]) / axis_len,
                            ];
                            let da = d[0] * a[0] + d[1] * a[1] + d[2] * a[2];
                            vec![da * da]
                        }
                        ElementKind::Tri3 => vec![d[0] * d[0], d[1] * d[1], d[0] * d[1]],
                        ElementKind::Tet4 => vec![
                            d[0] * d[0],
                            d[1] * d[1],
                            d[2] * d[2],
                            d[0] * d[1],
                            d[1] * d[2],
                            d[2] * d[0],
                        ],
                    };
                    let comps = active_components(element.kind);
                    let mut row = Vec::new();
                    for (a_idx, &node) in element.connectivity.iter().enumerate() {
                        for (ci, &comp) in comps.iter().enumerate() {
                            let col = a_idx * comps.len() + ci;
                            let w: f64 =
                                combo.iter().enumerate().map(|(r, &g)| g * b[(r, col)]).sum();
                            if w != 0.0 {
                                row.push((node, comp, w));
                            }
                        }
                    }
                    Ok(row)
                }
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(InterpolationOperator { rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Synthetic,
    External,
}

/// Per-case, per-sensor readings.
#[derive(Debug, Clone)]
pub struct MeasurementSet {
    pub case_ids: Vec<usize>,
    pub sensor_ids: Vec<usize>,
    /// `values[case][sensor]`
    pub values: Vec<Vec<f64>>,
    pub provenance: Provenance,
}

impl MeasurementSet {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("case_id,sensor_id,value\n");
        for (ci, case_id) in self.case_ids.iter().enumerate() {
            for (si, sensor_id) in self.sensor_ids.iter().enumerate() {
                out.push_str(&format!("{case_id},{sensor_id},{}\n", self.values[ci][si]));
            }
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty measurements CSV".into()))?;
        if header.trim() != "case_id,sensor_id,value" {
            return Err(Error::Parse(format!(
                "measurements CSV header {header:?}, expected \"case_id,sensor_id,value\""
            )));
        }
        let mut case_ids: Vec<usize> = Vec::new();
        let mut sensor_ids: Vec<usize> = Vec::new();
        let mut entries: Vec<(usize, usize, f64)> = Vec::new();
        for (lineno, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            let parse_err =
                || Error::Parse(format!("measurements CSV line {}: malformed", lineno + 2));
            if parts.len() != 3 {
                return Err(parse_err());
            }
            let case: usize = parts[0].trim().parse().map_err(|_| parse_err())?;
            let sensor: usize = parts[1].trim().parse().map_err(|_| parse_err())?;
            let value: f64 = parts[2].trim().parse().map_err(|_| parse_err())?;
            if !case_ids.contains(&case) {
                case_ids.push(case);
            }
            if !sensor_ids.contains(&sensor) {
                sensor_ids.push(sensor);
            }
            entries.push((case, sensor, value));
        }
        let mut values = vec![vec![f64::NAN; sensor_ids.len()]; case_ids.len()];
        for (case, sensor, value) in entries {
            let ci = case_ids.iter().position(|&c| c == case).unwrap();
            let si = sensor_ids.iter().position(|&s| s == sensor).unwrap();
            values[ci][si] = value;
        }
        for (ci, row) in values.iter().enumerate() {
            for (si, v) in row.iter().enumerate() {
                if v.is_nan() {
                    return Err(Error::Validation(format!(
                        "measurements incomplete: case {} sensor {} missing",
                        case_ids[ci], sensor_ids[si]
                    )));
                }
            }
        }
        Ok(Self {
            case_ids,
            sensor_ids,
            values,
            provenance: Provenance::External,
        })
    }
}

/// Simulates every load case under the target temperature field and reads
/// the sensors, optionally adding Gaussian noise (stddev in reading units).
pub fn synthesize_measurements(
    mesh: &Mesh,
    load_cases: &[LoadCase],
    target: &TemperatureField,
    sensors: &SensorSet,
    noise_stddev: Option<f64>,
    seed: u64,
    threads: usize,
) -> Result<MeasurementSet> {
    let stddev = noise_stddev.unwrap_or(0.0);
    if stddev < 0.0 {
        return Err(Error::Validation("noise stddev must be non-negative".into()));
    }
    let operator = build_interpolation(mesh, sensors)?;
    let model = ThermalModel::new(mesh, load_cases)?;
    let displacements = model.forward_all(target, threads)?;
    let mut values: Vec<Vec<f64>> = displacements.iter().map(|u| operator.apply(u)).collect();
    if stddev > 0.0 {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let normal = rand_distr::Normal::new(0.0, stddev)
            .map_err(|e| Error::Validation(format!("noise model: {e}")))?;
        for row in values.iter_mut() {
            for v in row.iter_mut() {
                *v += normal.sample(&mut rng);
            }
        }
    }
    Ok(MeasurementSet {
        case_ids: load_cases.iter().map(|c| c.id).collect(),
        sensor_ids: sensors.sensors.iter().map(|s| s.id).collect(),
        values,
        provenance: Provenance::Synthetic,
    })
}
