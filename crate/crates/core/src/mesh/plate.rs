//! Parametric rectangular-plate-with-circular-hole mesh generator.
//!
//! The mesh is an O-grid: 32 spokes radiate from the hole boundary (a
//! 32-segment polygon inscribed in the circle) to the rectangle boundary,
//! with rings of quads split into triangles. Four spokes pass exactly
//! through the rectangle corners so that every outer edge lies on a wall
//! and the rectangle is covered without corner cuts. The construction is
//! fully deterministic.

use super::{DirichletBc, Element, ElementKind, Material, Mesh, Node};
use crate::error::{Error, Result};

pub const HOLE_SEGMENTS: usize = 32;

#[derive(Debug, Clone)]
pub struct PlateConfig {
    /// Rectangle extent along x, m.
    pub length: f64,
    /// Rectangle extent along y, m.
    pub height: f64,
    pub hole_diameter: f64,
    /// Hole center (x, y).
    pub hole_center: [f64; 2],
    /// Desired radial element size, m.
    pub target_edge_size: f64,
    /// Plate thickness assigned as the tri3 section, m.
    pub thickness: f64,
    pub material: Material,
}

pub fn generate_plate_with_hole(cfg: &PlateConfig) -> Result<Mesh> {
    if !(cfg.length > 0.0 && cfg.height > 0.0) {
        return Err(Error::Geometry("plate extents must be positive".into()));
    }
    if !(cfg.hole_diameter > 0.0) {
        return Err(Error::Geometry(format!(
            "hole diameter must be positive, got {}",
            cfg.hole_diameter
        )));
    }
    if !(cfg.target_edge_size > 0.0) {
        return Err(Error::Geometry("target edge size must be positive".into()));
    }
    if !(cfg.thickness > 0.0) {
        return Err(Error::Geometry("thickness must be positive".into()));
    }
    let radius = 0.5 * cfg.hole_diameter;
    let [cx, cy] = cfg.hole_center;
    let wall_gap = [cx, cfg.length - cx, cy, cfg.height - cy];
    let min_gap = wall_gap.iter().cloned().fold(f64::INFINITY, f64::min);
    if min_gap <= radius {
        return Err(Error::Geometry(format!(
            "hole of radius {radius} intersects the plate boundary (closest wall at {min_gap})"
        )));
    }
    // Leave room for at least one thin ring of elements around the hole.
    if min_gap <= radius + 0.05 * cfg.target_edge_size {
        return Err(Error::Geometry(
            "hole too close to the boundary to mesh an annulus".into(),
        ));
    }

    let angles = spoke_angles(cfg);
    debug_assert_eq!(angles.len(), HOLE_SEGMENTS);

    // Wall hit distance for each spoke.
    let reaches: Vec<f64> = angles
        .iter()
        .map(|&theta| ray_box_distance(cx, cy, theta, cfg.length, cfg.height))
        .collect();
    let mean_gap =
        reaches.iter().map(|t| t - radius).sum::<f64>() / reaches.len() as f64;
    let rings = ((mean_gap / cfg.target_edge_size).round() as usize).max(2);

    // Node (k, j): spoke k, ring j (0 on the hole boundary). Ring-major ids.
    let mut nodes = Vec::with_capacity(HOLE_SEGMENTS * (rings + 1));
    for j in 0..=rings {
        for (k, &theta) in angles.iter().enumerate() {
            let rho = radius + (reaches[k] - radius) * j as f64 / rings as f64;
            let mut x = cx + rho * theta.cos();
            let mut y = cy + rho * theta.sin();
            if j == rings {
                // Snap outer ring onto the walls against rounding drift.
                x = x.clamp(0.0, cfg.length);
                y = y.clamp(0.0, cfg.height);
                if x < 1e-9 * cfg.length {
                    x = 0.0;
                }
                if (cfg.length - x).abs() < 1e-9 * cfg.length {
                    x = cfg.length;
                }
                if y < 1e-9 * cfg.height {
                    y = 0.0;
                }
                if (cfg.height - y).abs() < 1e-9 * cfg.height {
                    y = cfg.height;
                }
            }
            nodes.push(Node {
                id: j * HOLE_SEGMENTS + k,
                position: [x, y, 0.0],
            });
        }
    }

    let mut elements = Vec::with_capacity(2 * HOLE_SEGMENTS * rings);
    let push_tri = |elements: &mut Vec<Element>, a: usize, b: usize, c: usize| {
        let (pa, pb, pc) = (nodes[a].position, nodes[b].position, nodes[c].position);
        let signed =
            0.5 * ((pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]));
        let connectivity = if signed >= 0.0 {
            vec![a, b, c]
        } else {
            vec![a, c, b]
        };
        elements.push(Element {
            id: elements.len(),
            kind: ElementKind::Tri3,
            connectivity,
            material_id: 0,
            section: Some(cfg.thickness),
        });
    };
    for j in 0..rings {
        for k in 0..HOLE_SEGMENTS {
            let k2 = (k + 1) % HOLE_SEGMENTS;
            let a = j * HOLE_SEGMENTS + k;
            let b = j * HOLE_SEGMENTS + k2;
            let c = (j + 1) * HOLE_SEGMENTS + k2;
            let d = (j + 1) * HOLE_SEGMENTS + k;
            push_tri(&mut elements, a, b, c);
            push_tri(&mut elements, a, c, d);
        }
    }

    let dirichlet_bcs = nodes
        .iter()
        .filter(|n| n.position[0] == 0.0)
        .map(|n| DirichletBc {
            node_id: n.id,
            components: [true, true, false],
        })
        .collect();

    let mesh = Mesh {
        dimension: 2,
        nodes,
        elements,
        materials: vec![cfg.material],
        dirichlet_bcs,
    };
    mesh.validate()?;
    Ok(mesh)
}

/// 32 spoke angles in CCW order, including the exact angles toward the four
/// rectangle corners; the remaining angles subdivide each corner-to-corner
/// sector uniformly, in proportion to its angular span.
fn spoke_angles(cfg: &PlateConfig) -> Vec<f64> {
    let [cx, cy] = cfg.hole_center;
    let mut corner_angles: Vec<f64> = [
        (0.0, 0.0),
        (cfg.length, 0.0),
        (cfg.length, cfg.height),
        (0.0, cfg.height),
    ]
    .iter()
    .map(|&(x, y)| (y - cy).atan2(x - cx))
    .collect();
    corner_angles.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let spans: Vec<f64> = (0..4)
        .map(|s| {
            let next = corner_angles[(s + 1) % 4];
            let mut span = next - corner_angles[s];
            if span <= 0.0 {
                span += std::f64::consts::TAU;
            }
            span
        })
        .collect();

    // Largest-remainder allocation of the 32 segments over the 4 sectors.
    let exact: Vec<f64> = spans
        .iter()
        .map(|s| HOLE_SEGMENTS as f64 * s / std::f64::consts::TAU)
        .collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor().max(1.0) as usize).collect();
    while counts.iter().sum::<usize>() < HOLE_SEGMENTS {
        let i = (0..4)
            .max_by(|&a, &b| {
                let ra = exact[a] - counts[a] as f64;
                let rb = exact[b] - counts[b] as f64;
                ra.partial_cmp(&rb).unwrap()
            })
            .unwrap();
        counts[i] += 1;
    }
    while counts.iter().sum::<usize>() > HOLE_SEGMENTS {
        let i = (0..4)
            .filter(|&i| counts[i] > 1)
            .min_by(|&a, &b| {
                let ra = exact[a] - counts[a] as f64;
                let rb = exact[b] - counts[b] as f64;
                ra.partial_cmp(&rb).unwrap()
            })
            .unwrap();
        counts[i] -= 1;
    }

    let mut angles = Vec::with_capacity(HOLE_SEGMENTS);
    for s in 0..4 {
        for i in 0..counts[s] {
            angles.push(corner_angles[s] + spans[s] * i as f64 / counts[s] as f64);
        }
    }
    angles
}

/// Distance from (cx, cy) along direction `theta` to the boundary of the
/// rectangle [0, length] x [0, height]; the start point must lie inside.
fn ray_box_distance(cx: f64, cy: f64, theta: f64, length: f64, height: f64) -> f64 {
    let (dx, dy) = (theta.cos(), theta.sin());
    let mut t = f64::INFINITY;
    if dx > 1e-15 {
        t = t.min((length - cx) / dx);
    } else if dx < -1e-15 {
        t = t.min(-cx / dx);
    }
    if dy > 1e-15 {
        t = t.min((height - cy) / dy);
    } else if dy < -1e-15 {
        t = t.min(-cy / dy);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::dist;

    fn reference_config() -> PlateConfig {
        PlateConfig {
            length: 60.0,
            height: 30.0,
            hole_diameter: 10.0,
            hole_center: [30.0, 15.0],
            target_edge_size: 2.0,
            thickness: 0.1,
            material: Material {
                density: 7800.0,
                young: 2e12,
                poisson: 0.3,
                alpha: 1e-5,
            },
        }
    }

    #[test]
    fn element_count_in_expected_band() {
        let mesh = generate_plate_with_hole(&reference_config()).unwrap();
        let n = mesh.elements.len();
        assert!((400..=900).contains(&n), "element count {n}");
    }

    #[test]
    fn hole_diameter_zero_rejected() {
        let mut cfg = reference_config();
        cfg.hole_diameter = 0.0;
        assert!(matches!(
            generate_plate_with_hole(&cfg),
            Err(Error::Geometry(_))
        ));
    }

    #[test]
    fn hole_intersecting_boundary_rejected() {
        let mut cfg = reference_config();
        cfg.hole_center = [4.0, 15.0];
        assert!(matches!(
            generate_plate_with_hole(&cfg),
            Err(Error::Geometry(_))
        ));
    }

    #[test]
    fn geometric_audit_positive_areas_and_ring_radius() {
        let cfg = reference_config();
        let mesh = generate_plate_with_hole(&cfg).unwrap();
        for e in &mesh.elements {
            let p: Vec<[f64; 3]> = e.connectivity.iter().map(|&n| mesh.position(n)).collect();
            let signed = 0.5
                * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1])
                    - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]));
            assert!(signed > 0.0, "element {} not positively oriented", e.id);
        }
        let center = [cfg.hole_center[0], cfg.hole_center[1], 0.0];
        let r = 0.5 * cfg.hole_diameter;
        for k in 0..HOLE_SEGMENTS {
            let d = dist(mesh.position(k), center);
            assert!((d - r).abs() < 1e-9, "hole node {k} at radius {d}");
        }
    }

    #[test]
    fn covered_area_matches_rectangle_minus_hole() {
        let cfg = reference_config();
        let mesh = generate_plate_with_hole(&cfg).unwrap();
        let total: f64 = mesh
            .elements
            .iter()
            .map(|e| mesh.element_measure(e))
            .sum();
        let expected = cfg.length * cfg.height
            - std::f64::consts::PI * (0.5 * cfg.hole_diameter).powi(2);
        assert!(
            (total - expected).abs() < 0.02 * expected,
            "covered {total} vs expected {expected}"
        );
    }

    #[test]
    fn left_boundary_clamped() {
        let mesh = generate_plate_with_hole(&reference_config()).unwrap();
        assert!(!mesh.dirichlet_bcs.is_empty());
        for bc in &mesh.dirichlet_bcs {
            assert_eq!(mesh.position(bc.node_id)[0], 0.0);
            assert_eq!(bc.components, [true, true, false]);
        }
    }
}
