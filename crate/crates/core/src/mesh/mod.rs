//! Mesh data model: nodes, elements (3-D trusses, plane-stress triangles,
//! linear tetrahedra), materials and homogeneous Dirichlet constraints.
//!
//! A [`Mesh`] is immutable after construction and validated on parse: dense
//! node/element ids, existing references, positive element measures. Rigid
//! body modes are not checked geometrically; the linear solver rejects
//! non-positive-definite reduced systems instead.

mod io;
mod plate;

pub use io::{parse_mesh, serialize_mesh};
pub use plate::{generate_plate_with_hole, PlateConfig};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: usize,
    pub position: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementKind {
    /// 2-node axial bar in 3-D space; `section` is the cross-section area in m².
    Truss3d,
    /// 3-node plane-stress triangle in the xy plane; `section` is the thickness in m.
    Tri3,
    /// 4-node linear tetrahedron; no section.
    Tet4,
}

impl ElementKind {
    pub fn node_count(&self) -> usize {
        match self {
            ElementKind::Truss3d => 2,
            ElementKind::Tri3 => 3,
            ElementKind::Tet4 => 4,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ElementKind::Truss3d => "truss3d",
            ElementKind::Tri3 => "tri3",
            ElementKind::Tet4 => "tet4",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub id: usize,
    pub kind: ElementKind,
    pub connectivity: Vec<usize>,
    pub material_id: usize,
    /// Area (truss) or thickness (tri3); `None` for tet4.
    pub section: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    /// Density, kg/m³.
    pub density: f64,
    /// Young's modulus, Pa.
    pub young: f64,
    /// Poisson ratio.
    pub poisson: f64,
    /// Thermal expansion coefficient, 1/°K.
    pub alpha: f64,
}

impl Material {
    fn validate(&self, id: usize) -> Result<()> {
        if !(self.young > 0.0 && self.young.is_finite()) {
            return Err(Error::Validation(format!(
                "material {id}: young modulus must be positive, got {}",
                self.young
            )));
        }
        if !(self.poisson > -1.0 && self.poisson < 0.5) {
            return Err(Error::Validation(format!(
                "material {id}: poisson ratio must lie in (-1, 0.5), got {}",
                self.poisson
            )));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::Validation(format!(
                "material {id}: alpha must be non-negative, got {}",
                self.alpha
            )));
        }
        if !(self.density >= 0.0 && self.density.is_finite()) {
            return Err(Error::Validation(format!(
                "material {id}: density must be non-negative, got {}",
                self.density
            )));
        }
        Ok(())
    }
}

/// Homogeneous Dirichlet constraint: the listed components of one node are
/// fixed to zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirichletBc {
    pub node_id: usize,
    /// Constrained components, indexed x=0, y=1, z=2.
    pub components: [bool; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub dimension: u8,
    pub nodes: Vec<Node>,
    pub elements: Vec<Element>,
    pub materials: Vec<Material>,
    pub dirichlet_bcs: Vec<DirichletBc>,
}

impl Mesh {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn position(&self, node: usize) -> [f64; 3] {
        self.nodes[node].position
    }

    /// Axis-aligned bounding box as (min, max) corners.
    pub fn bounding_box(&self) -> ([f64; 3], [f64; 3]) {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for n in &self.nodes {
            for c in 0..3 {
                lo[c] = lo[c].min(n.position[c]);
                hi[c] = hi[c].max(n.position[c]);
            }
        }
        (lo, hi)
    }

    /// Diagonal length of the bounding box; the reference scale for
    /// geometric tolerances.
    pub fn bbox_diagonal(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        ((hi[0] - lo[0]).powi(2) + (hi[1] - lo[1]).powi(2) + (hi[2] - lo[2]).powi(2)).sqrt()
    }

    /// Length (truss), area (tri3) or volume (tet4) of an element.
    pub fn element_measure(&self, element: &Element) -> f64 {
        let p: Vec<[f64; 3]> = element
            .connectivity
            .iter()
            .map(|&n| self.position(n))
            .collect();
        match element.kind {
            ElementKind::Truss3d => dist(p[0], p[1]),
            ElementKind::Tri3 => triangle_area(p[0], p[1], p[2]),
            ElementKind::Tet4 => tet_volume(p[0], p[1], p[2], p[3]),
        }
    }

    /// Physical volume of an element including its section property.
    pub fn element_volume(&self, element: &Element) -> f64 {
        let measure = self.element_measure(element);
        match element.kind {
            ElementKind::Truss3d | ElementKind::Tri3 => measure * element.section.unwrap_or(0.0),
            ElementKind::Tet4 => measure,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension != 2 && self.dimension != 3 {
            return Err(Error::Validation(format!(
                "dimension must be 2 or 3, got {}",
                self.dimension
            )));
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if node.id != i {
                return Err(Error::Validation(format!(
                    "node ids must be dense 0..N-1: index {i} has id {}",
                    node.id
                )));
            }
            if node.position.iter().any(|v| !v.is_finite()) {
                return Err(Error::Validation(format!(
                    "node {i} has non-finite position"
                )));
            }
        }
        for (id, material) in self.materials.iter().enumerate() {
            material.validate(id)?;
        }
        for (i, element) in self.elements.iter().enumerate() {
            if element.id != i {
                return Err(Error::Validation(format!(
                    "element ids must be dense 0..N-1: index {i} has id {}",
                    element.id
                )));
            }
            let expected = element.kind.node_count();
            if element.connectivity.len() != expected {
                return Err(Error::Validation(format!(
                    "element {i} ({}) expects {expected} nodes, got {}",
                    element.kind.name(),
                    element.connectivity.len()
                )));
            }
            for &n in &element.connectivity {
                if n >= self.nodes.len() {
                    return Err(Error::Validation(format!(
                        "element {i} references missing node {n}"
                    )));
                }
            }
            for (a, &na) in element.connectivity.iter().enumerate() {
                if element.connectivity[a + 1..].contains(&na) {
                    return Err(Error::Validation(format!(
                        "element {i} repeats node {na}"
                    )));
                }
            }
            if element.material_id >= self.materials.len() {
                return Err(Error::Validation(format!(
                    "element {i} references missing material {}",
                    element.material_id
                )));
            }
            match element.kind {
                ElementKind::Truss3d | ElementKind::Tri3 => match element.section {
                    Some(s) if s > 0.0 && s.is_finite() => {}
                    Some(s) => {
                        return Err(Error::Validation(format!(
                            "element {i} has non-positive section {s}"
                        )))
                    }
                    None => {
                        return Err(Error::Validation(format!(
                            "element {i} ({}) requires a section",
                            element.kind.name()
                        )))
                    }
                },
                ElementKind::Tet4 => {
                    if element.section.is_some() {
                        return Err(Error::Validation(format!(
                            "element {i} (tet4) must not define a section"
                        )));
                    }
                }
            }
            let measure = self.element_measure(element);
            if !(measure > 0.0 && measure.is_finite()) {
                return Err(Error::Validation(format!(
                    "element {i} has non-positive measure {measure}"
                )));
            }
        }
        for bc in &self.dirichlet_bcs {
            if bc.node_id >= self.nodes.len() {
                return Err(Error::Validation(format!(
                    "dirichlet constraint references missing node {}",
                    bc.node_id
                )));
            }
            if !bc.components.iter().any(|&c| c) {
                return Err(Error::Validation(format!(
                    "dirichlet constraint on node {} fixes no component",
                    bc.node_id
                )));
            }
        }
        Ok(())
    }
}

pub(crate) fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Unsigned area of a 3-D triangle.
pub(crate) fn triangle_area(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
    let cx = u[1] * v[2] - u[2] * v[1];
    let cy = u[2] * v[0] - u[0] * v[2];
    let cz = u[0] * v[1] - u[1] * v[0];
    0.5 * (cx * cx + cy * cy + cz * cz).sqrt()
}

/// Signed volume of a tetrahedron; positive for right-handed node order.
pub(crate) fn tet_volume(a: [f64; 3], b: [f64; 3], c: [f64; 3], d: [f64; 3]) -> f64 {
    let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
    let w = [d[0] - a[0], d[1] - a[1], d[2] - a[2]];
    (u[0] * (v[1] * w[2] - v[2] * w[1]) - u[1] * (v[0] * w[2] - v[2] * w[0])
        + u[2] * (v[0] * w[1] - v[1] * w[0]))
        / 6.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_material() -> Material {
        Material {
            density: 1.0,
            young: 1.0,
            poisson: 0.3,
            alpha: 1e-5,
        }
    }

    fn two_node_truss() -> Mesh {
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
            materials: vec![unit_material()],
            dirichlet_bcs: vec![],
        }
    }

    #[test]
    fn minimal_truss_validates() {
        two_node_truss().validate().unwrap();
    }

    #[test]
    fn dangling_material_rejected() {
        let mut mesh = two_node_truss();
        mesh.elements[0].material_id = 7;
        let err = mesh.validate().unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "{err}");
        assert!(err.to_string().contains("material 7"));
    }

    #[test]
    fn dangling_node_rejected() {
        let mut mesh = two_node_truss();
        mesh.elements[0].connectivity = vec![0, 5];
        assert!(mesh.validate().is_err());
    }

    #[test]
    fn repeated_node_rejected() {
        let mut mesh = two_node_truss();
        mesh.elements[0].connectivity = vec![0, 0];
        assert!(mesh.validate().is_err());
    }

    #[test]
    fn zero_length_truss_rejected() {
        let mut mesh = two_node_truss();
        mesh.nodes[1].position = [0.0, 0.0, 0.0];
        assert!(mesh.validate().is_err());
    }

    #[test]
    fn poisson_range_enforced() {
        let mut mesh = two_node_truss();
        mesh.materials[0].poisson = 0.5;
        assert!(mesh.validate().is_err());
    }

    #[test]
    fn tet_volume_signed() {
        let v = tet_volume(
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        );
        assert!((v - 1.0 / 6.0).abs() < 1e-15);
        let v = tet_volume(
            [0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0],
        );
        assert!((v + 1.0 / 6.0).abs() < 1e-15);
    }
}
