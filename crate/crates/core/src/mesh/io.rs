//! JSON mesh file format.
//!
//! Schema (all keys required unless marked optional):
//! ```json
//! {"dimension": 2,
//!  "nodes": [{"id": 0, "x": 0.0, "y": 0.0, "z": 0.0}],
//!  "materials": [{"id": 0, "rho": 7800.0, "young": 2e12, "poisson": 0.3, "alpha": 1e-5}],
//!  "elements": [{"id": 0, "kind": "tri3", "nodes": [0, 1, 2], "material": 0, "section": 0.1}],
//!  "dirichlet": [{"node": 0, "dofs": "xy"}]}
//! ```

use serde::{Deserialize, Serialize};

use super::{DirichletBc, Element, ElementKind, Material, Mesh, Node};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
struct MeshFile {
    dimension: u8,
    nodes: Vec<NodeFile>,
    materials: Vec<MaterialFile>,
    elements: Vec<ElementFile>,
    dirichlet: Vec<DirichletFile>,
}

#[derive(Serialize, Deserialize)]
struct NodeFile {
    id: usize,
    x: f64,
    y: f64,
    z: f64,
}

#[derive(Serialize, Deserialize)]
struct MaterialFile {
    id: usize,
    rho: f64,
    young: f64,
    poisson: f64,
    alpha: f64,
}

#[derive(Serialize, Deserialize)]
struct ElementFile {
    id: usize,
    kind: String,
    nodes: Vec<usize>,
    material: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    section: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct DirichletFile {
    node: usize,
    dofs: String,
}

fn kind_from_name(name: &str) -> Result<ElementKind> {
    match name {
        "truss3d" => Ok(ElementKind::Truss3d),
        "tri3" => Ok(ElementKind::Tri3),
        "tet4" => Ok(ElementKind::Tet4),
        other => Err(Error::Parse(format!(
            "unknown element kind {other:?} (expected truss3d, tri3 or tet4)"
        ))),
    }
}

fn components_from_dofs(dofs: &str, node: usize) -> Result<[bool; 3]> {
    let mut components = [false; 3];
    for ch in dofs.chars() {
        match ch {
            'x' => components[0] = true,
            'y' => components[1] = true,
            'z' => components[2] = true,
            other => {
                return Err(Error::Parse(format!(
                    "dirichlet entry for node {node}: invalid dof character {other:?} in {dofs:?}"
                )))
            }
        }
    }
    Ok(components)
}

fn dofs_from_components(components: &[bool; 3]) -> String {
    let mut s = String::new();
    for (c, ch) in components.iter().zip(['x', 'y', 'z']) {
        if *c {
            s.push(ch);
        }
    }
    s
}

/// Parses and validates a mesh document. Material ids in the file must be
/// dense so that the positional `material` index is unambiguous.
pub fn parse_mesh(text: &str) -> Result<Mesh> {
    let file: MeshFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("mesh file: {e}")))?;
    for (i, m) in file.materials.iter().enumerate() {
        if m.id != i {
            return Err(Error::Validation(format!(
                "material ids must be dense 0..N-1: index {i} has id {}",
                m.id
            )));
        }
    }
    let mesh = Mesh {
        dimension: file.dimension,
        nodes: file
            .nodes
            .into_iter()
            .map(|n| Node {
                id: n.id,
                position: [n.x, n.y, n.z],
            })
            .collect(),
        materials: file
            .materials
            .into_iter()
            .map(|m| Material {
                density: m.rho,
                young: m.young,
                poisson: m.poisson,
                alpha: m.alpha,
            })
            .collect(),
        elements: file
            .elements
            .into_iter()
            .map(|e| {
                Ok(Element {
                    id: e.id,
                    kind: kind_from_name(&e.kind)?,
                    connectivity: e.nodes,
                    material_id: e.material,
                    section: e.section,
                })
            })
            .collect::<Result<_>>()?,
        dirichlet_bcs: file
            .dirichlet
            .into_iter()
            .map(|d| {
                Ok(DirichletBc {
                    node_id: d.node,
                    components: components_from_dofs(&d.dofs, d.node)?,
                })
            })
            .collect::<Result<_>>()?,
    };
    mesh.validate()?;
    Ok(mesh)
}

pub fn serialize_mesh(mesh: &Mesh) -> String {
    let file = MeshFile {
        dimension: mesh.dimension,
        nodes: mesh
            .nodes
            .iter()
            .map(|n| NodeFile {
                id: n.id,
                x: n.position[0],
                y: n.position[1],
                z: n.position[2],
            })
            .collect(),
        materials: mesh
            .materials
            .iter()
            .enumerate()
            .map(|(id, m)| MaterialFile {
                id,
                rho: m.density,
                young: m.young,
                poisson: m.poisson,
                alpha: m.alpha,
            })
            .collect(),
        elements: mesh
            .elements
            .iter()
            .map(|e| ElementFile {
                id: e.id,
                kind: e.kind.name().to_string(),
                nodes: e.connectivity.clone(),
                material: e.material_id,
                section: e.section,
            })
            .collect(),
        dirichlet: mesh
            .dirichlet_bcs
            .iter()
            .map(|bc| DirichletFile {
                node: bc.node_id,
                dofs: dofs_from_components(&bc.components),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("mesh serialization cannot fail")
}
