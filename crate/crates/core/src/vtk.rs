//! Legacy ASCII VTK export: UNSTRUCTURED_GRID with the temperature field as
//! POINT_DATA scalars named `delta_T`.

use crate::error::Result;
use crate::field::TemperatureField;
use crate::mesh::{ElementKind, Mesh};

fn cell_type(kind: ElementKind) -> u8 {
    match kind {
        ElementKind::Truss3d => 3, // VTK_LINE
        ElementKind::Tri3 => 5,    // VTK_TRIANGLE
        ElementKind::Tet4 => 10,   // VTK_TETRA
    }
}

/// Renders the mesh and nodal field as a legacy VTK document.
pub fn write_vtk(mesh: &Mesh, field: &TemperatureField, title: &str) -> Result<String> {
    field.check_mesh(mesh)?;
    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\n");
    out.push_str(title);
    out.push('\n');
    out.push_str("ASCII\n");
    out.push_str("DATASET UNSTRUCTURED_GRID\n");
    out.push_str(&format!("POINTS {} double\n", mesh.node_count()));
    for node in &mesh.nodes {
        out.push_str(&format!(
            "{} {} {}\n",
            node.position[0], node.position[1], node.position[2]
        ));
    }
    let list_len: usize = mesh
        .elements
        .iter()
        .map(|e| e.connectivity.len() + 1)
        .sum();
    out.push_str(&format!("CELLS {} {}\n", mesh.elements.len(), list_len));
    for element in &mesh.elements {
        out.push_str(&element.connectivity.len().to_string());
        for &n in &element.connectivity {
            out.push_str(&format!(" {n}"));
        }
        out.push('\n');
    }
    out.push_str(&format!("CELL_TYPES {}\n", mesh.elements.len()));
    for element in &mesh.elements {
        out.push_str(&format!("{}\n", cell_type(element.kind)));
    }
    out.push_str(&format!("POINT_DATA {}\n", mesh.node_count()));
    out.push_str("SCALARS delta_T double 1\n");
    out.push_str("LOOKUP_TABLE default\n");
    for v in &field.values {
        out.push_str(&format!("{v}\n"));
    }
    Ok(out)
}
