//! Forward thermoelastic problem: assembly of K·u = f_ext + f_ΔT over free
//! DOFs (homogeneous Dirichlet constraints eliminated symmetrically) and the
//! SPD solve.
//!
//! [`ThermalModel`] factorizes the stiffness once and reuses it for repeated
//! forward and adjoint solves while the temperature field changes; only the
//! thermal right-hand side is rebuilt per evaluation.

pub mod elements;
pub mod solver;
pub mod sparse;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::TemperatureField;
use crate::mesh::{ElementKind, Mesh};
use crate::util::parallel_for_each_indexed;
use elements::{active_components, element_stiffness, thermal_unit_load};
use solver::SpdSolver;
use sparse::{SparseSym, TripletBuilder};

/// External loading for one test case: point loads plus a body-force
/// acceleration applied as ρ·a per unit volume.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LoadCase {
    pub id: usize,
    pub nodal_loads: Vec<NodalLoad>,
    pub body_force: [f64; 3],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NodalLoad {
    pub node: usize,
    pub f: [f64; 3],
}

impl LoadCase {
    pub fn parse(text: &str) -> Result<Self> {
        let case: LoadCase =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("load case: {e}")))?;
        Ok(case)
    }

    pub fn validate(&self, mesh: &Mesh) -> Result<()> {
        for load in &self.nodal_loads {
            if load.node >= mesh.node_count() {
                return Err(Error::Validation(format!(
                    "load case {}: references missing node {}",
                    self.id, load.node
                )));
            }
            if load.f.iter().any(|v| !v.is_finite()) {
                return Err(Error::Validation(format!(
                    "load case {}: non-finite load on node {}",
                    self.id, load.node
                )));
            }
        }
        if self.body_force.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation(format!(
                "load case {}: non-finite body force",
                self.id
            )));
        }
        Ok(())
    }

    /// A case with no external loading at all.
    pub fn empty(id: usize) -> Self {
        Self {
            id,
            nodal_loads: Vec::new(),
            body_force: [0.0; 3],
        }
    }
}

/// Per-node displacement vectors; constrained components are exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementField {
    pub values: Vec<[f64; 3]>,
}

impl DisplacementField {
    pub fn zeros(node_count: usize) -> Self {
        Self {
            values: vec![[0.0; 3]; node_count],
        }
    }

    pub fn at(&self, node: usize, comp: usize) -> f64 {
        self.values[node][comp]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("node_id,ux,uy,uz\n");
        for (i, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{i},{},{},{}\n", v[0], v[1], v[2]));
        }
        out
    }
}

/// Maps (node, component) pairs to free-DOF indices; constrained components
/// map to `None`. Two-dimensional meshes constrain every z component.
#[derive(Debug, Clone)]
pub struct DofMap {
    free_index: Vec<Option<usize>>,
    free_dofs: Vec<(usize, usize)>,
}

impl DofMap {
    pub fn build(mesh: &Mesh) -> Self {
        let n = mesh.node_count();
        let mut constrained = vec![[false; 3]; n];
        if mesh.dimension == 2 {
            for c in constrained.iter_mut() {
                c[2] = true;
            }
        }
        for bc in &mesh.dirichlet_bcs {
            for comp in 0..3 {
                if bc.components[comp] {
                    constrained[bc.node_id][comp] = true;
                }
            }
        }
        let mut free_index = vec![None; 3 * n];
        let mut free_dofs = Vec::new();
        for node in 0..n {
            for comp in 0..3 {
                if !constrained[node][comp] {
                    free_index[3 * node + comp] = Some(free_dofs.len());
                    free_dofs.push((node, comp));
                }
            }
        }
        Self {
            free_index,
            free_dofs,
        }
    }

    pub fn free_count(&self) -> usize {
        self.free_dofs.len()
    }

    pub fn index_of(&self, node: usize, comp: usize) -> Option<usize> {
        self.free_index[3 * node + comp]
    }

    pub fn free_dof(&self, index: usize) -> (usize, usize) {
        self.free_dofs[index]
    }

    /// Expands a free-DOF vector to a full displacement field with zeros at
    /// constrained components.
    pub fn expand(&self, free: &[f64], node_count: usize) -> DisplacementField {
        debug_assert_eq!(free.len(), self.free_dofs.len());
        let mut field = DisplacementField::zeros(node_count);
        for (i, &(node, comp)) in self.free_dofs.iter().enumerate() {
            field.values[node][comp] = free[i];
        }
        field
    }
}

/// Reduced linear system over free DOFs.
pub struct AssembledSystem {
    pub stiffness: SparseSym,
    pub rhs: Vec<f64>,
    pub dof_map: DofMap,
}

fn assemble_stiffness(mesh: &Mesh, dof_map: &DofMap) -> Result<SparseSym> {
    let mut builder = TripletBuilder::new(dof_map.free_count());
    for element in &mesh.elements {
        let coords: Vec<[f64; 3]> = element
            .connectivity
            .iter()
            .map(|&n| mesh.position(n))
            .collect();
        let material = &mesh.materials[element.material_id];
        let ke = element_stiffness(element.kind, &coords, material, element.section)
            .map_err(|e| Error::Geometry(format!("element {}: {e}", element.id)))?;
        let comps = active_components(element.kind);
        let global: Vec<Option<usize>> = element
            .connectivity
            .iter()
            .flat_map(|&n| comps.iter().map(move |&c| (n, c)))
            .map(|(n, c)| dof_map.index_of(n, c))
            .collect();
        for (a, &ga) in global.iter().enumerate() {
            let Some(ia) = ga else { continue };
            for (b, &gb) in global.iter().enumerate() {
                if let Some(ib) = gb {
                    builder.add(ia, ib, ke[(a, b)]);
                }
            }
        }
    }
    Ok(builder.build())
}

fn scatter_external(mesh: &Mesh, case: &LoadCase, dof_map: &DofMap, rhs: &mut [f64]) {
    for load in &case.nodal_loads {
        for comp in 0..3 {
            if let Some(i) = dof_map.index_of(load.node, comp) {
                rhs[i] += load.f[comp];
            }
        }
    }
    if case.body_force != [0.0; 3] {
        for element in &mesh.elements {
            let material = &mesh.materials[element.material_id];
            let mass = material.density * mesh.element_volume(element);
            let share = mass / element.connectivity.len() as f64;
            for &node in &element.connectivity {
                for comp in 0..3 {
                    if let Some(i) = dof_map.index_of(node, comp) {
                        rhs[i] += share * case.body_force[comp];
                    }
                }
            }
        }
    }
}

fn scatter_thermal(
    mesh: &Mesh,
    dof_map: &DofMap,
    delta_t: &TemperatureField,
    rhs: &mut [f64],
) -> Result<()> {
    for element in &mesh.elements {
        let coords: Vec<[f64; 3]> = element
            .connectivity
            .iter()
            .map(|&n| mesh.position(n))
            .collect();
        let material = &mesh.materials[element.material_id];
        let unit = thermal_unit_load(element.kind, &coords, material, element.section)
            .map_err(|e| Error::Geometry(format!("element {}: {e}", element.id)))?;
        let avg = element
            .connectivity
            .iter()
            .map(|&n| delta_t.values[n])
            .sum::<f64>()
            / element.connectivity.len() as f64;
        let comps = active_components(element.kind);
        for (a, &node) in element.connectivity.iter().enumerate() {
            for (ci, &comp) in comps.iter().enumerate() {
                if let Some(i) = dof_map.index_of(node, comp) {
                    rhs[i] += unit[a * comps.len() + ci] * avg;
                }
            }
        }
    }
    Ok(())
}

/// Assembles the reduced system K_ff·u_f = f_ext + f_ΔT for one load case
/// and temperature field. A fully constrained mesh yields a valid
/// zero-dimensional system.
pub fn assemble(
    mesh: &Mesh,
    load_case: &LoadCase,
    delta_t: &TemperatureField,
) -> Result<AssembledSystem> {
    delta_t.check_mesh(mesh)?;
    load_case.validate(mesh)?;
    let dof_map = DofMap::build(mesh);
    let stiffness = assemble_stiffness(mesh, &dof_map)?;
    let mut rhs = vec![0.0; dof_map.free_count()];
    scatter_external(mesh, load_case, &dof_map, &mut rhs);
    scatter_thermal(mesh, &dof_map, delta_t, &mut rhs)?;
    Ok(AssembledSystem {
        stiffness,
        rhs,
        dof_map,
    })
}

/// One-shot solve of an assembled system.
pub fn solve_linear(system: &AssembledSystem) -> Result<Vec<f64>> {
    SpdSolver::new(system.stiffness.clone())?.solve(&system.rhs)
}

/// Assemble + solve + expansion to a full displacement field.
pub fn forward_solve(
    mesh: &Mesh,
    load_case: &LoadCase,
    delta_t: &TemperatureField,
) -> Result<DisplacementField> {
    let system = assemble(mesh, load_case, delta_t)?;
    let free = solve_linear(&system)?;
    Ok(system.dof_map.expand(&free, mesh.node_count()))
}

/// Axial force in a truss element: N = E·A·(ε_axial − α·ΔT_avg). Negative
/// under restrained heating (compression).
pub fn truss_axial_force(
    mesh: &Mesh,
    element_id: usize,
    displacement: &DisplacementField,
    delta_t: &TemperatureField,
) -> Result<f64> {
    let element = mesh
        .elements
        .get(element_id)
        .ok_or_else(|| Error::Shape(format!("no element {element_id}")))?;
    if element.kind != ElementKind::Truss3d {
        return Err(Error::Shape(format!(
            "element {element_id} is not a truss"
        )));
    }
    let (n1, n2) = (element.connectivity[0], element.connectivity[1]);
    let (p1, p2) = (mesh.position(n1), mesh.position(n2));
    let length = crate::mesh::dist(p1, p2);
    let axis = [
        (p2[0] - p1[0]) / length,
        (p2[1] - p1[1]) / length,
        (p2[2] - p1[2]) / length,
    ];
    let strain = (0..3)
        .map(|c| (displacement.at(n2, c) - displacement.at(n1, c)) * axis[c])
        .sum::<f64>()
        / length;
    let avg_dt = 0.5 * (delta_t.values[n1] + delta_t.values[n2]);
    let material = &mesh.materials[element.material_id];
    Ok(material.young
        * element.section.unwrap_or(0.0)
        * (strain - material.alpha * avg_dt))
}

/// Per-element thermal unit load entry: (node, component, load per unit
/// element-average ΔT).
struct ElementThermal {
    connectivity: Vec<usize>,
    entries: Vec<(usize, usize, f64)>,
}

/// Stiffness factorization plus cached external loads, reused across the
/// optimization loop. Only the thermal right-hand side depends on ΔT.
pub struct ThermalModel<'m> {
    pub mesh: &'m Mesh,
    pub dof_map: DofMap,
    solver: SpdSolver,
    external_rhs: Vec<Vec<f64>>,
    thermal: Vec<ElementThermal>,
}

impl<'m> ThermalModel<'m> {
    pub fn new(mesh: &'m Mesh, load_cases: &[LoadCase]) -> Result<Self> {
        mesh.validate()?;
        let dof_map = DofMap::build(mesh);
        let stiffness = assemble_stiffness(mesh, &dof_map)?;
        let solver = SpdSolver::new(stiffness)?;
        let external_rhs = load_cases
            .iter()
            .map(|case| {
                case.validate(mesh)?;
                let mut rhs = vec![0.0; dof_map.free_count()];
                scatter_external(mesh, case, &dof_map, &mut rhs);
                Ok(rhs)
            })
            .collect::<Result<_>>()?;
        let thermal = mesh
            .elements
            .iter()
            .map(|element| {
                let coords: Vec<[f64; 3]> = element
                    .connectivity
                    .iter()
                    .map(|&n| mesh.position(n))
                    .collect();
                let material = &mesh.materials[element.material_id];
                let unit = thermal_unit_load(element.kind, &coords, material, element.section)
                    .map_err(|e| Error::Geometry(format!("element {}: {e}", element.id)))?;
                let comps = active_components(element.kind);
                let mut entries = Vec::with_capacity(element.connectivity.len() * comps.len());
                for (a, &node) in element.connectivity.iter().enumerate() {
                    for (ci, &comp) in comps.iter().enumerate() {
                        entries.push((node, comp, unit[a * comps.len() + ci]));
                    }
                }
                Ok(ElementThermal {
                    connectivity: element.connectivity.clone(),
                    entries,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            mesh,
            dof_map,
            solver,
            external_rhs,
            thermal,
        })
    }

    pub fn case_count(&self) -> usize {
        self.external_rhs.len()
    }

    /// Free-DOF thermal load vector for the given field.
    pub fn thermal_rhs(&self, delta_t: &TemperatureField) -> Vec<f64> {
        let mut rhs = vec![0.0; self.dof_map.free_count()];
        for et in &self.thermal {
            let avg = et.connectivity.iter().map(|&n| delta_t.values[n]).sum::<f64>()
                / et.connectivity.len() as f64;
            for &(node, comp, v) in &et.entries {
                if let Some(i) = self.dof_map.index_of(node, comp) {
                    rhs[i] += v * avg;
                }
            }
        }
        rhs
    }

    /// Solves all load cases for one temperature field. Cases may run on
    /// separate threads; results are written by case index, so the output
    /// is identical for any thread count.
    pub fn forward_all(
        &self,
        delta_t: &TemperatureField,
        threads: usize,
    ) -> Result<Vec<DisplacementField>> {
        delta_t.check_mesh(self.mesh)?;
        let thermal = self.thermal_rhs(delta_t);
        let results = parallel_for_each_indexed(self.case_count(), threads, |case| {
            let mut rhs = self.external_rhs[case].clone();
            for (r, t) in rhs.iter_mut().zip(&thermal) {
                *r += t;
            }
            let free = self.solver.solve(&rhs)?;
            Ok(self.dof_map.expand(&free, self.mesh.node_count()))
        });
        results.into_iter().collect()
    }

    /// Adjoint solve with the same factorized stiffness (K is symmetric).
    pub fn adjoint_solve(&self, rhs: &[f64]) -> Result<DisplacementField> {
        let free = self.solver.solve(rhs)?;
        Ok(self.dof_map.expand(&free, self.mesh.node_count()))
    }

    /// Accumulates ũᵀ·∂f_ΔT/∂ΔT into a per-node gradient: each node of an
    /// element receives 1/nn of the element's unit-load dot the adjoint.
    pub fn accumulate_thermal_gradient(&self, adjoint: &DisplacementField, out: &mut [f64]) {
        for et in &self.thermal {
            let s: f64 = et
                .entries
                .iter()
                .map(|&(node, comp, v)| v * adjoint.at(node, comp))
                .sum();
            let share = s / et.connectivity.len() as f64;
            for &node in &et.connectivity {
                out[node] += share;
            }
        }
    }
}
