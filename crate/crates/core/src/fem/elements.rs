//! Element formulations: stiffness, strain-displacement operators and
//! equivalent thermal nodal loads for 3-D trusses, plane-stress triangles
//! and linear tetrahedra.
//!
//! All three are constant-strain elements, so the thermal load is the exact
//! integral ∫ Bᵀ·D·ε_th dΩ with ε_th built from the element-average
//! temperature change. Thermal strain per formulation: truss ε = α·ΔT axial;
//! plane stress ε = α·ΔT·`[1,1,0]` (hydrostatic stress factor α·E/(1−ν));
//! 3-D ε = α·ΔT·`[1,1,1,0,0,0]` (factor α·E/(1−2ν)).

use nalgebra::{DMatrix, DVector, Vector3};

use crate::error::{Error, Result};
use crate::mesh::{ElementKind, Material};

/// Displacement components carried per node for each element kind.
pub fn active_components(kind: ElementKind) -> &'static [usize] {
    match kind {
        ElementKind::Truss3d | ElementKind::Tet4 => &[0, 1, 2],
        ElementKind::Tri3 => &[0, 1],
    }
}

/// Number of element DOFs (node count × active components).
pub fn dof_count(kind: ElementKind) -> usize {
    kind.node_count() * active_components(kind).len()
}

fn axis(coords: &[[f64; 3]]) -> Result<(Vector3<f64>, f64)> {
    let d = Vector3::new(
        coords[1][0] - coords[0][0],
        coords[1][1] - coords[0][1],
        coords[1][2] - coords[0][2],
    );
    let length = d.norm();
    if length <= 0.0 || !length.is_finite() {
        return Err(Error::Geometry("zero-length truss element".into()));
    }
    Ok((d / length, length))
}

fn signed_triangle_area(coords: &[[f64; 3]]) -> f64 {
    0.5 * ((coords[1][0] - coords[0][0]) * (coords[2][1] - coords[0][1])
        - (coords[2][0] - coords[0][0]) * (coords[1][1] - coords[0][1]))
}

/// Strain-displacement matrix B. Rows use Voigt order: truss `[ε_axial]`;
/// tri3 `[ε_xx, ε_yy, γ_xy]`; tet4 `[ε_xx, ε_yy, ε_zz, γ_xy, γ_yz, γ_zx]`.
pub fn strain_displacement(kind: ElementKind, coords: &[[f64; 3]]) -> Result<DMatrix<f64>> {
    match kind {
        ElementKind::Truss3d => {
            let (d, length) = axis(coords)?;
            let mut b = DMatrix::zeros(1, 6);
            for c in 0..3 {
                b[(0, c)] = -d[c] / length;
                b[(0, 3 + c)] = d[c] / length;
            }
            Ok(b)
        }
        ElementKind::Tri3 => {
            let area = signed_triangle_area(coords);
            if area <= 0.0 || !area.is_finite() {
                return Err(Error::Geometry(format!(
                    "triangle is degenerate or not counter-clockwise (signed area {area})"
                )));
            }
            let (x, y): (Vec<f64>, Vec<f64>) = (
                coords.iter().map(|p| p[0]).collect(),
                coords.iter().map(|p| p[1]).collect(),
            );
            let mut b = DMatrix::zeros(3, 6);
            for i in 0..3 {
                let (j, k) = ((i + 1) % 3, (i + 2) % 3);
                let bi = (y[j] - y[k]) / (2.0 * area);
                let ci = (x[k] - x[j]) / (2.0 * area);
                b[(0, 2 * i)] = bi;
                b[(1, 2 * i + 1)] = ci;
                b[(2, 2 * i)] = ci;
                b[(2, 2 * i + 1)] = bi;
            }
            Ok(b)
        }
        ElementKind::Tet4 => {
            let volume = crate::mesh::tet_volume(coords[0], coords[1], coords[2], coords[3]);
            if volume <= 0.0 || !volume.is_finite() {
                return Err(Error::Geometry(format!(
                    "tetrahedron is degenerate or inverted (signed volume {volume})"
                )));
            }
            // shape function gradients from the inverse of [1 x y z]
            let m = nalgebra::Matrix4::from_fn(|r, c| {
                if c == 0 {
                    1.0
                } else {
                    coords[r][c - 1]
                }
            });
            let inv = m.try_inverse().ok_or_else(|| {
                Error::Geometry("tetrahedron coordinate matrix is singular".into())
            })?;
            // grad N_i = inv[(1..4, i)]
            let mut b = DMatrix::zeros(6, 12);
            for i in 0..4 {
                let (gx, gy, gz) = (inv[(1, i)], inv[(2, i)], inv[(3, i)]);
                let col = 3 * i;
                b[(0, col)] = gx;
                b[(1, col + 1)] = gy;
                b[(2, col + 2)] = gz;
                b[(3, col)] = gy;
                b[(3, col + 1)] = gx;
                b[(4, col + 1)] = gz;
                b[(4, col + 2)] = gy;
                b[(5, col)] = gz;
                b[(5, col + 2)] = gx;
            }
            Ok(b)
        }
    }
}

/// Constitutive matrix in the same Voigt order as [`strain_displacement`].
fn constitutive(kind: ElementKind, material: &Material) -> DMatrix<f64> {
    let e = material.young;
    let nu = material.poisson;
    match kind {
        ElementKind::Truss3d => DMatrix::from_element(1, 1, e),
        ElementKind::Tri3 => {
            let f = e / (1.0 - nu * nu);
            let mut d = DMatrix::zeros(3, 3);
            d[(0, 0)] = f;
            d[(1, 1)] = f;
            d[(0, 1)] = f * nu;
            d[(1, 0)] = f * nu;
            d[(2, 2)] = f * (1.0 - nu) / 2.0;
            d
        }
        ElementKind::Tet4 => {
            let f = e / ((1.0 + nu) * (1.0 - 2.0 * nu));
            let g = e / (2.0 * (1.0 + nu));
            let mut d = DMatrix::zeros(6, 6);
            for i in 0..3 {
                for j in 0..3 {
                    d[(i, j)] = if i == j { f * (1.0 - nu) } else { f * nu };
                }
                d[(i + 3, i + 3)] = g;
            }
            d
        }
    }
}

/// Thermal strain per unit temperature change, Voigt order.
fn thermal_strain_unit(kind: ElementKind, material: &Material) -> DVector<f64> {
    let a = material.alpha;
    match kind {
        ElementKind::Truss3d => DVector::from_vec(vec![a]),
        ElementKind::Tri3 => DVector::from_vec(vec![a, a, 0.0]),
        ElementKind::Tet4 => DVector::from_vec(vec![a, a, a, 0.0, 0.0, 0.0]),
    }
}

/// Integration measure: length × area (truss), area × thickness (tri3),
/// volume (tet4).
fn integration_volume(
    kind: ElementKind,
    coords: &[[f64; 3]],
    section: Option<f64>,
) -> Result<f64> {
    match kind {
        ElementKind::Truss3d => {
            let (_, length) = axis(coords)?;
            Ok(length * section.ok_or_else(|| Error::Validation("truss needs a section".into()))?)
        }
        ElementKind::Tri3 => {
            let area = signed_triangle_area(coords);
            Ok(area * section.ok_or_else(|| Error::Validation("tri3 needs a section".into()))?)
        }
        ElementKind::Tet4 => Ok(crate::mesh::tet_volume(
            coords[0], coords[1], coords[2], coords[3],
        )),
    }
}

/// Element stiffness matrix K_e = ∫ Bᵀ·D·B dΩ; symmetric positive
/// semi-definite for valid geometry.
pub fn element_stiffness(
    kind: ElementKind,
    coords: &[[f64; 3]],
    material: &Material,
    section: Option<f64>,
) -> Result<DMatrix<f64>> {
    let b = strain_displacement(kind, coords)?;
    let d = constitutive(kind, material);
    let volume = integration_volume(kind, coords, section)?;
    let k = b.transpose() * d * &b * volume;
    // symmetrize away the last-bit asymmetry from the triple product
    let mut sym = k.clone();
    for i in 0..sym.nrows() {
        for j in 0..i {
            let v = 0.5 * (k[(i, j)] + k[(j, i)]);
            sym[(i, j)] = v;
            sym[(j, i)] = v;
        }
    }
    Ok(sym)
}

/// Equivalent thermal nodal load per unit element-average temperature
/// change: ∫ Bᵀ·D·ε_th dΩ with ΔT_avg = 1.
pub fn thermal_unit_load(
    kind: ElementKind,
    coords: &[[f64; 3]],
    material: &Material,
    section: Option<f64>,
) -> Result<DVector<f64>> {
    let b = strain_displacement(kind, coords)?;
    let d = constitutive(kind, material);
    let volume = integration_volume(kind, coords, section)?;
    Ok(b.transpose() * (d * thermal_strain_unit(kind, material)) * volume)
}

/// Equivalent thermal nodal load for the given nodal temperature changes;
/// the element sees their average (linear elements).
pub fn thermal_force(
    kind: ElementKind,
    coords: &[[f64; 3]],
    material: &Material,
    section: Option<f64>,
    nodal_dt: &[f64],
) -> Result<DVector<f64>> {
    if nodal_dt.len() != kind.node_count() {
        return Err(Error::Shape(format!(
            "thermal_force: {} nodal temperatures for a {} element",
            nodal_dt.len(),
            kind.name()
        )));
    }
    let avg = nodal_dt.iter().sum::<f64>() / nodal_dt.len() as f64;
    Ok(thermal_unit_load(kind, coords, material, section)? * avg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_material(nu: f64) -> Material {
        Material {
            density: 1.0,
            young: 1.0,
            poisson: nu,
            alpha: 1e-5,
        }
    }

    #[test]
    fn truss_stiffness_along_x() {
        let coords = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]];
        let k = element_stiffness(
            ElementKind::Truss3d,
            &coords,
            &unit_material(0.3),
            Some(1.0),
        )
        .unwrap();
        // axial pattern [1, -1; -1, 1] on x DOFs, zero elsewhere
        assert_relative_eq!(k[(0, 0)], 1.0, epsilon = 1e-14);
        assert_relative_eq!(k[(0, 3)], -1.0, epsilon = 1e-14);
        assert_relative_eq!(k[(3, 3)], 1.0, epsilon = 1e-14);
        for (i, j) in [(1, 1), (2, 2), (4, 4), (5, 5), (0, 1), (1, 3)] {
            assert_relative_eq!(k[(i, j)], 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn rigid_translations_in_null_space() {
        let cases: Vec<(ElementKind, Vec<[f64; 3]>, Option<f64>)> = vec![
            (
                ElementKind::Truss3d,
                vec![[0.1, 0.2, 0.3], [1.3, -0.4, 0.9]],
                Some(2.0),
            ),
            (
                ElementKind::Tri3,
                vec![[0.0, 0.0, 0.0], [2.0, 0.1, 0.0], [0.3, 1.7, 0.0]],
                Some(0.5),
            ),
            (
                ElementKind::Tet4,
                vec![
                    [0.0, 0.0, 0.0],
                    [1.0, 0.0, 0.1],
                    [0.0, 1.2, 0.0],
                    [0.1, 0.2, 0.9],
                ],
                None,
            ),
        ];
        for (kind, coords, section) in cases {
            let k = element_stiffness(kind, &coords, &unit_material(0.25), section).unwrap();
            let ncomp = active_components(kind).len();
            for c in 0..ncomp {
                let mut t = DVector::zeros(k.nrows());
                for n in 0..kind.node_count() {
                    t[n * ncomp + c] = 1.0;
                }
                let r = &k * t;
                assert!(
                    r.amax() < 1e-12,
                    "{}: rigid translation along {c} not in null space ({})",
                    kind.name(),
                    r.amax()
                );
            }
        }
    }

    #[test]
    fn truss_null_space_dimension_is_five() {
        let coords = [[0.0, 0.0, 0.0], [1.0, 1.0, 0.5]];
        let k = element_stiffness(
            ElementKind::Truss3d,
            &coords,
            &unit_material(0.3),
            Some(1.0),
        )
        .unwrap();
        let eig = k.symmetric_eigen();
        let zeros = eig.eigenvalues.iter().filter(|&&l| l.abs() < 1e-12).count();
        assert_eq!(zeros, 5);
    }

    #[test]
    fn tri3_null_space_dimension_is_three() {
        let coords = [[0.0, 0.0, 0.0], [1.5, 0.0, 0.0], [0.2, 1.1, 0.0]];
        let k =
            element_stiffness(ElementKind::Tri3, &coords, &unit_material(0.3), Some(1.0)).unwrap();
        let eig = k.symmetric_eigen();
        let scale = eig.eigenvalues.amax();
        let zeros = eig
            .eigenvalues
            .iter()
            .filter(|&&l| l.abs() < 1e-12 * scale)
            .count();
        assert_eq!(zeros, 3);
    }

    #[test]
    fn tet4_null_space_dimension_is_six() {
        let coords = [
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ];
        let k = element_stiffness(ElementKind::Tet4, &coords, &unit_material(0.25), None).unwrap();
        let eig = k.symmetric_eigen();
        let scale = eig.eigenvalues.amax();
        let zeros = eig
            .eigenvalues
            .iter()
            .filter(|&&l| l.abs() < 1e-12 * scale)
            .count();
        assert_eq!(zeros, 6);
    }

    /// Hand-assembled BᵀDB·A for the unit right triangle with E=1, ν=0,
    /// t=1; plane-stress D is diag(1, 1, 0.5).
    #[test]
    fn tri3_matches_hand_assembly() {
        let coords = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        let k =
            element_stiffness(ElementKind::Tri3, &coords, &unit_material(0.0), Some(1.0)).unwrap();
        // B for this triangle (area 1/2): rows scaled by 1/(2A) = 1
        let b = DMatrix::from_row_slice(
            3,
            6,
            &[
                -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, //
                0.0, -1.0, 0.0, 0.0, 0.0, 1.0, //
                -1.0, -1.0, 0.0, 1.0, 1.0, 0.0,
            ],
        );
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, 0.5]));
        let expected = b.transpose() * d * b * 0.5;
        for i in 0..6 {
            for j in 0..6 {
                assert_relative_eq!(k[(i, j)], expected[(i, j)], epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn zero_temperature_gives_zero_load() {
        let coords = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]];
        let f = thermal_force(
            ElementKind::Truss3d,
            &coords,
            &unit_material(0.3),
            Some(1.0),
            &[0.0, 0.0],
        )
        .unwrap();
        assert_eq!(f.amax(), 0.0);
    }

    /// Outward pair ±E·A·α·ΔT on the axial DOFs.
    #[test]
    fn truss_thermal_load_analytic() {
        let coords = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]];
        let f = thermal_force(
            ElementKind::Truss3d,
            &coords,
            &unit_material(0.3),
            Some(1.0),
            &[10.0, 10.0],
        )
        .unwrap();
        assert_relative_eq!(f[0], -1e-4, epsilon = 1e-18);
        assert_relative_eq!(f[3], 1e-4, epsilon = 1e-18);
        for i in [1, 2, 4, 5] {
            assert_eq!(f[i], 0.0);
        }
    }

    /// Element averaging: ΔT=(3,0,0) loads one third of ΔT=(3,3,3).
    #[test]
    fn tri3_thermal_averaging() {
        let coords = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        let material = unit_material(0.3);
        let partial = thermal_force(
            ElementKind::Tri3,
            &coords,
            &material,
            Some(1.0),
            &[3.0, 0.0, 0.0],
        )
        .unwrap();
        let full = thermal_force(
            ElementKind::Tri3,
            &coords,
            &material,
            Some(1.0),
            &[3.0, 3.0, 3.0],
        )
        .unwrap();
        for i in 0..6 {
            assert_relative_eq!(partial[i], full[i] / 3.0, epsilon = 1e-18);
        }
    }

    /// Thermal loads are self-equilibrated: per-direction sums vanish.
    #[test]
    fn thermal_loads_self_equilibrated() {
        let cases: Vec<(ElementKind, Vec<[f64; 3]>, Option<f64>)> = vec![
            (
                ElementKind::Truss3d,
                vec![[0.0, 0.1, 0.0], [1.3, 0.9, 0.4]],
                Some(0.7),
            ),
            (
                ElementKind::Tri3,
                vec![[0.0, 0.0, 0.0], [2.0, 0.3, 0.0], [0.5, 1.5, 0.0]],
                Some(0.1),
            ),
            (
                ElementKind::Tet4,
                vec![
                    [0.0, 0.0, 0.0],
                    [1.0, 0.1, 0.0],
                    [0.0, 1.0, 0.2],
                    [0.3, 0.1, 1.0],
                ],
                None,
            ),
        ];
        for (kind, coords, section) in cases {
            let dt = vec![7.3; kind.node_count()];
            let f = thermal_force(kind, &coords, &unit_material(0.28), section, &dt).unwrap();
            let scale = f.amax().max(f64::MIN_POSITIVE);
            let ncomp = active_components(kind).len();
            for c in 0..ncomp {
                let sum: f64 = (0..kind.node_count()).map(|n| f[n * ncomp + c]).sum();
                assert!(
                    sum.abs() <= 1e-12 * scale,
                    "{}: direction {c} sum {sum}",
                    kind.name()
                );
            }
        }
    }

    #[test]
    fn degenerate_geometry_rejected() {
        let coords = [[0.0, 0.0, 0.0], [0.0, 0.0, 0.0]];
        assert!(element_stiffness(
            ElementKind::Truss3d,
            &coords,
            &unit_material(0.3),
            Some(1.0)
        )
        .is_err());
        let flat = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]];
        assert!(
            element_stiffness(ElementKind::Tri3, &flat, &unit_material(0.3), Some(1.0)).is_err()
        );
    }

    #[test]
    fn clockwise_triangle_rejected() {
        let cw = [[0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]];
        assert!(element_stiffness(ElementKind::Tri3, &cw, &unit_material(0.3), Some(1.0)).is_err());
    }
}
