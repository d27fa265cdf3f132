use super::norms::{triple_norm_surrogate, NormWeights};
use crate::forms::{face_tables, to_physical, CoefficientField, FormParams};
use crate::mesh::MeshTopology;
use crate::refelem::{BasisSet, EdgeRule, VolumeRule};
use crate::system::{BrokenField, DGSystem, ManufacturedCase, SolutionField};
use crate::{Point, Result};

#[inline]
fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// `B(w, phi_k)` for every global basis function `phi_k`, with `w` any broken
/// field (exact solutions included), integrated with the given rules.
#[allow(clippy::too_many_arguments)]
pub fn apply_form(
    mesh: &MeshTopology,
    basis: &BasisSet,
    volume: &VolumeRule,
    edge: &EdgeRule,
    k: &CoefficientField,
    params: &FormParams,
    w: &dyn BrokenField,
) -> Result<Vec<f64>> {
    let d = basis.dim();
    let mut out = vec![0.0; d * mesh.num_elements()];
    for e in &mesh.elements {
        let table = to_physical(basis.tabulate(&volume.points)?, e);
        let jac = e.map.det.abs();
        let local = &mut out[e.index * d..(e.index + 1) * d];
        for (q, (r, wq)) in volume.iter().enumerate() {
            let x = e.map.apply(*r);
            let kval = k.eval(e.index, x);
            let (val, g) = w.value_grad(e.index, x);
            let phis = table.point_values(q);
            let grads = table.point_grads(q);
            for i in 0..d {
                local[i] += wq * jac * (kval * dot(g, grads[i]) + val * phis[i]);
            }
        }
    }
    let stab = params.stabilization_weight(mesh.max_diameter());
    for face in &mesh.interior_faces {
        let tables = face_tables(mesh, face, basis, edge)?;
        let lo = face.elem_lo.expect("interior face");
        let lo_table = tables.lo.as_ref().expect("interior face");
        let elems = [face.elem_hi, lo];
        let sides = [&tables.hi, lo_table];
        let signs = [1.0, -1.0];
        for (q, tp) in tables.points.iter().enumerate() {
            let mut vals = [0.0; 2];
            let mut flux = [0.0; 2];
            let mut kv = [0.0; 2];
            for s in 0..2 {
                let (v, g) = w.value_grad(elems[s], tp.physical);
                kv[s] = k.eval(elems[s], tp.physical);
                vals[s] = v;
                flux[s] = kv[s] * dot(g, face.normal);
            }
            let avg_flux = 0.5 * (flux[0] + flux[1]);
            let jump = vals[0] - vals[1];
            let flux_jump = flux[0] - flux[1];
            for a in 0..2 {
                let off = elems[a] * d;
                let phis = sides[a].point_values(q);
                let grads = sides[a].point_grads(q);
                for i in 0..d {
                    let test_flux = kv[a] * dot(grads[i], face.normal);
                    out[off + i] += tp.weight
                        * (-signs[a] * phis[i] * avg_flux
                            + jump * 0.5 * test_flux
                            + stab * flux_jump * signs[a] * test_flux);
                }
            }
        }
    }
    for face in &mesh.boundary_faces {
        let tables = face_tables(mesh, face, basis, edge)?;
        let elem = face.elem_hi;
        let off = elem * d;
        for (q, tp) in tables.points.iter().enumerate() {
            let kval = k.eval(elem, tp.physical);
            let (val, g) = w.value_grad(elem, tp.physical);
            let flux = kval * dot(g, face.normal);
            let phis = tables.hi.point_values(q);
            let grads = tables.hi.point_grads(q);
            for i in 0..d {
                let test_flux = kval * dot(grads[i], face.normal);
                out[off + i] += tp.weight * (-phis[i] * flux + val * test_flux);
            }
        }
    }
    Ok(out)
}

/// `B(u_h, 1_E) - L(1_E)` per element, read off the assembled rows of the
/// constant modes (`1_E` is twice the orthonormal constant mode).
pub fn local_conservation_residuals(system: &DGSystem, solution: &[f64]) -> Vec<f64> {
    let dofs = system.dof_map;
    (0..dofs.n_elements)
        .map(|e| {
            let row = dofs.offset(e);
            let b_row: f64 = system.matrix.row(row).map(|(j, a)| a * solution[j]).sum();
            2.0 * (b_row - system.rhs[row])
        })
        .collect()
}

/// `max_k |B(u - u_h, phi_k)|` with the exact part integrated by the given (fine) rules.
#[allow(clippy::too_many_arguments)]
pub fn galerkin_orthogonality_defect(
    mesh: &MeshTopology,
    basis: &BasisSet,
    volume: &VolumeRule,
    edge: &EdgeRule,
    case: &ManufacturedCase,
    params: &FormParams,
    u_h: &SolutionField<'_>,
) -> Result<f64> {
    let error = |e: usize, x: Point| {
        let (u, gu) = case.value_grad(x);
        let (v, gv) = u_h.value_grad(e, x);
        (u - v, [gu[0] - gv[0], gu[1] - gv[1]])
    };
    let b = apply_form(mesh, basis, volume, edge, &case.k, params, &error)?;
    Ok(b.iter().fold(0.0, |m, v| m.max(v.abs())))
}

/// Both sides of `B(v, v) = sum_E ||v||_*^2 + sigma h^lambda / p^zeta ||[K grad v . n]||^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoercivityCheck {
    /// `v^T A v` from the assembled matrix.
    pub form: f64,
    /// The right-hand side, integrated directly from the field.
    pub identity: f64,
}

impl CoercivityCheck {
    pub fn relative_defect(&self) -> f64 {
        (self.form - self.identity).abs() / self.form.abs()
    }
}

#[allow(clippy::too_many_arguments)]
pub fn coercivity_check(
    mesh: &MeshTopology,
    basis: &BasisSet,
    volume: &VolumeRule,
    edge: &EdgeRule,
    k: &CoefficientField,
    params: &FormParams,
    matrix: &crate::system::CsrMatrix,
    coefficients: &[f64],
) -> Result<CoercivityCheck> {
    let av = matrix.matvec(coefficients);
    let form: f64 = av.iter().zip(coefficients).map(|(a, b)| a * b).sum();
    let v = SolutionField::new(mesh, basis, coefficients.to_vec())?;
    let terms = triple_norm_surrogate(mesh, &v, k, &NormWeights::new(params, mesh), volume, edge);
    Ok(CoercivityCheck {
        form,
        identity: terms.star + terms.flux_jump,
    })
}
