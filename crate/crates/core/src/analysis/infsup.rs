use faer::linalg::triangular_solve::solve_lower_triangular_in_place;
use faer::{Mat, MatRef, Par, Side};

use super::norms::NormWeights;
use crate::forms::{
    face_tables, interior_face_stabilization, volume_kernel, CoefficientField, FormParams,
};
use crate::mesh::MeshTopology;
use crate::refelem::BasisSet;
use crate::system::{assemble_operator, AssemblyOptions, Rules};
use crate::{DgError, Result};

/// Largest system handled by the dense inf-sup path.
pub const DENSE_DOF_CAP: usize = 2000;

/// Gram matrix of the triple-norm surrogate in the global modal basis.
pub fn norm_gram(
    mesh: &MeshTopology,
    basis: &BasisSet,
    k: &CoefficientField,
    weights: &NormWeights,
    rules: &Rules,
) -> Result<Mat<f64>> {
    let d = basis.dim();
    let n = d * mesh.num_elements();
    let mut gram = Mat::<f64>::zeros(n, n);
    for e in &mesh.elements {
        let block = volume_kernel(e, basis, &rules.volume, k)?;
        let off = e.index * d;
        for i in 0..d {
            for j in 0..d {
                gram[(off + i, off + j)] += block.matrix[(i, j)];
            }
        }
    }
    for face in mesh.faces() {
        let tables = face_tables(mesh, face, basis, &rules.edge)?;
        let mut sides = vec![(face.elem_hi, &tables.hi)];
        if let (Some(lo), Some(t)) = (face.elem_lo, tables.lo.as_ref()) {
            sides.push((lo, t));
        }
        for (elem, table) in sides {
            // the sign of mu squares away
            let bw = weights.boundary_flux_weight(mesh.elements[elem].diameter);
            let off = elem * d;
            for (q, tp) in tables.points.iter().enumerate() {
                let kval = k.eval(elem, tp.physical);
                let flux: Vec<f64> = table
                    .point_grads(q)
                    .iter()
                    .map(|g| kval * (g[0] * face.normal[0] + g[1] * face.normal[1]))
                    .collect();
                for i in 0..d {
                    for j in 0..d {
                        gram[(off + i, off + j)] += bw * tp.weight * flux[i] * flux[j];
                    }
                }
            }
        }
    }
    for face in &mesh.interior_faces {
        for block in interior_face_stabilization(
            mesh,
            face,
            basis,
            &rules.edge,
            k,
            weights.flux_jump_weight(),
        )? {
            let (ro, co) = (block.row_elem * d, block.col_elem * d);
            for i in 0..d {
                for j in 0..d {
                    gram[(ro + i, co + j)] += block.matrix[(i, j)];
                }
            }
        }
    }
    Ok(gram)
}

/// `inf_u sup_v (v^T A u) / (|u|_N |v|_N)` for a square `A` and SPD `N`.
///
/// With `N = L L^T` this is the smallest singular value of `L^{-1} A L^{-T}`.
pub fn infsup_from_matrices(a: MatRef<'_, f64>, n: MatRef<'_, f64>) -> Result<f64> {
    let llt = n
        .llt(Side::Lower)
        .map_err(|_| DgError::NormNotPositiveDefinite)?;
    let l = llt.L();
    let mut x = a.to_owned();
    solve_lower_triangular_in_place(l, x.as_mut(), Par::Seq);
    let mut y = x.transpose().to_owned();
    solve_lower_triangular_in_place(l, y.as_mut(), Par::Seq);
    // y = (L^{-1} A L^{-T})^T has the same singular values
    let s = y
        .singular_values()
        .map_err(|e| DgError::EigenFailure(format!("{e:?}")))?;
    s.last()
        .copied()
        .filter(|v| v.is_finite())
        .ok_or_else(|| DgError::EigenFailure("empty spectrum".into()))
}

/// Discrete inf-sup constant of the bilinear form with respect to the
/// triple-norm surrogate.
pub fn infsup_gamma(
    mesh: &MeshTopology,
    basis: &BasisSet,
    rules: &Rules,
    params: &FormParams,
    k: &CoefficientField,
) -> Result<f64> {
    let dofs = mesh.num_elements() * basis.dim();
    if dofs > DENSE_DOF_CAP {
        return Err(DgError::DenseTooLarge {
            dofs,
            cap: DENSE_DOF_CAP,
        });
    }
    let (a, _) = assemble_operator(mesh, basis, rules, k, params, &AssemblyOptions::default())?;
    let gram = norm_gram(mesh, basis, k, &NormWeights::new(params, mesh), rules)?;
    infsup_from_matrices(a.to_dense().as_ref(), gram.as_ref())
}
