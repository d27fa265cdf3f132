use std::collections::BTreeMap;

use faer::Mat;

use super::sparse::CsrMatrix;
use crate::forms::{
    boundary_face_kernel, interior_face_kernel, load_kernel, volume_kernel, CoefficientField,
    FormParams, LocalBlock,
};
use crate::mesh::MeshTopology;
use crate::refelem::{make_edge_rule, make_volume_rule, BasisSet, EdgeRule, VolumeRule};
use crate::{DgError, Point, Result};

pub const DEFAULT_DOF_CAP: usize = 200_000;

/// Element-major layout: element `e` owns dofs `e * block_size .. (e + 1) * block_size`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DofMap {
    pub block_size: usize,
    pub n_elements: usize,
}

impl DofMap {
    pub fn offset(&self, element: usize) -> usize {
        element * self.block_size
    }

    pub fn total(&self) -> usize {
        self.block_size * self.n_elements
    }

    pub fn element_of(&self, dof: usize) -> usize {
        dof / self.block_size
    }
}

/// Quadrature rules for one run: `q` points per direction for the operator,
/// `q + 2` for load vectors and error integrals.
#[derive(Debug, Clone)]
pub struct Rules {
    pub q: usize,
    pub volume: VolumeRule,
    pub edge: EdgeRule,
    pub fine_volume: VolumeRule,
    pub fine_edge: EdgeRule,
}

impl Rules {
    pub fn with_points(q: usize) -> Result<Self> {
        Ok(Self {
            q,
            volume: make_volume_rule(q)?,
            edge: make_edge_rule(q)?,
            fine_volume: make_volume_rule(q + 2)?,
            fine_edge: make_edge_rule(q + 2)?,
        })
    }

    /// `q = p + 3`.
    pub fn for_degree(p: usize) -> Result<Self> {
        Self::with_points(p + 3)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AssemblyOptions {
    pub dof_cap: usize,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        Self {
            dof_cap: DEFAULT_DOF_CAP,
        }
    }
}

/// The discrete problem `A x = b`, rows indexed by test functions.
#[derive(Debug, Clone)]
pub struct DGSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub dof_map: DofMap,
    pub params: FormParams,
}

struct BlockAccumulator {
    dim: usize,
    blocks: BTreeMap<(usize, usize), Mat<f64>>,
}

impl BlockAccumulator {
    fn add(&mut self, block: LocalBlock) {
        let dim = self.dim;
        let entry = self
            .blocks
            .entry((block.row_elem, block.col_elem))
            .or_insert_with(|| Mat::zeros(dim, dim));
        *entry += &block.matrix;
    }

    fn into_csr(self, dofs: DofMap) -> CsrMatrix {
        let n = dofs.total();
        let dim = self.dim;
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        let mut by_row: Vec<Vec<(usize, &Mat<f64>)>> = vec![Vec::new(); dofs.n_elements];
        for ((r, c), m) in &self.blocks {
            by_row[*r].push((*c, m));
        }
        for row_blocks in &by_row {
            for i in 0..dim {
                for (c, m) in row_blocks {
                    let off = dofs.offset(*c);
                    for j in 0..dim {
                        col_idx.push(off + j);
                        values.push(m[(i, j)]);
                    }
                }
                row_ptr.push(col_idx.len());
            }
        }
        CsrMatrix {
            nrows: n,
            ncols: n,
            row_ptr,
            col_idx,
            values,
        }
    }
}

fn check_inputs(
    mesh: &MeshTopology,
    basis: &BasisSet,
    params: &FormParams,
    opts: &AssemblyOptions,
) -> Result<DofMap> {
    params.validate()?;
    if params.p != basis.degree() {
        return Err(DgError::InvalidParameter(format!(
            "parameter degree {} does not match basis degree {}",
            params.p,
            basis.degree()
        )));
    }
    let dof_map = DofMap {
        block_size: basis.dim(),
        n_elements: mesh.num_elements(),
    };
    if dof_map.total() > opts.dof_cap {
        return Err(DgError::TooManyDofs {
            dofs: dof_map.total(),
            cap: opts.dof_cap,
        });
    }
    Ok(dof_map)
}

/// Galerkin matrix of the bilinear form in the global modal basis.
///
/// Contributions are summed in a fixed order (elements, then interior faces,
/// then boundary faces) so repeated calls are bitwise identical.
pub fn assemble_operator(
    mesh: &MeshTopology,
    basis: &BasisSet,
    rules: &Rules,
    k: &CoefficientField,
    params: &FormParams,
    opts: &AssemblyOptions,
) -> Result<(CsrMatrix, DofMap)> {
    let dof_map = check_inputs(mesh, basis, params, opts)?;
    let mut acc = BlockAccumulator {
        dim: basis.dim(),
        blocks: BTreeMap::new(),
    };
    for element in &mesh.elements {
        acc.add(volume_kernel(element, basis, &rules.volume, k)?);
    }
    for face in &mesh.interior_faces {
        for block in interior_face_kernel(mesh, face, basis, &rules.edge, k, params)? {
            acc.add(block);
        }
    }
    for face in &mesh.boundary_faces {
        acc.add(boundary_face_kernel(mesh, face, basis, &rules.edge, k)?);
    }
    Ok((acc.into_csr(dof_map), dof_map))
}

/// Matrix plus load vector; the load uses the fine rule.
pub fn assemble(
    mesh: &MeshTopology,
    basis: &BasisSet,
    rules: &Rules,
    k: &CoefficientField,
    f: &dyn Fn(Point) -> f64,
    params: &FormParams,
    opts: &AssemblyOptions,
) -> Result<DGSystem> {
    let (matrix, dof_map) = assemble_operator(mesh, basis, rules, k, params, opts)?;
    let mut rhs = vec![0.0; dof_map.total()];
    for element in &mesh.elements {
        let local = load_kernel(element, basis, &rules.fine_volume, f)?;
        let off = dof_map.offset(element.index);
        rhs[off..off + local.len()].copy_from_slice(&local);
    }
    Ok(DGSystem {
        matrix,
        rhs,
        dof_map,
        params: *params,
    })
}
