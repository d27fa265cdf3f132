//! Local kernels of the flux-jump stabilized bilinear form and the load form.
//!
//! On an interior face with normal `n` pointing out of the higher-index
//! element, the per-element boundary integrals and the interface integrals
//! are fused through `[ab] = [a]<b> + <a>[b]` into
//!
//! ```text
//!   -[v] <K grad u . n> + [u] <K grad v . n> + s [K grad u . n] [K grad v . n],
//!   s = sigma h^lambda / p^zeta
//! ```
//!
//! and on a boundary face with outward normal `mu` the contribution is
//! `-v (K grad u . mu) + u (K grad v . mu)`. Block rows index the test
//! function, block columns the trial function.

use std::fmt;
use std::sync::Arc;

use faer::Mat;

use crate::mesh::{Element, Face, FaceKind, MeshTopology, TracePoint};
use crate::refelem::{BasisSet, BasisTable, EdgeRule, VolumeRule};
use crate::{DgError, Point, Result};

/// Stabilization and norm parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormParams {
    pub sigma: f64,
    pub lambda: f64,
    pub zeta: f64,
    pub nu: f64,
    pub theta: f64,
    /// Global polynomial degree.
    pub p: usize,
}

impl FormParams {
    /// `sigma = 1`, `lambda = nu = 1`, `zeta = theta = 2`.
    pub fn new(p: usize) -> Self {
        Self {
            sigma: 1.0,
            lambda: 1.0,
            zeta: 2.0,
            nu: 1.0,
            theta: 2.0,
            p,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(DgError::InvalidParameter(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        for (name, v) in [
            ("lambda", self.lambda),
            ("zeta", self.zeta),
            ("nu", self.nu),
            ("theta", self.theta),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(DgError::InvalidParameter(format!(
                    "{name} must be non-negative, got {v}"
                )));
            }
        }
        if self.p == 0 {
            return Err(DgError::InvalidParameter("p must be at least 1".into()));
        }
        Ok(())
    }

    /// `sigma h^lambda / p^zeta`.
    pub fn stabilization_weight(&self, h: f64) -> f64 {
        self.sigma * h.powf(self.lambda) / (self.p as f64).powf(self.zeta)
    }
}

type CoefficientFn = dyn Fn(usize, Point) -> f64 + Send + Sync;

/// Diffusion coefficient, defined element by element so it may jump across faces.
#[derive(Clone)]
pub struct CoefficientField {
    name: String,
    eval: Arc<CoefficientFn>,
}

impl fmt::Debug for CoefficientField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientField")
            .field("name", &self.name)
            .finish()
    }
}

impl CoefficientField {
    pub fn constant(value: f64) -> Self {
        Self::from_fn(format!("{value}"), move |_| value)
    }

    pub fn from_fn(
        name: impl Into<String>,
        f: impl Fn(Point) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            eval: Arc::new(move |_, x| f(x)),
        }
    }

    pub fn elementwise(
        name: impl Into<String>,
        f: impl Fn(usize, Point) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            eval: Arc::new(f),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn eval(&self, element: usize, x: Point) -> f64 {
        (self.eval)(element, x)
    }

    /// `(K_0, K_1)` over the volume quadrature points of every element.
    pub fn bounds(&self, mesh: &MeshTopology, rule: &VolumeRule) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for e in &mesh.elements {
            for r in &rule.points {
                let k = self.eval(e.index, e.map.apply(*r));
                lo = lo.min(k);
                hi = hi.max(k);
            }
        }
        (lo, hi)
    }
}

/// Dense coupling block between a test element (rows) and a trial element (columns).
#[derive(Debug, Clone)]
pub struct LocalBlock {
    pub row_elem: usize,
    pub col_elem: usize,
    pub matrix: Mat<f64>,
}

impl LocalBlock {
    fn zeros(row_elem: usize, col_elem: usize, dim: usize) -> Self {
        Self {
            row_elem,
            col_elem,
            matrix: Mat::zeros(dim, dim),
        }
    }
}

/// Replace reference gradients in `table` by physical ones.
pub(crate) fn to_physical(mut table: BasisTable, element: &Element) -> BasisTable {
    for g in table.grads.iter_mut() {
        *g = element.map.physical_gradient(*g);
    }
    table
}

#[inline]
fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Basis tables of both sides of a face at its trace points, with physical gradients.
pub(crate) struct FaceTables {
    pub points: Vec<TracePoint>,
    pub hi: BasisTable,
    pub lo: Option<BasisTable>,
}

pub(crate) fn face_tables(
    mesh: &MeshTopology,
    face: &Face,
    basis: &BasisSet,
    rule: &EdgeRule,
) -> Result<FaceTables> {
    let points = mesh.face_trace_points(face, rule)?;
    let hi_refs: Vec<Point> = points.iter().map(|t| t.hi).collect();
    let hi = to_physical(basis.tabulate(&hi_refs)?, &mesh.elements[face.elem_hi]);
    let lo = match face.elem_lo {
        Some(e) => {
            let refs: Vec<Point> = points.iter().filter_map(|t| t.lo).collect();
            Some(to_physical(basis.tabulate(&refs)?, &mesh.elements[e]))
        }
        None => None,
    };
    Ok(FaceTables { points, hi, lo })
}

/// `int_E (K grad u . grad v + u v) dx` for all basis pairs.
pub fn volume_kernel(
    element: &Element,
    basis: &BasisSet,
    rule: &VolumeRule,
    k: &CoefficientField,
) -> Result<LocalBlock> {
    let table = to_physical(basis.tabulate(&rule.points)?, element);
    let dim = basis.dim();
    let jac = element.map.det.abs();
    let mut block = LocalBlock::zeros(element.index, element.index, dim);
    for (q, (r, w)) in rule.iter().enumerate() {
        let x = element.map.apply(*r);
        let kval = k.eval(element.index, x);
        if !(kval > 0.0 && kval.is_finite()) {
            return Err(DgError::NonPositiveCoefficient {
                element: element.index,
                x: x[0],
                y: x[1],
                value: kval,
            });
        }
        let wq = w * jac;
        let v = table.point_values(q);
        let g = table.point_grads(q);
        for i in 0..dim {
            for j in i..dim {
                let val = wq * (kval * dot(g[i], g[j]) + v[i] * v[j]);
                block.matrix[(i, j)] += val;
            }
        }
    }
    for i in 0..dim {
        for j in 0..i {
            block.matrix[(i, j)] = block.matrix[(j, i)];
        }
    }
    Ok(block)
}

fn require_interior(face: &Face) -> Result<usize> {
    match (face.kind, face.elem_lo) {
        (FaceKind::Interior, Some(lo)) => Ok(lo),
        _ => Err(DgError::InvalidParameter(format!(
            "face {} is not an interior face",
            face.index
        ))),
    }
}

/// Shared loop for the interior face terms; `consistency` scales the
/// first-order average/jump pairing and `stab` the flux-jump product.
fn interior_blocks(
    mesh: &MeshTopology,
    face: &Face,
    basis: &BasisSet,
    rule: &EdgeRule,
    k: &CoefficientField,
    consistency: f64,
    stab: f64,
) -> Result<[LocalBlock; 4]> {
    let lo_elem = require_interior(face)?;
    if face.length <= 0.0 {
        return Err(DgError::DegenerateFace(face.index));
    }
    let tables = face_tables(mesh, face, basis, rule)?;
    let lo_table = tables.lo.as_ref().expect("interior face has two sides");
    let dim = basis.dim();
    let elems = [face.elem_hi, lo_elem];
    let signs = [1.0, -1.0];
    let mut blocks = [
        LocalBlock::zeros(elems[0], elems[0], dim),
        LocalBlock::zeros(elems[0], elems[1], dim),
        LocalBlock::zeros(elems[1], elems[0], dim),
        LocalBlock::zeros(elems[1], elems[1], dim),
    ];
    let n = face.normal;
    let mut flux = [vec![0.0; dim], vec![0.0; dim]];
    for (q, tp) in tables.points.iter().enumerate() {
        let sides = [&tables.hi, lo_table];
        for s in 0..2 {
            let kval = k.eval(elems[s], tp.physical);
            for (f, g) in flux[s].iter_mut().zip(sides[s].point_grads(q)) {
                *f = kval * dot(*g, n);
            }
        }
        for a in 0..2 {
            let va = sides[a].point_values(q);
            for b in 0..2 {
                let vb = sides[b].point_values(q);
                let m = &mut blocks[2 * a + b].matrix;
                let (sa, sb) = (signs[a], signs[b]);
                for i in 0..dim {
                    for j in 0..dim {
                        // test i on side a, trial j on side b
                        let pairing =
                            -sa * va[i] * 0.5 * flux[b][j] + sb * vb[j] * 0.5 * flux[a][i];
                        let jump = sa * sb * flux[b][j] * flux[a][i];
                        m[(i, j)] += tp.weight * (consistency * pairing + stab * jump);
                    }
                }
            }
        }
    }
    Ok(blocks)
}

/// All interior-face contributions, as `[hi-hi, hi-lo, lo-hi, lo-lo]` blocks.
pub fn interior_face_kernel(
    mesh: &MeshTopology,
    face: &Face,
    basis: &BasisSet,
    rule: &EdgeRule,
    k: &CoefficientField,
    params: &FormParams,
) -> Result<[LocalBlock; 4]> {
    let stab = params.stabilization_weight(mesh.max_diameter());
    interior_blocks(mesh, face, basis, rule, k, 1.0, stab)
}

/// `weight * int_F [K grad u . n][K grad v . n] ds` alone.
pub fn interior_face_stabilization(
    mesh: &MeshTopology,
    face: &Face,
    basis: &BasisSet,
    rule: &EdgeRule,
    k: &CoefficientField,
    weight: f64,
) -> Result<[LocalBlock; 4]> {
    interior_blocks(mesh, face, basis, rule, k, 0.0, weight)
}

/// `-int_F v (K grad u . mu) ds + int_F u (K grad v . mu) ds` on a boundary face.
pub fn boundary_face_kernel(
    mesh: &MeshTopology,
    face: &Face,
    basis: &BasisSet,
    rule: &EdgeRule,
    k: &CoefficientField,
) -> Result<LocalBlock> {
    if face.kind != FaceKind::Boundary {
        return Err(DgError::InvalidParameter(format!(
            "face {} is not a boundary face",
            face.index
        )));
    }
    let tables = face_tables(mesh, face, basis, rule)?;
    let dim = basis.dim();
    let elem = face.elem_hi;
    let mut block = LocalBlock::zeros(elem, elem, dim);
    let mut flux = vec![0.0; dim];
    for (q, tp) in tables.points.iter().enumerate() {
        let kval = k.eval(elem, tp.physical);
        for (f, g) in flux.iter_mut().zip(tables.hi.point_grads(q)) {
            *f = kval * dot(*g, face.normal);
        }
        let v = tables.hi.point_values(q);
        for i in 0..dim {
            for j in 0..dim {
                block.matrix[(i, j)] += tp.weight * (-v[i] * flux[j] + v[j] * flux[i]);
            }
        }
    }
    Ok(block)
}

/// `int_E f phi_k dx` for every mode.
pub fn load_kernel(
    element: &Element,
    basis: &BasisSet,
    rule: &VolumeRule,
    f: &dyn Fn(Point) -> f64,
) -> Result<Vec<f64>> {
    let table = basis.tabulate(&rule.points)?;
    let jac = element.map.det.abs();
    let mut out = vec![0.0; basis.dim()];
    for (q, (r, w)) in rule.iter().enumerate() {
        let fx = f(element.map.apply(*r));
        for (o, v) in out.iter_mut().zip(table.point_values(q)) {
            *o += w * jac * fx * v;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_uniform_quad_mesh;
    use crate::refelem::{make_basis, make_edge_rule, make_volume_rule};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn kxy() -> CoefficientField {
        CoefficientField::from_fn("xy", |x| x[0] * x[1])
    }

    fn max_abs(m: &Mat<f64>) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                worst = worst.max(m[(i, j)].abs());
            }
        }
        worst
    }

    fn quad_form(m: &Mat<f64>, u: &[f64], v: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                s += v[i] * m[(i, j)] * u[j];
            }
        }
        s
    }

    #[test]
    fn params_validation() {
        assert!(FormParams::new(2).validate().is_ok());
        let mut p = FormParams::new(2);
        p.sigma = 0.0;
        assert!(p.validate().is_err());
        let mut p = FormParams::new(2);
        p.theta = -1.0;
        assert!(p.validate().is_err());
        assert!((FormParams::new(2).stabilization_weight(0.5) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn volume_constant_mode_sees_mass_only() {
        let mesh = build_uniform_quad_mesh(1).unwrap();
        let basis = make_basis(1).unwrap();
        let rule = make_volume_rule(4).unwrap();
        let block = volume_kernel(
            &mesh.elements[0],
            &basis,
            &rule,
            &CoefficientField::constant(1.0),
        )
        .unwrap();
        // orthonormal on [-1,1]^2, element area 1 => physical mass = det * I = 1/4 * I
        let det = mesh.elements[0].map.det;
        for j in 0..basis.dim() {
            let expected = if j == 0 { det } else { 0.0 };
            assert!((block.matrix[(0, j)] - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn volume_block_symmetric_positive_definite() {
        let mesh = build_uniform_quad_mesh(4).unwrap();
        let basis = make_basis(3).unwrap();
        let rule = make_volume_rule(6).unwrap();
        let block = volume_kernel(&mesh.elements[9], &basis, &rule, &kxy()).unwrap();
        let m = &block.matrix;
        let mut defect: f64 = 0.0;
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                defect = defect.max((m[(i, j)] - m[(j, i)]).abs());
            }
        }
        assert!(defect <= 1e-14);

        // element [0.5, 0.75]^2 is index 2 * 4 + 2 = 10
        let basis2 = make_basis(2).unwrap();
        let block = volume_kernel(
            &mesh.elements[10],
            &basis2,
            &make_volume_rule(5).unwrap(),
            &kxy(),
        )
        .unwrap();
        let eig = block
            .matrix
            .self_adjoint_eigenvalues(faer::Side::Lower)
            .unwrap();
        assert!(eig[0] > 0.0);
    }

    #[test]
    fn volume_rejects_nonpositive_coefficient() {
        let mesh = build_uniform_quad_mesh(2).unwrap();
        let basis = make_basis(1).unwrap();
        let rule = make_volume_rule(3).unwrap();
        let k = CoefficientField::from_fn("shifted", |x| x[0] - 0.3);
        let err = volume_kernel(&mesh.elements[0], &basis, &rule, &k);
        assert!(matches!(
            err,
            Err(DgError::NonPositiveCoefficient { element: 0, .. })
        ));
    }

    #[test]
    fn stabilization_is_symmetric_psd() {
        let mesh = build_uniform_quad_mesh(3).unwrap();
        let basis = make_basis(2).unwrap();
        let rule = make_edge_rule(5).unwrap();
        let face = &mesh.interior_faces[4];
        let blocks = interior_face_stabilization(&mesh, face, &basis, &rule, &kxy(), 0.7).unwrap();
        let dim = basis.dim();
        let mut full = Mat::<f64>::zeros(2 * dim, 2 * dim);
        for (idx, b) in blocks.iter().enumerate() {
            let (a, c) = (idx / 2, idx % 2);
            for i in 0..dim {
                for j in 0..dim {
                    full[(a * dim + i, c * dim + j)] = b.matrix[(i, j)];
                }
            }
        }
        for i in 0..2 * dim {
            for j in 0..2 * dim {
                assert!((full[(i, j)] - full[(j, i)]).abs() < 1e-15);
            }
        }
        let eig = full.self_adjoint_eigenvalues(faer::Side::Lower).unwrap();
        assert!(eig[0] > -1e-13);
    }

    #[test]
    fn interior_face_at_u_equals_v_reduces_to_stabilization() {
        let mesh = build_uniform_quad_mesh(4).unwrap();
        let basis = make_basis(3).unwrap();
        let rule = make_edge_rule(6).unwrap();
        let params = FormParams::new(3);
        let k = kxy();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for face in &mesh.interior_faces[..6] {
            let full = interior_face_kernel(&mesh, face, &basis, &rule, &k, &params).unwrap();
            let stab = interior_face_stabilization(
                &mesh,
                face,
                &basis,
                &rule,
                &k,
                params.stabilization_weight(mesh.max_diameter()),
            )
            .unwrap();
            let v: Vec<Vec<f64>> = (0..2)
                .map(|_| {
                    (0..basis.dim())
                        .map(|_| rng.random_range(-1.0..1.0))
                        .collect()
                })
                .collect();
            let total = |bs: &[LocalBlock; 4]| -> f64 {
                (0..4)
                    .map(|idx| quad_form(&bs[idx].matrix, &v[idx % 2], &v[idx / 2]))
                    .sum()
            };
            let abs_v: Vec<Vec<f64>> = v
                .iter()
                .map(|w| w.iter().map(|x| x.abs()).collect())
                .collect();
            let scale: f64 = (0..4)
                .map(|idx| {
                    let m = full[idx].matrix.as_ref();
                    let (r, c) = (&abs_v[idx / 2], &abs_v[idx % 2]);
                    (0..m.nrows())
                        .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
                        .map(|(i, j)| r[i] * m[(i, j)].abs() * c[j])
                        .sum::<f64>()
                })
                .sum();
            let (a, b) = (total(&full), total(&stab));
            assert!((a - b).abs() <= 1e-14 * scale, "{a} vs {b} (scale {scale})");
        }
    }

    #[test]
    fn interior_face_vanishes_for_continuous_functions_with_continuous_flux() {
        // u = v = 1 on both sides: traces and fluxes are continuous
        let mesh = build_uniform_quad_mesh(2).unwrap();
        let basis = make_basis(2).unwrap();
        let rule = make_edge_rule(4).unwrap();
        let face = &mesh.interior_faces[0];
        let blocks =
            interior_face_kernel(&mesh, face, &basis, &rule, &kxy(), &FormParams::new(2)).unwrap();
        let c: Vec<f64> = (0..basis.dim())
            .map(|i| if i == 0 { 2.0 } else { 0.0 })
            .collect();
        let total: f64 = blocks.iter().map(|b| quad_form(&b.matrix, &c, &c)).sum();
        assert!(total.abs() < 1e-15);

        // a linear u = x on both sides with K = 1: [u] = 0, [grad u . n] = 0;
        // pair it with the constant v: every term vanishes
        let k1 = CoefficientField::constant(1.0);
        let blocks =
            interior_face_kernel(&mesh, face, &basis, &rule, &k1, &FormParams::new(2)).unwrap();
        let h = mesh.h;
        // u = x on element e with centre c_x: x = c_x + (h/2) x_ref
        let lin = |e: usize| -> Vec<f64> {
            let cx = mesh.elements[e].centroid()[0];
            let mut u = vec![0.0; basis.dim()];
            u[0] = cx * 2.0;
            u[1] = 0.5 * h / (3.0f64.sqrt() / 2.0);
            u
        };
        let u = [lin(face.elem_hi), lin(face.elem_lo.unwrap())];
        let total: f64 = (0..4)
            .map(|idx| quad_form(&blocks[idx].matrix, &u[idx % 2], &c))
            .sum();
        assert!(total.abs() < 1e-14, "{total}");
    }

    #[test]
    fn boundary_block_antisymmetric() {
        let mesh = build_uniform_quad_mesh(3).unwrap();
        let basis = make_basis(2).unwrap();
        let rule = make_edge_rule(5).unwrap();
        for face in &mesh.boundary_faces {
            let b = boundary_face_kernel(&mesh, face, &basis, &rule, &kxy()).unwrap();
            for i in 0..basis.dim() {
                for j in 0..basis.dim() {
                    assert!((b.matrix[(i, j)] + b.matrix[(j, i)]).abs() <= 1e-14);
                }
                // constant trial mode carries no flux
                assert!((b.matrix[(i, 0)] + b.matrix[(0, i)]).abs() <= 1e-14);
            }
            let k = &b.matrix;
            assert!(max_abs(k).is_finite());
        }
    }

    #[test]
    fn boundary_block_matches_direct_integration() {
        // single element [0,1]^2, bottom edge y = 0, outward normal (0,-1), K = 1.
        // integrate -v du/dmu + u dv/dmu with an independent 12-point rule in physical x
        let mesh = build_uniform_quad_mesh(1).unwrap();
        let basis = make_basis(1).unwrap();
        let face = &mesh.boundary_faces[0];
        assert_eq!(face.normal, [0.0, -1.0]);
        let b = boundary_face_kernel(
            &mesh,
            face,
            &basis,
            &make_edge_rule(3).unwrap(),
            &CoefficientField::constant(1.0),
        )
        .unwrap();
        let (s, w) = crate::refelem::gauss_legendre(12).unwrap();
        let mut oracle = [[0.0; 3]; 3];
        for (si, wi) in s.iter().zip(&w) {
            let x = 0.5 * (si + 1.0);
            let r = [2.0 * x - 1.0, -1.0];
            let (v, g) = basis.eval(r).unwrap();
            // physical gradient = 2 * reference gradient on the unit element
            let dn: Vec<f64> = g.iter().map(|g| -2.0 * g[1]).collect();
            for i in 0..3 {
                for j in 0..3 {
                    oracle[i][j] += 0.5 * wi * (-v[i] * dn[j] + v[j] * dn[i]);
                }
            }
        }
        for (i, row) in oracle.iter().enumerate() {
            for (j, o) in row.iter().enumerate() {
                assert!((b.matrix[(i, j)] - o).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn load_vector_basics() {
        let mesh = build_uniform_quad_mesh(4).unwrap();
        let basis = make_basis(2).unwrap();
        let rule = make_volume_rule(5).unwrap();
        let e = &mesh.elements[5];
        let zero = load_kernel(e, &basis, &rule, &|_| 0.0).unwrap();
        assert!(zero.iter().all(|&v| v == 0.0));
        let one = load_kernel(e, &basis, &rule, &|_| 1.0).unwrap();
        assert!((one[0] - e.area() * 0.5).abs() < 1e-15);
        assert!(one[1..].iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn rejects_wrong_face_kinds() {
        let mesh = build_uniform_quad_mesh(2).unwrap();
        let basis = make_basis(1).unwrap();
        let rule = make_edge_rule(2).unwrap();
        let k = CoefficientField::constant(1.0);
        assert!(interior_face_kernel(
            &mesh,
            &mesh.boundary_faces[0],
            &basis,
            &rule,
            &k,
            &FormParams::new(1)
        )
        .is_err());
        assert!(boundary_face_kernel(&mesh, &mesh.interior_faces[0], &basis, &rule, &k).is_err());
    }
}
