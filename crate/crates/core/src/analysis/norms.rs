use crate::forms::{CoefficientField, FormParams};
use crate::mesh::{FaceKind, MeshTopology};
use crate::refelem::{EdgeRule, VolumeRule};
use crate::system::BrokenField;
use crate::Point;

/// Weights of the mesh-dependent norm, copied from [`FormParams`] and the mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormWeights {
    pub nu: f64,
    pub theta: f64,
    pub lambda: f64,
    pub zeta: f64,
    pub sigma: f64,
    pub p: usize,
    /// Global mesh size `max_E h_E`.
    pub h: f64,
}

impl NormWeights {
    pub fn new(params: &FormParams, mesh: &MeshTopology) -> Self {
        Self {
            nu: params.nu,
            theta: params.theta,
            lambda: params.lambda,
            zeta: params.zeta,
            sigma: params.sigma,
            p: params.p,
            h: mesh.max_diameter(),
        }
    }

    /// Weight of `||K grad v . mu||^2_{L2(dE)}`: `h_E^nu / p^theta` times the
    /// `h_E` that stands in for the `H^{-1/2}(dE)` scaling.
    pub fn boundary_flux_weight(&self, h_e: f64) -> f64 {
        h_e.powf(self.nu) / (self.p as f64).powf(self.theta) * h_e
    }

    /// `sigma h^lambda / p^zeta`.
    pub fn flux_jump_weight(&self) -> f64 {
        self.sigma * self.h.powf(self.lambda) / (self.p as f64).powf(self.zeta)
    }
}

/// The three squared contributions of the triple-norm surrogate.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TripleNormTerms {
    /// `sum_E ||K^{1/2} grad v||^2 + ||v||^2`.
    pub star: f64,
    /// `sum_E h_E^{nu+1} / p^theta ||K grad v . mu||^2_{L2(dE)}`.
    pub boundary_flux: f64,
    /// `sigma h^lambda / p^zeta ||[K grad v . n]||^2_{L2(Gamma_int)}`.
    pub flux_jump: f64,
}

impl TripleNormTerms {
    pub fn squared(&self) -> f64 {
        self.star + self.boundary_flux + self.flux_jump
    }

    pub fn norm(&self) -> f64 {
        self.squared().sqrt()
    }
}

#[inline]
fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn elementwise_error(
    mesh: &MeshTopology,
    u_h: &dyn BrokenField,
    u_exact: &dyn BrokenField,
    rule: &VolumeRule,
    with_gradient: bool,
) -> f64 {
    let mut total = 0.0;
    for e in &mesh.elements {
        let jac = e.map.det.abs();
        for (r, w) in rule.iter() {
            let x = e.map.apply(*r);
            let (a, ga) = u_h.value_grad(e.index, x);
            let (b, gb) = u_exact.value_grad(e.index, x);
            let mut s = (a - b).powi(2);
            if with_gradient {
                s += (ga[0] - gb[0]).powi(2) + (ga[1] - gb[1]).powi(2);
            }
            total += w * jac * s;
        }
    }
    total.sqrt()
}

/// `||u_h - u||_{L2(Omega)}`.
pub fn l2_error(
    mesh: &MeshTopology,
    u_h: &dyn BrokenField,
    u_exact: &dyn BrokenField,
    rule: &VolumeRule,
) -> f64 {
    elementwise_error(mesh, u_h, u_exact, rule, false)
}

/// `(sum_E ||u_h - u||^2_{H1(E)})^{1/2}`; no face terms.
pub fn broken_h1_error(
    mesh: &MeshTopology,
    u_h: &dyn BrokenField,
    u_exact: &dyn BrokenField,
    rule: &VolumeRule,
) -> f64 {
    elementwise_error(mesh, u_h, u_exact, rule, true)
}

/// `||f||_{L2(Omega)}` for a plain function.
pub fn l2_norm_fn(mesh: &MeshTopology, f: &dyn Fn(Point) -> f64, rule: &VolumeRule) -> f64 {
    let mut total = 0.0;
    for e in &mesh.elements {
        let jac = e.map.det.abs();
        for (r, w) in rule.iter() {
            total += w * jac * f(e.map.apply(*r)).powi(2);
        }
    }
    total.sqrt()
}

/// Computable stand-in for the triple norm: the `H^{-1/2}(dE)` flux norm is
/// replaced by `h_E ||.||^2_{L2(dE)}`, every other term is integrated exactly.
pub fn triple_norm_surrogate(
    mesh: &MeshTopology,
    v: &dyn BrokenField,
    k: &CoefficientField,
    weights: &NormWeights,
    volume: &VolumeRule,
    edge: &EdgeRule,
) -> TripleNormTerms {
    let mut terms = TripleNormTerms::default();
    for e in &mesh.elements {
        let jac = e.map.det.abs();
        for (r, w) in volume.iter() {
            let x = e.map.apply(*r);
            let (val, g) = v.value_grad(e.index, x);
            terms.star += w * jac * (k.eval(e.index, x).abs() * dot(g, g) + val * val);
        }
    }
    let jump_weight = weights.flux_jump_weight();
    for face in mesh.faces() {
        let mut sides = vec![(face.elem_hi, 1.0)];
        if let Some(lo) = face.elem_lo {
            sides.push((lo, -1.0));
        }
        for (s, w) in edge.iter() {
            let x = face.point_at(*s);
            let lw = 0.5 * face.length * w;
            let mut flux_n = [0.0; 2];
            for (idx, &(elem, sign)) in sides.iter().enumerate() {
                let (_, g) = v.value_grad(elem, x);
                let q = k.eval(elem, x) * dot(g, face.normal);
                flux_n[idx] = q;
                let h_e = mesh.elements[elem].diameter;
                // K grad v . mu with mu = sign * n
                terms.boundary_flux += weights.boundary_flux_weight(h_e) * lw * (sign * q).powi(2);
            }
            if face.kind == FaceKind::Interior {
                terms.flux_jump += jump_weight * lw * (flux_n[0] - flux_n[1]).powi(2);
            }
        }
    }
    terms
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_uniform_quad_mesh;
    use crate::refelem::{make_basis, make_edge_rule, make_volume_rule};
    use crate::system::SolutionField;

    #[test]
    fn identical_fields_have_zero_error() {
        let mesh = build_uniform_quad_mesh(3).unwrap();
        let basis = make_basis(2).unwrap();
        let c: Vec<f64> = (0..mesh.num_elements() * basis.dim())
            .map(|i| (i as f64).sin())
            .collect();
        let u = SolutionField::new(&mesh, &basis, c).unwrap();
        let rule = make_volume_rule(7).unwrap();
        assert!(l2_error(&mesh, &u, &u, &rule) <= 1e-14);
        assert!(broken_h1_error(&mesh, &u, &u, &rule) <= 1e-14);
    }

    #[test]
    fn constant_offset_error() {
        let mesh = build_uniform_quad_mesh(2).unwrap();
        let rule = make_volume_rule(3).unwrap();
        let a = |_: usize, x: Point| (x[0] * x[1] + 0.3, [x[1], x[0]]);
        let b = |_: usize, x: Point| (x[0] * x[1], [x[1], x[0]]);
        assert!((broken_h1_error(&mesh, &a, &b, &rule) - 0.3).abs() < 1e-14);
        assert!((l2_error(&mesh, &a, &b, &rule) - 0.3).abs() < 1e-14);
    }

    #[test]
    fn surrogate_of_zero_is_zero() {
        let mesh = build_uniform_quad_mesh(2).unwrap();
        let k = CoefficientField::constant(1.0);
        let w = NormWeights::new(&FormParams::new(2), &mesh);
        let zero = |_: usize, _: Point| (0.0, [0.0, 0.0]);
        let t = triple_norm_surrogate(
            &mesh,
            &zero,
            &k,
            &w,
            &make_volume_rule(3).unwrap(),
            &make_edge_rule(3).unwrap(),
        );
        assert_eq!(t.norm(), 0.0);
    }

    #[test]
    fn smooth_field_has_no_flux_jump() {
        let mesh = build_uniform_quad_mesh(4).unwrap();
        let k = CoefficientField::from_fn("xy", |x| x[0] * x[1] + 0.1);
        let w = NormWeights::new(&FormParams::new(2), &mesh);
        let smooth = |_: usize, x: Point| {
            (
                (x[0] * 3.0).sin() * x[1],
                [3.0 * (x[0] * 3.0).cos() * x[1], (x[0] * 3.0).sin()],
            )
        };
        let t = triple_norm_surrogate(
            &mesh,
            &smooth,
            &k,
            &w,
            &make_volume_rule(6).unwrap(),
            &make_edge_rule(6).unwrap(),
        );
        assert!(t.flux_jump.abs() < 1e-28);
        assert!(t.star > 0.0 && t.boundary_flux > 0.0);
    }

    #[test]
    fn surrogate_dominates_star_norm() {
        let mesh = build_uniform_quad_mesh(3).unwrap();
        let basis = make_basis(3).unwrap();
        let k = CoefficientField::from_fn("xy", |x| x[0] * x[1]);
        let c: Vec<f64> = (0..mesh.num_elements() * basis.dim())
            .map(|i| ((i * 7919) % 13) as f64 / 6.5 - 1.0)
            .collect();
        let u = SolutionField::new(&mesh, &basis, c).unwrap();
        let w = NormWeights::new(&FormParams::new(3), &mesh);
        let t = triple_norm_surrogate(
            &mesh,
            &u,
            &k,
            &w,
            &make_volume_rule(6).unwrap(),
            &make_edge_rule(6).unwrap(),
        );
        assert!(t.squared() >= t.star);
        assert!(t.flux_jump > 0.0);
    }
}
