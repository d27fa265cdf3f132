use super::cases::ManufacturedCase;
use crate::mesh::MeshTopology;
use crate::refelem::BasisSet;
use crate::{DgError, Point, Result};

/// A function that is smooth inside each element but may jump across faces.
pub trait BrokenField {
    /// Value and physical gradient of the restriction to `element` at `x`.
    fn value_grad(&self, element: usize, x: Point) -> (f64, Point);
}

impl<F: Fn(usize, Point) -> (f64, Point)> BrokenField for F {
    fn value_grad(&self, element: usize, x: Point) -> (f64, Point) {
        self(element, x)
    }
}

/// The exact solution of a manufactured case, ignoring the element argument.
#[derive(Debug, Clone, Copy)]
pub struct ExactField<'a>(pub &'a ManufacturedCase);

impl BrokenField for ExactField<'_> {
    fn value_grad(&self, _element: usize, x: Point) -> (f64, Point) {
        self.0.value_grad(x)
    }
}

/// Discrete DG function: per-element modal coefficients.
#[derive(Debug, Clone)]
pub struct SolutionField<'a> {
    pub mesh: &'a MeshTopology,
    pub basis: &'a BasisSet,
    coefficients: Vec<f64>,
}

impl<'a> SolutionField<'a> {
    pub fn new(
        mesh: &'a MeshTopology,
        basis: &'a BasisSet,
        coefficients: Vec<f64>,
    ) -> Result<Self> {
        let expected = mesh.num_elements() * basis.dim();
        if coefficients.len() != expected {
            return Err(DgError::InvalidParameter(format!(
                "expected {expected} coefficients, got {}",
                coefficients.len()
            )));
        }
        Ok(Self {
            mesh,
            basis,
            coefficients,
        })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn block(&self, element: usize) -> &[f64] {
        let d = self.basis.dim();
        &self.coefficients[element * d..(element + 1) * d]
    }

    /// Evaluate at `x` in whichever element [`MeshTopology::locate`] picks.
    pub fn eval(&self, x: Point) -> Option<(usize, f64, Point)> {
        let e = self.mesh.locate(x)?;
        let (v, g) = self.value_grad(e, x);
        Some((e, v, g))
    }
}

impl BrokenField for SolutionField<'_> {
    fn value_grad(&self, element: usize, x: Point) -> (f64, Point) {
        let map = &self.mesh.elements[element].map;
        let r = map.to_reference(x).map(|c| c.clamp(-1.0, 1.0));
        let d = self.basis.dim();
        let mut vals = vec![0.0; d];
        let mut grads = vec![[0.0; 2]; d];
        self.basis.eval_into(r, &mut vals, &mut grads);
        let c = self.block(element);
        let mut value = 0.0;
        let mut gref = [0.0; 2];
        for k in 0..d {
            value += c[k] * vals[k];
            gref[0] += c[k] * grads[k][0];
            gref[1] += c[k] * grads[k][1];
        }
        (value, map.physical_gradient(gref))
    }
}
