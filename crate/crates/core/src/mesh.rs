//! Structured affine quadrilateral meshes of the unit square.
//!
//! Elements are numbered row-major from the bottom-left corner. Every interior
//! face stores the higher-numbered neighbour as `elem_hi` and carries a unit
//! normal pointing outward from that element, so that the jump of a quantity
//! across the face is always `value(hi) - value(lo)`. Boundary faces carry the
//! outward normal of the domain.

use crate::refelem::EdgeRule;
use crate::{DgError, Point, Result};

/// `x = translation + linear * x_ref` from the reference square `[-1, 1]^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub translation: Point,
    pub linear: [[f64; 2]; 2],
    pub det: f64,
}

impl AffineMap {
    pub fn new(translation: Point, linear: [[f64; 2]; 2]) -> Self {
        let det = linear[0][0] * linear[1][1] - linear[0][1] * linear[1][0];
        Self {
            translation,
            linear,
            det,
        }
    }

    pub fn apply(&self, r: Point) -> Point {
        let a = &self.linear;
        [
            self.translation[0] + a[0][0] * r[0] + a[0][1] * r[1],
            self.translation[1] + a[1][0] * r[0] + a[1][1] * r[1],
        ]
    }

    /// Inverse of the linear part.
    pub fn inverse_linear(&self) -> [[f64; 2]; 2] {
        let a = &self.linear;
        let d = self.det;
        [[a[1][1] / d, -a[0][1] / d], [-a[1][0] / d, a[0][0] / d]]
    }

    pub fn to_reference(&self, x: Point) -> Point {
        let inv = self.inverse_linear();
        let dx = [x[0] - self.translation[0], x[1] - self.translation[1]];
        [
            inv[0][0] * dx[0] + inv[0][1] * dx[1],
            inv[1][0] * dx[0] + inv[1][1] * dx[1],
        ]
    }

    /// Maps a reference gradient to a physical one (`A^{-T} g`).
    pub fn physical_gradient(&self, g: Point) -> Point {
        let inv = self.inverse_linear();
        [
            inv[0][0] * g[0] + inv[1][0] * g[1],
            inv[0][1] * g[0] + inv[1][1] * g[1],
        ]
    }

    /// Maps a reference Hessian to a physical one (`A^{-T} H A^{-1}`).
    pub fn physical_hessian(&self, hr: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
        let inv = self.inverse_linear();
        let mut out = [[0.0; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                let mut s = 0.0;
                for k in 0..2 {
                    for l in 0..2 {
                        s += inv[k][i] * hr[k][l] * inv[l][j];
                    }
                }
                *v = s;
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub index: usize,
    /// Counter-clockwise from the bottom-left vertex.
    pub vertices: [Point; 4],
    pub map: AffineMap,
    /// Diameter `h_E` (the diagonal length).
    pub diameter: f64,
}

impl Element {
    pub fn centroid(&self) -> Point {
        self.map.translation
    }

    /// Reference area (4) times the Jacobian determinant.
    pub fn area(&self) -> f64 {
        4.0 * self.map.det.abs()
    }

    pub fn contains(&self, x: Point, tol: f64) -> bool {
        let r = self.map.to_reference(x);
        r[0].abs() <= 1.0 + tol && r[1].abs() <= 1.0 + tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FaceKind {
    Interior,
    Boundary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    /// Position inside `interior_faces` or `boundary_faces`, depending on `kind`.
    pub index: usize,
    pub kind: FaceKind,
    pub elem_hi: usize,
    pub elem_lo: Option<usize>,
    pub normal: Point,
    pub length: f64,
    pub endpoints: [Point; 2],
}

impl Face {
    pub fn midpoint(&self) -> Point {
        let [a, b] = self.endpoints;
        [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
    }

    /// Physical point for the edge parameter `s` in `[-1, 1]`.
    pub fn point_at(&self, s: f64) -> Point {
        let [a, b] = self.endpoints;
        let m = self.midpoint();
        [
            m[0] + 0.5 * s * (b[0] - a[0]),
            m[1] + 0.5 * s * (b[1] - a[1]),
        ]
    }
}

/// A physical quadrature point on a face together with the reference
/// coordinates of the same point seen from each adjacent element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub physical: Point,
    /// Line measure weight (reference weight times half the face length).
    pub weight: f64,
    pub hi: Point,
    pub lo: Option<Point>,
}

#[derive(Debug, Clone)]
pub struct MeshTopology {
    pub n_per_side: usize,
    pub elements: Vec<Element>,
    pub interior_faces: Vec<Face>,
    pub boundary_faces: Vec<Face>,
    /// Grid spacing `1 / n_per_side`.
    pub h: f64,
}

/// Uniform `n x n` mesh of `[0, 1]^2`.
pub fn build_uniform_quad_mesh(n_per_side: usize) -> Result<MeshTopology> {
    if n_per_side == 0 {
        return Err(DgError::EmptyMesh);
    }
    let n = n_per_side;
    let h = 1.0 / n as f64;
    let coord = |i: usize| i as f64 * h;
    let id = |row: usize, col: usize| row * n + col;

    let mut elements = Vec::with_capacity(n * n);
    for row in 0..n {
        for col in 0..n {
            let (x0, x1, y0, y1) = (coord(col), coord(col + 1), coord(row), coord(row + 1));
            let center = [0.5 * (x0 + x1), 0.5 * (y0 + y1)];
            let half = 0.5 * h;
            elements.push(Element {
                index: id(row, col),
                vertices: [[x0, y0], [x1, y0], [x1, y1], [x0, y1]],
                map: AffineMap::new(center, [[half, 0.0], [0.0, half]]),
                diameter: h * std::f64::consts::SQRT_2,
            });
        }
    }

    let mut interior_faces = Vec::with_capacity(2 * n * (n - 1));
    for row in 0..n {
        for col in 0..n {
            let e = id(row, col);
            if col + 1 < n {
                // vertical face, hi is the right neighbour
                let x = coord(col + 1);
                interior_faces.push(Face {
                    index: interior_faces.len(),
                    kind: FaceKind::Interior,
                    elem_hi: id(row, col + 1),
                    elem_lo: Some(e),
                    normal: [-1.0, 0.0],
                    length: h,
                    endpoints: [[x, coord(row)], [x, coord(row + 1)]],
                });
            }
            if row + 1 < n {
                // horizontal face, hi is the upper neighbour
                let y = coord(row + 1);
                interior_faces.push(Face {
                    index: interior_faces.len(),
                    kind: FaceKind::Interior,
                    elem_hi: id(row + 1, col),
                    elem_lo: Some(e),
                    normal: [0.0, -1.0],
                    length: h,
                    endpoints: [[coord(col), y], [coord(col + 1), y]],
                });
            }
        }
    }

    let mut boundary_faces = Vec::with_capacity(4 * n);
    let mut push_boundary = |elem: usize, normal: Point, endpoints: [Point; 2]| {
        boundary_faces.push(Face {
            index: boundary_faces.len(),
            kind: FaceKind::Boundary,
            elem_hi: elem,
            elem_lo: None,
            normal,
            length: h,
            endpoints,
        });
    };
    for col in 0..n {
        push_boundary(
            id(0, col),
            [0.0, -1.0],
            [[coord(col), 0.0], [coord(col + 1), 0.0]],
        );
    }
    for row in 0..n {
        push_boundary(
            id(row, n - 1),
            [1.0, 0.0],
            [[1.0, coord(row)], [1.0, coord(row + 1)]],
        );
    }
    for col in 0..n {
        push_boundary(
            id(n - 1, col),
            [0.0, 1.0],
            [[coord(col), 1.0], [coord(col + 1), 1.0]],
        );
    }
    for row in 0..n {
        push_boundary(
            id(row, 0),
            [-1.0, 0.0],
            [[0.0, coord(row)], [0.0, coord(row + 1)]],
        );
    }

    Ok(MeshTopology {
        n_per_side,
        elements,
        interior_faces,
        boundary_faces,
        h,
    })
}

impl MeshTopology {
    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    /// `max_E h_E`, the global mesh size used in the stabilization weight.
    pub fn max_diameter(&self) -> f64 {
        self.elements.iter().map(|e| e.diameter).fold(0.0, f64::max)
    }

    pub fn faces(&self) -> impl Iterator<Item = &Face> {
        self.interior_faces.iter().chain(self.boundary_faces.iter())
    }

    /// Element containing `x`. Points on inter-element lines go to the
    /// element with the larger column / row index, clamped at the boundary.
    pub fn locate(&self, x: Point) -> Option<usize> {
        let tol = 1e-12;
        if !(-tol..=1.0 + tol).contains(&x[0]) || !(-tol..=1.0 + tol).contains(&x[1]) {
            return None;
        }
        let n = self.n_per_side;
        let cell = |t: f64| ((t * n as f64).floor().max(0.0) as usize).min(n - 1);
        Some(cell(x[1]) * n + cell(x[0]))
    }

    /// Quadrature points along `face`, paired with the reference coordinates
    /// in the adjacent element(s).
    pub fn face_trace_points(&self, face: &Face, rule: &EdgeRule) -> Result<Vec<TracePoint>> {
        let owned = match face.kind {
            FaceKind::Interior => self.interior_faces.get(face.index),
            FaceKind::Boundary => self.boundary_faces.get(face.index),
        };
        if owned != Some(face) {
            return Err(DgError::FaceMismatch { index: face.index });
        }
        if face.length <= 0.0 {
            return Err(DgError::DegenerateFace(face.index));
        }
        let hi = &self.elements[face.elem_hi].map;
        let lo = face.elem_lo.map(|e| &self.elements[e].map);
        Ok(rule
            .points
            .iter()
            .zip(&rule.weights)
            .map(|(&s, &w)| {
                let x = face.point_at(s);
                TracePoint {
                    physical: x,
                    weight: 0.5 * face.length * w,
                    hi: hi.to_reference(x),
                    lo: lo.map(|m| m.to_reference(x)),
                }
            })
            .collect())
    }
}
