//! Direct evaluation of the bilinear form on the uniform n x n mesh, one
//! integral at a time, with geometry rebuilt from scratch.

#![allow(dead_code)]

use fluxdg::refelem::{make_edge_rule, make_volume_rule, BasisSet};
use fluxdg::system::CsrMatrix;
use fluxdg::Point;

pub struct OracleParams {
    pub sigma: f64,
    pub lambda: f64,
    pub zeta: f64,
}

struct Cell {
    lo: Point,
    size: f64,
}

impl Cell {
    fn of(e: usize, n: usize) -> Self {
        let size = 1.0 / n as f64;
        Cell {
            lo: [(e % n) as f64 * size, (e / n) as f64 * size],
            size,
        }
    }

    fn to_ref(&self, x: Point) -> Point {
        [
            2.0 * (x[0] - self.lo[0]) / self.size - 1.0,
            2.0 * (x[1] - self.lo[1]) / self.size - 1.0,
        ]
    }

    fn map_ref(&self, r: Point) -> Point {
        [
            self.lo[0] + 0.5 * (r[0] + 1.0) * self.size,
            self.lo[1] + 0.5 * (r[1] + 1.0) * self.size,
        ]
    }

    /// Edges as (start, end, outward normal).
    fn edges(&self) -> [(Point, Point, Point); 4] {
        let [x0, y0] = self.lo;
        let (x1, y1) = (x0 + self.size, y0 + self.size);
        [
            ([x0, y0], [x1, y0], [0.0, -1.0]),
            ([x1, y0], [x1, y1], [1.0, 0.0]),
            ([x1, y1], [x0, y1], [0.0, 1.0]),
            ([x0, y1], [x0, y0], [-1.0, 0.0]),
        ]
    }
}

/// Values and physical gradients of every basis function of element `cell` at `x`.
fn shape(basis: &BasisSet, cell: &Cell, x: Point) -> (Vec<f64>, Vec<Point>) {
    let r = cell.to_ref(x);
    let r = [r[0].clamp(-1.0, 1.0), r[1].clamp(-1.0, 1.0)];
    let (v, g) = basis.eval(r).unwrap();
    let s = 2.0 / cell.size;
    (v, g.into_iter().map(|g| [s * g[0], s * g[1]]).collect())
}

fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Shared edges found by comparing the edge lists of every element pair.
/// Returned as (hi, lo, start, end, normal pointing out of hi).
fn interior_edges(n: usize) -> Vec<(usize, usize, Point, Point, Point)> {
    let close = |a: Point, b: Point| (a[0] - b[0]).abs() < 1e-14 && (a[1] - b[1]).abs() < 1e-14;
    let mut out = Vec::new();
    for hi in 0..n * n {
        for lo in 0..hi {
            for (a, b, normal) in Cell::of(hi, n).edges() {
                for (c, d, _) in Cell::of(lo, n).edges() {
                    if close(a, d) && close(b, c) {
                        out.push((hi, lo, a, b, normal));
                    }
                }
            }
        }
    }
    out
}

/// Dense `A[test][trial] = B(trial, test)` on the n x n mesh.
pub fn oracle_matrix(
    n: usize,
    basis: &BasisSet,
    k: &dyn Fn(Point) -> f64,
    prm: &OracleParams,
) -> Vec<Vec<f64>> {
    let m = basis.dim();
    let q = basis.degree() + 3;
    let vol = make_volume_rule(q).unwrap();
    let edge = make_edge_rule(q).unwrap();
    let mut a = vec![vec![0.0; m * n * n]; m * n * n];

    for e in 0..n * n {
        let cell = Cell::of(e, n);
        let jac = 0.25 * cell.size * cell.size;
        // volume: K grad u . grad v + u v
        for (r, w) in vol.points.iter().zip(&vol.weights) {
            let x = cell.map_ref(*r);
            let (v, g) = shape(basis, &cell, x);
            for i in 0..m {
                for j in 0..m {
                    a[e * m + i][e * m + j] += w * jac * (k(x) * dot(g[j], g[i]) + v[j] * v[i]);
                }
            }
        }
        // element boundary: -(v K grad u . mu - K grad v . mu u)
        for (start, end, mu) in cell.edges() {
            let len = cell.size;
            for (s, w) in edge.points.iter().zip(&edge.weights) {
                let t = 0.5 * (s + 1.0);
                let x = [
                    start[0] + t * (end[0] - start[0]),
                    start[1] + t * (end[1] - start[1]),
                ];
                let ds = 0.5 * len * w;
                let (v, g) = shape(basis, &cell, x);
                for i in 0..m {
                    for j in 0..m {
                        let term = v[i] * k(x) * dot(g[j], mu) - k(x) * dot(g[i], mu) * v[j];
                        a[e * m + i][e * m + j] -= ds * term;
                    }
                }
            }
        }
    }

    let h = 2f64.sqrt() / n as f64;
    let weight = prm.sigma * h.powf(prm.lambda) / (basis.degree() as f64).powf(prm.zeta);
    for (hi, lo, start, end, normal) in interior_edges(n) {
        let len = ((end[0] - start[0]).powi(2) + (end[1] - start[1]).powi(2)).sqrt();
        let (c_hi, c_lo) = (Cell::of(hi, n), Cell::of(lo, n));
        for (s, w) in edge.points.iter().zip(&edge.weights) {
            let t = 0.5 * (s + 1.0);
            let x = [
                start[0] + t * (end[0] - start[0]),
                start[1] + t * (end[1] - start[1]),
            ];
            let ds = 0.5 * len * w;
            let kx = k(x);
            let (v_hi, g_hi) = shape(basis, &c_hi, x);
            let (v_lo, g_lo) = shape(basis, &c_lo, x);
            // traces of a basis function living on `elem`, as seen from each side
            let trace = |elem: usize, i: usize| -> ((f64, f64), (f64, f64)) {
                if elem == hi {
                    ((v_hi[i], 0.0), (kx * dot(g_hi[i], normal), 0.0))
                } else {
                    ((0.0, v_lo[i]), (0.0, kx * dot(g_lo[i], normal)))
                }
            };
            for &te in &[hi, lo] {
                for &tr in &[hi, lo] {
                    for i in 0..m {
                        for j in 0..m {
                            let (vv, vf) = trace(te, i);
                            let (uv, uf) = trace(tr, j);
                            let avg_v = 0.5 * (vv.0 + vv.1);
                            let avg_u = 0.5 * (uv.0 + uv.1);
                            let jump_uf = uf.0 - uf.1;
                            let jump_vf = vf.0 - vf.1;
                            let term =
                                avg_v * jump_uf - avg_u * jump_vf + weight * jump_uf * jump_vf;
                            a[te * m + i][tr * m + j] += ds * term;
                        }
                    }
                }
            }
        }
    }
    a
}

pub fn dense(m: &CsrMatrix) -> Vec<Vec<f64>> {
    (0..m.nrows)
        .map(|i| (0..m.ncols).map(|j| m.get(i, j)).collect())
        .collect()
}

pub fn max_entry_gap(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(r, s)| r.iter().zip(s).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max)
}
