use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mesh::{Element, MeshTopology};
use crate::refelem::{gauss_legendre, make_volume_rule, BasisSet};
use crate::{DgError, Point, Result};

pub const MIN_PROBE_SAMPLES: usize = 100;

/// Empirical maxima of the trace / inverse inequality ratios on one mesh.
///
/// - `r1 = ||grad w . mu||^2_{dE} / (h_E^{-1} ||grad w||^2_E + ||grad w||_E ||grad^2 w||_E)`
/// - `r2 = (h_E / p^2) ||grad w . mu||^2_{dE} / ||grad w||^2_E`
/// - `r3 = (h_E / p^2) ||grad w||_E / ||w||_E`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeReport {
    pub samples: usize,
    pub seed: u64,
    pub r1_max: f64,
    pub r2_max: f64,
    pub r3_max: f64,
    /// Samples with vanishing gradient.
    pub skipped: usize,
}

/// Element-local squared norms of a polynomial.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LocalNorms {
    pub l2: f64,
    pub grad: f64,
    pub hessian: f64,
    pub normal_trace: f64,
}

/// Reference tables reused for every sample on every element.
struct ProbeTables {
    dim: usize,
    vol_weights: Vec<f64>,
    vol_values: Vec<Vec<f64>>,
    vol_grads: Vec<Vec<Point>>,
    vol_hess: Vec<Vec<[[f64; 2]; 2]>>,
    // (reference outward normal, reference weights, reference gradients per point)
    edges: Vec<(Point, Vec<f64>, Vec<Vec<Point>>)>,
}

impl ProbeTables {
    fn new(basis: &BasisSet) -> Result<Self> {
        let q = basis.degree() + 3;
        let rule = make_volume_rule(q)?;
        let mut vol_values = Vec::new();
        let mut vol_grads = Vec::new();
        let mut vol_hess = Vec::new();
        for r in &rule.points {
            let (v, g) = basis.eval(*r)?;
            vol_values.push(v);
            vol_grads.push(g);
            vol_hess.push(basis.hessians(*r)?);
        }
        let (s, w) = gauss_legendre(q)?;
        let mut edges = Vec::new();
        for (normal, at) in [
            ([0.0, -1.0], (|t: f64| [t, -1.0]) as fn(f64) -> Point),
            ([1.0, 0.0], |t: f64| [1.0, t]),
            ([0.0, 1.0], |t: f64| [t, 1.0]),
            ([-1.0, 0.0], |t: f64| [-1.0, t]),
        ] {
            let grads = s
                .iter()
                .map(|&t| basis.eval(at(t)).map(|(_, g)| g))
                .collect::<Result<Vec<_>>>()?;
            edges.push((normal, w.clone(), grads));
        }
        Ok(Self {
            dim: basis.dim(),
            vol_weights: rule.weights,
            vol_values,
            vol_grads,
            vol_hess,
            edges,
        })
    }

    fn norms(&self, element: &Element, c: &[f64]) -> LocalNorms {
        let map = &element.map;
        let jac = map.det.abs();
        let combine_grad = |gs: &[Point]| -> Point {
            let mut g = [0.0; 2];
            for k in 0..self.dim {
                g[0] += c[k] * gs[k][0];
                g[1] += c[k] * gs[k][1];
            }
            map.physical_gradient(g)
        };
        let mut out = LocalNorms {
            l2: 0.0,
            grad: 0.0,
            hessian: 0.0,
            normal_trace: 0.0,
        };
        for (q, w) in self.vol_weights.iter().enumerate() {
            let v: f64 = c.iter().zip(&self.vol_values[q]).map(|(a, b)| a * b).sum();
            let g = combine_grad(&self.vol_grads[q]);
            let mut hr = [[0.0; 2]; 2];
            for (ck, hess) in c.iter().zip(&self.vol_hess[q]) {
                for (i, row) in hr.iter_mut().enumerate() {
                    for (j, h) in row.iter_mut().enumerate() {
                        *h += ck * hess[i][j];
                    }
                }
            }
            let hp = map.physical_hessian(hr);
            out.l2 += w * jac * v * v;
            out.grad += w * jac * (g[0] * g[0] + g[1] * g[1]);
            out.hessian += w * jac * hp.iter().flatten().map(|x| x * x).sum::<f64>();
        }
        let inv = map.inverse_linear();
        for (nref, weights, grads) in &self.edges {
            // physical normal: A^{-T} n_ref, normalised; line measure from the mapped tangent
            let raw = [
                inv[0][0] * nref[0] + inv[1][0] * nref[1],
                inv[0][1] * nref[0] + inv[1][1] * nref[1],
            ];
            let len = raw[0].hypot(raw[1]);
            let mu = [raw[0] / len, raw[1] / len];
            let tref = [-nref[1], nref[0]];
            let a = &map.linear;
            let tangent = [
                a[0][0] * tref[0] + a[0][1] * tref[1],
                a[1][0] * tref[0] + a[1][1] * tref[1],
            ];
            let scale = tangent[0].hypot(tangent[1]);
            for (w, gs) in weights.iter().zip(grads) {
                let g = combine_grad(gs);
                let dn = g[0] * mu[0] + g[1] * mu[1];
                out.normal_trace += w * scale * dn * dn;
            }
        }
        out
    }
}

pub(crate) fn probe_ratios(n: &LocalNorms, h_e: f64, p: usize) -> Option<(f64, f64, f64)> {
    if n.grad <= 0.0 || n.l2 <= 0.0 {
        return None;
    }
    let p2 = (p * p) as f64;
    let gnorm = n.grad.sqrt();
    let r1 = n.normal_trace / (n.grad / h_e + gnorm * n.hessian.sqrt());
    let r2 = h_e / p2 * n.normal_trace / n.grad;
    let r3 = h_e / p2 * gnorm / n.l2.sqrt();
    Some((r1, r2, r3))
}

fn element_seed(seed: u64, n_per_side: usize, element: usize) -> u64 {
    let mut z = seed
        ^ (n_per_side as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (element as u64).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    // splitmix64 finaliser
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Samples random polynomials (modal coefficients i.i.d. uniform in `[-1, 1]`)
/// round-robin over the elements and records the largest ratios seen.
pub fn inequality_probes(
    mesh: &MeshTopology,
    basis: &BasisSet,
    samples: usize,
    seed: u64,
) -> Result<ProbeReport> {
    if samples < MIN_PROBE_SAMPLES {
        return Err(DgError::InvalidParameter(format!(
            "at least {MIN_PROBE_SAMPLES} probe samples required, got {samples}"
        )));
    }
    let tables = ProbeTables::new(basis)?;
    let n_elem = mesh.num_elements();
    let mut rngs: Vec<ChaCha8Rng> = (0..n_elem.min(samples))
        .map(|e| ChaCha8Rng::seed_from_u64(element_seed(seed, mesh.n_per_side, e)))
        .collect();
    let mut report = ProbeReport {
        samples,
        seed,
        r1_max: 0.0,
        r2_max: 0.0,
        r3_max: 0.0,
        skipped: 0,
    };
    let mut coeffs = vec![0.0; basis.dim()];
    for s in 0..samples {
        let e = s % n_elem;
        let rng = &mut rngs[e];
        for c in coeffs.iter_mut() {
            *c = rng.random_range(-1.0..=1.0);
        }
        let element = &mesh.elements[e];
        let norms = tables.norms(element, &coeffs);
        match probe_ratios(&norms, element.diameter, basis.degree()) {
            Some((r1, r2, r3)) => {
                report.r1_max = report.r1_max.max(r1);
                report.r2_max = report.r2_max.max(r2);
                report.r3_max = report.r3_max.max(r3);
            }
            None => report.skipped += 1,
        }
    }
    Ok(report)
}
