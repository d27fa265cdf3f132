use super::quadrature::make_volume_rule;
use crate::{DgError, Point, Result};

pub const MAX_DEGREE: usize = 8;

const REFERENCE_TOL: f64 = 1e-12;

/// Orthonormal modal basis of the total-degree space `P^p` on `[-1, 1]^2`.
///
/// Mode `(i, j)` is `c_i c_j L_i(x) L_j(y)` with Legendre polynomials `L_k` and
/// `c_k = sqrt((2k + 1) / 2)`; modes are ordered by total degree, then by the
/// `y` degree. The products with `i + j <= p` span exactly `P^p`, and their
/// Gram matrix over the reference square is the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSet {
    degree: usize,
    modes: Vec<(usize, usize)>,
}

/// Basis values and reference gradients at a list of points, point-major.
#[derive(Debug, Clone)]
pub struct BasisTable {
    pub num_points: usize,
    pub dim: usize,
    pub values: Vec<f64>,
    pub grads: Vec<Point>,
}

impl BasisTable {
    pub fn value(&self, q: usize, k: usize) -> f64 {
        self.values[q * self.dim + k]
    }

    pub fn grad(&self, q: usize, k: usize) -> Point {
        self.grads[q * self.dim + k]
    }

    pub fn point_values(&self, q: usize) -> &[f64] {
        &self.values[q * self.dim..(q + 1) * self.dim]
    }

    pub fn point_grads(&self, q: usize) -> &[Point] {
        &self.grads[q * self.dim..(q + 1) * self.dim]
    }
}

/// `[L_k(x), L_k'(x), L_k''(x)]` for `k = 0..=n`.
pub fn legendre_table(n: usize, x: f64) -> Vec<[f64; 3]> {
    let mut t = vec![[0.0; 3]; n + 1];
    t[0] = [1.0, 0.0, 0.0];
    if n >= 1 {
        t[1] = [x, 1.0, 0.0];
    }
    for k in 1..n {
        let kf = k as f64;
        let p = ((2.0 * kf + 1.0) * x * t[k][0] - kf * t[k - 1][0]) / (kf + 1.0);
        let dp = t[k - 1][1] + (2.0 * kf + 1.0) * t[k][0];
        let ddp = t[k - 1][2] + (2.0 * kf + 1.0) * t[k][1];
        t[k + 1] = [p, dp, ddp];
    }
    t
}

fn scale(k: usize) -> f64 {
    ((2 * k + 1) as f64 / 2.0).sqrt()
}

pub fn make_basis(p: usize) -> Result<BasisSet> {
    if !(1..=MAX_DEGREE).contains(&p) {
        return Err(DgError::UnsupportedDegree(p));
    }
    let mut modes = Vec::with_capacity((p + 1) * (p + 2) / 2);
    for total in 0..=p {
        for j in 0..=total {
            modes.push((total - j, j));
        }
    }
    let basis = BasisSet { degree: p, modes };
    let defect = basis.mass_matrix_defect(p + 1)?;
    if defect > 1e-12 {
        return Err(DgError::InvalidParameter(format!(
            "reference mass matrix defect {defect:e} for degree {p}"
        )));
    }
    Ok(basis)
}

impl BasisSet {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.modes.len()
    }

    /// `(x degree, y degree)` of each mode.
    pub fn modes(&self) -> &[(usize, usize)] {
        &self.modes
    }

    /// Index of the constant mode.
    pub fn constant_mode(&self) -> usize {
        0
    }

    /// Value of the constant mode (`1 / sqrt(4)`).
    pub fn constant_value(&self) -> f64 {
        0.5
    }

    fn check(&self, r: Point) -> Result<()> {
        if r[0].abs() > 1.0 + REFERENCE_TOL
            || r[1].abs() > 1.0 + REFERENCE_TOL
            || r.iter().any(|c| !c.is_finite())
        {
            return Err(DgError::OutsideReference(r[0], r[1]));
        }
        Ok(())
    }

    /// Values and reference gradients at a single point, written into the slices.
    pub fn eval_into(&self, r: Point, values: &mut [f64], grads: &mut [Point]) {
        let lx = legendre_table(self.degree, r[0]);
        let ly = legendre_table(self.degree, r[1]);
        for (k, &(i, j)) in self.modes.iter().enumerate() {
            let c = scale(i) * scale(j);
            values[k] = c * lx[i][0] * ly[j][0];
            grads[k] = [c * lx[i][1] * ly[j][0], c * lx[i][0] * ly[j][1]];
        }
    }

    /// Values and reference gradients at `r`.
    pub fn eval(&self, r: Point) -> Result<(Vec<f64>, Vec<Point>)> {
        self.check(r)?;
        let mut v = vec![0.0; self.dim()];
        let mut g = vec![[0.0; 2]; self.dim()];
        self.eval_into(r, &mut v, &mut g);
        Ok((v, g))
    }

    /// Reference Hessians of every mode at `r`.
    pub fn hessians(&self, r: Point) -> Result<Vec<[[f64; 2]; 2]>> {
        self.check(r)?;
        let lx = legendre_table(self.degree, r[0]);
        let ly = legendre_table(self.degree, r[1]);
        Ok(self
            .modes
            .iter()
            .map(|&(i, j)| {
                let c = scale(i) * scale(j);
                let xy = c * lx[i][1] * ly[j][1];
                [[c * lx[i][2] * ly[j][0], xy], [xy, c * lx[i][0] * ly[j][2]]]
            })
            .collect())
    }

    pub fn tabulate(&self, points: &[Point]) -> Result<BasisTable> {
        let dim = self.dim();
        let mut values = vec![0.0; points.len() * dim];
        let mut grads = vec![[0.0; 2]; points.len() * dim];
        for (q, &r) in points.iter().enumerate() {
            self.check(r)?;
            self.eval_into(
                r,
                &mut values[q * dim..(q + 1) * dim],
                &mut grads[q * dim..(q + 1) * dim],
            );
        }
        Ok(BasisTable {
            num_points: points.len(),
            dim,
            values,
            grads,
        })
    }

    /// Reference Gram matrix computed with a `q`-point tensor rule.
    pub fn mass_matrix(&self, q: usize) -> Result<Vec<Vec<f64>>> {
        let rule = make_volume_rule(q)?;
        let table = self.tabulate(&rule.points)?;
        let n = self.dim();
        let mut m = vec![vec![0.0; n]; n];
        for (qi, w) in rule.weights.iter().enumerate() {
            let v = table.point_values(qi);
            for a in 0..n {
                for b in 0..n {
                    m[a][b] += w * v[a] * v[b];
                }
            }
        }
        Ok(m)
    }

    fn mass_matrix_defect(&self, q: usize) -> Result<f64> {
        let m = self.mass_matrix(q)?;
        let mut worst: f64 = 0.0;
        for (a, row) in m.iter().enumerate() {
            for (b, &v) in row.iter().enumerate() {
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((v - target).abs());
            }
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn dimensions() {
        assert_eq!(make_basis(1).unwrap().dim(), 3);
        assert_eq!(make_basis(2).unwrap().dim(), 6);
        assert_eq!(make_basis(4).unwrap().dim(), 15);
        for p in 1..=MAX_DEGREE {
            assert_eq!(make_basis(p).unwrap().dim(), (p + 1) * (p + 2) / 2);
        }
    }

    #[test]
    fn rejects_unsupported_degree() {
        assert!(matches!(make_basis(0), Err(DgError::UnsupportedDegree(0))));
        assert!(matches!(make_basis(9), Err(DgError::UnsupportedDegree(9))));
    }

    #[test]
    fn gram_matrix_is_identity() {
        for p in 1..=MAX_DEGREE {
            let b = make_basis(p).unwrap();
            // any rule with q >= p + 1 is exact for the products
            for q in [p + 1, p + 3] {
                assert!(b.mass_matrix_defect(q).unwrap() <= 1e-12, "p={p} q={q}");
            }
        }
    }

    #[test]
    fn constant_mode() {
        let b = make_basis(3).unwrap();
        let (v, g) = b.eval([0.3, -0.7]).unwrap();
        assert!((v[0] - 0.5).abs() < 1e-15);
        assert_eq!(g[0], [0.0, 0.0]);
    }

    #[test]
    fn rejects_points_outside() {
        let b = make_basis(2).unwrap();
        assert!(b.eval([1.0 + 1e-13, 0.0]).is_ok());
        assert!(matches!(
            b.eval([1.0 + 1e-9, 0.0]),
            Err(DgError::OutsideReference(..))
        ));
        assert!(b.tabulate(&[[0.0, 0.0], [0.0, -1.5]]).is_err());
    }

    #[test]
    fn gradients_match_finite_differences() {
        let b = make_basis(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let step = 1e-6;
        for _ in 0..20 {
            let r = [rng.random_range(-0.9..0.9), rng.random_range(-0.9..0.9)];
            let (_, g) = b.eval(r).unwrap();
            let (vxp, _) = b.eval([r[0] + step, r[1]]).unwrap();
            let (vxm, _) = b.eval([r[0] - step, r[1]]).unwrap();
            let (vyp, _) = b.eval([r[0], r[1] + step]).unwrap();
            let (vym, _) = b.eval([r[0], r[1] - step]).unwrap();
            for k in 0..b.dim() {
                let fx = (vxp[k] - vxm[k]) / (2.0 * step);
                let fy = (vyp[k] - vym[k]) / (2.0 * step);
                assert!((fx - g[k][0]).abs() < 1e-6 && (fy - g[k][1]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn hessians_match_finite_differences() {
        let b = make_basis(4).unwrap();
        let r = [0.21, -0.43];
        let step = 1e-5;
        let hs = b.hessians(r).unwrap();
        let (_, gxp) = b.eval([r[0] + step, r[1]]).unwrap();
        let (_, gxm) = b.eval([r[0] - step, r[1]]).unwrap();
        let (_, gyp) = b.eval([r[0], r[1] + step]).unwrap();
        let (_, gym) = b.eval([r[0], r[1] - step]).unwrap();
        for k in 0..b.dim() {
            let hxx = (gxp[k][0] - gxm[k][0]) / (2.0 * step);
            let hxy = (gyp[k][0] - gym[k][0]) / (2.0 * step);
            let hyy = (gyp[k][1] - gym[k][1]) / (2.0 * step);
            assert!((hxx - hs[k][0][0]).abs() < 1e-6);
            assert!((hxy - hs[k][0][1]).abs() < 1e-6);
            assert!((hyy - hs[k][1][1]).abs() < 1e-6);
        }
    }

    #[test]
    fn spans_total_degree_monomials() {
        // every monomial x^a y^b with a + b <= p is reproduced by its L2 projection
        let p = 3;
        let b = make_basis(p).unwrap();
        let rule = make_volume_rule(p + 2).unwrap();
        let table = b.tabulate(&rule.points).unwrap();
        for a in 0..=p {
            for c in 0..=(p - a) {
                let mono = |x: Point| x[0].powi(a as i32) * x[1].powi(c as i32);
                let coeffs: Vec<f64> = (0..b.dim())
                    .map(|k| {
                        rule.iter()
                            .enumerate()
                            .map(|(q, (x, w))| w * mono(*x) * table.value(q, k))
                            .sum()
                    })
                    .collect();
                let x = [0.37, -0.81];
                let (v, _) = b.eval(x).unwrap();
                let recon: f64 = coeffs.iter().zip(&v).map(|(c, v)| c * v).sum();
                assert!((recon - mono(x)).abs() < 1e-13);
            }
        }
    }
}
