use crate::{DgError, Point, Result};

/// Points and positive weights on a reference domain.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule<P> {
    pub points: Vec<P>,
    pub weights: Vec<f64>,
    /// Highest polynomial degree integrated exactly (per direction).
    pub exact_degree: usize,
}

pub type VolumeRule = QuadratureRule<Point>;
pub type EdgeRule = QuadratureRule<f64>;

impl<P> QuadratureRule<P> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&P, f64)> {
        self.points.iter().zip(self.weights.iter().copied())
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on `P_q`.
pub fn gauss_legendre(q: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if q == 0 {
        return Err(DgError::InvalidQuadrature);
    }
    let mut nodes = vec![0.0; q];
    let mut weights = vec![0.0; q];
    let m = q.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (q as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(q, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(q, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[q - 1 - i] = x;
        weights[i] = w;
        weights[q - 1 - i] = w;
    }
    if q % 2 == 1 {
        nodes[q / 2] = 0.0;
    }
    Ok((nodes, weights))
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let k = k as f64;
        let p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// `q` Gauss points on the reference edge.
pub fn make_edge_rule(q: usize) -> Result<EdgeRule> {
    let (points, weights) = gauss_legendre(q)?;
    Ok(QuadratureRule {
        points,
        weights,
        exact_degree: 2 * q - 1,
    })
}

/// Tensor `q x q` Gauss rule on the reference square.
pub fn make_volume_rule(q: usize) -> Result<VolumeRule> {
    let (x, w) = gauss_legendre(q)?;
    let mut points = Vec::with_capacity(q * q);
    let mut weights = Vec::with_capacity(q * q);
    for j in 0..q {
        for i in 0..q {
            points.push([x[i], x[j]]);
            weights.push(w[i] * w[j]);
        }
    }
    Ok(QuadratureRule {
        points,
        weights,
        exact_degree: 2 * q - 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn monomial_integral(k: usize) -> f64 {
        if k % 2 == 1 {
            0.0
        } else {
            2.0 / (k as f64 + 1.0)
        }
    }

    #[test]
    fn midpoint_rule() {
        let r = make_edge_rule(1).unwrap();
        assert_eq!(r.points, vec![0.0]);
        assert!((r.weights[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_zero_points() {
        assert!(matches!(make_edge_rule(0), Err(DgError::InvalidQuadrature)));
        assert!(make_volume_rule(0).is_err());
    }

    #[test]
    fn weights_sum_to_measure() {
        for q in 1..=14 {
            let e = make_edge_rule(q).unwrap();
            let v = make_volume_rule(q).unwrap();
            assert!(e.weights.iter().all(|&w| w > 0.0));
            assert!(v.weights.iter().all(|&w| w > 0.0));
            assert!((e.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
            assert!((v.weights.iter().sum::<f64>() - 4.0).abs() < 1e-13);
        }
        assert_eq!(make_volume_rule(2).unwrap().len(), 4);
    }

    #[test]
    fn edge_exactness() {
        for q in 1..=12 {
            let r = make_edge_rule(q).unwrap();
            for k in 0..=r.exact_degree {
                let s: f64 = r.iter().map(|(x, w)| w * x.powi(k as i32)).sum();
                let exact = monomial_integral(k);
                assert!((s - exact).abs() <= 1e-13 * exact.max(1.0), "q={q} k={k}");
            }
        }
    }

    #[test]
    fn volume_rule_x8_y6() {
        let r = make_volume_rule(5).unwrap();
        let s: f64 = r.iter().map(|(p, w)| w * p[0].powi(8) * p[1].powi(6)).sum();
        let exact = 4.0 / 63.0;
        assert!(((s - exact) / exact).abs() <= 1e-13);
    }
}
