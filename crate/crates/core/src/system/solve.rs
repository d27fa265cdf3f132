use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::Mat;

use super::assembly::DGSystem;
use super::sparse::CsrMatrix;
use crate::{DgError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverStrategy {
    /// Sparse LU with partial pivoting plus a few steps of iterative refinement.
    Direct,
    /// Restarted GMRES, right-preconditioned with the inverse element diagonal blocks.
    Iterative {
        restart: usize,
        max_iterations: usize,
    },
}

impl SolverStrategy {
    pub fn gmres() -> Self {
        SolverStrategy::Iterative {
            restart: 100,
            max_iterations: 10_000,
        }
    }
}

impl std::str::FromStr for SolverStrategy {
    type Err = DgError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(SolverStrategy::Direct),
            "gmres" | "iterative" => Ok(SolverStrategy::gmres()),
            other => Err(DgError::Config(format!(
                "unknown solver '{other}' (expected direct or gmres)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub solution: Vec<f64>,
    /// `||A x - b|| / ||b||`, or 0 for a zero right-hand side.
    pub relative_residual: f64,
    /// GMRES iterations, or refinement steps for the direct path.
    pub iterations: usize,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> Vec<f64> {
    let ax = a.matvec(x);
    b.iter().zip(ax).map(|(bi, axi)| bi - axi).collect()
}

pub fn solve(system: &DGSystem, strategy: SolverStrategy, tol: f64) -> Result<SolveOutcome> {
    let b = &system.rhs;
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok(SolveOutcome {
            solution: vec![0.0; b.len()],
            relative_residual: 0.0,
            iterations: 0,
        });
    }
    match strategy {
        SolverStrategy::Direct => solve_direct(&system.matrix, b, bnorm, tol),
        SolverStrategy::Iterative {
            restart,
            max_iterations,
        } => gmres(system, restart.max(1), max_iterations, bnorm, tol),
    }
}

fn solve_direct(a: &CsrMatrix, b: &[f64], bnorm: f64, tol: f64) -> Result<SolveOutcome> {
    let lu = a.to_faer()?.sp_lu().map_err(|_| DgError::Singular)?;
    let apply = |rhs: &[f64]| -> Vec<f64> {
        let m = Mat::from_fn(rhs.len(), 1, |i, _| rhs[i]);
        let x = lu.solve(&m);
        (0..rhs.len()).map(|i| x[(i, 0)]).collect()
    };
    let mut x = apply(b);
    if x.iter().any(|v| !v.is_finite()) {
        return Err(DgError::Singular);
    }
    let mut r = residual(a, &x, b);
    let mut rel = norm(&r) / bnorm;
    let mut steps = 0;
    while rel > tol && steps < 3 {
        let dx = apply(&r);
        for (xi, d) in x.iter_mut().zip(dx) {
            *xi += d;
        }
        r = residual(a, &x, b);
        rel = norm(&r) / bnorm;
        steps += 1;
    }
    if rel > tol {
        return Err(DgError::ResidualTooLarge { residual: rel, tol });
    }
    Ok(SolveOutcome {
        solution: x,
        relative_residual: rel,
        iterations: steps,
    })
}

struct BlockJacobi {
    block: usize,
    factors: Vec<PartialPivLu<f64>>,
}

impl BlockJacobi {
    fn new(system: &DGSystem) -> Self {
        let bs = system.dof_map.block_size;
        let a = &system.matrix;
        let factors = (0..system.dof_map.n_elements)
            .map(|e| {
                let off = e * bs;
                Mat::from_fn(bs, bs, |i, j| a.get(off + i, off + j)).partial_piv_lu()
            })
            .collect();
        Self { block: bs, factors }
    }

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let bs = self.block;
        let mut out = vec![0.0; v.len()];
        for (e, lu) in self.factors.iter().enumerate() {
            let off = e * bs;
            let rhs = Mat::from_fn(bs, 1, |i, _| v[off + i]);
            let z = lu.solve(&rhs);
            for i in 0..bs {
                out[off + i] = z[(i, 0)];
            }
        }
        out
    }
}

fn gmres(
    system: &DGSystem,
    restart: usize,
    max_iterations: usize,
    bnorm: f64,
    tol: f64,
) -> Result<SolveOutcome> {
    let a = &system.matrix;
    let b = &system.rhs;
    let n = b.len();
    let precond = BlockJacobi::new(system);
    let mut x = vec![0.0; n];
    let mut r = b.clone();
    let mut beta = bnorm;
    let mut iterations = 0;

    loop {
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut precond_basis: Vec<Vec<f64>> = Vec::with_capacity(restart);
        let mut hess: Vec<Vec<f64>> = Vec::with_capacity(restart);
        let mut cs: Vec<f64> = Vec::with_capacity(restart);
        let mut sn: Vec<f64> = Vec::with_capacity(restart);
        let mut g = vec![beta];
        let mut breakdown = false;

        for j in 0..restart {
            let z = precond.apply(&basis[j]);
            let mut w = a.matvec(&z);
            precond_basis.push(z);
            let mut col = vec![0.0; j + 2];
            for (i, v) in basis.iter().enumerate() {
                let hij: f64 = w.iter().zip(v).map(|(a, b)| a * b).sum();
                col[i] = hij;
                for (wk, vk) in w.iter_mut().zip(v) {
                    *wk -= hij * vk;
                }
            }
            let wnorm = norm(&w);
            col[j + 1] = wnorm;
            for i in 0..j {
                let t = cs[i] * col[i] + sn[i] * col[i + 1];
                col[i + 1] = -sn[i] * col[i] + cs[i] * col[i + 1];
                col[i] = t;
            }
            let denom = col[j].hypot(col[j + 1]);
            if denom == 0.0 {
                return Err(DgError::Breakdown(iterations));
            }
            let (c, s) = (col[j] / denom, col[j + 1] / denom);
            col[j] = denom;
            col[j + 1] = 0.0;
            cs.push(c);
            sn.push(s);
            g.push(-s * g[j]);
            g[j] *= c;
            hess.push(col);
            iterations += 1;

            if g[j + 1].abs() <= tol * bnorm || iterations >= max_iterations {
                break;
            }
            if wnorm <= 1e-300 {
                breakdown = true;
                break;
            }
            basis.push(w.iter().map(|v| v / wnorm).collect());
        }

        let m = hess.len();
        let mut y = vec![0.0; m];
        for i in (0..m).rev() {
            let mut s = g[i];
            for k in i + 1..m {
                s -= hess[k][i] * y[k];
            }
            y[i] = s / hess[i][i];
        }
        for (yk, zk) in y.iter().zip(&precond_basis) {
            for (xi, zi) in x.iter_mut().zip(zk) {
                *xi += yk * zi;
            }
        }
        r = residual(a, &x, b);
        beta = norm(&r);
        let rel = beta / bnorm;
        if rel <= tol {
            return Ok(SolveOutcome {
                solution: x,
                relative_residual: rel,
                iterations,
            });
        }
        if breakdown {
            return Err(DgError::Breakdown(iterations));
        }
        if iterations >= max_iterations {
            return Err(DgError::NotConverged {
                iterations,
                residual: rel,
            });
        }
    }
}
