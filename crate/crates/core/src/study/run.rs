use std::fmt::Write as _;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::StudyConfig;
use super::output::{format_float, format_rate, write_atomically};
use crate::analysis::{
    broken_h1_error, coercivity_check, galerkin_orthogonality_defect, inequality_probes,
    infsup_gamma, l2_error, l2_norm_fn, local_conservation_residuals, triple_norm_surrogate,
    ErrorReport, LevelErrors, NormWeights, ProbeReport, DENSE_DOF_CAP,
};
use crate::forms::FormParams;
use crate::mesh::{build_uniform_quad_mesh, MeshTopology};
use crate::refelem::{make_basis, BasisSet};
use crate::system::{
    assemble, case_by_name, solve, AssemblyOptions, BrokenField, DGSystem, ExactField,
    ManufacturedCase, Rules, SolutionField, SolveOutcome,
};
use crate::{DgError, Point, Result};

/// Everything produced by one solve on one mesh level.
#[derive(Debug)]
pub struct LevelSolution {
    pub n: usize,
    pub mesh: MeshTopology,
    pub basis: BasisSet,
    pub rules: Rules,
    pub params: FormParams,
    pub system: DGSystem,
    pub outcome: SolveOutcome,
}

impl LevelSolution {
    pub fn field(&self) -> SolutionField<'_> {
        SolutionField::new(&self.mesh, &self.basis, self.outcome.solution.clone())
            .expect("solution matches dof map")
    }

    pub fn errors(&self, case: &ManufacturedCase) -> LevelErrors {
        let u_h = self.field();
        let exact = ExactField(case);
        let diff = |e: usize, x: Point| {
            let (a, ga) = case.value_grad(x);
            let (b, gb) = u_h.value_grad(e, x);
            (a - b, [ga[0] - gb[0], ga[1] - gb[1]])
        };
        let weights = NormWeights::new(&self.params, &self.mesh);
        LevelErrors {
            n: self.n,
            h: self.mesh.h,
            dofs: self.system.dof_map.total(),
            l2: l2_error(&self.mesh, &u_h, &exact, &self.rules.fine_volume),
            h1: broken_h1_error(&self.mesh, &u_h, &exact, &self.rules.fine_volume),
            triple: triple_norm_surrogate(
                &self.mesh,
                &diff,
                &case.k,
                &weights,
                &self.rules.fine_volume,
                &self.rules.fine_edge,
            )
            .norm(),
        }
    }
}

/// Assemble and solve one `(p, n)` pair; errors carry the level.
pub fn solve_level(
    case: &ManufacturedCase,
    p: usize,
    n: usize,
    cfg: &StudyConfig,
) -> Result<LevelSolution> {
    let at = |source: DgError| DgError::AtLevel {
        p,
        n,
        source: Box::new(source),
    };
    let mesh = build_uniform_quad_mesh(n).map_err(at)?;
    let basis = make_basis(p).map_err(at)?;
    let rules = Rules::for_degree(p).map_err(at)?;
    let params = cfg.params(p);
    let f = |x: Point| case.f(x);
    let system = assemble(
        &mesh,
        &basis,
        &rules,
        &case.k,
        &f,
        &params,
        &AssemblyOptions::default(),
    )
    .map_err(at)?;
    let outcome = solve(&system, cfg.solver, cfg.tol).map_err(at)?;
    Ok(LevelSolution {
        n,
        mesh,
        basis,
        rules,
        params,
        system,
        outcome,
    })
}

pub fn convergence_csv(report: &ErrorReport) -> String {
    let mut s =
        String::from("n,h,dofs,l2_error,h1_error,triple_surrogate,beta_l2,beta_h1,beta_triple\n");
    for (i, l) in report.levels.iter().enumerate() {
        let rates = if i == 0 {
            [String::new(), String::new(), String::new()]
        } else {
            let r = &report.rates[i - 1];
            [
                format_rate(r.beta_l2),
                format_rate(r.beta_h1),
                format_rate(r.beta_triple),
            ]
        };
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            l.n,
            format_float(l.h),
            l.dofs,
            format_float(l.l2),
            format_float(l.h1),
            format_float(l.triple),
            rates[0],
            rates[1],
            rates[2]
        );
    }
    s
}

/// Error report for one degree over all configured levels.
pub fn convergence_report(
    case: &ManufacturedCase,
    p: usize,
    cfg: &StudyConfig,
) -> Result<ErrorReport> {
    let levels = cfg
        .levels
        .iter()
        .map(|&n| solve_level(case, p, n, cfg).map(|lvl| lvl.errors(case)))
        .collect::<Result<Vec<_>>>()?;
    ErrorReport::new(levels)
}

/// One CSV per degree, `convergence_<case>_p<p>.csv`. Nothing is written
/// unless every level of every degree succeeds.
pub fn run_convergence(cfg: &StudyConfig) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    cfg.prepare_output()?;
    let case = case_by_name(&cfg.case)?;
    let mut files = Vec::new();
    for &p in &cfg.p_values {
        let report = convergence_report(&case, p, cfg)?;
        files.push((
            cfg.out.join(format!("convergence_{}_p{p}.csv", case.name)),
            convergence_csv(&report),
        ));
    }
    let mut written = Vec::new();
    for (path, text) in files {
        if let Err(e) = write_atomically(&path, &text) {
            for w in &written {
                let _ = std::fs::remove_file(w);
            }
            return Err(e);
        }
        written.push(path);
    }
    Ok(written)
}

/// Nudge a coordinate lying on a grid line into a neighbouring element.
fn off_grid_line(t: f64, n: usize) -> f64 {
    let s = t * n as f64;
    if (s - s.round()).abs() > 1e-9 {
        return t;
    }
    if t >= 1.0 - 1e-12 {
        t - 1e-9
    } else {
        t + 1e-9
    }
}

/// `grid_<case>_p<p>_n<n>.csv` with header `x,y,u_h,u_exact`, sampled on a
/// uniform `resolution x resolution` grid over the closed unit square.
pub fn dump_solution_grid(
    cfg: &StudyConfig,
    p: usize,
    n: usize,
    resolution: usize,
) -> Result<PathBuf> {
    cfg.validate()?;
    if resolution < 2 {
        return Err(DgError::Config(format!(
            "resolution must be at least 2, got {resolution}"
        )));
    }
    cfg.prepare_output()?;
    let case = case_by_name(&cfg.case)?;
    let lvl = solve_level(&case, p, n, cfg)?;
    let u_h = lvl.field();
    let mut s = String::from("x,y,u_h,u_exact\n");
    let step = 1.0 / (resolution - 1) as f64;
    for j in 0..resolution {
        for i in 0..resolution {
            let x = [i as f64 * step, j as f64 * step];
            let probe = [off_grid_line(x[0], n), off_grid_line(x[1], n)];
            let e = lvl
                .mesh
                .locate(probe)
                .expect("grid point inside the unit square");
            let (uh, _) = u_h.value_grad(e, x);
            let _ = writeln!(
                s,
                "{},{},{},{}",
                format_float(x[0]),
                format_float(x[1]),
                format_float(uh),
                format_float(case.u(x))
            );
        }
    }
    let path = cfg.out.join(format!("grid_{}_p{p}_n{n}.csv", case.name));
    write_atomically(&path, &s)?;
    Ok(path)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRow {
    pub n: usize,
    pub h: f64,
    pub dofs: usize,
    /// `None` when the dense eigen path was skipped or failed.
    pub gamma: Option<f64>,
    pub gamma_note: String,
    pub probes: ProbeReport,
    pub conservation_max: f64,
    pub conservation_rel: f64,
    pub coercivity_defect: f64,
    pub orthogonality_defect: f64,
}

fn diagnostics_row(
    case: &ManufacturedCase,
    p: usize,
    n: usize,
    cfg: &StudyConfig,
) -> Result<DiagnosticsRow> {
    let lvl = solve_level(case, p, n, cfg)?;
    let at = |source: DgError| DgError::AtLevel {
        p,
        n,
        source: Box::new(source),
    };
    let dofs = lvl.system.dof_map.total();
    let (gamma, gamma_note) = if dofs > DENSE_DOF_CAP {
        (
            None,
            format!("skipped: {dofs} dofs above dense cap {DENSE_DOF_CAP}"),
        )
    } else {
        match infsup_gamma(&lvl.mesh, &lvl.basis, &lvl.rules, &lvl.params, &case.k) {
            Ok(g) => (Some(g), String::new()),
            Err(e) => (None, e.to_string()),
        }
    };
    let probes = inequality_probes(&lvl.mesh, &lvl.basis, cfg.samples, cfg.seed).map_err(at)?;

    let residuals = local_conservation_residuals(&lvl.system, &lvl.outcome.solution);
    let conservation_max = residuals.iter().fold(0.0, |m: f64, r| m.max(r.abs()));
    let f_norm = l2_norm_fn(&lvl.mesh, &|x| case.f(x), &lvl.rules.fine_volume);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (n as u64) << 32 ^ p as u64);
    let mut coercivity_defect: f64 = 0.0;
    for _ in 0..5 {
        let v: Vec<f64> = (0..dofs).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let check = coercivity_check(
            &lvl.mesh,
            &lvl.basis,
            &lvl.rules.volume,
            &lvl.rules.edge,
            &case.k,
            &lvl.params,
            &lvl.system.matrix,
            &v,
        )
        .map_err(at)?;
        coercivity_defect = coercivity_defect.max(check.relative_defect());
    }
    let orthogonality_defect = galerkin_orthogonality_defect(
        &lvl.mesh,
        &lvl.basis,
        &lvl.rules.fine_volume,
        &lvl.rules.fine_edge,
        case,
        &lvl.params,
        &lvl.field(),
    )
    .map_err(at)?;

    Ok(DiagnosticsRow {
        n,
        h: lvl.mesh.h,
        dofs,
        gamma,
        gamma_note,
        probes,
        conservation_max,
        conservation_rel: conservation_max / f_norm,
        coercivity_defect,
        orthogonality_defect,
    })
}

pub fn diagnostics_csv(rows: &[DiagnosticsRow]) -> String {
    let mut s = String::from(
        "n,h,dofs,gamma_h,r1_max,r2_max,r3_max,probe_samples,probe_skipped,seed,conservation_max,conservation_rel,coercivity_defect,orthogonality_defect,note\n",
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.n,
            format_float(r.h),
            r.dofs,
            format_rate(r.gamma),
            format_float(r.probes.r1_max),
            format_float(r.probes.r2_max),
            format_float(r.probes.r3_max),
            r.probes.samples,
            r.probes.skipped,
            r.probes.seed,
            format_float(r.conservation_max),
            format_float(r.conservation_rel),
            format_float(r.coercivity_defect),
            format_float(r.orthogonality_defect),
            r.gamma_note.replace(',', ";")
        );
    }
    s
}

/// One CSV per degree, `diagnostics_<case>_p<p>.csv`.
pub fn run_diagnostics(cfg: &StudyConfig) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    cfg.prepare_output()?;
    let case = case_by_name(&cfg.case)?;
    let mut written = Vec::new();
    for &p in &cfg.p_values {
        let rows = cfg
            .levels
            .iter()
            .map(|&n| diagnostics_row(&case, p, n, cfg))
            .collect::<Result<Vec<_>>>()?;
        let path = cfg.out.join(format!("diagnostics_{}_p{p}.csv", case.name));
        write_atomically(&path, &diagnostics_csv(&rows))?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_line_nudging() {
        assert_eq!(off_grid_line(0.3, 4), 0.3);
        assert_eq!(off_grid_line(0.0, 4), 1e-9);
        assert_eq!(off_grid_line(0.5, 4), 0.5 + 1e-9);
        assert_eq!(off_grid_line(1.0, 4), 1.0 - 1e-9);
    }
}
