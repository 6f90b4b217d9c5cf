//! Reproducible experiment drivers: mesh-refinement convergence studies,
//! parameter sweeps of multigrid iteration counts, and interface-solver
//! diagnostics, each with a plain-text table and a CSV rendering.
//!
//! Every run is deterministic: sweeps evaluate their points in parallel but
//! collect results in input order, and all floating-point output is routed
//! through one fixed-width scientific formatter, so re-running a study
//! reproduces its CSV byte for byte.

use std::time::Instant;

use crate::assembly::{l2_error, DiscretizationConfig, Method};
use crate::cut_geometry::LevelSet;
use crate::error::{Error, Result};
use crate::multigrid::{
    build_hierarchy, mg_solve, CoarseMatrixMode, Hierarchy, HierarchySpec, MgConfig,
};
use crate::par;
use crate::problems::TestProblem;
use crate::solvers::{estimate_condition, gauss_seidel_sweep, sparse_cholesky_bfs, SweepDirection};

/// Interface geometry of an experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InterfaceKind {
    /// Sphere around `center + delta·(1,…,1)`; components beyond the
    /// spatial dimension are ignored.
    Spherical {
        center: [f64; 3],
        radius: f64,
        delta: f64,
    },
    /// Plane x₀ = x_gamma.
    Planar { x_gamma: f64 },
}

/// Complete description of one experiment family.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub dim: usize,
    pub n0: usize,
    pub n_levels: usize,
    pub lo: f64,
    pub hi: f64,
    pub interface: InterfaceKind,
    /// Classify against the once-refined level-set interpolant; `None`
    /// picks it automatically (on for spheres, off for planes).
    pub iso_p2: Option<bool>,
    pub method: Method,
    pub mu: [f64; 2],
    pub lambda_n: f64,
    pub eps_g: f64,
    pub local_penalty_h: bool,
    pub mg: MgConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dim: 2,
            n0: 4,
            n_levels: 5,
            lo: 0.0,
            hi: 2.0,
            interface: InterfaceKind::Spherical {
                center: [1.03, 1.02, 1.01],
                radius: 0.413,
                delta: 0.0,
            },
            iso_p2: None,
            method: Method::PNitsche,
            mu: [0.5, 1.0],
            lambda_n: 10.0,
            eps_g: 0.1,
            local_penalty_h: false,
            mg: MgConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim != 2 && self.dim != 3 {
            return Err(Error::BadDimension(self.dim));
        }
        if self.n_levels == 0 {
            return Err(Error::Config("need at least one level".into()));
        }
        if !(self.hi > self.lo) {
            return Err(Error::Config(format!(
                "empty box [{}, {}]",
                self.lo, self.hi
            )));
        }
        self.discretization().validate()?;
        self.mg.validate()
    }

    /// Sphere center after the perturbation shift, zeroed beyond `dim`.
    pub fn effective_center(&self) -> Option<[f64; 3]> {
        match self.interface {
            InterfaceKind::Spherical { center, delta, .. } => {
                let mut m = [0.0; 3];
                for i in 0..self.dim {
                    m[i] = center[i] + delta;
                }
                Some(m)
            }
            InterfaceKind::Planar { .. } => None,
        }
    }

    pub fn level_set(&self) -> LevelSet {
        match self.interface {
            InterfaceKind::Spherical { radius, .. } => LevelSet::Spherical {
                center: self.effective_center().unwrap(),
                radius,
            },
            InterfaceKind::Planar { x_gamma } => LevelSet::Planar { x_gamma },
        }
    }

    pub fn iso_p2(&self) -> bool {
        self.iso_p2.unwrap_or(matches!(
            self.interface,
            InterfaceKind::Spherical { .. }
        ))
    }

    pub fn problem(&self) -> TestProblem {
        match self.interface {
            InterfaceKind::Spherical { radius, .. } => TestProblem::ManufacturedSphere {
                dim: self.dim,
                center: self.effective_center().unwrap(),
                radius,
                mu: self.mu,
            },
            InterfaceKind::Planar { .. } => TestProblem::Monomial { dim: self.dim },
        }
    }

    pub fn discretization(&self) -> DiscretizationConfig {
        DiscretizationConfig {
            method: self.method,
            mu: self.mu,
            lambda_n: self.lambda_n,
            eps_g: self.eps_g,
            local_penalty_h: self.local_penalty_h,
        }
    }

    pub fn build(&self) -> Result<Hierarchy> {
        self.validate()?;
        let phi = self.level_set();
        let spec = HierarchySpec {
            dim: self.dim,
            n0: self.n0,
            n_levels: self.n_levels,
            lo: self.lo,
            hi: self.hi,
            phi: &phi,
            iso_p2: self.iso_p2(),
        };
        let problem = self.problem();
        build_hierarchy(
            &spec,
            &self.discretization(),
            &self.mg,
            &|x, side| problem.rhs(x, side),
            &|x| problem.dirichlet(x),
        )
    }
}

/// Failures that render as "div" table cells instead of aborting a study:
/// the solve left the stable regime (divergence, stagnation, an indefinite
/// matrix breaking a factorization).
fn is_numerical_failure(e: &Error) -> bool {
    matches!(
        e,
        Error::Diverged { .. } | Error::NotConverged { .. } | Error::NotSpd(_)
    )
}

// ---------------------------------------------------------------------------
// Convergence study
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub level: usize,
    pub n_dofs: usize,
    pub h: f64,
    /// L² error against the manufactured solution; `None` when the solver
    /// failed on this level.
    pub error: Option<f64>,
    /// log₂ of the error reduction from the previous level.
    pub eoc: Option<f64>,
    pub iterations: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
}

/// Solve the manufactured interface problem on every level of one hierarchy
/// and report L² errors with estimated orders of convergence.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<ConvergenceTable> {
    let problem = cfg.problem();
    if problem.exact([cfg.lo, cfg.lo, 0.0], 0).is_none() {
        return Err(Error::Config(
            "convergence study needs the spherical interface (it has the manufactured solution)"
                .into(),
        ));
    }
    // With variational coarsening the projection chain must be rooted at
    // the system actually being solved, so every target level gets its own
    // truncated hierarchy; direct discretization is level-local and one
    // hierarchy serves all levels.
    let full = if cfg.mg.coarse_mode == CoarseMatrixMode::Galerkin {
        None
    } else {
        Some(cfg.build()?)
    };
    let mut rows = Vec::with_capacity(cfg.n_levels);
    for l in 0..cfg.n_levels {
        let truncated;
        let h = match &full {
            Some(h) => h,
            None => {
                let mut c = cfg.clone();
                c.n_levels = l + 1;
                truncated = c.build()?;
                &truncated
            }
        };
        let level = &h.levels[l];
        let (error, iterations) = match mg_solve(h, l, &level.b) {
            Ok(out) => {
                let err = l2_error(
                    &level.mesh,
                    &level.topo,
                    &level.space,
                    &out.x,
                    &|x| problem.dirichlet(x),
                    &|x, side| problem.exact(x, side).unwrap(),
                );
                (Some(err), Some(out.iterations))
            }
            Err(e) if is_numerical_failure(&e) => (None, None),
            Err(e) => return Err(e),
        };
        let eoc = match (rows.last().and_then(|r: &ConvergenceRow| r.error), error) {
            (Some(prev), Some(cur)) if cur > 0.0 => Some((prev / cur).log2()),
            _ => None,
        };
        rows.push(ConvergenceRow {
            level: l,
            n_dofs: level.space.n_dofs(),
            h: level.mesh.h,
            error,
            eoc,
            iterations,
        });
    }
    Ok(ConvergenceTable { rows })
}

impl ConvergenceTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("level,n_dofs,h,error,eoc,iterations\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.level,
                r.n_dofs,
                format_scientific(r.h),
                r.error.map(format_scientific).unwrap_or_else(|| "div".into()),
                r.eoc.map(|e| format!("{e:.2}")).unwrap_or_default(),
                r.iterations
                    .map(|i| i.to_string())
                    .unwrap_or_else(|| "div".into()),
            ));
        }
        out
    }

    pub fn to_text(&self) -> String {
        let headers = ["level", "n_dofs", "h", "L2 error", "eoc", "iters"];
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.level.to_string(),
                    r.n_dofs.to_string(),
                    format_scientific(r.h),
                    r.error.map(format_scientific).unwrap_or_else(|| "div".into()),
                    r.eoc.map(|e| format!("{e:.2}")).unwrap_or_default(),
                    r.iterations
                        .map(|i| i.to_string())
                        .unwrap_or_else(|| "div".into()),
                ]
            })
            .collect();
        render_aligned(&headers, &rows)
    }

    /// True if any level failed to converge.
    pub fn has_divergence(&self) -> bool {
        self.rows.iter().any(|r| r.error.is_none())
    }
}

// ---------------------------------------------------------------------------
// Multigrid robustness sweeps
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    /// Diffusion coefficient of side 0.
    Mu1,
    /// Interface-shift parameter of the spherical geometry.
    Delta,
    /// Penalty scaling.
    LambdaN,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::Mu1 => "mu1",
            SweepParameter::Delta => "delta",
            SweepParameter::LambdaN => "lambda_n",
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct MgCell {
    /// V-cycle count to reach the relative tolerance; `None` when the solve
    /// failed (rendered "div").
    pub iterations: Option<usize>,
    /// Largest inner CG count of the interface corrections, when PCG ran.
    pub max_inner_cg: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct MgTable {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    /// Hierarchy levels solved (level 0 is the direct coarse solve).
    pub levels: Vec<usize>,
    /// `cells[point][level index]`.
    pub cells: Vec<Vec<MgCell>>,
}

fn apply_sweep_value(cfg: &mut ExperimentConfig, p: SweepParameter, v: f64) -> Result<()> {
    match p {
        SweepParameter::Mu1 => cfg.mu[0] = v,
        SweepParameter::LambdaN => cfg.lambda_n = v,
        SweepParameter::Delta => match &mut cfg.interface {
            InterfaceKind::Spherical { delta, .. } => *delta = v,
            InterfaceKind::Planar { .. } => {
                return Err(Error::Config(
                    "the interface-shift sweep needs the spherical geometry".into(),
                ))
            }
        },
    }
    Ok(())
}

/// Iteration counts of the multigrid solver on levels 1..n_levels for each
/// value of the swept parameter. Points run in parallel; results keep the
/// input order.
pub fn run_mg_table(
    cfg: &ExperimentConfig,
    parameter: SweepParameter,
    values: &[f64],
) -> Result<MgTable> {
    cfg.validate()?;
    if cfg.n_levels < 2 {
        return Err(Error::Config(
            "iteration sweeps need at least two levels".into(),
        ));
    }
    if values.is_empty() {
        return Err(Error::Config("empty sweep".into()));
    }
    let levels: Vec<usize> = (1..cfg.n_levels).collect();
    let point_results: Vec<Result<Vec<MgCell>>> = par::map_slice(values, |&v| {
        let mut point_cfg = cfg.clone();
        apply_sweep_value(&mut point_cfg, parameter, v)?;
        // As in the convergence study: variational coarsening roots the
        // projection chain at the system being solved, so each level gets a
        // truncated hierarchy of its own.
        let galerkin = point_cfg.mg.coarse_mode == CoarseMatrixMode::Galerkin;
        let full = if galerkin {
            None
        } else {
            match point_cfg.build() {
                Ok(h) => Some(h),
                Err(e) if is_numerical_failure(&e) => {
                    return Ok(vec![MgCell::default(); cfg.n_levels - 1]);
                }
                Err(e) => return Err(e),
            }
        };
        let mut cells = Vec::with_capacity(cfg.n_levels - 1);
        for l in 1..cfg.n_levels {
            let truncated;
            let h = match &full {
                Some(h) => h,
                None => {
                    let mut c = point_cfg.clone();
                    c.n_levels = l + 1;
                    match c.build() {
                        Ok(h) => {
                            truncated = h;
                            &truncated
                        }
                        Err(e) if is_numerical_failure(&e) => {
                            cells.push(MgCell::default());
                            continue;
                        }
                        Err(e) => return Err(e),
                    }
                }
            };
            let cell = match mg_solve(h, l, &h.levels[l].b) {
                Ok(out) => MgCell {
                    iterations: Some(out.iterations),
                    max_inner_cg: (out.stats.max_inner_cg > 0)
                        .then_some(out.stats.max_inner_cg),
                },
                Err(e) if is_numerical_failure(&e) => MgCell::default(),
                Err(e) => return Err(e),
            };
            cells.push(cell);
        }
        Ok(cells)
    });
    let mut cells = Vec::with_capacity(values.len());
    for r in point_results {
        cells.push(r?);
    }
    Ok(MgTable {
        parameter,
        values: values.to_vec(),
        levels,
        cells,
    })
}

impl MgTable {
    /// CSV with one iteration column per level; inner CG maxima get their
    /// own trailing columns when any cell recorded them.
    pub fn to_csv(&self) -> String {
        let with_cg = self
            .cells
            .iter()
            .flatten()
            .any(|c| c.max_inner_cg.is_some());
        let mut out = String::from(self.parameter.name());
        for l in &self.levels {
            out.push_str(&format!(",L{l}"));
        }
        if with_cg {
            for l in &self.levels {
                out.push_str(&format!(",L{l}_cg"));
            }
        }
        out.push('\n');
        for (v, row) in self.values.iter().zip(&self.cells) {
            out.push_str(&format_scientific(*v));
            for c in row {
                out.push(',');
                match c.iterations {
                    Some(n) => out.push_str(&n.to_string()),
                    None => out.push_str("div"),
                }
            }
            if with_cg {
                for c in row {
                    out.push(',');
                    if let Some(m) = c.max_inner_cg {
                        out.push_str(&m.to_string());
                    }
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut headers: Vec<String> = vec![self.parameter.name().to_string()];
        headers.extend(self.levels.iter().map(|l| format!("L{l}")));
        let rows: Vec<Vec<String>> = self
            .values
            .iter()
            .zip(&self.cells)
            .map(|(v, row)| {
                let mut cols = vec![format_scientific(*v)];
                cols.extend(row.iter().map(|c| match (c.iterations, c.max_inner_cg) {
                    (Some(n), Some(m)) => format!("{n} [{m}]"),
                    (Some(n), None) => n.to_string(),
                    (None, _) => "div".into(),
                }));
                cols
            })
            .collect();
        let header_refs: Vec<&str> = headers.iter().map(|s| s.as_str()).collect();
        render_aligned(&header_refs, &rows)
    }

    pub fn has_divergence(&self) -> bool {
        self.cells
            .iter()
            .flatten()
            .any(|c| c.iterations.is_none())
    }
}

// ---------------------------------------------------------------------------
// Diagnostics
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct DiagnosticsRow {
    pub level: usize,
    pub n_dofs: usize,
    /// Size of the interface block (two DOFs per doubled vertex).
    pub n_interface: usize,
    /// Spectral condition number of the level matrix (small levels only).
    pub cond_a: Option<f64>,
    /// Condition number after symmetric Jacobi scaling.
    pub cond_scaled_a: Option<f64>,
    /// Jacobi-scaled condition number of the interface block.
    pub cond_scaled_gamma: Option<f64>,
    pub nnz_a: usize,
    pub nnz_gamma: usize,
    /// Stored entries of the envelope Cholesky factor of the interface
    /// block under the interface-walk ordering.
    pub nnz_factor: Option<usize>,
    /// Interface-factor weight relative to the whole level matrix,
    /// nnz(L) / nnz(A): the share of stored entries the interface
    /// factorization adds on top of the system itself. Shrinks under
    /// refinement because the interface is lower-dimensional.
    pub fill_ratio: Option<f64>,
    /// Wall time of one interface factorization (best of three).
    pub factor_seconds: Option<f64>,
    /// Wall time of one Gauss-Seidel sweep on the level matrix.
    pub sweep_seconds: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct DiagnosticsTable {
    pub rows: Vec<DiagnosticsRow>,
}

fn best_of<T>(reps: usize, mut f: impl FnMut() -> T) -> (T, f64) {
    let mut best = f64::INFINITY;
    let mut out = None;
    for _ in 0..reps.max(1) {
        let t0 = Instant::now();
        let v = f();
        best = best.min(t0.elapsed().as_secs_f64());
        out = Some(v);
    }
    (out.unwrap(), best)
}

/// Conditioning and interface-factorization statistics per level.
/// Eigenvalue estimates for the full level matrices are limited to levels
/// with at most `max_cond_dofs` unknowns.
pub fn run_diagnostics(cfg: &ExperimentConfig, max_cond_dofs: usize) -> Result<DiagnosticsTable> {
    let h = cfg.build()?;
    let mut rows = Vec::with_capacity(h.n_levels());
    for l in 0..h.n_levels() {
        let level = &h.levels[l];
        let n = level.a.n_rows();
        let (cond_a, cond_scaled_a) = if n <= max_cond_dofs {
            (
                estimate_condition(&level.a, false).ok(),
                estimate_condition(&level.a, true).ok(),
            )
        } else {
            (None, None)
        };
        let m = level.interface_idx.len();
        let cond_scaled_gamma = if m > 0 && m <= max_cond_dofs {
            estimate_condition(&level.a_gamma, true).ok()
        } else {
            None
        };
        let (factor, factor_seconds) = if m > 0 {
            let (f, t) = best_of(3, || {
                sparse_cholesky_bfs(&level.a_gamma, &level.gamma_graph).ok()
            });
            (f, Some(t))
        } else {
            (None, None)
        };
        let nnz_factor = factor.as_ref().map(|f| f.nnz());
        let nnz_gamma = level.a_gamma.nnz();
        let nnz_a = level.a.nnz();
        let fill_ratio = nnz_factor
            .filter(|_| nnz_a > 0)
            .map(|f| f as f64 / nnz_a as f64);
        let sweep_seconds = {
            let mut x = vec![0.0; n];
            let (_, t) = best_of(3, || {
                gauss_seidel_sweep(&level.a, &mut x, &level.b, SweepDirection::Forward)
            });
            Some(t)
        };
        rows.push(DiagnosticsRow {
            level: l,
            n_dofs: n,
            n_interface: m,
            cond_a,
            cond_scaled_a,
            cond_scaled_gamma,
            nnz_a,
            nnz_gamma,
            nnz_factor,
            fill_ratio,
            factor_seconds,
            sweep_seconds,
        });
    }
    Ok(DiagnosticsTable { rows })
}

impl DiagnosticsTable {
    fn opt_sci(v: Option<f64>) -> String {
        v.map(format_scientific).unwrap_or_default()
    }

    /// CSV without the timing columns (wall times are not reproducible).
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "level,n_dofs,n_interface,cond_a,cond_jacobi_a,cond_jacobi_gamma,nnz_a,nnz_gamma,nnz_factor,fill_ratio\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                r.level,
                r.n_dofs,
                r.n_interface,
                Self::opt_sci(r.cond_a),
                Self::opt_sci(r.cond_scaled_a),
                Self::opt_sci(r.cond_scaled_gamma),
                r.nnz_a,
                r.nnz_gamma,
                r.nnz_factor.map(|v| v.to_string()).unwrap_or_default(),
                Self::opt_sci(r.fill_ratio),
            ));
        }
        out
    }

    pub fn to_text(&self) -> String {
        let headers = [
            "level",
            "n_dofs",
            "n_iface",
            "cond(A)",
            "cond(D\u{207b}\u{00b9}A)",
            "cond(D\u{207b}\u{00b9}A_G)",
            "nnz(A)",
            "nnz(A_G)",
            "nnz(L)",
            "fill",
            "factor[s]",
            "sweep[s]",
        ];
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.level.to_string(),
                    r.n_dofs.to_string(),
                    r.n_interface.to_string(),
                    Self::opt_sci(r.cond_a),
                    Self::opt_sci(r.cond_scaled_a),
                    Self::opt_sci(r.cond_scaled_gamma),
                    r.nnz_a.to_string(),
                    r.nnz_gamma.to_string(),
                    r.nnz_factor.map(|v| v.to_string()).unwrap_or_default(),
                    Self::opt_sci(r.fill_ratio),
                    Self::opt_sci(r.factor_seconds),
                    Self::opt_sci(r.sweep_seconds),
                ]
            })
            .collect();
        render_aligned(&headers, &rows)
    }
}

// ---------------------------------------------------------------------------
// Formatting
// ---------------------------------------------------------------------------

/// Fixed-width scientific notation with two fraction digits and a signed
/// two-digit exponent ("1.28E-03", "0.00E+00"), locale-independent.
pub fn format_scientific(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{x:.2e}");
    let (mantissa, exp) = s.split_once('e').expect("{:.2e} always yields an exponent");
    let (sign, digits) = match exp.strip_prefix('-') {
        Some(d) => ('-', d),
        None => ('+', exp),
    };
    format!("{mantissa}E{sign}{digits:0>2}")
}

/// Right-aligned plain-text table with two-space column separators.
fn render_aligned(headers: &[&str], rows: &[Vec<String>]) -> String {
    let n_cols = headers.len();
    let mut widths: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        debug_assert_eq!(row.len(), n_cols);
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let emit = |cells: Vec<&str>, out: &mut String| {
        for (i, (cell, w)) in cells.iter().zip(&widths).enumerate() {
            if i > 0 {
                out.push_str("  ");
            }
            for _ in cell.chars().count()..*w {
                out.push(' ');
            }
            out.push_str(cell);
        }
        out.push('\n');
    };
    emit(headers.to_vec(), &mut out);
    for row in rows {
        emit(row.iter().map(|s| s.as_str()).collect(), &mut out);
    }
    out
}
