//! Geometric multigrid over the unfitted space hierarchy.
//!
//! Each mesh level classifies the interface on its own, so the coarse cut
//! spaces are *not* nested in the fine ones as sets of functions; the
//! prolongation is nevertheless purely interpolatory: per side it is the
//! standard P1 coarse-to-fine transfer on the extended subdomain mesh
//! (block-diagonal in the two-copy basis), conjugated into the hat/jump
//! basis on both levels. The nesting assumption on extended domains makes
//! every fine parent lookup succeed; violations surface as errors naming
//! the offending level pair.
//!
//! Smoothing is a lexicographic Gauss-Seidel sweep (forward before
//! coarsening, backward after), optionally followed by the interface
//! correction: the residual restricted to the DOF pairs at doubled vertices
//! is solved with the principal interface submatrix and the update is added
//! back. The interface solve is either an envelope Cholesky factorization
//! under a breadth-first interface ordering or a Jacobi-preconditioned CG
//! run to a loose tolerance, picked automatically from the coefficient
//! contrast.
//!
//! One V-cycle iteration is deterministic by construction: sweeps are
//! sequential; assembly and transfers parallelize with ordered reductions.

use crate::assembly::{assemble_system, DiscretizationConfig};
use crate::cut_geometry::{build_cut_topology, check_assumptions, AssumptionReport, CutTopology, ElementClass, LevelSet};
use crate::cut_space::{build_cut_space, CutSpace};
use crate::dense::DenseCholesky;
use crate::error::{Error, Result};
use crate::geom::Point;
use crate::mesh::{build_initial_mesh, refine_uniform, std_prolongation, MeshLevel, StdSpace};
use crate::par;
use crate::solvers::{
    gauss_seidel_sweep, pcg_jacobi, sparse_cholesky_bfs, EnvelopeCholesky, OrderingGraph,
    SweepDirection,
};
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoother {
    /// Plain Gauss-Seidel sweeps.
    Gs,
    /// Gauss-Seidel followed by the interface-block correction.
    GsIc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaSolverKind {
    /// Envelope Cholesky for contrast above 100, loose PCG otherwise.
    Auto,
    Pcg,
    Cholesky,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoarseMatrixMode {
    /// Assemble every level with its own interface geometry.
    DirectDiscretization,
    /// Coarse matrices as pᵀ A p products of the finest assembly.
    Galerkin,
}

#[derive(Debug, Clone, Copy)]
pub struct MgConfig {
    pub pre_smooth: usize,
    pub post_smooth: usize,
    pub smoother: Smoother,
    pub gamma_solver: GammaSolverKind,
    pub coarse_mode: CoarseMatrixMode,
    pub rel_tol: f64,
    pub max_iter: usize,
    /// Residual growth beyond this factor of ‖b‖ is reported as divergence.
    pub divergence_factor: f64,
}

impl Default for MgConfig {
    fn default() -> Self {
        MgConfig {
            pre_smooth: 2,
            post_smooth: 2,
            smoother: Smoother::GsIc,
            gamma_solver: GammaSolverKind::Auto,
            coarse_mode: CoarseMatrixMode::DirectDiscretization,
            rel_tol: 1e-8,
            max_iter: 500,
            divergence_factor: 1e6,
        }
    }
}

impl MgConfig {
    pub fn validate(&self) -> Result<()> {
        if self.pre_smooth + self.post_smooth == 0 {
            return Err(Error::Config(
                "at least one smoothing step is required".into(),
            ));
        }
        if self.max_iter == 0 || !(self.rel_tol > 0.0) {
            return Err(Error::Config(format!(
                "invalid iteration control: max_iter {}, rel_tol {}",
                self.max_iter, self.rel_tol
            )));
        }
        Ok(())
    }
}

/// Interface-block solver used by the correction step.
pub enum GammaSolver {
    Cholesky(EnvelopeCholesky),
    Pcg { rel_tol: f64, cap: usize },
}

pub struct MgLevel {
    pub mesh: MeshLevel,
    pub topo: CutTopology,
    pub space: CutSpace,
    /// Stiffness matrix in the hat/jump basis.
    pub a: SparseMatrix,
    /// Load vector (with Dirichlet lift) for this level's own problem.
    pub b: Vec<f64>,
    /// Prolongation from the next-coarser level, and its transpose.
    pub p_from_coarse: Option<SparseMatrix>,
    pub r_to_coarse: Option<SparseMatrix>,
    /// Interface DOF pairs (hat, extended) per doubled vertex in BFS order.
    pub interface_idx: Vec<usize>,
    /// Principal submatrix of `a` on `interface_idx`.
    pub a_gamma: SparseMatrix,
    /// Vertex-blocked interface adjacency for envelope factorization.
    pub gamma_graph: OrderingGraph,
    pub gamma_solver: Option<GammaSolver>,
    /// Dense factorization of the coarsest matrix (level 0 only).
    pub coarse_solver: Option<DenseCholesky>,
}

pub struct Hierarchy {
    pub levels: Vec<MgLevel>,
    pub dcfg: DiscretizationConfig,
    pub mg: MgConfig,
    /// Per-level maximum sampled distance of the discrete interface to the
    /// exact zero set.
    pub assumptions: AssumptionReport,
}

impl Hierarchy {
    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn finest(&self) -> usize {
        self.levels.len() - 1
    }
}

/// Geometry of a hierarchy: an n0×…×n0 box mesh refined `n_levels − 1`
/// times, classified against `phi` on every level.
pub struct HierarchySpec<'a> {
    pub dim: usize,
    pub n0: usize,
    pub n_levels: usize,
    pub lo: f64,
    pub hi: f64,
    pub phi: &'a LevelSet,
    /// Classify against the level set interpolated on the once-refined
    /// mesh (recommended for curved interfaces, required for their nesting).
    pub iso_p2: bool,
}

/// Interface ordering graph: one node per doubled vertex (in the space's
/// BFS order) holding its (hat, extended) index pair, adjacent when two
/// doubled vertices share a cut element.
pub fn interface_graph(mesh: &MeshLevel, topo: &CutTopology, space: &CutSpace) -> OrderingGraph {
    let m = space.n_ext();
    let blocks: Vec<Vec<usize>> = (0..m).map(|k| vec![2 * k, 2 * k + 1]).collect();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); m];
    let k = mesh.dim + 1;
    for e in 0..mesh.n_simplices() {
        if topo.classes[e] != ElementClass::Cut {
            continue;
        }
        let verts = mesh.simplex(e);
        for a in 0..k {
            let Some(ka) = space.ext_dof[verts[a]] else {
                continue;
            };
            for b in a + 1..k {
                let Some(kb) = space.ext_dof[verts[b]] else {
                    continue;
                };
                adj[ka].push(kb);
                adj[kb].push(ka);
            }
        }
    }
    for l in &mut adj {
        l.sort_unstable();
        l.dedup();
    }
    OrderingGraph { blocks, adj }
}

/// Standard per-side P1 prolongation in the two-copy basis: block diagonal
/// over the side spaces.
fn twocopy_prolongation(
    coarse_mesh: &MeshLevel,
    fine_mesh: &MeshLevel,
    coarse: &CutSpace,
    fine: &CutSpace,
) -> Result<SparseMatrix> {
    let side_space = |space: &CutSpace, side: usize| StdSpace {
        dof: space.side_dof[side].clone(),
        vertex_of_dof: space.side_vertex[side].clone(),
        n_dofs: space.n_side(side),
        zero_trace: true,
    };
    let mut triplets = Vec::new();
    let (mut row0, mut col0) = (0, 0);
    for side in 0..2 {
        let pc = std_prolongation(
            coarse_mesh,
            fine_mesh,
            &side_space(coarse, side),
            &side_space(fine, side),
        )?;
        for r in 0..pc.n_rows() {
            let (cols, vals) = pc.row(r);
            for (c, v) in cols.iter().zip(vals) {
                triplets.push((row0 + r, col0 + c, *v));
            }
        }
        row0 += fine.n_side(side);
        col0 += coarse.n_side(side);
    }
    Ok(SparseMatrix::from_triplets(
        fine.n_side(0) + fine.n_side(1),
        coarse.n_side(0) + coarse.n_side(1),
        triplets,
    ))
}

/// Prolongation in the hat/jump basis: conjugate the block-diagonal
/// two-copy transfer by the basis transforms of both levels.
pub fn build_prolongation(
    coarse_mesh: &MeshLevel,
    fine_mesh: &MeshLevel,
    coarse: &CutSpace,
    fine: &CutSpace,
) -> Result<SparseMatrix> {
    let p_tc = twocopy_prolongation(coarse_mesh, fine_mesh, coarse, fine)?;
    let t_fine = fine.twocopy_to_xfem_matrix();
    let t_coarse_inv = coarse.xfem_to_twocopy_matrix();
    Ok(t_fine.matmul(&p_tc).matmul(&t_coarse_inv).drop_zeros())
}

/// The triple product pᵀ A p is symmetric and sparse analytically, but
/// floating-point summation leaves O(ε) residue at couplings that cancel
/// exactly (and makes the two triangles differ in the last bits). Average
/// with the transpose — addition of the identical mirrored pairs is exact,
/// so the result is symmetric to the bit — and drop entries below roundoff
/// relative to the diagonal scale: any genuine coupling of an SPD matrix
/// obeys |a_ij| ≤ √(a_ii a_jj), and the physically small ones sit many
/// orders above ε of that bound.
fn symmetrize_and_clean(m: SparseMatrix) -> SparseMatrix {
    let sum = m.add(&m.transpose());
    let n = sum.n_rows();
    let diag: Vec<f64> = (0..n).map(|i| 0.5 * sum.get(i, i)).collect();
    let mut trips = Vec::new();
    for r in 0..n {
        let (cols, vals) = sum.row(r);
        for (&c, &v) in cols.iter().zip(vals) {
            let half = 0.5 * v;
            if half.abs() > 1e-13 * (diag[r] * diag[c]).abs().sqrt() {
                trips.push((r, c, half));
            }
        }
    }
    SparseMatrix::from_triplets(n, sum.n_cols(), trips)
}

fn build_gamma_solver(
    kind: GammaSolverKind,
    dcfg: &DiscretizationConfig,
    a_gamma: &SparseMatrix,
    graph: &OrderingGraph,
) -> Result<GammaSolver> {
    let contrast = {
        let (lo, hi) = (dcfg.mu[0].min(dcfg.mu[1]), dcfg.mu[0].max(dcfg.mu[1]));
        hi / lo
    };
    let use_cholesky = match kind {
        GammaSolverKind::Cholesky => true,
        GammaSolverKind::Pcg => false,
        GammaSolverKind::Auto => contrast > 1e2,
    };
    if use_cholesky && a_gamma.n_rows() > 0 {
        Ok(GammaSolver::Cholesky(sparse_cholesky_bfs(a_gamma, graph)?))
    } else {
        Ok(GammaSolver::Pcg {
            rel_tol: 1e-2,
            cap: a_gamma.n_rows().max(100),
        })
    }
}

/// Build the whole hierarchy: meshes, cut topologies, spaces, transfer
/// operators, per-level systems, and interface solvers.
pub fn build_hierarchy(
    spec: &HierarchySpec,
    dcfg: &DiscretizationConfig,
    mg: &MgConfig,
    f: &(impl Fn(Point, usize) -> f64 + Sync + ?Sized),
    u_d: &(impl Fn(Point) -> f64 + Sync + ?Sized),
) -> Result<Hierarchy> {
    dcfg.validate()?;
    mg.validate()?;
    if spec.n_levels == 0 {
        return Err(Error::Config("hierarchy needs at least one level".into()));
    }

    let mut meshes = Vec::with_capacity(spec.n_levels);
    meshes.push(build_initial_mesh(spec.dim, spec.n0, spec.lo, spec.hi)?);
    for l in 1..spec.n_levels {
        let fine = refine_uniform(&meshes[l - 1]);
        meshes.push(fine);
        debug_assert_eq!(meshes[l].level, l);
    }

    let mut topos = Vec::with_capacity(spec.n_levels);
    for mesh in &meshes {
        topos.push(build_cut_topology(spec.phi, mesh, spec.iso_p2)?);
    }
    let assumptions = check_assumptions(spec.phi, &meshes, &topos)?;

    let spaces: Vec<CutSpace> = meshes
        .iter()
        .zip(&topos)
        .map(|(m, t)| build_cut_space(m, t))
        .collect();

    // Transfers before matrices (the Galerkin mode needs them).
    let mut prolongations: Vec<Option<SparseMatrix>> = vec![None];
    for l in 1..spec.n_levels {
        let p = build_prolongation(&meshes[l - 1], &meshes[l], &spaces[l - 1], &spaces[l])?;
        prolongations.push(Some(p));
    }

    let mut systems = Vec::with_capacity(spec.n_levels);
    for l in 0..spec.n_levels {
        systems.push(assemble_system(
            &meshes[l], &topos[l], &spaces[l], dcfg, f, u_d,
        )?);
    }
    if mg.coarse_mode == CoarseMatrixMode::Galerkin {
        for l in (0..spec.n_levels - 1).rev() {
            let product = {
                let p = prolongations[l + 1].as_ref().unwrap();
                let a_fine = &systems[l + 1].0;
                p.transpose().matmul(&a_fine.matmul(p))
            };
            systems[l].0 = symmetrize_and_clean(product);
        }
    }

    let mut levels = Vec::with_capacity(spec.n_levels);
    for (l, ((mesh, topo), space)) in meshes
        .into_iter()
        .zip(topos)
        .zip(spaces)
        .enumerate()
    {
        let (a, b) = systems.remove(0);
        let p_from_coarse = prolongations[l].take();
        let r_to_coarse = p_from_coarse.as_ref().map(|p| p.transpose());
        let interface_idx = space.interface_indices();
        let a_gamma = a.principal_submatrix(&interface_idx);
        let gamma_graph = interface_graph(&mesh, &topo, &space);
        let gamma_solver = if mg.smoother == Smoother::GsIc && l > 0 {
            Some(build_gamma_solver(mg.gamma_solver, dcfg, &a_gamma, &gamma_graph)?)
        } else {
            None
        };
        let coarse_solver = if l == 0 {
            Some(DenseCholesky::from_sparse(&a)?)
        } else {
            None
        };
        levels.push(MgLevel {
            mesh,
            topo,
            space,
            a,
            b,
            p_from_coarse,
            r_to_coarse,
            interface_idx,
            a_gamma,
            gamma_graph,
            gamma_solver,
            coarse_solver,
        });
    }

    Ok(Hierarchy {
        levels,
        dcfg: *dcfg,
        mg: *mg,
        assumptions,
    })
}

/// Per-solve smoothing statistics.
#[derive(Debug, Clone, Copy, Default)]
pub struct SmootherStats {
    /// Largest inner CG iteration count over all interface corrections.
    pub max_inner_cg: usize,
    /// Corrections skipped because the inner solver did not converge.
    pub skipped_corrections: usize,
}

/// One smoothing step: a Gauss-Seidel sweep, then (for GS-IC) the interface
/// correction x += Rᵀ (A^Γ)⁻¹ R (b − A x).
pub fn smooth(
    level: &MgLevel,
    x: &mut [f64],
    b: &[f64],
    dir: SweepDirection,
    stats: &mut SmootherStats,
) -> Result<()> {
    gauss_seidel_sweep(&level.a, x, b, dir)?;
    let Some(solver) = &level.gamma_solver else {
        return Ok(());
    };
    if level.interface_idx.is_empty() {
        return Ok(());
    }
    let r = level.a.residual(x, b);
    let rg: Vec<f64> = level.interface_idx.iter().map(|&i| r[i]).collect();
    let d = match solver {
        GammaSolver::Cholesky(chol) => chol.solve(&rg),
        GammaSolver::Pcg { rel_tol, cap } => {
            let out = pcg_jacobi(&level.a_gamma, &rg, *rel_tol, *cap)?;
            stats.max_inner_cg = stats.max_inner_cg.max(out.iterations);
            if !out.converged {
                stats.skipped_corrections += 1;
                return Ok(());
            }
            out.x
        }
    };
    for (&i, &di) in level.interface_idx.iter().zip(&d) {
        x[i] += di;
    }
    Ok(())
}

/// One V-cycle on `levels[0..=l]`, updating `x` in place.
pub fn v_cycle(
    h: &Hierarchy,
    l: usize,
    x: &mut Vec<f64>,
    b: &[f64],
    stats: &mut SmootherStats,
) -> Result<()> {
    let level = &h.levels[l];
    if l == 0 {
        level
            .coarse_solver
            .as_ref()
            .expect("coarsest level carries the direct solver")
            .solve_into(b, x);
        return Ok(());
    }
    for _ in 0..h.mg.pre_smooth {
        smooth(level, x, b, SweepDirection::Forward, stats)?;
    }
    let r = level.a.residual(x, b);
    let rc = level
        .r_to_coarse
        .as_ref()
        .expect("non-coarsest level carries a restriction")
        .matvec(&r);
    let mut ec = vec![0.0; rc.len()];
    v_cycle(h, l - 1, &mut ec, &rc, stats)?;
    let corr = level.p_from_coarse.as_ref().unwrap().matvec(&ec);
    for (xi, ci) in x.iter_mut().zip(&corr) {
        *xi += ci;
    }
    for _ in 0..h.mg.post_smooth {
        smooth(level, x, b, SweepDirection::Backward, stats)?;
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct MgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub rel_residual: f64,
    pub stats: SmootherStats,
}

/// Stand-alone multigrid iteration from a zero initial guess on
/// `levels[0..=level]`: V-cycles until the Euclidean relative residual
/// drops below the configured tolerance.
pub fn mg_solve(h: &Hierarchy, level: usize, b: &[f64]) -> Result<MgOutcome> {
    let a = &h.levels[level].a;
    let n = a.n_rows();
    debug_assert_eq!(b.len(), n);
    let mut stats = SmootherStats::default();
    let norm_b = par::norm(b);
    if norm_b == 0.0 {
        return Ok(MgOutcome {
            x: vec![0.0; n],
            iterations: 0,
            rel_residual: 0.0,
            stats,
        });
    }
    let mut x = vec![0.0; n];
    if level == 0 {
        h.levels[0]
            .coarse_solver
            .as_ref()
            .unwrap()
            .solve_into(b, &mut x);
        let rel = par::norm(&a.residual(&x, b)) / norm_b;
        return Ok(MgOutcome {
            x,
            iterations: 1,
            rel_residual: rel,
            stats,
        });
    }
    for it in 1..=h.mg.max_iter {
        v_cycle(h, level, &mut x, b, &mut stats)?;
        let rel = par::norm(&a.residual(&x, b)) / norm_b;
        if rel <= h.mg.rel_tol {
            return Ok(MgOutcome {
                x,
                iterations: it,
                rel_residual: rel,
                stats,
            });
        }
        if rel > h.mg.divergence_factor || !rel.is_finite() {
            return Err(Error::Diverged {
                iterations: it,
                residual: rel,
            });
        }
    }
    let rel = par::norm(&a.residual(&x, b)) / norm_b;
    Err(Error::NotConverged {
        max_iter: h.mg.max_iter,
        residual: rel,
    })
}
