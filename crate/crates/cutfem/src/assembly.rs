//! Assembly of the interface-penalty stiffness matrices and right-hand
//! sides on a cut mesh level.
//!
//! Three symmetric discretizations of the diffusion interface problem are
//! provided, differing only in their interface treatment:
//!
//! * **Nitsche**: area-weighted average fluxes with a penalty `λ_N / h`;
//! * **PNitsche**: the parameter-free variant — same consistency terms,
//!   but the penalty role is taken by a local flux lifting (twice its
//!   energy) plus a fixed unit-weight jump penalty `1 / h`;
//! * **MuNitsche**: diffusion-weighted (harmonic) average fluxes with the
//!   contrast-robust penalty `λ^μ / h`, `λ^μ = 2μ₁μ₂/(μ₁+μ₂)·λ_N`, plus a
//!   ghost penalty on the gradient jumps across faces in the cut band.
//!
//! Dirichlet data is imposed strongly: boundary vertices carry no DOFs and
//! their values are lifted into the right-hand side during scatter. Every
//! local contribution is scattered together with its mirror image, so the
//! assembled matrices are *exactly* symmetric, and element contributions
//! are merged in element order, so the result is independent of the thread
//! count.

use crate::cut_geometry::{CutData, CutTopology, ElementClass};
use crate::cut_space::CutSpace;
use crate::dense::DenseCholesky;
use crate::error::{Error, Result};
use crate::geom::{self, Point};
use crate::mesh::MeshLevel;
use crate::par;
use crate::quadrature::QuadratureRule;
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Nitsche,
    PNitsche,
    MuNitsche,
}

#[derive(Debug, Clone, Copy)]
pub struct DiscretizationConfig {
    pub method: Method,
    /// Diffusion coefficients (μ₁, μ₂) on the two subdomains.
    pub mu: [f64; 2],
    /// Penalty scale λ_N for the Nitsche and diffusion-weighted methods.
    /// The parameter-free method ignores it (its jump penalty is fixed).
    pub lambda_n: f64,
    /// Ghost penalty scale ε_g (diffusion-weighted method only).
    pub eps_g: f64,
    /// Use the element diameter instead of the level mesh size in the jump
    /// penalty denominators.
    pub local_penalty_h: bool,
}

impl DiscretizationConfig {
    pub fn new(method: Method, mu1: f64, mu2: f64) -> Self {
        DiscretizationConfig {
            method,
            mu: [mu1, mu2],
            lambda_n: 10.0,
            eps_g: 0.1,
            local_penalty_h: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu[0] > 0.0 && self.mu[1] > 0.0) {
            return Err(Error::Config(format!("diffusion coefficients must be positive, got {:?}", self.mu)));
        }
        if self.method != Method::PNitsche && !(self.lambda_n > 0.0) {
            return Err(Error::Config(format!("penalty scale must be positive, got {}", self.lambda_n)));
        }
        if self.method == Method::MuNitsche && !(self.eps_g >= 0.0) {
            return Err(Error::Config(format!("ghost penalty scale must be nonnegative, got {}", self.eps_g)));
        }
        Ok(())
    }

    /// Interface averaging weights (κ₁, κ₂) on a cut element.
    fn kappas(&self, cd: &CutData) -> [f64; 2] {
        match self.method {
            Method::Nitsche | Method::PNitsche => cd.kappa,
            Method::MuNitsche => harmonic_weights(self.mu),
        }
    }

    /// Numerator of the jump penalty `λ / h`; `None` when the method's
    /// penalty lives elsewhere (the parameter-free lifting terms).
    fn penalty_numerator(&self) -> Option<f64> {
        match self.method {
            Method::Nitsche => Some(self.lambda_n),
            Method::PNitsche => None,
            Method::MuNitsche => Some(mu_penalty(self.mu, self.lambda_n)),
        }
    }
}

/// Diffusion-weighted averaging: κ₁ = μ₂/(μ₁+μ₂), κ₂ = μ₁/(μ₁+μ₂).
pub(crate) fn harmonic_weights(mu: [f64; 2]) -> [f64; 2] {
    let s = mu[0] + mu[1];
    [mu[1] / s, mu[0] / s]
}

/// Contrast-robust penalty scale λ^μ = 2μ₁μ₂/(μ₁+μ₂) · λ_N.
pub(crate) fn mu_penalty(mu: [f64; 2], lambda_n: f64) -> f64 {
    2.0 * mu[0] * mu[1] / (mu[0] + mu[1]) * lambda_n
}

/// Gram matrix of the local lifting space on a cut element: per side, the
/// gradients of the mean-zero linear functions on that part, so the energy
/// inner product is block-diagonal with blocks μ_i |T_i| I_d.
pub(crate) fn local_lifting_gram(dim: usize, mu: [f64; 2], vols: [f64; 2]) -> Vec<f64> {
    let n = 2 * dim;
    let mut m = vec![0.0; n * n];
    for side in 0..2 {
        for k in 0..dim {
            let idx = side * dim + k;
            m[idx * n + idx] = mu[side] * vols[side];
        }
    }
    m
}

/// Where a (vertex, side) trace sends its contribution: a real DOF or a
/// strongly imposed Dirichlet value.
#[derive(Clone, Copy)]
enum Slot {
    Dof(usize),
    Fixed(f64),
}

/// Up to two slots per (vertex, side): the hat DOF, plus the extended DOF
/// when the vertex is doubled and the side is its far side.
#[derive(Clone, Copy)]
struct Slots {
    n: usize,
    items: [Slot; 2],
}

impl Slots {
    fn iter(&self) -> impl Iterator<Item = Slot> + '_ {
        self.items[..self.n].iter().copied()
    }
}

fn trace_slots(
    space: &CutSpace,
    vertex_value: &(impl Fn(Point) -> f64 + ?Sized),
    mesh: &MeshLevel,
    v: usize,
    side: usize,
) -> Slots {
    let mut slots = Slots {
        n: 0,
        items: [Slot::Fixed(0.0); 2],
    };
    match space.std_dof[v] {
        Some(s) => {
            slots.items[0] = Slot::Dof(s);
            slots.n = 1;
            if space.vertex_side[v] != side {
                if let Some(e) = space.ext_index(v) {
                    slots.items[1] = Slot::Dof(e);
                    slots.n = 2;
                }
            }
        }
        None => {
            slots.items[0] = Slot::Fixed(vertex_value(mesh.vertices[v]));
            slots.n = 1;
        }
    }
    slots
}

/// Per-element assembly output: matrix triplets and right-hand-side
/// increments (load terms and Dirichlet lift).
#[derive(Default)]
struct LocalOut {
    trip: Vec<(usize, usize, f64)>,
    rhs: Vec<(usize, f64)>,
}

impl LocalOut {
    /// Scatter `k · u · v` for the trace pair (rows = test, cols = trial).
    /// Fixed trial values move to the right-hand side; fixed test rows are
    /// eliminated.
    fn add_bilinear(&mut self, k: f64, rows: Slots, cols: Slots) {
        if k == 0.0 {
            return;
        }
        for r in rows.iter() {
            let Slot::Dof(ri) = r else { continue };
            for c in cols.iter() {
                match c {
                    Slot::Dof(ci) => self.trip.push((ri, ci, k)),
                    Slot::Fixed(g) => {
                        if g != 0.0 {
                            self.rhs.push((ri, -k * g));
                        }
                    }
                }
            }
        }
    }

    /// Scatter `k` and its mirror image, producing exactly symmetric matrix
    /// contributions. Diagonal pairs scatter once.
    fn add_symmetric(&mut self, k: f64, a: Slots, b: Slots, same: bool) {
        self.add_bilinear(k, a, b);
        if !same {
            self.add_bilinear(k, b, a);
        }
    }

    fn add_load(&mut self, val: f64, slots: Slots) {
        if val == 0.0 {
            return;
        }
        for s in slots.iter() {
            if let Slot::Dof(d) = s {
                self.rhs.push((d, val));
            }
        }
    }
}

/// Which variational terms to assemble into the matrix.
#[derive(Clone, Copy, Default)]
struct TermSelection {
    bulk: bool,
    consistency: bool,
    /// Jump penalty numerator λ (the denominator is the mesh size).
    penalty: Option<f64>,
    lifting: bool,
}

fn jump_sign(side: usize) -> f64 {
    if side == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Facet integrals of the element hat functions: S1[a] = ∫_F λ_a and
/// S2[a][b] = ∫_F λ_a λ_b, exactly symmetric by construction.
fn facet_hat_integrals(
    dim: usize,
    pts: &[Point],
    fpts: &[Point],
    rule: &QuadratureRule,
) -> ([f64; 4], [[f64; 4]; 4]) {
    let nv = dim + 1;
    let mf = geom::facet_measure(dim, fpts);
    let mut s1 = [0.0; 4];
    let mut s2 = [[0.0; 4]; 4];
    for (q, wq) in rule.points.iter().zip(&rule.weights) {
        let mut x = [0.0; 3];
        for (k, fp) in fpts.iter().enumerate() {
            x = geom::add(x, geom::scale(*fp, q[k]));
        }
        let lam = geom::barycentric(dim, pts, x);
        for a in 0..nv {
            s1[a] += mf * wq * lam[a];
            for b in a..nv {
                s2[a][b] += mf * wq * lam[a] * lam[b];
            }
        }
    }
    for a in 0..4 {
        for b in 0..a {
            s2[a][b] = s2[b][a];
        }
    }
    (s1, s2)
}

/// Assemble one element's selected terms.
#[allow(clippy::too_many_arguments)]
fn element_terms(
    mesh: &MeshLevel,
    topo: &CutTopology,
    space: &CutSpace,
    cfg: &DiscretizationConfig,
    sel: TermSelection,
    facet_rule: &QuadratureRule,
    u_d: &(impl Fn(Point) -> f64 + ?Sized),
    e: usize,
) -> Result<LocalOut> {
    let dim = mesh.dim;
    let nv = dim + 1;
    let pts = mesh.simplex_points(e);
    let verts = mesh.simplex(e);
    let grads = geom::shape_gradients(dim, &pts[..nv]);
    let mut out = LocalOut::default();

    let mut slots = [[Slots {
        n: 0,
        items: [Slot::Fixed(0.0); 2],
    }; 2]; 4];
    for a in 0..nv {
        for side in 0..2 {
            slots[a][side] = trace_slots(space, u_d, mesh, verts[a], side);
        }
    }

    let class = topo.classes[e];
    let cd = topo.cut_index[e].map(|ci| &topo.cut_data[ci]);

    if sel.bulk {
        match class {
            ElementClass::Neg | ElementClass::Pos => {
                let side = usize::from(class == ElementClass::Pos);
                let vol = geom::measure(dim, &pts[..nv]);
                for a in 0..nv {
                    for b in a..nv {
                        let k = cfg.mu[side] * vol * geom::dot(grads[a], grads[b]);
                        out.add_symmetric(k, slots[a][side], slots[b][side], a == b);
                    }
                }
            }
            ElementClass::Cut => {
                let cd = cd.expect("cut element has cut data");
                for side in 0..2 {
                    let vol: f64 = cd.parts[side]
                        .iter()
                        .map(|p| geom::measure(dim, &p[..nv]))
                        .sum();
                    for a in 0..nv {
                        for b in a..nv {
                            let k = cfg.mu[side] * vol * geom::dot(grads[a], grads[b]);
                            out.add_symmetric(k, slots[a][side], slots[b][side], a == b);
                        }
                    }
                }
            }
        }
    }

    let interface_active = sel.consistency || sel.penalty.is_some() || sel.lifting;
    if class == ElementClass::Cut && interface_active {
        let cd = cd.expect("cut element has cut data");
        let kap = cfg.kappas(cd);
        let h_pen = if cfg.local_penalty_h {
            geom::diameter(&pts[..nv])
        } else {
            mesh.h
        };

        // Lifting bookkeeping: net interface flux moments ∫_Γ n [φ_a] of the
        // jump of each local basis; only extended DOFs have nonzero jumps.
        let mut lift_j = [[0.0; 3]; 4];

        for facet in &cd.facets {
            let fpts = &facet.points[..dim];
            let (s1, s2) = facet_hat_integrals(dim, &pts[..nv], fpts, facet_rule);
            let n = facet.normal;

            if sel.consistency {
                // ({−μ∇u·n}, [v]) and its transpose.
                for a in 0..nv {
                    for su in 0..2 {
                        let flux = -kap[su] * cfg.mu[su] * geom::dot(grads[a], n);
                        if flux == 0.0 {
                            continue;
                        }
                        for b in 0..nv {
                            for sv in 0..2 {
                                let k = flux * jump_sign(sv) * s1[b];
                                out.add_bilinear(k, slots[b][sv], slots[a][su]);
                                out.add_bilinear(k, slots[a][su], slots[b][sv]);
                            }
                        }
                    }
                }
            }

            if let Some(lambda) = sel.penalty {
                // (λ/h) ([u], [v]).
                let p = lambda / h_pen;
                for a in 0..nv {
                    for sa in 0..2 {
                        for b in 0..nv {
                            for sb in 0..2 {
                                let k = p * (jump_sign(sa) * jump_sign(sb)) * s2[a][b];
                                out.add_bilinear(k, slots[a][sa], slots[b][sb]);
                            }
                        }
                    }
                }
            }

            if sel.lifting {
                for a in 0..nv {
                    let v = verts[a];
                    if space.ext_dof[v].is_none() {
                        continue;
                    }
                    // The extended basis lives on the far side of its home:
                    // [φ] = ±λ_a with the sign of the home side.
                    let js = jump_sign(1 - space.vertex_side[v]);
                    for k in 0..dim {
                        lift_j[a][k] += js * s1[a] * n[k];
                    }
                }
            }
        }

        if sel.lifting {
            let vols = [
                cd.parts[0]
                    .iter()
                    .map(|p| geom::measure(dim, &p[..nv]))
                    .sum::<f64>(),
                cd.parts[1]
                    .iter()
                    .map(|p| geom::measure(dim, &p[..nv]))
                    .sum::<f64>(),
            ];
            if vols[0] <= 0.0 || vols[1] <= 0.0 {
                return Err(Error::DegenerateCut {
                    element: e,
                    detail: format!("vanishing part volumes {vols:?} in lifting solve"),
                });
            }
            // Solve the local 2d×2d energy system for the lifting of each
            // jump basis, then scatter twice the lifted energy.
            let nloc = 2 * dim;
            let gram = local_lifting_gram(dim, cfg.mu, vols);
            let chol = DenseCholesky::new(&gram, nloc)?;
            let mut lifts: [Option<Vec<f64>>; 4] = [None, None, None, None];
            for a in 0..nv {
                if space.ext_dof[verts[a]].is_none() {
                    continue;
                }
                let mut rhs = vec![0.0; nloc];
                for side in 0..2 {
                    for k in 0..dim {
                        rhs[side * dim + k] = -kap[side] * cfg.mu[side] * lift_j[a][k];
                    }
                }
                lifts[a] = Some(chol.solve(&rhs));
            }
            // The lifted term couples only the extended DOFs.
            let ext_slot = |a: usize| Slots {
                n: 1,
                items: [
                    Slot::Dof(space.ext_index(verts[a]).unwrap()),
                    Slot::Fixed(0.0),
                ],
            };
            for a in 0..nv {
                let Some(wa) = &lifts[a] else { continue };
                for b in a..nv {
                    let Some(wb) = &lifts[b] else { continue };
                    let mut energy = 0.0;
                    for side in 0..2 {
                        for k in 0..dim {
                            let idx = side * dim + k;
                            energy += cfg.mu[side] * vols[side] * (wa[idx] * wb[idx]);
                        }
                    }
                    out.add_symmetric(2.0 * energy, ext_slot(a), ext_slot(b), a == b);
                }
            }
        }
    }

    Ok(out)
}

/// Ghost-penalty contribution of one face on one side: ε_g μ_i h_F
/// ∫_F [∇u_i·n_F][∇v_i·n_F], with elementwise-constant gradients.
fn ghost_face_terms(
    mesh: &MeshLevel,
    space: &CutSpace,
    face: usize,
    side: usize,
    scale: f64,
    u_d: &(impl Fn(Point) -> f64 + ?Sized),
) -> LocalOut {
    let dim = mesh.dim;
    let nv = dim + 1;
    let mut out = LocalOut::default();
    let (e1, e2) = mesh.face_owners[face];
    let e2 = e2.expect("ghost faces are interior");
    let fpts = mesh.face_points(face);
    let fpts = &fpts[..dim];
    let mf = geom::facet_measure(dim, fpts);
    let hf = geom::diameter(fpts);
    let n = face_normal(dim, fpts);
    let c = scale * hf * mf;

    // Jump functional weights: +∇λ·n from the first owner, − from the second.
    let mut terms: Vec<(Slots, f64)> = Vec::with_capacity(2 * nv);
    for (e, sign) in [(e1, 1.0), (e2, -1.0)] {
        let pts = mesh.simplex_points(e);
        let grads = geom::shape_gradients(dim, &pts[..nv]);
        for (a, &v) in mesh.simplex(e).iter().enumerate() {
            let w = sign * geom::dot(grads[a], n);
            terms.push((trace_slots(space, u_d, mesh, v, side), w));
        }
    }
    for (sa, wa) in &terms {
        for (sb, wb) in &terms {
            let k = c * (wa * wb);
            out.add_bilinear(k, *sa, *sb);
        }
    }
    out
}

fn face_normal(dim: usize, fpts: &[Point]) -> Point {
    let n = if dim == 2 {
        let t = geom::sub(fpts[1], fpts[0]);
        [-t[1], t[0], 0.0]
    } else {
        geom::cross(geom::sub(fpts[1], fpts[0]), geom::sub(fpts[2], fpts[0]))
    };
    geom::scale(n, 1.0 / geom::norm(n))
}

/// Merge per-element outputs in element order into a matrix and a
/// right-hand-side vector of the given size.
fn merge(outputs: Vec<Result<LocalOut>>, n: usize) -> Result<(SparseMatrix, Vec<f64>)> {
    let mut trip = Vec::new();
    let mut rhs = vec![0.0; n];
    for out in outputs {
        let out = out?;
        trip.extend(out.trip);
        for (d, v) in out.rhs {
            rhs[d] += v;
        }
    }
    Ok((SparseMatrix::from_triplets(n, n, trip), rhs))
}

fn assemble_selected(
    mesh: &MeshLevel,
    topo: &CutTopology,
    space: &CutSpace,
    cfg: &DiscretizationConfig,
    sel: TermSelection,
    u_d: &(impl Fn(Point) -> f64 + Sync + ?Sized),
) -> Result<(SparseMatrix, Vec<f64>)> {
    cfg.validate()?;
    let facet_rule = QuadratureRule::facet(mesh.dim, 2);
    let outputs = par::map_indexed(mesh.n_simplices(), |e| {
        element_terms(mesh, topo, space, cfg, sel, &facet_rule, u_d, e)
    });
    merge(outputs, space.n_dofs())
}

/// μ-weighted stiffness form (μ∇u, ∇v) over both subdomains, integrating
/// cut elements over their sub-simplex decompositions.
pub fn assemble_bulk(
    mesh: &MeshLevel,
    topo: &CutTopology,
    space: &CutSpace,
    cfg: &DiscretizationConfig,
) -> Result<SparseMatrix> {
    let sel = TermSelection {
        bulk: true,
        ..Default::default()
    };
    Ok(assemble_selected(mesh, topo, space, cfg, sel, &|_| 0.0)?.0)
}

/// Interface consistency terms ({−μ∇u·n},[v]) symmetrized, plus the jump
/// penalty for the methods that carry one (the parameter-free method's
/// penalty is part of its lifting terms instead).
pub fn assemble_nitsche_terms(
    mesh: &MeshLevel,
    topo: &CutTopology,
    space: &CutSpace,
    cfg: &DiscretizationConfig,
) -> Result<SparseMatrix> {
    let sel = TermSelection {
        consistency: true,
        penalty: cfg.penalty_numerator(),
        ..Default::default()
    };
    Ok(assemble_selected(mesh, topo, space, cfg, sel, &|_| 0.0)?.0)
}

/// Parameter-free penalty: twice the energy of the local interface-flux
/// lifting plus the fixed unit-weight jump penalty (1/h)([u],[v]).
pub fn assemble_lifting_terms(
    mesh: &MeshLevel,
    topo: &CutTopology,
    space: &CutSpace,
    cfg: &DiscretizationConfig,
) -> Result<SparseMatrix> {
    if cfg.method != Method::PNitsche {
        return Err(Error::Config("lifting terms belong to the parameter-free method".into()));
    }
    let sel = TermSelection {
        lifting: true,
        penalty: Some(1.0),
        ..Default::default()
    };
    Ok(assemble_selected(mesh, topo, space, cfg, sel, &|_| 0.0)?.0)
}

/// Ghost penalty: Σ_i Σ_{F} ε_g μ_i h_F ([∇u_i·n_F], [∇v_i·n_F])_F over the
/// cut-band faces of each side.
pub fn assemble_ghost_penalty(
    mesh: &MeshLevel,
    topo: &CutTopology,
    space: &CutSpace,
    cfg: &DiscretizationConfig,
) -> Result<SparseMatrix> {
    if cfg.method != Method::MuNitsche {
        return Err(Error::Config("ghost penalty belongs to the diffusion-weighted method".into()));
    }
    cfg.validate()?;
    Ok(ghost_terms(mesh, topo, space, cfg, &|_| 0.0)?.0)
}

fn ghost_terms(
    mesh: &MeshLevel,
    topo: &CutTopology,
    space: &CutSpace,
    cfg: &DiscretizationConfig,
    u_d: &(impl Fn(Point) -> f64 + Sync + ?Sized),
) -> Result<(SparseMatrix, Vec<f64>)> {
    let mut outputs = Vec::new();
    for side in 0..2 {
        let faces = &topo.ghost_faces[side];
        let scale = cfg.eps_g * cfg.mu[side];
        let mut side_out = par::map_slice(faces, |&f| {
            Ok(ghost_face_terms(mesh, space, f, side, scale, u_d))
        });
        outputs.append(&mut side_out);
    }
    merge(outputs, space.n_dofs())
}

/// Load vector (f, v)_Ω with side-resolved integration on cut elements, and
/// the strong Dirichlet lift of `u_d` folded in by the caller's term
/// assembly. `f(x, side)` may differ across the interface.
fn load_vector(
    mesh: &MeshLevel,
    topo: &CutTopology,
    space: &CutSpace,
    f: &(impl Fn(Point, usize) -> f64 + Sync + ?Sized),
) -> Vec<f64> {
    let dim = mesh.dim;
    let nv = dim + 1;
    let rule = QuadratureRule::volume(dim, 4);
    let outputs = par::map_indexed(mesh.n_simplices(), |e| {
        let pts = mesh.simplex_points(e);
        let verts = mesh.simplex(e);
        let mut out = LocalOut::default();
        let mut slots = [[Slots {
            n: 0,
            items: [Slot::Fixed(0.0); 2],
        }; 2]; 4];
        for a in 0..nv {
            for side in 0..2 {
                slots[a][side] = trace_slots(space, &|_| 0.0, mesh, verts[a], side);
            }
        }
        let integrate = |corners: &[Point], side: usize, out: &mut LocalOut| {
            let vol = geom::measure(dim, corners);
            for (q, wq) in rule.points.iter().zip(&rule.weights) {
                let mut x = [0.0; 3];
                for (k, p) in corners.iter().enumerate() {
                    x = geom::add(x, geom::scale(*p, q[k]));
                }
                let lam = geom::barycentric(dim, &pts[..nv], x);
                let fv = f(x, side);
                for a in 0..nv {
                    out.add_load(vol * wq * fv * lam[a], slots[a][side]);
                }
            }
        };
        match topo.classes[e] {
            ElementClass::Neg | ElementClass::Pos => {
                let side = usize::from(topo.classes[e] == ElementClass::Pos);
                integrate(&pts[..nv], side, &mut out);
            }
            ElementClass::Cut => {
                let cd = &topo.cut_data[topo.cut_index[e].unwrap()];
                for side in 0..2 {
                    for part in &cd.parts[side] {
                        integrate(&part[..nv], side, &mut out);
                    }
                }
            }
        }
        out
    });
    let mut b = vec![0.0; space.n_dofs()];
    for out in outputs {
        for (d, v) in out.rhs {
            b[d] += v;
        }
    }
    b
}

/// Assemble the full method matrix and right-hand side: bulk + interface
/// terms per the configured method, load from `f`, and the strong lift of
/// the Dirichlet data `u_d` on boundary vertices.
pub fn assemble_system(
    mesh: &MeshLevel,
    topo: &CutTopology,
    space: &CutSpace,
    cfg: &DiscretizationConfig,
    f: &(impl Fn(Point, usize) -> f64 + Sync + ?Sized),
    u_d: &(impl Fn(Point) -> f64 + Sync + ?Sized),
) -> Result<(SparseMatrix, Vec<f64>)> {
    cfg.validate()?;
    let sel = TermSelection {
        bulk: true,
        consistency: true,
        penalty: match cfg.method {
            Method::Nitsche => Some(cfg.lambda_n),
            Method::PNitsche => Some(1.0),
            Method::MuNitsche => Some(mu_penalty(cfg.mu, cfg.lambda_n)),
        },
        lifting: cfg.method == Method::PNitsche,
    };
    let (mut a, mut b) = assemble_selected(mesh, topo, space, cfg, sel, u_d)?;
    if cfg.method == Method::MuNitsche {
        let (g, gb) = ghost_terms(mesh, topo, space, cfg, u_d)?;
        a = a.add(&g);
        for (bi, gi) in b.iter_mut().zip(&gb) {
            *bi += gi;
        }
    }
    let load = load_vector(mesh, topo, space, f);
    for (bi, li) in b.iter_mut().zip(&load) {
        *bi += li;
    }
    Ok((a, b))
}

/// L² distance between the discrete solution (hat/jump coefficients plus
/// Dirichlet data at eliminated boundary vertices) and a side-resolved
/// reference `u_star(x, side)`, integrated with the side-correct sub-simplex
/// decomposition on cut elements.
pub fn l2_error(
    mesh: &MeshLevel,
    topo: &CutTopology,
    space: &CutSpace,
    coeffs: &[f64],
    u_d: &(impl Fn(Point) -> f64 + Sync + ?Sized),
    u_star: &(impl Fn(Point, usize) -> f64 + Sync + ?Sized),
) -> f64 {
    let dim = mesh.dim;
    let nv = dim + 1;
    let rule = QuadratureRule::volume(dim, 4);
    let sums = par::map_indexed(mesh.n_simplices(), |e| {
        let pts = mesh.simplex_points(e);
        let verts = mesh.simplex(e);
        let nodal = |v: usize, side: usize| -> f64 {
            if space.std_dof[v].is_some() {
                space.side_coefficient(coeffs, v, side)
            } else {
                u_d(mesh.vertices[v])
            }
        };
        let integrate = |corners: &[Point], side: usize| -> f64 {
            let vol = geom::measure(dim, corners);
            let mut acc = 0.0;
            for (q, wq) in rule.points.iter().zip(&rule.weights) {
                let mut x = [0.0; 3];
                for (k, p) in corners.iter().enumerate() {
                    x = geom::add(x, geom::scale(*p, q[k]));
                }
                let lam = geom::barycentric(dim, &pts[..nv], x);
                let mut uh = 0.0;
                for a in 0..nv {
                    uh += lam[a] * nodal(verts[a], side);
                }
                let diff = uh - u_star(x, side);
                acc += vol * wq * diff * diff;
            }
            acc
        };
        match topo.classes[e] {
            ElementClass::Neg | ElementClass::Pos => {
                let side = usize::from(topo.classes[e] == ElementClass::Pos);
                integrate(&pts[..nv], side)
            }
            ElementClass::Cut => {
                let cd = &topo.cut_data[topo.cut_index[e].unwrap()];
                let mut acc = 0.0;
                for side in 0..2 {
                    for part in &cd.parts[side] {
                        acc += integrate(&part[..nv], side);
                    }
                }
                acc
            }
        }
    });
    sums.iter().sum::<f64>().sqrt()
}
