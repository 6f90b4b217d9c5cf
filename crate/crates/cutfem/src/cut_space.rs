//! The unfitted finite element space on a cut mesh level.
//!
//! Each subdomain side carries a standard P1 space on its extended domain
//! (all interior vertices of elements touching that side); the product of
//! the two restricted spaces is the solution space. Two coefficient bases
//! are maintained:
//!
//! * **two-copy**: side-1 coefficients followed by side-2 coefficients —
//!   the basis in which the multigrid prolongation is block-diagonal;
//! * **hat/jump** (XFEM): one coefficient per interior mesh vertex for the
//!   continuous hat function, plus one *extended* coefficient per doubled
//!   vertex holding the jump contribution of the hat truncated to the far
//!   side of the interface — the basis in which the stiffness matrix is
//!   assembled and smoothed.
//!
//! A vertex is *doubled* when it lies (strictly, by the perturbed level set
//! sign) in one subdomain while its hat support reaches the other — exactly
//! the interior vertices of cut elements. Extended DOFs are ordered by a
//! breadth-first walk along the interface adjacency, which keeps the
//! interface matrix bandwidth small.

use crate::cut_geometry::{CutTopology, ElementClass};
use crate::error::{Error, Result};
use crate::geom::{self, Point};
use crate::mesh::MeshLevel;
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone)]
pub struct CutSpace {
    pub dim: usize,
    /// Per side: vertex -> DOF of the restricted space on that side's
    /// extended domain (interior vertices only), in ascending vertex order.
    pub side_dof: [Vec<Option<usize>>; 2],
    /// Per side: DOF -> vertex.
    pub side_vertex: [Vec<usize>; 2],
    /// Hat-basis part: vertex -> standard DOF (all interior mesh vertices).
    pub std_dof: Vec<Option<usize>>,
    pub std_vertex: Vec<usize>,
    /// Doubled vertices in interface BFS order; extended DOF k belongs to
    /// vertex doubled[k] and has global index n_std + k.
    pub doubled: Vec<usize>,
    /// Vertex -> extended DOF position (index into `doubled`).
    pub ext_dof: Vec<Option<usize>>,
    /// Vertex -> subdomain side (0 / 1) by perturbed level set sign.
    pub vertex_side: Vec<usize>,
}

impl CutSpace {
    pub fn n_side(&self, side: usize) -> usize {
        self.side_vertex[side].len()
    }

    pub fn n_std(&self) -> usize {
        self.std_vertex.len()
    }

    pub fn n_ext(&self) -> usize {
        self.doubled.len()
    }

    /// Total dimension (identical in both bases).
    pub fn n_dofs(&self) -> usize {
        self.n_std() + self.n_ext()
    }

    /// Doubled vertices belonging to side i (members of 𝒱_i).
    pub fn doubled_on_side(&self, side: usize) -> impl Iterator<Item = usize> + '_ {
        self.doubled
            .iter()
            .copied()
            .filter(move |&v| self.vertex_side[v] == side)
    }

    /// Global hat/jump index of the extended DOF at vertex `v`.
    pub fn ext_index(&self, v: usize) -> Option<usize> {
        self.ext_dof[v].map(|k| self.n_std() + k)
    }

    /// DOF indices of the interface block: for every doubled vertex (in BFS
    /// order) its standard index followed by its extended index. The
    /// principal submatrix of the stiffness matrix on these indices is the
    /// local interface matrix.
    pub fn interface_indices(&self) -> Vec<usize> {
        let mut idx = Vec::with_capacity(2 * self.n_ext());
        for (k, &v) in self.doubled.iter().enumerate() {
            idx.push(self.std_dof[v].expect("doubled vertices are interior"));
            idx.push(self.n_std() + k);
        }
        idx
    }

    /// Coefficient of side `side` at vertex `v`, given hat/jump coefficients
    /// (zero for boundary vertices, which carry no DOF).
    pub fn side_coefficient(&self, coeffs: &[f64], v: usize, side: usize) -> f64 {
        let Some(s) = self.std_dof[v] else {
            return 0.0;
        };
        let mut val = coeffs[s];
        if self.vertex_side[v] != side {
            if let Some(e) = self.ext_index(v) {
                val += coeffs[e];
            }
        }
        val
    }

    /// Two-copy -> hat/jump coefficient transform: the hat coefficient is
    /// the home-side value, the jump coefficient the far-minus-home
    /// difference.
    pub fn twocopy_to_xfem(&self, u: &[f64]) -> Vec<f64> {
        debug_assert_eq!(u.len(), self.n_side(0) + self.n_side(1));
        let side_val = |v: usize, side: usize| -> f64 {
            let d = self.side_dof[side][v].expect("vertex outside side space");
            u[if side == 0 { d } else { self.n_side(0) + d }]
        };
        let mut c = vec![0.0; self.n_dofs()];
        for (s, &v) in self.std_vertex.iter().enumerate() {
            c[s] = side_val(v, self.vertex_side[v]);
        }
        for (k, &v) in self.doubled.iter().enumerate() {
            let home = self.vertex_side[v];
            c[self.n_std() + k] = side_val(v, 1 - home) - side_val(v, home);
        }
        c
    }

    /// Hat/jump -> two-copy coefficient transform (inverse of
    /// [`CutSpace::twocopy_to_xfem`]).
    pub fn xfem_to_twocopy(&self, c: &[f64]) -> Vec<f64> {
        debug_assert_eq!(c.len(), self.n_dofs());
        let mut u = vec![0.0; self.n_side(0) + self.n_side(1)];
        for side in 0..2 {
            let offset = if side == 0 { 0 } else { self.n_side(0) };
            for (d, &v) in self.side_vertex[side].iter().enumerate() {
                u[offset + d] = self.side_coefficient(c, v, side);
            }
        }
        u
    }

    /// The transform of [`CutSpace::twocopy_to_xfem`] as a sparse matrix
    /// (at most two entries per row, values ±1).
    pub fn twocopy_to_xfem_matrix(&self) -> SparseMatrix {
        let mut t = Vec::with_capacity(self.n_dofs() + self.n_ext());
        let col = |v: usize, side: usize| -> usize {
            let d = self.side_dof[side][v].expect("vertex outside side space");
            if side == 0 {
                d
            } else {
                self.n_side(0) + d
            }
        };
        for (s, &v) in self.std_vertex.iter().enumerate() {
            t.push((s, col(v, self.vertex_side[v]), 1.0));
        }
        for (k, &v) in self.doubled.iter().enumerate() {
            let home = self.vertex_side[v];
            t.push((self.n_std() + k, col(v, 1 - home), 1.0));
            t.push((self.n_std() + k, col(v, home), -1.0));
        }
        SparseMatrix::from_triplets(self.n_dofs(), self.n_dofs(), t)
    }

    /// The inverse transform as a sparse matrix.
    pub fn xfem_to_twocopy_matrix(&self) -> SparseMatrix {
        let mut t = Vec::with_capacity(self.n_dofs() + self.n_ext());
        for side in 0..2 {
            let offset = if side == 0 { 0 } else { self.n_side(0) };
            for (d, &v) in self.side_vertex[side].iter().enumerate() {
                let s = self.std_dof[v].expect("side-space vertices are interior");
                t.push((offset + d, s, 1.0));
                if self.vertex_side[v] != side {
                    t.push((offset + d, self.ext_index(v).unwrap(), 1.0));
                }
            }
        }
        SparseMatrix::from_triplets(self.n_dofs(), self.n_dofs(), t)
    }
}

/// Build the cut space for a classified mesh level. The solution space has
/// zero trace: boundary vertices carry no DOFs (Dirichlet data enters the
/// right-hand side instead).
pub fn build_cut_space(mesh: &MeshLevel, topo: &CutTopology) -> CutSpace {
    build_cut_space_with(mesh, topo, true)
}

/// As [`build_cut_space`], optionally keeping DOFs at boundary vertices
/// (`zero_trace = false`) — used by energy oracles that evaluate the
/// quadratic form on functions with nonzero boundary values.
pub fn build_cut_space_with(mesh: &MeshLevel, topo: &CutTopology, zero_trace: bool) -> CutSpace {
    let nv = mesh.n_vertices();
    let k = mesh.dim + 1;
    let vertex_side: Vec<usize> = (0..nv).map(|v| topo.vertex_side(v)).collect();

    // Vertex membership in the extended domains and in the cut band.
    let mut touches = [vec![false; nv], vec![false; nv]];
    let mut on_cut = vec![false; nv];
    for e in 0..mesh.n_simplices() {
        for &v in mesh.simplex(e) {
            for side in 0..2 {
                if topo.extended_elems[side][e] {
                    touches[side][v] = true;
                }
            }
            if topo.classes[e] == ElementClass::Cut {
                on_cut[v] = true;
            }
        }
    }

    let interior = |v: usize| !zero_trace || !mesh.boundary_vertex[v];
    let mut side_dof = [vec![None; nv], vec![None; nv]];
    let mut side_vertex = [Vec::new(), Vec::new()];
    for side in 0..2 {
        for v in 0..nv {
            if touches[side][v] && interior(v) {
                side_dof[side][v] = Some(side_vertex[side].len());
                side_vertex[side].push(v);
            }
        }
    }

    let mut std_dof = vec![None; nv];
    let mut std_vertex = Vec::new();
    for v in 0..nv {
        if interior(v) {
            std_dof[v] = Some(std_vertex.len());
            std_vertex.push(v);
        }
    }

    // Doubled vertices: interior vertices of cut elements. BFS order along
    // the interface: two doubled vertices are adjacent when they share a cut
    // element; traversal starts at the smallest doubled vertex, visits
    // neighbors in ascending order, and restarts per component.
    let is_doubled: Vec<bool> = (0..nv).map(|v| on_cut[v] && interior(v)).collect();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nv];
    for e in 0..mesh.n_simplices() {
        if topo.classes[e] != ElementClass::Cut {
            continue;
        }
        let verts = mesh.simplex(e);
        for a in 0..k {
            for b in a + 1..k {
                let (va, vb) = (verts[a], verts[b]);
                if is_doubled[va] && is_doubled[vb] {
                    adj[va].push(vb);
                    adj[vb].push(va);
                }
            }
        }
    }
    for l in &mut adj {
        l.sort_unstable();
        l.dedup();
    }
    let mut doubled = Vec::new();
    let mut seen = vec![false; nv];
    let mut queue = std::collections::VecDeque::new();
    for start in 0..nv {
        if !is_doubled[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            doubled.push(v);
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    let mut ext_dof = vec![None; nv];
    for (idx, &v) in doubled.iter().enumerate() {
        ext_dof[v] = Some(idx);
    }

    CutSpace {
        dim: mesh.dim,
        side_dof,
        side_vertex,
        std_dof,
        std_vertex,
        doubled,
        ext_dof,
        vertex_side,
    }
}

/// Evaluate the side-`side` component of a hat/jump coefficient vector at a
/// point. The point must lie in an element where that side is defined
/// (matching class or cut); within a cut element the side function is the
/// linear extension over the whole element.
pub fn eval_cut_function(
    mesh: &MeshLevel,
    topo: &CutTopology,
    space: &CutSpace,
    coeffs: &[f64],
    x: Point,
    side: usize,
) -> Result<f64> {
    let own_class = if side == 0 {
        ElementClass::Neg
    } else {
        ElementClass::Pos
    };
    for e in 0..mesh.n_simplices() {
        if topo.classes[e] != own_class && topo.classes[e] != ElementClass::Cut {
            continue;
        }
        let pts = mesh.simplex_points(e);
        let lam = geom::barycentric(mesh.dim, &pts[..mesh.dim + 1], x);
        if lam[..mesh.dim + 1].iter().any(|&l| l < -1e-12) {
            continue;
        }
        let mut val = 0.0;
        for (i, &v) in mesh.simplex(e).iter().enumerate() {
            val += lam[i] * space.side_coefficient(coeffs, v, side);
        }
        return Ok(val);
    }
    Err(Error::PointNotInMesh { point: x })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cut_geometry::{build_cut_topology, LevelSet};
    use crate::mesh::build_initial_mesh;

    fn planar_setup() -> (MeshLevel, CutTopology, CutSpace) {
        let mesh = build_initial_mesh(2, 4, 0.0, 2.0).unwrap();
        let topo = build_cut_topology(&LevelSet::Planar { x_gamma: 1.321 }, &mesh, false).unwrap();
        let space = build_cut_space(&mesh, &topo);
        (mesh, topo, space)
    }

    fn spherical_setup() -> (MeshLevel, CutTopology, CutSpace) {
        let mesh = build_initial_mesh(2, 8, 0.0, 2.0).unwrap();
        let phi = LevelSet::Spherical {
            center: [1.03, 1.02, 0.0],
            radius: 0.413,
        };
        let topo = build_cut_topology(&phi, &mesh, true).unwrap();
        let space = build_cut_space(&mesh, &topo);
        (mesh, topo, space)
    }

    #[test]
    fn doubled_vertices_on_the_known_planar_cut() {
        let (mesh, _, space) = planar_setup();
        // x_Γ = 1.321 cuts the column of cells [1, 1.5] × [0, 2]: the cut
        // band has 10 vertices, of which the 6 off the boundary are doubled
        // (3 at x=1 on side 1, 3 at x=1.5 on side 2).
        assert_eq!(space.n_ext(), 6);
        assert_eq!(space.doubled_on_side(0).count(), 3);
        assert_eq!(space.doubled_on_side(1).count(), 3);
        for &v in &space.doubled {
            let x = mesh.vertices[v];
            assert!(x[0] == 1.0 || x[0] == 1.5);
            assert!(x[1] > 0.0 && x[1] < 2.0);
            assert!(!mesh.boundary_vertex[v]);
        }
    }

    #[test]
    fn natural_space_doubles_every_cut_band_vertex() {
        let (mesh, topo, _) = planar_setup();
        let space = build_cut_space_with(&mesh, &topo, false);
        // Without the zero-trace restriction the doubled vertices are
        // exactly the vertices of cut elements: the full 2 × 5 cut band.
        assert_eq!(space.n_ext(), 10);
        assert_eq!(space.n_std(), mesh.n_vertices());
        assert_eq!(
            space.n_side(0) + space.n_side(1),
            space.n_std() + space.n_ext()
        );
    }

    #[test]
    fn bfs_order_walks_along_the_interface() {
        let (mesh, _, space) = planar_setup();
        // Consecutive extended DOFs must be interface neighbors: their
        // vertices never drift more than one cell apart in y.
        for w in space.doubled.windows(2) {
            let (a, b) = (mesh.vertices[w[0]], mesh.vertices[w[1]]);
            assert!(
                (a[1] - b[1]).abs() <= 0.5 + 1e-15,
                "BFS order jumps along the interface: {a:?} -> {b:?}"
            );
        }
    }

    #[test]
    fn dimensions_agree_between_bases() {
        for (_, _, space) in [planar_setup(), spherical_setup()] {
            assert_eq!(
                space.n_side(0) + space.n_side(1),
                space.n_std() + space.n_ext(),
                "two-copy and hat/jump dimensions must coincide"
            );
        }
    }

    #[test]
    fn roundtrip_is_identity() {
        let (_, _, space) = spherical_setup();
        let n = space.n_side(0) + space.n_side(1);
        let u: Vec<f64> = (0..n).map(|i| ((i * 31 + 7) % 97) as f64 / 29.0 - 1.0).collect();
        let c = space.twocopy_to_xfem(&u);
        let back = space.xfem_to_twocopy(&c);
        for (a, b) in u.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
        // And the matrices themselves are two-sided inverses: entries are
        // ±1, so the product is exact.
        let t = space.twocopy_to_xfem_matrix();
        let tinv = space.xfem_to_twocopy_matrix();
        let prod = t.matmul(&tinv).drop_zeros();
        assert_eq!(prod, SparseMatrix::identity(space.n_dofs()));
        let prod = tinv.matmul(&t).drop_zeros();
        assert_eq!(prod, SparseMatrix::identity(space.n_dofs()));
    }

    #[test]
    fn matrix_transform_matches_function_transform() {
        let (_, _, space) = planar_setup();
        let n = space.n_dofs();
        let u: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let via_fn = space.twocopy_to_xfem(&u);
        let via_mat = space.twocopy_to_xfem_matrix().matvec(&u);
        assert_eq!(via_fn, via_mat);
    }

    #[test]
    fn continuous_functions_have_zero_jump_coefficients() {
        let (mesh, _, space) = spherical_setup();
        // Interpolate a smooth function into both side spaces.
        let g = |x: Point| x[0] * x[0] + 0.5 * x[1];
        let mut u = vec![0.0; space.n_side(0) + space.n_side(1)];
        for side in 0..2 {
            let offset = if side == 0 { 0 } else { space.n_side(0) };
            for (d, &v) in space.side_vertex[side].iter().enumerate() {
                u[offset + d] = g(mesh.vertices[v]);
            }
        }
        let c = space.twocopy_to_xfem(&u);
        for k in 0..space.n_ext() {
            assert_eq!(c[space.n_std() + k], 0.0);
        }
    }

    #[test]
    fn constant_one_evaluates_to_one_on_both_sides() {
        let (mesh, topo, space) = planar_setup();
        let mut c = vec![0.0; space.n_dofs()];
        for s in 0..space.n_std() {
            c[s] = 1.0;
        }
        // Interior sample points away from the boundary (where the
        // zero-trace space forces the value down).
        for (x, side) in [([0.9, 1.0, 0.0], 0), ([1.301, 0.9, 0.0], 0), ([1.4, 1.1, 0.0], 1)] {
            let val = eval_cut_function(&mesh, &topo, &space, &c, x, side).unwrap();
            let lam_sum_interior = val; // hats partition unity on interior elements
            assert!(
                (lam_sum_interior - 1.0).abs() < 1e-14,
                "constant not reproduced at {x:?} side {side}"
            );
        }
        assert!(matches!(
            eval_cut_function(&mesh, &topo, &space, &c, [5.0, 5.0, 0.0], 0),
            Err(Error::PointNotInMesh { .. })
        ));
    }

    #[test]
    fn extended_dof_vanishes_on_its_home_side() {
        let (mesh, topo, space) = planar_setup();
        let v = space.doubled[0];
        let home = space.vertex_side[v];
        let mut c = vec![0.0; space.n_dofs()];
        c[space.ext_index(v).unwrap()] = 1.0;
        // Sample near the doubled vertex on its home side: the extended
        // function lives only on the far side.
        let x = mesh.vertices[v];
        let probe = if home == 0 { [x[0] - 0.1, x[1], 0.0] } else { [x[0] + 0.1, x[1], 0.0] };
        let val = eval_cut_function(&mesh, &topo, &space, &c, probe, home).unwrap();
        assert_eq!(val, 0.0);
        // On the far side it acts as the hat of v.
        let far = eval_cut_function(&mesh, &topo, &space, &c, x, 1 - home).unwrap();
        assert_eq!(far, 1.0);
    }

    #[test]
    fn evaluation_matches_barycentric_oracle() {
        let (mesh, topo, space) = spherical_setup();
        let n = space.n_dofs();
        let c: Vec<f64> = (0..n).map(|i| ((i * 13 + 5) % 83) as f64 / 17.0).collect();
        // Centroid of the first cut element, evaluated on both sides.
        let e = topo.cut_data[0].element;
        let pts = mesh.simplex_points(e);
        let mut centroid = [0.0; 3];
        for p in &pts[..3] {
            centroid = geom::add(centroid, geom::scale(*p, 1.0 / 3.0));
        }
        for side in 0..2 {
            let val = eval_cut_function(&mesh, &topo, &space, &c, centroid, side).unwrap();
            let lam = geom::barycentric(2, &pts[..3], centroid);
            let mut oracle = 0.0;
            for (i, &v) in mesh.simplex(e).iter().enumerate() {
                oracle += lam[i] * space.side_coefficient(&c, v, side);
            }
            assert!((val - oracle).abs() < 1e-13);
        }
    }

    #[test]
    fn jump_matches_twocopy_difference() {
        let (mesh, topo, space) = spherical_setup();
        let n = space.n_dofs();
        let c: Vec<f64> = (0..n).map(|i| ((i * 7 + 3) % 61) as f64 / 11.0 - 2.0).collect();
        let u = space.xfem_to_twocopy(&c);
        for cd in topo.cut_data.iter().take(8) {
            let e = cd.element;
            let pts = mesh.simplex_points(e);
            for facet in &cd.facets {
                // Midpoint of the interface facet.
                let mid = geom::midpoint(facet.points[0], facet.points[1]);
                let lam = geom::barycentric(2, &pts[..3], mid);
                let mut jump_xfem = 0.0;
                let mut side_vals = [0.0; 2];
                for (i, &v) in mesh.simplex(e).iter().enumerate() {
                    for side in 0..2 {
                        let coeff = match space.side_dof[side][v] {
                            Some(d) => u[if side == 0 { d } else { space.n_side(0) + d }],
                            None => 0.0,
                        };
                        side_vals[side] += lam[i] * coeff;
                    }
                    jump_xfem += lam[i]
                        * (space.side_coefficient(&c, v, 0) - space.side_coefficient(&c, v, 1));
                }
                let jump_twocopy = side_vals[0] - side_vals[1];
                assert!(
                    (jump_xfem - jump_twocopy).abs() < 1e-12,
                    "jump disagrees: {jump_xfem} vs {jump_twocopy}"
                );
            }
        }
    }
}
