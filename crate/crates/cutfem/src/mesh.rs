//! Nested simplicial triangulations of an axis-aligned box, uniform red
//! refinement with parent tracking, and the standard P1 prolongation.

use std::collections::HashMap;
use std::io::Write;

use crate::error::{Error, Result};
use crate::geom::{self, Point};
use crate::sparse::SparseMatrix;

/// Provenance of a fine vertex relative to the coarse mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexParent {
    /// Same vertex on the coarse mesh.
    Coarse(usize),
    /// Midpoint of the coarse edge (a, b).
    Edge(usize, usize),
}

#[derive(Debug, Clone)]
pub struct MeshLevel {
    pub level: usize,
    pub dim: usize,
    pub vertices: Vec<Point>,
    /// Flat simplex connectivity, stride `dim + 1`, positively oriented.
    pub simplices: Vec<usize>,
    /// Flat face connectivity (sorted vertex ids), stride `dim`.
    pub faces: Vec<usize>,
    /// Owning simplices of each face; `None` second owner marks the boundary.
    pub face_owners: Vec<(usize, Option<usize>)>,
    pub boundary_vertex: Vec<bool>,
    /// Mesh size parameter: maximum simplex diameter.
    pub h: f64,
    /// For level > 0: provenance of every fine vertex. Empty on the root.
    pub parent_vertex: Vec<VertexParent>,
    /// For level > 0: coarse simplex containing each fine simplex.
    pub parent_simplex: Vec<usize>,
}

impl MeshLevel {
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_simplices(&self) -> usize {
        self.simplices.len() / (self.dim + 1)
    }

    pub fn simplex(&self, e: usize) -> &[usize] {
        let k = self.dim + 1;
        &self.simplices[e * k..(e + 1) * k]
    }

    /// Vertex coordinates of simplex `e`, padded with zeros in 2D.
    pub fn simplex_points(&self, e: usize) -> [Point; 4] {
        let mut p = [[0.0; 3]; 4];
        for (slot, &v) in p.iter_mut().zip(self.simplex(e)) {
            *slot = self.vertices[v];
        }
        p
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len() / self.dim
    }

    pub fn face(&self, f: usize) -> &[usize] {
        &self.faces[f * self.dim..(f + 1) * self.dim]
    }

    pub fn face_points(&self, f: usize) -> [Point; 3] {
        let mut p = [[0.0; 3]; 3];
        for (slot, &v) in p.iter_mut().zip(self.face(f)) {
            *slot = self.vertices[v];
        }
        p
    }

    /// Brute-force point location: first simplex containing `x` (with a small
    /// tolerance), together with its barycentric coordinates.
    pub fn locate(&self, x: Point) -> Option<(usize, [f64; 4])> {
        for e in 0..self.n_simplices() {
            let pts = self.simplex_points(e);
            let lam = geom::barycentric(self.dim, &pts[..self.dim + 1], x);
            if lam[..self.dim + 1].iter().all(|&l| l >= -1e-12) {
                return Some((e, lam));
            }
        }
        None
    }

    /// Plaintext dump: one `v x y [z]` line per vertex, one `c i j k [l]`
    /// line per simplex.
    pub fn write_plaintext<W: Write>(&self, w: &mut W) -> Result<()> {
        for v in &self.vertices {
            if self.dim == 2 {
                writeln!(w, "v {:.17e} {:.17e}", v[0], v[1])?;
            } else {
                writeln!(w, "v {:.17e} {:.17e} {:.17e}", v[0], v[1], v[2])?;
            }
        }
        for e in 0..self.n_simplices() {
            let s: Vec<String> = self.simplex(e).iter().map(|v| v.to_string()).collect();
            writeln!(w, "c {}", s.join(" "))?;
        }
        Ok(())
    }
}

/// Swap two vertices if needed so the simplex has positive signed volume.
fn orient_positive(dim: usize, verts: &mut [usize], coords: &[Point]) {
    let pts: Vec<Point> = verts.iter().map(|&v| coords[v]).collect();
    if geom::signed_measure(dim, &pts) < 0.0 {
        verts.swap(dim - 1, dim);
    }
}

/// Face table and derived boundary data for a simplex list.
fn build_topology(
    dim: usize,
    n_vertices: usize,
    simplices: &[usize],
) -> (Vec<usize>, Vec<(usize, Option<usize>)>, Vec<bool>) {
    let k = dim + 1;
    let n_simplices = simplices.len() / k;
    let mut face_ids: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut faces: Vec<usize> = Vec::new();
    let mut face_owners: Vec<(usize, Option<usize>)> = Vec::new();
    for e in 0..n_simplices {
        let sv = &simplices[e * k..(e + 1) * k];
        for omit in 0..k {
            let mut fv: Vec<usize> = sv
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != omit)
                .map(|(_, &v)| v)
                .collect();
            fv.sort_unstable();
            match face_ids.get(&fv) {
                Some(&fid) => {
                    debug_assert!(face_owners[fid].1.is_none(), "face with three owners");
                    face_owners[fid].1 = Some(e);
                }
                None => {
                    let fid = face_owners.len();
                    face_ids.insert(fv.clone(), fid);
                    faces.extend_from_slice(&fv);
                    face_owners.push((e, None));
                }
            }
        }
    }
    let mut boundary_vertex = vec![false; n_vertices];
    for (fid, owners) in face_owners.iter().enumerate() {
        if owners.1.is_none() {
            for &v in &faces[fid * dim..(fid + 1) * dim] {
                boundary_vertex[v] = true;
            }
        }
    }
    (faces, face_owners, boundary_vertex)
}

fn max_diameter(dim: usize, vertices: &[Point], simplices: &[usize]) -> f64 {
    let k = dim + 1;
    let mut h: f64 = 0.0;
    for e in 0..simplices.len() / k {
        let pts: Vec<Point> = simplices[e * k..(e + 1) * k]
            .iter()
            .map(|&v| vertices[v])
            .collect();
        h = h.max(geom::diameter(&pts));
    }
    h
}

/// Conforming triangulation of the box `[lo, hi]^dim` with `n0` cells per
/// axis: 2 triangles per square cell, 6 tetrahedra per cube cell (Kuhn
/// subdivision, so midpoint refinement stays nested).
pub fn build_initial_mesh(dim: usize, n0: usize, lo: f64, hi: f64) -> Result<MeshLevel> {
    if dim != 2 && dim != 3 {
        return Err(Error::BadDimension(dim));
    }
    if n0 < 2 {
        return Err(Error::Config(format!(
            "need at least 2 subdivisions per axis, got {n0}"
        )));
    }
    if !(hi > lo) {
        return Err(Error::Config(format!("empty box [{lo}, {hi}]")));
    }
    let np = n0 + 1;
    let coord = |i: usize| lo + (hi - lo) * (i as f64) / (n0 as f64);
    let mut vertices = Vec::new();
    let mut simplices = Vec::new();
    if dim == 2 {
        for iy in 0..np {
            for ix in 0..np {
                vertices.push([coord(ix), coord(iy), 0.0]);
            }
        }
        let vid = |ix: usize, iy: usize| iy * np + ix;
        for iy in 0..n0 {
            for ix in 0..n0 {
                let (v00, v10) = (vid(ix, iy), vid(ix + 1, iy));
                let (v01, v11) = (vid(ix, iy + 1), vid(ix + 1, iy + 1));
                simplices.extend_from_slice(&[v00, v10, v11]);
                simplices.extend_from_slice(&[v00, v11, v01]);
            }
        }
    } else {
        for iz in 0..np {
            for iy in 0..np {
                for ix in 0..np {
                    vertices.push([coord(ix), coord(iy), coord(iz)]);
                }
            }
        }
        let vid = |ix: usize, iy: usize, iz: usize| (iz * np + iy) * np + ix;
        // Kuhn subdivision: one tet per permutation of the axes, walking from
        // the low corner to the high corner one axis at a time. All six tets
        // share the main diagonal, and the pattern matches across cells.
        const PERMS: [[usize; 3]; 6] = [
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        for iz in 0..n0 {
            for iy in 0..n0 {
                for ix in 0..n0 {
                    for perm in &PERMS {
                        let mut off = [0usize; 3];
                        let mut tet = [vid(ix, iy, iz); 4];
                        for (step, &axis) in perm.iter().enumerate() {
                            off[axis] += 1;
                            tet[step + 1] = vid(ix + off[0], iy + off[1], iz + off[2]);
                        }
                        orient_positive(dim, &mut tet, &vertices);
                        simplices.extend_from_slice(&tet);
                    }
                }
            }
        }
    }
    let (faces, face_owners, boundary_vertex) = build_topology(dim, vertices.len(), &simplices);
    let h = max_diameter(dim, &vertices, &simplices);
    Ok(MeshLevel {
        level: 0,
        dim,
        vertices,
        simplices,
        faces,
        face_owners,
        boundary_vertex,
        h,
        parent_vertex: Vec::new(),
        parent_simplex: Vec::new(),
    })
}

/// Uniform red refinement: every triangle splits into 4 children, every
/// tetrahedron into 8 (corner cut-off plus octahedron split along the
/// m02–m13 diagonal). Edge midpoints are deduplicated by parent edge index,
/// so coincident fine vertices are bitwise identical.
pub fn refine_uniform(coarse: &MeshLevel) -> MeshLevel {
    let dim = coarse.dim;
    let mut vertices = coarse.vertices.clone();
    let mut parent_vertex: Vec<VertexParent> =
        (0..coarse.n_vertices()).map(VertexParent::Coarse).collect();
    let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
    let mut mid = |a: usize, b: usize,
                   vertices: &mut Vec<Point>,
                   parent_vertex: &mut Vec<VertexParent>|
     -> usize {
        let key = (a.min(b), a.max(b));
        *midpoints.entry(key).or_insert_with(|| {
            let id = vertices.len();
            vertices.push(geom::midpoint(vertices[a], vertices[b]));
            parent_vertex.push(VertexParent::Edge(key.0, key.1));
            id
        })
    };

    let mut simplices = Vec::new();
    let mut parent_simplex = Vec::new();
    for e in 0..coarse.n_simplices() {
        let s = coarse.simplex(e).to_vec();
        if dim == 2 {
            let (v0, v1, v2) = (s[0], s[1], s[2]);
            let m01 = mid(v0, v1, &mut vertices, &mut parent_vertex);
            let m12 = mid(v1, v2, &mut vertices, &mut parent_vertex);
            let m02 = mid(v0, v2, &mut vertices, &mut parent_vertex);
            let children = [
                [v0, m01, m02],
                [m01, v1, m12],
                [m02, m12, v2],
                [m01, m12, m02],
            ];
            for child in children {
                let mut c = child;
                orient_positive(dim, &mut c, &vertices);
                simplices.extend_from_slice(&c);
                parent_simplex.push(e);
            }
        } else {
            let (v0, v1, v2, v3) = (s[0], s[1], s[2], s[3]);
            let m01 = mid(v0, v1, &mut vertices, &mut parent_vertex);
            let m02 = mid(v0, v2, &mut vertices, &mut parent_vertex);
            let m03 = mid(v0, v3, &mut vertices, &mut parent_vertex);
            let m12 = mid(v1, v2, &mut vertices, &mut parent_vertex);
            let m13 = mid(v1, v3, &mut vertices, &mut parent_vertex);
            let m23 = mid(v2, v3, &mut vertices, &mut parent_vertex);
            let children = [
                [v0, m01, m02, m03],
                [m01, v1, m12, m13],
                [m02, m12, v2, m23],
                [m03, m13, m23, v3],
                [m01, m02, m03, m13],
                [m01, m02, m12, m13],
                [m02, m03, m13, m23],
                [m02, m12, m13, m23],
            ];
            for child in children {
                let mut c = child;
                orient_positive(dim, &mut c, &vertices);
                simplices.extend_from_slice(&c);
                parent_simplex.push(e);
            }
        }
    }
    let (faces, face_owners, boundary_vertex) = build_topology(dim, vertices.len(), &simplices);
    let h = max_diameter(dim, &vertices, &simplices);
    MeshLevel {
        level: coarse.level + 1,
        dim,
        vertices,
        simplices,
        faces,
        face_owners,
        boundary_vertex,
        h,
        parent_vertex,
        parent_simplex,
    }
}

/// Vertex-based P1 DOF numbering, optionally restricted to a vertex subset
/// and with boundary vertices excluded (strong Dirichlet data).
#[derive(Debug, Clone)]
pub struct StdSpace {
    /// Vertex -> DOF index, `None` for vertices outside the space.
    pub dof: Vec<Option<usize>>,
    /// DOF index -> vertex.
    pub vertex_of_dof: Vec<usize>,
    pub n_dofs: usize,
    pub zero_trace: bool,
}

impl StdSpace {
    pub fn with_filter<F: Fn(usize) -> bool>(
        mesh: &MeshLevel,
        keep: F,
        zero_trace: bool,
    ) -> Self {
        let mut dof = vec![None; mesh.n_vertices()];
        let mut vertex_of_dof = Vec::new();
        for v in 0..mesh.n_vertices() {
            if keep(v) && !(zero_trace && mesh.boundary_vertex[v]) {
                dof[v] = Some(vertex_of_dof.len());
                vertex_of_dof.push(v);
            }
        }
        let n_dofs = vertex_of_dof.len();
        StdSpace {
            dof,
            vertex_of_dof,
            n_dofs,
            zero_trace,
        }
    }

    /// All interior vertices carry a DOF (homogeneous trace handled strongly).
    pub fn zero_trace(mesh: &MeshLevel) -> Self {
        Self::with_filter(mesh, |_| true, true)
    }

    /// Every vertex carries a DOF, boundary included.
    pub fn natural(mesh: &MeshLevel) -> Self {
        Self::with_filter(mesh, |_| true, false)
    }
}

/// P1 interpolation matrix from a coarse vertex space to a fine one: 1 at a
/// coincident coarse vertex, ½/½ at the endpoints of the parent edge.
///
/// A coarse parent vertex without a DOF is dropped when the coarse space
/// excluded it as strong boundary data (its hat function is simply absent);
/// a parent missing for any other reason means the fine vertex set escapes
/// the coarse one and is reported as a nesting violation.
pub fn std_prolongation(
    coarse_mesh: &MeshLevel,
    fine_mesh: &MeshLevel,
    coarse: &StdSpace,
    fine: &StdSpace,
) -> Result<SparseMatrix> {
    debug_assert_eq!(fine_mesh.level, coarse_mesh.level + 1);
    let mut triplets = Vec::with_capacity(2 * fine.n_dofs);
    let mut parent_weight = |fv: usize, cv: usize, w: f64, row: usize| -> Result<()> {
        match coarse.dof[cv] {
            Some(c) => {
                triplets.push((row, c, w));
                Ok(())
            }
            None if coarse.zero_trace && coarse_mesh.boundary_vertex[cv] => Ok(()),
            None => Err(Error::NestingViolation {
                coarse: cv,
                fine: fv,
                detail: "coarse parent vertex carries no DOF".into(),
            }),
        }
    };
    for (row, &fv) in fine.vertex_of_dof.iter().enumerate() {
        match fine_mesh.parent_vertex[fv] {
            VertexParent::Coarse(cv) => parent_weight(fv, cv, 1.0, row)?,
            VertexParent::Edge(a, b) => {
                parent_weight(fv, a, 0.5, row)?;
                parent_weight(fv, b, 0.5, row)?;
            }
        }
    }
    Ok(SparseMatrix::from_triplets(
        fine.n_dofs,
        coarse.n_dofs,
        triplets,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_box(dim: usize, n0: usize) -> MeshLevel {
        build_initial_mesh(dim, n0, 0.0, 2.0).unwrap()
    }

    fn total_volume(mesh: &MeshLevel) -> f64 {
        (0..mesh.n_simplices())
            .map(|e| {
                let p = mesh.simplex_points(e);
                geom::measure(mesh.dim, &p[..mesh.dim + 1])
            })
            .sum()
    }

    #[test]
    fn initial_mesh_counts_and_volume_2d() {
        let mesh = unit_box(2, 4);
        assert_eq!(mesh.n_vertices(), 25);
        assert_eq!(mesh.n_simplices(), 32);
        assert!((total_volume(&mesh) - 4.0).abs() < 1e-12 * 4.0);
        assert!((mesh.h - 0.5 * 2.0f64.sqrt()).abs() < 1e-14);
        for e in 0..mesh.n_simplices() {
            let p = mesh.simplex_points(e);
            assert!(geom::signed_measure(2, &p[..3]) > 0.0);
        }
    }

    #[test]
    fn initial_mesh_counts_and_volume_3d() {
        let mesh = unit_box(3, 4);
        assert_eq!(mesh.n_vertices(), 125);
        assert_eq!(mesh.n_simplices(), 384);
        assert!((total_volume(&mesh) - 8.0).abs() < 1e-12 * 8.0);
        for e in 0..mesh.n_simplices() {
            let p = mesh.simplex_points(e);
            assert!(geom::signed_measure(3, &p[..4]) > 0.0);
        }
    }

    #[test]
    fn initial_mesh_rejects_bad_parameters() {
        assert!(matches!(
            build_initial_mesh(4, 4, 0.0, 2.0),
            Err(Error::BadDimension(4))
        ));
        assert!(matches!(
            build_initial_mesh(2, 1, 0.0, 2.0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn face_topology_2d() {
        let mesh = unit_box(2, 4);
        // Euler: V - E + F = 1 for a triangulated disc -> E = 25 + 32 - 1.
        assert_eq!(mesh.n_faces(), 56);
        let boundary = mesh.face_owners.iter().filter(|o| o.1.is_none()).count();
        assert_eq!(boundary, 16);
        let n_boundary_vertices = mesh.boundary_vertex.iter().filter(|&&b| b).count();
        assert_eq!(n_boundary_vertices, 16);
    }

    #[test]
    fn refinement_counts_halve_h_and_conserve_volume() {
        let coarse = unit_box(2, 4);
        let fine = refine_uniform(&coarse);
        assert_eq!(fine.n_simplices(), 128);
        assert!((fine.h - coarse.h / 2.0).abs() < 1e-13);
        assert!((total_volume(&fine) - 4.0).abs() < 1e-12 * 4.0);

        let coarse3 = unit_box(3, 2);
        let fine3 = refine_uniform(&coarse3);
        assert_eq!(fine3.n_simplices(), 8 * coarse3.n_simplices());
        assert!((fine3.h - coarse3.h / 2.0).abs() < 1e-13);
        assert!((total_volume(&fine3) - 8.0).abs() < 1e-12 * 8.0);
        for e in 0..fine3.n_simplices() {
            let p = fine3.simplex_points(e);
            assert!(geom::signed_measure(3, &p[..4]) > 0.0);
        }
    }

    #[test]
    fn refinement_preserves_coarse_vertices() {
        let coarse = unit_box(3, 2);
        let fine = refine_uniform(&coarse);
        for v in 0..coarse.n_vertices() {
            assert_eq!(fine.vertices[v], coarse.vertices[v]);
            assert_eq!(fine.parent_vertex[v], VertexParent::Coarse(v));
        }
    }

    #[test]
    fn refinement_is_nested() {
        for dim in [2, 3] {
            let coarse = unit_box(dim, 2);
            let fine = refine_uniform(&coarse);
            for e in 0..fine.n_simplices() {
                let parent = fine.parent_simplex[e];
                let pp = coarse.simplex_points(parent);
                for &v in fine.simplex(e) {
                    let lam =
                        geom::barycentric(dim, &pp[..dim + 1], fine.vertices[v]);
                    for &l in &lam[..dim + 1] {
                        assert!(l >= -1e-12, "fine vertex escapes its parent simplex");
                    }
                }
            }
        }
    }

    #[test]
    fn zero_trace_space_skips_boundary() {
        let mesh = unit_box(2, 4);
        let space = StdSpace::zero_trace(&mesh);
        assert_eq!(space.n_dofs, 9); // (5-2)^2 interior grid points
        for v in 0..mesh.n_vertices() {
            assert_eq!(space.dof[v].is_none(), mesh.boundary_vertex[v]);
        }
        let natural = StdSpace::natural(&mesh);
        assert_eq!(natural.n_dofs, 25);
    }

    #[test]
    fn prolongation_reproduces_linears_on_natural_spaces() {
        let coarse = unit_box(2, 4);
        let fine = refine_uniform(&coarse);
        let cs = StdSpace::natural(&coarse);
        let fs = StdSpace::natural(&fine);
        let p = std_prolongation(&coarse, &fine, &cs, &fs).unwrap();
        // Constants.
        let ones = vec![1.0; cs.n_dofs];
        for &v in &p.matvec(&ones) {
            assert!((v - 1.0).abs() < 1e-15);
        }
        // u(x) = x_0: fine coefficients are fine vertex coordinates.
        let ux: Vec<f64> = cs.vertex_of_dof.iter().map(|&v| coarse.vertices[v][0]).collect();
        let fine_vals = p.matvec(&ux);
        for (row, &fv) in fs.vertex_of_dof.iter().enumerate() {
            assert!((fine_vals[row] - fine.vertices[fv][0]).abs() < 1e-14);
        }
    }

    #[test]
    fn prolongation_matches_pointwise_evaluation_oracle() {
        let coarse = unit_box(2, 3);
        let fine = refine_uniform(&coarse);
        let cs = StdSpace::natural(&coarse);
        let fs = StdSpace::natural(&fine);
        let p = std_prolongation(&coarse, &fine, &cs, &fs).unwrap();
        // Deterministic pseudo-random coarse coefficients.
        let coeffs: Vec<f64> = (0..cs.n_dofs).map(|i| ((i * 37 + 11) % 101) as f64 / 101.0).collect();
        let fine_vals = p.matvec(&coeffs);
        for (row, &fv) in fs.vertex_of_dof.iter().enumerate() {
            let x = fine.vertices[fv];
            // Oracle: locate the coarse element and evaluate the P1 function.
            let (e, lam) = coarse.locate(x).expect("fine vertex inside coarse mesh");
            let mut val = 0.0;
            for (k, &cv) in coarse.simplex(e).iter().enumerate() {
                val += lam[k] * coeffs[cs.dof[cv].unwrap()];
            }
            assert!(
                (fine_vals[row] - val).abs() < 1e-13,
                "prolongation disagrees with pointwise evaluation at vertex {fv}"
            );
        }
    }

    #[test]
    fn prolongation_row_structure_zero_trace() {
        let coarse = unit_box(2, 4);
        let fine = refine_uniform(&coarse);
        let cs = StdSpace::zero_trace(&coarse);
        let fs = StdSpace::zero_trace(&fine);
        let p = std_prolongation(&coarse, &fine, &cs, &fs).unwrap();
        assert_eq!(p.n_rows(), fs.n_dofs);
        assert_eq!(p.n_cols(), cs.n_dofs);
        let mut saw_dropped_parent = false;
        for (row, &fv) in fs.vertex_of_dof.iter().enumerate() {
            let (cols, vals) = p.row(row);
            assert!(cols.len() <= 2);
            let sum: f64 = vals.iter().sum();
            // Each interior parent contributes its full weight; strong
            // boundary parents are dropped, shrinking the row sum.
            let expected = match fine.parent_vertex[fv] {
                VertexParent::Coarse(cv) => {
                    assert!(!coarse.boundary_vertex[cv], "interior fine vertex with boundary twin");
                    1.0
                }
                VertexParent::Edge(a, b) => {
                    0.5 * (!coarse.boundary_vertex[a] as u8 + !coarse.boundary_vertex[b] as u8)
                        as f64
                }
            };
            if expected < 1.0 {
                saw_dropped_parent = true;
            }
            assert!((sum - expected).abs() < 1e-15);
        }
        assert!(saw_dropped_parent, "test mesh should exercise boundary-parent drops");
    }

    #[test]
    fn prolongation_flags_escaped_fine_vertices() {
        let coarse = unit_box(2, 4);
        let fine = refine_uniform(&coarse);
        // Coarse space restricted to the left half, fine space covering
        // everything: right-hand fine vertices have no coarse parents.
        let cs = StdSpace::with_filter(&coarse, |v| coarse.vertices[v][0] < 1.0 + 1e-9, false);
        let fs = StdSpace::natural(&fine);
        let err = std_prolongation(&coarse, &fine, &cs, &fs);
        assert!(matches!(err, Err(Error::NestingViolation { .. })));
    }

    #[test]
    fn locate_finds_containing_simplex() {
        let mesh = unit_box(2, 4);
        let (e, lam) = mesh.locate([0.7, 1.3, 0.0]).unwrap();
        let pts = mesh.simplex_points(e);
        let back = geom::scale(pts[0], lam[0]);
        let back = geom::add(back, geom::scale(pts[1], lam[1]));
        let back = geom::add(back, geom::scale(pts[2], lam[2]));
        assert!(geom::dist(back, [0.7, 1.3, 0.0]) < 1e-13);
        assert!(mesh.locate([5.0, 5.0, 0.0]).is_none());
    }

    #[test]
    fn mesh_dump_roundtrips_counts() {
        let mesh = unit_box(2, 2);
        let mut buf = Vec::new();
        mesh.write_plaintext(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let nv = text.lines().filter(|l| l.starts_with("v ")).count();
        let nc = text.lines().filter(|l| l.starts_with("c ")).count();
        assert_eq!(nv, mesh.n_vertices());
        assert_eq!(nc, mesh.n_simplices());
    }
}
