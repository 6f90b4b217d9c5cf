//! Level-set interface geometry on simplicial meshes: classification of
//! elements against the piecewise linear interpolant of the level set,
//! sub-simplex decomposition of cut elements, extended subdomains, and the
//! ghost face sets used for gradient-jump stabilization.

use crate::error::{Error, Result};
use crate::geom::{self, Point};
use crate::mesh::{self, MeshLevel};
use crate::par;

/// Relative threshold for the nodal zero-crossing perturbation: values with
/// |φ(v)| < δ·h·sup|∇φ| are pushed to the inside (negative) by that margin,
/// so the discrete interface never passes exactly through a vertex.
pub const PERTURB_DELTA: f64 = 1e-10;

/// Analytic level set describing the interface Γ = {φ = 0}; the subdomain
/// Ω₁ is the region φ < 0.
#[derive(Debug, Clone, Copy)]
pub enum LevelSet {
    /// φ(x) = x₀ − x_Γ: a plane (line in 2D) orthogonal to the first axis.
    Planar { x_gamma: f64 },
    /// φ(x) = ‖x − m‖² − r²: sphere of radius r centered at m (interior
    /// negative).
    Spherical { center: Point, radius: f64 },
}

impl LevelSet {
    pub fn eval(&self, x: Point) -> f64 {
        match *self {
            LevelSet::Planar { x_gamma } => x[0] - x_gamma,
            LevelSet::Spherical { center, radius } => {
                let d = geom::sub(x, center);
                geom::dot(d, d) - radius * radius
            }
        }
    }

    /// Euclidean distance from `x` to the zero set (exact for both kinds).
    pub fn distance_to_zero(&self, x: Point) -> f64 {
        match *self {
            LevelSet::Planar { x_gamma } => (x[0] - x_gamma).abs(),
            LevelSet::Spherical { center, radius } => {
                (geom::dist(x, center) - radius).abs()
            }
        }
    }

    /// Upper bound for sup |∇φ| over the mesh (attained at a vertex for both
    /// kinds, since |∇φ| is constant or convex).
    pub fn grad_sup(&self, mesh: &MeshLevel) -> f64 {
        match *self {
            LevelSet::Planar { .. } => 1.0,
            LevelSet::Spherical { center, .. } => {
                let far = mesh
                    .vertices
                    .iter()
                    .map(|&v| geom::dist(v, center))
                    .fold(0.0f64, f64::max);
                2.0 * far
            }
        }
    }
}

/// Sign classification of a simplex against the nodal level set values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementClass {
    /// Entirely in Ω_{ℓ,1} (all nodal values negative).
    Neg,
    /// Entirely in Ω_{ℓ,2} (all nodal values positive).
    Pos,
    Cut,
}

/// One triangulated piece of the discrete interface inside a cut element:
/// a segment in 2D (third point unused), a triangle in 3D. Quadrilateral
/// intersections are pre-split into two triangles.
#[derive(Debug, Clone)]
pub struct InterfaceFacet {
    pub points: [Point; 3],
    /// Unit normal along +∇(I_ℓφ): points from the φ<0 side into the φ>0
    /// side.
    pub normal: Point,
}

/// Geometry attached to one cut element.
#[derive(Debug, Clone)]
pub struct CutData {
    pub element: usize,
    pub facets: Vec<InterfaceFacet>,
    /// Sub-simplices tiling T ∩ Ω_{ℓ,i} for i = 0, 1; each entry holds
    /// dim+1 meaningful points.
    pub parts: [Vec<[Point; 4]>; 2],
    /// Volume fractions κ_i = |T_i| / |T|.
    pub kappa: [f64; 2],
}

/// Classification and cut geometry of one mesh level, together with the
/// extended subdomains and their ghost face sets.
#[derive(Debug, Clone)]
pub struct CutTopology {
    pub dim: usize,
    /// Perturbed nodal values of I_ℓφ (never exactly zero).
    pub nodal_phi: Vec<f64>,
    pub classes: Vec<ElementClass>,
    pub cut_data: Vec<CutData>,
    /// Element -> index into `cut_data` for cut elements.
    pub cut_index: Vec<Option<usize>>,
    /// Membership flags of the extended element sets: side i covers every
    /// element intersecting Ω_{ℓ,i} (class i plus all cut elements).
    pub extended_elems: [Vec<bool>; 2],
    /// Face ids of the gradient-jump stabilization set per side: faces of
    /// cut elements interior to the extended domain of that side.
    pub ghost_faces: [Vec<usize>; 2],
}

impl CutTopology {
    pub fn n_cut(&self) -> usize {
        self.cut_data.len()
    }

    /// Side of a vertex under the discrete interface: 0 for φ < 0, 1 else.
    pub fn vertex_side(&self, v: usize) -> usize {
        usize::from(self.nodal_phi[v] >= 0.0)
    }

    /// Total (d-1)-measure of the discrete interface.
    pub fn interface_measure(&self) -> f64 {
        self.cut_data
            .iter()
            .flat_map(|cd| cd.facets.iter())
            .map(|f| geom::facet_measure(self.dim, &f.points[..self.dim]))
            .sum()
    }
}

/// Nodal interpolation of the level set with the zero-crossing perturbation
/// applied: values too close to zero are replaced by a small negative
/// margin, so the zero set of I_ℓφ never coincides with mesh vertices
/// (and hence never with sub-simplices of the mesh).
pub fn interpolate_levelset(phi: &LevelSet, mesh: &MeshLevel) -> Vec<f64> {
    let eps = PERTURB_DELTA * mesh.h * phi.grad_sup(mesh);
    mesh.vertices
        .iter()
        .map(|&v| {
            let val = phi.eval(v);
            if val.abs() < eps {
                -eps
            } else {
                val
            }
        })
        .collect()
}

/// Zero crossing on the segment from `a` (value `va`) to `b` (value `vb`);
/// the values must have opposite signs.
fn crossing(a: Point, va: f64, b: Point, vb: f64) -> Point {
    debug_assert!(va * vb < 0.0);
    let t = va / (va - vb);
    geom::add(a, geom::scale(geom::sub(b, a), t))
}

/// Per-element classification output before global assembly into a topology.
enum LocalCut {
    Plain(ElementClass),
    Cut(Box<CutData>),
}

fn classify_element(mesh: &MeshLevel, nodal_phi: &[f64], e: usize) -> Result<LocalCut> {
    let dim = mesh.dim;
    let verts = mesh.simplex(e);
    let pts = mesh.simplex_points(e);
    let mut vals = [0.0f64; 4];
    for (slot, &v) in vals.iter_mut().zip(verts) {
        *slot = nodal_phi[v];
        debug_assert!(*slot != 0.0, "nodal level set value must be perturbed away from zero");
    }
    let neg: Vec<usize> = (0..=dim).filter(|&k| vals[k] < 0.0).collect();
    if neg.len() == dim + 1 {
        return Ok(LocalCut::Plain(ElementClass::Neg));
    }
    if neg.is_empty() {
        return Ok(LocalCut::Plain(ElementClass::Pos));
    }
    let pos: Vec<usize> = (0..=dim).filter(|&k| vals[k] > 0.0).collect();

    let cross = |a: usize, b: usize| crossing(pts[a], vals[a], pts[b], vals[b]);
    let pad3 = |p: [Point; 3]| [p[0], p[1], p[2], [0.0; 3]];

    let mut parts: [Vec<[Point; 4]>; 2] = [Vec::new(), Vec::new()];
    let mut facet_points: Vec<[Point; 3]> = Vec::new();
    if dim == 2 {
        // One vertex is alone on its side; the opposite side is a
        // quadrilateral split into two triangles.
        let (lone, other_side) = if neg.len() == 1 {
            (neg[0], &pos)
        } else {
            (pos[0], &neg)
        };
        let (o1, o2) = (other_side[0], other_side[1]);
        let p1 = cross(lone, o1);
        let p2 = cross(lone, o2);
        let lone_side = usize::from(vals[lone] >= 0.0);
        parts[lone_side].push(pad3([pts[lone], p1, p2]));
        parts[1 - lone_side].push(pad3([p1, pts[o1], pts[o2]]));
        parts[1 - lone_side].push(pad3([p1, pts[o2], p2]));
        facet_points.push([p1, p2, [0.0; 3]]);
    } else if neg.len() == 1 || pos.len() == 1 {
        // 1-vs-3 split: a corner tetrahedron against a prism (3 tets).
        let (lone, o) = if neg.len() == 1 {
            (neg[0], [pos[0], pos[1], pos[2]])
        } else {
            (pos[0], [neg[0], neg[1], neg[2]])
        };
        let p1 = cross(lone, o[0]);
        let p2 = cross(lone, o[1]);
        let p3 = cross(lone, o[2]);
        let lone_side = usize::from(vals[lone] >= 0.0);
        parts[lone_side].push([pts[lone], p1, p2, p3]);
        parts[1 - lone_side].push([pts[o[0]], p1, p2, p3]);
        parts[1 - lone_side].push([pts[o[0]], pts[o[1]], pts[o[2]], p3]);
        parts[1 - lone_side].push([pts[o[0]], pts[o[1]], p3, p2]);
        facet_points.push([p1, p2, p3]);
    } else {
        // 2-vs-2 split: planar quadrilateral interface; each side is a wedge
        // coned into 3 tets from one of its tetrahedron vertices.
        let (a0, a1) = (neg[0], neg[1]);
        let (b0, b1) = (pos[0], pos[1]);
        let p00 = cross(a0, b0);
        let p01 = cross(a0, b1);
        let p10 = cross(a1, b0);
        let p11 = cross(a1, b1);
        parts[0].push([pts[a0], p00, p01, p11]);
        parts[0].push([pts[a0], p00, p11, p10]);
        parts[0].push([pts[a0], p10, p11, pts[a1]]);
        parts[1].push([pts[b0], p00, p01, p11]);
        parts[1].push([pts[b0], p00, p11, p10]);
        parts[1].push([pts[b0], pts[b1], p01, p11]);
        facet_points.push([p00, p01, p11]);
        facet_points.push([p00, p11, p10]);
    }

    let total = geom::measure(dim, &pts[..dim + 1]);
    let mut side_vol = [0.0f64; 2];
    for side in 0..2 {
        for part in &parts[side] {
            let vol = geom::measure(dim, &part[..dim + 1]);
            if vol < 1e-14 * total {
                return Err(Error::DegenerateCut {
                    element: e,
                    detail: format!("sub-simplex volume {vol:.3e} below 1e-14 of |T| = {total:.3e}"),
                });
            }
            side_vol[side] += vol;
        }
    }

    // The interpolant is linear on the element, so the interface normal is
    // the normalized element gradient of I_ℓφ (pointing towards φ > 0).
    let grads = geom::shape_gradients(dim, &pts);
    let mut grad = [0.0; 3];
    for k in 0..=dim {
        grad = geom::add(grad, geom::scale(grads[k], vals[k]));
    }
    let normal = geom::scale(grad, 1.0 / geom::norm(grad));
    let facets = facet_points
        .into_iter()
        .map(|points| InterfaceFacet { points, normal })
        .collect();

    Ok(LocalCut::Cut(Box::new(CutData {
        element: e,
        facets,
        parts,
        kappa: [side_vol[0] / total, side_vol[1] / total],
    })))
}

/// Classify every element of the mesh against perturbed nodal level set
/// values and compute the cut geometry of the interface elements.
/// Element-parallel; the result is independent of scheduling.
pub fn classify_and_cut(mesh: &MeshLevel, nodal_phi: &[f64]) -> Result<CutTopology> {
    debug_assert_eq!(nodal_phi.len(), mesh.n_vertices());
    let locals: Vec<Result<LocalCut>> =
        par::map_indexed(mesh.n_simplices(), |e| classify_element(mesh, nodal_phi, e));
    let mut classes = Vec::with_capacity(locals.len());
    let mut cut_data = Vec::new();
    let mut cut_index = vec![None; locals.len()];
    for (e, local) in locals.into_iter().enumerate() {
        match local? {
            LocalCut::Plain(class) => classes.push(class),
            LocalCut::Cut(data) => {
                classes.push(ElementClass::Cut);
                cut_index[e] = Some(cut_data.len());
                cut_data.push(*data);
            }
        }
    }
    let mut topo = CutTopology {
        dim: mesh.dim,
        nodal_phi: nodal_phi.to_vec(),
        classes,
        cut_data,
        cut_index,
        extended_elems: [Vec::new(), Vec::new()],
        ghost_faces: [Vec::new(), Vec::new()],
    };
    build_extended_and_ghost(mesh, &mut topo);
    Ok(topo)
}

/// Fill in the extended element sets Ω^e_{ℓ,i} (all elements meeting side i)
/// and the ghost face sets (faces of cut elements interior to the extended
/// domain of the side).
fn build_extended_and_ghost(mesh: &MeshLevel, topo: &mut CutTopology) {
    let n = topo.classes.len();
    let mut ext = [vec![false; n], vec![false; n]];
    for (e, class) in topo.classes.iter().enumerate() {
        match class {
            ElementClass::Neg => ext[0][e] = true,
            ElementClass::Pos => ext[1][e] = true,
            ElementClass::Cut => {
                ext[0][e] = true;
                ext[1][e] = true;
            }
        }
    }
    let mut ghost = [Vec::new(), Vec::new()];
    for f in 0..mesh.n_faces() {
        let (e1, e2) = mesh.face_owners[f];
        let Some(e2) = e2 else { continue };
        let any_cut = topo.classes[e1] == ElementClass::Cut || topo.classes[e2] == ElementClass::Cut;
        if !any_cut {
            continue;
        }
        for side in 0..2 {
            if ext[side][e1] && ext[side][e2] {
                ghost[side].push(f);
            }
        }
    }
    topo.extended_elems = ext;
    topo.ghost_faces = ghost;
}

/// Build the full cut topology of a level. With `iso_p2` the interface is
/// taken as the zero set of the level set interpolated on the once-refined
/// mesh: every element is processed as its 2^d virtual children and the
/// children's geometry is aggregated back to the parent. Classification of
/// a parent is Cut as soon as its children disagree or any child is cut.
pub fn build_cut_topology(phi: &LevelSet, mesh: &MeshLevel, iso_p2: bool) -> Result<CutTopology> {
    if !iso_p2 {
        let nodal = interpolate_levelset(phi, mesh);
        return classify_and_cut(mesh, &nodal);
    }
    let fine = mesh::refine_uniform(mesh);
    let nodal_fine = interpolate_levelset(phi, &fine);
    let fine_topo = classify_and_cut(&fine, &nodal_fine)?;

    let children_per_parent = 1usize << mesh.dim;
    let n = mesh.n_simplices();
    let mut classes = Vec::with_capacity(n);
    let mut cut_data = Vec::new();
    let mut cut_index = vec![None; n];
    let mut children: Vec<Vec<usize>> = vec![Vec::with_capacity(children_per_parent); n];
    for fe in 0..fine.n_simplices() {
        children[fine.parent_simplex[fe]].push(fe);
    }
    for e in 0..n {
        let kids = &children[e];
        debug_assert_eq!(kids.len(), children_per_parent);
        let all_neg = kids.iter().all(|&fe| fine_topo.classes[fe] == ElementClass::Neg);
        let all_pos = kids.iter().all(|&fe| fine_topo.classes[fe] == ElementClass::Pos);
        if all_neg {
            classes.push(ElementClass::Neg);
            continue;
        }
        if all_pos {
            classes.push(ElementClass::Pos);
            continue;
        }
        classes.push(ElementClass::Cut);
        let mut facets = Vec::new();
        let mut parts: [Vec<[Point; 4]>; 2] = [Vec::new(), Vec::new()];
        let mut side_vol = [0.0f64; 2];
        for &fe in kids {
            match fine_topo.classes[fe] {
                ElementClass::Neg | ElementClass::Pos => {
                    let side = usize::from(fine_topo.classes[fe] == ElementClass::Pos);
                    let pts = fine.simplex_points(fe);
                    side_vol[side] += geom::measure(mesh.dim, &pts[..mesh.dim + 1]);
                    parts[side].push(pts);
                }
                ElementClass::Cut => {
                    let cd = &fine_topo.cut_data[fine_topo.cut_index[fe].unwrap()];
                    facets.extend(cd.facets.iter().cloned());
                    for side in 0..2 {
                        for part in &cd.parts[side] {
                            side_vol[side] += geom::measure(mesh.dim, &part[..mesh.dim + 1]);
                            parts[side].push(*part);
                        }
                    }
                }
            }
        }
        let pts = mesh.simplex_points(e);
        let total = geom::measure(mesh.dim, &pts[..mesh.dim + 1]);
        cut_index[e] = Some(cut_data.len());
        cut_data.push(CutData {
            element: e,
            facets,
            parts,
            kappa: [side_vol[0] / total, side_vol[1] / total],
        });
    }

    // Parent vertices coincide with the leading fine vertices, so the
    // (perturbed) fine values restrict directly.
    let nodal_phi = nodal_fine[..mesh.n_vertices()].to_vec();
    let mut topo = CutTopology {
        dim: mesh.dim,
        nodal_phi,
        classes,
        cut_data,
        cut_index,
        extended_elems: [Vec::new(), Vec::new()],
        ghost_faces: [Vec::new(), Vec::new()],
    };
    build_extended_and_ghost(mesh, &mut topo);
    Ok(topo)
}

/// Per-level distance report from the assumption checks.
#[derive(Debug, Clone)]
pub struct AssumptionReport {
    /// Max sampled distance from the discrete interface to {φ = 0}, per
    /// level (sampled at facet corners and centroids).
    pub gamma_dist: Vec<f64>,
}

/// Verify the hierarchy assumptions: extended domains must nest between
/// consecutive levels (checked element-wise through the parent relation) and
/// no nodal value may vanish. Returns sampled interface-distance data; the
/// distance itself is reported, not enforced.
pub fn check_assumptions(
    phi: &LevelSet,
    meshes: &[MeshLevel],
    topos: &[CutTopology],
) -> Result<AssumptionReport> {
    debug_assert_eq!(meshes.len(), topos.len());
    let mut gamma_dist = Vec::with_capacity(topos.len());
    for (level, (mesh, topo)) in meshes.iter().zip(topos).enumerate() {
        if let Some(v) = topo.nodal_phi.iter().position(|&p| p == 0.0) {
            return Err(Error::Config(format!(
                "level {level}: nodal level set value vanishes at vertex {v} (perturbation missing)"
            )));
        }
        let mut dist: f64 = 0.0;
        for cd in &topo.cut_data {
            for facet in &cd.facets {
                let dim = topo.dim;
                let mut centroid = [0.0; 3];
                for p in &facet.points[..dim] {
                    dist = dist.max(phi.distance_to_zero(*p));
                    centroid = geom::add(centroid, geom::scale(*p, 1.0 / dim as f64));
                }
                dist = dist.max(phi.distance_to_zero(centroid));
            }
        }
        gamma_dist.push(dist);
        if level == 0 {
            continue;
        }
        let coarse = &topos[level - 1];
        for side in 0..2 {
            for e in 0..topo.classes.len() {
                if !topo.extended_elems[side][e] {
                    continue;
                }
                let parent = mesh.parent_simplex[e];
                if !coarse.extended_elems[side][parent] {
                    return Err(Error::NestingViolation {
                        coarse: parent,
                        fine: e,
                        detail: format!(
                            "level {level} extended element (side {side}) has a parent outside the coarse extended set"
                        ),
                    });
                }
            }
        }
    }
    Ok(AssumptionReport { gamma_dist })
}
