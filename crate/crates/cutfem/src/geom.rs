//! Small geometric kernels on simplices.
//!
//! Points are stored as `[f64; 3]` with a zero third component in 2D, which
//! keeps the mesh and cut machinery free of dimension generics. The spatial
//! dimension is passed explicitly where it changes the formula.

pub type Point = [f64; 3];

pub fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn scale(a: Point, s: f64) -> Point {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: Point, b: Point) -> Point {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm(a: Point) -> f64 {
    dot(a, a).sqrt()
}

pub fn dist(a: Point, b: Point) -> f64 {
    norm(sub(a, b))
}

pub fn midpoint(a: Point, b: Point) -> Point {
    [
        0.5 * (a[0] + b[0]),
        0.5 * (a[1] + b[1]),
        0.5 * (a[2] + b[2]),
    ]
}

/// Signed measure of a simplex given its `dim + 1` vertices: signed area of a
/// triangle in 2D, signed volume of a tetrahedron in 3D. Positive for
/// positively oriented vertex orderings.
pub fn signed_measure(dim: usize, v: &[Point]) -> f64 {
    match dim {
        2 => {
            let e1 = sub(v[1], v[0]);
            let e2 = sub(v[2], v[0]);
            0.5 * (e1[0] * e2[1] - e1[1] * e2[0])
        }
        3 => {
            let e1 = sub(v[1], v[0]);
            let e2 = sub(v[2], v[0]);
            let e3 = sub(v[3], v[0]);
            dot(e1, cross(e2, e3)) / 6.0
        }
        _ => panic!("unsupported dimension {dim}"),
    }
}

/// Absolute simplex measure.
pub fn measure(dim: usize, v: &[Point]) -> f64 {
    signed_measure(dim, v).abs()
}

/// Measure of a codimension-one facet: segment length in 2D, triangle area
/// in 3D.
pub fn facet_measure(dim: usize, v: &[Point]) -> f64 {
    match dim {
        2 => dist(v[0], v[1]),
        3 => 0.5 * norm(cross(sub(v[1], v[0]), sub(v[2], v[0]))),
        _ => panic!("unsupported dimension {dim}"),
    }
}

/// Largest pairwise vertex distance (diameter for simplices).
pub fn diameter(v: &[Point]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..v.len() {
        for j in (i + 1)..v.len() {
            d = d.max(dist(v[i], v[j]));
        }
    }
    d
}

/// Gradients of the barycentric (P1 shape) functions of a simplex, constant
/// over the simplex. Entry `k` is the gradient of the function that is 1 at
/// vertex `k` and 0 at the others.
pub fn shape_gradients(dim: usize, v: &[Point]) -> [Point; 4] {
    let mut g = [[0.0; 3]; 4];
    match dim {
        2 => {
            // grad lambda_k = rot(opposite edge) / (2 * signed area)
            let twice_area = 2.0 * signed_measure(2, v);
            for k in 0..3 {
                let a = v[(k + 1) % 3];
                let b = v[(k + 2) % 3];
                g[k] = [(a[1] - b[1]) / twice_area, (b[0] - a[0]) / twice_area, 0.0];
            }
        }
        3 => {
            let six_vol = 6.0 * signed_measure(3, v);
            for k in 0..4 {
                // Face opposite vertex k, ordered so its normal points away
                // from v[k] when the tetrahedron is positively oriented.
                let (a, b, c) = (v[(k + 1) % 4], v[(k + 2) % 4], v[(k + 3) % 4]);
                let n = cross(sub(b, a), sub(c, a));
                let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
                g[k] = scale(n, sign / six_vol);
            }
        }
        _ => panic!("unsupported dimension {dim}"),
    }
    g
}

/// Barycentric coordinates of `x` with respect to the simplex `v`.
pub fn barycentric(dim: usize, v: &[Point], x: Point) -> [f64; 4] {
    let g = shape_gradients(dim, v);
    let mut lambda = [0.0; 4];
    for k in 0..=dim {
        lambda[k] = dot(g[k], sub(x, v[k])) + 1.0;
    }
    lambda
}

/// Whether `x` lies in the simplex, up to a barycentric tolerance.
pub fn contains(dim: usize, v: &[Point], x: Point, tol: f64) -> bool {
    barycentric(dim, v, x)[..=dim].iter().all(|&l| l >= -tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    const REF_TRI: [Point; 3] = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
    const REF_TET: [Point; 4] = [
        [0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
    ];

    #[test]
    fn reference_measures() {
        assert_eq!(measure(2, &REF_TRI), 0.5);
        assert!((measure(3, &REF_TET) - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(facet_measure(2, &[[0.0; 3], [3.0, 4.0, 0.0]]), 5.0);
    }

    #[test]
    fn shape_gradients_are_nodal_derivatives() {
        // grad lambda_k dotted with (v_j - v_k) must be the Kronecker
        // difference lambda_k(v_j) - lambda_k(v_k) = -1 for j != k.
        for (dim, verts) in [(2usize, &REF_TRI[..]), (3, &REF_TET[..])] {
            let g = shape_gradients(dim, verts);
            for k in 0..=dim {
                for j in 0..=dim {
                    let d = dot(g[k], sub(verts[j], verts[k]));
                    let expect = if j == k { 0.0 } else { -1.0 };
                    assert!((d - expect).abs() < 1e-12, "dim {dim} k {k} j {j}: {d}");
                }
            }
        }
    }

    #[test]
    fn shape_gradients_sum_to_zero_on_skewed_simplices() {
        let tri = [[0.3, 1.1, 0.0], [2.0, 0.4, 0.0], [1.2, 2.5, 0.0]];
        let g = shape_gradients(2, &tri);
        for c in 0..2 {
            let s: f64 = (0..3).map(|k| g[k][c]).sum();
            assert!(s.abs() < 1e-14);
        }
        let tet = [
            [0.1, 0.2, 0.3],
            [1.3, 0.1, 0.4],
            [0.2, 1.7, 0.2],
            [0.5, 0.4, 1.9],
        ];
        let g = shape_gradients(3, &tet);
        for c in 0..3 {
            let s: f64 = (0..4).map(|k| g[k][c]).sum();
            assert!(s.abs() < 1e-13);
        }
    }

    #[test]
    fn barycentric_roundtrip() {
        let tet = [
            [0.1, 0.2, 0.3],
            [1.3, 0.1, 0.4],
            [0.2, 1.7, 0.2],
            [0.5, 0.4, 1.9],
        ];
        let l = [0.1, 0.2, 0.3, 0.4];
        let mut x = [0.0; 3];
        for k in 0..4 {
            x = add(x, scale(tet[k], l[k]));
        }
        let lb = barycentric(3, &tet, x);
        for k in 0..4 {
            assert!((lb[k] - l[k]).abs() < 1e-12);
        }
        assert!(contains(3, &tet, x, 1e-12));
        assert!(!contains(3, &tet, [5.0, 5.0, 5.0], 1e-12));
    }
}
