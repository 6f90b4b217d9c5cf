//! Fixed quadrature rules on reference simplices and facets.
//!
//! Points are stored in barycentric coordinates and weights are normalized to
//! sum to one; physical integrals multiply by the simplex (or facet) measure.
//! Stiffness terms only need degree 2; load and error integrals use degree 4
//! so that squared differences against quadratic reference solutions are
//! integrated exactly.

#[derive(Debug, Clone)]
pub struct QuadratureRule {
    /// Barycentric coordinates; entries beyond `dim + 1` are zero.
    pub points: Vec<[f64; 4]>,
    /// Normalized weights, summing to 1.
    pub weights: Vec<f64>,
    /// Largest polynomial degree integrated exactly.
    pub degree: usize,
}

impl QuadratureRule {
    /// Rule on the reference triangle (dim 2) or tetrahedron (dim 3) exact at
    /// least to the requested degree.
    pub fn volume(dim: usize, degree: usize) -> Self {
        match (dim, degree) {
            (2, d) if d <= 2 => {
                // Edge-midpoint rule, degree 2.
                let h = 0.5;
                QuadratureRule {
                    points: vec![
                        [h, h, 0.0, 0.0],
                        [0.0, h, h, 0.0],
                        [h, 0.0, h, 0.0],
                    ],
                    weights: vec![1.0 / 3.0; 3],
                    degree: 2,
                }
            }
            (2, d) if d <= 4 => {
                // Two-orbit 6-point rule, degree 4.
                let a1 = 0.445948490915965;
                let b1 = 1.0 - 2.0 * a1;
                let w1 = 0.223381589678011;
                let a2 = 0.091576213509771;
                let b2 = 1.0 - 2.0 * a2;
                let w2 = 0.109951743655322;
                let mut points = Vec::new();
                let mut weights = Vec::new();
                for (a, b, w) in [(a1, b1, w1), (a2, b2, w2)] {
                    points.push([b, a, a, 0.0]);
                    points.push([a, b, a, 0.0]);
                    points.push([a, a, b, 0.0]);
                    weights.extend_from_slice(&[w, w, w]);
                }
                QuadratureRule {
                    points,
                    weights,
                    degree: 4,
                }
            }
            (3, d) if d <= 2 => {
                // Four-point rule, degree 2.
                let a = (5.0 + 3.0 * 5.0_f64.sqrt()) / 20.0;
                let b = (5.0 - 5.0_f64.sqrt()) / 20.0;
                let mut points = Vec::new();
                for k in 0..4 {
                    let mut p = [b; 4];
                    p[k] = a;
                    points.push(p);
                }
                QuadratureRule {
                    points,
                    weights: vec![0.25; 4],
                    degree: 2,
                }
            }
            (3, d) if d <= 5 => {
                // Three-orbit 14-point rule, degree 5.
                let mut points = Vec::new();
                let mut weights = Vec::new();
                for (a, w) in [
                    (0.3108859192633005, 0.1126879257180162),
                    (0.0927352503108912, 0.0734930431163619),
                ] {
                    let b = 1.0 - 3.0 * a;
                    for k in 0..4 {
                        let mut p = [a; 4];
                        p[k] = b;
                        points.push(p);
                        weights.push(w);
                    }
                }
                let a = 0.4544962958743506;
                let b = 0.5 - a;
                let w = 0.0425460207770812;
                for (i, j) in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
                    let mut p = [b; 4];
                    p[i] = a;
                    p[j] = a;
                    points.push(p);
                    weights.push(w);
                }
                QuadratureRule {
                    points,
                    weights,
                    degree: 5,
                }
            }
            _ => panic!("no volume rule for dim {dim} degree {degree}"),
        }
    }

    /// Rule on a reference facet: unit segment in 2D (two barycentric
    /// coordinates), reference triangle in 3D (three).
    pub fn facet(dim: usize, degree: usize) -> Self {
        match (dim, degree) {
            (2, d) if d <= 3 => {
                let s = 0.5 / 3.0_f64.sqrt();
                QuadratureRule {
                    points: vec![[0.5 + s, 0.5 - s, 0.0, 0.0], [0.5 - s, 0.5 + s, 0.0, 0.0]],
                    weights: vec![0.5, 0.5],
                    degree: 3,
                }
            }
            (3, d) if d <= 2 => {
                let h = 0.5;
                QuadratureRule {
                    points: vec![
                        [h, h, 0.0, 0.0],
                        [0.0, h, h, 0.0],
                        [h, 0.0, h, 0.0],
                    ],
                    weights: vec![1.0 / 3.0; 3],
                    degree: 2,
                }
            }
            _ => panic!("no facet rule for dim {dim} degree {degree}"),
        }
    }
}
