//! Reference problems driven through the solver in tests and experiments.
//!
//! All problems prescribe Dirichlet data on the outer box boundary and pose
//! the diffusion interface equation −∇·(μ_i ∇u) = f on the two sides of the
//! level set.

use crate::geom::{self, Point};

/// A right-hand side / boundary-data / reference-solution bundle.
#[derive(Debug, Clone, Copy)]
pub enum TestProblem {
    /// u* = α_i (‖x−m‖² − r²) with α = (μ₂, μ₁): the solution vanishes on
    /// the interface sphere and has continuous normal flux, so it solves the
    /// interface problem with the constant load f = −2·dim·μ₁μ₂ on both
    /// sides and u_D = u*.
    ManufacturedSphere {
        dim: usize,
        center: Point,
        radius: f64,
        mu: [f64; 2],
    },
    /// Smooth separable load f = x·y (2D) or x·y·z (3D) with homogeneous
    /// Dirichlet data; no closed-form solution (used for iteration-count
    /// studies, not error studies).
    Monomial { dim: usize },
    /// Globally linear exact solution u* = offset + g·x with zero load;
    /// with matched diffusion coefficients it lies in every discrete space
    /// (patch test).
    Linear { gradient: Point, offset: f64 },
}

impl TestProblem {
    /// Load term f(x) on the given side.
    pub fn rhs(&self, x: Point, _side: usize) -> f64 {
        match *self {
            TestProblem::ManufacturedSphere { dim, mu, .. } => {
                -2.0 * dim as f64 * mu[0] * mu[1]
            }
            TestProblem::Monomial { dim } => {
                if dim == 2 {
                    x[0] * x[1]
                } else {
                    x[0] * x[1] * x[2]
                }
            }
            TestProblem::Linear { .. } => 0.0,
        }
    }

    /// Dirichlet data on the outer boundary. For the manufactured sphere the
    /// side is resolved by the exact level set sign (the boundary does not
    /// meet the interface in the study configurations).
    pub fn dirichlet(&self, x: Point) -> f64 {
        match *self {
            TestProblem::ManufacturedSphere { center, radius, .. } => {
                let side = usize::from(sphere_phi(x, center, radius) >= 0.0);
                self.exact(x, side).unwrap()
            }
            TestProblem::Monomial { .. } => 0.0,
            TestProblem::Linear { .. } => self.exact(x, 0).unwrap(),
        }
    }

    /// Reference solution, when one exists.
    pub fn exact(&self, x: Point, side: usize) -> Option<f64> {
        match *self {
            TestProblem::ManufacturedSphere {
                center, radius, mu, ..
            } => {
                let alpha = if side == 0 { mu[1] } else { mu[0] };
                Some(alpha * sphere_phi(x, center, radius))
            }
            TestProblem::Monomial { .. } => None,
            TestProblem::Linear { gradient, offset } => Some(offset + geom::dot(gradient, x)),
        }
    }
}

fn sphere_phi(x: Point, center: Point, radius: f64) -> f64 {
    let dx = geom::sub(x, center);
    geom::dot(dx, dx) - radius * radius
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manufactured_solution_solves_the_strong_equations() {
        // Check −∇·(μ∇u*) = f and interface conditions by finite
        // differences of the closed form.
        let p = TestProblem::ManufacturedSphere {
            dim: 2,
            center: [1.03, 1.02, 0.0],
            radius: 0.413,
            mu: [0.5, 2.0],
        };
        let (mu, c, r) = ([0.5, 2.0], [1.03, 1.02, 0.0], 0.413);
        let h = 1e-4;
        for (x, side) in [([1.0, 1.1, 0.0], 0usize), ([0.3, 0.4, 0.0], 1)] {
            // 5-point Laplacian of u* on this side.
            let u = |y: Point| p.exact(y, side).unwrap();
            let lap = (u([x[0] + h, x[1], 0.0])
                + u([x[0] - h, x[1], 0.0])
                + u([x[0], x[1] + h, 0.0])
                + u([x[0], x[1] - h, 0.0])
                - 4.0 * u(x))
                / (h * h);
            let f = p.rhs(x, side);
            assert!(
                (-mu[side] * lap - f).abs() < 1e-5,
                "side {side}: -μΔu = {} vs f = {f}",
                -mu[side] * lap
            );
        }
        // On the interface both sides vanish (continuity) and the radial
        // fluxes match: μ₁ α₁ = μ₂ α₂ = μ₁ μ₂.
        let dir = [0.6, 0.8, 0.0];
        let xg = geom::add(c, geom::scale(dir, r));
        assert!(p.exact(xg, 0).unwrap().abs() < 1e-12);
        assert!(p.exact(xg, 1).unwrap().abs() < 1e-12);
        let radial = |side: usize, t: f64| {
            let y = geom::add(c, geom::scale(dir, r + t));
            p.exact(y, side).unwrap()
        };
        let flux0 = mu[0] * (radial(0, h) - radial(0, -h)) / (2.0 * h);
        let flux1 = mu[1] * (radial(1, h) - radial(1, -h)) / (2.0 * h);
        assert!((flux0 - flux1).abs() < 1e-8, "{flux0} vs {flux1}");
    }

    #[test]
    fn boundary_data_uses_the_exact_side() {
        let p = TestProblem::ManufacturedSphere {
            dim: 2,
            center: [1.03, 1.02, 0.0],
            radius: 0.413,
            mu: [0.5, 2.0],
        };
        // Box corner is outside the sphere: positive side, α = μ₁.
        let x = [0.0, 0.0, 0.0];
        assert_eq!(p.dirichlet(x), p.exact(x, 1).unwrap());
        let lin = TestProblem::Linear {
            gradient: [2.0, -1.0, 0.0],
            offset: 1.0,
        };
        assert_eq!(lin.dirichlet([0.5, 0.25, 0.0]), 1.0 + 1.0 - 0.25);
        assert_eq!(lin.rhs([0.5, 0.25, 0.0], 0), 0.0);
        let mono3 = TestProblem::Monomial { dim: 3 };
        assert_eq!(mono3.rhs([2.0, 3.0, 4.0], 1), 24.0);
        assert!(mono3.exact([0.0; 3], 0).is_none());
    }
}
