//! P1 Lagrange finite elements on [`Mesh`]: assembly, Dirichlet solves,
//! the discrete inverse Laplacian and vertex-quadrature norms.

mod assembly;
mod field;
mod solver;
mod sparse;

pub use assembly::{assemble_lumped_mass, assemble_stiffness, LumpedMass};
pub use field::{field_norm, norm_of_values, Norm, ScalarField};
pub use solver::{bicgstab, conjugate_gradient, solve_dirichlet_system, SolveStats, RTOL};
pub use sparse::SparseMatrix;

use std::sync::Arc;

use crate::error::Result;
use crate::mesh::Mesh;

/// Discrete `(-Δ)^{-1}` with zero Dirichlet data: `K w = M s` on interior
/// nodes, `w = 0` on the boundary.
///
/// Holds the assembled operators so repeated solves on one mesh skip
/// reassembly.
#[derive(Debug, Clone)]
pub struct PoissonSolver {
    mesh: Arc<Mesh>,
    interior: Vec<usize>,
    reduced_stiffness: SparseMatrix,
    mass: LumpedMass,
}

impl PoissonSolver {
    pub fn new(mesh: Arc<Mesh>) -> Self {
        let stiffness = assemble_stiffness(&mesh);
        let mass = assemble_lumped_mass(&mesh);
        let interior = mesh.interior_nodes();
        let reduced_stiffness = stiffness.principal_submatrix(&interior);
        Self { mesh, interior, reduced_stiffness, mass }
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn mass(&self) -> &LumpedMass {
        &self.mass
    }

    /// Solves for nodal values given a nodal source vector.
    pub fn solve_values(&self, source: &[f64]) -> Result<Vec<f64>> {
        let weights = self.mass.weights();
        let rhs: Vec<f64> = self.interior.iter().map(|&g| weights[g] * source[g]).collect();
        let mut xi = vec![0.0; self.interior.len()];
        if !self.interior.is_empty() {
            conjugate_gradient(&self.reduced_stiffness, &rhs, &mut xi)?;
        }
        let mut w = vec![0.0; self.mesh.node_count()];
        for (&g, v) in self.interior.iter().zip(xi) {
            w[g] = v;
        }
        Ok(w)
    }

    pub fn solve(&self, source: &ScalarField) -> Result<ScalarField> {
        source.check_mesh(&self.mesh)?;
        let w = self.solve_values(source.values())?;
        ScalarField::new(self.mesh.clone(), w)
    }
}

/// `w = (-Δ_h)^{-1} source` with homogeneous Dirichlet data.
pub fn solve_poisson(mesh: &Arc<Mesh>, source: &ScalarField) -> Result<ScalarField> {
    PoissonSolver::new(mesh.clone()).solve(source)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn mesh(n: usize) -> Arc<Mesh> {
        Arc::new(Mesh::unit_square(n).unwrap())
    }

    #[test]
    fn zero_source_gives_zero() {
        let m = mesh(8);
        let w = solve_poisson(&m, &ScalarField::zeros(m.clone())).unwrap();
        assert!(w.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_unknown_hand_solve() {
        // 4 x = 1/4 at the only interior node.
        let m = mesh(2);
        let w = solve_poisson(&m, &ScalarField::constant(m.clone(), 1.0)).unwrap();
        assert!((w.values()[4] - 1.0 / 16.0).abs() < 1e-15);
        for k in m.boundary_nodes() {
            assert_eq!(w.values()[k], 0.0);
        }
    }

    #[test]
    fn matches_dirichlet_system_route() {
        let m = mesh(6);
        let k = assemble_stiffness(&m);
        let mass = assemble_lumped_mass(&m);
        let src = ScalarField::from_fn(m.clone(), |x, y| 1.0 + x * y * y);
        let b: Vec<f64> = src.values().iter().zip(mass.weights()).map(|(s, w)| s * w).collect();
        let via_system = solve_dirichlet_system(&k, &b, &m.boundary_nodes(), &vec![0.0; m.node_count()]).unwrap();
        let via_poisson = solve_poisson(&m, &src).unwrap();
        for (a, b) in via_system.iter().zip(via_poisson.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn eigenfunction_source_is_second_order() {
        let mut errs = Vec::new();
        for n in [8, 16, 32] {
            let m = mesh(n);
            let src = ScalarField::from_fn(m.clone(), |x, y| 2.0 * PI * PI * (PI * x).sin() * (PI * y).sin());
            let exact = ScalarField::from_fn(m.clone(), |x, y| (PI * x).sin() * (PI * y).sin());
            let w = solve_poisson(&m, &src).unwrap();
            let err = w.values().iter().zip(exact.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            errs.push(err);
        }
        for pair in errs.windows(2) {
            assert!((pair[0] / pair[1]).log2() >= 1.8, "{errs:?}");
        }
    }
}
