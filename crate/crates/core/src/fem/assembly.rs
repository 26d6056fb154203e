use super::sparse::SparseMatrix;
use crate::mesh::Mesh;

/// Vertex-quadrature (lumped) mass: one area weight per node.
#[derive(Debug, Clone, PartialEq)]
pub struct LumpedMass {
    weights: Vec<f64>,
}

impl LumpedMass {
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Gradients of the three barycentric hat functions scaled by `2·area`,
/// plus the area itself.
fn scaled_gradients(mesh: &Mesh, t: usize) -> ([[f64; 2]; 3], f64) {
    let tri = mesh.triangles()[t];
    let p = tri.map(|k| mesh.nodes()[k]);
    let g = std::array::from_fn(|i| {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        [p[j][1] - p[k][1], p[k][0] - p[j][0]]
    });
    (g, mesh.signed_area(t))
}

/// P1 stiffness `K_ij = ∫ ∇φ_i·∇φ_j` over the whole mesh, boundary rows included.
pub fn assemble_stiffness(mesh: &Mesh) -> SparseMatrix {
    let n = mesh.node_count();
    let mut triplets = Vec::with_capacity(9 * mesh.triangles().len());
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let (g, area) = scaled_gradients(mesh, t);
        let scale = 1.0 / (4.0 * area);
        for a in 0..3 {
            for b in 0..3 {
                let v = scale * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
                triplets.push((tri[a], tri[b], v));
            }
        }
    }
    SparseMatrix::from_triplets(n, n, triplets).expect("mesh indices in range")
}

/// `weight_i = (1/3) Σ area(T)` over triangles `T` containing node `i`.
pub fn assemble_lumped_mass(mesh: &Mesh) -> LumpedMass {
    let mut weights = vec![0.0; mesh.node_count()];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let third = mesh.signed_area(t) / 3.0;
        for &k in tri {
            weights[k] += third;
        }
    }
    LumpedMass { weights }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_point_stencil_at_center() {
        let m = Mesh::unit_square(2).unwrap();
        let k = assemble_stiffness(&m);
        let c = 4;
        assert_eq!(k.get(c, c), 4.0);
        for nb in [1, 3, 5, 7] {
            assert_eq!(k.get(c, nb), -1.0);
        }
        for diag in [0, 2, 6, 8] {
            assert_eq!(k.get(c, diag), 0.0);
        }
    }

    #[test]
    fn rows_sum_to_zero_and_symmetric() {
        for n in [1, 2, 5, 10] {
            let m = Mesh::unit_square(n).unwrap();
            let k = assemble_stiffness(&m);
            assert_eq!(k.max_asymmetry(), 0.0);
            for r in 0..k.nrows() {
                let s: f64 = k.row(r).map(|(_, v)| v).sum();
                assert!(s.abs() < 1e-13, "row {r} sums to {s}");
            }
        }
    }

    #[test]
    fn linear_fields_are_in_the_interior_kernel() {
        let m = Mesh::unit_square(7).unwrap();
        let k = assemble_stiffness(&m);
        let v: Vec<f64> = m.nodes().iter().map(|&[x, y]| 0.3 - 1.2 * x + 2.5 * y).collect();
        let kv = k.mul_vec(&v);
        for i in m.interior_nodes() {
            assert!(kv[i].abs() < 1e-12);
        }
    }

    #[test]
    fn lumped_weights_by_hand() {
        let m = Mesh::unit_square(2).unwrap();
        let w = assemble_lumped_mass(&m);
        assert!((w.weights()[4] - 0.25).abs() < 1e-15);
        // Node 0 (bottom-left) and 8 (top-right) touch two triangles,
        // node 2 (bottom-right) and 6 (top-left) touch one.
        assert!((w.weights()[0] - 1.0 / 12.0).abs() < 1e-15);
        assert!((w.weights()[8] - 1.0 / 12.0).abs() < 1e-15);
        assert!((w.weights()[2] - 1.0 / 24.0).abs() < 1e-15);
        assert!((w.weights()[6] - 1.0 / 24.0).abs() < 1e-15);
        assert!((w.total() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn lumped_weights_positive_and_sum_to_one() {
        for n in [1, 3, 16] {
            let m = Mesh::unit_square(n).unwrap();
            let w = assemble_lumped_mass(&m);
            assert!((w.total() - 1.0).abs() < 1e-12);
            assert!(m.interior_nodes().iter().all(|&i| w.weights()[i] > 0.0));
        }
    }
}
