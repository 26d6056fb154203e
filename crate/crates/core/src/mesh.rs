//! Structured triangulation of the unit square.
//!
//! Nodes are numbered row by row: node `(i, j)` (column `i`, row `j`) sits at
//! `(i/n, j/n)` with index `j*(n+1) + i`. Each grid cell is cut along its
//! bottom-left to top-right diagonal.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    n: usize,
    nodes: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary_mask: Vec<bool>,
}

impl Mesh {
    /// Builds the `n × n` grid mesh of `[0,1]²` with `2n²` triangles.
    pub fn unit_square(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidMesh("subdivision count must be at least 1".into()));
        }
        let side = n + 1;
        let h = 1.0 / n as f64;
        let mut nodes = Vec::with_capacity(side * side);
        let mut boundary_mask = Vec::with_capacity(side * side);
        for j in 0..side {
            for i in 0..side {
                // Exact endpoints; i*h can miss 1.0 by an ulp.
                let x = if i == n { 1.0 } else { i as f64 * h };
                let y = if j == n { 1.0 } else { j as f64 * h };
                nodes.push([x, y]);
                boundary_mask.push(i == 0 || j == 0 || i == n || j == n);
            }
        }

        let mut triangles = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let bl = j * side + i;
                let br = bl + 1;
                let tl = bl + side;
                let tr = tl + 1;
                triangles.push([bl, br, tr]);
                triangles.push([bl, tr, tl]);
            }
        }

        Ok(Self { n, nodes, triangles, boundary_mask })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Mesh step `1/n`.
    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_mask(&self) -> &[bool] {
        &self.boundary_mask
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        self.boundary_mask[node]
    }

    /// Interior node indices in ascending order.
    pub fn interior_nodes(&self) -> Vec<usize> {
        (0..self.node_count()).filter(|&k| !self.boundary_mask[k]).collect()
    }

    pub fn boundary_nodes(&self) -> Vec<usize> {
        (0..self.node_count()).filter(|&k| self.boundary_mask[k]).collect()
    }

    /// Index of the grid node at column `i`, row `j`.
    pub fn node_index(&self, i: usize, j: usize) -> usize {
        j * (self.n + 1) + i
    }

    /// Index of the node at the center of the square, when `n` is even.
    pub fn center_node(&self) -> Option<usize> {
        self.n.is_multiple_of(2).then(|| self.node_index(self.n / 2, self.n / 2))
    }

    /// Signed area of triangle `t` (positive for counterclockwise ordering).
    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        let [ax, ay] = self.nodes[a];
        let [bx, by] = self.nodes[b];
        let [cx, cy] = self.nodes[c];
        0.5 * ((bx - ax) * (cy - ay) - (cx - ax) * (by - ay))
    }
}

pub fn build_unit_square_mesh(n: usize) -> Result<Mesh> {
    Mesh::unit_square(n)
}

pub fn interior_nodes(mesh: &Mesh) -> Vec<usize> {
    mesh.interior_nodes()
}
