use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use super::assembly::LumpedMass;
use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// Nodal values of a P1 function.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    mesh: Arc<Mesh>,
    values: Vec<f64>,
}

impl ScalarField {
    /// Wraps nodal values; rejects wrong length and non-finite entries.
    pub fn new(mesh: Arc<Mesh>, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.node_count() {
            return Err(Error::DimensionMismatch { expected: mesh.node_count(), actual: values.len() });
        }
        if let Some(node) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { node });
        }
        Ok(Self { mesh, values })
    }

    pub fn zeros(mesh: Arc<Mesh>) -> Self {
        Self::constant(mesh, 0.0)
    }

    pub fn constant(mesh: Arc<Mesh>, value: f64) -> Self {
        let values = vec![value; mesh.node_count()];
        Self { mesh, values }
    }

    /// Nodal interpolant of `f(x, y)`.
    pub fn from_fn(mesh: Arc<Mesh>, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = mesh.nodes().iter().map(|&[x, y]| f(x, y)).collect();
        Self { mesh, values }
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Same mesh, values mapped nodewise.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { mesh: self.mesh.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        self.map(|v| factor * v)
    }

    pub(crate) fn check_mesh(&self, mesh: &Mesh) -> Result<()> {
        if self.values.len() != mesh.node_count() || (self.mesh.as_ref() != mesh) {
            return Err(Error::DimensionMismatch { expected: mesh.node_count(), actual: self.values.len() });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Norm {
    #[default]
    L1,
    L2,
    Linf,
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Norm::L1 => "l1",
            Norm::L2 => "l2",
            Norm::Linf => "linf",
        })
    }
}

impl FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(Norm::L1),
            "l2" => Ok(Norm::L2),
            "linf" | "inf" | "max" => Ok(Norm::Linf),
            other => Err(Error::Parse(format!("unknown norm '{other}' (expected l1, l2 or linf)"))),
        }
    }
}

/// Vertex-quadrature norm of nodal values.
pub fn norm_of_values(values: &[f64], mass: &LumpedMass, which: Norm) -> f64 {
    let w = mass.weights();
    match which {
        Norm::L1 => values.iter().zip(w).map(|(v, w)| w * v.abs()).sum(),
        Norm::L2 => values.iter().zip(w).map(|(v, w)| w * v * v).sum::<f64>().sqrt(),
        Norm::Linf => values.iter().fold(0.0, |m, v| m.max(v.abs())),
    }
}

pub fn field_norm(field: &ScalarField, mass: &LumpedMass, which: Norm) -> f64 {
    norm_of_values(field.values(), mass, which)
}

#[cfg(test)]
mod tests {
    use super::super::assemble_lumped_mass;
    use super::*;

    #[test]
    fn rejects_bad_values() {
        let m = Arc::new(Mesh::unit_square(1).unwrap());
        assert!(ScalarField::new(m.clone(), vec![0.0; 3]).is_err());
        assert!(matches!(ScalarField::new(m, vec![0.0, f64::NAN, 0.0, 0.0]), Err(Error::NonFinite { node: 1 })));
    }

    #[test]
    fn constant_field_norms() {
        let m = Arc::new(Mesh::unit_square(5).unwrap());
        let mass = assemble_lumped_mass(&m);
        let one = ScalarField::constant(m.clone(), 1.0);
        for norm in [Norm::L1, Norm::L2, Norm::Linf] {
            assert!((field_norm(&one, &mass, norm) - 1.0).abs() < 1e-14);
        }
        let neg = ScalarField::constant(m, -3.0);
        assert!((field_norm(&neg, &mass, Norm::L1) - 3.0).abs() < 1e-13);
        assert_eq!(field_norm(&neg, &mass, Norm::Linf), 3.0);
    }

    #[test]
    fn interior_indicator() {
        let m = Arc::new(Mesh::unit_square(2).unwrap());
        let mass = assemble_lumped_mass(&m);
        let mut v = vec![0.0; 9];
        v[4] = -2.0;
        let f = ScalarField::new(m, v).unwrap();
        assert!((field_norm(&f, &mass, Norm::L1) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn norm_names_round_trip() {
        for n in [Norm::L1, Norm::L2, Norm::Linf] {
            assert_eq!(n.to_string().parse::<Norm>().unwrap(), n);
        }
        assert!("l3".parse::<Norm>().is_err());
    }
}
