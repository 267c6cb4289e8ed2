//! Piecewise-linear nodal fields and quadrature-based integration.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fem::mesh::Mesh;
use crate::fem::quadrature::QuadratureRule;

/// Nodal coefficients of a P1 function; the Dirichlet mask lives on the mesh.
#[derive(Debug, Clone)]
pub struct DiscreteField {
    pub mesh: Arc<Mesh>,
    pub values: Vec<f64>,
}

impl DiscreteField {
    pub fn zeros(mesh: &Arc<Mesh>) -> DiscreteField {
        DiscreteField {
            mesh: Arc::clone(mesh),
            values: vec![0.0; mesh.n_nodes()],
        }
    }

    pub fn constant(mesh: &Arc<Mesh>, c: f64) -> DiscreteField {
        DiscreteField {
            mesh: Arc::clone(mesh),
            values: vec![c; mesh.n_nodes()],
        }
    }

    /// Nodal interpolant of a pointwise function.
    pub fn from_fn(mesh: &Arc<Mesh>, f: impl Fn([f64; 2]) -> f64) -> DiscreteField {
        let values = mesh.nodes.iter().map(|&x| f(x)).collect();
        DiscreteField {
            mesh: Arc::clone(mesh),
            values,
        }
    }

    pub fn from_values(mesh: &Arc<Mesh>, values: Vec<f64>) -> Result<DiscreteField> {
        if values.len() != mesh.n_nodes() {
            return Err(Error::Config(format!(
                "field has {} coefficients but mesh has {} nodes",
                values.len(),
                mesh.n_nodes()
            )));
        }
        Ok(DiscreteField {
            mesh: Arc::clone(mesh),
            values,
        })
    }

    /// Interpolated value at a barycentric point of an element.
    pub fn value_at(&self, element: usize, bary: &[f64; 3]) -> f64 {
        let conn = self.mesh.element(element);
        conn.iter()
            .enumerate()
            .map(|(local, &node)| bary[local] * self.values[node])
            .sum()
    }

    /// Constant gradient of the interpolant on one element.
    pub fn gradient_on_element(&self, element: usize) -> Result<[f64; 2]> {
        if element >= self.mesh.n_elements() {
            return Err(Error::Logic(format!(
                "element index {} out of range ({} elements)",
                element,
                self.mesh.n_elements()
            )));
        }
        let conn = self.mesh.element(element);
        let mut g = [0.0; 2];
        for (local, &node) in conn.iter().enumerate() {
            let bg = self.mesh.basis_gradient(element, local);
            g[0] += self.values[node] * bg[0];
            g[1] += self.values[node] * bg[1];
        }
        Ok(g)
    }

    /// Zero out coefficients on Dirichlet nodes. Idempotent.
    pub fn apply_dirichlet(&mut self) {
        for &b in &self.mesh.boundary {
            self.values[b] = 0.0;
        }
    }

    /// True when every masked coefficient is exactly zero.
    pub fn satisfies_mask(&self) -> bool {
        self.mesh.boundary.iter().all(|&b| self.values[b] == 0.0)
    }

    pub fn same_mesh(&self, other: &DiscreteField) -> bool {
        Arc::ptr_eq(&self.mesh, &other.mesh)
            || (self.mesh.dim == other.mesh.dim && self.mesh.n_nodes() == other.mesh.n_nodes())
    }
}

/// Integrate a callback over the mesh: `integrand(element, physical point,
/// barycentric point)`. Parallel over elements; the reduction order is the
/// element order, so results are identical across thread counts.
pub fn integrate<F>(mesh: &Mesh, rule: &QuadratureRule, integrand: F) -> Result<f64>
where
    F: Fn(usize, [f64; 2], &[f64; 3]) -> f64 + Sync,
{
    if rule.dim != mesh.dim {
        return Err(Error::Config(format!(
            "quadrature dimension {} does not match mesh dimension {}",
            rule.dim, mesh.dim
        )));
    }
    let locals: Vec<f64> = (0..mesh.n_elements())
        .into_par_iter()
        .map(|e| {
            let vol = mesh.volume(e);
            rule.points
                .iter()
                .zip(&rule.weights)
                .map(|(bary, &w)| w * vol * integrand(e, mesh.point(e, bary), bary))
                .sum()
        })
        .collect();
    Ok(locals.iter().sum())
}
