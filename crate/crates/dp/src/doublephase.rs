//! The double-phase flux a(x, xi) = |xi|^(p-2) xi + mu(x) |xi|^(q-2) xi,
//! its derivative, and assembly of the residual and Jacobian of the
//! operator on a mesh. mu = 0 gives the p-Laplacian, mu = 1 the
//! (q,p)-Laplacian.
//!
//! Powers of |xi| use the regularized magnitude |xi|_eps = sqrt(|xi|^2 +
//! eps^2); with eps = 0 the flux is unregularized, which is only allowed
//! for p, q >= 2 (otherwise the derivative is singular at xi = 0).

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fem::{DiscreteField, DofMap, QuadratureRule};
use crate::orlicz::{PhaseExponents, WeightField};
use crate::sparse::CsrMatrix;

pub const DEFAULT_EPSILON: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct FluxParams {
    pub exps: PhaseExponents,
    pub weight: WeightField,
    pub epsilon: f64,
}

impl FluxParams {
    pub fn new(exps: PhaseExponents, weight: WeightField, epsilon: f64) -> Result<FluxParams> {
        if epsilon < 0.0 {
            return Err(Error::Config(format!("epsilon must be >= 0, got {}", epsilon)));
        }
        if epsilon == 0.0 && (exps.p < 2.0 || exps.q < 2.0) {
            return Err(Error::Config(format!(
                "epsilon = 0 requires p >= 2 and q >= 2 (got p = {}, q = {})",
                exps.p, exps.q
            )));
        }
        Ok(FluxParams {
            exps,
            weight,
            epsilon,
        })
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<FluxParams> {
        FluxParams::new(self.exps, self.weight.clone(), epsilon)
    }

    fn mag_eps(&self, xi: &[f64; 2]) -> f64 {
        (xi[0] * xi[0] + xi[1] * xi[1] + self.epsilon * self.epsilon).sqrt()
    }
}

/// a(xi) = (|xi|_eps^(p-2) + mu |xi|_eps^(q-2)) xi.
pub fn flux(xi: [f64; 2], mu: f64, params: &FluxParams) -> [f64; 2] {
    let m = params.mag_eps(&xi);
    if m == 0.0 {
        // only reachable with eps = 0, where p, q >= 2 make the flux vanish
        return [0.0, 0.0];
    }
    let c = m.powf(params.exps.p - 2.0) + mu * m.powf(params.exps.q - 2.0);
    [c * xi[0], c * xi[1]]
}

/// Derivative of the flux with respect to xi:
/// |xi|^(p-2) (I + (p-2) xi xi^T / |xi|^2) + mu |xi|^(q-2) (...).
/// Symmetric positive definite for p, q > 1 and |xi|_eps > 0.
pub fn flux_derivative(xi: [f64; 2], mu: f64, params: &FluxParams) -> Result<[[f64; 2]; 2]> {
    let m = params.mag_eps(&xi);
    if m == 0.0 {
        // reachable only with eps = 0, hence p, q >= 2; the derivative has a
        // finite limit there: the identity for an exponent equal to 2, zero
        // for exponents above 2
        let mut d = [[0.0; 2]; 2];
        for (expo, scale) in [(params.exps.p, 1.0), (params.exps.q, mu)] {
            if expo == 2.0 {
                d[0][0] += scale;
                d[1][1] += scale;
            } else if expo < 2.0 {
                return Err(Error::Singular(
                    "flux derivative at xi = 0 with eps = 0".into(),
                ));
            }
        }
        return Ok(d);
    }
    let mut d = [[0.0; 2]; 2];
    for (expo, scale) in [(params.exps.p, 1.0), (params.exps.q, mu)] {
        let c = scale * m.powf(expo - 2.0);
        let t = (expo - 2.0) / (m * m);
        for i in 0..2 {
            for j in 0..2 {
                let id = if i == j { 1.0 } else { 0.0 };
                d[i][j] += c * (id + t * xi[i] * xi[j]);
            }
        }
    }
    Ok(d)
}

struct ElementContribution {
    /// (local index, value) residual entries
    residual: Vec<(usize, f64)>,
}

/// Residual of the discrete operator at u: residual_i = <A(u), phi_i> -
/// rhs_i over free nodes. `rhs` is indexed by free nodes (DofMap order);
/// pass an empty slice for a zero right-hand side.
pub fn assemble_residual(
    u: &DiscreteField,
    rhs: &[f64],
    params: &FluxParams,
) -> Result<Vec<f64>> {
    let mesh = &u.mesh;
    if !u.same_mesh(&params.weight.field) {
        return Err(Error::Config("field and weight on different meshes".into()));
    }
    let dofs = DofMap::new(mesh);
    if !rhs.is_empty() && rhs.len() != dofs.n_free() {
        return Err(Error::Config(format!(
            "rhs has {} entries but there are {} free nodes",
            rhs.len(),
            dofs.n_free()
        )));
    }
    let rule = QuadratureRule::default_for(mesh.dim);
    let k = mesh.nodes_per_element();
    let locals: Vec<ElementContribution> = (0..mesh.n_elements())
        .into_par_iter()
        .map(|e| {
            let grad = u.gradient_on_element(e).expect("element in range");
            let vol = mesh.volume(e);
            let mut entries = vec![0.0; k];
            for (bary, &w) in rule.points.iter().zip(&rule.weights) {
                let mu = params.weight.field.value_at(e, bary).max(0.0);
                let a = flux(grad, mu, params);
                for local in 0..k {
                    let bg = mesh.basis_gradient(e, local);
                    entries[local] += w * vol * (a[0] * bg[0] + a[1] * bg[1]);
                }
            }
            ElementContribution {
                residual: entries.into_iter().enumerate().collect(),
            }
        })
        .collect();
    let mut residual = vec![0.0; dofs.n_free()];
    for (e, contrib) in locals.iter().enumerate() {
        let conn = mesh.element(e);
        for &(local, v) in &contrib.residual {
            if let Some(free) = dofs.full_to_free[conn[local]] {
                residual[free] += v;
            }
        }
    }
    if !rhs.is_empty() {
        for (r, &b) in residual.iter_mut().zip(rhs) {
            *r -= b;
        }
    }
    Ok(residual)
}

/// Jacobian of `assemble_residual` at u, restricted to free nodes.
/// Symmetric (the flux has a potential) and positive definite for eps > 0.
pub fn assemble_jacobian(u: &DiscreteField, params: &FluxParams) -> Result<CsrMatrix> {
    let mesh = &u.mesh;
    let dofs = DofMap::new(mesh);
    let rule = QuadratureRule::default_for(mesh.dim);
    let k = mesh.nodes_per_element();
    let element_matrices: Vec<Result<Vec<f64>>> = (0..mesh.n_elements())
        .into_par_iter()
        .map(|e| {
            let grad = u.gradient_on_element(e)?;
            let vol = mesh.volume(e);
            let mut local = vec![0.0; k * k];
            for (bary, &w) in rule.points.iter().zip(&rule.weights) {
                let mu = params.weight.field.value_at(e, bary).max(0.0);
                let d = flux_derivative(grad, mu, params)?;
                for a in 0..k {
                    let ga = mesh.basis_gradient(e, a);
                    let dga = [
                        d[0][0] * ga[0] + d[0][1] * ga[1],
                        d[1][0] * ga[0] + d[1][1] * ga[1],
                    ];
                    for b in 0..k {
                        let gb = mesh.basis_gradient(e, b);
                        local[a * k + b] += w * vol * (dga[0] * gb[0] + dga[1] * gb[1]);
                    }
                }
            }
            Ok(local)
        })
        .collect();
    let mut triplets = Vec::new();
    for (e, local) in element_matrices.into_iter().enumerate() {
        let local = local?;
        let conn = mesh.element(e);
        for a in 0..k {
            let Some(row) = dofs.full_to_free[conn[a]] else {
                continue;
            };
            for b in 0..k {
                if let Some(col) = dofs.full_to_free[conn[b]] {
                    triplets.push((row, col, local[a * k + b]));
                }
            }
        }
    }
    Ok(CsrMatrix::from_triplets(dofs.n_free(), triplets))
}

/// Scaled Dirichlet energy int (|grad u|_eps^p - eps^p)/p + mu (|grad
/// u|_eps^q - eps^q)/q dx. Its first variation is `assemble_residual(u, [])`;
/// the eps^p shift keeps energy(0) = 0 without changing the variation.
pub fn energy(u: &DiscreteField, params: &FluxParams) -> Result<f64> {
    let rule = QuadratureRule::default_for(u.mesh.dim);
    let (p, q) = (params.exps.p, params.exps.q);
    let eps = params.epsilon;
    crate::fem::integrate(&u.mesh, &rule, |e, _x, bary| {
        let grad = u.gradient_on_element(e).expect("element in range");
        let m = params.mag_eps(&grad);
        let mu = params.weight.field.value_at(e, bary).max(0.0);
        (m.powf(p) - eps.powf(p)) / p + mu * (m.powf(q) - eps.powf(q)) / q
    })
}
