//! Musielak-Orlicz machinery for H(x, t) = t^p + mu(x) t^q: the modular,
//! the Luxemburg norm, the weighted seminorm, the critical exponent, and
//! the sandwich-inequality check
//!
//!   min{ ||u||_H^p, ||u||_H^q } <= ||u||_p^p + ||u||_{q,mu}^q
//!                               <= max{ ||u||_H^p, ||u||_H^q }.
//!
//! All integrals go through the shared fem quadrature, so every norm here
//! carries quadrature error and test tolerances account for it.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fem::{integrate, DiscreteField, QuadratureRule};

/// The exponent triple (p, q, N). `1 < p < q` is a hard invariant; the
/// theorem-range conditions are reported as soft flags because desk-scale
/// meshes (d <= 2) often cannot satisfy q < N.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseExponents {
    pub p: f64,
    pub q: f64,
    /// Analytic space dimension used by the theorems (may differ from the
    /// mesh dimension).
    pub n: u32,
}

impl PhaseExponents {
    pub fn new(p: f64, q: f64, n: u32) -> Result<PhaseExponents> {
        if !(p > 1.0 && q > p) {
            return Err(Error::Config(format!(
                "exponents must satisfy 1 < p < q, got p = {}, q = {}",
                p, q
            )));
        }
        if n == 0 {
            return Err(Error::Config("analytic dimension N must be positive".into()));
        }
        Ok(PhaseExponents { p, q, n })
    }

    /// q/p < 1 + 1/N, the condition under which the Poincare-type norm
    /// equivalence on the zero-trace space holds.
    pub fn admissible_poincare(&self) -> bool {
        self.q / self.p < 1.0 + 1.0 / self.n as f64
    }

    /// q < N, part of the theorems' stated range.
    pub fn subcritical_range(&self) -> bool {
        self.q < self.n as f64
    }

    /// p = 2 and q < N, the uniqueness theorem's range.
    pub fn uniqueness_case(&self) -> bool {
        self.p == 2.0 && self.subcritical_range()
    }

    /// Critical exponent p* = Np/(N - p); requires p < N.
    pub fn critical_exponent(&self) -> Result<f64> {
        let n = self.n as f64;
        if self.p >= n {
            return Err(Error::Config(format!(
                "critical exponent undefined: p = {} >= N = {}",
                self.p, n
            )));
        }
        Ok(n * self.p / (n - self.p))
    }
}

/// Discretized weight mu(x) >= 0 with an estimated Lipschitz constant
/// (max over elements of |grad mu_h|; an estimate, not a certificate).
#[derive(Debug, Clone)]
pub struct WeightField {
    pub field: DiscreteField,
    pub lipschitz_estimate: f64,
}

impl WeightField {
    pub fn new(field: DiscreteField) -> Result<WeightField> {
        if let Some(&bad) = field.values.iter().find(|&&v| !(v >= 0.0)) {
            return Err(Error::Config(format!(
                "weight field must be nonnegative, found {}",
                bad
            )));
        }
        let mut lip: f64 = 0.0;
        for e in 0..field.mesh.n_elements() {
            let g = field.gradient_on_element(e)?;
            lip = lip.max((g[0] * g[0] + g[1] * g[1]).sqrt());
        }
        Ok(WeightField {
            field,
            lipschitz_estimate: lip,
        })
    }

    pub fn zero(mesh: &std::sync::Arc<crate::fem::Mesh>) -> WeightField {
        WeightField {
            field: DiscreteField::zeros(mesh),
            lipschitz_estimate: 0.0,
        }
    }

    pub fn constant(mesh: &std::sync::Arc<crate::fem::Mesh>, c: f64) -> Result<WeightField> {
        WeightField::new(DiscreteField::constant(mesh, c))
    }

    pub fn from_fn(
        mesh: &std::sync::Arc<crate::fem::Mesh>,
        f: impl Fn([f64; 2]) -> f64,
    ) -> Result<WeightField> {
        WeightField::new(DiscreteField::from_fn(mesh, f))
    }

    pub fn max_value(&self) -> f64 {
        self.field.values.iter().fold(0.0f64, |m, &v| m.max(v))
    }
}

fn check_same_mesh(u: &DiscreteField, mu: &WeightField) -> Result<()> {
    if !u.same_mesh(&mu.field) {
        return Err(Error::Config(
            "field and weight live on different meshes".into(),
        ));
    }
    Ok(())
}

/// Which pointwise magnitude the modular integrates: |u| or |grad u|.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Value,
    Gradient,
}

fn magnitude(u: &DiscreteField, mode: Mode, e: usize, bary: &[f64; 3]) -> f64 {
    match mode {
        Mode::Value => u.value_at(e, bary).abs(),
        Mode::Gradient => {
            let g = u.gradient_on_element(e).expect("element in range");
            (g[0] * g[0] + g[1] * g[1]).sqrt()
        }
    }
}

fn modular_scaled(
    u: &DiscreteField,
    mu: &WeightField,
    exps: &PhaseExponents,
    mode: Mode,
    rule: &QuadratureRule,
    tau: f64,
) -> Result<f64> {
    let (p, q) = (exps.p, exps.q);
    integrate(&u.mesh, rule, |e, _x, bary| {
        let t = magnitude(u, mode, e, bary) / tau;
        let w = mu.field.value_at(e, bary).max(0.0);
        t.powf(p) + w * t.powf(q)
    })
}

/// The modular rho_H(u) = int |u|^p + mu |u|^q dx.
pub fn modular(u: &DiscreteField, mu: &WeightField, exps: &PhaseExponents) -> Result<f64> {
    modular_with_mode(u, mu, exps, Mode::Value)
}

pub fn modular_with_mode(
    u: &DiscreteField,
    mu: &WeightField,
    exps: &PhaseExponents,
    mode: Mode,
) -> Result<f64> {
    check_same_mesh(u, mu)?;
    let rule = QuadratureRule::default_for(u.mesh.dim);
    modular_scaled(u, mu, exps, mode, &rule, 1.0)
}

/// Luxemburg norm inf{ tau > 0 : rho_H(u/tau) <= 1 }, computed as the root
/// of rho_H(u/tau) = 1 by bracketing and bisection. The modular is strictly
/// decreasing in tau for u != 0, so bisection is unconditionally safe.
pub fn luxemburg_norm(u: &DiscreteField, mu: &WeightField, exps: &PhaseExponents) -> Result<f64> {
    luxemburg_norm_with_mode(u, mu, exps, Mode::Value)
}

/// Gradient-mode Luxemburg norm, i.e. ||u||_{1,H,0} = || |grad u| ||_H.
pub fn luxemburg_norm_gradient(
    u: &DiscreteField,
    mu: &WeightField,
    exps: &PhaseExponents,
) -> Result<f64> {
    luxemburg_norm_with_mode(u, mu, exps, Mode::Gradient)
}

pub fn luxemburg_norm_with_mode(
    u: &DiscreteField,
    mu: &WeightField,
    exps: &PhaseExponents,
    mode: Mode,
) -> Result<f64> {
    check_same_mesh(u, mu)?;
    let rule = QuadratureRule::default_for(u.mesh.dim);
    if modular_scaled(u, mu, exps, mode, &rule, 1.0)? == 0.0 {
        return Ok(0.0);
    }
    // L^p-based initial guess, then bracket by doubling/halving.
    let guess = lp_norm_with_mode(u, exps.p, mode)?.max(f64::MIN_POSITIVE);
    let mut lo = guess;
    let mut hi = guess;
    while modular_scaled(u, mu, exps, mode, &rule, lo)? < 1.0 {
        lo *= 0.5;
        if lo < 1e-300 {
            return Ok(0.0);
        }
    }
    while modular_scaled(u, mu, exps, mode, &rule, hi)? > 1.0 {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::Numerical("Luxemburg bracketing overflow".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo) <= 1e-12 * mid {
            return Ok(mid);
        }
        if modular_scaled(u, mu, exps, mode, &rule, mid)? > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Numerical(
        "Luxemburg bisection did not converge within 200 iterations".into(),
    ))
}

/// Weighted seminorm ||u||_{q,mu} = (int mu |u|^q dx)^{1/q}.
pub fn weighted_seminorm(u: &DiscreteField, mu: &WeightField, q: f64) -> Result<f64> {
    weighted_seminorm_with_mode(u, mu, q, Mode::Value)
}

pub fn weighted_seminorm_with_mode(
    u: &DiscreteField,
    mu: &WeightField,
    q: f64,
    mode: Mode,
) -> Result<f64> {
    check_same_mesh(u, mu)?;
    if q <= 1.0 {
        return Err(Error::Config(format!("seminorm exponent must be > 1, got {}", q)));
    }
    let rule = QuadratureRule::default_for(u.mesh.dim);
    let m = integrate(&u.mesh, &rule, |e, _x, bary| {
        mu.field.value_at(e, bary).max(0.0) * magnitude(u, mode, e, bary).powf(q)
    })?;
    Ok(m.powf(1.0 / q))
}

/// L^r norm of the nodal values, (int |u|^r dx)^{1/r}.
pub fn lp_norm(u: &DiscreteField, r: f64) -> Result<f64> {
    lp_norm_with_mode(u, r, Mode::Value)
}

/// L^r norm of the gradient magnitude, (int |grad u|^r dx)^{1/r}.
pub fn lp_norm_gradient(u: &DiscreteField, r: f64) -> Result<f64> {
    lp_norm_with_mode(u, r, Mode::Gradient)
}

pub fn lp_norm_with_mode(u: &DiscreteField, r: f64, mode: Mode) -> Result<f64> {
    if r < 1.0 {
        return Err(Error::Config(format!("L^r norm requires r >= 1, got {}", r)));
    }
    let rule = QuadratureRule::default_for(u.mesh.dim);
    let m = integrate(&u.mesh, &rule, |e, _x, bary| {
        magnitude(u, mode, e, bary).powf(r)
    })?;
    Ok(m.powf(1.0 / r))
}

pub fn critical_exponent(exps: &PhaseExponents) -> Result<f64> {
    exps.critical_exponent()
}

#[derive(Debug, Clone, Serialize)]
pub struct SandwichReport {
    /// min{ ||u||_H^p, ||u||_H^q }
    pub lhs: f64,
    /// ||u||_p^p + ||u||_{q,mu}^q
    pub mid: f64,
    /// max{ ||u||_H^p, ||u||_H^q }
    pub rhs: f64,
    pub holds: bool,
}

/// Check the sandwich inequality chain. Relative slack 1e-10; a violation
/// is reported rather than thrown (it would indicate an implementation bug).
pub fn check_sandwich(
    u: &DiscreteField,
    mu: &WeightField,
    exps: &PhaseExponents,
    mode: Mode,
) -> Result<SandwichReport> {
    let norm = luxemburg_norm_with_mode(u, mu, exps, mode)?;
    let lp = lp_norm_with_mode(u, exps.p, mode)?;
    let semi = weighted_seminorm_with_mode(u, mu, exps.q, mode)?;
    let lhs = norm.powf(exps.p).min(norm.powf(exps.q));
    let rhs = norm.powf(exps.p).max(norm.powf(exps.q));
    let mid = lp.powf(exps.p) + semi.powf(exps.q);
    let slack = 1e-10 * (1.0 + lhs.abs() + mid.abs() + rhs.abs());
    let holds = lhs <= mid + slack && mid <= rhs + slack;
    Ok(SandwichReport {
        lhs,
        mid,
        rhs,
        holds,
    })
}
