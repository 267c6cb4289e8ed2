//! The convection nonlinearity f(x, s, xi), its declared hypothesis
//! certificates, sampling-based certificate audits, and the two example
//! nonlinearities
//!
//!   example1: f(s, xi) = -d1 |s|^(q1-2) s + d2 |xi|^(p-1)
//!   example2: f(x, xi) = beta . xi + rho(x)
//!
//! Certificates are declared (by the user or by the example constructors)
//! and audited by seeded Monte-Carlo sampling; a passing audit is evidence,
//! not proof.

use std::sync::Arc;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fem::{DiscreteField, DofMap, Mesh, QuadratureRule};
use crate::orlicz::PhaseExponents;

/// A closed-form scalar function of x, used for rho(x) and custom terms.
#[derive(Clone)]
pub enum ScalarFn {
    Zero,
    Constant(f64),
    Expr(Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for ScalarFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScalarFn::Zero => write!(f, "ScalarFn::Zero"),
            ScalarFn::Constant(c) => write!(f, "ScalarFn::Constant({})", c),
            ScalarFn::Expr(_) => write!(f, "ScalarFn::Expr(..)"),
        }
    }
}

impl ScalarFn {
    pub fn eval(&self, x: [f64; 2]) -> f64 {
        match self {
            ScalarFn::Zero => 0.0,
            ScalarFn::Constant(c) => *c,
            ScalarFn::Expr(f) => f(x),
        }
    }

    /// Compile an expression in variables x, y with meval.
    pub fn parse(text: &str) -> Result<ScalarFn> {
        let expr: meval::Expr = text
            .parse()
            .map_err(|e| Error::Config(format!("cannot parse expression '{}': {}", text, e)))?;
        // probe once so bad variable names fail at parse time
        eval_expr(&expr, &[("x", 0.0), ("y", 0.0)])
            .map_err(|e| Error::Config(format!("cannot evaluate expression '{}': {}", text, e)))?;
        Ok(ScalarFn::Expr(Arc::new(move |x| {
            eval_expr(&expr, &[("x", x[0]), ("y", x[1])]).unwrap_or(f64::NAN)
        })))
    }
}

/// Evaluate a parsed meval expression with the given variable bindings.
/// Builds a fresh context per call, so the expression stays shareable
/// across threads.
pub(crate) fn eval_expr(
    expr: &meval::Expr,
    vars: &[(&str, f64)],
) -> std::result::Result<f64, meval::Error> {
    let mut ctx = meval::Context::new();
    for &(name, value) in vars {
        ctx.var(name, value);
    }
    expr.eval_with_context(ctx)
}

/// The nonlinearity registry. `Expression` takes f(x, y, s, g1, g2) with
/// g = grad u.
#[derive(Clone)]
pub enum Nonlinearity {
    Zero,
    Example1 {
        d1: f64,
        d2: f64,
        q1: f64,
        p: f64,
    },
    Example2 {
        beta: Vec<f64>,
        rho: ScalarFn,
    },
    LinearGradient {
        beta: Vec<f64>,
        rho: ScalarFn,
    },
    Expression(Arc<dyn Fn([f64; 2], f64, [f64; 2]) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Nonlinearity::Zero => write!(f, "Zero"),
            Nonlinearity::Example1 { d1, d2, q1, p } => {
                write!(f, "Example1 {{ d1: {}, d2: {}, q1: {}, p: {} }}", d1, d2, q1, p)
            }
            Nonlinearity::Example2 { beta, .. } => write!(f, "Example2 {{ beta: {:?} }}", beta),
            Nonlinearity::LinearGradient { beta, .. } => {
                write!(f, "LinearGradient {{ beta: {:?} }}", beta)
            }
            Nonlinearity::Expression(_) => write!(f, "Expression(..)"),
        }
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn beta_dot_xi(beta: &[f64], xi: [f64; 2]) -> f64 {
    beta.iter()
        .zip(xi.iter())
        .map(|(b, g)| b * g)
        .sum()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GrowthCertificate {
    pub a1: f64,
    pub a2: f64,
    /// Uniform bound standing in for ||alpha||.
    pub alpha_hat: f64,
    pub q1: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SignCertificate {
    pub b1: f64,
    pub b2: f64,
    /// Uniform bound standing in for omega(x).
    pub omega_hat: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LipschitzCertificate {
    pub c1: f64,
}

#[derive(Debug, Clone)]
pub struct LinearGradientCertificate {
    pub c2: f64,
    pub rho: ScalarFn,
    /// Declared integrability exponent r' of rho, in (1, p*).
    pub r_prime: f64,
}

/// The nonlinearity bundled with its declared certificates.
#[derive(Debug, Clone)]
pub struct ConvectionSpec {
    pub f: Nonlinearity,
    pub growth: Option<GrowthCertificate>,
    pub sign: Option<SignCertificate>,
    pub lipschitz: Option<LipschitzCertificate>,
    pub linear_gradient: Option<LinearGradientCertificate>,
}

impl ConvectionSpec {
    pub fn zero() -> ConvectionSpec {
        ConvectionSpec {
            f: Nonlinearity::Zero,
            growth: Some(GrowthCertificate {
                a1: 0.0,
                a2: 0.0,
                alpha_hat: 0.0,
                q1: 2.0,
            }),
            sign: Some(SignCertificate {
                b1: 0.0,
                b2: 0.0,
                omega_hat: 0.0,
            }),
            lipschitz: Some(LipschitzCertificate { c1: 0.0 }),
            linear_gradient: Some(LinearGradientCertificate {
                c2: 0.0,
                rho: ScalarFn::Zero,
                r_prime: 2.0,
            }),
        }
    }

    /// f(s, xi) = -d1 |s|^(q1-2) s + d2 |xi|^(p-1), with certificates
    /// derived by the Young-inequality split |xi|^(p-1) |s| <=
    /// (p-1)/p |xi|^p + 1/p |s|^p, so b1 = d2 (p-1)/p and b2 = d2 / p and
    /// the existence condition reproduces the bound
    /// d2 < p / (p - 1 + lambda^{-1}).
    pub fn example1(d1: f64, d2: f64, q1: f64, p: f64) -> Result<ConvectionSpec> {
        if d1 < 0.0 || d2 < 0.0 {
            return Err(Error::Config("example1 requires d1, d2 >= 0".into()));
        }
        if q1 <= 1.0 {
            return Err(Error::Config("example1 requires q1 > 1".into()));
        }
        Ok(ConvectionSpec {
            f: Nonlinearity::Example1 { d1, d2, q1, p },
            // |f| <= d1 |s|^(q1-1) + d2 |xi|^(p-1); for q1 >= p the gradient
            // exponent p(q1-1)/q1 >= p-1 dominates beyond |xi| = 1 and the
            // constant d2 absorbs the gap below it.
            growth: Some(GrowthCertificate {
                a1: d2,
                a2: d1,
                alpha_hat: d2,
                q1,
            }),
            sign: Some(SignCertificate {
                b1: d2 * (p - 1.0) / p,
                b2: d2 / p,
                omega_hat: 0.0,
            }),
            // s -> -d1 |s|^(q1-2) s is non-increasing
            lipschitz: Some(LipschitzCertificate { c1: 0.0 }),
            linear_gradient: None,
        })
    }

    /// f(x, xi) = beta . xi + rho(x), with `rho_bound` a uniform bound on
    /// |rho| over the domain. Certificates: c1 = 0, c2 = ||beta||,
    /// b1 = ||beta||^2, b2 = 1/2, omega_hat = rho_bound^2 (Young with
    /// weights 1/2), so the combined admissibility bound is
    /// ||beta||^2 < min{ 1 - lambda^{-1}/2, lambda }.
    pub fn example2(beta: Vec<f64>, rho: ScalarFn, rho_bound: f64) -> Result<ConvectionSpec> {
        if rho_bound < 0.0 {
            return Err(Error::Config("rho_bound must be >= 0".into()));
        }
        let b = norm2(&beta);
        Ok(ConvectionSpec {
            f: Nonlinearity::Example2 {
                beta: beta.clone(),
                rho: rho.clone(),
            },
            growth: Some(GrowthCertificate {
                a1: b,
                a2: 0.0,
                alpha_hat: rho_bound,
                q1: 2.0,
            }),
            sign: Some(SignCertificate {
                b1: b * b,
                b2: 0.5,
                omega_hat: rho_bound * rho_bound,
            }),
            lipschitz: Some(LipschitzCertificate { c1: 0.0 }),
            linear_gradient: Some(LinearGradientCertificate {
                c2: b,
                rho,
                r_prime: 2.0,
            }),
        })
    }

    /// Evaluate f(x, s, xi).
    pub fn evaluate(&self, x: [f64; 2], s: f64, xi: [f64; 2]) -> Result<f64> {
        let v = match &self.f {
            Nonlinearity::Zero => 0.0,
            Nonlinearity::Example1 { d1, d2, q1, p } => {
                let mag = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
                -d1 * s.abs().powf(q1 - 2.0) * s + d2 * mag.powf(p - 1.0)
            }
            Nonlinearity::Example2 { beta, rho }
            | Nonlinearity::LinearGradient { beta, rho } => beta_dot_xi(beta, xi) + rho.eval(x),
            Nonlinearity::Expression(f) => f(x, s, xi),
        };
        if !v.is_finite() {
            return Err(Error::Evaluation(format!(
                "f({:?}, {}, {:?}) = {} is not finite",
                x, s, xi, v
            )));
        }
        Ok(v)
    }
}

/// One Monte-Carlo witness for an audited inequality.
#[derive(Debug, Clone, Serialize)]
pub struct AuditWitness {
    pub x: [f64; 2],
    pub s: f64,
    pub t: f64,
    pub xi: [f64; 2],
    pub margin: f64,
}

/// Per-condition audit outcome. `worst_margin` is the smallest observed
/// slack (bound minus attained value); negative means violated.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionAudit {
    pub checked: usize,
    pub violations: usize,
    pub worst_margin: f64,
    pub witness: Option<AuditWitness>,
}

impl ConditionAudit {
    fn new() -> ConditionAudit {
        ConditionAudit {
            checked: 0,
            violations: 0,
            worst_margin: f64::INFINITY,
            witness: None,
        }
    }

    fn record(&mut self, margin: f64, x: [f64; 2], s: f64, t: f64, xi: [f64; 2]) {
        self.checked += 1;
        if margin < 0.0 {
            self.violations += 1;
        }
        if margin < self.worst_margin {
            self.worst_margin = margin;
            self.witness = Some(AuditWitness { x, s, t, xi, margin });
        }
    }

    pub fn passed(&self) -> bool {
        self.checked > 0 && self.violations == 0
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub growth: Option<ConditionAudit>,
    pub sign: Option<ConditionAudit>,
    pub u1: Option<ConditionAudit>,
    pub u2_bound: Option<ConditionAudit>,
    pub u2_linearity: Option<ConditionAudit>,
    pub samples: usize,
    pub seed: u64,
}

impl AuditReport {
    /// True when every declared certificate audit passed.
    pub fn passed(&self) -> bool {
        [&self.growth, &self.sign, &self.u1, &self.u2_bound, &self.u2_linearity]
            .iter()
            .all(|a| a.as_ref().map_or(true, |c| c.passed()))
    }
}

#[derive(Debug, Clone)]
pub struct AuditOptions {
    pub budget: usize,
    pub seed: u64,
    /// Sampling range for s and each gradient component.
    pub range: f64,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions {
            budget: 100_000,
            seed: 0,
            range: 10.0,
        }
    }
}

/// Audit the declared certificates by sampling (x, s, t, xi, zeta): x over
/// the mesh's quadrature points, scalars and gradients uniform in the
/// configured box. The (U2) linearity is audited as additivity plus
/// homogeneity of xi -> f(x, s, xi) - rho(x).
pub fn audit_certificates(
    spec: &ConvectionSpec,
    exps: &PhaseExponents,
    mesh: &Mesh,
    opts: &AuditOptions,
) -> Result<AuditReport> {
    if opts.budget < 1 {
        return Err(Error::Config("audit budget must be >= 1".into()));
    }
    // collect domain sample points (quadrature points of the mesh)
    let rule = QuadratureRule::default_for(mesh.dim);
    let mut xs = Vec::with_capacity(mesh.n_elements() * rule.points.len());
    for e in 0..mesh.n_elements() {
        for bary in &rule.points {
            xs.push(mesh.point(e, bary));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut growth = spec.growth.map(|_| ConditionAudit::new());
    let mut sign = spec.sign.map(|_| ConditionAudit::new());
    let mut u1 = spec.lipschitz.map(|_| ConditionAudit::new());
    let mut u2_bound = spec.linear_gradient.as_ref().map(|_| ConditionAudit::new());
    let mut u2_linearity = spec.linear_gradient.as_ref().map(|_| ConditionAudit::new());
    let r = opts.range;
    let p = exps.p;
    for _ in 0..opts.budget {
        let x = xs[rng.gen_range(0..xs.len())];
        let s = rng.gen_range(-r..r);
        let t = rng.gen_range(-r..r);
        let mut xi = [rng.gen_range(-r..r), 0.0];
        let mut zeta = [rng.gen_range(-r..r), 0.0];
        if mesh.dim == 2 {
            xi[1] = rng.gen_range(-r..r);
            zeta[1] = rng.gen_range(-r..r);
        }
        let mag = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
        let fv = spec.evaluate(x, s, xi)?;
        if let (Some(cert), Some(audit)) = (spec.growth, growth.as_mut()) {
            let bound = cert.a1 * mag.powf(p * (cert.q1 - 1.0) / cert.q1)
                + cert.a2 * s.abs().powf(cert.q1 - 1.0)
                + cert.alpha_hat;
            audit.record(bound - fv.abs(), x, s, t, xi);
        }
        if let (Some(cert), Some(audit)) = (spec.sign, sign.as_mut()) {
            let bound = cert.b1 * mag.powf(p) + cert.b2 * s.abs().powf(p) + cert.omega_hat;
            audit.record(bound - fv * s, x, s, t, xi);
        }
        if let (Some(cert), Some(audit)) = (spec.lipschitz, u1.as_mut()) {
            let ft = spec.evaluate(x, t, xi)?;
            let lhs = (fv - ft) * (s - t);
            let bound = cert.c1 * (s - t) * (s - t);
            // normalized so the margin scale does not blow up with |s-t|
            let scale = 1.0 + (s - t) * (s - t);
            audit.record((bound - lhs) / scale, x, s, t, xi);
        }
        if let (Some(cert), Some(audit)) = (spec.linear_gradient.as_ref(), u2_bound.as_mut()) {
            let rho = cert.rho.eval(x);
            // relative rounding slack: the bound is attained with equality
            // when xi aligns with the certificate direction
            let scale = 1.0 + cert.c2 * mag;
            audit.record((cert.c2 * mag - (fv - rho).abs()) / scale + 1e-12, x, s, t, xi);
        }
        if let (Some(cert), Some(audit)) = (spec.linear_gradient.as_ref(), u2_linearity.as_mut()) {
            let rho = cert.rho.eval(x);
            let g = |v: [f64; 2]| -> Result<f64> { Ok(spec.evaluate(x, s, v)? - rho) };
            let sum = [xi[0] + zeta[0], xi[1] + zeta[1]];
            let additivity = (g(sum)? - g(xi)? - g(zeta)?).abs();
            let c = 0.5 + rng.gen::<f64>();
            let scaled = [c * xi[0], c * xi[1]];
            let homogeneity = (g(scaled)? - c * g(xi)?).abs();
            let scale = 1.0 + g(xi)?.abs() + g(zeta)?.abs();
            // identity margin: tolerance minus deviation, relative 1e-10
            let dev = additivity.max(homogeneity) / scale;
            audit.record(1e-10 - dev, x, s, t, xi);
        }
    }
    Ok(AuditReport {
        growth,
        sign,
        u1,
        u2_bound,
        u2_linearity,
        samples: opts.budget,
        seed: opts.seed,
    })
}

/// Existence condition (value of b1 + b2 / lambda_{1,p}; passes iff < 1).
#[derive(Debug, Clone, Serialize)]
pub struct ExistenceVerdict {
    pub value: f64,
    pub passes: bool,
}

pub fn check_existence_condition(spec: &ConvectionSpec, lambda_p: f64) -> Result<ExistenceVerdict> {
    if lambda_p <= 0.0 {
        return Err(Error::Config("lambda_{1,p} must be positive".into()));
    }
    let cert = spec
        .sign
        .ok_or_else(|| Error::Config("existence check requires a sign certificate".into()))?;
    let value = cert.b1 + cert.b2 / lambda_p;
    Ok(ExistenceVerdict {
        value,
        passes: value < 1.0,
    })
}

/// Uniqueness condition (value of c1 / lambda_{1,2} + c2 / sqrt(lambda_{1,2});
/// passes iff < 1). `theorem_applies` additionally requires p = 2.
#[derive(Debug, Clone, Serialize)]
pub struct UniquenessVerdict {
    pub value: f64,
    pub passes: bool,
    pub theorem_applies: bool,
}

pub fn check_uniqueness_condition(
    spec: &ConvectionSpec,
    lambda_2: f64,
    exps: &PhaseExponents,
) -> Result<UniquenessVerdict> {
    if lambda_2 <= 0.0 {
        return Err(Error::Config("lambda_{1,2} must be positive".into()));
    }
    let c1 = spec
        .lipschitz
        .ok_or_else(|| Error::Config("uniqueness check requires a Lipschitz certificate".into()))?
        .c1;
    let c2 = spec
        .linear_gradient
        .as_ref()
        .ok_or_else(|| {
            Error::Config("uniqueness check requires a linear-gradient certificate".into())
        })?
        .c2;
    let value = c1 / lambda_2 + c2 / lambda_2.sqrt();
    Ok(UniquenessVerdict {
        value,
        passes: value < 1.0,
        theorem_applies: exps.p == 2.0,
    })
}

/// Combined verdict used in reports: both conditions, evaluated with the
/// discrete eigenvalues and with 5%-deflated ones (the discrete lambda
/// overestimates the continuum value, making lambda^{-1} checks optimistic).
#[derive(Debug, Clone, Serialize)]
pub struct CertificateVerdict {
    pub existence: Option<ExistenceVerdict>,
    pub existence_deflated: Option<ExistenceVerdict>,
    pub uniqueness: Option<UniquenessVerdict>,
    pub uniqueness_deflated: Option<UniquenessVerdict>,
    pub admissible_poincare: bool,
    pub subcritical_range: bool,
    pub uniqueness_case: bool,
}

pub fn certificate_verdict(
    spec: &ConvectionSpec,
    exps: &PhaseExponents,
    lambda_p: f64,
    lambda_2: f64,
) -> CertificateVerdict {
    let deflate = 0.95;
    CertificateVerdict {
        existence: check_existence_condition(spec, lambda_p).ok(),
        existence_deflated: check_existence_condition(spec, deflate * lambda_p).ok(),
        uniqueness: check_uniqueness_condition(spec, lambda_2, exps).ok(),
        uniqueness_deflated: check_uniqueness_condition(spec, deflate * lambda_2, exps).ok(),
        admissible_poincare: exps.admissible_poincare(),
        subcritical_range: exps.subcritical_range(),
        uniqueness_case: exps.uniqueness_case(),
    }
}

/// Load vector load_i = int f(x, u_frozen, grad u_frozen) phi_i dx over
/// free nodes, with (u, grad u) evaluated at the frozen iterate.
pub fn assemble_load(spec: &ConvectionSpec, u_frozen: &DiscreteField) -> Result<Vec<f64>> {
    let mesh = &u_frozen.mesh;
    let dofs = DofMap::new(mesh);
    let rule = QuadratureRule::default_for(mesh.dim);
    let k = mesh.nodes_per_element();
    let mut load = vec![0.0; dofs.n_free()];
    for e in 0..mesh.n_elements() {
        let conn = mesh.element(e);
        let vol = mesh.volume(e);
        let grad = u_frozen.gradient_on_element(e)?;
        for (bary, &w) in rule.points.iter().zip(&rule.weights) {
            let x = mesh.point(e, bary);
            let s = u_frozen.value_at(e, bary);
            let fv = spec.evaluate(x, s, grad).map_err(|err| {
                Error::Evaluation(format!("{} (at quadrature point {:?})", err, x))
            })?;
            for local in 0..k {
                if let Some(free) = dofs.full_to_free[conn[local]] {
                    load[free] += w * vol * fv * bary[local];
                }
            }
        }
    }
    Ok(load)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::BoxDomain;
    use std::f64::consts::PI;

    fn interval(n: usize) -> Arc<Mesh> {
        Arc::new(Mesh::uniform(BoxDomain::unit_interval(), &[n]).unwrap())
    }

    #[test]
    fn example1_direct_evaluation() {
        // d1 = 1, d2 = 0, q1 = 3, s = 2 -> -|2|^1 * 2 = -4
        let spec = ConvectionSpec::example1(1.0, 0.0, 3.0, 2.0).unwrap();
        let v = spec.evaluate([0.5, 0.0], 2.0, [1.0, 0.0]).unwrap();
        assert!((v + 4.0).abs() < 1e-14);
    }

    #[test]
    fn example2_direct_evaluation() {
        // beta = (1, 0), rho = 0, xi = (3, 5) -> 3
        let spec = ConvectionSpec::example2(vec![1.0, 0.0], ScalarFn::Zero, 0.0).unwrap();
        let v = spec.evaluate([0.1, 0.2], -7.0, [3.0, 5.0]).unwrap();
        assert!((v - 3.0).abs() < 1e-14);
    }

    #[test]
    fn zero_spec_evaluates_to_zero() {
        let spec = ConvectionSpec::zero();
        assert_eq!(spec.evaluate([0.3, 0.0], 1.0, [2.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn example1_audit_passes_within_bound() {
        // admissible range: d2 < p / (p - 1 + lambda^{-1}); use lambda = pi^2
        let p = 2.0;
        let lambda = PI * PI;
        let bound = p / (p - 1.0 + 1.0 / lambda);
        let spec = ConvectionSpec::example1(0.5, 0.5 * bound, 3.0, p).unwrap();
        let exps = PhaseExponents::new(p, 3.0, 3).unwrap();
        let mesh = interval(8);
        let opts = AuditOptions {
            budget: 20_000,
            ..Default::default()
        };
        let report = audit_certificates(&spec, &exps, &mesh, &opts).unwrap();
        assert!(report.passed(), "{:#?}", report);
        let verdict = check_existence_condition(&spec, lambda).unwrap();
        assert!(verdict.passes, "value = {}", verdict.value);
    }

    #[test]
    fn existence_boundary_is_exact() {
        // with b1, b2 derived from (d1, d2), d2 at the bound gives value = 1
        let p = 2.0;
        let lambda = PI * PI;
        let bound = p / (p - 1.0 + 1.0 / lambda);
        for (factor, expect_pass) in [(0.99, true), (1.0, false), (1.01, false)] {
            let spec = ConvectionSpec::example1(0.0, factor * bound, 3.0, p).unwrap();
            let v = check_existence_condition(&spec, lambda).unwrap();
            assert_eq!(v.passes, expect_pass, "factor {}: value {}", factor, v.value);
        }
    }

    #[test]
    fn u1_violation_found_by_sampling() {
        // f(s) = s^3 is increasing: (f(s)-f(t))(s-t) grows like |s-t|^2 max(s,t)^2,
        // so any small declared c1 is violated for large samples.
        let spec = ConvectionSpec {
            f: Nonlinearity::Expression(Arc::new(|_x, s, _xi| s * s * s)),
            growth: None,
            sign: None,
            lipschitz: Some(LipschitzCertificate { c1: 1.0 }),
            linear_gradient: None,
        };
        let exps = PhaseExponents::new(2.0, 3.0, 3).unwrap();
        let mesh = interval(4);
        let opts = AuditOptions {
            budget: 10_000,
            ..Default::default()
        };
        let report = audit_certificates(&spec, &exps, &mesh, &opts).unwrap();
        let u1 = report.u1.unwrap();
        assert!(u1.violations > 0);
        let w = u1.witness.unwrap();
        assert!(w.margin < 0.0);
    }

    #[test]
    fn zero_spec_audit_passes() {
        let spec = ConvectionSpec::zero();
        let exps = PhaseExponents::new(2.0, 3.0, 3).unwrap();
        let mesh = interval(4);
        let opts = AuditOptions {
            budget: 1_000,
            ..Default::default()
        };
        let report = audit_certificates(&spec, &exps, &mesh, &opts).unwrap();
        assert!(report.passed());
    }

    #[test]
    fn uniqueness_condition_arithmetic() {
        // c1 = 2, c2 = 0.5, lambda = pi^2 -> 0.2026 + 0.1592 = 0.3618
        let spec = ConvectionSpec {
            f: Nonlinearity::Zero,
            growth: None,
            sign: None,
            lipschitz: Some(LipschitzCertificate { c1: 2.0 }),
            linear_gradient: Some(LinearGradientCertificate {
                c2: 0.5,
                rho: ScalarFn::Zero,
                r_prime: 2.0,
            }),
        };
        let exps = PhaseExponents::new(2.0, 3.0, 4).unwrap();
        let lambda = PI * PI;
        let v = check_uniqueness_condition(&spec, lambda, &exps).unwrap();
        assert!((v.value - (2.0 / lambda + 0.5 / lambda.sqrt())).abs() < 1e-14);
        assert!((v.value - 0.3618).abs() < 1e-3);
        assert!(v.passes);
        assert!(v.theorem_applies);
    }

    #[test]
    fn uniqueness_requires_certificates() {
        let spec = ConvectionSpec {
            f: Nonlinearity::Zero,
            growth: None,
            sign: None,
            lipschitz: None,
            linear_gradient: None,
        };
        let exps = PhaseExponents::new(2.0, 3.0, 4).unwrap();
        assert!(matches!(
            check_uniqueness_condition(&spec, 9.87, &exps),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn example2_admissibility_bound() {
        // ||beta||^2 < min{1 - lambda^{-1}/2, lambda}; for lambda = pi^2
        // the bound is about 0.9493.
        let lambda = PI * PI;
        let bound = (1.0 - 0.5 / lambda).min(lambda);
        assert!((bound - 0.9493).abs() < 1e-4);
        let exps = PhaseExponents::new(2.0, 2.5, 3).unwrap();
        for (sq_frac, expect) in [(0.99, true), (1.01, false)] {
            let beta = vec![(sq_frac * bound).sqrt()];
            let spec = ConvectionSpec::example2(beta, ScalarFn::Zero, 0.0).unwrap();
            let e = check_existence_condition(&spec, lambda).unwrap();
            let u = check_uniqueness_condition(&spec, lambda, &exps).unwrap();
            assert_eq!(e.passes && u.passes, expect, "frac {}", sq_frac);
        }
    }

    #[test]
    fn load_zero_for_zero_f() {
        let mesh = interval(8);
        let u = DiscreteField::from_fn(&mesh, |x| x[0]);
        let load = assemble_load(&ConvectionSpec::zero(), &u).unwrap();
        assert!(load.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn load_constant_f_gives_hat_mass() {
        // f = 1 on a uniform 1D mesh: interior entries are h
        let mesh = interval(8);
        let spec = ConvectionSpec {
            f: Nonlinearity::Expression(Arc::new(|_x, _s, _xi| 1.0)),
            growth: None,
            sign: None,
            lipschitz: None,
            linear_gradient: None,
        };
        let u = DiscreteField::zeros(&mesh);
        let load = assemble_load(&spec, &u).unwrap();
        for &v in &load {
            assert!((v - 1.0 / 8.0).abs() < 1e-13);
        }
    }

    #[test]
    fn load_matches_mass_matrix_oracle() {
        // f = rho(x) = sin(pi x): compare against M * (interpolated rho)
        let mesh = interval(64);
        let spec = ConvectionSpec {
            f: Nonlinearity::Expression(Arc::new(|x, _s, _xi| (PI * x[0]).sin())),
            growth: None,
            sign: None,
            lipschitz: None,
            linear_gradient: None,
        };
        let frozen = DiscreteField::from_fn(&mesh, |x| x[0] * 3.0);
        let load = assemble_load(&spec, &frozen).unwrap();
        let dofs = DofMap::new(&mesh);
        let m = crate::eigen::mass_matrix(&mesh);
        let rho_free: Vec<f64> = dofs
            .free
            .iter()
            .map(|&n| (PI * mesh.nodes[n][0]).sin())
            .collect();
        let oracle = m.matvec(&rho_free);
        for (a, b) in load.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-3, "{} vs {}", a, b);
        }
    }

    #[test]
    fn load_linear_in_f() {
        let mesh = interval(16);
        let f1 = ConvectionSpec {
            f: Nonlinearity::Expression(Arc::new(|x, s, _| x[0] + s)),
            growth: None,
            sign: None,
            lipschitz: None,
            linear_gradient: None,
        };
        let f2 = ConvectionSpec {
            f: Nonlinearity::Expression(Arc::new(|x, _, xi| x[0] * xi[0])),
            growth: None,
            sign: None,
            lipschitz: None,
            linear_gradient: None,
        };
        let sum = ConvectionSpec {
            f: Nonlinearity::Expression(Arc::new(|x, s, xi| x[0] + s + x[0] * xi[0])),
            growth: None,
            sign: None,
            lipschitz: None,
            linear_gradient: None,
        };
        let frozen = DiscreteField::from_fn(&mesh, |x| (x[0] * 5.0).sin());
        let l1 = assemble_load(&f1, &frozen).unwrap();
        let l2 = assemble_load(&f2, &frozen).unwrap();
        let ls = assemble_load(&sum, &frozen).unwrap();
        for i in 0..l1.len() {
            assert!((ls[i] - (l1[i] + l2[i])).abs() < 1e-14);
        }
    }

    #[test]
    fn expression_parsing() {
        let f = ScalarFn::parse("sin(pi * x) + y^2").unwrap();
        assert!((f.eval([0.5, 2.0]) - 5.0).abs() < 1e-12);
        assert!(ScalarFn::parse("sin(").is_err());
    }

    #[test]
    fn monotone_decreasing_for_c1_zero_certified() {
        // example1 with c1 = 0: s -> f(x, s, xi) is non-increasing
        let spec = ConvectionSpec::example1(1.5, 0.3, 3.0, 2.0).unwrap();
        let xi = [0.7, 0.0];
        let mut prev = f64::INFINITY;
        for k in 0..20 {
            let s = -5.0 + k as f64 * 0.5;
            let v = spec.evaluate([0.5, 0.0], s, xi).unwrap();
            assert!(v <= prev + 1e-14);
            prev = v;
        }
    }
}
