//! Frozen-convection Picard outer iteration with a damped-Newton inner
//! solve of the monotone double-phase subproblem, empirical contraction
//! measurement, and the manufactured-solutions harness.
//!
//! The inner subproblem A(u) = load is the first-order condition of the
//! strictly convex merit energy(u) - <load, u>, so Newton with an
//! energy-decrease Armijo line search converges globally. The outer
//! iteration freezes (u, grad u) in the convection term and repeats.

use std::sync::Arc;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::convection::{certificate_verdict, assemble_load, CertificateVerdict, ConvectionSpec};
use crate::doublephase::{assemble_jacobian, assemble_residual, energy, FluxParams};
use crate::eigen::{first_eigenvalue, EigenOpts};
use crate::error::{Error, Result};
use crate::fem::{integrate, DiscreteField, DofMap, Mesh, QuadratureRule};
use crate::orlicz;
use crate::sparse::solve_cg;

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Outer tolerance on ||grad(u_{k+1} - u_k)||_2, relative.
    pub outer_tol: f64,
    pub outer_max_iter: usize,
    /// Inner Newton residual tolerance.
    pub inner_tol: f64,
    pub inner_max_iter: usize,
    pub ls_backtrack: f64,
    pub ls_slope: f64,
    /// Epsilon continuation schedule for the inner solve; the last entry is
    /// the target epsilon. Empty means use the FluxParams epsilon directly.
    pub eps_schedule: Vec<f64>,
    pub initial: Option<DiscreteField>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            outer_tol: 1e-8,
            outer_max_iter: 100,
            inner_tol: 1e-11,
            inner_max_iter: 60,
            ls_backtrack: 0.5,
            ls_slope: 1e-4,
            eps_schedule: Vec::new(),
            initial: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.outer_tol <= 0.0 || self.inner_tol <= 0.0 {
            return Err(Error::Config("solver tolerances must be positive".into()));
        }
        if self.outer_max_iter < 1 || self.inner_max_iter < 1 {
            return Err(Error::Config("iteration caps must be >= 1".into()));
        }
        if !(self.ls_backtrack > 0.0 && self.ls_backtrack < 1.0) {
            return Err(Error::Config("line-search backtracking factor must be in (0,1)".into()));
        }
        Ok(())
    }

    /// Continuation schedule wrapping the inner solve: for degenerate
    /// exponents (p < 2 or q < 2) walk eps from 1e-2 down to the target.
    fn schedule_for(&self, params: &FluxParams) -> Vec<f64> {
        if !self.eps_schedule.is_empty() {
            return self.eps_schedule.clone();
        }
        if params.exps.p >= 2.0 && params.exps.q >= 2.0 {
            return vec![params.epsilon];
        }
        let target = params.epsilon.max(1e-10);
        let mut eps = 1e-2;
        let mut schedule = Vec::new();
        while eps > target {
            schedule.push(eps);
            eps /= 10.0;
        }
        schedule.push(target);
        schedule
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IterationRecord {
    pub k: usize,
    /// ||grad(u_{k} - u_{k-1})||_2
    pub increment_norm: f64,
    /// max-norm of the full weak-form residual at u_k
    pub residual_norm: f64,
    pub energy: f64,
    /// discrete Poincare estimate ||u_k||_2^2 <= lambda^{-1} ||grad u_k||_2^2
    pub poincare_ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverReport {
    pub converged: bool,
    pub outer_iterations: usize,
    pub history: Vec<IterationRecord>,
    /// Geometric mean of consecutive increment ratios; reported only when
    /// at least 3 outer iterations occurred.
    pub contraction_factor: Option<f64>,
    /// c1 / lambda_{1,2} + c2 / sqrt(lambda_{1,2}) when certificates exist.
    pub contraction_bound: Option<f64>,
    pub verdict: CertificateVerdict,
    pub lambda_2: f64,
    #[serde(skip)]
    pub solution: DiscreteField,
}

fn l2_increment(a: &DiscreteField, b: &DiscreteField) -> Result<f64> {
    let mut diff = a.clone();
    for (d, &v) in diff.values.iter_mut().zip(&b.values) {
        *d -= v;
    }
    orlicz::lp_norm_gradient(&diff, 2.0)
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Solve the monotone subproblem A(u) = load by damped Newton with an
/// energy-merit line search. `load` is indexed by free nodes.
pub fn solve_monotone(
    load: &[f64],
    params: &FluxParams,
    cfg: &SolverConfig,
    init: &DiscreteField,
) -> Result<DiscreteField> {
    cfg.validate()?;
    let mut u = init.clone();
    u.apply_dirichlet();
    for &eps in &cfg.schedule_for(params) {
        let stage = params.with_epsilon(eps)?;
        newton_solve(load, &stage, cfg, &mut u)?;
    }
    Ok(u)
}

fn newton_solve(
    load: &[f64],
    params: &FluxParams,
    cfg: &SolverConfig,
    u: &mut DiscreteField,
) -> Result<()> {
    let dofs = DofMap::new(&u.mesh);
    let n = dofs.n_free();
    let merit = |u: &DiscreteField| -> Result<f64> {
        let e = energy(u, params)?;
        let lin: f64 = dofs
            .free
            .iter()
            .enumerate()
            .map(|(i, &node)| load[i] * u.values[node])
            .sum();
        Ok(e - lin)
    };
    for _ in 0..cfg.inner_max_iter {
        let residual = assemble_residual(u, load, params)?;
        if max_norm(&residual) <= cfg.inner_tol {
            return Ok(());
        }
        let jac = assemble_jacobian(u, params)?;
        let neg_res: Vec<f64> = residual.iter().map(|r| -r).collect();
        let delta = solve_cg(&jac, &neg_res, 1e-13, 200 * n + 200)?;
        // Armijo on the convex merit; slope = <residual, delta> < 0
        let slope: f64 = residual.iter().zip(&delta).map(|(r, d)| r * d).sum();
        let phi0 = merit(u)?;
        let mut step = 1.0;
        loop {
            let mut trial = u.clone();
            for (i, &node) in dofs.free.iter().enumerate() {
                trial.values[node] += step * delta[i];
            }
            // absolute slack covers the regime where the predicted decrease
            // is below rounding in the merit evaluation
            let slack = 1e-14 * (1.0 + phi0.abs());
            if merit(&trial)? <= phi0 + cfg.ls_slope * step * slope + slack {
                *u = trial;
                break;
            }
            step *= cfg.ls_backtrack;
            if step < 1e-14 {
                return Err(Error::Numerical(format!(
                    "Newton line search stagnated (residual {:.3e}, slope {:.3e})",
                    max_norm(&residual),
                    slope
                )));
            }
        }
    }
    let residual = assemble_residual(u, load, params)?;
    if max_norm(&residual) <= cfg.inner_tol {
        Ok(())
    } else {
        Err(Error::Numerical(format!(
            "Newton did not reach residual tolerance {:.1e} in {} iterations (residual {:.3e})",
            cfg.inner_tol,
            cfg.inner_max_iter,
            max_norm(&residual)
        )))
    }
}

/// One frozen-convection step: solve A(u) = N_f(u_frozen).
pub fn solve_frozen(
    u_frozen: &DiscreteField,
    spec: &ConvectionSpec,
    params: &FluxParams,
    cfg: &SolverConfig,
) -> Result<DiscreteField> {
    let load = assemble_load(spec, u_frozen)?;
    solve_monotone(&load, params, cfg, u_frozen)
}

/// Picard iteration u_{k+1} = solve_frozen(u_k) until the W^{1,2} increment
/// seminorm drops below tol * (1 + ||grad u||_2). Outer non-convergence is
/// reported, not thrown.
pub fn picard_solve(
    spec: &ConvectionSpec,
    params: &FluxParams,
    cfg: &SolverConfig,
) -> Result<SolverReport> {
    cfg.validate()?;
    let mesh = Arc::clone(&params.weight.field.mesh);
    let lambda_2 = first_eigenvalue(&mesh, 2.0, &EigenOpts::default())?.lambda;
    let lambda_p = if params.exps.p == 2.0 {
        lambda_2
    } else {
        first_eigenvalue(&mesh, params.exps.p, &EigenOpts::default())?.lambda
    };
    let verdict = certificate_verdict(spec, &params.exps, lambda_p, lambda_2);
    let contraction_bound = verdict.uniqueness.as_ref().map(|u| u.value);

    let mut u = match &cfg.initial {
        Some(init) => {
            let mut u = init.clone();
            u.apply_dirichlet();
            u
        }
        None => DiscreteField::zeros(&mesh),
    };
    let mut history = Vec::new();
    let mut increments: Vec<f64> = Vec::new();
    let mut converged = false;
    let mut outer_iterations = 0;
    for k in 1..=cfg.outer_max_iter {
        outer_iterations = k;
        let next = solve_frozen(&u, spec, params, cfg)?;
        let inc = l2_increment(&next, &u)?;
        let full_load = assemble_load(spec, &next)?;
        let full_res = assemble_residual(&next, &full_load, params)?;
        let poincare = orlicz::lp_norm(&next, 2.0)?.powi(2)
            <= orlicz::lp_norm_gradient(&next, 2.0)?.powi(2) / lambda_2
                + 1e-10 * (1.0 + orlicz::lp_norm(&next, 2.0)?.powi(2));
        history.push(IterationRecord {
            k,
            increment_norm: inc,
            residual_norm: max_norm(&full_res),
            energy: energy(&next, params)?,
            poincare_ok: poincare,
        });
        increments.push(inc);
        let scale = 1.0 + orlicz::lp_norm_gradient(&next, 2.0)?;
        u = next;
        if inc <= cfg.outer_tol * scale {
            converged = true;
            break;
        }
    }
    let contraction_factor = if increments.len() >= 3 {
        let ratios: Vec<f64> = increments
            .windows(2)
            .filter(|w| w[0] > 0.0 && w[1] > 0.0)
            .map(|w| w[1] / w[0])
            .collect();
        if ratios.is_empty() {
            None
        } else {
            let log_mean =
                ratios.iter().map(|r| r.ln()).sum::<f64>() / ratios.len() as f64;
            Some(log_mean.exp())
        }
    } else {
        None
    };
    Ok(SolverReport {
        converged,
        outer_iterations,
        history,
        contraction_factor,
        contraction_bound,
        verdict,
        lambda_2,
        solution: u,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ContractionStats {
    pub trials: usize,
    pub all_converged: bool,
    /// Largest pairwise ||grad(u - v)||_2 between trial limits.
    pub max_pairwise_gap: f64,
    /// Smallest observed value of the monotone q-term integral between
    /// successive iterates (should be >= 0 up to rounding).
    pub min_monotone_term: f64,
    /// True when the uniqueness condition passes and p = 2.
    pub uniqueness_certified: bool,
    pub contraction_factors: Vec<Option<f64>>,
    pub contraction_bound: Option<f64>,
    /// Set when the run is outside the uniqueness theorem's range (p != 2).
    pub theorem_inapplicable: bool,
}

/// The monotone q-phase term int mu (|grad a|^{q-2} grad a - |grad b|^{q-2}
/// grad b) . grad(a - b) dx; nonnegative by monotonicity of the q-flux.
pub fn monotone_term(
    a: &DiscreteField,
    b: &DiscreteField,
    params: &FluxParams,
) -> Result<f64> {
    let rule = QuadratureRule::default_for(a.mesh.dim);
    let q = params.exps.q;
    integrate(&a.mesh, &rule, |e, _x, bary| {
        let ga = a.gradient_on_element(e).expect("element in range");
        let gb = b.gradient_on_element(e).expect("element in range");
        let ma = (ga[0] * ga[0] + ga[1] * ga[1]).sqrt();
        let mb = (gb[0] * gb[0] + gb[1] * gb[1]).sqrt();
        let fa = if ma > 0.0 { ma.powf(q - 2.0) } else { 0.0 };
        let fb = if mb > 0.0 { mb.powf(q - 2.0) } else { 0.0 };
        let mu = params.weight.field.value_at(e, bary).max(0.0);
        mu * ((fa * ga[0] - fb * gb[0]) * (ga[0] - gb[0])
            + (fa * ga[1] - fb * gb[1]) * (ga[1] - gb[1]))
    })
}

/// Run the Picard solve from `trials` random initial guesses and verify all
/// limits coincide when the uniqueness condition passes.
pub fn measure_contraction(
    spec: &ConvectionSpec,
    params: &FluxParams,
    cfg: &SolverConfig,
    trials: usize,
    seed: u64,
) -> Result<ContractionStats> {
    let mesh = Arc::clone(&params.weight.field.mesh);
    let dofs = DofMap::new(&mesh);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut limits = Vec::new();
    let mut factors = Vec::new();
    let mut all_converged = true;
    let mut bound = None;
    let mut certified = false;
    let mut min_monotone = f64::INFINITY;
    for trial in 0..trials {
        let mut init = DiscreteField::zeros(&mesh);
        if trial > 0 {
            for &n in &dofs.free {
                init.values[n] = rng.gen_range(-1.0..1.0);
            }
        }
        let mut trial_cfg = cfg.clone();
        trial_cfg.initial = Some(init);
        let report = picard_solve(spec, params, &trial_cfg)?;
        all_converged &= report.converged;
        bound = report.contraction_bound;
        certified = report
            .verdict
            .uniqueness
            .as_ref()
            .map_or(false, |u| u.passes && u.theorem_applies);
        factors.push(report.contraction_factor);
        limits.push(report.solution);
    }
    // successive-iterate monotone-term check on the final pair of limits
    for i in 0..limits.len() {
        for j in (i + 1)..limits.len() {
            let m = monotone_term(&limits[i], &limits[j], params)?;
            min_monotone = min_monotone.min(m);
        }
    }
    if limits.len() < 2 {
        min_monotone = 0.0;
    }
    let mut max_gap: f64 = 0.0;
    for i in 0..limits.len() {
        for j in (i + 1)..limits.len() {
            max_gap = max_gap.max(l2_increment(&limits[i], &limits[j])?);
        }
    }
    if certified && all_converged {
        let scale = 1.0 + orlicz::lp_norm_gradient(&limits[0], 2.0)?;
        if max_gap > 10.0 * cfg.outer_tol * scale {
            return Err(Error::InvariantViolation(format!(
                "uniqueness condition passes but trial limits differ by {:.3e} (> {:.3e})",
                max_gap,
                10.0 * cfg.outer_tol * scale
            )));
        }
    }
    Ok(ContractionStats {
        trials,
        all_converged,
        max_pairwise_gap: max_gap,
        min_monotone_term: min_monotone,
        uniqueness_certified: certified,
        contraction_factors: factors,
        contraction_bound: bound,
        theorem_inapplicable: params.exps.p != 2.0,
    })
}

/// A manufactured-solutions case: the exact solution, its gradient, the
/// weight mu as a closed form, and the total discrete right-hand side
/// g(x) = -div a(x, grad u*) - f(x, u*, grad u*) (supplied in closed form).
pub struct MmsCase {
    pub name: String,
    pub u_star: Box<dyn Fn([f64; 2]) -> f64 + Sync>,
    pub grad_star: Box<dyn Fn([f64; 2]) -> [f64; 2] + Sync>,
    pub load: Box<dyn Fn([f64; 2]) -> f64 + Sync>,
    pub mu: Box<dyn Fn([f64; 2]) -> f64 + Sync>,
    pub exps: crate::orlicz::PhaseExponents,
    pub epsilon: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelRecord {
    pub cells: usize,
    pub h: f64,
    pub l2_error: f64,
    pub h1_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceTable {
    pub case: String,
    pub levels: Vec<LevelRecord>,
    pub l2_rates: Vec<f64>,
    pub h1_rates: Vec<f64>,
}

/// Solve A(u) = load on `levels` uniformly refined interval meshes
/// (base resolution doubling each level) and report errors and rates.
pub fn mms_study(
    case: &MmsCase,
    domain: crate::fem::BoxDomain,
    base_resolution: usize,
    levels: usize,
    cfg: &SolverConfig,
) -> Result<ConvergenceTable> {
    // the exact solution must vanish on the Dirichlet boundary
    let probe = Mesh::uniform(domain, &vec![base_resolution; domain.dim])?;
    for &b in &probe.boundary {
        let v = (case.u_star)(probe.nodes[b]);
        if v.abs() > 1e-12 {
            return Err(Error::Config(format!(
                "manufactured solution does not vanish on the boundary (u*({:?}) = {})",
                probe.nodes[b], v
            )));
        }
    }
    let mut records = Vec::new();
    for level in 0..levels {
        let res = base_resolution << level;
        let mesh = Arc::new(Mesh::uniform(domain, &vec![res; domain.dim])?);
        let weight = crate::orlicz::WeightField::from_fn(&mesh, &case.mu)?;
        let params = FluxParams::new(case.exps, weight, case.epsilon)?;
        let dofs = DofMap::new(&mesh);
        let rule = QuadratureRule::default_for(mesh.dim);
        // load vector from the closed-form right-hand side
        let k = mesh.nodes_per_element();
        let mut load = vec![0.0; dofs.n_free()];
        for e in 0..mesh.n_elements() {
            let conn = mesh.element(e);
            let vol = mesh.volume(e);
            for (bary, &w) in rule.points.iter().zip(&rule.weights) {
                let x = mesh.point(e, bary);
                let g = (case.load)(x);
                for local in 0..k {
                    if let Some(free) = dofs.full_to_free[conn[local]] {
                        load[free] += w * vol * g * bary[local];
                    }
                }
            }
        }
        let init = DiscreteField::zeros(&mesh);
        let u = solve_monotone(&load, &params, cfg, &init)?;
        let l2 = integrate(&mesh, &rule, |e, x, bary| {
            let d = u.value_at(e, bary) - (case.u_star)(x);
            d * d
        })?
        .sqrt();
        let h1 = integrate(&mesh, &rule, |e, x, _| {
            let gh = u.gradient_on_element(e).expect("element in range");
            let gs = (case.grad_star)(x);
            (gh[0] - gs[0]).powi(2) + (gh[1] - gs[1]).powi(2)
        })?
        .sqrt();
        records.push(LevelRecord {
            cells: res,
            h: mesh.mesh_size(),
            l2_error: l2,
            h1_error: h1,
        });
    }
    let rate = |errors: Vec<f64>| -> Vec<f64> {
        errors
            .windows(2)
            .map(|w| {
                if w[0] > 0.0 && w[1] > 0.0 {
                    (w[0] / w[1]).log2()
                } else {
                    f64::NAN
                }
            })
            .collect()
    };
    let l2_rates = rate(records.iter().map(|r| r.l2_error).collect());
    let h1_rates = rate(records.iter().map(|r| r.h1_error).collect());
    Ok(ConvergenceTable {
        case: case.name.clone(),
        levels: records,
        l2_rates,
        h1_rates,
    })
}

/// Prebuilt manufactured cases.
pub mod cases {
    use super::MmsCase;
    use crate::orlicz::PhaseExponents;
    use std::f64::consts::PI;

    /// p = 2, mu = 0, u* = sin(pi x) on [0,1]: the classical Poisson
    /// problem with load pi^2 sin(pi x).
    pub fn poisson_1d() -> MmsCase {
        MmsCase {
            name: "poisson1d".into(),
            u_star: Box::new(|x| (PI * x[0]).sin()),
            grad_star: Box::new(|x| [PI * (PI * x[0]).cos(), 0.0]),
            load: Box::new(|x| PI * PI * (PI * x[0]).sin()),
            mu: Box::new(|_| 0.0),
            exps: PhaseExponents::new(2.0, 3.0, 3).unwrap(),
            epsilon: 0.0,
        }
    }

    /// p = 2, q = 3, mu(x) = x, u* = sin(pi x) on [0,1]. The flux is
    /// a = u*' + x |u*'| u*', so with c = cos(pi x) the load is
    ///   g = pi^2 sin - d/dx[ pi^2 x c |c| ]
    ///     = pi^2 sin(pi x) - pi^2 c |c| + 2 pi^3 x |c| sin(pi x).
    pub fn double_phase_1d() -> MmsCase {
        MmsCase {
            name: "doublephase1d".into(),
            u_star: Box::new(|x| (PI * x[0]).sin()),
            grad_star: Box::new(|x| [PI * (PI * x[0]).cos(), 0.0]),
            load: Box::new(|x| {
                let c = (PI * x[0]).cos();
                let s = (PI * x[0]).sin();
                PI * PI * s - PI * PI * c * c.abs() + 2.0 * PI.powi(3) * x[0] * c.abs() * s
            }),
            mu: Box::new(|x| x[0]),
            exps: PhaseExponents::new(2.0, 3.0, 3).unwrap(),
            epsilon: 0.0,
        }
    }

    /// u* = 0: zero load, zero error at every level.
    pub fn zero_1d() -> MmsCase {
        MmsCase {
            name: "zero".into(),
            u_star: Box::new(|_| 0.0),
            grad_star: Box::new(|_| [0.0, 0.0]),
            load: Box::new(|_| 0.0),
            mu: Box::new(|_| 1.0),
            exps: PhaseExponents::new(2.0, 3.0, 3).unwrap(),
            epsilon: 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convection::ScalarFn;
    use crate::fem::BoxDomain;
    use crate::orlicz::{PhaseExponents, WeightField};
    use std::f64::consts::PI;

    fn interval(n: usize) -> Arc<Mesh> {
        Arc::new(Mesh::uniform(BoxDomain::unit_interval(), &[n]).unwrap())
    }

    fn params(mesh: &Arc<Mesh>, p: f64, q: f64, mu: f64, eps: f64) -> FluxParams {
        FluxParams::new(
            PhaseExponents::new(p, q, 3).unwrap(),
            WeightField::constant(mesh, mu).unwrap(),
            eps,
        )
        .unwrap()
    }

    #[test]
    fn zero_spec_returns_zero_from_any_frozen_field() {
        let mesh = interval(16);
        let prm = params(&mesh, 2.0, 3.0, 1.0, 0.0);
        let cfg = SolverConfig::default();
        let frozen = DiscreteField::from_fn(&mesh, |x| (9.0 * x[0]).sin());
        let u = solve_frozen(&frozen, &ConvectionSpec::zero(), &prm, &cfg).unwrap();
        assert!(u.values.iter().all(|&v| v.abs() < 1e-9), "{:?}", u.values);
    }

    #[test]
    fn poisson_solution_accuracy() {
        // p = 2, mu = 0, f = pi^2 sin(pi x): u = sin(pi x)
        let mesh = interval(64);
        let prm = params(&mesh, 2.0, 3.0, 0.0, 0.0);
        let cfg = SolverConfig::default();
        let spec = ConvectionSpec {
            f: crate::convection::Nonlinearity::Expression(Arc::new(|x, _s, _xi| {
                PI * PI * (PI * x[0]).sin()
            })),
            growth: None,
            sign: None,
            lipschitz: None,
            linear_gradient: None,
        };
        let u = solve_frozen(&DiscreteField::zeros(&mesh), &spec, &prm, &cfg).unwrap();
        let exact = DiscreteField::from_fn(&mesh, |x| (PI * x[0]).sin());
        let err = l2_increment(&u, &exact).unwrap();
        assert!(err < 0.1, "H1 error = {}", err);
        let max_err: f64 = u
            .values
            .iter()
            .zip(&exact.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(max_err < 1e-3, "max nodal error = {}", max_err);
    }

    #[test]
    fn manufactured_double_phase_residual_small() {
        // p = 2, q = 4, mu = 1, load manufactured from u* = x(1-x):
        // the returned solution has residual below the inner tolerance.
        let mesh = interval(32);
        let prm = params(&mesh, 2.0, 4.0, 1.0, 0.0);
        let cfg = SolverConfig::default();
        let u_star = DiscreteField::from_fn(&mesh, |x| x[0] * (1.0 - x[0]));
        let mut load = assemble_residual(&u_star, &[], &prm).unwrap();
        // solve A(u) = A(u*): expect u = u* up to solver tolerance
        let init = DiscreteField::zeros(&mesh);
        let u = solve_monotone(&load, &prm, &cfg, &init).unwrap();
        let res = assemble_residual(&u, &mut load, &prm).unwrap();
        assert!(max_norm(&res) < 1e-10, "residual = {}", max_norm(&res));
        let gap = l2_increment(&u, &u_star).unwrap();
        assert!(gap < 1e-7, "gap = {}", gap);
    }

    #[test]
    fn newton_energy_descent() {
        let mesh = interval(24);
        let prm = params(&mesh, 2.0, 4.0, 1.0, 0.0);
        let u_star = DiscreteField::from_fn(&mesh, |x| (PI * x[0]).sin());
        let load = assemble_residual(&u_star, &[], &prm).unwrap();
        // instrumented Newton: track the merit between iterations
        let dofs = DofMap::new(&mesh);
        let merit = |u: &DiscreteField| -> f64 {
            energy(u, &prm).unwrap()
                - dofs
                    .free
                    .iter()
                    .enumerate()
                    .map(|(i, &n)| load[i] * u.values[n])
                    .sum::<f64>()
        };
        let mut u = DiscreteField::zeros(&mesh);
        let mut prev = merit(&u);
        for _ in 0..8 {
            let res = assemble_residual(&u, &load, &prm).unwrap();
            if max_norm(&res) < 1e-12 {
                break;
            }
            let jac = assemble_jacobian(&u, &prm).unwrap();
            let neg: Vec<f64> = res.iter().map(|r| -r).collect();
            let delta = solve_cg(&jac, &neg, 1e-13, 10_000).unwrap();
            let mut step = 1.0;
            loop {
                let mut trial = u.clone();
                for (i, &n) in dofs.free.iter().enumerate() {
                    trial.values[n] += step * delta[i];
                }
                if merit(&trial) <= prev {
                    u = trial;
                    break;
                }
                step *= 0.5;
                assert!(step > 1e-14);
            }
            let cur = merit(&u);
            assert!(cur <= prev + 1e-14, "merit increased: {} -> {}", prev, cur);
            prev = cur;
        }
    }

    #[test]
    fn picard_zero_f_converges_first_iteration() {
        let mesh = interval(16);
        let prm = params(&mesh, 2.0, 3.0, 1.0, 0.0);
        let report = picard_solve(&ConvectionSpec::zero(), &prm, &SolverConfig::default()).unwrap();
        assert!(report.converged);
        assert_eq!(report.outer_iterations, 1);
        assert!(report.solution.values.iter().all(|&v| v.abs() < 1e-9));
    }

    #[test]
    fn picard_example2_contraction() {
        let mesh = interval(32);
        let prm = params(&mesh, 2.0, 2.5, 1.0, 0.0);
        let spec = ConvectionSpec::example2(
            vec![0.3],
            ScalarFn::Expr(Arc::new(|x| (PI * x[0]).sin())),
            1.0,
        )
        .unwrap();
        let report = picard_solve(&spec, &prm, &SolverConfig::default()).unwrap();
        assert!(report.converged, "not converged: {:#?}", report.history);
        let bound = report.contraction_bound.unwrap();
        assert!(bound < 1.0);
        if let Some(factor) = report.contraction_factor {
            assert!(
                factor <= bound + 0.05,
                "factor {} exceeds bound {} + 0.05",
                factor,
                bound
            );
        }
        // weak-form residual at the limit
        let last = report.history.last().unwrap();
        assert!(last.residual_norm <= 10.0 * SolverConfig::default().inner_tol);
        assert!(report.history.iter().all(|h| h.poincare_ok));
    }

    #[test]
    fn contraction_trials_identical_limits() {
        let mesh = interval(16);
        let prm = params(&mesh, 2.0, 2.5, 1.0, 0.0);
        let spec = ConvectionSpec::example2(
            vec![0.3],
            ScalarFn::Expr(Arc::new(|x| (PI * x[0]).sin())),
            1.0,
        )
        .unwrap();
        let stats =
            measure_contraction(&spec, &prm, &SolverConfig::default(), 3, 42).unwrap();
        assert!(stats.all_converged);
        assert!(stats.uniqueness_certified);
        assert!(stats.max_pairwise_gap <= 1e-6, "gap = {}", stats.max_pairwise_gap);
        assert!(stats.min_monotone_term >= -1e-12);
        assert!(!stats.theorem_inapplicable);
    }

    #[test]
    fn contraction_zero_f_all_limits_zero() {
        let mesh = interval(8);
        let prm = params(&mesh, 2.0, 3.0, 1.0, 0.0);
        let stats = measure_contraction(
            &ConvectionSpec::zero(),
            &prm,
            &SolverConfig::default(),
            5,
            7,
        )
        .unwrap();
        assert!(stats.all_converged);
        assert!(stats.max_pairwise_gap < 1e-8);
    }

    #[test]
    fn monotone_term_nonnegative_on_random_pairs() {
        let mesh = interval(12);
        let prm = params(&mesh, 2.0, 3.0, 1.0, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..50 {
            let (ca, cb) = (rng_f(&mut rng), rng_f(&mut rng));
            let a = DiscreteField::from_fn(&mesh, |x| (ca * 9.0 * x[0]).sin());
            let b = DiscreteField::from_fn(&mesh, |x| cb * x[0] * (1.0 - x[0]));
            let m = monotone_term(&a, &b, &prm).unwrap();
            assert!(m >= -1e-12, "monotone term = {}", m);
        }
    }

    fn rng_f(rng: &mut ChaCha8Rng) -> f64 {
        rng.gen::<f64>() * 2.0 - 1.0
    }

    #[test]
    fn mms_poisson_rate_two() {
        let case = cases::poisson_1d();
        let table = mms_study(
            &case,
            BoxDomain::unit_interval(),
            8,
            4,
            &SolverConfig::default(),
        )
        .unwrap();
        let last_rate = *table.l2_rates.last().unwrap();
        assert!(
            (last_rate - 2.0).abs() <= 0.1,
            "L2 rate = {} (table {:#?})",
            last_rate,
            table
        );
    }

    #[test]
    fn mms_zero_case() {
        let case = cases::zero_1d();
        let table = mms_study(
            &case,
            BoxDomain::unit_interval(),
            4,
            3,
            &SolverConfig::default(),
        )
        .unwrap();
        for level in &table.levels {
            assert!(level.l2_error < 1e-12 && level.h1_error < 1e-12);
        }
    }

    #[test]
    fn mms_rejects_nonvanishing_boundary() {
        let mut case = cases::poisson_1d();
        case.u_star = Box::new(|x| (PI * x[0]).cos());
        let r = mms_study(
            &case,
            BoxDomain::unit_interval(),
            4,
            2,
            &SolverConfig::default(),
        );
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn determinism_same_seed_identical() {
        let mesh = interval(16);
        let prm = params(&mesh, 2.0, 2.5, 1.0, 0.0);
        let spec = ConvectionSpec::example2(vec![0.2], ScalarFn::Zero, 0.0).unwrap();
        let mut cfg = SolverConfig::default();
        let mut init = DiscreteField::zeros(&mesh);
        init.values[4] = 0.3;
        cfg.initial = Some(init);
        let r1 = picard_solve(&spec, &prm, &cfg).unwrap();
        let r2 = picard_solve(&spec, &prm, &cfg).unwrap();
        assert_eq!(r1.solution.values, r2.solution.values);
        for (a, b) in r1.history.iter().zip(&r2.history) {
            assert_eq!(a.increment_norm, b.increment_norm);
            assert_eq!(a.residual_norm, b.residual_norm);
        }
    }
}
