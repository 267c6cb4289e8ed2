//! Config file parsing and validation for the command-line front end.
//!
//! A run is a single TOML file with `problem`, `solver`, and `output`
//! sections plus optional per-subcommand sections. Unknown keys are
//! rejected with a nearest-key suggestion; defaults are filled in and the
//! effective config is echoed into every report.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::convection::{
    ConvectionSpec, GrowthCertificate, LinearGradientCertificate, LipschitzCertificate,
    Nonlinearity, ScalarFn, SignCertificate,
};
use crate::doublephase::{FluxParams, DEFAULT_EPSILON};
use crate::error::{Error, Result};
use crate::fem::{BoxDomain, Mesh};
use crate::orlicz::{PhaseExponents, WeightField};
use crate::solver::SolverConfig;

fn default_resolution() -> Vec<usize> {
    vec![64]
}
fn default_n() -> u32 {
    3
}
fn default_mu() -> String {
    "zero".into()
}
fn default_kind() -> String {
    "zero".into()
}
fn default_outer_tol() -> f64 {
    1e-8
}
fn default_outer_max_iter() -> usize {
    100
}
fn default_inner_tol() -> f64 {
    1e-11
}
fn default_inner_max_iter() -> usize {
    60
}
fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}
fn default_threads() -> usize {
    1
}
fn default_r() -> f64 {
    2.0
}
fn default_eig_tol() -> f64 {
    1e-12
}
fn default_eig_max_iter() -> usize {
    10_000
}
fn default_case() -> String {
    "poisson1d".into()
}
fn default_base_resolution() -> usize {
    8
}
fn default_levels() -> usize {
    4
}
fn default_trials() -> usize {
    5
}
fn default_budget() -> usize {
    100_000
}
fn default_range() -> f64 {
    10.0
}
fn default_out_dir() -> String {
    "out".into()
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearityConfig {
    /// `zero`, `example1`, `example2`, `linear_gradient`, or `expression`.
    #[serde(default = "default_kind")]
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<f64>>,
    /// Expression in x, y for the inhomogeneity rho(x).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<String>,
    /// Uniform bound on |rho| over the domain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_bound: Option<f64>,
    /// Expression in x, y, s, g1, g2 for a custom f.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expr: Option<String>,
    // optional declared certificates for the `expression` kind
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_hat: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_hat: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c2: Option<f64>,
}

impl Default for NonlinearityConfig {
    fn default() -> Self {
        NonlinearityConfig {
            kind: default_kind(),
            d1: None,
            d2: None,
            q1: None,
            beta: None,
            rho: None,
            rho_bound: None,
            expr: None,
            a1: None,
            a2: None,
            alpha_hat: None,
            b1: None,
            b2: None,
            omega_hat: None,
            c1: None,
            c2: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    /// Mesh file path; mutually exclusive with domain/resolution.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh_file: Option<String>,
    /// Domain bounds, `[a, b]` in 1D or `[x0, x1, y0, y1]` in 2D.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Vec<f64>>,
    #[serde(default = "default_resolution")]
    pub resolution: Vec<usize>,
    pub p: f64,
    pub q: f64,
    #[serde(default = "default_n")]
    pub n: u32,
    /// `zero`, `one`, or an expression in x, y.
    #[serde(default = "default_mu")]
    pub mu: String,
    #[serde(default)]
    pub nonlinearity: NonlinearityConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "default_outer_tol")]
    pub outer_tol: f64,
    #[serde(default = "default_outer_max_iter")]
    pub outer_max_iter: usize,
    #[serde(default = "default_inner_tol")]
    pub inner_tol: f64,
    #[serde(default = "default_inner_max_iter")]
    pub inner_max_iter: usize,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub eps_schedule: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_threads")]
    pub threads: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            outer_tol: default_outer_tol(),
            outer_max_iter: default_outer_max_iter(),
            inner_tol: default_inner_tol(),
            inner_max_iter: default_inner_max_iter(),
            epsilon: default_epsilon(),
            eps_schedule: Vec::new(),
            seed: 0,
            threads: default_threads(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigSection {
    #[serde(default = "default_r")]
    pub r: f64,
    #[serde(default = "default_eig_tol")]
    pub tol: f64,
    #[serde(default = "default_eig_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub write_eigenfunction: bool,
}

impl Default for EigSection {
    fn default() -> Self {
        EigSection {
            r: default_r(),
            tol: default_eig_tol(),
            max_iter: default_eig_max_iter(),
            write_eigenfunction: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MmsSection {
    /// `poisson1d`, `doublephase1d`, or `zero`.
    #[serde(default = "default_case")]
    pub case: String,
    #[serde(default = "default_base_resolution")]
    pub base_resolution: usize,
    #[serde(default = "default_levels")]
    pub levels: usize,
}

impl Default for MmsSection {
    fn default() -> Self {
        MmsSection {
            case: default_case(),
            base_resolution: default_base_resolution(),
            levels: default_levels(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractionSection {
    #[serde(default = "default_trials")]
    pub trials: usize,
}

impl Default for ContractionSection {
    fn default() -> Self {
        ContractionSection {
            trials: default_trials(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSection {
    /// Monte-Carlo sample budget for the certificate audit.
    #[serde(default = "default_budget")]
    pub budget: usize,
    /// Sampling range for s and gradient components.
    #[serde(default = "default_range")]
    pub range: f64,
}

impl Default for CheckSection {
    fn default() -> Self {
        CheckSection {
            budget: default_budget(),
            range: default_range(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormsSection {
    /// Nodal field file to measure; required by `dp norms`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field_file: Option<String>,
}

impl Default for NormsSection {
    fn default() -> Self {
        NormsSection { field_file: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_out_dir")]
    pub dir: String,
    #[serde(default = "default_true")]
    pub write_solution: bool,
    #[serde(default = "default_true")]
    pub write_history: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: default_out_dir(),
            write_solution: true,
            write_history: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub eig: EigSection,
    #[serde(default)]
    pub mms: MmsSection,
    #[serde(default)]
    pub contraction: ContractionSection,
    #[serde(default)]
    pub check: CheckSection,
    #[serde(default)]
    pub norms: NormsSection,
    #[serde(default)]
    pub output: OutputSection,
}

/// Allowed keys per config table, for nearest-key suggestions.
const SCHEMA: &[(&str, &[&str])] = &[
    (
        "",
        &[
            "problem",
            "solver",
            "eig",
            "mms",
            "contraction",
            "check",
            "norms",
            "output",
        ],
    ),
    (
        "problem",
        &[
            "mesh_file",
            "domain",
            "resolution",
            "p",
            "q",
            "n",
            "mu",
            "nonlinearity",
        ],
    ),
    (
        "problem.nonlinearity",
        &[
            "kind", "d1", "d2", "q1", "beta", "rho", "rho_bound", "expr", "a1", "a2",
            "alpha_hat", "b1", "b2", "omega_hat", "c1", "c2",
        ],
    ),
    (
        "solver",
        &[
            "outer_tol",
            "outer_max_iter",
            "inner_tol",
            "inner_max_iter",
            "epsilon",
            "eps_schedule",
            "seed",
            "threads",
        ],
    ),
    ("eig", &["r", "tol", "max_iter", "write_eigenfunction"]),
    ("mms", &["case", "base_resolution", "levels"]),
    ("contraction", &["trials"]),
    ("check", &["budget", "range"]),
    ("norms", &["field_file"]),
    ("output", &["dir", "write_solution", "write_history"]),
];

fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for (i, &ca) in a.iter().enumerate() {
        let mut cur = vec![i + 1];
        for (j, &cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur.push(sub.min(prev[j + 1] + 1).min(cur[j] + 1));
        }
        prev = cur;
    }
    prev[b.len()]
}

fn check_keys(table: &toml::Table, path: &str) -> Result<()> {
    let allowed = SCHEMA
        .iter()
        .find(|(name, _)| *name == path)
        .map(|(_, keys)| *keys)
        .unwrap_or(&[]);
    for (key, value) in table {
        if !allowed.contains(&key.as_str()) {
            let suggestion = allowed
                .iter()
                .map(|cand| (edit_distance(key, cand), *cand))
                .min()
                .filter(|(d, _)| *d <= 2)
                .map(|(_, cand)| format!("; did you mean `{}`?", cand))
                .unwrap_or_default();
            let loc = if path.is_empty() {
                key.clone()
            } else {
                format!("{}.{}", path, key)
            };
            return Err(Error::Config(format!("unknown key `{}`{}", loc, suggestion)));
        }
        if let toml::Value::Table(inner) = value {
            let sub = if path.is_empty() {
                key.clone()
            } else {
                format!("{}.{}", path, key)
            };
            check_keys(inner, &sub)?;
        }
    }
    Ok(())
}

pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    let table: toml::Table = text
        .parse()
        .map_err(|e| Error::Config(format!("config syntax: {}", e)))?;
    check_keys(&table, "")?;
    let cfg: RunConfig =
        toml::from_str(text).map_err(|e| Error::Config(format!("config: {}", e)))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {}", path.display(), e)))?;
    parse_config_str(&text)
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let p = self.problem.p;
        let q = self.problem.q;
        if !(1.0 < p && p < q) {
            return Err(Error::Config(format!(
                "exponents must satisfy 1 < p < q (got p = {}, q = {})",
                p, q
            )));
        }
        if let Some(domain) = &self.problem.domain {
            if domain.len() != 2 && domain.len() != 4 {
                return Err(Error::Config(
                    "domain must be [a, b] (1D) or [x0, x1, y0, y1] (2D)".into(),
                ));
            }
        }
        let dim = self.dim();
        if self.problem.mesh_file.is_none() {
            if self.problem.resolution.len() != dim {
                return Err(Error::Config(format!(
                    "resolution has {} entries for a {}D domain",
                    self.problem.resolution.len(),
                    dim
                )));
            }
            if self.problem.resolution.iter().any(|&r| r == 0) {
                return Err(Error::Config("resolution entries must be positive".into()));
            }
        }
        if let Some(path) = &self.problem.mesh_file {
            if !Path::new(path).exists() {
                return Err(Error::Config(format!("mesh_file `{}` does not exist", path)));
            }
        }
        if let Some(path) = &self.norms.field_file {
            if !Path::new(path).exists() {
                return Err(Error::Config(format!("field_file `{}` does not exist", path)));
            }
        }
        if self.solver.threads == 0 {
            return Err(Error::Config("threads must be >= 1".into()));
        }
        if self.eig.r < 1.0 {
            return Err(Error::Config("eig.r must be >= 1".into()));
        }
        if self.mms.levels == 0 || self.mms.base_resolution == 0 {
            return Err(Error::Config("mms levels and base_resolution must be >= 1".into()));
        }
        if self.contraction.trials == 0 {
            return Err(Error::Config("contraction.trials must be >= 1".into()));
        }
        self.solver_config().validate()?;
        PhaseExponents::new(p, q, self.problem.n)?;
        self.parse_mu_expr()?;
        self.build_spec()?;
        Ok(())
    }

    fn dim(&self) -> usize {
        match &self.problem.domain {
            Some(d) if d.len() == 4 => 2,
            _ => 1,
        }
    }

    pub fn exponents(&self) -> Result<PhaseExponents> {
        PhaseExponents::new(self.problem.p, self.problem.q, self.problem.n)
    }

    pub fn build_mesh(&self) -> Result<Arc<Mesh>> {
        if let Some(path) = &self.problem.mesh_file {
            return Ok(Arc::new(crate::fem::io::read_mesh(Path::new(path))?));
        }
        Ok(Arc::new(Mesh::uniform(
            self.domain()?,
            &self.problem.resolution,
        )?))
    }

    pub fn domain(&self) -> Result<BoxDomain> {
        match &self.problem.domain {
            None => Ok(BoxDomain::unit_interval()),
            Some(d) if d.len() == 2 => {
                if d[1] <= d[0] {
                    return Err(Error::Config("domain must have a < b".into()));
                }
                Ok(BoxDomain::interval(d[0], d[1]))
            }
            Some(d) if d.len() == 4 => {
                if d[1] <= d[0] || d[3] <= d[2] {
                    return Err(Error::Config("domain must have x0 < x1 and y0 < y1".into()));
                }
                Ok(BoxDomain::rectangle([d[0], d[2]], [d[1], d[3]]))
            }
            Some(_) => Err(Error::Config(
                "domain must be [a, b] (1D) or [x0, x1, y0, y1] (2D)".into(),
            )),
        }
    }

    fn parse_mu_expr(&self) -> Result<Option<ScalarFn>> {
        match self.problem.mu.as_str() {
            "zero" | "one" => Ok(None),
            expr => Ok(Some(ScalarFn::parse(expr)?)),
        }
    }

    pub fn build_weight(&self, mesh: &Arc<Mesh>) -> Result<WeightField> {
        match self.parse_mu_expr()? {
            None if self.problem.mu == "zero" => Ok(WeightField::zero(mesh)),
            None => WeightField::constant(mesh, 1.0),
            Some(f) => WeightField::from_fn(mesh, |x| f.eval(x)),
        }
    }

    pub fn build_params(&self, mesh: &Arc<Mesh>) -> Result<FluxParams> {
        FluxParams::new(self.exponents()?, self.build_weight(mesh)?, self.solver.epsilon)
    }

    pub fn build_spec(&self) -> Result<ConvectionSpec> {
        let nl = &self.problem.nonlinearity;
        let need = |field: &Option<f64>, name: &str| -> Result<f64> {
            field.ok_or_else(|| {
                Error::Config(format!(
                    "nonlinearity kind `{}` requires key `{}`",
                    nl.kind, name
                ))
            })
        };
        match nl.kind.as_str() {
            "zero" => Ok(ConvectionSpec::zero()),
            "example1" => ConvectionSpec::example1(
                need(&nl.d1, "d1")?,
                need(&nl.d2, "d2")?,
                need(&nl.q1, "q1")?,
                self.problem.p,
            ),
            "example2" => {
                let beta = nl
                    .beta
                    .clone()
                    .ok_or_else(|| Error::Config("example2 requires key `beta`".into()))?;
                let rho = match &nl.rho {
                    None => ScalarFn::Zero,
                    Some(e) => ScalarFn::parse(e)?,
                };
                let rho_bound = nl.rho_bound.unwrap_or(0.0);
                ConvectionSpec::example2(beta, rho, rho_bound)
            }
            "linear_gradient" => {
                let beta = nl
                    .beta
                    .clone()
                    .ok_or_else(|| Error::Config("linear_gradient requires key `beta`".into()))?;
                let rho = match &nl.rho {
                    None => ScalarFn::Zero,
                    Some(e) => ScalarFn::parse(e)?,
                };
                let b = beta.iter().map(|v| v * v).sum::<f64>().sqrt();
                Ok(ConvectionSpec {
                    f: Nonlinearity::LinearGradient {
                        beta,
                        rho: rho.clone(),
                    },
                    growth: None,
                    sign: None,
                    lipschitz: Some(LipschitzCertificate {
                        c1: nl.c1.unwrap_or(0.0),
                    }),
                    linear_gradient: Some(LinearGradientCertificate {
                        c2: nl.c2.unwrap_or(b),
                        rho,
                        r_prime: 2.0,
                    }),
                })
            }
            "expression" => {
                let text = nl
                    .expr
                    .clone()
                    .ok_or_else(|| Error::Config("expression kind requires key `expr`".into()))?;
                let expr: meval::Expr = text
                    .parse()
                    .map_err(|e| Error::Config(format!("expr `{}`: {}", text, e)))?;
                // probe so malformed variable references fail at parse time
                crate::convection::eval_expr(
                    &expr,
                    &[("x", 0.0), ("y", 0.0), ("s", 0.0), ("g1", 0.0), ("g2", 0.0)],
                )
                .map_err(|e| Error::Config(format!("expr `{}`: {}", text, e)))?;
                let f = Arc::new(move |x: [f64; 2], s: f64, xi: [f64; 2]| {
                    crate::convection::eval_expr(
                        &expr,
                        &[("x", x[0]), ("y", x[1]), ("s", s), ("g1", xi[0]), ("g2", xi[1])],
                    )
                    .unwrap_or(f64::NAN)
                });
                let growth = match (nl.a1, nl.a2, nl.alpha_hat, nl.q1) {
                    (Some(a1), Some(a2), Some(alpha_hat), Some(q1)) => Some(GrowthCertificate {
                        a1,
                        a2,
                        alpha_hat,
                        q1,
                    }),
                    _ => None,
                };
                let sign = match (nl.b1, nl.b2) {
                    (Some(b1), Some(b2)) => Some(SignCertificate {
                        b1,
                        b2,
                        omega_hat: nl.omega_hat.unwrap_or(0.0),
                    }),
                    _ => None,
                };
                let lipschitz = nl.c1.map(|c1| LipschitzCertificate { c1 });
                let linear_gradient = nl.c2.map(|c2| LinearGradientCertificate {
                    c2,
                    rho: ScalarFn::Zero,
                    r_prime: 2.0,
                });
                Ok(ConvectionSpec {
                    f: Nonlinearity::Expression(f),
                    growth,
                    sign,
                    lipschitz,
                    linear_gradient,
                })
            }
            other => Err(Error::Config(format!(
                "unknown nonlinearity kind `{}` (expected zero, example1, example2, linear_gradient, expression)",
                other
            ))),
        }
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            outer_tol: self.solver.outer_tol,
            outer_max_iter: self.solver.outer_max_iter,
            inner_tol: self.solver.inner_tol,
            inner_max_iter: self.solver.inner_max_iter,
            eps_schedule: self.solver.eps_schedule.clone(),
            initial: None,
            ..SolverConfig::default()
        }
    }

    /// TOML rendering of the effective config; reparses to an equal RunConfig.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self)
            .map_err(|e| Error::Logic(format!("config serialization: {}", e)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[problem]\np = 2.0\nq = 3.0\n";

    #[test]
    fn minimal_config_defaults() {
        let cfg = parse_config_str(MINIMAL).unwrap();
        assert_eq!(cfg.problem.resolution, vec![64]);
        assert_eq!(cfg.problem.mu, "zero");
        assert_eq!(cfg.problem.nonlinearity.kind, "zero");
        assert_eq!(cfg.solver.threads, 1);
        assert_eq!(cfg.solver.outer_tol, 1e-8);
        assert_eq!(cfg.output.dir, "out");
    }

    #[test]
    fn q_not_above_p_names_both() {
        let err = parse_config_str("[problem]\np = 3.0\nq = 2.0\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("1 < p < q"), "{}", msg);
        assert!(msg.contains('3') && msg.contains('2'), "{}", msg);
    }

    #[test]
    fn unknown_key_suggests_nearest() {
        let err = parse_config_str("[problem]\np = 2.0\nqq = 3.0\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("unknown key `problem.qq`"), "{}", msg);
        assert!(msg.contains("did you mean `q`"), "{}", msg);
    }

    #[test]
    fn unknown_section_rejected() {
        let err = parse_config_str("[problem]\np = 2.0\nq = 3.0\n[slover]\nseed = 1\n")
            .unwrap_err();
        assert!(err.to_string().contains("did you mean `solver`"), "{}", err);
    }

    #[test]
    fn round_trip_identity() {
        let text = "\
[problem]
p = 2.0
q = 2.5
domain = [0.0, 1.0]
resolution = [32]
mu = \"x\"

[problem.nonlinearity]
kind = \"example2\"
beta = [0.3]
rho = \"sin(3.141592653589793 * x)\"
rho_bound = 1.0

[solver]
seed = 7
threads = 2
";
        let cfg = parse_config_str(text).unwrap();
        let echoed = cfg.to_toml().unwrap();
        let reparsed = parse_config_str(&echoed).unwrap();
        assert_eq!(cfg, reparsed);
    }

    #[test]
    fn missing_mesh_file_rejected() {
        let err = parse_config_str(
            "[problem]\np = 2.0\nq = 3.0\nmesh_file = \"/nonexistent/m.txt\"\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains("does not exist"), "{}", err);
    }

    #[test]
    fn resolution_dim_mismatch() {
        let err = parse_config_str(
            "[problem]\np = 2.0\nq = 3.0\ndomain = [0.0, 1.0, 0.0, 1.0]\nresolution = [8]\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains("resolution"), "{}", err);
    }

    #[test]
    fn example1_requires_params() {
        let err = parse_config_str(
            "[problem]\np = 2.0\nq = 3.0\n[problem.nonlinearity]\nkind = \"example1\"\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains("requires key `d1`"), "{}", err);
    }

    #[test]
    fn expression_kind_builds() {
        let cfg = parse_config_str(
            "[problem]\np = 2.0\nq = 3.0\n[problem.nonlinearity]\nkind = \"expression\"\nexpr = \"s + g1\"\nc1 = 1.0\nc2 = 1.0\n",
        )
        .unwrap();
        let spec = cfg.build_spec().unwrap();
        assert_eq!(spec.evaluate([0.0, 0.0], 2.0, [3.0, 0.0]).unwrap(), 5.0);
        assert!(spec.lipschitz.is_some() && spec.linear_gradient.is_some());
    }

    #[test]
    fn mu_expression_builds_weight() {
        let cfg = parse_config_str("[problem]\np = 2.0\nq = 3.0\nmu = \"x\"\n").unwrap();
        let mesh = cfg.build_mesh().unwrap();
        let w = cfg.build_weight(&mesh).unwrap();
        assert!((w.max_value() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bad_mu_expression_rejected() {
        let err = parse_config_str("[problem]\np = 2.0\nq = 3.0\nmu = \"x +* 2\"\n").unwrap_err();
        assert!(matches!(err, Error::Config(_)), "{}", err);
    }

    #[test]
    fn domain_2d_builds() {
        let cfg = parse_config_str(
            "[problem]\np = 2.0\nq = 3.0\ndomain = [0.0, 1.0, 0.0, 1.0]\nresolution = [4, 4]\n",
        )
        .unwrap();
        let mesh = cfg.build_mesh().unwrap();
        assert_eq!(mesh.dim, 2);
        assert_eq!(mesh.n_nodes(), 25);
    }
}
