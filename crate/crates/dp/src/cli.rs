//! Subcommand dispatch and report emission.
//!
//! Every subcommand prints a single JSON report (schema 1) to standard
//! output embedding the effective config, mesh statistics, and the
//! eigenvalues and certificate margins it used; artifacts (solution fields,
//! CSV histories) go to the output directory. Exit codes: 0 success,
//! 1 configuration error, 2 check failure, 3 solver non-convergence.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::json;

use crate::config::RunConfig;
use crate::convection::{audit_certificates, certificate_verdict, AuditOptions};
use crate::eigen::{first_eigenvalue, EigenOpts};
use crate::error::{Error, Result};
use crate::fem::{io as fem_io, BoxDomain, Mesh};
use crate::orlicz;
use crate::solver::{self, cases, measure_contraction, picard_solve, MmsCase};

#[derive(Debug, Clone, Default)]
pub struct CliOptions {
    /// Omit the timestamp field so reports are byte-reproducible.
    pub no_timestamp: bool,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out_dir: Option<String>,
}

/// Run one subcommand. Returns the process exit code; hard errors (config,
/// I/O, solver failures raised as errors) surface as `Err` and are mapped
/// to exit codes by the caller.
pub fn run(
    subcommand: &str,
    base: &RunConfig,
    opts: &CliOptions,
    stdout: &mut dyn Write,
) -> Result<i32> {
    let mut cfg = base.clone();
    if let Some(seed) = opts.seed {
        cfg.solver.seed = seed;
    }
    if let Some(threads) = opts.threads {
        if threads == 0 {
            return Err(Error::Config("threads must be >= 1".into()));
        }
        cfg.solver.threads = threads;
    }
    if let Some(dir) = &opts.out_dir {
        cfg.output.dir = dir.clone();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.solver.threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {}", e)))?;
    // buffer the report inside the pool so the writer need not be Send
    let mut buf = Vec::new();
    let code = pool.install(|| dispatch(subcommand, &cfg, opts, &mut buf))?;
    stdout.write_all(&buf)?;
    Ok(code)
}

fn dispatch(
    subcommand: &str,
    cfg: &RunConfig,
    opts: &CliOptions,
    stdout: &mut dyn Write,
) -> Result<i32> {
    match subcommand {
        "solve" => cmd_solve(cfg, opts, stdout),
        "eig" => cmd_eig(cfg, opts, stdout),
        "check" => cmd_check(cfg, opts, stdout),
        "norms" => cmd_norms(cfg, opts, stdout),
        "mms" => cmd_mms(cfg, opts, stdout),
        "contraction" => cmd_contraction(cfg, opts, stdout),
        other => Err(Error::Config(format!("unknown subcommand `{}`", other))),
    }
}

fn report_head(
    subcommand: &str,
    cfg: &RunConfig,
    opts: &CliOptions,
    mesh: Option<&Mesh>,
) -> Result<serde_json::Map<String, serde_json::Value>> {
    let mut map = serde_json::Map::new();
    map.insert("schema".into(), json!(1));
    map.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    map.insert("subcommand".into(), json!(subcommand));
    if !opts.no_timestamp {
        let secs = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        map.insert("timestamp".into(), json!(secs));
    }
    map.insert(
        "config".into(),
        serde_json::to_value(cfg).map_err(|e| Error::Logic(format!("config to json: {}", e)))?,
    );
    map.insert(
        "config_toml".into(),
        json!(cfg.to_toml()?),
    );
    if let Some(mesh) = mesh {
        map.insert(
            "mesh".into(),
            json!({
                "dim": mesh.dim,
                "nodes": mesh.n_nodes(),
                "elements": mesh.n_elements(),
                "boundary_nodes": mesh.boundary.len(),
                "h": mesh.mesh_size(),
            }),
        );
    }
    Ok(map)
}

fn emit(stdout: &mut dyn Write, map: serde_json::Map<String, serde_json::Value>) -> Result<()> {
    let text = serde_json::to_string_pretty(&serde_json::Value::Object(map))
        .map_err(|e| Error::Logic(format!("report serialization: {}", e)))?;
    writeln!(stdout, "{}", text)?;
    Ok(())
}

fn out_path(cfg: &RunConfig, name: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(&cfg.output.dir)?;
    Ok(Path::new(&cfg.output.dir).join(name))
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<serde_json::Value> {
    serde_json::to_value(v).map_err(|e| Error::Logic(format!("report serialization: {}", e)))
}

fn cmd_solve(cfg: &RunConfig, opts: &CliOptions, stdout: &mut dyn Write) -> Result<i32> {
    let mesh = cfg.build_mesh()?;
    let params = cfg.build_params(&mesh)?;
    let spec = cfg.build_spec()?;
    let solver_cfg = cfg.solver_config();
    let report = picard_solve(&spec, &params, &solver_cfg)?;
    let mut map = report_head("solve", cfg, opts, Some(&mesh))?;
    map.insert("lambda_2".into(), json!(report.lambda_2));
    map.insert("report".into(), to_json(&report)?);
    map.insert(
        "solution_norms".into(),
        json!({
            "l2": orlicz::lp_norm(&report.solution, 2.0)?,
            "h1_semi": orlicz::lp_norm_gradient(&report.solution, 2.0)?,
            "luxemburg": orlicz::luxemburg_norm(
                &report.solution, &params.weight, &params.exps)?,
        }),
    );
    if cfg.output.write_solution {
        let path = out_path(cfg, "solution.field")?;
        fem_io::write_field(&path, &report.solution)?;
        map.insert("solution_file".into(), json!(path.display().to_string()));
    }
    if cfg.output.write_history {
        let path = out_path(cfg, "history.csv")?;
        let mut csv = String::from("k,increment_norm,residual_norm,energy\n");
        for rec in &report.history {
            csv.push_str(&format!(
                "{},{:e},{:e},{:e}\n",
                rec.k, rec.increment_norm, rec.residual_norm, rec.energy
            ));
        }
        std::fs::write(&path, csv)?;
        map.insert("history_file".into(), json!(path.display().to_string()));
    }
    let converged = report.converged;
    emit(stdout, map)?;
    Ok(if converged { 0 } else { 3 })
}

fn cmd_eig(cfg: &RunConfig, opts: &CliOptions, stdout: &mut dyn Write) -> Result<i32> {
    let mesh = cfg.build_mesh()?;
    let eopts = EigenOpts {
        power_tol: cfg.eig.tol,
        power_max_iter: cfg.eig.max_iter,
        descent_tol: cfg.eig.tol,
        descent_max_iter: cfg.eig.max_iter,
    };
    let result = first_eigenvalue(&mesh, cfg.eig.r, &eopts)?;
    let mut map = report_head("eig", cfg, opts, Some(&mesh))?;
    map.insert("result".into(), to_json(&result)?);
    if cfg.eig.write_eigenfunction {
        let path = out_path(cfg, "eigenfunction.field")?;
        fem_io::write_field(&path, &result.eigenfunction)?;
        map.insert("eigenfunction_file".into(), json!(path.display().to_string()));
    }
    emit(stdout, map)?;
    Ok(0)
}

fn cmd_check(cfg: &RunConfig, opts: &CliOptions, stdout: &mut dyn Write) -> Result<i32> {
    let mesh = cfg.build_mesh()?;
    let exps = cfg.exponents()?;
    let spec = cfg.build_spec()?;
    let lambda_2 = first_eigenvalue(&mesh, 2.0, &EigenOpts::default())?.lambda;
    let lambda_p = if exps.p == 2.0 {
        lambda_2
    } else {
        first_eigenvalue(&mesh, exps.p, &EigenOpts::default())?.lambda
    };
    let audit_opts = AuditOptions {
        budget: cfg.check.budget,
        seed: cfg.solver.seed,
        range: cfg.check.range,
    };
    let audit = audit_certificates(&spec, &exps, &mesh, &audit_opts)?;
    let verdict = certificate_verdict(&spec, &exps, lambda_p, lambda_2);
    let pass = audit.passed()
        && verdict.existence.as_ref().map_or(true, |v| v.passes)
        && verdict.uniqueness.as_ref().map_or(true, |v| v.passes);
    let mut map = report_head("check", cfg, opts, Some(&mesh))?;
    map.insert("lambda_p".into(), json!(lambda_p));
    map.insert("lambda_2".into(), json!(lambda_2));
    map.insert("audit".into(), to_json(&audit)?);
    map.insert("verdict".into(), to_json(&verdict)?);
    map.insert("pass".into(), json!(pass));
    emit(stdout, map)?;
    Ok(if pass { 0 } else { 2 })
}

fn cmd_norms(cfg: &RunConfig, opts: &CliOptions, stdout: &mut dyn Write) -> Result<i32> {
    let mesh = cfg.build_mesh()?;
    let field_path = cfg
        .norms
        .field_file
        .as_ref()
        .ok_or_else(|| Error::Config("norms requires norms.field_file".into()))?;
    let field = fem_io::read_field(Path::new(field_path), &mesh)?;
    let exps = cfg.exponents()?;
    let weight = cfg.build_weight(&mesh)?;
    let sandwich = orlicz::check_sandwich(&field, &weight, &exps, orlicz::Mode::Value)?;
    let mut map = report_head("norms", cfg, opts, Some(&mesh))?;
    map.insert(
        "norms".into(),
        json!({
            "modular": orlicz::modular(&field, &weight, &exps)?,
            "luxemburg": orlicz::luxemburg_norm(&field, &weight, &exps)?,
            "lp": orlicz::lp_norm(&field, exps.p)?,
            "weighted_seminorm": orlicz::weighted_seminorm(&field, &weight, exps.q)?,
            "critical_exponent": exps.critical_exponent().ok(),
            "sandwich": to_json(&sandwich)?,
        }),
    );
    emit(stdout, map)?;
    Ok(0)
}

fn mms_case(name: &str) -> Result<MmsCase> {
    match name {
        "poisson1d" => Ok(cases::poisson_1d()),
        "doublephase1d" => Ok(cases::double_phase_1d()),
        "zero" => Ok(cases::zero_1d()),
        other => Err(Error::Config(format!(
            "unknown mms case `{}` (expected poisson1d, doublephase1d, zero)",
            other
        ))),
    }
}

fn cmd_mms(cfg: &RunConfig, opts: &CliOptions, stdout: &mut dyn Write) -> Result<i32> {
    let case = mms_case(&cfg.mms.case)?;
    let table = solver::mms_study(
        &case,
        BoxDomain::unit_interval(),
        cfg.mms.base_resolution,
        cfg.mms.levels,
        &cfg.solver_config(),
    )?;
    let mut map = report_head("mms", cfg, opts, None)?;
    map.insert("table".into(), to_json(&table)?);
    if cfg.output.write_history {
        let path = out_path(cfg, "mms.csv")?;
        let mut csv = String::from("cells,h,l2_error,h1_error\n");
        for level in &table.levels {
            csv.push_str(&format!(
                "{},{:e},{:e},{:e}\n",
                level.cells, level.h, level.l2_error, level.h1_error
            ));
        }
        std::fs::write(&path, csv)?;
        map.insert("table_file".into(), json!(path.display().to_string()));
    }
    emit(stdout, map)?;
    Ok(0)
}

fn cmd_contraction(cfg: &RunConfig, opts: &CliOptions, stdout: &mut dyn Write) -> Result<i32> {
    let mesh = cfg.build_mesh()?;
    let params = cfg.build_params(&mesh)?;
    let spec = cfg.build_spec()?;
    let stats = measure_contraction(
        &spec,
        &params,
        &cfg.solver_config(),
        cfg.contraction.trials,
        cfg.solver.seed,
    )?;
    let mut map = report_head("contraction", cfg, opts, Some(&mesh))?;
    map.insert("stats".into(), to_json(&stats)?);
    let converged = stats.all_converged;
    emit(stdout, map)?;
    Ok(if converged { 0 } else { 3 })
}

/// Render an error as the structured JSON object emitted on stderr.
pub fn error_json(err: &Error) -> String {
    let kind = match err {
        Error::Config(_) => "config",
        Error::Logic(_) => "logic",
        Error::Numerical(_) => "numerical",
        Error::Singular(_) => "singular",
        Error::Evaluation(_) => "evaluation",
        Error::InvariantViolation(_) => "invariant",
        Error::Io(_) => "io",
    };
    json!({ "error": kind, "message": err.to_string() }).to_string()
}
