use std::path::{Path, PathBuf};

use htype_core::geodesics::Trajectory;
use htype_core::{
    catalog_entry, curvature_report, geodesic_closed_form, integrate_hamiltonian,
    search_composition_2d, validate_h_type_seeded, AlgebraSpec, HTypeAlgebra, ValidationReport,
    Vector,
};
use serde::Serialize;

use crate::args::{CatalogArgs, CurvatureArgs, GeodesicArgs, Method, SearchArgs, Source, ValidateArgs, Validation};
use crate::output::{emit, json, write_atomic};
use crate::{status, CliError};

fn load(source: &Source) -> Result<HTypeAlgebra, CliError> {
    if let Some(c) = &source.catalog {
        return catalog_entry(c.name, c.n)
            .map(|(alg, _)| alg)
            .map_err(|e| CliError::Usage(e.to_string()));
    }
    let path = source.algebra.as_ref().expect("clap enforces one source");
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    let spec: AlgebraSpec = serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        CliError::Usage(format!("malformed algebra spec {} at field `{field}`: {}", path.display(), e.inner()))
    })?;
    HTypeAlgebra::from_spec(&spec)
        .map_err(|e| CliError::Usage(format!("invalid algebra spec {}: {e}", path.display())))
}

fn run_validation(alg: &HTypeAlgebra, v: &Validation) -> Result<ValidationReport, CliError> {
    validate_h_type_seeded(alg, v.trials, v.tol, v.seed).map_err(|e| CliError::Usage(e.to_string()))
}

#[derive(Serialize)]
struct ValidateOutput<'a> {
    algebra: &'a str,
    #[serde(flatten)]
    report: &'a ValidationReport,
}

/// Validation gate for commands that assume an H-type algebra; prints the report on failure.
fn require_h_type(alg: &HTypeAlgebra, v: &Validation) -> Result<(), CliError> {
    let report = run_validation(alg, v)?;
    if report.passed {
        return Ok(());
    }
    let out = ValidateOutput { algebra: alg.label(), report: &report };
    emit(None, &json(&out))?;
    Err(CliError::Failed(format!("{} is not a general H-type algebra", alg.label())))
}

pub fn catalog(args: &CatalogArgs) -> Result<u8, CliError> {
    let (alg, _) = catalog_entry(args.entry.name, args.entry.n).map_err(|e| CliError::Usage(e.to_string()))?;
    emit(args.out.as_deref(), &json(&alg.to_spec()))?;
    Ok(status::OK)
}

pub fn validate(args: &ValidateArgs) -> Result<u8, CliError> {
    let alg = load(&args.source)?;
    let report = run_validation(&alg, &args.validation)?;
    let out = ValidateOutput { algebra: alg.label(), report: &report };
    emit(args.out.as_deref(), &json(&out))?;
    Ok(if report.passed { status::OK } else { status::FAILED })
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

pub fn geodesic(args: &GeodesicArgs) -> Result<u8, CliError> {
    let alg = load(&args.source)?;
    if args.v0.len() != alg.n() {
        return Err(CliError::Usage(format!("--v0 needs {} components, got {}", alg.n(), args.v0.len())));
    }
    if args.theta.len() != alg.m() {
        return Err(CliError::Usage(format!("--theta needs {} components, got {}", alg.m(), args.theta.len())));
    }
    if !(args.s_max > 0.0 && args.s_max.is_finite()) || args.samples == 0 {
        return Err(CliError::Usage("--s-max must be positive and --samples at least 1".into()));
    }
    if !(args.dt > 0.0 && args.dt.is_finite()) {
        return Err(CliError::Usage("--dt must be positive".into()));
    }
    require_h_type(&alg, &args.validation)?;
    let v0 = Vector::from_column_slice(&args.v0);
    let theta = Vector::from_column_slice(&args.theta);
    let n = args.samples;
    let fail = |e: htype_core::GeodesicError| CliError::Failed(e.to_string());
    let (trajectory, method) = match args.method {
        Method::Closed => {
            let s: Vec<f64> = (1..=n).map(|k| args.s_max * k as f64 / n as f64).collect();
            (geodesic_closed_form(&alg, &v0, &theta, &s).map_err(fail)?, "closed_form")
        }
        Method::Rk4 => {
            let stride = (args.s_max / n as f64 / args.dt - 1e-9).ceil().max(1.0) as usize;
            let dt = args.s_max / (n * stride) as f64;
            let full = integrate_hamiltonian(&alg, &v0, &theta, args.s_max, dt).map_err(fail)?;
            let samples = full.samples.iter().step_by(stride).cloned().collect();
            (Trajectory { samples, ..full }, "rk4")
        }
    };
    let mut csv = Vec::new();
    trajectory.write_csv(&mut csv).map_err(|e| CliError::Usage(e.to_string()))?;
    write_atomic(&args.out, &csv)?;
    write_atomic(&sidecar_path(&args.out), &json(&trajectory.meta(&alg, method)))?;
    Ok(status::OK)
}

pub fn curvature(args: &CurvatureArgs) -> Result<u8, CliError> {
    let alg = load(&args.source)?;
    require_h_type(&alg, &args.validation)?;
    let report = curvature_report(&alg, args.planes, args.validation.seed)
        .map_err(|e| CliError::Failed(e.to_string()))?;
    emit(args.out.as_deref(), &json(&report))?;
    Ok(status::OK)
}

pub fn compose_search(args: &SearchArgs) -> Result<u8, CliError> {
    let outcome = search_composition_2d(
        args.phi_index as usize,
        args.lambda_index as usize,
        args.restarts as usize,
        args.seed,
    )
    .map_err(|e| CliError::Usage(e.to_string()))?;
    emit(args.out.as_deref(), &json(&outcome.verdict()))?;
    Ok(if outcome.is_found() { status::OK } else { status::FAILED })
}
