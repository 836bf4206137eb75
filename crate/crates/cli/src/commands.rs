use std::io::{Read, Write};
use std::path::Path;
use std::time::Instant;

use phgen::ctrb::{canonical_witness, kalman_matrix, pbh_check, rank_svd};
use phgen::experiments::{
    distance_to_uncontrollability, run_genericity_trial, run_nowhere_density_probe, run_prop1,
    GridSpec, ProbeReport, TrialOptions,
};
use phgen::io::{read_json_lines, system_to_json, AnySystem};
use phgen::linalg::hermitian_eigenvalues;
use phgen::sample::{derive_seed, sample_ph, sample_uncontrollable, stream_rng};
use phgen::{Complex64, PackedVector, PhSystem, Scalar, ScalarField};
use serde_json::{json, Value};

use crate::config::{ReportFormat, RunConfig};
use crate::CliError;

macro_rules! on_system {
    ($sys:expr, $s:ident => $body:expr) => {
        match $sys {
            AnySystem::Real($s) => $body,
            AnySystem::Complex($s) => $body,
        }
    };
}

macro_rules! on_field {
    ($field:expr, $t:ident => $body:expr) => {
        match $field {
            ScalarField::Real => {
                type $t = f64;
                $body
            }
            ScalarField::Complex => {
                type $t = Complex64;
                $body
            }
        }
    };
}

pub fn dispatch(cfg: &RunConfig) -> Result<(), CliError> {
    match cfg.subcommand.as_str() {
        "validate" => validate(cfg),
        "witness" => witness(cfg),
        "pack" => pack(cfg),
        "unpack" => unpack(cfg),
        "sample" => sample(cfg),
        "check" => check(cfg),
        "mc-genericity" => mc_genericity(cfg),
        "perturb-probe" => perturb_probe(cfg),
        "dist-unctrb" => dist_unctrb(cfg),
        "prop1" => prop1(cfg),
        other => Err(CliError::Usage(format!("unknown subcommand `{other}`"))),
    }
}

fn read_text(path: Option<&Path>) -> Result<String, CliError> {
    let mut text = String::new();
    match path {
        Some(p) if p != Path::new("-") => {
            text = std::fs::read_to_string(p)?;
        }
        _ => {
            std::io::stdin().read_to_string(&mut text)?;
        }
    }
    Ok(text)
}

fn parse_json(text: &str) -> Result<Value, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Domain(e.into()))
}

fn read_system(cfg: &RunConfig) -> Result<AnySystem, CliError> {
    let v = parse_json(&read_text(cfg.input.as_deref())?)?;
    Ok(AnySystem::from_json_with_tol(&v, cfg.structure_tol)?)
}

fn write_to(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

fn write_line(cfg: &RunConfig, v: &Value) -> Result<(), CliError> {
    write_to(cfg.out.as_deref(), &format!("{v}\n"))
}

/// Writes a report according to `format`; the human summary goes to
/// standard output unless a machine-readable stream already uses it.
fn emit_report(cfg: &RunConfig, json: &Value, csv: &str, summary: &str) -> Result<(), CliError> {
    let want_json = cfg.format != ReportFormat::Csv;
    let want_csv = cfg.format != ReportFormat::Json;
    let json_to_stdout = want_json && cfg.out.is_none();
    let csv_to_stdout = want_csv && cfg.csv.is_none();
    if json_to_stdout && csv_to_stdout {
        return Err(CliError::Usage(
            "--format both needs --out or --csv so the two outputs do not share stdout".into(),
        ));
    }
    if want_json {
        let text = serde_json::to_string_pretty(json).map_err(|e| CliError::Domain(e.into()))?;
        write_to(cfg.out.as_deref(), &(text + "\n"))?;
    }
    if want_csv {
        write_to(cfg.csv.as_deref(), csv)?;
    }
    if json_to_stdout || csv_to_stdout {
        eprintln!("{}", summary.trim_end());
    } else {
        println!("{}", summary.trim_end());
    }
    Ok(())
}

fn options(cfg: &RunConfig) -> TrialOptions {
    TrialOptions {
        rel_tol: cfg.rank_tol,
        pbh_tol: cfg.pbh_tol,
        cross_check: cfg.cross_check,
        batch_size: cfg.batch_size,
    }
}

fn validate_one(sys: &AnySystem, cfg: &RunConfig) -> Result<Value, CliError> {
    let min_eig = on_system!(sys, s => hermitian_eigenvalues(s.h())?.first().copied().unwrap_or(f64::NAN));
    if cfg.require_pd {
        on_system!(sys.clone(), s => {
            PhSystem::validate(s, None)?;
        });
    }
    let dims = sys.dims();
    Ok(json!({
        "valid": true,
        "field": sys.field(),
        "n": dims.n,
        "m": dims.m,
        "min_h_eigenvalue": min_eig,
    }))
}

/// Accepts a single system document or one system per line.
fn validate(cfg: &RunConfig) -> Result<(), CliError> {
    let text = read_text(cfg.input.as_deref())?;
    let systems = match serde_json::from_str::<Value>(&text) {
        Ok(v) => vec![AnySystem::from_json_with_tol(&v, cfg.structure_tol)?],
        Err(_) => read_json_lines(text.as_bytes())?,
    };
    let mut out = String::new();
    for sys in &systems {
        out.push_str(&validate_one(sys, cfg)?.to_string());
        out.push('\n');
    }
    write_to(cfg.out.as_deref(), &out)
}

fn witness(cfg: &RunConfig) -> Result<(), CliError> {
    let v = on_field!(cfg.field, T => system_to_json(canonical_witness::<T>(cfg.n, cfg.m)?.base()));
    write_line(cfg, &v)
}

fn pack(cfg: &RunConfig) -> Result<(), CliError> {
    let packed = read_system(cfg)?.pack();
    write_line(cfg, &serde_json::to_value(packed).map_err(|e| CliError::Domain(e.into()))?)
}

fn unpack(cfg: &RunConfig) -> Result<(), CliError> {
    let v = parse_json(&read_text(cfg.input.as_deref())?)?;
    let packed: PackedVector<f64> =
        serde_json::from_value(v).map_err(|e| CliError::Domain(e.into()))?;
    write_line(cfg, &AnySystem::unpack(&packed)?.to_json())
}

fn sample(cfg: &RunConfig) -> Result<(), CliError> {
    let spec = cfg.sampler()?;
    let mut text = String::new();
    for i in 0..cfg.count {
        let mut rng = stream_rng(spec.seed, i);
        let line = on_field!(spec.field, T => system_to_json(sample_ph::<T, _>(&spec, &mut rng)?.base()));
        text.push_str(&line.to_string());
        text.push('\n');
    }
    write_to(cfg.out.as_deref(), &text)
}

fn check(cfg: &RunConfig) -> Result<(), CliError> {
    let sys = read_system(cfg)?;
    let (report, pbh) = on_system!(&sys, s => {
        let report = rank_svd(&kalman_matrix(s), cfg.rank_tol)?;
        (report, pbh_check(s, cfg.pbh_tol)?)
    });
    write_line(
        cfg,
        &json!({
            "rank": report.rank,
            "sv": report.singular_values,
            "tol": report.tol_used,
            "controllable": report.controllable,
            "pbh_agrees": pbh == report.controllable,
        }),
    )
}

fn mc_genericity(cfg: &RunConfig) -> Result<(), CliError> {
    let spec = cfg.sampler()?;
    let report = run_genericity_trial(&spec, cfg.trials, &options(cfg))?.with_config(cfg.echo());
    let json = serde_json::to_value(&report).map_err(|e| CliError::Domain(e.into()))?;
    emit_report(cfg, &json, &report.to_csv(), &report.summary())
}

fn probe<T: Scalar<Re = f64>>(base: &PhSystem<T>, cfg: &RunConfig) -> Result<ProbeReport, CliError> {
    Ok(run_nowhere_density_probe(base, &cfg.eps_grid, cfg.trials, cfg.seed, &options(cfg))?)
}

fn perturb_probe(cfg: &RunConfig) -> Result<(), CliError> {
    let report = if cfg.input.is_some() {
        on_system!(read_system(cfg)?, s => probe(&PhSystem::validate(s, None)?, cfg)?)
    } else {
        let spec = cfg.sampler()?;
        let mut rng = stream_rng(derive_seed(spec.seed, "probe-base"), 0);
        on_field!(spec.field, T => probe(&sample_uncontrollable::<T, _>(&spec, cfg.k, &mut rng)?, cfg)?)
    }
    .with_config(cfg.echo());
    let json = serde_json::to_value(&report).map_err(|e| CliError::Domain(e.into()))?;
    emit_report(cfg, &json, &report.to_csv(), &report.summary())
}

fn dist_unctrb(cfg: &RunConfig) -> Result<(), CliError> {
    let sys = read_system(cfg)?;
    let start = Instant::now();
    let grid = GridSpec {
        points_per_axis: cfg.grid_points,
        max_refine_iters: cfg.refine_iters,
    };
    let d = on_system!(&sys, s => distance_to_uncontrollability(s, &grid)?);
    let json = json!({
        "config": cfg.echo(),
        "value": d.value,
        "argmin_re": d.argmin_re,
        "argmin_im": d.argmin_im,
        "box_radius": d.box_radius,
        "evaluations": d.evaluations,
        "wall_time_secs": start.elapsed().as_secs_f64(),
    });
    let csv = format!(
        "value,argmin_re,argmin_im,box_radius,evaluations\n{:e},{},{},{},{}\n",
        d.value, d.argmin_re, d.argmin_im, d.box_radius, d.evaluations
    );
    let summary = format!(
        "distance to uncontrollability <= {:e} at lambda = {} + {}i",
        d.value, d.argmin_re, d.argmin_im
    );
    emit_report(cfg, &json, &csv, &summary)
}

fn prop1(cfg: &RunConfig) -> Result<(), CliError> {
    let report = run_prop1(cfg.i_max, cfg.x)?.with_config(cfg.echo());
    let json = serde_json::to_value(&report).map_err(|e| CliError::Domain(e.into()))?;
    emit_report(cfg, &json, &report.to_csv(), &report.summary())
}
