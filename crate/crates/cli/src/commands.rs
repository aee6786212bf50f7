use std::fs;
use std::path::Path;

use clap::Parser;
use lsigma::oracle::{self, grid_biconjugate, search_dual_pairing};
use lsigma::{
    build_g, concave_majorant, norm, sigma_dominates, vector_dual_norm, Distortion, RandomVector, RiskReport,
    VecNorm,
};
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};
use crate::ingest;
use crate::{Cli, Command};

const ORACLE_TOL: f64 = 1e-6;

fn sigma(spec: &str) -> CliResult<Distortion> {
    Ok(spec.parse()?)
}

fn vecnorm(spec: &str) -> CliResult<VecNorm> {
    Ok(spec.parse()?)
}

fn load(base: &Path, path: &Path) -> CliResult<RandomVector> {
    ingest::load(&base.join(path))
}

/// `‖z_i‖` in the dual vector norm as a scalar variable.
fn dual_magnitudes(z: &RandomVector, vn: &VecNorm) -> CliResult<RandomVector> {
    Ok(RandomVector::scalar(z.space().clone(), z.magnitudes(&vn.dual()))?)
}

pub fn run(command: &Command, base: &Path) -> CliResult<Value> {
    match command {
        Command::ValidateDistortion { spec } => {
            let s = sigma(spec)?;
            let normalization = match &s {
                Distortion::Step(st) => Some(st.normalization()),
                _ => None,
            };
            Ok(json!({
                "distortion": s.to_string(),
                "u0": s.u0(),
                "bounded": s.is_bounded(),
                "sup": s.sup(),
                "normalization": normalization,
            }))
        }
        Command::Norm { data, sigma: spec, p, vecnorm: r } => {
            let y = load(base, data)?;
            let (s, vn) = (sigma(spec)?, vecnorm(r)?);
            let value = norm(&y, &s, *p, &vn)?;
            Ok(json!({ "norm": value, "sigma": s.to_string(), "p": p, "vecnorm": vn.to_string() }))
        }
        Command::DualNorm { data, sigma: spec, p, vecnorm: r, envelope_out } => {
            let z = load(base, data)?;
            let (s, vn) = (sigma(spec)?, vecnorm(r)?);
            let cert = vector_dual_norm(&z, &s, *p, &vn)?;
            if let Some(out) = envelope_out {
                let path = base.join(out);
                fs::write(&path, ingest::to_json(&cert.envelope)).map_err(|source| CliError::Io { path, source })?;
            }
            Ok(serde_json::to_value(&cert).expect("finite certificate"))
        }
        Command::Dominates { zp, z, sigma: spec } => {
            let (zp, z) = (load(base, zp)?, load(base, z)?);
            let d = sigma_dominates(&zp, &z, &sigma(spec)?)?;
            Ok(json!({ "dominates": d.holds, "margin": d.margin }))
        }
        Command::Risk { z, y, p, vecnorm: r } => {
            let (z, y) = (load(base, z)?, load(base, y)?);
            let report = RiskReport::new(&z, &y, &vecnorm(r)?, *p)?;
            Ok(serde_json::to_value(&report).expect("finite report"))
        }
        Command::Certify { data, sigma: spec, p, vecnorm: r, oracle, restarts, seed } => {
            certify(&load(base, data)?, &sigma(spec)?, *p, &vecnorm(r)?, *oracle, *restarts, *seed)
        }
        Command::Report { manifest, jobs } => report(&base.join(manifest), *jobs).map(|(v, _)| v),
    }
}

fn certify(
    z: &RandomVector,
    s: &Distortion,
    p: f64,
    vn: &VecNorm,
    with_oracle: bool,
    restarts: usize,
    seed: u64,
) -> CliResult<Value> {
    let cert = vector_dual_norm(z, s, p, vn)?;
    let mags = dual_magnitudes(z, vn)?;
    let dom = sigma_dominates(&cert.envelope, &mags, s)?;
    let mut out = json!({
        "certificate": cert,
        "tight": cert.is_tight(),
        "envelope_dominates": { "dominates": dom.holds, "margin": dom.margin },
    });
    if !with_oracle {
        return Ok(out);
    }
    let n = z.len();
    let mut checks = serde_json::Map::new();
    let mut exceeded = None;
    if n <= oracle::MAX_SEARCH {
        let found = search_dual_pairing(&mags, s, p, restarts, seed)?;
        let holds = found <= cert.dual_value + ORACLE_TOL;
        if !holds {
            exceeded = Some(found);
        }
        checks.insert(
            "search_dual_pairing".into(),
            json!({ "lower_bound": found, "restarts": restarts, "seed": seed, "holds": holds }),
        );
    } else {
        checks.insert("search_dual_pairing".into(), json!({ "skipped": format!("n = {n} > {}", oracle::MAX_SEARCH) }));
    }
    if n <= oracle::MAX_BICONJUGATE {
        let alphas: Vec<f64> = (0..=100).map(|k| k as f64 / 100.0).collect();
        let grid = grid_biconjugate(&mags, s, &alphas, 10_000, 1_000)?;
        let hull = concave_majorant(&build_g(&mags)?, s)?;
        let deviation = alphas
            .iter()
            .zip(&grid)
            .map(|(a, g)| (hull.envelope_at(s, *a) - g).abs())
            .fold(0.0, f64::max);
        checks.insert("grid_biconjugate".into(), json!({ "probes": alphas.len(), "max_deviation": deviation }));
    } else {
        checks.insert(
            "grid_biconjugate".into(),
            json!({ "skipped": format!("n = {n} > {}", oracle::MAX_BICONJUGATE) }),
        );
    }
    out["oracle"] = Value::Object(checks);
    match exceeded {
        Some(found) => Err(CliError::OracleExceeds { found, dual: cert.dual_value, report: out }),
        None => Ok(out),
    }
}

#[derive(Debug, Deserialize)]
struct Manifest {
    jobs: Vec<Vec<String>>,
}

/// Runs every job (an argument list for one subcommand) on a bounded pool.
/// Relative paths inside jobs are resolved against the manifest's folder.
/// Returns the per-job results and the most severe exit code.
pub fn report(manifest: &Path, workers: Option<usize>) -> CliResult<(Value, u8)> {
    let text = fs::read_to_string(manifest).map_err(|source| CliError::Io { path: manifest.to_path_buf(), source })?;
    let parsed: Manifest = serde_json::from_str(&text)
        .map_err(|e| CliError::invalid(format!("{}: bad manifest: {e}", manifest.display())))?;
    let base = manifest.parent().unwrap_or(Path::new("")).to_path_buf();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| CliError::invalid(format!("thread pool: {e}")))?;
    let results: Vec<(Value, u8)> = pool.install(|| {
        parsed
            .jobs
            .par_iter()
            .map(|args| {
                let outcome = Cli::try_parse_from(std::iter::once("lsigma".to_string()).chain(args.iter().cloned()))
                    .map_err(|e| CliError::invalid(e.to_string().trim().to_string()))
                    .and_then(|cli| match cli.command {
                        Command::Report { .. } => Err(CliError::invalid("nested report jobs are not allowed")),
                        cmd => run(&cmd, &base),
                    });
                match outcome {
                    Ok(v) => (json!({ "args": args, "exit_code": 0, "result": v }), 0),
                    Err(e) => {
                        let code = e.exit_code();
                        let mut entry = json!({ "args": args, "exit_code": code, "error": e.to_string() });
                        if let Some(payload) = e.payload() {
                            entry["result"] = payload;
                        }
                        (entry, code)
                    }
                }
            })
            .collect()
    });
    let code = results.iter().map(|(_, c)| *c).max().unwrap_or(0);
    let failed = results.iter().filter(|(_, c)| *c != 0).count();
    let jobs: Vec<Value> = results.into_iter().map(|(v, _)| v).collect();
    Ok((json!({ "jobs": jobs, "failed": failed }), code))
}
