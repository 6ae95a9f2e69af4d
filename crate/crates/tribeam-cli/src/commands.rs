use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde_json::{json, Map, Value};
use tribeam::analysis::{
    convergence_study, log_log_slope, model_curve, noise_sweep, noise_threshold, region_map,
    region_row, StateRow, Transition,
};
use tribeam::correlations::{entanglement_report, kl_divergence_2, kl_divergence_3, steering_report};
use tribeam::ghzw::{ghzw_from_marginals, kl_to_ghzw};
use tribeam::model::{check_physical, seralian_bounds, StateInvariants};
use tribeam::photonics::{
    analyze_histogram, em_reconstruct, sample_photons, simulate_counts, AnalysisOrder, EmOptions,
    PhotocountHistogram, PipelineOptions,
};
use tribeam::{Error, Warning};

use crate::config::{parse_order, DetectorConfig, SweepConfig};
use crate::output::{flat, modes_tag, write_json, write_rows, Failure, Manifest, BOUNDARY_CONVENTION};
use crate::Common;

pub const EXIT_DOMAIN: u8 = 2;
pub const EXIT_CONVERGENCE: u8 = 3;
pub const EXIT_IO: u8 = 4;

pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::Domain { .. } | Error::Range { .. } => EXIT_DOMAIN,
                Error::Fit { .. } | Error::Numerical(_) => EXIT_CONVERGENCE,
                Error::Io(_) => EXIT_IO,
                Error::Config(_) | Error::Data(_) => 1,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return EXIT_IO;
        }
        if let Some(e) = cause.downcast_ref::<csv::Error>() {
            if e.is_io_error() {
                return EXIT_IO;
            }
        }
    }
    1
}

fn print_json(v: &Value) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v)?;
    writeln!(out)?;
    Ok(())
}

fn resolve(c: &Common, usability_tolerance: bool) -> Result<(SweepConfig, PathBuf)> {
    let mut cfg = SweepConfig::load(c.config.as_deref())?;
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(o) = &c.order {
        cfg.orders = parse_order(o)?.iter().map(|o| o.moments() as u8).collect();
    }
    if let Some(g) = c.grid {
        cfg.grid = g;
    }
    if usability_tolerance {
        if let Some(t) = c.tolerance {
            cfg.usability_threshold = t;
        }
    }
    cfg.validate()?;
    let out = c.out.clone().or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("tribeam-out"));
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    Ok((cfg, out))
}

/// Rejects states outside the physical domain, reporting the failing margin.
fn require_physical(inv: &StateInvariants) -> Result<()> {
    let r = check_physical(inv);
    let fail = if !r.mu1_range {
        Some(("mu1 outside (0, 1]", r.mu1_margin))
    } else if !r.mu_ordering {
        Some(("mu2 outside [mu1^2, mu1]", r.ordering_margin))
    } else if !r.delta2_window {
        Some(("delta2 outside the seralian window", r.delta2_margin))
    } else {
        None
    };
    match fail {
        Some((reason, margin)) => Err(Error::Domain { reason: reason.into(), margin }.into()),
        None => Ok(()),
    }
}

pub fn classify(mu1: f64, mu2: f64, delta2: Option<f64>) -> Result<u8> {
    let mut report = flat(&region_row(mu1, mu2, mu1, mu2)?)?;
    report.remove("x");
    report.remove("y");
    report.insert("boundary_convention".into(), BOUNDARY_CONVENTION.into());
    if let Some(d) = delta2 {
        let inv = StateInvariants::new(mu1, mu2, d);
        require_physical(&inv)?;
        let window = seralian_bounds(mu1, mu2)?;
        let row = StateRow::from_invariants(&inv, window)?;
        report.insert("point".into(), serde_json::to_value(row)?);
    }
    print_json(&Value::Object(report))?;
    Ok(0)
}

pub fn measures(mu1: f64, mu2: f64, delta2: Option<f64>) -> Result<u8> {
    let inv = match delta2 {
        Some(d) => {
            let inv = StateInvariants::new(mu1, mu2, d);
            require_physical(&inv)?;
            inv.completed()?
        }
        None => ghzw_from_marginals(mu1, mu2)?.invariants(),
    };
    let mu3 = inv.mu3.expect("completed invariants carry μ₃");
    let report = json!({
        "mu1": inv.mu1,
        "mu2": inv.mu2,
        "delta2": inv.delta2,
        "mu3": mu3,
        "delta2_window": seralian_bounds(mu1, mu2)?,
        "entanglement": entanglement_report(&inv)?,
        "steering": steering_report(&inv)?,
        "h2": kl_divergence_2(mu1, mu2)?,
        "h3": kl_divergence_3(mu1, mu2, mu3)?,
        "h_ghzw": kl_to_ghzw(&inv)?,
    });
    print_json(&report)?;
    Ok(0)
}

fn failure(manifest: &mut Manifest, file: &str, point: Value, err: impl std::fmt::Display) {
    manifest.failures.push(Failure {
        file: file.into(),
        point,
        error: err.to_string(),
    });
}

fn state_columns(row: &mut Map<String, Value>, state: Option<&StateRow>) -> Result<()> {
    if let Some(s) = state {
        row.extend(flat(s)?);
    }
    Ok(())
}

pub fn sweep(c: &Common) -> Result<u8> {
    let (cfg, out) = resolve(c, true)?;
    let orders = cfg.analysis_orders()?;
    let mut manifest = Manifest::new("sweep", Some(cfg.seed));

    for (name, spec, what) in [
        ("regions_purities.csv", cfg.purity_grid(), "regions and measure bounds over (mu1, mu2)"),
        ("regions_rotated.csv", cfg.rotated_grid(), "regions and measure bounds over x=(mu1+mu2)/2, y=(mu1-mu2)/2"),
    ] {
        eprintln!("region map {name}");
        let rows: Vec<_> = region_map(&spec)?.iter().map(flat).collect::<Result<_>>()?;
        manifest.files.push(write_rows(&out, name, what, &rows)?);
    }

    for &m in &cfg.modes {
        let template = cfg.model(m, 0.0);
        for &o in &orders {
            let name = format!("curve_{}_order{}.csv", modes_tag(m), o.moments());
            let mut rows = Vec::new();
            for (n, p) in cfg.noise.iter().zip(model_curve(&template, &cfg.noise, o)) {
                match p {
                    Ok(p) => rows.push(flat(&p)?),
                    Err(e) => failure(&mut manifest, &name, json!({"modes": m, "noise": n}), e),
                }
            }
            let what = format!("model curve against noise, M = {m}, order {}", o.moments());
            manifest.files.push(write_rows(&out, &name, &what, &rows)?);
        }
    }

    let mut rows = Vec::new();
    for &m in &cfg.modes {
        let template = cfg.model(m, 0.0);
        for w in Transition::ALL {
            let order = w.default_order();
            let noise = match noise_threshold(&template, w, order, cfg.max_noise) {
                Ok(c) => c.noise,
                Err(e) => {
                    failure(&mut manifest, "thresholds.csv", json!({"modes": m, "transition": w.label()}), e);
                    continue;
                }
            };
            rows.push(flat(&json!({
                "modes": m,
                "transition": w.label(),
                "order": order.moments(),
                "noise": noise,
            }))?);
        }
    }
    manifest.files.push(write_rows(&out, "thresholds.csv", "noise level where each transition occurs (empty: none below max_noise)", &rows)?);

    if !cfg.mc_noise.is_empty() {
        let settings = cfg.settings()?;
        for (mi, &m) in cfg.modes.iter().enumerate() {
            eprintln!("monte carlo M = {m}");
            let name = format!("mc_{}.csv", modes_tag(m));
            let mut rows = Vec::new();
            let s = tribeam::analysis::SimulationSettings {
                seed: tribeam::analysis::derive_seed(cfg.seed, 1 << 32 | mi as u64),
                ..settings.clone()
            };
            for (n, p) in cfg.mc_noise.iter().zip(noise_sweep(&cfg.model(m, 0.0), &cfg.mc_noise, &s)) {
                let p = match p {
                    Ok(p) => p,
                    Err(e) => {
                        failure(&mut manifest, &name, json!({"modes": m, "noise": n}), e);
                        continue;
                    }
                };
                for o in &p.orders {
                    let mut row = flat(&json!({
                        "noise": p.noise,
                        "modes": p.modes,
                        "realizations": p.realizations,
                        "seed": p.seed,
                        "order": o.order.moments(),
                        "usable": o.usable,
                        "relative_error": o.relative_error,
                        "failure_rate": o.failure_rate,
                        "photon_r12": p.photon_r12,
                        "photon_fano": p.photon_fano,
                        "r12": p.r12,
                        "mu1_err": o.errors.map(|e| e.mu1),
                        "mu2_err": o.errors.map(|e| e.mu2),
                        "delta2_err": o.errors.map(|e| e.delta2),
                        "mu3_err": o.errors.and_then(|e| e.mu3),
                        "error": o.error,
                    }))?;
                    state_columns(&mut row, o.state.as_ref())?;
                    rows.push(row);
                }
            }
            let what = format!("Monte Carlo estimates with bootstrap errors, M = {m}");
            manifest.files.push(write_rows(&out, &name, &what, &rows)?);
        }
    }

    let path = manifest.write(&out)?;
    eprintln!("wrote {}", path.display());
    Ok(0)
}

pub fn convergence(c: &Common) -> Result<u8> {
    let (cfg, out) = resolve(c, true)?;
    let settings = cfg.settings()?;
    let mut manifest = Manifest::new("convergence", Some(cfg.seed));
    let mut rows = Vec::new();
    let mut slopes = Map::new();
    for (mi, &m) in cfg.modes.iter().enumerate() {
        eprintln!("convergence M = {m}");
        let s = tribeam::analysis::SimulationSettings {
            seed: tribeam::analysis::derive_seed(cfg.seed, mi as u64),
            ..settings.clone()
        };
        let study = match convergence_study(&cfg.model(m, cfg.convergence_noise), &cfg.sizes, &s) {
            Ok(r) => r,
            Err(e) => {
                failure(&mut manifest, "convergence.csv", json!({"modes": m}), e);
                continue;
            }
        };
        let (ns, errs): (Vec<u64>, Vec<f64>) = study
            .iter()
            .filter(|r| r.order == AnalysisOrder::Second)
            .filter_map(|r| r.mu1_err.map(|e| (r.realizations, e)))
            .unzip();
        slopes.insert(modes_tag(m), log_log_slope(&ns, &errs).ok().into());
        for r in study {
            let mut row = Map::new();
            row.insert("modes".into(), m.into());
            row.insert("noise".into(), cfg.convergence_noise.into());
            row.extend(flat(&r)?);
            rows.push(row);
        }
    }
    manifest.files.push(write_rows(
        &out,
        "convergence.csv",
        "usability of each analysis order against the number of realizations",
        &rows,
    )?);
    manifest.summary = json!({
        "usability_threshold": cfg.usability_threshold,
        "mu1_error_slope": slopes,
    });
    manifest.write(&out)?;
    Ok(0)
}

fn write_histogram(dir: &Path, name: &str, hist: &PhotocountHistogram) -> Result<()> {
    let path = dir.join(name);
    let mut w = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
    hist.write_csv(&mut w)?;
    w.flush().with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn simulate(c: &Common, noise: f64, modes: Option<f64>, realizations: Option<u64>, ideal: bool) -> Result<u8> {
    let (mut cfg, out) = resolve(c, true)?;
    if ideal {
        cfg.detectors = DetectorConfig::ideal();
    }
    let model = cfg.model(modes.unwrap_or(cfg.modes[0]), noise);
    let n = realizations.unwrap_or(cfg.realizations);
    let specs = cfg.detectors.specs();
    let photons = sample_photons(&model, n, cfg.seed)?;
    let counts = simulate_counts(&model, &specs, n, cfg.seed)?;
    let mut manifest = Manifest::new("simulate", Some(cfg.seed));
    for (name, hist, what) in [
        ("photons.csv", &photons, "photon-number histogram before detection"),
        ("counts.csv", &counts, "photocount histogram"),
    ] {
        write_histogram(&out, name, hist)?;
        manifest.files.push(crate::output::FileEntry {
            path: name.into(),
            description: what.into(),
            rows: hist.len(),
            columns: ["c1", "c2", "c3", "count"].map(String::from).to_vec(),
        });
    }
    manifest.summary = json!({
        "model": model,
        "detectors": specs,
        "realizations": n,
    });
    manifest.write(&out)?;
    Ok(0)
}

pub fn reconstruct(c: &Common, input: &Path, modes: Option<f64>, max_iter: usize, ideal: bool) -> Result<u8> {
    let (mut cfg, out) = resolve(c, false)?;
    if ideal {
        cfg.detectors = DetectorConfig::ideal();
    }
    let specs = cfg.detectors.specs();
    let file = File::open(input).with_context(|| format!("opening {}", input.display()))?;
    let hist = PhotocountHistogram::read_csv(BufReader::new(file))?;
    let mut manifest = Manifest::new("reconstruct", Some(cfg.seed));

    let mut em_opts = EmOptions {
        max_iter,
        ..EmOptions::default()
    };
    if let Some(t) = c.tolerance {
        em_opts.tol = t;
    }
    let em = em_reconstruct(&hist, &specs, &em_opts)?;
    let rows: Vec<_> = em
        .distribution
        .iter()
        .filter(|&(_, p)| p > 0.0)
        .map(|(n, p)| flat(&json!({"n1": n[0], "n2": n[1], "n3": n[2], "probability": p})))
        .collect::<Result<_>>()?;
    manifest.files.push(write_rows(&out, "distribution.csv", "reconstructed photon-number distribution (nonzero cells)", &rows)?);

    let mut opts = PipelineOptions::new(specs, modes.unwrap_or(cfg.modes[0]));
    opts.orders = cfg.analysis_orders()?;
    opts.bootstrap = cfg.bootstrap;
    opts.seed = cfg.seed;
    opts.usability_threshold = cfg.usability_threshold;
    match analyze_histogram(&hist, &opts) {
        Ok(a) => {
            let errs = a.moments.std_errors.clone().unwrap_or_default();
            let rows: Vec<_> = a
                .moments
                .entries
                .iter()
                .map(|(k, v)| {
                    flat(&json!({"k1": k[0], "k2": k[1], "k3": k[2], "moment": v, "std_error": errs.get(k)}))
                })
                .collect::<Result<_>>()?;
            manifest.files.push(write_rows(&out, "moments.csv", "per-mode intensity moments, detection corrected", &rows)?);
            let mut rows = Vec::new();
            for o in &a.orders {
                let mut row = flat(&json!({
                    "order": o.order.moments(),
                    "usable": o.usable,
                    "relative_error": o.relative_error,
                    "failure_rate": o.failure_rate,
                    "mu1_err": o.std_errors.map(|e| e.mu1),
                    "mu2_err": o.std_errors.map(|e| e.mu2),
                    "delta2_err": o.std_errors.map(|e| e.delta2),
                    "mu3_err": o.std_errors.and_then(|e| e.mu3),
                    "error": o.error,
                }))?;
                if let Some(e) = &o.estimate {
                    match StateRow::from_invariants(&e.invariants, e.delta2_window) {
                        Ok(s) => state_columns(&mut row, Some(&s))?,
                        Err(err) => failure(&mut manifest, "estimates.csv", json!({"order": o.order.moments()}), err),
                    }
                }
                rows.push(row);
            }
            manifest.files.push(write_rows(&out, "estimates.csv", "invariants and measures per analysis order", &rows)?);
        }
        Err(e) => failure(&mut manifest, "moments.csv", Value::Null, e),
    }

    let converged = !em.warnings.iter().any(|w| matches!(w, Warning::Convergence { .. }));
    manifest.summary = json!({
        "realizations": hist.total(),
        "detectors": specs,
        "em_iterations": em.iterations,
        "em_converged": converged,
        "em_log_likelihood": em.log_likelihood.last(),
        "cutoffs": em.distribution.cutoffs(),
        "warnings": em.warnings,
    });
    write_json(&out.join("em_log_likelihood.json"), &em.log_likelihood)?;
    manifest.write(&out)?;
    if converged {
        Ok(0)
    } else {
        eprintln!("EM did not converge in {} iterations", em.iterations);
        Ok(EXIT_CONVERGENCE)
    }
}
