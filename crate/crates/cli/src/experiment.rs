use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use thiserror::Error;

use nwbound::geometry::{BoxInterval, Oscillation};
use nwbound::simulation::{attach_bounds, empirical_bias, BiasReport, ResolvedBounds};

use crate::config::{self, ConfigError, Resolved};
use crate::output::{render_csv, render_gnuplot, RunManifest, Staging};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numeric(_) => 3,
            RunError::Io(_) => 1,
        }
    }
}

pub struct Loaded {
    pub doc: toml::Table,
    pub seed: u64,
    pub resolved: Resolved,
    pub bounds: ResolvedBounds,
}

/// Loads, overrides and validates, including the per-point bound inputs.
pub fn prepare(path: &Path, overrides: &[String], seed: Option<u64>) -> Result<Loaded, RunError> {
    let mut overrides = overrides.to_vec();
    if let Some(s) = seed {
        overrides.push(format!("ensemble.seed={s}"));
    }
    let (doc, raw) = config::load(path, &overrides)?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("experiment");
    let resolved = raw.resolve(stem)?;
    let first = &resolved.experiments[0];
    let bounds = ResolvedBounds::resolve(first, &resolved.settings).map_err(|e| ConfigError::new("lipschitz", e))?;
    for p in &first.grid {
        bounds
            .spec_at(&first.design, p)
            .map_err(|e| ConfigError::new("lipschitz", e))?;
    }
    Ok(Loaded {
        doc,
        seed: raw.seed(),
        resolved,
        bounds,
    })
}

fn show_box(b: &BoxInterval<f64>) -> String {
    let parts: Vec<String> = b
        .lower()
        .iter()
        .zip(b.upper())
        .map(|(l, u)| format!("[{l}, {u}]"))
        .collect();
    parts.join(" x ")
}

pub fn describe(loaded: &Loaded) -> String {
    let r = &loaded.resolved;
    let e = &r.experiments[0];
    let b = &loaded.bounds;
    let mut s = String::new();
    let designs: Vec<String> = e.design.factors().iter().map(|f| format!("{:?}", f.kind())).collect();
    let functions: Vec<&str> = e.regression.terms().iter().map(|t| t.label).collect();
    let _ = writeln!(s, "name={}", r.name);
    let _ = writeln!(s, "dim={}", e.design.dim());
    let _ = writeln!(s, "design={}", designs.join(" x "));
    let _ = writeln!(s, "regression={}", functions.join(" + "));
    let _ = writeln!(s, "L_f={}", b.l_f);
    let _ = writeln!(s, "L_m={}", b.l_m);
    match b.oscillation {
        Oscillation::Bounded(m) => {
            let _ = writeln!(s, "M={m}");
        }
        Oscillation::Unbounded => {
            let _ = writeln!(s, "M=inf");
        }
    }
    let _ = writeln!(s, "upsilon={}", show_box(&b.upsilon));
    let _ = writeln!(s, "delta={}", show_box(&b.delta));
    let _ = writeln!(s, "gamma={}", show_box(&b.gamma));
    let coincide = b.upsilon == b.delta && b.delta == b.gamma;
    let mut which = vec![];
    if matches!(b.oscillation, Oscillation::Bounded(_)) {
        which.push("bounded");
    }
    if coincide {
        which.push("unbounded");
    }
    let _ = writeln!(
        s,
        "bounds={}",
        if which.is_empty() {
            "none".into()
        } else {
            which.join(",")
        }
    );
    for (i, x) in r.experiments.iter().enumerate() {
        let _ = writeln!(s, "h[{i}]={:?}", x.bandwidth.as_slice());
    }
    let _ = writeln!(s, "grid_points={}", e.grid.len());
    let _ = writeln!(s, "n={} replicates={} seed={}", e.n, e.replicates, loaded.seed);
    s
}

fn run_one(loaded: &Loaded, i: usize) -> Result<BiasReport, RunError> {
    let r = &loaded.resolved;
    let e = &r.experiments[i];
    let mut report = empirical_bias(e).map_err(|err| RunError::Numeric(format!("h[{i}]: {err}")))?;
    if let Some(p) = report.points.iter().find(|p| p.failures > 0) {
        let msg = format!(
            "h[{i}]: estimator failed for {} of {} replicates at x={:?} ({} failures in total)",
            p.failures,
            e.replicates,
            p.x,
            report.total_failures()
        );
        if !r.allow_partial {
            return Err(RunError::Numeric(format!(
                "{msg}; set allow_partial=true to keep partial results"
            )));
        }
        eprintln!("warning: {msg}");
    }
    attach_bounds(&mut report, e, &r.settings).map_err(|err| RunError::Numeric(format!("h[{i}]: {err}")))?;
    for p in &report.points {
        let bad = [p.bound_theorem1, p.bound_theorem2, p.rosenblatt]
            .into_iter()
            .flatten()
            .any(|v| !v.is_finite());
        if bad {
            return Err(RunError::Numeric(format!("h[{i}]: non-finite bound at x={:?}", p.x)));
        }
    }
    Ok(report)
}

pub fn run(loaded: &Loaded, out: &Path, threads: usize) -> Result<Vec<PathBuf>, RunError> {
    let clock = Instant::now();
    let started = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let r = &loaded.resolved;
    let reports = (0..r.experiments.len())
        .map(|i| run_one(loaded, i))
        .collect::<Result<Vec<_>, _>>()?;

    let mut staging = Staging::new(out)?;
    let mut files = Vec::new();
    let mut plotted = Vec::new();
    for (i, rep) in reports.iter().enumerate() {
        let file = format!("{}_h{i}.csv", r.name);
        files.push(staging.write(&file, &render_csv(rep, r.dim())?)?);
        plotted.push((file, format!("h = {:?}", r.experiments[i].bandwidth.as_slice())));
    }
    if r.dim() == 1 {
        let gp = format!("{}.gp", r.name);
        files.push(staging.write(&gp, render_gnuplot(&r.name, &plotted).as_bytes())?);
    }
    let manifest = RunManifest {
        name: r.name.clone(),
        artifact_version: env!("CARGO_PKG_VERSION"),
        seed: loaded.seed,
        started_unix_seconds: started,
        wall_clock_seconds: clock.elapsed().as_secs_f64(),
        threads,
        outputs: files.iter().map(|p| p.display().to_string()).collect(),
        config: toml::to_string(&loaded.doc).map_err(|e| RunError::Numeric(e.to_string()))?,
    };
    let json = serde_json::to_vec_pretty(&manifest).map_err(std::io::Error::other)?;
    files.push(staging.write(&format!("{}_manifest.json", r.name), &json)?);
    staging.commit();
    Ok(files)
}
