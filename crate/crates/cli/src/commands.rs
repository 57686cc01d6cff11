//! One runner per subcommand. Each returns the rendered CSV plus a JSON
//! results block for the sidecar; nothing here touches the filesystem, so a
//! failed run leaves no partial output behind.

use std::fmt::Write as _;

use rigidity_core::airy::{trace_mean, trace_variance_closed_form, trace_variance_quadrature};
use rigidity_core::feynman_kac::{trace_moments, variance_scan, TraceSettings};
use rigidity_core::localtime::{gamma_lt_scaling, scaling_study};
use rigidity_core::noise::{gram_matrix, CellGrid, NoiseSampler};
use rigidity_core::rigidity::rigidity_report;
use rigidity_core::rng::{stream_rng, substream};
use rigidity_core::spectrum::{discretize, spectral_trace_moments};
use rigidity_core::stats::RunningMoments;
use rigidity_core::{Error, Result, StepFunction};
use serde_json::{json, Value};

use crate::config::ExperimentConfig;

/// What a subcommand produced: tabular rows, a sidecar results block, and
/// optionally a plain-text report for stdout and a `.txt` artifact.
pub struct RunOutput {
    pub csv: String,
    pub results: Value,
    pub text: Option<String>,
}

/// Closed-form against quadrature for the edge-variance benchmark; no
/// randomness involved.
pub fn airy(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate_t_list()?;
    let mut csv = String::from("t,mean,variance_closed,variance_quadrature,rel_diff\n");
    let mut worst = 0.0f64;
    for &t in &cfg.t_list {
        let mean = trace_mean(t);
        let closed = trace_variance_closed_form(t);
        let quad = trace_variance_quadrature(t);
        let rel = (quad - closed).abs() / closed;
        worst = worst.max(rel);
        let _ = writeln!(csv, "{t},{mean},{closed},{quad},{rel}");
    }
    Ok(RunOutput { csv, results: json!({ "max_rel_diff": worst }), text: None })
}

/// Validate the configured covariance on a uniform grid and compare the
/// sampler's empirical lag covariances against the Gram matrix.
pub fn noise_check(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let model = cfg.noise()?;
    let seed = cfg.seed()?;
    let h = cfg.bin_width.unwrap_or(0.25);
    let n = cfg.grid_dim;
    if cfg.n_realizations < 8 {
        return Err(Error::Config("noise-check needs at least 8 realizations".into()));
    }
    let grid = CellGrid::new(0.0, h, n)?;
    let cells: Vec<StepFunction> = (0..n)
        .map(|i| StepFunction::new(i as f64 * h, h, vec![1.0]))
        .collect::<Result<_>>()?;
    // the Gram build is also the positive semidefiniteness gate
    let gram = gram_matrix(&cells, &model)?;
    let sampler = NoiseSampler::new(&grid, &model)?;

    let lags = 16.min(n - 1);
    let mut acc = vec![RunningMoments::new(); lags + 1];
    for r in 0..cfg.n_realizations {
        let mut rng = stream_rng(seed, substream(r, 0));
        let x = sampler.draw(&mut rng);
        for (lag, slot) in acc.iter_mut().enumerate() {
            let m = n - lag;
            let s: f64 = (0..m).map(|i| x[i] * x[i + lag]).sum();
            slot.push(s / m as f64);
        }
    }

    let h2 = h * h;
    let mut csv = String::from("lag,theory,empirical,stderr,z\n");
    let mut worst = 0.0f64;
    for (lag, slot) in acc.iter().enumerate() {
        // cell-average covariance at this lag; constant along the diagonal
        // because the grid is uniform and the model stationary
        let theory = gram[0][lag] / h2;
        let (emp, se) = (slot.mean(), slot.stderr());
        let z = if se > 0.0 { (emp - theory) / se } else { 0.0 };
        worst = worst.max(z.abs());
        let _ = writeln!(csv, "{lag},{theory},{emp},{se},{z}");
    }
    if worst > 5.0 {
        return Err(Error::Statistics(format!(
            "sampled covariance deviates from the Gram matrix by {worst:.2} standard errors; \
             the sampler and the bilinear form disagree"
        )));
    }
    Ok(RunOutput {
        csv,
        results: json!({
            "model": model.describe(),
            "cells": n,
            "cell_width": h,
            "draws": cfg.n_realizations,
            "max_abs_z": worst,
        }),
        text: None,
    })
}

/// Occupation-norm scaling scan: plain `E ||L_t||_q^2` by default, or the
/// covariance-weighted seminorm when `weighted` is set.
pub fn lt_scaling(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate_t_list()?;
    let seed = cfg.seed()?;
    let scan = with_pool(cfg.threads, || {
        if cfg.weighted {
            gamma_lt_scaling(&cfg.noise()?, &cfg.domain()?, &cfg.t_list, cfg.n_paths, seed)
        } else {
            scaling_study(cfg.q, &cfg.t_list, cfg.n_paths, seed)
        }
    })?;
    let results = json!({ "label": scan.label, "fit": scan.fit });
    Ok(RunOutput { csv: scan.to_csv(), results, text: None })
}

/// Heat-trace mean and variance over the configured horizons, by the
/// path-sampling route.
pub fn trace(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate_t_list()?;
    let seed = cfg.seed()?;
    let domain = cfg.domain()?;
    let noise = cfg.noise()?;
    let potential = cfg.potential()?;
    let mut csv = String::from("t,mean,mean_stderr,variance,variance_stderr,replicas\n");
    let mut rows = Vec::with_capacity(cfg.t_list.len());
    for &t in &cfg.t_list {
        let mut s = TraceSettings::for_time(t)?;
        if let Some(n) = cfg.n_steps {
            s.n_steps = n;
        }
        if let Some(w) = cfg.bin_width {
            s.bin_width = w;
        }
        s.truncation_radius = cfg.truncation_radius;
        s.replicas = cfg.n_paths;
        s.seed = seed;
        s.threads = cfg.threads;
        s.with_variance = true;
        let m = trace_moments(&domain, &noise, &potential, &s)?;
        let (var, var_se) = (
            m.variance.expect("variance requested"),
            m.variance_stderr.expect("variance requested"),
        );
        let _ = writeln!(csv, "{t},{},{},{var},{var_se},{}", m.mean, m.mean_stderr, m.replicas);
        rows.push(json!({ "t": t, "nodes": m.nodes, "n_steps": s.n_steps }));
    }
    Ok(RunOutput { csv, results: json!({ "rows": rows }), text: None })
}

/// Trace-variance decay scan with a fitted log-log slope.
pub fn variance_scan_cmd(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate_t_list()?;
    let seed = cfg.seed()?;
    let scan = variance_scan(
        &cfg.domain()?,
        &cfg.noise()?,
        &cfg.potential()?,
        &cfg.t_list,
        cfg.n_paths,
        seed,
        cfg.threads,
    )?;
    let results = json!({ "label": scan.label, "fit": scan.fit });
    Ok(RunOutput { csv: scan.to_csv(), results, text: None })
}

/// Heat-trace moments by the matrix route: discretize, sample the noise on
/// the mesh, diagonalize.
pub fn spectrum(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate_t_list()?;
    let seed = cfg.seed()?;
    let disc = discretize(&cfg.domain()?, &cfg.potential()?, cfg.extent, cfg.grid_dim)?;
    let noise = cfg.noise()?;
    let mut csv = String::from("t,mean,mean_stderr,variance,variance_stderr,replicas,dim\n");
    let mut dim = 0;
    for &t in &cfg.t_list {
        let m = spectral_trace_moments(&disc, &noise, t, cfg.n_realizations, seed, cfg.threads)?;
        dim = m.dim;
        let _ = writeln!(
            csv,
            "{t},{},{},{},{},{},{}",
            m.mean, m.mean_stderr, m.variance, m.variance_stderr, m.replicas, m.dim
        );
    }
    Ok(RunOutput { csv, results: json!({ "dim": dim }), text: None })
}

/// Variance scan plus the rigidity assessment built from it: growth verdict,
/// predicted decay exponent, and whether the fitted slope reaches it.
pub fn report(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate_t_list()?;
    let seed = cfg.seed()?;
    let domain = cfg.domain()?;
    let noise = cfg.noise()?;
    let scan = variance_scan(
        &domain,
        &noise,
        &cfg.potential()?,
        &cfg.t_list,
        cfg.n_paths,
        seed,
        cfg.threads,
    )?;
    let rep = rigidity_report(
        &domain,
        &noise,
        cfg.growth_exponent()?,
        std::slice::from_ref(&scan),
        cfg.slope_tolerance,
    )?;
    let text = rep.to_text();
    Ok(RunOutput {
        csv: scan.to_csv(),
        results: serde_json::to_value(&rep).map_err(|e| Error::Numeric(e.to_string()))?,
        text: Some(text),
    })
}

/// Run a closure in a dedicated thread pool when a thread count is pinned;
/// 0 keeps the ambient pool.
fn with_pool<T: Send>(threads: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    if threads == 0 {
        f()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(f)
    }
}
