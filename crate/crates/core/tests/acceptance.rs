//! Release acceptance gate.
//!
//! Eleven end-to-end checks, one per quantitative claim the library is
//! built around. Each prints a single machine-greppable PASS/FAIL line with
//! the measured numbers; tolerances are pinned as constants next to each
//! check. Runtime budgets are generous on purpose: every check holds with
//! wide margin on a single core.

use rigidity_core::airy::{
    airy_kernel, laplace_kernel_transform, laplace_kernel_transform_quadrature,
    projection_diagonal_quadrature, trace_variance_closed_form, trace_variance_quadrature,
};
use rigidity_core::domain::{Boundary, Domain};
use rigidity_core::feynman_kac::{abcd_sample, trace_moments, variance_scan, TraceSettings};
use rigidity_core::localtime::{gamma_lt_scaling, occupation_density, scaling_samples, scaling_study};
use rigidity_core::noise::{gram_matrix, inner_product, sample_cell_noise, CovarianceModel};
use rigidity_core::paths::sample_bridge;
use rigidity_core::potential::Potential;
use rigidity_core::rng::stream_rng;
use rigidity_core::spectrum::{discretize, spectral_trace_moments};
use rigidity_core::stats::ks_two_sample;
use std::f64::consts::PI;

fn report(idx: u32, tag: &str, pass: bool, detail: &str) {
    println!("acceptance {idx:02} {tag}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "acceptance {idx:02} {tag} failed: {detail}");
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

/// 1: the exponential-statistic variance of the edge process reaches its
/// small-t constant 1/(4 pi), and independent quadrature reproduces the
/// closed form across moderate t.
#[test]
fn airy_variance_limit_and_quadrature() {
    const LIMIT_TOL: f64 = 1e-4;
    const QUAD_REL_TOL: f64 = 1e-6;

    let limit = 1.0 / (4.0 * PI);
    let small = trace_variance_closed_form(1e-3);
    let limit_err = (small - limit).abs();
    let mut worst = 0.0f64;
    for t in [0.25, 0.5, 1.0, 2.0] {
        let q = trace_variance_quadrature(t);
        let c = trace_variance_closed_form(t);
        worst = worst.max(rel(q, c));
    }
    let pass = limit_err < LIMIT_TOL && worst < QUAD_REL_TOL;
    report(
        1,
        "airy variance limit",
        pass,
        &format!("closed(1e-3)={small:.8} vs 1/(4pi)={limit:.8}, worst quad rel={worst:.2e}"),
    );
}

/// 2: the Laplace transform of the shifted Airy product has the known
/// Gaussian closed form; quadrature agrees to 1e-8 on a 12-point grid.
#[test]
fn laplace_transform_identity() {
    const REL_TOL: f64 = 1e-8;

    let mut worst = 0.0f64;
    for t in [0.5, 1.0, 2.0] {
        for u in [0.0, 1.0] {
            for v in [0.0, 1.0] {
                let q = laplace_kernel_transform_quadrature(t, u, v);
                let c = laplace_kernel_transform(t, u, v);
                worst = worst.max(rel(q, c));
            }
        }
    }
    let pass = worst < REL_TOL;
    report(2, "laplace identity", pass, &format!("worst rel over 12-point grid = {worst:.2e}"));
}

/// 3: the kernel is a projection: integrating the squared kernel over one
/// argument returns the diagonal.
#[test]
fn kernel_projection_identity() {
    const ABS_TOL: f64 = 1e-6;

    let mut worst = 0.0f64;
    let mut detail = String::new();
    for x in [-2.0, 0.0, 2.0] {
        let q = projection_diagonal_quadrature(x);
        let c = airy_kernel(x, x);
        let err = (q - c).abs();
        worst = worst.max(err);
        detail.push_str(&format!("x={x}: |err|={err:.2e}; "));
    }
    report(3, "projection identity", worst < ABS_TOL, detail.trim_end_matches("; "));
}

/// 4: finite-difference eigenvalues reproduce two exact spectra: the
/// harmonic well on a large box and the free Dirichlet interval.
#[test]
fn finite_difference_spectral_oracles() {
    const REL_TOL: f64 = 1e-3;

    let line = Domain::line();
    let disc = discretize(&line, &Potential::harmonic(), Some((-10.0, 10.0)), 4000).unwrap();
    let op = disc.operator();
    let mut worst_h = 0.0f64;
    for k in 0..5 {
        let exact = std::f64::consts::SQRT_2 * (k as f64 + 0.5);
        worst_h = worst_h.max(rel(op.eigenvalue(k).unwrap(), exact));
    }

    let interval = Domain::interval(1.0, Boundary::Dirichlet, Boundary::Dirichlet).unwrap();
    let disc = discretize(&interval, &Potential::zero(), None, 2048).unwrap();
    let op = disc.operator();
    let mut worst_d = 0.0f64;
    for k in 0..5 {
        let exact = PI * PI * ((k + 1) * (k + 1)) as f64 / 2.0;
        worst_d = worst_d.max(rel(op.eigenvalue(k).unwrap(), exact));
    }

    let pass = worst_h < REL_TOL && worst_d < REL_TOL;
    report(
        4,
        "spectral oracles",
        pass,
        &format!("harmonic worst rel={worst_h:.2e}, dirichlet worst rel={worst_d:.2e}"),
    );
}

/// 5: self-intersection local time scales like t^{3/2}; the L^1 route is
/// exactly quadratic; normalized samples collapse onto one law.
#[test]
fn local_time_scaling_laws() {
    const SLOPE_TOL: f64 = 0.1;
    const Q1_SLOPE_TOL: f64 = 1e-6;
    const KS_P_MIN: f64 = 0.001;
    const N_PATHS: u64 = 10_000;

    let t_list: Vec<f64> = (2..=8).rev().map(|k| 2f64.powi(-k)).collect();

    let study = scaling_study(2.0, &t_list, N_PATHS, 40).unwrap();
    let slope2 = study.fit.as_ref().unwrap().slope;

    let study1 = scaling_study(1.0, &t_list, N_PATHS, 41).unwrap();
    let slope1 = study1.fit.as_ref().unwrap().slope;

    let a: Vec<f64> =
        scaling_samples(2.0, 2f64.powi(-8), N_PATHS, 42, 0).unwrap().iter().map(|s| s.normalized).collect();
    let b: Vec<f64> =
        scaling_samples(2.0, 2f64.powi(-2), N_PATHS, 42, 1).unwrap().iter().map(|s| s.normalized).collect();
    let (_, p) = ks_two_sample(&a, &b).unwrap();

    let pass =
        (slope2 - 1.5).abs() < SLOPE_TOL && (slope1 - 2.0).abs() < Q1_SLOPE_TOL && p > KS_P_MIN;
    report(
        5,
        "local-time scaling",
        pass,
        &format!("q=2 slope={slope2:.4}, q=1 slope={slope1:.10}, ks p={p:.4}"),
    );
}

/// 6: the weighted self-intersection functional decays with the model's
/// scaling exponent: 3/2 white, 1 + H fractional, 2 bounded.
#[test]
fn weighted_local_time_exponent_table() {
    const SLOPE_TOL: f64 = 0.1;
    const N_PATHS: u64 = 10_000;

    let t_list: Vec<f64> = (2..=8).rev().map(|k| 2f64.powi(-k)).collect();
    let line = Domain::line();
    let cases = [
        (CovarianceModel::white(1.0).unwrap(), 1.5),
        (CovarianceModel::fractional(1.0, 0.75).unwrap(), 1.75),
        (CovarianceModel::bounded_const(1.0).unwrap(), 2.0),
    ];
    let mut detail = String::new();
    let mut pass = true;
    for (model, want) in &cases {
        let scan = gamma_lt_scaling(model, &line, &t_list, N_PATHS, 50).unwrap();
        let slope = scan.fit.as_ref().unwrap().slope;
        pass &= (slope - want).abs() < SLOPE_TOL;
        detail.push_str(&format!("{}: slope={slope:.4} want {want}; ", model.describe()));
    }
    report(6, "exponent table", pass, detail.trim_end_matches("; "));
}

fn smooth_noise_settings(t: f64, replicas: u64, seed: u64) -> TraceSettings {
    let mut s = TraceSettings::for_time(t).unwrap();
    s.n_steps = 256;
    s.bin_width = t.sqrt() / 16.0;
    s.replicas = replicas;
    s.seed = seed;
    s
}

/// 7: the bridge-sampling trace estimator and the direct spectral oracle
/// agree on both moments for smooth bounded noise on the unit interval.
#[test]
fn trace_oracles_agree_on_smooth_noise() {
    const SIGMA: f64 = 3.0;
    const T: f64 = 0.5;

    let domain = Domain::interval(1.0, Boundary::Dirichlet, Boundary::Dirichlet).unwrap();
    let noise = CovarianceModel::bounded_gaussian().unwrap();
    let potential = Potential::zero();

    let settings = smooth_noise_settings(T, 8000, 7);
    let fk = trace_moments(&domain, &noise, &potential, &settings).unwrap();

    let disc = discretize(&domain, &potential, None, 512).unwrap();
    let sp = spectral_trace_moments(&disc, &noise, T, 800, 11, 0).unwrap();

    let mean_gap = (fk.mean - sp.mean).abs();
    let mean_band = SIGMA * fk.mean_stderr.hypot(sp.mean_stderr);
    let var_gap = (fk.variance.unwrap() - sp.variance).abs();
    let var_band = SIGMA * fk.variance_stderr.unwrap().hypot(sp.variance_stderr);

    let pass = mean_gap <= mean_band && var_gap <= var_band;
    report(
        7,
        "trace cross-oracle",
        pass,
        &format!(
            "mean {:.5} vs {:.5} (gap {mean_gap:.2e} <= {mean_band:.2e}), var {:.3e} vs {:.3e} (gap {var_gap:.2e} <= {var_band:.2e})",
            fk.mean,
            sp.mean,
            fk.variance.unwrap(),
            sp.variance
        ),
    );
}

/// 8: the trace variance decays as t -> 0 at no less than the proven rates
/// on the unit interval: exponent 1/2 for white noise, 1 for perfectly
/// correlated bounded noise.
#[test]
fn variance_decay_exponents() {
    const WHITE_MIN_SLOPE: f64 = 0.4;
    const BOUNDED_MIN_SLOPE: f64 = 0.9;
    const REPLICAS: u64 = 8000;

    // the power law is a small-t statement, so the interval must dominate
    // the thermal wavelength sqrt(2 pi t) over the whole scan window
    let domain = Domain::interval(6.0, Boundary::Dirichlet, Boundary::Dirichlet).unwrap();
    let potential = Potential::zero();
    let t_list = [0.05, 0.1, 0.2, 0.4];

    let white = variance_scan(
        &domain,
        &CovarianceModel::white(1.0).unwrap(),
        &potential,
        &t_list,
        REPLICAS,
        21,
        0,
    )
    .unwrap();
    let white_slope = white.fit.as_ref().unwrap().slope;

    let bounded = variance_scan(
        &domain,
        &CovarianceModel::bounded_const(1.0).unwrap(),
        &potential,
        &t_list,
        REPLICAS,
        22,
        0,
    )
    .unwrap();
    let bounded_slope = bounded.fit.as_ref().unwrap().slope;

    let pass = white_slope >= WHITE_MIN_SLOPE && bounded_slope >= BOUNDED_MIN_SLOPE;
    report(
        8,
        "variance decay",
        pass,
        &format!("white slope={white_slope:.4} (>= {WHITE_MIN_SLOPE}), bounded slope={bounded_slope:.4} (>= {BOUNDED_MIN_SLOPE})"),
    );
}

/// 9: with a compactly supported covariance, every pair of paths whose
/// ranges are separated by more than the support radius has an exactly zero
/// cross term, by construction rather than by rounding.
#[test]
fn truncated_covariance_separates_exactly() {
    const RADIUS: f64 = 1.0;
    const BIN: f64 = 0.015625;
    const T: f64 = 0.05;
    const STEPS: usize = 64;
    const PAIRS: usize = 400;

    let line = Domain::line();
    let model = CovarianceModel::bounded_gaussian().unwrap().with_support_radius(RADIUS).unwrap();

    let mut rng = stream_rng(90, 0);
    let mut separated = 0usize;
    let mut zero_hits = 0usize;
    let mut overlapping_nonzero = 0usize;
    for k in 0..PAIRS {
        let offset = 0.6 + 3.4 * k as f64 / PAIRS as f64;
        let p = sample_bridge(&line, T, STEPS, 0.0, 0.0, &mut rng).unwrap();
        let q = sample_bridge(&line, T, STEPS, offset, offset, &mut rng).unwrap();
        let hi_p = p.points().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo_q = q.points().iter().cloned().fold(f64::INFINITY, f64::min);
        let gap = lo_q - hi_p;
        let occ_p = occupation_density(&p, BIN).unwrap();
        let occ_q = occupation_density(&q, BIN).unwrap();
        let d = inner_product(&occ_p, &occ_q, &model).unwrap();
        if gap > RADIUS + 2.0 * BIN {
            separated += 1;
            if d == 0.0 {
                zero_hits += 1;
            }
        } else if gap < RADIUS - 0.2 && d != 0.0 {
            overlapping_nonzero += 1;
        }
    }
    let pass = separated >= 100 && zero_hits == separated && overlapping_nonzero > 0;
    report(
        9,
        "compact-support separation",
        pass,
        &format!("{zero_hits}/{separated} separated pairs exactly zero, {overlapping_nonzero} close pairs nonzero"),
    );
}

/// 10: the hard invariants: occupation mass equals the horizon on every
/// path, Gram matrices of every model validate as PSD, the cross term obeys
/// the quadratic bound on every sample, and seeded runs are byte-stable
/// across repetition and thread counts.
#[test]
fn exact_invariants_and_determinism() {
    let line = Domain::line();
    let interval = Domain::interval(1.0, Boundary::Dirichlet, Boundary::Robin(0.7)).unwrap();

    // occupation mass
    let mut rng = stream_rng(100, 0);
    let mut mass_ok = true;
    for k in 0..200 {
        let t = 0.05 + 0.01 * k as f64;
        let traj = if k % 2 == 0 {
            sample_bridge(&line, t, 64 + k, -1.0, 0.5, &mut rng).unwrap()
        } else {
            sample_bridge(&interval, t, 64 + k, 0.3, 0.6, &mut rng).unwrap()
        };
        let occ = occupation_density(&traj, 0.03).unwrap();
        mass_ok &= (occ.l1() - traj.duration()).abs() <= 1e-9 * traj.duration();
    }

    // Gram PSD for every model preset, on occupation fields
    let fields: Vec<_> = (0..6)
        .map(|k| {
            let traj = sample_bridge(&line, 0.3, 128, 0.2 * k as f64, 0.0, &mut rng).unwrap();
            occupation_density(&traj, 0.0625).unwrap()
        })
        .collect();
    let models = [
        CovarianceModel::white(1.3).unwrap(),
        CovarianceModel::fractional(1.0, 0.8).unwrap(),
        CovarianceModel::lp_power(0.5, 1.5).unwrap(),
        CovarianceModel::lp_log(2, 2.0).unwrap(),
        CovarianceModel::bounded_gaussian().unwrap(),
        CovarianceModel::bounded_const(0.7).unwrap(),
    ];
    let gram_ok = models.iter().all(|m| gram_matrix(&fields, m).is_ok());

    // quadratic cross-term bound on fresh functional samples
    let settings = TraceSettings::for_time(0.2).unwrap();
    let mut bound_ok = true;
    for k in 0..500 {
        let m = &models[k % models.len()];
        let s = abcd_sample(&interval, m, &Potential::harmonic(), &settings, 0.4, 0.7, &mut rng)
            .unwrap();
        bound_ok &= s.d.abs() <= 2.0 * s.c + 1e-12;
    }

    // byte-stable reruns, including across thread counts
    let run = |threads: usize| {
        let mut s = TraceSettings::for_time(0.3).unwrap();
        s.replicas = 200;
        s.seed = 314;
        s.threads = threads;
        let m = trace_moments(
            &interval,
            &CovarianceModel::bounded_gaussian().unwrap(),
            &Potential::zero(),
            &s,
        )
        .unwrap();
        (m.mean.to_bits(), m.variance.unwrap().to_bits())
    };
    let first = run(1);
    let det_ok = run(1) == first && run(2) == first && run(4) == first;

    let pass = mass_ok && gram_ok && bound_ok && det_ok;
    report(
        10,
        "exact invariants",
        pass,
        &format!("mass={mass_ok}, gram={gram_ok}, cross-bound={bound_ok}, determinism={det_ok}"),
    );
}

/// 11: perfectly correlated noise is a single Gaussian level shift: the
/// sampled field is constant, the spectrum translates rigidly, and the
/// trace moments match the lognormal closed form through both estimators.
#[test]
fn rank_one_noise_closed_loop() {
    const SHIFT_TOL: f64 = 1e-10;
    const SIGMA: f64 = 3.0;
    const T: f64 = 0.5;
    const LEVEL: f64 = 0.5;

    let domain = Domain::interval(1.0, Boundary::Dirichlet, Boundary::Dirichlet).unwrap();
    let potential = Potential::zero();
    let noise = CovarianceModel::bounded_const(LEVEL).unwrap();
    let disc = discretize(&domain, &potential, None, 256).unwrap();

    // the sampled cell field is a single shared Gaussian
    let mut rng = stream_rng(110, 0);
    let xi = sample_cell_noise(disc.cells(), &noise, &mut rng).unwrap();
    let flat = xi.iter().all(|&v| v.to_bits() == xi[0].to_bits());

    // the spectrum translates by exactly that level
    let op0 = disc.operator();
    let op1 = disc.with_noise(&xi).unwrap();
    let mut shift_err = 0.0f64;
    for k in 0..6 {
        let a = op0.eigenvalue(k).unwrap();
        let b = op1.eigenvalue(k).unwrap();
        shift_err = shift_err.max((b - a - xi[0]).abs());
    }

    // lognormal closed form from the noiseless trace
    let t0 = op0.heat_trace(T).unwrap();
    let s2 = T * T * LEVEL;
    let mean_cf = t0 * (0.5 * s2).exp();
    let var_cf = t0 * t0 * ((2.0 * s2).exp() - s2.exp());

    let sp = spectral_trace_moments(&disc, &noise, T, 3000, 115, 0).unwrap();
    let sp_mean_ok = (sp.mean - mean_cf).abs() <= SIGMA * sp.mean_stderr;
    let sp_var_ok = (sp.variance - var_cf).abs() <= SIGMA * sp.variance_stderr;

    let settings = smooth_noise_settings(T, 6000, 117);
    let fk = trace_moments(&domain, &noise, &potential, &settings).unwrap();
    let fk_mean_ok = (fk.mean - mean_cf).abs() <= SIGMA * fk.mean_stderr;
    let fk_var_ok = (fk.variance.unwrap() - var_cf).abs() <= SIGMA * fk.variance_stderr.unwrap();

    let pass = flat && shift_err < SHIFT_TOL && sp_mean_ok && sp_var_ok && fk_mean_ok && fk_var_ok;
    report(
        11,
        "rank-one closed loop",
        pass,
        &format!(
            "flat={flat}, shift err={shift_err:.2e}, spectral mean/var ok={sp_mean_ok}/{sp_var_ok}, bridge mean/var ok={fk_mean_ok}/{fk_var_ok} (closed mean={mean_cf:.5}, var={var_cf:.3e})"
        ),
    );
}
