//! Occupation densities, boundary local times, and absorption weights of
//! sampled paths.
//!
//! The occupation density bins each time step at the midpoint of its two
//! endpoints, on a global lattice of the requested bin width, so densities of
//! different paths always align up to an integer shift and the total mass is
//! the path duration exactly. The boundary local time is a band count around
//! a boundary point. Absorption weights multiply, per time step, the exact
//! probability that the connecting Brownian bridge avoids the boundary; in
//! reflecting domains they must be fed the unfolded path, since folding
//! erases crossings.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::noise::{seminorm_sq, CovarianceModel};
use crate::paths::{sample_free, Trajectory};
use crate::rigidity::fit_exponent;
use crate::rng::{stream_rng, substream};
use crate::scan::{ScanResult, ScanRow};
use crate::stats::RunningMoments;
use crate::stepfn::StepFunction;

/// Occupation density of the path as a step function with bin width `h`:
/// `L(x) dx` is the time spent near `x`, so the total mass is the duration.
pub fn occupation_density(traj: &Trajectory, h: f64) -> Result<StepFunction> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::Input(format!("bin width must be positive and finite, got {h}")));
    }
    let p = traj.points();
    let dt = traj.dt();
    let mut idx = Vec::with_capacity(p.len() - 1);
    let (mut lo, mut hi) = (i64::MAX, i64::MIN);
    for w in p.windows(2) {
        let m = 0.5 * (w[0] + w[1]);
        let i = (m / h).floor() as i64;
        lo = lo.min(i);
        hi = hi.max(i);
        idx.push(i);
    }
    let mut values = vec![0.0; (hi - lo + 1) as usize];
    let mass = dt / h;
    for i in idx {
        values[(i - lo) as usize] += mass;
    }
    StepFunction::new(lo as f64 * h, h, values)
}

/// Band estimator of the boundary local time at `c`: time spent within
/// `band` of `c`, normalized by the two-sided band width `2 band`.
///
/// On a folded path with `c` on the boundary this converges, as the band and
/// the time step shrink, to the local time that the Feynman-Kac boundary
/// factor `exp(alpha L)` of a Robin condition calls for.
pub fn boundary_local_time(traj: &Trajectory, c: f64, band: f64) -> Result<f64> {
    if !(band > 0.0) || !band.is_finite() {
        return Err(Error::Input(format!("band must be positive and finite, got {band}")));
    }
    let p = traj.points();
    let hits = p[..p.len() - 1].iter().filter(|&&v| (v - c).abs() < band).count();
    Ok(hits as f64 * traj.dt() / (2.0 * band))
}

/// Probability that the path, refined to a continuous Brownian path through
/// its nodes, never touches the level `c`. Exact for each bridge segment:
/// a segment from `a` to `b` (both on one side, distances `|a-c|`, `|b-c|`)
/// survives with probability `1 - exp(-2 |a-c| |b-c| / dt)`; a segment whose
/// endpoints straddle or touch the level is certainly absorbed.
pub fn level_survival(raw: &[f64], dt: f64, c: f64) -> f64 {
    let mut p = 1.0;
    for w in raw.windows(2) {
        let a = w[0] - c;
        let b = w[1] - c;
        if a * b <= 0.0 {
            return 0.0;
        }
        p *= -(-2.0 * a * b / dt).exp_m1();
    }
    p
}

/// Probability that the path never touches any point of the lattice
/// `phase + period Z`. Per segment this multiplies the avoidance factors for
/// the two lattice points enclosing the segment; a segment that leaves its
/// lattice cell is certainly absorbed. Requires steps shorter than `period`.
pub fn lattice_survival(raw: &[f64], dt: f64, period: f64, phase: f64) -> f64 {
    let mut p = 1.0;
    for w in raw.windows(2) {
        let a = (w[0] - phase) / period;
        let b = (w[1] - phase) / period;
        let cell = a.floor();
        if cell != b.floor() {
            return 0.0;
        }
        let s = (a - cell) * period;
        let s2 = (b - cell) * period;
        if s == 0.0 || s2 == 0.0 {
            return 0.0;
        }
        p *= -(-2.0 * s * s2 / dt).exp_m1();
        p *= -(-2.0 * (period - s) * (period - s2) / dt).exp_m1();
        if p == 0.0 {
            return 0.0;
        }
    }
    p
}

/// Squared `L^q` norm of a local-time field: `(h sum density^q)^{2/q}`.
///
/// At `q = 1` this is the squared mass, hence exactly `t^2` for any
/// occupation density of a duration-`t` path.
pub fn lq_norm_sq(field: &StepFunction, q: f64) -> Result<f64> {
    if !(1.0..=2.0).contains(&q) {
        return Err(Error::Input(format!("L^q exponent must lie in [1, 2], got {q}")));
    }
    let s: f64 = if q == 2.0 {
        field.values().iter().map(|v| v * v).sum()
    } else if q == 1.0 {
        field.values().iter().sum()
    } else {
        field.values().iter().map(|v| v.powf(q)).sum()
    };
    Ok((field.bin_width() * s).powf(2.0 / q))
}

/// Unit-horizon discretization used by the domination functional.
const RQ_STEPS: usize = 256;
const RQ_BIN: f64 = 0.125;

/// Draw the local-time domination functional `R_q` from a fresh unit-time
/// free path.
///
/// On the line and half-line `R_q = 2^{2(q-1)/q} ||L_1(B)||_q^2`. On an
/// interval of length `b` it is the sup/range bound
/// `c Lsup^{2(1-1/q)} + c (2 Lsup^2 + 2 (M-m)^2)^{2(1-1/q)}` with `Lsup` the
/// largest bin density of the free path, `M-m` its range, and
/// `c = 4 max(1, b^{q-1})^{2/q}`. Under the reflection coupling the folded
/// process started anywhere in the domain satisfies
/// `||L_1(Z)||_q^2 <= R_q`, and `R_q` has finite exponential moments near 0,
/// which is what makes the kernel functionals integrable.
pub fn rq_sample<R: Rng + ?Sized>(domain: &Domain, q: f64, rng: &mut R) -> Result<f64> {
    if !(q > 1.0 && q <= 2.0) {
        return Err(Error::Input(format!("the domination variable needs q in (1, 2], got {q}")));
    }
    let path = sample_free(1.0, RQ_STEPS, 0.0, rng)?;
    rq_of(domain, q, &path)
}

fn rq_of(domain: &Domain, q: f64, path: &Trajectory) -> Result<f64> {
    let occ = occupation_density(path, RQ_BIN)?;
    match domain {
        Domain::Line | Domain::HalfLine { .. } => {
            Ok(2f64.powf(2.0 * (q - 1.0) / q) * lq_norm_sq(&occ, q)?)
        }
        Domain::Interval { b, .. } => {
            let lsup = occ.values().iter().fold(0.0f64, |m, &v| m.max(v));
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for &v in path.points() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
            let range = hi - lo;
            let c = 4.0 * b.powf(q - 1.0).max(1.0).powf(2.0 / q);
            let e = 2.0 * (1.0 - 1.0 / q);
            Ok(c * lsup.powf(e) + c * (2.0 * lsup * lsup + 2.0 * range * range).powf(e))
        }
    }
}

/// One scaling-study draw: the functional `||L_t(B)||_q^2` and its
/// normalization by the exact scaling rate `t^{1+1/q}`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScalingSample {
    pub q: f64,
    pub t: f64,
    pub value: f64,
    pub normalized: f64,
}

fn steps_for(t: f64) -> usize {
    ((256.0 * t).ceil() as usize).max(64)
}

fn bin_for(t: f64) -> f64 {
    t.sqrt() / 8.0
}

fn validate_horizons(t_list: &[f64]) -> Result<()> {
    if t_list.len() < 4 {
        return Err(Error::Input(format!(
            "scaling scans need at least 4 horizons, got {}",
            t_list.len()
        )));
    }
    for &t in t_list {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::Input(format!("scaling horizons must lie in (0, 1), got {t}")));
        }
    }
    Ok(())
}

fn validate_path_budget(n_paths: u64) -> Result<()> {
    if n_paths < 8 {
        return Err(Error::Statistics(format!(
            "scaling estimates need at least 8 paths per horizon, got {n_paths}"
        )));
    }
    if n_paths >= 1 << 24 {
        return Err(Error::Input(format!(
            "path budget {n_paths} exceeds the per-horizon stream capacity"
        )));
    }
    Ok(())
}

/// Independent draws of `||L_t(B)||_q^2` for one horizon.
///
/// The discretization follows the module defaults (`max(64, ceil(256 t))`
/// steps, bins of width `sqrt(t)/8`), so every horizon is resolved
/// identically in diffusively rescaled units and normalized samples of
/// different horizons share one law exactly, not just asymptotically.
/// `stream` tags the rng streams; studies pass the horizon index so rows
/// never share draws.
pub fn scaling_samples(
    q: f64,
    t: f64,
    n_paths: u64,
    seed: u64,
    stream: u64,
) -> Result<Vec<ScalingSample>> {
    if !(1.0..=2.0).contains(&q) {
        return Err(Error::Input(format!("L^q exponent must lie in [1, 2], got {q}")));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Input(format!("horizon must be positive and finite, got {t}")));
    }
    validate_path_budget(n_paths)?;
    let n = steps_for(t);
    let h = bin_for(t);
    let norm = t.powf(1.0 + 1.0 / q);
    (0..n_paths)
        .into_par_iter()
        .map(|j| -> Result<ScalingSample> {
            let mut rng = stream_rng(seed, substream(stream, j));
            let path = sample_free(t, n, 0.0, &mut rng)?;
            let value = lq_norm_sq(&occupation_density(&path, h)?, q)?;
            Ok(ScalingSample { q, t, value, normalized: value / norm })
        })
        .collect()
}

/// Monte Carlo scan of `E ||L_t(B)||_q^2` over horizons in `(0, 1)`, with a
/// fitted log-log slope. The exact scaling law gives slope `1 + 1/q`; at
/// `q = 1` every draw is `t^2` and the slope is exactly 2.
pub fn scaling_study(q: f64, t_list: &[f64], n_paths: u64, seed: u64) -> Result<ScanResult> {
    validate_horizons(t_list)?;
    let mut rows = Vec::with_capacity(t_list.len());
    for (i, &t) in t_list.iter().enumerate() {
        let samples = scaling_samples(q, t, n_paths, seed, i as u64)?;
        let mut acc = RunningMoments::new();
        for s in &samples {
            acc.push(s.value);
        }
        rows.push(ScanRow { t, estimate: acc.mean(), stderr: acc.stderr(), n: n_paths });
    }
    let mut scan = ScanResult::new(format!("lt-scaling(q={q})"), rows);
    scan.fit = Some(fit_exponent(&scan)?);
    Ok(scan)
}

/// Start grid for the sup over initial points: a single point on the line
/// (the law is translation invariant), near-boundary points on the diffusive
/// scale for the half-line, and interior points for an interval.
fn start_grid(domain: &Domain, t: f64) -> Vec<f64> {
    match domain {
        Domain::Line => vec![0.0],
        Domain::HalfLine { .. } => (0..9).map(|k| k as f64 * t.sqrt() / 2.0).collect(),
        Domain::Interval { b, .. } => (1..=9).map(|k| k as f64 * b / 10.0).collect(),
    }
}

/// Monte Carlo scan of `sup_x E^x ||L_t(Z)||_gamma^2` for the reflected
/// process `Z`, over horizons in `(0, 1)`.
///
/// The sup is taken over [`start_grid`]; the fitted log-log slope estimates
/// the variance-scaling exponent of the model, `d_exponent`.
pub fn gamma_lt_scaling(
    model: &CovarianceModel,
    domain: &Domain,
    t_list: &[f64],
    n_paths: u64,
    seed: u64,
) -> Result<ScanResult> {
    validate_horizons(t_list)?;
    validate_path_budget(n_paths)?;
    let mut rows = Vec::with_capacity(t_list.len());
    for (i, &t) in t_list.iter().enumerate() {
        let n = steps_for(t);
        let h = bin_for(t);
        let mut best: Option<RunningMoments> = None;
        for (k, &x) in start_grid(domain, t).iter().enumerate() {
            // streams disjoint from scaling_study's horizon-indexed majors
            let major = (1u64 << 16) + (i as u64) * 16 + k as u64;
            let values: Vec<f64> = (0..n_paths)
                .into_par_iter()
                .map(|j| -> Result<f64> {
                    let mut rng = stream_rng(seed, substream(major, j));
                    let path = sample_free(t, n, x, &mut rng)?;
                    let traj = if matches!(domain, Domain::Line) {
                        path
                    } else {
                        let folded: Vec<f64> =
                            path.points().iter().map(|&v| domain.fold(v)).collect();
                        Trajectory::from_parts(path.dt(), folded)
                    };
                    seminorm_sq(&occupation_density(&traj, h)?, model)
                })
                .collect::<Result<_>>()?;
            let mut acc = RunningMoments::new();
            for v in values {
                acc.push(v);
            }
            if best.as_ref().map_or(true, |b| acc.mean() > b.mean()) {
                best = Some(acc);
            }
        }
        let acc = best.expect("start grid is never empty");
        rows.push(ScanRow { t, estimate: acc.mean(), stderr: acc.stderr(), n: n_paths });
    }
    let mut scan = ScanResult::new(format!("gamma-lt-scaling({})", model.describe()), rows);
    scan.fit = Some(fit_exponent(&scan)?);
    Ok(scan)
}
