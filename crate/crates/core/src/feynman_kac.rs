//! Monte Carlo estimators for the heat trace and its variance over the
//! noise, built from reflected bridges and their occupation densities.
//!
//! Averaging the Gaussian noise out of the trace leaves, for each diagonal
//! point `x`, an integral of the bridge functional
//! `exp(-int V + boundary terms + ||L||^2 / 2)` against the noiseless kernel
//! diagonal, where `L` is the occupation density of the bridge and the
//! seminorm is the one induced by the covariance. The variance of the trace
//! pairs two independent bridges and weighs them by `expm1(<L, L'>)`, so
//! compactly supported covariances make distant bridge pairs drop out
//! exactly. Sums over quadrature nodes and replicas run in a fixed order and
//! every (replica, node, copy) triple owns a dedicated RNG stream; results
//! are bit-stable for any thread count.

use crate::domain::{Boundary, Domain};
use crate::error::{Error, Result};
use crate::localtime::{boundary_local_time, lattice_survival, level_survival, occupation_density};
use crate::noise::{inner_product, seminorm_sq, CovarianceModel};
use crate::paths::{sample_bridge, Trajectory};
use crate::potential::Potential;
use crate::rigidity::fit_exponent;
use crate::rng::{stream_rng, substream};
use crate::scan::{ScanResult, ScanRow};
use crate::stats::RunningMoments;
use crate::stepfn::StepFunction;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

const LN_1E10: f64 = 23.025850929940457;
/// substream minors are packed below the replica index
const MINOR_CAPACITY: u64 = 1 << 24;

/// Tuning knobs of the trace estimator. `for_time` fills the standard
/// choices: step count `max(64, ceil(256 t))`, occupation bins of width
/// `sqrt(t)/8`, a boundary band of one step scale `sqrt(t/n)`, and node
/// spacing resolved per domain when left unset.
#[derive(Debug, Clone, Serialize)]
pub struct TraceSettings {
    pub t: f64,
    pub n_steps: usize,
    pub bin_width: f64,
    pub boundary_band: f64,
    /// spacing of the diagonal quadrature nodes; `None` picks
    /// `min(sqrt(t)/2, b/64)` on an interval and `min(sqrt(t)/2, 0.1)` otherwise
    pub node_spacing: Option<f64>,
    /// spatial cutoff for unbounded domains; `None` derives it from the
    /// potential's growth certificate
    pub truncation_radius: Option<f64>,
    pub replicas: u64,
    pub seed: u64,
    pub with_variance: bool,
    /// worker threads; 0 uses the ambient thread pool
    pub threads: usize,
}

impl TraceSettings {
    pub fn for_time(t: f64) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Input(format!("trace time must be positive and finite, got {t}")));
        }
        let n_steps = 64usize.max((256.0 * t).ceil() as usize);
        Ok(TraceSettings {
            t,
            n_steps,
            bin_width: t.sqrt() / 8.0,
            boundary_band: (t / n_steps as f64).sqrt(),
            node_spacing: None,
            truncation_radius: None,
            replicas: 400,
            seed: 0,
            with_variance: true,
            threads: 0,
        })
    }

    fn validate(&self) -> Result<()> {
        if !(self.t > 0.0) || !self.t.is_finite() {
            return Err(Error::Input(format!("trace time must be positive and finite, got {}", self.t)));
        }
        if self.n_steps < 2 {
            return Err(Error::Input("need at least two time steps".into()));
        }
        if !(self.bin_width > 0.0) || !self.bin_width.is_finite() {
            return Err(Error::Input("occupation bin width must be positive and finite".into()));
        }
        if !(self.boundary_band > 0.0) || !self.boundary_band.is_finite() {
            return Err(Error::Input("boundary band must be positive and finite".into()));
        }
        if let Some(s) = self.node_spacing {
            if !(s > 0.0) || !s.is_finite() {
                return Err(Error::Input("node spacing must be positive and finite".into()));
            }
        }
        if let Some(r) = self.truncation_radius {
            if !(r > 0.0) || !r.is_finite() {
                return Err(Error::Input("truncation radius must be positive and finite".into()));
            }
        }
        if self.replicas < 2 {
            return Err(Error::Input("need at least two replicas for error bars".into()));
        }
        Ok(())
    }
}

/// Trace estimate with replica-level error bars.
#[derive(Debug, Clone, Serialize)]
pub struct TraceMoments {
    /// estimate of the noise-averaged trace
    pub mean: f64,
    pub mean_stderr: f64,
    /// estimate of the variance of the trace over the noise
    pub variance: Option<f64>,
    pub variance_stderr: Option<f64>,
    pub nodes: usize,
    pub replicas: u64,
}

/// Cutoff radius beyond which a certified potential suppresses the trace
/// integrand below 1e-10: solves `exp(-t |kappa R|^a / 2) = 1e-10`.
pub fn default_truncation_radius(potential: &Potential, t: f64) -> Result<f64> {
    let g = potential.growth().ok_or_else(|| {
        Error::Model(
            "the heat trace on an unbounded domain needs a potential growth \
             certificate or an explicit truncation radius"
                .into(),
        )
    })?;
    Ok((2.0 * LN_1E10 / t).powf(1.0 / g.exponent) / g.kappa)
}

/// Estimate the mean and, optionally, the noise-variance of the heat trace.
pub fn trace_moments(
    domain: &Domain,
    noise: &CovarianceModel,
    potential: &Potential,
    settings: &TraceSettings,
) -> Result<TraceMoments> {
    settings.validate()?;
    let t = settings.t;
    let (lo, hi) = match domain {
        Domain::Interval { b, .. } => (0.0, *b),
        Domain::HalfLine { .. } => {
            let r = match settings.truncation_radius {
                Some(r) => r,
                None => default_truncation_radius(potential, t)?,
            };
            (0.0, r)
        }
        Domain::Line => {
            let r = match settings.truncation_radius {
                Some(r) => r,
                None => default_truncation_radius(potential, t)?,
            };
            (-r, r)
        }
    };
    let spacing = settings.node_spacing.unwrap_or_else(|| match domain {
        Domain::Interval { b, .. } => (t.sqrt() / 2.0).min(b / 64.0),
        _ => (t.sqrt() / 2.0).min(0.1),
    });
    let m = (((hi - lo) / spacing).ceil() as usize).max(1);
    let dx = (hi - lo) / m as f64;
    let nodes: Vec<f64> = (0..m).map(|k| lo + (k as f64 + 0.5) * dx).collect();
    let q: Vec<f64> = nodes.iter().map(|&x| dx * domain.transition_density(t, x, x)).collect();
    let copies: usize = if settings.with_variance { 2 } else { 1 };
    if (m * copies) as u64 > MINOR_CAPACITY {
        return Err(Error::Config(format!("{m} quadrature nodes exceed the RNG stream layout")));
    }

    let run = |replica: u64| -> Result<(f64, f64)> {
        let mut terms: Vec<BridgeTerms> = Vec::with_capacity(m * copies);
        for i in 0..m {
            for c in 0..copies {
                let mut rng = stream_rng(settings.seed, substream(replica, (i * copies + c) as u64));
                terms.push(bridge_terms(domain, noise, potential, settings, nodes[i], &mut rng)?);
            }
        }
        let ws: Vec<f64> = terms.iter().map(BridgeTerms::weight).collect();
        let tr: f64 = (0..m).map(|i| q[i] * ws[i * copies]).sum();
        let mut var = 0.0;
        if settings.with_variance {
            for i in 0..m {
                // the diagonal pairs an independent second copy, off-diagonal
                // pairs are independent across nodes already
                let d = inner_product(&terms[2 * i].occ, &terms[2 * i + 1].occ, noise)?;
                debug_assert!(d.abs() <= terms[2 * i].half_norm + terms[2 * i + 1].half_norm + 1e-9);
                var += q[i] * q[i] * ws[2 * i] * ws[2 * i + 1] * d.exp_m1();
                for j in (i + 1)..m {
                    let d = inner_product(&terms[2 * i].occ, &terms[2 * j].occ, noise)?;
                    var += 2.0 * q[i] * q[j] * ws[2 * i] * ws[2 * j] * d.exp_m1();
                }
            }
        }
        Ok((tr, var))
    };

    let compute = || (0..settings.replicas).into_par_iter().map(run).collect::<Result<Vec<_>>>();
    let per = if settings.threads == 0 {
        compute()?
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(settings.threads)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(compute)?
    };

    let mut mean_acc = RunningMoments::new();
    let mut var_acc = RunningMoments::new();
    for &(tr, s) in &per {
        mean_acc.push(tr);
        var_acc.push(s);
    }
    Ok(TraceMoments {
        mean: mean_acc.mean(),
        mean_stderr: mean_acc.stderr(),
        variance: settings.with_variance.then(|| var_acc.mean()),
        variance_stderr: settings.with_variance.then(|| var_acc.stderr()),
        nodes: m,
        replicas: settings.replicas,
    })
}

/// Everything a single pinned bridge contributes to the trace weights.
struct BridgeTerms {
    occ: StepFunction,
    /// `||L||^2 / 2` under the covariance form
    half_norm: f64,
    robin_log: f64,
    survival: f64,
    int_v: f64,
}

impl BridgeTerms {
    fn weight(&self) -> f64 {
        self.survival * (self.robin_log + self.half_norm - self.int_v).exp()
    }
}

fn bridge_terms<R: Rng + ?Sized>(
    domain: &Domain,
    noise: &CovarianceModel,
    potential: &Potential,
    settings: &TraceSettings,
    x: f64,
    rng: &mut R,
) -> Result<BridgeTerms> {
    let traj = sample_bridge(domain, settings.t, settings.n_steps, x, x, rng)?;
    let occ = occupation_density(&traj, settings.bin_width)?;
    let half_norm = 0.5 * seminorm_sq(&occ, noise)?;
    let (survival, robin_log) = boundary_weight(domain, &traj, settings.boundary_band)?;
    let int_v = integral_v(&traj, potential);
    Ok(BridgeTerms { occ, half_norm, robin_log, survival, int_v })
}

/// One joint draw of the exponents in the variance integrand, from two
/// independent bridges pinned at `x` and `y` with occupation densities `L`
/// and `L'`: the integrand of the pair formula is `e^{a+b+c} (e^d - 1)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FunctionalSample {
    /// `-int V` along both paths
    pub a: f64,
    /// boundary log-weight of both paths; `-inf` when a Dirichlet side
    /// absorbs one of them
    pub b: f64,
    /// `(||L||^2 + ||L'||^2) / 2` under the covariance form
    pub c: f64,
    /// cross term `<L, L'>` under the covariance form
    pub d: f64,
}

/// Sample the four exponents at a diagonal pair `(x, y)`.
pub fn abcd_sample<R: Rng + ?Sized>(
    domain: &Domain,
    noise: &CovarianceModel,
    potential: &Potential,
    settings: &TraceSettings,
    x: f64,
    y: f64,
    rng: &mut R,
) -> Result<FunctionalSample> {
    settings.validate()?;
    if !domain.contains(x) || !domain.contains(y) {
        return Err(Error::Input(format!("pinning points ({x}, {y}) must lie inside the domain")));
    }
    let z = bridge_terms(domain, noise, potential, settings, x, rng)?;
    let zb = bridge_terms(domain, noise, potential, settings, y, rng)?;
    let d = inner_product(&z.occ, &zb.occ, noise)?;
    Ok(FunctionalSample {
        a: -(z.int_v + zb.int_v),
        b: z.robin_log + zb.robin_log + (z.survival * zb.survival).ln(),
        c: z.half_norm + zb.half_norm,
        d,
    })
}

/// Trace variance per time with a fitted log-log decay slope.
///
/// A scan whose variances are all zero (deterministic operator) keeps
/// `fit = None` instead of failing, so degenerate configurations still
/// produce a report.
pub fn variance_scan(
    domain: &Domain,
    noise: &CovarianceModel,
    potential: &Potential,
    t_list: &[f64],
    replicas: u64,
    seed: u64,
    threads: usize,
) -> Result<ScanResult> {
    if t_list.len() < 4 {
        return Err(Error::Input(format!("a variance scan needs at least 4 times, got {}", t_list.len())));
    }
    if let Some(&t) = t_list.iter().find(|&&t| !(t > 0.0 && t <= 1.0)) {
        return Err(Error::Input(format!("scan times must lie in (0, 1], got {t}")));
    }
    let mut rows = Vec::with_capacity(t_list.len());
    for &t in t_list {
        let mut s = TraceSettings::for_time(t)?;
        s.replicas = replicas;
        s.seed = seed;
        s.threads = threads;
        let m = trace_moments(domain, noise, potential, &s)?;
        rows.push(ScanRow {
            t,
            estimate: m.variance.expect("variance scan always estimates variances"),
            stderr: m.variance_stderr.expect("variance scan always estimates variances"),
            n: m.replicas,
        });
    }
    let mut scan = ScanResult::new(
        format!("trace-variance {} {}", domain.case_name(), noise.describe()),
        rows,
    );
    if scan.rows.iter().any(|r| r.estimate > 0.0) {
        scan.fit = Some(fit_exponent(&scan)?);
    }
    Ok(scan)
}

/// Time integral of the potential along the path, trapezoid on the nodes.
fn integral_v(traj: &Trajectory, potential: &Potential) -> f64 {
    let p = traj.points();
    let last = p.len() - 1;
    let mut s = 0.5 * (potential.eval(p[0]) + potential.eval(p[last]));
    for &x in &p[1..last] {
        s += potential.eval(x);
    }
    s * traj.dt()
}

/// Multiplicative survival weight and additive Robin log-weight of a path.
fn boundary_weight(domain: &Domain, traj: &Trajectory, band: f64) -> Result<(f64, f64)> {
    let dt = traj.dt();
    match domain {
        Domain::Line => Ok((1.0, 0.0)),
        Domain::HalfLine { left } => match left {
            Boundary::Dirichlet => Ok((level_survival(traj.raw_points(), dt, 0.0), 0.0)),
            Boundary::Robin(a) => {
                let log = if *a == 0.0 { 0.0 } else { a * boundary_local_time(traj, 0.0, band)? };
                Ok((1.0, log))
            }
        },
        Domain::Interval { b, left, right } => {
            let mut surv = 1.0;
            let mut robin = 0.0;
            // a folded path touches 0 where the raw path meets 2bZ, and
            // touches b where it meets 2bZ + b
            match left {
                Boundary::Dirichlet => surv *= lattice_survival(traj.raw_points(), dt, 2.0 * b, 0.0),
                Boundary::Robin(a) => {
                    if *a != 0.0 {
                        robin += a * boundary_local_time(traj, 0.0, band)?;
                    }
                }
            }
            match right {
                Boundary::Dirichlet => {
                    if surv > 0.0 {
                        surv *= lattice_survival(traj.raw_points(), dt, 2.0 * b, *b);
                    }
                }
                Boundary::Robin(a) => {
                    if *a != 0.0 {
                        robin += a * boundary_local_time(traj, *b, band)?;
                    }
                }
            }
            Ok((surv, robin))
        }
    }
}
