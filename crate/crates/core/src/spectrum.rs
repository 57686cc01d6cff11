//! Finite-difference route to the spectrum: a vertex-centered second-order
//! discretization of `-1/2 d^2/dx^2 + V + noise`, Sturm-sequence bisection
//! for eigenvalues, and heat traces summed over ascending eigenvalue blocks.
//!
//! Boundary handling on the vertex grid: a Dirichlet end drops its boundary
//! vertex; a Robin end keeps it with the corner diagonal
//! `(1 - h a) / (2 h^2) + V`, which annihilates constants at `a = 0` so the
//! Neumann limit is exact at the matrix level. Unbounded domains are boxed
//! into an explicit extent with absorbing cutoff ends.

use crate::domain::{Boundary, Domain};
use crate::error::{Error, Result};
use crate::noise::{CellGrid, CovarianceModel, NoiseSampler};
use crate::potential::Potential;
use crate::rng::{stream_rng, substream};
use crate::stats::RunningMoments;
use rayon::prelude::*;
use serde::Serialize;

/// Symmetric tridiagonal matrix with a constant off-diagonal.
#[derive(Debug, Clone)]
pub struct Tridiagonal {
    diag: Vec<f64>,
    off: f64,
}

impl Tridiagonal {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    pub fn off_diagonal(&self) -> f64 {
        self.off
    }

    /// Number of eigenvalues strictly below `lambda` (Sturm count).
    pub fn count_below(&self, lambda: f64) -> usize {
        let off2 = self.off * self.off;
        let mut count = 0;
        let mut q = 1.0;
        for (i, &d) in self.diag.iter().enumerate() {
            q = if i == 0 { d - lambda } else { d - lambda - off2 / q };
            if q == 0.0 {
                q = -f64::MIN_POSITIVE;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn bracket(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &d in &self.diag {
            lo = lo.min(d);
            hi = hi.max(d);
        }
        let r = 2.0 * self.off.abs();
        (lo - r, hi + r)
    }

    /// The `k`-th eigenvalue in ascending order (0-based), by bisection.
    pub fn eigenvalue(&self, k: usize) -> Result<f64> {
        if k >= self.dim() {
            return Err(Error::Input(format!("eigenvalue index {k} out of range for dimension {}", self.dim())));
        }
        let (mut lo, mut hi) = self.bracket();
        // Gershgorin guarantees count_below(lo) = 0 and count_below(hi) = n
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.count_below(mid) >= k + 1 {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 1e-14 * (1.0 + mid.abs()) {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// The lowest `count` eigenvalues in ascending order.
    pub fn lowest_eigenvalues(&self, count: usize) -> Result<Vec<f64>> {
        (0..count).map(|k| self.eigenvalue(k)).collect()
    }

    /// `sum exp(-t lambda_k)`, ascending until the remaining tail is
    /// negligible at double precision.
    pub fn heat_trace(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Input(format!("heat trace time must be positive and finite, got {t}")));
        }
        let n = self.dim();
        let mut acc = 0.0;
        for k in 0..n {
            let term = (-t * self.eigenvalue(k)?).exp();
            acc += term;
            if term * (n - k - 1) as f64 <= 1e-16 * acc {
                break;
            }
        }
        Ok(acc)
    }
}

/// Noiseless discretization plus the noise cell layout, reusable across
/// noise realizations.
#[derive(Debug, Clone)]
pub struct Discretization {
    h: f64,
    nodes: Vec<f64>,
    diag0: Vec<f64>,
    off: f64,
    cells: CellGrid,
}

/// Discretize the operator on `m` mesh cells. Bounded domains use their own
/// extent (pass `None`); unbounded domains need an explicit finite `extent`
/// and get absorbing cutoff ends.
pub fn discretize(
    domain: &Domain,
    potential: &Potential,
    extent: Option<(f64, f64)>,
    m: usize,
) -> Result<Discretization> {
    if m < 8 {
        return Err(Error::Input("need at least 8 mesh cells".into()));
    }
    let (lo, hi, left, right) = match domain {
        Domain::Interval { b, left, right } => {
            if extent.is_some() {
                return Err(Error::Input("a bounded domain fixes its own extent".into()));
            }
            (0.0, *b, *left, *right)
        }
        Domain::HalfLine { left } => {
            let (a, b) = extent.ok_or_else(|| Error::Input("half-line discretization needs an extent".into()))?;
            if a != 0.0 || !(b > 0.0) || !b.is_finite() {
                return Err(Error::Input(format!("half-line extent must be (0, R) with finite R > 0, got ({a}, {b})")));
            }
            (0.0, b, *left, Boundary::Dirichlet)
        }
        Domain::Line => {
            let (a, b) = extent.ok_or_else(|| Error::Input("line discretization needs an extent".into()))?;
            if !(b > a) || !a.is_finite() || !b.is_finite() {
                return Err(Error::Input(format!("line extent must be a finite interval, got ({a}, {b})")));
            }
            (a, b, Boundary::Dirichlet, Boundary::Dirichlet)
        }
    };
    let h = (hi - lo) / m as f64;
    let inv2 = 1.0 / (2.0 * h * h);
    let mut nodes = Vec::with_capacity(m + 1);
    let mut diag0 = Vec::with_capacity(m + 1);
    let mut push = |j: usize, corner: Option<f64>| {
        let x = lo + j as f64 * h;
        nodes.push(x);
        let kinetic = match corner {
            Some(a) => (1.0 - h * a) * inv2,
            None => 2.0 * inv2,
        };
        diag0.push(kinetic + potential.eval(x));
    };
    match left {
        Boundary::Dirichlet => {}
        Boundary::Robin(a) => push(0, Some(a)),
    }
    for j in 1..m {
        push(j, None);
    }
    match right {
        Boundary::Dirichlet => {}
        Boundary::Robin(a) => push(m, Some(a)),
    }
    let first = nodes[0];
    let n = nodes.len();
    let cells = CellGrid::new(first - 0.5 * h, h, n)?;
    Ok(Discretization { h, nodes, diag0, off: -inv2, cells })
}

impl Discretization {
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn dim(&self) -> usize {
        self.diag0.len()
    }

    /// The operator without noise.
    pub fn operator(&self) -> Tridiagonal {
        Tridiagonal { diag: self.diag0.clone(), off: self.off }
    }

    /// The operator with the per-node noise values added to the diagonal.
    pub fn with_noise(&self, xi: &[f64]) -> Result<Tridiagonal> {
        if xi.len() != self.diag0.len() {
            return Err(Error::Input(format!(
                "noise vector length {} does not match dimension {}",
                xi.len(),
                self.diag0.len()
            )));
        }
        let diag = self.diag0.iter().zip(xi).map(|(&d, &x)| d + x).collect();
        Ok(Tridiagonal { diag, off: self.off })
    }

    /// Factored sampler for cell-average noise on this mesh.
    /// Cells of the midpoint grid carrying the noise discretization, one
    /// per vertex.
    pub fn cells(&self) -> &CellGrid {
        &self.cells
    }

    pub fn noise_sampler(&self, model: &CovarianceModel) -> Result<NoiseSampler> {
        NoiseSampler::new(&self.cells, model)
    }
}

/// Heat-trace moments over noise realizations, by direct diagonalization.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralMoments {
    pub mean: f64,
    pub mean_stderr: f64,
    pub variance: f64,
    pub variance_stderr: f64,
    pub replicas: u64,
    pub dim: usize,
}

/// Sample noise realizations, diagonalize each, and accumulate the heat
/// trace's mean and variance. The covariance is factored once.
pub fn spectral_trace_moments(
    disc: &Discretization,
    noise: &CovarianceModel,
    t: f64,
    replicas: u64,
    seed: u64,
    threads: usize,
) -> Result<SpectralMoments> {
    if replicas < 4 {
        return Err(Error::Input("need at least four replicas for variance error bars".into()));
    }
    let sampler = disc.noise_sampler(noise)?;
    let run = |r: u64| -> Result<f64> {
        let mut rng = stream_rng(seed, substream(r, 0));
        let xi = sampler.draw(&mut rng);
        disc.with_noise(&xi)?.heat_trace(t)
    };
    let compute = || (0..replicas).into_par_iter().map(run).collect::<Result<Vec<_>>>();
    let traces = if threads == 0 {
        compute()?
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(compute)?
    };
    let mut acc = RunningMoments::new();
    for &tr in &traces {
        acc.push(tr);
    }
    Ok(SpectralMoments {
        mean: acc.mean(),
        mean_stderr: acc.stderr(),
        variance: acc.variance(),
        variance_stderr: acc.variance_stderr(),
        replicas,
        dim: disc.dim(),
    })
}
