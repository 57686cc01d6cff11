//! Stationary Gaussian noise models and their covariance bilinear form.
//!
//! A noise model is described by an even covariance kernel `gamma`; the
//! associated semi-inner product on functions is
//! `<f, g> = int int f(x) gamma(x - y) g(y) dx dy`.
//! Four classes are supported:
//!
//! * **White**: `gamma = sigma^2 * delta_0`, so `<f, g> = sigma^2 int f g`.
//! * **Fractional**: `gamma(x) = sigma^2 H (2H - 1) |x|^{2H-2}` with Hurst
//!   index `H` in (1/2, 1).
//! * **LpSingular**: `gamma = gamma_1 + gamma_2` with `gamma_1` an integrable
//!   `L^p` singular part given together with a closed-form second
//!   antiderivative, and `gamma_2` even and bounded.
//! * **Bounded**: `gamma` even and bounded.
//!
//! On step functions the form is evaluated exactly for the white, fractional
//! and singular parts (cell-pair integrals reduce to second differences of
//! the kernel's second antiderivative `psi`, `psi'' = gamma`); bounded parts
//! use midpoint quadrature per cell pair.

use crate::error::{Error, Result};
use crate::stats::ln_gamma;
use crate::stepfn::{align, StepFunction};
use rand::Rng;
use rand_distr::StandardNormal;
use std::fmt;
use std::sync::Arc;

type KernelFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Even bounded kernel with its supremum (used for exact L1-type bounds).
#[derive(Clone)]
pub struct BoundedKernel {
    eval: KernelFn,
    sup: f64,
}

impl BoundedKernel {
    pub fn new(sup: f64, eval: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        if !(sup.is_finite() && sup >= 0.0) {
            return Err(Error::Input(format!("kernel bound must be finite and >= 0, got {sup}")));
        }
        Ok(BoundedKernel { eval: Arc::new(eval), sup })
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    pub fn sup(&self) -> f64 {
        self.sup
    }
}

impl fmt::Debug for BoundedKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundedKernel").field("sup", &self.sup).finish()
    }
}

/// Integrable singular kernel part together with its second antiderivative
/// `psi` (even, `psi(0) = 0`, `psi'(0) = 0`, `psi'' = gamma_1`) and its
/// `L^p` norm.
#[derive(Clone)]
pub struct SingularKernel {
    eval: KernelFn,
    psi: KernelFn,
    lp_norm: f64,
}

impl SingularKernel {
    pub fn new(
        lp_norm: f64,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        psi: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(lp_norm.is_finite() && lp_norm > 0.0) {
            return Err(Error::Input(format!("L^p norm must be finite and positive, got {lp_norm}")));
        }
        Ok(SingularKernel { eval: Arc::new(eval), psi: Arc::new(psi), lp_norm })
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    pub fn psi(&self, x: f64) -> f64 {
        (self.psi)(x)
    }

    pub fn lp_norm(&self) -> f64 {
        self.lp_norm
    }
}

impl fmt::Debug for SingularKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SingularKernel").field("lp_norm", &self.lp_norm).finish()
    }
}

/// Covariance class of the noise.
#[derive(Debug, Clone)]
pub enum ModelKind {
    White { sigma2: f64 },
    Fractional { sigma2: f64, hurst: f64 },
    LpSingular { p: f64, gamma1: SingularKernel, gamma2: Option<BoundedKernel> },
    Bounded { gamma: BoundedKernel },
}

/// A noise model: covariance class plus optional asserted compact support
/// radius of the kernel (used for separation short-circuits and for the
/// choice of variance-decay exponent).
#[derive(Debug, Clone)]
pub struct CovarianceModel {
    pub kind: ModelKind,
    pub support_radius: Option<f64>,
}

impl CovarianceModel {
    /// White noise with variance parameter `sigma2 >= 0`.
    ///
    /// `sigma2 = 0` is the degenerate noiseless model, kept representable so
    /// deterministic limits can be cross-checked.
    pub fn white(sigma2: f64) -> Result<Self> {
        if !(sigma2 >= 0.0) || !sigma2.is_finite() {
            return Err(Error::Input(format!("white noise needs sigma2 >= 0, got {sigma2}")));
        }
        Ok(CovarianceModel { kind: ModelKind::White { sigma2 }, support_radius: None })
    }

    /// Fractional noise, Hurst index strictly between 1/2 and 1.
    pub fn fractional(sigma2: f64, hurst: f64) -> Result<Self> {
        if !(sigma2 >= 0.0) || !sigma2.is_finite() {
            return Err(Error::Input(format!("fractional noise needs sigma2 >= 0, got {sigma2}")));
        }
        if !(hurst > 0.5 && hurst < 1.0) {
            return Err(Error::Input(format!("Hurst index must lie in (1/2, 1), got {hurst}")));
        }
        Ok(CovarianceModel { kind: ModelKind::Fractional { sigma2, hurst }, support_radius: None })
    }

    /// Singular + bounded decomposition with `gamma_1` in `L^p`, `p >= 1`.
    pub fn lp_singular(p: f64, gamma1: SingularKernel, gamma2: Option<BoundedKernel>) -> Result<Self> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::Input(format!("L^p singular class needs p >= 1, got {p}")));
        }
        Ok(CovarianceModel { kind: ModelKind::LpSingular { p, gamma1, gamma2 }, support_radius: None })
    }

    pub fn bounded(gamma: BoundedKernel) -> Result<Self> {
        Ok(CovarianceModel { kind: ModelKind::Bounded { gamma }, support_radius: None })
    }

    /// Assert that the kernel vanishes outside `[-radius, radius]`.
    pub fn with_support_radius(mut self, radius: f64) -> Result<Self> {
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(Error::Input(format!("support radius must be >= 0, got {radius}")));
        }
        self.support_radius = Some(radius);
        Ok(self)
    }

    /// Preset: `gamma_1(x) = |x|^{-e} (1 - |x|)` on `|x| <= 1`, zero beyond.
    ///
    /// The linear taper keeps the truncated kernel convex and decreasing on
    /// `(0, inf)`, hence positive definite (Polya); a hard truncation of
    /// `|x|^{-e}` is not. Requires `0 < e < 1` and `e p < 1` so that
    /// `gamma_1` lies in `L^p`. The kernel is supported on `[-1, 1]`.
    pub fn lp_power(e: f64, p: f64) -> Result<Self> {
        if !(e > 0.0 && e < 1.0) {
            return Err(Error::Input(format!("power kernel exponent must lie in (0,1), got {e}")));
        }
        if !(p >= 1.0) || !(e * p < 1.0) {
            return Err(Error::Input(format!(
                "power kernel needs p >= 1 and e*p < 1 for gamma_1 in L^p, got e={e}, p={p}"
            )));
        }
        // ||gamma_1||_p^p = int_0^1 z^{-ep} (1-z)^p dz * 2 ... restricted to one
        // side the kernel integrates to B(1-ep, p+1); the L^p norm on R gets a
        // factor 2^{1/p}.
        let ln_beta = ln_gamma(1.0 - e * p) + ln_gamma(p + 1.0) - ln_gamma(2.0 - e * p + p);
        let lp_norm = (2.0_f64.ln() / p + ln_beta / p).exp();
        let c1 = 1.0 / ((1.0 - e) * (2.0 - e));
        let c2 = 1.0 / ((2.0 - e) * (3.0 - e));
        let slope1 = 1.0 / (1.0 - e) - 1.0 / (2.0 - e);
        let psi1 = c1 - c2;
        let gamma1 = SingularKernel::new(
            lp_norm,
            move |x: f64| {
                let z = x.abs();
                if z >= 1.0 || z == 0.0 {
                    if z == 0.0 { f64::INFINITY } else { 0.0 }
                } else {
                    z.powf(-e) * (1.0 - z)
                }
            },
            move |x: f64| {
                let z = x.abs();
                if z <= 1.0 {
                    c1 * z.powf(2.0 - e) - c2 * z.powf(3.0 - e)
                } else {
                    psi1 + slope1 * (z - 1.0)
                }
            },
        )?;
        CovarianceModel::lp_singular(p, gamma1, None)?.with_support_radius(1.0)
    }

    /// Preset: `gamma_1(x) = (-ln|x|)^k` on `|x| <= 1`, zero beyond, for
    /// integer `k` in 1..=3 (closed-form antiderivatives).
    ///
    /// Convex and decreasing on `(0, 1]` with a continuous join at 1, hence
    /// positive definite. Supported on `[-1, 1]`.
    pub fn lp_log(k: u32, p: f64) -> Result<Self> {
        if !(1..=3).contains(&k) {
            return Err(Error::Input(format!("log kernel exponent must be an integer in 1..=3, got {k}")));
        }
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::Input(format!("log kernel needs p >= 1, got {p}")));
        }
        // ||gamma_1||_p^p = 2 int_0^1 (-ln z)^{kp} dz = 2 Gamma(kp + 1)
        let kp = k as f64 * p;
        let lp_norm = ((2.0_f64.ln() + ln_gamma(kp + 1.0)) / p).exp();
        let kf = {
            let mut f = 1.0;
            for j in 2..=k {
                f *= j as f64;
            }
            f
        };
        // psi(z) = (z^2/2) k! sum_{j=0}^{k} sum_{i=0}^{j} (-ln z)^i / (i! 2^{j-i})
        let psi_inside = move |z: f64| -> f64 {
            if z == 0.0 {
                return 0.0;
            }
            let l = -z.ln();
            let mut total = 0.0;
            for j in 0..=k {
                let mut fact_i = 1.0;
                let mut pow_l = 1.0;
                for i in 0..=j {
                    if i > 0 {
                        fact_i *= i as f64;
                        pow_l *= l;
                    }
                    total += pow_l / (fact_i * 2f64.powi((j - i) as i32));
                }
            }
            0.5 * z * z * kf * total
        };
        let psi1 = psi_inside(1.0);
        let gamma1 = SingularKernel::new(
            lp_norm,
            move |x: f64| {
                let z = x.abs();
                if z >= 1.0 || z == 0.0 {
                    if z == 0.0 { f64::INFINITY } else { 0.0 }
                } else {
                    (-z.ln()).powi(k as i32)
                }
            },
            move |x: f64| {
                let z = x.abs();
                if z <= 1.0 {
                    psi_inside(z)
                } else {
                    psi1 + kf * (z - 1.0)
                }
            },
        )?;
        CovarianceModel::lp_singular(p, gamma1, None)?.with_support_radius(1.0)
    }

    /// Preset: bounded Gaussian kernel `gamma(x) = e^{-x^2/2}`.
    pub fn bounded_gaussian() -> Result<Self> {
        CovarianceModel::bounded(BoundedKernel::new(1.0, |x: f64| (-0.5 * x * x).exp())?)
    }

    /// Preset: constant kernel `gamma == c` (perfectly correlated noise).
    pub fn bounded_const(c: f64) -> Result<Self> {
        if !(c >= 0.0) || !c.is_finite() {
            return Err(Error::Input(format!("constant kernel level must be >= 0, got {c}")));
        }
        CovarianceModel::bounded(BoundedKernel::new(c, move |_| c)?)
    }

    /// Variance-scaling exponent `d` of the model: `sup_x E||L_t||^2` grows
    /// like `t^d` for occupation measures of unit mass rate.
    pub fn d_exponent(&self) -> f64 {
        match &self.kind {
            ModelKind::White { .. } => 1.5,
            ModelKind::Fractional { hurst, .. } => 1.0 + hurst,
            ModelKind::LpSingular { p, .. } => 2.0 - 1.0 / (2.0 * p),
            ModelKind::Bounded { .. } => 2.0,
        }
    }

    /// True when the noise is almost surely zero (`sigma2 = 0`, or a bounded
    /// kernel that is identically zero), so the operator is deterministic.
    pub fn is_degenerate(&self) -> bool {
        match &self.kind {
            ModelKind::White { sigma2 } | ModelKind::Fractional { sigma2, .. } => *sigma2 == 0.0,
            ModelKind::LpSingular { .. } => false,
            ModelKind::Bounded { gamma } => gamma.sup() == 0.0,
        }
    }

    /// Short human-readable tag for logs and reports.
    pub fn describe(&self) -> String {
        let base = match &self.kind {
            ModelKind::White { sigma2 } => format!("white(sigma2={sigma2})"),
            ModelKind::Fractional { sigma2, hurst } => {
                format!("fractional(sigma2={sigma2}, H={hurst})")
            }
            ModelKind::LpSingular { p, gamma2, .. } => {
                if gamma2.is_some() {
                    format!("lp-singular(p={p}, with bounded part)")
                } else {
                    format!("lp-singular(p={p})")
                }
            }
            ModelKind::Bounded { gamma } => format!("bounded(sup={})", gamma.sup()),
        };
        match self.support_radius {
            Some(r) => format!("{base} support<={r}"),
            None => base,
        }
    }
}

/// Second difference of `psi` at lattice distance `d`:
/// the exact integral of `gamma(x - y)` over a pair of bins at offset `d`.
fn psi_pair_weight(psi: &dyn Fn(f64) -> f64, d: i64, h: f64) -> f64 {
    let z = d as f64 * h;
    psi(z + h) + psi(z - h) - 2.0 * psi(z)
}

/// Table of cell-pair weights `W(d)` for lattice offsets `d_min..=d_max`.
fn weight_table(kind: &ModelKind, h: f64, d_min: i64, d_max: i64) -> Vec<f64> {
    let len = (d_max - d_min + 1) as usize;
    let mut w = vec![0.0; len];
    match kind {
        ModelKind::White { sigma2 } => {
            if d_min <= 0 && 0 <= d_max {
                w[(-d_min) as usize] = sigma2 * h;
            }
        }
        ModelKind::Fractional { sigma2, hurst } => {
            let s2 = *sigma2;
            let two_h = 2.0 * hurst;
            let psi = move |z: f64| 0.5 * s2 * z.abs().powf(two_h);
            for (i, wi) in w.iter_mut().enumerate() {
                *wi = psi_pair_weight(&psi, d_min + i as i64, h);
            }
        }
        ModelKind::LpSingular { gamma1, gamma2, .. } => {
            for (i, wi) in w.iter_mut().enumerate() {
                let d = d_min + i as i64;
                let mut v = psi_pair_weight(&|z| gamma1.psi(z), d, h);
                if let Some(g2) = gamma2 {
                    v += h * h * g2.eval(d as f64 * h);
                }
                *wi = v;
            }
        }
        ModelKind::Bounded { gamma } => {
            for (i, wi) in w.iter_mut().enumerate() {
                *wi = h * h * gamma.eval((d_min + i as i64) as f64 * h);
            }
        }
    }
    w
}

fn supports_separated(f: &StepFunction, g: &StepFunction, radius: f64) -> bool {
    match (f.support(), g.support()) {
        (Some((af, bf)), Some((ag, bg))) => (ag - bf).max(af - bg) > radius,
        // a zero function is orthogonal to everything
        _ => true,
    }
}

/// Covariance bilinear form `<f, g>` for step functions on commensurable
/// grids.
///
/// White/fractional/singular contributions are exact cell-pair integrals;
/// bounded parts use midpoint quadrature. If the model asserts a compact
/// support radius and the supports of `f` and `g` are separated by more than
/// that radius, the result is exactly 0 without touching the kernel.
pub fn inner_product(f: &StepFunction, g: &StepFunction, model: &CovarianceModel) -> Result<f64> {
    if let Some(radius) = model.support_radius {
        if supports_separated(f, g, radius) {
            return Ok(0.0);
        }
    }
    let pair = align(f, g)?;
    let (nf, ng) = (pair.f.len() as i64, pair.g.len() as i64);
    if nf == 0 || ng == 0 {
        return Ok(0.0);
    }
    // offset of g's first bin relative to f's first bin; pair (i, j) sits at
    // lattice distance d = i - j - offset
    let d_min = -(ng - 1) - pair.offset;
    let d_max = (nf - 1) - pair.offset;
    let table = weight_table(&model.kind, pair.h, d_min, d_max);
    let mut total = 0.0;
    for (i, &fi) in pair.f.iter().enumerate() {
        if fi == 0.0 {
            continue;
        }
        let base = i as i64 - pair.offset - d_min;
        let mut row = 0.0;
        for (j, &gj) in pair.g.iter().enumerate() {
            row += gj * table[(base - j as i64) as usize];
        }
        total += fi * row;
    }
    Ok(total)
}

/// `||f||^2 = <f, f>`, clamped to 0 when round-off drives it infinitesimally
/// negative; a genuinely negative value means the kernel is not a covariance
/// on this grid and is reported as a model error.
pub fn seminorm_sq(f: &StepFunction, model: &CovarianceModel) -> Result<f64> {
    let v = inner_product(f, f, model)?;
    if v >= 0.0 {
        return Ok(v);
    }
    let tol = 1e-12 * (1.0 + f.l1() * f.l1());
    if v >= -tol {
        Ok(0.0)
    } else {
        Err(Error::Model(format!(
            "kernel is not positive semidefinite on this grid: ||f||^2 = {v}"
        )))
    }
}

/// Upper bound on `||f||^2` implied by Young's inequality for the model
/// class; used as a verified invariant by the samplers and tests.
///
/// White: exactly `sigma^2 ||f||_2^2`. Fractional: `2 H sigma^2 ||f||_2^2 +
/// H(2H-1) sigma^2 ||f||_1^2`. LpSingular: `||gamma_1||_p ||f||_q^2 +
/// sup|gamma_2| ||f||_1^2` with `q = 2p/(2p-1)`. Bounded: `sup|gamma|
/// ||f||_1^2`.
pub fn lp_upper_bound(f: &StepFunction, model: &CovarianceModel) -> f64 {
    let h = f.bin_width();
    let lq_sq = |q: f64| -> f64 {
        let s: f64 = f.values().iter().map(|v| v.abs().powf(q)).sum();
        (h * s).powf(2.0 / q)
    };
    match &model.kind {
        ModelKind::White { sigma2 } => sigma2 * f.l2_sq(),
        ModelKind::Fractional { sigma2, hurst } => {
            2.0 * hurst * sigma2 * f.l2_sq()
                + hurst * (2.0 * hurst - 1.0) * sigma2 * f.l1() * f.l1()
        }
        ModelKind::LpSingular { p, gamma1, gamma2 } => {
            let q = 2.0 * p / (2.0 * p - 1.0);
            let g2 = gamma2.as_ref().map_or(0.0, |g| g.sup());
            gamma1.lp_norm() * lq_sq(q) + g2 * f.l1() * f.l1()
        }
        ModelKind::Bounded { gamma } => gamma.sup() * f.l1() * f.l1(),
    }
}

/// Uniform cell grid `[origin + i h, origin + (i+1) h)`, `i < n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellGrid {
    pub origin: f64,
    pub h: f64,
    pub n: usize,
}

impl CellGrid {
    pub fn new(origin: f64, h: f64, n: usize) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() || n == 0 {
            return Err(Error::Input(format!("cell grid needs h > 0 and n > 0, got h={h}, n={n}")));
        }
        Ok(CellGrid { origin, h, n })
    }

    pub fn center(&self, i: usize) -> f64 {
        self.origin + (i as f64 + 0.5) * self.h
    }
}

/// Gram matrix `G_ij = <f_i, f_j>` of a family of step functions, validated
/// positive semidefinite.
///
/// Validation runs a pivoted LDL^T factorization; a negative direction
/// larger than `1e-10 * trace` rejects the model, while rank deficiency at
/// that scale (legitimate degeneracy, e.g. perfectly correlated noise or a
/// smooth kernel on a fine grid) is accepted.
pub fn gram_matrix(fields: &[StepFunction], model: &CovarianceModel) -> Result<Vec<Vec<f64>>> {
    let n = fields.len();
    let mut g = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let v = inner_product(&fields[i], &fields[j], model)?;
            g[i][j] = v;
            g[j][i] = v;
        }
    }
    pivoted_ldlt(&g)?;
    Ok(g)
}

/// Diagonally pivoted LDL^T factorization used for PSD validation and
/// sampling. Returns `(g, d)` with `m ~= g diag(d) g^T`; `g` is a row
/// permutation of a unit lower-triangular factor, so callers must treat it
/// as a dense rectangular factor rather than a triangle.
///
/// Pivoting always takes the largest remaining diagonal, so the
/// factorization stops cleanly when that diagonal falls below the
/// tolerance: for a positive semidefinite matrix the whole remaining Schur
/// block is then pinned near zero by Cauchy-Schwarz, and any larger entry
/// certifies a negative direction. This keeps severely rank-deficient
/// kernels (smooth covariances on fine grids collapse to a few dozen modes)
/// from tripping false rejections that plague the unpivoted variant.
fn pivoted_ldlt(m: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let n = m.len();
    let trace: f64 = (0..n).map(|i| m[i][i]).sum();
    let tol = 1e-10 * trace.abs().max(f64::MIN_POSITIVE);
    // right-looking outer-product form on a working copy; perm[a] is the
    // original index sitting at pivoted position a
    let mut s = m.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut l = vec![vec![0.0; n]; n];
    let mut d = vec![0.0; n];
    for step in 0..n {
        let (q, piv) = (step..n)
            .map(|i| (i, s[i][i]))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty range");
        if !piv.is_finite() {
            return Err(Error::Numeric(format!(
                "covariance matrix has a non-finite diagonal entry {piv} at index {}",
                perm[q]
            )));
        }
        if piv <= tol {
            // largest remaining diagonal is at noise level, so a PSD matrix
            // allows no remaining entry beyond sqrt(s_ii s_jj) ~ tol; give
            // modest headroom for round-off accumulated during elimination
            for i in step..n {
                if s[i][i] < -tol {
                    return Err(Error::Model(format!(
                        "kernel is not positive semidefinite on this grid: residual diagonal {} at index {} (tolerance {tol})",
                        s[i][i], perm[i]
                    )));
                }
                for j in (i + 1)..n {
                    if s[i][j].abs() > 4.0 * tol {
                        return Err(Error::Model(format!(
                            "kernel is not positive semidefinite on this grid: residual {} between indices {} and {} under a vanishing diagonal (tolerance {tol})",
                            s[i][j], perm[i], perm[j]
                        )));
                    }
                }
            }
            break;
        }
        if q != step {
            s.swap(step, q);
            for row in s.iter_mut() {
                row.swap(step, q);
            }
            perm.swap(step, q);
            l.swap(step, q);
        }
        d[step] = piv;
        l[step][step] = 1.0;
        for i in (step + 1)..n {
            l[i][step] = s[i][step] / piv;
        }
        for i in (step + 1)..n {
            let li = l[i][step];
            for j in (step + 1)..=i {
                let v = s[i][j] - li * l[j][step] * piv;
                s[i][j] = v;
                s[j][i] = v;
            }
        }
    }
    // undo the row permutation so g diag(d) g^T reproduces m as given
    let mut g = vec![Vec::new(); n];
    for (row, orig) in l.into_iter().zip(perm) {
        g[orig] = row;
    }
    Ok((g, d))
}

/// Factored sampler for the cell-average noise vector on a uniform grid.
///
/// Component `i` is the noise tested against the normalized indicator of
/// cell `i`, so the covariance is `<1_i, 1_j> / h^2`; for white noise this is
/// `sigma^2/h` on the diagonal. The factorization is done once and can be
/// reused across realizations.
#[derive(Debug, Clone)]
pub struct NoiseSampler {
    factor: SamplerFactor,
    n: usize,
}

#[derive(Debug, Clone)]
enum SamplerFactor {
    /// iid cells, e.g. white noise: standard deviation per cell
    Diagonal(f64),
    /// dense factor with sqrt(pivots) folded in, rows cut at the effective
    /// rank; not triangular because the factorization pivots
    Dense(Vec<Vec<f64>>),
}

impl NoiseSampler {
    pub fn new(grid: &CellGrid, model: &CovarianceModel) -> Result<Self> {
        let n = grid.n;
        if let ModelKind::White { sigma2 } = model.kind {
            // diagonal covariance, skip the dense factorization
            return Ok(NoiseSampler { factor: SamplerFactor::Diagonal((sigma2 / grid.h).sqrt()), n });
        }
        // Toeplitz covariance from the weight table over all offsets
        let table = weight_table(&model.kind, grid.h, -(n as i64 - 1), n as i64 - 1);
        let h2 = grid.h * grid.h;
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                m[i][j] = table[(i as i64 - j as i64 + n as i64 - 1) as usize] / h2;
            }
        }
        let (g, d) = pivoted_ldlt(&m)?;
        // fold sqrt(d) into the columns and drop the zero columns past the
        // effective rank
        let rank = d.iter().take_while(|&&dj| dj > 0.0).count();
        let mut scale = g;
        for row in scale.iter_mut() {
            row.truncate(rank);
            for (j, v) in row.iter_mut().enumerate() {
                *v *= d[j].sqrt();
            }
        }
        Ok(NoiseSampler { factor: SamplerFactor::Dense(scale), n })
    }

    /// Draw one correlated cell-noise vector. Always consumes exactly `n`
    /// standard normals from the stream.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let z: Vec<f64> = (0..self.n).map(|_| rng.sample(StandardNormal)).collect();
        match &self.factor {
            SamplerFactor::Diagonal(s) => z.iter().map(|&v| s * v).collect(),
            SamplerFactor::Dense(scale) => {
                let mut out = vec![0.0; self.n];
                for (i, row) in scale.iter().enumerate() {
                    let mut acc = 0.0;
                    for (j, &gij) in row.iter().enumerate() {
                        acc += gij * z[j];
                    }
                    out[i] = acc;
                }
                out
            }
        }
    }
}

/// Draw the cell-average noise vector for `grid` in one shot.
pub fn sample_cell_noise<R: Rng + ?Sized>(
    grid: &CellGrid,
    model: &CovarianceModel,
    rng: &mut R,
) -> Result<Vec<f64>> {
    Ok(NoiseSampler::new(grid, model)?.draw(rng))
}
