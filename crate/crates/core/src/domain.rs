//! Domains, boundary conditions, and reflected transition kernels.
//!
//! The operator lives on the full line, the half-line `(0, inf)`, or an
//! interval `(0, b)`. Finite endpoints carry either a Dirichlet condition or
//! a Robin condition `f'(c) + alpha f(c) = 0` (with the sign mirrored at a
//! right endpoint so that `alpha = 0` is always Neumann).
//!
//! The reference transition kernel is the *Neumann-reflected* heat kernel of
//! `-Delta/2`: boundary conditions do not enter here, they are accounted for
//! by boundary weights along the sampled paths. On the interval it is the
//! image sum `sum_{k in Z} G_t(x - y - 2kb) + G_t(x + y - 2kb)`, truncated
//! once the dropped Gaussians fall below 1e-15.

use crate::error::{Error, Result};

/// Condition at a finite endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    Dirichlet,
    /// `f'(c) + alpha f(c) = 0` at a left endpoint (sign mirrored on the
    /// right); `Robin(0.0)` is Neumann, `alpha > 0` is attractive and can
    /// bind a state at energy `-alpha^2/2`.
    Robin(f64),
}

impl Boundary {
    pub fn robin_coefficient(self) -> Option<f64> {
        match self {
            Boundary::Dirichlet => None,
            Boundary::Robin(a) => Some(a),
        }
    }
}

/// Spatial domain of the operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Line,
    HalfLine { left: Boundary },
    Interval { b: f64, left: Boundary, right: Boundary },
}

const TAU: f64 = std::f64::consts::TAU;
/// `ln(1e15)`: image sums are truncated when the dropped Gaussian factor is
/// below 1e-15.
const LN_TRUNC: f64 = 34.538776394910684;

fn gauss(t: f64, z: f64) -> f64 {
    (-z * z / (2.0 * t)).exp() / (TAU * t).sqrt()
}

impl Domain {
    pub fn line() -> Self {
        Domain::Line
    }

    pub fn half_line(left: Boundary) -> Result<Self> {
        validate_boundary(left)?;
        Ok(Domain::HalfLine { left })
    }

    pub fn interval(b: f64, left: Boundary, right: Boundary) -> Result<Self> {
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::Input(format!("interval length must be positive and finite, got {b}")));
        }
        validate_boundary(left)?;
        validate_boundary(right)?;
        Ok(Domain::Interval { b, left, right })
    }

    /// Short name of the domain class.
    pub fn case_name(&self) -> &'static str {
        match self {
            Domain::Line => "line",
            Domain::HalfLine { .. } => "half-line",
            Domain::Interval { .. } => "interval",
        }
    }

    /// Length of the domain, `None` when infinite.
    pub fn length(&self) -> Option<f64> {
        match self {
            Domain::Interval { b, .. } => Some(*b),
            _ => None,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        match self {
            Domain::Line => x.is_finite(),
            Domain::HalfLine { .. } => x >= 0.0 && x.is_finite(),
            Domain::Interval { b, .. } => (0.0..=*b).contains(&x),
        }
    }

    pub fn left_boundary(&self) -> Option<Boundary> {
        match self {
            Domain::Line => None,
            Domain::HalfLine { left } => Some(*left),
            Domain::Interval { left, .. } => Some(*left),
        }
    }

    pub fn right_boundary(&self) -> Option<Boundary> {
        match self {
            Domain::Interval { right, .. } => Some(*right),
            _ => None,
        }
    }

    /// Neumann-reflected heat kernel `Pi(t; x, y)` of `-Delta/2`.
    pub fn transition_density(&self, t: f64, x: f64, y: f64) -> f64 {
        debug_assert!(t > 0.0, "transition density needs t > 0");
        debug_assert!(self.contains(x) && self.contains(y), "arguments outside the domain");
        match self {
            Domain::Line => gauss(t, x - y),
            Domain::HalfLine { .. } => gauss(t, x - y) + gauss(t, x + y),
            Domain::Interval { b, .. } => {
                let kmax = image_range(*b, t);
                let mut total = 0.0;
                for k in -kmax..=kmax {
                    let shift = 2.0 * k as f64 * b;
                    total += gauss(t, x - y - shift) + gauss(t, x + y - shift);
                }
                total
            }
        }
    }

    /// Image points `e` of `y` such that the free Gaussian from `x` to `e`
    /// reproduces the reflected kernel: `{y}` on the line, `{y, -y}` on the
    /// half-line, the truncated family `2kb +- y` on the interval. Weights
    /// are the Gaussian factors `G_t(x - e)`.
    pub(crate) fn images(&self, t: f64, y: f64, out: &mut Vec<f64>) {
        out.clear();
        match self {
            Domain::Line => out.push(y),
            Domain::HalfLine { .. } => {
                out.push(y);
                out.push(-y);
            }
            Domain::Interval { b, .. } => {
                let kmax = image_range(*b, t);
                for k in -kmax..=kmax {
                    let shift = 2.0 * k as f64 * b;
                    out.push(shift + y);
                    out.push(shift - y);
                }
            }
        }
    }

    /// Fold a real point back into the domain by reflection (the interval
    /// uses the period-2b even extension).
    pub fn fold(&self, x: f64) -> f64 {
        match self {
            Domain::Line => x,
            Domain::HalfLine { .. } => x.abs(),
            Domain::Interval { b, .. } => {
                let r = x.rem_euclid(2.0 * b);
                if r <= *b { r } else { 2.0 * b - r }
            }
        }
    }
}

fn image_range(b: f64, t: f64) -> i64 {
    ((2.0 * t * LN_TRUNC).sqrt() / (2.0 * b)).ceil() as i64 + 1
}

fn validate_boundary(bc: Boundary) -> Result<()> {
    if let Boundary::Robin(a) = bc {
        if !a.is_finite() {
            return Err(Error::Input(format!("Robin coefficient must be finite, got {a}")));
        }
    }
    Ok(())
}
