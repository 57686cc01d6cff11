//! Piecewise-constant densities on a uniform bin lattice.
//!
//! A [`StepFunction`] stores densities on contiguous bins of width `h`
//! starting at `origin`. Occupation measures, noise cell indicators and every
//! bilinear-form argument in this crate are step functions; keeping all of
//! them anchored to the lattice `h * Z` makes pairs of fields commensurable
//! without resampling error.

use crate::error::{Error, Result};
use std::borrow::Cow;

#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    origin: f64,
    bin_width: f64,
    values: Vec<f64>,
}

impl StepFunction {
    /// Build a step function; `bin_width` must be positive and finite and
    /// every density finite.
    pub fn new(origin: f64, bin_width: f64, values: Vec<f64>) -> Result<Self> {
        if !(bin_width > 0.0) || !bin_width.is_finite() || !origin.is_finite() {
            return Err(Error::Input(format!(
                "step function needs finite origin and positive bin width, got origin={origin}, h={bin_width}"
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("step function density must be finite".into()));
        }
        Ok(StepFunction { origin, bin_width, values })
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_width
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `int |f|`, exactly `h * sum |values|`.
    pub fn l1(&self) -> f64 {
        self.bin_width * self.values.iter().map(|v| v.abs()).sum::<f64>()
    }

    /// `int f`, exactly `h * sum values`.
    pub fn mass(&self) -> f64 {
        self.bin_width * self.values.iter().sum::<f64>()
    }

    /// `int f^2`.
    pub fn l2_sq(&self) -> f64 {
        self.bin_width * self.values.iter().map(|v| v * v).sum::<f64>()
    }

    /// Left edge of bin `i`.
    pub fn bin_left(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.bin_width
    }

    /// Smallest closed interval containing all bins with nonzero density,
    /// or `None` for the zero function.
    pub fn support(&self) -> Option<(f64, f64)> {
        let first = self.values.iter().position(|v| *v != 0.0)?;
        let last = self.values.iter().rposition(|v| *v != 0.0).unwrap();
        Some((self.bin_left(first), self.bin_left(last) + self.bin_width))
    }

    /// Shift the function by `delta` (new origin, same densities).
    pub fn translated(&self, delta: f64) -> Result<Self> {
        StepFunction::new(self.origin + delta, self.bin_width, self.values.clone())
    }
}

/// Two step functions expressed on one common lattice: equal bin width and an
/// integer index offset `start_g - start_f` between their first bins.
pub(crate) struct AlignedPair<'a> {
    pub h: f64,
    pub f: Cow<'a, [f64]>,
    pub g: Cow<'a, [f64]>,
    /// Index of g's first bin minus index of f's first bin on the common lattice.
    pub offset: i64,
}

fn refine(values: &[f64], m: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len() * m);
    for &v in values {
        out.extend(std::iter::repeat(v).take(m));
    }
    out
}

/// Align `f` and `g` onto a common lattice.
///
/// Bin widths must be equal or related by an integer factor (the coarser
/// function is split exactly, densities copied), and the origins must differ
/// by an integer multiple of the common width. Anything else is rejected: the
/// bilinear forms in [`crate::noise`] are only exact on commensurable grids.
pub(crate) fn align<'a>(f: &'a StepFunction, g: &'a StepFunction) -> Result<AlignedPair<'a>> {
    let (hf, hg) = (f.bin_width, g.bin_width);
    let ratio = hf / hg;
    let (h, fv, gv): (f64, Cow<'a, [f64]>, Cow<'a, [f64]>) = if (ratio - 1.0).abs() < 1e-9 {
        (hf, Cow::from(&f.values[..]), Cow::from(&g.values[..]))
    } else if ratio > 1.0 {
        let m = ratio.round();
        if (ratio - m).abs() > 1e-9 {
            return Err(Error::Input(format!(
                "incommensurable bin widths {hf} and {hg}"
            )));
        }
        (hg, Cow::from(refine(&f.values, m as usize)), Cow::from(&g.values[..]))
    } else {
        let m = (1.0 / ratio).round();
        if (1.0 / ratio - m).abs() > 1e-9 {
            return Err(Error::Input(format!(
                "incommensurable bin widths {hf} and {hg}"
            )));
        }
        (hf, Cow::from(&f.values[..]), Cow::from(refine(&g.values, m as usize)))
    };
    let shift = (g.origin - f.origin) / h;
    let offset = shift.round();
    if (shift - offset).abs() > 1e-6 {
        return Err(Error::Input(format!(
            "misaligned origins: {} and {} differ by {shift} bins",
            f.origin, g.origin
        )));
    }
    Ok(AlignedPair { h, f: fv, g: gv, offset: offset as i64 })
}
