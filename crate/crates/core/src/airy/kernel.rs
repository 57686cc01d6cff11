//! The Airy kernel and the closed-form Laplace transform of its products.

use super::ai::airy_ai_with_prime;
use std::f64::consts::PI;

/// Airy kernel `K(x, y) = (Ai(x) Ai'(y) - Ai(y) Ai'(x)) / (x - y)`.
///
/// Within `|x - y| <= 1e-3` the difference quotient would amplify the
/// evaluator's rounding by `1/(x - y)`, so the kernel switches to the
/// midpoint formula `Ai'(m)^2 - m Ai(m)^2` plus the second-order correction
/// in `s = (x - y)/2`,
/// `K(m+s, m-s) = D(m) + s^2 (Ai(m) Ai'(m)/3 + (2/3) m D(m)) + O(s^4)`,
/// keeping both branches accurate to ~1e-9 absolute at the switch.
pub fn airy_kernel(x: f64, y: f64) -> f64 {
    let d = x - y;
    if d.abs() > 1e-3 {
        let (ax, apx) = airy_ai_with_prime(x);
        let (ay, apy) = airy_ai_with_prime(y);
        (ax * apy - ay * apx) / d
    } else {
        let m = 0.5 * (x + y);
        let s = 0.5 * d;
        let (a, ap) = airy_ai_with_prime(m);
        let diag = ap * ap - m * a * a;
        diag + s * s * (a * ap / 3.0 + 2.0 / 3.0 * m * diag)
    }
}

/// Closed form of `int_R e^{t x} Ai(x + u) Ai(x + v) dx` for `t > 0`:
///
/// `exp(t^3/12 - (u + v) t / 2 - (u - v)^2 / (4t)) / (2 sqrt(pi t))`.
pub fn laplace_kernel_transform(t: f64, u: f64, v: f64) -> f64 {
    assert!(t > 0.0, "kernel Laplace transform needs t > 0, got {t}");
    let d = u - v;
    (t * t * t / 12.0 - 0.5 * (u + v) * t - d * d / (4.0 * t)).exp() / (2.0 * (PI * t).sqrt())
}
