//! Randomized cross-module invariants.
//!
//! Each block pins a structural identity the library must keep on every
//! admissible input, not just the worked examples of the unit tests: the
//! algebra of the covariance form, the semigroup law of the reflected heat
//! kernel, conservation laws of sampled paths, order properties of the
//! discretized operator, and the consistency of the scaling arithmetic.

use proptest::prelude::*;
use rigidity_core::domain::{Boundary, Domain};
use rigidity_core::feynman_kac::{abcd_sample, TraceSettings};
use rigidity_core::localtime::occupation_density;
use rigidity_core::noise::{inner_product, lp_upper_bound, seminorm_sq, CovarianceModel};
use rigidity_core::paths::{sample_bridge, sample_free};
use rigidity_core::potential::Potential;
use rigidity_core::rigidity::{fit_exponent, growth_threshold, growth_verdict, predicted_exponent};
use rigidity_core::rng::stream_rng;
use rigidity_core::scan::{ScanResult, ScanRow};
use rigidity_core::spectrum::discretize;
use rigidity_core::StepFunction;

/// Constructible stand-in for a covariance model; the model itself holds
/// kernel closures and is rebuilt inside each test case.
#[derive(Debug, Clone)]
enum ModelSpec {
    White(f64),
    Fractional(f64, f64),
    LpPower(f64, f64),
    LpLog(u32, f64),
    BoundedGaussian,
    BoundedConst(f64),
}

impl ModelSpec {
    fn build(&self) -> CovarianceModel {
        match *self {
            ModelSpec::White(s) => CovarianceModel::white(s).unwrap(),
            ModelSpec::Fractional(s, h) => CovarianceModel::fractional(s, h).unwrap(),
            ModelSpec::LpPower(e, p) => CovarianceModel::lp_power(e, p).unwrap(),
            ModelSpec::LpLog(k, p) => CovarianceModel::lp_log(k, p).unwrap(),
            ModelSpec::BoundedGaussian => CovarianceModel::bounded_gaussian().unwrap(),
            ModelSpec::BoundedConst(c) => CovarianceModel::bounded_const(c).unwrap(),
        }
    }
}

fn model_spec() -> impl Strategy<Value = ModelSpec> {
    prop_oneof![
        (0.0f64..4.0).prop_map(ModelSpec::White),
        (0.1f64..4.0, 0.55f64..0.95).prop_map(|(s, h)| ModelSpec::Fractional(s, h)),
        // e * p < 1 keeps the power kernel in L^p
        (0.15f64..0.6, 1.0f64..1.6).prop_map(|(e, p)| ModelSpec::LpPower(e, p)),
        (1u32..=3, 1.0f64..3.0).prop_map(|(k, p)| ModelSpec::LpLog(k, p)),
        Just(ModelSpec::BoundedGaussian),
        (0.0f64..3.0).prop_map(ModelSpec::BoundedConst),
    ]
}

/// Dyadic bin widths and integer-bin origins keep every lattice pair
/// commensurate and every coordinate exactly representable.
fn dyadic_h() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.125), Just(0.25), Just(0.5)]
}

fn values() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-4.0f64..4.0, 1..6)
}

fn step_fn(h: f64, bin: i32, vals: Vec<f64>) -> StepFunction {
    StepFunction::new(bin as f64 * h, h, vals).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn form_is_symmetric(
        spec in model_spec(),
        h in dyadic_h(),
        (i, vf) in (-8i32..8, values()),
        (j, vg) in (-8i32..8, values()),
    ) {
        let m = spec.build();
        let f = step_fn(h, i, vf);
        let g = step_fn(h, j, vg);
        let fg = inner_product(&f, &g, &m).unwrap();
        let gf = inner_product(&g, &f, &m).unwrap();
        prop_assert!((fg - gf).abs() <= 1e-10 * (1.0 + fg.abs()), "fg={fg} gf={gf}");
    }

    #[test]
    fn form_is_bilinear(
        spec in model_spec(),
        h in dyadic_h(),
        (vf, vg) in (1usize..6).prop_flat_map(|n| {
            (prop::collection::vec(-4.0f64..4.0, n), prop::collection::vec(-4.0f64..4.0, n))
        }),
        i in -8i32..8,
        (j, vw) in (-8i32..8, values()),
        a in -2.0f64..2.0,
        b in -2.0f64..2.0,
    ) {
        let m = spec.build();
        let f = step_fn(h, i, vf.clone());
        let g = step_fn(h, i, vg.clone());
        let w = step_fn(h, j, vw);
        let combo: Vec<f64> = vf.iter().zip(&vg).map(|(x, y)| a * x + b * y).collect();
        let fg = step_fn(h, i, combo);
        let lhs = inner_product(&fg, &w, &m).unwrap();
        let rhs = a * inner_product(&f, &w, &m).unwrap() + b * inner_product(&g, &w, &m).unwrap();
        prop_assert!(
            (lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs().max(rhs.abs())),
            "lhs={lhs} rhs={rhs}"
        );
    }

    #[test]
    fn form_satisfies_cauchy_schwarz(
        spec in model_spec(),
        h in dyadic_h(),
        (i, vf) in (-8i32..8, values()),
        (j, vg) in (-8i32..8, values()),
    ) {
        let m = spec.build();
        let f = step_fn(h, i, vf);
        let g = step_fn(h, j, vg);
        let fg = inner_product(&f, &g, &m).unwrap();
        let ff = seminorm_sq(&f, &m).unwrap();
        let gg = seminorm_sq(&g, &m).unwrap();
        prop_assert!(fg * fg <= ff * gg * (1.0 + 1e-9) + 1e-9, "fg={fg} ff={ff} gg={gg}");
    }

    #[test]
    fn form_is_translation_invariant(
        spec in model_spec(),
        h in dyadic_h(),
        (i, vf) in (-8i32..8, values()),
        (j, vg) in (-8i32..8, values()),
        shift_bins in -64i32..64,
    ) {
        // quarter-integer shifts stay exactly representable, so the lag
        // structure survives the translation bit for bit
        let m = spec.build();
        let dx = shift_bins as f64 * 0.25;
        let f = step_fn(h, i, vf);
        let g = step_fn(h, j, vg);
        let before = inner_product(&f, &g, &m).unwrap();
        let after =
            inner_product(&f.translated(dx).unwrap(), &g.translated(dx).unwrap(), &m).unwrap();
        prop_assert!(before == after, "before={before} after={after}");
    }

    #[test]
    fn seminorm_respects_the_model_upper_bound(
        spec in model_spec(),
        h in dyadic_h(),
        (i, vf) in (-8i32..8, values()),
    ) {
        let m = spec.build();
        let f = step_fn(h, i, vf);
        let sn = seminorm_sq(&f, &m).unwrap();
        let ub = lp_upper_bound(&f, &m);
        prop_assert!(sn <= ub * (1.0 + 1e-9) + 1e-12, "seminorm {sn} exceeds bound {ub}");
    }
}

/// Trapezoid rule for the kernel integrals. The reflected kernel has zero
/// normal derivative at every finite endpoint and Gaussian decay at infinite
/// ones, so the rule converges far below the asserted tolerances.
fn trapezoid(lo: f64, hi: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let dz = (hi - lo) / n as f64;
    let mut acc = 0.5 * (f(lo) + f(hi));
    for k in 1..n {
        acc += f(lo + k as f64 * dz);
    }
    acc * dz
}

fn kernel_domain(which: u8, b: f64) -> Domain {
    match which {
        0 => Domain::line(),
        1 => Domain::half_line(Boundary::Dirichlet).unwrap(),
        _ => Domain::interval(b, Boundary::Dirichlet, Boundary::Robin(1.0)).unwrap(),
    }
}

/// Map unit coordinates into the interior of the domain.
fn place(domain: &Domain, u: f64) -> f64 {
    match domain {
        Domain::Line => 6.0 * u - 3.0,
        Domain::HalfLine { .. } => 3.0 * u + 0.01,
        Domain::Interval { b, .. } => u * b,
    }
}

/// Integration range covering the essential support of the kernels.
fn z_range(domain: &Domain, x: f64, y: f64, spread: f64) -> (f64, f64, usize) {
    match domain {
        Domain::Line => (x.min(y) - 8.0 * spread, x.max(y) + 8.0 * spread, 3000),
        Domain::HalfLine { .. } => (0.0, x.max(y) + 8.0 * spread, 3000),
        Domain::Interval { b, .. } => (0.0, *b, 1500),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn heat_kernel_satisfies_chapman_kolmogorov(
        which in 0u8..3,
        b in 0.5f64..2.0,
        s in 0.05f64..0.8,
        t in 0.05f64..0.8,
        u in 0.05f64..0.95,
        v in 0.05f64..0.95,
    ) {
        let domain = kernel_domain(which, b);
        let x = place(&domain, u);
        let y = place(&domain, v);
        let (lo, hi, n) = z_range(&domain, x, y, s.max(t).sqrt());
        let conv = trapezoid(lo, hi, n, |z| {
            domain.transition_density(s, x, z) * domain.transition_density(t, z, y)
        });
        let direct = domain.transition_density(s + t, x, y);
        prop_assert!(
            (conv - direct).abs() <= 2e-8 * (1.0 + direct),
            "convolution {conv} vs direct {direct}"
        );
    }

    #[test]
    fn heat_kernel_conserves_mass(
        which in 0u8..3,
        b in 0.5f64..2.0,
        t in 0.05f64..0.8,
        u in 0.05f64..0.95,
    ) {
        let domain = kernel_domain(which, b);
        let x = place(&domain, u);
        let (lo, hi, n) = z_range(&domain, x, x, t.sqrt());
        let mass = trapezoid(lo, hi, n, |y| domain.transition_density(t, x, y));
        prop_assert!((mass - 1.0).abs() <= 2e-8, "row mass {mass}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn occupation_measure_carries_the_full_duration(
        which in 0u8..3,
        b in 0.5f64..2.0,
        t in 0.05f64..1.0,
        n in 16usize..400,
        hbin in 0.01f64..0.3,
        u in 0.05f64..0.95,
        v in 0.05f64..0.95,
        seed in any::<u64>(),
    ) {
        let domain = kernel_domain(which, b);
        let x = place(&domain, u);
        let y = place(&domain, v);
        let mut rng = stream_rng(seed, 7);
        let traj = sample_bridge(&domain, t, n, x, y, &mut rng).unwrap();

        let occ = occupation_density(&traj, hbin).unwrap();
        prop_assert!((occ.l1() - traj.duration()).abs() <= 1e-9 * traj.duration());

        // the raw bridge starts at x and ends on a reflection image of y,
        // so the folded path is pinned at both ends
        prop_assert!((traj.raw_points()[0] - x).abs() <= 1e-12);
        let pts = traj.points();
        prop_assert!((pts[0] - x).abs() <= 1e-9 * (1.0 + x.abs()));
        prop_assert!((pts[n] - y).abs() <= 1e-9 * (1.0 + y.abs()));

        // folded points stay inside the domain
        match &domain {
            Domain::Line => {}
            Domain::HalfLine { .. } => {
                prop_assert!(traj.points().iter().all(|&p| p >= -1e-12));
            }
            Domain::Interval { b, .. } => {
                prop_assert!(traj.points().iter().all(|&p| p >= -1e-12 && p <= b + 1e-12));
            }
        }
    }

    #[test]
    fn free_paths_carry_the_full_duration(
        t in 0.05f64..1.0,
        n in 16usize..400,
        hbin in 0.01f64..0.3,
        x0 in -2.0f64..2.0,
        seed in any::<u64>(),
    ) {
        let mut rng = stream_rng(seed, 11);
        let traj = sample_free(t, n, x0, &mut rng).unwrap();
        let occ = occupation_density(&traj, hbin).unwrap();
        prop_assert!((occ.l1() - traj.duration()).abs() <= 1e-9 * traj.duration());
        prop_assert!((traj.points()[0] - x0).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn functional_samples_obey_the_exponent_bounds(
        spec in model_spec(),
        right in prop_oneof![Just(Boundary::Dirichlet), (0.0f64..2.0).prop_map(Boundary::Robin)],
        t in prop_oneof![Just(0.1), Just(0.2), Just(0.3)],
        u in 0.1f64..0.9,
        v in 0.1f64..0.9,
        seed in any::<u64>(),
    ) {
        let domain = Domain::interval(1.0, Boundary::Dirichlet, right).unwrap();
        let m = spec.build();
        let potential = Potential::harmonic();
        let settings = TraceSettings::for_time(t).unwrap();
        let mut rng = stream_rng(seed, 3);
        let s = abcd_sample(&domain, &m, &potential, &settings, u, v, &mut rng).unwrap();

        // V >= 0 makes the drift exponent nonpositive; survival weights
        // only ever shrink it, while an attractive Robin end adds a finite
        // positive local-time term
        prop_assert!(s.a <= 0.0 && s.a.is_finite());
        prop_assert!(!s.b.is_nan() && s.b < f64::INFINITY);
        if matches!(right, Boundary::Dirichlet) {
            prop_assert!(s.b <= 0.0);
        }
        prop_assert!(s.c >= 0.0 && s.c.is_finite());
        prop_assert!(s.d.is_finite());
        prop_assert!(s.d.abs() <= 2.0 * s.c + 1e-12, "d={} c={}", s.d, s.c);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn diagonal_bumps_shift_eigenvalues_within_weyl_bounds(
        m in 24usize..56,
        left in prop_oneof![Just(Boundary::Dirichlet), (0.0f64..2.0).prop_map(Boundary::Robin)],
        right in prop_oneof![Just(Boundary::Dirichlet), (0.0f64..2.0).prop_map(Boundary::Robin)],
        bumps in prop::collection::vec(0.0f64..5.0, 64),
    ) {
        let domain = Domain::interval(1.0, left, right).unwrap();
        let disc = discretize(&domain, &Potential::harmonic(), None, m).unwrap();
        let dim = disc.dim();
        let xi: Vec<f64> = bumps.iter().cycle().take(dim).copied().collect();
        let op0 = disc.operator();
        let op1 = disc.with_noise(&xi).unwrap();
        let lo = xi.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = xi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for k in 0..5.min(dim) {
            let a = op0.eigenvalue(k).unwrap();
            let b = op1.eigenvalue(k).unwrap();
            let slack = 1e-9 * (1.0 + a.abs());
            prop_assert!(b >= a + lo - slack, "k={k}: {b} below {a} + {lo}");
            prop_assert!(b <= a + hi + slack, "k={k}: {b} above {a} + {hi}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn ground_state_minorizes_rayleigh_quotients(
        m in 24usize..56,
        trial in prop::collection::vec(-1.0f64..1.0, 64),
    ) {
        let domain = Domain::interval(1.0, Boundary::Dirichlet, Boundary::Dirichlet).unwrap();
        let disc = discretize(&domain, &Potential::harmonic(), None, m).unwrap();
        let op = disc.operator();
        let dim = disc.dim();
        let v = &trial[..dim];
        let den: f64 = v.iter().map(|x| x * x).sum();
        prop_assume!(den > 1e-9);
        let diag = op.diagonal();
        let off = op.off_diagonal();
        let mut num = 0.0;
        for i in 0..dim {
            num += diag[i] * v[i] * v[i];
            if i + 1 < dim {
                num += 2.0 * off * v[i] * v[i + 1];
            }
        }
        let quotient = num / den;
        let lam0 = op.eigenvalue(0).unwrap();
        prop_assert!(lam0 <= quotient + 1e-9 * (1.0 + quotient.abs()), "{lam0} > {quotient}");
    }
}

/// Dirichlet eigenvalues on a refined grid form a Cauchy sequence at the
/// second-order rate: halving `h` divides the remaining error by four.
#[test]
fn eigenvalues_converge_at_second_order() {
    let domain = Domain::interval(1.0, Boundary::Dirichlet, Boundary::Dirichlet).unwrap();
    let lam = |m: usize, k: usize| {
        discretize(&domain, &Potential::harmonic(), None, m)
            .unwrap()
            .operator()
            .eigenvalue(k)
            .unwrap()
    };
    for k in 0..5 {
        let d1 = (lam(512, k) - lam(1024, k)).abs();
        let d2 = (lam(1024, k) - lam(2048, k)).abs();
        assert!(d1 < 0.05, "k={k}: first refinement moved by {d1}");
        assert!(d2 <= 0.3 * d1 + 1e-9, "k={k}: refinement ratio {d2}/{d1} not second order");
    }
}

fn power_law_rows(k: usize, amp: f64, p: f64, rel: &[f64], wobble: &[f64]) -> Vec<ScanRow> {
    (0..k)
        .map(|i| {
            let t = 2f64.powi(-(i as i32));
            let estimate = amp * t.powf(p) * wobble[i].exp();
            ScanRow { t, estimate, stderr: rel[i] * estimate, n: 100 }
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exponent_fits_are_scale_equivariant(
        k in 5usize..9,
        amp in 0.2f64..5.0,
        p in -2.5f64..2.5,
        rel in prop::collection::vec(0.02f64..0.3, 9),
        wobble in prop::collection::vec(-0.4f64..0.4, 9),
        c in prop_oneof![Just(1e-3), Just(0.1), Just(7.0), Just(1e3)],
    ) {
        let rows = power_law_rows(k, amp, p, &rel, &wobble);
        let scaled: Vec<ScanRow> = rows
            .iter()
            .map(|r| ScanRow { t: r.t, estimate: c * r.estimate, stderr: c * r.stderr, n: r.n })
            .collect();
        let f0 = fit_exponent(&ScanResult::new("base", rows)).unwrap();
        let f1 = fit_exponent(&ScanResult::new("scaled", scaled)).unwrap();
        // relative errors are unchanged, so the weights and the slope are
        // too; only the intercept moves, by exactly ln c
        prop_assert!((f0.slope - f1.slope).abs() <= 1e-9);
        prop_assert!((f1.intercept - f0.intercept - c.ln()).abs() <= 1e-9);
        prop_assert!((f0.slope_stderr - f1.slope_stderr).abs() <= 1e-9);
        prop_assert!((f0.r_squared - f1.r_squared).abs() <= 1e-9);
    }

    #[test]
    fn pure_power_laws_fit_exactly(
        k in 4usize..9,
        amp in 0.2f64..5.0,
        p in prop_oneof![-2.5f64..-0.05, 0.05f64..2.5],
    ) {
        let rel = [0.05; 9];
        let wobble = [0.0; 9];
        let rows = power_law_rows(k, amp, p, &rel, &wobble);
        let fit = fit_exponent(&ScanResult::new("power", rows)).unwrap();
        prop_assert!((fit.slope - p).abs() <= 1e-9, "slope {} for p {p}", fit.slope);
        prop_assert!(fit.r_squared >= 1.0 - 1e-9);
        prop_assert!(fit.ci95.1 - fit.ci95.0 <= 1e-9);
        prop_assert_eq!(fit.n_used, k);
    }

    #[test]
    fn growth_thresholds_zero_the_predicted_exponent(spec in model_spec()) {
        let threshold = growth_threshold(&spec.build());
        // the white threshold comes from the point-mass kernel, so the
        // matching rate formula is the compactly-supported one
        let eval_model = match spec {
            ModelSpec::White(_) => spec.build().with_support_radius(0.0).unwrap(),
            _ => spec.build(),
        };
        let line = Domain::line();
        let half = Domain::half_line(Boundary::Dirichlet).unwrap();
        for domain in [line, half] {
            let pe = predicted_exponent(&domain, &eval_model, Some(threshold)).unwrap();
            prop_assert!(pe.abs() <= 1e-12, "exponent {pe} at threshold {threshold}");
        }
        let interval = Domain::interval(1.0, Boundary::Dirichlet, Boundary::Dirichlet).unwrap();
        let pe = predicted_exponent(&interval, &spec.build(), None).unwrap();
        prop_assert!(pe == spec.build().d_exponent() - 1.0);
    }

    #[test]
    fn predicted_exponent_is_monotone_in_growth(
        spec in model_spec(),
        a1 in 0.3f64..8.0,
        da in 0.01f64..4.0,
    ) {
        let m = spec.build();
        let a2 = a1 + da;
        let line = Domain::line();
        let half = Domain::half_line(Boundary::Dirichlet).unwrap();
        for domain in [line, half] {
            let p1 = predicted_exponent(&domain, &m, Some(a1)).unwrap();
            let p2 = predicted_exponent(&domain, &m, Some(a2)).unwrap();
            prop_assert!(p1 <= p2 + 1e-12, "{p1} > {p2} for a {a1} < {a2}");
        }
    }

    #[test]
    fn sharper_noise_scaling_predicts_faster_decay(
        h in 0.55f64..0.95,
        a in 0.3f64..8.0,
        p in 1.0f64..3.0,
    ) {
        let line = Domain::line();
        // within the unsupported family the rate is increasing in the
        // scaling exponent: white 3/2, fractional 1 + H, bounded 2
        let white = predicted_exponent(&line, &CovarianceModel::white(1.0).unwrap(), Some(a)).unwrap();
        let frac =
            predicted_exponent(&line, &CovarianceModel::fractional(1.0, h).unwrap(), Some(a)).unwrap();
        let bdd =
            predicted_exponent(&line, &CovarianceModel::bounded_gaussian().unwrap(), Some(a)).unwrap();
        prop_assert!(white <= frac + 1e-12 && frac <= bdd + 1e-12);
        // same ordering within the compactly supported family
        let lp = predicted_exponent(&line, &CovarianceModel::lp_log(1, p).unwrap(), Some(a)).unwrap();
        let bc = predicted_exponent(
            &line,
            &CovarianceModel::bounded_const(1.0).unwrap().with_support_radius(0.5).unwrap(),
            Some(a),
        )
        .unwrap();
        prop_assert!(lp <= bc + 1e-12);
    }

    #[test]
    fn verdicts_match_the_threshold_comparison(spec in model_spec(), a in 0.05f64..10.0) {
        let m = spec.build();
        let threshold = growth_threshold(&m);
        let line = Domain::line();

        let v = growth_verdict(&line, &m, Some(a));
        prop_assert_eq!(v.condition_holds, a > threshold);
        prop_assert!(v.threshold_exponent == threshold);

        let unknown = growth_verdict(&line, &m, None);
        prop_assert!(!unknown.condition_holds);

        let interval = Domain::interval(1.0, Boundary::Dirichlet, Boundary::Dirichlet).unwrap();
        let bounded = growth_verdict(&interval, &m, Some(a));
        prop_assert!(bounded.condition_holds);
    }
}
