use std::f64::consts::PI;

use proptest::prelude::*;

use nwbound::bounds::{
    bias_bound_bounded, bounded_terms, moment_integral_abs, moment_integral_signed, psi, unbounded_terms, zeta,
    BoundInput,
};
use nwbound::designs::Design;
use nwbound::estimator::Bandwidth;
use nwbound::extmath::ExtReal;
use nwbound::geometry::{BoxInterval, LipschitzSpec, OffsetBox, Oscillation};
use nwbound::oracle::{
    integrate_1d, integrate_1d_with_breaks, nw_denominator_integral, nw_numerator_integral, Integrator,
};

type E = ExtReal<f64>;

fn kernel(l: f64, h: f64) -> f64 {
    (-l * l / (2.0 * h * h)).exp() / (2.0 * PI * h * h).sqrt()
}

fn agrees(closed: f64, quad: f64) -> bool {
    (closed - quad).abs() <= (1e-8 * quad.abs()).max(1e-12)
}

fn endpoint(v: f64, inf: bool, neg: bool) -> E {
    match (inf, neg) {
        (true, true) => E::neg_inf(),
        (true, false) => E::pos_inf(),
        _ => E::of(v),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn psi_matches_quadrature(l in -5.0_f64..5.0, h in 0.05_f64..2.0, a in -3.0_f64..3.0, w in 0.01_f64..4.0, ia: bool, ib: bool) {
        let (lo, hi) = (endpoint(a, ia, true), endpoint(a + w, ib, false));
        let q = integrate_1d(|t| 2.0 * (-t * t / (2.0 * h * h) - t * l).exp() / (2.0 * PI * h * h).sqrt(), lo, hi, 1e-12).unwrap();
        let c = psi(l, h, lo, hi).unwrap();
        prop_assert!(agrees(c, q.value), "psi {c} vs {}", q.value);
    }

    #[test]
    fn zeta_and_abs_moment_match_quadrature(l in 0.0_f64..5.0, lm in 0.0_f64..5.0, h in 0.05_f64..2.0, a in 0.0_f64..3.0, b in 0.0_f64..3.0, ia: bool, ib: bool) {
        let (lo, hi) = (endpoint(-a, ia, true), endpoint(b, ib, false));
        let w = |t: f64| (-t * t / (2.0 * h * h) + t.abs() * l).exp() / (2.0 * PI * h * h).sqrt();
        let q = Integrator::with_rel_tol(1e-12).integrate_with_breaks(|t| 2.0 * w(t), lo, hi, &[0.0]).unwrap();
        prop_assert!(agrees(zeta(h, lo, hi, l).unwrap(), q.value));
        let q = Integrator::with_rel_tol(1e-12).integrate_with_breaks(|t| w(t) * t.abs() * lm, lo, hi, &[0.0]).unwrap();
        prop_assert!(agrees(moment_integral_abs(lm, l, h, lo, hi).unwrap(), q.value));
    }

    #[test]
    fn signed_moment_matches_quadrature(l in -5.0_f64..5.0, lm in 0.0_f64..5.0, h in 0.05_f64..2.0, a in -3.0_f64..3.0, w in 0.01_f64..4.0, ia: bool, ib: bool) {
        let (lo, hi) = (endpoint(a, ia, true), endpoint(a + w, ib, false));
        let q = integrate_1d(|t| (-t * t / (2.0 * h * h) - t * l).exp() / (2.0 * PI * h * h).sqrt() * t * lm, lo, hi, 1e-12).unwrap();
        let c = moment_integral_signed(lm, l, h, lo, hi).unwrap();
        prop_assert!(agrees(c, q.value), "{c} vs {}", q.value);
    }
}

#[test]
fn signed_moment_spec_value() {
    let q = integrate_1d(|l| (-l * l / 2.0 - l).exp() * l, E::of(-1.0), E::of(2.0), 1e-13).unwrap();
    let c = moment_integral_signed(1.0, 1.0, 1.0, E::of(-1.0), E::of(2.0)).unwrap();
    assert!((c * (2.0 * PI).sqrt() - q.value).abs() < 1e-12);
}

fn spec_on_support(design: &Design, x: f64, l_m: f64, m: Oscillation<f64>) -> LipschitzSpec<f64> {
    let s = design.support();
    let l_f = design.log_lipschitz_constant(&s).unwrap();
    LipschitzSpec::on_domain(vec![x], l_m, l_f, m, &s).unwrap()
}

fn validity_points() -> Vec<(f64, f64)> {
    // deterministic pseudo-random (u, h) pairs
    let mut s: u64 = 0x9e3779b97f4a7c15;
    (0..20)
        .map(|_| {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            let u = (s >> 11) as f64 / (1u64 << 53) as f64;
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            let v = (s >> 11) as f64 / (1u64 << 53) as f64;
            (u, 0.05 + 1.95 * v)
        })
        .collect()
}

fn battery() -> Vec<(Design, f64, f64)> {
    vec![
        (Design::laplace(0.0, 1.0).unwrap(), -3.0, 3.0),
        (Design::uniform(-2.0, 2.0).unwrap(), -1.95, 1.95),
        (Design::pareto(2.0).unwrap(), 1.02, 5.0),
    ]
}

#[test]
fn denominator_lower_bound_is_valid() {
    for (design, lo, hi) in battery() {
        for (u, h) in validity_points() {
            let x = lo + (hi - lo) * u;
            let spec = spec_on_support(&design, x, 1.0, Oscillation::Bounded(1.0));
            let input = BoundInput::new(spec, Bandwidth::uniform(1, h).unwrap()).unwrap();
            let den = bounded_terms(&input).unwrap().denominator;
            let q = nw_denominator_integral(|z| design.pdf(z), x, h, &design.support()).unwrap();
            assert!(
                q.value >= design.pdf(x) * den * (1.0 - 1e-10),
                "{} x={x} h={h}: {} < {}",
                design.name(),
                q.value,
                design.pdf(x) * den
            );
        }
    }
}

#[test]
fn numerator_upper_bound_is_valid_for_the_extremal_function() {
    for (design, lo, hi) in battery() {
        for (u, h) in validity_points() {
            let x = lo + (hi - lo) * u;
            let (l_m, m) = (3.0, 1.5);
            let spec = spec_on_support(&design, x, l_m, Oscillation::Bounded(m));
            let input = BoundInput::new(spec, Bandwidth::uniform(1, h).unwrap()).unwrap();
            let num = bounded_terms(&input).unwrap().numerator();
            let cap = |z: f64| (l_m * (z - x).abs()).min(m) * kernel(z - x, h) * design.pdf(z);
            let s = design.support();
            let kinks = [x - m / l_m, x, x + m / l_m];
            let q = integrate_1d_with_breaks(cap, s.lower()[0], s.upper()[0], &kinks, 1e-12).unwrap();
            assert!(
                q.value <= design.pdf(x) * num * (1.0 + 1e-10),
                "{} x={x} h={h}: {} > {} {:?}",
                design.name(),
                q.value,
                design.pdf(x) * num,
                q
            );
        }
    }
}

#[test]
fn bound_dominates_population_bias_of_sine_on_laplace() {
    let design = Design::laplace(0.0, 1.0).unwrap();
    let spec = spec_on_support(&design, 0.3, 5.0, Oscillation::Bounded(2.0));
    let input = BoundInput::new(spec, Bandwidth::uniform(1, 0.5).unwrap()).unwrap();
    let m = |z: f64| (5.0 * z).sin();
    let num = nw_numerator_integral(m, |z| design.pdf(z), 0.3, 0.5, &design.support()).unwrap();
    let den = nw_denominator_integral(|z| design.pdf(z), 0.3, 0.5, &design.support()).unwrap();
    assert!((num.value / den.value).abs() <= bias_bound_bounded(&input).unwrap());
}

fn l1_weight(l: &[f64], h: &[f64], slope: f64) -> f64 {
    l.iter()
        .zip(h)
        .map(|(&v, &hi)| (-v * v / (2.0 * hi * hi) + slope * v.abs()).exp() / (2.0 * PI * hi * hi).sqrt())
        .product()
}

#[test]
fn two_dimensional_terms_match_iterated_quadrature() {
    let h = [0.3, 0.5];
    let (l_m, l_f, m) = (2.0, 0.7, 1.2);
    let ups = OffsetBox::new(vec![E::pos_inf(), E::of(2.0)], vec![E::of(3.0), E::pos_inf()]).unwrap();
    let delta = OffsetBox::new(vec![E::of(1.5), E::of(1.0)], vec![E::of(2.0), E::of(2.5)]).unwrap();
    let gamma = OffsetBox::new(vec![E::of(1.0), E::of(0.8)], vec![E::of(1.2), E::of(2.0)]).unwrap();
    let spec = LipschitzSpec::new(
        vec![0.0, 0.0],
        l_m,
        l_f,
        Oscillation::Bounded(m),
        ups.clone(),
        delta.clone(),
        gamma,
    )
    .unwrap();
    let input = BoundInput::new(spec.clone(), Bandwidth::new(h.to_vec()).unwrap()).unwrap();
    let t = bounded_terms(&input).unwrap();

    let q = Integrator::with_rel_tol(1e-10);
    let abs_box = |b: &OffsetBox<f64>| b.to_absolute(&[0.0, 0.0]).unwrap();
    let f_box = nwbound::geometry::effective_phi_box(&spec).unwrap();
    let br = vec![vec![0.0], vec![0.0]];
    let rel = |a: f64, b: f64| (a - b).abs() <= 1e-6 * b.abs().max(1e-12);

    let lip = q
        .integrate_box(
            |p| l1_weight(p, &h, l_f) * l_m * (p[0].abs() + p[1].abs()),
            &abs_box(&f_box),
            &br,
        )
        .unwrap();
    assert!(rel(t.lipschitz, lip.value), "{} vs {}", t.lipschitz, lip.value);
    let den = q
        .integrate_box(|p| l1_weight(p, &h, -l_f), &abs_box(&delta), &br)
        .unwrap();
    assert!(rel(t.denominator, den.value));
    let in_d = q
        .integrate_box(|p| l1_weight(p, &h, l_f), &abs_box(&delta), &br)
        .unwrap();
    let in_f = q
        .integrate_box(|p| l1_weight(p, &h, l_f), &abs_box(&f_box), &br)
        .unwrap();
    assert!(rel(t.capped, m * (in_d.value - in_f.value)));
    let mass_u = q
        .integrate_box(|p| l1_weight(p, &h, 0.0), &ups.to_absolute(&[0.0, 0.0]).unwrap(), &br)
        .unwrap();
    let mass_d = q
        .integrate_box(|p| l1_weight(p, &h, 0.0), &abs_box(&delta), &br)
        .unwrap();
    assert!(rel(t.outside, m * (mass_u.value - mass_d.value)));

    let all = BoxInterval::real_space(2).unwrap();
    let s2 = LipschitzSpec::on_domain(vec![0.2, -0.1], l_m, l_f, Oscillation::Unbounded, &all).unwrap();
    let u = unbounded_terms(&BoundInput::new(s2, Bandwidth::new(h.to_vec()).unwrap()).unwrap()).unwrap();
    let num = q
        .integrate_box(|p| l1_weight(p, &h, l_f) * l_m * (p[0].abs() + p[1].abs()), &all, &br)
        .unwrap();
    assert!(rel(u.numerator, num.value));
}

#[test]
fn error_estimate_covers_refined_rerun() {
    let cases: [(f64, f64, f64); 4] = [(0.5, 0.2, 1.0), (3.0, 1.5, -2.0), (-4.0, 0.07, 0.5), (1.0, 2.0, 0.0)];
    for (l, h, a) in cases {
        let f = |t: f64| (-t * t / (2.0 * h * h) - t * l).exp() * t.sin();
        let coarse = integrate_1d(f, E::of(a), E::pos_inf(), 1e-6).unwrap();
        let fine = integrate_1d(f, E::of(a), E::pos_inf(), 1e-13).unwrap();
        assert!(
            coarse.error_estimate >= (coarse.value - fine.value).abs(),
            "{coarse:?} vs {fine:?}"
        );
    }
}

#[test]
fn bounds_vanish_smoothly_as_h_underflows() {
    let all = BoxInterval::real_space(1).unwrap();
    for h in [1e-100, 1e-170, 1e-300] {
        let spec = LipschitzSpec::on_domain(vec![-3.0], 5.0, 1.0, Oscillation::Bounded(2.0), &all).unwrap();
        let input = BoundInput::new(spec, Bandwidth::uniform(1, h).unwrap()).unwrap();
        let t = bounded_terms(&input).unwrap();
        assert_eq!(t.denominator, 1.0);
        let b = bias_bound_bounded(&input).unwrap();
        assert!((b - 5.0 * h * (2.0 / PI).sqrt()).abs() <= 1e-15 * b);
    }
}
