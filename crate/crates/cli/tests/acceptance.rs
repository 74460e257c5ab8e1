//! Acceptance battery. Prints one line per criterion and exits nonzero if any fails.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nwbound::bounds::{
    bias_bound_bounded, bounded_terms, moment_integral_abs, moment_integral_signed, psi, rosenblatt_estimate,
    unbounded_terms, zeta, BoundInput, RosenblattInput,
};
use nwbound::designs::{Design, ProductDesign};
use nwbound::estimator::{nw_estimate, Bandwidth, Dataset};
use nwbound::extmath::ExtReal;
use nwbound::geometry::{effective_phi_box, BoxInterval, LipschitzSpec, OffsetBox, Oscillation};
use nwbound::oracle::Integrator;
use nwbound::simulation::{
    applicable_bound, attach_bounds, empirical_bias, linspace, test_function, AdditiveRegression, BoundSettings,
    ExperimentConfig, NoiseModel,
};

type E = ExtReal<f64>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(closed: f64, quad: f64) -> bool {
    (closed - quad).abs() <= (1e-8 * quad.abs()).max(1e-12)
}

fn endpoint(rng: &mut ChaCha8Rng, lo: f64, hi: f64, inf: E) -> E {
    if rng.random_bool(0.3) {
        inf
    } else {
        E::of(rng.random_range(lo..hi))
    }
}

fn gauss_weight(t: f64, h: f64, exponent: f64) -> f64 {
    (-t * t / (2.0 * h * h) + exponent).exp() / (2.0 * PI * h * h).sqrt()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let q = Integrator::with_rel_tol(1e-12);
    let mut worst = 0.0_f64;
    let mut failures = 0;
    let mut minus_variant_failed = false;
    for _ in 0..200 {
        let l: f64 = rng.random_range(0.0..5.0);
        let lm: f64 = rng.random_range(0.0..5.0);
        let h: f64 = rng.random_range(0.05..2.0);
        let a = endpoint(&mut rng, -3.0, 3.0, E::neg_inf());
        let b = loop {
            let b = endpoint(&mut rng, -3.0, 3.0, E::pos_inf());
            if b > a {
                break b;
            }
        };
        let zl = endpoint(&mut rng, -3.0, 0.0, E::neg_inf());
        let zh = endpoint(&mut rng, 0.0, 3.0, E::pos_inf());

        let mut check = |closed: f64, quad: f64| {
            let rel = (closed - quad).abs() / quad.abs().max(1e-300);
            if !within(closed, quad) {
                failures += 1;
            }
            if quad.abs() > 1e-12 {
                worst = worst.max(rel);
            }
        };
        let p = q.integrate(|t| 2.0 * gauss_weight(t, h, -t * l), a, b).unwrap().value;
        check(psi(l, h, a, b).unwrap(), p);
        let z = q
            .integrate_with_breaks(|t| 2.0 * gauss_weight(t, h, t.abs() * l), zl, zh, &[0.0])
            .unwrap()
            .value;
        check(zeta(h, zl, zh, l).unwrap(), z);
        let s = q
            .integrate(|t| gauss_weight(t, h, -t * l) * t * lm, a, b)
            .unwrap()
            .value;
        check(moment_integral_signed(lm, l, h, a, b).unwrap(), s);
        let m = q
            .integrate_with_breaks(|t| gauss_weight(t, h, t.abs() * l) * t.abs() * lm, zl, zh, &[0.0])
            .unwrap()
            .value;
        let closed = moment_integral_abs(lm, l, h, zl, zh).unwrap();
        check(closed, m);
        let minus = closed - lm * l * h * h * zeta(h, zl, zh, l).unwrap();
        if l > 0.0 && lm > 0.0 && !within(minus, m) {
            minus_variant_failed = true;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        failures == 0 && minus_variant_failed && secs < 60.0,
        format!(
            "800 comparisons over 200 tuples, {failures} outside tolerance, worst relative error {worst:.2e}, \
             minus-sign variant rejected: {minus_variant_failed}, {secs:.1}s"
        ),
    )
}

fn stressed(l: f64, h: f64) -> (f64, f64, f64, f64) {
    let (lo, hi) = (E::of(-1.0), E::of(1.0));
    let p = psi(l, h, lo, hi).unwrap();
    let z = zeta(h, lo, hi, l).unwrap();
    let q = Integrator::with_rel_tol(1e-12);
    let qp = q.integrate(|t| 2.0 * gauss_weight(t, h, -l * t), lo, hi).unwrap().value;
    let qz = q
        .integrate_with_breaks(|t| 2.0 * gauss_weight(t, h, l * t.abs()), lo, hi, &[0.0])
        .unwrap()
        .value;
    (p, z, ((p - qp) / qp).abs(), ((z - qz) / qz).abs())
}

fn criterion_2() -> Outcome {
    let (p, z, rp, rz) = stressed(10.0, 3.0);
    // e^{L^2 h^2 / 2} = e^{7200} here, far past the double range
    let (p40, z40, rp40, rz40) = stressed(40.0, 3.0);
    let ok = [p, z, p40, z40].iter().all(|v| v.is_finite()) && [rp, rz, rp40, rz40].iter().all(|&r| r <= 1e-6);
    outcome(
        ok,
        format!(
            "psi(10,3,-1,1)={p:.6e} (rel {rp:.1e}), zeta(3,-1,1,10)={z:.6e} (rel {rz:.1e}); \
             at L=40: rel {rp40:.1e}, {rz40:.1e}"
        ),
    )
}

fn one_d(f: &str, design: Design, h: f64, grid: Vec<f64>, n: usize, replicates: usize, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        design: design.into(),
        regression: AdditiveRegression::single(test_function(f).unwrap()),
        noise: NoiseModel::default(),
        n,
        replicates,
        bandwidth: Bandwidth::uniform(1, h).unwrap(),
        grid: grid.into_iter().map(|x| vec![x]).collect(),
        seed,
    }
}

/// Worst slack `bound + 3 se - |bias|` over the grid, or `None` if a point lacks a bound.
fn battery_slack(c: &ExperimentConfig) -> Option<f64> {
    let mut r = empirical_bias(c).ok()?;
    if r.total_failures() > 0 {
        return None;
    }
    attach_bounds(&mut r, c, &BoundSettings::default()).ok()?;
    r.points
        .iter()
        .map(|p| applicable_bound(p).map(|b| b + 3.0 * p.standard_error - p.empirical_bias.abs()))
        .try_fold(f64::INFINITY, |acc, s| s.map(|s| acc.min(s)))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let designs = [
        ("laplace", Design::laplace(0.0, 1.0).unwrap(), linspace(-2.0, 2.0, 21)),
        ("uniform", Design::uniform(-2.0, 2.0).unwrap(), linspace(-1.9, 1.9, 21)),
        ("cauchy", Design::cauchy(0.0, 1.0).unwrap(), linspace(-2.0, 2.0, 21)),
        ("pareto", Design::pareto(2.0).unwrap(), linspace(1.05, 4.0, 21)),
    ];
    let mut runs = 0;
    let mut bad = Vec::new();
    let mut worst = f64::INFINITY;
    for f in ["sin5x", "log", "logcosh60", "sqrt1px2"] {
        for (name, d, grid) in &designs {
            if f == "log" && *name != "pareto" {
                continue;
            }
            for h in [0.1, 0.5] {
                runs += 1;
                let c = one_d(f, *d, h, grid.clone(), 10_000, 50, 1000 + runs);
                match battery_slack(&c) {
                    Some(s) if s >= 0.0 => worst = worst.min(s),
                    Some(s) => bad.push(format!("{f}/{name}/h={h} slack {s:.3e}")),
                    None => bad.push(format!("{f}/{name}/h={h} has no applicable bound or failed")),
                }
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "{runs} configurations x 21 points, min slack {worst:.3e}, violations [{}], {:.1}s",
            bad.join("; "),
            start.elapsed().as_secs_f64()
        ),
    )
}

fn l1_weight(p: &[f64], h: &[f64], slope: f64) -> f64 {
    p.iter()
        .zip(h)
        .map(|(&v, &hk)| gauss_weight(v, hk, slope * v.abs()))
        .product()
}

fn two_d_closed_forms() -> (bool, f64) {
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
    let t = bounded_terms(&BoundInput::new(spec.clone(), Bandwidth::new(h.to_vec()).unwrap()).unwrap()).unwrap();
    let q = Integrator::with_rel_tol(1e-10);
    let abs = |b: &OffsetBox<f64>| b.to_absolute(&[0.0, 0.0]).unwrap();
    let f_box = effective_phi_box(&spec).unwrap();
    let br = vec![vec![0.0], vec![0.0]];
    let int = |w: &dyn Fn(&[f64]) -> f64, b: &BoxInterval<f64>| q.integrate_box(w, b, &br).unwrap().value;
    let lin = |p: &[f64]| l1_weight(p, &h, l_f) * l_m * (p[0].abs() + p[1].abs());
    let grow = |p: &[f64]| l1_weight(p, &h, l_f);
    let flat = |p: &[f64]| l1_weight(p, &h, 0.0);

    let all = BoxInterval::real_space(2).unwrap();
    let s2 = LipschitzSpec::on_domain(vec![0.2, -0.1], l_m, l_f, Oscillation::Unbounded, &all).unwrap();
    let u = unbounded_terms(&BoundInput::new(s2, Bandwidth::new(h.to_vec()).unwrap()).unwrap()).unwrap();

    let pairs = [
        (t.lipschitz, int(&lin, &abs(&f_box))),
        (t.denominator, int(&|p: &[f64]| l1_weight(p, &h, -l_f), &abs(&delta))),
        (t.capped, m * (int(&grow, &abs(&delta)) - int(&grow, &abs(&f_box)))),
        (t.outside, m * (int(&flat, &abs(&ups)) - int(&flat, &abs(&delta)))),
        (u.numerator, int(&lin, &all)),
        (u.denominator, int(&|p: &[f64]| l1_weight(p, &h, -l_f), &all)),
    ];
    let worst = pairs.iter().map(|(c, q)| (c - q).abs() / q.abs()).fold(0.0, f64::max);
    (worst <= 1e-6, worst)
}

fn criterion_4() -> Outcome {
    let design = ProductDesign::new(vec![Design::laplace(0.0, 1.0).unwrap(); 2]).unwrap();
    let regression = AdditiveRegression::new(vec![
        test_function("sin5x").unwrap(),
        test_function("sqrt1px2").unwrap(),
    ])
    .unwrap();
    let axis = linspace(-1.5, 1.5, 5);
    let grid = axis
        .iter()
        .flat_map(|&a| axis.iter().map(move |&b| vec![a, b]))
        .collect();
    let c = ExperimentConfig {
        design,
        regression,
        noise: NoiseModel::default(),
        n: 20_000,
        replicates: 30,
        bandwidth: Bandwidth::new(vec![0.2, 0.2]).unwrap(),
        grid,
        seed: 4,
    };
    let l_m = c.regression.l_m();
    let mut r = empirical_bias(&c).unwrap();
    attach_bounds(&mut r, &c, &BoundSettings::default()).unwrap();
    let slack = r
        .points
        .iter()
        .map(|p| {
            p.bound_theorem2.map_or(f64::NEG_INFINITY, |b| {
                b + 3.0 * p.standard_error - p.empirical_bias.abs()
            })
        })
        .fold(f64::INFINITY, f64::min);
    let (closed_ok, worst) = two_d_closed_forms();
    outcome(
        slack >= 0.0 && l_m == 6.0 && closed_ok,
        format!(
            "L_m={l_m}, min slack over 25 points {slack:.3e}, 2-d closed forms vs quadrature worst rel {worst:.1e}"
        ),
    )
}

fn criterion_5() -> Outcome {
    let design = Design::laplace(0.0, 1.0).unwrap();
    let all = BoxInterval::real_space(1).unwrap();
    let l_f = design.log_lipschitz_constant(&all).unwrap();
    let values: Vec<f64> = [0.5, 0.2, 0.1, 0.05, 0.01]
        .iter()
        .map(|&h| {
            let spec = LipschitzSpec::on_domain(vec![0.0], 5.0, l_f, Oscillation::Bounded(2.0), &all).unwrap();
            bias_bound_bounded(&BoundInput::new(spec, Bandwidth::uniform(1, h).unwrap()).unwrap()).unwrap()
        })
        .collect();
    let decreasing = values.windows(2).all(|w| w[1] < w[0]);
    let last = values[4];
    outcome(
        decreasing && last <= 0.2,
        format!("bounds {values:.4?}, strictly decreasing: {decreasing}, at h=0.01: {last:.4}"),
    )
}

fn criterion_6() -> Outcome {
    let design = Design::uniform(-2.0, 2.0).unwrap();
    let f = |x: f64| design.pdf(x);
    let fp = |x: f64| design.pdf_derivative(x);
    let mut exact = true;
    for h in [0.05, 0.1, 0.3] {
        let r = rosenblatt_estimate(&RosenblattInput {
            m_prime: &|x: f64| 2.0 * x,
            m_double_prime: &|_| 2.0,
            f: &f,
            f_prime: &fp,
            x: 0.0,
            h,
        })
        .unwrap();
        exact &= (r - h * h).abs() <= f64::EPSILON * h * h;
    }
    let linear = [-1.5, -0.3, 0.0, 0.7, 1.9].iter().all(|&x| {
        rosenblatt_estimate(&RosenblattInput {
            m_prime: &|_| 3.0,
            m_double_prime: &|_| 0.0,
            f: &f,
            f_prime: &fp,
            x,
            h: 0.2,
        })
        .unwrap()
            == 0.0
    });
    outcome(
        exact && linear,
        format!("x^2 gives h^2: {exact}, linear m gives 0: {linear}"),
    )
}

fn lobatto_sup(d: &Design, a: f64, b: f64) -> f64 {
    (0..400)
        .map(|k| 0.5 * (a + b) - 0.5 * (b - a) * (PI * k as f64 / 399.0).cos())
        .map(|x| d.log_pdf_slope(x).abs())
        .fold(0.0, f64::max)
}

fn criterion_7() -> Outcome {
    let mut exact = true;
    for lambda in [0.5, 1.0, 3.0] {
        let d = Design::laplace(0.2, lambda).unwrap();
        exact &= d.log_lipschitz_constant(&d.support()).unwrap() == 1.0 / lambda;
    }
    let u = Design::uniform(-2.0, 2.0).unwrap();
    exact &= u.log_lipschitz_constant(&u.support()).unwrap() == 0.0;
    for alpha in [0.5, 2.0, 4.0] {
        let p = Design::pareto(alpha).unwrap();
        exact &= p.log_lipschitz_constant(&p.support()).unwrap() == 1.0 + alpha;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let mu = rng.random_range(-1.0..1.0);
        let scale = rng.random_range(1.0..2.0);
        let a = rng.random_range(-3.0..2.5);
        let b = rng.random_range((a + 0.5)..3.0f64.max(a + 0.6));
        let iv = BoxInterval::interval(E::of(a), E::of(b)).unwrap();
        for d in [Design::normal(mu, scale).unwrap(), Design::cauchy(mu, scale).unwrap()] {
            let c = d.log_lipschitz_constant(&iv).unwrap();
            let s = lobatto_sup(&d, a, b);
            worst = worst.max((c - s).abs() / s.max(f64::MIN_POSITIVE));
        }
    }
    outcome(
        exact && worst <= 1e-4,
        format!("closed-form constants exact: {exact}, normal/cauchy vs 400-point sup worst rel {worst:.2e}"),
    )
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut constant = true;
    let mut convex = true;
    let mut perm = true;
    for _ in 0..1000 {
        let n = rng.random_range(1..60);
        let xs: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let ys: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        let h = Bandwidth::uniform(1, rng.random_range(0.02..3.0)).unwrap();
        let q = [rng.random_range(-6.0..6.0)];
        let c = rng.random_range(-100.0..100.0);
        let flat = Dataset::univariate(xs.clone(), vec![c; n]).unwrap();
        constant &= nw_estimate(&flat, &q, &h).unwrap() == c;
        let d = Dataset::univariate(xs.clone(), ys.clone()).unwrap();
        let v = nw_estimate(&d, &q, &h).unwrap();
        let lo = ys.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        convex &= lo <= v && v <= hi;
        let mut idx: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            idx.swap(i, rng.random_range(0..=i));
        }
        let pd = Dataset::univariate(
            idx.iter().map(|&i| xs[i]).collect(),
            idx.iter().map(|&i| ys[i]).collect(),
        )
        .unwrap();
        perm &= nw_estimate(&pd, &q, &h).unwrap().to_bits() == v.to_bits();
    }
    outcome(
        constant && convex && perm,
        format!("1000 datasets: constant exact {constant}, within output range {convex}, permutation bitwise {perm}"),
    )
}

fn bundled_configs() -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "toml"))
        .collect();
    v.sort();
    v
}

fn run_cli(config: &Path, out: &Path, jobs: &str) -> Option<Vec<Vec<u8>>> {
    let status = Command::new(env!("CARGO_BIN_EXE_nwbound"))
        .args(["run", "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(["--jobs", jobs])
        .output()
        .ok()?;
    if !status.status.success() {
        return None;
    }
    let mut csvs: Vec<PathBuf> = std::fs::read_dir(out)
        .ok()?
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    csvs.sort();
    csvs.iter().map(|p| std::fs::read(p).ok()).collect()
}

fn criterion_9() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let configs = bundled_configs();
    let mut bad = Vec::new();
    for c in &configs {
        let name = c.file_stem().unwrap().to_string_lossy().to_string();
        let runs: Vec<_> = ["1", "1", "8"]
            .iter()
            .enumerate()
            .map(|(i, j)| run_cli(c, &tmp.path().join(format!("{name}-{i}")), j))
            .collect();
        match (&runs[0], &runs[1], &runs[2]) {
            (Some(a), Some(b), Some(c8)) if !a.is_empty() && a == b && a == c8 => {}
            _ => bad.push(name),
        }
    }
    outcome(
        bad.is_empty() && configs.len() == 5,
        format!(
            "{} bundled configs, repeated and --jobs 1 vs 8 runs identical except [{}]",
            configs.len(),
            bad.join(", ")
        ),
    )
}

fn main() {
    let criteria: [(usize, fn() -> Outcome); 9] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (n, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|a| a == &n.to_string()) {
            continue;
        }
        let o = std::panic::catch_unwind(f).unwrap_or_else(|_| outcome(false, "panicked"));
        println!("criterion {n}: {} ({})", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
