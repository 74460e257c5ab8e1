//! Ensemble Monte Carlo estimate of the bias and per-point bound evaluation.
//!
//! Replicate `j` draws its dataset from a ChaCha8 generator seeded with the
//! master seed on stream `j`, so the ensemble is identical however the
//! replicates are scheduled across threads.

mod catalog;

pub use catalog::{test_function, test_function_catalog, test_function_keys, TestFunction};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::bounds::{bias_bound_bounded, bias_bound_unbounded, rosenblatt_signed, BoundInput, RosenblattInput};
use crate::designs::ProductDesign;
use crate::error::{invalid, Error, Result};
use crate::estimator::{Bandwidth, Dataset, NadarayaWatson};
use crate::extmath::exact_sum;
use crate::geometry::{BoxInterval, LipschitzSpec, Oscillation};

/// `m(x) = sum_k m_k(x_k)`, one catalog function per coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct AdditiveRegression {
    terms: Vec<TestFunction>,
}

impl AdditiveRegression {
    pub fn new(terms: Vec<TestFunction>) -> Result<Self> {
        if terms.is_empty() {
            return Err(invalid("regression", "need at least one function"));
        }
        Ok(Self { terms })
    }

    pub fn single(f: TestFunction) -> Self {
        Self { terms: vec![f] }
    }

    pub fn dim(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &[TestFunction] {
        &self.terms
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.terms.iter().zip(x).map(|(t, &v)| (t.m)(v)).sum()
    }

    /// Sum of the per-term constants, valid under the L1 norm.
    pub fn l_m(&self) -> f64 {
        self.terms.iter().map(|t| t.l_m).sum()
    }

    pub fn oscillation(&self) -> Oscillation<f64> {
        self.terms
            .iter()
            .try_fold(0.0, |acc, t| t.oscillation.bounded().map(|m| acc + m))
            .map_or(Oscillation::Unbounded, Oscillation::Bounded)
    }

    /// Product of the per-term lipschitz intervals.
    pub fn default_gamma(&self) -> BoxInterval<f64> {
        let b: Vec<(f64, f64)> = self.terms.iter().map(|t| t.default_gamma).collect();
        BoxInterval::from_bounds(&b).expect("catalog intervals are nonempty")
    }
}

/// Standard deviation of the zero-mean Gaussian noise at `x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NoiseModel {
    Constant(f64),
    /// `base + slope * |x|_1`.
    Linear {
        base: f64,
        slope: f64,
    },
}

impl NoiseModel {
    pub fn sigma(&self, x: &[f64]) -> f64 {
        match *self {
            NoiseModel::Constant(s) => s,
            NoiseModel::Linear { base, slope } => base + slope * x.iter().map(|v| v.abs()).sum::<f64>(),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            NoiseModel::Constant(s) => s >= 0.0 && s.is_finite(),
            NoiseModel::Linear { base, slope } => base >= 0.0 && slope >= 0.0 && base.is_finite() && slope.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(invalid("noise", "sigma must be finite and non-negative"))
        }
    }
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel::Constant(0.1)
    }
}

pub const DEFAULT_SAMPLES: usize = 10_000;
pub const DEFAULT_REPLICATES: usize = 50;

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub design: ProductDesign,
    pub regression: AdditiveRegression,
    pub noise: NoiseModel,
    pub n: usize,
    pub replicates: usize,
    pub bandwidth: Bandwidth<f64>,
    pub grid: Vec<Vec<f64>>,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let d = self.design.dim();
        for got in [self.regression.dim(), self.bandwidth.dim()] {
            if got != d {
                return Err(Error::DimensionMismatch { expected: d, got });
            }
        }
        if self.n < 100 {
            return Err(invalid("n", "need at least 100 samples per dataset"));
        }
        if self.replicates < 2 {
            return Err(invalid("replicates", "need at least 2 replicates for a standard error"));
        }
        if self.grid.is_empty() {
            return Err(invalid("grid", "need at least one query point"));
        }
        let support = self.design.support();
        for p in &self.grid {
            if !support.contains(p)? {
                return Err(Error::Containment(format!(
                    "grid point {p:?} lies outside the design support"
                )));
            }
        }
        self.noise.validate()
    }

    fn dataset(&self, replicate: usize) -> Result<Dataset<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(replicate as u64);
        let d = self.design.dim();
        let inputs = self.design.sample_with(&mut rng, self.n);
        let outputs = inputs
            .chunks(d)
            .map(|x| {
                let eps: f64 = StandardNormal.sample(&mut rng);
                self.regression.value(x) + self.noise.sigma(x) * eps
            })
            .collect();
        Dataset::from_flat(d, inputs, outputs)
    }
}

/// The empirical side of one grid point.
#[derive(Clone, Debug, PartialEq)]
pub struct PointReport {
    pub x: Vec<f64>,
    pub m_true: f64,
    pub m_hat_mean: f64,
    pub empirical_bias: f64,
    pub standard_error: f64,
    /// Replicates whose estimate failed at this point; excluded from the mean.
    pub failures: usize,
    pub density: f64,
    pub bound_theorem1: Option<f64>,
    pub bound_theorem2: Option<f64>,
    pub rosenblatt: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BiasReport {
    pub points: Vec<PointReport>,
}

impl BiasReport {
    pub fn total_failures(&self) -> usize {
        self.points.iter().map(|p| p.failures).sum()
    }
}

/// Ensemble mean of the estimate minus the truth at every grid point.
///
/// Estimator failures are counted per point rather than aborting the run.
/// Bound columns are left empty; see [`attach_bounds`].
pub fn empirical_bias(config: &ExperimentConfig) -> Result<BiasReport> {
    config.validate()?;
    let estimates: Vec<Vec<Result<f64>>> = (0..config.replicates)
        .into_par_iter()
        .map(|j| -> Result<Vec<Result<f64>>> {
            let data = config.dataset(j)?;
            let mut nw = NadarayaWatson::new(&data, &config.bandwidth)?;
            Ok(config.grid.iter().map(|x| nw.estimate(x)).collect())
        })
        .collect::<Result<_>>()?;

    let points = config
        .grid
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let ok: Vec<f64> = estimates.iter().filter_map(|e| e[i].as_ref().ok().copied()).collect();
            let failures = config.replicates - ok.len();
            let (mean, se) = mean_and_standard_error(&ok);
            let m_true = config.regression.value(x);
            PointReport {
                x: x.clone(),
                m_true,
                m_hat_mean: mean,
                empirical_bias: mean - m_true,
                standard_error: se,
                failures,
                density: config.design.pdf(x),
                bound_theorem1: None,
                bound_theorem2: None,
                rosenblatt: None,
            }
        })
        .collect();
    Ok(BiasReport { points })
}

/// Sample mean and `sd / sqrt(N)` with the unbiased variance. NaN when
/// fewer than two values are present.
pub fn mean_and_standard_error(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n < 2 {
        return (values.first().copied().unwrap_or(f64::NAN), f64::NAN);
    }
    let mean = exact_sum(values.iter().copied()) / n as f64;
    let ss = exact_sum(values.iter().map(|v| (v - mean) * (v - mean)));
    let sd = (ss / (n - 1) as f64).sqrt();
    (mean, sd / (n as f64).sqrt())
}

/// A Lipschitz-constant or box value that is either derived from the design
/// and catalog or given explicitly.
#[derive(Clone, Debug, PartialEq, Default)]
pub enum Setting<T> {
    #[default]
    Auto,
    Given(T),
}

/// How the bound inputs are resolved at each grid point.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct BoundSettings {
    pub l_f: Setting<f64>,
    pub l_m: Setting<f64>,
    pub oscillation: Setting<Oscillation<f64>>,
    /// Domain; defaults to the design support.
    pub upsilon: Setting<BoxInterval<f64>>,
    /// Log-Lipschitz region of the design; defaults to `upsilon`.
    pub delta: Setting<BoxInterval<f64>>,
    /// Lipschitz region of the regression; defaults to its catalog interval within `delta`.
    pub gamma: Setting<BoxInterval<f64>>,
}

/// The resolved boxes and constants, before specializing to a query point.
#[derive(Clone, Debug, PartialEq)]
pub struct ResolvedBounds {
    pub l_f: f64,
    pub l_m: f64,
    pub oscillation: Oscillation<f64>,
    pub upsilon: BoxInterval<f64>,
    pub delta: BoxInterval<f64>,
    pub gamma: BoxInterval<f64>,
}

impl ResolvedBounds {
    pub fn resolve(config: &ExperimentConfig, settings: &BoundSettings) -> Result<Self> {
        let design = &config.design;
        let support = design.support();
        let upsilon = match &settings.upsilon {
            Setting::Auto => support.clone(),
            Setting::Given(b) => b.clone(),
        };
        if !support.is_subset_of(&upsilon)? {
            return Err(Error::Containment("upsilon must contain the design support".into()));
        }
        let delta = match &settings.delta {
            Setting::Auto => upsilon.intersect(&support)?,
            Setting::Given(b) => b.clone(),
        };
        if !delta.is_subset_of(&upsilon)? {
            return Err(Error::Containment("delta must be contained in upsilon".into()));
        }
        let gamma = match &settings.gamma {
            Setting::Auto => config.regression.default_gamma().intersect(&delta)?,
            Setting::Given(b) => b.clone(),
        };
        if !gamma.is_subset_of(&delta)? {
            return Err(Error::Containment("gamma must be contained in delta".into()));
        }
        let design_delta = delta.intersect(&support)?;
        let l_f = match settings.l_f {
            Setting::Auto => design.log_lipschitz_constant(&design_delta)?,
            Setting::Given(v) => v,
        };
        let l_m = match settings.l_m {
            Setting::Auto => config.regression.l_m(),
            Setting::Given(v) => v,
        };
        let oscillation = match settings.oscillation {
            Setting::Auto => config.regression.oscillation(),
            Setting::Given(o) => o,
        };
        Ok(Self {
            l_f,
            l_m,
            oscillation,
            upsilon,
            delta,
            gamma,
        })
    }

    /// The per-point spec, checking that the design is no denser outside D
    /// than at `x`.
    pub fn spec_at(&self, design: &ProductDesign, x: &[f64]) -> Result<LipschitzSpec<f64>> {
        let support = design.support();
        let d = self.delta.intersect(&support)?;
        if d != support {
            let outside = design.sup_pdf_outside(&d)?;
            if outside > design.pdf(x) {
                return Err(Error::Containment(format!(
                    "design density outside delta ({outside}) exceeds f(x) at {x:?}"
                )));
            }
        }
        LipschitzSpec::from_absolute(
            x.to_vec(),
            self.l_m,
            self.l_f,
            self.oscillation,
            &self.upsilon,
            &self.delta,
            &self.gamma,
        )
    }
}

/// Bounds at one point: the bounded bound when `M` is finite, the unbounded
/// bound when all three boxes coincide.
pub fn bounds_at(
    resolved: &ResolvedBounds,
    design: &ProductDesign,
    h: &Bandwidth<f64>,
    x: &[f64],
) -> Result<(Option<f64>, Option<f64>)> {
    let input = BoundInput::new(resolved.spec_at(design, x)?, h.clone())?;
    let t1 = match resolved.oscillation {
        Oscillation::Bounded(_) => Some(bias_bound_bounded(&input)?),
        Oscillation::Unbounded => None,
    };
    let t2 = if input.spec().boxes_coincide() {
        Some(bias_bound_unbounded(&input)?)
    } else {
        None
    };
    Ok((t1, t2))
}

/// `|sum_k h_k^2 (m_k''/2 + m_k' f_k'/f_k)|` at `x`, or `None` where the
/// design density vanishes.
pub fn rosenblatt_at(config: &ExperimentConfig, x: &[f64]) -> Result<Option<f64>> {
    let h = config.bandwidth.as_slice();
    let mut total = 0.0;
    for (k, (t, f)) in config
        .regression
        .terms()
        .iter()
        .zip(config.design.factors())
        .enumerate()
    {
        let pdf = |v: f64| f.pdf(v);
        let dpdf = |v: f64| f.pdf_derivative(v);
        let fk = pdf(x[k]);
        if fk.is_nan() || fk <= 0.0 {
            return Ok(None);
        }
        total += rosenblatt_signed(&RosenblattInput {
            m_prime: &t.m_prime,
            m_double_prime: &t.m_double_prime,
            f: &pdf,
            f_prime: &dpdf,
            x: x[k],
            h: h[k],
        })?;
    }
    Ok(Some(total.abs()))
}

/// Fills the bound and Rosenblatt columns of `report`.
pub fn attach_bounds(
    report: &mut BiasReport,
    config: &ExperimentConfig,
    settings: &BoundSettings,
) -> Result<ResolvedBounds> {
    let resolved = ResolvedBounds::resolve(config, settings)?;
    for p in &mut report.points {
        let (t1, t2) = bounds_at(&resolved, &config.design, &config.bandwidth, &p.x)?;
        p.bound_theorem1 = t1;
        p.bound_theorem2 = t2;
        p.rosenblatt = rosenblatt_at(config, &p.x)?;
    }
    Ok(resolved)
}

/// Evenly spaced points from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, points: usize) -> Vec<f64> {
    match points {
        0 => vec![],
        1 => vec![start],
        _ => (0..points)
            .map(|i| {
                if i == points - 1 {
                    stop
                } else {
                    start + (stop - start) * i as f64 / (points - 1) as f64
                }
            })
            .collect(),
    }
}

/// The bound that applies to the report row: bounded if present, else unbounded.
pub fn applicable_bound(p: &PointReport) -> Option<f64> {
    p.bound_theorem1.or(p.bound_theorem2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::designs::Design;

    fn config(f: &str, design: Design, h: f64, grid: Vec<f64>) -> ExperimentConfig {
        ExperimentConfig {
            design: design.into(),
            regression: AdditiveRegression::single(test_function(f).unwrap()),
            noise: NoiseModel::default(),
            n: 500,
            replicates: 4,
            bandwidth: Bandwidth::uniform(1, h).unwrap(),
            grid: grid.into_iter().map(|x| vec![x]).collect(),
            seed: 11,
        }
    }

    #[test]
    fn validation() {
        let mut c = config("sin5x", Design::uniform(-2.0, 2.0).unwrap(), 0.1, vec![0.0]);
        assert!(c.validate().is_ok());
        c.grid = vec![vec![3.0]];
        assert!(matches!(c.validate(), Err(Error::Containment(_))));
        c.grid = vec![vec![0.0]];
        c.replicates = 1;
        assert!(c.validate().is_err());
    }

    #[test]
    fn deterministic_and_thread_independent() {
        let c = config("sin5x", Design::laplace(0.0, 1.0).unwrap(), 0.2, vec![-1.0, 0.0, 0.5]);
        let a = empirical_bias(&c).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| empirical_bias(&c).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn mean_and_se() {
        let (m, se) = mean_and_standard_error(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((se - (5.0f64 / 3.0).sqrt() / 2.0).abs() < 1e-15);
        assert!(mean_and_standard_error(&[1.0]).1.is_nan());
    }

    #[test]
    fn additive_constants() {
        let r = AdditiveRegression::new(vec![
            test_function("sin5x").unwrap(),
            test_function("sqrt1px2").unwrap(),
        ])
        .unwrap();
        assert_eq!(r.l_m(), 6.0);
        assert_eq!(r.oscillation(), Oscillation::Unbounded);
        let s = AdditiveRegression::new(vec![test_function("sin5x").unwrap(); 2]).unwrap();
        assert_eq!(s.oscillation(), Oscillation::Bounded(4.0));
    }

    #[test]
    fn resolved_defaults() {
        let c = config("log", Design::pareto(2.0).unwrap(), 0.2, vec![1.5]);
        let r = ResolvedBounds::resolve(&c, &BoundSettings::default()).unwrap();
        assert_eq!(r.l_f, 3.0);
        assert_eq!(r.gamma, r.delta);
        let mut rep = empirical_bias(&c).unwrap();
        attach_bounds(&mut rep, &c, &BoundSettings::default()).unwrap();
        assert!(rep.points[0].bound_theorem1.is_none());
        assert!(rep.points[0].bound_theorem2.unwrap() > 0.0);
    }

    #[test]
    fn density_condition_outside_delta() {
        let c = config("sin5x", Design::laplace(0.0, 1.0).unwrap(), 0.2, vec![1.5]);
        let settings = BoundSettings {
            delta: Setting::Given(BoxInterval::from_bounds(&[(1.0, 2.0)]).unwrap()),
            gamma: Setting::Given(BoxInterval::from_bounds(&[(1.0, 2.0)]).unwrap()),
            ..BoundSettings::default()
        };
        let r = ResolvedBounds::resolve(&c, &settings).unwrap();
        assert!(matches!(r.spec_at(&c.design, &[1.5]), Err(Error::Containment(_))));
        let ok = BoundSettings {
            delta: Setting::Given(BoxInterval::from_bounds(&[(-2.0, 2.0)]).unwrap()),
            gamma: Setting::Given(BoxInterval::from_bounds(&[(-2.0, 2.0)]).unwrap()),
            ..BoundSettings::default()
        };
        let r = ResolvedBounds::resolve(&c, &ok).unwrap();
        assert!(r.spec_at(&c.design, &[0.5]).is_ok());
    }

    #[test]
    fn linspace_endpoints() {
        let v = linspace(-1.9, 1.9, 21);
        assert_eq!(v.len(), 21);
        assert_eq!(v[0], -1.9);
        assert_eq!(v[20], 1.9);
    }
}
