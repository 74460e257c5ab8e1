//! Random designs: densities, samplers and log-Lipschitz constants.

use rand::distr::{Distribution, Open01};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::extmath::{erfc, ExtReal};
use crate::geometry::BoxInterval;

/// The univariate families. Pareto has unit scale, so its support is `(1, inf)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DesignKind {
    Laplace { mu: f64, lambda: f64 },
    Cauchy { mu: f64, gamma: f64 },
    Uniform { a: f64, b: f64 },
    Pareto { alpha: f64 },
    Normal { mu: f64, sigma: f64 },
}

impl DesignKind {
    pub const NAMES: [&'static str; 5] = ["laplace", "cauchy", "uniform", "pareto", "normal"];

    pub fn name(&self) -> &'static str {
        match self {
            DesignKind::Laplace { .. } => "laplace",
            DesignKind::Cauchy { .. } => "cauchy",
            DesignKind::Uniform { .. } => "uniform",
            DesignKind::Pareto { .. } => "pareto",
            DesignKind::Normal { .. } => "normal",
        }
    }
}

/// A validated univariate design.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Design {
    kind: DesignKind,
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, "must be finite and > 0"))
    }
}

fn finite(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, "must be finite"))
    }
}

impl Design {
    pub fn new(kind: DesignKind) -> Result<Self> {
        match kind {
            DesignKind::Laplace { mu, lambda } => {
                finite("mu", mu)?;
                positive("lambda", lambda)?;
            }
            DesignKind::Cauchy { mu, gamma } => {
                finite("mu", mu)?;
                positive("gamma", gamma)?;
            }
            DesignKind::Uniform { a, b } => {
                finite("a", a)?;
                finite("b", b)?;
                if a >= b {
                    return Err(invalid("b", "uniform design needs a < b"));
                }
            }
            DesignKind::Pareto { alpha } => positive("alpha", alpha)?,
            DesignKind::Normal { mu, sigma } => {
                finite("mu", mu)?;
                positive("sigma", sigma)?;
            }
        }
        Ok(Self { kind })
    }

    pub fn laplace(mu: f64, lambda: f64) -> Result<Self> {
        Self::new(DesignKind::Laplace { mu, lambda })
    }

    pub fn cauchy(mu: f64, gamma: f64) -> Result<Self> {
        Self::new(DesignKind::Cauchy { mu, gamma })
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        Self::new(DesignKind::Uniform { a, b })
    }

    pub fn pareto(alpha: f64) -> Result<Self> {
        Self::new(DesignKind::Pareto { alpha })
    }

    pub fn normal(mu: f64, sigma: f64) -> Result<Self> {
        Self::new(DesignKind::Normal { mu, sigma })
    }

    pub fn kind(&self) -> DesignKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    fn support_bounds(&self) -> (f64, f64) {
        match self.kind {
            DesignKind::Uniform { a, b } => (a, b),
            DesignKind::Pareto { .. } => (1.0, f64::INFINITY),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn support(&self) -> BoxInterval<f64> {
        BoxInterval::from_bounds(&[self.support_bounds()]).expect("valid design has a nonempty support")
    }

    /// Location of the density's maximum (for the uniform, the support's lower end).
    fn mode(&self) -> f64 {
        match self.kind {
            DesignKind::Laplace { mu, .. } | DesignKind::Cauchy { mu, .. } | DesignKind::Normal { mu, .. } => mu,
            DesignKind::Uniform { a, .. } => a,
            DesignKind::Pareto { .. } => 1.0,
        }
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support_bounds();
        if x.is_nan() || x < lo || x > hi {
            return f64::NEG_INFINITY;
        }
        match self.kind {
            DesignKind::Laplace { mu, lambda } => -(x - mu).abs() / lambda - (2.0 * lambda).ln(),
            DesignKind::Cauchy { mu, gamma } => {
                let u = (x - mu) / gamma;
                -(PI * gamma).ln() - (u * u).ln_1p()
            }
            DesignKind::Uniform { a, b } => -(b - a).ln(),
            DesignKind::Pareto { alpha } => alpha.ln() - (alpha + 1.0) * x.ln(),
            DesignKind::Normal { mu, sigma } => {
                let z = (x - mu) / sigma;
                -0.5 * z * z - sigma.ln() - 0.5 * (2.0 * PI).ln()
            }
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    /// `d/dx log f(x)`. At the Laplace peak the symmetric derivative 0 is used.
    pub fn log_pdf_slope(&self, x: f64) -> f64 {
        match self.kind {
            DesignKind::Laplace { mu, lambda } => {
                if x > mu {
                    -1.0 / lambda
                } else if x < mu {
                    1.0 / lambda
                } else {
                    0.0
                }
            }
            DesignKind::Cauchy { mu, gamma } => {
                let u = x - mu;
                -2.0 * u / (gamma * gamma + u * u)
            }
            DesignKind::Uniform { .. } => 0.0,
            DesignKind::Pareto { alpha } => -(alpha + 1.0) / x,
            DesignKind::Normal { mu, sigma } => -(x - mu) / (sigma * sigma),
        }
    }

    pub fn pdf_derivative(&self, x: f64) -> f64 {
        let f = self.pdf(x);
        if f == 0.0 {
            0.0
        } else {
            f * self.log_pdf_slope(x)
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support_bounds();
        if x <= lo {
            return 0.0;
        }
        if x >= hi {
            return 1.0;
        }
        match self.kind {
            DesignKind::Laplace { mu, lambda } => {
                if x < mu {
                    0.5 * ((x - mu) / lambda).exp()
                } else {
                    1.0 - 0.5 * (-(x - mu) / lambda).exp()
                }
            }
            DesignKind::Cauchy { mu, gamma } => 0.5 + ((x - mu) / gamma).atan() / PI,
            DesignKind::Uniform { a, b } => (x - a) / (b - a),
            DesignKind::Pareto { alpha } => 1.0 - x.powf(-alpha),
            DesignKind::Normal { mu, sigma } => 0.5 * erfc(-(x - mu) / (sigma * std::f64::consts::SQRT_2)),
        }
    }

    fn interval_bounds(&self, interval: &BoxInterval<f64>) -> Result<(ExtReal<f64>, ExtReal<f64>)> {
        if interval.dim() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: interval.dim(),
            });
        }
        if !interval.is_subset_of(&self.support())? {
            return Err(Error::Containment(format!(
                "interval is not inside the {} support",
                self.name()
            )));
        }
        Ok((interval.lower()[0], interval.upper()[0]))
    }

    /// `sup |d/dx log f|` over the closure of `interval`, a valid weak
    /// log-Lipschitz constant at every point of it.
    pub fn log_lipschitz_constant(&self, interval: &BoxInterval<f64>) -> Result<f64> {
        let (lo, hi) = self.interval_bounds(interval)?;
        match self.kind {
            DesignKind::Laplace { lambda, .. } => Ok(1.0 / lambda),
            DesignKind::Uniform { .. } => Ok(0.0),
            DesignKind::Pareto { alpha } => {
                let a = lo.finite().expect("pareto support is bounded below");
                Ok((alpha + 1.0) / a)
            }
            DesignKind::Normal { mu, sigma } => match (lo.finite(), hi.finite()) {
                (Some(a), Some(b)) => Ok((a - mu).abs().max((b - mu).abs()) / (sigma * sigma)),
                _ => Err(invalid(
                    "delta",
                    "the normal log-density slope is unbounded on an infinite interval",
                )),
            },
            DesignKind::Cauchy { mu, gamma } => {
                let covers = |p: f64| lo <= p && hi >= p;
                if covers(mu - gamma) || covers(mu + gamma) {
                    return Ok(1.0 / gamma);
                }
                let at = |e: ExtReal<f64>| e.finite().map_or(0.0, |v| self.log_pdf_slope(v).abs());
                Ok(at(lo).max(at(hi)))
            }
        }
    }

    /// `sup f` over the part of the support outside `interval`, or 0 if the
    /// interval covers the support.
    pub fn sup_pdf_outside(&self, interval: &BoxInterval<f64>) -> Result<f64> {
        let (lo, hi) = self.interval_bounds(interval)?;
        let (s_lo, s_hi) = self.support_bounds();
        let mode = self.mode();
        let mut sup: f64 = 0.0;
        if let Some(a) = lo.finite() {
            if a > s_lo {
                sup = sup.max(self.pdf(mode.clamp(s_lo, a)));
            }
        }
        if let Some(b) = hi.finite() {
            if b < s_hi {
                sup = sup.max(self.pdf(mode.clamp(b, s_hi)));
            }
        }
        Ok(sup)
    }

    /// One draw; inverse CDF except for the normal.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if let DesignKind::Normal { mu, sigma } = self.kind {
            let z: f64 = StandardNormal.sample(rng);
            return mu + sigma * z;
        }
        let u: f64 = Open01.sample(rng);
        match self.kind {
            DesignKind::Laplace { mu, lambda } => {
                let c = u - 0.5;
                mu - lambda * c.signum() * (-2.0 * c.abs()).ln_1p()
            }
            DesignKind::Cauchy { mu, gamma } => mu + gamma * (PI * (u - 0.5)).tan(),
            DesignKind::Uniform { a, b } => a + (b - a) * u,
            DesignKind::Pareto { alpha } => u.powf(-1.0 / alpha),
            DesignKind::Normal { .. } => unreachable!(),
        }
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.draw(rng)).collect()
    }

    /// `n` draws, deterministic in `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        self.sample_with(&mut ChaCha8Rng::seed_from_u64(seed), n)
    }
}

/// Independent coordinates, one univariate design per dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductDesign {
    factors: Vec<Design>,
}

impl ProductDesign {
    pub fn new(factors: Vec<Design>) -> Result<Self> {
        if factors.is_empty() {
            return Err(invalid("design", "need at least one factor"));
        }
        Ok(Self { factors })
    }

    pub fn dim(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[Design] {
        &self.factors
    }

    pub fn support(&self) -> BoxInterval<f64> {
        let bounds: Vec<(f64, f64)> = self.factors.iter().map(Design::support_bounds).collect();
        BoxInterval::from_bounds(&bounds).expect("factor supports are nonempty")
    }

    pub fn pdf(&self, x: &[f64]) -> f64 {
        self.ln_pdf(x).exp()
    }

    pub fn ln_pdf(&self, x: &[f64]) -> f64 {
        self.factors.iter().zip(x).map(|(f, &v)| f.ln_pdf(v)).sum()
    }

    fn axis(b: &BoxInterval<f64>, i: usize) -> BoxInterval<f64> {
        BoxInterval::interval(b.lower()[i], b.upper()[i]).expect("box axes are nonempty")
    }

    /// The largest per-factor constant, which bounds the joint log-density
    /// under the L1 norm.
    pub fn log_lipschitz_constant(&self, b: &BoxInterval<f64>) -> Result<f64> {
        if b.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: b.dim(),
            });
        }
        let mut l: f64 = 0.0;
        for (i, f) in self.factors.iter().enumerate() {
            l = l.max(f.log_lipschitz_constant(&Self::axis(b, i))?);
        }
        Ok(l)
    }

    /// An upper bound on `sup f` over the support outside `b`: outside the box
    /// at least one factor leaves its interval.
    pub fn sup_pdf_outside(&self, b: &BoxInterval<f64>) -> Result<f64> {
        if b.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: b.dim(),
            });
        }
        let peaks: Vec<f64> = self.factors.iter().map(|f| f.pdf(f.mode())).collect();
        let mut sup: f64 = 0.0;
        for (k, f) in self.factors.iter().enumerate() {
            let outside = f.sup_pdf_outside(&Self::axis(b, k))?;
            let rest: f64 = peaks
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != k)
                .map(|(_, p)| p)
                .product();
            sup = sup.max(outside * rest);
        }
        Ok(sup)
    }

    /// `n` points, row-major.
    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(n * self.dim());
        for _ in 0..n {
            for f in &self.factors {
                out.push(f.draw(rng));
            }
        }
        out
    }

    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        self.sample_with(&mut ChaCha8Rng::seed_from_u64(seed), n)
    }
}

impl From<Design> for ProductDesign {
    fn from(d: Design) -> Self {
        Self { factors: vec![d] }
    }
}
