#![allow(clippy::excessive_precision)]

//! Adaptive Gauss–Kronrod quadrature used as an independent referee for the
//! closed forms.
//!
//! Each panel is integrated with the 7-point Gauss and 15-point Kronrod pair;
//! the panel with the largest error estimate is bisected until the total error
//! meets the tolerance. Infinite ranges are mapped onto finite ones first:
//! `l = t / (1 - t^2)` on the whole line and `l = a + t / (1 - t)` on a half line.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{invalid, Error, Result};
use crate::extmath::ExtReal;
use crate::geometry::BoxInterval;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5] and the center.
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Half-width of the window kept around the query point, in bandwidths.
pub const KERNEL_CLIP: f64 = 40.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub subdivisions: usize,
}

/// Tolerances and limits of the adaptive scheme.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integrator {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for Integrator {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 0.0,
            max_subdivisions: 2000,
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    abs_value: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Panel> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let eval = |t: f64| {
        let v = f(t);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteIntegrand { at: t })
        }
    };

    let fc = eval(center)?;
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_k = fc.abs() * WGK[7];
    let mut pairs = [(0.0, 0.0); 7];
    for (j, pair) in pairs.iter_mut().enumerate() {
        let dx = half * XGK[j];
        let (f1, f2) = (eval(center - dx)?, eval(center + dx)?);
        kronrod += WGK[j] * (f1 + f2);
        abs_k += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
        *pair = (f1, f2);
    }

    let mean = 0.5 * kronrod;
    let mut asc = WGK[7] * (fc - mean).abs();
    for (j, &(f1, f2)) in pairs.iter().enumerate() {
        asc += WGK[j] * ((f1 - mean).abs() + (f2 - mean).abs());
    }
    let half_abs = half.abs();
    let value = kronrod * half;
    let abs_value = abs_k * half_abs;
    asc *= half_abs;

    let mut error = ((kronrod - gauss) * half).abs();
    if asc != 0.0 && error != 0.0 {
        error = asc * (200.0 * error / asc).powf(1.5).min(1.0);
    }
    if abs_value > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * abs_value);
    }
    Ok(Panel {
        a,
        b,
        value,
        error,
        abs_value,
    })
}

impl Integrator {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.rel_tol >= 1e-14 && self.rel_tol < 1.0) {
            return Err(invalid("rel_tol", "must lie in [1e-14, 1)"));
        }
        if self.abs_tol.is_nan() || self.abs_tol < 0.0 {
            return Err(invalid("abs_tol", "must be non-negative"));
        }
        Ok(())
    }

    /// Adaptive integration of `f` over the finite interval `(a, b)` with the
    /// given interior break points.
    fn adapt<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64, breaks: &[f64]) -> Result<QuadratureResult> {
        let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&p| a < p && p < b).collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut edges = Vec::with_capacity(cuts.len() + 2);
        edges.push(a);
        edges.extend(cuts);
        edges.push(b);

        let mut heap = BinaryHeap::new();
        for w in edges.windows(2) {
            heap.push(kronrod_panel(f, w[0], w[1])?);
        }
        let mut subdivisions = 0;
        loop {
            let value: f64 = heap.iter().map(|p| p.value).sum();
            let error: f64 = heap.iter().map(|p| p.error).sum();
            let abs_value: f64 = heap.iter().map(|p| p.abs_value).sum();
            let target = self.abs_tol.max(self.rel_tol * value.abs());
            if error <= target || error <= 64.0 * f64::EPSILON * abs_value {
                return Ok(QuadratureResult {
                    value,
                    error_estimate: error,
                    subdivisions,
                });
            }
            if subdivisions >= self.max_subdivisions {
                return Err(Error::QuadratureNonConvergence {
                    subdivisions,
                    error_estimate: error,
                });
            }
            let worst = heap.pop().expect("at least one panel");
            let mid = 0.5 * (worst.a + worst.b);
            if !(worst.a < mid && mid < worst.b) {
                // panel at float resolution; nothing left to refine
                return Err(Error::QuadratureNonConvergence {
                    subdivisions,
                    error_estimate: error,
                });
            }
            heap.push(kronrod_panel(f, worst.a, mid)?);
            heap.push(kronrod_panel(f, mid, worst.b)?);
            subdivisions += 1;
        }
    }

    pub fn integrate<F: Fn(f64) -> f64>(
        &self,
        f: F,
        lower: ExtReal<f64>,
        upper: ExtReal<f64>,
    ) -> Result<QuadratureResult> {
        self.integrate_with_breaks(f, lower, upper, &[])
    }

    /// As [`Integrator::integrate`], splitting the range at `breaks` first
    /// (kinks, peaks). Break points outside the range are ignored.
    pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
        &self,
        f: F,
        lower: ExtReal<f64>,
        upper: ExtReal<f64>,
        breaks: &[f64],
    ) -> Result<QuadratureResult> {
        self.validate()?;
        match lower.cmp(&upper) {
            Ordering::Equal => {
                return Ok(QuadratureResult {
                    value: 0.0,
                    error_estimate: 0.0,
                    subdivisions: 0,
                })
            }
            Ordering::Greater => return Err(Error::EmptyInterval { dim: 0 }),
            Ordering::Less => {}
        }
        match (lower.finite(), upper.finite()) {
            (Some(a), Some(b)) => self.adapt(&f, a, b, breaks),
            (None, None) => {
                let g = |t: f64| {
                    let d = 1.0 - t * t;
                    f(t / d) * (1.0 + t * t) / (d * d)
                };
                let tb: Vec<f64> = breaks
                    .iter()
                    .map(|&l| 2.0 * l / (1.0 + (1.0 + 4.0 * l * l).sqrt()))
                    .collect();
                self.adapt(&g, -1.0, 1.0, &tb)
            }
            (Some(a), None) => {
                let g = |t: f64| {
                    let d = 1.0 - t;
                    f(a + t / d) / (d * d)
                };
                let tb: Vec<f64> = breaks.iter().map(|&l| (l - a) / (1.0 + l - a)).collect();
                self.adapt(&g, 0.0, 1.0, &tb)
            }
            (None, Some(b)) => {
                let g = |t: f64| {
                    let d = 1.0 - t;
                    f(b - t / d) / (d * d)
                };
                let tb: Vec<f64> = breaks.iter().map(|&l| (b - l) / (1.0 + b - l)).collect();
                self.adapt(&g, 0.0, 1.0, &tb)
            }
        }
    }

    /// Iterated integration of `f` over a box of dimension at most 3.
    ///
    /// Inner integrals run at a tenth of the tolerance; the reported error is
    /// the outer estimate plus that inner tolerance applied to the result.
    pub fn integrate_box<F: Fn(&[f64]) -> f64>(
        &self,
        f: F,
        domain: &BoxInterval<f64>,
        breaks: &[Vec<f64>],
    ) -> Result<QuadratureResult> {
        let d = domain.dim();
        if d > 3 {
            return Err(invalid("domain", "iterated quadrature supports at most 3 dimensions"));
        }
        if breaks.len() > d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: breaks.len(),
            });
        }
        let mut point = vec![0.0; d];
        self.iterate(&f, domain, breaks, 0, &mut point)
    }

    fn iterate<F: Fn(&[f64]) -> f64>(
        &self,
        f: &F,
        domain: &BoxInterval<f64>,
        breaks: &[Vec<f64>],
        axis: usize,
        point: &mut [f64],
    ) -> Result<QuadratureResult> {
        let d = domain.dim();
        let lo = domain.lower()[axis];
        let hi = domain.upper()[axis];
        let br = breaks.get(axis).map_or(&[][..], Vec::as_slice);
        if axis + 1 == d {
            let base = point.to_vec();
            let cell = RefCell::new(base);
            return self.integrate_with_breaks(
                |t| {
                    let mut p = cell.borrow_mut();
                    p[axis] = t;
                    f(&p)
                },
                lo,
                hi,
                br,
            );
        }
        let inner = Integrator {
            rel_tol: (self.rel_tol * 0.1).max(1e-14),
            abs_tol: self.abs_tol * 0.1,
            ..*self
        };
        let failure: RefCell<Option<Error>> = RefCell::new(None);
        let state = RefCell::new(point.to_vec());
        let outer = self.integrate_with_breaks(
            |t| {
                if failure.borrow().is_some() {
                    return 0.0;
                }
                let mut p = state.borrow().clone();
                p[axis] = t;
                match inner.iterate(f, domain, breaks, axis + 1, &mut p) {
                    Ok(r) => r.value,
                    Err(e) => {
                        *failure.borrow_mut() = Some(e);
                        0.0
                    }
                }
            },
            lo,
            hi,
            br,
        )?;
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        Ok(QuadratureResult {
            error_estimate: outer.error_estimate + inner.rel_tol * outer.value.abs() + inner.abs_tol,
            ..outer
        })
    }
}

/// `int_lower^upper f` to relative tolerance `rel_tol` with default limits.
pub fn integrate_1d<F: Fn(f64) -> f64>(
    f: F,
    lower: ExtReal<f64>,
    upper: ExtReal<f64>,
    rel_tol: f64,
) -> Result<QuadratureResult> {
    Integrator::with_rel_tol(rel_tol).integrate(f, lower, upper)
}

pub fn integrate_1d_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    lower: ExtReal<f64>,
    upper: ExtReal<f64>,
    breaks: &[f64],
    rel_tol: f64,
) -> Result<QuadratureResult> {
    Integrator::with_rel_tol(rel_tol).integrate_with_breaks(f, lower, upper, breaks)
}

fn gaussian(l: f64, h: f64) -> f64 {
    let z = l / h;
    (-0.5 * z * z).exp() / ((2.0 * std::f64::consts::PI).sqrt() * h)
}

/// The part of `domain` within `KERNEL_CLIP` bandwidths of `x`; outside it the
/// kernel is below `1e-300` relative to its peak.
fn kernel_window(x: f64, h: f64, domain: &BoxInterval<f64>) -> Result<(ExtReal<f64>, ExtReal<f64>)> {
    if domain.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: domain.dim(),
        });
    }
    if !(h > 0.0 && h.is_finite()) || !x.is_finite() {
        return Err(invalid("h", "need finite x and h > 0"));
    }
    let lo = domain.lower()[0].max(ExtReal::of(x - KERNEL_CLIP * h));
    let hi = domain.upper()[0].min(ExtReal::of(x + KERNEL_CLIP * h));
    Ok((lo, hi.max(lo)))
}

/// `int K_h(x - z) (m(z) - m(x)) f(z) dz` over the domain: the population
/// numerator of the bias.
pub fn nw_numerator_integral<M: Fn(f64) -> f64, P: Fn(f64) -> f64>(
    m: M,
    pdf: P,
    x: f64,
    h: f64,
    domain: &BoxInterval<f64>,
) -> Result<QuadratureResult> {
    let (lo, hi) = kernel_window(x, h, domain)?;
    let mx = m(x);
    integrate_1d_with_breaks(|z| gaussian(x - z, h) * (m(z) - mx) * pdf(z), lo, hi, &[x], 1e-11)
}

/// `int K_h(x - z) f(z) dz` over the domain: the population denominator.
pub fn nw_denominator_integral<P: Fn(f64) -> f64>(
    pdf: P,
    x: f64,
    h: f64,
    domain: &BoxInterval<f64>,
) -> Result<QuadratureResult> {
    let (lo, hi) = kernel_window(x, h, domain)?;
    integrate_1d_with_breaks(|z| gaussian(x - z, h) * pdf(z), lo, hi, &[x], 1e-11)
}

/// Population bias `E[m_hat(x)] - m(x)` in the infinite-sample limit.
pub fn population_bias<M: Fn(f64) -> f64, P: Fn(f64) -> f64>(
    m: M,
    pdf: P,
    x: f64,
    h: f64,
    domain: &BoxInterval<f64>,
) -> Result<f64> {
    let num = nw_numerator_integral(&m, &pdf, x, h, domain)?;
    let den = nw_denominator_integral(&pdf, x, h, domain)?;
    Ok(num.value / den.value)
}
