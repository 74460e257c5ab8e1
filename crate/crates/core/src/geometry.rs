//! Open boxes over the extended reals and the per-query-point Lipschitz setup.
//!
//! The bounds consume boxes as non-negative offsets around the query point
//! `x`: the box `(x - minus, x + plus)`. [`BoxInterval`] holds absolute
//! coordinates; [`OffsetBox`] holds the offsets.

use crate::error::{invalid, Error, Result};
use crate::extmath::ExtReal;
use crate::scalar::Scalar;

/// Open d-dimensional interval `(lower_1, upper_1) x ... x (lower_d, upper_d)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxInterval<T> {
    lower: Vec<ExtReal<T>>,
    upper: Vec<ExtReal<T>>,
}

impl<T: Scalar> BoxInterval<T> {
    pub fn new(lower: Vec<ExtReal<T>>, upper: Vec<ExtReal<T>>) -> Result<Self> {
        if lower.is_empty() {
            return Err(invalid("box", "dimension must be at least 1"));
        }
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        if let Some(dim) = lower.iter().zip(&upper).position(|(lo, hi)| lo >= hi) {
            return Err(Error::EmptyInterval { dim });
        }
        Ok(Self { lower, upper })
    }

    /// Builds from IEEE floats, where `±inf` are the infinite endpoints.
    pub fn from_bounds(bounds: &[(T, T)]) -> Result<Self> {
        let lower = bounds.iter().map(|b| ExtReal::new(b.0)).collect::<Result<_>>()?;
        let upper = bounds.iter().map(|b| ExtReal::new(b.1)).collect::<Result<_>>()?;
        Self::new(lower, upper)
    }

    pub fn interval(lower: ExtReal<T>, upper: ExtReal<T>) -> Result<Self> {
        Self::new(vec![lower], vec![upper])
    }

    pub fn real_space(dim: usize) -> Result<Self> {
        Self::new(vec![ExtReal::neg_inf(); dim], vec![ExtReal::pos_inf(); dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[ExtReal<T>] {
        &self.lower
    }

    pub fn upper(&self) -> &[ExtReal<T>] {
        &self.upper
    }

    /// Open-interval membership.
    pub fn contains(&self, point: &[T]) -> Result<bool> {
        check_dim(self.dim(), point.len())?;
        Ok(point
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(&p, (lo, hi))| *lo < p && *hi > p))
    }

    /// Componentwise `self ⊆ other`.
    pub fn is_subset_of(&self, other: &Self) -> Result<bool> {
        check_dim(other.dim(), self.dim())?;
        Ok((0..self.dim()).all(|i| other.lower[i] <= self.lower[i] && self.upper[i] <= other.upper[i]))
    }

    pub fn intersect(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        let lower = self.lower.iter().zip(&other.lower).map(|(a, b)| (*a).max(*b)).collect();
        let upper = self.upper.iter().zip(&other.upper).map(|(a, b)| (*a).min(*b)).collect();
        Self::new(lower, upper)
    }

    /// The offsets `(x - lower, upper - x)`. `x` must lie inside the box.
    pub fn to_offsets(&self, x: &[T]) -> Result<OffsetBox<T>> {
        if !self.contains(x)? {
            return Err(Error::Containment(format!("query point {x:?} is not inside the box")));
        }
        let minus = self
            .lower
            .iter()
            .zip(x)
            .map(|(lo, &xi)| ExtReal::of(xi).try_sub(*lo))
            .collect::<Result<_>>()?;
        let plus = self
            .upper
            .iter()
            .zip(x)
            .map(|(hi, &xi)| hi.try_sub(ExtReal::of(xi)))
            .collect::<Result<_>>()?;
        Ok(OffsetBox { minus, plus })
    }
}

/// The box `(x - minus, x + plus)` described by non-negative offsets.
#[derive(Clone, Debug, PartialEq)]
pub struct OffsetBox<T> {
    minus: Vec<ExtReal<T>>,
    plus: Vec<ExtReal<T>>,
}

impl<T: Scalar> OffsetBox<T> {
    /// Offsets may be zero (a degenerate box) but never negative.
    pub fn new(minus: Vec<ExtReal<T>>, plus: Vec<ExtReal<T>>) -> Result<Self> {
        if minus.is_empty() {
            return Err(invalid("box", "dimension must be at least 1"));
        }
        check_dim(minus.len(), plus.len())?;
        if minus.iter().chain(&plus).any(|o| *o < T::zero()) {
            return Err(invalid("box", "offsets must be non-negative"));
        }
        Ok(Self { minus, plus })
    }

    /// The same offset on both sides of every dimension.
    pub fn symmetric(dim: usize, offset: ExtReal<T>) -> Result<Self> {
        Self::new(vec![offset; dim], vec![offset; dim])
    }

    pub fn unbounded(dim: usize) -> Result<Self> {
        Self::symmetric(dim, ExtReal::pos_inf())
    }

    pub fn dim(&self) -> usize {
        self.minus.len()
    }

    pub fn minus(&self) -> &[ExtReal<T>] {
        &self.minus
    }

    pub fn plus(&self) -> &[ExtReal<T>] {
        &self.plus
    }

    /// Signed integration limits `(-minus_i, plus_i)` of dimension `i`.
    pub fn limits(&self, i: usize) -> (ExtReal<T>, ExtReal<T>) {
        (-self.minus[i], self.plus[i])
    }

    pub fn is_subset_of(&self, other: &Self) -> Result<bool> {
        check_dim(other.dim(), self.dim())?;
        Ok((0..self.dim()).all(|i| self.minus[i] <= other.minus[i] && self.plus[i] <= other.plus[i]))
    }

    /// Every offset strictly positive, so the open box contains its center.
    pub fn contains_center(&self) -> bool {
        self.minus.iter().chain(&self.plus).all(|o| *o > T::zero())
    }

    pub fn to_absolute(&self, x: &[T]) -> Result<BoxInterval<T>> {
        check_dim(self.dim(), x.len())?;
        let lower = self.minus.iter().zip(x).map(|(m, &xi)| (-*m).shift(xi)).collect();
        let upper = self.plus.iter().zip(x).map(|(p, &xi)| p.shift(xi)).collect();
        BoxInterval::new(lower, upper)
    }
}

/// Bound on `|m(y) - m(z)|` over the domain, if one is known.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Oscillation<T> {
    Bounded(T),
    Unbounded,
}

impl<T: Scalar> Oscillation<T> {
    pub fn bounded(self) -> Option<T> {
        match self {
            Oscillation::Bounded(m) => Some(m),
            Oscillation::Unbounded => None,
        }
    }
}

/// Everything the bias bounds need to know about one query point.
///
/// Holds the weak Lipschitz constant `l_m` of the regression function on
/// `gamma`, the weak log-Lipschitz constant `l_f` of the design on `delta`,
/// the oscillation bound, and the nested boxes `gamma ⊆ delta ⊆ upsilon`
/// around `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct LipschitzSpec<T> {
    x: Vec<T>,
    l_m: T,
    l_f: T,
    oscillation: Oscillation<T>,
    upsilon: OffsetBox<T>,
    delta: OffsetBox<T>,
    gamma: OffsetBox<T>,
}

impl<T: Scalar> LipschitzSpec<T> {
    pub fn new(
        x: Vec<T>,
        l_m: T,
        l_f: T,
        oscillation: Oscillation<T>,
        upsilon: OffsetBox<T>,
        delta: OffsetBox<T>,
        gamma: OffsetBox<T>,
    ) -> Result<Self> {
        let d = x.len();
        if d == 0 {
            return Err(invalid("x", "query point must have at least one coordinate"));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(invalid("x", "query point must be finite"));
        }
        for b in [&upsilon, &delta, &gamma] {
            check_dim(d, b.dim())?;
        }
        if !(l_m >= T::zero() && l_m.is_finite()) {
            return Err(invalid("l_m", "must be finite and non-negative"));
        }
        if !(l_f >= T::zero() && l_f.is_finite()) {
            return Err(invalid("l_f", "must be finite and non-negative"));
        }
        if let Oscillation::Bounded(m) = oscillation {
            if !(m >= T::zero() && m.is_finite()) {
                return Err(invalid("oscillation", "must be finite and non-negative"));
            }
        }
        for (name, b) in [("upsilon", &upsilon), ("delta", &delta), ("gamma", &gamma)] {
            if !b.contains_center() {
                return Err(Error::Containment(format!("{name} offsets must be strictly positive")));
            }
        }
        if !gamma.is_subset_of(&delta)? {
            return Err(Error::Containment("gamma must be contained in delta".into()));
        }
        if !delta.is_subset_of(&upsilon)? {
            return Err(Error::Containment("delta must be contained in upsilon".into()));
        }
        Ok(Self {
            x,
            l_m,
            l_f,
            oscillation,
            upsilon,
            delta,
            gamma,
        })
    }

    /// Same as [`LipschitzSpec::new`] with the boxes in absolute coordinates.
    pub fn from_absolute(
        x: Vec<T>,
        l_m: T,
        l_f: T,
        oscillation: Oscillation<T>,
        upsilon: &BoxInterval<T>,
        delta: &BoxInterval<T>,
        gamma: &BoxInterval<T>,
    ) -> Result<Self> {
        let (u, d, g) = (upsilon.to_offsets(&x)?, delta.to_offsets(&x)?, gamma.to_offsets(&x)?);
        Self::new(x, l_m, l_f, oscillation, u, d, g)
    }

    /// All three boxes equal to `domain`.
    pub fn on_domain(x: Vec<T>, l_m: T, l_f: T, oscillation: Oscillation<T>, domain: &BoxInterval<T>) -> Result<Self> {
        let o = domain.to_offsets(&x)?;
        Self::new(x, l_m, l_f, oscillation, o.clone(), o.clone(), o)
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self) -> &[T] {
        &self.x
    }

    pub fn l_m(&self) -> T {
        self.l_m
    }

    pub fn l_f(&self) -> T {
        self.l_f
    }

    pub fn oscillation(&self) -> Oscillation<T> {
        self.oscillation
    }

    pub fn upsilon(&self) -> &OffsetBox<T> {
        &self.upsilon
    }

    pub fn delta(&self) -> &OffsetBox<T> {
        &self.delta
    }

    pub fn gamma(&self) -> &OffsetBox<T> {
        &self.gamma
    }

    pub fn with_l_m(mut self, l_m: T) -> Result<Self> {
        if !(l_m >= T::zero() && l_m.is_finite()) {
            return Err(invalid("l_m", "must be finite and non-negative"));
        }
        self.l_m = l_m;
        Ok(self)
    }

    pub fn with_oscillation(mut self, oscillation: Oscillation<T>) -> Self {
        self.oscillation = oscillation;
        self
    }

    pub fn boxes_coincide(&self) -> bool {
        self.upsilon == self.delta && self.delta == self.gamma
    }
}

/// The truncation box F where the linear cap `l_m |l|` is used instead of `M`:
/// `phi_i = min(gamma_i, M / l_m)` per side, or `gamma` itself when `l_m = 0`.
pub fn effective_phi_box<T: Scalar>(spec: &LipschitzSpec<T>) -> Result<OffsetBox<T>> {
    let m = spec.oscillation.bounded().ok_or(Error::UnboundedOscillation)?;
    if spec.l_m == T::zero() {
        return Ok(spec.gamma.clone());
    }
    let cap = ExtReal::new(m / spec.l_m)?;
    let minus = spec.gamma.minus.iter().map(|g| (*g).min(cap)).collect();
    let plus = spec.gamma.plus.iter().map(|g| (*g).min(cap)).collect();
    OffsetBox::new(minus, plus)
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
