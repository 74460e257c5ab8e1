use std::cmp::Ordering;
use std::fmt;
use std::ops::Neg;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
enum Repr<T> {
    NegInf,
    Finite(T),
    PosInf,
}

/// A real number extended with `+inf` and `-inf`.
///
/// NaN is unrepresentable, so the order is total. Arithmetic that would
/// produce `inf - inf` returns [`Error::Indeterminate`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtReal<T>(Repr<T>);

impl<T: Scalar> ExtReal<T> {
    pub fn pos_inf() -> Self {
        ExtReal(Repr::PosInf)
    }

    pub fn neg_inf() -> Self {
        ExtReal(Repr::NegInf)
    }

    pub fn zero() -> Self {
        ExtReal(Repr::Finite(T::zero()))
    }

    /// Maps IEEE infinities onto the infinite variants; rejects NaN.
    pub fn new(value: T) -> Result<Self> {
        if value.is_nan() {
            Err(Error::NotANumber)
        } else if value == T::infinity() {
            Ok(Self::pos_inf())
        } else if value == T::neg_infinity() {
            Ok(Self::neg_inf())
        } else {
            Ok(ExtReal(Repr::Finite(value)))
        }
    }

    /// Panics on NaN. For literals and values already known to be valid.
    pub fn of(value: T) -> Self {
        Self::new(value).expect("ExtReal::of called with NaN")
    }

    pub fn finite(self) -> Option<T> {
        match self.0 {
            Repr::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self.0, Repr::Finite(_))
    }

    pub fn is_pos_inf(self) -> bool {
        matches!(self.0, Repr::PosInf)
    }

    pub fn is_neg_inf(self) -> bool {
        matches!(self.0, Repr::NegInf)
    }

    /// IEEE representation, with infinities mapped to `T::infinity()`.
    pub fn to_float(self) -> T {
        match self.0 {
            Repr::NegInf => T::neg_infinity(),
            Repr::Finite(v) => v,
            Repr::PosInf => T::infinity(),
        }
    }

    pub fn try_add(self, rhs: Self) -> Result<Self> {
        use Repr::*;
        match (self.0, rhs.0) {
            (Finite(a), Finite(b)) => Self::new(a + b),
            (PosInf, NegInf) | (NegInf, PosInf) => Err(Error::Indeterminate("inf + (-inf)")),
            (PosInf, _) | (_, PosInf) => Ok(Self::pos_inf()),
            (NegInf, _) | (_, NegInf) => Ok(Self::neg_inf()),
        }
    }

    pub fn try_sub(self, rhs: Self) -> Result<Self> {
        match (self.0, rhs.0) {
            (Repr::PosInf, Repr::PosInf) | (Repr::NegInf, Repr::NegInf) => Err(Error::Indeterminate("inf - inf")),
            _ => self.try_add(-rhs),
        }
    }

    /// Adds a finite real. Never fails.
    pub fn shift(self, by: T) -> Self {
        match self.0 {
            Repr::Finite(v) => Self::of(v + by),
            _ => self,
        }
    }

    /// Multiplies by a finite real; `0 * inf` is indeterminate.
    pub fn try_scale(self, by: T) -> Result<Self> {
        match self.0 {
            Repr::Finite(v) => Self::new(v * by),
            _ if by == T::zero() => Err(Error::Indeterminate("0 * inf")),
            _ if by > T::zero() => Ok(self),
            _ => Ok(-self),
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl<T: Scalar> Neg for ExtReal<T> {
    type Output = Self;

    fn neg(self) -> Self {
        match self.0 {
            Repr::NegInf => Self::pos_inf(),
            Repr::Finite(v) => ExtReal(Repr::Finite(-v)),
            Repr::PosInf => Self::neg_inf(),
        }
    }
}

impl<T: Scalar> Eq for ExtReal<T> {}

impl<T: Scalar> PartialOrd for ExtReal<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Scalar> Ord for ExtReal<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        use Repr::*;
        match (self.0, other.0) {
            (NegInf, NegInf) | (PosInf, PosInf) => Ordering::Equal,
            (NegInf, _) | (_, PosInf) => Ordering::Less,
            (_, NegInf) | (PosInf, _) => Ordering::Greater,
            // NaN is excluded at construction.
            (Finite(a), Finite(b)) => a.partial_cmp(&b).unwrap_or(Ordering::Equal),
        }
    }
}

impl<T: Scalar> PartialEq<T> for ExtReal<T> {
    fn eq(&self, other: &T) -> bool {
        self.finite() == Some(*other)
    }
}

impl<T: Scalar> PartialOrd<T> for ExtReal<T> {
    fn partial_cmp(&self, other: &T) -> Option<Ordering> {
        ExtReal::new(*other).ok().map(|o| self.cmp(&o))
    }
}

impl<T: Scalar> fmt::Display for ExtReal<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Repr::NegInf => f.write_str("-inf"),
            Repr::Finite(v) => fmt::Display::fmt(&v, f),
            Repr::PosInf => f.write_str("+inf"),
        }
    }
}
