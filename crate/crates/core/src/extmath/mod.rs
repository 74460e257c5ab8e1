//! Special functions and extended-real helpers shared by the closed-form integrals.

mod erf;
mod extreal;
mod sum;

pub use erf::{erf, erfc, erfcx};
pub use extreal::ExtReal;
pub use sum::exact_sum;

use crate::scalar::Scalar;

/// `lim_{g -> l} exp(-g^2 / (2 h^2) - g L)`.
///
/// Zero at either infinity since the quadratic term dominates.
pub fn phi_limit<T: Scalar>(l: ExtReal<T>, slope: T, h: T) -> T {
    match l.finite() {
        Some(g) => {
            let r = g / h;
            (-r * r * T::lit(0.5) - g * slope).exp()
        }
        None => T::zero(),
    }
}

/// `lim_{g -> l} erf((g + h^2 L) / (h sqrt 2))`.
pub fn varphi_limit<T: Scalar>(l: ExtReal<T>, slope: T, h: T) -> T {
    match l.finite() {
        Some(g) => erf((g / h + h * slope) / T::SQRT_2()),
        None if l.is_pos_inf() => T::one(),
        None => -T::one(),
    }
}
