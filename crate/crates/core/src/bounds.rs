//! Closed-form bias bounds and the Rosenblatt asymptotic estimate.
//!
//! Every bound is a ratio of a numerator over a denominator, each assembled
//! from per-dimension Gaussian integrals over the boxes of a
//! [`LipschitzSpec`]. The offsets of a box around `x` turn into the signed
//! integration limits `(-minus_i, plus_i)` of the kernel offset `l = z - x`.
//!
//! With `K_h` the Gaussian kernel and `|l|` the L1 norm, the integrals are
//!
//! * [`psi`]: `2 * int exp(-l^2/(2h^2) - l L) / sqrt(2 pi h^2) dl`
//! * [`zeta`]: `2 * int exp(-l^2/(2h^2) + |l| L) / sqrt(2 pi h^2) dl`
//! * [`moment_integral_signed`]: `int K_h(l) exp(-l L_f) l L_m dl`
//! * [`moment_integral_abs`]: `int K_h(l) exp(|l| L_f) |l| L_m dl`
//!
//! The exponential prefactor `exp(L^2 h^2 / 2)` of the erf form overflows for
//! moderate `L h`, so [`psi`] is evaluated through `erfcx`.

use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::estimator::Bandwidth;
use crate::extmath::{erfcx, phi_limit, ExtReal};
use crate::geometry::{effective_phi_box, LipschitzSpec, OffsetBox, Oscillation};
use crate::scalar::Scalar;

fn check_h<T: Scalar>(h: T) -> Result<()> {
    if h > T::zero() && h.is_finite() {
        Ok(())
    } else {
        Err(invalid("h", "must be finite and > 0"))
    }
}

/// `u(tau) = (tau + h^2 L) / (h sqrt 2)`, the erf argument.
fn erf_arg<T: Scalar>(tau: ExtReal<T>, slope: T, h: T) -> ExtReal<T> {
    match tau.finite() {
        Some(t) => ExtReal::of((t / h + h * slope) / T::SQRT_2()),
        None => tau,
    }
}

/// `exp(L^2 h^2 / 2) * erfc(u(tau))`, valid where `u(tau) >= 0`.
fn upper_tail<T: Scalar>(tau: ExtReal<T>, slope: T, h: T) -> T {
    match erf_arg(tau, slope, h).finite() {
        Some(u) => erfcx(u) * phi_limit(tau, slope, h),
        None => T::zero(),
    }
}

/// `exp(L^2 h^2 / 2) * erfc(-u(tau))`, valid where `u(tau) <= 0`.
fn lower_tail<T: Scalar>(tau: ExtReal<T>, slope: T, h: T) -> T {
    match erf_arg(tau, slope, h).finite() {
        Some(u) => erfcx(-u) * phi_limit(tau, slope, h),
        None => T::zero(),
    }
}

/// [`psi`] without argument checks; zero on an empty interval.
fn psi_raw<T: Scalar>(slope: T, h: T, lo: ExtReal<T>, hi: ExtReal<T>) -> T {
    if lo >= hi {
        return T::zero();
    }
    let u_lo = erf_arg(lo, slope, h);
    let u_hi = erf_arg(hi, slope, h);
    let v = if u_lo >= T::zero() {
        upper_tail(lo, slope, h) - upper_tail(hi, slope, h)
    } else if u_hi <= T::zero() {
        lower_tail(hi, slope, h) - lower_tail(lo, slope, h)
    } else {
        let peak = (slope * slope * h * h * T::lit(0.5)).exp();
        T::lit(2.0) * peak - lower_tail(lo, slope, h) - upper_tail(hi, slope, h)
    };
    v.max(T::zero())
}

/// `Psi(L, h, tau-, tau+) = exp(L^2 h^2 / 2) (erf(u(tau+)) - erf(u(tau-)))`,
/// twice the kernel integral of `exp(-l L)` over `(tau-, tau+)`.
pub fn psi<T: Scalar>(l: T, h: T, tau_minus: ExtReal<T>, tau_plus: ExtReal<T>) -> Result<T> {
    check_h(h)?;
    if !l.is_finite() {
        return Err(invalid("L", "must be finite"));
    }
    if tau_minus >= tau_plus {
        return Err(Error::EmptyInterval { dim: 0 });
    }
    Ok(psi_raw(l, h, tau_minus, tau_plus))
}

fn check_straddles_zero<T: Scalar>(tau_minus: ExtReal<T>, tau_plus: ExtReal<T>) -> Result<()> {
    if tau_minus <= T::zero() && tau_plus >= T::zero() {
        Ok(())
    } else {
        Err(invalid("tau", "need tau- <= 0 <= tau+"))
    }
}

fn zeta_raw<T: Scalar>(h: T, lo: ExtReal<T>, hi: ExtReal<T>, l_f: T) -> T {
    psi_raw(-l_f, h, ExtReal::zero(), hi) + psi_raw(l_f, h, lo, ExtReal::zero())
}

/// `zeta(h, tau-, tau+) = Psi(-L_f, h, 0, tau+) + Psi(L_f, h, tau-, 0)`,
/// twice the kernel integral of `exp(|l| L_f)` over `(tau-, tau+)`.
///
/// A negative `l_f` gives the integral of the decaying weight `exp(-|l| |L_f|)`.
/// Either endpoint may be zero, which leaves one half of the integral.
pub fn zeta<T: Scalar>(h: T, tau_minus: ExtReal<T>, tau_plus: ExtReal<T>, l_f: T) -> Result<T> {
    check_h(h)?;
    if !l_f.is_finite() {
        return Err(invalid("L_f", "must be finite"));
    }
    check_straddles_zero(tau_minus, tau_plus)?;
    Ok(zeta_raw(h, tau_minus, tau_plus, l_f))
}

fn moment_signed_raw<T: Scalar>(l_m: T, l_f: T, h: T, lo: ExtReal<T>, hi: ExtReal<T>) -> T {
    if lo >= hi {
        return T::zero();
    }
    let scale = l_m * h / (T::lit(2.0) * T::PI()).sqrt();
    scale * (phi_limit(lo, l_f, h) - phi_limit(hi, l_f, h)) - l_m * l_f * h * h * T::lit(0.5) * psi_raw(l_f, h, lo, hi)
}

/// `int_{tau-}^{tau+} K_h(l) exp(-l L_f) l L_m dl` in closed form.
pub fn moment_integral_signed<T: Scalar>(
    l_m: T,
    l_f: T,
    h: T,
    tau_minus: ExtReal<T>,
    tau_plus: ExtReal<T>,
) -> Result<T> {
    check_h(h)?;
    if !(l_m.is_finite() && l_f.is_finite()) {
        return Err(invalid("L", "constants must be finite"));
    }
    if tau_minus >= tau_plus {
        return Err(Error::EmptyInterval { dim: 0 });
    }
    Ok(moment_signed_raw(l_m, l_f, h, tau_minus, tau_plus))
}

fn moment_abs_raw<T: Scalar>(l_m: T, l_f: T, h: T, lo: ExtReal<T>, hi: ExtReal<T>) -> T {
    let scale = l_m * h / (T::lit(2.0) * T::PI()).sqrt();
    let edge = T::lit(2.0) - phi_limit(hi, -l_f, h) - phi_limit(lo, l_f, h);
    (scale * edge + l_m * l_f * h * h * T::lit(0.5) * zeta_raw(h, lo, hi, l_f)).max(T::zero())
}

/// `int_{tau-}^{tau+} K_h(l) exp(|l| L_f) |l| L_m dl` in closed form, built
/// from the two signed halves on either side of zero.
pub fn moment_integral_abs<T: Scalar>(l_m: T, l_f: T, h: T, tau_minus: ExtReal<T>, tau_plus: ExtReal<T>) -> Result<T> {
    check_h(h)?;
    if !(l_m >= T::zero() && l_m.is_finite() && l_f.is_finite()) {
        return Err(invalid("L", "need finite constants with L_m >= 0"));
    }
    check_straddles_zero(tau_minus, tau_plus)?;
    Ok(moment_abs_raw(l_m, l_f, h, tau_minus, tau_plus))
}

/// A query point's Lipschitz setup together with the kernel bandwidths.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundInput<T> {
    spec: LipschitzSpec<T>,
    h: Bandwidth<T>,
}

impl<T: Scalar> BoundInput<T> {
    pub fn new(spec: LipschitzSpec<T>, h: Bandwidth<T>) -> Result<Self> {
        if spec.dim() != h.dim() {
            return Err(Error::DimensionMismatch {
                expected: spec.dim(),
                got: h.dim(),
            });
        }
        Ok(Self { spec, h })
    }

    pub fn spec(&self) -> &LipschitzSpec<T> {
        &self.spec
    }

    pub fn bandwidth(&self) -> &Bandwidth<T> {
        &self.h
    }
}

/// `prod_i zeta(h_i, box_i, slope) / 2`, the kernel integral of `exp(slope |l|_1)`.
fn zeta_product<T: Scalar>(h: &[T], b: &OffsetBox<T>, slope: T) -> T {
    (0..h.len())
        .map(|i| {
            let (lo, hi) = b.limits(i);
            T::lit(0.5) * zeta_raw(h[i], lo, hi, slope)
        })
        .fold(T::one(), |a, v| a * v)
}

/// `prod_i Psi(0, h_i, box_i) / 2`, the kernel mass of the box.
fn mass<T: Scalar>(h: &[T], b: &OffsetBox<T>) -> T {
    (0..h.len())
        .map(|i| {
            let (lo, hi) = b.limits(i);
            T::lit(0.5) * psi_raw(T::zero(), h[i], lo, hi)
        })
        .fold(T::one(), |a, v| a * v)
}

/// `int_B K_h(l) exp(L_f |l|_1) L_m |l|_1 dl`, factored dimension by dimension.
fn lipschitz_part<T: Scalar>(l_m: T, l_f: T, h: &[T], b: &OffsetBox<T>) -> T {
    let d = h.len();
    let halves: Vec<T> = (0..d)
        .map(|i| {
            let (lo, hi) = b.limits(i);
            T::lit(0.5) * zeta_raw(h[i], lo, hi, l_f)
        })
        .collect();
    (0..d)
        .map(|k| {
            let (lo, hi) = b.limits(k);
            let others = (0..d).filter(|&i| i != k).fold(T::one(), |a, i| a * halves[i]);
            others * moment_abs_raw(l_m, l_f, h[k], lo, hi)
        })
        .fold(T::zero(), |a, v| a + v)
}

/// The pieces of the bounded-regression bound, normalized by `f(x)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundedTerms<T> {
    /// `int_F K_h exp(L_f |l|) L_m |l|`, where the linear cap applies.
    pub lipschitz: T,
    /// `M int_{D \ F} K_h exp(L_f |l|)`, where the constant cap applies.
    pub capped: T,
    /// `M int_{Upsilon \ D} K_h`, using `f <= f(x)` outside D.
    pub outside: T,
    /// Lower bound `int_D K_h exp(-L_f |l|)` on the denominator.
    pub denominator: T,
}

impl<T: Scalar> BoundedTerms<T> {
    pub fn numerator(&self) -> T {
        self.lipschitz + self.capped + self.outside
    }

    pub fn bound(&self) -> T {
        self.numerator() / self.denominator
    }
}

/// The pieces of the unbounded-regression bound, normalized by `f(x)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnboundedTerms<T> {
    pub numerator: T,
    pub denominator: T,
}

impl<T: Scalar> UnboundedTerms<T> {
    pub fn bound(&self) -> T {
        self.numerator / self.denominator
    }
}

pub fn bounded_terms<T: Scalar>(input: &BoundInput<T>) -> Result<BoundedTerms<T>> {
    let s = &input.spec;
    let h = input.h.as_slice();
    let m = s.oscillation().bounded().ok_or(Error::UnboundedOscillation)?;
    let f_box = effective_phi_box(s)?;
    let l_f = s.l_f();

    let lipschitz = lipschitz_part(s.l_m(), l_f, h, &f_box);
    let capped = m * (zeta_product(h, s.delta(), l_f) - zeta_product(h, &f_box, l_f)).max(T::zero());
    let outside = m * (mass(h, s.upsilon()) - mass(h, s.delta())).max(T::zero());
    let denominator = zeta_product(h, s.delta(), -l_f);
    Ok(BoundedTerms {
        lipschitz,
        capped,
        outside,
        denominator,
    })
}

/// Bias bound for a regression function with finite oscillation `M`.
///
/// Splits the domain into the truncation box F (linear cap `L_m |l|`), the
/// rest of D (constant cap `M`, design controlled by `L_f`), and the rest of
/// the domain (cap `M`, design below `f(x)`).
pub fn bias_bound_bounded<T: Scalar>(input: &BoundInput<T>) -> Result<T> {
    Ok(bounded_terms(input)?.bound())
}

pub fn unbounded_terms<T: Scalar>(input: &BoundInput<T>) -> Result<UnboundedTerms<T>> {
    let s = &input.spec;
    if !s.boxes_coincide() {
        return Err(Error::BoxesNotEqual);
    }
    let h = input.h.as_slice();
    let u = s.upsilon();
    Ok(UnboundedTerms {
        numerator: lipschitz_part(s.l_m(), s.l_f(), h, u),
        denominator: zeta_product(h, u, -s.l_f()),
    })
}

/// Bias bound that needs no oscillation bound, for `Upsilon == D == G`.
///
/// A finite `M` in the spec is ignored.
pub fn bias_bound_unbounded<T: Scalar>(input: &BoundInput<T>) -> Result<T> {
    Ok(unbounded_terms(input)?.bound())
}

/// Whichever bound the spec supports: bounded when `M` is finite.
pub fn bias_bound<T: Scalar>(input: &BoundInput<T>) -> Result<T> {
    match input.spec.oscillation() {
        Oscillation::Bounded(_) => bias_bound_bounded(input),
        Oscillation::Unbounded => bias_bound_unbounded(input),
    }
}

/// Derivatives of the regression function and design needed by the
/// asymptotic estimate, evaluated by the caller.
pub struct RosenblattInput<'a, T> {
    pub m_prime: &'a dyn Fn(T) -> T,
    pub m_double_prime: &'a dyn Fn(T) -> T,
    pub f: &'a dyn Fn(T) -> T,
    pub f_prime: &'a dyn Fn(T) -> T,
    pub x: T,
    pub h: T,
}

/// `h^2 (m''(x) / 2 + m'(x) f'(x) / f(x))`, the leading bias term for a
/// kernel with unit second moment.
pub fn rosenblatt_signed<T: Scalar>(input: &RosenblattInput<'_, T>) -> Result<T> {
    check_h(input.h)?;
    if !input.x.is_finite() {
        return Err(invalid("x", "must be finite"));
    }
    let fx = (input.f)(input.x);
    if fx.is_nan() || fx <= T::zero() {
        return Err(invalid("f", "design density must be positive at x"));
    }
    let x = input.x;
    let h2 = input.h * input.h;
    Ok(h2 * (T::lit(0.5) * (input.m_double_prime)(x) + (input.m_prime)(x) * (input.f_prime)(x) / fx))
}

pub fn rosenblatt_estimate<T: Scalar>(input: &RosenblattInput<'_, T>) -> Result<T> {
    rosenblatt_signed(input).map(Float::abs)
}
