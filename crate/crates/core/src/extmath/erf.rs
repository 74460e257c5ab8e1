#![allow(clippy::excessive_precision)]

//! Error function family on real arguments.
//!
//! `erf` and `erfc` follow the FreeBSD msun `s_erf.c` rational approximations
//! (Sun Microsystems, 1993; freely redistributable with this notice), carried
//! over to any [`Scalar`]. `erfcx` reuses the same rationals: on `[1.25, 28)` the
//! msun form `erfc(x) = exp(-x^2 - 0.5625 + R/S) / x` gives `erfcx` without
//! ever forming `exp(-x^2)`. Beyond 28 the asymptotic series is used.

use crate::scalar::Scalar;

const ERX: f64 = 8.45062911510467529297e-01;
const EFX: f64 = 1.28379167095512586316e-01;

// erf on [0, 0.84375]
const PP: [f64; 5] = [
    1.28379167095512558561e-01,
    -3.25042107247001499370e-01,
    -2.84817495755985104766e-02,
    -5.77027029648944159157e-03,
    -2.37630166566501626084e-05,
];
const QQ: [f64; 6] = [
    1.0,
    3.97917223959155352819e-01,
    6.50222499887672944485e-02,
    5.08130628187576562776e-03,
    1.32494738004321644526e-04,
    -3.96022827877536812320e-06,
];

// erf on [0.84375, 1.25]
const PA: [f64; 7] = [
    -2.36211856075265944077e-03,
    4.14856118683748331666e-01,
    -3.72207876035701323847e-01,
    3.18346619901161753674e-01,
    -1.10894694282396677476e-01,
    3.54783043256182359371e-02,
    -2.16637559486879084300e-03,
];
const QA: [f64; 7] = [
    1.0,
    1.06420880400844228286e-01,
    5.40397917702171048937e-01,
    7.18286544141962662868e-02,
    1.26171219808761642112e-01,
    1.36370839120290507362e-02,
    1.19844998467991074170e-02,
];

// erfc on [1.25, 1/0.35]
const RA: [f64; 8] = [
    -9.86494403484714822705e-03,
    -6.93858572707181764372e-01,
    -1.05586262253232909814e+01,
    -6.23753324503260060396e+01,
    -1.62396669462573470355e+02,
    -1.84605092906711035994e+02,
    -8.12874355063065934246e+01,
    -9.81432934416914548592e+00,
];
const SA: [f64; 9] = [
    1.0,
    1.96512716674392571292e+01,
    1.37657754143519042600e+02,
    4.34565877475229228821e+02,
    6.45387271733267880336e+02,
    4.29008140027567833386e+02,
    1.08635005541779435134e+02,
    6.57024977031928170135e+00,
    -6.04244152148580987438e-02,
];

// erfc on [1/0.35, 28]
const RB: [f64; 7] = [
    -9.86494292470009928597e-03,
    -7.99283237680523006574e-01,
    -1.77579549177547519889e+01,
    -1.60636384855821916062e+02,
    -6.37566443368389627722e+02,
    -1.02509513161107724954e+03,
    -4.83519191608651397019e+02,
];
const SB: [f64; 8] = [
    1.0,
    3.03380607434824582924e+01,
    3.25792512996573918826e+02,
    1.53672958608443695994e+03,
    3.19985821950859553908e+03,
    2.55305040643316442583e+03,
    4.74528541206955367215e+02,
    -2.24409524465858183362e+01,
];

const SMALL: f64 = 0.84375;
const MID: f64 = 1.25;
const TAIL_SPLIT: f64 = 1.0 / 0.35;
const ASYMPTOTIC: f64 = 28.0;

fn horner<T: Scalar>(x: T, coeffs: &[f64]) -> T {
    coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * x + T::lit(c))
}

/// `(erf(x) - x) / x` on `|x| < 0.84375`.
fn small_ratio<T: Scalar>(x: T) -> T {
    let z = x * x;
    horner(z, &PP) / horner(z, &QQ)
}

/// `erf(1 + s) - ERX` on `|x|` in `[0.84375, 1.25)`.
fn mid_ratio<T: Scalar>(ax: T) -> T {
    let s = ax - T::one();
    horner(s, &PA) / horner(s, &QA)
}

/// `R/S` such that `erfc(x) = exp(-x^2 - 0.5625 + R/S) / x` on `[1.25, 28)`.
fn tail_exponent<T: Scalar>(ax: T) -> T {
    let s = T::one() / (ax * ax);
    if ax < T::lit(TAIL_SPLIT) {
        horner(s, &RA) / horner(s, &SA)
    } else {
        horner(s, &RB) / horner(s, &SB)
    }
}

/// High half of a Veltkamp split, so that `hi * hi` is exact.
fn split_high<T: Scalar>(x: T) -> T {
    let factor = if T::epsilon() < T::lit(1e-10) {
        T::lit(134_217_729.0) // 2^27 + 1
    } else {
        T::lit(4097.0) // 2^12 + 1
    };
    let c = factor * x;
    c - (c - x)
}

/// `exp(-x^2)` with the argument rounding error compensated.
fn exp_neg_sq<T: Scalar>(x: T) -> T {
    let hi = split_high(x);
    (-hi * hi).exp() * ((hi - x) * (hi + x)).exp()
}

/// `erfc(ax)` for `ax` in `[0.84375, 28)`.
fn erfc_positive<T: Scalar>(ax: T) -> T {
    if ax < T::lit(MID) {
        return T::one() - T::lit(ERX) - mid_ratio(ax);
    }
    let z = split_high(ax);
    (-z * z - T::lit(0.5625)).exp() * ((z - ax) * (z + ax) + tail_exponent(ax)).exp() / ax
}

/// Asymptotic `erfcx` for `x >= 28`; the truncation error is far below one ulp there.
fn erfcx_asymptotic<T: Scalar>(x: T) -> T {
    let inv2x2 = T::one() / (T::lit(2.0) * x * x);
    let mut term = T::one();
    let mut sum = T::one();
    for k in 1..10 {
        term = -term * T::from_count(2 * k - 1) * inv2x2;
        sum += term;
    }
    sum / (x * T::PI().sqrt())
}

/// The error function.
pub fn erf<T: Scalar>(x: T) -> T {
    if x.is_nan() {
        return x;
    }
    if x.is_infinite() {
        return x.signum();
    }
    let ax = x.abs();
    if ax < T::lit(SMALL) {
        if ax < T::lit(3.7252902984e-09) {
            return x + x * T::lit(EFX);
        }
        return x + x * small_ratio(x);
    }
    let y = if ax < T::lit(MID) {
        T::lit(ERX) + mid_ratio(ax)
    } else if ax < T::lit(6.0) {
        T::one() - erfc_positive(ax)
    } else {
        T::one()
    };
    y.copysign(x)
}

/// The complementary error function `1 - erf(x)`, accurate in the upper tail.
pub fn erfc<T: Scalar>(x: T) -> T {
    if x.is_nan() {
        return x;
    }
    if x == T::infinity() {
        return T::zero();
    }
    if x == T::neg_infinity() {
        return T::lit(2.0);
    }
    let ax = x.abs();
    if ax < T::lit(SMALL) {
        let y = small_ratio(x);
        if x < T::lit(0.25) {
            return T::one() - (x + x * y);
        }
        return T::lit(0.5) - (x - T::lit(0.5) + x * y);
    }
    if ax < T::lit(ASYMPTOTIC) {
        let tail = erfc_positive(ax);
        return if x < T::zero() { T::lit(2.0) - tail } else { tail };
    }
    if x < T::zero() {
        T::lit(2.0)
    } else {
        erfcx_asymptotic(ax) * exp_neg_sq(ax)
    }
}

/// The scaled complementary error function `exp(x^2) * erfc(x)`.
///
/// Finite and accurate for every non-negative argument. For very negative
/// arguments the true value exceeds the float range and `+inf` is returned.
pub fn erfcx<T: Scalar>(x: T) -> T {
    if x.is_nan() {
        return x;
    }
    if x == T::infinity() {
        return T::zero();
    }
    if x < T::zero() {
        if x == T::neg_infinity() {
            return T::infinity();
        }
        let ax = -x;
        return T::lit(2.0) / exp_neg_sq(ax) - erfcx(ax);
    }
    if x < T::lit(SMALL) {
        return (x * x).exp() * erfc(x);
    }
    if x < T::lit(MID) {
        return (x * x).exp() * (T::one() - T::lit(ERX) - mid_ratio(x));
    }
    if x < T::lit(ASYMPTOTIC) {
        return (tail_exponent(x) - T::lit(0.5625)).exp() / x;
    }
    erfcx_asymptotic(x)
}
