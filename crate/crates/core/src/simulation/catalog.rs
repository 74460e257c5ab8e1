use std::f64::consts::LN_2;

use crate::geometry::Oscillation;

/// A regression function with analytic derivatives and its Lipschitz data.
#[derive(Clone, Copy, Debug)]
pub struct TestFunction {
    pub key: &'static str,
    pub label: &'static str,
    pub m: fn(f64) -> f64,
    pub m_prime: fn(f64) -> f64,
    pub m_double_prime: fn(f64) -> f64,
    /// Weak Lipschitz constant on `default_gamma`.
    pub l_m: f64,
    /// `sup |m(y) - m(z)|` over the whole line, when finite.
    pub oscillation: Oscillation<f64>,
    /// Absolute interval on which `l_m` holds.
    pub default_gamma: (f64, f64),
}

impl PartialEq for TestFunction {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
    }
}

fn sin5(x: f64) -> f64 {
    (5.0 * x).sin()
}
fn sin5_d1(x: f64) -> f64 {
    5.0 * (5.0 * x).cos()
}
fn sin5_d2(x: f64) -> f64 {
    -25.0 * (5.0 * x).sin()
}

fn ln(x: f64) -> f64 {
    x.ln()
}
fn ln_d1(x: f64) -> f64 {
    1.0 / x
}
fn ln_d2(x: f64) -> f64 {
    -1.0 / (x * x)
}

const STEEP: f64 = 60.0;

/// `log cosh(60 x) / 60` without overflowing `cosh`.
fn logcosh(x: f64) -> f64 {
    let t = (STEEP * x).abs();
    (t + (-2.0 * t).exp().ln_1p() - LN_2) / STEEP
}
fn logcosh_d1(x: f64) -> f64 {
    (STEEP * x).tanh()
}
fn logcosh_d2(x: f64) -> f64 {
    let s = 1.0 / (STEEP * x).cosh();
    STEEP * s * s
}

fn hyp(x: f64) -> f64 {
    x.hypot(1.0)
}
fn hyp_d1(x: f64) -> f64 {
    x / x.hypot(1.0)
}
fn hyp_d2(x: f64) -> f64 {
    let r = x.hypot(1.0);
    1.0 / (r * r * r)
}

const INF: f64 = f64::INFINITY;

const CATALOG: [TestFunction; 4] = [
    TestFunction {
        key: "sin5x",
        label: "sin(5x)",
        m: sin5,
        m_prime: sin5_d1,
        m_double_prime: sin5_d2,
        l_m: 5.0,
        oscillation: Oscillation::Bounded(2.0),
        default_gamma: (-INF, INF),
    },
    TestFunction {
        key: "log",
        label: "log(x)",
        m: ln,
        m_prime: ln_d1,
        m_double_prime: ln_d2,
        l_m: 1.0,
        oscillation: Oscillation::Unbounded,
        default_gamma: (1.0, INF),
    },
    TestFunction {
        key: "logcosh60",
        label: "log(cosh(60x))/60",
        m: logcosh,
        m_prime: logcosh_d1,
        m_double_prime: logcosh_d2,
        l_m: 1.0,
        oscillation: Oscillation::Unbounded,
        default_gamma: (-INF, INF),
    },
    TestFunction {
        key: "sqrt1px2",
        label: "sqrt(x^2+1)",
        m: hyp,
        m_prime: hyp_d1,
        m_double_prime: hyp_d2,
        l_m: 1.0,
        oscillation: Oscillation::Unbounded,
        default_gamma: (-INF, INF),
    },
];

/// The four regression functions of the experiment battery.
pub fn test_function_catalog() -> Vec<TestFunction> {
    CATALOG.to_vec()
}

pub fn test_function(key: &str) -> Option<TestFunction> {
    CATALOG.iter().find(|f| f.key == key).copied()
}

pub fn test_function_keys() -> Vec<&'static str> {
    CATALOG.iter().map(|f| f.key).collect()
}
