use crate::scalar::Scalar;

/// Correctly rounded sum of the inputs (Shewchuk's partials algorithm, as in
/// Python's `math.fsum`).
///
/// The result depends only on the multiset of inputs, never on their order.
/// Falls back to plain summation if any input or partial is non-finite.
pub fn exact_sum<T: Scalar, I: IntoIterator<Item = T>>(values: I) -> T {
    let mut partials: Vec<T> = Vec::new();
    let mut naive = T::zero();
    for mut x in values {
        naive += x;
        if !x.is_finite() {
            continue;
        }
        let mut i = 0;
        for j in 0..partials.len() {
            let mut y = partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != T::zero() {
                partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        partials.truncate(i);
        partials.push(x);
    }
    if !naive.is_finite() || partials.iter().any(|p| !p.is_finite()) {
        return naive;
    }

    let Some(mut n) = partials.len().checked_sub(1) else {
        return T::zero();
    };
    let mut hi = partials[n];
    let mut lo = T::zero();
    while n > 0 {
        let x = hi;
        n -= 1;
        let y = partials[n];
        hi = x + y;
        let yr = hi - x;
        lo = y - yr;
        if lo != T::zero() {
            break;
        }
    }
    // round-half-even across the remaining partials
    if n > 0 && ((lo < T::zero() && partials[n - 1] < T::zero()) || (lo > T::zero() && partials[n - 1] > T::zero())) {
        let y = lo * T::lit(2.0);
        let x = hi + y;
        if y == x - hi {
            hi = x;
        }
    }
    hi
}
