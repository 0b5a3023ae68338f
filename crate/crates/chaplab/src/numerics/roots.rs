//! Scalar root bracketing and one-dimensional minimization.

const MAX_BISECT: usize = 200;

/// Bisect a continuous function with a sign change on `[a, b]`.
///
/// Returns the midpoint of the final bracket, or `None` when the endpoint
/// values have equal sign.
pub fn bisect<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> Option<f64> {
    let (mut lo, mut hi) = (a, b);
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    for _ in 0..MAX_BISECT {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            return Some(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Bisect a boolean predicate transition: `pred(a) != pred(b)` is required.
///
/// Converges to the boundary point between the two predicate regions, which
/// locates plateau knots exactly even when the function itself has a root of
/// even order there.
pub fn bisect_predicate<P: Fn(f64) -> bool>(pred: P, a: f64, b: f64) -> Option<f64> {
    let pa = pred(a);
    if pa == pred(b) {
        return None;
    }
    let (mut lo, mut hi) = (a, b);
    for _ in 0..MAX_BISECT {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            return Some(mid);
        }
        if pred(mid) == pa {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Golden-section minimization of a unimodal function on `[a, b]`.
pub fn golden_section_min<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, xtol: f64) -> f64 {
    const INVPHI: f64 = 0.618_033_988_749_894_8;
    let (mut lo, mut hi) = (a, b);
    let mut c = hi - INVPHI * (hi - lo);
    let mut d = lo + INVPHI * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    while hi - lo > xtol {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INVPHI * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INVPHI * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn bisect_simple_root() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0).unwrap();
        assert_abs_diff_eq!(r, std::f64::consts::SQRT_2, epsilon = 1e-14);
    }

    #[test]
    fn bisect_no_sign_change() {
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0).is_none());
    }

    #[test]
    fn predicate_finds_plateau_knot() {
        // quartic knot at 2: f < 0 left of it, f == 0 on [2, 3]
        let f = |x: f64| if x < 2.0 { -(2.0 - x).powi(4) } else { 0.0 };
        let knot = bisect_predicate(|x| f(x) < 0.0, 1.0, 2.5).unwrap();
        assert_abs_diff_eq!(knot, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn golden_section_quadratic() {
        let m = golden_section_min(|x| (x - 0.3).powi(2), -1.0, 1.0, 1e-12);
        assert_abs_diff_eq!(m, 0.3, epsilon = 1e-9);
    }
}
