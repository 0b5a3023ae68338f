//! Adaptive Gauss-Kronrod quadrature (7-15 pair).
//!
//! The integrands arising from the characteristic map are smooth, so a
//! bisection-adaptive G7/K15 rule with an absolute-error budget is enough.
//! The tolerance is absolute by design: near-plateau initial data make the
//! integrands nearly constant and small, and a relative criterion would
//! stall there.

use crate::error::{Error, Result};

/// Kronrod abscissae (positive half) for the 7-15 pair.
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];

/// Kronrod weights matching `XGK`.
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];

/// Gauss weights of the embedded 7-point rule (nodes XGK[1], XGK[3], XGK[5], XGK[7]).
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

const MAX_PANELS: usize = 4096;

/// One Gauss-Kronrod panel. Returns (kronrod, |kronrod - gauss|, int |f|).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut resabs = fc.abs() * WGK[7];
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        kronrod += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    kronrod *= h;
    gauss *= h;
    resabs *= h.abs();
    (kronrod, (kronrod - gauss).abs(), resabs)
}

/// Integrate `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Worklist-adaptive with a global error budget: the panel with the worst
/// error estimate is bisected until the estimates sum below `tol` or its
/// roundoff floor. The global budget (rather than per-level tolerance
/// halving) is what lets integrands with noise-limited evaluations — e.g.
/// an inner adaptive integral — terminate.
///
/// Orientation is honored: `a > b` integrates backwards with the usual sign.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let tol = tol.max(1e-15);

    struct Panel {
        a: f64,
        b: f64,
        val: f64,
        err: f64,
        resabs: f64,
    }
    let make = |a: f64, b: f64| {
        let (val, err, resabs) = gk15(&f, a, b);
        Panel {
            a,
            b,
            val,
            err,
            resabs,
        }
    };
    let mut panels = vec![make(lo, hi)];
    loop {
        let mut total_err = 0.0;
        let mut total_resabs = 0.0;
        let mut worst = 0usize;
        for (i, p) in panels.iter().enumerate() {
            total_err += p.err;
            total_resabs += p.resabs;
            if !(p.err <= panels[worst].err) {
                worst = i;
            }
        }
        let floor = 50.0 * f64::EPSILON * total_resabs;
        if total_err <= tol.max(floor) {
            let v: f64 = panels.iter().map(|p| p.val).sum();
            return Ok(sign * v);
        }
        if panels.len() >= MAX_PANELS {
            let p = &panels[worst];
            return Err(Error::QuadratureNonConvergence {
                a: p.a,
                b: p.b,
                tol,
            });
        }
        let Panel { a, b, .. } = panels[worst];
        let m = 0.5 * (a + b);
        if m == a || m == b {
            // cannot split further; treat the estimate as converged
            panels[worst].err = 0.0;
            continue;
        }
        panels[worst] = make(a, m);
        panels.push(make(m, b));
    }
}

/// Single non-adaptive K15 panel; used for cumulative tables where the panel
/// width is already chosen so the error estimate is at roundoff.
pub fn panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    if a == b {
        return (0.0, 0.0);
    }
    let (val, err, _) = gk15(f, a, b);
    (val, err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn polynomial_exact() {
        let v = integrate(|x| x * x, 0.0, 1.0, 1e-14).unwrap();
        assert_abs_diff_eq!(v, 1.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn arctan_kernel() {
        // d/dx arctan(x-1) oracle: integral over [0,2] is pi/2.
        let v = integrate(|x| 1.0 / ((x - 1.0) * (x - 1.0) + 1.0), 0.0, 2.0, 1e-13).unwrap();
        assert_abs_diff_eq!(v, std::f64::consts::FRAC_PI_2, epsilon = 1e-13);
    }

    #[test]
    fn reversed_orientation_flips_sign() {
        let a = integrate(|x| x.exp(), 0.0, 1.0, 1e-13).unwrap();
        let b = integrate(|x| x.exp(), 1.0, 0.0, 1e-13).unwrap();
        assert_abs_diff_eq!(a, -b, epsilon = 1e-14);
    }

    #[test]
    fn kink_is_refined() {
        let v = integrate(|x: f64| x.abs(), -1.0, 1.0, 1e-12).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-12);
    }
}
