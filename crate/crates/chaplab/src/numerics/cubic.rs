//! Real roots of depressed cubics `y^3 + p y + q = 0`.
//!
//! The two-cube-root (Cardano) form is evaluated in a cancellation-safe way:
//! the smaller cube-root term is recovered from the product identity
//! `cbrt(A+S) * cbrt(A-S) = cbrt(A^2 - S^2) = -cbrt(p^3/27 + ...)` instead of
//! subtracting nearly equal quantities. Cube roots of negative reals use the
//! real branch throughout.

/// Outcome of the depressed-cubic solve.
#[derive(Debug, Clone, Copy)]
pub struct CubicRoot {
    pub root: f64,
    /// True when the discriminant went negative (three real roots) and the
    /// trigonometric fallback was used.
    pub trig_branch: bool,
}

/// Real root of `y^3 + p y + q = 0` by the two-cube-root formula,
/// with the trigonometric expression as the three-real-roots fallback.
///
/// In the fallback case the middle root (by value) is returned; it is the
/// continuous continuation of the unique-root branch as the discriminant
/// crosses zero.
pub fn depressed_real_root(p: f64, q: f64) -> CubicRoot {
    // discriminant of the resolvent: (q/2)^2 + (p/3)^3
    let half_q = 0.5 * q;
    let third_p = p / 3.0;
    let disc = half_q * half_q + third_p * third_p * third_p;

    if disc >= 0.0 {
        let s = disc.sqrt();
        let a = -half_q;
        // a + s and a - s have the same sign as 2a when |s| < |a|; pick the
        // larger-magnitude branch and recover the other from the product.
        let root = if a >= 0.0 {
            let y1 = (a + s).cbrt();
            if y1 == 0.0 {
                0.0
            } else {
                y1 - third_p / y1
            }
        } else {
            let y2 = (a - s).cbrt();
            if y2 == 0.0 {
                0.0
            } else {
                y2 - third_p / y2
            }
        };
        CubicRoot {
            root,
            trig_branch: false,
        }
    } else {
        // three real roots: y_k = 2 sqrt(-p/3) cos((acos(3q/(2p) sqrt(-3/p)) - 2 pi k)/3)
        let m = (-third_p).sqrt();
        let arg = (3.0 * q / (2.0 * p) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
        let theta = arg.acos();
        let mut roots = [0.0f64; 3];
        for (k, r) in roots.iter_mut().enumerate() {
            *r = 2.0 * m * ((theta - 2.0 * std::f64::consts::PI * k as f64) / 3.0).cos();
        }
        roots.sort_by(|x, y| x.total_cmp(y));
        CubicRoot {
            root: roots[1],
            trig_branch: true,
        }
    }
}

/// Residual `y^3 + p y + q` of a candidate root.
pub fn residual(p: f64, q: f64, y: f64) -> f64 {
    y * y * y + p * y + q
}
