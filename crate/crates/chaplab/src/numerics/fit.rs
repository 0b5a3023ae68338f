//! Least-squares utilities: log-log slope fitting and power-law limits.

/// Straight-line fit `y = slope * x + intercept` with coefficient of
/// determination.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, intercept, r2)
}

/// Fit `|q| ~ C * s^p` over positive samples; returns (p, r^2).
///
/// Samples with non-finite or zero magnitude are skipped.
pub fn log_log_slope(s: &[f64], q: &[f64]) -> (f64, f64) {
    let mut xs = Vec::with_capacity(s.len());
    let mut ys = Vec::with_capacity(s.len());
    for (&si, &qi) in s.iter().zip(q) {
        let a = qi.abs();
        if si > 0.0 && a > 0.0 && a.is_finite() {
            xs.push(si.ln());
            ys.push(a.ln());
        }
    }
    if xs.len() < 2 {
        return (f64::NAN, 0.0);
    }
    let (slope, _, r2) = linear_fit(&xs, &ys);
    (slope, r2)
}

/// Limit of `u(delta)` as `delta -> 0` from three samples at geometrically
/// spaced offsets, with the decay exponent fitted from the data itself:
/// assuming `u = u_inf + c * delta^p`, consecutive differences determine `p`.
pub fn power_law_limit(deltas: &[f64; 3], us: &[f64; 3]) -> f64 {
    let d12 = us[0] - us[1];
    let d23 = us[1] - us[2];
    if d23 == 0.0 || d12 / d23 <= 1.0 {
        return us[2];
    }
    let ratio = deltas[0] / deltas[1];
    let p = (d12 / d23).ln() / ratio.ln();
    let factor = ratio.powf(p) - 1.0;
    us[2] - d23 / factor
}

/// Limit of `u(delta)` with two known correction exponents:
/// `u = u_inf + c1 delta^p1 + c2 delta^p2`. Solves the 3x3 Vandermonde-like
/// system exactly.
pub fn two_term_limit(deltas: &[f64; 3], us: &[f64; 3], p1: f64, p2: f64) -> f64 {
    // unknowns (u_inf, c1, c2); eliminate by Cramer's rule
    let a = [
        [1.0, deltas[0].powf(p1), deltas[0].powf(p2)],
        [1.0, deltas[1].powf(p1), deltas[1].powf(p2)],
        [1.0, deltas[2].powf(p1), deltas[2].powf(p2)],
    ];
    let det3 = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det3(&a);
    if d == 0.0 {
        return us[2];
    }
    let mut a0 = a;
    for i in 0..3 {
        a0[i][0] = us[i];
    }
    det3(&a0) / d
}
