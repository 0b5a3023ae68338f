//! Initial data: smooth curve families with closed-form derivatives, the
//! built-in scenario library, and validation of the assumption sets that
//! gate each singularity construction.
//!
//! Curves are closed-form parametric families with hand-coded first and
//! second derivatives rather than user-supplied code; the coefficient
//! formulas downstream need exact derivative values, not finite differences.
//! Global "for all x" hypotheses are checked on a bounded validation
//! interval; every built-in family is monotone or constant outside it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::roots;

/// Default tolerance for equality conditions such as `lambda(x0) = 0`.
pub const EQUALITY_TOL: f64 = 1e-9;
/// Margin for strict inequalities checked on a grid.
pub const INEQUALITY_MARGIN: f64 = 1e-12;
/// Step for the centered difference used on `f'(alpha0)`.
pub const F_PRIME_STEP: f64 = 1e-6;

/// Closed-form curve families. `Sum`, `Scale` and `Shift` compose them.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SmoothCurve {
    Basic(BasicCurve),
    Sum {
        sum: Vec<SmoothCurve>,
    },
    Scale {
        scale: f64,
        of: Box<SmoothCurve>,
    },
    Shift {
        shift: f64,
        of: Box<SmoothCurve>,
    },
}

/// Leaf curve families keyed by `family` in config files.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", deny_unknown_fields)]
pub enum BasicCurve {
    /// `params = [c0, c1, ...]`: `c0 + c1 x + c2 x^2 + ...`
    #[serde(rename = "polynomial")]
    Polynomial { params: Vec<f64> },
    /// `num`, `den` are polynomial coefficient lists; `num(x) / den(x)`.
    #[serde(rename = "rational")]
    Rational { num: Vec<f64>, den: Vec<f64> },
    /// `params = [amp, slope, offset, bias]`: `amp * tanh(slope x + offset) + bias`.
    #[serde(rename = "tanh")]
    Tanh { params: [f64; 4] },
    /// `params = [left, right]`: `(left - x)^4` below `left`, `0` on
    /// `[left, right]`, `(x - right)^4` above `right`. C^3-smooth.
    #[serde(rename = "plateau-quartic")]
    PlateauQuartic { params: [f64; 2] },
}

fn poly_eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ck| acc * x + ck)
}

fn poly_deriv(c: &[f64]) -> Vec<f64> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(k, &ck)| k as f64 * ck)
        .collect()
}

impl SmoothCurve {
    /// Evaluate the curve or one of its first two derivatives.
    ///
    /// Every value comes from the closed-form expression of the family,
    /// never from finite differences.
    pub fn eval(&self, x: f64, order: u8) -> Result<f64> {
        if order > 2 {
            return Err(Error::Config(format!(
                "derivative order {order} not supported (0, 1, 2)"
            )));
        }
        Ok(self.eval_unchecked(x, order))
    }

    fn eval_unchecked(&self, x: f64, order: u8) -> f64 {
        match self {
            SmoothCurve::Basic(b) => b.eval(x, order),
            SmoothCurve::Sum { sum } => sum.iter().map(|c| c.eval_unchecked(x, order)).sum(),
            SmoothCurve::Scale { scale, of } => scale * of.eval_unchecked(x, order),
            SmoothCurve::Shift { shift, of } => of.eval_unchecked(x - shift, order),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.eval_unchecked(x, 0)
    }

    pub fn deriv1(&self, x: f64) -> f64 {
        self.eval_unchecked(x, 1)
    }

    pub fn deriv2(&self, x: f64) -> f64 {
        self.eval_unchecked(x, 2)
    }

    /// Polynomial constant curve.
    pub fn constant(c: f64) -> Self {
        SmoothCurve::Basic(BasicCurve::Polynomial { params: vec![c] })
    }

    pub fn polynomial(coeffs: &[f64]) -> Self {
        SmoothCurve::Basic(BasicCurve::Polynomial {
            params: coeffs.to_vec(),
        })
    }

    pub fn plateau_quartic(left: f64, right: f64) -> Self {
        SmoothCurve::Basic(BasicCurve::PlateauQuartic {
            params: [left, right],
        })
    }
}

impl BasicCurve {
    fn eval(&self, x: f64, order: u8) -> f64 {
        match self {
            BasicCurve::Polynomial { params } => match order {
                0 => poly_eval(params, x),
                1 => poly_eval(&poly_deriv(params), x),
                _ => poly_eval(&poly_deriv(&poly_deriv(params)), x),
            },
            BasicCurve::Rational { num, den } => {
                let p = poly_eval(num, x);
                let q = poly_eval(den, x);
                match order {
                    0 => p / q,
                    _ => {
                        let dnum = poly_deriv(num);
                        let dden = poly_deriv(den);
                        let dp = poly_eval(&dnum, x);
                        let dq = poly_eval(&dden, x);
                        if order == 1 {
                            (dp * q - p * dq) / (q * q)
                        } else {
                            let ddp = poly_eval(&poly_deriv(&dnum), x);
                            let ddq = poly_eval(&poly_deriv(&dden), x);
                            (ddp * q - p * ddq) / (q * q)
                                - 2.0 * dq * (dp * q - p * dq) / (q * q * q)
                        }
                    }
                }
            }
            BasicCurve::Tanh { params } => {
                let [amp, slope, offset, bias] = *params;
                let u = slope * x + offset;
                let th = u.tanh();
                let sech2 = 1.0 - th * th;
                match order {
                    0 => amp * th + bias,
                    1 => amp * slope * sech2,
                    _ => -2.0 * amp * slope * slope * sech2 * th,
                }
            }
            BasicCurve::PlateauQuartic { params } => {
                let [left, right] = *params;
                if x < left {
                    let d = left - x;
                    match order {
                        0 => d.powi(4),
                        1 => -4.0 * d.powi(3),
                        _ => 12.0 * d * d,
                    }
                } else if x > right {
                    let d = x - right;
                    match order {
                        0 => d.powi(4),
                        1 => 4.0 * d.powi(3),
                        _ => 12.0 * d * d,
                    }
                } else {
                    0.0
                }
            }
        }
    }
}

/// The pair of Riemann-invariant traces at t = 0 plus the gas constants.
/// This is the entire problem specification.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InitialDataPair {
    pub lambda_minus: SmoothCurve,
    pub lambda_plus: SmoothCurve,
    /// Gas constant of the pressure law `p = p0 - mu^2 / rho`.
    pub mu: f64,
    /// Pressure offset of the same law.
    pub p0: f64,
}

impl InitialDataPair {
    pub fn new(lambda_minus: SmoothCurve, lambda_plus: SmoothCurve, mu: f64, p0: f64) -> Self {
        Self {
            lambda_minus,
            lambda_plus,
            mu,
            p0,
        }
    }

    /// `Lambda_+ - Lambda_-` at `x`; positive wherever the strict ordering
    /// hypothesis holds.
    pub fn gap(&self, x: f64) -> f64 {
        self.lambda_plus.value(x) - self.lambda_minus.value(x)
    }

    /// Initial density `rho_0 = 2 mu / (Lambda_+ - Lambda_-)`.
    pub fn rho0(&self, x: f64) -> f64 {
        2.0 * self.mu / self.gap(x)
    }

    /// Initial velocity `u_0 = (Lambda_+ + Lambda_-) / 2`.
    pub fn u0(&self, x: f64) -> f64 {
        0.5 * (self.lambda_plus.value(x) + self.lambda_minus.value(x))
    }

    /// Pressure from the Chaplygin law at a given density.
    pub fn pressure(&self, rho: f64) -> f64 {
        self.p0 - self.mu * self.mu / rho
    }
}

/// Assumption families from the singularity constructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AssumptionSet {
    /// Cusp formation: ordering, both invariants strictly decreasing, a
    /// singular pair with `f = 0` and `f' < 0`.
    H,
    /// Point-shape: tangential zeros of both invariants with opposite
    /// curvature.
    A,
    /// Line-shape I with the plateau on `Lambda_-` (left variant).
    BLeft,
    /// Line-shape I with the plateau on `Lambda_+` (right variant).
    BRight,
    /// Line-shape II: plateaus on both invariants.
    C,
    /// Multi-point extension of the A set: several tangential zeros.
    APrime,
}

impl AssumptionSet {
    pub fn label(&self) -> &'static str {
        match self {
            AssumptionSet::H => "H",
            AssumptionSet::A => "A",
            AssumptionSet::BLeft => "B-left",
            AssumptionSet::BRight => "B-right",
            AssumptionSet::C => "C",
            AssumptionSet::APrime => "A-prime",
        }
    }
}

/// One failed condition with its location and measured value.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Violation {
    pub condition: String,
    pub x: f64,
    pub measured: f64,
}

/// Located witness points of an assumption set.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Witnesses {
    pub alpha0: Option<f64>,
    pub beta0: Option<f64>,
    /// Left end of the `Lambda_-` plateau (B-left / C).
    pub alpha_hat: Option<f64>,
    /// Right end of the `Lambda_+` plateau (B-right / C).
    pub beta_hat: Option<f64>,
    /// All tangential zeros of `Lambda_-` (A-prime).
    pub alpha_list: Vec<f64>,
    /// All tangential zeros of `Lambda_+` (A-prime).
    pub beta_list: Vec<f64>,
    /// `f(alpha0)` for the H set.
    pub f_at_alpha0: Option<f64>,
    /// Centered-difference `f'(alpha0)` for the H set.
    pub f_prime_at_alpha0: Option<f64>,
    /// Largest `|f|` seen on the Sigma grid (reported for degenerate data).
    pub max_abs_f: Option<f64>,
}

/// Outcome of validating one assumption set on a bounded interval.
///
/// Grid-wide inequalities and the local witness conditions are reported
/// separately: the hypotheses are stated on all of R but only used near the
/// witness pair, and the caller may care about either notion.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub set: AssumptionSet,
    pub satisfied: bool,
    /// Inequalities checked on the whole validation grid.
    pub global_ok: bool,
    /// Conditions at the located witness points.
    pub local_ok: bool,
    pub witnesses: Witnesses,
    pub violations: Vec<Violation>,
    pub interval: (f64, f64),
    pub grid_n: usize,
    pub equality_tol: f64,
    pub inequality_margin: f64,
}

impl AssumptionReport {
    fn new(set: AssumptionSet, interval: (f64, f64), grid_n: usize, tol: f64) -> Self {
        Self {
            set,
            satisfied: true,
            global_ok: true,
            local_ok: true,
            witnesses: Witnesses::default(),
            violations: Vec::new(),
            interval,
            grid_n,
            equality_tol: tol,
            inequality_margin: INEQUALITY_MARGIN,
        }
    }

    fn global_violation(&mut self, condition: &str, x: f64, measured: f64) {
        self.violations.push(Violation {
            condition: condition.to_string(),
            x,
            measured,
        });
        self.global_ok = false;
        self.satisfied = false;
    }

    fn local_violation(&mut self, condition: &str, x: f64, measured: f64) {
        self.violations.push(Violation {
            condition: condition.to_string(),
            x,
            measured,
        });
        self.local_ok = false;
        self.satisfied = false;
    }
}

fn grid(interval: (f64, f64), n: usize) -> impl Iterator<Item = f64> {
    let (a, b) = interval;
    let h = (b - a) / (n - 1) as f64;
    (0..n).map(move |i| a + h * i as f64)
}

/// `f(alpha)` from the cusp indicator: the difference of the two transport
/// factors along the singular curve `beta = beta(alpha)`.
pub fn cusp_indicator(data: &InitialDataPair, alpha: f64, beta: f64) -> f64 {
    let lm = &data.lambda_minus;
    let lp = &data.lambda_plus;
    lm.deriv1(alpha) / (lp.value(beta) - lm.value(beta))
        - lp.deriv1(beta) / (lp.value(alpha) - lm.value(alpha))
}

/// Solve `Lambda_+(beta) = Lambda_-(alpha)` for `beta` on the interval.
/// Requires `Lambda_+` strictly monotone there (the H2 hypothesis).
pub fn sigma_beta(data: &InitialDataPair, alpha: f64, interval: (f64, f64)) -> Option<f64> {
    let target = data.lambda_minus.value(alpha);
    roots::bisect(
        |b| data.lambda_plus.value(b) - target,
        interval.0,
        interval.1,
    )
}

fn indicator_on_sigma(data: &InitialDataPair, alpha: f64, interval: (f64, f64)) -> Option<f64> {
    sigma_beta(data, alpha, interval).map(|beta| cusp_indicator(data, alpha, beta))
}

/// Tangential zeros: local extrema of `curve` where the value vanishes.
/// `want_max` selects maxima (second derivative < 0) vs minima.
fn tangential_zeros(
    curve: &SmoothCurve,
    interval: (f64, f64),
    grid_n: usize,
    tol: f64,
    want_max: bool,
) -> Vec<f64> {
    let xs: Vec<f64> = grid(interval, grid_n).collect();
    let ds: Vec<f64> = xs.iter().map(|&x| curve.deriv1(x)).collect();
    let mut candidates = Vec::new();
    for i in 0..xs.len() {
        if ds[i] == 0.0 {
            // exact critical node; skip plateau interiors (flat neighbors)
            let left_flat = i > 0 && ds[i - 1] == 0.0;
            let right_flat = i + 1 < xs.len() && ds[i + 1] == 0.0;
            if !left_flat && !right_flat {
                candidates.push(xs[i]);
            }
            continue;
        }
        if i + 1 < xs.len() && ds[i + 1] != 0.0 && ds[i].signum() != ds[i + 1].signum() {
            if let Some(x) = roots::bisect(|x| curve.deriv1(x), xs[i], xs[i + 1]) {
                candidates.push(x);
            }
        }
    }
    let mut out: Vec<f64> = Vec::new();
    for x in candidates {
        let is_max = curve.deriv2(x) < 0.0;
        if is_max == want_max && curve.value(x).abs() <= tol {
            let sep = (interval.1 - interval.0) / grid_n as f64;
            if out.last().map_or(true, |&prev| x - prev > sep) {
                out.push(x);
            }
        }
    }
    out
}

/// Plateau of `curve` (an interval where it vanishes identically), located
/// from the sign structure of its first derivative. Returns `(left, right)`.
fn locate_plateau(
    curve: &SmoothCurve,
    interval: (f64, f64),
    grid_n: usize,
    tol: f64,
) -> Option<(f64, f64)> {
    let xs: Vec<f64> = grid(interval, grid_n).collect();
    // longest run of grid points with |value| <= tol
    let mut best: Option<(usize, usize)> = None;
    let mut run_start: Option<usize> = None;
    for (i, &x) in xs.iter().enumerate() {
        if curve.value(x).abs() <= tol {
            if run_start.is_none() {
                run_start = Some(i);
            }
        } else if let Some(s) = run_start.take() {
            if best.map_or(true, |(bs, be)| i - 1 - s > be - bs) {
                best = Some((s, i - 1));
            }
        }
    }
    if let Some(s) = run_start {
        let e = xs.len() - 1;
        if best.map_or(true, |(bs, be)| e - s > be - bs) {
            best = Some((s, e));
        }
    }
    let (s, e) = best?;
    if e <= s {
        return None;
    }
    // refine both knots: the derivative is nonzero on exactly one side
    let left = if s == 0 {
        xs[0]
    } else {
        roots::bisect_predicate(|x| curve.deriv1(x) != 0.0, xs[s - 1], xs[s])?
    };
    let right = if e == xs.len() - 1 {
        xs[e]
    } else {
        roots::bisect_predicate(|x| curve.deriv1(x) == 0.0, xs[e], xs[e + 1])?
    };
    Some((left, right))
}

/// Check every condition of `set` for `data` on `interval`.
///
/// Equalities are located by root finding and accepted within `tol`;
/// strict inequalities use a fixed margin. The two failure modes that make
/// a witness search impossible (`Sigma` empty, no sign change of `f`)
/// surface as errors rather than report entries.
pub fn validate_assumptions(
    data: &InitialDataPair,
    set: AssumptionSet,
    interval: (f64, f64),
    grid_n: usize,
    tol: f64,
) -> Result<AssumptionReport> {
    if grid_n < 100 {
        return Err(Error::Config(format!("grid_n = {grid_n} < 100")));
    }
    if interval.0 >= interval.1 {
        return Err(Error::Config("empty validation interval".into()));
    }
    let mut report = AssumptionReport::new(set, interval, grid_n, tol);
    check_ordering(data, &mut report, "1");
    match set {
        AssumptionSet::H => validate_h(data, &mut report)?,
        AssumptionSet::A => validate_a(data, &mut report, false)?,
        AssumptionSet::APrime => validate_a(data, &mut report, true)?,
        AssumptionSet::BRight => validate_b(data, &mut report, true)?,
        AssumptionSet::BLeft => validate_b(data, &mut report, false)?,
        AssumptionSet::C => validate_c(data, &mut report)?,
    }
    report.satisfied = report.violations.is_empty();
    Ok(report)
}

/// The shared ordering hypothesis `Lambda_- < Lambda_+` (H1/A1/B1/C1).
fn check_ordering(data: &InitialDataPair, report: &mut AssumptionReport, tag: &str) {
    let set = report.set.label();
    for x in grid(report.interval, report.grid_n) {
        let g = data.gap(x);
        if g <= report.inequality_margin {
            report.global_violation(&format!("{set}{tag}: Lambda_- < Lambda_+"), x, g);
        }
    }
}

fn validate_h(data: &InitialDataPair, report: &mut AssumptionReport) -> Result<()> {
    let interval = report.interval;
    let tol = report.equality_tol;
    // H2: both invariants strictly decreasing
    for x in grid(interval, report.grid_n) {
        let dm = data.lambda_minus.deriv1(x);
        let dp = data.lambda_plus.deriv1(x);
        if dm >= -report.inequality_margin {
            report.global_violation("H2: Lambda_-' < 0", x, dm);
        }
        if dp >= -report.inequality_margin {
            report.global_violation("H2: Lambda_+' < 0", x, dp);
        }
    }
    if !report.global_ok {
        return Ok(());
    }
    // Sigma grid and the indicator f along it
    let alphas: Vec<f64> = grid(interval, report.grid_n).collect();
    let mut sigma: Vec<(f64, f64)> = Vec::new(); // (alpha, f)
    let mut max_abs_f: f64 = 0.0;
    for &a in &alphas {
        if let Some(beta) = sigma_beta(data, a, interval) {
            if beta > a {
                let f = cusp_indicator(data, a, beta);
                max_abs_f = max_abs_f.max(f.abs());
                sigma.push((a, f));
            }
        }
    }
    report.witnesses.max_abs_f = Some(max_abs_f);
    if sigma.is_empty() {
        return Err(Error::WitnessNotFound {
            set: "H3".into(),
            detail: "Sigma is empty on the validation interval".into(),
        });
    }
    // H3/H4: find alpha0 with f(alpha0) = 0
    let mut alpha0 = None;
    for w in sigma.windows(2) {
        let ((a1, f1), (a2, f2)) = (w[0], w[1]);
        if f1 == 0.0 {
            alpha0 = Some(a1);
            break;
        }
        if f1.signum() != f2.signum() {
            alpha0 = roots::bisect(
                |a| indicator_on_sigma(data, a, interval).unwrap_or(f64::NAN),
                a1,
                a2,
            );
            break;
        }
    }
    if alpha0.is_none() {
        // degenerate data: f may vanish identically
        if max_abs_f <= tol {
            let (best, _) = sigma
                .iter()
                .fold((sigma[0].0, f64::INFINITY), |(xb, fb), &(x, f)| {
                    if f.abs() < fb {
                        (x, f.abs())
                    } else {
                        (xb, fb)
                    }
                });
            alpha0 = Some(best);
        } else {
            return Err(Error::WitnessNotFound {
                set: "H4".into(),
                detail: "f has no sign change on Sigma".into(),
            });
        }
    }
    let alpha0 = alpha0.unwrap();
    let beta0 = sigma_beta(data, alpha0, interval).ok_or_else(|| Error::WitnessNotFound {
        set: "H3".into(),
        detail: "beta(alpha0) not bracketed".into(),
    })?;
    let f0 = cusp_indicator(data, alpha0, beta0);
    report.witnesses.alpha0 = Some(alpha0);
    report.witnesses.beta0 = Some(beta0);
    report.witnesses.f_at_alpha0 = Some(f0);
    if f0.abs() > tol {
        report.local_violation("H4: f(alpha0) = 0", alpha0, f0);
    }
    // H5 by centered difference of f along Sigma
    let h = F_PRIME_STEP;
    let fp = indicator_on_sigma(data, alpha0 + h, interval);
    let fm = indicator_on_sigma(data, alpha0 - h, interval);
    if let (Some(fp), Some(fm)) = (fp, fm) {
        let fprime = (fp - fm) / (2.0 * h);
        report.witnesses.f_prime_at_alpha0 = Some(fprime);
        if fprime >= -tol {
            report.local_violation("H5: f'(alpha0) < 0", alpha0, fprime);
        }
    } else {
        report.local_violation("H5: f'(alpha0) not computable", alpha0, f64::NAN);
    }
    Ok(())
}

fn validate_a(data: &InitialDataPair, report: &mut AssumptionReport, multi: bool) -> Result<()> {
    let tol = report.equality_tol;
    let set = report.set.label().to_string();
    let alphas = tangential_zeros(&data.lambda_minus, report.interval, report.grid_n, tol, true);
    let betas = tangential_zeros(&data.lambda_plus, report.interval, report.grid_n, tol, false);
    if alphas.is_empty() || betas.is_empty() {
        return Err(Error::WitnessNotFound {
            set: format!("{set}2"),
            detail: "no tangential zero of Lambda_- (or Lambda_+) in interval".into(),
        });
    }
    for &a in &alphas {
        let d2 = data.lambda_minus.deriv2(a);
        if d2 >= -report.inequality_margin {
            report.local_violation(&format!("{set}4: Lambda_-''(alpha_i) < 0"), a, d2);
        }
    }
    for &b in &betas {
        let d2 = data.lambda_plus.deriv2(b);
        if d2 <= report.inequality_margin {
            report.local_violation(&format!("{set}4: Lambda_+''(beta_j) > 0"), b, d2);
        }
    }
    if !multi && (alphas.len() != 1 || betas.len() != 1) {
        report.local_violation(
            "A2: expects a unique pair (use A-prime for several)",
            alphas[0],
            (alphas.len() + betas.len()) as f64,
        );
    }
    if !betas.iter().any(|&b| alphas.iter().any(|&a| a < b)) {
        report.local_violation(&format!("{set}2: alpha0 < beta0"), alphas[0], betas[0]);
    }
    report.witnesses.alpha0 = alphas.first().copied();
    report.witnesses.beta0 = betas.iter().copied().find(|&b| b > alphas[0]);
    report.witnesses.alpha_list = alphas;
    report.witnesses.beta_list = betas;
    Ok(())
}

/// `plateau_on_plus = true` is the B-right variant (plateau of `Lambda_+` on
/// `[beta0, beta_hat]`); `false` mirrors it onto `Lambda_-`.
fn validate_b(
    data: &InitialDataPair,
    report: &mut AssumptionReport,
    plateau_on_plus: bool,
) -> Result<()> {
    let tol = report.equality_tol;
    let (curved, flat) = if plateau_on_plus {
        (&data.lambda_minus, &data.lambda_plus)
    } else {
        (&data.lambda_plus, &data.lambda_minus)
    };
    let zeros = tangential_zeros(curved, report.interval, report.grid_n, tol, plateau_on_plus);
    if zeros.len() != 1 {
        return Err(Error::WitnessNotFound {
            set: "B2".into(),
            detail: format!(
                "expected one tangential zero of the curved invariant, found {}",
                zeros.len()
            ),
        });
    }
    let curved_witness = zeros[0];
    let plateau = locate_plateau(flat, report.interval, report.grid_n, tol).ok_or_else(|| {
        Error::WitnessNotFound {
            set: "B2".into(),
            detail: "no plateau found on the flat invariant".into(),
        }
    })?;
    // plateau sub-grid check
    for x in grid(plateau, report.grid_n) {
        let v = flat.value(x).abs();
        if v > tol {
            report.local_violation("B2: |Lambda| = 0 on plateau", x, v);
        }
    }
    let (alpha0, beta0, alpha_hat, beta_hat) = if plateau_on_plus {
        (curved_witness, plateau.0, None, Some(plateau.1))
    } else {
        (plateau.1, curved_witness, Some(plateau.0), None)
    };
    if alpha0 >= beta0 {
        report.local_violation("B2: alpha0 < beta0", alpha0, beta0);
    }
    // B3 at both witnesses
    let dm = data.lambda_minus.deriv1(alpha0);
    let dp = data.lambda_plus.deriv1(beta0);
    if dm.abs() > tol {
        report.local_violation("B3: Lambda_-'(alpha0) = 0", alpha0, dm);
    }
    if dp.abs() > tol {
        report.local_violation("B3: Lambda_+'(beta0) = 0", beta0, dp);
    }
    // B4: strict curvature on the curved side, vanishing on the flat side
    let (mm, pp) = (
        data.lambda_minus.deriv2(alpha0),
        data.lambda_plus.deriv2(beta0),
    );
    if plateau_on_plus {
        if mm >= -report.inequality_margin {
            report.local_violation("B4: Lambda_-''(alpha0) < 0", alpha0, mm);
        }
        if pp.abs() > tol {
            report.local_violation("B4: Lambda_+''(beta0) = 0", beta0, pp);
        }
    } else {
        if mm.abs() > tol {
            report.local_violation("B4: Lambda_-''(alpha0) = 0", alpha0, mm);
        }
        if pp <= report.inequality_margin {
            report.local_violation("B4: Lambda_+''(beta0) > 0", beta0, pp);
        }
    }
    report.witnesses.alpha0 = Some(alpha0);
    report.witnesses.beta0 = Some(beta0);
    report.witnesses.alpha_hat = alpha_hat;
    report.witnesses.beta_hat = beta_hat;
    Ok(())
}

fn validate_c(data: &InitialDataPair, report: &mut AssumptionReport) -> Result<()> {
    let tol = report.equality_tol;
    let minus_plateau = locate_plateau(&data.lambda_minus, report.interval, report.grid_n, tol)
        .ok_or_else(|| Error::WitnessNotFound {
            set: "C2".into(),
            detail: "no plateau on Lambda_-".into(),
        })?;
    let plus_plateau = locate_plateau(&data.lambda_plus, report.interval, report.grid_n, tol)
        .ok_or_else(|| Error::WitnessNotFound {
            set: "C2".into(),
            detail: "no plateau on Lambda_+".into(),
        })?;
    let (alpha_hat, alpha0) = minus_plateau;
    let (beta0, beta_hat) = plus_plateau;
    if alpha0 >= beta0 {
        report.local_violation("C2: alpha0 < beta0", alpha0, beta0);
    }
    for x in grid(minus_plateau, report.grid_n) {
        let v = data.lambda_minus.value(x).abs();
        if v > tol {
            report.local_violation("C2: |Lambda_-| = 0 on plateau", x, v);
        }
    }
    for x in grid(plus_plateau, report.grid_n) {
        let v = data.lambda_plus.value(x).abs();
        if v > tol {
            report.local_violation("C2: |Lambda_+| = 0 on plateau", x, v);
        }
    }
    let dm = data.lambda_minus.deriv1(alpha0);
    let dp = data.lambda_plus.deriv1(beta0);
    if dm.abs() > tol {
        report.local_violation("C3: Lambda_-'(alpha0) = 0", alpha0, dm);
    }
    if dp.abs() > tol {
        report.local_violation("C3: Lambda_+'(beta0) = 0", beta0, dp);
    }
    let mm = data.lambda_minus.deriv2(alpha0);
    let pp = data.lambda_plus.deriv2(beta0);
    if mm.abs() > tol {
        report.local_violation("C4: Lambda_-''(alpha0) = 0", alpha0, mm);
    }
    if pp.abs() > tol {
        report.local_violation("C4: Lambda_+''(beta0) = 0", beta0, pp);
    }
    report.witnesses.alpha0 = Some(alpha0);
    report.witnesses.beta0 = Some(beta0);
    report.witnesses.alpha_hat = Some(alpha_hat);
    report.witnesses.beta_hat = Some(beta_hat);
    Ok(())
}

/// A named initial-data configuration together with the assumption set it
/// advertises and the interval its validation grid lives on.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub data: InitialDataPair,
    pub advertised_set: AssumptionSet,
    pub interval: (f64, f64),
}

/// Names accepted by [`builtin_scenario`].
pub const BUILTIN_NAMES: [&str; 6] = [
    "cusp-tanh",
    "point-shape",
    "line-shape-1",
    "line-shape-2",
    "degenerate-linear",
    "multi-point",
];

/// The canonical scenario library. Every entry passes
/// [`validate_assumptions`] for its advertised set with `tol = 1e-9`,
/// `mu = 1`, `p0 = 1` — except `degenerate-linear`, which is built to fail
/// H5 with an identically vanishing indicator.
pub fn builtin_scenario(name: &str) -> Result<Scenario> {
    let tanh = |amp: f64, slope: f64, offset: f64| {
        SmoothCurve::Basic(BasicCurve::Tanh {
            params: [amp, slope, offset, 0.0],
        })
    };
    let (minus, plus, set, interval) = match name {
        // -tanh(x) and tanh(2 - x): antisymmetric about x = 1
        "cusp-tanh" => (
            tanh(-1.0, 1.0, 0.0),
            tanh(-1.0, 1.0, -2.0),
            AssumptionSet::H,
            (-4.0, 6.0),
        ),
        // -x^2 and (x - 2)^2
        "point-shape" => (
            SmoothCurve::polynomial(&[0.0, 0.0, -1.0]),
            SmoothCurve::polynomial(&[4.0, -4.0, 1.0]),
            AssumptionSet::A,
            (-3.0, 5.0),
        ),
        // -x^2 against a quartic plateau on [2, 3]
        "line-shape-1" => (
            SmoothCurve::polynomial(&[0.0, 0.0, -1.0]),
            SmoothCurve::plateau_quartic(2.0, 3.0),
            AssumptionSet::BRight,
            (-2.0, 5.0),
        ),
        // plateaus on both sides: [-1, 0] below, [2, 3] above
        "line-shape-2" => (
            SmoothCurve::Scale {
                scale: -1.0,
                of: Box::new(SmoothCurve::plateau_quartic(-1.0, 0.0)),
            },
            SmoothCurve::plateau_quartic(2.0, 3.0),
            AssumptionSet::C,
            (-3.0, 5.0),
        ),
        // parallel straight lines: f vanishes identically, H5 fails
        "degenerate-linear" => (
            SmoothCurve::polynomial(&[0.0, -1.0]),
            SmoothCurve::polynomial(&[2.0, -1.0]),
            AssumptionSet::H,
            (-4.0, 6.0),
        ),
        // -x^2 against ((x-1)(x-3))^2 / 16: one alpha witness, two betas
        "multi-point" => (
            SmoothCurve::polynomial(&[0.0, 0.0, -1.0]),
            SmoothCurve::polynomial(&[
                9.0 / 16.0,
                -24.0 / 16.0,
                22.0 / 16.0,
                -8.0 / 16.0,
                1.0 / 16.0,
            ]),
            AssumptionSet::APrime,
            (-3.0, 6.0),
        ),
        other => {
            return Err(Error::Config(format!(
                "unknown scenario '{other}' (known: {})",
                BUILTIN_NAMES.join(", ")
            )))
        }
    };
    Ok(Scenario {
        name: name.to_string(),
        data: InitialDataPair::new(minus, plus, 1.0, 1.0),
        advertised_set: set,
        interval,
    })
}

/// Constant-state pair `Lambda_-+ = -+1`; globally smooth, no blowup.
pub fn constant_state() -> Scenario {
    Scenario {
        name: "constant".into(),
        data: InitialDataPair::new(
            SmoothCurve::constant(-1.0),
            SmoothCurve::constant(1.0),
            1.0,
            1.0,
        ),
        advertised_set: AssumptionSet::H,
        interval: (-4.0, 6.0),
    }
}
