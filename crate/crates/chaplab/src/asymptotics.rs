//! Behavior near the blowup point: scenario constants, the cubic relation
//! between characteristic and physical offsets, approach-regime
//! classification, and blowup-rate verification by log-log slope fitting.
//!
//! Offsets are written relative to the blowup point,
//! `t~ = t - t0`, `x~ = x - x0`, `a~ = alpha - alpha0`, `b~ = beta - beta0`.
//! For cusp data the leading geometry is the cubic
//! `x~ = B3 a~^3 + B2 t~ a~ + B1 t~^2`; for point-shape data the analogous
//! depressed cubic lives in `b~`. All constants are assembled from the
//! initial data at the witness pair after the normalizing velocity shift
//! that makes both invariants vanish there.

use serde::{Deserialize, Serialize};

use crate::charmap::{CharCoord, CharMap, PhysCoord};
use crate::error::{Error, Result};
use crate::initial_data::InitialDataPair;
use crate::numerics::{cubic, fit};
use crate::singularity::SingularityReport;

/// Default regime thresholds on the ratio `|x~| / |t~|^p`.
pub const REGIME_LOW: f64 = 0.1;
pub const REGIME_HIGH: f64 = 10.0;
/// Samples below this Jacobian magnitude are dropped from rate fits.
pub const FIT_MIN_J: f64 = 1e-12;
/// Residual tolerance of the cubic inversion, relative to the local scale.
pub const CARDANO_RESIDUAL_TOL: f64 = 1e-10;

/// Scenario families for asymptotic purposes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScenarioKind {
    H,
    A,
    B,
    C,
}

/// Constants of the cusp (H) asymptotics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HCoefficients {
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub d1: f64,
    pub d2: f64,
    /// `D3` evaluated at ratio 1 on the balanced path with `t~ < 0`.
    pub d3_unit: f64,
    pub m: f64,
    /// Velocity-deviation constants of cases I and II.
    pub c6: f64,
    pub c7: f64,
    pub alpha0: f64,
    pub beta0: f64,
    /// Constant subtracted from both invariants by the normalization.
    pub galilean_shift: f64,
}

/// Constants of the point-shape (A) asymptotics, one witness pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ACoefficients {
    pub b7: f64,
    pub b8: f64,
    pub b9: f64,
    pub b10: f64,
    pub b11: f64,
    pub b12: f64,
    /// `B13` at ratio 1 (`x~ = t~^3`).
    pub b13_unit: f64,
    pub b14: f64,
    pub b15: f64,
    /// `B16` at ratio 1.
    pub b16_unit: f64,
    pub b17: f64,
    pub b18: f64,
    /// `B19` at ratio 1.
    pub b19_unit: f64,
    pub alpha0: f64,
    pub beta0: f64,
    pub galilean_shift: f64,
}

/// Constants of the line-shape I (B) asymptotics near the singular line.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BCoefficients {
    pub v1: f64,
    pub v2: f64,
    /// True when the plateau sits on the plus invariant.
    pub plateau_on_plus: bool,
    pub alpha0: f64,
    pub beta0: f64,
    pub galilean_shift: f64,
}

/// Scenario constants entering the asymptotic formulas.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum CoefficientSet {
    H(HCoefficients),
    A(ACoefficients),
    B(BCoefficients),
    /// Doubly degenerate plateaus: no closed-form constants are claimed;
    /// rates come from fitting alone.
    C,
}

impl CoefficientSet {
    pub fn kind(&self) -> ScenarioKind {
        match self {
            CoefficientSet::H(_) => ScenarioKind::H,
            CoefficientSet::A(_) => ScenarioKind::A,
            CoefficientSet::B(_) => ScenarioKind::B,
            CoefficientSet::C => ScenarioKind::C,
        }
    }
}

/// Approach-regime cases of the blowup-rate statements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegimeCase {
    I,
    II,
    III,
}

/// Classification of one offset pair.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Regime {
    pub case: RegimeCase,
    pub ratio: f64,
}

/// Canonical approach paths for rate fits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ApproachPath {
    /// `x = x0`, `t` increasing to `t0` (case I).
    TimeAxis,
    /// `t = t0`, `x` decreasing to `x0` from the right (case II).
    SpaceAxis,
    /// `x~ = kappa |t~|^p` with the kind-specific exponent (case III).
    Balanced { kappa: f64 },
}

impl ApproachPath {
    fn describe(&self) -> String {
        match self {
            ApproachPath::TimeAxis => "x = x0, t -> t0-".into(),
            ApproachPath::SpaceAxis => "t = t0, x -> x0+".into(),
            ApproachPath::Balanced { kappa } => format!("x~ = {kappa} |t~|^p, t -> t0-"),
        }
    }
}

/// Field quantity whose blowup rate is fitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quantity {
    Rho,
    UDeviation,
    Ux,
    Ut,
    RhoX,
    RhoT,
}

/// Outcome of one log-log rate fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateReport {
    pub quantity: Quantity,
    pub path: String,
    pub fitted_exponent: f64,
    /// Envelope exponent from the rate statements, when one applies.
    pub expected_exponent: Option<f64>,
    pub r_squared: f64,
    pub samples_used: usize,
    /// `(s_min, s_max)` of the samples that survived evaluation.
    pub effective_range: (f64, f64),
}

/// One row of a leading-order gap comparison.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GapRow {
    pub t_tilde: f64,
    pub x_tilde: f64,
    pub predicted: f64,
    pub actual: f64,
    pub relative_deviation: f64,
}

/// Report of leading-order predictions against exact inversion values.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GapReport {
    pub description: String,
    pub rows: Vec<GapRow>,
    pub deviation_decreasing: bool,
}

fn shifted(data: &InitialDataPair, x: f64, order: u8, plus: bool, shift: f64) -> f64 {
    let v = if plus {
        data.lambda_plus.eval(x, order)
    } else {
        data.lambda_minus.eval(x, order)
    };
    let v = v.unwrap_or(f64::NAN);
    if order == 0 {
        v - shift
    } else {
        v
    }
}

/// `D1 = -L+'(beta0) L-(beta0)`; shared by the coefficient assembly and the
/// direct consistency check.
pub fn d1_direct(data: &InitialDataPair, beta0: f64, shift: f64) -> f64 {
    -shifted(data, beta0, 1, true, shift) * shifted(data, beta0, 0, false, shift)
}

/// Assemble the scenario constants for a singularity report.
///
/// The normalizing shift `L-(alpha0)` is subtracted from both invariants
/// before assembly (a velocity shift; derivatives are untouched). Sign
/// constraints of the constants are asserted.
pub fn compute_coefficients(
    data: &InitialDataPair,
    report: &SingularityReport,
) -> Result<CoefficientSet> {
    use crate::singularity::SingularityKind as K;
    let alpha0 = report.alpha0;
    let beta0 = report.beta0;
    let shift = data.lambda_minus.value(alpha0);
    let check = (data.lambda_plus.value(beta0) - shift).abs();
    if check > 1e-8 {
        return Err(Error::Domain(format!(
            "witness pair is not singular: |L+(beta0) - L-(alpha0)| = {check:e}"
        )));
    }
    let lm = |x: f64, k: u8| shifted(data, x, k, false, shift);
    let lp = |x: f64, k: u8| shifted(data, x, k, true, shift);
    match report.kind {
        K::Cusp => {
            let a = lp(alpha0, 0);
            let b = lm(beta0, 0);
            let hp_b = lp(beta0, 1) - lm(beta0, 1);
            let hp_a = lp(alpha0, 1) - lm(alpha0, 1);
            let m = (lp(beta0, 2) * b * b - lm(alpha0, 2) * a * a
                - lp(beta0, 1) * b * (hp_b - hp_a))
                / (2.0 * a * a);
            let b1 = -lp(beta0, 1) * b / 2.0;
            let b2 = lm(alpha0, 1);
            let b3 = m / (3.0 * a);
            if !(b1 < 0.0 && b2 < 0.0 && b3 > 0.0) {
                return Err(Error::Domain(format!(
                    "cusp coefficient signs violated: B1={b1:e} B2={b2:e} B3={b3:e}"
                )));
            }
            let c1 = b2 / b3;
            let c2 = b1 / b3;
            let c3 = -1.0 / b3;
            if !(c1 < 0.0 && c2 < 0.0 && c3 < 0.0) {
                return Err(Error::Domain(format!(
                    "cusp coefficient signs violated: C1={c1:e} C2={c2:e} C3={c3:e}"
                )));
            }
            let d1 = d1_direct(data, beta0, shift);
            let d2 = m * (-c3).powf(2.0 / 3.0);
            // balanced-path constant at ratio 1, approaching from t < t0
            let obar = -4.0 * c1 * c1 * c1 / (27.0 * c3 * c3);
            let cbal = (1.0 + (1.0 + obar).sqrt()).cbrt() + (1.0 - (1.0 + obar).sqrt()).cbrt();
            let d3_unit = d1 - m * cbal * cbal * (0.5 * c3.abs()).powf(2.0 / 3.0);
            let c6 = 2.0 * lp(beta0, 1) * b * c3 / (a * c1);
            let c7 = 2.0 * lp(beta0, 1) * b / a * (-c3).cbrt();
            Ok(CoefficientSet::H(HCoefficients {
                b1,
                b2,
                b3,
                c1,
                c2,
                c3,
                d1,
                d2,
                d3_unit,
                m,
                c6,
                c7,
                alpha0,
                beta0,
                galilean_shift: shift,
            }))
        }
        K::PointShape => {
            let a = lp(alpha0, 0);
            let b = lm(beta0, 0);
            let p = -lm(alpha0, 2) / (6.0 * a);
            let q = -lp(beta0, 2) / (6.0 * b);
            let e = q - p * a.powi(3) / b.powi(3);
            if e <= 0.0 {
                return Err(Error::Domain(format!(
                    "point-shape cubic coefficient not positive: E = {e:e}"
                )));
            }
            let b7 = -1.0 / e;
            let b8 = -2.0 * p.powi(3) * a.powi(9) / (e.powi(3) * b.powi(6))
                - 3.0 * p * p * a.powi(6) / (e * e * b.powi(3))
                - p * a.powi(3) / e;
            let b9 = -3.0 * p * a.powi(3) / (e * b) - 3.0 * p * p * a.powi(6) / (e * e * b.powi(4));
            let b10 = -3.0 * p * a.powi(3) / (e * b * b);
            let c_time = cubic::depressed_real_root(b9, b8).root;
            let b11 = c_time - b10 / 3.0;
            let b12 = (1.0 / e).cbrt();
            let c_bal = cubic::depressed_real_root(b9, b7 + b8).root;
            let b13_unit = c_bal - b10 / 3.0;
            // alpha response through the linear time relation
            let a11 = -a * (1.0 + b11 / b);
            let a12 = -(a / b) * b12;
            let a13 = -a * (1.0 + b13_unit / b);
            let lpp = lp(beta0, 2);
            let lmm = lm(alpha0, 2);
            let b14 = 0.5 * (lpp * b11 * b11 - lmm * a11 * a11);
            let b15 = 0.5 * (lpp * b12 * b12 - lmm * a12 * a12);
            let b16_unit = 0.5 * (lpp * b13_unit * b13_unit - lmm * a13 * a13);
            let b17 = 0.5 * (lpp * b11 * b11 + lmm * a11 * a11);
            let b18 = 0.5 * (lpp * b12 * b12 + lmm * a12 * a12);
            let b19_unit = 0.5 * (lpp * b13_unit * b13_unit + lmm * a13 * a13);
            Ok(CoefficientSet::A(ACoefficients {
                b7,
                b8,
                b9,
                b10,
                b11,
                b12,
                b13_unit,
                b14,
                b15,
                b16_unit,
                b17,
                b18,
                b19_unit,
                alpha0,
                beta0,
                galilean_shift: shift,
            }))
        }
        K::LineShapeI => {
            let plateau_on_plus = report.beta_hat.is_some();
            let (v1, v2) = if plateau_on_plus {
                let a = lp(alpha0, 0);
                let curv = lm(alpha0, 2);
                let v1 = (-6.0 * a / curv).cbrt();
                (v1, -curv * v1 * v1 / 2.0)
            } else {
                let b = lm(beta0, 0);
                let curv = lp(beta0, 2);
                let v1 = (-6.0 * b / curv).cbrt();
                (v1, curv * v1 * v1 / 2.0)
            };
            if v2 <= 0.0 {
                return Err(Error::Domain(format!(
                    "line-shape gap constant not positive: V2 = {v2:e}"
                )));
            }
            Ok(CoefficientSet::B(BCoefficients {
                v1,
                v2,
                plateau_on_plus,
                alpha0,
                beta0,
                galilean_shift: shift,
            }))
        }
        K::LineShapeII => Ok(CoefficientSet::C),
    }
}

/// Result of the cubic inversion for the cusp offset.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CardanoResult {
    pub alpha_tilde: f64,
    /// True when the discriminant was negative (three-real-root region past
    /// the blowup time) and the trigonometric branch was used.
    pub flagged: bool,
}

/// Characteristic offset `a~` from physical offsets by the two-cube-root
/// solution of the leading cubic.
pub fn cardano_alpha(coeffs: &HCoefficients, t_tilde: f64, x_tilde: f64) -> Result<CardanoResult> {
    let p = coeffs.c1 * t_tilde;
    let q = coeffs.c2 * t_tilde * t_tilde + coeffs.c3 * x_tilde;
    let root = cubic::depressed_real_root(p, q);
    let alpha_tilde = root.root;
    let residual = coeffs.b3 * alpha_tilde.powi(3)
        + coeffs.b2 * t_tilde * alpha_tilde
        + coeffs.b1 * t_tilde * t_tilde
        - x_tilde;
    let scale = x_tilde
        .abs()
        .max(coeffs.b1.abs() * t_tilde * t_tilde)
        .max(1e-300);
    if residual.abs() > CARDANO_RESIDUAL_TOL * scale {
        return Err(Error::Numeric(format!(
            "cubic residual {residual:e} exceeds tolerance at scale {scale:e}"
        )));
    }
    Ok(CardanoResult {
        alpha_tilde,
        flagged: root.trig_branch,
    })
}

/// Classify the approach regime of an offset pair.
pub fn classify_regime(
    kind: ScenarioKind,
    t_tilde: f64,
    x_tilde: f64,
    r_low: f64,
    r_high: f64,
) -> Result<Regime> {
    if t_tilde == 0.0 && x_tilde == 0.0 {
        return Err(Error::Domain("regime undefined at the blowup point".into()));
    }
    let p = match kind {
        ScenarioKind::H => 1.5,
        ScenarioKind::A => 3.0,
        _ => {
            return Err(Error::Domain(
                "regime classification applies to cusp and point-shape kinds".into(),
            ))
        }
    };
    let ratio = if t_tilde == 0.0 {
        f64::INFINITY
    } else {
        x_tilde.abs() / t_tilde.abs().powf(p)
    };
    let case = if ratio < r_low {
        RegimeCase::I
    } else if ratio > r_high {
        RegimeCase::II
    } else {
        RegimeCase::III
    };
    Ok(Regime { case, ratio })
}

/// Envelope exponent of the blowup-rate statements along a canonical path,
/// where one is stated.
pub fn expected_exponent(
    kind: ScenarioKind,
    quantity: Quantity,
    path: ApproachPath,
) -> Option<f64> {
    use ApproachPath::*;
    use Quantity::*;
    match (kind, quantity) {
        (ScenarioKind::H, Rho) => match path {
            TimeAxis => Some(-1.0),
            SpaceAxis => Some(-2.0 / 3.0),
            Balanced { .. } => Some(-1.0),
        },
        (ScenarioKind::H, Ux) => match path {
            TimeAxis => Some(-1.0),
            SpaceAxis => Some(-2.0 / 3.0),
            Balanced { .. } => Some(-1.0),
        },
        (ScenarioKind::H, UDeviation) => match path {
            SpaceAxis => Some(1.0 / 3.0),
            Balanced { .. } => Some(1.0 / 3.0),
            TimeAxis => None,
        },
        (ScenarioKind::H, Ut) => match path {
            SpaceAxis => Some(-1.0 / 3.0),
            _ => None,
        },
        (ScenarioKind::H, RhoX) => match path {
            // stated envelope; the attained rate on this path is -5/3
            // because the leading numerator vanishes at the witness pair
            SpaceAxis => Some(-2.0),
            TimeAxis => Some(-3.0),
            _ => None,
        },
        (ScenarioKind::H, RhoT) => match path {
            SpaceAxis => Some(-5.0 / 3.0),
            _ => None,
        },
        (ScenarioKind::A, Rho) => match path {
            TimeAxis => Some(-2.0),
            SpaceAxis => Some(-2.0 / 3.0),
            Balanced { .. } => Some(-2.0 / 3.0),
        },
        (ScenarioKind::A, UDeviation) => match path {
            TimeAxis => Some(2.0),
            SpaceAxis => Some(2.0 / 3.0),
            Balanced { .. } => Some(2.0 / 3.0),
        },
        _ => None,
    }
}

/// Default sample range of the path parameter for a rate fit.
fn default_range(kind: ScenarioKind, path: ApproachPath) -> (f64, f64) {
    match (kind, path) {
        // keep the time-axis preimages of point-shape data well clear of the
        // near-singular Jacobian floor (J ~ s^2 there)
        (ScenarioKind::A, ApproachPath::TimeAxis) => (1e-4, 3e-2),
        _ => (1e-5, 1e-2),
    }
}

/// Fit the blowup rate of `quantity` along `path` by least squares on
/// `log |q|` against `log s`.
///
/// Samples that fail to evaluate (inversion stagnation) or fall below the
/// Jacobian floor are discarded and the effective range reported.
pub fn fit_rates(
    map: &CharMap,
    report: &SingularityReport,
    kind: ScenarioKind,
    quantity: Quantity,
    path: ApproachPath,
    samples: usize,
) -> Result<RateReport> {
    if samples < 8 {
        return Err(Error::Config("rate fits need at least 8 samples".into()));
    }
    let (s_min, s_max) = default_range(kind, path);
    let t0 = report.blowup.t;
    let x0 = report.blowup.x;
    let u_blow = 0.5
        * (map.data().lambda_plus.value(report.beta0)
            + map.data().lambda_minus.value(report.alpha0));
    let p_exp = match kind {
        ScenarioKind::H => 1.5,
        _ => 3.0,
    };
    let mut ss = Vec::with_capacity(samples);
    let mut qs = Vec::with_capacity(samples);
    let mut seed: Option<CharCoord> = None;
    // walk from the farthest sample inward, reusing the previous preimage
    for k in 0..samples {
        let frac = k as f64 / (samples - 1) as f64;
        let s = s_max * (s_min / s_max).powf(frac);
        let q = match path {
            ApproachPath::TimeAxis => PhysCoord::new(t0 - s, x0),
            ApproachPath::SpaceAxis => PhysCoord::new(t0, x0 + s),
            ApproachPath::Balanced { kappa } => PhysCoord::new(t0 - s, x0 + kappa * s.powf(p_exp)),
        };
        let inverted = match seed {
            Some(sd) => map.invert_seeded(q, sd, crate::charmap::DEFAULT_INVERT_TOL),
            None => map.invert(q, crate::charmap::DEFAULT_INVERT_TOL),
        };
        let Ok(coord) = inverted else { continue };
        seed = Some(coord);
        let state = map.state_at(coord)?;
        if state.jacobian.abs() < FIT_MIN_J {
            continue;
        }
        let value = match quantity {
            Quantity::Rho => state.rho,
            Quantity::UDeviation => state.u - u_blow,
            Quantity::Ux => state.u_x,
            Quantity::Ut => state.u_t,
            Quantity::RhoX => state.rho_x,
            Quantity::RhoT => state.rho_t,
        };
        if value.abs() > 0.0 && value.is_finite() {
            ss.push(s);
            qs.push(value);
        }
    }
    if ss.len() < 8 {
        return Err(Error::Numeric(format!(
            "only {} usable samples for the rate fit",
            ss.len()
        )));
    }
    let (slope, r2) = fit::log_log_slope(&ss, &qs);
    let lo = ss.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ss.iter().cloned().fold(0.0f64, f64::max);
    Ok(RateReport {
        quantity,
        path: path.describe(),
        fitted_exponent: slope,
        expected_exponent: expected_exponent(kind, quantity, path),
        r_squared: r2,
        samples_used: ss.len(),
        effective_range: (lo, hi),
    })
}

/// Compare a leading-order prediction against exact inversion values along
/// a sequence of offsets approaching the blowup point (or the singular
/// line). The relative deviation must shrink along the sequence.
pub fn check_gap_quantities(
    map: &CharMap,
    set: &CoefficientSet,
    report: &SingularityReport,
    case: RegimeCase,
    offsets: &[(f64, f64)],
) -> Result<GapReport> {
    let t0 = report.blowup.t;
    let x0 = report.blowup.x;
    let mut rows = Vec::with_capacity(offsets.len());
    let mut seed: Option<CharCoord> = None;
    let mut invert_at = |q: PhysCoord, seed: &mut Option<CharCoord>| -> Result<CharCoord> {
        let coord = match *seed {
            Some(sd) => map.invert_seeded(q, sd, crate::charmap::DEFAULT_INVERT_TOL)?,
            None => map.invert(q, crate::charmap::DEFAULT_INVERT_TOL)?,
        };
        *seed = Some(coord);
        Ok(coord)
    };
    let description;
    match set {
        CoefficientSet::H(h) => {
            description = match case {
                RegimeCase::I => "alpha offset vs -(C2/C1) t~ - C3 x~/(C1 t~)".to_string(),
                _ => "L+(beta) - L-(alpha) vs D2 |x~|^(2/3)".to_string(),
            };
            for &(tt, xt) in offsets {
                let coord = invert_at(PhysCoord::new(t0 + tt, x0 + xt), &mut seed)?;
                let (predicted, actual) = match case {
                    RegimeCase::I => {
                        let pred = -(h.c2 / h.c1) * tt - h.c3 * xt / (h.c1 * tt);
                        (pred, coord.alpha - h.alpha0)
                    }
                    _ => {
                        let gap = map.data().lambda_plus.value(coord.beta)
                            - map.data().lambda_minus.value(coord.alpha);
                        (h.d2 * xt.abs().powf(2.0 / 3.0), gap)
                    }
                };
                rows.push(gap_row(tt, xt, predicted, actual));
            }
        }
        CoefficientSet::A(a) => {
            description = "L+(beta) - L-(alpha) vs B15 |x~|^(2/3)".to_string();
            for &(tt, xt) in offsets {
                let coord = invert_at(PhysCoord::new(t0 + tt, x0 + xt), &mut seed)?;
                let gap = map.data().lambda_plus.value(coord.beta)
                    - map.data().lambda_minus.value(coord.alpha);
                rows.push(gap_row(tt, xt, a.b15 * xt.abs().powf(2.0 / 3.0), gap));
            }
        }
        CoefficientSet::B(b) => {
            description = "L+(beta) - L-(alpha) vs V2 |x~|^(2/3) near the line".to_string();
            for &(tt, xt) in offsets {
                // tt is measured from t0 into the line's interior here
                let coord = invert_at(PhysCoord::new(t0 + tt, x0 + xt), &mut seed)?;
                let gap = map.data().lambda_plus.value(coord.beta)
                    - map.data().lambda_minus.value(coord.alpha);
                rows.push(gap_row(tt, xt, b.v2 * xt.abs().powf(2.0 / 3.0), gap));
            }
        }
        CoefficientSet::C => {
            return Err(Error::Domain(
                "no closed-form gap prediction for doubly degenerate plateaus".into(),
            ))
        }
    }
    let deviation_decreasing = rows
        .windows(2)
        .all(|w: &[GapRow]| w[1].relative_deviation <= w[0].relative_deviation * (1.0 + 1e-9));
    Ok(GapReport {
        description,
        rows,
        deviation_decreasing,
    })
}

fn gap_row(t_tilde: f64, x_tilde: f64, predicted: f64, actual: f64) -> GapRow {
    let scale = actual.abs().max(1e-300);
    GapRow {
        t_tilde,
        x_tilde,
        predicted,
        actual,
        relative_deviation: (predicted - actual).abs() / scale,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charmap::CharMap;
    use crate::initial_data::{builtin_scenario, SmoothCurve};
    use crate::singularity::analyze;
    use approx::assert_abs_diff_eq;

    fn setup(name: &str) -> (CharMap, SingularityReport, CoefficientSet) {
        let sc = builtin_scenario(name).unwrap();
        let mut map = CharMap::new(sc.data.clone(), sc.interval);
        let reports = analyze(&sc, &map).unwrap();
        let report = reports[0].clone();
        map.set_lifespan(Some(report.blowup.t));
        let coeffs = compute_coefficients(map.data(), &report).unwrap();
        (map, report, coeffs)
    }

    #[test]
    fn cusp_tanh_coefficients() {
        let (_, _, coeffs) = setup("cusp-tanh");
        let CoefficientSet::H(h) = coeffs else { panic!() };
        let th2 = 2f64.tanh();
        assert_abs_diff_eq!(h.b2, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(h.b1, -th2 / 2.0, epsilon = 1e-12);
        // the tanh pair gives M = tanh 2 and B3 = M / (3 tanh 2) = 1/3
        assert_abs_diff_eq!(h.m, th2, epsilon = 1e-12);
        assert_abs_diff_eq!(h.b3, 1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(h.d1, -th2, epsilon = 1e-12);
        // the case-I velocity constant collapses to exactly 2 by H4
        assert_abs_diff_eq!(h.c6, 2.0, epsilon = 1e-12);
        assert!(h.c1 < 0.0 && h.c2 < 0.0 && h.c3 < 0.0);
    }

    #[test]
    fn b3_two_routes_agree() {
        let (map, report, coeffs) = setup("cusp-tanh");
        let CoefficientSet::H(h) = coeffs else { panic!() };
        let data = map.data();
        let (a0, b0) = (report.alpha0, report.beta0);
        let a = data.lambda_plus.value(a0);
        let b = data.lambda_minus.value(b0);
        let hp_b = data.lambda_plus.deriv1(b0) - data.lambda_minus.deriv1(b0);
        let hp_a = data.lambda_plus.deriv1(a0) - data.lambda_minus.deriv1(a0);
        let direct = (data.lambda_plus.deriv2(b0) * b * b
            - data.lambda_minus.deriv2(a0) * a * a
            - data.lambda_plus.deriv1(b0) * b * (hp_b - hp_a))
            / (6.0 * a * a * a);
        assert_abs_diff_eq!(h.b3, direct, epsilon = 1e-15);
    }

    #[test]
    fn b3_matches_map_slice_fit() {
        // independent oracle: x~ / a~^3 along the t = t0 slice of the map
        let (map, report, coeffs) = setup("cusp-tanh");
        let CoefficientSet::H(h) = coeffs else { panic!() };
        let mut ratios = Vec::new();
        for at in [2e-2, 1e-2, 5e-3] {
            let alpha = report.alpha0 + at;
            let target = map.time_antiderivative(alpha) + report.blowup.t;
            let beta = map.solve_time_antiderivative(target, 1.5, 2.5).unwrap();
            let q = map.map_fast(CharCoord::new(alpha, beta));
            ratios.push((q.x - report.blowup.x) / (at * at * at));
        }
        // extrapolate the linearly converging sequence
        let extrap = ratios[2] + (ratios[2] - ratios[1]);
        assert!(
            (extrap - h.b3).abs() < 5e-3,
            "slice ratios {ratios:?} vs B3 {}",
            h.b3
        );
    }

    #[test]
    fn coefficients_invariant_under_velocity_shift() {
        // adding one constant to both invariants moves the frame but not
        // the normalized constants
        let sc = builtin_scenario("cusp-tanh").unwrap();
        let shifted_data = InitialDataPair::new(
            SmoothCurve::Sum {
                sum: vec![sc.data.lambda_minus.clone(), SmoothCurve::constant(0.3)],
            },
            SmoothCurve::Sum {
                sum: vec![sc.data.lambda_plus.clone(), SmoothCurve::constant(0.3)],
            },
            1.0,
            1.0,
        );
        let (_, report, base) = setup("cusp-tanh");
        let set = compute_coefficients(&shifted_data, &report).unwrap();
        let (CoefficientSet::H(h0), CoefficientSet::H(h1)) = (base, set) else {
            panic!()
        };
        assert_abs_diff_eq!(h1.galilean_shift, 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(h0.b1, h1.b1, epsilon = 1e-12);
        assert_abs_diff_eq!(h0.b2, h1.b2, epsilon = 1e-12);
        assert_abs_diff_eq!(h0.b3, h1.b3, epsilon = 1e-12);
        assert_abs_diff_eq!(h0.d2, h1.d2, epsilon = 1e-12);
    }

    #[test]
    fn point_shape_coefficients() {
        let (_, _, coeffs) = setup("point-shape");
        let CoefficientSet::A(a) = coeffs else { panic!() };
        // hand-derived values for the parabola pair
        assert_abs_diff_eq!(a.b7, -6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(a.b8, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(a.b9, 12.0, epsilon = 1e-12);
        assert_abs_diff_eq!(a.b10, -6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(a.b11, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(a.b12, 6f64.cbrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(a.b14, 8.0, epsilon = 1e-12);
        assert_abs_diff_eq!(a.b15, 2.0 * 6f64.powf(2.0 / 3.0), epsilon = 1e-12);
        // mirror-symmetric pair: velocity constants cancel at leading order
        assert_abs_diff_eq!(a.b17, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(a.b18, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn line_shape_1_gap_constant() {
        let (_, _, coeffs) = setup("line-shape-1");
        let CoefficientSet::B(b) = coeffs else { panic!() };
        assert!(b.plateau_on_plus);
        // from the map geometry: (-6 L+(alpha0) / L-''(alpha0))^(1/3)
        assert_abs_diff_eq!(b.v1, 48f64.cbrt(), epsilon = 1e-10);
        assert_abs_diff_eq!(b.v2, 48f64.powf(2.0 / 3.0), epsilon = 1e-9);
    }

    #[test]
    fn v1_matches_inversion_oracle() {
        // alpha offset over x~^(1/3) at a mid-line time converges to V1
        let (map, report, coeffs) = setup("line-shape-1");
        let CoefficientSet::B(b) = coeffs else { panic!() };
        let (t0, t_hat) = report.line_extent.unwrap();
        let tmid = 0.5 * (t0 + t_hat);
        let mut ratios = Vec::new();
        for xt in [1e-4f64, 1e-5, 1e-6] {
            let p = map
                .invert(PhysCoord::new(tmid, report.blowup.x + xt), 1e-11)
                .unwrap();
            ratios.push((p.alpha - report.alpha0) / xt.cbrt());
        }
        // corrections decay like x~^(1/3); extrapolate one step
        let extrap = ratios[2] + (ratios[2] - ratios[1]) / (10f64.cbrt() - 1.0);
        assert!(
            (extrap - b.v1).abs() < 0.02 * b.v1,
            "ratios {ratios:?} vs V1 {}",
            b.v1
        );
    }

    #[test]
    fn cardano_time_zero_collapses() {
        let (_, _, coeffs) = setup("cusp-tanh");
        let CoefficientSet::H(h) = coeffs else { panic!() };
        let r = cardano_alpha(&h, 0.0, 1e-4).unwrap();
        assert!(!r.flagged);
        assert_abs_diff_eq!(r.alpha_tilde, (-h.c3 * 1e-4).cbrt(), epsilon = 1e-12);
        let r0 = cardano_alpha(&h, 0.0, 0.0).unwrap();
        assert_eq!(r0.alpha_tilde, 0.0);
    }

    #[test]
    fn cardano_small_offsets_residual() {
        let (_, _, coeffs) = setup("cusp-tanh");
        let CoefficientSet::H(h) = coeffs else { panic!() };
        let r = cardano_alpha(&h, -1e-3, 1e-5).unwrap();
        let res =
            h.b3 * r.alpha_tilde.powi(3) + h.b2 * (-1e-3) * r.alpha_tilde + h.b1 * 1e-6 - 1e-5;
        assert!(res.abs() <= 1e-12);
    }

    #[test]
    fn cardano_random_residuals() {
        let (_, _, coeffs) = setup("cusp-tanh");
        let CoefficientSet::H(h) = coeffs else { panic!() };
        let mut state = 0x2545f4914f6cdd1du64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state as f64 / u64::MAX as f64
        };
        let mut flagged = 0usize;
        for _ in 0..1000 {
            let tt = (next() * 2.0 - 1.0) * 1e-2;
            let xt = (next() * 2.0 - 1.0) * 1e-3;
            let r = cardano_alpha(&h, tt, xt).unwrap();
            if r.flagged {
                flagged += 1;
            }
        }
        // both discriminant branches should appear in the sample cloud
        assert!(flagged > 0 && flagged < 1000);
    }

    #[test]
    fn regime_classification_examples() {
        let r = classify_regime(ScenarioKind::H, -1e-2, 1e-6, REGIME_LOW, REGIME_HIGH).unwrap();
        assert_eq!(r.case, RegimeCase::I);
        assert_abs_diff_eq!(r.ratio, 1e-3, epsilon = 1e-12);
        let r = classify_regime(ScenarioKind::H, -1e-4, 1e-2, REGIME_LOW, REGIME_HIGH).unwrap();
        assert_eq!(r.case, RegimeCase::II);
        let r = classify_regime(ScenarioKind::H, -1e-2, 1e-3, REGIME_LOW, REGIME_HIGH).unwrap();
        assert_eq!(r.case, RegimeCase::III);
        assert_abs_diff_eq!(r.ratio, 1.0, epsilon = 1e-12);
        assert!(classify_regime(ScenarioKind::H, 0.0, 0.0, 0.1, 10.0).is_err());
    }

    #[test]
    fn regime_stable_along_balanced_path() {
        for k in 1..8 {
            let tt = -(10f64).powi(-k);
            let xt = tt.abs().powf(1.5);
            let r = classify_regime(ScenarioKind::H, tt, xt, REGIME_LOW, REGIME_HIGH).unwrap();
            assert_eq!(r.case, RegimeCase::III);
        }
    }

    #[test]
    fn d1_two_routes_bit_identical() {
        let (map, report, coeffs) = setup("cusp-tanh");
        let CoefficientSet::H(h) = coeffs else { panic!() };
        let direct = d1_direct(map.data(), report.beta0, h.galilean_shift);
        assert_eq!(h.d1.to_bits(), direct.to_bits());
    }

    #[test]
    fn gap_prediction_case_i_improves() {
        let (map, report, coeffs) = setup("cusp-tanh");
        let offsets = [(-1e-2, 0.0), (-1e-3, 0.0), (-1e-4, 0.0)];
        let gap = check_gap_quantities(&map, &coeffs, &report, RegimeCase::I, &offsets).unwrap();
        assert!(gap.deviation_decreasing, "{:?}", gap.rows);
    }

    #[test]
    fn gap_prediction_case_ii_improves() {
        let (map, report, coeffs) = setup("cusp-tanh");
        let offsets = [(0.0, 1e-2), (0.0, 1e-3), (0.0, 1e-4)];
        let gap = check_gap_quantities(&map, &coeffs, &report, RegimeCase::II, &offsets).unwrap();
        assert!(gap.deviation_decreasing, "{:?}", gap.rows);
        assert!(gap.rows.last().unwrap().relative_deviation < 0.05);
    }

    #[test]
    fn gap_prediction_point_shape_case_ii() {
        let (map, report, coeffs) = setup("point-shape");
        let offsets = [(0.0, 1e-2), (0.0, 1e-3), (0.0, 1e-4)];
        let gap = check_gap_quantities(&map, &coeffs, &report, RegimeCase::II, &offsets).unwrap();
        assert!(gap.deviation_decreasing, "{:?}", gap.rows);
    }

    #[test]
    fn gap_prediction_line_shape_mid_line() {
        let (map, report, coeffs) = setup("line-shape-1");
        let (t0, t_hat) = report.line_extent.unwrap();
        let dt = 0.5 * (t_hat - t0);
        let offsets = [(dt, 1e-3), (dt, 1e-4), (dt, 1e-5)];
        let gap = check_gap_quantities(&map, &coeffs, &report, RegimeCase::II, &offsets).unwrap();
        assert!(gap.deviation_decreasing, "{:?}", gap.rows);
    }

    #[test]
    fn rate_fit_rho_time_axis_cusp() {
        let (map, report, _) = setup("cusp-tanh");
        let r = fit_rates(
            &map,
            &report,
            ScenarioKind::H,
            Quantity::Rho,
            ApproachPath::TimeAxis,
            16,
        )
        .unwrap();
        assert!((r.fitted_exponent - (-1.0)).abs() < 0.05, "{r:?}");
        assert!(r.r_squared >= 0.999);
        assert!(r.effective_range.1 / r.effective_range.0 >= 100.0);
    }

    #[test]
    fn rate_fit_rho_space_axis_point_shape() {
        let (map, report, _) = setup("point-shape");
        let r = fit_rates(
            &map,
            &report,
            ScenarioKind::A,
            Quantity::Rho,
            ApproachPath::SpaceAxis,
            16,
        )
        .unwrap();
        assert!((r.fitted_exponent - (-2.0 / 3.0)).abs() < 0.05, "{r:?}");
        assert!(r.r_squared >= 0.999);
    }
}
