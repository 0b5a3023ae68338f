//! The singular set of the coordinate map, fold/cusp classification, blowup
//! point and life span, and the envelope branches with their monotonicity
//! and concavity certificates.
//!
//! A parameter pair is singular exactly when `L-(alpha) = L+(beta)`; under
//! the cusp hypotheses this set is a strictly increasing curve
//! `beta = beta(alpha)` and its image under the map degenerates at a single
//! cusp point where the indicator `f` vanishes. Point-shape data collapse
//! the set to isolated pairs; plateau data stretch it into segments (or a
//! rectangle) that the map sends onto a vertical line.

use serde::{Deserialize, Serialize};

use crate::charmap::{CharCoord, CharMap, PhysCoord, DEFAULT_QUAD_TOL};
use crate::error::{Error, Result};
use crate::initial_data::{
    cusp_indicator, sigma_beta, validate_assumptions, AssumptionReport, AssumptionSet, Scenario,
};
use crate::numerics::roots;

/// First-derivative threshold of the fold/cusp split, scaled by the local
/// curve size.
pub const FOLD_TOL: f64 = 1e-7;
/// Matching tolerance for membership in the singular set.
pub const SIGMA_TOL: f64 = 1e-10;
/// Bracket width for the golden-section refinement of the life span.
const LIFESPAN_XTOL: f64 = 1e-12;
/// Step for second-derivative finite differences along the singular curve.
const CURVE_FD_STEP: f64 = 1e-4;

/// The singular curve sampled over an alpha grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SigmaCurve {
    /// Increasing alpha samples that belong to the singular set.
    pub alphas: Vec<f64>,
    /// Matching beta values, `L-(alpha_i) = L+(beta_i)` within [`SIGMA_TOL`].
    pub betas: Vec<f64>,
    /// Indicator `f` at each sample.
    pub f_values: Vec<f64>,
    /// Alpha samples of the requested grid with no match in the window.
    pub absent: Vec<f64>,
}

/// Classification of one singular-curve point under the map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PointClass {
    /// Not on the singular set.
    Regular,
    /// First derivative of the curve image does not vanish.
    Fold,
    /// First derivative vanishes, second does not.
    Cusp,
    /// Both vanish within tolerance (plateau degeneracies).
    DegenerateBeyondCusp,
}

/// Which singular structure a scenario produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SingularityKind {
    /// Cusp of the characteristic map (H data).
    Cusp,
    /// Delta-like point singularity (A data).
    PointShape,
    /// Delta-like vertical segment, one plateau (B data).
    LineShapeI,
    /// Delta-like vertical segment, two plateaus (C data).
    LineShapeII,
}

/// Everything known about one singularity of a scenario.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SingularityReport {
    pub kind: SingularityKind,
    pub blowup: PhysCoord,
    pub alpha0: f64,
    pub beta0: f64,
    pub alpha_hat: Option<f64>,
    pub beta_hat: Option<f64>,
    /// `(t0, t_hat)` for the line-shape kinds.
    pub line_extent: Option<(f64, f64)>,
    /// Sampled singular-curve alphas classified as folds.
    pub fold_points: Vec<f64>,
    /// Sampled alphas classified as cusps.
    pub cusp_points: Vec<f64>,
    /// True when `t0` was certified as the minimum of `t` over the sampled
    /// singular curve.
    pub t0_is_min_certified: bool,
}

/// One sampled point of an envelope branch with its certificate data.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EnvelopeSample {
    pub alpha: f64,
    pub point: PhysCoord,
    /// `dt/dx` along the branch, `1 / L-(alpha)` on the singular curve.
    pub dt_dx: f64,
    /// `d^2 t / dx^2` along the branch (closed form).
    pub d2t_dx2: f64,
}

/// The two envelope branches with sign certificates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Envelope {
    /// Branch from `alpha < alpha0` (increasing in x, concave).
    pub left: Vec<EnvelopeSample>,
    /// Branch from `alpha > alpha0` (decreasing in x, concave).
    pub right: Vec<EnvelopeSample>,
    /// Common endpoint of both branches (the blowup point).
    pub apex: PhysCoord,
    /// Sign-certificate failures, if any.
    pub violations: Vec<String>,
}

/// Sample the singular curve over `alpha_range` with `n` grid points.
pub fn build_sigma(map: &CharMap, alpha_range: (f64, f64), n: usize) -> Result<SigmaCurve> {
    if n < 2 || alpha_range.0 >= alpha_range.1 {
        return Err(Error::Config("bad sigma grid".into()));
    }
    let data = map.data();
    let interval = map.interval();
    let mut curve = SigmaCurve {
        alphas: Vec::new(),
        betas: Vec::new(),
        f_values: Vec::new(),
        absent: Vec::new(),
    };
    for i in 0..n {
        let alpha = alpha_range.0 + (alpha_range.1 - alpha_range.0) * i as f64 / (n - 1) as f64;
        match sigma_beta(data, alpha, interval) {
            Some(beta) if beta > alpha => {
                curve.alphas.push(alpha);
                curve.betas.push(beta);
                curve.f_values.push(cusp_indicator(data, alpha, beta));
            }
            _ => curve.absent.push(alpha),
        }
    }
    Ok(curve)
}

/// Image of the singular curve at `alpha` (`None` off the curve).
fn sigma_image(map: &CharMap, alpha: f64) -> Option<PhysCoord> {
    let beta = sigma_beta(map.data(), alpha, map.interval())?;
    Some(map.map_fast(CharCoord::new(alpha, beta)))
}

/// Classify a singular-curve point as fold, cusp, or degenerate.
///
/// The first derivative of the curve image is evaluated in closed form
/// (proportional to the indicator `f`); when it vanishes within a
/// scale-aware band the second derivative is probed by a centered
/// difference along the curve.
pub fn classify_point(map: &CharMap, alpha: f64) -> PointClass {
    let data = map.data();
    let interval = map.interval();
    let beta = match sigma_beta(data, alpha, interval) {
        Some(beta) if beta > alpha => {
            if (data.lambda_minus.value(alpha) - data.lambda_plus.value(beta)).abs() > SIGMA_TOL {
                return PointClass::Regular;
            }
            beta
        }
        _ => {
            // no bracketed match; a plateau can still close the gap to zero
            let n = 4096;
            let mut best = f64::INFINITY;
            for i in 0..=n {
                let b = interval.0 + (interval.1 - interval.0) * i as f64 / n as f64;
                if b <= alpha {
                    continue;
                }
                best =
                    best.min((data.lambda_plus.value(b) - data.lambda_minus.value(alpha)).abs());
            }
            if best <= SIGMA_TOL {
                return PointClass::DegenerateBeyondCusp;
            }
            return PointClass::Regular;
        }
    };
    let lp_prime = data.lambda_plus.deriv1(beta);
    let q = map.map_fast(CharCoord::new(alpha, beta));
    let scale = 1.0 + q.t.abs().max(q.x.abs());
    if lp_prime.abs() < SIGMA_TOL {
        // the singular set is not a graph over alpha here (plateau junction)
        return PointClass::DegenerateBeyondCusp;
    }
    let f = cusp_indicator(data, alpha, beta);
    let d1_t = f / lp_prime;
    let d1_x = data.lambda_plus.value(beta) * f / lp_prime;
    if d1_t.abs().max(d1_x.abs()) > FOLD_TOL * scale {
        return PointClass::Fold;
    }
    // second derivative along the curve by centered difference
    let h = CURVE_FD_STEP * (1.0 + alpha.abs());
    let (qm, qp) = match (sigma_image(map, alpha - h), sigma_image(map, alpha + h)) {
        (Some(a), Some(b)) => (a, b),
        _ => return PointClass::DegenerateBeyondCusp,
    };
    let d2_t = (qp.t - 2.0 * q.t + qm.t) / (h * h);
    let d2_x = (qp.x - 2.0 * q.x + qm.x) / (h * h);
    if d2_t.abs().max(d2_x.abs()) > FOLD_TOL * scale {
        PointClass::Cusp
    } else {
        PointClass::DegenerateBeyondCusp
    }
}

/// Blowup point from a witness pair, by the same quadrature as the forward
/// map.
pub fn blowup_point(map: &CharMap, witnesses: (f64, f64)) -> Result<PhysCoord> {
    map.map_forward(CharCoord::new(witnesses.0, witnesses.1), DEFAULT_QUAD_TOL)
}

/// Both envelope branches within `eps` of the cusp parameter, with sign
/// certificates for monotonicity and concavity.
pub fn envelope(
    map: &CharMap,
    sigma: &SigmaCurve,
    eps: f64,
    samples_per_branch: usize,
) -> Result<Envelope> {
    let data = map.data();
    let alpha0 = cusp_alpha(map, sigma)?;
    let beta0 = sigma_beta(data, alpha0, map.interval()).ok_or(Error::NoBlowupDetected)?;
    let apex = map.map_fast(CharCoord::new(alpha0, beta0));
    let mut violations = Vec::new();
    let branch = |left: bool, violations: &mut Vec<String>| -> Vec<EnvelopeSample> {
        let mut out = Vec::with_capacity(samples_per_branch);
        for k in 0..samples_per_branch {
            // stay strictly off alpha0, where the certificates degenerate
            let frac = (k as f64 + 0.5) / samples_per_branch as f64;
            let alpha = if left {
                alpha0 - eps * (1.0 - frac)
            } else {
                alpha0 + eps * frac
            };
            let Some(beta) = sigma_beta(data, alpha, map.interval()) else {
                violations.push(format!("no sigma match at alpha = {alpha}"));
                continue;
            };
            let point = map.map_fast(CharCoord::new(alpha, beta));
            let lm = data.lambda_minus.value(alpha);
            let f = cusp_indicator(data, alpha, beta);
            let dt_dx = 1.0 / lm;
            let d2t_dx2 = -data.lambda_minus.deriv1(alpha) * data.lambda_plus.deriv1(beta)
                / (lm * lm * data.lambda_plus.value(beta) * f);
            out.push(EnvelopeSample {
                alpha,
                point,
                dt_dx,
                d2t_dx2,
            });
        }
        out
    };
    let left = branch(true, &mut violations);
    let right = branch(false, &mut violations);
    for s in &left {
        if s.dt_dx <= 0.0 {
            violations.push(format!("left branch dt/dx <= 0 at alpha = {}", s.alpha));
        }
        if s.d2t_dx2 >= 0.0 {
            violations.push(format!("left branch d2t/dx2 >= 0 at alpha = {}", s.alpha));
        }
    }
    for s in &right {
        if s.dt_dx >= 0.0 {
            violations.push(format!("right branch dt/dx >= 0 at alpha = {}", s.alpha));
        }
        if s.d2t_dx2 >= 0.0 {
            violations.push(format!("right branch d2t/dx2 >= 0 at alpha = {}", s.alpha));
        }
    }
    Ok(Envelope {
        left,
        right,
        apex,
        violations,
    })
}

/// Default envelope half-width: half the distance from the cusp parameter
/// to the nearest other sign-structure change of `f`, capped by the sampled
/// window.
pub fn suggested_eps(sigma: &SigmaCurve, alpha0: f64) -> f64 {
    let mut nearest = f64::INFINITY;
    for i in 0..sigma.f_values.len().saturating_sub(1) {
        let (f1, f2) = (sigma.f_values[i], sigma.f_values[i + 1]);
        let a_mid = 0.5 * (sigma.alphas[i] + sigma.alphas[i + 1]);
        if f1 != 0.0 && f2 != 0.0 && f1.signum() != f2.signum() && (a_mid - alpha0).abs() > 1e-9 {
            nearest = nearest.min((a_mid - alpha0).abs());
        }
    }
    let lo = sigma.alphas.first().copied().unwrap_or(alpha0 - 1.0);
    let hi = sigma.alphas.last().copied().unwrap_or(alpha0 + 1.0);
    let edge = (alpha0 - lo).min(hi - alpha0).max(1e-6);
    0.5 * nearest.min(edge)
}

fn cusp_alpha(map: &CharMap, sigma: &SigmaCurve) -> Result<f64> {
    for i in 0..sigma.alphas.len().saturating_sub(1) {
        let (f1, f2) = (sigma.f_values[i], sigma.f_values[i + 1]);
        if f1 == 0.0 {
            return Ok(sigma.alphas[i]);
        }
        if f2 != 0.0 && f1.signum() != f2.signum() {
            let data = map.data();
            let interval = map.interval();
            return roots::bisect(
                |a| {
                    sigma_beta(data, a, interval)
                        .map(|b| cusp_indicator(data, a, b))
                        .unwrap_or(f64::NAN)
                },
                sigma.alphas[i],
                sigma.alphas[i + 1],
            )
            .ok_or(Error::NoBlowupDetected);
        }
    }
    Err(Error::NoBlowupDetected)
}

/// Life span: the minimum of `t` over the singular set inside the scan
/// window, refined by golden section along the singular curve.
pub fn lifespan(map: &CharMap) -> Result<f64> {
    let interval = map.interval();
    let n = 400;
    let mut best: Option<(f64, f64)> = None; // (t, alpha)
    for i in 0..n {
        let alpha = interval.0 + (interval.1 - interval.0) * i as f64 / (n - 1) as f64;
        if let Some(q) = sigma_image_checked(map, alpha) {
            if q.t >= 0.0 && best.map_or(true, |(t, _)| q.t < t) {
                best = Some((q.t, alpha));
            }
        }
    }
    let Some((coarse_t, alpha_at_min)) = best else {
        return Err(Error::NoBlowupDetected);
    };
    let h = (interval.1 - interval.0) / (n as f64 - 1.0);
    let lo = (alpha_at_min - h).max(interval.0);
    let hi = (alpha_at_min + h).min(interval.1);
    let refined = roots::golden_section_min(
        |a| {
            sigma_image_checked(map, a)
                .map(|q| q.t)
                .unwrap_or(f64::INFINITY)
        },
        lo,
        hi,
        LIFESPAN_XTOL,
    );
    let t_refined = sigma_image_checked(map, refined)
        .map(|q| q.t)
        .unwrap_or(coarse_t);
    Ok(t_refined.min(coarse_t))
}

fn sigma_image_checked(map: &CharMap, alpha: f64) -> Option<PhysCoord> {
    let data = map.data();
    let beta = sigma_beta(data, alpha, map.interval())?;
    if beta <= alpha {
        return None;
    }
    if (data.lambda_minus.value(alpha) - data.lambda_plus.value(beta)).abs() > SIGMA_TOL {
        return None;
    }
    Some(map.map_fast(CharCoord::new(alpha, beta)))
}

/// Full singularity analysis of a scenario (validates it first).
/// Multi-point data produce one report per witness pair.
pub fn analyze(scenario: &Scenario, map: &CharMap) -> Result<Vec<SingularityReport>> {
    let report = validate_assumptions(
        &scenario.data,
        scenario.advertised_set,
        scenario.interval,
        400,
        crate::initial_data::EQUALITY_TOL,
    )?;
    if !report.satisfied {
        return Err(Error::Domain(format!(
            "scenario '{}' does not satisfy its advertised set {}: {:?}",
            scenario.name,
            scenario.advertised_set.label(),
            report
                .violations
                .iter()
                .map(|v| v.condition.clone())
                .collect::<Vec<_>>()
        )));
    }
    analyze_validated(scenario.advertised_set, &report, map)
}

/// Analysis from an existing validation report.
pub fn analyze_validated(
    set: AssumptionSet,
    validation: &AssumptionReport,
    map: &CharMap,
) -> Result<Vec<SingularityReport>> {
    let w = &validation.witnesses;
    match set {
        AssumptionSet::H => {
            let alpha0 = w.alpha0.ok_or(Error::NoBlowupDetected)?;
            let beta0 = w.beta0.ok_or(Error::NoBlowupDetected)?;
            let blowup = blowup_point(map, (alpha0, beta0))?;
            // classify a spread of singular-curve samples around the cusp
            let spread = 1.0f64.min(0.25 * (map.interval().1 - map.interval().0));
            let mut fold_points = Vec::new();
            let mut cusp_points = Vec::new();
            for k in 0..41 {
                let alpha = alpha0 - spread + 2.0 * spread * k as f64 / 40.0;
                match classify_point(map, alpha) {
                    PointClass::Fold => fold_points.push(alpha),
                    PointClass::Cusp => cusp_points.push(alpha),
                    _ => {}
                }
            }
            let t_min = lifespan(map)?;
            let certified = (t_min - blowup.t).abs() <= 1e-8 * (1.0 + blowup.t.abs());
            Ok(vec![SingularityReport {
                kind: SingularityKind::Cusp,
                blowup,
                alpha0,
                beta0,
                alpha_hat: None,
                beta_hat: None,
                line_extent: None,
                fold_points,
                cusp_points,
                t0_is_min_certified: certified,
            }])
        }
        AssumptionSet::A => {
            let alpha0 = w.alpha0.ok_or(Error::NoBlowupDetected)?;
            let beta0 = w.beta0.ok_or(Error::NoBlowupDetected)?;
            let blowup = blowup_point(map, (alpha0, beta0))?;
            Ok(vec![SingularityReport {
                kind: SingularityKind::PointShape,
                blowup,
                alpha0,
                beta0,
                alpha_hat: None,
                beta_hat: None,
                line_extent: None,
                fold_points: Vec::new(),
                cusp_points: Vec::new(),
                t0_is_min_certified: true,
            }])
        }
        AssumptionSet::APrime => {
            let mut out = Vec::new();
            for &alpha in &w.alpha_list {
                for &beta in &w.beta_list {
                    if alpha < beta {
                        let blowup = blowup_point(map, (alpha, beta))?;
                        out.push(SingularityReport {
                            kind: SingularityKind::PointShape,
                            blowup,
                            alpha0: alpha,
                            beta0: beta,
                            alpha_hat: None,
                            beta_hat: None,
                            line_extent: None,
                            fold_points: Vec::new(),
                            cusp_points: Vec::new(),
                            t0_is_min_certified: true,
                        });
                    }
                }
            }
            if out.is_empty() {
                return Err(Error::NoBlowupDetected);
            }
            Ok(out)
        }
        AssumptionSet::BRight | AssumptionSet::BLeft | AssumptionSet::C => {
            let alpha0 = w.alpha0.ok_or(Error::NoBlowupDetected)?;
            let beta0 = w.beta0.ok_or(Error::NoBlowupDetected)?;
            let blowup = blowup_point(map, (alpha0, beta0))?;
            let far_alpha = w.alpha_hat.unwrap_or(alpha0);
            let far_beta = w.beta_hat.unwrap_or(beta0);
            let t_hat = blowup_point(map, (far_alpha, far_beta))?.t;
            let kind = if set == AssumptionSet::C {
                SingularityKind::LineShapeII
            } else {
                SingularityKind::LineShapeI
            };
            Ok(vec![SingularityReport {
                kind,
                blowup,
                alpha0,
                beta0,
                alpha_hat: w.alpha_hat,
                beta_hat: w.beta_hat,
                line_extent: Some((blowup.t, t_hat)),
                fold_points: Vec::new(),
                cusp_points: Vec::new(),
                t0_is_min_certified: true,
            }])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial_data::{builtin_scenario, constant_state};
    use approx::assert_abs_diff_eq;

    fn map_for(name: &str) -> (Scenario, CharMap) {
        let sc = builtin_scenario(name).unwrap();
        let map = CharMap::new(sc.data.clone(), sc.interval);
        (sc, map)
    }

    #[test]
    fn sigma_of_cusp_tanh_is_shifted_diagonal() {
        // tanh(2 - beta) = -tanh(alpha) solves to beta = alpha + 2
        let (_, map) = map_for("cusp-tanh");
        let sigma = build_sigma(&map, (-1.0, 1.0), 201).unwrap();
        assert!(sigma.absent.is_empty());
        for (a, b) in sigma.alphas.iter().zip(&sigma.betas) {
            assert_abs_diff_eq!(b - a, 2.0, epsilon = 1e-9);
        }
        let mid = sigma.alphas.len() / 2;
        assert_abs_diff_eq!(sigma.alphas[mid], 0.0, epsilon = 1e-12);
        assert!(sigma.f_values[mid].abs() < 1e-12);
        for w in sigma.betas.windows(2) {
            assert!(w[1] > w[0]);
        }
    }

    #[test]
    fn sigma_membership_tolerance() {
        let (_, map) = map_for("cusp-tanh");
        let sigma = build_sigma(&map, (-1.0, 1.0), 101).unwrap();
        let data = map.data();
        for (a, b) in sigma.alphas.iter().zip(&sigma.betas) {
            let gap = (data.lambda_minus.value(*a) - data.lambda_plus.value(*b)).abs();
            assert!(gap <= 1e-10);
            let j = map.jacobian(CharCoord::new(*a, *b)).det.abs();
            assert!(j <= 1e-8, "J = {j:e}");
        }
    }

    #[test]
    fn degenerate_linear_sigma() {
        let (_, map) = map_for("degenerate-linear");
        let sigma = build_sigma(&map, (-1.0, 1.0), 101).unwrap();
        for ((a, b), f) in sigma.alphas.iter().zip(&sigma.betas).zip(&sigma.f_values) {
            assert_abs_diff_eq!(b - a, 2.0, epsilon = 1e-10);
            assert!(f.abs() <= 1e-12);
        }
    }

    #[test]
    fn classification_on_cusp_tanh() {
        let (_, map) = map_for("cusp-tanh");
        assert_eq!(classify_point(&map, 0.0), PointClass::Cusp);
        assert_eq!(classify_point(&map, 0.3), PointClass::Fold);
        assert_eq!(classify_point(&map, -0.7), PointClass::Fold);
        let (_, ps) = map_for("point-shape");
        assert_eq!(classify_point(&ps, 1.0), PointClass::Regular);
    }

    #[test]
    fn blowup_point_point_shape_closed_form() {
        let (_, map) = map_for("point-shape");
        let q = blowup_point(&map, (0.0, 2.0)).unwrap();
        assert_abs_diff_eq!(q.t, std::f64::consts::FRAC_PI_4, epsilon = 1e-12);
        assert_abs_diff_eq!(q.x, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn blowup_point_cusp_tanh_antisymmetry() {
        let (_, map) = map_for("cusp-tanh");
        let q = blowup_point(&map, (0.0, 2.0)).unwrap();
        assert_abs_diff_eq!(q.x, 1.0, epsilon = 1e-12);
        assert!(q.t > 0.0);
    }

    #[test]
    fn line_shape_1_extent() {
        let (sc, map) = map_for("line-shape-1");
        let reports = analyze(&sc, &map).unwrap();
        assert_eq!(reports.len(), 1);
        let r = &reports[0];
        assert_eq!(r.kind, SingularityKind::LineShapeI);
        let (t0, t_hat) = r.line_extent.unwrap();
        assert!(t_hat > t0);
        // plateau leg contributes exactly int_2^3 dz/z^2 = 1/6 of extra time
        assert_abs_diff_eq!(t_hat - t0, 1.0 / 6.0, epsilon = 1e-9);
        // the line is vertical: x(alpha0, beta) constant across the plateau
        let xs: Vec<f64> = [2.0, 2.3, 2.7, 3.0]
            .iter()
            .map(|&b| map.map_fast(CharCoord::new(0.0, b)).x)
            .collect();
        for w in xs.windows(2) {
            assert_abs_diff_eq!(w[0], w[1], epsilon = 1e-10);
        }
    }

    #[test]
    fn line_shape_2_extent() {
        let (sc, map) = map_for("line-shape-2");
        let reports = analyze(&sc, &map).unwrap();
        let r = &reports[0];
        assert_eq!(r.kind, SingularityKind::LineShapeII);
        let (t0, t_hat) = r.line_extent.unwrap();
        // two plateau legs of 19/648 each
        assert_abs_diff_eq!(t_hat - t0, 19.0 / 324.0, epsilon = 1e-9);
    }

    #[test]
    fn lifespan_matches_blowup_time() {
        let (sc, map) = map_for("cusp-tanh");
        let reports = analyze(&sc, &map).unwrap();
        let t0 = reports[0].blowup.t;
        let span = lifespan(&map).unwrap();
        assert_abs_diff_eq!(span, t0, epsilon = 1e-9);
        assert!(reports[0].t0_is_min_certified);
    }

    #[test]
    fn lifespan_constant_state_no_blowup() {
        let sc = constant_state();
        let map = CharMap::new(sc.data, sc.interval);
        assert!(matches!(lifespan(&map), Err(Error::NoBlowupDetected)));
    }

    #[test]
    fn second_difference_of_t_positive_at_cusp() {
        let (_, map) = map_for("cusp-tanh");
        let h = 1e-3;
        let tm = sigma_image_checked(&map, -h).unwrap().t;
        let t0 = sigma_image_checked(&map, 0.0).unwrap().t;
        let tp = sigma_image_checked(&map, h).unwrap().t;
        assert!(tp - 2.0 * t0 + tm > 0.0);
    }

    #[test]
    fn envelope_certificates_cusp_tanh() {
        let (_, map) = map_for("cusp-tanh");
        let sigma = build_sigma(&map, (-1.0, 1.0), 201).unwrap();
        let env = envelope(&map, &sigma, 0.5, 200).unwrap();
        assert!(env.violations.is_empty(), "{:?}", env.violations);
        assert_eq!(env.left.len(), 200);
        assert_eq!(env.right.len(), 200);
        for s in env.left.iter() {
            assert!(s.dt_dx > 0.0);
            assert!(s.d2t_dx2 < 0.0);
        }
        for s in env.right.iter() {
            assert!(s.dt_dx < 0.0);
            assert!(s.d2t_dx2 < 0.0);
        }
        // both branches terminate at the blowup point
        let blow = blowup_point(&map, (0.0, 2.0)).unwrap();
        assert_abs_diff_eq!(env.apex.t, blow.t, epsilon = 1e-10);
        assert_abs_diff_eq!(env.apex.x, blow.x, epsilon = 1e-10);
    }

    #[test]
    fn cusp_indicator_unique_sign_change_near_witness() {
        let (_, map) = map_for("cusp-tanh");
        let sigma = build_sigma(&map, (-0.5, 0.5), 401).unwrap();
        // count sign transitions over the nonzero samples (the cusp sample
        // itself evaluates to exactly zero)
        let signs: Vec<f64> = sigma
            .f_values
            .iter()
            .filter(|f| **f != 0.0)
            .map(|f| f.signum())
            .collect();
        let changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
        assert_eq!(changes, 1);
    }

    #[test]
    fn multi_point_two_reports() {
        let (sc, map) = map_for("multi-point");
        let reports = analyze(&sc, &map).unwrap();
        assert_eq!(reports.len(), 2);
        assert!(reports.iter().all(|r| r.kind == SingularityKind::PointShape));
        assert!(reports[0].blowup.t > 0.0 && reports[1].blowup.t > 0.0);
        assert!(reports[0].blowup.t < reports[1].blowup.t);
    }

    #[test]
    fn closed_form_indicator_slope_matches_finite_difference() {
        // with L-(alpha0) = L+(beta0) = 0 the indicator slope has the closed
        // form [L-'' a^2 - b^2 L+'' + L+'(b0) b (h'_b - h'_a)] / (-b a^2)
        // with a = L+(alpha0), b = L-(beta0); for the tanh pair this is -2
        let (_, map) = map_for("cusp-tanh");
        let data = map.data();
        let (alpha0, beta0) = (0.0, 2.0);
        let a = data.lambda_plus.value(alpha0);
        let b = data.lambda_minus.value(beta0);
        let hp_b = data.lambda_plus.deriv1(beta0) - data.lambda_minus.deriv1(beta0);
        let hp_a = data.lambda_plus.deriv1(alpha0) - data.lambda_minus.deriv1(alpha0);
        let num = data.lambda_minus.deriv2(alpha0) * a * a
            - b * b * data.lambda_plus.deriv2(beta0)
            + data.lambda_plus.deriv1(beta0) * b * (hp_b - hp_a);
        let closed = num / (-b * a * a);
        assert_abs_diff_eq!(closed, -2.0, epsilon = 1e-12);
        // finite-difference slope along the singular curve agrees to 1e-4
        let h = 1e-5;
        let fp = cusp_indicator(data, h, sigma_beta(data, h, map.interval()).unwrap());
        let fm = cusp_indicator(data, -h, sigma_beta(data, -h, map.interval()).unwrap());
        let fd = (fp - fm) / (2.0 * h);
        assert!((fd - closed).abs() <= 1e-4 * closed.abs());
    }
}
