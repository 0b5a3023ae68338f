//! The characteristic-coordinate map and the classical solution.
//!
//! A point is addressed either by the feet `(alpha, beta)` of the two
//! characteristics through it or by its physical coordinates `(t, x)`. The
//! forward map is
//!
//! ```text
//! t(a, b) = int_a^b dz / (L+(z) - L-(z))
//! x(a, b) = (a + b)/2 + (1/2) int_a^b (L+(z) + L-(z)) / (L+(z) - L-(z)) dz
//! ```
//!
//! and the solution is transported exactly: `lambda_- = L-(alpha)`,
//! `lambda_+ = L+(beta)`.
//!
//! Naming follows the source convention for this system: the curve family
//! written `x^+` propagates with speed `lambda_-` and the family `x^-` with
//! speed `lambda_+` — the opposite of the usual labels. Concretely, the
//! plus-family line fixes `beta` and the minus-family line fixes `alpha`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::initial_data::InitialDataPair;
use crate::numerics::{quad, roots};

/// Default absolute quadrature tolerance for the coordinate integrals.
pub const DEFAULT_QUAD_TOL: f64 = 1e-12;
/// Default inversion tolerance on `|Pi(p) - q|`.
pub const DEFAULT_INVERT_TOL: f64 = 1e-10;
/// Acceptance margin on `t <= t0 + margin` for the existence-domain guard.
const LIFESPAN_MARGIN: f64 = 1e-9;
/// Seed grid resolution per axis for inversion.
const SEED_N: usize = 64;
const NEWTON_MAX_ITERS: usize = 60;
/// A converged inversion whose Jacobian is this small sits on the singular
/// image; callers must treat the point as unreachable. The double-precision
/// ambiguity band of the flat direction puts converged Jacobians at the
/// singular image below ~2e-11; genuine preimages at the closest approach
/// any rate fit uses stay above 1e-9.
const NEAR_SINGULAR_J: f64 = 5e-11;
/// Seeds this close to the singular set are skipped.
const SEED_MIN_J: f64 = 1e-9;
const NEWTON_MAX_HALVINGS: usize = 30;
/// Per-panel error target of the cumulative integral tables.
const TABLE_PANEL_TOL: f64 = 5e-15;

/// Characteristic parameters `(alpha, beta)`, `alpha <= beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharCoord {
    pub alpha: f64,
    pub beta: f64,
}

impl CharCoord {
    pub fn new(alpha: f64, beta: f64) -> Self {
        Self { alpha, beta }
    }
}

/// Physical coordinates `(t, x)` with `t >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysCoord {
    pub t: f64,
    pub x: f64,
}

impl PhysCoord {
    pub fn new(t: f64, x: f64) -> Self {
        Self { t, x }
    }
}

/// Solution values and first partial derivatives at one physical point.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FlowState {
    pub rho: f64,
    pub u: f64,
    pub lambda_minus: f64,
    pub lambda_plus: f64,
    pub u_x: f64,
    pub u_t: f64,
    pub rho_x: f64,
    pub rho_t: f64,
    /// Jacobian of the coordinate map at the preimage.
    pub jacobian: f64,
    /// Preimage in characteristic parameters.
    pub coord: CharCoord,
}

/// Entries of the Jacobian matrix of the map together with its determinant.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MapJacobian {
    pub t_alpha: f64,
    pub t_beta: f64,
    pub x_alpha: f64,
    pub x_beta: f64,
    pub det: f64,
}

/// Which coordinate line to trace; see the naming note in the module docs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CharFamily {
    /// Fixes `beta`; the physical curve propagates with speed `lambda_-`.
    Plus,
    /// Fixes `alpha`; the physical curve propagates with speed `lambda_+`.
    Minus,
}

/// Cumulative antiderivative tables for the two coordinate integrands.
///
/// Both integrands depend on the dummy variable alone, so every map
/// evaluation reduces to two antiderivative differences. The tables hold
/// prefix sums over panels refined until each panel's Kronrod error estimate
/// is at roundoff; a query adds one partial-panel rule evaluation.
struct Cumulative {
    nodes: Vec<f64>,
    /// Prefix integral of `1 / (L+ - L-)`.
    g_prefix: Vec<f64>,
    /// Prefix integral of `(L+ + L-) / (L+ - L-)`.
    k_prefix: Vec<f64>,
    /// Sign-change points of `L+` (breakpoints of x-monotonicity in beta).
    plus_breaks: Vec<f64>,
    /// Sign-change points of `L-` (breakpoints of x-monotonicity in alpha).
    minus_breaks: Vec<f64>,
}

impl Cumulative {
    fn build(data: &InitialDataPair, interval: (f64, f64)) -> Self {
        let g = |z: f64| 1.0 / data.gap(z);
        let k = |z: f64| (data.lambda_plus.value(z) + data.lambda_minus.value(z)) / data.gap(z);
        let mut nodes = vec![interval.0];
        let mut stack = Vec::new();
        let n0 = 256;
        for i in (0..n0).rev() {
            let a = interval.0 + (interval.1 - interval.0) * i as f64 / n0 as f64;
            let b = interval.0 + (interval.1 - interval.0) * (i + 1) as f64 / n0 as f64;
            stack.push((a, b, 0u32));
        }
        let mut panels: Vec<(f64, f64, f64)> = Vec::new(); // (end, g_int, k_int)
        while let Some((a, b, depth)) = stack.pop() {
            let (gv, ge) = quad::panel(&g, a, b);
            let (kv, ke) = quad::panel(&k, a, b);
            if (ge > TABLE_PANEL_TOL || ke > TABLE_PANEL_TOL) && depth < 24 {
                let m = 0.5 * (a + b);
                stack.push((m, b, depth + 1));
                stack.push((a, m, depth + 1));
            } else {
                panels.push((b, gv, kv));
            }
        }
        let mut g_prefix = vec![0.0];
        let mut k_prefix = vec![0.0];
        for (end, gv, kv) in panels {
            nodes.push(end);
            g_prefix.push(g_prefix.last().unwrap() + gv);
            k_prefix.push(k_prefix.last().unwrap() + kv);
        }
        let plus_breaks = sign_changes(|z| data.lambda_plus.value(z), interval);
        let minus_breaks = sign_changes(|z| data.lambda_minus.value(z), interval);
        Self {
            nodes,
            g_prefix,
            k_prefix,
            plus_breaks,
            minus_breaks,
        }
    }

    /// Antiderivative of `g` at `z`, anchored at the interval start.
    fn big_t<F: Fn(f64) -> f64>(&self, g: &F, z: f64) -> f64 {
        self.lookup(&self.g_prefix, g, z)
    }

    fn big_k<F: Fn(f64) -> f64>(&self, k: &F, z: f64) -> f64 {
        self.lookup(&self.k_prefix, k, z)
    }

    fn lookup<F: Fn(f64) -> f64>(&self, prefix: &[f64], f: &F, z: f64) -> f64 {
        let n = self.nodes.len();
        if z <= self.nodes[0] {
            return quad::panel(f, self.nodes[0], z).0;
        }
        if z >= self.nodes[n - 1] {
            return prefix[n - 1] + quad::panel(f, self.nodes[n - 1], z).0;
        }
        let idx = match self
            .nodes
            .binary_search_by(|probe| probe.total_cmp(&z))
        {
            Ok(i) => return prefix[i],
            Err(i) => i - 1,
        };
        prefix[idx] + quad::panel(f, self.nodes[idx], z).0
    }
}

fn sign_changes<F: Fn(f64) -> f64>(f: F, interval: (f64, f64)) -> Vec<f64> {
    let n = 2048;
    let mut out = Vec::new();
    let h = (interval.1 - interval.0) / n as f64;
    let mut prev = f(interval.0);
    for i in 1..=n {
        let x = interval.0 + h * i as f64;
        let cur = f(x);
        if prev != 0.0 && cur != 0.0 && prev.signum() != cur.signum() {
            if let Some(r) = roots::bisect(&f, x - h, x) {
                out.push(r);
            }
        }
        prev = cur;
    }
    out
}

struct SeedGrid {
    points: Vec<(f64, f64, f64, f64)>, // (alpha, beta, t, x); J bounded away from 0
}

/// The coordinate chart for one initial-data configuration.
///
/// All operations are pure given the data; the inversion seed grid and the
/// cumulative tables are built once and shared read-only afterwards.
pub struct CharMap {
    data: InitialDataPair,
    interval: (f64, f64),
    lifespan: Option<f64>,
    cumulative: std::sync::OnceLock<Cumulative>,
    seeds: std::sync::OnceLock<SeedGrid>,
}

impl CharMap {
    pub fn new(data: InitialDataPair, interval: (f64, f64)) -> Self {
        Self {
            data,
            interval,
            lifespan: None,
            cumulative: std::sync::OnceLock::new(),
            seeds: std::sync::OnceLock::new(),
        }
    }

    pub fn data(&self) -> &InitialDataPair {
        &self.data
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn lifespan(&self) -> Option<f64> {
        self.lifespan
    }

    /// Install the blowup time so the existence-domain guard can act.
    pub fn set_lifespan(&mut self, t0: Option<f64>) {
        self.lifespan = t0;
    }

    fn cum(&self) -> &Cumulative {
        self.cumulative
            .get_or_init(|| Cumulative::build(&self.data, self.interval))
    }

    /// Characteristic speeds gap `L+ - L-` at a foot point.
    pub fn gap(&self, z: f64) -> f64 {
        self.data.gap(z)
    }

    /// Forward map by adaptive quadrature to absolute tolerance `quad_tol`.
    pub fn map_forward(&self, p: CharCoord, quad_tol: f64) -> Result<PhysCoord> {
        if p.alpha > p.beta {
            return Err(Error::Domain(format!(
                "alpha = {} exceeds beta = {}",
                p.alpha, p.beta
            )));
        }
        if p.alpha == p.beta {
            return Ok(PhysCoord::new(0.0, p.alpha));
        }
        let t = quad::integrate(|z| 1.0 / self.data.gap(z), p.alpha, p.beta, quad_tol)?;
        let kint = quad::integrate(
            |z| (self.data.lambda_plus.value(z) + self.data.lambda_minus.value(z)) / self.data.gap(z),
            p.alpha,
            p.beta,
            quad_tol,
        )?;
        Ok(PhysCoord::new(t, 0.5 * (p.alpha + p.beta + kint)))
    }

    /// Forward map through the cumulative tables; used by the high-volume
    /// consumers (inversion, region quadrature). Matches [`Self::map_forward`]
    /// to table accuracy (~1e-13).
    pub fn map_fast(&self, p: CharCoord) -> PhysCoord {
        let c = self.cum();
        let g = |z: f64| 1.0 / self.data.gap(z);
        let k = |z: f64| {
            (self.data.lambda_plus.value(z) + self.data.lambda_minus.value(z)) / self.data.gap(z)
        };
        let t = c.big_t(&g, p.beta) - c.big_t(&g, p.alpha);
        let x = 0.5 * (p.alpha + p.beta + c.big_k(&k, p.beta) - c.big_k(&k, p.alpha));
        PhysCoord::new(t, x)
    }

    /// Antiderivative `T` of `1/(L+ - L-)` anchored at the interval start;
    /// `t(a, b) = T(b) - T(a)`, strictly increasing.
    pub fn time_antiderivative(&self, z: f64) -> f64 {
        let g = |z: f64| 1.0 / self.data.gap(z);
        self.cum().big_t(&g, z)
    }

    /// Solve `T(z) = value` for `z` in `[lo, hi]`.
    pub fn solve_time_antiderivative(&self, value: f64, lo: f64, hi: f64) -> Option<f64> {
        roots::bisect(|z| self.time_antiderivative(z) - value, lo, hi)
    }

    /// Sign-change points of `L+` inside the chart interval.
    pub fn plus_sign_breaks(&self) -> &[f64] {
        &self.cum().plus_breaks
    }

    /// Sign-change points of `L-` inside the chart interval.
    pub fn minus_sign_breaks(&self) -> &[f64] {
        &self.cum().minus_breaks
    }

    /// Closed-form Jacobian matrix of the map at `p`. The entries come from
    /// the fundamental theorem of calculus applied to the coordinate
    /// integrals; no numerical differentiation is involved.
    pub fn jacobian(&self, p: CharCoord) -> MapJacobian {
        let ha = self.data.gap(p.alpha);
        let hb = self.data.gap(p.beta);
        let lm_a = self.data.lambda_minus.value(p.alpha);
        let lp_b = self.data.lambda_plus.value(p.beta);
        MapJacobian {
            t_alpha: -1.0 / ha,
            t_beta: 1.0 / hb,
            x_alpha: -lm_a / ha,
            x_beta: lp_b / hb,
            // cancellation-free determinant
            det: (lm_a - lp_b) / (ha * hb),
        }
    }

    fn seed_grid(&self) -> &SeedGrid {
        self.seeds.get_or_init(|| {
            let (a, b) = self.interval;
            let mut points = Vec::new();
            for i in 0..=SEED_N {
                let alpha = a + (b - a) * i as f64 / SEED_N as f64;
                for j in i..=SEED_N {
                    let beta = a + (b - a) * j as f64 / SEED_N as f64;
                    let p = CharCoord::new(alpha, beta);
                    if self.jacobian(p).det.abs() < SEED_MIN_J {
                        continue;
                    }
                    let q = self.map_fast(p);
                    points.push((alpha, beta, q.t, q.x));
                }
            }
            SeedGrid { points }
        })
    }

    fn nearest_seeds(&self, q: PhysCoord, count: usize) -> Vec<CharCoord> {
        let grid = self.seed_grid();
        let mut scored: Vec<(f64, usize)> = grid
            .points
            .iter()
            .enumerate()
            .map(|(i, &(_, _, t, x))| ((t - q.t) * (t - q.t) + (x - q.x) * (x - q.x), i))
            .collect();
        scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        scored
            .iter()
            .take(count)
            .map(|&(_, i)| CharCoord::new(grid.points[i].0, grid.points[i].1))
            .collect()
    }

    /// Invert the map at `q` by damped Newton iteration with the analytic
    /// Jacobian, seeded from the coarse grid over the parameter triangle.
    /// Several nearest seeds are tried in order; the basins narrow near the
    /// singular image.
    pub fn invert(&self, q: PhysCoord, tol: f64) -> Result<CharCoord> {
        let mut last = None;
        for seed in self.nearest_seeds(q, 8) {
            match self.invert_seeded(q, seed, tol) {
                Ok(p) => return Ok(p),
                Err(e) => last = Some(e),
            }
        }
        Err(last.unwrap_or_else(|| Error::Numeric("empty seed grid".into())))
    }

    /// Newton inversion from an explicit seed; callers tracing a path reuse
    /// the previous preimage as the next seed.
    pub fn invert_seeded(&self, q: PhysCoord, seed: CharCoord, tol: f64) -> Result<CharCoord> {
        let (a, b) = self.interval;
        let clamp = |p: CharCoord| {
            let mut alpha = p.alpha.clamp(a, b);
            let mut beta = p.beta.clamp(a, b);
            if alpha > beta {
                let m = 0.5 * (alpha + beta);
                alpha = m;
                beta = m;
            }
            CharCoord::new(alpha, beta)
        };
        let residual = |p: CharCoord| {
            let im = self.map_fast(p);
            (im.t - q.t, im.x - q.x)
        };
        let mut p = clamp(seed);
        let (mut rt, mut rx) = residual(p);
        let mut rnorm = rt.abs().max(rx.abs());
        let mut converged = false;
        for _ in 0..NEWTON_MAX_ITERS {
            if rnorm <= tol {
                converged = true;
                break;
            }
            let mut jac = self.jacobian(p);
            if jac.det == 0.0 {
                // nudge off the singular set and retry from there
                let h = 1e-9 * (b - a);
                p = clamp(CharCoord::new(p.alpha - h, p.beta + h));
                (rt, rx) = residual(p);
                rnorm = rt.abs().max(rx.abs());
                jac = self.jacobian(p);
                if jac.det == 0.0 {
                    return Err(Error::NearSingularInversion {
                        alpha: p.alpha,
                        beta: p.beta,
                        jac: 0.0,
                    });
                }
            }
            // solve J * delta = r
            let da = (jac.x_beta * rt - jac.t_beta * rx) / jac.det;
            let db = (-jac.x_alpha * rt + jac.t_alpha * rx) / jac.det;
            let mut step = 1.0;
            let mut advanced = false;
            for _ in 0..NEWTON_MAX_HALVINGS {
                let cand = clamp(CharCoord::new(p.alpha - step * da, p.beta - step * db));
                let (ct, cx) = residual(cand);
                let cnorm = ct.abs().max(cx.abs());
                if cnorm < rnorm {
                    p = cand;
                    rt = ct;
                    rx = cx;
                    rnorm = cnorm;
                    advanced = true;
                    break;
                }
                step *= 0.5;
            }
            if !advanced {
                break;
            }
        }
        converged = converged || rnorm <= tol;
        if converged {
            // polish with full steps while they still improve; this pins the
            // preimage well enough that the Jacobian test below is meaningful
            for _ in 0..8 {
                let jac = self.jacobian(p);
                if jac.det == 0.0 {
                    break;
                }
                let da = (jac.x_beta * rt - jac.t_beta * rx) / jac.det;
                let db = (-jac.x_alpha * rt + jac.t_alpha * rx) / jac.det;
                let cand = clamp(CharCoord::new(p.alpha - da, p.beta - db));
                let (ct, cx) = residual(cand);
                let cnorm = ct.abs().max(cx.abs());
                if cnorm < rnorm {
                    p = cand;
                    rt = ct;
                    rx = cx;
                    rnorm = cnorm;
                } else {
                    break;
                }
            }
            let det = self.jacobian(p).det.abs();
            if det < NEAR_SINGULAR_J {
                // the target sits on the singular image
                return Err(Error::NearSingularInversion {
                    alpha: p.alpha,
                    beta: p.beta,
                    jac: det,
                });
            }
            return Ok(p);
        }
        Err(Error::NearSingularInversion {
            alpha: p.alpha,
            beta: p.beta,
            jac: self.jacobian(p).det.abs(),
        })
    }

    /// Solution state and all first partial derivatives at `q`.
    ///
    /// Refuses points beyond the installed lifespan unless `post_blowup` is
    /// set; for the line-shape data the solution stays classical off the
    /// singular line and the flag makes those points reachable.
    pub fn evaluate_state(&self, q: PhysCoord, post_blowup: bool) -> Result<FlowState> {
        if let Some(t0) = self.lifespan {
            if !post_blowup && q.t > t0 + LIFESPAN_MARGIN * (1.0 + t0.abs()) {
                return Err(Error::OutsideExistenceDomain { t: q.t, x: q.x, t0 });
            }
        }
        let p = self.invert(q, DEFAULT_INVERT_TOL)?;
        self.state_at(p)
    }

    /// State from a known preimage. All quantities are closed-form in the
    /// initial data at the feet.
    pub fn state_at(&self, p: CharCoord) -> Result<FlowState> {
        let data = &self.data;
        let lm = data.lambda_minus.value(p.alpha);
        let lp = data.lambda_plus.value(p.beta);
        let denom = lp - lm;
        if denom <= 0.0 {
            return Err(Error::Internal(format!(
                "lambda_+ - lambda_- = {denom} <= 0 at (alpha, beta) = ({}, {})",
                p.alpha, p.beta
            )));
        }
        let mu = data.mu;
        let ha = data.gap(p.alpha);
        let hb = data.gap(p.beta);
        let lmx = data.lambda_minus.deriv1(p.alpha) * ha / denom;
        let lpx = data.lambda_plus.deriv1(p.beta) * hb / denom;
        let lmt = -lp * lmx;
        let lpt = -lm * lpx;
        Ok(FlowState {
            rho: 2.0 * mu / denom,
            u: 0.5 * (lp + lm),
            lambda_minus: lm,
            lambda_plus: lp,
            u_x: 0.5 * (lpx + lmx),
            u_t: 0.5 * (lpt + lmt),
            rho_x: -2.0 * mu * (lpx - lmx) / (denom * denom),
            rho_t: -2.0 * mu * (lpt - lmt) / (denom * denom),
            jacobian: (lm - lp) / (ha * hb),
            coord: p,
        })
    }

    /// Trace one characteristic as the image of a coordinate line, resampled
    /// onto `t_grid` by monotone root finding in the line parameter.
    pub fn trace_characteristic(
        &self,
        family: CharFamily,
        start: f64,
        t_grid: &[f64],
    ) -> Result<Vec<PhysCoord>> {
        let (a, b) = self.interval;
        let t_start = self.time_antiderivative(start);
        let mut out = Vec::with_capacity(t_grid.len());
        for &t in t_grid {
            if t < 0.0 {
                return Err(Error::Domain(format!("t = {t} < 0 on characteristic grid")));
            }
            let p = match family {
                // fixed beta = start, alpha decreasing raises t
                CharFamily::Plus => {
                    let target = t_start - t;
                    if target < self.time_antiderivative(a) {
                        return Err(Error::Domain(format!(
                            "t = {t} beyond the domain of the plus-family line from {start}"
                        )));
                    }
                    let alpha = self
                        .solve_time_antiderivative(target, a, start)
                        .ok_or_else(|| Error::Domain("plus-family parameter not bracketed".into()))?;
                    CharCoord::new(alpha, start)
                }
                CharFamily::Minus => {
                    let target = t_start + t;
                    if target > self.time_antiderivative(b) {
                        return Err(Error::Domain(format!(
                            "t = {t} beyond the domain of the minus-family line from {start}"
                        )));
                    }
                    let beta = self
                        .solve_time_antiderivative(target, start, b)
                        .ok_or_else(|| Error::Domain("minus-family parameter not bracketed".into()))?;
                    CharCoord::new(start, beta)
                }
            };
            out.push(self.map_fast(p));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial_data::{builtin_scenario, constant_state};
    use approx::assert_abs_diff_eq;

    fn map_for(name: &str) -> CharMap {
        let sc = builtin_scenario(name).unwrap();
        CharMap::new(sc.data, sc.interval)
    }

    #[test]
    fn constant_state_map_is_linear() {
        let sc = constant_state();
        let map = CharMap::new(sc.data, sc.interval);
        let q = map
            .map_forward(CharCoord::new(0.0, 2.0), DEFAULT_QUAD_TOL)
            .unwrap();
        assert_abs_diff_eq!(q.t, 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(q.x, 1.0, epsilon = 1e-13);
    }

    #[test]
    fn degenerate_interval_maps_to_axis() {
        let map = map_for("point-shape");
        let q = map
            .map_forward(CharCoord::new(1.3, 1.3), DEFAULT_QUAD_TOL)
            .unwrap();
        assert_eq!(q.t, 0.0);
        assert_eq!(q.x, 1.3);
    }

    #[test]
    fn point_shape_witness_pair_maps_to_closed_form() {
        // gap = 2((z-1)^2 + 1) gives arctan; the x-integrand is odd about 1
        let map = map_for("point-shape");
        let q = map
            .map_forward(CharCoord::new(0.0, 2.0), DEFAULT_QUAD_TOL)
            .unwrap();
        assert_abs_diff_eq!(q.t, std::f64::consts::FRAC_PI_4, epsilon = 1e-12);
        assert_abs_diff_eq!(q.x, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn fast_map_matches_adaptive_map() {
        let map = map_for("cusp-tanh");
        for (a, b) in [(-1.0, 0.5), (0.0, 2.0), (-3.5, 5.5), (1.0, 1.2)] {
            let p = CharCoord::new(a, b);
            let q1 = map.map_forward(p, 1e-13).unwrap();
            let q2 = map.map_fast(p);
            assert_abs_diff_eq!(q1.t, q2.t, epsilon = 1e-11);
            assert_abs_diff_eq!(q1.x, q2.x, epsilon = 1e-11);
        }
    }

    #[test]
    fn jacobian_constant_state() {
        let sc = constant_state();
        let map = CharMap::new(sc.data, sc.interval);
        let j = map.jacobian(CharCoord::new(-0.7, 1.9));
        assert_abs_diff_eq!(j.t_alpha, -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(j.t_beta, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(j.x_alpha, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(j.x_beta, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(j.det, -0.5, epsilon = 1e-15);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let map = map_for("cusp-tanh");
        let h = 1e-6;
        for (a, b) in [(-0.5, 1.0), (0.3, 2.4), (-2.0, 4.0)] {
            let j = map.jacobian(CharCoord::new(a, b));
            let tol = 1e-12;
            let qa_p = map.map_forward(CharCoord::new(a + h, b), tol).unwrap();
            let qa_m = map.map_forward(CharCoord::new(a - h, b), tol).unwrap();
            let qb_p = map.map_forward(CharCoord::new(a, b + h), tol).unwrap();
            let qb_m = map.map_forward(CharCoord::new(a, b - h), tol).unwrap();
            assert_abs_diff_eq!(j.t_alpha, (qa_p.t - qa_m.t) / (2.0 * h), epsilon = 1e-7);
            assert_abs_diff_eq!(j.t_beta, (qb_p.t - qb_m.t) / (2.0 * h), epsilon = 1e-7);
            assert_abs_diff_eq!(j.x_alpha, (qa_p.x - qa_m.x) / (2.0 * h), epsilon = 1e-7);
            assert_abs_diff_eq!(j.x_beta, (qb_p.x - qb_m.x) / (2.0 * h), epsilon = 1e-7);
        }
    }

    #[test]
    fn jacobian_vanishes_exactly_on_sigma() {
        let map = map_for("cusp-tanh");
        // Sigma for this pair is beta = alpha + 2
        for alpha in [-1.0, -0.3, 0.0, 0.6, 1.0] {
            let j = map.jacobian(CharCoord::new(alpha, alpha + 2.0));
            assert!(j.det.abs() <= 1e-12, "J = {} at alpha = {alpha}", j.det);
            let off = map.jacobian(CharCoord::new(alpha, alpha + 2.3));
            assert!(off.det.abs() > 1e-3);
        }
    }

    #[test]
    fn cusp_witness_jacobian_zero_point_shape_nonzero() {
        let cusp = map_for("cusp-tanh");
        assert!(cusp.jacobian(CharCoord::new(0.0, 2.0)).det.abs() < 1e-15);
        let ps = map_for("point-shape");
        assert!(ps.jacobian(CharCoord::new(0.0, 1.0)).det.abs() > 1e-2);
    }

    #[test]
    fn invert_constant_state() {
        let sc = constant_state();
        let map = CharMap::new(sc.data, sc.interval);
        let p = map.invert(PhysCoord::new(1.0, 1.0), 1e-12).unwrap();
        assert_abs_diff_eq!(p.alpha, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(p.beta, 2.0, epsilon = 1e-10);
    }

    #[test]
    fn invert_round_trip_point_shape() {
        let map = map_for("point-shape");
        let q0 = map
            .map_forward(CharCoord::new(0.3, 1.4), DEFAULT_QUAD_TOL)
            .unwrap();
        let p = map.invert(q0, 1e-11).unwrap();
        let q1 = map.map_forward(p, DEFAULT_QUAD_TOL).unwrap();
        assert_abs_diff_eq!(q0.t, q1.t, epsilon = 1e-10);
        assert_abs_diff_eq!(q0.x, q1.x, epsilon = 1e-10);
    }

    #[test]
    fn invert_near_blowup_is_near_singular() {
        let map = map_for("point-shape");
        let err = map.invert(PhysCoord::new(std::f64::consts::FRAC_PI_4, 1.0), 1e-12);
        assert!(matches!(err, Err(Error::NearSingularInversion { .. })));
    }

    #[test]
    fn constant_state_flow() {
        let sc = constant_state();
        let map = CharMap::new(sc.data, sc.interval);
        let s = map.evaluate_state(PhysCoord::new(0.7, 0.2), false).unwrap();
        assert_abs_diff_eq!(s.rho, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(s.u, 0.0, epsilon = 1e-10);
        for d in [s.u_x, s.u_t, s.rho_x, s.rho_t] {
            assert_abs_diff_eq!(d, 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn initial_line_state_reduces_to_data() {
        let map = map_for("point-shape");
        let s = map.evaluate_state(PhysCoord::new(0.0, 0.5), false).unwrap();
        assert_abs_diff_eq!(s.rho, 0.8, epsilon = 1e-9);
    }

    #[test]
    fn riemann_invariant_identity() {
        let map = map_for("cusp-tanh");
        let s = map.evaluate_state(PhysCoord::new(0.4, 0.9), false).unwrap();
        let mu = map.data().mu;
        assert_abs_diff_eq!(
            s.lambda_plus - s.lambda_minus,
            2.0 * mu / s.rho,
            epsilon = 1e-14
        );
    }

    #[test]
    fn lifespan_guard_refuses_late_times() {
        let mut map = map_for("point-shape");
        map.set_lifespan(Some(std::f64::consts::FRAC_PI_4));
        // the image of (-1, 2) lies past the blowup time but off the singular point
        let late = map
            .map_forward(CharCoord::new(-1.0, 2.0), DEFAULT_QUAD_TOL)
            .unwrap();
        assert!(late.t > std::f64::consts::FRAC_PI_4);
        assert!(matches!(
            map.evaluate_state(late, false),
            Err(Error::OutsideExistenceDomain { .. })
        ));
        // with the post-blowup flag the point is evaluable
        let s = map.evaluate_state(late, true).unwrap();
        assert!(s.rho.is_finite() && s.rho > 0.0);
    }

    #[test]
    fn minus_family_line_in_constant_state() {
        // dx/dt = lambda_+ = 1 from alpha = 0
        let sc = constant_state();
        let map = CharMap::new(sc.data, sc.interval);
        let ts: Vec<f64> = (0..10).map(|i| 0.2 * i as f64).collect();
        let line = map.trace_characteristic(CharFamily::Minus, 0.0, &ts).unwrap();
        for (q, &t) in line.iter().zip(&ts) {
            assert_abs_diff_eq!(q.t, t, epsilon = 1e-11);
            assert_abs_diff_eq!(q.x, t, epsilon = 1e-11);
        }
    }

    #[test]
    fn lambda_minus_constant_along_minus_family() {
        let map = map_for("cusp-tanh");
        let ts: Vec<f64> = (0..30).map(|i| 0.02 * i as f64).collect();
        let line = map
            .trace_characteristic(CharFamily::Minus, -0.5, &ts)
            .unwrap();
        let expected = map.data().lambda_minus.value(-0.5);
        let mut max_dev: f64 = 0.0;
        for q in &line {
            let s = map.evaluate_state(*q, false).unwrap();
            max_dev = max_dev.max((s.lambda_minus - expected).abs());
        }
        assert!(max_dev * max_dev <= 1e-10, "variance proxy {max_dev:e}");
    }

    #[test]
    fn grid_beyond_line_domain_errors() {
        // constant state: the minus-family line from 0 reaches t = (b - 0)/2 = 3
        let sc = constant_state();
        let map = CharMap::new(sc.data, sc.interval);
        let err = map.trace_characteristic(CharFamily::Minus, 0.0, &[5.0]);
        assert!(matches!(err, Err(Error::Domain(_))));
    }
}
