//! Coarse model of the Heintze group `G_phi = R^n x_phi R`.
//!
//! Level sets `R^n x {t}` carry the metric `d_t(x, y) = |phi_{-t}(x - y)|`.
//! The distance between two points is modelled by the tent formula
//!
//! ```text
//! inf_{h >= max(s, t)} (h - s) + (h - t) + d_h(x, y)
//! ```
//!
//! (climb the vertical geodesics, cross at height `h`, descend), which is
//! within bounded additive error of any metric having these level metrics
//! and vertical geodesics.

mod structure;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use structure::{ExpandingStructure, Layer, LevelNorm};

use crate::error::{GeomError, Result};
use crate::optimize::{bisect, scan_minimize};

/// A point `(x, t)` of `G_phi`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HoroPoint {
    pub x: Vec<f64>,
    pub t: f64,
}

impl HoroPoint {
    pub fn new(x: Vec<f64>, t: f64) -> Self {
        Self { x, t }
    }
}

fn difference(e: &ExpandingStructure, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    e.check_dim(x)?;
    e.check_dim(y)?;
    Ok(x.iter().zip(y).map(|(a, b)| a - b).collect())
}

pub(crate) fn level_of_difference(e: &ExpandingStructure, t: f64, diff: &[f64]) -> f64 {
    e.base_norm(&e.flow(-t, diff))
}

/// `d_t(x, y) = |phi_{-t}(x - y)|`.
pub fn level_metric(e: &ExpandingStructure, t: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    let diff = difference(e, x, y)?;
    Ok(level_of_difference(e, t, &diff))
}

/// Lower estimate of the unit height ignoring off-diagonal coupling.
fn diagonal_guess(e: &ExpandingStructure, diff: &[f64]) -> Option<f64> {
    e.layer_norms(diff)
        .into_iter()
        .zip(e.layers())
        .filter(|(n, _)| *n > 0.0)
        .map(|(n, l)| n.ln() / l.alpha)
        .reduce(f64::max)
}

pub(crate) fn unit_height_of_difference(e: &ExpandingStructure, diff: &[f64]) -> Result<f64> {
    let guess = diagonal_guess(e, diff).ok_or(GeomError::CoincidentPoints("no unit height"))?;
    if e.is_diagonal() && e.norm() == LevelNorm::LayerMax {
        return Ok(guess);
    }
    eventual_crossing(|t| level_of_difference(e, t, diff), guess)
}

/// Smallest `t0` with `f(s) <= 1` for every `s >= t0`: scan outward in unit
/// steps to bracket the last crossing, then bisect.
fn eventual_crossing<F: Fn(f64) -> f64>(f: F, guess: f64) -> Result<f64> {
    const MAX_STEPS: usize = 200_000;
    let mut hi = guess.floor();
    let mut steps = 0;
    while !(f(hi) <= 1.0 && (1..=8).all(|k| f(hi + k as f64) <= 1.0)) {
        hi += 1.0;
        steps += 1;
        if steps > MAX_STEPS {
            return Err(GeomError::NoConvergence("unit height: no sub-unit region".into()));
        }
    }
    let mut lo = hi - 1.0;
    while f(lo) <= 1.0 {
        hi = lo;
        lo -= 1.0;
        steps += 1;
        if steps > MAX_STEPS {
            return Err(GeomError::NoConvergence("unit height: no crossing below".into()));
        }
    }
    Ok(bisect(|t| f(t) - 1.0, lo, hi, 1e-12))
}

/// Height `t0` from which on the two vertical geodesics stay within unit
/// level distance. Closed form `max_i ln|dx_i| / alpha_i` for diagonal
/// structures with the layer-max norm; bracketing plus bisection otherwise.
pub fn unit_height(e: &ExpandingStructure, x: &[f64], y: &[f64]) -> Result<f64> {
    let diff = difference(e, x, y)?;
    unit_height_of_difference(e, &diff)
}

/// Parabolic visual distance `e^{eps * t0}`, `eps` the snowflake exponent.
pub fn visual_distance(e: &ExpandingStructure, x: &[f64], y: &[f64]) -> Result<f64> {
    let diff = difference(e, x, y)?;
    if diff.iter().all(|d| *d == 0.0) {
        return Ok(0.0);
    }
    Ok((e.epsilon() * unit_height_of_difference(e, &diff)?).exp())
}

/// `D_M(v, w) = max_i |dx_i|^{alpha_1 / alpha_i}` over eigenvalue layers.
pub fn dm_closed_form(e: &ExpandingStructure, v: &[f64], w: &[f64]) -> Result<f64> {
    if !e.is_diagonal() {
        return Err(GeomError::NotDiagonal);
    }
    let diff = difference(e, v, w)?;
    let a1 = e.alpha1();
    Ok(e.layer_norms(&diff)
        .into_iter()
        .zip(e.layers())
        .map(|(n, l)| if n == 0.0 { 0.0 } else { n.powf(a1 / l.alpha) })
        .fold(0.0, f64::max))
}

/// Minimum of `2h + d_h` over `h` in `[lo, cap]` (`cap = None` for no upper
/// limit). The minimizer never exceeds `max(lo, t0) + 1/2`, `t0` the unit
/// height, because there `d_h <= 1`.
pub(crate) fn envelope_min(
    e: &ExpandingStructure,
    diff: &[f64],
    lo: f64,
    cap: Option<f64>,
) -> Result<f64> {
    if diff.iter().all(|d| *d == 0.0) {
        return Ok(2.0 * lo);
    }
    let t0 = unit_height_of_difference(e, diff)?;
    let mut hi = lo.max(t0) + 0.5;
    if let Some(c) = cap {
        hi = hi.min(c);
    }
    let g = |h: f64| 2.0 * h + level_of_difference(e, h, diff);
    Ok(scan_minimize(g, lo, hi, 0.25).1)
}

/// Tent distance between two points of `G_phi`.
pub fn tent_distance(e: &ExpandingStructure, p: &HoroPoint, q: &HoroPoint) -> Result<f64> {
    let diff = difference(e, &p.x, &q.x)?;
    let lo = p.t.max(q.t);
    Ok(envelope_min(e, &diff, lo, None)? - p.t - q.t)
}

/// Euclid–Cygan expression `exp((2T + d((x,T),(y,T))) / 2)` at a finite
/// cutoff `T`. It stabilizes once `T` is below the crossing height; equal
/// points report the limit value 0.
pub fn euclid_cygan(e: &ExpandingStructure, x: &[f64], y: &[f64], cutoff: f64) -> Result<f64> {
    let diff = difference(e, x, y)?;
    if diff.iter().all(|d| *d == 0.0) {
        return Ok(0.0);
    }
    let d = envelope_min(e, &diff, cutoff, None)? - 2.0 * cutoff;
    Ok((0.5 * (2.0 * cutoff + d)).exp())
}

/// Euclid–Cygan value at `T` together with the value at `2T`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffEstimate {
    pub cutoff: f64,
    pub value: f64,
    pub refined: f64,
    pub relative_change: f64,
}

pub fn euclid_cygan_monitored(
    e: &ExpandingStructure,
    x: &[f64],
    y: &[f64],
    cutoff: f64,
) -> Result<CutoffEstimate> {
    if !(cutoff < 0.0) {
        return Err(GeomError::InvalidParameter(format!(
            "cutoff must be negative, got {cutoff}"
        )));
    }
    let value = euclid_cygan(e, x, y, cutoff)?;
    let refined = euclid_cygan(e, x, y, 2.0 * cutoff)?;
    let relative_change = if refined == 0.0 {
        0.0
    } else {
        ((value - refined) / refined).abs()
    };
    Ok(CutoffEstimate {
        cutoff,
        value,
        refined,
        relative_change,
    })
}

/// Reparametrizes `phi'_t = phi_{alpha t}`. The snowflake exponent is kept,
/// so `visual_distance(e) == visual_distance(e')^alpha` pointwise.
pub fn snowflake_reparam(e: &ExpandingStructure, alpha: f64) -> Result<ExpandingStructure> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(GeomError::InvalidParameter(format!(
            "snowflake factor must be positive, got {alpha}"
        )));
    }
    e.scaled(alpha)
}

/// Rescales `e` so that `alpha_1 = ln m` with the default snowflake exponent,
/// which turns the tree part of the boundary metric into `m^{t0}`. Returns
/// the rescaled structure and the factor applied.
pub fn normalize_for_tree(e: &ExpandingStructure, m: u32) -> Result<(ExpandingStructure, f64)> {
    if m < 2 {
        return Err(GeomError::InvalidBase(m));
    }
    let factor = (m as f64).ln() / e.alpha1();
    Ok((snowflake_reparam(e, factor)?.clear_snowflake(), factor))
}

/// Outcome of sampling the triangle inequality for a visual metric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriangleReport {
    pub checked: usize,
    pub violations: usize,
    /// Largest `d(x,z) / (d(x,y) + d(y,z))` seen.
    pub worst_ratio: f64,
}

impl TriangleReport {
    pub fn is_metric(&self) -> bool {
        self.violations == 0
    }
}

/// Samples triples in `[-radius, radius]^n` and counts violations of the
/// triangle inequality for `visual_distance(e)`. Used to probe which
/// snowflake exponents keep the boundary expression a metric.
pub fn visual_triangle_check(
    e: &ExpandingStructure,
    seed: u64,
    count: usize,
    radius: f64,
) -> Result<TriangleReport> {
    let n = e.dim();
    let mut report = TriangleReport {
        checked: 0,
        violations: 0,
        worst_ratio: 0.0,
    };
    for i in 0..count {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let mut pt = || -> Vec<f64> { (0..n).map(|_| rng.gen_range(-radius..radius)).collect() };
        let (x, y, z) = (pt(), pt(), pt());
        let xz = visual_distance(e, &x, &z)?;
        let bound = visual_distance(e, &x, &y)? + visual_distance(e, &y, &z)?;
        report.checked += 1;
        if bound > 0.0 {
            let ratio = xz / bound;
            report.worst_ratio = report.worst_ratio.max(ratio);
            if ratio > 1.0 + 1e-12 {
                report.violations += 1;
            }
        }
    }
    Ok(report)
}
