use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::BoundarySpace;
use crate::error::{GeomError, Result};
use crate::madic::MAdicPoint;
use crate::mille::BoundaryPoint;

/// Range of distance scales `[inner, outer]` covered by the samples.
/// Text form `inner:outer`, e.g. `0.01:100`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub inner: f64,
    pub outer: f64,
}

impl Window {
    pub fn new(inner: f64, outer: f64) -> Result<Self> {
        if !(inner > 0.0 && outer > inner && outer.is_finite()) {
            return Err(GeomError::InvalidParameter(format!(
                "window needs 0 < inner < outer, got {inner}:{outer}"
            )));
        }
        Ok(Self { inner, outer })
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.inner, self.outer)
    }
}

impl FromStr for Window {
    type Err = GeomError;

    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| GeomError::Parse(format!("window must be inner:outer, got {s:?}")))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| GeomError::Parse(format!("bad window bound {v:?}")))
        };
        Window::new(parse(a)?, parse(b)?)
    }
}

/// How the two points of a sampled pair differ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairMode {
    XOnly,
    TreeOnly,
    Both,
}

const MODES: [PairMode; 3] = [PairMode::XOnly, PairMode::TreeOnly, PairMode::Both];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledPair {
    pub a: BoundaryPoint,
    pub b: BoundaryPoint,
    pub mode: PairMode,
    /// Largest scale used to generate the pair.
    pub scale: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledTriple {
    pub y: BoundaryPoint,
    pub x: BoundaryPoint,
    pub xp: BoundaryPoint,
    pub scale: f64,
}

/// Deterministic multi-scale sampler. Sample `k` of each kind draws from its
/// own ChaCha stream derived from `seed` and `k`, so streams do not depend on
/// evaluation order or on `count`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sampler {
    pub seed: u64,
    pub window: Window,
    pub count: usize,
}

enum Purpose {
    Point = 0,
    Pair = 1,
    Triple = 2,
    Box = 3,
}

impl Sampler {
    pub fn new(seed: u64, window: Window, count: usize) -> Self {
        Self {
            seed,
            window,
            count,
        }
    }

    pub(crate) fn rng(&self, purpose: u64, index: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64 * 4 + purpose);
        rng
    }

    pub(crate) fn box_rng(&self, index: usize) -> ChaCha8Rng {
        self.rng(Purpose::Box as u64, index)
    }

    pub fn point(&self, space: &BoundarySpace, index: usize) -> BoundaryPoint {
        random_point(&mut self.rng(Purpose::Point as u64, index), space, self.window).0
    }

    pub fn points(&self, space: &BoundarySpace) -> Vec<BoundaryPoint> {
        (0..self.count).map(|k| self.point(space, k)).collect()
    }

    /// Pair `index`; modes cycle through x-only, tree-only and both.
    pub fn pair(&self, space: &BoundarySpace, index: usize) -> SampledPair {
        let mut rng = self.rng(Purpose::Pair as u64, index);
        let (a, s) = random_point(&mut rng, space, self.window);
        let r = log_uniform(&mut rng, self.window.inner, self.window.outer);
        let mode = MODES[index % 3];
        let b = partner(&mut rng, space, self.window, &a, r, mode);
        SampledPair {
            a,
            b,
            mode,
            scale: s.max(r),
        }
    }

    pub fn pairs(&self, space: &BoundarySpace) -> Vec<SampledPair> {
        (0..self.count).map(|k| self.pair(space, k)).collect()
    }

    /// Triple `(y, x, x')` with `d(y, x) / d(y, x')` close to a ratio drawn
    /// from `ratios`. The first distance is a power of `m`, so tree
    /// partners hit it exactly; each partner picks its mode at random.
    pub fn triple(&self, space: &BoundarySpace, ratios: &[f64], index: usize) -> SampledTriple {
        let mut rng = self.rng(Purpose::Triple as u64, index);
        let (y, s) = random_point(&mut rng, space, self.window);
        let m = space.m() as f64;
        let lo = (self.window.inner.ln() / m.ln()).ceil() as i64;
        let hi = ((self.window.outer.ln() / m.ln()).floor() as i64).max(lo);
        let r1 = m.powi(rng.gen_range(lo..=hi) as i32);
        let t = if ratios.is_empty() {
            1.0
        } else {
            ratios[rng.gen_range(0..ratios.len())]
        };
        let r2 = r1 / t;
        let mode1 = MODES[rng.gen_range(0..3)];
        let mode2 = MODES[rng.gen_range(0..3)];
        let x = partner(&mut rng, space, self.window, &y, r1, mode1);
        let xp = partner(&mut rng, space, self.window, &y, r2, mode2);
        SampledTriple {
            y,
            x,
            xp,
            scale: s.max(r1).max(r2),
        }
    }

    pub fn triples(&self, space: &BoundarySpace, ratios: &[f64]) -> Vec<SampledTriple> {
        (0..self.count).map(|k| self.triple(space, ratios, k)).collect()
    }
}

pub(crate) fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo.ln()..=hi.ln()).exp()
}

fn random_direction<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-3 && n <= 1.0 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

fn tree_floor(space: &BoundarySpace, w: Window) -> i64 {
    ((w.inner.ln() / (space.m() as f64).ln()).floor() as i64) - 3
}

/// Random digits at heights `top - 1` down to `bottom`.
fn random_digits<R: Rng>(rng: &mut R, m: u32, top: i64, bottom: i64) -> Vec<(i64, u32)> {
    (bottom..top).map(|h| (h, rng.gen_range(0..m))).collect()
}

/// A point whose layer `i` has norm `s_i^{alpha_i / alpha_1}` for
/// log-uniform `s_i` (or zero, with probability 1/4), and whose tree
/// coordinate has random digits across the window. Returns the largest
/// `s_i` as the point's scale.
pub(crate) fn random_point<R: Rng>(
    rng: &mut R,
    space: &BoundarySpace,
    w: Window,
) -> (BoundaryPoint, f64) {
    let e = space.structure();
    let mut x = vec![0.0; e.dim()];
    let mut scale = w.inner;
    for (range, kappa) in e.layer_ranges().into_iter().zip(space.layer_exponents()) {
        if rng.gen_bool(0.25) {
            continue;
        }
        let s = log_uniform(rng, w.inner, w.outer);
        scale = scale.max(s);
        let dir = random_direction(rng, range.len());
        for (k, d) in range.zip(dir) {
            x[k] = d * s.powf(kappa);
        }
    }
    let m = space.m();
    let top = (w.outer.ln() / (m as f64).ln()).floor() as i64 + 1;
    let digits = random_digits(rng, m, top, tree_floor(space, w));
    let xi = MAdicPoint::new(m, digits).expect("digits below the base");
    (BoundaryPoint::new(x, xi), scale)
}

/// A point at distance about `r` from `p`: layer `i` of `x` moves by
/// `(r u_i)^{alpha_i / alpha_1}` with `max u_i = 1`, the tree coordinate is
/// resampled below height `round(log_m r)`.
pub(crate) fn partner<R: Rng>(
    rng: &mut R,
    space: &BoundarySpace,
    w: Window,
    p: &BoundaryPoint,
    r: f64,
    mode: PairMode,
) -> BoundaryPoint {
    let e = space.structure();
    let mut x = p.x.clone();
    if mode != PairMode::TreeOnly {
        let layers = e.layer_ranges();
        let full = rng.gen_range(0..layers.len());
        for (i, (range, kappa)) in layers.into_iter().zip(space.layer_exponents()).enumerate() {
            let u: f64 = if i == full { 1.0 } else { rng.gen_range(0.0..1.0) };
            let len = (r * u).powf(kappa);
            let dir = random_direction(rng, range.len());
            for (k, d) in range.zip(dir) {
                x[k] += d * len;
            }
        }
    }
    let mut xi = p.xi.clone();
    if mode != PairMode::XOnly {
        let m = space.m();
        let h = (r.ln() / (m as f64).ln()).round() as i64;
        let old = p.xi.digit(h - 1);
        let new_top = (old + rng.gen_range(1..m)) % m;
        let bottom = tree_floor(space, w).min(h - 4);
        let mut digits: Vec<(i64, u32)> = p.xi.nonzero_digits().filter(|(t, _)| *t >= h).collect();
        digits.push((h - 1, new_top));
        digits.extend(random_digits(rng, m, h - 1, bottom));
        xi = MAdicPoint::new(m, digits).expect("digits below the base");
    }
    BoundaryPoint::new(x, xi)
}
