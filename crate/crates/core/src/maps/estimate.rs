//! Sampling estimators for bilipschitz constants, quasisymmetry moduli,
//! uniformity of families, Hölder norms, decomposition and measure
//! distortion. Every estimator records how many samples it used, and
//! nothing assumes the declared metadata of a map: metadata is what the
//! estimates get compared against.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::sampler::{log_uniform, partner, random_point, PairMode, SampledPair, Sampler, Window};
use super::{BoundaryMap, BoundarySpace, Direction, Func};
use crate::error::{GeomError, Result};
use crate::madic::{agreement_height, ball_of, MAdicPoint};
use crate::mille::BoundaryPoint;

fn require_samples(s: &Sampler) -> Result<()> {
    if s.count < 2 {
        Err(GeomError::DegenerateSampler(s.count))
    } else {
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowCurvePoint {
    pub outer: f64,
    pub pairs: usize,
    pub a_low: f64,
    pub b_high: f64,
}

/// Extremes of `d(f a, f b) / d(a, b)` over sampled pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BilipschitzEstimate {
    pub pairs: usize,
    pub a_low: f64,
    pub b_high: f64,
    pub low_witness: Option<SampledPair>,
    pub high_witness: Option<SampledPair>,
    /// The same extremes restricted to pairs generated at scales up to
    /// `outer / 1000`, `outer / 100`, `outer / 10` and `outer`.
    pub curve: Vec<WindowCurvePoint>,
}

impl BilipschitzEstimate {
    pub fn ratio(&self) -> f64 {
        self.b_high / self.a_low
    }
}

pub fn estimate_bilipschitz(
    space: &BoundarySpace,
    f: &BoundaryMap,
    sampler: &Sampler,
) -> Result<BilipschitzEstimate> {
    require_samples(sampler)?;
    f.validate(space)?;
    let mut rows = Vec::with_capacity(sampler.count);
    for k in 0..sampler.count {
        let pair = sampler.pair(space, k);
        let d = space.distance(&pair.a, &pair.b)?;
        if d == 0.0 {
            continue;
        }
        let fd = space.distance(&f.evaluate(space, &pair.a)?, &f.evaluate(space, &pair.b)?)?;
        rows.push((fd / d, pair));
    }
    let mut est = BilipschitzEstimate {
        pairs: rows.len(),
        a_low: f64::INFINITY,
        b_high: 0.0,
        low_witness: None,
        high_witness: None,
        curve: Vec::new(),
    };
    for (ratio, pair) in &rows {
        if *ratio < est.a_low {
            est.a_low = *ratio;
            est.low_witness = Some(pair.clone());
        }
        if *ratio > est.b_high {
            est.b_high = *ratio;
            est.high_witness = Some(pair.clone());
        }
    }
    let w = sampler.window;
    for j in (0..=3).rev() {
        let outer = w.outer / 10f64.powi(j);
        if outer < w.inner {
            continue;
        }
        let sub: Vec<f64> = rows
            .iter()
            .filter(|(_, p)| p.scale <= outer * (1.0 + 1e-12))
            .map(|(r, _)| *r)
            .collect();
        if sub.is_empty() {
            continue;
        }
        est.curve.push(WindowCurvePoint {
            outer,
            pairs: sub.len(),
            a_low: sub.iter().copied().fold(f64::INFINITY, f64::min),
            b_high: sub.iter().copied().fold(0.0, f64::max),
        });
    }
    Ok(est)
}

/// One ratio bin of an estimated quasisymmetry modulus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QsBin {
    pub t: f64,
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    /// Largest `d(fy, fx) / d(fy, fx')` seen in the bin; absent when empty.
    pub eta: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QsModulus {
    pub triples: usize,
    pub bins: Vec<QsBin>,
}

impl QsModulus {
    pub fn eta(&self, t: f64) -> Option<f64> {
        self.bins.iter().find(|b| b.t == t).and_then(|b| b.eta)
    }

    /// `max eta(t) / t` over populated bins.
    pub fn normalized_max(&self) -> Option<f64> {
        self.bins
            .iter()
            .filter_map(|b| b.eta.map(|e| e / b.t))
            .reduce(f64::max)
    }
}

/// `eta_hat(t)` for each `t` of `ratio_grid`, from triples `(y, x, x')` with
/// `d(y, x) / d(y, x')` within a factor `1 + bin_width` of `t`.
pub fn estimate_qs_modulus(
    space: &BoundarySpace,
    f: &BoundaryMap,
    sampler: &Sampler,
    ratio_grid: &[f64],
    bin_width: f64,
) -> Result<QsModulus> {
    require_samples(sampler)?;
    f.validate(space)?;
    if ratio_grid.iter().any(|t| !(*t > 0.0)) || !(bin_width > 0.0) {
        return Err(GeomError::InvalidParameter(
            "ratio grid and bin width must be positive".into(),
        ));
    }
    let mut bins: Vec<QsBin> = ratio_grid
        .iter()
        .map(|&t| QsBin {
            t,
            lo: t / (1.0 + bin_width),
            hi: t * (1.0 + bin_width),
            count: 0,
            eta: None,
        })
        .collect();
    for k in 0..sampler.count {
        let tr = sampler.triple(space, ratio_grid, k);
        let d1 = space.distance(&tr.y, &tr.x)?;
        let d2 = space.distance(&tr.y, &tr.xp)?;
        if d1 == 0.0 || d2 == 0.0 {
            continue;
        }
        let ratio = d1 / d2;
        let Some(bin) = bins.iter_mut().find(|b| ratio >= b.lo && ratio <= b.hi) else {
            continue;
        };
        let fy = f.evaluate(space, &tr.y)?;
        let e1 = space.distance(&fy, &f.evaluate(space, &tr.x)?)?;
        let e2 = space.distance(&fy, &f.evaluate(space, &tr.xp)?)?;
        let eta = if e2 == 0.0 { f64::INFINITY } else { e1 / e2 };
        bin.count += 1;
        bin.eta = Some(bin.eta.map_or(eta, |v: f64| v.max(eta)));
    }
    Ok(QsModulus {
        triples: sampler.count,
        bins,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemberUniformity {
    pub kind: String,
    pub s: f64,
    pub k: f64,
    pub a_low: f64,
    pub b_high: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformityReport {
    pub k_hat: f64,
    pub members: Vec<MemberUniformity>,
}

/// For each member, `s_f` is the geometric mean of the sampled distance
/// ratios and `K_f = max(sup / s_f, s_f / inf)`; `K_hat` is the largest `K_f`.
pub fn check_uniform(
    space: &BoundarySpace,
    family: &[BoundaryMap],
    sampler: &Sampler,
) -> Result<UniformityReport> {
    require_samples(sampler)?;
    let mut members = Vec::with_capacity(family.len());
    for f in family {
        f.validate(space)?;
        let mut logs = Vec::with_capacity(sampler.count);
        for k in 0..sampler.count {
            let pair = sampler.pair(space, k);
            let d = space.distance(&pair.a, &pair.b)?;
            if d == 0.0 {
                continue;
            }
            let fd = space.distance(&f.evaluate(space, &pair.a)?, &f.evaluate(space, &pair.b)?)?;
            logs.push((fd / d).ln());
        }
        let s = (logs.iter().sum::<f64>() / logs.len().max(1) as f64).exp();
        let lo = logs.iter().copied().fold(f64::INFINITY, f64::min).exp();
        let hi = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max).exp();
        members.push(MemberUniformity {
            kind: f.kind().to_string(),
            s,
            k: (hi / s).max(s / lo),
            a_low: lo,
            b_high: hi,
        });
    }
    Ok(UniformityReport {
        k_hat: members.iter().map(|m| m.k).fold(1.0, f64::max),
        members,
    })
}

/// `sup |B(u) - B(v)| / |u - v|^beta` over `count` random pairs in `[lo, hi]`.
pub fn holder_norm_1d(func: &Func, beta: f64, lo: f64, hi: f64, seed: u64, count: usize) -> Result<f64> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(GeomError::InvalidParameter(format!("Hölder exponent must lie in (0, 1], got {beta}")));
    }
    if !(hi > lo) {
        return Err(GeomError::InvalidParameter("empty interval".into()));
    }
    let s = Sampler::new(seed, Window { inner: 1.0, outer: 2.0 }, count);
    require_samples(&s)?;
    let mut best: f64 = 0.0;
    for k in 0..count {
        let mut rng = s.rng(1, k);
        let u = rng.gen_range(lo..=hi);
        let v = rng.gen_range(lo..=hi);
        if u != v {
            best = best.max((func.apply(u) - func.apply(v)).abs() / (u - v).abs().powf(beta));
        }
    }
    Ok(best)
}

/// Hölder norm of the displacement `B(p) = f(p).x[coord] - p.x[coord]` along
/// one argument: a single coordinate (distance `|dx_j|`) or the tree
/// coordinate (distance `m^{agreement height}`).
pub fn holder_norm_estimate(
    space: &BoundarySpace,
    f: &BoundaryMap,
    coord: usize,
    direction: Direction,
    beta: f64,
    sampler: &Sampler,
) -> Result<f64> {
    require_samples(sampler)?;
    f.validate(space)?;
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(GeomError::InvalidParameter(format!("Hölder exponent must lie in (0, 1], got {beta}")));
    }
    if coord >= space.dim() {
        return Err(GeomError::InvalidParameter(format!("coordinate {coord} is out of range")));
    }
    let w = sampler.window;
    let displacement = |p: &BoundaryPoint| -> Result<f64> { Ok(f.evaluate(space, p)?.x[coord] - p.x[coord]) };
    let mut best: f64 = 0.0;
    for k in 0..sampler.count {
        let mut rng = sampler.rng(1, k);
        let (p, _) = random_point(&mut rng, space, w);
        let r = log_uniform(&mut rng, w.inner, w.outer);
        let (q, d) = match direction {
            Direction::Coord(j) => {
                if j >= space.dim() {
                    return Err(GeomError::InvalidParameter(format!("coordinate {j} is out of range")));
                }
                let mut q = p.clone();
                let step = if rng.gen_bool(0.5) { r } else { -r };
                q.x[j] += step;
                (q, r)
            }
            Direction::Tree => {
                let q = partner(&mut rng, space, w, &p, r, PairMode::TreeOnly);
                let d = space.distance(&p, &q)?;
                (q, d)
            }
        };
        best = best.max((displacement(&p)? - displacement(&q)?).abs() / d.powf(beta));
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionWitness {
    pub a: BoundaryPoint,
    pub b: BoundaryPoint,
    pub fa_xi: MAdicPoint,
    pub fb_xi: MAdicPoint,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub pairs: usize,
    pub passed: bool,
    pub witness: Option<DecompositionWitness>,
}

/// Checks that the tree output depends on the tree input only: pairs with
/// equal `xi` must have equal output `xi`.
pub fn verify_decomposition(
    space: &BoundarySpace,
    f: &BoundaryMap,
    sampler: &Sampler,
) -> Result<DecompositionReport> {
    f.validate(space)?;
    let w = sampler.window;
    for k in 0..sampler.count {
        let mut rng = sampler.rng(1, k);
        let (a, _) = random_point(&mut rng, space, w);
        let r = log_uniform(&mut rng, w.inner, w.outer);
        let b = partner(&mut rng, space, w, &a, r, PairMode::XOnly);
        let fa = f.evaluate(space, &a)?;
        let fb = f.evaluate(space, &b)?;
        if fa.xi != fb.xi {
            return Ok(DecompositionReport {
                pairs: k + 1,
                passed: false,
                witness: Some(DecompositionWitness {
                    a,
                    b,
                    fa_xi: fa.xi,
                    fb_xi: fb.xi,
                }),
            });
        }
    }
    Ok(DecompositionReport {
        pairs: sampler.count,
        passed: true,
        witness: None,
    })
}

/// Result of [`verify_coordinate_form`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoordinateFormReport {
    pub samples: usize,
    /// Layer `i` of the output ignores layers before `i`.
    pub triangular: bool,
    /// Moving layer `i` by `delta` moves output layer `i` by an amount that
    /// depends on `delta` only.
    pub layer_affine: bool,
    /// The output tree coordinate is a function of the input one.
    pub decomposes: bool,
    /// The tree coordinate is left unchanged.
    pub tree_fixed: bool,
    pub max_deviation: f64,
    pub witness: Option<String>,
}

impl CoordinateFormReport {
    pub fn passed(&self) -> bool {
        self.triangular && self.layer_affine && self.decomposes
    }
}

fn close(a: &[f64], b: &[f64], scale: f64, tol: f64) -> (bool, f64) {
    let dev = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    (dev <= tol * scale.max(1.0), dev)
}

/// Samples the coordinate form `x_i -> L_i x_i + B_i(later layers, xi)`,
/// `xi -> sigma(xi)` on random points, comparing outputs to relative
/// tolerance `tol`.
pub fn verify_coordinate_form(
    space: &BoundarySpace,
    f: &BoundaryMap,
    sampler: &Sampler,
    tol: f64,
) -> Result<CoordinateFormReport> {
    require_samples(sampler)?;
    f.validate(space)?;
    let e = space.structure();
    let ranges = e.layer_ranges();
    let w = sampler.window;
    let mut rep = CoordinateFormReport {
        samples: sampler.count,
        triangular: true,
        layer_affine: true,
        decomposes: true,
        tree_fixed: true,
        max_deviation: 0.0,
        witness: None,
    };
    let fail = |rep: &mut CoordinateFormReport, what: &str, p: &BoundaryPoint| {
        if rep.witness.is_none() {
            rep.witness = Some(format!("{what} at x = {:?}, xi = {}", p.x, p.xi));
        }
    };
    for k in 0..sampler.count {
        let mut rng = sampler.rng(1, k);
        let (p, _) = random_point(&mut rng, space, w);
        let (other, _) = random_point(&mut rng, space, w);
        let fp = f.evaluate(space, &p)?;
        if fp.xi != p.xi {
            rep.tree_fixed = false;
        }
        let mut moved_x = p.clone();
        moved_x.x = other.x.clone();
        if f.evaluate(space, &moved_x)?.xi != fp.xi {
            rep.decomposes = false;
            fail(&mut rep, "tree output depends on x", &p);
        }
        for (i, range) in ranges.iter().enumerate() {
            let scale = fp.x[range.clone()].iter().fold(1.0f64, |a, v| a.max(v.abs()));
            if i > 0 {
                let mut q = p.clone();
                for kk in 0..ranges[i - 1].end {
                    q.x[kk] = other.x[kk];
                }
                let fq = f.evaluate(space, &q)?;
                let (ok, dev) = close(&fq.x[range.clone()], &fp.x[range.clone()], scale, tol);
                rep.max_deviation = rep.max_deviation.max(dev);
                if !ok {
                    rep.triangular = false;
                    fail(&mut rep, &format!("layer {i} reads an earlier layer"), &p);
                }
            }
            // the same step of layer i taken at p and at a point with every
            // other coordinate resampled must move output layer i equally
            let delta: Vec<f64> = range
                .clone()
                .map(|_| rng.gen_range(-1.0..1.0) * w.outer.sqrt())
                .collect();
            let mut steps = Vec::new();
            for base in [&p, &other] {
                let mut stepped = (*base).clone();
                for (kk, d) in range.clone().zip(&delta) {
                    stepped.x[kk] += d;
                }
                let f0 = f.evaluate(space, base)?;
                let f1 = f.evaluate(space, &stepped)?;
                let diff: Vec<f64> = range.clone().map(|kk| f1.x[kk] - f0.x[kk]).collect();
                steps.push((diff, f0.x[range.clone()].iter().chain(&f1.x[range.clone()]).fold(1.0f64, |a, v| a.max(v.abs()))));
            }
            let s = steps[0].1.max(steps[1].1);
            let (ok, dev) = close(&steps[0].0, &steps[1].0, s, tol);
            rep.max_deviation = rep.max_deviation.max(dev);
            if !ok {
                rep.layer_affine = false;
                fail(&mut rep, &format!("layer {i} is not affine in its own coordinates"), &p);
            }
        }
    }
    Ok(rep)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxEstimate {
    pub measure: f64,
    pub image_measure: f64,
    pub factor: f64,
    pub hits: usize,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureReport {
    pub b_low: f64,
    pub b_high: f64,
    /// Closed-form factor, when the map has one.
    pub analytic: Option<f64>,
    pub boxes: Vec<BoxEstimate>,
}

const TREE_SAMPLE_DEPTH: i64 = 8;

fn random_ball_point<R: Rng>(rng: &mut R, center: &MAdicPoint, height: i64, m: u32) -> MAdicPoint {
    let mut digits: Vec<(i64, u32)> = center.nonzero_digits().filter(|(t, _)| *t >= height).collect();
    for t in (height - TREE_SAMPLE_DEPTH)..height {
        digits.push((t, rng.gen_range(0..m)));
    }
    MAdicPoint::new(m, digits).expect("digits below the base")
}

/// Monte-Carlo estimate of `mu(f(E)) / mu(E)` over `sampler.count` random
/// boxes `E` (a coordinate box times a tree ball), `mu` the product of
/// Lebesgue measure and the ball measure with `mu(ball of height t) = m^t`.
///
/// The image is measured by hit-or-miss in a bounding region of `f(E)`,
/// testing membership through the inverse map, so `f` must be invertible.
/// Injectivity is probed first by perturbing sampled points one coordinate
/// at a time and looking for equal images.
pub fn estimate_measure_distortion(
    space: &BoundarySpace,
    f: &BoundaryMap,
    sampler: &Sampler,
    samples_per_box: usize,
) -> Result<MeasureReport> {
    f.validate(space)?;
    if sampler.count == 0 || samples_per_box < 2 {
        return Err(GeomError::DegenerateSampler(samples_per_box.min(sampler.count)));
    }
    let e = space.structure();
    let n = e.dim();
    let m = space.m();
    let mf = m as f64;
    let kappas: Vec<f64> = (0..n).map(|k| space.layer_exponents()[e.layer_of(k)]).collect();
    let w: Window = sampler.window;
    let mut boxes = Vec::with_capacity(sampler.count);
    let mut inverse = None;
    for b in 0..sampler.count {
        let mut rng = sampler.box_rng(b);
        let (center, _) = random_point(&mut rng, space, w);
        let r = log_uniform(&mut rng, w.inner, w.outer);
        let half: Vec<f64> = kappas.iter().map(|k| 0.5 * r.powf(*k)).collect();
        let height = (r.ln() / mf.ln()).round() as i64;
        let ball = ball_of(&center.xi, height);
        let measure = half.iter().map(|h| 2.0 * h).product::<f64>() * mf.powi(height as i32);
        let sample_e = |rng: &mut rand_chacha::ChaCha8Rng| -> BoundaryPoint {
            let x = (0..n).map(|k| center.x[k] + rng.gen_range(-half[k]..=half[k])).collect();
            BoundaryPoint::new(x, random_ball_point(rng, &center.xi, height, m))
        };

        // injectivity probe
        for _ in 0..64 {
            let p = sample_e(&mut rng);
            let mut q = p.clone();
            let which = rng.gen_range(0..=n);
            if which < n {
                q.x[which] = center.x[which] + rng.gen_range(-half[which]..=half[which]);
            } else {
                q.xi = random_ball_point(&mut rng, &center.xi, height, m);
            }
            if p != q && f.evaluate(space, &p)? == f.evaluate(space, &q)? {
                return Err(GeomError::NotInjective(format!(
                    "({:?}, {}) and ({:?}, {}) have the same image",
                    p.x, p.xi, q.x, q.xi
                )));
            }
        }
        let g = match &inverse {
            Some(g) => g,
            None => inverse.insert(f.invert(space)?),
        };

        // bounding region of the image: corners and random points of E
        let mut images = Vec::new();
        if n <= 12 {
            for mask in 0..(1usize << n) {
                let x = (0..n)
                    .map(|k| center.x[k] + if mask >> k & 1 == 1 { half[k] } else { -half[k] })
                    .collect();
                images.push(f.evaluate(space, &BoundaryPoint::new(x, center.xi.clone()))?);
            }
        }
        for _ in 0..256 {
            let p = sample_e(&mut rng);
            images.push(f.evaluate(space, &p)?);
        }
        let mut lo = images[0].x.clone();
        let mut hi = images[0].x.clone();
        let mut top = i64::MIN;
        for img in &images {
            for k in 0..n {
                lo[k] = lo[k].min(img.x[k]);
                hi[k] = hi[k].max(img.x[k]);
            }
            if let Some(a) = agreement_height(&images[0].xi, &img.xi)? {
                top = top.max(a);
            }
        }
        if top == i64::MIN {
            top = images[0].xi.bottom().unwrap_or(0) - TREE_SAMPLE_DEPTH;
        }
        for k in 0..n {
            let pad = 0.1 * (hi[k] - lo[k]).max(1e-300);
            lo[k] -= pad;
            hi[k] += pad;
        }
        let region = (0..n).map(|k| hi[k] - lo[k]).product::<f64>() * mf.powi(top as i32);
        let anchor = images[0].xi.clone();
        let mut hits = 0usize;
        for _ in 0..samples_per_box {
            let x = (0..n).map(|k| rng.gen_range(lo[k]..=hi[k])).collect();
            let z = BoundaryPoint::new(x, random_ball_point(&mut rng, &anchor, top, m));
            let back = g.evaluate(space, &z)?;
            let inside = (0..n).all(|k| (back.x[k] - center.x[k]).abs() <= half[k])
                && ball.contains(&back.xi)?;
            if inside {
                hits += 1;
            }
        }
        let image_measure = region * hits as f64 / samples_per_box as f64;
        boxes.push(BoxEstimate {
            measure,
            image_measure,
            factor: image_measure / measure,
            hits,
            samples: samples_per_box,
        });
    }
    Ok(MeasureReport {
        b_low: boxes.iter().map(|b| b.factor).fold(f64::INFINITY, f64::min),
        b_high: boxes.iter().map(|b| b.factor).fold(0.0, f64::max),
        analytic: f.measure_factor(space),
        boxes,
    })
}

/// Behaviour of an estimate as the window grows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    /// Last value at most twice the first.
    Bounded,
    /// Non-decreasing and at least ten times the first value at the end.
    Diverging,
    Unclear,
}

fn trend(values: &[f64]) -> Trend {
    let (Some(first), Some(last)) = (values.first(), values.last()) else {
        return Trend::Unclear;
    };
    if last / first <= 2.0 {
        Trend::Bounded
    } else if values.windows(2).all(|w| w[1] >= w[0]) && last / first >= 10.0 {
        Trend::Diverging
    } else {
        Trend::Unclear
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowSummary {
    pub outer: f64,
    pub bilipschitz_ratio: f64,
    /// `max_t eta_hat(t) / t` over populated bins.
    pub eta_normalized: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RigidityProfile {
    pub windows: Vec<WindowSummary>,
    pub bilipschitz_trend: Trend,
    pub eta_trend: Trend,
}

impl RigidityProfile {
    /// Both estimates bounded, or both diverging.
    pub fn consistent(&self) -> bool {
        matches!(
            (self.bilipschitz_trend, self.eta_trend),
            (Trend::Bounded, Trend::Bounded) | (Trend::Diverging, Trend::Diverging)
        )
    }

    /// Bounded modulus while the bilipschitz ratio diverges.
    pub fn anomalous(&self) -> bool {
        self.eta_trend == Trend::Bounded && self.bilipschitz_trend == Trend::Diverging
    }
}

/// Bilipschitz ratio and normalized modulus over windows `[inner, outer_k]`.
pub fn rigidity_profile(
    space: &BoundarySpace,
    f: &BoundaryMap,
    seed: u64,
    inner: f64,
    outers: &[f64],
    count: usize,
) -> Result<RigidityProfile> {
    let m = space.m() as f64;
    let grid = [1.0 / m, 1.0, m];
    let mut windows = Vec::with_capacity(outers.len());
    for &outer in outers {
        let s = Sampler::new(seed, Window::new(inner, outer)?, count);
        let bl = estimate_bilipschitz(space, f, &s)?;
        let qs = estimate_qs_modulus(space, f, &s, &grid, 0.05)?;
        windows.push(WindowSummary {
            outer,
            bilipschitz_ratio: bl.ratio(),
            eta_normalized: qs.normalized_max().unwrap_or(f64::NAN),
        });
    }
    let ratios: Vec<f64> = windows.iter().map(|w| w.bilipschitz_ratio).collect();
    let etas: Vec<f64> = windows.iter().map(|w| w.eta_normalized).collect();
    Ok(RigidityProfile {
        bilipschitz_trend: trend(&ratios),
        eta_trend: trend(&etas),
        windows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heintze::ExpandingStructure;
    use crate::maps::{SimilarityData, Source, Term};

    fn space(layers: &[(f64, usize)], m: u32) -> BoundarySpace {
        BoundarySpace::new(ExpandingStructure::diagonal(layers).unwrap(), m).unwrap()
    }

    fn sampler(count: usize) -> Sampler {
        Sampler::new(5, Window::new(0.01, 100.0).unwrap(), count)
    }

    #[test]
    fn identity_is_exact() {
        let s = space(&[(1.0, 1), (2.0, 1)], 2);
        let est = estimate_bilipschitz(&s, &BoundaryMap::Identity, &sampler(500)).unwrap();
        assert_eq!((est.a_low, est.b_high), (1.0, 1.0));
        assert!(!est.curve.is_empty());
        assert!(matches!(
            estimate_bilipschitz(&s, &BoundaryMap::Identity, &sampler(1)),
            Err(GeomError::DegenerateSampler(1))
        ));
        let qs = estimate_qs_modulus(&s, &BoundaryMap::Identity, &sampler(500), &[0.5, 1.0, 2.0], 0.05).unwrap();
        for b in &qs.bins {
            if let Some(eta) = b.eta {
                assert!(eta <= b.t * 1.05 + 1e-12);
            }
        }
    }

    #[test]
    fn sign_routing_breaks_decomposition() {
        let s = space(&[(1.0, 1)], 2);
        let f = BoundaryMap::SignRouted {
            coordinate: 0,
            offset: "2:{0:1}".parse().unwrap(),
        };
        let rep = verify_decomposition(&s, &f, &sampler(500)).unwrap();
        assert!(!rep.passed);
        let w = rep.witness.unwrap();
        assert_eq!(w.a.xi, w.b.xi);
        assert_ne!(w.fa_xi, w.fb_xi);
        assert!(verify_decomposition(&s, &BoundaryMap::dilation(2), &sampler(500)).unwrap().passed);
    }

    #[test]
    fn coordinate_form_flags_backward_dependence() {
        let s = space(&[(1.0, 1), (2.0, 1)], 2);
        let at = BoundaryMap::AlmostTranslation {
            terms: vec![Term {
                layer: 0,
                component: 0,
                source: Source::Coord(1),
                func: Func::Sine { amplitude: 1.0, frequency: 1.0 },
            }],
        };
        let rep = verify_coordinate_form(&s, &at, &sampler(200), 1e-9).unwrap();
        assert!(rep.passed() && rep.tree_fixed, "{rep:?}");
        let rep = verify_coordinate_form(&s, &BoundaryMap::Power { theta: 0.5 }, &sampler(200), 1e-9).unwrap();
        assert!(!rep.layer_affine);
        let sim = BoundaryMap::Similarity(SimilarityData { shift: 1, ..Default::default() });
        let rep = verify_coordinate_form(&s, &sim, &sampler(200), 1e-9).unwrap();
        assert!(rep.passed() && !rep.tree_fixed);
    }

    #[test]
    fn collapse_is_reported_as_non_injective() {
        let s = space(&[(1.0, 2)], 2);
        let err = estimate_measure_distortion(&s, &BoundaryMap::Collapse { coordinate: 1 }, &sampler(3), 100);
        assert!(matches!(err, Err(GeomError::NotInjective(_))));
    }

    #[test]
    fn measure_of_identity_is_one() {
        let s = space(&[(1.0, 1), (2.0, 1)], 3);
        let rep = estimate_measure_distortion(&s, &BoundaryMap::Identity, &sampler(3), 20_000).unwrap();
        assert_eq!(rep.analytic, Some(1.0));
        assert!(rep.b_low > 0.97 && rep.b_high < 1.03, "{rep:?}");
    }

    #[test]
    fn holder_of_square_root() {
        let f = Func::ClampedPower { scale: 1.0, theta: 0.5, clamp: 1.0 };
        let est = holder_norm_1d(&f, 0.5, 0.0, 1.0, 9, 20_000).unwrap();
        assert!(est <= 1.0 + 1e-12 && est > 0.97, "{est}");
        let c = Func::Affine { slope: 0.0, offset: 3.0 };
        assert_eq!(holder_norm_1d(&c, 0.5, 0.0, 1.0, 9, 100).unwrap(), 0.0);
    }

    #[test]
    fn trend_classes() {
        assert_eq!(trend(&[1.0, 1.2, 1.1]), Trend::Bounded);
        assert_eq!(trend(&[1.0, 3.0, 9.0, 30.0]), Trend::Diverging);
        assert_eq!(trend(&[1.0, 30.0, 9.0]), Trend::Unclear);
    }
}
