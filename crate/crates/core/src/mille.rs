//! The coarse millefeuille space `X = G_phi x_h T_{m+1}` and its parabolic
//! visual boundary `R^n x Q_m`.
//!
//! A point is `(x, xi, t)`: a point of `G_phi` at height `t` together with
//! the tree vertex at height `floor(t)` on the ray of `xi`. Paths between
//! two points must climb at least to the height where the two tree
//! positions merge, which gives the distance
//!
//! ```text
//! inf_{h >= max(s, t, h_merge)} (h - s) + (h - t) + d_h(x, y).
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::heintze::{
    dm_closed_form, envelope_min, level_of_difference, unit_height_of_difference,
    ExpandingStructure,
};
use crate::madic::{agreement_height, ball_of, MAdicPoint, TreeVertex};

/// A point of the millefeuille space.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MillePoint {
    pub x: Vec<f64>,
    pub xi: MAdicPoint,
    pub t: f64,
}

impl MillePoint {
    pub fn new(x: Vec<f64>, xi: MAdicPoint, t: f64) -> Self {
        Self { x, xi, t }
    }

    /// Tree vertex carrying the point.
    pub fn vertex(&self) -> TreeVertex {
        ball_of(&self.xi, self.t.floor() as i64)
    }

    /// Equality modulo the choice of ray through the current tree vertex.
    pub fn same_point(&self, other: &Self) -> Result<bool> {
        if self.x != other.x || self.t != other.t {
            return Ok(false);
        }
        Ok(agreement_height(&self.xi, &other.xi)?.is_none_or(|a| a as f64 <= self.t.floor()))
    }
}

/// A point `(x, xi)` of the boundary `R^n x Q_m`.
/// JSON: `{"x":[1.0,2.0],"xi":"2:{0:1}"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryPoint {
    pub x: Vec<f64>,
    pub xi: MAdicPoint,
}

impl BoundaryPoint {
    pub fn new(x: Vec<f64>, xi: MAdicPoint) -> Self {
        Self { x, xi }
    }
}

fn check_tree(m: u32, xi: &MAdicPoint) -> Result<()> {
    if m < 2 {
        return Err(GeomError::InvalidBase(m));
    }
    if xi.base() != m {
        return Err(GeomError::BaseMismatch(m, xi.base()));
    }
    Ok(())
}

fn difference(e: &ExpandingStructure, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    e.check_dim(x)?;
    e.check_dim(y)?;
    Ok(x.iter().zip(y).map(|(a, b)| a - b).collect())
}

/// Coarse distance in the millefeuille space.
pub fn mille_distance(e: &ExpandingStructure, m: u32, p: &MillePoint, q: &MillePoint) -> Result<f64> {
    check_tree(m, &p.xi)?;
    check_tree(m, &q.xi)?;
    let diff = difference(e, &p.x, &q.x)?;
    let mut lo = p.t.max(q.t);
    if let Some(h) = agreement_height(&p.xi, &q.xi)? {
        lo = lo.max(h as f64);
    }
    Ok(envelope_min(e, &diff, lo, None)? - p.t - q.t)
}

/// Which of the three configurations a boundary pair is in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCase {
    /// Same `xi`: both rays lie in one coherent hyperplane.
    SameHyperplane,
    /// Same `x`: both rays lie in one copy of the tree.
    SameTree,
    Mixed,
}

pub fn boundary_case(a: &BoundaryPoint, b: &BoundaryPoint) -> BoundaryCase {
    if a.xi == b.xi {
        BoundaryCase::SameHyperplane
    } else if a.x == b.x {
        BoundaryCase::SameTree
    } else {
        BoundaryCase::Mixed
    }
}

fn check_normalized(e: &ExpandingStructure, m: u32) -> Result<()> {
    let expected = (m as f64).ln();
    if (e.alpha1() - expected).abs() > 1e-9 * expected {
        return Err(GeomError::NotNormalized {
            m,
            alpha1: e.alpha1(),
            expected,
        });
    }
    Ok(())
}

/// Visual distance `m^{t*}` on `R^n x Q_m`, where `t*` is the least height
/// above the tree merge height from which the two vertical geodesics stay
/// within unit distance. Requires `alpha_1 = ln m`
/// (see [`crate::heintze::normalize_for_tree`]).
pub fn boundary_visual(
    e: &ExpandingStructure,
    m: u32,
    a: &BoundaryPoint,
    b: &BoundaryPoint,
) -> Result<f64> {
    check_tree(m, &a.xi)?;
    check_tree(m, &b.xi)?;
    check_normalized(e, m)?;
    let diff = difference(e, &a.x, &b.x)?;
    let merge = agreement_height(&a.xi, &b.xi)?.map(|h| h as f64);
    let unit = if diff.iter().all(|d| *d == 0.0) {
        None
    } else {
        Some(unit_height_of_difference(e, &diff)?)
    };
    let top = match (merge, unit) {
        (None, None) => return Ok(0.0),
        (Some(h), None) | (None, Some(h)) => h,
        (Some(h), Some(u)) => h.max(u),
    };
    Ok((m as f64).powf(top))
}

/// `max(D_M(a.x, b.x), m^{agreement height})`.
pub fn dmax_formula(
    e: &ExpandingStructure,
    m: u32,
    a: &BoundaryPoint,
    b: &BoundaryPoint,
) -> Result<f64> {
    check_tree(m, &a.xi)?;
    check_tree(m, &b.xi)?;
    let dm = dm_closed_form(e, &a.x, &b.x)?;
    let tree = agreement_height(&a.xi, &b.xi)?.map_or(0.0, |h| (m as f64).powi(h as i32));
    Ok(dm.max(tree))
}

/// One of the two copies of the horoball complement `{t <= cap}` glued
/// along the horosphere at `cap`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sheet {
    Left,
    Right,
}

/// A point of a doubled horoball complement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SheetPoint {
    pub x: Vec<f64>,
    pub t: f64,
    pub sheet: Sheet,
}

/// Induced path distance in two copies of `{t <= cap}` glued along the
/// horosphere at `cap`. Within one copy paths may turn at any height up to
/// `cap`; between copies they must pass through the gluing horosphere.
pub fn constrained_distance(
    e: &ExpandingStructure,
    p: &SheetPoint,
    q: &SheetPoint,
    cap: f64,
) -> Result<f64> {
    for t in [p.t, q.t] {
        if t > cap {
            return Err(GeomError::AboveCap { height: t, cap });
        }
    }
    let diff = difference(e, &p.x, &q.x)?;
    if p.sheet == q.sheet {
        let lo = p.t.max(q.t);
        Ok(envelope_min(e, &diff, lo, Some(cap))? - p.t - q.t)
    } else {
        Ok((cap - p.t) + (cap - q.t) + level_of_difference(e, cap, &diff))
    }
}

/// The preimage of a bi-infinite tree geodesic under the projection to
/// `T_{m+1}`.
#[derive(Clone, Debug, PartialEq)]
pub enum Hyperplane {
    /// A vertical line: the two ends are the same ray, and the hyperplane
    /// is a copy of `G_phi`.
    Coherent { ray: MAdicPoint },
    /// Two rays meeting at `apex` and continuing upward together; the
    /// orientation changes once, at the apex height.
    Doubled {
        apex: TreeVertex,
        left: MAdicPoint,
        right: MAdicPoint,
    },
}

/// Classifies the tree line spanned by two downward rays.
pub fn classify_hyperplane(left: &MAdicPoint, right: &MAdicPoint) -> Result<Hyperplane> {
    match agreement_height(left, right)? {
        None => Ok(Hyperplane::Coherent { ray: left.clone() }),
        Some(h) => Ok(Hyperplane::Doubled {
            apex: ball_of(left, h),
            left: left.clone(),
            right: right.clone(),
        }),
    }
}

fn on_ray(ray: &MAdicPoint, p: &MillePoint) -> Result<bool> {
    Ok(agreement_height(ray, &p.xi)?.is_none_or(|a| a as f64 <= p.t.floor()))
}

impl Hyperplane {
    pub fn is_coherent(&self) -> bool {
        matches!(self, Hyperplane::Coherent { .. })
    }

    pub fn apex_height(&self) -> Option<i64> {
        match self {
            Hyperplane::Coherent { .. } => None,
            Hyperplane::Doubled { apex, .. } => Some(apex.height()),
        }
    }

    pub fn contains(&self, p: &MillePoint) -> Result<bool> {
        match self {
            Hyperplane::Coherent { ray } => on_ray(ray, p),
            Hyperplane::Doubled { left, right, .. } => Ok(on_ray(left, p)? || on_ray(right, p)?),
        }
    }

    /// The point of the hyperplane over `(x, t)`; for a doubled hyperplane
    /// below the apex, `sheet` picks the branch.
    pub fn fiber_point(&self, x: Vec<f64>, t: f64, sheet: Sheet) -> MillePoint {
        let xi = match (self, sheet) {
            (Hyperplane::Coherent { ray }, _) => ray.clone(),
            (Hyperplane::Doubled { left, .. }, Sheet::Left) => left.clone(),
            (Hyperplane::Doubled { right, .. }, Sheet::Right) => right.clone(),
        };
        MillePoint::new(x, xi, t)
    }

    /// Coordinates of `p` in the doubled horoball complement below the
    /// apex. `None` for coherent hyperplanes, points above the apex, and
    /// points off the hyperplane.
    pub fn sheet_point(&self, p: &MillePoint) -> Result<Option<SheetPoint>> {
        let Hyperplane::Doubled { apex, left, right } = self else {
            return Ok(None);
        };
        if p.t > apex.height() as f64 {
            return Ok(None);
        }
        let sheet = if on_ray(left, p)? {
            Sheet::Left
        } else if on_ray(right, p)? {
            Sheet::Right
        } else {
            return Ok(None);
        };
        Ok(Some(SheetPoint {
            x: p.x.clone(),
            t: p.t,
            sheet,
        }))
    }
}

/// One pair of the horoball distortion experiment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistortionSample {
    pub level_distance: f64,
    pub constrained: f64,
    pub ambient: f64,
    pub ratio: f64,
}

/// Pairs at the gluing height in opposite copies, at the given level
/// distances along the first coordinate, with their constrained and
/// ambient distances.
pub fn horoball_distortion(
    e: &ExpandingStructure,
    m: u32,
    cap: i64,
    level_distances: &[f64],
) -> Result<Vec<DistortionSample>> {
    let left = MAdicPoint::zero(m)?;
    let right = MAdicPoint::new(m, [(cap - 1, 1)])?;
    let plane = classify_hyperplane(&left, &right)?;
    let t = cap as f64;
    let mut out = Vec::with_capacity(level_distances.len());
    for &d in level_distances {
        if !(d > 0.0) {
            return Err(GeomError::InvalidParameter(format!(
                "level distance must be positive, got {d}"
            )));
        }
        let mut unit = vec![0.0; e.dim()];
        unit[0] = d;
        let x = e.flow(t, &unit);
        let p = plane.fiber_point(vec![0.0; e.dim()], t, Sheet::Left);
        let q = plane.fiber_point(x, t, Sheet::Right);
        let sp = plane.sheet_point(&p)?.expect("left branch point");
        let sq = plane.sheet_point(&q)?.expect("right branch point");
        let constrained = constrained_distance(e, &sp, &sq, t)?;
        let ambient = mille_distance(e, m, &p, &q)?;
        out.push(DistortionSample {
            level_distance: d,
            constrained,
            ambient,
            ratio: constrained / ambient,
        });
    }
    Ok(out)
}

/// Least-squares fit of `ln(constrained)` against the ambient distance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistortionFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest `K` with `constrained >= K exp(alpha_1 ambient / 2)` on every sample.
    pub lower_constant: f64,
}

pub fn fit_distortion(alpha1: f64, samples: &[DistortionSample]) -> Result<DistortionFit> {
    if samples.len() < 2 {
        return Err(GeomError::DegenerateSampler(samples.len()));
    }
    let n = samples.len() as f64;
    let xs: Vec<f64> = samples.iter().map(|s| s.ambient).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.constrained.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(GeomError::InvalidParameter("ambient distances are all equal".into()));
    }
    let slope = sxy / sxx;
    let lower = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| y - 0.5 * alpha1 * x)
        .fold(f64::INFINITY, f64::min);
    Ok(DistortionFit {
        slope,
        intercept: my - slope * mx,
        lower_constant: lower.exp(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heintze::{normalize_for_tree, visual_distance};

    fn p(s: &str) -> MAdicPoint {
        s.parse().unwrap()
    }

    fn e1() -> ExpandingStructure {
        ExpandingStructure::diagonal(&[(1.0, 1)]).unwrap()
    }

    #[test]
    fn mille_examples() {
        let e = e1();
        let a = MillePoint::new(vec![0.3], p("2:{1:1}"), 0.5);
        assert_eq!(mille_distance(&e, 2, &a, &a).unwrap(), 0.0);
        let b = MillePoint::new(vec![0.3], p("2:{1:1}"), -2.0);
        assert!((mille_distance(&e, 2, &a, &b).unwrap() - 2.5).abs() < 1e-12);
        let c = MillePoint::new(vec![0.0], p("2:{4:1}"), 0.0);
        let d = MillePoint::new(vec![0.0], p("2:{}"), 0.0);
        assert!((mille_distance(&e, 2, &c, &d).unwrap() - 10.0).abs() < 1e-12);
        assert!(mille_distance(&e, 3, &c, &d).is_err());
    }

    #[test]
    fn ball_equivalent_points_are_equal() {
        let a = MillePoint::new(vec![1.0], p("2:{-3:1}"), 0.7);
        let b = MillePoint::new(vec![1.0], p("2:{}"), 0.7);
        assert!(a.same_point(&b).unwrap());
        assert_eq!(mille_distance(&e1(), 2, &a, &b).unwrap(), 0.0);
        let c = MillePoint::new(vec![1.0], p("2:{2:1}"), 0.7);
        assert!(!a.same_point(&c).unwrap());
    }

    #[test]
    fn boundary_examples() {
        let (e, _) = normalize_for_tree(&ExpandingStructure::diagonal(&[(1.0, 1), (2.0, 1)]).unwrap(), 2).unwrap();
        let a = BoundaryPoint::new(vec![0.5, 3.0], p("2:{2:1}"));
        assert_eq!(boundary_visual(&e, 2, &a, &a).unwrap(), 0.0);
        let b = BoundaryPoint::new(vec![-1.0, 7.0], p("2:{2:1}"));
        assert_eq!(boundary_case(&a, &b), BoundaryCase::SameHyperplane);
        let v = visual_distance(&e, &a.x, &b.x).unwrap();
        assert!((boundary_visual(&e, 2, &a, &b).unwrap() - v).abs() < 1e-12 * v);
        let c = BoundaryPoint::new(vec![0.5, 3.0], p("2:{-1:1}"));
        assert_eq!(boundary_case(&a, &c), BoundaryCase::SameTree);
        assert!((boundary_visual(&e, 2, &a, &c).unwrap() - 8.0).abs() < 1e-12);
        let raw = ExpandingStructure::diagonal(&[(1.0, 1), (2.0, 1)]).unwrap();
        assert!(matches!(
            boundary_visual(&raw, 2, &a, &c),
            Err(GeomError::NotNormalized { .. })
        ));
    }

    #[test]
    fn dmax_examples() {
        let e = ExpandingStructure::diagonal(&[(1.0, 1), (2.0, 1)]).unwrap();
        let a = BoundaryPoint::new(vec![0.0, 4.0], p("3:{-1:2}"));
        let b = BoundaryPoint::new(vec![0.0, 0.0], p("3:{}"));
        assert_eq!(dmax_formula(&e, 3, &a, &a).unwrap(), 0.0);
        assert!((dmax_formula(&e, 3, &a, &b).unwrap() - 2.0).abs() < 1e-15);
        let c = BoundaryPoint::new(vec![0.0, 4.0], p("3:{}"));
        assert!((dmax_formula(&e, 3, &a, &c).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn constrained_examples() {
        let e = e1();
        let cap = 3.0;
        let d = 50.0;
        let sp = SheetPoint { x: vec![0.0], t: cap, sheet: Sheet::Left };
        assert_eq!(constrained_distance(&e, &sp, &sp, cap).unwrap(), 0.0);
        let sq = SheetPoint { x: vec![d * cap.exp()], t: cap, sheet: Sheet::Right };
        assert!((constrained_distance(&e, &sp, &sq, cap).unwrap() - d).abs() < 1e-9);
        // same sheet: nothing better than crossing at the cap either
        let same = SheetPoint { sheet: Sheet::Left, ..sq.clone() };
        assert!((constrained_distance(&e, &sp, &same, cap).unwrap() - d).abs() < 1e-9);
        let high = SheetPoint { t: 4.0, ..sp.clone() };
        assert!(matches!(
            constrained_distance(&e, &high, &sq, cap),
            Err(GeomError::AboveCap { .. })
        ));
    }

    #[test]
    fn hyperplane_examples() {
        let xi = p("2:{1:1,-4:1}");
        let plane = classify_hyperplane(&xi, &xi.clone()).unwrap();
        assert!(plane.is_coherent());
        let q = MillePoint::new(vec![2.0, 1.0], p("2:{1:1}"), -3.5);
        assert!(!plane.contains(&q).unwrap());
        let on = plane.fiber_point(vec![2.0, 1.0], -3.5, Sheet::Left);
        assert!(plane.contains(&on).unwrap());

        let doubled = classify_hyperplane(&p("2:{2:1}"), &p("2:{}")).unwrap();
        assert_eq!(doubled.apex_height(), Some(3));
        let r = doubled.fiber_point(vec![0.0], 1.0, Sheet::Right);
        assert_eq!(doubled.sheet_point(&r).unwrap().unwrap().sheet, Sheet::Right);
        let above = doubled.fiber_point(vec![0.0], 3.5, Sheet::Right);
        assert!(doubled.contains(&above).unwrap());
        assert!(doubled.sheet_point(&above).unwrap().is_none());
        assert!(classify_hyperplane(&p("2:{}"), &p("3:{}")).is_err());
    }

    #[test]
    fn distortion_ambient_matches_tent_closed_form() {
        let e = e1();
        let ds = [10f64, 100.0, 1000.0];
        let samples = horoball_distortion(&e, 2, 4, &ds).unwrap();
        for (s, d) in samples.iter().zip(ds) {
            assert!((s.constrained - d).abs() < 1e-9 * d);
            let tent = 2.0 * (d / 2.0).ln() + 2.0;
            assert!((s.ambient - tent).abs() < 1e-9);
        }
        let fit = fit_distortion(1.0, &samples).unwrap();
        assert!((fit.slope - 0.5).abs() < 1e-6);
    }
}
