use serde::{Deserialize, Serialize};

use super::BoundarySpace;
use crate::error::{GeomError, Result};
use crate::madic::MAdicPoint;
use crate::mille::BoundaryPoint;

/// Real functions used as the `B_i` of almost translations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Func {
    /// `slope * u + offset`.
    Affine { slope: f64, offset: f64 },
    /// `scale * sign(u) * min(|u|, clamp)^theta`, `0 < theta <= 1`.
    ClampedPower { scale: f64, theta: f64, clamp: f64 },
    /// `amplitude * sin(frequency * u)`.
    Sine { amplitude: f64, frequency: f64 },
}

impl Func {
    pub fn apply(&self, u: f64) -> f64 {
        match *self {
            Func::Affine { slope, offset } => slope * u + offset,
            Func::ClampedPower { scale, theta, clamp } => {
                scale * u.signum() * u.abs().min(clamp).powf(theta)
            }
            Func::Sine {
                amplitude,
                frequency,
            } => amplitude * (frequency * u).sin(),
        }
    }

    /// Declared bound on `sup |B(u) - B(v)| / |u - v|^beta`, if finite.
    pub fn holder_bound(&self, beta: f64) -> Option<f64> {
        match *self {
            Func::Affine { slope, .. } => {
                if slope == 0.0 {
                    Some(0.0)
                } else {
                    (beta == 1.0).then_some(slope.abs())
                }
            }
            Func::ClampedPower { scale, theta, clamp } => (beta <= theta).then(|| {
                scale.abs() * 2f64.powf(1.0 - theta) * (2.0 * clamp).powf(theta - beta)
            }),
            Func::Sine {
                amplitude,
                frequency,
            } => Some(amplitude.abs() * frequency.abs().powf(beta) * 2f64.powf(1.0 - beta)),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Func::Affine { slope, offset } => slope.is_finite() && offset.is_finite(),
            Func::ClampedPower { scale, theta, clamp } => {
                scale.is_finite() && theta > 0.0 && theta <= 1.0 && clamp > 0.0 && clamp.is_finite()
            }
            Func::Sine {
                amplitude,
                frequency,
            } => amplitude.is_finite() && frequency.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(GeomError::InvalidParameter(format!("bad function parameters {self:?}")))
        }
    }
}

/// Argument of an almost-translation term.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    /// The coordinate with this global index.
    Coord(usize),
    /// The real feature `sum_t d_t m^{beta t}` of the tree coordinate.
    Tree(f64),
}

/// One summand `B(source)` added to coordinate `component` of `layer`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub layer: usize,
    pub component: usize,
    pub source: Source,
    pub func: Func,
}

/// Similarity of ratio `m^shift`: layer `i` maps by
/// `x_i -> m^{shift alpha_i / alpha_1} A_i x_i + b_i`, the tree coordinate
/// by `xi -> shift(xi + tree_offset)` (digit-wise sum, heights moved up by
/// `shift`).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimilarityData {
    #[serde(default)]
    pub shift: i64,
    /// One orthogonal matrix per layer, row-major; identity when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotations: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub translation: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tree_offset: Option<MAdicPoint>,
}

/// Which argument a Hölder estimate varies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Coord(usize),
    Tree,
}

/// A map of `R^n x Q_m`.
///
/// `AlmostTranslation` adds, coordinate by coordinate, functions of
/// strictly later layers or of the tree coordinate, and fixes the tree
/// coordinate. `Power`, `TreeSnowflake`, `SignRouted` and `Collapse` are
/// non-examples: homeomorphisms that are not bilipschitz, a map whose tree
/// output depends on `x`, and a map that is not injective.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundaryMap {
    Identity,
    Similarity(SimilarityData),
    AlmostTranslation {
        terms: Vec<Term>,
    },
    /// Inverse of the almost translation with these terms.
    AlmostTranslationInverse {
        terms: Vec<Term>,
    },
    /// `x_i -> x_i |x_i|^{theta - 1}` on every layer.
    Power {
        theta: f64,
    },
    /// Moves the tree digit at height `t` to height `factor * t`.
    TreeSnowflake {
        factor: i64,
    },
    /// Adds `offset` to the tree coordinate when `x[coordinate] >= 0`.
    SignRouted {
        coordinate: usize,
        offset: MAdicPoint,
    },
    /// `x[coordinate] -> 0`.
    Collapse {
        coordinate: usize,
    },
    /// Applies the factors in order.
    Composite {
        factors: Vec<BoundaryMap>,
    },
}

fn mat_vec(a: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum())
        .collect()
}

fn transpose(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    (0..a.len())
        .map(|j| a.iter().map(|row| row[j]).collect())
        .collect()
}

fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let bt = transpose(b);
    a.iter().map(|row| mat_vec(&bt, row)).collect()
}

fn identity(k: usize) -> Vec<Vec<f64>> {
    (0..k)
        .map(|i| (0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

impl SimilarityData {
    /// Ratio `m^shift`.
    pub fn ratio(&self, m: u32) -> f64 {
        (m as f64).powi(self.shift as i32)
    }

    fn rotation(&self, layer: usize, size: usize) -> Vec<Vec<f64>> {
        match &self.rotations {
            Some(r) => r[layer].clone(),
            None => identity(size),
        }
    }

    fn validate(&self, space: &BoundarySpace) -> Result<()> {
        let e = space.structure();
        if let Some(rots) = &self.rotations {
            if rots.len() != e.layers().len() {
                return Err(GeomError::InvalidParameter(format!(
                    "expected {} rotation blocks, got {}",
                    e.layers().len(),
                    rots.len()
                )));
            }
            for (i, (a, l)) in rots.iter().zip(e.layers()).enumerate() {
                if a.len() != l.size || a.iter().any(|r| r.len() != l.size) {
                    return Err(GeomError::InvalidParameter(format!(
                        "rotation block {i} must be {0}x{0}",
                        l.size
                    )));
                }
                let ata = mat_mul(&transpose(a), a);
                let dev = ata
                    .iter()
                    .enumerate()
                    .flat_map(|(r, row)| {
                        row.iter()
                            .enumerate()
                            .map(move |(c, v)| (v - if r == c { 1.0 } else { 0.0 }).abs())
                    })
                    .fold(0.0, f64::max);
                if dev > 1e-9 {
                    return Err(GeomError::InvalidParameter(format!(
                        "rotation block {i} is not orthogonal (deviation {dev:e})"
                    )));
                }
            }
        }
        if let Some(b) = &self.translation {
            e.check_dim(b)?;
        }
        if let Some(o) = &self.tree_offset {
            if o.base() != space.m() {
                return Err(GeomError::BaseMismatch(space.m(), o.base()));
            }
        }
        Ok(())
    }

    fn apply(&self, space: &BoundarySpace, p: &BoundaryPoint) -> Result<BoundaryPoint> {
        let e = space.structure();
        let c = self.ratio(space.m());
        let mut x = vec![0.0; e.dim()];
        for (i, (range, kappa)) in e
            .layer_ranges()
            .into_iter()
            .zip(space.layer_exponents())
            .enumerate()
        {
            let a = self.rotation(i, range.len());
            let scale = c.powf(kappa);
            let rotated = mat_vec(&a, &p.x[range.clone()]);
            for (k, v) in range.zip(rotated) {
                x[k] = scale * v + self.translation.as_ref().map_or(0.0, |b| b[k]);
            }
        }
        let xi = match &self.tree_offset {
            Some(o) => p.xi.digitwise_add(o)?,
            None => p.xi.clone(),
        };
        Ok(BoundaryPoint::new(x, xi.shift_heights(self.shift)))
    }

    fn inverse(&self, space: &BoundarySpace) -> Self {
        let e = space.structure();
        let c = self.ratio(space.m());
        let rotations = self
            .rotations
            .as_ref()
            .map(|r| r.iter().map(|a| transpose(a)).collect::<Vec<_>>());
        let translation = self.translation.as_ref().map(|b| {
            let mut out = vec![0.0; e.dim()];
            for (i, (range, kappa)) in e
                .layer_ranges()
                .into_iter()
                .zip(space.layer_exponents())
                .enumerate()
            {
                let at = transpose(&self.rotation(i, range.len()));
                let back = mat_vec(&at, &b[range.clone()]);
                let scale = c.powf(-kappa);
                for (k, v) in range.zip(back) {
                    out[k] = -scale * v;
                }
            }
            out
        });
        Self {
            shift: -self.shift,
            rotations,
            translation,
            tree_offset: self
                .tree_offset
                .as_ref()
                .map(|o| o.digitwise_neg().shift_heights(self.shift)),
        }
    }

    /// `self` followed by `next`.
    fn then(&self, next: &Self, space: &BoundarySpace) -> Result<Self> {
        let e = space.structure();
        let c_next = next.ratio(space.m());
        let layers = e.layer_ranges();
        let rotations = if self.rotations.is_none() && next.rotations.is_none() {
            None
        } else {
            Some(
                layers
                    .iter()
                    .enumerate()
                    .map(|(i, r)| mat_mul(&next.rotation(i, r.len()), &self.rotation(i, r.len())))
                    .collect(),
            )
        };
        let translation = if self.translation.is_none() && next.translation.is_none() {
            None
        } else {
            let mut out = vec![0.0; e.dim()];
            for (i, (range, kappa)) in layers.iter().zip(space.layer_exponents()).enumerate() {
                let a = next.rotation(i, range.len());
                let b_self: Vec<f64> = match &self.translation {
                    Some(b) => b[range.clone()].to_vec(),
                    None => vec![0.0; range.len()],
                };
                let moved = mat_vec(&a, &b_self);
                let scale = c_next.powf(kappa);
                for (k, v) in range.clone().zip(moved) {
                    out[k] = scale * v + next.translation.as_ref().map_or(0.0, |b| b[k]);
                }
            }
            Some(out)
        };
        let tree_offset = match (&self.tree_offset, &next.tree_offset) {
            (None, None) => None,
            (Some(o), None) => Some(o.clone()),
            (None, Some(o)) => Some(o.shift_heights(-self.shift)),
            (Some(a), Some(b)) => Some(a.digitwise_add(&b.shift_heights(-self.shift))?),
        };
        Ok(Self {
            shift: self.shift + next.shift,
            rotations,
            translation,
            tree_offset,
        })
    }
}

fn term_target(space: &BoundarySpace, t: &Term) -> Result<usize> {
    let e = space.structure();
    let layers = e.layers();
    if t.layer >= layers.len() || t.component >= layers[t.layer].size {
        return Err(GeomError::InvalidParameter(format!(
            "term target ({}, {}) is outside the structure",
            t.layer, t.component
        )));
    }
    Ok(e.layer_ranges()[t.layer].start + t.component)
}

fn source_value(source: Source, x: &[f64], p: &BoundaryPoint) -> f64 {
    match source {
        Source::Coord(j) => x[j],
        Source::Tree(beta) => p.xi.real_feature(beta),
    }
}

fn validate_terms(space: &BoundarySpace, terms: &[Term]) -> Result<()> {
    let e = space.structure();
    for t in terms {
        term_target(space, t)?;
        t.func.validate()?;
        match t.source {
            Source::Coord(j) => {
                if j >= e.dim() {
                    return Err(GeomError::InvalidParameter(format!(
                        "source coordinate {j} is out of range"
                    )));
                }
                if e.layer_of(j) <= t.layer {
                    return Err(GeomError::InvalidParameter(format!(
                        "term on layer {} may only read strictly later layers, got coordinate {j}",
                        t.layer
                    )));
                }
            }
            Source::Tree(beta) => {
                if !(beta > 0.0) || !beta.is_finite() {
                    return Err(GeomError::InvalidParameter(format!(
                        "tree feature exponent must be positive, got {beta}"
                    )));
                }
            }
        }
    }
    Ok(())
}

// Terms whose targets are read by no term: sources are then untouched by
// every factor, so Hölder bounds of a composition add up.
fn sources_untouched(space: &BoundarySpace, terms: &[&Term]) -> bool {
    let targets: Vec<usize> = terms.iter().filter_map(|t| term_target(space, t).ok()).collect();
    terms.iter().all(|t| match t.source {
        Source::Coord(j) => !targets.contains(&j),
        Source::Tree(_) => true,
    })
}

impl BoundaryMap {
    /// Similarity of ratio `m^shift` with no rotation, translation or offset.
    pub fn dilation(shift: i64) -> Self {
        BoundaryMap::Similarity(SimilarityData {
            shift,
            ..Default::default()
        })
    }

    /// Catalog tag.
    pub fn kind(&self) -> &'static str {
        match self {
            BoundaryMap::Identity => "identity",
            BoundaryMap::Similarity(_) => "similarity",
            BoundaryMap::AlmostTranslation { .. } | BoundaryMap::AlmostTranslationInverse { .. } => {
                "almost_translation"
            }
            BoundaryMap::Power { .. } => "power_map",
            BoundaryMap::TreeSnowflake { .. } => "tree_snowflake",
            BoundaryMap::SignRouted { .. } => "sign_routed",
            BoundaryMap::Collapse { .. } => "collapse",
            BoundaryMap::Composite { .. } => "composite",
        }
    }

    pub fn validate(&self, space: &BoundarySpace) -> Result<()> {
        let dim = space.dim();
        match self {
            BoundaryMap::Identity => Ok(()),
            BoundaryMap::Similarity(s) => s.validate(space),
            BoundaryMap::AlmostTranslation { terms }
            | BoundaryMap::AlmostTranslationInverse { terms } => validate_terms(space, terms),
            BoundaryMap::Power { theta } => {
                if *theta > 0.0 && theta.is_finite() {
                    Ok(())
                } else {
                    Err(GeomError::InvalidParameter(format!(
                        "power exponent must be positive, got {theta}"
                    )))
                }
            }
            BoundaryMap::TreeSnowflake { factor } => {
                if *factor >= 1 {
                    Ok(())
                } else {
                    Err(GeomError::InvalidParameter(format!(
                        "snowflake factor must be at least 1, got {factor}"
                    )))
                }
            }
            BoundaryMap::SignRouted { coordinate, offset } => {
                if *coordinate >= dim {
                    return Err(GeomError::InvalidParameter(format!(
                        "coordinate {coordinate} is out of range"
                    )));
                }
                if offset.base() != space.m() {
                    return Err(GeomError::BaseMismatch(space.m(), offset.base()));
                }
                Ok(())
            }
            BoundaryMap::Collapse { coordinate } => {
                if *coordinate >= dim {
                    Err(GeomError::InvalidParameter(format!(
                        "coordinate {coordinate} is out of range"
                    )))
                } else {
                    Ok(())
                }
            }
            BoundaryMap::Composite { factors } => {
                factors.iter().try_for_each(|f| f.validate(space))
            }
        }
    }

    pub fn evaluate(&self, space: &BoundarySpace, p: &BoundaryPoint) -> Result<BoundaryPoint> {
        space.check_point(p)?;
        self.apply(space, p)
    }

    fn apply(&self, space: &BoundarySpace, p: &BoundaryPoint) -> Result<BoundaryPoint> {
        let e = space.structure();
        match self {
            BoundaryMap::Identity => Ok(p.clone()),
            BoundaryMap::Similarity(s) => s.apply(space, p),
            BoundaryMap::AlmostTranslation { terms } => {
                let mut x = p.x.clone();
                for t in terms {
                    x[term_target(space, t)?] += t.func.apply(source_value(t.source, &p.x, p));
                }
                Ok(BoundaryPoint::new(x, p.xi.clone()))
            }
            BoundaryMap::AlmostTranslationInverse { terms } => {
                // sources sit in strictly later layers, so recover layers
                // from last to first
                let mut x = p.x.clone();
                for layer in (0..e.layers().len()).rev() {
                    for t in terms.iter().filter(|t| t.layer == layer) {
                        let k = term_target(space, t)?;
                        x[k] -= t.func.apply(source_value(t.source, &x, p));
                    }
                }
                Ok(BoundaryPoint::new(x, p.xi.clone()))
            }
            BoundaryMap::Power { theta } => {
                let mut x = p.x.clone();
                for r in e.layer_ranges() {
                    let norm = x[r.clone()].iter().map(|v| v * v).sum::<f64>().sqrt();
                    if norm > 0.0 {
                        let scale = norm.powf(theta - 1.0);
                        x[r].iter_mut().for_each(|v| *v *= scale);
                    }
                }
                Ok(BoundaryPoint::new(x, p.xi.clone()))
            }
            BoundaryMap::TreeSnowflake { factor } => {
                Ok(BoundaryPoint::new(p.x.clone(), p.xi.spread_heights(*factor)))
            }
            BoundaryMap::SignRouted { coordinate, offset } => {
                let xi = if p.x[*coordinate] >= 0.0 {
                    p.xi.digitwise_add(offset)?
                } else {
                    p.xi.clone()
                };
                Ok(BoundaryPoint::new(p.x.clone(), xi))
            }
            BoundaryMap::Collapse { coordinate } => {
                let mut x = p.x.clone();
                x[*coordinate] = 0.0;
                Ok(BoundaryPoint::new(x, p.xi.clone()))
            }
            BoundaryMap::Composite { factors } => {
                let mut q = p.clone();
                for f in factors {
                    q = f.apply(space, &q)?;
                }
                Ok(q)
            }
        }
    }

    /// `self` followed by `next`. Two similarities merge into one; other
    /// pairs become a flattened composite.
    pub fn compose(&self, next: &Self, space: &BoundarySpace) -> Result<Self> {
        self.validate(space)?;
        next.validate(space)?;
        Ok(match (self, next) {
            (BoundaryMap::Identity, g) => g.clone(),
            (f, BoundaryMap::Identity) => f.clone(),
            (BoundaryMap::Similarity(a), BoundaryMap::Similarity(b)) => {
                BoundaryMap::Similarity(a.then(b, space)?)
            }
            (f, g) => {
                let mut factors = Vec::new();
                for h in [f, g] {
                    match h {
                        BoundaryMap::Composite { factors: inner } => factors.extend(inner.iter().cloned()),
                        other => factors.push(other.clone()),
                    }
                }
                BoundaryMap::Composite { factors }
            }
        })
    }

    /// Exact inverse: similarities invert in closed form, almost
    /// translations by back-substitution along the layers.
    pub fn invert(&self, space: &BoundarySpace) -> Result<Self> {
        self.validate(space)?;
        Ok(match self {
            BoundaryMap::Identity => BoundaryMap::Identity,
            BoundaryMap::Similarity(s) => BoundaryMap::Similarity(s.inverse(space)),
            BoundaryMap::AlmostTranslation { terms } => BoundaryMap::AlmostTranslationInverse {
                terms: terms.clone(),
            },
            BoundaryMap::AlmostTranslationInverse { terms } => BoundaryMap::AlmostTranslation {
                terms: terms.clone(),
            },
            BoundaryMap::Power { theta } => BoundaryMap::Power { theta: 1.0 / theta },
            BoundaryMap::SignRouted { coordinate, offset } => BoundaryMap::SignRouted {
                coordinate: *coordinate,
                offset: offset.digitwise_neg(),
            },
            BoundaryMap::TreeSnowflake { .. } => {
                return Err(GeomError::NotInvertible(
                    "tree snowflake is not onto the tree coordinate".into(),
                ))
            }
            BoundaryMap::Collapse { .. } => {
                return Err(GeomError::NotInvertible("collapse is not injective".into()))
            }
            BoundaryMap::Composite { factors } => BoundaryMap::Composite {
                factors: factors
                    .iter()
                    .rev()
                    .map(|f| f.invert(space))
                    .collect::<Result<_>>()?,
            },
        })
    }

    /// Similarity ratio, when the map is a similarity.
    pub fn similarity_ratio(&self, space: &BoundarySpace) -> Option<f64> {
        match self {
            BoundaryMap::Identity => Some(1.0),
            BoundaryMap::Similarity(s) => Some(s.ratio(space.m())),
            BoundaryMap::Composite { factors } => factors
                .iter()
                .map(|f| f.similarity_ratio(space))
                .product::<Option<f64>>(),
            _ => None,
        }
    }

    /// Factor by which the map scales the product measure, when known in
    /// closed form: `c^{1 + sum_i k_i alpha_i / alpha_1}` for a similarity
    /// of ratio `c`, and 1 for almost translations.
    pub fn measure_factor(&self, space: &BoundarySpace) -> Option<f64> {
        match self {
            BoundaryMap::Identity
            | BoundaryMap::AlmostTranslation { .. }
            | BoundaryMap::AlmostTranslationInverse { .. } => Some(1.0),
            BoundaryMap::Similarity(s) => {
                let c = s.ratio(space.m());
                let homogeneous: f64 = space
                    .structure()
                    .layers()
                    .iter()
                    .zip(space.layer_exponents())
                    .map(|(l, kappa)| l.size as f64 * kappa)
                    .sum();
                Some(c.powf(1.0 + homogeneous))
            }
            BoundaryMap::Composite { factors } => factors
                .iter()
                .map(|f| f.measure_factor(space))
                .product::<Option<f64>>(),
            _ => None,
        }
    }

    fn collect_terms<'a>(&'a self, out: &mut Vec<&'a Term>) -> bool {
        match self {
            BoundaryMap::Identity => true,
            BoundaryMap::AlmostTranslation { terms } => {
                out.extend(terms);
                true
            }
            BoundaryMap::Composite { factors } => factors.iter().all(|f| f.collect_terms(out)),
            _ => false,
        }
    }

    /// Declared bound on the `beta`-Hölder norm of the displacement of
    /// coordinate `coord` along `direction`, derived from term metadata.
    /// Available for almost translations and their compositions when no
    /// term reads a coordinate that some term moves.
    pub fn declared_holder_bound(
        &self,
        space: &BoundarySpace,
        coord: usize,
        direction: Direction,
        beta: f64,
    ) -> Option<f64> {
        let mut terms = Vec::new();
        if !self.collect_terms(&mut terms) || !sources_untouched(space, &terms) {
            return None;
        }
        let m = space.m() as f64;
        let mut total = 0.0;
        for t in terms {
            if term_target(space, t).ok()? != coord {
                continue;
            }
            match (t.source, direction) {
                (Source::Coord(j), Direction::Coord(k)) if j == k => {
                    total += t.func.holder_bound(beta)?;
                }
                (Source::Tree(b), Direction::Tree) => {
                    // the feature is Lipschitz for d^b with constant l
                    let l = ((m - 1.0) / (m.powf(b) - 1.0)).max(1.0);
                    let inner = beta / b;
                    if inner > 1.0 {
                        return None;
                    }
                    total += t.func.holder_bound(inner)? * l.powf(inner);
                }
                _ => {}
            }
        }
        Some(total)
    }
}
