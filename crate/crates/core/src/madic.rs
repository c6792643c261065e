//! The m-adics as the boundary of the oriented (m+1)-valent tree.
//!
//! A point of `Q_m` is a finitely supported digit expansion indexed by the
//! heights of `T_{m+1}`. The vertex at height `t` on the vertical ray of a
//! point is the ball determined by its digits at heights `>= t`, so the
//! height where two rays merge is the height above which their digits agree.
//!
//! Text encoding: `m:{t1:d1,t2:d2,...}` with heights listed in descending
//! order, e.g. `2:{0:1}` or `3:{4:2,-1:1}`. The empty expansion is `m:{}`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{GeomError, Result};

/// A point of `Q_m` (equivalently a vertical ray of `T_{m+1}`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MAdicPoint {
    base: u32,
    // only nonzero digits are stored
    digits: BTreeMap<i64, u32>,
}

impl MAdicPoint {
    /// The point with every digit zero.
    pub fn zero(base: u32) -> Result<Self> {
        check_base(base)?;
        Ok(Self {
            base,
            digits: BTreeMap::new(),
        })
    }

    /// Builds a point from `(height, digit)` pairs. Zero digits are dropped;
    /// a height listed twice is rejected.
    pub fn new(base: u32, digits: impl IntoIterator<Item = (i64, u32)>) -> Result<Self> {
        check_base(base)?;
        let mut map = BTreeMap::new();
        for (height, digit) in digits {
            if digit >= base {
                return Err(GeomError::DigitOutOfRange {
                    base,
                    height,
                    digit,
                });
            }
            if map.insert(height, digit).is_some() {
                return Err(GeomError::Parse(format!("height {height} listed twice")));
            }
        }
        map.retain(|_, d| *d != 0);
        Ok(Self { base, digits: map })
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn digit(&self, height: i64) -> u32 {
        self.digits.get(&height).copied().unwrap_or(0)
    }

    /// Nonzero digits in descending height order.
    pub fn nonzero_digits(&self) -> impl Iterator<Item = (i64, u32)> + '_ {
        self.digits.iter().rev().map(|(h, d)| (*h, *d))
    }

    pub fn is_zero(&self) -> bool {
        self.digits.is_empty()
    }

    /// Highest height carrying a nonzero digit.
    pub fn top(&self) -> Option<i64> {
        self.digits.keys().next_back().copied()
    }

    /// Lowest height carrying a nonzero digit.
    pub fn bottom(&self) -> Option<i64> {
        self.digits.keys().next().copied()
    }

    /// Zeroes every digit strictly below `height`.
    pub fn truncate_below(&self, height: i64) -> Self {
        Self {
            base: self.base,
            digits: self.digits.range(height..).map(|(h, d)| (*h, *d)).collect(),
        }
    }

    /// Moves the digit at height `t` to height `t + k`. This is a similarity
    /// of ratio `m^k` for the standard metric.
    pub fn shift_heights(&self, k: i64) -> Self {
        Self {
            base: self.base,
            digits: self.digits.iter().map(|(h, d)| (h + k, *d)).collect(),
        }
    }

    /// Moves the digit at height `t` to height `factor * t`.
    pub fn spread_heights(&self, factor: i64) -> Self {
        Self {
            base: self.base,
            digits: self.digits.iter().map(|(h, d)| (h * factor, *d)).collect(),
        }
    }

    /// Digit-wise addition modulo `m` without carries. Preserves agreement
    /// heights, hence an isometry of `Q_m` for a fixed second argument.
    pub fn digitwise_add(&self, other: &Self) -> Result<Self> {
        check_same_base(self, other)?;
        let mut digits = self.digits.clone();
        for (h, d) in &other.digits {
            let entry = digits.entry(*h).or_insert(0);
            *entry = (*entry + d) % self.base;
        }
        digits.retain(|_, d| *d != 0);
        Ok(Self {
            base: self.base,
            digits,
        })
    }

    /// Digit-wise negation modulo `m`; inverse for [`MAdicPoint::digitwise_add`].
    pub fn digitwise_neg(&self) -> Self {
        Self {
            base: self.base,
            digits: self
                .digits
                .iter()
                .map(|(h, d)| (*h, self.base - d))
                .collect(),
        }
    }

    /// `sum_t digit_t * m^(exponent * t)`. For `exponent >= 1` this is
    /// Lipschitz in `d^exponent` with constant at most one, where `d` is the
    /// standard metric.
    pub fn real_feature(&self, exponent: f64) -> f64 {
        let m = self.base as f64;
        self.digits
            .iter()
            .map(|(h, d)| *d as f64 * m.powf(exponent * *h as f64))
            .sum()
    }
}

fn check_base(base: u32) -> Result<()> {
    if base < 2 {
        Err(GeomError::InvalidBase(base))
    } else {
        Ok(())
    }
}

fn check_same_base(x: &MAdicPoint, y: &MAdicPoint) -> Result<()> {
    if x.base != y.base {
        Err(GeomError::BaseMismatch(x.base, y.base))
    } else {
        Ok(())
    }
}

impl fmt::Display for MAdicPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{{", self.base)?;
        for (i, (h, d)) in self.nonzero_digits().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{h}:{d}")?;
        }
        f.write_str("}")
    }
}

impl FromStr for MAdicPoint {
    type Err = GeomError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| GeomError::Parse(format!("{why} in {s:?}"));
        let s_trim = s.trim();
        let (base, rest) = s_trim.split_once(':').ok_or_else(|| bad("missing base"))?;
        let base: u32 = base.trim().parse().map_err(|_| bad("invalid base"))?;
        let body = rest
            .trim()
            .strip_prefix('{')
            .and_then(|r| r.strip_suffix('}'))
            .ok_or_else(|| bad("missing braces"))?;
        let mut pairs = Vec::new();
        let mut last: Option<i64> = None;
        for item in body.split(',').map(str::trim).filter(|i| !i.is_empty()) {
            let (h, d) = item.split_once(':').ok_or_else(|| bad("missing ':'"))?;
            let h: i64 = h.trim().parse().map_err(|_| bad("invalid height"))?;
            let d: u32 = d.trim().parse().map_err(|_| bad("invalid digit"))?;
            if matches!(last, Some(prev) if h >= prev) {
                return Err(bad("heights must be strictly descending"));
            }
            last = Some(h);
            pairs.push((h, d));
        }
        Self::new(base, pairs)
    }
}

impl Serialize for MAdicPoint {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for MAdicPoint {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Least height `t` such that the digits of `x` and `y` coincide at every
/// height `>= t`. `None` stands for minus infinity and occurs exactly when
/// `x == y`.
pub fn agreement_height(x: &MAdicPoint, y: &MAdicPoint) -> Result<Option<i64>> {
    check_same_base(x, y)?;
    // Walk both supports from the top; the first height where they differ
    // is the highest disagreement.
    let mut a = x.digits.iter().rev().peekable();
    let mut b = y.digits.iter().rev().peekable();
    loop {
        match (a.peek(), b.peek()) {
            (None, None) => return Ok(None),
            (Some((h, _)), None) | (None, Some((h, _))) => return Ok(Some(**h + 1)),
            (Some((ha, da)), Some((hb, db))) => match ha.cmp(hb) {
                Ordering::Greater => return Ok(Some(**ha + 1)),
                Ordering::Less => return Ok(Some(**hb + 1)),
                Ordering::Equal => {
                    if da != db {
                        return Ok(Some(**ha + 1));
                    }
                    a.next();
                    b.next();
                }
            },
        }
    }
}

/// A distance of the form `base^exponent`, with `exponent = None` meaning
/// zero. Comparisons between distances with one base go through the
/// exponents, so ultrametric inequalities are checked exactly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UltraDistance {
    pub base: f64,
    pub exponent: Option<i64>,
}

impl UltraDistance {
    pub fn value(&self) -> f64 {
        match self.exponent {
            None => 0.0,
            Some(e) => self.base.powf(e as f64),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.exponent.is_none()
    }
}

impl PartialOrd for UltraDistance {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        if self.base != other.base {
            return self.value().partial_cmp(&other.value());
        }
        // Option orders None first, which is the zero distance.
        Some(self.exponent.cmp(&other.exponent))
    }
}

/// The parabolic visual metric `a^{t0}` on `Q_m`, `t0` the agreement height.
/// The standard metric is `a = m`.
pub fn madic_distance(x: &MAdicPoint, y: &MAdicPoint, a: f64) -> Result<UltraDistance> {
    if !(a > 1.0) || !a.is_finite() {
        return Err(GeomError::InvalidMetricBase(a));
    }
    Ok(UltraDistance {
        base: a,
        exponent: agreement_height(x, y)?,
    })
}

/// [`madic_distance`] with the standard base `a = m`, as a float.
pub fn standard_distance(x: &MAdicPoint, y: &MAdicPoint) -> Result<f64> {
    Ok(madic_distance(x, y, x.base() as f64)?.value())
}

/// A vertex of the oriented tree `T_{m+1}`: a height together with the ball
/// of boundary points whose rays pass through it.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TreeVertex {
    height: i64,
    // digits below `height` are zero
    rep: MAdicPoint,
}

impl TreeVertex {
    pub fn new(rep: &MAdicPoint, height: i64) -> Self {
        Self {
            height,
            rep: rep.truncate_below(height),
        }
    }

    pub fn height(&self) -> i64 {
        self.height
    }

    pub fn representative(&self) -> &MAdicPoint {
        &self.rep
    }

    pub fn base(&self) -> u32 {
        self.rep.base()
    }

    /// The unique vertex one step closer to the point at infinity.
    pub fn parent(&self) -> Self {
        Self::new(&self.rep, self.height + 1)
    }

    /// The `m` vertices one step down.
    pub fn children(&self) -> Vec<Self> {
        let below = self.height - 1;
        (0..self.base())
            .map(|d| {
                let mut digits = self.rep.digits.clone();
                if d != 0 {
                    digits.insert(below, d);
                }
                Self {
                    height: below,
                    rep: MAdicPoint {
                        base: self.rep.base,
                        digits,
                    },
                }
            })
            .collect()
    }

    /// Whether the ray of `xi` passes through this vertex.
    pub fn contains(&self, xi: &MAdicPoint) -> Result<bool> {
        Ok(agreement_height(&self.rep, &xi.truncate_below(self.height))?.is_none())
    }
}

/// The vertex at height `t` on the vertical ray of `xi`.
pub fn ball_of(xi: &MAdicPoint, t: i64) -> TreeVertex {
    TreeVertex::new(xi, t)
}

/// Least height of a common ancestor of `u` and `v`.
pub fn merge_height(u: &TreeVertex, v: &TreeVertex) -> Result<i64> {
    let agree = agreement_height(&u.rep, &v.rep)?;
    let floor = u.height.max(v.height);
    Ok(agree.map_or(floor, |a| a.max(floor)))
}

/// Graph distance in `T_{m+1}`.
pub fn tree_distance(u: &TreeVertex, v: &TreeVertex) -> Result<i64> {
    let top = merge_height(u, v)?;
    Ok((top - u.height) + (top - v.height))
}

/// Euclid–Cygan expression `exp((2T + d(b_T, c_T)) / 2)` for two vertical
/// rays of the tree, evaluated at the cutoff height `T`. Exact (no limit
/// needed) once `T` is at or below the merge height; returns 0 for equal rays.
pub fn tree_euclid_cygan(x: &MAdicPoint, y: &MAdicPoint, cutoff: i64) -> Result<f64> {
    if agreement_height(x, y)?.is_none() {
        return Ok(0.0);
    }
    let d = tree_distance(&ball_of(x, cutoff), &ball_of(y, cutoff))?;
    Ok((0.5 * (2.0 * cutoff as f64 + d as f64)).exp())
}
