//! Quasi-isometry classification of millefeuille spaces `X_{R^n, phi_M, m}`.
//!
//! Two such spaces are quasi-isometric exactly when the tree valences are
//! powers of a common base, `m = r^i` and `m' = r^j`, the absolute Jordan
//! forms are powers of each other, and the height rescaling forced by the
//! trees (`i/j`) matches the one forced by the flows (`alpha_1/alpha_1'`).

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::heintze::ExpandingStructure;

/// Relative tolerances for real comparisons: deviations up to `matched`
/// count as equal, deviations in `(matched, inconclusive]` give no verdict.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub matched: f64,
    pub inconclusive: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            matched: 1e-9,
            inconclusive: 1e-6,
        }
    }
}

/// Largest `k` with an exact integer `k`-th root of `m`, as `(root, k)`.
/// The root is not itself a perfect power.
pub fn primitive_root(m: u64) -> (u64, u32) {
    if m < 4 {
        return (m, 1);
    }
    let max_k = 63 - m.leading_zeros();
    for k in (2..=max_k).rev() {
        if let Some(r) = exact_root(m, k) {
            return (r, k);
        }
    }
    (m, 1)
}

fn exact_root(m: u64, k: u32) -> Option<u64> {
    let guess = (m as f64).powf(1.0 / k as f64).round() as u64;
    (guess.saturating_sub(1)..=guess + 1)
        .filter(|&r| r >= 2)
        .find(|&r| r.checked_pow(k) == Some(m))
}

/// `m = r^i`, `m' = r^j` with `r` primitive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommonBase {
    pub r: u64,
    pub i: u32,
    pub j: u32,
}

/// The primitive common base of `m` and `m'`, if they are powers of one.
pub fn common_power_base(m: u64, mp: u64) -> Option<CommonBase> {
    if m < 2 || mp < 2 {
        return None;
    }
    let (r, i) = primitive_root(m);
    let (rp, j) = primitive_root(mp);
    (r == rp).then_some(CommonBase { r, i, j })
}

/// Absolute Jordan form: the multiset of `(alpha, block size)` pairs, where
/// `e^alpha` is the modulus of an eigenvalue.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbsJordanForm {
    blocks: Vec<(f64, usize)>,
}

impl AbsJordanForm {
    pub fn new(mut blocks: Vec<(f64, usize)>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(GeomError::InvalidStructure("empty Jordan form".into()));
        }
        for &(a, k) in &blocks {
            if !(a > 0.0) || !a.is_finite() || k == 0 {
                return Err(GeomError::InvalidStructure(format!(
                    "invalid Jordan block ({a}, {k})"
                )));
            }
        }
        blocks.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        Ok(Self { blocks })
    }

    /// Reads the form off the layer data, or off the explicit matrix when
    /// one is attached.
    pub fn from_structure(e: &ExpandingStructure) -> Result<Self> {
        let blocks = match (e.matrix(), e.generator()) {
            (Some(_), Some(g)) => triangular_blocks(e, g)?,
            _ => e
                .layers()
                .iter()
                .flat_map(|l| l.block_sizes().into_iter().map(move |k| (l.alpha, k)))
                .collect(),
        };
        Self::new(blocks)
    }

    pub fn blocks(&self) -> &[(f64, usize)] {
        &self.blocks
    }

    pub fn smallest_alpha(&self) -> f64 {
        self.blocks[0].0
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            blocks: self.blocks.iter().map(|&(a, k)| (a * s, k)).collect(),
        }
    }
}

fn matrix_rank(a: &DMatrix<f64>) -> usize {
    let scale = a.amax().max(1.0);
    a.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .filter(|&&s| s > 1e-8 * scale)
        .count()
}

// Block sizes from kernel dimensions of powers of `A - alpha I`, per distinct
// diagonal exponent.
fn triangular_blocks(e: &ExpandingStructure, g: &DMatrix<f64>) -> Result<Vec<(f64, usize)>> {
    let n = e.dim();
    let mut out = Vec::new();
    for layer in e.layers() {
        if out.iter().any(|&(a, _)| a == layer.alpha) {
            continue;
        }
        let mult: usize = e
            .layers()
            .iter()
            .filter(|l| l.alpha == layer.alpha)
            .map(|l| l.size)
            .sum();
        let shifted = g - DMatrix::<f64>::identity(n, n) * layer.alpha;
        let mut power = DMatrix::<f64>::identity(n, n);
        // kernel dimensions of (A - alpha)^k, k = 0..=mult
        let mut kernels = vec![0usize];
        for _ in 0..mult {
            power = &power * &shifted;
            kernels.push(n - matrix_rank(&power));
        }
        if *kernels.last().unwrap() != mult {
            return Err(GeomError::InvalidStructure(format!(
                "could not resolve the Jordan structure for exponent {}",
                layer.alpha
            )));
        }
        // blocks of size >= k: kernels[k] - kernels[k-1]
        let at_least: Vec<usize> = (1..=mult).map(|k| kernels[k] - kernels[k - 1]).collect();
        for k in 1..=mult {
            let next = at_least.get(k).copied().unwrap_or(0);
            for _ in 0..at_least[k - 1].saturating_sub(next) {
                out.push((layer.alpha, k));
            }
        }
    }
    Ok(out)
}

/// Outcome of a tolerance comparison.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Match {
    Exact,
    Borderline,
    Different,
}

fn compare(a: f64, b: f64, tol: Tolerances) -> Match {
    let dev = (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
    if dev <= tol.matched {
        Match::Exact
    } else if dev <= tol.inconclusive {
        Match::Borderline
    } else {
        Match::Different
    }
}

fn jordan_match(j: &AbsJordanForm, jp: &AbsJordanForm, tol: Tolerances) -> (Match, Option<f64>) {
    if j.blocks.len() != jp.blocks.len() {
        return (Match::Different, None);
    }
    let s = jp.smallest_alpha() / j.smallest_alpha();
    let mut worst = Match::Exact;
    for (&(a, k), &(ap, kp)) in j.blocks.iter().zip(&jp.blocks) {
        if k != kp {
            return (Match::Different, None);
        }
        match compare(a * s, ap, tol) {
            Match::Different => return (Match::Different, None),
            Match::Borderline => worst = Match::Borderline,
            Match::Exact => {}
        }
    }
    (worst, Some(s))
}

/// The factor `s` with `J' = J` scaled by `s`, block sizes matching, to
/// relative tolerance `1e-9`.
pub fn jordan_power_compatible(j: &AbsJordanForm, jp: &AbsJordanForm) -> Option<f64> {
    match jordan_match(j, jp, Tolerances::default()) {
        (Match::Exact, s) => s,
        _ => None,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Equivalence {
    Yes,
    No,
    Inconclusive,
}

/// Result of [`qi_equivalent`].
///
/// `stated_condition_holds` tests `alpha_1 / alpha_1' = i / j`, the height
/// ratio forced by the trees. The difference form `alpha_1 / alpha_1' = i - j`
/// is evaluated as well and reported in `difference_condition_holds`;
/// `conditions_disagree` flags inputs where the two forms differ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub equivalent: Equivalence,
    pub common_base: Option<CommonBase>,
    pub jordan_scale: Option<f64>,
    pub height_ratio: Option<f64>,
    pub stated_condition_holds: bool,
    pub difference_condition_holds: bool,
    pub conditions_disagree: bool,
    pub diagnostics: String,
}

/// Decides whether `X_{E, m}` and `X_{E', m'}` are quasi-isometric.
pub fn qi_equivalent(e: &ExpandingStructure, m: u64, ep: &ExpandingStructure, mp: u64) -> Verdict {
    qi_equivalent_with(e, m, ep, mp, Tolerances::default())
}

pub fn qi_equivalent_with(
    e: &ExpandingStructure,
    m: u64,
    ep: &ExpandingStructure,
    mp: u64,
    tol: Tolerances,
) -> Verdict {
    let mut notes = Vec::new();
    let mut verdict = Verdict {
        equivalent: Equivalence::No,
        common_base: None,
        jordan_scale: None,
        height_ratio: None,
        stated_condition_holds: false,
        difference_condition_holds: false,
        conditions_disagree: false,
        diagnostics: String::new(),
    };
    let forms = AbsJordanForm::from_structure(e).and_then(|j| Ok((j, AbsJordanForm::from_structure(ep)?)));
    let (j, jp) = match forms {
        Ok(f) => f,
        Err(err) => {
            verdict.equivalent = Equivalence::Inconclusive;
            verdict.diagnostics = format!("no Jordan data: {err}");
            return verdict;
        }
    };
    let a = j.smallest_alpha() / jp.smallest_alpha();
    verdict.height_ratio = Some(a);

    let base = common_power_base(m, mp);
    verdict.common_base = base;
    match base {
        Some(b) => notes.push(format!("{m} = {}^{}, {mp} = {}^{}", b.r, b.i, b.r, b.j)),
        None => notes.push(format!("{m} and {mp} are not powers of a common base")),
    }

    let (jm, s) = jordan_match(&j, &jp, tol);
    verdict.jordan_scale = s;
    match (jm, s) {
        (Match::Different, _) | (_, None) => {
            notes.push("absolute Jordan forms are not powers of each other".into())
        }
        (Match::Borderline, Some(s)) => {
            notes.push(format!("Jordan forms match at scale {s} only within {}", tol.inconclusive))
        }
        (Match::Exact, Some(s)) => notes.push(format!("Jordan forms match at scale {s}")),
    }

    let mut ratio_match = Match::Different;
    if let Some(b) = base {
        ratio_match = compare(a, b.i as f64 / b.j as f64, tol);
        verdict.stated_condition_holds = ratio_match == Match::Exact;
        let diff = b.i as f64 - b.j as f64;
        verdict.difference_condition_holds = compare(a, diff, tol) == Match::Exact;
        verdict.conditions_disagree =
            verdict.stated_condition_holds != verdict.difference_condition_holds;
        notes.push(format!(
            "alpha_1/alpha_1' = {a}; i/j = {}; i - j = {diff}",
            b.i as f64 / b.j as f64
        ));
    }

    verdict.equivalent = if base.is_none() || jm == Match::Different || ratio_match == Match::Different {
        Equivalence::No
    } else if jm == Match::Borderline || ratio_match == Match::Borderline {
        Equivalence::Inconclusive
    } else {
        Equivalence::Yes
    };
    verdict.diagnostics = notes.join("; ");
    verdict
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heintze::Layer;

    fn diag(layers: &[(f64, usize)]) -> ExpandingStructure {
        ExpandingStructure::diagonal(layers).unwrap()
    }

    #[test]
    fn power_base_examples() {
        assert_eq!(common_power_base(7, 7), Some(CommonBase { r: 7, i: 1, j: 1 }));
        assert_eq!(common_power_base(8, 32), Some(CommonBase { r: 2, i: 3, j: 5 }));
        assert_eq!(common_power_base(6, 12), None);
        assert_eq!(common_power_base(64, 16), Some(CommonBase { r: 2, i: 6, j: 4 }));
        assert_eq!(primitive_root(u64::MAX), (u64::MAX, 1));
        assert_eq!(primitive_root(1 << 62), (2, 62));
    }

    #[test]
    fn jordan_examples() {
        let j = AbsJordanForm::new(vec![(1.0, 1), (2.0, 1)]).unwrap();
        assert_eq!(jordan_power_compatible(&j, &j), Some(1.0));
        let j2 = AbsJordanForm::new(vec![(2.0, 1), (4.0, 1)]).unwrap();
        assert_eq!(jordan_power_compatible(&j, &j2), Some(2.0));
        let j3 = AbsJordanForm::new(vec![(1.0, 1), (3.0, 1)]).unwrap();
        assert_eq!(jordan_power_compatible(&j, &j3), None);
        let blocks = AbsJordanForm::new(vec![(1.0, 2)]).unwrap();
        let split = AbsJordanForm::new(vec![(1.0, 1), (1.0, 1)]).unwrap();
        assert_eq!(jordan_power_compatible(&blocks, &split), None);
    }

    #[test]
    fn jordan_form_from_triangular_matrix() {
        let e1 = 1f64.exp();
        let e2 = 2f64.exp();
        let m = DMatrix::from_row_slice(3, 3, &[e1, 1.0, 0.5, 0.0, e1, 0.0, 0.0, 0.0, e2]);
        let e = diag(&[(1.0, 2), (2.0, 1)]).with_matrix(m).unwrap();
        let j = AbsJordanForm::from_structure(&e).unwrap();
        assert_eq!(j.blocks(), &[(1.0, 2), (2.0, 1)]);
        let from_layers = ExpandingStructure::from_layers(vec![
            Layer::with_blocks(1.0, vec![2]),
            Layer::new(2.0, 1),
        ])
        .unwrap();
        assert_eq!(AbsJordanForm::from_structure(&from_layers).unwrap(), j);
    }

    #[test]
    fn verdict_examples() {
        let e = diag(&[(1.0, 1), (2.0, 1)]);
        let v = qi_equivalent(&e, 4, &e, 4);
        assert_eq!(v.equivalent, Equivalence::Yes);
        assert_eq!(v.jordan_scale, Some(1.0));
        assert_eq!(v.common_base, Some(CommonBase { r: 2, i: 2, j: 2 }));
        assert!(v.conditions_disagree);

        let ep = diag(&[(2.0, 1), (4.0, 1)]);
        let v = qi_equivalent(&e, 4, &ep, 2);
        assert_eq!(v.common_base, Some(CommonBase { r: 2, i: 2, j: 1 }));
        assert_eq!(v.jordan_scale, Some(2.0));
        assert!(!v.stated_condition_holds);
        assert_eq!(v.equivalent, Equivalence::No);

        // heights scale by i/j = 2 on both factors
        let half = diag(&[(0.5, 1), (1.0, 1)]);
        assert_eq!(qi_equivalent(&e, 4, &half, 2).equivalent, Equivalence::Yes);

        let v = qi_equivalent(&e, 6, &e, 12);
        assert_eq!(v.equivalent, Equivalence::No);
        assert!(v.common_base.is_none());
    }

    #[test]
    fn borderline_scale_is_inconclusive() {
        let e = diag(&[(1.0, 1), (2.0, 1)]);
        let ep = diag(&[(1.0, 1), (2.0 * (1.0 + 1e-7), 1)]);
        assert_eq!(qi_equivalent(&e, 2, &ep, 2).equivalent, Equivalence::Inconclusive);
    }
}
