//! Expanding one-parameter groups `phi_t = exp(t A)` acting on `R^n`.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};

/// One eigenvalue layer: the exponent `alpha` (eigenvalue `e^alpha`), its
/// total dimension and, optionally, the sizes of its Jordan blocks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Layer {
    pub alpha: f64,
    pub size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<Vec<usize>>,
}

impl Layer {
    pub fn new(alpha: f64, size: usize) -> Self {
        Self {
            alpha,
            size,
            blocks: None,
        }
    }

    pub fn with_blocks(alpha: f64, blocks: Vec<usize>) -> Self {
        Self {
            alpha,
            size: blocks.iter().sum(),
            blocks: Some(blocks),
        }
    }

    /// Jordan block sizes; all ones when none were given.
    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.clone().unwrap_or_else(|| vec![1; self.size])
    }
}

/// The norm used on each level set `N x {t}`.
///
/// `LayerMax` takes the largest Euclidean norm among the eigenvalue layers;
/// with it the unit-height closed form and the `D_M` formula agree exactly.
/// `Euclidean` is the plain norm on `R^n`. The two are bilipschitz
/// equivalent with constant `sqrt(#layers)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelNorm {
    #[default]
    LayerMax,
    Euclidean,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StructureSpec {
    layers: Vec<Layer>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    snowflake: Option<f64>,
    #[serde(default)]
    norm: LevelNorm,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matrix: Option<Vec<Vec<f64>>>,
}

/// Data of an expanding flow on `R^n`: eigenvalue layers sorted by
/// exponent, an optional upper-triangular matrix `M = phi_1`, and the
/// snowflake exponent used by the visual metric.
///
/// JSON: `{"layers":[{"alpha":1.0,"size":1}],"snowflake":1.0}` with optional
/// `"norm"` (`"layer_max"` or `"euclidean"`), per-layer `"blocks"` and an
/// upper-triangular `"matrix"` whose diagonal is `e^alpha` in layer order.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "StructureSpec", into = "StructureSpec")]
pub struct ExpandingStructure {
    layers: Vec<Layer>,
    snowflake: Option<f64>,
    norm: LevelNorm,
    matrix: Option<DMatrix<f64>>,
    // log of `matrix`, or the canonical Jordan generator when blocks are given
    generator: Option<DMatrix<f64>>,
    dim: usize,
}

impl PartialEq for ExpandingStructure {
    fn eq(&self, other: &Self) -> bool {
        self.layers == other.layers
            && self.snowflake == other.snowflake
            && self.norm == other.norm
            && self.matrix == other.matrix
    }
}

impl TryFrom<StructureSpec> for ExpandingStructure {
    type Error = GeomError;

    fn try_from(spec: StructureSpec) -> Result<Self> {
        let mut s = Self::from_layers(spec.layers)?.with_norm(spec.norm);
        if let Some(eps) = spec.snowflake {
            s = s.with_snowflake(eps)?;
        }
        if let Some(rows) = spec.matrix {
            let n = s.dim;
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(GeomError::InvalidStructure(format!(
                    "matrix must be {n}x{n}"
                )));
            }
            let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
            s = s.with_matrix(m)?;
        }
        Ok(s)
    }
}

impl From<ExpandingStructure> for StructureSpec {
    fn from(s: ExpandingStructure) -> Self {
        StructureSpec {
            matrix: s.matrix.as_ref().map(|m| {
                (0..m.nrows())
                    .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
                    .collect()
            }),
            layers: s.layers,
            snowflake: s.snowflake,
            norm: s.norm,
        }
    }
}

impl ExpandingStructure {
    /// Diagonal structure from `(alpha, size)` pairs.
    pub fn diagonal(layers: &[(f64, usize)]) -> Result<Self> {
        Self::from_layers(layers.iter().map(|&(a, k)| Layer::new(a, k)).collect())
    }

    pub fn from_layers(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(GeomError::InvalidStructure("no layers".into()));
        }
        let mut prev = 0.0;
        for layer in &layers {
            if !(layer.alpha > 0.0) || !layer.alpha.is_finite() {
                return Err(GeomError::InvalidStructure(format!(
                    "layer exponents must be positive and finite, got {}",
                    layer.alpha
                )));
            }
            if layer.alpha < prev {
                return Err(GeomError::InvalidStructure(
                    "layers must be sorted by ascending exponent".into(),
                ));
            }
            prev = layer.alpha;
            if layer.size == 0 {
                return Err(GeomError::InvalidStructure("empty layer".into()));
            }
            if let Some(blocks) = &layer.blocks {
                if blocks.contains(&0) || blocks.iter().sum::<usize>() != layer.size {
                    return Err(GeomError::InvalidStructure(format!(
                        "block sizes {blocks:?} do not sum to layer size {}",
                        layer.size
                    )));
                }
            }
        }
        let dim = layers.iter().map(|l| l.size).sum();
        let mut s = Self {
            layers,
            snowflake: None,
            norm: LevelNorm::default(),
            matrix: None,
            generator: None,
            dim,
        };
        if s.layers.iter().any(|l| l.block_sizes().iter().any(|&b| b > 1)) {
            s.generator = Some(s.jordan_generator());
        }
        Ok(s)
    }

    /// Sets the snowflake exponent `eps` of the visual metric `e^{eps t0}`.
    pub fn with_snowflake(mut self, eps: f64) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(GeomError::InvalidStructure(format!(
                "snowflake exponent must be positive, got {eps}"
            )));
        }
        self.snowflake = Some(eps);
        Ok(self)
    }

    pub fn with_norm(mut self, norm: LevelNorm) -> Self {
        self.norm = norm;
        self
    }

    /// Attaches an explicit upper-triangular `M = phi_1`. Its diagonal must be
    /// positive with logarithms equal to the layer exponents in order.
    pub fn with_matrix(mut self, m: DMatrix<f64>) -> Result<Self> {
        let n = self.dim;
        if m.nrows() != n || m.ncols() != n {
            return Err(GeomError::InvalidStructure(format!("matrix must be {n}x{n}")));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(GeomError::InvalidStructure("matrix has non-finite entries".into()));
        }
        let scale = m.amax().max(1.0);
        for j in 0..n {
            for i in (j + 1)..n {
                if m[(i, j)].abs() > 1e-12 * scale {
                    return Err(GeomError::InvalidStructure(
                        "only upper-triangular matrices are accepted".into(),
                    ));
                }
            }
        }
        let alphas = self.coordinate_alphas();
        for (k, alpha) in alphas.iter().enumerate() {
            let d = m[(k, k)];
            if !(d > 0.0) {
                return Err(GeomError::InvalidStructure(format!(
                    "diagonal entry {k} must be positive (absolute Jordan form), got {d}"
                )));
            }
            if (d.ln() - alpha).abs() > 1e-9 * alpha.max(1.0) {
                return Err(GeomError::InvalidStructure(format!(
                    "diagonal entry {k} = {d} does not match e^{alpha}"
                )));
            }
        }
        let m = m.upper_triangle();
        let diagonal = (0..n).all(|j| (0..j).all(|i| m[(i, j)] == 0.0));
        self.generator = if diagonal {
            None
        } else {
            Some(upper_triangular_log(&m)?)
        };
        self.matrix = Some(m);
        Ok(self)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn alpha1(&self) -> f64 {
        self.layers[0].alpha
    }

    pub fn norm(&self) -> LevelNorm {
        self.norm
    }

    /// Explicitly configured snowflake exponent, if any.
    pub fn snowflake(&self) -> Option<f64> {
        self.snowflake
    }

    /// Resolved snowflake exponent; defaults to `alpha_1`.
    pub fn epsilon(&self) -> f64 {
        self.snowflake.unwrap_or_else(|| self.alpha1())
    }

    pub fn matrix(&self) -> Option<&DMatrix<f64>> {
        self.matrix.as_ref()
    }

    /// The generator `A` with `phi_t = exp(t A)`, when it is not diagonal.
    pub fn generator(&self) -> Option<&DMatrix<f64>> {
        self.generator.as_ref()
    }

    pub fn is_diagonal(&self) -> bool {
        self.generator.is_none()
    }

    pub fn layer_ranges(&self) -> Vec<Range<usize>> {
        let mut start = 0;
        self.layers
            .iter()
            .map(|l| {
                let r = start..start + l.size;
                start += l.size;
                r
            })
            .collect()
    }

    /// Exponent of the layer containing each coordinate.
    pub fn coordinate_alphas(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| std::iter::repeat_n(l.alpha, l.size))
            .collect()
    }

    /// Index of the layer containing coordinate `k`.
    pub fn layer_of(&self, k: usize) -> usize {
        let mut start = 0;
        for (i, l) in self.layers.iter().enumerate() {
            start += l.size;
            if k < start {
                return i;
            }
        }
        self.layers.len() - 1
    }

    pub fn check_dim(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.dim {
            Err(GeomError::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            })
        } else {
            Ok(())
        }
    }

    /// `phi_t(v)`.
    pub fn flow(&self, t: f64, v: &[f64]) -> Vec<f64> {
        match &self.generator {
            None => v
                .iter()
                .zip(self.coordinate_alphas())
                .map(|(x, a)| x * (a * t).exp())
                .collect(),
            Some(g) => {
                let e = (g * t).exp();
                (e * DVector::from_column_slice(v)).iter().copied().collect()
            }
        }
    }

    /// Euclidean norms of the per-layer components of `v`.
    pub fn layer_norms(&self, v: &[f64]) -> Vec<f64> {
        self.layer_ranges()
            .into_iter()
            .map(|r| v[r].iter().map(|x| x * x).sum::<f64>().sqrt())
            .collect()
    }

    /// The norm on `N` selected by [`LevelNorm`].
    pub fn base_norm(&self, v: &[f64]) -> f64 {
        match self.norm {
            LevelNorm::LayerMax => self.layer_norms(v).into_iter().fold(0.0, f64::max),
            LevelNorm::Euclidean => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
        }
    }

    fn jordan_generator(&self) -> DMatrix<f64> {
        let mut g = DMatrix::zeros(self.dim, self.dim);
        let mut k = 0;
        for layer in &self.layers {
            for b in layer.block_sizes() {
                for i in 0..b {
                    g[(k + i, k + i)] = layer.alpha;
                    if i + 1 < b {
                        g[(k + i, k + i + 1)] = 1.0;
                    }
                }
                k += b;
            }
        }
        g
    }

    /// Same structure with every exponent multiplied by `s`, matrix raised to
    /// the power `s`, and the snowflake exponent pinned to its current value.
    pub(crate) fn scaled(&self, s: f64) -> Result<Self> {
        let layers = self
            .layers
            .iter()
            .map(|l| Layer {
                alpha: l.alpha * s,
                ..l.clone()
            })
            .collect();
        let mut out = Self::from_layers(layers)?.with_norm(self.norm);
        out.snowflake = Some(self.epsilon());
        // phi'_t = phi_{st} exactly, so the generator scales as a whole
        out.generator = self.generator.as_ref().map(|g| g * s);
        if let Some(m) = &self.matrix {
            out.matrix = Some(match &self.generator {
                Some(g) => (g * s).exp(),
                None => DMatrix::from_diagonal(&m.diagonal().map(|d| d.powf(s))),
            });
        }
        Ok(out)
    }

    pub(crate) fn clear_snowflake(mut self) -> Self {
        self.snowflake = None;
        self
    }
}

/// Principal logarithm of an upper-triangular matrix with positive diagonal,
/// by inverse scaling and squaring with triangular square roots.
fn upper_triangular_log(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let mut t = m.clone();
    let mut squarings = 0;
    while (&t - &id).amax() > 0.05 {
        t = upper_triangular_sqrt(&t);
        squarings += 1;
        if squarings > 80 {
            return Err(GeomError::NoConvergence("matrix logarithm".into()));
        }
    }
    let x = &t - &id;
    let mut term = x.clone();
    let mut log = DMatrix::zeros(n, n);
    for k in 1..=40 {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        log += &term * (sign / k as f64);
        term = &term * &x;
    }
    Ok(log * 2f64.powi(squarings))
}

fn upper_triangular_sqrt(t: &DMatrix<f64>) -> DMatrix<f64> {
    let n = t.nrows();
    let mut r = DMatrix::zeros(n, n);
    for i in 0..n {
        r[(i, i)] = t[(i, i)].sqrt();
    }
    for gap in 1..n {
        for i in 0..n - gap {
            let j = i + gap;
            let s: f64 = ((i + 1)..j).map(|l| r[(i, l)] * r[(l, j)]).sum();
            r[(i, j)] = (t[(i, j)] - s) / (r[(i, i)] + r[(j, j)]);
        }
    }
    r
}
