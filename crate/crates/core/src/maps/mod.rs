//! Maps of the boundary `R^n x Q_m` and estimators for their distortion.
//!
//! The boundary carries the max-metric
//! `max(D_M(x, x'), m^{agreement height of xi, xi'})` of a diagonal
//! expanding structure. Maps are described by [`BoundaryMap`] values that
//! serialize to JSON with a `"kind"` tag.

mod catalog;
mod estimate;
mod sampler;

use serde::{Deserialize, Serialize};

pub use catalog::{BoundaryMap, Direction, Func, SimilarityData, Source, Term};
pub use estimate::{
    check_uniform, estimate_bilipschitz, estimate_measure_distortion, estimate_qs_modulus,
    holder_norm_1d, holder_norm_estimate, rigidity_profile, verify_coordinate_form,
    verify_decomposition, BilipschitzEstimate, CoordinateFormReport, DecompositionReport,
    MeasureReport, QsBin, QsModulus, RigidityProfile, Trend, UniformityReport, WindowCurvePoint,
    WindowSummary,
};
pub use sampler::{PairMode, SampledPair, SampledTriple, Sampler, Window};

use crate::error::{GeomError, Result};
use crate::heintze::ExpandingStructure;
use crate::mille::{dmax_formula, BoundaryPoint};

/// `R^n x Q_m` with the max-metric of a diagonal structure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundarySpace {
    structure: ExpandingStructure,
    m: u32,
}

impl BoundarySpace {
    pub fn new(structure: ExpandingStructure, m: u32) -> Result<Self> {
        if m < 2 {
            return Err(GeomError::InvalidBase(m));
        }
        if !structure.is_diagonal() {
            return Err(GeomError::NotDiagonal);
        }
        Ok(Self { structure, m })
    }

    pub fn structure(&self) -> &ExpandingStructure {
        &self.structure
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.structure.dim()
    }

    /// Exponent `alpha_i / alpha_1` of each layer.
    pub fn layer_exponents(&self) -> Vec<f64> {
        let a1 = self.structure.alpha1();
        self.structure.layers().iter().map(|l| l.alpha / a1).collect()
    }

    pub fn distance(&self, a: &BoundaryPoint, b: &BoundaryPoint) -> Result<f64> {
        dmax_formula(&self.structure, self.m, a, b)
    }

    pub fn check_point(&self, p: &BoundaryPoint) -> Result<()> {
        self.structure.check_dim(&p.x)?;
        if p.xi.base() != self.m {
            return Err(GeomError::BaseMismatch(self.m, p.xi.base()));
        }
        Ok(())
    }
}
