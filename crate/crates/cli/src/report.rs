//! The machine-readable run report. Field order here is the output order.

use serde::{Deserialize, Serialize};

use crate::config::{EigenvalueEntry, ScenarioConfig};

/// Rounds to 12 significant digits so output does not depend on the last
/// bits of a floating point computation.
pub fn sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub scenario: ScenarioConfig,
    pub ends: Vec<EndReport>,
    pub stability: Vec<StabilityReport>,
    pub topology: TopologyReport,
    pub fredholm: FredholmReport,
    pub moduli: ModuliSection,
    pub cross_check: Vec<IdentityReport>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub source: String,
    /// Cutoff the listed eigenvalues are trusted up to.
    pub cutoff: f64,
    /// Set when completeness beyond `cutoff` was assumed rather than known.
    pub assumed_cutoff: Option<f64>,
    pub entries: Vec<EigenvalueEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightReport {
    pub gamma: f64,
    pub multiplicity: usize,
    pub eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndReport {
    /// Position of the end in the scenario file.
    pub index: usize,
    pub kind: String,
    pub rate: f64,
    pub link: String,
    pub required_cutoff: f64,
    pub spectrum: SpectrumReport,
    /// `[min(rate, 2 − m), max(rate, 2)]`; weights are listed over this range
    /// widened by `tolerance`.
    pub window: [f64; 2],
    pub tolerance: f64,
    pub weights: Vec<WeightReport>,
    pub nearest_weight: Option<f64>,
    pub distance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub index: usize,
    pub stable: bool,
    /// Multiplicities at weights 0, 1 and 2.
    pub found: [usize; 3],
    pub expected: [usize; 3],
    pub deviations: [String; 3],
    pub extra_weights: Vec<WeightReport>,
    pub epsilon_max: Option<f64>,
    pub mu_near_two: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockReport {
    pub name: String,
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyReport {
    pub s: usize,
    pub l: usize,
    pub b1: usize,
    pub b1_c: usize,
    pub b1_c_bullet: Option<usize>,
    pub block_case: String,
    pub blocks: Vec<BlockReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FredholmCounts {
    pub ker: usize,
    pub coker: usize,
    pub index: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FredholmReport {
    /// Rates the index is anchored at: the CS rates and, per AC end, the
    /// middle of `(2 − m, 0)`.
    pub reference_rates: Vec<f64>,
    pub reference: FredholmCounts,
    pub index_jump: i64,
    pub index: i64,
    /// Kernel and cokernel at the actual rates, when a closed form applies.
    pub at_rates: Option<FredholmCounts>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermReport {
    pub kind: String,
    pub name: String,
    pub value: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModuliSection {
    pub case: String,
    pub regime: String,
    pub dim_i: usize,
    pub dim_o: usize,
    pub dim_o_exact: bool,
    pub smooth: bool,
    pub breakdown: Vec<TermReport>,
    pub d_per_end: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub name: String,
    pub lhs: i64,
    pub rhs: i64,
    pub holds: bool,
}
