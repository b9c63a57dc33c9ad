//! Scenario files: JSON, `schema_version` 1.

use std::path::{Path, PathBuf};

use conifold::linalg::DenseMatrix;
use conifold::mesh::{AssemblyOptions, EigensolveOptions};
use conifold::spectral_catalog::{Eigenspace, LinkKind};
use conifold::{ConifoldCase, ConifoldTopology, EndKind, LinkDescriptor, Spectrum};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseTag {
    #[serde(rename = "compact")]
    Compact,
    #[serde(rename = "AC")]
    Ac,
    #[serde(rename = "CS")]
    Cs,
    #[serde(rename = "CSAC")]
    Csac,
}

impl CaseTag {
    pub fn case(self) -> ConifoldCase {
        match self {
            CaseTag::Compact => ConifoldCase::Compact,
            CaseTag::Ac => ConifoldCase::Ac,
            CaseTag::Cs => ConifoldCase::Cs,
            CaseTag::Csac => ConifoldCase::Csac,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EndTag {
    #[serde(rename = "CS")]
    Cs,
    #[serde(rename = "AC")]
    Ac,
}

impl EndTag {
    pub fn kind(self) -> EndKind {
        match self {
            EndTag::Cs => EndKind::Cs,
            EndTag::Ac => EndKind::Ac,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueEntry {
    pub eigenvalue: f64,
    pub multiplicity: usize,
}

/// Where a link spectrum comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LinkConfig {
    /// Round unit sphere of dimension `m - 1`.
    Sphere,
    /// Flat torus; rows of `basis` generate the lattice.
    Torus { basis: Vec<Vec<f64>> },
    /// Eigenvalues listed by hand, complete up to `cutoff`.
    Explicit { eigenvalues: Vec<EigenvalueEntry>, cutoff: f64 },
    /// OFF triangulation, path relative to the scenario file.
    Mesh { path: PathBuf },
}

impl LinkConfig {
    pub fn as_str(&self) -> &'static str {
        match self {
            LinkConfig::Sphere => "sphere",
            LinkConfig::Torus { .. } => "torus",
            LinkConfig::Explicit { .. } => "explicit",
            LinkConfig::Mesh { .. } => "mesh",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndConfig {
    pub kind: EndTag,
    pub rate: f64,
    pub link: LinkConfig,
    /// `dim G` of the cone's symmetry group; CS ends only.
    #[serde(default)]
    pub sym_dim: Option<usize>,
    /// Defaults to 0 for spheres and `m - 1` for tori.
    #[serde(default)]
    pub link_b1: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyConfig {
    pub b1: usize,
    pub b1_c: usize,
    #[serde(default)]
    pub b1_c_bullet: Option<usize>,
    #[serde(default = "yes")]
    pub connected: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Tolerances {
    /// Overrides the per-end distance under which a rate counts as exceptional.
    #[serde(default)]
    pub rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MeshSolverConfig {
    pub tol: f64,
    pub margin: f64,
    pub seed: u64,
    pub max_iterations: Option<usize>,
    pub min_angle_deg: f64,
    pub reject_thin_triangles: bool,
}

impl Default for MeshSolverConfig {
    fn default() -> Self {
        let o = EigensolveOptions::default();
        Self {
            tol: o.tol,
            margin: o.margin,
            seed: o.seed,
            max_iterations: o.max_iterations,
            min_angle_deg: o.assembly.min_angle_deg,
            reject_thin_triangles: o.assembly.strict,
        }
    }
}

impl MeshSolverConfig {
    pub fn options(&self) -> EigensolveOptions {
        EigensolveOptions {
            tol: self.tol,
            margin: self.margin,
            assembly: AssemblyOptions {
                strict: self.reject_thin_triangles,
                min_angle_deg: self.min_angle_deg,
            },
            seed: self.seed,
            max_iterations: self.max_iterations,
            block_size: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptionsConfig {
    pub require_stable: bool,
    /// Refuse spectra that are not known to be complete up to the needed cutoff.
    pub strict_completeness: bool,
    /// Resolve spectra at least this far.
    pub cutoff: Option<f64>,
    pub tolerances: Tolerances,
    pub mesh: MeshSolverConfig,
}

impl Default for OptionsConfig {
    fn default() -> Self {
        Self {
            require_stable: false,
            strict_completeness: true,
            cutoff: None,
            tolerances: Tolerances::default(),
            mesh: MeshSolverConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub m: usize,
    pub case: CaseTag,
    #[serde(default)]
    pub ends: Vec<EndConfig>,
    pub topology: TopologyConfig,
    #[serde(default)]
    pub options: OptionsConfig,
}

fn yes() -> bool {
    true
}

/// Parses and validates a scenario. Unknown keys are errors when `strict`,
/// otherwise they come back as warnings.
pub fn parse_config(text: &str, strict: bool) -> Result<(ScenarioConfig, Vec<String>), CliError> {
    let mut unknown = Vec::new();
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: ScenarioConfig = serde_ignored::deserialize(de, |path| unknown.push(path.to_string()))
        .map_err(|e| CliError::Config(format!("cannot parse scenario: {e}")))?;
    if strict && !unknown.is_empty() {
        return Err(CliError::Config(format!("unknown keys: {}", unknown.join(", "))));
    }
    config.validate()?;
    let warnings = unknown.into_iter().map(|k| format!("unknown key ignored: {k}")).collect();
    Ok((config, warnings))
}

pub fn load_config(path: &Path, strict: bool) -> Result<(ScenarioConfig, Vec<String>), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text, strict)
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!("schema_version must be {SCHEMA_VERSION}, got {}", self.schema_version));
        }
        if self.m < 3 {
            return bad(format!("m must be at least 3, got {}", self.m));
        }
        let (s, l) = (self.count(EndTag::Cs), self.count(EndTag::Ac));
        let ok = match self.case {
            CaseTag::Compact => s == 0 && l == 0,
            CaseTag::Ac => s == 0 && l > 0,
            CaseTag::Cs => s > 0 && l == 0,
            CaseTag::Csac => s > 0 && l > 0,
        };
        if !ok {
            return bad(format!(
                "case {} does not admit {s} CS and {l} AC ends",
                self.case.case().as_str()
            ));
        }
        for (i, end) in self.ends.iter().enumerate() {
            if !end.rate.is_finite() {
                return bad(format!("end {i}: rate must be a finite number"));
            }
            if end.kind == EndTag::Cs && end.sym_dim.is_none() {
                return bad(format!("end {i}: CS ends need sym_dim"));
            }
            if end.kind == EndTag::Ac && end.sym_dim.is_some() {
                return bad(format!("end {i}: sym_dim applies to CS ends only"));
            }
            if matches!(end.link, LinkConfig::Explicit { .. } | LinkConfig::Mesh { .. }) && end.link_b1.is_none() {
                return bad(format!("end {i}: {} links need link_b1", end.link.as_str()));
            }
            if let Some(c) = self.options.cutoff {
                if !(c.is_finite() && c >= 0.0) {
                    return bad(format!("options.cutoff must be finite and nonnegative, got {c}"));
                }
            }
        }
        if let Some(t) = self.options.tolerances.rate {
            if !(t.is_finite() && t > 0.0) {
                return bad(format!("options.tolerances.rate must be positive, got {t}"));
            }
        }
        Ok(())
    }

    pub fn count(&self, kind: EndTag) -> usize {
        self.ends.iter().filter(|e| e.kind == kind).count()
    }

    /// Ends in the order the pipeline uses: CS first, then AC, each in file order.
    pub fn ordered_ends(&self) -> Vec<(usize, &EndConfig)> {
        let cs = self.ends.iter().enumerate().filter(|(_, e)| e.kind == EndTag::Cs);
        let ac = self.ends.iter().enumerate().filter(|(_, e)| e.kind == EndTag::Ac);
        cs.chain(ac).collect()
    }

    pub fn topology(&self) -> Result<ConifoldTopology, CliError> {
        let b1_of = |tag| -> Result<Vec<usize>, CliError> {
            self.ordered_ends()
                .into_iter()
                .filter(|(_, e)| e.kind == tag)
                .map(|(_, e)| link_b1(e, self.m))
                .collect()
        };
        let mut t = ConifoldTopology::new(
            self.m,
            b1_of(EndTag::Cs)?,
            b1_of(EndTag::Ac)?,
            self.topology.b1,
            self.topology.b1_c,
        );
        t.b1_c_bullet = self.topology.b1_c_bullet;
        t.connected = self.topology.connected;
        Ok(t)
    }
}

pub fn link_b1(end: &EndConfig, m: usize) -> Result<usize, CliError> {
    match (&end.link, end.link_b1) {
        (_, Some(b)) => Ok(b),
        (LinkConfig::Sphere, None) => Ok(0),
        (LinkConfig::Torus { basis }, None) => Ok(basis.len()),
        _ => Err(CliError::Config(format!("{} link needs link_b1 (m = {m})", end.link.as_str()))),
    }
}

/// The library descriptor for an end's link; mesh paths are joined onto `base`.
pub fn descriptor(end: &EndConfig, m: usize, base: &Path) -> Result<LinkDescriptor, CliError> {
    let b1 = link_b1(end, m)?;
    let kind = match &end.link {
        LinkConfig::Sphere => LinkKind::RoundSphere { dim: m - 1 },
        LinkConfig::Torus { basis } => LinkKind::FlatTorus {
            basis: DenseMatrix::from_rows(basis)
                .ok_or_else(|| CliError::Config("torus basis rows must have equal length".into()))?,
        },
        LinkConfig::Explicit { eigenvalues, cutoff } => {
            let entries = eigenvalues
                .iter()
                .map(|e| Eigenspace::new(e.eigenvalue, e.multiplicity))
                .collect();
            LinkKind::Explicit(
                Spectrum::new(entries, *cutoff, conifold::SpectrumSource::Explicit, 1).map_err(CliError::Core)?,
            )
        }
        LinkConfig::Mesh { path } => LinkKind::Mesh { path: base.join(path) },
    };
    let d = LinkDescriptor::new(kind, 1, b1);
    d.check(m).map_err(CliError::Core)?;
    Ok(d)
}
