//! Spectra → weights → topology → moduli → cross-check.

use std::path::Path;

use conifold::moduli::{reference_rate, CsEnd};
use conifold::spectral_catalog::{resolve_link_with, Eigenspace, LinkKind};
use conifold::topology::decomposition_block_dims;
use conifold::weights::{multiplicity_in, source_tolerance, Window};
use conifold::{
    cross_check, exceptional_set, fredholm_data, index_jump, is_exceptional, stability_check, BlockCase,
    ConeData, ConeEnd, ConifoldCase, ConifoldScenario, ConifoldTopology, Error, FredholmData, ModuliReport,
    RateRegime, Spectrum, SpectrumSource, StabilityVerdict,
};

use crate::config::{descriptor, EigenvalueEntry, EndConfig, EndTag, LinkConfig, OptionsConfig, ScenarioConfig, SCHEMA_VERSION};
use crate::report::*;
use crate::CliError;

/// A link spectrum ready for the weight computations.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub spectrum: Spectrum,
    /// Cutoff the entries are known to be complete up to.
    pub trusted_cutoff: f64,
}

impl Resolved {
    fn assumed(&self) -> Option<f64> {
        (self.spectrum.cutoff() > self.trusted_cutoff).then_some(self.spectrum.cutoff())
    }
}

/// Weights from `min(rate, 2 − m)` to `max(rate, 2)`: everything the
/// Fredholm counts, the index jump from the reference rate and the
/// stability check look at, widened by `pad` on both sides so that a rate
/// at the edge can still be tested against nearby weights.
pub fn end_window(rate: f64, m: usize, pad: f64) -> Window<f64> {
    let low = 2.0 - m as f64;
    Window::closed(rate.min(low) - pad, rate.max(2.0) + pad).expect("finite ordered bounds")
}

/// Tolerance a rate is tested with: the configured one, or the source default.
pub fn rate_pad(end: &EndConfig, tol: Option<f64>) -> f64 {
    let source = match end.link {
        LinkConfig::Mesh { .. } => SpectrumSource::Mesh,
        _ => SpectrumSource::Explicit,
    };
    source_tolerance::<f64>(source).max(tol.unwrap_or(0.0))
}

pub fn required_cutoff(end: &EndConfig, m: usize, options: &OptionsConfig) -> f64 {
    let pad = rate_pad(end, options.tolerances.rate);
    end_window(end.rate, m, pad).required_cutoff(m).max(options.cutoff.unwrap_or(0.0))
}

/// Resolves every link spectrum, in pipeline order (CS ends, then AC ends).
pub fn resolve_spectra(
    config: &ScenarioConfig,
    base: &Path,
    strict: bool,
    only: Option<EndTag>,
) -> Result<(Vec<Resolved>, Vec<String>), CliError> {
    let m = config.m;
    let opts = config.options.mesh.options();
    let mut out = Vec::new();
    let mut warnings = Vec::new();
    for (index, end) in config.ordered_ends() {
        if only.is_some_and(|k| k != end.kind) {
            continue;
        }
        let need = required_cutoff(end, m, &config.options);
        let d = descriptor(end, m, base)?;
        let resolved = match &d.kind {
            LinkKind::Explicit(listed) if listed.cutoff() < need * (1.0 - 1e-12) => {
                if strict {
                    return Err(CliError::Core(Error::CutoffInsufficient {
                        context: format!("end {index} (explicit spectrum)"),
                        have: listed.cutoff(),
                        need,
                    }));
                }
                warnings.push(format!(
                    "end {index}: explicit spectrum is listed up to {}, assumed complete up to {} (margin {})",
                    sig12(listed.cutoff()),
                    sig12(need),
                    sig12(need - listed.cutoff())
                ));
                Resolved {
                    spectrum: listed.with_assumed_cutoff(need),
                    trusted_cutoff: listed.cutoff(),
                }
            }
            LinkKind::Explicit(listed) => Resolved {
                spectrum: listed.clone(),
                trusted_cutoff: listed.cutoff(),
            },
            _ => {
                let spectrum = resolve_link_with(&d, need, &opts)?;
                Resolved {
                    trusted_cutoff: spectrum.cutoff(),
                    spectrum,
                }
            }
        };
        out.push(resolved);
    }
    Ok((out, warnings))
}

/// Rebuilds spectra recorded in a report, so it can be recomputed without
/// the original link sources.
pub fn recorded_spectra(report: &RunReport) -> Result<Vec<Resolved>, CliError> {
    report
        .ends
        .iter()
        .map(|e| {
            let source = match e.spectrum.source.as_str() {
                "sphere" => SpectrumSource::Sphere,
                "torus" => SpectrumSource::Torus,
                "explicit" => SpectrumSource::Explicit,
                "mesh" => SpectrumSource::Mesh,
                other => return Err(CliError::Config(format!("unknown spectrum source {other:?}"))),
            };
            let entries = e
                .spectrum
                .entries
                .iter()
                .map(|x| Eigenspace::new(x.eigenvalue, x.multiplicity))
                .collect();
            let cutoff = e.spectrum.assumed_cutoff.unwrap_or(e.spectrum.cutoff);
            Ok(Resolved {
                spectrum: Spectrum::new(entries, cutoff, source, 1)?,
                trusted_cutoff: e.spectrum.cutoff,
            })
        })
        .collect()
}

/// Full pipeline from a scenario file on disk.
pub fn run(config: &ScenarioConfig, base: &Path, strict: bool, warnings: Vec<String>) -> Result<RunReport, CliError> {
    let topology = config.topology()?;
    topology.check()?;
    let strict = strict || config.options.strict_completeness;
    let (spectra, more) = resolve_spectra(config, base, strict, None)?;
    let mut warnings = warnings;
    warnings.extend(more);
    run_with(config, &topology, &spectra, warnings)
}

pub fn run_with(
    config: &ScenarioConfig,
    topology: &ConifoldTopology,
    spectra: &[Resolved],
    warnings: Vec<String>,
) -> Result<RunReport, CliError> {
    let m = config.m;
    let order = config.ordered_ends();
    if order.len() != spectra.len() {
        return Err(CliError::Config(format!("{} ends but {} spectra", order.len(), spectra.len())));
    }

    let mut ends_report = Vec::new();
    let mut cs = Vec::new();
    let mut ac = Vec::new();
    for ((index, end), resolved) in order.iter().zip(spectra) {
        let spectrum = resolved.spectrum.clone();
        let cone_end = match end.kind {
            EndTag::Cs => ConeEnd::cs(spectrum.clone(), end.rate, end.sym_dim.unwrap_or(0)),
            EndTag::Ac => ConeEnd::ac(spectrum.clone(), end.rate),
        };
        cone_end.check(m)?;
        ends_report.push(weights_for(*index, end, &cone_end, resolved, m, config.options.tolerances.rate)?);
        match end.kind {
            EndTag::Cs => {
                let is_sphere = matches!(end.link, LinkConfig::Sphere);
                let cone = ConeData::new(spectrum, m, end.sym_dim.unwrap_or(0), is_sphere)?;
                cs.push(CsEnd { cone, rate: end.rate });
            }
            EndTag::Ac => ac.push(cone_end),
        }
    }

    let scenario = ConifoldScenario {
        case: config.case.case(),
        topology: topology.clone(),
        cs,
        ac,
        require_stable: config.options.require_stable,
    };
    let moduli = scenario.evaluate()?;
    let identities = cross_check(&moduli, &scenario)?;

    let stability = moduli
        .stability_verdicts
        .iter()
        .zip(&moduli.mu_near_two)
        .zip(&order)
        .map(|((v, &near), (index, _))| stability_report(*index, v, near))
        .collect();

    Ok(RunReport {
        schema_version: SCHEMA_VERSION,
        scenario: config.clone(),
        ends: ends_report,
        stability,
        topology: topology_report(topology, &moduli)?,
        fredholm: fredholm_report(&scenario)?,
        moduli: moduli_section(&moduli),
        cross_check: identities
            .iter()
            .map(|i| IdentityReport {
                name: i.name.to_string(),
                lhs: i.lhs,
                rhs: i.rhs,
                holds: i.holds(),
            })
            .collect(),
        warnings,
    })
}

/// Stability verdicts for the CS ends only, without the moduli computation.
pub fn stability_only(config: &ScenarioConfig, base: &Path, strict: bool) -> Result<(Vec<StabilityReport>, Vec<String>), CliError> {
    let m = config.m;
    let strict = strict || config.options.strict_completeness;
    let (spectra, warnings) = resolve_spectra(config, base, strict, Some(EndTag::Cs))?;
    let cs_ends = config.ordered_ends().into_iter().filter(|(_, e)| e.kind == EndTag::Cs);
    let mut out = Vec::new();
    for ((index, end), resolved) in cs_ends.zip(&spectra) {
        let is_sphere = matches!(end.link, LinkConfig::Sphere);
        let cone = ConeData::new(resolved.spectrum.clone(), m, end.sym_dim.unwrap_or(0), is_sphere)?;
        cone.end(end.rate).check(m)?;
        let verdict = stability_check(&cone)?;
        let above_two = Window::new(std::ops::Bound::Excluded(2.0), std::ops::Bound::Included(end.rate))?;
        let near = multiplicity_in(&cone.spectrum, m, &above_two, index)? == 0;
        out.push(stability_report(index, &verdict, near));
    }
    Ok((out, warnings))
}

fn weights_for(
    index: usize,
    end: &EndConfig,
    cone_end: &ConeEnd,
    resolved: &Resolved,
    m: usize,
    tol: Option<f64>,
) -> Result<EndReport, CliError> {
    let window = end_window(end.rate, m, rate_pad(end, tol));
    let ws = exceptional_set(std::slice::from_ref(cone_end), m, window, true)?;
    let check = is_exceptional(&ws, &[end.rate], tol)?;
    let nearest = &check.per_end[0];
    if check.exceptional {
        return Err(CliError::Core(Error::ExceptionalRate {
            end: index,
            rate: end.rate,
            gamma: nearest.gamma.unwrap_or(f64::NAN),
            distance: nearest.distance.unwrap_or(0.0),
        }));
    }
    let per_end = &ws.per_end[0];
    let spectrum = &resolved.spectrum;
    Ok(EndReport {
        index,
        kind: end.kind.kind().as_str().to_string(),
        rate: end.rate,
        link: end.link.as_str().to_string(),
        required_cutoff: sig12(window.required_cutoff(m)),
        spectrum: SpectrumReport {
            source: spectrum.source().as_str().to_string(),
            cutoff: sig12(resolved.trusted_cutoff),
            assumed_cutoff: resolved.assumed().map(sig12),
            entries: spectrum
                .entries()
                .iter()
                .map(|e| EigenvalueEntry {
                    eigenvalue: sig12(e.eigenvalue),
                    multiplicity: e.multiplicity,
                })
                .collect(),
        },
        window: [sig12(end.rate.min(2.0 - m as f64)), sig12(end.rate.max(2.0))],
        tolerance: sig12(tol.unwrap_or(per_end.tolerance)),
        weights: per_end
            .weights
            .iter()
            .map(|w| WeightReport {
                gamma: sig12(w.gamma),
                multiplicity: w.multiplicity,
                eigenvalue: sig12(w.eigenvalue),
            })
            .collect(),
        nearest_weight: nearest.gamma.map(sig12),
        distance: nearest.distance.map(sig12),
    })
}

fn stability_report(index: usize, v: &StabilityVerdict, mu_near_two: bool) -> StabilityReport {
    StabilityReport {
        index,
        stable: v.stable,
        found: v.found,
        expected: v.expected,
        deviations: v.deviations.map(|d| d.as_str().to_string()),
        extra_weights: v
            .extra_weights
            .iter()
            .map(|w| WeightReport {
                gamma: sig12(w.gamma),
                multiplicity: w.multiplicity,
                eigenvalue: sig12(w.eigenvalue),
            })
            .collect(),
        epsilon_max: v.epsilon_max.map(sig12),
        mu_near_two,
    }
}

fn block_case(report: &ModuliReport) -> BlockCase {
    match (report.case, report.regime) {
        (ConifoldCase::Compact, _) => BlockCase::Compact,
        (ConifoldCase::Ac, RateRegime::Decay) => BlockCase::AcDecay,
        (ConifoldCase::Ac, _) => BlockCase::AcGrowth,
        (ConifoldCase::Cs, _) => BlockCase::CsGrowth,
        (ConifoldCase::Csac, RateRegime::Decay) => BlockCase::CsacMixed,
        (ConifoldCase::Csac, _) => BlockCase::CsacGrowth,
    }
}

fn topology_report(t: &ConifoldTopology, moduli: &ModuliReport) -> Result<TopologyReport, CliError> {
    let case = block_case(moduli);
    let blocks = decomposition_block_dims(t, case)?;
    Ok(TopologyReport {
        s: t.s(),
        l: t.l(),
        b1: t.b1,
        b1_c: t.b1_c,
        b1_c_bullet: t.b1_c_bullet,
        block_case: case.as_str().to_string(),
        blocks: blocks
            .blocks
            .iter()
            .map(|b| BlockReport {
                name: b.name.to_string(),
                dim: b.dim,
            })
            .collect(),
    })
}

fn counts(f: &FredholmData) -> FredholmCounts {
    FredholmCounts {
        ker: f.ker_dim,
        coker: f.coker_dim,
        index: f.index,
    }
}

fn fredholm_report(scenario: &ConifoldScenario) -> Result<FredholmReport, CliError> {
    let m = scenario.m();
    let case = scenario.case;
    let ends = scenario.ends();
    let mut from = scenario.mu();
    from.extend(vec![reference_rate::<f64>(m); scenario.ac.len()]);
    let mut to = scenario.mu();
    to.extend(scenario.lambda());
    let reference = fredholm_data(case, m, &ends, &from)?;
    let jump = if ends.is_empty() { 0 } else { index_jump(&ends, m, &from, &to)? };
    let at_rates = match fredholm_data(case, m, &ends, &to) {
        Ok(f) => Some(counts(&f)),
        Err(Error::InvalidInput(_)) => None,
        Err(e) => return Err(e.into()),
    };
    Ok(FredholmReport {
        reference_rates: from.into_iter().map(sig12).collect(),
        reference: counts(&reference),
        index_jump: jump,
        index: reference.index + jump,
        at_rates,
    })
}

fn moduli_section(r: &ModuliReport) -> ModuliSection {
    ModuliSection {
        case: r.case.as_str().to_string(),
        regime: r.regime.as_str().to_string(),
        dim_i: r.dim_i,
        dim_o: r.dim_o.value(),
        dim_o_exact: r.dim_o.is_exact(),
        smooth: r.smooth(),
        breakdown: r
            .breakdown
            .iter()
            .map(|t| TermReport {
                kind: t.kind.as_str().to_string(),
                name: t.name.to_string(),
                value: t.value,
            })
            .collect(),
        d_per_end: r.d_per_end.clone(),
    }
}
