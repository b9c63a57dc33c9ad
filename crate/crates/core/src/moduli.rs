//! Cone stability and the dimension counts for moduli spaces of special
//! Lagrangian conifolds.
//!
//! Every dimension is reported together with its additive breakdown. The
//! `−1` coming from quotienting by translations in `ℝ` is always its own
//! line.

use crate::error::{Error, Result};
use crate::spectral_catalog::Spectrum;
use crate::topology::{tilde_h0bullet_dim, tilde_hc1_dim, ConifoldTopology};
use crate::weights::{
    check_dimension, fredholm_data, index_jump, multiplicity_in, require_non_exceptional, roots_for_eigenvalue,
    ConeEnd, ConifoldCase, EndKind, ExceptionalWeight, Window,
};
use crate::{approx_eq, Scalar};

/// The asymptotic cone at a CS point.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeData<T> {
    pub spectrum: Spectrum<T>,
    pub m: usize,
    /// `dim G` for the symmetry group `G ⊆ SU(m)` of the cone.
    pub sym_dim: usize,
    pub link_is_sphere: bool,
    pub link_b0: usize,
}

impl<T: Scalar> ConeData<T> {
    pub fn new(spectrum: Spectrum<T>, m: usize, sym_dim: usize, link_is_sphere: bool) -> Result<Self> {
        check_dimension(m)?;
        if sym_dim > m * m - 1 {
            return Err(Error::InvalidInput(format!(
                "symmetry group dimension {sym_dim} exceeds dim SU({m}) = {}",
                m * m - 1
            )));
        }
        let link_b0 = spectrum.b0();
        if link_b0 != 1 {
            return Err(Error::InvalidInput(format!("cone link must be connected, b0 = {link_b0}")));
        }
        Ok(Self {
            spectrum,
            m,
            sym_dim,
            link_is_sphere,
            link_b0,
        })
    }

    /// The cone as a CS end with rate `mu`.
    pub fn end(&self, mu: T) -> ConeEnd<T> {
        ConeEnd::cs(self.spectrum.clone(), mu, self.sym_dim)
    }
}

/// Multiplicities `[at γ = 0, at γ = 1, at γ = 2]` that stability demands:
/// constants, the `2m` translations, and `su(m)` modulo the symmetry group.
pub fn expected_stable_multiplicities(m: usize, sym_dim: usize) -> Result<[usize; 3]> {
    check_dimension(m)?;
    let rotations = (m * m - 1)
        .checked_sub(sym_dim)
        .ok_or_else(|| Error::InvalidInput(format!("sym_dim {sym_dim} exceeds m² − 1")))?;
    Ok([1, 2 * m, rotations])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Deviation {
    Match,
    Deficit,
    Excess,
}

impl Deviation {
    pub fn as_str(self) -> &'static str {
        match self {
            Deviation::Match => "match",
            Deviation::Deficit => "deficit",
            Deviation::Excess => "excess",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityVerdict<T> {
    pub stable: bool,
    pub found: [usize; 3],
    pub expected: [usize; 3],
    pub deviations: [Deviation; 3],
    /// Exceptional weights in `(0, 1) ∪ (1, 2)`.
    pub extra_weights: Vec<ExceptionalWeight<T>>,
    /// Smallest exceptional weight above 2, minus 2, if the spectrum lists
    /// one. Informational only.
    pub epsilon_max: Option<T>,
}

impl<T: Scalar> StabilityVerdict<T> {
    /// Every weight in `[0, 2]` that breaks the stable pattern.
    pub fn offending_weights(&self) -> Vec<T> {
        let mut out: Vec<T> = (0..3)
            .filter(|&k| self.deviations[k] == Deviation::Excess)
            .map(T::from_count)
            .collect();
        out.extend(self.extra_weights.iter().map(|w| w.gamma));
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out
    }
}

/// Compares the homogeneous harmonic functions of growth rate in `[0, 2]`
/// with the ones every special Lagrangian cone carries.
pub fn stability_check<T: Scalar>(cone: &ConeData<T>) -> Result<StabilityVerdict<T>> {
    let m = cone.m;
    if cone.link_is_sphere {
        return Err(Error::InvalidInput("cone over a round sphere is a plane, excluded from stability".into()));
    }
    if cone.link_b0 != 1 {
        return Err(Error::InvalidInput(format!("cone link must be connected, b0 = {}", cone.link_b0)));
    }
    let expected = expected_stable_multiplicities(m, cone.sym_dim)?;
    let spec = &cone.spectrum;
    let top = T::from_count(2 * m);
    if spec.cutoff() < top * (T::one() - T::lit(1e-12)) {
        return Err(Error::CutoffInsufficient {
            context: "stability check needs every eigenvalue up to 2m".into(),
            have: spec.cutoff().as_f64(),
            need: top.as_f64(),
        });
    }
    let tol = spec.eigenvalue_tolerance();
    let levels = [T::zero(), T::from_count(m - 1), top];
    let mut found = [0usize; 3];
    let mut extra_weights = Vec::new();
    let mut epsilon_max = None;
    for entry in spec.entries() {
        let e = entry.eigenvalue;
        if let Some(k) = levels.iter().position(|&x| approx_eq(x, e, tol)) {
            found[k] += entry.multiplicity;
            continue;
        }
        let (gamma, _) = roots_for_eigenvalue(e, m)?;
        if e < top {
            extra_weights.push(ExceptionalWeight {
                gamma,
                multiplicity: entry.multiplicity,
                eigenvalue: e,
            });
        } else if epsilon_max.is_none() {
            epsilon_max = Some(gamma - T::lit(2.0));
        }
    }
    let deviations = [0, 1, 2].map(|k| match found[k].cmp(&expected[k]) {
        std::cmp::Ordering::Equal => Deviation::Match,
        std::cmp::Ordering::Less => Deviation::Deficit,
        std::cmp::Ordering::Greater => Deviation::Excess,
    });
    Ok(StabilityVerdict {
        stable: deviations.iter().all(|d| *d == Deviation::Match) && extra_weights.is_empty(),
        found,
        expected,
        deviations,
        extra_weights,
        epsilon_max,
    })
}

/// `m² + 2m − 1 − dim G`, the dimension of the slice of special
/// Lagrangian cones through a given one.
pub fn slice_dim(m: usize, sym_dim: usize) -> usize {
    (m * m + 2 * m - 1).saturating_sub(sym_dim)
}

/// `m² + 2m − dim G`, the same slice before reducing from the
/// `U(m) ⋉ ℂ^m`-type bundle of Lagrangian cones.
pub fn lagrangian_slice_dim(m: usize, sym_dim: usize) -> usize {
    (m * m + 2 * m).saturating_sub(sym_dim)
}

fn obstruction_total<T>(cones: &[ConeData<T>]) -> usize {
    cones.iter().map(|c| slice_dim(c.m, c.sym_dim) + 1).sum()
}

/// `d = Σ (m² + 2m − dim G_i)` over stable cones.
pub fn obstruction_dim_stable<T: Scalar>(cones: &[ConeData<T>]) -> Result<usize> {
    for (i, cone) in cones.iter().enumerate() {
        let v = stability_check(cone)?;
        if !v.stable {
            return Err(Error::StabilityViolation(format!("cone {i} is not stable")));
        }
    }
    Ok(obstruction_total(cones))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TermKind {
    /// A cohomology group of `L`.
    Cohomology,
    /// Functions locally constant near the ends.
    EndFunctions,
    /// Harmonic functions gained by the growth rate.
    Kernel,
    /// Quotient by translations in `ℝ`.
    Quotient,
}

impl TermKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TermKind::Cohomology => "cohomology",
            TermKind::EndFunctions => "end_functions",
            TermKind::Kernel => "kernel",
            TermKind::Quotient => "quotient",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Term {
    pub kind: TermKind,
    /// The space this line counts.
    pub name: &'static str,
    pub value: i64,
}

fn term(kind: TermKind, name: &'static str, value: usize) -> Term {
    Term {
        kind,
        name,
        value: value as i64,
    }
}

fn quotient() -> Term {
    Term {
        kind: TermKind::Quotient,
        name: "ℝ (translations)",
        value: -1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateRegime {
    Compact,
    /// AC rates in `(2 − m, 0)`.
    Decay,
    /// AC rates in `(0, 2)`.
    Growth,
    /// CS ends only.
    Singular,
}

impl RateRegime {
    pub fn as_str(self) -> &'static str {
        match self {
            RateRegime::Compact => "compact",
            RateRegime::Decay => "lambda_decay",
            RateRegime::Growth => "lambda_growth",
            RateRegime::Singular => "mu_only",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObstructionDim {
    Exact(usize),
    UpperBound(usize),
}

impl ObstructionDim {
    pub fn value(self) -> usize {
        match self {
            ObstructionDim::Exact(v) | ObstructionDim::UpperBound(v) => v,
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, ObstructionDim::Exact(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModuliReport<T> {
    pub case: ConifoldCase,
    pub regime: RateRegime,
    pub dim_i: usize,
    pub dim_o: ObstructionDim,
    pub breakdown: Vec<Term>,
    /// `d_i` per AC end when the AC rates are positive.
    pub d_per_end: Vec<usize>,
    pub stability_required: bool,
    pub stability_verdicts: Vec<StabilityVerdict<T>>,
    /// Per CS end: whether no exceptional weight lies in `(2, μ_i]`.
    pub mu_near_two: Vec<bool>,
}

impl<T: Scalar> ModuliReport<T> {
    fn assemble(case: ConifoldCase, regime: RateRegime, breakdown: Vec<Term>) -> Result<Self> {
        let total: i64 = breakdown.iter().map(|t| t.value).sum();
        let dim_i = usize::try_from(total)
            .map_err(|_| Error::InternalInconsistency(format!("negative dimension {total} from breakdown")))?;
        Ok(Self {
            case,
            regime,
            dim_i,
            dim_o: ObstructionDim::Exact(0),
            breakdown,
            d_per_end: Vec::new(),
            stability_required: false,
            stability_verdicts: Vec::new(),
            mu_near_two: Vec::new(),
        })
    }

    /// `true` when the moduli space is known to be smooth of dimension `dim_i`.
    pub fn smooth(&self) -> bool {
        self.dim_o == ObstructionDim::Exact(0)
    }

    pub fn term(&self, kind: TermKind) -> Option<&Term> {
        self.breakdown.iter().find(|t| t.kind == kind)
    }
}

pub fn moduli_dim_compact<T: Scalar>(b1: usize) -> ModuliReport<T> {
    ModuliReport::assemble(
        ConifoldCase::Compact,
        RateRegime::Compact,
        vec![term(TermKind::Cohomology, "H¹(L)", b1)],
    )
    .expect("single nonnegative term")
}

fn lambda_regime<T: Scalar>(m: usize, lambda: &[T]) -> Result<RateRegime> {
    let low = T::lit(2.0) - T::from_count(m);
    if lambda.iter().all(|&x| x > low && x < T::zero()) {
        Ok(RateRegime::Decay)
    } else if lambda.iter().all(|&x| x > T::zero() && x < T::lit(2.0)) {
        Ok(RateRegime::Growth)
    } else {
        Err(Error::InvalidInput(format!(
            "AC rates {:?} must all lie in (2 − m, 0) or all in (0, 2)",
            lambda.iter().map(|x| x.as_f64()).collect::<Vec<_>>()
        )))
    }
}

fn check_ac_ends<T: Scalar>(t: &ConifoldTopology, ends: &[ConeEnd<T>], lambda: &[T]) -> Result<()> {
    if ends.len() != t.l() || lambda.len() != ends.len() {
        return Err(Error::InvalidInput(format!(
            "topology has {} AC ends but {} ends and {} rates were given",
            t.l(),
            ends.len(),
            lambda.len()
        )));
    }
    for (end, &r) in ends.iter().zip(lambda) {
        if end.kind != EndKind::Ac {
            return Err(Error::InvalidInput("expected an AC end".into()));
        }
        end.with_rate(r).check(t.m)?;
    }
    Ok(())
}

/// Independent of the λ regime: `d_i = Σ m^i(γ)` over `γ ∈ [0, λ_i]`.
fn d_values<T: Scalar>(m: usize, ends: &[ConeEnd<T>], lambda: &[T]) -> Result<Vec<usize>> {
    ends.iter()
        .zip(lambda)
        .enumerate()
        .map(|(j, (end, &r))| multiplicity_in(&end.spectrum, m, &Window::closed(T::zero(), r)?, j))
        .collect()
}

/// AC ends only.
pub fn moduli_dim_ac<T: Scalar>(t: &ConifoldTopology, ends: &[ConeEnd<T>], lambda: &[T]) -> Result<ModuliReport<T>> {
    t.check()?;
    if t.s() != 0 || t.l() == 0 {
        return Err(Error::InvalidInput("AC case needs AC ends and no CS ends".into()));
    }
    check_ac_ends(t, ends, lambda)?;
    let m = t.m;
    let regime = lambda_regime(m, lambda)?;
    require_non_exceptional(ends, m, lambda)?;
    let l = t.l();
    let breakdown = match regime {
        RateRegime::Decay => vec![
            term(TermKind::Cohomology, "H̃¹_c(L)", tilde_hc1_dim(t.b1_c, l)?),
            term(TermKind::EndFunctions, "E_∞", l),
            quotient(),
        ],
        _ => {
            let fd = fredholm_data(ConifoldCase::Ac, m, ends, lambda)?;
            vec![
                term(TermKind::Cohomology, "H¹(L)", t.b1),
                term(TermKind::Kernel, "Ker Δ", fd.ker_dim),
                quotient(),
            ]
        }
    };
    let mut report = ModuliReport::assemble(ConifoldCase::Ac, regime, breakdown)?;
    if regime == RateRegime::Growth {
        report.d_per_end = d_values(m, ends, lambda)?;
    }
    Ok(report)
}

struct SingularAnalysis<T> {
    verdicts: Vec<StabilityVerdict<T>>,
    near_two: Vec<bool>,
    /// Stable cones and every μ in the `2 + ε` window.
    stable_regime: bool,
}

fn analyse_singular<T: Scalar>(
    t: &ConifoldTopology,
    cones: &[ConeData<T>],
    mu: &[T],
    require_stable: bool,
) -> Result<SingularAnalysis<T>> {
    if cones.len() != t.s() || mu.len() != cones.len() {
        return Err(Error::InvalidInput(format!(
            "topology has {} CS ends but {} cones and {} rates were given",
            t.s(),
            cones.len(),
            mu.len()
        )));
    }
    let m = t.m;
    let mut verdicts = Vec::with_capacity(cones.len());
    let mut near_two = Vec::with_capacity(cones.len());
    for (i, (cone, &r)) in cones.iter().zip(mu).enumerate() {
        if cone.m != m {
            return Err(Error::InvalidInput(format!("cone {i} has m = {}, topology has {m}", cone.m)));
        }
        cone.end(r).check(m)?;
        let verdict = stability_check(cone)?;
        if require_stable && !verdict.stable {
            return Err(Error::StabilityViolation(format!(
                "cone {i} is unstable (offending weights {:?})",
                verdict.offending_weights().iter().map(|g| g.as_f64()).collect::<Vec<_>>()
            )));
        }
        let above_two = Window::new(std::ops::Bound::Excluded(T::lit(2.0)), std::ops::Bound::Included(r))?;
        let ok = multiplicity_in(&cone.spectrum, m, &above_two, i)? == 0;
        if require_stable && !ok {
            return Err(Error::StabilityViolation(format!(
                "μ = {r} on cone {i} passes an exceptional weight above 2"
            )));
        }
        verdicts.push(verdict);
        near_two.push(ok);
    }
    let stable_regime = verdicts.iter().all(|v| v.stable) && near_two.iter().all(|&b| b);
    Ok(SingularAnalysis {
        verdicts,
        near_two,
        stable_regime,
    })
}

/// CS ends only.
pub fn moduli_dim_cs<T: Scalar>(
    t: &ConifoldTopology,
    cones: &[ConeData<T>],
    mu: &[T],
    require_stable: bool,
) -> Result<ModuliReport<T>> {
    t.check()?;
    if t.l() != 0 || t.s() == 0 {
        return Err(Error::InvalidInput("CS case needs CS ends and no AC ends".into()));
    }
    let analysis = analyse_singular(t, cones, mu, require_stable)?;
    let ends: Vec<ConeEnd<T>> = cones.iter().zip(mu).map(|(c, &r)| c.end(r)).collect();
    require_non_exceptional(&ends, t.m, mu)?;
    let mut report = ModuliReport::assemble(
        ConifoldCase::Cs,
        RateRegime::Singular,
        vec![term(TermKind::Cohomology, "Ker ρ", tilde_hc1_dim(t.b1_c, t.s())?)],
    )?;
    if !analysis.stable_regime {
        let coker = fredholm_data(ConifoldCase::Cs, t.m, &ends, mu)?.coker_dim;
        report.dim_o = ObstructionDim::UpperBound(coker.saturating_sub(obstruction_total(cones)));
    }
    report.stability_required = require_stable;
    report.stability_verdicts = analysis.verdicts;
    report.mu_near_two = analysis.near_two;
    Ok(report)
}

/// CS and AC ends together. `l = 0` is rejected; use [`moduli_dim_cs`].
pub fn moduli_dim_csac<T: Scalar>(
    t: &ConifoldTopology,
    cones: &[ConeData<T>],
    mu: &[T],
    ac_ends: &[ConeEnd<T>],
    lambda: &[T],
    require_stable: bool,
) -> Result<ModuliReport<T>> {
    t.check()?;
    if t.l() == 0 {
        return Err(Error::InvalidInput("CSAC case needs at least one AC end; use the CS case".into()));
    }
    check_ac_ends(t, ac_ends, lambda)?;
    let m = t.m;
    let regime = lambda_regime(m, lambda)?;
    let analysis = analyse_singular(t, cones, mu, require_stable)?;
    let cs_ends: Vec<ConeEnd<T>> = cones.iter().zip(mu).map(|(c, &r)| c.end(r)).collect();
    require_non_exceptional(&cs_ends, m, mu)?;
    require_non_exceptional(ac_ends, m, lambda)?;
    let (s, l) = (t.s(), t.l());

    let mut d_per_end = Vec::new();
    let breakdown = match regime {
        RateRegime::Decay => vec![
            term(TermKind::Cohomology, "H̃_{0,∞}", tilde_hc1_dim(t.b1_c, s + l)?),
            term(TermKind::EndFunctions, "E_{0,∞} / E_0", l),
            quotient(),
        ],
        _ => {
            let h0 = if s == 0 {
                t.b1
            } else {
                let bullet = t
                    .b1_c_bullet
                    .ok_or_else(|| Error::InvalidInput("positive AC rates with CS ends need b1_c_bullet".into()))?;
                tilde_h0bullet_dim(bullet, s)?
            };
            d_per_end = d_values(m, ac_ends, lambda)?;
            vec![
                term(TermKind::Cohomology, "H̃_{0,•}", h0),
                term(TermKind::Kernel, "Z' ⊕ Ker Δ", d_per_end.iter().sum()),
                quotient(),
            ]
        }
    };
    let mut report = ModuliReport::assemble(ConifoldCase::Csac, regime, breakdown)?;
    report.d_per_end = d_per_end;
    if !analysis.stable_regime {
        // obstruction space of the restricted linearization, bounded through
        // the cokernel at a decaying reference rate when λ > 0
        let reference = match regime {
            RateRegime::Decay => lambda.to_vec(),
            _ => vec![reference_rate::<T>(m); l],
        };
        let mut ends = cs_ends.clone();
        ends.extend(ac_ends.iter().cloned());
        let mut rates = mu.to_vec();
        rates.extend(reference);
        let coker = fredholm_data(ConifoldCase::Csac, m, &ends, &rates)?.coker_dim;
        report.dim_o = ObstructionDim::UpperBound(coker.saturating_sub(obstruction_total(cones)));
    }
    report.stability_required = require_stable;
    report.stability_verdicts = analysis.verdicts;
    report.mu_near_two = analysis.near_two;
    Ok(report)
}

/// `(2 − m) / 2`, the midpoint of `(2 − m, 0)`. Any rate in that interval
/// gives the same Fredholm data.
pub fn reference_rate<T: Scalar>(m: usize) -> T {
    (T::lit(2.0) - T::from_count(m)) / T::lit(2.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsEnd<T> {
    pub cone: ConeData<T>,
    pub rate: T,
}

/// A complete structural description of a conifold deformation problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ConifoldScenario<T> {
    pub case: ConifoldCase,
    pub topology: ConifoldTopology,
    pub cs: Vec<CsEnd<T>>,
    /// AC ends; each carries its rate `λ_i`.
    pub ac: Vec<ConeEnd<T>>,
    pub require_stable: bool,
}

impl<T: Scalar> ConifoldScenario<T> {
    pub fn m(&self) -> usize {
        self.topology.m
    }

    pub fn cones(&self) -> Vec<ConeData<T>> {
        self.cs.iter().map(|c| c.cone.clone()).collect()
    }

    pub fn mu(&self) -> Vec<T> {
        self.cs.iter().map(|c| c.rate).collect()
    }

    pub fn lambda(&self) -> Vec<T> {
        self.ac.iter().map(|e| e.rate).collect()
    }

    /// All ends, CS first, as [`ConeEnd`]s.
    pub fn ends(&self) -> Vec<ConeEnd<T>> {
        let mut out: Vec<ConeEnd<T>> = self.cs.iter().map(|c| c.cone.end(c.rate)).collect();
        out.extend(self.ac.iter().cloned());
        out
    }

    pub fn evaluate(&self) -> Result<ModuliReport<T>> {
        let t = &self.topology;
        match self.case {
            ConifoldCase::Compact => {
                t.check()?;
                if t.e() != 0 {
                    return Err(Error::InvalidInput("compact case takes no ends".into()));
                }
                Ok(moduli_dim_compact(t.b1))
            }
            ConifoldCase::Ac => moduli_dim_ac(t, &self.ac, &self.lambda()),
            ConifoldCase::Cs => moduli_dim_cs(t, &self.cones(), &self.mu(), self.require_stable),
            ConifoldCase::Csac => moduli_dim_csac(
                t,
                &self.cones(),
                &self.mu(),
                &self.ac,
                &self.lambda(),
                self.require_stable,
            ),
        }
    }
}

/// One verified equality between two independently computed integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Identity {
    pub name: &'static str,
    pub lhs: i64,
    pub rhs: i64,
}

impl Identity {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs
    }
}

/// Recomputes the report's numbers through independent routes and checks
/// they agree. Any disagreement is an [`Error::InternalInconsistency`].
pub fn cross_check<T: Scalar>(report: &ModuliReport<T>, scenario: &ConifoldScenario<T>) -> Result<Vec<Identity>> {
    let t = &scenario.topology;
    let m = scenario.m();
    let (s, l) = (t.s() as i64, t.l() as i64);
    let cones = scenario.cones();
    let mu = scenario.mu();
    let lambda = scenario.lambda();
    let mut ids = Vec::new();
    let mut push = |name, lhs: i64, rhs: i64| ids.push(Identity { name, lhs, rhs });
    let cohomology = report.term(TermKind::Cohomology).map_or(0, |x| x.value);
    let d_total = obstruction_total(&cones) as i64;

    push(
        "breakdown sums to dim I",
        report.breakdown.iter().map(|x| x.value).sum(),
        report.dim_i as i64,
    );
    match (report.case, report.regime) {
        (ConifoldCase::Compact, _) => push("dim I = b1", report.dim_i as i64, t.b1 as i64),
        (ConifoldCase::Ac, RateRegime::Decay) => {
            push("H̃¹_c block = b1_c − l + 1", cohomology, tilde_hc1_dim(t.b1_c, t.l())? as i64);
            push("dim I = b1_c", report.dim_i as i64, t.b1_c as i64);
        }
        (ConifoldCase::Ac, _) => {
            let reference = vec![reference_rate::<T>(m); t.l()];
            let jump = index_jump(&scenario.ac, m, &reference, &lambda)?;
            let kernel = report.term(TermKind::Kernel).map_or(0, |x| x.value);
            push("Ker Δ = index jump from a decaying rate", kernel, jump);
            push("Σ d_i = Ker Δ", report.d_per_end.iter().sum::<usize>() as i64, kernel);
        }
        (ConifoldCase::Cs, _) => {
            push("Ker ρ block = b1_c − s + 1", cohomology, tilde_hc1_dim(t.b1_c, t.s())? as i64);
        }
        (ConifoldCase::Csac, RateRegime::Decay) => {
            push("H̃_{0,∞} block = b1_c − (s + l) + 1", cohomology, tilde_hc1_dim(t.b1_c, t.s() + t.l())? as i64);
            push("H̃_{0,∞} + E' = b1_c − s", cohomology + (l - 1), t.b1_c as i64 - s);
        }
        (ConifoldCase::Csac, _) => {
            let h0 = if t.s() == 0 {
                t.b1
            } else {
                tilde_h0bullet_dim(t.b1_c_bullet.unwrap_or(0), t.s())?
            } as i64;
            let ends = scenario.ends();
            let mut from = mu.clone();
            from.extend(vec![reference_rate::<T>(m); t.l()]);
            let mut to = mu.clone();
            to.extend(lambda.iter().copied());
            let jump = index_jump(&ends, m, &from, &to)?;
            push("dim I = dim H̃_{0,•} + index jump − 1", report.dim_i as i64, h0 + jump - 1);
        }
    }

    let stable = !report.stability_verdicts.is_empty()
        && report.stability_verdicts.iter().all(|v| v.stable)
        && report.mu_near_two.iter().all(|&b| b);
    if stable {
        let slices: i64 = cones.iter().map(|c| slice_dim(c.m, c.sym_dim) as i64).sum();
        push("d = dim(T_e Ẽ ⊕ E_0)", d_total, slices + s);
        let mut ends = scenario.ends();
        let mut rates = mu.clone();
        let case = if scenario.ac.is_empty() {
            ConifoldCase::Cs
        } else {
            rates.extend(vec![reference_rate::<T>(m); t.l()]);
            ConifoldCase::Csac
        };
        if case == ConifoldCase::Cs {
            ends.truncate(cones.len());
        }
        let coker = fredholm_data(case, m, &ends, &rates)?.coker_dim as i64;
        push("d = dim Coker Δ at μ = 2 + ε", d_total, coker);
        push("obstruction space vanishes", report.dim_o.value() as i64, 0);
    }

    if let Some(bad) = ids.iter().find(|x| !x.holds()) {
        return Err(Error::InternalInconsistency(format!(
            "identity '{}' fails: {} ≠ {}",
            bad.name, bad.lhs, bad.rhs
        )));
    }
    Ok(ids)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral_catalog::{sphere_spectrum, Spectrum};

    /// `{0:1, m−1:2m, 2m:m²−1−g}` listed up to `cutoff`.
    fn pattern(m: usize, g: usize, cutoff: f64) -> Spectrum<f64> {
        let mf = m as f64;
        Spectrum::explicit(&[(0.0, 1), (mf - 1.0, 2 * m), (2.0 * mf, m * m - 1 - g)], cutoff, 1).unwrap()
    }

    fn example_cone() -> ConeData<f64> {
        ConeData::new(pattern(3, 2, 7.0), 3, 2, false).unwrap()
    }

    fn cone_scenario(lambda: f64) -> ConifoldScenario<f64> {
        ConifoldScenario {
            case: ConifoldCase::Csac,
            topology: ConifoldTopology::cone(3, 0),
            cs: vec![CsEnd {
                cone: example_cone(),
                rate: 2.1,
            }],
            ac: vec![ConeEnd::ac(pattern(3, 2, 7.0), lambda)],
            require_stable: true,
        }
    }

    #[test]
    fn expected_multiplicities() {
        assert_eq!(expected_stable_multiplicities(3, 2).unwrap(), [1, 6, 6]);
        assert_eq!(expected_stable_multiplicities(3, 0).unwrap(), [1, 6, 8]);
        assert_eq!(expected_stable_multiplicities(4, 3).unwrap(), [1, 8, 12]);
    }

    #[test]
    fn stability_examples() {
        assert!(stability_check(&example_cone()).unwrap().stable);
        let spec = pattern(3, 2, 7.0).with_inserted(3.0, 1).unwrap();
        let v = stability_check(&ConeData::new(spec, 3, 2, false).unwrap()).unwrap();
        assert!(!v.stable);
        assert_eq!(v.extra_weights.len(), 1);
        assert!((v.extra_weights[0].gamma - (-1.0 + 13f64.sqrt()) / 2.0).abs() < 1e-12);
        let sphere = ConeData::new(sphere_spectrum(2, 7.0).unwrap(), 3, 0, true).unwrap();
        assert!(matches!(stability_check(&sphere), Err(Error::InvalidInput(_))));
        let short = ConeData::new(pattern(3, 2, 6.0).truncated(5.0), 3, 2, false).unwrap();
        assert!(matches!(stability_check(&short), Err(Error::CutoffInsufficient { .. })));
    }

    #[test]
    fn slice_and_obstruction() {
        assert_eq!(slice_dim(3, 2), 12);
        assert_eq!(slice_dim(3, 0), 14);
        assert_eq!(lagrangian_slice_dim(3, 0), 15);
        let c = example_cone();
        assert_eq!(obstruction_dim_stable(&[c.clone()]).unwrap(), 13);
        assert_eq!(obstruction_dim_stable(&[c.clone(), c]).unwrap(), 26);
    }

    #[test]
    fn compact_reports() {
        for b1 in [0, 1, 3] {
            let r = moduli_dim_compact::<f64>(b1);
            assert_eq!(r.dim_i, b1);
            assert!(r.smooth());
        }
    }

    #[test]
    fn ac_examples() {
        let s2 = sphere_spectrum(2, 7.0).unwrap();
        let t = ConifoldTopology::new(3, vec![], vec![0], 0, 0);
        let ends = [ConeEnd::ac(s2.clone(), 1.5)];
        assert_eq!(moduli_dim_ac(&t, &ends, &[1.5]).unwrap().dim_i, 3);
        assert_eq!(moduli_dim_ac(&t, &ends, &[0.5]).unwrap().dim_i, 0);
        let t2 = ConifoldTopology::new(3, vec![], vec![2], 2, 2);
        assert_eq!(moduli_dim_ac(&t2, &ends, &[-0.5]).unwrap().dim_i, 2);
        assert!(matches!(moduli_dim_ac(&t, &ends, &[1.0]), Err(Error::ExceptionalRate { .. })));
    }

    #[test]
    fn cs_examples() {
        let c = example_cone();
        let t = ConifoldTopology::new(3, vec![0, 0], vec![], 2, 3);
        let r = moduli_dim_cs(&t, &[c.clone(), c.clone()], &[2.1, 2.1], true).unwrap();
        assert_eq!(r.dim_i, 2);
        assert!(r.smooth());
        let t = ConifoldTopology::new(3, vec![0], vec![], 1, 1);
        assert_eq!(moduli_dim_cs(&t, &[c.clone()], &[2.1], true).unwrap().dim_i, 1);
        let t = ConifoldTopology::new(3, vec![0, 0], vec![], 0, 0);
        assert!(matches!(
            moduli_dim_cs(&t, &[c.clone(), c], &[2.1, 2.1], true),
            Err(Error::InconsistentTopology(_))
        ));
    }

    #[test]
    fn cone_rigidity_and_translations() {
        for (lambda, want) in [(-0.5, 0), (0.5, 0), (1.5, 6)] {
            let sc = cone_scenario(lambda);
            let r = sc.evaluate().unwrap();
            assert_eq!(r.dim_i, want, "λ = {lambda}");
            assert!(r.smooth());
            assert!(cross_check(&r, &sc).unwrap().iter().all(Identity::holds));
        }
    }

    #[test]
    fn unstable_cone_handling() {
        let spec = pattern(3, 2, 7.0).with_inserted(3.0, 1).unwrap();
        let mut sc = cone_scenario(-0.5);
        sc.cs[0].cone = ConeData::new(spec, 3, 2, false).unwrap();
        assert!(matches!(sc.evaluate(), Err(Error::StabilityViolation(_))));
        sc.require_stable = false;
        let r = sc.evaluate().unwrap();
        assert_eq!(r.dim_i, 0);
        assert_eq!(r.dim_o, ObstructionDim::UpperBound(1));
        assert!(!r.smooth());
    }

    #[test]
    fn csac_needs_ac_end_and_bullet() {
        let t = ConifoldTopology::new(3, vec![0], vec![], 1, 1);
        assert!(moduli_dim_csac(&t, &[example_cone()], &[2.1], &[], &[], true).is_err());
        let mut sc = cone_scenario(1.5);
        sc.topology.b1_c_bullet = None;
        assert!(matches!(sc.evaluate(), Err(Error::InvalidInput(_))));
    }
}
