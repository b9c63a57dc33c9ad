//! Exceptional weights of the Laplacian on a cone and the Fredholm
//! bookkeeping of the weighted Laplacian on a conifold.
//!
//! On the cone `(0, ∞) × Σ` the function `r^γ σ` is harmonic exactly when
//! `σ` is an eigenfunction of the link Laplacian with eigenvalue
//! `e = γ(γ + m − 2)`. Each eigenvalue therefore produces two exceptional
//! weights, one `≥ 0` and one `≤ 2 − m`, and nothing ever lands strictly
//! between `2 − m` and `0`.

use std::ops::Bound;

use crate::error::{Error, Result};
use crate::mesh::CLUSTER_REL_GAP;
use crate::spectral_catalog::{Spectrum, SpectrumSource};
use crate::Scalar;

/// Default distance below which an analytic rate counts as exceptional.
pub const ANALYTIC_RATE_TOL: f64 = 1e-9;
/// Floor of the rate tolerance used for numerically computed spectra.
pub const MESH_RATE_TOL_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EndKind {
    /// Conical singularity, rate `μ`.
    Cs,
    /// Asymptotically conical end, rate `λ`.
    Ac,
}

impl EndKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EndKind::Cs => "CS",
            EndKind::Ac => "AC",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConifoldCase {
    Compact,
    Ac,
    Cs,
    Csac,
}

impl ConifoldCase {
    pub fn as_str(self) -> &'static str {
        match self {
            ConifoldCase::Compact => "compact",
            ConifoldCase::Ac => "AC",
            ConifoldCase::Cs => "CS",
            ConifoldCase::Csac => "CSAC",
        }
    }

    pub fn admits(self, kind: EndKind) -> bool {
        match self {
            ConifoldCase::Compact => false,
            ConifoldCase::Ac => kind == EndKind::Ac,
            ConifoldCase::Cs => kind == EndKind::Cs,
            ConifoldCase::Csac => true,
        }
    }
}

/// One end of a conifold: the link spectrum of its asymptotic cone and the
/// convergence rate.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeEnd<T> {
    pub kind: EndKind,
    pub spectrum: Spectrum<T>,
    pub rate: T,
    /// Dimension of the symmetry group of the cone inside `SU(m)`.
    pub sym_dim: Option<usize>,
}

impl<T: Scalar> ConeEnd<T> {
    pub fn cs(spectrum: Spectrum<T>, rate: T, sym_dim: usize) -> Self {
        Self {
            kind: EndKind::Cs,
            spectrum,
            rate,
            sym_dim: Some(sym_dim),
        }
    }

    pub fn ac(spectrum: Spectrum<T>, rate: T) -> Self {
        Self {
            kind: EndKind::Ac,
            spectrum,
            rate,
            sym_dim: None,
        }
    }

    pub fn with_rate(&self, rate: T) -> Self {
        Self {
            rate,
            ..self.clone()
        }
    }

    /// Checks the rate bounds `μ > 2`, `λ < 2` and `sym_dim <= m² − 1`.
    pub fn check(&self, m: usize) -> Result<()> {
        check_dimension(m)?;
        if !self.rate.is_finite() {
            return Err(Error::InvalidInput(format!("{} rate must be finite", self.kind.as_str())));
        }
        match self.kind {
            EndKind::Cs if self.rate <= T::lit(2.0) => {
                return Err(Error::InvalidInput(format!("CS rate {} must exceed 2", self.rate)))
            }
            EndKind::Ac if self.rate >= T::lit(2.0) => {
                return Err(Error::InvalidInput(format!("AC rate {} must be below 2", self.rate)))
            }
            _ => {}
        }
        if let Some(g) = self.sym_dim {
            if g > m * m - 1 {
                return Err(Error::InvalidInput(format!(
                    "symmetry group dimension {g} exceeds dim SU({m}) = {}",
                    m * m - 1
                )));
            }
        }
        if self.kind == EndKind::Cs && self.sym_dim.is_none() {
            return Err(Error::InvalidInput("CS end needs sym_dim".into()));
        }
        Ok(())
    }
}

pub(crate) fn check_dimension(m: usize) -> Result<()> {
    if m < 3 {
        return Err(Error::InvalidInput(format!("dimension m = {m} is below 3")));
    }
    Ok(())
}

/// `γ(γ + m − 2)`, the link eigenvalue belonging to the weight `γ`.
pub fn eigenvalue_for_weight<T: Scalar>(gamma: T, m: usize) -> T {
    gamma * (gamma + T::from_count(m) - T::lit(2.0))
}

/// The two roots `γ₊ >= 0` and `γ₋ <= 2 − m` of `γ(γ + m − 2) = e`.
pub fn roots_for_eigenvalue<T: Scalar>(e: T, m: usize) -> Result<(T, T)> {
    check_dimension(m)?;
    if !(e >= T::zero()) || !e.is_finite() {
        return Err(Error::InvalidInput(format!("eigenvalue {e} must be finite and nonnegative")));
    }
    let a = T::from_count(m) - T::lit(2.0);
    let root = (a * a + T::lit(4.0) * e).sqrt();
    // cancellation-free forms of ((2 - m) ± root) / 2
    let plus = T::lit(2.0) * e / (root + a);
    let minus = -(root + a) / T::lit(2.0);
    Ok((plus, minus))
}

/// An interval of weights. Endpoints are always finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window<T> {
    pub lo: Bound<T>,
    pub hi: Bound<T>,
}

impl<T: Scalar> Window<T> {
    pub fn new(lo: Bound<T>, hi: Bound<T>) -> Result<Self> {
        let w = Self { lo, hi };
        let (a, b) = (w.lo_value(), w.hi_value());
        if !a.is_finite() || !b.is_finite() || a > b {
            return Err(Error::InvalidInput(format!("bad weight window [{a}, {b}]")));
        }
        Ok(w)
    }

    pub fn closed(a: T, b: T) -> Result<Self> {
        Self::new(Bound::Included(a), Bound::Included(b))
    }

    pub fn open(a: T, b: T) -> Result<Self> {
        Self::new(Bound::Excluded(a), Bound::Excluded(b))
    }

    /// The open interval `(2 − m, 0)`.
    pub fn gap(m: usize) -> Self {
        Self {
            lo: Bound::Excluded(T::lit(2.0) - T::from_count(m)),
            hi: Bound::Excluded(T::zero()),
        }
    }

    pub fn lo_value(&self) -> T {
        match self.lo {
            Bound::Included(a) | Bound::Excluded(a) => a,
            Bound::Unbounded => T::neg_infinity(),
        }
    }

    pub fn hi_value(&self) -> T {
        match self.hi {
            Bound::Included(b) | Bound::Excluded(b) => b,
            Bound::Unbounded => T::infinity(),
        }
    }

    pub fn contains(&self, x: T) -> bool {
        let lo = match self.lo {
            Bound::Included(a) => x >= a,
            Bound::Excluded(a) => x > a,
            Bound::Unbounded => true,
        };
        let hi = match self.hi {
            Bound::Included(b) => x <= b,
            Bound::Excluded(b) => x < b,
            Bound::Unbounded => true,
        };
        lo && hi
    }

    /// Smallest spectrum cutoff that makes the weights in this window complete.
    pub fn required_cutoff(&self, m: usize) -> T {
        eigenvalue_for_weight(self.lo_value(), m)
            .max(eigenvalue_for_weight(self.hi_value(), m))
            .max(T::zero())
    }

    fn describe(&self) -> String {
        let l = if matches!(self.lo, Bound::Included(_)) { '[' } else { '(' };
        let r = if matches!(self.hi, Bound::Included(_)) { ']' } else { ')' };
        format!("{l}{}, {}{r}", self.lo_value(), self.hi_value())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExceptionalWeight<T> {
    pub gamma: T,
    pub multiplicity: usize,
    /// Link eigenvalue the weight comes from.
    pub eigenvalue: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EndWeights<T> {
    pub kind: EndKind,
    /// Ascending in `gamma`.
    pub weights: Vec<ExceptionalWeight<T>>,
    pub complete: bool,
    /// Distance under which a rate is treated as hitting a weight.
    pub tolerance: T,
    pub cutoff: T,
}

impl<T: Scalar> EndWeights<T> {
    /// `m^j(γ)`: multiplicity of `gamma` if it is a listed weight.
    pub fn multiplicity_at(&self, gamma: T) -> usize {
        self.weights
            .iter()
            .find(|w| (w.gamma - gamma).abs() <= self.tolerance)
            .map_or(0, |w| w.multiplicity)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExceptionalWeightSet<T> {
    pub m: usize,
    pub window: Window<T>,
    pub per_end: Vec<EndWeights<T>>,
}

impl<T: Scalar> ExceptionalWeightSet<T> {
    pub fn complete(&self) -> bool {
        self.per_end.iter().all(|e| e.complete)
    }

    pub fn is_empty(&self) -> bool {
        self.per_end.iter().all(|e| e.weights.is_empty())
    }
}

/// Rate tolerance appropriate for a spectrum's provenance.
pub fn weight_tolerance<T: Scalar>(spectrum: &Spectrum<T>) -> T {
    source_tolerance(spectrum.source())
}

/// Distance under which a rate counts as hitting a weight, by spectrum source.
pub fn source_tolerance<T: Scalar>(source: SpectrumSource) -> T {
    if source.is_analytic() {
        T::lit(ANALYTIC_RATE_TOL)
    } else {
        T::lit(MESH_RATE_TOL_FLOOR.max(CLUSTER_REL_GAP))
    }
}

fn covers<T: Scalar>(spectrum: &Spectrum<T>, need: T) -> bool {
    spectrum.cutoff() >= need * (T::one() - T::lit(1e-12))
}

/// Exceptional weights of one link spectrum inside `window`, ascending.
pub fn weights_in_window<T: Scalar>(spectrum: &Spectrum<T>, m: usize, window: &Window<T>) -> Result<Vec<ExceptionalWeight<T>>> {
    let mut out = Vec::new();
    for entry in spectrum.entries() {
        let (plus, minus) = roots_for_eigenvalue(entry.eigenvalue, m)?;
        for gamma in [minus, plus] {
            if window.contains(gamma) {
                out.push(ExceptionalWeight {
                    gamma,
                    multiplicity: entry.multiplicity,
                    eigenvalue: entry.eigenvalue,
                });
            }
        }
    }
    out.sort_by(|a, b| a.gamma.partial_cmp(&b.gamma).unwrap());
    Ok(out)
}

/// Exceptional weights of every end inside `window`. With `strict`, an end
/// whose spectrum cutoff does not reach the window is an error; otherwise
/// the end is flagged incomplete.
pub fn exceptional_set<T: Scalar>(
    ends: &[ConeEnd<T>],
    m: usize,
    window: Window<T>,
    strict: bool,
) -> Result<ExceptionalWeightSet<T>> {
    check_dimension(m)?;
    let need = window.required_cutoff(m);
    let mut per_end = Vec::with_capacity(ends.len());
    for (j, end) in ends.iter().enumerate() {
        let complete = covers(&end.spectrum, need);
        if strict && !complete {
            return Err(Error::CutoffInsufficient {
                context: format!("end {j}, window {}", window.describe()),
                have: end.spectrum.cutoff().as_f64(),
                need: need.as_f64(),
            });
        }
        per_end.push(EndWeights {
            kind: end.kind,
            weights: weights_in_window(&end.spectrum, m, &window)?,
            complete,
            tolerance: weight_tolerance(&end.spectrum),
            cutoff: end.spectrum.cutoff(),
        });
    }
    Ok(ExceptionalWeightSet { m, window, per_end })
}

fn check_covered<T: Scalar>(ws: &ExceptionalWeightSet<T>, values: &[T]) -> Result<()> {
    if values.len() != ws.per_end.len() {
        return Err(Error::InvalidInput(format!(
            "expected {} components, got {}",
            ws.per_end.len(),
            values.len()
        )));
    }
    let need = ws.window.required_cutoff(ws.m);
    for (j, (end, &x)) in ws.per_end.iter().zip(values).enumerate() {
        if !end.complete || !ws.window.contains(x) {
            return Err(Error::CutoffInsufficient {
                context: format!("end {j}, component {x} against window {}", ws.window.describe()),
                have: end.cutoff.as_f64(),
                need: need.max(eigenvalue_for_weight(x, ws.m)).as_f64(),
            });
        }
    }
    Ok(())
}

/// `m(γ) = Σ_j m^j(γ_j)`.
pub fn total_multiplicity<T: Scalar>(ws: &ExceptionalWeightSet<T>, gammas: &[T]) -> Result<usize> {
    check_covered(ws, gammas)?;
    Ok(ws.per_end.iter().zip(gammas).map(|(e, &g)| e.multiplicity_at(g)).sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct NearestWeight<T> {
    pub gamma: Option<T>,
    pub multiplicity: usize,
    pub distance: Option<T>,
    pub exceptional: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExceptionalCheck<T> {
    pub exceptional: bool,
    pub per_end: Vec<NearestWeight<T>>,
}

/// Whether some rate component lies within tolerance of a weight of its
/// end. The nearest weight in the window is reported per end; ties go to
/// the larger weight. `tol = None` uses each end's own tolerance.
pub fn is_exceptional<T: Scalar>(ws: &ExceptionalWeightSet<T>, rates: &[T], tol: Option<T>) -> Result<ExceptionalCheck<T>> {
    check_covered(ws, rates)?;
    let mut per_end = Vec::with_capacity(rates.len());
    for (end, &r) in ws.per_end.iter().zip(rates) {
        let tol = tol.unwrap_or(end.tolerance);
        let mut best: Option<&ExceptionalWeight<T>> = None;
        for w in &end.weights {
            let d = (w.gamma - r).abs();
            match best {
                Some(b) if d > (b.gamma - r).abs() => {}
                _ => best = Some(w),
            }
        }
        per_end.push(match best {
            Some(w) => {
                let d = (w.gamma - r).abs();
                NearestWeight {
                    gamma: Some(w.gamma),
                    multiplicity: w.multiplicity,
                    distance: Some(d),
                    exceptional: d <= tol,
                }
            }
            None => NearestWeight {
                gamma: None,
                multiplicity: 0,
                distance: None,
                exceptional: false,
            },
        });
    }
    Ok(ExceptionalCheck {
        exceptional: per_end.iter().any(|n| n.exceptional),
        per_end,
    })
}

/// Errors with [`Error::ExceptionalRate`] when any rate sits on a weight
/// of its end.
pub fn require_non_exceptional<T: Scalar>(ends: &[ConeEnd<T>], m: usize, rates: &[T]) -> Result<()> {
    if ends.len() != rates.len() {
        return Err(Error::InvalidInput(format!("{} ends but {} rates", ends.len(), rates.len())));
    }
    for (j, (end, &r)) in ends.iter().zip(rates).enumerate() {
        if !r.is_finite() {
            return Err(Error::InvalidInput(format!("rate on end {j} is not finite")));
        }
        let tol = weight_tolerance(&end.spectrum);
        let window = Window::closed(r - tol, r + tol)?;
        let need = window.required_cutoff(m);
        if !covers(&end.spectrum, need) {
            return Err(Error::CutoffInsufficient {
                context: format!("end {j}, deciding whether rate {r} is exceptional"),
                have: end.spectrum.cutoff().as_f64(),
                need: need.as_f64(),
            });
        }
        if let Some(w) = weights_in_window(&end.spectrum, m, &window)?.first() {
            return Err(Error::ExceptionalRate {
                end: j,
                rate: r.as_f64(),
                gamma: w.gamma.as_f64(),
                distance: (w.gamma - r).abs().as_f64(),
            });
        }
    }
    Ok(())
}

/// `Σ m^j(γ)` over the weights of one end inside `window`; the spectrum
/// must be complete there.
pub fn multiplicity_in<T: Scalar>(spectrum: &Spectrum<T>, m: usize, window: &Window<T>, end: usize) -> Result<usize> {
    let need = window.required_cutoff(m);
    if !covers(spectrum, need) {
        return Err(Error::CutoffInsufficient {
            context: format!("end {end}, weights in {}", window.describe()),
            have: spectrum.cutoff().as_f64(),
            need: need.as_f64(),
        });
    }
    Ok(weights_in_window(spectrum, m, window)?.iter().map(|w| w.multiplicity).sum())
}

/// Smallest exceptional weight strictly above `threshold`, if the listed
/// spectrum contains one. Larger eigenvalues only give larger weights, so
/// the answer is exact whenever it exists.
pub fn smallest_weight_above<T: Scalar>(spectrum: &Spectrum<T>, m: usize, threshold: T) -> Option<T> {
    spectrum
        .entries()
        .iter()
        .filter_map(|e| roots_for_eigenvalue(e.eigenvalue, m).ok())
        .map(|(plus, _)| plus)
        .find(|&g| g > threshold)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FredholmData {
    pub ker_dim: usize,
    pub coker_dim: usize,
    pub index: i64,
    pub case: ConifoldCase,
}

impl FredholmData {
    fn new(case: ConifoldCase, ker_dim: usize, coker_dim: usize) -> Self {
        Self {
            ker_dim,
            coker_dim,
            index: ker_dim as i64 - coker_dim as i64,
            case,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Zone {
    Gap,
    Above,
    Below,
    Other,
}

fn zone<T: Scalar>(r: T, m: usize) -> Zone {
    let low = T::lit(2.0) - T::from_count(m);
    if r > low && r < T::zero() {
        Zone::Gap
    } else if r > T::zero() {
        Zone::Above
    } else if r < low {
        Zone::Below
    } else {
        Zone::Other
    }
}

/// Kernel and cokernel dimensions of the weighted Laplacian at `rates`
/// (one per end, in the order of `ends`).
pub fn fredholm_data<T: Scalar>(case: ConifoldCase, m: usize, ends: &[ConeEnd<T>], rates: &[T]) -> Result<FredholmData> {
    check_dimension(m)?;
    if case == ConifoldCase::Compact {
        if !ends.is_empty() || !rates.is_empty() {
            return Err(Error::InvalidInput("compact case takes no ends".into()));
        }
        return Ok(FredholmData::new(case, 1, 1));
    }
    if ends.is_empty() {
        return Err(Error::InvalidInput(format!("{} case needs at least one end", case.as_str())));
    }
    if let Some(bad) = ends.iter().find(|e| !case.admits(e.kind)) {
        return Err(Error::InvalidInput(format!(
            "{} end in a {} clause",
            bad.kind.as_str(),
            case.as_str()
        )));
    }
    require_non_exceptional(ends, m, rates)?;

    let low = T::lit(2.0) - T::from_count(m);
    let zones: Vec<Zone> = rates.iter().map(|&r| zone(r, m)).collect();
    let all = |kind: Option<EndKind>, pred: &dyn Fn(Zone) -> bool| {
        ends.iter()
            .zip(&zones)
            .filter(|(e, _)| kind.map_or(true, |k| e.kind == k))
            .all(|(_, &z)| pred(z))
    };
    // windows that would be empty (rate inside the gap) contribute nothing
    let sum = |kind: EndKind, window: &dyn Fn(T) -> Option<Window<T>>| -> Result<usize> {
        let mut total = 0;
        for (j, (end, &r)) in ends.iter().zip(rates).enumerate() {
            if end.kind != kind {
                continue;
            }
            if let Some(w) = window(r) {
                total += multiplicity_in(&end.spectrum, m, &w, j)?;
            }
        }
        Ok(total)
    };
    let up_from_zero = |r: T| (r > T::zero()).then(|| Window {
        lo: Bound::Included(T::zero()),
        hi: Bound::Excluded(r),
    });
    let above_zero = |r: T| (r > T::zero()).then(|| Window {
        lo: Bound::Excluded(T::zero()),
        hi: Bound::Excluded(r),
    });
    let down_to_low = |r: T| (r < low).then(|| Window {
        lo: Bound::Excluded(r),
        hi: Bound::Included(low),
    });
    let mismatch = || {
        Err(Error::InvalidInput(format!(
            "rates {:?} match no clause of the {} case",
            rates.iter().map(|r| r.as_f64()).collect::<Vec<_>>(),
            case.as_str()
        )))
    };

    match case {
        ConifoldCase::Compact => unreachable!(),
        ConifoldCase::Ac => {
            if all(None, &|z| z == Zone::Gap) {
                Ok(FredholmData::new(case, 0, 0))
            } else if all(None, &|z| z == Zone::Gap || z == Zone::Above) {
                let ker = sum(EndKind::Ac, &up_from_zero)?;
                Ok(FredholmData::new(case, ker, 0))
            } else if all(None, &|z| z == Zone::Gap || z == Zone::Below) {
                let coker = sum(EndKind::Ac, &down_to_low)?;
                Ok(FredholmData::new(case, 0, coker))
            } else {
                mismatch()
            }
        }
        ConifoldCase::Cs => {
            if all(None, &|z| z == Zone::Gap) {
                Ok(FredholmData::new(case, 1, 1))
            } else if all(None, &|z| z == Zone::Above) {
                let e = ends.len();
                let coker = e + sum(EndKind::Cs, &above_zero)?;
                Ok(FredholmData::new(case, 0, coker))
            } else {
                mismatch()
            }
        }
        ConifoldCase::Csac => {
            let s = ends.iter().filter(|e| e.kind == EndKind::Cs).count();
            if all(None, &|z| z == Zone::Gap) {
                Ok(FredholmData::new(case, 0, 0))
            } else if all(Some(EndKind::Cs), &|z| z == Zone::Above)
                && all(Some(EndKind::Ac), &|z| z == Zone::Gap || z == Zone::Below)
            {
                let cs = sum(EndKind::Cs, &above_zero)?;
                let ac = sum(EndKind::Ac, &down_to_low)?;
                Ok(FredholmData::new(case, 0, s + cs + ac))
            } else {
                mismatch()
            }
        }
    }
}

/// Change of Fredholm index when the rates move from `from` to `to`. Each
/// exceptional weight crossed upward adds its multiplicity on an AC end and
/// subtracts it on a CS end.
pub fn index_jump<T: Scalar>(ends: &[ConeEnd<T>], m: usize, from: &[T], to: &[T]) -> Result<i64> {
    check_dimension(m)?;
    require_non_exceptional(ends, m, from)?;
    require_non_exceptional(ends, m, to)?;
    let mut jump = 0i64;
    for (j, ((end, &a), &b)) in ends.iter().zip(from).zip(to).enumerate() {
        if a == b {
            continue;
        }
        let (lo, hi, up) = if a < b { (a, b, true) } else { (b, a, false) };
        let crossed = multiplicity_in(&end.spectrum, m, &Window::open(lo, hi)?, j)? as i64;
        let sign = match (end.kind, up) {
            (EndKind::Ac, true) | (EndKind::Cs, false) => 1,
            (EndKind::Ac, false) | (EndKind::Cs, true) => -1,
        };
        jump += sign * crossed;
    }
    Ok(jump)
}
