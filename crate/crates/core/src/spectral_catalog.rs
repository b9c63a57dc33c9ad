//! Laplace spectra of link manifolds.
//!
//! A [`Spectrum`] is the sorted list of distinct eigenvalues of the link
//! Laplacian together with their multiplicities, trusted up to an inclusive
//! `cutoff`. Spectra come from closed formulas (round spheres, flat tori),
//! from an explicit list, or from a triangulated surface (see
//! [`crate::mesh`]).

use std::path::PathBuf;

use num_integer::binomial;

use crate::error::{Error, Result};
use crate::linalg::{invert, symmetric_eigen, DenseMatrix};
use crate::mesh::{self, EigensolveOptions};
use crate::Scalar;

/// Relative tolerance used when grouping eigenvalues produced by exact formulas.
pub const ANALYTIC_GROUPING_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpectrumSource {
    Sphere,
    Torus,
    Explicit,
    Mesh,
}

impl SpectrumSource {
    pub fn as_str(self) -> &'static str {
        match self {
            SpectrumSource::Sphere => "sphere",
            SpectrumSource::Torus => "torus",
            SpectrumSource::Explicit => "explicit",
            SpectrumSource::Mesh => "mesh",
        }
    }

    pub fn is_analytic(self) -> bool {
        !matches!(self, SpectrumSource::Mesh)
    }
}

/// One distinct eigenvalue and the dimension of its eigenspace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenspace<T> {
    pub eigenvalue: T,
    pub multiplicity: usize,
}

impl<T> Eigenspace<T> {
    pub fn new(eigenvalue: T, multiplicity: usize) -> Self {
        Self {
            eigenvalue,
            multiplicity,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T> {
    entries: Vec<Eigenspace<T>>,
    cutoff: T,
    source: SpectrumSource,
}

impl<T: Scalar> Spectrum<T> {
    /// Validates and builds a spectrum of a link with `b0` components.
    pub fn new(
        entries: Vec<Eigenspace<T>>,
        cutoff: T,
        source: SpectrumSource,
        b0: usize,
    ) -> Result<Self> {
        let spectrum = Self {
            entries,
            cutoff,
            source,
        };
        spectrum.validate(b0)?;
        Ok(spectrum)
    }

    /// Explicit spectrum from `(eigenvalue, multiplicity)` pairs.
    pub fn explicit(pairs: &[(T, usize)], cutoff: T, b0: usize) -> Result<Self> {
        let entries = pairs.iter().map(|&(e, k)| Eigenspace::new(e, k)).collect();
        Self::new(entries, cutoff, SpectrumSource::Explicit, b0)
    }

    pub fn validate(&self, b0: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(msg));
        if !self.cutoff.is_finite() || self.cutoff < T::zero() {
            return bad(format!("spectrum cutoff {} must be finite and nonnegative", self.cutoff));
        }
        if b0 == 0 {
            return bad("a link has at least one component".into());
        }
        let Some(first) = self.entries.first() else {
            return bad("spectrum must contain eigenvalue 0".into());
        };
        if first.eigenvalue != T::zero() {
            return bad(format!("lowest eigenvalue is {}, expected 0", first.eigenvalue));
        }
        if first.multiplicity != b0 {
            return bad(format!(
                "eigenvalue 0 has multiplicity {} but the link has {b0} component(s)",
                first.multiplicity
            ));
        }
        for (i, e) in self.entries.iter().enumerate() {
            if !e.eigenvalue.is_finite() || e.eigenvalue < T::zero() {
                return bad(format!("eigenvalue {} is negative or not finite", e.eigenvalue));
            }
            if e.multiplicity == 0 {
                return bad(format!("eigenvalue {} has multiplicity 0", e.eigenvalue));
            }
            if e.eigenvalue > self.cutoff {
                return bad(format!(
                    "eigenvalue {} exceeds the cutoff {}",
                    e.eigenvalue, self.cutoff
                ));
            }
            if i > 0 && !(e.eigenvalue > self.entries[i - 1].eigenvalue) {
                return bad("eigenvalues must be strictly increasing".into());
            }
        }
        Ok(())
    }

    pub fn entries(&self) -> &[Eigenspace<T>] {
        &self.entries
    }

    pub fn cutoff(&self) -> T {
        self.cutoff
    }

    pub fn source(&self) -> SpectrumSource {
        self.source
    }

    /// Number of link components, read off the multiplicity of eigenvalue 0.
    pub fn b0(&self) -> usize {
        self.entries.first().map_or(0, |e| e.multiplicity)
    }

    /// Total number of eigenfunctions listed (sum of multiplicities).
    pub fn total_multiplicity(&self) -> usize {
        self.entries.iter().map(|e| e.multiplicity).sum()
    }

    /// Relative tolerance appropriate for comparing eigenvalues of this spectrum.
    pub fn eigenvalue_tolerance(&self) -> T {
        if self.source.is_analytic() {
            T::lit(ANALYTIC_GROUPING_TOL)
        } else {
            T::lit(mesh::CLUSTER_REL_GAP)
        }
    }

    /// Restricts to eigenvalues `<= cutoff`; the cutoff never grows.
    pub fn truncated(&self, cutoff: T) -> Self {
        let cutoff = cutoff.min(self.cutoff);
        Self {
            entries: self
                .entries
                .iter()
                .copied()
                .filter(|e| e.eigenvalue <= cutoff)
                .collect(),
            cutoff,
            source: self.source,
        }
    }

    /// Declares the listed entries complete up to `cutoff` (which may exceed
    /// the trusted cutoff). Used only in non-strict mode, where the caller
    /// records the margin as a warning.
    pub fn with_assumed_cutoff(&self, cutoff: T) -> Self {
        Self {
            entries: self.entries.clone(),
            cutoff: cutoff.max(self.cutoff),
            source: self.source,
        }
    }

    /// Multiplicity of the eigenvalue matching `e` within this spectrum's tolerance.
    pub fn multiplicity_of(&self, e: T) -> usize {
        let tol = self.eigenvalue_tolerance();
        self.entries
            .iter()
            .find(|x| crate::scalar::approx_eq(x.eigenvalue, e, tol))
            .map_or(0, |x| x.multiplicity)
    }

    /// Inserts an eigenvalue (or raises its multiplicity if already present).
    pub fn with_inserted(&self, e: T, multiplicity: usize) -> Result<Self> {
        if multiplicity == 0 {
            return Err(Error::InvalidInput("inserted multiplicity must be positive".into()));
        }
        let mut entries = self.entries.clone();
        match entries.iter_mut().find(|x| x.eigenvalue == e) {
            Some(x) => x.multiplicity += multiplicity,
            None => {
                entries.push(Eigenspace::new(e, multiplicity));
                entries.sort_by(|a, b| a.eigenvalue.partial_cmp(&b.eigenvalue).unwrap());
            }
        }
        let b0 = entries[0].multiplicity;
        Self::new(entries, self.cutoff.max(e), self.source, b0)
    }
}

/// Groups raw eigenvalues into distinct values with multiplicities.
///
/// Consecutive sorted values join a group when they agree to relative
/// tolerance `rel_tol`; each group reports its mean.
pub fn group_eigenvalues<T: Scalar>(mut values: Vec<T>, rel_tol: T) -> Vec<Eigenspace<T>> {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let mut groups: Vec<(T, usize, T)> = Vec::new(); // (sum, count, last)
    for v in values {
        match groups.last_mut() {
            Some((sum, count, last)) if crate::scalar::approx_eq(*last, v, rel_tol) => {
                *sum += v;
                *count += 1;
                *last = v;
            }
            _ => groups.push((v, 1, v)),
        }
    }
    groups
        .into_iter()
        .map(|(sum, count, _)| Eigenspace::new(sum / T::from_count(count), count))
        .collect()
}

/// Number of degree-`k` spherical harmonics on `S^d`.
pub fn sphere_harmonic_dimension(d: usize, k: usize) -> Option<usize> {
    let d = d as u128;
    let k128 = k as u128;
    let top = binomial(d + k128, k128);
    let sub = if k >= 2 { binomial(d + k128 - 2, k128 - 2) } else { 0 };
    usize::try_from(top - sub).ok()
}

/// Spectrum of the round unit sphere `S^d`: eigenvalues `k(k + d - 1)`
/// with spherical-harmonic multiplicities, up to `cutoff` inclusive.
pub fn sphere_spectrum<T: Scalar>(d: usize, cutoff: T) -> Result<Spectrum<T>> {
    if d < 2 {
        return Err(Error::InvalidInput(format!("sphere dimension {d} must be at least 2")));
    }
    if !cutoff.is_finite() || cutoff < T::zero() {
        return Err(Error::InvalidInput(format!("cutoff {cutoff} must be finite and nonnegative")));
    }
    let mut entries = Vec::new();
    for k in 0usize.. {
        let e = (k as u128) * (k as u128 + d as u128 - 1);
        let ev = T::from_u128(e).ok_or_else(|| Error::InvalidInput("eigenvalue overflow".into()))?;
        if ev > cutoff {
            break;
        }
        let mult = sphere_harmonic_dimension(d, k)
            .ok_or_else(|| Error::InvalidInput(format!("multiplicity overflow at level {k}")))?;
        entries.push(Eigenspace::new(ev, mult));
    }
    Spectrum::new(entries, cutoff, SpectrumSource::Sphere, 1)
}

/// Spectrum of the flat torus `R^n / Λ`, where the rows of `basis` generate `Λ`.
///
/// Eigenvalues are `4π²|ξ|²` for `ξ` in the dual lattice, generated by the
/// rows of the inverse transpose of `basis`. The search box has radius
/// `sqrt(R² / σ_min)` in dual coordinates, where `R² = cutoff / 4π²` and
/// `σ_min` is the smallest eigenvalue of the dual Gram matrix, so every dual
/// vector with eigenvalue `<= cutoff` lies inside it.
pub fn torus_spectrum<T: Scalar>(basis: &DenseMatrix<T>, cutoff: T) -> Result<Spectrum<T>> {
    if !basis.is_square() || basis.rows() == 0 {
        return Err(Error::InvalidInput("torus basis must be a nonempty square matrix".into()));
    }
    if !cutoff.is_finite() || cutoff < T::zero() {
        return Err(Error::InvalidInput(format!("cutoff {cutoff} must be finite and nonnegative")));
    }
    let n = basis.rows();
    let inv = invert(basis)
        .ok_or_else(|| Error::InvalidInput("torus lattice basis is singular".into()))?;
    let dual = inv.transpose(); // rows are dual generators
    let gram = dual.matmul(&dual.transpose());
    let sigma_min = symmetric_eigen(&gram).values[0];
    if !(sigma_min > T::zero()) {
        return Err(Error::InvalidInput("torus lattice basis is singular".into()));
    }

    let four_pi_sq = T::lit(4.0) * T::PI() * T::PI();
    let r_sq = cutoff / four_pi_sq;
    // pad by one to absorb rounding in the bound itself
    let radius = ((r_sq / sigma_min).sqrt().floor().to_i64().unwrap_or(0) + 1).max(0);
    let slack = T::one() + T::lit(ANALYTIC_GROUPING_TOL);

    let mut values = Vec::new();
    let mut coords = vec![-radius; n];
    let mut xi = vec![T::zero(); n];
    loop {
        for (c, x) in xi.iter_mut().enumerate() {
            *x = (0..n).map(|r| T::from_i64(coords[r]).unwrap() * dual[(r, c)]).sum();
        }
        let ev = four_pi_sq * xi.iter().map(|&x| x * x).sum::<T>();
        if ev <= cutoff * slack {
            values.push(ev);
        }
        // odometer
        let mut pos = 0;
        loop {
            if pos == n {
                return finish_torus(values, cutoff);
            }
            coords[pos] += 1;
            if coords[pos] > radius {
                coords[pos] = -radius;
                pos += 1;
            } else {
                break;
            }
        }
    }
}

fn finish_torus<T: Scalar>(values: Vec<T>, cutoff: T) -> Result<Spectrum<T>> {
    let mut entries = group_eigenvalues(values, T::lit(ANALYTIC_GROUPING_TOL));
    // the zero vector gives exactly 0; snap rounding overshoot at the cutoff
    if let Some(first) = entries.first_mut() {
        if first.eigenvalue.abs() <= T::eps() {
            first.eigenvalue = T::zero();
        }
    }
    if let Some(last) = entries.last_mut() {
        if last.eigenvalue > cutoff {
            last.eigenvalue = cutoff;
        }
    }
    Spectrum::new(entries, cutoff, SpectrumSource::Torus, 1)
}

/// How a link's spectrum is obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum LinkKind<T> {
    /// Round unit sphere of the given dimension.
    RoundSphere { dim: usize },
    /// Flat torus whose lattice is generated by the rows of `basis`.
    FlatTorus { basis: DenseMatrix<T> },
    Explicit(Spectrum<T>),
    /// ASCII OFF triangulation of a closed surface (links of cones in C³).
    Mesh { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkDescriptor<T> {
    pub kind: LinkKind<T>,
    pub b0: usize,
    pub b1: usize,
}

impl<T: Scalar> LinkDescriptor<T> {
    pub fn new(kind: LinkKind<T>, b0: usize, b1: usize) -> Self {
        Self { kind, b0, b1 }
    }

    pub fn sphere(dim: usize) -> Self {
        Self::new(LinkKind::RoundSphere { dim }, 1, 0)
    }

    pub fn torus(basis: DenseMatrix<T>) -> Self {
        let b1 = basis.rows();
        Self::new(LinkKind::FlatTorus { basis }, 1, b1)
    }

    pub fn explicit(spectrum: Spectrum<T>, b1: usize) -> Self {
        Self::new(LinkKind::Explicit(spectrum), 1, b1)
    }

    pub fn mesh(path: impl Into<PathBuf>, b1: usize) -> Self {
        Self::new(LinkKind::Mesh { path: path.into() }, 1, b1)
    }

    pub fn is_sphere(&self) -> bool {
        matches!(self.kind, LinkKind::RoundSphere { .. })
    }

    /// Checks the descriptor against the ambient dimension `m` (links have
    /// dimension `m - 1`) and the connectedness requirement.
    pub fn check(&self, m: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(msg));
        if self.b0 != 1 {
            return bad(format!("links must be connected, got b0 = {}", self.b0));
        }
        match &self.kind {
            LinkKind::RoundSphere { dim } if *dim + 1 != m => {
                bad(format!("sphere link of dimension {dim} in ambient dimension {m}"))
            }
            LinkKind::RoundSphere { .. } if self.b1 != 0 => {
                bad(format!("sphere link has b1 = 0, got {}", self.b1))
            }
            LinkKind::FlatTorus { basis } if !basis.is_square() || basis.rows() + 1 != m => bad(
                format!("torus basis must be {0}x{0} in ambient dimension {m}", m.saturating_sub(1)),
            ),
            LinkKind::FlatTorus { basis } if self.b1 != basis.rows() => {
                bad(format!("torus T^{} has b1 = {}, got {}", basis.rows(), basis.rows(), self.b1))
            }
            LinkKind::Mesh { .. } if m != 3 => {
                bad(format!("mesh links require ambient dimension 3, got {m}"))
            }
            _ => Ok(()),
        }
    }
}

/// Produces the spectrum of a link up to `cutoff`, using default mesh solver
/// settings for mesh links.
pub fn resolve_link<T: Scalar>(descriptor: &LinkDescriptor<T>, cutoff: T) -> Result<Spectrum<T>> {
    resolve_link_with(descriptor, cutoff, &EigensolveOptions::default())
}

/// As [`resolve_link`] with explicit mesh solver options. The returned
/// cutoff is the smaller of the requested one and what the source supports.
pub fn resolve_link_with<T: Scalar>(
    descriptor: &LinkDescriptor<T>,
    cutoff: T,
    options: &EigensolveOptions,
) -> Result<Spectrum<T>> {
    if descriptor.b0 != 1 {
        return Err(Error::InvalidInput(format!(
            "links must be connected, got b0 = {}",
            descriptor.b0
        )));
    }
    match &descriptor.kind {
        LinkKind::RoundSphere { dim } => sphere_spectrum(*dim, cutoff),
        LinkKind::FlatTorus { basis } => torus_spectrum(basis, cutoff),
        LinkKind::Explicit(spectrum) => {
            spectrum.validate(descriptor.b0)?;
            Ok(spectrum.truncated(cutoff))
        }
        LinkKind::Mesh { path } => {
            let mesh = mesh::load_off::<T>(path)?;
            let components = mesh.connected_components();
            if components != descriptor.b0 {
                return Err(Error::InvalidInput(format!(
                    "mesh {} has {components} components, expected {}",
                    path.display(),
                    descriptor.b0
                )));
            }
            let result = mesh::eigensolve(&mesh, cutoff, options)?;
            Ok(result.spectrum)
        }
    }
}
