//! Low generalized eigenpairs of the cotangent stiffness and lumped mass.
//!
//! With the diagonal mass `M`, `K x = λ M x` becomes the standard symmetric
//! problem `A y = λ y` for `A = M^{-1/2} K M^{-1/2}` and `y = M^{1/2} x`.
//! The solver runs shift-inverted block subspace iteration on
//! `(A + σ)^{-1}`, applied through an envelope Cholesky factor of
//! `K + σ M`, with Rayleigh–Ritz on `A` and locking of converged pairs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{assemble, AssemblyOptions, TriangleMesh};
use crate::error::{Error, Result};
use crate::linalg::{axpy_neg, dot, norm, symmetric_eigen, CsrMatrix, DenseMatrix, EnvelopeCholesky};
use crate::spectral_catalog::{Eigenspace, Spectrum, SpectrumSource};
use crate::Scalar;

/// Two consecutive eigenvalues share a cluster when their gap is at most
/// `max(CLUSTER_REL_GAP * value, 10 * tol)`.
pub const CLUSTER_REL_GAP: f64 = 0.02;

#[derive(Debug, Clone, PartialEq)]
pub struct EigensolveOptions {
    /// Residual bound `‖Kx − λMx‖ / ‖x‖_M` every reported pair must meet.
    pub tol: f64,
    /// Pairs are computed up to `cutoff * (1 + margin)` so clusters that
    /// straddle the cutoff are captured whole.
    pub margin: f64,
    pub assembly: AssemblyOptions,
    pub seed: u64,
    /// Overrides the default budget of `10 · requested · sqrt(n)` iterations.
    pub max_iterations: Option<usize>,
    pub block_size: Option<usize>,
}

impl Default for EigensolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            margin: 0.05,
            assembly: AssemblyOptions::default(),
            seed: 0x5eed,
            max_iterations: None,
            block_size: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshStats {
    pub vertices: usize,
    pub faces: usize,
    pub edges: usize,
    pub components: usize,
    pub euler_characteristic: i64,
    pub min_angle_deg: f64,
    pub area: f64,
}

impl MeshStats {
    pub fn of<T: Scalar>(mesh: &TriangleMesh<T>) -> Self {
        Self {
            vertices: mesh.vertices().len(),
            faces: mesh.faces().len(),
            edges: mesh.n_edges(),
            components: mesh.connected_components(),
            euler_characteristic: mesh.euler_characteristic(),
            min_angle_deg: mesh.min_angle_deg().0.as_f64(),
            area: mesh.area().as_f64(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EigResult<T> {
    pub spectrum: Spectrum<T>,
    /// Every computed eigenvalue, ascending, including those past the cutoff.
    pub eigenvalues: Vec<T>,
    /// Residual of each pair in `eigenvalues`.
    pub residuals: Vec<T>,
    pub iterations: usize,
    pub mesh_stats: MeshStats,
}

/// Groups ascending eigenvalues using the relative-gap rule; returns
/// `(mean, count)` per cluster.
pub fn cluster_eigenvalues<T: Scalar>(values: &[T], tol: T) -> Vec<(T, usize)> {
    let rel = T::lit(CLUSTER_REL_GAP);
    let floor = T::lit(10.0) * tol;
    let mut out: Vec<(T, usize)> = Vec::new();
    let mut sum = T::zero();
    let mut count = 0usize;
    for (i, &v) in values.iter().enumerate() {
        if i > 0 {
            let gap = v - values[i - 1];
            if gap > (rel * v.abs()).max(floor) {
                out.push((sum / T::from_count(count), count));
                sum = T::zero();
                count = 0;
            }
        }
        sum += v;
        count += 1;
    }
    if count > 0 {
        out.push((sum / T::from_count(count), count));
    }
    out
}

fn starts_new_cluster<T: Scalar>(prev: T, next: T, tol: T) -> bool {
    next - prev > (T::lit(CLUSTER_REL_GAP) * next.abs()).max(T::lit(10.0) * tol)
}

struct Operators<'a, T> {
    stiffness: &'a CsrMatrix<T>,
    mass: &'a [T],
    sqrt_mass: Vec<T>,
    factor: EnvelopeCholesky<T>,
}

impl<T: Scalar> Operators<'_, T> {
    /// `(A + σ)^{-1} y`
    fn shift_invert(&self, y: &[T]) -> Vec<T> {
        let mut b: Vec<T> = y.iter().zip(&self.sqrt_mass).map(|(&a, &s)| a * s).collect();
        self.factor.solve_in_place(&mut b);
        b.iter_mut().zip(&self.sqrt_mass).for_each(|(x, &s)| *x *= s);
        b
    }

    /// `A y`, also returning `K x` for `x = M^{-1/2} y`.
    fn apply(&self, y: &[T]) -> (Vec<T>, Vec<T>) {
        let x: Vec<T> = y.iter().zip(&self.sqrt_mass).map(|(&a, &s)| a / s).collect();
        let mut kx = vec![T::zero(); x.len()];
        self.stiffness.mul_vec(&x, &mut kx);
        let ay = kx.iter().zip(&self.sqrt_mass).map(|(&a, &s)| a / s).collect();
        (ay, kx)
    }

    /// `‖K x − θ M x‖` for the unit vector `y` (so `‖x‖_M = 1`).
    fn residual(&self, y: &[T], kx: &[T], theta: T) -> T {
        kx.iter()
            .zip(y)
            .zip(self.mass.iter().zip(&self.sqrt_mass))
            .map(|((&k, &yi), (&m, &s))| {
                let r = k - theta * m * (yi / s);
                r * r
            })
            .sum::<T>()
            .sqrt()
    }
}

fn random_vector<T: Scalar>(n: usize, rng: &mut ChaCha8Rng) -> Vec<T> {
    (0..n).map(|_| T::lit(rng.gen_range(-1.0..1.0))).collect()
}

/// Orthogonalizes `v` against `basis` (twice) and normalizes. Returns `false`
/// when `v` was numerically inside the span.
fn orthonormalize_against<T: Scalar>(v: &mut [T], basis: &[Vec<T>]) -> bool {
    let before = norm(v);
    if before == T::zero() {
        return false;
    }
    for _ in 0..2 {
        for b in basis {
            let c = dot(b, v);
            axpy_neg(c, b, v);
        }
    }
    let after = norm(v);
    if after <= before * T::lit(1e-8).max(T::eps() * T::lit(100.0)) {
        return false;
    }
    v.iter_mut().for_each(|x| *x /= after);
    true
}

/// Computes every generalized eigenvalue of the mesh Laplacian up to
/// `cutoff * (1 + margin)` and clusters them into a [`Spectrum`] whose
/// entries are the clusters with mean `<= cutoff`.
pub fn eigensolve<T: Scalar>(
    mesh: &TriangleMesh<T>,
    cutoff: T,
    options: &EigensolveOptions,
) -> Result<EigResult<T>> {
    if !(cutoff > T::zero()) || !cutoff.is_finite() {
        return Err(Error::InvalidInput(format!("eigensolve cutoff {cutoff} must be positive")));
    }
    if !(options.tol > 0.0 && options.tol < 1.0) {
        return Err(Error::InvalidInput(format!("tolerance {} must lie in (0, 1)", options.tol)));
    }
    let stats = MeshStats::of(mesh);
    let (stiffness, mass) = assemble(mesh, &options.assembly)?;
    let n = mass.len();
    let tol = T::lit(options.tol);
    let target = cutoff * (T::one() + T::lit(options.margin.max(0.0)));

    // Weyl's law on a surface: N(λ) ≈ area · λ / 4π (plus one per component).
    let weyl = (stats.area * target.as_f64() / (4.0 * std::f64::consts::PI)).ceil() as usize;
    let requested = (weyl + stats.components).max(1);
    let block = options
        .block_size
        .unwrap_or_else(|| (requested + 8).max(16))
        .clamp(1, n);
    let budget = options
        .max_iterations
        .unwrap_or_else(|| 10 * requested * ((n as f64).sqrt().ceil() as usize));

    let sigma = (target * T::lit(0.1)).max(T::lit(1e-3));
    let shifted = stiffness.add_diagonal(sigma, &mass);
    let ops = Operators {
        stiffness: &stiffness,
        mass: &mass,
        sqrt_mass: mass.iter().map(|m| m.sqrt()).collect(),
        factor: EnvelopeCholesky::factor(&shifted)?,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut locked: Vec<Vec<T>> = Vec::new();
    let mut locked_values: Vec<T> = Vec::new();
    let mut locked_residuals: Vec<T> = Vec::new();
    let mut active: Vec<Vec<T>> = (0..block).map(|_| random_vector(n, &mut rng)).collect();
    let mut last_residuals: Vec<T> = Vec::new();

    for iteration in 1..=budget {
        // power step, then re-orthonormalize against locked and each other
        let mut basis: Vec<Vec<T>> = Vec::with_capacity(active.len());
        for v in &active {
            let mut w = ops.shift_invert(v);
            let mut ok = false;
            for _ in 0..4 {
                let mut against = locked.clone();
                against.extend(basis.iter().cloned());
                if orthonormalize_against(&mut w, &against) {
                    ok = true;
                    break;
                }
                w = random_vector(n, &mut rng);
            }
            if ok {
                basis.push(w);
            }
        }
        if basis.is_empty() {
            break;
        }

        // Rayleigh–Ritz on A
        let applied: Vec<Vec<T>> = basis.iter().map(|w| ops.apply(w).0).collect();
        let p = basis.len();
        let mut h = DenseMatrix::zeros(p, p);
        for i in 0..p {
            for j in i..p {
                let v = dot(&basis[i], &applied[j]);
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        let eig = symmetric_eigen(&h);
        let mut ritz: Vec<Vec<T>> = Vec::with_capacity(p);
        for k in 0..p {
            let mut y = vec![T::zero(); n];
            for (i, b) in basis.iter().enumerate() {
                let c = eig.vectors[(i, k)];
                y.iter_mut().zip(b).for_each(|(yi, &bi)| *yi += c * bi);
            }
            ritz.push(y);
        }
        let residuals: Vec<T> = ritz
            .iter()
            .zip(&eig.values)
            .map(|(y, &theta)| {
                let (_, kx) = ops.apply(y);
                ops.residual(y, &kx, theta)
            })
            .collect();

        // lock the converged prefix
        let mut n_lock = 0;
        if iteration > 1 {
            while n_lock < p && residuals[n_lock] <= tol {
                n_lock += 1;
            }
        }
        for k in 0..n_lock {
            locked.push(ritz[k].clone());
            locked_values.push(eig.values[k]);
            locked_residuals.push(residuals[k]);
        }
        last_residuals = residuals[n_lock..].to_vec();
        active = ritz.split_off(n_lock);
        while active.len() < block.min(n.saturating_sub(locked.len())) {
            active.push(random_vector(n, &mut rng));
        }

        if is_complete(&locked_values, eig.values.get(n_lock).copied(), target, tol) || locked.len() == n {
            return finish(
                locked_values,
                locked_residuals,
                iteration,
                cutoff,
                tol,
                stats,
            );
        }
    }

    let mut residuals: Vec<f64> = locked_residuals.iter().map(|r| r.as_f64()).collect();
    residuals.extend(last_residuals.iter().map(|r| r.as_f64()));
    let worst = residuals.iter().copied().fold(0.0, f64::max);
    Err(Error::Convergence {
        iterations: budget,
        worst,
        residuals,
    })
}

/// The locked set is complete once it holds a value beyond `target` that
/// starts a fresh cluster, and no active Ritz value lies below it.
fn is_complete<T: Scalar>(locked: &[T], lowest_active: Option<T>, target: T, tol: T) -> bool {
    let mut sorted = locked.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let Some(first_above) = sorted.iter().position(|&v| v > target) else {
        return false;
    };
    if first_above == 0 {
        return false;
    }
    let guard = sorted[first_above];
    let below_guard = sorted[first_above - 1];
    if !starts_new_cluster(below_guard, guard, tol) {
        return false;
    }
    lowest_active.map_or(true, |a| a >= below_guard)
}

fn finish<T: Scalar>(
    values: Vec<T>,
    residuals: Vec<T>,
    iterations: usize,
    cutoff: T,
    tol: T,
    mesh_stats: MeshStats,
) -> Result<EigResult<T>> {
    let mut pairs: Vec<(T, T)> = values.into_iter().zip(residuals).collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let (eigenvalues, residuals): (Vec<T>, Vec<T>) = pairs.into_iter().unzip();

    let clusters = cluster_eigenvalues(&eigenvalues, tol);
    let mut entries: Vec<Eigenspace<T>> = clusters
        .iter()
        .filter(|(mean, _)| *mean <= cutoff)
        .map(|&(mean, count)| Eigenspace::new(mean, count))
        .collect();
    match entries.first_mut() {
        Some(zero) if zero.eigenvalue.abs() <= T::lit(10.0) * tol => zero.eigenvalue = T::zero(),
        _ => {
            return Err(Error::InternalInconsistency(format!(
                "lowest mesh eigenvalue {:?} is not numerically zero",
                eigenvalues.first()
            )))
        }
    }
    let spectrum = Spectrum::new(entries, cutoff, SpectrumSource::Mesh, mesh_stats.components)?;
    Ok(EigResult {
        spectrum,
        eigenvalues,
        residuals,
        iterations,
        mesh_stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{icosphere, octahedron};

    #[test]
    fn clustering_rule() {
        let v = [0.0, 1e-12, 2.0, 2.01, 2.03, 6.0, 6.2];
        let c = cluster_eigenvalues(&v, 1e-8);
        let counts: Vec<usize> = c.iter().map(|x| x.1).collect();
        assert_eq!(counts, vec![2, 3, 1, 1]);
    }

    #[test]
    fn octahedron_is_psd_with_simple_zero() {
        let r = eigensolve(&octahedron::<f64>(), 3.0, &EigensolveOptions::default()).unwrap();
        let e = r.spectrum.entries();
        assert_eq!(e[0].eigenvalue, 0.0);
        assert_eq!(e[0].multiplicity, 1);
        assert!(e[1..].iter().all(|x| x.eigenvalue > 0.0));
        assert!(r.residuals.iter().all(|&x| x <= 1e-8));
    }

    #[test]
    fn matches_dense_reference_on_small_mesh() {
        // oracle: dense Jacobi on M^{-1/2} K M^{-1/2}
        let mesh = icosphere::<f64>(1);
        let (k, m) = assemble(&mesh, &AssemblyOptions::default()).unwrap();
        let n = m.len();
        let mut a = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] = k.get(i, j) / (m[i] * m[j]).sqrt();
            }
        }
        let dense = symmetric_eigen(&a).values;
        let r = eigensolve(&mesh, 20.0, &EigensolveOptions::default()).unwrap();
        for (got, want) in r.eigenvalues.iter().zip(&dense) {
            assert!((got - want).abs() < 1e-7, "{got} vs {want}");
        }
        let below = dense.iter().filter(|&&x| x <= 21.0).count();
        assert!(r.eigenvalues.len() >= below);
    }

    #[test]
    fn disjoint_spheres_have_double_zero() {
        let a = icosphere::<f64>(2);
        let two = a.disjoint_union(&a.translated([4.0, 0.0, 0.0])).unwrap();
        let r = eigensolve(&two, 3.0, &EigensolveOptions::default()).unwrap();
        assert_eq!(r.spectrum.entries()[0].multiplicity, 2);
        assert_eq!(r.spectrum.b0(), 2);
    }

    #[test]
    fn tiny_budget_reports_non_convergence() {
        let opts = EigensolveOptions {
            max_iterations: Some(1),
            ..Default::default()
        };
        match eigensolve(&icosphere::<f64>(2), 7.0, &opts) {
            Err(Error::Convergence { residuals, .. }) => assert!(!residuals.is_empty()),
            other => panic!("expected convergence failure, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let m = octahedron::<f64>();
        assert!(eigensolve(&m, 0.0, &EigensolveOptions::default()).is_err());
        let bad_tol = EigensolveOptions {
            tol: 2.0,
            ..Default::default()
        };
        assert!(eigensolve(&m, 1.0, &bad_tol).is_err());
    }

    fn first_nonzero_clusters(level: usize) -> Vec<(f64, usize)> {
        let r = eigensolve(&icosphere::<f64>(level), 13.0, &EigensolveOptions::default()).unwrap();
        r.spectrum.entries().iter().map(|e| (e.eigenvalue, e.multiplicity)).collect()
    }

    #[test]
    fn icosphere_recovers_round_sphere_spectrum() {
        let got = first_nonzero_clusters(4);
        let mults: Vec<usize> = got.iter().map(|c| c.1).collect();
        assert_eq!(mults, vec![1, 3, 5, 7]);
        assert_eq!(got[0].0, 0.0);
        for (c, want) in got[1..].iter().zip([2.0, 6.0, 12.0]) {
            assert!((c.0 - want).abs() / want < 0.02, "{} vs {want}", c.0);
        }
    }

    #[test]
    fn refinement_reduces_error() {
        let err = |level| {
            first_nonzero_clusters(level)[1..4]
                .iter()
                .zip([2.0, 6.0, 12.0])
                .map(|(c, w)| (c.0 - w).abs() / w)
                .collect::<Vec<f64>>()
        };
        let coarse = err(2);
        let fine = err(4);
        for (c, f) in coarse.iter().zip(&fine) {
            assert!(f < c, "{fine:?} vs {coarse:?}");
        }
    }
}
