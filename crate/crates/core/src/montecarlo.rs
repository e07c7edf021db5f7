//! Stochastic oracles: Haar-random eigenbases, explicit evolution of a
//! product state, dephasing, and Gaussian spectra.
//!
//! Every sample `k` draws from its own ChaCha stream `(seed, k)`, and sample
//! values are reduced in index order by pairwise summation, so estimates are
//! bit-identical for any thread count.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rayon::prelude::*;

use crate::dense::{self, CMatrix};
use crate::error::{Error, Result};
use crate::spectrum::{Level, Spectrum};
use crate::stats::{estimate, Estimate};

/// RNG for sample `index` of a run seeded with `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Haar-distributed unitary: complex Ginibre matrix, QR, then the columns
/// of `Q` rephased so that `R` has a positive real diagonal.
pub fn haar_unitary_with(dim: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let z = CMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re * scale, im * scale)
    });
    let qr = z.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 {
            rjj / rjj.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn haar_unitary(dim: usize, seed: u64) -> CMatrix {
    haar_unitary_with(dim, &mut sample_rng(seed, 0))
}

/// Tolerances of the density-matrix invariants.
pub const DENSITY_TOLERANCE: f64 = 1e-12;
pub const POSITIVITY_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    entries: CMatrix,
}

impl DensityMatrix {
    /// Validating constructor: Hermitian and unit trace within 1e-12,
    /// eigenvalues ≥ −1e-10.
    pub fn new(entries: CMatrix) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
            return Err(Error::DimensionMismatch("density matrix must be square and non-empty".into()));
        }
        let herm = dense::max_abs(&(&entries - entries.adjoint()));
        if herm > DENSITY_TOLERANCE {
            return Err(Error::InvalidArgument(format!("not Hermitian (deviation {herm:e})")));
        }
        let tr = entries.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > DENSITY_TOLERANCE {
            return Err(Error::InvalidArgument(format!("trace {tr} is not 1")));
        }
        let min = dense::hermitian_eigenvalues(&entries)[0];
        if min < -POSITIVITY_TOLERANCE {
            return Err(Error::InvalidArgument(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self { entries })
    }

    pub fn pure(psi: &DVector<Complex64>) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 {
            return Err(Error::InvalidArgument("zero state vector".into()));
        }
        let v = psi / Complex64::new(norm, 0.0);
        Self::new(&v * v.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    pub fn partial_trace_bath(&self, d_s: usize, d_b: usize) -> Result<DensityMatrix> {
        Ok(Self {
            entries: dense::partial_trace_bath(&self.entries, d_s, d_b)?,
        })
    }

    pub fn partial_trace_system(&self, d_s: usize, d_b: usize) -> Result<DensityMatrix> {
        Ok(Self {
            entries: dense::partial_trace_system(&self.entries, d_s, d_b)?,
        })
    }
}

/// `Σ_i P_i ρ P_i`.
pub fn dephase(rho: &DensityMatrix, projectors: &[CMatrix]) -> Result<DensityMatrix> {
    let dim = rho.dim();
    if projectors.iter().any(|p| p.nrows() != dim || p.ncols() != dim) {
        return Err(Error::DimensionMismatch("projector dimension differs from state".into()));
    }
    let mut out = CMatrix::zeros(dim, dim);
    for p in projectors {
        out += p * rho.entries() * p;
    }
    Ok(DensityMatrix { entries: out })
}

/// `H = U H₀ U†` for a spectrum `H₀` (diagonal, levels in increasing order).
#[derive(Clone, Debug)]
pub struct RandomHamiltonian {
    spectrum: Spectrum,
    u: CMatrix,
}

pub const UNITARITY_TOLERANCE: f64 = 1e-12;

impl RandomHamiltonian {
    pub fn new(spectrum: Spectrum, u: CMatrix) -> Result<Self> {
        let dim = spectrum.dim();
        if u.nrows() != dim || u.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "unitary is {}x{}, spectrum dimension is {dim}",
                u.nrows(),
                u.ncols()
            )));
        }
        let dev = dense::max_abs(&(u.adjoint() * &u - CMatrix::identity(dim, dim)));
        if dev > UNITARITY_TOLERANCE {
            return Err(Error::InvalidArgument(format!("U is not unitary (deviation {dev:e})")));
        }
        Ok(Self { spectrum, u })
    }

    pub fn sample(spectrum: Spectrum, seed: u64, index: u64) -> Self {
        let u = haar_unitary_with(spectrum.dim(), &mut sample_rng(seed, index));
        Self { spectrum, u }
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn eigenbasis(&self) -> &CMatrix {
        &self.u
    }

    /// `P_i = U P_i⁰ U†`.
    pub fn projectors(&self) -> Vec<CMatrix> {
        let levels = self.spectrum.level_of_state();
        (0..self.spectrum.len())
            .map(|i| {
                let cols: Vec<usize> = (0..levels.len()).filter(|&k| levels[k] == i).collect();
                let block = self.u.select_columns(&cols);
                &block * block.adjoint()
            })
            .collect()
    }

    pub fn matrix(&self) -> CMatrix {
        let e: Vec<Complex64> = self
            .spectrum
            .level_of_state()
            .iter()
            .map(|&j| Complex64::new(self.spectrum.levels()[j].energy, 0.0))
            .collect();
        &self.u * CMatrix::from_diagonal(&DVector::from_vec(e)) * self.u.adjoint()
    }

    /// `e^{−iHt} = U e^{−iH₀t} U†`.
    pub fn propagator(&self, t: f64) -> CMatrix {
        let e: Vec<Complex64> = self
            .spectrum
            .level_of_state()
            .iter()
            .map(|&j| Complex64::from_polar(1.0, -self.spectrum.levels()[j].energy * t))
            .collect();
        &self.u * CMatrix::from_diagonal(&DVector::from_vec(e)) * self.u.adjoint()
    }
}

/// A pure product state `|s⟩_S ⊗ |b⟩_B`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductState {
    pub system: DVector<Complex64>,
    pub bath: DVector<Complex64>,
}

impl ProductState {
    /// `|0⟩_S|0⟩_B`.
    pub fn standard(d_s: usize, d_b: usize) -> Self {
        let basis = |n: usize| DVector::from_fn(n, |i, _| Complex64::new(if i == 0 { 1.0 } else { 0.0 }, 0.0));
        Self {
            system: basis(d_s),
            bath: basis(d_b),
        }
    }

    /// Normalised product state.
    pub fn new(system: DVector<Complex64>, bath: DVector<Complex64>) -> Result<Self> {
        let (ns, nb) = (system.norm(), bath.norm());
        if ns == 0.0 || nb == 0.0 {
            return Err(Error::InvalidArgument("zero state vector".into()));
        }
        Ok(Self {
            system: system / Complex64::new(ns, 0.0),
            bath: bath / Complex64::new(nb, 0.0),
        })
    }

    pub fn vector(&self) -> DVector<Complex64> {
        self.system.kronecker(&self.bath)
    }
}

/// One sample of the subsystem distance: squared Hilbert-Schmidt norm and
/// trace norm of `ρ_S(t) − ω_S`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistanceSample {
    pub hs_sq: f64,
    pub trace_norm: f64,
}

/// Reshape a state on `S ⊗ B` into the `d_S × d_B` coefficient matrix, so
/// that `tr_B |ψ⟩⟨ψ| = Ψ Ψ†`.
fn coefficient_matrix(psi: &DVector<Complex64>, d_s: usize, d_b: usize) -> CMatrix {
    CMatrix::from_fn(d_s, d_b, |s, b| psi[s * d_b + b])
}

/// Distances at each time for one Hamiltonian realisation `U`, starting
/// from `initial`. Works on state vectors: `ρ_S(t) = Ψ(t)Ψ(t)†` and
/// `ω_S = Σ_i Φ_iΦ_i†` with `Φ_i` the coefficient matrix of `P_i|ψ⟩`.
pub fn evolve_and_measure_from(
    h: &RandomHamiltonian,
    initial: &ProductState,
    times: &[f64],
    with_trace_norm: bool,
) -> Result<Vec<DistanceSample>> {
    let s = h.spectrum();
    let (d_s, d_b) = (s.system_dim(), s.bath_dim());
    if initial.system.len() != d_s || initial.bath.len() != d_b {
        return Err(Error::DimensionMismatch("initial state does not match the system/bath split".into()));
    }
    let psi0 = initial.vector();
    let u = h.eigenbasis();
    let phi = u.adjoint() * &psi0;
    let levels = s.level_of_state();
    let mut omega = CMatrix::zeros(d_s, d_s);
    for i in 0..s.len() {
        let masked = DVector::from_fn(phi.len(), |k, _| if levels[k] == i { phi[k] } else { Complex64::new(0.0, 0.0) });
        let c = coefficient_matrix(&(u * masked), d_s, d_b);
        omega += &c * c.adjoint();
    }
    let energies: Vec<f64> = levels.iter().map(|&j| s.levels()[j].energy).collect();
    times
        .iter()
        .map(|&t| {
            let rotated = DVector::from_fn(phi.len(), |k, _| phi[k] * Complex64::from_polar(1.0, -energies[k] * t));
            let c = coefficient_matrix(&(u * rotated), d_s, d_b);
            let diff = &c * c.adjoint() - &omega;
            Ok(DistanceSample {
                hs_sq: dense::hs_norm_sq(&diff),
                trace_norm: if with_trace_norm {
                    dense::trace_norm_hermitian(&diff)
                } else {
                    f64::NAN
                },
            })
        })
        .collect()
}

/// `‖tr_B ρ(t) − tr_B ω‖₂²` for `H = U H₀ U†` and the initial state `|0⟩|0⟩`.
pub fn evolve_and_measure(s: &Spectrum, u: &CMatrix, t: f64) -> Result<f64> {
    let h = RandomHamiltonian::new(s.clone(), u.clone())?;
    let init = ProductState::standard(s.system_dim(), s.bath_dim());
    Ok(evolve_and_measure_from(&h, &init, &[t], false)?[0].hs_sq)
}

/// Dense reference path for [`evolve_and_measure`]: full density matrices,
/// explicit dephasing and partial traces.
pub fn evolve_and_measure_dense(s: &Spectrum, u: &CMatrix, t: f64) -> Result<f64> {
    let h = RandomHamiltonian::new(s.clone(), u.clone())?;
    let rho0 = DensityMatrix::pure(&ProductState::standard(s.system_dim(), s.bath_dim()).vector())?;
    let prop = h.propagator(t);
    let rho_t = DensityMatrix::new(&prop * rho0.entries() * prop.adjoint())?;
    let omega = dephase(&rho0, &h.projectors())?;
    let (d_s, d_b) = (s.system_dim(), s.bath_dim());
    let diff = rho_t.partial_trace_bath(d_s, d_b)?.entries() - omega.partial_trace_bath(d_s, d_b)?.entries();
    Ok(dense::hs_norm_sq(&diff))
}

/// Monte-Carlo configuration for distance averages.
#[derive(Clone, Debug)]
pub struct McConfig {
    pub samples: usize,
    pub seed: u64,
    pub initial: Option<ProductState>,
    pub trace_norm: bool,
}

impl McConfig {
    pub fn new(samples: usize, seed: u64) -> Self {
        Self {
            samples,
            seed,
            initial: None,
            trace_norm: false,
        }
    }
}

/// Per-time estimates of the squared HS distance (and optionally the trace
/// distance), each Haar unitary being reused at every time point.
#[derive(Clone, Debug)]
pub struct McDistance {
    pub times: Vec<f64>,
    pub hs_sq: Vec<Estimate>,
    pub trace_norm: Option<Vec<Estimate>>,
}

pub fn mc_average_distance_grid(s: &Spectrum, times: &[f64], cfg: &McConfig) -> Result<McDistance> {
    if cfg.samples < 2 {
        return Err(Error::InvalidArgument("need at least 2 samples".into()));
    }
    let initial = cfg
        .initial
        .clone()
        .unwrap_or_else(|| ProductState::standard(s.system_dim(), s.bath_dim()));
    let per_sample: Vec<Vec<DistanceSample>> = (0..cfg.samples)
        .into_par_iter()
        .map(|k| {
            let h = RandomHamiltonian::sample(s.clone(), cfg.seed, k as u64);
            evolve_and_measure_from(&h, &initial, times, cfg.trace_norm)
        })
        .collect::<Result<_>>()?;
    let column = |ti: usize, f: &dyn Fn(&DistanceSample) -> f64| -> Estimate {
        let xs: Vec<f64> = per_sample.iter().map(|row| f(&row[ti])).collect();
        estimate(&xs)
    };
    let hs_sq = (0..times.len()).map(|ti| column(ti, &|x| x.hs_sq)).collect();
    let trace_norm = cfg
        .trace_norm
        .then(|| (0..times.len()).map(|ti| column(ti, &|x| x.trace_norm)).collect());
    Ok(McDistance {
        times: times.to_vec(),
        hs_sq,
        trace_norm,
    })
}

pub fn mc_average_distance(s: &Spectrum, t: f64, samples: usize, seed: u64) -> Result<Estimate> {
    Ok(mc_average_distance_grid(s, &[t], &McConfig::new(samples, seed))?.hs_sq[0])
}

/// `N` i.i.d. `N(0, σ²)` energies, sorted ascending.
pub fn sample_gaussian_energies(n_levels: usize, sigma: f64, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    if n_levels == 0 {
        return Err(Error::InvalidArgument("need at least one level".into()));
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::InvalidArgument(format!("sigma: {e}")))?;
    if sigma <= 0.0 {
        return Err(Error::InvalidArgument("sigma must be positive".into()));
    }
    let mut e: Vec<f64> = (0..n_levels).map(|_| normal.sample(rng)).collect();
    e.sort_by(f64::total_cmp);
    Ok(e)
}

/// Non-degenerate Gaussian spectrum on `d_S × d_B` (draw `index` of `seed`).
pub fn sample_gaussian_spectrum(d_s: usize, d_b: usize, sigma: f64, seed: u64, index: u64) -> Result<Spectrum> {
    let e = sample_gaussian_energies(d_s * d_b, sigma, &mut sample_rng(seed, index))?;
    Spectrum::nondegenerate(d_s, d_b, &e)
}

/// Gaussian spectrum with prescribed degeneracies: energies are i.i.d. per
/// level and the (energy, degeneracy) pairs are sorted together, so that
/// each degeneracy keeps an unconditioned energy.
pub fn sample_degenerate_gaussian_spectrum(
    degeneracies: &[usize],
    d_s: usize,
    d_b: usize,
    sigma: f64,
    seed: u64,
    index: u64,
) -> Result<Spectrum> {
    if sigma <= 0.0 {
        return Err(Error::InvalidArgument("sigma must be positive".into()));
    }
    let mut rng = sample_rng(seed, index);
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::InvalidArgument(format!("sigma: {e}")))?;
    let mut levels: Vec<Level> = degeneracies
        .iter()
        .map(|&g| Level::new(normal.sample(&mut rng), g))
        .collect();
    levels.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    Spectrum::new(d_s, d_b, levels)
}

/// Monte-Carlo average over Gaussian spectra of `f(spectrum, t)` at each `t`.
#[allow(clippy::too_many_arguments)]
pub fn mc_gaussian_average<F>(
    degeneracies: &[usize],
    d_s: usize,
    d_b: usize,
    sigma: f64,
    times: &[f64],
    samples: usize,
    seed: u64,
    f: F,
) -> Result<Vec<Estimate>>
where
    F: Fn(&Spectrum, f64) -> f64 + Sync,
{
    if samples < 2 {
        return Err(Error::InvalidArgument("need at least 2 samples".into()));
    }
    let rows: Vec<Vec<f64>> = (0..samples)
        .into_par_iter()
        .map(|k| {
            let s = sample_degenerate_gaussian_spectrum(degeneracies, d_s, d_b, sigma, seed, k as u64)?;
            Ok(times.iter().map(|&t| f(&s, t)).collect())
        })
        .collect::<Result<_>>()?;
    Ok((0..times.len())
        .map(|ti| estimate(&rows.iter().map(|r| r[ti]).collect::<Vec<_>>()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::c;

    #[test]
    fn haar_unitary_is_unitary_and_deterministic() {
        for dim in [1, 2, 5, 16] {
            let u = haar_unitary(dim, 42);
            let dev = dense::max_abs(&(u.adjoint() * &u - CMatrix::identity(dim, dim)));
            assert!(dev < 1e-12, "dim {dim}: {dev}");
            assert_eq!(u, haar_unitary(dim, 42));
        }
        assert_ne!(haar_unitary(3, 1), haar_unitary(3, 2));
        let u1 = haar_unitary(1, 9)[(0, 0)];
        assert!((u1.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn haar_second_moment() {
        let dim = 4;
        let xs: Vec<f64> = (0..10_000)
            .map(|k| haar_unitary_with(dim, &mut sample_rng(3, k))[(0, 0)].norm_sqr())
            .collect();
        let e = estimate(&xs);
        assert!(e.within(1.0 / dim as f64, 4.0), "{e:?}");
    }

    #[test]
    fn partial_trace_and_dephasing() {
        let s = Spectrum::new(2, 2, vec![Level::new(0.0, 1), Level::new(1.0, 2), Level::new(2.5, 1)]).unwrap();
        let h = RandomHamiltonian::sample(s, 5, 0);
        let ps = h.projectors();
        let sum: CMatrix = ps.iter().sum();
        assert!(dense::max_abs(&(sum - CMatrix::identity(4, 4))) < 1e-12);
        for (i, p) in ps.iter().enumerate() {
            for (j, q) in ps.iter().enumerate() {
                let target = if i == j { p.clone() } else { CMatrix::zeros(4, 4) };
                assert!(dense::max_abs(&(p * q - target)) < 1e-10);
            }
        }
        let st = ProductState::new(
            DVector::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8)]),
            DVector::from_vec(vec![c(1.0, 1.0), c(0.5, 0.0)]),
        )
        .unwrap();
        let rho = DensityMatrix::pure(&st.vector()).unwrap();
        let w = dephase(&rho, &ps).unwrap();
        assert!((w.trace() - c(1.0, 0.0)).norm() < 1e-12);
        let ww = dephase(&w, &ps).unwrap();
        assert!(dense::max_abs(&(ww.entries() - w.entries())) < 1e-12);
        let rs = rho.partial_trace_bath(2, 2).unwrap();
        let sys = &st.system * st.system.adjoint();
        assert!(dense::max_abs(&(rs.entries() - sys)) < 1e-15);
        assert!((rs.trace() - rho.trace()).norm() < 1e-15);
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(CMatrix::identity(2, 2)).is_err());
        assert!(DensityMatrix::new(CMatrix::identity(2, 2) * c(0.5, 0.0)).is_ok());
        let bad = CMatrix::from_row_slice(2, 2, &[c(1.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.5, 0.0)]);
        assert!(DensityMatrix::new(bad).is_err());
        let nonherm = CMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.1, 0.0), c(0.0, 0.0), c(0.5, 0.0)]);
        assert!(DensityMatrix::new(nonherm).is_err());
    }

    #[test]
    fn vector_and_dense_paths_agree() {
        let s = Spectrum::nondegenerate(2, 3, &[-1.0, -0.3, 0.2, 0.9, 1.4, 2.0]).unwrap();
        let u = haar_unitary(6, 17);
        for t in [0.0, 0.4, 2.3] {
            let a = evolve_and_measure(&s, &u, t).unwrap();
            let b = evolve_and_measure_dense(&s, &u, t).unwrap();
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn hand_computed_two_qubit_case() {
        // U = 1, H₀ = diag(0, ω, ω', ω'') on S⊗B; |00⟩ is an eigenstate, so ρ_S(t) = ω_S.
        let s = Spectrum::nondegenerate(2, 2, &[0.0, 1.0, 2.0, 3.0]).unwrap();
        let u = CMatrix::identity(4, 4);
        for t in [0.0, 1.3] {
            assert!(evolve_and_measure(&s, &u, t).unwrap().abs() < 1e-15);
        }
        // Hadamard on the system: |ψ⟩ = (|00⟩ + |10⟩)/√2 in the eigenbasis
        // with energies 0 and 2, so ρ_S(t) − ω_S has off-diagonals e^{∓2it}/2.
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let hd = CMatrix::from_row_slice(2, 2, &[c(r, 0.0), c(r, 0.0), c(r, 0.0), c(-r, 0.0)]);
        let u = dense::kron(&hd, &CMatrix::identity(2, 2));
        // In the eigenbasis ρ(t) has coherence between |00⟩ and |10⟩; after
        // rotating back, ρ_S(t) = ½[[1+cos 2t, i sin 2t],[−i sin 2t, 1−cos 2t]]
        // and ω_S = ½·1, so the squared HS distance is ½.
        let d = evolve_and_measure(&s, &u, 0.7).unwrap();
        assert!((d - 0.5).abs() < 1e-14, "{d}");
    }

    #[test]
    fn single_level_has_zero_distance() {
        let s = Spectrum::single_level(2, 2, 0.3).unwrap();
        let e = mc_average_distance(&s, 1.0, 20, 3).unwrap();
        assert!(e.mean.abs() < 1e-28 && e.stderr.abs() < 1e-14, "{e:?}");
    }

    #[test]
    fn energy_shift_invariance_per_realisation() {
        let s = Spectrum::nondegenerate(2, 2, &[-0.5, 0.1, 0.4, 1.2]).unwrap();
        let u = haar_unitary(4, 8);
        let a = evolve_and_measure(&s, &u, 1.9).unwrap();
        let b = evolve_and_measure(&s.shifted(7.25), &u, 1.9).unwrap();
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn gaussian_energies() {
        let mut rng = sample_rng(1, 0);
        let e = sample_gaussian_energies(1000, 2.0, &mut rng).unwrap();
        assert!(e.windows(2).all(|w| w[0] <= w[1]));
        let m = estimate(&e);
        assert!(m.mean.abs() < 4.0 * 2.0 / (1000f64).sqrt());
        assert!(sample_gaussian_energies(3, 0.0, &mut rng).is_err());
        assert!(sample_gaussian_energies(0, 1.0, &mut rng).is_err());
    }
}
