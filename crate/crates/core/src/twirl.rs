//! Fourth-moment (generally n-th moment) twirls through overlap vectors.
//!
//! For operators `A`, `B` on `(ℂ^d)^{⊗n}` the Haar twirl
//! `τ(B) = ∫ U^{⊗n} B U^{†⊗n} dU` is the orthogonal projection of `B` onto
//! the span of the permutation operators, so
//!
//! `tr[A† τ(B)] = Σ_{π,σ} conj(a_π) (M⁺)_{πσ} b_σ`,  `a_π = tr(A V_{π⁻¹})`,
//!
//! with `M` the Gram matrix of [`crate::gram`]. For product operators the
//! overlaps factor over the cycles of `π`:
//! `tr(V_π A₀⊗…⊗A_{n−1}) = Π_cycles tr(A_m A_{π⁻¹(m)} A_{π⁻²(m)} ⋯)`.
//!
//! Factors that are functions of `H₀` (its evolution operator, its
//! eigenprojectors) are evaluated on the spectrum without ever building a
//! `d×d` matrix, let alone a `d^n`-dimensional one. Dense evaluation exists
//! as an oracle for small `d`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::dense::{self, check_dense_dim, CMatrix};
use crate::error::{Error, Result};
use crate::gram::{self, GroupContext};
use crate::montecarlo::{haar_unitary_with, sample_rng};
use crate::permgroup::{CanonicalGroupOrder, Permutation};
use crate::spectrum::Spectrum;
use crate::stats::pairwise_sum;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// One tensor factor of a product operator.
#[derive(Clone, Debug, PartialEq)]
pub enum FactorOperator {
    Dense(CMatrix),
    Identity,
    /// `W₀ = e^{iH₀t}`.
    Evolution,
    /// `W₀† = e^{−iH₀t}`.
    EvolutionAdjoint,
    /// Eigenprojector `P_i⁰` of `H₀` onto level `i`.
    Projector(usize),
    /// `S ⊗ B` on the system/bath split of the spectrum's space.
    Bipartite { system: CMatrix, bath: CMatrix },
}

impl FactorOperator {
    fn is_spectral(&self) -> bool {
        matches!(
            self,
            Self::Identity | Self::Evolution | Self::EvolutionAdjoint | Self::Projector(_)
        )
    }

    fn is_bipartite(&self) -> bool {
        matches!(self, Self::Identity | Self::Bipartite { .. })
    }
}

/// What the factors act on: the dimension `d`, and for analytic factors the
/// spectrum of `H₀` and the time `t`.
#[derive(Clone, Debug)]
pub struct TraceContext<'a> {
    dim: usize,
    spectrum: Option<&'a Spectrum>,
    t: f64,
    phases: Vec<Complex64>,
}

impl<'a> TraceContext<'a> {
    pub fn dense(dim: usize) -> Self {
        Self {
            dim,
            spectrum: None,
            t: 0.0,
            phases: Vec::new(),
        }
    }

    pub fn spectral(spectrum: &'a Spectrum, t: f64) -> Self {
        Self {
            dim: spectrum.dim(),
            spectrum: Some(spectrum),
            t,
            phases: spectrum
                .levels()
                .iter()
                .map(|l| Complex64::from_polar(1.0, l.energy * t))
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    fn spectrum(&self) -> Result<&'a Spectrum> {
        self.spectrum.ok_or_else(|| {
            Error::InvalidArgument("analytic factor used without a spectrum".into())
        })
    }

    /// Eigenvalue of a spectral factor on level `j`.
    fn level_value(&self, f: &FactorOperator, j: usize) -> Complex64 {
        match f {
            FactorOperator::Identity => ONE,
            FactorOperator::Evolution => self.phases[j],
            FactorOperator::EvolutionAdjoint => self.phases[j].conj(),
            FactorOperator::Projector(i) => {
                if *i == j {
                    ONE
                } else {
                    ZERO
                }
            }
            _ => unreachable!("not a spectral factor"),
        }
    }

    fn check_factor(&self, f: &FactorOperator) -> Result<()> {
        let dim = match f {
            FactorOperator::Dense(m) => {
                if m.nrows() != m.ncols() {
                    return Err(Error::DimensionMismatch("non-square factor".into()));
                }
                m.nrows()
            }
            FactorOperator::Bipartite { system, bath } => {
                if system.nrows() != system.ncols() || bath.nrows() != bath.ncols() {
                    return Err(Error::DimensionMismatch("non-square factor".into()));
                }
                if let Some(s) = self.spectrum {
                    if system.nrows() != s.system_dim() || bath.nrows() != s.bath_dim() {
                        return Err(Error::DimensionMismatch(format!(
                            "bipartite factor is {}x{}, spectrum split is {}x{}",
                            system.nrows(),
                            bath.nrows(),
                            s.system_dim(),
                            s.bath_dim()
                        )));
                    }
                }
                system.nrows() * bath.nrows()
            }
            FactorOperator::Projector(i) => {
                let s = self.spectrum()?;
                if *i >= s.len() {
                    return Err(Error::InvalidArgument(format!(
                        "projector onto level {i}, spectrum has {} levels",
                        s.len()
                    )));
                }
                self.dim
            }
            FactorOperator::Evolution | FactorOperator::EvolutionAdjoint => {
                self.spectrum()?;
                self.dim
            }
            FactorOperator::Identity => self.dim,
        };
        if dim != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "factor of dimension {dim} in a context of dimension {}",
                self.dim
            )));
        }
        Ok(())
    }

    /// Dense `d×d` matrix of a factor. Spectral factors are diagonal in the
    /// basis where `H₀` is diagonal with levels in increasing order.
    pub fn dense_factor(&self, f: &FactorOperator) -> Result<CMatrix> {
        self.check_factor(f)?;
        Ok(match f {
            FactorOperator::Dense(m) => m.clone(),
            FactorOperator::Identity => CMatrix::identity(self.dim, self.dim),
            FactorOperator::Bipartite { system, bath } => dense::kron(system, bath),
            spectral => {
                let levels = self.spectrum()?.level_of_state();
                CMatrix::from_diagonal(&DVector::from_iterator(
                    self.dim,
                    levels.iter().map(|&j| self.level_value(spectral, j)),
                ))
            }
        })
    }

    /// `tr(f₀ f₁ ⋯ f_{m−1})`.
    pub fn cycle_trace(&self, factors: &[&FactorOperator]) -> Result<Complex64> {
        for f in factors {
            self.check_factor(f)?;
        }
        if factors.iter().all(|f| matches!(f, FactorOperator::Identity)) {
            return Ok(Complex64::new(self.dim as f64, 0.0));
        }
        if factors.iter().all(|f| f.is_spectral()) {
            let s = self.spectrum()?;
            let mut total = ZERO;
            for (j, level) in s.levels().iter().enumerate() {
                let mut v = Complex64::new(level.degeneracy as f64, 0.0);
                for f in factors {
                    v *= self.level_value(f, j);
                }
                total += v;
            }
            return Ok(total);
        }
        if factors.iter().all(|f| f.is_bipartite()) {
            let (ds, db) = factors
                .iter()
                .find_map(|f| match f {
                    FactorOperator::Bipartite { system, bath } => Some((system.nrows(), bath.nrows())),
                    _ => None,
                })
                .expect("at least one bipartite factor");
            let mut s = CMatrix::identity(ds, ds);
            let mut b = CMatrix::identity(db, db);
            for f in factors {
                if let FactorOperator::Bipartite { system, bath } = f {
                    s *= system;
                    b *= bath;
                }
            }
            return Ok(s.trace() * b.trace());
        }
        let mut acc = CMatrix::identity(self.dim, self.dim);
        for f in factors {
            acc *= self.dense_factor(f)?;
        }
        Ok(acc.trace())
    }
}

/// `tr(V_π · A₀⊗A₁⊗⋯⊗A_{n−1})` by cycle decomposition.
pub fn trace_perm_product(
    pi: &Permutation,
    factors: &[FactorOperator],
    ctx: &TraceContext<'_>,
) -> Result<Complex64> {
    let n = pi.degree();
    if factors.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} factors for a permutation of degree {n}",
            factors.len()
        )));
    }
    let inv = pi.inverse();
    let mut seen = vec![false; n];
    let mut total = ONE;
    let mut cycle: Vec<&FactorOperator> = Vec::with_capacity(n);
    for start in 0..n {
        if seen[start] {
            continue;
        }
        cycle.clear();
        let mut m = start;
        while !seen[m] {
            seen[m] = true;
            cycle.push(&factors[m]);
            m = inv.apply(m);
        }
        total *= ctx.cycle_trace(&cycle)?;
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProductOperator {
    pub coefficient: Complex64,
    pub factors: Vec<FactorOperator>,
}

/// A linear combination of product operators.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct OperatorSum {
    pub terms: Vec<ProductOperator>,
}

impl OperatorSum {
    pub fn product(factors: Vec<FactorOperator>) -> Self {
        Self {
            terms: vec![ProductOperator {
                coefficient: ONE,
                factors,
            }],
        }
    }

    pub fn push(&mut self, coefficient: Complex64, factors: Vec<FactorOperator>) {
        self.terms.push(ProductOperator {
            coefficient,
            factors,
        });
    }

    /// `self += c · other`.
    pub fn add_scaled(&mut self, c: Complex64, other: &OperatorSum) {
        for t in &other.terms {
            self.push(c * t.coefficient, t.factors.clone());
        }
    }

    pub fn degree(&self) -> Option<usize> {
        self.terms.first().map(|t| t.factors.len())
    }

    /// Dense `d^n × d^n` matrix (oracle use only).
    pub fn to_dense(&self, ctx: &TraceContext<'_>) -> Result<CMatrix> {
        let n = self
            .degree()
            .ok_or_else(|| Error::InvalidArgument("empty operator sum".into()))?;
        let dim = ctx.dim().pow(n as u32);
        check_dense_dim(dim)?;
        let mut out = CMatrix::zeros(dim, dim);
        for t in &self.terms {
            let factors: Vec<CMatrix> = t
                .factors
                .iter()
                .map(|f| ctx.dense_factor(f))
                .collect::<Result<_>>()?;
            out += dense::kron_all(&factors) * t.coefficient;
        }
        Ok(out)
    }
}

/// `component[π] = tr(A V_{π⁻¹})`, indexed by the canonical order of S_n.
#[derive(Clone, Debug, PartialEq)]
pub struct OverlapVector {
    pub components: Vec<Complex64>,
}

impl OverlapVector {
    pub fn degree_order(&self) -> usize {
        self.components.len()
    }

    /// The vector `w[π] = v[π∘κ]`, i.e. the overlaps of `A·V_κ`.
    pub fn right_shift(&self, group: &CanonicalGroupOrder, kappa: &Permutation) -> Self {
        Self {
            components: group
                .elements()
                .iter()
                .map(|p| self.components[group.index_of(&p.compose(kappa))])
                .collect(),
        }
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            components: self.components.iter().map(|z| z * c).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

pub fn overlap_vector(
    op: &OperatorSum,
    group: &CanonicalGroupOrder,
    ctx: &TraceContext<'_>,
) -> Result<OverlapVector> {
    let n = group.degree();
    let mut components = vec![ZERO; group.len()];
    for term in &op.terms {
        if term.factors.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "product of {} factors against S_{n}",
                term.factors.len()
            )));
        }
        for (idx, p) in group.elements().iter().enumerate() {
            let inv = group.get(group.inverse_index(idx));
            debug_assert_eq!(inv, &p.inverse());
            components[idx] += term.coefficient * trace_perm_product(inv, &term.factors, ctx)?;
        }
    }
    Ok(OverlapVector { components })
}

/// `Σ_{π,σ} conj(a_π) G_{πσ} b_σ` with `G` the Gram (pseudo)inverse;
/// equals `tr[A† τ(B)]`.
pub fn twirl_trace(a: &OverlapVector, b: &OverlapVector, gram_inv: &DMatrix<f64>) -> Result<Complex64> {
    let m = gram_inv.nrows();
    if gram_inv.ncols() != m || a.components.len() != m || b.components.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "overlap lengths {} and {} against a {}x{} Gram inverse",
            a.components.len(),
            b.components.len(),
            m,
            gram_inv.ncols()
        )));
    }
    let mut terms = Vec::with_capacity(m);
    for (i, ai) in a.components.iter().enumerate() {
        let mut row_re = Vec::with_capacity(m);
        let mut row_im = Vec::with_capacity(m);
        for (j, bj) in b.components.iter().enumerate() {
            let z = bj * gram_inv[(i, j)];
            row_re.push(z.re);
            row_im.push(z.im);
        }
        terms.push(ai.conj() * Complex64::new(pairwise_sum(&row_re), pairwise_sum(&row_im)));
    }
    let re: Vec<f64> = terms.iter().map(|z| z.re).collect();
    let im: Vec<f64> = terms.iter().map(|z| z.im).collect();
    Ok(Complex64::new(pairwise_sum(&re), pairwise_sum(&im)))
}

/// Floating-point Gram pseudoinverse `M⁺` of degree `n` at local dimension
/// `d`, with the group data needed to compute overlaps against it.
#[derive(Clone, Debug)]
pub struct TwirlKernel {
    ctx: GroupContext,
    d: u64,
    inverse: DMatrix<f64>,
}

impl TwirlKernel {
    pub fn new(n: usize, d: u64) -> Result<Self> {
        let g = gram::build_gram(n, d)?;
        let inverse = g.pseudoinverse().to_f64();
        Ok(Self {
            ctx: g.context().clone(),
            d,
            inverse,
        })
    }

    pub fn local_dimension(&self) -> u64 {
        self.d
    }

    pub fn group(&self) -> &CanonicalGroupOrder {
        self.ctx.group()
    }

    pub fn context(&self) -> &GroupContext {
        &self.ctx
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.inverse
    }

    pub fn overlap(&self, op: &OperatorSum, ctx: &TraceContext<'_>) -> Result<OverlapVector> {
        if ctx.dim() as u64 != self.d {
            return Err(Error::DimensionMismatch(format!(
                "context dimension {} against kernel dimension {}",
                ctx.dim(),
                self.d
            )));
        }
        overlap_vector(op, self.group(), ctx)
    }

    /// `tr[A† τ(B)]`.
    pub fn twirl_trace(&self, a: &OverlapVector, b: &OverlapVector) -> Result<Complex64> {
        twirl_trace(a, b, &self.inverse)
    }
}

/// Overlaps of a dense operator on `(ℂ^d)^{⊗n}` by explicit traces against
/// the dense permutation operators.
pub fn dense_overlap_vector(op: &CMatrix, group: &CanonicalGroupOrder, d: usize) -> Result<OverlapVector> {
    let dim = d.pow(group.degree() as u32);
    check_dense_dim(dim)?;
    if op.nrows() != dim || op.ncols() != dim {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{}, expected {dim}",
            op.nrows(),
            op.ncols()
        )));
    }
    let components = group
        .elements()
        .iter()
        .map(|p| (op * dense::permutation_operator(&p.inverse(), d)).trace())
        .collect();
    Ok(OverlapVector { components })
}

/// `τ(B)` computed as the numerical orthogonal projection of `B` onto
/// `span{V_π}`.
pub fn projector_twirl(b: &CMatrix, n: usize, d: usize) -> Result<CMatrix> {
    let dim = d.pow(n as u32);
    check_dense_dim(dim)?;
    let group = crate::permgroup::enumerate_group(n)?;
    let vectors: Vec<DVector<Complex64>> = group
        .elements()
        .iter()
        .map(|p| dense::vectorize(&dense::permutation_operator(p, d)))
        .collect();
    let proj = gram::projector_from_vectors(&vectors)?;
    Ok(dense::unvectorize(&proj.apply(&dense::vectorize(b)), dim))
}

/// Monte-Carlo estimate of `τ(B)` with componentwise standard errors of the
/// real and imaginary parts.
#[derive(Clone, Debug)]
pub struct McTwirl {
    pub mean: CMatrix,
    pub stderr_re: DMatrix<f64>,
    pub stderr_im: DMatrix<f64>,
    pub samples: usize,
}

impl McTwirl {
    /// Largest componentwise deviation from `exact`, in standard errors
    /// (components with zero spread must agree to 1e-12).
    pub fn max_z_score(&self, exact: &CMatrix) -> f64 {
        let z = |diff: f64, se: f64| {
            if se > 0.0 {
                diff.abs() / se
            } else if diff.abs() <= 1e-12 {
                0.0
            } else {
                f64::INFINITY
            }
        };
        let mut worst: f64 = 0.0;
        for i in 0..exact.nrows() {
            for j in 0..exact.ncols() {
                let diff = self.mean[(i, j)] - exact[(i, j)];
                worst = worst
                    .max(z(diff.re, self.stderr_re[(i, j)]))
                    .max(z(diff.im, self.stderr_im[(i, j)]));
            }
        }
        worst
    }
}

const MC_CHUNK: usize = 64;

/// `(1/N) Σ_k U_k^{⊗n} B U_k^{†⊗n}` over Haar samples. Sample `k` uses its
/// own RNG stream derived from `(seed, k)`; partial sums are formed over
/// fixed index chunks, so the result does not depend on the thread count.
pub fn mc_twirl(b: &CMatrix, n: usize, d: usize, samples: usize, seed: u64) -> Result<McTwirl> {
    let dim = d.pow(n as u32);
    check_dense_dim(dim)?;
    if b.nrows() != dim || b.ncols() != dim {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{}, expected {dim}",
            b.nrows(),
            b.ncols()
        )));
    }
    if samples < 2 {
        return Err(Error::InvalidArgument("need at least 2 samples".into()));
    }
    let chunks: Vec<(usize, usize)> = (0..samples)
        .step_by(MC_CHUNK)
        .map(|s| (s, (s + MC_CHUNK).min(samples)))
        .collect();
    type Moments = (CMatrix, DMatrix<f64>, DMatrix<f64>);
    let partial: Vec<Moments> = chunks
        .par_iter()
        .map(|&(lo, hi)| {
            let mut sum = CMatrix::zeros(dim, dim);
            let mut sq_re = DMatrix::<f64>::zeros(dim, dim);
            let mut sq_im = DMatrix::<f64>::zeros(dim, dim);
            for k in lo..hi {
                let mut rng = sample_rng(seed, k as u64);
                let u = haar_unitary_with(d, &mut rng);
                let un = dense::kron_all(&vec![u; n]);
                let x = &un * b * un.adjoint();
                sq_re += x.map(|z| z.re * z.re);
                sq_im += x.map(|z| z.im * z.im);
                sum += x;
            }
            (sum, sq_re, sq_im)
        })
        .collect();
    let (sum, sq_re, sq_im) = pairwise_reduce(&partial, &|a: &Moments, b: &Moments| {
        (&a.0 + &b.0, &a.1 + &b.1, &a.2 + &b.2)
    });
    let nf = samples as f64;
    let mean = sum / Complex64::new(nf, 0.0);
    let se = |sq: &DMatrix<f64>, part: &dyn Fn(Complex64) -> f64| {
        DMatrix::from_fn(dim, dim, |i, j| {
            let m = part(mean[(i, j)]);
            let var = ((sq[(i, j)] - nf * m * m) / (nf - 1.0)).max(0.0);
            (var / nf).sqrt()
        })
    };
    let stderr_re = se(&sq_re, &|z| z.re);
    let stderr_im = se(&sq_im, &|z| z.im);
    Ok(McTwirl {
        mean,
        stderr_re,
        stderr_im,
        samples,
    })
}

fn pairwise_reduce<T: Clone>(xs: &[T], add: &dyn Fn(&T, &T) -> T) -> T {
    match xs.len() {
        0 => panic!("empty reduction"),
        1 => xs[0].clone(),
        len => {
            let (l, r) = xs.split_at(len / 2);
            add(&pairwise_reduce(l, add), &pairwise_reduce(r, add))
        }
    }
}

/// Mean and standard errors of a complex Monte-Carlo estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexEstimate {
    pub mean: Complex64,
    pub stderr_re: f64,
    pub stderr_im: f64,
}

impl ComplexEstimate {
    pub fn within(&self, value: Complex64, k: f64) -> bool {
        let ok = |diff: f64, se: f64| diff.abs() <= k * se || diff.abs() <= 1e-12;
        ok(self.mean.re - value.re, self.stderr_re) && ok(self.mean.im - value.im, self.stderr_im)
    }
}

/// Monte-Carlo estimate of `tr[A† τ(B)]` for product operators
/// `A = ⊗A_k`, `B = ⊗B_k`, using `tr[A† U^{⊗n}BU^{†⊗n}] = Π_k tr(A_k† U B_k U†)`,
/// so no `d^n`-dimensional object is formed.
pub fn mc_product_twirl(a: &[CMatrix], b: &[CMatrix], samples: usize, seed: u64) -> Result<ComplexEstimate> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::DimensionMismatch("factor lists differ in length".into()));
    }
    let d = a[0].nrows();
    if a.iter().chain(b).any(|m| m.nrows() != d || m.ncols() != d) {
        return Err(Error::DimensionMismatch("factors of differing dimension".into()));
    }
    if samples < 2 {
        return Err(Error::InvalidArgument("need at least 2 samples".into()));
    }
    let a_adj: Vec<CMatrix> = a.iter().map(|m| m.adjoint()).collect();
    let values: Vec<Complex64> = (0..samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = sample_rng(seed, k as u64);
            let u = haar_unitary_with(d, &mut rng);
            let ud = u.adjoint();
            a_adj
                .iter()
                .zip(b)
                .map(|(ak, bk)| (ak * &u * bk * &ud).trace())
                .product()
        })
        .collect();
    let re: Vec<f64> = values.iter().map(|z| z.re).collect();
    let im: Vec<f64> = values.iter().map(|z| z.im).collect();
    let er = crate::stats::estimate(&re);
    let ei = crate::stats::estimate(&im);
    Ok(ComplexEstimate {
        mean: Complex64::new(er.mean, ei.mean),
        stderr_re: er.stderr,
        stderr_im: ei.stderr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::c;
    use crate::permgroup::enumerate_group;
    use crate::spectrum::Level;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(d: usize, rng: &mut ChaCha8Rng) -> CMatrix {
        CMatrix::from_fn(d, d, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn identity_and_full_cycle() {
        let ctx = TraceContext::dense(3);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let fs: Vec<FactorOperator> = (0..4).map(|_| FactorOperator::Dense(random_matrix(3, &mut rng))).collect();
        let expected: Complex64 = fs
            .iter()
            .map(|f| match f {
                FactorOperator::Dense(m) => m.trace(),
                _ => unreachable!(),
            })
            .product();
        let got = trace_perm_product(&Permutation::identity(4), &fs, &ctx).unwrap();
        assert!(close(got, expected, 1e-14));
        let cyc = Permutation::new(vec![1, 2, 3, 0]).unwrap();
        let ones = vec![FactorOperator::Identity; 4];
        assert_eq!(trace_perm_product(&cyc, &ones, &ctx).unwrap(), c(3.0, 0.0));
    }

    #[test]
    fn cycle_rule_matches_brute_force() {
        let d = 3;
        let group = enumerate_group(4).unwrap();
        let ctx = TraceContext::dense(d);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mats: Vec<CMatrix> = (0..4).map(|_| random_matrix(d, &mut rng)).collect();
        let fs: Vec<FactorOperator> = mats.iter().cloned().map(FactorOperator::Dense).collect();
        let big = dense::kron_all(&mats);
        for p in group.elements() {
            let oracle = (dense::permutation_operator(p, d) * &big).trace();
            let got = trace_perm_product(p, &fs, &ctx).unwrap();
            assert!(close(got, oracle, 1e-12), "{p}: {got} vs {oracle}");
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let ctx = TraceContext::dense(3);
        let fs = vec![
            FactorOperator::Dense(CMatrix::identity(2, 2)),
            FactorOperator::Identity,
        ];
        let p = Permutation::identity(2);
        assert!(matches!(trace_perm_product(&p, &fs, &ctx), Err(Error::DimensionMismatch(_))));
        assert!(trace_perm_product(&Permutation::identity(3), &fs, &ctx).is_err());
    }

    fn test_spectrum() -> Spectrum {
        Spectrum::new(
            2,
            3,
            vec![Level::new(-0.4, 2), Level::new(0.3, 1), Level::new(1.1, 3)],
        )
        .unwrap()
    }

    #[test]
    fn analytic_factors_match_dense_forms() {
        let s = test_spectrum();
        let ctx = TraceContext::spectral(&s, 0.83);
        let group = enumerate_group(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sys = random_matrix(2, &mut rng);
        let bath = random_matrix(3, &mut rng);
        let choices = [
            vec![FactorOperator::Evolution, FactorOperator::Projector(2), FactorOperator::EvolutionAdjoint],
            vec![FactorOperator::Projector(0), FactorOperator::Projector(0), FactorOperator::Identity],
            vec![
                FactorOperator::Bipartite { system: sys.clone(), bath: bath.clone() },
                FactorOperator::Identity,
                FactorOperator::Bipartite { system: sys.adjoint(), bath: bath.clone() },
            ],
            vec![
                FactorOperator::Evolution,
                FactorOperator::Bipartite { system: sys, bath },
                FactorOperator::Dense(random_matrix(6, &mut rng)),
            ],
        ];
        for fs in &choices {
            let dense_fs: Vec<FactorOperator> =
                fs.iter().map(|f| FactorOperator::Dense(ctx.dense_factor(f).unwrap())).collect();
            for p in group.elements() {
                let a = trace_perm_product(p, fs, &ctx).unwrap();
                let b = trace_perm_product(p, &dense_fs, &ctx).unwrap();
                assert!(close(a, b, 1e-12), "{p}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn overlap_of_identity_is_gram_row() {
        let d = 3u64;
        let group = enumerate_group(4).unwrap();
        let ctx = TraceContext::dense(d as usize);
        let v = overlap_vector(&OperatorSum::product(vec![FactorOperator::Identity; 4]), &group, &ctx).unwrap();
        for (p, z) in group.elements().iter().zip(&v.components) {
            assert_eq!(z.re, (d as f64).powi(crate::permgroup::cycle_count(p) as i32));
            assert_eq!(z.im, 0.0);
        }
    }

    #[test]
    fn gram_consistency_of_permutation_overlaps() {
        let d = 2;
        let group = enumerate_group(4).unwrap();
        let g = gram::build_gram(4, d as u64).unwrap().entries().to_f64();
        for (s, sigma) in group.elements().iter().enumerate() {
            let v = dense_overlap_vector(&dense::permutation_operator(sigma, d), &group, d).unwrap();
            for pi in 0..group.len() {
                assert_eq!(v.components[pi], c(g[(pi, s)], 0.0));
            }
        }
    }

    #[test]
    fn cycle_overlaps_match_dense_overlaps() {
        let s = test_spectrum();
        let ctx = TraceContext::spectral(&s, -1.7);
        let group = enumerate_group(3).unwrap();
        let mut op = OperatorSum::product(vec![
            FactorOperator::Evolution,
            FactorOperator::EvolutionAdjoint,
            FactorOperator::Evolution,
        ]);
        for i in 0..s.len() {
            op.push(c(-0.5, 0.25), vec![FactorOperator::Projector(i), FactorOperator::Evolution, FactorOperator::Projector(i)]);
        }
        let fast = overlap_vector(&op, &group, &ctx).unwrap();
        let slow = dense_overlap_vector(&op.to_dense(&ctx).unwrap(), &group, 6).unwrap();
        for (a, b) in fast.components.iter().zip(&slow.components) {
            assert!(close(*a, *b, 1e-12));
        }
    }

    #[test]
    fn twirl_fixes_permutations_and_identity() {
        let d = 3;
        let kernel = TwirlKernel::new(4, d as u64).unwrap();
        let group = kernel.group().clone();
        let ctx = TraceContext::dense(d);
        let ones = kernel
            .overlap(&OperatorSum::product(vec![FactorOperator::Identity; 4]), &ctx)
            .unwrap();
        let tr = kernel.twirl_trace(&ones, &ones).unwrap();
        assert!(close(tr, c(81.0, 0.0), 1e-12));
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mats: Vec<CMatrix> = (0..4).map(|_| random_matrix(d, &mut rng)).collect();
        let a_dense = dense::kron_all(&mats);
        let a = kernel
            .overlap(&OperatorSum::product(mats.into_iter().map(FactorOperator::Dense).collect()), &ctx)
            .unwrap();
        for sigma in [5usize, 17, 23] {
            let v = dense::permutation_operator(group.get(sigma), d);
            let b = dense_overlap_vector(&v, &group, d).unwrap();
            let got = kernel.twirl_trace(&a, &b).unwrap();
            let want = (a_dense.adjoint() * &v).trace();
            assert!(close(got, want, 1e-10), "{got} vs {want}");
        }
    }

    #[test]
    fn singular_gram_twirl_uses_pseudoinverse() {
        // d = 2 < n: the permutation operators are linearly dependent.
        let d = 2;
        let kernel = TwirlKernel::new(4, d as u64).unwrap();
        let ctx = TraceContext::dense(d);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let am: Vec<CMatrix> = (0..4).map(|_| random_matrix(d, &mut rng)).collect();
        let bm: Vec<CMatrix> = (0..4).map(|_| random_matrix(d, &mut rng)).collect();
        let a = kernel.overlap(&OperatorSum::product(am.iter().cloned().map(FactorOperator::Dense).collect()), &ctx).unwrap();
        let b = kernel.overlap(&OperatorSum::product(bm.iter().cloned().map(FactorOperator::Dense).collect()), &ctx).unwrap();
        let tau_b = projector_twirl(&dense::kron_all(&bm), 4, d).unwrap();
        let want = (dense::kron_all(&am).adjoint() * tau_b).trace();
        let got = kernel.twirl_trace(&a, &b).unwrap();
        assert!(close(got, want, 1e-10), "{got} vs {want}");
    }

    #[test]
    fn mc_twirl_identity_and_agreement() {
        let d = 2;
        let n = 4;
        let one = CMatrix::identity(16, 16);
        let mc = mc_twirl(&one, n, d, 50, 1).unwrap();
        assert!((&mc.mean - &one).norm() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let b = random_matrix(16, &mut rng);
        let exact = projector_twirl(&b, n, d).unwrap();
        let mc = mc_twirl(&b, n, d, 5000, 99).unwrap();
        assert!(mc.max_z_score(&exact) < 4.0, "max z = {}", mc.max_z_score(&exact));
    }

    #[test]
    fn mc_twirl_rejects_oversized_operators() {
        let b = CMatrix::identity(625, 625);
        assert!(matches!(mc_twirl(&b, 4, 5, 10, 0), Err(Error::DimensionTooLarge { .. })));
    }
}
