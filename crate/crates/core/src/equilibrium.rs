//! Haar-averaged distance of a subsystem from its dephased (equilibrium)
//! state, and its time and Gaussian-ensemble averages.
//!
//! Setting: `H = U H₀ U†` on `S ⊗ B`, `ρ(t) = e^{−iHt} σ e^{iHt}` with
//! `σ = |0⟩⟨0|`, `ω = Σ_i P_i σ P_i`. With `W = e^{iHt}`,
//!
//! `‖ρ_S(t) − ω_S‖₂² = tr[Y U^{⊗4} X₀ U^{†⊗4}]`,
//!
//! `Y = V_{12:34}(σ ⊗ σ ⊗ F_{S₃S₄})`,
//! `X₀ = W₀⊗W₀⊗W₀†⊗W₀† − Σ_i W₀⊗P_i⊗W₀†⊗P_i − Σ_i P_i⊗W₀⊗P_i⊗W₀† + Σ_ij P_i⊗P_j⊗P_i⊗P_j`,
//!
//! so the Haar average is the twirl trace `tr[Y τ₄(X₀)]`, evaluated exactly
//! (for finite `d`) through overlap vectors and the S₄ Gram pseudoinverse.

use num_complex::Complex64;
use serde::Serialize;

use crate::dense::CMatrix;
use crate::error::{Error, Result};
use crate::montecarlo::ProductState;
use crate::permgroup::{CanonicalGroupOrder, Permutation};
use crate::spectrum::Spectrum;
use crate::twirl::{FactorOperator, OperatorSum, OverlapVector, TraceContext, TwirlKernel};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// The time-dependent and constant spectral scalars of the closed forms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectralSummary {
    pub t: f64,
    pub d: u64,
    /// `ξ = tr W₀ = Σ_j d_j e^{iE_j t}`
    pub xi: Complex64,
    /// `η = tr W₀² = Σ_j d_j e^{2iE_j t}`
    pub eta: Complex64,
    /// `γ = Σ_j d_j²`
    pub gamma: u64,
    /// `p = Σ_j d_j² e^{iE_j t}`
    pub p: Complex64,
    /// `ι = Σ_j d_j³`
    pub iota: u64,
}

pub fn spectral_summary(s: &Spectrum, t: f64) -> SpectralSummary {
    let mut xi = Complex64::new(0.0, 0.0);
    let mut eta = xi;
    let mut p = xi;
    let (mut gamma, mut iota) = (0u64, 0u64);
    for l in s.levels() {
        let g = l.degeneracy as f64;
        let ph = Complex64::from_polar(1.0, l.energy * t);
        xi += g * ph;
        eta += g * ph * ph;
        p += g * g * ph;
        let dj = l.degeneracy as u64;
        gamma += dj * dj;
        iota += dj * dj * dj;
    }
    SpectralSummary {
        t,
        d: s.dim() as u64,
        xi,
        eta,
        gamma,
        p,
        iota,
    }
}

/// The pair swap `V_{12:34}` as a permutation of four tensor factors.
pub fn pair_swap() -> Permutation {
    Permutation::from_cycles(4, &[&[0, 2], &[1, 3]]).expect("valid permutation")
}

fn projector_onto(v: &nalgebra::DVector<Complex64>) -> CMatrix {
    v * v.adjoint()
}

/// The four product-operator groups of `X₀`, in the order
/// `[W W W† W†, Σ W P W† P, Σ P W P W†, Σ P P P P]`.
pub fn distance_operators(s: &Spectrum) -> [OperatorSum; 4] {
    use FactorOperator::{Evolution as W, EvolutionAdjoint as Wd, Projector as P};
    let n = s.len();
    let c1 = OperatorSum::product(vec![W, W, Wd, Wd]);
    let mut c2 = OperatorSum::default();
    let mut c3 = OperatorSum::default();
    let mut c4 = OperatorSum::default();
    for i in 0..n {
        c2.push(ONE, vec![W, P(i), Wd, P(i)]);
        c3.push(ONE, vec![P(i), W, P(i), Wd]);
        for j in 0..n {
            c4.push(ONE, vec![P(i), P(j), P(i), P(j)]);
        }
    }
    [c1, c2, c3, c4]
}

/// `X₀ = C₁ − C₂ − C₃ + C₄`.
pub fn x_operator(s: &Spectrum) -> OperatorSum {
    let [c1, c2, c3, c4] = distance_operators(s);
    let mut x = c1;
    x.add_scaled(-ONE, &c2);
    x.add_scaled(-ONE, &c3);
    x.add_scaled(ONE, &c4);
    x
}

/// `Z = σ ⊗ σ ⊗ F_{S₃S₄} = Σ_ij σ ⊗ σ ⊗ A^{ij} ⊗ A^{ji}` with
/// `A^{ij} = |i⟩⟨j|_S ⊗ 1_B`, so that `Y = V_{12:34} Z` and `Y† = Z V_{12:34}`.
pub fn z_operator(initial: &ProductState) -> OperatorSum {
    let (d_s, d_b) = (initial.system.len(), initial.bath.len());
    let sigma = FactorOperator::Bipartite {
        system: projector_onto(&initial.system),
        bath: projector_onto(&initial.bath),
    };
    let unit = |i: usize, j: usize| {
        CMatrix::from_fn(d_s, d_s, |r, c| if r == i && c == j { ONE } else { Complex64::new(0.0, 0.0) })
    };
    let mut z = OperatorSum::default();
    for i in 0..d_s {
        for j in 0..d_s {
            z.push(
                ONE,
                vec![
                    sigma.clone(),
                    sigma.clone(),
                    FactorOperator::Bipartite { system: unit(i, j), bath: CMatrix::identity(d_b, d_b) },
                    FactorOperator::Bipartite { system: unit(j, i), bath: CMatrix::identity(d_b, d_b) },
                ],
            );
        }
    }
    z
}

/// The one place where the pair swap enters: overlaps of `Y†` from those of
/// `Z`, `tr(Y† V_{π⁻¹}) = tr(Z V_{(π∘κ)⁻¹}) = z_{π∘κ}` with `κ = (0 2)(1 3)`.
pub fn y_adjoint_overlap(z: &OverlapVector, group: &CanonicalGroupOrder) -> OverlapVector {
    z.right_shift(group, &pair_swap())
}

/// Overlaps of `Y` itself: `tr(V_κ Z V_{π⁻¹}) = z_{κ∘π}`.
pub fn y_overlap(z: &OverlapVector, group: &CanonicalGroupOrder) -> OverlapVector {
    let kappa = pair_swap();
    OverlapVector {
        components: group
            .elements()
            .iter()
            .map(|p| z.components[group.index_of(&kappa.compose(p))])
            .collect(),
    }
}

/// Exact Haar averages for a fixed system/bath split. Caches the S₄ Gram
/// pseudoinverse for `d = d_S d_B` and the overlaps of `Y†`.
#[derive(Clone, Debug)]
pub struct ExactAverager {
    d_s: usize,
    d_b: usize,
    kernel: TwirlKernel,
    y_adj: OverlapVector,
}

/// Largest acceptable imaginary residue, relative to the scale of the result.
pub const IMAGINARY_TOLERANCE: f64 = 1e-8;

impl ExactAverager {
    pub fn new(d_s: usize, d_b: usize) -> Result<Self> {
        Self::with_initial_state(&ProductState::standard(d_s, d_b))
    }

    pub fn with_initial_state(initial: &ProductState) -> Result<Self> {
        let (d_s, d_b) = (initial.system.len(), initial.bath.len());
        if d_s == 0 || d_b == 0 {
            return Err(Error::ZeroDimension);
        }
        let d = d_s * d_b;
        let kernel = TwirlKernel::new(4, d as u64)?;
        let z = kernel.overlap(&z_operator(initial), &TraceContext::dense(d))?;
        let y_adj = y_adjoint_overlap(&z, kernel.group());
        Ok(Self { d_s, d_b, kernel, y_adj })
    }

    pub fn kernel(&self) -> &TwirlKernel {
        &self.kernel
    }

    fn check(&self, s: &Spectrum) -> Result<()> {
        if s.system_dim() != self.d_s || s.bath_dim() != self.d_b {
            return Err(Error::DimensionMismatch(format!(
                "spectrum split {}x{} against averager {}x{}",
                s.system_dim(),
                s.bath_dim(),
                self.d_s,
                self.d_b
            )));
        }
        Ok(())
    }

    /// Overlaps of `X₀` at time `t`.
    pub fn x_overlap(&self, s: &Spectrum, t: f64) -> Result<OverlapVector> {
        self.check(s)?;
        self.kernel.overlap(&x_operator(s), &TraceContext::spectral(s, t))
    }

    /// `tr[Y τ₄(X₀)]` as a complex number (the imaginary part is round-off).
    pub fn distance_complex(&self, s: &Spectrum, t: f64) -> Result<Complex64> {
        let x = self.x_overlap(s, t)?;
        self.kernel.twirl_trace(&self.y_adj, &x)
    }

    /// `⟨‖ρ_S(t) − ω_S‖₂²⟩_U`.
    pub fn distance(&self, s: &Spectrum, t: f64) -> Result<f64> {
        let z = self.distance_complex(s, t)?;
        if z.im.abs() > IMAGINARY_TOLERANCE * (1.0 + z.re.abs()) {
            return Err(Error::InvalidArgument(format!(
                "twirl trace has a non-negligible imaginary part {:e}",
                z.im
            )));
        }
        Ok(z.re)
    }
}

/// `⟨‖ρ_S(t) − ω_S‖₂²⟩_U` at finite `d` through the Gram engine.
pub fn exact_haar_distance(s: &Spectrum, t: f64) -> Result<f64> {
    ExactAverager::new(s.system_dim(), s.bath_dim())?.distance(s, t)
}

/// `|η|²/(d² d_S) + (|ξ|²/d² − γ/d²)²`.
pub fn leading_order_distance(s: &Spectrum, t: f64) -> f64 {
    leading_order_from_summary(&spectral_summary(s, t), s.system_dim())
}

pub fn leading_order_from_summary(m: &SpectralSummary, d_s: usize) -> f64 {
    let d2 = (m.d * m.d) as f64;
    let a = m.eta.norm_sqr() / (d2 * d_s as f64);
    let b = (m.xi.norm_sqr() - m.gamma as f64) / d2;
    a + b * b
}

/// Constant in the low-degeneracy condition `γ/d² ≤ c/d`.
pub const LOW_DEGENERACY_FACTOR: f64 = 2.0;

/// Whether the spectrum satisfies the low-degeneracy condition under which
/// the leading-order form is meaningful: more than one level and
/// `γ/d² ≤ 2/d`.
pub fn leading_order_applies(s: &Spectrum) -> bool {
    let m = spectral_summary(s, 0.0);
    let d = m.d as f64;
    s.len() > 1 && (m.gamma as f64) / (d * d) <= LOW_DEGENERACY_FACTOR / d
}

/// Long-hand finite-`d` closed form, linear in an undetermined scalar `b`.
/// Kept as a cross-check against the Gram engine; see [`implied_b`].
pub fn long_form_distance(m: &SpectralSummary, d_s: usize, d_b: usize, b: f64) -> f64 {
    let d = m.d as f64;
    let (ds, db) = (d_s as f64, d_b as f64);
    let g = m.gamma as f64;
    let io = m.iota as f64;
    let x2 = m.xi.norm_sqr();
    let x4 = x2 * x2;
    let xi = m.xi;
    let (eta, p) = (m.eta, m.p);
    let mix = 1.0 + d - db - ds;
    let mut s = Complex64::new(0.0, 0.0);
    s += 4.0 * d + 4.0 * d * d + 2.0 * d.powi(3) - 4.0 * d * db + 4.0 * d.powi(3) * db + d.powi(4) * db;
    s -= x4 * (2.0 + d) * mix;
    s += -4.0 * d * ds - 2.0 * d.powi(3) * ds - 4.0 * d.powi(4) * ds - d.powi(5) * ds;
    s -= b * (2.0 + (-2.0 + 2.0 * d + 4.0 * d * d + d.powi(3)) * db - (2.0 + 4.0 * d + d * d) * ds);
    s += 4.0 * g - 4.0 * d * g - 6.0 * d * d * g - 2.0 * d.powi(3) * g;
    s += -4.0 * db * g + 2.0 * d * db * g + 5.0 * d * d * db * g + d.powi(3) * db * g;
    s += -4.0 * ds * g + 2.0 * d * ds * g + 5.0 * d * d * ds * g + d.powi(3) * ds * g;
    s += -2.0 * g * g - 3.0 * d * g * g - d * d * g * g + 2.0 * db * g * g + d * db * g * g + 2.0 * ds * g * g
        + d * ds * g * g;
    s += 2.0 * x2 * mix * (d + 2.0 * g + d * g);
    s += 4.0 * io + 4.0 * d * io - 4.0 * db * io - 4.0 * ds * io;
    let xbar2_eta = xi.conj() * xi.conj() * eta;
    let xi2_etabar = xi * xi * eta.conj();
    s += (1.0 + d - db - ds) * (xbar2_eta + xi2_etabar);
    let pbar_xi = p.conj() * xi;
    let p_xibar = p * xi.conj();
    s += (-4.0 - 4.0 * d + 4.0 * db + 4.0 * ds) * (pbar_xi + p_xibar);
    let pref = -1.0 / (d * d * (2.0 + d) * (-3.0 - d + 3.0 * d * d + d.powi(3)));
    (pref * s).re
}

/// The value of `b` for which [`long_form_distance`] reproduces `exact`.
pub fn implied_b(m: &SpectralSummary, d_s: usize, d_b: usize, exact: f64) -> f64 {
    let f0 = long_form_distance(m, d_s, d_b, 0.0);
    let f1 = long_form_distance(m, d_s, d_b, 1.0);
    (exact - f0) / (f1 - f0)
}

/// `√(d_S · ‖ρ_S − ω_S‖₂²)`, an upper bound on the trace distance.
pub fn trace_norm_bound(hs_distance_sq: f64, d_s: usize) -> Result<f64> {
    if hs_distance_sq < 0.0 || !hs_distance_sq.is_finite() {
        return Err(Error::InvalidArgument("squared distance must be non-negative".into()));
    }
    Ok((d_s as f64 * hs_distance_sq).sqrt())
}

/// A gap `Δ_jk = E_j − E_k > 0` (`j > k`) with its degeneracy constant
/// `γ_jk = Σ_{(rs)≠(jk), Δ_rs = Δ_jk} d_r d_s`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Gap {
    pub j: usize,
    pub k: usize,
    pub delta: f64,
    pub weight: f64,
    pub gamma_jk: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapStatistics {
    pub gaps: Vec<Gap>,
    /// `⟨Δ⁻¹⟩ = d⁻² Σ_{j>k} d_j d_k / Δ_jk`; absent with fewer than two levels.
    pub mean_inverse_gap: Option<f64>,
    /// `⟨|Δ_jk − Δ_rs|⁻¹⟩` over ordered pairs of distinct gaps; absent when
    /// no two gaps differ.
    pub mean_inverse_second_gap: Option<f64>,
    /// `γ/d²`.
    pub level_degeneracy: f64,
    /// `d⁻⁴ Σ_{j>k} γ_jk d_j d_k`.
    pub gap_degeneracy: f64,
}

pub fn gap_statistics(s: &Spectrum) -> GapStatistics {
    let levels = s.levels();
    let d = s.dim() as f64;
    let mut gaps = Vec::new();
    for j in 0..levels.len() {
        for k in 0..j {
            gaps.push(Gap {
                j,
                k,
                delta: s.gap(j, k),
                weight: (levels[j].degeneracy * levels[k].degeneracy) as f64,
                gamma_jk: 0.0,
            });
        }
    }
    let m = gaps.len();
    let mut equal = vec![false; m * m];
    for a in 0..m {
        for b in 0..m {
            equal[a * m + b] = s.gaps_equal((gaps[a].j, gaps[a].k), (gaps[b].j, gaps[b].k));
        }
    }
    for a in 0..m {
        gaps[a].gamma_jk = (0..m)
            .filter(|&b| b != a && equal[a * m + b])
            .map(|b| gaps[b].weight)
            .sum();
    }
    let mean_inverse_gap = (m > 0).then(|| gaps.iter().map(|g| g.weight / g.delta).sum::<f64>() / (d * d));
    let mut second = 0.0;
    let mut any = false;
    for a in 0..m {
        for b in 0..m {
            if a != b && !equal[a * m + b] {
                any = true;
                second += gaps[a].weight * gaps[b].weight / (gaps[a].delta - gaps[b].delta).abs();
            }
        }
    }
    let gamma: f64 = levels.iter().map(|l| (l.degeneracy * l.degeneracy) as f64).sum();
    GapStatistics {
        mean_inverse_second_gap: any.then(|| second / d.powi(4)),
        mean_inverse_gap,
        level_degeneracy: gamma / (d * d),
        gap_degeneracy: gaps.iter().map(|g| g.gamma_jk * g.weight).sum::<f64>() / d.powi(4),
        gaps,
    }
}

/// `sin(x)/x`, continuous at 0.
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// `T → ∞` limit of the time-averaged leading-order distance:
/// `γ/(d²d_S) + 2 d⁻⁴ Σ_{j>k} (d_j²d_k² + γ_jk d_j d_k)`.
pub fn time_average_limit(s: &Spectrum) -> f64 {
    let st = gap_statistics(s);
    limit_from_stats(s, &st)
}

fn limit_from_stats(s: &Spectrum, st: &GapStatistics) -> f64 {
    let d = s.dim() as f64;
    let ds = s.system_dim() as f64;
    let gamma = st.level_degeneracy * d * d;
    let pairs: f64 = st.gaps.iter().map(|g| g.weight * g.weight + g.gamma_jk * g.weight).sum();
    gamma / (d * d * ds) + 2.0 * pairs / d.powi(4)
}

/// `(1/T) ∫₀ᵀ` of the leading-order distance, in closed form.
pub fn time_average(s: &Spectrum, horizon: f64) -> Result<f64> {
    if horizon <= 0.0 || !horizon.is_finite() {
        return Err(Error::InvalidArgument("horizon T must be positive".into()));
    }
    let st = gap_statistics(s);
    let d = s.dim() as f64;
    let ds = s.system_dim() as f64;
    let t = horizon;
    let mut value = limit_from_stats(s, &st);
    for g in &st.gaps {
        let coeff = g.weight / ds + (g.weight * g.weight + g.gamma_jk * g.weight) / (d * d);
        value += coeff / (t * d * d) * (2.0 * t * g.delta).sin() / g.delta;
    }
    let m = st.gaps.len();
    let mut cross = 0.0;
    for a in 0..m {
        for b in 0..m {
            if a == b {
                continue;
            }
            let (ga, gb) = (&st.gaps[a], &st.gaps[b]);
            if s.gaps_equal((ga.j, ga.k), (gb.j, gb.k)) {
                continue;
            }
            let w = ga.weight * gb.weight;
            cross += w * (sinc(t * (ga.delta + gb.delta)) + sinc(t * (ga.delta - gb.delta)));
        }
    }
    value += 2.0 * cross / d.powi(4);
    Ok(value)
}

/// Rigorous `1/T` envelope of [`time_average`] about its limit:
/// `limit + T⁻¹[⟨Δ⁻¹⟩/d_S + d⁻⁴Σ(d_j²d_k² + γ_jk d_j d_k)/Δ_jk + 4⟨|Δ−Δ′|⁻¹⟩]`.
/// Dropping the middle term, which is `O(1/d)` relative to the first, gives
/// the customary form.
pub fn time_average_upper_bound(s: &Spectrum, horizon: f64) -> f64 {
    let st = gap_statistics(s);
    let d = s.dim() as f64;
    let ds = s.system_dim() as f64;
    let inv = st.mean_inverse_gap.unwrap_or(0.0);
    let inv2 = st.mean_inverse_second_gap.unwrap_or(0.0);
    let middle: f64 = st
        .gaps
        .iter()
        .map(|g| (g.weight * g.weight + g.gamma_jk * g.weight) / g.delta)
        .sum::<f64>()
        / d.powi(4);
    limit_from_stats(s, &st) + (inv / ds + middle + 4.0 * inv2) / horizon
}

/// Trapezoid rule for `(1/T)∫₀ᵀ f` on `steps` intervals.
pub fn trapezoid_average(f: impl Fn(f64) -> f64, horizon: f64, steps: usize) -> f64 {
    let h = horizon / steps as f64;
    let mut inner: Vec<f64> = (1..steps).map(|i| f(i as f64 * h)).collect();
    inner.push(0.5 * (f(0.0) + f(horizon)));
    crate::stats::pairwise_sum(&inner) * h / horizon
}

/// Sums over pairwise-distinct index tuples entering the Gaussian average.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DegeneracySums {
    pub d: f64,
    pub gamma: f64,
    /// `Σ_{j≠k} d_j d_k`
    pub pairs: f64,
    /// `Σ_{j≠k} d_j² d_k²`
    pub pairs_sq: f64,
    /// `Σ_{j,k,s distinct} d_j² d_k d_s`
    pub triples: f64,
    /// `Σ_{j,k,r,s distinct} d_j d_k d_r d_s`
    pub quads: f64,
}

pub fn degeneracy_sums(degeneracies: &[usize]) -> DegeneracySums {
    let pw = |k: i32| degeneracies.iter().map(|&g| (g as f64).powi(k)).sum::<f64>();
    let (p1, p2, p3, p4) = (pw(1), pw(2), pw(3), pw(4));
    DegeneracySums {
        d: p1,
        gamma: p2,
        pairs: p1 * p1 - p2,
        pairs_sq: p2 * p2 - p4,
        triples: p2 * (p1 * p1 - p2) - 2.0 * p1 * p3 + 2.0 * p4,
        quads: p1.powi(4) - 6.0 * p1 * p1 * p2 + 3.0 * p2 * p2 + 8.0 * p1 * p3 - 6.0 * p4,
    }
}

/// Average of the leading-order distance over i.i.d. `N(0, σ²)` energies:
/// `γ/(d²d_S) + Σ_{j≠k}d_j²d_k²/d⁴ + 2Σ₃ e^{−σ²t²} + Σ₄ e^{−2σ²t²}
///  + 2Σ₃ e^{−3σ²t²} + (Σ_{j≠k}d_jd_k/(d²d_S) + Σ_{j≠k}d_j²d_k²/d⁴) e^{−4σ²t²}`
/// with `Σ₃ = Σ_{distinct} d_j²d_kd_s/d⁴`, `Σ₄ = Σ_{distinct} d_jd_kd_rd_s/d⁴`.
pub fn gaussian_average(degeneracies: &[usize], d_s: usize, sigma: f64, t: f64) -> Result<f64> {
    Ok(gaussian_terms(degeneracies, d_s, sigma, t)?.total())
}

/// The six terms of [`gaussian_average`] grouped by their decay rate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GaussianTerms {
    pub constant: f64,
    /// Coefficients of `e^{−kσ²t²}` for `k = 1..=4`.
    pub coefficients: [f64; 4],
    pub sigma: f64,
    pub t: f64,
}

impl GaussianTerms {
    pub fn total(&self) -> f64 {
        self.constant + self.time_dependent()
    }

    pub fn time_dependent(&self) -> f64 {
        let x = self.sigma * self.sigma * self.t * self.t;
        self.coefficients
            .iter()
            .enumerate()
            .map(|(i, c)| c * (-(i as f64 + 1.0) * x).exp())
            .sum()
    }
}

pub fn gaussian_terms(degeneracies: &[usize], d_s: usize, sigma: f64, t: f64) -> Result<GaussianTerms> {
    if degeneracies.is_empty() || degeneracies.contains(&0) {
        return Err(Error::InvalidSpectrum("degeneracies must be positive and non-empty".into()));
    }
    if sigma <= 0.0 || !sigma.is_finite() {
        return Err(Error::InvalidArgument("sigma must be positive".into()));
    }
    let m = degeneracy_sums(degeneracies);
    let d2 = m.d * m.d;
    let d4 = d2 * d2;
    let ds = d_s as f64;
    Ok(GaussianTerms {
        constant: m.gamma / (d2 * ds) + m.pairs_sq / d4,
        coefficients: [
            2.0 * m.triples / d4,
            m.quads / d4,
            2.0 * m.triples / d4,
            m.pairs / (d2 * ds) + m.pairs_sq / d4,
        ],
        sigma,
        t,
    })
}

/// Lower and upper envelopes of the Gaussian average: keep only the leading
/// part `Σ_{j≠k} d_jd_k/(d²d_S) e^{−4σ²t²}` of the fastest-decaying term, or
/// replace every exponential by the slowest one `e^{−σ²t²}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GaussianBounds {
    pub lower: f64,
    pub upper: f64,
    /// Constant (`t`-independent) part, the `O(1/d)` slack of both bounds.
    pub constant: f64,
}

pub fn gaussian_bounds(degeneracies: &[usize], d_s: usize, sigma: f64, t: f64) -> Result<GaussianBounds> {
    let terms = gaussian_terms(degeneracies, d_s, sigma, t)?;
    let m = degeneracy_sums(degeneracies);
    let x = sigma * sigma * t * t;
    let lower = m.pairs / (m.d * m.d * d_s as f64) * (-4.0 * x).exp();
    let upper = terms.constant + terms.coefficients.iter().sum::<f64>() * (-x).exp();
    Ok(GaussianBounds {
        lower,
        upper,
        constant: terms.constant,
    })
}

/// `σ = ln d`.
pub fn default_sigma(d: usize) -> f64 {
    (d as f64).ln()
}
