//! Gram matrices of permutation operators, `M^D_{gh} = tr(V_g† V_h) = d^{l(g⁻¹h)}`,
//! and their character-theoretic spectral data.
//!
//! All algebra is exact. `M^D` is diagonalised by the class matrices
//! `M^α_{gh} = χ^α(g⁻¹h)`: the matrices `P^α = (d_α/n!) M^α` form a complete
//! set of orthogonal projectors and `M^D = Σ_α λ_α P^α` with
//! `λ_α = n! k_α / d_α`, where `k_α` is the multiplicity of irrep `α` in
//! `(ℂ^d)^{⊗n}`.

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exact::RationalMatrix;
use crate::permgroup::{self, CanonicalGroupOrder, CharacterTable};

/// S_n together with its character table and the class of every quotient
/// `g⁻¹h`, indexed by canonical positions.
#[derive(Clone, Debug)]
pub struct GroupContext {
    group: CanonicalGroupOrder,
    table: CharacterTable,
    quotient_class: Vec<usize>,
}

impl GroupContext {
    pub fn new(n: usize) -> Result<Self> {
        let table = permgroup::character_table(n)?;
        let group = permgroup::enumerate_group(n)?;
        let m = group.len();
        let mut quotient_class = Vec::with_capacity(m * m);
        for g in group.elements() {
            let g_inv = g.inverse();
            for h in group.elements() {
                quotient_class.push(table.class_of(&g_inv.compose(h)));
            }
        }
        Ok(Self {
            group,
            table,
            quotient_class,
        })
    }

    pub fn degree(&self) -> usize {
        self.group.degree()
    }

    pub fn order(&self) -> usize {
        self.group.len()
    }

    pub fn group(&self) -> &CanonicalGroupOrder {
        &self.group
    }

    pub fn table(&self) -> &CharacterTable {
        &self.table
    }

    /// Class index of `g⁻¹h` for canonical positions `g`, `h`.
    pub fn quotient_class(&self, g: usize, h: usize) -> usize {
        self.quotient_class[g * self.order() + h]
    }

    /// Matrix whose `(g, h)` entry is `f(class(g⁻¹h))`.
    pub fn class_function_matrix(&self, values: &[BigRational]) -> RationalMatrix {
        RationalMatrix::from_fn(self.order(), |g, h| values[self.quotient_class(g, h)].clone())
    }
}

/// `M^D` for the natural representation of S_n on `(ℂ^d)^{⊗n}`.
#[derive(Clone, Debug)]
pub struct GramMatrix {
    ctx: GroupContext,
    d: u64,
    multiplicities: Vec<BigInt>,
    entries: RationalMatrix,
}

pub fn build_gram(n: usize, d: u64) -> Result<GramMatrix> {
    if d == 0 {
        return Err(Error::ZeroDimension);
    }
    let ctx = GroupContext::new(n)?;
    let multiplicities = permgroup::multiplicities(n, d)?;
    let weights: Vec<BigRational> = ctx
        .table()
        .classes()
        .iter()
        .map(|c| BigRational::from_integer(num_traits::pow(BigInt::from(d), c.cycle_count())))
        .collect();
    let entries = ctx.class_function_matrix(&weights);
    Ok(GramMatrix {
        ctx,
        d,
        multiplicities,
        entries,
    })
}

/// `M^α_{gh} = χ^α(g⁻¹h)`.
#[derive(Clone, Debug)]
pub struct ClassMatrix {
    pub irrep: usize,
    pub label: &'static str,
    pub dimension: usize,
    pub entries: RationalMatrix,
}

impl ClassMatrix {
    /// `P^α = (d_α / n!) M^α`.
    pub fn projector(&self) -> RationalMatrix {
        let n_fact = self.entries.dim() as i64;
        self.entries
            .scale(&BigRational::new(BigInt::from(self.dimension), BigInt::from(n_fact)))
    }
}

pub fn class_matrix(ctx: &GroupContext, alpha: usize) -> Result<ClassMatrix> {
    let irrep = ctx.table().irreps().get(alpha).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "irrep index {alpha} out of range for S_{}",
            ctx.degree()
        ))
    })?;
    let values: Vec<BigRational> = irrep
        .characters
        .iter()
        .map(|&c| BigRational::from_integer(BigInt::from(c)))
        .collect();
    Ok(ClassMatrix {
        irrep: alpha,
        label: irrep.label,
        dimension: irrep.dimension,
        entries: ctx.class_function_matrix(&values),
    })
}

#[derive(Clone, Debug)]
pub struct GramSpectralData {
    /// `λ_α = n! k_α / d_α`, one per irrep.
    pub eigenvalues: Vec<BigRational>,
    /// Multiplicity `d_α²` of each eigenvalue.
    pub eigenvalue_multiplicities: Vec<usize>,
    pub projectors: Vec<RationalMatrix>,
}

impl GramSpectralData {
    /// `Π_α λ_α^{d_α²}`.
    pub fn determinant(&self) -> BigRational {
        self.eigenvalues
            .iter()
            .zip(&self.eigenvalue_multiplicities)
            .map(|(l, &m)| num_traits::pow(l.clone(), m))
            .product()
    }

    /// `Σ_α d_α² λ_α`.
    pub fn trace(&self) -> BigRational {
        self.eigenvalues
            .iter()
            .zip(&self.eigenvalue_multiplicities)
            .map(|(l, &m)| l * BigRational::from_integer(BigInt::from(m)))
            .sum()
    }
}

impl GramMatrix {
    pub fn degree(&self) -> usize {
        self.ctx.degree()
    }

    pub fn local_dimension(&self) -> u64 {
        self.d
    }

    pub fn context(&self) -> &GroupContext {
        &self.ctx
    }

    pub fn entries(&self) -> &RationalMatrix {
        &self.entries
    }

    pub fn multiplicities(&self) -> &[BigInt] {
        &self.multiplicities
    }

    pub fn is_singular(&self) -> bool {
        self.multiplicities.iter().any(Zero::is_zero)
    }

    fn order_big(&self) -> BigInt {
        BigInt::from(self.ctx.order())
    }

    pub fn eigenvalues(&self) -> Vec<BigRational> {
        self.ctx
            .table()
            .irreps()
            .iter()
            .zip(&self.multiplicities)
            .map(|(r, k)| BigRational::new(self.order_big() * k, BigInt::from(r.dimension)))
            .collect()
    }

    pub fn spectral_data(&self) -> GramSpectralData {
        let irreps = self.ctx.table().irreps();
        let projectors = (0..irreps.len())
            .map(|a| class_matrix(&self.ctx, a).expect("irrep index in range").projector())
            .collect();
        GramSpectralData {
            eigenvalues: self.eigenvalues(),
            eigenvalue_multiplicities: irreps.iter().map(|r| r.dimension * r.dimension).collect(),
            projectors,
        }
    }

    /// Class-function values of `Σ_{α: k_α > 0} d_α²/(n!² k_α) χ^α`, i.e. the
    /// (pseudo)inverse entry for each class of `g⁻¹h`.
    pub fn pseudoinverse_class_values(&self) -> Vec<BigRational> {
        let table = self.ctx.table();
        let n2 = self.order_big() * self.order_big();
        let mut values = vec![BigRational::zero(); table.classes().len()];
        for (irrep, k) in table.irreps().iter().zip(&self.multiplicities) {
            if k.is_zero() {
                continue;
            }
            let dim2 = BigInt::from(irrep.dimension * irrep.dimension);
            let coeff = BigRational::new(dim2, &n2 * k);
            for (v, &chi) in values.iter_mut().zip(&irrep.characters) {
                *v += &coeff * BigRational::from_integer(BigInt::from(chi));
            }
        }
        values
    }

    /// `(M^D)⁻¹ = n!⁻² Σ_α (d_α²/k_α) M^α`. Fails when some `k_α = 0`.
    pub fn spectral_inverse(&self) -> Result<RationalMatrix> {
        if let Some(alpha) = self.multiplicities.iter().position(Zero::is_zero) {
            return Err(Error::SingularGram {
                irrep: self.ctx.table().irreps()[alpha].label,
                d: self.d,
            });
        }
        Ok(self.pseudoinverse())
    }

    /// Moore-Penrose pseudoinverse `Σ_{k_α > 0} λ_α⁻¹ P^α`.
    pub fn pseudoinverse(&self) -> RationalMatrix {
        self.ctx.class_function_matrix(&self.pseudoinverse_class_values())
    }

    /// Orthogonal projector onto the range of `M^D`: `Σ_{k_α > 0} P^α`.
    pub fn support_projector(&self) -> RationalMatrix {
        let table = self.ctx.table();
        let mut values = vec![BigRational::zero(); table.classes().len()];
        for (irrep, k) in table.irreps().iter().zip(&self.multiplicities) {
            if k.is_zero() {
                continue;
            }
            let coeff = BigRational::new(BigInt::from(irrep.dimension), self.order_big());
            for (v, &chi) in values.iter_mut().zip(&irrep.characters) {
                *v += &coeff * BigRational::from_integer(BigInt::from(chi));
            }
        }
        self.ctx.class_function_matrix(&values)
    }

    /// S₃ inverse as a quadratic in `M`:
    /// `(M² − 3d(d²+1)M + 3d⁴(d²−1)) / (d³(d²−1)²(d²−4))`, defined for `d ≥ 3`.
    pub fn minpoly_inverse_s3(&self) -> Result<RationalMatrix> {
        if self.degree() != 3 {
            return Err(Error::UnsupportedDegree(self.degree()));
        }
        let d = BigInt::from(self.d);
        let d2 = &d * &d;
        let one = BigInt::one();
        let s3 = num_traits::pow(d.clone(), 3) * num_traits::pow(&d2 - &one, 2) * (&d2 - BigInt::from(4));
        if s3.is_zero() {
            return Err(Error::SingularGram {
                irrep: "sign",
                d: self.d,
            });
        }
        let a = BigInt::from(3) * &d * (&d2 + &one);
        let b = BigInt::from(3) * num_traits::pow(d.clone(), 4) * (&d2 - &one);
        let m = &self.entries;
        let m2 = m * m;
        let poly = &(&m2 - &m.scale(&BigRational::from_integer(a)))
            + &RationalMatrix::identity(m.dim()).scale(&BigRational::from_integer(b));
        Ok(poly.scale(&BigRational::new(one, s3)))
    }

    /// S₄ inverse as a quartic in `M`:
    /// `(M⁴ − s₁M³ + s₂M² − s₃M + s₄) / s₅`, defined for `d ≥ 4`.
    pub fn minpoly_inverse_s4(&self) -> Result<RationalMatrix> {
        if self.degree() != 4 {
            return Err(Error::UnsupportedDegree(self.degree()));
        }
        if self.d < 4 {
            return Err(Error::MinpolyUndefined(self.d));
        }
        let [s1, s2, s3, s4, s5] = s4_minpoly_coefficients(self.d);
        let m = &self.entries;
        let m2 = m * m;
        let m3 = &m2 * m;
        let m4 = &m3 * m;
        let q = |x: &BigInt| BigRational::from_integer(x.clone());
        let mut acc = &m4 - &m3.scale(&q(&s1));
        acc = &acc + &m2.scale(&q(&s2));
        acc = &acc - &m.scale(&q(&s3));
        acc = &acc + &RationalMatrix::identity(m.dim()).scale(&q(&s4));
        Ok(acc.scale(&BigRational::new(BigInt::one(), s5)))
    }
}

/// Coefficients `s₁ … s₅` of the S₄ minimal-polynomial inverse.
pub fn s4_minpoly_coefficients(d: u64) -> [BigInt; 5] {
    let d = BigInt::from(d);
    let d2 = &d * &d;
    let d4 = &d2 * &d2;
    let d6 = &d4 * &d2;
    let e1 = &d2 - BigInt::from(1);
    let e4 = &d2 - BigInt::from(4);
    let e9 = &d2 - BigInt::from(9);
    let s1 = &d2 * (BigInt::from(5) * &d2 + BigInt::from(19));
    let s2 = BigInt::from(2) * &d2 * &e1 * (BigInt::from(5) * &d4 + BigInt::from(23) * &d2 + BigInt::from(20));
    let s3 = BigInt::from(2) * &d4 * num_traits::pow(e1.clone(), 2)
        * (BigInt::from(5) * &d4 + BigInt::from(7) * &d2 + BigInt::from(12));
    let s4 = &d4 * num_traits::pow(e1.clone(), 3) * &e4
        * (BigInt::from(5) * &d4 - BigInt::from(9) * &d2 + BigInt::from(36));
    let s5 = &d6 * num_traits::pow(e1, 4) * num_traits::pow(e4, 2) * e9;
    [s1, s2, s3, s4, s5]
}

/// One term `χ^D(C_i) A_i` of the association-scheme decomposition of `M^D`.
#[derive(Clone, Debug)]
pub struct AdjacencyTerm {
    pub cycle_type: Vec<usize>,
    pub weight: BigInt,
    /// 0/1 matrix with `(g, h)` set iff `g⁻¹h ∈ C_i`.
    pub matrix: RationalMatrix,
}

/// `M^D = Σ_i χ^D(C_i) A_i`, one term per conjugacy class (identity class first).
pub fn adjacency_decomposition(n: usize, d: u64) -> Result<Vec<AdjacencyTerm>> {
    if d == 0 {
        return Err(Error::ZeroDimension);
    }
    let ctx = GroupContext::new(n)?;
    let classes = ctx.table().classes().to_vec();
    Ok(classes
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let matrix = RationalMatrix::from_fn(ctx.order(), |g, h| {
                if ctx.quotient_class(g, h) == i {
                    BigRational::one()
                } else {
                    BigRational::zero()
                }
            });
            AdjacencyTerm {
                cycle_type: c.cycle_type.clone(),
                weight: num_traits::pow(BigInt::from(d), c.cycle_count()),
                matrix,
            }
        })
        .collect())
}

/// Orthogonal projector onto `span{ψ_i}`, stored as `P = Σ_ij X_ij |ψ_i⟩⟨ψ_j|`
/// with `X` the pseudoinverse of the Gram matrix `⟨ψ_i|ψ_j⟩`.
///
/// The projector is applied without materialising it, so it also serves
/// operator spaces whose dimension is too large for a dense square matrix.
#[derive(Clone, Debug)]
pub struct SpanProjector {
    vectors: Vec<DVector<Complex64>>,
    coefficients: DMatrix<Complex64>,
}

/// Relative eigenvalue cutoff used for the numerical Gram pseudoinverse.
pub const SPAN_RANK_TOLERANCE: f64 = 1e-10;

pub fn projector_from_vectors(vectors: &[DVector<Complex64>]) -> Result<SpanProjector> {
    let Some(first) = vectors.first() else {
        return Err(Error::InvalidArgument("no vectors supplied".into()));
    };
    let dim = first.len();
    if vectors.iter().any(|v| v.len() != dim) {
        return Err(Error::DimensionMismatch("vectors of differing length".into()));
    }
    let k = vectors.len();
    let gram = DMatrix::from_fn(k, k, |i, j| vectors[i].dotc(&vectors[j]));
    // The Gram matrix is Hermitian PSD; invert it on its numerical support.
    let eig = gram.symmetric_eigen();
    let lmax = eig.eigenvalues.iter().fold(0.0f64, |m, &l| m.max(l.abs()));
    let eps = (lmax * SPAN_RANK_TOLERANCE).max(f64::MIN_POSITIVE);
    let mut coefficients = DMatrix::zeros(k, k);
    for (i, &l) in eig.eigenvalues.iter().enumerate() {
        if l > eps {
            let v = eig.eigenvectors.column(i);
            coefficients += v * v.adjoint() * Complex64::new(1.0 / l, 0.0);
        }
    }
    Ok(SpanProjector {
        vectors: vectors.to_vec(),
        coefficients,
    })
}

impl SpanProjector {
    pub fn dim(&self) -> usize {
        self.vectors[0].len()
    }

    /// Numerical rank `tr P`.
    pub fn rank(&self) -> usize {
        let k = self.vectors.len();
        let gram = DMatrix::from_fn(k, k, |i, j| self.vectors[i].dotc(&self.vectors[j]));
        (&self.coefficients * gram).trace().re.round() as usize
    }

    /// `P v = Σ_ij X_ij ψ_i ⟨ψ_j|v⟩`.
    pub fn apply(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        let overlaps = DVector::from_iterator(self.vectors.len(), self.vectors.iter().map(|p| p.dotc(v)));
        let weights = &self.coefficients * overlaps;
        let mut out = DVector::zeros(self.dim());
        for (psi, w) in self.vectors.iter().zip(weights.iter()) {
            out.axpy(*w, psi, Complex64::new(1.0, 0.0));
        }
        out
    }

    pub fn matrix(&self) -> DMatrix<Complex64> {
        let dim = self.dim();
        let mut p = DMatrix::zeros(dim, dim);
        for (i, psi_i) in self.vectors.iter().enumerate() {
            for (j, psi_j) in self.vectors.iter().enumerate() {
                let x = self.coefficients[(i, j)];
                if x == Complex64::new(0.0, 0.0) {
                    continue;
                }
                p += psi_i * psi_j.adjoint() * x;
            }
        }
        p
    }
}
