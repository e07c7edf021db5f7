//! Small dense complex linear algebra used by the brute-force and
//! Monte-Carlo oracles.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::permgroup::Permutation;

pub type CMatrix = DMatrix<Complex64>;

/// Default cap on dense-oracle dimensions.
pub const DEFAULT_MAX_DIM: usize = 256;

/// Dense-oracle dimension cap from `EQUILIB_MAX_DIM`, falling back to
/// [`DEFAULT_MAX_DIM`] when unset or unparsable.
pub fn max_dense_dim() -> usize {
    std::env::var("EQUILIB_MAX_DIM")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_DIM)
}

pub fn check_dense_dim(dim: usize) -> Result<()> {
    let cap = max_dense_dim();
    if dim > cap {
        return Err(Error::DimensionTooLarge { dim, cap });
    }
    Ok(())
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn kron_all(factors: &[CMatrix]) -> CMatrix {
    let mut acc = CMatrix::identity(1, 1);
    for f in factors {
        acc = kron(&acc, f);
    }
    acc
}

/// Permutation operator on `(ℂ^d)^{⊗n}` that moves tensor factor `k` to
/// position `π(k)`: `V_π (v₀⊗…⊗v_{n−1})` holds `v_{π⁻¹(k)}` in slot `k`.
/// With this convention `V_π V_σ = V_{π∘σ}`.
pub fn permutation_operator(p: &Permutation, d: usize) -> CMatrix {
    let n = p.degree();
    let dim = d.pow(n as u32);
    let mut out = CMatrix::zeros(dim, dim);
    let mut digits = vec![0usize; n];
    for col in 0..dim {
        // col is the multi-index j (slot 0 most significant)
        let mut rem = col;
        for k in (0..n).rev() {
            digits[k] = rem % d;
            rem /= d;
        }
        let mut row = 0;
        for k in 0..n {
            // output slot k carries input slot π⁻¹(k); equivalently slot π(m) carries m
            let m = (0..n).find(|&m| p.apply(m) == k).expect("bijection");
            row = row * d + digits[m];
        }
        out[(row, col)] = c(1.0, 0.0);
    }
    out
}

/// `tr_B ρ` for `ρ` on `ℂ^{d_S} ⊗ ℂ^{d_B}` (system index most significant).
pub fn partial_trace_bath(rho: &CMatrix, d_s: usize, d_b: usize) -> Result<CMatrix> {
    if rho.nrows() != d_s * d_b || rho.ncols() != d_s * d_b {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{}, expected {}",
            rho.nrows(),
            rho.ncols(),
            d_s * d_b
        )));
    }
    Ok(CMatrix::from_fn(d_s, d_s, |i, j| {
        (0..d_b).map(|b| rho[(i * d_b + b, j * d_b + b)]).sum()
    }))
}

/// `tr_S ρ`, the complementary partial trace.
pub fn partial_trace_system(rho: &CMatrix, d_s: usize, d_b: usize) -> Result<CMatrix> {
    if rho.nrows() != d_s * d_b || rho.ncols() != d_s * d_b {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{}, expected {}",
            rho.nrows(),
            rho.ncols(),
            d_s * d_b
        )));
    }
    Ok(CMatrix::from_fn(d_b, d_b, |i, j| {
        (0..d_s).map(|s| rho[(s * d_b + i, s * d_b + j)]).sum()
    }))
}

/// Largest entry modulus.
pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Squared Hilbert-Schmidt norm `tr(A†A)`.
pub fn hs_norm_sq(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

/// Eigenvalues of a Hermitian matrix (the Hermitian part is taken).
pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    let h = (a + a.adjoint()) * c(0.5, 0.0);
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Trace norm of a Hermitian matrix.
pub fn trace_norm_hermitian(a: &CMatrix) -> f64 {
    hermitian_eigenvalues(a).iter().map(|x| x.abs()).sum()
}

/// Operator as a flat vector (row-major), so that the Euclidean inner
/// product is the Hilbert-Schmidt product `tr(A†B)`.
pub fn vectorize(a: &CMatrix) -> nalgebra::DVector<Complex64> {
    let (r, cdim) = a.shape();
    nalgebra::DVector::from_fn(r * cdim, |k, _| a[(k / cdim, k % cdim)])
}

pub fn unvectorize(v: &nalgebra::DVector<Complex64>, dim: usize) -> CMatrix {
    CMatrix::from_fn(dim, dim, |i, j| v[i * dim + j])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::permgroup::enumerate_group;

    #[test]
    fn permutation_operator_is_homomorphism() {
        let g = enumerate_group(3).unwrap();
        for p in g.elements() {
            for q in g.elements() {
                let lhs = permutation_operator(p, 2) * permutation_operator(q, 2);
                let rhs = permutation_operator(&p.compose(q), 2);
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn permutation_operator_moves_factors() {
        // V_(0 1) on a ⊗ b gives b ⊗ a
        let p = Permutation::from_cycles(2, &[&[0, 1]]).unwrap();
        let a = CMatrix::from_row_slice(2, 1, &[c(1.0, 0.0), c(2.0, 0.0)]);
        let b = CMatrix::from_row_slice(2, 1, &[c(3.0, 0.0), c(5.0, 0.0)]);
        let v = permutation_operator(&p, 2) * kron(&a, &b);
        assert_eq!(v, kron(&b, &a));
        // 3-cycle 0→1→2→0 puts slot-0 content into slot 1
        let p = Permutation::new(vec![1, 2, 0]).unwrap();
        let e = |i: usize| CMatrix::from_fn(3, 1, |r, _| if r == i { c(1.0, 0.0) } else { c(0.0, 0.0) });
        let v = permutation_operator(&p, 3) * kron_all(&[e(0), e(1), e(2)]);
        assert_eq!(v, kron_all(&[e(2), e(0), e(1)]));
    }

    #[test]
    fn natural_character_by_trace() {
        let g = enumerate_group(3).unwrap();
        for p in g.elements() {
            let tr = permutation_operator(p, 3).trace().re;
            assert_eq!(tr, 3f64.powi(crate::permgroup::cycle_count(p) as i32));
        }
    }

    #[test]
    fn partial_traces_of_product() {
        let a = CMatrix::from_row_slice(2, 2, &[c(0.7, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.3, 0.0)]);
        let b = CMatrix::from_fn(3, 3, |i, j| if i == j { c(1.0 / 3.0, 0.0) } else { c(0.0, 0.0) });
        let rho = kron(&a, &b);
        assert!((partial_trace_bath(&rho, 2, 3).unwrap() - &a).norm() < 1e-15);
        assert!((partial_trace_system(&rho, 2, 3).unwrap() - &b).norm() < 1e-15);
        assert!(partial_trace_bath(&rho, 3, 3).is_err());
    }

    #[test]
    fn env_cap_parses() {
        // unset or garbage falls back to the default
        assert!(max_dense_dim() >= 1);
        assert!(check_dense_dim(1).is_ok());
    }
}
