//! Validated density matrices and their spectra.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{c64, cholesky_min_pivot, hermitian_eigen, ComplexMatrix};

/// Eigenvalues at or below this are treated as exact zeros.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Absolute tolerances used when validating a density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub herm_tol: f64,
    pub psd_tol: f64,
    pub trace_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            herm_tol: 1e-10,
            psd_tol: 1e-10,
            trace_tol: 1e-10,
        }
    }
}

/// Hermitian, positive-semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
    tols: Tolerances,
}

impl DensityMatrix {
    /// Validates with default tolerances.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        validate_density(m, Tolerances::default())
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tols
    }

    pub fn purity(&self) -> f64 {
        self.mat.trace_product(&self.mat).re
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            mat: ComplexMatrix::identity(d).scale(1.0 / d as f64),
            tols: Tolerances::default(),
        }
    }

    /// `|ψ⟩⟨ψ|` for a normalized vector.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        Self::new(ComplexMatrix::outer(psi, psi))
    }
}

/// Checks Hermiticity on the raw input, then symmetrizes and checks trace and
/// positivity.
pub fn validate_density(m: ComplexMatrix, tols: Tolerances) -> Result<DensityMatrix> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let deviation = m.hermiticity_defect();
    if deviation > tols.herm_tol {
        return Err(Error::NotHermitian {
            deviation,
            tol: tols.herm_tol,
        });
    }
    let mat = m.hermitian_part();
    let trace = mat.trace().re;
    if (trace - 1.0).abs() > tols.trace_tol {
        return Err(Error::TraceNotOne {
            trace,
            tol: tols.trace_tol,
        });
    }
    // λ_min > -psd_tol  ⇔  mat + psd_tol·1 is positive definite.
    let mut shifted = mat.clone();
    for i in 0..mat.dim() {
        shifted[(i, i)] += tols.psd_tol;
    }
    if cholesky_min_pivot(&shifted).is_none() {
        let min_eigenvalue = hermitian_eigen(&mat)?.values.last().copied().unwrap_or(0.0);
        if min_eigenvalue < -tols.psd_tol {
            return Err(Error::NotPositive {
                min_eigenvalue,
                tol: tols.psd_tol,
            });
        }
    }
    Ok(DensityMatrix { mat, tols })
}

/// Eigen-decomposition of a density matrix together with its support.
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Descending, clamped to be nonnegative; values `≤ rank_tol` are exact zeros.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns.
    pub eigenvectors: ComplexMatrix,
    pub support_rank: usize,
    pub support_projector: ComplexMatrix,
    pub rank_tol: f64,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, i: usize) -> Vec<Complex64> {
        self.eigenvectors.column(i)
    }

    pub fn is_full_rank(&self) -> bool {
        self.support_rank == self.dim()
    }

    pub fn kernel_projector(&self) -> ComplexMatrix {
        &ComplexMatrix::identity(self.dim()) - &self.support_projector
    }

    /// `V diag(p) V†`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.from_eigenbasis(&ComplexMatrix::diag(&self.eigenvalues))
    }

    /// `V† m V`.
    pub fn to_eigenbasis(&self, m: &ComplexMatrix) -> ComplexMatrix {
        &(&self.eigenvectors.adjoint() * m) * &self.eigenvectors
    }

    /// `V m V†`.
    pub fn from_eigenbasis(&self, m: &ComplexMatrix) -> ComplexMatrix {
        &(&self.eigenvectors * m) * &self.eigenvectors.adjoint()
    }

    /// `Σ_{i≤M} p_i⁻¹ |ψ_i⟩⟨ψ_i|`.
    pub fn support_inverse(&self) -> Result<ComplexMatrix> {
        support_inverse(self)
    }
}

/// Diagonalizes `rho`, clamps round-off negatives and counts the support.
pub fn spectral_decompose(rho: &DensityMatrix, rank_tol: f64) -> Result<Spectrum> {
    let eig = hermitian_eigen(rho.matrix())?;
    let eigenvalues: Vec<f64> = eig
        .values
        .iter()
        .map(|&p| if p <= rank_tol { 0.0 } else { p })
        .collect();
    let support_rank = eigenvalues.iter().filter(|&&p| p > 0.0).count();
    let n = rho.dim();
    let v = &eig.vectors;
    let support_projector =
        ComplexMatrix::from_fn(n, |i, j| (0..support_rank).map(|k| v[(i, k)] * v[(j, k)].conj()).sum());
    Ok(Spectrum {
        eigenvalues,
        eigenvectors: eig.vectors,
        support_rank,
        support_projector,
        rank_tol,
    })
}

/// Pseudo-inverse of `ρ` restricted to its support.
pub fn support_inverse(s: &Spectrum) -> Result<ComplexMatrix> {
    if s.support_rank == 0 {
        return Err(Error::EmptySupport);
    }
    let inv: Vec<f64> = s
        .eigenvalues
        .iter()
        .map(|&p| if p > 0.0 { 1.0 / p } else { 0.0 })
        .collect();
    Ok(s.from_eigenbasis(&ComplexMatrix::diag(&inv)).hermitian_part())
}

/// `|+⟩ = (|0⟩ + |1⟩)/√2`.
pub fn plus_state() -> [Complex64; 2] {
    let a = core::f64::consts::FRAC_1_SQRT_2;
    [c64(a, 0.0), c64(a, 0.0)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density_matrix, CounterRng};
    use alloc::vec;

    #[test]
    fn maximally_mixed_is_valid() {
        let m = ComplexMatrix::identity(3).scale(1.0 / 3.0);
        assert!(DensityMatrix::new(m).is_ok());
    }

    #[test]
    fn anti_hermitian_off_diagonal_rejected() {
        let m = ComplexMatrix::from_rows(&[vec![c64(0.5, 0.0), c64(0.0, 0.5)], vec![c64(0.0, 0.5), c64(0.5, 0.0)]])
            .unwrap();
        assert!(
            matches!(DensityMatrix::new(m), Err(Error::NotHermitian { deviation, .. }) if (deviation - 1.0).abs() < 1e-15)
        );
    }

    #[test]
    fn wrong_trace_rejected() {
        let m = ComplexMatrix::diag(&[0.7, 0.4]);
        assert!(matches!(DensityMatrix::new(m), Err(Error::TraceNotOne { trace, .. }) if (trace - 1.1).abs() < 1e-15));
    }

    #[test]
    fn negative_eigenvalue_rejected() {
        let m = ComplexMatrix::diag(&[1.2, -0.2]);
        assert!(
            matches!(DensityMatrix::new(m), Err(Error::NotPositive { min_eigenvalue, .. }) if (min_eigenvalue + 0.2).abs() < 1e-15)
        );
    }

    #[test]
    fn tiny_negative_within_tolerance_is_clamped() {
        let rho = DensityMatrix::new(ComplexMatrix::diag(&[1.0 + 1e-12, -1e-12])).unwrap();
        let s = spectral_decompose(&rho, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(s.eigenvalues[1], 0.0);
        assert_eq!(s.support_rank, 1);
    }

    #[test]
    fn diagonal_spectrum() {
        let rho = DensityMatrix::new(ComplexMatrix::diag(&[0.1, 0.9])).unwrap();
        let s = spectral_decompose(&rho, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(s.eigenvalues, [0.9, 0.1]);
        assert_eq!(s.support_rank, 2);
    }

    #[test]
    fn plus_state_projector() {
        let rho = DensityMatrix::pure(&plus_state()).unwrap();
        let s = spectral_decompose(&rho, DEFAULT_RANK_TOL).unwrap();
        assert!((s.eigenvalues[0] - 1.0).abs() < 1e-15);
        assert_eq!(s.eigenvalues[1], 0.0);
        assert_eq!(s.support_rank, 1);
        assert!((&s.support_projector - rho.matrix()).max_abs() < 1e-15);
    }

    #[test]
    fn random_reconstruction_and_projector() {
        let mut rng = CounterRng::new(4);
        for rank in 1..=4 {
            let rho = DensityMatrix::new(random_density_matrix(4, rank, 0.0, &mut rng)).unwrap();
            let s = spectral_decompose(&rho, DEFAULT_RANK_TOL).unwrap();
            assert_eq!(s.support_rank, rank);
            assert!((&s.reconstruct() - rho.matrix()).max_abs() < 1e-12);
            let p = &s.support_projector;
            assert!((&(p * p) - p).max_abs() < 1e-12);
            let vv = &s.eigenvectors.adjoint() * &s.eigenvectors;
            assert!((&vv - &ComplexMatrix::identity(4)).max_abs() < 1e-12);
            let inv = s.support_inverse().unwrap();
            assert!((&(rho.matrix() * &inv) - p).max_abs() < 1e-10);
            assert!((&(&inv * rho.matrix()) - p).max_abs() < 1e-10);
        }
    }

    #[test]
    fn support_inverse_examples() {
        let cases: [(&[f64], &[f64]); 3] = [
            (&[0.5, 0.5], &[2.0, 2.0]),
            (&[0.75, 0.25], &[4.0 / 3.0, 4.0]),
            (&[1.0, 0.0], &[1.0, 0.0]),
        ];
        for (p, want) in cases {
            let rho = DensityMatrix::new(ComplexMatrix::diag(p)).unwrap();
            let s = spectral_decompose(&rho, DEFAULT_RANK_TOL).unwrap();
            let inv = s.support_inverse().unwrap();
            assert!((&inv - &ComplexMatrix::diag(want)).max_abs() < 1e-15);
        }
    }
}
