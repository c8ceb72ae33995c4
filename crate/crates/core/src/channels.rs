//! Depolarizing-channel metrology and block-diagonal states.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::density::{spectral_decompose, validate_density, DensityMatrix, Spectrum, Tolerances, DEFAULT_RANK_TOL};
use crate::error::{Error, Result};
use crate::linalg::{c64, inner, ComplexMatrix};
use crate::sld::{project_gauge, sld_residual, sld_spectral, Method, SldOperator, DEFAULT_ABS_TOL};

/// η must lie in `(ETA_MARGIN, 1 − ETA_MARGIN)` for η-estimation.
pub const ETA_MARGIN: f64 = 1e-6;

fn check_eta_range(eta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::EtaOutOfRange { eta });
    }
    Ok(())
}

fn check_eta_interior(eta: f64) -> Result<()> {
    check_eta_range(eta)?;
    if eta <= ETA_MARGIN || eta >= 1.0 - ETA_MARGIN {
        return Err(Error::EtaBoundary { eta });
    }
    Ok(())
}

/// `η ρ_in + (1−η)/d · 1`.
pub fn depolarize(rho_in: &DensityMatrix, eta: f64) -> Result<DensityMatrix> {
    check_eta_range(eta)?;
    let d = rho_in.dim();
    let m = &rho_in.matrix().scale(eta) + &ComplexMatrix::identity(d).scale((1.0 - eta) / d as f64);
    validate_density(m, rho_in.tolerances())
}

/// Quadratic-class coefficients of the depolarized state.
pub fn depolarized_coefficients(alpha_in: f64, beta_in: f64, eta: f64, d: usize) -> (f64, f64) {
    let d = d as f64;
    let alpha = eta * alpha_in + 2.0 * (1.0 - eta) / d;
    let beta = eta * eta * beta_in + eta * (1.0 - eta) * alpha_in / d + (1.0 - eta).powi(2) / (d * d);
    (alpha, beta)
}

/// `L_θ = 2dη / (dη α_in + 2(1−η)) · ∂ρ_in` for an input whose class
/// coefficients do not depend on θ.
pub fn sld_theta_depolarized(
    rho_in: &DensityMatrix,
    drho_in: &ComplexMatrix,
    alpha_in: f64,
    eta: f64,
) -> Result<SldOperator> {
    check_eta_range(eta)?;
    let d = rho_in.dim() as f64;
    let k = 2.0 * d * eta / (d * eta * alpha_in + 2.0 * (1.0 - eta));
    finish_theta(rho_in, drho_in, eta, drho_in.scale(k))
}

fn finish_theta(rho_in: &DensityMatrix, drho_in: &ComplexMatrix, eta: f64, l: ComplexMatrix) -> Result<SldOperator> {
    let rho_f = depolarize(rho_in, eta)?;
    let drho_f = drho_in.scale(eta);
    let s = spectral_decompose(&rho_f, DEFAULT_RANK_TOL)?;
    let mat = project_gauge(&l, &s.support_projector);
    let residual = sld_residual(rho_f.matrix(), &drho_f, &mat);
    let tol = 1e-9 * drho_f.max_abs().max(1.0);
    if residual > tol {
        return Err(Error::ClassViolation { residual, tol });
    }
    Ok(SldOperator::new(mat, Method::Depolarized, residual))
}

/// `ρ_in = (1/N) Σ_i |ψ_i⟩⟨ψ_i|` for `N` orthonormal vectors, together with
/// their θ-derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct DegenerateFamily {
    pub frame: Vec<Vec<Complex64>>,
    pub frame_derivative: Vec<Vec<Complex64>>,
}

impl DegenerateFamily {
    pub fn new(frame: Vec<Vec<Complex64>>, frame_derivative: Vec<Vec<Complex64>>) -> Result<Self> {
        let n = frame.len();
        if n == 0 || frame_derivative.len() != n {
            return Err(Error::InvalidArgument(
                "frame and derivative must have the same nonzero length".into(),
            ));
        }
        let d = frame[0].len();
        if n >= d || frame.iter().chain(&frame_derivative).any(|v| v.len() != d) {
            return Err(Error::InvalidArgument("degeneracy N must satisfy 1 ≤ N < d".into()));
        }
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { 1.0 } else { 0.0 };
                if (inner(&frame[i], &frame[j]) - c64(want, 0.0)).norm() > 1e-10 {
                    return Err(Error::InvalidArgument("frame is not orthonormal".into()));
                }
            }
        }
        Ok(Self {
            frame,
            frame_derivative,
        })
    }

    pub fn degeneracy(&self) -> usize {
        self.frame.len()
    }

    pub fn dim(&self) -> usize {
        self.frame[0].len()
    }

    /// `∂(|ψ_i⟩⟨ψ_i|)`.
    fn projector_derivative(&self, i: usize) -> ComplexMatrix {
        let (v, dv) = (&self.frame[i], &self.frame_derivative[i]);
        &ComplexMatrix::outer(dv, v) + &ComplexMatrix::outer(v, dv)
    }

    pub fn rho(&self) -> Result<DensityMatrix> {
        let mut m = ComplexMatrix::zeros(self.dim());
        for v in &self.frame {
            m += &ComplexMatrix::outer(v, v);
        }
        DensityMatrix::new(m.scale(1.0 / self.degeneracy() as f64))
    }

    pub fn drho(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.dim());
        for i in 0..self.degeneracy() {
            m += &self.projector_derivative(i);
        }
        m.scale(1.0 / self.degeneracy() as f64).hermitian_part()
    }
}

/// `L_θ = dη / (dη + 2N(1−η)) · Σ_{i≤N} 2∂(|ψ_i⟩⟨ψ_i|)`.
pub fn sld_theta_degenerate(family: &DegenerateFamily, eta: f64) -> Result<SldOperator> {
    check_eta_range(eta)?;
    let d = family.dim() as f64;
    let n = family.degeneracy() as f64;
    let mut sum = ComplexMatrix::zeros(family.dim());
    for i in 0..family.degeneracy() {
        sum += &family.projector_derivative(i).scale(2.0);
    }
    let k = d * eta / (d * eta + 2.0 * n * (1.0 - eta));
    finish_theta(&family.rho()?, &family.drho(), eta, sum.scale(k))
}

fn eta_weights(lambdas: &[f64], eta: f64) -> Vec<f64> {
    let d = lambdas.len() as f64;
    lambdas
        .iter()
        .map(|&l| {
            let x = d * l - 1.0;
            x / (eta * x + 1.0)
        })
        .collect()
}

/// `L_η = Σ_i (dλ_i − 1)/(η(dλ_i − 1) + 1) |λ_i⟩⟨λ_i|` in the eigenbasis of
/// `ρ_in`. Diverges for rank-deficient inputs as η → 1, hence the interior
/// restriction.
pub fn sld_eta(spectrum: &Spectrum, eta: f64) -> Result<SldOperator> {
    check_eta_interior(eta)?;
    let n = spectrum.dim();
    let g = eta_weights(&spectrum.eigenvalues, eta);
    let mat = spectrum.from_eigenbasis(&ComplexMatrix::diag(&g)).hermitian_part();
    let rho_in = spectrum.reconstruct();
    let mixed = ComplexMatrix::identity(n).scale(1.0 / n as f64);
    let rho_f = &rho_in.scale(eta) + &mixed.scale(1.0 - eta);
    let drho_f = &rho_in - &mixed;
    let residual = sld_residual(&rho_f, &drho_f, &mat);
    Ok(SldOperator::new(mat, Method::Eta, residual))
}

/// `F_η = Σ_i (dλ_i − 1)² / (d[η(dλ_i − 1) + 1])`.
pub fn qfi_eta(lambdas: &[f64], eta: f64) -> Result<f64> {
    check_eta_interior(eta)?;
    let d = lambdas.len() as f64;
    Ok(lambdas
        .iter()
        .map(|&l| {
            let x = d * l - 1.0;
            x * x / (d * (eta * x + 1.0))
        })
        .sum())
}

/// One block of a direct sum: a weighted sub-state (trace = weight) placed
/// on the given basis indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub indices: Vec<usize>,
    pub rho: ComplexMatrix,
}

/// Pauli data of a 2-dim block `ρ_i = μ·1 + r·σ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliBlock {
    pub mu: f64,
    pub r: [f64; 3],
    /// `Tr ρ_i²` of the weighted block.
    pub purity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockDiagonalState {
    dim: usize,
    blocks: Vec<Block>,
}

impl BlockDiagonalState {
    /// Checks that the indices partition `0..dim` and that the direct sum is
    /// a valid density matrix.
    pub fn new(blocks: Vec<Block>) -> Result<Self> {
        let dim: usize = blocks.iter().map(|b| b.indices.len()).sum();
        let mut seen = vec![false; dim];
        for b in &blocks {
            if b.rho.dim() != b.indices.len() {
                return Err(Error::DimensionMismatch {
                    expected: b.indices.len(),
                    found: b.rho.dim(),
                });
            }
            for &i in &b.indices {
                if i >= dim || core::mem::replace(&mut seen[i], true) {
                    return Err(Error::InvalidArgument("block indices must partition 0..dim".into()));
                }
            }
        }
        let state = Self { dim, blocks };
        validate_density(state.to_matrix(), Tolerances::default())?;
        Ok(state)
    }

    /// Contiguous blocks in order.
    pub fn contiguous(blocks: Vec<ComplexMatrix>) -> Result<Self> {
        let mut offset = 0;
        let blocks = blocks
            .into_iter()
            .map(|rho| {
                let indices = (offset..offset + rho.dim()).collect();
                offset += rho.dim();
                Block { indices, rho }
            })
            .collect();
        Self::new(blocks)
    }

    /// Splits `rho` along index sets; entries coupling different sets must
    /// vanish.
    pub fn from_matrix(rho: &ComplexMatrix, index_sets: Vec<Vec<usize>>) -> Result<Self> {
        let leak = off_block_leak(rho, &index_sets);
        if leak > 1e-12 {
            return Err(Error::BlockMismatch { leak });
        }
        Self::new(
            index_sets
                .into_iter()
                .map(|ix| Block {
                    rho: rho.submatrix(&ix),
                    indices: ix,
                })
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn index_sets(&self) -> Vec<Vec<usize>> {
        self.blocks.iter().map(|b| b.indices.clone()).collect()
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.dim);
        for b in &self.blocks {
            m += &b.rho.embed(self.dim, &b.indices);
        }
        m
    }

    pub fn pauli_data(&self, i: usize) -> Option<PauliBlock> {
        let rho = &self.blocks.get(i)?.rho;
        (rho.dim() == 2).then(|| pauli_block(rho))
    }
}

fn pauli_block(rho: &ComplexMatrix) -> PauliBlock {
    let mu = 0.5 * rho.trace().re;
    let r = [
        0.5 * (rho[(0, 1)].re + rho[(1, 0)].re),
        0.5 * (rho[(1, 0)].im - rho[(0, 1)].im),
        0.5 * (rho[(0, 0)].re - rho[(1, 1)].re),
    ];
    PauliBlock {
        mu,
        r,
        purity: rho.trace_product(rho).re,
    }
}

fn off_block_leak(m: &ComplexMatrix, index_sets: &[Vec<usize>]) -> f64 {
    let n = m.dim();
    let mut owner = vec![usize::MAX; n];
    for (k, ix) in index_sets.iter().enumerate() {
        for &i in ix {
            if i < n {
                owner[i] = k;
            }
        }
    }
    let mut leak = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if owner[i] != owner[j] {
                leak = leak.max(m[(i, j)].norm());
            }
        }
    }
    leak
}

/// SLD of one weighted block: `ρ_i L + L ρ_i = 2∂ρ_i`.
fn block_sld(rho: &ComplexMatrix, drho: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = rho.dim();
    let weight = rho.trace().re;
    if weight <= DEFAULT_RANK_TOL {
        let leak = drho.max_abs();
        if leak > 100.0 * DEFAULT_ABS_TOL {
            return Err(Error::RankDrift {
                leak,
                tol: 100.0 * DEFAULT_ABS_TOL,
            });
        }
        return Ok(ComplexMatrix::zeros(n));
    }
    match n {
        1 => Ok(ComplexMatrix::diag(&[drho[(0, 0)].re / weight])),
        2 => Ok(two_dim_block_sld(rho, drho)),
        _ => {
            let sigma = DensityMatrix::new(rho.scale(1.0 / weight))?;
            let s = spectral_decompose(&sigma, DEFAULT_RANK_TOL)?;
            Ok(sld_spectral(&s, &drho.scale(1.0 / weight), DEFAULT_ABS_TOL)?.mat)
        }
    }
}

/// `L_i = (1/μ)(∂ρ_i + ξ ρ_i⁻¹ − ∂μ)` with `ξ = 2μ∂μ − ∂P/4`; `ξ = 0` for a
/// singular block, whose kernel direction is then gauge-projected.
fn two_dim_block_sld(rho: &ComplexMatrix, drho: &ComplexMatrix) -> ComplexMatrix {
    let mu = 0.5 * rho.trace().re;
    let dmu = 0.5 * drho.trace().re;
    let det = (rho[(0, 0)] * rho[(1, 1)] - rho[(0, 1)] * rho[(1, 0)]).re;
    let mut l = drho - &ComplexMatrix::identity(2).scale(dmu);
    if det > DEFAULT_RANK_TOL * mu * mu {
        let dp = 2.0 * rho.trace_product(drho).re;
        let xi = 2.0 * mu * dmu - 0.25 * dp;
        let adj = ComplexMatrix::from_fn(2, |i, j| match (i, j) {
            (0, 0) => rho[(1, 1)],
            (1, 1) => rho[(0, 0)],
            _ => -rho[(i, j)],
        });
        l += &adj.scale(xi / det);
        l.scale(1.0 / mu).hermitian_part()
    } else {
        let support = rho.scale(0.5 / mu);
        project_gauge(&l.scale(1.0 / mu), &support)
    }
}

/// `L = ⊕ L_i`, one block at a time.
pub fn sld_block_diagonal(b: &BlockDiagonalState, drho_blocks: &[ComplexMatrix]) -> Result<SldOperator> {
    if drho_blocks.len() != b.blocks.len() {
        return Err(Error::DimensionMismatch {
            expected: b.blocks.len(),
            found: drho_blocks.len(),
        });
    }
    let mut mat = ComplexMatrix::zeros(b.dim);
    let mut drho = ComplexMatrix::zeros(b.dim);
    for (blk, d) in b.blocks.iter().zip(drho_blocks) {
        if d.dim() != blk.rho.dim() {
            return Err(Error::DimensionMismatch {
                expected: blk.rho.dim(),
                found: d.dim(),
            });
        }
        mat += &block_sld(&blk.rho, d)?.embed(b.dim, &blk.indices);
        drho += &d.embed(b.dim, &blk.indices);
    }
    let residual = sld_residual(&b.to_matrix(), &drho, &mat);
    Ok(SldOperator::new(mat, Method::BlockDiagonal, residual))
}

/// [`sld_block_diagonal`] from a full-size `∂ρ`, which must not couple blocks.
pub fn sld_block_diagonal_full(b: &BlockDiagonalState, drho: &ComplexMatrix) -> Result<SldOperator> {
    let leak = off_block_leak(drho, &b.index_sets());
    if leak > 1e-12 {
        return Err(Error::BlockMismatch { leak });
    }
    let parts: Vec<ComplexMatrix> = b.blocks.iter().map(|blk| drho.submatrix(&blk.indices)).collect();
    sld_block_diagonal(b, &parts)
}

/// `Tr(ρ_i L_i²)` per block; their sum is the QFI.
pub fn block_qfis(b: &BlockDiagonalState, l: &SldOperator) -> Vec<f64> {
    b.blocks
        .iter()
        .map(|blk| {
            let li = l.mat.submatrix(&blk.indices);
            (&blk.rho * &li).trace_product(&li).re
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli;

    #[test]
    fn depolarize_endpoints_and_pure_qubit() {
        let rho = DensityMatrix::new(ComplexMatrix::diag(&[1.0, 0.0])).unwrap();
        assert_eq!(depolarize(&rho, 1.0).unwrap().matrix(), rho.matrix());
        let mixed = depolarize(&rho, 0.0).unwrap();
        assert!((mixed.matrix() - &ComplexMatrix::identity(2).scale(0.5)).max_abs() < 1e-16);
        let f = depolarize(&rho, 0.8).unwrap();
        assert!((f.matrix() - &ComplexMatrix::diag(&[0.9, 0.1])).max_abs() < 1e-15);
        assert!(matches!(depolarize(&rho, 1.2), Err(Error::EtaOutOfRange { .. })));
    }

    #[test]
    fn coefficient_fixed_points() {
        let (a, b) = depolarized_coefficients(1.0, 0.0, 0.8, 2);
        assert!((a - 1.0).abs() < 1e-15 && (b - 0.09).abs() < 1e-15);
        assert_eq!(depolarized_coefficients(0.7, 0.1, 1.0, 3), (0.7, 0.1));
        let (a, b) = depolarized_coefficients(0.7, 0.1, 0.0, 4);
        assert!((a - 0.5).abs() < 1e-16 && (b - 1.0 / 16.0).abs() < 1e-16);
    }

    #[test]
    fn eta_sld_pure_qubit() {
        let rho = DensityMatrix::new(ComplexMatrix::diag(&[1.0, 0.0])).unwrap();
        let s = spectral_decompose(&rho, DEFAULT_RANK_TOL).unwrap();
        let l = sld_eta(&s, 0.5).unwrap();
        assert!((&l.mat - &ComplexMatrix::diag(&[2.0 / 3.0, -2.0])).max_abs() < 1e-14);
        assert!(l.residual < 1e-15);
        assert!((qfi_eta(&[1.0, 0.0], 0.5).unwrap() - 4.0 / 3.0).abs() < 1e-14);
        assert!(matches!(sld_eta(&s, 1.0), Err(Error::EtaBoundary { .. })));
    }

    #[test]
    fn channel_invisible_on_fixed_point() {
        let s = spectral_decompose(&DensityMatrix::maximally_mixed(3), DEFAULT_RANK_TOL).unwrap();
        assert!(sld_eta(&s, 0.3).unwrap().mat.max_abs() < 1e-15);
        assert!(qfi_eta(&[1.0 / 3.0; 3], 0.3).unwrap().abs() < 1e-15);
    }

    #[test]
    fn pure_rotating_qubit_through_channel() {
        let t: f64 = 0.4;
        let v = vec![c64(t.cos(), 0.0), c64(t.sin(), 0.0)];
        let dv = vec![c64(-t.sin(), 0.0), c64(t.cos(), 0.0)];
        let fam = DegenerateFamily::new(vec![v], vec![dv]).unwrap();
        let rho_in = fam.rho().unwrap();
        let l1 = sld_theta_degenerate(&fam, 0.7).unwrap();
        let l2 = sld_theta_depolarized(&rho_in, &fam.drho(), 1.0, 0.7).unwrap();
        assert!((&l1.mat - &l2.mat).max_abs() < 1e-14);
        let pure = sld_theta_depolarized(&rho_in, &fam.drho(), 1.0, 1.0).unwrap();
        assert!((&pure.mat - &fam.drho().scale(2.0)).max_abs() < 1e-14);
    }

    #[test]
    fn single_block_reduces_to_plain_route() {
        let rho = &ComplexMatrix::identity(2).scale(0.5) + &pauli()[0].scale(0.2);
        let drho = pauli()[2].scale(0.1);
        let b = BlockDiagonalState::contiguous(vec![rho.clone()]).unwrap();
        let l = sld_block_diagonal(&b, core::slice::from_ref(&drho)).unwrap();
        let dm = DensityMatrix::new(rho).unwrap();
        let s = spectral_decompose(&dm, DEFAULT_RANK_TOL).unwrap();
        let spectral = sld_spectral(&s, &drho, DEFAULT_ABS_TOL).unwrap();
        assert!((&l.mat - &spectral.mat).max_abs() < 1e-13);
    }

    #[test]
    fn coupled_derivative_rejected() {
        let b = BlockDiagonalState::contiguous(vec![
            ComplexMatrix::diag(&[0.3, 0.2]),
            ComplexMatrix::diag(&[0.25, 0.25]),
        ])
        .unwrap();
        let mut d = ComplexMatrix::zeros(4);
        d = &d
            + &ComplexMatrix::outer(
                &[c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)],
                &[c64(0.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0)],
            );
        let d = d.hermitian_part();
        assert!(matches!(
            sld_block_diagonal_full(&b, &d),
            Err(Error::BlockMismatch { .. })
        ));
    }

    #[test]
    fn pauli_data_reproduces_block() {
        let rho = ComplexMatrix::from_rows(&[
            vec![c64(0.3, 0.0), c64(0.05, -0.02)],
            vec![c64(0.05, 0.02), c64(0.2, 0.0)],
        ])
        .unwrap();
        let b = BlockDiagonalState::contiguous(vec![rho.clone(), ComplexMatrix::diag(&[0.5])]).unwrap();
        let p = b.pauli_data(0).unwrap();
        let [sx, sy, sz] = pauli();
        let mut rebuilt = ComplexMatrix::identity(2).scale(p.mu);
        rebuilt += &sx.scale(p.r[0]);
        rebuilt += &sy.scale(p.r[1]);
        rebuilt += &sz.scale(p.r[2]);
        assert!((&rebuilt - &rho).max_abs() < 1e-15);
    }
}
