//! Optimal measurement from the SLD eigenbasis, classical Fisher
//! information, and a Monte-Carlo maximum-likelihood harness that checks the
//! Cramér–Rao bound empirically.
//!
//! The measurement is fixed at the true parameter value; adaptive schemes are
//! out of scope.

use alloc::borrow::ToOwned;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::density::{spectral_decompose, DensityMatrix, DEFAULT_RANK_TOL};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, ComplexMatrix};
use crate::model::{ModelSpec, ParameterPoint};
use crate::qfi::qfi_from_sld;
use crate::random::keyed_uniform;
use crate::sld::{sld_spectral, SldOperator, DEFAULT_ABS_TOL};

/// Eigenvalues closer than this share one projector.
const GROUPING_TOL: f64 = 1e-9;
const GRID_POINTS: usize = 512;
const REFINE_TOL: f64 = 1e-8;
const OUTCOME_FLOOR: f64 = 1e-12;

/// A measurement as a list of effects.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    effects: Vec<ComplexMatrix>,
}

impl Povm {
    /// Checks completeness and positivity within `1e-10`.
    pub fn new(effects: Vec<ComplexMatrix>) -> Result<Self> {
        let first = effects
            .first()
            .ok_or_else(|| Error::InvalidArgument("a POVM needs at least one effect".into()))?;
        let n = first.dim();
        let mut total = ComplexMatrix::zeros(n);
        for e in &effects {
            if e.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: e.dim(),
                });
            }
            if e.hermiticity_defect() > 1e-10 {
                return Err(Error::InvalidArgument("POVM effect is not Hermitian".into()));
            }
            let min = hermitian_eigen(e)?.values.last().copied().unwrap_or(0.0);
            if min < -1e-10 {
                return Err(Error::InvalidArgument("POVM effect is not positive".into()));
            }
            total += e;
        }
        let defect = (&total - &ComplexMatrix::identity(n)).max_abs();
        if defect > 1e-10 {
            return Err(Error::InvalidArgument("POVM effects do not sum to the identity".into()));
        }
        Ok(Self { effects })
    }

    pub fn effects(&self) -> &[ComplexMatrix] {
        &self.effects
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn completeness_defect(&self) -> f64 {
        let n = self.effects[0].dim();
        let mut total = ComplexMatrix::zeros(n);
        for e in &self.effects {
            total += e;
        }
        (&total - &ComplexMatrix::identity(n)).max_abs()
    }

    /// `p_x = Tr(E_x ρ)`.
    pub fn probabilities(&self, rho: &ComplexMatrix) -> Vec<f64> {
        self.effects.iter().map(|e| e.trace_product(rho).re).collect()
    }
}

/// Projectors onto the eigenspaces of `L`.
pub fn optimal_measurement(l: &SldOperator) -> Result<Povm> {
    let eig = hermitian_eigen(&l.mat)?;
    let n = l.dim();
    let mut effects = Vec::new();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && eig.values[end - 1] - eig.values[end] <= GROUPING_TOL {
            end += 1;
        }
        let v = &eig.vectors;
        effects.push(ComplexMatrix::from_fn(n, |i, j| {
            (start..end).map(|k| v[(i, k)] * v[(j, k)].conj()).sum()
        }));
        start = end;
    }
    Povm::new(effects)
}

/// `Σ_x (∂p_x)² / p_x` from `ρ` and `∂ρ`.
pub fn classical_fisher_from(povm: &Povm, rho: &ComplexMatrix, drho: &ComplexMatrix) -> Result<f64> {
    let mut total = 0.0;
    for (x, e) in povm.effects.iter().enumerate() {
        let p = e.trace_product(rho).re;
        let dp = e.trace_product(drho).re;
        if p <= OUTCOME_FLOOR {
            if dp.abs() <= OUTCOME_FLOOR {
                continue;
            }
            return Err(Error::SingularOutcome {
                outcome: x,
                probability: p,
                derivative: dp,
            });
        }
        total += dp * dp / p;
    }
    Ok(total)
}

/// Classical Fisher information of `povm` on the model at `at`, along `which`.
pub fn classical_fisher(povm: &Povm, spec: &ModelSpec, at: &ParameterPoint, which: &str) -> Result<f64> {
    let (rho, drho) = spec.eval_with_derivative(at, which)?;
    if povm.effects[0].dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: povm.effects[0].dim(),
        });
    }
    classical_fisher_from(povm, rho.matrix(), &drho)
}

/// Outcome of a Monte-Carlo Cramér–Rao run.
#[derive(Debug, Clone, PartialEq)]
pub struct CrbReport {
    pub theta_true: f64,
    pub shots: usize,
    pub trials: usize,
    pub mean_estimate: f64,
    pub empirical_variance: f64,
    pub qfi: f64,
    /// `shots · F · variance`; close to 1 for an efficient estimator.
    pub ratio: f64,
    pub classical_fisher: f64,
    pub seed: u64,
}

fn eval_density(spec: &ModelSpec, at: &ParameterPoint) -> Result<DensityMatrix> {
    spec.eval(at)
}

/// Simulates `trials` independent experiments of `shots` measurements each
/// in the SLD eigenbasis at the true value, estimates the parameter by
/// maximum likelihood over its declared domain, and compares the spread of
/// the estimates with `1/(shots·F)`.
///
/// Outcomes are drawn from a keyed generator indexed by
/// `(seed, trial, shot)`, so every report is reproducible.
pub fn simulate_crb(
    spec: &ModelSpec,
    at: &ParameterPoint,
    which: &str,
    shots: usize,
    trials: usize,
    seed: u64,
) -> Result<CrbReport> {
    if spec.parameters().len() != 1 {
        return Err(Error::InvalidArgument("scalar parameter required".into()));
    }
    if shots < 100 || trials < 10 {
        return Err(Error::InvalidArgument("need shots ≥ 100 and trials ≥ 10".into()));
    }
    let theta = at
        .get(which)
        .ok_or_else(|| Error::MissingParameter { name: which.to_owned() })?;
    let (lo, hi) = spec
        .domain(which)
        .ok_or_else(|| Error::InvalidArgument("the estimated parameter needs a declared domain".into()))?;
    let margin = 0.01 * (hi - lo);
    if theta - lo < margin || hi - theta < margin {
        return Err(Error::DomainTooNarrow { value: theta, lo, hi });
    }

    let (rho, drho) = spec.eval_with_derivative(at, which)?;
    let s = spectral_decompose(&rho, DEFAULT_RANK_TOL)?;
    let l = sld_spectral(&s, &drho, DEFAULT_ABS_TOL)?;
    let qfi = qfi_from_sld(&rho, &l).value;
    let povm = optimal_measurement(&l)?;
    let cfi = classical_fisher_from(&povm, rho.matrix(), &drho)?;

    let p_true = povm.probabilities(rho.matrix());
    let mut cdf = Vec::with_capacity(p_true.len());
    let mut acc = 0.0;
    for &p in &p_true {
        acc += p.max(0.0);
        cdf.push(acc);
    }

    let probs_at = |t: f64| -> Result<Vec<f64>> {
        let r = eval_density(spec, &at.with(which, t))?;
        Ok(povm.probabilities(r.matrix()))
    };
    let step = (hi - lo) / GRID_POINTS as f64;
    let grid: Vec<f64> = (0..GRID_POINTS).map(|k| lo + (k as f64 + 0.5) * step).collect();
    let grid_probs = grid.iter().map(|&t| probs_at(t)).collect::<Result<Vec<_>>>()?;

    let mut estimates = Vec::with_capacity(trials);
    for trial in 0..trials {
        let mut counts = vec![0u64; cdf.len()];
        for shot in 0..shots {
            let u = keyed_uniform(seed, trial as u64, shot as u64) * acc;
            let x = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
            counts[x] += 1;
        }
        let loglik = |p: &[f64]| log_likelihood(&counts, p);
        let best = (0..GRID_POINTS)
            .max_by(|&a, &b| loglik(&grid_probs[a]).total_cmp(&loglik(&grid_probs[b])))
            .unwrap_or(0);
        let a = grid[best.saturating_sub(1)].max(lo);
        let b = grid[(best + 1).min(GRID_POINTS - 1)].min(hi);
        let est = golden_section(a, b, |t| probs_at(t).map(|p| loglik(&p)))?;
        estimates.push(est);
    }

    let n = estimates.len() as f64;
    let mean = estimates.iter().sum::<f64>() / n;
    let var = estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(CrbReport {
        theta_true: theta,
        shots,
        trials,
        mean_estimate: mean,
        empirical_variance: var,
        qfi,
        ratio: shots as f64 * qfi * var,
        classical_fisher: cfi,
        seed,
    })
}

fn log_likelihood(counts: &[u64], p: &[f64]) -> f64 {
    counts
        .iter()
        .zip(p)
        .filter(|(&c, _)| c > 0)
        .map(|(&c, &p)| if p > 0.0 { c as f64 * p.ln() } else { f64::NEG_INFINITY })
        .sum()
}

/// Maximizes `f` on `[a, b]` down to an interval of width [`REFINE_TOL`].
fn golden_section(mut a: f64, mut b: f64, f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let inv_phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for _ in 0..200 {
        if b - a <= REFINE_TOL {
            return Ok(0.5 * (a + b));
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    Err(Error::NoConvergence {
        reason: "golden-section refinement did not reach the tolerance",
        last: b - a,
        previous: REFINE_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, pauli};
    use crate::sld::Method;

    fn op(m: ComplexMatrix) -> SldOperator {
        SldOperator::new(m, Method::Spectral, 0.0)
    }

    #[test]
    fn diagonal_sld_gives_basis_projectors() {
        let povm = optimal_measurement(&op(ComplexMatrix::diag(&[2.0, -1.0]))).unwrap();
        assert_eq!(povm.len(), 2);
        assert!((&povm.effects()[0] - &ComplexMatrix::diag(&[1.0, 0.0])).max_abs() < 1e-15);
    }

    #[test]
    fn sigma_x_gives_plus_minus() {
        let povm = optimal_measurement(&op(pauli()[0].clone())).unwrap();
        let plus = ComplexMatrix::from_rows(&[vec![c64(0.5, 0.0), c64(0.5, 0.0)], vec![c64(0.5, 0.0), c64(0.5, 0.0)]])
            .unwrap();
        assert!((&povm.effects()[0] - &plus).max_abs() < 1e-15);
    }

    #[test]
    fn degenerate_eigenvalues_are_grouped() {
        let povm = optimal_measurement(&op(ComplexMatrix::diag(&[1.0, 1.0, -2.0]))).unwrap();
        assert_eq!(povm.len(), 2);
    }

    #[test]
    fn trivial_povm_has_no_information() {
        let povm = Povm::new(vec![ComplexMatrix::identity(2)]).unwrap();
        let f = classical_fisher_from(
            &povm,
            &ComplexMatrix::diag(&[0.3, 0.7]),
            &ComplexMatrix::diag(&[1.0, -1.0]),
        );
        assert_eq!(f.unwrap(), 0.0);
    }

    #[test]
    fn singular_outcome_reported() {
        let povm = Povm::new(vec![ComplexMatrix::diag(&[1.0, 0.0]), ComplexMatrix::diag(&[0.0, 1.0])]).unwrap();
        let r = classical_fisher_from(
            &povm,
            &ComplexMatrix::diag(&[1.0, 0.0]),
            &ComplexMatrix::diag(&[-1.0, 1.0]),
        );
        assert!(matches!(r, Err(Error::SingularOutcome { outcome: 1, .. })));
    }

    #[test]
    fn golden_section_finds_parabola_peak() {
        let x = golden_section(0.0, 1.0, |t| Ok(-(t - 0.3141).powi(2))).unwrap();
        assert!((x - 0.3141).abs() < 1e-8);
    }
}
