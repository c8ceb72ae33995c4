use std::collections::BTreeMap;

use sldkit_core::density::{spectral_decompose, DEFAULT_RANK_TOL};
use sldkit_core::expr::{parse_expression, Expr};
use sldkit_core::model::{BlockSpec, DerivativeMode, ModelKind};
use sldkit_core::qfi::{qfi_from_sld, qfi_lower_bound_for, qfi_quadratic, qfi_spectral};
use sldkit_core::random::{
    random_density_matrix, random_hermitian, random_traceless_hermitian, random_unitary, CounterRng,
};
use sldkit_core::sld::{
    compare_slds, detect_quadratic_class, sld_quadrature, sld_series, sld_spectral, sld_sylvester, DEFAULT_ABS_TOL,
};
use sldkit_core::unitary::UnitarySpec;
use sldkit_core::{c64, ComplexMatrix, DensityMatrix, ModelSpec, ParameterPoint, SldOperator, SolverOptions};

fn ex(s: &str) -> Expr {
    parse_expression(s).unwrap()
}

fn exs(rows: &[&[&str]]) -> Vec<Vec<Expr>> {
    rows.iter().map(|r| r.iter().map(|s| ex(s)).collect()).collect()
}

fn two_param(kind: ModelKind) -> ModelSpec {
    ModelSpec::new(vec!["theta".into(), "phi".into()], BTreeMap::new(), kind).unwrap()
}

fn catalogue() -> Vec<ModelSpec> {
    let hadamard_frame = &[&["sqrt(0.5)", "sqrt(0.5)"][..], &["sqrt(0.5)", "-sqrt(0.5)"][..]];
    vec![
        two_param(ModelKind::ExplicitMatrix {
            entries: exs(&[
                &["0.5 + 0.2*cos(theta)", "0.1*sin(phi) + 0.15*i*cos(theta)"],
                &["0.1*sin(phi) - 0.15*i*cos(theta)", "0.5 - 0.2*cos(theta)"],
            ]),
        }),
        two_param(ModelKind::PureVector {
            amplitudes: vec![ex("cos(theta)"), ex("exp(i*phi)*sin(theta)"), ex("0.3")],
        }),
        two_param(ModelKind::BlochQubit {
            r: [
                ex("0.8*sin(theta)*cos(phi)"),
                ex("0.8*sin(theta)*sin(phi)"),
                ex("0.8*cos(theta)"),
            ],
        }),
        two_param(ModelKind::ClassicalDiagonal {
            weights: vec![ex("1 + theta^2"), ex("exp(phi)"), ex("2 - sin(theta)")],
        }),
        two_param(ModelKind::SpectralEnsemble {
            weights: vec![ex("theta"), ex("phi")],
            frame: exs(hadamard_frame),
        }),
        two_param(ModelKind::Depolarized {
            inner: Box::new(ModelKind::PureVector {
                amplitudes: vec![ex("cos(theta)"), ex("sin(theta)*exp(i*phi)")],
            }),
            eta: ex("0.5 + 0.3*sin(phi)"),
        }),
        two_param(ModelKind::UnitaryChannel {
            initial: Box::new(ModelKind::ClassicalDiagonal {
                weights: vec![ex("theta"), ex("1")],
            }),
            unitary: UnitarySpec::Generator {
                generator: exs(&[&["0", "1"], &["1", "0"]]),
                parameter: "phi".into(),
            },
        }),
        two_param(ModelKind::UnitaryChannel {
            initial: Box::new(ModelKind::BlochQubit {
                r: [ex("0.3"), ex("0"), ex("0.5*theta")],
            }),
            unitary: UnitarySpec::Entries(exs(&[
                &["cos(phi)", "-sin(phi)*exp(-i*theta)"],
                &["sin(phi)*exp(i*theta)", "cos(phi)"],
            ])),
        }),
        two_param(ModelKind::BlockDiagonal {
            blocks: vec![
                BlockSpec {
                    kind: ModelKind::BlochQubit {
                        r: [ex("0.4*cos(phi)"), ex("0.4*sin(phi)"), ex("0.2")],
                    },
                    indices: Some(vec![0, 3]),
                },
                BlockSpec {
                    kind: ModelKind::ClassicalDiagonal {
                        weights: vec![ex("theta"), ex("1")],
                    },
                    indices: Some(vec![1, 2]),
                },
            ],
            weights: vec![ex("theta"), ex("1 + phi^2")],
        }),
        two_param(ModelKind::ThermalTwoGap {
            dim: 3,
            beta: ex("theta"),
            gap1: ex("0.5*phi"),
            gap2: ex("1.5 + phi"),
            frame: None,
        }),
    ]
}

#[test]
fn dual_derivatives_agree_with_finite_differences() {
    let at = ParameterPoint::from_pairs([("theta", 0.7), ("phi", 0.4)]);
    for spec in catalogue() {
        for which in ["theta", "phi"] {
            let dual = spec.eval_derivative(&at, which, DerivativeMode::Dual).unwrap();
            let fd = spec
                .eval_derivative(&at, which, DerivativeMode::FiniteDifference)
                .unwrap();
            let err = (&dual - &fd).max_abs();
            assert!(
                err < 1e-8,
                "{} / {which}: dual vs FD differ by {err:e}",
                spec.kind().name()
            );
            assert!(dual.trace().norm() < 1e-12, "{}: ∂ρ not traceless", spec.kind().name());
            assert!(dual.hermiticity_defect() < 1e-14);
        }
    }
}

#[test]
fn catalogue_qfi_agrees_across_exact_routes() {
    let at = ParameterPoint::from_pairs([("theta", 0.7), ("phi", 0.4)]);
    let opts = SolverOptions::default();
    for spec in catalogue() {
        let (rho, drho) = spec.eval_with_derivative(&at, "theta").unwrap();
        let s = spectral_decompose(&rho, DEFAULT_RANK_TOL).unwrap();
        let a = sld_spectral(&s, &drho, DEFAULT_ABS_TOL).unwrap();
        let b = sld_sylvester(&rho, &drho, &opts).unwrap();
        assert!(
            compare_slds(&a, &b, &s.support_projector).unwrap() < 1e-8,
            "{}",
            spec.kind().name()
        );
        let fa = qfi_from_sld(&rho, &a).value;
        let fb = qfi_from_sld(&rho, &b).value;
        assert!(
            (fa - fb).abs() <= 1e-8 * fa.max(1.0),
            "{}: {fa} vs {fb}",
            spec.kind().name()
        );
    }
}

#[test]
fn kernel_block_does_not_change_qfi() {
    let mut rng = CounterRng::new(31);
    for d in [3, 4, 6] {
        for rank in 1..d {
            let rho = DensityMatrix::new(random_density_matrix(d, rank, 0.0, &mut rng)).unwrap();
            let s = spectral_decompose(&rho, DEFAULT_RANK_TOL).unwrap();
            // Only directions tangent to the fixed-rank manifold are admissible.
            let h = random_hermitian(d, &mut rng);
            let drho = h.commutator(rho.matrix()).scale_c(c64(0.0, 1.0));
            let l = sld_spectral(&s, &drho, DEFAULT_ABS_TOL).unwrap();
            let k = s.kernel_projector();
            let junk = random_hermitian(d, &mut rng).sandwich(&k).scale(50.0);
            let altered = SldOperator::new(&l.mat + &junk, l.method, l.residual);
            let f0 = qfi_from_sld(&rho, &l).value;
            let f1 = qfi_from_sld(&rho, &altered).value;
            assert!((f0 - f1).abs() < 1e-12, "d={d} rank={rank}: {f0} vs {f1}");
        }
    }
}

/// Two distinct eigenvalues with random multiplicities and random moves of
/// both values, plus a random unitary drift.
fn class_instance(d: usize, rng: &mut CounterRng) -> (DensityMatrix, ComplexMatrix) {
    let m_plus = 1 + (rng.uniform() * (d - 1) as f64) as usize;
    let m_minus = d - m_plus;
    let p_minus = rng.range(0.01, 1.0 / d as f64 - 0.01);
    let p_plus = (1.0 - m_minus as f64 * p_minus) / m_plus as f64;
    let dp_plus = rng.range(-2.0, 2.0);
    let dp_minus = -(m_plus as f64) * dp_plus / m_minus as f64;
    let mut p = vec![p_plus; m_plus];
    p.extend(vec![p_minus; m_minus]);
    let mut dp = vec![dp_plus; m_plus];
    dp.extend(vec![dp_minus; m_minus]);
    let u = random_unitary(d, rng);
    let k = random_hermitian(d, rng).scale(rng.range(0.0, 2.0));
    let diag = ComplexMatrix::diag(&p);
    let inner = &ComplexMatrix::diag(&dp) + &k.commutator(&diag).scale_c(c64(0.0, 1.0));
    let rho = &(&u * &diag) * &u.adjoint();
    let drho = &(&u * &inner) * &u.adjoint();
    (DensityMatrix::new(rho.hermitian_part()).unwrap(), drho.hermitian_part())
}

#[test]
fn lower_bound_never_exceeds_closed_form() {
    let mut rng = CounterRng::new(22);
    for i in 0..200 {
        let (rho, drho) = class_instance(2 + i % 4, &mut rng);
        let s = spectral_decompose(&rho, DEFAULT_RANK_TOL).unwrap();
        let c = detect_quadratic_class(&s, 1e-9)
            .unwrap()
            .with_derivatives(rho.matrix(), std::slice::from_ref(&drho));
        let f = qfi_quadratic(&rho, &drho, &c).unwrap();
        assert!(qfi_lower_bound_for(&c).unwrap() <= f.value + 1e-10);
        let oracle = qfi_spectral(&rho, &drho).unwrap();
        assert!(
            (f.value - oracle).abs() <= 1e-8 * oracle.max(1.0),
            "{} vs {oracle}",
            f.value
        );
    }
}

#[test]
fn approximate_routes_track_spectral() {
    let mut rng = CounterRng::new(17);
    let opts = SolverOptions::default();
    for d in [2, 3, 5] {
        for _ in 0..10 {
            let rho = DensityMatrix::new(random_density_matrix(d, d, 0.3, &mut rng)).unwrap();
            let drho = random_traceless_hermitian(d, &mut rng);
            let s = spectral_decompose(&rho, DEFAULT_RANK_TOL).unwrap();
            let exact = sld_spectral(&s, &drho, DEFAULT_ABS_TOL).unwrap();
            let quad = sld_quadrature(&rho, &drho, &opts).unwrap();
            assert!((&quad.mat - &exact.mat).max_abs() < 1e-8);
            let series = sld_series(&rho, &drho, &opts).unwrap();
            let err = (&series.mat - &exact.mat).frobenius();
            assert!(
                err <= series.error_estimate.unwrap(),
                "series error {err:e} above its estimate"
            );
        }
    }
}
