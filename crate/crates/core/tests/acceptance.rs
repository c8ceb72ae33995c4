//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Tolerances are pinned as constants next to each check.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::process::ExitCode;

use sldkit_core::channels::{
    block_qfis, depolarize, depolarized_coefficients, qfi_eta, sld_block_diagonal_full, sld_eta, Block,
    BlockDiagonalState,
};
use sldkit_core::density::{spectral_decompose, DEFAULT_RANK_TOL};
use sldkit_core::estimation::{classical_fisher_from, optimal_measurement, simulate_crb, Povm};
use sldkit_core::expr::{parse_expression, Expr};
use sldkit_core::linalg::{hermitian_eigen, pauli};
use sldkit_core::model::{ModelKind, ModelSpec, ParameterPoint};
use sldkit_core::qfi::{
    qfi_from_sld, qfi_lower_bound_for, qfi_matrix, qfi_matrix_quadratic, qfi_matrix_two_level, qfi_quadratic,
    qfi_spectral,
};
use sldkit_core::random::{
    random_density_matrix, random_hermitian, random_pure_vector, random_traceless_hermitian, random_unitary, CounterRng,
};
use sldkit_core::sld::{
    compare_slds, detect_quadratic_class, sld_commuting, sld_quadratic_class, sld_quadrature, sld_series, sld_spectral,
    sld_sylvester, SldOperator, DEFAULT_ABS_TOL,
};
use sldkit_core::unitary::{effective_sld, h_operator, qfi_unitary, UnitaryModel, UnitarySpec};
use sldkit_core::{c64, ComplexMatrix, DensityMatrix, Result, SolverOptions};

type Outcome = Result<(bool, String)>;

fn ex(s: &str) -> Expr {
    parse_expression(s).expect("test expression parses")
}

fn model(params: &[&str], domain: &[(&str, f64, f64)], kind: ModelKind) -> ModelSpec {
    let domain: BTreeMap<String, (f64, f64)> = domain.iter().map(|(n, a, b)| (n.to_string(), (*a, *b))).collect();
    ModelSpec::new(params.iter().map(|s| s.to_string()).collect(), domain, kind).expect("valid model")
}

fn max_rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Full-rank random states with a floor so the smallest eigenvalue is at
/// least `0.05/d`, paired with a unit-norm traceless Hermitian direction.
fn random_suite(d: usize, count: usize, seed: u64) -> Vec<(DensityMatrix, ComplexMatrix)> {
    let mut rng = CounterRng::with_stream(seed, d as u64);
    (0..count)
        .map(|_| {
            let rho = DensityMatrix::new(random_density_matrix(d, d, 0.05, &mut rng)).unwrap();
            (rho, random_traceless_hermitian(d, &mut rng))
        })
        .collect()
}

fn criterion_1_2() -> Result<[(bool, String); 2]> {
    const EXACT_RESIDUAL: f64 = 1e-10;
    const QUADRATURE_RESIDUAL: f64 = 1e-6;
    const SLD_AGREEMENT: f64 = 1e-8;
    const QFI_SPREAD: f64 = 1e-8;
    let opts = SolverOptions::default();
    let (mut worst_exact, mut worst_quad, mut worst_cmp, mut worst_spread) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut checked = 0;
    for d in [2, 3, 4, 8] {
        for (rho, drho) in random_suite(d, 100, 1001) {
            let s = spectral_decompose(&rho, DEFAULT_RANK_TOL)?;
            let mut exact: Vec<SldOperator> = vec![
                sld_spectral(&s, &drho, DEFAULT_ABS_TOL)?,
                sld_sylvester(&rho, &drho, &opts)?,
            ];
            if let Some(c) = detect_quadratic_class(&s, 1e-9) {
                exact.push(sld_quadratic_class(&rho, &drho, &c)?);
            }
            for l in &exact {
                worst_exact = worst_exact.max(l.residual);
            }
            worst_quad = worst_quad.max(sld_quadrature(&rho, &drho, &opts)?.residual);
            let qfis: Vec<f64> = exact.iter().map(|l| qfi_from_sld(&rho, l).value).collect();
            for i in 0..exact.len() {
                for j in i + 1..exact.len() {
                    worst_cmp = worst_cmp.max(compare_slds(&exact[i], &exact[j], &s.support_projector)?);
                    worst_spread = worst_spread.max(max_rel(qfis[i], qfis[j]));
                }
            }
            checked += 1;
        }
    }
    Ok([
        (
            worst_exact <= EXACT_RESIDUAL && worst_quad <= QUADRATURE_RESIDUAL,
            format!(
                "{checked} states; worst exact-route residual {worst_exact:.2e} (≤ {EXACT_RESIDUAL:.0e}), quadrature {worst_quad:.2e} (≤ {QUADRATURE_RESIDUAL:.0e})"
            ),
        ),
        (
            worst_cmp <= SLD_AGREEMENT && worst_spread <= QFI_SPREAD,
            format!(
                "worst route distance {worst_cmp:.2e} (≤ {SLD_AGREEMENT:.0e}), worst relative QFI spread {worst_spread:.2e} (≤ {QFI_SPREAD:.0e})"
            ),
        ),
    ])
}

fn criterion_3() -> Outcome {
    const TOL: f64 = 1e-9;
    let m = model(
        &["theta"],
        &[],
        ModelKind::PureVector {
            amplitudes: vec![ex("cos(theta)"), ex("sin(theta)")],
        },
    );
    let mut worst = 0.0f64;
    for k in 0..50 {
        let at = ParameterPoint::single("theta", PI * k as f64 / 50.0);
        let (rho, drho) = m.eval_with_derivative(&at, "theta")?;
        worst = worst.max((qfi_spectral(&rho, &drho)? - 4.0).abs());
    }
    Ok((
        worst <= TOL,
        format!("50 grid points, max |F − 4| = {worst:.2e} (≤ {TOL:.0e})"),
    ))
}

fn criterion_4() -> Outcome {
    const TOL: f64 = 1e-12;
    let m = model(
        &["theta"],
        &[],
        ModelKind::ClassicalDiagonal {
            weights: vec![ex("theta"), ex("1 - theta")],
        },
    );
    let (rho, drho) = m.eval_with_derivative(&ParameterPoint::single("theta", 0.25), "theta")?;
    let s = spectral_decompose(&rho, DEFAULT_RANK_TOL)?;
    let want = ComplexMatrix::diag(&[4.0, -4.0 / 3.0]);
    let mut worst_l = 0.0f64;
    let mut worst_f = 0.0f64;
    for l in [
        sld_commuting(&s, &drho, DEFAULT_ABS_TOL)?,
        sld_spectral(&s, &drho, DEFAULT_ABS_TOL)?,
    ] {
        worst_l = worst_l.max((&l.mat - &want).max_abs());
        worst_f = worst_f.max((qfi_from_sld(&rho, &l).value - 16.0 / 3.0).abs());
    }
    Ok((
        worst_l <= TOL && worst_f <= TOL,
        format!(
            "commuting and spectral: |L − diag(4, −4/3)| = {worst_l:.1e}, |F − 16/3| = {worst_f:.1e} (≤ {TOL:.0e})"
        ),
    ))
}

/// Two-valued state `U e^{iθK} D(θ) e^{−iθK} U†` at θ = 0, with the
/// eigenvalues moving along θ while their multiplicities stay fixed.
fn two_valued_instance(d: usize, rng: &mut CounterRng) -> (DensityMatrix, ComplexMatrix) {
    let m_plus = 1 + (rng.uniform() * (d - 1) as f64) as usize;
    let m_minus = d - m_plus;
    let p_minus = rng.range(0.02, 1.0 / d as f64 - 0.02);
    let p_plus = (1.0 - m_minus as f64 * p_minus) / m_plus as f64;
    let dp_plus = rng.range(-1.0, 1.0);
    let dp_minus = -(m_plus as f64) * dp_plus / m_minus as f64;
    let mut p = vec![p_plus; m_plus];
    p.extend(vec![p_minus; m_minus]);
    let mut dp = vec![dp_plus; m_plus];
    dp.extend(vec![dp_minus; m_minus]);
    let u = random_unitary(d, rng);
    let k = random_hermitian(d, rng);
    let diag = ComplexMatrix::diag(&p);
    let inner = &ComplexMatrix::diag(&dp) + &k.commutator(&diag).scale_c(c64(0.0, 1.0));
    let rho = &(&u * &diag) * &u.adjoint();
    let drho = &(&u * &inner) * &u.adjoint();
    (DensityMatrix::new(rho.hermitian_part()).unwrap(), drho.hermitian_part())
}

fn criterion_5() -> Outcome {
    const REL: f64 = 1e-8;
    const BOUND_SLACK: f64 = 1e-10;
    let mut rng = CounterRng::new(5005);
    let mut cases = Vec::new();
    for (rho, drho) in random_suite(2, 200, 5005) {
        cases.push((rho, drho));
    }
    for i in 0..100 {
        cases.push(two_valued_instance(3 + i % 2, &mut rng));
    }
    let (mut worst_rel, mut worst_gap) = (0.0f64, f64::NEG_INFINITY);
    let mut varying_alpha = 0;
    let mut worst_published = 0.0f64;
    for (rho, drho) in &cases {
        let s = spectral_decompose(rho, DEFAULT_RANK_TOL)?;
        let c = match detect_quadratic_class(&s, 1e-9) {
            Some(c) => c.with_derivatives(rho.matrix(), std::slice::from_ref(drho)),
            None => {
                return Ok((
                    false,
                    "a constructed instance was not detected as quadratic-class".into(),
                ))
            }
        };
        if c.d_alpha[0].abs() > 1e-6 {
            varying_alpha += 1;
        }
        let f = qfi_quadratic(rho, drho, &c)?.value;
        let m = c.support_rank as f64;
        let published = f - (m - 1.0) * c.d_alpha[0] * c.d_beta[0] / (c.alpha * c.alpha);
        worst_published = worst_published.max(max_rel(published, qfi_spectral(rho, drho)?));
        worst_rel = worst_rel.max(max_rel(f, qfi_spectral(rho, drho)?));
        worst_gap = worst_gap.max(qfi_lower_bound_for(&c)? - f);
    }
    Ok((
        worst_rel <= REL && worst_gap <= BOUND_SLACK,
        format!(
            "{} instances ({varying_alpha} with ∂α ≠ 0): worst relative error {worst_rel:.2e} (≤ {REL:.0e}), max(bound − F) = {worst_gap:.2e} (≤ {BOUND_SLACK:.0e}); the 2M−1 cross coefficient would err by up to {worst_published:.1e}",
            cases.len()
        ),
    ))
}

fn criterion_6() -> Outcome {
    const TOL: f64 = 1e-10;
    let m = model(
        &["theta"],
        &[],
        ModelKind::BlochQubit {
            r: [ex("0"), ex("0"), ex("theta")],
        },
    );
    let (rho, drho) = m.eval_with_derivative(&ParameterPoint::single("theta", 0.6), "theta")?;
    let s = spectral_decompose(&rho, DEFAULT_RANK_TOL)?;
    let c = detect_quadratic_class(&s, 1e-9).expect("qubits are quadratic-class");
    let values = [
        ("closed form", qfi_quadratic(&rho, &drho, &c)?.value),
        (
            "spectral",
            qfi_from_sld(&rho, &sld_spectral(&s, &drho, DEFAULT_ABS_TOL)?).value,
        ),
        (
            "sylvester",
            qfi_from_sld(&rho, &sld_sylvester(&rho, &drho, &SolverOptions::default())?).value,
        ),
    ];
    let worst = values.iter().map(|(_, f)| (f - 1.5625).abs()).fold(0.0, f64::max);
    let detail = values
        .iter()
        .map(|(n, f)| format!("{n} {f:.12}"))
        .collect::<Vec<_>>()
        .join(", ");
    Ok((
        worst <= TOL,
        format!("{detail}; max |F − 1.5625| = {worst:.1e} (≤ {TOL:.0e})"),
    ))
}

fn criterion_7() -> Outcome {
    const TOL: f64 = 1e-12;
    let (a, b) = depolarized_coefficients(1.0, 0.0, 0.8, 2);
    let mut rng = CounterRng::new(7007);
    let psi = random_pure_vector(2, &mut rng);
    let rho_f = depolarize(&DensityMatrix::pure(&psi)?, 0.8)?;
    let s = spectral_decompose(&rho_f, DEFAULT_RANK_TOL)?;
    let c = detect_quadratic_class(&s, 1e-9).expect("depolarized qubit is quadratic-class");
    let err = [
        (a - 1.0).abs(),
        (b - 0.09).abs(),
        (c.alpha - a).abs(),
        (c.beta - b).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    Ok((
        err <= TOL,
        format!(
            "formula (α, β) = ({a}, {b}); detected ({:.15}, {:.15}); max error {err:.1e} (≤ {TOL:.0e})",
            c.alpha, c.beta
        ),
    ))
}

fn criterion_8() -> Outcome {
    const TOL: f64 = 1e-10;
    let mut rng = CounterRng::new(8008);
    let psi = random_pure_vector(2, &mut rng);
    let rho_in = DensityMatrix::pure(&psi)?;
    let s_in = spectral_decompose(&rho_in, DEFAULT_RANK_TOL)?;
    let mixed = ComplexMatrix::identity(2).scale(0.5);
    let deta = rho_in.matrix() - &mixed;
    let mut worst = 0.0f64;
    for k in 1..=9 {
        let eta = k as f64 / 10.0;
        let exact = 1.0 / (1.0 - eta * eta);
        let sum = qfi_eta(&s_in.eigenvalues, eta)?;
        let rho_f = depolarize(&rho_in, eta)?;
        let via_sld = qfi_from_sld(&rho_f, &sld_eta(&s_in, eta)?).value;
        // Σ (∂p)²/p over the eigenvalues of ρ_f, with ∂p_i = ⟨v_i|∂ρ_f|v_i⟩.
        let eig = hermitian_eigen(rho_f.matrix())?;
        let brute: f64 = (0..2)
            .map(|i| {
                let v = eig.vectors.column(i);
                let dp: f64 = (0..2)
                    .flat_map(|a| (0..2).map(move |b| (a, b)))
                    .map(|(a, b)| (v[a].conj() * deta[(a, b)] * v[b]).re)
                    .sum();
                dp * dp / eig.values[i]
            })
            .sum();
        for f in [sum, via_sld, brute] {
            worst = worst.max((f - exact).abs());
        }
    }
    let general = qfi_eta(&[1.0, 0.0], 0.5)?;
    let naive_pure_input_formula = |d: f64, eta: f64| (d - 1.0).powi(2) / (d * eta + 1.0 - eta).powi(2);
    let printed = naive_pure_input_formula(2.0, 0.5);
    let discrepancy =
        (general - 4.0 / 3.0).abs() < 1e-12 && (printed - 4.0 / 9.0).abs() < 1e-15 && (general - printed).abs() > 0.5;
    Ok((
        worst <= TOL && discrepancy,
        format!(
            "η = 0.1..0.9: max deviation from 1/(1−η²) across spectral sum, Tr(ρL²), Σ(∂p)²/p = {worst:.1e} (≤ {TOL:.0e}); d=2, η=0.5: sum {general:.6} vs (d−1)²/(dη+1−η)² = {printed:.6}"
        ),
    ))
}

fn criterion_9() -> Outcome {
    const TOL: f64 = 1e-9;
    const PHASE_TOL: f64 = 1e-10;
    let mut rng = CounterRng::new(9009);
    let mut worst_frame = 0.0f64;
    let mut worst_pure = 0.0f64;
    for draw in 0..20 {
        let d = 2 + draw % 2;
        let rho_in = DensityMatrix::new(random_density_matrix(d, d, 0.0, &mut rng))?;
        let g = random_hermitian(d, &mut rng);
        let theta = rng.range(-1.0, 1.0);
        let at = ParameterPoint::single("theta", theta);
        let u = UnitaryModel::from_generator("theta", &g)?;
        let h = h_operator(&u, &at, "theta")?;
        let f_frame = qfi_unitary(&rho_in, &h)?;
        let UnitarySpec::Generator { .. } = u.spec() else {
            unreachable!()
        };
        let direct = model(
            &["theta"],
            &[],
            ModelKind::UnitaryChannel {
                initial: Box::new(ModelKind::constant(rho_in.matrix())),
                unitary: u.spec().clone(),
            },
        );
        let (rho, drho) = direct.eval_with_derivative(&at, "theta")?;
        worst_frame = worst_frame.max((f_frame - qfi_spectral(&rho, &drho)?).abs());

        let pure = DensityMatrix::pure(&random_pure_vector(d, &mut rng))?;
        let s = spectral_decompose(&pure, DEFAULT_RANK_TOL)?;
        let expected = h.mat.commutator(pure.matrix()).scale_c(c64(0.0, 2.0));
        let d_eff = h.mat.commutator(pure.matrix()).scale_c(c64(0.0, 1.0));
        let spectral = sld_spectral(&s, &d_eff, DEFAULT_ABS_TOL)?;
        let eff = effective_sld(&pure, &h)?;
        let target = SldOperator::new(expected, spectral.method, 0.0);
        worst_pure = worst_pure
            .max(compare_slds(&eff, &target, &s.support_projector)?)
            .max(compare_slds(&spectral, &target, &s.support_projector)?);
    }
    let plus = DensityMatrix::pure(&sldkit_core::density::plus_state())?;
    let phase = UnitaryModel::from_generator("theta", &pauli()[2].scale(0.5))?;
    let h = h_operator(&phase, &ParameterPoint::single("theta", 0.0), "theta")?;
    let f_phase = qfi_unitary(&plus, &h)?;
    Ok((
        worst_frame <= TOL && worst_pure <= TOL && (f_phase - 1.0).abs() <= PHASE_TOL,
        format!(
            "20 draws: frame vs direct {worst_frame:.1e}, pure L_eff vs 2i[H,ρ] {worst_pure:.1e} (≤ {TOL:.0e}); phase example F = {f_phase:.12}"
        ),
    ))
}

fn random_block(rng: &mut CounterRng, weight: f64) -> ComplexMatrix {
    random_density_matrix(2, 2, 0.05, rng).scale(weight)
}

fn criterion_10() -> Outcome {
    const ADDITIVITY: f64 = 1e-10;
    const ORACLE: f64 = 1e-9;
    let mut rng = CounterRng::new(1010);
    let (mut worst_add, mut worst_oracle) = (0.0f64, 0.0f64);
    for _ in 0..50 {
        let w = rng.range(0.2, 0.8);
        let outer = vec![0, 3];
        let inner = vec![1, 2];
        let b = BlockDiagonalState::new(vec![
            Block {
                indices: outer.clone(),
                rho: random_block(&mut rng, w),
            },
            Block {
                indices: inner.clone(),
                rho: random_block(&mut rng, 1.0 - w),
            },
        ])?;
        // Derivative: weight shift between blocks plus traceless changes within each.
        let dw = rng.range(-1.0, 1.0);
        let d_outer = &random_traceless_hermitian(2, &mut rng).scale(0.3) + &ComplexMatrix::identity(2).scale(dw / 2.0);
        let d_inner = &random_traceless_hermitian(2, &mut rng).scale(0.3) - &ComplexMatrix::identity(2).scale(dw / 2.0);
        let drho = &d_outer.embed(4, &outer) + &d_inner.embed(4, &inner);
        let rho = DensityMatrix::new(b.to_matrix())?;
        let s = spectral_decompose(&rho, DEFAULT_RANK_TOL)?;
        let spectral = sld_spectral(&s, &drho, DEFAULT_ABS_TOL)?;
        let blockwise = sld_block_diagonal_full(&b, &drho)?;
        let full = qfi_from_sld(&rho, &spectral).value;
        let parts: f64 = block_qfis(&b, &blockwise).iter().sum();
        worst_add = worst_add.max((full - parts).abs());
        worst_oracle = worst_oracle.max(compare_slds(&blockwise, &spectral, &s.support_projector)?);
    }
    Ok((
        worst_add <= ADDITIVITY && worst_oracle <= ORACLE,
        format!(
            "50 X states: |F − Σ F_i| ≤ {worst_add:.1e} (≤ {ADDITIVITY:.0e}); two-dim block formula vs spectral {worst_oracle:.1e} (≤ {ORACLE:.0e})"
        ),
    ))
}

fn criterion_11() -> Outcome {
    const SYM: f64 = 1e-10;
    const PSD: f64 = -1e-9;
    const MATCH: f64 = 1e-9;
    let models = [
        model(
            &["t1", "t2"],
            &[],
            ModelKind::BlochQubit {
                r: [ex("0.7*sin(t1)*cos(t2)"), ex("0.7*sin(t1)*sin(t2)"), ex("0.7*cos(t1)")],
            },
        ),
        model(
            &["t1", "t2"],
            &[],
            ModelKind::BlochQubit {
                r: [
                    ex("(0.4 + 0.3*t1)*cos(t2)"),
                    ex("(0.4 + 0.3*t1)*sin(t2)"),
                    ex("0.2*t1*t2"),
                ],
            },
        ),
    ];
    let params = vec!["t1".to_string(), "t2".to_string()];
    let mut rng = CounterRng::new(1111);
    let (mut asym, mut min_eig, mut diag, mut class, mut two_level) = (0.0f64, f64::INFINITY, 0.0f64, 0.0f64, 0.0f64);
    for m in &models {
        for _ in 0..10 {
            let at = ParameterPoint::from_pairs([("t1", rng.range(0.2, 1.0)), ("t2", rng.range(-PI, PI))]);
            let (rho, d1) = m.eval_with_derivative(&at, "t1")?;
            let (_, d2) = m.eval_with_derivative(&at, "t2")?;
            let s = spectral_decompose(&rho, DEFAULT_RANK_TOL)?;
            let slds = vec![
                sld_spectral(&s, &d1, DEFAULT_ABS_TOL)?,
                sld_spectral(&s, &d2, DEFAULT_ABS_TOL)?,
            ];
            let fm = qfi_matrix(&rho, params.clone(), slds)?;
            asym = asym.max(fm.asymmetry());
            min_eig = min_eig.min(fm.min_eigenvalue()?);
            for (i, d) in [&d1, &d2].into_iter().enumerate() {
                diag = diag.max((fm.mat[i][i] - qfi_spectral(&rho, d)?).abs());
            }
            let drhos = [d1.clone(), d2.clone()];
            let c = detect_quadratic_class(&s, 1e-9).expect("qubit");
            let fq = qfi_matrix_quadratic(&rho, params.clone(), &drhos, &c)?;
            let ft = qfi_matrix_two_level(&rho, params.clone(), &drhos)?;
            for i in 0..2 {
                for j in 0..2 {
                    class = class.max((fq.mat[i][j] - fm.mat[i][j]).abs());
                    two_level = two_level.max((ft.mat[i][j] - fm.mat[i][j]).abs());
                }
            }
        }
    }
    Ok((
        asym <= SYM && min_eig >= PSD && diag <= MATCH && class <= MATCH && two_level <= MATCH,
        format!(
            "20 points: asymmetry {asym:.1e}, min eigenvalue {min_eig:.2e}, diagonal vs scalar {diag:.1e}, class formula {class:.1e}, two-level form {two_level:.1e}"
        ),
    ))
}

/// `E_k = S^{−1/2} A_k S^{−1/2}` for random positive `A_k` with `S = Σ A_k`.
fn random_povm(d: usize, outcomes: usize, rng: &mut CounterRng) -> Result<Povm> {
    let parts: Vec<ComplexMatrix> = (0..outcomes)
        .map(|_| {
            let g = sldkit_core::random::ginibre(d, rng);
            (&g * &g.adjoint()).hermitian_part()
        })
        .collect();
    let mut total = ComplexMatrix::zeros(d);
    for p in &parts {
        total += p;
    }
    let eig = hermitian_eigen(&total)?;
    let inv_sqrt: Vec<f64> = eig.values.iter().map(|v| 1.0 / v.sqrt()).collect();
    let w = &(&eig.vectors * &ComplexMatrix::diag(&inv_sqrt)) * &eig.vectors.adjoint();
    Povm::new(parts.iter().map(|p| (&(&w * p) * &w).hermitian_part()).collect())
}

fn criterion_12() -> Outcome {
    const REL: f64 = 1e-6;
    const SLACK: f64 = 1e-6;
    let mut rng = CounterRng::new(1212);
    let (mut worst_rel, mut worst_excess) = (0.0f64, f64::NEG_INFINITY);
    for (rho, drho) in random_suite(2, 50, 1212) {
        let s = spectral_decompose(&rho, DEFAULT_RANK_TOL)?;
        let l = sld_spectral(&s, &drho, DEFAULT_ABS_TOL)?;
        let f = qfi_from_sld(&rho, &l).value;
        let povm = optimal_measurement(&l)?;
        worst_rel = worst_rel.max(max_rel(classical_fisher_from(&povm, rho.matrix(), &drho)?, f));
        for outcomes in [2, 3, 4] {
            let random = random_povm(2, outcomes, &mut rng)?;
            worst_excess = worst_excess.max(classical_fisher_from(&random, rho.matrix(), &drho)? - f);
        }
    }
    Ok((
        worst_rel <= REL && worst_excess <= SLACK,
        format!(
            "50 qubits: SLD-basis Fisher vs QFI relative {worst_rel:.1e} (≤ {REL:.0e}); 150 random POVMs, max(CFI − F) = {worst_excess:.2e} (≤ {SLACK:.0e})"
        ),
    ))
}

fn criterion_13() -> Outcome {
    const RATIO: (f64, f64) = (0.9, 1.3);
    const SHRINK: (f64, f64) = (3.2, 5.0);
    let m = model(
        &["theta"],
        &[("theta", 0.0, 1.0)],
        ModelKind::ClassicalDiagonal {
            weights: vec![ex("theta"), ex("1 - theta")],
        },
    );
    let at = ParameterPoint::single("theta", 0.3);
    let base = simulate_crb(&m, &at, "theta", 10_000, 200, 42)?;
    let more = simulate_crb(&m, &at, "theta", 40_000, 200, 42)?;
    let again = simulate_crb(&m, &at, "theta", 10_000, 200, 42)?;
    let shrink = base.empirical_variance / more.empirical_variance;
    let identical = format!("{base:?}") == format!("{again:?}");
    Ok((
        (RATIO.0..=RATIO.1).contains(&base.ratio) && (SHRINK.0..=SHRINK.1).contains(&shrink) && identical,
        format!(
            "ratio n·F·Var = {:.4} (in [{}, {}]); variance shrink ×{shrink:.3} (in [{}, {}]); rerun identical: {identical}",
            base.ratio, RATIO.0, RATIO.1, SHRINK.0, SHRINK.1
        ),
    ))
}

fn criterion_14() -> Outcome {
    const DEFAULT_ESTIMATE: f64 = 1e-6;
    let mut rng = CounterRng::new(1414);
    let (mut worst_estimate, mut violations, mut not_improving) = (0.0f64, 0, 0);
    let count = 50;
    for _ in 0..count {
        // Inside the stability window: both eigenvalues in [0.25, 0.75].
        let p = rng.range(0.25, 0.75);
        let (m, _) = sldkit_core::random::random_state_with_spectrum(&[p, 1.0 - p], &mut rng);
        let rho = DensityMatrix::new(m)?;
        let drho = random_traceless_hermitian(2, &mut rng);
        let s = spectral_decompose(&rho, DEFAULT_RANK_TOL)?;
        let exact = sld_spectral(&s, &drho, DEFAULT_ABS_TOL)?;
        let mut previous = f64::INFINITY;
        for s_value in [Some(2.0), Some(5.0), Some(10.0), Some(20.0), None] {
            let mut opts = SolverOptions::default();
            opts.series.s = s_value;
            let l = sld_series(&rho, &drho, &opts)?;
            let err = (&l.mat - &exact.mat).frobenius();
            let estimate = l.error_estimate.unwrap_or(f64::INFINITY);
            if err > estimate {
                violations += 1;
            }
            if s_value.is_none() {
                worst_estimate = worst_estimate.max(estimate);
            }
            if err > previous + 1e-12 {
                not_improving += 1;
            }
            previous = err;
        }
    }
    Ok((
        violations == 0 && not_improving == 0 && worst_estimate <= DEFAULT_ESTIMATE,
        format!(
            "{count} qubits, s ∈ {{2, 5, 10, 20, default}}: error above estimate {violations} times, non-decreasing error {not_improving} times; worst default-s estimate {worst_estimate:.2e} (≤ {DEFAULT_ESTIMATE:.0e})"
        ),
    ))
}

fn main() -> ExitCode {
    let mut failures = 0;
    let mut report = |n: usize, name: &str, r: Outcome| {
        let (ok, detail) = match r {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failures += 1;
        }
        println!("{} {n:>2} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    };
    match criterion_1_2() {
        Ok([c1, c2]) => {
            report(1, "defining-equation residual", Ok(c1));
            report(2, "cross-route agreement", Ok(c2));
        }
        Err(e) => {
            report(1, "defining-equation residual", Err(e.clone()));
            report(2, "cross-route agreement", Err(e));
        }
    }
    report(3, "pure-family QFI", criterion_3());
    report(4, "commuting case", criterion_4());
    report(5, "quadratic-class closed form", criterion_5());
    report(6, "Bloch radial check", criterion_6());
    report(7, "depolarizing coefficients", criterion_7());
    report(8, "η-estimation consistency", criterion_8());
    report(9, "unitary frame identity", criterion_9());
    report(10, "block-diagonal additivity", criterion_10());
    report(11, "QFI matrix", criterion_11());
    report(12, "optimal measurement", criterion_12());
    report(13, "Monte-Carlo Cramér–Rao", criterion_13());
    report(14, "series-route convergence", criterion_14());
    if failures == 0 {
        println!("all 14 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
