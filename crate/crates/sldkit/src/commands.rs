use std::io::Write;

use log::{debug, info, warn};
use sldkit_core::density::{spectral_decompose, Spectrum};
use sldkit_core::estimation::simulate_crb;
use sldkit_core::qfi::{qfi_from_sld, qfi_matrix, qfi_matrix_quadratic, qfi_quadratic_with, QfiResult};
use sldkit_core::sld::{
    compare_slds, detect_quadratic_class, quadratic_coefficient_derivatives, sld_commuting, sld_quadratic_class_with,
    sld_quadrature, sld_series, sld_spectral, sld_sylvester, QuadraticClassCoefficients, CLASS_TOL,
};
use sldkit_core::{ComplexMatrix, DensityMatrix, Error, ModelSpec, ParameterPoint, SldOperator, SolverOptions};

use crate::cli::{CommonArgs, CrbArgs, MethodChoice, QfiArgs, SldArgs, XvalArgs};
use crate::error::{error_name, CliError};
use crate::model_file::load_model;
use crate::output::{
    complex_rows, CrbRecord, Diagnostics, Emitter, PairRecord, Point, QfiMatrixRecord, QfiRecord, RouteRecord,
    SldRecord, XvalRecord,
};

/// Exact routes must agree to this distance (and relative QFI spread).
pub const XVAL_THRESHOLD: f64 = 1e-8;

/// Parses `name=value`.
fn parse_assignment(text: &str) -> Result<(String, f64), CliError> {
    let (name, value) = text
        .split_once('=')
        .ok_or_else(|| CliError::input(format!("expected name=value, got `{text}`")))?;
    let value: f64 = value
        .trim()
        .parse()
        .map_err(|_| CliError::input(format!("`{value}` is not a number")))?;
    Ok((name.trim().to_string(), value))
}

/// Parses `name=lo:hi:steps` into the grid values.
fn parse_sweep(text: &str) -> Result<(String, Vec<f64>), CliError> {
    let bad = || CliError::input(format!("expected name=lo:hi:steps, got `{text}`"));
    let (name, range) = text.split_once('=').ok_or_else(bad)?;
    let parts: Vec<&str> = range.split(':').collect();
    let [lo, hi, steps] = parts.as_slice() else {
        return Err(bad());
    };
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    let steps: usize = steps.trim().parse().map_err(|_| bad())?;
    if steps == 0 || !lo.is_finite() || !hi.is_finite() {
        return Err(bad());
    }
    let values = if steps == 1 {
        vec![lo]
    } else {
        (0..steps)
            .map(|k| lo + (hi - lo) * k as f64 / (steps - 1) as f64)
            .collect()
    };
    Ok((name.trim().to_string(), values))
}

struct Setup {
    spec: ModelSpec,
    points: Vec<ParameterPoint>,
    params: Vec<String>,
    opts: SolverOptions,
}

fn setup(c: &CommonArgs) -> Result<Setup, CliError> {
    let spec = load_model(&c.model)?;
    let declared = spec.parameters();
    let check = |name: &str| {
        if declared.iter().any(|p| p == name) {
            Ok(())
        } else {
            Err(CliError::from(Error::UnknownParameter { name: name.to_string() }))
        }
    };
    let mut base = ParameterPoint::new();
    for a in &c.at {
        let (name, value) = parse_assignment(a)?;
        check(&name)?;
        base.set(&name, value);
    }
    let points = match &c.sweep {
        Some(s) => {
            let (name, values) = parse_sweep(s)?;
            check(&name)?;
            values.into_iter().map(|v| base.with(&name, v)).collect()
        }
        None => vec![base],
    };
    let params = match &c.param {
        Some(p) => {
            check(p)?;
            vec![p.clone()]
        }
        None => declared.to_vec(),
    };
    let opts = SolverOptions {
        abs_tol: c.tol,
        ..SolverOptions::default()
    };
    opts.validate()?;
    Ok(Setup {
        spec,
        points,
        params,
        opts,
    })
}

fn point_map(at: &ParameterPoint) -> Point {
    at.iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn not_in_class() -> CliError {
    CliError::solver(
        "NotInClass: state is not in the quadratic class (more than two distinct eigenvalues, or maximally mixed)",
    )
}

/// Closed-form coefficients with derivatives, optionally shifted.
fn class_with_shift(
    rho: &DensityMatrix,
    drho: &ComplexMatrix,
    s: &Spectrum,
    shift: f64,
) -> Option<(QuadraticClassCoefficients, f64, f64)> {
    let c = detect_quadratic_class(s, CLASS_TOL)?;
    let (da, db) = quadratic_coefficient_derivatives(rho.matrix(), drho, &c);
    Some((c, da + shift, db + shift))
}

/// One SLD by the requested route, with its QFI.
fn solve(
    rho: &DensityMatrix,
    drho: &ComplexMatrix,
    s: &Spectrum,
    method: MethodChoice,
    opts: &SolverOptions,
    shift: f64,
) -> Result<(SldOperator, QfiResult), CliError> {
    let method = match method {
        MethodChoice::Auto if detect_quadratic_class(s, CLASS_TOL).is_some() => MethodChoice::ClosedForm,
        MethodChoice::Auto => MethodChoice::Spectral,
        m => m,
    };
    let l = match method {
        MethodChoice::ClosedForm => {
            let (c, da, db) = class_with_shift(rho, drho, s, shift).ok_or_else(not_in_class)?;
            let q = qfi_quadratic_with(rho, drho, &c, da, db)?;
            if let Some(diff) = q.diagnostics.oracle_difference {
                if diff > XVAL_THRESHOLD * q.value.abs().max(1.0) {
                    warn!("closed-form QFI differs from the spectral value by {diff:e}");
                }
            }
            return Ok((sld_quadratic_class_with(rho, drho, &c, da, db)?, q));
        }
        MethodChoice::Spectral | MethodChoice::Auto => sld_spectral(s, drho, opts.abs_tol)?,
        MethodChoice::Sylvester => sld_sylvester(rho, drho, opts)?,
        MethodChoice::Quadrature => sld_quadrature(rho, drho, opts)?,
        MethodChoice::Series => sld_series(rho, drho, opts)?,
    };
    let q = qfi_from_sld(rho, &l);
    Ok((l, q))
}

fn evaluate(
    setup: &Setup,
    at: &ParameterPoint,
    which: &str,
) -> Result<(DensityMatrix, ComplexMatrix, Spectrum), CliError> {
    let (rho, drho) = setup.spec.eval_with_derivative(at, which)?;
    let s = spectral_decompose(&rho, setup.opts.rank_tol)?;
    debug!(
        "point {:?}: support rank {} of {}",
        point_map(at),
        s.support_rank,
        s.dim()
    );
    Ok((rho, drho, s))
}

pub fn cmd_sld<W: Write>(args: &SldArgs, out: &mut Emitter<W>) -> Result<(), CliError> {
    let setup = setup(&args.common)?;
    for at in &setup.points {
        for which in &setup.params {
            let (rho, drho, s) = evaluate(&setup, at, which)?;
            let (l, _) = solve(
                &rho,
                &drho,
                &s,
                args.method,
                &setup.opts,
                args.common.perturb_closed_form,
            )?;
            info!("{which}: {} route, residual {:e}", l.method.name(), l.residual);
            out.emit(&SldRecord {
                theta: point_map(at),
                parameter: which.clone(),
                l: complex_rows(&l.mat),
                gauge: l.gauge.name(),
                residual: l.residual,
                method: l.method.name(),
                error_estimate: l.error_estimate,
            })?;
        }
    }
    Ok(())
}

pub fn cmd_qfi<W: Write>(args: &QfiArgs, out: &mut Emitter<W>) -> Result<(), CliError> {
    let setup = setup(&args.common)?;
    for at in &setup.points {
        if args.matrix {
            out.emit(&qfi_matrix_record(&setup, at, args)?)?;
            continue;
        }
        for which in &setup.params {
            let (rho, drho, s) = evaluate(&setup, at, which)?;
            let (l, q) = solve(
                &rho,
                &drho,
                &s,
                args.method,
                &setup.opts,
                args.common.perturb_closed_form,
            )?;
            out.emit(&QfiRecord {
                theta: point_map(at),
                parameter: which.clone(),
                f: q.value,
                method: q.method.name(),
                diagnostics: Diagnostics::new(s.support_rank, &q.diagnostics, l.error_estimate),
            })?;
        }
    }
    Ok(())
}

fn qfi_matrix_record(setup: &Setup, at: &ParameterPoint, args: &QfiArgs) -> Result<QfiMatrixRecord, CliError> {
    let params = setup.params.clone();
    let mut rho = None;
    let mut drhos = Vec::with_capacity(params.len());
    for which in &params {
        let (r, d) = setup.spec.eval_with_derivative(at, which)?;
        rho = Some(r);
        drhos.push(d);
    }
    let rho = rho.ok_or_else(|| CliError::input("model declares no parameters"))?;
    let s = spectral_decompose(&rho, setup.opts.rank_tol)?;
    let class = detect_quadratic_class(&s, CLASS_TOL);
    let m = match (args.method, class) {
        (MethodChoice::Auto | MethodChoice::ClosedForm, Some(c)) => qfi_matrix_quadratic(&rho, params, &drhos, &c)?,
        (MethodChoice::ClosedForm, None) => return Err(not_in_class()),
        (method, _) => {
            let method = if method == MethodChoice::Auto {
                MethodChoice::Spectral
            } else {
                method
            };
            let slds = drhos
                .iter()
                .map(|d| solve(&rho, d, &s, method, &setup.opts, 0.0).map(|(l, _)| l))
                .collect::<Result<Vec<_>, _>>()?;
            qfi_matrix(&rho, params, slds)?
        }
    };
    let min_eigenvalue = m.min_eigenvalue()?;
    let method = m.slds.first().map(|l| l.method.name()).unwrap_or("spectral");
    Ok(QfiMatrixRecord {
        theta: point_map(at),
        parameters: m.params.clone(),
        f: m.mat.clone(),
        method,
        psd: min_eigenvalue >= -1e-9,
        min_eigenvalue,
        asymmetry: m.asymmetry(),
    })
}

struct Route {
    method: &'static str,
    exact: bool,
    /// The SLD and its QFI, or a status note for the record.
    outcome: Result<(SldOperator, f64), String>,
}

fn run_routes(
    rho: &DensityMatrix,
    drho: &ComplexMatrix,
    s: &Spectrum,
    opts: &SolverOptions,
    shift: f64,
) -> Result<Vec<Route>, CliError> {
    let with_qfi = |r: Result<SldOperator, Error>| {
        r.map(|l| {
            let f = qfi_from_sld(rho, &l).value;
            (l, f)
        })
        .map_err(|e| status(&e))
    };
    let spectral = sld_spectral(s, drho, opts.abs_tol)?;
    let spectral_f = qfi_from_sld(rho, &spectral).value;
    let mut routes = vec![
        Route {
            method: "spectral",
            exact: true,
            outcome: Ok((spectral, spectral_f)),
        },
        Route {
            method: "sylvester",
            exact: true,
            outcome: with_qfi(sld_sylvester(rho, drho, opts)),
        },
    ];
    let closed = match class_with_shift(rho, drho, s, shift) {
        Some((c, da, db)) => sld_quadratic_class_with(rho, drho, &c, da, db)
            .and_then(|l| Ok((l, qfi_quadratic_with(rho, drho, &c, da, db)?.value)))
            .map_err(|e| status(&e)),
        None => Err("skipped: NotInClass".into()),
    };
    routes.push(Route {
        method: "closed_form",
        exact: true,
        outcome: closed,
    });
    routes.push(Route {
        method: "commuting",
        exact: true,
        outcome: with_qfi(sld_commuting(s, drho, opts.abs_tol)),
    });
    routes.push(Route {
        method: "quadrature",
        exact: false,
        outcome: with_qfi(sld_quadrature(rho, drho, opts)),
    });
    routes.push(Route {
        method: "series",
        exact: false,
        outcome: with_qfi(sld_series(rho, drho, opts)),
    });
    Ok(routes)
}

/// A route that does not apply to this state is skipped; anything else
/// that stops a route is a failure.
fn status(e: &Error) -> String {
    match e {
        Error::NotFullRank { .. } | Error::NotCommuting { .. } | Error::UnstableRegime { .. } => {
            format!("skipped: {}", error_name(e))
        }
        _ => format!("failed: {}", error_name(e)),
    }
}

fn relative_spread(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-12)
}

pub fn cmd_xval<W: Write>(args: &XvalArgs, out: &mut Emitter<W>) -> Result<(), CliError> {
    let setup = setup(&args.common)?;
    let mut failures = Vec::new();
    for at in &setup.points {
        for which in &setup.params {
            let (rho, drho, s) = evaluate(&setup, at, which)?;
            let routes = run_routes(&rho, &drho, &s, &setup.opts, args.common.perturb_closed_form)?;
            let mut pairs = Vec::new();
            for (i, a) in routes.iter().enumerate() {
                for b in &routes[i + 1..] {
                    let (Ok((la, fa)), Ok((lb, fb))) = (&a.outcome, &b.outcome) else {
                        continue;
                    };
                    let distance = compare_slds(la, lb, &s.support_projector)?;
                    let qfi_spread = relative_spread(*fa, *fb);
                    let exact = a.exact && b.exact;
                    let pass = !exact || (distance <= XVAL_THRESHOLD && qfi_spread <= XVAL_THRESHOLD);
                    if !pass {
                        failures.push(format!(
                            "{} vs {} at {:?} ({which}): distance {distance:e}, QFI spread {qfi_spread:e}",
                            a.method,
                            b.method,
                            point_map(at)
                        ));
                    }
                    pairs.push(PairRecord {
                        a: a.method,
                        b: b.method,
                        exact,
                        distance,
                        qfi_spread,
                        pass,
                    });
                }
            }
            let pass = pairs.iter().all(|p| p.pass);
            let routes = routes
                .iter()
                .map(|r| match &r.outcome {
                    Ok((l, f)) => RouteRecord {
                        method: r.method,
                        exact: r.exact,
                        status: "ok".into(),
                        qfi: Some(*f),
                        residual: Some(l.residual),
                    },
                    Err(note) => RouteRecord {
                        method: r.method,
                        exact: r.exact,
                        status: note.clone(),
                        qfi: None,
                        residual: None,
                    },
                })
                .collect();
            out.emit(&XvalRecord {
                theta: point_map(at),
                parameter: which.clone(),
                threshold: XVAL_THRESHOLD,
                routes,
                pairs,
                pass,
            })?;
        }
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::cross_validation(format!(
            "cross-validation failed: {}",
            failures.join("; ")
        )))
    }
}

pub fn cmd_crb<W: Write>(args: &CrbArgs, out: &mut Emitter<W>) -> Result<(), CliError> {
    let setup = setup(&args.common)?;
    let [which] = setup.spec.parameters() else {
        return Err(CliError::input(
            "crb: scalar parameter required (the model declares more than one)",
        ));
    };
    let [at] = setup.points.as_slice() else {
        return Err(CliError::input("crb takes a single --at point, not a sweep"));
    };
    let theta = at
        .get(which)
        .ok_or_else(|| CliError::from(Error::MissingParameter { name: which.clone() }))?;
    let r = simulate_crb(&setup.spec, at, which, args.shots, args.trials, args.seed)?;
    info!("crb: ratio {:.4} over {} trials", r.ratio, r.trials);
    out.emit(&CrbRecord {
        parameter: which.clone(),
        theta_true: theta,
        shots: r.shots,
        trials: r.trials,
        seed: r.seed,
        mean_estimate: r.mean_estimate,
        empirical_variance: r.empirical_variance,
        qfi: r.qfi,
        classical_fisher: r.classical_fisher,
        ratio: r.ratio,
    })
}
