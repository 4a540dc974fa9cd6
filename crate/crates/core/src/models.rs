//! Built-in structures for the checks: flat complex charts, warped fibers
//! over them, a contact-type example, and a tower that alternates fiber
//! extension with conformal rescaling.

use crate::calculus::GeomError;
use crate::chart::Chart;
use crate::contact::{
    calibrate_kappa, check_axioms, kappa_checks, kenmotsu_checks, AlmostContactStructure,
};
use crate::expr::{free_vars, Expr, Func};
use crate::field::{EndomorphismField, KForm, MetricField, ScalarField, VectorField};
use crate::report::CheckOutcome;
use crate::tol;
use crate::warp::{
    check_warp_positive, conformal_checks, lee_form_check, line_extension, pull_endo,
    pull_metric, structure_checks, WarpedProduct,
};

/// An even-dimensional chart with a metric and a compatible complex
/// structure, as produced by the flat constructor or a conformal rescale.
#[derive(Clone, Debug)]
pub struct KahlerModel {
    pub chart: Chart,
    pub metric: MetricField,
    pub j: EndomorphismField,
}

/// Flat chart of dimension 2m with coordinates x1, y1, ..., xm, ym, the
/// identity metric, and J mapping each d/dx_i to d/dy_i.
pub fn euclidean_kahler(m: usize, half_width: f64) -> Result<KahlerModel, GeomError> {
    if m == 0 {
        return Err(GeomError::BadParameter {
            name: "m".to_string(),
            reason: "need at least one complex dimension".to_string(),
        });
    }
    if !(half_width > 0.0) {
        return Err(GeomError::BadParameter {
            name: "half_width".to_string(),
            reason: format!("must be positive, got {half_width}"),
        });
    }
    let mut names = Vec::with_capacity(2 * m);
    for i in 1..=m {
        names.push(format!("x{i}"));
        names.push(format!("y{i}"));
    }
    let chart = Chart::new(names, vec![(-half_width, half_width); 2 * m])?;
    let metric = MetricField::from_fn(&chart, |i, j| {
        ScalarField::constant(&chart, if i == j { 1.0 } else { 0.0 })
    });
    let j = EndomorphismField::from_fn(&chart, |k, a| {
        let v = if a % 2 == 0 && k == a + 1 {
            1.0
        } else if a % 2 == 1 && k + 1 == a {
            -1.0
        } else {
            0.0
        };
        ScalarField::constant(&chart, v)
    });
    Ok(KahlerModel { chart, metric, j })
}

/// Extends a complex chart by a line with metric ds^2 + h(s)^2 G. The
/// extension carries the structure (phi = J-block, xi = d/ds, eta = ds) and
/// coefficient beta = h'/h. The warp expression must use only the variable
/// named by `var`, which is bound to the new coordinate.
pub fn kenmotsu_from_kahler(
    base: &KahlerModel,
    warp: &Expr,
    line_bounds: (f64, f64),
    var: &str,
) -> Result<(AlmostContactStructure, ScalarField), GeomError> {
    for v in free_vars(warp) {
        if v != var {
            return Err(GeomError::WarpDependsOnFiber(v));
        }
    }
    let chart = line_extension(&base.chart, var, line_bounds)?;
    let bind = std::collections::HashMap::from([(var.to_string(), 0usize)]);
    let h = ScalarField::from_expr_bound(&chart, warp, &bind)?;
    check_warp_positive(&h)?;

    let gk = pull_metric(&chart, &base.metric)?;
    let h2 = h.mul(&h);
    let one = ScalarField::constant(&chart, 1.0);
    let zero = ScalarField::constant(&chart, 0.0);
    let g = MetricField::from_fn(&chart, |i, j| {
        if i == 0 && j == 0 {
            one.clone()
        } else if i == 0 || j == 0 {
            zero.clone()
        } else {
            h2.mul(gk.comp(i, j))
        }
    });
    let phi = pull_endo(&chart, &base.j)?;
    let xi = VectorField::basis(&chart, 0);
    let mut eta_comps = vec![zero.clone(); chart.dim()];
    eta_comps[0] = one.clone();
    let eta = KForm::one_form(&chart, eta_comps)?;
    let beta = h.partial(0).div(&h);
    let acs = AlmostContactStructure::new(phi, xi, eta, g)?;
    Ok((acs, beta))
}

/// The exponential-warp fiber: ds^2 + c^2 e^{2s} (dx^2 + dy^2), with
/// constant coefficient beta = 1.
pub fn kenmotsu_example(
    c: f64,
    line_bounds: (f64, f64),
    half_width: f64,
) -> Result<(AlmostContactStructure, ScalarField), GeomError> {
    if !(c > 0.0) {
        return Err(GeomError::BadParameter {
            name: "c".to_string(),
            reason: format!("warp scale must be positive, got {c}"),
        });
    }
    let base = euclidean_kahler(1, half_width)?;
    let warp = Expr::Bin(
        crate::expr::BinOp::Mul,
        Box::new(Expr::Num(c)),
        Box::new(Expr::Unary(Func::Exp, Box::new(Expr::Var("s".to_string())))),
    );
    kenmotsu_from_kahler(&base, &warp, line_bounds, "s")
}

/// The cosh-warp fiber: ds^2 + cosh(s)^2 (dx^2 + dy^2), with nonconstant
/// coefficient beta = tanh(s).
pub fn kenmotsu_cosh(
    line_bounds: (f64, f64),
    half_width: f64,
) -> Result<(AlmostContactStructure, ScalarField), GeomError> {
    let base = euclidean_kahler(1, half_width)?;
    let warp = Expr::Unary(Func::Cosh, Box::new(Expr::Var("s".to_string())));
    kenmotsu_from_kahler(&base, &warp, line_bounds, "s")
}

/// Contact-type structure on a 3-d chart: eta = (dz - y dx)/2, xi = 2 d/dz,
/// g = eta (x) eta + (dx^2 + dy^2)/4, and phi rotating the distribution.
/// Satisfies the covariant identity with alpha = -1, beta = 0, and
/// Omega_g = -d eta / 2.
pub fn sasakian_r3(half_width: f64) -> Result<AlmostContactStructure, GeomError> {
    let chart = Chart::new(vec!["x", "y", "z"], vec![(-half_width, half_width); 3])?;
    let x = |i: usize| ScalarField::coordinate(&chart, i);
    let k = |v: f64| ScalarField::constant(&chart, v);

    let eta = KForm::one_form(&chart, vec![x(1).scale(-0.5), k(0.0), k(0.5)])?;
    let xi = VectorField::new(&chart, vec![k(0.0), k(0.0), k(2.0)])?;
    // g_ij = eta_i eta_j + delta/4 on the (x, y) block.
    let e = [x(1).scale(-0.5), k(0.0), k(0.5)];
    let g = MetricField::from_fn(&chart, |i, j| {
        let mut c = e[i].mul(&e[j]);
        if i == j && i < 2 {
            c = c.add(&k(0.25));
        }
        c
    });
    let mut phi_comp = vec![vec![k(0.0); 3]; 3];
    phi_comp[1][0] = k(1.0);
    phi_comp[0][1] = k(-1.0);
    phi_comp[2][1] = x(1).neg();
    let phi = EndomorphismField::new(&chart, phi_comp)?;
    AlmostContactStructure::new(phi, xi, eta, g)
}

/// Clones an endomorphism and overwrites its block on the last two
/// coordinates with a rotation-by-coordinate pattern that is deliberately
/// not integrable. Used as a negative control.
pub fn broken_complex_structure(j: &EndomorphismField) -> EndomorphismField {
    let chart = j.chart().clone();
    let n = chart.dim();
    assert!(n >= 2, "need two coordinates to break a block");
    let (a, b) = (n - 2, n - 1);
    let u = ScalarField::coordinate(&chart, a);
    let sin = u.func(Func::Sin);
    let cos = u.func(Func::Cos);
    EndomorphismField::from_fn(&chart, |k, l| {
        if k == a && l == a {
            sin.neg()
        } else if k == a && l == b {
            cos.neg()
        } else if k == b && l == a {
            cos.clone()
        } else if k == b && l == b {
            sin.neg()
        } else {
            j.comp(k, l).clone()
        }
    })
}

#[derive(Clone, Debug)]
pub struct TowerLevel {
    pub level: usize,
    pub dim: usize,
    /// "fiber extension" on odd levels, "conformal rescale" on even ones.
    pub kind: &'static str,
}

#[derive(Clone, Debug)]
pub struct Tower {
    pub levels: Vec<TowerLevel>,
    /// The pairing scale calibrated at level 1; later levels must agree.
    pub kappa: f64,
    pub checks: Vec<CheckOutcome>,
}

fn prefixed(level: usize, mut outcomes: Vec<CheckOutcome>) -> Vec<CheckOutcome> {
    for c in &mut outcomes {
        c.name = format!("level{level}.{}", c.name);
    }
    outcomes
}

fn prefixed_one(level: usize, mut outcome: CheckOutcome) -> CheckOutcome {
    outcome.name = format!("level{level}.{}", outcome.name);
    outcome
}

fn dimension_outcome(level: usize, dim: usize) -> CheckOutcome {
    let expected = level + 2;
    let r = crate::report::Residual {
        max: (dim as f64 - expected as f64).abs(),
        witness: None,
    };
    CheckOutcome::upper(
        &format!("level{level}.dimension"),
        "each level adds one dimension",
        crate::report::CheckClass::Identity,
        r,
        0.0,
    )
    .with_detail(format!("dim = {dim}, expected {expected}"))
}

/// Builds `levels` stages, alternating fiber extension (odd) and conformal
/// rescale (even), starting from a flat 2-d chart. Every stage re-runs its
/// identity checks; the calibrated scale must agree across stages.
pub fn tower(levels: usize, samples: usize, seed: u64) -> Result<Tower, GeomError> {
    if levels == 0 {
        return Err(GeomError::BadParameter {
            name: "levels".to_string(),
            reason: "need at least one level".to_string(),
        });
    }
    const BOUNDS: (f64, f64) = (-0.5, 0.5);
    const MARGIN: f64 = 0.05;
    let mut kahler = euclidean_kahler(1, 0.5)?;
    let mut fiber: Option<(AlmostContactStructure, ScalarField)> = None;
    let mut tower_kappa: Option<f64> = None;
    let mut stages = Vec::new();
    let mut checks = Vec::new();

    for level in 1..=levels {
        if level % 2 == 1 {
            let warp = Expr::Unary(Func::Exp, Box::new(Expr::Var("s".to_string())));
            let (acs, beta) = kenmotsu_from_kahler(&kahler, &warp, BOUNDS, "s")?;
            let pts = acs
                .chart()
                .sample_points(samples, seed + level as u64, MARGIN);
            checks.push(dimension_outcome(level, acs.chart().dim()));
            checks.extend(prefixed(level, check_axioms(&acs, &pts, tol::AXIOMS)?));
            checks.extend(prefixed(
                level,
                kenmotsu_checks(&acs, &beta, &pts, tol::KENMOTSU)?,
            ));
            let cal = calibrate_kappa(&acs, &beta, &pts, tol::KAPPA_WIN)?;
            if let Some(k0) = tower_kappa {
                if cal.kappa != k0 {
                    return Err(GeomError::TowerLevelFailed {
                        level,
                        check: "scale consistency".to_string(),
                        residual: (cal.kappa - k0).abs(),
                    });
                }
            } else {
                tower_kappa = Some(cal.kappa);
            }
            checks.extend(prefixed(
                level,
                kappa_checks(&cal, tol::KAPPA_WIN, tol::KAPPA_LOSE_MIN),
            ));
            stages.push(TowerLevel {
                level,
                dim: acs.chart().dim(),
                kind: "fiber extension",
            });
            fiber = Some((acs, beta));
        } else {
            let (acs, beta) = fiber.take().expect("even level follows an odd one");
            let warp = Expr::Unary(Func::Exp, Box::new(Expr::Var("t".to_string())));
            let wp = WarpedProduct::build(&acs, &beta, &warp, BOUNDS)?;
            let pts = wp
                .chart()
                .sample_points(samples, seed + level as u64, MARGIN);
            let kappa = tower_kappa.expect("calibrated on the previous level");
            checks.push(dimension_outcome(level, wp.chart().dim()));
            checks.extend(prefixed(
                level,
                structure_checks(
                    wp.metric(),
                    wp.complex_structure(),
                    &pts,
                    tol::J_SQUARED,
                    tol::HERMITIAN,
                    tol::SPD_MIN,
                )?,
            ));
            checks.push(prefixed_one(
                level,
                lee_form_check(&wp, kappa, &pts, tol::LEE_FORM)?,
            ));
            let (outcomes, scale) = conformal_checks(
                &wp,
                kappa,
                &pts,
                tol::POTENTIAL_GRADIENT,
                tol::CONFORMAL_CLOSED,
                tol::CONFORMAL_HERMITIAN,
                tol::CLOSEDNESS_PRECHECK,
            )?;
            checks.extend(prefixed(level, outcomes));
            let scale = scale.ok_or_else(|| GeomError::TowerLevelFailed {
                level,
                check: "conformal scale".to_string(),
                residual: f64::NAN,
            })?;
            stages.push(TowerLevel {
                level,
                dim: wp.chart().dim(),
                kind: "conformal rescale",
            });
            kahler = KahlerModel {
                chart: wp.chart().clone(),
                metric: scale.metric,
                j: wp.complex_structure().clone(),
            };
        }
    }

    Ok(Tower {
        levels: stages,
        kappa: tower_kappa.expect("at least one odd level"),
        checks,
    })
}

/// d Omega = 0 for a complex chart, as a single outcome.
pub fn kahler_closed_check(
    model: &KahlerModel,
    pts: &[crate::chart::Point],
    tol: f64,
) -> Result<CheckOutcome, GeomError> {
    let omega = crate::contact::fundamental_form(&model.metric, |k, j| model.j.comp(k, j).clone());
    let r = crate::calculus::form_max_abs(&crate::calculus::exterior_derivative(&omega), pts)?;
    Ok(CheckOutcome::upper(
        "kahler.closed",
        "d Omega = 0",
        crate::report::CheckClass::Identity,
        r,
        tol,
    ))
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::warp::{nijenhuis_checks, nijenhuis_control};

    #[test]
    fn catalog_shapes() {
        let flat = euclidean_kahler(2, 1.0).unwrap();
        assert_eq!(flat.chart.names(), ["x1", "y1", "x2", "y2"]);

        let (acs, beta) = kenmotsu_example(1.0, (-0.7, 0.7), 0.9).unwrap();
        assert_eq!(acs.chart().names(), ["s", "x1", "y1"]);
        let pt = acs.chart().point(vec![0.3, 0.1, 0.2]).unwrap();
        assert_eq!(beta.value(&pt).unwrap(), 1.0);

        let (_, beta) = kenmotsu_cosh((-0.7, 0.7), 0.9).unwrap();
        assert!((beta.value(&pt).unwrap() - 0.3_f64.tanh()).abs() < 1e-15);

        let contact = sasakian_r3(0.9).unwrap();
        assert_eq!(contact.chart().dim(), 3);
    }

    #[test]
    fn bad_parameters_are_rejected() {
        assert!(matches!(
            euclidean_kahler(0, 1.0),
            Err(GeomError::BadParameter { .. })
        ));
        assert!(matches!(
            kenmotsu_example(-1.0, (-0.7, 0.7), 0.9),
            Err(GeomError::BadParameter { .. })
        ));
    }

    #[test]
    fn flat_chart_is_integrable_but_the_broken_block_is_not() {
        let flat = euclidean_kahler(2, 1.0).unwrap();
        let pts = flat.chart.sample_points(20, 61, 0.05);
        for c in nijenhuis_checks(&flat.metric, &flat.j, &pts, 1e-9, 1e-8).unwrap() {
            assert!(c.pass, "{}: {:e}", c.name, c.max_residual);
        }
        let broken = broken_complex_structure(&flat.j);
        let control = nijenhuis_control(&broken, &pts, 0.1).unwrap();
        assert!(control.pass, "control residual {:e}", control.max_residual);
    }

    #[test]
    fn tower_alternates_and_keeps_the_scale() {
        let t = tower(3, 12, 99).unwrap();
        assert_eq!(t.kappa, 2.0);
        let dims: Vec<usize> = t.levels.iter().map(|l| l.dim).collect();
        assert_eq!(dims, [3, 4, 5]);
        assert_eq!(t.levels[0].kind, "fiber extension");
        assert_eq!(t.levels[1].kind, "conformal rescale");
        for c in &t.checks {
            assert!(c.pass, "{}: {:e}", c.name, c.max_residual);
        }
    }
}
