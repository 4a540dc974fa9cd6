//! The warped product of an interval with an almost-contact metric fiber,
//! the induced almost-Hermitian structure, and its identity checks.
//!
//! Conventions, with the line coordinate at index 0 and p the warp:
//!   G = dt (x) dt + p^2 g,  J d/dt = xi0 / p,  J X = phi X - p eta0(X) d/dt,
//!   eta = p eta0,  xi = xi0 / p,  eta_bar = dt,  xi_bar = d/dt.
//! Fiber fields are pulled back through the projection, so everything below
//! lives on the product chart.

use nalgebra::DMatrix;

use crate::calculus::{
    connection_at, exterior_derivative, form_max_abs, form_scaled_diff, lie_bracket,
    one_form_potential, wedge, GeomError,
};
use crate::chart::{Chart, Point};
use crate::contact::{fundamental_form, AlmostContactStructure};
use crate::expr::{free_vars, Expr};
use crate::field::{
    Binding, EndomorphismField, FieldError, KForm, MetricField, ScalarField, VectorField,
};
use crate::report::{CheckClass, CheckOutcome, Residual};

/// Number of evenly spaced warp samples in the positivity sweep.
const WARP_SWEEP: usize = 512;

/// Prepends a fresh line coordinate to the fiber chart.
pub fn line_extension(
    fiber: &Chart,
    base: &str,
    bounds: (f64, f64),
) -> Result<Chart, GeomError> {
    let mut names = vec![fiber.fresh_name(base)];
    names.extend(fiber.names().iter().cloned());
    let mut bs = vec![bounds];
    bs.extend((0..fiber.dim()).map(|i| fiber.bounds(i)));
    Ok(Chart::new(names, bs)?)
}

fn offset_bindings(fiber_dim: usize) -> Vec<Binding> {
    (0..fiber_dim).map(|a| Binding::Coord(a + 1)).collect()
}

/// Pullback of a fiber scalar through the projection onto the fiber factor.
pub fn pull_scalar(total: &Chart, f: &ScalarField) -> Result<ScalarField, FieldError> {
    f.composed(total, offset_bindings(f.chart().dim()))
}

/// Pullback of a fiber vector field; the line component is zero.
pub fn pull_vector(total: &Chart, v: &VectorField) -> Result<VectorField, FieldError> {
    let mut comps = vec![ScalarField::constant(total, 0.0)];
    for c in v.comps() {
        comps.push(pull_scalar(total, c)?);
    }
    VectorField::new(total, comps)
}

/// Pullback of a fiber endomorphism as a block with zero line row and column.
pub fn pull_endo(
    total: &Chart,
    t: &EndomorphismField,
) -> Result<EndomorphismField, FieldError> {
    let n = t.chart().dim();
    let zero = ScalarField::constant(total, 0.0);
    let mut comp = vec![vec![zero.clone(); n + 1]; n + 1];
    for k in 0..n {
        for j in 0..n {
            comp[k + 1][j + 1] = pull_scalar(total, t.comp(k, j))?;
        }
    }
    EndomorphismField::new(total, comp)
}

/// Pullback of a fiber metric as a degenerate symmetric tensor (zero line
/// row and column); used for component access, not as a metric.
pub fn pull_metric(total: &Chart, g: &MetricField) -> Result<MetricField, FieldError> {
    let n = g.chart().dim();
    let zero = ScalarField::constant(total, 0.0);
    let mut comp = vec![vec![zero.clone(); n + 1]; n + 1];
    for i in 0..n {
        for j in i..n {
            let c = pull_scalar(total, g.comp(i, j))?;
            comp[i + 1][j + 1] = c.clone();
            comp[j + 1][i + 1] = c;
        }
    }
    Ok(MetricField::from_fn(total, |i, j| comp[i][j].clone()))
}

/// Pullback of a fiber form; coefficients touching the line direction vanish.
pub fn pull_form(total: &Chart, w: &KForm) -> Result<KForm, FieldError> {
    let sets = crate::field::multi_indices(total.dim(), w.degree());
    let mut comps = Vec::with_capacity(sets.len());
    for set in &sets {
        if set.contains(&0) {
            comps.push(ScalarField::constant(total, 0.0));
            continue;
        }
        let fiber_set: Vec<usize> = set.iter().map(|&i| i - 1).collect();
        let coeff = w
            .coefficient(&fiber_set)
            .expect("shifted index set stays in range");
        comps.push(pull_scalar(total, coeff)?);
    }
    KForm::new(total, w.degree(), comps)
}

/// Rejects warps that touch the product anywhere at or below zero. The warp
/// depends only on the line coordinate, so a 1-d sweep suffices.
pub fn check_warp_positive(p: &ScalarField) -> Result<(), GeomError> {
    let chart = p.chart();
    let (lo, hi) = chart.bounds(0);
    let center = chart.center().coords().to_vec();
    for k in 0..WARP_SWEEP {
        let t = lo + (hi - lo) * k as f64 / (WARP_SWEEP - 1) as f64;
        let mut coords = center.clone();
        coords[0] = t;
        let v = p.value(&chart.point(coords)?)?;
        if v <= 0.0 {
            return Err(GeomError::NonPositiveWarp { t, value: v });
        }
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct WarpedProduct {
    chart: Chart,
    fiber: AlmostContactStructure,
    fiber_beta: ScalarField,
    p: ScalarField,
    g: MetricField,
    j: EndomorphismField,
    eta0: KForm,
    xi0: VectorField,
    beta0: ScalarField,
    g0: MetricField,
    omega0: KForm,
}

impl WarpedProduct {
    /// Assembles the product structure over the given fiber. The warp
    /// expression may use only the variable `t`, which becomes coordinate 0
    /// of the product chart whatever its display name ends up being.
    pub fn build(
        fiber: &AlmostContactStructure,
        fiber_beta: &ScalarField,
        warp: &Expr,
        line_bounds: (f64, f64),
    ) -> Result<WarpedProduct, GeomError> {
        if fiber_beta.chart() != fiber.chart() {
            return Err(GeomError::Field(FieldError::ChartMismatch));
        }
        for v in free_vars(warp) {
            if v != "t" {
                return Err(GeomError::WarpDependsOnFiber(v));
            }
        }
        let chart = line_extension(fiber.chart(), "t", line_bounds)?;
        let bind = std::collections::HashMap::from([("t".to_string(), 0usize)]);
        let p = ScalarField::from_expr_bound(&chart, warp, &bind)?;
        check_warp_positive(&p)?;

        let beta0 = pull_scalar(&chart, fiber_beta)?;
        let phi0 = pull_endo(&chart, fiber.phi())?;
        let xi0 = pull_vector(&chart, fiber.xi())?;
        let eta0 = pull_form(&chart, fiber.eta())?;
        let g0 = pull_metric(&chart, fiber.g())?;
        let omega0 = pull_form(&chart, &crate::contact::kahler_form(fiber))?;

        let p2 = p.mul(&p);
        let one = ScalarField::constant(&chart, 1.0);
        let zero = ScalarField::constant(&chart, 0.0);
        let g = MetricField::from_fn(&chart, |i, j| {
            if i == 0 && j == 0 {
                one.clone()
            } else if i == 0 || j == 0 {
                zero.clone()
            } else {
                p2.mul(g0.comp(i, j))
            }
        });
        let j = EndomorphismField::from_fn(&chart, |k, a| {
            if k == 0 && a == 0 {
                zero.clone()
            } else if a == 0 {
                xi0.comp(k).div(&p)
            } else if k == 0 {
                p.mul(eta0.comp(a)).neg()
            } else {
                phi0.comp(k, a).clone()
            }
        });

        Ok(WarpedProduct {
            chart,
            fiber: fiber.clone(),
            fiber_beta: fiber_beta.clone(),
            p,
            g,
            j,
            eta0,
            xi0,
            beta0,
            g0,
            omega0,
        })
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }
    pub fn fiber(&self) -> &AlmostContactStructure {
        &self.fiber
    }
    pub fn fiber_beta(&self) -> &ScalarField {
        &self.fiber_beta
    }
    pub fn warp(&self) -> &ScalarField {
        &self.p
    }
    pub fn metric(&self) -> &MetricField {
        &self.g
    }
    pub fn complex_structure(&self) -> &EndomorphismField {
        &self.j
    }
    /// Pullback of the fiber contact form.
    pub fn eta0(&self) -> &KForm {
        &self.eta0
    }
    /// Pullback of the fiber Reeb field.
    pub fn xi0(&self) -> &VectorField {
        &self.xi0
    }
    /// Pullback of the fiber coefficient function.
    pub fn beta0(&self) -> &ScalarField {
        &self.beta0
    }
    /// Pullback of the fiber metric (degenerate in the line direction).
    pub fn fiber_metric(&self) -> &MetricField {
        &self.g0
    }
    /// Pullback of the fiber fundamental two-form.
    pub fn fiber_kahler_form(&self) -> &KForm {
        &self.omega0
    }

    /// eta = p eta0, the rescaled contact form of the product.
    pub fn eta(&self) -> KForm {
        self.eta0.scale_field(&self.p)
    }
    /// xi = xi0 / p, dual to eta.
    pub fn xi(&self) -> VectorField {
        let inv = ScalarField::constant(&self.chart, 1.0).div(&self.p);
        self.xi0.scale_field(&inv)
    }
    /// eta_bar = dt.
    pub fn eta_bar(&self) -> KForm {
        let mut comps = vec![ScalarField::constant(&self.chart, 0.0); self.chart.dim()];
        comps[0] = ScalarField::constant(&self.chart, 1.0);
        KForm::one_form(&self.chart, comps).expect("one coefficient per direction")
    }
    /// xi_bar = d/dt.
    pub fn xi_bar(&self) -> VectorField {
        VectorField::basis(&self.chart, 0)
    }

    /// The fundamental two-form Omega_G(X, Y) = G(X, J Y).
    pub fn kahler_form(&self) -> KForm {
        fundamental_form(&self.g, |k, j| self.j.comp(k, j).clone())
    }

    /// Splits product components into (line part, fiber part).
    pub fn split<'a>(&self, v: &'a [f64]) -> (f64, &'a [f64]) {
        (v[0], &v[1..])
    }

    /// The structure induced on the slice at the given line value: metric
    /// p0^2 g, form p0 eta0, Reeb field xi0 / p0, and coefficient beta0 / p0,
    /// all on the fiber chart.
    pub fn fiber_structure(
        &self,
        t0: f64,
    ) -> Result<(AlmostContactStructure, ScalarField), GeomError> {
        let mut coords = self.chart.center().coords().to_vec();
        coords[0] = t0;
        let p0 = self.p.value(&self.chart.point(coords)?)?;
        let fg = self.fiber.g();
        let scale2 = p0 * p0;
        let g = MetricField::from_fn(self.fiber.chart(), |i, j| fg.comp(i, j).scale(scale2));
        let eta = self.fiber.eta().scale(p0);
        let mut xi_comps = Vec::new();
        for c in self.fiber.xi().comps() {
            xi_comps.push(c.scale(1.0 / p0));
        }
        let xi = VectorField::new(self.fiber.chart(), xi_comps)?;
        let acs = AlmostContactStructure::new(self.fiber.phi().clone(), xi, eta, g)?;
        Ok((acs, self.fiber_beta.scale(1.0 / p0)))
    }
}

/// Pointwise shape of an almost-Hermitian pair: J^2 = -Id, J-compatibility
/// of the metric, and positive definiteness.
pub fn structure_checks(
    g: &MetricField,
    j: &EndomorphismField,
    pts: &[Point],
    j_tol: f64,
    herm_tol: f64,
    spd_min: f64,
) -> Result<Vec<CheckOutcome>, GeomError> {
    let n = g.chart().dim();
    let mut r_j2 = Residual::new();
    let mut r_herm = Residual::new();
    let mut min_minor = f64::INFINITY;
    let mut minor_witness: Option<Vec<f64>> = None;
    for pt in pts {
        let jm = j.value(pt)?;
        let gm = g.value(pt)?;
        let j2 = &jm * &jm;
        let herm = jm.transpose() * &gm * &jm - &gm;
        let mut worst_j2: f64 = 0.0;
        let mut worst_herm: f64 = 0.0;
        for k in 0..n {
            for j in 0..n {
                let id = if k == j { 1.0 } else { 0.0 };
                worst_j2 = worst_j2.max((j2[(k, j)] + id).abs());
                worst_herm = worst_herm.max(herm[(k, j)].abs());
            }
        }
        r_j2.observe(worst_j2, pt);
        r_herm.observe(worst_herm, pt);
        let m = g.min_leading_minor(pt)?;
        if m < min_minor {
            min_minor = m;
            minor_witness = Some(pt.coords().to_vec());
        }
    }
    let spd = Residual {
        max: min_minor,
        witness: minor_witness,
    };
    Ok(vec![
        CheckOutcome::upper(
            "structure.j_squared",
            "J^2 = -Id",
            CheckClass::Identity,
            r_j2,
            j_tol,
        ),
        CheckOutcome::upper(
            "structure.hermitian",
            "G(J X, J Y) = G(X, Y)",
            CheckClass::Identity,
            r_herm,
            herm_tol,
        ),
        CheckOutcome::lower(
            "structure.spd",
            "G is positive definite",
            CheckClass::Identity,
            spd,
            spd_min,
        )
        .with_detail("lower bound: smallest leading principal minor over the samples"),
    ])
}

/// Expected (nabla_X J) column for X = e_i, Y = e_j at one point, from the
/// fiber data and the warp. `with_warp_terms = false` drops every p' term,
/// which must visibly break the identity for a nonconstant warp.
#[allow(clippy::too_many_arguments)]
fn nabla_j_expected(
    n: usize,
    i: usize,
    j: usize,
    fg: &DMatrix<f64>,
    phi: &DMatrix<f64>,
    eta: &[f64],
    xi: &[f64],
    b0: f64,
    p: f64,
    dp: f64,
) -> Vec<f64> {
    let mut col = vec![0.0; n];
    if i == 0 {
        return col;
    }
    if j == 0 {
        // Y = xi_bar: (beta0/p)(X - eta0(X) xi0) - (p'/p) phi X.
        for (k, c) in col.iter_mut().enumerate() {
            let delta = if k == i { 1.0 } else { 0.0 };
            *c = b0 / p * (delta - eta[i] * xi[k]) - dp / p * phi[(k, i)];
        }
        return col;
    }
    let g_xy = fg[(i, j)];
    let mut g_phix_y = 0.0;
    for l in 0..n {
        g_phix_y += phi[(l, i)] * fg[(l, j)];
    }
    col[0] = -p * b0 * (g_xy - eta[i] * eta[j]) + p * dp * g_phix_y;
    for k in 1..n {
        let delta = if k == i { 1.0 } else { 0.0 };
        col[k] = b0 * (g_phix_y * xi[k] - eta[j] * phi[(k, i)])
            + dp * (g_xy * xi[k] - eta[j] * delta);
    }
    col
}

/// Compares (nabla J) of the product against its closed-form expansion in
/// fiber data and warp derivatives, then re-runs the comparison with the p'
/// terms dropped as a negative control.
pub fn nabla_j_checks(
    wp: &WarpedProduct,
    pts: &[Point],
    tol: f64,
    control_min: f64,
) -> Result<Vec<CheckOutcome>, GeomError> {
    let n = wp.chart().dim();
    let mut r_full = Residual::new();
    let mut r_ctrl = Residual::new();
    for pt in pts {
        let conn = connection_at(wp.metric(), pt)?;
        let (jm, djm) = wp.complex_structure().value_and_partials(pt)?;
        let fg = wp.fiber_metric().value(pt)?;
        let phi = {
            // phi block = J without its line row and column.
            let mut m = jm.clone();
            for k in 0..n {
                m[(k, 0)] = 0.0;
                m[(0, k)] = 0.0;
            }
            m
        };
        let mut eta = vec![0.0; n];
        let mut xi = vec![0.0; n];
        for k in 0..n {
            eta[k] = wp.eta0().comp(k).value(pt)?;
            xi[k] = wp.xi0().comp(k).value(pt)?;
        }
        let b0 = wp.beta0().value(pt)?;
        let (p, p_grad) = wp.warp().value_and_grad(pt)?;
        let dp = p_grad[0];

        let mut worst_full: f64 = 0.0;
        let mut worst_ctrl: f64 = 0.0;
        let mut e = vec![0.0; n];
        for i in 0..n {
            e[i] = 1.0;
            let lhs = conn.cov_endo(&e, &jm, &djm);
            e[i] = 0.0;
            for j in 0..n {
                let want = nabla_j_expected(n, i, j, &fg, &phi, &eta, &xi, b0, p, dp);
                let bare = nabla_j_expected(n, i, j, &fg, &phi, &eta, &xi, b0, p, 0.0);
                for k in 0..n {
                    worst_full = worst_full.max((lhs[(k, j)] - want[k]).abs());
                    worst_ctrl = worst_ctrl.max((lhs[(k, j)] - bare[k]).abs());
                }
            }
        }
        r_full.observe(worst_full, pt);
        r_ctrl.observe(worst_ctrl, pt);
    }
    Ok(vec![
        CheckOutcome::upper(
            "nabla_j.identity",
            "(nabla_X J)Y = beta0 (g(phi X,Y) xi0 - eta0(Y) phi X - p (g(X,Y) - eta0(X) eta0(Y)) d/dt) \
             + p' (g(X,Y) xi0 - eta0(Y) X + p g(phi X,Y) d/dt) \
             + eta_bar(Y) ((beta0/p)(X - eta0(X) xi0) - (p'/p) phi X)",
            CheckClass::Identity,
            r_full,
            tol,
        ),
        CheckOutcome::lower(
            "nabla_j.warp_terms_matter",
            "dropping the p' terms must break the expansion",
            CheckClass::Control,
            r_ctrl,
            control_min,
        ),
    ])
}

/// Nijenhuis tensor of `j` on coordinate pairs, from Lie brackets of the
/// column fields. Tensorial, so basis pairs decide vanishing.
pub fn nijenhuis_bracket_residual(
    j: &EndomorphismField,
    pts: &[Point],
) -> Result<Residual, GeomError> {
    let chart = j.chart().clone();
    let n = chart.dim();
    let jcols: Vec<VectorField> = (0..n).map(|i| j.column(i)).collect();
    let basis: Vec<VectorField> = (0..n).map(|i| VectorField::basis(&chart, i)).collect();
    let mut r = Residual::new();
    for pt in pts {
        let jm = j.value(pt)?;
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in (a + 1)..n {
                // [e_a, e_b] = 0, so the J^2 [X, Y] term drops.
                let b1 = lie_bracket(&jcols[a], &jcols[b], pt)?;
                let b2 = lie_bracket(&jcols[a], &basis[b], pt)?;
                let b3 = lie_bracket(&basis[a], &jcols[b], pt)?;
                for k in 0..n {
                    let mut v = b1[k];
                    for l in 0..n {
                        v -= jm[(k, l)] * (b2[l] + b3[l]);
                    }
                    worst = worst.max(v.abs());
                }
            }
        }
        r.observe(worst, pt);
    }
    Ok(r)
}

/// Nijenhuis tensor from a torsion-free connection:
/// N(X,Y) = (nabla_{JX} J)Y - (nabla_{JY} J)X + J (nabla_Y J)X - J (nabla_X J)Y.
fn nijenhuis_connection_residuals(
    g: &MetricField,
    j: &EndomorphismField,
    pts: &[Point],
) -> Result<(Residual, Residual), GeomError> {
    let n = g.chart().dim();
    let bracket = nijenhuis_bracket_residual(j, pts)?;
    let mut agree = Residual::new();
    for pt in pts {
        let conn = connection_at(g, pt)?;
        let (jm, djm) = j.value_and_partials(pt)?;
        let mut nabla_basis = Vec::with_capacity(n);
        let mut e = vec![0.0; n];
        for i in 0..n {
            e[i] = 1.0;
            nabla_basis.push(conn.cov_endo(&e, &jm, &djm));
            e[i] = 0.0;
        }
        // Bracket-route values, recomputed per pair for the comparison.
        let jcols: Vec<VectorField> = (0..n).map(|i| j.column(i)).collect();
        let basis: Vec<VectorField> =
            (0..n).map(|i| VectorField::basis(g.chart(), i)).collect();
        let mut worst: f64 = 0.0;
        for a in 0..n {
            let jx: Vec<f64> = (0..n).map(|k| jm[(k, a)]).collect();
            let nabla_jx = conn.cov_endo(&jx, &jm, &djm);
            for b in (a + 1)..n {
                let jy: Vec<f64> = (0..n).map(|k| jm[(k, b)]).collect();
                let nabla_jy = conn.cov_endo(&jy, &jm, &djm);
                let b1 = lie_bracket(&jcols[a], &jcols[b], pt)?;
                let b2 = lie_bracket(&jcols[a], &basis[b], pt)?;
                let b3 = lie_bracket(&basis[a], &jcols[b], pt)?;
                for k in 0..n {
                    let mut via_bracket = b1[k];
                    let mut via_conn = nabla_jx[(k, b)] - nabla_jy[(k, a)];
                    for l in 0..n {
                        via_bracket -= jm[(k, l)] * (b2[l] + b3[l]);
                        via_conn +=
                            jm[(k, l)] * (nabla_basis[b][(l, a)] - nabla_basis[a][(l, b)]);
                    }
                    worst = worst.max((via_bracket - via_conn).abs());
                }
            }
        }
        agree.observe(worst, pt);
    }
    Ok((bracket, agree))
}

/// Integrability of J, established twice: the Lie-bracket route must agree
/// with the connection route, and both must vanish.
pub fn nijenhuis_checks(
    g: &MetricField,
    j: &EndomorphismField,
    pts: &[Point],
    agree_tol: f64,
    vanish_tol: f64,
) -> Result<Vec<CheckOutcome>, GeomError> {
    let (bracket, agree) = nijenhuis_connection_residuals(g, j, pts)?;
    Ok(vec![
        CheckOutcome::upper(
            "nijenhuis.routes_agree",
            "N_J from Lie brackets = N_J from (nabla J)",
            CheckClass::Identity,
            agree,
            agree_tol,
        ),
        CheckOutcome::upper(
            "nijenhuis.vanishing",
            "N_J = 0",
            CheckClass::Identity,
            bracket,
            vanish_tol,
        ),
    ])
}

/// A deliberately non-integrable J must be flagged by the bracket route.
pub fn nijenhuis_control(
    j: &EndomorphismField,
    pts: &[Point],
    min: f64,
) -> Result<CheckOutcome, GeomError> {
    let r = nijenhuis_bracket_residual(j, pts)?;
    Ok(CheckOutcome::lower(
        "nijenhuis.broken_control",
        "a non-integrable J is flagged",
        CheckClass::Control,
        r,
        min,
    ))
}

/// Omega_G = p^2 Omega_g + eta ^ eta_bar, coefficient by coefficient.
pub fn decomposition_check(
    wp: &WarpedProduct,
    pts: &[Point],
    tol: f64,
) -> Result<CheckOutcome, GeomError> {
    let omega_g = wp.kahler_form();
    let p2 = wp.warp().mul(wp.warp());
    let scaled = wp.fiber_kahler_form().scale_field(&p2);
    let mixed = wedge(&wp.eta(), &wp.eta_bar())?;
    let diff = omega_g.sub(&scaled).sub(&mixed);
    let r = form_max_abs(&diff, pts)?;
    Ok(CheckOutcome::upper(
        "decomposition",
        "Omega_G = p^2 Omega_g + eta ^ eta_bar",
        CheckClass::Identity,
        r,
        tol,
    ))
}

/// The scale one-form w = 2 d ln p + kappa beta0 eta0 of the product.
pub fn scale_one_form(wp: &WarpedProduct, kappa: f64) -> KForm {
    let dlnp = exterior_derivative(&KForm::scalar(wp.warp().ln()));
    dlnp.scale(2.0).add(&wp.eta0().scale_field(wp.beta0()).scale(kappa))
}

/// d Omega_G = (2 d ln p + kappa beta0 eta0) ^ Omega_G.
pub fn lee_form_check(
    wp: &WarpedProduct,
    kappa: f64,
    pts: &[Point],
    tol: f64,
) -> Result<CheckOutcome, GeomError> {
    let omega_g = wp.kahler_form();
    let d_omega = exterior_derivative(&omega_g);
    let rhs = wedge(&scale_one_form(wp, kappa), &omega_g)?;
    let r = form_max_abs(&d_omega.sub(&rhs), pts)?;
    Ok(CheckOutcome::upper(
        "lee.identity",
        "d Omega_G = (2 d ln p + kappa beta0 eta0) ^ Omega_G",
        CheckClass::Identity,
        r,
        tol,
    ))
}

/// A global rescaling of the product metric and the potential behind it.
#[derive(Clone, Debug)]
pub struct ConformalScale {
    /// u with d u = -(kappa/2) beta0 eta0, vanishing at the chart center.
    pub u: ScalarField,
    /// exp(2(u - ln p)) G.
    pub metric: MetricField,
}

/// Integrates the scale one-form into a potential and rescales the metric.
/// Fails with `NotClosed` when only a local scale exists.
pub fn conformal_scale(
    wp: &WarpedProduct,
    kappa: f64,
    precheck: &[Point],
    closed_tol: f64,
) -> Result<ConformalScale, GeomError> {
    let beta_eta = wp.eta0().scale_field(wp.beta0());
    let base = wp.chart().center();
    let pot = one_form_potential(&beta_eta, &base, precheck, closed_tol)?;
    let u = pot.scale(-kappa / 2.0);
    let factor = u.sub(&wp.warp().ln()).scale(2.0).exp();
    let g = wp.metric();
    let metric = MetricField::from_fn(wp.chart(), |i, j| factor.mul(g.comp(i, j)));
    Ok(ConformalScale { u, metric })
}

/// Rescales the product metric by the integrated scale one-form and checks
/// the result is closed and still J-compatible. A scale one-form without a
/// global potential is reported as a failed outcome, not an error: the
/// structure is then only locally rescalable.
pub fn conformal_checks(
    wp: &WarpedProduct,
    kappa: f64,
    pts: &[Point],
    grad_tol: f64,
    closed_tol: f64,
    herm_tol: f64,
    precheck_tol: f64,
) -> Result<(Vec<CheckOutcome>, Option<ConformalScale>), GeomError> {
    let scale = match conformal_scale(wp, kappa, pts, precheck_tol) {
        Ok(s) => s,
        Err(GeomError::NotClosed { residual, witness }) => {
            let mut r = Residual::new();
            r.observe_coords(residual, &witness);
            let outcome = CheckOutcome::upper(
                "conformal.scale_exists",
                "the scale one-form has a global potential",
                CheckClass::Identity,
                r,
                precheck_tol,
            )
            .with_detail("only a local rescaling exists; d(beta0 eta0) does not vanish");
            return Ok((vec![outcome], None));
        }
        Err(e) => return Err(e),
    };

    // d u + (kappa/2) beta0 eta0 = 0.
    let du = exterior_derivative(&KForm::scalar(scale.u.clone()));
    let aligned = du.add(&wp.eta0().scale_field(wp.beta0()).scale(kappa / 2.0));
    let r_grad = form_max_abs(&aligned, pts)?;

    let omega = fundamental_form(&scale.metric, |k, j| {
        wp.complex_structure().comp(k, j).clone()
    });
    let r_closed = form_max_abs(&exterior_derivative(&omega), pts)?;

    let n = wp.chart().dim();
    let mut r_herm = Residual::new();
    for pt in pts {
        let gm = scale.metric.value(pt)?;
        let jm = wp.complex_structure().value(pt)?;
        let herm = jm.transpose() * &gm * &jm - &gm;
        let mut worst: f64 = 0.0;
        for k in 0..n {
            for j in 0..n {
                worst = worst.max(herm[(k, j)].abs());
            }
        }
        r_herm.observe(worst, pt);
    }

    let checks = vec![
        CheckOutcome::upper(
            "conformal.potential_gradient",
            "d u = -(kappa/2) beta0 eta0",
            CheckClass::Identity,
            r_grad,
            grad_tol,
        ),
        CheckOutcome::upper(
            "conformal.kahler_closed",
            "d Omega = 0 after rescaling by exp(2(u - ln p))",
            CheckClass::Identity,
            r_closed,
            closed_tol,
        ),
        CheckOutcome::upper(
            "conformal.hermitian",
            "rescaled G(J X, J Y) = rescaled G(X, Y)",
            CheckClass::Identity,
            r_herm,
            herm_tol,
        ),
    ];
    Ok((checks, Some(scale)))
}

/// The factor exp(-kappa P), P the potential of beta0 eta0: the scaling
/// under which the product form closes when the warp is constant.
pub fn standard_conformal_factor(
    wp: &WarpedProduct,
    kappa: f64,
    precheck: &[Point],
    closed_tol: f64,
) -> Result<ScalarField, GeomError> {
    let beta_eta = wp.eta0().scale_field(wp.beta0());
    let base = wp.chart().center();
    let pot = one_form_potential(&beta_eta, &base, precheck, closed_tol)?;
    Ok(pot.scale(-kappa).exp())
}

/// xi0(f) as a value at one point.
fn reeb_derivative(wp: &WarpedProduct, f: &ScalarField, pt: &Point) -> Result<f64, GeomError> {
    let (_, grad) = f.value_and_grad(pt)?;
    let mut acc = 0.0;
    for (k, c) in wp.xi0().comps().iter().enumerate() {
        let x = c.value(pt)?;
        if x != 0.0 {
            acc += x * grad[k];
        }
    }
    Ok(acc)
}

/// Converse direction for a constant warp: when d f points along eta0 and
/// p is constant, closing f Omega_G is equivalent to d eta0 = 0 together
/// with d Omega_g = -xi0(ln f) eta0 ^ Omega_g. Hypotheses and conclusions
/// are classed separately so a broken instance shows where it breaks.
pub fn converse_almost_kenmotsu(
    wp: &WarpedProduct,
    f: &ScalarField,
    pts: &[Point],
    hyp_tol: f64,
    con_tol: f64,
    master_tol: f64,
) -> Result<Vec<CheckOutcome>, GeomError> {
    let n = wp.chart().dim();

    // Hypothesis: d f = xi0(f) eta0.
    let mut r_df = Residual::new();
    for pt in pts {
        let (_, grad) = f.value_and_grad(pt)?;
        let s = reeb_derivative(wp, f, pt)?;
        let mut worst: f64 = 0.0;
        for k in 0..n {
            let e = wp.eta0().comp(k).value(pt)?;
            worst = worst.max((grad[k] - s * e).abs());
        }
        r_df.observe(worst, pt);
    }

    // Hypothesis: d p = 0.
    let mut r_dp = Residual::new();
    for pt in pts {
        let (_, grad) = wp.warp().value_and_grad(pt)?;
        let worst = grad.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        r_dp.observe(worst, pt);
    }

    // Conclusion: d eta0 = 0.
    let r_deta = form_max_abs(&exterior_derivative(wp.eta0()), pts)?;

    // Conclusion: d Omega_g + xi0(ln f) eta0 ^ Omega_g = 0.
    let d_omega0 = exterior_derivative(wp.fiber_kahler_form());
    let eta_omega = wedge(wp.eta0(), wp.fiber_kahler_form())?;
    let lnf = f.ln();
    let mut r_domega = Residual::new();
    for pt in pts {
        let s = reeb_derivative(wp, &lnf, pt)?;
        let mut worst: f64 = 0.0;
        for idx in 0..d_omega0.comps().len() {
            let a = d_omega0.comp(idx).value(pt)?;
            let b = eta_omega.comp(idx).value(pt)?;
            worst = worst.max((a + s * b).abs());
        }
        r_domega.observe(worst, pt);
    }

    // Master statement: d (f Omega_G) = 0.
    let f_omega = wp.kahler_form().scale_field(f);
    let r_master = form_max_abs(&exterior_derivative(&f_omega), pts)?;

    Ok(vec![
        CheckOutcome::upper(
            "converse_ak.df_aligned",
            "d f = xi0(f) eta0",
            CheckClass::Hypothesis,
            r_df,
            hyp_tol,
        ),
        CheckOutcome::upper(
            "converse_ak.warp_constant",
            "d p = 0",
            CheckClass::Hypothesis,
            r_dp,
            hyp_tol,
        ),
        CheckOutcome::upper(
            "converse_ak.d_eta",
            "d eta0 = 0",
            CheckClass::Conclusion,
            r_deta,
            con_tol,
        ),
        CheckOutcome::upper(
            "converse_ak.d_omega",
            "d Omega_g = -xi0(ln f) eta0 ^ Omega_g",
            CheckClass::Conclusion,
            r_domega,
            con_tol,
        ),
        CheckOutcome::upper(
            "converse_ak.master",
            "d (f Omega_G) = 0",
            CheckClass::Conclusion,
            r_master,
            master_tol,
        ),
    ])
}

/// Converse direction over a contact-type fiber: when f depends only on the
/// line coordinate, closing f Omega_G forces d Omega_g = 0, the
/// proportionality Omega_g = c d eta0, and the scalar relation
/// p f + c (p^2 f_t + 2 f p p_t) = 0.
pub fn converse_contact(
    wp: &WarpedProduct,
    f: &ScalarField,
    c: f64,
    pts: &[Point],
    hyp_tol: f64,
    con_tol: f64,
    ode_tol: f64,
    master_tol: f64,
) -> Result<Vec<CheckOutcome>, GeomError> {
    let n = wp.chart().dim();

    // Hypothesis: d f = f_t eta_bar, i.e. no fiber dependence.
    let mut r_df = Residual::new();
    for pt in pts {
        let (_, grad) = f.value_and_grad(pt)?;
        let mut worst: f64 = 0.0;
        for g in grad.iter().take(n).skip(1) {
            worst = worst.max(g.abs());
        }
        r_df.observe(worst, pt);
    }

    // Conclusion: d Omega_g = 0.
    let r_closed = form_max_abs(&exterior_derivative(wp.fiber_kahler_form()), pts)?;

    // Conclusion: Omega_g = c d eta0.
    let d_eta0 = exterior_derivative(wp.eta0());
    let r_scale = form_scaled_diff(wp.fiber_kahler_form(), &d_eta0, c, pts)?;

    // Conclusion: p f + c (p^2 f_t + 2 f p p_t) = 0.
    let f_t = f.partial(0);
    let p_t = wp.warp().partial(0);
    let mut r_ode = Residual::new();
    for pt in pts {
        let fv = f.value(pt)?;
        let ftv = f_t.value(pt)?;
        let pv = wp.warp().value(pt)?;
        let ptv = p_t.value(pt)?;
        r_ode.observe(pv * fv + c * (pv * pv * ftv + 2.0 * fv * pv * ptv), pt);
    }

    // Master statement: d (f Omega_G) = 0.
    let f_omega = wp.kahler_form().scale_field(f);
    let r_master = form_max_abs(&exterior_derivative(&f_omega), pts)?;

    Ok(vec![
        CheckOutcome::upper(
            "converse_contact.df_vertical",
            "d f = f_t eta_bar",
            CheckClass::Hypothesis,
            r_df,
            hyp_tol,
        ),
        CheckOutcome::upper(
            "converse_contact.omega_closed",
            "d Omega_g = 0",
            CheckClass::Conclusion,
            r_closed,
            con_tol,
        ),
        CheckOutcome::upper(
            "converse_contact.omega_scale",
            "Omega_g = c d eta0",
            CheckClass::Conclusion,
            r_scale,
            con_tol,
        )
        .with_detail(format!("c = {c}")),
        CheckOutcome::upper(
            "converse_contact.warp_ode",
            "p f + c (p^2 f_t + 2 f p p_t) = 0",
            CheckClass::Conclusion,
            r_ode,
            ode_tol,
        ),
        CheckOutcome::upper(
            "converse_contact.master",
            "d (f Omega_G) = 0",
            CheckClass::Conclusion,
            r_master,
            master_tol,
        ),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::models::{broken_complex_structure, kenmotsu_example, sasakian_r3};

    fn exponential_product() -> WarpedProduct {
        let (acs, beta) = kenmotsu_example(1.0, (-0.7, 0.7), 0.9).unwrap();
        WarpedProduct::build(&acs, &beta, &parse("exp(t)").unwrap(), (-0.8, 0.8)).unwrap()
    }

    fn unit_warp_product() -> WarpedProduct {
        let (acs, beta) = kenmotsu_example(1.0, (-0.7, 0.7), 0.9).unwrap();
        WarpedProduct::build(&acs, &beta, &Expr::Num(1.0), (-0.8, 0.8)).unwrap()
    }

    #[test]
    fn product_structure_frozen_values() {
        let wp = exponential_product();
        assert_eq!(wp.chart().names(), ["t", "s", "x1", "y1"]);
        let pt = wp.chart().point(vec![0.2, 0.1, 0.2, -0.1]).unwrap();
        // J d/dt = xi0 / p has fiber-s component 1/p.
        let j10 = wp.complex_structure().comp(1, 0).value(&pt).unwrap();
        assert!((j10 - (-0.2_f64).exp()).abs() < 1e-15);
        let omega = wp.kahler_form();
        let p = 0.2_f64.exp();
        let xi = [0.0, 1.0 / p, 0.0, 0.0];
        let xi_bar = [1.0, 0.0, 0.0, 0.0];
        let plus = omega.value_on(&pt, &[&xi, &xi_bar]).unwrap();
        let minus = omega.value_on(&pt, &[&xi_bar, &xi]).unwrap();
        assert!((plus - 1.0).abs() < 1e-12);
        assert!((minus + 1.0).abs() < 1e-12);
        let eta_of_xi = wp.eta().value_on(&pt, &[&xi]).unwrap();
        assert!((eta_of_xi - 1.0).abs() < 1e-12);
    }

    #[test]
    fn warp_guards() {
        let (acs, beta) = kenmotsu_example(1.0, (-0.7, 0.7), 0.9).unwrap();
        match WarpedProduct::build(&acs, &beta, &parse("t").unwrap(), (-1.0, 1.0)) {
            Err(GeomError::NonPositiveWarp { t, value }) => {
                assert_eq!(t, -1.0);
                assert_eq!(value, -1.0);
            }
            other => panic!("expected positivity failure, got {other:?}"),
        }
        match WarpedProduct::build(&acs, &beta, &parse("exp(x1)").unwrap(), (-1.0, 1.0)) {
            Err(GeomError::WarpDependsOnFiber(v)) => assert_eq!(v, "x1"),
            other => panic!("expected fiber-dependence failure, got {other:?}"),
        }
    }

    #[test]
    fn structure_and_nabla_j_pass() {
        let wp = exponential_product();
        let pts = wp.chart().sample_points(30, 17, 0.05);
        for c in
            structure_checks(wp.metric(), wp.complex_structure(), &pts, 1e-12, 1e-10, 1e-12)
                .unwrap()
        {
            assert!(c.pass, "{}: {:e}", c.name, c.max_residual);
        }
        for c in nabla_j_checks(&wp, &pts, 1e-8, 0.1).unwrap() {
            assert!(c.pass, "{}: {:e}", c.name, c.max_residual);
        }
    }

    #[test]
    fn nijenhuis_vanishes_and_routes_agree() {
        let wp = exponential_product();
        let pts = wp.chart().sample_points(20, 23, 0.05);
        for c in nijenhuis_checks(wp.metric(), wp.complex_structure(), &pts, 1e-9, 1e-8).unwrap()
        {
            assert!(c.pass, "{}: {:e}", c.name, c.max_residual);
        }
        let broken = broken_complex_structure(wp.complex_structure());
        let control = nijenhuis_control(&broken, &pts, 0.1).unwrap();
        assert!(control.pass, "control residual {:e}", control.max_residual);
    }

    #[test]
    fn decomposition_and_lee_hold_for_several_warps() {
        for warp in ["exp(t)", "1.5", "1 + t^2 / 4"] {
            let (acs, beta) = kenmotsu_example(1.0, (-0.7, 0.7), 0.9).unwrap();
            let wp =
                WarpedProduct::build(&acs, &beta, &parse(warp).unwrap(), (-0.8, 0.8)).unwrap();
            let pts = wp.chart().sample_points(25, 31, 0.05);
            let d = decomposition_check(&wp, &pts, 1e-10).unwrap();
            assert!(d.pass, "{warp}: decomposition {:e}", d.max_residual);
            let lee = lee_form_check(&wp, 2.0, &pts, 1e-8).unwrap();
            assert!(lee.pass, "{warp}: lee {:e}", lee.max_residual);
        }
    }

    #[test]
    fn conformal_scale_matches_closed_form() {
        let wp = exponential_product();
        let pts = wp.chart().sample_points(20, 37, 0.05);
        let (checks, scale) = conformal_checks(&wp, 2.0, &pts, 1e-8, 1e-7, 1e-9, 1e-8).unwrap();
        for c in &checks {
            assert!(c.pass, "{}: {:e}", c.name, c.max_residual);
        }
        // beta0 eta0 = ds, so u = -(s - s_center) up to quadrature error.
        let scale = scale.unwrap();
        let s_center = wp.chart().center().coord(1);
        for pt in &pts {
            let u = scale.u.value(pt).unwrap();
            let want = -(pt.coord(1) - s_center);
            assert!((u - want).abs() < 1e-10, "{u} vs {want}");
        }
    }

    #[test]
    fn converse_with_constant_warp() {
        let wp = unit_warp_product();
        let pts = wp.chart().sample_points(20, 41, 0.05);
        let f = standard_conformal_factor(&wp, 2.0, &pts, 1e-8).unwrap();
        for c in converse_almost_kenmotsu(&wp, &f, &pts, 1e-9, 1e-8, 1e-7).unwrap() {
            assert!(c.pass, "{}: {:e}", c.name, c.max_residual);
        }
    }

    #[test]
    fn converse_controls_fail_where_expected() {
        let wp = unit_warp_product();
        let pts = wp.chart().sample_points(20, 43, 0.05);

        // Constant factor: hypotheses hold, the conclusions tied to the
        // fiber scale break.
        let konst = ScalarField::constant(wp.chart(), 1.0);
        let checks = converse_almost_kenmotsu(&wp, &konst, &pts, 1e-9, 1e-8, 1e-7).unwrap();
        let by_name = |n: &str| checks.iter().find(|c| c.name.ends_with(n)).unwrap();
        assert!(by_name("df_aligned").pass);
        assert!(by_name("warp_constant").pass);
        assert!(by_name("d_eta").pass);
        assert!(!by_name("d_omega").pass);
        assert!(!by_name("master").pass);

        // A line-dependent factor breaks the alignment hypothesis.
        let vertical = ScalarField::coordinate(wp.chart(), 0).exp();
        let checks = converse_almost_kenmotsu(&wp, &vertical, &pts, 1e-9, 1e-8, 1e-7).unwrap();
        let df = checks.iter().find(|c| c.name.ends_with("df_aligned")).unwrap();
        assert!(!df.pass);
        assert!(df.max_residual >= 0.1);
    }

    #[test]
    fn converse_contact_over_the_contact_fiber() {
        let acs = sasakian_r3(0.9).unwrap();
        let zero = ScalarField::constant(acs.chart(), 0.0);
        let wp = WarpedProduct::build(&acs, &zero, &Expr::Num(1.0), (-0.8, 0.8)).unwrap();
        let pts = wp.chart().sample_points(20, 47, 0.05);
        let c = -0.5;
        // p f + c (p^2 f_t + 2 f p p_t) = 0 with p = 1 forces f = e^{-t/c}.
        let f = ScalarField::coordinate(wp.chart(), 0).scale(-1.0 / c).exp();
        for out in converse_contact(&wp, &f, c, &pts, 1e-9, 1e-8, 1e-9, 1e-7).unwrap() {
            assert!(out.pass, "{}: {:e}", out.name, out.max_residual);
        }

        // A constant factor keeps the hypothesis but breaks the relation.
        let konst = ScalarField::constant(wp.chart(), 1.0);
        let checks = converse_contact(&wp, &konst, c, &pts, 1e-9, 1e-8, 1e-9, 1e-7).unwrap();
        let by_name = |n: &str| checks.iter().find(|c| c.name.ends_with(n)).unwrap();
        assert!(by_name("df_vertical").pass);
        assert!(!by_name("warp_ode").pass);
        assert!(!by_name("master").pass);
    }

    #[test]
    fn fiber_structure_slices_and_splits() {
        let wp = exponential_product();
        let (slice, beta) = wp.fiber_structure(0.3).unwrap();
        let pts = slice.chart().sample_points(15, 53, 0.05);
        for c in crate::contact::check_axioms(&slice, &pts, 1e-9).unwrap() {
            assert!(c.pass, "{}: {:e}", c.name, c.max_residual);
        }
        let b = beta.value(&pts[0]).unwrap();
        assert!((b - (-0.3_f64).exp()).abs() < 1e-15);
        let v = [2.0, 3.0, 4.0, 5.0];
        let (line, fiber) = wp.split(&v);
        assert_eq!(line, 2.0);
        assert_eq!(fiber, &[3.0, 4.0, 5.0]);
    }
}
