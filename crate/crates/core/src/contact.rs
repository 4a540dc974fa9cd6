//! Almost-contact metric structures and their identity checks.
//!
//! A structure is the tuple (phi, xi, eta, g) on an odd-dimensional chart.
//! Checks report max-abs residuals over sampled points; the pairing scale
//! used by the two-form identities is calibrated from data, not assumed.

use nalgebra::DMatrix;

use crate::calculus::{
    connection_at, exterior_derivative, form_scaled_diff, wedge, ConnectionAt, GeomError,
};
use crate::chart::{Chart, Point};
use crate::field::{EndomorphismField, KForm, MetricField, ScalarField, VectorField};
use crate::report::{CheckClass, CheckOutcome, Residual};

#[derive(Clone, Debug)]
pub struct AlmostContactStructure {
    chart: Chart,
    phi: EndomorphismField,
    xi: VectorField,
    eta: KForm,
    g: MetricField,
}

impl AlmostContactStructure {
    pub fn new(
        phi: EndomorphismField,
        xi: VectorField,
        eta: KForm,
        g: MetricField,
    ) -> Result<AlmostContactStructure, GeomError> {
        let chart = g.chart().clone();
        if chart.dim() % 2 == 0 {
            return Err(GeomError::EvenDimension(chart.dim()));
        }
        if phi.chart() != &chart || xi.chart() != &chart || eta.chart() != &chart {
            return Err(GeomError::Field(crate::field::FieldError::ChartMismatch));
        }
        if eta.degree() != 1 {
            return Err(GeomError::WrongDegree {
                expected: "one-form",
                got: eta.degree(),
            });
        }
        Ok(AlmostContactStructure {
            chart,
            phi,
            xi,
            eta,
            g,
        })
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }
    pub fn phi(&self) -> &EndomorphismField {
        &self.phi
    }
    pub fn xi(&self) -> &VectorField {
        &self.xi
    }
    pub fn eta(&self) -> &KForm {
        &self.eta
    }
    pub fn g(&self) -> &MetricField {
        &self.g
    }
}

/// Everything a pointwise check needs, evaluated once.
pub struct AcsAt {
    pub conn: ConnectionAt,
    pub phi: DMatrix<f64>,
    pub dphi: Vec<DMatrix<f64>>,
    pub xi: Vec<f64>,
    pub xi_jac: Vec<Vec<f64>>,
    pub eta: Vec<f64>,
}

pub fn acs_at(acs: &AlmostContactStructure, pt: &Point) -> Result<AcsAt, GeomError> {
    let conn = connection_at(acs.g(), pt)?;
    let (phi, dphi) = acs.phi().value_and_partials(pt)?;
    let (xi, xi_jac) = acs.xi().value_and_jac(pt)?;
    let n = acs.chart().dim();
    let mut eta = vec![0.0; n];
    for (j, e) in eta.iter_mut().enumerate() {
        *e = acs.eta().comp(j).value(pt)?;
    }
    Ok(AcsAt {
        conn,
        phi,
        dphi,
        xi,
        xi_jac,
        eta,
    })
}

/// The five pointwise axioms of an almost-contact metric structure.
pub fn check_axioms(
    acs: &AlmostContactStructure,
    pts: &[Point],
    tol: f64,
) -> Result<Vec<CheckOutcome>, GeomError> {
    let n = acs.chart().dim();
    let mut r_phi2 = Residual::new();
    let mut r_eta_xi = Residual::new();
    let mut r_phi_xi = Residual::new();
    let mut r_eta_phi = Residual::new();
    let mut r_compat = Residual::new();
    for pt in pts {
        let at = acs_at(acs, pt)?;
        let phi2 = &at.phi * &at.phi;
        let mut worst_phi2: f64 = 0.0;
        let mut worst_compat: f64 = 0.0;
        for k in 0..n {
            for j in 0..n {
                let id = if k == j { 1.0 } else { 0.0 };
                // phi^2 + Id - xi (x) eta = 0.
                worst_phi2 = worst_phi2.max((phi2[(k, j)] + id - at.xi[k] * at.eta[j]).abs());
                // g(phi e_k, phi e_j) - g_kj + eta_k eta_j = 0.
                let mut gphiphi = 0.0;
                for a in 0..n {
                    for b in 0..n {
                        gphiphi += at.phi[(a, k)] * at.conn.g[(a, b)] * at.phi[(b, j)];
                    }
                }
                worst_compat = worst_compat
                    .max((gphiphi - at.conn.g[(k, j)] + at.eta[k] * at.eta[j]).abs());
            }
        }
        r_phi2.observe(worst_phi2, pt);
        r_compat.observe(worst_compat, pt);
        let eta_xi: f64 = at.eta.iter().zip(&at.xi).map(|(a, b)| a * b).sum();
        r_eta_xi.observe(eta_xi - 1.0, pt);
        let mut worst_phi_xi: f64 = 0.0;
        let mut worst_eta_phi: f64 = 0.0;
        for k in 0..n {
            let mut phixi = 0.0;
            let mut etaphi = 0.0;
            for j in 0..n {
                phixi += at.phi[(k, j)] * at.xi[j];
                etaphi += at.eta[j] * at.phi[(j, k)];
            }
            worst_phi_xi = worst_phi_xi.max(phixi.abs());
            worst_eta_phi = worst_eta_phi.max(etaphi.abs());
        }
        r_phi_xi.observe(worst_phi_xi, pt);
        r_eta_phi.observe(worst_eta_phi, pt);
    }
    Ok(vec![
        CheckOutcome::upper(
            "axioms.phi_squared",
            "phi^2 = -Id + xi (x) eta",
            CheckClass::Identity,
            r_phi2,
            tol,
        ),
        CheckOutcome::upper(
            "axioms.eta_xi",
            "eta(xi) = 1",
            CheckClass::Identity,
            r_eta_xi,
            tol,
        ),
        CheckOutcome::upper(
            "axioms.phi_xi",
            "phi(xi) = 0",
            CheckClass::Identity,
            r_phi_xi,
            tol,
        ),
        CheckOutcome::upper(
            "axioms.eta_phi",
            "eta o phi = 0",
            CheckClass::Identity,
            r_eta_phi,
            tol,
        ),
        CheckOutcome::upper(
            "axioms.compatibility",
            "g(phi X, phi Y) = g(X, Y) - eta(X) eta(Y)",
            CheckClass::Identity,
            r_compat,
            tol,
        ),
    ])
}

/// The fundamental two-form Omega(X, Y) = g(X, phi Y) as a field-level form.
pub fn kahler_form(acs: &AlmostContactStructure) -> KForm {
    fundamental_form(acs.g(), |k, j| acs.phi().comp(k, j).clone())
}

/// Omega_ij = g(e_i, T e_j) for i < j, for any endomorphism given by its
/// component fields.
pub fn fundamental_form(
    g: &MetricField,
    t_comp: impl Fn(usize, usize) -> ScalarField,
) -> KForm {
    let chart = g.chart().clone();
    let n = chart.dim();
    let sets = crate::field::multi_indices(n, 2);
    let comps = sets
        .iter()
        .map(|set| {
            let (i, j) = (set[0], set[1]);
            let mut acc = ScalarField::constant(&chart, 0.0);
            for k in 0..n {
                acc = acc.add(&g.comp(i, k).mul(&t_comp(k, j)));
            }
            acc
        })
        .collect();
    KForm::new(&chart, 2, comps).expect("one coefficient per index pair")
}

/// Residual of the trans-Sasakian covariant-derivative identity
/// (nabla_X phi)Y = alpha (g(X,Y) xi - eta(Y) X) + beta (g(phi X, Y) xi - eta(Y) phi X)
/// over basis pairs at the given points.
pub fn trans_sasakian_residual(
    acs: &AlmostContactStructure,
    alpha: &ScalarField,
    beta: &ScalarField,
    pts: &[Point],
) -> Result<Residual, GeomError> {
    let n = acs.chart().dim();
    let mut r = Residual::new();
    for pt in pts {
        let at = acs_at(acs, pt)?;
        let a = alpha.value(pt)?;
        let b = beta.value(pt)?;
        let mut worst: f64 = 0.0;
        let mut e = vec![0.0; n];
        for i in 0..n {
            e[i] = 1.0;
            let nabla_phi = at.conn.cov_endo(&e, &at.phi, &at.dphi);
            e[i] = 0.0;
            for j in 0..n {
                // g(phi e_i, e_j) = sum_l phi^l_i g_lj.
                let mut gphabsent = 0.0;
                for l in 0..n {
                    gphabsent += at.phi[(l, i)] * at.conn.g[(l, j)];
                }
                for k in 0..n {
                    let delta = if k == i { 1.0 } else { 0.0 };
                    let rhs = a * (at.conn.g[(i, j)] * at.xi[k] - at.eta[j] * delta)
                        + b * (gphabsent * at.xi[k] - at.eta[j] * at.phi[(k, i)]);
                    worst = worst.max((nabla_phi[(k, j)] - rhs).abs());
                }
            }
        }
        r.observe(worst, pt);
    }
    Ok(r)
}

/// The covariant-derivative identities defining the fiber structure, plus
/// closedness of eta. The two-form identity lives in the pairing-scale
/// checks.
pub fn kenmotsu_checks(
    acs: &AlmostContactStructure,
    beta: &ScalarField,
    pts: &[Point],
    tol: f64,
) -> Result<Vec<CheckOutcome>, GeomError> {
    let zero = ScalarField::constant(acs.chart(), 0.0);
    let r_phi = trans_sasakian_residual(acs, &zero, beta, pts)?;

    let n = acs.chart().dim();
    let mut r_xi = Residual::new();
    for pt in pts {
        let at = acs_at(acs, pt)?;
        let b = beta.value(pt)?;
        let mut worst: f64 = 0.0;
        let mut e = vec![0.0; n];
        for i in 0..n {
            e[i] = 1.0;
            let nabla_xi = at.conn.cov_vector(&e, &at.xi, &at.xi_jac);
            e[i] = 0.0;
            for k in 0..n {
                let delta = if k == i { 1.0 } else { 0.0 };
                let rhs = b * (delta - at.eta[i] * at.xi[k]);
                worst = worst.max((nabla_xi[k] - rhs).abs());
            }
        }
        r_xi.observe(worst, pt);
    }

    let deta = exterior_derivative(acs.eta());
    let r_deta = crate::calculus::form_max_abs(&deta, pts)?;

    Ok(vec![
        CheckOutcome::upper(
            "kenmotsu.nabla_phi",
            "(nabla_X phi)Y = beta (g(phi X, Y) xi - eta(Y) phi X)",
            CheckClass::Identity,
            r_phi,
            tol,
        ),
        CheckOutcome::upper(
            "kenmotsu.nabla_xi",
            "nabla_X xi = beta (X - eta(X) xi)",
            CheckClass::Identity,
            r_xi,
            tol,
        ),
        CheckOutcome::upper(
            "kenmotsu.d_eta",
            "d eta = 0",
            CheckClass::Identity,
            r_deta,
            tol,
        ),
    ])
}

#[derive(Clone, Debug)]
pub struct KappaCalibration {
    pub kappa: f64,
    pub winning: Residual,
    pub losing_kappa: f64,
    pub losing: Residual,
}

/// Decides the scale in d Omega = kappa beta eta ^ Omega from the candidates
/// {1, 2}. Under the determinant pairing convention the data picks 2; the
/// value is measured, not assumed. Ambiguous data (both candidates fit, as
/// for beta = 0) is an error.
pub fn calibrate_kappa(
    acs: &AlmostContactStructure,
    beta: &ScalarField,
    pts: &[Point],
    win_tol: f64,
) -> Result<KappaCalibration, GeomError> {
    let omega = kahler_form(acs);
    let d_omega = exterior_derivative(&omega);
    let beta_eta = acs.eta().scale_field(beta);
    let rhs = wedge(&beta_eta, &omega)?;
    let mut results: Vec<(f64, Residual)> = Vec::new();
    for cand in [1.0, 2.0] {
        results.push((cand, form_scaled_diff(&d_omega, &rhs, cand, pts)?));
    }
    results.sort_by(|a, b| a.1.max.total_cmp(&b.1.max));
    let (best, best_r) = results[0].clone();
    let (second, second_r) = results[1].clone();
    if second_r.max <= win_tol {
        return Err(GeomError::CalibrationFailed {
            name: "kappa",
            best,
            residual: best_r.max,
        });
    }
    Ok(KappaCalibration {
        kappa: best,
        winning: best_r,
        losing_kappa: second,
        losing: second_r,
    })
}

pub fn kappa_checks(cal: &KappaCalibration, win_tol: f64, lose_min: f64) -> Vec<CheckOutcome> {
    vec![
        CheckOutcome::upper(
            "kappa.winner",
            "d Omega = kappa beta eta ^ Omega",
            CheckClass::Calibration,
            cal.winning.clone(),
            win_tol,
        )
        .with_detail(format!("kappa = {}", cal.kappa)),
        CheckOutcome::lower(
            "kappa.loser_separated",
            "the rejected scale deviates visibly",
            CheckClass::Calibration,
            cal.losing.clone(),
            lose_min,
        )
        .with_detail(format!("rejected kappa = {}", cal.losing_kappa)),
    ]
}

/// Combined residual of the two almost-Kenmotsu conditions, d eta = 0 and
/// d Omega = kappa beta eta ^ Omega. Structures with d eta != 0 fail by a
/// wide margin.
pub fn almost_kenmotsu_check(
    acs: &AlmostContactStructure,
    beta: &ScalarField,
    kappa: f64,
    pts: &[Point],
    tol: f64,
) -> Result<CheckOutcome, GeomError> {
    let deta = exterior_derivative(acs.eta());
    let mut r = crate::calculus::form_max_abs(&deta, pts)?;
    let omega = kahler_form(acs);
    let d_omega = exterior_derivative(&omega);
    let rhs = wedge(&acs.eta().scale_field(beta), &omega)?;
    r.merge(&form_scaled_diff(&d_omega, &rhs, kappa, pts)?);
    Ok(CheckOutcome::upper(
        "almost_kenmotsu",
        "d eta = 0 and d Omega = kappa beta eta ^ Omega",
        CheckClass::Identity,
        r,
        tol,
    ))
}

/// Calibrates the constant alpha in the trans-Sasakian identity with
/// beta = 0, from the candidates {1, -1}.
pub fn calibrate_alpha(
    acs: &AlmostContactStructure,
    pts: &[Point],
    win_tol: f64,
) -> Result<(f64, Residual), GeomError> {
    let zero = ScalarField::constant(acs.chart(), 0.0);
    let mut results: Vec<(f64, Residual)> = Vec::new();
    for cand in [1.0, -1.0] {
        let alpha = ScalarField::constant(acs.chart(), cand);
        results.push((cand, trans_sasakian_residual(acs, &alpha, &zero, pts)?));
    }
    results.sort_by(|a, b| a.1.max.total_cmp(&b.1.max));
    if results[1].1.max <= win_tol {
        return Err(GeomError::CalibrationFailed {
            name: "alpha",
            best: results[0].0,
            residual: results[0].1.max,
        });
    }
    Ok(results[0].clone())
}

#[derive(Clone, Debug)]
pub struct ContactScale {
    pub c: f64,
    pub winning: Residual,
    pub losing_c: f64,
    pub losing: Residual,
}

/// Calibrates the constant c in Omega = c d eta from the candidates
/// {1/2, -1/2, 1, -1, 2, -2}. Under the pairing Omega(X, Y) = g(X, phi Y)
/// the unit contact structure on R^3 picks -1/2.
pub fn calibrate_contact_scale(
    acs: &AlmostContactStructure,
    pts: &[Point],
    win_tol: f64,
) -> Result<ContactScale, GeomError> {
    let omega = kahler_form(acs);
    let d_eta = exterior_derivative(acs.eta());
    let mut results: Vec<(f64, Residual)> = Vec::new();
    for cand in [0.5, -0.5, 1.0, -1.0, 2.0, -2.0] {
        results.push((cand, form_scaled_diff(&omega, &d_eta, cand, pts)?));
    }
    results.sort_by(|a, b| a.1.max.total_cmp(&b.1.max));
    if results[1].1.max <= win_tol {
        return Err(GeomError::CalibrationFailed {
            name: "c",
            best: results[0].0,
            residual: results[0].1.max,
        });
    }
    Ok(ContactScale {
        c: results[0].0,
        winning: results[0].1.clone(),
        losing_c: results[1].0,
        losing: results[1].1.clone(),
    })
}

pub fn contact_scale_checks(cal: &ContactScale, win_tol: f64, lose_min: f64) -> Vec<CheckOutcome> {
    vec![
        CheckOutcome::upper(
            "contact_scale.winner",
            "Omega = c d eta",
            CheckClass::Calibration,
            cal.winning.clone(),
            win_tol,
        )
        .with_detail(format!("c = {}", cal.c)),
        CheckOutcome::lower(
            "contact_scale.loser_separated",
            "the nearest rejected scale deviates visibly",
            CheckClass::Calibration,
            cal.losing.clone(),
            lose_min,
        )
        .with_detail(format!("rejected c = {}", cal.losing_c)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::GeomError;
    use crate::field::VectorField;
    use crate::models::{kenmotsu_cosh, kenmotsu_example, sasakian_r3};

    fn exponential_fiber(c: f64) -> (AlmostContactStructure, ScalarField) {
        kenmotsu_example(c, (-0.7, 0.7), 0.9).unwrap()
    }

    /// Flat product structure: identity metric, eta = ds, phi rotating the
    /// (x, y) block. Every covariant residual is zero.
    fn cosymplectic() -> AlmostContactStructure {
        let chart = Chart::new(vec!["s", "x", "y"], vec![(-1.0, 1.0); 3]).unwrap();
        let k = |v: f64| ScalarField::constant(&chart, v);
        let g = MetricField::from_fn(&chart, |i, j| k(if i == j { 1.0 } else { 0.0 }));
        let eta = KForm::one_form(&chart, vec![k(1.0), k(0.0), k(0.0)]).unwrap();
        let xi = VectorField::basis(&chart, 0);
        let mut phi = vec![vec![k(0.0); 3]; 3];
        phi[2][1] = k(1.0);
        phi[1][2] = k(-1.0);
        let phi = EndomorphismField::new(&chart, phi).unwrap();
        AlmostContactStructure::new(phi, xi, eta, g).unwrap()
    }

    #[test]
    fn axioms_hold_on_the_exponential_fiber() {
        let (acs, _) = exponential_fiber(0.7);
        let pts = acs.chart().sample_points(40, 11, 0.05);
        for c in check_axioms(&acs, &pts, 1e-9).unwrap() {
            assert!(c.pass, "{}: {:e}", c.name, c.max_residual);
        }
    }

    #[test]
    fn scaled_eta_breaks_duality() {
        let (acs, _) = exponential_fiber(1.0);
        let doubled = AlmostContactStructure::new(
            acs.phi().clone(),
            acs.xi().clone(),
            acs.eta().scale(2.0),
            acs.g().clone(),
        )
        .unwrap();
        let pts = doubled.chart().sample_points(10, 3, 0.05);
        let checks = check_axioms(&doubled, &pts, 1e-9).unwrap();
        let eta_xi = checks.iter().find(|c| c.name == "axioms.eta_xi").unwrap();
        assert!(!eta_xi.pass);
        assert_eq!(eta_xi.max_residual, 1.0);
    }

    #[test]
    fn fundamental_form_matches_closed_form() {
        let (acs, _) = exponential_fiber(0.7);
        let omega = kahler_form(&acs);
        let pt = acs.chart().point(vec![0.4, 0.1, -0.2]).unwrap();
        let got = omega.coefficient(&[1, 2]).unwrap().value(&pt).unwrap();
        let want = -(0.7_f64 * 0.4_f64.exp()).powi(2);
        assert!((got - want).abs() < 1e-14 * want.abs());
    }

    #[test]
    fn kenmotsu_residuals_vanish_for_both_fibers() {
        let cosh = kenmotsu_cosh((-0.7, 0.7), 0.9).unwrap();
        for (acs, beta) in [exponential_fiber(1.0), cosh] {
            let pts = acs.chart().sample_points(30, 5, 0.05);
            for c in kenmotsu_checks(&acs, &beta, &pts, 1e-8).unwrap() {
                assert!(c.pass, "{}: {:e}", c.name, c.max_residual);
            }
        }
    }

    #[test]
    fn contact_fiber_fails_kenmotsu_with_zero_beta() {
        let acs = sasakian_r3(0.9).unwrap();
        let zero = ScalarField::constant(acs.chart(), 0.0);
        let pts = acs.chart().sample_points(30, 5, 0.05);
        let checks = kenmotsu_checks(&acs, &zero, &pts, 1e-8).unwrap();
        let nabla_phi = &checks[0];
        assert!(!nabla_phi.pass);
        assert!(nabla_phi.max_residual >= 0.1);
        let d_eta = checks.iter().find(|c| c.name == "kenmotsu.d_eta").unwrap();
        assert_eq!(d_eta.max_residual, 0.5);
    }

    #[test]
    fn cosymplectic_product_passes_with_zero_coefficients() {
        let acs = cosymplectic();
        let zero = ScalarField::constant(acs.chart(), 0.0);
        let pts = acs.chart().sample_points(20, 9, 0.05);
        for c in check_axioms(&acs, &pts, 1e-12).unwrap() {
            assert!(c.pass, "{}", c.name);
        }
        for c in kenmotsu_checks(&acs, &zero, &pts, 1e-12).unwrap() {
            assert!(c.pass, "{}", c.name);
        }
        let r = trans_sasakian_residual(&acs, &zero, &zero, &pts).unwrap();
        assert!(r.max < 1e-12);
        // d Omega and beta eta ^ Omega both vanish: no scale is decidable.
        match calibrate_kappa(&acs, &zero, &pts, 1e-8) {
            Err(GeomError::CalibrationFailed { name, .. }) => assert_eq!(name, "kappa"),
            other => panic!("expected ambiguity, got {other:?}"),
        }
    }

    #[test]
    fn kappa_calibration_picks_two_and_separates() {
        let (acs, beta) = exponential_fiber(1.0);
        let pts = acs.chart().sample_points(30, 7, 0.05);
        let cal = calibrate_kappa(&acs, &beta, &pts, 1e-8).unwrap();
        assert_eq!(cal.kappa, 2.0);
        assert_eq!(cal.losing_kappa, 1.0);
        assert!(cal.winning.max <= 1e-10);
        assert!(cal.losing.max >= 0.1);
        for c in kappa_checks(&cal, 1e-8, 0.1) {
            assert!(c.pass, "{}: {:e}", c.name, c.max_residual);
        }
        let ak = almost_kenmotsu_check(&acs, &beta, cal.kappa, &pts, 1e-8).unwrap();
        assert!(ak.pass);
    }

    #[test]
    fn alpha_calibration_on_the_contact_example() {
        let acs = sasakian_r3(0.9).unwrap();
        let pts = acs.chart().sample_points(30, 7, 0.05);
        let (alpha, r) = calibrate_alpha(&acs, &pts, 1e-8).unwrap();
        assert_eq!(alpha, -1.0);
        assert!(r.max <= 1e-9, "{:e}", r.max);
    }

    #[test]
    fn contact_scale_calibration_picks_minus_half() {
        let acs = sasakian_r3(0.9).unwrap();
        let pts = acs.chart().sample_points(30, 7, 0.05);
        let cal = calibrate_contact_scale(&acs, &pts, 1e-10).unwrap();
        assert_eq!(cal.c, -0.5);
        assert!(cal.winning.max <= 1e-12, "{:e}", cal.winning.max);
        assert_eq!(cal.losing_c, -1.0);
        assert!((cal.losing.max - 0.25).abs() < 1e-12, "{:e}", cal.losing.max);
        for c in contact_scale_checks(&cal, 1e-10, 0.1) {
            assert!(c.pass, "{}", c.name);
        }

        // With phi = 0 both Omega and d eta vanish, so every candidate fits
        // and the calibration refuses to pick one.
        let chart = Chart::new(vec!["s", "x", "y"], vec![(-1.0, 1.0); 3]).unwrap();
        let k = |v: f64| ScalarField::constant(&chart, v);
        let g = MetricField::from_fn(&chart, |i, j| k(if i == j { 1.0 } else { 0.0 }));
        let degenerate = AlmostContactStructure::new(
            EndomorphismField::from_fn(&chart, |_, _| k(0.0)),
            VectorField::basis(&chart, 0),
            KForm::one_form(&chart, vec![k(1.0), k(0.0), k(0.0)]).unwrap(),
            g,
        )
        .unwrap();
        let flat_pts = chart.sample_points(10, 3, 0.05);
        assert!(matches!(
            calibrate_contact_scale(&degenerate, &flat_pts, 1e-10),
            Err(GeomError::CalibrationFailed { name: "c", .. })
        ));
    }
}
