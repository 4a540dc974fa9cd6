//! Tensor calculus over a chart: Levi-Civita connection, covariant
//! derivatives, Lie brackets, exterior algebra, and potentials of closed
//! one-forms.

use nalgebra::DMatrix;
use std::sync::Arc;

use crate::chart::Point;
use crate::field::{
    multi_index_rank, multi_indices, FieldError, KForm, MetricField, Node, ScalarField,
    VectorField, POTENTIAL_MAX_PANELS, POTENTIAL_STEP_TOL,
};

#[derive(Clone, Debug, thiserror::Error)]
pub enum GeomError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("metric is singular at {point:?}")]
    SingularMetric { point: Vec<f64> },
    #[error("metric is not positive definite at {point:?}: leading minor {minor:e}")]
    NotPositiveDefinite { point: Vec<f64>, minor: f64 },
    #[error("one-form is not closed: max |d omega| = {residual:e} at {witness:?}")]
    NotClosed { residual: f64, witness: Vec<f64> },
    #[error("wedge degree {degree} exceeds chart dimension {dim}")]
    DegreeOverflow { degree: usize, dim: usize },
    #[error("expected a {expected}, got degree {got}")]
    WrongDegree { expected: &'static str, got: usize },
    #[error("warp must stay positive: p({t}) = {value}")]
    NonPositiveWarp { t: f64, value: f64 },
    #[error("warp expression may only depend on the line coordinate, found `{0}`")]
    WarpDependsOnFiber(String),
    #[error("structure dimension must be odd, got {0}")]
    EvenDimension(usize),
    #[error("calibration of {name} is ambiguous or failed: best {best} with residual {residual:e}")]
    CalibrationFailed {
        name: &'static str,
        best: f64,
        residual: f64,
    },
    #[error("invalid parameter `{name}`: {reason}")]
    BadParameter { name: String, reason: String },
    #[error("chart: {0}")]
    Chart(#[from] crate::chart::ChartError),
    #[error("expression: {0}")]
    Parse(#[from] crate::expr::ParseError),
    #[error("tower level {level} failed {check}: residual {residual:e}")]
    TowerLevelFailed {
        level: usize,
        check: String,
        residual: f64,
    },
}

/// The Levi-Civita data of a metric evaluated at one point.
pub struct ConnectionAt {
    pub dim: usize,
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
    /// dg[l] = partial_l of the metric matrix.
    pub dg: Vec<DMatrix<f64>>,
    /// gamma[k][(i, j)] = Gamma^k_ij, symmetric in (i, j).
    pub gamma: Vec<DMatrix<f64>>,
}

pub fn connection_at(g: &MetricField, pt: &Point) -> Result<ConnectionAt, GeomError> {
    let n = g.chart().dim();
    let (gm, dg) = g.value_and_partials(pt)?;
    let g_inv = gm
        .clone()
        .try_inverse()
        .ok_or_else(|| GeomError::SingularMetric {
            point: pt.coords().to_vec(),
        })?;
    let mut gamma = vec![DMatrix::zeros(n, n); n];
    for k in 0..n {
        for i in 0..n {
            for j in i..n {
                let mut sum = 0.0;
                for l in 0..n {
                    sum += g_inv[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
                }
                let v = 0.5 * sum;
                gamma[k][(i, j)] = v;
                gamma[k][(j, i)] = v;
            }
        }
    }
    Ok(ConnectionAt {
        dim: n,
        g: gm,
        g_inv,
        dg,
        gamma,
    })
}

impl ConnectionAt {
    /// (nabla_X Y)^k = X^i d_i Y^k + Gamma^k_ij X^i Y^j, from evaluated data;
    /// `y_jac[k][i] = d_i Y^k`.
    pub fn cov_vector(&self, x: &[f64], y: &[f64], y_jac: &[Vec<f64>]) -> Vec<f64> {
        let n = self.dim;
        let mut out = vec![0.0; n];
        for k in 0..n {
            let mut acc = 0.0;
            for i in 0..n {
                acc += x[i] * y_jac[k][i];
                for j in 0..n {
                    acc += self.gamma[k][(i, j)] * x[i] * y[j];
                }
            }
            out[k] = acc;
        }
        out
    }

    /// (nabla_X T)^k_j = X^i d_i T^k_j + X^i Gamma^k_il T^l_j - X^i Gamma^l_ij T^k_l.
    pub fn cov_endo(
        &self,
        x: &[f64],
        t: &DMatrix<f64>,
        t_parts: &[DMatrix<f64>],
    ) -> DMatrix<f64> {
        let n = self.dim;
        let mut out = DMatrix::zeros(n, n);
        for k in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for i in 0..n {
                    if x[i] == 0.0 {
                        continue;
                    }
                    let mut term = t_parts[i][(k, j)];
                    for l in 0..n {
                        term += self.gamma[k][(i, l)] * t[(l, j)];
                        term -= self.gamma[l][(i, j)] * t[(k, l)];
                    }
                    acc += x[i] * term;
                }
                out[(k, j)] = acc;
            }
        }
        out
    }

    /// (nabla_X w)_j = X^i d_i w_j - X^i Gamma^l_ij w_l;
    /// `w_grads[j][i] = d_i w_j`.
    pub fn cov_oneform(&self, x: &[f64], w: &[f64], w_grads: &[Vec<f64>]) -> Vec<f64> {
        let n = self.dim;
        let mut out = vec![0.0; n];
        for j in 0..n {
            let mut acc = 0.0;
            for i in 0..n {
                if x[i] == 0.0 {
                    continue;
                }
                let mut term = w_grads[j][i];
                for l in 0..n {
                    term -= self.gamma[l][(i, j)] * w[l];
                }
                acc += x[i] * term;
            }
            out[j] = acc;
        }
        out
    }
}

pub fn covariant_derivative_vector(
    g: &MetricField,
    x: &VectorField,
    y: &VectorField,
    pt: &Point,
) -> Result<Vec<f64>, GeomError> {
    let conn = connection_at(g, pt)?;
    let xv = x.value(pt)?;
    let (yv, yj) = y.value_and_jac(pt)?;
    Ok(conn.cov_vector(&xv, &yv, &yj))
}

pub fn covariant_derivative_endo(
    g: &MetricField,
    t: &crate::field::EndomorphismField,
    x: &VectorField,
    pt: &Point,
) -> Result<DMatrix<f64>, GeomError> {
    let conn = connection_at(g, pt)?;
    let xv = x.value(pt)?;
    let (tv, tp) = t.value_and_partials(pt)?;
    Ok(conn.cov_endo(&xv, &tv, &tp))
}

pub fn covariant_derivative_oneform(
    g: &MetricField,
    w: &KForm,
    x: &VectorField,
    pt: &Point,
) -> Result<Vec<f64>, GeomError> {
    if w.degree() != 1 {
        return Err(GeomError::WrongDegree {
            expected: "one-form",
            got: w.degree(),
        });
    }
    let conn = connection_at(g, pt)?;
    let xv = x.value(pt)?;
    let n = w.chart().dim();
    let mut wv = vec![0.0; n];
    let mut wg = vec![vec![0.0; n]; n];
    for j in 0..n {
        let (v, grad) = w.comp(j).value_and_grad(pt)?;
        wv[j] = v;
        wg[j] = grad;
    }
    Ok(conn.cov_oneform(&xv, &wv, &wg))
}

/// [X, Y]^k = X^i d_i Y^k - Y^i d_i X^k.
pub fn lie_bracket(x: &VectorField, y: &VectorField, pt: &Point) -> Result<Vec<f64>, GeomError> {
    let (xv, xj) = x.value_and_jac(pt)?;
    let (yv, yj) = y.value_and_jac(pt)?;
    let n = xv.len();
    let mut out = vec![0.0; n];
    for k in 0..n {
        let mut acc = 0.0;
        for i in 0..n {
            acc += xv[i] * yj[k][i] - yv[i] * xj[k][i];
        }
        out[k] = acc;
    }
    Ok(out)
}

/// Sorted union of two disjoint increasing index sets with the sign of the
/// permutation that sorts the concatenation.
fn merge_sign(sa: &[usize], sb: &[usize]) -> (Vec<usize>, f64) {
    let mut inversions = 0usize;
    for &x in sa {
        for &y in sb {
            if y < x {
                inversions += 1;
            }
        }
    }
    let mut merged: Vec<usize> = sa.iter().chain(sb.iter()).copied().collect();
    merged.sort_unstable();
    (merged, if inversions % 2 == 0 { 1.0 } else { -1.0 })
}

/// Wedge product under the determinant convention, so no factorial factors:
/// (dx^I) ^ (dx^J) = sign * dx^(I union J) for disjoint increasing I, J.
pub fn wedge(a: &KForm, b: &KForm) -> Result<KForm, GeomError> {
    assert_eq!(a.chart(), b.chart(), "wedge across charts");
    let chart = a.chart();
    let dim = chart.dim();
    let degree = a.degree() + b.degree();
    if degree > dim {
        return Err(GeomError::DegreeOverflow { degree, dim });
    }
    let sets_a = multi_indices(dim, a.degree());
    let sets_b = multi_indices(dim, b.degree());
    let out_sets = multi_indices(dim, degree);
    let mut comps = vec![ScalarField::constant(chart, 0.0); out_sets.len()];
    for (ia, sa) in sets_a.iter().enumerate() {
        if a.comp(ia).is_zero_node() {
            continue;
        }
        for (ib, sb) in sets_b.iter().enumerate() {
            if b.comp(ib).is_zero_node() {
                continue;
            }
            if sa.iter().any(|i| sb.contains(i)) {
                continue;
            }
            let (merged, sign) = merge_sign(sa, sb);
            let rank = multi_index_rank(dim, &merged).expect("merged index in range");
            let term = a.comp(ia).mul(b.comp(ib)).scale(sign);
            comps[rank] = comps[rank].add(&term);
        }
    }
    Ok(KForm::new(chart, degree, comps)?)
}

/// d(sum_I f_I dx^I) = sum_I df_I ^ dx^I, assembled coefficient-wise with
/// exact partials. The derivative of a top-degree form is the empty form one
/// degree up (identically zero).
pub fn exterior_derivative(w: &KForm) -> KForm {
    let chart = w.chart();
    let dim = chart.dim();
    let k = w.degree();
    let out_sets = multi_indices(dim, k + 1);
    let comps: Vec<ScalarField> = out_sets
        .iter()
        .map(|set| {
            let mut acc = ScalarField::constant(chart, 0.0);
            for (pos, &i) in set.iter().enumerate() {
                let mut sub = set.clone();
                sub.remove(pos);
                let coeff = w.coefficient(&sub).expect("subset of an increasing set");
                if coeff.is_zero_node() {
                    continue;
                }
                let term = coeff.partial(i);
                acc = if pos % 2 == 0 {
                    acc.add(&term)
                } else {
                    acc.sub(&term)
                };
            }
            acc
        })
        .collect();
    KForm::new(chart, k + 1, comps).expect("coefficient count matches degree")
}

/// A scalar potential of a closed one-form: checks closedness at the given
/// points first, then returns the line integral from `base` along straight
/// segments (the chart box is convex, so segments stay inside).
pub fn one_form_potential(
    w: &KForm,
    base: &Point,
    precheck: &[Point],
    closed_tol: f64,
) -> Result<ScalarField, GeomError> {
    if w.degree() != 1 {
        return Err(GeomError::WrongDegree {
            expected: "one-form",
            got: w.degree(),
        });
    }
    if base.chart() != w.chart() {
        return Err(GeomError::Field(FieldError::ChartMismatch));
    }
    let dw = exterior_derivative(w);
    let mut worst = 0.0;
    let mut witness = base.coords().to_vec();
    for pt in precheck {
        let r = dw.max_abs_coeff(pt)?;
        if r > worst {
            worst = r;
            witness = pt.coords().to_vec();
        }
    }
    if worst > closed_tol {
        return Err(GeomError::NotClosed {
            residual: worst,
            witness,
        });
    }
    let coeffs: Vec<Arc<Node>> = w.comps().iter().map(|c| c.node().clone()).collect();
    let node = Arc::new(Node::Potential {
        coeffs: coeffs.into(),
        base: base.coords().to_vec().into(),
        tol: POTENTIAL_STEP_TOL,
        max_panels: POTENTIAL_MAX_PANELS,
    });
    Ok(ScalarField::from_node(w.chart().clone(), node))
}

/// Max-abs over points of all coefficients of a form.
pub fn form_max_abs(w: &KForm, pts: &[Point]) -> Result<crate::report::Residual, GeomError> {
    let mut r = crate::report::Residual::new();
    for pt in pts {
        r.observe(w.max_abs_coeff(pt)?, pt);
    }
    Ok(r)
}

/// Max over points and coefficients of |a_I - scale * b_I|. The forms must
/// share chart and degree.
pub fn form_scaled_diff(
    a: &KForm,
    b: &KForm,
    scale: f64,
    pts: &[Point],
) -> Result<crate::report::Residual, GeomError> {
    assert_eq!(a.chart(), b.chart());
    assert_eq!(a.degree(), b.degree(), "comparing forms of different degree");
    let mut r = crate::report::Residual::new();
    for pt in pts {
        let mut worst: f64 = 0.0;
        for (ca, cb) in a.comps().iter().zip(b.comps()) {
            let d = ca.value(pt)? - scale * cb.value(pt)?;
            worst = worst.max(d.abs());
        }
        r.observe(worst, pt);
    }
    Ok(r)
}
