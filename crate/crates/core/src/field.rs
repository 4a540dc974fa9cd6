//! Fields on a chart: scalars as expression DAGs, plus vectors, endomorphisms,
//! one-forms and k-forms, and metrics assembled from scalar components.
//!
//! A [`ScalarField`] wraps a [`Node`] DAG. Evaluation is generic over the
//! scalar type, so the same tree yields plain values, gradients (dual
//! numbers), or higher derivatives (nested duals). Differentiation is
//! symbolic-free: a [`Node::Partial`] evaluates its child one dual level up
//! and extracts the slot, which keeps derivatives exact even through the
//! line-integral node.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::chart::{Chart, Point};
use crate::dual::{Dual, Scalar};
use crate::expr::{self, Expr, Func};

#[derive(Clone, Debug, thiserror::Error, PartialEq)]
pub enum FieldError {
    #[error("unknown coordinate `{0}` in expression")]
    UnknownCoordinate(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("derivative nesting deeper than supported")]
    DerivativeDepth,
    #[error("line integral did not converge: {panels} panels, last delta {delta:e}")]
    QuadratureDiverged { panels: usize, delta: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("point chart does not match field chart")]
    ChartMismatch,
}

/// How one coordinate of a composed (inner) field is produced from the
/// coordinates of the chart it is evaluated on.
#[derive(Clone, Debug, PartialEq)]
pub enum Binding {
    Coord(usize),
    Const(f64),
}

#[derive(Debug)]
pub enum Node {
    Const(f64),
    Coord(usize),
    Neg(Arc<Node>),
    Add(Arc<Node>, Arc<Node>),
    Sub(Arc<Node>, Arc<Node>),
    Mul(Arc<Node>, Arc<Node>),
    Div(Arc<Node>, Arc<Node>),
    Pow(Arc<Node>, Arc<Node>),
    Func(Func, Arc<Node>),
    /// Exact partial derivative of the child along coordinate `usize`.
    Partial(Arc<Node>, usize),
    /// Child evaluated at rebound coordinates (pullback or restriction).
    Compose { node: Arc<Node>, bind: Arc<[Binding]> },
    /// Line integral of a one-form along the straight segment from `base` to
    /// the evaluation point: composite 4-point Gauss-Legendre, panel count
    /// doubled until the primal estimate moves less than `tol`. The caller
    /// guarantees closedness; the box is convex so the segment stays inside.
    Potential {
        coeffs: Arc<[Arc<Node>]>,
        base: Arc<[f64]>,
        tol: f64,
        max_panels: usize,
    },
}

const GL4_NODES: [f64; 4] = [
    -0.8611363115940526,
    -0.3399810435848563,
    0.3399810435848563,
    0.8611363115940526,
];
const GL4_WEIGHTS: [f64; 4] = [
    0.34785484513745385,
    0.6521451548625461,
    0.6521451548625461,
    0.34785484513745385,
];

pub const POTENTIAL_START_PANELS: usize = 64;
pub const POTENTIAL_MAX_PANELS: usize = 4096;
pub const POTENTIAL_STEP_TOL: f64 = 1e-12;

impl Node {
    pub fn eval<T: Scalar>(&self, coords: &[T]) -> Result<T, FieldError> {
        match self {
            Node::Const(v) => Ok(T::from_f64(*v)),
            Node::Coord(i) => Ok(coords[*i].clone()),
            Node::Neg(a) => Ok(-a.eval(coords)?),
            Node::Add(a, b) => Ok(a.eval(coords)? + b.eval(coords)?),
            Node::Sub(a, b) => Ok(a.eval(coords)? - b.eval(coords)?),
            Node::Mul(a, b) => Ok(a.eval(coords)? * b.eval(coords)?),
            Node::Div(a, b) => {
                let x = a.eval(coords)?;
                let y = b.eval(coords)?;
                if y.primal() == 0.0 {
                    return Err(FieldError::Domain("division by zero".to_string()));
                }
                Ok(x / y)
            }
            Node::Pow(a, b) => {
                let x = a.eval(coords)?;
                let y = b.eval(coords)?;
                expr::scalar_pow(&x, &y).map_err(FieldError::Domain)
            }
            Node::Func(f, a) => {
                let x = a.eval(coords)?;
                expr::apply_func(*f, &x).map_err(FieldError::Domain)
            }
            Node::Partial(a, dir) => {
                if !T::CAN_LIFT {
                    return Err(FieldError::DerivativeDepth);
                }
                let lifted: Vec<T::Up> = coords
                    .iter()
                    .enumerate()
                    .map(|(j, v)| v.lift(if j == *dir { 1.0 } else { 0.0 }))
                    .collect();
                let r = a.eval(&lifted)?;
                Ok(T::unlift(&r))
            }
            Node::Compose { node, bind } => {
                let inner: Vec<T> = bind
                    .iter()
                    .map(|b| match b {
                        Binding::Coord(i) => coords[*i].clone(),
                        Binding::Const(c) => T::from_f64(*c),
                    })
                    .collect();
                node.eval(&inner)
            }
            Node::Potential {
                coeffs,
                base,
                tol,
                max_panels,
            } => eval_potential(coeffs, base, *tol, *max_panels, coords),
        }
    }
}

fn eval_potential<T: Scalar>(
    coeffs: &[Arc<Node>],
    base: &[f64],
    tol: f64,
    max_panels: usize,
    coords: &[T],
) -> Result<T, FieldError> {
    let dim = base.len();
    if coords.len() != dim {
        return Err(FieldError::Dimension(format!(
            "potential over {dim} coordinates evaluated with {}",
            coords.len()
        )));
    }
    let delta: Vec<T> = (0..dim)
        .map(|j| coords[j].clone() - T::from_f64(base[j]))
        .collect();
    let live: Vec<usize> = (0..dim)
        .filter(|&j| !matches!(&*coeffs[j], Node::Const(c) if *c == 0.0))
        .collect();

    let estimate = |panels: usize| -> Result<T, FieldError> {
        let mut acc = T::zero();
        let width = 1.0 / panels as f64;
        for panel in 0..panels {
            let mid = (panel as f64 + 0.5) * width;
            for (gnode, gw) in GL4_NODES.iter().zip(&GL4_WEIGHTS) {
                let s = mid + 0.5 * width * gnode;
                let pt: Vec<T> = (0..dim)
                    .map(|j| T::from_f64(base[j]) + delta[j].clone() * T::from_f64(s))
                    .collect();
                let mut integrand = T::zero();
                for &j in &live {
                    integrand = integrand + coeffs[j].eval(&pt)? * delta[j].clone();
                }
                acc = acc + T::from_f64(gw * 0.5 * width) * integrand;
            }
        }
        Ok(acc)
    };

    let mut panels = POTENTIAL_START_PANELS.min(max_panels);
    let mut prev = estimate(panels)?;
    while panels < max_panels {
        panels *= 2;
        let next = estimate(panels)?;
        let delta_est = (next.primal() - prev.primal()).abs();
        if delta_est < tol {
            return Ok(next);
        }
        prev = next;
    }
    Err(FieldError::QuadratureDiverged {
        panels,
        delta: f64::NAN,
    })
}

// Smart constructors: fold constants and prune zero/unit factors so that
// assembled tensors do not drag dead branches through every evaluation.

fn n_const(v: f64) -> Arc<Node> {
    Arc::new(Node::Const(v))
}

fn as_const(n: &Node) -> Option<f64> {
    match n {
        Node::Const(v) => Some(*v),
        _ => None,
    }
}

fn n_neg(a: Arc<Node>) -> Arc<Node> {
    match &*a {
        Node::Const(v) => n_const(-v),
        Node::Neg(inner) => inner.clone(),
        _ => Arc::new(Node::Neg(a)),
    }
}

fn n_add(a: Arc<Node>, b: Arc<Node>) -> Arc<Node> {
    match (as_const(&a), as_const(&b)) {
        (Some(x), Some(y)) => n_const(x + y),
        (Some(0.0), _) => b,
        (_, Some(0.0)) => a,
        _ => Arc::new(Node::Add(a, b)),
    }
}

fn n_sub(a: Arc<Node>, b: Arc<Node>) -> Arc<Node> {
    match (as_const(&a), as_const(&b)) {
        (Some(x), Some(y)) => n_const(x - y),
        (_, Some(0.0)) => a,
        (Some(0.0), _) => n_neg(b),
        _ => Arc::new(Node::Sub(a, b)),
    }
}

fn n_mul(a: Arc<Node>, b: Arc<Node>) -> Arc<Node> {
    match (as_const(&a), as_const(&b)) {
        (Some(x), Some(y)) => n_const(x * y),
        (Some(0.0), _) | (_, Some(0.0)) => n_const(0.0),
        (Some(1.0), _) => b,
        (_, Some(1.0)) => a,
        _ => Arc::new(Node::Mul(a, b)),
    }
}

fn n_div(a: Arc<Node>, b: Arc<Node>) -> Arc<Node> {
    match (as_const(&a), as_const(&b)) {
        (Some(x), Some(y)) if y != 0.0 => n_const(x / y),
        (Some(0.0), _) => n_const(0.0),
        (_, Some(1.0)) => a,
        _ => Arc::new(Node::Div(a, b)),
    }
}

fn n_partial(a: Arc<Node>, dir: usize) -> Arc<Node> {
    match &*a {
        Node::Const(_) => n_const(0.0),
        Node::Coord(j) => n_const(if *j == dir { 1.0 } else { 0.0 }),
        _ => Arc::new(Node::Partial(a, dir)),
    }
}

fn n_compose(node: Arc<Node>, bind: Vec<Binding>) -> Arc<Node> {
    match &*node {
        Node::Const(v) => n_const(*v),
        Node::Coord(j) => match &bind[*j] {
            Binding::Coord(i) => Arc::new(Node::Coord(*i)),
            Binding::Const(c) => n_const(*c),
        },
        _ => Arc::new(Node::Compose {
            node,
            bind: bind.into(),
        }),
    }
}

/// A scalar function of the chart coordinates.
#[derive(Clone, Debug)]
pub struct ScalarField {
    chart: Chart,
    node: Arc<Node>,
}

impl ScalarField {
    pub fn from_node(chart: Chart, node: Arc<Node>) -> ScalarField {
        ScalarField { chart, node }
    }

    pub fn constant(chart: &Chart, v: f64) -> ScalarField {
        ScalarField {
            chart: chart.clone(),
            node: n_const(v),
        }
    }

    pub fn coordinate(chart: &Chart, i: usize) -> ScalarField {
        assert!(i < chart.dim(), "coordinate index out of range");
        ScalarField {
            chart: chart.clone(),
            node: Arc::new(Node::Coord(i)),
        }
    }

    /// Lowers a parsed expression; variables resolve to chart names.
    pub fn from_expr(chart: &Chart, e: &Expr) -> Result<ScalarField, FieldError> {
        let mut map = HashMap::new();
        for (i, n) in chart.names().iter().enumerate() {
            map.insert(n.clone(), i);
        }
        Self::from_expr_bound(chart, e, &map)
    }

    /// Lowers with an explicit variable-to-index map, so an expression
    /// written in terms of `t` can bind to a coordinate displayed under
    /// another name.
    pub fn from_expr_bound(
        chart: &Chart,
        e: &Expr,
        vars: &HashMap<String, usize>,
    ) -> Result<ScalarField, FieldError> {
        fn lower(e: &Expr, vars: &HashMap<String, usize>) -> Result<Arc<Node>, FieldError> {
            Ok(match e {
                Expr::Num(v) => n_const(*v),
                Expr::Var(n) => {
                    let i = vars
                        .get(n)
                        .ok_or_else(|| FieldError::UnknownCoordinate(n.clone()))?;
                    Arc::new(Node::Coord(*i))
                }
                Expr::Neg(a) => n_neg(lower(a, vars)?),
                Expr::Unary(f, a) => Arc::new(Node::Func(*f, lower(a, vars)?)),
                Expr::Bin(op, l, r) => {
                    let a = lower(l, vars)?;
                    let b = lower(r, vars)?;
                    match op {
                        expr::BinOp::Add => n_add(a, b),
                        expr::BinOp::Sub => n_sub(a, b),
                        expr::BinOp::Mul => n_mul(a, b),
                        expr::BinOp::Div => n_div(a, b),
                        expr::BinOp::Pow => Arc::new(Node::Pow(a, b)),
                    }
                }
            })
        }
        let node = lower(e, vars)?;
        for (name, &i) in vars {
            if i >= chart.dim() {
                return Err(FieldError::Dimension(format!(
                    "variable `{name}` bound to coordinate {i} on a {}-dim chart",
                    chart.dim()
                )));
            }
        }
        Ok(ScalarField {
            chart: chart.clone(),
            node,
        })
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn node(&self) -> &Arc<Node> {
        &self.node
    }

    pub fn is_zero_node(&self) -> bool {
        matches!(&*self.node, Node::Const(c) if *c == 0.0)
    }

    fn check(&self, other: &ScalarField) {
        assert_eq!(
            self.chart, other.chart,
            "combining fields from different charts"
        );
    }

    pub fn add(&self, other: &ScalarField) -> ScalarField {
        self.check(other);
        ScalarField {
            chart: self.chart.clone(),
            node: n_add(self.node.clone(), other.node.clone()),
        }
    }

    pub fn sub(&self, other: &ScalarField) -> ScalarField {
        self.check(other);
        ScalarField {
            chart: self.chart.clone(),
            node: n_sub(self.node.clone(), other.node.clone()),
        }
    }

    pub fn mul(&self, other: &ScalarField) -> ScalarField {
        self.check(other);
        ScalarField {
            chart: self.chart.clone(),
            node: n_mul(self.node.clone(), other.node.clone()),
        }
    }

    pub fn div(&self, other: &ScalarField) -> ScalarField {
        self.check(other);
        ScalarField {
            chart: self.chart.clone(),
            node: n_div(self.node.clone(), other.node.clone()),
        }
    }

    pub fn neg(&self) -> ScalarField {
        ScalarField {
            chart: self.chart.clone(),
            node: n_neg(self.node.clone()),
        }
    }

    pub fn scale(&self, c: f64) -> ScalarField {
        ScalarField {
            chart: self.chart.clone(),
            node: n_mul(n_const(c), self.node.clone()),
        }
    }

    pub fn func(&self, f: Func) -> ScalarField {
        ScalarField {
            chart: self.chart.clone(),
            node: Arc::new(Node::Func(f, self.node.clone())),
        }
    }

    pub fn exp(&self) -> ScalarField {
        self.func(Func::Exp)
    }

    pub fn ln(&self) -> ScalarField {
        self.func(Func::Log)
    }

    pub fn powi(&self, n: i64) -> ScalarField {
        ScalarField {
            chart: self.chart.clone(),
            node: Arc::new(Node::Pow(self.node.clone(), n_const(n as f64))),
        }
    }

    /// Exact partial derivative along coordinate `dir`.
    pub fn partial(&self, dir: usize) -> ScalarField {
        assert!(dir < self.chart.dim(), "partial direction out of range");
        ScalarField {
            chart: self.chart.clone(),
            node: n_partial(self.node.clone(), dir),
        }
    }

    /// This field evaluated at rebound coordinates: entry `j` of `bind` says
    /// how the j-th coordinate of `self.chart` is produced from `chart`.
    pub fn composed(&self, chart: &Chart, bind: Vec<Binding>) -> Result<ScalarField, FieldError> {
        if bind.len() != self.chart.dim() {
            return Err(FieldError::Dimension(format!(
                "{} bindings for a {}-dim chart",
                bind.len(),
                self.chart.dim()
            )));
        }
        for b in &bind {
            if let Binding::Coord(i) = b {
                if *i >= chart.dim() {
                    return Err(FieldError::Dimension(format!(
                        "binding to coordinate {i} on a {}-dim chart",
                        chart.dim()
                    )));
                }
            }
        }
        Ok(ScalarField {
            chart: chart.clone(),
            node: n_compose(self.node.clone(), bind),
        })
    }

    /// Full-width dual evaluation: value plus one slot per coordinate.
    pub fn eval(&self, pt: &Point) -> Result<Dual<f64>, FieldError> {
        if pt.chart() != &self.chart {
            return Err(FieldError::ChartMismatch);
        }
        let dim = self.chart.dim();
        let coords: Vec<Dual<f64>> = pt
            .coords()
            .iter()
            .enumerate()
            .map(|(i, &v)| Dual::var(v, dim, i))
            .collect();
        self.node.eval(&coords)
    }

    /// Plain value, no derivative slots.
    pub fn value(&self, pt: &Point) -> Result<f64, FieldError> {
        if pt.chart() != &self.chart {
            return Err(FieldError::ChartMismatch);
        }
        self.node.eval::<f64>(pt.coords())
    }

    pub fn value_and_grad(&self, pt: &Point) -> Result<(f64, Vec<f64>), FieldError> {
        let d = self.eval(pt)?;
        let mut g = d.der;
        g.resize(self.chart.dim(), 0.0);
        Ok((d.val, g))
    }
}

/// A vector field by components against the coordinate basis.
#[derive(Clone, Debug)]
pub struct VectorField {
    chart: Chart,
    comps: Vec<ScalarField>,
}

impl VectorField {
    pub fn new(chart: &Chart, comps: Vec<ScalarField>) -> Result<VectorField, FieldError> {
        if comps.len() != chart.dim() {
            return Err(FieldError::Dimension(format!(
                "{} components on a {}-dim chart",
                comps.len(),
                chart.dim()
            )));
        }
        for c in &comps {
            if c.chart() != chart {
                return Err(FieldError::ChartMismatch);
            }
        }
        Ok(VectorField {
            chart: chart.clone(),
            comps,
        })
    }

    /// The coordinate basis vector along direction `i`.
    pub fn basis(chart: &Chart, i: usize) -> VectorField {
        let comps = (0..chart.dim())
            .map(|j| ScalarField::constant(chart, if j == i { 1.0 } else { 0.0 }))
            .collect();
        VectorField {
            chart: chart.clone(),
            comps,
        }
    }

    pub fn zero(chart: &Chart) -> VectorField {
        VectorField {
            chart: chart.clone(),
            comps: vec![ScalarField::constant(chart, 0.0); chart.dim()],
        }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn comps(&self) -> &[ScalarField] {
        &self.comps
    }

    pub fn comp(&self, i: usize) -> &ScalarField {
        &self.comps[i]
    }

    pub fn value(&self, pt: &Point) -> Result<Vec<f64>, FieldError> {
        self.comps.iter().map(|c| c.value(pt)).collect()
    }

    /// Component values and jacobian `jac[k][i] = d_i X^k`.
    pub fn value_and_jac(&self, pt: &Point) -> Result<(Vec<f64>, Vec<Vec<f64>>), FieldError> {
        let mut vals = Vec::with_capacity(self.comps.len());
        let mut jac = Vec::with_capacity(self.comps.len());
        for c in &self.comps {
            let (v, g) = c.value_and_grad(pt)?;
            vals.push(v);
            jac.push(g);
        }
        Ok((vals, jac))
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        assert_eq!(self.chart, other.chart);
        VectorField {
            chart: self.chart.clone(),
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn scale_field(&self, f: &ScalarField) -> VectorField {
        VectorField {
            chart: self.chart.clone(),
            comps: self.comps.iter().map(|c| c.mul(f)).collect(),
        }
    }
}

/// A (1,1)-tensor field: `comp[k][j]` maps input direction `j` to output
/// component `k`, matching matrix-times-column-vector convention.
#[derive(Clone, Debug)]
pub struct EndomorphismField {
    chart: Chart,
    comp: Vec<Vec<ScalarField>>,
}

impl EndomorphismField {
    pub fn new(chart: &Chart, comp: Vec<Vec<ScalarField>>) -> Result<EndomorphismField, FieldError> {
        let n = chart.dim();
        if comp.len() != n || comp.iter().any(|row| row.len() != n) {
            return Err(FieldError::Dimension(format!(
                "endomorphism must be {n}x{n}"
            )));
        }
        for row in &comp {
            for c in row {
                if c.chart() != chart {
                    return Err(FieldError::ChartMismatch);
                }
            }
        }
        Ok(EndomorphismField {
            chart: chart.clone(),
            comp,
        })
    }

    pub fn from_fn(
        chart: &Chart,
        f: impl Fn(usize, usize) -> ScalarField,
    ) -> EndomorphismField {
        let n = chart.dim();
        let comp = (0..n)
            .map(|k| (0..n).map(|j| f(k, j)).collect())
            .collect();
        EndomorphismField {
            chart: chart.clone(),
            comp,
        }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn comp(&self, k: usize, j: usize) -> &ScalarField {
        &self.comp[k][j]
    }

    pub fn value(&self, pt: &Point) -> Result<DMatrix<f64>, FieldError> {
        let n = self.chart.dim();
        let mut m = DMatrix::zeros(n, n);
        for k in 0..n {
            for j in 0..n {
                m[(k, j)] = self.comp[k][j].value(pt)?;
            }
        }
        Ok(m)
    }

    /// Values and coordinate partials: `partials[i][(k, j)] = d_i T^k_j`.
    pub fn value_and_partials(
        &self,
        pt: &Point,
    ) -> Result<(DMatrix<f64>, Vec<DMatrix<f64>>), FieldError> {
        let n = self.chart.dim();
        let mut m = DMatrix::zeros(n, n);
        let mut parts = vec![DMatrix::zeros(n, n); n];
        for k in 0..n {
            for j in 0..n {
                let (v, g) = self.comp[k][j].value_and_grad(pt)?;
                m[(k, j)] = v;
                for (i, gi) in g.iter().enumerate() {
                    parts[i][(k, j)] = *gi;
                }
            }
        }
        Ok((m, parts))
    }

    /// Column `j` as a vector field (the image of the j-th basis vector).
    pub fn column(&self, j: usize) -> VectorField {
        VectorField {
            chart: self.chart.clone(),
            comps: (0..self.chart.dim())
                .map(|k| self.comp[k][j].clone())
                .collect(),
        }
    }
}

/// Lexicographically ordered strictly increasing multi-indices of length `k`
/// from `{0, .., dim-1}`. Degree 0 has the single empty index.
pub fn multi_indices(dim: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(dim: usize, k: usize, start: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == k {
            out.push(prefix.clone());
            return;
        }
        let needed = k - prefix.len();
        for i in start..=dim.saturating_sub(needed) {
            prefix.push(i);
            rec(dim, k, i + 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if k <= dim {
        rec(dim, k, 0, &mut Vec::new(), &mut out);
    }
    out
}

/// Position of an increasing multi-index in [`multi_indices`] order.
pub fn multi_index_rank(dim: usize, set: &[usize]) -> Option<usize> {
    multi_indices(dim, set.len()).iter().position(|s| s == set)
}

/// A differential k-form under the determinant convention:
/// `(dx^I)(e_{I_1}, .., e_{I_k}) = 1` for increasing `I`, so coefficients are
/// exactly the values on increasing basis tuples with no factorial weights.
#[derive(Clone, Debug)]
pub struct KForm {
    chart: Chart,
    degree: usize,
    comps: Vec<ScalarField>,
}

impl KForm {
    pub fn new(chart: &Chart, degree: usize, comps: Vec<ScalarField>) -> Result<KForm, FieldError> {
        let want = multi_indices(chart.dim(), degree).len();
        if comps.len() != want {
            return Err(FieldError::Dimension(format!(
                "degree-{degree} form on dim {} needs {want} coefficients, got {}",
                chart.dim(),
                comps.len()
            )));
        }
        for c in &comps {
            if c.chart() != chart {
                return Err(FieldError::ChartMismatch);
            }
        }
        Ok(KForm {
            chart: chart.clone(),
            degree,
            comps,
        })
    }

    pub fn zero(chart: &Chart, degree: usize) -> KForm {
        let n = multi_indices(chart.dim(), degree).len();
        KForm {
            chart: chart.clone(),
            degree,
            comps: vec![ScalarField::constant(chart, 0.0); n],
        }
    }

    /// Degree-0 wrapper around a scalar field.
    pub fn scalar(f: ScalarField) -> KForm {
        KForm {
            chart: f.chart().clone(),
            degree: 0,
            comps: vec![f],
        }
    }

    pub fn one_form(chart: &Chart, comps: Vec<ScalarField>) -> Result<KForm, FieldError> {
        KForm::new(chart, 1, comps)
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn comps(&self) -> &[ScalarField] {
        &self.comps
    }

    pub fn comp(&self, i: usize) -> &ScalarField {
        &self.comps[i]
    }

    pub fn coefficient(&self, set: &[usize]) -> Option<&ScalarField> {
        multi_index_rank(self.chart.dim(), set).map(|r| &self.comps[r])
    }

    /// Value on `degree` many vectors given by their components.
    pub fn value_on(&self, pt: &Point, vectors: &[&[f64]]) -> Result<f64, FieldError> {
        if vectors.len() != self.degree {
            return Err(FieldError::Dimension(format!(
                "degree-{} form applied to {} vectors",
                self.degree,
                vectors.len()
            )));
        }
        let k = self.degree;
        if k == 0 {
            return self.comps[0].value(pt);
        }
        let sets = multi_indices(self.chart.dim(), k);
        let mut total = 0.0;
        for (set, coeff) in sets.iter().zip(&self.comps) {
            if coeff.is_zero_node() {
                continue;
            }
            let minor = DMatrix::from_fn(k, k, |r, c| vectors[c][set[r]]);
            let det = minor.determinant();
            if det != 0.0 {
                total += coeff.value(pt)? * det;
            }
        }
        Ok(total)
    }

    pub fn add(&self, other: &KForm) -> KForm {
        assert_eq!(self.chart, other.chart);
        assert_eq!(self.degree, other.degree, "adding forms of different degree");
        KForm {
            chart: self.chart.clone(),
            degree: self.degree,
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn sub(&self, other: &KForm) -> KForm {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> KForm {
        KForm {
            chart: self.chart.clone(),
            degree: self.degree,
            comps: self.comps.iter().map(|c| c.neg()).collect(),
        }
    }

    pub fn scale(&self, c: f64) -> KForm {
        KForm {
            chart: self.chart.clone(),
            degree: self.degree,
            comps: self.comps.iter().map(|f| f.scale(c)).collect(),
        }
    }

    pub fn scale_field(&self, f: &ScalarField) -> KForm {
        KForm {
            chart: self.chart.clone(),
            degree: self.degree,
            comps: self.comps.iter().map(|c| c.mul(f)).collect(),
        }
    }

    /// Max absolute coefficient value at `pt`.
    pub fn max_abs_coeff(&self, pt: &Point) -> Result<f64, FieldError> {
        let mut m: f64 = 0.0;
        for c in &self.comps {
            m = m.max(c.value(pt)?.abs());
        }
        Ok(m)
    }
}

/// A symmetric (0,2)-tensor field; `comp[i][j]` shares nodes across the
/// diagonal.
#[derive(Clone, Debug)]
pub struct MetricField {
    chart: Chart,
    comp: Vec<Vec<ScalarField>>,
}

impl MetricField {
    /// Builds from the upper triangle: `f(i, j)` is called once per `i <= j`
    /// and mirrored.
    pub fn from_fn(chart: &Chart, f: impl Fn(usize, usize) -> ScalarField) -> MetricField {
        let n = chart.dim();
        let mut comp: Vec<Vec<Option<ScalarField>>> = vec![vec![None; n]; n];
        for i in 0..n {
            for j in i..n {
                let entry = f(i, j);
                comp[j][i] = Some(entry.clone());
                comp[i][j] = Some(entry);
            }
        }
        MetricField {
            chart: chart.clone(),
            comp: comp
                .into_iter()
                .map(|row| row.into_iter().map(Option::unwrap).collect())
                .collect(),
        }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn comp(&self, i: usize, j: usize) -> &ScalarField {
        &self.comp[i][j]
    }

    pub fn value(&self, pt: &Point) -> Result<DMatrix<f64>, FieldError> {
        let n = self.chart.dim();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = self.comp[i][j].value(pt)?;
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Ok(m)
    }

    /// Values and coordinate partials `parts[l][(i, j)] = d_l g_ij`.
    pub fn value_and_partials(
        &self,
        pt: &Point,
    ) -> Result<(DMatrix<f64>, Vec<DMatrix<f64>>), FieldError> {
        let n = self.chart.dim();
        let mut m = DMatrix::zeros(n, n);
        let mut parts = vec![DMatrix::zeros(n, n); n];
        for i in 0..n {
            for j in i..n {
                let (v, g) = self.comp[i][j].value_and_grad(pt)?;
                m[(i, j)] = v;
                m[(j, i)] = v;
                for (l, gl) in g.iter().enumerate() {
                    parts[l][(i, j)] = *gl;
                    parts[l][(j, i)] = *gl;
                }
            }
        }
        Ok((m, parts))
    }

    /// Smallest leading principal minor; positive for an SPD matrix.
    pub fn min_leading_minor(&self, pt: &Point) -> Result<f64, FieldError> {
        let m = self.value(pt)?;
        let n = self.chart.dim();
        let mut min = f64::INFINITY;
        for k in 1..=n {
            let det = m.view((0, 0), (k, k)).clone_owned().determinant();
            min = min.min(det);
        }
        Ok(min)
    }
}
