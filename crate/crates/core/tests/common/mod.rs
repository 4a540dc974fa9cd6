//! Shared helpers for the integration suites: a deterministic expression
//! generator and finite-difference oracles that know nothing about the
//! dual-number machinery they cross-check.

// Each suite links its own copy, so not every helper is used everywhere.
#![allow(dead_code)]

use std::collections::HashMap;

use kenwarp::chart::{Chart, Point};
use kenwarp::expr::{self, BinOp, Expr, Func};
use kenwarp::field::ScalarField;

/// SplitMix64, same update as the chart sampler but consumed independently,
/// so the suites stay deterministic without sharing state.
pub struct Gen {
    state: u64,
}

impl Gen {
    pub fn new(seed: u64) -> Gen {
        Gen { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let u = (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        lo + u * (hi - lo)
    }

    pub fn pick(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

fn num(v: f64) -> Expr {
    Expr::Num(v)
}

fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
    Expr::Bin(op, Box::new(a), Box::new(b))
}

fn unary(f: Func, a: Expr) -> Expr {
    Expr::Unary(f, Box::new(a))
}

/// Keeps an argument inside [1.5, 3.5] so that log, sqrt, division, and
/// non-integer powers stay well conditioned wherever the point lands.
fn positive(a: Expr) -> Expr {
    bin(BinOp::Add, num(2.5), unary(Func::Sin, a))
}

/// Random smooth expression over `vars`. The grammar avoids abs (not
/// differentiable) and keeps growth bounded: exp arguments are damped and
/// denominators stay away from zero, so values and derivatives remain
/// comparable against finite differences.
pub fn random_expr(g: &mut Gen, vars: &[&str], depth: usize) -> Expr {
    if depth == 0 {
        return match g.pick(3) {
            0 => num((g.uniform(-2.0, 2.0) * 8.0).round() / 8.0),
            _ => Expr::Var(vars[g.pick(vars.len())].to_string()),
        };
    }
    match g.pick(10) {
        0 | 1 => bin(
            BinOp::Add,
            random_expr(g, vars, depth - 1),
            random_expr(g, vars, depth - 1),
        ),
        2 => bin(
            BinOp::Sub,
            random_expr(g, vars, depth - 1),
            random_expr(g, vars, depth - 1),
        ),
        3 | 4 => bin(
            BinOp::Mul,
            random_expr(g, vars, depth - 1),
            random_expr(g, vars, depth - 1),
        ),
        5 => bin(
            BinOp::Div,
            random_expr(g, vars, depth - 1),
            positive(random_expr(g, vars, depth - 1)),
        ),
        6 => unary(
            Func::Exp,
            bin(BinOp::Mul, num(0.3), random_expr(g, vars, depth - 1)),
        ),
        7 => unary(
            [Func::Sin, Func::Cos, Func::Tanh][g.pick(3)],
            random_expr(g, vars, depth - 1),
        ),
        8 => unary(
            [Func::Log, Func::Sqrt][g.pick(2)],
            positive(random_expr(g, vars, depth - 1)),
        ),
        _ => bin(
            BinOp::Pow,
            positive(random_expr(g, vars, depth - 1)),
            num(g.pick(4) as f64 - 1.0),
        ),
    }
}

pub fn random_point(g: &mut Gen, chart: &Chart) -> Point {
    let coords: Vec<f64> = (0..chart.dim())
        .map(|i| {
            let (lo, hi) = chart.bounds(i);
            let pad = 0.05 * (hi - lo);
            g.uniform(lo + pad, hi - pad)
        })
        .collect();
    chart.point(coords).unwrap()
}

pub fn field_from(chart: &Chart, e: &Expr) -> ScalarField {
    let binds: HashMap<String, usize> = chart
        .names()
        .iter()
        .enumerate()
        .map(|(i, n)| (n.clone(), i))
        .collect();
    ScalarField::from_expr_bound(chart, e, &binds).unwrap()
}

/// Central finite difference of an expression along one variable.
pub fn fd_derivative(e: &Expr, env: &HashMap<String, f64>, var: &str, h: f64) -> f64 {
    let mut plus = env.clone();
    let mut minus = env.clone();
    *plus.get_mut(var).unwrap() += h;
    *minus.get_mut(var).unwrap() -= h;
    (expr::evaluate_real(e, &plus).unwrap() - expr::evaluate_real(e, &minus).unwrap()) / (2.0 * h)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / 1f64.max(a.abs()).max(b.abs())
}
