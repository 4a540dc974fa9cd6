//! Forward-mode automatic differentiation on multi-slot dual scalars.
//!
//! A [`Dual<T>`] carries a primal value together with one derivative slot per
//! seeded direction. Arithmetic propagates the slots by the chain rule, so
//! first derivatives are exact up to floating-point rounding, with no
//! truncation error. Nesting duals (`Dual<Dual<f64>>`) gives exact second
//! derivatives and so on.
//!
//! Nesting is capped at three levels. The deepest level maps [`Scalar::Up`]
//! to itself with `CAN_LIFT == false`, which keeps monomorphization finite;
//! callers that need another level must check `CAN_LIFT` and report an error
//! rather than recurse.
//!
//! Primal lanes always use the native `f64` operation, so evaluating with all
//! slots zero-seeded produces bitwise the same value as a plain `f64`
//! evaluation.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Scalar arithmetic shared by `f64` and nested [`Dual`] levels.
pub trait Scalar:
    Clone
    + std::fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Next nesting level, used when differentiating an already dual-valued
    /// computation.
    type Up: Scalar;
    /// False on the deepest supported level.
    const CAN_LIFT: bool;

    fn from_f64(v: f64) -> Self;
    /// Innermost primal value, all derivative structure stripped.
    fn primal(&self) -> f64;
    /// True when no derivative slot at any level is nonzero.
    fn is_constant(&self) -> bool;
    /// Wraps into the next level with a single slot seeded `seed`.
    fn lift(&self, seed: f64) -> Self::Up;
    /// Extracts slot 0 of a lifted result (zero when the result is constant).
    fn unlift(up: &Self::Up) -> Self;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }
    fn one() -> Self {
        Self::from_f64(1.0)
    }
    /// Identically zero, including every derivative slot.
    fn is_zero(&self) -> bool {
        self.primal() == 0.0 && self.is_constant()
    }

    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn tan(&self) -> Self;
    fn sinh(&self) -> Self;
    fn cosh(&self) -> Self;
    fn tanh(&self) -> Self;
    fn sqrt(&self) -> Self;
    /// Derivative slope is sign(primal), taken as 0 at the kink.
    fn abs(&self) -> Self;
    fn powi(&self, n: i64) -> Self;
    /// Requires a positive primal base; callers enforce the domain.
    fn powf(&self, exp: &Self) -> Self;
}

/// Value plus derivative slots. An empty slot vector means "constant": it
/// broadcasts as zeros against any width, so constants need no width at all.
#[derive(Clone, Debug, PartialEq)]
pub struct Dual<T> {
    pub val: T,
    pub der: Vec<T>,
}

impl<T: Scalar> Dual<T> {
    pub fn constant(v: f64) -> Self {
        Dual {
            val: T::from_f64(v),
            der: Vec::new(),
        }
    }

    /// Variable seeded one-hot in `slot` out of `width` directions.
    pub fn var(val: T, width: usize, slot: usize) -> Self {
        assert!(slot < width, "seed slot out of range");
        let mut der = vec![T::zero(); width];
        der[slot] = T::one();
        Dual { val, der }
    }

    /// Slot `i` as a value, treating missing slots as zero.
    pub fn slot(&self, i: usize) -> T {
        self.der.get(i).cloned().unwrap_or_else(T::zero)
    }

    /// Applies `val -> (f(val), f'(val))` through the chain rule.
    fn chain(&self, val: T, slope: T) -> Self {
        Dual {
            val,
            der: self
                .der
                .iter()
                .map(|d| slope.clone() * d.clone())
                .collect(),
        }
    }

    fn exp_d(&self) -> Self {
        let v = self.val.exp();
        self.chain(v.clone(), v)
    }

    fn ln_d(&self) -> Self {
        self.chain(self.val.ln(), T::one() / self.val.clone())
    }

    fn sin_d(&self) -> Self {
        self.chain(self.val.sin(), self.val.cos())
    }

    fn cos_d(&self) -> Self {
        self.chain(self.val.cos(), -self.val.sin())
    }

    fn tan_d(&self) -> Self {
        let c = self.val.cos();
        self.chain(self.val.tan(), T::one() / (c.clone() * c))
    }

    fn sinh_d(&self) -> Self {
        self.chain(self.val.sinh(), self.val.cosh())
    }

    fn cosh_d(&self) -> Self {
        self.chain(self.val.cosh(), self.val.sinh())
    }

    fn tanh_d(&self) -> Self {
        let t = self.val.tanh();
        self.chain(t.clone(), T::one() - t.clone() * t)
    }

    fn sqrt_d(&self) -> Self {
        let r = self.val.sqrt();
        self.chain(r.clone(), T::one() / (T::from_f64(2.0) * r))
    }

    fn abs_d(&self) -> Self {
        let p = self.val.primal();
        let slope = if p > 0.0 {
            1.0
        } else if p < 0.0 {
            -1.0
        } else {
            0.0
        };
        self.chain(self.val.abs(), T::from_f64(slope))
    }

    fn powi_d(&self, n: i64) -> Self {
        if n == 0 {
            return Dual::constant(1.0);
        }
        let val = self.val.powi(n);
        let slope = T::from_f64(n as f64) * self.val.powi(n - 1);
        self.chain(val, slope)
    }

    fn powf_d(&self, e: &Self) -> Self {
        let val = self.val.powf(&e.val);
        let lnb = self.val.ln();
        let e_over_b = e.val.clone() / self.val.clone();
        let der = zip_der(&self.der, &e.der, |db, de| {
            val.clone() * (lnb.clone() * de.clone() + e_over_b.clone() * db.clone())
        });
        Dual { val, der }
    }
}

/// Combines two slot vectors under the empty-means-constant convention.
fn zip_der<T: Scalar>(a: &[T], b: &[T], f: impl Fn(&T, &T) -> T) -> Vec<T> {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => Vec::new(),
        (false, true) => {
            let z = T::zero();
            a.iter().map(|x| f(x, &z)).collect()
        }
        (true, false) => {
            let z = T::zero();
            b.iter().map(|y| f(&z, y)).collect()
        }
        (false, false) => {
            assert_eq!(
                a.len(),
                b.len(),
                "derivative width mismatch: {} vs {}",
                a.len(),
                b.len()
            );
            a.iter().zip(b).map(|(x, y)| f(x, y)).collect()
        }
    }
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Dual {
            val: self.val.clone() + rhs.val.clone(),
            der: zip_der(&self.der, &rhs.der, |x, y| x.clone() + y.clone()),
        }
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Dual {
            val: self.val.clone() - rhs.val.clone(),
            der: zip_der(&self.der, &rhs.der, |x, y| x.clone() - y.clone()),
        }
    }
}

impl<T: Scalar> Mul for Dual<T> {
    type Output = Self;
    // product rule mixes operators by nature
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: Self) -> Self {
        let der = zip_der(&self.der, &rhs.der, |x, y| {
            x.clone() * rhs.val.clone() + self.val.clone() * y.clone()
        });
        Dual {
            val: self.val * rhs.val,
            der,
        }
    }
}

impl<T: Scalar> Div for Dual<T> {
    type Output = Self;
    // quotient rule mixes operators by nature
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Self) -> Self {
        let val = self.val.clone() / rhs.val.clone();
        let der = zip_der(&self.der, &rhs.der, |x, y| {
            (x.clone() - val.clone() * y.clone()) / rhs.val.clone()
        });
        Dual { val, der }
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual {
            val: -self.val,
            der: self.der.into_iter().map(|d| -d).collect(),
        }
    }
}

impl Scalar for f64 {
    type Up = Dual<f64>;
    const CAN_LIFT: bool = true;

    fn from_f64(v: f64) -> f64 {
        v
    }
    fn primal(&self) -> f64 {
        *self
    }
    fn is_constant(&self) -> bool {
        true
    }
    fn lift(&self, seed: f64) -> Dual<f64> {
        Dual {
            val: *self,
            der: vec![seed],
        }
    }
    fn unlift(up: &Dual<f64>) -> f64 {
        up.der.first().copied().unwrap_or(0.0)
    }

    fn exp(&self) -> f64 {
        f64::exp(*self)
    }
    fn ln(&self) -> f64 {
        f64::ln(*self)
    }
    fn sin(&self) -> f64 {
        f64::sin(*self)
    }
    fn cos(&self) -> f64 {
        f64::cos(*self)
    }
    fn tan(&self) -> f64 {
        f64::tan(*self)
    }
    fn sinh(&self) -> f64 {
        f64::sinh(*self)
    }
    fn cosh(&self) -> f64 {
        f64::cosh(*self)
    }
    fn tanh(&self) -> f64 {
        f64::tanh(*self)
    }
    fn sqrt(&self) -> f64 {
        f64::sqrt(*self)
    }
    fn abs(&self) -> f64 {
        f64::abs(*self)
    }
    fn powi(&self, n: i64) -> f64 {
        f64::powi(*self, n.clamp(i32::MIN as i64, i32::MAX as i64) as i32)
    }
    fn powf(&self, exp: &f64) -> f64 {
        f64::powf(*self, *exp)
    }
}

macro_rules! scalar_common {
    () => {
        fn from_f64(v: f64) -> Self {
            Dual::constant(v)
        }
        fn primal(&self) -> f64 {
            self.val.primal()
        }
        fn is_constant(&self) -> bool {
            self.der.iter().all(|d| d.is_zero())
        }
        fn exp(&self) -> Self {
            self.exp_d()
        }
        fn ln(&self) -> Self {
            self.ln_d()
        }
        fn sin(&self) -> Self {
            self.sin_d()
        }
        fn cos(&self) -> Self {
            self.cos_d()
        }
        fn tan(&self) -> Self {
            self.tan_d()
        }
        fn sinh(&self) -> Self {
            self.sinh_d()
        }
        fn cosh(&self) -> Self {
            self.cosh_d()
        }
        fn tanh(&self) -> Self {
            self.tanh_d()
        }
        fn sqrt(&self) -> Self {
            self.sqrt_d()
        }
        fn abs(&self) -> Self {
            self.abs_d()
        }
        fn powi(&self, n: i64) -> Self {
            self.powi_d(n)
        }
        fn powf(&self, exp: &Self) -> Self {
            self.powf_d(exp)
        }
    };
}

macro_rules! scalar_via_dual {
    ($inner:ty => saturated) => {
        impl Scalar for Dual<$inner> {
            type Up = Self;
            const CAN_LIFT: bool = false;
            // Unreachable in practice: callers check CAN_LIFT first.
            fn lift(&self, _seed: f64) -> Self {
                self.clone()
            }
            fn unlift(_up: &Self) -> Self {
                <Self as Scalar>::zero()
            }
            scalar_common!();
        }
    };
    ($inner:ty => $up:ty) => {
        impl Scalar for Dual<$inner> {
            type Up = $up;
            const CAN_LIFT: bool = true;
            fn lift(&self, seed: f64) -> Self::Up {
                Dual {
                    val: self.clone(),
                    der: vec![<Self as Scalar>::from_f64(seed)],
                }
            }
            fn unlift(up: &Self::Up) -> Self {
                up.der.first().cloned().unwrap_or_else(<Self as Scalar>::zero)
            }
            scalar_common!();
        }
    };
}

scalar_via_dual!(f64 => Dual<Dual<f64>>);
scalar_via_dual!(Dual<f64> => Dual<Dual<Dual<f64>>>);
scalar_via_dual!(Dual<Dual<f64>> => saturated);

#[cfg(test)]
mod tests {
    use super::*;

    fn d(val: f64, der: &[f64]) -> Dual<f64> {
        Dual {
            val,
            der: der.to_vec(),
        }
    }

    #[test]
    fn product_rule() {
        let x = d(3.0, &[1.0, 0.0]);
        let y = d(5.0, &[0.0, 1.0]);
        let p = x * y;
        assert_eq!(p.val, 15.0);
        assert_eq!(p.der, vec![5.0, 3.0]);
    }

    #[test]
    fn quotient_rule() {
        let x = d(1.0, &[1.0]);
        let y = d(4.0, &[2.0]);
        let q = x / y;
        assert_eq!(q.val, 0.25);
        // (x/y)' = (x' y - x y') / y^2 = (4 - 2) / 16
        assert_eq!(q.der, vec![0.125]);
    }

    #[test]
    fn chain_rule_exp() {
        let t = d(0.0, &[1.0]);
        let two = Dual::constant(2.0);
        let r = (two * t).exp_d();
        assert_eq!(r.val, 1.0);
        assert_eq!(r.der, vec![2.0]);
    }

    #[test]
    fn constant_broadcasts_against_any_width() {
        let c = Dual::<f64>::constant(1.5);
        assert!(c.der.is_empty());
        let x = d(2.0, &[1.0, 0.0, 0.0]);
        let s = c.clone() + x.clone();
        assert_eq!(s.der, vec![1.0, 0.0, 0.0]);
        let p = c * x;
        assert_eq!(p.val, 3.0);
        assert_eq!(p.der, vec![1.5, 0.0, 0.0]);
    }

    #[test]
    fn zero_seed_matches_plain_eval_bitwise() {
        let x = d(0.7, &[0.0]);
        let r = x.clone().tan_d().exp_d() * x.sqrt_d();
        let plain = 0.7f64.tan().exp() * 0.7f64.sqrt();
        assert_eq!(r.val.to_bits(), plain.to_bits());
        assert_eq!(r.der, vec![0.0]);
    }

    #[test]
    fn nested_dual_second_derivative_of_cube() {
        // x^3 at x = 2: value 8, first derivative 12, second derivative 12.
        let x: Dual<Dual<f64>> = Dual {
            val: d(2.0, &[1.0]),
            der: vec![d(1.0, &[0.0])],
        };
        let c = x.clone() * x.clone() * x;
        assert_eq!(c.val.val, 8.0);
        assert_eq!(c.val.der, vec![12.0]);
        assert_eq!(c.der[0].val, 12.0);
        assert_eq!(c.der[0].der, vec![12.0]);
    }

    #[test]
    fn lift_and_unlift_round_trip() {
        let x = 2.0f64.lift(1.0);
        let sq = x.clone() * x;
        assert_eq!(f64::unlift(&sq), 4.0);
        assert!(<Dual<Dual<f64>> as Scalar>::CAN_LIFT);
        assert!(!<Dual<Dual<Dual<f64>>> as Scalar>::CAN_LIFT);
    }

    #[test]
    fn powi_matches_closed_form() {
        let x = d(2.0, &[1.0]);
        let p = x.powi_d(5);
        assert_eq!(p.val, 32.0);
        assert_eq!(p.der, vec![80.0]);
        let n = x.powi_d(-2);
        assert_eq!(n.val, 0.25);
        assert_eq!(n.der, vec![-0.25]);
        let z = x.powi_d(0);
        assert_eq!(z.val, 1.0);
        assert!(z.der.is_empty());
    }

    #[test]
    fn powf_differentiates_both_slots() {
        let b = d(2.0, &[1.0, 0.0]);
        let e = d(3.0, &[0.0, 1.0]);
        let p = b.powf_d(&e);
        assert!((p.val - 8.0).abs() < 1e-12);
        assert!((p.der[0] - 12.0).abs() < 1e-12);
        assert!((p.der[1] - 8.0 * 2.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn abs_slope_by_sign() {
        assert_eq!(d(-3.0, &[1.0]).abs_d().der, vec![-1.0]);
        assert_eq!(d(3.0, &[1.0]).abs_d().der, vec![1.0]);
        assert_eq!(d(0.0, &[1.0]).abs_d().der, vec![0.0]);
    }

    #[test]
    fn is_constant_sees_through_zero_slots() {
        assert!(d(5.0, &[0.0, 0.0]).is_constant());
        assert!(!d(5.0, &[0.0, 1.0]).is_constant());
        let nested: Dual<Dual<f64>> = Dual {
            val: d(5.0, &[0.0]),
            der: vec![d(0.0, &[0.0])],
        };
        assert!(nested.is_constant());
    }
}
