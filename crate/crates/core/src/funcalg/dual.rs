//! Forward-mode first-order arithmetic.
//!
//! [`Dual<T>`] carries a value and a gradient over a fixed set of seeded
//! variables. It is generic over its own scalar, so `Dual<Dual<f64>>`
//! carries exact second derivatives, which is what nested brackets need.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

pub trait Scalar:
    Clone + Debug + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn cst(c: f64) -> Self;
    /// Underlying real value, stripping all derivative parts.
    fn re(&self) -> f64;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn exp(&self) -> Self;
    fn scale(&self, c: f64) -> Self;
}

impl Scalar for f64 {
    fn cst(c: f64) -> Self {
        c
    }
    fn re(&self) -> f64 {
        *self
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn scale(&self, c: f64) -> Self {
        c * self
    }
}

/// Value plus gradient. An empty gradient means "all zeros", which keeps
/// constants allocation-free.
#[derive(Clone, Debug, PartialEq)]
pub struct Dual<T> {
    pub val: T,
    pub grad: Vec<T>,
}

impl<T: Scalar> Dual<T> {
    pub fn constant(val: T) -> Self {
        Dual {
            val,
            grad: Vec::new(),
        }
    }

    /// Seed variable `index` out of `n`.
    pub fn variable(val: T, index: usize, n: usize) -> Self {
        let mut grad = vec![T::cst(0.0); n];
        grad[index] = T::cst(1.0);
        Dual { val, grad }
    }

    /// Gradient padded to length `n`.
    pub fn gradient(&self, n: usize) -> Vec<T> {
        if self.grad.is_empty() {
            vec![T::cst(0.0); n]
        } else {
            debug_assert_eq!(self.grad.len(), n);
            self.grad.clone()
        }
    }

    fn map_grad(grad: Vec<T>, f: impl Fn(T) -> T) -> Vec<T> {
        grad.into_iter().map(f).collect()
    }

    /// Chain rule through a scalar primitive with derivative `d`.
    fn chain(self, val: T, d: T) -> Self {
        let grad = Self::map_grad(self.grad, |g| d.clone() * g);
        Dual { val, grad }
    }
}

fn combine<T: Scalar>(
    a: Vec<T>,
    b: Vec<T>,
    f: impl Fn(T, T) -> T,
    only_b: impl Fn(T) -> T,
) -> Vec<T> {
    match (a.is_empty(), b.is_empty()) {
        (_, true) => a,
        (true, false) => b.into_iter().map(only_b).collect(),
        (false, false) => {
            debug_assert_eq!(a.len(), b.len());
            a.into_iter().zip(b).map(|(x, y)| f(x, y)).collect()
        }
    }
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Dual {
            val: self.val + rhs.val,
            grad: combine(self.grad, rhs.grad, |x, y| x + y, |y| y),
        }
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Dual {
            val: self.val - rhs.val,
            grad: combine(self.grad, rhs.grad, |x, y| x - y, |y| -y),
        }
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual {
            val: -self.val,
            grad: self.grad.into_iter().map(|g| -g).collect(),
        }
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl<T: Scalar> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let (a, b) = (self.val, rhs.val);
        let ga: Vec<T> = self.grad.into_iter().map(|g| b.clone() * g).collect();
        let gb: Vec<T> = rhs.grad.into_iter().map(|g| a.clone() * g).collect();
        let grad = combine(ga, gb, |x, y| x + y, |y| y);
        Dual { val: a * b, grad }
    }
}

impl<T: Scalar> Scalar for Dual<T> {
    fn cst(c: f64) -> Self {
        Dual::constant(T::cst(c))
    }
    fn re(&self) -> f64 {
        self.val.re()
    }
    fn sin(&self) -> Self {
        self.clone().chain(self.val.sin(), self.val.cos())
    }
    fn cos(&self) -> Self {
        self.clone().chain(self.val.cos(), -self.val.sin())
    }
    fn exp(&self) -> Self {
        let e = self.val.exp();
        self.clone().chain(e.clone(), e)
    }
    fn scale(&self, c: f64) -> Self {
        Dual {
            val: self.val.scale(c),
            grad: self.grad.iter().map(|g| g.scale(c)).collect(),
        }
    }
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::cst(0.0), |acc, (x, y)| acc + x.clone() * y.clone())
}

pub fn lift<T: Scalar>(x: &[f64]) -> Vec<T> {
    x.iter().map(|&v| T::cst(v)).collect()
}

/// Seed `x` as variables `offset..offset+len` out of `n`.
pub fn seed<T: Scalar>(x: &[T], offset: usize, n: usize) -> Vec<Dual<T>> {
    x.iter()
        .enumerate()
        .map(|(i, v)| Dual::variable(v.clone(), offset + i, n))
        .collect()
}
