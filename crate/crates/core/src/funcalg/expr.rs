use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::dual::{seed, Dual, Scalar};
use crate::error::{Error, Result};

/// A point `(m, phi)` of the trivialized predual bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundlePoint {
    pub m: Vec<f64>,
    pub phi: Vec<f64>,
}

impl BundlePoint {
    pub fn new(m: Vec<f64>, phi: Vec<f64>) -> Self {
        BundlePoint { m, phi }
    }

    pub fn check(&self, base_dim: usize, fiber_dim: usize) -> Result<()> {
        if self.m.len() != base_dim || self.phi.len() != fiber_dim {
            return Err(Error::dim(format!(
                "point has dims ({}, {}), model expects ({base_dim}, {fiber_dim})",
                self.m.len(),
                self.phi.len()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Primitive {
    Sin,
    Cos,
    Exp,
    /// `sum_i c[i] x^i`
    Poly(Vec<f64>),
}

impl Primitive {
    pub fn apply<T: Scalar>(&self, x: T) -> T {
        match self {
            Primitive::Sin => x.sin(),
            Primitive::Cos => x.cos(),
            Primitive::Exp => x.exp(),
            Primitive::Poly(c) => {
                let mut acc = T::cst(0.0);
                for &ci in c.iter().rev() {
                    acc = acc * x.clone() + T::cst(ci);
                }
                acc
            }
        }
    }
}

/// How a function depends on the fiber coordinate, tracked structurally.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FiberDegree {
    Constant,
    Linear,
    Other,
}

/// Node of the smooth-function algebra on `U x E_*`.
///
/// Base-only expressions (no `Fiber` or `Lambda` anywhere) double as
/// functions on the base and as section components.
#[derive(Debug, Clone, PartialEq)]
pub enum SmoothFn {
    Const(f64),
    /// Base coordinate `m_k`.
    Base(usize),
    /// Fiber coordinate `phi_k`.
    Fiber(usize),
    /// `f o pi_*` for a base function `f`.
    Pullback(Arc<SmoothFn>),
    /// `lambda_X(m, phi) = <phi, X(m)>`.
    Lambda(Arc<Section>),
    Sum(Vec<SmoothFn>),
    Product(Vec<SmoothFn>),
    Apply(Primitive, Box<SmoothFn>),
}

impl SmoothFn {
    pub fn constant(c: f64) -> Self {
        SmoothFn::Const(c)
    }
    pub fn m(k: usize) -> Self {
        SmoothFn::Base(k)
    }
    pub fn phi(k: usize) -> Self {
        SmoothFn::Fiber(k)
    }

    pub fn pullback(f: SmoothFn) -> Result<Self> {
        if !f.is_base_only() {
            return Err(Error::Validation(
                "pullback argument must be a base function".into(),
            ));
        }
        Ok(SmoothFn::Pullback(Arc::new(f)))
    }

    pub fn lambda(x: Section) -> Self {
        SmoothFn::Lambda(Arc::new(x))
    }

    pub fn apply(self, p: Primitive) -> Self {
        SmoothFn::Apply(p, Box::new(self))
    }
    pub fn sin(self) -> Self {
        self.apply(Primitive::Sin)
    }
    pub fn cos(self) -> Self {
        self.apply(Primitive::Cos)
    }
    pub fn exp(self) -> Self {
        self.apply(Primitive::Exp)
    }
    pub fn poly(self, coeffs: Vec<f64>) -> Self {
        self.apply(Primitive::Poly(coeffs))
    }

    pub fn is_base_only(&self) -> bool {
        match self {
            SmoothFn::Const(_) | SmoothFn::Base(_) | SmoothFn::Pullback(_) => true,
            SmoothFn::Fiber(_) | SmoothFn::Lambda(_) => false,
            SmoothFn::Sum(xs) | SmoothFn::Product(xs) => xs.iter().all(SmoothFn::is_base_only),
            SmoothFn::Apply(_, x) => x.is_base_only(),
        }
    }

    pub fn fiber_degree(&self) -> FiberDegree {
        use FiberDegree::*;
        match self {
            SmoothFn::Const(_) | SmoothFn::Base(_) | SmoothFn::Pullback(_) => Constant,
            SmoothFn::Fiber(_) | SmoothFn::Lambda(_) => Linear,
            SmoothFn::Sum(xs) => {
                let degs: Vec<_> = xs.iter().map(SmoothFn::fiber_degree).collect();
                if degs.iter().all(|d| *d == Constant) {
                    Constant
                } else if degs.iter().all(|d| *d == Linear) {
                    Linear
                } else {
                    Other
                }
            }
            SmoothFn::Product(xs) => {
                let mut linear = 0;
                for d in xs.iter().map(SmoothFn::fiber_degree) {
                    match d {
                        Constant => {}
                        Linear => linear += 1,
                        Other => return Other,
                    }
                }
                match linear {
                    0 => Constant,
                    1 => Linear,
                    _ => Other,
                }
            }
            SmoothFn::Apply(_, x) => match x.fiber_degree() {
                Constant => Constant,
                _ => Other,
            },
        }
    }

    pub fn is_fiber_linear(&self) -> bool {
        self.fiber_degree() == FiberDegree::Linear
    }

    /// Smallest `(base_dim, fiber_dim)` the expression can be evaluated on.
    pub fn required_dims(&self) -> (usize, usize) {
        match self {
            SmoothFn::Const(_) => (0, 0),
            SmoothFn::Base(k) => (k + 1, 0),
            SmoothFn::Fiber(k) => (0, k + 1),
            SmoothFn::Pullback(f) => f.required_dims(),
            SmoothFn::Lambda(x) => {
                let (b, _) = x.required_base_dim();
                (b, x.dim())
            }
            SmoothFn::Sum(xs) | SmoothFn::Product(xs) => xs
                .iter()
                .map(SmoothFn::required_dims)
                .fold((0, 0), |(a, b), (c, d)| (a.max(c), b.max(d))),
            SmoothFn::Apply(_, x) => x.required_dims(),
        }
    }

    pub fn check_dims(&self, base_dim: usize, fiber_dim: usize) -> Result<()> {
        let (b, f) = self.required_dims();
        if b > base_dim || f > fiber_dim {
            return Err(Error::dim(format!(
                "function needs dims ({b}, {f}), model has ({base_dim}, {fiber_dim})"
            )));
        }
        self.visit_lambdas(&mut |x| {
            if x.dim() != fiber_dim {
                Err(Error::dim(format!(
                    "section has {} components, fiber dim is {fiber_dim}",
                    x.dim()
                )))
            } else {
                Ok(())
            }
        })
    }

    fn visit_lambdas(&self, f: &mut impl FnMut(&Section) -> Result<()>) -> Result<()> {
        match self {
            SmoothFn::Lambda(x) => f(x),
            SmoothFn::Sum(xs) | SmoothFn::Product(xs) => {
                xs.iter().try_for_each(|x| x.visit_lambdas(f))
            }
            SmoothFn::Apply(_, x) => x.visit_lambdas(f),
            _ => Ok(()),
        }
    }

    /// Evaluate over any scalar type. Index ranges are the caller's
    /// responsibility (see [`SmoothFn::check_dims`]).
    pub fn eval_generic<T: Scalar>(&self, m: &[T], phi: &[T]) -> T {
        match self {
            SmoothFn::Const(c) => T::cst(*c),
            SmoothFn::Base(k) => m[*k].clone(),
            SmoothFn::Fiber(k) => phi[*k].clone(),
            SmoothFn::Pullback(f) => f.eval_generic(m, &[]),
            SmoothFn::Lambda(x) => x.comps.iter().zip(phi).fold(T::cst(0.0), |acc, (c, p)| {
                acc + p.clone() * c.eval_generic(m, &[])
            }),
            SmoothFn::Sum(xs) => xs
                .iter()
                .fold(T::cst(0.0), |acc, x| acc + x.eval_generic(m, phi)),
            SmoothFn::Product(xs) => {
                let mut it = xs.iter();
                match it.next() {
                    None => T::cst(1.0),
                    Some(first) => it.fold(first.eval_generic(m, phi), |acc, x| {
                        acc * x.eval_generic(m, phi)
                    }),
                }
            }
            SmoothFn::Apply(p, x) => p.apply(x.eval_generic(m, phi)),
        }
    }

    pub fn eval(&self, pt: &BundlePoint) -> Result<f64> {
        self.check_dims(pt.m.len(), pt.phi.len())?;
        Ok(self.eval_generic(&pt.m, &pt.phi))
    }

    /// Value of a base-only expression at `m`.
    pub fn eval_base(&self, m: &[f64]) -> Result<f64> {
        if !self.is_base_only() {
            return Err(Error::Validation("expected a base function".into()));
        }
        self.check_dims(m.len(), 0)?;
        Ok(self.eval_generic(m, &[]))
    }

    /// Exact first jet at `pt`.
    pub fn jet(&self, pt: &BundlePoint) -> Result<Jet1> {
        self.check_dims(pt.m.len(), pt.phi.len())?;
        Ok(self.jet_generic(&pt.m, &pt.phi))
    }

    /// First jet over scalar type `T`; with `T = Dual<f64>` seeded at the
    /// point this carries second derivatives.
    pub fn jet_generic<T: Scalar>(&self, m: &[T], phi: &[T]) -> FnJet<T> {
        let nb = m.len();
        let n = nb + phi.len();
        let md = seed(m, 0, n);
        let pd = seed(phi, nb, n);
        let d: Dual<T> = self.eval_generic(&md, &pd);
        let mut grad = d.gradient(n);
        let d_phi = grad.split_off(nb);
        FnJet {
            value: d.val,
            d_m: grad,
            d_phi,
        }
    }

    /// Differential of a base function at `m`.
    pub fn base_gradient(&self, m: &[f64]) -> Result<Vec<f64>> {
        if !self.is_base_only() {
            return Err(Error::Validation("expected a base function".into()));
        }
        self.check_dims(m.len(), 0)?;
        Ok(self.jet_generic(m, &[]).d_m)
    }
}

impl Add for SmoothFn {
    type Output = SmoothFn;
    fn add(self, rhs: SmoothFn) -> SmoothFn {
        match self {
            SmoothFn::Sum(mut xs) => {
                xs.push(rhs);
                SmoothFn::Sum(xs)
            }
            lhs => SmoothFn::Sum(vec![lhs, rhs]),
        }
    }
}

impl Mul for SmoothFn {
    type Output = SmoothFn;
    fn mul(self, rhs: SmoothFn) -> SmoothFn {
        match self {
            SmoothFn::Product(mut xs) => {
                xs.push(rhs);
                SmoothFn::Product(xs)
            }
            lhs => SmoothFn::Product(vec![lhs, rhs]),
        }
    }
}

impl Neg for SmoothFn {
    type Output = SmoothFn;
    fn neg(self) -> SmoothFn {
        SmoothFn::Product(vec![SmoothFn::Const(-1.0), self])
    }
}

impl Sub for SmoothFn {
    type Output = SmoothFn;
    fn sub(self, rhs: SmoothFn) -> SmoothFn {
        self + (-rhs)
    }
}

/// First jet of a scalar function on the bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FnJet<T> {
    pub value: T,
    /// Partial derivative along the base, an element of M*.
    pub d_m: Vec<T>,
    /// Partial derivative along the predual fiber, an element of E.
    pub d_phi: Vec<T>,
}

pub type Jet1 = FnJet<f64>;

impl Jet1 {
    pub fn max_abs_diff(&self, other: &Jet1) -> f64 {
        let mut d = (self.value - other.value).abs();
        for (a, b) in self
            .d_m
            .iter()
            .zip(&other.d_m)
            .chain(self.d_phi.iter().zip(&other.d_phi))
        {
            d = d.max((a - b).abs());
        }
        d
    }

    pub fn max_abs(&self) -> f64 {
        self.d_m
            .iter()
            .chain(&self.d_phi)
            .fold(self.value.abs(), |acc, v| acc.max(v.abs()))
    }
}

/// A local section `m -> X(m)` given by base-only component expressions.
#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub comps: Vec<SmoothFn>,
}

/// Value and derivative of a section at a point: `deriv[j][i] = d_i X^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SectionJet<T> {
    pub value: Vec<T>,
    pub deriv: Vec<Vec<T>>,
}

impl<T: Scalar> SectionJet<T> {
    /// `DX(m)[v]`
    pub fn apply_deriv(&self, v: &[T]) -> Vec<T> {
        self.deriv
            .iter()
            .map(|row| super::dual::dot(row, v))
            .collect()
    }
}

impl Section {
    pub fn new(comps: Vec<SmoothFn>) -> Result<Self> {
        if comps.iter().any(|c| !c.is_base_only()) {
            return Err(Error::Validation(
                "section components must be base functions".into(),
            ));
        }
        Ok(Section { comps })
    }

    pub fn constant(v: &[f64]) -> Self {
        Section {
            comps: v.iter().map(|&c| SmoothFn::Const(c)).collect(),
        }
    }

    pub fn basis(k: usize, dim: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[k] = 1.0;
        Section::constant(&v)
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    fn required_base_dim(&self) -> (usize, usize) {
        self.comps
            .iter()
            .map(SmoothFn::required_dims)
            .fold((0, 0), |(a, b), (c, d)| (a.max(c), b.max(d)))
    }

    pub fn check_dims(&self, base_dim: usize, fiber_dim: usize) -> Result<()> {
        if self.dim() != fiber_dim {
            return Err(Error::dim(format!(
                "section has {} components, fiber dim is {fiber_dim}",
                self.dim()
            )));
        }
        let (b, _) = self.required_base_dim();
        if b > base_dim {
            return Err(Error::dim(format!(
                "section needs base dim {b}, model has {base_dim}"
            )));
        }
        Ok(())
    }

    pub fn value(&self, m: &[f64]) -> Vec<f64> {
        self.comps.iter().map(|c| c.eval_generic(m, &[])).collect()
    }

    /// Value and derivative at `m`, over any scalar type.
    pub fn jet_generic<T: Scalar>(&self, m: &[T]) -> SectionJet<T> {
        let nb = m.len();
        let md = seed(m, 0, nb);
        let mut value = Vec::with_capacity(self.dim());
        let mut deriv = Vec::with_capacity(self.dim());
        for c in &self.comps {
            let d: Dual<T> = c.eval_generic(&md, &[]);
            deriv.push(d.gradient(nb));
            value.push(d.val);
        }
        SectionJet { value, deriv }
    }

    pub fn jet(&self, m: &[f64]) -> SectionJet<f64> {
        self.jet_generic(m)
    }

    /// Componentwise `f * X` for a base function `f`.
    pub fn scaled_by(&self, f: &SmoothFn) -> Result<Section> {
        if !f.is_base_only() {
            return Err(Error::Validation(
                "multiplier must be a base function".into(),
            ));
        }
        Ok(Section {
            comps: self.comps.iter().map(|c| f.clone() * c.clone()).collect(),
        })
    }

    pub fn plus(&self, other: &Section) -> Result<Section> {
        if self.dim() != other.dim() {
            return Err(Error::dim("sections of different fiber dim"));
        }
        Ok(Section {
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        })
    }
}

/// Central differences with one Richardson step; used as an independent
/// check on [`SmoothFn::jet`].
pub fn fd_jet(f: &SmoothFn, pt: &BundlePoint, h: f64) -> Result<Jet1> {
    if h <= 0.0 {
        return Err(Error::Precondition(
            "finite-difference step must be positive".into(),
        ));
    }
    f.check_dims(pt.m.len(), pt.phi.len())?;
    let eval = |m: &[f64], phi: &[f64]| f.eval_generic(m, phi);
    let central = |i: usize, step: f64| -> f64 {
        let (mut m1, mut p1) = (pt.m.clone(), pt.phi.clone());
        let (mut m2, mut p2) = (pt.m.clone(), pt.phi.clone());
        if i < pt.m.len() {
            m1[i] += step;
            m2[i] -= step;
        } else {
            p1[i - pt.m.len()] += step;
            p2[i - pt.m.len()] -= step;
        }
        (eval(&m1, &p1) - eval(&m2, &p2)) / (2.0 * step)
    };
    let richardson = |i: usize| (4.0 * central(i, h / 2.0) - central(i, h)) / 3.0;
    let nb = pt.m.len();
    let n = nb + pt.phi.len();
    let mut d: Vec<f64> = (0..n).map(richardson).collect();
    let d_phi = d.split_off(nb);
    Ok(Jet1 {
        value: eval(&pt.m, &pt.phi),
        d_m: d,
        d_phi,
    })
}
