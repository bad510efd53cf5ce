//! The canonical linear Poisson structure on the predual bundle `E_*`.
//!
//! In a trivialization, with `f_m, f_phi` the partial derivatives of `f`,
//!
//! ```text
//! {f, g}(m, phi) = <a(f_phi), g_m> - <a(g_phi), f_m> + <C_m(f_phi, g_phi), phi>
//! ```
//!
//! and the sharp map is `(m, phi, mu, x) -> (m, phi, -a(x), a^*(mu) - (ad_x)^* phi)`,
//! so that `{f, g} = <df, sharp(dg)>`. With this orientation
//! `{lambda_X, f o pi} = (a(X) f) o pi` and `{lambda_X, lambda_Y} = lambda_[X,Y]`.

mod conditions;
mod symplectic;

pub use conditions::{predual_condition_diagnostic, ConditionConfig, ConditionReport, DrawRecord};
pub use symplectic::{
    coincidence_check, flat, flat_membership, omega_bracket, omega_bracket_displayed, omega_eval,
    sharp_omega, OmegaBracket,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebroid::AlgebroidModel;
use crate::error::{Error, Result};
use crate::funcalg::{dot, seed, BundlePoint, Dual, FnJet, Jet1, Scalar, Section, SmoothFn};
use crate::spaces;

/// A covector `(mu, x) in M* x E` at a bundle point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CotangentAtom {
    pub base_pt: BundlePoint,
    pub mu: Vec<f64>,
    pub x: Vec<f64>,
}

impl CotangentAtom {
    pub fn from_jet(pt: &BundlePoint, jet: &Jet1) -> Self {
        CotangentAtom {
            base_pt: pt.clone(),
            mu: jet.d_m.clone(),
            x: jet.d_phi.clone(),
        }
    }
}

/// A tangent vector `(v, psi) in M x E*` at a bundle point; whether `psi`
/// lies in the predual is a diagnostic, not a type constraint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentAtom {
    pub base_pt: BundlePoint,
    pub v: Vec<f64>,
    pub psi: Vec<f64>,
}

/// `<(mu, x), (v, psi)> = <mu, v> + <psi, x>`
pub fn pair_on_cotangent(c: &CotangentAtom, t: &TangentAtom) -> f64 {
    spaces::dot(&c.mu, &t.v) + spaces::dot(&t.psi, &c.x)
}

fn check_model_fn(model: &AlgebroidModel, f: &SmoothFn) -> Result<()> {
    f.check_dims(model.base_dim(), model.fiber_dim())
}

/// The bracket formula applied to jets over any scalar type.
pub fn bracket_from_jets<T: Scalar>(
    model: &AlgebroidModel,
    m: &[T],
    phi: &[T],
    f: &FnJet<T>,
    g: &FnJet<T>,
) -> T {
    let t1 = dot(&model.anchor.apply(m, &f.d_phi), &g.d_m);
    let t2 = dot(&model.anchor.apply(m, &g.d_phi), &f.d_m);
    let t3 = dot(&model.structure.apply(m, &f.d_phi, &g.d_phi), phi);
    (t1 - t2) + t3
}

pub fn poisson_bracket(
    model: &AlgebroidModel,
    f: &SmoothFn,
    g: &SmoothFn,
    pt: &BundlePoint,
) -> Result<f64> {
    pt.check(model.base_dim(), model.fiber_dim())?;
    check_model_fn(model, f)?;
    check_model_fn(model, g)?;
    let (fj, gj) = (f.jet(pt)?, g.jet(pt)?);
    Ok(bracket_from_jets(model, &pt.m, &pt.phi, &fj, &gj))
}

/// Exact first jet of `{f, g}` at `pt`, from second-order forward arithmetic.
pub fn bracket_jet(
    model: &AlgebroidModel,
    f: &SmoothFn,
    g: &SmoothFn,
    pt: &BundlePoint,
) -> Result<Jet1> {
    pt.check(model.base_dim(), model.fiber_dim())?;
    check_model_fn(model, f)?;
    check_model_fn(model, g)?;
    let nb = pt.m.len();
    let n = nb + pt.phi.len();
    let md: Vec<Dual<f64>> = seed(&pt.m, 0, n);
    let pd: Vec<Dual<f64>> = seed(&pt.phi, nb, n);
    let fj = f.jet_generic(&md, &pd);
    let gj = g.jet_generic(&md, &pd);
    let b = bracket_from_jets(model, &md, &pd, &fj, &gj);
    let mut grad = b.gradient(n);
    let d_phi = grad.split_off(nb);
    Ok(Jet1 {
        value: b.val,
        d_m: grad,
        d_phi,
    })
}

pub fn sharp(model: &AlgebroidModel, atom: &CotangentAtom) -> Result<TangentAtom> {
    let pt = &atom.base_pt;
    pt.check(model.base_dim(), model.fiber_dim())?;
    if atom.mu.len() != model.base_dim() || atom.x.len() != model.fiber_dim() {
        return Err(Error::dim("cotangent atom does not match the model"));
    }
    let v: Vec<f64> = model
        .anchor
        .apply(&pt.m, &atom.x)
        .into_iter()
        .map(|c| -c)
        .collect();
    let a_star = model.anchor.transpose_apply(&pt.m, &atom.mu);
    let ad_star = model.structure.ad_star(&pt.m, &atom.x, &pt.phi);
    let psi = a_star.iter().zip(&ad_star).map(|(a, b)| a - b).collect();
    Ok(TangentAtom {
        base_pt: pt.clone(),
        v,
        psi,
    })
}

/// Residuals of the three defining relations at `pt`:
/// `|{f o pi, g o pi}|`, `|{lambda_X, f o pi} - (a(X) f) o pi|`,
/// `|{lambda_X, lambda_Y} - lambda_[X,Y]|`.
pub fn structural_relations_check(
    model: &AlgebroidModel,
    x: &Section,
    y: &Section,
    f_base: &SmoothFn,
    g_base: &SmoothFn,
    pt: &BundlePoint,
) -> Result<[f64; 3]> {
    let fp = SmoothFn::pullback(f_base.clone())?;
    let gp = SmoothFn::pullback(g_base.clone())?;
    let lx = SmoothFn::lambda(x.clone());
    let ly = SmoothFn::lambda(y.clone());

    let r1 = poisson_bracket(model, &fp, &gp, pt)?.abs();
    let lhs2 = poisson_bracket(model, &lx, &fp, pt)?;
    let r2 = (lhs2 - model.anchor_action(x, f_base, &pt.m)?).abs();
    let lhs3 = poisson_bracket(model, &lx, &ly, pt)?;
    let xy = model.bracket_sections(x, y, &pt.m)?;
    let r3 = (lhs3 - spaces::dot(&pt.phi, &xy)).abs();
    Ok([r1, r2, r3])
}

/// `|{{f,g},h} + {{g,h},f} + {{h,f},g}|` at `pt`, with exact nested jets.
pub fn jacobi_check_functions(
    model: &AlgebroidModel,
    f: &SmoothFn,
    g: &SmoothFn,
    h: &SmoothFn,
    pt: &BundlePoint,
) -> Result<f64> {
    let outer = |a: &SmoothFn, b: &SmoothFn, c: &SmoothFn| -> Result<f64> {
        let ab = bracket_jet(model, a, b, pt)?;
        Ok(bracket_from_jets(model, &pt.m, &pt.phi, &ab, &c.jet(pt)?))
    };
    Ok((outer(f, g, h)? + outer(g, h, f)? + outer(h, f, g)?).abs())
}

/// `|{f, g h} - g {f, h} - h {f, g}|` at `pt`.
pub fn leibniz_check_functions(
    model: &AlgebroidModel,
    f: &SmoothFn,
    g: &SmoothFn,
    h: &SmoothFn,
    pt: &BundlePoint,
) -> Result<f64> {
    let gh = g.clone() * h.clone();
    let lhs = poisson_bracket(model, f, &gh, pt)?;
    let rhs = g.eval(pt)? * poisson_bracket(model, f, h, pt)?
        + h.eval(pt)? * poisson_bracket(model, f, g, pt)?;
    Ok((lhs - rhs).abs())
}

/// Largest relative defect of `F(m, a phi + b psi) = a F(m, phi) + b F(m, psi)`
/// over `trials` seeded draws of `(a, b, phi, psi)`.
pub fn fiber_linearity_residual<F>(
    func: F,
    m: &[f64],
    fiber_dim: usize,
    trials: usize,
    seed: u64,
) -> Result<f64>
where
    F: Fn(&BundlePoint) -> Result<f64>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let a: f64 = rng.random_range(-2.0..2.0);
        let b: f64 = rng.random_range(-2.0..2.0);
        let phi: Vec<f64> = (0..fiber_dim)
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let psi: Vec<f64> = (0..fiber_dim)
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let mix: Vec<f64> = phi.iter().zip(&psi).map(|(p, q)| a * p + b * q).collect();
        let fp = func(&BundlePoint::new(m.to_vec(), phi))?;
        let fq = func(&BundlePoint::new(m.to_vec(), psi))?;
        let fm = func(&BundlePoint::new(m.to_vec(), mix))?;
        let scale = 1.0 + (a * fp).abs() + (b * fq).abs();
        worst = worst.max((fm - a * fp - b * fq).abs() / scale);
    }
    Ok(worst)
}

pub const LINEARITY_TOL: f64 = 1e-10;

/// Whether `{lambda_X, lambda_Y}` is fiber-wise linear over `pt.m`.
pub fn linearity_check(
    model: &AlgebroidModel,
    x: &Section,
    y: &Section,
    pt: &BundlePoint,
) -> Result<bool> {
    let (lx, ly) = (SmoothFn::lambda(x.clone()), SmoothFn::lambda(y.clone()));
    let r = fiber_linearity_residual(
        |p| poisson_bracket(model, &lx, &ly, p),
        &pt.m,
        model.fiber_dim(),
        8,
        0x11,
    )?;
    Ok(r <= LINEARITY_TOL)
}
