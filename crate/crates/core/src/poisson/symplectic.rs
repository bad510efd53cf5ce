//! The weak symplectic form on `T^pre M = M x M_*` and its partial sharp map.
//!
//! With `omega((v, Phi), (w, Psi)) = <Phi, w> - <Psi, v>`, flat is
//! `(v, Phi) -> (Phi, -v)` and its inverse on the image is
//! `(mu, x) -> (-x, mu)`, defined only when `mu` lies in the predual.

use serde::Serialize;

use super::{poisson_bracket, CotangentAtom, TangentAtom};
use crate::algebroid::AlgebroidModel;
use crate::error::{Error, Result};
use crate::funcalg::{BundlePoint, SmoothFn};
use crate::spaces::{self, membership_diagnostic, MembershipRule, MembershipVerdict, Verdict};

pub fn omega_eval(a: &TangentAtom, b: &TangentAtom) -> Result<f64> {
    if a.v.len() != b.v.len() || a.psi.len() != b.psi.len() || a.v.len() != a.psi.len() {
        return Err(Error::dim(
            "tangent vectors of the precotangent bundle must share dimension",
        ));
    }
    Ok(spaces::dot(&a.psi, &b.v) - spaces::dot(&b.psi, &a.v))
}

pub fn flat(t: &TangentAtom) -> CotangentAtom {
    CotangentAtom {
        base_pt: t.base_pt.clone(),
        mu: t.psi.clone(),
        x: t.v.iter().map(|v| -v).collect(),
    }
}

pub fn sharp_omega(c: &CotangentAtom) -> TangentAtom {
    TangentAtom {
        base_pt: c.base_pt.clone(),
        v: c.x.iter().map(|x| -x).collect(),
        psi: c.mu.clone(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OmegaBracket {
    pub value: f64,
    pub flat_f: MembershipVerdict,
    pub flat_g: MembershipVerdict,
    /// Set when either base derivative is not seen to lie in the predual,
    /// so the value is only formal.
    pub warning: bool,
}

fn flat_dims(n: usize) -> Vec<usize> {
    let d = spaces::doubling_dims(2, n);
    if d.len() >= 3 {
        d
    } else {
        (1..=n.max(3)).collect()
    }
}

/// Whether `N -> (d_m f)|_N` stays bounded in the predual norm of the base.
pub fn flat_membership(
    model: &AlgebroidModel,
    f: &SmoothFn,
    pt: &BundlePoint,
) -> Result<MembershipVerdict> {
    let grad = f.jet(pt)?.d_m;
    let dims: Vec<usize> = flat_dims(grad.len())
        .into_iter()
        .filter(|&n| n <= grad.len())
        .collect();
    if dims.len() < 3 {
        return Err(Error::Precondition(
            "base dimension too small for a membership diagnostic".into(),
        ));
    }
    membership_diagnostic(
        |n| Ok(spaces::truncate_coords(&grad, n)),
        model.base.norm.dual(),
        &dims,
        &MembershipRule::default(),
    )
}

/// `-<f_m, g_phi> + <g_m, f_phi>`, the closed form of `omega(sharp df, sharp dg)`.
pub fn omega_bracket_displayed(f: &SmoothFn, g: &SmoothFn, pt: &BundlePoint) -> Result<f64> {
    let (fj, gj) = (f.jet(pt)?, g.jet(pt)?);
    Ok(-spaces::dot(&fj.d_m, &gj.d_phi) + spaces::dot(&gj.d_m, &fj.d_phi))
}

fn check_precotangent(model: &AlgebroidModel, pt: &BundlePoint) -> Result<()> {
    pt.check(model.base_dim(), model.fiber_dim())?;
    let n = model.base_dim();
    let identity = model
        .anchor
        .matrix(&pt.m)
        .iter()
        .enumerate()
        .all(|(i, row)| {
            row.len() == n
                && row
                    .iter()
                    .enumerate()
                    .all(|(j, &a)| a == if i == j { 1.0 } else { 0.0 })
        });
    if !identity || !model.structure.is_zero() {
        return Err(Error::Precondition(format!(
            "{} is not a precotangent model",
            model.name
        )));
    }
    Ok(())
}

/// `omega(sharp df, sharp dg)` through the flat/sharp apparatus, with the
/// membership of `d_m f` and `d_m g` in the predual checked on the way.
pub fn omega_bracket(
    model: &AlgebroidModel,
    f: &SmoothFn,
    g: &SmoothFn,
    pt: &BundlePoint,
) -> Result<OmegaBracket> {
    check_precotangent(model, pt)?;
    let df = CotangentAtom::from_jet(pt, &f.jet(pt)?);
    let dg = CotangentAtom::from_jet(pt, &g.jet(pt)?);
    let value = omega_eval(&sharp_omega(&df), &sharp_omega(&dg))?;
    let flat_f = flat_membership(model, f, pt)?;
    let flat_g = flat_membership(model, g, pt)?;
    let warning = flat_f.verdict != Verdict::Bounded || flat_g.verdict != Verdict::Bounded;
    Ok(OmegaBracket {
        value,
        flat_f,
        flat_g,
        warning,
    })
}

/// `|{f, g}_omega - {f, g}|` on a precotangent model.
pub fn coincidence_check(
    model: &AlgebroidModel,
    f: &SmoothFn,
    g: &SmoothFn,
    pt: &BundlePoint,
) -> Result<f64> {
    let w = omega_bracket(model, f, g, pt)?.value;
    Ok((w - poisson_bracket(model, f, g, pt)?).abs())
}
