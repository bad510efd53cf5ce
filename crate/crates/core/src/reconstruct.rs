//! Recovering the algebroid from a linear Poisson bracket:
//! `[X, Y] = lambda^{-1} {lambda_X, lambda_Y}` and `a(X) = -v` where
//! `sharp(d lambda_X) = (v, psi)`.
//!
//! Oracles are black boxes, so brackets supplied from outside the library
//! can be reconstructed the same way.

use rand::Rng;

use crate::algebroid::AlgebroidModel;
use crate::error::{Error, Result};
use crate::funcalg::{BundlePoint, Section, SmoothFn};
use crate::poisson::{self, fiber_linearity_residual, CotangentAtom, TangentAtom};
use crate::report::Check;
use crate::sampling;
use crate::spaces::{self, NormTag};

pub const NONLINEAR_TOL: f64 = 1e-8;
pub const PHI_INDEPENDENCE_TOL: f64 = 1e-10;

pub trait BracketOracle {
    fn bracket(&self, f: &SmoothFn, g: &SmoothFn, pt: &BundlePoint) -> Result<f64>;
}

pub trait SharpOracle {
    fn sharp(&self, atom: &CotangentAtom) -> Result<TangentAtom>;
}

impl BracketOracle for AlgebroidModel {
    fn bracket(&self, f: &SmoothFn, g: &SmoothFn, pt: &BundlePoint) -> Result<f64> {
        poisson::poisson_bracket(self, f, g, pt)
    }
}

impl SharpOracle for AlgebroidModel {
    fn sharp(&self, atom: &CotangentAtom) -> Result<TangentAtom> {
        poisson::sharp(self, atom)
    }
}

impl<F> BracketOracle for F
where
    F: Fn(&SmoothFn, &SmoothFn, &BundlePoint) -> Result<f64>,
{
    fn bracket(&self, f: &SmoothFn, g: &SmoothFn, pt: &BundlePoint) -> Result<f64> {
        self(f, g, pt)
    }
}

/// Wraps a closure as a sharp oracle (closures already serve as bracket oracles).
pub struct SharpFn<F>(pub F);

impl<F> SharpOracle for SharpFn<F>
where
    F: Fn(&CotangentAtom) -> Result<TangentAtom>,
{
    fn sharp(&self, atom: &CotangentAtom) -> Result<TangentAtom> {
        (self.0)(atom)
    }
}

fn unit(k: usize, n: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[k] = 1.0;
    e
}

/// Value of `[X, Y](m)` read off from `h = {lambda_X, lambda_Y}` on the
/// predual basis: `[X, Y]^i(m) = h(m, e_i)`.
pub fn recover_bracket(
    pb: &dyn BracketOracle,
    x: &Section,
    y: &Section,
    m: &[f64],
) -> Result<Vec<f64>> {
    let n = x.dim();
    if y.dim() != n {
        return Err(Error::dim("sections have different fiber dimensions"));
    }
    let (lx, ly) = (SmoothFn::lambda(x.clone()), SmoothFn::lambda(y.clone()));
    let h = |pt: &BundlePoint| pb.bracket(&lx, &ly, pt);
    let residual = fiber_linearity_residual(h, m, n, 4, 0x5eed)?;
    if residual.is_nan() || residual > NONLINEAR_TOL {
        return Err(Error::NotLinear {
            residual,
            tol: NONLINEAR_TOL,
        });
    }
    (0..n)
        .map(|i| h(&BundlePoint::new(m.to_vec(), unit(i, n))))
        .collect()
}

/// `a(X(m))` as `-v` from `sharp(d lambda_X)` at several fiber points, checked
/// for independence of `phi`, and against `{lambda_X, m_i o pi}`.
pub fn recover_anchor(
    pb: &dyn BracketOracle,
    sharp: &dyn SharpOracle,
    x: &Section,
    m: &[f64],
    seed: u64,
) -> Result<Vec<f64>> {
    let n = x.dim();
    let lx = SmoothFn::lambda(x.clone());
    let mut rng = sampling::rng(seed);
    let mut first: Option<Vec<f64>> = None;
    for _ in 0..8 {
        let phi: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let pt = BundlePoint::new(m.to_vec(), phi);
        let t = sharp.sharp(&CotangentAtom::from_jet(&pt, &lx.jet(&pt)?))?;
        let a: Vec<f64> = t.v.iter().map(|v| -v).collect();
        match &first {
            None => first = Some(a),
            Some(a0) => {
                let d = max_diff(a0, &a);
                if d > PHI_INDEPENDENCE_TOL * (1.0 + spaces::norm(a0, NormTag::PInf)) {
                    return Err(Error::OracleInconsistency(format!(
                        "base part of sharp(d lambda_X) depends on phi (difference {d:.3e})"
                    )));
                }
            }
        }
    }
    let a = first.expect("eight draws");
    let pt = BundlePoint::new(m.to_vec(), vec![0.0; n]);
    for (i, ai) in a.iter().enumerate() {
        let b = pb.bracket(&lx, &SmoothFn::pullback(SmoothFn::m(i))?, &pt)?;
        if (b - ai).abs() > PHI_INDEPENDENCE_TOL * (1.0 + ai.abs()) {
            return Err(Error::OracleInconsistency(format!(
                "anchor component {i}: sharp gives {ai}, bracket with m_{i} gives {b}"
            )));
        }
    }
    Ok(a)
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone)]
pub struct RoundtripConfig {
    pub seed: u64,
    /// Random sections and points per check.
    pub samples: usize,
}

impl Default for RoundtripConfig {
    fn default() -> Self {
        RoundtripConfig {
            seed: 42,
            samples: 8,
        }
    }
}

pub const ROUNDTRIP_TOL: f64 = 1e-9;
pub const PERTURBATION_TOL: f64 = 1e-10;

/// Recover anchor and bracket from the model's own Poisson structure and
/// compare them with the originals.
pub fn roundtrip_check(model: &AlgebroidModel, cfg: &RoundtripConfig) -> Result<Vec<Check>> {
    let (nb, nf) = (model.base_dim(), model.fiber_dim());
    let mut rng = sampling::rng(cfg.seed);
    let mut anchor_res: f64 = 0.0;
    let mut c_res: f64 = 0.0;
    let mut bracket_res: f64 = 0.0;
    let mut anchor_sec_res: f64 = 0.0;
    let mut perturb_res: f64 = 0.0;
    let mut leibniz_res: f64 = 0.0;
    let anchor_seed = cfg.seed ^ 0xa5a5;

    for s in 0..cfg.samples.max(1) {
        let m = sampling::uniform_vec(&mut rng, nb, -1.0, 1.0);
        // anchor matrix and structure constants, on a few base points
        if s < 2 {
            let a = model.anchor.matrix(&m);
            for j in 0..nf {
                let rec = recover_anchor(model, model, &Section::basis(j, nf), &m, anchor_seed)?;
                for (r, row) in rec.iter().zip(&a) {
                    anchor_res = anchor_res.max((r - row[j]).abs());
                }
            }
            for i in 0..nf {
                for j in i + 1..nf {
                    let (ei, ej) = (Section::basis(i, nf), Section::basis(j, nf));
                    let rec = recover_bracket(model, &ei, &ej, &m)?;
                    let c = model.structure_apply(&m, &unit(i, nf), &unit(j, nf))?;
                    c_res = c_res.max(max_diff(&rec, &c));
                }
            }
        }
        let x = sampling::poly_section(&mut rng, nb, nf, 2);
        let y = sampling::poly_section(&mut rng, nb, nf, 2);
        let f = sampling::base_poly(&mut rng, nb, 2);

        let rec = recover_bracket(model, &x, &y, &m)?;
        let fwd = model.bracket_sections(&x, &y, &m)?;
        bracket_res =
            bracket_res.max(max_diff(&rec, &fwd) / (1.0 + spaces::norm(&fwd, NormTag::PInf)));

        let ax = recover_anchor(model, model, &x, &m, anchor_seed)?;
        let fwd_a = model.anchor_apply(&m, &x.value(&m))?;
        anchor_sec_res =
            anchor_sec_res.max(max_diff(&ax, &fwd_a) / (1.0 + spaces::norm(&fwd_a, NormTag::PInf)));

        // X' = X + sum_i (m_i - m0_i) g_i keeps X'(m0) = X(m0) but changes DX'(m0)
        let shift = sampling::poly_section(&mut rng, nb, nf, 1);
        let xp = Section::new(
            x.comps
                .iter()
                .zip(&shift.comps)
                .enumerate()
                .map(|(k, (c, g))| {
                    let i = k % nb;
                    c.clone() + (SmoothFn::m(i) - SmoothFn::constant(m[i])) * g.clone()
                })
                .collect(),
        )?;
        let axp = recover_anchor(model, model, &xp, &m, anchor_seed)?;
        perturb_res = perturb_res.max(max_diff(&ax, &axp));

        // [X, f Y] = f [X, Y] + (a(X) f) Y with recovered pieces only
        let fy = y.scaled_by(&f)?;
        let lhs = recover_bracket(model, &x, &fy, &m)?;
        let fm = f.eval_base(&m)?;
        let axf = spaces::dot(&ax, &f.base_gradient(&m)?);
        let yv = y.value(&m);
        let rhs: Vec<f64> = rec
            .iter()
            .zip(&yv)
            .map(|(r, yk)| fm * r + axf * yk)
            .collect();
        leibniz_res =
            leibniz_res.max(max_diff(&lhs, &rhs) / (1.0 + spaces::norm(&rhs, NormTag::PInf)));
    }
    Ok(vec![
        Check::new("roundtrip_anchor_entries", anchor_res, ROUNDTRIP_TOL),
        Check::new("roundtrip_structure_entries", c_res, ROUNDTRIP_TOL),
        Check::new(
            "roundtrip_bracket_random_sections",
            bracket_res,
            ROUNDTRIP_TOL,
        ),
        Check::new(
            "roundtrip_anchor_random_sections",
            anchor_sec_res,
            ROUNDTRIP_TOL,
        ),
        Check::new(
            "roundtrip_anchor_derivative_invariance",
            perturb_res,
            PERTURBATION_TOL,
        ),
        Check::new("roundtrip_recovered_leibniz", leibniz_res, ROUNDTRIP_TOL),
    ])
}
