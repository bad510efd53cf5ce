//! The identity suite run by `verify`: every check is the worst residual over
//! seeded draws, compared to its tolerance.

use std::collections::BTreeMap;

use crate::algebroid::AlgebroidModel;
use crate::error::{Error, Result};
use crate::funcalg::{BundlePoint, Section, SmoothFn};
use crate::poisson::{self, CotangentAtom};
use crate::report::Check;
use crate::sampling::{self, Rng64};
use crate::spaces::{self, NormTag};

pub const DEFAULT_TOLERANCES: &[(&str, f64)] = &[
    ("antisymmetry", 1e-12),
    ("sharp_consistency", 1e-12),
    ("leibniz_functions", 1e-10),
    ("structural_pullbacks", 1e-9),
    ("structural_anchor_action", 1e-9),
    ("structural_lambda_bracket", 1e-9),
    ("jacobi_functions", 1e-7),
    ("fiber_linearity", 1e-10),
    ("section_antisymmetry", 0.0),
    ("section_leibniz", 1e-9),
    ("section_jacobi", 1e-8),
    ("first_jet_dependence", 1e-10),
    ("anchor_morphism", 1e-8),
];

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub seed: u64,
    pub draws: usize,
    pub tolerances: BTreeMap<String, f64>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 42,
            draws: 50,
            tolerances: DEFAULT_TOLERANCES
                .iter()
                .map(|(k, v)| (k.to_string(), *v))
                .collect(),
        }
    }
}

impl SuiteConfig {
    /// Apply `name=value` overrides; unknown names are rejected.
    pub fn with_overrides(mut self, overrides: &[(String, f64)]) -> Result<Self> {
        for (name, tol) in overrides {
            match self.tolerances.get_mut(name) {
                Some(t) => *t = *tol,
                None => {
                    return Err(Error::Parse(format!(
                        "unknown check \"{name}\" in tolerance overrides"
                    )))
                }
            }
        }
        Ok(self)
    }
}

/// Parse `name=value[,name=value...]`.
pub fn parse_overrides(s: &str) -> Result<Vec<(String, f64)>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected name=value, got \"{p}\"")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad tolerance \"{v}\"")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

#[derive(Default)]
struct Worst(BTreeMap<&'static str, f64>);

impl Worst {
    fn add(&mut self, name: &'static str, r: f64) {
        let e = self.0.entry(name).or_insert(0.0);
        // NaN must stick
        if r.is_nan() || r > *e {
            *e = r;
        }
    }
}

/// Residual relative to the magnitude of the terms that should cancel.
fn rel(diff: f64, terms: &[f64]) -> f64 {
    diff / (1.0 + terms.iter().map(|t| t.abs()).sum::<f64>())
}

/// `X'` with `X'(m) = X(m)`, `DX'(m) = DX(m)`, differing at second order.
pub fn second_order_perturbation(x: &Section, m: &[f64], scale: f64) -> Result<Section> {
    let nb = m.len();
    Section::new(
        x.comps
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let d = SmoothFn::m(k % nb) - SmoothFn::constant(m[k % nb]);
                c.clone() + SmoothFn::constant(scale * (k + 1) as f64) * d.clone() * d
            })
            .collect(),
    )
}

fn draw_sections(rng: &mut Rng64, nb: usize, nf: usize) -> (Section, Section, Section) {
    (
        sampling::poly_section(rng, nb, nf, 2),
        sampling::poly_section(rng, nb, nf, 2),
        sampling::poly_section(rng, nb, nf, 2),
    )
}

pub fn run_identity_suite(model: &AlgebroidModel, cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let (nb, nf) = (model.base_dim(), model.fiber_dim());
    let mut rng = sampling::rng(cfg.seed);
    let mut w = Worst::default();
    for _ in 0..cfg.draws {
        let pt: BundlePoint = sampling::point(&mut rng, nb, nf);
        let f = sampling::mixed_fn(&mut rng, nb, nf);
        let g = sampling::mixed_fn(&mut rng, nb, nf);
        let h = sampling::mixed_fn(&mut rng, nb, nf);

        let fg = poisson::poisson_bracket(model, &f, &g, &pt)?;
        let gf = poisson::poisson_bracket(model, &g, &f, &pt)?;
        w.add("antisymmetry", (fg + gf).abs());

        let df = CotangentAtom::from_jet(&pt, &f.jet(&pt)?);
        let sg = poisson::sharp(model, &CotangentAtom::from_jet(&pt, &g.jet(&pt)?))?;
        w.add(
            "sharp_consistency",
            (fg - poisson::pair_on_cotangent(&df, &sg)).abs(),
        );

        let fh = poisson::poisson_bracket(model, &f, &h, &pt)?;
        let (gv, hv) = (g.eval(&pt)?, h.eval(&pt)?);
        let l = poisson::leibniz_check_functions(model, &f, &g, &h, &pt)?;
        w.add("leibniz_functions", rel(l, &[gv * fh, hv * fg]));

        let jac = poisson::jacobi_check_functions(model, &f, &g, &h, &pt)?;
        w.add("jacobi_functions", jac);

        let (x, y, z) = draw_sections(&mut rng, nb, nf);
        let fb = sampling::base_poly(&mut rng, nb, 3);
        let gb = sampling::base_poly(&mut rng, nb, 3);
        let [r1, r2, r3] = poisson::structural_relations_check(model, &x, &y, &fb, &gb, &pt)?;
        w.add("structural_pullbacks", r1);
        w.add("structural_anchor_action", r2);
        w.add("structural_lambda_bracket", r3);

        let (lx, ly) = (SmoothFn::lambda(x.clone()), SmoothFn::lambda(y.clone()));
        let lin = poisson::fiber_linearity_residual(
            |p| poisson::poisson_bracket(model, &lx, &ly, p),
            &pt.m,
            nf,
            2,
            rand::Rng::random(&mut rng),
        )?;
        w.add("fiber_linearity", lin);

        let xy = model.bracket_sections(&x, &y, &pt.m)?;
        let yx = model.bracket_sections(&y, &x, &pt.m)?;
        w.add(
            "section_antisymmetry",
            xy.iter()
                .zip(&yx)
                .map(|(a, b)| (a + b).abs())
                .fold(0.0, f64::max),
        );
        let scale = 1.0 + spaces::norm(&xy, NormTag::PInf);
        w.add(
            "section_leibniz",
            model.leibniz_check(&x, &y, &fb, &pt.m)? / scale,
        );
        w.add(
            "section_jacobi",
            model.jacobi_check_sections(&x, &y, &z, &pt.m)?,
        );

        let xp = second_order_perturbation(&x, &pt.m, 0.5)?;
        w.add(
            "first_jet_dependence",
            model.first_jet_dependence_check(&x, &xp, &y, &pt.m)?,
        );
        w.add(
            "anchor_morphism",
            model.anchor_morphism_residual(&x, &y, &pt.m)?,
        );
    }
    DEFAULT_TOLERANCES
        .iter()
        .map(|(name, _)| {
            let tol = cfg.tolerances[*name];
            Ok(Check::new(
                *name,
                w.0.get(name).copied().unwrap_or(0.0),
                tol,
            ))
        })
        .collect()
}
