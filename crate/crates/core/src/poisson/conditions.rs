//! Numerical diagnostic for whether `sharp` maps into `T(E_*)`, i.e. whether
//! `a^*(mu)` and `(ad_x)^* phi` stay in the predual as truncation grows.

use serde::Serialize;

use crate::algebroid::AlgebroidModel;
use crate::error::{Error, Result};
use crate::presets::{family_is_coherent, DrawProfile, ModelFamily};
use crate::sampling;
use crate::spaces::{
    self, membership_diagnostic, MembershipRule, MembershipVerdict, NormTag, Verdict,
};

#[derive(Debug, Clone)]
pub struct ConditionConfig {
    pub dims: Vec<usize>,
    pub draws: usize,
    pub seed: u64,
    pub rule: MembershipRule,
}

impl Default for ConditionConfig {
    fn default() -> Self {
        ConditionConfig {
            dims: spaces::doubling_dims(8, 4096),
            draws: 16,
            seed: 42,
            rule: MembershipRule::default(),
        }
    }
}

/// Verdicts for one draw of `(mu, x, phi)`, plus the norms of the largest
/// truncation of the draw.
#[derive(Debug, Clone, Serialize)]
pub struct DrawRecord {
    pub anchor_dual: MembershipVerdict,
    pub ad_star: MembershipVerdict,
    pub mu_norm: f64,
    pub x_norm: f64,
    pub phi_norm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub family: String,
    pub predual_norm: NormTag,
    pub profile: DrawProfile,
    pub anchor_dual_verdict: MembershipVerdict,
    pub ad_star_verdict: MembershipVerdict,
    pub is_poisson_manifold: bool,
    pub draws: Vec<DrawRecord>,
}

impl ConditionReport {
    pub fn verdict(&self) -> Verdict {
        combine(&[
            self.anchor_dual_verdict.verdict,
            self.ad_star_verdict.verdict,
        ])
    }
}

fn combine(vs: &[Verdict]) -> Verdict {
    if vs.contains(&Verdict::Growing) {
        Verdict::Growing
    } else if vs.iter().all(|v| *v == Verdict::Bounded) {
        Verdict::Bounded
    } else {
        Verdict::Inconclusive
    }
}

/// Worst case over draws: largest norm per dimension, combined verdict, and
/// the largest bound estimate when every draw is bounded.
fn aggregate(per_draw: &[&MembershipVerdict]) -> MembershipVerdict {
    let verdict = combine(&per_draw.iter().map(|v| v.verdict).collect::<Vec<_>>());
    let norms_by_dim = per_draw[0]
        .norms_by_dim
        .iter()
        .enumerate()
        .map(|(i, &(n, _))| {
            (
                n,
                per_draw
                    .iter()
                    .map(|v| v.norms_by_dim[i].1)
                    .fold(0.0, f64::max),
            )
        })
        .collect();
    let bound_estimate = if verdict == Verdict::Bounded {
        per_draw
            .iter()
            .filter_map(|v| v.bound_estimate)
            .reduce(f64::max)
    } else {
        None
    };
    MembershipVerdict {
        norms_by_dim,
        verdict,
        bound_estimate,
    }
}

pub fn predual_condition_diagnostic(
    family: &dyn ModelFamily,
    cfg: &ConditionConfig,
) -> Result<ConditionReport> {
    if cfg.draws == 0 {
        return Err(Error::Precondition("at least one draw is required".into()));
    }
    let dims = &cfg.dims;
    if dims.len() < 3 {
        return Err(Error::Precondition(
            "membership diagnostic needs at least 3 dims".into(),
        ));
    }
    let top = *dims.last().expect("nonempty");
    if !family_is_coherent(family, dims[0], top)? {
        return Err(Error::Family(format!(
            "{}: truncating dim {top} to {} does not reproduce the smaller model",
            family.name(),
            dims[0]
        )));
    }
    let models: Vec<AlgebroidModel> = dims
        .iter()
        .map(|&n| family.model(n))
        .collect::<Result<_>>()?;
    let big = models.last().expect("nonempty");
    let target = big.predual.norm;
    let profile = family.profile();
    let mut rng = sampling::rng(cfg.seed);

    let mut draws = Vec::with_capacity(cfg.draws);
    for _ in 0..cfg.draws {
        let mu = sampling::decaying_vec(&mut rng, big.base_dim(), profile.mu_decay);
        let x = sampling::decaying_vec(&mut rng, big.fiber_dim(), profile.x_decay);
        let phi = sampling::decaying_vec(&mut rng, big.fiber_dim(), profile.phi_decay);
        let model_at =
            |n: usize| &models[dims.iter().position(|&d| d == n).expect("dim from ladder")];
        let anchor_dual = membership_diagnostic(
            |n| {
                let md = model_at(n);
                let m = vec![0.0; md.base_dim()];
                md.anchor_transpose(&m, &spaces::truncate_coords(&mu, md.base_dim()))
            },
            target,
            dims,
            &cfg.rule,
        )?;
        let ad_star = membership_diagnostic(
            |n| {
                let md = model_at(n);
                let m = vec![0.0; md.base_dim()];
                md.ad_star(
                    &m,
                    &spaces::truncate_coords(&x, n),
                    &spaces::truncate_coords(&phi, n),
                )
            },
            target,
            dims,
            &cfg.rule,
        )?;
        draws.push(DrawRecord {
            anchor_dual,
            ad_star,
            mu_norm: spaces::norm(&mu, big.base.norm.dual()),
            x_norm: spaces::norm(&x, big.fiber.norm),
            phi_norm: spaces::norm(&phi, target),
        });
    }
    let anchor_dual_verdict = aggregate(&draws.iter().map(|d| &d.anchor_dual).collect::<Vec<_>>());
    let ad_star_verdict = aggregate(&draws.iter().map(|d| &d.ad_star).collect::<Vec<_>>());
    let is_poisson_manifold = anchor_dual_verdict.verdict == Verdict::Bounded
        && ad_star_verdict.verdict == Verdict::Bounded;
    Ok(ConditionReport {
        family: family.name(),
        predual_norm: target,
        profile,
        anchor_dual_verdict,
        ad_star_verdict,
        is_poisson_manifold,
        draws,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::{make_sequence_triple, Family, Weights};

    fn cfg(hi: usize, draws: usize) -> ConditionConfig {
        ConditionConfig {
            dims: spaces::doubling_dims(8, hi),
            draws,
            seed: 7,
            ..Default::default()
        }
    }

    #[test]
    fn harmonic_sequence_model_is_poisson() {
        let r = predual_condition_diagnostic(&Family::SeqTriple(Weights::Harmonic), &cfg(1024, 4))
            .unwrap();
        assert_eq!(r.anchor_dual_verdict.verdict, Verdict::Bounded);
        assert_eq!(r.ad_star_verdict.verdict, Verdict::Bounded);
        assert!(r.is_poisson_manifold);
    }

    #[test]
    fn unit_weights_and_precotangent_fail() {
        for f in [Family::SeqTriple(Weights::Unit), Family::Precotangent] {
            let r = predual_condition_diagnostic(&f, &cfg(1024, 4)).unwrap();
            assert_eq!(
                r.anchor_dual_verdict.verdict,
                Verdict::Growing,
                "{}",
                f.name()
            );
            assert!(!r.is_poisson_manifold);
        }
    }

    struct Shifting;

    impl ModelFamily for Shifting {
        fn name(&self) -> String {
            "shifting".into()
        }
        fn model(&self, n: usize) -> Result<AlgebroidModel> {
            let mut m = make_sequence_triple(n, Weights::Harmonic)?;
            // weights depend on N, so truncations disagree
            m.anchor = crate::algebroid::AnchorField::Diagonal(vec![1.0 / n as f64; n]);
            Ok(m)
        }
        fn profile(&self) -> DrawProfile {
            Family::Precotangent.profile()
        }
    }

    #[test]
    fn incoherent_family_rejected() {
        assert!(matches!(
            predual_condition_diagnostic(&Shifting, &cfg(64, 1)),
            Err(Error::Family(_))
        ));
    }
}
