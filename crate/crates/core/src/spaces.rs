//! Finite truncations of the sequence spaces used as model spaces.
//!
//! Every model space (base, fiber, predual, dual) is realized as `R^N`; the
//! norm tag records which sequence space the coordinates stand in for. At a
//! fixed truncation all inclusions between these spaces hold trivially, so
//! membership questions are decided asymptotically by watching how a norm
//! grows as `N` increases (see [`membership_diagnostic`]).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NormTag {
    #[serde(rename = "p1")]
    P1,
    #[serde(rename = "p2")]
    P2,
    #[serde(rename = "pinf")]
    PInf,
}

impl NormTag {
    /// Norm of the dual sequence space (l1 <-> linf, l2 self-dual).
    pub fn dual(self) -> NormTag {
        match self {
            NormTag::P1 => NormTag::PInf,
            NormTag::P2 => NormTag::P2,
            NormTag::PInf => NormTag::P1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NormTag::P1 => "p1",
            NormTag::P2 => "p2",
            NormTag::PInf => "pinf",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Base,
    /// Cotangent fiber of the base.
    BaseDual,
    Fiber,
    Predual,
    Dual,
}

impl Role {
    /// Role of the space that pairs with this one.
    pub fn pairing_partner(self) -> Role {
        match self {
            Role::Base => Role::BaseDual,
            Role::BaseDual => Role::Base,
            Role::Fiber => Role::Dual,
            Role::Dual => Role::Fiber,
            Role::Predual => Role::Fiber,
        }
    }

    fn pairs_with(self, other: Role) -> bool {
        matches!(
            (self, other),
            (Role::Base, Role::BaseDual)
                | (Role::BaseDual, Role::Base)
                | (Role::Fiber, Role::Dual)
                | (Role::Dual, Role::Fiber)
                | (Role::Predual, Role::Fiber)
                | (Role::Fiber, Role::Predual)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpaceModel {
    pub dim: usize,
    pub norm: NormTag,
    pub role: Role,
}

impl SpaceModel {
    pub fn new(dim: usize, norm: NormTag, role: Role) -> Result<Self> {
        if dim == 0 {
            return Err(Error::dim("space dimension must be at least 1"));
        }
        Ok(SpaceModel { dim, norm, role })
    }

    pub fn dual_model(&self) -> SpaceModel {
        let role = self.role.pairing_partner();
        SpaceModel {
            dim: self.dim,
            norm: self.norm.dual(),
            role,
        }
    }

    pub fn with_dim(&self, dim: usize) -> Result<SpaceModel> {
        SpaceModel::new(dim, self.norm, self.role)
    }

    pub fn zeros(&self) -> SpaceVec {
        SpaceVec {
            coords: vec![0.0; self.dim],
            space: *self,
        }
    }
}

/// A coordinate vector tied to the space it lives in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceVec {
    pub coords: Vec<f64>,
    pub space: SpaceModel,
}

impl SpaceVec {
    pub fn new(coords: Vec<f64>, space: SpaceModel) -> Result<Self> {
        if coords.len() != space.dim {
            return Err(Error::dim(format!(
                "vector has {} coordinates, space has dim {}",
                coords.len(),
                space.dim
            )));
        }
        Ok(SpaceVec { coords, space })
    }

    pub fn basis(space: SpaceModel, k: usize) -> Result<Self> {
        if k >= space.dim {
            return Err(Error::dim(format!(
                "basis index {k} out of range for dim {}",
                space.dim
            )));
        }
        let mut coords = vec![0.0; space.dim];
        coords[k] = 1.0;
        Ok(SpaceVec { coords, space })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn norm(&self, tag: NormTag) -> f64 {
        norm(&self.coords, tag)
    }
}

/// Duality pairing between a vector and a covector.
pub fn pair(x: &SpaceVec, mu: &SpaceVec) -> Result<f64> {
    if x.dim() != mu.dim() {
        return Err(Error::dim(format!(
            "pairing dims {} and {}",
            x.dim(),
            mu.dim()
        )));
    }
    if !x.space.role.pairs_with(mu.space.role) {
        return Err(Error::Role(format!(
            "{:?} does not pair with {:?}",
            x.space.role, mu.space.role
        )));
    }
    Ok(dot(&x.coords, &mu.coords))
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(x: &[f64], tag: NormTag) -> f64 {
    match tag {
        NormTag::P1 => x.iter().map(|v| v.abs()).sum(),
        NormTag::P2 => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
        NormTag::PInf => x.iter().fold(0.0, |acc: f64, v| acc.max(v.abs())),
    }
}

/// Keep the first `n` coordinates, padding with exact zeros when growing.
pub fn truncate(x: &SpaceVec, n: usize) -> Result<SpaceVec> {
    if n == 0 {
        return Err(Error::dim("truncation dimension must be at least 1"));
    }
    let space = x.space.with_dim(n)?;
    Ok(SpaceVec {
        coords: truncate_coords(&x.coords, n),
        space,
    })
}

pub fn truncate_coords(x: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    let keep = n.min(x.len());
    out[..keep].copy_from_slice(&x[..keep]);
    out
}

/// Doubling dimension ladder `lo, 2 lo, 4 lo, ...` up to and including `hi`.
pub fn doubling_dims(lo: usize, hi: usize) -> Vec<usize> {
    let mut dims = Vec::new();
    let mut n = lo.max(1);
    while n <= hi {
        dims.push(n);
        n *= 2;
    }
    dims
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Bounded,
    Growing,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipVerdict {
    pub norms_by_dim: Vec<(usize, f64)>,
    pub verdict: Verdict,
    pub bound_estimate: Option<f64>,
}

/// Thresholds for the bounded/growing decision.
///
/// Increments are normalized by `ln(N_{i+1}/N_i)`, so a harmonic-type tail
/// has constant normalized increments regardless of the dimension ladder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MembershipRule {
    /// Bounded requires `inc_last / inc_first` below this.
    pub bounded_ratio: f64,
    /// Growing when `inc_last / inc_first` is at least this.
    pub growing_ratio: f64,
    /// Increments below `zero_tol * max(1, norm)` count as zero.
    pub zero_tol: f64,
}

impl Default for MembershipRule {
    fn default() -> Self {
        MembershipRule {
            bounded_ratio: 0.1,
            growing_ratio: 0.5,
            zero_tol: 1e-14,
        }
    }
}

/// Decide whether the family `N -> family(N)` stays bounded in the target
/// norm as `N` grows along `dims`.
pub fn membership_diagnostic<F>(
    family: F,
    target: NormTag,
    dims: &[usize],
    rule: &MembershipRule,
) -> Result<MembershipVerdict>
where
    F: Fn(usize) -> Result<Vec<f64>>,
{
    if dims.len() < 3 {
        return Err(Error::Precondition(
            "membership diagnostic needs at least 3 dims".into(),
        ));
    }
    if dims[0] == 0 || dims.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition(
            "dims must be positive and strictly increasing".into(),
        ));
    }
    let mut norms_by_dim = Vec::with_capacity(dims.len());
    for &n in dims {
        let v = family(n)?;
        if v.len() != n {
            return Err(Error::dim(format!(
                "family returned dim {} for N = {n}",
                v.len()
            )));
        }
        norms_by_dim.push((n, norm(&v, target)));
    }
    let (verdict, bound_estimate) = classify(&norms_by_dim, rule);
    Ok(MembershipVerdict {
        norms_by_dim,
        verdict,
        bound_estimate,
    })
}

fn classify(table: &[(usize, f64)], rule: &MembershipRule) -> (Verdict, Option<f64>) {
    let last = table[table.len() - 1].1;
    if !table.iter().all(|(_, v)| v.is_finite()) {
        return (Verdict::Growing, None);
    }
    let zero = rule.zero_tol * last.abs().max(1.0);
    let raw: Vec<f64> = table.windows(2).map(|w| w[1].1 - w[0].1).collect();
    if raw.iter().all(|d| d.abs() <= zero) {
        return (Verdict::Bounded, Some(last));
    }
    let normalized: Vec<f64> = table
        .windows(2)
        .zip(&raw)
        .map(|(w, d)| d / (w[1].0 as f64 / w[0].0 as f64).ln())
        .collect();
    let first = normalized[0];
    let tail = normalized[normalized.len() - 1];
    if first <= zero {
        // Flat start followed by movement: no decay to speak of.
        return if tail > zero {
            (Verdict::Growing, None)
        } else {
            (Verdict::Inconclusive, None)
        };
    }
    let ratio = tail / first;
    if ratio >= rule.growing_ratio {
        return (Verdict::Growing, None);
    }
    if ratio < rule.bounded_ratio {
        // Geometric extrapolation of the remaining tail from the last two increments.
        let d_last = raw[raw.len() - 1];
        let d_prev = raw[raw.len() - 2];
        if d_last.abs() <= zero {
            return (Verdict::Bounded, Some(last));
        }
        let q = d_last / d_prev;
        if d_prev > 0.0 && q > 0.0 && q < 1.0 {
            return (Verdict::Bounded, Some(last + d_last * q / (1.0 - q)));
        }
    }
    (Verdict::Inconclusive, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fiber(n: usize) -> SpaceModel {
        SpaceModel::new(n, NormTag::PInf, Role::Fiber).unwrap()
    }

    fn v(c: &[f64], s: SpaceModel) -> SpaceVec {
        SpaceVec::new(c.to_vec(), s).unwrap()
    }

    #[test]
    fn pairing_examples() {
        let e = fiber(3);
        let d = e.dual_model();
        assert_eq!(
            pair(&v(&[1., 0., 0.], e), &v(&[0., 1., 0.], d)).unwrap(),
            0.0
        );
        assert_eq!(
            pair(
                &SpaceVec::basis(e, 0).unwrap(),
                &SpaceVec::basis(d, 0).unwrap()
            )
            .unwrap(),
            1.0
        );
        assert_eq!(
            pair(&v(&[1., 2., 3.], e), &v(&[1., 1., 1.], d)).unwrap(),
            6.0
        );
        // transposed order
        assert_eq!(
            pair(&v(&[1., 1., 1.], d), &v(&[1., 2., 3.], e)).unwrap(),
            6.0
        );
    }

    #[test]
    fn predual_pairs_with_fiber() {
        let e = fiber(2);
        let p = SpaceModel::new(2, NormTag::P1, Role::Predual).unwrap();
        assert_eq!(pair(&v(&[2., 3.], p), &v(&[1., -1.], e)).unwrap(), -1.0);
    }

    #[test]
    fn pairing_errors() {
        let e = fiber(3);
        let e2 = fiber(2);
        assert!(matches!(
            pair(&v(&[1., 0., 0.], e), &v(&[1., 0.], e2.dual_model())),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            pair(&v(&[1., 0., 0.], e), &v(&[1., 0., 0.], e)),
            Err(Error::Role(_))
        ));
    }

    #[test]
    fn norm_examples() {
        assert_eq!(norm(&[3., 4.], NormTag::P2), 5.0);
        assert_eq!(norm(&[1., -1., 1.], NormTag::P1), 3.0);
        assert_eq!(norm(&[1., -2., 0.5], NormTag::PInf), 2.0);
        assert_eq!(norm(&[0., 0.], NormTag::PInf), 0.0);
    }

    #[test]
    fn truncate_examples() {
        let s = fiber(3);
        assert_eq!(
            truncate(&v(&[1., 2., 3.], s), 2).unwrap().coords,
            vec![1., 2.]
        );
        assert_eq!(
            truncate(&v(&[1., 2.], fiber(2)), 4).unwrap().coords,
            vec![1., 2., 0., 0.]
        );
        let x = v(&[1., 0.5, 0.25, 0.125], fiber(4));
        assert_eq!(truncate(&x, 3).unwrap().coords, vec![1., 0.5, 0.25]);
        assert!(matches!(truncate(&x, 0), Err(Error::Dimension(_))));
    }

    #[test]
    fn zero_dim_space_rejected() {
        assert!(SpaceModel::new(0, NormTag::P1, Role::Base).is_err());
        assert!(SpaceVec::new(vec![1.0], fiber(2)).is_err());
    }

    #[test]
    fn space_model_json_shape() {
        let s = SpaceModel::new(4, NormTag::PInf, Role::Predual).unwrap();
        let j = serde_json::to_value(s).unwrap();
        assert_eq!(
            j,
            serde_json::json!({"dim": 4, "norm": "pinf", "role": "predual"})
        );
    }

    fn harmonic(n: usize) -> Result<Vec<f64>> {
        Ok((1..=n).map(|k| 1.0 / k as f64).collect())
    }

    fn inverse_squares(n: usize) -> Result<Vec<f64>> {
        Ok((1..=n).map(|k| 1.0 / (k * k) as f64).collect())
    }

    #[test]
    fn harmonic_family_grows() {
        let dims = doubling_dims(8, 1024);
        let r = membership_diagnostic(harmonic, NormTag::P1, &dims, &MembershipRule::default())
            .unwrap();
        assert_eq!(r.verdict, Verdict::Growing);
        // Partial sums track ln N + gamma; oracle by direct summation.
        for &(n, s) in &r.norms_by_dim {
            let direct: f64 = (1..=n).map(|k| 1.0 / k as f64).sum();
            assert!((s - direct).abs() < 1e-12);
            assert!((s - (n as f64).ln() - 0.5772156649).abs() < 1.0 / n as f64);
        }
    }

    #[test]
    fn inverse_square_family_bounded_near_basel() {
        let dims = doubling_dims(8, 1024);
        let r = membership_diagnostic(
            inverse_squares,
            NormTag::P1,
            &dims,
            &MembershipRule::default(),
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::Bounded);
        let pi2_6 = std::f64::consts::PI.powi(2) / 6.0;
        assert!((r.bound_estimate.unwrap() - pi2_6).abs() < 1e-2);
    }

    #[test]
    fn zero_family_bounded_by_zero() {
        let dims = doubling_dims(8, 1024);
        let r = membership_diagnostic(
            |n| Ok(vec![0.0; n]),
            NormTag::P1,
            &dims,
            &MembershipRule::default(),
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::Bounded);
        assert_eq!(r.bound_estimate, Some(0.0));
    }

    #[test]
    fn wrong_family_dimension_is_an_error() {
        let dims = [4, 8, 16];
        let r = membership_diagnostic(
            |n| Ok(vec![1.0; n + 1]),
            NormTag::P1,
            &dims,
            &MembershipRule::default(),
        );
        assert!(matches!(r, Err(Error::Dimension(_))));
        let short = [4, 8];
        assert!(
            membership_diagnostic(harmonic, NormTag::P1, &short, &MembershipRule::default())
                .is_err()
        );
    }

    #[test]
    fn norms_nondecreasing_for_prefix_families() {
        let dims = doubling_dims(4, 512);
        for tag in [NormTag::P1, NormTag::P2] {
            let r =
                membership_diagnostic(harmonic, tag, &dims, &MembershipRule::default()).unwrap();
            assert!(r
                .norms_by_dim
                .windows(2)
                .all(|w| w[1].1 >= w[0].1 && w[1].0 > w[0].0));
        }
    }
}
