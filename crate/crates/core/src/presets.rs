//! Built-in models and truncation families.
//!
//! * `so3`, `sl2`: Lie algebras over a point. The point base is encoded as a
//!   1-dimensional base with a zero anchor and constant structure field.
//! * `precotangent:N`: `E = TM` over `M = linf^N` with identity anchor and
//!   `C = 0`; the predual fiber is `l1^N`.
//! * `seqtriple:N`: `l2^N x linf^N -> l2^N` with diagonal anchor
//!   `(A x)^k = w_k x^k` and `C = 0`; predual fiber `l1^N`.

use std::str::FromStr;

use crate::algebroid::{AlgebroidModel, AnchorField, StructureField};
use crate::error::{Error, Result};
use crate::spaces::{NormTag, Role, SpaceModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weights {
    /// `w_k = 1/k`
    Harmonic,
    /// `w_k = 1`
    Unit,
}

impl Weights {
    pub fn weight(self, k: usize) -> f64 {
        match self {
            Weights::Harmonic => 1.0 / k as f64,
            Weights::Unit => 1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Weights::Harmonic => "harmonic",
            Weights::Unit => "unit",
        }
    }
}

fn space(dim: usize, norm: NormTag, role: Role) -> SpaceModel {
    SpaceModel::new(dim, norm, role).expect("preset dimensions are positive")
}

/// Lie–Poisson model over a point from structure constants
/// `c[(i n + j) n + k] = [e_i, e_j]_k`.
pub fn make_lie_poisson(name: &str, dim: usize, constants: Vec<f64>) -> Result<AlgebroidModel> {
    let structure = StructureField::dense(dim, constants)?;
    AlgebroidModel::new(
        name,
        space(1, NormTag::P2, Role::Base),
        space(dim, NormTag::P2, Role::Fiber),
        space(dim, NormTag::P2, Role::Predual),
        AnchorField::Zero { rows: 1, cols: dim },
        structure,
    )
}

fn constants_from(dim: usize, brackets: &[(usize, usize, usize, f64)]) -> Vec<f64> {
    let mut c = vec![0.0; dim * dim * dim];
    for &(i, j, k, v) in brackets {
        c[(i * dim + j) * dim + k] = v;
        c[(j * dim + i) * dim + k] = -v;
    }
    c
}

/// so(3) with `[e1, e2] = e3` and cyclic permutations.
pub fn so3() -> AlgebroidModel {
    let c = constants_from(3, &[(0, 1, 2, 1.0), (1, 2, 0, 1.0), (2, 0, 1, 1.0)]);
    make_lie_poisson("so3", 3, c).expect("so3 constants are skew")
}

/// sl(2) in the basis `(h, e, f)`: `[h,e] = 2e`, `[h,f] = -2f`, `[e,f] = h`.
pub fn sl2() -> AlgebroidModel {
    let c = constants_from(3, &[(0, 1, 1, 2.0), (0, 2, 2, -2.0), (1, 2, 0, 1.0)]);
    make_lie_poisson("sl2", 3, c).expect("sl2 constants are skew")
}

pub fn make_precotangent(n: usize) -> Result<AlgebroidModel> {
    if n == 0 {
        return Err(Error::dim("precotangent dimension must be at least 1"));
    }
    AlgebroidModel::new(
        format!("precotangent:{n}"),
        space(n, NormTag::PInf, Role::Base),
        space(n, NormTag::PInf, Role::Fiber),
        space(n, NormTag::P1, Role::Predual),
        AnchorField::Diagonal(vec![1.0; n]),
        StructureField::Zero(n),
    )
}

pub fn precotangent(n: usize) -> AlgebroidModel {
    make_precotangent(n).expect("n >= 1")
}

pub fn make_sequence_triple(n: usize, weights: Weights) -> Result<AlgebroidModel> {
    if n == 0 {
        return Err(Error::dim("sequence model dimension must be at least 1"));
    }
    let name = match weights {
        Weights::Harmonic => format!("seqtriple:{n}"),
        w => format!("seqtriple:{n}:weights={}", w.as_str()),
    };
    AlgebroidModel::new(
        name,
        space(n, NormTag::P2, Role::Base),
        space(n, NormTag::PInf, Role::Fiber),
        space(n, NormTag::P1, Role::Predual),
        AnchorField::Diagonal((1..=n).map(|k| weights.weight(k)).collect()),
        StructureField::Zero(n),
    )
}

pub fn seqtriple(n: usize, weights: Weights) -> AlgebroidModel {
    make_sequence_triple(n, weights).expect("n >= 1")
}

/// Decay exponents used when drawing test data for a truncation family:
/// coordinate `k` (1-based) is drawn as `u_k / k^decay` with `|u_k|` in
/// `[0.5, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct DrawProfile {
    /// Covector on the base, `mu in M*`.
    pub mu_decay: f64,
    /// Fiber vector `x in E`.
    pub x_decay: f64,
    /// Predual fiber point `phi in E_*`.
    pub phi_decay: f64,
}

/// Models at increasing truncation sharing the same coordinate formulas.
pub trait ModelFamily {
    fn name(&self) -> String;
    fn model(&self, n: usize) -> Result<AlgebroidModel>;
    fn profile(&self) -> DrawProfile;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    SeqTriple(Weights),
    Precotangent,
}

impl ModelFamily for Family {
    fn name(&self) -> String {
        match self {
            Family::SeqTriple(Weights::Harmonic) => "seqtriple".into(),
            Family::SeqTriple(w) => format!("seqtriple:weights={}", w.as_str()),
            Family::Precotangent => "precotangent".into(),
        }
    }

    fn model(&self, n: usize) -> Result<AlgebroidModel> {
        match self {
            Family::SeqTriple(w) => make_sequence_triple(n, *w),
            Family::Precotangent => make_precotangent(n),
        }
    }

    fn profile(&self) -> DrawProfile {
        match self {
            // mu in l2 (but not l1), x in linf, phi in l1
            Family::SeqTriple(_) => DrawProfile {
                mu_decay: 1.0,
                x_decay: 0.0,
                phi_decay: 2.0,
            },
            // mu is linf-style dual data on linf, x in linf, phi in l1
            Family::Precotangent => DrawProfile {
                mu_decay: 0.0,
                x_decay: 0.0,
                phi_decay: 2.0,
            },
        }
    }
}

/// A preset resolved from its CLI name.
#[derive(Debug, Clone, PartialEq)]
pub enum Preset {
    So3,
    Sl2,
    Precotangent(usize),
    SeqTriple(usize, Weights),
}

impl Preset {
    pub fn build(&self) -> Result<AlgebroidModel> {
        match self {
            Preset::So3 => Ok(so3()),
            Preset::Sl2 => Ok(sl2()),
            Preset::Precotangent(n) => make_precotangent(*n),
            Preset::SeqTriple(n, w) => make_sequence_triple(*n, *w),
        }
    }

    pub fn family(&self) -> Option<Family> {
        match self {
            Preset::Precotangent(_) => Some(Family::Precotangent),
            Preset::SeqTriple(_, w) => Some(Family::SeqTriple(*w)),
            _ => None,
        }
    }
}

fn parse_weights(s: &str) -> Result<Weights> {
    match s {
        "weights=harmonic" => Ok(Weights::Harmonic),
        "weights=unit" => Ok(Weights::Unit),
        other => Err(Error::Parse(format!("unknown weights option \"{other}\""))),
    }
}

impl FromStr for Preset {
    type Err = Error;

    /// `so3`, `sl2`, `precotangent[:N]`, `seqtriple[:N][:weights=harmonic|unit]`.
    /// A missing `N` defaults to 16 for precotangent and 32 for seqtriple.
    fn from_str(s: &str) -> Result<Preset> {
        let mut parts = s.split(':');
        let head = parts.next().unwrap_or_default();
        let rest: Vec<&str> = parts.collect();
        let dim = |p: &str| -> Result<usize> {
            p.parse::<usize>()
                .ok()
                .filter(|&n| n >= 1)
                .ok_or_else(|| Error::Parse(format!("bad dimension \"{p}\" in \"{s}\"")))
        };
        match head {
            "so3" | "sl2" if rest.is_empty() => Ok(if head == "so3" {
                Preset::So3
            } else {
                Preset::Sl2
            }),
            "precotangent" => match rest.as_slice() {
                [] => Ok(Preset::Precotangent(16)),
                [n] => Ok(Preset::Precotangent(dim(n)?)),
                _ => Err(Error::Parse(format!("unknown preset \"{s}\""))),
            },
            "seqtriple" => {
                let mut n = 32;
                let mut w = Weights::Harmonic;
                for p in rest {
                    if p.starts_with("weights=") {
                        w = parse_weights(p)?;
                    } else {
                        n = dim(p)?;
                    }
                }
                Ok(Preset::SeqTriple(n, w))
            }
            _ => Err(Error::Parse(format!("unknown preset \"{s}\""))),
        }
    }
}

/// Check that truncating the `n2` member to `n1` reproduces the `n1` member.
pub fn family_is_coherent(family: &dyn ModelFamily, n1: usize, n2: usize) -> Result<bool> {
    let small = family.model(n1)?;
    let big = family.model(n2)?.truncate(n1)?;
    let m = vec![0.0; small.base_dim()];
    let same_anchor = small.anchor.matrix(&m) == big.anchor.matrix(&m);
    let same_structure =
        small.structure == big.structure || (small.structure.is_zero() && big.structure.is_zero());
    Ok(same_anchor
        && same_structure
        && small.base == big.base
        && small.fiber == big.fiber
        && small.predual == big.predual)
}
