//! Seeded random test data: points, polynomial sections, expression trees.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::funcalg::{BundlePoint, Section, SmoothFn};

pub type Rng64 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_vec(rng: &mut Rng64, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

/// `u_k / k^decay` for `k = 1..=n`, with `|u_k|` in `[0.5, 1]` and a random sign.
pub fn decaying_vec(rng: &mut Rng64, n: usize, decay: f64) -> Vec<f64> {
    (1..=n)
        .map(|k| {
            let u: f64 = rng.random_range(0.5..=1.0);
            let s = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            s * u / (k as f64).powf(decay)
        })
        .collect()
}

pub fn point(rng: &mut Rng64, base_dim: usize, fiber_dim: usize) -> BundlePoint {
    BundlePoint::new(
        uniform_vec(rng, base_dim, -1.0, 1.0),
        uniform_vec(rng, fiber_dim, -1.0, 1.0),
    )
}

/// Polynomial in the base coordinates of total degree at most `degree`,
/// built from a few random monomials.
pub fn base_poly(rng: &mut Rng64, base_dim: usize, degree: usize) -> SmoothFn {
    let terms = rng.random_range(1..=3);
    let mut out = Vec::with_capacity(terms + 1);
    out.push(SmoothFn::constant(rng.random_range(-1.0..1.0)));
    for _ in 0..terms {
        let deg = rng.random_range(1..=degree.max(1));
        let mut factors = vec![SmoothFn::constant(rng.random_range(-1.0..1.0))];
        factors.extend((0..deg).map(|_| SmoothFn::m(rng.random_range(0..base_dim))));
        out.push(SmoothFn::Product(factors));
    }
    SmoothFn::Sum(out)
}

pub fn poly_section(rng: &mut Rng64, base_dim: usize, fiber_dim: usize, degree: usize) -> Section {
    Section::new(
        (0..fiber_dim)
            .map(|_| base_poly(rng, base_dim, degree))
            .collect(),
    )
    .expect("base-only components")
}

/// Section with `nnz` nonzero polynomial components at random positions.
pub fn sparse_section(rng: &mut Rng64, base_dim: usize, fiber_dim: usize, nnz: usize) -> Section {
    let mut comps = vec![SmoothFn::constant(0.0); fiber_dim];
    for _ in 0..nnz.min(fiber_dim) {
        comps[rng.random_range(0..fiber_dim)] = base_poly(rng, base_dim, 2);
    }
    Section::new(comps).expect("base-only components")
}

/// Mixed function on the bundle whose size does not grow with the dimension:
/// a pullback, a sparse `lambda_X`, a quadratic fiber term and `sin(lambda_Y)`.
pub fn mixed_fn(rng: &mut Rng64, base_dim: usize, fiber_dim: usize) -> SmoothFn {
    let (i, j) = (
        rng.random_range(0..fiber_dim),
        rng.random_range(0..fiber_dim),
    );
    let c = rng.random_range(-1.0..1.0);
    SmoothFn::Sum(vec![
        SmoothFn::pullback(base_tree(rng, base_dim, 2)).expect("base-only"),
        SmoothFn::lambda(sparse_section(rng, base_dim, fiber_dim, 3)),
        SmoothFn::constant(c) * SmoothFn::phi(i) * SmoothFn::phi(j),
        SmoothFn::lambda(sparse_section(rng, base_dim, fiber_dim, 2)).sin(),
    ])
}

/// Random base-only expression tree of depth at most `depth`.
pub fn base_tree(rng: &mut Rng64, base_dim: usize, depth: usize) -> SmoothFn {
    tree(rng, base_dim, 0, depth)
}

/// Random expression tree on the bundle of depth at most `depth`, mixing
/// fiber coordinates, pullbacks and `lambda_X` nodes.
pub fn bundle_tree(rng: &mut Rng64, base_dim: usize, fiber_dim: usize, depth: usize) -> SmoothFn {
    tree(rng, base_dim, fiber_dim, depth)
}

fn leaf(rng: &mut Rng64, base_dim: usize, fiber_dim: usize) -> SmoothFn {
    let choice = if fiber_dim == 0 {
        rng.random_range(0..2)
    } else {
        rng.random_range(0..5)
    };
    match choice {
        0 => SmoothFn::constant(rng.random_range(-1.5..1.5)),
        1 => SmoothFn::m(rng.random_range(0..base_dim)),
        2 => SmoothFn::phi(rng.random_range(0..fiber_dim)),
        3 => SmoothFn::lambda(poly_section(rng, base_dim, fiber_dim, 2)),
        _ => SmoothFn::pullback(base_poly(rng, base_dim, 2)).expect("base-only"),
    }
}

fn tree(rng: &mut Rng64, base_dim: usize, fiber_dim: usize, depth: usize) -> SmoothFn {
    if depth == 0 || rng.random_bool(0.25) {
        return leaf(rng, base_dim, fiber_dim);
    }
    let kinds = ["sum", "product", "sin", "cos", "exp", "poly"];
    match *kinds.choose(rng).expect("nonempty") {
        "sum" | "product" => {
            let n = rng.random_range(2..=3);
            let args: Vec<SmoothFn> = (0..n)
                .map(|_| tree(rng, base_dim, fiber_dim, depth - 1))
                .collect();
            if rng.random_bool(0.5) {
                SmoothFn::Sum(args)
            } else {
                SmoothFn::Product(args)
            }
        }
        "sin" => tree(rng, base_dim, fiber_dim, depth - 1).sin(),
        "cos" => tree(rng, base_dim, fiber_dim, depth - 1).cos(),
        // keep exponentials tame so finite-difference oracles stay accurate
        "exp" => (SmoothFn::constant(0.3) * tree(rng, base_dim, fiber_dim, depth - 1).sin()).exp(),
        _ => {
            let len = rng.random_range(2..=4);
            let coeffs = uniform_vec(rng, len, -1.0, 1.0);
            tree(rng, base_dim, fiber_dim, depth - 1).sin().poly(coeffs)
        }
    }
}

/// `f o pi + lambda_X` whose base derivative decays like `1/k^4` in every
/// coordinate past the first, independently of `phi`.
pub fn flat_class_fn(rng: &mut Rng64, n: usize) -> SmoothFn {
    let coeffs = decaying_vec(rng, n, 4.0);
    let base = SmoothFn::Sum(
        coeffs
            .iter()
            .enumerate()
            .map(|(k, &c)| SmoothFn::constant(c) * SmoothFn::m(k).sin())
            .collect(),
    );
    let comps = decaying_vec(rng, n, 0.0)
        .into_iter()
        .zip(decaying_vec(rng, n, 1.0))
        .map(|(b, d)| SmoothFn::constant(b) + SmoothFn::constant(d) * SmoothFn::m(0))
        .collect();
    SmoothFn::pullback(base).expect("base-only")
        + SmoothFn::lambda(Section::new(comps).expect("base-only"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_draws_repeat() {
        let a = base_tree(&mut rng(5), 3, 6);
        let b = base_tree(&mut rng(5), 3, 6);
        assert_eq!(a, b);
        assert!(a.is_base_only());
    }

    #[test]
    fn decaying_vec_bounds() {
        let v = decaying_vec(&mut rng(1), 100, 2.0);
        for (i, x) in v.iter().enumerate() {
            let k = (i + 1) as f64;
            assert!(x.abs() <= 1.0 / (k * k) + 1e-15 && x.abs() >= 0.5 / (k * k) - 1e-15);
        }
    }

    #[test]
    fn bundle_trees_respect_dims() {
        let mut r = rng(9);
        for _ in 0..50 {
            bundle_tree(&mut r, 2, 3, 6).check_dims(2, 3).unwrap();
        }
    }
}
