use proptest::prelude::*;

use algebroid_poisson::funcalg::{fd_jet, SmoothFn};
use algebroid_poisson::poisson;
use algebroid_poisson::presets::{self, Weights};
use algebroid_poisson::sampling;
use algebroid_poisson::spaces::{self, NormTag, Role, SpaceModel, SpaceVec};

fn vecs(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, n)
}

proptest! {
    #[test]
    fn pairing_is_bilinear(
        (x, y, mu) in (1usize..20).prop_flat_map(|n| (vecs(n), vecs(n), vecs(n))),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
    ) {
        let n = x.len();
        let e = SpaceModel::new(n, NormTag::PInf, Role::Fiber).unwrap();
        let p = e.dual_model();
        let combo: Vec<f64> = x.iter().zip(&y).map(|(u, v)| a * u + b * v).collect();
        let lhs = spaces::pair(&SpaceVec::new(combo, e).unwrap(), &SpaceVec::new(mu.clone(), p).unwrap()).unwrap();
        let rhs = a * spaces::dot(&x, &mu) + b * spaces::dot(&y, &mu);
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
    }

    #[test]
    fn holder_inequality((x, mu) in (1usize..30).prop_flat_map(|n| (vecs(n), vecs(n)))) {
        let d = spaces::dot(&x, &mu).abs();
        let slack = 1.0 + 1e-12;
        prop_assert!(d <= spaces::norm(&x, NormTag::P1) * spaces::norm(&mu, NormTag::PInf) * slack + 1e-12);
        prop_assert!(d <= spaces::norm(&x, NormTag::P2) * spaces::norm(&mu, NormTag::P2) * slack + 1e-12);
    }

    #[test]
    fn truncation_is_idempotent_and_monotone(x in vecs(25), k in 1usize..25) {
        let t = spaces::truncate_coords(&x, k);
        prop_assert_eq!(spaces::truncate_coords(&t, k), t.clone());
        for tag in [NormTag::P1, NormTag::P2] {
            prop_assert!(spaces::norm(&t, tag) <= spaces::norm(&x, tag));
        }
    }

    #[test]
    fn bracket_antisymmetric_and_leibniz(seed in any::<u64>(), which in 0usize..4) {
        let model = match which {
            0 => presets::so3(),
            1 => presets::sl2(),
            2 => presets::precotangent(5),
            _ => presets::seqtriple(7, Weights::Harmonic),
        };
        let (nb, nf) = (model.base_dim(), model.fiber_dim());
        let mut rng = sampling::rng(seed);
        let pt = sampling::point(&mut rng, nb, nf);
        let f = sampling::mixed_fn(&mut rng, nb, nf);
        let g = sampling::mixed_fn(&mut rng, nb, nf);
        let h = sampling::mixed_fn(&mut rng, nb, nf);
        let fg = poisson::poisson_bracket(&model, &f, &g, &pt).unwrap();
        prop_assert_eq!(fg, -poisson::poisson_bracket(&model, &g, &f, &pt).unwrap());
        let l = poisson::leibniz_check_functions(&model, &f, &g, &h, &pt).unwrap();
        prop_assert!(l <= 1e-10 * (1.0 + fg.abs()));
    }

    #[test]
    fn jets_agree_with_finite_differences(seed in any::<u64>()) {
        let mut rng = sampling::rng(seed);
        let f = sampling::bundle_tree(&mut rng, 2, 3, 6);
        let pt = sampling::point(&mut rng, 2, 3);
        let exact = f.jet(&pt).unwrap();
        let fd = fd_jet(&f, &pt, 1e-3).unwrap();
        prop_assert!(exact.max_abs_diff(&fd) <= 1e-5 * exact.max_abs().max(1.0));
    }

    #[test]
    fn pullbacks_have_zero_fiber_derivative(seed in any::<u64>()) {
        let mut rng = sampling::rng(seed);
        let f = SmoothFn::pullback(sampling::base_tree(&mut rng, 3, 5)).unwrap();
        let pt = sampling::point(&mut rng, 3, 2);
        prop_assert!(f.jet(&pt).unwrap().d_phi.iter().all(|&d| d == 0.0));
    }
}
