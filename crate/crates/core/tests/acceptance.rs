//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines always print; exits nonzero if any criterion fails.

use std::process::Command;
use std::time::Instant;

use algebroid_poisson::algebroid::AlgebroidModel;
use algebroid_poisson::dynamics::{self, Method};
use algebroid_poisson::funcalg::{fd_jet, BundlePoint, Section, SmoothFn};
use algebroid_poisson::poisson::{
    self, predual_condition_diagnostic, ConditionConfig, CotangentAtom, TangentAtom,
};
use algebroid_poisson::presets::{self, Family, Weights};
use algebroid_poisson::reconstruct::{roundtrip_check, RoundtripConfig};
use algebroid_poisson::sampling;
use algebroid_poisson::spaces::{self, Verdict};
use algebroid_poisson::suite::second_order_perturbation;

type Outcome = Result<String, String>;

fn builtins() -> Vec<AlgebroidModel> {
    vec![
        presets::so3(),
        presets::sl2(),
        presets::precotangent(16),
        presets::seqtriple(32, Weights::Harmonic),
    ]
}

fn within(what: &str, value: f64, tol: f64) -> Outcome {
    if value <= tol {
        Ok(format!("{what} {value:.2e} <= {tol:.0e}"))
    } else {
        Err(format!("{what} {value:.3e} exceeds {tol:.0e}"))
    }
}

fn all(parts: Vec<Outcome>) -> Outcome {
    let mut ok = Vec::new();
    for p in parts {
        ok.push(p?);
    }
    Ok(ok.join("; "))
}

fn e<T: std::fmt::Display>(x: T) -> String {
    x.to_string()
}

fn structural_relations() -> Outcome {
    let mut out = Vec::new();
    for model in builtins() {
        let (nb, nf) = (model.base_dim(), model.fiber_dim());
        let mut rng = sampling::rng(101);
        let mut worst = [0.0f64; 3];
        for _ in 0..200 {
            let x = sampling::poly_section(&mut rng, nb, nf, 2);
            let y = sampling::poly_section(&mut rng, nb, nf, 2);
            let f = sampling::base_poly(&mut rng, nb, 3);
            let g = sampling::base_tree(&mut rng, nb, 3);
            let pt = sampling::point(&mut rng, nb, nf);
            let r = poisson::structural_relations_check(&model, &x, &y, &f, &g, &pt).map_err(e)?;
            for i in 0..3 {
                worst[i] = worst[i].max(r[i]);
            }
        }
        out.push(within(
            &model.name,
            worst.iter().copied().fold(0.0, f64::max),
            1e-9,
        ));
    }
    all(out)
}

fn jacobi() -> Outcome {
    let mut out = Vec::new();
    for model in builtins() {
        let (nb, nf) = (model.base_dim(), model.fiber_dim());
        let mut rng = sampling::rng(202);
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let pt = sampling::point(&mut rng, nb, nf);
            let f = sampling::mixed_fn(&mut rng, nb, nf);
            let g = sampling::mixed_fn(&mut rng, nb, nf);
            let h = sampling::mixed_fn(&mut rng, nb, nf);
            worst = worst.max(poisson::jacobi_check_functions(&model, &f, &g, &h, &pt).map_err(e)?);
        }
        out.push(within(&format!("{} mixed", model.name), worst, 1e-7));
    }
    for model in [presets::so3(), presets::sl2()] {
        let mut rng = sampling::rng(203);
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let pt = sampling::point(&mut rng, 1, 3);
            let l =
                |rng: &mut sampling::Rng64| SmoothFn::lambda(sampling::poly_section(rng, 1, 3, 2));
            let (f, g, h) = (l(&mut rng), l(&mut rng), l(&mut rng));
            worst = worst.max(poisson::jacobi_check_functions(&model, &f, &g, &h, &pt).map_err(e)?);
        }
        out.push(within(&format!("{} lambdas", model.name), worst, 1e-12));
    }
    all(out)
}

fn sharp_consistency() -> Outcome {
    let mut out = Vec::new();
    for model in builtins() {
        let (nb, nf) = (model.base_dim(), model.fiber_dim());
        let mut rng = sampling::rng(303);
        let mut worst: f64 = 0.0;
        for _ in 0..500 {
            let pt = sampling::point(&mut rng, nb, nf);
            let f = sampling::mixed_fn(&mut rng, nb, nf);
            let g = sampling::mixed_fn(&mut rng, nb, nf);
            let b = poisson::poisson_bracket(&model, &f, &g, &pt).map_err(e)?;
            let df = CotangentAtom::from_jet(&pt, &f.jet(&pt).map_err(e)?);
            let sg = poisson::sharp(
                &model,
                &CotangentAtom::from_jet(&pt, &g.jet(&pt).map_err(e)?),
            )
            .map_err(e)?;
            worst = worst.max((b - poisson::pair_on_cotangent(&df, &sg)).abs());
        }
        out.push(within(&model.name, worst, 1e-12));
    }
    all(out)
}

fn predual_conditions() -> Outcome {
    let cfg = ConditionConfig {
        dims: spaces::doubling_dims(8, 4096),
        ..Default::default()
    };
    let seq =
        predual_condition_diagnostic(&Family::SeqTriple(Weights::Harmonic), &cfg).map_err(e)?;
    let pre = predual_condition_diagnostic(&Family::Precotangent, &cfg).map_err(e)?;
    let unit = predual_condition_diagnostic(&Family::SeqTriple(Weights::Unit), &cfg).map_err(e)?;
    if !(seq.anchor_dual_verdict.verdict == Verdict::Bounded
        && seq.ad_star_verdict.verdict == Verdict::Bounded
        && seq.is_poisson_manifold)
    {
        return Err(format!(
            "harmonic sequence model: {:?}/{:?}",
            seq.anchor_dual_verdict.verdict, seq.ad_star_verdict.verdict
        ));
    }
    if pre.anchor_dual_verdict.verdict != Verdict::Growing || pre.is_poisson_manifold {
        return Err(format!(
            "precotangent anchor-dual verdict {:?}",
            pre.anchor_dual_verdict.verdict
        ));
    }
    if unit.is_poisson_manifold || unit.anchor_dual_verdict.verdict != Verdict::Growing {
        return Err(format!(
            "unit weights anchor-dual verdict {:?}",
            unit.anchor_dual_verdict.verdict
        ));
    }
    let cs = (std::f64::consts::PI.powi(2) / 6.0).sqrt();
    let mut worst_ratio: f64 = 0.0;
    for d in &seq.draws {
        let bound = d
            .anchor_dual
            .bound_estimate
            .ok_or("bounded draw without estimate")?;
        worst_ratio = worst_ratio.max(bound / (d.mu_norm * cs));
    }
    within(
        "harmonic: TRUE, precotangent: FALSE, unit: FALSE; max bound/(|mu|_2 sqrt(pi^2/6))",
        worst_ratio,
        1.0 + 1e-6,
    )
}

fn coincidence() -> Outcome {
    let model = presets::precotangent(16);
    let mut rng = sampling::rng(505);
    let mut worst: f64 = 0.0;
    let mut warned = 0;
    for _ in 0..200 {
        let pt = sampling::point(&mut rng, 16, 16);
        let f = sampling::flat_class_fn(&mut rng, 16);
        let g = sampling::flat_class_fn(&mut rng, 16);
        let w = poisson::omega_bracket(&model, &f, &g, &pt).map_err(e)?;
        warned += w.warning as usize;
        worst =
            worst.max((w.value - poisson::poisson_bracket(&model, &f, &g, &pt).map_err(e)?).abs());
    }
    let mut flat_sharp_exact = true;
    for _ in 0..1000 {
        let pt = sampling::point(&mut rng, 16, 16);
        let t = TangentAtom {
            base_pt: pt,
            v: sampling::uniform_vec(&mut rng, 16, -5.0, 5.0),
            psi: sampling::uniform_vec(&mut rng, 16, -5.0, 5.0),
        };
        flat_sharp_exact &= poisson::sharp_omega(&poisson::flat(&t)) == t;
    }
    if !flat_sharp_exact {
        return Err("sharp_omega(flat(t)) != t".into());
    }
    within(&format!("flat/sharp exact on 1000 atoms; membership warnings on {warned}/200 pairs; coincidence"), worst, 1e-10)
}

fn round_trip() -> Outcome {
    let mut out = Vec::new();
    for model in builtins() {
        let checks = roundtrip_check(
            &model,
            &RoundtripConfig {
                seed: 606,
                samples: 8,
            },
        )
        .map_err(e)?;
        let worst = checks
            .iter()
            .filter(|c| c.tol == 1e-9)
            .map(|c| c.residual)
            .fold(0.0, f64::max);
        let pert = checks
            .iter()
            .find(|c| c.name == "roundtrip_anchor_derivative_invariance")
            .ok_or("missing check")?;
        out.push(within(&model.name, worst, 1e-9));
        out.push(within(
            &format!("{} derivative perturbation", model.name),
            pert.residual,
            1e-10,
        ));
    }
    all(out)
}

fn no_queer() -> Outcome {
    let model = presets::seqtriple(32, Weights::Harmonic);
    let mut rng = sampling::rng(707);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let m = sampling::uniform_vec(&mut rng, 32, -1.0, 1.0);
        let x = sampling::poly_section(&mut rng, 32, 32, 2);
        let y = sampling::poly_section(&mut rng, 32, 32, 2);
        let xp = second_order_perturbation(&x, &m, 3.0).map_err(e)?;
        worst = worst.max(
            model
                .first_jet_dependence_check(&x, &xp, &y, &m)
                .map_err(e)?,
        );
    }
    // X + eps (m_1 - m0_1) e_1 changes DX at m0; [Y, X] with Y = m_1 e_1 moves by eps a(Y)^1
    let m = vec![0.2; 32];
    let x = sampling::poly_section(&mut rng, 32, 32, 2);
    let mut ycomps = vec![SmoothFn::constant(0.0); 32];
    ycomps[0] = SmoothFn::m(0);
    let y = Section::new(ycomps).map_err(e)?;
    let base = model.bracket_sections(&y, &x, &m).map_err(e)?;
    let response = |eps: f64| -> Result<f64, String> {
        let mut comps = x.comps.clone();
        comps[0] = comps[0].clone()
            + SmoothFn::constant(eps) * (SmoothFn::m(0) - SmoothFn::constant(m[0]));
        let xe = Section::new(comps).map_err(e)?;
        let b = model.bracket_sections(&y, &xe, &m).map_err(e)?;
        Ok(b.iter()
            .zip(&base)
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max))
    };
    let (r1, r2) = (response(1e-3)?, response(2e-3)?);
    let linear = r1 > 1e-6 && (r2 / r1 - 2.0).abs() < 1e-6;
    if !linear {
        return Err(format!(
            "first-order control did not respond linearly: {r1:.3e}, {r2:.3e}"
        ));
    }
    within(
        &format!("first-order control responds linearly ({r1:.2e} -> {r2:.2e}); second-order"),
        worst,
        1e-10,
    )
}

fn rigid_body() -> Outcome {
    let so3 = presets::so3();
    let h = dynamics::rigid_body_hamiltonian(&[1.0, 2.0, 3.0]);
    let cas = dynamics::fiber_norm_squared(3);
    let pt = BundlePoint::new(vec![0.0], vec![1.0, -0.5, 0.8]);
    let run = dynamics::flow(&so3, &h, &pt, 1e-3, 10_000, Method::Rk4).map_err(e)?;
    let eh = dynamics::conserved_drift(&run, &h).map_err(e)?;
    let ec = dynamics::conserved_drift(&run, &cas).map_err(e)?;
    let coarse = dynamics::flow(&so3, &h, &pt, 0.05, 200, Method::Rk4).map_err(e)?;
    let fine = dynamics::flow(&so3, &h, &pt, 0.025, 400, Method::Rk4).map_err(e)?;
    let ratio = dynamics::conserved_drift(&coarse, &h).map_err(e)?
        / dynamics::conserved_drift(&fine, &h).map_err(e)?;
    let mut rng = sampling::rng(808);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let p = sampling::point(&mut rng, 1, 3);
        let f = sampling::mixed_fn(&mut rng, 1, 3);
        worst = worst.max(
            poisson::poisson_bracket(&so3, &cas, &f, &p)
                .map_err(e)?
                .abs(),
        );
    }
    let ratio_ok = if (10.0..=22.0).contains(&ratio) {
        Ok(format!("halving ratio (0.05 -> 0.025) {ratio:.2}"))
    } else {
        Err(format!("halving ratio {ratio:.2} outside [10, 22]"))
    };
    all(vec![
        within("energy drift", eh, 1e-8),
        within("Casimir drift", ec, 1e-8),
        ratio_ok,
        within("Casimir bracket", worst, 1e-12),
    ])
}

fn jet_engine() -> Outcome {
    let mut rng = sampling::rng(909);
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let f = sampling::bundle_tree(&mut rng, 3, 3, 6);
        let pt = sampling::point(&mut rng, 3, 3);
        let exact = f.jet(&pt).map_err(e)?;
        let fd = fd_jet(&f, &pt, 1e-3).map_err(e)?;
        worst = worst.max(exact.max_abs_diff(&fd) / exact.max_abs().max(1.0));
    }
    let mut exact_parts = true;
    for _ in 0..200 {
        let pt = sampling::point(&mut rng, 4, 5);
        let pb = SmoothFn::pullback(sampling::base_tree(&mut rng, 4, 5)).map_err(e)?;
        exact_parts &= pb.jet(&pt).map_err(e)?.d_phi.iter().all(|&d| d == 0.0);
        let x = sampling::poly_section(&mut rng, 4, 5, 3);
        exact_parts &= SmoothFn::lambda(x.clone()).jet(&pt).map_err(e)?.d_phi == x.value(&pt.m);
    }
    if !exact_parts {
        return Err("pullback d_phi or lambda d_phi not exact".into());
    }
    within(
        "pullback/lambda fiber parts exact; max relative jet error",
        worst,
        1e-5,
    )
}

fn strip_timestamp(s: &str) -> String {
    s.lines()
        .filter(|l| !l.trim_start().starts_with("\"timestamp\""))
        .collect::<Vec<_>>()
        .join("\n")
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_algebroid-poisson");
    let runs: [&[&str]; 4] = [
        &["verify", "so3", "--seed", "7", "--draws", "10"],
        &[
            "conditions",
            "seqtriple",
            "--dims",
            "8..256",
            "--draws",
            "4",
            "--seed",
            "7",
        ],
        &["roundtrip", "sl2", "--seed", "7"],
        &[
            "flow",
            "so3",
            "--steps",
            "200",
            "--conserved",
            "casimir",
            "--summary",
            "/dev/stdout",
            "--out",
            "/dev/null",
        ],
    ];
    for args in runs {
        let go = || -> Result<String, String> {
            let o = Command::new(bin).args(args).output().map_err(e)?;
            Ok(strip_timestamp(&String::from_utf8_lossy(&o.stdout)))
        };
        let (a, b) = (go()?, go()?);
        if a.is_empty() || a != b {
            return Err(format!("`{}` differs between runs", args.join(" ")));
        }
    }
    Ok("verify, conditions, roundtrip and flow reports identical modulo timestamp".into())
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("structural relations", structural_relations),
        ("Jacobi identity", jacobi),
        ("sharp consistency", sharp_consistency),
        ("predual conditions", predual_conditions),
        ("symplectic coincidence", coincidence),
        ("round trip", round_trip),
        ("first-jet dependence", no_queer),
        ("rigid-body dynamics", rigid_body),
        ("jet engine", jet_engine),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = run();
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("criterion {:>2} {name}: PASS ({msg}) [{secs:.1}s]", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL ({msg}) [{secs:.1}s]", i + 1)
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
