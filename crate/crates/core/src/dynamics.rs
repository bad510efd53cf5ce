//! Hamiltonian vector fields `X_H = sharp(dH)` and explicit flow integration.
//!
//! The state `(m, phi)` evolves by `m' = v`, `phi' = psi` where
//! `(v, psi) = sharp(dH)`, so that `f' = {f, H}` along the flow.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::algebroid::AlgebroidModel;
use crate::error::{Error, Result};
use crate::funcalg::{BundlePoint, SmoothFn};
use crate::poisson::{sharp, CotangentAtom, TangentAtom};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Rk4,
    Midpoint,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Method> {
        match s {
            "rk4" => Ok(Method::Rk4),
            "midpoint" => Ok(Method::Midpoint),
            other => Err(Error::Parse(format!("unknown integrator \"{other}\""))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub points: Vec<BundlePoint>,
    pub hamiltonian: SmoothFn,
    pub method: Method,
    pub step: f64,
}

pub fn hamiltonian_field(
    model: &AlgebroidModel,
    h: &SmoothFn,
    pt: &BundlePoint,
) -> Result<TangentAtom> {
    pt.check(model.base_dim(), model.fiber_dim())?;
    h.check_dims(model.base_dim(), model.fiber_dim())?;
    sharp(model, &CotangentAtom::from_jet(pt, &h.jet(pt)?))
}

fn rhs(model: &AlgebroidModel, h: &SmoothFn, state: &[f64], nb: usize) -> Vec<f64> {
    let pt = BundlePoint::new(state[..nb].to_vec(), state[nb..].to_vec());
    let jet = h.jet_generic(&pt.m, &pt.phi);
    let t = sharp(model, &CotangentAtom::from_jet(&pt, &jet))
        .expect("dimensions checked before integration");
    let mut out = t.v;
    out.extend(t.psi);
    out
}

fn axpy(y: &[f64], a: f64, x: &[f64]) -> Vec<f64> {
    y.iter().zip(x).map(|(y, x)| y + a * x).collect()
}

pub fn flow(
    model: &AlgebroidModel,
    h: &SmoothFn,
    pt0: &BundlePoint,
    step: f64,
    n_steps: usize,
    method: Method,
) -> Result<Trajectory> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Precondition(format!(
            "step must be positive, got {step}"
        )));
    }
    pt0.check(model.base_dim(), model.fiber_dim())?;
    h.check_dims(model.base_dim(), model.fiber_dim())?;
    let nb = model.base_dim();
    let mut state: Vec<f64> = pt0.m.iter().chain(&pt0.phi).copied().collect();
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut points = Vec::with_capacity(n_steps + 1);
    times.push(0.0);
    points.push(pt0.clone());
    let f = |s: &[f64]| rhs(model, h, s, nb);
    for i in 1..=n_steps {
        state = match method {
            Method::Rk4 => {
                let k1 = f(&state);
                let k2 = f(&axpy(&state, step / 2.0, &k1));
                let k3 = f(&axpy(&state, step / 2.0, &k2));
                let k4 = f(&axpy(&state, step, &k3));
                state
                    .iter()
                    .enumerate()
                    .map(|(j, s)| s + step / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]))
                    .collect()
            }
            Method::Midpoint => {
                let k1 = f(&state);
                axpy(&state, step, &f(&axpy(&state, step / 2.0, &k1)))
            }
        };
        if !state.iter().all(|x| x.is_finite()) {
            return Err(Error::Blowup { step: i });
        }
        times.push(i as f64 * step);
        points.push(BundlePoint::new(state[..nb].to_vec(), state[nb..].to_vec()));
    }
    Ok(Trajectory {
        times,
        points,
        hamiltonian: h.clone(),
        method,
        step,
    })
}

/// `max_t |F(pt_t) - F(pt_0)|`
pub fn conserved_drift(traj: &Trajectory, f: &SmoothFn) -> Result<f64> {
    let f0 = f.eval(&traj.points[0])?;
    traj.points
        .iter()
        .try_fold(0.0f64, |acc, p| Ok(acc.max((f.eval(p)? - f0).abs())))
}

/// `H = 1/2 sum_k phi_k^2 / I_k`
pub fn rigid_body_hamiltonian(inertia: &[f64]) -> SmoothFn {
    SmoothFn::Sum(
        inertia
            .iter()
            .enumerate()
            .map(|(k, i)| SmoothFn::constant(0.5 / i) * SmoothFn::phi(k) * SmoothFn::phi(k))
            .collect(),
    )
}

/// `sum_k phi_k^2`
pub fn fiber_norm_squared(fiber_dim: usize) -> SmoothFn {
    SmoothFn::Sum(
        (0..fiber_dim)
            .map(|k| SmoothFn::phi(k) * SmoothFn::phi(k))
            .collect(),
    )
}

/// CSV with columns `t, m0.., phi0.., H, <conserved>..`.
pub fn write_csv<W: Write>(
    traj: &Trajectory,
    conserved: &[(String, SmoothFn)],
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let p0 = &traj.points[0];
    let mut header = vec!["t".to_string()];
    header.extend((0..p0.m.len()).map(|k| format!("m{k}")));
    header.extend((0..p0.phi.len()).map(|k| format!("phi{k}")));
    header.push("H".into());
    header.extend(conserved.iter().map(|(name, _)| name.clone()));
    w.write_record(&header).map_err(csv_err)?;
    for (t, p) in traj.times.iter().zip(&traj.points) {
        let mut row = vec![format!("{t:.6}")];
        row.extend(p.m.iter().chain(&p.phi).map(|x| format!("{x:.17e}")));
        row.push(format!("{:.17e}", traj.hamiltonian.eval(p)?));
        for (_, f) in conserved {
            row.push(format!("{:.17e}", f.eval(p)?));
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Validation(format!("csv: {other:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcalg::Section;
    use crate::poisson::{pair_on_cotangent, poisson_bracket};
    use crate::presets::{self, Weights};

    fn cross(a: &[f64], b: &[f64]) -> [f64; 3] {
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    }

    #[test]
    fn rigid_body_field_is_euler() {
        let so3 = presets::so3();
        let inertia = [1.0, 2.0, 3.0];
        let h = rigid_body_hamiltonian(&inertia);
        let phi = vec![0.3, -1.2, 0.7];
        let t = hamiltonian_field(&so3, &h, &BundlePoint::new(vec![0.0], phi.clone())).unwrap();
        let omega: Vec<f64> = phi.iter().zip(&inertia).map(|(p, i)| p / i).collect();
        let euler = cross(&omega, &phi);
        for (p, e) in t.psi.iter().zip(&euler) {
            assert!((p - e).abs() < 1e-15);
        }
        assert_eq!(t.v, vec![0.0]);
    }

    #[test]
    fn pullback_hamiltonian_moves_only_fibers() {
        let model = presets::seqtriple(3, Weights::Harmonic);
        let h = SmoothFn::pullback(SmoothFn::m(0) * SmoothFn::m(1) + SmoothFn::m(2)).unwrap();
        let pt = BundlePoint::new(vec![1.0, 2.0, 3.0], vec![0.5; 3]);
        let t = hamiltonian_field(&model, &h, &pt).unwrap();
        assert!(t.v.iter().all(|&v| v == 0.0));
        // a^*(dh) with dh = (2, 1, 1)
        assert_eq!(t.psi, vec![2.0, 0.5, 1.0 / 3.0]);
    }

    #[test]
    fn field_reproduces_brackets() {
        let model = presets::seqtriple(2, Weights::Harmonic);
        let h = SmoothFn::lambda(Section::new(vec![SmoothFn::m(1), SmoothFn::m(0).sin()]).unwrap())
            + SmoothFn::pullback(SmoothFn::m(0) * SmoothFn::m(0)).unwrap();
        let f = SmoothFn::phi(0) * SmoothFn::m(1) + SmoothFn::phi(1).exp();
        let pt = BundlePoint::new(vec![0.4, -0.3], vec![1.0, 0.2]);
        let t = hamiltonian_field(&model, &h, &pt).unwrap();
        let df = CotangentAtom::from_jet(&pt, &f.jet(&pt).unwrap());
        let lhs = pair_on_cotangent(&df, &t);
        assert!((lhs - poisson_bracket(&model, &f, &h, &pt).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn constant_hamiltonian_is_stationary() {
        let so3 = presets::so3();
        let pt = BundlePoint::new(vec![0.0], vec![1.0, 2.0, 3.0]);
        let tr = flow(&so3, &SmoothFn::constant(4.0), &pt, 0.1, 20, Method::Rk4).unwrap();
        assert!(tr.points.iter().all(|p| *p == pt));
        assert_eq!(conserved_drift(&tr, &SmoothFn::constant(1.0)).unwrap(), 0.0);
    }

    #[test]
    fn commuting_lambda_is_conserved() {
        // I1 = I2 makes the third component of phi a first integral
        let so3 = presets::so3();
        let h = rigid_body_hamiltonian(&[1.0, 1.0, 3.0]);
        let pt = BundlePoint::new(vec![0.0], vec![0.4, 0.9, -0.5]);
        let tr = flow(&so3, &h, &pt, 1e-2, 500, Method::Midpoint).unwrap();
        let l3 = SmoothFn::lambda(Section::basis(2, 3));
        assert!(conserved_drift(&tr, &l3).unwrap() < 1e-12);
    }

    #[test]
    fn blowup_reports_step() {
        let model = presets::seqtriple(1, Weights::Unit);
        // phi' = a^*(dh) = exp(m) with m' = 0 is fine; use a cubic fiber term to explode m
        let h = SmoothFn::lambda(
            Section::new(vec![SmoothFn::m(0) * SmoothFn::m(0) * SmoothFn::m(0)]).unwrap(),
        );
        let pt = BundlePoint::new(vec![10.0], vec![1.0]);
        match flow(&model, &h, &pt, 0.5, 100, Method::Rk4) {
            Err(Error::Blowup { step }) => assert!((1..=100).contains(&step)),
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn csv_layout() {
        let so3 = presets::so3();
        let pt = BundlePoint::new(vec![0.0], vec![1.0, 0.0, 0.0]);
        let tr = flow(
            &so3,
            &rigid_body_hamiltonian(&[1.0, 2.0, 3.0]),
            &pt,
            0.1,
            2,
            Method::Rk4,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_csv(&tr, &[("casimir".into(), fiber_norm_squared(3))], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,m0,phi0,phi1,phi2,H,casimir");
        assert_eq!(lines.len(), 4);
    }
}
