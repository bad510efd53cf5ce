//! Local data of a Lie algebroid on a trivial bundle `U x E -> U`: the anchor
//! `m -> a_m : E -> M` and the skew structure field `m -> C_m : E x E -> E`.
//!
//! In a single global chart the bracket of sections reads
//!
//! ```text
//! [X, Y](m) = DY(m)[a_m X(m)] - DX(m)[a_m Y(m)] + C_m(X(m), Y(m))
//! ```
//!
//! and only first jets of `X` and `Y` at `m` enter it.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::funcalg::{lift, seed, Dual, Scalar, Section, SectionJet, SmoothFn};
use crate::spaces::{NormTag, Role, SpaceModel};

/// Anchor `a_m`, a `base_dim x fiber_dim` matrix depending smoothly on `m`.
#[derive(Debug, Clone, PartialEq)]
pub enum AnchorField {
    Zero {
        rows: usize,
        cols: usize,
    },
    /// Square diagonal matrix, constant in `m`.
    Diagonal(Vec<f64>),
    /// Constant row-major matrix.
    Dense {
        rows: usize,
        cols: usize,
        entries: Vec<f64>,
    },
    /// Row-major matrix of base functions.
    Field {
        rows: usize,
        cols: usize,
        entries: Vec<SmoothFn>,
    },
}

impl AnchorField {
    pub fn shape(&self) -> (usize, usize) {
        match self {
            AnchorField::Zero { rows, cols }
            | AnchorField::Dense { rows, cols, .. }
            | AnchorField::Field { rows, cols, .. } => (*rows, *cols),
            AnchorField::Diagonal(d) => (d.len(), d.len()),
        }
    }

    pub fn is_constant(&self) -> bool {
        !matches!(self, AnchorField::Field { .. })
    }

    fn validate(&self) -> Result<()> {
        match self {
            AnchorField::Dense {
                rows,
                cols,
                entries,
            } if entries.len() != rows * cols => Err(Error::Validation(
                "anchor matrix has wrong number of entries".into(),
            )),
            AnchorField::Field {
                rows,
                cols,
                entries,
            } => {
                if entries.len() != rows * cols {
                    return Err(Error::Validation(
                        "anchor field has wrong number of entries".into(),
                    ));
                }
                for e in entries {
                    if !e.is_base_only() {
                        return Err(Error::Validation(
                            "anchor entries must be base functions".into(),
                        ));
                    }
                    e.check_dims(*rows, 0)?;
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// `a_m(x)`
    pub fn apply<T: Scalar>(&self, m: &[T], x: &[T]) -> Vec<T> {
        match self {
            AnchorField::Zero { rows, .. } => vec![T::cst(0.0); *rows],
            AnchorField::Diagonal(d) => d.iter().zip(x).map(|(w, xi)| xi.scale(*w)).collect(),
            AnchorField::Dense {
                rows,
                cols,
                entries,
            } => (0..*rows)
                .map(|r| {
                    (0..*cols).fold(T::cst(0.0), |acc, c| {
                        acc + x[c].scale(entries[r * cols + c])
                    })
                })
                .collect(),
            AnchorField::Field {
                rows,
                cols,
                entries,
            } => (0..*rows)
                .map(|r| {
                    (0..*cols).fold(T::cst(0.0), |acc, c| {
                        acc + entries[r * cols + c].eval_generic(m, &[]) * x[c].clone()
                    })
                })
                .collect(),
        }
    }

    /// `a_m^*(mu)`
    pub fn transpose_apply<T: Scalar>(&self, m: &[T], mu: &[T]) -> Vec<T> {
        match self {
            AnchorField::Zero { cols, .. } => vec![T::cst(0.0); *cols],
            AnchorField::Diagonal(d) => d.iter().zip(mu).map(|(w, v)| v.scale(*w)).collect(),
            AnchorField::Dense {
                rows,
                cols,
                entries,
            } => (0..*cols)
                .map(|c| {
                    (0..*rows).fold(T::cst(0.0), |acc, r| {
                        acc + mu[r].scale(entries[r * cols + c])
                    })
                })
                .collect(),
            AnchorField::Field {
                rows,
                cols,
                entries,
            } => (0..*cols)
                .map(|c| {
                    (0..*rows).fold(T::cst(0.0), |acc, r| {
                        acc + entries[r * cols + c].eval_generic(m, &[]) * mu[r].clone()
                    })
                })
                .collect(),
        }
    }

    /// The matrix of `a_m`, row-major `rows x cols`.
    pub fn matrix(&self, m: &[f64]) -> Vec<Vec<f64>> {
        let (rows, cols) = self.shape();
        let mut out = vec![vec![0.0; cols]; rows];
        match self {
            AnchorField::Zero { .. } => {}
            AnchorField::Diagonal(d) => d.iter().enumerate().for_each(|(i, w)| out[i][i] = *w),
            AnchorField::Dense { entries, .. } => {
                for r in 0..rows {
                    out[r].copy_from_slice(&entries[r * cols..(r + 1) * cols]);
                }
            }
            AnchorField::Field { entries, .. } => {
                for r in 0..rows {
                    for c in 0..cols {
                        out[r][c] = entries[r * cols + c].eval_generic(m, &[]);
                    }
                }
            }
        }
        out
    }

    /// Directional derivative of the matrix `a_m` along `dir`.
    pub fn directional_derivative(&self, m: &[f64], dir: &[f64]) -> Vec<Vec<f64>> {
        let (rows, cols) = self.shape();
        let AnchorField::Field { entries, .. } = self else {
            return vec![vec![0.0; cols]; rows];
        };
        let md = seed(&lift::<f64>(m), 0, m.len());
        let mut out = vec![vec![0.0; cols]; rows];
        for r in 0..rows {
            for c in 0..cols {
                let d: Dual<f64> = entries[r * cols + c].eval_generic(&md, &[]);
                out[r][c] = crate::spaces::dot(&d.gradient(m.len()), dir);
            }
        }
        out
    }

    fn truncate(&self, base: usize, fiber: usize) -> Result<AnchorField> {
        Ok(match self {
            AnchorField::Zero { .. } => AnchorField::Zero {
                rows: base,
                cols: fiber,
            },
            AnchorField::Diagonal(d) if base == fiber && base <= d.len() => {
                AnchorField::Diagonal(d[..base].to_vec())
            }
            AnchorField::Dense { cols, entries, .. } => AnchorField::Dense {
                rows: base,
                cols: fiber,
                entries: (0..base)
                    .flat_map(|r| (0..fiber).map(move |c| (r, c)))
                    .map(|(r, c)| entries[r * cols + c])
                    .collect(),
            },
            _ => return Err(Error::Family("anchor cannot be truncated".into())),
        })
    }
}

/// Structure field `C_m`, stored as `c[(i n + j) n + k] = C_m(e_i, e_j)_k`.
#[derive(Debug, Clone, PartialEq)]
pub enum StructureField {
    Zero(usize),
    Dense {
        dim: usize,
        c: Vec<f64>,
        skew: bool,
    },
    Field {
        dim: usize,
        c: Vec<SmoothFn>,
        skew: bool,
    },
}

impl StructureField {
    /// Constant structure tensor; rejected unless exactly skew in `(i, j)`.
    pub fn dense(dim: usize, c: Vec<f64>) -> Result<Self> {
        if c.len() != dim * dim * dim {
            return Err(Error::Validation(
                "structure tensor has wrong number of entries".into(),
            ));
        }
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    let a = c[(i * dim + j) * dim + k];
                    let b = c[(j * dim + i) * dim + k];
                    if a != -b {
                        return Err(Error::Validation(format!(
                            "structure tensor not skew: C(e{i},e{j})_{k} = {a}, C(e{j},e{i})_{k} = {b}"
                        )));
                    }
                }
            }
        }
        Ok(StructureField::Dense { dim, c, skew: true })
    }

    /// Constant tensor accepted as-is; diagnostics only.
    pub fn dense_unchecked(dim: usize, c: Vec<f64>) -> Result<Self> {
        if c.len() != dim * dim * dim {
            return Err(Error::Validation(
                "structure tensor has wrong number of entries".into(),
            ));
        }
        Ok(StructureField::Dense {
            dim,
            c,
            skew: false,
        })
    }

    /// `m`-dependent tensor of base functions. Skewness is required
    /// structurally: entry `(j, i, k)` must be the negation of `(i, j, k)`,
    /// checked by evaluation at a few points.
    pub fn field(dim: usize, c: Vec<SmoothFn>, base_dim: usize) -> Result<Self> {
        if c.len() != dim * dim * dim {
            return Err(Error::Validation(
                "structure field has wrong number of entries".into(),
            ));
        }
        for e in &c {
            if !e.is_base_only() {
                return Err(Error::Validation(
                    "structure entries must be base functions".into(),
                ));
            }
            e.check_dims(base_dim, 0)?;
        }
        let probes = [0.0, 0.37, -0.81];
        for p in probes {
            let m: Vec<f64> = (0..base_dim).map(|i| p * (1.0 + 0.1 * i as f64)).collect();
            for i in 0..dim {
                for j in 0..dim {
                    for k in 0..dim {
                        let a = c[(i * dim + j) * dim + k].eval_generic(&m, &[]);
                        let b = c[(j * dim + i) * dim + k].eval_generic(&m, &[]);
                        if (a + b).abs() > 1e-12 * (1.0 + a.abs()) {
                            return Err(Error::Validation(format!(
                                "structure field not skew at C(e{i},e{j})_{k}"
                            )));
                        }
                    }
                }
            }
        }
        Ok(StructureField::Field { dim, c, skew: true })
    }

    pub fn dim(&self) -> usize {
        match self {
            StructureField::Zero(n) => *n,
            StructureField::Dense { dim, .. } | StructureField::Field { dim, .. } => *dim,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            StructureField::Zero(_) => true,
            StructureField::Dense { c, .. } => c.iter().all(|&v| v == 0.0),
            StructureField::Field { .. } => false,
        }
    }

    pub fn is_constant(&self) -> bool {
        !matches!(self, StructureField::Field { .. })
    }

    fn coefs<T: Scalar>(&self, m: &[T]) -> Option<Vec<T>> {
        match self {
            StructureField::Zero(_) => None,
            StructureField::Dense { c, .. } => Some(lift(c)),
            StructureField::Field { c, .. } => {
                Some(c.iter().map(|e| e.eval_generic(m, &[])).collect())
            }
        }
    }

    fn skew(&self) -> bool {
        match self {
            StructureField::Zero(_) => true,
            StructureField::Dense { skew, .. } | StructureField::Field { skew, .. } => *skew,
        }
    }

    /// `C_m(x, y)`. Skew fields sum over `i < j` of `(x_i y_j - x_j y_i) c_ijk`,
    /// which makes `C_m(y, x) = -C_m(x, y)` hold bit for bit.
    pub fn apply<T: Scalar>(&self, m: &[T], x: &[T], y: &[T]) -> Vec<T> {
        let n = self.dim();
        let mut out = vec![T::cst(0.0); n];
        let Some(c) = self.coefs(m) else { return out };
        let nonzero = |v: &T| v.re() != 0.0 || !matches!(self, StructureField::Dense { .. });
        if self.skew() {
            for i in 0..n {
                for j in (i + 1)..n {
                    let w = x[i].clone() * y[j].clone() - x[j].clone() * y[i].clone();
                    for (k, o) in out.iter_mut().enumerate() {
                        let cijk = &c[(i * n + j) * n + k];
                        if nonzero(cijk) {
                            *o = o.clone() + w.clone() * cijk.clone();
                        }
                    }
                }
            }
        } else {
            for i in 0..n {
                for j in 0..n {
                    let w = x[i].clone() * y[j].clone();
                    for (k, o) in out.iter_mut().enumerate() {
                        let cijk = &c[(i * n + j) * n + k];
                        if nonzero(cijk) {
                            *o = o.clone() + w.clone() * cijk.clone();
                        }
                    }
                }
            }
        }
        out
    }

    /// `(ad_x)^* phi`, i.e. `j -> <C_m(x, e_j), phi>`.
    pub fn ad_star<T: Scalar>(&self, m: &[T], x: &[T], phi: &[T]) -> Vec<T> {
        let n = self.dim();
        let mut out = vec![T::cst(0.0); n];
        let Some(c) = self.coefs(m) else { return out };
        for (j, o) in out.iter_mut().enumerate() {
            let mut acc = T::cst(0.0);
            for i in 0..n {
                for k in 0..n {
                    let cijk = &c[(i * n + j) * n + k];
                    if cijk.re() != 0.0 || !matches!(self, StructureField::Dense { .. }) {
                        acc = acc + x[i].clone() * cijk.clone() * phi[k].clone();
                    }
                }
            }
            *o = acc;
        }
        out
    }

    fn truncate(&self, n: usize) -> Result<StructureField> {
        Ok(match self {
            StructureField::Zero(_) => StructureField::Zero(n),
            StructureField::Dense { dim, c, skew } if n <= *dim => {
                let mut out = Vec::with_capacity(n * n * n);
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            out.push(c[(i * dim + j) * dim + k]);
                        }
                    }
                }
                StructureField::Dense {
                    dim: n,
                    c: out,
                    skew: *skew,
                }
            }
            _ => return Err(Error::Family("structure field cannot be truncated".into())),
        })
    }
}

/// Anchor and structure field on a trivial bundle, with its model spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebroidModel {
    pub name: String,
    pub base: SpaceModel,
    pub fiber: SpaceModel,
    pub predual: SpaceModel,
    pub anchor: AnchorField,
    pub structure: StructureField,
}

fn max_abs(v: &[f64]) -> f64 {
    crate::spaces::norm(v, NormTag::PInf)
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

impl AlgebroidModel {
    pub fn new(
        name: impl Into<String>,
        base: SpaceModel,
        fiber: SpaceModel,
        predual: SpaceModel,
        anchor: AnchorField,
        structure: StructureField,
    ) -> Result<Self> {
        if base.role != Role::Base || fiber.role != Role::Fiber || predual.role != Role::Predual {
            return Err(Error::Role(
                "model spaces must have roles base, fiber, predual".into(),
            ));
        }
        if fiber.dim != predual.dim {
            return Err(Error::dim("fiber and predual must share their dimension"));
        }
        if anchor.shape() != (base.dim, fiber.dim) {
            return Err(Error::dim(format!(
                "anchor shape {:?}, expected ({}, {})",
                anchor.shape(),
                base.dim,
                fiber.dim
            )));
        }
        if structure.dim() != fiber.dim {
            return Err(Error::dim("structure field dimension differs from fiber"));
        }
        anchor.validate()?;
        Ok(AlgebroidModel {
            name: name.into(),
            base,
            fiber,
            predual,
            anchor,
            structure,
        })
    }

    pub fn base_dim(&self) -> usize {
        self.base.dim
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber.dim
    }

    fn check_m(&self, m: &[f64]) -> Result<()> {
        if m.len() != self.base_dim() {
            return Err(Error::dim(format!(
                "base point has dim {}, model {}",
                m.len(),
                self.base_dim()
            )));
        }
        Ok(())
    }

    fn check_fiber(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.fiber_dim() {
            return Err(Error::dim(format!(
                "fiber vector has dim {}, model {}",
                x.len(),
                self.fiber_dim()
            )));
        }
        Ok(())
    }

    fn check_section(&self, x: &Section) -> Result<()> {
        x.check_dims(self.base_dim(), self.fiber_dim())
    }

    pub fn anchor_apply(&self, m: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        self.check_m(m)?;
        self.check_fiber(x)?;
        Ok(self.anchor.apply(m, x))
    }

    pub fn anchor_transpose(&self, m: &[f64], mu: &[f64]) -> Result<Vec<f64>> {
        self.check_m(m)?;
        if mu.len() != self.base_dim() {
            return Err(Error::dim("covector dimension differs from base"));
        }
        Ok(self.anchor.transpose_apply(m, mu))
    }

    pub fn structure_apply(&self, m: &[f64], x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        self.check_m(m)?;
        self.check_fiber(x)?;
        self.check_fiber(y)?;
        Ok(self.structure.apply(m, x, y))
    }

    /// Matrix of `ad_x = C_m(x, .)`, `out[k][j] = C_m(x, e_j)_k`.
    pub fn ad(&self, m: &[f64], x: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.check_m(m)?;
        self.check_fiber(x)?;
        let n = self.fiber_dim();
        let mut out = vec![vec![0.0; n]; n];
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            let col = self.structure.apply(m, x, &e);
            for k in 0..n {
                out[k][j] = col[k];
            }
        }
        Ok(out)
    }

    pub fn ad_star(&self, m: &[f64], x: &[f64], phi: &[f64]) -> Result<Vec<f64>> {
        self.check_m(m)?;
        self.check_fiber(x)?;
        self.check_fiber(phi)?;
        Ok(self.structure.ad_star(m, x, phi))
    }

    /// Bracket from first-jet data only.
    pub fn bracket_jets<T: Scalar>(&self, m: &[T], x: &SectionJet<T>, y: &SectionJet<T>) -> Vec<T> {
        let ax = self.anchor.apply(m, &x.value);
        let ay = self.anchor.apply(m, &y.value);
        let dy_ax = y.apply_deriv(&ax);
        let dx_ay = x.apply_deriv(&ay);
        let c = self.structure.apply(m, &x.value, &y.value);
        dy_ax
            .into_iter()
            .zip(dx_ay)
            .zip(c)
            .map(|((a, b), c)| (a - b) + c)
            .collect()
    }

    pub fn bracket_sections(&self, x: &Section, y: &Section, m: &[f64]) -> Result<Vec<f64>> {
        self.check_m(m)?;
        self.check_section(x)?;
        self.check_section(y)?;
        Ok(self.bracket_jets(m, &x.jet(m), &y.jet(m)))
    }

    /// Value and first derivative of `[X, Y]` at `m`.
    pub fn bracket_section_jet(
        &self,
        x: &Section,
        y: &Section,
        m: &[f64],
    ) -> Result<SectionJet<f64>> {
        self.check_m(m)?;
        self.check_section(x)?;
        self.check_section(y)?;
        let nb = m.len();
        let md: Vec<Dual<f64>> = seed(m, 0, nb);
        let b = self.bracket_jets(&md, &x.jet_generic(&md), &y.jet_generic(&md));
        let deriv = b.iter().map(|d| d.gradient(nb)).collect();
        let value = b.into_iter().map(|d| d.val).collect();
        Ok(SectionJet { value, deriv })
    }

    /// `(a(X) f)(m) = <df(m), a_m X(m)>`
    pub fn anchor_action(&self, x: &Section, f: &SmoothFn, m: &[f64]) -> Result<f64> {
        self.check_m(m)?;
        self.check_section(x)?;
        let df = f.base_gradient(m)?;
        Ok(crate::spaces::dot(&df, &self.anchor.apply(m, &x.value(m))))
    }

    /// Max-norm of `[X, fY] - (a(X)f) Y - f [X, Y]` at `m`.
    pub fn leibniz_check(&self, x: &Section, y: &Section, f: &SmoothFn, m: &[f64]) -> Result<f64> {
        let fy = y.scaled_by(f)?;
        let lhs = self.bracket_sections(x, &fy, m)?;
        let xy = self.bracket_sections(x, y, m)?;
        let af = self.anchor_action(x, f, m)?;
        let fm = f.eval_base(m)?;
        let yv = y.value(m);
        let rhs: Vec<f64> = yv.iter().zip(&xy).map(|(yi, b)| af * yi + fm * b).collect();
        Ok(max_abs(&sub(&lhs, &rhs)))
    }

    /// Max-norm of the cyclic sum `[[X,Y],Z] + [[Y,Z],X] + [[Z,X],Y]` at `m`.
    pub fn jacobi_check_sections(
        &self,
        x: &Section,
        y: &Section,
        z: &Section,
        m: &[f64],
    ) -> Result<f64> {
        let outer = |a: &Section, b: &Section, c: &Section| -> Result<Vec<f64>> {
            let ab = self.bracket_section_jet(a, b, m)?;
            Ok(self.bracket_jets(m, &ab, &c.jet(m)))
        };
        let t1 = outer(x, y, z)?;
        let t2 = outer(y, z, x)?;
        let t3 = outer(z, x, y)?;
        let sum: Vec<f64> = t1
            .iter()
            .zip(&t2)
            .zip(&t3)
            .map(|((a, b), c)| a + b + c)
            .collect();
        Ok(max_abs(&sum))
    }

    /// `|[X, Y](m) - [X', Y](m)|` for sections sharing their first jet at `m`.
    pub fn first_jet_dependence_check(
        &self,
        x: &Section,
        x_alt: &Section,
        y: &Section,
        m: &[f64],
    ) -> Result<f64> {
        self.check_m(m)?;
        self.check_section(x)?;
        self.check_section(x_alt)?;
        let (j1, j2) = (x.jet(m), x_alt.jet(m));
        let scale =
            1.0 + max_abs(&j1.value) + j1.deriv.iter().map(|r| max_abs(r)).fold(0.0, f64::max);
        let dv = max_abs(&sub(&j1.value, &j2.value));
        let dd = j1
            .deriv
            .iter()
            .zip(&j2.deriv)
            .map(|(a, b)| max_abs(&sub(a, b)))
            .fold(0.0, f64::max);
        if dv.max(dd) > 1e-12 * scale {
            return Err(Error::Precondition(format!(
                "sections differ in first jet at m (value {dv:.2e}, derivative {dd:.2e})"
            )));
        }
        let a = self.bracket_sections(x, y, m)?;
        let b = self.bracket_sections(x_alt, y, m)?;
        Ok(max_abs(&sub(&a, &b)))
    }

    /// `a([X,Y]) - [a(X), a(Y)]` at `m`, as vector fields on the base.
    pub fn anchor_morphism_residual(&self, x: &Section, y: &Section, m: &[f64]) -> Result<f64> {
        let xy = self.bracket_sections(x, y, m)?;
        let lhs = self.anchor.apply(m, &xy);
        let nb = m.len();
        let md: Vec<Dual<f64>> = seed(m, 0, nb);
        let field = |s: &Section| -> SectionJet<f64> {
            let sv: Vec<Dual<f64>> = s.comps.iter().map(|c| c.eval_generic(&md, &[])).collect();
            let v = self.anchor.apply(&md, &sv);
            SectionJet {
                value: v.iter().map(|d| d.val).collect(),
                deriv: v.iter().map(|d| d.gradient(nb)).collect(),
            }
        };
        let (v, w) = (field(x), field(y));
        let rhs: Vec<f64> = w
            .apply_deriv(&v.value)
            .iter()
            .zip(v.apply_deriv(&w.value))
            .map(|(a, b)| a - b)
            .collect();
        Ok(max_abs(&sub(&lhs, &rhs)))
    }

    /// Restrict a constant-coefficient model to its first `n` fiber (and,
    /// for square anchors, base) coordinates.
    pub fn truncate(&self, n: usize) -> Result<AlgebroidModel> {
        let base_n = if self.base_dim() == self.fiber_dim() {
            n
        } else {
            self.base_dim()
        };
        AlgebroidModel::new(
            self.name.clone(),
            self.base.with_dim(base_n)?,
            self.fiber.with_dim(n)?,
            self.predual.with_dim(n)?,
            self.anchor.truncate(base_n, n)?,
            self.structure.truncate(n)?,
        )
    }

    pub fn to_json(&self) -> Value {
        let anchor = match &self.anchor {
            AnchorField::Zero { .. } => json!("zero"),
            AnchorField::Diagonal(d) => json!({ "diagonal": d }),
            AnchorField::Dense {
                rows,
                cols,
                entries,
            } => {
                json!((0..*rows)
                    .map(|r| entries[r * cols..(r + 1) * cols].to_vec())
                    .collect::<Vec<_>>())
            }
            AnchorField::Field {
                rows,
                cols,
                entries,
            } => json!((0..*rows)
                .map(|r| entries[r * cols..(r + 1) * cols]
                    .iter()
                    .map(SmoothFn::to_json)
                    .collect::<Vec<_>>())
                .collect::<Vec<_>>()),
        };
        let n = self.structure.dim();
        let nest = |get: &dyn Fn(usize) -> Value| -> Value {
            Value::Array(
                (0..n)
                    .map(|i| {
                        Value::Array(
                            (0..n)
                                .map(|j| {
                                    Value::Array((0..n).map(|k| get((i * n + j) * n + k)).collect())
                                })
                                .collect(),
                        )
                    })
                    .collect(),
            )
        };
        let structure = match &self.structure {
            StructureField::Zero(_) => json!("zero"),
            StructureField::Dense { c, .. } => nest(&|i| json!(c[i])),
            StructureField::Field { c, .. } => nest(&|i| c[i].to_json()),
        };
        json!({
            "name": self.name,
            "base": self.base,
            "fiber": self.fiber,
            "predual": self.predual,
            "anchor": anchor,
            "structure": structure,
        })
    }

    /// Load a model; the structure tensor must be skew.
    pub fn from_json(v: &Value) -> Result<AlgebroidModel> {
        #[derive(serde::Deserialize)]
        struct Entry {
            dim: usize,
            norm: NormTag,
            role: Option<Role>,
        }
        let space = |key: &str, role: Role| -> Result<SpaceModel> {
            let s: Entry = serde_json::from_value(
                v.get(key)
                    .cloned()
                    .ok_or_else(|| Error::Parse(format!("model missing \"{key}\"")))?,
            )
            .map_err(|e| Error::Parse(format!("\"{key}\": {e}")))?;
            if s.role.is_some_and(|r| r != role) {
                return Err(Error::Role(format!(
                    "\"{key}\" declares role {:?}",
                    s.role.unwrap()
                )));
            }
            SpaceModel::new(s.dim, s.norm, role)
        };
        let (base, fiber, predual) = (
            space("base", Role::Base)?,
            space("fiber", Role::Fiber)?,
            space("predual", Role::Predual)?,
        );
        let name = v
            .get("name")
            .and_then(Value::as_str)
            .unwrap_or("custom")
            .to_string();
        let anchor = parse_anchor(v.get("anchor"), base.dim, fiber.dim)?;
        let structure = parse_structure(v.get("structure"), fiber.dim, base.dim)?;
        AlgebroidModel::new(name, base, fiber, predual, anchor, structure)
    }
}

fn parse_entry(v: &Value) -> Result<SmoothFn> {
    match v.as_f64() {
        Some(c) => Ok(SmoothFn::Const(c)),
        None => SmoothFn::from_json(v),
    }
}

fn parse_anchor(v: Option<&Value>, rows: usize, cols: usize) -> Result<AnchorField> {
    let v = v.ok_or_else(|| Error::Parse("model missing \"anchor\"".into()))?;
    if v.as_str() == Some("zero") {
        return Ok(AnchorField::Zero { rows, cols });
    }
    if let Some(d) = v.get("diagonal") {
        let d: Vec<f64> = serde_json::from_value(d.clone())
            .map_err(|e| Error::Parse(format!("anchor diagonal: {e}")))?;
        return Ok(AnchorField::Diagonal(d));
    }
    let rows_v = v.as_array().ok_or_else(|| {
        Error::Parse("anchor must be \"zero\", {\"diagonal\": [...]} or a matrix".into())
    })?;
    if rows_v.len() != rows {
        return Err(Error::Validation(format!(
            "anchor has {} rows, base dim is {rows}",
            rows_v.len()
        )));
    }
    let mut entries = Vec::with_capacity(rows * cols);
    for r in rows_v {
        let r = r
            .as_array()
            .ok_or_else(|| Error::Parse("anchor rows must be arrays".into()))?;
        if r.len() != cols {
            return Err(Error::Validation(format!(
                "anchor row has {} entries, fiber dim is {cols}",
                r.len()
            )));
        }
        for e in r {
            entries.push(parse_entry(e)?);
        }
    }
    if entries.iter().all(|e| matches!(e, SmoothFn::Const(_))) {
        let entries = entries
            .into_iter()
            .map(|e| match e {
                SmoothFn::Const(c) => c,
                _ => unreachable!(),
            })
            .collect();
        Ok(AnchorField::Dense {
            rows,
            cols,
            entries,
        })
    } else {
        Ok(AnchorField::Field {
            rows,
            cols,
            entries,
        })
    }
}

fn parse_structure(v: Option<&Value>, n: usize, base_dim: usize) -> Result<StructureField> {
    let v = v.ok_or_else(|| Error::Parse("model missing \"structure\"".into()))?;
    if v.as_str() == Some("zero") {
        return Ok(StructureField::Zero(n));
    }
    let shape_err = || Error::Validation(format!("structure must be a {n}x{n}x{n} array"));
    let outer = v.as_array().ok_or_else(shape_err)?;
    if outer.len() != n {
        return Err(shape_err());
    }
    let mut entries = Vec::with_capacity(n * n * n);
    for row in outer {
        let row = row
            .as_array()
            .filter(|r| r.len() == n)
            .ok_or_else(shape_err)?;
        for col in row {
            let col = col
                .as_array()
                .filter(|c| c.len() == n)
                .ok_or_else(shape_err)?;
            for e in col {
                entries.push(parse_entry(e)?);
            }
        }
    }
    if entries.iter().all(|e| matches!(e, SmoothFn::Const(_))) {
        let c = entries
            .into_iter()
            .map(|e| match e {
                SmoothFn::Const(c) => c,
                _ => unreachable!(),
            })
            .collect();
        StructureField::dense(n, c)
    } else {
        StructureField::field(n, entries, base_dim)
    }
}
