//! Smooth functions on the trivialized predual bundle `U x E_*` and their
//! exact first jets.
//!
//! Two families matter most: pullbacks `f o pi_*` of base functions, which
//! are fiber-wise constant, and `lambda_X(m, phi) = <phi, X(m)>`, which are
//! fiber-wise linear. Jets are computed by forward-mode arithmetic over the
//! expression tree; [`fd_jet`] is a finite-difference oracle kept independent
//! of that path.

mod dual;
mod expr;
mod json;

pub use dual::{dot, lift, seed, Dual, Scalar};
pub use expr::{
    fd_jet, BundlePoint, FiberDegree, FnJet, Jet1, Primitive, Section, SectionJet, SmoothFn,
};

pub fn lambda_of_section(x: Section) -> SmoothFn {
    SmoothFn::lambda(x)
}

pub fn pullback(f_base: SmoothFn) -> crate::Result<SmoothFn> {
    SmoothFn::pullback(f_base)
}
