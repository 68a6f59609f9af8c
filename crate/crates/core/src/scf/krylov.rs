//! Matrix-free conjugate gradients under a user-supplied inner product.

use crate::error::{LabError, Result};
use crate::fields::ScalarField;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgReport {
    pub iterations: usize,
    /// `‖A x − b‖_{L²} / ‖b‖_{L²}` of the returned iterate.
    pub relative_residual: f64,
}

/// Solves `A x = b` for `A` self-adjoint and positive definite with respect to
/// `inner`. Stops on the plain `L²` relative residual.
pub fn conjugate_gradient<A, I>(
    apply: A,
    inner: I,
    rhs: &ScalarField,
    tol: f64,
    max_iter: usize,
) -> Result<(ScalarField, CgReport)>
where
    A: Fn(&ScalarField) -> ScalarField,
    I: Fn(&ScalarField, &ScalarField) -> f64,
{
    let b_norm = rhs.l2();
    let mut x = ScalarField::zeros(*rhs.grid());
    if b_norm == 0.0 {
        return Ok((
            x,
            CgReport {
                iterations: 0,
                relative_residual: 0.0,
            },
        ));
    }
    let mut r = rhs.clone();
    let mut p = r.clone();
    let mut rr = inner(&r, &r);
    for it in 1..=max_iter {
        let ap = apply(&p);
        let pap = inner(&p, &ap);
        if !(pap > 0.0) {
            return Err(LabError::KrylovStagnation {
                iterations: it,
                residual: r.l2() / b_norm,
            });
        }
        let alpha = rr / pap;
        x = x.add_scaled(alpha, &p);
        r = r.add_scaled(-alpha, &ap);
        let rel = r.l2() / b_norm;
        if rel <= tol {
            return Ok((
                x,
                CgReport {
                    iterations: it,
                    relative_residual: rel,
                },
            ));
        }
        let rr_new = inner(&r, &r);
        p = r.add_scaled(rr_new / rr, &p);
        rr = rr_new;
    }
    Err(LabError::KrylovStagnation {
        iterations: max_iter,
        residual: r.l2() / b_norm,
    })
}
