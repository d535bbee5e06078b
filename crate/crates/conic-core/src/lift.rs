//! Complex-to-real lifting of Hermitian quadratic forms.
//!
//! A Hermitian form `x ↦ xᴴAx + 2Re(bᴴx) + c` over `x ∈ Cⁿ` equals the real
//! quadratic form `u ↦ uᵀÃu + b̃ᵀu + c` over `u = [Re x; Im x] ∈ R²ⁿ`, with
//!
//! ```text
//! Ã = [Re A  -Im A]      b̃ = 2·[Re b]
//!     [Im A   Re A]          [Im b]
//! ```
//!
//! The lift preserves values exactly and the back-map recovers the complex
//! point, so objectives and constraints can be moved between the two
//! representations without approximation.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::quad::{Partition, QuadForm};
use crate::{ConicError, QcqpProblem};

/// A Hermitian quadratic function of a complex vector.
#[derive(Debug, Clone)]
pub struct HermitianForm {
    pub a: DMatrix<Complex64>,
    pub b: DVector<Complex64>,
    pub c: f64,
}

impl HermitianForm {
    pub fn value(&self, x: &DVector<Complex64>) -> f64 {
        let quad = (x.adjoint() * &self.a * x)[(0, 0)].re;
        let lin = 2.0 * self.b.iter().zip(x.iter()).map(|(b, x)| (b.conj() * x).re).sum::<f64>();
        quad + lin + self.c
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LiftError {
    #[error(transparent)]
    Conic(#[from] ConicError),
}

fn hermitian_defect(a: &DMatrix<Complex64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Lift a Hermitian matrix to its real symmetric representation.
pub fn lift_hermitian(a: &DMatrix<Complex64>) -> Result<DMatrix<f64>, ConicError> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(ConicError::Dimension("matrix must be square".into()));
    }
    let defect = hermitian_defect(a);
    let scale = a.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
    if defect > 1e-10 * scale {
        return Err(ConicError::NotHermitian(defect));
    }
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = a[(i, j)];
            out[(i, j)] = z.re;
            out[(i + n, j + n)] = z.re;
            out[(i, j + n)] = -z.im;
            out[(i + n, j)] = z.im;
        }
    }
    // Exact symmetry regardless of roundoff in the input.
    let sym = (&out + out.transpose()) * 0.5;
    Ok(sym)
}

/// Recover a Hermitian matrix from its (approximately structured) real lift.
pub fn unlift_hermitian(x: &DMatrix<f64>) -> DMatrix<Complex64> {
    let n2 = x.nrows();
    assert!(n2 % 2 == 0, "lifted matrix has even dimension");
    let n = n2 / 2;
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let re = 0.5 * (x[(i, j)] + x[(i + n, j + n)]);
            let im = 0.5 * (x[(i + n, j)] - x[(i, j + n)]);
            out[(i, j)] = Complex64::new(re, im);
        }
    }
    // Project onto Hermitian.
    let adj = out.adjoint();
    (out + adj) * Complex64::new(0.5, 0.0)
}

/// `[Re x; Im x]` stacking of a complex vector.
pub fn lift_vector(x: &DVector<Complex64>) -> DVector<f64> {
    let n = x.len();
    let mut out = DVector::zeros(2 * n);
    for i in 0..n {
        out[i] = x[i].re;
        out[i + n] = x[i].im;
    }
    out
}

pub fn unlift_vector(u: &DVector<f64>) -> DVector<Complex64> {
    let n = u.len() / 2;
    DVector::from_iterator(n, (0..n).map(|i| Complex64::new(u[i], u[i + n])))
}

/// Lift one Hermitian form to a real [`QuadForm`] on a single block of
/// dimension `2n`.
pub fn lift_hermitian_form(f: &HermitianForm) -> Result<QuadForm, ConicError> {
    let a = lift_hermitian(&f.a)?;
    let n = f.a.nrows();
    let mut lin = DVector::zeros(2 * n);
    for i in 0..n {
        lin[i] = 2.0 * f.b[i].re;
        lin[i + n] = 2.0 * f.b[i].im;
    }
    Ok(QuadForm {
        blocks: vec![a],
        lin,
        cst: f.c,
    })
}

/// Lift a whole problem over one complex vector: minimize the first form
/// subject to the rest `≤ 0`. Convexity of the lifted forms is certified.
pub fn lift_complex_problem(
    objective: &HermitianForm,
    constraints: &[HermitianForm],
) -> Result<QcqpProblem, LiftError> {
    let n = objective.a.nrows();
    let part = Partition::single(2 * n);
    let obj = lift_hermitian_form(objective)?;
    let cons = constraints
        .iter()
        .map(lift_hermitian_form)
        .collect::<Result<Vec<_>, _>>()?;
    Ok(QcqpProblem::new(part, obj, cons)?)
}
