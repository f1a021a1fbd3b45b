//! Dense complex linear algebra for the 8-dimensional generator.
//!
//! Thin wrappers around nalgebra's LU decomposition for the steady-state
//! and resolvent solves, a reciprocal-condition estimate used to detect
//! dark-state singularities, and eigenvalues via the real 2n×2n embedding.

use nalgebra::SMatrix;
use num_complex::Complex64;

use crate::model::{EvolutionMatrix, SigmaVector, DIM};

type Mat8 = SMatrix<Complex64, 8, 8>;
type Vec8 = SMatrix<Complex64, 8, 1>;

fn to_mat(a: &EvolutionMatrix) -> Mat8 {
    Mat8::from_fn(|r, c| a[r][c])
}

fn to_vec(v: &SigmaVector) -> Vec8 {
    Vec8::from_fn(|r, _| v[r])
}

fn from_vec(v: &Vec8) -> SigmaVector {
    let mut out = [Complex64::new(0.0, 0.0); DIM];
    for (o, x) in out.iter_mut().zip(v.iter()) {
        *o = *x;
    }
    out
}

/// Solves `a · x = rhs` by LU with partial pivoting. `None` when the
/// elimination hits a zero pivot or produces non-finite entries.
pub fn solve(a: &EvolutionMatrix, rhs: &SigmaVector) -> Option<SigmaVector> {
    let lu = to_mat(a).lu();
    let x = lu.solve(&to_vec(rhs))?;
    let out = from_vec(&x);
    out.iter()
        .all(|z| z.re.is_finite() && z.im.is_finite())
        .then_some(out)
}

/// Solves the same matrix against two right-hand sides with one
/// factorization. Used per frequency point by the resolvent.
pub fn solve_two(
    a: &EvolutionMatrix,
    rhs1: &SigmaVector,
    rhs2: &SigmaVector,
) -> Option<(SigmaVector, SigmaVector)> {
    let lu = to_mat(a).lu();
    let x1 = from_vec(&lu.solve(&to_vec(rhs1))?);
    let x2 = from_vec(&lu.solve(&to_vec(rhs2))?);
    let finite = |v: &SigmaVector| v.iter().all(|z| z.re.is_finite() && z.im.is_finite());
    (finite(&x1) && finite(&x2)).then_some((x1, x2))
}

fn norm1(a: &Mat8) -> f64 {
    (0..DIM)
        .map(|c| (0..DIM).map(|r| a[(r, c)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Reciprocal condition number 1/(‖A‖₁‖A⁻¹‖₁), computed from the explicit
/// inverse — cheap at this size and exact enough to act as a singularity
/// detector. Returns 0 when the matrix is not invertible.
pub fn reciprocal_condition(a: &EvolutionMatrix) -> f64 {
    let m = to_mat(a);
    let na = norm1(&m);
    if na == 0.0 {
        return 0.0;
    }
    match m.lu().try_inverse() {
        Some(inv) => {
            let ninv = norm1(&inv);
            if !ninv.is_finite() || ninv == 0.0 {
                0.0
            } else {
                1.0 / (na * ninv)
            }
        }
        None => 0.0,
    }
}

/// Largest real part over the eigenvalues of a complex matrix.
///
/// The complex matrix is embedded as the real matrix [[Re, −Im], [Im, Re]],
/// whose spectrum is the union of the complex spectrum and its conjugate;
/// the abscissa is unchanged, and the real Schur decomposition is
/// numerically solid.
pub fn spectral_abscissa(a: &EvolutionMatrix) -> f64 {
    embedded_eigenvalues(a)
        .iter()
        .map(|ev| ev.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Eigenvalues of the real 16×16 embedding of a complex 8×8 matrix: the
/// matrix's spectrum together with its complex conjugate. Useful wherever
/// only mode rates and |frequencies| matter.
pub fn embedded_eigenvalues(a: &EvolutionMatrix) -> Vec<Complex64> {
    let embedded = SMatrix::<f64, 16, 16>::from_fn(|r, c| {
        let (ri, ci) = (r % DIM, c % DIM);
        match (r / DIM, c / DIM) {
            (0, 0) | (1, 1) => a[ri][ci].re,
            (0, 1) => -a[ri][ci].im,
            (1, 0) => a[ri][ci].im,
            _ => unreachable!(),
        }
    });
    embedded
        .complex_eigenvalues()
        .iter()
        .map(|ev| Complex64::new(ev.re, ev.im))
        .collect()
}
