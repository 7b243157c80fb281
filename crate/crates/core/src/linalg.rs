//! Small complex-matrix helpers shared by the scheme and symbol code.
//!
//! Matrices are `nalgebra` dynamic matrices over `Complex64`; internal
//! dimensions range from 2 (1D chirality) to 32 (3D spinor times 8 flavors).

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn cr(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn zeros(n: usize) -> CMat {
    CMat::zeros(n, n)
}

pub fn sigma_x() -> CMat {
    CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn sigma_y() -> CMat {
    CMat::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn sigma_z() -> CMat {
    CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

/// Kronecker product with the left factor on the slow index.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Kronecker product of a list of factors, left to right.
pub fn kron_all(factors: &[&CMat]) -> CMat {
    let mut out = factors[0].clone();
    for f in &factors[1..] {
        out = kron(&out, f);
    }
    out
}

/// sigma_x applied to qubit `which` of `n` flavor qubits.
pub fn sigma_x_on_qubit(which: usize, n: usize) -> CMat {
    let mut out = identity(1);
    for q in 0..n {
        let f = if q == which { sigma_x() } else { identity(2) };
        out = kron(&out, &f);
    }
    out
}

/// Conjugate transpose.
pub fn dagger(a: &CMat) -> CMat {
    a.adjoint()
}

/// Largest entry magnitude.
pub fn max_norm(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Determinant; the 2x2 case is evaluated by the explicit formula, larger
/// matrices go through LU with partial pivoting.
pub fn det(a: &CMat) -> Complex64 {
    debug_assert_eq!(a.nrows(), a.ncols());
    if a.nrows() == 2 {
        a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)]
    } else {
        a.clone().lu().determinant()
    }
}

/// Adjugate of a 2x2 matrix: adj(A) = det(A) * A^{-1}, entrywise explicit.
pub fn adjugate2(a: &CMat) -> CMat {
    assert_eq!(a.nrows(), 2);
    CMat::from_row_slice(2, 2, &[a[(1, 1)], -a[(0, 1)], -a[(1, 0)], a[(0, 0)]])
}

/// Deviation from unitarity, max |(A A^dag - I)_{ij}|.
pub fn unitarity_defect(a: &CMat) -> f64 {
    let n = a.nrows();
    max_norm(&(a * dagger(a) - identity(n)))
}

/// Commutator A B - B A.
pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}
