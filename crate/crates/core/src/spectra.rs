//! Singular and complex spectra of dense real matrices.
//!
//! Singular values come from a bidiagonalization-based SVD of `A` itself, never
//! from forming `A A^T`, which would square the condition number. The squared
//! values (the `A A^T` spectrum) are available on request. Diagonal matrices,
//! i.e. every Poisson-ensemble draw, are resolved exactly without a solver.

use std::io::Write;

use faer::linalg::solvers::Solve;
use faer::{Mat, MatRef};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Singular values of `A`, sorted descending.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularSpectrum {
    /// `sigma_i`, or `sigma_i^2` when `squared` is set.
    pub values: Vec<f64>,
    /// Whether `values` are eigenvalues of `A A^T` rather than singular values.
    pub squared: bool,
}

impl SingularSpectrum {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Smallest singular value, independent of the `squared` flag.
    pub fn min_singular(&self) -> Option<f64> {
        let last = *self.values.last()?;
        Some(if self.squared { last.sqrt() } else { last })
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(["index", "value"])?;
        for (i, v) in self.values.iter().enumerate() {
            out.serialize((i, v))?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Eigenvalues of a real matrix, in solver order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexSpectrum {
    pub values: Vec<Complex64>,
}

impl ComplexSpectrum {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(["index", "re", "im"])?;
        for (i, z) in self.values.iter().enumerate() {
            out.serialize((i, z.re, z.im))?;
        }
        out.flush()?;
        Ok(())
    }
}

fn validate(a: MatRef<'_, f64>, min_n: usize) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::Input(format!(
            "matrix is {}x{}, expected square",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.nrows() < min_n {
        return Err(Error::Input(format!(
            "matrix dimension {} is below {min_n}",
            a.nrows()
        )));
    }
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            if !a[(i, j)].is_finite() {
                return Err(Error::Input(format!("entry ({i}, {j}) is not finite")));
            }
        }
    }
    Ok(())
}

/// Returns the diagonal if every off-diagonal entry is exactly zero.
fn diagonal_entries(a: MatRef<'_, f64>) -> Option<Vec<f64>> {
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            if i != j && a[(i, j)] != 0.0 {
                return None;
            }
        }
    }
    Some((0..a.nrows()).map(|i| a[(i, i)]).collect())
}

fn descending(values: &mut [f64]) {
    values.sort_unstable_by(|x, y| y.total_cmp(x));
}

/// All `n` singular values of a square matrix, sorted descending; squared
/// (the `A A^T` eigenvalues) when `squared` is set.
pub fn singular_values(a: &Mat<f64>, squared: bool) -> Result<SingularSpectrum> {
    let a = a.as_ref();
    validate(a, 2)?;
    let mut values = match diagonal_entries(a) {
        Some(diag) => diag.into_iter().map(f64::abs).collect(),
        None => a
            .singular_values()
            .map_err(|e| Error::Numerical(format!("SVD did not converge: {e:?}")))?,
    };
    descending(&mut values);
    if squared {
        for v in &mut values {
            *v *= *v;
        }
    }
    Ok(SingularSpectrum { values, squared })
}

/// All `n` eigenvalues of a real square matrix.
pub fn complex_eigenvalues(a: &Mat<f64>) -> Result<ComplexSpectrum> {
    let a = a.as_ref();
    validate(a, 1)?;
    let values = match diagonal_entries(a) {
        Some(diag) => diag.into_iter().map(|x| Complex64::new(x, 0.0)).collect(),
        None => a
            .eigenvalues()
            .map_err(|e| Error::Numerical(format!("eigenvalue solver did not converge: {e:?}")))?,
    };
    Ok(ComplexSpectrum { values })
}

const INVERSE_ITERATION_LIMIT: usize = 200;
const RESIDUAL_TOLERANCE: f64 = 1e-9;

/// Smallest singular value of a square matrix.
///
/// Runs power iteration on `(A A^T)^{-1}` using one LU factorization of `A`,
/// which costs a fraction of a full SVD. Iteration stops once the Ritz
/// residual `|Bx - theta x| / theta` drops below `1e-9`, which bounds the
/// relative eigenvalue error by roughly `1e-18 / (1 - q)` with `q` the
/// ratio of the two smallest squared singular values. Near-degenerate cases
/// that fail to converge, and singular or overflowing inputs, fall back to
/// the full SVD.
pub fn min_singular_value(a: &Mat<f64>) -> Result<f64> {
    let aref = a.as_ref();
    validate(aref, 2)?;
    if let Some(diag) = diagonal_entries(aref) {
        return Ok(diag.into_iter().map(f64::abs).fold(f64::INFINITY, f64::min));
    }
    match inverse_iteration(aref) {
        Some(sigma) => Ok(sigma),
        None => {
            let spectrum = singular_values(a, false)?;
            Ok(*spectrum.values.last().expect("n >= 2"))
        }
    }
}

fn inverse_iteration(a: MatRef<'_, f64>) -> Option<f64> {
    let n = a.nrows();
    let lu = a.partial_piv_lu();
    // Fixed, generic start vector; orthogonality to the target singular
    // vector has probability zero.
    let mut x = Mat::<f64>::from_fn(n, 1, |i, _| 1.0 + 0.5 * (0.7548776662 * (i as f64 + 1.0)).sin());
    normalize(&mut x)?;
    for _ in 0..INVERSE_ITERATION_LIMIT {
        // y = A^{-1} x, z = A^{-T} y = (A A^T)^{-1} x
        let mut y = x.clone();
        lu.solve_in_place(y.as_mut());
        let theta = squared_norm(&y);
        if !theta.is_finite() || theta == 0.0 {
            return None;
        }
        let mut z = y;
        lu.solve_transpose_in_place(z.as_mut());
        let mut residual = 0.0;
        for i in 0..n {
            let r = z[(i, 0)] - theta * x[(i, 0)];
            residual += r * r;
        }
        let converged = residual.sqrt() <= RESIDUAL_TOLERANCE * theta;
        x = z;
        normalize(&mut x)?;
        if converged {
            let sigma = theta.sqrt().recip();
            return sigma.is_finite().then_some(sigma);
        }
    }
    None
}

fn squared_norm(v: &Mat<f64>) -> f64 {
    (0..v.nrows()).map(|i| v[(i, 0)] * v[(i, 0)]).sum()
}

fn normalize(v: &mut Mat<f64>) -> Option<()> {
    let norm = squared_norm(v).sqrt();
    if !norm.is_finite() || norm == 0.0 {
        return None;
    }
    for i in 0..v.nrows() {
        v[(i, 0)] /= norm;
    }
    Some(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn random_matrix(n: usize, seed: u64) -> Mat<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Mat::from_fn(n, n, |_, _| rng.sample(StandardNormal))
    }

    #[test]
    fn diagonal_singular_values() {
        let a = Mat::from_fn(2, 2, |i, j| if i == j { [3.0, 4.0][i] } else { 0.0 });
        let s = singular_values(&a, false).unwrap();
        assert_eq!(s.values, vec![4.0, 3.0]);
        let s2 = singular_values(&a, true).unwrap();
        assert_eq!(s2.values, vec![16.0, 9.0]);
        assert_eq!(s2.min_singular(), Some(3.0));
    }

    #[test]
    fn nilpotent_singular_values() {
        let a = Mat::from_fn(2, 2, |i, j| if (i, j) == (0, 1) { 1.0 } else { 0.0 });
        let s = singular_values(&a, false).unwrap();
        assert!((s.values[0] - 1.0).abs() < 1e-15);
        assert!(s.values[1].abs() < 1e-15);
    }

    #[test]
    fn rotation_generator_eigenvalues() {
        let a = Mat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => 1.0,
            (1, 0) => -1.0,
            _ => 0.0,
        });
        let mut ev = complex_eigenvalues(&a).unwrap().values;
        ev.sort_by(|x, y| x.im.total_cmp(&y.im));
        assert!((ev[0] - Complex64::new(0.0, -1.0)).norm() < 1e-14);
        assert!((ev[1] - Complex64::new(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn diagonal_eigenvalues() {
        let a = Mat::from_fn(2, 2, |i, j| if i == j { [2.0, 3.0][i] } else { 0.0 });
        let ev = complex_eigenvalues(&a).unwrap().values;
        assert_eq!(ev, vec![Complex64::new(2.0, 0.0), Complex64::new(3.0, 0.0)]);
    }

    #[test]
    fn companion_matrix_roots() {
        // z^3 - 6z^2 + 11z - 6 = (z-1)(z-2)(z-3)
        let c = [[6.0, -11.0, 6.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        let a = Mat::from_fn(3, 3, |i, j| c[i][j]);
        let mut ev: Vec<Complex64> = complex_eigenvalues(&a).unwrap().values;
        ev.sort_by(|x, y| x.re.total_cmp(&y.re));
        for (z, root) in ev.iter().zip([1.0, 2.0, 3.0]) {
            assert!((z - Complex64::new(root, 0.0)).norm() < 1e-10, "{z} vs {root}");
        }
    }

    #[test]
    fn trace_identity_for_eigenvalues() {
        for seed in 0..10 {
            let a = random_matrix(30, seed);
            let sum: Complex64 = complex_eigenvalues(&a).unwrap().values.iter().sum();
            let trace: f64 = (0..30).map(|i| a[(i, i)]).sum();
            let norm = a.norm_l2();
            assert!((sum.re - trace).abs() <= 1e-8 * 30.0 * norm);
            assert!(sum.im.abs() <= 1e-8 * 30.0 * norm);
        }
    }

    #[test]
    fn input_validation() {
        let rect = Mat::<f64>::zeros(2, 3);
        assert!(matches!(singular_values(&rect, false), Err(Error::Input(_))));
        assert!(matches!(complex_eigenvalues(&rect), Err(Error::Input(_))));
        let mut a = random_matrix(3, 1);
        a[(1, 2)] = f64::NAN;
        assert!(matches!(singular_values(&a, false), Err(Error::Input(_))));
        assert!(matches!(min_singular_value(&a), Err(Error::Input(_))));
        let one = Mat::<f64>::from_fn(1, 1, |_, _| 2.0);
        assert!(singular_values(&one, false).is_err());
    }

    #[test]
    fn min_singular_value_agrees_with_svd() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for trial in 0..60u64 {
            let n = 20 + (trial as usize % 5) * 20;
            // Mix of full, sparse (near-singular heavy tail) and diagonal-heavy matrices.
            let fill = [1.0, 0.5, 0.05, 0.02, 0.01][trial as usize % 5];
            let a = Mat::from_fn(n, n, |i, j| {
                if i == j || rng.random::<f64>() < fill {
                    rng.sample(StandardNormal)
                } else {
                    0.0
                }
            });
            let fast = min_singular_value(&a).unwrap();
            let full = *singular_values(&a, false).unwrap().values.last().unwrap();
            assert!(
                (fast - full).abs() <= 1e-9 * full.max(1e-300) + 1e-14 * a.norm_l2(),
                "trial {trial}: {fast} vs {full}"
            );
        }
    }

    #[test]
    fn min_singular_value_of_singular_matrix_falls_back() {
        let mut a = random_matrix(6, 3);
        for j in 0..6 {
            a[(5, j)] = a[(4, j)];
        }
        let s = min_singular_value(&a).unwrap();
        assert!(s < 1e-12, "{s}");
    }

    #[test]
    fn spectrum_csv_headers() {
        let s = SingularSpectrum { values: vec![2.0, 1.0], squared: false };
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "index,value\n0,2.0\n1,1.0\n");
        let c = ComplexSpectrum { values: vec![Complex64::new(1.0, -1.0)] };
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "index,re,im\n0,1.0,-1.0\n");
    }
}
