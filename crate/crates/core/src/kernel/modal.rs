use std::f64::consts::PI;

use serde::Serialize;

use super::jacobi::symmetric_eigen;
use super::matrix::{Cholesky, DenseMatrix};
use super::KernelError;

/// Pivot threshold, relative to the diagonal, for factoring the massless block.
const CONDENSATION_PIVOT_TOL: f64 = 1e-12;
/// Eigenvalues at or below this fraction of the largest are treated as zero.
const ZERO_EIGEN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModalResult {
    /// Seconds, longest first.
    pub periods: Vec<f64>,
    pub n_modes: usize,
}

impl ModalResult {
    pub fn fundamental(&self) -> f64 {
        self.periods[0]
    }
}

/// Splits `k` into mass and massless blocks and returns the statically
/// condensed stiffness over the mass-carrying DOFs together with their masses.
pub(crate) fn condense(k: &DenseMatrix, m: &[f64]) -> Result<(DenseMatrix, Vec<f64>), KernelError> {
    let (master, slave): (Vec<usize>, Vec<usize>) = (0..m.len()).partition(|&i| m[i] > 0.0);
    if master.is_empty() {
        return Err(KernelError::NoMass);
    }
    let masses: Vec<f64> = master.iter().map(|&i| m[i]).collect();
    let kmm = k.select(&master, &master);
    if slave.is_empty() {
        return Ok((kmm, masses));
    }
    let kss = k.select(&slave, &slave);
    let ksm = k.select(&slave, &master);
    let chol = Cholesky::factor(&kss, CONDENSATION_PIVOT_TOL).ok_or(KernelError::SingularCondensation)?;
    let x = chol.solve_matrix(&ksm);
    let correction = ksm.transpose().matmul(&x);
    let n = master.len();
    let mut red = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            red[(i, j)] = kmm[(i, j)] - correction[(i, j)];
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let avg = 0.5 * (red[(i, j)] + red[(j, i)]);
            red[(i, j)] = avg;
            red[(j, i)] = avg;
        }
    }
    Ok((red, masses))
}

/// Natural periods of `K φ = ω² M φ` with `M` diagonal, longest first.
pub fn solve_periods(k: &DenseMatrix, m: &[f64], n_modes: usize) -> Result<ModalResult, KernelError> {
    assert_eq!(k.rows(), m.len(), "mass diagonal must match stiffness size");
    if n_modes == 0 {
        return Err(KernelError::InvalidModeCount);
    }
    let (k_red, masses) = condense(k, m)?;
    let n = masses.len();
    let inv_sqrt: Vec<f64> = masses.iter().map(|mi| 1.0 / mi.sqrt()).collect();
    let mut a = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = k_red[(i, j)] * inv_sqrt[i] * inv_sqrt[j];
        }
    }
    let eig = symmetric_eigen(&a)?;
    let lambda_max = eig.values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let lambda_min = eig.values[0];
    if !(lambda_min > ZERO_EIGEN_TOL * lambda_max) {
        return Err(KernelError::NonPositiveEigen { value: lambda_min });
    }
    debug_assert!(rayleigh_bound_holds(&k_red, &masses, lambda_min));
    let count = n_modes.min(n);
    let periods = eig.values[..count].iter().map(|w2| 2.0 * PI / w2.sqrt()).collect();
    Ok(ModalResult { periods, n_modes })
}

/// ω₁² never exceeds the Rayleigh quotient of a trial vector.
fn rayleigh_bound_holds(k: &DenseMatrix, m: &[f64], lambda_min: f64) -> bool {
    let n = m.len();
    let v: Vec<f64> = (0..n).map(|i| 1.0 + ((i * 7919) % 13) as f64 / 13.0).collect();
    let kv = k.mul_vec(&v);
    let num: f64 = v.iter().zip(&kv).map(|(a, b)| a * b).sum();
    let den: f64 = v.iter().zip(m).map(|(a, mi)| a * a * mi).sum();
    lambda_min <= num / den * (1.0 + 1e-9)
}
