//! Spectral diagnostics of a reduced matrix.
//!
//! Balance makes the all-ones vector a right eigenvector with eigenvalue
//! equal to the balance; that identity is re-checked in exact integer
//! arithmetic, while the spectrum itself is computed numerically. The
//! ratio of the second eigenvalue's real part to the balance is reported
//! together with the `< 1/2` flag that marks the central-limit regime.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::model::ReducedMatrix;

/// Tolerance for matching the balance eigenvalue numerically.
pub const EIGEN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexVal {
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenReport {
    pub sigma: i64,
    /// `A * 1^T = sigma * 1^T`, verified exactly on the integers.
    pub balance_eigenvector: bool,
    /// Spectrum sorted by decreasing real part, ties by decreasing
    /// imaginary part.
    pub eigenvalues: Vec<ComplexVal>,
    /// Some eigenvalue lies within [`EIGEN_TOL`] of the balance.
    pub sigma_eigenvalue_found: bool,
    /// No real part exceeds the balance (within tolerance).
    pub sigma_is_largest: bool,
    /// The dominant eigenvalue once the balance eigenvalue is removed.
    pub lambda2: ComplexVal,
    /// `Re(lambda2) / sigma`.
    pub ratio: f64,
    /// `ratio < 1/2`, the small-index regime.
    pub small_index: bool,
    /// Upper or lower triangular.
    pub triangular: bool,
}

pub fn eigen_report(a: &ReducedMatrix) -> EigenReport {
    let r = a.colors();
    let sigma = a.sigma();

    // exact integer re-check of the construction invariant
    let balance_eigenvector = a.rows().iter().all(|row| row.iter().sum::<i64>() == sigma);
    assert!(
        balance_eigenvector,
        "reduced matrix lost its balance invariant"
    );

    let flat: Vec<f64> = a
        .rows()
        .iter()
        .flat_map(|row| row.iter().map(|&v| v as f64))
        .collect();
    let spectrum = DMatrix::from_row_slice(r, r, &flat).complex_eigenvalues();
    let mut eigenvalues: Vec<ComplexVal> = spectrum
        .iter()
        .map(|c| ComplexVal { re: c.re, im: c.im })
        .collect();
    eigenvalues.sort_by(|a, b| {
        (b.re, b.im)
            .partial_cmp(&(a.re, a.im))
            .expect("eigenvalues are finite")
    });

    let dist_to_sigma = |v: &ComplexVal| ((v.re - sigma as f64).powi(2) + v.im.powi(2)).sqrt();
    let sigma_idx = (0..eigenvalues.len())
        .min_by(|&i, &j| {
            dist_to_sigma(&eigenvalues[i])
                .partial_cmp(&dist_to_sigma(&eigenvalues[j]))
                .expect("finite")
        })
        .expect("at least two eigenvalues");
    let sigma_eigenvalue_found = dist_to_sigma(&eigenvalues[sigma_idx]) <= EIGEN_TOL;
    let max_re = eigenvalues.iter().map(|v| v.re).fold(f64::MIN, f64::max);
    let sigma_is_largest = sigma_eigenvalue_found && max_re <= sigma as f64 + EIGEN_TOL;

    let lambda2 = eigenvalues
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != sigma_idx)
        .map(|(_, v)| *v)
        .next()
        .expect("r >= 2 leaves a second eigenvalue");
    let ratio = lambda2.re / sigma as f64;

    let upper = (0..r).all(|i| (0..i).all(|j| a.rows()[i][j] == 0));
    let lower = (0..r).all(|i| ((i + 1)..r).all(|j| a.rows()[i][j] == 0));

    EigenReport {
        sigma,
        balance_eigenvector,
        eigenvalues,
        sigma_eigenvalue_found,
        sigma_is_largest,
        lambda2,
        ratio,
        small_index: ratio < 0.5,
        triangular: upper || lower,
    }
}
