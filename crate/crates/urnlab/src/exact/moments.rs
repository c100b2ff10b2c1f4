//! Mean and covariance of linear models, computed exactly.
//!
//! The mean is the left product of the initial composition with the
//! step matrices `I + A / T_j`. The covariance follows a one-step
//! recurrence whose correction constants differ per scheme; because the
//! available derivations disagree on which constant belongs to which
//! unordered scheme, the constants are explicit [`CovarianceConstant`]
//! values resolved against the enumeration oracle (see
//! [`crate::exact::conform`]), and the defaults here are the resolved
//! assignments.

use num::bigint::BigInt;
use num::rational::Ratio;

use crate::error::{Error, Result};
use crate::exact::Evolution;
use crate::linalg::Matrix;
use crate::model::{Scheme, UrnModel};
use crate::scalar::{ratio_string, Scalar};
use crate::Rational;

/// Exact mean vector and covariance matrix at one step.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentState<S> {
    pub step: usize,
    pub mu: Vec<S>,
    pub sigma: Matrix<S>,
}

impl MomentState<Rational> {
    /// `{"step": n, "mu": ["p/q", ...], "sigma": [["p/q", ...], ...]}`
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "step": self.step,
            "mu": self.mu.iter().map(ratio_string).collect::<Vec<_>>(),
            "sigma": self.sigma.rows().iter()
                .map(|row| row.iter().map(ratio_string).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        })
    }
}

/// Correction constant of the covariance recurrence.
///
/// For unordered schemes the recurrence subtracts
/// `c_n A^T (Sigma_{n-1} + mu_{n-1}^T mu_{n-1}) A` and adds
/// `T_{n-1} c_n sum_i E[X_{n-1}^(i)] a_i^T a_i`; the candidates differ in
/// `c_n`. For ordered schemes the subtracted factor is fixed at
/// `1/T_{n-1}^2` and the added term is
/// `d_n sum_d E[w_{j(d)}(X_{n-1})] a_d^T a_d`, where the candidate fixes
/// both `d_n` and whether `w` is the power or the falling-factorial
/// product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovarianceConstant {
    /// `c_n = 1/(m T^2)`; resolved assignment for scheme `R`.
    UnorderedInvMT2,
    /// `c_n = (1/(T (T-1))) (1/m - 1/T)`; resolved assignment for scheme `M`.
    UnorderedFallingResidual,
    /// `c_n = (m-1)/(m T^2)`, a derivation byproduct kept as a candidate.
    UnorderedProofVariant,
    /// `d_n = 1/(T)_m` with falling-factorial moments; resolved for `MSEQ`.
    OrderedFallingMoments,
    /// `d_n = 1/T^m` with power moments; resolved for `RSEQ`.
    OrderedPowerMoments,
}

impl CovarianceConstant {
    /// The assignment that reproduces the enumeration oracle exactly.
    pub fn resolved_for(scheme: Scheme) -> Self {
        match scheme {
            Scheme::M => CovarianceConstant::UnorderedFallingResidual,
            Scheme::R => CovarianceConstant::UnorderedInvMT2,
            Scheme::MSeq => CovarianceConstant::OrderedFallingMoments,
            Scheme::RSeq => CovarianceConstant::OrderedPowerMoments,
        }
    }

    /// All candidates applicable to the scheme, for conformance runs.
    pub fn candidates_for(scheme: Scheme) -> Vec<Self> {
        if scheme.is_ordered() {
            vec![
                CovarianceConstant::OrderedFallingMoments,
                CovarianceConstant::OrderedPowerMoments,
            ]
        } else {
            vec![
                CovarianceConstant::UnorderedInvMT2,
                CovarianceConstant::UnorderedFallingResidual,
                CovarianceConstant::UnorderedProofVariant,
            ]
        }
    }

    pub fn formula(&self) -> &'static str {
        match self {
            CovarianceConstant::UnorderedInvMT2 => "c_n = 1/(m*T^2)",
            CovarianceConstant::UnorderedFallingResidual => "c_n = (1/(T*(T-1)))*(1/m - 1/T)",
            CovarianceConstant::UnorderedProofVariant => "c_n = (m-1)/(m*T^2)",
            CovarianceConstant::OrderedFallingMoments => {
                "d_n = 1/falling(T,m), falling-factorial moments"
            }
            CovarianceConstant::OrderedPowerMoments => "d_n = 1/T^m, power moments",
        }
    }

    pub fn is_ordered(&self) -> bool {
        matches!(
            self,
            CovarianceConstant::OrderedFallingMoments | CovarianceConstant::OrderedPowerMoments
        )
    }

    /// Whether the ordered added term uses falling-factorial moments.
    pub fn uses_falling_moments(&self) -> bool {
        matches!(self, CovarianceConstant::OrderedFallingMoments)
    }

    /// The value of `c_n` (unordered) or `d_n` (ordered) for a step whose
    /// previous total is `t`.
    pub fn coefficient(&self, m: usize, t: i64) -> Rational {
        let big = |v: i64| BigInt::from(v);
        match self {
            CovarianceConstant::UnorderedInvMT2 => {
                Ratio::new(big(1), big(m as i64) * big(t) * big(t))
            }
            CovarianceConstant::UnorderedFallingResidual => {
                // (T-m) / (m T^2 (T-1)); continuously extended to 1/T^2
                // at m = 1, where the T-1 factor would cancel
                if m == 1 {
                    Ratio::new(big(1), big(t) * big(t))
                } else {
                    Ratio::new(
                        big(t - m as i64),
                        big(m as i64) * big(t) * big(t) * big(t - 1),
                    )
                }
            }
            CovarianceConstant::UnorderedProofVariant => {
                Ratio::new(big(m as i64 - 1), big(m as i64) * big(t) * big(t))
            }
            CovarianceConstant::OrderedFallingMoments => {
                let den = crate::combinatorics::falling_factorial(t, m as u32);
                Ratio::new(BigInt::from(1), den)
            }
            CovarianceConstant::OrderedPowerMoments => Ratio::new(big(1), big(t).pow(m as u32)),
        }
    }
}

fn reduced_of(model: &UrnModel) -> Result<crate::model::ReducedMatrix> {
    let verdict = model.matrix().classify()?;
    verdict.reduced.ok_or_else(|| {
        Error::NotLinear(format!(
            "{} condition fails at {} of {} indices",
            model.scheme(),
            verdict.violations.len(),
            model.matrix().simplex_points().len()
        ))
    })
}

/// Means `mu_0 .. mu_n` of a linear model via the matrix product.
pub fn mean_trajectory<S: Scalar>(model: &UrnModel, steps: usize) -> Result<Vec<Vec<S>>> {
    let a = reduced_of(model)?;
    let sigma = a.sigma();
    let a_mat: Matrix<S> = Matrix::from_int_rows(a.rows());
    let r = model.colors();
    let identity = Matrix::<S>::identity(r);
    let mut mu: Vec<S> = model
        .initial()
        .counts()
        .iter()
        .map(|&v| S::from_i64(v))
        .collect();
    let mut out = vec![mu.clone()];
    for n in 1..=steps {
        let t_prev = model.total_at(n - 1, sigma);
        let step_matrix = identity.add(&a_mat.scale(&(S::one() / S::from_i64(t_prev))));
        mu = step_matrix.vec_mul(&mu);
        out.push(mu.clone());
    }
    Ok(out)
}

/// Mean after `steps` draws, `X_0 (I + A/T_0) ... (I + A/T_{n-1})`.
pub fn mean_product_formula<S: Scalar>(model: &UrnModel, steps: usize) -> Result<Vec<S>> {
    Ok(mean_trajectory(model, steps)?.pop().expect("nonempty"))
}

/// Moment states `0 .. n` from the covariance recurrence with the resolved
/// per-scheme constant.
pub fn covariance_trajectory<S: Scalar>(
    model: &UrnModel,
    steps: usize,
    cap: usize,
) -> Result<Vec<MomentState<S>>> {
    covariance_trajectory_with(
        model,
        steps,
        cap,
        CovarianceConstant::resolved_for(model.scheme()),
    )
}

/// Moment state at step `n` from the recurrence.
pub fn covariance_recurrence<S: Scalar>(
    model: &UrnModel,
    steps: usize,
    cap: usize,
) -> Result<MomentState<S>> {
    Ok(covariance_trajectory(model, steps, cap)?
        .pop()
        .expect("nonempty"))
}

/// Covariance recurrence with an explicit constant candidate. Ordered
/// schemes read their higher mixed moments from the evolving exact
/// distribution, so the state cap applies to them.
pub fn covariance_trajectory_with<S: Scalar>(
    model: &UrnModel,
    steps: usize,
    cap: usize,
    constant: CovarianceConstant,
) -> Result<Vec<MomentState<S>>> {
    let scheme = model.scheme();
    if constant.is_ordered() != scheme.is_ordered() {
        return Err(Error::InvalidArgument(format!(
            "constant {:?} does not apply to scheme {scheme}",
            constant
        )));
    }
    let a = reduced_of(model)?;
    let sigma_balance = a.sigma();
    let r = model.colors();
    let m = model.sample_size();
    let a_mat: Matrix<S> = Matrix::from_int_rows(a.rows());
    let a_t = a_mat.transpose();
    let identity = Matrix::<S>::identity(r);

    // extreme-row outer products for the unordered added term
    let outer_rows: Vec<Matrix<S>> = a
        .rows()
        .iter()
        .map(|row| {
            let v: Vec<S> = row.iter().map(|&x| S::from_i64(x)).collect();
            Matrix::outer(&v, &v)
        })
        .collect();

    let mut evolution = if scheme.is_ordered() {
        Some(Evolution::<S>::new(model, cap)?)
    } else {
        None
    };

    let mut mu: Vec<S> = model
        .initial()
        .counts()
        .iter()
        .map(|&v| S::from_i64(v))
        .collect();
    // X_0 is non-random, so the covariance starts at zero
    let mut cov = Matrix::<S>::zeros(r);
    let mut out = vec![MomentState {
        step: 0,
        mu: mu.clone(),
        sigma: cov.clone(),
    }];

    for n in 1..=steps {
        let t_prev = model.total_at(n - 1, sigma_balance);
        let t_inv = S::one() / S::from_i64(t_prev);
        let step_matrix = identity.add(&a_mat.scale(&t_inv));
        let raw_prev = cov.add(&Matrix::outer(&mu, &mu));
        let transported = step_matrix.transpose().mul(&cov).mul(&step_matrix);

        let (subtracted, added) = if let Some(evo) = evolution.as_mut() {
            // ordered: fixed 1/T^2 pivot, candidate-controlled added term
            let subtracted = a_t
                .mul(&raw_prev)
                .mul(&a_mat)
                .scale(&(t_inv.clone() * t_inv.clone()));
            let d_n = S::from_ratio(&constant.coefficient(m, t_prev));
            let falling = constant.uses_falling_moments();
            let dist = evo.current();
            let matrix = model.matrix();
            let class_moment: Vec<S> = matrix
                .simplex_points()
                .iter()
                .map(|k| dist.mixed_moment(k, falling))
                .collect();
            let mut added = Matrix::<S>::zeros(r);
            for (idx, row) in matrix.rows().iter().enumerate() {
                let w = class_moment[matrix.multiplicity_index(idx)].clone();
                if w == S::zero() {
                    continue;
                }
                let v: Vec<S> = row.iter().map(|&x| S::from_i64(x)).collect();
                added = added.add(&Matrix::outer(&v, &v).scale(&w));
            }
            evo.advance()?;
            (subtracted, added.scale(&d_n))
        } else {
            let c_n = S::from_ratio(&constant.coefficient(m, t_prev));
            let subtracted = a_t.mul(&raw_prev).mul(&a_mat).scale(&c_n);
            let weight = S::from_i64(t_prev) * c_n;
            let mut added = Matrix::<S>::zeros(r);
            for (i, outer) in outer_rows.iter().enumerate() {
                added = added.add(&outer.scale(&mu[i]));
            }
            (subtracted, added.scale(&weight))
        };

        cov = transported.sub(&subtracted).add(&added);
        mu = step_matrix.vec_mul(&mu);
        out.push(MomentState {
            step: n,
            mu: mu.clone(),
            sigma: cov.clone(),
        });
    }
    Ok(out)
}

/// Moment states read off the enumerated exact distribution; works for any
/// tenable model, linear or not.
pub fn enumerate_moments<S: Scalar>(
    model: &UrnModel,
    steps: usize,
    cap: usize,
) -> Result<Vec<MomentState<S>>> {
    let mut evo = Evolution::<S>::new(model, cap)?;
    let mut out = Vec::with_capacity(steps + 1);
    for n in 0..=steps {
        out.push(MomentState {
            step: n,
            mu: evo.current().mean(),
            sigma: evo.current().covariance(),
        });
        if n < steps {
            evo.advance()?;
        }
    }
    Ok(out)
}
