//! Exact engines: full distribution evolution (the brute-force oracle),
//! moment recurrences, conformance checks and eigen diagnostics.

pub mod conform;
pub mod eigen;
pub mod moments;

use std::collections::BTreeMap;

use num::bigint::BigInt;
use num::Zero;

use crate::combinatorics::falling_factorial;
use crate::combinatorics::SimplexPoint;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::{Composition, UrnModel};
use crate::sampling::SampleLaw;
use crate::scalar::Scalar;
use crate::Rational;

/// Default bound on the number of support states kept while evolving.
pub const DEFAULT_STATE_CAP: usize = 1_000_000;

/// The law of the composition after `step` draws, as a finite support map.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution<S> {
    step: usize,
    support: BTreeMap<Composition, S>,
}

impl<S: Scalar> Distribution<S> {
    /// Point mass, the law at step 0.
    pub fn point(x: Composition) -> Self {
        let mut support = BTreeMap::new();
        support.insert(x, S::one());
        Distribution { step: 0, support }
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// Support points with probabilities, in composition lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (&Composition, &S)> {
        self.support.iter()
    }

    pub fn prob(&self, x: &Composition) -> S {
        self.support.get(x).cloned().unwrap_or_else(S::zero)
    }

    pub fn total_mass(&self) -> S {
        self.support.values().cloned().fold(S::zero(), |a, b| a + b)
    }

    pub fn mean(&self) -> Vec<S> {
        let r = self.support.keys().next().map(|x| x.colors()).unwrap_or(0);
        let mut mu = vec![S::zero(); r];
        for (x, p) in &self.support {
            for (i, &v) in x.counts().iter().enumerate() {
                mu[i] = mu[i].clone() + p.clone() * S::from_i64(v);
            }
        }
        mu
    }

    /// `E[X^T X]`, the raw second-moment matrix.
    pub fn raw_second_moment(&self) -> Matrix<S> {
        let r = self.support.keys().next().map(|x| x.colors()).unwrap_or(0);
        let mut m = Matrix::zeros(r);
        for (x, p) in &self.support {
            let xv: Vec<S> = x.counts().iter().map(|&v| S::from_i64(v)).collect();
            m = m.add(&Matrix::outer(&xv, &xv).scale(p));
        }
        m
    }

    /// Covariance matrix centered at the mean.
    pub fn covariance(&self) -> Matrix<S> {
        let mu = self.mean();
        self.raw_second_moment().sub(&Matrix::outer(&mu, &mu))
    }

    /// Mixed moment `E[prod_i X_i^{k_i}]` (power) or
    /// `E[prod_i (X_i)_{k_i}]` (falling factorial).
    pub fn mixed_moment(&self, k: &SimplexPoint, falling: bool) -> S {
        let mut acc = S::zero();
        for (x, p) in &self.support {
            let mut w = BigInt::from(1);
            for (&xi, &ki) in x.counts().iter().zip(k.counts()) {
                if falling {
                    w *= falling_factorial(xi, ki);
                } else {
                    w *= BigInt::from(xi).pow(ki);
                }
            }
            if w.is_zero() {
                continue;
            }
            acc = acc + p.clone() * S::from_bigint(&w);
        }
        acc
    }
}

/// Stepwise pushforward of the composition law under a tenable model.
pub struct Evolution<'a, S> {
    model: &'a UrnModel,
    cap: usize,
    current: Distribution<S>,
}

impl<'a, S: Scalar> Evolution<'a, S> {
    /// Refuses non-tenable models; unbalanced ones fail in the first step's
    /// law construction, so balance is checked here too.
    pub fn new(model: &'a UrnModel, cap: usize) -> Result<Self> {
        model.matrix().validate_balance()?;
        let report = model.matrix().validate_tenability();
        if !report.tenable {
            let detail: Vec<String> = report
                .violations
                .iter()
                .map(|v| {
                    format!(
                        "row {} color {} adds {} (needs >= {})",
                        v.index, v.color, v.entry, v.required
                    )
                })
                .collect();
            return Err(Error::NotTenable(detail.join("; ")));
        }
        Ok(Evolution {
            model,
            cap,
            current: Distribution::point(model.initial().clone()),
        })
    }

    pub fn current(&self) -> &Distribution<S> {
        &self.current
    }

    pub fn into_current(self) -> Distribution<S> {
        self.current
    }

    /// Pushes the law one step forward, merging probability mass at equal
    /// compositions.
    pub fn advance(&mut self) -> Result<()> {
        let matrix = self.model.matrix();
        let mut next: BTreeMap<Composition, S> = BTreeMap::new();
        for (x, p) in &self.current.support {
            let law = SampleLaw::for_model(self.model, x)?;
            if matrix.scheme().is_ordered() {
                // sequence probabilities depend only on the multiplicity
                // vector; compute one value per simplex point
                let per_class: Result<Vec<Rational>> = matrix
                    .simplex_points()
                    .iter()
                    .map(|k| law.prob_ordered_multiplicity(k))
                    .collect();
                let per_class = per_class?;
                for (idx, row) in matrix.rows().iter().enumerate() {
                    let q = &per_class[matrix.multiplicity_index(idx)];
                    if q.is_zero() {
                        continue;
                    }
                    merge(&mut next, x.apply(row)?, p.clone() * S::from_ratio(q))?;
                }
            } else {
                for (idx, row) in matrix.rows().iter().enumerate() {
                    let q = law.prob_unordered(&matrix.simplex_points()[idx])?;
                    if q.is_zero() {
                        continue;
                    }
                    merge(&mut next, x.apply(row)?, p.clone() * S::from_ratio(&q))?;
                }
            }
            if next.len() > self.cap {
                return Err(Error::CapExceeded(format!(
                    "support grew past {} states at step {}",
                    self.cap,
                    self.current.step + 1
                )));
            }
        }
        self.current = Distribution {
            step: self.current.step + 1,
            support: next,
        };
        Ok(())
    }
}

fn merge<S: Scalar>(map: &mut BTreeMap<Composition, S>, x: Composition, mass: S) -> Result<()> {
    if x.min_count() < 0 {
        // tenability was verified, so a negative count is an engine bug
        return Err(Error::Internal(format!(
            "tenable evolution produced negative composition {x}"
        )));
    }
    let slot = map.entry(x).or_insert_with(S::zero);
    *slot = slot.clone() + mass;
    Ok(())
}

/// Full pushforward of the initial composition through `steps` draws.
pub fn evolve_distribution<S: Scalar>(
    model: &UrnModel,
    steps: usize,
    cap: usize,
) -> Result<Distribution<S>> {
    let mut evo = Evolution::new(model, cap)?;
    for _ in 0..steps {
        evo.advance()?;
    }
    Ok(evo.into_current())
}

/// CSV dump of an exact distribution: `step,x1..xr,prob_num,prob_den`,
/// rows in composition lexicographic order, LF line endings.
pub fn distribution_csv(dist: &Distribution<Rational>) -> String {
    let r = dist.iter().next().map(|(x, _)| x.colors()).unwrap_or(0);
    let mut out = String::from("step");
    for i in 1..=r {
        out.push_str(&format!(",x{i}"));
    }
    out.push_str(",prob_num,prob_den\n");
    for (x, p) in dist.iter() {
        out.push_str(&dist.step().to_string());
        for v in x.counts() {
            out.push_str(&format!(",{v}"));
        }
        out.push_str(&format!(",{},{}\n", p.numer(), p.denom()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ReplacementMatrix, Scheme};
    use num::One;

    fn polya(scheme: Scheme, initial: Vec<i64>) -> UrnModel {
        let rows = vec![vec![2, 0], vec![1, 1], vec![0, 2]];
        let matrix = ReplacementMatrix::from_canonical_rows(scheme, 2, 2, rows).unwrap();
        UrnModel::new(matrix, Composition(initial)).unwrap()
    }

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn forced_first_draw_without_replacement() {
        let model = polya(Scheme::M, vec![1, 1]);
        let dist = evolve_distribution::<Rational>(&model, 1, 1000).unwrap();
        assert_eq!(dist.len(), 1);
        assert_eq!(dist.prob(&Composition(vec![2, 2])), Rational::one());
    }

    #[test]
    fn first_draw_with_replacement() {
        let model = polya(Scheme::R, vec![1, 1]);
        let dist = evolve_distribution::<Rational>(&model, 1, 1000).unwrap();
        assert_eq!(dist.prob(&Composition(vec![3, 1])), q(1, 4));
        assert_eq!(dist.prob(&Composition(vec![2, 2])), q(1, 2));
        assert_eq!(dist.prob(&Composition(vec![1, 3])), q(1, 4));
    }

    #[test]
    fn step_zero_is_the_point_mass() {
        let model = polya(Scheme::R, vec![1, 1]);
        let dist = evolve_distribution::<Rational>(&model, 0, 1000).unwrap();
        assert_eq!(dist.len(), 1);
        assert_eq!(dist.prob(&Composition(vec![1, 1])), Rational::one());
    }

    #[test]
    fn support_totals_are_deterministic() {
        for scheme in [Scheme::M, Scheme::R] {
            let model = polya(scheme, vec![2, 1]);
            let sigma = model.matrix().validate_balance().unwrap();
            let mut evo = Evolution::<Rational>::new(&model, 10_000).unwrap();
            for n in 0..=5usize {
                assert!(evo.current().total_mass().is_one());
                for (x, _) in evo.current().iter() {
                    assert_eq!(x.total(), model.total_at(n, sigma));
                }
                if n < 5 {
                    evo.advance().unwrap();
                }
            }
        }
    }

    #[test]
    fn non_tenable_models_are_refused() {
        let rows = vec![vec![-2, 4], vec![1, 1], vec![0, 2]];
        let matrix = ReplacementMatrix::from_canonical_rows(Scheme::R, 2, 2, rows).unwrap();
        let model = UrnModel::new(matrix, Composition(vec![2, 2])).unwrap();
        assert!(matches!(
            Evolution::<Rational>::new(&model, 1000),
            Err(Error::NotTenable(_))
        ));
    }

    #[test]
    fn cap_is_enforced() {
        let model = polya(Scheme::R, vec![1, 1]);
        assert!(matches!(
            evolve_distribution::<Rational>(&model, 4, 2),
            Err(Error::CapExceeded(_))
        ));
    }

    #[test]
    fn embedding_gives_identical_distributions() {
        for scheme in [Scheme::M, Scheme::R] {
            let model = polya(scheme, vec![2, 1]);
            let embedded = UrnModel::new(
                model.matrix().embed_ordered().unwrap(),
                model.initial().clone(),
            )
            .unwrap();
            let mut a = Evolution::<Rational>::new(&model, 10_000).unwrap();
            let mut b = Evolution::<Rational>::new(&embedded, 10_000).unwrap();
            for _ in 0..=4 {
                assert_eq!(a.current(), b.current());
                a.advance().unwrap();
                b.advance().unwrap();
            }
        }
    }

    #[test]
    fn csv_dump_is_sorted_and_exact() {
        let model = polya(Scheme::R, vec![1, 1]);
        let dist = evolve_distribution::<Rational>(&model, 1, 1000).unwrap();
        let csv = distribution_csv(&dist);
        let expect = "step,x1,x2,prob_num,prob_den\n1,1,3,1,4\n1,2,2,1,2\n1,3,1,1,4\n";
        assert_eq!(csv, expect);
    }

    #[test]
    fn float_instantiation_tracks_the_exact_law() {
        let model = polya(Scheme::R, vec![1, 1]);
        let exact = evolve_distribution::<Rational>(&model, 3, 10_000).unwrap();
        let float = evolve_distribution::<f64>(&model, 3, 10_000).unwrap();
        assert_eq!(exact.len(), float.len());
        for (x, p) in exact.iter() {
            let pf = float.prob(x);
            assert!((f64::from_ratio(p) - pf).abs() < 1e-12);
        }
    }
}
