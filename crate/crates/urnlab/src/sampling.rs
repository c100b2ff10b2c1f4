//! Exact sampling laws for the four schemes and reproducible random draws.
//!
//! Probabilities are exposed only as exact rationals; converting to floats
//! is an explicit step through [`crate::scalar::Scalar::from_ratio`].
//! Random samples are generated by sequential single-ball draws (with or
//! without intermediate removal, matching the scheme), so no inverse CDF
//! over the index space is ever tabulated.

use num::bigint::BigInt;
use num::rational::Ratio;
use num::{One, Zero};
use rand::{Rng, SeedableRng};

use crate::combinatorics::{binomial, falling_factorial, multinomial, multiplicity_vector};
use crate::combinatorics::{DrawSequence, SimplexPoint};
use crate::error::{Error, Result};
use crate::model::{Composition, Scheme, UrnModel};
use crate::Rational;

/// The law of one drawing step from a fixed composition.
#[derive(Debug, Clone)]
pub struct SampleLaw {
    scheme: Scheme,
    composition: Composition,
    m: usize,
}

impl SampleLaw {
    /// Without replacement the composition must hold at least `m` balls;
    /// with replacement one ball suffices.
    pub fn new(scheme: Scheme, composition: Composition, m: usize) -> Result<Self> {
        if m < 1 {
            return Err(Error::InvalidDimension(format!(
                "sample size must be at least 1, got {m}"
            )));
        }
        let total = composition.total();
        let needed = if scheme.with_replacement() {
            1
        } else {
            m as i64
        };
        if total < needed {
            return Err(Error::InsufficientBalls(format!(
                "composition {composition} holds {total} balls, scheme {scheme} needs {needed}"
            )));
        }
        Ok(SampleLaw {
            scheme,
            composition,
            m,
        })
    }

    /// The law of the model's next draw from `at`.
    pub fn for_model(model: &UrnModel, at: &Composition) -> Result<Self> {
        Self::new(model.scheme(), at.clone(), model.sample_size())
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn composition(&self) -> &Composition {
        &self.composition
    }

    pub fn sample_size(&self) -> usize {
        self.m
    }

    /// Probability of drawing the count vector `k`: multivariate
    /// hypergeometric for scheme `M`, multinomial for scheme `R`.
    pub fn prob_unordered(&self, k: &SimplexPoint) -> Result<Rational> {
        if self.scheme.is_ordered() {
            return Err(Error::InvalidArgument(format!(
                "prob_unordered called on ordered scheme {}",
                self.scheme
            )));
        }
        if k.sum() as usize != self.m {
            return Err(Error::InvalidArgument(format!(
                "count vector {k} does not describe a sample of size {}",
                self.m
            )));
        }
        let c = self.composition.counts();
        let t = self.composition.total();
        match self.scheme {
            Scheme::M => {
                let mut num = BigInt::one();
                for (&ci, &ki) in c.iter().zip(k.counts()) {
                    num *= binomial(ci, ki)?;
                }
                let den = binomial(t, self.m as u32)?;
                Ok(Ratio::new(num, den))
            }
            Scheme::R => {
                let mut num = multinomial(self.m, k)?;
                for (&ci, &ki) in c.iter().zip(k.counts()) {
                    num *= BigInt::from(ci).pow(ki);
                }
                let den = BigInt::from(t).pow(self.m as u32);
                Ok(Ratio::new(num, den))
            }
            _ => unreachable!(),
        }
    }

    /// Probability of drawing the ordered sample `d`; depends on `d` only
    /// through its multiplicity vector.
    pub fn prob_ordered(&self, d: &DrawSequence) -> Result<Rational> {
        if d.len() != self.m {
            return Err(Error::InvalidArgument(format!(
                "sequence {d} does not describe a sample of size {}",
                self.m
            )));
        }
        self.prob_ordered_multiplicity(&multiplicity_vector(d, self.composition.colors()))
    }

    /// Probability of any single sequence whose multiplicity vector is `k`.
    pub fn prob_ordered_multiplicity(&self, k: &SimplexPoint) -> Result<Rational> {
        if !self.scheme.is_ordered() {
            return Err(Error::InvalidArgument(format!(
                "prob_ordered called on unordered scheme {}",
                self.scheme
            )));
        }
        if k.sum() as usize != self.m {
            return Err(Error::InvalidArgument(format!(
                "count vector {k} does not describe a sample of size {}",
                self.m
            )));
        }
        let c = self.composition.counts();
        let t = self.composition.total();
        match self.scheme {
            Scheme::MSeq => {
                let mut num = BigInt::one();
                for (&ci, &ki) in c.iter().zip(k.counts()) {
                    num *= falling_factorial(ci, ki);
                }
                let den = falling_factorial(t, self.m as u32);
                Ok(Ratio::new(num, den))
            }
            Scheme::RSeq => {
                let mut num = BigInt::one();
                for (&ci, &ki) in c.iter().zip(k.counts()) {
                    num *= BigInt::from(ci).pow(ki);
                }
                let den = BigInt::from(t).pow(self.m as u32);
                Ok(Ratio::new(num, den))
            }
            _ => unreachable!(),
        }
    }

    /// Draws one sample by `m` sequential single-ball draws, removing drawn
    /// balls for the without-replacement schemes.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Sample> {
        let r = self.composition.colors();
        let mut pool: Vec<i64> = self.composition.counts().to_vec();
        let mut total = self.composition.total();
        let mut counts = vec![0u32; r];
        let mut digits = Vec::with_capacity(self.m);
        for _ in 0..self.m {
            if total <= 0 {
                return Err(Error::InsufficientBalls(format!(
                    "pool exhausted while drawing from {}",
                    self.composition
                )));
            }
            let mut u = rng.random_range(0..total as u64) as i64;
            let mut color = r - 1;
            for (i, &ci) in pool.iter().enumerate() {
                if u < ci {
                    color = i;
                    break;
                }
                u -= ci;
            }
            counts[color] += 1;
            digits.push(color as u32 + 1);
            if !self.scheme.with_replacement() {
                pool[color] -= 1;
                total -= 1;
            }
        }
        Ok(if self.scheme.is_ordered() {
            Sample::Ordered(DrawSequence(digits))
        } else {
            Sample::Unordered(SimplexPoint(counts))
        })
    }
}

/// One drawn sample, shaped by the scheme.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sample {
    Unordered(SimplexPoint),
    Ordered(DrawSequence),
}

/// Deterministic RNG stream family: `stream(seed, i)` and `stream(seed, j)`
/// are independent ChaCha streams of the same keyed cipher for `i != j`.
pub type RngStream = rand_chacha::ChaCha12Rng;

/// Derives stream `index` of the family keyed by `seed`.
pub fn stream(seed: u64, index: u64) -> RngStream {
    let mut rng = RngStream::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// One minus the total mass of a law over its index space; exact zero when
/// the law is normalized. Exposed for tests.
pub fn normalization_defect(law: &SampleLaw, r: usize) -> Result<Rational> {
    let mut mass = Rational::zero();
    if law.scheme().is_ordered() {
        for d in crate::combinatorics::enumerate_sequences(r, law.sample_size())? {
            mass += law.prob_ordered(&d)?;
        }
    } else {
        for k in crate::combinatorics::enumerate_simplex(r, law.sample_size())? {
            mass += law.prob_unordered(&k)?;
        }
    }
    Ok(Rational::one() - mass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::{enumerate_sequences, enumerate_simplex};

    fn q(n: i64, d: i64) -> Rational {
        Ratio::new(BigInt::from(n), BigInt::from(d))
    }

    fn law(scheme: Scheme, c: &[i64], m: usize) -> SampleLaw {
        SampleLaw::new(scheme, Composition(c.to_vec()), m).unwrap()
    }

    #[test]
    fn hypergeometric_pair_probability() {
        // enumerate all C(4,2) = 6 unordered pairs; 4 of them are mixed
        let l = law(Scheme::M, &[2, 2], 2);
        assert_eq!(
            l.prob_unordered(&SimplexPoint(vec![1, 1])).unwrap(),
            q(2, 3)
        );
    }

    #[test]
    fn multinomial_probability() {
        // 16 ordered with-replacement draws, one of which is (1,1)
        let l = law(Scheme::R, &[1, 3], 2);
        assert_eq!(
            l.prob_unordered(&SimplexPoint(vec![2, 0])).unwrap(),
            q(1, 16)
        );
    }

    #[test]
    fn overdrawing_a_color_has_probability_zero() {
        let l = law(Scheme::M, &[1, 3], 2);
        assert!(l
            .prob_unordered(&SimplexPoint(vec![2, 0]))
            .unwrap()
            .is_zero());
    }

    #[test]
    fn ordered_probabilities() {
        let l = law(Scheme::MSeq, &[2, 2], 2);
        assert_eq!(l.prob_ordered(&DrawSequence(vec![1, 2])).unwrap(), q(1, 3));
        let l = law(Scheme::RSeq, &[1, 1], 2);
        assert_eq!(l.prob_ordered(&DrawSequence(vec![2, 2])).unwrap(), q(1, 4));
    }

    #[test]
    fn ordered_is_unordered_over_the_class_size() {
        for (uo, oo) in [(Scheme::M, Scheme::MSeq), (Scheme::R, Scheme::RSeq)] {
            let ul = law(uo, &[3, 1, 2], 2);
            let ol = law(oo, &[3, 1, 2], 2);
            for d in enumerate_sequences(3, 2).unwrap() {
                let k = multiplicity_vector(&d, 3);
                let expect =
                    ul.prob_unordered(&k).unwrap() / Rational::from(multinomial(2, &k).unwrap());
                assert_eq!(ol.prob_ordered(&d).unwrap(), expect);
            }
        }
    }

    #[test]
    fn normalization_is_exact() {
        for scheme in [Scheme::M, Scheme::R, Scheme::MSeq, Scheme::RSeq] {
            let l = law(scheme, &[3, 0, 4], 3);
            assert!(normalization_defect(&l, 3).unwrap().is_zero());
        }
    }

    #[test]
    fn aggregation_matches_unordered_law() {
        // sum of sequence probabilities over a multiplicity class equals
        // the unordered probability of the class
        for (uo, oo) in [(Scheme::M, Scheme::MSeq), (Scheme::R, Scheme::RSeq)] {
            let ul = law(uo, &[2, 3], 3);
            let ol = law(oo, &[2, 3], 3);
            for k in enumerate_simplex(2, 3).unwrap() {
                let mut agg = Rational::zero();
                for d in enumerate_sequences(2, 3).unwrap() {
                    if multiplicity_vector(&d, 2) == k {
                        agg += ol.prob_ordered(&d).unwrap();
                    }
                }
                assert_eq!(agg, ul.prob_unordered(&k).unwrap());
            }
        }
    }

    #[test]
    fn mean_identity() {
        // sum_k k_i prob(k) = m c_i / T for both unordered schemes
        for scheme in [Scheme::M, Scheme::R] {
            let c = [3i64, 1, 4];
            let t: i64 = c.iter().sum();
            let m = 3usize;
            let l = law(scheme, &c, m);
            for i in 0..3 {
                let mut acc = Rational::zero();
                for k in enumerate_simplex(3, m).unwrap() {
                    acc +=
                        Rational::from(BigInt::from(k.counts()[i])) * l.prob_unordered(&k).unwrap();
                }
                assert_eq!(acc, q(m as i64 * c[i], t));
            }
        }
    }

    #[test]
    fn insufficient_balls() {
        assert!(matches!(
            SampleLaw::new(Scheme::M, Composition(vec![1, 0]), 2),
            Err(Error::InsufficientBalls(_))
        ));
        assert!(matches!(
            SampleLaw::new(Scheme::R, Composition(vec![0, 0]), 2),
            Err(Error::InsufficientBalls(_))
        ));
        // with replacement a single ball supports any sample size
        assert!(SampleLaw::new(Scheme::R, Composition(vec![1, 0]), 5).is_ok());
    }

    #[test]
    fn single_support_draws() {
        let mut rng = stream(7, 0);
        let l = law(Scheme::M, &[0, 5], 2);
        for _ in 0..20 {
            assert_eq!(
                l.draw(&mut rng).unwrap(),
                Sample::Unordered(SimplexPoint(vec![0, 2]))
            );
        }
        let l = law(Scheme::M, &[1, 1], 2);
        for _ in 0..20 {
            assert_eq!(
                l.draw(&mut rng).unwrap(),
                Sample::Unordered(SimplexPoint(vec![1, 1]))
            );
        }
    }

    #[test]
    fn draw_frequencies_follow_the_law() {
        // scheme RSEQ, c = (1,1), m = 2: four sequences, each 1/4.
        // With 10^5 draws the count per cell is within 4 sigma of 25000
        // (sigma = sqrt(n p (1-p)) ~ 137).
        let l = law(Scheme::RSeq, &[1, 1], 2);
        let mut rng = stream(42, 0);
        let mut counts = std::collections::HashMap::new();
        let n = 100_000u32;
        for _ in 0..n {
            if let Sample::Ordered(d) = l.draw(&mut rng).unwrap() {
                *counts.entry(d.0.clone()).or_insert(0u32) += 1;
            }
        }
        assert_eq!(counts.len(), 4);
        let sigma = (n as f64 * 0.25 * 0.75).sqrt();
        for &c in counts.values() {
            assert!((c as f64 - 25_000.0).abs() < 4.0 * sigma, "count {c}");
        }
    }

    #[test]
    fn streams_are_reproducible_and_independent() {
        let a: Vec<u64> = {
            let mut r = stream(1, 0);
            (0..8).map(|_| r.random_range(0..1_000_000)).collect()
        };
        let b: Vec<u64> = {
            let mut r = stream(1, 0);
            (0..8).map(|_| r.random_range(0..1_000_000)).collect()
        };
        let c: Vec<u64> = {
            let mut r = stream(1, 1);
            (0..8).map(|_| r.random_range(0..1_000_000)).collect()
        };
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
