//! Index spaces of a drawing step and the exact counting primitives.
//!
//! A drawing of `m` balls from `r` colors is indexed either by its color
//! counts (a point of the discrete simplex, unordered schemes) or by the
//! full color sequence (ordered schemes). Both enumerations come with a
//! canonical order that the rest of the crate relies on:
//!
//! * simplex points in lexicographically decreasing order of counts, so
//!   `(m, 0, ..., 0)` is first and `(0, ..., 0, m)` is last;
//! * sequences in lexicographic order of their digit strings.

use num::bigint::BigInt;
use num::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Color counts of an unordered sample: nonnegative entries summing to the
/// sample size.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SimplexPoint(pub Vec<u32>);

impl SimplexPoint {
    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    pub fn colors(&self) -> usize {
        self.0.len()
    }

    pub fn sum(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `m * e_i` for 0-based color `i`.
    pub fn extreme(r: usize, m: u32, i: usize) -> Self {
        let mut v = vec![0; r];
        v[i] = m;
        SimplexPoint(v)
    }

    pub fn is_extreme(&self) -> bool {
        self.0.iter().filter(|&&c| c > 0).count() <= 1
    }
}

impl std::fmt::Display for SimplexPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "({})",
            self.0
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(",")
        )
    }
}

/// Ordered sample of `m` draws; entries are 1-based color indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DrawSequence(pub Vec<u32>);

impl DrawSequence {
    /// Validates entries against the color count.
    pub fn new(digits: Vec<u32>, r: usize) -> Result<Self> {
        if digits.is_empty() {
            return Err(Error::InvalidArgument(
                "draw sequence must not be empty".into(),
            ));
        }
        for &d in &digits {
            if d < 1 || d as usize > r {
                return Err(Error::InvalidArgument(format!(
                    "sequence entry {d} out of range 1..={r}"
                )));
            }
        }
        Ok(DrawSequence(digits))
    }

    pub fn digits(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The constant sequence `(i, ..., i)` for 1-based color `i`.
    pub fn constant(color: u32, m: usize) -> Self {
        DrawSequence(vec![color; m])
    }
}

impl std::fmt::Display for DrawSequence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "({})",
            self.0
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(",")
        )
    }
}

fn check_dims(r: usize, m: usize) -> Result<()> {
    if r < 2 {
        return Err(Error::InvalidDimension(format!(
            "need at least 2 colors, got {r}"
        )));
    }
    if m < 1 {
        return Err(Error::InvalidDimension(format!(
            "sample size must be at least 1, got {m}"
        )));
    }
    Ok(())
}

/// All count vectors of an unordered sample of size `m` over `r` colors, in
/// canonical order. Length is `C(r + m - 1, m)`.
pub fn enumerate_simplex(r: usize, m: usize) -> Result<Vec<SimplexPoint>> {
    check_dims(r, m)?;
    let mut out = Vec::new();
    let mut cur = vec![0u32; r];
    fill_simplex(&mut out, &mut cur, 0, m as u32, r);
    Ok(out)
}

fn fill_simplex(out: &mut Vec<SimplexPoint>, cur: &mut Vec<u32>, pos: usize, left: u32, r: usize) {
    if pos == r - 1 {
        cur[pos] = left;
        out.push(SimplexPoint(cur.clone()));
        return;
    }
    for v in (0..=left).rev() {
        cur[pos] = v;
        fill_simplex(out, cur, pos + 1, left - v, r);
    }
}

/// All `r^m` ordered samples in lexicographic order of their digit strings.
pub fn enumerate_sequences(r: usize, m: usize) -> Result<Vec<DrawSequence>> {
    check_dims(r, m)?;
    let total = (r as u128).checked_pow(m as u32).ok_or_else(|| {
        Error::InvalidDimension(format!("sequence space {r}^{m} does not fit in 128 bits"))
    })?;
    if total > (1 << 26) {
        return Err(Error::CapExceeded(format!(
            "sequence space {r}^{m} = {total} is too large to enumerate"
        )));
    }
    let mut out = Vec::with_capacity(total as usize);
    let mut cur = vec![1u32; m];
    loop {
        out.push(DrawSequence(cur.clone()));
        // next digit string, most significant first
        let mut pos = m;
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            if cur[pos] < r as u32 {
                cur[pos] += 1;
                for d in cur.iter_mut().skip(pos + 1) {
                    *d = 1;
                }
                break;
            }
        }
    }
}

/// Per-color counts of an ordered sample; projects the sequence space onto
/// the simplex. Panics when a digit exceeds `r` (broken `DrawSequence`
/// invariant).
pub fn multiplicity_vector(d: &DrawSequence, r: usize) -> SimplexPoint {
    let mut counts = vec![0u32; r];
    for &digit in d.digits() {
        counts[(digit - 1) as usize] += 1;
    }
    SimplexPoint(counts)
}

/// `m! / (k_1! ... k_r!)`; errors when the counts do not sum to `m`.
pub fn multinomial(m: usize, k: &SimplexPoint) -> Result<BigInt> {
    if k.sum() as usize != m {
        return Err(Error::InvalidArgument(format!(
            "multinomial: counts {k} sum to {}, expected {m}",
            k.sum()
        )));
    }
    let mut num = factorial(m as u64);
    for &c in k.counts() {
        num /= factorial(c as u64);
    }
    Ok(num)
}

/// `C(m - 1, k - e_i)` as a multinomial coefficient over the shifted count
/// vector; zero when `k_i = 0`.
pub fn multinomial_shifted(m: usize, k: &SimplexPoint, i: usize) -> Result<BigInt> {
    if k.counts()[i] == 0 {
        return Ok(BigInt::from(0));
    }
    let mut shifted = k.0.clone();
    shifted[i] -= 1;
    multinomial(m - 1, &SimplexPoint(shifted))
}

/// Falling factorial `x (x-1) ... (x-j+1)`; the empty product is 1.
pub fn falling_factorial(x: i64, j: u32) -> BigInt {
    let mut acc = BigInt::one();
    for step in 0..j {
        acc *= BigInt::from(x - step as i64);
    }
    acc
}

/// `C(n, k)` for `n >= 0`; zero when `k > n`.
pub fn binomial(n: i64, k: u32) -> Result<BigInt> {
    if n < 0 {
        return Err(Error::InvalidArgument(format!(
            "binomial: negative population {n}"
        )));
    }
    if k as i64 > n {
        return Ok(BigInt::from(0));
    }
    Ok(falling_factorial(n, k) / factorial(k as u64))
}

fn factorial(n: u64) -> BigInt {
    let mut acc = BigInt::one();
    for i in 2..=n {
        acc *= BigInt::from(i);
    }
    acc
}

/// `C(r + m - 1, m)`, the simplex size.
pub fn simplex_size(r: usize, m: usize) -> Result<BigInt> {
    check_dims(r, m)?;
    binomial((r + m - 1) as i64, m as u32)
}
