//! Urn model definition, validation, linearity classification and synthesis.
//!
//! A model couples a replacement matrix (one integer addition row per
//! possible sample index) with an initial composition. Four sampling
//! schemes are supported: unordered samples drawn without (`M`) or with
//! (`R`) replacement, and their ordered counterparts (`MSEQ`, `RSEQ`).
//!
//! Validation is layered: integrality (when expanding a reduced matrix),
//! then balance, then tenability. Tenability violations never block
//! construction; they are reported and the simulation engine refuses to
//! run such models.

use std::collections::HashMap;

use num::bigint::BigInt;
use num::rational::Ratio;
use num::Zero;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{
    enumerate_sequences, enumerate_simplex, multinomial_shifted, multiplicity_vector, DrawSequence,
    SimplexPoint,
};
use crate::error::{Error, Result};
use crate::scalar::ratio_string;
use crate::Rational;

/// Sampling scheme tag.
///
/// `M`/`R` index replacement rows by the count vector of an unordered
/// sample; `MSEQ`/`RSEQ` index them by the full draw sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    M,
    R,
    #[serde(rename = "MSEQ")]
    MSeq,
    #[serde(rename = "RSEQ")]
    RSeq,
}

impl Scheme {
    pub fn is_ordered(self) -> bool {
        matches!(self, Scheme::MSeq | Scheme::RSeq)
    }

    /// True for the with-replacement schemes `R` and `RSEQ`.
    pub fn with_replacement(self) -> bool {
        matches!(self, Scheme::R | Scheme::RSeq)
    }

    /// The ordered counterpart of an unordered scheme.
    pub fn ordered_counterpart(self) -> Scheme {
        match self {
            Scheme::M => Scheme::MSeq,
            Scheme::R => Scheme::RSeq,
            s => s,
        }
    }

    /// The unordered scheme with the same replacement behavior.
    pub fn unordered_counterpart(self) -> Scheme {
        match self {
            Scheme::MSeq => Scheme::M,
            Scheme::RSeq => Scheme::R,
            s => s,
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Scheme::M => "M",
            Scheme::R => "R",
            Scheme::MSeq => "MSEQ",
            Scheme::RSeq => "RSEQ",
        };
        f.write_str(s)
    }
}

/// Ball counts per color. The total after `n` steps of a balanced model is
/// the deterministic `n * sigma + T_0`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Composition(pub Vec<i64>);

impl Composition {
    /// Validates nonnegativity.
    pub fn new(x: Vec<i64>) -> Result<Self> {
        if x.iter().any(|&v| v < 0) {
            return Err(Error::InvalidArgument(format!(
                "composition entries must be nonnegative, got {x:?}"
            )));
        }
        Ok(Composition(x))
    }

    pub fn counts(&self) -> &[i64] {
        &self.0
    }

    pub fn colors(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> i64 {
        self.0.iter().sum()
    }

    /// Adds a replacement row with overflow checking. The result may be
    /// negative; callers decide whether that is a fault.
    pub fn apply(&self, row: &[i64]) -> Result<Composition> {
        let mut out = Vec::with_capacity(self.0.len());
        for (x, a) in self.0.iter().zip(row) {
            let v = x.checked_add(*a).ok_or_else(|| {
                Error::Overflow(format!("count {x} + {a} leaves the 64-bit range"))
            })?;
            out.push(v);
        }
        Ok(Composition(out))
    }

    pub fn min_count(&self) -> i64 {
        self.0.iter().copied().min().unwrap_or(0)
    }
}

impl std::fmt::Display for Composition {
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

/// Scheme-tagged table of replacement rows, stored in the canonical index
/// order of the scheme's index space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplacementMatrix {
    scheme: Scheme,
    r: usize,
    m: usize,
    rows: Vec<Vec<i64>>,
    simplex: Vec<SimplexPoint>,
    simplex_pos: HashMap<Vec<u32>, usize>,
    sequences: Vec<DrawSequence>,
    sequence_pos: HashMap<Vec<u32>, usize>,
    /// For ordered schemes: position of `j(d)` in the simplex, per row.
    seq_mult: Vec<usize>,
}

impl ReplacementMatrix {
    /// Builds from rows listed in canonical index order.
    pub fn from_canonical_rows(
        scheme: Scheme,
        r: usize,
        m: usize,
        rows: Vec<Vec<i64>>,
    ) -> Result<Self> {
        let simplex = enumerate_simplex(r, m)?;
        let (sequences, seq_mult);
        let expected = if scheme.is_ordered() {
            sequences = enumerate_sequences(r, m)?;
            let simplex_pos: HashMap<_, _> = simplex
                .iter()
                .enumerate()
                .map(|(i, k)| (k.0.clone(), i))
                .collect();
            seq_mult = sequences
                .iter()
                .map(|d| simplex_pos[&multiplicity_vector(d, r).0])
                .collect();
            sequences.len()
        } else {
            sequences = Vec::new();
            seq_mult = Vec::new();
            simplex.len()
        };
        if rows.len() != expected {
            return Err(Error::InvalidArgument(format!(
                "expected {expected} rows for scheme {scheme} with r={r}, m={m}, got {}",
                rows.len()
            )));
        }
        for row in &rows {
            if row.len() != r {
                return Err(Error::InvalidArgument(format!(
                    "replacement row {row:?} must have {r} entries"
                )));
            }
        }
        let simplex_pos = simplex
            .iter()
            .enumerate()
            .map(|(i, k)| (k.0.clone(), i))
            .collect();
        let sequence_pos = sequences
            .iter()
            .enumerate()
            .map(|(i, d)| (d.0.clone(), i))
            .collect();
        Ok(ReplacementMatrix {
            scheme,
            r,
            m,
            rows,
            simplex,
            simplex_pos,
            sequences,
            sequence_pos,
            seq_mult,
        })
    }

    /// Builds from `(index, row)` pairs in any order; the index set must be
    /// covered exactly once.
    pub fn from_entries(
        scheme: Scheme,
        r: usize,
        m: usize,
        entries: &[(Vec<u32>, Vec<i64>)],
    ) -> Result<Self> {
        let template = Self::from_canonical_rows(
            scheme,
            r,
            m,
            vec![
                vec![0; r];
                if scheme.is_ordered() {
                    enumerate_sequences(r, m)?.len()
                } else {
                    enumerate_simplex(r, m)?.len()
                }
            ],
        )?;
        let mut rows: Vec<Option<Vec<i64>>> = vec![None; template.rows.len()];
        for (index, add) in entries {
            let pos = if scheme.is_ordered() {
                // validate digits against r
                DrawSequence::new(index.clone(), r).map_err(|_| {
                    Error::InvalidArgument(format!(
                        "index {index:?} is not a valid sequence for r={r}, m={m}"
                    ))
                })?;
                template.sequence_pos.get(index.as_slice()).copied()
            } else {
                template.simplex_pos.get(index.as_slice()).copied()
            };
            let pos = pos.ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "index {index:?} is not in the index set for scheme {scheme}, r={r}, m={m}"
                ))
            })?;
            if rows[pos].is_some() {
                return Err(Error::InvalidArgument(format!(
                    "index {index:?} appears more than once"
                )));
            }
            if add.len() != r {
                return Err(Error::InvalidArgument(format!(
                    "replacement row {add:?} must have {r} entries"
                )));
            }
            rows[pos] = Some(add.clone());
        }
        let rows: Result<Vec<Vec<i64>>> = rows
            .into_iter()
            .enumerate()
            .map(|(pos, row)| {
                row.ok_or_else(|| {
                    let missing = if scheme.is_ordered() {
                        format!("{}", template.sequences[pos])
                    } else {
                        format!("{}", template.simplex[pos])
                    };
                    Error::InvalidArgument(format!("missing replacement row for index {missing}"))
                })
            })
            .collect();
        Self::from_canonical_rows(scheme, r, m, rows?)
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn colors(&self) -> usize {
        self.r
    }

    pub fn sample_size(&self) -> usize {
        self.m
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.rows
    }

    pub fn simplex_points(&self) -> &[SimplexPoint] {
        &self.simplex
    }

    /// Empty for unordered schemes.
    pub fn sequences(&self) -> &[DrawSequence] {
        &self.sequences
    }

    pub fn row_for_simplex(&self, k: &SimplexPoint) -> Option<&[i64]> {
        if self.scheme.is_ordered() {
            return None;
        }
        self.simplex_pos
            .get(k.counts())
            .map(|&i| self.rows[i].as_slice())
    }

    pub fn row_for_sequence(&self, d: &DrawSequence) -> Option<&[i64]> {
        self.sequence_pos
            .get(d.digits())
            .map(|&i| self.rows[i].as_slice())
    }

    /// Simplex position of row `idx`'s multiplicity vector.
    pub fn multiplicity_index(&self, idx: usize) -> usize {
        if self.scheme.is_ordered() {
            self.seq_mult[idx]
        } else {
            idx
        }
    }

    fn index_label(&self, idx: usize) -> String {
        if self.scheme.is_ordered() {
            format!("{}", self.sequences[idx])
        } else {
            format!("{}", self.simplex[idx])
        }
    }

    /// Returns the common row sum `sigma > 0`.
    pub fn validate_balance(&self) -> Result<i64> {
        let mut sigma: Option<i64> = None;
        for (idx, row) in self.rows.iter().enumerate() {
            let sum: i128 = row.iter().map(|&v| v as i128).sum();
            let sum = i64::try_from(sum)
                .map_err(|_| Error::Overflow(format!("row sum of {row:?} overflows")))?;
            match sigma {
                None => sigma = Some(sum),
                Some(s) if s != sum => {
                    return Err(Error::Unbalanced(format!(
                        "row {} sums to {sum}, earlier rows sum to {s}",
                        self.index_label(idx)
                    )));
                }
                _ => {}
            }
        }
        let sigma = sigma.ok_or_else(|| Error::Internal("matrix has no rows".into()))?;
        if sigma <= 0 {
            return Err(Error::NonpositiveBalance(sigma));
        }
        Ok(sigma)
    }

    /// Checks that no row can remove balls that were not drawn (schemes
    /// `M`/`MSEQ`) or more than one per color, none for undrawn colors
    /// (schemes `R`/`RSEQ`). Ordered rows are checked individually against
    /// their multiplicity vector; this is the conservative per-row reading,
    /// stricter than constraining only class sums.
    pub fn validate_tenability(&self) -> TenabilityReport {
        let mut violations = Vec::new();
        for (idx, row) in self.rows.iter().enumerate() {
            let k = &self.simplex[self.multiplicity_index(idx)];
            for (color, (&a, &kc)) in row.iter().zip(k.counts()).enumerate() {
                let required = if self.scheme.with_replacement() {
                    if kc > 0 {
                        -1
                    } else {
                        0
                    }
                } else {
                    -(kc as i64)
                };
                if a < required {
                    violations.push(TenabilityViolation {
                        index: self.index_label(idx),
                        color: color + 1,
                        entry: a,
                        required,
                    });
                }
            }
        }
        TenabilityReport {
            tenable: violations.is_empty(),
            violations,
        }
    }

    /// Linearity test for unordered schemes: every row must be the affine
    /// combination of the extreme rows weighted by `k_i / m`, checked in
    /// exact rational arithmetic.
    pub fn classify_unordered(&self) -> Result<LinearVerdict> {
        if self.scheme.is_ordered() {
            return Err(Error::InvalidArgument(format!(
                "classify_unordered called on ordered scheme {}",
                self.scheme
            )));
        }
        self.validate_balance()?;
        let extreme: Vec<&[i64]> = (0..self.r)
            .map(|i| {
                self.row_for_simplex(&SimplexPoint::extreme(self.r, self.m as u32, i))
                    .expect("extreme simplex point must be covered")
            })
            .collect();
        let mut violations = Vec::new();
        for (idx, k) in self.simplex.iter().enumerate() {
            let actual = &self.rows[idx];
            let mut expected = Vec::with_capacity(self.r);
            for j in 0..self.r {
                let num: i128 = k
                    .counts()
                    .iter()
                    .enumerate()
                    .map(|(i, &kc)| kc as i128 * extreme[i][j] as i128)
                    .sum();
                expected.push(Ratio::new(BigInt::from(num), BigInt::from(self.m as i64)));
            }
            let matches = expected
                .iter()
                .zip(actual)
                .all(|(e, &a)| e == &Rational::from(BigInt::from(a)));
            if !matches {
                violations.push(LinearityViolation {
                    at: k.clone(),
                    lhs: expected,
                    rhs: actual
                        .iter()
                        .map(|&a| Rational::from(BigInt::from(a)))
                        .collect(),
                });
            }
        }
        let reduced = if violations.is_empty() {
            Some(ReducedMatrix::new(
                extreme.iter().map(|r| r.to_vec()).collect(),
            )?)
        } else {
            None
        };
        Ok(LinearVerdict {
            linear: violations.is_empty(),
            reduced,
            violations,
        })
    }

    /// Linearity test for ordered schemes: for every count vector `k`, the
    /// rows of the sequences with multiplicity `k` must sum to the binomial
    /// combination of the constant-sequence rows.
    pub fn classify_ordered(&self) -> Result<LinearVerdict> {
        if !self.scheme.is_ordered() {
            return Err(Error::InvalidArgument(format!(
                "classify_ordered called on unordered scheme {}",
                self.scheme
            )));
        }
        self.validate_balance()?;
        let constant: Vec<&[i64]> = (1..=self.r as u32)
            .map(|i| {
                self.row_for_sequence(&DrawSequence::constant(i, self.m))
                    .expect("constant sequence must be covered")
            })
            .collect();
        let mut violations = Vec::new();
        for (kidx, k) in self.simplex.iter().enumerate() {
            let mut lhs = vec![BigInt::zero(); self.r];
            for (idx, row) in self.rows.iter().enumerate() {
                if self.seq_mult[idx] == kidx {
                    for (j, &a) in row.iter().enumerate() {
                        lhs[j] += BigInt::from(a);
                    }
                }
            }
            let mut rhs = vec![BigInt::zero(); self.r];
            for i in 0..self.r {
                let weight = multinomial_shifted(self.m, k, i)?;
                for (j, &a) in constant[i].iter().enumerate() {
                    rhs[j] += &weight * BigInt::from(a);
                }
            }
            if lhs != rhs {
                violations.push(LinearityViolation {
                    at: k.clone(),
                    lhs: lhs.into_iter().map(Rational::from).collect(),
                    rhs: rhs.into_iter().map(Rational::from).collect(),
                });
            }
        }
        let reduced = if violations.is_empty() {
            Some(ReducedMatrix::new(
                constant.iter().map(|r| r.to_vec()).collect(),
            )?)
        } else {
            None
        };
        Ok(LinearVerdict {
            linear: violations.is_empty(),
            reduced,
            violations,
        })
    }

    /// Scheme-dispatching linearity test.
    pub fn classify(&self) -> Result<LinearVerdict> {
        if self.scheme.is_ordered() {
            self.classify_ordered()
        } else {
            self.classify_unordered()
        }
    }

    /// Embeds an unordered model into the ordered scheme with the same
    /// replacement behavior: the row of a sequence is the row of its
    /// multiplicity vector.
    pub fn embed_ordered(&self) -> Result<ReplacementMatrix> {
        if self.scheme.is_ordered() {
            return Err(Error::InvalidArgument(
                "embed_ordered expects an unordered matrix".into(),
            ));
        }
        let sequences = enumerate_sequences(self.r, self.m)?;
        let rows = sequences
            .iter()
            .map(|d| {
                self.row_for_simplex(&multiplicity_vector(d, self.r))
                    .expect("multiplicity of a valid sequence is covered")
                    .to_vec()
            })
            .collect();
        Self::from_canonical_rows(self.scheme.ordered_counterpart(), self.r, self.m, rows)
    }
}

/// Row-level tenability diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct TenabilityReport {
    pub tenable: bool,
    pub violations: Vec<TenabilityViolation>,
}

/// One entry that can force removing absent balls.
#[derive(Debug, Clone, Serialize)]
pub struct TenabilityViolation {
    /// Display form of the offending row's index.
    pub index: String,
    /// 1-based color.
    pub color: usize,
    pub entry: i64,
    pub required: i64,
}

/// Outcome of a linearity test, with per-index diagnostics when the test
/// fails.
#[derive(Debug, Clone)]
pub struct LinearVerdict {
    pub linear: bool,
    /// The reduced matrix generating the model; present only when linear.
    pub reduced: Option<ReducedMatrix>,
    pub violations: Vec<LinearityViolation>,
}

/// A count vector where the linearity condition fails, with both sides of
/// the defining equation. For unordered schemes `lhs` is the affine
/// combination of extreme rows and `rhs` the stored row; for ordered
/// schemes `lhs` is the class sum and `rhs` the binomial combination of
/// constant-sequence rows.
#[derive(Debug, Clone)]
pub struct LinearityViolation {
    pub at: SimplexPoint,
    pub lhs: Vec<Rational>,
    pub rhs: Vec<Rational>,
}

impl LinearVerdict {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "linear": self.linear,
            "reduced": self.reduced.as_ref().map(|a| a.rows().to_vec()),
            "sigma": self.reduced.as_ref().map(|a| a.sigma()),
            "violations": self.violations.iter().map(|v| serde_json::json!({
                "index": v.at.counts(),
                "lhs": v.lhs.iter().map(ratio_string).collect::<Vec<_>>(),
                "rhs": v.rhs.iter().map(ratio_string).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })
    }
}

/// The `r x r` matrix of extreme (unordered) or constant-sequence (ordered)
/// rows that generates a linear model; every row sums to the balance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReducedMatrix {
    rows: Vec<Vec<i64>>,
    sigma: i64,
}

impl ReducedMatrix {
    pub fn new(rows: Vec<Vec<i64>>) -> Result<Self> {
        let r = rows.len();
        if r < 2 {
            return Err(Error::InvalidDimension(format!(
                "reduced matrix needs at least 2 rows, got {r}"
            )));
        }
        let mut sigma: Option<i64> = None;
        for row in &rows {
            if row.len() != r {
                return Err(Error::InvalidDimension(format!(
                    "reduced matrix must be square; row {row:?} has {} entries, expected {r}",
                    row.len()
                )));
            }
            let sum: i64 = row.iter().sum();
            match sigma {
                None => sigma = Some(sum),
                Some(s) if s != sum => {
                    return Err(Error::Unbalanced(format!(
                        "reduced row {row:?} sums to {sum}, earlier rows sum to {s}"
                    )));
                }
                _ => {}
            }
        }
        let sigma = sigma.unwrap();
        if sigma <= 0 {
            return Err(Error::NonpositiveBalance(sigma));
        }
        Ok(ReducedMatrix { rows, sigma })
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.rows
    }

    pub fn colors(&self) -> usize {
        self.rows.len()
    }

    pub fn sigma(&self) -> i64 {
        self.sigma
    }

    /// Expands to the full unordered replacement matrix with rows
    /// `a_k = sum_i (k_i / m) A_i`. Fails when any produced row is not an
    /// integer vector; nothing is rounded.
    pub fn expand_unordered(&self, m: usize, scheme: Scheme) -> Result<ReplacementMatrix> {
        if scheme.is_ordered() {
            return Err(Error::InvalidArgument(
                "expand_unordered expects scheme M or R".into(),
            ));
        }
        let r = self.colors();
        let simplex = enumerate_simplex(r, m)?;
        let mut rows = Vec::with_capacity(simplex.len());
        for k in &simplex {
            let mut row = Vec::with_capacity(r);
            for j in 0..r {
                let num: i128 = k
                    .counts()
                    .iter()
                    .enumerate()
                    .map(|(i, &kc)| kc as i128 * self.rows[i][j] as i128)
                    .sum();
                if num % m as i128 != 0 {
                    return Err(Error::NonIntegral(format!(
                        "row at {k} has entry {num}/{m} for color {}",
                        j + 1
                    )));
                }
                let v = i64::try_from(num / m as i128)
                    .map_err(|_| Error::Overflow(format!("expanded entry at {k} overflows")))?;
                row.push(v);
            }
            rows.push(row);
        }
        ReplacementMatrix::from_canonical_rows(scheme, r, m, rows)
    }

    /// Builds an ordered model whose rows all come from this matrix,
    /// reproducing single-draw dynamics at sample size `m`: within the
    /// sequence class of each count vector `k`, walked in canonical order,
    /// the first `C(m-1, k - e_1)` sequences get row 1, the next
    /// `C(m-1, k - e_2)` row 2, and so on.
    pub fn embed_m1(&self, m: usize, scheme: Scheme) -> Result<ReplacementMatrix> {
        if !scheme.is_ordered() {
            return Err(Error::InvalidArgument(
                "embed_m1 produces an ordered scheme; pass MSEQ or RSEQ".into(),
            ));
        }
        let r = self.colors();
        let simplex = enumerate_simplex(r, m)?;
        let sequences = enumerate_sequences(r, m)?;
        let mut rows: Vec<Option<Vec<i64>>> = vec![None; sequences.len()];
        for k in &simplex {
            let class: Vec<usize> = sequences
                .iter()
                .enumerate()
                .filter(|(_, d)| multiplicity_vector(d, r) == *k)
                .map(|(idx, _)| idx)
                .collect();
            let mut cursor = 0usize;
            for i in 0..r {
                let block = multinomial_shifted(m, k, i)?;
                let block = usize::try_from(block.clone()).map_err(|_| {
                    Error::Internal(format!("block size {block} does not fit in usize"))
                })?;
                for _ in 0..block {
                    if cursor >= class.len() {
                        return Err(Error::Internal(format!(
                            "block sizes at {k} exceed the class size {}",
                            class.len()
                        )));
                    }
                    rows[class[cursor]] = Some(self.rows[i].clone());
                    cursor += 1;
                }
            }
            if cursor != class.len() {
                return Err(Error::Internal(format!(
                    "block sizes at {k} cover {cursor} of {} sequences",
                    class.len()
                )));
            }
        }
        let rows: Vec<Vec<i64>> = rows
            .into_iter()
            .map(|r| r.expect("every sequence belongs to exactly one class"))
            .collect();
        ReplacementMatrix::from_canonical_rows(scheme, r, m, rows)
    }
}

/// A replacement matrix together with an initial composition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UrnModel {
    matrix: ReplacementMatrix,
    initial: Composition,
}

impl UrnModel {
    /// Requires matching color counts and an initial total of at least `m`
    /// so the first sample is drawable under every scheme.
    pub fn new(matrix: ReplacementMatrix, initial: Composition) -> Result<Self> {
        if initial.colors() != matrix.colors() {
            return Err(Error::InvalidDimension(format!(
                "initial composition has {} colors, matrix has {}",
                initial.colors(),
                matrix.colors()
            )));
        }
        Composition::new(initial.0.clone())?;
        if initial.total() < matrix.sample_size() as i64 {
            return Err(Error::InvalidArgument(format!(
                "initial total {} is smaller than the sample size {}",
                initial.total(),
                matrix.sample_size()
            )));
        }
        Ok(UrnModel { matrix, initial })
    }

    pub fn matrix(&self) -> &ReplacementMatrix {
        &self.matrix
    }

    pub fn initial(&self) -> &Composition {
        &self.initial
    }

    pub fn colors(&self) -> usize {
        self.matrix.colors()
    }

    pub fn sample_size(&self) -> usize {
        self.matrix.sample_size()
    }

    pub fn scheme(&self) -> Scheme {
        self.matrix.scheme()
    }

    pub fn total0(&self) -> i64 {
        self.initial.total()
    }

    /// Deterministic total after `n` steps, `n * sigma + T_0`.
    pub fn total_at(&self, n: usize, sigma: i64) -> i64 {
        n as i64 * sigma + self.total0()
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    colors: usize,
    sample_size: usize,
    scheme: Scheme,
    initial: Vec<i64>,
    #[serde(default)]
    rows: Option<Vec<RowEntry>>,
    #[serde(default)]
    reduced: Option<Vec<Vec<i64>>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RowEntry {
    index: Vec<u32>,
    add: Vec<i64>,
}

impl UrnModel {
    /// Parses the JSON model format. Rows may appear in any order but must
    /// cover the index set exactly once; alternatively a linear model is
    /// given as `"reduced"` and expanded (ordered schemes expand through
    /// the unordered affine rows and the multiplicity embedding).
    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        let matrix = match (file.rows, file.reduced) {
            (Some(_), Some(_)) => {
                return Err(Error::Parse(
                    "model file must give either \"rows\" or \"reduced\", not both".into(),
                ))
            }
            (None, None) => {
                return Err(Error::Parse(
                    "model file must give \"rows\" or \"reduced\"".into(),
                ))
            }
            (Some(rows), None) => {
                let entries: Vec<(Vec<u32>, Vec<i64>)> =
                    rows.into_iter().map(|e| (e.index, e.add)).collect();
                ReplacementMatrix::from_entries(
                    file.scheme,
                    file.colors,
                    file.sample_size,
                    &entries,
                )
                .map_err(|e| match e {
                    Error::InvalidArgument(msg) | Error::InvalidDimension(msg) => Error::Parse(msg),
                    other => other,
                })?
            }
            (None, Some(reduced)) => {
                let a = ReducedMatrix::new(reduced)?;
                if a.colors() != file.colors {
                    return Err(Error::Parse(format!(
                        "reduced matrix has {} rows, \"colors\" says {}",
                        a.colors(),
                        file.colors
                    )));
                }
                let unordered =
                    a.expand_unordered(file.sample_size, file.scheme.unordered_counterpart())?;
                if file.scheme.is_ordered() {
                    unordered.embed_ordered()?
                } else {
                    unordered
                }
            }
        };
        let initial = Composition::new(file.initial).map_err(|e| match e {
            Error::InvalidArgument(msg) => Error::Parse(msg),
            other => other,
        })?;
        UrnModel::new(matrix, initial).map_err(|e| match e {
            Error::InvalidArgument(msg) | Error::InvalidDimension(msg) => Error::Parse(msg),
            other => other,
        })
    }

    pub fn from_json_file(path: &std::path::Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&s)
    }

    /// Canonical JSON form with rows in index order.
    pub fn to_json_value(&self) -> serde_json::Value {
        let m = &self.matrix;
        let rows: Vec<serde_json::Value> = m
            .rows
            .iter()
            .enumerate()
            .map(|(idx, row)| {
                let index: Vec<u32> = if m.scheme.is_ordered() {
                    m.sequences[idx].0.clone()
                } else {
                    m.simplex[idx].0.clone()
                };
                serde_json::json!({ "index": index, "add": row })
            })
            .collect();
        serde_json::json!({
            "colors": m.r,
            "sample_size": m.m,
            "scheme": m.scheme,
            "initial": self.initial.0,
            "rows": rows,
        })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("model JSON serializes")
    }
}
