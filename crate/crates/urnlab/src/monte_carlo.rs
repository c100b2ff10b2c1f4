//! Path simulation at scales beyond enumeration.
//!
//! Reproducibility contract: path `p` always draws from `stream(seed, p)`,
//! so a summary depends on `(model, steps, runs, seed)` only — the worker
//! count partitions the path set without changing any sample. Workers own
//! their accumulators and are merged in worker order.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::model::{Composition, UrnModel};
use crate::sampling::{stream, Sample, SampleLaw};

/// What to simulate and how.
#[derive(Debug, Clone)]
pub struct SimulationPlan {
    pub model: UrnModel,
    pub steps: usize,
    pub runs: u64,
    pub seed: u64,
    pub workers: usize,
}

/// Integer accumulators for one step across paths.
#[derive(Debug, Clone)]
struct StepAccum {
    sum: Vec<i128>,
    sum_sq: Vec<Vec<i128>>,
    min: Vec<i64>,
    max: Vec<i64>,
}

impl StepAccum {
    fn new(r: usize) -> Self {
        StepAccum {
            sum: vec![0; r],
            sum_sq: vec![vec![0; r]; r],
            min: vec![i64::MAX; r],
            max: vec![i64::MIN; r],
        }
    }

    fn absorb(&mut self, x: &Composition) {
        let c = x.counts();
        for i in 0..c.len() {
            self.sum[i] += c[i] as i128;
            self.min[i] = self.min[i].min(c[i]);
            self.max[i] = self.max[i].max(c[i]);
            for j in 0..c.len() {
                self.sum_sq[i][j] += c[i] as i128 * c[j] as i128;
            }
        }
    }

    fn merge(&mut self, other: &StepAccum) {
        for i in 0..self.sum.len() {
            self.sum[i] += other.sum[i];
            self.min[i] = self.min[i].min(other.min[i]);
            self.max[i] = self.max[i].max(other.max[i]);
            for j in 0..self.sum.len() {
                self.sum_sq[i][j] += other.sum_sq[i][j];
            }
        }
    }
}

/// Per-step ensemble statistics. Integer sums are kept so that exactness
/// checks (such as the deterministic total) need no floating point.
#[derive(Debug, Clone)]
pub struct SimulationSummary {
    pub steps: usize,
    pub runs: u64,
    pub seed: u64,
    pub workers: usize,
    per_step: Vec<StepAccum>,
    pub wall_ms: u64,
}

impl SimulationSummary {
    pub fn colors(&self) -> usize {
        self.per_step[0].sum.len()
    }

    /// Exact per-color sums over all paths at `step`.
    pub fn sums(&self, step: usize) -> &[i128] {
        &self.per_step[step].sum
    }

    pub fn min_counts(&self, step: usize) -> &[i64] {
        &self.per_step[step].min
    }

    pub fn max_counts(&self, step: usize) -> &[i64] {
        &self.per_step[step].max
    }

    /// Empirical mean at `step`.
    pub fn mean(&self, step: usize) -> Vec<f64> {
        self.per_step[step]
            .sum
            .iter()
            .map(|&s| s as f64 / self.runs as f64)
            .collect()
    }

    /// Empirical covariance at `step` (population form, divisor `runs`).
    pub fn covariance(&self, step: usize) -> Vec<Vec<f64>> {
        let r = self.colors();
        let n = self.runs as f64;
        let mean = self.mean(step);
        let acc = &self.per_step[step];
        (0..r)
            .map(|i| {
                (0..r)
                    .map(|j| acc.sum_sq[i][j] as f64 / n - mean[i] * mean[j])
                    .collect()
            })
            .collect()
    }

    /// The summary interchange format; mean and covariance are taken at the
    /// final step.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "steps": self.steps,
            "runs": self.runs,
            "seed": self.seed,
            "mean": self.mean(self.steps),
            "cov": self.covariance(self.steps),
            "wall_ms": self.wall_ms,
        })
    }

    /// Per-step CSV: `step,mean1..meanr,cov11..covrr`.
    pub fn to_csv(&self) -> String {
        let r = self.colors();
        let mut out = String::from("step");
        for i in 1..=r {
            out.push_str(&format!(",mean{i}"));
        }
        for i in 1..=r {
            for j in 1..=r {
                out.push_str(&format!(",cov{i}{j}"));
            }
        }
        out.push('\n');
        for step in 0..=self.steps {
            out.push_str(&step.to_string());
            for v in self.mean(step) {
                out.push_str(&format!(",{v}"));
            }
            for row in self.covariance(step) {
                for v in row {
                    out.push_str(&format!(",{v}"));
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Simulates one path `X_0 .. X_n`, drawing each step's sample and adding
/// the indexed replacement row. A negative count aborts: the tenability
/// checker admitted a model it should not have.
pub fn run_path<R: rand::Rng + ?Sized>(
    model: &UrnModel,
    steps: usize,
    rng: &mut R,
) -> Result<Vec<Composition>> {
    let matrix = model.matrix();
    let mut out = Vec::with_capacity(steps + 1);
    out.push(model.initial().clone());
    for _ in 0..steps {
        let current = out.last().expect("path is nonempty");
        let law = SampleLaw::for_model(model, current)?;
        let row = match law.draw(rng)? {
            Sample::Unordered(k) => matrix
                .row_for_simplex(&k)
                .ok_or_else(|| Error::Internal(format!("no row for drawn sample {k}")))?,
            Sample::Ordered(d) => matrix
                .row_for_sequence(&d)
                .ok_or_else(|| Error::Internal(format!("no row for drawn sample {d}")))?,
        };
        let next = current.apply(row)?;
        if next.min_count() < 0 {
            return Err(Error::TenabilityFault(format!(
                "path reached {next} from {current}"
            )));
        }
        out.push(next);
    }
    Ok(out)
}

/// Runs `plan.runs` independent paths and aggregates per-step statistics.
/// Deterministic for a fixed seed, independent of the worker count and of
/// scheduling.
pub fn run_ensemble(plan: &SimulationPlan) -> Result<SimulationSummary> {
    if plan.runs < 1 {
        return Err(Error::InvalidArgument("runs must be at least 1".into()));
    }
    if plan.workers < 1 {
        return Err(Error::InvalidArgument("workers must be at least 1".into()));
    }
    let report = plan.model.matrix().validate_tenability();
    if !report.tenable {
        return Err(Error::NotTenable(format!(
            "{} tenability violations; simulation refused",
            report.violations.len()
        )));
    }
    plan.model.matrix().validate_balance()?;

    let start = Instant::now();
    let r = plan.model.colors();
    let worker_results: Vec<Result<Vec<StepAccum>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..plan.workers)
            .map(|w| {
                let model = &plan.model;
                scope.spawn(move || {
                    let mut acc = vec![StepAccum::new(r); plan.steps + 1];
                    let mut p = w as u64;
                    while p < plan.runs {
                        let mut rng = stream(plan.seed, p);
                        let path = run_path(model, plan.steps, &mut rng)?;
                        for (step, x) in path.iter().enumerate() {
                            acc[step].absorb(x);
                        }
                        p += plan.workers as u64;
                    }
                    Ok(acc)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("simulation worker panicked"))
            .collect()
    });

    let mut per_step = vec![StepAccum::new(r); plan.steps + 1];
    for result in worker_results {
        let acc = result?;
        for (mine, theirs) in per_step.iter_mut().zip(&acc) {
            mine.merge(theirs);
        }
    }
    Ok(SimulationSummary {
        steps: plan.steps,
        runs: plan.runs,
        seed: plan.seed,
        workers: plan.workers,
        per_step,
        wall_ms: start.elapsed().as_millis() as u64,
    })
}
