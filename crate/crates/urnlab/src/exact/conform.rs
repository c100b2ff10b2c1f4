//! Resolves the covariance-recurrence constants against the enumeration
//! oracle and reports the outcome.
//!
//! Every applicable [`CovarianceConstant`] candidate is run through the
//! recurrence and compared, step by step and with exact equality, to the
//! covariance of the enumerated distribution. Candidates whose coefficient
//! values coincide on the given model (for example at `m = 1`, where the
//! two unordered readings agree) are grouped, and the run is conclusive
//! when exactly one group matches.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::exact::moments::{
    covariance_trajectory_with, enumerate_moments, mean_trajectory, CovarianceConstant,
};
use crate::model::{Scheme, UrnModel};
use crate::Rational;

/// Outcome for one constant candidate.
#[derive(Debug, Clone)]
pub struct CandidateVerdict {
    pub constant: CovarianceConstant,
    pub matches: bool,
    pub first_mismatch_step: Option<usize>,
    /// Coefficient values `c_n` (or `d_n`) at steps `1..=N` on this model.
    pub coefficients: Vec<Rational>,
}

/// Full conformance report for one model.
#[derive(Debug, Clone)]
pub struct ConformReport {
    pub scheme: Scheme,
    pub steps: usize,
    /// Product-formula means agree with enumeration at every step.
    pub mean_matches: bool,
    pub candidates: Vec<CandidateVerdict>,
    /// Formula of the uniquely matching candidate group, when conclusive.
    pub resolved: Option<String>,
    /// The matching group held more than one (coinciding) candidate.
    pub degenerate: bool,
    pub notes: Vec<String>,
    /// The statically resolved constant per scheme, for reference.
    pub resolved_table: BTreeMap<String, String>,
    /// Exactly one candidate group matched and the means agreed.
    pub ok: bool,
}

impl ConformReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "scheme": self.scheme,
            "steps": self.steps,
            "mean_matches": self.mean_matches,
            "candidates": self.candidates.iter().map(|c| serde_json::json!({
                "formula": c.constant.formula(),
                "matches": c.matches,
                "first_mismatch_step": c.first_mismatch_step,
            })).collect::<Vec<_>>(),
            "resolved": self.resolved,
            "degenerate": self.degenerate,
            "notes": self.notes,
            "resolved_table": self.resolved_table,
            "ok": self.ok,
        })
    }
}

/// The statically resolved constants, one per scheme.
pub fn resolved_table() -> BTreeMap<String, String> {
    [Scheme::M, Scheme::R, Scheme::MSeq, Scheme::RSeq]
        .into_iter()
        .map(|s| {
            (
                s.to_string(),
                CovarianceConstant::resolved_for(s).formula().to_string(),
            )
        })
        .collect()
}

/// Runs all candidates for the model's scheme against enumeration over
/// `1..=steps` and reports which reproduce it exactly.
pub fn run_conformance(model: &UrnModel, steps: usize, cap: usize) -> Result<ConformReport> {
    if steps < 1 {
        return Err(Error::InvalidArgument(
            "conformance needs at least one step".into(),
        ));
    }
    let scheme = model.scheme();
    let m = model.sample_size();
    let oracle = enumerate_moments::<Rational>(model, steps, cap)?;
    let means = mean_trajectory::<Rational>(model, steps)?;
    let mean_matches = means.iter().zip(&oracle).all(|(mu, state)| mu == &state.mu);

    let verdict = model.matrix().classify()?;
    let reduced = verdict
        .reduced
        .as_ref()
        .ok_or_else(|| Error::NotLinear("conformance needs a linear model".into()))?;
    let sigma = reduced.sigma();

    let mut candidates = Vec::new();
    let mut trajectories = Vec::new();
    for constant in CovarianceConstant::candidates_for(scheme) {
        let trajectory = covariance_trajectory_with::<Rational>(model, steps, cap, constant)?;
        let mut first_mismatch_step = None;
        for (state, truth) in trajectory.iter().zip(&oracle) {
            if state.sigma != truth.sigma {
                first_mismatch_step = Some(state.step);
                break;
            }
        }
        let coefficients = (1..=steps)
            .map(|n| constant.coefficient(m, model.total_at(n - 1, sigma)))
            .collect();
        candidates.push(CandidateVerdict {
            constant,
            matches: first_mismatch_step.is_none(),
            first_mismatch_step,
            coefficients,
        });
        trajectories.push(trajectory);
    }

    // Candidates that produce the same covariance sequence on this model
    // are indistinguishable here; group them. With exact comparisons two
    // groups cannot both match, so a second matching group exposes a
    // comparison bug.
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for idx in 0..candidates.len() {
        let same = groups.iter_mut().find(|members| {
            let rep = members[0];
            trajectories[rep]
                .iter()
                .zip(&trajectories[idx])
                .all(|(a, b)| a.sigma == b.sigma)
        });
        match same {
            Some(members) => members.push(idx),
            None => groups.push(vec![idx]),
        }
    }

    let matching_groups: Vec<&Vec<usize>> = groups
        .iter()
        .filter(|members| candidates[members[0]].matches)
        .collect();

    let mut notes = Vec::new();
    for members in &groups {
        if members.len() > 1 {
            let names: Vec<&str> = members
                .iter()
                .map(|&i| candidates[i].constant.formula())
                .collect();
            let coefficients_agree = members
                .iter()
                .all(|&i| candidates[i].coefficients == candidates[members[0]].coefficients);
            if coefficients_agree {
                notes.push(format!(
                    "candidates {{{}}} evaluate identically on this model (m = {m})",
                    names.join("; ")
                ));
            } else {
                notes.push(format!(
                    "candidates {{{}}} have different constants but identical moment \
                     sequences on this model; it does not discriminate between them",
                    names.join("; ")
                ));
            }
        }
    }

    let (resolved, degenerate) = match matching_groups.as_slice() {
        [members] => {
            let default = CovarianceConstant::resolved_for(scheme);
            let formula = if members.iter().any(|&i| candidates[i].constant == default) {
                default.formula().to_string()
            } else {
                notes.push(format!(
                    "matching candidate differs from the resolved default {}",
                    default.formula()
                ));
                candidates[members[0]].constant.formula().to_string()
            };
            (Some(formula), members.len() > 1)
        }
        [] => {
            notes.push("no candidate reproduces the enumerated covariance".into());
            (None, false)
        }
        _ => {
            notes.push(
                "candidates with different covariance sequences both match enumeration; \
                 this indicates a comparison bug"
                    .into(),
            );
            (None, false)
        }
    };

    if !mean_matches {
        notes.push("product-formula mean disagrees with enumeration".into());
    }

    let ok = resolved.is_some()
        && mean_matches
        && resolved.as_deref() == Some(CovarianceConstant::resolved_for(scheme).formula());

    Ok(ConformReport {
        scheme,
        steps,
        mean_matches,
        candidates,
        resolved,
        degenerate,
        notes,
        resolved_table: resolved_table(),
        ok,
    })
}
