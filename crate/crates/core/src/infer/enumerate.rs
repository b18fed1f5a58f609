//! Exact posterior by exhaustive enumeration of choice sequences.
//!
//! Paths are explored depth first: each run replays a prefix of choice
//! indices and takes the first positive-weight branch beyond it, and the next
//! prefix bumps the deepest choice that still has an untried branch.

use std::collections::{BTreeMap, HashMap};

use super::compile::CompiledProgram;
use super::error::{EnumerateError, InferError};
use super::eval::{Chooser, EnumPath, Halt, Trace};
use super::rejection::{query_record, PosteriorEstimate};
use super::value::Value;

pub const DEFAULT_MAX_TRACES: u64 = 1_000_000;

/// A finite distribution over the model's return values. Probabilities sum
/// to one and support values are pairwise distinct.
#[derive(Debug, Clone)]
pub struct ExactDistribution {
    pub support: Vec<(Value, f64)>,
}

impl ExactDistribution {
    /// Probability of `v` (zero when absent).
    pub fn probability(&self, v: &Value) -> f64 {
        let Some(key) = v.canonical_key() else {
            return 0.0;
        };
        self.support
            .iter()
            .filter(|(s, _)| s.canonical_key().as_deref() == Some(key.as_str()))
            .map(|(_, p)| p)
            .sum()
    }

    /// Marginal probability that query `label` takes the numeric value `x`.
    pub fn marginal(&self, label: &str, x: f64) -> f64 {
        self.support
            .iter()
            .filter(|(v, _)| match v {
                Value::Record(r) => r.get(label).and_then(Value::as_query_number) == Some(x),
                _ => false,
            })
            .map(|(_, p)| p)
            .sum()
    }

    /// Total variation distance between this distribution and the empirical
    /// joint distribution of `estimate`'s samples.
    pub fn tvd_to(&self, estimate: &PosteriorEstimate) -> Result<f64, InferError> {
        let mut exact: HashMap<String, f64> = HashMap::new();
        for (v, p) in &self.support {
            *exact.entry(joint_key(&query_record(v)?)).or_default() += p;
        }
        let mut empirical: HashMap<String, f64> = HashMap::new();
        let n = estimate.n_samples as f64;
        for i in 0..estimate.n_samples {
            let s: BTreeMap<String, f64> = estimate.sample(i).into_iter().map(|(k, v)| (k.to_string(), v)).collect();
            *empirical.entry(joint_key(&s)).or_default() += 1.0 / n;
        }
        let mut total = 0.0;
        for (k, p) in &exact {
            total += (p - empirical.get(k).copied().unwrap_or(0.0)).abs();
        }
        for (k, q) in &empirical {
            if !exact.contains_key(k) {
                total += q;
            }
        }
        Ok(0.5 * total)
    }
}

fn joint_key(r: &BTreeMap<String, f64>) -> String {
    r.iter().map(|(k, v)| format!("{k:?}={v}")).collect::<Vec<_>>().join(",")
}

pub fn enumerate_exact(program: &CompiledProgram) -> Result<ExactDistribution, EnumerateError> {
    enumerate_exact_with_limit(program, DEFAULT_MAX_TRACES)
}

/// As [`enumerate_exact`], failing once more than `max_traces` complete
/// executions would be needed.
pub fn enumerate_exact_with_limit(program: &CompiledProgram, max_traces: u64) -> Result<ExactDistribution, EnumerateError> {
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut support: Vec<(Value, f64)> = Vec::new();
    let mut accepted_mass = 0.0;
    let mut prefix: Vec<usize> = Vec::new();
    let mut traces = 0u64;
    loop {
        traces += 1;
        if traces > max_traces {
            return Err(EnumerateError::BudgetExceeded { limit: max_traces });
        }
        let path = EnumPath {
            prefix: std::mem::take(&mut prefix),
            taken: Vec::new(),
            prob: 1.0,
        };
        let mut trace = Trace::with_chooser(program, Chooser::Enumerate(path));
        let outcome = trace.model_raw();
        let Chooser::Enumerate(path) = trace.chooser else {
            unreachable!("enumerating trace")
        };
        match outcome {
            Ok(v) => {
                let key = v.canonical_key().ok_or_else(|| {
                    InferError::BadResult("the model returned a value containing a function".into())
                })?;
                let i = *index.entry(key).or_insert_with(|| {
                    support.push((v, 0.0));
                    support.len() - 1
                });
                support[i].1 += path.prob;
                accepted_mass += path.prob;
            }
            Err(Halt::Reject) => {}
            Err(Halt::Error(e)) => return Err(e.into()),
            Err(Halt::Continuous { primitive, span }) => {
                return Err(EnumerateError::UnsupportedContinuous { primitive, span })
            }
        }

        let mut taken = path.taken;
        loop {
            let Some(cp) = taken.pop() else {
                if accepted_mass <= 0.0 {
                    return Err(EnumerateError::AllRejected);
                }
                for (_, p) in &mut support {
                    *p /= accepted_mass;
                }
                return Ok(ExactDistribution { support });
            };
            if let Some(j) = (cp.chosen + 1..cp.weights.len()).find(|&j| cp.weights[j] > 0.0) {
                prefix = taken.iter().map(|c| c.chosen).collect();
                prefix.push(j);
                break;
            }
        }
    }
}
