use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::compile::CompiledProgram;
use super::error::InferError;
use super::eval::Trace;
use super::value::Value;

pub const DEFAULT_MAX_ATTEMPTS_PER_SAMPLE: u64 = 1_000_000;

/// Accepted samples of every query, in attempt order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorEstimate {
    pub seed: u64,
    pub n_samples: usize,
    pub n_rejected: u64,
    pub queries: BTreeMap<String, Vec<f64>>,
}

impl PosteriorEstimate {
    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.queries.keys().map(String::as_str)
    }

    pub fn mean(&self, label: &str) -> Option<f64> {
        let xs = self.queries.get(label)?;
        (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
    }

    /// Fraction of attempts that were accepted.
    pub fn acceptance_rate(&self) -> f64 {
        self.n_samples as f64 / (self.n_samples as f64 + self.n_rejected as f64)
    }

    /// Sample `i` as a label → value record.
    pub fn sample(&self, i: usize) -> BTreeMap<&str, f64> {
        self.queries.iter().map(|(k, v)| (k.as_str(), v[i])).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectionConfig {
    pub n_samples: usize,
    pub seed: u64,
    pub max_attempts_per_sample: u64,
    /// Evaluate attempts in parallel batches on the current rayon pool.
    /// Output is identical either way.
    pub parallel: bool,
}

impl RejectionConfig {
    pub fn new(n_samples: usize, seed: u64) -> Self {
        RejectionConfig {
            n_samples,
            seed,
            max_attempts_per_sample: DEFAULT_MAX_ATTEMPTS_PER_SAMPLE,
            parallel: false,
        }
    }
}

/// Draw `n_samples` accepted traces by rejection.
///
/// Attempt `i` uses the random stream (seed, i) and attempts are consumed in
/// index order, so the result depends only on the program and config.
pub fn run_rejection(program: &CompiledProgram, config: &RejectionConfig) -> Result<PosteriorEstimate, InferError> {
    let mut acc = Accumulator::new(config);
    let mut next: u64 = 0;
    if config.parallel && rayon::current_num_threads() > 1 {
        let mut batch: u64 = 256;
        while !acc.done() {
            let results: Vec<_> = (next..next + batch)
                .into_par_iter()
                .map(|i| attempt(program, config.seed, i))
                .collect();
            next += batch;
            for r in results {
                if acc.push(r)? {
                    break;
                }
            }
            batch = (batch * 2).min(1 << 16);
        }
    } else {
        while !acc.done() {
            acc.push(attempt(program, config.seed, next))?;
            next += 1;
        }
    }
    Ok(acc.finish(config.seed))
}

type Attempt = Result<Option<BTreeMap<String, f64>>, InferError>;

/// Run one attempt; `Ok(None)` when it was rejected.
pub fn attempt(program: &CompiledProgram, seed: u64, index: u64) -> Attempt {
    let mut trace = Trace::new(program, seed, index);
    match trace.run_model()? {
        None => Ok(None),
        Some(v) => query_record(&v).map(Some),
    }
}

/// Read a model's return value as query label → number.
pub fn query_record(v: &Value) -> Result<BTreeMap<String, f64>, InferError> {
    let Value::Record(fields) = v else {
        return Err(InferError::BadResult(format!(
            "the model must return a record of queries, found {}",
            v.type_name()
        )));
    };
    fields
        .iter()
        .map(|(k, v)| match v.as_query_number() {
            Some(x) if x.is_finite() => Ok((k.clone(), x)),
            _ => Err(InferError::BadResult(format!(
                "query `{k}` must be a number or boolean, found {}",
                v.type_name()
            ))),
        })
        .collect()
}

struct Accumulator {
    target: usize,
    max_run: u64,
    accepted: usize,
    rejected_total: u64,
    rejected_run: u64,
    queries: BTreeMap<String, Vec<f64>>,
}

impl Accumulator {
    fn new(config: &RejectionConfig) -> Self {
        Accumulator {
            target: config.n_samples,
            max_run: config.max_attempts_per_sample.max(1),
            accepted: 0,
            rejected_total: 0,
            rejected_run: 0,
            queries: BTreeMap::new(),
        }
    }

    fn done(&self) -> bool {
        self.accepted >= self.target
    }

    /// Consume the next attempt in index order; `Ok(true)` once complete.
    fn push(&mut self, r: Attempt) -> Result<bool, InferError> {
        if self.done() {
            return Ok(true);
        }
        match r? {
            None => {
                self.rejected_total += 1;
                self.rejected_run += 1;
                if self.rejected_run >= self.max_run {
                    return Err(InferError::MaxRejections {
                        attempts: self.rejected_run,
                        accepted: self.accepted,
                    });
                }
            }
            Some(record) => {
                if self.accepted == 0 {
                    for (k, v) in record {
                        let mut xs = Vec::with_capacity(self.target);
                        xs.push(v);
                        self.queries.insert(k, xs);
                    }
                } else {
                    if record.len() != self.queries.len() || !record.keys().all(|k| self.queries.contains_key(k)) {
                        return Err(InferError::BadResult(format!(
                            "query labels changed between samples: {:?} vs {:?}",
                            self.queries.keys().collect::<Vec<_>>(),
                            record.keys().collect::<Vec<_>>()
                        )));
                    }
                    for (k, v) in record {
                        self.queries.get_mut(&k).expect("checked labels").push(v);
                    }
                }
                self.accepted += 1;
                self.rejected_run = 0;
            }
        }
        Ok(self.done())
    }

    fn finish(self, seed: u64) -> PosteriorEstimate {
        PosteriorEstimate {
            seed,
            n_samples: self.accepted,
            n_rejected: self.rejected_total,
            queries: self.queries,
        }
    }
}
