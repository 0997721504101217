//! Missing-call recommendations drawn from the almost-similar neighbourhood.

use std::collections::{BTreeMap, BTreeSet};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::ratio::Ratio;
use crate::similarity::Query;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Recommendation {
    pub method: String,
    /// Fraction of almost-similar usages that make this call.
    pub likelihood: Ratio,
    /// Number of almost-similar usages that make this call.
    pub support: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PredictionConfig {
    pub threshold: Ratio,
    /// `likelihood > threshold` when set, `likelihood >= threshold` otherwise.
    pub strict: bool,
}

impl PredictionConfig {
    pub fn new(threshold: Ratio, strict: bool) -> Result<Self> {
        if threshold > Ratio::from_integer(1) {
            return Err(Error::InvalidParameter(
                "threshold must lie in [0, 1]".into(),
            ));
        }
        Ok(PredictionConfig { threshold, strict })
    }

    pub fn accepts(&self, likelihood: Ratio) -> bool {
        if self.strict {
            likelihood > self.threshold
        } else {
            likelihood >= self.threshold
        }
    }
}

impl Default for PredictionConfig {
    fn default() -> Self {
        PredictionConfig {
            threshold: Ratio::new(9, 10),
            strict: true,
        }
    }
}

/// Calls made by some almost-similar usage but absent from the query.
pub fn candidate_calls(q: &Query, almost: &[usize], corpus: &Corpus) -> BTreeSet<String> {
    almost
        .iter()
        .flat_map(|&pos| corpus.at(pos).calls.iter())
        .filter(|m| !q.calls.contains(*m))
        .cloned()
        .collect()
}

/// One recommendation per candidate call, most likely first (ties by name).
pub fn likelihoods(q: &Query, almost: &[usize], corpus: &Corpus) -> Vec<Recommendation> {
    if almost.is_empty() {
        return Vec::new();
    }
    let mut support: BTreeMap<&str, usize> = BTreeMap::new();
    for &pos in almost {
        for m in &corpus.at(pos).calls {
            if !q.calls.contains(m) {
                *support.entry(m.as_str()).or_default() += 1;
            }
        }
    }
    let total = almost.len() as u64;
    let mut recs: Vec<Recommendation> = support
        .into_iter()
        .map(|(method, n)| Recommendation {
            method: method.to_string(),
            likelihood: Ratio::new(n as u64, total),
            support: n,
        })
        .collect();
    // BTreeMap order is by name, so a stable sort on likelihood keeps name ties ordered.
    recs.sort_by_key(|r| std::cmp::Reverse(r.likelihood));
    recs
}

/// Keeps the recommendations that pass the threshold, preserving order.
pub fn filter(recs: &[Recommendation], cfg: &PredictionConfig) -> Vec<Recommendation> {
    recs.iter()
        .filter(|r| cfg.accepts(r.likelihood))
        .cloned()
        .collect()
}

pub fn missing(
    q: &Query,
    almost: &[usize],
    corpus: &Corpus,
    cfg: &PredictionConfig,
) -> Vec<Recommendation> {
    filter(&likelihoods(q, almost, corpus), cfg)
}
