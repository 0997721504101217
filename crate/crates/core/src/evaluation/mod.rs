//! Simulated missing-call defects and the metrics computed over them.
//!
//! Every call of every redundant usage is removed in turn, producing one
//! degraded query per call. A query is *answered* when at least one call
//! survives the threshold, *correct* when the removed call is among them and
//! *perfect* when it is the only one. By default the seed usage is left out
//! while its own degraded queries are answered; otherwise the seed is always
//! an almost-similar neighbour and trivially supplies the removed call.

mod oracle;
mod synthetic;

use std::collections::BTreeMap;
use std::io::{self, Write};

use rayon::prelude::*;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::prediction::{self, PredictionConfig, Recommendation};
use crate::ratio::{self, Ratio};
use crate::similarity::{self, Query, SimilarityParams};

pub use oracle::{brute_force_oracle, brute_force_query, OracleEntry, DEFAULT_ORACLE_CAP};
pub use synthetic::{
    gen_synthetic, write_truth, Deviance, Deviant, SyntheticCorpus, SyntheticSpec,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegradedQuery {
    pub seed_id: String,
    pub removed: String,
    /// The seed's type and context with `removed` taken out of its calls.
    /// `exclude_id` names the seed.
    pub query: Query,
}

/// One degraded query per call of every redundant usage, in corpus order and
/// then call-name order.
pub fn generate_degraded(corpus: &Corpus) -> Vec<DegradedQuery> {
    let mut out = Vec::new();
    for seed in corpus.usages() {
        if corpus
            .bucket_positions(&seed.type_name, &seed.context)
            .len()
            < 2
        {
            continue;
        }
        for removed in &seed.calls {
            let mut query = Query::from_usage(seed);
            query.calls.remove(removed);
            out.push(DegradedQuery {
                seed_id: seed.id.clone(),
                removed: removed.clone(),
                query,
            });
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EvalConfig {
    pub prediction: PredictionConfig,
    pub similarity: SimilarityParams,
    /// Keep the seed usage in the corpus while answering its own queries.
    pub include_seed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryOutcome {
    pub answered: bool,
    pub correct: bool,
    pub size_answer: usize,
    pub perfect: bool,
    pub e_count: usize,
    pub a_count: usize,
    pub s_score: Ratio,
    /// Every candidate call with its likelihood, before thresholding.
    pub candidates: Vec<Recommendation>,
    pub recommendations: Vec<Recommendation>,
}

impl QueryOutcome {
    pub fn r_size(&self) -> usize {
        self.candidates.len()
    }
}

/// Threshold-independent part of a query's answer.
struct Neighbourhood<'q> {
    removed: &'q str,
    e_count: usize,
    a_count: usize,
    candidates: Vec<Recommendation>,
}

fn neighbourhood<'q>(
    dq: &'q DegradedQuery,
    corpus: &Corpus,
    params: &SimilarityParams,
    include_seed: bool,
) -> Neighbourhood<'q> {
    let exclude = (!include_seed).then_some(dq.seed_id.as_str());
    let query = dq.query.clone().excluding(exclude);
    let sim = similarity::neighborhood(&query, corpus, params);
    Neighbourhood {
        removed: &dq.removed,
        e_count: sim.e_count,
        a_count: sim.a_count(),
        candidates: prediction::likelihoods(&query, &sim.almost, corpus),
    }
}

fn outcome(n: &Neighbourhood<'_>, cfg: &PredictionConfig) -> QueryOutcome {
    let recommendations = prediction::filter(&n.candidates, cfg);
    let correct = recommendations.iter().any(|r| r.method == n.removed);
    QueryOutcome {
        answered: !recommendations.is_empty(),
        correct,
        size_answer: recommendations.len(),
        perfect: correct && recommendations.len() == 1,
        e_count: n.e_count,
        a_count: n.a_count,
        s_score: Ratio::new(n.a_count as u64, (n.e_count + n.a_count) as u64),
        candidates: n.candidates.clone(),
        recommendations,
    }
}

pub fn run_query(dq: &DegradedQuery, corpus: &Corpus, cfg: &EvalConfig) -> QueryOutcome {
    outcome(
        &neighbourhood(dq, corpus, &cfg.similarity, cfg.include_seed),
        &cfg.prediction,
    )
}

/// Aggregate metrics over a batch of degraded queries.
///
/// `correct`, `false_rate` and `precision` are fractions of the answered
/// queries and are `None` when nothing was answered. `avg_phi` averages the
/// likelihood of every candidate call of every query. Sums run in query order
/// so the floating-point fields are reproducible.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub threshold: Ratio,
    pub strict: bool,
    pub k: usize,
    pub include_seed: bool,
    pub use_context: bool,
    pub n_queries: usize,
    pub n_answered: usize,
    pub n_correct: usize,
    pub n_perfect: usize,
    /// Number of correct queries per answer size; determines `precision`.
    pub correct_by_size: BTreeMap<usize, usize>,
    pub answered: f64,
    pub correct: Option<f64>,
    pub false_rate: Option<f64>,
    pub precision: Option<f64>,
    pub recall: f64,
    pub perfect: f64,
    pub avg_e: f64,
    pub avg_a: f64,
    pub avg_s: f64,
    pub avg_r: f64,
    pub avg_phi: Option<f64>,
    pub avg_missing: f64,
}

#[derive(Default)]
struct Tally {
    n: usize,
    answered: usize,
    correct: usize,
    perfect: usize,
    correct_by_size: BTreeMap<usize, usize>,
    sum_e: usize,
    sum_a: usize,
    sum_s: f64,
    sum_r: usize,
    sum_phi: f64,
    sum_missing: usize,
}

impl Tally {
    fn add(&mut self, o: &QueryOutcome) {
        self.n += 1;
        self.answered += usize::from(o.answered);
        self.perfect += usize::from(o.perfect);
        if o.correct {
            self.correct += 1;
            *self.correct_by_size.entry(o.size_answer).or_default() += 1;
        }
        self.sum_e += o.e_count;
        self.sum_a += o.a_count;
        self.sum_s += ratio::to_f64(o.s_score);
        self.sum_r += o.r_size();
        // The likelihoods of one query sum to (total support) / |A|.
        if o.a_count > 0 {
            let support: usize = o.candidates.iter().map(|r| r.support).sum();
            self.sum_phi += ratio::to_f64(Ratio::new(support as u64, o.a_count as u64));
        }
        self.sum_missing += o.size_answer;
    }

    fn report(&self, cfg: &EvalConfig) -> EvalReport {
        let n = self.n as f64;
        let answered = self.answered as f64;
        let precision_sum: f64 = self
            .correct_by_size
            .iter()
            .map(|(&size, &count)| count as f64 / size as f64)
            .sum();
        let over_answered = |x: f64| (self.answered > 0).then(|| x / answered);
        let correct = over_answered(self.correct as f64);
        EvalReport {
            threshold: cfg.prediction.threshold,
            strict: cfg.prediction.strict,
            k: cfg.similarity.k,
            include_seed: cfg.include_seed,
            use_context: cfg.similarity.use_context,
            n_queries: self.n,
            n_answered: self.answered,
            n_correct: self.correct,
            n_perfect: self.perfect,
            correct_by_size: self.correct_by_size.clone(),
            answered: answered / n,
            correct,
            false_rate: correct.map(|c| 1.0 - c),
            precision: over_answered(precision_sum),
            recall: self.correct as f64 / n,
            perfect: self.perfect as f64 / n,
            avg_e: self.sum_e as f64 / n,
            avg_a: self.sum_a as f64 / n,
            avg_s: self.sum_s / n,
            avg_r: self.sum_r as f64 / n,
            avg_phi: (self.sum_r > 0).then(|| self.sum_phi / self.sum_r as f64),
            avg_missing: self.sum_missing as f64 / n,
        }
    }
}

fn neighbourhoods<'q>(
    queries: &'q [DegradedQuery],
    corpus: &Corpus,
    params: &SimilarityParams,
    include_seed: bool,
) -> Vec<Neighbourhood<'q>> {
    queries
        .par_iter()
        .map(|dq| neighbourhood(dq, corpus, params, include_seed))
        .collect()
}

fn aggregate(prepared: &[Neighbourhood<'_>], cfg: &EvalConfig) -> EvalReport {
    let mut tally = Tally::default();
    for n in prepared {
        tally.add(&outcome(n, &cfg.prediction));
    }
    tally.report(cfg)
}

pub fn evaluate(corpus: &Corpus, cfg: &EvalConfig) -> Result<EvalReport> {
    let queries = generate_degraded(corpus);
    if queries.is_empty() {
        return Err(Error::NoQueries);
    }
    let prepared = neighbourhoods(&queries, corpus, &cfg.similarity, cfg.include_seed);
    Ok(aggregate(&prepared, cfg))
}

/// One report per threshold; neighbourhoods are computed once and re-filtered.
pub fn sweep_threshold(
    corpus: &Corpus,
    cfg: &EvalConfig,
    thresholds: &[Ratio],
) -> Result<Vec<(Ratio, EvalReport)>> {
    let configs = thresholds
        .iter()
        .map(|&t| {
            Ok(EvalConfig {
                prediction: PredictionConfig::new(t, cfg.prediction.strict)?,
                ..*cfg
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let queries = generate_degraded(corpus);
    if queries.is_empty() {
        return Err(Error::NoQueries);
    }
    let prepared = neighbourhoods(&queries, corpus, &cfg.similarity, cfg.include_seed);
    Ok(configs
        .iter()
        .map(|c| (c.prediction.threshold, aggregate(&prepared, c)))
        .collect())
}

pub fn sweep_k(
    corpus: &Corpus,
    cfg: &EvalConfig,
    ks: &[usize],
) -> Result<Vec<(usize, EvalReport)>> {
    let queries = generate_degraded(corpus);
    if queries.is_empty() {
        return Err(Error::NoQueries);
    }
    ks.iter()
        .map(|&k| {
            let c = EvalConfig {
                similarity: SimilarityParams::new(k, cfg.similarity.use_context)?,
                ..*cfg
            };
            let prepared = neighbourhoods(&queries, corpus, &c.similarity, c.include_seed);
            Ok((k, aggregate(&prepared, &c)))
        })
        .collect()
}

pub const REPORT_HEADER: &str = "t,k,include_seed,use_context,N,answered,correct,false,precision,recall,perfect,avg_e,avg_a,avg_s,avg_r,avg_phi,avg_missing";

fn fixed(x: f64) -> String {
    format!("{x:.6}")
}

fn fixed_or_na(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_string(), fixed)
}

impl EvalReport {
    /// One CSV row matching [`REPORT_HEADER`]; undefined ratios render as `NA`.
    pub fn csv_row(&self) -> String {
        [
            ratio::display(self.threshold),
            self.k.to_string(),
            self.include_seed.to_string(),
            self.use_context.to_string(),
            self.n_queries.to_string(),
            fixed(self.answered),
            fixed_or_na(self.correct),
            fixed_or_na(self.false_rate),
            fixed_or_na(self.precision),
            fixed(self.recall),
            fixed(self.perfect),
            fixed(self.avg_e),
            fixed(self.avg_a),
            fixed(self.avg_s),
            fixed(self.avg_r),
            fixed_or_na(self.avg_phi),
            fixed(self.avg_missing),
        ]
        .join(",")
    }
}

pub fn write_reports<'r, W, I>(reports: I, out: &mut W) -> io::Result<()>
where
    W: Write + ?Sized,
    I: IntoIterator<Item = &'r EvalReport>,
{
    writeln!(out, "{REPORT_HEADER}")?;
    for r in reports {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}
