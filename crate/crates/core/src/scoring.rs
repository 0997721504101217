//! S-score and corpus-level score distributions.

use rayon::prelude::*;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::ratio::{self, Ratio};
use crate::similarity::{self, Query, SimilarityParams};

/// `1 - e/(e + a)`, i.e. `a/(e + a)`.
pub fn s_score(e_count: usize, a_count: usize) -> Result<Ratio> {
    if e_count == 0 {
        return Err(Error::InvalidParameter(
            "exactly-similar count must include the subject".into(),
        ));
    }
    Ok(Ratio::new(a_count as u64, (e_count + a_count) as u64))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoredUsage {
    pub id: String,
    pub s_score: Ratio,
    pub e_count: usize,
    pub a_count: usize,
}

/// Scores every usage of the corpus, most deviant first (ties by id).
pub fn score_all(corpus: &Corpus, p: &SimilarityParams) -> Vec<ScoredUsage> {
    let mut scored: Vec<ScoredUsage> = corpus
        .usages()
        .par_iter()
        .map(|usage| {
            let sim = similarity::neighborhood(&Query::from_usage(usage), corpus, p);
            ScoredUsage {
                id: usage.id.clone(),
                s_score: Ratio::new(sim.a_count() as u64, (sim.e_count + sim.a_count()) as u64),
                e_count: sim.e_count,
                a_count: sim.a_count(),
            }
        })
        .collect();
    sort_scored(&mut scored);
    scored
}

pub fn sort_scored(scored: &mut [ScoredUsage]) {
    scored.sort_by(|a, b| b.s_score.cmp(&a.s_score).then_with(|| a.id.cmp(&b.id)));
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSummary {
    pub n: usize,
    /// Lower-middle element of the sorted scores.
    pub median: Ratio,
    pub mean: f64,
    pub n_below_0_1: usize,
    pub n_above_0_5: usize,
    pub n_above_0_9: usize,
}

impl ScoreSummary {
    pub fn frac_below_0_1(&self) -> f64 {
        self.n_below_0_1 as f64 / self.n as f64
    }

    pub fn frac_above_0_5(&self) -> f64 {
        self.n_above_0_5 as f64 / self.n as f64
    }

    pub fn frac_above_0_9(&self) -> f64 {
        self.n_above_0_9 as f64 / self.n as f64
    }
}

/// Median, mean and the `<0.1`, `>0.5`, `>0.9` counts of a score list.
pub fn summarize(scores: &[Ratio]) -> Result<ScoreSummary> {
    if scores.is_empty() {
        return Err(Error::InvalidParameter("no scores to summarize".into()));
    }
    let mut sorted = scores.to_vec();
    sorted.sort();
    let tenth = Ratio::new(1, 10);
    let half = Ratio::new(1, 2);
    let nine_tenths = Ratio::new(9, 10);
    // Ascending order makes the floating-point sum independent of input order.
    let sum: f64 = sorted.iter().map(|&s| ratio::to_f64(s)).sum();
    Ok(ScoreSummary {
        n: sorted.len(),
        median: sorted[(sorted.len() - 1) / 2],
        mean: sum / sorted.len() as f64,
        n_below_0_1: sorted.iter().filter(|&&s| s < tenth).count(),
        n_above_0_5: sorted.iter().filter(|&&s| s > half).count(),
        n_above_0_9: sorted.iter().filter(|&&s| s > nine_tenths).count(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistributionStats {
    pub n_usages: usize,
    pub median_s: Ratio,
    pub mean_s: f64,
    pub frac_below_0_1: f64,
    pub frac_above_0_5: f64,
    pub frac_above_0_9: f64,
    pub n_redundant: usize,
    pub frac_redundant: f64,
}

pub fn distribution_stats(scores: &[ScoredUsage], corpus: &Corpus) -> Result<DistributionStats> {
    let values: Vec<Ratio> = scores.iter().map(|s| s.s_score).collect();
    let summary = summarize(&values)?;
    let mut n_redundant = 0;
    for s in scores {
        if similarity::is_redundant(&s.id, corpus)? {
            n_redundant += 1;
        }
    }
    Ok(DistributionStats {
        n_usages: summary.n,
        median_s: summary.median,
        mean_s: summary.mean,
        frac_below_0_1: summary.frac_below_0_1(),
        frac_above_0_5: summary.frac_above_0_5(),
        frac_above_0_9: summary.frac_above_0_9(),
        n_redundant,
        frac_redundant: n_redundant as f64 / summary.n as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bin {
    pub start: Ratio,
    pub end: Ratio,
    pub count: usize,
}

/// Half-open bins `[i*w, (i+1)*w)` covering `[0, 1]`; the last bin is closed at 1.
pub fn histogram(scores: &[Ratio], bin_width: Ratio) -> Result<Vec<Bin>> {
    let one = Ratio::from_integer(1);
    if bin_width == Ratio::from_integer(0) || bin_width > one {
        return Err(Error::InvalidParameter(format!(
            "bin width must lie in (0, 1], got {}",
            ratio::display(bin_width)
        )));
    }
    let n_bins = (one / bin_width).ceil().to_integer() as usize;
    let mut bins: Vec<Bin> = (0..n_bins)
        .map(|i| {
            let start = bin_width * Ratio::from_integer(i as u64);
            let end = (bin_width * Ratio::from_integer(i as u64 + 1)).min(one);
            Bin {
                start,
                end,
                count: 0,
            }
        })
        .collect();
    for &s in scores {
        let idx = ((s / bin_width).to_integer() as usize).min(n_bins - 1);
        bins[idx].count += 1;
    }
    Ok(bins)
}
