//! Seeded generator of planted corpora with known deviants.

use std::collections::BTreeSet;
use std::io::{self, Write};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, TypeUsage};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Deviance {
    /// Every usage independently drops one call with this probability.
    Rate(f64),
    /// Exactly this many usages per bucket drop one call.
    PerBucket(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub n_buckets: usize,
    /// Spread over the buckets as evenly as possible, earlier buckets first.
    pub n_usages: usize,
    pub n_types: usize,
    pub method_vocab: usize,
    pub convention_size: usize,
    /// Each usage follows one of this many call-sets drawn for its bucket.
    pub conventions_per_bucket: usize,
    /// Probability that a usage makes one extra call outside its convention.
    pub extra_call_rate: f64,
    pub deviance: Deviance,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            n_buckets: 10,
            n_usages: 100,
            n_types: 3,
            method_vocab: 12,
            convention_size: 3,
            conventions_per_bucket: 1,
            extra_call_rate: 0.0,
            deviance: Deviance::Rate(0.05),
        }
    }
}

impl SyntheticSpec {
    fn bucket_size(&self, bucket: usize) -> usize {
        self.n_usages / self.n_buckets + usize::from(bucket < self.n_usages % self.n_buckets)
    }

    fn validate(&self) -> Result<()> {
        let invalid = |msg: &str| Err(Error::InvalidParameter(msg.to_string()));
        if self.n_buckets == 0 {
            return invalid("at least one bucket is required");
        }
        if self.n_usages < self.n_buckets {
            return invalid("every bucket needs at least one usage");
        }
        if self.n_types == 0 {
            return invalid("at least one type is required");
        }
        if self.convention_size == 0 {
            return invalid("conventions must contain at least one call");
        }
        if self.method_vocab < self.convention_size {
            return invalid("method vocabulary is smaller than a convention");
        }
        if self.conventions_per_bucket == 0 {
            return invalid("at least one convention per bucket is required");
        }
        if !(0.0..=1.0).contains(&self.extra_call_rate) {
            return invalid("extra-call rate must lie in [0, 1]");
        }
        match self.deviance {
            Deviance::Rate(p) if !(0.0..=1.0).contains(&p) => {
                invalid("deviance rate must lie in [0, 1]")
            }
            Deviance::PerBucket(d) if d > self.bucket_size(self.n_buckets - 1) => {
                invalid("more deviants per bucket than usages in the smallest bucket")
            }
            _ => Ok(()),
        }
    }
}

/// A usage that had one call removed by the generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Deviant {
    pub id: String,
    pub dropped: String,
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub corpus: Corpus,
    pub truth: Vec<Deviant>,
}

fn method_name(i: usize) -> String {
    format!("call{i}")
}

pub fn gen_synthetic(spec: &SyntheticSpec, seed: u64) -> Result<SyntheticCorpus> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut usages = Vec::with_capacity(spec.n_usages);
    let mut truth = Vec::new();
    for bucket in 0..spec.n_buckets {
        let type_name = format!("Type{}", bucket % spec.n_types);
        let context = format!("Owner{bucket}.run(int)");
        let conventions: Vec<BTreeSet<usize>> = (0..spec.conventions_per_bucket)
            .map(|_| {
                index::sample(&mut rng, spec.method_vocab, spec.convention_size)
                    .into_iter()
                    .collect()
            })
            .collect();
        let size = spec.bucket_size(bucket);
        let planted: BTreeSet<usize> = match spec.deviance {
            Deviance::PerBucket(d) => index::sample(&mut rng, size, d).into_iter().collect(),
            Deviance::Rate(_) => BTreeSet::new(),
        };
        for slot in 0..size {
            let mut calls = conventions[rng.gen_range(0..conventions.len())].clone();
            if spec.extra_call_rate > 0.0
                && calls.len() < spec.method_vocab
                && rng.gen_bool(spec.extra_call_rate)
            {
                let free: Vec<usize> = (0..spec.method_vocab)
                    .filter(|m| !calls.contains(m))
                    .collect();
                calls.insert(free[rng.gen_range(0..free.len())]);
            }
            let deviant = match spec.deviance {
                Deviance::Rate(p) => rng.gen_bool(p),
                Deviance::PerBucket(_) => planted.contains(&slot),
            };
            let id = format!("u{}", usages.len() + 1);
            if deviant {
                let victim = *calls.iter().nth(rng.gen_range(0..calls.len())).unwrap();
                calls.remove(&victim);
                truth.push(Deviant {
                    id: id.clone(),
                    dropped: method_name(victim),
                });
            }
            usages.push(TypeUsage::new(
                &id,
                &type_name,
                &context,
                calls.into_iter().map(method_name),
            ));
        }
    }
    Ok(SyntheticCorpus {
        corpus: Corpus::new(usages)?,
        truth,
    })
}

/// Writes `id<TAB>dropped_call` lines.
pub fn write_truth<W: Write>(truth: &[Deviant], out: &mut W) -> io::Result<()> {
    for d in truth {
        writeln!(out, "{}\t{}", d.id, d.dropped)?;
    }
    Ok(())
}
