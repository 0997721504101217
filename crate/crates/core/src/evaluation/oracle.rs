//! Reference implementation of the similarity relations by literal pairwise
//! comparison. Shares no code with the indexed path in `similarity`.

use crate::corpus::{Corpus, TypeUsage};
use crate::error::{Error, Result};
use crate::similarity::{Query, SimilarityParams};

pub const DEFAULT_ORACLE_CAP: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleEntry {
    pub id: String,
    pub e_count: usize,
    pub a_ids: Vec<String>,
}

fn same_place(q: &Query, y: &TypeUsage, p: &SimilarityParams) -> bool {
    q.type_name == y.type_name && (!p.use_context || q.context == y.context)
}

/// E and A of an arbitrary query by a full scan of the corpus.
pub fn brute_force_query(q: &Query, corpus: &Corpus, p: &SimilarityParams) -> OracleEntry {
    let mut e_count = 1;
    let mut a_ids = Vec::new();
    for y in corpus.usages() {
        if q.exclude_id.as_deref() == Some(y.id.as_str()) || !same_place(q, y, p) {
            continue;
        }
        if y.calls == q.calls {
            e_count += 1;
        }
        let strict_superset = q.calls.iter().all(|m| y.calls.contains(m)) && y.calls != q.calls;
        let extra = y.calls.len() as i64 - q.calls.len() as i64;
        if strict_superset && extra >= 1 && extra <= p.k as i64 {
            a_ids.push(y.id.clone());
        }
    }
    OracleEntry {
        id: q.exclude_id.clone().unwrap_or_default(),
        e_count,
        a_ids,
    }
}

/// E and A of every corpus usage, in corpus order.
pub fn brute_force_oracle(
    corpus: &Corpus,
    p: &SimilarityParams,
    cap: usize,
) -> Result<Vec<OracleEntry>> {
    if corpus.len() > cap {
        return Err(Error::OracleCap {
            size: corpus.len(),
            cap,
        });
    }
    Ok(corpus
        .usages()
        .iter()
        .map(|x| {
            let q = Query {
                type_name: x.type_name.clone(),
                context: x.context.clone(),
                calls: x.calls.clone(),
                exclude_id: Some(x.id.clone()),
            };
            brute_force_query(&q, corpus, p)
        })
        .collect())
}
