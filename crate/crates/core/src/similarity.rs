//! Exact-similarity and almost-similarity neighbourhoods.
//!
//! Two usages are exactly similar when type, context and call-set are all
//! equal. `y` is almost similar to `x` when it shares type and context and its
//! call-set strictly contains `x`'s with at most `k` extra calls. Both sets are
//! found by scanning the single (type, context) bucket of the subject, or the
//! type's usages when the context condition is switched off.

use std::collections::BTreeSet;

use crate::corpus::{Corpus, TypeUsage};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimilarityParams {
    /// Largest number of extra calls admitted into the almost-similar set.
    pub k: usize,
    /// When false, only the type has to match.
    pub use_context: bool,
}

impl SimilarityParams {
    pub fn new(k: usize, use_context: bool) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        Ok(SimilarityParams { k, use_context })
    }
}

impl Default for SimilarityParams {
    fn default() -> Self {
        SimilarityParams {
            k: 1,
            use_context: true,
        }
    }
}

/// A call-set to be matched against the corpus, optionally leaving one
/// corpus usage out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub type_name: String,
    pub context: String,
    pub calls: BTreeSet<String>,
    pub exclude_id: Option<String>,
}

impl Query {
    pub fn new<I, S>(type_name: &str, context: &str, calls: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Query {
            type_name: type_name.to_string(),
            context: context.to_string(),
            calls: calls.into_iter().map(Into::into).collect(),
            exclude_id: None,
        }
    }

    /// Query for an in-corpus usage; the usage itself is excluded from matching.
    pub fn from_usage(usage: &TypeUsage) -> Self {
        Query {
            type_name: usage.type_name.clone(),
            context: usage.context.clone(),
            calls: usage.calls.clone(),
            exclude_id: Some(usage.id.clone()),
        }
    }

    pub fn excluding(mut self, id: Option<&str>) -> Self {
        self.exclude_id = id.map(str::to_string);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimilarityResult {
    /// Size of the exactly-similar set, counting the subject itself.
    pub e_count: usize,
    /// Corpus positions of the almost-similar usages, in corpus order.
    pub almost: Vec<usize>,
}

impl SimilarityResult {
    pub fn a_count(&self) -> usize {
        self.almost.len()
    }

    pub fn a_ids<'c>(&self, corpus: &'c Corpus) -> Vec<&'c str> {
        self.almost
            .iter()
            .map(|&p| corpus.at(p).id.as_str())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Relation {
    Exact,
    Almost,
}

fn relation(query: &BTreeSet<String>, other: &BTreeSet<String>, k: usize) -> Option<Relation> {
    if other.len() == query.len() {
        (other == query).then_some(Relation::Exact)
    } else if other.len() > query.len() && other.len() - query.len() <= k {
        query.is_subset(other).then_some(Relation::Almost)
    } else {
        None
    }
}

fn candidates<'c>(q: &Query, corpus: &'c Corpus, p: &SimilarityParams) -> &'c [usize] {
    if p.use_context {
        corpus.bucket_positions(&q.type_name, &q.context)
    } else {
        corpus.type_positions(&q.type_name)
    }
}

/// Computes both neighbourhoods of `q` in one scan.
pub fn neighborhood(q: &Query, corpus: &Corpus, p: &SimilarityParams) -> SimilarityResult {
    let excluded = q.exclude_id.as_deref().and_then(|id| corpus.position(id));
    let mut result = SimilarityResult {
        e_count: 1,
        almost: Vec::new(),
    };
    for &pos in candidates(q, corpus, p) {
        if Some(pos) == excluded {
            continue;
        }
        match relation(&q.calls, &corpus.at(pos).calls, p.k) {
            Some(Relation::Exact) => result.e_count += 1,
            Some(Relation::Almost) => result.almost.push(pos),
            None => {}
        }
    }
    result
}

/// |E(q)|, the subject included.
pub fn exactly_similar(q: &Query, corpus: &Corpus, p: &SimilarityParams) -> usize {
    let excluded = q.exclude_id.as_deref().and_then(|id| corpus.position(id));
    1 + candidates(q, corpus, p)
        .iter()
        .filter(|&&pos| Some(pos) != excluded && corpus.at(pos).calls == q.calls)
        .count()
}

/// Ids of the almost-similar usages, in corpus order.
pub fn almost_similar<'c>(q: &Query, corpus: &'c Corpus, p: &SimilarityParams) -> Vec<&'c str> {
    let excluded = q.exclude_id.as_deref().and_then(|id| corpus.position(id));
    candidates(q, corpus, p)
        .iter()
        .filter(|&&pos| Some(pos) != excluded)
        .filter(|&&pos| relation(&q.calls, &corpus.at(pos).calls, p.k) == Some(Relation::Almost))
        .map(|&pos| corpus.at(pos).id.as_str())
        .collect()
}

pub fn is_redundant(id: &str, corpus: &Corpus) -> Result<bool> {
    let usage = corpus
        .get(id)
        .ok_or_else(|| Error::UnknownUsage(id.to_string()))?;
    Ok(corpus
        .bucket_positions(&usage.type_name, &usage.context)
        .len()
        >= 2)
}

/// Neighbourhoods of an in-corpus usage, which is itself left out of the scan.
pub fn similarity_of(id: &str, corpus: &Corpus, p: &SimilarityParams) -> Result<SimilarityResult> {
    let usage = corpus
        .get(id)
        .ok_or_else(|| Error::UnknownUsage(id.to_string()))?;
    Ok(neighborhood(&Query::from_usage(usage), corpus, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_corpus;

    // Snippets A, B and C of the button example: b and aBut make the same
    // calls, myBut adds setLink.
    const BUTTONS: &str = "b\tButton\tPage.createButton()\t<init>,setText,setColor\n\
                           aBut\tButton\tPage.createButton()\t<init>,setText,setColor\n\
                           myBut\tButton\tPage.createButton()\t<init>,setColor,setText,setLink\n";

    fn corpus(text: &str) -> Corpus {
        parse_corpus(text.as_bytes()).unwrap()
    }

    fn figure_three() -> Corpus {
        corpus(
            "a\tButton\tctx()\t<init>,setText\n\
             b\tButton\tctx()\t<init>,setText\n\
             c\tButton\tctx()\t<init>,setText\n\
             d\tButton\tctx()\t<init>,setText\n\
             e\tButton\tctx()\t<init>,setFont\n",
        )
    }

    fn sandra() -> Corpus {
        let mut text = String::new();
        for i in 0..16 {
            text.push_str(&format!(
                "p{i}\tDialogPage\tcreateControl(Composite)\tsetControl\n"
            ));
        }
        corpus(&text)
    }

    #[test]
    fn button_example_relations() {
        let c = corpus(BUTTONS);
        let p = SimilarityParams::default();
        let q = Query::from_usage(c.get("b").unwrap());
        assert_eq!(exactly_similar(&q, &c, &p), 2);
        assert_eq!(almost_similar(&q, &c, &p), ["myBut"]);
        let r = similarity_of("b", &c, &p).unwrap();
        assert_eq!((r.e_count, r.a_ids(&c)), (2, vec!["myBut"]));
        for id in ["b", "aBut", "myBut"] {
            assert!(is_redundant(id, &c).unwrap());
        }
        let r = similarity_of("myBut", &c, &p).unwrap();
        assert_eq!((r.e_count, r.a_count()), (1, 0));
    }

    #[test]
    fn absent_type_is_alone() {
        let c = corpus(BUTTONS);
        let q = Query::new("Label", "Page.createButton()", ["<init>"]);
        assert_eq!(exactly_similar(&q, &c, &SimilarityParams::default()), 1);
        assert!(almost_similar(&q, &c, &SimilarityParams::default()).is_empty());
    }

    #[test]
    fn empty_query_against_sandra_corpus() {
        let c = sandra();
        let q = Query::new(
            "DialogPage",
            "createControl(Composite)",
            Vec::<String>::new(),
        );
        let p = SimilarityParams::default();
        assert_eq!(exactly_similar(&q, &c, &p), 1);
        assert_eq!(almost_similar(&q, &c, &p).len(), 16);
    }

    #[test]
    fn figure_three_neighbours() {
        let c = figure_three();
        let q = Query::new("Button", "ctx()", ["<init>"]);
        assert_eq!(
            almost_similar(&q, &c, &SimilarityParams::default()),
            ["a", "b", "c", "d", "e"]
        );
    }

    #[test]
    fn no_superset_means_no_neighbours() {
        let c = figure_three();
        let q = Query::new("Button", "ctx()", ["dispose"]);
        assert!(almost_similar(&q, &c, &SimilarityParams::default()).is_empty());
    }

    #[test]
    fn single_usage_corpus() {
        let c = corpus("only\tT\tc()\ta,b\n");
        let r = similarity_of("only", &c, &SimilarityParams::default()).unwrap();
        assert_eq!((r.e_count, r.a_count()), (1, 0));
    }

    #[test]
    fn redundancy() {
        let c = corpus(
            "u1\tButton\tPage.createButton()\t<init>\nu2\tText\tPage.createButton()\t<init>\n",
        );
        assert!(!is_redundant("u1", &c).unwrap());
        let twins = corpus("x\tT\tc()\ta\ny\tT\tc()\ta\n");
        assert!(is_redundant("x", &twins).unwrap());
        assert!(is_redundant("y", &twins).unwrap());
        assert!(matches!(
            is_redundant("zz", &twins),
            Err(Error::UnknownUsage(_))
        ));
        assert!(matches!(
            similarity_of("zz", &twins, &SimilarityParams::default()),
            Err(Error::UnknownUsage(_))
        ));
    }

    #[test]
    fn k_is_cumulative() {
        let c = corpus("s\tT\tc()\ta\nx1\tT\tc()\ta,b\nx2\tT\tc()\ta,b,c\nx3\tT\tc()\ta,b,c,d\n");
        let q = Query::from_usage(c.get("s").unwrap());
        assert_eq!(
            almost_similar(&q, &c, &SimilarityParams::new(1, true).unwrap()),
            ["x1"]
        );
        assert_eq!(
            almost_similar(&q, &c, &SimilarityParams::new(2, true).unwrap()),
            ["x1", "x2"]
        );
        assert_eq!(
            almost_similar(&q, &c, &SimilarityParams::new(3, true).unwrap()).len(),
            3
        );
        assert!(SimilarityParams::new(0, true).is_err());
    }

    #[test]
    fn context_ablation_drops_only_context() {
        let c = corpus("s\tT\tm1()\ta\nx\tT\tm2()\ta\ny\tT\tm3()\ta,b\nz\tU\tm1()\ta,b\n");
        let q = Query::from_usage(c.get("s").unwrap());
        let on = SimilarityParams::default();
        let off = SimilarityParams::new(1, false).unwrap();
        assert_eq!(exactly_similar(&q, &c, &on), 1);
        assert!(almost_similar(&q, &c, &on).is_empty());
        assert_eq!(exactly_similar(&q, &c, &off), 2);
        assert_eq!(almost_similar(&q, &c, &off), ["y"]);
    }

    #[test]
    fn exclude_id_leaves_one_out() {
        let c = corpus(BUTTONS);
        let p = SimilarityParams::default();
        let base = Query::new(
            "Button",
            "Page.createButton()",
            ["<init>", "setText", "setColor"],
        );
        assert_eq!(exactly_similar(&base, &c, &p), 3);
        let q = base.clone().excluding(Some("aBut"));
        assert_eq!(exactly_similar(&q, &c, &p), 2);
        let q = base.excluding(Some("not-there"));
        assert_eq!(exactly_similar(&q, &c, &p), 3);
    }

    #[test]
    fn neighborhood_matches_separate_calls() {
        let c = figure_three();
        let p = SimilarityParams::new(2, true).unwrap();
        for u in c.usages() {
            let q = Query::from_usage(u);
            let r = neighborhood(&q, &c, &p);
            assert_eq!(r.e_count, exactly_similar(&q, &c, &p));
            assert_eq!(r.a_ids(&c), almost_similar(&q, &c, &p));
        }
    }
}
