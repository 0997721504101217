//! Detection of missing method calls in object-oriented code.
//!
//! Every variable is reduced to a *type-usage*: its declared type, the
//! signature of the method it lives in, and the set of methods invoked on it.
//! A usage is suspicious when few usages in the same (type, context) bucket
//! make exactly the same calls while many make the same calls plus one more.
//! The S-score quantifies that deviance and the prediction step names the
//! calls the majority makes but the deviant omits.
//!
//! ```
//! use misscall::{corpus, prediction, similarity};
//!
//! let text = "\
//! a\tButton\tPage.create()\t<init>,setText
//! b\tButton\tPage.create()\t<init>,setText
//! c\tButton\tPage.create()\t<init>
//! ";
//! let corpus = corpus::parse_corpus(text.as_bytes()).unwrap();
//! let params = similarity::SimilarityParams::default();
//! let sim = similarity::similarity_of("c", &corpus, &params).unwrap();
//! assert_eq!(sim.e_count, 1);
//! assert_eq!(sim.a_count(), 2);
//!
//! let query = similarity::Query::from_usage(corpus.get("c").unwrap());
//! let recs = prediction::likelihoods(&query, &sim.almost, &corpus);
//! assert_eq!(recs[0].method, "setText");
//! ```

pub mod cli;
pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod prediction;
pub mod ratio;
pub mod scoring;
pub mod similarity;

pub use corpus::{Corpus, TypeUsage};
pub use error::{Error, Result};
pub use ratio::Ratio;
