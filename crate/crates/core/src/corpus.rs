//! Type-usages, the corpus container and its line-oriented file formats.
//!
//! A corpus file holds one usage per line:
//!
//! ```text
//! id <TAB> type <TAB> context <TAB> call,call,... [<TAB> origin]
//! ```
//!
//! Blank lines and lines starting with `#` are skipped. An empty id field is
//! replaced by `u<ordinal>`, the ordinal counting records from 1 in file
//! order. Files ending in `.jsonl` are read as one JSON object per line with
//! the keys `id`, `type`, `context`, `calls` and `origin`.

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Constructor calls are recorded under this name.
pub const CONSTRUCTOR: &str = "<init>";

/// The set of methods invoked on one variable of a given type inside one
/// method body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeUsage {
    pub id: String,
    pub type_name: String,
    /// Signature of the enclosing method.
    pub context: String,
    pub calls: BTreeSet<String>,
    pub origin: Option<String>,
}

impl TypeUsage {
    pub fn new<I, S>(id: &str, type_name: &str, context: &str, calls: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        TypeUsage {
            id: id.to_string(),
            type_name: type_name.to_string(),
            context: context.to_string(),
            calls: calls.into_iter().map(Into::into).collect(),
            origin: None,
        }
    }

    pub fn with_origin(mut self, origin: &str) -> Self {
        self.origin = Some(origin.to_string());
        self
    }

    fn validate(&self) -> Result<()> {
        let invalid = |message: String| Error::InvalidUsage {
            id: self.id.clone(),
            message,
        };
        check_field("id", &self.id).map_err(invalid)?;
        if self.id.starts_with('#') {
            return Err(invalid("id must not start with `#`".into()));
        }
        check_field("type", &self.type_name).map_err(invalid)?;
        check_field("context", &self.context).map_err(invalid)?;
        for call in &self.calls {
            check_field("method name", call).map_err(invalid)?;
            if call.contains(',') {
                return Err(invalid(format!("method name `{call}` contains a comma")));
            }
        }
        if let Some(origin) = &self.origin {
            if origin.contains(['\t', '\n', '\r']) {
                return Err(invalid("origin contains a tab or line break".into()));
            }
        }
        Ok(())
    }
}

fn check_field(what: &str, value: &str) -> std::result::Result<(), String> {
    if value.is_empty() {
        return Err(format!("empty {what}"));
    }
    if value.contains(['\t', '\n', '\r']) {
        return Err(format!("{what} `{value}` contains a tab or line break"));
    }
    if value.trim() != value {
        return Err(format!("{what} `{value}` has surrounding whitespace"));
    }
    Ok(())
}

/// Immutable collection of type-usages indexed by (type, context) and by type.
///
/// Usages are addressed by their position in input order; positions are
/// stable for the lifetime of the corpus.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    usages: Vec<TypeUsage>,
    by_id: HashMap<String, usize>,
    buckets: HashMap<String, HashMap<String, Vec<usize>>>,
    by_type: HashMap<String, Vec<usize>>,
}

impl Corpus {
    pub fn new(usages: Vec<TypeUsage>) -> Result<Self> {
        let mut by_id = HashMap::with_capacity(usages.len());
        for (pos, usage) in usages.iter().enumerate() {
            usage.validate()?;
            if let Some(first) = by_id.insert(usage.id.clone(), pos) {
                return Err(Error::DuplicateId {
                    id: usage.id.clone(),
                    first_line: first + 1,
                    second_line: pos + 1,
                });
            }
        }
        let mut buckets: HashMap<String, HashMap<String, Vec<usize>>> = HashMap::new();
        let mut by_type: HashMap<String, Vec<usize>> = HashMap::new();
        for (pos, usage) in usages.iter().enumerate() {
            buckets
                .entry(usage.type_name.clone())
                .or_default()
                .entry(usage.context.clone())
                .or_default()
                .push(pos);
            by_type
                .entry(usage.type_name.clone())
                .or_default()
                .push(pos);
        }
        Ok(Corpus {
            usages,
            by_id,
            buckets,
            by_type,
        })
    }

    pub fn usages(&self) -> &[TypeUsage] {
        &self.usages
    }

    pub fn len(&self) -> usize {
        self.usages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.usages.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&TypeUsage> {
        self.position(id).map(|pos| &self.usages[pos])
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.by_id.get(id).copied()
    }

    pub fn at(&self, pos: usize) -> &TypeUsage {
        &self.usages[pos]
    }

    /// Positions of the usages sharing `type_name` and `context`, in input order.
    pub fn bucket_positions(&self, type_name: &str, context: &str) -> &[usize] {
        self.buckets
            .get(type_name)
            .and_then(|contexts| contexts.get(context))
            .map_or(&[], Vec::as_slice)
    }

    /// Positions of all usages of `type_name`, whatever their context.
    pub fn type_positions(&self, type_name: &str) -> &[usize] {
        self.by_type.get(type_name).map_or(&[], Vec::as_slice)
    }

    /// Iterates over every (type, context) bucket, in no particular order.
    pub fn buckets(&self) -> impl Iterator<Item = (&str, &str, &[usize])> {
        self.buckets.iter().flat_map(|(ty, contexts)| {
            contexts
                .iter()
                .map(move |(ctx, members)| (ty.as_str(), ctx.as_str(), members.as_slice()))
        })
    }

    pub fn n_types(&self) -> usize {
        self.by_type.len()
    }

    pub fn n_contexts(&self) -> usize {
        self.usages
            .iter()
            .map(|u| u.context.as_str())
            .collect::<BTreeSet<_>>()
            .len()
    }

    pub fn n_buckets(&self) -> usize {
        self.buckets.values().map(HashMap::len).sum()
    }

    /// Number of usages sharing their (type, context) bucket with at least one other.
    pub fn n_redundant(&self) -> usize {
        self.buckets()
            .map(|(_, _, members)| members.len())
            .filter(|&n| n >= 2)
            .sum()
    }
}

/// Ids of all usages with exactly this type and context.
pub fn bucket<'c>(corpus: &'c Corpus, type_name: &str, context: &str) -> Vec<&'c str> {
    corpus
        .bucket_positions(type_name, context)
        .iter()
        .map(|&pos| corpus.at(pos).id.as_str())
        .collect()
}

struct RawRecord {
    line: usize,
    id: Option<String>,
    usage: TypeUsage,
}

fn assign_ids(records: Vec<RawRecord>) -> Result<Corpus> {
    let mut seen: HashMap<String, usize> = HashMap::new();
    for record in &records {
        if let Some(id) = &record.id {
            if let Some(&first) = seen.get(id) {
                return Err(Error::DuplicateId {
                    id: id.clone(),
                    first_line: first,
                    second_line: record.line,
                });
            }
            seen.insert(id.clone(), record.line);
        }
    }
    let mut usages = Vec::with_capacity(records.len());
    for (ordinal, record) in records.into_iter().enumerate() {
        let mut usage = record.usage;
        usage.id = match record.id {
            Some(id) => id,
            None => {
                let id = format!("u{}", ordinal + 1);
                if let Some(&other) = seen.get(&id) {
                    return Err(Error::DuplicateId {
                        id,
                        first_line: other.min(record.line),
                        second_line: other.max(record.line),
                    });
                }
                seen.insert(id.clone(), record.line);
                id
            }
        };
        usage
            .validate()
            .map_err(|e| Error::parse(record.line, e.to_string()))?;
        usages.push(usage);
    }
    Corpus::new(usages)
}

fn lines<R: BufRead>(input: R) -> impl Iterator<Item = Result<(usize, String)>> {
    input.split(b'\n').enumerate().map(|(i, bytes)| {
        let line_no = i + 1;
        let mut bytes = bytes?;
        if bytes.last() == Some(&b'\r') {
            bytes.pop();
        }
        String::from_utf8(bytes)
            .map(|s| (line_no, s))
            .map_err(|_| Error::parse(line_no, "invalid UTF-8"))
    })
}

fn parse_calls(line: usize, field: &str) -> Result<BTreeSet<String>> {
    if field.is_empty() {
        return Ok(BTreeSet::new());
    }
    field
        .split(',')
        .map(|name| {
            let name = name.trim();
            if name.is_empty() {
                Err(Error::parse(line, "empty method name in calls field"))
            } else {
                Ok(name.to_string())
            }
        })
        .collect()
}

/// Reads the tab-separated corpus format.
pub fn parse_corpus<R: BufRead>(input: R) -> Result<Corpus> {
    let mut records = Vec::new();
    for item in lines(input) {
        let (line, text) = item?;
        if text.trim().is_empty() || text.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = text.split('\t').map(str::trim).collect();
        if !(4..=5).contains(&fields.len()) {
            return Err(Error::parse(
                line,
                format!(
                    "expected 4 or 5 tab-separated fields, found {}",
                    fields.len()
                ),
            ));
        }
        if fields[1].is_empty() {
            return Err(Error::parse(line, "empty type"));
        }
        if fields[2].is_empty() {
            return Err(Error::parse(line, "empty context"));
        }
        let usage = TypeUsage {
            id: String::new(),
            type_name: fields[1].to_string(),
            context: fields[2].to_string(),
            calls: parse_calls(line, fields[3])?,
            origin: fields
                .get(4)
                .filter(|o| !o.is_empty())
                .map(|o| o.to_string()),
        };
        records.push(RawRecord {
            line,
            id: Some(fields[0])
                .filter(|id| !id.is_empty())
                .map(str::to_string),
            usage,
        });
    }
    assign_ids(records)
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    id: Option<String>,
    #[serde(rename = "type")]
    type_name: String,
    context: String,
    #[serde(default)]
    calls: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    origin: Option<String>,
}

/// Reads the JSON-lines mirror of the corpus format.
pub fn parse_jsonl<R: BufRead>(input: R) -> Result<Corpus> {
    let mut records = Vec::new();
    for item in lines(input) {
        let (line, text) = item?;
        if text.trim().is_empty() {
            continue;
        }
        let rec: JsonRecord =
            serde_json::from_str(&text).map_err(|e| Error::parse(line, e.to_string()))?;
        let type_name = rec.type_name.trim();
        let context = rec.context.trim();
        if type_name.is_empty() {
            return Err(Error::parse(line, "empty type"));
        }
        if context.is_empty() {
            return Err(Error::parse(line, "empty context"));
        }
        let usage = TypeUsage {
            id: String::new(),
            type_name: type_name.to_string(),
            context: context.to_string(),
            calls: rec.calls.iter().map(|c| c.trim().to_string()).collect(),
            origin: rec.origin.filter(|o| !o.is_empty()),
        };
        records.push(RawRecord {
            line,
            id: rec
                .id
                .map(|id| id.trim().to_string())
                .filter(|id| !id.is_empty()),
            usage,
        });
    }
    assign_ids(records)
}

/// Writes the canonical tab-separated form; calls are emitted in sorted order.
pub fn write_corpus<W: Write>(corpus: &Corpus, out: &mut W) -> io::Result<()> {
    for usage in corpus.usages() {
        write!(
            out,
            "{}\t{}\t{}\t",
            usage.id, usage.type_name, usage.context
        )?;
        let mut first = true;
        for call in &usage.calls {
            if !first {
                out.write_all(b",")?;
            }
            out.write_all(call.as_bytes())?;
            first = false;
        }
        if let Some(origin) = &usage.origin {
            write!(out, "\t{origin}")?;
        }
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_jsonl<W: Write>(corpus: &Corpus, out: &mut W) -> io::Result<()> {
    for usage in corpus.usages() {
        let rec = JsonRecord {
            id: Some(usage.id.clone()),
            type_name: usage.type_name.clone(),
            context: usage.context.clone(),
            calls: usage.calls.iter().cloned().collect(),
            origin: usage.origin.clone(),
        };
        serde_json::to_writer(&mut *out, &rec)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

fn is_jsonl(path: &Path) -> bool {
    path.extension().is_some_and(|ext| ext == "jsonl")
}

/// Loads a corpus file, choosing the format from the extension.
pub fn load(path: &Path) -> Result<Corpus> {
    let reader = BufReader::new(File::open(path)?);
    if is_jsonl(path) {
        parse_jsonl(reader)
    } else {
        parse_corpus(reader)
    }
}

pub fn save(corpus: &Corpus, path: &Path) -> Result<()> {
    let mut out = io::BufWriter::new(File::create(path)?);
    if is_jsonl(path) {
        write_jsonl(corpus, &mut out)?;
    } else {
        write_corpus(corpus, &mut out)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIGURE_ONE: &str = "u1\tButton\tPage.createButton()\t<init>,setText,setColor\n\
                              u2\tText\tPage.createButton()\t<init>\n";

    fn parse(text: &str) -> Result<Corpus> {
        parse_corpus(text.as_bytes())
    }

    fn written(corpus: &Corpus) -> String {
        let mut out = Vec::new();
        write_corpus(corpus, &mut out).unwrap();
        String::from_utf8(out).unwrap()
    }

    #[test]
    fn parses_figure_one_button() {
        let corpus = parse("u1\tButton\tPage.createButton()\t<init>,setText,setColor\n").unwrap();
        let b = corpus.get("u1").unwrap();
        assert_eq!(b.type_name, "Button");
        assert_eq!(b.context, "Page.createButton()");
        let expected: BTreeSet<String> = [CONSTRUCTOR, "setText", "setColor"]
            .into_iter()
            .map(String::from)
            .collect();
        assert_eq!(b.calls, expected);
        assert_eq!(b.origin, None);
    }

    #[test]
    fn empty_calls_field_is_empty_set() {
        let corpus = parse("u2\tText\tPage.createButton()\t\n").unwrap();
        assert!(corpus.get("u2").unwrap().calls.is_empty());
    }

    #[test]
    fn duplicate_calls_collapse() {
        let corpus = parse("u3\tA\tc()\tf,f,g\n").unwrap();
        let calls: Vec<_> = corpus.get("u3").unwrap().calls.iter().cloned().collect();
        assert_eq!(calls, ["f", "g"]);
    }

    #[test]
    fn comments_blank_lines_and_origin() {
        let text = "# header\n\n  \nx\tT\tm(int)\ta\tFoo.java:42\r\n";
        let corpus = parse(text).unwrap();
        assert_eq!(corpus.len(), 1);
        assert_eq!(
            corpus.get("x").unwrap().origin.as_deref(),
            Some("Foo.java:42")
        );
    }

    #[test]
    fn missing_ids_are_assigned_in_record_order() {
        let text = "# c\n\tT\tc()\ta\nfoo\tT\tc()\tb\n\tT\tc()\t\n";
        let corpus = parse(text).unwrap();
        let ids: Vec<_> = corpus.usages().iter().map(|u| u.id.as_str()).collect();
        assert_eq!(ids, ["u1", "foo", "u3"]);
    }

    #[test]
    fn auto_id_collision_is_an_error() {
        let err = parse("\tT\tc()\ta\nu1\tT\tc()\tb\n").unwrap_err();
        assert!(
            matches!(err, Error::DuplicateId { ref id, first_line: 1, second_line: 2 } if id == "u1")
        );
    }

    #[test]
    fn wrong_field_count_names_the_line() {
        let err = parse("u1\tT\tc()\ta\nu2\tT\tc()\n").unwrap_err();
        match err {
            Error::Parse { line, message } => {
                assert_eq!(line, 2);
                assert!(message.contains("found 3"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse("a\tb\tc\td\te\tf\n").unwrap_err(),
            Error::Parse { line: 1, .. }
        ));
    }

    #[test]
    fn empty_type_or_context_is_rejected() {
        assert!(matches!(
            parse("u1\t\tc()\ta\n").unwrap_err(),
            Error::Parse { line: 1, .. }
        ));
        assert!(matches!(
            parse("\n u1\tT\t \ta\n").unwrap_err(),
            Error::Parse { line: 2, .. }
        ));
    }

    #[test]
    fn empty_method_name_is_rejected() {
        assert!(matches!(
            parse("u1\tT\tc()\ta,,b\n").unwrap_err(),
            Error::Parse { line: 1, .. }
        ));
    }

    #[test]
    fn duplicate_explicit_id_names_both_lines() {
        let err = parse("a\tT\tc()\tx\n# gap\nb\tT\tc()\ty\na\tU\td()\tz\n").unwrap_err();
        match err {
            Error::DuplicateId {
                id,
                first_line,
                second_line,
            } => {
                assert_eq!((id.as_str(), first_line, second_line), ("a", 1, 4));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn invalid_utf8_is_a_parse_error() {
        let bytes = b"u1\tT\tc()\ta\nu2\t\xff\tc()\ta\n";
        assert!(matches!(
            parse_corpus(&bytes[..]).unwrap_err(),
            Error::Parse { line: 2, .. }
        ));
    }

    #[test]
    fn write_sorts_calls_and_keeps_empty_field() {
        let corpus = parse("u1\tButton\tPage.createButton()\tsetText,<init>,setColor\nu2\tText\tPage.createButton()\t\tT.java:3\n").unwrap();
        assert_eq!(
            written(&corpus),
            "u1\tButton\tPage.createButton()\t<init>,setColor,setText\n\
             u2\tText\tPage.createButton()\t\tT.java:3\n"
        );
    }

    #[test]
    fn write_empty_corpus_is_empty() {
        assert_eq!(written(&Corpus::default()), "");
    }

    #[test]
    fn round_trip_figure_one() {
        let corpus = parse(FIGURE_ONE).unwrap();
        let again = parse(&written(&corpus)).unwrap();
        assert_eq!(corpus.usages(), again.usages());
    }

    #[test]
    fn jsonl_mirror() {
        let text = r#"{"id":"u1","type":"Button","context":"Page.createButton()","calls":["<init>","setText","setText"]}

{"type":"Text","context":"Page.createButton()","calls":[],"origin":"A.java:9"}
"#;
        let corpus = parse_jsonl(text.as_bytes()).unwrap();
        assert_eq!(corpus.len(), 2);
        assert_eq!(corpus.get("u1").unwrap().calls.len(), 2);
        let text_usage = corpus.get("u2").unwrap();
        assert!(text_usage.calls.is_empty());
        assert_eq!(text_usage.origin.as_deref(), Some("A.java:9"));

        let mut out = Vec::new();
        write_jsonl(&corpus, &mut out).unwrap();
        let again = parse_jsonl(&out[..]).unwrap();
        assert_eq!(corpus.usages(), again.usages());
    }

    #[test]
    fn jsonl_errors_name_the_line() {
        let err =
            parse_jsonl("{\"type\":\"T\",\"context\":\"c\"}\n{oops}\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err =
            parse_jsonl("{\"type\":\"T\",\"context\":\"c\",\"calls\":[\"a,b\"]}\n".as_bytes())
                .unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn bucket_lookup() {
        let corpus = parse(FIGURE_ONE).unwrap();
        assert_eq!(bucket(&corpus, "Button", "Page.createButton()"), ["u1"]);
        assert!(bucket(&corpus, "Button", "Other.m()").is_empty());
        assert!(bucket(&corpus, "Nope", "Page.createButton()").is_empty());
        assert_eq!(corpus.n_types(), 2);
        assert_eq!(corpus.n_contexts(), 1);
        assert_eq!(corpus.n_buckets(), 2);
        assert_eq!(corpus.n_redundant(), 0);
    }

    #[test]
    fn context_equality_is_exact() {
        let corpus = parse("a\tT\tm(int, String)\tx\nb\tT\tm(int,String)\tx\n").unwrap();
        assert_eq!(bucket(&corpus, "T", "m(int, String)"), ["a"]);
        assert_eq!(corpus.n_buckets(), 2);
    }

    #[test]
    fn api_construction_validates() {
        let ok = TypeUsage::new("a", "T", "c()", ["x"]);
        assert!(Corpus::new(vec![ok.clone(), ok.clone()]).is_err());
        assert!(Corpus::new(vec![TypeUsage::new("a", "", "c()", ["x"])]).is_err());
        assert!(Corpus::new(vec![TypeUsage::new("a", "T", "c()", ["x,y"])]).is_err());
        assert!(Corpus::new(vec![TypeUsage::new("a", " T", "c()", ["x"])]).is_err());
        assert!(Corpus::new(vec![TypeUsage::new("#a", "T", "c()", ["x"])]).is_err());
        assert!(Corpus::new(vec![ok.with_origin("bad\torigin")]).is_err());
    }
}
