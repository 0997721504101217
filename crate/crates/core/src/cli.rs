//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when the analysis cannot produce a result
//! (for instance no degraded query can be built), 2 on usage, input or I/O
//! errors.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::corpus::{self, Corpus};
use crate::error::Error;
use crate::evaluation::{self, Deviance, EvalConfig, EvalReport, SyntheticSpec};
use crate::prediction::{self, PredictionConfig, Recommendation};
use crate::ratio::{self, parse_ratio, Ratio};
use crate::scoring::{self, ScoredUsage};
use crate::similarity::{self, Query, SimilarityParams};

#[derive(Debug, Parser)]
#[command(
    name = "misscall",
    version,
    about = "Detect likely missing method calls in type-usage corpora"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Corpus counts and the S-score distribution with a histogram
    Stats(StatsArgs),
    /// Rank usages by S-score with their missing-call recommendations
    Score(ScoreArgs),
    /// Recommendations for one ad-hoc query
    Predict(PredictArgs),
    /// Simulate missing calls and report precision/recall
    Eval(EvalArgs),
    /// Generate a planted synthetic corpus and its ground truth
    Gen(GenArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Jsonl,
    Human,
}

#[derive(Debug, Args)]
struct SimilarityFlags {
    /// Maximum number of extra calls in an almost-similar usage
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    k: u32,
    /// Match on type only, ignoring the enclosing method
    #[arg(long)]
    no_context: bool,
}

impl SimilarityFlags {
    fn params(&self) -> SimilarityParams {
        SimilarityParams {
            k: self.k as usize,
            use_context: !self.no_context,
        }
    }
}

#[derive(Debug, Args)]
struct ThresholdFlags {
    /// Likelihood threshold in [0, 1]
    #[arg(short = 't', long = "threshold", alias = "t", default_value = "0.9", value_parser = parse_threshold)]
    threshold: Ratio,
    /// Recommend calls whose likelihood equals the threshold too
    #[arg(long)]
    ge: bool,
}

impl ThresholdFlags {
    fn config(&self) -> PredictionConfig {
        PredictionConfig {
            threshold: self.threshold,
            strict: !self.ge,
        }
    }
}

fn parse_threshold(s: &str) -> Result<Ratio, String> {
    let t = parse_ratio(s).map_err(|e| e.to_string())?;
    if t > Ratio::from_integer(1) {
        return Err(format!("threshold {s} is above 1"));
    }
    Ok(t)
}

fn parse_unit(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|_| format!("not a number: `{s}`"))?;
    if !(0.0..=1.0).contains(&x) {
        return Err(format!("{s} is outside [0, 1]"));
    }
    Ok(x)
}

#[derive(Debug, Args)]
struct StatsArgs {
    corpus: PathBuf,
    #[command(flatten)]
    similarity: SimilarityFlags,
    /// Histogram bin width
    #[arg(long, default_value = "0.05", value_parser = parse_threshold)]
    hist_width: Ratio,
    /// Write the histogram to this file instead of after the statistics
    #[arg(long)]
    hist_out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: OutputFormat,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    corpus: PathBuf,
    #[command(flatten)]
    similarity: SimilarityFlags,
    #[command(flatten)]
    threshold: ThresholdFlags,
    /// Only report the N most deviant usages
    #[arg(long)]
    top: Option<usize>,
    /// Only report usages scoring at least this much
    #[arg(long, value_parser = parse_threshold)]
    min_score: Option<Ratio>,
    #[arg(long, value_enum, default_value = "csv")]
    format: OutputFormat,
}

#[derive(Debug, Args)]
struct PredictArgs {
    corpus: PathBuf,
    #[arg(long = "type")]
    type_name: String,
    #[arg(long)]
    context: String,
    /// Comma-separated calls made on the variable; may be empty
    #[arg(long)]
    calls: String,
    #[command(flatten)]
    similarity: SimilarityFlags,
    #[command(flatten)]
    threshold: ThresholdFlags,
    #[arg(long, value_enum, default_value = "human")]
    format: OutputFormat,
}

#[derive(Debug, Args)]
struct EvalArgs {
    corpus: PathBuf,
    #[command(flatten)]
    similarity: SimilarityFlags,
    #[command(flatten)]
    threshold: ThresholdFlags,
    /// Keep each seed usage in the corpus while answering its own queries
    #[arg(long)]
    include_seed: bool,
    /// Comma-separated thresholds to sweep
    #[arg(long, value_delimiter = ',', value_parser = parse_threshold, conflicts_with = "sweep_k")]
    sweep_t: Option<Vec<Ratio>>,
    /// Comma-separated values of k to sweep
    #[arg(long, value_delimiter = ',', value_parser = clap::value_parser!(u32).range(1..))]
    sweep_k: Option<Vec<u32>>,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, default_value_t = 10)]
    buckets: usize,
    #[arg(long, default_value_t = 100)]
    usages: usize,
    #[arg(long, default_value_t = 3)]
    types: usize,
    /// Number of distinct method names
    #[arg(long, default_value_t = 12)]
    vocab: usize,
    #[arg(long, default_value_t = 3)]
    convention_size: usize,
    /// Conventions per bucket
    #[arg(long, default_value_t = 1)]
    conventions: usize,
    /// Probability of one extra call outside the convention
    #[arg(long, default_value = "0", value_parser = parse_unit)]
    extra_rate: f64,
    /// Probability that a usage drops one call
    #[arg(long, default_value = "0.05", value_parser = parse_unit, conflicts_with = "deviants_per_bucket")]
    deviance_rate: f64,
    /// Exact number of deviants per bucket
    #[arg(long)]
    deviants_per_bucket: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Corpus output file (`.jsonl` selects the JSON-lines format)
    #[arg(long)]
    out: PathBuf,
    /// Ground-truth output file
    #[arg(long)]
    truth: PathBuf,
}

enum Failure {
    Analysis(String),
    Input(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Analysis(_) => 1,
            Failure::Input(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Analysis(m) | Failure::Input(m) => m,
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NoQueries => Failure::Analysis(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

/// Parses `args` and runs the command, returning the process exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{rendered}");
                2
            } else {
                let _ = write!(out, "{rendered}");
                0
            };
        }
    };
    let result = match &cli.command {
        Command::Stats(a) => cmd_stats(a, out),
        Command::Score(a) => cmd_score(a, out),
        Command::Predict(a) => cmd_predict(a, out),
        Command::Eval(a) => cmd_eval(a, out),
        Command::Gen(a) => cmd_gen(a),
    };
    match result.and_then(|()| out.flush().map_err(Failure::from)) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message());
            f.code()
        }
    }
}

fn load(path: &Path) -> Result<Corpus, Failure> {
    corpus::load(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn f6(x: f64) -> String {
    format!("{x:.6}")
}

fn exact(r: Ratio) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn cmd_stats(a: &StatsArgs, out: &mut dyn Write) -> CmdResult {
    let corpus = load(&a.corpus)?;
    let params = a.similarity.params();
    let scores = scoring::score_all(&corpus, &params);
    if scores.is_empty() {
        return Err(Failure::Analysis("corpus is empty".into()));
    }
    let stats = scoring::distribution_stats(&scores, &corpus)?;
    let values: Vec<Ratio> = scores.iter().map(|s| s.s_score).collect();
    let bins = scoring::histogram(&values, a.hist_width)?;

    let rows: Vec<(&str, String)> = vec![
        ("usages", stats.n_usages.to_string()),
        ("types", corpus.n_types().to_string()),
        ("contexts", corpus.n_contexts().to_string()),
        ("buckets", corpus.n_buckets().to_string()),
        ("redundant", stats.n_redundant.to_string()),
        ("frac_redundant", f6(stats.frac_redundant)),
        ("median_s", f6(ratio::to_f64(stats.median_s))),
        ("mean_s", f6(stats.mean_s)),
        ("frac_below_0_1", f6(stats.frac_below_0_1)),
        ("frac_above_0_5", f6(stats.frac_above_0_5)),
        ("frac_above_0_9", f6(stats.frac_above_0_9)),
    ];

    let mut hist_file = match &a.hist_out {
        Some(path) => Some(BufWriter::new(File::create(path)?)),
        None => None,
    };

    match a.format {
        OutputFormat::Csv => {
            writeln!(out, "metric,value")?;
            for (k, v) in &rows {
                writeln!(out, "{k},{v}")?;
            }
            let hist: &mut dyn Write = match hist_file.as_mut() {
                Some(f) => f,
                None => {
                    writeln!(out)?;
                    &mut *out
                }
            };
            writeln!(hist, "bin_start,bin_end,count")?;
            for b in &bins {
                writeln!(
                    hist,
                    "{},{},{}",
                    ratio::display(b.start),
                    ratio::display(b.end),
                    b.count
                )?;
            }
        }
        OutputFormat::Jsonl => {
            let mut obj = serde_json::Map::new();
            for (k, v) in &rows {
                obj.insert(k.to_string(), serde_json::from_str(v).unwrap_or(json!(v)));
            }
            writeln!(out, "{}", serde_json::Value::Object(obj))?;
            let hist: &mut dyn Write = match hist_file.as_mut() {
                Some(f) => f,
                None => &mut *out,
            };
            for b in &bins {
                let line = json!({
                    "bin_start": ratio::to_f64(b.start),
                    "bin_end": ratio::to_f64(b.end),
                    "count": b.count,
                });
                writeln!(hist, "{line}")?;
            }
        }
        OutputFormat::Human => {
            for (k, v) in &rows {
                writeln!(out, "{k:<16} {v}")?;
            }
            let hist: &mut dyn Write = match hist_file.as_mut() {
                Some(f) => f,
                None => {
                    writeln!(out)?;
                    &mut *out
                }
            };
            for b in &bins {
                writeln!(
                    hist,
                    "[{:.2}, {:.2}{} {}",
                    ratio::to_f64(b.start),
                    ratio::to_f64(b.end),
                    if b.end == Ratio::from_integer(1) {
                        "]"
                    } else {
                        ")"
                    },
                    b.count
                )?;
            }
        }
    }
    if let Some(mut f) = hist_file {
        f.flush()?;
    }
    Ok(())
}

fn explain(r: &Recommendation, a_count: usize) -> String {
    format!(
        "{} of {} similar usages also call {} ({:.2})",
        r.support,
        a_count,
        r.method,
        ratio::to_f64(r.likelihood)
    )
}

fn recommendations_json(recs: &[Recommendation]) -> serde_json::Value {
    recs.iter()
        .map(|r| {
            json!({
                "method": r.method,
                "likelihood": ratio::to_f64(r.likelihood),
                "support": r.support,
            })
        })
        .collect()
}

fn cmd_score(a: &ScoreArgs, out: &mut dyn Write) -> CmdResult {
    let corpus = load(&a.corpus)?;
    let params = a.similarity.params();
    let cfg = a.threshold.config();
    let scored: Vec<ScoredUsage> = scoring::score_all(&corpus, &params)
        .into_iter()
        .filter(|s| a.min_score.is_none_or(|min| s.s_score >= min))
        .take(a.top.unwrap_or(usize::MAX))
        .collect();

    let mut csv_out = (a.format == OutputFormat::Csv).then(|| csv::Writer::from_writer(Vec::new()));
    if let Some(w) = csv_out.as_mut() {
        w.write_record([
            "rank", "id", "type", "context", "s_score", "s_exact", "e_count", "a_count", "missing",
            "origin",
        ])?;
    }
    let mut lines = Vec::new();
    for (rank, s) in scored.iter().enumerate() {
        let usage = corpus.get(&s.id).expect("scored ids come from the corpus");
        let query = Query::from_usage(usage);
        let sim = similarity::neighborhood(&query, &corpus, &params);
        let missing = prediction::missing(&query, &sim.almost, &corpus, &cfg);
        let origin = usage.origin.as_deref().unwrap_or("");
        match a.format {
            OutputFormat::Csv => {
                let missing: Vec<String> = missing
                    .iter()
                    .map(|r| {
                        format!(
                            "{}:{:.6}:{}/{}",
                            r.method,
                            ratio::to_f64(r.likelihood),
                            r.support,
                            s.a_count
                        )
                    })
                    .collect();
                csv_out.as_mut().unwrap().write_record([
                    (rank + 1).to_string(),
                    s.id.clone(),
                    usage.type_name.clone(),
                    usage.context.clone(),
                    f6(ratio::to_f64(s.s_score)),
                    exact(s.s_score),
                    s.e_count.to_string(),
                    s.a_count.to_string(),
                    missing.join(";"),
                    origin.to_string(),
                ])?;
            }
            OutputFormat::Jsonl => {
                let line = json!({
                    "rank": rank + 1,
                    "id": s.id,
                    "type": usage.type_name,
                    "context": usage.context,
                    "origin": usage.origin,
                    "s_score": ratio::to_f64(s.s_score),
                    "s_exact": exact(s.s_score),
                    "e_count": s.e_count,
                    "a_count": s.a_count,
                    "missing": recommendations_json(&missing),
                });
                lines.push(line.to_string());
            }
            OutputFormat::Human => {
                let mut text = format!(
                    "#{} {} S-score {:.3} ({} exactly similar, {} almost similar)\n    {} in {}",
                    rank + 1,
                    s.id,
                    ratio::to_f64(s.s_score),
                    s.e_count,
                    s.a_count,
                    usage.type_name,
                    usage.context
                );
                if !origin.is_empty() {
                    text.push_str(&format!(" at {origin}"));
                }
                for r in &missing {
                    text.push_str(&format!(
                        "\n    missing {}: {}",
                        r.method,
                        explain(r, s.a_count)
                    ));
                }
                lines.push(text);
            }
        }
    }
    if let Some(w) = csv_out {
        let bytes = w.into_inner().map_err(|e| Failure::Input(e.to_string()))?;
        out.write_all(&bytes)?;
    }
    for line in lines {
        writeln!(out, "{line}")?;
    }
    Ok(())
}

fn split_calls(calls: &str) -> Result<Vec<String>, Failure> {
    if calls.trim().is_empty() {
        return Ok(Vec::new());
    }
    calls
        .split(',')
        .map(|c| {
            let c = c.trim();
            if c.is_empty() {
                Err(Failure::Input("empty method name in --calls".into()))
            } else {
                Ok(c.to_string())
            }
        })
        .collect()
}

fn cmd_predict(a: &PredictArgs, out: &mut dyn Write) -> CmdResult {
    let corpus = load(&a.corpus)?;
    let params = a.similarity.params();
    let cfg = a.threshold.config();
    let query = Query::new(a.type_name.trim(), a.context.trim(), split_calls(&a.calls)?);
    let sim = similarity::neighborhood(&query, &corpus, &params);
    let score = scoring::s_score(sim.e_count, sim.a_count())?;
    let missing = prediction::missing(&query, &sim.almost, &corpus, &cfg);
    match a.format {
        OutputFormat::Human => {
            writeln!(out, "exactly similar: {}", sim.e_count)?;
            writeln!(out, "almost similar:  {}", sim.a_count())?;
            writeln!(
                out,
                "S-score:         {:.6} ({})",
                ratio::to_f64(score),
                exact(score)
            )?;
            let cmp = if cfg.strict { ">" } else { ">=" };
            if sim.a_count() == 0 {
                writeln!(out, "no almost-similar usages")?;
            } else if missing.is_empty() {
                writeln!(
                    out,
                    "no call with likelihood {cmp} {}",
                    ratio::display(cfg.threshold)
                )?;
            } else {
                writeln!(
                    out,
                    "missing calls (likelihood {cmp} {}):",
                    ratio::display(cfg.threshold)
                )?;
                for r in &missing {
                    writeln!(
                        out,
                        "  {} {:.2}  {}",
                        r.method,
                        ratio::to_f64(r.likelihood),
                        explain(r, sim.a_count())
                    )?;
                }
            }
        }
        OutputFormat::Jsonl => {
            let line = json!({
                "e_count": sim.e_count,
                "a_count": sim.a_count(),
                "s_score": ratio::to_f64(score),
                "s_exact": exact(score),
                "missing": recommendations_json(&missing),
            });
            writeln!(out, "{line}")?;
        }
        OutputFormat::Csv => {
            writeln!(out, "method,likelihood,support,a_count")?;
            for r in &missing {
                writeln!(
                    out,
                    "{},{:.6},{},{}",
                    r.method,
                    ratio::to_f64(r.likelihood),
                    r.support,
                    sim.a_count()
                )?;
            }
        }
    }
    Ok(())
}

fn cmd_eval(a: &EvalArgs, out: &mut dyn Write) -> CmdResult {
    let corpus = load(&a.corpus)?;
    let cfg = EvalConfig {
        prediction: a.threshold.config(),
        similarity: a.similarity.params(),
        include_seed: a.include_seed,
    };
    let reports: Vec<EvalReport> = if let Some(ts) = &a.sweep_t {
        evaluation::sweep_threshold(&corpus, &cfg, ts)?
            .into_iter()
            .map(|(_, r)| r)
            .collect()
    } else if let Some(ks) = &a.sweep_k {
        let ks: Vec<usize> = ks.iter().map(|&k| k as usize).collect();
        evaluation::sweep_k(&corpus, &cfg, &ks)?
            .into_iter()
            .map(|(_, r)| r)
            .collect()
    } else {
        vec![evaluation::evaluate(&corpus, &cfg)?]
    };
    evaluation::write_reports(&reports, out)?;
    Ok(())
}

fn cmd_gen(a: &GenArgs) -> CmdResult {
    let spec = SyntheticSpec {
        n_buckets: a.buckets,
        n_usages: a.usages,
        n_types: a.types,
        method_vocab: a.vocab,
        convention_size: a.convention_size,
        conventions_per_bucket: a.conventions,
        extra_call_rate: a.extra_rate,
        deviance: match a.deviants_per_bucket {
            Some(d) => Deviance::PerBucket(d),
            None => Deviance::Rate(a.deviance_rate),
        },
    };
    let generated = evaluation::gen_synthetic(&spec, a.seed)?;
    corpus::save(&generated.corpus, &a.out)?;
    let mut truth = BufWriter::new(File::create(&a.truth)?);
    evaluation::write_truth(&generated.truth, &mut truth)?;
    truth.flush()?;
    Ok(())
}
