//! `tbix` command line: build, partition, query and analyze index files.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error.

use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analysis::{
    df_histogram, guarantee_percentages, measured_trunc_bits, storage_fraction_curve,
    StorageProfile,
};
use crate::corpus::{Corpus, Query, QueryError, Vocabulary};
use crate::engine::{query_block, query_exhaustive, query_oracle, query_tiered, QueryResult};
use crate::format::IndexFile;
use crate::index::InvertedIndex;
use crate::membership::{BloomModel, ExactModel, MembershipModel, Scope};
use crate::partition::{BlockIndex, TieredIndex};
use crate::synth::{query_text, sample_queries, zipf_texts, ZipfParams};
use crate::TermId;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "tbix",
    version,
    about = "Conjunctive Boolean retrieval over compressed, partially model-replaced inverted indexes",
    after_help = "All storage sizes are reported in bits."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build an index file from a corpus (one document per line).
    Build {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Add a two-tier partition (first k postings per term) to an index file.
    Tier {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        k: u32,
        /// Output file; defaults to rewriting the input index.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Add a block partition (fixed-width doc id ranges) to an index file.
    Blocks {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        beta: u32,
        /// Keep exact postings for terms with df at or below this (0 = off).
        #[arg(long, default_value_t = 0)]
        hybrid: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate one query per line; prints JSON lines.
    Query(QueryArgs),
    /// Document-frequency histogram and storage-fraction curve (sizes in bits).
    Stats {
        #[arg(long)]
        index: PathBuf,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        out: OutputFormat,
        /// Fractions of total index bits, each in (0, 1].
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1"
        )]
        fractions: Vec<f64>,
    },
    /// Estimated storage gain in bits of truncating at each k.
    Gain {
        #[arg(long)]
        index: PathBuf,
        /// Truncation lengths; `max` means the largest df.
        #[arg(long, value_delimiter = ',', required = true)]
        ks: Vec<KValue>,
        /// Model cost in bits per unit; one gain column per value.
        #[arg(long, value_delimiter = ',', default_value = "0,512")]
        s: Vec<f64>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        out: OutputFormat,
    },
    /// Percentage of queries with a guaranteed-complete first tier.
    Guarantees {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        queries: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        ks: Vec<KValue>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        out: OutputFormat,
    },
    /// Run the built-in reference fixture end to end.
    Selftest,
    /// Write a seeded Zipf corpus (and optionally sampled queries).
    Synth(SynthArgs),
}

#[derive(Args, Debug)]
pub struct QueryArgs {
    #[arg(long)]
    pub index: PathBuf,
    #[arg(long, value_enum)]
    pub strategy: Strategy,
    /// Tiered only: scan the second tier when no term is short enough.
    #[arg(long)]
    pub fallback: bool,
    #[arg(long, value_enum, default_value_t = ModelKind::Exact)]
    pub model: ModelKind,
    /// Bloom filter size in bits per (term, doc) pair.
    #[arg(long)]
    pub bits_per_pair: Option<u32>,
    /// Tiered: truncation length, overriding a stored partition.
    #[arg(long)]
    pub k: Option<u32>,
    /// Block: block width, overriding a stored partition.
    #[arg(long)]
    pub beta: Option<u32>,
    #[arg(long)]
    pub hybrid: Option<u32>,
    #[arg(long)]
    pub queries: PathBuf,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 20_000)]
    pub docs: usize,
    #[arg(long, default_value_t = 50_000)]
    pub vocab: usize,
    #[arg(long, default_value_t = 1.0)]
    pub exponent: f64,
    #[arg(long, default_value_t = 50)]
    pub min_len: usize,
    #[arg(long, default_value_t = 500)]
    pub max_len: usize,
    #[arg(long, default_value_t = 0x7b1c)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write sampled 2-5 term queries here.
    #[arg(long)]
    pub queries: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    pub query_count: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Exhaustive,
    Tiered,
    Block,
    Oracle,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    Exact,
    Bloom,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KValue {
    Fixed(u32),
    MaxDf,
}

impl std::str::FromStr for KValue {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "max" {
            return Ok(KValue::MaxDf);
        }
        match s.parse::<u32>() {
            Ok(0) => Err("k must be at least 1".into()),
            Ok(k) => Ok(KValue::Fixed(k)),
            Err(_) => Err(format!("expected a positive integer or `max`, got `{s}`")),
        }
    }
}

impl KValue {
    fn resolve(self, index: &InvertedIndex) -> u32 {
        match self {
            KValue::Fixed(k) => k,
            KValue::MaxDf => index.max_df().max(1),
        }
    }
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(String),
}

type CliResult = Result<(), CliError>;

fn data<E: std::fmt::Display>(path: &Path) -> impl FnOnce(E) -> CliError + '_ {
    move |e| CliError::Data(format!("{}: {e}", path.display()))
}

fn io_err(e: std::io::Error) -> CliError {
    CliError::Data(format!("write failed: {e}"))
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(err, "usage error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Data(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_DATA
        }
    }
}

fn execute(command: Command, out: &mut dyn Write) -> CliResult {
    match command {
        Command::Build { corpus, out: path } => {
            let file = fs::File::open(&corpus).map_err(data(&corpus))?;
            let parsed = Corpus::ingest(BufReader::new(file)).map_err(data(&corpus))?;
            let index = InvertedIndex::build(&parsed);
            let file = IndexFile::new(index, Some(parsed.vocabulary()));
            write_index(&path, &file)?;
            writeln!(
                out,
                "docs={} terms={} index_bits={}",
                file.index.doc_count(),
                file.index.term_count(),
                file.index.total_bits()
            )
            .map_err(io_err)
        }
        Command::Tier {
            index,
            k,
            out: dest,
        } => {
            if k == 0 {
                return Err(CliError::Usage("--k must be at least 1".into()));
            }
            let mut file = read_index(&index)?;
            let tiers = TieredIndex::build(&file.index, k).map_err(data(&index))?;
            let replaced = tiers.replaced_set().len();
            file.tiered = Some(tiers);
            write_index(dest.as_deref().unwrap_or(&index), &file)?;
            writeln!(out, "k={k} replaced={replaced}").map_err(io_err)
        }
        Command::Blocks {
            index,
            beta,
            hybrid,
            out: dest,
        } => {
            if beta == 0 {
                return Err(CliError::Usage("--beta must be at least 1".into()));
            }
            let mut file = read_index(&index)?;
            let blocks = BlockIndex::build(&file.index, beta, hybrid).map_err(data(&index))?;
            let count = blocks.block_count();
            file.blocks = Some(blocks);
            write_index(dest.as_deref().unwrap_or(&index), &file)?;
            writeln!(out, "beta={beta} hybrid={hybrid} blocks={count}").map_err(io_err)
        }
        Command::Query(args) => run_queries(args, out),
        Command::Stats {
            index,
            out: OutputFormat::Csv,
            fractions,
        } => {
            if let Some(f) = fractions.iter().find(|&&f| !(f > 0.0 && f <= 1.0)) {
                return Err(CliError::Usage(format!("fraction {f} is outside (0, 1]")));
            }
            let file = read_index(&index)?;
            let curve = storage_fraction_curve(&file.index, &fractions).map_err(data(&index))?;
            let mut w = csv::Writer::from_writer(out);
            let rows = [
                (
                    "summary",
                    "docs".to_string(),
                    file.index.doc_count().to_string(),
                ),
                (
                    "summary",
                    "terms".to_string(),
                    file.index.term_count().to_string(),
                ),
                (
                    "summary",
                    "total_bits".to_string(),
                    file.index.total_bits().to_string(),
                ),
            ]
            .into_iter()
            .chain(
                df_histogram(&file.index)
                    .into_iter()
                    .map(|(df, n)| ("df_histogram", df.to_string(), n.to_string())),
            )
            .chain(
                fractions
                    .iter()
                    .zip(curve)
                    .map(|(f, m)| ("storage_fraction", f.to_string(), m.to_string())),
            );
            w.write_record(["section", "key", "value"])
                .map_err(csv_err)?;
            for (section, key, value) in rows {
                w.write_record([section, &key, &value]).map_err(csv_err)?;
            }
            w.flush().map_err(io_err)
        }
        Command::Gain {
            index,
            ks,
            s,
            out: OutputFormat::Csv,
        } => {
            if let Some(bad) = s.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                return Err(CliError::Usage(format!(
                    "--s value {bad} must be non-negative"
                )));
            }
            let file = read_index(&index)?;
            let profile = StorageProfile::new(&file.index);
            let mut header = vec!["k".to_string(), "replaced".into(), "trunc_bits".into()];
            header.extend(s.iter().map(|v| format!("gain_s{v}")));
            header.extend(["trunc_estimate".into(), "measured_trunc_bits".into()]);
            let mut w = csv::Writer::from_writer(out);
            w.write_record(&header).map_err(csv_err)?;
            for k in resolve_ks(&ks, &file.index) {
                let est = profile.estimate_trunc_list_size(k).map_err(data(&index))?;
                let mut row = vec![
                    k.to_string(),
                    profile.replaced_count(k).to_string(),
                    est.bits.to_string(),
                ];
                for &v in &s {
                    row.push(profile.gain(k, v).map_err(data(&index))?.to_string());
                }
                row.push(format!("{:?}", est.kind).to_lowercase());
                row.push(measured_trunc_bits(&file.index, k).to_string());
                w.write_record(&row).map_err(csv_err)?;
            }
            w.flush().map_err(io_err)
        }
        Command::Guarantees {
            index,
            queries,
            ks,
            out: OutputFormat::Csv,
        } => {
            let file = read_index(&index)?;
            let vocab = require_vocab(&file, &index)?;
            let parsed: Vec<Query> = read_query_lines(&queries)?
                .iter()
                .filter_map(|line| match vocab.parse_query(line) {
                    Ok(q) => Some(q),
                    Err(QueryError::UnknownTerms(tokens)) => Some(Query {
                        terms: Vec::new(),
                        unknown: tokens,
                    }),
                    Err(QueryError::Empty) => None,
                })
                .collect();
            if parsed.is_empty() {
                return Err(CliError::Data(format!("{}: no queries", queries.display())));
            }
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["k", "pct_with", "pct_without", "queries"])
                .map_err(csv_err)?;
            for k in resolve_ks(&ks, &file.index) {
                let g = guarantee_percentages(&parsed, &file.index, k).map_err(data(&queries))?;
                w.write_record([
                    k.to_string(),
                    g.pct_with_model.to_string(),
                    g.pct_without_model.to_string(),
                    g.query_count.to_string(),
                ])
                .map_err(csv_err)?;
            }
            w.flush().map_err(io_err)
        }
        Command::Selftest => {
            let outcomes = crate::selftest::run();
            let mut failed = 0;
            for o in &outcomes {
                let tag = if o.passed { "PASS" } else { "FAIL" };
                failed += usize::from(!o.passed);
                writeln!(out, "{tag} {}: {}", o.name, o.detail).map_err(io_err)?;
            }
            writeln!(out, "{} passed, {failed} failed", outcomes.len() - failed).map_err(io_err)?;
            if failed == 0 {
                Ok(())
            } else {
                Err(CliError::Data(format!("{failed} selftest checks failed")))
            }
        }
        Command::Synth(args) => {
            if args.min_len == 0 || args.min_len > args.max_len || args.docs == 0 || args.vocab == 0
            {
                return Err(CliError::Usage(
                    "need docs >= 1, vocab >= 1 and 1 <= min-len <= max-len".into(),
                ));
            }
            let params = ZipfParams {
                docs: args.docs,
                vocab: args.vocab,
                exponent: args.exponent,
                min_len: args.min_len,
                max_len: args.max_len,
                seed: args.seed,
            };
            let texts = zipf_texts(&params);
            let mut body = texts.join("\n");
            body.push('\n');
            fs::write(&args.out, body).map_err(data(&args.out))?;
            if let Some(qpath) = &args.queries {
                let corpus = Corpus::from_texts(&texts).map_err(data(&args.out))?;
                let qs = sample_queries(&corpus, args.query_count, 2, 5, args.seed ^ 0x51);
                let mut lines: String = qs.iter().map(|q| query_text(&corpus, q) + "\n").collect();
                if lines.is_empty() {
                    lines.push('\n');
                }
                fs::write(qpath, lines).map_err(data(qpath))?;
            }
            writeln!(out, "docs={}", texts.len()).map_err(io_err)
        }
    }
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Data(format!("csv output failed: {e}"))
}

fn resolve_ks(ks: &[KValue], index: &InvertedIndex) -> Vec<u32> {
    ks.iter().map(|k| k.resolve(index)).collect()
}

fn read_index(path: &Path) -> Result<IndexFile, CliError> {
    let bytes = fs::read(path).map_err(data(path))?;
    IndexFile::from_bytes(&bytes).map_err(data(path))
}

fn write_index(path: &Path, file: &IndexFile) -> CliResult {
    fs::write(path, file.to_bytes()).map_err(data(path))
}

fn require_vocab<'a>(file: &'a IndexFile, path: &Path) -> Result<&'a Vocabulary, CliError> {
    file.vocab.as_ref().ok_or_else(|| {
        CliError::Data(format!(
            "{}: index has no vocabulary section",
            path.display()
        ))
    })
}

fn read_query_lines(path: &Path) -> Result<Vec<String>, CliError> {
    let text = fs::read_to_string(path).map_err(data(path))?;
    Ok(text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(str::to_owned)
        .collect())
}

#[derive(Serialize)]
struct QueryLine<'a> {
    query: &'a str,
    docids: &'a [u32],
    candidates_scanned: u64,
    model_probes: u64,
    guaranteed: Option<bool>,
    used_fallback: Option<bool>,
    unknown: &'a [String],
}

fn run_queries(args: QueryArgs, out: &mut dyn Write) -> CliResult {
    if args.fallback && args.strategy != Strategy::Tiered {
        return Err(CliError::Usage(
            "--fallback requires --strategy tiered".into(),
        ));
    }
    if args.k.is_some() && args.strategy != Strategy::Tiered {
        return Err(CliError::Usage("--k requires --strategy tiered".into()));
    }
    if (args.beta.is_some() || args.hybrid.is_some()) && args.strategy != Strategy::Block {
        return Err(CliError::Usage(
            "--beta/--hybrid require --strategy block".into(),
        ));
    }
    if args.bits_per_pair.is_some() && args.model != ModelKind::Bloom {
        return Err(CliError::Usage(
            "--bits-per-pair requires --model bloom".into(),
        ));
    }
    if args.k == Some(0) || args.beta == Some(0) || args.bits_per_pair == Some(0) {
        return Err(CliError::Usage(
            "--k, --beta and --bits-per-pair must be at least 1".into(),
        ));
    }

    let file = read_index(&args.index)?;
    let vocab = require_vocab(&file, &args.index)?;
    let lines = read_query_lines(&args.queries)?;
    let index = &file.index;

    let tiered = match (args.strategy, args.k, &file.tiered) {
        (Strategy::Tiered, Some(k), _) => {
            Some(TieredIndex::build(index, k).map_err(data(&args.index))?)
        }
        (Strategy::Tiered, None, Some(t)) => Some(t.clone()),
        (Strategy::Tiered, None, None) => {
            return Err(CliError::Data(format!(
                "{}: no tier partition stored; run `tbix tier` or pass --k",
                args.index.display()
            )))
        }
        _ => None,
    };
    let blocks = match (args.strategy, args.beta, &file.blocks) {
        (Strategy::Block, Some(beta), _) => Some(
            BlockIndex::build(index, beta, args.hybrid.unwrap_or(0)).map_err(data(&args.index))?,
        ),
        (Strategy::Block, None, Some(b)) if args.hybrid.is_none() => Some(b.clone()),
        (Strategy::Block, None, _) if args.hybrid.is_some() => {
            return Err(CliError::Usage("--hybrid requires --beta".into()))
        }
        (Strategy::Block, None, _) => {
            return Err(CliError::Data(format!(
                "{}: no block partition stored; run `tbix blocks` or pass --beta",
                args.index.display()
            )))
        }
        _ => None,
    };

    let scope = match (&tiered, &blocks) {
        (Some(t), _) => Scope::Terms(t.replaced_set()),
        (_, Some(b)) => (0..b.term_count() as TermId)
            .filter(|&t| b.hybrid_list(t).is_none())
            .collect(),
        _ => Scope::All,
    };
    let model: Option<Box<dyn MembershipModel>> = match (args.strategy, args.model) {
        (Strategy::Oracle, _) => None,
        (_, ModelKind::Exact) => Some(Box::new(ExactModel::build(index, &scope))),
        (_, ModelKind::Bloom) => Some(Box::new(BloomModel::build(
            index,
            &scope,
            args.bits_per_pair.unwrap_or(16),
        ))),
    };

    for line in &lines {
        let (query, result) = match vocab.parse_query(line) {
            Ok(q) => {
                let r = evaluate(
                    &args,
                    &q,
                    index,
                    tiered.as_ref(),
                    blocks.as_ref(),
                    model.as_deref(),
                )
                .map_err(|e| CliError::Data(format!("query `{line}`: {e}")))?;
                (q, r)
            }
            Err(QueryError::Empty) => continue,
            Err(QueryError::UnknownTerms(tokens)) => (
                Query {
                    terms: Vec::new(),
                    unknown: tokens,
                },
                QueryResult {
                    doc_ids: Vec::new(),
                    candidates_scanned: 0,
                    model_probes: 0,
                    guaranteed: None,
                    used_fallback: None,
                    unknown_terms: true,
                },
            ),
        };
        let record = QueryLine {
            query: line,
            docids: &result.doc_ids,
            candidates_scanned: result.candidates_scanned,
            model_probes: result.model_probes,
            guaranteed: result.guaranteed,
            used_fallback: result.used_fallback,
            unknown: &query.unknown,
        };
        let json = serde_json::to_string(&record).map_err(|e| CliError::Data(e.to_string()))?;
        writeln!(out, "{json}").map_err(io_err)?;
    }
    Ok(())
}

fn evaluate(
    args: &QueryArgs,
    q: &Query,
    index: &InvertedIndex,
    tiered: Option<&TieredIndex>,
    blocks: Option<&BlockIndex>,
    model: Option<&dyn MembershipModel>,
) -> Result<QueryResult, crate::engine::EngineError> {
    match (args.strategy, model) {
        (Strategy::Oracle, _) => query_oracle(q, index),
        (Strategy::Exhaustive, Some(m)) => query_exhaustive(q, &m, index.doc_count()),
        (Strategy::Tiered, Some(m)) => {
            query_tiered(q, tiered.expect("tiered partition"), &m, args.fallback)
        }
        (Strategy::Block, Some(m)) => query_block(q, blocks.expect("block partition"), &m),
        (_, None) => unreachable!("model built for every model-backed strategy"),
    }
}
