use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use bibcount::collab::{country_metrics, ReductionBasis};
use bibcount::counting::{subject_group_count, CountingMethod, FractionalMode, ScoreTable};
use bibcount::ingest::{
    apply_filter, parse_csv, parse_jsonl, write_corpus_csv, write_corpus_jsonl, Filter,
    ValidationReport,
};
use bibcount::model::{Corpus, CountryCode, DocType, SubjectScheme, ALL_SLICE};
use bibcount::rank::{
    assign_ranks, assign_ranks_including_unresolved, score_matrix, score_order, RankTable,
    SrccBasis, Statistic,
};
use bibcount::replication::{replicate, FixtureSet, Target};
use bibcount::synth::{generate, SynthParams};
use bibcount::table::{write_table, Cell, Format, Table};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Country-level publication counting, collaboration metrics and rank
/// correlations.
#[derive(Parser)]
#[command(name = "bibcount", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a corpus and report per-record issues.
    Ingest(IngestArgs),
    /// Per-country whole or fractional scores.
    Count(CountArgs),
    /// ICP share, reduction and their ratio per country.
    Collab(CollabArgs),
    /// Ranked countries with display and tie ranks.
    Rank(CountArgs),
    /// Correlation matrix of country scores across subject slices.
    Correlate(CorrelateArgs),
    /// Scores and ranks of every country in every subject slice.
    Subjects(SubjectsArgs),
    /// Recompute the 2016 country tables from the embedded fixtures.
    Replicate(ReplicateArgs),
    /// Generate a deterministic synthetic corpus.
    Synth(SynthArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum InputFormat {
    Jsonl,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Whole,
    Fractional,
}

#[derive(Args)]
struct InputArgs {
    /// Corpus file, or `-` for stdin.
    #[arg(long)]
    input: String,
    /// Defaults to the file extension; stdin defaults to jsonl.
    #[arg(long, value_enum)]
    input_format: Option<InputFormat>,
    /// JSON map of group name to subject codes.
    #[arg(long)]
    scheme: Option<PathBuf>,
    /// Years to keep: `2016`, `2015-2017` or `2015,2017`.
    #[arg(long)]
    years: Option<String>,
    /// Comma-separated document types, `research` or `all`.
    #[arg(long, default_value = "research")]
    doc_types: String,
}

#[derive(Args)]
struct OutputArgs {
    /// Output file; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    /// csv, md or json.
    #[arg(long, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct MethodArgs {
    #[arg(long, value_enum, default_value = "whole")]
    method: Method,
    /// Fractional split: author or country.
    #[arg(long, default_value = "author")]
    mode: FractionalMode,
}

impl MethodArgs {
    fn method(&self) -> CountingMethod {
        match self.method {
            Method::Whole => CountingMethod::Whole,
            Method::Fractional => self.mode.into(),
        }
    }
}

#[derive(Args)]
struct IngestArgs {
    /// Corpus file, or `-` for stdin.
    #[arg(long)]
    input: String,
    #[arg(long, value_enum)]
    input_format: Option<InputFormat>,
    /// Write the accepted records in this format instead of the report.
    #[arg(long, value_enum)]
    emit: Option<InputFormat>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct CountArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    method: MethodArgs,
    /// Subject group to count; `ALL` for every record.
    #[arg(long, default_value = ALL_SLICE)]
    group: String,
    /// Rank the unresolved pseudo-country ZZ alongside real countries.
    #[arg(long)]
    include_unresolved: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct CollabArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value = "author")]
    mode: FractionalMode,
    /// Reduction denominator: fc or wc.
    #[arg(long, default_value = "fc")]
    basis: ReductionBasis,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct CorrelateArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    method: MethodArgs,
    /// Comma-separated slices; defaults to ALL plus every scheme group.
    #[arg(long)]
    slices: Option<String>,
    /// spearman or pearson.
    #[arg(long, default_value = "spearman")]
    stat: Statistic,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SubjectsArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    method: MethodArgs,
    #[arg(long)]
    slices: Option<String>,
    /// Rank the unresolved pseudo-country ZZ alongside real countries.
    #[arg(long)]
    include_unresolved: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ReplicateArgs {
    /// table1, table2, correlations, table4, fig1 or all.
    #[arg(long, default_value = "all")]
    target: Target,
    #[arg(long, default_value = "fc")]
    basis: ReductionBasis,
    /// Rank correlation used for the subject-area matrix.
    #[arg(long, default_value = "closed-form-reduced")]
    srcc_basis: SrccBasis,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Number of records.
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Country weights such as `US=10,CN=9,GB=3`.
    #[arg(long)]
    countries: Option<String>,
    #[arg(long, default_value_t = 1)]
    min_authors: usize,
    #[arg(long, default_value_t = 6)]
    max_authors: usize,
    #[arg(long, default_value_t = 0.3)]
    collab_prob: f64,
    /// Comma-separated subject codes to draw from.
    #[arg(long)]
    subjects: Option<String>,
    #[arg(long, default_value_t = 1)]
    min_subjects: usize,
    #[arg(long, default_value_t = 3)]
    max_subjects: usize,
    #[arg(long, default_value_t = 0.0)]
    multi_affiliation_prob: f64,
    #[arg(long, default_value_t = 0.0)]
    unresolved_prob: f64,
    #[arg(long, default_value_t = 2016)]
    year: i32,
    #[arg(long, value_enum, default_value = "jsonl")]
    emit: InputFormat,
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Failure of a run that still produced its output (failed checks,
/// rejected records).
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct Unsuccessful(String);

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    let io = e.chain().any(|c| {
        c.is::<io::Error>()
            || matches!(
                c.downcast_ref::<bibcount::Error>(),
                Some(bibcount::Error::Io(_))
            )
            || c.downcast_ref::<bibcount::Error>()
                .and_then(|b| match b {
                    bibcount::Error::Csv(csv) => Some(csv.is_io_error()),
                    _ => None,
                })
                .unwrap_or(false)
    });
    if io {
        2
    } else {
        1
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Ingest(a) => ingest(a),
        Command::Count(a) => count(a),
        Command::Collab(a) => collab(a),
        Command::Rank(a) => rank(a),
        Command::Correlate(a) => correlate(a),
        Command::Subjects(a) => subjects(a),
        Command::Replicate(a) => replicate_cmd(a),
        Command::Synth(a) => synth(a),
    }
}

fn read_input(path: &str) -> Result<Vec<u8>> {
    if path == "-" {
        let mut buf = Vec::new();
        io::stdin().read_to_end(&mut buf).context("reading stdin")?;
        Ok(buf)
    } else {
        fs::read(path).with_context(|| format!("reading {path}"))
    }
}

fn detect_format(path: &str, explicit: Option<InputFormat>) -> InputFormat {
    explicit.unwrap_or_else(
        || match Path::new(path).extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => InputFormat::Csv,
            _ => InputFormat::Jsonl,
        },
    )
}

fn parse_corpus(path: &str, format: Option<InputFormat>) -> Result<(Corpus, ValidationReport)> {
    let bytes = read_input(path)?;
    let provenance = if path == "-" { "stdin" } else { path };
    let parsed = match detect_format(path, format) {
        InputFormat::Jsonl => parse_jsonl(bytes.as_slice(), provenance),
        InputFormat::Csv => parse_csv(bytes.as_slice(), provenance),
    };
    parsed.with_context(|| format!("parsing {provenance}"))
}

fn parse_years(spec: &str) -> Result<BTreeSet<i32>> {
    let mut years = BTreeSet::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let year = |s: &str| {
            s.trim()
                .parse::<i32>()
                .with_context(|| format!("invalid year {s:?}"))
        };
        match part.split_once('-') {
            Some((lo, hi)) => {
                let (lo, hi) = (year(lo)?, year(hi)?);
                if lo > hi {
                    bail!("empty year range {part:?}");
                }
                years.extend(lo..=hi);
            }
            None => {
                years.insert(year(part)?);
            }
        }
    }
    Ok(years)
}

fn parse_doc_types(spec: &str) -> Result<BTreeSet<DocType>> {
    match spec.trim() {
        "all" => Ok(BTreeSet::new()),
        "research" => Ok(DocType::RESEARCH.into_iter().collect()),
        list => list
            .split(',')
            .map(|t| t.trim().parse::<DocType>().map_err(anyhow::Error::msg))
            .collect(),
    }
}

/// Parses, attaches the scheme and applies the filters. Rejected records
/// are reported on stderr and left out.
fn load(args: &InputArgs) -> Result<Corpus> {
    let (corpus, report) = parse_corpus(&args.input, args.input_format)?;
    if !report.errors.is_empty() {
        eprintln!(
            "warning: {} of {} records rejected; run `bibcount ingest` for details",
            report.records_rejected,
            report.input_records()
        );
    }
    let corpus = match &args.scheme {
        Some(path) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let scheme = SubjectScheme::from_json(&text)
                .with_context(|| format!("parsing {}", path.display()))?;
            corpus.with_scheme(scheme)
        }
        None => corpus,
    };
    let filter = Filter {
        years: match &args.years {
            Some(spec) => parse_years(spec)?,
            None => BTreeSet::new(),
        },
        doc_types: parse_doc_types(&args.doc_types)?,
    };
    Ok(apply_filter(&corpus, &filter))
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes()).context("writing stdout")?;
            out.flush().context("writing stdout")
        }
    }
}

fn emit_table(table: &Table, out: &OutputArgs) -> Result<()> {
    emit(out.output.as_deref(), &write_table(table, out.format))
}

fn score_precision(method: CountingMethod) -> usize {
    if method.is_fractional() {
        2
    } else {
        0
    }
}

fn ordered_scores(table: &ScoreTable) -> Vec<(CountryCode, f64)> {
    let mut items: Vec<_> = table.scores.iter().map(|(c, s)| (*c, *s)).collect();
    items.sort_by(score_order);
    items
}

fn ranked(scores: &ScoreTable, include_unresolved: bool) -> RankTable {
    if include_unresolved {
        assign_ranks_including_unresolved(scores)
    } else {
        assign_ranks(scores)
    }
}

fn slice_list(spec: Option<&str>, corpus: &Corpus) -> Vec<String> {
    match spec {
        Some(s) => s
            .split(',')
            .map(|p| p.trim().to_string())
            .filter(|p| !p.is_empty())
            .collect(),
        None => std::iter::once(ALL_SLICE.to_string())
            .chain(corpus.scheme().groups().keys().cloned())
            .collect(),
    }
}

fn ingest(a: IngestArgs) -> Result<()> {
    let (corpus, report) = parse_corpus(&a.input, a.input_format)?;
    let summary = format!(
        "{} records read: {} accepted, {} rejected, {} warnings",
        report.input_records(),
        report.records_accepted,
        report.records_rejected,
        report.warnings.len()
    );
    match a.emit {
        Some(format) => {
            let mut buf = Vec::new();
            match format {
                InputFormat::Jsonl => write_corpus_jsonl(&corpus, &mut buf)?,
                InputFormat::Csv => write_corpus_csv(&corpus, &mut buf)?,
            }
            emit(a.output.output.as_deref(), &String::from_utf8(buf)?)?;
            for issue in &report.errors {
                eprintln!("error: {}: {}", issue.record_id, issue.message);
            }
        }
        None => {
            let mut t = Table::new()
                .column("severity", 0)
                .column("record_id", 0)
                .column("message", 0);
            for (severity, issues) in [("error", &report.errors), ("warning", &report.warnings)] {
                for issue in issues {
                    t.push(vec![
                        severity.into(),
                        issue.record_id.clone().into(),
                        issue.message.clone().into(),
                    ]);
                }
            }
            emit_table(&t, &a.output)?;
        }
    }
    eprintln!("{summary}");
    if report.records_rejected > 0 {
        return Err(Unsuccessful(format!("{} records rejected", report.records_rejected)).into());
    }
    Ok(())
}

fn count(a: CountArgs) -> Result<()> {
    let corpus = load(&a.input)?;
    let method = a.method.method();
    let scores = subject_group_count(&corpus, &a.group, method)?;
    let mut t = Table::new()
        .column("country", 0)
        .column(method.label(), score_precision(method));
    for (c, s) in ordered_scores(&scores) {
        t.push(vec![c.as_str().into(), s.into()]);
    }
    emit_table(&t, &a.output)
}

fn rank(a: CountArgs) -> Result<()> {
    let corpus = load(&a.input)?;
    let method = a.method.method();
    let scores = subject_group_count(&corpus, &a.group, method)?;
    let ranks = ranked(&scores, a.include_unresolved);
    let mut t = Table::new()
        .column("rank", 0)
        .column("country", 0)
        .column(method.label(), score_precision(method))
        .column("tie_rank", 1);
    for e in &ranks.entries {
        t.push(vec![
            e.display_rank.into(),
            e.country.as_str().into(),
            e.score.into(),
            e.tie_rank.into(),
        ]);
    }
    emit_table(&t, &a.output)
}

fn collab(a: CollabArgs) -> Result<()> {
    let corpus = load(&a.input)?;
    let rows = country_metrics(&corpus, a.mode, a.basis)?;
    let mut t = Table::new()
        .column("country", 0)
        .column("wc", 0)
        .column("fc", 2)
        .column("icp", 0)
        .column("icp_pct", 1)
        .column("reduction_pct", 1)
        .column("ratio", 2);
    for m in rows {
        t.push(vec![
            m.country.as_str().into(),
            m.wc.into(),
            m.fc.into(),
            (m.icp as i64).into(),
            m.icp_pct.into(),
            m.reduction_pct.into(),
            m.ratio.into(),
        ]);
    }
    emit_table(&t, &a.output)
}

fn correlate(a: CorrelateArgs) -> Result<()> {
    let corpus = load(&a.input)?;
    let method = a.method.method();
    let tables = slice_list(a.slices.as_deref(), &corpus)
        .iter()
        .map(|s| subject_group_count(&corpus, s, method))
        .collect::<bibcount::Result<Vec<_>>>()?;
    let matrix = score_matrix(&tables, a.stat)?;
    if !matrix.dropped.is_empty() {
        let dropped: Vec<&str> = matrix.dropped.iter().map(CountryCode::as_str).collect();
        eprintln!(
            "note: countries missing from some slices were left out: {}",
            dropped.join(" ")
        );
    }
    let mut t = Table::new().column("slice", 0);
    for label in &matrix.labels {
        t = t.column(label.clone(), 3);
    }
    for (label, row) in matrix.labels.iter().zip(&matrix.values) {
        let mut cells: Vec<Cell> = vec![label.clone().into()];
        cells.extend(row.iter().map(|v| Cell::from(*v)));
        t.push(cells);
    }
    emit_table(&t, &a.output)
}

fn subjects(a: SubjectsArgs) -> Result<()> {
    let corpus = load(&a.input)?;
    let method = a.method.method();
    let mut t = Table::new()
        .column("group", 0)
        .column("country", 0)
        .column(method.label(), score_precision(method))
        .column("rank", 0);
    for slice in slice_list(a.slices.as_deref(), &corpus) {
        let scores = subject_group_count(&corpus, &slice, method)?;
        for e in ranked(&scores, a.include_unresolved).entries {
            t.push(vec![
                scores.slice.clone().into(),
                e.country.as_str().into(),
                e.score.into(),
                e.display_rank.into(),
            ]);
        }
    }
    emit_table(&t, &a.output)
}

fn replicate_cmd(a: ReplicateArgs) -> Result<()> {
    let fixtures = FixtureSet::load()?;
    let report = replicate(&fixtures, a.target, a.basis, a.srcc_basis)?;
    emit(a.output.output.as_deref(), &report.render(a.output.format))?;
    for flag in report.flagged() {
        eprintln!("flagged: {flag}");
    }
    let failures = report.failures();
    if !failures.is_empty() {
        for f in &failures {
            eprintln!("out of tolerance: {f}");
        }
        return Err(Unsuccessful(format!("{} values out of tolerance", failures.len())).into());
    }
    Ok(())
}

fn parse_weights(spec: &str) -> Result<BTreeMap<CountryCode, f64>> {
    spec.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|pair| {
            let (code, weight) = pair
                .split_once('=')
                .with_context(|| format!("expected CODE=WEIGHT, got {pair:?}"))?;
            let weight: f64 = weight
                .trim()
                .parse()
                .with_context(|| format!("invalid weight in {pair:?}"))?;
            Ok((CountryCode::normalize(code)?, weight))
        })
        .collect()
}

fn synth(a: SynthArgs) -> Result<()> {
    let defaults = SynthParams::default();
    let params = SynthParams {
        seed: a.seed,
        n_records: a.n,
        country_weights: match &a.countries {
            Some(spec) => parse_weights(spec)?,
            None => defaults.country_weights,
        },
        authors_per_paper: (a.min_authors, a.max_authors),
        collab_prob: a.collab_prob,
        subject_pool: match &a.subjects {
            Some(spec) => spec
                .split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect(),
            None => defaults.subject_pool,
        },
        subjects_per_paper: (a.min_subjects, a.max_subjects),
        multi_affiliation_prob: a.multi_affiliation_prob,
        unresolved_prob: a.unresolved_prob,
        year: a.year,
    };
    let corpus = generate(&params)?;
    let mut buf = Vec::new();
    match a.emit {
        InputFormat::Jsonl => write_corpus_jsonl(&corpus, &mut buf)?,
        InputFormat::Csv => write_corpus_csv(&corpus, &mut buf)?,
    }
    emit(a.output.as_deref(), &String::from_utf8(buf)?)
}
