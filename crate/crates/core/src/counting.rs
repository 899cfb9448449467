//! Whole and fractional counting of publication credit per country.
//!
//! Records are visited in id order and reduced in fixed-size chunks whose
//! partial sums are merged in chunk order. The parallel and sequential paths
//! therefore produce bit-identical scores, independent of the input order of
//! records.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Corpus, CountryCode, PublicationRecord, ALL_SLICE, UNRESOLVED};

/// Records per reduction chunk.
const CHUNK: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum CountingMethod {
    Whole,
    FractionalAuthor,
    FractionalCountry,
}

impl CountingMethod {
    pub fn is_fractional(self) -> bool {
        !matches!(self, CountingMethod::Whole)
    }

    pub fn label(self) -> &'static str {
        match self {
            CountingMethod::Whole => "whole",
            CountingMethod::FractionalAuthor => "fractional-author",
            CountingMethod::FractionalCountry => "fractional-country",
        }
    }
}

impl fmt::Display for CountingMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// How a record's unit of fractional credit is split.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum FractionalMode {
    /// 1/n per author, split equally across that author's countries.
    #[default]
    Author,
    /// 1/|countries| per distinct country of the record.
    Country,
}

impl FromStr for FractionalMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "author" => Ok(FractionalMode::Author),
            "country" => Ok(FractionalMode::Country),
            other => Err(format!(
                "unknown fractional mode {other:?} (expected author or country)"
            )),
        }
    }
}

impl From<FractionalMode> for CountingMethod {
    fn from(mode: FractionalMode) -> Self {
        match mode {
            FractionalMode::Author => CountingMethod::FractionalAuthor,
            FractionalMode::Country => CountingMethod::FractionalCountry,
        }
    }
}

/// Whether reductions may fan out over the rayon pool. Without the
/// `parallel` feature both variants run sequentially.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// Per-country scores for one slice under one counting method.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScoreTable {
    pub method: CountingMethod,
    pub slice: String,
    /// Number of records that contributed.
    pub records: usize,
    pub scores: BTreeMap<CountryCode, f64>,
}

impl ScoreTable {
    pub fn score(&self, country: CountryCode) -> f64 {
        self.scores.get(&country).copied().unwrap_or(0.0)
    }

    /// Sum over all countries, `ZZ` included.
    pub fn total(&self) -> f64 {
        self.scores.values().sum()
    }

    /// Scores without the unresolved pseudo-country.
    pub fn resolved(&self) -> impl Iterator<Item = (CountryCode, f64)> + '_ {
        self.scores
            .iter()
            .filter(|(c, _)| !c.is_unresolved())
            .map(|(c, s)| (*c, *s))
    }
}

/// Credit shares of a single record under `method`, one entry per
/// (author, country) pair for author mode and per country otherwise.
pub fn record_shares(
    record: &PublicationRecord,
    method: CountingMethod,
) -> Result<Vec<(CountryCode, f64)>> {
    match method {
        CountingMethod::Whole => Ok(record
            .credited_countries()
            .into_iter()
            .map(|c| (c, 1.0))
            .collect()),
        CountingMethod::FractionalAuthor => {
            let n = record.authors.len();
            if n == 0 {
                return Err(Error::NoAuthors(record.id.clone()));
            }
            let mut shares = Vec::with_capacity(n);
            for author in &record.authors {
                if author.is_unresolved() {
                    shares.push((UNRESOLVED, 1.0 / n as f64));
                } else {
                    let per = 1.0 / (n * author.countries().len()) as f64;
                    shares.extend(author.countries().iter().map(|c| (*c, per)));
                }
            }
            Ok(shares)
        }
        CountingMethod::FractionalCountry => {
            if record.authors.is_empty() {
                return Err(Error::NoAuthors(record.id.clone()));
            }
            let countries = record.credited_countries();
            let per = 1.0 / countries.len() as f64;
            Ok(countries.into_iter().map(|c| (c, per)).collect())
        }
    }
}

type Partial = BTreeMap<CountryCode, f64>;

fn reduce_chunk(chunk: &[&PublicationRecord], method: CountingMethod) -> Result<Partial> {
    let mut partial = Partial::new();
    for record in chunk {
        for (country, share) in record_shares(record, method)? {
            *partial.entry(country).or_insert(0.0) += share;
        }
    }
    Ok(partial)
}

fn chunk_partials(
    ordered: &[&PublicationRecord],
    method: CountingMethod,
    exec: Execution,
) -> Result<Vec<Partial>> {
    #[cfg(feature = "parallel")]
    if exec == Execution::Parallel {
        use rayon::prelude::*;
        return ordered
            .par_chunks(CHUNK)
            .map(|chunk| reduce_chunk(chunk, method))
            .collect();
    }
    let _ = exec;
    ordered
        .chunks(CHUNK)
        .map(|chunk| reduce_chunk(chunk, method))
        .collect()
}

/// Counts `corpus` under `method`, labelling the result with `slice`.
pub fn count_with(
    corpus: &Corpus,
    method: CountingMethod,
    slice: &str,
    exec: Execution,
) -> Result<ScoreTable> {
    let mut ordered: Vec<&PublicationRecord> = corpus.records().iter().collect();
    ordered.sort_by(|a, b| a.id.cmp(&b.id));

    let mut scores = BTreeMap::new();
    for partial in chunk_partials(&ordered, method, exec)? {
        for (country, value) in partial {
            *scores.entry(country).or_insert(0.0) += value;
        }
    }
    Ok(ScoreTable {
        method,
        slice: slice.to_string(),
        records: ordered.len(),
        scores,
    })
}

pub fn count(corpus: &Corpus, method: CountingMethod) -> Result<ScoreTable> {
    count_with(corpus, method, ALL_SLICE, Execution::default())
}

/// One credit to every country appearing on a record.
pub fn whole_count(corpus: &Corpus) -> ScoreTable {
    count(corpus, CountingMethod::Whole).expect("whole counting is infallible")
}

/// Fractional credit; fails on a record without authors.
pub fn fractional_count(corpus: &Corpus, mode: FractionalMode) -> Result<ScoreTable> {
    count(corpus, mode.into())
}

/// Counts only the records with at least one subject code in `group`
/// (each such record once). `ALL` selects every record.
pub fn subject_group_count(
    corpus: &Corpus,
    group: &str,
    method: CountingMethod,
) -> Result<ScoreTable> {
    subject_group_count_with(corpus, group, method, Execution::default())
}

pub fn subject_group_count_with(
    corpus: &Corpus,
    group: &str,
    method: CountingMethod,
    exec: Execution,
) -> Result<ScoreTable> {
    let slice = corpus.slice(group)?;
    let label = if group.eq_ignore_ascii_case(ALL_SLICE) {
        ALL_SLICE
    } else {
        group
    };
    count_with(&slice, method, label, exec)
}
