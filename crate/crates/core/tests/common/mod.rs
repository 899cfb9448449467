//! Brute-force oracles and corpus strategies shared by integration tests.
//!
//! The oracles deliberately avoid the library's counting and ranking code:
//! they loop over every (country, record, author) combination and use the
//! pairwise form of the correlation coefficient.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use bibcount::model::{AuthorRef, Corpus, CountryCode, DocType, PublicationRecord, SubjectScheme};
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

pub const POOL: [&str; 6] = ["CN", "DE", "FR", "GB", "IN", "US"];
pub const SUBJECTS: [&str; 5] = ["BIO", "CHEM", "CS", "MED", "PHYS"];
pub const SCHEME_JSON: &str =
    r#"{"phys": ["PHYS", "CHEM"], "health": ["MED", "BIO"], "cs": ["CS"]}"#;

pub fn cc(s: &str) -> CountryCode {
    s.parse().unwrap()
}

pub fn scheme() -> SubjectScheme {
    SubjectScheme::from_json(SCHEME_JSON).unwrap()
}

pub fn record(id: &str, subjects: &[&str], authors: &[&[&str]]) -> PublicationRecord {
    PublicationRecord {
        id: id.to_string(),
        year: 2016,
        doc_type: DocType::Article,
        subjects: subjects.iter().map(|s| s.to_string()).collect(),
        authors: authors
            .iter()
            .map(|a| AuthorRef::new(a.iter().map(|c| cc(c))))
            .collect(),
    }
}

fn zz() -> CountryCode {
    cc("ZZ")
}

/// Every country code mentioned anywhere, plus ZZ.
fn universe(corpus: &Corpus) -> Vec<CountryCode> {
    let mut all = vec![zz()];
    for r in corpus.records() {
        for a in &r.authors {
            for c in a.countries() {
                if !all.contains(c) {
                    all.push(*c);
                }
            }
        }
    }
    all
}

fn mentions(record: &PublicationRecord, country: CountryCode) -> bool {
    if country == zz() {
        return record.authors.iter().any(|a| a.countries().is_empty());
    }
    record
        .authors
        .iter()
        .any(|a| a.countries().iter().any(|c| *c == country))
}

/// Whole count: for each country, the number of records mentioning it.
pub fn oracle_whole(corpus: &Corpus) -> BTreeMap<CountryCode, f64> {
    let mut out = BTreeMap::new();
    for c in universe(corpus) {
        let n = corpus.records().iter().filter(|r| mentions(r, c)).count();
        if n > 0 {
            out.insert(c, n as f64);
        }
    }
    out
}

/// Author-mode fractional count by enumerating (record, author, country).
pub fn oracle_fractional_author(corpus: &Corpus) -> BTreeMap<CountryCode, f64> {
    let mut out = BTreeMap::new();
    for c in universe(corpus) {
        let mut total = 0.0;
        for r in corpus.records() {
            let n = r.authors.len() as f64;
            for a in &r.authors {
                let k = a.countries().len();
                if k == 0 {
                    if c == zz() {
                        total += 1.0 / n;
                    }
                } else if a.countries().iter().any(|x| *x == c) {
                    total += 1.0 / (n * k as f64);
                }
            }
        }
        if total > 0.0 {
            out.insert(c, total);
        }
    }
    out
}

/// Country-mode fractional count: 1/|distinct countries| per record.
pub fn oracle_fractional_country(corpus: &Corpus) -> BTreeMap<CountryCode, f64> {
    let mut out = BTreeMap::new();
    for c in universe(corpus) {
        let mut total = 0.0;
        for r in corpus.records() {
            let distinct = universe_of(r);
            if distinct.contains(&c) {
                total += 1.0 / distinct.len() as f64;
            }
        }
        if total > 0.0 {
            out.insert(c, total);
        }
    }
    out
}

fn universe_of(record: &PublicationRecord) -> Vec<CountryCode> {
    let mut v = Vec::new();
    for a in &record.authors {
        if a.countries().is_empty() && !v.contains(&zz()) {
            v.push(zz());
        }
        for c in a.countries() {
            if !v.contains(c) {
                v.push(*c);
            }
        }
    }
    v
}

/// Records with at least one subject in `codes`, found by nested scans.
pub fn oracle_group(corpus: &Corpus, codes: &[&str]) -> Corpus {
    let kept: Vec<PublicationRecord> = corpus
        .records()
        .iter()
        .filter(|r| r.subjects.iter().any(|s| codes.iter().any(|c| c == s)))
        .cloned()
        .collect();
    Corpus::new(kept, corpus.scheme().clone(), "oracle").unwrap()
}

pub fn oracle_is_international(record: &PublicationRecord) -> bool {
    universe_of(record)
        .into_iter()
        .filter(|c| *c != zz())
        .count()
        >= 2
}

/// Average rank by counting smaller and equal values.
pub fn oracle_average_ranks(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|v| {
            let less = x.iter().filter(|w| *w < v).count() as f64;
            let equal = x.iter().filter(|w| *w == v).count() as f64;
            1.0 + less + (equal - 1.0) / 2.0
        })
        .collect()
}

/// Pairwise-difference form of the product-moment correlation.
pub fn oracle_pearson(a: &[f64], b: &[f64]) -> f64 {
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            let da = a[i] - a[j];
            let db = b[i] - b[j];
            sab += da * db;
            saa += da * da;
            sbb += db * db;
        }
    }
    sab / (saa * sbb).sqrt()
}

pub fn oracle_spearman(x: &[f64], y: &[f64]) -> f64 {
    oracle_pearson(&oracle_average_ranks(x), &oracle_average_ranks(y))
}

/// Largest absolute difference between two score maps over the union of
/// their keys.
pub fn max_diff(a: &BTreeMap<CountryCode, f64>, b: &BTreeMap<CountryCode, f64>) -> f64 {
    let keys: BTreeSet<_> = a.keys().chain(b.keys()).collect();
    keys.into_iter()
        .map(|k| (a.get(k).copied().unwrap_or(0.0) - b.get(k).copied().unwrap_or(0.0)).abs())
        .fold(0.0, f64::max)
}

fn arb_author() -> impl Strategy<Value = AuthorRef> {
    prop_oneof![
        1 => Just(AuthorRef::unresolved()),
        8 => proptest::sample::subsequence(POOL.to_vec(), 1..=3)
            .prop_map(|cs| AuthorRef::new(cs.into_iter().map(cc))),
    ]
}

fn arb_record_body() -> impl Strategy<Value = (i32, DocType, BTreeSet<String>, Vec<AuthorRef>)> {
    (
        2015..=2017i32,
        proptest::sample::select(DocType::ALL.to_vec()),
        proptest::sample::subsequence(SUBJECTS.to_vec(), 0..=3)
            .prop_map(|s| s.into_iter().map(str::to_string).collect()),
        proptest::collection::vec(arb_author(), 1..=5),
    )
}

/// Random corpora of up to `max` records over a six-country pool, with
/// multi-country and unresolved authors.
pub fn arb_corpus(max: usize) -> impl Strategy<Value = Corpus> {
    proptest::collection::vec(arb_record_body(), 0..=max).prop_map(|bodies| {
        let records = bodies
            .into_iter()
            .enumerate()
            .map(
                |(i, (year, doc_type, subjects, authors))| PublicationRecord {
                    id: format!("r{i:04}"),
                    year,
                    doc_type,
                    subjects,
                    authors,
                },
            )
            .collect();
        Corpus::new(records, scheme(), "arb").unwrap()
    })
}

/// `count` corpora drawn deterministically from [`arb_corpus`].
pub fn sample_corpora(count: usize, max: usize) -> Vec<Corpus> {
    let mut runner = TestRunner::new_with_rng(
        Config::default(),
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    );
    let strategy = arb_corpus(max);
    (0..count)
        .map(|_| strategy.new_tree(&mut runner).unwrap().current())
        .collect()
}

/// Deterministic permutation of records and of each record's authors.
pub fn permuted(corpus: &Corpus, salt: u64) -> Corpus {
    let key = |i: usize| {
        (i as u64 ^ salt)
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .rotate_left(17)
    };
    let mut records: Vec<(u64, PublicationRecord)> = corpus
        .records()
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut r = r.clone();
            let mut authors: Vec<(u64, AuthorRef)> = r
                .authors
                .drain(..)
                .enumerate()
                .map(|(j, a)| (key(j + 7), a))
                .collect();
            authors.sort_by_key(|(k, _)| *k);
            r.authors = authors.into_iter().map(|(_, a)| a).collect();
            (key(i), r)
        })
        .collect();
    records.sort_by_key(|(k, _)| *k);
    Corpus::new(
        records.into_iter().map(|(_, r)| r).collect(),
        corpus.scheme().clone(),
        corpus.provenance(),
    )
    .unwrap()
}

/// Toy corpus where A leads B on whole counts but B leads A on fractional
/// counts: A has 6 domestic papers and 4 papers with one A and three C
/// authors; B has 8 domestic papers.
pub fn rank_flip_corpus() -> Corpus {
    let mut records = Vec::new();
    for i in 0..6 {
        records.push(record(&format!("a{i}"), &[], &[&["AA"], &["AA"]]));
    }
    for i in 0..4 {
        records.push(record(
            &format!("ac{i}"),
            &[],
            &[&["AA"], &["CC"], &["CC"], &["CC"]],
        ));
    }
    for i in 0..8 {
        records.push(record(&format!("b{i}"), &[], &[&["BB"]]));
    }
    Corpus::new(records, SubjectScheme::default(), "toy").unwrap()
}
