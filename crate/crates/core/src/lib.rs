//! Country-level publication counting and ranking.
//!
//! `bibcount` scores countries by whole and fractional counting, derives
//! international-collaboration indicators, ranks countries and correlates
//! rankings across counting methods and subject slices.
//!
//! The main pieces:
//!
//! - [`model`]: records, authors, country codes, subject schemes, corpora.
//! - [`ingest`]: JSONL/CSV ingestion with per-record validation, filters,
//!   and corpus/fixture serialization.
//! - [`counting`]: whole and fractional (author or country) counting, per
//!   corpus or per subject group.
//! - [`collab`]: ICP share, reduction due to fractional counting, and their
//!   ratio.
//! - [`rank`]: competition/average ranks, Spearman, Pearson and correlation
//!   matrices.
//! - [`replication`]: embedded 2016 country fixtures and the derived tables.
//! - [`synth`]: deterministic synthetic corpora.
//! - [`table`]: CSV / Markdown / JSON result rendering.
//!
//! With the default `parallel` feature, counting fans out over rayon; the
//! reduction order is fixed so sequential and parallel results are
//! identical.
//!
//! ```
//! use bibcount::counting::{fractional_count, whole_count, FractionalMode};
//! use bibcount::ingest::parse_jsonl;
//!
//! let data = r#"{"id":"p1","year":2016,"doc_type":"article","subjects":[],"authors":[{"countries":["IN"]},{"countries":["GB"]}]}"#;
//! let (corpus, report) = parse_jsonl(data.as_bytes(), "example").unwrap();
//! assert!(report.is_clean());
//!
//! let gb = "GB".parse().unwrap();
//! assert_eq!(whole_count(&corpus).score(gb), 1.0);
//! assert_eq!(fractional_count(&corpus, FractionalMode::Author).unwrap().score(gb), 0.5);
//! ```

pub mod collab;
pub mod counting;
pub mod error;
pub mod ingest;
pub mod model;
pub mod rank;
pub mod replication;
pub mod synth;
pub mod table;

pub use error::{Error, Result};
