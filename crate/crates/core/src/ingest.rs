//! Corpus ingestion (JSONL and CSV), filtering, and corpus / fixture
//! serialization.
//!
//! Ingestion never aborts on a bad record: each rejected line is listed in
//! the [`ValidationReport`] and the remaining records form the corpus. Only
//! an unreadable stream or a wrong CSV header is fatal.

use std::collections::BTreeSet;
use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AuthorRef, Corpus, CountryCode, DocType, PublicationRecord, SubjectScheme};

pub const CORPUS_CSV_HEADER: [&str; 5] = ["id", "year", "doc_type", "subjects", "author_countries"];

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Issue {
    pub record_id: String,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub errors: Vec<Issue>,
    pub warnings: Vec<Issue>,
    pub records_accepted: usize,
    pub records_rejected: usize,
}

impl ValidationReport {
    pub fn input_records(&self) -> usize {
        self.records_accepted + self.records_rejected
    }

    pub fn is_clean(&self) -> bool {
        self.errors.is_empty()
    }

    fn reject(&mut self, record_id: impl Into<String>, message: impl Into<String>) {
        self.records_rejected += 1;
        self.errors.push(Issue {
            record_id: record_id.into(),
            message: message.into(),
        });
    }

    fn warn(&mut self, record_id: &str, message: impl Into<String>) {
        self.warnings.push(Issue {
            record_id: record_id.to_string(),
            message: message.into(),
        });
    }
}

/// Field values shared by both input formats before validation.
struct RawFields {
    id: String,
    year: i64,
    doc_type: String,
    subjects: Vec<String>,
    authors: Vec<Vec<String>>,
}

/// Validates one raw record. Returns the rejection message on failure and
/// appends any warnings to `report`.
fn build_record(
    raw: RawFields,
    location: &str,
    report: &mut ValidationReport,
) -> std::result::Result<PublicationRecord, String> {
    let RawFields {
        id,
        year,
        doc_type,
        subjects,
        authors,
    } = raw;
    if id.trim().is_empty() {
        return Err(format!("{location}: empty id"));
    }
    let year = i32::try_from(year).map_err(|_| format!("{location}: year {year} out of range"))?;
    let doc_type: DocType = doc_type.parse().map_err(|e| format!("{location}: {e}"))?;
    if authors.is_empty() {
        return Err(format!("{location}: missing authors"));
    }

    let mut subject_set = BTreeSet::new();
    for s in subjects {
        let s = s.trim().to_string();
        if s.is_empty() {
            continue;
        }
        if !subject_set.insert(s.clone()) {
            report.warn(
                &id,
                format!("{location}: duplicate subject {s:?} collapsed"),
            );
        }
    }

    let mut author_refs = Vec::with_capacity(authors.len());
    for (i, countries) in authors.into_iter().enumerate() {
        let mut codes = Vec::with_capacity(countries.len());
        for raw in &countries {
            if raw.trim().is_empty() {
                continue;
            }
            let code = CountryCode::normalize(raw)
                .map_err(|_| format!("{location}: author {}: invalid country {raw:?}", i + 1))?;
            codes.push(code);
        }
        let resolved = codes.iter().filter(|c| !c.is_unresolved()).count();
        if resolved > 0 && resolved < codes.len() {
            report.warn(
                &id,
                format!(
                    "{location}: author {}: ZZ listed next to resolved countries; ignored",
                    i + 1
                ),
            );
        }
        let author = AuthorRef::new(codes);
        if author.countries().len() < resolved {
            report.warn(
                &id,
                format!(
                    "{location}: author {}: duplicate countries collapsed",
                    i + 1
                ),
            );
        }
        author_refs.push(author);
    }

    Ok(PublicationRecord {
        id,
        year,
        doc_type,
        subjects: subject_set,
        authors: author_refs,
    })
}

/// Accumulates accepted records, enforcing first-wins on duplicate ids.
struct Accumulator {
    records: Vec<PublicationRecord>,
    seen: std::collections::HashSet<String>,
    report: ValidationReport,
}

impl Accumulator {
    fn new() -> Self {
        Accumulator {
            records: Vec::new(),
            seen: Default::default(),
            report: ValidationReport::default(),
        }
    }

    fn offer(&mut self, raw: RawFields, location: &str) {
        let id = raw.id.clone();
        if self.seen.contains(&id) {
            self.report.reject(
                id,
                format!("{location}: duplicate id; first occurrence kept"),
            );
            return;
        }
        match build_record(raw, location, &mut self.report) {
            Ok(record) => {
                self.seen.insert(id);
                self.report.records_accepted += 1;
                self.records.push(record);
            }
            Err(msg) => self.report.reject(id, msg),
        }
    }

    fn finish(self, provenance: &str) -> Result<(Corpus, ValidationReport)> {
        let corpus = Corpus::new(self.records, SubjectScheme::default(), provenance)?;
        Ok((corpus, self.report))
    }
}

#[derive(Deserialize)]
struct JsonRecord {
    id: Option<String>,
    year: Option<i64>,
    doc_type: Option<String>,
    #[serde(default)]
    subjects: Vec<String>,
    authors: Option<Vec<JsonAuthor>>,
}

#[derive(Deserialize)]
struct JsonAuthor {
    #[serde(default)]
    countries: Vec<String>,
}

/// Parses one JSON object per non-empty line.
pub fn parse_jsonl<R: BufRead>(reader: R, provenance: &str) -> Result<(Corpus, ValidationReport)> {
    let mut acc = Accumulator::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let location = format!("line {}", idx + 1);
        let parsed: JsonRecord = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(e) => {
                acc.report
                    .reject(location.clone(), format!("{location}: malformed JSON: {e}"));
                continue;
            }
        };
        let Some(id) = parsed.id else {
            acc.report
                .reject(location.clone(), format!("{location}: missing id"));
            continue;
        };
        let missing = [
            ("year", parsed.year.is_none()),
            ("doc_type", parsed.doc_type.is_none()),
            ("authors", parsed.authors.is_none()),
        ];
        if let Some((field, _)) = missing.iter().find(|(_, m)| *m) {
            acc.report
                .reject(id, format!("{location}: missing {field}"));
            continue;
        }
        let raw = RawFields {
            id,
            year: parsed.year.unwrap_or_default(),
            doc_type: parsed.doc_type.unwrap_or_default(),
            subjects: parsed.subjects,
            authors: parsed
                .authors
                .unwrap_or_default()
                .into_iter()
                .map(|a| a.countries)
                .collect(),
        };
        acc.offer(raw, &location);
    }
    acc.finish(provenance)
}

/// Parses the five-column corpus CSV. A header other than
/// `id,year,doc_type,subjects,author_countries` is fatal.
pub fn parse_csv<R: Read>(reader: R, provenance: &str) -> Result<(Corpus, ValidationReport)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut rows = rdr.records();
    let header = match rows.next() {
        Some(h) => h?,
        None => csv::StringRecord::new(),
    };
    let found: Vec<&str> = header.iter().collect();
    if found != CORPUS_CSV_HEADER {
        return Err(Error::Header {
            expected: CORPUS_CSV_HEADER.join(","),
            found: found.join(","),
        });
    }

    let mut acc = Accumulator::new();
    for row in rows {
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                acc.report
                    .reject(format!("line {line}"), format!("line {line}: {e}"));
                continue;
            }
        };
        let line = row.position().map_or(0, |p| p.line());
        let location = format!("line {line}");
        let id = row.get(0).unwrap_or_default().to_string();
        if row.len() != CORPUS_CSV_HEADER.len() {
            let key = if id.is_empty() { location.clone() } else { id };
            acc.report.reject(
                key,
                format!(
                    "{location}: column count: expected {}, found {}",
                    CORPUS_CSV_HEADER.len(),
                    row.len()
                ),
            );
            continue;
        }
        let year = match row[1].trim().parse::<i64>() {
            Ok(y) => y,
            Err(_) => {
                acc.report
                    .reject(id, format!("{location}: invalid year {:?}", &row[1]));
                continue;
            }
        };
        let authors_field = row[4].trim();
        let authors = if authors_field.is_empty() {
            Vec::new()
        } else {
            authors_field
                .split('|')
                .map(|a| a.split('+').map(str::to_string).collect())
                .collect()
        };
        let raw = RawFields {
            id,
            year,
            doc_type: row[2].to_string(),
            subjects: row[3].split(';').map(str::to_string).collect(),
            authors,
        };
        acc.offer(raw, &location);
    }
    acc.finish(provenance)
}

/// Writes a corpus in the CSV record format. Unresolved authors are written
/// as `ZZ`; subjects and countries appear in lexicographic order.
pub fn write_corpus_csv<W: Write>(corpus: &Corpus, writer: W) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    wtr.write_record(CORPUS_CSV_HEADER)?;
    for r in corpus.records() {
        let subjects = r.subjects.iter().cloned().collect::<Vec<_>>().join(";");
        let authors = r
            .authors
            .iter()
            .map(|a| {
                if a.is_unresolved() {
                    "ZZ".to_string()
                } else {
                    a.countries()
                        .iter()
                        .map(CountryCode::to_string)
                        .collect::<Vec<_>>()
                        .join("+")
                }
            })
            .collect::<Vec<_>>()
            .join("|");
        wtr.write_record([
            r.id.as_str(),
            &r.year.to_string(),
            r.doc_type.as_str(),
            &subjects,
            &authors,
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct JsonOutRecord<'a> {
    id: &'a str,
    year: i32,
    doc_type: DocType,
    subjects: &'a BTreeSet<String>,
    authors: Vec<JsonOutAuthor<'a>>,
}

#[derive(Serialize)]
struct JsonOutAuthor<'a> {
    countries: &'a BTreeSet<CountryCode>,
}

/// Writes a single JSONL line for one record (with trailing LF).
pub fn write_record_jsonl<W: Write>(record: &PublicationRecord, mut writer: W) -> Result<()> {
    let out = JsonOutRecord {
        id: &record.id,
        year: record.year,
        doc_type: record.doc_type,
        subjects: &record.subjects,
        authors: record
            .authors
            .iter()
            .map(|a| JsonOutAuthor {
                countries: a.countries(),
            })
            .collect(),
    };
    serde_json::to_writer(&mut writer, &out)?;
    writer.write_all(b"\n")?;
    Ok(())
}

pub fn write_corpus_jsonl<W: Write>(corpus: &Corpus, mut writer: W) -> Result<()> {
    for r in corpus.records() {
        write_record_jsonl(r, &mut writer)?;
    }
    Ok(())
}

/// Record filter. An empty set places no constraint on that field.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Filter {
    pub years: BTreeSet<i32>,
    pub doc_types: BTreeSet<DocType>,
}

impl Filter {
    /// Article, review and conference paper only, any year.
    pub fn research_types() -> Self {
        Filter {
            years: BTreeSet::new(),
            doc_types: DocType::RESEARCH.into_iter().collect(),
        }
    }

    pub fn matches(&self, record: &PublicationRecord) -> bool {
        (self.years.is_empty() || self.years.contains(&record.year))
            && (self.doc_types.is_empty() || self.doc_types.contains(&record.doc_type))
    }
}

pub fn apply_filter(corpus: &Corpus, filter: &Filter) -> Corpus {
    corpus.subset(|r| filter.matches(r))
}

/// One row of the `country,wc,fc,icp` aggregate format. `fc` and `icp`
/// may be blank.
#[derive(Clone, Debug, PartialEq)]
pub struct AggregateRow {
    pub country: String,
    pub code: CountryCode,
    pub wc: f64,
    pub fc: Option<f64>,
    pub icp: Option<u64>,
}

/// One row of the `country,group,tp,rank` subject format.
#[derive(Clone, Debug, PartialEq)]
pub struct SubjectRow {
    pub country: String,
    pub code: CountryCode,
    pub group: String,
    pub tp: f64,
    pub rank: u32,
}

pub const AGGREGATE_HEADER: [&str; 4] = ["country", "wc", "fc", "icp"];
pub const SUBJECT_HEADER: [&str; 4] = ["country", "group", "tp", "rank"];

fn strict_reader<R: Read>(reader: R, expected: &[&str]) -> Result<csv::Reader<R>> {
    let mut rdr = csv::ReaderBuilder::new().from_reader(reader);
    let found: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if found != expected {
        return Err(Error::Header {
            expected: expected.join(","),
            found: found.join(","),
        });
    }
    Ok(rdr)
}

fn parse_field<T: std::str::FromStr>(value: &str, what: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::InvalidParams(format!("cannot parse {what} from {value:?}")))
}

fn parse_optional<T: std::str::FromStr>(value: &str, what: &str) -> Result<Option<T>> {
    if value.trim().is_empty() {
        Ok(None)
    } else {
        parse_field(value, what).map(Some)
    }
}

pub fn parse_aggregate_csv<R: Read>(reader: R) -> Result<Vec<AggregateRow>> {
    let mut rdr = strict_reader(reader, &AGGREGATE_HEADER)?;
    rdr.records()
        .map(|row| {
            let row = row?;
            Ok(AggregateRow {
                country: row[0].to_string(),
                code: CountryCode::normalize(&row[0])?,
                wc: parse_field(&row[1], "wc")?,
                fc: parse_optional(&row[2], "fc")?,
                icp: parse_optional(&row[3], "icp")?,
            })
        })
        .collect()
}

pub fn parse_subject_csv<R: Read>(reader: R) -> Result<Vec<SubjectRow>> {
    let mut rdr = strict_reader(reader, &SUBJECT_HEADER)?;
    rdr.records()
        .map(|row| {
            let row = row?;
            Ok(SubjectRow {
                country: row[0].to_string(),
                code: CountryCode::normalize(&row[0])?,
                group: row[1].to_string(),
                tp: parse_field(&row[2], "tp")?,
                rank: parse_field(&row[3], "rank")?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"id":"p1","year":2016,"doc_type":"article","subjects":["PHYS"],"authors":[{"countries":["IN"]}]}"#;

    fn jsonl(text: &str) -> (Corpus, ValidationReport) {
        parse_jsonl(text.as_bytes(), "test").unwrap()
    }

    fn csv_in(text: &str) -> Result<(Corpus, ValidationReport)> {
        parse_csv(text.as_bytes(), "test")
    }

    #[test]
    fn jsonl_minimal_record() {
        let (corpus, report) = jsonl(MINIMAL);
        assert_eq!(corpus.len(), 1);
        assert_eq!(report.records_accepted, 1);
        assert!(report.errors.is_empty());
        let r = &corpus.records()[0];
        assert_eq!(r.doc_type, DocType::Article);
        assert_eq!(
            r.authors[0].countries().iter().next().unwrap().as_str(),
            "IN"
        );
    }

    #[test]
    fn jsonl_duplicate_id() {
        let (corpus, report) = jsonl(&format!("{MINIMAL}\n{MINIMAL}\n"));
        assert_eq!(corpus.len(), 1);
        assert_eq!(report.records_accepted, 1);
        assert_eq!(report.errors.len(), 1);
        assert!(report.errors[0].message.contains("duplicate id"));
        assert_eq!(report.input_records(), 2);
    }

    #[test]
    fn jsonl_missing_authors() {
        let (corpus, report) = jsonl(r#"{"id":"p2"}"#);
        assert!(corpus.is_empty());
        assert_eq!(report.records_rejected, 1);
        assert_eq!(report.errors[0].record_id, "p2");
    }

    #[test]
    fn jsonl_bad_lines_do_not_abort() {
        let text = format!(
            "not json\n\n{MINIMAL}\n{}\n",
            r#"{"id":"p9","year":2016,"doc_type":"article","authors":[]}"#
        );
        let (corpus, report) = jsonl(&text);
        assert_eq!(corpus.len(), 1);
        assert_eq!(report.records_rejected, 2);
        assert_eq!(report.input_records(), 3);
    }

    #[test]
    fn jsonl_invalid_country_rejects_record() {
        let (_, report) = jsonl(
            r#"{"id":"p1","year":2016,"doc_type":"article","authors":[{"countries":["Narnia"]}]}"#,
        );
        assert_eq!(report.records_rejected, 1);
        assert!(report.errors[0].message.contains("Narnia"));
    }

    #[test]
    fn csv_delimiters() {
        let (corpus, report) = csv_in(
            "id,year,doc_type,subjects,author_countries\np1,2016,article,PHYS;CHEM,IN|IN+US\n",
        )
        .unwrap();
        assert!(report.is_clean());
        let r = &corpus.records()[0];
        assert_eq!(r.subjects.len(), 2);
        assert_eq!(r.authors.len(), 2);
        assert_eq!(r.authors[1].countries().len(), 2);
    }

    #[test]
    fn csv_empty_subjects() {
        let (corpus, _) =
            csv_in("id,year,doc_type,subjects,author_countries\np3,2016,article,,GB\n").unwrap();
        assert!(corpus.records()[0].subjects.is_empty());
    }

    #[test]
    fn csv_column_count() {
        let (corpus, report) =
            csv_in("id,year,doc_type,subjects,author_countries\np4,2016,article,GB\n").unwrap();
        assert!(corpus.is_empty());
        assert!(report.errors[0].message.contains("column count"));
    }

    #[test]
    fn csv_wrong_header_is_fatal() {
        let err = csv_in("id,year,type,subjects,authors\n").unwrap_err();
        assert!(matches!(err, Error::Header { .. }));
    }

    #[test]
    fn csv_zz_is_unresolved() {
        let (corpus, _) =
            csv_in("id,year,doc_type,subjects,author_countries\np5,2016,review,,ZZ|IN\n").unwrap();
        let r = &corpus.records()[0];
        assert!(r.authors[0].is_unresolved());
        let mut out = Vec::new();
        write_corpus_csv(&corpus, &mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "id,year,doc_type,subjects,author_countries\np5,2016,review,,ZZ|IN\n"
        );
    }

    #[test]
    fn duplicate_subjects_warn() {
        let (corpus, report) = jsonl(
            r#"{"id":"p1","year":2016,"doc_type":"article","subjects":["PHYS","PHYS"],"authors":[{"countries":["IN"]}]}"#,
        );
        assert_eq!(corpus.records()[0].subjects.len(), 1);
        assert_eq!(report.warnings.len(), 1);
    }

    fn mixed_corpus() -> Corpus {
        let mut text = String::new();
        for i in 0..10 {
            let year = if i < 7 { 2016 } else { 2015 };
            let dt = if i == 0 { "other" } else { "article" };
            text.push_str(&format!(
                "{{\"id\":\"r{i}\",\"year\":{year},\"doc_type\":\"{dt}\",\"authors\":[{{\"countries\":[\"IN\"]}}]}}\n"
            ));
        }
        jsonl(&text).0
    }

    #[test]
    fn year_filter() {
        let filter = Filter {
            years: [2016].into_iter().collect(),
            ..Filter::default()
        };
        assert_eq!(apply_filter(&mixed_corpus(), &filter).len(), 7);
    }

    #[test]
    fn doc_type_filter() {
        let filtered = apply_filter(&mixed_corpus(), &Filter::research_types());
        assert_eq!(filtered.len(), 9);
        assert!(filtered
            .records()
            .iter()
            .all(|r| r.doc_type != DocType::Other));
    }

    #[test]
    fn empty_filter_is_identity() {
        let corpus = mixed_corpus();
        assert_eq!(apply_filter(&corpus, &Filter::default()), corpus);
    }

    #[test]
    fn aggregate_rows() {
        let rows = parse_aggregate_csv(
            "country,wc,fc,icp\nUK,156899,99366.17,90497\nTaiwan,34770,,\n".as_bytes(),
        )
        .unwrap();
        assert_eq!(rows[0].code.as_str(), "GB");
        assert_eq!(rows[0].icp, Some(90497));
        assert_eq!(rows[1].fc, None);
        assert!(parse_aggregate_csv("country,wc\n".as_bytes()).is_err());
    }
}
