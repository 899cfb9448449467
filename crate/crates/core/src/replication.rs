//! Embedded 2016 country fixtures and regeneration of every derived
//! quantity computed from them: whole/fractional ranks and their rank
//! correlations, the reduction and ICP columns, the ICP-versus-reduction
//! curves, and the subject-area rank correlation matrix.
//!
//! Fixtures are compiled into the library and guarded by SHA-256 digests.
//! Each replication compares recomputed values with the published ones and
//! names every cell that falls outside its tolerance.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::collab::{metrics_from_counts, CountryMetrics, ReductionBasis};
use crate::error::{Error, Result};
use crate::ingest::{parse_aggregate_csv, parse_subject_csv, AggregateRow, SubjectRow};
use crate::model::CountryCode;
use crate::rank::{pearson, rank_scores, spearman, srcc, CorrelationMatrix, SrccBasis};
use crate::table::{format_fixed, to_json, write_table, Cell, Format, Table};

struct Asset {
    name: &'static str,
    text: &'static str,
    sha256: &'static str,
}

const NSF: Asset = Asset {
    name: "nsf_2016.csv",
    text: include_str!("../fixtures/nsf_2016.csv"),
    sha256: "539b55d04de0638896dd8e5d90f7dc9c928bfc5ec83026f191b21483541088ed",
};
const ELSEVIER: Asset = Asset {
    name: "elsevier_2016.csv",
    text: include_str!("../fixtures/elsevier_2016.csv"),
    sha256: "a29e8f3011d17a2a323f104e2a5809e4efa094f891061bf3edaff63babdd2051",
};
const TABLE1_RANKS: Asset = Asset {
    name: "table1_printed_ranks.csv",
    text: include_str!("../fixtures/table1_printed_ranks.csv"),
    sha256: "4ede926081af003a719425c1bda60c6aa7a6d3336d37e61f0729f3ba3d7773c7",
};
const TABLE2_PRINTED: Asset = Asset {
    name: "table2_printed.csv",
    text: include_str!("../fixtures/table2_printed.csv"),
    sha256: "1b1f75c889fcfd865786b9665323ca49b53f7a0b395eefab3ae5ff1c8e45233b",
};
const TABLE3: Asset = Asset {
    name: "table3.csv",
    text: include_str!("../fixtures/table3.csv"),
    sha256: "3cc147c5cd3584c50676b5506b482cb0b26cccce0867dde897d5b7dd4f804a00",
};
const TABLE4_PRINTED: Asset = Asset {
    name: "table4_printed.csv",
    text: include_str!("../fixtures/table4_printed.csv"),
    sha256: "7673c9cf562c3bdd84d20324d900c5937e2af4f32afa6a0a3a49a1c7475c0795",
};

const ASSETS: [&Asset; 6] = [
    &NSF,
    &ELSEVIER,
    &TABLE1_RANKS,
    &TABLE2_PRINTED,
    &TABLE3,
    &TABLE4_PRINTED,
];

/// Published rank correlation between NSF whole- and fractional-count ranks.
pub const PUBLISHED_SRCC_WC_FC: f64 = 0.947;
/// Published rank correlation between NSF and Elsevier whole-count ranks.
pub const PUBLISHED_SRCC_NSF_ELSEVIER: f64 = 0.999;
/// Published Pearson correlation between ICP% and reduction%.
pub const PUBLISHED_PEARSON_ICP_REDUCTION: f64 = 0.98;

pub const PCT_TOLERANCE: f64 = 0.05;
pub const RATIO_TOLERANCE: f64 = 0.01;
pub const SRCC_WC_FC_TOLERANCE: f64 = 0.001;
pub const PEARSON_TOLERANCE: f64 = 0.01;
/// Accepted interval for the NSF/Elsevier correlation, whose computation
/// basis cannot be recovered from the published numbers.
pub const NSF_ELSEVIER_RANGE: (f64, f64) = (0.99, 1.0);
pub const MATRIX_TOLERANCE: f64 = 0.02;
pub const MATRIX_OUTLIER_TOLERANCE: f64 = 0.05;
pub const MATRIX_MIN_WITHIN_SHARE: f64 = 0.90;

/// Verifies the SHA-256 digest of every embedded fixture.
pub fn verify_checksums() -> Result<()> {
    for asset in ASSETS {
        let found = hex_digest(asset.text.as_bytes());
        if found != asset.sha256 {
            return Err(Error::Checksum {
                name: asset.name,
                expected: asset.sha256,
                found,
            });
        }
    }
    Ok(())
}

fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrintedRanks {
    pub country: String,
    pub code: CountryCode,
    pub nsf_wc_rank: Option<u32>,
    pub nsf_fc_rank: Option<u32>,
    pub elsevier_wc_rank: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrintedTable2Row {
    pub country: String,
    pub reduction_pct: f64,
    pub icp_pct: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrintedMatrix {
    pub labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

/// The transcribed 2016 tables.
#[derive(Clone, Debug, PartialEq)]
pub struct FixtureSet {
    /// NSF whole count, fractional count and ICP count, 20 countries.
    pub nsf: Vec<AggregateRow>,
    /// Elsevier whole count, 20 countries (Taiwan in place of Sweden).
    pub elsevier: Vec<AggregateRow>,
    pub printed_ranks: Vec<PrintedRanks>,
    pub printed_table2: Vec<PrintedTable2Row>,
    /// Output and rank per country and subject slice, 20 × 10 rows.
    pub subjects: Vec<SubjectRow>,
    pub printed_matrix: PrintedMatrix,
}

fn fixture_err(name: &'static str, message: impl Into<String>) -> Error {
    Error::Fixture {
        name,
        message: message.into(),
    }
}

fn opt_u32(v: &str) -> Result<Option<u32>> {
    if v.is_empty() {
        return Ok(None);
    }
    v.parse()
        .map(Some)
        .map_err(|_| fixture_err(TABLE1_RANKS.name, format!("bad rank {v:?}")))
}

impl FixtureSet {
    /// Loads and validates the embedded fixtures after checking digests.
    pub fn load() -> Result<Self> {
        verify_checksums()?;

        let nsf = parse_aggregate_csv(NSF.text.as_bytes())?;
        let elsevier = parse_aggregate_csv(ELSEVIER.text.as_bytes())?;

        let mut rdr = csv::Reader::from_reader(TABLE1_RANKS.text.as_bytes());
        let mut printed_ranks = Vec::new();
        for row in rdr.records() {
            let row = row?;
            printed_ranks.push(PrintedRanks {
                country: row[0].to_string(),
                code: CountryCode::normalize(&row[0])?,
                nsf_wc_rank: opt_u32(&row[1])?,
                nsf_fc_rank: opt_u32(&row[2])?,
                elsevier_wc_rank: opt_u32(&row[3])?,
            });
        }

        let mut rdr = csv::Reader::from_reader(TABLE2_PRINTED.text.as_bytes());
        let mut printed_table2 = Vec::new();
        for row in rdr.records() {
            let row = row?;
            let num = |i: usize| {
                row[i].parse::<f64>().map_err(|_| {
                    fixture_err(TABLE2_PRINTED.name, format!("bad number {:?}", &row[i]))
                })
            };
            printed_table2.push(PrintedTable2Row {
                country: row[0].to_string(),
                reduction_pct: num(1)?,
                icp_pct: num(2)?,
                ratio: num(3)?,
            });
        }

        let subjects = parse_subject_csv(TABLE3.text.as_bytes())?;

        let mut rdr = csv::Reader::from_reader(TABLE4_PRINTED.text.as_bytes());
        let labels: Vec<String> = rdr.headers()?.iter().skip(1).map(str::to_string).collect();
        let mut values = Vec::new();
        for row in rdr.records() {
            let row = row?;
            let parsed = row
                .iter()
                .skip(1)
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|_| fixture_err(TABLE4_PRINTED.name, format!("bad number {v:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            values.push(parsed);
        }

        let set = FixtureSet {
            nsf,
            elsevier,
            printed_ranks,
            printed_table2,
            subjects,
            printed_matrix: PrintedMatrix { labels, values },
        };
        set.validate()?;
        Ok(set)
    }

    fn validate(&self) -> Result<()> {
        if self.nsf.len() != 20 || self.nsf.iter().any(|r| r.fc.is_none() || r.icp.is_none()) {
            return Err(fixture_err(NSF.name, "expected 20 complete rows"));
        }
        if self.elsevier.len() != 20 {
            return Err(fixture_err(ELSEVIER.name, "expected 20 rows"));
        }
        let nsf_names: Vec<_> = self.nsf.iter().map(|r| r.country.as_str()).collect();
        let t2_names: Vec<_> = self
            .printed_table2
            .iter()
            .map(|r| r.country.as_str())
            .collect();
        if nsf_names != t2_names {
            return Err(fixture_err(
                TABLE2_PRINTED.name,
                "countries do not align with NSF rows",
            ));
        }
        let labels = &self.printed_matrix.labels;
        if labels.len() != 10 || self.printed_matrix.values.iter().any(|r| r.len() != 10) {
            return Err(fixture_err(
                TABLE4_PRINTED.name,
                "expected a 10 × 10 matrix",
            ));
        }
        if self.subject_slices() != *labels {
            return Err(fixture_err(
                TABLE3.name,
                "slice labels differ from the matrix labels",
            ));
        }
        for slice in labels {
            if self.subjects.iter().filter(|r| &r.group == slice).count() != 20 {
                return Err(fixture_err(
                    TABLE3.name,
                    format!("slice {slice:?} lacks 20 rows"),
                ));
            }
        }
        Ok(())
    }

    /// Subject slice labels in fixture order.
    pub fn subject_slices(&self) -> Vec<String> {
        let mut seen = BTreeSet::new();
        self.subjects
            .iter()
            .filter(|r| seen.insert(r.group.clone()))
            .map(|r| r.group.clone())
            .collect()
    }

    /// Countries of the subject table in fixture order.
    pub fn subject_countries(&self) -> Vec<(String, CountryCode)> {
        let mut seen = BTreeSet::new();
        self.subjects
            .iter()
            .filter(|r| seen.insert(r.code))
            .map(|r| (r.country.clone(), r.code))
            .collect()
    }

    fn subject_row(&self, code: CountryCode, slice: &str) -> &SubjectRow {
        self.subjects
            .iter()
            .find(|r| r.code == code && r.group == slice)
            .expect("validated fixture has every country × slice")
    }

    /// Printed ranks of one slice in subject-table country order.
    pub fn subject_rank_column(&self, slice: &str) -> Vec<f64> {
        self.subject_countries()
            .iter()
            .map(|(_, code)| f64::from(self.subject_row(*code, slice).rank))
            .collect()
    }

    pub fn subject_output_column(&self, slice: &str) -> Vec<f64> {
        self.subject_countries()
            .iter()
            .map(|(_, code)| self.subject_row(*code, slice).tp)
            .collect()
    }
}

/// A single named check against a published value.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub computed: f64,
    pub published: f64,
    pub lower: f64,
    pub upper: f64,
    pub pass: bool,
}

impl Check {
    fn within(name: impl Into<String>, computed: f64, published: f64, tol: f64) -> Self {
        Self::range(name, computed, published, published - tol, published + tol)
    }

    fn range(
        name: impl Into<String>,
        computed: f64,
        published: f64,
        lower: f64,
        upper: f64,
    ) -> Self {
        // Tiny slack absorbs binary representation of decimal bounds.
        let eps = 1e-12;
        Check {
            name: name.into(),
            computed,
            published,
            lower,
            upper,
            pass: computed >= lower - eps && computed <= upper + eps,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table1Row {
    pub country: String,
    pub nsf_wc: f64,
    pub nsf_wc_rank: u32,
    pub printed_nsf_wc_rank: Option<u32>,
    pub nsf_fc: f64,
    pub nsf_fc_rank: u32,
    pub printed_nsf_fc_rank: Option<u32>,
    pub elsevier_wc: Option<f64>,
    pub elsevier_wc_rank: Option<u32>,
    pub printed_elsevier_wc_rank: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table1Replication {
    pub rows: Vec<Table1Row>,
}

impl Table1Replication {
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        for r in &self.rows {
            let pairs = [
                ("nsf_wc_rank", Some(r.nsf_wc_rank), r.printed_nsf_wc_rank),
                ("nsf_fc_rank", Some(r.nsf_fc_rank), r.printed_nsf_fc_rank),
                (
                    "elsevier_wc_rank",
                    r.elsevier_wc_rank,
                    r.printed_elsevier_wc_rank,
                ),
            ];
            for (col, got, want) in pairs {
                if let (Some(got), Some(want)) = (got, want) {
                    if got != want {
                        out.push(format!(
                            "table1/{}/{col}: computed {got}, published {want}",
                            r.country
                        ));
                    }
                }
            }
        }
        out
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new()
            .column("country", 0)
            .column("nsf_wc", 0)
            .column("nsf_wc_rank", 0)
            .column("nsf_fc", 2)
            .column("nsf_fc_rank", 0)
            .column("elsevier_wc", 0)
            .column("elsevier_wc_rank", 0);
        for r in &self.rows {
            t.push(vec![
                r.country.clone().into(),
                r.nsf_wc.into(),
                r.nsf_wc_rank.into(),
                r.nsf_fc.into(),
                r.nsf_fc_rank.into(),
                r.elsevier_wc.into(),
                r.elsevier_wc_rank.into(),
            ]);
        }
        t
    }
}

/// Recomputes the whole/fractional rank columns from the fixture scores.
pub fn replicate_table1(fixtures: &FixtureSet) -> Table1Replication {
    let wc = rank_scores("nsf_wc", fixtures.nsf.iter().map(|r| (r.code, r.wc)));
    let fc = rank_scores(
        "nsf_fc",
        fixtures.nsf.iter().map(|r| (r.code, r.fc.unwrap_or(0.0))),
    );
    let els = rank_scores(
        "elsevier_wc",
        fixtures.elsevier.iter().map(|r| (r.code, r.wc)),
    );
    let printed = |code: CountryCode| fixtures.printed_ranks.iter().find(|p| p.code == code);

    let mut rows: Vec<Table1Row> = fixtures
        .nsf
        .iter()
        .map(|r| {
            let p = printed(r.code);
            let e = fixtures.elsevier.iter().find(|e| e.code == r.code);
            Table1Row {
                country: r.country.clone(),
                nsf_wc: r.wc,
                nsf_wc_rank: wc.display_rank(r.code).expect("ranked"),
                printed_nsf_wc_rank: p.and_then(|p| p.nsf_wc_rank),
                nsf_fc: r.fc.unwrap_or(0.0),
                nsf_fc_rank: fc.display_rank(r.code).expect("ranked"),
                printed_nsf_fc_rank: p.and_then(|p| p.nsf_fc_rank),
                elsevier_wc: e.map(|e| e.wc),
                elsevier_wc_rank: els.display_rank(r.code),
                printed_elsevier_wc_rank: p.and_then(|p| p.elsevier_wc_rank),
            }
        })
        .collect();
    rows.sort_by_key(|r| r.nsf_wc_rank);
    Table1Replication { rows }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table2Row {
    pub country: String,
    pub metrics: CountryMetrics,
    pub printed: PrintedTable2Row,
    pub reduction_check: Check,
    pub icp_check: Check,
    pub ratio_check: Check,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table2Replication {
    pub rows: Vec<Table2Row>,
}

impl Table2Replication {
    pub fn checks(&self) -> impl Iterator<Item = &Check> {
        self.rows
            .iter()
            .flat_map(|r| [&r.reduction_check, &r.icp_check, &r.ratio_check])
    }

    pub fn failures(&self) -> Vec<String> {
        self.checks()
            .filter(|c| !c.pass)
            .map(describe_failure)
            .collect()
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new()
            .column("country", 0)
            .column("wc", 0)
            .column("fc", 2)
            .column("reduction_pct", 1)
            .column("icp", 0)
            .column("icp_pct", 1)
            .column("ratio", 2)
            .column("d_reduction", 3)
            .column("d_icp_pct", 3)
            .column("d_ratio", 3);
        for r in &self.rows {
            let m = &r.metrics;
            t.push(vec![
                r.country.clone().into(),
                m.wc.into(),
                m.fc.into(),
                m.reduction_pct.into(),
                (m.icp as i64).into(),
                m.icp_pct.into(),
                m.ratio.into(),
                (m.reduction_pct - r.printed.reduction_pct).into(),
                (m.icp_pct - r.printed.icp_pct).into(),
                m.ratio.map(|v| v - r.printed.ratio).into(),
            ]);
        }
        t
    }
}

fn describe_failure(c: &Check) -> String {
    format!(
        "{}: computed {:.4}, published {}, allowed [{:.4}, {:.4}]",
        c.name, c.computed, c.published, c.lower, c.upper
    )
}

/// Recomputes reduction%, ICP% and their ratio for the 20 NSF countries.
pub fn replicate_table2(fixtures: &FixtureSet, basis: ReductionBasis) -> Result<Table2Replication> {
    let rows = fixtures
        .nsf
        .iter()
        .zip(&fixtures.printed_table2)
        .map(|(row, printed)| {
            let fc = row.fc.unwrap_or(0.0);
            let metrics = metrics_from_counts(row.code, row.wc, fc, row.icp.unwrap_or(0), basis)?;
            let name = |col: &str| format!("table2/{}/{col}", row.country);
            Ok(Table2Row {
                country: row.country.clone(),
                reduction_check: Check::within(
                    name("reduction_pct"),
                    metrics.reduction_pct,
                    printed.reduction_pct,
                    PCT_TOLERANCE,
                ),
                icp_check: Check::within(
                    name("icp_pct"),
                    metrics.icp_pct,
                    printed.icp_pct,
                    PCT_TOLERANCE,
                ),
                ratio_check: Check::within(
                    name("ratio"),
                    metrics.ratio.unwrap_or(f64::NAN),
                    printed.ratio,
                    RATIO_TOLERANCE,
                ),
                metrics,
                printed: printed.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Table2Replication { rows })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankCorrelations {
    /// NSF whole-count ranks against NSF fractional-count ranks.
    pub srcc_wc_fc: Check,
    /// NSF against Elsevier whole counts over their shared countries.
    pub srcc_nsf_elsevier: Check,
    pub shared_countries: usize,
    pub pearson_icp_reduction: Check,
}

impl RankCorrelations {
    pub fn checks(&self) -> [&Check; 3] {
        [
            &self.srcc_wc_fc,
            &self.srcc_nsf_elsevier,
            &self.pearson_icp_reduction,
        ]
    }

    pub fn failures(&self) -> Vec<String> {
        self.checks()
            .into_iter()
            .filter(|c| !c.pass)
            .map(describe_failure)
            .collect()
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new()
            .column("statistic", 0)
            .column("computed", 3)
            .column("published", 3)
            .column("lower", 3)
            .column("upper", 3)
            .column("pass", 0);
        for c in self.checks() {
            t.push(vec![
                c.name.clone().into(),
                c.computed.into(),
                c.published.into(),
                c.lower.into(),
                c.upper.into(),
                (if c.pass { "yes" } else { "no" }).into(),
            ]);
        }
        t
    }
}

pub fn replicate_rank_correlations(fixtures: &FixtureSet) -> Result<RankCorrelations> {
    let t1 = replicate_table1(fixtures);
    let wc_ranks: Vec<f64> = t1.rows.iter().map(|r| f64::from(r.nsf_wc_rank)).collect();
    let fc_ranks: Vec<f64> = t1.rows.iter().map(|r| f64::from(r.nsf_fc_rank)).collect();
    let srcc_wc_fc = spearman(&wc_ranks, &fc_ranks)?;

    let shared: Vec<(f64, f64)> = fixtures
        .nsf
        .iter()
        .filter_map(|n| {
            fixtures
                .elsevier
                .iter()
                .find(|e| e.code == n.code)
                .map(|e| (n.wc, e.wc))
        })
        .collect();
    let (nsf_wc, els_wc): (Vec<f64>, Vec<f64>) = shared.iter().copied().unzip();
    let srcc_nsf_elsevier = spearman(&nsf_wc, &els_wc)?;

    let t2 = replicate_table2(fixtures, ReductionBasis::FcBasis)?;
    let icp: Vec<f64> = t2.rows.iter().map(|r| r.metrics.icp_pct).collect();
    let reduction: Vec<f64> = t2.rows.iter().map(|r| r.metrics.reduction_pct).collect();
    let pearson_icp_reduction = pearson(&icp, &reduction)?;

    Ok(RankCorrelations {
        srcc_wc_fc: Check::within(
            "srcc(nsf_wc_rank, nsf_fc_rank)",
            srcc_wc_fc,
            PUBLISHED_SRCC_WC_FC,
            SRCC_WC_FC_TOLERANCE,
        ),
        srcc_nsf_elsevier: Check::range(
            "srcc(nsf_wc, elsevier_wc) shared countries",
            srcc_nsf_elsevier,
            PUBLISHED_SRCC_NSF_ELSEVIER,
            NSF_ELSEVIER_RANGE.0,
            NSF_ELSEVIER_RANGE.1,
        ),
        shared_countries: shared.len(),
        pearson_icp_reduction: Check::within(
            "pearson(icp_pct, reduction_pct)",
            pearson_icp_reduction,
            PUBLISHED_PEARSON_ICP_REDUCTION,
            PEARSON_TOLERANCE,
        ),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellDelta {
    pub row: String,
    pub column: String,
    pub computed: f64,
    pub published: f64,
    pub delta: f64,
    pub within_tolerance: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table4Replication {
    pub basis: SrccBasis,
    pub matrix: CorrelationMatrix,
    /// Upper-triangle cells (45 for ten slices).
    pub cells: Vec<CellDelta>,
}

impl Table4Replication {
    pub fn within_share(&self) -> f64 {
        let ok = self.cells.iter().filter(|c| c.within_tolerance).count();
        ok as f64 / self.cells.len() as f64
    }

    pub fn max_abs_delta(&self) -> f64 {
        self.cells.iter().map(|c| c.delta.abs()).fold(0.0, f64::max)
    }

    pub fn outliers(&self) -> impl Iterator<Item = &CellDelta> {
        self.cells.iter().filter(|c| !c.within_tolerance)
    }

    pub fn diagonal_is_unit(&self) -> bool {
        (0..self.matrix.labels.len()).all(|i| self.matrix.values[i][i] == 1.0)
    }

    pub fn pass(&self) -> bool {
        self.diagonal_is_unit()
            && self.within_share() >= MATRIX_MIN_WITHIN_SHARE
            && self
                .outliers()
                .all(|c| c.delta.abs() <= MATRIX_OUTLIER_TOLERANCE)
    }

    pub fn failures(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .outliers()
            .map(|c| {
                format!(
                    "table4/{} × {}: computed {:.4}, published {}, delta {:+.4}",
                    c.row, c.column, c.computed, c.published, c.delta
                )
            })
            .collect();
        if !self.pass() {
            out.push(format!(
                "table4: {:.1}% of cells within ±{MATRIX_TOLERANCE}, max |delta| {:.4} ({} basis)",
                100.0 * self.within_share(),
                self.max_abs_delta(),
                self.basis.label()
            ));
        }
        out
    }

    pub fn matrix_table(&self) -> Table {
        let mut t = Table::new().column("slice", 0);
        for l in &self.matrix.labels {
            t = t.column(l.clone(), 3);
        }
        for (label, row) in self.matrix.labels.iter().zip(&self.matrix.values) {
            let mut cells: Vec<Cell> = vec![label.clone().into()];
            cells.extend(row.iter().map(|v| Cell::Num(*v)));
            t.push(cells);
        }
        t
    }

    pub fn delta_table(&self) -> Table {
        let mut t = Table::new()
            .column("row", 0)
            .column("column", 0)
            .column("computed", 3)
            .column("published", 3)
            .column("delta", 3)
            .column("within", 0);
        for c in &self.cells {
            t.push(vec![
                c.row.clone().into(),
                c.column.clone().into(),
                c.computed.into(),
                c.published.into(),
                c.delta.into(),
                (if c.within_tolerance { "yes" } else { "no" }).into(),
            ]);
        }
        t
    }
}

/// Recomputes the 10 × 10 subject rank correlation matrix from the printed
/// subject ranks under `basis`.
pub fn replicate_table4(fixtures: &FixtureSet, basis: SrccBasis) -> Result<Table4Replication> {
    let labels = fixtures.subject_slices();
    let columns: Vec<Vec<f64>> = labels
        .iter()
        .map(|l| fixtures.subject_rank_column(l))
        .collect();
    let mut matrix =
        crate::rank::correlation_matrix(labels.clone(), &columns, |x, y| srcc(x, y, basis))?;
    matrix.countries = fixtures
        .subject_countries()
        .into_iter()
        .map(|(_, c)| c)
        .collect();

    let printed = &fixtures.printed_matrix;
    let mut cells = Vec::new();
    for i in 0..labels.len() {
        for j in i + 1..labels.len() {
            let computed = matrix.values[i][j];
            let published = printed.values[i][j];
            let delta = computed - published;
            cells.push(CellDelta {
                row: labels[i].clone(),
                column: labels[j].clone(),
                computed,
                published,
                delta,
                within_tolerance: delta.abs() <= MATRIX_TOLERANCE + 1e-12,
            });
        }
    }
    Ok(Table4Replication {
        basis,
        matrix,
        cells,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Fig1Curves {
    /// (country, ICP%) sorted by value descending.
    pub icp: Vec<(String, f64)>,
    /// (country, reduction%) sorted by value descending.
    pub reduction: Vec<(String, f64)>,
}

impl Fig1Curves {
    pub fn to_table(&self) -> Table {
        let mut t = Table::new()
            .column("position", 0)
            .column("icp_country", 0)
            .column("icp_pct", 1)
            .column("reduction_country", 0)
            .column("reduction_pct", 1);
        for (i, (a, b)) in self.icp.iter().zip(&self.reduction).enumerate() {
            t.push(vec![
                (i + 1).into(),
                a.0.clone().into(),
                a.1.into(),
                b.0.clone().into(),
                b.1.into(),
            ]);
        }
        t
    }
}

/// ICP% and reduction% series, each sorted descending, ready for plotting.
pub fn fig1_curves(fixtures: &FixtureSet) -> Result<Fig1Curves> {
    let t2 = replicate_table2(fixtures, ReductionBasis::FcBasis)?;
    let sorted = |f: fn(&CountryMetrics) -> f64| {
        let mut v: Vec<(String, f64)> = t2
            .rows
            .iter()
            .map(|r| (r.country.clone(), f(&r.metrics)))
            .collect();
        v.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        v
    };
    Ok(Fig1Curves {
        icp: sorted(|m| m.icp_pct),
        reduction: sorted(|m| m.reduction_pct),
    })
}

/// Which replication outputs to produce.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    Table1,
    Table2,
    Correlations,
    Table4,
    Fig1,
    All,
}

impl std::str::FromStr for Target {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "table1" => Ok(Target::Table1),
            "table2" => Ok(Target::Table2),
            "correlations" => Ok(Target::Correlations),
            "table4" => Ok(Target::Table4),
            "fig1" => Ok(Target::Fig1),
            "all" => Ok(Target::All),
            other => Err(format!(
                "unknown target {other:?} (expected table1, table2, correlations, table4, fig1 or all)"
            )),
        }
    }
}

/// Full replication run, renderable as Markdown, JSON or CSV.
#[derive(Clone, Debug)]
pub struct ReplicationReport {
    pub table1: Option<Table1Replication>,
    pub table2: Option<Table2Replication>,
    pub correlations: Option<RankCorrelations>,
    pub table4: Option<Table4Replication>,
    pub fig1: Option<Fig1Curves>,
}

pub fn replicate(
    fixtures: &FixtureSet,
    target: Target,
    reduction: ReductionBasis,
    srcc_basis: SrccBasis,
) -> Result<ReplicationReport> {
    let want = |t: Target| target == Target::All || target == t;
    Ok(ReplicationReport {
        table1: want(Target::Table1).then(|| replicate_table1(fixtures)),
        table2: want(Target::Table2)
            .then(|| replicate_table2(fixtures, reduction))
            .transpose()?,
        correlations: want(Target::Correlations)
            .then(|| replicate_rank_correlations(fixtures))
            .transpose()?,
        table4: want(Target::Table4)
            .then(|| replicate_table4(fixtures, srcc_basis))
            .transpose()?,
        fig1: want(Target::Fig1)
            .then(|| fig1_curves(fixtures))
            .transpose()?,
    })
}

impl ReplicationReport {
    /// Every out-of-tolerance value, by name.
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Some(t) = &self.table1 {
            out.extend(t.failures());
        }
        if let Some(t) = &self.table2 {
            out.extend(t.failures());
        }
        if let Some(c) = &self.correlations {
            out.extend(c.failures());
        }
        if let Some(t) = &self.table4 {
            if !t.pass() {
                out.extend(t.failures());
            }
        }
        out
    }

    pub fn passed(&self) -> bool {
        self.failures().is_empty()
    }

    /// Flagged (but tolerated) matrix cells, reported even on success.
    pub fn flagged(&self) -> Vec<String> {
        match &self.table4 {
            Some(t) if t.pass() => t.failures(),
            _ => Vec::new(),
        }
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let section = |out: &mut String, title: &str, table: &Table| {
            let _ = writeln!(out, "## {title}\n");
            out.push_str(&write_table(table, Format::Markdown));
            out.push('\n');
        };
        if let Some(t) = &self.table1 {
            section(&mut out, "Whole and fractional count ranks", &t.to_table());
        }
        if let Some(t) = &self.table2 {
            section(&mut out, "Reduction, ICP share and ratio", &t.to_table());
        }
        if let Some(c) = &self.correlations {
            section(&mut out, "Rank and score correlations", &c.to_table());
        }
        if let Some(t) = &self.table4 {
            let title = format!("Subject-area rank correlations ({} basis)", t.basis.label());
            section(&mut out, &title, &t.matrix_table());
            let _ = writeln!(
                out,
                "Cells within ±{MATRIX_TOLERANCE}: {}/{}; max |delta| {}\n",
                t.cells.iter().filter(|c| c.within_tolerance).count(),
                t.cells.len(),
                format_fixed(t.max_abs_delta(), 4)
            );
            section(&mut out, "Subject-area matrix deltas", &t.delta_table());
        }
        if let Some(f) = &self.fig1 {
            section(&mut out, "ICP% and reduction% curves", &f.to_table());
        }
        let failures = self.failures();
        let flagged = self.flagged();
        let _ = writeln!(out, "## Verdict\n");
        if failures.is_empty() {
            out.push_str("All replicated values are within tolerance.\n");
        } else {
            for f in &failures {
                let _ = writeln!(out, "- FAIL {f}");
            }
        }
        for f in &flagged {
            let _ = writeln!(out, "- FLAG {f}");
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let mut obj = serde_json::Map::new();
        if let Some(t) = &self.table1 {
            obj.insert("table1".into(), to_json(&t.to_table()));
        }
        if let Some(t) = &self.table2 {
            obj.insert("table2".into(), to_json(&t.to_table()));
        }
        if let Some(c) = &self.correlations {
            obj.insert("correlations".into(), to_json(&c.to_table()));
        }
        if let Some(t) = &self.table4 {
            obj.insert(
                "table4".into(),
                json!({
                    "basis": t.basis.label(),
                    "matrix": to_json(&t.matrix_table()),
                    "cells": to_json(&t.delta_table()),
                    "within_share": format_fixed(t.within_share(), 4).parse::<f64>().unwrap_or(0.0),
                }),
            );
        }
        if let Some(f) = &self.fig1 {
            obj.insert("fig1".into(), to_json(&f.to_table()));
        }
        obj.insert("failures".into(), json!(self.failures()));
        obj.insert("flagged".into(), json!(self.flagged()));
        obj.insert("passed".into(), json!(self.passed()));
        Value::Object(obj)
    }

    /// CSV rendering: one CSV block per section separated by a blank line.
    pub fn to_csv(&self) -> String {
        let mut blocks = Vec::new();
        if let Some(t) = &self.table1 {
            blocks.push(write_table(&t.to_table(), Format::Csv));
        }
        if let Some(t) = &self.table2 {
            blocks.push(write_table(&t.to_table(), Format::Csv));
        }
        if let Some(c) = &self.correlations {
            blocks.push(write_table(&c.to_table(), Format::Csv));
        }
        if let Some(t) = &self.table4 {
            blocks.push(write_table(&t.matrix_table(), Format::Csv));
            blocks.push(write_table(&t.delta_table(), Format::Csv));
        }
        if let Some(f) = &self.fig1 {
            blocks.push(write_table(&f.to_table(), Format::Csv));
        }
        blocks.join("\n")
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Markdown => self.to_markdown(),
            Format::Csv => self.to_csv(),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.to_json()).expect("serializable");
                s.push('\n');
                s
            }
        }
    }
}
