//! Rank assignment and correlation statistics.
//!
//! Display ranks use competition ranking ("1, 2, 2, 4"); correlation uses
//! average ranks ("1, 2.5, 2.5, 4"). Equal scores are listed by country code.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::str::FromStr;

use serde::Serialize;

use crate::counting::ScoreTable;
use crate::error::{Error, Result};
use crate::model::CountryCode;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankEntry {
    pub country: CountryCode,
    pub score: f64,
    pub display_rank: u32,
    pub tie_rank: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankTable {
    pub slice: String,
    pub entries: Vec<RankEntry>,
}

impl RankTable {
    pub fn get(&self, country: CountryCode) -> Option<&RankEntry> {
        self.entries.iter().find(|e| e.country == country)
    }

    pub fn display_rank(&self, country: CountryCode) -> Option<u32> {
        self.get(country).map(|e| e.display_rank)
    }
}

/// Ranks the resolved countries of a score table (the `ZZ` pseudo-country
/// is left out).
pub fn assign_ranks(scores: &ScoreTable) -> RankTable {
    rank_scores(&scores.slice, scores.resolved())
}

/// Same as [`assign_ranks`] but keeps `ZZ` in the ranking.
pub fn assign_ranks_including_unresolved(scores: &ScoreTable) -> RankTable {
    rank_scores(&scores.slice, scores.scores.iter().map(|(c, s)| (*c, *s)))
}

/// Ranks arbitrary (country, score) pairs, highest score first.
pub fn rank_scores<I>(slice: &str, scores: I) -> RankTable
where
    I: IntoIterator<Item = (CountryCode, f64)>,
{
    let mut items: Vec<(CountryCode, f64)> = scores.into_iter().collect();
    items.sort_by(score_order);

    let mut entries = Vec::with_capacity(items.len());
    let mut start = 0;
    while start < items.len() {
        let mut end = start + 1;
        while end < items.len() && items[end].1 == items[start].1 {
            end += 1;
        }
        // Positions start+1 ..= end share one score.
        let display = (start + 1) as u32;
        let tie = (start + 1 + end) as f64 / 2.0;
        entries.extend(items[start..end].iter().map(|(c, s)| RankEntry {
            country: *c,
            score: *s,
            display_rank: display,
            tie_rank: tie,
        }));
        start = end;
    }
    RankTable {
        slice: slice.to_string(),
        entries,
    }
}

/// Average ranks in ascending order of value (smallest value gets rank 1).
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let avg = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::TooFewObservations {
            needed: 2,
            got: x.len(),
        });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Undefined("non-finite observation"));
    }
    Ok(())
}

/// Product-moment correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Undefined("zero variance"));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Spearman's rho: Pearson correlation of the average-rank vectors.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    pearson(&average_ranks(x), &average_ranks(y))
}

/// How a rank correlation is computed from two columns.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum SrccBasis {
    /// Re-rank both columns with average ranks, then Pearson.
    #[default]
    AverageRank,
    /// Treat the columns as ranks and apply `1 − 6Σd²/(n(n²−1))`.
    ClosedForm,
    /// Treat the columns as ranks and apply `1 − 6Σd²/(n²(n−1))`. This
    /// denominator is what reproduces the published subject-area matrix.
    ClosedFormReduced,
}

impl SrccBasis {
    pub fn label(self) -> &'static str {
        match self {
            SrccBasis::AverageRank => "average-rank",
            SrccBasis::ClosedForm => "closed-form",
            SrccBasis::ClosedFormReduced => "closed-form-reduced",
        }
    }
}

impl FromStr for SrccBasis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "average-rank" => Ok(SrccBasis::AverageRank),
            "closed-form" => Ok(SrccBasis::ClosedForm),
            "closed-form-reduced" => Ok(SrccBasis::ClosedFormReduced),
            other => Err(format!(
                "unknown basis {other:?} (expected average-rank, closed-form or closed-form-reduced)"
            )),
        }
    }
}

fn sum_squared_differences(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Rank correlation of two aligned columns under `basis`. The closed-form
/// bases take the columns as given ranks and do not re-rank them.
pub fn srcc(x: &[f64], y: &[f64], basis: SrccBasis) -> Result<f64> {
    match basis {
        SrccBasis::AverageRank => spearman(x, y),
        SrccBasis::ClosedForm | SrccBasis::ClosedFormReduced => {
            check_pair(x, y)?;
            let n = x.len() as f64;
            let denom = match basis {
                SrccBasis::ClosedForm => n * (n * n - 1.0),
                _ => n * n * (n - 1.0),
            };
            Ok(1.0 - 6.0 * sum_squared_differences(x, y) / denom)
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Statistic {
    #[default]
    Spearman,
    Pearson,
}

impl FromStr for Statistic {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "spearman" => Ok(Statistic::Spearman),
            "pearson" => Ok(Statistic::Pearson),
            other => Err(format!(
                "unknown statistic {other:?} (expected spearman or pearson)"
            )),
        }
    }
}

/// Symmetric correlation matrix with unit diagonal.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrelationMatrix {
    pub labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
    /// Countries every slice shared; the correlations use only these.
    pub countries: Vec<CountryCode>,
    /// Countries present in some slices but not all.
    pub dropped: Vec<CountryCode>,
}

impl CorrelationMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.labels.iter().position(|l| l == a)?;
        let j = self.labels.iter().position(|l| l == b)?;
        Some(self.values[i][j])
    }
}

/// Pairwise correlations between aligned columns. Only the upper triangle
/// is computed; the diagonal is set to exactly 1.
pub fn correlation_matrix<F>(
    labels: Vec<String>,
    columns: &[Vec<f64>],
    corr: F,
) -> Result<CorrelationMatrix>
where
    F: Fn(&[f64], &[f64]) -> Result<f64>,
{
    let k = columns.len();
    if k < 2 || labels.len() != k {
        return Err(Error::TooFewObservations { needed: 2, got: k });
    }
    let mut values = vec![vec![0.0; k]; k];
    for i in 0..k {
        values[i][i] = 1.0;
        for j in i + 1..k {
            let v = corr(&columns[i], &columns[j])?;
            values[i][j] = v;
            values[j][i] = v;
        }
    }
    Ok(CorrelationMatrix {
        labels,
        values,
        countries: Vec::new(),
        dropped: Vec::new(),
    })
}

/// Correlation matrix across score tables, restricted to the countries
/// present in every table. `ZZ` is never included.
pub fn score_matrix(tables: &[ScoreTable], stat: Statistic) -> Result<CorrelationMatrix> {
    if tables.len() < 2 {
        return Err(Error::TooFewObservations {
            needed: 2,
            got: tables.len(),
        });
    }
    let sets: Vec<BTreeSet<CountryCode>> = tables
        .iter()
        .map(|t| t.resolved().map(|(c, _)| c).collect())
        .collect();
    let union: BTreeSet<CountryCode> = sets.iter().flatten().copied().collect();
    let common: Vec<CountryCode> = union
        .iter()
        .copied()
        .filter(|c| sets.iter().all(|s| s.contains(c)))
        .collect();
    if common.len() < 2 {
        return Err(Error::TooFewObservations {
            needed: 2,
            got: common.len(),
        });
    }
    let columns: Vec<Vec<f64>> = tables
        .iter()
        .map(|t| common.iter().map(|c| t.score(*c)).collect())
        .collect();
    let labels = tables.iter().map(|t| t.slice.clone()).collect();
    let mut matrix = match stat {
        Statistic::Spearman => correlation_matrix(labels, &columns, spearman)?,
        Statistic::Pearson => correlation_matrix(labels, &columns, pearson)?,
    };
    matrix.dropped = union
        .iter()
        .copied()
        .filter(|c| !common.contains(c))
        .collect();
    matrix.countries = common;
    Ok(matrix)
}

/// Spearman matrix across score tables on their common countries.
pub fn srcc_matrix(tables: &[ScoreTable]) -> Result<CorrelationMatrix> {
    score_matrix(tables, Statistic::Spearman)
}

/// Spearman matrix across rank tables, correlating their tie ranks on the
/// common countries.
pub fn srcc_matrix_from_ranks(tables: &[RankTable]) -> Result<CorrelationMatrix> {
    let as_scores: Vec<ScoreTable> = tables
        .iter()
        .map(|t| ScoreTable {
            method: crate::counting::CountingMethod::Whole,
            slice: t.slice.clone(),
            records: t.entries.len(),
            // Negated so that rank 1 is the highest score.
            scores: t.entries.iter().map(|e| (e.country, -e.tie_rank)).collect(),
        })
        .collect();
    srcc_matrix(&as_scores)
}

/// Display ordering used by result tables: score descending, then code.
pub fn score_order(a: &(CountryCode, f64), b: &(CountryCode, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then(a.0.cmp(&b.0))
}
