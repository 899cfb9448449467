//! International collaboration indicators and the whole-to-fractional
//! reduction metrics.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::Serialize;

use crate::counting::{count, CountingMethod, FractionalMode};
use crate::error::{Error, Result};
use crate::model::{Corpus, CountryCode, PublicationRecord};

/// Denominator used by [`reduction_pct`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ReductionBasis {
    /// `100·(wc − fc)/fc`. Reproduces the published reduction column.
    #[default]
    FcBasis,
    /// `100·(wc − fc)/wc`, reduction as a share of the whole count.
    WcBasis,
}

impl FromStr for ReductionBasis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "fc" => Ok(ReductionBasis::FcBasis),
            "wc" => Ok(ReductionBasis::WcBasis),
            other => Err(format!(
                "unknown reduction basis {other:?} (expected fc or wc)"
            )),
        }
    }
}

/// One country's whole/fractional scores and collaboration indicators.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CountryMetrics {
    pub country: CountryCode,
    pub wc: f64,
    pub fc: f64,
    pub icp: u64,
    pub icp_pct: f64,
    pub reduction_pct: f64,
    /// `None` when `icp_pct` is zero.
    pub ratio: Option<f64>,
}

/// True when the record's resolved countries number at least two.
pub fn is_international(record: &PublicationRecord) -> bool {
    // countries_of never contains ZZ.
    record.countries_of().len() >= 2
}

pub fn icp_pct(icp: f64, wc: f64) -> Result<f64> {
    if wc <= 0.0 {
        return Err(Error::Undefined("ICP share of a zero whole count"));
    }
    Ok(100.0 * icp / wc)
}

pub fn reduction_pct(wc: f64, fc: f64, basis: ReductionBasis) -> Result<f64> {
    let denom = match basis {
        ReductionBasis::FcBasis => fc,
        ReductionBasis::WcBasis => wc,
    };
    if denom <= 0.0 {
        return Err(Error::Undefined("reduction against a zero score"));
    }
    Ok(100.0 * (wc - fc) / denom)
}

pub fn reduction_icp_ratio(reduction_pct: f64, icp_pct: f64) -> Result<f64> {
    if icp_pct == 0.0 {
        return Err(Error::Undefined("ratio with zero ICP share"));
    }
    Ok(reduction_pct / icp_pct)
}

/// Derived columns for a country given its wc, fc and ICP count.
pub fn metrics_from_counts(
    country: CountryCode,
    wc: f64,
    fc: f64,
    icp: u64,
    basis: ReductionBasis,
) -> Result<CountryMetrics> {
    let icp_share = icp_pct(icp as f64, wc)?;
    let reduction = reduction_pct(wc, fc, basis)?;
    let ratio = reduction_icp_ratio(reduction, icp_share).ok();
    Ok(CountryMetrics {
        country,
        wc,
        fc,
        icp,
        icp_pct: icp_share,
        reduction_pct: reduction,
        ratio,
    })
}

/// Per-country metrics for a corpus, sorted by whole count descending then
/// country code. The unresolved pseudo-country is not listed.
pub fn country_metrics(
    corpus: &Corpus,
    mode: FractionalMode,
    basis: ReductionBasis,
) -> Result<Vec<CountryMetrics>> {
    let whole = count(corpus, CountingMethod::Whole)?;
    let fractional = count(corpus, mode.into())?;

    let mut icp: BTreeMap<CountryCode, u64> = BTreeMap::new();
    for record in corpus.records().iter().filter(|r| is_international(r)) {
        for c in record.countries_of() {
            *icp.entry(c).or_default() += 1;
        }
    }

    let mut out = whole
        .resolved()
        .map(|(country, wc)| {
            metrics_from_counts(
                country,
                wc,
                fractional.score(country),
                icp.get(&country).copied().unwrap_or(0),
                basis,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    out.sort_by(|a, b| b.wc.total_cmp(&a.wc).then(a.country.cmp(&b.country)));
    Ok(out)
}
