//! Domain types: countries, authors, publication records and corpora.
//!
//! Everything here is an immutable value once constructed. A [`Corpus`] is
//! validated on construction (unique record ids) and only ever read by the
//! analysis modules.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two-letter uppercase country identifier.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CountryCode([u8; 2]);

/// Pseudo-country that receives the credit of authors without a resolved
/// affiliation country.
pub const UNRESOLVED: CountryCode = CountryCode(*b"ZZ");

/// Name aliases accepted by [`CountryCode::normalize`], matched
/// case-insensitively after trimming.
const ALIASES: &[(&str, &str)] = &[
    ("australia", "AU"),
    ("brazil", "BR"),
    ("canada", "CA"),
    ("china", "CN"),
    ("people's republic of china", "CN"),
    ("england", "GB"),
    ("france", "FR"),
    ("germany", "DE"),
    ("great britain", "GB"),
    ("india", "IN"),
    ("iran", "IR"),
    ("islamic republic of iran", "IR"),
    ("italy", "IT"),
    ("japan", "JP"),
    ("korea", "KR"),
    ("netherlands", "NL"),
    ("the netherlands", "NL"),
    ("poland", "PL"),
    ("republic of korea", "KR"),
    ("russia", "RU"),
    ("russian federation", "RU"),
    ("south korea", "KR"),
    ("spain", "ES"),
    ("sweden", "SE"),
    ("switzerland", "CH"),
    ("taiwan", "TW"),
    ("turkey", "TR"),
    ("turkiye", "TR"),
    ("uk", "GB"),
    ("united kingdom", "GB"),
    ("united states", "US"),
    ("united states of america", "US"),
    ("usa", "US"),
];

impl CountryCode {
    /// Normalizes a raw affiliation country: trim, alias lookup, then
    /// uppercase any two-letter ASCII code. Anything else is rejected.
    pub fn normalize(raw: &str) -> Result<Self> {
        let trimmed = raw.trim();
        let lowered = trimmed.to_ascii_lowercase();
        if let Some((_, code)) = ALIASES.iter().find(|(alias, _)| *alias == lowered) {
            let b = code.as_bytes();
            return Ok(CountryCode([b[0], b[1]]));
        }
        let bytes = trimmed.as_bytes();
        if bytes.len() == 2 && bytes.iter().all(u8::is_ascii_alphabetic) {
            return Ok(CountryCode([
                bytes[0].to_ascii_uppercase(),
                bytes[1].to_ascii_uppercase(),
            ]));
        }
        Err(Error::InvalidCountry(raw.to_string()))
    }

    /// True when the normalized code came from the built-in alias table
    /// rather than being a literal two-letter code.
    pub fn is_alias(raw: &str) -> bool {
        let lowered = raw.trim().to_ascii_lowercase();
        ALIASES.iter().any(|(alias, _)| *alias == lowered)
    }

    pub fn as_str(&self) -> &str {
        // Constructed only from ASCII letters.
        std::str::from_utf8(&self.0).expect("country code is ASCII")
    }

    pub fn is_unresolved(&self) -> bool {
        *self == UNRESOLVED
    }
}

impl FromStr for CountryCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::normalize(s)
    }
}

impl fmt::Display for CountryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for CountryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_str())
    }
}

impl Serialize for CountryCode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for CountryCode {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        CountryCode::normalize(&raw).map_err(serde::de::Error::custom)
    }
}

/// One author of a record. An empty country set marks the author as
/// unresolved; such an author still counts towards the record's author
/// total and hands its share to [`UNRESOLVED`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct AuthorRef {
    countries: BTreeSet<CountryCode>,
}

impl AuthorRef {
    /// Builds an author from its affiliation countries. Duplicates collapse
    /// and any literal `ZZ` is dropped, so `[ZZ]` yields an unresolved author.
    pub fn new<I: IntoIterator<Item = CountryCode>>(countries: I) -> Self {
        AuthorRef {
            countries: countries
                .into_iter()
                .filter(|c| !c.is_unresolved())
                .collect(),
        }
    }

    pub fn unresolved() -> Self {
        AuthorRef::default()
    }

    pub fn countries(&self) -> &BTreeSet<CountryCode> {
        &self.countries
    }

    pub fn is_unresolved(&self) -> bool {
        self.countries.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocType {
    Article,
    Review,
    ConferencePaper,
    Other,
}

impl DocType {
    pub const ALL: [DocType; 4] = [
        DocType::Article,
        DocType::Review,
        DocType::ConferencePaper,
        DocType::Other,
    ];

    /// Article, review and conference paper: the default analysis set.
    pub const RESEARCH: [DocType; 3] =
        [DocType::Article, DocType::Review, DocType::ConferencePaper];

    pub fn as_str(&self) -> &'static str {
        match self {
            DocType::Article => "article",
            DocType::Review => "review",
            DocType::ConferencePaper => "conference_paper",
            DocType::Other => "other",
        }
    }
}

impl FromStr for DocType {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "article" => Ok(DocType::Article),
            "review" => Ok(DocType::Review),
            "conference_paper" | "conference paper" => Ok(DocType::ConferencePaper),
            "other" => Ok(DocType::Other),
            other => Err(format!("unknown doc_type {other:?}")),
        }
    }
}

impl fmt::Display for DocType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PublicationRecord {
    pub id: String,
    pub year: i32,
    pub doc_type: DocType,
    pub subjects: BTreeSet<String>,
    pub authors: Vec<AuthorRef>,
}

impl PublicationRecord {
    /// Union of all authors' resolved countries. Unresolved authors add
    /// nothing, so the set is empty when no author is resolved.
    pub fn countries_of(&self) -> BTreeSet<CountryCode> {
        self.authors
            .iter()
            .flat_map(|a| a.countries.iter().copied())
            .collect()
    }

    pub fn has_unresolved_author(&self) -> bool {
        self.authors.iter().any(AuthorRef::is_unresolved)
    }

    /// Countries that receive whole-count credit: [`Self::countries_of`]
    /// plus [`UNRESOLVED`] when any author lacks a country.
    pub fn credited_countries(&self) -> BTreeSet<CountryCode> {
        let mut set = self.countries_of();
        if self.has_unresolved_author() {
            set.insert(UNRESOLVED);
        }
        set
    }
}

/// Name of the built-in slice that matches every record, including records
/// without subject codes.
pub const ALL_SLICE: &str = "ALL";

/// Named groups of subject codes. Groups may overlap.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SubjectScheme {
    groups: BTreeMap<String, BTreeSet<String>>,
}

/// Which records a slice selects.
#[derive(Clone, Copy, Debug)]
pub enum GroupSelector<'a> {
    All,
    Codes(&'a BTreeSet<String>),
}

impl GroupSelector<'_> {
    pub fn matches(&self, record: &PublicationRecord) -> bool {
        match self {
            GroupSelector::All => true,
            GroupSelector::Codes(codes) => record.subjects.iter().any(|s| codes.contains(s)),
        }
    }
}

impl SubjectScheme {
    pub fn new(groups: BTreeMap<String, BTreeSet<String>>) -> Result<Self> {
        if let Some(name) = groups.keys().find(|k| k.eq_ignore_ascii_case(ALL_SLICE)) {
            return Err(Error::InvalidScheme(format!(
                "group name {name:?} is reserved for the all-records slice"
            )));
        }
        Ok(SubjectScheme { groups })
    }

    /// Parses the `{"group": ["CODE", ...]}` scheme file format.
    pub fn from_json(text: &str) -> Result<Self> {
        let groups: BTreeMap<String, BTreeSet<String>> = serde_json::from_str(text)?;
        Self::new(groups)
    }

    pub fn groups(&self) -> &BTreeMap<String, BTreeSet<String>> {
        &self.groups
    }

    /// Resolves a slice name. `ALL` (any case) selects every record.
    pub fn selector(&self, name: &str) -> Result<GroupSelector<'_>> {
        if name.eq_ignore_ascii_case(ALL_SLICE) {
            return Ok(GroupSelector::All);
        }
        self.groups
            .get(name)
            .map(GroupSelector::Codes)
            .ok_or_else(|| Error::UnknownGroup(name.to_string()))
    }
}

/// A validated collection of records together with its subject scheme.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Corpus {
    records: Vec<PublicationRecord>,
    scheme: SubjectScheme,
    provenance: String,
}

impl Corpus {
    pub fn new(
        records: Vec<PublicationRecord>,
        scheme: SubjectScheme,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        let mut seen = HashSet::with_capacity(records.len());
        for r in &records {
            if !seen.insert(r.id.as_str()) {
                return Err(Error::DuplicateId(r.id.clone()));
            }
        }
        Ok(Corpus {
            records,
            scheme,
            provenance: provenance.into(),
        })
    }

    pub fn records(&self) -> &[PublicationRecord] {
        &self.records
    }

    pub fn scheme(&self) -> &SubjectScheme {
        &self.scheme
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Same corpus with a different scheme attached.
    pub fn with_scheme(mut self, scheme: SubjectScheme) -> Self {
        self.scheme = scheme;
        self
    }

    /// Sub-corpus of the records satisfying `keep`, in original order.
    pub fn subset<F: Fn(&PublicationRecord) -> bool>(&self, keep: F) -> Corpus {
        Corpus {
            records: self.records.iter().filter(|r| keep(r)).cloned().collect(),
            scheme: self.scheme.clone(),
            provenance: self.provenance.clone(),
        }
    }

    /// Sub-corpus selected by a named slice of the scheme.
    pub fn slice(&self, group: &str) -> Result<Corpus> {
        let selector = self.scheme.selector(group)?;
        Ok(self.subset(|r| selector.matches(r)))
    }
}
