//! Concepts (knowledge network nodes), multi-strand links and the store
//! that holds them.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

/// Strand label used when a link is declared without explicit strands.
pub const DEFAULT_STRAND_LABEL: &str = "rel";
/// Strand weight used when a link is declared without explicit strands.
pub const DEFAULT_STRAND_WEIGHT: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConceptError {
    #[error("invalid concept id {0:?}: expected ASCII letters, digits, '_' or '-'")]
    InvalidId(String),
    #[error("duplicate concept id {0}")]
    DuplicateId(ConceptId),
    #[error("concept {0} has an empty label")]
    EmptyLabel(ConceptId),
    #[error("strand has an empty property label")]
    EmptyStrandLabel,
    #[error("strand weight {0} is outside (0, 1]")]
    StrandWeight(f64),
    #[error("link has no strands")]
    NoStrands,
    #[error("self-loop on {0}")]
    SelfLoop(ConceptId),
}

/// Machine key of a concept. Compared byte-wise, case-sensitive.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConceptId(String);

impl ConceptId {
    pub fn new(id: impl Into<String>) -> Result<Self, ConceptError> {
        let id = id.into();
        if is_token(&id) {
            Ok(ConceptId(id))
        } else {
            Err(ConceptError::InvalidId(id))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ConceptId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// True for non-empty strings of ASCII letters, digits, `_` and `-`.
pub fn is_token(s: &str) -> bool {
    !s.is_empty()
        && s.bytes()
            .all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-')
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Concept {
    pub id: ConceptId,
    pub label: String,
}

impl Concept {
    pub fn new(id: ConceptId, label: impl Into<String>) -> Result<Self, ConceptError> {
        let label = label.into();
        if label.is_empty() {
            return Err(ConceptError::EmptyLabel(id));
        }
        Ok(Concept { id, label })
    }

    pub fn label_matches(&self, query: &str) -> bool {
        self.label.to_lowercase() == query.to_lowercase()
    }
}

/// One property-carrying strand of a link.
#[derive(Debug, Clone, PartialEq)]
pub struct Strand {
    property: String,
    weight: f64,
}

impl Strand {
    pub fn new(property: impl Into<String>, weight: f64) -> Result<Self, ConceptError> {
        let property = property.into();
        if property.is_empty() {
            return Err(ConceptError::EmptyStrandLabel);
        }
        // NaN fails both comparisons.
        if !(weight > 0.0 && weight <= 1.0) {
            return Err(ConceptError::StrandWeight(weight));
        }
        Ok(Strand { property, weight })
    }

    pub fn property(&self) -> &str {
        &self.property
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }
}

impl Default for Strand {
    fn default() -> Self {
        Strand {
            property: DEFAULT_STRAND_LABEL.to_string(),
            weight: DEFAULT_STRAND_WEIGHT,
        }
    }
}

/// Undirected link between two distinct concepts. Endpoints are stored
/// with the smaller id first.
#[derive(Debug, Clone, PartialEq)]
pub struct StrandedLink {
    low: ConceptId,
    high: ConceptId,
    strands: Vec<Strand>,
}

impl StrandedLink {
    pub fn new(a: ConceptId, b: ConceptId, strands: Vec<Strand>) -> Result<Self, ConceptError> {
        if a == b {
            return Err(ConceptError::SelfLoop(a));
        }
        if strands.is_empty() {
            return Err(ConceptError::NoStrands);
        }
        let (low, high) = if a < b { (a, b) } else { (b, a) };
        Ok(StrandedLink { low, high, strands })
    }

    /// Link with the single default strand.
    pub fn with_default_strand(a: ConceptId, b: ConceptId) -> Result<Self, ConceptError> {
        Self::new(a, b, alloc::vec![Strand::default()])
    }

    pub fn endpoints(&self) -> (&ConceptId, &ConceptId) {
        (&self.low, &self.high)
    }

    pub fn key(&self) -> (ConceptId, ConceptId) {
        (self.low.clone(), self.high.clone())
    }

    pub fn touches(&self, id: &ConceptId) -> bool {
        self.low == *id || self.high == *id
    }

    pub fn other(&self, id: &ConceptId) -> Option<&ConceptId> {
        if self.low == *id {
            Some(&self.high)
        } else if self.high == *id {
            Some(&self.low)
        } else {
            None
        }
    }

    pub fn strands(&self) -> &[Strand] {
        &self.strands
    }

    pub fn affinity(&self) -> f64 {
        link_affinity(&self.strands)
    }
}

/// Noisy-OR aggregate of strand weights: `1 - prod(1 - w)`.
///
/// The product runs over the weights in ascending order so the result does
/// not depend on how the strands were listed.
pub fn link_affinity(strands: &[Strand]) -> f64 {
    let mut misses: Vec<f64> = strands.iter().map(|s| 1.0 - s.weight).collect();
    misses.sort_by(f64::total_cmp);
    1.0 - misses.iter().product::<f64>()
}

/// Concepts keyed by id.
#[derive(Debug, Clone, Default)]
pub struct ConceptStore {
    concepts: BTreeMap<ConceptId, Concept>,
}

impl ConceptStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_concept(&mut self, id: ConceptId, label: &str) -> Result<Concept, ConceptError> {
        if self.concepts.contains_key(&id) {
            return Err(ConceptError::DuplicateId(id));
        }
        let concept = Concept::new(id.clone(), label)?;
        self.concepts.insert(id, concept.clone());
        Ok(concept)
    }

    pub fn get(&self, id: &ConceptId) -> Option<&Concept> {
        self.concepts.get(id)
    }

    /// Case-insensitive label lookup, ordered by id.
    pub fn find_by_label(&self, label: &str) -> Vec<&Concept> {
        let wanted = label.to_lowercase();
        self.concepts
            .values()
            .filter(|c| c.label.to_lowercase() == wanted)
            .collect()
    }

    pub fn len(&self) -> usize {
        self.concepts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Concept> {
        self.concepts.values()
    }
}
