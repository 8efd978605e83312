//! Candidate extraction from a product cluster, validity classification and
//! the sieve that leaves one ranked form per derived thread.
//!
//! A candidate is a simple path in the cluster. Its pair vertices are
//! projected back onto concepts: each vertex `(g, h)` emits `g`, then `h`
//! when `h != g`, and consecutive repeats are collapsed. The projected trace
//! is turned into a thread whose links join consecutive trace concepts. A
//! concept is an AKU of the candidate iff it is an AKU of either factor.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use thiserror::Error;

use crate::concept::{Concept, ConceptId, Strand, StrandedLink};
use crate::csd::{Csd, DEFAULT_DECAY};
use crate::tensor::{PairVertex, ProductCluster};

pub const DEFAULT_MAX_PATH_EDGES: usize = 4;
pub const DEFAULT_CANDIDATE_CAP: usize = 100_000;
/// Property label of links that join concepts with no link in either factor.
pub const CROSS_STRAND_LABEL: &str = "cross";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LearningError {
    #[error("candidate count exceeds the cap of {0}")]
    BudgetExceeded(usize),
    #[error("max path length must be at least one edge")]
    ZeroPathLength,
    #[error("incompatible pair relates {0:?} to itself")]
    SelfIncompatible(String),
    #[error("incompatible labels must be non-empty")]
    EmptyLabel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Verdict {
    Valid,
    InvalidNoAku,
    InvalidNoSku,
    InvalidIncompatible,
    InvalidWeak,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Valid => "Valid",
            Verdict::InvalidNoAku => "InvalidNoAku",
            Verdict::InvalidNoSku => "InvalidNoSku",
            Verdict::InvalidIncompatible => "InvalidIncompatible",
            Verdict::InvalidWeak => "InvalidWeak",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Label pairs that may not appear together in a valid thread. Labels are
/// matched case-insensitively.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConstraintSet {
    pairs: BTreeSet<(String, String)>,
}

impl ConstraintSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_incompatible(&mut self, a: &str, b: &str) -> Result<(), LearningError> {
        let (a, b) = (a.to_lowercase(), b.to_lowercase());
        if a.is_empty() || b.is_empty() {
            return Err(LearningError::EmptyLabel);
        }
        if a == b {
            return Err(LearningError::SelfIncompatible(a));
        }
        self.pairs.insert(if a < b { (a, b) } else { (b, a) });
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Lower-cased pairs in ascending order.
    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str)> {
        self.pairs.iter().map(|(a, b)| (a.as_str(), b.as_str()))
    }

    /// First declared pair whose two labels both occur in `labels`.
    pub fn first_conflict<'a>(
        &self,
        labels: impl IntoIterator<Item = &'a str>,
    ) -> Option<(&str, &str)> {
        let present: BTreeSet<String> = labels.into_iter().map(str::to_lowercase).collect();
        self.pairs()
            .find(|(a, b)| present.contains(*a) && present.contains(*b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractOptions {
    pub max_path_edges: usize,
    pub cap: usize,
    /// Decay used for the derived threads' node weights.
    pub decay: f64,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions {
            max_path_edges: DEFAULT_MAX_PATH_EDGES,
            cap: DEFAULT_CANDIDATE_CAP,
            decay: DEFAULT_DECAY,
        }
    }
}

/// A derived thread proposed by one path of the cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateCsd {
    path: Vec<PairVertex>,
    trace: Vec<ConceptId>,
    concepts: Vec<Concept>,
    links: Vec<StrandedLink>,
    akus: BTreeSet<ConceptId>,
    derived: Option<Csd>,
    verdict: Option<Verdict>,
    score: f64,
}

impl CandidateCsd {
    pub fn product_path(&self) -> &[PairVertex] {
        &self.path
    }

    pub fn concept_trace(&self) -> &[ConceptId] {
        &self.trace
    }

    /// Concepts of the derived thread in ascending id order.
    pub fn concepts(&self) -> &[Concept] {
        &self.concepts
    }

    pub fn links(&self) -> &[StrandedLink] {
        &self.links
    }

    pub fn akus(&self) -> &BTreeSet<ConceptId> {
        &self.akus
    }

    /// The derived thread; `None` when it has no AKU or no SKU.
    pub fn derived(&self) -> Option<&Csd> {
        self.derived.as_ref()
    }

    /// `None` until classified.
    pub fn verdict(&self) -> Option<Verdict> {
        self.verdict
    }

    pub fn is_valid(&self) -> bool {
        self.verdict == Some(Verdict::Valid)
    }

    /// Score of the derived thread, 0 when there is none or before
    /// classification.
    pub fn score(&self) -> f64 {
        self.score
    }

    /// Canonical form of the derived thread, if it exists.
    pub fn canonical_form(&self) -> Option<String> {
        self.derived.as_ref().map(Csd::canonical_form)
    }

    /// Trace concept ids joined by `-`.
    pub fn trace_string(&self) -> String {
        let ids: Vec<&str> = self.trace.iter().map(ConceptId::as_str).collect();
        ids.join("-")
    }
}

/// Projects a path of pair vertices onto concepts.
///
/// Returns the collapsed trace and, for every step between consecutive trace
/// entries, the weight of the product edge that produced it. A step inside a
/// vertex `(g, h)` borrows the weight of the path edge leaving that vertex
/// (or entering it, for the last vertex).
///
/// Panics if `path` has fewer than two vertices or skips a cluster edge.
pub fn project_path(cluster: &ProductCluster, path: &[PairVertex]) -> (Vec<ConceptId>, Vec<f64>) {
    assert!(path.len() >= 2, "a candidate path has at least one edge");
    let edge_w = |i: usize| {
        cluster
            .edge_weight(&path[i], &path[i + 1])
            .expect("candidate path follows cluster edges")
    };
    let n = path.len();
    let mut trace: Vec<ConceptId> = Vec::with_capacity(2 * n);
    let mut steps: Vec<f64> = Vec::with_capacity(2 * n);
    let mut push = |id: &ConceptId, w: f64, trace: &mut Vec<ConceptId>| {
        if trace.last() == Some(id) {
            return;
        }
        if !trace.is_empty() {
            steps.push(w);
        }
        trace.push(id.clone());
    };
    for (i, v) in path.iter().enumerate() {
        let inbound = if i > 0 { edge_w(i - 1) } else { 0.0 };
        push(&v.left, inbound, &mut trace);
        if !v.is_coherent() {
            let inner = if i + 1 < n { edge_w(i) } else { edge_w(i - 1) };
            push(&v.right, inner, &mut trace);
        }
    }
    (trace, steps)
}

fn candidate_from_path(
    cluster: &ProductCluster,
    path: Vec<PairVertex>,
    decay: f64,
) -> CandidateCsd {
    let (trace, steps) = project_path(cluster, &path);
    let (left, right) = (cluster.left(), cluster.right());

    let mut links: BTreeMap<(ConceptId, ConceptId), StrandedLink> = BTreeMap::new();
    for (pair, &w) in trace.windows(2).zip(&steps) {
        let (a, b) = (&pair[0], &pair[1]);
        let key = if a < b {
            (a.clone(), b.clone())
        } else {
            (b.clone(), a.clone())
        };
        if links.contains_key(&key) {
            continue;
        }
        let link = match left.link_between(a, b).or_else(|| right.link_between(a, b)) {
            Some(l) => l.clone(),
            None => {
                let strand = Strand::new(CROSS_STRAND_LABEL, w).expect("product weight in (0,1]");
                StrandedLink::new(a.clone(), b.clone(), vec![strand]).expect("distinct endpoints")
            }
        };
        links.insert(key, link);
    }

    let ids: BTreeSet<&ConceptId> = trace.iter().collect();
    let concepts: Vec<Concept> = ids
        .iter()
        .map(|id| {
            left.concept(id)
                .or_else(|| right.concept(id))
                .expect("trace concepts come from the factors")
                .clone()
        })
        .collect();
    let akus: BTreeSet<ConceptId> = ids
        .iter()
        .filter(|id| cluster.is_inherited_aku(id))
        .map(|id| (*id).clone())
        .collect();
    let links: Vec<StrandedLink> = links.into_values().collect();

    let derived = if akus.is_empty() || akus.len() == concepts.len() {
        None
    } else {
        let id = format!("{}x{}", left.id(), right.id());
        Some(
            Csd::build(id, concepts.clone(), links.clone(), akus.clone(), decay)
                .expect("projected trace is a connected walk with an AKU and an SKU"),
        )
    };

    CandidateCsd {
        path,
        trace,
        concepts,
        links,
        akus,
        derived,
        verdict: None,
        score: 0.0,
    }
}

/// One candidate per simple path of 1 to `max_path_edges` edges.
///
/// A path and its reverse are the same candidate; it is taken in the
/// direction whose first vertex is the smaller. Paths are produced by
/// depth-first search from each vertex in ascending order, visiting
/// neighbours in ascending order.
pub fn extract_candidates(
    cluster: &ProductCluster,
    opts: &ExtractOptions,
) -> Result<Vec<CandidateCsd>, LearningError> {
    if opts.max_path_edges == 0 {
        return Err(LearningError::ZeroPathLength);
    }
    let adj = cluster.adjacency();
    let mut out = Vec::new();
    let mut path: Vec<&PairVertex> = Vec::new();

    for start in cluster.vertices() {
        path.push(start);
        // stack of neighbour cursors, one per path vertex
        let mut cursors: Vec<usize> = vec![0];
        while let Some(cursor) = cursors.last_mut() {
            let tip = *path.last().expect("non-empty path");
            let neighbors = &adj[tip];
            if *cursor >= neighbors.len() || path.len() > opts.max_path_edges {
                cursors.pop();
                path.pop();
                continue;
            }
            let next = neighbors[*cursor];
            *cursor += 1;
            if path.contains(&next) {
                continue;
            }
            path.push(next);
            cursors.push(0);
            if path[0] < next {
                if out.len() == opts.cap {
                    return Err(LearningError::BudgetExceeded(opts.cap));
                }
                let owned = path.iter().map(|v| (*v).clone()).collect();
                out.push(candidate_from_path(cluster, owned, opts.decay));
            }
        }
    }
    Ok(out)
}

/// Assigns a verdict by the first failing rule: no AKU, no SKU, an
/// incompatible label pair, score below `min_score`.
pub fn classify(
    mut candidate: CandidateCsd,
    constraints: &ConstraintSet,
    min_score: f64,
) -> CandidateCsd {
    candidate.score = candidate.derived.as_ref().map_or(0.0, Csd::score);
    let verdict = if candidate.akus.is_empty() {
        Verdict::InvalidNoAku
    } else if candidate.akus.len() == candidate.concepts.len() {
        Verdict::InvalidNoSku
    } else if constraints
        .first_conflict(candidate.concepts.iter().map(|c| c.label.as_str()))
        .is_some()
    {
        Verdict::InvalidIncompatible
    } else if candidate.score < min_score {
        Verdict::InvalidWeak
    } else {
        Verdict::Valid
    };
    candidate.verdict = Some(verdict);
    candidate
}

/// Survivors of the sieve plus everything it rejected.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CandidateSet {
    /// Unique canonical forms, score descending, ties by canonical form.
    pub valid: Vec<CandidateCsd>,
    /// Invalid candidates in input order.
    pub rejected: Vec<CandidateCsd>,
}

impl CandidateSet {
    /// Valid derived threads renamed `<prefix>-<rank>`, rank starting at 1.
    pub fn ranked_threads(&self, prefix: &str) -> Vec<Csd> {
        self.valid
            .iter()
            .enumerate()
            .map(|(k, c)| {
                c.derived()
                    .expect("valid candidates have a derived thread")
                    .renamed(format!("{}-{}", prefix, k + 1))
                    .expect("prefix is a token")
            })
            .collect()
    }
}

/// Drops invalid candidates into `rejected` and keeps one highest-scoring
/// representative per canonical form; among equal scores the earliest wins.
/// Unclassified candidates count as rejected.
pub fn sieve(candidates: Vec<CandidateCsd>) -> CandidateSet {
    let mut best: BTreeMap<String, CandidateCsd> = BTreeMap::new();
    let mut rejected = Vec::new();
    for c in candidates {
        let key = match (c.is_valid(), c.canonical_form()) {
            (true, Some(key)) => key,
            _ => {
                rejected.push(c);
                continue;
            }
        };
        match best.get(&key) {
            Some(kept) if kept.score >= c.score => {}
            _ => {
                best.insert(key, c);
            }
        }
    }
    let mut valid: Vec<(String, CandidateCsd)> = best.into_iter().collect();
    valid.sort_by(|(ka, a), (kb, b)| {
        b.score
            .partial_cmp(&a.score)
            .unwrap_or(Ordering::Equal)
            .then_with(|| ka.cmp(kb))
    });
    CandidateSet {
        valid: valid.into_iter().map(|(_, c)| c).collect(),
        rejected,
    }
}

/// Extract, classify and sieve in one pass.
pub fn learn(
    cluster: &ProductCluster,
    opts: &ExtractOptions,
    constraints: &ConstraintSet,
    min_score: f64,
) -> Result<CandidateSet, LearningError> {
    let candidates = extract_candidates(cluster, opts)?
        .into_iter()
        .map(|c| classify(c, constraints, min_score))
        .collect();
    Ok(sieve(candidates))
}

impl fmt::Display for CandidateCsd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = self
            .verdict
            .map_or("Unclassified".to_string(), |v| v.to_string());
        write!(f, "{}\t{}", verdict, self.trace_string())
    }
}
