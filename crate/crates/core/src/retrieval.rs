//! Concept queries over a collection of threads, and weighted traversal of
//! a single thread.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use thiserror::Error;

use crate::concept::ConceptId;
use crate::csd::Csd;

pub const DEFAULT_TOP_K: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RetrievalError {
    #[error("concept {0} is not part of the thread")]
    UnknownConcept(ConceptId),
}

/// Threads available to queries, kept in insertion order.
#[derive(Debug, Clone, Default)]
pub struct ThreadStore {
    threads: Vec<Csd>,
}

impl ThreadStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, thread: Csd) {
        self.threads.push(thread);
    }

    pub fn threads(&self) -> &[Csd] {
        &self.threads
    }

    pub fn len(&self) -> usize {
        self.threads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.threads.is_empty()
    }
}

impl FromIterator<Csd> for ThreadStore {
    fn from_iter<I: IntoIterator<Item = Csd>>(iter: I) -> Self {
        ThreadStore {
            threads: iter.into_iter().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryResult<'a> {
    pub thread: &'a Csd,
    pub score: f64,
    pub anchor: ConceptId,
    pub anchor_weight: f64,
}

/// Threads holding a concept labelled `label` (case-insensitive), best
/// first, at most `top_k` of them.
///
/// Ranking: thread score descending, then anchor weight descending, then
/// canonical form ascending, then thread id. When a thread holds several
/// matching concepts the heaviest one (smallest id on ties) is its anchor.
pub fn query<'a>(store: &'a ThreadStore, label: &str, top_k: usize) -> Vec<QueryResult<'a>> {
    let wanted = label.to_lowercase();
    let mut hits: Vec<(QueryResult<'a>, String)> = Vec::new();
    for thread in store.threads() {
        let weights = thread.node_weights();
        let mut anchor: Option<(&ConceptId, f64)> = None;
        for c in thread.concepts() {
            if c.label.to_lowercase() != wanted {
                continue;
            }
            let w = weights[&c.id];
            if anchor.is_none_or(|(_, best)| w > best) {
                anchor = Some((&c.id, w));
            }
        }
        if let Some((id, w)) = anchor {
            let result = QueryResult {
                thread,
                score: thread.score(),
                anchor: id.clone(),
                anchor_weight: w,
            };
            hits.push((result, thread.canonical_form()));
        }
    }
    hits.sort_by(|(a, ka), (b, kb)| {
        b.score
            .partial_cmp(&a.score)
            .unwrap_or(Ordering::Equal)
            .then_with(|| {
                b.anchor_weight
                    .partial_cmp(&a.anchor_weight)
                    .unwrap_or(Ordering::Equal)
            })
            .then_with(|| ka.cmp(kb))
            .then_with(|| a.thread.id().cmp(b.thread.id()))
    });
    hits.truncate(top_k);
    hits.into_iter().map(|(r, _)| r).collect()
}

/// Breadth-first walk from `from`, neighbours in ascending id order, each
/// concept paired with its node weight.
pub fn traverse(thread: &Csd, from: &ConceptId) -> Result<Vec<(ConceptId, f64)>, RetrievalError> {
    if !thread.contains(from) {
        return Err(RetrievalError::UnknownConcept(from.clone()));
    }
    let weights: BTreeMap<ConceptId, f64> = thread.node_weights();
    let mut seen: BTreeSet<&ConceptId> = BTreeSet::new();
    let mut queue = VecDeque::new();
    let mut order = Vec::with_capacity(thread.node_count());
    seen.insert(from);
    queue.push_back(from);
    while let Some(v) = queue.pop_front() {
        order.push((v.clone(), weights[v]));
        for n in thread.neighbors(v) {
            if seen.insert(n) {
                queue.push_back(n);
            }
        }
    }
    Ok(order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concept::{Concept, Strand, StrandedLink};
    use alloc::vec;

    fn id(s: &str) -> ConceptId {
        ConceptId::new(s).unwrap()
    }

    fn thread(
        name: &str,
        nodes: &[(&str, &str)],
        links: &[(&str, &str, f64)],
        akus: &[&str],
    ) -> Csd {
        Csd::build(
            name,
            nodes
                .iter()
                .map(|(i, l)| Concept::new(id(i), *l).unwrap())
                .collect(),
            links
                .iter()
                .map(|(a, b, w)| {
                    StrandedLink::new(id(a), id(b), vec![Strand::new("p", *w).unwrap()]).unwrap()
                })
                .collect(),
            akus.iter().map(|a| id(a)).collect(),
            0.5,
        )
        .unwrap()
    }

    fn chain_thread() -> Csd {
        thread(
            "chain",
            &[
                ("knn1", "Continent"),
                ("knn2", "Largest"),
                ("knn3", "Continuous"),
                ("knn4", "Landmass"),
                ("knn5", "Earth"),
            ],
            &[
                ("knn1", "knn2", 0.5),
                ("knn2", "knn3", 0.5),
                ("knn3", "knn4", 0.5),
                ("knn4", "knn5", 0.5),
            ],
            &["knn1"],
        )
    }

    #[test]
    fn query_continent() {
        let store: ThreadStore = [chain_thread()].into_iter().collect();
        let hits = query(&store, "continent", DEFAULT_TOP_K);
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].anchor, id("knn1"));
        assert_eq!(hits[0].anchor_weight, 1.0);
        assert_eq!(hits[0].thread.id(), "chain");
        assert!(query(&store, "unicorn", 10).is_empty());
        assert!(query(&ThreadStore::new(), "continent", 10).is_empty());
    }

    #[test]
    fn anchor_weight_breaks_score_ties() {
        // same structure and weights, different AKU placement
        let a = thread(
            "a",
            &[("x", "Rain"), ("y", "Wet")],
            &[("x", "y", 0.5)],
            &["x"],
        );
        let b = thread(
            "b",
            &[("x", "Rain"), ("y", "Wet")],
            &[("x", "y", 0.5)],
            &["y"],
        );
        let store: ThreadStore = [a, b].into_iter().collect();
        let hits = query(&store, "wet", 10);
        assert_eq!(hits[0].score, hits[1].score);
        assert_eq!(hits[0].thread.id(), "b");
        assert_eq!(hits[0].anchor_weight, 1.0);
        assert_eq!(hits[1].anchor_weight, 0.5);
        assert_eq!(query(&store, "wet", 1).len(), 1);
    }

    #[test]
    fn chain_traversal() {
        let t = thread(
            "chain",
            &[("aku", "A"), ("x", "X"), ("y", "Y")],
            &[("aku", "x", 0.5), ("x", "y", 0.5)],
            &["aku"],
        );
        assert_eq!(
            traverse(&t, &id("aku")).unwrap(),
            vec![(id("aku"), 1.0), (id("x"), 0.5), (id("y"), 0.25)]
        );
        let from_leaf = traverse(&t, &id("y")).unwrap();
        assert_eq!(from_leaf.len(), 3);
        assert_eq!(
            traverse(&t, &id("nope")),
            Err(RetrievalError::UnknownConcept(id("nope")))
        );
    }

    #[test]
    fn tie_rule_orders_siblings() {
        let star = thread(
            "star",
            &[("m", "M"), ("c", "C"), ("a", "A"), ("b", "B")],
            &[("m", "c", 0.5), ("m", "a", 0.5), ("m", "b", 0.5)],
            &["m"],
        );
        let order: Vec<ConceptId> = traverse(&star, &id("m"))
            .unwrap()
            .into_iter()
            .map(|(c, _)| c)
            .collect();
        assert_eq!(order, vec![id("m"), id("a"), id("b"), id("c")]);
    }

    #[test]
    fn chain_thread_bfs_from_knn1() {
        let order: Vec<(ConceptId, f64)> = traverse(&chain_thread(), &id("knn1")).unwrap();
        let expected = [
            ("knn1", 1.0),
            ("knn2", 0.5),
            ("knn3", 0.25),
            ("knn4", 0.125),
            ("knn5", 0.0625),
        ];
        assert_eq!(order.len(), expected.len());
        for ((got, w), (want, ww)) in order.iter().zip(expected) {
            assert_eq!(got.as_str(), want);
            assert_eq!(*w, ww);
        }
    }
}
