//! Concept State Diagrams: connected knowledge threads whose nodes are
//! either apex (AKU) or subsidiary (SKU) units.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::concept::{is_token, Concept, ConceptId, StrandedLink};

pub const DEFAULT_DECAY: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CsdError {
    #[error("invalid thread id {0:?}")]
    InvalidId(String),
    #[error("a thread needs at least two concepts, got {0}")]
    TooFewNodes(usize),
    #[error("decay {0} is outside (0, 1)")]
    InvalidDecay(f64),
    #[error("concept {0} declared twice")]
    DuplicateConcept(ConceptId),
    #[error("link endpoint {0} is not a concept of the thread")]
    DanglingEndpoint(ConceptId),
    #[error("duplicate link {0} -- {1}")]
    DuplicateLink(ConceptId, ConceptId),
    #[error("AKU {0} is not a concept of the thread")]
    UnknownAku(ConceptId),
    #[error("thread has no AKU")]
    NoAku,
    #[error("thread has no SKU")]
    NoSku,
    #[error("thread is not connected")]
    Disconnected,
}

impl CsdError {
    /// Short, stable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            CsdError::InvalidId(_) => "InvalidId",
            CsdError::TooFewNodes(_) => "TooFewNodes",
            CsdError::InvalidDecay(_) => "InvalidDecay",
            CsdError::DuplicateConcept(_) => "DuplicateConcept",
            CsdError::DanglingEndpoint(_) => "DanglingEndpoint",
            CsdError::DuplicateLink(..) => "DuplicateLink",
            CsdError::UnknownAku(_) => "UnknownAku",
            CsdError::NoAku => "NoAku",
            CsdError::NoSku => "NoSku",
            CsdError::Disconnected => "Disconnected",
        }
    }
}

/// A validated knowledge thread.
///
/// Invariants (enforced by [`Csd::build`]): at least two concepts, every
/// link endpoint is a concept, at most one link per endpoint pair, at least
/// one AKU and one SKU, and the graph is connected.
#[derive(Debug, Clone, PartialEq)]
pub struct Csd {
    id: String,
    concepts: BTreeMap<ConceptId, Concept>,
    links: BTreeMap<(ConceptId, ConceptId), StrandedLink>,
    akus: BTreeSet<ConceptId>,
    decay: f64,
}

impl Csd {
    pub fn build(
        id: impl Into<String>,
        concepts: Vec<Concept>,
        links: Vec<StrandedLink>,
        akus: BTreeSet<ConceptId>,
        decay: f64,
    ) -> Result<Csd, CsdError> {
        let id = id.into();
        if !is_token(&id) {
            return Err(CsdError::InvalidId(id));
        }
        if concepts.len() < 2 {
            return Err(CsdError::TooFewNodes(concepts.len()));
        }
        if !(decay > 0.0 && decay < 1.0) {
            return Err(CsdError::InvalidDecay(decay));
        }

        let mut by_id = BTreeMap::new();
        for c in concepts {
            if by_id.contains_key(&c.id) {
                return Err(CsdError::DuplicateConcept(c.id));
            }
            by_id.insert(c.id.clone(), c);
        }

        let mut by_pair = BTreeMap::new();
        for link in links {
            let (a, b) = link.endpoints();
            for end in [a, b] {
                if !by_id.contains_key(end) {
                    return Err(CsdError::DanglingEndpoint(end.clone()));
                }
            }
            let key = link.key();
            if by_pair.contains_key(&key) {
                return Err(CsdError::DuplicateLink(key.0, key.1));
            }
            by_pair.insert(key, link);
        }

        if let Some(stray) = akus.iter().find(|a| !by_id.contains_key(*a)) {
            return Err(CsdError::UnknownAku(stray.clone()));
        }
        if akus.is_empty() {
            return Err(CsdError::NoAku);
        }
        if akus.len() == by_id.len() {
            return Err(CsdError::NoSku);
        }

        let csd = Csd {
            id,
            concepts: by_id,
            links: by_pair,
            akus,
            decay,
        };
        let first = csd.concepts.keys().next().expect("at least two concepts");
        if csd.hop_distances([first]).len() != csd.concepts.len() {
            return Err(CsdError::Disconnected);
        }
        Ok(csd)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    /// Same thread under a different id.
    pub fn renamed(&self, id: impl Into<String>) -> Result<Csd, CsdError> {
        let id = id.into();
        if !is_token(&id) {
            return Err(CsdError::InvalidId(id));
        }
        let mut out = self.clone();
        out.id = id;
        Ok(out)
    }

    pub fn decay(&self) -> f64 {
        self.decay
    }

    /// Concepts in ascending id order.
    pub fn concepts(&self) -> impl Iterator<Item = &Concept> {
        self.concepts.values()
    }

    pub fn concept(&self, id: &ConceptId) -> Option<&Concept> {
        self.concepts.get(id)
    }

    pub fn contains(&self, id: &ConceptId) -> bool {
        self.concepts.contains_key(id)
    }

    pub fn node_count(&self) -> usize {
        self.concepts.len()
    }

    /// Links in ascending endpoint-pair order.
    pub fn links(&self) -> impl Iterator<Item = &StrandedLink> {
        self.links.values()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn link_between(&self, a: &ConceptId, b: &ConceptId) -> Option<&StrandedLink> {
        let key = if a < b {
            (a.clone(), b.clone())
        } else {
            (b.clone(), a.clone())
        };
        self.links.get(&key)
    }

    pub fn akus(&self) -> &BTreeSet<ConceptId> {
        &self.akus
    }

    pub fn is_aku(&self, id: &ConceptId) -> bool {
        self.akus.contains(id)
    }

    /// Neighbours of `id` in ascending id order.
    pub fn neighbors(&self, id: &ConceptId) -> Vec<&ConceptId> {
        let mut out: Vec<&ConceptId> = self.links.values().filter_map(|l| l.other(id)).collect();
        out.sort();
        out
    }

    fn adjacency(&self) -> BTreeMap<&ConceptId, Vec<&ConceptId>> {
        let mut adj: BTreeMap<&ConceptId, Vec<&ConceptId>> =
            self.concepts.keys().map(|k| (k, Vec::new())).collect();
        for link in self.links.values() {
            let (a, b) = link.endpoints();
            adj.get_mut(a).expect("endpoint").push(b);
            adj.get_mut(b).expect("endpoint").push(a);
        }
        for list in adj.values_mut() {
            list.sort();
        }
        adj
    }

    /// Multi-source BFS hop counts from `sources`; unreachable nodes are absent.
    pub(crate) fn hop_distances<'a>(
        &'a self,
        sources: impl IntoIterator<Item = &'a ConceptId>,
    ) -> BTreeMap<&'a ConceptId, u32> {
        let adj = self.adjacency();
        let mut dist = BTreeMap::new();
        let mut queue = VecDeque::new();
        for s in sources {
            if dist.insert(s, 0u32).is_none() {
                queue.push_back(s);
            }
        }
        while let Some(v) = queue.pop_front() {
            let d = dist[v];
            for &n in &adj[v] {
                if !dist.contains_key(n) {
                    dist.insert(n, d + 1);
                    queue.push_back(n);
                }
            }
        }
        dist
    }

    /// `decay^d` where `d` is the hop distance to the nearest AKU.
    pub fn node_weights(&self) -> BTreeMap<ConceptId, f64> {
        self.hop_distances(self.akus.iter())
            .into_iter()
            .map(|(id, d)| (id.clone(), decay_pow(self.decay, d)))
            .collect()
    }

    pub fn node_weight(&self, id: &ConceptId) -> Option<f64> {
        self.node_weights().get(id).copied()
    }

    /// Geometric mean of link affinities times arithmetic mean of node
    /// weights.
    pub fn score(&self) -> f64 {
        let affinities: Vec<f64> = self.links.values().map(StrandedLink::affinity).collect();
        let weights = self.node_weights();
        let mean_weight = weights.values().sum::<f64>() / weights.len() as f64;
        geometric_mean(&affinities) * mean_weight
    }

    /// `nodes|edges|akus`, each part sorted and `;`-joined; edges as `low,high`.
    pub fn canonical_form(&self) -> String {
        let mut key = String::new();
        join_into(&mut key, self.concepts.keys().map(ConceptId::as_str));
        key.push('|');
        let mut first = true;
        for (a, b) in self.links.keys() {
            if !first {
                key.push(';');
            }
            first = false;
            key.push_str(a.as_str());
            key.push(',');
            key.push_str(b.as_str());
        }
        key.push('|');
        join_into(&mut key, self.akus.iter().map(ConceptId::as_str));
        key
    }
}

fn join_into<'a>(out: &mut String, parts: impl Iterator<Item = &'a str>) {
    for (i, p) in parts.enumerate() {
        if i > 0 {
            out.push(';');
        }
        out.push_str(p);
    }
}

pub(crate) fn decay_pow(decay: f64, hops: u32) -> f64 {
    let mut w = 1.0;
    for _ in 0..hops {
        w *= decay;
    }
    w
}

/// Geometric mean of values in (0, 1]; 1 for an empty slice.
pub(crate) fn geometric_mean(values: &[f64]) -> f64 {
    match values.len() {
        0 => 1.0,
        1 => values[0],
        n => {
            let product: f64 = values.iter().product();
            if product.is_normal() {
                libm::pow(product, 1.0 / n as f64)
            } else {
                // product underflowed; average the logs instead
                libm::exp(values.iter().map(|&v| libm::log(v)).sum::<f64>() / n as f64)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concept::Strand;
    use alloc::string::ToString;
    use alloc::vec;

    fn id(s: &str) -> ConceptId {
        ConceptId::new(s).unwrap()
    }

    fn concepts(pairs: &[(&str, &str)]) -> Vec<Concept> {
        pairs
            .iter()
            .map(|(i, l)| Concept::new(id(i), *l).unwrap())
            .collect()
    }

    fn link(a: &str, b: &str, w: f64) -> StrandedLink {
        StrandedLink::new(id(a), id(b), vec![Strand::new("p", w).unwrap()]).unwrap()
    }

    fn akus(ids: &[&str]) -> BTreeSet<ConceptId> {
        ids.iter().map(|s| id(s)).collect()
    }

    fn chain_thread(aku_ids: &[&str]) -> Result<Csd, CsdError> {
        Csd::build(
            "chain",
            concepts(&[
                ("knn1", "Continent"),
                ("knn2", "Largest"),
                ("knn3", "Continuous"),
                ("knn4", "Landmass"),
                ("knn5", "Earth"),
            ]),
            vec![
                link("knn1", "knn2", 0.5),
                link("knn2", "knn3", 0.5),
                link("knn3", "knn4", 0.5),
                link("knn4", "knn5", 0.5),
            ],
            akus(aku_ids),
            DEFAULT_DECAY,
        )
    }

    fn kt1() -> Csd {
        Csd::build(
            "kt1",
            concepts(&[
                ("knn1", "World"),
                ("knn2", "Thing"),
                ("knn3", "Living"),
                ("knn4", "Non-living"),
            ]),
            vec![
                link("knn1", "knn2", 0.9),
                link("knn2", "knn3", 0.8),
                link("knn2", "knn4", 0.8),
            ],
            akus(&["knn1"]),
            DEFAULT_DECAY,
        )
        .unwrap()
    }

    #[test]
    fn chain_builds() {
        let csd = chain_thread(&["knn1"]).unwrap();
        assert_eq!(csd.node_count(), 5);
        assert_eq!(csd.link_count(), 4);
    }

    #[test]
    fn no_aku_rejected() {
        let err = Csd::build(
            "no_aku",
            concepts(&[
                ("grow", "grow"),
                ("thin", "thin"),
                ("breathe", "breathe"),
                ("eat", "eat"),
                ("strong", "strong"),
            ]),
            vec![
                link("grow", "thin", 0.5),
                link("thin", "breathe", 0.5),
                link("breathe", "eat", 0.5),
                link("eat", "strong", 0.5),
            ],
            BTreeSet::new(),
            DEFAULT_DECAY,
        );
        assert_eq!(err, Err(CsdError::NoAku));
    }

    #[test]
    fn all_aku_rejected() {
        let names = ["animal", "plant", "stick", "door", "hands"];
        let err = Csd::build(
            "all_aku",
            names
                .iter()
                .map(|n| Concept::new(id(n), *n).unwrap())
                .collect(),
            names.windows(2).map(|w| link(w[0], w[1], 0.5)).collect(),
            akus(&names),
            DEFAULT_DECAY,
        );
        assert_eq!(err, Err(CsdError::NoSku));
    }

    #[test]
    fn structural_errors() {
        let two = concepts(&[("a", "A"), ("b", "B")]);
        assert_eq!(
            Csd::build("t", two.clone(), vec![], akus(&["a"]), 0.5),
            Err(CsdError::Disconnected)
        );
        assert_eq!(
            Csd::build(
                "t",
                two.clone(),
                vec![link("a", "c", 0.5)],
                akus(&["a"]),
                0.5
            ),
            Err(CsdError::DanglingEndpoint(id("c")))
        );
        assert_eq!(
            Csd::build(
                "t",
                two.clone(),
                vec![link("a", "b", 0.5), link("b", "a", 0.9)],
                akus(&["a"]),
                0.5
            ),
            Err(CsdError::DuplicateLink(id("a"), id("b")))
        );
        assert_eq!(
            Csd::build(
                "t",
                two.clone(),
                vec![link("a", "b", 0.5)],
                akus(&["z"]),
                0.5
            ),
            Err(CsdError::UnknownAku(id("z")))
        );
        assert_eq!(
            Csd::build("t", two[..1].to_vec(), vec![], akus(&["a"]), 0.5),
            Err(CsdError::TooFewNodes(1))
        );
        for bad in [0.0, 1.0, f64::NAN] {
            assert!(matches!(
                Csd::build(
                    "t",
                    two.clone(),
                    vec![link("a", "b", 0.5)],
                    akus(&["a"]),
                    bad
                ),
                Err(CsdError::InvalidDecay(_))
            ));
        }
        let mut dup = two.clone();
        dup.push(Concept::new(id("a"), "again").unwrap());
        assert_eq!(
            Csd::build("t", dup, vec![link("a", "b", 0.5)], akus(&["a"]), 0.5),
            Err(CsdError::DuplicateConcept(id("a")))
        );
        assert_eq!(
            Csd::build("bad id", two, vec![link("a", "b", 0.5)], akus(&["a"]), 0.5),
            Err(CsdError::InvalidId("bad id".to_string()))
        );
    }

    #[test]
    fn chain_weights() {
        let csd = Csd::build(
            "chain",
            concepts(&[("aku", "A"), ("x", "X"), ("y", "Y")]),
            vec![link("aku", "x", 0.5), link("x", "y", 0.5)],
            akus(&["aku"]),
            0.5,
        )
        .unwrap();
        let w = csd.node_weights();
        assert_eq!(w[&id("aku")], 1.0);
        assert_eq!(w[&id("x")], 0.5);
        assert_eq!(w[&id("y")], 0.25);
    }

    #[test]
    fn chain_nearest_aku() {
        // chain knn1-knn2-knn3-knn4-knn5, AKUs at 1, 4, 5: hops 0,1,1,0,0
        let csd = chain_thread(&["knn1", "knn4", "knn5"]).unwrap();
        let w = csd.node_weights();
        let expected = [1.0, 0.5, 0.5, 1.0, 1.0];
        for (i, e) in expected.iter().enumerate() {
            assert_eq!(w[&id(&alloc::format!("knn{}", i + 1))], *e);
        }
    }

    #[test]
    fn two_node_score() {
        let csd = Csd::build(
            "t",
            concepts(&[("a", "A"), ("b", "B")]),
            vec![link("a", "b", 1.0)],
            akus(&["a"]),
            0.5,
        )
        .unwrap();
        assert_eq!(csd.score(), 0.75);
    }

    #[test]
    fn kt1_score_matches_calculator() {
        // geomean(0.9, 0.8, 0.8) * mean(1, 0.5, 0.25, 0.25), evaluated with
        // Python's math module: (0.9*0.8*0.8)**(1/3) * 0.5
        let expected = 0.416_016_764_610_380_84;
        assert!((kt1().score() - expected).abs() < 1e-12);
    }

    #[test]
    fn kt1_canonical_form() {
        assert_eq!(
            kt1().canonical_form(),
            "knn1;knn2;knn3;knn4|knn1,knn2;knn2,knn3;knn2,knn4|knn1"
        );
    }

    #[test]
    fn canonical_form_order_free_and_aku_sensitive() {
        let a = chain_thread(&["knn1"]).unwrap();
        let mut cs = concepts(&[
            ("knn5", "Earth"),
            ("knn3", "Continuous"),
            ("knn1", "Continent"),
            ("knn4", "Landmass"),
            ("knn2", "Largest"),
        ]);
        cs.rotate_left(2);
        let b = Csd::build(
            "other",
            cs,
            vec![
                link("knn5", "knn4", 0.5),
                link("knn2", "knn1", 0.5),
                link("knn4", "knn3", 0.5),
                link("knn3", "knn2", 0.5),
            ],
            akus(&["knn1"]),
            DEFAULT_DECAY,
        )
        .unwrap();
        assert_eq!(a.canonical_form(), b.canonical_form());
        assert_eq!(a.score(), b.score());
        let c = chain_thread(&["knn4"]).unwrap();
        assert_ne!(a.canonical_form(), c.canonical_form());
    }

    #[test]
    fn neighbors_sorted() {
        let csd = kt1();
        assert_eq!(
            csd.neighbors(&id("knn2")),
            vec![&id("knn1"), &id("knn3"), &id("knn4")]
        );
    }

    #[test]
    fn geometric_mean_underflow_path() {
        let tiny = vec![1e-200; 4];
        let g = geometric_mean(&tiny);
        assert!((g - 1e-200).abs() / 1e-200 < 1e-9);
    }
}
