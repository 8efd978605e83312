//! Tensor (categorical) product of two knowledge threads.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::concept::ConceptId;
use crate::csd::Csd;

/// A vertex `(g, h)` of the product: `left` from the first factor, `right`
/// from the second.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PairVertex {
    pub left: ConceptId,
    pub right: ConceptId,
}

impl PairVertex {
    pub fn new(left: ConceptId, right: ConceptId) -> Self {
        PairVertex { left, right }
    }

    /// Both coordinates name the same concept.
    pub fn is_coherent(&self) -> bool {
        self.left == self.right
    }

    pub fn swapped(&self) -> PairVertex {
        PairVertex::new(self.right.clone(), self.left.clone())
    }
}

impl fmt::Display for PairVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.left, self.right)
    }
}

/// Unordered product edge, stored with the smaller vertex first.
pub type PairEdge = (PairVertex, PairVertex);

pub(crate) fn edge_key(a: PairVertex, b: PairVertex) -> PairEdge {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TensorError {
    #[error("edge count {found} disagrees with 2*|E1|*|E2| = {expected}")]
    OracleMismatch { found: usize, expected: usize },
}

/// `left ⊗ right`, with both factors kept for provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductCluster {
    left: Csd,
    right: Csd,
    vertices: Vec<PairVertex>,
    edges: BTreeMap<PairEdge, f64>,
}

impl ProductCluster {
    pub fn left(&self) -> &Csd {
        &self.left
    }

    pub fn right(&self) -> &Csd {
        &self.right
    }

    pub fn factor_ids(&self) -> (&str, &str) {
        (self.left.id(), self.right.id())
    }

    /// Vertices in ascending `(left, right)` order.
    pub fn vertices(&self) -> &[PairVertex] {
        &self.vertices
    }

    /// Edges with weights, in ascending order of the normalized pair.
    pub fn edges(&self) -> &BTreeMap<PairEdge, f64> {
        &self.edges
    }

    pub fn edge_weight(&self, a: &PairVertex, b: &PairVertex) -> Option<f64> {
        self.edges.get(&edge_key(a.clone(), b.clone())).copied()
    }

    pub fn has_edge(&self, a: &PairVertex, b: &PairVertex) -> bool {
        self.edge_weight(a, b).is_some()
    }

    /// Sorted neighbour lists for every vertex.
    pub fn adjacency(&self) -> BTreeMap<&PairVertex, Vec<&PairVertex>> {
        let mut adj: BTreeMap<&PairVertex, Vec<&PairVertex>> =
            self.vertices.iter().map(|v| (v, Vec::new())).collect();
        for (a, b) in self.edges.keys() {
            adj.get_mut(a).expect("vertex").push(b);
            adj.get_mut(b).expect("vertex").push(a);
        }
        for list in adj.values_mut() {
            list.sort();
        }
        adj
    }

    /// Concept is an AKU of either factor.
    pub fn is_inherited_aku(&self, id: &ConceptId) -> bool {
        self.left.is_aku(id) || self.right.is_aku(id)
    }

    /// Label of a concept, preferring the left factor.
    pub fn label(&self, id: &ConceptId) -> Option<&str> {
        self.left
            .concept(id)
            .or_else(|| self.right.concept(id))
            .map(|c| c.label.as_str())
    }
}

/// Builds `left ⊗ right`.
///
/// `{(g,h),(g',h')}` is an edge iff `{g,g'}` is a link of `left` and `{h,h'}`
/// a link of `right`; its weight is the product of the two link affinities.
/// Each factor-link pair `{g,g'}`, `{h,h'}` yields the two edges
/// `(g,h)-(g',h')` and `(g,h')-(g',h)`.
pub fn tensor_product(left: &Csd, right: &Csd) -> ProductCluster {
    let vertices: Vec<PairVertex> = left
        .concepts()
        .flat_map(|g| {
            right
                .concepts()
                .map(move |h| PairVertex::new(g.id.clone(), h.id.clone()))
        })
        .collect();

    let mut edges = BTreeMap::new();
    for l in left.links() {
        let (g, g2) = l.endpoints();
        let la = l.affinity();
        for r in right.links() {
            let (h, h2) = r.endpoints();
            let w = la * r.affinity();
            let straight = edge_key(
                PairVertex::new(g.clone(), h.clone()),
                PairVertex::new(g2.clone(), h2.clone()),
            );
            let crossed = edge_key(
                PairVertex::new(g.clone(), h2.clone()),
                PairVertex::new(g2.clone(), h.clone()),
            );
            edges.insert(straight, w);
            edges.insert(crossed, w);
        }
    }

    ProductCluster {
        left: left.clone(),
        right: right.clone(),
        vertices,
        edges,
    }
}

/// Number of product edges, checked against `2 * |E(left)| * |E(right)|`.
pub fn edge_count_check(left: &Csd, right: &Csd) -> Result<usize, TensorError> {
    let found = tensor_product(left, right).edges.len();
    let expected = 2 * left.link_count() * right.link_count();
    if found == expected {
        Ok(found)
    } else {
        Err(TensorError::OracleMismatch { found, expected })
    }
}

/// Images of the product's vertices and edges under `(g,h) -> (h,g)`.
pub fn swap_image(cluster: &ProductCluster) -> (BTreeSet<PairVertex>, BTreeMap<PairEdge, f64>) {
    let vertices = cluster.vertices.iter().map(PairVertex::swapped).collect();
    let edges = cluster
        .edges
        .iter()
        .map(|((a, b), w)| (edge_key(a.swapped(), b.swapped()), *w))
        .collect();
    (vertices, edges)
}
