#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use ils_core::{Concept, ConceptId, Csd, Strand, StrandedLink};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("fixtures")
        .join(name)
}

pub fn id(s: &str) -> ConceptId {
    ConceptId::new(s).unwrap()
}

/// Plain description of a thread, independent of `Csd`.
#[derive(Debug, Clone)]
pub struct RawGraph {
    pub nodes: Vec<String>,
    /// (low, high) by string order, with per-link strand weights
    pub edges: Vec<(String, String, Vec<f64>)>,
    pub akus: BTreeSet<String>,
}

impl RawGraph {
    pub fn has_edge(&self, a: &str, b: &str) -> bool {
        self.edges
            .iter()
            .any(|(x, y, _)| (x == a && y == b) || (x == b && y == a))
    }

    pub fn label(node: &str) -> String {
        format!("L{node}")
    }

    pub fn to_csd(&self, name: &str, decay: f64) -> Csd {
        Csd::build(
            name,
            self.nodes
                .iter()
                .map(|n| Concept::new(id(n), Self::label(n)).unwrap())
                .collect(),
            self.edges
                .iter()
                .map(|(a, b, ws)| {
                    let strands = ws
                        .iter()
                        .enumerate()
                        .map(|(i, w)| Strand::new(format!("s{i}"), *w).unwrap())
                        .collect();
                    StrandedLink::new(id(a), id(b), strands).unwrap()
                })
                .collect(),
            self.akus.iter().map(|a| id(a)).collect(),
            decay,
        )
        .unwrap()
    }
}

/// Random connected simple graph on `n` nodes drawn from `pool`, with a
/// random non-empty proper AKU subset.
pub fn random_graph<R: Rng>(rng: &mut R, pool: &[&str], n: usize) -> RawGraph {
    let mut names: Vec<String> = pool.iter().map(|s| s.to_string()).collect();
    names.shuffle(rng);
    names.truncate(n);
    names.sort();

    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    for i in 1..n {
        let parent = order[rng.gen_range(0..i)];
        let child = order[i];
        edges.insert((parent.min(child), parent.max(child)));
    }
    let p_extra: f64 = rng.gen_range(0.0..0.6);
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(p_extra) {
                edges.insert((a, b));
            }
        }
    }

    let edges = edges
        .into_iter()
        .map(|(a, b)| {
            let k = rng.gen_range(1..=3);
            let ws = (0..k)
                .map(|_| (rng.gen_range(1..=100) as f64) / 100.0)
                .collect();
            (names[a].clone(), names[b].clone(), ws)
        })
        .collect();

    let k = rng.gen_range(1..n);
    let mut shuffled = names.clone();
    shuffled.shuffle(rng);
    let akus = shuffled.into_iter().take(k).collect();
    RawGraph {
        nodes: names,
        edges,
        akus,
    }
}

pub fn pool(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("c{i}")).collect()
}

/// Hop distances by Floyd–Warshall over the raw adjacency.
pub fn all_pairs_hops(g: &RawGraph) -> Vec<Vec<u32>> {
    let n = g.nodes.len();
    let inf = u32::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for i in 0..n {
        d[i][i] = 0;
    }
    for (a, b, _) in &g.edges {
        let i = g.nodes.iter().position(|x| x == a).unwrap();
        let j = g.nodes.iter().position(|x| x == b).unwrap();
        d[i][j] = 1;
        d[j][i] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}
