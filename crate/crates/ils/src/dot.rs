//! Graphviz DOT rendering of threads and product clusters.
//!
//! Nodes are labelled `<id>\n<label>`. AKUs get `peripheries=2`; edge pen
//! width is `1 + 4 * weight` with two decimals. Output order is sorted so
//! repeated exports are byte-identical.

use std::fmt::Write as _;

use ils_core::{Csd, PairVertex, ProductCluster};

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            _ => out.push(ch),
        }
    }
    out.push('"');
    out
}

fn pen_width(weight: f64) -> String {
    format!("{:.2}", 1.0 + 4.0 * weight)
}

fn node_line(out: &mut String, name: &str, label: &str, doubled: bool) {
    write!(out, "  {} [label={}", quote(name), quote(label)).unwrap();
    if doubled {
        out.push_str(", peripheries=2");
    }
    out.push_str("];\n");
}

pub fn csd_to_dot(csd: &Csd) -> String {
    let mut out = format!("graph {} {{\n  node [shape=ellipse];\n", quote(csd.id()));
    for c in csd.concepts() {
        node_line(
            &mut out,
            c.id.as_str(),
            &format!("{}\n{}", c.id, c.label),
            csd.is_aku(&c.id),
        );
    }
    for l in csd.links() {
        let (a, b) = l.endpoints();
        writeln!(
            out,
            "  {} -- {} [penwidth={}];",
            quote(a.as_str()),
            quote(b.as_str()),
            pen_width(l.affinity())
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}

fn vertex_name(v: &PairVertex) -> String {
    format!("{},{}", v.left, v.right)
}

/// A pair vertex is drawn doubled when either coordinate is an AKU of its
/// factor.
pub fn cluster_to_dot(cluster: &ProductCluster) -> String {
    let (l, r) = cluster.factor_ids();
    let mut out = format!(
        "graph {} {{\n  node [shape=ellipse];\n",
        quote(&format!("{l}x{r}"))
    );
    for v in cluster.vertices() {
        let label = format!(
            "{}\n{} / {}",
            vertex_name(v),
            cluster
                .left()
                .concept(&v.left)
                .map_or("", |c| c.label.as_str()),
            cluster
                .right()
                .concept(&v.right)
                .map_or("", |c| c.label.as_str()),
        );
        let doubled = cluster.left().is_aku(&v.left) || cluster.right().is_aku(&v.right);
        node_line(&mut out, &vertex_name(v), &label, doubled);
    }
    for ((a, b), w) in cluster.edges() {
        writeln!(
            out,
            "  {} -- {} [penwidth={}];",
            quote(&vertex_name(a)),
            quote(&vertex_name(b)),
            pen_width(*w)
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}
