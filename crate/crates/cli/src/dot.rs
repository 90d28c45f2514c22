//! Deterministic Graphviz output.

use std::collections::BTreeSet;
use std::fmt::Write;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// `digraph G { … }` with nodes and edges sorted; the empty graph is
/// `digraph G { }`.
pub fn render(
    nodes: impl IntoIterator<Item = String>,
    edges: impl IntoIterator<Item = (String, String)>,
) -> String {
    let nodes: BTreeSet<String> = nodes.into_iter().collect();
    let edges: BTreeSet<(String, String)> = edges.into_iter().collect();
    if nodes.is_empty() && edges.is_empty() {
        return "digraph G { }\n".to_string();
    }
    let mut out = String::from("digraph G {\n");
    for n in &nodes {
        writeln!(out, "  {};", quote(n)).unwrap();
    }
    for (a, b) in &edges {
        writeln!(out, "  {} -> {};", quote(a), quote(b)).unwrap();
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_and_empty() {
        let s = |x: &str| x.to_string();
        assert_eq!(
            render([s("b"), s("a")], [(s("a"), s("b"))]),
            "digraph G {\n  \"a\";\n  \"b\";\n  \"a\" -> \"b\";\n}\n"
        );
        assert_eq!(render(Vec::new(), Vec::new()), "digraph G { }\n");
        assert_eq!(quote("x\"y"), "\"x\\\"y\"");
    }
}
