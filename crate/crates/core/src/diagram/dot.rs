use std::fmt::Write;

use crate::error::Result;

use super::graph::{Source, Target};
use super::{DiagramTerm, ObjectType};

/// Graphviz rendering: one box per generator, boundary positions as point
/// anchors pinned to the first and last rank. Red wires are drawn red and
/// ◀ wires point backwards.
pub fn render_dot(t: &DiagramTerm) -> Result<String> {
    let g = t.to_port_graph()?;
    let mut out = String::new();
    out.push_str("digraph diagram {\n  rankdir=LR;\n  node [shape=box, fontname=\"monospace\"];\n");
    out.push_str("  { rank=source;");
    for k in 0..g.dom.len() {
        write!(out, " in{k} [shape=point];").unwrap();
    }
    out.push_str(" }\n  { rank=sink;");
    for k in 0..g.cod.len() {
        write!(out, " out{k} [shape=point];").unwrap();
    }
    out.push_str(" }\n");
    for (&id, l) in &g.nodes {
        writeln!(out, "  n{id} [label=\"{l}\"];").unwrap();
    }
    for w in g.wires.values() {
        let from = match w.from {
            Source::Input(k) => format!("in{k}"),
            Source::Port(n, _) => format!("n{n}"),
        };
        let to = match w.to {
            Target::Output(k) => format!("out{k}"),
            Target::Port(n, _) => format!("n{n}"),
        };
        let attrs = match w.ty {
            ObjectType::Red => "color=red",
            ObjectType::Right => "color=black",
            ObjectType::Left => "color=black, dir=back",
        };
        writeln!(out, "  {from} -> {to} [{attrs}];").unwrap();
    }
    out.push_str("}\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::GeneratorLabel;

    #[test]
    fn identity_and_copy() {
        let id = render_dot(&DiagramTerm::id(&[ObjectType::Right])).unwrap();
        assert_eq!(id.matches("shape=point").count(), 2);
        assert_eq!(id.matches(" -> ").count(), 1);
        let copy = DiagramTerm::Gen(GeneratorLabel::BlackCopy);
        let text = render_dot(&copy).unwrap();
        assert_eq!(text.matches("label=").count(), 1);
        assert_eq!(text.matches(" -> ").count(), 3);
        assert_eq!(text, render_dot(&copy).unwrap());
    }
}
