use std::fmt::Write;

use super::{Projection, QueryCandidate};

/// Renders a candidate as SPARQL text.
///
/// Prefix declarations are regenerated from `q.prefixes`; terms are always
/// written as full IRIs so the output does not depend on which prefixes are
/// declared. Aggregates go back into the `SELECT` clause, `FILTER`s into the
/// pattern block and solution modifiers after it, each verbatim.
pub fn serialize(q: &QueryCandidate) -> String {
    let mut out = String::new();
    for (prefix, iri) in &q.prefixes {
        let _ = writeln!(out, "PREFIX {prefix}: <{iri}>");
    }
    out.push_str("SELECT ");
    if q.distinct {
        out.push_str("DISTINCT ");
    }
    match &q.projection {
        Projection::All => out.push('*'),
        Projection::Vars(vars) => {
            let mut items: Vec<String> = vars.iter().map(|v| format!("?{v}")).collect();
            items.extend(
                q.modifiers
                    .iter()
                    .filter(|m| m.kind.in_select())
                    .map(|m| m.text.clone()),
            );
            out.push_str(&items.join(" "));
        }
    }
    out.push_str(" WHERE {\n");
    for p in &q.patterns {
        let _ = writeln!(out, "  {} {} {} .", p.subject, p.predicate, p.object);
    }
    for m in q.modifiers.iter().filter(|m| m.kind.in_body()) {
        let _ = writeln!(out, "  {}", m.text);
    }
    out.push('}');
    for m in q
        .modifiers
        .iter()
        .filter(|m| !m.kind.in_select() && !m.kind.in_body())
    {
        out.push(' ');
        out.push_str(&m.text);
    }
    out
}
