//! `application/sparql-results+json` encoding.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{KgError, ResultSet};
use crate::sparql::{Binding, Term};

#[derive(Serialize, Deserialize)]
struct Document {
    head: Head,
    results: Results,
}

#[derive(Serialize, Deserialize)]
struct Head {
    #[serde(default)]
    vars: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct Results {
    bindings: Vec<BTreeMap<String, JsonTerm>>,
}

#[derive(Serialize, Deserialize)]
struct JsonTerm {
    #[serde(rename = "type")]
    kind: String,
    value: String,
    #[serde(rename = "xml:lang", default, skip_serializing_if = "Option::is_none")]
    lang: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    datatype: Option<String>,
}

/// Parses a SPARQL JSON results document. Rows containing blank nodes are
/// skipped (with a warning) since they cannot be grounded or labeled.
pub fn parse_results_json(bytes: &[u8]) -> Result<ResultSet, KgError> {
    let doc: Document =
        serde_json::from_slice(bytes).map_err(|e| KgError::MalformedResponse(e.to_string()))?;
    let mut rows = Vec::with_capacity(doc.results.bindings.len());
    let mut skipped = 0usize;
    'rows: for raw in doc.results.bindings {
        let mut row = Binding::new();
        for (var, t) in raw {
            if !doc.head.vars.contains(&var) {
                return Err(KgError::MalformedResponse(format!(
                    "binding for undeclared variable {var}"
                )));
            }
            let term = match t.kind.as_str() {
                "uri" => Term::iri(t.value),
                "literal" | "typed-literal" => Term::Literal {
                    value: t.value,
                    lang: t.lang,
                    datatype: t.datatype,
                },
                "bnode" => {
                    skipped += 1;
                    continue 'rows;
                }
                other => {
                    return Err(KgError::MalformedResponse(format!("unknown term type {other}")))
                }
            };
            row.insert(var, term);
        }
        rows.push(row);
    }
    if skipped > 0 {
        log::warn!("skipped {skipped} result rows containing blank nodes");
    }
    Ok(ResultSet::new(doc.head.vars, rows))
}

pub fn results_to_json(rs: &ResultSet) -> String {
    let bindings = rs
        .rows
        .iter()
        .map(|row| {
            row.iter()
                .map(|(var, term)| {
                    let t = match term {
                        Term::Iri { value } => JsonTerm {
                            kind: "uri".into(),
                            value: value.clone(),
                            lang: None,
                            datatype: None,
                        },
                        Term::Literal {
                            value,
                            lang,
                            datatype,
                        } => JsonTerm {
                            kind: "literal".into(),
                            value: value.clone(),
                            lang: lang.clone(),
                            datatype: datatype.clone(),
                        },
                        Term::Variable { .. } => unreachable!("bindings never hold variables"),
                    };
                    (var.to_string(), t)
                })
                .collect()
        })
        .collect();
    let doc = Document {
        head: Head {
            vars: rs.variables.clone(),
        },
        results: Results { bindings },
    };
    serde_json::to_string(&doc).expect("result set serializes")
}
