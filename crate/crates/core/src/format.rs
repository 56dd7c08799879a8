//! Text file format for diagrams.
//!
//! ```json
//! {
//!   "format": "limid/1",
//!   "variables": [{ "id": 0, "name": "a", "cardinality": 2 }],
//!   "nodes": [{ "id": 0, "kind": "chance", "parents": [], "cpt": [0.5, 0.5] }],
//!   "values": [{ "name": "u", "parents": [0], "utility": [0.0, 10.0] }]
//! }
//! ```
//!
//! Tables are row-major with the last variable fastest; a cpt is laid out
//! over (parents..., node). Decision entries appear in temporal order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Diagnostic, Limid, Node, NodeKind, NodeRef, Rule, ValueNode, VarId, Variable};
use crate::table::Table;

pub const FORMAT_VERSION: &str = "limid/1";

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileLimid {
    format: String,
    variables: Vec<FileVariable>,
    nodes: Vec<FileNode>,
    #[serde(default)]
    values: Vec<FileValue>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileVariable {
    id: usize,
    name: String,
    cardinality: usize,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum FileNode {
    Chance {
        id: usize,
        parents: Vec<usize>,
        cpt: Vec<f64>,
    },
    Decision {
        id: usize,
        parents: Vec<usize>,
    },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileValue {
    name: String,
    parents: Vec<usize>,
    utility: Vec<f64>,
}

/// Parses and validates a diagram.
pub fn parse_limid(text: &str) -> Result<Limid> {
    let file: FileLimid = serde_json::from_str(text).map_err(|e| Error::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if file.format != FORMAT_VERSION {
        return Err(Error::Syntax {
            line: 1,
            column: 1,
            message: format!(
                "unsupported format {:?}, expected {FORMAT_VERSION:?}",
                file.format
            ),
        });
    }

    let mut diags = Vec::new();
    let n = file.variables.len();
    let variables: Vec<Variable> = file
        .variables
        .iter()
        .map(|v| Variable {
            id: VarId(v.id),
            name: v.name.clone(),
            cardinality: v.cardinality,
        })
        .collect();
    let card = |id: usize| {
        file.variables
            .iter()
            .find(|v| v.id == id)
            .map_or(1, |v| v.cardinality)
    };
    let table = |vars: Vec<VarId>, values: Vec<f64>| {
        let cards = vars.iter().map(|v| card(v.0)).collect();
        Table::new(vars, cards, values)
    };

    let mut slots: Vec<Option<Node>> = vec![None; n];
    let mut decisions = Vec::new();
    for node in file.nodes {
        let (id, parents) = match &node {
            FileNode::Chance { id, parents, .. } | FileNode::Decision { id, parents } => {
                (*id, parents.iter().map(|&p| VarId(p)).collect::<Vec<_>>())
            }
        };
        if id >= n {
            diags.push(Diagnostic {
                node: NodeRef::Var(VarId(id)),
                rule: Rule::IdNotDense,
                detail: "node has no variable entry".into(),
            });
            continue;
        }
        if slots[id].is_some() {
            diags.push(Diagnostic {
                node: NodeRef::Var(VarId(id)),
                rule: Rule::IdNotDense,
                detail: "duplicate node entry".into(),
            });
            continue;
        }
        let kind = match node {
            FileNode::Decision { .. } => {
                decisions.push(VarId(id));
                NodeKind::Decision
            }
            FileNode::Chance { cpt, .. } => {
                let mut fa = parents.clone();
                fa.push(VarId(id));
                match table(fa, cpt) {
                    Ok(cpt) => NodeKind::Chance { cpt },
                    Err(e) => {
                        diags.push(Diagnostic {
                            node: NodeRef::Var(VarId(id)),
                            rule: Rule::CptShape,
                            detail: e.to_string(),
                        });
                        continue;
                    }
                }
            }
        };
        slots[id] = Some(Node { kind, parents });
    }
    for (i, s) in slots.iter().enumerate() {
        if s.is_none() && !diags.iter().any(|d| d.node == NodeRef::Var(VarId(i))) {
            diags.push(Diagnostic {
                node: NodeRef::Var(VarId(i)),
                rule: Rule::IdNotDense,
                detail: "variable has no node entry".into(),
            });
        }
    }

    let mut values = Vec::new();
    for (k, v) in file.values.into_iter().enumerate() {
        let parents: Vec<VarId> = v.parents.iter().map(|&p| VarId(p)).collect();
        match table(parents.clone(), v.utility) {
            Ok(utility) => values.push(ValueNode {
                name: v.name,
                parents,
                utility,
            }),
            Err(e) => diags.push(Diagnostic {
                node: NodeRef::Value(k),
                rule: Rule::UtilityShape,
                detail: e.to_string(),
            }),
        }
    }
    if !diags.is_empty() {
        return Err(Error::Semantic(diags));
    }

    let nodes = slots
        .into_iter()
        .map(|s| s.expect("checked above"))
        .collect();
    let limid = Limid::from_parts(variables, nodes, values, Some(decisions));
    let diags = limid.validate();
    if diags.is_empty() {
        Ok(limid)
    } else {
        Err(Error::Semantic(diags))
    }
}

/// Canonical text of a diagram; `parse_limid` inverts it exactly.
pub fn serialize_limid(limid: &Limid) -> String {
    let variables = limid
        .variables()
        .iter()
        .map(|v| FileVariable {
            id: v.id.0,
            name: v.name.clone(),
            cardinality: v.cardinality,
        })
        .collect();
    // Decision slots are filled in temporal order so that re-parsing keeps it.
    let mut pending = limid.decisions().iter();
    let nodes = (0..limid.num_vars())
        .map(VarId)
        .map(|v| {
            let v = if limid.is_decision(v) {
                *pending.next().expect("every decision is ordered")
            } else {
                v
            };
            let parents = limid.parents(v).iter().map(|p| p.0).collect();
            match limid.cpt(v) {
                Some(cpt) => FileNode::Chance {
                    id: v.0,
                    parents,
                    cpt: cpt.values().to_vec(),
                },
                None => FileNode::Decision { id: v.0, parents },
            }
        })
        .collect();
    let values = limid
        .values()
        .iter()
        .map(|u| FileValue {
            name: u.name.clone(),
            parents: u.parents.iter().map(|p| p.0).collect(),
            utility: u.utility.values().to_vec(),
        })
        .collect();
    let file = FileLimid {
        format: FORMAT_VERSION.to_string(),
        variables,
        nodes,
        values,
    };
    let mut s = serde_json::to_string_pretty(&file).expect("diagram serializes");
    s.push('\n');
    s
}
