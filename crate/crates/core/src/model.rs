//! Limited memory influence diagrams.
//!
//! Chance and decision nodes are the variables `0..N`. Value nodes live in a
//! separate list; when a parent list refers to id `N + k` it names value node
//! `k`, which [`Limid::validate`] reports as `value-node-has-child`.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::table::Table;

const NORMALIZATION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub id: VarId,
    pub name: String,
    pub cardinality: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeKind {
    /// Conditional probability table over (parents..., node).
    Chance {
        cpt: Table,
    },
    Decision,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub kind: NodeKind,
    pub parents: Vec<VarId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValueNode {
    pub name: String,
    pub parents: Vec<VarId>,
    /// Local utility over the parents in declared order.
    pub utility: Table,
}

/// What a diagnostic is about.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeRef {
    Var(VarId),
    Value(usize),
    Diagram,
}

impl fmt::Display for NodeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeRef::Var(v) => write!(f, "node {}", v.0),
            NodeRef::Value(k) => write!(f, "value {k}"),
            NodeRef::Diagram => write!(f, "diagram"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    IdNotDense,
    CardinalityZero,
    UnknownParent,
    DuplicateParent,
    ValueNodeHasChild,
    Cycle,
    CptShape,
    CptNegative,
    CptNotNormalized,
    UtilityShape,
    NonFinite,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::IdNotDense => "id-not-dense",
            Rule::CardinalityZero => "cardinality-zero",
            Rule::UnknownParent => "unknown-parent",
            Rule::DuplicateParent => "duplicate-parent",
            Rule::ValueNodeHasChild => "value-node-has-child",
            Rule::Cycle => "cycle",
            Rule::CptShape => "cpt-shape",
            Rule::CptNegative => "cpt-negative",
            Rule::CptNotNormalized => "cpt-not-normalized",
            Rule::UtilityShape => "utility-shape",
            Rule::NonFinite => "non-finite",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub node: NodeRef,
    pub rule: Rule,
    pub detail: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.node, self.rule.as_str())?;
        if !self.detail.is_empty() {
            write!(f, " ({})", self.detail)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Limid {
    variables: Vec<Variable>,
    nodes: Vec<Node>,
    values: Vec<ValueNode>,
    decisions: Vec<VarId>,
}

impl Limid {
    /// Assembles a diagram without checking it. Decisions are taken in
    /// variable order unless `decision_order` says otherwise.
    pub fn from_parts(
        variables: Vec<Variable>,
        nodes: Vec<Node>,
        values: Vec<ValueNode>,
        decision_order: Option<Vec<VarId>>,
    ) -> Self {
        let decisions = decision_order.unwrap_or_else(|| {
            nodes
                .iter()
                .enumerate()
                .filter(|(_, n)| n.kind == NodeKind::Decision)
                .map(|(i, _)| VarId(i))
                .collect()
        });
        Limid {
            variables,
            nodes,
            values,
            decisions,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, v: VarId) -> &Variable {
        &self.variables[v.0]
    }

    pub fn cardinality(&self, v: VarId) -> usize {
        self.variables[v.0].cardinality
    }

    pub fn cardinalities(&self) -> Vec<usize> {
        self.variables.iter().map(|v| v.cardinality).collect()
    }

    pub fn cards_of(&self, vars: &[VarId]) -> Vec<usize> {
        vars.iter().map(|&v| self.cardinality(v)).collect()
    }

    pub fn name(&self, v: VarId) -> &str {
        &self.variables[v.0].name
    }

    pub fn node(&self, v: VarId) -> &Node {
        &self.nodes[v.0]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn parents(&self, v: VarId) -> &[VarId] {
        &self.nodes[v.0].parents
    }

    /// Parents followed by the node itself.
    pub fn family(&self, v: VarId) -> Vec<VarId> {
        let mut fa = self.parents(v).to_vec();
        fa.push(v);
        fa
    }

    pub fn is_decision(&self, v: VarId) -> bool {
        matches!(self.nodes[v.0].kind, NodeKind::Decision)
    }

    pub fn cpt(&self, v: VarId) -> Option<&Table> {
        match &self.nodes[v.0].kind {
            NodeKind::Chance { cpt } => Some(cpt),
            NodeKind::Decision => None,
        }
    }

    pub fn chance_nodes(&self) -> impl Iterator<Item = VarId> + '_ {
        (0..self.nodes.len())
            .map(VarId)
            .filter(|&v| !self.is_decision(v))
    }

    /// Decisions in temporal order `d_1, ..., d_k`.
    pub fn decisions(&self) -> &[VarId] {
        &self.decisions
    }

    pub fn values(&self) -> &[ValueNode] {
        &self.values
    }

    /// Copy with the informational parents of `d` replaced.
    pub fn with_decision_parents(&self, d: VarId, parents: Vec<VarId>) -> Limid {
        let mut out = self.clone();
        out.nodes[d.0].parents = parents;
        out
    }

    /// Parent lists of all nodes in one id space: variables `0..N`, value
    /// nodes `N..N+U`.
    pub fn dag_parents(&self) -> Vec<Vec<usize>> {
        let mut pa: Vec<Vec<usize>> = self
            .nodes
            .iter()
            .map(|n| n.parents.iter().map(|p| p.0).collect())
            .collect();
        pa.extend(
            self.values
                .iter()
                .map(|u| u.parents.iter().map(|p| p.0).collect()),
        );
        pa
    }

    /// Structural and numeric well-formedness; empty when the diagram is valid.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let n = self.variables.len();
        let mut diag = |node, rule, detail: String| out.push(Diagnostic { node, rule, detail });

        for (i, var) in self.variables.iter().enumerate() {
            if var.id.0 != i {
                diag(
                    NodeRef::Var(VarId(i)),
                    Rule::IdNotDense,
                    format!("id {} at position {i}", var.id.0),
                );
            }
            if var.cardinality == 0 {
                diag(NodeRef::Var(VarId(i)), Rule::CardinalityZero, String::new());
            }
        }
        if self.nodes.len() != n {
            diag(
                NodeRef::Diagram,
                Rule::IdNotDense,
                format!("{} variables but {} nodes", n, self.nodes.len()),
            );
            return out;
        }

        let check_parents =
            |who: NodeRef, parents: &[VarId], diag: &mut dyn FnMut(NodeRef, Rule, String)| {
                let mut ok = true;
                for (i, p) in parents.iter().enumerate() {
                    if p.0 >= n && p.0 < n + self.values.len() {
                        diag(
                            NodeRef::Value(p.0 - n),
                            Rule::ValueNodeHasChild,
                            format!("child {who}"),
                        );
                        ok = false;
                    } else if p.0 >= n {
                        diag(who, Rule::UnknownParent, format!("parent id {}", p.0));
                        ok = false;
                    }
                    if parents[..i].contains(p) {
                        diag(who, Rule::DuplicateParent, format!("parent id {}", p.0));
                        ok = false;
                    }
                }
                ok
            };

        let mut structural_ok = true;
        for (i, node) in self.nodes.iter().enumerate() {
            let who = NodeRef::Var(VarId(i));
            if !check_parents(who, &node.parents, &mut diag) {
                structural_ok = false;
                continue;
            }
            if let NodeKind::Chance { cpt } = &node.kind {
                let fa = self.family(VarId(i));
                if cpt.vars() != fa.as_slice() || cpt.cards() != self.cards_of(&fa).as_slice() {
                    diag(
                        who,
                        Rule::CptShape,
                        "cpt domain must be (parents..., node)".into(),
                    );
                    continue;
                }
                if cpt.values().iter().any(|x| !x.is_finite()) {
                    diag(who, Rule::NonFinite, String::new());
                    continue;
                }
                if cpt.values().iter().any(|&x| x < 0.0) {
                    diag(who, Rule::CptNegative, String::new());
                }
                let k = self.variables[i].cardinality.max(1);
                for (row, slice) in cpt.values().chunks(k).enumerate() {
                    let s: f64 = slice.iter().sum();
                    if (s - 1.0).abs() > NORMALIZATION_TOLERANCE {
                        diag(
                            who,
                            Rule::CptNotNormalized,
                            format!("parent configuration {row} sums to {s}"),
                        );
                        break;
                    }
                }
            }
        }
        for (k, u) in self.values.iter().enumerate() {
            let who = NodeRef::Value(k);
            if !check_parents(who, &u.parents, &mut diag) {
                structural_ok = false;
                continue;
            }
            if u.utility.vars() != u.parents.as_slice()
                || u.utility.cards() != self.cards_of(&u.parents).as_slice()
            {
                diag(
                    who,
                    Rule::UtilityShape,
                    "utility domain must be the parents".into(),
                );
            } else if u.utility.values().iter().any(|x| !x.is_finite()) {
                diag(who, Rule::NonFinite, String::new());
            }
        }
        if structural_ok {
            if let Some(v) = find_cycle(&self.nodes) {
                diag(NodeRef::Var(v), Rule::Cycle, String::new());
            }
        }
        let mut seen = vec![false; n];
        for &d in &self.decisions {
            if d.0 >= n || !matches!(self.nodes[d.0].kind, NodeKind::Decision) || seen[d.0] {
                diag(
                    NodeRef::Var(d),
                    Rule::IdNotDense,
                    "bad decision order entry".into(),
                );
            } else {
                seen[d.0] = true;
            }
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if node.kind == NodeKind::Decision && !seen[i] {
                diag(
                    NodeRef::Var(VarId(i)),
                    Rule::IdNotDense,
                    "decision missing from order".into(),
                );
            }
        }
        out
    }

    pub fn uniform_policy(&self, d: VarId) -> Result<Policy> {
        if d.0 >= self.num_vars() || !self.is_decision(d) {
            return Err(Error::UnknownDecision(d));
        }
        let fa = self.family(d);
        let cards = self.cards_of(&fa);
        let k = self.cardinality(d) as f64;
        Ok(Policy {
            decision: d,
            table: Table::filled(fa, cards, 1.0 / k),
        })
    }

    /// Children of each variable among variables (value nodes excluded).
    pub fn children(&self) -> Vec<Vec<VarId>> {
        let mut ch = vec![Vec::new(); self.num_vars()];
        for (i, node) in self.nodes.iter().enumerate() {
            for p in &node.parents {
                ch[p.0].push(VarId(i));
            }
        }
        ch
    }

    /// Variables in a topological order (parents first, ties by id).
    pub fn topological_order(&self) -> Vec<VarId> {
        let n = self.num_vars();
        let mut indeg: Vec<usize> = self.nodes.iter().map(|x| x.parents.len()).collect();
        let children = self.children();
        let mut ready: std::collections::BTreeSet<usize> =
            (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(&i) = ready.iter().next() {
            ready.remove(&i);
            order.push(VarId(i));
            for c in &children[i] {
                indeg[c.0] -= 1;
                if indeg[c.0] == 0 {
                    ready.insert(c.0);
                }
            }
        }
        order
    }
}

fn find_cycle(nodes: &[Node]) -> Option<VarId> {
    // 0 = unvisited, 1 = on stack, 2 = done
    fn visit(v: usize, nodes: &[Node], state: &mut [u8]) -> Option<usize> {
        state[v] = 1;
        for p in &nodes[v].parents {
            match state[p.0] {
                1 => return Some(p.0),
                0 => {
                    if let Some(c) = visit(p.0, nodes, state) {
                        return Some(c);
                    }
                }
                _ => {}
            }
        }
        state[v] = 2;
        None
    }
    let mut state = vec![0u8; nodes.len()];
    (0..nodes.len()).find_map(|v| {
        if state[v] == 0 {
            visit(v, nodes, &mut state).map(VarId)
        } else {
            None
        }
    })
}

/// Conditional distribution of a decision given its informational parents,
/// stored over `(parents..., decision)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    pub decision: VarId,
    pub table: Table,
}

impl Policy {
    /// Builds a 0/1 policy from one chosen action per parent configuration.
    pub fn degenerate(
        decision: VarId,
        parents: &[VarId],
        cards: &[usize],
        actions: &[usize],
    ) -> Policy {
        let k = *cards.last().expect("family includes the decision");
        let mut vars = parents.to_vec();
        vars.push(decision);
        let mut values = vec![0.0; actions.len() * k];
        for (row, &a) in actions.iter().enumerate() {
            values[row * k + a] = 1.0;
        }
        Policy {
            decision,
            table: Table::new(vars, cards.to_vec(), values).expect("degenerate policy shape"),
        }
    }

    pub fn parents(&self) -> &[VarId] {
        let vars = self.table.vars();
        &vars[..vars.len() - 1]
    }

    /// Chosen action per parent configuration, if the policy is degenerate.
    pub fn actions(&self) -> Option<Vec<usize>> {
        let k = *self.table.cards().last()?;
        self.table
            .values()
            .chunks(k)
            .map(|row| {
                let ones = row.iter().filter(|&&x| x == 1.0).count();
                let zeros = row.iter().filter(|&&x| x == 0.0).count();
                (ones == 1 && zeros == k - 1).then(|| row.iter().position(|&x| x == 1.0).unwrap())
            })
            .collect()
    }

    pub fn is_distribution(&self) -> bool {
        let k = match self.table.cards().last() {
            Some(&k) => k,
            None => return false,
        };
        self.table.vars().last() == Some(&self.decision)
            && self.table.values().chunks(k).all(|row| {
                row.iter().all(|&x| x >= 0.0)
                    && (row.iter().sum::<f64>() - 1.0).abs() <= NORMALIZATION_TOLERANCE
            })
    }
}

/// One policy per decision.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Strategy {
    pub policies: BTreeMap<VarId, Policy>,
}

impl Strategy {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn uniform(limid: &Limid) -> Strategy {
        let mut s = Strategy::new();
        for &d in limid.decisions() {
            s.insert(limid.uniform_policy(d).expect("declared decision"));
        }
        s
    }

    pub fn insert(&mut self, policy: Policy) -> Option<Policy> {
        self.policies.insert(policy.decision, policy)
    }

    pub fn get(&self, d: VarId) -> Option<&Policy> {
        self.policies.get(&d)
    }

    pub fn without(&self, d: VarId) -> Strategy {
        let mut s = self.clone();
        s.policies.remove(&d);
        s
    }

    pub fn covers(&self, limid: &Limid) -> bool {
        self.policies.len() == limid.decisions().len()
            && limid
                .decisions()
                .iter()
                .all(|d| self.policies.contains_key(d))
    }
}

/// Incremental construction of diagrams, mostly for tests and the generator.
#[derive(Debug, Default)]
pub struct LimidBuilder {
    variables: Vec<Variable>,
    nodes: Vec<Node>,
    values: Vec<ValueNode>,
}

impl LimidBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn push_var(
        &mut self,
        name: &str,
        cardinality: usize,
        kind: NodeKind,
        parents: &[VarId],
    ) -> VarId {
        let id = VarId(self.variables.len());
        self.variables.push(Variable {
            id,
            name: name.to_string(),
            cardinality,
        });
        self.nodes.push(Node {
            kind,
            parents: parents.to_vec(),
        });
        id
    }

    fn cards(&self, vars: &[VarId]) -> Vec<usize> {
        vars.iter()
            .map(|v| self.variables.get(v.0).map_or(1, |x| x.cardinality))
            .collect()
    }

    /// Adds a chance node; `cpt` is laid out over (parents..., node).
    pub fn chance(
        &mut self,
        name: &str,
        cardinality: usize,
        parents: &[VarId],
        cpt: Vec<f64>,
    ) -> VarId {
        let id = VarId(self.variables.len());
        let mut fa = parents.to_vec();
        fa.push(id);
        let mut cards = self.cards(parents);
        cards.push(cardinality);
        let table = Table::new(fa, cards, cpt).expect("cpt shape");
        self.push_var(name, cardinality, NodeKind::Chance { cpt: table }, parents)
    }

    pub fn decision(&mut self, name: &str, cardinality: usize, parents: &[VarId]) -> VarId {
        self.push_var(name, cardinality, NodeKind::Decision, parents)
    }

    pub fn value(&mut self, name: &str, parents: &[VarId], utility: Vec<f64>) -> usize {
        let cards = self.cards(parents);
        let table = Table::new(parents.to_vec(), cards, utility).expect("utility shape");
        self.values.push(ValueNode {
            name: name.to_string(),
            parents: parents.to_vec(),
            utility: table,
        });
        self.values.len() - 1
    }

    pub fn build_unchecked(self) -> Limid {
        Limid::from_parts(self.variables, self.nodes, self.values, None)
    }

    pub fn build(self) -> Result<Limid> {
        let limid = self.build_unchecked();
        let diags = limid.validate();
        if diags.is_empty() {
            Ok(limid)
        } else {
            Err(Error::Semantic(diags))
        }
    }
}
