use std::fmt::Write as _;

use crate::compile::graph::UndirectedGraph;
use crate::error::{Error, Result};
use crate::model::{Limid, VarId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JtEdge {
    pub a: usize,
    pub b: usize,
    pub separator: Vec<VarId>,
}

/// Functions whose domain the clique hosts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CliqueAssignment {
    pub chance: Vec<VarId>,
    pub decisions: Vec<VarId>,
    pub values: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JunctionTree {
    cardinalities: Vec<usize>,
    pub cliques: Vec<Vec<VarId>>,
    pub edges: Vec<JtEdge>,
    pub assignments: Vec<CliqueAssignment>,
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl JunctionTree {
    /// Tree from explicit cliques and edges; separators are computed.
    pub fn from_parts(
        cardinalities: Vec<usize>,
        cliques: Vec<Vec<VarId>>,
        edges: &[(usize, usize)],
    ) -> Self {
        let mut adjacency = vec![Vec::new(); cliques.len()];
        let edges: Vec<JtEdge> = edges
            .iter()
            .enumerate()
            .map(|(e, &(a, b))| {
                adjacency[a].push((b, e));
                adjacency[b].push((a, e));
                let separator = cliques[a]
                    .iter()
                    .copied()
                    .filter(|v| cliques[b].contains(v))
                    .collect();
                JtEdge { a, b, separator }
            })
            .collect();
        for adj in &mut adjacency {
            adj.sort_unstable();
        }
        let assignments = vec![CliqueAssignment::default(); cliques.len()];
        JunctionTree {
            cardinalities,
            cliques,
            edges,
            assignments,
            adjacency,
        }
    }

    pub fn len(&self) -> usize {
        self.cliques.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cliques.is_empty()
    }

    pub fn cardinality(&self, v: VarId) -> usize {
        self.cardinalities[v.0]
    }

    pub fn cards_of(&self, vars: &[VarId]) -> Vec<usize> {
        vars.iter().map(|&v| self.cardinality(v)).collect()
    }

    pub fn clique_size(&self, c: usize) -> usize {
        self.cards_of(&self.cliques[c]).iter().product()
    }

    /// Total number of cells over all cliques.
    pub fn total_size(&self) -> usize {
        (0..self.len()).map(|c| self.clique_size(c)).sum()
    }

    /// (neighbour, edge index) pairs, ordered by neighbour.
    pub fn neighbours(&self, c: usize) -> &[(usize, usize)] {
        &self.adjacency[c]
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.adjacency[a]
            .iter()
            .find(|(n, _)| *n == b)
            .map(|&(_, e)| e)
    }

    pub fn separator(&self, a: usize, b: usize) -> &[VarId] {
        let e = self.edge_between(a, b).expect("adjacent cliques");
        &self.edges[e].separator
    }

    /// Slot of the directed message `from -> to`, in `0..2 * edges`.
    pub fn direction(&self, from: usize, to: usize) -> usize {
        let e = self.edge_between(from, to).expect("adjacent cliques");
        2 * e + usize::from(self.edges[e].a != from)
    }

    pub fn num_directions(&self) -> usize {
        2 * self.edges.len()
    }

    /// Lowest-indexed clique containing every variable of `vars`.
    pub fn home_of(&self, vars: &[VarId]) -> Option<usize> {
        self.cliques
            .iter()
            .position(|c| vars.iter().all(|v| c.contains(v)))
    }

    /// Cliques on the path from `from` to `to`, both ends included.
    pub fn path(&self, from: usize, to: usize) -> Vec<usize> {
        let mut prev = vec![usize::MAX; self.len()];
        let mut stack = vec![from];
        prev[from] = from;
        while let Some(c) = stack.pop() {
            for &(n, _) in self.neighbours(c) {
                if prev[n] == usize::MAX {
                    prev[n] = c;
                    stack.push(n);
                }
            }
        }
        let mut path = vec![to];
        let mut c = to;
        while c != from {
            c = prev[c];
            path.push(c);
        }
        path.reverse();
        path
    }

    /// Whether `c` lies on the `from` side of the edge `from -- to`.
    pub fn on_side_of(&self, c: usize, from: usize, to: usize) -> bool {
        let p = self.path(c, to);
        p.len() >= 2 && p[p.len() - 2] == from
    }

    pub fn is_tree(&self) -> bool {
        if self.is_empty() {
            return true;
        }
        if self.edges.len() + 1 != self.len() {
            return false;
        }
        let mut seen = vec![false; self.len()];
        let mut stack = vec![0];
        while let Some(c) = stack.pop() {
            if !std::mem::replace(&mut seen[c], true) {
                stack.extend(self.neighbours(c).iter().map(|&(n, _)| n));
            }
        }
        seen.iter().all(|&s| s)
    }

    /// Every pair of cliques shares only variables present along their path.
    pub fn has_running_intersection(&self) -> bool {
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                let common: Vec<VarId> = self.cliques[i]
                    .iter()
                    .copied()
                    .filter(|v| self.cliques[j].contains(v))
                    .collect();
                if !self
                    .path(i, j)
                    .iter()
                    .all(|&c| common.iter().all(|v| self.cliques[c].contains(v)))
                {
                    return false;
                }
            }
        }
        true
    }

    /// Deterministic listing of cliques, separators and assignments.
    pub fn dump(&self, limid: &Limid) -> String {
        let names = |vs: &[VarId]| {
            vs.iter()
                .map(|&v| limid.name(v).to_string())
                .collect::<Vec<_>>()
                .join(", ")
        };
        let mut s = String::new();
        for (c, vars) in self.cliques.iter().enumerate() {
            let a = &self.assignments[c];
            let values: Vec<&str> = a
                .values
                .iter()
                .map(|&k| limid.values()[k].name.as_str())
                .collect();
            let _ = writeln!(
                s,
                "clique {c}: {{{}}} size={} chance=[{}] decisions=[{}] values=[{}]",
                names(vars),
                self.clique_size(c),
                names(&a.chance),
                names(&a.decisions),
                values.join(", ")
            );
        }
        for (e, edge) in self.edges.iter().enumerate() {
            let _ = writeln!(
                s,
                "edge {e}: {} -- {} separator {{{}}}",
                edge.a,
                edge.b,
                names(&edge.separator)
            );
        }
        s
    }
}

/// Junction tree of a chordal graph given a perfect elimination order:
/// maximal cliques in elimination order, joined by a maximum-weight spanning
/// tree on separator size (ties to the smaller clique pair).
pub fn build_junction_tree(
    chordal: &UndirectedGraph,
    order: &[usize],
    cardinalities: &[usize],
) -> Result<JunctionTree> {
    let n = chordal.len();
    let mut position = vec![usize::MAX; n];
    for (i, &v) in order.iter().enumerate() {
        position[v] = i;
    }
    let mut candidates: Vec<Vec<usize>> = Vec::new();
    for &v in order {
        let later: Vec<usize> = chordal
            .neighbours(v)
            .iter()
            .copied()
            .filter(|&w| position[w] > position[v])
            .collect();
        for (i, &a) in later.iter().enumerate() {
            for &b in &later[i + 1..] {
                if !chordal.has_edge(a, b) {
                    return Err(Error::NotChordal(v));
                }
            }
        }
        let mut c = later;
        c.push(v);
        c.sort_unstable();
        candidates.push(c);
    }
    let subset = |a: &[usize], b: &[usize]| a.iter().all(|x| b.contains(x));
    let mut cliques: Vec<Vec<VarId>> = Vec::new();
    for (i, c) in candidates.iter().enumerate() {
        let dominated = candidates
            .iter()
            .enumerate()
            .any(|(j, o)| j != i && o.len() > c.len() && subset(c, o));
        if !dominated {
            cliques.push(c.iter().map(|&v| VarId(v)).collect());
        }
    }
    if cliques.is_empty() {
        cliques.push(Vec::new());
    }

    let k = cliques.len();
    let mut weighted = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            let w = cliques[i].iter().filter(|v| cliques[j].contains(v)).count();
            weighted.push((w, i, j));
        }
    }
    weighted.sort_by(|x, y| y.0.cmp(&x.0).then((x.1, x.2).cmp(&(y.1, y.2))));
    let mut root: Vec<usize> = (0..k).collect();
    fn find(root: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while root[r] != r {
            r = root[r];
        }
        root[x] = r;
        r
    }
    let mut edges = Vec::new();
    for (_, i, j) in weighted {
        let (ri, rj) = (find(&mut root, i), find(&mut root, j));
        if ri != rj {
            root[ri] = rj;
            edges.push((i, j));
        }
    }
    Ok(JunctionTree::from_parts(
        cardinalities.to_vec(),
        cliques,
        &edges,
    ))
}

/// Hosts each cpt, policy family and utility in the lowest-indexed clique
/// containing its domain.
pub fn assign_functions(limid: &Limid, mut jt: JunctionTree) -> Result<JunctionTree> {
    let mut assignments = vec![CliqueAssignment::default(); jt.len()];
    for v in (0..limid.num_vars()).map(VarId) {
        let fa = limid.family(v);
        let home = jt
            .home_of(&fa)
            .ok_or_else(|| Error::NoQualifyingClique(limid.name(v).to_string()))?;
        if limid.is_decision(v) {
            assignments[home].decisions.push(v);
        } else {
            assignments[home].chance.push(v);
        }
    }
    for (k, u) in limid.values().iter().enumerate() {
        let home = jt
            .home_of(&u.parents)
            .ok_or_else(|| Error::NoQualifyingClique(u.name.clone()))?;
        assignments[home].values.push(k);
    }
    jt.assignments = assignments;
    Ok(jt)
}
