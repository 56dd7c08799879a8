use std::collections::BTreeSet;

use crate::model::Limid;

/// Simple undirected graph over `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UndirectedGraph {
    adj: Vec<BTreeSet<usize>>,
}

impl UndirectedGraph {
    pub fn new(n: usize) -> Self {
        UndirectedGraph {
            adj: vec![BTreeSet::new(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        if a != b {
            self.adj[a].insert(b);
            self.adj[b].insert(a);
        }
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].contains(&b)
    }

    pub fn neighbours(&self, v: usize) -> &BTreeSet<usize> {
        &self.adj[v]
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (a, nb) in self.adj.iter().enumerate() {
            for &b in nb.range(a + 1..) {
                out.push((a, b));
            }
        }
        out
    }

    pub fn num_edges(&self) -> usize {
        self.adj.iter().map(BTreeSet::len).sum::<usize>() / 2
    }

    pub fn is_supergraph_of(&self, other: &UndirectedGraph) -> bool {
        self.len() == other.len() && other.edges().into_iter().all(|(a, b)| self.has_edge(a, b))
    }
}

/// Moral graph over the variables: every arc made undirected, the parents
/// of every node (value nodes included) pairwise connected, value nodes
/// themselves dropped.
pub fn moralize(limid: &Limid) -> UndirectedGraph {
    let mut g = UndirectedGraph::new(limid.num_vars());
    let marry = |g: &mut UndirectedGraph, pa: &[usize]| {
        for (i, &a) in pa.iter().enumerate() {
            for &b in &pa[i + 1..] {
                g.add_edge(a, b);
            }
        }
    };
    for (v, node) in limid.nodes().iter().enumerate() {
        let pa: Vec<usize> = node.parents.iter().map(|p| p.0).collect();
        for &p in &pa {
            g.add_edge(v, p);
        }
        marry(&mut g, &pa);
    }
    for u in limid.values() {
        let pa: Vec<usize> = u.parents.iter().map(|p| p.0).collect();
        marry(&mut g, &pa);
    }
    g
}

/// Min-fill triangulation, ties to the smaller vertex. Returns the filled
/// graph and its elimination order (a perfect elimination order of it).
pub fn triangulate(g: &UndirectedGraph) -> (UndirectedGraph, Vec<usize>) {
    let n = g.len();
    let mut filled = g.clone();
    let mut work = g.clone();
    let mut alive = vec![true; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let mut best: Option<(usize, usize)> = None;
        for v in (0..n).filter(|&v| alive[v]) {
            let nb: Vec<usize> = work.neighbours(v).iter().copied().collect();
            let mut fill = 0;
            for (i, &a) in nb.iter().enumerate() {
                for &b in &nb[i + 1..] {
                    if !work.has_edge(a, b) {
                        fill += 1;
                    }
                }
            }
            if best.is_none_or(|(f, _)| fill < f) {
                best = Some((fill, v));
            }
        }
        let (_, v) = best.expect("a live vertex remains");
        let nb: Vec<usize> = work.neighbours(v).iter().copied().collect();
        for (i, &a) in nb.iter().enumerate() {
            for &b in &nb[i + 1..] {
                work.add_edge(a, b);
                filled.add_edge(a, b);
            }
        }
        for &a in &nb {
            work.adj[a].remove(&v);
        }
        work.adj[v].clear();
        alive[v] = false;
        order.push(v);
    }
    (filled, order)
}
