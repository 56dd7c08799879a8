//! Requisite-arc reduction and the solubility test, both driven by
//! d-separation in the diagram (value nodes included as sinks).

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::model::{Limid, VarId};

/// Children lists for a parent-list DAG.
fn children_of(parents: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut ch = vec![Vec::new(); parents.len()];
    for (v, pa) in parents.iter().enumerate() {
        for &p in pa {
            ch[p].push(v);
        }
    }
    ch
}

fn ancestors(parents: &[Vec<usize>], seeds: impl IntoIterator<Item = usize>) -> Vec<bool> {
    let mut mark = vec![false; parents.len()];
    let mut stack: Vec<usize> = seeds.into_iter().collect();
    while let Some(v) = stack.pop() {
        if !mark[v] {
            mark[v] = true;
            stack.extend(parents[v].iter().copied());
        }
    }
    mark
}

/// Nodes reachable from `start` along arcs, excluding `start` itself.
pub fn descendants(parents: &[Vec<usize>], start: usize) -> Vec<bool> {
    let ch = children_of(parents);
    let mut mark = vec![false; parents.len()];
    let mut stack = ch[start].clone();
    while let Some(v) = stack.pop() {
        if !mark[v] {
            mark[v] = true;
            stack.extend(ch[v].iter().copied());
        }
    }
    mark
}

/// `xs ⊥ ys | zs` in the DAG given by parent lists, decided on the moral
/// graph of the smallest ancestral set containing all three sets.
pub fn d_separated(parents: &[Vec<usize>], xs: &[usize], ys: &[usize], zs: &[usize]) -> bool {
    let n = parents.len();
    let mut blocked = vec![false; n];
    for &z in zs {
        blocked[z] = true;
    }
    let xs: Vec<usize> = xs.iter().copied().filter(|&x| !blocked[x]).collect();
    let ys: Vec<usize> = ys.iter().copied().filter(|&y| !blocked[y]).collect();
    if xs.is_empty() || ys.is_empty() {
        return true;
    }
    let keep = ancestors(parents, xs.iter().chain(&ys).chain(zs).copied());
    let mut adj = vec![Vec::new(); n];
    for v in 0..n {
        if !keep[v] {
            continue;
        }
        let pa = &parents[v];
        for (i, &p) in pa.iter().enumerate() {
            adj[v].push(p);
            adj[p].push(v);
            for &q in &pa[i + 1..] {
                adj[p].push(q);
                adj[q].push(p);
            }
        }
    }
    let mut target = vec![false; n];
    for &y in &ys {
        target[y] = true;
    }
    let mut seen = vec![false; n];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for &x in &xs {
        seen[x] = true;
        queue.push_back(x);
    }
    while let Some(v) = queue.pop_front() {
        if target[v] {
            return false;
        }
        for &w in &adj[v] {
            if !seen[w] && !blocked[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    true
}

/// Value nodes (as DAG ids `N + k`) that descend from `v`.
fn value_descendants(limid: &Limid, dag: &[Vec<usize>], v: VarId) -> Vec<usize> {
    let n = limid.num_vars();
    let de = descendants(dag, v.0);
    (n..dag.len()).filter(|&u| de[u]).collect()
}

/// Removes non-requisite informational arcs: parent `n` of decision `d` is
/// dropped when it is d-separated from the value nodes below `d` given the
/// rest of `d`'s family. Decisions are visited last-first until no arc moves.
pub fn reduce(limid: &Limid) -> Limid {
    let mut cur = limid.clone();
    loop {
        let mut changed = false;
        for &d in limid.decisions().iter().rev() {
            let mut i = 0;
            while i < cur.parents(d).len() {
                let dag = cur.dag_parents();
                let targets = value_descendants(&cur, &dag, d);
                let parents = cur.parents(d).to_vec();
                let n = parents[i];
                let given: Vec<usize> = cur
                    .family(d)
                    .into_iter()
                    .filter(|&w| w != n)
                    .map(|w| w.0)
                    .collect();
                if d_separated(&dag, &[n.0], &targets, &given) {
                    let rest = parents.into_iter().filter(|&p| p != n).collect();
                    cur = cur.with_decision_parents(d, rest);
                    changed = true;
                } else {
                    i += 1;
                }
            }
        }
        if !changed {
            return cur;
        }
    }
}

/// Checks that the declared temporal order is an exact solution ordering:
/// walking from the last decision backwards, each decision must be extremal,
/// meaning its family separates the value nodes below it from the families
/// of all decisions not yet converted to chance nodes.
pub fn check_soluble(limid: &Limid) -> Result<()> {
    let dag = limid.dag_parents();
    let ds = limid.decisions();
    for i in (0..ds.len()).rev() {
        let d = ds[i];
        let fa: Vec<usize> = limid.family(d).iter().map(|v| v.0).collect();
        let mut others: Vec<usize> = ds[..i]
            .iter()
            .flat_map(|&e| limid.family(e))
            .map(|v| v.0)
            .filter(|v| !fa.contains(v))
            .collect();
        others.sort_unstable();
        others.dedup();
        let targets = value_descendants(limid, &dag, d);
        if !d_separated(&dag, &targets, &others, &fa) {
            return Err(Error::NotSoluble(d));
        }
    }
    Ok(())
}
