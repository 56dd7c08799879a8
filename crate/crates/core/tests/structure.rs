mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;

use common::{random_table, rng, subset};
use limid::compile::{
    build_junction_tree, compile, moralize, reduce, triangulate, UndirectedGraph,
};
use limid::generate::{generate, GenParams};
use limid::model::{Limid, VarId};
use limid::table::{OpCounter, Table};

fn vars() -> Vec<VarId> {
    (0..5).map(VarId).collect()
}

/// Maximum cardinality search; the graph is chordal iff the reverse visit
/// order is a perfect elimination order.
fn is_chordal(g: &UndirectedGraph) -> bool {
    let n = g.len();
    let mut weight = vec![0usize; n];
    let mut visited = vec![false; n];
    let mut visit = Vec::with_capacity(n);
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| !visited[v])
            .max_by_key(|&v| (weight[v], std::cmp::Reverse(v)))
            .unwrap();
        visited[v] = true;
        visit.push(v);
        for &w in g.neighbours(v) {
            if !visited[w] {
                weight[w] += 1;
            }
        }
    }
    visit.reverse();
    is_perfect_order(g, &visit)
}

fn is_perfect_order(g: &UndirectedGraph, order: &[usize]) -> bool {
    let mut pos = vec![0; g.len()];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    order.iter().all(|&v| {
        let later: Vec<usize> = g
            .neighbours(v)
            .iter()
            .copied()
            .filter(|&w| pos[w] > pos[v])
            .collect();
        later
            .iter()
            .enumerate()
            .all(|(i, &a)| later[i + 1..].iter().all(|&b| g.has_edge(a, b)))
    })
}

fn random_limid(seed: u64) -> Limid {
    let params = GenParams {
        chance: 2 + (seed % 5) as usize,
        decisions: 1 + (seed % 3) as usize,
        values: 1 + (seed % 3) as usize,
        soluble: seed.is_multiple_of(2) || seed.is_multiple_of(3),
        ..GenParams::default()
    };
    let params = if params.decisions < 2 {
        GenParams {
            soluble: true,
            ..params
        }
    } else {
        params
    };
    generate(&params, seed).unwrap()
}

/// Elimination order that respects the temporal order: unobserved chance
/// variables first, then d_k, the variables observed just before d_k, and
/// so on back to the variables observed before d_1.
fn strong_order(limid: &Limid) -> Vec<usize> {
    let mut seen: BTreeSet<VarId> = BTreeSet::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &d in limid.decisions() {
        let group: Vec<usize> = limid
            .parents(d)
            .iter()
            .filter(|p| !limid.is_decision(**p) && seen.insert(**p))
            .map(|p| p.0)
            .collect();
        groups.push(group);
        groups.push(vec![d.0]);
        seen.insert(d);
    }
    let rest: Vec<usize> = (0..limid.num_vars())
        .filter(|&v| !seen.contains(&VarId(v)))
        .collect();
    groups.push(rest);
    groups.into_iter().rev().flatten().collect()
}

fn eliminate(g: &UndirectedGraph, order: &[usize]) -> UndirectedGraph {
    let mut filled = g.clone();
    let mut done = vec![false; g.len()];
    for &v in order {
        let nb: Vec<usize> = filled
            .neighbours(v)
            .iter()
            .copied()
            .filter(|&w| !done[w])
            .collect();
        for (i, &a) in nb.iter().enumerate() {
            for &b in &nb[i + 1..] {
                filled.add_edge(a, b);
            }
        }
        done[v] = true;
    }
    filled
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 300, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn multiply_charges_result_size(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (da, db) = (subset(&mut r, &vars(), 3), subset(&mut r, &vars(), 3));
        let a = random_table(&mut r, &da, 0.0, 1.0);
        let b = random_table(&mut r, &db, 0.0, 1.0);
        let mut ctr = OpCounter::new();
        let c = a.multiply(&b, &mut ctr);
        prop_assert_eq!(ctr.mults, c.len() as u64);
        prop_assert_eq!(ctr.total(), ctr.mults);
        let d = b.multiply(&a, &mut OpCounter::new());
        prop_assert!(c.max_abs_diff(&d).unwrap() == 0.0);
    }

    #[test]
    fn sum_out_order_is_irrelevant(seed in any::<u64>()) {
        let mut r = rng(seed);
        let dom = subset(&mut r, &vars(), 5);
        let t = random_table(&mut r, &dom, -1.0, 1.0);
        let gone = subset(&mut r, &dom, dom.len());
        let mut ctr = OpCounter::new();
        let all = t.sum_out(&gone, &mut ctr).unwrap();
        let kept: usize = all.len();
        prop_assert_eq!(ctr.sums, (t.len() - kept) as u64);
        let mut step = t.clone();
        for v in gone.iter().rev() {
            step = step.sum_out(&[*v], &mut OpCounter::new()).unwrap();
        }
        prop_assert!(all.max_abs_diff(&step).unwrap() <= 1e-12);
    }

    #[test]
    fn divide_by_self_is_indicator(seed in any::<u64>()) {
        let mut r = rng(seed);
        let dom = subset(&mut r, &vars(), 3);
        let t = random_table(&mut r, &dom, 0.0, 1.0);
        let t = Table::new(
            t.vars().to_vec(),
            t.cards().to_vec(),
            t.values().iter().map(|&x| if x < 0.3 { 0.0 } else { x }).collect(),
        ).unwrap();
        let q = t.divide(&t, &mut OpCounter::new()).unwrap();
        for (x, y) in t.values().iter().zip(q.values()) {
            prop_assert_eq!(*y, if *x == 0.0 { 0.0 } else { 1.0 });
        }
    }

    #[test]
    fn reorder_round_trips(seed in any::<u64>()) {
        let mut r = rng(seed);
        let dom = subset(&mut r, &vars(), 4);
        let t = random_table(&mut r, &dom, -1.0, 1.0);
        let mut shuffled = dom.clone();
        shuffled.reverse();
        let back = t.reorder(&shuffled).unwrap().reorder(&dom).unwrap();
        prop_assert_eq!(back, t);
    }
}

#[test]
fn triangulation_is_chordal_and_order_perfect() {
    for seed in 0..200 {
        let l = reduce(&random_limid(seed));
        let moral = moralize(&l);
        let (chordal, order) = triangulate(&moral);
        assert!(chordal.is_supergraph_of(&moral), "seed {seed}");
        assert!(is_chordal(&chordal), "seed {seed}");
        assert!(is_perfect_order(&chordal, &order), "seed {seed}");
    }
}

#[test]
fn chordality_checker_rejects_a_four_cycle() {
    let mut g = UndirectedGraph::new(4);
    for (a, b) in [(0, 1), (1, 2), (2, 3), (3, 0)] {
        g.add_edge(a, b);
    }
    assert!(!is_chordal(&g));
    g.add_edge(0, 2);
    assert!(is_chordal(&g));
}

#[test]
fn compiled_trees_are_valid() {
    for seed in 0..200 {
        let l = reduce(&random_limid(seed));
        let jt = compile(&l).unwrap();
        assert!(jt.is_tree(), "seed {seed}");
        assert!(jt.has_running_intersection(), "seed {seed}");
        let mut chance = BTreeSet::new();
        let mut decisions = BTreeSet::new();
        let mut values = BTreeSet::new();
        for (c, a) in jt.assignments.iter().enumerate() {
            let clique = &jt.cliques[c];
            for &r in &a.chance {
                assert!(chance.insert(r));
                assert!(l.family(r).iter().all(|v| clique.contains(v)));
            }
            for &d in &a.decisions {
                assert!(decisions.insert(d));
                assert!(l.family(d).iter().all(|v| clique.contains(v)));
            }
            for &u in &a.values {
                assert!(values.insert(u));
                assert!(l.values()[u].parents.iter().all(|v| clique.contains(v)));
            }
        }
        assert_eq!(chance.len(), l.chance_nodes().count(), "seed {seed}");
        assert_eq!(decisions.len(), l.decisions().len(), "seed {seed}");
        assert_eq!(values.len(), l.values().len(), "seed {seed}");
    }
}

#[test]
fn assignments_choose_the_lowest_qualifying_clique() {
    for seed in 0..100 {
        let l = reduce(&random_limid(seed));
        let jt = compile(&l).unwrap();
        for (c, a) in jt.assignments.iter().enumerate() {
            for &r in &a.chance {
                assert_eq!(jt.home_of(&l.family(r)), Some(c));
            }
        }
    }
}

#[test]
fn smaller_than_strong_junction_tree() {
    let mut smaller = 0;
    let total = 200;
    for seed in 0..total {
        let l = reduce(&random_limid(seed));
        let ours = compile(&l).unwrap().total_size();
        let order = strong_order(&l);
        let filled = eliminate(&moralize(&l), &order);
        let strong = build_junction_tree(&filled, &order, &l.cardinalities())
            .unwrap()
            .total_size();
        if ours <= strong {
            smaller += 1;
        }
    }
    println!("junction tree no larger than the strong one on {smaller}/{total} instances");
}
