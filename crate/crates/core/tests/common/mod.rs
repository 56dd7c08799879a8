//! Seeded fixtures and identity checks shared by the property tests and the
//! acceptance harness. Each check returns `Err` with a description when the
//! identity fails on the fixture drawn from its seed.

#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use limid::arch::lp::{marginalize, DecomposedPotential, Factor};
use limid::arch::ss::PairedPotential;
use limid::arch::{new_engine, Arch};
use limid::compile::{assign_functions, compile, JunctionTree};
use limid::generate::{generate, GenParams};
use limid::model::{Limid, LimidBuilder, Policy, Strategy, VarId};
use limid::oracle::{joint_distribution, DEFAULT_CELL_CAP};
use limid::spu::Collector;
use limid::table::{OpCounter, Table};

pub const TOLERANCE: f64 = 1e-9;
const NUM_VARS: usize = 5;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn card(v: VarId) -> usize {
    2 + v.0 % 2
}

/// Largest cellwise difference relative to the larger magnitude.
pub fn rel_diff(a: &Table, b: &Table) -> f64 {
    let scale = a.max_abs().max(b.max_abs()).max(1.0);
    a.max_abs_diff_broadcast(b) / scale
}

fn close(what: &str, a: &Table, b: &Table) -> Result<(), String> {
    let d = rel_diff(a, b);
    if d <= TOLERANCE {
        Ok(())
    } else {
        Err(format!("{what}: relative difference {d:e}"))
    }
}

fn close_pair(what: &str, a: &PairedPotential, b: &PairedPotential) -> Result<(), String> {
    close(&format!("{what} (probability part)"), &a.p, &b.p)?;
    close(&format!("{what} (utility part)"), &a.u, &b.u)
}

pub fn subset(rng: &mut ChaCha8Rng, from: &[VarId], most: usize) -> Vec<VarId> {
    let m = rng.gen_range(0..=most.min(from.len()));
    let mut out: Vec<VarId> = from.choose_multiple(rng, m).copied().collect();
    out.sort_unstable();
    out
}

fn all_vars() -> Vec<VarId> {
    (0..NUM_VARS).map(VarId).collect()
}

pub fn random_table(rng: &mut ChaCha8Rng, vars: &[VarId], lo: f64, hi: f64) -> Table {
    let cards: Vec<usize> = vars.iter().map(|&v| card(v)).collect();
    let n = cards.iter().product();
    let values = (0..n).map(|_| rng.gen_range(lo..hi)).collect();
    Table::new(vars.to_vec(), cards, values).unwrap()
}

/// Probability part in `[0, 1)` with some exact zeros unless `positive`.
pub fn random_potential(rng: &mut ChaCha8Rng, vars: &[VarId], positive: bool) -> PairedPotential {
    let mut p = random_table(rng, vars, 0.05, 1.0);
    if !positive {
        let zeros: Vec<f64> = p
            .values()
            .iter()
            .map(|&x| if rng.gen_bool(0.2) { 0.0 } else { x })
            .collect();
        p = Table::new(p.vars().to_vec(), p.cards().to_vec(), zeros).unwrap();
    }
    let u = random_table(rng, vars, -10.0, 10.0);
    PairedPotential::new(p, u)
}

fn random_domain(rng: &mut ChaCha8Rng) -> Vec<VarId> {
    subset(rng, &all_vars(), 4)
}

/// Combination is commutative and associative.
pub fn check_combination_commutes_and_associates(seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let mut draw = || {
        let dom = random_domain(&mut r);
        random_potential(&mut r, &dom, false)
    };
    let (a, b, c) = (draw(), draw(), draw());
    let mut ctr = OpCounter::new();
    close_pair(
        "a*b = b*a",
        &a.combine(&b, &mut ctr),
        &b.combine(&a, &mut ctr),
    )?;
    let left = a.combine(&b, &mut ctr).combine(&c, &mut ctr);
    let right = a.combine(&b.combine(&c, &mut ctr), &mut ctr);
    close_pair("(a*b)*c = a*(b*c)", &left, &right)
}

/// Marginalizing in two steps equals marginalizing in one.
pub fn check_marginalization_is_consonant(seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let dom = subset(&mut r, &all_vars(), NUM_VARS);
    let pi = random_potential(&mut r, &dom, false);
    let w = subset(&mut r, &dom, dom.len());
    let v = subset(&mut r, &w, w.len());
    let mut ctr = OpCounter::new();
    let two = pi
        .marginalize(&w, &mut ctr)
        .and_then(|m| m.marginalize(&v, &mut ctr))
        .map_err(|e| e.to_string())?;
    let one = pi.marginalize(&v, &mut ctr).map_err(|e| e.to_string())?;
    close_pair("consonance", &two, &one)
}

/// `(a * b)↓W = a * b↓(W ∩ dom b)` when `dom a ⊆ W`, for positive `a`.
/// Utilities are compared weighted by probability since they are arbitrary
/// where the probability part vanishes.
pub fn check_marginalization_distributes(seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let da = random_domain(&mut r);
    let db = random_domain(&mut r);
    let a = random_potential(&mut r, &da, true);
    let b = random_potential(&mut r, &db, false);
    let rest: Vec<VarId> = db.iter().copied().filter(|v| !da.contains(v)).collect();
    let mut w = da.clone();
    w.extend(subset(&mut r, &rest, rest.len()));
    let wb: Vec<VarId> = db.iter().copied().filter(|v| w.contains(v)).collect();
    let mut ctr = OpCounter::new();
    let left = a
        .combine(&b, &mut ctr)
        .marginalize(&w, &mut ctr)
        .map_err(|e| e.to_string())?;
    let right = a.combine(
        &b.marginalize(&wb, &mut ctr).map_err(|e| e.to_string())?,
        &mut ctr,
    );
    close("distributivity (probability part)", &left.p, &right.p)?;
    close(
        "distributivity (weighted utility)",
        &left.contract(&mut ctr),
        &right.contract(&mut ctr),
    )
}

/// Contraction commutes with marginalization for paired potentials.
pub fn check_contraction_commutes_with_marginal(seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let dom = subset(&mut r, &all_vars(), NUM_VARS);
    let pi = random_potential(&mut r, &dom, false);
    let w = subset(&mut r, &dom, dom.len());
    let mut ctr = OpCounter::new();
    let left = pi
        .marginalize(&w, &mut ctr)
        .map_err(|e| e.to_string())?
        .contract(&mut ctr);
    let right = pi
        .contract(&mut ctr)
        .marginal(&w, &mut ctr)
        .map_err(|e| e.to_string())?;
    close("cont(pi↓W) = cont(pi)↓W", &left, &right)
}

/// Factored potential over a random DAG: normalized cpts carry heads,
/// variables without a cpt are covered by headless positive factors.
pub fn random_decomposed(rng: &mut ChaCha8Rng) -> DecomposedPotential {
    let vars = all_vars();
    let mut pi = DecomposedPotential::vacuous();
    let mut uncovered = Vec::new();
    for (i, &v) in vars.iter().enumerate() {
        if rng.gen_bool(0.6) {
            let mut dom = subset(rng, &vars[..i], 2);
            dom.push(v);
            let raw = random_table(rng, &dom, 0.05, 1.0);
            let k = card(v);
            let values: Vec<f64> = raw
                .values()
                .chunks(k)
                .flat_map(|row| {
                    let s: f64 = row.iter().sum();
                    row.iter().map(move |x| x / s)
                })
                .collect();
            let t = Table::new(dom, raw.cards().to_vec(), values).unwrap();
            pi.phi.push(Factor::probability(t, Some(v)));
        } else {
            uncovered.push(v);
        }
    }
    while !uncovered.is_empty() {
        let take = rng.gen_range(1..=uncovered.len().min(3));
        let dom: Vec<VarId> = uncovered.drain(..take).collect();
        pi.phi.push(Factor::probability(
            random_table(rng, &dom, 0.05, 1.0),
            None,
        ));
    }
    for _ in 0..rng.gen_range(1..=3) {
        let mut dom = subset(rng, &vars, 3);
        if dom.is_empty() {
            dom.push(*vars.choose(rng).unwrap());
        }
        pi.psi
            .push(Factor::utility(random_table(rng, &dom, -10.0, 10.0)));
    }
    pi
}

/// Contraction commutes with marginalization for factored potentials,
/// including barren and probabilistic barren eliminations.
pub fn check_factored_contraction_commutes_with_marginal(seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let pi = random_decomposed(&mut r);
    let w = subset(&mut r, &pi.domain(), NUM_VARS);
    let mut ctr = OpCounter::new();
    let left = marginalize(&pi, &w, &mut ctr)
        .map_err(|e| e.to_string())?
        .contract(&mut ctr);
    let right = pi
        .contract(&mut ctr)
        .marginal(&w, &mut ctr)
        .map_err(|e| e.to_string())?;
    close("cont(pi↓W) = cont(pi)↓W (factored)", &left, &right)
}

/// Strictly positive stochastic policy over the declared parents.
pub fn random_policy(rng: &mut ChaCha8Rng, limid: &Limid, d: VarId) -> Policy {
    let mut vars = limid.parents(d).to_vec();
    vars.push(d);
    let cards = limid.cards_of(&vars);
    let k = limid.cardinality(d);
    let rows: usize = cards.iter().product::<usize>() / k;
    let mut values = Vec::new();
    for _ in 0..rows {
        let row: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
        let s: f64 = row.iter().sum();
        values.extend(row.iter().map(|x| x / s));
    }
    Policy {
        decision: d,
        table: Table::new(vars, cards, values).unwrap(),
    }
}

/// `Σ_{V∖keep} f_q · U` by enumeration.
pub fn brute_contraction(limid: &Limid, strategy: &Strategy, keep: &[VarId]) -> Table {
    let mut ctr = OpCounter::new();
    let joint = joint_distribution(limid, strategy, DEFAULT_CELL_CAP).unwrap();
    let mut total = Table::filled(joint.vars().to_vec(), joint.cards().to_vec(), 0.0);
    for u in limid.values() {
        total = total.add(&u.utility, &mut ctr);
    }
    joint
        .multiply(&total, &mut ctr)
        .marginal(keep, &mut ctr)
        .unwrap()
}

/// After a full collect with every policy installed, the contraction at the
/// root equals the enumerated contraction over the root clique.
pub fn root_marginal_identity(arch: Arch, seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let params = GenParams {
        chance: r.gen_range(2..=5),
        decisions: r.gen_range(1..=3),
        values: r.gen_range(1..=3),
        soluble: r.gen_bool(0.5),
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
    let limid = generate(&params, seed).map_err(|e| e.to_string())?;
    let jt = compile(&limid).map_err(|e| e.to_string())?;
    let root = r.gen_range(0..jt.len());
    let keep = subset(&mut r, &jt.cliques[root], jt.cliques[root].len());
    let mut strategy = Strategy::new();
    for &d in limid.decisions() {
        strategy.insert(random_policy(&mut r, &limid, d));
    }
    let mut engine = new_engine(arch, &limid, jt.clone());
    let mut ctr = OpCounter::new();
    for p in strategy.policies.values() {
        let home = jt
            .home_of(&limid.family(p.decision))
            .expect("family has a home");
        engine
            .install_policy(home, p, &mut ctr)
            .map_err(|e| e.to_string())?;
    }
    let mut collector = Collector::new(&jt);
    collector
        .collect(&jt, root, &mut |from, to| engine.send(from, to, &mut ctr))
        .map_err(|e| e.to_string())?;
    let got = engine
        .family_contraction(root, &keep, &mut ctr)
        .map_err(|e| e.to_string())?;
    let want = brute_contraction(&limid, &strategy, &keep);
    close(&format!("{arch} root contraction"), &got, &want)
}

pub type Check = fn(u64) -> Result<(), String>;

/// Every algebra identity with its name.
pub fn algebra_checks() -> Vec<(&'static str, Check)> {
    vec![
        (
            "commutativity and associativity",
            check_combination_commutes_and_associates,
        ),
        ("consonance", check_marginalization_is_consonant),
        ("distributivity", check_marginalization_distributes),
        (
            "contraction of marginal",
            check_contraction_commutes_with_marginal,
        ),
        (
            "factored contraction of marginal",
            check_factored_contraction_commutes_with_marginal,
        ),
        ("S-S root marginal", |s| {
            root_marginal_identity(Arch::ShaferShenoy, s)
        }),
        ("LP root marginal", |s| {
            root_marginal_identity(Arch::Lazy, s)
        }),
        ("HUGIN root marginal", |s| {
            root_marginal_identity(Arch::Hugin, s)
        }),
    ]
}

pub const R1: VarId = VarId(0);
pub const R2: VarId = VarId(1);
pub const D2: VarId = VarId(2);
pub const D4: VarId = VarId(3);

pub fn t(vars: &[usize], values: &[f64]) -> Table {
    let vars: Vec<VarId> = vars.iter().map(|&v| VarId(v)).collect();
    let cards = vec![2; vars.len()];
    Table::new(vars, cards, values.to_vec()).unwrap()
}

/// The factors reaching clique 3 before it sends to clique 2: p(r2 | r1),
/// the policy for d4 given (r2, d2), and three utilities.
pub fn clique3_neighbourhood() -> DecomposedPotential {
    let policy = Policy {
        decision: D4,
        table: t(&[1, 2, 3], &[1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0]),
    };
    DecomposedPotential {
        phi: vec![
            Factor::probability(t(&[0, 1], &[0.7, 0.3, 0.2, 0.8]), Some(R2)),
            Factor::policy(&policy),
        ],
        psi: vec![
            Factor::utility(t(&[2, 1], &[1.0, -2.0, 3.0, 0.5])),
            Factor::utility(t(&[1, 3], &[4.0, 0.0, -1.0, 2.0])),
            Factor::utility(t(&[3, 0, 2], &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0])),
        ],
    }
}

/// `r1 -> r2`, `d2 | r1`, `d4 | r2, d2`, `r7 | r1, d2` over the two
/// cliques `{r1, d2, r7}` and `{r1, r2, d2, d4}`.
pub fn two_clique_fixture() -> (Limid, JunctionTree) {
    let mut b = LimidBuilder::new();
    let r1 = b.chance("r1", 2, &[], vec![0.6, 0.4]);
    let r2 = b.chance("r2", 2, &[r1], vec![0.7, 0.3, 0.2, 0.8]);
    let d2 = b.decision("d2", 2, &[r1]);
    let d4 = b.decision("d4", 2, &[r2, d2]);
    let r7 = b.chance(
        "r7",
        2,
        &[r1, d2],
        vec![0.5, 0.5, 0.9, 0.1, 0.3, 0.7, 0.25, 0.75],
    );
    b.value("u1", &[d2, r2], vec![1.0, -2.0, 3.0, 0.5]);
    b.value("u2", &[r2, d4], vec![4.0, 0.0, -1.0, 2.0]);
    b.value(
        "u3",
        &[d4, r1, d2],
        vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0],
    );
    b.value("u4", &[r7], vec![-1.0, 1.0]);
    let l = b.build().unwrap();
    let jt = JunctionTree::from_parts(
        l.cardinalities(),
        vec![vec![r1, d2, r7], vec![r1, r2, d2, d4]],
        &[(0, 1)],
    );
    let jt = assign_functions(&l, jt).unwrap();
    (l, jt)
}

pub fn positive_policy(l: &Limid, d: VarId) -> Policy {
    let mut vars = l.parents(d).to_vec();
    vars.push(d);
    let cards = l.cards_of(&vars);
    let n: usize = cards.iter().product();
    let values = (0..n)
        .map(|i| if i % 2 == 0 { 0.25 } else { 0.75 })
        .collect();
    Policy {
        decision: d,
        table: Table::new(vars, cards, values).unwrap(),
    }
}

/// Chance chain r1 -> ... -> r6 with d1 observing r1 and d2 observing r3.
pub fn chain_fixture() -> Limid {
    let mut b = LimidBuilder::new();
    let r1 = b.chance("r1", 2, &[], vec![0.35, 0.65]);
    let d1 = b.decision("d1", 2, &[r1]);
    let mut prev = r1;
    let mut rs = vec![r1];
    for i in 2..=6 {
        let cpt = vec![0.8, 0.2, 0.3, 0.7];
        prev = b.chance(&format!("r{i}"), 2, &[prev], cpt);
        rs.push(prev);
    }
    let d2 = b.decision("d2", 2, &[rs[2]]);
    b.value("u1", &[d1, rs[1]], vec![3.0, -1.0, 0.0, 2.0]);
    b.value("u2", &[d2, rs[3]], vec![1.0, -4.0, -2.0, 5.0]);
    b.build().unwrap()
}

/// Clique `{r1, r2, d2, d4}` combined with three inbound messages over two
/// variables each and marginalized onto `{r1, d2}`.
pub fn ss_clique3_message_cost() -> OpCounter {
    let clique = [0, 1, 2, 3];
    let pi = PairedPotential::new(t(&clique, &[0.5; 16]), t(&clique, &[1.0; 16]));
    let inbound =
        |a: usize, b: usize| PairedPotential::new(t(&[a, b], &[0.5; 4]), t(&[a, b], &[2.0; 4]));
    let mut ctr = OpCounter::new();
    let mut acc = PairedPotential::vacuous().combine(&pi, &mut ctr);
    for m in [inbound(0, 1), inbound(1, 3), inbound(2, 3)] {
        acc = acc.combine(&m, &mut ctr);
    }
    acc.marginalize(&[R1, D2], &mut ctr).unwrap();
    ctr
}
