//! Lazy Propagation: potentials are kept as sets of factors and variables
//! are eliminated one at a time, touching only the factors that mention them.
//!
//! The elimination order is chosen on-line. Barren variables go first and
//! cost nothing; probabilistic barren variables next, which contribute only
//! to the utility part; the rest by min-fill on the interaction graph.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::arch::{onto_family, Arch, Engine};
use crate::compile::JunctionTree;
use crate::error::{Error, Result};
use crate::model::{Limid, Policy, VarId};
use crate::table::{OpCounter, Table};

/// Cells of a derived probability factor closer than this to one make it
/// vacuous.
const VACUOUS_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorKind {
    Probability,
    Policy,
    Utility,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    pub table: Arc<Table>,
    pub kind: FactorKind,
    /// The conditioned variable of an original cpt or policy.
    pub head: Option<VarId>,
}

impl Factor {
    pub fn probability(table: Table, head: Option<VarId>) -> Self {
        Factor {
            table: Arc::new(table),
            kind: FactorKind::Probability,
            head,
        }
    }

    pub fn policy(policy: &Policy) -> Self {
        Factor {
            table: Arc::new(policy.table.clone()),
            kind: FactorKind::Policy,
            head: Some(policy.decision),
        }
    }

    pub fn utility(table: Table) -> Self {
        Factor {
            table: Arc::new(table),
            kind: FactorKind::Utility,
            head: None,
        }
    }

    pub fn vars(&self) -> &[VarId] {
        self.table.vars()
    }

    pub fn mentions(&self, v: VarId) -> bool {
        self.table.contains(v)
    }
}

/// A probability part `phi` and a utility part `psi`, both kept factored.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DecomposedPotential {
    pub phi: Vec<Factor>,
    pub psi: Vec<Factor>,
}

impl DecomposedPotential {
    pub fn vacuous() -> Self {
        Self::default()
    }

    pub fn is_vacuous(&self) -> bool {
        self.phi.is_empty() && self.psi.is_empty()
    }

    /// Set union of both parts; no arithmetic.
    pub fn combine(&self, other: &DecomposedPotential) -> DecomposedPotential {
        let mut out = self.clone();
        out.absorb(other);
        out
    }

    pub fn absorb(&mut self, other: &DecomposedPotential) {
        self.phi.extend(other.phi.iter().cloned());
        self.psi.extend(other.psi.iter().cloned());
    }

    /// Union of all factor domains, ascending.
    pub fn domain(&self) -> Vec<VarId> {
        let set: BTreeSet<VarId> = self
            .phi
            .iter()
            .chain(&self.psi)
            .flat_map(|f| f.vars().iter().copied())
            .collect();
        set.into_iter().collect()
    }

    /// `Π phi · Σ psi`; an empty product is one and an empty sum is zero.
    pub fn contract(&self, ctr: &mut OpCounter) -> Table {
        let prod = fold(&self.phi, ctr, Table::multiply);
        let sum = fold(&self.psi, ctr, Table::add);
        match (prod, sum) {
            (_, None) => Table::scalar(0.0),
            (None, Some(s)) => s,
            (Some(p), Some(s)) => p.multiply(&s, ctr),
        }
    }
}

/// Left fold of factor tables; the first table is taken as is.
fn fold(
    factors: &[Factor],
    ctr: &mut OpCounter,
    op: fn(&Table, &Table, &mut OpCounter) -> Table,
) -> Option<Table> {
    let mut it = factors.iter();
    let first = (*it.next()?.table).clone();
    Some(it.fold(first, |acc, f| op(&acc, &f.table, ctr)))
}

/// Children of `n` in the directed domain graph: heads of probability
/// factors that mention `n` in their tail.
fn children(pi: &DecomposedPotential, n: VarId) -> impl Iterator<Item = VarId> + '_ {
    pi.phi
        .iter()
        .filter(move |f| f.head.is_some_and(|h| h != n) && f.mentions(n))
        .map(|f| f.head.expect("filtered on head"))
}

fn barren_closure(pi: &DecomposedPotential, w: &[VarId], ignore_utilities: bool) -> Vec<VarId> {
    let mut set: BTreeSet<VarId> = pi
        .domain()
        .into_iter()
        .filter(|v| !w.contains(v))
        .filter(|&v| ignore_utilities || !pi.psi.iter().any(|f| f.mentions(v)))
        .filter(|&v| !pi.phi.iter().any(|f| f.head.is_none() && f.mentions(v)))
        .collect();
    loop {
        let drop: Vec<VarId> = set
            .iter()
            .copied()
            .filter(|&v| children(pi, v).any(|c| !set.contains(&c)))
            .collect();
        if drop.is_empty() {
            return set.into_iter().collect();
        }
        for v in drop {
            set.remove(&v);
        }
    }
}

/// Barren and probabilistic barren variables of `pi` with respect to the
/// target set `w`. Every barren variable is also probabilistic barren.
pub fn find_barren(pi: &DecomposedPotential, w: &[VarId]) -> (Vec<VarId>, Vec<VarId>) {
    (barren_closure(pi, w, false), barren_closure(pi, w, true))
}

fn is_sink(pi: &DecomposedPotential, n: VarId) -> bool {
    children(pi, n).next().is_none()
}

/// Number of fill edges eliminating `n` would add to the interaction graph.
fn fill_in(pi: &DecomposedPotential, n: VarId) -> usize {
    let mut nb: BTreeSet<VarId> = BTreeSet::new();
    for f in pi.phi.iter().chain(&pi.psi).filter(|f| f.mentions(n)) {
        nb.extend(f.vars().iter().copied().filter(|&v| v != n));
    }
    let nb: Vec<VarId> = nb.into_iter().collect();
    let adjacent = |a: VarId, b: VarId| {
        pi.phi
            .iter()
            .chain(&pi.psi)
            .any(|f| f.mentions(a) && f.mentions(b))
    };
    let mut fill = 0;
    for (i, &a) in nb.iter().enumerate() {
        for &b in &nb[i + 1..] {
            if !adjacent(a, b) {
                fill += 1;
            }
        }
    }
    fill
}

/// Next variable to eliminate when marginalizing onto `w`.
pub fn next_elimination(pi: &DecomposedPotential, w: &[VarId]) -> Option<VarId> {
    let candidates: Vec<VarId> = pi.domain().into_iter().filter(|v| !w.contains(v)).collect();
    if candidates.is_empty() {
        return None;
    }
    let (barren, prob_barren) = find_barren(pi, w);
    if let Some(&v) = barren.iter().find(|&&v| is_sink(pi, v)) {
        return Some(v);
    }
    if let Some(&v) = prob_barren.iter().find(|&&v| is_sink(pi, v)) {
        return Some(v);
    }
    candidates.into_iter().min_by_key(|&v| (fill_in(pi, v), v))
}

/// Eliminates one variable from the potential. `n` must occur in it and lie
/// outside `w`, the target set used for the barren tests.
pub fn eliminate_var(
    pi: &DecomposedPotential,
    n: VarId,
    w: &[VarId],
    ctr: &mut OpCounter,
) -> Result<DecomposedPotential> {
    let (phi_n, phi_rest): (Vec<Factor>, Vec<Factor>) =
        pi.phi.iter().cloned().partition(|f| f.mentions(n));
    let (psi_n, psi_rest): (Vec<Factor>, Vec<Factor>) =
        pi.psi.iter().cloned().partition(|f| f.mentions(n));
    if phi_n.is_empty() && psi_n.is_empty() {
        return Err(Error::UnknownVariable(n));
    }
    let mut out = DecomposedPotential {
        phi: phi_rest,
        psi: psi_rest,
    };
    let (barren, prob_barren) = find_barren(pi, w);
    let only_own_head = phi_n.iter().all(|f| f.head == Some(n));

    if barren.contains(&n) && only_own_head {
        return Ok(out);
    }

    let sum_psi = fold(&psi_n, ctr, Table::add);
    if prob_barren.contains(&n) && only_own_head {
        if let Some(s) = sum_psi {
            let psi_star = match phi_n.first() {
                Some(head) => head.table.multiply(&s, ctr).sum_out(&[n], ctr)?,
                None => {
                    let k = s.card_of(n).expect("utility mentions n") as f64;
                    s.sum_out(&[n], ctr)?.divide(&Table::scalar(k), ctr)?
                }
            };
            out.psi.push(Factor::utility(psi_star));
        }
        return Ok(out);
    }

    let prod =
        fold(&phi_n, ctr, Table::multiply).expect("non-barren variable has probability factors");
    let phi_star = prod.sum_out(&[n], ctr)?;
    if let Some(s) = sum_psi {
        let weighted = prod.multiply(&s, ctr).sum_out(&[n], ctr)?;
        let psi_star = weighted.divide(&phi_star, ctr)?;
        out.psi.push(Factor::utility(psi_star));
    }
    if !phi_star
        .values()
        .iter()
        .all(|&x| (x - 1.0).abs() <= VACUOUS_TOLERANCE)
    {
        out.phi.push(Factor::probability(phi_star, None));
    }
    Ok(out)
}

/// Marginal onto `w` by on-line variable elimination. Also returns the
/// elimination order used.
pub fn marginalize_with_order(
    pi: &DecomposedPotential,
    w: &[VarId],
    ctr: &mut OpCounter,
) -> Result<(DecomposedPotential, Vec<VarId>)> {
    let mut cur = pi.clone();
    let mut order = Vec::new();
    while let Some(n) = next_elimination(&cur, w) {
        cur = eliminate_var(&cur, n, w, ctr)?;
        order.push(n);
    }
    Ok((cur, order))
}

pub fn marginalize(
    pi: &DecomposedPotential,
    w: &[VarId],
    ctr: &mut OpCounter,
) -> Result<DecomposedPotential> {
    Ok(marginalize_with_order(pi, w, ctr)?.0)
}

pub struct Lazy {
    jt: JunctionTree,
    potentials: Vec<DecomposedPotential>,
    policies: Vec<BTreeMap<VarId, Factor>>,
    mailboxes: Vec<Option<DecomposedPotential>>,
}

impl Lazy {
    pub fn new(limid: &Limid, jt: JunctionTree) -> Self {
        let potentials = jt
            .assignments
            .iter()
            .map(|a| DecomposedPotential {
                phi: a
                    .chance
                    .iter()
                    .map(|&r| {
                        Factor::probability(limid.cpt(r).expect("chance node").clone(), Some(r))
                    })
                    .collect(),
                psi: a
                    .values
                    .iter()
                    .map(|&k| Factor::utility(limid.values()[k].utility.clone()))
                    .collect(),
            })
            .collect();
        Lazy {
            policies: vec![BTreeMap::new(); jt.len()],
            mailboxes: vec![None; jt.num_directions()],
            potentials,
            jt,
        }
    }

    pub fn potential(&self, c: usize) -> &DecomposedPotential {
        &self.potentials[c]
    }

    pub fn message(&self, from: usize, to: usize) -> Option<&DecomposedPotential> {
        self.mailboxes[self.jt.direction(from, to)].as_ref()
    }

    fn gather(&self, c: usize, skip: Option<usize>) -> Result<DecomposedPotential> {
        let mut acc = self.potentials[c].clone();
        acc.phi.extend(self.policies[c].values().cloned());
        for &(n, _) in self.jt.neighbours(c) {
            if Some(n) == skip {
                continue;
            }
            let msg = self.mailboxes[self.jt.direction(n, c)]
                .as_ref()
                .ok_or(Error::MissingInboundMessage { from: n, to: c })?;
            acc.absorb(msg);
        }
        Ok(acc)
    }

    /// Combination of everything available at `root`.
    pub fn root_potential(&self, root: usize) -> Result<DecomposedPotential> {
        self.gather(root, None)
    }
}

impl Engine for Lazy {
    fn arch(&self) -> Arch {
        Arch::Lazy
    }

    fn junction_tree(&self) -> &JunctionTree {
        &self.jt
    }

    fn init_ops(&self) -> OpCounter {
        OpCounter::new()
    }

    fn send(&mut self, from: usize, to: usize, ctr: &mut OpCounter) -> Result<()> {
        let sep = self.jt.separator(from, to).to_vec();
        let msg = marginalize(&self.gather(from, Some(to))?, &sep, ctr)?;
        let dir = self.jt.direction(from, to);
        self.mailboxes[dir] = Some(msg);
        Ok(())
    }

    fn family_contraction(
        &mut self,
        root: usize,
        family: &[VarId],
        ctr: &mut OpCounter,
    ) -> Result<Table> {
        let c = marginalize(&self.root_potential(root)?, family, ctr)?.contract(ctr);
        onto_family(&c, family, &self.jt)
    }

    fn install_policy(&mut self, root: usize, policy: &Policy, _ctr: &mut OpCounter) -> Result<()> {
        self.policies[root].insert(policy.decision, Factor::policy(policy));
        Ok(())
    }

    fn retract_policy(&mut self, root: usize, d: VarId) -> Result<()> {
        self.policies[root].remove(&d);
        Ok(())
    }

    fn expected_utility(&mut self, root: usize, ctr: &mut OpCounter) -> Result<f64> {
        let c = marginalize(&self.root_potential(root)?, &[], ctr)?.contract(ctr);
        Ok(c.values()[0])
    }
}
