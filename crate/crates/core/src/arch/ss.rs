//! Shafer-Shenoy propagation with paired probability/utility potentials.
//!
//! Clique potentials are built once and never touched by message passing.
//! Policies are kept beside the clique potential so they can be retracted.

use std::collections::BTreeMap;

use crate::arch::{onto_family, Arch, Engine};
use crate::compile::JunctionTree;
use crate::error::{Error, Result};
use crate::model::{Limid, Policy, VarId};
use crate::table::{OpCounter, Table};

/// A probability part and a utility part over the same domain.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedPotential {
    pub p: Table,
    pub u: Table,
}

impl PairedPotential {
    /// `(1, 0)` with empty domain.
    pub fn vacuous() -> Self {
        PairedPotential {
            p: Table::scalar(1.0),
            u: Table::scalar(0.0),
        }
    }

    pub fn new(p: Table, u: Table) -> Self {
        PairedPotential { p, u }
    }

    pub fn vars(&self) -> &[VarId] {
        self.p.vars()
    }

    pub fn combine(&self, other: &PairedPotential, ctr: &mut OpCounter) -> PairedPotential {
        PairedPotential {
            p: self.p.multiply(&other.p, ctr),
            u: self.u.add(&other.u, ctr),
        }
    }

    /// Marginal onto `keep`: summed probability and probability-weighted
    /// average utility (with `0/0 = 0`).
    pub fn marginalize(&self, keep: &[VarId], ctr: &mut OpCounter) -> Result<PairedPotential> {
        if self.vars().iter().all(|v| keep.contains(v)) {
            return Ok(self.clone());
        }
        let p = self.p.marginal(keep, ctr)?;
        let pu = self.p.multiply(&self.u, ctr);
        let num = pu.marginal(keep, ctr)?;
        let u = num.divide(&p, ctr)?;
        Ok(PairedPotential { p, u })
    }

    pub fn contract(&self, ctr: &mut OpCounter) -> Table {
        self.p.multiply(&self.u, ctr)
    }

    /// Cellwise sum of both parts, used to detect mutation in tests.
    pub fn checksum(&self) -> f64 {
        self.p.values().iter().sum::<f64>() + self.u.values().iter().sum::<f64>()
    }
}

/// Clique potentials over each full clique, built by multiplying in the
/// assigned cpts and adding the assigned utilities. The first table of each
/// part is broadcast for free.
pub(crate) fn initial_potentials(
    limid: &Limid,
    jt: &JunctionTree,
    ctr: &mut OpCounter,
) -> Vec<PairedPotential> {
    (0..jt.len())
        .map(|c| {
            let vars = &jt.cliques[c];
            let cards = jt.cards_of(vars);
            let a = &jt.assignments[c];
            let mut p: Option<Table> = None;
            for &r in &a.chance {
                let cpt = limid.cpt(r).expect("chance node");
                p = Some(match p {
                    None => cpt.extend_to(vars, &cards).expect("clique holds family"),
                    Some(acc) => acc.multiply(cpt, ctr),
                });
            }
            let mut u: Option<Table> = None;
            for &k in &a.values {
                let util = &limid.values()[k].utility;
                u = Some(match u {
                    None => util.extend_to(vars, &cards).expect("clique holds parents"),
                    Some(acc) => acc.add(util, ctr),
                });
            }
            PairedPotential {
                p: p.unwrap_or_else(|| Table::filled(vars.clone(), cards.clone(), 1.0)),
                u: u.unwrap_or_else(|| Table::filled(vars.clone(), cards, 0.0)),
            }
        })
        .collect()
}

pub struct ShaferShenoy {
    jt: JunctionTree,
    potentials: Vec<PairedPotential>,
    policies: Vec<BTreeMap<VarId, Table>>,
    mailboxes: Vec<Option<PairedPotential>>,
    init: OpCounter,
}

impl ShaferShenoy {
    pub fn new(limid: &Limid, jt: JunctionTree) -> Self {
        let mut init = OpCounter::new();
        let potentials = initial_potentials(limid, &jt, &mut init);
        ShaferShenoy {
            policies: vec![BTreeMap::new(); jt.len()],
            mailboxes: vec![None; jt.num_directions()],
            potentials,
            jt,
            init,
        }
    }

    pub fn potential(&self, c: usize) -> &PairedPotential {
        &self.potentials[c]
    }

    pub fn message(&self, from: usize, to: usize) -> Option<&PairedPotential> {
        self.mailboxes[self.jt.direction(from, to)].as_ref()
    }

    /// Clique potential combined with its policies and the messages from
    /// every neighbour except `skip`, folded from the vacuous potential.
    fn gather(
        &self,
        c: usize,
        skip: Option<usize>,
        ctr: &mut OpCounter,
    ) -> Result<PairedPotential> {
        let mut acc = PairedPotential::vacuous().combine(&self.potentials[c], ctr);
        for policy in self.policies[c].values() {
            acc.p = acc.p.multiply(policy, ctr);
        }
        for &(n, _) in self.jt.neighbours(c) {
            if Some(n) == skip {
                continue;
            }
            let msg = self.mailboxes[self.jt.direction(n, c)]
                .as_ref()
                .ok_or(Error::MissingInboundMessage { from: n, to: c })?;
            acc = acc.combine(msg, ctr);
        }
        Ok(acc)
    }

    /// Combination of everything available at `root`.
    pub fn root_potential(&self, root: usize, ctr: &mut OpCounter) -> Result<PairedPotential> {
        self.gather(root, None, ctr)
    }
}

impl Engine for ShaferShenoy {
    fn arch(&self) -> Arch {
        Arch::ShaferShenoy
    }

    fn junction_tree(&self) -> &JunctionTree {
        &self.jt
    }

    fn init_ops(&self) -> OpCounter {
        self.init
    }

    fn send(&mut self, from: usize, to: usize, ctr: &mut OpCounter) -> Result<()> {
        let sep = self.jt.separator(from, to).to_vec();
        let msg = self.gather(from, Some(to), ctr)?.marginalize(&sep, ctr)?;
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
        let c = self
            .root_potential(root, ctr)?
            .marginalize(family, ctr)?
            .contract(ctr);
        onto_family(&c, family, &self.jt)
    }

    fn install_policy(&mut self, root: usize, policy: &Policy, _ctr: &mut OpCounter) -> Result<()> {
        self.policies[root].insert(policy.decision, policy.table.clone());
        Ok(())
    }

    fn retract_policy(&mut self, root: usize, d: VarId) -> Result<()> {
        self.policies[root].remove(&d);
        Ok(())
    }

    fn expected_utility(&mut self, root: usize, ctr: &mut OpCounter) -> Result<f64> {
        let c = self
            .root_potential(root, ctr)?
            .marginalize(&[], ctr)?
            .contract(ctr);
        Ok(c.values()[0])
    }
}
