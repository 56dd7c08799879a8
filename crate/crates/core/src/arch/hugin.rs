//! HUGIN propagation: separators hold potentials, receiving cliques absorb
//! the ratio of the new separator marginal to the old one.

use std::collections::BTreeMap;

use crate::arch::ss::{initial_potentials, PairedPotential};
use crate::arch::{onto_family, Arch, Engine};
use crate::compile::JunctionTree;
use crate::error::{Error, Result};
use crate::model::{Limid, Policy, VarId};
use crate::table::{OpCounter, Table};

/// `(p_a / p_b, u_a - u_b)`, with `0/0 = 0`.
pub fn hugin_divide(
    a: &PairedPotential,
    b: &PairedPotential,
    ctr: &mut OpCounter,
) -> Result<PairedPotential> {
    Ok(PairedPotential {
        p: a.p.divide(&b.p, ctr)?,
        u: a.u.subtract(&b.u, ctr),
    })
}

pub struct Hugin {
    jt: JunctionTree,
    potentials: Vec<PairedPotential>,
    separators: Vec<PairedPotential>,
    installed: BTreeMap<VarId, Table>,
    init: OpCounter,
}

impl Hugin {
    pub fn new(limid: &Limid, jt: JunctionTree) -> Self {
        let mut init = OpCounter::new();
        let potentials = initial_potentials(limid, &jt, &mut init);
        Hugin {
            separators: vec![PairedPotential::vacuous(); jt.edges.len()],
            installed: BTreeMap::new(),
            potentials,
            jt,
            init,
        }
    }

    pub fn potential(&self, c: usize) -> &PairedPotential {
        &self.potentials[c]
    }

    pub fn separator_potential(&self, edge: usize) -> &PairedPotential {
        &self.separators[edge]
    }

    /// Contraction of a clique potential divided by its separators'
    /// contraction structure: `cont((π_a ⊗ π_b) ⊖ π_s)` for one edge.
    pub fn edge_joint_contraction(&self, edge: usize) -> Result<Table> {
        let e = &self.jt.edges[edge];
        let mut ctr = OpCounter::new();
        let joint = self.potentials[e.a].combine(&self.potentials[e.b], &mut ctr);
        Ok(hugin_divide(&joint, &self.separators[edge], &mut ctr)?.contract(&mut ctr))
    }
}

impl Engine for Hugin {
    fn arch(&self) -> Arch {
        Arch::Hugin
    }

    fn junction_tree(&self) -> &JunctionTree {
        &self.jt
    }

    fn init_ops(&self) -> OpCounter {
        self.init
    }

    fn send(&mut self, from: usize, to: usize, ctr: &mut OpCounter) -> Result<()> {
        let edge = self.jt.edge_between(from, to).expect("adjacent cliques");
        let sep = self.jt.edges[edge].separator.clone();
        let fresh = self.potentials[from].marginalize(&sep, ctr)?;
        let ratio = hugin_divide(&fresh, &self.separators[edge], ctr).map_err(|e| match e {
            Error::DivideByZero { .. } => Error::SeparatorDivision {
                edge,
                separator: sep.clone(),
            },
            other => other,
        })?;
        self.potentials[to] = self.potentials[to].combine(&ratio, ctr);
        self.separators[edge] = fresh;
        Ok(())
    }

    fn family_contraction(
        &mut self,
        root: usize,
        family: &[VarId],
        ctr: &mut OpCounter,
    ) -> Result<Table> {
        let c = self.potentials[root].contract(ctr).marginal(family, ctr)?;
        onto_family(&c, family, &self.jt)
    }

    /// Multiplies the policy into the root's probability part. A policy that
    /// replaces an earlier strictly positive one is installed as the ratio of
    /// the two; anything else would need a retraction.
    fn install_policy(&mut self, root: usize, policy: &Policy, ctr: &mut OpCounter) -> Result<()> {
        let factor = match self.installed.get(&policy.decision) {
            None => policy.table.clone(),
            Some(old) if old.values().iter().all(|&x| x > 0.0) => policy.table.divide(old, ctr)?,
            Some(_) => return Err(Error::HuginCannotRetract),
        };
        let pot = &mut self.potentials[root];
        pot.p = pot.p.multiply(&factor, ctr);
        self.installed.insert(policy.decision, policy.table.clone());
        Ok(())
    }

    fn retract_policy(&mut self, _root: usize, _d: VarId) -> Result<()> {
        Err(Error::HuginCannotRetract)
    }

    fn expected_utility(&mut self, root: usize, ctr: &mut OpCounter) -> Result<f64> {
        let c = self.potentials[root].contract(ctr).marginal(&[], ctr)?;
        Ok(c.values()[0])
    }
}
