//! The three propagation architectures behind a common engine interface.
//!
//! An engine owns the initialized junction tree and whatever it stores on
//! cliques and edges. Message scheduling (which messages are still valid)
//! lives in the solver; an engine only computes what it is asked to.

pub mod hugin;
pub mod lp;
pub mod ss;

use std::fmt;
use std::str::FromStr;

use crate::compile::JunctionTree;
use crate::error::Result;
use crate::model::{Limid, Policy, VarId};
use crate::table::{OpCounter, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Arch {
    ShaferShenoy,
    Hugin,
    Lazy,
}

impl Arch {
    pub const ALL: [Arch; 3] = [Arch::ShaferShenoy, Arch::Hugin, Arch::Lazy];

    /// Row label used in reports.
    pub fn label(self) -> &'static str {
        match self {
            Arch::ShaferShenoy => "S-S",
            Arch::Hugin => "HUGIN",
            Arch::Lazy => "LP",
        }
    }

    pub fn can_retract(self) -> bool {
        self != Arch::Hugin
    }
}

impl fmt::Display for Arch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Arch {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "ss" | "s-s" | "shafer-shenoy" => Ok(Arch::ShaferShenoy),
            "hugin" => Ok(Arch::Hugin),
            "lp" | "lazy" => Ok(Arch::Lazy),
            other => Err(format!(
                "unknown architecture {other:?} (expected ss, hugin or lp)"
            )),
        }
    }
}

pub trait Engine: Send {
    fn arch(&self) -> Arch;

    fn junction_tree(&self) -> &JunctionTree;

    /// Operations spent building the initial clique potentials.
    fn init_ops(&self) -> OpCounter;

    /// Computes the message `from -> to` and stores it on the edge. Every
    /// other neighbour of `from` must already have sent to `from`.
    fn send(&mut self, from: usize, to: usize, ctr: &mut OpCounter) -> Result<()>;

    /// `c_fa(d)` at a root that has received from all its neighbours, laid
    /// out over `family` in the given order.
    fn family_contraction(
        &mut self,
        root: usize,
        family: &[VarId],
        ctr: &mut OpCounter,
    ) -> Result<Table>;

    /// Attaches a policy to clique `root`, which must contain its family.
    fn install_policy(&mut self, root: usize, policy: &Policy, ctr: &mut OpCounter) -> Result<()>;

    /// Removes the policy for `d` from clique `root`.
    fn retract_policy(&mut self, root: usize, d: VarId) -> Result<()>;

    /// Expected utility read off a fully collected root.
    fn expected_utility(&mut self, root: usize, ctr: &mut OpCounter) -> Result<f64>;
}

/// Builds the engine for `arch` on a junction tree compiled from `limid`.
pub fn new_engine(arch: Arch, limid: &Limid, jt: JunctionTree) -> Box<dyn Engine> {
    match arch {
        Arch::ShaferShenoy => Box::new(ss::ShaferShenoy::new(limid, jt)),
        Arch::Hugin => Box::new(hugin::Hugin::new(limid, jt)),
        Arch::Lazy => Box::new(lp::Lazy::new(limid, jt)),
    }
}

/// Lays a contraction out over `family`, broadcasting missing variables.
pub(crate) fn onto_family(t: &Table, family: &[VarId], jt: &JunctionTree) -> Result<Table> {
    t.extend_to(family, &jt.cards_of(family))
}
