//! Single Policy Updating over a junction tree.
//!
//! Decisions are updated last-first. Each update collects messages towards
//! a root clique holding the decision's family, reads off the family
//! contraction, and installs the maximizing deterministic policy. Messages
//! stay valid until a policy change upstream of them, so after the first
//! full collect only the path between consecutive roots is recomputed.

use crate::arch::{new_engine, Arch, Engine};
use crate::compile::{check_soluble, compile, reduce, JunctionTree};
use crate::error::{Error, Result};
use crate::model::{Limid, Policy, Strategy, VarId};
use crate::table::{argmax_slice, OpCounter, Table};

/// Upper bound on update cycles for general diagrams.
pub const MAX_CYCLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Schedule {
    /// Reuse valid messages; recompute only what a policy change spoiled.
    #[default]
    Partial,
    /// Forget every message before each collect.
    FullCollects,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SolveOptions {
    pub schedule: Schedule,
    /// Install uniform policies up front instead of leaving them out.
    pub explicit_uniform: bool,
}

/// Per-direction message validity.
#[derive(Debug, Clone)]
pub struct Collector {
    valid: Vec<bool>,
}

impl Collector {
    pub fn new(jt: &JunctionTree) -> Self {
        Collector {
            valid: vec![false; jt.num_directions()],
        }
    }

    pub fn invalidate_all(&mut self) {
        self.valid.iter_mut().for_each(|v| *v = false);
    }

    /// Marks every message pointing away from clique `h` as stale.
    pub fn invalidate_from(&mut self, jt: &JunctionTree, h: usize) {
        let mut stack = vec![(h, usize::MAX)];
        while let Some((c, parent)) = stack.pop() {
            for &(n, _) in jt.neighbours(c) {
                if n != parent {
                    self.valid[jt.direction(c, n)] = false;
                    stack.push((n, c));
                }
            }
        }
    }

    /// Brings every message into `root` up to date, children first, calling
    /// `send` for each message that has to be (re)computed.
    pub fn collect(
        &mut self,
        jt: &JunctionTree,
        root: usize,
        send: &mut dyn FnMut(usize, usize) -> Result<()>,
    ) -> Result<()> {
        for &(n, _) in jt.neighbours(root) {
            self.ensure(jt, n, root, send)?;
        }
        Ok(())
    }

    fn ensure(
        &mut self,
        jt: &JunctionTree,
        from: usize,
        to: usize,
        send: &mut dyn FnMut(usize, usize) -> Result<()>,
    ) -> Result<()> {
        let dir = jt.direction(from, to);
        if self.valid[dir] {
            return Ok(());
        }
        for &(m, _) in jt.neighbours(from) {
            if m != to {
                self.ensure(jt, m, from, send)?;
            }
        }
        send(from, to)?;
        self.valid[dir] = true;
        Ok(())
    }

    fn union(&mut self, other: &Collector) {
        for (a, b) in self.valid.iter_mut().zip(&other.valid) {
            *a |= *b;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveStep {
    pub decision: VarId,
    pub root: usize,
    pub messages: Vec<(usize, usize)>,
}

/// Roots per decision and the message schedule of one reverse pass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolvePlan {
    /// Root clique of each decision, in temporal order.
    pub roots: Vec<usize>,
    /// Steps in execution order, last decision first.
    pub steps: Vec<SolveStep>,
}

impl SolvePlan {
    pub fn num_messages(&self) -> usize {
        self.steps.iter().map(|s| s.messages.len()).sum()
    }
}

/// Chooses `R_i` as the lowest-indexed clique containing `fa(d_i)` and
/// simulates the collect schedule of one reverse pass.
pub fn plan_roots(jt: &JunctionTree, limid: &Limid, schedule: Schedule) -> Result<SolvePlan> {
    let roots = limid
        .decisions()
        .iter()
        .map(|&d| {
            jt.home_of(&limid.family(d))
                .ok_or_else(|| Error::NoQualifyingClique(limid.name(d).to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut collector = Collector::new(jt);
    let mut steps = Vec::new();
    for (i, &d) in limid.decisions().iter().enumerate().rev() {
        if schedule == Schedule::FullCollects {
            collector.invalidate_all();
        }
        let mut messages = Vec::new();
        collector.collect(jt, roots[i], &mut |a, b| {
            messages.push((a, b));
            Ok(())
        })?;
        collector.invalidate_from(jt, roots[i]);
        steps.push(SolveStep {
            decision: d,
            root: roots[i],
            messages,
        });
    }
    Ok(SolvePlan { roots, steps })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub arch: Arch,
    /// Deterministic policies over each decision's declared parents.
    pub strategy: Strategy,
    pub expected_utility: f64,
    /// Message passing and local optimization.
    pub ops: OpCounter,
    /// Building the initial clique potentials.
    pub init_ops: OpCounter,
    /// The final expected-utility readout.
    pub eu_ops: OpCounter,
    pub messages: usize,
    /// Update cycles that changed at least one policy.
    pub cycles: usize,
    /// Every policy replacement in order.
    pub history: Vec<Policy>,
}

/// Deterministic policy maximizing a family contraction laid out over
/// `(parents..., d)`. Ties go to `current` where it qualifies, otherwise to
/// the smallest action.
pub fn argmax_policy(d: VarId, contraction: &Table, current: Option<&[usize]>) -> Policy {
    let k = *contraction.cards().last().expect("family contains d");
    let actions: Vec<usize> = contraction
        .values()
        .chunks(k)
        .enumerate()
        .map(|(row, slice)| argmax_slice(slice, current.map(|c| c[row])))
        .collect();
    let vars = contraction.vars();
    Policy::degenerate(d, &vars[..vars.len() - 1], contraction.cards(), &actions)
}

/// Re-expresses a policy of the reduced diagram over the declared parents.
fn expand_policy(original: &Limid, policy: &Policy) -> Policy {
    let fa = original.family(policy.decision);
    let cards = original.cards_of(&fa);
    Policy {
        decision: policy.decision,
        table: policy
            .table
            .extend_to(&fa, &cards)
            .expect("reduced family is a subset"),
    }
}

struct Session<'a> {
    limid: &'a Limid,
    engine: Box<dyn Engine>,
    collector: Collector,
    roots: Vec<usize>,
    ops: OpCounter,
    messages: usize,
}

impl<'a> Session<'a> {
    fn new(arch: Arch, limid: &'a Limid) -> Result<Self> {
        let jt = compile(limid)?;
        let plan = plan_roots(&jt, limid, Schedule::Partial)?;
        Ok(Session {
            collector: Collector::new(&jt),
            engine: new_engine(arch, limid, jt),
            roots: plan.roots,
            limid,
            ops: OpCounter::new(),
            messages: 0,
        })
    }

    fn collect(&mut self, root: usize) -> Result<()> {
        let Session {
            engine,
            collector,
            ops,
            messages,
            ..
        } = self;
        let jt = engine.junction_tree().clone();
        collector.collect(&jt, root, &mut |a, b| {
            *messages += 1;
            engine.send(a, b, ops)
        })
    }

    fn optimize(&mut self, i: usize, current: Option<&Policy>) -> Result<Policy> {
        let d = self.limid.decisions()[i];
        let fa = self.limid.family(d);
        let c = self
            .engine
            .family_contraction(self.roots[i], &fa, &mut self.ops)?;
        let actions = current.and_then(Policy::actions);
        Ok(argmax_policy(d, &c, actions.as_deref()))
    }

    fn install(&mut self, i: usize, policy: &Policy) -> Result<()> {
        let root = self.roots[i];
        self.engine.install_policy(root, policy, &mut self.ops)?;
        let jt = self.engine.junction_tree();
        self.collector.invalidate_from(jt, root);
        Ok(())
    }

    fn retract(&mut self, i: usize) -> Result<()> {
        let d = self.limid.decisions()[i];
        let root = self.roots[i];
        self.engine.retract_policy(root, d)?;
        let jt = self.engine.junction_tree();
        self.collector.invalidate_from(jt, root);
        Ok(())
    }

    fn expected_utility(&mut self) -> Result<(f64, OpCounter)> {
        let root = self.roots.first().copied().unwrap_or(0);
        self.collect(root)?;
        let mut ctr = OpCounter::new();
        let eu = self.engine.expected_utility(root, &mut ctr)?;
        Ok((eu, ctr))
    }
}

/// One reverse pass of SPU on a soluble diagram; the result is optimal.
pub fn solve_soluble(limid: &Limid, arch: Arch) -> Result<SolveResult> {
    solve_soluble_with(limid, arch, SolveOptions::default())
}

pub fn solve_soluble_with(limid: &Limid, arch: Arch, options: SolveOptions) -> Result<SolveResult> {
    check_soluble(limid)?;
    let reduced = reduce(limid);
    let mut s = Session::new(arch, &reduced)?;
    let k = reduced.decisions().len();
    let mut init_ops = s.engine.init_ops();
    if options.explicit_uniform {
        for i in 0..k {
            let uniform = reduced.uniform_policy(reduced.decisions()[i])?;
            s.engine
                .install_policy(s.roots[i], &uniform, &mut init_ops)?;
        }
    }
    let mut strategy = Strategy::new();
    let mut history = Vec::new();
    for i in (0..k).rev() {
        if options.schedule == Schedule::FullCollects {
            s.collector.invalidate_all();
        }
        s.collect(s.roots[i])?;
        if options.explicit_uniform && arch.can_retract() {
            s.retract(i)?;
        }
        let policy = s.optimize(i, None)?;
        s.install(i, &policy)?;
        let policy = expand_policy(limid, &policy);
        history.push(policy.clone());
        strategy.insert(policy);
    }
    if options.schedule == Schedule::FullCollects {
        s.collector.invalidate_all();
    }
    let (expected_utility, eu_ops) = s.expected_utility()?;
    Ok(SolveResult {
        arch,
        strategy,
        expected_utility,
        ops: s.ops,
        init_ops,
        eu_ops,
        messages: s.messages,
        cycles: usize::from(k > 0),
        history,
    })
}

/// SPU on an arbitrary diagram: starting from uniform policies, cycle through
/// the decisions last-first, retracting, re-optimizing and replacing each
/// policy, until a whole cycle leaves every policy unchanged.
pub fn spu_general(limid: &Limid, arch: Arch) -> Result<SolveResult> {
    if !arch.can_retract() {
        return Err(Error::HuginCannotRetract);
    }
    let reduced = reduce(limid);
    let mut s = Session::new(arch, &reduced)?;
    let k = reduced.decisions().len();
    let mut current: Vec<Option<Policy>> = vec![None; k];
    let mut history = Vec::new();
    let mut cycles = 0;
    loop {
        let mut changed = false;
        for i in (0..k).rev() {
            let before = s.collector.clone();
            if current[i].is_some() {
                s.retract(i)?;
            }
            s.collect(s.roots[i])?;
            let policy = s.optimize(i, current[i].as_ref())?;
            s.install(i, &policy)?;
            if current[i].as_ref() == Some(&policy) {
                s.collector.union(&before);
            } else {
                changed = true;
                history.push(expand_policy(limid, &policy));
                current[i] = Some(policy);
            }
        }
        if !changed {
            break;
        }
        cycles += 1;
        if cycles >= MAX_CYCLES {
            return Err(Error::NoConvergence(MAX_CYCLES));
        }
    }
    let (expected_utility, eu_ops) = s.expected_utility()?;
    let mut strategy = Strategy::new();
    for p in current.iter().flatten() {
        strategy.insert(expand_policy(limid, p));
    }
    Ok(SolveResult {
        arch,
        init_ops: s.engine.init_ops(),
        strategy,
        expected_utility,
        ops: s.ops,
        eu_ops,
        messages: s.messages,
        cycles,
        history,
    })
}
