//! Seeded random diagrams for the test suites and the `gen` command.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::compile::check_soluble;
use crate::error::{Error, Result};
use crate::model::{Limid, LimidBuilder, VarId};
use crate::oracle::strategy_count;

const MAX_ATTEMPTS: usize = 2000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenParams {
    pub chance: usize,
    pub decisions: usize,
    pub values: usize,
    pub cardinality: usize,
    /// Most parents drawn for a chance node or a value node.
    pub max_parents: usize,
    /// No-forgetting diagram when set; otherwise one that fails the
    /// solubility test.
    pub soluble: bool,
    /// Resample until the number of deterministic strategies is at most this.
    pub max_strategies: u128,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            chance: 4,
            decisions: 2,
            values: 2,
            cardinality: 2,
            max_parents: 2,
            soluble: true,
            max_strategies: 1 << 14,
        }
    }
}

fn pick(rng: &mut ChaCha8Rng, from: &[VarId], most: usize) -> Vec<VarId> {
    let m = rng.gen_range(0..=most.min(from.len()));
    let mut out: Vec<VarId> = from.choose_multiple(rng, m).copied().collect();
    out.sort_unstable();
    out
}

fn table(rng: &mut ChaCha8Rng, rows: usize, k: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(rows * k);
    for _ in 0..rows {
        let row: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
        let total: f64 = row.iter().sum();
        out.extend(row.into_iter().map(|x| x / total));
    }
    out
}

fn attempt(p: &GenParams, rng: &mut ChaCha8Rng) -> Limid {
    let n = p.chance + p.decisions;
    let k = p.cardinality;
    let mut positions: Vec<usize> = (0..n)
        .collect::<Vec<_>>()
        .choose_multiple(rng, p.decisions)
        .copied()
        .collect();
    positions.sort_unstable();
    let mut b = LimidBuilder::new();
    let mut previous: Option<Vec<VarId>> = None;
    let (mut nc, mut nd) = (0, 0);
    for i in 0..n {
        let earlier: Vec<VarId> = (0..i).map(VarId).collect();
        if positions.contains(&i) {
            let parents = if p.soluble {
                let chance_earlier: Vec<VarId> = earlier
                    .iter()
                    .copied()
                    .filter(|v| !positions.contains(&v.0))
                    .filter(|v| previous.as_ref().is_none_or(|fa| !fa.contains(v)))
                    .collect();
                let mut pa = previous.clone().unwrap_or_default();
                pa.extend(pick(rng, &chance_earlier, 1));
                pa.sort_unstable();
                pa
            } else {
                pick(rng, &earlier, p.max_parents)
            };
            nd += 1;
            let d = b.decision(&format!("d{nd}"), k, &parents);
            let mut fa = parents;
            fa.push(d);
            previous = Some(fa);
        } else {
            let parents = pick(rng, &earlier, p.max_parents);
            let rows = k.pow(parents.len() as u32);
            let cpt = table(rng, rows, k);
            nc += 1;
            b.chance(&format!("r{nc}"), k, &parents, cpt);
        }
    }
    let all: Vec<VarId> = (0..n).map(VarId).collect();
    for j in 0..p.values {
        let most = p.max_parents.clamp(1, 3);
        let mut parents = pick(rng, &all, most);
        if parents.is_empty() {
            parents.push(*all.choose(rng).expect("at least one variable"));
        }
        let cells = k.pow(parents.len() as u32);
        let utility = (0..cells).map(|_| rng.gen_range(-10.0..=10.0)).collect();
        b.value(&format!("u{}", j + 1), &parents, utility);
    }
    b.build().expect("generated diagram is valid")
}

/// Random diagram with variables in topological id order and decisions
/// declared in id order. Identical seeds give identical diagrams.
pub fn generate(params: &GenParams, seed: u64) -> Result<Limid> {
    if params.chance + params.decisions == 0 {
        return Err(Error::Infeasible(
            "diagram needs at least one variable".into(),
        ));
    }
    if params.cardinality == 0 {
        return Err(Error::Infeasible("cardinality must be positive".into()));
    }
    if !params.soluble && params.decisions < 2 {
        return Err(Error::Infeasible(
            "a non-soluble diagram needs at least two decisions".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_ATTEMPTS {
        let limid = attempt(params, &mut rng);
        if strategy_count(&limid) > params.max_strategies {
            continue;
        }
        if check_soluble(&limid).is_ok() == params.soluble {
            return Ok(limid);
        }
    }
    Err(Error::Infeasible(format!(
        "no diagram satisfying the constraints after {MAX_ATTEMPTS} attempts"
    )))
}
