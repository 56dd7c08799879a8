//! Brute-force reference computations by full enumeration. Slow on purpose:
//! every quantity is a plain sum over all configurations of all variables.

use crate::error::{Error, Result};
use crate::model::{Limid, Policy, Strategy, VarId};
use crate::table::{argmax_slice, Table};

pub const DEFAULT_CELL_CAP: u128 = 1 << 20;
pub const DEFAULT_STRATEGY_CAP: u128 = 1 << 20;

fn joint_size(limid: &Limid, cap: u128) -> Result<usize> {
    let size = limid
        .cardinalities()
        .iter()
        .fold(1u128, |acc, &k| acc.saturating_mul(k as u128));
    if size > cap {
        return Err(Error::TooLarge {
            what: "joint table",
            size,
            cap,
        });
    }
    Ok(size as usize)
}

/// Calls `f` with every full configuration, last variable fastest.
fn for_each_config(cards: &[usize], mut f: impl FnMut(&[usize])) {
    let mut x = vec![0; cards.len()];
    loop {
        f(&x);
        let mut i = cards.len();
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            x[i] += 1;
            if x[i] < cards[i] {
                break;
            }
            x[i] = 0;
        }
    }
}

/// Product of every cpt and of the policies present in `strategy` at `x`.
fn weight(limid: &Limid, strategy: &Strategy, x: &[usize]) -> f64 {
    let mut w = 1.0;
    for r in limid.chance_nodes() {
        w *= limid.cpt(r).expect("chance node").get_by_id(x);
    }
    for &d in limid.decisions() {
        if let Some(p) = strategy.get(d) {
            w *= p.table.get_by_id(x);
        }
    }
    w
}

fn utility(limid: &Limid, x: &[usize]) -> f64 {
    limid.values().iter().map(|u| u.utility.get_by_id(x)).sum()
}

fn require_cover(limid: &Limid, strategy: &Strategy) -> Result<()> {
    match limid
        .decisions()
        .iter()
        .find(|d| strategy.get(**d).is_none())
    {
        Some(&d) => Err(Error::MissingPolicy(d)),
        None => Ok(()),
    }
}

/// `f_q` over all variables in id order.
pub fn joint_distribution(limid: &Limid, strategy: &Strategy, cap: u128) -> Result<Table> {
    require_cover(limid, strategy)?;
    let size = joint_size(limid, cap)?;
    let cards = limid.cardinalities();
    let mut values = Vec::with_capacity(size);
    for_each_config(&cards, |x| values.push(weight(limid, strategy, x)));
    let vars = (0..limid.num_vars()).map(VarId).collect();
    Table::new(vars, cards, values)
}

/// `EU(q) = Σ_x f_q(x) U(x)`.
pub fn brute_eu(limid: &Limid, strategy: &Strategy, cap: u128) -> Result<f64> {
    require_cover(limid, strategy)?;
    joint_size(limid, cap)?;
    let mut eu = 0.0;
    for_each_config(&limid.cardinalities(), |x| {
        eu += weight(limid, strategy, x) * utility(limid, x);
    });
    Ok(eu)
}

/// Best deterministic policy for `d` when the other decisions follow the
/// policies in `partial` (absent ones contribute a factor of one). Ties go
/// to the smallest action.
pub fn brute_policy_update(
    limid: &Limid,
    partial: &Strategy,
    d: VarId,
    cap: u128,
) -> Result<Policy> {
    if d.0 >= limid.num_vars() || !limid.is_decision(d) {
        return Err(Error::UnknownDecision(d));
    }
    joint_size(limid, cap)?;
    let others = partial.without(d);
    let fa = limid.family(d);
    let fa_cards = limid.cards_of(&fa);
    let mut acc = vec![0.0; fa_cards.iter().product()];
    for_each_config(&limid.cardinalities(), |x| {
        let mut idx = 0;
        for (v, &k) in fa.iter().zip(&fa_cards) {
            idx = idx * k + x[v.0];
        }
        acc[idx] += weight(limid, &others, x) * utility(limid, x);
    });
    let k = *fa_cards.last().expect("family contains d");
    let actions: Vec<usize> = acc
        .chunks(k)
        .map(|slice| argmax_slice(slice, None))
        .collect();
    Ok(Policy::degenerate(
        d,
        &fa[..fa.len() - 1],
        &fa_cards,
        &actions,
    ))
}

/// Number of deterministic strategies.
pub fn strategy_count(limid: &Limid) -> u128 {
    limid.decisions().iter().fold(1u128, |acc, &d| {
        let rows: u128 = limid
            .cards_of(limid.parents(d))
            .iter()
            .map(|&k| k as u128)
            .product();
        let k = limid.cardinality(d) as u128;
        let per = u32::try_from(rows)
            .ok()
            .and_then(|r| k.checked_pow(r))
            .unwrap_or(u128::MAX);
        acc.saturating_mul(per)
    })
}

/// Evaluates deterministic strategies quickly: decisions are filled in from
/// their policies in topological order, so only chance configurations are
/// enumerated.
struct DeterministicEvaluator<'a> {
    limid: &'a Limid,
    order: Vec<VarId>,
    chance: Vec<VarId>,
    chance_cards: Vec<usize>,
}

impl<'a> DeterministicEvaluator<'a> {
    fn new(limid: &'a Limid) -> Self {
        let chance: Vec<VarId> = limid.chance_nodes().collect();
        DeterministicEvaluator {
            order: limid.topological_order(),
            chance_cards: limid.cards_of(&chance),
            chance,
            limid,
        }
    }

    /// `actions[i][row]` is decision `i`'s action at parent configuration `row`.
    fn eu(&self, actions: &[Vec<usize>]) -> f64 {
        let l = self.limid;
        let ds = l.decisions();
        let mut x = vec![0; l.num_vars()];
        let mut eu = 0.0;
        for_each_config(&self.chance_cards, |c| {
            for (v, &val) in self.chance.iter().zip(c) {
                x[v.0] = val;
            }
            let mut w = 1.0;
            for &v in &self.order {
                if let Some(i) = ds.iter().position(|&d| d == v) {
                    let mut row = 0;
                    for &p in l.parents(v) {
                        row = row * l.cardinality(p) + x[p.0];
                    }
                    x[v.0] = actions[i][row];
                } else {
                    w *= l.cpt(v).expect("chance node").get_by_id(&x);
                    if w == 0.0 {
                        break;
                    }
                }
            }
            if w != 0.0 {
                eu += w * utility(l, &x);
            }
        });
        eu
    }
}

/// Globally optimal deterministic strategy by enumeration, scanning strategies
/// in lexicographic order of (decision, parent configuration, action) and
/// keeping the first one that attains the maximum.
pub fn brute_optimal(limid: &Limid, cell_cap: u128, strategy_cap: u128) -> Result<(Strategy, f64)> {
    let count = strategy_count(limid);
    if count > strategy_cap {
        return Err(Error::TooLarge {
            what: "strategy space",
            size: count,
            cap: strategy_cap,
        });
    }
    joint_size(limid, cell_cap)?;
    let ds = limid.decisions();
    let rows: Vec<usize> = ds
        .iter()
        .map(|&d| limid.cards_of(limid.parents(d)).iter().product())
        .collect();
    let mut slot_cards = Vec::new();
    for (i, &d) in ds.iter().enumerate() {
        slot_cards.extend(std::iter::repeat_n(limid.cardinality(d), rows[i]));
    }
    let eval = DeterministicEvaluator::new(limid);
    let split = |slots: &[usize]| -> Vec<Vec<usize>> {
        let mut out = Vec::with_capacity(ds.len());
        let mut at = 0;
        for &r in &rows {
            out.push(slots[at..at + r].to_vec());
            at += r;
        }
        out
    };
    let mut best: Option<(Vec<usize>, f64)> = None;
    for_each_config(&slot_cards, |slots| {
        let eu = eval.eu(&split(slots));
        let better = match &best {
            None => true,
            Some((_, b)) => eu > b + 1e-12 * b.abs().max(1.0),
        };
        if better {
            best = Some((slots.to_vec(), eu));
        }
    });
    let (slots, eu) = best.expect("at least one strategy");
    let mut strategy = Strategy::new();
    for (i, acts) in split(&slots).into_iter().enumerate() {
        let d = ds[i];
        let fa = limid.family(d);
        let cards = limid.cards_of(&fa);
        strategy.insert(Policy::degenerate(d, &fa[..fa.len() - 1], &cards, &acts));
    }
    Ok((strategy, eu))
}

/// Largest EU gain any single-policy deviation from `strategy` achieves.
pub fn best_single_deviation_gain(limid: &Limid, strategy: &Strategy, cap: u128) -> Result<f64> {
    let base = brute_eu(limid, strategy, cap)?;
    let mut gain = f64::NEG_INFINITY;
    for &d in limid.decisions() {
        let best = brute_policy_update(limid, strategy, d, cap)?;
        let mut s = strategy.clone();
        s.insert(best);
        gain = gain.max(brute_eu(limid, &s, cap)? - base);
    }
    Ok(if gain.is_finite() { gain } else { 0.0 })
}
