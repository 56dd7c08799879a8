//! Dense tables over finite discrete variables.
//!
//! A [`Table`] stores one real per joint configuration of its ordered domain,
//! row-major with the last variable varying fastest. Every arithmetic
//! operation takes an [`OpCounter`] and charges one tick per scalar
//! operation. Broadcasting and reordering are free.

use std::fmt;
use std::ops::{Add, AddAssign};

use crate::error::{Error, Result};
use crate::model::VarId;

/// Relative tolerance under which two candidate actions are considered tied.
pub const TIE_TOLERANCE: f64 = 1e-10;

/// Number of scalar arithmetic operations executed.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OpCounter {
    pub sums: u64,
    pub mults: u64,
    pub divs: u64,
    pub subs: u64,
}

impl OpCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn total(&self) -> u64 {
        self.sums + self.mults + self.divs + self.subs
    }
}

impl Add for OpCounter {
    type Output = OpCounter;

    fn add(self, rhs: OpCounter) -> OpCounter {
        OpCounter {
            sums: self.sums + rhs.sums,
            mults: self.mults + rhs.mults,
            divs: self.divs + rhs.divs,
            subs: self.subs + rhs.subs,
        }
    }
}

impl AddAssign for OpCounter {
    fn add_assign(&mut self, rhs: OpCounter) {
        *self = *self + rhs;
    }
}

impl fmt::Display for OpCounter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "sums={} mults={} divs={} subs={} total={}",
            self.sums,
            self.mults,
            self.divs,
            self.subs,
            self.total()
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    vars: Vec<VarId>,
    cards: Vec<usize>,
    values: Vec<f64>,
}

/// Per-configuration maximizing index of one variable, see [`Table::argmax_over`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArgmaxTable {
    pub vars: Vec<VarId>,
    pub cards: Vec<usize>,
    pub index: Vec<usize>,
}

fn domain_size(cards: &[usize]) -> usize {
    cards.iter().product()
}

/// Stride of each `result` variable inside a table with domain `vars`/`cards`
/// (zero when the variable is absent).
fn strides_in(result: &[VarId], vars: &[VarId], cards: &[usize]) -> Vec<usize> {
    let mut own = vec![0; vars.len()];
    let mut s = 1;
    for i in (0..vars.len()).rev() {
        own[i] = s;
        s *= cards[i];
    }
    result
        .iter()
        .map(|v| vars.iter().position(|w| w == v).map_or(0, |i| own[i]))
        .collect()
}

/// Walks every configuration of `cards` in row-major order, calling `f` with
/// the matching flat offsets of each stride set.
fn odometer<const N: usize>(
    cards: &[usize],
    strides: [&[usize]; N],
    mut f: impl FnMut([usize; N]),
) {
    let total = domain_size(cards);
    let mut counter = vec![0usize; cards.len()];
    let mut offs = [0usize; N];
    for _ in 0..total {
        f(offs);
        for i in (0..cards.len()).rev() {
            counter[i] += 1;
            for k in 0..N {
                offs[k] += strides[k][i];
            }
            if counter[i] < cards[i] {
                break;
            }
            for k in 0..N {
                offs[k] -= strides[k][i] * cards[i];
            }
            counter[i] = 0;
        }
    }
}

impl Table {
    pub fn new(vars: Vec<VarId>, cards: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        assert_eq!(vars.len(), cards.len(), "one cardinality per variable");
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].contains(v) {
                return Err(Error::DuplicateVariable(*v));
            }
        }
        let expected = domain_size(&cards);
        if values.len() != expected {
            return Err(Error::Shape {
                expected,
                found: values.len(),
            });
        }
        Ok(Table {
            vars,
            cards,
            values,
        })
    }

    pub fn scalar(value: f64) -> Self {
        Table {
            vars: Vec::new(),
            cards: Vec::new(),
            values: vec![value],
        }
    }

    pub fn filled(vars: Vec<VarId>, cards: Vec<usize>, value: f64) -> Self {
        let n = domain_size(&cards);
        Table::new(vars, cards, vec![value; n]).expect("filled table is well-formed")
    }

    pub fn vars(&self) -> &[VarId] {
        &self.vars
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_scalar(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn contains(&self, v: VarId) -> bool {
        self.vars.contains(&v)
    }

    pub fn card_of(&self, v: VarId) -> Option<usize> {
        self.vars
            .iter()
            .position(|&w| w == v)
            .map(|i| self.cards[i])
    }

    /// Value at a configuration given in the table's own variable order.
    pub fn get(&self, config: &[usize]) -> f64 {
        debug_assert_eq!(config.len(), self.vars.len());
        let mut idx = 0;
        for (c, &k) in config.iter().zip(&self.cards) {
            idx = idx * k + c;
        }
        self.values[idx]
    }

    /// Value at a full assignment indexed by variable id.
    pub fn get_by_id(&self, assignment: &[usize]) -> f64 {
        let mut idx = 0;
        for (v, &k) in self.vars.iter().zip(&self.cards) {
            idx = idx * k + assignment[v.index()];
        }
        self.values[idx]
    }

    /// Broadcasts (and reorders) this table onto `vars`, which must contain
    /// every variable of the current domain.
    pub fn extend_to(&self, vars: &[VarId], cards: &[usize]) -> Result<Table> {
        for v in &self.vars {
            if !vars.contains(v) {
                return Err(Error::UnknownVariable(*v));
            }
        }
        let strides = strides_in(vars, &self.vars, &self.cards);
        let mut out = Vec::with_capacity(domain_size(cards));
        odometer(cards, [&strides], |[i]| out.push(self.values[i]));
        Table::new(vars.to_vec(), cards.to_vec(), out)
    }

    /// Same function, variables listed in `order` (a permutation of the domain).
    pub fn reorder(&self, order: &[VarId]) -> Result<Table> {
        if order.len() != self.vars.len() {
            return Err(Error::Shape {
                expected: self.vars.len(),
                found: order.len(),
            });
        }
        let cards = order
            .iter()
            .map(|&v| self.card_of(v).ok_or(Error::UnknownVariable(v)))
            .collect::<Result<Vec<_>>>()?;
        self.extend_to(order, &cards)
    }

    fn union_domain(&self, other: &Table) -> (Vec<VarId>, Vec<usize>) {
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        for (v, &k) in other.vars.iter().zip(&other.cards) {
            if !vars.contains(v) {
                vars.push(*v);
                cards.push(k);
            }
        }
        (vars, cards)
    }

    fn zip_with(&self, other: &Table, mut f: impl FnMut(f64, f64) -> f64) -> Table {
        let (vars, cards) = self.union_domain(other);
        let sa = strides_in(&vars, &self.vars, &self.cards);
        let sb = strides_in(&vars, &other.vars, &other.cards);
        let mut out = Vec::with_capacity(domain_size(&cards));
        odometer(&cards, [&sa, &sb], |[i, j]| {
            out.push(f(self.values[i], other.values[j]))
        });
        Table {
            vars,
            cards,
            values: out,
        }
    }

    pub fn multiply(&self, other: &Table, ctr: &mut OpCounter) -> Table {
        let out = self.zip_with(other, |a, b| a * b);
        ctr.mults += out.len() as u64;
        out
    }

    pub fn add(&self, other: &Table, ctr: &mut OpCounter) -> Table {
        let out = self.zip_with(other, |a, b| a + b);
        ctr.sums += out.len() as u64;
        out
    }

    pub fn subtract(&self, other: &Table, ctr: &mut OpCounter) -> Table {
        let out = self.zip_with(other, |a, b| a - b);
        ctr.subs += out.len() as u64;
        out
    }

    /// Cellwise quotient with `0/0 = 0`; a nonzero numerator over zero fails.
    pub fn divide(&self, other: &Table, ctr: &mut OpCounter) -> Result<Table> {
        let mut bad = None;
        let mut cell = 0;
        let out = self.zip_with(other, |a, b| {
            let r = if b == 0.0 {
                if a != 0.0 && bad.is_none() {
                    bad = Some(cell);
                }
                0.0
            } else {
                a / b
            };
            cell += 1;
            r
        });
        if let Some(cell) = bad {
            return Err(Error::DivideByZero { cell });
        }
        ctr.divs += out.len() as u64;
        Ok(out)
    }

    /// Cellwise scaling by a constant, charged as one multiplication per cell.
    pub fn scale(&self, factor: f64, ctr: &mut OpCounter) -> Table {
        ctr.mults += self.len() as u64;
        Table {
            vars: self.vars.clone(),
            cards: self.cards.clone(),
            values: self.values.iter().map(|x| x * factor).collect(),
        }
    }

    /// Sums out `vars`. A k-term sum costs k-1 additions per result cell.
    pub fn sum_out(&self, vars: &[VarId], ctr: &mut OpCounter) -> Result<Table> {
        for v in vars {
            if !self.contains(*v) {
                return Err(Error::UnknownVariable(*v));
            }
        }
        if vars.is_empty() {
            return Ok(self.clone());
        }
        let keep: Vec<usize> = (0..self.vars.len())
            .filter(|&i| !vars.contains(&self.vars[i]))
            .collect();
        let out_vars: Vec<VarId> = keep.iter().map(|&i| self.vars[i]).collect();
        let out_cards: Vec<usize> = keep.iter().map(|&i| self.cards[i]).collect();
        let out_strides = strides_in(&self.vars, &out_vars, &out_cards);
        let own_strides = strides_in(&self.vars, &self.vars, &self.cards);
        let mut out = vec![0.0; domain_size(&out_cards)];
        let mut seen = vec![false; out.len()];
        odometer(&self.cards, [&own_strides, &out_strides], |[i, o]| {
            if seen[o] {
                out[o] += self.values[i];
            } else {
                out[o] = self.values[i];
                seen[o] = true;
            }
        });
        let k = self.len() / out.len().max(1);
        if k > 1 {
            ctr.sums += ((k - 1) * out.len()) as u64;
        }
        Table::new(out_vars, out_cards, out)
    }

    /// Sums out everything outside `keep`.
    pub fn marginal(&self, keep: &[VarId], ctr: &mut OpCounter) -> Result<Table> {
        let drop: Vec<VarId> = self
            .vars
            .iter()
            .copied()
            .filter(|v| !keep.contains(v))
            .collect();
        self.sum_out(&drop, ctr)
    }

    /// For each configuration of the remaining variables, the smallest index
    /// of `d` whose value is within [`TIE_TOLERANCE`] of the maximum.
    pub fn argmax_over(&self, d: VarId) -> Result<ArgmaxTable> {
        let pos = self
            .vars
            .iter()
            .position(|&v| v == d)
            .ok_or(Error::UnknownVariable(d))?;
        let mut order: Vec<VarId> = self.vars.clone();
        order.remove(pos);
        order.push(d);
        let t = self.reorder(&order)?;
        let k = self.cards[pos];
        let index = t
            .values
            .chunks(k)
            .map(|slice| argmax_slice(slice, None))
            .collect();
        let mut cards = t.cards.clone();
        cards.pop();
        order.pop();
        Ok(ArgmaxTable {
            vars: order,
            cards,
            index,
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Largest cellwise difference after aligning `other` to this domain.
    /// Returns `None` when the domains differ as sets.
    pub fn max_abs_diff(&self, other: &Table) -> Option<f64> {
        if self.vars.len() != other.vars.len() || !self.vars.iter().all(|v| other.contains(*v)) {
            return None;
        }
        let o = other.reorder(&self.vars).ok()?;
        Some(
            self.values
                .iter()
                .zip(&o.values)
                .fold(0.0, |m, (a, b)| m.max((a - b).abs())),
        )
    }

    /// Like [`Table::max_abs_diff`] but tolerates variables on which either
    /// table is constant being absent from the other.
    pub fn max_abs_diff_broadcast(&self, other: &Table) -> f64 {
        let (vars, cards) = self.union_domain(other);
        let a = self
            .extend_to(&vars, &cards)
            .expect("union contains domain");
        let b = other
            .extend_to(&vars, &cards)
            .expect("union contains domain");
        a.values
            .iter()
            .zip(&b.values)
            .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }
}

/// Index of the maximum in `slice`, ties within tolerance resolved towards
/// `prefer` when it qualifies and otherwise towards the smallest index.
pub fn argmax_slice(slice: &[f64], prefer: Option<usize>) -> usize {
    let max = slice.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scale = slice.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let tol = TIE_TOLERANCE * scale;
    if let Some(p) = prefer {
        if slice[p] >= max - tol {
            return p;
        }
    }
    slice
        .iter()
        .position(|&x| x >= max - tol)
        .expect("non-empty slice")
}
