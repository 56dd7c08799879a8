//! Deterministic text and CSV renderings of solve and compare results.

use std::fmt::Write as _;

use crate::arch::Arch;
use crate::model::{Limid, Policy, Strategy};
use crate::spu::SolveResult;
use crate::table::{argmax_slice, OpCounter};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Text,
    Csv,
}

/// `(configuration label, chosen action)` per parent configuration.
pub fn policy_rows(limid: &Limid, policy: &Policy) -> Vec<(String, usize)> {
    let parents = policy.parents();
    let cards = limid.cards_of(parents);
    let k = limid.cardinality(policy.decision);
    let mut config = vec![0; parents.len()];
    let mut rows = Vec::new();
    for slice in policy.table.values().chunks(k) {
        let label = if parents.is_empty() {
            "-".to_string()
        } else {
            parents
                .iter()
                .zip(&config)
                .map(|(&p, x)| format!("{}={x}", limid.name(p)))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let action = argmax_slice(slice, None);
        rows.push((label, action));
        for i in (0..config.len()).rev() {
            config[i] += 1;
            if config[i] < cards[i] {
                break;
            }
            config[i] = 0;
        }
    }
    rows
}

fn strategy_text(limid: &Limid, strategy: &Strategy, out: &mut String) {
    for &d in limid.decisions() {
        let Some(policy) = strategy.get(d) else {
            continue;
        };
        let parents: Vec<&str> = policy.parents().iter().map(|&p| limid.name(p)).collect();
        let _ = writeln!(out, "policy {} | {}", limid.name(d), parents.join(", "));
        for (label, action) in policy_rows(limid, policy) {
            let _ = writeln!(out, "  {label} -> {action}");
        }
    }
}

pub fn solve_text(limid: &Limid, res: &SolveResult) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "architecture: {}", res.arch);
    strategy_text(limid, &res.strategy, &mut out);
    let _ = writeln!(out, "expected utility: {}", res.expected_utility);
    let _ = writeln!(out, "operations: {}", res.ops);
    let _ = writeln!(out, "initialization: {}", res.init_ops);
    let _ = writeln!(out, "readout: {}", res.eu_ops);
    let _ = writeln!(out, "messages: {}", res.messages);
    let _ = writeln!(out, "cycles: {}", res.cycles);
    out
}

fn counter_records(out: &mut String, prefix: &str, c: &OpCounter) {
    for (name, v) in [
        ("sums", c.sums),
        ("mults", c.mults),
        ("divs", c.divs),
        ("subs", c.subs),
        ("total", c.total()),
    ] {
        let _ = writeln!(out, "{prefix},{name},{v}");
    }
}

pub fn solve_csv(limid: &Limid, res: &SolveResult) -> String {
    let mut out = String::from("record,key,value\n");
    let _ = writeln!(out, "architecture,,{}", res.arch);
    for &d in limid.decisions() {
        if let Some(policy) = res.strategy.get(d) {
            for (label, action) in policy_rows(limid, policy) {
                let _ = writeln!(out, "policy,{}[{label}],{action}", limid.name(d));
            }
        }
    }
    let _ = writeln!(out, "expected_utility,,{}", res.expected_utility);
    counter_records(&mut out, "ops", &res.ops);
    counter_records(&mut out, "init", &res.init_ops);
    counter_records(&mut out, "readout", &res.eu_ops);
    let _ = writeln!(out, "messages,,{}", res.messages);
    let _ = writeln!(out, "cycles,,{}", res.cycles);
    out
}

/// Strategy and EU found by enumeration.
pub fn oracle_text(limid: &Limid, strategy: &Strategy, eu: f64) -> String {
    let mut out = String::from("architecture: oracle\n");
    strategy_text(limid, strategy, &mut out);
    let _ = writeln!(out, "expected utility: {eu}");
    out
}

/// Operation counts per architecture, one row per architecture plus initialization rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    pub rows: Vec<(Arch, OpCounter)>,
    /// Shared by S-S and HUGIN.
    pub init_paired: OpCounter,
    pub init_lp: OpCounter,
    pub expected_utility: f64,
}

impl CompareReport {
    pub fn from_results(results: &[SolveResult]) -> Self {
        let init_paired = results
            .iter()
            .find(|r| r.arch != Arch::Lazy)
            .map(|r| r.init_ops)
            .unwrap_or_default();
        let init_lp = results
            .iter()
            .find(|r| r.arch == Arch::Lazy)
            .map(|r| r.init_ops)
            .unwrap_or_default();
        CompareReport {
            rows: results.iter().map(|r| (r.arch, r.ops)).collect(),
            init_paired,
            init_lp,
            expected_utility: results.first().map_or(0.0, |r| r.expected_utility),
        }
    }

    pub fn total(&self, arch: Arch) -> Option<u64> {
        self.rows
            .iter()
            .find(|(a, _)| *a == arch)
            .map(|(_, c)| c.total())
    }

    fn lines(&self) -> Vec<(String, OpCounter)> {
        let mut lines: Vec<(String, OpCounter)> = self
            .rows
            .iter()
            .map(|(a, c)| (a.label().to_string(), *c))
            .collect();
        lines.push(("Init S-S/HUGIN".to_string(), self.init_paired));
        lines.push(("Init LP".to_string(), self.init_lp));
        lines
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("Algorithm,Sums,Mults,Divs,Subs,Total\n");
        for (label, c) in self.lines() {
            let _ = writeln!(
                out,
                "{label},{},{},{},{},{}",
                c.sums,
                c.mults,
                c.divs,
                c.subs,
                c.total()
            );
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{:<16}{:>8}{:>8}{:>8}{:>8}{:>8}\n",
            "Algorithm", "Sums", "Mults", "Divs", "Subs", "Total"
        );
        for (label, c) in self.lines() {
            let _ = writeln!(
                out,
                "{label:<16}{:>8}{:>8}{:>8}{:>8}{:>8}",
                c.sums,
                c.mults,
                c.divs,
                c.subs,
                c.total()
            );
        }
        let _ = writeln!(out, "expected utility: {}", self.expected_utility);
        out
    }
}
