//! Hierarchical repetition grammars: Sequitur induction, deterministic
//! expansion, pathway assembly index, and rule-topology export.

mod sequitur;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use sequitur::induce;

/// Dense rule identifier. The root rule is always id 0.
pub type RuleId = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GrammarError {
    #[error("cannot induce a grammar from an empty sequence")]
    EmptyInput,
    #[error("rule p{referrer} references nonexistent rule p{target}")]
    DanglingRef { referrer: RuleId, target: RuleId },
    #[error("rule p{0} has an empty right-hand side")]
    EmptyRhs(RuleId),
    #[error("rule reference graph contains a cycle through p{0}")]
    Cyclic(RuleId),
    #[error("root rule p{0} is missing")]
    MissingRoot(RuleId),
}

/// One slot on a rule's right-hand side: a terminal token or a reference
/// to another rule.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Symbol<T> {
    Terminal(T),
    Ref(RuleId),
}

impl<T> Symbol<T> {
    pub fn as_ref_id(&self) -> Option<RuleId> {
        match self {
            Symbol::Ref(id) => Some(*id),
            Symbol::Terminal(_) => None,
        }
    }

    pub fn is_terminal(&self) -> bool {
        matches!(self, Symbol::Terminal(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rule<T> {
    pub rhs: Vec<Symbol<T>>,
}

/// A context-free grammar in which every rule has exactly one production.
///
/// Freshly induced grammars satisfy the Sequitur constraints (digram
/// uniqueness, rule utility); mutated grammars only guarantee integrity
/// (acyclic, non-empty RHSs, resolvable references).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grammar<T> {
    rules: BTreeMap<RuleId, Rule<T>>,
    root: RuleId,
}

impl<T: Clone + Eq + Ord> Grammar<T> {
    pub fn new(rules: BTreeMap<RuleId, Rule<T>>, root: RuleId) -> Self {
        Grammar { rules, root }
    }

    pub fn root(&self) -> RuleId {
        self.root
    }

    pub fn rules(&self) -> &BTreeMap<RuleId, Rule<T>> {
        &self.rules
    }

    pub fn rules_mut(&mut self) -> &mut BTreeMap<RuleId, Rule<T>> {
        &mut self.rules
    }

    pub fn rule(&self, id: RuleId) -> Option<&Rule<T>> {
        self.rules.get(&id)
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Pathway assembly index: the number of binary joins needed to build
    /// the sequence, `sum(|rhs| - 1)` over all rules.
    pub fn pai(&self) -> usize {
        self.rules
            .values()
            .map(|r| r.rhs.len().saturating_sub(1))
            .sum()
    }

    /// Distinct terminals occurring anywhere in the grammar, in sorted order.
    pub fn terminal_alphabet(&self) -> Vec<T> {
        let set: BTreeSet<&T> = self
            .rules
            .values()
            .flat_map(|r| r.rhs.iter())
            .filter_map(|s| match s {
                Symbol::Terminal(t) => Some(t),
                Symbol::Ref(_) => None,
            })
            .collect();
        set.into_iter().cloned().collect()
    }

    /// Number of reference sites for each rule across all RHSs.
    pub fn reference_counts(&self) -> BTreeMap<RuleId, usize> {
        let mut counts: BTreeMap<RuleId, usize> = self.rules.keys().map(|&id| (id, 0)).collect();
        for rule in self.rules.values() {
            for sym in &rule.rhs {
                if let Symbol::Ref(id) = sym {
                    *counts.entry(*id).or_insert(0) += 1;
                }
            }
        }
        counts
    }

    /// Checks structural integrity: root present, RHSs non-empty, every
    /// reference resolvable, reference graph acyclic.
    pub fn check_integrity(&self) -> Result<(), GrammarError> {
        if !self.rules.contains_key(&self.root) {
            return Err(GrammarError::MissingRoot(self.root));
        }
        for (&id, rule) in &self.rules {
            if rule.rhs.is_empty() {
                return Err(GrammarError::EmptyRhs(id));
            }
            for sym in &rule.rhs {
                if let Symbol::Ref(target) = sym {
                    if !self.rules.contains_key(target) {
                        return Err(GrammarError::DanglingRef {
                            referrer: id,
                            target: *target,
                        });
                    }
                }
            }
        }
        // Cycle check over all rules, not just those reachable from root.
        let mut state: BTreeMap<RuleId, u8> = BTreeMap::new(); // 1 = on stack, 2 = done
        for &start in self.rules.keys() {
            if state.get(&start).copied() == Some(2) {
                continue;
            }
            let mut stack: Vec<(RuleId, usize)> = vec![(start, 0)];
            state.insert(start, 1);
            while let Some(&mut (id, ref mut pos)) = stack.last_mut() {
                let rhs = &self.rules[&id].rhs;
                if *pos >= rhs.len() {
                    state.insert(id, 2);
                    stack.pop();
                    continue;
                }
                let sym = &rhs[*pos];
                *pos += 1;
                if let Symbol::Ref(next) = sym {
                    match state.get(next).copied() {
                        Some(1) => return Err(GrammarError::Cyclic(*next)),
                        Some(2) => {}
                        _ => {
                            state.insert(*next, 1);
                            stack.push((*next, 0));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Would inserting a reference to `target` inside `host`'s RHS create a
    /// cycle? True iff `target` can already reach `host`.
    pub fn reaches(&self, from: RuleId, to: RuleId) -> bool {
        if from == to {
            return true;
        }
        let mut seen = BTreeSet::new();
        let mut stack = vec![from];
        while let Some(id) = stack.pop() {
            if !seen.insert(id) {
                continue;
            }
            if let Some(rule) = self.rules.get(&id) {
                for sym in &rule.rhs {
                    if let Symbol::Ref(next) = sym {
                        if *next == to {
                            return true;
                        }
                        stack.push(*next);
                    }
                }
            }
        }
        false
    }

    /// Depth-first left-to-right expansion of the root rule.
    pub fn expand(&self) -> Result<Vec<T>, GrammarError> {
        self.check_integrity()?;
        self.expand_rule(self.root)
    }

    fn expand_rule(&self, start: RuleId) -> Result<Vec<T>, GrammarError> {
        let mut out = Vec::new();
        let mut stack: Vec<(RuleId, usize)> = vec![(start, 0)];
        while let Some(&mut (id, ref mut pos)) = stack.last_mut() {
            let rule = self.rules.get(&id).ok_or(GrammarError::DanglingRef {
                referrer: id,
                target: id,
            })?;
            if *pos >= rule.rhs.len() {
                stack.pop();
                continue;
            }
            let sym = rule.rhs[*pos].clone();
            *pos += 1;
            match sym {
                Symbol::Terminal(t) => out.push(t),
                Symbol::Ref(next) => stack.push((next, 0)),
            }
        }
        Ok(out)
    }

    /// Graphviz DOT rendering of the rule-reference topology: one node per
    /// rule, one edge per distinct (referencing, referenced) pair.
    pub fn topology_dot(&self) -> String {
        let mut out = String::from("digraph grammar {\n");
        for &id in self.rules.keys() {
            out.push_str(&format!("    \"{id}\";\n"));
        }
        let mut edges: BTreeSet<(RuleId, RuleId)> = BTreeSet::new();
        for (&id, rule) in &self.rules {
            for sym in &rule.rhs {
                if let Symbol::Ref(target) = sym {
                    edges.insert((id, *target));
                }
            }
        }
        for (from, to) in edges {
            out.push_str(&format!("    \"{from}\" -> \"{to}\";\n"));
        }
        out.push_str("}\n");
        out
    }
}

impl<T: fmt::Display + Clone + Eq + Ord> Grammar<T> {
    /// Text dump, one rule per line: `p0 -> (53,2) p1 p1`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (&id, rule) in &self.rules {
            out.push_str(&format!("p{id} ->"));
            for sym in &rule.rhs {
                match sym {
                    Symbol::Terminal(t) => out.push_str(&format!(" {t}")),
                    Symbol::Ref(r) => out.push_str(&format!(" p{r}")),
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Post-induction Sequitur invariants, used by tests and the induction
/// engine's own debug assertions. Returns human-readable violations.
pub fn sequitur_violations<T: Clone + Eq + Ord + std::hash::Hash>(g: &Grammar<T>) -> Vec<String> {
    let mut violations = Vec::new();
    // Digram uniqueness. Two occurrences of the same digram overlap (and
    // are exempt, as in "aaa") only when they sit in the same RHS at
    // adjacent positions.
    type DigramSites<'a, T> =
        std::collections::HashMap<(&'a Symbol<T>, &'a Symbol<T>), (RuleId, usize)>;
    let mut seen: DigramSites<T> = DigramSites::new();
    for (&id, rule) in g.rules() {
        for (pos, pair) in rule.rhs.windows(2).enumerate() {
            let key = (&pair[0], &pair[1]);
            match seen.get(&key) {
                Some(&(prev_id, prev_pos)) => {
                    let overlapping = prev_id == id && pos == prev_pos + 1;
                    if !overlapping {
                        violations.push(format!(
                            "digram repeated at p{prev_id}:{prev_pos} and p{id}:{pos}"
                        ));
                    }
                }
                None => {
                    seen.insert(key, (id, pos));
                }
            }
        }
    }
    // Rule utility: every non-root rule's expansion must occur at least
    // twice in the full derivation. Nested rules count through their
    // parents' usage (a rule used once by a twice-used rule occurs twice).
    let mut usage: BTreeMap<RuleId, usize> = g.rules().keys().map(|&id| (id, 0)).collect();
    usage.insert(g.root(), 1);
    // Propagate in topological order (acyclic by invariant): repeat until
    // stable, bounded by rule count.
    for _ in 0..g.len() {
        let mut fresh: BTreeMap<RuleId, usize> = g.rules().keys().map(|&id| (id, 0)).collect();
        fresh.insert(g.root(), 1);
        for (&id, rule) in g.rules() {
            let parent_usage = usage[&id];
            for sym in &rule.rhs {
                if let Symbol::Ref(target) = sym {
                    *fresh.get_mut(target).unwrap() += parent_usage;
                }
            }
        }
        if fresh == usage {
            break;
        }
        usage = fresh;
    }
    for (&id, &count) in &usage {
        if id != g.root() && count < 2 {
            violations.push(format!(
                "rule p{id} occurs {count} time(s) in the derivation"
            ));
        }
    }
    violations
}
