//! Online Sequitur induction over an arena-backed doubly linked symbol list.
//!
//! Follows the classic formulation: append one token at a time, keep a
//! digram index, and never let a digram appear twice (digram uniqueness).
//! Rules subsumed by a longer repeat are kept rather than inlined, so a
//! repeated phrase yields a chain of nested rules; every rule's expansion
//! still occurs at least twice in the derivation (rule utility), because
//! the subsuming rule itself is used at least twice.

use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;

use super::{Grammar, GrammarError, Rule, RuleId, Symbol};

const NIL: usize = usize::MAX;

#[derive(Clone, PartialEq, Eq, Hash)]
enum Val<T> {
    Guard(usize), // owning internal rule
    Term(T),
    Ref(usize), // internal rule index
}

struct Node<T> {
    prev: usize,
    next: usize,
    val: Val<T>,
}

struct RuleState {
    guard: usize,
}

struct Sequitur<T> {
    nodes: Vec<Node<T>>,
    free: Vec<usize>,
    rules: Vec<RuleState>,
    digrams: HashMap<(Val<T>, Val<T>), usize>,
}

impl<T: Clone + Eq + Hash> Sequitur<T> {
    fn new() -> Self {
        let mut s = Sequitur {
            nodes: Vec::new(),
            free: Vec::new(),
            rules: Vec::new(),
            digrams: HashMap::new(),
        };
        s.new_rule();
        s
    }

    fn new_rule(&mut self) -> usize {
        let rule = self.rules.len();
        let guard = self.alloc(Val::Guard(rule));
        self.nodes[guard].prev = guard;
        self.nodes[guard].next = guard;
        self.rules.push(RuleState { guard });
        rule
    }

    fn alloc(&mut self, val: Val<T>) -> usize {
        if let Some(i) = self.free.pop() {
            self.nodes[i] = Node {
                prev: NIL,
                next: NIL,
                val,
            };
            i
        } else {
            self.nodes.push(Node {
                prev: NIL,
                next: NIL,
                val,
            });
            self.nodes.len() - 1
        }
    }

    fn is_guard(&self, n: usize) -> bool {
        matches!(self.nodes[n].val, Val::Guard(_))
    }

    fn next(&self, n: usize) -> usize {
        self.nodes[n].next
    }

    fn prev(&self, n: usize) -> usize {
        self.nodes[n].prev
    }

    fn key(&self, n: usize) -> Val<T> {
        self.nodes[n].val.clone()
    }

    /// Removes the digram-index entry starting at `n`, if it points at `n`.
    fn delete_digram_at(&mut self, n: usize) {
        if self.is_guard(n) {
            return;
        }
        let nx = self.next(n);
        if nx == NIL || self.is_guard(nx) {
            return;
        }
        let k = (self.key(n), self.key(nx));
        if self.digrams.get(&k) == Some(&n) {
            self.digrams.remove(&k);
        }
    }

    /// Links `left` directly to `right`, clearing any index entry for the
    /// digram that used to start at `left`. Runs of identical symbols
    /// (e.g. "aaa") need care: when the indexed occurrence of an
    /// overlapping digram is torn down, the surviving occurrence is
    /// re-registered so later matches still find it.
    fn join(&mut self, left: usize, right: usize) {
        if self.nodes[left].next != NIL {
            self.delete_digram_at(left);

            if self.mid_of_triple(right) {
                let k = (self.key(right), self.key(self.next(right)));
                self.digrams.insert(k, right);
            }
            if self.mid_of_triple(left) {
                let p = self.prev(left);
                let k = (self.key(p), self.key(left));
                self.digrams.insert(k, p);
            }
        }
        self.nodes[left].next = right;
        self.nodes[right].prev = left;
    }

    /// Is `n` the middle of three equal adjacent symbols?
    fn mid_of_triple(&self, n: usize) -> bool {
        let p = self.nodes[n].prev;
        let nx = self.nodes[n].next;
        p != NIL
            && nx != NIL
            && self.nodes[p].val == self.nodes[n].val
            && self.nodes[nx].val == self.nodes[n].val
    }

    fn insert_after(&mut self, n: usize, val: Val<T>) -> usize {
        let fresh = self.alloc(val);
        let after = self.next(n);
        self.join(fresh, after);
        self.join(n, fresh);
        fresh
    }

    /// Unlinks and frees `n`, maintaining the digram index.
    fn delete_node(&mut self, n: usize) {
        let p = self.prev(n);
        let nx = self.next(n);
        self.join(p, nx);
        self.delete_digram_at(n);
        self.free.push(n);
    }

    fn append_terminal(&mut self, t: T) {
        let guard = self.rules[0].guard;
        let last = self.prev(guard);
        let fresh = self.insert_after(last, Val::Term(t));
        let left = self.prev(fresh);
        self.check(left);
    }

    /// Examines the digram starting at `n`; returns true if a substitution
    /// was performed.
    fn check(&mut self, n: usize) -> bool {
        if self.is_guard(n) {
            return false;
        }
        let nx = self.next(n);
        if self.is_guard(nx) {
            return false;
        }
        let k = (self.key(n), self.key(nx));
        match self.digrams.get(&k).copied() {
            None => {
                self.digrams.insert(k, n);
                false
            }
            Some(m) if m == n => false,
            // Overlapping occurrence (e.g. "aaa"): leave the index alone.
            Some(m) if self.next(m) == n || self.next(n) == m => false,
            Some(m) => {
                self.handle_match(n, m);
                true
            }
        }
    }

    fn handle_match(&mut self, n: usize, m: usize) {
        if self.is_guard(self.prev(m)) && self.is_guard(self.next(self.next(m))) {
            // The older occurrence is exactly some rule's RHS: reuse it.
            let r = match self.nodes[self.prev(m)].val {
                Val::Guard(r) => r,
                _ => unreachable!(),
            };
            self.substitute(n, r);
        } else {
            let r = self.new_rule();
            let a = self.key(n);
            let b = self.key(self.next(n));
            let guard = self.rules[r].guard;
            let first = self.insert_after(guard, a);
            let second = self.insert_after(first, b);
            self.substitute(m, r);
            self.substitute(n, r);
            let k = (self.key(first), self.key(second));
            self.digrams.insert(k, first);
        }
    }

    /// Replaces the digram starting at `n` with a reference to `rule`.
    fn substitute(&mut self, n: usize, rule: usize) {
        let q = self.prev(n);
        self.delete_node(n);
        let second = self.next(q);
        self.delete_node(second);
        let fresh = self.insert_after(q, Val::Ref(rule));
        if !self.check(q) {
            self.check(fresh);
        }
    }

    /// Exports the rules as an immutable grammar with dense ids in
    /// creation order, root first.
    fn export<U: Clone + Eq + Ord>(self, map_term: impl Fn(&T) -> U) -> Grammar<U> {
        let mut rules: BTreeMap<RuleId, Rule<U>> = BTreeMap::new();
        for (i, state) in self.rules.iter().enumerate() {
            let mut rhs = Vec::new();
            let mut cursor = self.nodes[state.guard].next;
            while cursor != state.guard {
                match &self.nodes[cursor].val {
                    Val::Term(t) => rhs.push(Symbol::Terminal(map_term(t))),
                    Val::Ref(r) => rhs.push(Symbol::Ref(*r)),
                    Val::Guard(_) => unreachable!(),
                }
                cursor = self.nodes[cursor].next;
            }
            rules.insert(i, Rule { rhs });
        }
        Grammar::new(rules, 0)
    }
}

/// Induces a Sequitur grammar whose expansion equals `seq`.
pub fn induce<T: Clone + Eq + Hash + Ord>(seq: &[T]) -> Result<Grammar<T>, GrammarError> {
    if seq.is_empty() {
        return Err(GrammarError::EmptyInput);
    }
    let mut s = Sequitur::new();
    for t in seq {
        s.append_terminal(t.clone());
    }
    let g = s.export(|t| t.clone());
    debug_assert!(g.check_integrity().is_ok());
    Ok(g)
}
