//! Top-down resolution of a hypothesis against a graph's facts, the
//! linearity check that upgrades logical success to separation-logic
//! validity, and the complete/consistent test harness.
//!
//! Literal selection: within the current resolvent, the first literal whose
//! inputs satisfy the theory's mode discipline is selected (field, nullptr,
//! eq, placeholder, and recursive literals are always selectable once their
//! driving argument is ground; pure literals wait for their inputs). A
//! resolvent with no selectable literal fails.

use std::collections::BTreeMap;
use std::collections::HashMap;

use crate::graph::{Example, GraphValue, MemoryGraph, PayloadTerm, Task};
use crate::hypothesis::{Clause, Hypothesis, Lit, PredKey};
use crate::theory::{PureTheory, PureValue};

/// Caps on the resolution search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProofBudget {
    pub max_depth: usize,
    /// Fact-consumption cap; the linearity check needs exactly the number of
    /// facts in the graph.
    pub max_fact_uses: usize,
    /// Global cap on resolution steps per goal, a guard against candidate
    /// clauses whose top-down evaluation diverges.
    pub max_steps: usize,
}

impl ProofBudget {
    pub fn for_graph(g: &MemoryGraph) -> ProofBudget {
        ProofBudget {
            max_depth: 2 * (g.facts.len() + g.nodes.len()) + 10,
            max_fact_uses: g.facts.len(),
            max_steps: 200_000,
        }
    }
}

/// Facts consumed along one successful derivation, as multiplicities over
/// the graph's fact list.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UsageTrace {
    pub uses: BTreeMap<usize, usize>,
}

impl UsageTrace {
    pub fn total(&self) -> usize {
        self.uses.values().sum()
    }

    /// True iff every fact of `g` is used exactly once.
    pub fn is_linear(&self, g: &MemoryGraph) -> bool {
        self.uses.len() == g.facts.len() && self.uses.values().all(|&n| n == 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProveOutcome {
    Proved(UsageTrace),
    Failed,
    /// The search hit the depth or step budget before finding a proof.
    Exhausted,
}

impl ProveOutcome {
    pub fn proved(&self) -> bool {
        matches!(self, ProveOutcome::Proved(_))
    }
}

/// Test classification of a hypothesis against a task.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestOutcome {
    /// Every positive example is derivable.
    pub complete: bool,
    /// Every positive example has a derivation consuming each fact exactly
    /// once. Only computed when complete.
    pub linear_valid: bool,
    pub failing_positives: Vec<usize>,
    /// Indices of negatives that are (plainly) derivable — inconsistency
    /// witnesses for the classic mode.
    pub satisfied_negatives: Vec<usize>,
    /// Some verdict above was reached by running out of budget.
    pub exhausted: bool,
}

// ---------------------------------------------------------------------------
// Runtime representation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
enum RtVal {
    Node(u32),
    Null,
    Int(i64),
    Set(std::collections::BTreeSet<i64>),
    List(Vec<i64>),
}

impl RtVal {
    fn from_pure(v: PureValue) -> RtVal {
        match v {
            PureValue::Int(n) => RtVal::Int(n),
            PureValue::Set(s) => RtVal::Set(s),
            PureValue::List(xs) => RtVal::List(xs),
        }
    }

    fn to_pure(&self) -> Option<PureValue> {
        match self {
            RtVal::Int(n) => Some(PureValue::Int(*n)),
            RtVal::Set(s) => Some(PureValue::Set(s.clone())),
            RtVal::List(xs) => Some(PureValue::List(xs.clone())),
            _ => None,
        }
    }
}

struct CompiledGraph {
    node_ids: BTreeMap<String, u32>,
    /// (field name, source node) -> fact index
    index: HashMap<(String, u32), usize>,
    targets: Vec<RtVal>,
    nfacts: usize,
}

impl CompiledGraph {
    fn new(g: &MemoryGraph) -> CompiledGraph {
        let node_ids: BTreeMap<String, u32> = g
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.0.clone(), i as u32))
            .collect();
        let mut index = HashMap::new();
        let mut targets = Vec::new();
        for (i, f) in g.facts.iter().enumerate() {
            let src = node_ids[&f.source.0];
            index.insert((f.field.clone(), src), i);
            targets.push(match &f.target {
                GraphValue::Node(n) => RtVal::Node(node_ids[&n.0]),
                GraphValue::Null => RtVal::Null,
                GraphValue::Int(v) => RtVal::Int(*v),
            });
        }
        CompiledGraph {
            node_ids,
            index,
            targets,
            nfacts: g.facts.len(),
        }
    }

    fn value(&self, v: &GraphValue) -> Option<RtVal> {
        Some(match v {
            GraphValue::Node(n) => RtVal::Node(*self.node_ids.get(&n.0)?),
            GraphValue::Null => RtVal::Null,
            GraphValue::Int(i) => RtVal::Int(*i),
        })
    }
}

#[derive(Debug, Clone)]
enum Slot {
    Unbound,
    Link(usize),
    Val(RtVal),
}

#[derive(Debug, Clone)]
struct GoalLit {
    lit: Lit,
    /// Slot base offset of this literal's clause instantiation.
    base: usize,
    depth: usize,
}

enum Trail {
    Bound(usize),
    Consumed(usize),
}

struct Engine<'a> {
    graph: &'a CompiledGraph,
    hyp: &'a Hypothesis,
    theory: PureTheory,
    budget: ProofBudget,
    linear: bool,
    slots: Vec<Slot>,
    trail: Vec<Trail>,
    consumed: Vec<bool>,
    consumed_count: usize,
    uses: Vec<usize>,
    steps: usize,
    exhausted: bool,
}

impl<'a> Engine<'a> {
    fn new(
        graph: &'a CompiledGraph,
        hyp: &'a Hypothesis,
        theory: PureTheory,
        budget: ProofBudget,
        linear: bool,
    ) -> Engine<'a> {
        Engine {
            graph,
            hyp,
            theory,
            budget,
            linear,
            slots: Vec::new(),
            trail: Vec::new(),
            consumed: vec![false; graph.nfacts],
            consumed_count: 0,
            uses: Vec::new(),
            steps: 0,
            exhausted: false,
        }
    }

    fn deref(&self, mut s: usize) -> usize {
        loop {
            match &self.slots[s] {
                Slot::Link(t) => s = *t,
                _ => return s,
            }
        }
    }

    fn value_of(&self, s: usize) -> Option<&RtVal> {
        match &self.slots[self.deref(s)] {
            Slot::Val(v) => Some(v),
            _ => None,
        }
    }

    fn mark(&self) -> (usize, usize) {
        (self.trail.len(), self.uses.len())
    }

    fn undo(&mut self, mark: (usize, usize)) {
        while self.trail.len() > mark.0 {
            match self.trail.pop().unwrap() {
                Trail::Bound(s) => self.slots[s] = Slot::Unbound,
                Trail::Consumed(f) => {
                    self.consumed[f] = false;
                    self.consumed_count -= 1;
                }
            }
        }
        self.uses.truncate(mark.1);
    }

    fn bind(&mut self, s: usize, v: RtVal) {
        let s = self.deref(s);
        debug_assert!(matches!(self.slots[s], Slot::Unbound));
        self.slots[s] = Slot::Val(v);
        self.trail.push(Trail::Bound(s));
    }

    fn unify_val(&mut self, s: usize, v: &RtVal) -> bool {
        let s = self.deref(s);
        match &self.slots[s] {
            Slot::Val(cur) => cur == v,
            Slot::Unbound => {
                self.bind(s, v.clone());
                true
            }
            Slot::Link(_) => unreachable!(),
        }
    }

    fn unify_slots(&mut self, a: usize, b: usize) -> bool {
        let (a, b) = (self.deref(a), self.deref(b));
        if a == b {
            return true;
        }
        match (self.slots[a].clone(), self.slots[b].clone()) {
            (Slot::Val(x), Slot::Val(y)) => x == y,
            (Slot::Unbound, _) => {
                self.slots[a] = Slot::Link(b);
                self.trail.push(Trail::Bound(a));
                true
            }
            (_, Slot::Unbound) => {
                self.slots[b] = Slot::Link(a);
                self.trail.push(Trail::Bound(b));
                true
            }
            _ => unreachable!(),
        }
    }

    fn fresh_slots(&mut self, n: usize) -> usize {
        let base = self.slots.len();
        self.slots.extend((0..n).map(|_| Slot::Unbound));
        base
    }

    /// Whether the literal can be resolved under the current bindings.
    fn selectable(&self, g: &GoalLit) -> bool {
        match &g.lit {
            Lit::Pointer { source, .. } => self.value_of(g.base + *source as usize).is_some(),
            Lit::Null(_) | Lit::Eq(..) | Lit::AnyPointer(_) | Lit::AnyNumber(_) => true,
            Lit::Rec { args, .. } => args
                .first()
                .map(|&v| self.value_of(g.base + v as usize).is_some())
                .unwrap_or(true),
            Lit::Pure { rel, args } => {
                let bound: Vec<bool> = args
                    .iter()
                    .map(|&v| self.value_of(g.base + v as usize).is_some())
                    .collect();
                self.theory.ops().evaluable(rel, &bound)
            }
        }
    }

    /// Depth-first search over the resolvent; `true` on the first success.
    fn solve(&mut self, resolvent: &[GoalLit]) -> bool {
        self.steps += 1;
        if self.steps > self.budget.max_steps {
            self.exhausted = true;
            return false;
        }
        if resolvent.is_empty() {
            return !self.linear || self.consumed_count == self.graph.nfacts;
        }
        let Some(pick) = resolvent.iter().position(|g| self.selectable(g)) else {
            // Mode-stuck resolvent: no literal is evaluable.
            return false;
        };
        let goal = resolvent[pick].clone();
        let rest: Vec<GoalLit> = resolvent
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != pick)
            .map(|(_, g)| g.clone())
            .collect();
        let slot = |v: u32| goal.base + v as usize;

        match &goal.lit {
            Lit::Pointer {
                field,
                source,
                target,
            } => {
                let src = match self.value_of(slot(*source)) {
                    Some(RtVal::Node(n)) => *n,
                    _ => return false,
                };
                let Some(&fi) = self.graph.index.get(&(field.to_string(), src)) else {
                    return false;
                };
                if self.linear
                    && (self.consumed[fi] || self.consumed_count >= self.budget.max_fact_uses)
                {
                    return false;
                }
                let mark = self.mark();
                if self.linear {
                    self.consumed[fi] = true;
                    self.consumed_count += 1;
                    self.trail.push(Trail::Consumed(fi));
                }
                self.uses.push(fi);
                let tgt = self.graph.targets[fi].clone();
                if self.unify_val(slot(*target), &tgt) && self.solve(&rest) {
                    return true;
                }
                self.undo(mark);
                false
            }
            Lit::Null(v) => {
                let mark = self.mark();
                if self.unify_val(slot(*v), &RtVal::Null) && self.solve(&rest) {
                    return true;
                }
                self.undo(mark);
                false
            }
            Lit::Eq(a, b) => {
                let mark = self.mark();
                if self.unify_slots(slot(*a), slot(*b)) && self.solve(&rest) {
                    return true;
                }
                self.undo(mark);
                false
            }
            Lit::AnyPointer(_) | Lit::AnyNumber(_) => self.solve(&rest),
            Lit::Pure { rel, args } => {
                let vals: Vec<Option<PureValue>> = args
                    .iter()
                    .map(|&v| self.value_of(slot(v)).and_then(RtVal::to_pure))
                    .collect();
                let results = self.theory.ops().eval(rel, &vals);
                for grounding in results {
                    let mark = self.mark();
                    let mut ok = true;
                    for (&v, val) in args.iter().zip(grounding) {
                        if !self.unify_val(slot(v), &RtVal::from_pure(val)) {
                            ok = false;
                            break;
                        }
                    }
                    if ok && self.solve(&rest) {
                        return true;
                    }
                    self.undo(mark);
                }
                false
            }
            Lit::Rec { target, args } => {
                if goal.depth >= self.budget.max_depth {
                    self.exhausted = true;
                    return false;
                }
                let pred = self.hyp.pred(*target);
                let mut clauses: Vec<&Clause> = vec![&pred.base];
                if let Some(rec) = &pred.rec {
                    clauses.push(rec);
                }
                for clause in clauses {
                    let mark = self.mark();
                    let slots_before = self.slots.len();
                    let base = self.fresh_slots(clause.nvars() as usize);
                    let mut ok = true;
                    for (i, &a) in args.iter().enumerate() {
                        if !self.unify_slots(base + i, slot(a)) {
                            ok = false;
                            break;
                        }
                    }
                    if ok {
                        let mut next: Vec<GoalLit> = clause
                            .body
                            .iter()
                            .map(|lit| GoalLit {
                                lit: lit.clone(),
                                base,
                                depth: goal.depth + 1,
                            })
                            .collect();
                        next.extend(rest.iter().cloned());
                        if self.solve(&next) {
                            return true;
                        }
                    }
                    self.undo(mark);
                    self.slots.truncate(slots_before);
                }
                false
            }
        }
    }
}

fn goal_values(cg: &CompiledGraph, goal: &Example) -> Option<Vec<RtVal>> {
    let mut vals = vec![cg.value(&goal.root)?];
    for a in &goal.extra_args {
        vals.push(cg.value(a)?);
    }
    if let Some(p) = &goal.payload {
        vals.push(match p {
            PayloadTerm::Set(s) => RtVal::Set(s.clone()),
            PayloadTerm::List(xs) => RtVal::List(xs.clone()),
            PayloadTerm::Int(n) => RtVal::Int(*n),
        });
    }
    Some(vals)
}

fn run(
    h: &Hypothesis,
    g: &MemoryGraph,
    goal: &Example,
    theory: PureTheory,
    budget: ProofBudget,
    linear: bool,
) -> ProveOutcome {
    let cg = CompiledGraph::new(g);
    if goal.arity() != h.main.arity() as usize {
        return ProveOutcome::Failed;
    }
    let Some(vals) = goal_values(&cg, goal) else {
        return ProveOutcome::Failed;
    };
    let mut eng = Engine::new(&cg, h, theory, budget, linear);
    let base = eng.fresh_slots(vals.len());
    for (i, v) in vals.iter().enumerate() {
        eng.bind(base + i, v.clone());
    }
    let top = vec![GoalLit {
        lit: Lit::Rec {
            target: PredKey::Main,
            args: (0..vals.len() as u32).collect(),
        },
        base,
        depth: 0,
    }];
    if eng.solve(&top) {
        let mut trace = UsageTrace::default();
        for &fi in &eng.uses {
            *trace.uses.entry(fi).or_insert(0) += 1;
        }
        ProveOutcome::Proved(trace)
    } else if eng.exhausted {
        ProveOutcome::Exhausted
    } else {
        ProveOutcome::Failed
    }
}

/// First successful derivation of `goal` over `g`, with its usage trace.
pub fn prove(
    h: &Hypothesis,
    g: &MemoryGraph,
    goal: &Example,
    theory: PureTheory,
    budget: ProofBudget,
) -> ProveOutcome {
    run(h, g, goal, theory, budget, false)
}

/// True iff some derivation uses every fact of `g` exactly once. Searches
/// alternative derivations, not just the first.
pub fn linear_prove(
    h: &Hypothesis,
    g: &MemoryGraph,
    goal: &Example,
    theory: PureTheory,
    budget: ProofBudget,
) -> ProveOutcome {
    run(h, g, goal, theory, budget, true)
}

/// Classifies `h` against every example of the task.
pub fn test(h: &Hypothesis, task: &Task, budget: Option<ProofBudget>) -> TestOutcome {
    let mut failing = Vec::new();
    let mut exhausted = false;
    for (i, ex) in task.positives.iter().enumerate() {
        let g = task.graph(&ex.graph_id).expect("graph exists");
        let b = budget.unwrap_or_else(|| ProofBudget::for_graph(g));
        match prove(h, g, ex, task.theory, b) {
            ProveOutcome::Proved(_) => {}
            ProveOutcome::Failed => failing.push(i),
            ProveOutcome::Exhausted => {
                failing.push(i);
                exhausted = true;
            }
        }
    }
    let complete = failing.is_empty();
    let mut linear_valid = complete;
    if complete {
        for ex in &task.positives {
            let g = task.graph(&ex.graph_id).expect("graph exists");
            let b = budget.unwrap_or_else(|| ProofBudget::for_graph(g));
            match linear_prove(h, g, ex, task.theory, b) {
                ProveOutcome::Proved(_) => {}
                ProveOutcome::Failed => {
                    linear_valid = false;
                    break;
                }
                ProveOutcome::Exhausted => {
                    linear_valid = false;
                    exhausted = true;
                    break;
                }
            }
        }
    }
    let mut satisfied_negatives = Vec::new();
    for (i, ex) in task.negatives.iter().enumerate() {
        let g = task.graph(&ex.graph_id).expect("graph exists");
        let b = budget.unwrap_or_else(|| ProofBudget::for_graph(g));
        match prove(h, g, ex, task.theory, b) {
            ProveOutcome::Proved(_) => satisfied_negatives.push(i),
            ProveOutcome::Failed => {}
            ProveOutcome::Exhausted => exhausted = true,
        }
    }
    TestOutcome {
        complete,
        linear_valid,
        failing_positives: failing,
        satisfied_negatives,
        exhausted,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_task;
    use crate::hypothesis::{parse_hypothesis, ParseContext};

    const FIG2: &str = "\
pos(srtl(p11,[1,2,3])). pos(srtl(p21,[2,4,6,9])).
next(p11, p12). next(p12, p13). next(p13, null).
value(p11, 1).  value(p12, 2).  value(p13, 3).
next(p21, p22). next(p22, p23). next(p23, p24). next(p24, null).
value(p21, 2).  value(p22, 4).  value(p23, 6).  value(p24, 9).
";

    pub const SRTL: &str = "\
srtl(X, S) :- empty(S), nullptr(X).
srtl(X, S) :- next(X, Y), value(X, V), srtl(Y, SY), min_set(V, S), insert(SY, V, S).
";

    fn fig2_set_task() -> crate::graph::Task {
        parse_task(FIG2)
            .unwrap()
            .override_theory(crate::theory::PureTheory::Set)
            .unwrap()
    }

    #[test]
    fn srtl_proves_fig2_using_every_fact_once() {
        let task = fig2_set_task();
        let h = parse_hypothesis(SRTL, &ParseContext::from_task(&task)).unwrap();
        let ex = &task.positives[0];
        let g = task.graph(&ex.graph_id).unwrap();
        let budget = ProofBudget::for_graph(g);
        match prove(&h, g, ex, task.theory, budget) {
            ProveOutcome::Proved(trace) => {
                assert_eq!(trace.total(), 6);
                assert!(trace.is_linear(g));
            }
            other => panic!("expected proof, got {other:?}"),
        }
        assert!(linear_prove(&h, g, ex, task.theory, budget).proved());
    }

    #[test]
    fn srtl_rejects_unsorted_graph() {
        let src = "\
neg(srtl(n1,[1,2,3])).
next(n1, n2). next(n2, n3). next(n3, null).
value(n1, 2). value(n2, 1). value(n3, 3).
";
        let task = parse_task(src)
            .unwrap()
            .override_theory(crate::theory::PureTheory::Set)
            .unwrap();
        let h = parse_hypothesis(SRTL, &ParseContext::from_task(&task)).unwrap();
        let ex = &task.negatives[0];
        let g = task.graph(&ex.graph_id).unwrap();
        let outcome = prove(&h, g, ex, task.theory, ProofBudget::for_graph(g));
        assert_eq!(outcome, ProveOutcome::Failed);
    }

    #[test]
    fn base_clause_proves_null_goal_on_empty_graph() {
        let task = parse_task("pos(sll(null,{})).").unwrap();
        let h = parse_hypothesis(
            "sll(X, S) :- empty(S), nullptr(X).\n",
            &ParseContext::from_task(&task),
        )
        .unwrap();
        let ex = &task.positives[0];
        let g = task.graph(&ex.graph_id).unwrap();
        match prove(&h, g, ex, task.theory, ProofBudget::for_graph(g)) {
            ProveOutcome::Proved(trace) => assert_eq!(trace.total(), 0),
            other => panic!("expected proof, got {other:?}"),
        }
    }

    #[test]
    fn bi_tree_shared_node_proves_but_fails_linearity() {
        let src = "\
pos(bi_tree(n1)).
t1(n1, n2). t2(n1, n2). t1(n2, null). t2(n2, null).
";
        let task = parse_task(src).unwrap();
        let h = parse_hypothesis(
            "bi_tree(X) :- nullptr(X).\nbi_tree(X) :- t1(X, L), t2(X, R), bi_tree(L), bi_tree(R).\n",
            &ParseContext::from_task(&task),
        )
        .unwrap();
        let ex = &task.positives[0];
        let g = task.graph(&ex.graph_id).unwrap();
        let budget = ProofBudget::for_graph(g);
        assert!(prove(&h, g, ex, task.theory, budget).proved());
        assert_eq!(
            linear_prove(&h, g, ex, task.theory, budget),
            ProveOutcome::Failed
        );
    }

    #[test]
    fn stray_fact_breaks_linearity() {
        let src = "\
pos(srtl(p11,[1,2,3])).
next(p11, p12). next(p12, p13). next(p13, null).
value(p11, 1).  value(p12, 2).  value(p13, 3).
prev(p11, p12).
";
        let task = parse_task(src)
            .unwrap()
            .override_theory(crate::theory::PureTheory::Set)
            .unwrap();
        let h = parse_hypothesis(SRTL, &ParseContext::from_task(&task)).unwrap();
        let ex = &task.positives[0];
        let g = task.graph(&ex.graph_id).unwrap();
        let budget = ProofBudget::for_graph(g);
        assert!(prove(&h, g, ex, task.theory, budget).proved());
        assert_eq!(
            linear_prove(&h, g, ex, task.theory, budget),
            ProveOutcome::Failed
        );
    }

    #[test]
    fn unsorted_hypothesis_is_complete_on_fig2() {
        let mut task = fig2_set_task();
        for ex in &mut task.positives {
            ex.pred = "sll".into();
        }
        let ull = "\
sll(X, S) :- empty(S), nullptr(X).
sll(X, S) :- next(X, Y), value(X, V), insert(SY, V, S), sll(Y, SY).
";
        let h = parse_hypothesis(ull, &ParseContext::from_task(&task)).unwrap();
        let outcome = test(&h, &task, None);
        assert!(outcome.complete, "{outcome:?}");
        assert!(outcome.linear_valid);
    }

    #[test]
    fn diverging_segment_candidate_hits_budget() {
        let src = "\
pos(p(a, b)).
next(a, b).
";
        let task = parse_task(src).unwrap();
        let h = parse_hypothesis(
            "p(X, Y) :- eq(X, Y).\np(X, Y) :- next(X, Z), p(Z, Y), p(X, Z).\n",
            &ParseContext::from_task(&task),
        )
        .unwrap();
        let ex = &task.positives[0];
        let g = task.graph(&ex.graph_id).unwrap();
        // eq(a,b) fails first, then the recursive clause keeps re-deriving
        // p(a, b) through its p(X, Z) call: top-down evaluation diverges and
        // the budget trips.
        let outcome = prove(&h, g, ex, task.theory, ProofBudget::for_graph(g));
        assert_eq!(outcome, ProveOutcome::Exhausted);
    }

    #[test]
    fn plus_two_over_builtin_succ() {
        let task = parse_task("pos(plus_two(1, 3)). pos(plus_two(2, 4)).").unwrap();
        let h = parse_hypothesis(
            "plus_two(A, B) :- succ(A, C), succ(C, B).\n",
            &ParseContext::from_task(&task),
        )
        .unwrap();
        let outcome = test(&h, &task, None);
        assert!(outcome.complete && outcome.linear_valid, "{outcome:?}");
    }
}
