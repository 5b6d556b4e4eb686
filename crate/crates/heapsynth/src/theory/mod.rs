//! Built-in pure relations over sets, lists, and integers.
//!
//! Each theory lives behind the [`TheoryOps`] trait: its relation catalog,
//! evaluation semantics, clause-minimisation rules, and the containment
//! quasi-order used by the recursion well-foundedness filter. Theories are
//! registered by name and selected at runtime (`--theory set|list|int` on the
//! CLI, or inferred from payload syntax).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::OnceLock;

mod int;
mod list;
mod set;

/// Identifier for one of the registered pure theories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PureTheory {
    Set,
    List,
    Int,
}

impl PureTheory {
    pub fn name(self) -> &'static str {
        match self {
            PureTheory::Set => "set",
            PureTheory::List => "list",
            PureTheory::Int => "int",
        }
    }

    /// The strategy object implementing this theory.
    pub fn ops(self) -> &'static dyn TheoryOps {
        match self {
            PureTheory::Set => &set::SetTheory,
            PureTheory::List => &list::ListTheory,
            PureTheory::Int => &int::IntTheory,
        }
    }

    /// Sort of payload variables under this theory.
    pub fn payload_sort(self) -> ValueSort {
        match self {
            PureTheory::Set => ValueSort::Set,
            PureTheory::List => ValueSort::List,
            PureTheory::Int => ValueSort::Int,
        }
    }
}

impl fmt::Display for PureTheory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// All registered theories.
pub fn registry() -> [&'static dyn TheoryOps; 3] {
    [&set::SetTheory, &list::ListTheory, &int::IntTheory]
}

/// Looks a theory up by its registered name.
pub fn by_name(name: &str) -> Option<&'static dyn TheoryOps> {
    registry().into_iter().find(|t| t.id().name() == name)
}

/// Sort of a pure variable or relation argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ValueSort {
    Int,
    Set,
    List,
}

/// A ground pure value.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PureValue {
    Int(i64),
    Set(BTreeSet<i64>),
    List(Vec<i64>),
}

impl PureValue {
    pub fn sort(&self) -> ValueSort {
        match self {
            PureValue::Int(_) => ValueSort::Int,
            PureValue::Set(_) => ValueSort::Set,
            PureValue::List(_) => ValueSort::List,
        }
    }
}

impl fmt::Display for PureValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PureValue::Int(n) => write!(f, "{n}"),
            PureValue::Set(s) => {
                write!(f, "{{")?;
                for (i, x) in s.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, "}}")
            }
            PureValue::List(xs) => {
                write!(f, "[")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, "]")
            }
        }
    }
}

/// Descriptor of one catalog relation.
#[derive(Debug, Clone, Copy)]
pub struct PureRelation {
    pub name: &'static str,
    pub theory: PureTheory,
    pub sorts: &'static [ValueSort],
}

impl PureRelation {
    pub fn arity(&self) -> usize {
        self.sorts.len()
    }
}

/// A pure literal over numbered variables, used by the minimisation engine
/// and the containment order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PureAtom {
    pub rel: std::sync::Arc<str>,
    pub args: Vec<u32>,
}

impl PureAtom {
    pub fn new(rel: impl Into<std::sync::Arc<str>>, args: Vec<u32>) -> Self {
        PureAtom {
            rel: rel.into(),
            args,
        }
    }
}

/// A literal pattern inside an [`EntailmentRule`]; arguments are pattern
/// variables.
#[derive(Debug, Clone)]
pub struct PatAtom {
    pub rel: &'static str,
    pub args: Vec<u8>,
}

#[derive(Debug, Clone)]
pub enum RuleKind {
    /// Replace the matched literals with `rhs`. Pattern variables in
    /// `existential` must map to clause variables occurring nowhere outside
    /// the matched literals.
    Rewrite {
        rhs: Vec<PatAtom>,
        existential: Vec<u8>,
    },
    /// The matched literals force the two pattern variables equal; the
    /// clause shrinks by substituting one for the other.
    Equate(u8, u8),
}

/// One clause-minimisation rule: whenever `lhs` matches, a strictly shorter
/// equivalent conjunction exists.
#[derive(Debug, Clone)]
pub struct EntailmentRule {
    pub name: &'static str,
    pub lhs: Vec<PatAtom>,
    pub kind: RuleKind,
}

/// Functional dependency of a relation: the `det` argument positions
/// determine the `dep` positions.
#[derive(Debug, Clone, Copy)]
pub struct FunctionalDep {
    pub rel: &'static str,
    pub det: &'static [usize],
    pub dep: &'static [usize],
}

/// Error for pure-literal evaluation attempted without its required ground
/// inputs.
#[derive(Debug, Clone, thiserror::Error)]
#[error("mode violation: {rel} is not evaluable with bound pattern {bound:?}")]
pub struct ModeViolation {
    pub rel: String,
    pub bound: Vec<bool>,
}

/// Strategy interface for one pure theory.
pub trait TheoryOps: Sync {
    fn id(&self) -> PureTheory;

    /// The fixed relation catalog.
    fn catalog(&self) -> &'static [PureRelation];

    /// Whether the relation can be finitely evaluated when exactly the
    /// `bound` positions are ground.
    fn evaluable(&self, rel: &str, bound: &[bool]) -> bool;

    /// All argument groundings extending the partial assignment. Positions
    /// that were bound keep their value in every result.
    fn eval(&self, rel: &str, args: &[Option<PureValue>]) -> Vec<Vec<PureValue>>;

    /// Minimisation rules of this theory.
    fn rules(&self) -> &'static [EntailmentRule];

    /// Functional dependencies of this theory's relations.
    fn functional_deps(&self) -> &'static [FunctionalDep];

    /// Containment edges `a ⊑ b` contributed by a single literal. The
    /// integer theory only participates when `po_int` is set.
    fn le_edges(&self, atom: &PureAtom, po_int: bool) -> Vec<(u32, u32)>;
}

impl fmt::Debug for &'static dyn TheoryOps {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TheoryOps({})", self.id())
    }
}

/// Returns the catalog of `theory` (spec operation `builtin_catalog`).
pub fn builtin_catalog(theory: PureTheory) -> &'static [PureRelation] {
    theory.ops().catalog()
}

/// Evaluates one pure literal under a partial assignment, yielding every
/// grounding that makes it true. Fails when the bound pattern does not meet
/// the relation's mode discipline.
pub fn eval_pure(
    theory: PureTheory,
    rel: &str,
    args: &[Option<PureValue>],
) -> Result<Vec<Vec<PureValue>>, ModeViolation> {
    let ops = theory.ops();
    let bound: Vec<bool> = args.iter().map(Option::is_some).collect();
    if !ops.evaluable(rel, &bound) {
        return Err(ModeViolation {
            rel: rel.to_string(),
            bound,
        });
    }
    Ok(ops.eval(rel, args))
}

/// True iff `lits` entail `a ⊑ b` under the theory's containment order
/// (reflexive-transitive closure of the per-literal edges).
pub fn partial_le(a: u32, b: u32, lits: &[PureAtom], theory: PureTheory, po_int: bool) -> bool {
    if a == b {
        return true;
    }
    let ops = theory.ops();
    let mut edges: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for lit in lits {
        for (x, y) in ops.le_edges(lit, po_int) {
            edges.entry(x).or_default().push(y);
        }
    }
    let mut seen = BTreeSet::new();
    let mut stack = vec![a];
    while let Some(x) = stack.pop() {
        if x == b {
            return true;
        }
        if !seen.insert(x) {
            continue;
        }
        if let Some(next) = edges.get(&x) {
            stack.extend(next.iter().copied());
        }
    }
    false
}

/// One minimisation step returning the reduced conjunction and the variable
/// substitution it applied (identity for plain rewrites). `external` holds
/// the variables occurring outside the pure part; existential rule variables
/// may not map onto them. Variables in `protected` (head parameters) are
/// never eliminated by a substitution.
pub fn reduce_pure_step(
    lits: &[PureAtom],
    external: &BTreeSet<u32>,
    protected: &BTreeSet<u32>,
    theory: PureTheory,
) -> Option<(Vec<PureAtom>, BTreeMap<u32, u32>)> {
    let ops = theory.ops();

    // Functional-dependency merge: two literals of a functional relation
    // agreeing on the determinant positions force their dependent variables
    // equal, so substituting one for the other shrinks the clause.
    for fd in ops.functional_deps() {
        let idx: Vec<usize> =
            (0..lits.len()).filter(|&i| lits[i].rel.as_ref() == fd.rel).collect();
        for (pi, &i) in idx.iter().enumerate() {
            for &j in &idx[pi + 1..] {
                let (a, b) = (&lits[i], &lits[j]);
                if fd.det.iter().all(|&p| a.args[p] == b.args[p]) && a.args != b.args {
                    let mut pairs = Vec::new();
                    for &p in fd.dep {
                        if a.args[p] != b.args[p] {
                            pairs.push((b.args[p], a.args[p]));
                        }
                    }
                    if let Some(subst) = build_subst(&pairs, protected) {
                        let reduced = apply_subst(lits, &subst);
                        if reduced.len() < lits.len() {
                            return Some((reduced, subst));
                        }
                    }
                }
            }
        }
    }

    for rule in ops.rules() {
        if let Some(got) = try_rule(lits, external, protected, rule) {
            return Some(got);
        }
    }
    None
}

/// Orients elimination pairs away from protected variables and rejects
/// conflicting assignments.
fn build_subst(pairs: &[(u32, u32)], protected: &BTreeSet<u32>) -> Option<BTreeMap<u32, u32>> {
    let mut subst = BTreeMap::new();
    for &(mut from, mut to) in pairs {
        if protected.contains(&from) {
            if protected.contains(&to) {
                return None;
            }
            std::mem::swap(&mut from, &mut to);
        }
        match subst.get(&from) {
            Some(&prev) if prev != to => return None,
            _ => {
                subst.insert(from, to);
            }
        }
    }
    if subst.is_empty() {
        None
    } else {
        Some(subst)
    }
}

/// Spec-level view of one reduction step: the strictly smaller equivalent
/// conjunction, when one exists.
pub fn is_redundant_conjunction(
    lits: &[PureAtom],
    external: &BTreeSet<u32>,
    theory: PureTheory,
) -> Option<Vec<PureAtom>> {
    reduce_pure_step(lits, external, &BTreeSet::new(), theory).map(|(r, _)| r)
}

/// Incremental, extension-stable reducibility test for the clause builder:
/// does adding `new` to `prior` enable a functional-dependency merge, an
/// equate rule, or an existential-free rewrite? Such reductions stay valid
/// under any extension of the clause, so a hit prunes the whole subtree.
pub fn extension_stable_reducible(
    new: &PureAtom,
    prior: &[PureAtom],
    protected: &BTreeSet<u32>,
    theory: PureTheory,
) -> bool {
    let ops = theory.ops();
    for fd in ops.functional_deps() {
        if new.rel.as_ref() != fd.rel {
            continue;
        }
        for p in prior.iter().filter(|p| p.rel == new.rel) {
            if fd.det.iter().all(|&i| p.args[i] == new.args[i]) && p.args != new.args {
                let pairs: Vec<(u32, u32)> = fd
                    .dep
                    .iter()
                    .filter(|&&i| p.args[i] != new.args[i])
                    .map(|&i| (new.args[i], p.args[i]))
                    .collect();
                if build_subst(&pairs, protected).is_some() {
                    return true;
                }
            }
        }
    }
    let mut all: Vec<PureAtom> = prior.to_vec();
    all.push(new.clone());
    let new_idx = all.len() - 1;
    for rule in ops.rules() {
        let stable = match &rule.kind {
            RuleKind::Rewrite { existential, .. } => existential.is_empty(),
            RuleKind::Equate(..) => true,
        };
        if !stable {
            continue;
        }
        // Anchor the match on the new atom; older combinations were checked
        // when their own last atom arrived.
        for pin in 0..rule.lhs.len() {
            if rule.lhs[pin].rel != new.rel.as_ref()
                || rule.lhs[pin].args.len() != new.args.len()
            {
                continue;
            }
            let mut binding: BTreeMap<u8, u32> = BTreeMap::new();
            let mut ok = true;
            for (pv, cv) in rule.lhs[pin].args.iter().zip(&new.args) {
                match binding.get(pv) {
                    Some(&prev) if prev != *cv => {
                        ok = false;
                        break;
                    }
                    Some(_) => {}
                    None => {
                        binding.insert(*pv, *cv);
                    }
                }
            }
            if !ok {
                continue;
            }
            let rest: Vec<PatAtom> = rule
                .lhs
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != pin)
                .map(|(_, p)| p.clone())
                .collect();
            let mut chosen = vec![new_idx];
            if match_pats(&rest, 0, &all, &mut chosen, &mut binding) {
                match &rule.kind {
                    RuleKind::Rewrite { .. } => return true,
                    RuleKind::Equate(pa, pb) => {
                        let (a, b) = (binding[pa], binding[pb]);
                        if a != b && build_subst(&[(b, a)], protected).is_some() {
                            return true;
                        }
                    }
                }
            }
        }
    }
    false
}

fn apply_subst(lits: &[PureAtom], subst: &BTreeMap<u32, u32>) -> Vec<PureAtom> {
    let mapped: BTreeSet<PureAtom> = lits
        .iter()
        .map(|l| PureAtom {
            rel: l.rel.clone(),
            args: l
                .args
                .iter()
                .map(|v| *subst.get(v).unwrap_or(v))
                .collect(),
        })
        .collect();
    mapped.into_iter().collect()
}

fn try_rule(
    lits: &[PureAtom],
    external: &BTreeSet<u32>,
    protected: &BTreeSet<u32>,
    rule: &EntailmentRule,
) -> Option<(Vec<PureAtom>, BTreeMap<u32, u32>)> {
    let mut chosen: Vec<usize> = Vec::with_capacity(rule.lhs.len());
    let mut binding: BTreeMap<u8, u32> = BTreeMap::new();
    if !match_pats(&rule.lhs, 0, lits, &mut chosen, &mut binding) {
        return None;
    }
    finish_rule(lits, external, protected, rule, &chosen, &binding)
}

/// Backtracking matcher: assigns each pattern atom to a distinct literal
/// with a consistent variable binding. On the first full match it defers to
/// the caller via returning true with `chosen`/`binding` filled in.
fn match_pats(
    pats: &[PatAtom],
    at: usize,
    lits: &[PureAtom],
    chosen: &mut Vec<usize>,
    binding: &mut BTreeMap<u8, u32>,
) -> bool {
    if at == pats.len() {
        return true;
    }
    let pat = &pats[at];
    'target: for (i, lit) in lits.iter().enumerate() {
        if chosen.contains(&i) || lit.rel.as_ref() != pat.rel || lit.args.len() != pat.args.len()
        {
            continue;
        }
        let saved = binding.clone();
        for (pv, cv) in pat.args.iter().zip(&lit.args) {
            match binding.get(pv) {
                Some(&prev) if prev != *cv => {
                    *binding = saved;
                    continue 'target;
                }
                Some(_) => {}
                None => {
                    binding.insert(*pv, *cv);
                }
            }
        }
        chosen.push(i);
        if match_pats(pats, at + 1, lits, chosen, binding) {
            return true;
        }
        chosen.pop();
        *binding = saved;
    }
    false
}

fn finish_rule(
    lits: &[PureAtom],
    external: &BTreeSet<u32>,
    protected: &BTreeSet<u32>,
    rule: &EntailmentRule,
    chosen: &[usize],
    binding: &BTreeMap<u8, u32>,
) -> Option<(Vec<PureAtom>, BTreeMap<u32, u32>)> {
    match &rule.kind {
        RuleKind::Rewrite { rhs, existential } => {
            // Existential images must not leak outside the matched literals.
            let mut outside: BTreeSet<u32> = external.clone();
            for (i, lit) in lits.iter().enumerate() {
                if !chosen.contains(&i) {
                    outside.extend(lit.args.iter().copied());
                }
            }
            for pv in existential {
                if let Some(cv) = binding.get(pv) {
                    if outside.contains(cv) {
                        return None;
                    }
                }
            }
            let mut result: BTreeSet<PureAtom> = lits
                .iter()
                .enumerate()
                .filter(|(i, _)| !chosen.contains(i))
                .map(|(_, l)| l.clone())
                .collect();
            for pat in rhs {
                result.insert(PureAtom {
                    rel: std::sync::Arc::from(pat.rel),
                    args: pat.args.iter().map(|pv| binding[pv]).collect(),
                });
            }
            let result: Vec<PureAtom> = result.into_iter().collect();
            (result.len() < lits.len()).then_some((result, BTreeMap::new()))
        }
        RuleKind::Equate(pa, pb) => {
            let (a, b) = (binding[pa], binding[pb]);
            if a == b {
                return None;
            }
            let subst = build_subst(&[(b, a)], protected)?;
            let reduced = apply_subst(lits, &subst);
            (reduced.len() < lits.len()).then_some((reduced, subst))
        }
    }
}

// Shared helpers for the per-theory eval implementations.

pub(crate) fn as_int(v: &PureValue) -> i64 {
    match v {
        PureValue::Int(n) => *n,
        other => panic!("expected int, found {other}"),
    }
}

pub(crate) fn as_set(v: &PureValue) -> &BTreeSet<i64> {
    match v {
        PureValue::Set(s) => s,
        other => panic!("expected set, found {other}"),
    }
}

pub(crate) fn as_list(v: &PureValue) -> &[i64] {
    match v {
        PureValue::List(xs) => xs,
        other => panic!("expected list, found {other}"),
    }
}

pub(crate) fn rules_cell(
    cell: &'static OnceLock<Vec<EntailmentRule>>,
    build: fn() -> Vec<EntailmentRule>,
) -> &'static [EntailmentRule] {
    cell.get_or_init(build)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(xs: &[i64]) -> PureValue {
        PureValue::Set(xs.iter().copied().collect())
    }

    #[test]
    fn registry_resolves_names() {
        for t in [PureTheory::Set, PureTheory::List, PureTheory::Int] {
            assert_eq!(by_name(t.name()).unwrap().id(), t);
        }
        assert!(by_name("bag").is_none());
    }

    #[test]
    fn catalogs_match_commitments() {
        let names = |t: PureTheory| -> Vec<&str> {
            builtin_catalog(t).iter().map(|r| r.name).collect()
        };
        assert_eq!(
            names(PureTheory::Set),
            vec!["empty", "insert", "union", "min_set", "max_set"]
        );
        assert_eq!(
            names(PureTheory::List),
            vec!["empty", "cons", "append", "head", "min_list", "max_list"]
        );
        assert_eq!(names(PureTheory::Int), vec!["zero", "succ", "plus", "leq", "lt"]);
    }

    #[test]
    fn insert_binds_output() {
        let got = eval_pure(
            PureTheory::Set,
            "insert",
            &[Some(set(&[2, 3])), Some(PureValue::Int(1)), None],
        )
        .unwrap();
        assert_eq!(got, vec![vec![set(&[2, 3]), PureValue::Int(1), set(&[1, 2, 3])]]);
    }

    #[test]
    fn min_set_from_fig2_graph2() {
        let got = eval_pure(PureTheory::Set, "min_set", &[None, Some(set(&[2, 4, 6, 9]))]).unwrap();
        assert_eq!(got[0][0], PureValue::Int(2));
    }

    #[test]
    fn leq_failure_yields_no_bindings() {
        let got = eval_pure(
            PureTheory::Int,
            "leq",
            &[Some(PureValue::Int(5)), Some(PureValue::Int(3))],
        )
        .unwrap();
        assert!(got.is_empty());
    }

    #[test]
    fn unbound_input_is_mode_violation() {
        let err = eval_pure(PureTheory::Set, "min_set", &[Some(PureValue::Int(1)), None]);
        assert!(err.is_err());
    }

    #[test]
    fn insert_chain_is_redundant() {
        // insert(SY,V,T), insert(T,V,S) with T local reduces to insert(SY,V,S).
        let lits = vec![
            PureAtom::new("insert", vec![0, 1, 2]),
            PureAtom::new("insert", vec![2, 1, 3]),
        ];
        let external: BTreeSet<u32> = [0, 1, 3].into_iter().collect();
        let got = is_redundant_conjunction(&lits, &external, PureTheory::Set).unwrap();
        assert_eq!(got, vec![PureAtom::new("insert", vec![0, 1, 3])]);
    }

    #[test]
    fn insert_chain_with_shared_mid_is_kept() {
        // Same shape, but T occurs elsewhere in the clause: no reduction.
        let lits = vec![
            PureAtom::new("insert", vec![0, 1, 2]),
            PureAtom::new("insert", vec![2, 1, 3]),
        ];
        let external: BTreeSet<u32> = [0, 1, 2, 3].into_iter().collect();
        assert!(is_redundant_conjunction(&lits, &external, PureTheory::Set).is_none());
    }

    #[test]
    fn lt_transitivity_is_redundant() {
        let lits = vec![
            PureAtom::new("lt", vec![0, 1]),
            PureAtom::new("lt", vec![1, 2]),
            PureAtom::new("lt", vec![0, 2]),
        ];
        let external: BTreeSet<u32> = [0, 1, 2].into_iter().collect();
        let got = is_redundant_conjunction(&lits, &external, PureTheory::Int).unwrap();
        assert_eq!(got.len(), 2);
    }

    #[test]
    fn single_empty_is_minimal() {
        let lits = vec![PureAtom::new("empty", vec![0])];
        let external: BTreeSet<u32> = [0].into_iter().collect();
        assert!(is_redundant_conjunction(&lits, &external, PureTheory::Set).is_none());
    }

    #[test]
    fn fd_merges_duplicate_inserts() {
        // insert(A,V,S), insert(A,V,T) forces S = T.
        let lits = vec![
            PureAtom::new("insert", vec![0, 1, 2]),
            PureAtom::new("insert", vec![0, 1, 3]),
            PureAtom::new("min_set", vec![1, 3]),
        ];
        let external: BTreeSet<u32> = [0, 1, 2].into_iter().collect();
        let got = is_redundant_conjunction(&lits, &external, PureTheory::Set).unwrap();
        assert_eq!(got.len(), 2);
        assert!(got.contains(&PureAtom::new("min_set", vec![1, 2])));
    }

    #[test]
    fn partial_le_follows_insert() {
        let lits = vec![PureAtom::new("insert", vec![0, 1, 2])];
        assert!(partial_le(0, 2, &lits, PureTheory::Set, false));
        assert!(partial_le(2, 2, &[], PureTheory::Set, false));
        assert!(!partial_le(2, 0, &lits, PureTheory::Set, false));
    }

    #[test]
    fn int_partial_order_is_gated() {
        let lits = vec![PureAtom::new("succ", vec![0, 1])];
        assert!(!partial_le(0, 1, &lits, PureTheory::Int, false));
        assert!(partial_le(0, 1, &lits, PureTheory::Int, true));
    }

    #[test]
    fn eval_is_deterministic_and_terminates() {
        // Every catalog relation, exercised over a seeded sample of ground
        // inputs, terminates and yields the same result twice.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let domain_val = |rng: &mut rand_chacha::ChaCha8Rng, sort: ValueSort| -> PureValue {
            match sort {
                ValueSort::Int => PureValue::Int(rng.gen_range(0..5)),
                ValueSort::Set => {
                    PureValue::Set((0..3).filter(|_| rng.gen_bool(0.5)).collect())
                }
                ValueSort::List => {
                    let n = rng.gen_range(0..4);
                    PureValue::List((0..n).map(|_| rng.gen_range(0..3)).collect())
                }
            }
        };
        for theory in [PureTheory::Set, PureTheory::List, PureTheory::Int] {
            for rel in builtin_catalog(theory) {
                for _ in 0..1000 {
                    let args: Vec<Option<PureValue>> = rel
                        .sorts
                        .iter()
                        .map(|&s| Some(domain_val(&mut rng, s)))
                        .collect();
                    let a = eval_pure(theory, rel.name, &args).unwrap();
                    let b = eval_pure(theory, rel.name, &args).unwrap();
                    assert_eq!(a, b);
                    assert!(a.len() <= 1, "ground call is a check");
                }
            }
        }
    }
}
