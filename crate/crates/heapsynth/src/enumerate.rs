//! Candidate generation: well-formed hypotheses of bounded size in a
//! canonical order, filtered by the semantic pruning rules, the placeholder
//! occurrence rule, clause minimisation, and the specialisation cores
//! accumulated by the learner.
//!
//! Clauses are built literal-by-literal in ascending literal order with
//! variables introduced in first-use order, so a rejected prefix cuts a
//! whole subtree. Specialisation cores cut subtrees too: once a core's
//! clause skeleton is fully matched into the prefix of the clause under
//! construction (with the candidate's other clauses already covered by the
//! same core), every completion is a known-bad specialisation.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::sync::Arc;

use crate::graph::{GraphValue, Task};
use crate::hypothesis::{
    theta_subsumes, Clause, ClauseKind, Hypothesis, Lit, Name, PredKey, PredicateDef, Shape, Var,
    VarKind, THIS,
};
use crate::theory::{self, PureAtom, PureTheory, ValueSort};

/// Task-derived literal vocabulary.
#[derive(Debug, Clone)]
pub struct Vocab {
    pub theory: PureTheory,
    pub po_int: bool,
    pub pointer_fields: Vec<Name>,
    pub value_fields: Vec<Name>,
    pub pred_name: Name,
    pub head_kinds: Vec<VarKind>,
}

impl Vocab {
    pub fn from_task(task: &Task) -> Option<Vocab> {
        let ex = task.positives.first()?;
        let mut head_kinds = vec![match ex.root {
            GraphValue::Int(_) => VarKind::Pure(ValueSort::Int),
            _ => VarKind::Pointer,
        }];
        for a in &ex.extra_args {
            head_kinds.push(match a {
                GraphValue::Int(_) => VarKind::Pure(ValueSort::Int),
                _ => VarKind::Pointer,
            });
        }
        if ex.payload.is_some() {
            head_kinds.push(VarKind::Pure(task.theory.payload_sort()));
        }
        Some(Vocab {
            theory: task.theory,
            po_int: task.po_int,
            pointer_fields: task.pointer_fields().into_iter().map(Name::from).collect(),
            value_fields: task.value_fields().into_iter().map(Name::from).collect(),
            pred_name: Name::from(ex.pred.as_str()),
            head_kinds,
        })
    }

    pub fn arity(&self) -> usize {
        self.head_kinds.len()
    }

    fn invented_name(&self, i: usize) -> Name {
        if i == 0 {
            Name::from(format!("{}_aux", self.pred_name).as_str())
        } else {
            Name::from(format!("{}_aux{}", self.pred_name, i + 1).as_str())
        }
    }
}

/// The four toggleable semantic filters. Basic reachability (rule 1) is
/// enforced by the clause grammar itself and has no switch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StaticFilters {
    pub basic_assumptions: bool,
    pub restricted_null: bool,
    pub quasi_wf: bool,
    pub heap_functionality: bool,
}

impl StaticFilters {
    pub fn all() -> StaticFilters {
        StaticFilters {
            basic_assumptions: true,
            restricted_null: true,
            quasi_wf: true,
            heap_functionality: true,
        }
    }

    /// The `--no-sl-pruning` ablation.
    pub fn none() -> StaticFilters {
        StaticFilters {
            basic_assumptions: false,
            restricted_null: false,
            quasi_wf: false,
            heap_functionality: false,
        }
    }
}

/// Search-space bounds for one learning round.
#[derive(Debug, Clone, Copy)]
pub struct SearchBounds {
    /// Per-clause variable cap.
    pub max_var: usize,
    /// Per-clause body-literal cap.
    pub max_body: usize,
    pub shape: Shape,
    /// Total body-literal budget across all clauses.
    pub max_size: usize,
}

/// A forbidden region: every specialisation of this hypothesis is pruned.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PruneCore {
    pub skeleton: Hypothesis,
}

/// Accumulated pruning state for one search. Cores are only added, never
/// removed, within one search.
#[derive(Debug, Clone, Default)]
pub struct ConstraintStore {
    pub cores: Vec<PruneCore>,
    /// Pair cores grouped by distinct base side, smallest bases first; the
    /// values are the recursive sides seen with that base.
    by_base: Vec<(Clause, Vec<Clause>)>,
    /// Pair cores grouped by distinct recursive side.
    by_rec: Vec<(Clause, Vec<Clause>)>,
    /// Every distinct core base side, smallest first.
    base_sides: Vec<Clause>,
}

impl ConstraintStore {
    pub fn new() -> ConstraintStore {
        ConstraintStore::default()
    }
}

/// Records that every candidate theta-subsumed by `h` (clause-wise, same
/// predicate role and clause kind) is to be suppressed. Idempotent.
pub fn add_specialisation_core(store: &mut ConstraintStore, h: &Hypothesis) {
    let core = PruneCore {
        skeleton: h.clone(),
    };
    if store.cores.contains(&core) {
        return;
    }
    if h.invented.is_empty() {
        let base = &h.main.base;
        if !store.base_sides.contains(base) {
            let at = store
                .base_sides
                .partition_point(|c| c.body.len() <= base.body.len());
            store.base_sides.insert(at, base.clone());
        }
        if let Some(rec) = &h.main.rec {
            match store.by_base.iter_mut().find(|(b, _)| b == base) {
                Some((_, recs)) => {
                    let at = recs.partition_point(|c| c.body.len() <= rec.body.len());
                    recs.insert(at, rec.clone());
                }
                None => {
                    let at = store
                        .by_base
                        .partition_point(|(c, _)| c.body.len() <= base.body.len());
                    store.by_base.insert(at, (base.clone(), vec![rec.clone()]));
                }
            }
            match store.by_rec.iter_mut().find(|(r, _)| r == rec) {
                Some((_, bases)) => {
                    let at = bases.partition_point(|c| c.body.len() <= base.body.len());
                    bases.insert(at, base.clone());
                }
                None => {
                    let at = store
                        .by_rec
                        .partition_point(|(c, _)| c.body.len() <= rec.body.len());
                    store.by_rec.insert(at, (rec.clone(), vec![base.clone()]));
                }
            }
        }
    }
    store.cores.push(core);
}

/// True iff `h` is a specialisation of some core.
pub fn suppressed(store: &ConstraintStore, h: &Hypothesis) -> bool {
    store
        .cores
        .iter()
        .any(|core| specialises(&core.skeleton, h))
}

/// Program-level subsumption: every clause of `h` is theta-subsumed by a
/// clause of `general` in the same predicate role and of the same kind, so
/// `h` proves at most what `general` proves.
pub fn specialises(general: &Hypothesis, h: &Hypothesis) -> bool {
    if general.invented.len() != h.invented.len() || general.main.arity() != h.main.arity() {
        return false;
    }
    let mut roles = vec![PredKey::Main];
    roles.extend((0..h.invented.len()).map(PredKey::Invented));
    for key in roles {
        let (pg, ph) = (general.pred(key), h.pred(key));
        for c in ph.clauses() {
            let ok = pg
                .clauses()
                .any(|cg| cg.kind == c.kind && theta_subsumes(cg, c));
            if !ok {
                return false;
            }
        }
    }
    true
}

// ---------------------------------------------------------------------------
// The five semantic filters + placeholder + minimisation, as standalone
// clause predicates (true = keep).
// ---------------------------------------------------------------------------

/// Rule 1: every points-to literal starts at the this-parameter.
pub fn filter_basic_reachability(c: &Clause) -> bool {
    c.body
        .iter()
        .all(|l| !matches!(l, Lit::Pointer { source, .. } if *source != THIS))
}

/// Rule 2: a base clause pins the this-parameter to null or to another
/// pointer parameter. Vacuous for recursive clauses and non-pointer roots.
pub fn filter_basic_assumptions(c: &Clause) -> bool {
    if c.kind != ClauseKind::Base || c.var_kinds.first() != Some(&VarKind::Pointer) {
        return true;
    }
    c.body
        .iter()
        .any(|l| matches!(l, Lit::Null(THIS)) || matches!(l, Lit::Eq(THIS, _) | Lit::Eq(_, THIS)))
}

/// Rule 3: a variable asserted null occurs in exactly two positions
/// clause-wide.
pub fn filter_restricted_null(c: &Clause) -> bool {
    c.body.iter().all(|l| match l {
        Lit::Null(v) => c.clause_occurrences(*v) == 2,
        _ => true,
    })
}

/// Rule 4: every payload argument passed to a recursive call is contained
/// in the corresponding head payload under the theory's order. Integer
/// payloads participate only under the `po_int` flag.
pub fn filter_quasi_wf_recursion(c: &Clause, theory: PureTheory, po_int: bool) -> bool {
    let (atoms, _) = c.pure_view();
    c.body.iter().all(|l| match l {
        Lit::Rec { args, .. } => args.iter().enumerate().all(|(i, &b2)| {
            if i >= c.arity as usize {
                return true;
            }
            match c.var_kinds[i] {
                VarKind::Pure(ValueSort::Int) if !po_int => true,
                VarKind::Pure(_) => theory::partial_le(b2, i as Var, &atoms, theory, po_int),
                VarKind::Pointer => true,
            }
        }),
        _ => true,
    })
}

/// Rule 5: each field appears in at most one points-to literal per clause.
pub fn filter_heap_functionality(c: &Clause) -> bool {
    let mut seen = BTreeSet::new();
    c.body.iter().all(|l| match l {
        Lit::Pointer { field, .. } => seen.insert(field.clone()),
        _ => true,
    })
}

/// Placeholder occurrence rule: the placeholder's variable occurs in
/// exactly two positions clause-wide.
pub fn filter_placeholder(c: &Clause) -> bool {
    c.body.iter().all(|l| match l {
        Lit::AnyPointer(v) | Lit::AnyNumber(v) => c.clause_occurrences(*v) == 2,
        _ => true,
    })
}

/// Clause minimisation: reject when a strictly shorter equivalent clause
/// exists.
pub fn filter_minimal(c: &Clause, theory: PureTheory) -> bool {
    let (atoms, external) = c.pure_view();
    let protected: BTreeSet<Var> = (0..c.arity).collect();
    theory::reduce_pure_step(&atoms, &external, &protected, theory).is_none()
}

/// Every pure literal must connect (through shared variables) to the head
/// or to a spatial literal; an all-local pure island is either vacuous or
/// unsatisfiable and only fakes specificity.
pub fn filter_pure_connected(c: &Clause) -> bool {
    let (atoms, external) = c.pure_view();
    if atoms.is_empty() {
        return true;
    }
    let mut connected: BTreeSet<Var> = external;
    loop {
        let before = connected.len();
        for a in &atoms {
            if a.args.iter().any(|v| connected.contains(v)) {
                connected.extend(a.args.iter().copied());
            }
        }
        if connected.len() == before {
            break;
        }
    }
    atoms
        .iter()
        .all(|a| a.args.iter().any(|v| connected.contains(v)))
}

// ---------------------------------------------------------------------------
// Clause generation state
// ---------------------------------------------------------------------------

/// A candidate body literal; the fresh-variable kind is set when the
/// literal introduces the next unused variable index.
type CandLit = (Lit, Option<VarKind>);

/// Pool key: clause kind, owning role, variable-kind profile, and the mask
/// of fields already used (heap functionality skips those).
type PoolKey = (ClauseKind, PredKey, Vec<VarKind>, u64);

#[derive(Default)]
struct PoolCache {
    pools: HashMap<PoolKey, Arc<Vec<CandLit>>>,
}

struct ClauseGen {
    vocab: Arc<Vocab>,
    filters: StaticFilters,
    kind: ClauseKind,
    role: PredKey,
    shape: Shape,
    max_var: usize,
    target_size: usize,
    var_kinds: Vec<VarKind>,
    body: Vec<Lit>,
    /// Body occurrence count per variable, updated incrementally.
    occ: Vec<usize>,
    pure_atoms: Vec<PureAtom>,
    used_fields: u64,
    protected: BTreeSet<Var>,
}

impl ClauseGen {
    fn new(
        vocab: Arc<Vocab>,
        filters: StaticFilters,
        kind: ClauseKind,
        role: PredKey,
        shape: Shape,
        max_var: usize,
        target_size: usize,
    ) -> ClauseGen {
        let var_kinds = vocab.head_kinds.clone();
        let occ = vec![0; var_kinds.len()];
        let protected = (0..vocab.arity() as Var).collect();
        ClauseGen {
            vocab,
            filters,
            kind,
            role,
            shape,
            max_var,
            target_size,
            var_kinds,
            body: Vec::new(),
            occ,
            pure_atoms: Vec::new(),
            used_fields: 0,
            protected,
        }
    }

    fn arity(&self) -> u32 {
        self.vocab.arity() as u32
    }

    fn field_bit(&self, field: &Name) -> u64 {
        let idx = self
            .vocab
            .pointer_fields
            .iter()
            .chain(self.vocab.value_fields.iter())
            .position(|f| f == field)
            .unwrap_or(63);
        1u64 << idx.min(63)
    }

    fn push_lit(&mut self, lit: &Lit, fresh: Option<VarKind>) {
        if let Some(k) = fresh {
            self.var_kinds.push(k);
            self.occ.push(0);
        }
        for v in lit.vars() {
            self.occ[v as usize] += 1;
        }
        if let Lit::Pointer { field, .. } = lit {
            self.used_fields |= self.field_bit(field);
        }
        if let Lit::Pure { rel, args } = lit {
            self.pure_atoms
                .push(PureAtom::new(rel.clone(), args.clone()));
        }
        self.body.push(lit.clone());
    }

    fn pop_lit(&mut self, lit: &Lit, fresh: Option<VarKind>) {
        self.body.pop();
        if matches!(lit, Lit::Pure { .. }) {
            self.pure_atoms.pop();
        }
        if let Lit::Pointer { field, .. } = lit {
            self.used_fields &= !self.field_bit(field);
        }
        for v in lit.vars() {
            self.occ[v as usize] -= 1;
        }
        if fresh.is_some() {
            self.var_kinds.pop();
            self.occ.pop();
        }
    }

    /// Unmet occurrence requirements: unused head variables need one body
    /// occurrence, locals occurring once need a second. Returns the unit
    /// count and the deficient variables.
    fn deficit(&self) -> (usize, Vec<Var>) {
        let mut units = 0;
        let mut vars = Vec::new();
        for v in 0..self.var_kinds.len() as Var {
            let occ = self.occ[v as usize];
            let want = if v < self.arity() {
                usize::from(occ == 0)
            } else {
                2usize.saturating_sub(occ)
            };
            if want > 0 {
                units += want;
                vars.push(v);
            }
        }
        (units, vars)
    }

    fn clause_occurrences(&self, v: Var) -> usize {
        usize::from(v < self.arity()) + self.occ[v as usize]
    }

    fn prefix_ok(&self, lit: &Lit) -> bool {
        // Occurrence caps are monotone: once exceeded they never recover.
        for l in &self.body {
            match l {
                Lit::Null(v) if self.filters.restricted_null => {
                    if self.clause_occurrences(*v) > 2 {
                        return false;
                    }
                }
                Lit::AnyPointer(v) | Lit::AnyNumber(v) => {
                    if self.clause_occurrences(*v) > 2 {
                        return false;
                    }
                }
                _ => {}
            }
        }
        if matches!(lit, Lit::Pure { .. }) {
            let new = self.pure_atoms.last().unwrap();
            let prior = &self.pure_atoms[..self.pure_atoms.len() - 1];
            if theory::extension_stable_reducible(new, prior, &self.protected, self.vocab.theory) {
                return false;
            }
        }
        true
    }

    fn as_partial_clause(&self) -> Clause {
        Clause {
            kind: self.kind,
            arity: self.arity(),
            var_kinds: self.var_kinds.clone(),
            body: self.body.clone(),
        }
    }

    fn final_ok(&self) -> bool {
        for v in 0..self.var_kinds.len() as Var {
            let occ = self.occ[v as usize];
            if v < self.arity() {
                if occ == 0 {
                    return false;
                }
            } else if occ < 2 {
                return false;
            }
        }
        let c = self.as_partial_clause();
        if !filter_placeholder(&c) || !filter_pure_connected(&c) {
            return false;
        }
        if self.filters.restricted_null && !filter_restricted_null(&c) {
            return false;
        }
        if self.filters.basic_assumptions && !filter_basic_assumptions(&c) {
            return false;
        }
        if self.filters.quasi_wf
            && !filter_quasi_wf_recursion(&c, self.vocab.theory, self.vocab.po_int)
        {
            return false;
        }
        if !filter_minimal(&c, self.vocab.theory) {
            return false;
        }
        true
    }

    // ---- candidate pools --------------------------------------------------

    fn pool(&self, cache: &mut PoolCache) -> Arc<Vec<CandLit>> {
        let key: PoolKey = (
            self.kind,
            self.role,
            self.var_kinds.clone(),
            if self.filters.heap_functionality {
                self.used_fields
            } else {
                0
            },
        );
        if let Some(p) = cache.pools.get(&key) {
            return p.clone();
        }
        let mut out: Vec<CandLit> = Vec::new();
        match self.kind {
            ClauseKind::Base => {
                self.base_lits(&mut out);
                self.pure_lits(&mut out);
            }
            ClauseKind::Recursive => {
                self.pointer_lits(&mut out);
                self.rec_lits(&mut out);
                self.pure_lits(&mut out);
            }
        }
        out.sort();
        out.dedup();
        let out = Arc::new(out);
        cache.pools.insert(key, out.clone());
        out
    }

    fn vars_of_kind(&self, k: VarKind) -> Vec<Var> {
        (0..self.var_kinds.len() as Var)
            .filter(|&v| self.var_kinds[v as usize] == k)
            .collect()
    }

    fn base_lits(&self, out: &mut Vec<CandLit>) {
        let head_ptrs: Vec<Var> = (0..self.arity())
            .filter(|&v| self.var_kinds[v as usize] == VarKind::Pointer)
            .collect();
        for &p in &head_ptrs {
            out.push((Lit::Null(p), None));
            out.push((Lit::AnyPointer(p), None));
        }
        for &p in &head_ptrs {
            if p != THIS {
                out.push((Lit::Eq(THIS, p), None));
            }
        }
        for v in 0..self.arity() {
            if self.var_kinds[v as usize] == VarKind::Pure(ValueSort::Int) {
                out.push((Lit::AnyNumber(v), None));
            }
        }
    }

    fn pointer_lits(&self, out: &mut Vec<CandLit>) {
        let fields = self
            .vocab
            .pointer_fields
            .iter()
            .map(|f| (f, VarKind::Pointer))
            .chain(
                self.vocab
                    .value_fields
                    .iter()
                    .map(|f| (f, VarKind::Pure(ValueSort::Int))),
            );
        for (field, tkind) in fields {
            if self.filters.heap_functionality && self.used_fields & self.field_bit(field) != 0 {
                continue;
            }
            for v in self.vars_of_kind(tkind) {
                out.push((
                    Lit::Pointer {
                        field: field.clone(),
                        source: THIS,
                        target: v,
                    },
                    None,
                ));
            }
            if self.var_kinds.len() < self.max_var {
                out.push((
                    Lit::Pointer {
                        field: field.clone(),
                        source: THIS,
                        target: self.var_kinds.len() as Var,
                    },
                    Some(tkind),
                ));
            }
        }
    }

    fn rec_lits(&self, out: &mut Vec<CandLit>) {
        let mut targets = Vec::new();
        match self.role {
            PredKey::Main => {
                targets.push(PredKey::Main);
                targets.extend((0..self.shape.invented).map(PredKey::Invented));
            }
            PredKey::Invented(i) => targets.push(PredKey::Invented(i)),
        }
        for target in targets {
            // Invented predicates share the main head kinds.
            let kinds = self.vocab.head_kinds.clone();
            self.expand_args(&kinds, &mut |args, fresh| {
                // The driving argument must differ from This: a recursive
                // call re-entering the same root is never finitely provable
                // top-down.
                if args.first() == Some(&THIS) {
                    return;
                }
                out.push((Lit::Rec { target, args }, fresh));
            });
        }
    }

    fn pure_lits(&self, out: &mut Vec<CandLit>) {
        for rel in self.vocab.theory.ops().catalog() {
            let kinds: Vec<VarKind> = rel.sorts.iter().map(|&s| VarKind::Pure(s)).collect();
            self.expand_args(&kinds, &mut |args, fresh| {
                out.push((
                    Lit::Pure {
                        rel: Name::from(rel.name),
                        args,
                    },
                    fresh,
                ));
            });
        }
    }

    /// Cartesian expansion of argument slots over existing variables of the
    /// right kind, plus at most one fresh introduction per literal (a body
    /// literal generates at most one new variable).
    fn expand_args(&self, kinds: &[VarKind], f: &mut impl FnMut(Vec<Var>, Option<VarKind>)) {
        fn go(
            gen: &ClauseGen,
            kinds: &[VarKind],
            at: usize,
            args: &mut Vec<Var>,
            fresh: &mut Option<VarKind>,
            f: &mut impl FnMut(Vec<Var>, Option<VarKind>),
        ) {
            if at == kinds.len() {
                f(args.clone(), *fresh);
                return;
            }
            let want = kinds[at];
            let nvars = gen.var_kinds.len() as Var;
            for v in 0..nvars {
                if gen.var_kinds[v as usize] == want {
                    args.push(v);
                    go(gen, kinds, at + 1, args, fresh, f);
                    args.pop();
                }
            }
            if fresh.is_none() && (nvars as usize) < gen.max_var {
                args.push(nvars);
                *fresh = Some(want);
                go(gen, kinds, at + 1, args, fresh, f);
                *fresh = None;
                args.pop();
            } else if *fresh == Some(want) {
                // The literal may repeat its own fresh variable.
                args.push(nvars);
                go(gen, kinds, at + 1, args, fresh, f);
                args.pop();
            }
        }
        go(self, kinds, 0, &mut Vec::new(), &mut None, f)
    }
}

// ---------------------------------------------------------------------------
// Lazy clause streams
// ---------------------------------------------------------------------------

/// Resumable depth-first clause stream: an explicit-stack walk over the
/// generation tree yielding one filtered clause at a time, with a caller
/// hook that can abandon whole subtrees.
struct LazyClauses {
    gen: ClauseGen,
    /// One frame per depth: the candidate pool and the current choice. The
    /// literal chosen at a frame stays pushed in `gen` while deeper frames
    /// exist.
    stack: Vec<(Arc<Vec<CandLit>>, usize)>,
    done: bool,
}

impl LazyClauses {
    fn new(gen: ClauseGen, cache: &mut PoolCache) -> LazyClauses {
        if gen.target_size == 0 {
            return LazyClauses {
                gen,
                stack: Vec::new(),
                done: true,
            };
        }
        let pool = gen.pool(cache);
        LazyClauses {
            gen,
            stack: vec![(pool, 0)],
            done: false,
        }
    }

    fn next(
        &mut self,
        cache: &mut PoolCache,
        cut: &mut dyn FnMut(&ClauseGen) -> bool,
    ) -> Option<Clause> {
        if self.done {
            return None;
        }
        loop {
            let depth = self.stack.len() - 1;
            debug_assert_eq!(depth, self.gen.body.len());
            let (pool, idx) = {
                let top = self.stack.last().unwrap();
                (top.0.clone(), top.1)
            };

            let remaining = self.gen.target_size - depth;
            let (deficit, need) = self.gen.deficit();
            let level_dead =
                idx >= pool.len() || deficit > remaining * 3 || (remaining == 1 && need.len() > 3);
            if level_dead {
                self.stack.pop();
                match self.stack.last_mut() {
                    None => {
                        self.done = true;
                        return None;
                    }
                    Some(frame) => {
                        let (lit, fresh) = frame.0[frame.1].clone();
                        self.gen.pop_lit(&lit, fresh);
                        frame.1 += 1;
                        continue;
                    }
                }
            }

            let (lit, fresh) = pool[idx].clone();
            if remaining == 1 {
                // The final literal must cover every deficient variable.
                let vs = lit.vars();
                if !need.iter().all(|v| vs.contains(v)) {
                    self.stack.last_mut().unwrap().1 += 1;
                    continue;
                }
            }
            self.gen.push_lit(&lit, fresh);
            if !self.gen.prefix_ok(&lit) || cut(&self.gen) {
                self.gen.pop_lit(&lit, fresh);
                self.stack.last_mut().unwrap().1 += 1;
                continue;
            }
            if remaining == 1 {
                let clause = self.gen.final_ok().then(|| self.gen.as_partial_clause());
                self.gen.pop_lit(&lit, fresh);
                self.stack.last_mut().unwrap().1 += 1;
                if let Some(c) = clause {
                    return Some(c);
                }
                continue;
            }
            // Descend; the child pool starts past the literal just chosen.
            let child_pool = self.gen.pool(cache);
            let start = child_pool.partition_point(|(l, _)| l <= &lit);
            self.stack.push((child_pool, start));
        }
    }
}

// ---------------------------------------------------------------------------
// Hypothesis streaming
// ---------------------------------------------------------------------------

type SlotKey = (PredKey, ClauseKind, usize);

/// Cursor over the candidate stream at one total size: compositions of the
/// body budget over clause slots, walked base-only first, then base and
/// recursive pairs by base size.
pub struct Cursor {
    pub size: usize,
    comp: usize,
    outer: Option<OuterState>,
    buffer: VecDeque<Hypothesis>,
    /// Inner-walk completions observed (pre-suppression), for reports.
    pub generated: u64,
}

impl Cursor {
    pub fn at_size(size: usize) -> Cursor {
        Cursor {
            size,
            comp: 0,
            outer: None,
            buffer: VecDeque::new(),
            generated: 0,
        }
    }
}

struct OuterState {
    /// Index (into the composition) of the innermost, core-cut slot.
    inner_slot: usize,
    /// Lazy iterators for the outer slots, paired with their composition
    /// index.
    iters: Vec<(usize, LazyClauses)>,
    fixed: Vec<Option<Clause>>,
    primed: bool,
}

pub struct Enumerator {
    pub vocab: Arc<Vocab>,
    pub bounds: SearchBounds,
    filters: StaticFilters,
    cache: HashMap<SlotKey, Arc<Vec<Clause>>>,
    pools: PoolCache,
    comps: HashMap<usize, Vec<Vec<SlotKey>>>,
}

impl Enumerator {
    pub fn new(vocab: Vocab, bounds: SearchBounds, filters: StaticFilters) -> Enumerator {
        Enumerator {
            vocab: Arc::new(vocab),
            bounds,
            filters,
            cache: HashMap::new(),
            pools: PoolCache::default(),
            comps: HashMap::new(),
        }
    }

    fn lazy(&mut self, role: PredKey, kind: ClauseKind, size: usize) -> LazyClauses {
        let gen = ClauseGen::new(
            self.vocab.clone(),
            self.filters,
            kind,
            role,
            self.bounds.shape,
            self.bounds.max_var,
            size,
        );
        LazyClauses::new(gen, &mut self.pools)
    }

    /// Materialized clause list for one slot (tests and reports only).
    fn clauses(&mut self, role: PredKey, kind: ClauseKind, size: usize) -> Arc<Vec<Clause>> {
        let key = (role, kind, size);
        if let Some(c) = self.cache.get(&key) {
            return c.clone();
        }
        let mut lazy = self.lazy(role, kind, size);
        let mut got = Vec::new();
        while let Some(c) = lazy.next(&mut self.pools, &mut |_| false) {
            got.push(c);
        }
        let got = Arc::new(got);
        self.cache.insert(key, got.clone());
        got
    }

    /// Number of filtered clauses in one slot.
    pub fn clause_count(&mut self, role: PredKey, kind: ClauseKind, size: usize) -> usize {
        self.clauses(role, kind, size).len()
    }

    fn compositions(&mut self, s: usize) -> Vec<Vec<SlotKey>> {
        let max_body = self.bounds.max_body;
        let shape = self.bounds.shape;
        self.comps
            .entry(s)
            .or_insert_with(|| {
                let mut out = Vec::new();
                if shape.invented == 0 {
                    if s <= max_body {
                        out.push(vec![(PredKey::Main, ClauseKind::Base, s)]);
                    }
                    for b in 1..s {
                        let r = s - b;
                        if b <= max_body && r <= max_body {
                            out.push(vec![
                                (PredKey::Main, ClauseKind::Base, b),
                                (PredKey::Main, ClauseKind::Recursive, r),
                            ]);
                        }
                    }
                } else {
                    for mb in 1..=max_body.min(s) {
                        for mr in 1..=max_body.min(s.saturating_sub(mb)) {
                            for ib in 1..=max_body.min(s.saturating_sub(mb + mr)) {
                                let ir = s as isize - (mb + mr + ib) as isize;
                                if ir >= 1 && ir as usize <= max_body {
                                    out.push(vec![
                                        (PredKey::Main, ClauseKind::Base, mb),
                                        (PredKey::Main, ClauseKind::Recursive, mr),
                                        (PredKey::Invented(0), ClauseKind::Base, ib),
                                        (PredKey::Invented(0), ClauseKind::Recursive, ir as usize),
                                    ]);
                                }
                            }
                        }
                    }
                }
                out
            })
            .clone()
    }

    fn assemble(&self, parts: Vec<(SlotKey, Clause)>) -> Hypothesis {
        let mut main_base = None;
        let mut main_rec = None;
        let mut inv: Vec<(Option<Clause>, Option<Clause>)> =
            vec![(None, None); self.bounds.shape.invented];
        for ((role, kind, _), clause) in parts {
            match (role, kind) {
                (PredKey::Main, ClauseKind::Base) => main_base = Some(clause),
                (PredKey::Main, ClauseKind::Recursive) => main_rec = Some(clause),
                (PredKey::Invented(i), ClauseKind::Base) => inv[i].0 = Some(clause),
                (PredKey::Invented(i), ClauseKind::Recursive) => inv[i].1 = Some(clause),
            }
        }
        Hypothesis {
            main: PredicateDef {
                name: self.vocab.pred_name.clone(),
                base: main_base.expect("main base present"),
                rec: main_rec,
            },
            invented: inv
                .into_iter()
                .enumerate()
                .map(|(i, (b, r))| PredicateDef {
                    name: self.vocab.invented_name(i),
                    base: b.expect("invented base present"),
                    rec: r,
                })
                .collect(),
        }
    }

    fn invented_used(&self, h: &Hypothesis) -> bool {
        (0..h.invented.len()).all(|i| {
            h.main.clauses().any(|c| {
                c.body
                    .iter()
                    .any(|l| matches!(l, Lit::Rec { target: PredKey::Invented(j), .. } if *j == i))
            })
        })
    }

    /// Core skeletons that may cut the inner walk: cores whose other-side
    /// clauses already subsume the fixed slots. Capped to the smallest
    /// groups; emission still checks candidates against the full core set.
    fn cut_clauses(
        &self,
        store: &ConstraintStore,
        fixed: &[(SlotKey, &Clause)],
        inner_slot: SlotKey,
    ) -> Vec<Clause> {
        const MAX_GROUPS: usize = 64;
        const MAX_CUTS: usize = 512;
        let mut out: Vec<Clause> = Vec::new();
        if self.bounds.shape.invented == 0 {
            match (inner_slot.1, fixed.first()) {
                // Base-only candidates: every core base side cuts, because a
                // base-only candidate is covered as soon as its single
                // clause is subsumed.
                (ClauseKind::Base, None) => {
                    out.extend(store.base_sides.iter().take(MAX_CUTS).cloned());
                }
                (ClauseKind::Recursive, Some((_, outer_base))) => {
                    for (base_side, recs) in store.by_base.iter().take(MAX_GROUPS) {
                        if theta_subsumes(base_side, outer_base) {
                            for r in recs {
                                if out.len() >= MAX_CUTS {
                                    break;
                                }
                                if !out.contains(r) {
                                    out.push(r.clone());
                                }
                            }
                        }
                    }
                }
                (ClauseKind::Base, Some((_, outer_rec))) => {
                    for (rec_side, bases) in store.by_rec.iter().take(MAX_GROUPS) {
                        if theta_subsumes(rec_side, outer_rec) {
                            for b in bases {
                                if out.len() >= MAX_CUTS {
                                    break;
                                }
                                if !out.contains(b) {
                                    out.push(b.clone());
                                }
                            }
                        }
                    }
                }
                // Pair compositions always carry a base slot.
                (ClauseKind::Recursive, None) => {}
            }
        } else {
            // Invented shapes go through the generic path over all cores.
            let (in_role, in_kind, _) = inner_slot;
            'core: for core in &store.cores {
                let cs = &core.skeleton;
                if cs.invented.len() != self.bounds.shape.invented {
                    continue;
                }
                let clause_of = |role: PredKey, kind: ClauseKind| -> Option<&Clause> {
                    let p = cs.pred(role);
                    match kind {
                        ClauseKind::Base => Some(&p.base),
                        ClauseKind::Recursive => p.rec.as_ref(),
                    }
                };
                let Some(inner_side) = clause_of(in_role, in_kind) else {
                    continue;
                };
                for ((role, kind, _), clause) in fixed {
                    match clause_of(*role, *kind) {
                        Some(side) if theta_subsumes(side, clause) => {}
                        _ => continue 'core,
                    }
                }
                if out.len() >= MAX_CUTS {
                    break;
                }
                if !out.contains(inner_side) {
                    out.push(inner_side.clone());
                }
            }
        }
        out.sort_by_key(|c| c.body.len());
        out
    }

    /// Next candidate at `cursor.size`; `None` when the size is exhausted
    /// (the caller bumps the size per the outer search loop). An emitted
    /// candidate is never theta-subsumed by a core present in `store` at
    /// call time.
    pub fn next_candidate(
        &mut self,
        store: &ConstraintStore,
        cursor: &mut Cursor,
    ) -> Option<Hypothesis> {
        loop {
            // Buffered candidates are re-checked against cores added after
            // their inner walk ran.
            while let Some(h) = cursor.buffer.pop_front() {
                if !suppressed(store, &h) {
                    return Some(h);
                }
            }
            let comps = self.compositions(cursor.size);
            if cursor.comp >= comps.len() {
                return None;
            }
            let picks = comps[cursor.comp].clone();
            if cursor.outer.is_none() {
                // The largest slot is walked innermost so cores cut its
                // subtrees; ties prefer the recursive side.
                let mut inner_slot = 0;
                for (i, &(_, kind, sz)) in picks.iter().enumerate() {
                    let (_, bkind, bsz) = picks[inner_slot];
                    if sz > bsz
                        || (sz == bsz && kind == ClauseKind::Recursive && bkind == ClauseKind::Base)
                    {
                        inner_slot = i;
                    }
                }
                let iters: Vec<(usize, LazyClauses)> = picks
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != inner_slot)
                    .map(|(i, &(role, kind, sz))| (i, self.lazy(role, kind, sz)))
                    .collect();
                let n = iters.len();
                cursor.outer = Some(OuterState {
                    inner_slot,
                    iters,
                    fixed: vec![None; n],
                    primed: false,
                });
            }
            if !self.advance_outer(store, cursor, &picks) {
                cursor.comp += 1;
                cursor.outer = None;
            }
        }
    }

    /// Steps the outer odometer and runs the core-cut inner walk for the
    /// new configuration, buffering every surviving candidate. False when
    /// the composition is exhausted.
    fn advance_outer(
        &mut self,
        store: &ConstraintStore,
        cursor: &mut Cursor,
        picks: &[SlotKey],
    ) -> bool {
        let mut outer = cursor.outer.take().unwrap();
        let n = outer.iters.len();
        if !outer.primed {
            for level in 0..n {
                let (_, it) = &mut outer.iters[level];
                match it.next(&mut self.pools, &mut |_| false) {
                    Some(c) => outer.fixed[level] = Some(c),
                    None => return false,
                }
            }
            outer.primed = true;
        } else if n == 0 {
            return false;
        } else {
            let mut level = n - 1;
            loop {
                let stepped = {
                    let (_, it) = &mut outer.iters[level];
                    it.next(&mut self.pools, &mut |_| false)
                };
                match stepped {
                    Some(c) => {
                        outer.fixed[level] = Some(c);
                        // Restart every deeper iterator from scratch.
                        for d in level + 1..n {
                            let slot = outer.iters[d].0;
                            let (role, kind, sz) = picks[slot];
                            let mut fresh = self.lazy(role, kind, sz);
                            match fresh.next(&mut self.pools, &mut |_| false) {
                                Some(c) => {
                                    outer.iters[d].1 = fresh;
                                    outer.fixed[d] = Some(c);
                                }
                                None => return false,
                            }
                        }
                        break;
                    }
                    None if level == 0 => return false,
                    None => level -= 1,
                }
            }
        }

        let fixed_refs: Vec<(SlotKey, &Clause)> = outer
            .iters
            .iter()
            .zip(&outer.fixed)
            .map(|((slot, _), c)| (picks[*slot], c.as_ref().unwrap()))
            .collect();
        let cuts = self.cut_clauses(store, &fixed_refs, picks[outer.inner_slot]);
        let (role, kind, sz) = picks[outer.inner_slot];
        let mut inner = self.lazy(role, kind, sz);
        while let Some(c) = inner.next(&mut self.pools, &mut |gen| {
            if cuts.is_empty() {
                return false;
            }
            let partial = gen.as_partial_clause();
            cuts.iter().any(|cut| theta_subsumes(cut, &partial))
        }) {
            cursor.generated += 1;
            let mut parts: Vec<(SlotKey, Clause)> = fixed_refs
                .iter()
                .map(|(k, cl)| (*k, (*cl).clone()))
                .collect();
            parts.push((picks[outer.inner_slot], c));
            let h = self.assemble(parts);
            if !self.invented_used(&h) {
                continue;
            }
            if suppressed(store, &h) {
                continue;
            }
            cursor.buffer.push_back(h);
        }
        cursor.outer = Some(outer);
        true
    }

    /// Structurally distinct candidates at one total size, before core
    /// suppression; materializes the slot lists, so only suitable for
    /// small bounds (reports, ablation counts, tests).
    pub fn count_at_size(&mut self, size: usize) -> usize {
        let comps = self.compositions(size);
        comps
            .iter()
            .map(|picks| {
                picks
                    .iter()
                    .map(|&(role, kind, sz)| self.clauses(role, kind, sz).len())
                    .product::<usize>()
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_task;
    use crate::hypothesis::{alpha_eq, parse_hypothesis, ParseContext};

    const FIG2: &str = "\
pos(srtl(p11,[1,2,3])). pos(srtl(p21,[2,4,6,9])).
next(p11, p12). next(p12, p13). next(p13, null).
value(p11, 1).  value(p12, 2).  value(p13, 3).
next(p21, p22). next(p22, p23). next(p23, p24). next(p24, null).
value(p21, 2).  value(p22, 4).  value(p23, 6).  value(p24, 9).
";

    fn fig2_vocab() -> (crate::graph::Task, Vocab) {
        let task = parse_task(FIG2)
            .unwrap()
            .override_theory(PureTheory::Set)
            .unwrap();
        let vocab = Vocab::from_task(&task).unwrap();
        (task, vocab)
    }

    fn stream(en: &mut Enumerator, store: &ConstraintStore, max_size: usize) -> Vec<Hypothesis> {
        let mut out = Vec::new();
        for size in 1..=max_size {
            let mut cur = Cursor::at_size(size);
            while let Some(h) = en.next_candidate(store, &mut cur) {
                out.push(h);
            }
        }
        out
    }

    #[test]
    fn srtl_appears_in_the_stream() {
        let (task, vocab) = fig2_vocab();
        let bounds = SearchBounds {
            max_var: 5,
            max_body: 5,
            shape: Shape::main_only(2),
            max_size: 10,
        };
        let mut en = Enumerator::new(vocab, bounds, StaticFilters::all());
        let store = ConstraintStore::new();
        let srtl = parse_hypothesis(
            "srtl(X, S) :- empty(S), nullptr(X).\n\
             srtl(X, S) :- next(X, Y), value(X, V), srtl(Y, SY), min_set(V, S), insert(SY, V, S).\n",
            &ParseContext::from_task(&task),
        )
        .unwrap();
        let all = stream(&mut en, &store, 7);
        assert!(
            all.iter().any(|h| alpha_eq(h, &srtl)),
            "srtl missing from {} candidates",
            all.len()
        );
    }

    #[test]
    fn redundant_double_insert_variant_never_emitted() {
        let (task, vocab) = fig2_vocab();
        let bounds = SearchBounds {
            max_var: 6,
            max_body: 5,
            shape: Shape::main_only(2),
            max_size: 10,
        };
        let mut en = Enumerator::new(vocab, bounds, StaticFilters::all());
        let store = ConstraintStore::new();
        let variant = parse_hypothesis(
            "srtl(X, S) :- empty(S), nullptr(X).\n\
             srtl(X, S) :- next(X, Y), value(X, V), srtl(Y, SY), insert(SY, V, T), insert(T, V, S).\n",
            &ParseContext::from_task(&task),
        )
        .unwrap();
        let all = stream(&mut en, &store, 7);
        assert!(!all.is_empty());
        assert!(all.iter().all(|h| !alpha_eq(h, &variant)));
    }

    #[test]
    fn emitted_candidates_satisfy_all_filters() {
        let (_, vocab) = fig2_vocab();
        let theory = vocab.theory;
        let po_int = vocab.po_int;
        let bounds = SearchBounds {
            max_var: 4,
            max_body: 4,
            shape: Shape::main_only(2),
            max_size: 8,
        };
        let mut en = Enumerator::new(vocab, bounds, StaticFilters::all());
        let store = ConstraintStore::new();
        let all = stream(&mut en, &store, 6);
        assert!(all.len() > 50);
        for h in &all {
            assert!(crate::hypothesis::well_formed(h, theory).is_empty());
            for (_, p) in h.preds() {
                for c in p.clauses() {
                    assert!(filter_basic_reachability(c));
                    assert!(filter_basic_assumptions(c));
                    assert!(filter_restricted_null(c));
                    assert!(filter_quasi_wf_recursion(c, theory, po_int));
                    assert!(filter_heap_functionality(c));
                    assert!(filter_placeholder(c));
                    assert!(filter_minimal(c, theory));
                }
            }
        }
    }

    #[test]
    fn specialisation_core_suppresses_paper_example() {
        // After pruning plus_two(A,B) :- succ(A,A), succ(B,B), the 3-literal
        // specialisation with succ(B,A) added must never be emitted.
        let task = parse_task("pos(plus_two(1, 3)). pos(plus_two(2, 4)).").unwrap();
        let vocab = Vocab::from_task(&task).unwrap();
        let ctx = ParseContext::from_task(&task);
        let bounds = SearchBounds {
            max_var: 3,
            max_body: 3,
            shape: Shape::main_only(2),
            max_size: 6,
        };
        let pruned = parse_hypothesis("plus_two(A, B) :- succ(A, A), succ(B, B).\n", &ctx).unwrap();
        let special = parse_hypothesis(
            "plus_two(A, B) :- succ(A, A), succ(B, A), succ(B, B).\n",
            &ctx,
        )
        .unwrap();
        let mut with_core = ConstraintStore::new();
        add_specialisation_core(&mut with_core, &pruned);
        add_specialisation_core(&mut with_core, &pruned);
        assert_eq!(with_core.cores.len(), 1);

        let mut en = Enumerator::new(vocab.clone(), bounds, StaticFilters::all());
        let without: Vec<Hypothesis> = stream(&mut en, &ConstraintStore::new(), 4);
        assert!(without.iter().any(|h| alpha_eq(h, &special)));

        let mut en2 = Enumerator::new(vocab, bounds, StaticFilters::all());
        let with: Vec<Hypothesis> = stream(&mut en2, &with_core, 4);
        assert!(with.iter().all(|h| !alpha_eq(h, &special)));
        assert!(with.len() < without.len());
    }

    #[test]
    fn enumeration_is_deterministic() {
        let (_, vocab) = fig2_vocab();
        let bounds = SearchBounds {
            max_var: 4,
            max_body: 4,
            shape: Shape::main_only(2),
            max_size: 8,
        };
        let store = ConstraintStore::new();
        let mut a = Enumerator::new(vocab.clone(), bounds, StaticFilters::all());
        let mut b = Enumerator::new(vocab, bounds, StaticFilters::all());
        assert_eq!(stream(&mut a, &store, 5), stream(&mut b, &store, 5));
    }

    #[test]
    fn disabling_filters_grows_the_space() {
        let (_, vocab) = fig2_vocab();
        let bounds = SearchBounds {
            max_var: 4,
            max_body: 3,
            shape: Shape::main_only(2),
            max_size: 6,
        };
        let mut with = Enumerator::new(vocab.clone(), bounds, StaticFilters::all());
        let mut without = Enumerator::new(vocab, bounds, StaticFilters::none());
        let n_with: usize = (1..=6).map(|s| with.count_at_size(s)).sum();
        let n_without: usize = (1..=6).map(|s| without.count_at_size(s)).sum();
        assert!(n_without > 2 * n_with, "with={n_with} without={n_without}");
    }
}
