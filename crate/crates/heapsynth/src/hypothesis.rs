//! Candidate predicate definitions: the clause AST, well-formedness against
//! the predicate grammar, size metrics, theta-subsumption, the generality
//! quasi-order, canonical forms, and rendering.
//!
//! Variables are clause-local indices. Index 0 is always `This`, the fixed
//! first head argument; indices `1..arity` are the remaining head
//! parameters, and higher indices are body locals introduced in first-use
//! order. Kinds live in [`Clause::var_kinds`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::lexer::{lex, Pos, SpannedTok, Tok};
use crate::theory::{self, PureAtom, PureTheory, ValueSort};

pub type Name = Arc<str>;
pub type Var = u32;

pub const THIS: Var = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarKind {
    Pointer,
    Pure(ValueSort),
}

/// Which predicate a recursive literal calls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PredKey {
    Main,
    Invented(usize),
}

/// A body literal. The variant order is the canonical literal order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Lit {
    /// `field(source, target)` — a points-to or value edge from the graphs.
    Pointer { field: Name, source: Var, target: Var },
    /// `nullptr(v)`
    Null(Var),
    /// `eq(a, b)` — base clauses only.
    Eq(Var, Var),
    /// Recursive call.
    Rec { target: PredKey, args: Vec<Var> },
    /// Theory relation over pure variables.
    Pure { rel: Name, args: Vec<Var> },
    /// `anypointer(v)` — placeholder for a free pointer.
    AnyPointer(Var),
    /// `anynumber(v)` — placeholder for a free number.
    AnyNumber(Var),
}

impl Lit {
    pub fn vars(&self) -> Vec<Var> {
        match self {
            Lit::Pointer { source, target, .. } => vec![*source, *target],
            Lit::Null(v) | Lit::AnyPointer(v) | Lit::AnyNumber(v) => vec![*v],
            Lit::Eq(a, b) => vec![*a, *b],
            Lit::Rec { args, .. } | Lit::Pure { args, .. } => args.clone(),
        }
    }

    fn map_vars(&self, f: impl Fn(Var) -> Var) -> Lit {
        match self {
            Lit::Pointer {
                field,
                source,
                target,
            } => Lit::Pointer {
                field: field.clone(),
                source: f(*source),
                target: f(*target),
            },
            Lit::Null(v) => Lit::Null(f(*v)),
            Lit::Eq(a, b) => Lit::Eq(f(*a), f(*b)),
            Lit::Rec { target, args } => Lit::Rec {
                target: *target,
                args: args.iter().map(|&v| f(v)).collect(),
            },
            Lit::Pure { rel, args } => Lit::Pure {
                rel: rel.clone(),
                args: args.iter().map(|&v| f(v)).collect(),
            },
            Lit::AnyPointer(v) => Lit::AnyPointer(f(*v)),
            Lit::AnyNumber(v) => Lit::AnyNumber(f(*v)),
        }
    }

    pub fn is_placeholder(&self) -> bool {
        matches!(self, Lit::AnyPointer(_) | Lit::AnyNumber(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClauseKind {
    Base,
    Recursive,
}

/// One clause. Head arguments are implicitly the variables `0..arity`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Clause {
    pub kind: ClauseKind,
    pub arity: u32,
    pub var_kinds: Vec<VarKind>,
    pub body: Vec<Lit>,
}

impl Clause {
    pub fn nvars(&self) -> u32 {
        self.var_kinds.len() as u32
    }

    /// Number of body literals (heads are not counted).
    pub fn numlit(&self) -> usize {
        self.body.len()
    }

    /// Occurrence count of `v` across the body.
    pub fn body_occurrences(&self, v: Var) -> usize {
        self.body
            .iter()
            .flat_map(|l| l.vars())
            .filter(|&w| w == v)
            .count()
    }

    /// Occurrence count of `v` across head and body (the head contributes
    /// one occurrence per parameter slot).
    pub fn clause_occurrences(&self, v: Var) -> usize {
        usize::from(v < self.arity) + self.body_occurrences(v)
    }

    /// The pure literals as theory atoms, plus the set of variables that
    /// occur outside the pure part (head slots included).
    pub fn pure_view(&self) -> (Vec<PureAtom>, BTreeSet<Var>) {
        let mut atoms = Vec::new();
        let mut external: BTreeSet<Var> = (0..self.arity).collect();
        for lit in &self.body {
            match lit {
                Lit::Pure { rel, args } => atoms.push(PureAtom::new(rel.clone(), args.clone())),
                other => external.extend(other.vars()),
            }
        }
        (atoms, external)
    }
}

/// A predicate definition: exactly one base clause, at most one recursive
/// clause.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PredicateDef {
    pub name: Name,
    pub base: Clause,
    pub rec: Option<Clause>,
}

impl PredicateDef {
    pub fn arity(&self) -> u32 {
        self.base.arity
    }

    pub fn clauses(&self) -> impl Iterator<Item = &Clause> {
        std::iter::once(&self.base).chain(self.rec.iter())
    }
}

/// A candidate hypothesis: the main predicate plus invented auxiliaries.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Hypothesis {
    pub main: PredicateDef,
    pub invented: Vec<PredicateDef>,
}

impl Hypothesis {
    pub fn pred(&self, key: PredKey) -> &PredicateDef {
        match key {
            PredKey::Main => &self.main,
            PredKey::Invented(i) => &self.invented[i],
        }
    }

    pub fn preds(&self) -> impl Iterator<Item = (PredKey, &PredicateDef)> {
        std::iter::once((PredKey::Main, &self.main)).chain(
            self.invented
                .iter()
                .enumerate()
                .map(|(i, p)| (PredKey::Invented(i), p)),
        )
    }

    /// Total number of body literals across every clause.
    pub fn total_body_size(&self) -> usize {
        self.preds()
            .flat_map(|(_, p)| p.clauses())
            .map(Clause::numlit)
            .sum()
    }

    /// Largest per-clause variable count.
    pub fn max_clause_vars(&self) -> u32 {
        self.preds()
            .flat_map(|(_, p)| p.clauses())
            .map(Clause::nvars)
            .max()
            .unwrap_or(0)
    }

    /// Largest per-clause body length.
    pub fn max_clause_body(&self) -> usize {
        self.preds()
            .flat_map(|(_, p)| p.clauses())
            .map(Clause::numlit)
            .max()
            .unwrap_or(0)
    }

    pub fn size_triple(&self) -> SizeTriple {
        SizeTriple {
            arity: self.main.arity() as usize,
            literals: self
                .preds()
                .flat_map(|(_, p)| p.clauses())
                .map(|c| 1 + c.numlit())
                .sum(),
            vars: self.max_clause_vars() as usize,
        }
    }
}

/// Output size as reported per predicate: arity, literal count including
/// clause heads, and the largest per-clause variable count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SizeTriple {
    pub arity: usize,
    pub literals: usize,
    pub vars: usize,
}

impl fmt::Display for SizeTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.arity, self.literals, self.vars)
    }
}

/// Shape of the hypothesis space: how many invented predicates, and their
/// arity bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shape {
    pub invented: usize,
    pub clauses_per_pred: usize,
    pub invented_arity: usize,
}

impl Shape {
    pub fn main_only(arity: usize) -> Shape {
        Shape {
            invented: 0,
            clauses_per_pred: 2,
            invented_arity: arity,
        }
    }

    pub fn with_invented(arity: usize) -> Shape {
        Shape {
            invented: 1,
            clauses_per_pred: 2,
            invented_arity: arity,
        }
    }
}

// ---------------------------------------------------------------------------
// Well-formedness
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    PointerInBase,
    RecInBase,
    BaseLitInRec,
    PlaceholderInRec,
    RecClauseWithoutStep,
    PointerSourceNotThis,
    HeadVarUnused { var: Var },
    FreeLocalVar { var: Var },
    KindMismatch { var: Var },
    InventedArityTooLarge,
    MutualRecursion,
    BadRecArity,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::PointerInBase => write!(f, "pointer literal in base clause"),
            Violation::RecInBase => write!(f, "recursive literal in base clause"),
            Violation::BaseLitInRec => write!(f, "nullptr/eq literal in recursive clause"),
            Violation::PlaceholderInRec => write!(f, "placeholder literal in recursive clause"),
            Violation::RecClauseWithoutStep => {
                write!(f, "recursive clause lacks pointer and recursive literals")
            }
            Violation::PointerSourceNotThis => {
                write!(f, "pointer literal source is not the this-parameter")
            }
            Violation::HeadVarUnused { var } => write!(f, "head variable {var} unused in body"),
            Violation::FreeLocalVar { var } => write!(f, "local variable {var} occurs only once"),
            Violation::KindMismatch { var } => write!(f, "variable {var} used at conflicting sorts"),
            Violation::InventedArityTooLarge => {
                write!(f, "invented predicate arity exceeds the main arity")
            }
            Violation::MutualRecursion => {
                write!(f, "invented predicate recurses into another predicate")
            }
            Violation::BadRecArity => write!(f, "recursive call arity mismatch"),
        }
    }
}

fn clause_violations(
    h: &Hypothesis,
    owner: PredKey,
    c: &Clause,
    theory: PureTheory,
    out: &mut Vec<Violation>,
) {
    let mut step = false;
    for lit in &c.body {
        match lit {
            Lit::Pointer { source, .. } => {
                step = true;
                if c.kind == ClauseKind::Base {
                    out.push(Violation::PointerInBase);
                }
                if *source != THIS {
                    out.push(Violation::PointerSourceNotThis);
                }
            }
            Lit::Rec { target, args } => {
                step = true;
                if c.kind == ClauseKind::Base {
                    out.push(Violation::RecInBase);
                }
                if owner != PredKey::Main && *target != owner {
                    out.push(Violation::MutualRecursion);
                }
                if args.len() != h.pred(*target).arity() as usize {
                    out.push(Violation::BadRecArity);
                }
            }
            Lit::Null(_) | Lit::Eq(..) => {
                if c.kind == ClauseKind::Recursive {
                    out.push(Violation::BaseLitInRec);
                }
            }
            Lit::AnyPointer(_) | Lit::AnyNumber(_) => {
                if c.kind == ClauseKind::Recursive {
                    out.push(Violation::PlaceholderInRec);
                }
            }
            Lit::Pure { .. } => {}
        }
    }
    if c.kind == ClauseKind::Recursive && !step {
        out.push(Violation::RecClauseWithoutStep);
    }
    for v in 0..c.nvars() {
        let occ = c.body_occurrences(v);
        if v < c.arity {
            if occ == 0 {
                out.push(Violation::HeadVarUnused { var: v });
            }
        } else if occ < 2 {
            out.push(Violation::FreeLocalVar { var: v });
        }
    }
    // Sort discipline per literal signature.
    for lit in &c.body {
        let expect: Vec<(Var, VarKind)> = match lit {
            Lit::Pointer { source, target, .. } => {
                // Target kind depends on the field; the builder records it in
                // var_kinds, so only the source is checked here.
                vec![(*source, VarKind::Pointer), (*target, c.var_kinds[*target as usize])]
            }
            Lit::Null(v) | Lit::AnyPointer(v) => vec![(*v, VarKind::Pointer)],
            Lit::AnyNumber(v) => vec![(*v, VarKind::Pure(ValueSort::Int))],
            Lit::Eq(a, b) => vec![(*a, VarKind::Pointer), (*b, VarKind::Pointer)],
            Lit::Rec { target, args } => {
                let kinds = head_kinds(h.pred(*target));
                args.iter().copied().zip(kinds).collect()
            }
            Lit::Pure { rel, args } => {
                match theory.ops().catalog().iter().find(|r| r.name == rel.as_ref()) {
                    Some(r) => args
                        .iter()
                        .copied()
                        .zip(r.sorts.iter().map(|&s| VarKind::Pure(s)))
                        .collect(),
                    None => vec![],
                }
            }
        };
        for (v, want) in expect {
            if c.var_kinds.get(v as usize) != Some(&want) {
                out.push(Violation::KindMismatch { var: v });
            }
        }
    }
}

fn head_kinds(p: &PredicateDef) -> Vec<VarKind> {
    p.base.var_kinds[..p.arity() as usize].to_vec()
}

/// Grammar and invariant conformance; empty means well-formed.
pub fn well_formed(h: &Hypothesis, theory: PureTheory) -> Vec<Violation> {
    let mut out = Vec::new();
    for inv in &h.invented {
        if inv.arity() > h.main.arity() {
            out.push(Violation::InventedArityTooLarge);
        }
    }
    for (key, p) in h.preds() {
        for c in p.clauses() {
            clause_violations(h, key, c, theory, &mut out);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Subsumption and generality
// ---------------------------------------------------------------------------

/// True iff a substitution maps `c1`'s head onto `c2`'s head and `c1`'s body
/// into `c2`'s body. Heads are canonical, so the substitution fixes the head
/// parameters pointwise.
pub fn theta_subsumes(c1: &Clause, c2: &Clause) -> bool {
    if c1.arity != c2.arity || c1.body.len() > c2.body.len() {
        return false;
    }
    let mut theta: BTreeMap<Var, Var> = (0..c1.arity).map(|v| (v, v)).collect();
    subsume_from(&c1.body, 0, c2, &mut theta)
}

fn lit_heads_match(a: &Lit, b: &Lit) -> bool {
    match (a, b) {
        (Lit::Pointer { field: f1, .. }, Lit::Pointer { field: f2, .. }) => f1 == f2,
        (Lit::Null(_), Lit::Null(_)) => true,
        (Lit::Eq(..), Lit::Eq(..)) => true,
        (Lit::Rec { target: t1, args: a1 }, Lit::Rec { target: t2, args: a2 }) => {
            t1 == t2 && a1.len() == a2.len()
        }
        (Lit::Pure { rel: r1, args: a1 }, Lit::Pure { rel: r2, args: a2 }) => {
            r1 == r2 && a1.len() == a2.len()
        }
        (Lit::AnyPointer(_), Lit::AnyPointer(_)) => true,
        (Lit::AnyNumber(_), Lit::AnyNumber(_)) => true,
        _ => false,
    }
}

fn subsume_from(body: &[Lit], at: usize, c2: &Clause, theta: &mut BTreeMap<Var, Var>) -> bool {
    if at == body.len() {
        return true;
    }
    let lit = &body[at];
    'cand: for lit2 in &c2.body {
        if !lit_heads_match(lit, lit2) {
            continue;
        }
        let vs1 = lit.vars();
        let vs2 = lit2.vars();
        let mut added: Vec<Var> = Vec::new();
        for (v1, v2) in vs1.iter().zip(vs2.iter()) {
            match theta.get(v1) {
                Some(&w) if w != *v2 => {
                    for v in added {
                        theta.remove(&v);
                    }
                    continue 'cand;
                }
                Some(_) => {}
                None => {
                    theta.insert(*v1, *v2);
                    added.push(*v1);
                }
            }
        }
        if subsume_from(body, at + 1, c2, theta) {
            return true;
        }
        for v in added {
            theta.remove(&v);
        }
    }
    false
}

/// Rewrites the pure part of a clause to its minimisation fixpoint,
/// propagating any forced variable identifications to the rest of the
/// clause. Head parameters are never eliminated.
pub fn minimise_clause(c: &Clause, theory: PureTheory) -> Clause {
    let mut cur = canonical_clause(c);
    loop {
        let (atoms, external) = cur.pure_view();
        let protected: BTreeSet<Var> = (0..cur.arity).collect();
        match theory::reduce_pure_step(&atoms, &external, &protected, theory) {
            Some((reduced, subst)) => {
                let remap = |v: Var| -> Var { *subst.get(&v).unwrap_or(&v) };
                let mut body: Vec<Lit> = cur
                    .body
                    .iter()
                    .filter(|l| !matches!(l, Lit::Pure { .. }))
                    .map(|l| l.map_vars(remap))
                    .collect();
                for a in &reduced {
                    body.push(Lit::Pure {
                        rel: a.rel.clone(),
                        args: a.args.clone(),
                    });
                }
                let next = canonical_clause(&Clause {
                    kind: cur.kind,
                    arity: cur.arity,
                    var_kinds: cur.var_kinds.clone(),
                    body,
                });
                if next == cur {
                    return cur;
                }
                cur = next;
            }
            None => return cur,
        }
    }
}

/// The committed decidable generality order: `h1` is at least as general as
/// `h2` iff, after pure-literal minimisation, every clause of `h2` is
/// theta-subsumed by a same-kind clause of `h1` in the same predicate role.
pub fn more_general(h1: &Hypothesis, h2: &Hypothesis, theory: PureTheory) -> bool {
    if h1.main.arity() != h2.main.arity() || h1.invented.len() != h2.invented.len() {
        return false;
    }
    let roles: Vec<PredKey> = std::iter::once(PredKey::Main)
        .chain((0..h1.invented.len()).map(PredKey::Invented))
        .collect();
    for key in roles {
        let (p1, p2) = (h1.pred(key), h2.pred(key));
        if p1.arity() != p2.arity() {
            return false;
        }
        for c2 in p2.clauses() {
            let c2m = minimise_clause(c2, theory);
            let covered = p1.clauses().any(|c1| {
                c1.kind == c2.kind && theta_subsumes(&minimise_clause(c1, theory), &c2m)
            });
            if !covered {
                return false;
            }
        }
    }
    true
}

/// Strict version: more general and not vice versa.
pub fn strictly_more_general(h1: &Hypothesis, h2: &Hypothesis, theory: PureTheory) -> bool {
    more_general(h1, h2, theory) && !more_general(h2, h1, theory)
}

// ---------------------------------------------------------------------------
// Canonical forms
// ---------------------------------------------------------------------------

/// Drops unused local variables and squashes the numbering, preserving the
/// relative order of the survivors.
fn compact_clause(c: &Clause) -> Clause {
    let mut used: BTreeSet<Var> = (0..c.arity).collect();
    for lit in &c.body {
        used.extend(lit.vars());
    }
    let order: Vec<Var> = used.into_iter().collect();
    let remap: BTreeMap<Var, Var> = order
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, i as Var))
        .collect();
    let mut body: Vec<Lit> = c.body.iter().map(|l| l.map_vars(|v| remap[&v])).collect();
    body.sort();
    body.dedup();
    Clause {
        kind: c.kind,
        arity: c.arity,
        var_kinds: order.iter().map(|&v| c.var_kinds[v as usize]).collect(),
        body,
    }
}

/// Renumbers body locals and reorders literals into the canonical form: the
/// lexicographically least literal sequence over all renumberings of the
/// locals.
pub fn canonical_clause(c: &Clause) -> Clause {
    let c = compact_clause(c);
    let arity = c.arity;
    let locals: Vec<Var> = (arity..c.nvars()).collect();
    if locals.is_empty() {
        return c;
    }
    let mut best: Option<(Vec<Lit>, Vec<u32>)> = None;
    permute(&locals, &mut Vec::new(), &mut |perm| {
        // perm[i] = new offset of locals[i] above arity
        let remap = |v: Var| -> Var {
            if v < arity {
                v
            } else {
                arity + perm[(v - arity) as usize]
            }
        };
        let mut body: Vec<Lit> = c.body.iter().map(|l| l.map_vars(remap)).collect();
        body.sort();
        body.dedup();
        match &best {
            Some((b, _)) if *b <= body => {}
            _ => best = Some((body, perm.to_vec())),
        }
    });
    let (body, perm) = best.unwrap();
    let mut var_kinds = c.var_kinds.clone();
    for (i, &p) in perm.iter().enumerate() {
        var_kinds[(arity + p) as usize] = c.var_kinds[locals[i] as usize];
    }
    Clause {
        kind: c.kind,
        arity,
        var_kinds,
        body,
    }
}

fn permute(items: &[Var], acc: &mut Vec<u32>, f: &mut impl FnMut(&[u32])) {
    if acc.len() == items.len() {
        f(acc);
        return;
    }
    for p in 0..items.len() as u32 {
        if !acc.contains(&p) {
            acc.push(p);
            permute(items, acc, f);
            acc.pop();
        }
    }
}

/// Canonicalizes every clause of a hypothesis.
pub fn canonical_hypothesis(h: &Hypothesis) -> Hypothesis {
    let canon_pred = |p: &PredicateDef| PredicateDef {
        name: p.name.clone(),
        base: canonical_clause(&p.base),
        rec: p.rec.as_ref().map(canonical_clause),
    };
    Hypothesis {
        main: canon_pred(&h.main),
        invented: h.invented.iter().map(canon_pred).collect(),
    }
}

/// Alpha-equivalence modulo predicate names.
pub fn alpha_eq(h1: &Hypothesis, h2: &Hypothesis) -> bool {
    let (a, b) = (canonical_hypothesis(h1), canonical_hypothesis(h2));
    let strip = |p: &PredicateDef| (p.base.clone(), p.rec.clone());
    strip(&a.main) == strip(&b.main)
        && a.invented.len() == b.invented.len()
        && a.invented
            .iter()
            .zip(&b.invented)
            .all(|(x, y)| strip(x) == strip(y))
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderStyle {
    Prolog,
    Sl,
}

const PTR_POOL: &[&str] = &["X", "Y", "Z", "W", "U", "Q", "R", "P"];
const INT_POOL: &[&str] = &["V", "A", "B", "C", "D", "E", "F", "G"];
const PAYLOAD_POOL: &[&str] = &["S", "S1", "S2", "S3", "S4", "S5", "S6", "S7"];

fn var_names(c: &Clause) -> Vec<String> {
    let mut names = Vec::with_capacity(c.var_kinds.len());
    let (mut np, mut ni, mut ns) = (0usize, 0usize, 0usize);
    for k in &c.var_kinds {
        let name = match k {
            VarKind::Pointer => {
                let n = PTR_POOL.get(np).map(|s| s.to_string()).unwrap_or(format!("X{np}"));
                np += 1;
                n
            }
            VarKind::Pure(ValueSort::Int) => {
                let n = INT_POOL.get(ni).map(|s| s.to_string()).unwrap_or(format!("V{ni}"));
                ni += 1;
                n
            }
            VarKind::Pure(_) => {
                let n = PAYLOAD_POOL
                    .get(ns)
                    .map(|s| s.to_string())
                    .unwrap_or(format!("S{ns}"));
                ns += 1;
                n
            }
        };
        names.push(name);
    }
    names
}

fn pred_display_name(key: PredKey, h: &Hypothesis) -> String {
    h.pred(key).name.to_string()
}

fn render_clause_prolog(h: &Hypothesis, p: &PredicateDef, c: &Clause) -> String {
    let names = var_names(c);
    let head_args: Vec<&str> = (0..c.arity as usize).map(|i| names[i].as_str()).collect();
    let mut s = format!("{}({})", p.name, head_args.join(", "));
    if !c.body.is_empty() {
        s.push_str(" :- ");
        let lits: Vec<String> = c
            .body
            .iter()
            .map(|lit| match lit {
                Lit::Pointer {
                    field,
                    source,
                    target,
                } => format!(
                    "{field}({}, {})",
                    names[*source as usize], names[*target as usize]
                ),
                Lit::Null(v) => format!("nullptr({})", names[*v as usize]),
                Lit::Eq(a, b) => format!("eq({}, {})", names[*a as usize], names[*b as usize]),
                Lit::Rec { target, args } => format!(
                    "{}({})",
                    pred_display_name(*target, h),
                    args.iter()
                        .map(|&v| names[v as usize].as_str())
                        .collect::<Vec<_>>()
                        .join(", ")
                ),
                Lit::Pure { rel, args } => format!(
                    "{rel}({})",
                    args.iter()
                        .map(|&v| names[v as usize].as_str())
                        .collect::<Vec<_>>()
                        .join(", ")
                ),
                Lit::AnyPointer(v) => format!("anypointer({})", names[*v as usize]),
                Lit::AnyNumber(v) => format!("anynumber({})", names[*v as usize]),
            })
            .collect();
        s.push_str(&lits.join(", "));
    }
    s.push('.');
    s
}

fn render_clause_sl(h: &Hypothesis, c: &Clause) -> String {
    let names: Vec<String> = var_names(c).iter().map(|n| n.to_lowercase()).collect();
    let mut guard = if c.kind == ClauseKind::Base {
        String::new()
    } else {
        format!("{} != null", names[THIS as usize])
    };
    let mut spatial: Vec<String> = Vec::new();
    let mut pure: Vec<String> = Vec::new();
    for lit in &c.body {
        match lit {
            Lit::Pointer {
                field,
                source,
                target,
            } => spatial.push(format!(
                "{}.{field} |-> {}",
                names[*source as usize], names[*target as usize]
            )),
            Lit::Null(v) => {
                let g = format!("{} = null", names[*v as usize]);
                if guard.is_empty() {
                    guard = g;
                } else {
                    guard = format!("{guard} & {g}");
                }
            }
            Lit::Eq(a, b) => {
                let g = format!("{} = {}", names[*a as usize], names[*b as usize]);
                if guard.is_empty() {
                    guard = g;
                } else {
                    guard = format!("{guard} & {g}");
                }
            }
            Lit::Rec { target, args } => spatial.push(format!(
                "{}({})",
                pred_display_name(*target, h),
                args.iter()
                    .map(|&v| names[v as usize].as_str())
                    .collect::<Vec<_>>()
                    .join(", ")
            )),
            Lit::Pure { rel, args } => pure.push(format!(
                "{rel}({})",
                args.iter()
                    .map(|&v| names[v as usize].as_str())
                    .collect::<Vec<_>>()
                    .join(", ")
            )),
            // A placeholder prints as nothing: its variable keeps a single
            // occurrence elsewhere, i.e. it is free.
            Lit::AnyPointer(_) | Lit::AnyNumber(_) => {}
        }
    }
    if guard.is_empty() {
        guard = "true".into();
    }
    let heap = if spatial.is_empty() {
        "emp".to_string()
    } else {
        spatial.join(" * ")
    };
    let body = if pure.is_empty() {
        heap
    } else {
        format!("{heap} & {}", pure.join(" & "))
    };
    format!("| {guard} => {{ {body} }}")
}

fn sort_keyword(k: VarKind) -> &'static str {
    match k {
        VarKind::Pointer => "loc",
        VarKind::Pure(ValueSort::Int) => "int",
        VarKind::Pure(ValueSort::Set) => "set",
        VarKind::Pure(ValueSort::List) => "list",
    }
}

/// Deterministic text for a hypothesis in the requested style.
pub fn render(h: &Hypothesis, style: RenderStyle) -> String {
    let h = canonical_hypothesis(h);
    let mut out = String::new();
    match style {
        RenderStyle::Prolog => {
            for (_, p) in h.preds() {
                out.push_str(&render_clause_prolog(&h, p, &p.base));
                out.push('\n');
                if let Some(rec) = &p.rec {
                    out.push_str(&render_clause_prolog(&h, p, rec));
                    out.push('\n');
                }
            }
        }
        RenderStyle::Sl => {
            for (_, p) in h.preds() {
                let names = var_names(&p.base);
                let params: Vec<String> = (0..p.arity() as usize)
                    .map(|i| {
                        format!(
                            "{} {}",
                            sort_keyword(p.base.var_kinds[i]),
                            names[i].to_lowercase()
                        )
                    })
                    .collect();
                out.push_str(&format!("pred {}({}) where\n", p.name, params.join(", ")));
                out.push_str(&format!("  {}\n", render_clause_sl(&h, &p.base)));
                if let Some(rec) = &p.rec {
                    out.push_str(&format!("  {}\n", render_clause_sl(&h, rec)));
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Parsing Prolog-style predicate files
// ---------------------------------------------------------------------------

/// What the hypothesis parser needs to classify literals.
#[derive(Debug, Clone)]
pub struct ParseContext {
    pub pointer_fields: BTreeSet<String>,
    pub value_fields: BTreeSet<String>,
    pub theory: PureTheory,
}

impl ParseContext {
    pub fn from_task(task: &crate::graph::Task) -> ParseContext {
        ParseContext {
            pointer_fields: task.pointer_fields().iter().map(|s| s.to_string()).collect(),
            value_fields: task.value_fields().iter().map(|s| s.to_string()).collect(),
            theory: task.theory,
        }
    }
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum HypothesisError {
    #[error("{pos}: syntax error: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("unknown relation {name}")]
    UnknownRelation { name: String },
    #[error("predicate {name} has more than one {kind:?} clause")]
    TooManyClauses { name: String, kind: ClauseKind },
    #[error("predicate {name} lacks a base clause")]
    MissingBase { name: String },
    #[error("variable {name} is used at conflicting sorts")]
    SortConflict { name: String },
    #[error("head parameters must be distinct variables")]
    BadHead,
    #[error("no clauses found")]
    Empty,
}

struct RawClause {
    name: String,
    head: Vec<String>,
    body: Vec<(String, Vec<String>)>,
}

fn parse_raw_clauses(text: &str) -> Result<Vec<RawClause>, HypothesisError> {
    let toks = lex(text).map_err(|e| HypothesisError::Syntax {
        pos: e.pos,
        msg: e.msg,
    })?;
    let mut at = 0usize;
    let peek = |at: usize| -> Option<&Tok> { toks.get(at).map(|t: &SpannedTok| &t.tok) };
    let pos_of = |at: usize| -> Pos {
        toks.get(at)
            .or_else(|| toks.last())
            .map(|t| t.pos)
            .unwrap_or(Pos { line: 1, col: 1 })
    };
    let mut clauses = Vec::new();
    while peek(at).is_some() {
        let err = |at: usize, msg: &str| HypothesisError::Syntax {
            pos: pos_of(at),
            msg: msg.into(),
        };
        let name = match peek(at) {
            Some(Tok::LIdent(s)) => s.clone(),
            _ => return Err(err(at, "expected predicate name")),
        };
        at += 1;
        let parse_atom_args = |at: &mut usize| -> Result<Vec<String>, HypothesisError> {
            if peek(*at) != Some(&Tok::LParen) {
                return Err(err(*at, "expected `(`"));
            }
            *at += 1;
            let mut args = Vec::new();
            loop {
                match peek(*at) {
                    Some(Tok::UIdent(v)) => args.push(v.clone()),
                    _ => return Err(err(*at, "expected a variable")),
                }
                *at += 1;
                match peek(*at) {
                    Some(Tok::Comma) => *at += 1,
                    Some(Tok::RParen) => {
                        *at += 1;
                        break;
                    }
                    _ => return Err(err(*at, "expected `,` or `)`")),
                }
            }
            Ok(args)
        };
        let head = parse_atom_args(&mut at)?;
        let mut body = Vec::new();
        match peek(at) {
            Some(Tok::Dot) => {
                at += 1;
            }
            Some(Tok::ColonDash) => {
                at += 1;
                loop {
                    let rel = match peek(at) {
                        Some(Tok::LIdent(s)) => s.clone(),
                        _ => return Err(err(at, "expected literal")),
                    };
                    at += 1;
                    let args = parse_atom_args(&mut at)?;
                    body.push((rel, args));
                    match peek(at) {
                        Some(Tok::Comma) => at += 1,
                        Some(Tok::Dot) => {
                            at += 1;
                            break;
                        }
                        _ => return Err(err(at, "expected `,` or `.`")),
                    }
                }
            }
            _ => return Err(err(at, "expected `:-` or `.`")),
        }
        clauses.push(RawClause { name, head, body });
    }
    if clauses.is_empty() {
        return Err(HypothesisError::Empty);
    }
    Ok(clauses)
}

/// Parses the Prolog-style syntax emitted by [`render`] back into a
/// [`Hypothesis`]. The first predicate is the main one.
pub fn parse_hypothesis(text: &str, ctx: &ParseContext) -> Result<Hypothesis, HypothesisError> {
    let raw = parse_raw_clauses(text)?;
    let mut order: Vec<String> = Vec::new();
    for rc in &raw {
        if !order.contains(&rc.name) {
            order.push(rc.name.clone());
        }
    }
    let key_of = |name: &str| -> Option<PredKey> {
        order.iter().position(|n| n == name).map(|i| {
            if i == 0 {
                PredKey::Main
            } else {
                PredKey::Invented(i - 1)
            }
        })
    };

    let catalog = ctx.theory.ops().catalog();
    let arity_of: BTreeMap<String, usize> = raw
        .iter()
        .map(|rc| (rc.name.clone(), rc.head.len()))
        .collect();

    let mut preds: BTreeMap<String, (Option<Clause>, Option<Clause>)> = BTreeMap::new();

    for rc in &raw {
        let arity = rc.head.len() as u32;
        let mut var_ids: BTreeMap<String, Var> = BTreeMap::new();
        for (i, v) in rc.head.iter().enumerate() {
            if var_ids.insert(v.clone(), i as Var).is_some() {
                return Err(HypothesisError::BadHead);
            }
        }
        let mut kinds: Vec<Option<VarKind>> = vec![None; rc.head.len()];
        let mut body: Vec<Lit> = Vec::new();
        let intern = |name: &str, var_ids: &mut BTreeMap<String, Var>, kinds: &mut Vec<Option<VarKind>>| -> Var {
            *var_ids.entry(name.to_string()).or_insert_with(|| {
                kinds.push(None);
                (kinds.len() - 1) as Var
            })
        };
        let constrain = |v: Var, k: VarKind, kinds: &mut Vec<Option<VarKind>>, names: &BTreeMap<String, Var>| -> Result<(), HypothesisError> {
            match kinds[v as usize] {
                None => {
                    kinds[v as usize] = Some(k);
                    Ok(())
                }
                Some(prev) if prev == k => Ok(()),
                Some(_) => {
                    let name = names
                        .iter()
                        .find(|(_, &id)| id == v)
                        .map(|(n, _)| n.clone())
                        .unwrap_or_default();
                    Err(HypothesisError::SortConflict { name })
                }
            }
        };

        let mut is_rec = false;
        for (rel, args) in &rc.body {
            let ids: Vec<Var> = args
                .iter()
                .map(|a| intern(a, &mut var_ids, &mut kinds))
                .collect();
            if ctx.pointer_fields.contains(rel) || ctx.value_fields.contains(rel) {
                is_rec = true;
                let target_kind = if ctx.pointer_fields.contains(rel) {
                    VarKind::Pointer
                } else {
                    VarKind::Pure(ValueSort::Int)
                };
                if ids.len() != 2 {
                    return Err(HypothesisError::UnknownRelation { name: rel.clone() });
                }
                constrain(ids[0], VarKind::Pointer, &mut kinds, &var_ids)?;
                constrain(ids[1], target_kind, &mut kinds, &var_ids)?;
                body.push(Lit::Pointer {
                    field: Name::from(rel.as_str()),
                    source: ids[0],
                    target: ids[1],
                });
            } else if rel == "nullptr" && ids.len() == 1 {
                constrain(ids[0], VarKind::Pointer, &mut kinds, &var_ids)?;
                body.push(Lit::Null(ids[0]));
            } else if rel == "eq" && ids.len() == 2 {
                constrain(ids[0], VarKind::Pointer, &mut kinds, &var_ids)?;
                constrain(ids[1], VarKind::Pointer, &mut kinds, &var_ids)?;
                body.push(Lit::Eq(ids[0], ids[1]));
            } else if rel == "anypointer" && ids.len() == 1 {
                constrain(ids[0], VarKind::Pointer, &mut kinds, &var_ids)?;
                body.push(Lit::AnyPointer(ids[0]));
            } else if rel == "anynumber" && ids.len() == 1 {
                constrain(ids[0], VarKind::Pure(ValueSort::Int), &mut kinds, &var_ids)?;
                body.push(Lit::AnyNumber(ids[0]));
            } else if let Some(r) = catalog.iter().find(|r| r.name == rel) {
                if ids.len() != r.arity() {
                    return Err(HypothesisError::UnknownRelation { name: rel.clone() });
                }
                for (&v, &s) in ids.iter().zip(r.sorts) {
                    constrain(v, VarKind::Pure(s), &mut kinds, &var_ids)?;
                }
                body.push(Lit::Pure {
                    rel: Name::from(rel.as_str()),
                    args: ids,
                });
            } else if let Some(key) = key_of(rel) {
                is_rec = true;
                if ids.len() != arity_of[rel] {
                    return Err(HypothesisError::UnknownRelation { name: rel.clone() });
                }
                body.push(Lit::Rec { target: key, args: ids });
            } else {
                return Err(HypothesisError::UnknownRelation { name: rel.clone() });
            }
        }

        let var_kinds: Vec<VarKind> = kinds
            .into_iter()
            .map(|k| k.unwrap_or(VarKind::Pointer))
            .collect();
        let clause = canonical_clause(&Clause {
            kind: if is_rec {
                ClauseKind::Recursive
            } else {
                ClauseKind::Base
            },
            arity,
            var_kinds,
            body,
        });
        let slot = preds.entry(rc.name.clone()).or_insert((None, None));
        let dst = if clause.kind == ClauseKind::Base {
            &mut slot.0
        } else {
            &mut slot.1
        };
        if dst.is_some() {
            return Err(HypothesisError::TooManyClauses {
                name: rc.name.clone(),
                kind: clause.kind,
            });
        }
        *dst = Some(clause);
    }

    let mut build = |name: &str| -> Result<PredicateDef, HypothesisError> {
        let (base, rec) = preds.remove(name).unwrap();
        Ok(PredicateDef {
            name: Name::from(name),
            base: base.ok_or_else(|| HypothesisError::MissingBase {
                name: name.to_string(),
            })?,
            rec,
        })
    };
    let main = build(&order[0])?;
    let invented = order[1..]
        .iter()
        .map(|n| build(n))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Hypothesis { main, invented })
}
