//! Memory graphs, positive examples, and the fact-file format.
//!
//! A memory graph is a finite set of ground field facts (pointer and value
//! edges) over named nodes. Graphs plus `pos(...)`/`neg(...)` example atoms
//! form a [`Task`], the input to the learner.
//!
//! The concrete syntax:
//!
//! ```text
//! file      := (stmt)*
//! stmt      := graphdecl | fact | example | comment
//! graphdecl := 'graph' IDENT '.' (fact)* 'end' '.'
//! fact      := IDENT '(' term (',' term)* ')' '.'
//! example   := ('pos'|'neg') '(' IDENT '(' term (',' term)* ')' ')' '.'
//! term      := IDENT | INT | 'null' | '[' ints ']' | '{' ints '}'
//! comment   := '%' .* EOL
//! ```
//!
//! Facts may appear inside `graph <id>. ... end.` blocks (making node-name
//! reuse across graphs safe) or at the top level, in which case they are
//! grouped into graphs by weak connectivity of their node constants.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::lexer::{lex, Pos, SpannedTok, Tok};
use crate::theory::PureTheory;

/// A named heap node. Never the literal `null`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub String);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl NodeId {
    pub fn new(name: impl Into<String>) -> Self {
        NodeId(name.into())
    }
}

/// Target of a field edge, or an example argument.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GraphValue {
    Node(NodeId),
    Null,
    Int(i64),
}

impl fmt::Display for GraphValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphValue::Node(n) => write!(f, "{n}"),
            GraphValue::Null => write!(f, "null"),
            GraphValue::Int(i) => write!(f, "{i}"),
        }
    }
}

/// One ground field edge: `field(source, target)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct FieldFact {
    pub field: String,
    pub source: NodeId,
    pub target: GraphValue,
}

impl fmt::Display for FieldFact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}, {})", self.field, self.source, self.target)
    }
}

/// Pointer fields target nodes or null; value fields target integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum FieldKind {
    Pointer,
    Value,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MemoryGraph {
    pub id: String,
    pub nodes: BTreeSet<NodeId>,
    pub facts: Vec<FieldFact>,
}

impl MemoryGraph {
    pub fn new(id: impl Into<String>) -> Self {
        MemoryGraph {
            id: id.into(),
            nodes: BTreeSet::new(),
            facts: Vec::new(),
        }
    }

    /// Adds a fact, registering its node constants.
    pub fn push_fact(&mut self, field: impl Into<String>, source: NodeId, target: GraphValue) {
        self.nodes.insert(source.clone());
        if let GraphValue::Node(n) = &target {
            self.nodes.insert(n.clone());
        }
        self.facts.push(FieldFact {
            field: field.into(),
            source,
            target,
        });
    }

    pub fn target(&self, field: &str, source: &NodeId) -> Option<&GraphValue> {
        self.facts
            .iter()
            .find(|f| f.field == field && &f.source == source)
            .map(|f| &f.target)
    }

    /// Classifies fields by the targets observed in this graph alone.
    /// A field with both node/null and integer targets maps to `None`.
    pub fn local_field_kinds(&self) -> BTreeMap<String, Option<FieldKind>> {
        let mut kinds: BTreeMap<String, Option<FieldKind>> = BTreeMap::new();
        for fact in &self.facts {
            let k = match fact.target {
                GraphValue::Int(_) => FieldKind::Value,
                _ => FieldKind::Pointer,
            };
            kinds
                .entry(fact.field.clone())
                .and_modify(|cur| {
                    if *cur != Some(k) {
                        *cur = None;
                    }
                })
                .or_insert(Some(k));
        }
        kinds
    }
}

/// Transitive closure over pointer fields from `root`. Null contributes
/// nothing; value edges are not followed.
pub fn reachable_nodes(g: &MemoryGraph, root: &GraphValue) -> BTreeSet<NodeId> {
    let kinds = g.local_field_kinds();
    let mut seen = BTreeSet::new();
    let mut stack = Vec::new();
    if let GraphValue::Node(n) = root {
        stack.push(n.clone());
    }
    while let Some(n) = stack.pop() {
        if !seen.insert(n.clone()) {
            continue;
        }
        for fact in &g.facts {
            if fact.source != n || kinds.get(&fact.field) != Some(&Some(FieldKind::Pointer)) {
                continue;
            }
            if let GraphValue::Node(t) = &fact.target {
                if !seen.contains(t) {
                    stack.push(t.clone());
                }
            }
        }
    }
    seen
}

/// A structural problem found in a graph. Diagnostics, not failures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Diagnostic {
    /// Two facts share a (field, source) pair.
    DuplicateEdge { field: String, source: NodeId },
    /// A fact references a node missing from the node set.
    DanglingNode { node: NodeId },
    /// A field targets both pointers and integers.
    MixedField { field: String },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::DuplicateEdge { field, source } => {
                write!(f, "duplicate edge for ({field}, {source})")
            }
            Diagnostic::DanglingNode { node } => write!(f, "fact references unknown node {node}"),
            Diagnostic::MixedField { field } => {
                write!(f, "field {field} mixes pointer and integer targets")
            }
        }
    }
}

/// Checks the graph invariants; an empty list means the graph is valid.
pub fn validate_graph(g: &MemoryGraph) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut edges = BTreeSet::new();
    for fact in &g.facts {
        if !edges.insert((fact.field.clone(), fact.source.clone())) {
            out.push(Diagnostic::DuplicateEdge {
                field: fact.field.clone(),
                source: fact.source.clone(),
            });
        }
        if !g.nodes.contains(&fact.source) {
            out.push(Diagnostic::DanglingNode {
                node: fact.source.clone(),
            });
        }
        if let GraphValue::Node(t) = &fact.target {
            if !g.nodes.contains(t) {
                out.push(Diagnostic::DanglingNode { node: t.clone() });
            }
        }
    }
    for (field, kind) in g.local_field_kinds() {
        if kind.is_none() {
            out.push(Diagnostic::MixedField { field });
        }
    }
    out
}

/// The data payload of an example atom.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum PayloadTerm {
    Set(BTreeSet<i64>),
    List(Vec<i64>),
    Int(i64),
}

impl PayloadTerm {
    pub fn theory(&self) -> PureTheory {
        match self {
            PayloadTerm::Set(_) => PureTheory::Set,
            PayloadTerm::List(_) => PureTheory::List,
            PayloadTerm::Int(_) => PureTheory::Int,
        }
    }
}

impl fmt::Display for PayloadTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn ints(f: &mut fmt::Formatter<'_>, xs: impl Iterator<Item = i64>) -> fmt::Result {
            for (i, x) in xs.enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{x}")?;
            }
            Ok(())
        }
        match self {
            PayloadTerm::Set(xs) => {
                write!(f, "{{")?;
                ints(f, xs.iter().copied())?;
                write!(f, "}}")
            }
            PayloadTerm::List(xs) => {
                write!(f, "[")?;
                ints(f, xs.iter().copied())?;
                write!(f, "]")
            }
            PayloadTerm::Int(x) => write!(f, "{x}"),
        }
    }
}

/// A target atom `pred(root, ..., payload)` asserted true (or false, for
/// negatives) of one graph.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Example {
    pub pred: String,
    pub root: GraphValue,
    pub extra_args: Vec<GraphValue>,
    pub payload: Option<PayloadTerm>,
    pub graph_id: String,
}

impl Example {
    pub fn arity(&self) -> usize {
        1 + self.extra_args.len() + usize::from(self.payload.is_some())
    }

    /// Renders the atom, e.g. `srtl(p11, [1,2,3])`.
    pub fn atom_text(&self) -> String {
        let mut s = format!("{}({}", self.pred, self.root);
        for a in &self.extra_args {
            s.push_str(&format!(", {a}"));
        }
        if let Some(p) = &self.payload {
            s.push_str(&format!(", {p}"));
        }
        s.push(')');
        s
    }
}

/// A synthesis task: graphs, examples, and the pure theory in play.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Task {
    pub graphs: Vec<MemoryGraph>,
    pub positives: Vec<Example>,
    pub negatives: Vec<Example>,
    pub theory: PureTheory,
    pub fields: BTreeMap<String, FieldKind>,
    /// Treat the integer theory as a partial order (heights/lengths).
    pub po_int: bool,
}

impl Task {
    pub fn graph(&self, id: &str) -> Option<&MemoryGraph> {
        self.graphs.iter().find(|g| g.id == id)
    }

    pub fn pred_name(&self) -> Option<&str> {
        self.positives
            .first()
            .or_else(|| self.negatives.first())
            .map(|e| e.pred.as_str())
    }

    pub fn arity(&self) -> Option<usize> {
        self.positives
            .first()
            .or_else(|| self.negatives.first())
            .map(Example::arity)
    }

    pub fn pointer_fields(&self) -> Vec<&str> {
        self.fields
            .iter()
            .filter(|(_, k)| **k == FieldKind::Pointer)
            .map(|(f, _)| f.as_str())
            .collect()
    }

    pub fn value_fields(&self) -> Vec<&str> {
        self.fields
            .iter()
            .filter(|(_, k)| **k == FieldKind::Value)
            .map(|(f, _)| f.as_str())
            .collect()
    }

    /// Coerces every example payload into `theory`, failing when the shapes
    /// are not convertible (e.g. a set payload under the integer theory).
    pub fn override_theory(mut self, theory: PureTheory) -> Result<Task, TaskError> {
        let coerce = |p: PayloadTerm| -> Result<PayloadTerm, TaskError> {
            match (theory, p) {
                (PureTheory::Set, PayloadTerm::Set(s)) => Ok(PayloadTerm::Set(s)),
                (PureTheory::Set, PayloadTerm::List(xs)) => {
                    Ok(PayloadTerm::Set(xs.into_iter().collect()))
                }
                (PureTheory::List, PayloadTerm::List(xs)) => Ok(PayloadTerm::List(xs)),
                (PureTheory::List, PayloadTerm::Set(s)) => {
                    Ok(PayloadTerm::List(s.into_iter().collect()))
                }
                (PureTheory::Int, PayloadTerm::Int(n)) => Ok(PayloadTerm::Int(n)),
                (t, p) => Err(TaskError::PayloadTheory {
                    theory: t,
                    payload: p.to_string(),
                }),
            }
        };
        for ex in self.positives.iter_mut().chain(self.negatives.iter_mut()) {
            if let Some(p) = ex.payload.take() {
                ex.payload = Some(coerce(p)?);
            }
        }
        self.theory = theory;
        Ok(self)
    }
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum TaskError {
    #[error("{pos}: syntax error: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("{pos}: duplicate fact for ({field}, {node})")]
    DuplicateFact {
        pos: Pos,
        field: String,
        node: String,
    },
    #[error("field {field} mixes pointer and integer targets")]
    MixedField { field: String },
    #[error("{pos}: example references unknown node {node}")]
    UnknownNode { pos: Pos, node: String },
    #[error("{pos}: node {node} occurs in multiple graphs; example root is ambiguous")]
    AmbiguousNode { pos: Pos, node: String },
    #[error("{pos}: example arity {found} disagrees with earlier arity {expected}")]
    ArityMismatch {
        pos: Pos,
        expected: usize,
        found: usize,
    },
    #[error("{pos}: example predicate {found} disagrees with earlier predicate {expected}")]
    PredNameMismatch {
        pos: Pos,
        expected: String,
        found: String,
    },
    #[error("{pos}: examples mix payload shapes; pass an explicit theory")]
    PayloadShapeMismatch { pos: Pos },
    #[error("payload {payload} cannot be coerced into the {theory} theory")]
    PayloadTheory {
        theory: PureTheory,
        payload: String,
    },
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
enum Term {
    Ident(String),
    Null,
    Int(i64),
    SetLit(BTreeSet<i64>),
    ListLit(Vec<i64>),
}

struct Parser {
    toks: Vec<SpannedTok>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.tok)
    }

    fn pos(&self) -> Pos {
        self.toks
            .get(self.at)
            .or_else(|| self.toks.last())
            .map(|t| t.pos)
            .unwrap_or(Pos { line: 1, col: 1 })
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|t| t.tok.clone());
        self.at += 1;
        t
    }

    fn expect(&mut self, want: &Tok) -> Result<(), TaskError> {
        let pos = self.pos();
        match self.bump() {
            Some(ref t) if t == want => Ok(()),
            Some(t) => Err(TaskError::Syntax {
                pos,
                msg: format!("expected `{want}`, found `{t}`"),
            }),
            None => Err(TaskError::Syntax {
                pos,
                msg: format!("expected `{want}`, found end of input"),
            }),
        }
    }

    fn expect_lident(&mut self) -> Result<String, TaskError> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::LIdent(s)) => Ok(s),
            Some(t) => Err(TaskError::Syntax {
                pos,
                msg: format!("expected identifier, found `{t}`"),
            }),
            None => Err(TaskError::Syntax {
                pos,
                msg: "expected identifier, found end of input".into(),
            }),
        }
    }

    fn int_seq(&mut self, close: &Tok) -> Result<Vec<i64>, TaskError> {
        let mut xs = Vec::new();
        if self.peek() == Some(close) {
            self.bump();
            return Ok(xs);
        }
        loop {
            let pos = self.pos();
            match self.bump() {
                Some(Tok::Int(n)) => xs.push(n),
                other => {
                    return Err(TaskError::Syntax {
                        pos,
                        msg: format!(
                            "expected integer, found `{}`",
                            other.map(|t| t.to_string()).unwrap_or("eof".into())
                        ),
                    })
                }
            }
            match self.bump() {
                Some(Tok::Comma) => continue,
                Some(ref t) if t == close => break,
                other => {
                    return Err(TaskError::Syntax {
                        pos: self.pos(),
                        msg: format!(
                            "expected `,` or `{close}`, found `{}`",
                            other.map(|t| t.to_string()).unwrap_or("eof".into())
                        ),
                    })
                }
            }
        }
        Ok(xs)
    }

    fn term(&mut self) -> Result<Term, TaskError> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::LIdent(s)) if s == "null" => Ok(Term::Null),
            Some(Tok::LIdent(s)) => Ok(Term::Ident(s)),
            Some(Tok::Int(n)) => Ok(Term::Int(n)),
            Some(Tok::LBracket) => Ok(Term::ListLit(self.int_seq(&Tok::RBracket)?)),
            Some(Tok::LBrace) => {
                let xs = self.int_seq(&Tok::RBrace)?;
                let set: BTreeSet<i64> = xs.iter().copied().collect();
                if set.len() != xs.len() {
                    return Err(TaskError::Syntax {
                        pos,
                        msg: "set literal repeats an element".into(),
                    });
                }
                Ok(Term::SetLit(set))
            }
            other => Err(TaskError::Syntax {
                pos,
                msg: format!(
                    "expected term, found `{}`",
                    other.map(|t| t.to_string()).unwrap_or("eof".into())
                ),
            }),
        }
    }

    fn term_list(&mut self) -> Result<Vec<Term>, TaskError> {
        self.expect(&Tok::LParen)?;
        let mut terms = vec![self.term()?];
        loop {
            match self.bump() {
                Some(Tok::Comma) => terms.push(self.term()?),
                Some(Tok::RParen) => break,
                other => {
                    return Err(TaskError::Syntax {
                        pos: self.pos(),
                        msg: format!(
                            "expected `,` or `)`, found `{}`",
                            other.map(|t| t.to_string()).unwrap_or("eof".into())
                        ),
                    })
                }
            }
        }
        Ok(terms)
    }
}

struct RawFact {
    pos: Pos,
    field: String,
    source: String,
    target: GraphValue,
}

struct RawExample {
    pos: Pos,
    negated: bool,
    pred: String,
    args: Vec<Term>,
}

/// Parses the fact-file format into a [`Task`]. The pure theory is inferred
/// from the payload literal shapes (`{..}` set, `[..]` list, bare integer)
/// and defaults to sets when no example carries a payload.
pub fn parse_task(text: &str) -> Result<Task, TaskError> {
    let toks = lex(text).map_err(|e| TaskError::Syntax {
        pos: e.pos,
        msg: e.msg,
    })?;
    let mut p = Parser { toks, at: 0 };

    let mut blocks: Vec<(String, Vec<RawFact>)> = Vec::new();
    let mut loose: Vec<RawFact> = Vec::new();
    let mut examples: Vec<RawExample> = Vec::new();

    fn raw_fact(p: &mut Parser, name: String, pos: Pos) -> Result<RawFact, TaskError> {
        let terms = p.term_list()?;
        p.expect(&Tok::Dot)?;
        if terms.len() != 2 {
            return Err(TaskError::Syntax {
                pos,
                msg: format!("field facts take exactly 2 arguments, found {}", terms.len()),
            });
        }
        let source = match &terms[0] {
            Term::Ident(s) => s.clone(),
            _ => {
                return Err(TaskError::Syntax {
                    pos,
                    msg: "fact source must be a node name".into(),
                })
            }
        };
        let target = match &terms[1] {
            Term::Ident(s) => GraphValue::Node(NodeId::new(s.clone())),
            Term::Null => GraphValue::Null,
            Term::Int(n) => GraphValue::Int(*n),
            _ => {
                return Err(TaskError::Syntax {
                    pos,
                    msg: "fact target must be a node, null, or an integer".into(),
                })
            }
        };
        Ok(RawFact {
            pos,
            field: name,
            source,
            target,
        })
    }

    while p.peek().is_some() {
        let pos = p.pos();
        let name = p.expect_lident()?;
        match name.as_str() {
            "graph" if !matches!(p.peek(), Some(Tok::LParen)) => {
                let id = p.expect_lident()?;
                p.expect(&Tok::Dot)?;
                let mut facts = Vec::new();
                loop {
                    let fpos = p.pos();
                    let fname = p.expect_lident()?;
                    if fname == "end" && !matches!(p.peek(), Some(Tok::LParen)) {
                        p.expect(&Tok::Dot)?;
                        break;
                    }
                    facts.push(raw_fact(&mut p, fname, fpos)?);
                }
                blocks.push((id, facts));
            }
            "pos" | "neg" => {
                let negated = name == "neg";
                p.expect(&Tok::LParen)?;
                let pred = p.expect_lident()?;
                let args = p.term_list()?;
                p.expect(&Tok::RParen)?;
                p.expect(&Tok::Dot)?;
                examples.push(RawExample {
                    pos,
                    negated,
                    pred,
                    args,
                });
            }
            _ => loose.push(raw_fact(&mut p, name, pos)?),
        }
    }

    // Group loose facts into graphs by weak connectivity over node names.
    let mut graphs: Vec<MemoryGraph> = Vec::new();
    let mut used_ids: BTreeSet<String> = blocks.iter().map(|(id, _)| id.clone()).collect();
    let mut next_auto = 1usize;
    let mut fresh_id = move |used: &mut BTreeSet<String>| -> String {
        loop {
            let id = format!("g{next_auto}");
            next_auto += 1;
            if used.insert(id.clone()) {
                return id;
            }
        }
    };

    if !loose.is_empty() {
        // Union-find keyed by node name, in order of first appearance.
        let mut index: BTreeMap<String, usize> = BTreeMap::new();
        let mut order: Vec<String> = Vec::new();
        let mut parent: Vec<usize> = Vec::new();
        fn find(parent: &mut Vec<usize>, mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        let intern = |name: &str,
                          index: &mut BTreeMap<String, usize>,
                          order: &mut Vec<String>,
                          parent: &mut Vec<usize>|
         -> usize {
            *index.entry(name.to_string()).or_insert_with(|| {
                order.push(name.to_string());
                parent.push(parent.len());
                parent.len() - 1
            })
        };
        for f in &loose {
            let s = intern(&f.source, &mut index, &mut order, &mut parent);
            if let GraphValue::Node(t) = &f.target {
                let t = intern(&t.0, &mut index, &mut order, &mut parent);
                let (rs, rt) = (find(&mut parent, s), find(&mut parent, t));
                if rs != rt {
                    // Keep the earlier-seen node as the representative so the
                    // component order follows the file.
                    let (lo, hi) = if rs < rt { (rs, rt) } else { (rt, rs) };
                    parent[hi] = lo;
                }
            }
        }
        let mut comp_graph: BTreeMap<usize, usize> = BTreeMap::new();
        for i in 0..order.len() {
            let root = find(&mut parent, i);
            if let std::collections::btree_map::Entry::Vacant(e) = comp_graph.entry(root) {
                let id = fresh_id(&mut used_ids);
                graphs.push(MemoryGraph::new(id));
                e.insert(graphs.len() - 1);
            }
        }
        // Nodes first (so isolated targets are registered), then facts in
        // file order.
        for (i, name) in order.iter().enumerate() {
            let root = find(&mut parent, i);
            let gi = comp_graph[&root];
            graphs[gi].nodes.insert(NodeId::new(name.clone()));
        }
        for f in &loose {
            let root = find(&mut parent, index[&f.source]);
            let gi = comp_graph[&root];
            graphs[gi].push_fact(f.field.clone(), NodeId::new(f.source.clone()), f.target.clone());
        }
    }

    for (id, facts) in blocks {
        let mut g = MemoryGraph::new(id);
        for f in facts {
            g.push_fact(f.field, NodeId::new(f.source), f.target);
        }
        graphs.push(g);
    }

    // Uniqueness of (field, source) per graph, with positions for loose facts.
    for g in &graphs {
        let mut seen = BTreeSet::new();
        for fact in &g.facts {
            if !seen.insert((fact.field.clone(), fact.source.clone())) {
                let pos = loose
                    .iter()
                    .find(|rf| rf.field == fact.field && rf.source == fact.source.0)
                    .map(|rf| rf.pos)
                    .unwrap_or(Pos { line: 1, col: 1 });
                return Err(TaskError::DuplicateFact {
                    pos,
                    field: fact.field.clone(),
                    node: fact.source.0.clone(),
                });
            }
        }
    }

    // Field classification across every graph.
    let mut fields: BTreeMap<String, FieldKind> = BTreeMap::new();
    for g in &graphs {
        for fact in &g.facts {
            let k = match fact.target {
                GraphValue::Int(_) => FieldKind::Value,
                _ => FieldKind::Pointer,
            };
            match fields.get(&fact.field) {
                Some(prev) if *prev != k => {
                    return Err(TaskError::MixedField {
                        field: fact.field.clone(),
                    })
                }
                _ => {
                    fields.insert(fact.field.clone(), k);
                }
            }
        }
    }

    // Resolve examples. Null- or integer-rooted examples live on a shared
    // empty graph, created up front.
    let needs_empty = examples.iter().any(|raw| {
        !matches!(raw.args.first(), Some(Term::Ident(_)))
    });
    let empty_graph_id = if needs_empty {
        let id = fresh_id(&mut used_ids);
        graphs.push(MemoryGraph::new(id.clone()));
        Some(id)
    } else {
        None
    };
    let mut positives = Vec::new();
    let mut negatives = Vec::new();
    let mut pred_seen: Option<(String, usize)> = None;
    let mut theory: Option<PureTheory> = None;

    for raw in examples {
        let pos = raw.pos;
        let mut args = raw.args;
        let payload = match args.last() {
            Some(Term::SetLit(_)) | Some(Term::ListLit(_)) | Some(Term::Int(_)) => {
                match args.pop().unwrap() {
                    Term::SetLit(s) => Some(PayloadTerm::Set(s)),
                    Term::ListLit(xs) => Some(PayloadTerm::List(xs)),
                    Term::Int(n) => Some(PayloadTerm::Int(n)),
                    _ => unreachable!(),
                }
            }
            _ => None,
        };
        if args.is_empty() {
            return Err(TaskError::Syntax {
                pos,
                msg: "example needs a root argument".into(),
            });
        }
        let to_value = |t: &Term| -> Result<GraphValue, TaskError> {
            match t {
                Term::Ident(s) => Ok(GraphValue::Node(NodeId::new(s.clone()))),
                Term::Null => Ok(GraphValue::Null),
                Term::Int(n) => Ok(GraphValue::Int(*n)),
                _ => Err(TaskError::Syntax {
                    pos,
                    msg: "set/list literals are only allowed as the final payload argument".into(),
                }),
            }
        };
        let root = to_value(&args[0])?;
        let extra_args: Vec<GraphValue> =
            args[1..].iter().map(to_value).collect::<Result<_, _>>()?;

        // Locate the graph the example talks about.
        let graph_of_node = |n: &NodeId| -> Result<String, TaskError> {
            let mut hits = graphs.iter().filter(|g| g.nodes.contains(n));
            match (hits.next(), hits.next()) {
                (Some(g), None) => Ok(g.id.clone()),
                (Some(_), Some(_)) => Err(TaskError::AmbiguousNode {
                    pos,
                    node: n.0.clone(),
                }),
                (None, _) => Err(TaskError::UnknownNode {
                    pos,
                    node: n.0.clone(),
                }),
            }
        };
        let graph_id = match &root {
            GraphValue::Node(n) => graph_of_node(n)?,
            _ => empty_graph_id.clone().expect("empty graph pre-created"),
        };
        for a in &extra_args {
            if let GraphValue::Node(n) = a {
                let gid = graph_of_node(n)?;
                if gid != graph_id {
                    return Err(TaskError::UnknownNode {
                        pos,
                        node: n.0.clone(),
                    });
                }
            }
        }

        let ex = Example {
            pred: raw.pred.clone(),
            root,
            extra_args,
            payload,
            graph_id,
        };
        match &pred_seen {
            None => pred_seen = Some((ex.pred.clone(), ex.arity())),
            Some((name, arity)) => {
                if *name != ex.pred {
                    return Err(TaskError::PredNameMismatch {
                        pos,
                        expected: name.clone(),
                        found: ex.pred.clone(),
                    });
                }
                if *arity != ex.arity() {
                    return Err(TaskError::ArityMismatch {
                        pos,
                        expected: *arity,
                        found: ex.arity(),
                    });
                }
            }
        }
        if let Some(p) = &ex.payload {
            match theory {
                None => theory = Some(p.theory()),
                Some(t) if t != p.theory() => {
                    return Err(TaskError::PayloadShapeMismatch { pos })
                }
                _ => {}
            }
        }
        if raw.negated {
            negatives.push(ex);
        } else {
            positives.push(ex);
        }
    }

    Ok(Task {
        graphs,
        positives,
        negatives,
        theory: theory.unwrap_or(PureTheory::Set),
        fields,
        po_int: false,
    })
}

/// Renders a task back to the fact-file syntax. `parse_task` of the result
/// reproduces the task up to fact ordering.
pub fn serialize_task(t: &Task) -> String {
    let mut out = String::from("% memory graph task\n");
    for ex in &t.positives {
        out.push_str(&format!("pos({}).\n", ex.atom_text()));
    }
    for ex in &t.negatives {
        out.push_str(&format!("neg({}).\n", ex.atom_text()));
    }
    for g in &t.graphs {
        out.push_str(&format!("\ngraph {}.\n", g.id));
        for fact in &g.facts {
            out.push_str(&format!("  {}({}, {}).\n", fact.field, fact.source, fact.target));
        }
        out.push_str("end.\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    pub const FIG2: &str = "\
pos(srtl(p11,[1,2,3])). pos(srtl(p21,[2,4,6,9])).

next(p11, p12). next(p12, p13). next(p13, null).
value(p11, 1).  value(p12, 2).  value(p13, 3).

next(p21, p22). next(p22, p23). next(p23, p24). next(p24, null).
value(p21, 2).  value(p22, 4).  value(p23, 6).  value(p24, 9).
";

    #[test]
    fn parses_fig2_task() {
        let t = parse_task(FIG2).unwrap();
        assert_eq!(t.graphs.len(), 2);
        assert_eq!(t.graphs[0].nodes.len(), 3);
        assert_eq!(t.graphs[1].nodes.len(), 4);
        assert_eq!(t.positives.len(), 2);
        assert_eq!(t.theory, PureTheory::List);
        assert_eq!(t.fields.get("next"), Some(&FieldKind::Pointer));
        assert_eq!(t.fields.get("value"), Some(&FieldKind::Value));
        assert_eq!(t.positives[0].graph_id, t.graphs[0].id);
        assert_eq!(t.positives[1].graph_id, t.graphs[1].id);
    }

    #[test]
    fn null_rooted_example_gets_empty_graph() {
        let t = parse_task("pos(p(null,{})).").unwrap();
        assert_eq!(t.graphs.len(), 1);
        assert!(t.graphs[0].facts.is_empty());
        assert_eq!(t.positives[0].root, GraphValue::Null);
        assert_eq!(t.theory, PureTheory::Set);
    }

    #[test]
    fn duplicate_field_source_rejected() {
        let err = parse_task("next(p1,p2). next(p1,p3).").unwrap_err();
        assert!(matches!(err, TaskError::DuplicateFact { .. }));
    }

    #[test]
    fn mixed_field_rejected() {
        let err = parse_task("value(a,1). value(b,c).").unwrap_err();
        assert!(matches!(err, TaskError::MixedField { .. }));
    }

    #[test]
    fn unknown_root_rejected() {
        let err = parse_task("next(a,b). pos(p(zz,{})).").unwrap_err();
        assert!(matches!(err, TaskError::UnknownNode { .. }));
    }

    #[test]
    fn arity_mismatch_rejected() {
        let err = parse_task("next(a,b). pos(p(a,{1})). pos(p(a,b,{1})).").unwrap_err();
        assert!(matches!(err, TaskError::ArityMismatch { .. }));
    }

    #[test]
    fn graph_blocks_allow_name_reuse() {
        let src = "graph a. next(n1, null). end. graph b. next(n1, n2). next(n2, null). end. pos(sll(n1, {})).";
        let err = parse_task(src).unwrap_err();
        assert!(matches!(err, TaskError::AmbiguousNode { .. }));
    }

    #[test]
    fn reachable_follows_pointer_fields_only() {
        let t = parse_task(FIG2).unwrap();
        let g = &t.graphs[0];
        let reach = reachable_nodes(g, &GraphValue::Node(NodeId::new("p11")));
        let names: Vec<&str> = reach.iter().map(|n| n.0.as_str()).collect();
        assert_eq!(names, vec!["p11", "p12", "p13"]);
        assert!(reachable_nodes(g, &GraphValue::Null).is_empty());
    }

    #[test]
    fn reachable_handles_back_edges() {
        let t = parse_task("next(a,b). prev(b,a). pos(p(a,{})).").unwrap();
        let g = &t.graphs[0];
        let reach = reachable_nodes(g, &GraphValue::Node(NodeId::new("a")));
        assert_eq!(reach.len(), 2);
    }

    #[test]
    fn validate_flags_dangling_and_mixed() {
        let mut g = MemoryGraph::new("g");
        g.nodes.insert(NodeId::new("a"));
        g.facts.push(FieldFact {
            field: "next".into(),
            source: NodeId::new("a"),
            target: GraphValue::Node(NodeId::new("b")),
        });
        let diags = validate_graph(&g);
        assert!(diags
            .iter()
            .any(|d| matches!(d, Diagnostic::DanglingNode { node } if node.0 == "b")));

        let mut g2 = MemoryGraph::new("g2");
        g2.push_fact("value", NodeId::new("a"), GraphValue::Int(1));
        g2.push_fact("value", NodeId::new("b"), GraphValue::Node(NodeId::new("a")));
        assert!(validate_graph(&g2)
            .iter()
            .any(|d| matches!(d, Diagnostic::MixedField { field } if field == "value")));
    }

    #[test]
    fn fig2_graphs_validate_clean() {
        let t = parse_task(FIG2).unwrap();
        for g in &t.graphs {
            assert!(validate_graph(g).is_empty(), "{:?}", validate_graph(g));
        }
    }

    #[test]
    fn serialize_round_trips_fig2() {
        let t = parse_task(FIG2).unwrap();
        let t2 = parse_task(&serialize_task(&t)).unwrap();
        assert_eq!(t, t2);
    }

    #[test]
    fn empty_task_serializes_to_comments() {
        let t = Task {
            graphs: vec![],
            positives: vec![],
            negatives: vec![],
            theory: PureTheory::Set,
            fields: BTreeMap::new(),
            po_int: false,
        };
        let text = serialize_task(&t);
        assert!(text.lines().all(|l| l.is_empty() || l.starts_with('%')));
        let t2 = parse_task(&text).unwrap();
        assert_eq!(t, t2);
    }

    #[test]
    fn theory_override_coerces_payloads() {
        let t = parse_task(FIG2).unwrap();
        let t = t.override_theory(PureTheory::Set).unwrap();
        assert_eq!(t.theory, PureTheory::Set);
        match &t.positives[0].payload {
            Some(PayloadTerm::Set(s)) => assert_eq!(s.len(), 3),
            other => panic!("unexpected payload {other:?}"),
        }
        let t = parse_task(FIG2).unwrap();
        assert!(t.override_theory(PureTheory::Int).is_err());
    }
}
