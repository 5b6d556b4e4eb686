//! Finite-set theory: empty/1, insert/3, union/3, min_set/2, max_set/2.
//!
//! `insert(S1, V, S)` means `S = S1 ∪ {V}`; inserting a present element is a
//! no-op, which is what makes the chained-insert minimisation rule an
//! equivalence and lets set payloads absorb duplicate data values.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use super::{
    as_int, as_set, rules_cell, EntailmentRule, FunctionalDep, PatAtom, PureAtom, PureRelation,
    PureTheory, PureValue, RuleKind, TheoryOps, ValueSort,
};

pub struct SetTheory;

const CATALOG: &[PureRelation] = &[
    PureRelation {
        name: "empty",
        theory: PureTheory::Set,
        sorts: &[ValueSort::Set],
    },
    PureRelation {
        name: "insert",
        theory: PureTheory::Set,
        sorts: &[ValueSort::Set, ValueSort::Int, ValueSort::Set],
    },
    PureRelation {
        name: "union",
        theory: PureTheory::Set,
        sorts: &[ValueSort::Set, ValueSort::Set, ValueSort::Set],
    },
    PureRelation {
        name: "min_set",
        theory: PureTheory::Set,
        sorts: &[ValueSort::Int, ValueSort::Set],
    },
    PureRelation {
        name: "max_set",
        theory: PureTheory::Set,
        sorts: &[ValueSort::Int, ValueSort::Set],
    },
];

const FDS: &[FunctionalDep] = &[
    FunctionalDep {
        rel: "empty",
        det: &[],
        dep: &[0],
    },
    FunctionalDep {
        rel: "insert",
        det: &[0, 1],
        dep: &[2],
    },
    FunctionalDep {
        rel: "union",
        det: &[0, 1],
        dep: &[2],
    },
    FunctionalDep {
        rel: "min_set",
        det: &[1],
        dep: &[0],
    },
    FunctionalDep {
        rel: "max_set",
        det: &[1],
        dep: &[0],
    },
];

fn build_rules() -> Vec<EntailmentRule> {
    let pat = |rel: &'static str, args: &[u8]| PatAtom {
        rel,
        args: args.to_vec(),
    };
    vec![
        // insert(A,V,T), insert(T,V,S) -> insert(A,V,S); re-inserting V is a
        // no-op, so the chain collapses when T is clause-local.
        EntailmentRule {
            name: "insert_chain",
            lhs: vec![pat("insert", &[0, 1, 2]), pat("insert", &[2, 1, 3])],
            kind: RuleKind::Rewrite {
                rhs: vec![pat("insert", &[0, 1, 3])],
                existential: vec![2],
            },
        },
        // Same chain, absorbing a clause-local result instead.
        EntailmentRule {
            name: "insert_absorb",
            lhs: vec![pat("insert", &[0, 1, 2]), pat("insert", &[2, 1, 3])],
            kind: RuleKind::Rewrite {
                rhs: vec![pat("insert", &[0, 1, 2])],
                existential: vec![3],
            },
        },
        EntailmentRule {
            name: "union_self",
            lhs: vec![pat("union", &[0, 0, 0])],
            kind: RuleKind::Rewrite {
                rhs: vec![],
                existential: vec![],
            },
        },
        EntailmentRule {
            name: "union_empty_left",
            lhs: vec![pat("empty", &[0]), pat("union", &[0, 1, 1])],
            kind: RuleKind::Rewrite {
                rhs: vec![pat("empty", &[0])],
                existential: vec![],
            },
        },
        EntailmentRule {
            name: "union_empty_right",
            lhs: vec![pat("empty", &[0]), pat("union", &[1, 0, 1])],
            kind: RuleKind::Rewrite {
                rhs: vec![pat("empty", &[0])],
                existential: vec![],
            },
        },
        EntailmentRule {
            name: "union_comm_dup",
            lhs: vec![pat("union", &[0, 1, 2]), pat("union", &[1, 0, 2])],
            kind: RuleKind::Rewrite {
                rhs: vec![pat("union", &[0, 1, 2])],
                existential: vec![],
            },
        },
        // union(A,A,B) forces B = A.
        EntailmentRule {
            name: "union_self_out",
            lhs: vec![pat("union", &[0, 0, 1])],
            kind: RuleKind::Equate(0, 1),
        },
        // A singleton's minimum and maximum are its element.
        EntailmentRule {
            name: "min_singleton",
            lhs: vec![
                pat("empty", &[0]),
                pat("insert", &[0, 1, 2]),
                pat("min_set", &[1, 2]),
            ],
            kind: RuleKind::Rewrite {
                rhs: vec![pat("empty", &[0]), pat("insert", &[0, 1, 2])],
                existential: vec![],
            },
        },
        EntailmentRule {
            name: "max_singleton",
            lhs: vec![
                pat("empty", &[0]),
                pat("insert", &[0, 1, 2]),
                pat("max_set", &[1, 2]),
            ],
            kind: RuleKind::Rewrite {
                rhs: vec![pat("empty", &[0]), pat("insert", &[0, 1, 2])],
                existential: vec![],
            },
        },
    ]
}

static RULES: OnceLock<Vec<EntailmentRule>> = OnceLock::new();

fn subsets(s: &BTreeSet<i64>) -> Vec<BTreeSet<i64>> {
    let elems: Vec<i64> = s.iter().copied().collect();
    let mut out = Vec::with_capacity(1 << elems.len());
    for mask in 0..(1u32 << elems.len()) {
        out.push(
            elems
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, &x)| x)
                .collect(),
        );
    }
    out
}

impl TheoryOps for SetTheory {
    fn id(&self) -> PureTheory {
        PureTheory::Set
    }

    fn catalog(&self) -> &'static [PureRelation] {
        CATALOG
    }

    fn evaluable(&self, rel: &str, bound: &[bool]) -> bool {
        match rel {
            "empty" => true,
            "insert" => (bound[0] && bound[1]) || bound[2],
            "union" => (bound[0] && bound[1]) || bound[2],
            "min_set" | "max_set" => bound[1],
            _ => false,
        }
    }

    fn eval(&self, rel: &str, args: &[Option<PureValue>]) -> Vec<Vec<PureValue>> {
        let check = |want: &PureValue, slot: &Option<PureValue>| match slot {
            Some(v) => v == want,
            None => true,
        };
        match rel {
            "empty" => {
                let e = PureValue::Set(BTreeSet::new());
                if check(&e, &args[0]) {
                    vec![vec![e]]
                } else {
                    vec![]
                }
            }
            "insert" => {
                let mut out = Vec::new();
                match (&args[0], &args[1], &args[2]) {
                    (Some(s1), Some(v), s) => {
                        let mut u = as_set(s1).clone();
                        u.insert(as_int(v));
                        let u = PureValue::Set(u);
                        if check(&u, s) {
                            out.push(vec![s1.clone(), v.clone(), u]);
                        }
                    }
                    (s1_slot, v_slot, Some(s)) => {
                        let sv = as_set(s);
                        let vs: Vec<i64> = match v_slot {
                            Some(v) => vec![as_int(v)],
                            None => sv.iter().copied().collect(),
                        };
                        for v in vs {
                            if !sv.contains(&v) {
                                continue;
                            }
                            let mut smaller = sv.clone();
                            smaller.remove(&v);
                            for s1 in [smaller, sv.clone()] {
                                let cand = PureValue::Set(s1);
                                if check(&cand, s1_slot) {
                                    out.push(vec![
                                        cand,
                                        PureValue::Int(v),
                                        s.clone(),
                                    ]);
                                }
                            }
                        }
                        out.dedup();
                    }
                    _ => unreachable!("mode checked by evaluable"),
                }
                out
            }
            "union" => {
                let mut out = Vec::new();
                match (&args[0], &args[1], &args[2]) {
                    (Some(a), Some(b), c) => {
                        let u: BTreeSet<i64> = as_set(a).union(as_set(b)).copied().collect();
                        let u = PureValue::Set(u);
                        if check(&u, c) {
                            out.push(vec![a.clone(), b.clone(), u]);
                        }
                    }
                    (a_slot, b_slot, Some(c)) => {
                        let cv = as_set(c);
                        let a_cands = match a_slot {
                            Some(a) => vec![as_set(a).clone()],
                            None => subsets(cv),
                        };
                        for a in a_cands {
                            if !a.is_subset(cv) {
                                continue;
                            }
                            let rest: BTreeSet<i64> = cv.difference(&a).copied().collect();
                            let b_cands = match b_slot {
                                Some(b) => vec![as_set(b).clone()],
                                None => subsets(&a)
                                    .into_iter()
                                    .map(|x| rest.union(&x).copied().collect())
                                    .collect(),
                            };
                            for b in b_cands {
                                let u: BTreeSet<i64> = a.union(&b).copied().collect();
                                if &u == cv {
                                    out.push(vec![
                                        PureValue::Set(a.clone()),
                                        PureValue::Set(b),
                                        c.clone(),
                                    ]);
                                }
                            }
                        }
                        out.sort();
                        out.dedup();
                    }
                    _ => unreachable!("mode checked by evaluable"),
                }
                out
            }
            "min_set" | "max_set" => {
                let s = args[1].as_ref().expect("mode checked");
                let sv = as_set(s);
                let ext = if rel == "min_set" {
                    sv.iter().next()
                } else {
                    sv.iter().next_back()
                };
                match ext {
                    Some(&m) => {
                        let m = PureValue::Int(m);
                        if check(&m, &args[0]) {
                            vec![vec![m, s.clone()]]
                        } else {
                            vec![]
                        }
                    }
                    None => vec![],
                }
            }
            other => panic!("unknown set relation {other}"),
        }
    }

    fn rules(&self) -> &'static [EntailmentRule] {
        rules_cell(&RULES, build_rules)
    }

    fn functional_deps(&self) -> &'static [FunctionalDep] {
        FDS
    }

    fn le_edges(&self, atom: &PureAtom, _po_int: bool) -> Vec<(u32, u32)> {
        match atom.rel.as_ref() {
            "insert" => vec![(atom.args[0], atom.args[2])],
            "union" => vec![
                (atom.args[0], atom.args[2]),
                (atom.args[1], atom.args[2]),
            ],
            _ => vec![],
        }
    }
}
