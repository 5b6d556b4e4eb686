//! Integer theory: zero/1, succ/2, plus/3, leq/2, lt/2.
//!
//! Integers are not treated as a containment order unless the task carries
//! the `po_int` flag (lengths and heights decrease along recursion; general
//! payload integers do not).

use std::sync::OnceLock;

use super::{
    as_int, rules_cell, EntailmentRule, FunctionalDep, PatAtom, PureAtom, PureRelation,
    PureTheory, PureValue, RuleKind, TheoryOps, ValueSort,
};

pub struct IntTheory;

const CATALOG: &[PureRelation] = &[
    PureRelation {
        name: "zero",
        theory: PureTheory::Int,
        sorts: &[ValueSort::Int],
    },
    PureRelation {
        name: "succ",
        theory: PureTheory::Int,
        sorts: &[ValueSort::Int, ValueSort::Int],
    },
    PureRelation {
        name: "plus",
        theory: PureTheory::Int,
        sorts: &[ValueSort::Int, ValueSort::Int, ValueSort::Int],
    },
    PureRelation {
        name: "leq",
        theory: PureTheory::Int,
        sorts: &[ValueSort::Int, ValueSort::Int],
    },
    PureRelation {
        name: "lt",
        theory: PureTheory::Int,
        sorts: &[ValueSort::Int, ValueSort::Int],
    },
];

const FDS: &[FunctionalDep] = &[
    FunctionalDep {
        rel: "zero",
        det: &[],
        dep: &[0],
    },
    FunctionalDep {
        rel: "succ",
        det: &[0],
        dep: &[1],
    },
    FunctionalDep {
        rel: "succ",
        det: &[1],
        dep: &[0],
    },
    FunctionalDep {
        rel: "plus",
        det: &[0, 1],
        dep: &[2],
    },
    FunctionalDep {
        rel: "plus",
        det: &[0, 2],
        dep: &[1],
    },
    FunctionalDep {
        rel: "plus",
        det: &[1, 2],
        dep: &[0],
    },
];

fn build_rules() -> Vec<EntailmentRule> {
    let pat = |rel: &'static str, args: &[u8]| PatAtom {
        rel,
        args: args.to_vec(),
    };
    vec![
        EntailmentRule {
            name: "leq_refl",
            lhs: vec![pat("leq", &[0, 0])],
            kind: RuleKind::Rewrite {
                rhs: vec![],
                existential: vec![],
            },
        },
        EntailmentRule {
            name: "leq_trans",
            lhs: vec![pat("leq", &[0, 1]), pat("leq", &[1, 2]), pat("leq", &[0, 2])],
            kind: RuleKind::Rewrite {
                rhs: vec![pat("leq", &[0, 1]), pat("leq", &[1, 2])],
                existential: vec![],
            },
        },
        EntailmentRule {
            name: "lt_trans",
            lhs: vec![pat("lt", &[0, 1]), pat("lt", &[1, 2]), pat("lt", &[0, 2])],
            kind: RuleKind::Rewrite {
                rhs: vec![pat("lt", &[0, 1]), pat("lt", &[1, 2])],
                existential: vec![],
            },
        },
        EntailmentRule {
            name: "lt_leq_trans",
            lhs: vec![pat("lt", &[0, 1]), pat("leq", &[1, 2]), pat("lt", &[0, 2])],
            kind: RuleKind::Rewrite {
                rhs: vec![pat("lt", &[0, 1]), pat("leq", &[1, 2])],
                existential: vec![],
            },
        },
        EntailmentRule {
            name: "leq_lt_trans",
            lhs: vec![pat("leq", &[0, 1]), pat("lt", &[1, 2]), pat("lt", &[0, 2])],
            kind: RuleKind::Rewrite {
                rhs: vec![pat("leq", &[0, 1]), pat("lt", &[1, 2])],
                existential: vec![],
            },
        },
        EntailmentRule {
            name: "lt_implies_leq",
            lhs: vec![pat("lt", &[0, 1]), pat("leq", &[0, 1])],
            kind: RuleKind::Rewrite {
                rhs: vec![pat("lt", &[0, 1])],
                existential: vec![],
            },
        },
        EntailmentRule {
            name: "succ_lt",
            lhs: vec![pat("succ", &[0, 1]), pat("lt", &[0, 1])],
            kind: RuleKind::Rewrite {
                rhs: vec![pat("succ", &[0, 1])],
                existential: vec![],
            },
        },
        EntailmentRule {
            name: "succ_leq",
            lhs: vec![pat("succ", &[0, 1]), pat("leq", &[0, 1])],
            kind: RuleKind::Rewrite {
                rhs: vec![pat("succ", &[0, 1])],
                existential: vec![],
            },
        },
        EntailmentRule {
            name: "plus_comm_dup",
            lhs: vec![pat("plus", &[0, 1, 2]), pat("plus", &[1, 0, 2])],
            kind: RuleKind::Rewrite {
                rhs: vec![pat("plus", &[0, 1, 2])],
                existential: vec![],
            },
        },
        EntailmentRule {
            name: "plus_zero_left",
            lhs: vec![pat("zero", &[0]), pat("plus", &[0, 1, 1])],
            kind: RuleKind::Rewrite {
                rhs: vec![pat("zero", &[0])],
                existential: vec![],
            },
        },
        EntailmentRule {
            name: "plus_zero_right",
            lhs: vec![pat("zero", &[0]), pat("plus", &[1, 0, 1])],
            kind: RuleKind::Rewrite {
                rhs: vec![pat("zero", &[0])],
                existential: vec![],
            },
        },
        // leq(A,B), leq(B,A) forces A = B.
        EntailmentRule {
            name: "leq_antisym",
            lhs: vec![pat("leq", &[0, 1]), pat("leq", &[1, 0])],
            kind: RuleKind::Equate(0, 1),
        },
        // plus(A,B,A) forces B = 0; expressible because zero/1 is shorter.
        EntailmentRule {
            name: "plus_fix_right",
            lhs: vec![pat("plus", &[0, 1, 0])],
            kind: RuleKind::Rewrite {
                rhs: vec![pat("zero", &[1])],
                existential: vec![],
            },
        },
        EntailmentRule {
            name: "plus_fix_left",
            lhs: vec![pat("plus", &[1, 0, 0])],
            kind: RuleKind::Rewrite {
                rhs: vec![pat("zero", &[1])],
                existential: vec![],
            },
        },
    ]
}

static RULES: OnceLock<Vec<EntailmentRule>> = OnceLock::new();

impl TheoryOps for IntTheory {
    fn id(&self) -> PureTheory {
        PureTheory::Int
    }

    fn catalog(&self) -> &'static [PureRelation] {
        CATALOG
    }

    fn evaluable(&self, rel: &str, bound: &[bool]) -> bool {
        match rel {
            "zero" => true,
            "succ" => bound[0] || bound[1],
            "plus" => bound.iter().filter(|b| **b).count() >= 2,
            "leq" | "lt" => bound[0] && bound[1],
            _ => false,
        }
    }

    fn eval(&self, rel: &str, args: &[Option<PureValue>]) -> Vec<Vec<PureValue>> {
        let check = |want: i64, slot: &Option<PureValue>| match slot {
            Some(v) => as_int(v) == want,
            None => true,
        };
        let ok = |vals: Vec<i64>| vec![vals.into_iter().map(PureValue::Int).collect()];
        match rel {
            "zero" => {
                if check(0, &args[0]) {
                    ok(vec![0])
                } else {
                    vec![]
                }
            }
            "succ" => match (&args[0], &args[1]) {
                (Some(a), b) => {
                    let a = as_int(a);
                    if check(a + 1, b) {
                        ok(vec![a, a + 1])
                    } else {
                        vec![]
                    }
                }
                (None, Some(b)) => {
                    let b = as_int(b);
                    ok(vec![b - 1, b])
                }
                _ => unreachable!("mode checked by evaluable"),
            },
            "plus" => {
                let vals: Vec<Option<i64>> = args.iter().map(|a| a.as_ref().map(as_int)).collect();
                let (a, b, c) = (vals[0], vals[1], vals[2]);
                let solved = match (a, b, c) {
                    (Some(a), Some(b), c_slot) => {
                        let c = a + b;
                        c_slot.map_or(true, |v| v == c).then_some([a, b, c])
                    }
                    (Some(a), None, Some(c)) => Some([a, c - a, c]),
                    (None, Some(b), Some(c)) => Some([c - b, b, c]),
                    _ => unreachable!("mode checked by evaluable"),
                };
                match solved {
                    Some([a, b, c]) => ok(vec![a, b, c]),
                    None => vec![],
                }
            }
            "leq" | "lt" => {
                let a = as_int(args[0].as_ref().expect("mode checked"));
                let b = as_int(args[1].as_ref().expect("mode checked"));
                let holds = if rel == "leq" { a <= b } else { a < b };
                if holds {
                    ok(vec![a, b])
                } else {
                    vec![]
                }
            }
            other => panic!("unknown int relation {other}"),
        }
    }

    fn rules(&self) -> &'static [EntailmentRule] {
        rules_cell(&RULES, build_rules)
    }

    fn functional_deps(&self) -> &'static [FunctionalDep] {
        FDS
    }

    fn le_edges(&self, atom: &PureAtom, po_int: bool) -> Vec<(u32, u32)> {
        if !po_int {
            return vec![];
        }
        match atom.rel.as_ref() {
            "succ" => vec![(atom.args[0], atom.args[1])],
            "leq" => vec![(atom.args[0], atom.args[1])],
            "lt" => vec![(atom.args[0], atom.args[1])],
            "plus" => vec![
                (atom.args[0], atom.args[2]),
                (atom.args[1], atom.args[2]),
            ],
            _ => vec![],
        }
    }
}
