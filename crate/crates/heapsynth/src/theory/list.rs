//! List theory: empty/1, cons/3, append/3, head/2, min_list/2, max_list/2.

use std::sync::OnceLock;

use super::{
    as_int, as_list, rules_cell, EntailmentRule, FunctionalDep, PatAtom, PureAtom, PureRelation,
    PureTheory, PureValue, RuleKind, TheoryOps, ValueSort,
};

pub struct ListTheory;

const CATALOG: &[PureRelation] = &[
    PureRelation {
        name: "empty",
        theory: PureTheory::List,
        sorts: &[ValueSort::List],
    },
    PureRelation {
        name: "cons",
        theory: PureTheory::List,
        sorts: &[ValueSort::Int, ValueSort::List, ValueSort::List],
    },
    PureRelation {
        name: "append",
        theory: PureTheory::List,
        sorts: &[ValueSort::List, ValueSort::List, ValueSort::List],
    },
    PureRelation {
        name: "head",
        theory: PureTheory::List,
        sorts: &[ValueSort::Int, ValueSort::List],
    },
    PureRelation {
        name: "min_list",
        theory: PureTheory::List,
        sorts: &[ValueSort::Int, ValueSort::List],
    },
    PureRelation {
        name: "max_list",
        theory: PureTheory::List,
        sorts: &[ValueSort::Int, ValueSort::List],
    },
];

const FDS: &[FunctionalDep] = &[
    FunctionalDep {
        rel: "empty",
        det: &[],
        dep: &[0],
    },
    FunctionalDep {
        rel: "cons",
        det: &[0, 1],
        dep: &[2],
    },
    FunctionalDep {
        rel: "cons",
        det: &[2],
        dep: &[0, 1],
    },
    FunctionalDep {
        rel: "append",
        det: &[0, 1],
        dep: &[2],
    },
    FunctionalDep {
        rel: "append",
        det: &[0, 2],
        dep: &[1],
    },
    FunctionalDep {
        rel: "append",
        det: &[1, 2],
        dep: &[0],
    },
    FunctionalDep {
        rel: "head",
        det: &[1],
        dep: &[0],
    },
    FunctionalDep {
        rel: "min_list",
        det: &[1],
        dep: &[0],
    },
    FunctionalDep {
        rel: "max_list",
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
        EntailmentRule {
            name: "append_empty_left",
            lhs: vec![pat("empty", &[0]), pat("append", &[0, 1, 1])],
            kind: RuleKind::Rewrite {
                rhs: vec![pat("empty", &[0])],
                existential: vec![],
            },
        },
        EntailmentRule {
            name: "append_empty_right",
            lhs: vec![pat("empty", &[0]), pat("append", &[1, 0, 1])],
            kind: RuleKind::Rewrite {
                rhs: vec![pat("empty", &[0])],
                existential: vec![],
            },
        },
        // append(A,A,A) forces A = [].
        EntailmentRule {
            name: "append_self",
            lhs: vec![pat("append", &[0, 0, 0])],
            kind: RuleKind::Rewrite {
                rhs: vec![pat("empty", &[0])],
                existential: vec![],
            },
        },
        EntailmentRule {
            name: "cons_head",
            lhs: vec![pat("cons", &[0, 1, 2]), pat("head", &[0, 2])],
            kind: RuleKind::Rewrite {
                rhs: vec![pat("cons", &[0, 1, 2])],
                existential: vec![],
            },
        },
        // Appending a clause-local singleton is a cons.
        EntailmentRule {
            name: "cons_append_singleton",
            lhs: vec![
                pat("empty", &[0]),
                pat("cons", &[1, 0, 2]),
                pat("append", &[2, 3, 4]),
            ],
            kind: RuleKind::Rewrite {
                rhs: vec![pat("empty", &[0]), pat("cons", &[1, 3, 4])],
                existential: vec![2],
            },
        },
        EntailmentRule {
            name: "min_singleton",
            lhs: vec![
                pat("empty", &[0]),
                pat("cons", &[1, 0, 2]),
                pat("min_list", &[1, 2]),
            ],
            kind: RuleKind::Rewrite {
                rhs: vec![pat("empty", &[0]), pat("cons", &[1, 0, 2])],
                existential: vec![],
            },
        },
        EntailmentRule {
            name: "max_singleton",
            lhs: vec![
                pat("empty", &[0]),
                pat("cons", &[1, 0, 2]),
                pat("max_list", &[1, 2]),
            ],
            kind: RuleKind::Rewrite {
                rhs: vec![pat("empty", &[0]), pat("cons", &[1, 0, 2])],
                existential: vec![],
            },
        },
        EntailmentRule {
            name: "head_singleton",
            lhs: vec![
                pat("empty", &[0]),
                pat("cons", &[1, 0, 2]),
                pat("head", &[1, 2]),
            ],
            kind: RuleKind::Rewrite {
                rhs: vec![pat("empty", &[0]), pat("cons", &[1, 0, 2])],
                existential: vec![],
            },
        },
    ]
}

static RULES: OnceLock<Vec<EntailmentRule>> = OnceLock::new();

impl TheoryOps for ListTheory {
    fn id(&self) -> PureTheory {
        PureTheory::List
    }

    fn catalog(&self) -> &'static [PureRelation] {
        CATALOG
    }

    fn evaluable(&self, rel: &str, bound: &[bool]) -> bool {
        match rel {
            "empty" => true,
            "cons" => (bound[0] && bound[1]) || bound[2],
            "append" => (bound[0] && bound[1]) || bound[2],
            "head" | "min_list" | "max_list" => bound[1],
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
                let e = PureValue::List(Vec::new());
                if check(&e, &args[0]) {
                    vec![vec![e]]
                } else {
                    vec![]
                }
            }
            "cons" => match (&args[0], &args[1], &args[2]) {
                (Some(v), Some(t), l) => {
                    let mut xs = vec![as_int(v)];
                    xs.extend_from_slice(as_list(t));
                    let xs = PureValue::List(xs);
                    if check(&xs, l) {
                        vec![vec![v.clone(), t.clone(), xs]]
                    } else {
                        vec![]
                    }
                }
                (v_slot, t_slot, Some(l)) => {
                    let xs = as_list(l);
                    match xs.split_first() {
                        Some((&h, rest)) => {
                            let hv = PureValue::Int(h);
                            let tv = PureValue::List(rest.to_vec());
                            if check(&hv, v_slot) && check(&tv, t_slot) {
                                vec![vec![hv, tv, l.clone()]]
                            } else {
                                vec![]
                            }
                        }
                        None => vec![],
                    }
                }
                _ => unreachable!("mode checked by evaluable"),
            },
            "append" => match (&args[0], &args[1], &args[2]) {
                (Some(a), Some(b), c) => {
                    let mut xs = as_list(a).to_vec();
                    xs.extend_from_slice(as_list(b));
                    let xs = PureValue::List(xs);
                    if check(&xs, c) {
                        vec![vec![a.clone(), b.clone(), xs]]
                    } else {
                        vec![]
                    }
                }
                (a_slot, b_slot, Some(c)) => {
                    let xs = as_list(c);
                    let mut out = Vec::new();
                    for split in 0..=xs.len() {
                        let a = PureValue::List(xs[..split].to_vec());
                        let b = PureValue::List(xs[split..].to_vec());
                        if check(&a, a_slot) && check(&b, b_slot) {
                            out.push(vec![a, b, c.clone()]);
                        }
                    }
                    out
                }
                _ => unreachable!("mode checked by evaluable"),
            },
            "head" | "min_list" | "max_list" => {
                let l = args[1].as_ref().expect("mode checked");
                let xs = as_list(l);
                let picked = match rel {
                    "head" => xs.first().copied(),
                    "min_list" => xs.iter().min().copied(),
                    _ => xs.iter().max().copied(),
                };
                match picked {
                    Some(v) => {
                        let v = PureValue::Int(v);
                        if check(&v, &args[0]) {
                            vec![vec![v, l.clone()]]
                        } else {
                            vec![]
                        }
                    }
                    None => vec![],
                }
            }
            other => panic!("unknown list relation {other}"),
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
            "cons" => vec![(atom.args[1], atom.args[2])],
            "append" => vec![
                (atom.args[0], atom.args[2]),
                (atom.args[1], atom.args[2]),
            ],
            _ => vec![],
        }
    }
}
