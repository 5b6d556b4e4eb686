use heapsynth::enumerate::{Enumerator, SearchBounds, StaticFilters, Vocab};
use heapsynth::graph::parse_task;
use heapsynth::hypothesis::{ClauseKind, PredKey, Shape};
use heapsynth::theory::PureTheory;

fn main() {
    let fig2 = "pos(srtl(p11,[1,2,3])). pos(srtl(p21,[2,4,6,9])).
next(p11, p12). next(p12, p13). next(p13, null).
value(p11, 1).  value(p12, 2).  value(p13, 3).
next(p21, p22). next(p22, p23). next(p23, p24). next(p24, null).
value(p21, 2).  value(p22, 4).  value(p23, 6).  value(p24, 9).";
    let task = parse_task(fig2)
        .unwrap()
        .override_theory(PureTheory::Set)
        .unwrap();
    let vocab = Vocab::from_task(&task).unwrap();
    for mv in [5usize, 6, 8] {
        let bounds = SearchBounds {
            max_var: mv,
            max_body: 8,
            shape: Shape::main_only(2),
            max_size: 16,
        };
        let mut en = Enumerator::new(vocab.clone(), bounds, StaticFilters::all());
        for kind in [ClauseKind::Base, ClauseKind::Recursive] {
            for s in 1..=6usize {
                let t0 = std::time::Instant::now();
                let n = en.clause_count(PredKey::Main, kind, s);
                println!("mv={mv} {kind:?} size={s}: {n} clauses in {:?}", t0.elapsed());
            }
        }
    }
}
