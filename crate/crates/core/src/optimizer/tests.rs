use super::*;
use crate::cycles::{enumerate_candidates, EntryIndex, ObjectClass, ObjectSet, ObjectiveSpec};
use crate::matrix::{protograph_for_block, BinaryMatrix, EntrySpace};

fn k33_problem(d: usize) -> OptProblem {
    let base = BinaryMatrix::ones(3, 3);
    let space = EntrySpace::new(&base);
    let l = enumerate_candidates(&base, 2).unwrap();
    let set = ObjectSet::partition(&[&l], &space).unwrap();
    OptProblem::new(set, ObjectiveSpec::weighted(1.0, 0.0, 0.0), vec![vec![0, 1]; 9], d).unwrap()
}

/// Lifting of the 2x3 all-one base: cycle-4 constraint, cycle-8 objective.
fn toy_lift(z: usize, d: usize) -> OptProblem {
    let base = BinaryMatrix::ones(2, 3);
    let proto = protograph_for_block(&base);
    let space = EntrySpace::new(&base);
    let mut c = LiftCandidates::new(&proto);
    let set = lift_objects(&mut c, &space, z, &[2, 4], false).unwrap();
    let spec = ObjectiveSpec::single(ObjectClass::Cycle8, vec![ObjectClass::Cycle4]);
    OptProblem::new(set, spec, vec![(0..z as u32).collect(); 6], d).unwrap()
}

#[test]
fn singleton_tuples() {
    let p = k33_problem(1);
    let t = p.tuples();
    assert_eq!(t.len(), 9);
    for (e, tuple) in t.iter().enumerate() {
        assert_eq!(tuple, &vec![e as u32]);
    }
}

#[test]
fn tuples_follow_co_occurrence() {
    // in K3,3, entry 0 = (0,0) shares two 4-cycles with each of (0,1), (0,2),
    // (1,0), (2,0) (entries 1, 2, 3, 6) and one with the other four
    let p = k33_problem(3);
    assert_eq!(p.tuples()[0], vec![0, 1, 2]);
    let idx: &EntryIndex = p.index();
    for f in [1, 2, 3, 6] {
        assert_eq!(idx.co_occurrence(0, f), 2);
    }
    for f in [4, 5, 7, 8] {
        assert_eq!(idx.co_occurrence(0, f), 1);
    }
    // entry 8 = (2,2): ties among 2, 5, 6, 7 resolved by lowest index
    assert_eq!(p.tuples()[8], vec![8, 2, 5]);
}

#[test]
fn oversized_tuple_rejected() {
    let base = BinaryMatrix::ones(3, 3);
    let space = EntrySpace::new(&base);
    let l = enumerate_candidates(&base, 2).unwrap();
    let set = ObjectSet::partition(&[&l], &space).unwrap();
    let idx = EntryIndex::build(&set, &ObjectiveSpec::weighted(1.0, 0.0, 0.0));
    assert!(matches!(build_tuple_list(&idx, 10), Err(crate::Error::TupleTooLarge { .. })));
    assert!(build_tuple_list(&idx, 0).is_err());
}

#[test]
fn zero_lifting_is_infeasible() {
    let p = toy_lift(5, 1);
    assert!(!p.is_feasible(&[0; 6]));
    let opts = RunOptions::new(AnnealSchedule::default_for(100), 1.0, 1);
    assert!(matches!(run(&p, vec![0; 6], &opts), Err(crate::Error::Infeasible(_))));
}

#[test]
fn incremental_counts_match_recount() {
    let p = toy_lift(5, 2);
    let x0 = vec![0, 1, 2, 0, 2, 4];
    assert!(p.is_feasible(&x0));
    let mut chain = Chain::new(&p, x0, 3.0, 11, SamplerConfig::default()).unwrap();
    for _ in 0..40 {
        let mut ok = true;
        chain
            .pass(
                |c, _| {
                    let full = c_objects(&p, c.x());
                    ok &= full == c.counts();
                    ok &= p.evaluate(c.x()) == Some(c.c_current());
                },
                |_| false,
            )
            .unwrap();
        assert!(ok);
    }
}

fn c_objects(p: &OptProblem, x: &[u32]) -> [u64; 4] {
    p.objects().active_counts(x)
}

#[test]
fn incumbent_is_monotone_and_minimal() {
    let p = toy_lift(5, 1);
    let x0 = vec![0, 1, 2, 0, 2, 4];
    let mut chain = Chain::new(&p, x0.clone(), 2.0, 5, SamplerConfig::default()).unwrap();
    let mut visited_min = p.evaluate(&x0).unwrap();
    let mut last = chain.c_opt();
    for _ in 0..50 {
        let mut trace = Vec::new();
        chain
            .pass(
                |c, _| {
                    trace.push((c.c_current(), c.c_opt()));
                },
                |_| false,
            )
            .unwrap();
        for (cur, opt) in trace {
            visited_min = visited_min.min(cur);
            assert!(opt <= last);
            assert_eq!(opt, visited_min);
            last = opt;
        }
    }
}

#[test]
fn seeded_runs_are_identical() {
    let p = toy_lift(5, 1);
    let opts = RunOptions::new(AnnealSchedule::default_for(600), 5.0, 42);
    let a = run(&p, vec![0, 1, 2, 0, 2, 4], &opts).unwrap();
    let b = run(&p, vec![0, 1, 2, 0, 2, 4], &opts).unwrap();
    assert_eq!(a, b);
    assert_eq!(log_csv(&a.log), log_csv(&b.log));
}

#[test]
fn toy_reaches_attainable_zero() {
    // cycle-4 objective on the 2x3 base with z = 3: exhaustive search finds zero
    let base = BinaryMatrix::ones(2, 3);
    let proto = protograph_for_block(&base);
    let space = EntrySpace::new(&base);
    let mut c = LiftCandidates::new(&proto);
    let set = lift_objects(&mut c, &space, 3, &[2], false).unwrap();
    let p = OptProblem::new(
        set,
        ObjectiveSpec::single(ObjectClass::Cycle4, vec![]),
        vec![vec![0, 1, 2]; 6],
        1,
    )
    .unwrap();
    let mut exhaustive_min = f64::INFINITY;
    for code in 0..729u32 {
        let x: Vec<u32> = (0..6).map(|k| (code / 3u32.pow(k)) % 3).collect();
        exhaustive_min = exhaustive_min.min(p.evaluate(&x).unwrap());
    }
    assert_eq!(exhaustive_min, 0.0);
    let total = 2000 * 6;
    let r = run(&p, vec![0; 6], &RunOptions::new(AnnealSchedule::default_for(total), 3.0, 9)).unwrap();
    assert_eq!(r.c_opt, 0.0);
    assert!(r.stopped_early);
    assert!(r.transitions < total);
}

#[test]
fn schedule_validation() {
    assert!(AnnealSchedule::new(vec![(0.3, 10), (0.5, 10)]).is_err());
    assert!(AnnealSchedule::new(vec![]).is_err());
    let s = AnnealSchedule::default_for(2000 * 3 * 17);
    assert_eq!(s.total(), 102_000);
    assert_eq!(s.stages().len(), 4);
    // budgets between 2000 and 20000 gamma kappa are plain totals
    assert_eq!(AnnealSchedule::default_for(20_000 * 3 * 17).total(), 1_020_000);
}

#[test]
fn caps_restrict_moves() {
    let base = BinaryMatrix::ones(3, 5);
    let x0 = vec![0u32; 15];
    let p = partition_problem(&base, 2, None, [0.0, 1.0, 0.2], 1)
        .unwrap()
        .with_caps(DistanceCaps {
            reference: x0.clone(),
            l1: Some(3),
            linf: Some(1),
        })
        .unwrap();
    let r = run(&p, x0, &RunOptions::new(AnnealSchedule::default_for(3000), 50.0, 3)).unwrap();
    assert!(r.x_opt.iter().all(|&v| v <= 1));
    assert!(r.x_opt.iter().sum::<u32>() <= 3);
}

#[test]
fn grid_search_single_pair_and_determinism() {
    let p = toy_lift(5, 1);
    let x0 = vec![0, 1, 2, 0, 2, 4];
    assert_eq!(grid_search_hyperparams(&p, &x0, &[2], &[0.3], 60, 5.0, 1).unwrap(), (2, 0.3));
    let a = grid_search_hyperparams(&p, &x0, &[1, 2], &[0.5, 0.3], 120, 5.0, 7).unwrap();
    let b = grid_search_hyperparams(&p, &x0, &[1, 2], &[0.5, 0.3], 120, 5.0, 7).unwrap();
    assert_eq!(a, b);
    assert!(grid_search_hyperparams(&p, &x0, &[], &[0.3], 60, 5.0, 1).is_err());
}

#[test]
fn repair_finds_cycle4_free_lifting() {
    let base = BinaryMatrix::ones(3, 5);
    let proto = protograph_for_block(&base);
    let l = random_cycle4_free(&proto, &base, 7, 3).unwrap();
    let space = EntrySpace::new(&base);
    let x = space.vector(l.grid()).unwrap();
    let mut c = LiftCandidates::new(&proto);
    let c4 = lift_objects(&mut c, &space, 7, &[2], false).unwrap();
    assert_eq!(c4.active_counts(&x)[0], 0);
}
