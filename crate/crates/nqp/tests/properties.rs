//! Property tests for cross-cutting invariants: file round trips, objective
//! evaluation against a naive oracle, penalty dichotomy, oracle dominance.

use nqp::fileio::{parse_instance, serialize_instance, Instance};
use nqp::instance::QpInstance;
use nqp::level_set::LevelSet;
use nqp::reduction::penalty_g;
use nqp::solvers::{solve_brute_force, solve_local_search, SolverBudget};
use proptest::prelude::*;

fn level_set() -> impl Strategy<Value = LevelSet> {
    proptest::collection::btree_set(-20i64..=20, 2..=5)
        .prop_map(|values| LevelSet::new(values.into_iter().collect()).unwrap())
}

fn symmetric_q<T: Copy>(n: usize, upper: Vec<T>) -> Vec<T> {
    let mut q: Vec<Option<T>> = vec![None; n * n];
    let mut it = upper.into_iter();
    for i in 0..n {
        for j in i..n {
            let v = it.next().unwrap();
            q[i * n + j] = Some(v);
            q[j * n + i] = Some(v);
        }
    }
    q.into_iter().map(Option::unwrap).collect()
}

fn int_instance() -> impl Strategy<Value = QpInstance<i128>> {
    (1usize..=5, level_set()).prop_flat_map(|(n, levels)| {
        (
            proptest::collection::vec(-100i128..=100, n * (n + 1) / 2),
            proptest::collection::vec(-100i128..=100, n),
            any::<bool>(),
        )
            .prop_map(move |(upper, c, psd)| {
                QpInstance::new(n, symmetric_q(n, upper), c, levels.clone(), psd).unwrap()
            })
    })
}

fn real_instance() -> impl Strategy<Value = QpInstance<f64>> {
    (1usize..=4, level_set()).prop_flat_map(|(n, levels)| {
        (
            proptest::collection::vec(-1e6f64..1e6, n * (n + 1) / 2),
            proptest::collection::vec(-1e6f64..1e6, n),
        )
            .prop_map(move |(upper, c)| {
                QpInstance::new(n, symmetric_q(n, upper), c, levels.clone(), false).unwrap()
            })
    })
}

fn assignment_for(inst: &QpInstance<i128>) -> impl Strategy<Value = Vec<i64>> {
    let values = inst.levels().values().to_vec();
    proptest::collection::vec(0..values.len(), inst.n())
        .prop_map(move |idx| idx.into_iter().map(|i| values[i]).collect())
}

proptest! {
    #[test]
    fn int_instances_round_trip_exactly(inst in int_instance()) {
        let text = serialize_instance(&inst, None);
        let parsed = parse_instance(&text).unwrap();
        prop_assert_eq!(parsed, Instance::Int(inst));
    }

    #[test]
    fn real_instances_round_trip_exactly(inst in real_instance()) {
        let text = serialize_instance(&inst, None);
        let Instance::Real(back) = parse_instance(&text).unwrap() else {
            return Err(TestCaseError::fail("domain changed"));
        };
        for (a, b) in back.q_raw().iter().zip(inst.q_raw()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
        for (a, b) in back.c().iter().zip(inst.c()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn serialization_is_a_fixpoint(inst in int_instance()) {
        let once = serialize_instance(&inst, None);
        let Instance::Int(back) = parse_instance(&once).unwrap() else {
            return Err(TestCaseError::fail("domain changed"));
        };
        prop_assert_eq!(serialize_instance(&back, None), once);
    }

    #[test]
    fn objective_matches_naive_triple_loop(
        (inst, w) in int_instance().prop_flat_map(|inst| {
            let w = assignment_for(&inst);
            (Just(inst), w)
        })
    ) {
        let n = inst.n();
        let mut expected = 0i128;
        for i in 0..n {
            for j in 0..n {
                expected += inst.q_at(i, j) * w[i] as i128 * w[j] as i128;
            }
            expected += inst.c()[i] * w[i] as i128;
        }
        prop_assert_eq!(inst.objective(&w).unwrap(), expected);
    }

    #[test]
    fn penalty_is_zero_exactly_on_two_valued_vectors(
        (levels, idx) in level_set().prop_flat_map(|levels| {
            let n = levels.len();
            (Just(levels), proptest::collection::vec(0..n, 1..=6))
        })
    ) {
        let values = levels.values();
        let (s1, s2) = (values[0], values[1]);
        let t: Vec<i64> = idx.into_iter().map(|i| values[i]).collect();
        let g = penalty_g(&t, s1, s2).unwrap();
        let two_valued = t.iter().all(|&v| v == s1 || v == s2);
        prop_assert_eq!(two_valued, g == 0);
        prop_assert!(g >= 0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn heuristics_dominated_by_exhaustive_search(
        (inst, init, seed) in int_instance().prop_flat_map(|inst| {
            let init = assignment_for(&inst);
            (Just(inst), init, any::<u64>())
        })
    ) {
        let budget = SolverBudget::default();
        let oracle = solve_brute_force(&inst, &budget).unwrap();
        let local = solve_local_search(&inst, &init, seed, &budget).unwrap();
        prop_assert!(local.best.objective >= oracle.best.objective);
        prop_assert!(oracle.optimal_proven);
        // the oracle's assignment reproduces its objective exactly
        prop_assert_eq!(
            inst.objective(&oracle.best.w).unwrap(),
            oracle.best.objective
        );
    }
}
