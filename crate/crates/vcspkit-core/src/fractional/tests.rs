use alloc::vec;
use alloc::vec::Vec;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::cost::{frac, rat};
use crate::presets::{directed_cycle, gamma_ge, gamma_lt, path_query_dual};
use crate::solve::{solve_blp, solve_exact};
use crate::vcsp::{dual_to_valued, RelRef, TauExpression};

fn half() -> Rational {
    frac(1, 2)
}

fn min_max(n: usize) -> FractionalOperation {
    FractionalOperation::new(vec![
        (OperationTable::min(2, n), half()),
        (OperationTable::max(2, n), half()),
    ])
    .unwrap()
}

fn constant_zero(n: usize) -> ValuedStructure {
    ValuedStructure::from_relations(
        n,
        [
            ("A", ValuedRelation::constant(2, n, Cost::zero())),
            ("B", ValuedRelation::constant(1, n, Cost::zero())),
        ],
    )
    .unwrap()
}

fn unary(table: Vec<Cost>) -> ValuedStructure {
    let n = table.len();
    ValuedStructure::from_relations(n, [("R", ValuedRelation::from_table(1, n, table).unwrap())]).unwrap()
}

#[test]
fn min_max_improves_the_dual_of_the_path_query() {
    let g = dual_to_valued(&path_query_dual(), &[]);
    assert!(is_fractional_polymorphism(&min_max(2), &g));
}

#[test]
fn min_alone_fails_on_lt() {
    let g = gamma_lt();
    let r = g.relation(0);
    let omega = FractionalOperation::single(OperationTable::min(2, 2));
    assert!(!improves(&omega, r));
    // min((0,1),(0,0)) = (0,0) costs 1 against an average of 1/2.
    assert!(!improves_on(&omega, r, &[r.index(&[0, 1]), r.index(&[0, 0])]));
    assert!(improves_on(&omega, r, &[r.index(&[0, 1]), r.index(&[0, 1])]));
    assert!(improvement_violation(&omega, r).is_some());
}

#[test]
fn weights_must_form_a_distribution() {
    let f = OperationTable::min(2, 2);
    assert_eq!(
        FractionalOperation::new(vec![(f.clone(), half())]),
        Err(FractionalError::InvalidWeights)
    );
    assert_eq!(
        FractionalOperation::new(vec![(f.clone(), rat(2)), (f.clone(), rat(-1))]),
        Err(FractionalError::InvalidWeights)
    );
    let merged = FractionalOperation::new(vec![(f.clone(), half()), (f.clone(), half())]).unwrap();
    assert_eq!(merged.support().len(), 1);
    assert_eq!(merged.weight(&f), rat(1));
    assert!(matches!(
        OperationTable::new(2, 2, vec![0, 1, 2, 0]),
        Err(FractionalError::ValueOutOfRange(2))
    ));
}

#[test]
fn table_predicates() {
    assert!(OperationTable::min(3, 3).is_cyclic());
    assert!(!OperationTable::projection(2, 0, 2).is_cyclic());
    // Projections are never Siggers; min is.
    assert!(OperationTable::min(4, 2).is_siggers());
    assert!(!OperationTable::projection(4, 0, 2).is_siggers());
    let swap = OperationTable::new(1, 2, vec![1, 0]).unwrap();
    assert!(swap.is_injective());
    assert!(!OperationTable::new(1, 3, vec![0, 0, 2]).unwrap().is_injective());
    assert_eq!(OperationTable::new(1, 3, vec![2, 0, 2]).unwrap().image(), vec![0, 2]);
}

#[test]
fn cyclic_search_on_ge_finds_a_verified_operation() {
    let g = gamma_ge();
    assert!(is_fractional_polymorphism(&min_max(2), &g));
    let omega = find_cyclic_fpol(&g, 2, DEFAULT_OPERATION_CAP).unwrap().expect("min/max is feasible");
    assert!(is_fractional_polymorphism(&omega, &g));
    assert!(omega.support().iter().all(|(f, _)| f.is_cyclic()));
    let ternary = find_cyclic_fpol(&g, 3, DEFAULT_OPERATION_CAP).unwrap().expect("min/max of three");
    assert!(is_fractional_polymorphism(&ternary, &g));
}

#[test]
fn cyclic_search_on_lt_is_infeasible() {
    assert_eq!(find_cyclic_fpol(&gamma_lt(), 2, DEFAULT_OPERATION_CAP).unwrap(), None);
}

#[test]
fn cyclic_search_on_constant_zero_uses_one_table() {
    let g = constant_zero(2);
    let omega = find_cyclic_fpol(&g, 2, DEFAULT_OPERATION_CAP).unwrap().unwrap();
    assert_eq!(omega.support().len(), 1);
    assert_eq!(omega.support()[0].1, rat(1));
    assert!(omega.support()[0].0.is_cyclic());
}

#[test]
fn searches_respect_the_cap() {
    assert!(matches!(
        find_cyclic_fpol(&gamma_ge(), 2, 4),
        Err(FractionalError::CapExceeded { needed: 8, cap: 4 })
    ));
    assert!(matches!(
        siggers_in_support(&constant_zero(3), DEFAULT_OPERATION_CAP),
        Err(FractionalError::CapExceeded { .. })
    ));
    assert!(matches!(find_cyclic_fpol(&gamma_ge(), 1, 100), Err(FractionalError::ArityTooSmall(2))));
}

#[test]
fn siggers_support() {
    assert!(siggers_in_support(&gamma_ge(), DEFAULT_OPERATION_CAP).unwrap());
    assert_eq!(siggers_weight(&gamma_lt(), DEFAULT_OPERATION_CAP).unwrap(), rat(0));
    assert_eq!(siggers_weight(&constant_zero(2), DEFAULT_OPERATION_CAP).unwrap(), rat(1));
}

#[test]
fn core_of_a_unary_structure_with_a_forbidden_element() {
    let g = unary(vec![Cost::zero(), Cost::zero(), Cost::Infinite]);
    assert_eq!(core_step(&g, DEFAULT_OPERATION_CAP).unwrap(), Some(vec![0, 1]));
    let core = core_reduce(&g, DEFAULT_OPERATION_CAP).unwrap();
    // {0,1} is still constant 0 and collapses to one element.
    assert_eq!(core.kept.len(), 1);
    assert!(core.kept[0] < 2);
}

#[test]
fn cores_that_do_not_shrink() {
    let lt = core_reduce(&gamma_lt(), DEFAULT_OPERATION_CAP).unwrap();
    assert_eq!(lt.kept, vec![0, 1]);
    assert_eq!(lt.structure, gamma_lt());
    let one = unary(vec![Cost::int(3)]);
    assert_eq!(core_reduce(&one, DEFAULT_OPERATION_CAP).unwrap().kept, vec![0]);
    // Sending everything to the cheapest element improves a unary cost.
    let distinct = unary(vec![Cost::zero(), Cost::one(), Cost::int(2)]);
    let core = core_reduce(&distinct, DEFAULT_OPERATION_CAP).unwrap();
    assert_eq!(core.kept, vec![0]);
}

#[test]
fn automorphisms_of_lt_and_constant_structures() {
    assert_eq!(automorphisms(&gamma_lt()), vec![vec![0, 1]]);
    assert_eq!(automorphisms(&constant_zero(3)).len(), 6);
}

fn random_relation(rng: &mut ChaCha8Rng, arity: usize, n: usize) -> ValuedRelation {
    ValuedRelation::from_fn(arity, n, |_| match rng.gen_range(0..7) {
        0 => Cost::Infinite,
        1 => Cost::Finite(frac(1, 2)),
        2 => Cost::Finite(frac(-1, 3)),
        k => Cost::int(k as i64 - 3),
    })
}

fn random_operation(rng: &mut ChaCha8Rng, ell: usize, n: usize) -> FractionalOperation {
    let parts = rng.gen_range(1..=3);
    let raw: Vec<i64> = (0..parts).map(|_| rng.gen_range(1..=4)).collect();
    let total: i64 = raw.iter().sum();
    FractionalOperation::new(
        raw.iter()
            .map(|&w| {
                let pick = rng.gen_range(0..4);
                let f = match pick {
                    0 => OperationTable::min(ell, n),
                    1 => OperationTable::max(ell, n),
                    2 => OperationTable::projection(ell, rng.gen_range(0..ell), n),
                    _ => OperationTable::from_fn(ell, n, |_| rng.gen_range(0..n)),
                };
                (f, frac(w, total))
            })
            .collect(),
    )
    .unwrap()
}

/// A binary relation constant on orbits of a random permutation, so that the
/// automorphism group is usually nontrivial.
fn symmetric_structure(rng: &mut ChaCha8Rng, n: usize) -> ValuedStructure {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.gen_range(0..=i));
    }
    let base = random_relation(rng, 2, n);
    let sym = ValuedRelation::from_fn(2, n, |t| {
        // Constant along orbits of the permutation acting on pairs.
        let mut best = base.get(t).clone();
        let mut cur = [t[0], t[1]];
        for _ in 0..n * n {
            cur = [perm[cur[0]], perm[cur[1]]];
            best = best.min(base.get(&cur).clone());
        }
        best
    });
    ValuedStructure::from_relations(n, [("A", sym), ("B", random_relation(rng, 1, n))]).unwrap()
}

fn submodular_instance(rng: &mut ChaCha8Rng) -> TauExpression {
    let vars = rng.gen_range(2..=5);
    let mut e = TauExpression::with_vars(vars);
    for _ in 0..rng.gen_range(1..=6) {
        e.push(RelRef::Symbol(0), vec![rng.gen_range(0..vars), rng.gen_range(0..vars)]);
    }
    e
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn identity_improves_everything(seed in any::<u64>(), ell in 1usize..=3, n in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = rng.gen_range(1..=2);
        let r = random_relation(&mut rng, k, n);
        prop_assert!(improves(&FractionalOperation::identity(ell, n), &r));
    }

    #[test]
    fn improvement_survives_shift_and_scale(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=3);
        let omega = random_operation(&mut rng, 2, n);
        let k = rng.gen_range(1..=2);
        let r = random_relation(&mut rng, k, n);
        let s = frac(rng.gen_range(-5..=5), rng.gen_range(1..=3));
        let c = frac(rng.gen_range(0..=6), rng.gen_range(1..=3));
        let shifted = r.map_values(|v| v.add_rational(&s));
        let scaled = r.map_values(|v| v.scale(&c));
        if improves(&omega, &r) {
            prop_assert!(improves(&omega, &shifted));
            prop_assert!(improves(&omega, &scaled));
        }
        prop_assert_eq!(improves(&omega, &r), improves(&omega, &shifted));
    }

    #[test]
    fn automorphisms_are_fractional_polymorphisms(seed in any::<u64>(), n in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = symmetric_structure(&mut rng, n);
        let auts = automorphisms(&g);
        prop_assert!(auts.contains(&(0..n).collect()));
        for a in auts {
            let omega = FractionalOperation::single(OperationTable::new(1, n, a).unwrap());
            prop_assert!(is_fractional_polymorphism(&omega, &g));
        }
    }

    #[test]
    fn cyclic_search_results_are_verified(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=2);
        let g = ValuedStructure::from_relations(n, [
            ("A", random_relation(&mut rng, 2, n)),
            ("B", random_relation(&mut rng, 1, n)),
        ]).unwrap();
        let ell = rng.gen_range(2..=3);
        if let Some(omega) = find_cyclic_fpol(&g, ell, DEFAULT_OPERATION_CAP).unwrap() {
            prop_assert!(is_fractional_polymorphism(&omega, &g));
            prop_assert!(omega.support().iter().all(|(f, _)| f.is_cyclic() && f.arity() == ell));
        }
    }

    #[test]
    fn core_steps_keep_a_fractional_polymorphism(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=4);
        let g = ValuedStructure::from_relations(n, [
            ("A", random_relation(&mut rng, 2, n)),
            ("B", random_relation(&mut rng, 1, n)),
        ]).unwrap();
        let core = core_reduce(&g, DEFAULT_OPERATION_CAP).unwrap();
        prop_assert!(!core.kept.is_empty());
        prop_assert!(core.kept.windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(core.structure, g.restrict(&core.kept));
        prop_assert_eq!(core_step(&g.restrict(&core.kept), DEFAULT_OPERATION_CAP).unwrap(), None);
    }

    #[test]
    fn blp_is_exact_when_ge_has_a_cyclic_operation(seed in any::<u64>()) {
        let g = gamma_ge();
        prop_assume!(find_cyclic_fpol(&g, 2, DEFAULT_OPERATION_CAP).unwrap().is_some());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = if rng.gen_bool(0.2) { directed_cycle(rng.gen_range(2..=5)) } else { submodular_instance(&mut rng) };
        prop_assert_eq!(solve_blp(&e, &g).unwrap().bound, solve_exact(&e, &g).cost);
    }
}
