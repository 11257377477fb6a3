use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::cost::{frac, rat, Cost, Rational};
use crate::presets::{directed_cycle, gamma_ge, gamma_lt};
use crate::vcsp::{
    apply_clone_operator, decode_into, evaluate, express, pp_power, tuple_count, CloneOp, Instance, PpDefinition,
    RelRef, TauExpression, ValuedRelation, ValuedStructure,
};

/// Lexicographically least optimum by enumeration.
fn brute(expr: &TauExpression, g: &ValuedStructure) -> (Cost, Option<Vec<usize>>) {
    let n = g.domain_size();
    let mut best = Cost::Infinite;
    let mut arg = None;
    let mut a = vec![0; expr.num_vars()];
    for idx in 0..tuple_count(expr.num_vars(), n) {
        decode_into(idx, n, &mut a);
        let c = evaluate(expr, g, &a);
        if c.is_finite() && (arg.is_none() || c < best) {
            best = c;
            arg = Some(a.clone());
        }
    }
    (best, arg)
}

fn brute_has_solution(inst: &Instance, g: &ValuedStructure) -> bool {
    brute(&inst.expr, g).0 <= Cost::Finite(inst.threshold.clone())
}

fn random_cost(rng: &mut ChaCha8Rng) -> Cost {
    match rng.gen_range(0..7) {
        0 => Cost::Infinite,
        1 => Cost::Finite(frac(1, 2)),
        2 => Cost::Finite(frac(-1, 3)),
        k => Cost::int(k as i64 - 3),
    }
}

fn random_relation(rng: &mut ChaCha8Rng, arity: usize, n: usize) -> ValuedRelation {
    ValuedRelation::from_fn(arity, n, |_| random_cost(rng))
}

fn random_structure(rng: &mut ChaCha8Rng, n: usize) -> ValuedStructure {
    ValuedStructure::from_relations(
        n,
        [
            ("A", random_relation(rng, 2, n)),
            ("B", random_relation(rng, 1, n)),
            ("C", random_relation(rng, 3, n)),
        ],
    )
    .unwrap()
}

fn random_expr(
    rng: &mut ChaCha8Rng,
    g: &ValuedStructure,
    vars: usize,
    atoms: core::ops::RangeInclusive<usize>,
) -> TauExpression {
    let atoms = rng.gen_range(atoms);
    let mut e = TauExpression::with_vars(vars);
    let symbols = g.signature().len();
    for _ in 0..atoms {
        let s = rng.gen_range(0..symbols);
        let k = g.signature().arity(s);
        e.push(RelRef::Symbol(s), (0..k).map(|_| rng.gen_range(0..vars)).collect());
    }
    e
}

fn random_threshold(rng: &mut ChaCha8Rng) -> Rational {
    frac(rng.gen_range(-4..=12), rng.gen_range(1..=3))
}

#[test]
fn directed_triangle_over_lt() {
    let g = gamma_lt();
    let e = directed_cycle(3);
    let r = solve_exact(&e, &g);
    assert_eq!(r.cost, Cost::int(2));
    assert_eq!(r.witness, Some(vec![0, 0, 1]));
    let blp = solve_blp(&e, &g).unwrap();
    assert_eq!(blp.bound, Cost::Finite(frac(3, 2)));
    for m in &blp.marginals {
        assert_eq!(m.iter().cloned().sum::<Rational>(), rat(1));
    }
}

#[test]
fn opposite_ge_constraints_cost_nothing() {
    let g = gamma_ge();
    let e = TauExpression::parse(">=(x,y) + >=(y,x)", &g).unwrap();
    let r = solve_exact(&e, &g);
    assert_eq!(r.cost, Cost::zero());
    assert_eq!(r.witness, Some(vec![0, 0]));
}

#[test]
fn empty_relation_makes_the_instance_unsatisfiable() {
    let g = gamma_lt();
    let e = TauExpression::parse("<(x,y) + empty(y)", &g).unwrap();
    let r = solve_exact(&e, &g);
    assert_eq!(r.cost, Cost::Infinite);
    assert_eq!(r.witness, None);
    assert_eq!(solve_blp(&e, &g).unwrap().bound, Cost::Infinite);
}

#[test]
fn unused_variables_take_the_first_value() {
    let g = gamma_lt();
    let mut e = TauExpression::with_vars(3);
    e.push(RelRef::Symbol(0), vec![2, 0]);
    let r = solve_exact(&e, &g);
    assert_eq!(r.cost, Cost::zero());
    assert_eq!(r.witness, Some(vec![1, 0, 0]));
}

#[test]
fn single_summand_relaxation_is_the_table_minimum() {
    let g = ValuedStructure::from_relations(
        3,
        [(
            "R",
            ValuedRelation::from_fn(2, 3, |t| Cost::int((t[0] * 3 + t[1]) as i64 + 2)),
        )],
    )
    .unwrap();
    let e = TauExpression::with_vars(2).with(RelRef::Symbol(0), &[0, 1]);
    assert_eq!(solve_blp(&e, &g).unwrap().bound, Cost::int(2));
}

#[test]
fn scale_shift_threshold() {
    let g = ValuedStructure::from_relations(
        2,
        [
            ("S", ValuedRelation::from_fn(1, 2, |t| Cost::int(t[0] as i64))),
            ("R", ValuedRelation::from_fn(1, 2, |t| Cost::Finite(frac(t[0] as i64, 2) + rat(1)))),
        ],
    )
    .unwrap();
    let inst = Instance::new(TauExpression::with_vars(1).with(RelRef::Symbol(1), &[0]), rat(3));
    let rule = Rewrite::ScaleShift {
        symbol: 1,
        source: 0,
        scale: frac(1, 2),
        shift: rat(1),
    };
    let out = rewrite_instance(&inst, &rule, &g).unwrap();
    assert_eq!(out.threshold, rat(4));
    assert_eq!(out.expr.atoms().len(), 1);
    assert_eq!(out.expr.atoms()[0].rel, RelRef::Symbol(0));
}

#[test]
fn feas_copy_count() {
    let s = ValuedRelation::from_table(1, 2, vec![Cost::zero(), Cost::int(3)]).unwrap();
    let r = apply_clone_operator(&CloneOp::Feas, &s).unwrap();
    let t = ValuedRelation::from_table(1, 2, vec![Cost::zero(), Cost::one()]).unwrap();
    let g = ValuedStructure::from_relations(2, [("S", s), ("R", r), ("T", t)]).unwrap();
    // Integer weights with an integer threshold give gap 1.
    let e = TauExpression::with_vars(2)
        .with(RelRef::Symbol(2), &[0])
        .with(RelRef::Symbol(1), &[0])
        .with(RelRef::Symbol(1), &[1]);
    let out = rewrite_instance(&Instance::new(e, rat(1)), &Rewrite::Feas { symbol: 1, source: 0 }, &g).unwrap();
    let copies = out.expr.atoms().iter().filter(|a| a.rel == RelRef::Symbol(2)).count();
    assert_eq!(copies, 7);
    assert_eq!(out.threshold, rat(7 + 6));
}

#[test]
fn equality_rewrite_merges_variables() {
    let g = gamma_lt();
    let e = TauExpression::parse("<(x,y) + =(x,z) + <(z,w)", &g).unwrap();
    let out = rewrite_instance(
        &Instance::new(e, rat(0)),
        &Rewrite::Equality {
            symbol: RelRef::Equality,
        },
        &g,
    )
    .unwrap();
    assert_eq!(out.expr.num_vars(), 3);
    assert_eq!(out.expr.atoms().len(), 2);
    assert_eq!(out.expr.atoms()[1].args, vec![0, 2]);
}

#[test]
fn wrong_context_is_rejected() {
    let g = gamma_lt();
    let inst = Instance::new(directed_cycle(3), rat(2));
    let rule = Rewrite::Empty {
        symbol: RelRef::Symbol(0),
    };
    assert!(matches!(rewrite_instance(&inst, &rule, &g), Err(RewriteError::Mismatch(_))));
}

#[test]
fn identity_power_keeps_the_instance() {
    let def = PpDefinition {
        name: "L".into(),
        arity: 2,
        expr: TauExpression::with_vars(2).with(RelRef::Symbol(0), &[0, 1]),
        free: vec![0, 1],
    };
    let inst = Instance::new(directed_cycle(3), rat(2));
    let out = reduce_pp_instance(&inst, 1, &[def]).unwrap();
    assert_eq!(out.expr.atoms(), inst.expr.atoms());
    assert_eq!(out.expr.variables(), inst.expr.variables());
}

#[test]
fn square_power_summand_becomes_its_definition() {
    let g = gamma_lt();
    let def = PpDefinition {
        name: "S".into(),
        arity: 2,
        expr: TauExpression::with_vars(4)
            .with(RelRef::Symbol(0), &[0, 2])
            .with(RelRef::Symbol(0), &[1, 3]),
        free: vec![0, 1, 2, 3],
    };
    let delta = pp_power(&g, 2, core::slice::from_ref(&def)).unwrap();
    let inst = Instance::new(TauExpression::with_vars(2).with(RelRef::Symbol(0), &[1, 0]), rat(0));
    let out = reduce_pp_instance(&inst, 2, &[def]).unwrap();
    assert_eq!(out.expr.num_vars(), 4);
    assert_eq!(out.expr.atoms()[0].args, vec![2, 0]);
    assert_eq!(out.expr.atoms()[1].args, vec![3, 1]);
    assert_eq!(solve_exact(&out.expr, &g).cost, solve_exact(&inst.expr, &delta).cost);
}

fn check_rewrite(inst: &Instance, rule: &Rewrite<'_>, g: &ValuedStructure, symbol: RelRef) -> Result<(), TestCaseError> {
    let out = rewrite_instance(inst, rule, g).unwrap();
    prop_assert!(out.expr.atoms().iter().all(|a| a.rel != symbol));
    prop_assert_eq!(brute_has_solution(&out, g), brute_has_solution(inst, g));
    Ok(())
}

/// Adds `R := derived` and mixes its atoms into a random instance.
fn with_derived(rng: &mut ChaCha8Rng, g: &ValuedStructure, derived: ValuedRelation) -> (ValuedStructure, Instance) {
    let k = derived.arity();
    let g = g.clone().with_relation("R", derived).unwrap();
    let vars = rng.gen_range(1..=4);
    let mut e = random_expr(rng, &g, vars, 0..=4);
    let r = g.signature().index_of("R").unwrap();
    for _ in 0..rng.gen_range(0..=2) {
        e.push(RelRef::Symbol(r), (0..k).map(|_| rng.gen_range(0..vars)).collect());
    }
    (g, Instance::new(e, random_threshold(rng)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn exact_matches_enumeration(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=3);
        let g = random_structure(&mut rng, n);
        let vars = rng.gen_range(1..=5);
        let e = random_expr(&mut rng, &g, vars, 0..=6);
        let (cost, witness) = brute(&e, &g);
        let r = solve_exact(&e, &g);
        prop_assert_eq!(&r.cost, &cost);
        prop_assert_eq!(&r.witness, &witness);
        if let Some(w) = &r.witness {
            prop_assert_eq!(evaluate(&e, &g, w), r.cost.clone());
        }
        let blp = solve_blp(&e, &g).unwrap();
        prop_assert!(blp.bound <= r.cost);
    }

    #[test]
    fn exact_is_invariant_under_reordering(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=3);
        let g = random_structure(&mut rng, n);
        let vars = rng.gen_range(1..=5);
        let e = random_expr(&mut rng, &g, vars, 1..=6);
        let mut perm: Vec<usize> = (0..vars).collect();
        perm.shuffle(&mut rng);
        let mut atoms = e.atoms().to_vec();
        atoms.shuffle(&mut rng);
        let mut shuffled = TauExpression::with_vars(vars);
        for a in atoms {
            shuffled.push(a.rel, a.args.iter().map(|&v| perm[v]).collect());
        }
        prop_assert_eq!(solve_exact(&e, &g).cost, solve_exact(&shuffled, &g).cost);
    }

    #[test]
    fn relaxation_is_exact_for_ge_chains(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = gamma_ge();
        let vars = rng.gen_range(2..=6);
        let mut e = TauExpression::with_vars(vars);
        for _ in 0..rng.gen_range(1..=8) {
            e.push(RelRef::Symbol(0), vec![rng.gen_range(0..vars), rng.gen_range(0..vars)]);
        }
        prop_assert_eq!(solve_blp(&e, &g).unwrap().bound, solve_exact(&e, &g).cost);
    }

    #[test]
    fn scale_shift_preserves_solutions(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=3);
        let g = random_structure(&mut rng, n);
        let scale = frac(rng.gen_range(0..=3), rng.gen_range(1..=3));
        let shift = frac(rng.gen_range(-3..=3), rng.gen_range(1..=2));
        let d = apply_clone_operator(&CloneOp::Scale(scale.clone()), g.relation(0)).unwrap();
        let d = apply_clone_operator(&CloneOp::Shift(shift.clone()), &d).unwrap();
        let (g2, inst) = with_derived(&mut rng, &g, d);
        let rule = Rewrite::ScaleShift { symbol: 3, source: 0, scale, shift };
        check_rewrite(&inst, &rule, &g2, RelRef::Symbol(3))?;
    }

    #[test]
    fn feas_preserves_solutions(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=3);
        let g = random_structure(&mut rng, n);
        let d = apply_clone_operator(&CloneOp::Feas, g.relation(0)).unwrap();
        let (g2, inst) = with_derived(&mut rng, &g, d);
        check_rewrite(&inst, &Rewrite::Feas { symbol: 3, source: 0 }, &g2, RelRef::Symbol(3))?;
    }

    #[test]
    fn opt_preserves_solutions(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=3);
        let g = random_structure(&mut rng, n);
        let d = apply_clone_operator(&CloneOp::Opt, g.relation(0)).unwrap();
        let (g2, inst) = with_derived(&mut rng, &g, d);
        check_rewrite(&inst, &Rewrite::Opt { symbol: 3, source: 0 }, &g2, RelRef::Symbol(3))?;
    }

    #[test]
    fn substitution_preserves_solutions(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=3);
        let g = random_structure(&mut rng, n);
        let def = random_expr(&mut rng, &g, 3, 1..=3);
        let free = [rng.gen_range(0..3), rng.gen_range(0..3)];
        let d = express(&g, &def, &free).unwrap();
        let (g2, inst) = with_derived(&mut rng, &g, d);
        let rule = Rewrite::Substitute { symbol: 3, expr: &def, free: &free };
        check_rewrite(&inst, &rule, &g2, RelRef::Symbol(3))?;
    }

    #[test]
    fn equality_and_empty_preserve_solutions(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=3);
        let g = random_structure(&mut rng, n);
        let vars = rng.gen_range(1..=4);
        for builtin in [RelRef::Equality, RelRef::Empty] {
            let mut e = random_expr(&mut rng, &g, vars, 0..=4);
            if rng.gen_bool(0.7) {
                let k = g.arity_of(builtin);
                e.push(builtin, (0..k).map(|_| rng.gen_range(0..vars)).collect());
            }
            let inst = Instance::new(e, random_threshold(&mut rng));
            let rule = match builtin {
                RelRef::Equality => Rewrite::Equality { symbol: builtin },
                _ => Rewrite::Empty { symbol: builtin },
            };
            check_rewrite(&inst, &rule, &g, builtin)?;
        }
    }

    #[test]
    fn pp_reduction_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 2;
        let g = random_structure(&mut rng, n);
        let d = 2;
        let defs: Vec<PpDefinition> = (0..2)
            .map(|i| {
                let arity = i + 1;
                let vars = arity * d + 1;
                PpDefinition {
                    name: ["P", "Q"][i].to_string(),
                    arity,
                    expr: random_expr(&mut rng, &g, vars, 1..=3),
                    free: (0..arity * d).map(|_| rng.gen_range(0..vars)).collect(),
                }
            })
            .collect();
        let delta = pp_power(&g, d, &defs).unwrap();
        let vars = rng.gen_range(1..=3);
        let e = random_expr(&mut rng, &delta, vars, 1..=3);
        let inst = Instance::new(e, random_threshold(&mut rng));
        let out = reduce_pp_instance(&inst, d, &defs).unwrap();
        prop_assert_eq!(out.threshold.clone(), inst.threshold.clone());
        prop_assert_eq!(brute(&out.expr, &g).0, brute(&inst.expr, &delta).0);
    }
}
