mod common;

use abelnet::optimize::toppling::{solve_toppling_ip, TopplingSystem};
use abelnet::optimize::{
    build_net_f, kleene_oracle, solve_monotone, BoxTable, Infeasibility, KleeneResult, MonotoneProgram, Solution,
};
use abelnet::Error;
use common::{brute_force_least, random_monotone_table, rng};
use proptest::prelude::*;

#[test]
fn zero_map_gives_zero() {
    let prog = MonotoneProgram::from_fn(3, None, |_| vec![0, 0, 0]);
    let net = build_net_f(&prog).unwrap();
    assert_eq!(net.input, vec![0, 0, 0]);
    let sol = solve_monotone(&prog, 10).unwrap();
    assert_eq!(sol.minimizer(), Some(&[0, 0, 0][..]));
    assert_eq!(sol.steps(), 0);
}

#[test]
fn constant_map_gives_its_value() {
    let prog = MonotoneProgram::from_fn(2, None, |_| vec![4, 1]);
    assert_eq!(kleene_oracle(&prog, &[10, 10]).unwrap(), KleeneResult::Least(vec![4, 1]));
    assert_eq!(solve_monotone(&prog, 100).unwrap().minimizer(), Some(&[4, 1][..]));
}

#[test]
fn half_plus_one() {
    let prog = MonotoneProgram::from_fn(1, Some(vec![40]), |u| vec![u[0] / 2 + 1]);
    let f = |u: u64| u / 2 + 1;
    let scan = (0..=40u64).find(|&u| f(u) <= u);
    assert_eq!(scan, Some(1));
    assert_eq!(kleene_oracle(&prog, &[40]).unwrap(), KleeneResult::Least(vec![1]));
    assert_eq!(solve_monotone(&prog, 100).unwrap().minimizer(), Some(&[1][..]));
}

#[test]
fn successor_escapes_any_box() {
    let prog = MonotoneProgram::from_fn(1, Some(vec![20]), |u| vec![u[0] + 1]);
    match solve_monotone(&prog, 1000).unwrap() {
        Solution::Infeasible {
            certificate: Infeasibility::BoxEscape { point },
            ..
        } => assert_eq!(point, vec![21]),
        other => panic!("{other:?}"),
    }
    let unbounded = MonotoneProgram::from_fn(1, None, |u| vec![u[0] + 1]);
    assert_eq!(solve_monotone(&unbounded, 500).unwrap().status(), "unknown");
}

#[test]
fn decreasing_map_is_rejected() {
    let t = BoxTable::tabulate(vec![5], |u| vec![5 - u[0]]).unwrap();
    let prog = MonotoneProgram::from_table(t);
    assert!(matches!(build_net_f(&prog), Err(Error::NonMonotone { .. })));
    assert!(MonotoneProgram::from_fn(1, None, |u| vec![u[0]]).with_cost(vec![0]).is_err());
}

#[test]
fn two_dimensional_table_matches_exhaustive_minimum() {
    let mut r = rng(2);
    let mut solved = 0;
    while solved < 10 {
        let table = random_monotone_table(&mut r, vec![15, 15], 4);
        let prog = MonotoneProgram::from_table(table);
        let Some(least) = brute_force_least(&prog, &[15, 15]) else { continue };
        for c in [vec![1, 1], vec![7, 2]] {
            let sol = solve_monotone(&prog.clone().with_cost(c).unwrap(), 100_000).unwrap();
            assert_eq!(sol.minimizer(), Some(&least[..]));
        }
        solved += 1;
    }
}

#[test]
fn toppling_path_needs_two_topplings_each() {
    let sys = TopplingSystem::from_input(
        vec![vec![1, 0, 0], vec![-1, 1, 0], vec![0, -1, 1]],
        vec![1, 1, 1],
        vec![2, 0, 0],
    )
    .unwrap();
    assert_eq!(solve_toppling_ip(&sys, 100).unwrap().topplings(), Some(&[2, 2, 2][..]));
}

#[test]
fn closed_toppling_system_is_infeasible() {
    // Two vertices passing chips back and forth with nowhere to lose them.
    let sys = TopplingSystem::from_input(vec![vec![1, -1], vec![-1, 1]], vec![1, 1], vec![1, 0]).unwrap();
    assert_eq!(solve_toppling_ip(&sys, 100).unwrap().status(), "infeasible");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn solver_agrees_with_iteration(seed in any::<u64>(), k in 1usize..=3, b in 2u64..=8) {
        let mut r = rng(seed);
        let bound = vec![b; k];
        let prog = MonotoneProgram::from_table(random_monotone_table(&mut r, bound.clone(), b / 2));
        let sol = solve_monotone(&prog, 100_000).unwrap();
        match kleene_oracle(&prog, &bound).unwrap() {
            KleeneResult::Least(u) => prop_assert_eq!(sol.minimizer(), Some(&u[..])),
            KleeneResult::EscapesBox { .. } => prop_assert_eq!(sol.status(), "infeasible"),
        }
    }
}
