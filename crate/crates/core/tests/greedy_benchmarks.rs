use anticoord::benchmarks::{
    closed_form_dynamic, closed_form_static, make_benchmark, table_instances, verify, Kind,
    REPRESENTATIVES,
};
use anticoord::exact::{anticoordinating_equilibria, brute_static};
use anticoord::greedy::{run_greedy, TieBreak, Variant};
use anticoord::policy::{validate_dynamic, validate_static};
use anticoord::{DynamicPolicy, Game, PayoffConstants};

fn game(kind: Kind, n: usize, c0: f64, c1: f64) -> Game {
    Game::new(
        make_benchmark(kind, n).unwrap(),
        PayoffConstants::new(c0, c1).unwrap(),
    )
}

const STAR_CONSTANTS: [(f64, f64); 4] = [(0.4, 0.1), (1.5, 0.1), (0.4, 0.6), (1.5, 0.6)];

fn ties() -> impl Iterator<Item = TieBreak> {
    std::iter::once(TieBreak::Lowest).chain((0..5).map(TieBreak::Seeded))
}

#[test]
fn cp_is_optimal_on_stars() {
    for n in 3..=9 {
        for (c0, c1) in STAR_CONSTANTS {
            let g = game(Kind::Star, n, c0, c1);
            let best = brute_static(&g).unwrap().cost;
            for tie in ties() {
                let r = run_greedy(&g, Variant::Cp, tie).unwrap();
                assert_eq!(r.selections(), best, "star n={n} c=({c0},{c1}) {tie:?}");
            }
        }
    }
}

#[test]
fn cp_is_optimal_on_odd_lines_b_to_e() {
    for n in [5, 7, 9] {
        for &(c0, c1) in &REPRESENTATIVES[1..5] {
            let g = game(Kind::Line, n, c0, c1);
            let best = brute_static(&g).unwrap().cost;
            for tie in ties() {
                let r = run_greedy(&g, Variant::Cp, tie).unwrap();
                assert_eq!(r.selections(), best, "line n={n} c=({c0},{c1}) {tie:?}");
            }
        }
    }
}

#[test]
fn cp_never_beats_optimum_on_lines_a_and_f() {
    for n in [5, 7, 9] {
        for (c0, c1) in [REPRESENTATIVES[0], REPRESENTATIVES[5]] {
            let g = game(Kind::Line, n, c0, c1);
            let best = brute_static(&g).unwrap().cost;
            for tie in ties() {
                assert!(run_greedy(&g, Variant::Cp, tie).unwrap().selections() >= best);
            }
        }
    }
}

#[test]
fn cp2_is_optimal_on_odd_lines_f() {
    let (c0, c1) = REPRESENTATIVES[5];
    for n in [5, 7, 9] {
        let g = game(Kind::Line, n, c0, c1);
        let best = brute_static(&g).unwrap().cost;
        assert_eq!(best, (n - 1).div_ceil(4));
        for tie in ties() {
            assert_eq!(
                run_greedy(&g, Variant::Cp2, tie).unwrap().selections(),
                best,
                "n={n} {tie:?}"
            );
        }
    }
}

#[test]
fn closed_form_static_policies_match_exhaustive_search() {
    for (kind, n, c) in table_instances() {
        let g = Game::new(make_benchmark(kind, n).unwrap(), c);
        let sf = closed_form_static(kind, n, c).unwrap();
        assert!(
            validate_static(&g, &sf.policy).unwrap().feasible,
            "{} n={n}",
            sf.label
        );
        assert_eq!(
            sf.cost,
            brute_static(&g).unwrap().cost,
            "{} n={n}",
            sf.label
        );
    }
}

#[test]
fn closed_form_dynamic_rows_outside_even_lines_pass() {
    for (kind, n, c) in table_instances() {
        if kind == Kind::Line && n % 2 == 0 {
            continue;
        }
        let row = verify(kind, n, c).unwrap();
        assert!(row.passed(), "{} n={n}: {row:?}", row.label);
    }
}

#[test]
fn even_line_d_has_no_anticoordinating_equilibrium() {
    let (c0, c1) = REPRESENTATIVES[3];
    for n in [4, 6, 8, 10] {
        let g = game(Kind::Line, n, c0, c1);
        assert!(anticoordinating_equilibria(&g).unwrap().is_empty(), "n={n}");
        let df = closed_form_dynamic(Kind::Line, n, PayoffConstants::new(c0, c1).unwrap()).unwrap();
        assert!(!validate_dynamic(&g, &df.policy).unwrap().feasible);
    }
}

#[test]
fn even_line_e_needs_no_control() {
    let (c0, c1) = REPRESENTATIVES[4];
    for n in [4, 6, 8, 10] {
        let g = game(Kind::Line, n, c0, c1);
        assert!(
            validate_dynamic(&g, &DynamicPolicy::empty())
                .unwrap()
                .feasible,
            "n={n}"
        );
    }
}
