use num_traits::Signed;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use trigrid::cocirc::BoundaryData;
use trigrid::criterion::{self, CriterionViolation};
use trigrid::feasibility;
use trigrid::grid::{build_parallelogram, build_polygon, build_three_side_grid, ConvexGrid};
use trigrid::puzzle;
use trigrid::rational::int;

fn grids() -> Vec<ConvexGrid> {
    vec![
        build_three_side_grid(2).unwrap(),
        build_three_side_grid(3).unwrap(),
        build_parallelogram(2, 1).unwrap(),
        build_polygon([2, 1, 1, 2, 1, 1]).unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn feasible_borders_satisfy_every_inequality(which in 0usize..4, seed in any::<u64>()) {
        let g = &grids()[which];
        let set = criterion::cached_puzzles(g, 25).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sigma = BoundaryData::from_vec(g, &criterion::sample_feasible(g, &mut rng));
        prop_assert!(feasibility::extend_to_concave(g, &sigma).unwrap().is_feasible());
        for (i, p) in set.puzzles.iter().enumerate() {
            let v = set.value(i, &sigma);
            prop_assert_eq!(&v, &puzzle::puzzle_inequality(g, p, &sigma));
            prop_assert!(!v.is_negative());
        }
        prop_assert!(criterion::check_border_with(g, &set, &sigma).unwrap().feasible);
    }

    #[test]
    fn criterion_agrees_with_lp(which in 0usize..4, seed in any::<u64>()) {
        let g = &grids()[which];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sigma = BoundaryData::from_vec(g, &criterion::sample_adversarial(g, &mut rng));
        prop_assert!(criterion::cross_validate(g, &sigma).unwrap());
    }

    #[test]
    fn report_names_a_real_violation(which in 0usize..4, vals in prop::collection::vec(-2i64..=2, 30)) {
        let g = &grids()[which];
        let m = g.outer_edges().len();
        let sigma = BoundaryData::from_vec(g, &vals[..m].iter().map(|&v| int(v)).collect::<Vec<_>>());
        let set = criterion::cached_puzzles(g, 25).unwrap();
        let report = criterion::check_border_with(g, &set, &sigma).unwrap();
        match report.violated {
            None => prop_assert!(report.feasible),
            Some(CriterionViolation::ZeroSum { value }) => prop_assert!(value != int(0)),
            Some(CriterionViolation::Monotone { e, e_prime }) => prop_assert!(sigma.get(&e) < sigma.get(&e_prime)),
            Some(CriterionViolation::PuzzleIneq { puzzle, value }) => {
                prop_assert!(value.is_negative());
                prop_assert_eq!(value, set.value(puzzle, &sigma));
            }
        }
    }
}

#[test]
fn horn_triples_are_balanced() {
    for n in 1..=4 {
        let triples = criterion::horn_triples(n, 25).unwrap();
        assert!(triples.keys().all(|t| t.is_balanced()), "n = {n}");
        let singles = criterion::single_triangle_triples(n, 25).unwrap();
        assert_eq!(singles.len(), n * (n + 1) / 2);
        assert!(singles.iter().all(|t| t.i.len() == 1));
    }
}
