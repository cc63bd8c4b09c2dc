mod common;

use gluing::{apsp, Rational};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn shortest_paths_form_a_metric(seed in any::<u64>()) {
        let g = common::random_st_graph(&mut common::rng(seed), 9);
        let d = apsp(&g.base).unwrap();
        prop_assert!(d.validate().is_ok());
        let n = d.len();
        for i in 0..n {
            prop_assert_eq!(*d.get(i, i), Rational::from_integer(0));
            for j in 0..n {
                prop_assert_eq!(d.get(i, j), d.get(j, i));
                for k in 0..n {
                    prop_assert!(*d.get(i, k) <= *d.get(i, j) + *d.get(j, k));
                }
            }
        }
    }

    #[test]
    fn edges_are_upper_bounds(seed in any::<u64>()) {
        let g = common::random_st_graph(&mut common::rng(seed), 9);
        let d = apsp(&g.base).unwrap();
        for e in g.edges() {
            prop_assert!(*d.get(e.u, e.v) <= e.len);
        }
    }

    #[test]
    fn scaling_lengths_scales_distances(seed in any::<u64>(), num in 1i128..7, den in 1i128..7) {
        let g = common::random_st_graph(&mut common::rng(seed), 7);
        let c = Rational::new(num, den);
        let d = apsp(&g.base).unwrap();
        let ds = apsp(&g.base.scaled(&c).unwrap()).unwrap();
        prop_assert_eq!(ds, d.scaled(&c));
    }
}
