use mpm_core::dynamics::SystemModel;
use mpm_core::formula::{parse_formula, IndexSet};
use mpm_core::geometry::{Aabb, BoxUnion, Resolution};
use mpm_core::reach::{one_step_feasible, one_step_satisfiable, ReachOptions, Target};
use proptest::prelude::*;

fn index_set() -> impl Strategy<Value = IndexSet> {
    any::<u16>().prop_map(|bits| (1..=16).filter(|i| bits >> (i - 1) & 1 == 1).collect())
}

fn within(inner: &BoxUnion, outer: &BoxUnion) -> bool {
    inner.boxes().iter().all(|b| outer.contains_box(b))
}

fn interval(lo: f64, hi: f64) -> BoxUnion {
    BoxUnion::from_box(Aabb::new(&[lo], &[hi]).unwrap(), Resolution::uniform(0.1))
}

fn opts() -> ReachOptions {
    ReachOptions::default()
}

proptest! {
    #[test]
    fn index_set_text_round_trip(a in index_set()) {
        prop_assert_eq!(a.to_string().parse::<IndexSet>().unwrap(), a);
    }

    #[test]
    fn index_set_lattice_laws(a in index_set(), b in index_set()) {
        prop_assert_eq!(a.union(b).len() + a.intersection(b).len(), a.len() + b.len());
        prop_assert!(a.difference(b).is_subset(a));
        prop_assert!(a.difference(b).intersection(b).is_empty());
        prop_assert_eq!(a.subsets().count(), 1usize << a.len());
        prop_assert!(a.subsets().all(|s| s.is_subset(a)));
    }

    #[test]
    fn formula_text_round_trip(
        ops in prop::collection::vec((0usize..3, 0i64..5, 0i64..5, -9i64..9, 1i64..9), 1..4)
    ) {
        let parts: Vec<String> = ops
            .iter()
            .map(|&(op, a, w, lo, len)| {
                let r = format!("x0 >= {lo} & x0 <= {}", lo + len);
                match op {
                    0 => format!("G[{a},{}] ({r})", a + w),
                    1 => format!("F[{a},{}] ({r})", a + w),
                    _ => format!("(x1 >= {lo}) U[{a},{}] ({r})", a + w),
                }
            })
            .collect();
        let f = parse_formula(&parts.join(" && ")).unwrap();
        let again = parse_formula(&f.to_string()).unwrap();
        prop_assert_eq!(again, f);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn reach_is_monotone_in_the_target(lo in 14.0f64..30.0, w in 0.5f64..6.0, grow in 0.0f64..4.0) {
        let m = SystemModel::building_temperature();
        let eps = Resolution::uniform(0.1);
        let small = interval(lo, lo + w);
        let big = interval(lo - grow, lo + w + grow);
        for exists in [true, false] {
            let run = |t: &BoxUnion| {
                if exists {
                    one_step_feasible(&m, Target::Set(t), 0, &eps, &opts()).unwrap().0
                } else {
                    one_step_satisfiable(&m, Target::Set(t), 0, &eps, &opts()).unwrap().0
                }
            };
            prop_assert!(within(&run(&small), &run(&big)));
        }
    }

    #[test]
    fn reach_is_monotone_in_resolution(lo in 14.0f64..30.0, w in 0.5f64..6.0) {
        let m = SystemModel::building_temperature();
        let t = interval(lo, lo + w);
        let coarse = one_step_feasible(&m, Target::Set(&t), 0, &Resolution::uniform(0.4), &opts()).unwrap().0;
        let fine = one_step_feasible(&m, Target::Set(&t), 0, &Resolution::uniform(0.2), &opts()).unwrap().0;
        prop_assert!(within(&coarse, &fine));
    }

    #[test]
    fn reach_sets_are_sound(lo in 14.0f64..30.0, w in 0.5f64..6.0, probes in prop::collection::vec(0.0f64..1.0, 16)) {
        let m = SystemModel::building_temperature();
        let eps = Resolution::uniform(0.1);
        let t = interval(lo, lo + w);
        let x = one_step_feasible(&m, Target::Set(&t), 0, &eps, &opts()).unwrap().0;
        let y = one_step_satisfiable(&m, Target::Set(&t), 0, &eps, &opts()).unwrap().0;
        prop_assert!(within(&y, &x));
        let inside = |v: f64| v >= lo && v <= lo + w;
        for b in x.boxes() {
            for p in &probes {
                let s = b.lo()[0] + p * (b.hi()[0] - b.lo()[0]);
                // the image over u is the segment between the two extreme inputs
                let a = m.step(&[s], &[0.0], 0).unwrap()[0];
                let c = m.step(&[s], &[1.0], 0).unwrap()[0];
                prop_assert!(a.min(c) <= lo + w && a.max(c) >= lo, "x={s}");
                if y.contains_point(&[s]) {
                    prop_assert!(inside(a) && inside(c), "x={s}");
                }
            }
        }
    }
}
