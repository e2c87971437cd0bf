mod common;

use common::{random_metric, random_placement, rng};
use proptest::prelude::*;
use robotaxi_core::matching::{
    brute_force_matching, matching_cost, matching_distance, point_mass, wasserstein,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn flow_matches_brute_force(seed in any::<u64>(), n in 2usize..8, k in 1usize..6) {
        let mut r = rng(seed);
        let m = random_metric(n, &mut r);
        let u = random_placement(n, k, &mut r);
        let v = random_placement(n, k, &mut r);
        let plan = matching_cost(&m, &u, &v).unwrap();
        let brute = brute_force_matching(&m, &u, &v).unwrap();
        prop_assert!((plan.total_cost - brute).abs() <= 1e-9 * (1.0 + brute));
        let used: u32 = plan.pairs.iter().map(|p| p.multiplicity).sum();
        prop_assert_eq!(used as usize, k);
    }

    #[test]
    fn matching_distance_is_a_metric(seed in any::<u64>(), n in 2usize..8, k in 1usize..7) {
        let mut r = rng(seed);
        let m = random_metric(n, &mut r);
        let a = random_placement(n, k, &mut r);
        let b = random_placement(n, k, &mut r);
        let c = random_placement(n, k, &mut r);
        let ab = matching_distance(&m, &a, &b).unwrap();
        let ba = matching_distance(&m, &b, &a).unwrap();
        let bc = matching_distance(&m, &b, &c).unwrap();
        let ac = matching_distance(&m, &a, &c).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-9);
        prop_assert_eq!(matching_distance(&m, &a, &a).unwrap(), 0.0);
        prop_assert!(ac <= ab + bc + 1e-9);
        if a != b {
            prop_assert!(ab > 0.0);
        }
    }

    #[test]
    fn matching_is_k_times_wasserstein(seed in any::<u64>(), n in 2usize..10, k in 1usize..20) {
        let mut r = rng(seed);
        let m = random_metric(n, &mut r);
        let a = random_placement(n, k, &mut r);
        let b = random_placement(n, k, &mut r);
        let dk = matching_distance(&m, &a, &b).unwrap();
        let dw = wasserstein(&m, &point_mass(&a), &point_mass(&b)).unwrap().total_cost;
        prop_assert!((dk - k as f64 * dw).abs() <= 1e-9 * (1.0 + dk));
    }
}
