use proptest::prelude::*;

use mixcert::{algorithm1, bootstrap_estimate, combined_intervals, plugin_from_path, SamplePath};

fn arb_path() -> impl Strategy<Value = SamplePath> {
    (2usize..6).prop_flat_map(|d| {
        proptest::collection::vec(0..d, 2..400).prop_map(move |s| SamplePath::new(d, s).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn reports_are_well_formed(path in arb_path(), delta in 0.01f64..0.5) {
        let (cert, report) = algorithm1(&path, delta).unwrap();
        prop_assert!((cert.eigenvalues[0] - 1.0).abs() < 1e-8);
        prop_assert!(cert.b_matrix.iter().flatten().all(|&b| b >= 0.0));
        for iv in report.pi_intervals.iter().chain([&report.gap_interval, &report.pimin_interval]) {
            prop_assert!(0.0 <= iv.lo && iv.lo <= iv.hi && iv.hi <= 1.0);
        }
        prop_assert!(report.tmix_interval.lo <= report.tmix_interval.hi);
        prop_assert!(report.pimin_lb >= 0.0 && report.gap_lb >= 0.0);

        let combined = combined_intervals(&path, delta, 1.0).unwrap();
        let cb = combined.combined.unwrap();
        prop_assert!(cb.v.is_subset_of(&report.gap_interval));
        prop_assert!(cb.u.is_subset_of(&report.pimin_interval));
    }

    #[test]
    fn point_estimates_are_in_range(path in arb_path()) {
        let p = plugin_from_path(&path).unwrap();
        prop_assert!((0.0..=1.0).contains(&p.gamma_hat));
        prop_assert!((0.0..=1.0).contains(&p.pimin_hat));
        let b = bootstrap_estimate(&path).unwrap();
        prop_assert!((0.0..=1.0).contains(&b.gamma_tilde));
        prop_assert!(b.a.is_power_of_two() && path.len() / b.a >= 2);
    }
}
