use chordlen::chord::{cap_colatitude_for_fraction, cap_surface_fraction};
use chordlen::empirical::median_coordinate_sum_anchor;
use chordlen::io::{format_points, parse_points_str, ParseOptions, PointFormat};
use chordlen::sampling::{
    sample_cap_mixture, sample_embedded_uniform, sample_faulty_cube_projection, sample_hemisphere_uniform,
    sample_sphere_uniform,
};
use chordlen::uniformity::{
    calibrate_threshold, detect_embedded_subset, extract_with_target, max_uniform_count, max_uniform_fraction,
    test_uniformity, ModeKind,
};
use chordlen::*;
use proptest::prelude::*;
use std::f64::consts::SQRT_2;

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sphere_cdf_is_monotone_and_reflects(n in 2usize..20, r in 0.1f64..10.0, a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let f = SphereChordDistribution::new(n, r).unwrap();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(f.cdf(2.0 * r * lo) <= f.cdf(2.0 * r * hi));
        let d = SQRT_2 * r * a;
        let mirrored = ((2.0 * r - d) * (2.0 * r + d)).sqrt();
        prop_assert!((f.cdf(mirrored) + f.cdf(d) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn cap_fraction_inverts(n in 2usize..15, phi in 0.0f64..std::f64::consts::PI) {
        let f = cap_surface_fraction(n, phi).unwrap();
        prop_assert!((0.0..=1.0).contains(&f));
        let back = cap_colatitude_for_fraction(n, f).unwrap();
        prop_assert!((cap_surface_fraction(n, back).unwrap() - f).abs() < 1e-12);
    }

    #[test]
    fn hemisphere_cdf_stays_in_range(n in 3usize..9, t in 0.0f64..1.0) {
        let h = HemisphereChordDistribution::new(n, 1.0).unwrap();
        let d = 2.0 * t;
        let f = h.cdf(d).unwrap();
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert!(h.cdf((d + 0.05).min(2.0)).unwrap() >= f - 1e-9);
        if d <= SQRT_2 {
            prop_assert!(f >= h.sphere().cdf(d) - 1e-9);
        }
    }

    #[test]
    fn n4_closed_form_tracks_the_numeric_cdf(t in 0.0f64..1.0) {
        let h = HemisphereChordDistribution::new(4, 1.0).unwrap();
        let d = SQRT_2 * t;
        prop_assert!((h.cdf_closed_form_n4(d).unwrap() - h.cdf_numeric(d).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn subset_bound_stays_in_range(l1 in 0.0f64..=2.0, m in 0usize..100_000) {
        let f = max_uniform_fraction(l1).unwrap();
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert!(max_uniform_count(m, l1).unwrap() <= m);
    }

    #[test]
    fn generators_keep_norms_and_are_deterministic(n in 2usize..9, r in 0.2f64..5.0, seed in any::<u64>()) {
        let s = RandomSeed::new(seed);
        let sets = [
            sample_sphere_uniform(n, r, 40, s).unwrap(),
            sample_hemisphere_uniform(n.max(3), r, 40, s).unwrap(),
            sample_faulty_cube_projection(n, r, 40, s).unwrap(),
            sample_cap_mixture(n, r, 40, 0.05, 0.3, s).unwrap().points,
            sample_cap_mixture(n, r, 40, 0.002, 0.3, s).unwrap().points,
            sample_embedded_uniform(2, n.max(3), r, 10, 40, Geometry::Hemisphere, s).unwrap(),
        ];
        for set in &sets {
            for p in set.points() {
                let len = p.iter().map(|x| x * x).sum::<f64>().sqrt();
                prop_assert!((len - r).abs() <= 1e-9 * r);
            }
        }
        prop_assert_eq!(&sets[0], &sample_sphere_uniform(n, r, 40, s).unwrap());
    }

    #[test]
    fn l1_is_bounded_and_shrinks_under_bin_merging(n in 2usize..7, seed in any::<u64>(), half in 2usize..60) {
        let set = sample_faulty_cube_projection(n, 1.0, 120, RandomSeed::new(seed)).unwrap();
        let f = SphereChordDistribution::new(n, 1.0).unwrap();
        let fine = l1_distance(&distance_distribution(&set, &DistanceMode::AllPairs, 2 * half).unwrap(), &f).unwrap();
        let coarse = l1_distance(&distance_distribution(&set, &DistanceMode::AllPairs, half).unwrap(), &f).unwrap();
        prop_assert!((0.0..=2.0).contains(&fine));
        prop_assert!(coarse <= fine + 1e-12);
    }

    #[test]
    fn points_csv_round_trips(n in 2usize..8, r in 0.1f64..100.0, seed in any::<u64>()) {
        let set = sample_sphere_uniform(n, r, 25, RandomSeed::new(seed)).unwrap();
        let back = parse_points_str(&format_points(&set), PointFormat::Csv, ParseOptions::default()).unwrap();
        prop_assert_eq!(set.coords(), back.coords());
    }

    #[test]
    fn detection_ranks_survive_reflections(seed in any::<u64>(), mask in any::<u8>()) {
        let set = sample_embedded_uniform(2, 5, 1.0, 60, 120, Geometry::Sphere, RandomSeed::new(seed)).unwrap();
        let flipped = set
            .map_points(|p| p.iter().enumerate().map(|(k, x)| if mask >> k & 1 == 1 { -x } else { *x }).collect())
            .unwrap();
        let a = detect_embedded_subset(&set, 2, 60, 16).unwrap();
        let b = detect_embedded_subset(&flipped, 2, 60, 16).unwrap();
        prop_assert_eq!(a.ranked_indices, b.ranked_indices);
    }
}

#[test]
fn detection_ranks_survive_a_rotation() {
    let set = sample_embedded_uniform(2, 4, 1.0, 100, 200, Geometry::Sphere, RandomSeed::new(12)).unwrap();
    let (s, c) = 0.7f64.sin_cos();
    let rotated = set
        .map_points(|p| vec![c * p[0] - s * p[2], p[1], s * p[0] + c * p[2], p[3]])
        .unwrap();
    let a = detect_embedded_subset(&set, 2, 100, 16).unwrap();
    let b = detect_embedded_subset(&rotated, 2, 100, 16).unwrap();
    // rotation perturbs distances only in the last bits, so at most a distance
    // sitting on a bin edge can move
    let tolerance = 2.0 / 199.0 + 1e-12;
    for (x, y) in a.scores.iter().zip(&b.scores) {
        assert!((x - y).abs() <= tolerance);
    }
    assert_eq!(a.selected.len(), b.selected.len());
}

#[test]
fn parallel_results_do_not_depend_on_thread_count() {
    let set = sample_cap_mixture(4, 1.0, 300, 0.05, 0.2, RandomSeed::new(3)).unwrap().points;
    let run = || {
        let hist = distance_distribution(&set, &DistanceMode::AllPairs, 64).unwrap();
        let votes = extract_with_target(&set, 250, 0.0, 12, RandomSeed::new(4)).unwrap();
        let cal = calibrate_threshold(4, 1.0, Geometry::Sphere, 300, ModeKind::AllPairs, 64, 20, 5.0, RandomSeed::new(5))
            .unwrap();
        let report = test_uniformity(&set, Geometry::Sphere, &cal).unwrap();
        (hist, votes, cal, report)
    };
    let one = in_pool(1, run);
    let four = in_pool(4, run);
    assert_eq!(one, four);
    assert_eq!(one.1.votes.total(), 12 * 250);
}

#[test]
fn anchor_is_the_median_of_coordinate_sums() {
    let set = sample_sphere_uniform(3, 1.0, 101, RandomSeed::new(7)).unwrap();
    let anchor = median_coordinate_sum_anchor(&set).unwrap();
    let sums: Vec<f64> = set.points().map(|p| p.iter().sum()).collect();
    let below = sums.iter().filter(|&&s| s < sums[anchor]).count();
    assert_eq!(below, 50);
}
