//! Hemisphere law against independent references: a brute-force chord sampler
//! and Richardson-extrapolated derivatives of the N=4 closed form.

use std::f64::consts::SQRT_2;

use chordlen::HemisphereChordDistribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn hemisphere_chords(n: usize, pairs: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let point = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        let mut v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= len);
        v[n - 1] = v[n - 1].abs();
        v
    };
    (0..pairs)
        .map(|_| {
            let (a, b) = (point(&mut rng), point(&mut rng));
            a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
        })
        .collect()
}

#[test]
fn n4_pdf_matches_the_derivative_of_the_closed_form() {
    let h = HemisphereChordDistribution::new(4, 1.0).unwrap();
    let closed = |d: f64| h.cdf_closed_form_n4(d).unwrap();
    let central = |d: f64, step: f64| (closed(d + step) - closed(d - step)) / (2.0 * step);
    for i in 1..=50 {
        let d = 0.02 + (SQRT_2 - 0.04) * (i - 1) as f64 / 49.0;
        let step = 1e-3;
        let derivative = (4.0 * central(d, step / 2.0) - central(d, step)) / 3.0;
        let pdf = h.pdf(d).unwrap();
        assert!((pdf - derivative).abs() < 1e-4, "d={d}: pdf {pdf} vs {derivative}");
    }
}

#[test]
fn n3_pdf_matches_a_chord_histogram() {
    let h = HemisphereChordDistribution::new(3, 1.0).unwrap();
    let k = 10_000_000;
    let bins = 40;
    let width = 2.0 / bins as f64;
    let mut counts = vec![0u64; bins];
    for d in hemisphere_chords(3, k, 31) {
        counts[((d / width) as usize).min(bins - 1)] += 1;
    }
    // three-point Gauss-Legendre mass of each bin from the pdf
    let (node, outer, centre) = ((0.6f64).sqrt(), 5.0 / 9.0, 8.0 / 9.0);
    for (b, &count) in counts.iter().enumerate() {
        let mid = (b as f64 + 0.5) * width;
        let half = width / 2.0;
        let mass = half
            * (outer * h.pdf(mid - node * half).unwrap()
                + centre * h.pdf(mid).unwrap()
                + outer * h.pdf(mid + node * half).unwrap());
        let observed = count as f64 / k as f64;
        let sigma = (mass * (1.0 - mass) / k as f64).sqrt();
        assert!(
            (observed - mass).abs() <= 3.0 * sigma,
            "bin {b}: observed {observed} vs {mass} ({:.2} sigma)",
            (observed - mass).abs() / sigma
        );
    }
}

#[test]
fn n5_cdf_at_a_short_chord_matches_sampling() {
    let h = HemisphereChordDistribution::new(5, 1.0).unwrap();
    let k = 10_000_000;
    let below = hemisphere_chords(5, k, 53).into_iter().filter(|&d| d <= 0.8).count() as f64 / k as f64;
    let f = h.cdf(0.8).unwrap();
    let sigma = (f * (1.0 - f) / k as f64).sqrt();
    assert!((f - below).abs() <= 3.0 * sigma, "numeric {f} vs sampled {below}");
}

#[test]
fn n4_median_sits_near_its_tabulated_value() {
    let f = HemisphereChordDistribution::new(4, 1.0).unwrap().cdf(1.249).unwrap();
    assert!((f - 0.5).abs() <= 2e-3, "F(1.249) = {f}");
}
