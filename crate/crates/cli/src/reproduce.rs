use std::fmt::Write as _;

use chordlen::sampling::{sample_cap_mixture, sample_embedded_uniform, sample_faulty_cube_projection};
use chordlen::uniformity::{
    calibrate_threshold, detect_embedded_subset, extract_with_target, max_uniform_count, max_uniform_fraction,
    median, precision_recall, ModeKind, BUG_RATIO, DEFAULT_PER_POINT_BINS, DEFAULT_REPETITIONS,
    DEFAULT_REPLICATES,
};
use chordlen::{
    distance_distribution, l1_distance, AnalyticBinning, DistanceMode, Geometry, RandomSeed, Result,
    SphereChordDistribution,
};

use crate::cli::{Experiment, ReproduceArgs};
use crate::manifest::write_text;

const BINS: usize = 200;

pub fn run(args: &ReproduceArgs) -> Result<()> {
    let seed = args.seed;
    let table = match args.experiment {
        Experiment::FaultyGen => faulty_gen(if args.full { 1000 } else { 21 }, seed)?,
        Experiment::CapMixture => {
            if args.full {
                cap_mixture(&(4..=12).collect::<Vec<_>>(), 100, None, seed)?
            } else {
                cap_mixture(&[6], 10, Some(DEFAULT_REPETITIONS), seed)?
            }
        }
        Experiment::Embedded => {
            if args.full {
                let pairs: Vec<(usize, usize)> =
                    (2..=11).flat_map(|nu| ((nu + 1)..=12).map(move |n| (nu, n))).collect();
                embedded(&pairs, 5000, 100, seed)?
            } else {
                embedded(&[(2, 3), (2, 6), (5, 6), (8, 9)], 2000, 10, seed)?
            }
        }
    };
    write_text(args.out.as_deref(), &table)
}

/// N=2, M=10^4 cube projection: median L1 over `runs`, the 1% threshold,
/// the subset bounds, and the ratio against half-size sets.
fn faulty_gen(runs: u64, seed: u64) -> Result<String> {
    let (n, m) = (2, 10_000);
    let law = SphereChordDistribution::new(n, 1.0)?;
    let binning = AnalyticBinning::new(&law, BINS)?;
    let median_l1 = |size: usize, stream: u64| -> Result<f64> {
        let mut scores = Vec::with_capacity(runs as usize);
        for run in 0..runs {
            let set = sample_faulty_cube_projection(n, 1.0, size, RandomSeed::with_stream(seed, stream).derive(run))?;
            scores.push(binning.l1(&distance_distribution(&set, &DistanceMode::AllPairs, BINS)?)?);
        }
        Ok(median(&scores))
    };
    let mut out = String::from("m,runs,median_l1,threshold,max_uniform_fraction,non_uniform_lower_bound,half_size_ratio,verdict\n");
    let mut previous: Option<f64> = None;
    for (stream, size) in [(1, m / 2), (2, m)] {
        let l1 = median_l1(size, stream)?;
        let cal = calibrate_threshold(
            n,
            1.0,
            Geometry::Sphere,
            size,
            ModeKind::AllPairs,
            BINS,
            DEFAULT_REPLICATES,
            1.0,
            RandomSeed::with_stream(seed, 10 + stream),
        )?;
        let threshold = cal.threshold();
        let (ratio, verdict) = match previous {
            Some(half) if half / l1 < BUG_RATIO => (format!("{:.4}", half / l1), "bug-detected"),
            Some(half) => (format!("{:.4}", half / l1), "consistent"),
            None => (String::new(), if l1 > threshold { "non-uniform" } else { "uniform-compatible" }),
        };
        let _ = writeln!(
            out,
            "{size},{runs},{l1:.6},{threshold:.6},{:.6},{},{ratio},{verdict}",
            max_uniform_fraction(l1)?,
            size - max_uniform_count(size, l1)?
        );
        previous = Some(l1);
    }
    Ok(out)
}

/// 2000 uniform background points plus informational points inside a 5% cap
/// making up X% of the total; the rejected set is scored against cap membership.
/// `repetitions = None` casts about 10^6 votes per iteration.
fn cap_mixture(dims: &[usize], iterations: u64, repetitions: Option<usize>, seed: u64) -> Result<String> {
    let background = 2000.0;
    let mut out = String::from("n,x_percent,m_total,iterations,repetitions,precision,recall\n");
    for &n in dims {
        let law = SphereChordDistribution::new(n, 1.0)?;
        for x in [10u64, 15, 20] {
            let share = x as f64 / 100.0;
            let m_total = (background / (1.0 - share)).round() as usize;
            let (mut p_sum, mut r_sum, mut reps_used) = (0.0, 0.0, 0);
            for it in 0..iterations {
                let base = RandomSeed::with_stream(seed, (n as u64) * 1000 + x).derive(it);
                let mix = sample_cap_mixture(n, 1.0, m_total, 0.05, share, base.derive(0))?;
                let hist = distance_distribution(&mix.points, &DistanceMode::AllPairs, BINS)?;
                let l1 = l1_distance(&hist, &law)?;
                let target = max_uniform_count(m_total, l1)?;
                let reps = repetitions.unwrap_or_else(|| 1_000_000usize.div_ceil(target.max(1)));
                let ext = extract_with_target(&mix.points, target, l1, reps, base.derive(1))?;
                let (p, r) = precision_recall(&ext.rejected, &mix.in_cap_indices());
                p_sum += p;
                r_sum += r;
                reps_used = reps;
            }
            let k = iterations as f64;
            let _ = writeln!(
                out,
                "{n},{x},{m_total},{iterations},{reps_used},{:.4},{:.4}",
                p_sum / k,
                r_sum / k
            );
        }
    }
    Ok(out)
}

/// Half of `m` points from an embedded N_u-sphere; mean detection rate
/// against the random-guess baseline 0.5.
fn embedded(pairs: &[(usize, usize)], m: usize, simulations: u64, seed: u64) -> Result<String> {
    let m_sub = m / 2;
    let mut out = String::from("n_sub,n,superset,m,ratio,simulations,detection_rate,baseline\n");
    for &(n_sub, n) in pairs {
        for superset in [Geometry::Sphere, Geometry::Hemisphere] {
            let stream = (n_sub * 100 + n) as u64 * 2 + (superset == Geometry::Hemisphere) as u64;
            let mut total = 0.0;
            for sim in 0..simulations {
                let set = sample_embedded_uniform(
                    n_sub,
                    n,
                    1.0,
                    m_sub,
                    m,
                    superset,
                    RandomSeed::with_stream(seed, stream).derive(sim),
                )?;
                let found = detect_embedded_subset(&set, n_sub, m_sub, DEFAULT_PER_POINT_BINS)?;
                total += found.detection_rate.unwrap_or(0.0);
            }
            let ratio = m_sub as f64 / m as f64;
            let _ = writeln!(
                out,
                "{n_sub},{n},{superset},{m},{ratio},{simulations},{:.4},{ratio}",
                total / simulations as f64
            );
        }
    }
    Ok(out)
}
