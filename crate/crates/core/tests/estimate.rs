use markopt::estimate::*;
use markopt::optimize::SearchParams;
use markopt::sample::{sample_poisson_configuration, BaseSampler, PointProcess, RealDist};
use markopt::*;
use rand::Rng;

fn grains(lo: f64, hi: f64) -> BaseSampler {
    BaseSampler::GrainRadius {
        radius: RealDist::uniform(lo, hi),
    }
}

fn hardcore_sample(d: usize, side: f64, lambda: f64, radius: (f64, f64), seed: u64) -> Configuration {
    let w = Window::periodic_cube(d, side).unwrap();
    sample_poisson_configuration(&w, lambda, &grains(radius.0, radius.1), RngSeed::new(seed), "hc").unwrap()
}

#[test]
fn zero_policy_scores_zero() {
    let w = Window::periodic_cube(1, 20.0).unwrap();
    let process = PointProcess::Poisson {
        intensity: 1.0,
        base: grains(0.1, 0.5),
    };
    let e = intensity_estimate(
        &Policy::Constant {
            mark: OptMark::Retain(false),
        },
        &ScoreModel::HardcoreThinning,
        &w,
        &process,
        50,
        RngSeed::new(1),
    )
    .unwrap();
    assert_eq!(e.mean, 0.0);
    assert_eq!(e.stderr, 0.0);
    assert_eq!(e.inadmissible_fraction, 0.0);
    assert_eq!(e.ci95, (0.0, 0.0));
}

#[test]
fn sparse_all_retain_matches_campbell() {
    // tiny grains at low intensity almost never overlap
    let w = Window::periodic_cube(1, 50.0).unwrap();
    let process = PointProcess::Poisson {
        intensity: 0.2,
        base: grains(0.001, 0.003),
    };
    let e = intensity_estimate(&Policy::AllRetain, &ScoreModel::HardcoreThinning, &w, &process, 2000, RngSeed::new(7))
        .unwrap();
    let expected = 0.2 * 2.0 * 0.002;
    assert!(e.inadmissible_fraction < 0.01);
    assert!((e.mean - expected).abs() < 4.0 * e.stderr, "{} vs {expected} ± {}", e.mean, e.stderr);
    assert!(e.palm_gap < 1e-12);
    assert!((e.ci95.1 - e.mean - 1.96 * e.stderr).abs() < 1e-15);
}

#[test]
fn stderr_scales_with_replicates() {
    let w = Window::periodic_cube(1, 5.0).unwrap();
    let process = PointProcess::Poisson {
        intensity: 1.0,
        base: grains(0.05, 0.1),
    };
    let policy = Policy::Neutral;
    let m = ScoreModel::HardcoreThinning;
    let small = intensity_estimate(&policy, &m, &w, &process, 100, RngSeed::new(3)).unwrap();
    assert_eq!(small.mean, 0.0);
    let policy = Policy::RandomIid { p: 0.5 };
    let small = intensity_estimate(&policy, &m, &w, &process, 100, RngSeed::new(3)).unwrap();
    let large = intensity_estimate(&policy, &m, &w, &process, 10_000, RngSeed::new(4)).unwrap();
    let ratio = small.stderr / large.stderr;
    assert!((5.0..=20.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn local_search_dominates_all_retain_and_neutral() {
    let w = Window::periodic_cube(1, 10.0).unwrap();
    let process = PointProcess::Poisson {
        intensity: 1.0,
        base: grains(0.2, 0.8),
    };
    let m = ScoreModel::HardcoreThinning;
    let seed = RngSeed::new(11);
    let ls = Policy::LocalSearch {
        search: SearchParams::exhaustive(2),
    };
    let a = intensity_estimate(&ls, &m, &w, &process, 100, seed).unwrap();
    let b = intensity_estimate(&Policy::AllRetain, &m, &w, &process, 100, seed).unwrap();
    let z = intensity_estimate(&Policy::Neutral, &m, &w, &process, 100, seed).unwrap();
    assert_eq!(a.inadmissible_fraction, 0.0);
    assert!(b.inadmissible_fraction > 0.0);
    assert!(a.mean >= z.mean);
    // the paired comparison on the replicates that all-retain keeps admissible
    for r in 0..100 {
        let (_, x) = run_replicate(&ls, &m, &w, &process, seed, r).unwrap();
        let (_, y) = run_replicate(&Policy::AllRetain, &m, &w, &process, seed, r).unwrap();
        assert_eq!(x.n_points, y.n_points);
        if let ExtendedScore::Finite(t) = y.total {
            assert!(x.total.to_f64() >= t - 1e-12);
        }
    }
}

#[test]
fn replicates_do_not_depend_on_thread_count() {
    let w = Window::periodic_cube(2, 6.0).unwrap();
    let process = PointProcess::Poisson {
        intensity: 1.0,
        base: grains(0.2, 0.6),
    };
    let m = ScoreModel::HardcoreThinning;
    let policy = Policy::LocalSearch {
        search: SearchParams::exhaustive(1),
    };
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| intensity_estimate(&policy, &m, &w, &process, 40, RngSeed::new(5)).unwrap())
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn hardcore_radius_bounds_and_locality() {
    let m = ScoreModel::HardcoreThinning;
    let r_max = 0.8;
    for seed in 0..30 {
        let c = hardcore_sample(2, 8.0, 1.0, (0.2, r_max), seed);
        let n = c.len();
        let marks = c.with_marks(&vec![OptMark::Retain(true); n]);
        let mut rng = RngSeed::new(seed).child(9).rng();
        for i in 0..n {
            let r = hardcore_stab_radius(&c, i).unwrap();
            assert!(r <= 4.0 * r_max + 1e-12);
            // flipping marks outside Q_r(X_i) never changes the score of i
            let before = score_at(&marks, i, &m).unwrap();
            let side = 8.0;
            let mut changed = marks.clone();
            for j in 0..n {
                if markopt::window::torus_sup_dist(side, c.coords(i), c.coords(j)) > r / 2.0 && rng.random::<bool>() {
                    changed.points[j].opt = OptMark::Retain(false);
                }
            }
            assert_eq!(score_at(&changed, i, &m).unwrap(), before);
        }
    }
    // an isolated grain
    let w = Window::periodic_cube(1, 10.0).unwrap();
    let pts = vec![
        MarkedPoint::at(vec![1.0], BaseMark::GrainRadius(0.5)),
        MarkedPoint::at(vec![6.0], BaseMark::GrainRadius(0.5)),
    ];
    let c = Configuration::new(w, "hc", pts).unwrap();
    assert_eq!(hardcore_stab_radius(&c, 0).unwrap(), 0.0);
}

#[test]
fn mecke_slivnyak_bound_dominates() {
    let (lambda, side) = (0.5, 20.0);
    let radius = RealDist::uniform(0.2, 1.0);
    let mut radii = Vec::new();
    for seed in 0..40 {
        let c = hardcore_sample(2, side, lambda, (0.2, 1.0), seed);
        for i in 0..c.len() {
            radii.push(hardcore_stab_radius(&c, i).unwrap());
        }
    }
    let s = StabilizationSample::new(radii, 2, 2.0).unwrap();
    let n = s.radii.len() as f64;
    for k in 0..10 {
        let r = 0.4 * k as f64;
        let p = s.ccdf(r);
        let sigma = (p * (1.0 - p) / n).sqrt();
        let bound = mecke_slivnyak_bound(2, lambda, &radius, r).unwrap();
        assert!(p <= bound + 3.0 * sigma, "r = {r}: {p} > {bound}");
    }
}

fn aloha_sample(side: f64, seed: u64) -> Configuration {
    let w = Window::periodic_cube(2, side).unwrap();
    sample_poisson_configuration(&w, 1.0, &BaseSampler::ReceiverOffset, RngSeed::new(seed), "aloha").unwrap()
}

#[test]
fn aloha_radii_monotone_and_truncation_error() {
    let beta = 4.0;
    let m = ScoreModel::AlohaMac { beta };
    assert!(aloha_stab_radii(&aloha_sample(5.0, 0), 0, 0.0, beta).is_err());
    let mut points = 0;
    let mut seed = 0;
    while points < 1000 {
        let c = aloha_sample(10.0, seed);
        seed += 1;
        let side = 10.0;
        let mut rng = RngSeed::new(seed).child(3).rng();
        let probs: Vec<OptMark> = (0..c.len()).map(|_| OptMark::AccessProb(1.0 - rng.random::<f64>())).collect();
        let marked = c.with_marks(&probs);
        let s = Scorer::prepared(&m, &marked).unwrap();
        for i in 0..c.len() {
            let mut prev = (f64::INFINITY, f64::INFINITY);
            for eps in [1e-4, 1e-3, 1e-2, 1e-1, 1.0] {
                let (a, b) = aloha_stab_radii(&c, i, eps, beta).unwrap();
                assert!(a <= prev.0 && b <= prev.1);
                prev = (a, b);
            }
            let eps = 1e-3;
            let (internal, _) = aloha_stab_radii(&c, i, eps, beta).unwrap();
            // score of i with interference only from transmitters inside Q_R(X_i)
            let full = score_at(&marked, i, &m).unwrap().to_f64();
            let mut truncated = match marked.points[i].opt {
                OptMark::AccessProb(p) => p.ln(),
                _ => unreachable!(),
            };
            for j in 0..c.len() {
                if j == i || markopt::window::torus_sup_dist(side, c.coords(i), c.coords(j)) > internal / 2.0 {
                    continue;
                }
                if let OptMark::AccessProb(p) = marked.points[j].opt {
                    truncated += (-p / (1.0 + s.receiver_dist(j, i).powf(beta))).ln_1p();
                }
            }
            assert!((truncated - full).abs() <= eps + 1e-12, "{truncated} vs {full}");
            points += 1;
        }
    }
    // a tolerance above the whole sum needs no radius
    let c = aloha_sample(5.0, 2);
    assert_eq!(aloha_stab_radii(&c, 0, 1e6, beta).unwrap(), (0.0, 0.0));
}

#[test]
fn campbell_hardcore_exact_in_one_dimension() {
    let m = ScoreModel::HardcoreThinning;
    let mut checked = 0;
    for seed in 0..200 {
        let c = hardcore_sample(1, 20.0, 0.2, (0.05, 0.3), seed);
        let marked = c.with_marks(&vec![OptMark::Retain(true); c.len()]);
        if !markopt::optimize::total_window_score(&marked, &m).unwrap().is_finite() {
            assert!(campbell_identity_check(&marked, &m, 0, RngSeed::new(0)).is_err());
            continue;
        }
        let check = campbell_identity_check(&marked, &m, 0, RngSeed::new(0)).unwrap();
        assert!(check.gap < 1e-12, "{check:?}");
        checked += 1;
    }
    assert!(checked > 20);
    let empty = Configuration::new(Window::periodic_cube(1, 5.0).unwrap(), "hc", vec![]).unwrap();
    let check = campbell_identity_check(&empty, &m, 0, RngSeed::new(0)).unwrap();
    assert_eq!((check.score_per_volume, check.spatial, check.gap), (0.0, 0.0, 0.0));
}

#[test]
fn caching_hit_probability() {
    let m = ScoreModel::caching(vec![0.5, 0.3, 0.2], 2);
    let w = Window::periodic_cube(1, 4.0).unwrap();
    let all = Configuration::new(
        w.clone(),
        "caching",
        vec![MarkedPoint::at(vec![1.0], BaseMark::GrainRadius(3.0)).with_opt(OptMark::ItemSet(vec![1, 2]))],
    )
    .unwrap();
    let e = coverage_hit_probability(&all, &m, 100_000, RngSeed::new(1)).unwrap();
    assert!((e.estimate - 0.8).abs() < 4.0 * e.stderr);
    let none = Configuration::new(w, "caching", vec![]).unwrap();
    assert_eq!(coverage_hit_probability(&none, &m, 1000, RngSeed::new(1)).unwrap().estimate, 0.0);
}

#[test]
fn caching_identity_within_monte_carlo_error() {
    let m = ScoreModel::caching(vec![0.4, 0.3, 0.2, 0.1], 2);
    let w = Window::periodic_cube(2, 5.0).unwrap();
    let c = sample_poisson_configuration(&w, 0.4, &grains(0.5, 1.5), RngSeed::new(2), "caching").unwrap();
    let mut rng = RngSeed::new(3).rng();
    let sets = [vec![1, 2], vec![1, 3], vec![2, 4], vec![3, 4]];
    let marks: Vec<OptMark> = (0..c.len()).map(|_| OptMark::ItemSet(sets[rng.random_range(0..4)].clone())).collect();
    let marked = c.with_marks(&marks);
    let check = campbell_identity_check(&marked, &m, 200_000, RngSeed::new(4)).unwrap();
    // the 2D score integral uses a midpoint grid, whose error adds to the MC error
    assert!(
        (check.score_per_volume - check.spatial).abs() < 3.0 * check.spatial_stderr + 5e-3,
        "{check:?}"
    );
}

#[test]
fn sample_moments_and_ccdf() {
    let s = StabilizationSample::new(vec![2.0, 0.5, 1.0], 2, 2.0).unwrap();
    assert_eq!(s.radii, vec![0.5, 1.0, 2.0]);
    assert!(s.ccdf_points().windows(2).all(|w| w[0].1 >= w[1].1));
    assert_eq!(s.moments.iter().map(|m| m.0).collect::<Vec<_>>(), vec![1.0, 2.0, 4.0]);
    assert!(s.moments.iter().all(|m| m.1.is_finite()));
    assert!(StabilizationSample::new(vec![-1.0], 2, 2.0).is_err());
}
