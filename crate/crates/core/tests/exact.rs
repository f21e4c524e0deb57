use markopt::exact::*;
use markopt::optimize::{local_search_within, total_window_score, SearchParams};
use markopt::sample::{build_tree_ball, sample_poisson_configuration, sample_wr_line, BaseSampler, RealDist};
use markopt::*;
use proptest::prelude::*;
use rand::Rng;

fn wr_line(weights: &[(f64, f64)]) -> Configuration {
    let pts = weights
        .iter()
        .enumerate()
        .map(|(k, &(plus, minus))| {
            MarkedPoint::at_site(k, BaseMark::WeightPair { plus, minus }).with_opt(OptMark::Sign3(Sign3::Zero))
        })
        .collect();
    Configuration::new(Window::integer_line(weights.len()).unwrap(), "wr", pts).unwrap()
}

fn uniform_weights() -> BaseSampler {
    BaseSampler::WeightPair {
        plus: RealDist::uniform(0.0, 1.0),
        minus: RealDist::uniform(0.0, 1.0),
    }
}

fn signs(marks: &[OptMark]) -> Vec<Sign3> {
    marks
        .iter()
        .map(|m| match m {
            OptMark::Sign3(s) => *s,
            other => panic!("not a sign: {other:?}"),
        })
        .collect()
}

#[test]
fn chain_dp_single_site_between_plus() {
    let r = wr_chain_dp(&[(1.0, 5.0)], Sign3::Plus, Sign3::Plus);
    assert_eq!(r.marks, vec![Sign3::Plus]);
    assert_eq!(r.value, 1.0);
    assert_eq!(r.multiplicity, 1);
}

#[test]
fn blocking_interval_example() {
    let w = [(0.0, 1.0), (2.5, 1.0), (2.5, 1.0), (0.0, 1.0)];
    assert_eq!(blocking_intervals(&w), vec![BlockingInterval { lo: 1, hi: 2 }]);
    // one low plus weight breaks the pointwise condition
    let w = [(0.0, 1.0), (2.5, 1.0), (0.5, 1.0), (0.0, 1.0)];
    assert!(blocking_intervals(&w).iter().all(|b| !(b.lo <= 2 && 2 <= b.hi)));
    assert!(blocking_intervals(&[(1.0, 1.0); 6]).is_empty());
    let c = wr_line(&[(0.0, 1.0), (2.5, 1.0), (2.5, 1.0), (0.0, 1.0)]);
    assert_eq!(wr_blocking_intervals(&c).unwrap(), vec![BlockingInterval { lo: 1, hi: 2 }]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn chain_dp_matches_brute_force(
        w in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 1..=12),
        l in 0usize..3,
        r in 0usize..3,
    ) {
        let (left, right) = (Sign3::ALL[l], Sign3::ALL[r]);
        let dp = wr_chain_dp(&w, left, right);
        // brute force on the chain padded with its fixed boundary sites
        let mut padded = vec![(1.0, 1.0)];
        padded.extend_from_slice(&w);
        padded.push((1.0, 1.0));
        let mut c = wr_line(&padded);
        let n = padded.len();
        c.points[0].opt = OptMark::Sign3(left);
        c.points[n - 1].opt = OptMark::Sign3(right);
        let free: Vec<usize> = (1..n - 1).collect();
        let b = brute_force_optimum_over(&c, &ScoreModel::WidomRowlinsonLine, &free, BRUTE_FORCE_CAP).unwrap();
        let inner = signs(&b.marks[1..n - 1]);
        prop_assert_eq!(&dp.marks, &inner);
        prop_assert_eq!(dp.multiplicity, b.multiplicity);
        prop_assert_eq!(dp.multiplicity, 1);
        let expected = dp.value + (if left == Sign3::Zero { 0.0 } else { 1.0 }) + (if right == Sign3::Zero { 0.0 } else { 1.0 });
        prop_assert!((b.value.to_f64() - expected).abs() < 1e-12);
        // value is the window total of the sub-line alone
        let sub = wr_line(&w).with_marks(&dp.marks.iter().map(|&s| OptMark::Sign3(s)).collect::<Vec<_>>());
        prop_assert_eq!(total_window_score(&sub, &ScoreModel::WidomRowlinsonLine).unwrap(), ExtendedScore::Finite(dp.value));
    }
}

#[test]
fn unique_marking_matches_brute_force_on_fourteen_sites() {
    let m = ScoreModel::WidomRowlinsonLine;
    for seed in 0..6 {
        let c = sample_wr_line(14, &uniform_weights(), RngSeed::new(seed), "wr").unwrap();
        let u = wr_unique_marking(&c).unwrap();
        let zeros = c.with_marks(&vec![OptMark::Sign3(Sign3::Zero); 14]);
        let b = brute_force_optimum(&zeros, &m, BRUTE_FORCE_CAP).unwrap();
        let bm = signs(&b.marks);
        for k in 0..14 {
            if u.resolved[k] {
                assert_eq!(u.marks[k], bm[k], "seed {seed} site {k}");
            }
        }
        // the free-boundary window optimum is the brute-force optimum
        assert_eq!(u.marks, bm, "seed {seed}");
        assert_eq!(b.multiplicity, 1);
    }
}

#[test]
fn unique_marking_shields_and_fixed_point() {
    let m = ScoreModel::WidomRowlinsonLine;
    let mut checked = 0;
    for seed in 0..20 {
        let c = sample_wr_line(200, &uniform_weights(), RngSeed::new(100 + seed), "wr").unwrap();
        let u = wr_unique_marking(&c).unwrap();
        assert!(!u.partial);
        assert!(u.unshielded.is_empty(), "every blocking interval carries a plus");
        for b in &u.intervals {
            assert!(u.marks[b.lo..=b.hi].contains(&Sign3::Plus));
        }
        let marked = c.with_marks(&u.marks.iter().map(|&s| OptMark::Sign3(s)).collect::<Vec<_>>());
        for s in u.segments.iter().filter(|s| s.len() <= 8) {
            assert_eq!(s.multiplicity, 1);
            let free: Vec<usize> = (s.lo..=s.hi).collect();
            let (out, trace) = local_search_within(&marked, &m, &SearchParams::exhaustive(free.len()), &free).unwrap();
            assert!(trace.records.is_empty(), "resolved marking is a fixed point");
            assert!(trace.certificate.is_certified());
            assert_eq!(out.marks(), marked.marks());
            checked += 1;
        }
    }
    assert!(checked > 0);
}

#[test]
fn unique_marking_partial_without_shields() {
    let c = wr_line(&[(1.0, 1.0); 5]);
    let u = wr_unique_marking(&c).unwrap();
    assert!(u.partial);
    assert_eq!(u.resolved_count(), 0);
}

#[test]
fn tree_boundary_examples_and_random_subsets() {
    assert_eq!(tree_boundary(3, &[0]).unwrap(), (1, 3));
    assert_eq!(tree_boundary(3, &[0, 1, 2, 3]).unwrap(), (4, 6));
    assert_eq!(tree_boundary(3, &[]).unwrap(), (0, 0));
    assert!(tree_boundary(2, &[5]).is_err());
    let depth = 6;
    let interior: Vec<usize> = (0..markopt::window::tree_vertex_count(depth - 1)).collect();
    let mut rng = RngSeed::new(5).rng();
    for _ in 0..10_000 {
        let k = rng.random_range(1..=12);
        let v: Vec<usize> = (0..k).map(|_| interior[rng.random_range(0..interior.len())]).collect();
        let (nv, nb) = tree_boundary(depth, &v).unwrap();
        assert!(nb >= nv);
    }
}

fn tree_with(depth: usize, seed: u64, sign: Sign3) -> Configuration {
    let base = BaseSampler::WeightPair {
        plus: RealDist::uniform(0.9, 1.1),
        minus: RealDist::uniform(0.9, 1.1),
    };
    let c = build_tree_ball(depth, &base, RngSeed::new(seed), "wr_tree").unwrap();
    let n = c.len();
    c.with_marks(&vec![OptMark::Sign3(sign); n])
}

#[test]
fn constant_tree_markings_are_locally_optimal() {
    for sign in [Sign3::Plus, Sign3::Minus] {
        let c = tree_with(3, 1, sign);
        let v = tree_local_optimality_check(&c, 3).unwrap();
        assert!(v.locally_optimal, "{sign:?}");
        assert_eq!(v.bound_violations, 0);
        assert!(v.subsets_tested > 0 && v.deviations_tested > v.subsets_tested);
    }
}

#[test]
fn planted_root_weight_gives_witness() {
    let mut c = tree_with(3, 2, Sign3::Plus);
    if let BaseMark::WeightPair { minus, .. } = &mut c.points[0].base {
        *minus = 10.0;
    }
    let v = tree_local_optimality_check(&c, 3).unwrap();
    assert!(!v.locally_optimal);
    let w = v.witness.unwrap();
    assert!(w.shape);
    assert!(w.changes.contains(&(0, Sign3::Minus)));
    assert!(w.delta.to_f64() > 10.0 - 1.1 * 4.0);
}

#[test]
fn tree_check_refuses_large_work() {
    let c = tree_with(3, 0, Sign3::Plus);
    assert!(matches!(tree_local_optimality_check(&c, 5), Err(Error::WorkCap { .. })));
}

fn poisson(d: usize, side: f64, base: BaseSampler, seed: u64, id: &str) -> Configuration {
    sample_poisson_configuration(&Window::periodic_cube(d, side).unwrap(), 1.0, &base, RngSeed::new(seed), id).unwrap()
}

#[test]
fn lilypond_small_examples() {
    let line = |xs: &[f64]| {
        let pts = xs.iter().map(|&x| MarkedPoint::at(vec![x], BaseMark::None)).collect();
        Configuration::new(Window::periodic_cube(1, 100.0).unwrap(), "lilypond", pts).unwrap()
    };
    let s = lilypond_solve(&line(&[10.0, 13.0])).unwrap();
    assert_eq!(s.radii, vec![1.5, 1.5]);
    let s = lilypond_solve(&line(&[0.0, 1.0, 3.0])).unwrap();
    assert_eq!(s.radii, vec![0.5, 0.5, 1.5]);
    let marked = s.marked(&line(&[0.0, 1.0, 3.0]));
    for i in 0..3 {
        assert_eq!(score_at(&marked, i, &ScoreModel::Lilypond).unwrap(), ExtendedScore::ZERO);
    }
}

#[test]
fn lilypond_event_driven_matches_fixed_point() {
    for (seed, side) in [(1u64, 8.0), (2, 10.0), (3, 13.0)] {
        let c = poisson(2, side, BaseSampler::None, seed, "lilypond");
        assert!(c.len() >= 2 && c.len() <= 200);
        let s = lilypond_solve(&c).unwrap();
        assert!(s.residual < 1e-9);
        let (r, _) = lilypond_fixed_point(&c, 1e-14, 100_000).unwrap();
        for (a, b) in s.radii.iter().zip(&r) {
            assert!((a - b).abs() < 1e-9, "seed {seed}: {a} vs {b}");
        }
        let marked = s.marked(&c);
        let m = ScoreModel::Lilypond;
        for i in 0..c.len() {
            assert!(score_at(&marked, i, &m).unwrap().to_f64().abs() < 1e-9);
        }
    }
}

#[test]
fn aloha_examples() {
    let beta = 4.0;
    let w = Window::periodic_cube(2, 10.0).unwrap();
    let lone = Configuration::new(
        w.clone(),
        "aloha",
        vec![MarkedPoint::at(vec![5.0, 5.0], BaseMark::ReceiverOffset(vec![1.0, 0.0]))],
    )
    .unwrap();
    let out = aloha_optimal_marking(&lone, beta, 1e-12).unwrap();
    assert_eq!(out.points[0].opt, OptMark::AccessProb(1.0));
    // mirror-symmetric pair
    let pair = Configuration::new(
        w,
        "aloha",
        vec![
            MarkedPoint::at(vec![4.0, 5.0], BaseMark::ReceiverOffset(vec![1.0, 0.0])),
            MarkedPoint::at(vec![6.0, 5.0], BaseMark::ReceiverOffset(vec![-1.0, 0.0])),
        ],
    )
    .unwrap();
    let out = aloha_optimal_marking(&pair, beta, 1e-12).unwrap();
    assert_eq!(out.points[0].opt, out.points[1].opt);
}

#[test]
fn aloha_beats_constant_access() {
    let beta = 4.0;
    let m = ScoreModel::AlohaMac { beta };
    for seed in 0..5 {
        let c = poisson(2, 6.0, BaseSampler::ReceiverOffset, seed, "aloha");
        let opt = aloha_optimal_marking(&c, beta, 1e-12).unwrap();
        let best = total_window_score(&opt, &m).unwrap().to_f64();
        for k in 1..=20 {
            let p = 0.05 * k as f64;
            let constant = c.with_marks(&vec![OptMark::AccessProb(p); c.len()]);
            let t = total_window_score(&constant, &m).unwrap().to_f64();
            assert!(best >= t - 1e-9, "seed {seed}, p = {p}: {best} < {t}");
        }
    }
}

#[test]
fn matching_examples() {
    let m = ScoreModel::Matching;
    let pts = vec![
        MarkedPoint::at(vec![1.0], BaseMark::Color(Color::Blue)),
        MarkedPoint::at(vec![3.5], BaseMark::Color(Color::Red)),
    ];
    let c = Configuration::new(Window::periodic_cube(1, 10.0).unwrap(), "matching", pts).unwrap();
    let s = matching_optimum(&c).unwrap();
    assert_eq!(s.marked.marks(), vec![OptMark::Partner(1), OptMark::Partner(0)]);
    assert_eq!(score_at(&s.marked, 0, &m).unwrap(), ExtendedScore::Finite(-2.5));
    let many = markopt::sample::sample_balanced_colored(&Window::periodic_cube(2, 5.0).unwrap(), 10, RngSeed::new(1), "m")
        .unwrap();
    assert!(matches!(matching_optimum(&many), Err(Error::WorkCap { .. })));
}

#[test]
fn oracle_dispatch() {
    assert!(check_oracle("lilypond_solve", &ScoreModel::Lilypond).is_ok());
    assert!(check_oracle("lilypond_solve", &ScoreModel::Matching).is_err());
    assert!(check_oracle("nope", &ScoreModel::Matching).is_err());
    assert!(check_oracle("brute_force", &ScoreModel::AlohaMac { beta: 4.0 }).is_err());
    let c = sample_wr_line(30, &uniform_weights(), RngSeed::new(3), "wr").unwrap();
    let out = apply_oracle("wr_unique_marking", &c, &ScoreModel::WidomRowlinsonLine).unwrap();
    assert!(total_window_score(&out, &ScoreModel::WidomRowlinsonLine).unwrap().is_finite());
}
