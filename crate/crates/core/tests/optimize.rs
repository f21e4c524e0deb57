use markopt::exact::{brute_force_optimum, BRUTE_FORCE_CAP};
use markopt::optimize::*;
use markopt::sample::{
    build_tree_ball, sample_balanced_colored, sample_poisson_configuration, sample_wr_line, BaseSampler, RealDist,
};
use markopt::*;
use proptest::prelude::*;

fn unset(c: &Configuration) -> Configuration {
    c.with_marks(&vec![OptMark::Unset; c.len()])
}

fn hardcore_config(seed: u64, max_n: usize) -> Configuration {
    let base = BaseSampler::GrainRadius {
        radius: RealDist::uniform(0.2, 1.0),
    };
    let w = Window::periodic_cube(1, 6.0).unwrap();
    let mut c = sample_poisson_configuration(&w, 1.0, &base, RngSeed::new(seed), "hc").unwrap();
    c.points.truncate(max_n);
    c
}

fn caching_config(seed: u64, max_n: usize) -> Configuration {
    let w = Window::periodic_cube(1, 5.0).unwrap();
    let base = BaseSampler::GrainRadius {
        radius: RealDist::uniform(0.3, 1.2),
    };
    let mut c = sample_poisson_configuration(&w, 1.0, &base, RngSeed::new(seed), "caching").unwrap();
    c.points.truncate(max_n);
    c
}

fn weights() -> BaseSampler {
    BaseSampler::WeightPair {
        plus: RealDist::uniform(0.0, 1.0),
        minus: RealDist::uniform(0.0, 1.0),
    }
}

/// Exhaustive search with `k_max = n` from the default start must reach the
/// brute-force optimum value exactly.
fn check_oracle_agreement(c: &Configuration, m: &ScoreModel) {
    let (out, trace) = local_search(&unset(c), m, &SearchParams::exhaustive(c.len().max(1))).unwrap();
    assert!(trace.certificate.is_certified());
    let zero_start = brute_force_optimum(&out, m, BRUTE_FORCE_CAP).unwrap();
    assert_eq!(total_window_score(&out, m).unwrap(), zero_start.value, "{}", m.id());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn oracle_agreement_hardcore(seed in 0u64..10_000, n in 1usize..=8) {
        check_oracle_agreement(&hardcore_config(seed, n), &ScoreModel::HardcoreThinning);
    }

    #[test]
    fn oracle_agreement_wr_line(seed in 0u64..10_000, n in 1usize..=8) {
        let c = sample_wr_line(n, &weights(), RngSeed::new(seed), "wr").unwrap();
        check_oracle_agreement(&c, &ScoreModel::WidomRowlinsonLine);
    }

    #[test]
    fn oracle_agreement_caching(seed in 0u64..10_000, n in 1usize..=4) {
        let m = ScoreModel::caching(vec![0.4, 0.3, 0.2, 0.1], 2);
        check_oracle_agreement(&caching_config(seed, n), &m);
    }
}

#[test]
fn oracle_agreement_tree_and_matching() {
    for seed in 0..5 {
        let c = build_tree_ball(1, &weights(), RngSeed::new(seed), "wr_tree").unwrap();
        check_oracle_agreement(&c, &ScoreModel::WidomRowlinsonTree);
        let w = Window::periodic_cube(2, 4.0).unwrap();
        let c = sample_balanced_colored(&w, 2, RngSeed::new(seed), "matching").unwrap();
        check_oracle_agreement(&c, &ScoreModel::Matching);
    }
}

#[test]
fn wr_ten_sites_reach_brute_force() {
    let m = ScoreModel::WidomRowlinsonLine;
    let c = sample_wr_line(10, &weights(), RngSeed::new(77), "wr").unwrap();
    let (out, _) = local_search(&unset(&c), &m, &SearchParams::exhaustive(10)).unwrap();
    let b = brute_force_optimum(&out, &m, BRUTE_FORCE_CAP).unwrap();
    assert_eq!(total_window_score(&out, &m).unwrap(), b.value);
    assert_eq!(out.marks(), b.marks);
}

#[test]
fn search_examples() {
    let m = ScoreModel::WidomRowlinsonLine;
    let c = sample_wr_line(6, &weights(), RngSeed::new(3), "wr").unwrap();
    let zeros = c.with_marks(&vec![OptMark::Sign3(Sign3::Zero); 6]);
    let (swap, delta) = find_valid_swap(&zeros, &m, &SearchParams::exhaustive(1)).unwrap().unwrap();
    assert_eq!(swap.changes.len(), 1);
    let best = zeros
        .points
        .iter()
        .map(|p| match p.base {
            BaseMark::WeightPair { plus, minus } => plus.max(minus),
            _ => unreachable!(),
        })
        .fold(0.0, f64::max);
    assert_eq!(delta, ScoreDelta::Finite(best));

    let p = SearchParams::randomized(2, 0, 10, 1);
    assert!(find_valid_swap(&zeros, &m, &p).unwrap().is_none());

    // a brute-force optimum is returned unchanged
    let b = brute_force_optimum(&zeros, &m, BRUTE_FORCE_CAP).unwrap();
    let opt = zeros.with_marks(&b.marks);
    assert!(find_valid_swap(&opt, &m, &SearchParams::exhaustive(6)).unwrap().is_none());
    let (out, trace) = local_search(&opt, &m, &SearchParams::exhaustive(6)).unwrap();
    assert_eq!(out.marks(), opt.marks());
    assert!(trace.records.is_empty());
}

#[test]
fn trace_totals_increase_and_post_hoc_fixed_point() {
    let m = ScoreModel::HardcoreThinning;
    for seed in 0..10 {
        let c = hardcore_config(seed, 20);
        let start = c.with_marks(&vec![OptMark::Retain(true); c.len()]);
        let (out, trace) = local_search(&start, &m, &SearchParams::exhaustive(2)).unwrap();
        let mut prev = trace.initial_total;
        for r in &trace.records {
            if let (ExtendedScore::Finite(a), ExtendedScore::Finite(b)) = (prev, r.total) {
                assert!(b > a);
            }
            assert!(r.delta.improves(0.0));
            prev = r.total;
        }
        assert_eq!(trace.final_total(), total_window_score(&out, &m).unwrap());
        assert!(total_window_score(&out, &m).unwrap().is_finite());
        // independent re-check over all swaps of size ≤ 2
        let n = out.len();
        for i in 0..n {
            for j in i..n {
                let mut changes = vec![(i, OptMark::Retain(out.points[i].opt != OptMark::Retain(true)))];
                if j > i {
                    changes.push((j, OptMark::Retain(out.points[j].opt != OptMark::Retain(true))));
                }
                let s = SwapProposal::new(&out, changes).unwrap();
                assert!(!score_difference(&out, &s, &m).unwrap().improves(0.0));
            }
        }
    }
}

#[test]
fn randomized_search_is_labelled_and_deterministic() {
    let m = ScoreModel::Lilypond;
    let w = Window::periodic_cube(2, 5.0).unwrap();
    let c = sample_poisson_configuration(&w, 1.0, &BaseSampler::None, RngSeed::new(4), "lilypond").unwrap();
    let start = c.with_marks(&vec![OptMark::Radius(0.0); c.len()]);
    let p = SearchParams::randomized(1, 200, 300, 9);
    let (a, ta) = local_search(&start, &m, &p).unwrap();
    let (b, tb) = local_search(&start, &m, &p).unwrap();
    assert_eq!(a.marks(), b.marks());
    assert_eq!(ta.certificate, tb.certificate);
    assert!(!ta.certificate.is_certified());
    assert_eq!(ta.certificate.label(), "uncertified");
    assert!(ta.final_total().to_f64() >= ta.initial_total.to_f64());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn antisymmetry_of_differences(seed in 0u64..10_000, i in 0usize..12, j in 0usize..12, ai in 0usize..2, aj in 0usize..2) {
        let m = ScoreModel::WidomRowlinsonLine;
        let c = sample_wr_line(12, &weights(), RngSeed::new(seed), "wr").unwrap();
        let zeros = c.with_marks(&vec![OptMark::Sign3(Sign3::Zero); 12]);
        let alt = [Sign3::Plus, Sign3::Minus];
        let mut changes = vec![(i, OptMark::Sign3(alt[ai]))];
        if j != i {
            changes.push((j, OptMark::Sign3(alt[aj])));
        }
        let swap = SwapProposal::new(&zeros, changes).unwrap();
        let d = score_difference(&zeros, &swap, &m).unwrap();
        let after = apply_swaps(&zeros, std::slice::from_ref(&swap)).unwrap();
        let back = score_difference(&after, &swap.inverse(&zeros), &m).unwrap();
        match d {
            ScoreDelta::Finite(x) => prop_assert!((x + back.to_f64()).abs() < 1e-12),
            // a conflict created by the swap
            ScoreDelta::NegInfinity => prop_assert_eq!(back, ScoreDelta::PosInfinity),
            ScoreDelta::PosInfinity => prop_assert!(false, "no repair is possible from an admissible start"),
        }
        let total_gap = total_window_score(&after, &m).unwrap().to_f64() - total_window_score(&zeros, &m).unwrap().to_f64();
        if let ScoreDelta::Finite(x) = d {
            prop_assert!((total_gap - x).abs() < 1e-12);
        }
    }
}

#[test]
fn influence_domain_examples() {
    let m = ScoreModel::HardcoreThinning;
    let w = Window::periodic_cube(2, 20.0).unwrap();
    let grain = |x: f64, y: f64| MarkedPoint::at(vec![x, y], BaseMark::GrainRadius(1.0)).with_opt(OptMark::Retain(true));
    let c = Configuration::new(w.clone(), "hc", vec![grain(2.0, 2.0), grain(10.0, 10.0), grain(11.0, 10.0)]).unwrap();
    let lone = SwapProposal::new(&c, vec![(0, OptMark::Retain(false))]).unwrap();
    let d = influence_domain(&c, &m, &lone, 1e-3).unwrap();
    assert_eq!(d.regions, vec![Region::Cube { center: vec![2.0, 2.0], side: 0.0 }]);
    let pair = SwapProposal::new(&c, vec![(1, OptMark::Retain(false))]).unwrap();
    let d1 = influence_domain(&c, &m, &pair, 1e-3).unwrap();
    assert!(!d.intersects(&d1, &w));
    assert!(d1.contains(&c, 2));

    let domains = vec![d.clone(), d1.clone()];
    assert_eq!(matern_compatible_subset(&w, &domains, &[0.5, 0.2]).unwrap(), vec![0, 1]);
    assert_eq!(matern_compatible_subset(&w, &[d1.clone(), d1.clone(), d1.clone()], &[0.3, 0.1, 0.2]).unwrap(), vec![1]);
    assert!(matches!(
        influence_domain(
            &sample_balanced_colored(&w, 1, RngSeed::new(0), "m").unwrap().with_marks(&[OptMark::Partner(1), OptMark::Partner(0)]),
            &ScoreModel::Matching,
            &SwapProposal::new(
                &sample_balanced_colored(&w, 1, RngSeed::new(0), "m").unwrap().with_marks(&[OptMark::Partner(1), OptMark::Partner(0)]),
                vec![(0, OptMark::Partner(0))]
            )
            .unwrap(),
            1e-3
        ),
        Err(Error::Unsupported(_))
    ));
}

#[test]
fn matern_chain_keeps_both_ends() {
    let w = Window::integer_line(20).unwrap();
    let ball = |v: usize| InfluenceDomain {
        regions: vec![Region::GraphBall { vertex: v, radius: 1 }],
    };
    // A–B and B–C meet, A and C do not
    let domains = vec![ball(2), ball(4), ball(6)];
    assert_eq!(matern_compatible_subset(&w, &domains, &[0.1, 0.2, 0.3]).unwrap(), vec![0, 2]);
}

#[test]
fn aloha_domains_grow_as_epsilon_shrinks() {
    let m = ScoreModel::AlohaMac { beta: 4.0 };
    let w = Window::periodic_cube(2, 10.0).unwrap();
    let c = sample_poisson_configuration(&w, 1.0, &BaseSampler::ReceiverOffset, RngSeed::new(2), "aloha").unwrap();
    let c = c.with_marks(&vec![OptMark::AccessProb(0.5); c.len()]);
    let swap = SwapProposal::new(&c, vec![(0, OptMark::AccessProb(0.25))]).unwrap();
    let mut prev = -1.0;
    for eps in [1e-1, 1e-2, 1e-3, 1e-4, 1e-5] {
        let d = influence_domain(&c, &m, &swap, eps).unwrap();
        let side = match &d.regions[0] {
            Region::Cube { side, .. } => *side,
            _ => unreachable!(),
        };
        assert!(side >= prev);
        prev = side;
    }
}

#[test]
fn compatible_swaps_apply_in_parallel() {
    // swaps with disjoint once-iterated domains change disjoint score sets,
    // so their differences add up
    let m = ScoreModel::HardcoreThinning;
    let w = Window::periodic_cube(1, 40.0).unwrap();
    let base = BaseSampler::GrainRadius {
        radius: RealDist::uniform(0.2, 0.8),
    };
    let c = sample_poisson_configuration(&w, 1.0, &base, RngSeed::new(8), "hc").unwrap();
    let c = c.with_marks(&vec![OptMark::Retain(true); c.len()]);
    let swaps: Vec<SwapProposal> = (0..c.len())
        .map(|i| SwapProposal::new(&c, vec![(i, OptMark::Retain(false))]).unwrap())
        .collect();
    let priorities: Vec<f64> = (0..swaps.len()).map(|i| ((i * 7919) % 101) as f64).collect();
    let kept = matern_select(&c, &m, &swaps, &priorities, 1e-3, true).unwrap();
    assert!(!kept.is_empty());
    let chosen: Vec<SwapProposal> = kept.iter().map(|&k| swaps[k].clone()).collect();
    let after = apply_swaps(&c, &chosen).unwrap();
    let joint = total_window_score(&after, &m).unwrap().to_f64() - total_window_score(&c, &m).unwrap().to_f64();
    let parts: f64 = chosen.iter().map(|s| score_difference(&c, s, &m).unwrap().to_f64()).sum();
    if joint.is_finite() && parts.is_finite() {
        assert!((joint - parts).abs() < 1e-9);
    }
}

#[test]
fn wr_conflicting_swaps_are_never_accepted() {
    let m = ScoreModel::WidomRowlinsonTree;
    let c = build_tree_ball(2, &weights(), RngSeed::new(1), "wr_tree").unwrap();
    let (out, trace) = local_search(&unset(&c), &m, &SearchParams::exhaustive(2)).unwrap();
    assert!(total_window_score(&out, &m).unwrap().is_finite());
    assert!(trace.records.iter().all(|r| r.delta != ScoreDelta::NegInfinity));
}
