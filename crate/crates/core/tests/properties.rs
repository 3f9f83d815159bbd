mod common;

use common::{brute_force, random_bay};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crp_core::astar::{gap_curve, solve, SolverConfig};
use crp_core::bay::{relocation_count, Bay, InstanceSpec, MoveEvent};
use crp_core::bounds::{s0, s_p, LookAhead};
use crp_core::heuristics::{
    h_relocations, heuristic_h, myopic_heuristic, nearest_relocation, tree_heuristic, BranchWidth,
};
use crp_core::stochastic::{asa_star, AsaConfig, Sampling, TwoStageInstance};

fn bay_strategy(tiers: usize, columns: usize, max_n: usize) -> impl Strategy<Value = Bay> {
    (1..=max_n, any::<u64>()).prop_map(move |(n, seed)| {
        random_bay(tiers, columns, n, &mut ChaCha8Rng::seed_from_u64(seed))
    })
}

/// Random legal relocation path from `bay`, returning each state (after
/// retrieving exposed targets) with its level.
fn random_path(bay: &Bay, seed: u64) -> Vec<(u32, Bay)> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = bay.clone();
    state.pop_retrievable();
    let mut out = vec![(0, state.clone())];
    let mut level = 0;
    while let Ok(moves) = state.legal_relocations() {
        if moves.is_empty() {
            break;
        }
        let m = moves[rng.gen_range(0..moves.len())];
        state.apply_move_in_place(&m).unwrap();
        state.pop_retrievable();
        level += 1;
        out.push((level, state.clone()));
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn look_ahead_is_monotone_in_depth(bay in bay_strategy(4, 5, 16)) {
        let mut prev = s0(&bay);
        for p in 1..=17 {
            let v = s_p(&bay, LookAhead(p));
            prop_assert!(v >= prev);
            prev = v;
        }
        prop_assert_eq!(prev, s_p(&bay, LookAhead::FULL));
    }

    #[test]
    fn look_ahead_saturates_after_n_minus_c(bay in bay_strategy(4, 4, 12)) {
        let n = bay.len();
        let c = bay.columns();
        let depth = n.saturating_sub(c);
        prop_assert_eq!(s_p(&bay, LookAhead(depth)), s_p(&bay, LookAhead::FULL));
    }

    #[test]
    fn cumulative_bounds_never_decrease_on_a_path(bay in bay_strategy(4, 4, 13), seed in any::<u64>()) {
        let path = random_path(&bay, seed);
        for p in [0, 1, 2, 5, usize::MAX] {
            for w in path.windows(2) {
                let a = w[0].0 + s_p(&w[0].1, LookAhead(p));
                let b = w[1].0 + s_p(&w[1].1, LookAhead(p));
                prop_assert!(b >= a, "p={} {} -> {}", p, w[0].1, w[1].1);
            }
        }
    }

    #[test]
    fn bounds_are_admissible(bay in bay_strategy(3, 4, 10)) {
        if let Some(z) = brute_force(&bay) {
            prop_assert!(s_p(&bay, LookAhead::FULL) <= z);
            if let Ok(h) = h_relocations(&bay) {
                prop_assert!(h >= z);
            }
        }
    }

    #[test]
    fn heuristic_moves_replay_to_empty(bay in bay_strategy(4, 5, 15)) {
        for res in [heuristic_h(&bay), nearest_relocation(&bay), tree_heuristic(&bay, BranchWidth::new(2).unwrap())] {
            if let Ok(res) = res {
                let left = bay.replay(&res.moves).unwrap();
                prop_assert!(left.is_empty());
                prop_assert_eq!(relocation_count(&res.moves) as u32, res.relocations);
                let retrieved: Vec<_> = res.moves.iter().filter(|m| !m.is_relocation()).map(MoveEvent::container).collect();
                prop_assert!(retrieved.windows(2).all(|w| w[0] < w[1]));
            }
        }
    }

    #[test]
    fn wider_trees_never_hurt(bay in bay_strategy(4, 5, 15)) {
        let mut prev = h_relocations(&bay).ok();
        for l in 1..=4 {
            let z = tree_heuristic(&bay, BranchWidth::new(l).unwrap()).ok().map(|r| r.relocations);
            if let (Some(p), Some(z)) = (prev, z) {
                prop_assert!(z <= p, "L={}", l);
            }
            prev = z.or(prev);
        }
    }

    #[test]
    fn solver_moves_are_legal_and_gap_is_certified(bay in bay_strategy(4, 5, 15), budget in 1usize..400) {
        let cfg = SolverConfig::default().with_budget(budget);
        let out = solve(&bay, &cfg).unwrap();
        prop_assert!(bay.replay(&out.moves).unwrap().is_empty());
        prop_assert_eq!(relocation_count(&out.moves) as u32, out.relocations);
        let full = solve(&bay, &SolverConfig::default()).unwrap();
        prop_assert!(full.is_optimal());
        prop_assert!(out.relocations >= full.relocations);
        prop_assert!(out.relocations - out.gap <= full.relocations);
    }

    #[test]
    fn gap_curve_is_non_increasing(bay in bay_strategy(4, 6, 20)) {
        let budgets = [1, 2, 5, 20, 100, 1000];
        let points = gap_curve(&bay, &budgets, &SolverConfig::default()).unwrap();
        prop_assert_eq!(points.len(), budgets.len());
        prop_assert!(points.windows(2).all(|w| w[1].gap <= w[0].gap));
    }

    #[test]
    fn myopic_with_full_information_is_h(seed in any::<u64>()) {
        let bay = InstanceSpec::new(4, 5, 3, seed).generate().unwrap();
        let inst = TwoStageInstance::new(bay.clone(), 15, 1).unwrap();
        prop_assert_eq!(myopic_heuristic(&inst).unwrap().relocations, h_relocations(&bay).unwrap());
    }

    #[test]
    fn first_stage_ignores_unknown_labels(seed in any::<u64>(), swap in any::<u64>()) {
        use rand::seq::SliceRandom;
        let bay = InstanceSpec::new(4, 4, 3, seed).generate().unwrap();
        let known = 6;
        let mut perm: Vec<u32> = (known + 1..=12).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(swap));
        let other = bay.map_labels(|l| if l <= known { l } else { perm[(l - known - 1) as usize] });
        let a = TwoStageInstance::new(bay, known as usize, 4).unwrap();
        let b = TwoStageInstance::new(other, known as usize, 4).unwrap();
        let cols = |moves: &[MoveEvent]| -> Vec<(usize, Option<usize>)> {
            moves.iter().map(|m| match *m {
                MoveEvent::Relocate { from, to, .. } => (from, Some(to)),
                MoveEvent::Retrieve { from, .. } => (from, None),
            }).collect()
        };
        let first = |inst: &TwoStageInstance| {
            let moves = myopic_heuristic(inst).unwrap().moves;
            // Moves made before the reveal (one per time step, idle steps aside).
            moves.into_iter().take(inst.t_star() - 1).collect::<Vec<_>>()
        };
        prop_assert_eq!(cols(&first(&a)), cols(&first(&b)));
        let cfg = AsaConfig::new(Sampling::Fixed(8)).with_seed(3);
        let x = asa_star(&a, &cfg).unwrap();
        let y = asa_star(&b, &cfg).unwrap();
        prop_assert_eq!(cols(&x.first_stage), cols(&y.first_stage));
    }
}

#[test]
fn label_one_lands_in_each_column_uniformly() {
    let spec = InstanceSpec::new(4, 7, 3, 99);
    let samples = 100_000;
    let mut counts = [0usize; 7];
    for i in 0..samples {
        let bay = spec.generate_nth(i).unwrap();
        counts[bay.locate(1).unwrap().0] += 1;
    }
    let expected = samples as f64 / 7.0;
    let sigma = (samples as f64 * (1.0 / 7.0) * (6.0 / 7.0)).sqrt();
    for c in counts {
        assert!((c as f64 - expected).abs() <= 3.0 * sigma, "{counts:?}");
    }
}

#[test]
fn every_small_bay_is_equally_likely() {
    let spec = InstanceSpec::new(3, 3, 2, 7);
    let samples = 720 * 200;
    let mut freq = std::collections::HashMap::new();
    for i in 0..samples {
        *freq.entry(spec.generate_nth(i as u64).unwrap()).or_insert(0usize) += 1;
    }
    assert_eq!(freq.len(), 720);
    // Chi-square with 719 degrees of freedom; mean 719, sd about 37.9.
    let e = samples as f64 / 720.0;
    let chi2: f64 = freq.values().map(|&o| (o as f64 - e).powi(2) / e).sum();
    assert!(chi2 < 719.0 + 4.0 * 37.9, "chi2={chi2}");
}

#[test]
fn h_is_optimal_with_at_most_c_plus_one_containers() {
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    for columns in 3..=5 {
        for extra in 0..=1 {
            for _ in 0..200 {
                let bay = random_bay(4, columns, columns + extra, &mut rng);
                let z = brute_force(&bay).unwrap();
                assert_eq!(h_relocations(&bay).unwrap(), z, "{bay}");
                if extra == 0 {
                    assert_eq!(s0(&bay), z);
                } else if (0..columns).all(|c| bay.height(c) > 0) {
                    assert_eq!(s_p(&bay, LookAhead(1)), z, "{bay}");
                }
            }
        }
    }
}

#[test]
fn look_ahead_misses_second_blocker_when_a_column_is_empty() {
    // C + 1 containers, two blockers above 1 and one empty column: only one
    // blocker can move well, yet the recursion stops at the empty column.
    let bay = Bay::with_columns(4, 3, &[vec![2], vec![1, 4, 3], vec![]]).unwrap();
    assert_eq!(brute_force(&bay), Some(3));
    assert_eq!(h_relocations(&bay).unwrap(), 3);
    assert_eq!(s_p(&bay, LookAhead(1)), 2);
}

#[test]
fn h_is_near_optimal_with_c_plus_k_containers() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let columns = 5;
    for k in 2..=columns {
        let slack = if k == 2 { 2 } else { (k * (k + 1) / 2) as u32 };
        for _ in 0..100 {
            let bay = random_bay(4, columns, columns + k, &mut rng);
            let z = brute_force(&bay).unwrap();
            assert!(h_relocations(&bay).unwrap() <= z + slack, "{bay}");
        }
    }
}
