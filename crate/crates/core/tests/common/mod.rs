//! Independent reference implementations used as test oracles.

#![allow(dead_code)]

use std::collections::HashMap;

use crp_core::bay::{Bay, Label};

/// Retrieves every target that sits on top, working on plain stacks.
fn drain(stacks: &mut [Vec<Label>]) {
    loop {
        let Some((c, _)) = stacks
            .iter()
            .enumerate()
            .filter_map(|(c, s)| s.iter().min().map(|&m| (c, m)))
            .min_by_key(|&(_, m)| m)
        else {
            return;
        };
        let m = *stacks[c].iter().min().unwrap();
        if stacks[c].last() == Some(&m) {
            stacks[c].pop();
        } else {
            return;
        }
    }
}

/// Exhaustive memoized search over every legal relocation, with no bounds.
pub struct BruteForce {
    tiers: usize,
    memo: HashMap<Vec<Vec<Label>>, u32>,
}

impl BruteForce {
    pub fn new(tiers: usize) -> BruteForce {
        BruteForce {
            tiers,
            memo: HashMap::new(),
        }
    }

    /// Minimum relocations, or `None` when the bay cannot be emptied.
    pub fn solve(&mut self, bay: &Bay) -> Option<u32> {
        assert_eq!(bay.tiers(), self.tiers);
        let mut stacks = bay.to_stacks();
        drain(&mut stacks);
        self.go(stacks)
    }

    fn go(&mut self, stacks: Vec<Vec<Label>>) -> Option<u32> {
        if stacks.iter().all(|s| s.is_empty()) {
            return Some(0);
        }
        if let Some(&v) = self.memo.get(&stacks) {
            return (v != u32::MAX).then_some(v);
        }
        let target = stacks.iter().flatten().min().copied().unwrap();
        let src = stacks.iter().position(|s| s.contains(&target)).unwrap();
        let mut best = u32::MAX;
        for dst in 0..stacks.len() {
            if dst == src || stacks[dst].len() >= self.tiers {
                continue;
            }
            let mut next = stacks.clone();
            let r = next[src].pop().unwrap();
            next[dst].push(r);
            drain(&mut next);
            if let Some(v) = self.go(next) {
                best = best.min(v + 1);
            }
        }
        self.memo.insert(stacks, best);
        (best != u32::MAX).then_some(best)
    }
}

pub fn brute_force(bay: &Bay) -> Option<u32> {
    BruteForce::new(bay.tiers()).solve(bay)
}

/// Every bay with `fill` containers in each of `columns` columns holding
/// labels `1..=fill*columns`.
pub fn all_uniform_bays(tiers: usize, columns: usize, fill: usize) -> Vec<Bay> {
    let n = fill * columns;
    let mut perm: Vec<Label> = (1..=n as Label).collect();
    let mut out = Vec::new();
    permute(&mut perm, 0, &mut |p| {
        let stacks: Vec<Vec<Label>> = p.chunks(fill).map(<[Label]>::to_vec).collect();
        out.push(Bay::with_columns(tiers, columns, &stacks).unwrap());
    });
    out
}

fn permute(v: &mut Vec<Label>, k: usize, f: &mut impl FnMut(&[Label])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, f);
        v.swap(k, i);
    }
}

/// Blocking containers counted from plain stacks.
pub fn count_blocking(bay: &Bay) -> u32 {
    bay.to_stacks()
        .iter()
        .map(|s| {
            (0..s.len())
                .filter(|&i| s[..i].iter().any(|&b| b < s[i]))
                .count() as u32
        })
        .sum()
}

/// Random bay with `n` containers (labels `1..=n`) dropped into random
/// non-full columns, so column heights vary.
pub fn random_bay(tiers: usize, columns: usize, n: usize, rng: &mut impl rand::Rng) -> Bay {
    use rand::seq::SliceRandom;
    assert!(n <= tiers * columns);
    let mut labels: Vec<Label> = (1..=n as Label).collect();
    labels.shuffle(rng);
    let mut stacks = vec![Vec::new(); columns];
    for l in labels {
        let open: Vec<usize> = (0..columns).filter(|&c| stacks[c].len() < tiers).collect();
        let c = *open.choose(rng).unwrap();
        stacks[c].push(l);
    }
    Bay::with_columns(tiers, columns, &stacks).unwrap()
}

/// Exact two-stage optimum from plain enumeration: every relocation choice
/// before `t_star` (decisions cannot see unknown labels, so each choice
/// sequence is one first-stage plan), averaged over every assignment of
/// the unknown labels, with the second stage solved by [`brute_force`].
pub fn brute_two_stage(bay: &Bay, known: usize, t_star: usize) -> f64 {
    let known = known as Label;
    let n = bay.len() as Label;
    let unknown: Vec<Label> = (known + 1..=n).collect();
    let mut assignments = Vec::new();
    let mut perm = unknown.clone();
    permute(&mut perm, 0, &mut |p| assignments.push(p.to_vec()));
    // Slots of unknown containers in the realized bay, in slot order.
    let slot_labels: Vec<Label> = bay.labels().filter(|&l| l > known).collect();
    let realize = |a: &[Label]| -> Bay {
        bay.map_labels(|l| {
            if l <= known {
                l
            } else {
                a[slot_labels.iter().position(|&s| s == l).unwrap()]
            }
        })
    };
    let scenario_bays: Vec<Bay> = assignments.iter().map(|a| realize(a)).collect();
    let mut oracle = BruteForce::new(bay.tiers());
    let mut best = f64::INFINITY;
    let mut plans = vec![Vec::<usize>::new()];
    // Enumerate plans as destination sequences, applied identically in
    // every scenario (the source is always the target's column).
    let mut finished = Vec::new();
    while let Some(plan) = plans.pop() {
        // Replay on the first scenario to see whether another decision is due.
        let (decision_due, dests) = {
            let mut b = scenario_bays[0].clone();
            let due = replay_plan(&mut b, &plan, t_star);
            (due, dest_options(&b))
        };
        if decision_due {
            for d in dests {
                let mut p = plan.clone();
                p.push(d);
                plans.push(p);
            }
        } else {
            finished.push(plan);
        }
    }
    for plan in finished {
        best = best.min(average_cost(&scenario_bays, &plan, t_star, &mut oracle));
    }
    best
}

/// Exact expected total of one first-stage plan (destination columns of
/// the pre-reveal relocations, in order).
pub fn plan_value(bay: &Bay, known: usize, t_star: usize, plan: &[usize]) -> f64 {
    let known = known as Label;
    let slot_labels: Vec<Label> = bay.labels().filter(|&l| l > known).collect();
    let mut perm = slot_labels.clone();
    perm.sort_unstable();
    let mut scenario_bays = Vec::new();
    permute(&mut perm, 0, &mut |a| {
        scenario_bays.push(bay.map_labels(|l| {
            if l <= known {
                l
            } else {
                a[slot_labels.iter().position(|&s| s == l).unwrap()]
            }
        }))
    });
    average_cost(&scenario_bays, plan, t_star, &mut BruteForce::new(bay.tiers()))
}

fn average_cost(scenario_bays: &[Bay], plan: &[usize], t_star: usize, oracle: &mut BruteForce) -> f64 {
    let mut total = 0.0;
    for sb in scenario_bays {
        let mut b = sb.clone();
        assert!(!replay_plan(&mut b, plan, t_star), "plan too short");
        total += (plan.len() as u32 + oracle.solve(&b).unwrap()) as f64;
    }
    total / scenario_bays.len() as f64
}

/// Applies the plan's destinations during time steps `1..t_star`. Returns
/// true when the plan ran out while a relocation is still due before the
/// reveal.
fn replay_plan(bay: &mut Bay, plan: &[usize], t_star: usize) -> bool {
    let mut next = 0;
    for time in 1..t_star {
        let Some((target, tc, tt)) = bay.target_position() else {
            return false;
        };
        if tt + 1 == bay.height(tc) {
            if target as usize <= time {
                *bay = bay
                    .apply_move(&crp_core::MoveEvent::Retrieve { container: target, from: tc })
                    .unwrap();
            }
            continue;
        }
        if next == plan.len() {
            return true;
        }
        let r = bay.top(tc).unwrap();
        *bay = bay
            .apply_move(&crp_core::MoveEvent::Relocate { container: r, from: tc, to: plan[next] })
            .unwrap();
        next += 1;
    }
    false
}

fn dest_options(bay: &Bay) -> Vec<usize> {
    let Some((_, tc, _)) = bay.target_position() else {
        return Vec::new();
    };
    (0..bay.columns())
        .filter(|&c| c != tc && bay.height(c) < bay.tiers())
        .collect()
}
