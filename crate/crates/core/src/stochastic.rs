//! Two-stage CRP with incomplete information.
//!
//! Containers `1..=known` have a known departure order from the start; the
//! order of the rest is revealed all at once at time `t_star`. Every move
//! (relocation, retrieval, or idle step) takes one time step starting at
//! time 1, so the first stage consists of the moves made at times
//! `1..t_star`. Those moves can only depend on the known labels.
//!
//! Unknown containers are tracked through the first stage by placeholder
//! labels assigned in slot order (column by column, bottom to top). A
//! [`Scenario`] maps placeholders to true labels; every scenario is equally
//! likely.
//!
//! [`asa_star`] explores the first-stage tree, estimates each path's
//! expected bounds and second-stage cost from sampled scenarios (the same
//! draws for every path), prunes paths whose estimated lower bound reaches
//! the best estimated upper bound, and returns the path with the smallest
//! estimated expected total.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::astar::{solve, SolveError, SolverConfig};
use crate::bay::{Bay, Label, MoveEvent};
use crate::bounds::{s_p, LookAhead};
use crate::heuristics::{h_relocations, masked_destination, ranked_columns, Mask};
use crate::io::{ParseError, TwoStageFile};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StochasticError {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("invalid sampling parameters: {0}")]
    InvalidParams(String),
    #[error("first-stage tree exceeded {limit} nodes")]
    BudgetExceeded { limit: usize },
    #[error("exhaustive evaluation needs {needed} second-stage solves (limit {limit})")]
    TooLarge { needed: f64, limit: f64 },
    #[error("second-stage solve could not certify optimality")]
    NotCertified,
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// A bay whose labels are `1..=N`, with `1..=known` known initially and
/// the rest revealed at `t_star`. The bay carries the realized labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoStageInstance {
    bay: Bay,
    known: usize,
    t_star: usize,
}

impl TwoStageInstance {
    pub fn new(bay: Bay, known: usize, t_star: usize) -> Result<TwoStageInstance, StochasticError> {
        let n = bay.len();
        let mut labels: Vec<Label> = bay.labels().collect();
        labels.sort_unstable();
        if labels.iter().enumerate().any(|(i, &l)| l as usize != i + 1) {
            return Err(StochasticError::InvalidInstance(
                "labels must be exactly 1..=N".into(),
            ));
        }
        if n == 0 {
            return Err(StochasticError::InvalidInstance("bay is empty".into()));
        }
        if known == 0 || known > n {
            return Err(StochasticError::InvalidInstance(format!(
                "known count {known} outside 1..={n}"
            )));
        }
        if t_star == 0 {
            return Err(StochasticError::InvalidInstance("t_star must be at least 1".into()));
        }
        if known < n && t_star > known + 1 {
            return Err(StochasticError::InvalidInstance(format!(
                "t_star {t_star} would need unknown targets before the reveal (known {known})"
            )));
        }
        Ok(TwoStageInstance { bay, known, t_star })
    }

    pub fn from_file(file: TwoStageFile) -> Result<TwoStageInstance, StochasticError> {
        let bay = crate::io::BayFile {
            tiers: file.tiers,
            columns: file.columns,
            stacks: file.stacks,
        }
        .into_bay()?;
        TwoStageInstance::new(bay, file.known, file.t_star)
    }

    /// Known count and reveal time from fractions of `N`:
    /// `|K| = ceil(known_frac * N)` and `t* = ceil(reveal_frac * N) + 1`.
    pub fn with_fractions(
        bay: Bay,
        known_frac: f64,
        reveal_frac: f64,
    ) -> Result<TwoStageInstance, StochasticError> {
        let n = bay.len() as f64;
        let known = ceil_frac(known_frac, n);
        let t_star = ceil_frac(reveal_frac, n) + 1;
        TwoStageInstance::new(bay, known, t_star)
    }

    pub fn bay(&self) -> &Bay {
        &self.bay
    }

    pub fn known(&self) -> usize {
        self.known
    }

    pub fn t_star(&self) -> usize {
        self.t_star
    }

    pub fn containers(&self) -> usize {
        self.bay.len()
    }

    pub fn unknown(&self) -> usize {
        self.containers() - self.known
    }

    pub fn mask(&self) -> Mask {
        Mask::new(self.known, self.containers())
    }

    /// `(N - |K|)!`, or `None` past `u64`.
    pub fn scenario_count(&self) -> Option<u64> {
        (1..=self.unknown() as u64).try_fold(1u64, |acc, k| acc.checked_mul(k))
    }

    /// The bay as seen before the reveal, with unknown containers replaced
    /// by placeholders `known+1, known+2, ...` in slot order.
    pub fn reference_bay(&self) -> Bay {
        let known = self.known as Label;
        let mut next = known;
        let mut out = self.bay.clone();
        for c in 0..self.bay.columns() {
            let stack: Vec<Label> = out.stack(c).to_vec();
            while out.height(c) > 0 {
                out.pop(c);
            }
            for l in stack {
                if l <= known {
                    out.push(c, l);
                } else {
                    next += 1;
                    out.push(c, next);
                }
            }
        }
        out
    }

    /// The scenario under which the reference bay becomes the realized bay.
    pub fn realized_scenario(&self) -> Scenario {
        let known = self.known as Label;
        Scenario(
            self.bay
                .labels()
                .filter(|&l| l > known)
                .map(|l| l - known - 1)
                .collect(),
        )
    }
}

/// Smallest integer not below `frac * n` (with a small tolerance so that
/// exact products are not pushed up by rounding).
pub fn ceil_frac(frac: f64, n: f64) -> usize {
    let x = frac * n;
    let r = x.round();
    if (x - r).abs() < 1e-9 {
        r as usize
    } else {
        x.ceil() as usize
    }
}

/// Placeholder `known + 1 + j` receives true label `known + 1 + self.0[j]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Scenario(pub Vec<u32>);

impl Scenario {
    pub fn realize(&self, bay: &Bay, known: usize) -> Bay {
        let known = known as Label;
        bay.map_labels(|l| {
            if l <= known {
                l
            } else {
                known + 1 + self.0[(l - known - 1) as usize]
            }
        })
    }
}

/// All `unknown!` scenarios in lexicographic order.
pub fn all_scenarios(unknown: usize) -> Vec<Scenario> {
    let mut perm: Vec<u32> = (0..unknown as u32).collect();
    let mut out = vec![Scenario(perm.clone())];
    loop {
        // Next lexicographic permutation.
        let Some(i) = (1..perm.len()).rev().find(|&i| perm[i - 1] < perm[i]) else {
            return out;
        };
        let j = (i..perm.len()).rev().find(|&j| perm[j] > perm[i - 1]).unwrap();
        perm.swap(i - 1, j);
        perm[i..].reverse();
        out.push(Scenario(perm.clone()));
    }
}

/// `count` independent uniform scenarios.
pub fn sample_scenarios(unknown: usize, count: usize, rng: &mut impl rand::Rng) -> Vec<Scenario> {
    (0..count)
        .map(|_| {
            let mut p: Vec<u32> = (0..unknown as u32).collect();
            p.shuffle(rng);
            Scenario(p)
        })
        .collect()
}

/// Hoeffding sizing: precision `delta`, failure probability `epsilon`, and
/// the range `[r_min, r_max]` of the relocation count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SamplingParams {
    pub delta: f64,
    pub epsilon: f64,
    pub r_max: f64,
    pub r_min: f64,
}

impl SamplingParams {
    pub fn new(delta: f64, epsilon: f64, r_max: f64) -> SamplingParams {
        SamplingParams {
            delta,
            epsilon,
            r_max,
            r_min: 0.0,
        }
    }

    /// Uses the universal range `N (P - 1)`.
    pub fn for_bay(delta: f64, epsilon: f64, bay: &Bay) -> SamplingParams {
        SamplingParams::new(delta, epsilon, (bay.len() * (bay.tiers() - 1)) as f64)
    }

    pub fn validate(&self) -> Result<(), StochasticError> {
        validate_epsilon(self.epsilon)?;
        if !(self.delta > 0.0) {
            return Err(StochasticError::InvalidParams(format!(
                "delta must be positive, got {}",
                self.delta
            )));
        }
        if !(self.r_max >= self.r_min) || self.r_min < 0.0 {
            return Err(StochasticError::InvalidParams(format!(
                "need 0 <= r_min <= r_max, got [{}, {}]",
                self.r_min, self.r_max
            )));
        }
        Ok(())
    }

    pub fn sample_size(&self) -> Result<usize, StochasticError> {
        sample_size(self)
    }
}

fn validate_epsilon(epsilon: f64) -> Result<(), StochasticError> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(StochasticError::InvalidParams(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )))
    }
}

/// Smallest `S` with `2 exp(-2 S delta^2 / range^2) <= epsilon`, at least 1.
pub fn sample_size(params: &SamplingParams) -> Result<usize, StochasticError> {
    params.validate()?;
    let range = params.r_max - params.r_min;
    let s = range * range * (params.epsilon / 2.0).ln() / (-2.0 * params.delta * params.delta);
    Ok((s.ceil() as usize).max(1))
}

/// Bound on the expected loss from sampling (and from pruning once at
/// `t* - 1`): `2 delta sqrt(pi / -ln(epsilon / 2))`.
pub fn error_bound_e1_e2(delta: f64, epsilon: f64) -> Result<f64, StochasticError> {
    validate_epsilon(epsilon)?;
    if delta < 0.0 {
        return Err(StochasticError::InvalidParams("delta must be non-negative".into()));
    }
    Ok(2.0 * delta * (std::f64::consts::PI / -(epsilon / 2.0).ln()).sqrt())
}

/// Bound on the expected loss from pruning at `m` times before `t* - 1`,
/// given the smallest pruning margin `d_min` and the largest estimated
/// upper bound of the retained paths.
pub fn error_bound_e3(
    delta: f64,
    epsilon: f64,
    m: usize,
    d_min: f64,
    u_hat_max: f64,
) -> Result<f64, StochasticError> {
    validate_epsilon(epsilon)?;
    if !(delta > 0.0) {
        return Err(StochasticError::InvalidParams("delta must be positive".into()));
    }
    if m == 0 {
        return Ok(0.0);
    }
    if !(d_min > 0.0) {
        return Err(StochasticError::InvalidParams("d_min must be positive".into()));
    }
    let half = epsilon / 2.0;
    let log = -half.ln();
    let ratio = d_min / delta;
    let tail = half.powf(ratio * ratio)
        + ratio * (log * std::f64::consts::PI / 2.0).sqrt() * half.powf(ratio * ratio / 2.0);
    Ok(m as f64 * tail * (delta * (std::f64::consts::PI / log).sqrt() + u_hat_max))
}

/// How scenarios are chosen for each path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Sampling {
    /// `S` from the Hoeffding parameters; all scenarios if `S >= |Q|`.
    Hoeffding(SamplingParams),
    /// A fixed number of draws; all scenarios if it covers `|Q|`.
    Fixed(usize),
    /// Every scenario.
    Exhaustive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsaConfig {
    pub sampling: Sampling,
    /// Time steps before `t* - 1` after which paths are pruned.
    pub prune_times: Vec<usize>,
    /// Prune the leaves at `t* - 1` before solving their scenarios.
    pub prune_at_reveal: bool,
    /// Second-stage solver (per scenario).
    pub second_stage: SolverConfig,
    /// Cap on first-stage tree nodes.
    pub max_first_stage_nodes: usize,
    pub seed: u64,
}

impl AsaConfig {
    pub fn new(sampling: Sampling) -> AsaConfig {
        AsaConfig {
            sampling,
            prune_times: Vec::new(),
            prune_at_reveal: true,
            second_stage: SolverConfig::default().with_budget(100_000),
            max_first_stage_nodes: 100_000,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> AsaConfig {
        self.seed = seed;
        self
    }
}

/// One pruning round.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PruneEvent {
    pub time: usize,
    pub pruned: usize,
    /// Smallest `L̄_pruned - Ū_best` over the pruned paths.
    pub margin: f64,
    /// `Ū` of the path with the smallest estimated upper bound.
    pub best_upper: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct PruneLedger {
    pub events: Vec<PruneEvent>,
}

impl PruneLedger {
    /// Pruning rounds before `t* - 1`.
    pub fn early_rounds(&self, t_star: usize) -> impl Iterator<Item = &PruneEvent> {
        self.events.iter().filter(move |e| e.time + 1 < t_star)
    }

    pub fn d_min(&self, t_star: usize) -> Option<f64> {
        self.early_rounds(t_star).map(|e| e.margin).reduce(f64::min)
    }

    pub fn u_hat_max(&self, t_star: usize) -> Option<f64> {
        self.early_rounds(t_star).map(|e| e.best_upper).reduce(f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsaOutcome {
    /// First-stage moves in terms of the realized labels.
    pub first_stage: Vec<MoveEvent>,
    pub first_stage_relocations: u32,
    /// Estimated expected total relocations of the chosen path.
    pub expected_cost: f64,
    pub ledger: PruneLedger,
    pub first_stage_nodes: usize,
    pub scenarios: usize,
    pub exhaustive: bool,
}

#[derive(Clone)]
struct StageNode {
    bay: Bay,
    relocations: u32,
    /// Column choices of the relocations on the path.
    choices: Vec<(usize, usize)>,
    done: bool,
}

/// Expands the first-stage tree by one time step.
fn step(node: &StageNode, mask: &Mask, time: usize) -> Vec<StageNode> {
    let Some((target, tc, tt)) = node.bay.target_position() else {
        return vec![StageNode {
            done: true,
            ..node.clone()
        }];
    };
    if tt + 1 == node.bay.height(tc) {
        let mut next = node.clone();
        if target as usize <= time {
            next.bay.pop(tc);
        }
        next.done = next.bay.is_empty();
        return vec![next];
    }
    let r = node.bay.top(tc).expect("blocked target");
    let masked = mask_ranked(&node.bay, mask, r, tc);
    masked
        .into_iter()
        .map(|to| {
            let mut next = node.clone();
            next.bay.relocate_top(tc, to);
            next.relocations += 1;
            next.choices.push((tc, to));
            next
        })
        .collect()
}

/// All non-full destination columns, ordered by the masked H ranking so
/// ties between paths resolve toward the myopic choice.
fn mask_ranked(bay: &Bay, mask: &Mask, r: Label, source: usize) -> Vec<usize> {
    let masked = bay.map_labels(|l| mask.view(l));
    let mut order = ranked_columns(&masked, mask.view(r), source);
    if let Some(first) = masked_destination(bay, mask, r, source) {
        if let Some(pos) = order.iter().position(|&c| c == first) {
            order.remove(pos);
            order.insert(0, first);
        }
    }
    order
}

fn scenarios_for(
    instance: &TwoStageInstance,
    sampling: &Sampling,
    seed: u64,
) -> Result<(Vec<Scenario>, bool), StochasticError> {
    let unknown = instance.unknown();
    let total = instance.scenario_count();
    let wanted = match sampling {
        Sampling::Hoeffding(p) => Some(sample_size(p)?),
        Sampling::Fixed(n) => Some((*n).max(1)),
        Sampling::Exhaustive => None,
    };
    match (wanted, total) {
        (Some(s), Some(q)) if (s as u64) < q => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok((sample_scenarios(unknown, s, &mut rng), false))
        }
        (Some(_), None) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok((sample_scenarios(unknown, wanted.unwrap(), &mut rng), false))
        }
        (None, None) => Err(StochasticError::TooLarge {
            needed: f64::INFINITY,
            limit: EXACT_SOLVE_LIMIT,
        }),
        _ => Ok((all_scenarios(unknown), true)),
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn expected_bounds(node: &StageNode, scenarios: &[Scenario], known: usize) -> (f64, f64) {
    let base = node.relocations as f64;
    let mut lower = 0.0;
    let mut upper = 0.0;
    for q in scenarios {
        let mut bay = q.realize(&node.bay, known);
        bay.pop_retrievable();
        lower += s_p(&bay, LookAhead::FULL) as f64;
        upper += h_relocations(&bay).map_or(f64::INFINITY, f64::from);
    }
    let n = scenarios.len().max(1) as f64;
    (base + lower / n, base + upper / n)
}

/// Second-stage cost of one realized bay.
fn second_stage(bay: &Bay, solver: &SolverConfig) -> Result<u32, StochasticError> {
    let mut bay = bay.clone();
    bay.pop_retrievable();
    Ok(solve(&bay, solver)?.relocations)
}

/// Sample mean of the second-stage cost over `scenarios` from a
/// reference (placeholder-labelled) bay.
pub fn expected_second_stage(
    reference: &Bay,
    known: usize,
    scenarios: &[Scenario],
    solver: &SolverConfig,
) -> Result<f64, StochasticError> {
    let costs = scenarios
        .iter()
        .map(|q| second_stage(&q.realize(reference, known), solver).map(f64::from))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(mean(costs.into_iter()))
}

/// Prunes paths whose estimated lower bound reaches the best estimated
/// upper bound. The best path itself is never pruned.
fn prune(
    nodes: Vec<StageNode>,
    scenarios: &[Scenario],
    known: usize,
    time: usize,
    ledger: &mut PruneLedger,
) -> Vec<StageNode> {
    if nodes.len() < 2 {
        return nodes;
    }
    let bounds: Vec<(f64, f64)> = nodes
        .iter()
        .map(|n| expected_bounds(n, scenarios, known))
        .collect();
    let (best, best_upper) = bounds
        .iter()
        .enumerate()
        .map(|(i, b)| (i, b.1))
        .fold((0, f64::INFINITY), |acc, (i, u)| if u < acc.1 { (i, u) } else { acc });
    let mut margin = f64::INFINITY;
    let mut kept = Vec::with_capacity(nodes.len());
    let mut pruned = 0;
    for (i, (node, (lower, _))) in nodes.into_iter().zip(&bounds).enumerate() {
        if i != best && *lower >= best_upper {
            assert!(*lower >= best_upper);
            margin = margin.min(lower - best_upper);
            pruned += 1;
        } else {
            kept.push(node);
        }
    }
    if pruned > 0 {
        ledger.events.push(PruneEvent {
            time,
            pruned,
            margin,
            best_upper,
        });
    }
    kept
}

/// Approximate stochastic A*: chooses first-stage moves minimizing the
/// estimated expected total number of relocations.
pub fn asa_star(instance: &TwoStageInstance, config: &AsaConfig) -> Result<AsaOutcome, StochasticError> {
    let known = instance.known();
    let mask = instance.mask();
    let (scenarios, exhaustive) = scenarios_for(instance, &config.sampling, config.seed)?;
    let reference = instance.reference_bay();

    let mut frontier = vec![StageNode {
        bay: reference,
        relocations: 0,
        choices: Vec::new(),
        done: false,
    }];
    let mut ledger = PruneLedger::default();
    let mut nodes = 1usize;
    let last = instance.t_star().saturating_sub(1);
    for time in 1..=last {
        let mut next = Vec::new();
        for node in &frontier {
            if node.done {
                next.push(node.clone());
                continue;
            }
            let children = step(node, &mask, time);
            nodes += children.len();
            if nodes > config.max_first_stage_nodes {
                return Err(StochasticError::BudgetExceeded {
                    limit: config.max_first_stage_nodes,
                });
            }
            next.extend(children);
        }
        frontier = next;
        let prune_now = if time == last {
            config.prune_at_reveal
        } else {
            config.prune_times.contains(&time)
        };
        if prune_now {
            frontier = prune(frontier, &scenarios, known, time, &mut ledger);
        }
    }

    let mut best: Option<(f64, StageNode)> = None;
    for node in frontier {
        let cost = node.relocations as f64
            + expected_second_stage(&node.bay, known, &scenarios, &config.second_stage)?;
        if best.as_ref().map_or(true, |(b, _)| cost < *b - 1e-12) {
            best = Some((cost, node));
        }
    }
    let (expected_cost, chosen) = best.expect("first-stage tree has at least one leaf");
    let first_stage = realize_choices(instance, &chosen.choices, last);
    Ok(AsaOutcome {
        first_stage,
        first_stage_relocations: chosen.relocations,
        expected_cost,
        ledger,
        first_stage_nodes: nodes,
        scenarios: scenarios.len(),
        exhaustive,
    })
}

/// Replays first-stage relocation choices on the realized bay, filling in
/// the forced retrievals, for `steps` time steps.
fn realize_choices(instance: &TwoStageInstance, choices: &[(usize, usize)], steps: usize) -> Vec<MoveEvent> {
    let mut bay = instance.bay().clone();
    let mut moves = Vec::new();
    let mut choices = choices.iter();
    for time in 1..=steps {
        let Some((target, tc, tt)) = bay.target_position() else {
            break;
        };
        if tt + 1 == bay.height(tc) {
            if target as usize <= time {
                bay.pop(tc);
                moves.push(MoveEvent::Retrieve {
                    container: target,
                    from: tc,
                });
            }
            continue;
        }
        let &(from, to) = choices.next().expect("choice per relocation");
        let container = bay.relocate_top(from, to);
        moves.push(MoveEvent::Relocate {
            container,
            from,
            to,
        });
    }
    moves
}

/// Total relocations when the first-stage moves are applied to the
/// realized bay and the rest is solved with full information.
pub fn realized_cost(
    instance: &TwoStageInstance,
    first_stage: &[MoveEvent],
    solver: &SolverConfig,
) -> Result<u32, StochasticError> {
    let bay = instance
        .bay()
        .replay(first_stage)
        .map_err(|e| StochasticError::InvalidInstance(e.to_string()))?;
    let first = first_stage.iter().filter(|m| m.is_relocation()).count() as u32;
    Ok(first + second_stage(&bay, solver)?)
}

/// Cap on second-stage solves for [`exact_two_stage`].
pub const EXACT_SOLVE_LIMIT: f64 = 1e6;

#[derive(Debug, Clone, PartialEq)]
pub struct ExactTwoStage {
    pub expected_cost: f64,
    pub first_stage: Vec<MoveEvent>,
}

/// Exact two-stage optimum by enumerating every first-stage path and every
/// scenario. Second-stage costs must be certified optimal.
pub fn exact_two_stage(
    instance: &TwoStageInstance,
    solver: &SolverConfig,
) -> Result<ExactTwoStage, StochasticError> {
    let known = instance.known();
    let mask = instance.mask();
    let last = instance.t_star().saturating_sub(1);
    let mut frontier = vec![StageNode {
        bay: instance.reference_bay(),
        relocations: 0,
        choices: Vec::new(),
        done: false,
    }];
    for time in 1..=last {
        frontier = frontier
            .iter()
            .flat_map(|n| {
                if n.done {
                    vec![n.clone()]
                } else {
                    step(n, &mask, time)
                }
            })
            .collect();
    }
    let q = instance.scenario_count().map_or(f64::INFINITY, |q| q as f64);
    let needed = q * frontier.len() as f64;
    if needed > EXACT_SOLVE_LIMIT {
        return Err(StochasticError::TooLarge {
            needed,
            limit: EXACT_SOLVE_LIMIT,
        });
    }
    let scenarios = all_scenarios(instance.unknown());
    let mut best: Option<(f64, &StageNode)> = None;
    for node in &frontier {
        let mut total = 0.0;
        for s in &scenarios {
            let mut bay = s.realize(&node.bay, known);
            bay.pop_retrievable();
            let out = solve(&bay, solver)?;
            if !out.is_optimal() {
                return Err(StochasticError::NotCertified);
            }
            total += out.relocations as f64;
        }
        let cost = node.relocations as f64 + total / scenarios.len() as f64;
        if best.map_or(true, |(b, _)| cost < b - 1e-12) {
            best = Some((cost, node));
        }
    }
    let (expected_cost, node) = best.expect("at least one leaf");
    Ok(ExactTwoStage {
        expected_cost,
        first_stage: realize_choices(instance, &node.choices, last),
    })
}
