//! Batch experiments over uniformly random bays.
//!
//! Instance `i` of a batch is `spec.generate_nth(i)`, so results depend only
//! on the spec (seed included), never on the worker count. Every runner
//! returns rows in instance order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crp_core::analysis::MeanCi;
use crp_core::astar::{gap_curve, optimal_path_lb_gap, solve, SolverConfig};
use crp_core::bay::{Bay, InstanceSpec};
use crp_core::bounds::{s_p, LookAhead};
use crp_core::heuristics::{
    h_relocations, myopic_heuristic, nearest_relocation, tree_heuristic, BranchWidth,
};
use crp_core::stochastic::{
    asa_star, ceil_frac, error_bound_e1_e2, error_bound_e3, realized_cost, AsaConfig, Sampling,
    SamplingParams, StochasticError, TwoStageInstance,
};

/// Runs `f(0..n)` on `workers` threads, keeping index order.
pub fn run_indexed<T, F>(n: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if workers <= 1 {
        return (0..n).map(f).collect();
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("thread pool")
        .install(|| (0..n).into_par_iter().map(f).collect())
}

/// The `i`-th bay of the batch with exposed targets already retrieved.
pub fn instance(spec: &InstanceSpec, i: usize) -> Bay {
    let mut bay = spec.generate_nth(i as u64).expect("valid instance spec");
    bay.pop_retrievable();
    bay
}

/// Share of instances per optimality gap and mean performance ratio.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkRow {
    pub heuristic: String,
    pub instances: usize,
    /// Percent of instances with gap 0, 1, 2 and 3 or more.
    pub buckets: [f64; 4],
    /// Mean of `(z - z_opt) / z_opt`, in percent.
    pub mean_pr: f64,
    /// Instances left out of the ratio because `z_opt = 0 < z`.
    pub pr_undefined: usize,
}

impl BenchmarkRow {
    /// From `(z_heuristic, z_opt)` pairs. Pairs with `z = z_opt = 0` add a
    /// zero ratio.
    pub fn from_pairs(heuristic: &str, pairs: &[(u32, u32)]) -> BenchmarkRow {
        let mut counts = [0usize; 4];
        let mut ratios = Vec::with_capacity(pairs.len());
        let mut pr_undefined = 0;
        for &(z, opt) in pairs {
            let gap = z.saturating_sub(opt) as usize;
            counts[gap.min(3)] += 1;
            if opt > 0 {
                ratios.push((z as f64 - opt as f64) / opt as f64);
            } else if z == 0 {
                ratios.push(0.0);
            } else {
                pr_undefined += 1;
            }
        }
        let n = pairs.len().max(1) as f64;
        BenchmarkRow {
            heuristic: heuristic.to_string(),
            instances: pairs.len(),
            buckets: counts.map(|c| 100.0 * c as f64 / n),
            mean_pr: 100.0 * MeanCi::of(&ratios).mean,
            pr_undefined,
        }
    }
}

/// Relocation counts reported by some outside heuristic, one row per
/// instance index.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ExternalResult {
    pub heuristic: String,
    pub instance: usize,
    pub relocations: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub spec: InstanceSpec,
    pub instances: usize,
    pub widths: Vec<usize>,
    pub solver: SolverConfig,
    pub workers: usize,
    pub external: Vec<ExternalResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceResult {
    pub index: usize,
    /// `None` when the solver hit its budget.
    pub z_opt: Option<u32>,
    pub nodes: usize,
    pub root_lower: u32,
    pub z_h: u32,
    pub z_tree: Vec<u32>,
    pub z_nearest: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub rows: Vec<BenchmarkRow>,
    pub results: Vec<InstanceResult>,
    pub solved: usize,
    pub excluded: usize,
}

impl BenchReport {
    fn solved(&self) -> impl Iterator<Item = (&InstanceResult, u32)> {
        self.results.iter().filter_map(|r| r.z_opt.map(|z| (r, z)))
    }

    /// Share of solved instances whose root bounds already coincide.
    pub fn root_certified_fraction(&self) -> f64 {
        let hits = self.solved().filter(|(r, _)| r.z_h == r.root_lower).count();
        hits as f64 / self.solved.max(1) as f64
    }

    /// Mean of `z_opt - L(root)` over solved instances.
    pub fn mean_root_lower_gap(&self) -> f64 {
        let gaps: Vec<f64> = self.solved().map(|(r, z)| (z - r.root_lower) as f64).collect();
        MeanCi::of(&gaps).mean
    }

    pub fn row(&self, heuristic: &str) -> Option<&BenchmarkRow> {
        self.rows.iter().find(|r| r.heuristic == heuristic)
    }
}

pub fn bench(config: &BenchConfig) -> BenchReport {
    let widths = config.widths.clone();
    let solver = config.solver;
    let results = run_indexed(config.instances, config.workers, |i| {
        let bay = instance(&config.spec, i);
        let out = solve(&bay, &solver).expect("positive budget");
        InstanceResult {
            index: i,
            z_opt: out.is_optimal().then_some(out.relocations),
            nodes: out.nodes,
            root_lower: s_p(&bay, solver.lower_bound),
            z_h: h_relocations(&bay).expect("spare tier"),
            z_tree: widths
                .iter()
                .map(|&w| {
                    tree_heuristic(&bay, BranchWidth::new(w).expect("positive width"))
                        .expect("spare tier")
                        .relocations
                })
                .collect(),
            z_nearest: nearest_relocation(&bay).expect("spare tier").relocations,
        }
    });
    let solved: Vec<&InstanceResult> = results.iter().filter(|r| r.z_opt.is_some()).collect();
    let pairs = |f: &dyn Fn(&InstanceResult) -> u32| -> Vec<(u32, u32)> {
        solved.iter().map(|r| (f(r), r.z_opt.unwrap())).collect()
    };
    let mut rows = vec![BenchmarkRow::from_pairs("H", &pairs(&|r| r.z_h))];
    for (k, w) in widths.iter().enumerate() {
        rows.push(BenchmarkRow::from_pairs(&format!("TH-{w}"), &pairs(&|r| r.z_tree[k])));
    }
    rows.push(BenchmarkRow::from_pairs("nearest", &pairs(&|r| r.z_nearest)));

    let mut names: Vec<&str> = config.external.iter().map(|e| e.heuristic.as_str()).collect();
    names.dedup();
    names.sort_unstable();
    names.dedup();
    for name in names {
        let ext: Vec<(u32, u32)> = config
            .external
            .iter()
            .filter(|e| e.heuristic == name)
            .filter_map(|e| {
                let z = results.get(e.instance)?.z_opt?;
                Some((e.relocations, z))
            })
            .collect();
        rows.push(BenchmarkRow::from_pairs(name, &ext));
    }
    let n_solved = solved.len();
    BenchReport {
        rows,
        solved: n_solved,
        excluded: results.len() - n_solved,
        results,
    }
}

pub const BENCH_CSV_HEADER: &str = "heuristic,instances,gap0,gap1,gap2,gap3plus,mean_pr";

pub fn bench_csv(report: &BenchReport) -> String {
    let mut out = format!("{BENCH_CSV_HEADER}\n");
    for r in &report.rows {
        out.push_str(&format!(
            "{},{},{:.3},{:.3},{:.3},{:.3},{:.4}\n",
            r.heuristic, r.instances, r.buckets[0], r.buckets[1], r.buckets[2], r.buckets[3], r.mean_pr
        ));
    }
    out
}

/// Node counts needed to prove optimality, per look-ahead depth.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LbRow {
    pub depth: LookAhead,
    pub instances: usize,
    pub mean_nodes: f64,
    pub q1: usize,
    pub median: usize,
    pub q3: usize,
    pub max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LbStudy {
    pub rows: Vec<LbRow>,
    /// Instances unsolved at some depth, left out of every row.
    pub excluded: usize,
}

impl LbStudy {
    /// `mean_nodes(a) / mean_nodes(b)`.
    pub fn ratio(&self, a: LookAhead, b: LookAhead) -> Option<f64> {
        let find = |d| self.rows.iter().find(|r| r.depth == d).map(|r| r.mean_nodes);
        Some(find(a)? / find(b)?)
    }
}

fn quantile(sorted: &[usize], q: f64) -> usize {
    if sorted.is_empty() {
        return 0;
    }
    let idx = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[idx]
}

pub fn lb_study(
    spec: &InstanceSpec,
    instances: usize,
    depths: &[LookAhead],
    budget: usize,
    workers: usize,
) -> LbStudy {
    let per_instance: Vec<Option<Vec<usize>>> = run_indexed(instances, workers, |i| {
        let bay = instance(spec, i);
        depths
            .iter()
            .map(|&d| {
                let cfg = SolverConfig::default().with_budget(budget).with_lower_bound(d);
                let out = solve(&bay, &cfg).expect("positive budget");
                out.is_optimal().then_some(out.nodes)
            })
            .collect()
    });
    let solved: Vec<&Vec<usize>> = per_instance.iter().flatten().collect();
    let rows = depths
        .iter()
        .enumerate()
        .map(|(k, &depth)| {
            let mut nodes: Vec<usize> = solved.iter().map(|v| v[k]).collect();
            nodes.sort_unstable();
            LbRow {
                depth,
                instances: nodes.len(),
                mean_nodes: MeanCi::of(&nodes.iter().map(|&n| n as f64).collect::<Vec<_>>()).mean,
                q1: quantile(&nodes, 0.25),
                median: quantile(&nodes, 0.5),
                q3: quantile(&nodes, 0.75),
                max: nodes.last().copied().unwrap_or(0),
            }
        })
        .collect();
    LbStudy {
        rows,
        excluded: instances - solved.len(),
    }
}

pub fn lb_study_csv(study: &LbStudy) -> String {
    let mut out = String::from("depth,instances,mean_nodes,q1,median,q3,max,excluded\n");
    for r in &study.rows {
        out.push_str(&format!(
            "{},{},{:.3},{},{},{},{},{}\n",
            r.depth, r.instances, r.mean_nodes, r.q1, r.median, r.q3, r.max, study.excluded
        ));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetRow {
    pub budget: usize,
    pub mean_gap: f64,
    pub optimal_fraction: f64,
}

/// Mean certified gap and share of certified instances per node budget.
pub fn budget_curve(
    spec: &InstanceSpec,
    instances: usize,
    budgets: &[usize],
    lower_bound: LookAhead,
    workers: usize,
) -> Vec<BudgetRow> {
    let cfg = SolverConfig::default().with_lower_bound(lower_bound);
    let curves = run_indexed(instances, workers, |i| {
        gap_curve(&instance(spec, i), budgets, &cfg).expect("sorted positive budgets")
    });
    budgets
        .iter()
        .enumerate()
        .map(|(k, &budget)| {
            let gaps: Vec<f64> = curves.iter().map(|c| c[k].gap as f64).collect();
            let optimal = curves.iter().filter(|c| c[k].gap == 0).count();
            BudgetRow {
                budget,
                mean_gap: MeanCi::of(&gaps).mean,
                optimal_fraction: optimal as f64 / instances.max(1) as f64,
            }
        })
        .collect()
}

pub fn budget_curve_csv(rows: &[BudgetRow]) -> String {
    let mut out = String::from("budget,mean_gap,optimal_fraction\n");
    for r in rows {
        out.push_str(&format!("{},{:.5},{:.5}\n", r.budget, r.mean_gap, r.optimal_fraction));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathGapRow {
    pub level: u32,
    pub mean_gap: f64,
    /// Instances whose optimal path reaches this level.
    pub reaching: usize,
}

/// Mean of `z_opt(B^l) - S_N(B^l)` along optimal paths. Paths that end
/// before level `l` contribute zero there.
pub fn path_gap_curve(
    spec: &InstanceSpec,
    instances: usize,
    budget: usize,
    workers: usize,
) -> (Vec<PathGapRow>, usize) {
    let cfg = SolverConfig::default().with_budget(budget);
    let paths: Vec<Option<Vec<(u32, u32)>>> = run_indexed(instances, workers, |i| {
        optimal_path_lb_gap(&instance(spec, i), &cfg).expect("positive budget")
    });
    let solved: Vec<&Vec<(u32, u32)>> = paths.iter().flatten().collect();
    let levels = solved.iter().map(|p| p.len()).max().unwrap_or(0);
    let rows = (0..levels)
        .map(|l| {
            let gaps: Vec<f64> = solved
                .iter()
                .map(|p| p.get(l).map_or(0.0, |&(_, g)| g as f64))
                .collect();
            PathGapRow {
                level: l as u32,
                mean_gap: MeanCi::of(&gaps).mean,
                reaching: solved.iter().filter(|p| p.len() > l).count(),
            }
        })
        .collect();
    (rows, instances - solved.len())
}

pub fn path_gap_csv(rows: &[PathGapRow]) -> String {
    let mut out = String::from("level,mean_gap,reaching\n");
    for r in rows {
        out.push_str(&format!("{},{:.5},{}\n", r.level, r.mean_gap, r.reaching));
    }
    out
}

/// The six information levels of the value-of-information study.
pub const KNOWN_FRACTIONS: [f64; 6] = [0.25, 0.375, 0.5, 0.625, 0.75, 0.9];

#[derive(Debug, Clone, PartialEq)]
pub struct TwoStageConfig {
    pub spec: InstanceSpec,
    pub instances: usize,
    pub known_fractions: Vec<f64>,
    /// `t* = ceil(reveal_fraction * N) + 1` unless `t_star` is set.
    pub reveal_fraction: f64,
    pub t_star: Option<usize>,
    pub sampling: SamplingChoice,
    pub prune_times: Vec<usize>,
    pub run_asa: bool,
    pub solver: SolverConfig,
    pub workers: usize,
}

/// Sampling parameters before the bay size is known.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SamplingChoice {
    Hoeffding { delta: f64, epsilon: f64 },
    Fixed(usize),
    Exhaustive,
}

impl SamplingChoice {
    pub fn resolve(&self, bay: &Bay) -> Sampling {
        match *self {
            SamplingChoice::Hoeffding { delta, epsilon } => {
                Sampling::Hoeffding(SamplingParams::for_bay(delta, epsilon, bay))
            }
            SamplingChoice::Fixed(n) => Sampling::Fixed(n),
            SamplingChoice::Exhaustive => Sampling::Exhaustive,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfoCase {
    pub z_asa: Option<u32>,
    pub z_mh: u32,
    pub first_stage_nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfoInstance {
    pub z_opt: u32,
    pub cases: Vec<InfoCase>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfoRow {
    pub known: usize,
    pub t_star: usize,
    pub instances: usize,
    pub mean_zopt: f64,
    pub mean_zasa: Option<f64>,
    pub mean_zmh: f64,
    /// `(E[z_ASA] - E[z_opt]) / E[z_opt]` with its 95% half width.
    pub gap_asa: Option<MeanCi>,
    pub gap_mh: MeanCi,
    pub mean_first_stage_nodes: f64,
}

/// Relative gap of `values` over `opt` as a mean of per-instance
/// differences scaled by `E[opt]`, so the interval reflects pairing.
fn relative_gap(values: &[f64], opt: &[f64]) -> MeanCi {
    let base = MeanCi::of(opt).mean;
    let diffs: Vec<f64> = values.iter().zip(opt).map(|(v, o)| (v - o) / base).collect();
    MeanCi::of(&diffs)
}

/// Value of information: one row per known fraction.
pub fn value_of_information(
    config: &TwoStageConfig,
) -> Result<(Vec<InfoRow>, Vec<InfoInstance>), StochasticError> {
    let per_instance: Vec<Result<InfoInstance, StochasticError>> =
        run_indexed(config.instances, config.workers, |i| {
            let bay = instance(&config.spec, i);
            let raw = config.spec.generate_nth(i as u64).expect("valid spec");
            let z_opt = solve(&bay, &config.solver)?.relocations;
            let n = raw.len() as f64;
            let mut cases = Vec::new();
            for &frac in &config.known_fractions {
                let t_star = config
                    .t_star
                    .unwrap_or_else(|| ceil_frac(config.reveal_fraction, n) + 1);
                let inst = TwoStageInstance::new(raw.clone(), ceil_frac(frac, n), t_star)?;
                let z_mh = myopic_heuristic(&inst)
                    .map_err(|e| StochasticError::InvalidInstance(e.to_string()))?
                    .relocations;
                let (z_asa, nodes) = if config.run_asa {
                    let mut cfg = AsaConfig::new(config.sampling.resolve(&raw))
                        .with_seed(config.spec.seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
                    cfg.prune_times = config.prune_times.clone();
                    cfg.second_stage = config.solver.with_budget(config.solver.node_budget.min(100_000));
                    let out = asa_star(&inst, &cfg)?;
                    (Some(realized_cost(&inst, &out.first_stage, &config.solver)?), out.first_stage_nodes)
                } else {
                    (None, 0)
                };
                cases.push(InfoCase {
                    z_asa,
                    z_mh,
                    first_stage_nodes: nodes,
                });
            }
            Ok(InfoInstance { z_opt, cases })
        });
    let per_instance = per_instance.into_iter().collect::<Result<Vec<_>, _>>()?;
    let opt: Vec<f64> = per_instance.iter().map(|r| r.z_opt as f64).collect();
    let n_containers = config.spec.containers() as f64;
    let rows = config
        .known_fractions
        .iter()
        .enumerate()
        .map(|(k, &frac)| {
            let mh: Vec<f64> = per_instance.iter().map(|r| r.cases[k].z_mh as f64).collect();
            let asa: Option<Vec<f64>> = per_instance
                .iter()
                .map(|r| r.cases[k].z_asa.map(f64::from))
                .collect();
            let nodes: Vec<f64> = per_instance
                .iter()
                .map(|r| r.cases[k].first_stage_nodes as f64)
                .collect();
            InfoRow {
                known: ceil_frac(frac, n_containers),
                t_star: config
                    .t_star
                    .unwrap_or_else(|| ceil_frac(config.reveal_fraction, n_containers) + 1),
                instances: per_instance.len(),
                mean_zopt: MeanCi::of(&opt).mean,
                mean_zasa: asa.as_ref().map(|a| MeanCi::of(a).mean),
                mean_zmh: MeanCi::of(&mh).mean,
                gap_asa: asa.as_ref().map(|a| relative_gap(a, &opt)),
                gap_mh: relative_gap(&mh, &opt),
                mean_first_stage_nodes: MeanCi::of(&nodes).mean,
            }
        })
        .collect();
    Ok((rows, per_instance))
}

pub fn info_csv(rows: &[InfoRow]) -> String {
    let mut out = String::from(
        "known,t_star,instances,mean_zopt,mean_zasa,mean_zmh,gap_asa,gap_asa_ci95,gap_mh,gap_mh_ci95,mean_first_stage_nodes\n",
    );
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.5}")).unwrap_or_default();
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{:.5},{},{:.5},{},{},{:.5},{:.5},{:.2}\n",
            r.known,
            r.t_star,
            r.instances,
            r.mean_zopt,
            opt(r.mean_zasa),
            r.mean_zmh,
            opt(r.gap_asa.map(|g| g.mean)),
            opt(r.gap_asa.map(|g| g.ci95)),
            r.gap_mh.mean,
            r.gap_mh.ci95,
            r.mean_first_stage_nodes
        ));
    }
    out
}

/// Myopic heuristic against full-information H and against the
/// nearest-relocation rule, for one bay width and information level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MyopicRow {
    pub columns: usize,
    pub known_fraction: f64,
    pub instances: usize,
    pub mean_zmh: f64,
    pub mean_zh: f64,
    pub mean_znearest: f64,
    /// `E[z_MH] / E[z_H]`.
    pub ratio: f64,
    pub ratio_ci95: f64,
    /// `(E[z_nearest] - E[z_MH]) / E[z_nearest]`.
    pub savings: f64,
    pub savings_ci95: f64,
}

/// Ratio of means with a delta-method interval from paired samples.
fn ratio_ci(num: &[f64], den: &[f64]) -> (f64, f64) {
    let mn = MeanCi::of(num).mean;
    let md = MeanCi::of(den).mean;
    let r = mn / md;
    let lin: Vec<f64> = num.iter().zip(den).map(|(a, b)| (a - r * b) / md).collect();
    (r, MeanCi::of(&lin).ci95)
}

/// `t* = ceil(reveal_fraction * N) + 1` for every width.
pub fn myopic_study(
    tiers: usize,
    fill: usize,
    column_list: &[usize],
    known_fractions: &[f64],
    reveal_fraction: f64,
    instances: usize,
    seed: u64,
    workers: usize,
) -> Vec<MyopicRow> {
    let mut rows = Vec::new();
    for &columns in column_list {
        let spec = InstanceSpec::new(tiers, columns, fill, seed ^ (columns as u64) << 32);
        let n = spec.containers() as f64;
        let t_star = ceil_frac(reveal_fraction, n) + 1;
        let per: Vec<(Vec<f64>, f64, f64)> = run_indexed(instances, workers, |i| {
            let raw = spec.generate_nth(i as u64).expect("valid spec");
            let mh = known_fractions
                .iter()
                .map(|&f| {
                    let inst = TwoStageInstance::new(raw.clone(), ceil_frac(f, n).max(1), t_star)
                        .expect("valid two-stage instance");
                    myopic_heuristic(&inst).expect("spare tier").relocations as f64
                })
                .collect();
            let zh = h_relocations(&raw).expect("spare tier") as f64;
            let zn = nearest_relocation(&raw).expect("spare tier").relocations as f64;
            (mh, zh, zn)
        });
        let zh: Vec<f64> = per.iter().map(|p| p.1).collect();
        let zn: Vec<f64> = per.iter().map(|p| p.2).collect();
        for (k, &frac) in known_fractions.iter().enumerate() {
            let mh: Vec<f64> = per.iter().map(|p| p.0[k]).collect();
            let (ratio, ratio_ci95) = ratio_ci(&mh, &zh);
            let (kept, kept_ci) = ratio_ci(&mh, &zn);
            rows.push(MyopicRow {
                columns,
                known_fraction: frac,
                instances,
                mean_zmh: MeanCi::of(&mh).mean,
                mean_zh: MeanCi::of(&zh).mean,
                mean_znearest: MeanCi::of(&zn).mean,
                ratio,
                ratio_ci95,
                savings: 1.0 - kept,
                savings_ci95: kept_ci,
            });
        }
    }
    rows
}

pub fn myopic_csv(rows: &[MyopicRow]) -> String {
    let mut out = String::from(
        "C,known_frac,instances,mean_zmh,mean_zh,mean_znearest,ratio,ratio_ci95,savings,savings_ci95\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{:.5},{:.5},{:.5},{:.5},{:.5},{:.5},{:.5}\n",
            r.columns,
            r.known_fraction,
            r.instances,
            r.mean_zmh,
            r.mean_zh,
            r.mean_znearest,
            r.ratio,
            r.ratio_ci95,
            r.savings,
            r.savings_ci95
        ));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SamplingLossRow {
    pub delta: f64,
    pub epsilon: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PruningLossRow {
    pub columns: usize,
    pub containers: usize,
    pub bound: f64,
}

/// Loss bounds for pruning once at `t* - 1`, over a grid of precisions
/// and confidence levels.
pub fn sampling_loss_table(deltas: &[f64], epsilons: &[f64]) -> Vec<SamplingLossRow> {
    deltas
        .iter()
        .flat_map(|&delta| {
            epsilons.iter().map(move |&epsilon| SamplingLossRow {
                delta,
                epsilon,
                bound: error_bound_e1_e2(delta, epsilon).expect("valid parameters"),
            })
        })
        .collect()
}

/// Loss bounds for `m` early pruning rounds on bays with three containers
/// per column, taking the largest upper bound as `2N`.
pub fn pruning_loss_table(
    columns: &[usize],
    delta: f64,
    epsilon: f64,
    m: usize,
    d_min: f64,
) -> Vec<PruningLossRow> {
    columns
        .iter()
        .map(|&c| {
            let n = 3 * c;
            PruningLossRow {
                columns: c,
                containers: n,
                bound: error_bound_e3(delta, epsilon, m, d_min, 2.0 * n as f64)
                    .expect("valid parameters"),
            }
        })
        .collect()
}

pub fn error_bounds_csv(left: &[SamplingLossRow], right: &[PruningLossRow]) -> String {
    let mut out = String::from("delta,eps,e1_e2\n");
    for r in left {
        out.push_str(&format!("{},{},{:.2}\n", r.delta, r.epsilon, r.bound));
    }
    out.push_str("\nC,N,e3\n");
    for r in right {
        out.push_str(&format!("{},{},{:.2}\n", r.columns, r.containers, r.bound));
    }
    out
}
